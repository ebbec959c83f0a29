//! Plain-text exports: edge list, vertex table and the CSV files for cut
//! times, metric profiles, walk traces and heat-kernel estimates.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! file parses back to the exact values and equal inputs give equal bytes.

use std::io::{BufRead, Write};

use crate::cut_structure::CutTimeSet;
use crate::range_graph::RangeGraph;
use crate::range_walker::WalkOnRangeTrace;
use crate::resistance_metrics::MetricProfile;
use crate::{Error, Result};

pub const CUTS_HEADER: &str = "k,provisional";
pub const PROFILE_HEADER: &str = "k,resistance,distance,past_max_resistance,past_max_distance,provisional";
pub const WALK_HEADER: &str = "step,vertex";
pub const HEAT_KERNEL_HEADER: &str = "target,distance,resistance,estimate,stderr";

fn bad(line: usize, what: &str) -> Error {
    Error::BadFormat(format!("line {line}: {what}"))
}

fn parse<T: std::str::FromStr>(field: Option<&str>, line: usize, name: &str) -> Result<T> {
    field
        .ok_or_else(|| bad(line, &format!("missing {name}")))?
        .trim()
        .parse()
        .map_err(|_| bad(line, &format!("bad {name}")))
}

fn flag(b: bool) -> u8 {
    b as u8
}

fn parse_flag(field: Option<&str>, line: usize) -> Result<bool> {
    match field.map(str::trim) {
        Some("0") => Ok(false),
        Some("1") => Ok(true),
        _ => Err(bad(line, "flag must be 0 or 1")),
    }
}

/// Data lines after a required header, with 1-based line numbers.
fn body<R: BufRead>(r: R, header: &str) -> Result<Vec<(usize, String)>> {
    let mut lines = r.lines();
    match lines.next().transpose()? {
        Some(h) if h.trim() == header => {}
        _ => return Err(bad(1, &format!("expected header {header:?}"))),
    }
    let mut out = Vec::new();
    for (i, l) in lines.enumerate() {
        let l = l?;
        if !l.trim().is_empty() {
            out.push((i + 2, l));
        }
    }
    Ok(out)
}

/// One `id_u id_v` line per edge with `id_u < id_v`, sorted.
pub fn write_edge_list<W: Write>(graph: &RangeGraph, mut w: W) -> Result<()> {
    for v in 0..graph.vertex_count() as u32 {
        for &u in graph.neighbors(v) {
            if u > v {
                writeln!(w, "{v} {u}")?;
            }
        }
    }
    Ok(())
}

pub fn read_edge_list<R: BufRead>(r: R) -> Result<Vec<(u32, u32)>> {
    let mut edges = Vec::new();
    for (i, l) in r.lines().enumerate() {
        let l = l?;
        if l.trim().is_empty() {
            continue;
        }
        let mut f = l.split_whitespace();
        edges.push((parse(f.next(), i + 1, "id_u")?, parse(f.next(), i + 1, "id_v")?));
    }
    Ok(edges)
}

/// `id x1 .. xd degree first_visit last_visit`, one line per vertex.
pub fn write_vertex_table<W: Write>(graph: &RangeGraph, mut w: W) -> Result<()> {
    for v in 0..graph.vertex_count() as u32 {
        write!(w, "{v}")?;
        for c in graph.coords(v) {
            write!(w, " {c}")?;
        }
        writeln!(w, " {} {} {}", graph.degree(v), graph.first_visit(v), graph.last_visit(v))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexRow {
    pub id: u32,
    pub coords: Vec<i64>,
    pub degree: u32,
    pub first_visit: usize,
    pub last_visit: usize,
}

pub fn read_vertex_table<R: BufRead>(r: R, dimension: usize) -> Result<Vec<VertexRow>> {
    let mut rows = Vec::new();
    for (i, l) in r.lines().enumerate() {
        let l = l?;
        if l.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != dimension + 4 {
            return Err(bad(i + 1, &format!("expected {} fields", dimension + 4)));
        }
        let mut f = fields.into_iter();
        let id = parse(f.next(), i + 1, "id")?;
        let coords = (0..dimension).map(|_| parse(f.next(), i + 1, "coordinate")).collect::<Result<_>>()?;
        rows.push(VertexRow {
            id,
            coords,
            degree: parse(f.next(), i + 1, "degree")?,
            first_visit: parse(f.next(), i + 1, "first_visit")?,
            last_visit: parse(f.next(), i + 1, "last_visit")?,
        });
    }
    Ok(rows)
}

pub fn write_cuts_csv<W: Write>(cuts: &CutTimeSet, mut w: W) -> Result<()> {
    writeln!(w, "{CUTS_HEADER}")?;
    for &k in cuts.times() {
        writeln!(w, "{k},{}", flag(cuts.is_provisional(k as usize)))?;
    }
    Ok(())
}

pub fn read_cuts_csv<R: BufRead>(r: R) -> Result<Vec<(u32, bool)>> {
    body(r, CUTS_HEADER)?
        .into_iter()
        .map(|(n, l)| {
            let mut f = l.split(',');
            Ok((parse(f.next(), n, "k")?, parse_flag(f.next(), n)?))
        })
        .collect()
}

pub fn write_profile_csv<W: Write>(profile: &MetricProfile, mut w: W) -> Result<()> {
    writeln!(w, "{PROFILE_HEADER}")?;
    for i in 0..profile.grid.len() {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            profile.grid[i],
            profile.resistance[i],
            profile.distance[i],
            profile.past_max_resistance[i],
            profile.past_max_distance[i],
            flag(profile.provisional[i])
        )?;
    }
    Ok(())
}

pub fn read_profile_csv<R: BufRead>(r: R) -> Result<MetricProfile> {
    let mut p = MetricProfile {
        grid: Vec::new(),
        resistance: Vec::new(),
        distance: Vec::new(),
        past_max_resistance: Vec::new(),
        past_max_distance: Vec::new(),
        provisional: Vec::new(),
    };
    for (n, l) in body(r, PROFILE_HEADER)? {
        let mut f = l.split(',');
        p.grid.push(parse(f.next(), n, "k")?);
        p.resistance.push(parse(f.next(), n, "resistance")?);
        p.distance.push(parse(f.next(), n, "distance")?);
        p.past_max_resistance.push(parse(f.next(), n, "past_max_resistance")?);
        p.past_max_distance.push(parse(f.next(), n, "past_max_distance")?);
        p.provisional.push(parse_flag(f.next(), n)?);
    }
    Ok(p)
}

pub fn write_walk_csv<W: Write>(trace: &WalkOnRangeTrace, mut w: W) -> Result<()> {
    writeln!(w, "{WALK_HEADER}")?;
    for (i, v) in trace.steps.iter().enumerate() {
        writeln!(w, "{i},{v}")?;
    }
    Ok(())
}

pub fn read_walk_csv<R: BufRead>(r: R) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for (n, l) in body(r, WALK_HEADER)? {
        let mut f = l.split(',');
        let step: usize = parse(f.next(), n, "step")?;
        if step != out.len() {
            return Err(bad(n, "steps must be consecutive from 0"));
        }
        out.push(parse(f.next(), n, "vertex")?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatKernelRow {
    pub target: u32,
    pub distance: u32,
    pub resistance: f64,
    pub estimate: f64,
    pub stderr: f64,
}

pub fn write_heat_kernel_csv<W: Write>(rows: &[HeatKernelRow], mut w: W) -> Result<()> {
    writeln!(w, "{HEAT_KERNEL_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{}", r.target, r.distance, r.resistance, r.estimate, r.stderr)?;
    }
    Ok(())
}

pub fn read_heat_kernel_csv<R: BufRead>(r: R) -> Result<Vec<HeatKernelRow>> {
    body(r, HEAT_KERNEL_HEADER)?
        .into_iter()
        .map(|(n, l)| {
            let mut f = l.split(',');
            Ok(HeatKernelRow {
                target: parse(f.next(), n, "target")?,
                distance: parse(f.next(), n, "distance")?,
                resistance: parse(f.next(), n, "resistance")?,
                estimate: parse(f.next(), n, "estimate")?,
                stderr: parse(f.next(), n, "stderr")?,
            })
        })
        .collect()
}
