use proptest::prelude::*;
use rangewalk::formats::*;
use rangewalk::lattice_walk::generate_trajectory;
use rangewalk::range_graph::build_range_graph;
use rangewalk::range_walker::simulate_walk;

proptest! {
    #[test]
    fn text_exports_round_trip(n in 1usize..300, steps in 0usize..200, seed: u64) {
        let g = build_range_graph(&generate_trajectory(3, n, seed).unwrap()).unwrap();

        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        for (u, v) in read_edge_list(&buf[..]).unwrap() {
            prop_assert!(u < v && g.has_edge(u, v));
        }

        let mut buf = Vec::new();
        write_vertex_table(&g, &mut buf).unwrap();
        let rows = read_vertex_table(&buf[..], 3).unwrap();
        for r in &rows {
            prop_assert_eq!(r.degree, g.degree(r.id));
            prop_assert_eq!(&r.coords, &g.point(r.id).coords().to_vec());
        }

        let trace = simulate_walk(&g, 0, steps, seed).unwrap();
        let mut buf = Vec::new();
        write_walk_csv(&trace, &mut buf).unwrap();
        prop_assert_eq!(read_walk_csv(&buf[..]).unwrap(), trace.steps);
    }

    #[test]
    fn heat_kernel_rows_round_trip(vals in prop::collection::vec((any::<u32>(), any::<u32>(), 0.0f64..1e6, 0.0f64..1.0, 0.0f64..1.0), 0..40)) {
        let rows: Vec<HeatKernelRow> = vals
            .into_iter()
            .map(|(target, distance, resistance, estimate, stderr)| HeatKernelRow { target, distance, resistance, estimate, stderr })
            .collect();
        let mut buf = Vec::new();
        write_heat_kernel_csv(&rows, &mut buf).unwrap();
        prop_assert_eq!(read_heat_kernel_csv(&buf[..]).unwrap(), rows);
    }
}
