use proptest::prelude::*;
use sor::scheduler::{solve_parallel_with, ParallelOptions};
use sor::{cell_color, solve_serial, BoundarySpec, Grid, SolverConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parallel_equals_serial(
        n in 3usize..40,
        workers in 1usize..10,
        omega in 0.05f64..1.95,
        north in 0.0f64..1.0,
        west in -1.0f64..1.0,
        iterations in 1usize..60,
        k in 1usize..10,
    ) {
        let boundary = BoundarySpec { north, west, ..BoundarySpec::north_hot() };
        let config = SolverConfig {
            omega,
            epsilon: 1e-9,
            max_iterations: iterations.max(k),
            check_interval: k,
            workers,
        };
        let mut serial = Grid::new(n, boundary, 0.1).unwrap();
        let expected = solve_serial(&mut serial, &config).unwrap();
        let mut par = Grid::new(n, boundary, 0.1).unwrap();
        let (report, _) = solve_parallel_with(&mut par, &config, (), &ParallelOptions::default()).unwrap();
        prop_assert!(par.bits_eq(&serial));
        prop_assert_eq!(report.iterations, expected.iterations);
        prop_assert_eq!(report.final_max_change, expected.final_max_change);
    }

    #[test]
    fn workers_write_only_their_cells(n in 3usize..20, workers in 1usize..8, iterations in 1usize..4) {
        let mut g = Grid::new(n, BoundarySpec::north_hot(), 0.0).unwrap();
        let config = SolverConfig::fixed_iterations(1.3, iterations, workers);
        let opts = ParallelOptions { track_writes: true, ..Default::default() };
        let (_, trace) = solve_parallel_with(&mut g, &config, (), &opts).unwrap();
        let mut seen = vec![0usize; n * n];
        for (worker, log) in trace.writes.iter().enumerate() {
            let rows = trace.partition.block(worker).rows.clone();
            for w in log {
                prop_assert!(rows.contains(&w.row));
                prop_assert!(w.col >= 1 && w.col < n - 1);
                prop_assert_eq!(cell_color(w.row, w.col), w.color);
                seen[w.row * n + w.col] += 1;
            }
        }
        for i in 0..n {
            for j in 0..n {
                let interior = i > 0 && j > 0 && i < n - 1 && j < n - 1;
                prop_assert_eq!(seen[i * n + j], if interior { iterations } else { 0 });
            }
        }
    }
}
