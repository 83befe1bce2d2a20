//! Property tests for the structural invariants that should hold for any
//! admissible input, not just the worked examples.

use num_complex::Complex;
use proptest::prelude::*;

use levysim_core::grid::Grid;
use levysim_core::io::CsvTable;
use levysim_core::levy::{sample_stable, stable_density, StableParams};
use levysim_core::optics::{CollapseKernel, KernelKind};
use levysim_core::rng::stream_rng;
use levysim_core::state::WaveFunction;
use levysim_core::stats;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stable_samples_are_finite(
        alpha in 0.2f64..=2.0,
        sigma in 1e-3f64..1e3,
        mu in -1e3f64..1e3,
        seed in any::<u64>(),
    ) {
        let params = StableParams::new(alpha, sigma, mu).unwrap();
        let mut rng = stream_rng(seed, 0);
        for _ in 0..256 {
            let x = sample_stable(&params, &mut rng);
            prop_assert!(x.is_finite());
        }
    }

    #[test]
    fn stable_density_is_nonnegative_with_bounded_mass(
        alpha in 0.6f64..=2.0,
        sigma in 0.25f64..4.0,
        mu in -5.0f64..5.0,
    ) {
        let params = StableParams::new(alpha, sigma, mu).unwrap();
        let grid = Grid::new(mu - 25.0 * sigma, 50.0 * sigma / 2048.0, 2048).unwrap();
        let d = stable_density(&params, &grid).unwrap();
        prop_assert!(d.values.iter().all(|&v| v >= 0.0));
        let mass = d.total_mass();
        prop_assert!(mass <= 1.0 + 1e-6, "mass {mass}");
        prop_assert!(mass >= 0.90, "mass {mass}");
    }

    #[test]
    fn density_quantiles_are_monotone(
        alpha in 0.8f64..=2.0,
        seed in any::<u64>(),
    ) {
        let _ = seed;
        let params = StableParams::standard(alpha).unwrap();
        let grid = Grid::symmetric(60.0, 1024).unwrap();
        let d = stable_density(&params, &grid).unwrap();
        let qs = [0.1, 0.25, 0.5, 0.75, 0.9];
        let vals: Vec<f64> = qs.iter().map(|&q| d.quantile(q)).collect();
        for w in vals.windows(2) {
            prop_assert!(w[0] <= w[1] + 1e-12);
        }
        prop_assert!(d.quantile(0.5).abs() < 0.5);
    }

    #[test]
    fn collapse_keeps_states_normalized(
        center in -10.0f64..10.0,
        width in 0.5f64..6.0,
        kernel_width in 2.0f64..20.0,
        a_steps in -200i64..200,
    ) {
        let grid = Grid::symmetric(64.0, 2048).unwrap();
        let psi = WaveFunction::gaussian(grid, center, width).unwrap();
        let kern = CollapseKernel::from_fn(grid, KernelKind::Detected, move |z| {
            Complex::new((-z * z / (4.0 * kernel_width * kernel_width)).exp(), 0.0)
        });
        let a = grid.step() * a_steps as f64;
        if let Ok(post) = psi.apply_collapse(&kern, a) {
            prop_assert!((post.norm_sq() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn beta_statistic_is_scale_invariant(
        scale in 1e-6f64..1e6,
        seed in any::<u64>(),
    ) {
        let params = StableParams::standard(1.4f64).unwrap();
        let mut rng = stream_rng(seed, 7);
        let samples: Vec<f64> = (0..600).map(|_| sample_stable(&params, &mut rng)).collect();
        let beta = |xs: &[f64]| {
            let pairs: Vec<f64> = xs.chunks_exact(2).map(|c| c[0] + c[1]).collect();
            (stats::iqr(&pairs) / stats::iqr(xs)).log2()
        };
        let scaled: Vec<f64> = samples.iter().map(|x| scale * x).collect();
        prop_assert!((beta(&samples) - beta(&scaled)).abs() < 1e-10);
    }

    #[test]
    fn csv_tables_round_trip(
        rows in proptest::collection::vec(
            (any::<f32>().prop_map(f64::from), -1e12f64..1e12),
            1..40
        ),
        seed in any::<u64>(),
    ) {
        let mut table = CsvTable::new(&["a", "b"]).with_meta("seed", seed);
        for (a, b) in &rows {
            table.push_row(vec![*a, *b]);
        }
        let mut buf = Vec::new();
        table.write_to(&mut buf).unwrap();
        let back = CsvTable::read_from(buf.as_slice()).unwrap();
        let seed_str = seed.to_string();
        prop_assert_eq!(back.meta("seed"), Some(seed_str.as_str()));
        let a_col = back.column("a").unwrap();
        for ((a, _), got) in rows.iter().zip(a_col.iter()) {
            if a.is_finite() {
                prop_assert_eq!(a, got);
            }
        }
    }
}
