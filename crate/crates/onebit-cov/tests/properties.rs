//! Property tests over randomized inputs: inversion identities, closed-form
//! integrals against quadrature, quantizer well-formedness, and CSV
//! round-trips.

use proptest::prelude::*;

use onebit_cov::arcsine::{output_autocorrelation_oracle, PairParams};
use onebit_cov::io::MetricsRecord;
use onebit_cov::process::{sample_ensemble, ProcessModel};
use onebit_cov::quad;
use onebit_cov::recover::{self, gauss_legendre, pade};
use onebit_cov::sampling::{quantize, sample_autocorrelation, ThresholdSpec};
use onebit_cov::special;

/// (p0i, p0j, pij, d) with a comfortably positive determinant.
fn pair_strategy() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.25f64..1.2, 0.25f64..1.2, -0.85f64..0.85, -0.8f64..0.8)
        .prop_map(|(p0i, p0j, f, d)| (p0i, p0j, f * p0i.min(p0j), d))
}

proptest! {
    #[test]
    fn q_symmetry_holds_everywhere(x in -12.0f64..12.0) {
        let s = special::q_function(x).unwrap().value() + special::q_function(-x).unwrap().value();
        prop_assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn q_inverse_round_trips(p in 1e-8f64..0.99999999) {
        let x = special::q_inverse(p).unwrap();
        let back = special::q_function(x).unwrap().value();
        prop_assert!(((back - p) / p).abs() < 1e-10, "p={p}, back={back}");
    }

    #[test]
    fn variance_recovery_inverts_first_moment(
        p0 in 0.05f64..4.0,
        d in prop_oneof![0.05f64..1.5, -1.5f64..-0.05],
        s2 in 0.0f64..0.5,
    ) {
        let spec = ThresholdSpec::new(d, s2).unwrap();
        let mu = 2.0 * special::q_function(d / p0.sqrt()).unwrap().value() - 1.0;
        prop_assume!(mu.abs() < 1.0 - 1e-12);
        let r = recover::recover_variance_entry(0, mu, &spec).unwrap();
        prop_assert!((r - (p0 - s2)).abs() < 1e-9 * p0.max(1.0), "r={r}, want {}", p0 - s2);
    }

    #[test]
    fn oracle_is_a_correlation_and_gl_tracks_it(pair in pair_strategy()) {
        let (p0i, p0j, pij, d) = pair;
        let p = PairParams::new(p0i, p0j, pij, d).unwrap();
        let oracle = output_autocorrelation_oracle(&p, 1e-10).unwrap();
        prop_assert!(oracle.abs() <= 1.0 + 1e-9, "oracle {oracle}");
        let gl = gauss_legendre::gl_integral(&p, 30).unwrap();
        prop_assert!((gl - oracle).abs() < 1e-6, "gl {gl} vs oracle {oracle}");
    }

    #[test]
    fn rational_closed_form_matches_quadrature(
        e in -2.0f64..2.0,
        s in -2.0f64..2.0,
        k in prop_oneof![0.2f64..3.0, -3.0f64..-0.2],
        g in -1.5f64..1.5,
        h in -2.0f64..2.0,
    ) {
        // keep the denominator away from zero on the interval
        let den = |t: f64| k + t * (g + t * h);
        let (ta, tb) = (0.0, std::f64::consts::FRAC_PI_2);
        let min_den = (0..=200)
            .map(|i| den(ta + (tb - ta) * i as f64 / 200.0).abs())
            .fold(f64::INFINITY, f64::min);
        prop_assume!(min_den > 0.05);
        let got = pade::rational_integral(e, s, k, g, h, ta, tb);
        let want = quad::adaptive_gk(|t| Ok((e + s * t) / den(t)), ta, tb, 1e-12).unwrap();
        prop_assert!((got - want).abs() < 1e-9 * (1.0 + want.abs()), "{got} vs {want}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quantizer_outputs_are_well_formed(
        n in 2usize..8,
        n_x in 1usize..40,
        seed in 0u64..1000,
        d in -1.0f64..1.0,
        s2 in 0.0f64..0.4,
    ) {
        let model = ProcessModel::Wiener { n, v_min: 0.2, v_max: 0.8 };
        let e = sample_ensemble(&model, n_x, seed).unwrap();
        let data = quantize(&e, ThresholdSpec::new(d, s2).unwrap(), seed ^ 0xf00).unwrap();
        prop_assert!(data.signs.iter().all(|&v| v == 1.0 || v == -1.0));
        let r = sample_autocorrelation(&data);
        for i in 0..n {
            prop_assert_eq!(r[(i, i)], 1.0);
            for j in 0..n {
                prop_assert!((r[(i, j)] - r[(j, i)]).abs() < 1e-14);
                prop_assert!(r[(i, j)].abs() <= 1.0 + 1e-14);
            }
        }
    }

    #[test]
    fn metrics_csv_round_trips_random_tables(
        rows in proptest::collection::vec(
            (proptest::collection::vec(any::<f64>(), 3), 0usize..4),
            1..12,
        ),
        wall in proptest::collection::vec(0.0f64..1e6, 0..3),
    ) {
        let mut rec = MetricsRecord::new("property", &["a", "b", "c"]);
        for (vals, key_idx) in rows {
            rec.push(&format!("k{key_idx}"), vals);
        }
        for (i, w) in wall.iter().enumerate() {
            rec.stage_wall_ms.push((format!("s{i}"), *w));
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        rec.write(&path).unwrap();
        let back = MetricsRecord::read(&path).unwrap();
        prop_assert!(rec.same_as(&back));
    }
}
