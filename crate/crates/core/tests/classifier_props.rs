use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tfv_core::catalog::{entry, CatalogEntry, FieldId};
use tfv_core::classify::{
    anti_torqued_residual, classify_at, classify_region, decompose_at, decompose_in_frame,
    length_and_geodesic, Tolerances,
};
use tfv_core::sampling::sample_points;
use tfv_core::tensor::{metric_at, MetricValue};
use tfv_core::{Differentiation, Point};

fn entry_strategy() -> impl Strategy<Value = CatalogEntry> {
    (0..FieldId::ALL.len(), 2..=5usize).prop_map(|(i, n)| entry(FieldId::ALL[i], n).unwrap())
}

fn sample(e: &CatalogEntry, s: u64) -> (tfv_core::ModelSpace, Point) {
    let charts = e.charts();
    let chart = charts[(s % charts.len() as u64) as usize];
    (chart, sample_points(&chart, 1, s, &e.region).unwrap().remove(0))
}

/// Gram-Schmidt of random vectors in the metric `g`.
fn orthonormal_frame(g: &MetricValue, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut frame: Vec<Vec<f64>> = Vec::new();
    while frame.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for e in &frame {
            let c = g.inner(&v, e);
            for (vi, ei) in v.iter_mut().zip(e) {
                *vi -= c * ei;
            }
        }
        let len = g.norm(&v);
        if len > 1e-3 {
            frame.push(v.iter().map(|x| x / len).collect());
        }
    }
    frame
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn design_matrix_has_full_rank(e in entry_strategy(), s in any::<u64>()) {
        let (chart, p) = sample(&e, s);
        let d = decompose_at(&chart, &e.field, &p, Differentiation::Exact).unwrap();
        prop_assert!(d.rank_ok && d.min_singular > 1e-10, "{} {}", e.id, d.min_singular);
    }

    #[test]
    fn decomposition_is_frame_invariant(e in entry_strategy(), s in any::<u64>()) {
        prop_assume!(e.id != FieldId::Rot2d);
        let (chart, p) = sample(&e, s);
        let g = metric_at(&chart, &p).unwrap();
        let frame = orthonormal_frame(&g, chart.dim(), &mut ChaCha8Rng::seed_from_u64(s));
        let a = decompose_at(&chart, &e.field, &p, Differentiation::Exact).unwrap();
        let b = decompose_in_frame(&chart, &e.field, &p, &frame, Differentiation::Exact).unwrap();
        prop_assert!((a.f - b.f).abs() < 1e-8 * a.scale);
        let dw: Vec<f64> = a.omega.components.iter().zip(&b.omega.components).map(|(x, y)| x - y).collect();
        // ω scaled by |V| has the units of f
        prop_assert!(g.conorm(&dw).unwrap() * a.field_norm < 1e-8 * a.scale);
    }

    #[test]
    fn flags_are_consistent(e in entry_strategy(), s in any::<u64>()) {
        let (chart, p) = sample(&e, s);
        let v = classify_at(&chart, &e.field, &p, &Tolerances::default(), Differentiation::Exact).unwrap();
        prop_assert!(v.flags.is_consistent());
        prop_assert_eq!(v.flags, e.expected);
    }

    #[test]
    fn anti_torqued_entries_satisfy_reconstruction(n in 2..=5usize, s in any::<u64>()) {
        for id in [FieldId::HypAntiTorqued, FieldId::UhsEn] {
            let e = entry(id, n).unwrap();
            let (chart, p) = sample(&e, s);
            let v = classify_at(&chart, &e.field, &p, &Tolerances::default(), Differentiation::Exact).unwrap();
            let r = anti_torqued_residual(&chart, &e.field, &p, v.decomposition.f, Differentiation::Exact).unwrap();
            prop_assert!(r < 1e-8);
            // ω = −fν componentwise
            let g = metric_at(&chart, &p).unwrap();
            let nu = g.lower(&v.decomposition.field);
            let w = &v.decomposition.omega.components;
            let scale = w.iter().chain(&nu).fold(0.0_f64, |m, x| m.max(x.abs()));
            for (w, nu) in w.iter().zip(&nu) {
                prop_assert!((w + v.decomposition.f * nu).abs() < 1e-8 * scale);
            }
        }
    }

    #[test]
    fn uhs_en_generative_is_parallel_to_field(n in 2..=5usize, s in any::<u64>()) {
        let e = entry(FieldId::UhsEn, n).unwrap();
        let (chart, p) = sample(&e, s);
        let v = classify_at(&chart, &e.field, &p, &Tolerances::default(), Differentiation::Exact).unwrap();
        prop_assert!(v.diagnostics.parallel_alignment < 1e-8);
    }

    #[test]
    fn sampling_is_deterministic(e in entry_strategy(), s in any::<u64>()) {
        let a = sample_points(&e.space, 5, s, &e.region).unwrap();
        let b = sample_points(&e.space, 5, s, &e.region).unwrap();
        prop_assert_eq!(a, b);
    }
}

/// Unit, geodesic for constant-length anti-torqued fields; torqued proper
/// fields never have constant length.
#[test]
fn length_propositions_over_catalog() {
    let tol = Tolerances::default();
    for id in FieldId::ALL {
        for n in [2, 3, 4] {
            let e = entry(id, n).unwrap();
            for chart in e.charts() {
                let pts = sample_points(&chart, 100, 42, &e.region).unwrap();
                let v = classify_region(&chart, &e.field, &pts, &tol, Differentiation::Exact).unwrap();
                let len = length_and_geodesic(&chart, &e.field, &pts, 1e-8, Differentiation::Exact).unwrap();
                if v.flags.anti_torqued && len.length_constant {
                    assert!(len.unit && len.geodesic, "{id} n={n}: {len:?}");
                    assert!((len.length_max - 1.0).abs() < 1e-8);
                }
                if v.flags.torqued && v.flags.proper {
                    assert!(!len.length_constant, "{id} n={n} has constant length");
                }
            }
        }
    }
}

#[test]
fn hyp_torqued_conformal_scalar_matches_formula() {
    use tfv_core::field::ScalarField;
    for n in [3, 4] {
        let e = entry(FieldId::HypTorqued, n).unwrap();
        let f = e.expected_f.unwrap();
        let pts = sample_points(&e.space, 200, 42, &e.region).unwrap();
        let v = classify_region(&e.space, &e.field, &pts, &Tolerances::default(), Differentiation::Exact).unwrap();
        assert!(v.flags.torqued && v.flags.proper);
        for pv in &v.points {
            let x = &pv.point.coords;
            let big = e.space.embed(x).unwrap();
            let closed = big[1] * (big[0] / big[n]).exp();
            let catalog: f64 = f.value(&e.space, x).unwrap();
            assert!((pv.decomposition.f - closed).abs() < 1e-7 * closed.abs());
            assert!((catalog - closed).abs() <= 1e-14 * closed.abs());
            assert!(pv.diagnostics.orthogonality < 1e-9);
        }
        assert!(v.abs_f_min > 0.0 && v.omega_norm_min > 0.0);
    }
}

#[test]
fn rot2d_is_rejected_everywhere() {
    let e = entry(FieldId::Rot2d, 2).unwrap();
    let pts = sample_points(&e.space, 50, 1, &e.region).unwrap();
    let v = classify_region(&e.space, &e.field, &pts, &Tolerances::default(), Differentiation::Exact).unwrap();
    assert!(!v.flags.torse_forming);
    assert_eq!(v.failures.len(), 50);
    assert!(v.points.iter().all(|p| p.decomposition.residual > 0.1));
}
