use proptest::prelude::*;
use sac_core::analysis::{linspace, regime_sweep, BlockId, SweepSetup};
use sac_core::family::{family_at_temperature, ShapeFamily, ShapeKind};
use sac_core::mismatch::{sample_mismatch, MismatchSpec};
use sac_core::spline::make_spline_set;
use sac_core::SacUnit;

#[test]
fn closed_form_examples() {
    assert_eq!(ShapeFamily::rectifier().value(-2.0), 0.0);
    let si = ShapeFamily::new(ShapeKind::StrongInversion, 1.0, 1.0).unwrap();
    assert_eq!(si.value(3.0), 9.0);
    let wi = ShapeFamily::new(ShapeKind::WeakInversion, 1.0, 1.0).unwrap();
    assert_eq!(wi.value(0.0), 1.0);
}

#[test]
fn thermal_voltage_examples() {
    let room = family_at_temperature(ShapeKind::WeakInversion, 25.0).unwrap();
    assert!((room.thermal_scale - 0.025_69).abs() < 1e-5);
    let cold = family_at_temperature(ShapeKind::WeakInversion, -45.0).unwrap();
    assert!((cold.thermal_scale - 0.019_66).abs() < 1e-5);
    assert_eq!(
        family_at_temperature(ShapeKind::Rectifier, 125.0).unwrap(),
        family_at_temperature(ShapeKind::Rectifier, -45.0).unwrap()
    );
    assert!(family_at_temperature(ShapeKind::WeakInversion, -61.0).is_err());
    assert!(family_at_temperature(ShapeKind::WeakInversion, 201.0).is_err());
}

/// `g(0)` is `k`, `0`, `0` and `k ln^2 2` for WI, rectifier, SI and EKV.
#[test]
fn zero_level_is_at_most_the_gain() {
    for kind in ShapeKind::ALL {
        for u in [0.3, 1.0, 2.5] {
            let f = ShapeFamily::new(kind, u, 1.7).unwrap();
            assert!(f.value(0.0) <= f.gain, "{kind:?} U={u}");
            assert!(f.value(-1e3) < 1e-12);
        }
    }
    assert_eq!(ShapeFamily::rectifier().value(0.0), 0.0);
}

fn kinds() -> impl Strategy<Value = ShapeKind> {
    prop::sample::select(ShapeKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn derivative_matches_central_differences(
        kind in kinds(), u in 0.05..3.0f64, k in 0.1..5.0f64, x in -8.0..8.0f64,
        gain in 0.8..1.2f64, offset in -0.2..0.2f64,
    ) {
        let f = ShapeFamily { branch_gain_error: gain, branch_offset_error: offset, ..ShapeFamily::new(kind, u, k).unwrap() };
        let step = 1e-6 * (1.0 + x.abs());
        if !kind.is_smooth() {
            prop_assume!((x + offset).abs() > 1e-3);
        }
        let (_, d) = f.value_and_derivative(x);
        let fd = (f.value(x + step) - f.value(x - step)) / (2.0 * step);
        prop_assert!((fd - d).abs() <= 1e-6 * d.abs().max(1e-3), "fd {fd} vs {d}");
    }

    #[test]
    fn non_decreasing_on_sampled_grids(kind in kinds(), u in 0.01..5.0f64, k in 0.01..10.0f64, lo in -50.0..0.0f64) {
        let f = ShapeFamily::new(kind, u, k).unwrap();
        let grid = linspace(lo, lo + 60.0, 601);
        let v: Vec<f64> = grid.iter().map(|&x| f.value(x)).collect();
        prop_assert!(v.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(v.iter().all(|&y| y >= 0.0));
    }
}

#[test]
fn mismatch_sampling_examples() {
    let base = ShapeFamily::new(ShapeKind::WeakInversion, 0.4, 1.0).unwrap();
    let zero = MismatchSpec::new(0.0, 0.0, 5).unwrap();
    assert_eq!(sample_mismatch(base, zero, 4).unwrap(), vec![base; 4]);
    let spec = MismatchSpec::new(0.05, 0.0, 77).unwrap();
    assert_eq!(sample_mismatch(base, spec, 8).unwrap(), sample_mismatch(base, spec, 8).unwrap());
    let gains: Vec<f64> = sample_mismatch(base, spec, 10_000).unwrap().iter().map(|f| f.branch_gain_error).collect();
    let mean = gains.iter().sum::<f64>() / gains.len() as f64;
    let sd = (gains.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (gains.len() - 1) as f64).sqrt();
    assert!((0.045..=0.055).contains(&sd), "sd = {sd}");
}

/// Normalized proto-shapes of the four families at S = 3 agree pointwise.
#[test]
fn proto_shape_is_regime_invariant() {
    let grid = linspace(-4.0, 4.0, 201);
    let r = regime_sweep(BlockId::Proto, &grid, &ShapeKind::ALL, &[25.0], &SweepSetup::default()).unwrap();
    let d = r.max_pairwise_deviation();
    assert!(d <= 0.10, "pairwise deviation {d}");
}

#[test]
fn weak_inversion_proto_shape_is_temperature_invariant() {
    let grid = linspace(-4.0, 4.0, 201);
    let r = regime_sweep(BlockId::Proto, &grid, &[ShapeKind::WeakInversion], &[-45.0, 25.0, 125.0], &SweepSetup::default())
        .unwrap();
    let d = r.max_pairwise_deviation();
    assert!(d <= 0.10, "pairwise deviation {d}");
}

fn log_sum_exp(x: &[f64], c: f64) -> f64 {
    let m = x.iter().cloned().fold(f64::MIN, f64::max);
    m + c * x.iter().map(|v| ((v - m) / c).exp()).sum::<f64>().ln()
}

/// Worst gap between the unit's output (no reference branch) and
/// `C ln sum e^{x / C}` over a fixed set of instances.
fn lse_error(s: usize) -> f64 {
    let u = SacUnit::rectifier(s, 1.0).unwrap().with_reference(false);
    let mut worst = 0.0f64;
    for a in linspace(-3.0, 3.0, 25) {
        for b in linspace(-3.0, 3.0, 25) {
            let x = [a, b, 0.5 * (a - b)];
            worst = worst.max((u.proto_shape(&x).unwrap() - log_sum_exp(&x, 1.0)).abs());
        }
    }
    worst
}

/// Two splines tighten the log-sum-exp approximation; further splines sit
/// beyond the reach of the folded constraint and change nothing.
#[test]
fn spline_count_fidelity_against_log_sum_exp() {
    let e: Vec<f64> = (1..=6).map(lse_error).collect();
    assert!(e[1] < e[0], "{e:?}");
    for s in 2..6 {
        assert!((e[s] - e[1]).abs() < 1e-12, "{e:?}");
    }
    // Spline 3 of any input x is active only if x + O_3 > h, while the first
    // spline of the largest input alone forces h >= max(x) + O_1 - C'.
    let s3 = make_spline_set(3, 1.0).unwrap();
    assert!(s3.offsets[0] - s3.c_prime > s3.offsets[2]);
}

/// One spline with the zero reference: only `x` is active, so
/// `h = x + O_1 - C'` with `O_1 = C (1 + ln 2)` and `C' = 2C`.
#[test]
fn single_spline_unit_with_reference() {
    let u = SacUnit::rectifier(1, 1.0).unwrap();
    assert!(u.include_zero_reference);
    let (h, g) = u.proto_with_gradient(&[3.0]).unwrap();
    assert!((h - (2.0 + core::f64::consts::LN_2)).abs() < 1e-12, "{h}");
    assert_eq!(g, vec![1.0]);
}
