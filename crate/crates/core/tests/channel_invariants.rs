use pqfi_core::channel::qfi_breakdown;
use pqfi_core::landmarks::theta_perp_max;
use pqfi_core::optimize::SearchOptions;
use pqfi_core::{Channel, ChannelParams, HalfInt, MeterSpec};
use proptest::prelude::*;

fn law(kind: u8, d: usize, n: u32, eps: f64) -> MeterSpec {
    match kind {
        0 => MeterSpec::pancharatnam(d, n),
        1 => MeterSpec::symmetric(d, n),
        _ => MeterSpec::fractional(d, n, eps),
    }
    .unwrap()
}

fn peak_i_perp(spec: &MeterSpec, twice_j: i32, lambda: f64) -> f64 {
    let p = ChannelParams::extremal(lambda, 0.0, HalfInt::from_twice(twice_j));
    let th = theta_perp_max(&p, spec, &SearchOptions::default()).unwrap().theta;
    qfi_breakdown(&p.with_theta(th), spec).unwrap().i_perp
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn breakdown_is_consistent(
        kind in 0u8..3, d in 2usize..12, n in 1u32..4, eps in 0.05f64..1.0,
        jt in 0i32..7, ai in 0i32..7, af in 0i32..7,
        lam in -1.0f64..1.0, th in -7.0f64..7.0,
    ) {
        let spec = law(kind, d, n, eps);
        let (ai, af) = (ai.min(jt), af.min(jt));
        let p = ChannelParams::new(lam, th, HalfInt::from_twice(jt), HalfInt::from_twice(jt - 2 * ai), HalfInt::from_twice(jt - 2 * af)).unwrap();
        let b = match qfi_breakdown(&p, &spec) {
            Ok(b) => b,
            Err(_) => return Ok(()),
        };
        prop_assert!(b.p > 0.0 && b.p <= 1.0 + 1e-12);
        prop_assert!(b.i_perp >= 0.0);
        prop_assert!(b.i_perp <= b.i_total * (1.0 + 1e-12) + 1e-12);
        prop_assert!(b.q_parallel <= b.q_total * b.p * (1.0 + 1e-9) + 1e-300);
        prop_assert_eq!(b.t_per_trial, b.p * b.i_perp);
        prop_assert_eq!(b.baseline, f64::from(jt * jt));
        let scale = b.i_total.max(1e-12);
        prop_assert!((b.i_total - b.i_parallel - b.i_perp).abs() <= 1e-9 * scale);
    }

    #[test]
    fn qubit_q_total_is_constant(kind in 0u8..3, d in 2usize..10, n in 1u32..4, eps in 0.05f64..1.0,
                                 lam in -3.0f64..3.0, th in -7.0f64..7.0) {
        let spec = law(kind, d, n, eps);
        let ch = Channel::extremal(&spec, HalfInt::HALF).unwrap();
        let reference = ch.moments(0.1, 0.2).q_total;
        prop_assert_eq!(ch.moments(lam, th).q_total, reference);
    }
}

#[test]
fn probability_decays_exponentially_in_j() {
    let spec = MeterSpec::pancharatnam(2, 1).unwrap();
    let lam = 1e-3;
    let half = Channel::extremal(&spec, HalfInt::HALF).unwrap();
    for twice in 1..=4 {
        let ch = Channel::extremal(&spec, HalfInt::from_twice(twice)).unwrap();
        for i in 0..200 {
            // away from the fringe minimum, where the two branches are comparable
            let th = 0.05 + lam / 2.0 + (std::f64::consts::TAU - 0.1) * f64::from(i) / 199.0;
            let expected = half.probability(lam, th).powi(twice);
            let got = ch.probability(lam, th);
            assert!((got - expected).abs() <= 0.01 * expected, "2j={twice} theta={th}: {got} vs {expected}");
        }
    }
}

#[test]
fn peak_orthogonal_qfi_grows_linearly_in_j() {
    let spec = MeterSpec::pancharatnam(2, 1).unwrap();
    let base = peak_i_perp(&spec, 1, 1e-3);
    let mut ratios = Vec::new();
    for twice in 2..=8 {
        ratios.push(peak_i_perp(&spec, twice, 1e-3) / base);
    }
    let off: Vec<(i32, f64)> =
        (2..=8).zip(&ratios).filter(|(t, r)| (*r / f64::from(*t) - 1.0).abs() > 0.05).map(|(t, r)| (t, *r)).collect();
    assert!(off.is_empty(), "peak I_perp(j)/I_perp(1/2) vs 2j, outside 5%: {off:?}");
}

#[test]
fn symmetric_law_keeps_one_sixth_of_the_qubit_peak() {
    let p = peak_i_perp(&MeterSpec::pancharatnam(2, 1).unwrap(), 1, 1e-3);
    let s = peak_i_perp(&MeterSpec::symmetric(2, 1).unwrap(), 1, 1e-3);
    let ratio = s / p;
    assert!((ratio - 1.0 / 6.0).abs() <= 0.005 / 6.0, "ratio {ratio}, expected 1/6");
}
