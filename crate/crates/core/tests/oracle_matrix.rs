use num_complex::Complex64;
use pqfi_core::channel::postselection_probability;
use pqfi_core::oracle::{
    postselected_meter, qfi_finite_difference, unitarity_residual, wigner_d_spectral, FdOptions, OracleChannel,
};
use pqfi_core::wigner::wigner_d;
use pqfi_core::{ChannelParams, HalfInt, MeterSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_meter(rng: &mut ChaCha8Rng, max_d: usize) -> MeterSpec {
    let d = rng.random_range(2..=max_d);
    let n = rng.random_range(1..=3);
    match rng.random_range(0..4) {
        0 => MeterSpec::pancharatnam(d, n),
        1 => MeterSpec::symmetric(d, n),
        2 => MeterSpec::fractional(d, n, rng.random_range(0.05..1.0)),
        _ => MeterSpec::explicit(n, (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()),
    }
    .unwrap()
}

fn random_params(rng: &mut ChaCha8Rng, max_twice: i32) -> ChannelParams {
    let jt = rng.random_range(0..=max_twice);
    let mi = jt - 2 * rng.random_range(0..=jt);
    let mf = jt - 2 * rng.random_range(0..=jt);
    let h = HalfInt::from_twice;
    ChannelParams::new(rng.random_range(-1.5..1.5), rng.random_range(0.0..std::f64::consts::TAU), h(jt), h(mi), h(mf))
        .unwrap()
}

#[test]
fn projection_norm_equals_probability() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let spec = random_meter(&mut rng, 8);
        let p = random_params(&mut rng, 4);
        let oracle = postselected_meter(&p, &spec).unwrap().norm_squared();
        let analytic = postselection_probability(&p, &spec).unwrap();
        worst = worst.max((oracle - analytic).abs());
    }
    assert!(worst <= 1e-10, "worst |P_oracle - P| = {worst:e}");
}

#[test]
fn spectral_sum_reproduces_each_branch() {
    // the sum over J_y eigenstates, applied to meter state |k>, gives d(beta_k)
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let spec = random_meter(&mut rng, 6);
        let p = random_params(&mut rng, 8);
        for r in spec.effective_eigenvalues() {
            let beta = p.theta - r * p.lambda;
            let z = wigner_d_spectral(p.j, p.m_f, p.m_i, beta).unwrap();
            let d = wigner_d(p.j, p.m_f, p.m_i, beta).unwrap();
            assert!((z - Complex64::new(d, 0.0)).norm() < 1e-10, "{p:?}: {z} vs {d}");
        }
    }
}

#[test]
fn every_factor_is_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let spec = random_meter(&mut rng, 8);
        let p = random_params(&mut rng, 8);
        let ch = OracleChannel::for_params(&spec, &p).unwrap();
        for u in ch.unitaries(p.lambda, p.theta) {
            assert!(unitarity_residual(&u) < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn orthogonal_norm_is_nonnegative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_meter(&mut rng, 6);
        let p = random_params(&mut rng, 4);
        if let Ok(fd) = qfi_finite_difference(&p, &spec, &FdOptions::default()) {
            prop_assert!(fd.i_perp >= -1e-9 * fd.i_total.max(1.0));
            prop_assert!(fd.q_parallel <= fd.q_total * fd.p * (1.0 + 1e-6) + 1e-300);
        }
    }
}
