//! Closed-form expressions for special cases, kept separate from the general
//! series so that each can be checked against the other.
//!
//! Unless stated otherwise the formulas assume extremal selection
//! (`m_i = j`, `m_f = -j`) and the Pancharatnam law.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::meter::{principal, MeterSpec};

/// `I_T` for a spin-1/2 system on a qubit meter:
/// `n^2 / [1 - |cos(n lambda/2)| cos(Theta - n lambda/2)]`.
pub fn qubit_i_total(n: u32, lambda: f64, theta: f64) -> f64 {
    let x = f64::from(n) * lambda;
    f64::from(n * n) / qubit_fringe(x, theta)
}

/// `I_par` for a spin-1/2 system on a qubit meter:
/// `n^2 sin^2((n lambda - Theta)/2) / [1 - |cos(n lambda/2)| cos(Theta - n lambda/2)]^2`.
pub fn qubit_i_parallel(n: u32, lambda: f64, theta: f64) -> f64 {
    let x = f64::from(n) * lambda;
    let f = qubit_fringe(x, theta);
    f64::from(n * n) * (0.5 * (x - theta)).sin().powi(2) / (f * f)
}

pub fn qubit_i_perp(n: u32, lambda: f64, theta: f64) -> f64 {
    qubit_i_total(n, lambda, theta) - qubit_i_parallel(n, lambda, theta)
}

fn qubit_fringe(x: f64, theta: f64) -> f64 {
    1.0 - (0.5 * x).cos().abs() * (theta - 0.5 * x).cos()
}

/// Fringe minimum, `n lambda / 2`.
pub fn qubit_theta_total(n: u32, lambda: f64) -> f64 {
    0.5 * f64::from(n) * lambda
}

/// Zero of the parallel term, `n lambda`.
pub fn qubit_theta_parallel(n: u32, lambda: f64) -> f64 {
    f64::from(n) * lambda
}

/// Maximum of `I_perp`, `arccos(cos^2(n lambda/2))`, evaluated as
/// `2 asin(|sin(n lambda/2)| / sqrt 2)` to avoid the flat arccos near 1, and
/// signed like `n lambda`.
pub fn qubit_theta_perp(n: u32, lambda: f64) -> f64 {
    let x = f64::from(n) * lambda;
    let v = 2.0 * ((0.5 * x).sin().abs() / SQRT_2).asin();
    v.copysign(x)
}

/// Weak-coupling limit of `max_Theta I_perp` for the qubit meter,
/// `(1 + sqrt 2)^2 / lambda^2`.
pub fn qubit_i_perp_peak_asymptotic(lambda: f64) -> f64 {
    (1.0 + SQRT_2).powi(2) / (lambda * lambda)
}

/// Meter phase of the Pancharatnam law, `(d-1) n lambda / 2`.
pub fn pancharatnam_phase(d: usize, n: u32, lambda: f64) -> f64 {
    0.5 * (d as f64 - 1.0) * f64::from(n) * lambda
}

/// Parallel-null phase of the Pancharatnam law for spin 1/2,
/// `-n lambda + arg[d e^{i n d lambda} - e^{i n lambda} + (1-d) e^{i n (d+1) lambda}]`.
///
/// The bracket vanishes as `lambda^2` for weak coupling, so this loses about
/// `2 log10(1/lambda)` digits; the library's own landmark search uses the
/// well-conditioned form instead.
pub fn pancharatnam_theta_parallel(d: usize, n: u32, lambda: f64) -> f64 {
    let x = f64::from(n) * lambda;
    let df = d as f64;
    let z = Complex64::from_polar(df, df * x) - Complex64::from_polar(1.0, x)
        + Complex64::from_polar(1.0 - df, (df + 1.0) * x);
    principal(z.arg() - x)
}

/// `Q_T` of the Pancharatnam law for spin 1/2: `n^2 (d-1)(2d-1) / 24`.
pub fn pancharatnam_q_total_half(d: usize, n: u32) -> f64 {
    let df = d as f64;
    f64::from(n * n) * (df - 1.0) * (2.0 * df - 1.0) / 24.0
}

/// Spin-1/2 postselection probability of the Pancharatnam law as a fringe,
/// `(1/2)[1 - V cos(Theta - (d-1) n lambda/2)]` with the Dirichlet visibility
/// taken with its sign.
pub fn pancharatnam_probability_half(d: usize, n: u32, lambda: f64, theta: f64) -> f64 {
    let x = f64::from(n) * lambda;
    let df = d as f64;
    let v = if (0.5 * x).sin().abs() < 1e-8 {
        1.0 - (df * df - 1.0) * x * x / 24.0
    } else {
        (0.5 * df * x).sin() / (df * (0.5 * x).sin())
    };
    0.5 * (1.0 - v * (theta - pancharatnam_phase(d, n, lambda)).cos())
}

/// Extremal series for any law and spin:
/// `Q_T = (n^2 j^2 / d) sum u_k^2 sin^{4j-2}(beta_k/2)`.
pub fn extremal_q_total_series(spec: &MeterSpec, twice_j: i32, lambda: f64, theta: f64) -> f64 {
    let j = 0.5 * f64::from(twice_j);
    let n = f64::from(spec.n());
    let sum: f64 =
        spec.eigenvalues().iter().map(|&u| u * u * (0.5 * (theta - n * u * lambda)).sin().powi(2 * twice_j - 2)).sum();
    n * n * j * j * sum / spec.d() as f64
}

/// Extremal series for any law and spin:
/// `Q_par = (n^2 j^2 / d^2) |sum u_k sin^{4j-1}(beta_k/2) e^{i n u_k lambda/2}|^2`.
pub fn extremal_q_parallel_series(spec: &MeterSpec, twice_j: i32, lambda: f64, theta: f64) -> f64 {
    let j = 0.5 * f64::from(twice_j);
    let n = f64::from(spec.n());
    let sum: Complex64 = spec
        .eigenvalues()
        .iter()
        .map(|&u| {
            let s = (0.5 * (theta - n * u * lambda)).sin().powi(2 * twice_j - 1);
            Complex64::from_polar(u * s, 0.5 * n * u * lambda)
        })
        .sum();
    let d = spec.d() as f64;
    n * n * j * j * sum.norm_sqr() / (d * d)
}

/// Extremal postselection probability `(1/d) sum sin^{4j}(beta_k/2)`.
pub fn extremal_probability_series(spec: &MeterSpec, twice_j: i32, lambda: f64, theta: f64) -> f64 {
    let n = f64::from(spec.n());
    spec.eigenvalues().iter().map(|&u| (0.5 * (theta - n * u * lambda)).sin().powi(2 * twice_j)).sum::<f64>()
        / spec.d() as f64
}

/// Phase where the three landmarks of the fractional law meet for small
/// `eps`: `n lambda (1 - eps + eps ln d)`.
pub fn fractional_coincidence_phase(d: usize, n: u32, eps: f64, lambda: f64) -> f64 {
    crate::meter::fractional_phase_approx(d, n, eps, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{qfi_breakdown, ChannelParams};
    use crate::halfint::HalfInt;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn qubit_landmark_values() {
        assert_eq!(qubit_theta_total(1, 1e-3), 5e-4);
        assert_eq!(qubit_theta_parallel(1, 1e-3), 1e-3);
        let expected = (5e-4f64).cos().powi(2).acos();
        assert_relative_eq!(qubit_theta_perp(1, 1e-3), expected, max_relative = 1e-7);
        assert_relative_eq!(qubit_theta_perp(1, 1e-3), 1e-3 / SQRT_2, max_relative = 1e-6);
        assert!(qubit_theta_perp(1, -1e-3) < 0.0);
    }

    #[test]
    fn pancharatnam_q_total_matches_series() {
        for d in 2..12 {
            for n in 1..4 {
                let spec = MeterSpec::pancharatnam(d, n).unwrap();
                let series = extremal_q_total_series(&spec, 1, 0.3, 0.2);
                assert_relative_eq!(series, pancharatnam_q_total_half(d, n), max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn qudit_parallel_null_minimizes_series() {
        for &d in &[2usize, 3, 10, 30] {
            let lam = 1e-2;
            let th = pancharatnam_theta_parallel(d, 1, lam);
            let z: Complex64 = (0..d).map(|k| Complex64::from_polar(k as f64, k as f64 * lam)).sum();
            assert!((th - z.arg()).abs() < 1e-10, "d={d}: {th} vs {}", z.arg());
            let spec = MeterSpec::pancharatnam(d, 1).unwrap();
            let q = |t: f64| extremal_q_parallel_series(&spec, 1, lam, t);
            assert!(q(th) <= q(th + 1e-5) && q(th) <= q(th - 1e-5));
            // the minimum is an exact zero only for the qubit meter
            let floor = 1.0 / (16.0 * (d * d) as f64) * ((d * (d - 1) / 2) as f64 - z.norm()).powi(2);
            assert!((q(th) - floor).abs() <= 1e-9 * floor.max(1e-12));
        }
    }

    #[test]
    fn pancharatnam_fringe_matches_series() {
        for &d in &[2usize, 5, 30] {
            for &(lam, th) in &[(1e-3, 0.01), (0.2, 1.0), (1e-9, 0.5)] {
                let spec = MeterSpec::pancharatnam(d, 2).unwrap();
                assert_relative_eq!(
                    pancharatnam_probability_half(d, 2, lam, th),
                    extremal_probability_series(&spec, 1, lam, th),
                    epsilon = 1e-14
                );
            }
        }
    }

    proptest! {
        #[test]
        fn qubit_closed_forms_match_general_engine(n in 1u32..4, lam in 1e-3f64..1.0, th in 0.0f64..std::f64::consts::TAU) {
            let spec = MeterSpec::pancharatnam(2, n).unwrap();
            let b = qfi_breakdown(&ChannelParams::extremal(lam, th, HalfInt::HALF), &spec).unwrap();
            let tol = |x: f64| 1e-9 * x.abs().max(1.0);
            prop_assert!((b.i_total - qubit_i_total(n, lam, th)).abs() < tol(b.i_total));
            prop_assert!((b.i_parallel - qubit_i_parallel(n, lam, th)).abs() < tol(b.i_parallel));
            prop_assert!((b.i_perp - qubit_i_perp(n, lam, th)).abs() < tol(b.i_total));
        }

        #[test]
        fn extremal_series_match_general_engine(jt in 1i32..7, d in 2usize..7, lam in 1e-3f64..1.0, th in 0.0f64..std::f64::consts::TAU) {
            let spec = MeterSpec::fractional(d, 2, 0.8).unwrap();
            let p = ChannelParams::extremal(lam, th, HalfInt::from_twice(jt));
            let b = qfi_breakdown(&p, &spec);
            prop_assume!(b.is_ok());
            let b = b.unwrap();
            prop_assert!((b.p - extremal_probability_series(&spec, jt, lam, th)).abs() < 1e-14);
            let qt = extremal_q_total_series(&spec, jt, lam, th);
            prop_assert!((b.q_total - qt).abs() <= 1e-12 * qt.max(1e-300));
            let qp = extremal_q_parallel_series(&spec, jt, lam, th);
            prop_assert!((b.q_parallel - qp).abs() <= 1e-12 * qt.max(1e-300));
        }
    }
}
