//! The characteristic postselection phases.
//!
//! * `theta_t` maximizes `I_T`; for spin 1/2 it is the meter phase.
//! * `theta_perp` maximizes `I_perp`.
//! * `theta_par` minimizes the parallel term `Q_par` (exactly zero for the
//!   qubit meter, a strict minimum in general).
//!
//! Closed forms are used where they exist and numeric search otherwise; every
//! landmark records which one produced it.

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{Channel, ChannelParams};
use crate::closed_form;
use crate::error::{Error, Result};
use crate::meter::{principal, EigenLaw, MeterSpec};
use crate::optimize::{maximize_periodic, minimize_periodic, SearchOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Numeric,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Landmark {
    pub theta: f64,
    pub method: Method,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParallelNull {
    pub theta: f64,
    pub method: Method,
    /// `Q_par` at `theta`.
    pub residual: f64,
    /// `residual <= 1e-18 n^2`.
    pub suppressed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaLandmarks {
    pub theta_t: Landmark,
    pub theta_perp: Landmark,
    /// `None` when no phase can reduce the parallel term.
    pub theta_par: Option<ParallelNull>,
    /// Meter phase `arg <O_lambda>`, when the visibility is nonzero.
    pub pancharatnam: Option<f64>,
    pub baseline: f64,
    /// `lambda = 0`: every phase is stationary and all landmarks are 0.
    pub degenerate: bool,
}

const SUPPRESSION_PER_N2: f64 = 1e-18;

/// The qubit closed form for `theta_perp` is a weak-coupling result; its
/// error grows like `0.026 |n lambda|^3`. Beyond this coupling the numeric
/// search (seeded with the closed form) is used instead.
const QUBIT_PERP_CLOSED_FORM_MAX: f64 = 2e-3;

fn is_extremal(params: &ChannelParams) -> bool {
    params.m_i == params.j && params.m_f == -params.j
}

fn is_spin_half_extremal(params: &ChannelParams) -> bool {
    params.j.twice() == 1 && is_extremal(params)
}

fn seeds(spec: &MeterSpec, lambda: f64) -> Vec<f64> {
    spec.expect_o(lambda).phase.into_iter().collect()
}

pub fn theta_total_max(params: &ChannelParams, spec: &MeterSpec, opts: &SearchOptions) -> Result<Landmark> {
    let lambda = params.lambda;
    if lambda == 0.0 {
        return Ok(Landmark { theta: 0.0, method: Method::Analytic });
    }
    if is_spin_half_extremal(params) {
        if let Some(phase) = spec.expect_o(lambda).phase {
            return Ok(Landmark { theta: phase, method: Method::Analytic });
        }
    }
    let ch = Channel::for_params(spec, params)?;
    let o = maximize_periodic(|t| ch.breakdown(lambda, t).ok().map(|b| b.i_total), &seeds(spec, lambda), opts)?;
    Ok(Landmark { theta: o.theta, method: Method::Numeric })
}

pub fn theta_perp_max(params: &ChannelParams, spec: &MeterSpec, opts: &SearchOptions) -> Result<Landmark> {
    let lambda = params.lambda;
    if lambda == 0.0 {
        return Ok(Landmark { theta: 0.0, method: Method::Analytic });
    }
    let x = f64::from(spec.n()) * lambda;
    let mut hint = seeds(spec, lambda);
    if is_spin_half_extremal(params) && spec.d() == 2 && *spec.law() == EigenLaw::Pancharatnam {
        let closed = closed_form::qubit_theta_perp(spec.n(), lambda);
        if x.abs() <= QUBIT_PERP_CLOSED_FORM_MAX {
            return Ok(Landmark { theta: closed, method: Method::Analytic });
        }
        hint.push(closed);
    }
    let ch = Channel::for_params(spec, params)?;
    let o = maximize_periodic(|t| ch.breakdown(lambda, t).ok().map(|b| b.i_perp), &hint, opts)?;
    Ok(Landmark { theta: o.theta, method: Method::Numeric })
}

/// Phase minimizing `Q_par`.
///
/// Fails with [`Error::NoSuppression`] when `Q_par` does not depend on the
/// phase (e.g. a zero-mean spectrum with spin 1/2).
pub fn theta_parallel_zero(params: &ChannelParams, spec: &MeterSpec, opts: &SearchOptions) -> Result<ParallelNull> {
    let lambda = params.lambda;
    let ch = Channel::for_params(spec, params)?;
    let n2 = f64::from(spec.n()).powi(2);
    let finish = |theta: f64, method: Method| {
        let residual = ch.moments(lambda, theta).q_parallel();
        ParallelNull { theta, method, residual, suppressed: residual <= SUPPRESSION_PER_N2 * n2 }
    };
    if lambda == 0.0 {
        return Ok(finish(0.0, Method::Analytic));
    }
    if is_spin_half_extremal(params) {
        // <K^dagger dK> is proportional to Z_0 - e^{-i Theta} Z
        let n = f64::from(spec.n());
        let u = spec.eigenvalues();
        let scale: f64 = u.iter().map(|x| x.abs()).sum();
        let z0: f64 = u.iter().sum();
        let z: Complex64 = u.iter().map(|&x| Complex64::from_polar(x, n * x * lambda)).sum();
        if z0.abs() <= 1e-14 * scale || z.norm() <= 1e-14 * scale {
            return Err(Error::NoSuppression);
        }
        let theta = principal(z.arg() - if z0 < 0.0 { std::f64::consts::PI } else { 0.0 });
        return Ok(finish(theta, Method::Analytic));
    }
    let mut hint = seeds(spec, lambda);
    hint.push(principal(2.0 * hint.first().copied().unwrap_or(0.0)));
    match minimize_periodic(|t| Some(ch.overlap_modulus(lambda, t)), &hint, opts) {
        Ok(o) => Ok(finish(o.theta, Method::Numeric)),
        Err(Error::FlatLandscape(_)) => {
            if ch.overlap_modulus(lambda, 0.0) == 0.0 {
                Ok(finish(0.0, Method::Analytic))
            } else {
                Err(Error::NoSuppression)
            }
        }
        Err(e) => Err(e),
    }
}

pub fn landmarks(params: &ChannelParams, spec: &MeterSpec, opts: &SearchOptions) -> Result<ThetaLandmarks> {
    let theta_t = theta_total_max(params, spec, opts)?;
    let theta_perp = theta_perp_max(params, spec, opts)?;
    let theta_par = match theta_parallel_zero(params, spec, opts) {
        Ok(p) => Some(p),
        Err(Error::NoSuppression) => None,
        Err(e) => return Err(e),
    };
    Ok(ThetaLandmarks {
        theta_t,
        theta_perp,
        theta_par,
        pancharatnam: spec.expect_o(params.lambda).phase,
        baseline: f64::from(params.j.twice()).powi(2),
        degenerate: params.lambda == 0.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoincidenceReport {
    pub theta_t: f64,
    pub theta_perp: f64,
    pub theta_par: f64,
    pub max_gap: f64,
    /// `max_gap / |lambda|`.
    pub relative_gap: f64,
}

/// How closely the three landmarks meet.
pub fn coincidence_check(params: &ChannelParams, spec: &MeterSpec, opts: &SearchOptions) -> Result<CoincidenceReport> {
    let t = theta_total_max(params, spec, opts)?.theta;
    let p = theta_perp_max(params, spec, opts)?.theta;
    let q = theta_parallel_zero(params, spec, opts)?.theta;
    let gap = |a: f64, b: f64| principal(a - b).abs();
    let max_gap = gap(t, p).max(gap(p, q)).max(gap(t, q));
    Ok(CoincidenceReport {
        theta_t: t,
        theta_perp: p,
        theta_par: q,
        max_gap,
        relative_gap: max_gap / params.lambda.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::halfint::HalfInt;
    use approx::assert_relative_eq;

    fn half(lambda: f64) -> ChannelParams {
        ChannelParams::extremal(lambda, 0.0, HalfInt::HALF)
    }

    #[test]
    fn qubit_landmarks_are_analytic() {
        let spec = MeterSpec::pancharatnam(2, 1).unwrap();
        let l = landmarks(&half(1e-3), &spec, &SearchOptions::default()).unwrap();
        assert_relative_eq!(l.theta_t.theta, 5e-4, max_relative = 1e-12);
        assert_eq!(l.theta_perp.method, Method::Analytic);
        let par = l.theta_par.unwrap();
        assert_relative_eq!(par.theta, 1e-3, max_relative = 1e-12);
        assert_eq!(par.residual, 0.0);
        assert!(par.suppressed);
        assert!(!l.degenerate);
    }

    #[test]
    fn degenerate_coupling() {
        let spec = MeterSpec::pancharatnam(5, 1).unwrap();
        let l = landmarks(&half(0.0), &spec, &SearchOptions::default()).unwrap();
        assert!(l.degenerate);
        assert_eq!((l.theta_t.theta, l.theta_perp.theta, l.theta_par.unwrap().theta), (0.0, 0.0, 0.0));
    }

    #[test]
    fn symmetric_law_has_no_parallel_suppression() {
        let spec = MeterSpec::symmetric(2, 1).unwrap();
        assert!(matches!(
            theta_parallel_zero(&half(1e-3), &spec, &SearchOptions::default()),
            Err(Error::NoSuppression)
        ));
        let l = landmarks(&half(1e-3), &spec, &SearchOptions::default()).unwrap();
        assert!(l.theta_par.is_none());
        assert_relative_eq!(l.theta_t.theta, 0.0, epsilon = 1e-15);
        // symmetric optima at +-n lambda/2, the positive one is reported
        assert_relative_eq!(l.theta_perp.theta, 5e-4, max_relative = 1e-6);
    }

    #[test]
    fn zero_spectrum_has_no_maximum() {
        let spec = MeterSpec::explicit(1, vec![0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(theta_perp_max(&half(0.1), &spec, &SearchOptions::default()), Err(Error::FlatLandscape(_))));
    }

    #[test]
    fn numeric_matches_qubit_closed_form() {
        let spec = MeterSpec::pancharatnam(2, 1).unwrap();
        // the explicit law takes the numeric path
        let explicit = MeterSpec::explicit(1, vec![0.0, 1.0]).unwrap();
        for &lam in &[1e-4, 5e-4, 1e-3, -1e-3] {
            let analytic = theta_perp_max(&half(lam), &spec, &SearchOptions::default()).unwrap();
            assert_eq!(analytic.method, Method::Analytic);
            let numeric = theta_perp_max(&half(lam), &explicit, &SearchOptions::default()).unwrap();
            assert_eq!(numeric.method, Method::Numeric);
            assert!(
                (numeric.theta - analytic.theta).abs() < 1e-9,
                "lambda={lam}: {} vs {}",
                numeric.theta,
                analytic.theta
            );
            let t = theta_total_max(&half(lam), &spec, &SearchOptions::default()).unwrap();
            assert_relative_eq!(t.theta, lam / 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn strong_coupling_qubit_uses_exact_maximum() {
        // exact argmax at n lambda = 0.01, from a 40-digit root of dI/dTheta
        let spec = MeterSpec::pancharatnam(2, 1).unwrap();
        let l = theta_perp_max(&half(0.01), &spec, &SearchOptions::default()).unwrap();
        assert_eq!(l.method, Method::Numeric);
        assert!((l.theta - 0.007_071_078_968_899_572).abs() < 1e-9, "{}", l.theta);
        assert!((closed_form::qubit_theta_perp(1, 0.01) - l.theta).abs() > 1e-8);
    }

    #[test]
    fn numeric_parallel_null_matches_closed_form() {
        let spec = MeterSpec::pancharatnam(6, 1).unwrap();
        let analytic = theta_parallel_zero(&half(0.01), &spec, &SearchOptions::default()).unwrap();
        assert_eq!(analytic.method, Method::Analytic);
        let p = half(0.01);
        let numeric_same = {
            let ch = Channel::for_params(&spec, &p).unwrap();
            minimize_periodic(|t| Some(ch.overlap_modulus(0.01, t)), &[], &SearchOptions::default()).unwrap()
        };
        assert!((analytic.theta - numeric_same.theta).abs() < 1e-9);
    }
}
