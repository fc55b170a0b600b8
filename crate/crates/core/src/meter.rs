//! Qudit meter states and diagonal meter operators.
//!
//! The meter starts in the uniform superposition `(1/sqrt d) sum_k |b_k>` of
//! `n` identical copies; the coupling imprints `exp(i n u_k lambda)` on the
//! k-th branch. Because the `n` copies stay inside the span of `|b_k>^n`,
//! everything below works with effective eigenvalues `n u_k` on a single
//! d-dimensional factor.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::PHASE_FLOOR;

/// Eigenvalue assignment `u_k`, `k = 0..d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum EigenLaw {
    /// `u_k = k`.
    Pancharatnam,
    /// `u_k = k - (d-1)/2`, zero mean.
    Symmetric,
    /// `u_k = k^eps` with `u_0 = 0`.
    Fractional {
        eps: f64,
    },
    Explicit {
        u: Vec<f64>,
    },
}

impl EigenLaw {
    pub fn name(&self) -> &'static str {
        match self {
            EigenLaw::Pancharatnam => "pancharatnam",
            EigenLaw::Symmetric => "symmetric",
            EigenLaw::Fractional { .. } => "fractional",
            EigenLaw::Explicit { .. } => "explicit",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeterSpec {
    d: usize,
    n: u32,
    law: EigenLaw,
    #[serde(skip)]
    u: Vec<f64>,
}

impl MeterSpec {
    pub fn new(d: usize, n: u32, law: EigenLaw) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidMeter(format!("dimension d={d} must be at least 2")));
        }
        if n < 1 {
            return Err(Error::InvalidMeter("copy count n must be at least 1".into()));
        }
        let u: Vec<f64> = match &law {
            EigenLaw::Pancharatnam => (0..d).map(|k| k as f64).collect(),
            EigenLaw::Symmetric => {
                let mid = (d as f64 - 1.0) / 2.0;
                (0..d).map(|k| k as f64 - mid).collect()
            }
            EigenLaw::Fractional { eps } => {
                if !(eps.is_finite() && *eps > 0.0) {
                    return Err(Error::InvalidMeter(format!("fractional exponent eps={eps} must be positive")));
                }
                (0..d).map(|k| if k == 0 { 0.0 } else { (k as f64).powf(*eps) }).collect()
            }
            EigenLaw::Explicit { u } => {
                if u.len() != d {
                    return Err(Error::InvalidMeter(format!("explicit law has {} eigenvalues but d={d}", u.len())));
                }
                if u.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidMeter("explicit eigenvalues must be finite".into()));
                }
                u.clone()
            }
        };
        if matches!(law, EigenLaw::Fractional { .. }) && u.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMeter(format!(
                "fractional law is not strictly increasing at d={d}; eps too small for double precision"
            )));
        }
        Ok(MeterSpec { d, n, law, u })
    }

    pub fn pancharatnam(d: usize, n: u32) -> Result<Self> {
        Self::new(d, n, EigenLaw::Pancharatnam)
    }

    pub fn symmetric(d: usize, n: u32) -> Result<Self> {
        Self::new(d, n, EigenLaw::Symmetric)
    }

    pub fn fractional(d: usize, n: u32, eps: f64) -> Result<Self> {
        Self::new(d, n, EigenLaw::Fractional { eps })
    }

    pub fn explicit(n: u32, u: Vec<f64>) -> Result<Self> {
        Self::new(u.len(), n, EigenLaw::Explicit { u })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn law(&self) -> &EigenLaw {
        &self.law
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.u
    }

    /// `n u_k`, the phase rates seen by the single-factor meter.
    pub fn effective_eigenvalues(&self) -> Vec<f64> {
        let n = f64::from(self.n);
        self.u.iter().map(|u| n * u).collect()
    }

    /// Same spec with every eigenvalue shifted by `c`.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        MeterSpec::explicit(self.n, self.u.iter().map(|u| u + c).collect())
    }

    /// Diagonal of `O_lambda`: `exp(i n u_k lambda)`.
    pub fn operator_diagonal(&self, lambda: f64) -> Vec<Complex64> {
        let n = f64::from(self.n);
        self.u.iter().map(|u| Complex64::from_polar(1.0, n * u * lambda)).collect()
    }

    /// `<M| O_lambda |M> = (1/d) sum_k exp(i n u_k lambda)`.
    pub fn expect_o(&self, lambda: f64) -> ComplexExpectation {
        let n = f64::from(self.n);
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for u in &self.u {
            let (s, c) = (n * u * lambda).sin_cos();
            re += c;
            im += s;
        }
        let inv = 1.0 / self.d as f64;
        ComplexExpectation::new(Complex64::new(re * inv, im * inv))
    }

    /// `<O^dagger d_lambda O> = (i n / d) sum_k u_k`; independent of lambda.
    pub fn parallel_transport_term(&self) -> Complex64 {
        Complex64::new(0.0, f64::from(self.n) * self.mean_eigenvalue())
    }

    pub fn mean_eigenvalue(&self) -> f64 {
        self.u.iter().sum::<f64>() / self.d as f64
    }
}

/// A meter expectation value with its visibility and (principal) phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexExpectation {
    pub value: Complex64,
    pub modulus: f64,
    /// `None` when the visibility is below [`PHASE_FLOOR`].
    pub phase: Option<f64>,
}

impl ComplexExpectation {
    pub fn new(value: Complex64) -> Self {
        let modulus = value.norm();
        let phase = (modulus > PHASE_FLOOR).then(|| principal(value.arg()));
        ComplexExpectation { value, modulus, phase }
    }
}

/// Map an angle to `(-pi, pi]`.
pub fn principal(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Global phase `g` with `diag O(spec_a) = g * diag O(spec_b)`.
///
/// Fails unless the two specs share `d` and `n` and their eigenvalues differ
/// by a constant, which is exactly when such a factor exists.
pub fn gauge_shift_equivalence(spec_a: &MeterSpec, spec_b: &MeterSpec, lambda: f64) -> Result<Complex64> {
    if spec_a.d != spec_b.d || spec_a.n != spec_b.n {
        return Err(Error::MeterMismatch(format!(
            "(d, n) = ({}, {}) vs ({}, {})",
            spec_a.d, spec_a.n, spec_b.d, spec_b.n
        )));
    }
    let shift = spec_a.u[0] - spec_b.u[0];
    let scale = spec_a.u.iter().chain(&spec_b.u).fold(1.0f64, |m, u| m.max(u.abs()));
    let uniform = spec_a.u.iter().zip(&spec_b.u).all(|(a, b)| ((a - b) - shift).abs() <= 1e-12 * scale);
    if !uniform {
        return Err(Error::MeterMismatch("eigenvalues do not differ by a constant".into()));
    }
    Ok(Complex64::from_polar(1.0, f64::from(spec_a.n) * shift * lambda))
}

/// Dirichlet-kernel visibility `|sin(d x/2)| / (d |sin(x/2)|)` of the
/// Pancharatnam law at `x = n lambda`, with the removable singularities
/// handled by a series branch.
pub fn dirichlet_modulus(d: usize, x: f64) -> f64 {
    let df = d as f64;
    let y = principal(x);
    let half = 0.5 * y;
    if half.abs() < 1e-6 {
        return 1.0 - (df * df - 1.0) * y * y / 24.0;
    }
    (0.5 * df * y).sin().abs() / (df * half.sin().abs())
}

/// Small-exponent approximation of the fractional-law meter phase,
/// `n lambda (1 - eps + eps ln d)`.
pub fn fractional_phase_approx(d: usize, n: u32, eps: f64, lambda: f64) -> f64 {
    f64::from(n) * lambda * (1.0 - eps + eps * (d as f64).ln())
}

/// Remove `2 pi` jumps from a sequence of principal phases, anchored at the
/// first element.
pub fn unwrap_phases(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &p in phases {
        if let Some(q) = prev {
            let jump = p - q;
            if jump > PI {
                offset -= 2.0 * PI;
            } else if jump < -PI {
                offset += 2.0 * PI;
            }
        }
        out.push(p + offset);
        prev = Some(p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn laws_produce_expected_eigenvalues() {
        assert_eq!(MeterSpec::pancharatnam(4, 1).unwrap().eigenvalues(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(MeterSpec::symmetric(3, 1).unwrap().eigenvalues(), &[-1.0, 0.0, 1.0]);
        let f = MeterSpec::fractional(4, 1, 0.5).unwrap();
        assert_eq!(f.eigenvalues()[0], 0.0);
        assert_relative_eq!(f.eigenvalues()[3], 3f64.sqrt());
        let s: f64 = MeterSpec::symmetric(7, 1).unwrap().eigenvalues().iter().sum();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(MeterSpec::pancharatnam(1, 1).is_err());
        assert!(MeterSpec::pancharatnam(2, 0).is_err());
        assert!(MeterSpec::fractional(3, 1, 0.0).is_err());
        assert!(MeterSpec::new(3, 1, EigenLaw::Explicit { u: vec![0.0, 1.0] }).is_err());
        assert!(MeterSpec::explicit(1, vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn qubit_expectation() {
        let spec = MeterSpec::pancharatnam(2, 1).unwrap();
        let lam = 0.37;
        let e = spec.expect_o(lam);
        assert_relative_eq!(e.modulus, (lam / 2.0).cos(), epsilon = 1e-15);
        assert_relative_eq!(e.phase.unwrap(), lam / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn identity_at_zero_coupling() {
        for spec in [MeterSpec::pancharatnam(5, 2).unwrap(), MeterSpec::fractional(9, 1, 0.3).unwrap()] {
            let e = spec.expect_o(0.0);
            assert_eq!(e.value, Complex64::new(1.0, 0.0));
            assert_eq!(e.modulus, 1.0);
            assert_eq!(e.phase, Some(0.0));
        }
    }

    #[test]
    fn symmetric_law_has_zero_phase() {
        for d in 2..9 {
            let e = MeterSpec::symmetric(d, 3).unwrap().expect_o(0.41);
            assert!(e.phase.unwrap().abs() < 1e-15 || (e.phase.unwrap().abs() - PI).abs() < 1e-12);
            assert!(e.value.im.abs() < 1e-15);
        }
    }

    #[test]
    fn undefined_phase_is_flagged() {
        // d = 4, n lambda = pi/2 puts the Dirichlet kernel on a zero.
        let e = MeterSpec::pancharatnam(4, 1).unwrap().expect_o(PI / 2.0);
        assert!(e.modulus < PHASE_FLOOR);
        assert_eq!(e.phase, None);
    }

    #[test]
    fn fractional_phase_near_lambda() {
        let spec = MeterSpec::fractional(10_000, 1, 1e-4).unwrap();
        let lam = 1e-3;
        let phase = spec.expect_o(lam).phase.unwrap();
        assert!((phase - lam).abs() < 0.01 * lam);
        let approx = fractional_phase_approx(10_000, 1, 1e-4, lam);
        assert!((phase - approx).abs() / approx <= 5.0 * 1e-4 * (10_000f64).ln());
    }

    #[test]
    fn parallel_transport_examples() {
        assert_eq!(MeterSpec::pancharatnam(3, 1).unwrap().parallel_transport_term(), Complex64::new(0.0, 1.0));
        assert_eq!(MeterSpec::symmetric(6, 4).unwrap().parallel_transport_term(), Complex64::new(0.0, 0.0));
        assert_eq!(MeterSpec::explicit(2, vec![0.0, 2.0]).unwrap().parallel_transport_term(), Complex64::new(0.0, 2.0));
    }

    #[test]
    fn gauge_shift_examples() {
        let lam = 0.77;
        let g =
            gauge_shift_equivalence(&MeterSpec::pancharatnam(3, 1).unwrap(), &MeterSpec::symmetric(3, 1).unwrap(), lam)
                .unwrap();
        assert_relative_eq!(g.re, lam.cos(), epsilon = 1e-12);
        assert_relative_eq!(g.im, lam.sin(), epsilon = 1e-12);
        let g =
            gauge_shift_equivalence(&MeterSpec::pancharatnam(2, 4).unwrap(), &MeterSpec::symmetric(2, 4).unwrap(), lam)
                .unwrap();
        assert_relative_eq!(g.arg(), principal(2.0 * lam), epsilon = 1e-12);
        let g =
            gauge_shift_equivalence(&MeterSpec::pancharatnam(5, 2).unwrap(), &MeterSpec::symmetric(5, 2).unwrap(), 0.0)
                .unwrap();
        assert_eq!(g, Complex64::new(1.0, 0.0));
        assert!(gauge_shift_equivalence(
            &MeterSpec::pancharatnam(3, 1).unwrap(),
            &MeterSpec::symmetric(4, 1).unwrap(),
            lam
        )
        .is_err());
        assert!(gauge_shift_equivalence(
            &MeterSpec::pancharatnam(3, 1).unwrap(),
            &MeterSpec::fractional(3, 1, 0.5).unwrap(),
            lam
        )
        .is_err());
    }

    #[test]
    fn dirichlet_series_branch() {
        assert_eq!(dirichlet_modulus(30, 0.0), 1.0);
        let x = 1.9e-6f64;
        let direct = (15.0 * x).sin().abs() / (30.0 * (x / 2.0).sin().abs());
        assert_relative_eq!(dirichlet_modulus(30, x), direct, max_relative = 1e-12);
        assert_relative_eq!(dirichlet_modulus(7, 2.0 * PI), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unwrap_continuity() {
        let raw: Vec<f64> = (0..50).map(|i| principal(0.3 * i as f64)).collect();
        let un = unwrap_phases(&raw);
        for (i, v) in un.iter().enumerate() {
            assert_relative_eq!(*v, 0.3 * i as f64, epsilon = 1e-12);
        }
    }

    fn any_law() -> impl Strategy<Value = MeterSpec> {
        (2usize..12, 1u32..4, 0u8..4, 0.05f64..2.0).prop_map(|(d, n, kind, eps)| match kind {
            0 => MeterSpec::pancharatnam(d, n).unwrap(),
            1 => MeterSpec::symmetric(d, n).unwrap(),
            2 => MeterSpec::fractional(d, n, eps).unwrap(),
            _ => MeterSpec::explicit(n, (0..d).map(|k| (k as f64 * eps).sin() * 3.0).collect()).unwrap(),
        })
    }

    proptest! {
        #[test]
        fn operator_is_unitary(spec in any_law(), lam in -5.0f64..5.0) {
            let diag = spec.operator_diagonal(lam);
            for z in &diag {
                prop_assert!((z.norm() - 1.0).abs() < 1e-15);
            }
            let norm: f64 = diag.iter().map(|z| z.norm_sqr()).sum::<f64>() / spec.d() as f64;
            prop_assert!((norm - 1.0).abs() < 1e-14);
        }

        #[test]
        fn conjugation_symmetry(spec in any_law(), lam in -5.0f64..5.0) {
            let a = spec.expect_o(lam).value;
            let b = spec.expect_o(-lam).value;
            prop_assert!((a - b.conj()).norm() < 1e-14);
        }

        #[test]
        fn dirichlet_identity(d in 2usize..40, n in 1u32..4, lam in 1e-3f64..3.0) {
            let spec = MeterSpec::pancharatnam(d, n).unwrap();
            let x = f64::from(n) * lam;
            prop_assume!((principal(x)).abs() > 1e-3);
            prop_assert!((spec.expect_o(lam).modulus - dirichlet_modulus(d, x)).abs() < 1e-12);
        }

        #[test]
        fn pancharatnam_phase_is_linear(d in 2usize..40, n in 1u32..4, lam in 1e-4f64..0.05) {
            let spec = MeterSpec::pancharatnam(d, n).unwrap();
            let x = f64::from(n) * lam;
            prop_assume!(x * d as f64 <= 6.0);
            let e = spec.expect_o(lam);
            if let Some(p) = e.phase {
                // exact up to a sign flip of the Dirichlet kernel
                let target = principal((d as f64 - 1.0) * x / 2.0);
                let diff = principal(p - target).abs();
                prop_assert!(diff < 1e-12 || (diff - PI).abs() < 1e-12);
            }
        }

        #[test]
        fn fractional_expansion_error(d in 1000usize..20000, eps in 1e-4f64..1e-2, lam in 1e-4f64..1e-2) {
            prop_assume!((lam * eps * (d as f64).ln()).abs() <= 0.01);
            let spec = MeterSpec::fractional(d, 1, eps).unwrap();
            let exact = spec.expect_o(lam).phase.unwrap();
            let approx = fractional_phase_approx(d, 1, eps, lam);
            prop_assert!((exact - approx).abs() / approx.abs() <= 5.0 * eps * (d as f64).ln());
        }
    }
}
