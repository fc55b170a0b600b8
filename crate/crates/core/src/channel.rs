//! The postselected compression channel and its QFI decomposition.
//!
//! Projecting the joint evolution onto `<j, m_f| ... |j, m_i>` leaves a
//! meter-only operator that is diagonal in the meter eigenbasis:
//!
//! ```text
//! K |b_k> = exp(i j (Theta + n u_k lambda)) d^j_{m_f, m_i}(beta_k) |b_k>,
//! beta_k = Theta - n u_k lambda.
//! ```
//!
//! With `A_k = i j d(beta_k) - d'(beta_k)` and the uniform meter,
//!
//! * `P   = (1/d) sum d_k^2`
//! * `Q_T = <dK^dagger dK> = (n^2/d) sum u_k^2 |A_k|^2`
//! * `Q_par = |<K^dagger dK>|^2`, with `<K^dagger dK> = (n/d) sum u_k d_k A_k`
//!
//! and `I_T = 4 Q_T / P`, `I_par = 4 Q_par / P^2`, `I_perp = I_T - I_par`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::meter::MeterSpec;
use crate::tolerance::P_FLOOR;
use crate::wigner::SmallD;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub lambda: f64,
    pub theta: f64,
    pub j: HalfInt,
    pub m_i: HalfInt,
    pub m_f: HalfInt,
}

impl ChannelParams {
    pub fn new(lambda: f64, theta: f64, j: HalfInt, m_i: HalfInt, m_f: HalfInt) -> Result<Self> {
        j.check_magnetic(m_i)?;
        j.check_magnetic(m_f)?;
        Ok(ChannelParams { lambda, theta, j, m_i, m_f })
    }

    /// Highest weight in, lowest weight out.
    pub fn extremal(lambda: f64, theta: f64, j: HalfInt) -> Self {
        ChannelParams { lambda, theta, j, m_i: j, m_f: -j }
    }

    pub fn with_theta(self, theta: f64) -> Self {
        ChannelParams { theta, ..self }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        ChannelParams { lambda, ..self }
    }
}

/// Raw channel sums at one `(lambda, Theta)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelMoments {
    pub p: f64,
    pub q_total: f64,
    /// `<K^dagger d_lambda K>`.
    pub overlap: Complex64,
    /// `sum_k |b_k - (C/P) a_k|^2`, the orthogonal part of the derivative
    /// accumulated without the `Q_T P - Q_par` cancellation.
    pub orth: f64,
}

impl ChannelMoments {
    pub fn q_parallel(&self) -> f64 {
        self.overlap.norm_sqr()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QfiBreakdown {
    pub p: f64,
    pub q_total: f64,
    pub q_parallel: f64,
    pub i_total: f64,
    pub i_parallel: f64,
    pub i_perp: f64,
    pub t_per_trial: f64,
    pub baseline: f64,
}

impl QfiBreakdown {
    /// Every QFI-like field divided by `n^2`; `p` and `baseline` unchanged.
    pub fn per_n2(&self, n: u32) -> QfiBreakdown {
        let s = 1.0 / f64::from(n * n);
        QfiBreakdown {
            q_total: self.q_total * s,
            q_parallel: self.q_parallel * s,
            i_total: self.i_total * s,
            i_parallel: self.i_parallel * s,
            i_perp: self.i_perp * s,
            t_per_trial: self.t_per_trial * s,
            ..*self
        }
    }

    /// Per-trial information beats the unpostselected baseline `(2j)^2`.
    pub fn has_advantage(&self) -> bool {
        self.t_per_trial > self.baseline
    }
}

/// Number of repetitions `M` behind a Cramér-Rao bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EstimationBudget {
    trials: u64,
}

impl EstimationBudget {
    pub fn new(trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::Config("trial count M must be at least 1".into()));
        }
        Ok(EstimationBudget { trials })
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }
}

impl Default for EstimationBudget {
    fn default() -> Self {
        EstimationBudget { trials: 1 }
    }
}

/// A channel with its Wigner kernel and meter rates fixed, evaluated at many
/// `(lambda, Theta)` points.
#[derive(Clone, Debug)]
pub struct Channel {
    j: HalfInt,
    kernel: SmallD,
    rates: Vec<f64>,
    n: u32,
    corner: bool,
}

impl Channel {
    pub fn new(spec: &MeterSpec, j: HalfInt, m_i: HalfInt, m_f: HalfInt) -> Result<Self> {
        let kernel = SmallD::new(j, m_f, m_i)?;
        Ok(Channel {
            j,
            corner: kernel.is_corner() && j.twice() > 0,
            kernel,
            rates: spec.effective_eigenvalues(),
            n: spec.n(),
        })
    }

    pub fn extremal(spec: &MeterSpec, j: HalfInt) -> Result<Self> {
        Self::new(spec, j, j, -j)
    }

    pub fn for_params(spec: &MeterSpec, params: &ChannelParams) -> Result<Self> {
        Self::new(spec, params.j, params.m_i, params.m_f)
    }

    pub fn j(&self) -> HalfInt {
        self.j
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn baseline(&self) -> f64 {
        f64::from(self.j.twice()).powi(2)
    }

    /// `d_k` and `A_k` on branch `k`; the second element of the tuple is
    /// `|A_k|^2`, exact in the extremal case.
    #[inline]
    fn branch(&self, beta: f64) -> (f64, Complex64, f64) {
        let jv = self.j.value();
        if self.corner {
            // d = s^{2j}, A = -j s^{2j-1} e^{-i beta/2}
            let (s, c) = (0.5 * beta).sin_cos();
            let tj = self.j.twice();
            let s_pow = s.powi(tj - 1);
            let d = s_pow * s;
            let amp = -jv * s_pow;
            let a = Complex64::new(amp * c, -amp * s);
            (d, a, jv * jv * s.powi(2 * tj - 2))
        } else {
            let (d, dp) = self.kernel.value_and_derivative(beta);
            let a = Complex64::new(-dp, jv * d);
            (d, a, a.norm_sqr())
        }
    }

    pub fn moments(&self, lambda: f64, theta: f64) -> ChannelMoments {
        let inv_d = 1.0 / self.rates.len() as f64;
        let mut p = 0.0;
        let mut q_total = 0.0;
        let mut overlap = Complex64::new(0.0, 0.0);
        let mut branches = Vec::with_capacity(self.rates.len());
        for &r in &self.rates {
            let (d, a, a2) = self.branch(theta - r * lambda);
            p += d * d;
            q_total += r * r * a2;
            let b = a * r;
            overlap += b * d;
            branches.push((d, b));
        }
        p *= inv_d;
        q_total *= inv_d;
        overlap *= inv_d;
        let orth = if p > 0.0 {
            let mu = overlap / p;
            branches.iter().map(|&(d, b)| (b - mu * d).norm_sqr()).sum::<f64>() * inv_d
        } else {
            0.0
        };
        ChannelMoments { p, q_total, overlap, orth }
    }

    pub fn probability(&self, lambda: f64, theta: f64) -> f64 {
        let inv_d = 1.0 / self.rates.len() as f64;
        self.rates
            .iter()
            .map(|&r| {
                let d = if self.corner {
                    (0.5 * (theta - r * lambda)).sin().powi(self.j.twice())
                } else {
                    self.kernel.value(theta - r * lambda)
                };
                d * d
            })
            .sum::<f64>()
            * inv_d
    }

    /// `|<K^dagger dK>|`, the quantity whose zero defines parallel suppression.
    pub fn overlap_modulus(&self, lambda: f64, theta: f64) -> f64 {
        let mut overlap = Complex64::new(0.0, 0.0);
        for &r in &self.rates {
            let (d, a, _) = self.branch(theta - r * lambda);
            overlap += a * (r * d);
        }
        overlap.norm() / self.rates.len() as f64
    }

    pub fn breakdown(&self, lambda: f64, theta: f64) -> Result<QfiBreakdown> {
        let m = self.moments(lambda, theta);
        if !(m.p > P_FLOOR) {
            return Err(Error::VanishingPostselection { p: m.p, floor: P_FLOOR });
        }
        let q_parallel = m.q_parallel();
        let i_total = 4.0 * m.q_total / m.p;
        let i_parallel = 4.0 * q_parallel / (m.p * m.p);
        let i_perp = (4.0 * m.orth / m.p).max(0.0);
        Ok(QfiBreakdown {
            p: m.p,
            q_total: m.q_total,
            q_parallel,
            i_total,
            i_parallel,
            i_perp,
            t_per_trial: m.p * i_perp,
            baseline: self.baseline(),
        })
    }
}

pub fn postselection_probability(params: &ChannelParams, spec: &MeterSpec) -> Result<f64> {
    Ok(Channel::for_params(spec, params)?.probability(params.lambda, params.theta))
}

pub fn q_total(params: &ChannelParams, spec: &MeterSpec) -> Result<f64> {
    Ok(Channel::for_params(spec, params)?.moments(params.lambda, params.theta).q_total)
}

pub fn q_parallel(params: &ChannelParams, spec: &MeterSpec) -> Result<f64> {
    Ok(Channel::for_params(spec, params)?.moments(params.lambda, params.theta).q_parallel())
}

pub fn qfi_breakdown(params: &ChannelParams, spec: &MeterSpec) -> Result<QfiBreakdown> {
    Channel::for_params(spec, params)?.breakdown(params.lambda, params.theta)
}

/// Single-shot signal-to-noise bound `lambda_true * sqrt(I_perp)`.
pub fn snr_bound(params: &ChannelParams, spec: &MeterSpec, lambda_true: f64) -> Result<f64> {
    Ok(snr_from_qfi(qfi_breakdown(params, spec)?.i_perp, lambda_true))
}

pub fn snr_from_qfi(i_perp: f64, lambda_true: f64) -> f64 {
    lambda_true * i_perp.sqrt()
}

/// Cramér-Rao bound `1 / sqrt(M I_perp)`; infinite when `I_perp = 0`.
pub fn cramer_rao_uncertainty(params: &ChannelParams, spec: &MeterSpec, budget: EstimationBudget) -> Result<f64> {
    Ok(cramer_rao_from_qfi(qfi_breakdown(params, spec)?.i_perp, budget))
}

pub fn cramer_rao_from_qfi(i_perp: f64, budget: EstimationBudget) -> f64 {
    1.0 / (budget.trials as f64 * i_perp).sqrt()
}

/// Fringe form of the spin-1/2 postselection probability,
/// `(1/2)[1 - |<O>| cos(Theta - arg <O>)]`.
pub fn interference_probability_qubit(theta: f64, spec: &MeterSpec, lambda: f64) -> f64 {
    let e = spec.expect_o(lambda);
    let phase = e.phase.unwrap_or(0.0);
    0.5 * (1.0 - e.modulus * (theta - phase).cos())
}
