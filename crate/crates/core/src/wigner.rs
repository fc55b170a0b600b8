//! Wigner small-d matrix elements `d^j_{m', m}(beta)` and their first
//! derivatives.
//!
//! Convention: `d^j_{m', m}(beta) = <j m'| exp(-i beta J_y) |j m>` with
//! Condon-Shortley phases, so that the corner element is
//! `d^j_{-j, j}(beta) = sin^{2j}(beta / 2)` (positive).
//!
//! For moderate spins elements come from the factorial sum: coefficients are
//! built from a log-factorial table and the terms are summed in descending
//! magnitude with compensated summation. Larger spins switch to the Jacobi
//! polynomial form, whose degree recurrence does not cancel.

use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::halfint::HalfInt;

/// Largest supported `2j`.
pub const MAX_TWICE_J: i32 = 200;

const TABLE_LEN: usize = 2 * MAX_TWICE_J as usize + 2;

fn log_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(TABLE_LEN);
        let mut acc = 0.0f64;
        t.push(0.0);
        for k in 1..TABLE_LEN {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    });
    table[n]
}

#[derive(Clone, Copy, Debug)]
struct Term {
    coeff: f64,
    cos_pow: i32,
    sin_pow: i32,
}

/// Above this `2j` the alternating factorial sum cancels too badly (its
/// terms can exceed the result by up to `2^j`); the Jacobi recurrence is used
/// instead.
const FACTORIAL_SUM_MAX_TWICE_J: i32 = 16;

#[derive(Clone, Debug)]
enum Kernel {
    Sum(Vec<Term>),
    Jacobi {
        elem: JacobiElem,
        /// `(weight, d_{m_f, m_i + 1})` and `(weight, d_{m_f, m_i - 1})` for the
        /// ladder-operator derivative.
        up: Option<(f64, JacobiElem)>,
        down: Option<(f64, JacobiElem)>,
    },
}

/// A precomputed `d^j_{m_f, m_i}` kernel, cheap to evaluate at many angles.
#[derive(Clone, Debug)]
pub struct SmallD {
    j: HalfInt,
    m_f: HalfInt,
    m_i: HalfInt,
    kernel: Kernel,
}

impl SmallD {
    pub fn new(j: HalfInt, m_f: HalfInt, m_i: HalfInt) -> Result<Self> {
        if j.twice() > MAX_TWICE_J {
            return Err(Error::SpinTooLarge { j, max_twice: MAX_TWICE_J });
        }
        j.check_magnetic(m_f)?;
        j.check_magnetic(m_i)?;

        let terms = factorial_terms(j, m_f, m_i);
        let kernel = if terms.len() <= 1 || j.twice() <= FACTORIAL_SUM_MAX_TWICE_J {
            Kernel::Sum(terms)
        } else {
            let jv = j.value();
            let mv = m_i.value();
            let up = j
                .admits(m_i + HalfInt::ONE)
                .then(|| (((jv - mv) * (jv + mv + 1.0)).sqrt(), JacobiElem::new(j, m_f, m_i + HalfInt::ONE)));
            let down = j
                .admits(m_i - HalfInt::ONE)
                .then(|| (((jv + mv) * (jv - mv + 1.0)).sqrt(), JacobiElem::new(j, m_f, m_i - HalfInt::ONE)));
            Kernel::Jacobi { elem: JacobiElem::new(j, m_f, m_i), up, down }
        };
        Ok(SmallD { j, m_f, m_i, kernel })
    }

    pub fn j(&self) -> HalfInt {
        self.j
    }

    pub fn m_f(&self) -> HalfInt {
        self.m_f
    }

    pub fn m_i(&self) -> HalfInt {
        self.m_i
    }

    /// Lowest-weight out of highest-weight: `m_f = -j`, `m_i = j`.
    pub fn is_corner(&self) -> bool {
        self.m_f == -self.j && self.m_i == self.j
    }

    pub fn value(&self, beta: f64) -> f64 {
        match &self.kernel {
            Kernel::Sum(terms) => sum_value(terms, beta),
            Kernel::Jacobi { elem, .. } => elem.eval(beta),
        }
    }

    pub fn derivative(&self, beta: f64) -> f64 {
        match &self.kernel {
            Kernel::Sum(terms) => sum_derivative(terms, beta),
            Kernel::Jacobi { up, down, .. } => {
                // d/dβ <m'|e^{-iβJy}|m> = -½ <m'|e^{-iβJy}(J+ - J-)|m>
                let u = up.as_ref().map_or(0.0, |(w, e)| w * e.eval(beta));
                let l = down.as_ref().map_or(0.0, |(w, e)| w * e.eval(beta));
                -0.5 * (u - l)
            }
        }
    }

    pub fn value_and_derivative(&self, beta: f64) -> (f64, f64) {
        (self.value(beta), self.derivative(beta))
    }
}

fn factorial_terms(j: HalfInt, m_f: HalfInt, m_i: HalfInt) -> Vec<Term> {
    let jt = j.twice();
    let j_plus_mf = ((jt + m_f.twice()) / 2) as usize;
    let j_minus_mf = ((jt - m_f.twice()) / 2) as usize;
    let j_plus_mi = ((jt + m_i.twice()) / 2) as usize;
    let j_minus_mi = ((jt - m_i.twice()) / 2) as usize;
    let dm = (m_f.twice() - m_i.twice()) / 2;

    let norm = 0.5
        * (log_factorial(j_plus_mf) + log_factorial(j_minus_mf) + log_factorial(j_plus_mi) + log_factorial(j_minus_mi));

    let s_min = (-dm).max(0) as usize;
    let s_max = j_plus_mi.min(j_minus_mf);
    (s_min..=s_max)
        .map(|s| {
            let si = s as i32;
            let log_c = norm
                - log_factorial(j_plus_mi - s)
                - log_factorial(s)
                - log_factorial((dm + si) as usize)
                - log_factorial(j_minus_mf - s);
            let sign = if (dm + si).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            Term { coeff: sign * log_c.exp(), cos_pow: jt - dm - 2 * si, sin_pow: dm + 2 * si }
        })
        .collect()
}

fn sum_value(terms: &[Term], beta: f64) -> f64 {
    let (s, c) = (0.5 * beta).sin_cos();
    let mut buf = [0.0f64; MAX_TWICE_J as usize + 1];
    let vals = &mut buf[..terms.len()];
    for (v, t) in vals.iter_mut().zip(terms) {
        *v = t.coeff * ipow(c, t.cos_pow) * ipow(s, t.sin_pow);
    }
    ordered_sum(vals)
}

/// Termwise derivative of the factorial sum.
fn sum_derivative(terms: &[Term], beta: f64) -> f64 {
    let (s, c) = (0.5 * beta).sin_cos();
    let mut buf = [0.0f64; 2 * (MAX_TWICE_J as usize + 1)];
    let vals = &mut buf[..2 * terms.len()];
    for (pair, t) in vals.chunks_exact_mut(2).zip(terms) {
        let (a, b) = (t.cos_pow, t.sin_pow);
        // d/dβ c^a s^b = ½ (b c^{a+1} s^{b-1} - a c^{a-1} s^{b+1})
        pair[0] = if b > 0 { 0.5 * t.coeff * f64::from(b) * ipow(c, a + 1) * ipow(s, b - 1) } else { 0.0 };
        pair[1] = if a > 0 { -0.5 * t.coeff * f64::from(a) * ipow(c, a - 1) * ipow(s, b + 1) } else { 0.0 };
    }
    ordered_sum(vals)
}

/// `d^j_{m', m}` as a Jacobi polynomial:
/// `xi * norm * sin^mu(β/2) cos^nu(β/2) P_k^{(mu, nu)}(cos β)`.
#[derive(Clone, Copy, Debug)]
struct JacobiElem {
    prefactor: f64,
    mu: i32,
    nu: i32,
    k: usize,
}

impl JacobiElem {
    fn new(j: HalfInt, m_f: HalfInt, m_i: HalfInt) -> Self {
        let mu = (m_i.twice() - m_f.twice()).abs() / 2;
        let nu = (m_i.twice() + m_f.twice()).abs() / 2;
        let k = ((j.twice() - m_i.twice().abs().max(m_f.twice().abs())) / 2) as usize;
        let (mu_u, nu_u) = (mu as usize, nu as usize);
        let log_norm = 0.5
            * (log_factorial(k) + log_factorial(k + mu_u + nu_u) - log_factorial(k + mu_u) - log_factorial(k + nu_u));
        let xi = if m_f <= m_i || ((m_f.twice() - m_i.twice()) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        JacobiElem { prefactor: xi * log_norm.exp(), mu, nu, k }
    }

    fn eval(&self, beta: f64) -> f64 {
        let (s, c) = (0.5 * beta).sin_cos();
        let p = jacobi(self.k, f64::from(self.mu), f64::from(self.nu), s * s, beta.cos());
        self.prefactor * ipow(s, self.mu) * ipow(c, self.nu) * p
    }
}

/// `P_k^{(a, b)}(x)` by the three-term recurrence in degree; `s2 = (1 - x)/2`
/// is passed separately to keep `P_1` accurate near `x = 1`.
fn jacobi(k: usize, a: f64, b: f64, s2: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut p_prev = 1.0;
    let mut p = (a + 1.0) - (a + b + 2.0) * s2;
    for n in 2..=k {
        let n = n as f64;
        let t = 2.0 * n + a + b;
        let c1 = 2.0 * n * (n + a + b) * (t - 2.0);
        let c2 = (t - 1.0) * (a * a - b * b);
        let c3 = (t - 2.0) * (t - 1.0) * t;
        let c4 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * t;
        let next = ((c2 + c3 * x) * p - c4 * p_prev) / c1;
        p_prev = p;
        p = next;
    }
    p
}

#[inline]
fn ipow(x: f64, p: i32) -> f64 {
    if p == 0 {
        1.0
    } else {
        x.powi(p)
    }
}

/// Neumaier-compensated sum of the values in descending magnitude.
fn ordered_sum(vals: &mut [f64]) -> f64 {
    match vals.len() {
        0 => return 0.0,
        1 => return vals[0],
        _ => {}
    }
    vals.sort_unstable_by(|a, b| b.abs().total_cmp(&a.abs()));
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &v in vals.iter() {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn wigner_d(j: HalfInt, m_f: HalfInt, m_i: HalfInt, beta: f64) -> Result<f64> {
    Ok(SmallD::new(j, m_f, m_i)?.value(beta))
}

pub fn wigner_d_deriv(j: HalfInt, m_f: HalfInt, m_i: HalfInt, beta: f64) -> Result<f64> {
    Ok(SmallD::new(j, m_f, m_i)?.derivative(beta))
}

/// Full `(2j+1) x (2j+1)` matrix; row index `a` is `m_f = j - a`, column `b`
/// is `m_i = j - b`.
pub fn wigner_d_matrix(j: HalfInt, beta: f64) -> Result<DMatrix<f64>> {
    let ms: Vec<HalfInt> = j.magnetic_numbers().collect();
    let dim = ms.len();
    let mut out = DMatrix::zeros(dim, dim);
    for (a, &mf) in ms.iter().enumerate() {
        for (b, &mi) in ms.iter().enumerate() {
            out[(a, b)] = wigner_d(j, mf, mi, beta)?;
        }
    }
    Ok(out)
}
