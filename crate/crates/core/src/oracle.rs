//! Brute-force state-vector oracle.
//!
//! Builds the joint system-meter state as a dense vector, applies each
//! unitary as an explicit matrix exponential, projects on the postselected
//! system state and differentiates numerically. Nothing here uses the
//! factorial sums or closed forms of the analytic path, so agreement between
//! the two is a genuine check.
//!
//! The `n` meter copies are folded into effective eigenvalues `n u_k` on one
//! d-dimensional factor; the uniform meter state never leaves the span of
//! `|b_k>^n`, so this is exact.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::meter::{principal, MeterSpec};
use crate::tolerance::P_FLOOR;

type CMat = DMatrix<Complex64>;
type CVec = DVector<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense spin-`j` operators in the basis `m = j, j-1, ..., -j`.
#[derive(Clone, Debug)]
pub struct SpinOps {
    pub j: HalfInt,
    pub jx: CMat,
    pub jy: CMat,
    pub jz: CMat,
    pub jt: CMat,
}

impl SpinOps {
    pub fn new(j: HalfInt) -> Self {
        let dim = j.multiplicity();
        let jv = j.value();
        let mut jp = CMat::zeros(dim, dim);
        let mut jz = CMat::zeros(dim, dim);
        for a in 0..dim {
            let m = jv - a as f64;
            jz[(a, a)] = Complex64::new(m, 0.0);
            if a > 0 {
                // J+ |m> = sqrt((j-m)(j+m+1)) |m+1>, and m+1 sits at index a-1
                jp[(a - 1, a)] = Complex64::new(((jv - m) * (jv + m + 1.0)).sqrt(), 0.0);
            }
        }
        let jm = jp.adjoint();
        let jx = (&jp + &jm).scale(0.5);
        let jy = (&jp - &jm) * Complex64::new(0.0, -0.5);
        let jt = CMat::identity(dim, dim) * Complex64::new(jv, 0.0);
        SpinOps { j, jx, jy, jz, jt }
    }

    /// Largest entry of `[J_a, J_b] - i J_c` over the cyclic triples.
    pub fn commutator_residual(&self) -> f64 {
        let comm = |a: &CMat, b: &CMat| a * b - b * a;
        let r1 = comm(&self.jx, &self.jy) - &self.jz * I;
        let r2 = comm(&self.jy, &self.jz) - &self.jx * I;
        let r3 = comm(&self.jz, &self.jx) - &self.jy * I;
        [r1, r2, r3].iter().map(max_abs).fold(0.0, f64::max)
    }

    pub fn index_of(&self, m: HalfInt) -> usize {
        ((self.j.twice() - m.twice()) / 2) as usize
    }
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `exp(i t H)` for Hermitian `H`, by eigendecomposition.
pub fn expm_hermitian(h: &CMat, t: f64) -> CMat {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = CVec::from_iterator(v.ncols(), eig.eigenvalues.iter().map(|&w| Complex64::from_polar(1.0, t * w)));
    let mut scaled = v.clone();
    for (c, p) in phases.iter().enumerate() {
        scaled.column_mut(c).scale_mut_complex(*p);
    }
    scaled * v.adjoint()
}

trait ScaleComplex {
    fn scale_mut_complex(&mut self, z: Complex64);
}

impl<S> ScaleComplex for nalgebra::Matrix<Complex64, nalgebra::Dyn, nalgebra::U1, S>
where
    S: nalgebra::StorageMut<Complex64, nalgebra::Dyn, nalgebra::U1>,
{
    fn scale_mut_complex(&mut self, z: Complex64) {
        for x in self.iter_mut() {
            *x *= z;
        }
    }
}

/// `max |U^dagger U - 1|`.
pub fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - CMat::identity(n, n)))
}

/// Small-d element from the spectral sum over `J_y` eigenstates,
/// `sum_{m_y} <m_f|m_y><m_y|m_i> exp(-i m_y beta)`.
pub fn wigner_d_spectral(j: HalfInt, m_f: HalfInt, m_i: HalfInt, beta: f64) -> Result<Complex64> {
    j.check_magnetic(m_f)?;
    j.check_magnetic(m_i)?;
    let ops = SpinOps::new(j);
    let eig = ops.jy.clone().symmetric_eigen();
    let (a, b) = (ops.index_of(m_f), ops.index_of(m_i));
    let v = &eig.eigenvectors;
    Ok((0..v.ncols())
        .map(|c| v[(a, c)] * v[(b, c)].conj() * Complex64::from_polar(1.0, -eig.eigenvalues[c] * beta))
        .sum())
}

/// Joint state on `system (x) meter`, system index major.
#[derive(Clone, Debug)]
pub struct DenseState {
    pub amplitudes: CVec,
    pub system_dim: usize,
    pub meter_dim: usize,
}

impl DenseState {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// Meter amplitudes conditioned on system index `a` (unnormalized).
    pub fn project_system(&self, a: usize) -> CVec {
        self.amplitudes.rows(a * self.meter_dim, self.meter_dim).into_owned()
    }
}

/// Precomputed unitaries for one `(j, m_i, m_f, meter)`.
#[derive(Clone, Debug)]
pub struct OracleChannel {
    rot_in: CMat,
    rot_out: CMat,
    coupling_gen: CMat,
    phase_gen: CMat,
    initial: CVec,
    final_index: usize,
    system_dim: usize,
    meter_dim: usize,
}

impl OracleChannel {
    pub fn new(spec: &MeterSpec, j: HalfInt, m_i: HalfInt, m_f: HalfInt) -> Result<Self> {
        j.check_magnetic(m_i)?;
        j.check_magnetic(m_f)?;
        let ops = SpinOps::new(j);
        let (sd, md) = (j.multiplicity(), spec.d());
        let eye_m = CMat::identity(md, md);
        let u = CMat::from_diagonal(&CVec::from_iterator(
            md,
            spec.effective_eigenvalues().into_iter().map(|r| Complex64::new(r, 0.0)),
        ));
        let rot_in = expm_hermitian(&ops.jx, -FRAC_PI_2).kronecker(&eye_m);
        let rot_out = expm_hermitian(&ops.jx, FRAC_PI_2).kronecker(&eye_m);
        let coupling_gen = (&ops.jt + &ops.jz).kronecker(&u);
        let phase_gen = (&ops.jt - &ops.jz).kronecker(&eye_m);

        let mut sys = CVec::zeros(sd);
        sys[ops.index_of(m_i)] = Complex64::new(1.0, 0.0);
        let meter = CVec::from_element(md, Complex64::new(1.0 / (md as f64).sqrt(), 0.0));
        Ok(OracleChannel {
            rot_in,
            rot_out,
            coupling_gen,
            phase_gen,
            initial: sys.kronecker(&meter),
            final_index: ops.index_of(m_f),
            system_dim: sd,
            meter_dim: md,
        })
    }

    pub fn for_params(spec: &MeterSpec, params: &ChannelParams) -> Result<Self> {
        Self::new(spec, params.j, params.m_i, params.m_f)
    }

    /// The four unitaries in application order.
    pub fn unitaries(&self, lambda: f64, theta: f64) -> [CMat; 4] {
        [
            self.rot_in.clone(),
            expm_hermitian(&self.coupling_gen, lambda),
            expm_hermitian(&self.phase_gen, theta),
            self.rot_out.clone(),
        ]
    }

    pub fn evolve(&self, lambda: f64, theta: f64) -> DenseState {
        let mut psi = self.initial.clone();
        for u in self.unitaries(lambda, theta) {
            psi = u * psi;
        }
        DenseState { amplitudes: psi, system_dim: self.system_dim, meter_dim: self.meter_dim }
    }

    /// Unnormalized postselected meter state `K |M>`.
    pub fn meter_state(&self, lambda: f64, theta: f64) -> CVec {
        self.evolve(lambda, theta).project_system(self.final_index)
    }
}

/// Full joint state after the unitaries, before postselection.
pub fn evolve_joint(params: &ChannelParams, spec: &MeterSpec) -> Result<DenseState> {
    Ok(OracleChannel::for_params(spec, params)?.evolve(params.lambda, params.theta))
}

/// Unnormalized postselected meter state; its squared norm is the
/// postselection probability.
pub fn postselected_meter(params: &ChannelParams, spec: &MeterSpec) -> Result<CVec> {
    Ok(OracleChannel::for_params(spec, params)?.meter_state(params.lambda, params.theta))
}

#[derive(Clone, Copy, Debug)]
pub struct FdOptions {
    /// Defaults to `1e-6 (1 + |lambda|)`.
    pub h: Option<f64>,
    /// Fourth-order stencil instead of the plain central difference.
    pub richardson: bool,
    /// Rotate the neighbouring states onto the phase of the centre state
    /// before differencing. A gauge choice: it leaves the QFI unchanged and
    /// keeps the derivative small.
    pub align_phase: bool,
}

impl Default for FdOptions {
    fn default() -> Self {
        FdOptions { h: None, richardson: false, align_phase: true }
    }
}

/// Finite-difference estimates at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdQfi {
    pub p: f64,
    /// `||dPhi||^2`.
    pub q_total: f64,
    /// `|<Phi|dPhi>|^2`.
    pub q_parallel: f64,
    pub i_total: f64,
    /// `4 (||dpsi||^2 - |<psi|dpsi>|^2)` on the normalized state.
    pub i_perp: f64,
}

fn stencil(opts: &FdOptions, lambda: f64) -> Result<(f64, Vec<(f64, f64)>)> {
    let h = opts.h.unwrap_or(1e-6 * (1.0 + lambda.abs()));
    if !(h > 0.0) || lambda + h == lambda || lambda - h == lambda {
        return Err(Error::StepUnderflow { h, lambda });
    }
    let w = if opts.richardson {
        vec![(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)]
    } else {
        vec![(-1.0, -0.5), (1.0, 0.5)]
    };
    Ok((h, w))
}

fn qfi_with_gauge(
    ch: &OracleChannel,
    lambda: f64,
    theta: f64,
    opts: &FdOptions,
    gauge: &dyn Fn(f64) -> f64,
) -> Result<FdQfi> {
    let (h, weights) = stencil(opts, lambda)?;
    let phi0 = ch.meter_state(lambda, theta);
    let p = phi0.norm_squared();
    if !(p > P_FLOOR) {
        return Err(Error::VanishingPostselection { p, floor: P_FLOOR });
    }
    let psi0 = phi0.unscale(p.sqrt()) * Complex64::from_polar(1.0, gauge(lambda));

    let mut d_phi = CVec::zeros(phi0.len());
    let mut d_psi = CVec::zeros(phi0.len());
    for &(k, w) in &weights {
        let l = lambda + k * h;
        let phi = ch.meter_state(l, theta);
        let pk = phi.norm_squared();
        if !(pk > P_FLOOR) {
            return Err(Error::VanishingPostselection { p: pk, floor: P_FLOOR });
        }
        let mut psi = phi.unscale(pk.sqrt()) * Complex64::from_polar(1.0, gauge(l));
        if opts.align_phase {
            let ov = psi0.dotc(&psi);
            if ov.norm() > 0.0 {
                psi *= ov.conj() / ov.norm();
            }
        }
        d_phi += phi * Complex64::new(w / h, 0.0);
        d_psi += psi * Complex64::new(w / h, 0.0);
    }
    let q_total = d_phi.norm_squared();
    let q_parallel = phi0.dotc(&d_phi).norm_sqr();
    let i_perp = 4.0 * (d_psi.norm_squared() - psi0.dotc(&d_psi).norm_sqr());
    Ok(FdQfi { p, q_total, q_parallel, i_total: 4.0 * q_total / p, i_perp })
}

pub fn qfi_finite_difference(params: &ChannelParams, spec: &MeterSpec, opts: &FdOptions) -> Result<FdQfi> {
    let ch = OracleChannel::for_params(spec, params)?;
    qfi_with_gauge(&ch, params.lambda, params.theta, opts, &|_| 0.0)
}

/// Same as [`qfi_finite_difference`] on a prepared channel.
pub fn qfi_finite_difference_with(ch: &OracleChannel, lambda: f64, theta: f64, opts: &FdOptions) -> Result<FdQfi> {
    qfi_with_gauge(ch, lambda, theta, opts, &|_| 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaugeCheck {
    pub plain: f64,
    pub gauged: f64,
    /// `|gauged - plain|`.
    pub difference: f64,
}

/// QFI of the state path with and without an extra phase `exp(i phi(lambda))`,
/// `phi` given by polynomial coefficients in increasing degree. Phase
/// alignment is switched off so the gauge actually reaches the formula.
pub fn gauge_invariance_check(
    params: &ChannelParams,
    spec: &MeterSpec,
    phase_poly: &[f64],
    opts: &FdOptions,
) -> Result<GaugeCheck> {
    let ch = OracleChannel::for_params(spec, params)?;
    let opts = FdOptions { align_phase: false, ..*opts };
    let poly = |x: f64| phase_poly.iter().rev().fold(0.0, |acc, c| acc * x + c);
    let plain = qfi_with_gauge(&ch, params.lambda, params.theta, &opts, &|_| 0.0)?.i_perp;
    let gauged = qfi_with_gauge(&ch, params.lambda, params.theta, &opts, &poly)?.i_perp;
    Ok(GaugeCheck { plain, gauged, difference: (gauged - plain).abs() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoncyclicPhase {
    /// `arg <phi_first|phi_last>`.
    pub total: f64,
    /// `Im int <O^dagger dO> dlambda`.
    pub dynamical: f64,
    /// Discrete Bargmann phase `arg[<phi_1|phi_N> prod <phi_{k+1}|phi_k>]`.
    pub geometric: f64,
    /// `sum arg <phi_k|phi_{k+1}>`, the discrete dynamical phase.
    pub dynamical_discrete: f64,
}

impl NoncyclicPhase {
    /// `total - dynamical`, the continuum limit of `geometric`.
    pub fn geometric_limit(&self) -> f64 {
        principal(self.total - self.dynamical)
    }
}

/// Noncyclic phase along the meter path `O_lambda |M>`, `lambda` running over
/// `steps` equally spaced points of `[lambda_start, lambda_end]`.
///
/// Each overlap's phase is taken from the unnormalized states; positive
/// rescaling does not change it.
pub fn noncyclic_geometric_phase(
    spec: &MeterSpec,
    lambda_start: f64,
    lambda_end: f64,
    steps: usize,
) -> Result<NoncyclicPhase> {
    if steps < 2 {
        return Err(Error::Config(format!("noncyclic phase needs at least 2 steps, got {steps}")));
    }
    if lambda_start == lambda_end {
        return Ok(NoncyclicPhase { total: 0.0, dynamical: 0.0, geometric: 0.0, dynamical_discrete: 0.0 });
    }
    let amp = 1.0 / (spec.d() as f64).sqrt();
    let state = |l: f64| CVec::from_vec(spec.operator_diagonal(l).into_iter().map(|z| z * amp).collect());
    let span = lambda_end - lambda_start;
    let at = |k: usize| lambda_start + span * k as f64 / (steps - 1) as f64;

    let first = state(lambda_start);
    let mut prev = first.clone();
    let mut dyn_discrete = 0.0;
    for k in 1..steps {
        let next = state(at(k));
        let ov = prev.dotc(&next);
        if ov.norm() < 1e-12 {
            return Err(Error::ConjugatePoint { step: k });
        }
        dyn_discrete += ov.arg();
        prev = next;
    }
    let closing = first.dotc(&prev);
    if closing.norm() < 1e-12 {
        return Err(Error::ConjugatePoint { step: steps - 1 });
    }
    let total = closing.arg();
    Ok(NoncyclicPhase {
        total,
        dynamical: f64::from(spec.n()) * spec.mean_eigenvalue() * span,
        geometric: principal(total - dyn_discrete),
        dynamical_discrete: dyn_discrete,
    })
}

/// `|Im <chi|d chi>|` for `chi = O_lambda |M>` by central differences.
pub fn parallel_transport_residual(spec: &MeterSpec, lambda: f64) -> f64 {
    let amp = 1.0 / (spec.d() as f64).sqrt();
    let state = |l: f64| CVec::from_vec(spec.operator_diagonal(l).into_iter().map(|z| z * amp).collect());
    let h = 1e-6 * (1.0 + lambda.abs());
    let d = (state(lambda + h) - state(lambda - h)).unscale(2.0 * h);
    state(lambda).dotc(&d).im.abs()
}
