use std::fmt;

use serde::Serialize;

use crate::channel::{Channel, ChannelParams};
use crate::closed_form::pancharatnam_phase;
use crate::error::Result;
use crate::landmarks::{landmarks, ThetaLandmarks};
use crate::meter::{fractional_phase_approx, EigenLaw, MeterSpec};
use crate::optimize::SearchOptions;

/// Landmarks plus the per-trial QFI at each of them.
#[derive(Clone, Debug, Serialize)]
pub struct LandmarkReport {
    pub params: ChannelParams,
    pub meter: MeterSpec,
    pub landmarks: ThetaLandmarks,
    pub t_at_theta_t: Option<f64>,
    pub t_at_theta_perp: Option<f64>,
    pub t_at_theta_par: Option<f64>,
    /// Largest `T` among the landmarks beats the baseline `(2j)^2`.
    pub advantage: bool,
}

impl LandmarkReport {
    pub fn compute(params: &ChannelParams, spec: &MeterSpec, opts: &SearchOptions) -> Result<Self> {
        let lm = landmarks(params, spec, opts)?;
        let ch = Channel::for_params(spec, params)?;
        let t_at = |theta: f64| ch.breakdown(params.lambda, theta).ok().map(|b| b.t_per_trial);
        let t_at_theta_t = t_at(lm.theta_t.theta);
        let t_at_theta_perp = t_at(lm.theta_perp.theta);
        let t_at_theta_par = lm.theta_par.and_then(|p| t_at(p.theta));
        let best =
            [t_at_theta_t, t_at_theta_perp, t_at_theta_par].into_iter().flatten().fold(f64::NEG_INFINITY, f64::max);
        Ok(LandmarkReport {
            params: *params,
            meter: spec.clone(),
            landmarks: lm,
            t_at_theta_t,
            t_at_theta_perp,
            t_at_theta_par,
            advantage: best > lm.baseline,
        })
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".into(), |v| format!("{v:.12e}"))
}

impl fmt::Display for LandmarkReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lm = &self.landmarks;
        let p = &self.params;
        writeln!(f, "meter        {} d={} n={}", self.meter.law().name(), self.meter.d(), self.meter.n())?;
        writeln!(f, "spin         j={} m_i={} m_f={}", p.j, p.m_i, p.m_f)?;
        writeln!(f, "lambda       {:.12e}", p.lambda)?;
        if lm.degenerate {
            writeln!(f, "degenerate   lambda = 0, every phase is stationary")?;
        }
        writeln!(
            f,
            "theta_T      {:.12e} ({:?})  T = {}",
            lm.theta_t.theta,
            lm.theta_t.method,
            opt(self.t_at_theta_t)
        )?;
        writeln!(
            f,
            "theta_perp   {:.12e} ({:?})  T = {}",
            lm.theta_perp.theta,
            lm.theta_perp.method,
            opt(self.t_at_theta_perp)
        )?;
        match lm.theta_par {
            Some(q) => writeln!(
                f,
                "theta_par    {:.12e} ({:?})  T = {}  Qpar = {:.3e}{}",
                q.theta,
                q.method,
                opt(self.t_at_theta_par),
                q.residual,
                if q.suppressed { "" } else { " (minimum, not a zero)" }
            )?,
            None => writeln!(f, "theta_par    none (parallel term independent of Theta)")?,
        }
        writeln!(f, "meter phase  {}", opt(lm.pancharatnam))?;
        writeln!(f, "baseline     {}", lm.baseline)?;
        write!(f, "advantage    {}", if self.advantage { "yes" } else { "no" })
    }
}

/// Meter expectation `<O_lambda>` with its phase and visibility.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseReport {
    pub meter: MeterSpec,
    pub lambda: f64,
    pub re: f64,
    pub im: f64,
    pub visibility: f64,
    pub phase: Option<f64>,
    /// `i n mean(u)`, the parallel-transport term `<O^dagger dO>`.
    pub transport_im: f64,
    /// Closed form where the law has one.
    pub phase_closed_form: Option<f64>,
}

pub fn meter_phase_report(spec: &MeterSpec, lambda: f64) -> PhaseReport {
    let e = spec.expect_o(lambda);
    let phase_closed_form = match spec.law() {
        EigenLaw::Pancharatnam => Some(pancharatnam_phase(spec.d(), spec.n(), lambda)),
        EigenLaw::Symmetric => Some(0.0),
        EigenLaw::Fractional { eps } => Some(fractional_phase_approx(spec.d(), spec.n(), *eps, lambda)),
        EigenLaw::Explicit { .. } => None,
    };
    PhaseReport {
        meter: spec.clone(),
        lambda,
        re: e.value.re,
        im: e.value.im,
        visibility: e.modulus,
        phase: e.phase,
        transport_im: spec.parallel_transport_term().im,
        phase_closed_form,
    }
}

impl fmt::Display for PhaseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "meter        {} d={} n={}", self.meter.law().name(), self.meter.d(), self.meter.n())?;
        writeln!(f, "lambda       {:.12e}", self.lambda)?;
        writeln!(f, "<O>          {:.12e} {:+.12e}i", self.re, self.im)?;
        writeln!(f, "visibility   {:.12e}", self.visibility)?;
        writeln!(f, "phase        {}", opt(self.phase))?;
        if let Some(c) = self.phase_closed_form {
            writeln!(f, "closed form  {c:.12e}")?;
        }
        write!(f, "transport    {:.12e}i", self.transport_im)
    }
}
