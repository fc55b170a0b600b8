//! Seeded analytic-vs-oracle regression matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::{Channel, ChannelParams, QfiBreakdown};
use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::meter::MeterSpec;
use crate::oracle::{qfi_finite_difference_with, FdOptions, OracleChannel};
use crate::par::{map_slice, Execution};
use crate::tolerance::{ORACLE_PROB_ABS, ORACLE_QFI_ABS, ORACLE_QFI_REL};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OracleCheckConfig {
    pub max_twice_j: i32,
    pub max_d: usize,
    pub max_n: u32,
    pub points: usize,
    pub seed: u64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Negative control: evaluate the analytic side with the QFI moments
    /// scaled by 4, which must make the check fail.
    pub inject_prefactor: bool,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for OracleCheckConfig {
    fn default() -> Self {
        OracleCheckConfig {
            max_twice_j: 4,
            max_d: 8,
            max_n: 3,
            points: 200,
            seed: 42,
            lambda_min: 1e-3,
            lambda_max: 1.0,
            inject_prefactor: false,
            exec: Execution::Parallel,
        }
    }
}

impl OracleCheckConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=8).contains(&self.max_twice_j) {
            return Err(Error::Config(format!("oracle spin bound 2j={} outside 1..=8", self.max_twice_j)));
        }
        if !(2..=10_000).contains(&self.max_d) {
            return Err(Error::Config(format!("oracle meter bound d={} outside 2..=10000", self.max_d)));
        }
        if self.max_n == 0 || self.points == 0 {
            return Err(Error::Config("oracle check needs n >= 1 and at least one point".into()));
        }
        if !(self.lambda_min > 0.0 && self.lambda_max >= self.lambda_min && self.lambda_max.is_finite()) {
            return Err(Error::Config(format!("bad coupling range [{}, {}]", self.lambda_min, self.lambda_max)));
        }
        Ok(())
    }
}

/// One test point of the matrix.
#[derive(Clone, Debug, Serialize)]
pub struct OraclePoint {
    pub twice_j: i32,
    pub twice_m_i: i32,
    pub twice_m_f: i32,
    pub meter: MeterSpec,
    pub lambda: f64,
    pub theta: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleFailure {
    pub index: usize,
    pub point: OraclePoint,
    pub quantity: &'static str,
    pub analytic: f64,
    pub oracle: f64,
    pub error: f64,
    pub allowed: f64,
}

/// Worst case of one compared quantity, as a fraction of its allowance and
/// as a plain error.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct OracleWorst {
    pub max_error: f64,
    pub max_relative: f64,
    pub max_ratio_to_allowed: f64,
}

impl OracleWorst {
    fn record(&mut self, error: f64, scale: f64, allowed: f64) {
        self.max_error = self.max_error.max(error);
        if scale > 0.0 {
            self.max_relative = self.max_relative.max(error / scale);
        }
        self.max_ratio_to_allowed = self.max_ratio_to_allowed.max(error / allowed);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleCheckReport {
    pub config: OracleCheckConfig,
    pub points: usize,
    pub skipped: usize,
    pub probability: OracleWorst,
    pub i_total: OracleWorst,
    pub i_perp: OracleWorst,
    pub failures: Vec<OracleFailure>,
}

impl OracleCheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn draw_points(cfg: &OracleCheckConfig) -> Vec<OraclePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (lo, hi) = (cfg.lambda_min.ln(), cfg.lambda_max.ln());
    (0..cfg.points)
        .map(|_| {
            let twice_j = rng.random_range(1..=cfg.max_twice_j);
            let twice_m_i = twice_j - 2 * rng.random_range(0..=twice_j);
            let twice_m_f = twice_j - 2 * rng.random_range(0..=twice_j);
            let d = rng.random_range(2..=cfg.max_d);
            let n = rng.random_range(1..=cfg.max_n);
            let meter = match rng.random_range(0..3) {
                0 => MeterSpec::pancharatnam(d, n),
                1 => MeterSpec::symmetric(d, n),
                _ => MeterSpec::fractional(d, n, rng.random_range(0.05..1.0)),
            }
            .expect("drawn meter parameters are valid");
            let lambda = if hi > lo { rng.random_range(lo..hi).exp() } else { cfg.lambda_min };
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            OraclePoint { twice_j, twice_m_i, twice_m_f, meter, lambda, theta }
        })
        .collect()
}

fn printed_convention(b: &QfiBreakdown) -> (f64, f64) {
    let (qt, qp) = (4.0 * b.q_total, 4.0 * b.q_parallel);
    (4.0 * qt / b.p, (4.0 * (qt * b.p - qp) / (b.p * b.p)).max(0.0))
}

struct Compared {
    p: (f64, f64),
    i_total: (f64, f64),
    i_perp: (f64, f64),
}

fn compare(pt: &OraclePoint, inject: bool) -> Result<Compared> {
    let h = HalfInt::from_twice;
    let params = ChannelParams::new(pt.lambda, pt.theta, h(pt.twice_j), h(pt.twice_m_i), h(pt.twice_m_f))?;
    let b = Channel::for_params(&pt.meter, &params)?.breakdown(pt.lambda, pt.theta)?;
    let oracle = OracleChannel::for_params(&pt.meter, &params)?;
    let p_oracle = oracle.meter_state(pt.lambda, pt.theta).norm_squared();
    let fd = qfi_finite_difference_with(
        &oracle,
        pt.lambda,
        pt.theta,
        &FdOptions { richardson: true, ..Default::default() },
    )?;
    let (it, ip) = if inject { printed_convention(&b) } else { (b.i_total, b.i_perp) };
    Ok(Compared { p: (b.p, p_oracle), i_total: (it, fd.i_total), i_perp: (ip, fd.i_perp) })
}

/// Run the matrix. Points whose postselection probability vanishes are
/// counted as skipped; everything else must agree within tolerance.
pub fn run_oracle_check(cfg: &OracleCheckConfig) -> Result<OracleCheckReport> {
    cfg.validate()?;
    let points = draw_points(cfg);
    let results = map_slice(cfg.exec, &points, |pt| compare(pt, cfg.inject_prefactor));

    let mut report = OracleCheckReport {
        config: *cfg,
        points: points.len(),
        skipped: 0,
        probability: OracleWorst::default(),
        i_total: OracleWorst::default(),
        i_perp: OracleWorst::default(),
        failures: Vec::new(),
    };
    for (index, (pt, r)) in points.iter().zip(results).enumerate() {
        let c = match r {
            Ok(c) => c,
            Err(Error::VanishingPostselection { .. }) => {
                report.skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let checks = [
            ("P", c.p, ORACLE_PROB_ABS, &mut report.probability),
            ("IT", c.i_total, ORACLE_QFI_ABS.max(ORACLE_QFI_REL * c.i_total.0.abs()), &mut report.i_total),
            ("Iperp", c.i_perp, ORACLE_QFI_ABS.max(ORACLE_QFI_REL * c.i_perp.0.abs()), &mut report.i_perp),
        ];
        for (quantity, (analytic, oracle), allowed, worst) in checks {
            let error = (analytic - oracle).abs();
            worst.record(error, analytic.abs(), allowed);
            if !(error <= allowed) {
                report.failures.push(OracleFailure {
                    index,
                    point: pt.clone(),
                    quantity,
                    analytic,
                    oracle,
                    error,
                    allowed,
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_matrix_passes_and_control_fails() {
        let cfg = OracleCheckConfig { points: 30, ..Default::default() };
        let r = run_oracle_check(&cfg).unwrap();
        assert!(r.passed(), "{:?}", r.failures.first());
        let bad = run_oracle_check(&OracleCheckConfig { inject_prefactor: true, ..cfg }).unwrap();
        assert!(!bad.passed());
        assert!(bad.failures.iter().all(|f| f.quantity != "P"));
    }

    #[test]
    fn points_are_seeded() {
        let cfg = OracleCheckConfig { points: 10, ..Default::default() };
        let a: Vec<f64> = draw_points(&cfg).iter().map(|p| p.theta).collect();
        let b: Vec<f64> = draw_points(&cfg).iter().map(|p| p.theta).collect();
        let c: Vec<f64> = draw_points(&OracleCheckConfig { seed: 7, ..cfg }).iter().map(|p| p.theta).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn bounds_are_validated() {
        assert!(OracleCheckConfig { max_twice_j: 9, ..Default::default() }.validate().is_err());
        assert!(OracleCheckConfig { lambda_min: 0.0, ..Default::default() }.validate().is_err());
    }
}
