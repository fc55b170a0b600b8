//! Parameter sweeps, figure presets, landmark reports and the oracle
//! regression matrix, all producing deterministic CSV plus a JSON manifest.
//!
//! Sweeps are evaluated in parallel over grid points and assembled by a single
//! writer in a fixed order (panel, j, lambda index, Theta index), so output
//! bytes do not depend on the thread count.

mod grid;
mod oracle_check;
mod presets;
mod report;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::channel::{cramer_rao_from_qfi, snr_from_qfi, Channel, EstimationBudget, QfiBreakdown};
use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::landmarks::{landmarks, ThetaLandmarks};
use crate::meter::MeterSpec;
use crate::optimize::SearchOptions;
use crate::par::{map_range, Execution};
use crate::tolerance::Tolerances;

pub use grid::{Grid, Scale};
pub use oracle_check::{run_oracle_check, OracleCheckConfig, OracleCheckReport, OracleFailure, OracleWorst};
pub use presets::{figure_preset, FIGURE_IDS};
pub use report::{meter_phase_report, LandmarkReport, PhaseReport};

/// Upper bound on grid points per run.
pub const MAX_POINTS: usize = 10_000_000;

/// Literal written for points where the quantities are undefined.
pub const NA: &str = "NA";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantity {
    P,
    QT,
    Qpar,
    IT,
    Ipar,
    Iperp,
    T,
    Snr,
    Dlambda,
    QTn2,
    Qparn2,
    ITn2,
    Iparn2,
    Iperpn2,
    Tn2,
}

impl Quantity {
    pub const ALL: [Quantity; 15] = [
        Quantity::P,
        Quantity::QT,
        Quantity::Qpar,
        Quantity::IT,
        Quantity::Ipar,
        Quantity::Iperp,
        Quantity::T,
        Quantity::Snr,
        Quantity::Dlambda,
        Quantity::QTn2,
        Quantity::Qparn2,
        Quantity::ITn2,
        Quantity::Iparn2,
        Quantity::Iperpn2,
        Quantity::Tn2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::P => "P",
            Quantity::QT => "QT",
            Quantity::Qpar => "Qpar",
            Quantity::IT => "IT",
            Quantity::Ipar => "Ipar",
            Quantity::Iperp => "Iperp",
            Quantity::T => "T",
            Quantity::Snr => "SNR",
            Quantity::Dlambda => "dlambda",
            Quantity::QTn2 => "QT_n2",
            Quantity::Qparn2 => "Qpar_n2",
            Quantity::ITn2 => "IT_n2",
            Quantity::Iparn2 => "Ipar_n2",
            Quantity::Iperpn2 => "Iperp_n2",
            Quantity::Tn2 => "T_n2",
        }
    }

    /// `SNR` uses the grid coupling as the mean `<lambda>`; `dlambda` is the
    /// Cramér-Rao bound for the configured number of trials.
    pub fn evaluate(self, b: &QfiBreakdown, n: u32, lambda: f64, budget: EstimationBudget) -> f64 {
        let n2 = f64::from(n * n);
        match self {
            Quantity::P => b.p,
            Quantity::QT => b.q_total,
            Quantity::Qpar => b.q_parallel,
            Quantity::IT => b.i_total,
            Quantity::Ipar => b.i_parallel,
            Quantity::Iperp => b.i_perp,
            Quantity::T => b.t_per_trial,
            Quantity::Snr => snr_from_qfi(b.i_perp, lambda.abs()),
            Quantity::Dlambda => cramer_rao_from_qfi(b.i_perp, budget),
            Quantity::QTn2 => b.q_total / n2,
            Quantity::Qparn2 => b.q_parallel / n2,
            Quantity::ITn2 => b.i_total / n2,
            Quantity::Iparn2 => b.i_parallel / n2,
            Quantity::Iperpn2 => b.i_perp / n2,
            Quantity::Tn2 => b.t_per_trial / n2,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown quantity '{s}'")))
    }
}

impl Serialize for Quantity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// One block of rows: a meter, a set of spins and a `(lambda, Theta)` grid.
/// Selection is extremal, `m_i = j`, `m_f = -j`.
#[derive(Clone, Debug, Serialize)]
pub struct Panel {
    pub name: String,
    pub meter: MeterSpec,
    pub j_list: Vec<HalfInt>,
    pub lambda: Grid,
    pub theta: Grid,
}

impl Panel {
    pub fn points(&self) -> usize {
        self.j_list.len() * self.lambda.count * self.theta.count
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepConfig {
    /// Figure preset name, when the config came from one.
    pub preset: Option<String>,
    pub panels: Vec<Panel>,
    pub outputs: Vec<Quantity>,
    pub trials: EstimationBudget,
}

impl SweepConfig {
    pub fn single(meter: MeterSpec, j_list: Vec<HalfInt>, lambda: Grid, theta: Grid, outputs: Vec<Quantity>) -> Self {
        SweepConfig {
            preset: None,
            panels: vec![Panel { name: "sweep".into(), meter, j_list, lambda, theta }],
            outputs,
            trials: EstimationBudget::default(),
        }
    }

    pub fn total_points(&self) -> usize {
        self.panels.iter().map(Panel::points).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.panels.is_empty() {
            return Err(Error::Config("no panels to evaluate".into()));
        }
        if self.outputs.is_empty() {
            return Err(Error::Config("no output quantities requested".into()));
        }
        for p in &self.panels {
            if p.j_list.is_empty() {
                return Err(Error::Config(format!("panel '{}' has no spin values", p.name)));
            }
            if let Some(j) = p.j_list.iter().find(|j| j.twice() < 0) {
                return Err(Error::Config(format!("negative spin j={j}")));
            }
            p.lambda.validate()?;
            p.theta.validate()?;
        }
        let total = self.panels.iter().try_fold(0usize, |acc, p| {
            p.j_list.len().checked_mul(p.lambda.count)?.checked_mul(p.theta.count)?.checked_add(acc)
        });
        match total {
            Some(t) if t <= MAX_POINTS => Ok(()),
            _ => Err(Error::Config(format!("sweep exceeds {MAX_POINTS} grid points"))),
        }
    }
}

/// Rows of one `(panel, j)` block, lambda-major.
#[derive(Clone, Debug)]
pub struct Block {
    pub panel: usize,
    pub j: HalfInt,
    pub lambdas: Vec<f64>,
    pub thetas: Vec<f64>,
    /// `values[(li * thetas.len() + ti) * outputs + q]`; `None` where undefined.
    pub values: Vec<Option<f64>>,
}

#[derive(Clone, Debug)]
pub struct SweepTable {
    pub config: SweepConfig,
    pub blocks: Vec<Block>,
}

impl SweepTable {
    pub fn rows(&self) -> usize {
        self.blocks.iter().map(|b| b.lambdas.len() * b.thetas.len()).sum()
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> =
            ["panel", "law", "d", "n", "j", "lambda", "theta"].iter().map(|s| s.to_string()).collect();
        h.extend(self.config.outputs.iter().map(|q| q.name().to_string()));
        h
    }

    /// Values of one output column of one block, in row order.
    pub fn column(&self, block: usize, q: Quantity) -> Option<Vec<Option<f64>>> {
        let k = self.config.outputs.iter().position(|&o| o == q)?;
        let nq = self.config.outputs.len();
        let b = &self.blocks[block];
        Some(b.values.chunks(nq).map(|row| row[k]).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(self.header()).map_err(csv_err)?;
        let nq = self.config.outputs.len();
        let mut record: Vec<String> = Vec::with_capacity(7 + nq);
        for b in &self.blocks {
            let panel = &self.config.panels[b.panel];
            let (law, d, n, j) =
                (panel.meter.law().name(), panel.meter.d().to_string(), panel.meter.n().to_string(), b.j.to_string());
            for (li, &l) in b.lambdas.iter().enumerate() {
                for (ti, &t) in b.thetas.iter().enumerate() {
                    record.clear();
                    record.extend([
                        panel.name.clone(),
                        law.to_string(),
                        d.clone(),
                        n.clone(),
                        j.clone(),
                        fmt_f64(l),
                        fmt_f64(t),
                    ]);
                    let row = &b.values[(li * b.thetas.len() + ti) * nq..][..nq];
                    record.extend(row.iter().map(|v| v.map_or_else(|| NA.to_string(), fmt_f64)));
                    w.write_record(&record).map_err(csv_err)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn evaluate_with(config: &SweepConfig, exec: Execution) -> Result<SweepTable> {
    config.validate()?;
    let nq = config.outputs.len();
    let mut blocks = Vec::new();
    for (pi, panel) in config.panels.iter().enumerate() {
        let lambdas = panel.lambda.points();
        let thetas = panel.theta.points();
        let n = panel.meter.n();
        for &j in &panel.j_list {
            let ch = Channel::extremal(&panel.meter, j)?;
            let nt = thetas.len();
            let rows = map_range(exec, lambdas.len() * nt, |i| {
                let (l, t) = (lambdas[i / nt], thetas[i % nt]);
                match ch.breakdown(l, t) {
                    Ok(b) => config
                        .outputs
                        .iter()
                        .map(|q| Some(q.evaluate(&b, n, l, config.trials)).filter(|v| v.is_finite()))
                        .collect(),
                    Err(_) => vec![None; nq],
                }
            });
            blocks.push(Block {
                panel: pi,
                j,
                lambdas: lambdas.clone(),
                thetas: thetas.clone(),
                values: rows.concat(),
            });
        }
    }
    Ok(SweepTable { config: config.clone(), blocks })
}

/// Evaluate every grid point, in parallel when the feature is enabled.
pub fn evaluate(config: &SweepConfig) -> Result<SweepTable> {
    evaluate_with(config, Execution::Parallel)
}

pub fn evaluate_sequential(config: &SweepConfig) -> Result<SweepTable> {
    evaluate_with(config, Execution::Sequential)
}

pub fn evaluate_in(config: &SweepConfig, exec: Execution) -> Result<SweepTable> {
    evaluate_with(config, exec)
}

/// Landmarks of one `(panel, j)` block with a single coupling value.
#[derive(Clone, Debug, Serialize)]
pub struct PanelLandmarks {
    pub panel: String,
    pub j: HalfInt,
    pub lambda: f64,
    pub landmarks: Option<ThetaLandmarks>,
    /// Why `landmarks` is missing.
    pub note: Option<String>,
}

/// Landmarks for every block whose lambda grid is a single point; those are
/// the Theta line sweeps, where the markers belong on the plot.
pub fn panel_landmarks(config: &SweepConfig, opts: &SearchOptions) -> Vec<PanelLandmarks> {
    let mut out = Vec::new();
    for panel in config.panels.iter().filter(|p| p.lambda.count == 1) {
        for &j in &panel.j_list {
            let lambda = panel.lambda.min;
            let params = crate::channel::ChannelParams::extremal(lambda, 0.0, j);
            let (landmarks, note) = match landmarks(&params, &panel.meter, opts) {
                Ok(l) => (Some(l), None),
                Err(e) => (None, Some(e.to_string())),
            };
            out.push(PanelLandmarks { panel: panel.name.clone(), j, lambda, landmarks, note });
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub csv: String,
    pub rows: usize,
    pub columns: Vec<String>,
    pub config: &'a SweepConfig,
    pub selection: &'static str,
    pub tolerances: Tolerances,
    pub landmarks: Vec<PanelLandmarks>,
}

pub fn manifest_path(csv_path: &Path) -> PathBuf {
    let stem = csv_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    csv_path.with_file_name(format!("{stem}.manifest.json"))
}

/// Write the CSV and its manifest next to it. Returns the manifest path.
pub fn write_outputs(table: &SweepTable, command: &str, csv_path: &Path, opts: &SearchOptions) -> Result<PathBuf> {
    let file = std::io::BufWriter::new(std::fs::File::create(csv_path)?);
    table.write_csv(file)?;
    let manifest = Manifest {
        tool: "pqfi",
        version: env!("CARGO_PKG_VERSION"),
        command,
        csv: csv_path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        rows: table.rows(),
        columns: table.header(),
        config: &table.config,
        selection: "extremal (m_i = j, m_f = -j)",
        tolerances: Tolerances::default(),
        landmarks: panel_landmarks(&table.config, opts),
    };
    let path = manifest_path(csv_path);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SweepConfig {
        SweepConfig::single(
            MeterSpec::pancharatnam(3, 2).unwrap(),
            vec![HalfInt::HALF, HalfInt::ONE],
            Grid::log(1e-3, 1.0, 4),
            Grid::periodic(5),
            vec![Quantity::P, Quantity::Iperp, Quantity::Tn2, Quantity::Dlambda],
        )
    }

    #[test]
    fn csv_layout_and_na() {
        let t = evaluate(&small()).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "panel,law,d,n,j,lambda,theta,P,Iperp,T_n2,dlambda");
        assert_eq!(lines.len(), 1 + 2 * 4 * 5);
        assert!(!s.contains('\r'));
        assert!(lines[1].starts_with("sweep,pancharatnam,3,2,1/2,1.0000000000000000e-3,0.0000000000000000e0,"));
        // an all-zero spectrum at Theta = 0 never postselects
        let zero = SweepConfig::single(
            MeterSpec::explicit(1, vec![0.0, 0.0]).unwrap(),
            vec![HalfInt::HALF],
            Grid::single(0.1),
            Grid::single(0.0),
            vec![Quantity::P, Quantity::Iperp],
        );
        let mut buf = Vec::new();
        evaluate(&zero).unwrap().write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().ends_with(",NA,NA\n"));
    }

    #[test]
    fn parallel_and_sequential_bytes_agree() {
        let c = small();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        evaluate(&c).unwrap().write_csv(&mut a).unwrap();
        evaluate_sequential(&c).unwrap().write_csv(&mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn values_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn quantity_names() {
        for q in Quantity::ALL {
            assert_eq!(q.name().parse::<Quantity>().unwrap(), q);
        }
        assert!("Ifoo".parse::<Quantity>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = small();
        c.outputs.clear();
        assert!(c.validate().is_err());
        let mut c = small();
        c.panels[0].lambda = Grid::linear(0.0, 1.0, 10_000);
        c.panels[0].theta = Grid::periodic(10_000);
        assert!(c.validate().is_err());
        let mut c = small();
        c.panels[0].j_list.clear();
        assert!(c.validate().is_err());
    }

    #[test]
    fn manifest_next_to_csv() {
        assert_eq!(manifest_path(Path::new("/tmp/x/fig3.csv")), PathBuf::from("/tmp/x/fig3.manifest.json"));
    }
}
