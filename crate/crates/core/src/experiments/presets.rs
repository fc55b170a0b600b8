//! Figure presets. Each one reproduces the parameters of a published figure;
//! the line figures are Theta sweeps at a single coupling, the contour figure
//! is a log-lambda by Theta grid.

use super::{Grid, Panel, Quantity, SweepConfig};
use crate::channel::EstimationBudget;
use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::meter::MeterSpec;

pub const FIGURE_IDS: [u8; 6] = [1, 2, 3, 4, 5, 6];

const WEAK: f64 = 1e-3;

fn spins(twice: &[i32]) -> Vec<HalfInt> {
    twice.iter().map(|&t| HalfInt::from_twice(t)).collect()
}

fn line(name: &str, meter: MeterSpec, j: Vec<HalfInt>, theta: Grid) -> Panel {
    Panel { name: name.into(), meter, j_list: j, lambda: Grid::single(WEAK), theta }
}

fn qfi_columns() -> Vec<Quantity> {
    vec![Quantity::P, Quantity::ITn2, Quantity::Iparn2, Quantity::Iperpn2, Quantity::Tn2]
}

/// Preset `fig<id>` with its default resolution.
pub fn figure_preset(id: u8) -> Result<SweepConfig> {
    let p = |d| MeterSpec::pancharatnam(d, 1);
    let s = |d| MeterSpec::symmetric(d, 1);
    let (panels, outputs) = match id {
        1 => {
            let lambda = Grid::log(WEAK, std::f64::consts::PI, 256);
            let theta = Grid::periodic(256);
            let j = spins(&[1, 2, 3]);
            (
                vec![
                    Panel { name: "top".into(), meter: p(30)?, j_list: j.clone(), lambda, theta },
                    Panel { name: "bottom".into(), meter: s(30)?, j_list: j, lambda, theta },
                ],
                vec![Quantity::P, Quantity::Tn2],
            )
        }
        2 => (
            vec![
                line("a", p(2)?, spins(&[1, 2, 3, 4]), Grid::linear(-std::f64::consts::PI, std::f64::consts::PI, 2001)),
                line("b", p(2)?, spins(&[1, 2, 3, 4]), Grid::linear(-4e-3, 6e-3, 2001)),
            ],
            qfi_columns(),
        ),
        3 => {
            let theta = Grid::linear(-3e-3, 4e-3, 2001);
            (vec![line("a", p(2)?, spins(&[1]), theta), line("b", s(2)?, spins(&[1]), theta)], qfi_columns())
        }
        4 => {
            let theta = Grid::linear(-1e-2, 4e-2, 4001);
            let mut panels = vec![line("a", p(30)?, spins(&[1]), theta)];
            for d in [2usize, 5, 10, 30] {
                panels.push(line(&format!("b_d{d}"), p(d)?, spins(&[1]), theta));
            }
            for d in [2usize, 5, 10, 30] {
                panels.push(line(&format!("c_d{d}"), s(d)?, spins(&[1]), theta));
            }
            (panels, qfi_columns())
        }
        5 => {
            let theta = Grid::linear(-1e-2, 4e-2, 4001);
            (
                vec![line("pancharatnam", p(30)?, spins(&[1]), theta), line("symmetric", s(30)?, spins(&[1]), theta)],
                vec![Quantity::P, Quantity::Iperpn2, Quantity::Iparn2, Quantity::Tn2, Quantity::Dlambda, Quantity::Snr],
            )
        }
        6 => (
            vec![line("a", MeterSpec::fractional(10_000, 1, 1e-4)?, spins(&[1]), Grid::linear(0.0, 2e-3, 2001))],
            qfi_columns(),
        ),
        other => return Err(Error::Config(format!("no figure preset {other}; expected 1..6"))),
    };
    Ok(SweepConfig { preset: Some(format!("fig{id}")), panels, outputs, trials: EstimationBudget::default() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for id in FIGURE_IDS {
            let c = figure_preset(id).unwrap();
            c.validate().unwrap();
            assert_eq!(c.preset.as_deref(), Some(format!("fig{id}").as_str()));
        }
        assert!(figure_preset(7).is_err());
        assert_eq!(figure_preset(1).unwrap().total_points(), 6 * 256 * 256);
    }
}
