//! Deterministic one-dimensional search over a periodic phase.
//!
//! A uniform coarse grid on `[0, 2 pi)` picks candidate basins (the best local
//! maxima plus any caller-supplied seeds). Each candidate is narrowed by
//! repeated zoom grids and finished with golden-section search. Zoom grids
//! matter for landscapes whose peaks are far narrower than the coarse
//! spacing. Among the refined candidates the largest value wins; values
//! within a relative tie tolerance (of the larger of the values and the
//! landscape's range) go to the smallest phase in `[0, 2 pi)`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::meter::principal;
use crate::par::{map_range, Execution};
use crate::tolerance::{P_FLOOR, THETA_TOL, TIE_REL};

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub grid: usize,
    pub zoom_points: usize,
    /// Coarse-grid local maxima refined in addition to the seeds.
    pub candidates: usize,
    /// Zooming stops once the bracket half-width is below this.
    pub zoom_floor: f64,
    pub tol: f64,
    pub tie_rel: f64,
    pub exec: Execution,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            grid: 4096,
            zoom_points: 64,
            candidates: 4,
            zoom_floor: 1e-9,
            tol: THETA_TOL,
            tie_rel: TIE_REL,
            exec: Execution::Parallel,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Optimum {
    /// In `(-pi, pi]`.
    pub theta: f64,
    pub value: f64,
}

/// Maximize `f` over the circle. `f` returns `None` where it is undefined.
pub fn maximize_periodic<F>(f: F, seeds: &[f64], opts: &SearchOptions) -> Result<Optimum>
where
    F: Fn(f64) -> Option<f64> + Sync + Send,
{
    let n = opts.grid.max(8);
    let step = TAU / n as f64;
    let grid = map_range(opts.exec, n, |i| f(i as f64 * step));

    let seed_vals: Vec<(f64, Option<f64>)> = seeds.iter().map(|&s| (s, f(s))).collect();
    let defined = grid.iter().flatten().chain(seed_vals.iter().filter_map(|s| s.1.as_ref()));
    let (lo, hi) = defined.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !hi.is_finite() {
        return Err(Error::VanishingPostselection { p: 0.0, floor: P_FLOOR });
    }
    if hi - lo <= 1e-12 * hi.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::FlatLandscape("objective is constant over the search grid"));
    }

    let value = |i: usize| grid[i % n].unwrap_or(f64::NEG_INFINITY);
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&i| {
            let v = value(i);
            v.is_finite() && v >= value(i + n - 1) && v >= value(i + 1)
        })
        .collect();
    peaks.sort_by(|&a, &b| value(b).total_cmp(&value(a)).then(a.cmp(&b)));
    peaks.truncate(opts.candidates.max(1));

    let starts =
        peaks.into_iter().map(|i| i as f64 * step).chain(seed_vals.iter().filter(|s| s.1.is_some()).map(|s| s.0));

    let mut best: Option<Optimum> = None;
    for c in starts {
        let cand = refine(&f, c, step, opts);
        best = Some(match best {
            None => cand,
            Some(b) => pick(b, cand, opts.tie_rel * (hi - lo).max(b.value.abs()).max(cand.value.abs())),
        });
    }
    let best = best.expect("at least one defined grid point");
    Ok(Optimum { theta: principal(best.theta), value: best.value })
}

/// Minimize `f` over the circle.
pub fn minimize_periodic<F>(f: F, seeds: &[f64], opts: &SearchOptions) -> Result<Optimum>
where
    F: Fn(f64) -> Option<f64> + Sync + Send,
{
    let o = maximize_periodic(|t| f(t).map(|v| -v), seeds, opts)?;
    Ok(Optimum { theta: o.theta, value: -o.value })
}

fn pick(a: Optimum, b: Optimum, tie: f64) -> Optimum {
    if (a.value - b.value).abs() <= tie {
        if b.theta.rem_euclid(TAU) < a.theta.rem_euclid(TAU) {
            b
        } else {
            a
        }
    } else if b.value > a.value {
        b
    } else {
        a
    }
}

fn refine<F>(f: &F, mut center: f64, mut half: f64, opts: &SearchOptions) -> Optimum
where
    F: Fn(f64) -> Option<f64> + Sync + Send,
{
    let eval = |t: f64| f(t).unwrap_or(f64::NEG_INFINITY);
    let m = opts.zoom_points.max(4);
    let mut center_val = eval(center);
    while half > opts.zoom_floor {
        let h = 2.0 * half / m as f64;
        let lo = center - half;
        let vals = map_range(opts.exec, m + 1, |i| eval(lo + i as f64 * h));
        let (bi, bv) = vals
            .iter()
            .enumerate()
            .fold((m / 2, center_val), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
        center = lo + bi as f64 * h;
        center_val = bv;
        half = h;
    }
    let (t, v) = golden(&eval, center - half, center + half, opts.tol);
    if v >= center_val {
        Optimum { theta: t, value: v }
    } else {
        Optimum { theta: center, value: center_val }
    }
}

fn golden<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}
