//! Multi-start coordinate ascent over breakpoint positions, and audits of the
//! stability statements around the Davie-Reeds optimum.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::davie_reeds::{constants, f_objective};
use crate::error::{Error, Result};
use crate::game::{dr_game, val_1d, GameCoefficients};
use crate::numfmt::format_17;
use crate::special::{find_root, Phi};
use crate::strip::{l2_distance, IntervalUnion, Piecewise, SignFunction1D};

/// Breakpoints are confined to `[-BP_RANGE, BP_RANGE]`; one that reaches the
/// boundary leaves the function.
pub const BP_RANGE: f64 = 8.0;
const GRID_INTERVALS: usize = 20;
const MAX_SWEEPS: usize = 300;
const COINCIDENT: f64 = 1e-12;
/// Rounding noise of `val_1d`; added to measured deficits before they feed a
/// fourth root.
pub const VALUE_NOISE_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub max_breakpoints_per_function: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Width at which a golden-section line search stops.
    pub step_tolerance: f64,
    /// A sweep gaining less than this ends the restart.
    pub value_tolerance: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            max_breakpoints_per_function: 6,
            restarts: 40,
            seed: 1,
            step_tolerance: 1e-10,
            value_tolerance: 1e-14,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be at least 1".into()));
        }
        if !(self.step_tolerance > 0.0 && self.value_tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartOutcome {
    pub restart: usize,
    pub f: SignFunction1D,
    pub g: SignFunction1D,
    pub val: f64,
    /// `(sweep, value)` after each sweep, starting from the random start.
    pub trace: Vec<(usize, f64)>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub best_f: SignFunction1D,
    pub best_g: SignFunction1D,
    pub best_val: f64,
    pub best_restart: usize,
    pub trace: Vec<(usize, f64)>,
    pub converged: bool,
    pub outcomes: Vec<RestartOutcome>,
}

impl SearchResult {
    /// CSV `restart,iteration,val` over all restarts.
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "restart,iteration,val")?;
        for o in &self.outcomes {
            for &(it, v) in &o.trace {
                writeln!(out, "{},{},{}", o.restart, it, format_17(v))?;
            }
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, cfg: &SearchConfig, game: &GameCoefficients, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Doc<'a> {
            config: &'a SearchConfig,
            game: &'a GameCoefficients,
            best_val: f64,
            best_restart: usize,
            converged: bool,
            best_f: &'a SignFunction1D,
            best_g: &'a SignFunction1D,
            restart_values: Vec<f64>,
        }
        let doc = Doc {
            config: cfg,
            game,
            best_val: self.best_val,
            best_restart: self.best_restart,
            converged: self.converged,
            best_f: &self.best_f,
            best_g: &self.best_g,
            restart_values: self.outcomes.iter().map(|o| o.val).collect(),
        };
        serde_json::to_writer_pretty(out, &doc)?;
        Ok(())
    }
}

/// Sign function with the given breakpoints (duplicates annihilate) and the
/// parts beyond `±BP_RANGE` pushed to infinity.
fn canonical(leading: i8, mut bps: Vec<f64>) -> SignFunction1D {
    bps.sort_by(f64::total_cmp);
    let values: Vec<f64> = (0..=bps.len())
        .map(|i| if i % 2 == 0 { f64::from(leading) } else { -f64::from(leading) })
        .collect();
    let f = SignFunction1D::from_cells(&bps, &values).expect("sorted finite breakpoints");
    let mut leading = f.leading_sign();
    let inner: Vec<f64> = f
        .breakpoints()
        .iter()
        .copied()
        .filter(|&t| {
            if t <= -BP_RANGE {
                leading = -leading;
                false
            } else {
                t < BP_RANGE
            }
        })
        .collect();
    SignFunction1D::new(leading, inner).expect("canonical breakpoints")
}

fn with_breakpoint(f: &SignFunction1D, i: usize, t: f64) -> SignFunction1D {
    let mut bps = f.breakpoints().to_vec();
    bps[i] = t;
    canonical(f.leading_sign(), bps)
}

fn cell_around(bps: &[f64], i: usize) -> (f64, f64) {
    let lo = if i == 0 { -BP_RANGE } else { bps[i - 1] };
    let hi = bps.get(i + 1).copied().unwrap_or(BP_RANGE);
    (lo, hi)
}

/// Grid scan followed by golden-section refinement around the best grid
/// point. Returns the best point found if it beats `current`.
fn line_search(obj: impl Fn(f64) -> f64, lo: f64, hi: f64, current: f64, tol: f64) -> Option<(f64, f64)> {
    if hi - lo <= 0.0 {
        return None;
    }
    let grid: Vec<(f64, f64)> = (0..=GRID_INTERVALS)
        .map(|j| {
            let t = if j == GRID_INTERVALS { hi } else { lo + (hi - lo) * j as f64 / GRID_INTERVALS as f64 };
            (t, obj(t))
        })
        .collect();
    let (jbest, &(mut t_best, mut v_best)) = grid
        .iter()
        .enumerate()
        .fold(None, |acc: Option<(usize, &(f64, f64))>, (j, p)| match acc {
            Some((_, q)) if q.1 >= p.1 => acc,
            _ => Some((j, p)),
        })
        .expect("non-empty grid");
    let mut a = grid[jbest.saturating_sub(1)].0;
    let mut b = grid[(jbest + 1).min(GRID_INTERVALS)].0;
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (obj(x1), obj(x2));
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = obj(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = obj(x2);
        }
    }
    for (t, v) in [(x1, f1), (x2, f2)] {
        if v > v_best {
            t_best = t;
            v_best = v;
        }
    }
    (v_best > current).then_some((t_best, v_best))
}

fn random_function(rng: &mut ChaCha8Rng, max_bp: usize) -> SignFunction1D {
    let n = if max_bp == 0 { 0 } else { rng.random_range(1..=max_bp) };
    let bps: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            z.clamp(-(BP_RANGE - 0.5), BP_RANGE - 0.5)
        })
        .collect();
    let leading = if rng.random_bool(0.5) { 1 } else { -1 };
    canonical(leading, bps)
}

struct Ascent<'a> {
    game: &'a GameCoefficients,
    cap: usize,
    tol: f64,
}

impl Ascent<'_> {
    fn val(&self, f: &SignFunction1D, g: &SignFunction1D) -> f64 {
        val_1d(self.game, f, g, self.cap).expect("degree cap covers the game")
    }

    /// Line search on each breakpoint of `f` with `g` held fixed (or the
    /// other way round when `swap`).
    fn sweep_one(&self, f: &mut SignFunction1D, g: &SignFunction1D, val: &mut f64, swap: bool) {
        let mut i = 0;
        while i < f.breakpoints().len() {
            let (lo, hi) = cell_around(f.breakpoints(), i);
            let eval = |t: f64| {
                let cand = with_breakpoint(f, i, t);
                if swap {
                    self.val(g, &cand)
                } else {
                    self.val(&cand, g)
                }
            };
            if let Some((t, v)) = line_search(eval, lo, hi, *val, self.tol) {
                *f = with_breakpoint(f, i, t);
                *val = v;
            }
            i += 1;
        }
    }

    /// Moves coincident breakpoints of `f` and `g` together.
    fn sweep_joint(&self, f: &mut SignFunction1D, g: &mut SignFunction1D, val: &mut f64) {
        let mut i = 0;
        while i < f.breakpoints().len() {
            let t0 = f.breakpoints()[i];
            if let Some(j) = g.breakpoints().iter().position(|&s| (s - t0).abs() <= COINCIDENT) {
                let (lf, hf) = cell_around(f.breakpoints(), i);
                let (lg, hg) = cell_around(g.breakpoints(), j);
                let (lo, hi) = (lf.max(lg), hf.min(hg));
                let eval = |t: f64| self.val(&with_breakpoint(f, i, t), &with_breakpoint(g, j, t));
                if let Some((t, v)) = line_search(eval, lo, hi, *val, self.tol) {
                    *f = with_breakpoint(f, i, t);
                    *g = with_breakpoint(g, j, t);
                    *val = v;
                }
            }
            i += 1;
        }
    }

    fn sweep_signs(&self, f: &mut SignFunction1D, g: &mut SignFunction1D, val: &mut f64) {
        let nf = f.negate();
        let v = self.val(&nf, g);
        if v > *val {
            *f = nf;
            *val = v;
        }
        let ng = g.negate();
        let v = self.val(f, &ng);
        if v > *val {
            *g = ng;
            *val = v;
        }
    }
}

fn run_restart(game: &GameCoefficients, cfg: &SearchConfig, restart: usize) -> RestartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);
    let mut f = random_function(&mut rng, cfg.max_breakpoints_per_function);
    let mut g = random_function(&mut rng, cfg.max_breakpoints_per_function);
    let ascent = Ascent { game, cap: game.max_explicit_degree(), tol: cfg.step_tolerance };
    let mut val = ascent.val(&f, &g);
    let mut trace = vec![(0, val)];
    let mut converged = false;
    for sweep in 1..=MAX_SWEEPS {
        let before = val;
        ascent.sweep_signs(&mut f, &mut g, &mut val);
        ascent.sweep_one(&mut f, &g, &mut val, false);
        ascent.sweep_one(&mut g, &f, &mut val, true);
        ascent.sweep_joint(&mut f, &mut g, &mut val);
        trace.push((sweep, val));
        if val - before < cfg.value_tolerance {
            converged = true;
            break;
        }
    }
    RestartOutcome { restart, f, g, val, trace, converged }
}

/// Best pair over independent restarts; identical for any thread count.
pub fn optimize(game: &GameCoefficients, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let outcomes: Vec<RestartOutcome> = (0..cfg.restarts).into_par_iter().map(|r| run_restart(game, cfg, r)).collect();
    let best = outcomes
        .iter()
        .fold(&outcomes[0], |acc, o| if o.val > acc.val { o } else { acc })
        .clone();
    Ok(SearchResult {
        best_f: best.f,
        best_g: best.g,
        best_val: best.val,
        best_restart: best.restart,
        trace: best.trace,
        converged: best.converged,
        outcomes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityAudit {
    /// Deficit `val_dr - val(f, g)` measured on the pair, plus the rounding floor.
    pub eta: f64,
    pub dist_f: f64,
    pub dist_g: f64,
    pub bound: f64,
    pub f_dr: SignFunction1D,
    pub g_dr: SignFunction1D,
    pub passed: bool,
}

/// Builds the strip pair that the robustness argument associates with
/// `(f, g)` and measures how far the inputs are from it.
///
/// The deficit is measured here; `eta` is only checked against it.
pub fn stability_audit(f: &SignFunction1D, g: &SignFunction1D, eta: f64) -> Result<StabilityAudit> {
    let k = constants();
    let c = k.c_star;
    let deficit = (k.val_dr - val_1d(&dr_game(), f, g, 1)?).max(0.0);
    if deficit > eta + VALUE_NOISE_FLOOR {
        return Err(Error::DeficitExceedsEta { deficit, eta });
    }
    let eta_eff = deficit + VALUE_NOISE_FLOOR;

    // S = {f = g}, split by the sign of sign(x)·f on it. The smaller half by
    // E|X| mass is S₋; if that is the positive half, negate both functions.
    let agree = crate::strip::agreement_set(f, g);
    let positive = f.positive_set();
    let right = IntervalUnion::new(vec![(0.0, f64::INFINITY)])?;
    let same_as_sign = positive.intersection(&right).union(&positive.complement().intersection(&right.complement()));
    let s_plus = agree.intersection(&same_as_sign);
    let s_minus = agree.difference(&same_as_sign);
    let flip = s_plus.abs_x_mass() < s_minus.abs_x_mass();
    let (f0, g0) = if flip { (f.negate(), g.negate()) } else { (f.clone(), g.clone()) };

    let mut pts: Vec<f64> = f0.breakpoints().iter().chain(g0.breakpoints()).copied().collect();
    pts.extend([-c, c]);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend(&pts);
    edges.push(f64::INFINITY);
    let (mut fv, mut gv) = (Vec::new(), Vec::new());
    for w in edges.windows(2) {
        let x = match (w[0].is_finite(), w[1].is_finite()) {
            (true, true) => 0.5 * (w[0] + w[1]),
            (true, false) => w[0] + 1.0,
            (false, true) => w[1] - 1.0,
            (false, false) => 0.0,
        };
        let (a, b) = (f0.value_at(x), g0.value_at(x));
        if x.abs() >= c {
            fv.push(x.signum());
            gv.push(x.signum());
        } else if a == b {
            fv.push(-a);
            gv.push(b);
        } else {
            fv.push(a);
            gv.push(b);
        }
    }
    let f_dr = SignFunction1D::from_cells(&pts, &fv)?;
    let g_dr = SignFunction1D::from_cells(&pts, &gv)?;
    let dist_f = l2_distance(&f0, &f_dr);
    let dist_g = l2_distance(&g0, &g_dr);
    let bound = 6.0 * eta_eff.powf(0.25);
    let (f_dr, g_dr) = if flip { (f_dr.negate(), g_dr.negate()) } else { (f_dr, g_dr) };
    Ok(StabilityAudit { eta: eta_eff, dist_f, dist_g, bound, f_dr, g_dr, passed: dist_f <= bound && dist_g <= bound })
}

/// Allowance for rounding in the bathtub comparison.
pub const BATHTUB_ROUNDING: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BathtubReport {
    /// `C` with `2Φ(-C) = γ(S)`.
    pub c: f64,
    pub eps: f64,
    pub sym_diff: f64,
    pub bound: f64,
    pub passed: bool,
}

/// Compares `S` with the symmetric tail set of equal Gaussian measure.
pub fn bathtub_check(s: &IntervalUnion) -> Result<BathtubReport> {
    let m = s.gaussian_measure();
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::InvalidParameter(format!("set measure must lie in (0, 1), got {m}")));
    }
    let c = find_root(|c| 2.0 * Phi(-c) - m, 0.0, crate::special::TAIL_CUTOFF, 1e-15)?;
    let tails = IntervalUnion::abs_at_least(c);
    let eps = 2.0 * crate::special::phi(c) - s.abs_x_mass();
    let sym_diff = s.symmetric_difference(&tails).gaussian_measure();
    let bound = 4.0 * eps.max(0.0).sqrt();
    Ok(BathtubReport {
        c,
        eps,
        sym_diff,
        bound,
        passed: eps >= -BATHTUB_ROUNDING && sym_diff <= bound + BATHTUB_ROUNDING,
    })
}

pub const CALCULUS_GRID_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalculusRow {
    pub eta: f64,
    /// Largest `|C - C*|` over grid points with `F(C) ≥ F(C*) - eta`.
    pub worst_distance: f64,
    pub bound: f64,
    pub qualifying: usize,
    pub passed: bool,
}

/// Scans `F` on a `1e-5` grid of `[0, 1]` (plus `C*` itself) and checks the
/// superlevel sets against `3√η`.
pub fn calculus_stability_scan(eta_grid: &[f64]) -> Result<Vec<CalculusRow>> {
    if let Some(&eta) = eta_grid.iter().find(|&&e| !(0.0..0.01).contains(&e)) {
        return Err(Error::InvalidParameter(format!("eta must lie in [0, 0.01), got {eta}")));
    }
    let k = constants();
    let steps = (1.0 / CALCULUS_GRID_STEP).round() as usize;
    let mut grid: Vec<(f64, f64)> = (0..=steps)
        .map(|i| {
            let c = i as f64 * CALCULUS_GRID_STEP;
            (c, f_objective(c, k.lambda_star))
        })
        .collect();
    grid.push((k.c_star, k.val_dr));
    Ok(eta_grid
        .iter()
        .map(|&eta| {
            let level = k.val_dr - eta;
            let (worst, count) = grid
                .iter()
                .filter(|(_, v)| *v >= level)
                .fold((0.0f64, 0usize), |(w, n), (c, _)| (w.max((c - k.c_star).abs()), n + 1));
            let bound = 3.0 * eta.sqrt();
            CalculusRow { eta, worst_distance: worst, bound, qualifying: count, passed: worst <= bound }
        })
        .collect())
}
