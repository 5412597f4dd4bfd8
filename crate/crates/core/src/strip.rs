//! One-dimensional piecewise-constant functions, their exact Hermite moments,
//! Gaussian interval sets, and the strip-function optimisers of the
//! Davie-Reeds game.
//!
//! In one dimension the degree-`k` Hermite projection of `f` is rank one:
//! `Π_k f = (E[f He_k] / k!) He_k`. Everything below is built on the exact
//! moment `E[f He_k]`, which for a step function is a finite sum of jump
//! terms `(v_right - v_left) He_{k-1}(t) φ(t)` over its breakpoints.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{factorial, hermite_table, hermite_unchecked, normal_mass, phi, MAX_HERMITE_DEGREE};

/// Cells shorter than this are treated as empty when validating supports.
const SUPPORT_TOL: f64 = 1e-12;
/// Balance residual below which a pattern is accepted as already balanced.
const BALANCE_TOL: f64 = 1e-13;

/// A function that is constant on the open cells between sorted breakpoints.
/// Cell `i` is `(t_{i-1}, t_i)` with `t_{-1} = -∞` and `t_n = +∞`.
pub trait Piecewise {
    fn breakpoints(&self) -> &[f64];
    fn cell_value(&self, i: usize) -> f64;

    fn num_cells(&self) -> usize {
        self.breakpoints().len() + 1
    }

    /// Value at `x`; at a breakpoint the right-hand cell wins.
    fn value_at(&self, x: f64) -> f64 {
        let i = self.breakpoints().partition_point(|&t| t <= x);
        self.cell_value(i)
    }

    fn cell_bounds(&self, i: usize) -> (f64, f64) {
        let bps = self.breakpoints();
        let lo = if i == 0 { f64::NEG_INFINITY } else { bps[i - 1] };
        let hi = if i == bps.len() { f64::INFINITY } else { bps[i] };
        (lo, hi)
    }
}

fn validate_breakpoints(bps: &[f64]) -> Result<()> {
    if let Some(x) = bps.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidFunction(format!("breakpoint {x} is not finite")));
    }
    if let Some(w) = bps.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidFunction(format!(
            "breakpoints must be strictly increasing ({} >= {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// A ±1-valued step function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SignFunctionRepr", into = "SignFunctionRepr")]
pub struct SignFunction1D {
    leading_sign: i8,
    breakpoints: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SignFunctionRepr {
    leading_sign: i8,
    breakpoints: Vec<f64>,
}

impl TryFrom<SignFunctionRepr> for SignFunction1D {
    type Error = Error;
    fn try_from(r: SignFunctionRepr) -> Result<Self> {
        SignFunction1D::new(r.leading_sign, r.breakpoints)
    }
}

impl From<SignFunction1D> for SignFunctionRepr {
    fn from(f: SignFunction1D) -> Self {
        SignFunctionRepr { leading_sign: f.leading_sign, breakpoints: f.breakpoints }
    }
}

impl SignFunction1D {
    pub fn new(leading_sign: i8, breakpoints: Vec<f64>) -> Result<Self> {
        if leading_sign != 1 && leading_sign != -1 {
            return Err(Error::InvalidFunction(format!("leading sign must be ±1, got {leading_sign}")));
        }
        validate_breakpoints(&breakpoints)?;
        Ok(Self { leading_sign, breakpoints })
    }

    pub fn constant(sign: i8) -> Result<Self> {
        Self::new(sign, Vec::new())
    }

    /// `sign(x)`.
    pub fn sign() -> Self {
        Self { leading_sign: -1, breakpoints: vec![0.0] }
    }

    /// Canonical sign function from raw cells: empty cells are dropped and
    /// equal neighbours merged, so coincident breakpoints annihilate.
    pub fn from_cells(breakpoints: &[f64], values: &[f64]) -> Result<Self> {
        let (bps, vals) = canonical_cells(breakpoints, values)?;
        if let Some(v) = vals.iter().find(|v| v.abs() != 1.0) {
            return Err(Error::InvalidFunction(format!("sign function value {v} is not ±1")));
        }
        Ok(Self { leading_sign: vals[0] as i8, breakpoints: bps })
    }

    pub fn leading_sign(&self) -> i8 {
        self.leading_sign
    }

    /// `x ↦ f(-x)`.
    pub fn reflect(&self) -> Self {
        let n = self.breakpoints.len();
        let trailing = if n.is_multiple_of(2) { self.leading_sign } else { -self.leading_sign };
        Self {
            leading_sign: trailing,
            breakpoints: self.breakpoints.iter().rev().map(|t| -t).collect(),
        }
    }

    pub fn negate(&self) -> Self {
        Self { leading_sign: -self.leading_sign, breakpoints: self.breakpoints.clone() }
    }

    pub fn to_step(&self) -> StepFunction1D {
        StepFunction1D {
            breakpoints: self.breakpoints.clone(),
            values: (0..self.num_cells()).map(|i| self.cell_value(i)).collect(),
        }
    }

    /// `{x : f(x) = +1}`.
    pub fn positive_set(&self) -> IntervalUnion {
        let intervals = (0..self.num_cells())
            .filter(|&i| self.cell_value(i) > 0.0)
            .map(|i| self.cell_bounds(i))
            .collect();
        IntervalUnion { intervals }
    }
}

impl Piecewise for SignFunction1D {
    fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
    fn cell_value(&self, i: usize) -> f64 {
        if i.is_multiple_of(2) {
            f64::from(self.leading_sign)
        } else {
            -f64::from(self.leading_sign)
        }
    }
}

/// A step function with values in `{-1, 0, +1}`; houses strip restrictions
/// such as `h = f·1_{|x| ≤ C*}` and `u = sign(x)·1_{|x| ≥ C*}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepFunctionRepr", into = "StepFunctionRepr")]
pub struct StepFunction1D {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct StepFunctionRepr {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<StepFunctionRepr> for StepFunction1D {
    type Error = Error;
    fn try_from(r: StepFunctionRepr) -> Result<Self> {
        StepFunction1D::new(r.breakpoints, r.values)
    }
}

impl From<StepFunction1D> for StepFunctionRepr {
    fn from(f: StepFunction1D) -> Self {
        StepFunctionRepr { breakpoints: f.breakpoints, values: f.values }
    }
}

impl StepFunction1D {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate_breakpoints(&breakpoints)?;
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidFunction(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !matches!(**v, -1.0 | 0.0 | 1.0)) {
            return Err(Error::InvalidFunction(format!("value {v} is not in {{-1, 0, 1}}")));
        }
        if values.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidFunction("adjacent cells must differ".into()));
        }
        Ok(Self { breakpoints, values })
    }

    /// Canonical step function from raw cells (empty cells dropped, equal
    /// neighbours merged).
    pub fn from_cells(breakpoints: &[f64], values: &[f64]) -> Result<Self> {
        let (bps, vals) = canonical_cells(breakpoints, values)?;
        Self::new(bps, vals)
    }

    /// `u(x) = sign(x)·1_{|x| ≥ c}`.
    pub fn strip_complement_sign(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("strip half-width must be positive, got {c}")));
        }
        Self::new(vec![-c, c], vec![-1.0, 0.0, 1.0])
    }

    /// `v` on `(-c, c)` and zero elsewhere.
    pub fn strip_constant(c: f64, v: f64) -> Result<Self> {
        Self::new(vec![-c, c], vec![0.0, v, 0.0])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn reflect(&self) -> Self {
        Self {
            breakpoints: self.breakpoints.iter().rev().map(|t| -t).collect(),
            values: self.values.iter().rev().copied().collect(),
        }
    }
}

impl Piecewise for StepFunction1D {
    fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
    fn cell_value(&self, i: usize) -> f64 {
        self.values[i]
    }
}

fn canonical_cells(breakpoints: &[f64], values: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if values.len() != breakpoints.len() + 1 {
        return Err(Error::InvalidFunction(format!(
            "{} breakpoints need {} values, got {}",
            breakpoints.len(),
            breakpoints.len() + 1,
            values.len()
        )));
    }
    if breakpoints.iter().any(|t| !t.is_finite()) || breakpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidFunction("breakpoints must be finite and non-decreasing".into()));
    }
    let mut bps: Vec<f64> = Vec::with_capacity(breakpoints.len());
    let mut vals = vec![values[0]];
    for (i, &t) in breakpoints.iter().enumerate() {
        let next = values[i + 1];
        let hi = breakpoints.get(i + 1).copied().unwrap_or(f64::INFINITY);
        if hi <= t {
            // cell i+1 is empty
            continue;
        }
        if *vals.last().expect("non-empty") == next {
            continue;
        }
        bps.push(t);
        vals.push(next);
    }
    Ok((bps, vals))
}

/// Point strictly inside `(lo, hi)`, usable for membership tests.
fn representative(lo: f64, hi: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + 1.0,
        (false, true) => hi - 1.0,
        (false, false) => 0.0,
    }
}

/// Open cells of the common refinement of several breakpoint lists.
fn merged_cells(lists: &[&[f64]]) -> Vec<(f64, f64)> {
    let mut pts: Vec<f64> = lists.iter().flat_map(|l| l.iter().copied()).filter(|t| t.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut edges = Vec::with_capacity(pts.len() + 2);
    edges.push(f64::NEG_INFINITY);
    edges.extend(pts);
    edges.push(f64::INFINITY);
    edges.windows(2).map(|w| (w[0], w[1])).collect()
}

fn check_degree(k: usize) -> Result<()> {
    if k > MAX_HERMITE_DEGREE {
        Err(Error::DegreeAboveCap { degree: k, max: MAX_HERMITE_DEGREE })
    } else {
        Ok(())
    }
}

fn moment_raw(breakpoints: &[f64], values: &[f64], k: usize) -> f64 {
    if k == 0 {
        return (0..values.len())
            .map(|i| {
                let lo = if i == 0 { f64::NEG_INFINITY } else { breakpoints[i - 1] };
                let hi = breakpoints.get(i).copied().unwrap_or(f64::INFINITY);
                if hi > lo {
                    values[i] * normal_mass(lo, hi)
                } else {
                    0.0
                }
            })
            .sum();
    }
    breakpoints
        .iter()
        .enumerate()
        .map(|(j, &t)| (values[j + 1] - values[j]) * hermite_unchecked(k - 1, t) * phi(t))
        .sum()
}

fn cell_values<P: Piecewise + ?Sized>(f: &P) -> Vec<f64> {
    (0..f.num_cells()).map(|i| f.cell_value(i)).collect()
}

/// `E[He_k(X) f(X)]` for `X ~ N(0, 1)`, exact up to rounding.
pub fn moment<P: Piecewise + ?Sized>(f: &P, k: usize) -> Result<f64> {
    check_degree(k)?;
    Ok(moment_raw(f.breakpoints(), &cell_values(f), k))
}

/// `E[He_k f]` for every `k ≤ kmax`.
pub fn moments_upto<P: Piecewise + ?Sized>(f: &P, kmax: usize) -> Result<Vec<f64>> {
    check_degree(kmax)?;
    let mut out = vec![0.0; kmax + 1];
    out[0] = moment_raw(f.breakpoints(), &cell_values(f), 0);
    if kmax == 0 {
        return Ok(out);
    }
    let bps = f.breakpoints();
    for (j, &t) in bps.iter().enumerate() {
        let jump = (f.cell_value(j + 1) - f.cell_value(j)) * phi(t);
        let table = hermite_table(kmax - 1, t)?;
        for k in 1..=kmax {
            out[k] += jump * table[k - 1];
        }
    }
    Ok(out)
}

/// `⟨Π_k f, Π_k g⟩ = E[f He_k] E[g He_k] / k!` for univariate functions.
pub fn pi_k_inner<P: Piecewise + ?Sized, Q: Piecewise + ?Sized>(f: &P, g: &Q, k: usize) -> Result<f64> {
    Ok(moment(f, k)? * moment(g, k)? / factorial(k))
}

/// `E[f g]` from the exact cell overlap.
pub fn overlap<P: Piecewise + ?Sized, Q: Piecewise + ?Sized>(f: &P, g: &Q) -> f64 {
    merged_cells(&[f.breakpoints(), g.breakpoints()])
        .into_iter()
        .map(|(lo, hi)| {
            let x = representative(lo, hi);
            f.value_at(x) * g.value_at(x) * normal_mass(lo, hi)
        })
        .sum()
}

/// `‖f - g‖₂` under the Gaussian measure.
pub fn l2_distance<P: Piecewise + ?Sized, Q: Piecewise + ?Sized>(f: &P, g: &Q) -> f64 {
    merged_cells(&[f.breakpoints(), g.breakpoints()])
        .into_iter()
        .map(|(lo, hi)| {
            let x = representative(lo, hi);
            (f.value_at(x) - g.value_at(x)).powi(2) * normal_mass(lo, hi)
        })
        .sum::<f64>()
        .sqrt()
}

/// Gaussian measure of `{f ≠ g}`.
pub fn disagreement_measure<P: Piecewise + ?Sized, Q: Piecewise + ?Sized>(f: &P, g: &Q) -> f64 {
    merged_cells(&[f.breakpoints(), g.breakpoints()])
        .into_iter()
        .filter(|&(lo, hi)| {
            let x = representative(lo, hi);
            f.value_at(x) != g.value_at(x)
        })
        .map(|(lo, hi)| normal_mass(lo, hi))
        .sum()
}

/// `{x : f(x) = g(x)}`.
pub fn agreement_set(f: &SignFunction1D, g: &SignFunction1D) -> IntervalUnion {
    let intervals = merged_cells(&[f.breakpoints(), g.breakpoints()])
        .into_iter()
        .filter(|&(lo, hi)| {
            let x = representative(lo, hi);
            f.value_at(x) == g.value_at(x)
        })
        .collect();
    IntervalUnion::from_sorted_cells(intervals)
}

/// `h = f·1_{|x| ≤ c}`.
pub fn strip_restriction(f: &SignFunction1D, c: f64) -> Result<StepFunction1D> {
    let cells = merged_cells(&[f.breakpoints(), &[-c, c]]);
    let bps: Vec<f64> = cells.iter().skip(1).map(|&(lo, _)| lo).collect();
    let vals: Vec<f64> = cells
        .iter()
        .map(|&(lo, hi)| {
            let x = representative(lo, hi);
            if x.abs() < c {
                f.value_at(x)
            } else {
                0.0
            }
        })
        .collect();
    StepFunction1D::from_cells(&bps, &vals)
}

/// `(f, g) = (u + h, u - h)` with `u = sign(x)·1_{|x| ≥ c}`.
pub fn build_strip_pair(h: &StepFunction1D, c: f64) -> Result<(SignFunction1D, SignFunction1D)> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("strip half-width must be positive, got {c}")));
    }
    let cells = merged_cells(&[h.breakpoints(), &[-c, c]]);
    for &(lo, hi) in &cells {
        if hi - lo <= SUPPORT_TOL {
            continue;
        }
        let x = representative(lo, hi);
        let v = h.value_at(x);
        let inside = x.abs() < c;
        let (lo_in, hi_in) = (lo.max(-c), hi.min(c));
        let overlap_len = (hi_in - lo_in).max(0.0);
        if inside && v == 0.0 {
            return Err(Error::SupportViolation(format!("h vanishes on ({lo}, {hi}) inside the strip")));
        }
        if !inside && v != 0.0 && (hi - lo) - overlap_len > SUPPORT_TOL {
            return Err(Error::SupportViolation(format!("h = {v} on ({lo}, {hi}) outside the strip")));
        }
    }
    let bps: Vec<f64> = cells.iter().skip(1).map(|&(lo, _)| lo).collect();
    let u = |x: f64| if x >= c { 1.0 } else if x <= -c { -1.0 } else { 0.0 };
    let (mut fv, mut gv) = (Vec::with_capacity(cells.len()), Vec::with_capacity(cells.len()));
    for &(lo, hi) in &cells {
        let x = representative(lo, hi);
        let (uv, hv) = if hi - lo <= SUPPORT_TOL {
            // sliver from rounding at ±c: follow the sign outside, h inside
            let hv = h.value_at(x);
            if hv == 0.0 {
                (x.signum(), 0.0)
            } else {
                (0.0, hv)
            }
        } else {
            (u(x), h.value_at(x))
        };
        fv.push(uv + hv);
        gv.push(uv - hv);
    }
    Ok((SignFunction1D::from_cells(&bps, &fv)?, SignFunction1D::from_cells(&bps, &gv)?))
}

/// One breakpoint of a [`BalancedPattern`]: a fixed position or `scale·b` for
/// the shared unknown `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slot {
    Fixed(f64),
    Free { scale: f64 },
}

impl Slot {
    fn at(self, b: f64) -> f64 {
        match self {
            Slot::Fixed(x) => x,
            Slot::Free { scale } => scale * b,
        }
    }
    fn coefficients(self) -> (f64, f64) {
        match self {
            Slot::Fixed(x) => (0.0, x),
            Slot::Free { scale } => (scale, 0.0),
        }
    }
}

/// A strip-restricted step pattern with one unknown `b` that may appear in
/// several breakpoints (e.g. `±b` for symmetric patterns).
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedPattern {
    slots: Vec<Slot>,
    values: Vec<f64>,
    guess: f64,
}

impl BalancedPattern {
    pub fn new(slots: Vec<Slot>, values: Vec<f64>, guess: f64) -> Result<Self> {
        if values.len() != slots.len() + 1 {
            return Err(Error::InvalidFunction(format!(
                "{} slots need {} values, got {}",
                slots.len(),
                slots.len() + 1,
                values.len()
            )));
        }
        if !slots.iter().any(|s| matches!(s, Slot::Free { scale } if *scale != 0.0)) {
            return Err(Error::InvalidParameter("pattern has no free breakpoint".into()));
        }
        Ok(Self { slots, values, guess })
    }

    /// The symmetric pattern `-C*, -b, 0, b, C*` with inner signs `s, -s, s, -s`.
    pub fn symmetric_three_flip(c: f64, s: f64) -> Result<Self> {
        Self::new(
            vec![Slot::Fixed(-c), Slot::Free { scale: -1.0 }, Slot::Fixed(0.0), Slot::Free { scale: 1.0 }, Slot::Fixed(c)],
            vec![0.0, s, -s, s, -s, 0.0],
            0.5 * c,
        )
    }

    pub fn breakpoints_at(&self, b: f64) -> Vec<f64> {
        self.slots.iter().map(|s| s.at(b)).collect()
    }

    /// Range of `b` that keeps the breakpoints in non-decreasing order.
    pub fn feasible_range(&self) -> Result<(f64, f64)> {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for w in self.slots.windows(2) {
            let (s0, x0) = w[0].coefficients();
            let (s1, x1) = w[1].coefficients();
            // s0 b + x0 ≤ s1 b + x1
            let a = s0 - s1;
            let rhs = x1 - x0;
            if a > 0.0 {
                hi = hi.min(rhs / a);
            } else if a < 0.0 {
                lo = lo.max(rhs / a);
            } else if rhs < 0.0 {
                return Err(Error::InvalidFunction("fixed breakpoints are out of order".into()));
            }
        }
        let lo = lo.max(-crate::special::TAIL_CUTOFF);
        let hi = hi.min(crate::special::TAIL_CUTOFF);
        if lo > hi {
            return Err(Error::InvalidFunction("no ordering-compatible value for the free breakpoint".into()));
        }
        Ok((lo, hi))
    }

    /// `E[X h_b(X)]`.
    pub fn residual(&self, b: f64) -> f64 {
        moment_raw(&self.breakpoints_at(b), &self.values, 1)
    }

    pub fn instantiate(&self, b: f64) -> Result<StepFunction1D> {
        StepFunction1D::from_cells(&self.breakpoints_at(b), &self.values)
    }
}

const MONOTONE_SAMPLES: usize = 65;

/// The value of the free breakpoint that makes `E[X h(X)] = 0`.
pub fn solve_balanced_breakpoint(pattern: &BalancedPattern) -> Result<f64> {
    let (lo, hi) = pattern.feasible_range()?;
    if (lo..=hi).contains(&pattern.guess) && pattern.residual(pattern.guess).abs() <= BALANCE_TOL {
        return Ok(pattern.guess);
    }
    let samples: Vec<f64> = (0..MONOTONE_SAMPLES)
        .map(|i| pattern.residual(lo + (hi - lo) * i as f64 / (MONOTONE_SAMPLES - 1) as f64))
        .collect();
    let slack = 1e-15;
    let increasing = samples.windows(2).all(|w| w[1] >= w[0] - slack);
    let decreasing = samples.windows(2).all(|w| w[1] <= w[0] + slack);
    if !(increasing || decreasing) {
        return Err(Error::NotMonotone { lo, hi });
    }
    let (r_lo, r_hi) = (samples[0], samples[MONOTONE_SAMPLES - 1]);
    if !(r_lo * r_hi < 0.0) {
        return Err(Error::NoRootInCell { lo, hi });
    }
    crate::special::find_root(|b| pattern.residual(b), lo, hi, 1e-15)
}

/// Draws a balanced strip restriction `h` with at most `max_breakpoints`
/// interior breakpoints. One breakpoint is solved for balance; draws without
/// a monotone bracketed root are rejected.
pub fn random_balanced_h<R: Rng + ?Sized>(rng: &mut R, c: f64, max_breakpoints: usize) -> StepFunction1D {
    loop {
        let n = rng.random_range(0..=max_breakpoints);
        let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let mut interior: Vec<f64> = (0..n).map(|_| rng.random_range(-c..c)).collect();
        interior.sort_by(f64::total_cmp);
        let mut values = vec![0.0];
        values.extend((0..=n).map(|i| if i % 2 == 0 { s } else { -s }));
        values.push(0.0);
        if n == 0 {
            return StepFunction1D::strip_constant(c, s).expect("valid strip constant");
        }
        let free = rng.random_range(0..n);
        let guess = interior[free];
        let mut slots = vec![Slot::Fixed(-c)];
        slots.extend(interior.iter().enumerate().map(|(i, &t)| {
            if i == free {
                Slot::Free { scale: 1.0 }
            } else {
                Slot::Fixed(t)
            }
        }));
        slots.push(Slot::Fixed(c));
        let Ok(pattern) = BalancedPattern::new(slots, values, guess) else { continue };
        let Ok(b) = solve_balanced_breakpoint(&pattern) else { continue };
        let bps = pattern.breakpoints_at(b);
        if bps.windows(2).any(|w| w[1] - w[0] <= SUPPORT_TOL) {
            continue;
        }
        if let Ok(h) = StepFunction1D::new(bps, pattern.values.clone()) {
            return h;
        }
    }
}

/// Random sign function with up to `max_breakpoints` breakpoints drawn
/// uniformly from `(-range, range)`.
pub fn random_sign_function<R: Rng + ?Sized>(rng: &mut R, max_breakpoints: usize, range: f64) -> SignFunction1D {
    let n = rng.random_range(0..=max_breakpoints);
    let mut bps: Vec<f64> = (0..n).map(|_| rng.random_range(-range..range)).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    let leading = if rng.random_bool(0.5) { 1 } else { -1 };
    SignFunction1D::new(leading, bps).expect("sorted distinct finite breakpoints")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StripDiagnostics {
    /// `f = g = sign` outside the strip and `f = -g` inside, up to `tol` in L2.
    pub shape_ok: bool,
    /// L2 size of the violation of the strip shape.
    pub defect: f64,
    /// `E[X h(X)]` for `h = f·1_{|x| ≤ C*}`; zero for balanced pairs.
    pub h_moment1: f64,
}

impl StripDiagnostics {
    pub fn is_balanced(&self, tol: f64) -> bool {
        self.h_moment1.abs() <= tol
    }
}

pub fn is_strip_pair(f: &SignFunction1D, g: &SignFunction1D, c: f64, tol: f64) -> Result<StripDiagnostics> {
    let bad: f64 = merged_cells(&[f.breakpoints(), g.breakpoints(), &[-c, c]])
        .into_iter()
        .filter(|&(lo, hi)| {
            let x = representative(lo, hi);
            let (fv, gv) = (f.value_at(x), g.value_at(x));
            if x.abs() > c {
                fv != x.signum() || gv != x.signum()
            } else {
                fv != -gv
            }
        })
        .map(|(lo, hi)| normal_mass(lo, hi))
        .sum();
    let defect = 2.0 * bad.sqrt();
    let h = strip_restriction(f, c)?;
    Ok(StripDiagnostics { shape_ok: defect <= tol, defect, h_moment1: moment(&h, 1)? })
}

/// L2 tolerance for accepting a pair as a strip pair in [`pi3_gap`].
pub const STRIP_PAIR_TOL: f64 = 1e-9;

/// `E[(Π₃f)(Π₃g)] = ‖Π₃u‖² - ‖Π₃h‖²` for a strip pair.
pub fn pi3_gap(f: &SignFunction1D, g: &SignFunction1D, c: f64) -> Result<f64> {
    let diag = is_strip_pair(f, g, c, STRIP_PAIR_TOL)?;
    if !diag.shape_ok {
        return Err(Error::NotAStripPair { defect: diag.defect, tol: STRIP_PAIR_TOL });
    }
    pi_k_inner(f, g, 3)
}

/// A finite union of disjoint closed intervals, sorted; `±∞` endpoints allowed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    /// Sorts and merges overlapping or touching intervals.
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        if let Some(&(a, b)) = intervals.iter().find(|(a, b)| a.is_nan() || b.is_nan() || a > b) {
            return Err(Error::InvalidInterval { a, b });
        }
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Ok(Self { intervals: merged })
    }

    fn from_sorted_cells(cells: Vec<(f64, f64)>) -> Self {
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(cells.len());
        for (a, b) in cells {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Self { intervals: merged }
    }

    pub fn empty() -> Self {
        Self { intervals: Vec::new() }
    }

    pub fn whole_line() -> Self {
        Self { intervals: vec![(f64::NEG_INFINITY, f64::INFINITY)] }
    }

    /// `{x : |x| ≥ c}`.
    pub fn abs_at_least(c: f64) -> Self {
        if c <= 0.0 {
            return Self::whole_line();
        }
        Self { intervals: vec![(f64::NEG_INFINITY, -c), (c, f64::INFINITY)] }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= x && x <= b)
    }

    pub fn gaussian_measure(&self) -> f64 {
        self.intervals.iter().map(|&(a, b)| normal_mass(a, b)).sum()
    }

    /// `E[|X|·1_S(X)]`.
    pub fn abs_x_mass(&self) -> f64 {
        self.intervals
            .iter()
            .map(|&(a, b)| {
                if a >= 0.0 {
                    phi(a) - phi(b)
                } else if b <= 0.0 {
                    phi(b) - phi(a)
                } else {
                    2.0 * phi(0.0) - phi(a) - phi(b)
                }
            })
            .sum()
    }

    fn combine(&self, other: &Self, op: impl Fn(bool, bool) -> bool) -> Self {
        let ends = |s: &Self| s.intervals.iter().flat_map(|&(a, b)| [a, b]).collect::<Vec<_>>();
        let (ea, eb) = (ends(self), ends(other));
        let cells = merged_cells(&[&ea, &eb])
            .into_iter()
            .filter(|&(lo, hi)| {
                let x = representative(lo, hi);
                op(self.contains(x), other.contains(x))
            })
            .collect();
        Self::from_sorted_cells(cells)
    }

    pub fn union(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a && !b)
    }

    pub fn symmetric_difference(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a != b)
    }

    pub fn complement(&self) -> Self {
        Self::whole_line().difference(self)
    }
}

pub fn gaussian_measure(s: &IntervalUnion) -> f64 {
    s.gaussian_measure()
}

pub fn symmetric_difference(s: &IntervalUnion, t: &IntervalUnion) -> IntervalUnion {
    s.symmetric_difference(t)
}

pub fn abs_x_mass(s: &IntervalUnion) -> f64 {
    s.abs_x_mass()
}
