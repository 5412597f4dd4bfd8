//! Finite models: Gauss-Hermite discretizations of 1-D games with exact
//! sign optimisation and a low-rank vector heuristic, the degree-`k` witness
//! of the SDP limit, and Monte Carlo checks of rotation invariance.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::GameCoefficients;
use crate::numfmt::format_17;
use crate::special::{factorial, hermite_table, hermite_unchecked};

pub const MIN_NODES: usize = 4;
pub const MAX_NODES: usize = 64;
pub const MAX_BRUTE_NODES: usize = 24;
/// Upper bound on `K_G` from Krivine's construction.
pub const KRIVINE_BOUND: f64 = 1.782_213_978_191_369;

/// `m`-point Gauss-Hermite rule for the standard normal: nodes ascending,
/// weights summing to one.
pub fn gauss_hermite(m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(1..=MAX_NODES).contains(&m) {
        return Err(Error::InvalidParameter(format!("rule size must lie in [1, {MAX_NODES}], got {m}")));
    }
    // Jacobi matrix of the monic probabilists' Hermite recurrence.
    let jacobi = DMatrix::from_fn(m, m, |i, j| if i.abs_diff(j) == 1 { (i.max(j) as f64).sqrt() } else { 0.0 });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let p = hermite_unchecked(m, *x);
            let dp = m as f64 * hermite_unchecked(m - 1, *x);
            if dp != 0.0 {
                *x -= p / dp;
            }
        }
    }
    // exact symmetry about 0
    for i in 0..m / 2 {
        let a = 0.5 * (nodes[m - 1 - i] - nodes[i]);
        nodes[i] = -a;
        nodes[m - 1 - i] = a;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    let scale = factorial(m) / (m * m) as f64;
    let mut weights: Vec<f64> = nodes.iter().map(|&x| scale / hermite_unchecked(m - 1, x).powi(2)).collect();
    for i in 0..m / 2 {
        let w = 0.5 * (weights[i] + weights[m - 1 - i]);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok((nodes, weights))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteGame {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub matrix: DMatrix<f64>,
    pub degree_cap: usize,
}

/// `M_ij = w_i w_j Σ_k a_k He_k(x_i) He_k(x_j) / k! + λ_I w_i δ_ij`, where
/// `a_k` are the explicit coefficients and `λ_I` the identity weight.
pub fn build(game: &GameCoefficients, m: usize, degree_cap: usize) -> Result<DiscreteGame> {
    if !(MIN_NODES..=MAX_NODES).contains(&m) {
        return Err(Error::InvalidParameter(format!("node count must lie in [{MIN_NODES}, {MAX_NODES}], got {m}")));
    }
    if degree_cap >= m {
        return Err(Error::InvalidParameter(format!("degree cap {degree_cap} must be below the node count {m}")));
    }
    if game.max_explicit_degree() > degree_cap {
        return Err(Error::DegreeAboveCap { degree: game.max_explicit_degree(), max: degree_cap });
    }
    let (nodes, weights) = gauss_hermite(m)?;
    let tables: Vec<Vec<f64>> = nodes.iter().map(|&x| hermite_table(degree_cap, x)).collect::<Result<_>>()?;
    let terms: Vec<(usize, f64)> = game.explicit().iter().map(|(&k, &a)| (k, a / factorial(k))).collect();
    let matrix = DMatrix::from_fn(m, m, |i, j| {
        let s: f64 = terms.iter().map(|&(k, a)| a * tables[i][k] * tables[j][k]).sum();
        let diag = if i == j { game.identity_weight() * weights[i] } else { 0.0 };
        weights[i] * weights[j] * s + diag
    });
    Ok(DiscreteGame { nodes, weights, matrix, degree_cap })
}

impl DiscreteGame {
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// `fᵀ M g`.
    pub fn bilinear(&self, f: &[f64], g: &[f64]) -> f64 {
        let (f, g) = (DVector::from_column_slice(f), DVector::from_column_slice(g));
        f.dot(&(&self.matrix * g))
    }

    /// Plain text: `m`, then `m` rows of space-separated 17-digit values.
    pub fn write_matrix<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let m = self.size();
        writeln!(out, "{m}")?;
        for i in 0..m {
            let row: Vec<String> = (0..m).map(|j| format_17(self.matrix[(i, j)])).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteVal {
    pub val: f64,
    pub argmax_f: Vec<i8>,
    pub argmax_g: Vec<i8>,
}

fn sign_of(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// `max_{f,g ∈ {±1}^m} fᵀ M g`, enumerating `f` with `f_0 = +1` in Gray-code
/// order; for fixed `f` the best `g` is `sign(Mᵀf)`.
pub fn brute_val(dg: &DiscreteGame) -> Result<BruteVal> {
    let m = dg.size();
    if m > MAX_BRUTE_NODES {
        return Err(Error::InvalidParameter(format!("brute force supports at most {MAX_BRUTE_NODES} nodes, got {m}")));
    }
    let a = &dg.matrix;
    let mut f = vec![1.0; m];
    let mut col: Vec<f64> = (0..m).map(|j| (0..m).map(|i| a[(i, j)]).sum()).collect();
    let score = |col: &[f64]| col.iter().map(|c| c.abs()).sum::<f64>();
    let mut best = score(&col);
    let mut best_f = f.clone();
    for step in 1u64..(1u64 << (m - 1)) {
        // flip the coordinate given by the lowest set bit, skipping f_0
        let i = step.trailing_zeros() as usize + 1;
        let delta = -2.0 * f[i];
        f[i] = -f[i];
        for (j, c) in col.iter_mut().enumerate() {
            *c += delta * a[(i, j)];
        }
        let s = score(&col);
        if s > best {
            best = s;
            best_f.clone_from(&f);
        }
    }
    // recompute from scratch to shed the accumulated updates
    let col: Vec<f64> = (0..m).map(|j| (0..m).map(|i| best_f[i] * a[(i, j)]).sum()).collect();
    Ok(BruteVal {
        val: score(&col),
        argmax_f: best_f.iter().map(|&x| sign_of(x)).collect(),
        argmax_g: col.iter().map(|&c| sign_of(c)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BcaResult {
    pub value: f64,
    /// Value after each sweep.
    pub sweep_values: Vec<f64>,
}

fn normalize_columns(v: &mut DMatrix<f64>, fallback: &DMatrix<f64>) {
    for j in 0..v.ncols() {
        let n = v.column(j).norm();
        if n > 0.0 {
            v.column_mut(j).scale_mut(1.0 / n);
        } else {
            v.set_column(j, &fallback.column(j));
        }
    }
}

fn bca_run(dg: &DiscreteGame, mut x: DMatrix<f64>, mut y: DMatrix<f64>, iters: usize) -> BcaResult {
    // columns of x and y are the unit vectors attached to rows and columns
    let value = |x: &DMatrix<f64>, y: &DMatrix<f64>| (x * &dg.matrix).component_mul(y).sum();
    let mut best = value(&x, &y);
    let mut sweep_values = Vec::with_capacity(iters);
    for _ in 0..iters {
        let mut ny = &x * &dg.matrix;
        normalize_columns(&mut ny, &y);
        y = ny;
        let mut nx = &y * dg.matrix.transpose();
        normalize_columns(&mut nx, &x);
        x = nx;
        let v = value(&x, &y);
        sweep_values.push(v);
        best = best.max(v);
    }
    BcaResult { value: best, sweep_values }
}

fn random_unit_columns(rng: &mut ChaCha8Rng, rank: usize, m: usize) -> DMatrix<f64> {
    let mut v = DMatrix::from_fn(rank, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let e1 = DMatrix::from_fn(rank, m, |i, _| if i == 0 { 1.0 } else { 0.0 });
    normalize_columns(&mut v, &e1);
    v
}

/// Alternating block-coordinate ascent for `max Σ M_ij ⟨x_i, y_j⟩` over unit
/// vectors in `R^rank`, from a seeded random start. A lower bound on the
/// vector optimum.
pub fn bca_sdp(dg: &DiscreteGame, rank: usize, iters: usize, seed: u64) -> Result<BcaResult> {
    if rank < 2 {
        return Err(Error::InvalidParameter(format!("rank must be at least 2, got {rank}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = dg.size();
    let x = random_unit_columns(&mut rng, rank, m);
    let y = random_unit_columns(&mut rng, rank, m);
    Ok(bca_run(dg, x, y, iters))
}

/// Same ascent started from the rank-one embedding of a sign pair.
pub fn bca_sdp_from_signs(dg: &DiscreteGame, f: &[i8], g: &[i8], rank: usize, iters: usize) -> Result<BcaResult> {
    if rank < 2 {
        return Err(Error::InvalidParameter(format!("rank must be at least 2, got {rank}")));
    }
    let m = dg.size();
    if f.len() != m || g.len() != m {
        return Err(Error::InvalidParameter("sign vectors must match the node count".into()));
    }
    let embed = |s: &[i8]| DMatrix::from_fn(rank, m, |i, j| if i == 0 { f64::from(s[j]) } else { 0.0 });
    Ok(bca_run(dg, embed(f), embed(g), iters))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessEstimate {
    pub n: usize,
    pub k: usize,
    pub samples: usize,
    /// `c_k`.
    pub coefficient: f64,
    /// Mean of `c_k ‖Ψ‖²`, unbiased for `c_k`.
    pub value_mean: f64,
    pub value_stderr: f64,
    /// Mean of `|c_k| ⟨f, Ψ⟩ = |c_k| ‖Ψ‖` for the unit-normalised `f = Ψ/‖Ψ‖`;
    /// this is `sign(c_k)⟨Af, Ψ⟩` and tends to `|c_k|` as `n` grows.
    pub feasible_mean: f64,
    pub feasible_stderr: f64,
    /// Sample variance of `‖Ψ‖²`.
    pub norm_variance: f64,
}

/// `‖Ψ(x)‖² = e_k(x₁², …, x_n²) / C(n, k)`.
pub fn witness_norm_sq(x: &[f64], k: usize) -> f64 {
    let n = x.len();
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &xi in x {
        let s = xi * xi;
        for j in (1..=k).rev() {
            e[j] += e[j - 1] * s;
        }
    }
    e[k] / binomial(n, k)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

const CHUNK: usize = 2048;

/// Per-sample values computed in fixed chunks, each with its own stream.
fn chunked_samples<T: Send>(samples: usize, seed: u64, per_chunk: impl Fn(&mut ChaCha8Rng, usize) -> Vec<T> + Sync) -> Vec<T> {
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            per_chunk(&mut rng, CHUNK.min(samples - c * CHUNK))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn mean_and_stderr(v: &[f64]) -> (f64, f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, (var / n).sqrt(), var)
}

pub fn witness_mc(n: usize, k: usize, game: &GameCoefficients, samples: usize, seed: u64) -> Result<WitnessEstimate> {
    if k != 1 && k != 3 {
        return Err(Error::InvalidParameter(format!("witness degree must be 1 or 3, got {k}")));
    }
    if n < k {
        return Err(Error::InvalidParameter(format!("dimension {n} is below the degree {k}")));
    }
    if samples < 100 {
        return Err(Error::InvalidParameter(format!("at least 100 samples are needed, got {samples}")));
    }
    let norms = chunked_samples(samples, seed, |rng, count| {
        let mut x = vec![0.0; n];
        (0..count)
            .map(|_| {
                x.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                witness_norm_sq(&x, k)
            })
            .collect()
    });
    let c = game.coefficient(k);
    let quad: Vec<f64> = norms.iter().map(|&q| c * q).collect();
    let feasible: Vec<f64> = norms.iter().map(|&q| c.abs() * q.sqrt()).collect();
    let (value_mean, value_stderr, _) = mean_and_stderr(&quad);
    let (feasible_mean, feasible_stderr, _) = mean_and_stderr(&feasible);
    let (_, _, norm_variance) = mean_and_stderr(&norms);
    Ok(WitnessEstimate { n, k, samples, coefficient: c, value_mean, value_stderr, feasible_mean, feasible_stderr, norm_variance })
}

/// `x ↦ sign(⟨d, x⟩ - offset)`, with `+1` on the boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfSpace {
    pub direction: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let s: f64 = self.direction.iter().zip(x).map(|(a, b)| a * b).sum();
        if s >= self.offset {
            1.0
        } else {
            -1.0
        }
    }

    /// `x ↦ self(Tx)`, i.e. direction `Tᵀd`.
    pub fn compose(&self, t: &DMatrix<f64>) -> HalfSpace {
        let d = t.transpose() * DVector::from_column_slice(&self.direction);
        HalfSpace { direction: d.iter().copied().collect(), offset: self.offset }
    }
}

/// Haar-distributed orthogonal matrix from the QR factorisation of a
/// Gaussian matrix, with column signs fixed by `diag(R) > 0`.
pub fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn multi_indices(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in 0..=left {
            prefix.push(a);
            rec(n, left - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Reproducing kernel of `Π_k`: `Σ_{|α| = k} H_α(x) H_α(y) / α!`.
struct ProjectionKernel {
    k: usize,
    indices: Vec<Vec<usize>>,
    inv_factorials: Vec<f64>,
}

impl ProjectionKernel {
    fn new(n: usize, k: usize) -> Self {
        let indices = multi_indices(n, k);
        let inv_factorials = indices.iter().map(|a| 1.0 / a.iter().map(|&ai| factorial(ai)).product::<f64>()).collect();
        Self { k, indices, inv_factorials }
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let hx: Vec<Vec<f64>> = x.iter().map(|&v| (0..=self.k).map(|j| hermite_unchecked(j, v)).collect()).collect();
        let hy: Vec<Vec<f64>> = y.iter().map(|&v| (0..=self.k).map(|j| hermite_unchecked(j, v)).collect()).collect();
        self.indices
            .iter()
            .zip(&self.inv_factorials)
            .map(|(a, w)| w * a.iter().enumerate().map(|(i, &ai)| hx[i][ai] * hy[i][ai]).product::<f64>())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationReport {
    pub n: usize,
    pub k: usize,
    pub samples: usize,
    pub val_original: f64,
    pub err_original: f64,
    pub val_rotated: f64,
    pub err_rotated: f64,
    /// `|original - rotated| / sqrt(err_o² + err_r²)`.
    pub z_score: f64,
    pub agree: bool,
}

/// Estimates `E[(Π_k f)(Π_k g)]` before and after composing with `t`, using
/// `E[f(X) g(Y) K_k(X, Y)]` over shared independent pairs `(X, Y)`.
pub fn rotation_invariance_with(
    k: usize,
    f: &HalfSpace,
    g: &HalfSpace,
    t: &DMatrix<f64>,
    samples: usize,
    seed: u64,
) -> Result<RotationReport> {
    let n = f.direction.len();
    if n < 2 || g.direction.len() != n || t.nrows() != n || t.ncols() != n {
        return Err(Error::InvalidParameter("dimensions of f, g and T must agree and be at least 2".into()));
    }
    if k != 1 && k != 3 {
        return Err(Error::InvalidParameter(format!("degree must be 1 or 3, got {k}")));
    }
    if samples < 2 {
        return Err(Error::InvalidParameter("at least 2 samples are needed".into()));
    }
    let kernel = ProjectionKernel::new(n, k);
    let (ft, gt) = (f.compose(t), g.compose(t));
    let pairs = chunked_samples(samples, seed, |rng, count| {
        let (mut x, mut y) = (vec![0.0; n], vec![0.0; n]);
        (0..count)
            .map(|_| {
                x.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                y.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                let kv = kernel.eval(&x, &y);
                (f.eval(&x) * g.eval(&y) * kv, ft.eval(&x) * gt.eval(&y) * kv)
            })
            .collect()
    });
    let orig: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let rot: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (vo, eo, _) = mean_and_stderr(&orig);
    let (vr, er, _) = mean_and_stderr(&rot);
    let combined = (eo * eo + er * er).sqrt();
    let z_score = if combined > 0.0 { (vo - vr).abs() / combined } else { (vo - vr).abs() * f64::INFINITY };
    let z_score = if z_score.is_nan() { 0.0 } else { z_score };
    Ok(RotationReport {
        n,
        k,
        samples,
        val_original: vo,
        err_original: eo,
        val_rotated: vr,
        err_rotated: er,
        z_score,
        agree: z_score <= 4.0,
    })
}

/// The default pair: `sign(x₁ - 0.3)` and `sign((x₁ + x₂)/√2 + 0.2)`, under a
/// seeded random rotation.
pub fn default_halfspaces(n: usize) -> (HalfSpace, HalfSpace) {
    let mut a = vec![0.0; n];
    a[0] = 1.0;
    let mut b = vec![0.0; n];
    b[0] = std::f64::consts::FRAC_1_SQRT_2;
    b[1] = std::f64::consts::FRAC_1_SQRT_2;
    (HalfSpace { direction: a, offset: 0.3 }, HalfSpace { direction: b, offset: -0.2 })
}

pub fn rotation_invariance_mc(n: usize, k: usize, samples: usize, seed: u64) -> Result<RotationReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be at least 2, got {n}")));
    }
    let (f, g) = default_halfspaces(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let t = random_orthogonal(n, &mut rng);
    rotation_invariance_with(k, &f, &g, &t, samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::davie_reeds::constants;
    use crate::game::{dr_game, perturbed_game, val_1d};
    use crate::strip::{moment, SignFunction1D};
    use std::collections::BTreeMap;

    #[test]
    fn rule_is_symmetric_and_normalised() {
        for m in [4, 7, 20, 32, 64] {
            let (x, w) = gauss_hermite(m).unwrap();
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(w.iter().all(|&wi| wi > 0.0));
            for i in 0..m {
                assert_eq!(x[i], -x[m - 1 - i]);
                assert_eq!(w[i], w[m - 1 - i]);
            }
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn rule_integrates_hermite_products_exactly() {
        for m in [4, 10, 20] {
            let (x, w) = gauss_hermite(m).unwrap();
            for j in 0..m {
                for k in 0..m {
                    if j + k >= 2 * m {
                        continue;
                    }
                    let s: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * hermite_unchecked(j, xi) * hermite_unchecked(k, xi)).sum();
                    // compared in the orthonormal basis He_k / √k!
                    let scale = (factorial(j) * factorial(k)).sqrt();
                    let expected = if j == k { 1.0 } else { 0.0 };
                    assert!((s / scale - expected).abs() < 1e-10, "m={m} j={j} k={k}: {s}");
                }
            }
        }
    }

    #[test]
    fn quadratic_form_reproduces_inner_products() {
        // He_j node values through the matrix of a single-degree game
        let m = 16;
        for deg in [0usize, 2, 5] {
            let game = GameCoefficients::new(BTreeMap::from([(deg, 1.0)]), 0.0).unwrap();
            let dg = build(&game, m, 7).unwrap();
            for j in 0..8 {
                let v: Vec<f64> = dg.nodes.iter().map(|&x| hermite_unchecked(j, x)).collect();
                let q = dg.bilinear(&v, &v);
                let expected = if j == deg { factorial(deg) } else { 0.0 };
                assert!((q - expected).abs() < 1e-10 * expected.max(1.0), "deg={deg} j={j}: {q}");
            }
        }
    }

    #[test]
    fn build_examples() {
        let dg = build(&GameCoefficients::zero(), 4, 0).unwrap();
        assert!(dg.matrix.iter().all(|&v| v == 0.0));
        let dg = build(&dr_game(), 32, 5).unwrap();
        let ones = vec![1.0; 32];
        let one = SignFunction1D::constant(1).unwrap();
        let oracle = val_1d(&dr_game(), &one, &one, 1).unwrap();
        assert!((dg.bilinear(&ones, &ones) - oracle).abs() < 1e-10);
        assert!((oracle + constants().lambda_star).abs() < 1e-15);
        assert!(dg.matrix.transpose() == dg.matrix);
        assert!(build(&dr_game(), 3, 1).is_err());
        assert!(build(&dr_game(), 65, 1).is_err());
        assert!(build(&dr_game(), 8, 8).is_err());
        assert!(build(&perturbed_game(0.1).unwrap(), 8, 2).is_err());
    }

    #[test]
    fn matrix_export_format() {
        let dg = build(&dr_game(), 4, 1).unwrap();
        let mut buf = Vec::new();
        dg.write_matrix(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "4");
        assert_eq!(lines.len(), 5);
        for (i, line) in lines[1..].iter().enumerate() {
            let vals: Vec<f64> = line.split(' ').map(|s| s.parse().unwrap()).collect();
            assert_eq!(vals.len(), 4);
            for (j, v) in vals.iter().enumerate() {
                assert_eq!(*v, dg.matrix[(i, j)]);
            }
        }
    }

    fn diag_game(entries: &[f64]) -> DiscreteGame {
        let m = entries.len();
        DiscreteGame {
            nodes: vec![0.0; m],
            weights: vec![1.0 / m as f64; m],
            matrix: DMatrix::from_diagonal(&DVector::from_column_slice(entries)),
            degree_cap: 0,
        }
    }

    /// Exhaustive `4^m` search as an oracle for small `m`.
    fn full_enumeration(dg: &DiscreteGame) -> f64 {
        let m = dg.size();
        let mut best = f64::MIN;
        for fb in 0..(1u32 << m) {
            let f: Vec<f64> = (0..m).map(|i| if fb >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
            for gb in 0..(1u32 << m) {
                let g: Vec<f64> = (0..m).map(|i| if gb >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
                best = best.max(dg.bilinear(&f, &g));
            }
        }
        best
    }

    #[test]
    fn brute_val_examples() {
        assert!((brute_val(&diag_game(&[0.7, -0.2])).unwrap().val - 0.9).abs() < 1e-15);
        assert_eq!(brute_val(&diag_game(&[0.0; 5])).unwrap().val, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let m = 6;
            let dg = DiscreteGame {
                nodes: vec![0.0; m],
                weights: vec![1.0 / m as f64; m],
                matrix: DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0)),
                degree_cap: 0,
            };
            let b = brute_val(&dg).unwrap();
            assert!((b.val - full_enumeration(&dg)).abs() < 1e-12);
            let f: Vec<f64> = b.argmax_f.iter().map(|&s| f64::from(s)).collect();
            let g: Vec<f64> = b.argmax_g.iter().map(|&s| f64::from(s)).collect();
            assert!((dg.bilinear(&f, &g) - b.val).abs() < 1e-12);
        }
        assert!(brute_val(&build(&dr_game(), 25, 1).unwrap()).is_err());
    }

    #[test]
    fn brute_val_close_to_continuum() {
        let b = brute_val(&build(&dr_game(), 20, 12).unwrap()).unwrap();
        assert!((b.val - 0.4786).abs() <= 0.02, "{}", b.val);
        // the argmax is a grid sign function; its value is a quadrature of val_1d
        assert!(b.val <= constants().val_dr + 0.02);
    }

    #[test]
    fn bca_properties() {
        let dg = build(&dr_game(), 12, 4).unwrap();
        let b = brute_val(&dg).unwrap();
        let warm = bca_sdp_from_signs(&dg, &b.argmax_f, &b.argmax_g, 4, 50).unwrap();
        assert!(warm.value >= b.val - 1e-9);
        let cold = bca_sdp(&dg, 4, 200, 1).unwrap();
        for r in [&warm, &cold] {
            assert!(r.sweep_values.windows(2).all(|w| w[1] >= w[0] - 1e-12));
            assert!(r.value <= KRIVINE_BOUND * b.val + 1e-6);
        }
        let z = bca_sdp(&diag_game(&[0.0; 4]), 3, 10, 0).unwrap();
        assert_eq!(z.value, 0.0);
        assert!(bca_sdp(&dg, 1, 10, 0).is_err());
    }

    #[test]
    fn bca_is_reproducible() {
        let dg = build(&dr_game(), 10, 3).unwrap();
        assert_eq!(bca_sdp(&dg, 3, 30, 9).unwrap(), bca_sdp(&dg, 3, 30, 9).unwrap());
    }

    #[test]
    fn witness_norm_matches_direct_sum() {
        let x: [f64; 5] = [0.3, -1.2, 0.7, 2.0, -0.1];
        let mut direct = 0.0;
        for i in 0..5 {
            for j in i + 1..5 {
                for l in j + 1..5 {
                    direct += (x[i] * x[j] * x[l]).powi(2);
                }
            }
        }
        assert!((witness_norm_sq(&x, 3) - direct / 10.0).abs() < 1e-14);
        let s: f64 = x.iter().map(|v| v * v).sum();
        assert!((witness_norm_sq(&x, 1) - s / 5.0).abs() < 1e-15);
    }

    /// `Var ‖Ψ‖² = Σ_j C(k,j) C(n-k,k-j) 3^j / C(n,k) - 1`.
    fn exact_norm_variance(n: usize, k: usize) -> f64 {
        (0..=k).map(|j| binomial(k, j) * binomial(n - k, k - j) * 3f64.powi(j as i32)).sum::<f64>() / binomial(n, k) - 1.0
    }

    #[test]
    fn witness_degree_one_is_unbiased() {
        let game = dr_game();
        for n in [10, 100] {
            let w = witness_mc(n, 1, &game, 20_000, 4).unwrap();
            assert!((w.value_mean - game.coefficient(1)).abs() <= 3.0 * w.value_stderr, "{w:?}");
            let var = exact_norm_variance(n, 1);
            assert!((var - 2.0 / n as f64).abs() < 1e-12);
            assert!((w.norm_variance / var - 1.0).abs() < 0.1);
        }
        assert!(witness_mc(10, 2, &game, 1000, 0).is_err());
        assert!(witness_mc(2, 3, &game, 1000, 0).is_err());
        assert!(witness_mc(10, 1, &game, 99, 0).is_err());
    }

    #[test]
    fn witness_degree_three_variance() {
        let game = perturbed_game(0.5).unwrap();
        let w = witness_mc(60, 3, &game, 20_000, 8).unwrap();
        let var = exact_norm_variance(60, 3);
        assert!((w.norm_variance / var - 1.0).abs() < 0.15, "{} vs {var}", w.norm_variance);
        assert!(w.feasible_mean > 0.0 && w.feasible_mean <= game.coefficient(3).abs());
        assert_eq!(w, witness_mc(60, 3, &game, 20_000, 8).unwrap());
    }

    #[test]
    fn orthogonal_matrix_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = random_orthogonal(5, &mut rng);
        let id = &q.transpose() * &q;
        assert!((id - DMatrix::identity(5, 5)).abs().max() < 1e-12);
    }

    #[test]
    fn multi_index_count() {
        assert_eq!(multi_indices(5, 3).len(), 35);
        assert_eq!(multi_indices(3, 1).len(), 3);
        assert!(multi_indices(4, 3).iter().all(|a| a.iter().sum::<usize>() == 3));
    }

    #[test]
    fn identity_rotation_matches_sample_by_sample() {
        let (f, g) = default_halfspaces(4);
        let r = rotation_invariance_with(3, &f, &g, &DMatrix::identity(4, 4), 5000, 2).unwrap();
        assert_eq!(r.val_original, r.val_rotated);
        assert_eq!(r.z_score, 0.0);
        assert!(r.agree);
    }

    #[test]
    fn sign_of_first_coordinate_gives_two_over_pi() {
        let mut e1 = vec![0.0; 3];
        e1[0] = 1.0;
        let h = HalfSpace { direction: e1, offset: 0.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = random_orthogonal(3, &mut rng);
        let r = rotation_invariance_with(1, &h, &h, &t, 200_000, 6).unwrap();
        let oracle = 2.0 / std::f64::consts::PI;
        assert!((r.val_original - oracle).abs() <= 4.0 * r.err_original);
        assert!((r.val_rotated - oracle).abs() <= 4.0 * r.err_rotated);
    }

    #[test]
    fn ridge_pair_matches_one_dimensional_oracle() {
        // E[(Π_k f)(Π_k g)] = F̂_k Ĝ_k ⟨a, b⟩^k / k! for ridge functions
        let n = 4;
        let f1 = SignFunction1D::new(-1, vec![0.3]).unwrap();
        let g1 = SignFunction1D::new(-1, vec![-0.2]).unwrap();
        let cos = std::f64::consts::FRAC_1_SQRT_2;
        for k in [1usize, 3] {
            let oracle = moment(&f1, k).unwrap() * moment(&g1, k).unwrap() * cos.powi(k as i32) / factorial(k);
            let r = rotation_invariance_mc(n, k, 200_000, 11).unwrap();
            assert!((r.val_original - oracle).abs() <= 4.0 * r.err_original, "k={k}: {r:?} vs {oracle}");
            assert!(r.agree);
        }
        assert!(rotation_invariance_mc(1, 1, 100, 0).is_err());
        assert!(rotation_invariance_mc(3, 2, 100, 0).is_err());
    }
}
