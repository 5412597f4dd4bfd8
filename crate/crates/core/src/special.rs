//! Gaussian density and distribution function, probabilists' Hermite
//! polynomials, closed-form Hermite-Gaussian integrals over intervals, and the
//! bracketing root finder and adaptive quadrature used as oracles throughout
//! the crate.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

/// Infinite integration limits are replaced by `±TAIL_CUTOFF`; the standard
/// normal mass beyond it is below 1e-18.
pub const TAIL_CUTOFF: f64 = 9.0;

/// Largest Hermite degree accepted anywhere in the crate.
pub const MAX_HERMITE_DEGREE: usize = 64;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn phi(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function, evaluated through `erfc` so that
/// both tails keep full relative accuracy.
#[allow(non_snake_case)]
#[inline]
pub fn Phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Gaussian mass of `[a, b]`, computed from whichever tail avoids cancellation.
pub fn normal_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        Phi(-a) - Phi(-b)
    } else if b <= 0.0 {
        Phi(b) - Phi(a)
    } else {
        1.0 - Phi(a) - Phi(-b)
    }
}

fn check_degree(k: usize) -> Result<()> {
    if k > MAX_HERMITE_DEGREE {
        Err(Error::DegreeAboveCap {
            degree: k,
            max: MAX_HERMITE_DEGREE,
        })
    } else {
        Ok(())
    }
}

/// Probabilists' Hermite polynomial `He_k(x)` by the three-term recurrence
/// `He_{k+1}(x) = x He_k(x) - k He_{k-1}(x)`.
pub fn hermite_he(k: usize, x: f64) -> Result<f64> {
    check_degree(k)?;
    Ok(hermite_unchecked(k, x))
}

pub(crate) fn hermite_unchecked(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 0..k {
        let next = x * cur - j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `He_0(x), ..., He_kmax(x)` in one pass.
pub fn hermite_table(kmax: usize, x: f64) -> Result<Vec<f64>> {
    check_degree(kmax)?;
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(1.0);
    if kmax >= 1 {
        out.push(x);
    }
    for j in 1..kmax {
        let next = x * out[j] - j as f64 * out[j - 1];
        out.push(next);
    }
    Ok(out)
}

/// `∫_a^b He_k(x) φ(x) dx` in closed form.
///
/// For `k ≥ 1` the antiderivative of `He_k φ` is `-He_{k-1} φ`, so the
/// integral is `He_{k-1}(a)φ(a) - He_{k-1}(b)φ(b)`; boundary terms at `±∞`
/// vanish. For `k = 0` it is the Gaussian mass of `[a, b]`.
pub fn hermite_partial_integral(k: usize, a: f64, b: f64) -> Result<f64> {
    check_degree(k)?;
    if a.is_nan() || b.is_nan() || a > b {
        return Err(Error::InvalidInterval { a, b });
    }
    Ok(hermite_partial_unchecked(k, a, b))
}

pub(crate) fn hermite_partial_unchecked(k: usize, a: f64, b: f64) -> f64 {
    if k == 0 {
        return normal_mass(a, b);
    }
    let boundary = |t: f64| {
        if t.is_infinite() {
            0.0
        } else {
            hermite_unchecked(k - 1, t) * phi(t)
        }
    };
    boundary(a) - boundary(b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const GK_GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SUBINTERVALS: usize = 20_000;

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut kronrod = GK_KRONROD_WEIGHTS[7] * f_center;
    let mut gauss = GK_GAUSS_WEIGHTS[3] * f_center;
    for (i, (&x, &w)) in GK_NODES.iter().zip(&GK_KRONROD_WEIGHTS).take(7).enumerate() {
        let pair = f(center - half * x) + f(center + half * x);
        kronrod += w * pair;
        if i % 2 == 1 {
            gauss += GK_GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive 15-point Gauss-Kronrod quadrature of `f` over `[a, b]`.
///
/// Infinite limits are truncated to `±TAIL_CUTOFF`. The segment with the
/// largest error estimate is bisected until the summed estimate drops below
/// `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if a.is_nan() || b.is_nan() || a > b {
        return Err(Error::InvalidInterval { a, b });
    }
    let a = a.clamp(-TAIL_CUTOFF, TAIL_CUTOFF);
    let b = b.clamp(-TAIL_CUTOFF, TAIL_CUTOFF);
    if a == b {
        return Ok(QuadratureResult { value: 0.0, error_estimate: 0.0 });
    }

    let (value, error) = gauss_kronrod(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let (mut total, mut total_err) = (value, error);

    while total_err > tol {
        if heap.len() >= MAX_SUBINTERVALS {
            return Err(Error::QuadratureNonConvergence {
                value: total,
                error_estimate: total_err,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Segment cannot be split further in double precision.
            return Err(Error::QuadratureNonConvergence {
                value: total,
                error_estimate: total_err,
                intervals: heap.len() + 1,
            });
        }
        let (lv, le) = gauss_kronrod(&f, worst.a, mid);
        let (rv, re) = gauss_kronrod(&f, mid, worst.b);
        heap.push(Segment { a: worst.a, b: mid, value: lv, error: le });
        heap.push(Segment { a: mid, b: worst.b, value: rv, error: re });
        // Re-sum to avoid drift from repeated incremental updates.
        total = heap.iter().map(|s| s.value).sum();
        total_err = heap.iter().map(|s| s.error).sum();
    }
    Ok(QuadratureResult { value: total, error_estimate: total_err })
}

const MAX_ROOT_ITERATIONS: usize = 300;

/// Bracketing root finder (Brent's method: bisection safeguarding secant and
/// inverse quadratic steps). On success the final bracket is narrower than
/// `tol` up to a few ulps of the root.
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::InvalidInterval { a: lo, b: hi });
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa * fb < 0.0) {
        return Err(Error::NoSignChange { lo, hi, f_lo: fa, f_hi: fb });
    }

    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..MAX_ROOT_ITERATIONS {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::Domain { value: b, domain: "finite objective values" });
        }
    }
    Err(Error::RootNonConvergence { iterations: MAX_ROOT_ITERATIONS })
}

/// `k!` as a float; finite for every degree up to `MAX_HERMITE_DEGREE`.
pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}
