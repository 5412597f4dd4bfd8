//! The Davie-Reeds objective `F(C) = 4φ(C)² - λ(4Φ(-C) - 1)`, its critical
//! points, and the constants derived from them.
//!
//! `C*` is the unique root of `H(C) = 4φ(C)² - 4Φ(-C) + 1` in `(0, 1)`, the
//! critical point of the gap ratio `R(C)`. The game weight is
//! `λ* = 2C*φ(C*)`, which makes `C*` the smaller critical point `C₋` of `F`.
//! The larger one, `C₊ > 1`, is a local minimum.

use std::io::Write;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt::format_sig;
use crate::special::{find_root, phi, Phi};

const ROOT_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrConstants {
    pub c_star: f64,
    pub lambda_star: f64,
    pub c_plus: f64,
    /// `F(C*)`, the value of the Davie-Reeds game.
    pub val_dr: f64,
    /// `(1 - λ*) / val_dr`, the Davie-Reeds lower bound on `K_G`.
    pub k_dr: f64,
}

/// `H(C) = 4φ(C)² - 4Φ(-C) + 1`.
pub fn h_gap(c: f64) -> f64 {
    4.0 * phi(c).powi(2) - 4.0 * Phi(-c) + 1.0
}

pub fn f_objective(c: f64, lam: f64) -> f64 {
    4.0 * phi(c).powi(2) - lam * (4.0 * Phi(-c) - 1.0)
}

/// `F'(C) = 4φ(λ - 2Cφ)`.
pub fn f_prime(c: f64, lam: f64) -> f64 {
    let p = phi(c);
    4.0 * p * (lam - 2.0 * c * p)
}

/// `F''(C) = -4λCφ + 8φ²(2C² - 1)`.
pub fn f_second(c: f64, lam: f64) -> f64 {
    let p = phi(c);
    -4.0 * lam * c * p + 8.0 * p * p * (2.0 * c * c - 1.0)
}

pub fn solve_constants() -> Result<DrConstants> {
    let c_star = find_root(h_gap, 0.0, 1.0, ROOT_TOL)?;
    let lambda_star = 2.0 * c_star * phi(c_star);
    // 2Cφ(C) decreases on (1, ∞), so [1, 6] brackets the second root.
    let c_plus = find_root(|c| lambda_star - 2.0 * c * phi(c), 1.0, 6.0, ROOT_TOL)?;
    let val_dr = f_objective(c_star, lambda_star);
    let k_dr = (1.0 - lambda_star) / val_dr;
    Ok(DrConstants { c_star, lambda_star, c_plus, val_dr, k_dr })
}

/// Process-wide constants, solved on first use.
pub fn constants() -> &'static DrConstants {
    static CONSTANTS: OnceLock<DrConstants> = OnceLock::new();
    CONSTANTS.get_or_init(|| solve_constants().expect("fixed root-finding problem has a bracketed root"))
}

fn check_ratio_domain(c: f64) -> Result<()> {
    if (0.0..1.0).contains(&c) {
        Ok(())
    } else {
        Err(Error::Domain { value: c, domain: "[0, 1)" })
    }
}

/// `R(C)`: the upper bound on `val/sdp` when `λ = 2Cφ(C)`.
pub fn ratio(c: f64) -> Result<f64> {
    check_ratio_domain(c)?;
    let p = phi(c);
    let lam = 2.0 * c * p;
    Ok((4.0 * p * p - lam * (4.0 * Phi(-c) - 1.0)) / (1.0 - lam))
}

pub fn ratio_prime(c: f64) -> Result<f64> {
    check_ratio_domain(c)?;
    let p = phi(c);
    let denom = 1.0 - 2.0 * c * p;
    Ok(2.0 * (1.0 - c * c) * p / (denom * denom) * h_gap(c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapeRow {
    pub c: f64,
    pub f: f64,
    pub f_prime: f64,
}

/// `F` and `F'` at `λ*` on a uniform grid of `steps` points.
pub fn landscape(c_min: f64, c_max: f64, steps: usize) -> Result<Vec<LandscapeRow>> {
    if steps < 2 {
        return Err(Error::InvalidParameter(format!("landscape needs at least 2 steps, got {steps}")));
    }
    if !(c_min.is_finite() && c_max.is_finite()) || c_min > c_max {
        return Err(Error::InvalidInterval { a: c_min, b: c_max });
    }
    let lam = constants().lambda_star;
    let h = (c_max - c_min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            let c = if i == steps - 1 { c_max } else { c_min + h * i as f64 };
            LandscapeRow { c, f: f_objective(c, lam), f_prime: f_prime(c, lam) }
        })
        .collect())
}

/// CSV with header `C,F,Fprime`, six significant digits per value.
pub fn write_landscape_csv<W: Write>(rows: &[LandscapeRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "C,F,Fprime")?;
    for r in rows {
        writeln!(out, "{},{},{}", format_sig(r.c, 6), format_sig(r.f, 6), format_sig(r.f_prime, 6))?;
    }
    Ok(())
}
