//! Hermite projection games `A = Σ c_k Π_k`, their values on 1-D sign
//! functions, the SDP value, and the arithmetic chain that turns the
//! perturbed Davie-Reeds game into a lower bound on `K_G`.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::davie_reeds::constants;
use crate::error::{Error, Result};
use crate::numfmt::format_17;
use crate::special::MAX_HERMITE_DEGREE;
use crate::strip::{disagreement_measure, overlap, pi_k_inner, Piecewise};

/// Coefficients `c_k = explicit(k) + identity_weight`; the identity weight
/// applies to every degree and implements `-λI`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameCoefficients {
    explicit: BTreeMap<usize, f64>,
    identity_weight: f64,
}

impl GameCoefficients {
    pub fn new(explicit: BTreeMap<usize, f64>, identity_weight: f64) -> Result<Self> {
        if let Some(&k) = explicit.keys().find(|&&k| k > MAX_HERMITE_DEGREE) {
            return Err(Error::DegreeAboveCap { degree: k, max: MAX_HERMITE_DEGREE });
        }
        if !identity_weight.is_finite() || explicit.values().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("game coefficients must be finite".into()));
        }
        Ok(Self { explicit, identity_weight })
    }

    pub fn zero() -> Self {
        Self { explicit: BTreeMap::new(), identity_weight: 0.0 }
    }

    pub fn explicit(&self) -> &BTreeMap<usize, f64> {
        &self.explicit
    }

    pub fn identity_weight(&self) -> f64 {
        self.identity_weight
    }

    /// Effective coefficient `c_k`.
    pub fn coefficient(&self, k: usize) -> f64 {
        self.explicit.get(&k).copied().unwrap_or(0.0) + self.identity_weight
    }

    pub fn max_explicit_degree(&self) -> usize {
        self.explicit.keys().next_back().copied().unwrap_or(0)
    }
}

/// `Π₁ - λ*I`.
pub fn dr_game() -> GameCoefficients {
    GameCoefficients {
        explicit: BTreeMap::from([(1, 1.0)]),
        identity_weight: -constants().lambda_star,
    }
}

/// `Π₁ - λ*I - εΠ₃`.
pub fn perturbed_game(eps: f64) -> Result<GameCoefficients> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps must be a finite non-negative number, got {eps}")));
    }
    Ok(GameCoefficients {
        explicit: BTreeMap::from([(1, 1.0), (3, -eps)]),
        identity_weight: -constants().lambda_star,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SdpValue {
    pub value: f64,
    /// Smallest degree attaining the supremum.
    pub degree: usize,
}

/// `sup_k |c_k|`, the limit of the SDP value as the dimension grows.
pub fn sdp_value(game: &GameCoefficients) -> SdpValue {
    let background = (0..).find(|k| !game.explicit.contains_key(k)).expect("finitely many explicit degrees");
    let mut best = SdpValue { value: game.identity_weight.abs(), degree: background };
    for &k in game.explicit.keys() {
        let v = game.coefficient(k).abs();
        if v > best.value || (v == best.value && k < best.degree) {
            best = SdpValue { value: v, degree: k };
        }
    }
    best
}

/// `Σ_k c_k E[(Π_k f)(Π_k g)]` with the identity term taken from the exact
/// overlap `E[fg]`.
pub fn val_1d<P, Q>(game: &GameCoefficients, f: &P, g: &Q, degree_cap: usize) -> Result<f64>
where
    P: Piecewise + ?Sized,
    Q: Piecewise + ?Sized,
{
    if degree_cap > MAX_HERMITE_DEGREE {
        return Err(Error::DegreeAboveCap { degree: degree_cap, max: MAX_HERMITE_DEGREE });
    }
    if game.max_explicit_degree() > degree_cap {
        return Err(Error::DegreeAboveCap { degree: game.max_explicit_degree(), max: degree_cap });
    }
    let mut total = game.identity_weight * overlap(f, g);
    for (&k, &c) in &game.explicit {
        total += c * pi_k_inner(f, g, k)?;
    }
    Ok(total)
}

/// `(|val(f,g) - val(f̃,g)|, ‖A‖·‖f - f̃‖₂)`; the first never exceeds the second.
pub fn value_stability_gap<P, Q, R>(game: &GameCoefficients, f: &P, f_tilde: &Q, g: &R) -> Result<(f64, f64)>
where
    P: Piecewise + ?Sized,
    Q: Piecewise + ?Sized,
    R: Piecewise + ?Sized,
{
    let cap = game.max_explicit_degree();
    let lhs = (val_1d(game, f, g, cap)? - val_1d(game, f_tilde, g, cap)?).abs();
    let rhs = sdp_value(game).value * 2.0 * disagreement_measure(f, f_tilde).sqrt();
    Ok((lhs, rhs))
}

/// Lower bound on `E[(Π₃f)(Π₃g)]` over balanced strip pairs.
pub const STRIP_GAP_FLOOR: f64 = 0.046;

/// `0.046 - 12(2ε)^{1/4}`.
pub fn gap_term(eps: f64) -> f64 {
    STRIP_GAP_FLOOR - 12.0 * (2.0 * eps).powf(0.25)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps >= 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eps must be a finite non-negative number, got {eps}")))
    }
}

/// Upper bound on `val(A_ε)` valid for every `ε ≥ 0`.
///
/// Near-optimal pairs are close to strip pairs and lose at least
/// `ε·gap_term`; any other pair is bounded through
/// `|E[(Π₃f)(Π₃g)]| ≤ 1`, which costs at most `+ε`. The bound is the larger
/// of the two cases.
pub fn perturbed_upper_bound(eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(constants().val_dr - eps * gap_term(eps).max(-1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundChainReport {
    pub epsilon: f64,
    pub val_dr: f64,
    pub gap_term: f64,
    pub val_eps_upper: f64,
    pub kg_lower: f64,
    /// `kg_lower - K_DR`, computed from the increment itself rather than by
    /// subtracting two nearly equal numbers.
    pub improvement: f64,
}

impl BoundChainReport {
    /// JSON object with every field at 17 significant digits.
    pub fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let fields = [
            ("epsilon", self.epsilon),
            ("val_dr", self.val_dr),
            ("gap_term", self.gap_term),
            ("val_eps_upper", self.val_eps_upper),
            ("kg_lower", self.kg_lower),
            ("improvement", self.improvement),
        ];
        writeln!(out, "{{")?;
        for (i, (name, v)) in fields.iter().enumerate() {
            let sep = if i + 1 == fields.len() { "" } else { "," };
            writeln!(out, "  \"{name}\": {}{sep}", format_17(*v))?;
        }
        writeln!(out, "}}")
    }

    pub fn to_json_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_json(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ASCII output")
    }
}

/// `K_G ≥ (1-λ*)/(val_dr - ε·gap) ≥ K_DR + (1-λ*)/val_dr² · ε·gap`.
pub fn bound_chain(eps: f64) -> Result<BoundChainReport> {
    check_eps(eps)?;
    let k = constants();
    let gap = gap_term(eps);
    if gap <= 0.0 {
        return Err(Error::NonPositiveGap { gap });
    }
    let x = eps * gap;
    let improvement = (1.0 - k.lambda_star) / (k.val_dr * k.val_dr) * x;
    Ok(BoundChainReport {
        epsilon: eps,
        val_dr: k.val_dr,
        gap_term: gap,
        val_eps_upper: k.val_dr - x,
        kg_lower: k.k_dr + improvement,
        improvement,
    })
}

/// `(1-λ*)/(val_dr - x) - K_DR - (1-λ*)/val_dr² · x`, non-negative by
/// convexity of `x ↦ 1/(val_dr - x)`.
pub fn convexity_margin(x: f64) -> f64 {
    let k = constants();
    let a = 1.0 - k.lambda_star;
    a / (k.val_dr - x) - k.k_dr - a / (k.val_dr * k.val_dr) * x
}
