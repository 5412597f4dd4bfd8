//! Command-line front end. `run` returns the process exit code: 0 on
//! success, 1 when a verification check fails or a computation is
//! inapplicable, 2 on usage errors.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::davie_reeds::{constants, h_gap, landscape, write_landscape_csv};
use crate::discretized::{
    bca_sdp, bca_sdp_from_signs, brute_val, build, rotation_invariance_mc, witness_mc, KRIVINE_BOUND,
};
use crate::error::Error;
use crate::game::{bound_chain, convexity_margin, dr_game, perturbed_game, perturbed_upper_bound, value_stability_gap, GameCoefficients};
use crate::numfmt::format_sig;
use crate::search::{bathtub_check, calculus_stability_scan, optimize, stability_audit, SearchConfig};
use crate::special::{phi, Phi};
use crate::strip::{
    build_strip_pair, is_strip_pair, moment, pi3_gap, random_balanced_h, random_sign_function, solve_balanced_breakpoint,
    BalancedPattern, IntervalUnion, SignFunction1D, Slot, StepFunction1D,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    TwoSided,
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub name: String,
    pub computed: f64,
    pub target: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub passed: bool,
    /// The statement the row checks.
    pub anchor: String,
}

impl VerificationReport {
    pub fn new(name: &str, computed: f64, target: f64, tolerance: f64, comparison: Comparison, anchor: &str) -> Self {
        let passed = match comparison {
            Comparison::TwoSided => (computed - target).abs() <= tolerance,
            Comparison::AtMost => computed <= target + tolerance,
            Comparison::AtLeast => computed >= target - tolerance,
        };
        Self {
            name: name.to_string(),
            computed,
            target,
            tolerance,
            comparison,
            passed,
            anchor: anchor.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "glab", version, about = "Hermite projection games and the Davie-Reeds bound")]
pub struct Cli {
    /// Emit machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve and check the game constants.
    Constants,
    /// Run the randomized property sweeps and report worst-case margins.
    VerifyLemmas {
        #[arg(long, env = "GLAB_SEED", default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        strip_pairs: usize,
        #[arg(long, default_value_t = 500)]
        bathtub_sets: usize,
        #[arg(long, default_value_t = 200)]
        triples: usize,
        #[arg(long, default_value_t = 12)]
        restarts: usize,
    },
    /// Export F and F' on a grid as CSV.
    Landscape {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        min: f64,
        #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
        max: f64,
        #[arg(long, default_value_t = 401)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coordinate-ascent search over 1-D sign-function pairs.
    Optimize {
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 40)]
        restarts: usize,
        #[arg(long, env = "GLAB_SEED", default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        max_breakpoints: usize,
        /// Result JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Gauss-Hermite discretization with exact and vector optima.
    Discretize {
        #[arg(long, default_value_t = 20)]
        m: usize,
        #[arg(long, default_value_t = 12)]
        cap: usize,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 8)]
        rank: usize,
        #[arg(long, env = "GLAB_SEED", default_value_t = 1)]
        seed: u64,
        /// Matrix export.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo statistics of the degree-k witness.
    Witness {
        #[arg(long, default_value_t = 400)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, env = "GLAB_SEED", default_value_t = 1)]
        seed: u64,
        /// Perturbation of the game whose coefficient is measured.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
    },
    /// Replay the arithmetic from the perturbed game value to the K_G bound.
    BoundChain {
        #[arg(long, default_value_t = 4e-11)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo check that projection values are rotation invariant.
    Rotation {
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        #[arg(long, env = "GLAB_SEED", default_value_t = 1)]
        seed: u64,
    },
}

/// Outcome of a subcommand before it becomes an exit code.
enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::InvalidInterval { .. }
            | Error::Domain { .. }
            | Error::DegreeAboveCap { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Check(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Check(e.to_string())
    }
}

type CmdResult = std::result::Result<bool, Failure>;

pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = if e.use_stderr() { e.render().to_string() } else { String::new() };
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{}", e.render());
            }
            return if code == 0 { 0 } else { 2 };
        }
    };
    match dispatch(&cli, stdout) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Check(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> CmdResult {
    match &cli.command {
        Command::Constants => emit_reports(&constant_reports()?, cli.json, out),
        Command::VerifyLemmas { seed, strip_pairs, bathtub_sets, triples, restarts } => {
            let sizes = SweepSizes { strip_pairs: *strip_pairs, bathtub_sets: *bathtub_sets, triples: *triples, restarts: *restarts };
            emit_reports(&lemma_reports(*seed, &sizes)?, cli.json, out)
        }
        Command::Landscape { min, max, steps, out: path } => {
            let rows = landscape(*min, *max, *steps)?;
            match path {
                Some(p) => write_landscape_csv(&rows, BufWriter::new(File::create(p)?))?,
                None => write_landscape_csv(&rows, &mut *out)?,
            }
            Ok(true)
        }
        Command::Optimize { eps, restarts, seed, max_breakpoints, out: path, trace } => {
            cmd_optimize(*eps, *restarts, *seed, *max_breakpoints, path.as_ref(), trace.as_ref(), cli.json, out)
        }
        Command::Discretize { m, cap, eps, rank, seed, out: path } => {
            cmd_discretize(*m, *cap, *eps, *rank, *seed, path.as_ref(), cli.json, out)
        }
        Command::Witness { n, k, samples, seed, eps } => {
            let w = witness_mc(*n, *k, &perturbed_game(*eps)?, *samples, *seed)?;
            if cli.json {
                serde_json::to_writer_pretty(&mut *out, &w)?;
                writeln!(out)?;
            } else {
                let rows = [
                    ("n", w.n as f64),
                    ("k", w.k as f64),
                    ("samples", w.samples as f64),
                    ("coefficient", w.coefficient),
                    ("value_mean", w.value_mean),
                    ("value_stderr", w.value_stderr),
                    ("feasible_mean", w.feasible_mean),
                    ("feasible_stderr", w.feasible_stderr),
                    ("norm_variance", w.norm_variance),
                ];
                emit_pairs(&rows, out)?;
            }
            Ok(true)
        }
        Command::BoundChain { eps, out: path } => {
            let r = bound_chain(*eps)?;
            if let Some(p) = path {
                r.write_json(BufWriter::new(File::create(p)?))?;
            }
            if cli.json {
                r.write_json(&mut *out)?;
            } else {
                let rows = [
                    ("epsilon", r.epsilon),
                    ("val_dr", r.val_dr),
                    ("gap_term", r.gap_term),
                    ("val_eps_upper", r.val_eps_upper),
                    ("kg_lower", r.kg_lower),
                    ("improvement", r.improvement),
                ];
                emit_pairs(&rows, out)?;
            }
            Ok(true)
        }
        Command::Rotation { n, k, samples, seed } => {
            let r = rotation_invariance_mc(*n, *k, *samples, *seed)?;
            if cli.json {
                serde_json::to_writer_pretty(&mut *out, &r)?;
                writeln!(out)?;
            } else {
                let rows = [
                    ("val_original", r.val_original),
                    ("err_original", r.err_original),
                    ("val_rotated", r.val_rotated),
                    ("err_rotated", r.err_rotated),
                    ("z_score", r.z_score),
                ];
                emit_pairs(&rows, out)?;
            }
            Ok(r.agree)
        }
    }
}

fn emit_pairs(rows: &[(&str, f64)], out: &mut dyn Write) -> std::io::Result<()> {
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    for (name, v) in rows {
        writeln!(out, "{name:<width$}  {}", crate::numfmt::format_17(*v))?;
    }
    Ok(())
}

fn emit_reports(reports: &[VerificationReport], json: bool, out: &mut dyn Write) -> CmdResult {
    if json {
        serde_json::to_writer_pretty(&mut *out, reports)?;
        writeln!(out)?;
    } else {
        let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
        writeln!(out, "{:<width$}  {:>14}  {:>12}  {:>9}  {:<9}  {:<4}  statement", "name", "computed", "target", "tol", "cmp", "ok")?;
        for r in reports {
            let cmp = match r.comparison {
                Comparison::TwoSided => "two-sided",
                Comparison::AtMost => "<=",
                Comparison::AtLeast => ">=",
            };
            writeln!(
                out,
                "{:<width$}  {:>14}  {:>12}  {:>9}  {:<9}  {:<4}  {}",
                r.name,
                format_sig(r.computed, 9),
                format_sig(r.target, 6),
                format_sig(r.tolerance, 2),
                cmp,
                if r.passed { "pass" } else { "FAIL" },
                r.anchor
            )?;
        }
    }
    Ok(reports.iter().all(|r| r.passed))
}

/// Breakpoint `b` of the symmetric pattern `-C*, -b, 0, b, C*`.
pub fn symmetric_balanced_breakpoint() -> crate::Result<f64> {
    solve_balanced_breakpoint(&BalancedPattern::symmetric_three_flip(constants().c_star, -1.0)?)
}

/// Inner flips at `±0.12708` held fixed; returns the outer flip `b₂`.
pub const NESTED_INNER_BREAKPOINT: f64 = 0.12708;

pub fn nested_balanced_pattern() -> crate::Result<BalancedPattern> {
    let c = constants().c_star;
    let b1 = NESTED_INNER_BREAKPOINT;
    BalancedPattern::new(
        vec![
            Slot::Fixed(-c),
            Slot::Free { scale: -1.0 },
            Slot::Fixed(-b1),
            Slot::Fixed(0.0),
            Slot::Fixed(b1),
            Slot::Free { scale: 1.0 },
            Slot::Fixed(c),
        ],
        vec![0.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, 0.0],
        0.5 * (b1 + c),
    )
}

pub fn constant_reports() -> crate::Result<Vec<VerificationReport>> {
    use Comparison::*;
    let k = constants();
    let c = k.c_star;
    let p = phi(c);
    let u = StepFunction1D::strip_complement_sign(c)?;
    let pi3u = moment(&u, 3)?.powi(2) / 6.0;
    let strip_mass = 2.0 * Phi(c) - 1.0;
    let b = symmetric_balanced_breakpoint()?;
    let b2 = solve_balanced_breakpoint(&nested_balanced_pattern()?)?;
    Ok(vec![
        VerificationReport::new("c_star", c, 0.25573, 5e-5, TwoSided, "unique root of 4φ(C)² - 4Φ(-C) + 1 in (0, 1)"),
        VerificationReport::new("lambda_star", k.lambda_star, 0.19748, 5e-5, TwoSided, "λ* = 2C*φ(C*)"),
        VerificationReport::new("c_plus", k.c_plus, 2.0582, 1e-3, TwoSided, "second critical point of F, a local minimum"),
        VerificationReport::new("val_dr", k.val_dr, 0.4786, 1e-4, TwoSided, "Davie-Reeds game value F(C*)"),
        VerificationReport::new("k_dr", k.k_dr, 1.6769, 1e-4, TwoSided, "Davie-Reeds lower bound (1 - λ*)/val"),
        VerificationReport::new("lambda_identity", k.lambda_star - 2.0 * c * p, 0.0, 1e-9, TwoSided, "λ* - 2C*φ(C*) = 0"),
        VerificationReport::new("h_at_c_star", h_gap(c), 0.0, 1e-9, TwoSided, "H(C*) = 0"),
        VerificationReport::new("val_identity", k.val_dr - 4.0 * p * p * (1.0 - k.lambda_star), 0.0, 1e-9, TwoSided, "val = 4φ(C*)²(1 - λ*)"),
        VerificationReport::new("k_dr_identity", k.k_dr - 1.0 / (4.0 * p * p), 0.0, 1e-9, TwoSided, "K_DR = 1/(4φ(C*)²)"),
        VerificationReport::new("pi3_u_norm_sq", pi3u, 0.0868, 2e-4, TwoSided, "degree-3 energy of sign(x)·1{|x| ≥ C*}"),
        VerificationReport::new("strip_mass", strip_mass, 0.20184, 5e-5, TwoSided, "Gaussian mass of the strip 2Φ(C*) - 1"),
        VerificationReport::new("strip_mass_sq", strip_mass * strip_mass, 0.040745, 0.0, AtMost, "degree-3 energy ceiling of a strip restriction"),
        VerificationReport::new("symmetric_balanced_breakpoint", b, 0.18009, 2e-4, TwoSided, "balanced symmetric three-flip strip pattern"),
        VerificationReport::new("nested_outer_breakpoint", b2, 0.22101, 2e-4, TwoSided, "balanced pattern with inner flips at ±0.12708"),
    ])
}

#[derive(Debug, Clone, Copy)]
pub struct SweepSizes {
    pub strip_pairs: usize,
    pub bathtub_sets: usize,
    pub triples: usize,
    pub restarts: usize,
}

impl Default for SweepSizes {
    fn default() -> Self {
        Self { strip_pairs: 1000, bathtub_sets: 500, triples: 200, restarts: 12 }
    }
}

pub fn random_interval_union(rng: &mut ChaCha8Rng, max_intervals: usize) -> IntervalUnion {
    use rand::Rng;
    loop {
        let n = rng.random_range(1..=max_intervals);
        let v: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let a: f64 = rng.random_range(-3.5..3.5);
                (a, a + rng.random_range(0.01..2.5))
            })
            .collect();
        let s = IntervalUnion::new(v).expect("ordered endpoints");
        let m = s.gaussian_measure();
        if m > 1e-6 && m < 1.0 - 1e-6 {
            return s;
        }
    }
}

pub fn lemma_reports(seed: u64, sizes: &SweepSizes) -> crate::Result<Vec<VerificationReport>> {
    use Comparison::*;
    let k = constants();
    let c = k.c_star;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let (mut gap_min, mut h3_max) = (f64::INFINITY, 0.0f64);
    for _ in 0..sizes.strip_pairs {
        let h = random_balanced_h(&mut rng, c, 8);
        let (f, g) = build_strip_pair(&h, c)?;
        gap_min = gap_min.min(pi3_gap(&f, &g, c)?);
        h3_max = h3_max.max(moment(&h, 3)?.powi(2) / 6.0);
    }

    let mut bathtub_worst = 0.0f64;
    let mut bathtub_fail = 0usize;
    for _ in 0..sizes.bathtub_sets {
        let s = random_interval_union(&mut rng, 6);
        let r = bathtub_check(&s)?;
        if !r.passed {
            bathtub_fail += 1;
        }
        if r.eps > 1e-10 {
            bathtub_worst = bathtub_worst.max(r.sym_diff / r.eps.sqrt());
        }
    }

    let calculus = calculus_stability_scan(&[0.0, 1e-5, 1e-4, 1e-3, 9e-3])?;
    let calculus_worst = calculus
        .iter()
        .filter(|r| r.eta > 0.0)
        .map(|r| r.worst_distance / r.bound)
        .fold(0.0, f64::max);
    let calculus_all = calculus.iter().all(|r| r.passed);

    let game = dr_game();
    let mut value_worst = 0.0f64;
    for _ in 0..sizes.triples {
        let f = random_sign_function(&mut rng, 6, 3.0);
        let ft = random_sign_function(&mut rng, 6, 3.0);
        let g = random_sign_function(&mut rng, 6, 3.0);
        let (lhs, rhs) = value_stability_gap(&game, &f, &ft, &g)?;
        if rhs > 0.0 {
            value_worst = value_worst.max(lhs / rhs);
        } else if lhs > 0.0 {
            value_worst = f64::INFINITY;
        }
    }

    let search = optimize(&game, &SearchConfig { restarts: sizes.restarts, seed, ..SearchConfig::default() })?;
    let mut robust_worst = 0.0f64;
    for o in &search.outcomes {
        let a = stability_audit(&o.f, &o.g, 1.0)?;
        robust_worst = robust_worst.max(a.dist_f.max(a.dist_g) / a.bound);
    }
    let best_shape = strip_shape(&search.best_f, &search.best_g, c)?;

    let convexity_min = (0..=1000)
        .map(|i| convexity_margin(0.5 * k.val_dr * i as f64 / 1000.0))
        .fold(f64::INFINITY, f64::min);

    let balanced_upper = [0.0, 1e-6, 1e-4]
        .iter()
        .map(|&eps| -> crate::Result<f64> {
            let ve = search.best_val - eps * crate::strip::pi_k_inner(&search.best_f, &search.best_g, 3)?;
            Ok(ve - perturbed_upper_bound(eps)?)
        })
        .collect::<crate::Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);

    Ok(vec![
        VerificationReport::new("pi3_gap_min", gap_min, 0.046, 0.0, AtLeast, "degree-3 gap of balanced strip pairs is at least 0.046"),
        VerificationReport::new("h3_energy_max", h3_max, 0.040745, 0.0, AtMost, "degree-3 energy of a strip restriction is at most (2Φ(C*) - 1)²"),
        VerificationReport::new("bathtub_worst_ratio", bathtub_worst, 4.0, 0.0, AtMost, "γ(S △ S_C) ≤ 4√ε"),
        VerificationReport::new("bathtub_failures", bathtub_fail as f64, 0.0, 0.0, TwoSided, "γ(S △ S_C) ≤ 4√ε on every set"),
        VerificationReport::new("calculus_worst_ratio", calculus_worst, 1.0, 0.0, AtMost, "F(C) ≥ F(C*) - η implies |C - C*| ≤ 3√η"),
        VerificationReport::new("calculus_all_pass", if calculus_all { 1.0 } else { 0.0 }, 1.0, 0.0, TwoSided, "superlevel sets of F on the η grid"),
        VerificationReport::new("value_stability_worst_ratio", value_worst, 1.0, 1e-12, AtMost, "|val(f,g) - val(f̃,g)| ≤ ‖A‖·‖f - f̃‖₂"),
        VerificationReport::new("dr_robust_worst_ratio", robust_worst, 1.0, 0.0, AtMost, "near-optimal pairs lie within 6η^(1/4) of strip pairs"),
        VerificationReport::new("search_best_val", search.best_val, k.val_dr, 1e-9, AtMost, "no 1-D pair beats F(C*)"),
        VerificationReport::new("search_strip_defect", best_shape.defect, 1e-2, 0.0, AtMost, "optimizers are strip pairs"),
        VerificationReport::new("search_balance", best_shape.h_moment1.abs(), 1e-3, 0.0, AtMost, "optimizers have a balanced strip restriction"),
        VerificationReport::new("perturbed_bound_excess", balanced_upper, 0.0, 1e-9, AtMost, "val(A_ε) stays below the perturbed upper bound"),
        VerificationReport::new("convexity_margin_min", convexity_min, 0.0, 1e-14, AtLeast, "1/(val - x) lies above its tangent at 0"),
    ])
}

/// Strip diagnostics of `(f, g)` or `(-f, -g)`, whichever is closer; the
/// game is invariant under the joint sign flip.
pub fn strip_shape(f: &SignFunction1D, g: &SignFunction1D, c: f64) -> crate::Result<crate::strip::StripDiagnostics> {
    let a = is_strip_pair(f, g, c, 1e-2)?;
    let b = is_strip_pair(&f.negate(), &g.negate(), c, 1e-2)?;
    Ok(if b.defect < a.defect { b } else { a })
}

#[allow(clippy::too_many_arguments)]
fn cmd_optimize(
    eps: f64,
    restarts: usize,
    seed: u64,
    max_breakpoints: usize,
    path: Option<&PathBuf>,
    trace: Option<&PathBuf>,
    json: bool,
    out: &mut dyn Write,
) -> CmdResult {
    use Comparison::*;
    let game = perturbed_game(eps)?;
    let cfg = SearchConfig { max_breakpoints_per_function: max_breakpoints, restarts, seed, ..SearchConfig::default() };
    let r = optimize(&game, &cfg)?;
    if let Some(p) = path {
        let mut w = BufWriter::new(File::create(p)?);
        r.write_json(&cfg, &game, &mut w)?;
        writeln!(w)?;
    }
    if let Some(p) = trace {
        r.write_trace_csv(BufWriter::new(File::create(p)?))?;
    }
    let k = constants();
    let mut reports = vec![VerificationReport::new(
        "best_val_ceiling",
        r.best_val,
        perturbed_upper_bound(eps)?,
        1e-9,
        AtMost,
        "search value never exceeds the upper bound on val(A_ε)",
    )];
    if eps == 0.0 {
        reports.push(VerificationReport::new(
            "best_val_window",
            r.best_val,
            0.5 * (0.4780 + 0.47857),
            0.5 * (0.47857 - 0.4780),
            TwoSided,
            "search reaches the Davie-Reeds optimum",
        ));
        let d = strip_shape(&r.best_f, &r.best_g, k.c_star)?;
        reports.push(VerificationReport::new("strip_defect", d.defect, 1e-2, 0.0, AtMost, "optimizers are strip pairs"));
    }
    if json {
        #[derive(Serialize)]
        struct Doc<'a> {
            best_val: f64,
            best_f: &'a SignFunction1D,
            best_g: &'a SignFunction1D,
            converged: bool,
            checks: &'a [VerificationReport],
        }
        let doc = Doc { best_val: r.best_val, best_f: &r.best_f, best_g: &r.best_g, converged: r.converged, checks: &reports };
        serde_json::to_writer_pretty(&mut *out, &doc)?;
        writeln!(out)?;
        Ok(reports.iter().all(|x| x.passed))
    } else {
        writeln!(out, "best_val  {}", crate::numfmt::format_17(r.best_val))?;
        writeln!(out, "best_f    {}", serde_json::to_string(&r.best_f)?)?;
        writeln!(out, "best_g    {}", serde_json::to_string(&r.best_g)?)?;
        emit_reports(&reports, false, out)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_discretize(m: usize, cap: usize, eps: f64, rank: usize, seed: u64, path: Option<&PathBuf>, json: bool, out: &mut dyn Write) -> CmdResult {
    use Comparison::*;
    let game: GameCoefficients = perturbed_game(eps)?;
    let dg = build(&game, m, cap)?;
    if let Some(p) = path {
        dg.write_matrix(BufWriter::new(File::create(p)?))?;
    }
    let mut reports = Vec::new();
    if m <= crate::discretized::MAX_BRUTE_NODES {
        let b = brute_val(&dg)?;
        let cold = bca_sdp(&dg, rank, 500, seed)?;
        let warm = bca_sdp_from_signs(&dg, &b.argmax_f, &b.argmax_g, rank, 500)?;
        let sdp = cold.value.max(warm.value);
        if eps == 0.0 && m >= 20 {
            reports.push(VerificationReport::new("brute_val", b.val, constants().val_dr, 0.02, TwoSided, "discretized sign optimum near the continuum value"));
        }
        reports.push(VerificationReport::new("bca_above_brute", sdp - b.val, 0.0, 1e-9, AtLeast, "vector optimum dominates the sign optimum"));
        reports.push(VerificationReport::new("bca_over_brute", sdp / b.val, KRIVINE_BOUND, 1e-6, AtMost, "Grothendieck inequality with Krivine's constant"));
    } else {
        let cold = bca_sdp(&dg, rank, 500, seed)?;
        reports.push(VerificationReport::new("bca_sdp", cold.value, 0.0, 0.0, AtLeast, "vector heuristic value"));
    }
    emit_reports(&reports, json, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run(args.iter().copied(), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn comparisons() {
        use Comparison::*;
        assert!(VerificationReport::new("a", 1.0, 1.05, 0.1, TwoSided, "").passed);
        assert!(!VerificationReport::new("a", 1.2, 1.05, 0.1, TwoSided, "").passed);
        assert!(VerificationReport::new("a", 1.0, 1.0, 0.0, AtMost, "").passed);
        assert!(!VerificationReport::new("a", 1.0 + 1e-12, 1.0, 0.0, AtMost, "").passed);
        assert!(VerificationReport::new("a", 0.9, 1.0, 0.2, AtLeast, "").passed);
        assert!(!VerificationReport::new("a", 0.7, 1.0, 0.2, AtLeast, "").passed);
    }

    #[test]
    fn constants_all_pass() {
        let reports = constant_reports().unwrap();
        for r in &reports {
            assert!(r.passed, "{r:?}");
            assert!(!r.anchor.is_empty());
        }
        let (code, out, _) = run_capture(&["glab", "constants"]);
        assert_eq!(code, 0);
        assert!(out.contains("c_star") && out.contains("pi3_u_norm_sq") && out.contains("k_dr"));
        let (code, out, _) = run_capture(&["glab", "--json", "constants"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v[0]["name"], "c_star");
        assert_eq!(v[0]["comparison"], "two-sided");
    }

    #[test]
    fn usage_errors_exit_two() {
        let (code, _, err) = run_capture(&["glab", "landscape", "--steps", "many"]);
        assert_eq!(code, 2);
        assert!(err.contains("--steps"));
        assert_eq!(run_capture(&["glab", "frobnicate"]).0, 2);
        let (code, _, err) = run_capture(&["glab", "landscape", "--steps", "1"]);
        assert_eq!(code, 2);
        assert!(err.contains("steps"));
        assert_eq!(run_capture(&["glab", "witness", "--k", "2"]).0, 2);
        assert_eq!(run_capture(&["glab", "--help"]).0, 0);
    }

    #[test]
    fn bound_chain_outputs() {
        let (code, out, _) = run_capture(&["glab", "--json", "bound-chain", "--eps", "4e-11"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["improvement"].as_f64().unwrap() >= 1e-12);
        assert!(v["gap_term"].as_f64().unwrap() >= 0.01);
        // the chain does not apply once the gap term turns negative
        assert_eq!(run_capture(&["glab", "bound-chain", "--eps", "0.01"]).0, 1);
    }

    #[test]
    fn landscape_to_stdout() {
        let (code, out, _) = run_capture(&["glab", "landscape", "--min", "0", "--max", "1", "--steps", "3"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("C,F,Fprime\n0,0.439141,"));
    }

    #[test]
    fn balanced_patterns() {
        assert!((symmetric_balanced_breakpoint().unwrap() - 0.18009).abs() < 2e-4);
        let b2 = solve_balanced_breakpoint(&nested_balanced_pattern().unwrap()).unwrap();
        assert!((b2 - 0.22101).abs() < 2e-4);
    }
}
