//! End-to-end acceptance run: one line per criterion, non-zero exit if any fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use glab::cli::{constant_reports, symmetric_balanced_breakpoint, nested_balanced_pattern, random_interval_union};
use glab::davie_reeds::{constants, f_objective, f_prime, f_second, h_gap};
use glab::discretized::{
    bca_sdp, bca_sdp_from_signs, brute_val, build, rotation_invariance_mc, witness_mc, KRIVINE_BOUND,
};
use glab::game::{bound_chain, dr_game, perturbed_game, value_stability_gap, GameCoefficients};
use glab::search::{bathtub_check, calculus_stability_scan, optimize, stability_audit, SearchConfig, SearchResult};
use glab::special::{phi, Phi};
use glab::strip::{
    build_strip_pair, is_strip_pair, moment, pi3_gap, random_balanced_h, random_sign_function,
    solve_balanced_breakpoint, BalancedPattern, StepFunction1D,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<Vec<String>, String>;

struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self { failures: Vec::new(), notes: Vec::new() }
    }

    fn near(&mut self, name: &str, got: f64, want: f64, tol: f64) {
        self.notes.push(format!("{name}={got:.8}"));
        if (got - want).abs().is_nan() || (got - want).abs() > tol {
            self.failures.push(format!("{name}: {got} not within {tol} of {want}"));
        }
    }

    fn holds(&mut self, name: &str, ok: bool, detail: String) {
        self.notes.push(format!("{name}: {detail}"));
        if !ok {
            self.failures.push(format!("{name}: {detail}"));
        }
    }

    fn finish(self) -> Outcome {
        if self.failures.is_empty() {
            Ok(self.notes)
        } else {
            Err(self.failures.join("; "))
        }
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn constants_criterion() -> Outcome {
    let k = constants();
    let mut c = Check::new();
    c.near("C*", k.c_star, 0.25573, 5e-5);
    c.near("lambda*", k.lambda_star, 0.19748, 5e-5);
    c.near("C+", k.c_plus, 2.0582, 1e-3);
    c.near("val_dr", k.val_dr, 0.4786, 1e-4);
    c.near("K_DR", k.k_dr, 1.6769, 1e-4);
    c.finish()
}

fn identities_criterion() -> Outcome {
    let k = constants();
    let p = phi(k.c_star);
    let mut c = Check::new();
    c.near("lambda-2Cphi", k.lambda_star - 2.0 * k.c_star * p, 0.0, 1e-9);
    c.near("H(C*)", h_gap(k.c_star), 0.0, 1e-9);
    c.near("val-4phi^2(1-lambda)", k.val_dr - 4.0 * p * p * (1.0 - k.lambda_star), 0.0, 1e-9);
    c.near("K-1/(4phi^2)", k.k_dr - 1.0 / (4.0 * p * p), 0.0, 1e-9);
    c.finish()
}

fn degree3_criterion() -> Outcome {
    let k = constants();
    let mut c = Check::new();
    let u = StepFunction1D::strip_complement_sign(k.c_star).map_err(err)?;
    c.near("|Pi3 u|^2", moment(&u, 3).map_err(err)?.powi(2) / 6.0, 0.0868, 2e-4);
    let mass = 2.0 * Phi(k.c_star) - 1.0;
    c.near("strip mass", mass, 0.20184, 5e-5);
    c.holds("strip mass^2 <= 0.040745", mass * mass <= 0.040745, format!("{:.8}", mass * mass));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let h = random_balanced_h(&mut rng, k.c_star, 8);
        let (f, g) = build_strip_pair(&h, k.c_star).map_err(err)?;
        worst = worst.min(pi3_gap(&f, &g, k.c_star).map_err(err)?);
    }
    c.holds("min pi3_gap over 1000 pairs >= 0.046", worst >= 0.046, format!("{worst:.6}"));
    c.finish()
}

fn balanced_pair_check(c: &mut Check, label: &str, pattern: &BalancedPattern, b: f64) -> Result<(), String> {
    let cs = constants().c_star;
    let h = pattern.instantiate(b).map_err(err)?;
    let m1 = moment(&h, 1).map_err(err)?;
    let (f, g) = build_strip_pair(&h, cs).map_err(err)?;
    let d = is_strip_pair(&f, &g, cs, glab::strip::STRIP_PAIR_TOL).map_err(err)?;
    c.holds(
        &format!("{label} strip pair"),
        d.shape_ok && m1.abs() <= 1e-9,
        format!("defect={:.2e} |moment1|={:.2e}", d.defect, m1.abs()),
    );
    Ok(())
}

fn balanced_pattern_criterion() -> Outcome {
    let cs = constants().c_star;
    let mut c = Check::new();
    let b = symmetric_balanced_breakpoint().map_err(err)?;
    c.near("middle b", b, 0.18009, 2e-4);
    let sym = BalancedPattern::symmetric_three_flip(cs, -1.0).map_err(err)?;
    balanced_pair_check(&mut c, "middle", &sym, b)?;
    let outer = nested_balanced_pattern().map_err(err)?;
    let b2 = solve_balanced_breakpoint(&outer).map_err(err)?;
    c.near("outer b2", b2, 0.22101, 2e-4);
    balanced_pair_check(&mut c, "outer", &outer, b2)?;
    c.finish()
}

fn landscape_criterion() -> Outcome {
    let lam = constants().lambda_star;
    let mut c = Check::new();
    c.near("F(0)", f_objective(0.0, lam), 0.4391, 1e-4);
    c.near("F(0.5)", f_objective(0.5, lam), 0.4496, 1e-4);
    let grid: Vec<f64> = (0..=400).map(|i| f_prime(i as f64 * 1e-2, lam)).collect();
    let changes = grid.windows(2).filter(|w| w[0].signum() != w[1].signum() && w[0] != 0.0).count();
    c.holds("F' sign changes on [0,4]", changes == 2, changes.to_string());
    let worst = (0..=500).map(|i| f_second(i as f64 * 1e-3, lam)).fold(f64::NEG_INFINITY, f64::max);
    c.holds("F'' < -0.49 on [0,0.5]", worst < -0.49, format!("{worst:.6}"));
    c.finish()
}

fn search_config(seed: u64) -> SearchConfig {
    SearchConfig { max_breakpoints_per_function: 6, restarts: 40, seed, ..SearchConfig::default() }
}

fn search_criterion(base: &SearchResult) -> Outcome {
    let val = constants().val_dr;
    let mut c = Check::new();
    c.holds(
        "best_val in [0.4780, 0.47857]",
        (0.4780..=0.47857).contains(&base.best_val),
        format!("{:.10}", base.best_val),
    );
    let worst = base.outcomes.iter().map(|o| o.val).fold(f64::NEG_INFINITY, f64::max);
    c.holds("every restart <= F(C*) + 1e-9", worst <= val + 1e-9, format!("{worst:.12}"));
    for eps in [1e-3, 1e-4] {
        let r = optimize(&perturbed_game(eps).map_err(err)?, &search_config(1)).map_err(err)?;
        let slope = (base.best_val - r.best_val) / eps;
        c.holds(&format!("slope at eps={eps}"), (0.044..=0.090).contains(&slope), format!("{slope:.6}"));
    }
    c.finish()
}

fn bound_chain_criterion() -> Outcome {
    let r = bound_chain(4e-11).map_err(err)?;
    let mut c = Check::new();
    c.holds("gap term >= 0.01", r.gap_term >= 0.01, format!("{:.8}", r.gap_term));
    c.holds("improvement >= 1e-12", r.improvement >= 1e-12, format!("{:.6e}", r.improvement));
    c.finish()
}

fn stability_criterion(base: &SearchResult) -> Outcome {
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut bath_fail = 0;
    for _ in 0..500 {
        if !bathtub_check(&random_interval_union(&mut rng, 6)).map_err(err)?.passed {
            bath_fail += 1;
        }
    }
    c.holds("bathtub on 500 sets", bath_fail == 0, format!("{bath_fail} failures"));

    let rows = calculus_stability_scan(&[1e-5, 1e-4, 1e-3, 9e-3]).map_err(err)?;
    let bad = rows.iter().filter(|r| !r.passed).count();
    c.holds("calculus scan", bad == 0, format!("{bad} failing rows"));

    let mut audit_fail = 0;
    for o in &base.outcomes {
        let a = stability_audit(&o.f, &o.g, 1.0).map_err(err)?;
        if !a.passed {
            audit_fail += 1;
        }
    }
    c.holds("audit on search outcomes", audit_fail == 0, format!("{audit_fail}/{} failures", base.outcomes.len()));

    let game = dr_game();
    let mut vs_fail = 0;
    for _ in 0..200 {
        let f = random_sign_function(&mut rng, 6, 3.0);
        let ft = random_sign_function(&mut rng, 6, 3.0);
        let g = random_sign_function(&mut rng, 6, 3.0);
        let (lhs, rhs) = value_stability_gap(&game, &f, &ft, &g).map_err(err)?;
        if lhs > rhs + 1e-12 {
            vs_fail += 1;
        }
    }
    c.holds("value stability on 200 triples", vs_fail == 0, format!("{vs_fail} failures"));
    c.finish()
}

fn random_game(rng: &mut ChaCha8Rng, cap: usize) -> GameCoefficients {
    let explicit: BTreeMap<usize, f64> = (0..=cap).map(|k| (k, rng.random_range(-1.0..1.0))).collect();
    GameCoefficients::new(explicit, rng.random_range(-0.5..0.5)).expect("finite coefficients")
}

fn discretized_criterion() -> Outcome {
    let mut c = Check::new();
    let dg = build(&dr_game(), 20, 12).map_err(err)?;
    let b = brute_val(&dg).map_err(err)?;
    c.near("brute_val(dr_game)", b.val, 0.4786, 0.02);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_ratio = 0.0f64;
    let mut fails = 0;
    for i in 0..20u64 {
        let dg = build(&random_game(&mut rng, 12), 20, 12).map_err(err)?;
        let b = brute_val(&dg).map_err(err)?;
        let cold = bca_sdp(&dg, 8, 500, i).map_err(err)?;
        let warm = bca_sdp_from_signs(&dg, &b.argmax_f, &b.argmax_g, 8, 500).map_err(err)?;
        let sdp = cold.value.max(warm.value);
        if !(b.val <= sdp + 1e-12 && sdp <= KRIVINE_BOUND * b.val + 1e-6) {
            fails += 1;
        }
        worst_ratio = worst_ratio.max(sdp / b.val);
    }
    c.holds("sandwich on 20 instances", fails == 0, format!("{fails} failures, worst ratio {worst_ratio:.4}"));
    c.finish()
}

fn witness_criterion() -> Outcome {
    let mut c = Check::new();
    let game = dr_game();
    let c3 = game.coefficient(3).abs();
    let w = witness_mc(400, 3, &game, 100_000, 10).map_err(err)?;
    c.near("k=3 witness vs |c3|", w.feasible_mean, c3, 0.05);

    let ns = [50usize, 100, 200, 400];
    let vars: Vec<f64> = ns
        .iter()
        .map(|&n| witness_mc(n, 3, &game, 100_000, 11).map(|w| w.norm_variance))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let monotone = vars.windows(2).all(|p| p[1] < p[0]);
    let scaled: Vec<f64> = ns.iter().zip(&vars).map(|(&n, v)| n as f64 * v).collect();
    let spread = scaled.iter().cloned().fold(0.0, f64::max) / scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    c.holds("Var decreasing in n", monotone, format!("{vars:.5?}"));
    c.holds("n*Var within factor 3", spread <= 3.0, format!("spread {spread:.3}"));

    for k in [1usize, 3] {
        let r = rotation_invariance_mc(5, k, 200_000, 12).map_err(err)?;
        c.holds(&format!("rotation n=5 k={k}"), r.z_score.abs() <= 4.0 && r.agree, format!("z={:.3}", r.z_score));
    }
    c.finish()
}

fn report(n: usize, name: &str, budget: Duration, run: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let out = run();
    let dt = t.elapsed();
    let in_time = dt <= budget;
    let (ok, detail) = match out {
        Ok(notes) => (in_time, notes.join(", ")),
        Err(e) => (false, e),
    };
    let time_note = if in_time { String::new() } else { format!(" [over budget {budget:?}]") };
    println!(
        "criterion {n:>2} {name:<22} {} ({:.2}s){time_note}  {detail}",
        if ok { "PASS" } else { "FAIL" },
        dt.as_secs_f64()
    );
    ok
}

fn main() {
    // the cli reports reuse the same constants; a failure there is a bug in one of the two paths
    let cli_ok = constant_reports().map(|r| r.iter().all(|x| x.passed)).unwrap_or(false);

    let mut all = cli_ok;
    all &= report(1, "constants", Duration::from_secs(1), constants_criterion);
    all &= report(2, "identities", Duration::from_secs(1), identities_criterion);
    all &= report(3, "degree-3 quantities", Duration::from_secs(10), degree3_criterion);
    all &= report(4, "balanced patterns", Duration::from_secs(10), balanced_pattern_criterion);
    all &= report(5, "landscape", Duration::from_secs(10), landscape_criterion);

    let t = Instant::now();
    let base = optimize(&dr_game(), &search_config(1));
    let base_time = t.elapsed();
    match base {
        Ok(base) => {
            all &= report(6, "search", Duration::from_secs(120).saturating_sub(base_time), || search_criterion(&base));
            all &= report(7, "bound chain", Duration::from_secs(1), bound_chain_criterion);
            all &= report(8, "stability suites", Duration::from_secs(60), || stability_criterion(&base));
        }
        Err(e) => {
            println!("criterion  6 search                 FAIL  {e}");
            all = false;
            all &= report(7, "bound chain", Duration::from_secs(1), bound_chain_criterion);
            println!("criterion  8 stability suites       FAIL  no search outcomes");
        }
    }
    all &= report(9, "discretized", Duration::from_secs(120), discretized_criterion);
    all &= report(10, "witness monte carlo", Duration::from_secs(180), witness_criterion);

    if !cli_ok {
        println!("cli constant reports disagree with the library");
    }
    if !all {
        std::process::exit(1);
    }
}
