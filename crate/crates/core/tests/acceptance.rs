//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero if any criterion fails. Run with `cargo test --test acceptance`.

use std::time::{Duration, Instant};

use gbb_core::bilinear::{
    expected_reward, gen_random_mstar, make_canonical_arms, vectorize_pair, ArmSet, EnvironmentSpec,
};
use gbb_core::estimator::{ConfidenceParams, NormConvention, RidgeState};
use gbb_core::experiments::{
    cmd_fig1, cmd_fig2, cmd_table1, execute, ExperimentConfig, Overrides, ResolvedConfig, RunRecord,
};
use gbb_core::graph::{approx_max_cut, build_graph, GraphKind};
use gbb_core::linalg::{dot, mat_vec};
use gbb_core::oracle::DEFAULT_BUDGET;
use gbb_core::policy::{run_policy, Benchmark, PolicyKind, Problem, RunSettings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Criterion = (&'static str, Duration, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn resolve(text: &str) -> ResolvedConfig {
    ExperimentConfig::from_json_str(text).unwrap().resolve(&Overrides::default()).unwrap()
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn table1() -> Verdict {
    let rows = cmd_table1(&resolve(r#"{"experiment":"table1"}"#)).unwrap();
    let r = |f: &str| rows.iter().find(|r| r.family == f).unwrap().within_ratio;
    let (complete, star, matching, circle, er) =
        (r("complete"), r("star"), r("matching"), r("circle"), r("erdos_renyi"));
    let pass =
        complete == 4900.0 / 9900.0 && star == 0.0 && matching == 0.0 && circle <= 0.02 && (0.43..=0.48).contains(&er);
    verdict(
        pass,
        format!(
            "complete={complete:.6} star={star} matching={matching} circle={circle} random(p=0.6, 100 draws)={er:.4}"
        ),
    )
}

fn cut_guarantee() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut violations = 0;
    for _ in 0..200 {
        let n = rng.random_range(2..=50);
        let p = rng.random_range(0.05..=1.0);
        let g = build_graph(GraphKind::ErdosRenyi { p }, n, &mut rng).unwrap();
        if 2 * approx_max_cut(&g).counts().cross() < g.m() {
            violations += 1;
        }
    }
    verdict(violations == 0, format!("200 graphs, {violations} violations"))
}

fn vectorization() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0f64;
    for _ in 0..1000 {
        let d = rng.random_range(1..=8);
        let x: Vec<f64> = (0..d).map(|_| normal(&mut rng)).collect();
        let xp: Vec<f64> = (0..d).map(|_| normal(&mut rng)).collect();
        let m: Vec<f64> = (0..d * d).map(|_| normal(&mut rng)).collect();
        let vec_m: Vec<f64> = (0..d * d).map(|k| m[(k % d) * d + k / d]).collect();
        let z = vectorize_pair(&x, &xp).unwrap();
        let mut direct = 0.0;
        for i in 0..d {
            for j in 0..d {
                direct += x[i] * m[i * d + j] * xp[j];
            }
        }
        worst = worst.max((dot(z.as_slice(), &vec_m) - direct).abs());
    }
    verdict(worst <= 1e-10, format!("1000 triples, max error {worst:.2e}"))
}

fn estimator_recovery() -> Verdict {
    let arms = make_canonical_arms::<f64>(3).unwrap();
    let env: EnvironmentSpec<f64> = gen_random_mstar(3, &mut ChaCha8Rng::seed_from_u64(13)).unwrap();
    let mut state = RidgeState::new(9, 1e-6).unwrap();
    for a in 0..3 {
        for b in 0..3 {
            let z = arms.edge_arm(a, b);
            state.update(z.as_slice(), expected_reward(&z, &env).unwrap()).unwrap();
        }
    }
    let theta = state.theta_hat().unwrap();
    let err = theta.iter().zip(env.theta_star()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    verdict(err <= 1e-4, format!("max |θ̂ − θ★| = {err:.2e}"))
}

fn ellipsoid_coverage() -> Verdict {
    let g = build_graph(GraphKind::Complete, 3, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let arms = make_canonical_arms::<f64>(2).unwrap();
    let (runs, t, sigma, delta) = (500, 50, 0.5, 0.1);
    let mut covered = 0;
    for run in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(14_000 + run);
        let env = gen_random_mstar::<f64, _>(2, &mut rng).unwrap().with_sigma(sigma).unwrap();
        let problem = Problem::new(g.clone(), arms.clone(), env).unwrap();
        let bench = Benchmark::from_constants(&problem.constants(DEFAULT_BUDGET).unwrap());
        let mut settings = RunSettings::new(PolicyKind::Oful, t);
        settings.delta = delta;
        let out = run_policy(&problem, &settings, &bench, &mut rng).unwrap();
        let env = problem.env();
        let params = ConfidenceParams::new(delta, sigma, env.frobenius_bound(), arms.norm_bound(), g.m())
            .unwrap()
            .with_convention(NormConvention::Classical);
        if out.state.contains_theta(&params, t as u64, env.theta_star()).unwrap() {
            covered += 1;
        }
    }
    let rate = covered as f64 / runs as f64;
    verdict(rate >= 0.9, format!("θ★ ∈ C_50 in {covered}/{runs} runs ({:.1}%)", 100.0 * rate))
}

fn ucb_exactness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let (mut worst_excess, mut worst_gap) = (f64::NEG_INFINITY, 0f64);
    for _ in 0..100 {
        let p = rng.random_range(2..=9);
        let mut state = RidgeState::new(p, rng.random_range(0.1..2.0)).unwrap();
        for _ in 0..rng.random_range(0..30) {
            let z: Vec<f64> = (0..p).map(|_| normal(&mut rng)).collect();
            state.update(&z, normal(&mut rng)).unwrap();
        }
        let post = state.posterior().unwrap();
        let v: Vec<f64> = (0..p).map(|_| normal(&mut rng)).collect();
        let radius = rng.random_range(0.0..3.0);
        let ucb = post.ucb_value(&v, radius).unwrap();
        for _ in 0..10_000 {
            let w: Vec<f64> = (0..p).map(|_| normal(&mut rng)).collect();
            let a_norm = dot(&w, &mat_vec(state.a_mat(), p, &w)).sqrt();
            let theta: Vec<f64> = post.theta_hat().iter().zip(&w).map(|(t, w)| t + radius * w / a_norm).collect();
            worst_excess = worst_excess.max(dot(&v, &theta) - ucb);
        }
        let best = post.ucb_maximizer(&v, radius).unwrap();
        worst_gap = worst_gap.max((dot(&v, &best) - ucb).abs());
    }
    verdict(
        worst_excess <= 1e-9 && worst_gap <= 1e-9,
        format!("max sample − ucb = {worst_excess:.2e}, |maximizer − ucb| = {worst_gap:.2e}"),
    )
}

fn brute_force_consistency() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut failures = Vec::new();
    let mut instances = 0;
    while instances < 50 {
        let n = rng.random_range(2..=6);
        let k = rng.random_range(2..=4);
        let d = rng.random_range(2..=3);
        let g = build_graph(GraphKind::ErdosRenyi { p: rng.random_range(0.3..=1.0) }, n, &mut rng).unwrap();
        if g.m() == 0 {
            continue;
        }
        let scale = (d as f64).sqrt();
        let arms: Vec<Vec<f64>> = (0..k).map(|_| (0..d).map(|_| rng.random::<f64>() / scale).collect()).collect();
        let arms = ArmSet::new(arms).unwrap();
        let env = gen_random_mstar::<f64, _>(d, &mut rng).unwrap();
        let problem = Problem::new(g.clone(), arms, env).unwrap();
        let c = problem.constants(DEFAULT_BUDGET).unwrap();
        instances += 1;

        let table = problem.table();
        let (bx, bxp) = c.best_pairs.star;
        let best = table.pair_value(bx, bxp);
        let assignment = c.opt_assignment.as_ref().unwrap();
        for &(i, j) in g.edges() {
            if table.pair_value(assignment[i], assignment[j]) > best + 1e-12 {
                failures.push(format!("#{instances}: edge ({i},{j}) beats the best pair"));
            }
        }
        if c.delta_gap < 0.0 {
            failures.push(format!("#{instances}: Δ = {}", c.delta_gap));
        }
        if !(0.0..=1.0).contains(&c.gamma) {
            failures.push(format!("#{instances}: γ = {}", c.gamma));
        }
        if !(0.0..=0.5).contains(&c.epsilon) {
            failures.push(format!("#{instances}: ε = {}", c.epsilon));
        }
        if c.counts.within_ratio() <= 0.5 && c.alpha2 < c.alpha1 + c.epsilon - 1e-12 {
            failures.push(format!("#{instances}: α₂ = {} < α₁ + ε = {}", c.alpha2, c.alpha1 + c.epsilon));
        }
    }
    verdict(failures.is_empty(), format!("50 instances, {} failures {:?}", failures.len(), failures))
}

fn fig1() -> Verdict {
    let rows = cmd_fig1(&resolve(r#"{"experiment":"fig1"}"#)).unwrap();
    let gamma_drops = rows.windows(2).filter(|w| w[1].gamma < w[0].gamma).count();
    let eps_rises = rows.windows(2).filter(|w| w[1].epsilon > w[0].epsilon).count();
    let alpha1_exact = rows.iter().all(|r| r.alpha1 == 0.5 + 0.5 * r.gamma);
    let alpha2_above = rows.iter().all(|r| r.alpha2 >= r.alpha1);
    let exact = rows.iter().all(|r| r.denominator == "exact");
    let pass = gamma_drops <= 2 && eps_rises <= 2 && alpha1_exact && alpha2_above && exact && rows.len() == 100;
    let drops_at: Vec<f64> = rows.windows(2).filter(|w| w[1].gamma < w[0].gamma).map(|w| w[1].zeta).collect();
    verdict(
        pass,
        format!(
            "{} grid points, γ drops {gamma_drops} (at ζ={drops_at:?}), ε rises {eps_rises}, \
             α₁=0.5+0.5γ: {alpha1_exact}, α₂≥α₁: {alpha2_above}, exact denominators: {exact}",
            rows.len()
        ),
    )
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn fig2() -> Verdict {
    let cfg = resolve(r#"{"experiment":"fig2"}"#);
    let out = cmd_fig2(&cfg).unwrap();
    let t_max = cfg.horizon;
    let tail = |p: &str| {
        mean(out.records.iter().filter(|r| r.policy == p && 10 * r.t > 9 * t_max).map(|r| r.fraction_of_optimal))
    };
    let (oful, improved) = (tail("oful"), tail("improved"));
    let explore =
        mean(out.records.iter().filter(|r| r.policy == "etc" && r.t <= t_max / 3).map(|r| r.fraction_of_optimal));
    let alpha2 = mean(out.instances.iter().map(|i| i.constants.alpha2));
    let pass = improved >= oful && improved >= alpha2 - 0.05 && explore <= oful.min(improved);
    verdict(
        pass,
        format!(
            "final-10% fraction: improved={improved:.4} oful={oful:.4}; mean α₂={alpha2:.4}; \
             etc exploration fraction={explore:.4}"
        ),
    )
}

fn sublinearity() -> Verdict {
    let per_round = |horizon: usize| -> (f64, f64) {
        let cfg = resolve(&format!(
            r#"{{"experiment":"run","graph":{{"family":"complete","n":4}},"d":3,"sigma":0.5,
                "T":{horizon},"repetitions":10,"policies":["oful"]}}"#
        ));
        let out = gbb_core::experiments::cmd_run(&cfg).unwrap();
        assert_eq!(out.instances[0].constants.denominator, gbb_core::Denominator::Exact);
        let last: Vec<&RunRecord> = out.records.iter().filter(|r| r.t == horizon).collect();
        let t = horizon as f64;
        (mean(last.iter().map(|r| r.cum_alpha1_regret / t)), mean(last.iter().map(|r| r.cum_regret / t)))
    };
    let (a500, r500) = per_round(500);
    let (a4000, r4000) = per_round(4000);
    verdict(
        a4000 <= 0.5 * a500,
        format!("R_α₁(T)/T: {a500:.4} (T=500) → {a4000:.4} (T=4000); plain R(T)/T: {r500:.4} → {r4000:.4}"),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        r#"{"experiment":"table1","repetitions":10}"#,
        r#"{"experiment":"fig1","matrices":3}"#,
        r#"{"experiment":"fig2","T":200,"repetitions":2,"matrices":2}"#,
        r#"{"experiment":"run","graph":{"family":"erdos_renyi","n":6,"p":0.5},"T":300,"repetitions":3,"sigma":0.4}"#,
    ];
    let mut mismatched = Vec::new();
    for (i, text) in configs.iter().enumerate() {
        let raw = ExperimentConfig::from_json_str(text).unwrap();
        let mut bytes = Vec::new();
        for pass in 0..2 {
            let out = dir.path().join(format!("{i}-{pass}"));
            let cfg = raw.resolve(&Overrides { out: Some(out.clone()), ..Default::default() }).unwrap();
            let (csv, _) = execute(&cfg).unwrap().write(&out, &cfg).unwrap();
            bytes.push(std::fs::read(csv).unwrap());
        }
        if bytes[0] != bytes[1] || bytes[0].is_empty() {
            mismatched.push(raw.experiment.name());
        }
    }
    verdict(mismatched.is_empty(), format!("table1, fig1, fig2, run rerun twice; mismatched: {mismatched:?}"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("table1_structure", Duration::from_secs(60), table1),
        ("cut_guarantee", Duration::from_secs(60), cut_guarantee),
        ("vectorization_oracle", Duration::from_secs(60), vectorization),
        ("estimator_recovery", Duration::from_secs(1), estimator_recovery),
        ("ellipsoid_coverage", Duration::from_secs(30), ellipsoid_coverage),
        ("ucb_exactness", Duration::from_secs(600), ucb_exactness),
        ("brute_force_consistency", Duration::from_secs(120), brute_force_consistency),
        ("fig1_scaled", Duration::from_secs(300), fig1),
        ("fig2_scaled", Duration::from_secs(900), fig2),
        ("sublinearity", Duration::from_secs(300), sublinearity),
        ("determinism", Duration::from_secs(600), determinism),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        let time_note = if in_time { String::new() } else { format!(" [over time limit {limit:?}]") };
        println!(
            "ACCEPTANCE {name}: {} ({:.2}s) {}{time_note}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
