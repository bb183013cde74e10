use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::config::{ExperimentKind, ResolvedConfig};
use super::output::{Fig1Row, InstanceInfo, RunRecord, Table1Row};
use super::seeds;
use crate::bilinear::{apply_zeta_coupling, gen_random_mstar, make_canonical_arms, EnvironmentSpec};
use crate::error::{Error, Result};
use crate::graph::{approx_max_cut, build_graph, Graph, GraphKind};
use crate::oracle::{compute_alphas, joint_search_size, Denominator, PairTable, ProblemConstants};
use crate::policy::{run_policy, Benchmark, PolicyKind, Problem, RunSettings};

/// Maps `f` over `0..jobs` on a scoped worker pool; results come back in index order.
pub fn par_map<T: Send>(jobs: usize, f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.max(1));
    if workers <= 1 {
        return (0..jobs).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<T>>>> = Mutex::new((0..jobs).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs {
                    break;
                }
                let out = f(i);
                slots.lock().expect("worker panicked")[i] = Some(out);
            });
        }
    });
    slots.into_inner().expect("worker panicked").into_iter().map(|s| s.expect("job not run")).collect()
}

/// Families reported by [`cmd_table1`], in row order.
pub fn table1_families(p: f64) -> [GraphKind; 5] {
    [GraphKind::Complete, GraphKind::Circle, GraphKind::Star, GraphKind::Matching, GraphKind::ErdosRenyi { p }]
}

/// `(m1 + m2)/m` of the greedy cut per family, with the α coefficients it implies.
/// The random family is averaged over `repetitions` draws.
pub fn cmd_table1(cfg: &ResolvedConfig) -> Result<Vec<Table1Row>> {
    let mut rows = Vec::new();
    for kind in table1_families(cfg.p) {
        let draws = if kind.is_random() { cfg.repetitions } else { 1 };
        let stats = par_map(draws, |k| {
            let g = build_graph(kind, cfg.n, &mut seeds::graph_rng(cfg.seed, k))?;
            Ok((g.m(), approx_max_cut(&g).counts().within_ratio()))
        })?;
        let m = stats.iter().map(|s| s.0 as f64).sum::<f64>() / draws as f64;
        let r = stats.iter().map(|s| s.1).sum::<f64>() / draws as f64;
        rows.push(Table1Row {
            family: kind.name().to_owned(),
            n: cfg.n,
            m,
            draws,
            within_ratio: r,
            alpha1_const: 0.5,
            alpha1_gamma: 0.5,
            alpha2_const: 1.0 - r,
            alpha2_gamma: r,
            alpha2_epsilon: 1.0,
        });
    }
    Ok(rows)
}

fn denominator_label(exact: usize, total: usize) -> &'static str {
    if exact == total {
        Denominator::Exact.label()
    } else if exact == 0 {
        Denominator::Surrogate.label()
    } else {
        "mixed"
    }
}

/// Sweeps the ζ grid on the complete graph with canonical arms; one `M★` per matrix
/// index, re-coupled at every grid point.
pub fn cmd_fig1(cfg: &ResolvedConfig) -> Result<Vec<Fig1Row>> {
    let g = build_graph(GraphKind::Complete, cfg.n, &mut seeds::graph_rng(cfg.seed, 0))?;
    let counts = approx_max_cut(&g).counts();
    let arms = make_canonical_arms::<f64>(cfg.d)?;
    let grid = cfg.zeta_grid();
    let per_matrix = par_map(cfg.matrices, |r| {
        let base = gen_random_mstar::<f64, _>(cfg.d, &mut seeds::matrix_rng(cfg.seed, r))?;
        grid.iter()
            .map(|&zeta| {
                let env = apply_zeta_coupling(&base, zeta)?;
                let table = PairTable::new(&arms, &env)?;
                ProblemConstants::compute(&g, &counts, &table, cfg.budget as u128)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let total = cfg.matrices;
    let mut rows = Vec::with_capacity(grid.len());
    for (z, &zeta) in grid.iter().enumerate() {
        let mean = |f: fn(&ProblemConstants) -> f64| per_matrix.iter().map(|c| f(&c[z])).sum::<f64>() / total as f64;
        let gamma = mean(|c| c.gamma);
        let epsilon = mean(|c| c.epsilon);
        let (alpha1, alpha2) = compute_alphas(gamma, epsilon, &counts, g.m());
        let exact = per_matrix.iter().filter(|c| c[z].denominator == Denominator::Exact).count();
        rows.push(Fig1Row {
            zeta,
            gamma,
            epsilon,
            alpha1,
            alpha2,
            delta_gap: mean(|c| c.delta_gap),
            matrices: total,
            exact_matrices: exact,
            denominator: denominator_label(exact, total).to_owned(),
        });
    }
    Ok(rows)
}

/// Regret logs of every (matrix, policy, repetition) triple plus per-matrix constants.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<RunRecord>,
    pub instances: Vec<InstanceInfo>,
}

fn instance(cfg: &ResolvedConfig, g: &Graph, r: usize) -> Result<Problem<f64>> {
    let base: EnvironmentSpec<f64> = gen_random_mstar(cfg.d, &mut seeds::matrix_rng(cfg.seed, r))?;
    let env = match cfg.zeta {
        Some(z) => apply_zeta_coupling(&base, z)?,
        None => base,
    };
    let env = env.with_sigma(cfg.sigma)?.with_seed(cfg.seed);
    Problem::new(g.clone(), make_canonical_arms(cfg.d)?, env)
}

/// Policy comparison on the complete graph: like [`cmd_run`], but the optimum must be exact.
pub fn cmd_fig2(cfg: &ResolvedConfig) -> Result<RunOutput> {
    let required = joint_search_size(cfg.d, cfg.n);
    if required > cfg.budget as u128 {
        return Err(Error::BudgetExceeded { required, budget: cfg.budget as u128 });
    }
    simulate(cfg)
}

/// Generic single experiment; falls back to the surrogate optimum when `Kⁿ` is too large.
pub fn cmd_run(cfg: &ResolvedConfig) -> Result<RunOutput> {
    simulate(cfg)
}

fn simulate(cfg: &ResolvedConfig) -> Result<RunOutput> {
    let g = build_graph(cfg.graph, cfg.n, &mut seeds::graph_rng(cfg.seed, 0))?;
    if g.m() == 0 {
        return Err(Error::InvalidGraph("drawn graph has no edges".into()));
    }
    let problems = (0..cfg.matrices).map(|r| instance(cfg, &g, r)).collect::<Result<Vec<_>>>()?;
    let constants = problems.iter().map(|p| p.constants(cfg.budget as u128)).collect::<Result<Vec<_>>>()?;

    let per_matrix = cfg.policies.len() * cfg.repetitions;
    let runs = par_map(cfg.matrices * per_matrix, |job| {
        let r = job / per_matrix;
        let policy = cfg.policies[(job % per_matrix) / cfg.repetitions];
        let rep = job % cfg.repetitions;
        let problem = &problems[r];
        let mut settings = RunSettings::new(policy, cfg.horizon);
        settings.lambda = cfg.lambda;
        settings.delta = cfg.delta;
        settings.radius_override = cfg.radius_override;
        if cfg.preload_theta_star {
            settings.preload_theta = Some(problem.env().theta_star().to_vec());
        }
        let bench = Benchmark::from_constants(&constants[r]);
        let run = run_policy(problem, &settings, &bench, &mut seeds::run_rng(cfg.seed, r, policy, rep))?;
        Ok(records(r, rep, policy, bench.opt_sum, &run.logs))
    })?;

    let instances = problems
        .iter()
        .zip(constants)
        .enumerate()
        .map(|(matrix, (p, constants))| InstanceInfo { matrix, env: p.env().to_json(), constants })
        .collect();
    Ok(RunOutput { records: runs.into_iter().flatten().collect(), instances })
}

fn records(
    matrix: usize,
    seed: usize,
    policy: PolicyKind,
    opt_sum: f64,
    logs: &[crate::policy::RoundLog<f64>],
) -> Vec<RunRecord> {
    logs.iter()
        .map(|l| RunRecord {
            matrix,
            seed,
            policy: policy.name().to_owned(),
            t: l.t,
            x: l.pair.x,
            xp: l.pair.xp,
            expected_global: l.expected_global,
            noisy_global: l.noisy_global,
            cum_regret: l.cum_regret,
            cum_alpha1_regret: l.cum_alpha1_regret,
            cum_alpha2_regret: l.cum_alpha2_regret,
            fraction_of_optimal: l.expected_global / opt_sum,
        })
        .collect()
}

/// Result of any command, ready to be written.
#[derive(Debug, Clone)]
pub enum Outcome {
    Table1(Vec<Table1Row>),
    Fig1(Vec<Fig1Row>),
    Fig2(RunOutput),
    Run(RunOutput),
}

pub fn execute(cfg: &ResolvedConfig) -> Result<Outcome> {
    Ok(match cfg.experiment {
        ExperimentKind::Table1 => Outcome::Table1(cmd_table1(cfg)?),
        ExperimentKind::Fig1 => Outcome::Fig1(cmd_fig1(cfg)?),
        ExperimentKind::Fig2 => Outcome::Fig2(cmd_fig2(cfg)?),
        ExperimentKind::Run => Outcome::Run(cmd_run(cfg)?),
    })
}
