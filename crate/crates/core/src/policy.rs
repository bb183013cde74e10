//! Sequential policies: optimistic pair selection (plain and cut-weighted),
//! explore-then-commit, and the round loop that allocates the chosen pair
//! over the max-cut split and feeds every edge reward to the estimator.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bilinear::{gaussian, ArmSet, EdgeArm, EnvironmentSpec};
use crate::error::{check_dim, Error, Result};
use crate::estimator::{ConfidenceParams, Posterior, RidgeState};
use crate::graph::{approx_max_cut, CutCounts, Graph, Partition, Side};
use crate::linalg::dot;
use crate::oracle::{alpha_regret_increment, PairTable, ProblemConstants};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// Optimistic pair on `z_xx' + z_x'x`.
    Oful,
    /// Optimistic pair on the cut-weighted objective.
    Improved,
    /// Uniform pair exploration for `⌊T/3⌋` rounds, then the estimated best pair.
    Etc,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::Oful, PolicyKind::Improved, PolicyKind::Etc];

    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Oful => "oful",
            PolicyKind::Improved => "improved",
            PolicyKind::Etc => "etc",
        }
    }
}

/// Arm indices for `V1` (`x`) and `V2` (`xp`) plus the objective value that selected them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairChoice<S> {
    pub x: usize,
    pub xp: usize,
    pub ucb: S,
}

/// One weighted edge-arm `weight · z_ab` of a selection objective.
pub type Term<S> = (usize, usize, S);

fn oful_terms<S: Scalar>(a: usize, b: usize) -> [Term<S>; 2] {
    [(a, b, S::one()), (b, a, S::one())]
}

fn weighted_terms<S: Scalar>(a: usize, b: usize, c: &CutCounts) -> [Term<S>; 4] {
    let w = |n: usize| S::from_usize_exact(n);
    [(a, b, w(c.m12)), (b, a, w(c.m21)), (a, a, w(c.m1)), (b, b, w(c.m2))]
}

/// Optimistic value `⟨v, θ̂⟩ + radius·‖v‖_{A⁻¹}` of `v = Σ weight·z_ab`.
pub trait OptimisticScorer<S> {
    fn arm_count(&self) -> usize;
    fn score(&self, terms: &[Term<S>], radius: S) -> S;
}

/// Scores by materializing `v` and querying a factorized ridge state.
pub struct ExactScorer<'a, S> {
    posterior: Posterior<S>,
    edge_arms: &'a EdgeArmTable<S>,
}

impl<'a, S: Scalar> ExactScorer<'a, S> {
    pub fn new(state: &RidgeState<S>, edge_arms: &'a EdgeArmTable<S>) -> Result<Self> {
        check_dim(state.dim(), edge_arms.dim())?;
        Ok(Self { posterior: state.posterior()?, edge_arms })
    }
}

impl<S: Scalar> OptimisticScorer<S> for ExactScorer<'_, S> {
    fn arm_count(&self) -> usize {
        self.edge_arms.k
    }

    fn score(&self, terms: &[Term<S>], radius: S) -> S {
        let mut v = vec![S::zero(); self.edge_arms.dim()];
        for &(a, b, w) in terms {
            for (vi, &zi) in v.iter_mut().zip(self.edge_arms.get(a, b).as_slice()) {
                *vi += w * zi;
            }
        }
        self.posterior.ucb_value(&v, radius).expect("dimensions checked at construction")
    }
}

/// All `K²` edge-arms of an arm set, indexed `a·K + b`.
#[derive(Debug, Clone)]
pub struct EdgeArmTable<S> {
    k: usize,
    dim: usize,
    arms: Vec<EdgeArm<S>>,
}

impl<S: Scalar> EdgeArmTable<S> {
    pub fn new(arms: &ArmSet<S>) -> Self {
        let k = arms.len();
        let edge_arms = (0..k * k).map(|e| arms.edge_arm(e / k, e % k)).collect();
        Self { k, dim: arms.dim() * arms.dim(), arms: edge_arms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize) -> &EdgeArm<S> {
        &self.arms[a * self.k + b]
    }
}

/// Incremental scorer over the finite edge-arm set.
///
/// Keeps `G = Zᵀ A⁻¹ Z` and `h = Zᵀ θ̂`, where the columns of `Z` are the `K²`
/// edge-arms, and applies Sherman–Morrison to both when an edge-arm is
/// observed. Each update costs `O(K⁴)` regardless of `d`.
#[derive(Debug, Clone)]
pub struct GramCache<S> {
    k: usize,
    gram: Vec<S>,
    fitted: Vec<S>,
}

impl<S: Scalar> GramCache<S> {
    pub fn from_state(state: &RidgeState<S>, edge_arms: &EdgeArmTable<S>) -> Result<Self> {
        check_dim(state.dim(), edge_arms.dim())?;
        let post = state.posterior()?;
        let k = edge_arms.k;
        let e = k * k;
        let whitened: Vec<Vec<S>> = (0..e).map(|i| post.whiten(edge_arms.arms[i].as_slice())).collect();
        let mut gram = vec![S::zero(); e * e];
        for i in 0..e {
            for j in i..e {
                let v = dot(&whitened[i], &whitened[j]);
                gram[i * e + j] = v;
                gram[j * e + i] = v;
            }
        }
        let fitted = (0..e).map(|i| dot(edge_arms.arms[i].as_slice(), post.theta_hat())).collect();
        Ok(Self { k, gram, fitted })
    }

    fn edges(&self) -> usize {
        self.k * self.k
    }

    /// Records `count` pulls of edge-arm `(a, b)` whose rewards sum to `reward_sum`.
    pub fn observe(&mut self, a: usize, b: usize, count: usize, reward_sum: S) {
        if count == 0 {
            return;
        }
        let e = self.edges();
        let idx = a * self.k + b;
        let col: Vec<S> = (0..e).map(|i| self.gram[i * e + idx]).collect();
        let c = S::from_usize_exact(count);
        let denom = S::one() + c * col[idx];
        let scale = c / denom;
        let h_idx = self.fitted[idx];
        for i in 0..e {
            let ci = col[i] * scale;
            if ci != S::zero() {
                let row = &mut self.gram[i * e..(i + 1) * e];
                for (g, &cj) in row.iter_mut().zip(&col) {
                    *g -= ci * cj;
                }
            }
            self.fitted[i] += col[i] * (reward_sum - c * h_idx) / denom;
        }
    }

    /// `⟨z_ab, θ̂⟩`.
    pub fn fitted(&self, a: usize, b: usize) -> S {
        self.fitted[a * self.k + b]
    }

    /// `z_abᵀ A⁻¹ z_cd`.
    pub fn gram(&self, ab: (usize, usize), cd: (usize, usize)) -> S {
        let e = self.edges();
        self.gram[(ab.0 * self.k + ab.1) * e + cd.0 * self.k + cd.1]
    }
}

impl<S: Scalar> OptimisticScorer<S> for GramCache<S> {
    fn arm_count(&self) -> usize {
        self.k
    }

    fn score(&self, terms: &[Term<S>], radius: S) -> S {
        let mut mean = S::zero();
        let mut quad = S::zero();
        for &(a, b, w) in terms {
            mean += w * self.fitted(a, b);
            for &(c, d, u) in terms {
                quad += w * u * self.gram((a, b), (c, d));
            }
        }
        mean + radius * quad.max(S::zero()).sqrt()
    }
}

/// Lexicographically first maximizer over all ordered arm pairs.
fn select_with<S: Scalar, const N: usize>(
    scorer: &impl OptimisticScorer<S>,
    radius: S,
    terms: impl Fn(usize, usize) -> [Term<S>; N],
) -> PairChoice<S> {
    let k = scorer.arm_count();
    let mut best = PairChoice { x: 0, xp: 0, ucb: scorer.score(&terms(0, 0), radius) };
    for a in 0..k {
        for b in 0..k {
            let v = scorer.score(&terms(a, b), radius);
            if v > best.ucb {
                best = PairChoice { x: a, xp: b, ucb: v };
            }
        }
    }
    best
}

fn check_radius<S: Scalar>(radius: S) -> Result<()> {
    if radius >= S::zero() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("radius {radius} must be >= 0")))
    }
}

/// Pair maximizing the optimistic value of `z_xx' + z_x'x`.
pub fn select_pair_oful<S: Scalar>(state: &RidgeState<S>, arms: &ArmSet<S>, radius: S) -> Result<PairChoice<S>> {
    check_radius(radius)?;
    let table = EdgeArmTable::new(arms);
    let scorer = ExactScorer::new(state, &table)?;
    Ok(select_oful_with(&scorer, radius))
}

/// Pair maximizing the optimistic value of
/// `m12·z_xx' + m21·z_x'x + m1·z_xx + m2·z_x'x'`.
pub fn select_pair_improved<S: Scalar>(
    state: &RidgeState<S>,
    arms: &ArmSet<S>,
    radius: S,
    counts: &CutCounts,
) -> Result<PairChoice<S>> {
    check_radius(radius)?;
    check_counts(counts)?;
    let table = EdgeArmTable::new(arms);
    let scorer = ExactScorer::new(state, &table)?;
    Ok(select_improved_with(&scorer, radius, counts))
}

fn check_counts(counts: &CutCounts) -> Result<()> {
    if counts.m12 == counts.m21 {
        Ok(())
    } else {
        Err(Error::InvalidPartition(format!("m12 = {} differs from m21 = {}", counts.m12, counts.m21)))
    }
}

pub fn select_oful_with<S: Scalar>(scorer: &impl OptimisticScorer<S>, radius: S) -> PairChoice<S> {
    select_with(scorer, radius, oful_terms)
}

pub fn select_improved_with<S: Scalar>(
    scorer: &impl OptimisticScorer<S>,
    radius: S,
    counts: &CutCounts,
) -> PairChoice<S> {
    select_with(scorer, radius, |a, b| weighted_terms(a, b, counts))
}

/// Arm index per node: `x` on `V1`, `xp` on `V2`.
pub fn allocate<S>(partition: &Partition, pair: &PairChoice<S>) -> Vec<usize> {
    partition.sides().iter().map(|&s| if s == Side::V1 { pair.x } else { pair.xp }).collect()
}

/// Edge-arm `(arm of i, arm of j)` for each edge, in graph edge order.
pub fn edge_assignment(g: &Graph, node_arms: &[usize]) -> Vec<(usize, usize)> {
    g.edges().iter().map(|&(i, j)| (node_arms[i], node_arms[j])).collect()
}

/// A validated instance: graph, arms, `M★`, the greedy cut, and the true pair values.
#[derive(Debug, Clone)]
pub struct Problem<S> {
    graph: Graph,
    arms: ArmSet<S>,
    env: EnvironmentSpec<S>,
    partition: Partition,
    table: PairTable<S>,
}

impl<S: Scalar> Problem<S> {
    pub fn new(graph: Graph, arms: ArmSet<S>, env: EnvironmentSpec<S>) -> Result<Self> {
        env.check_arms(&arms)?;
        let partition = approx_max_cut(&graph);
        let table = PairTable::new(&arms, &env)?;
        Ok(Self { graph, arms, env, partition, table })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn arms(&self) -> &ArmSet<S> {
        &self.arms
    }

    pub fn env(&self) -> &EnvironmentSpec<S> {
        &self.env
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn table(&self) -> &PairTable<S> {
        &self.table
    }

    pub fn constants(&self, budget: u128) -> Result<ProblemConstants> {
        ProblemConstants::compute(&self.graph, &self.partition.counts(), &self.table, budget)
    }
}

/// Reference values the regret columns are measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Benchmark<S> {
    pub opt_sum: S,
    pub alpha1: S,
    pub alpha2: S,
}

impl<S: Scalar> Benchmark<S> {
    pub fn from_constants(c: &ProblemConstants) -> Self {
        Self { opt_sum: S::lit(c.opt_sum), alpha1: S::lit(c.alpha1), alpha2: S::lit(c.alpha2) }
    }
}

/// Knobs of a single policy run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings<S> {
    pub policy: PolicyKind,
    pub horizon: usize,
    pub lambda: S,
    pub delta: S,
    /// Replaces the confidence radius in every round (test hook).
    pub radius_override: Option<S>,
    /// Initial estimate, see [`RidgeState::preload_theta`] (test hook).
    pub preload_theta: Option<Vec<S>>,
}

impl<S: Scalar> RunSettings<S> {
    pub fn new(policy: PolicyKind, horizon: usize) -> Self {
        Self { policy, horizon, lambda: S::one(), delta: S::lit(0.1), radius_override: None, preload_theta: None }
    }
}

/// Per-round record of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundLog<S> {
    pub t: usize,
    pub pair: PairChoice<S>,
    /// `Σ_(i,j) ⟨z_t^(i,j), θ★⟩`.
    pub expected_global: S,
    /// Sum of the sampled edge rewards.
    pub noisy_global: S,
    pub cum_regret: S,
    pub cum_alpha1_regret: S,
    pub cum_alpha2_regret: S,
}

/// Logs plus the estimator after the last round.
#[derive(Debug, Clone)]
pub struct PolicyRun<S> {
    pub logs: Vec<RoundLog<S>>,
    pub state: RidgeState<S>,
}

/// Runs one policy for `settings.horizon` rounds. Each round selects a pair,
/// allocates it over the greedy cut, samples all `m` edge rewards in graph
/// edge order and feeds each `(z, y)` to the estimator.
pub fn run_policy<S: Scalar, R: Rng + ?Sized>(
    problem: &Problem<S>,
    settings: &RunSettings<S>,
    benchmark: &Benchmark<S>,
    rng: &mut R,
) -> Result<PolicyRun<S>> {
    if settings.horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be >= 1".into()));
    }
    let g = &problem.graph;
    let arms = &problem.arms;
    let env = &problem.env;
    let k = arms.len();
    let counts = problem.partition.counts();
    let edge_arms = EdgeArmTable::new(arms);

    let mut state = RidgeState::new(edge_arms.dim(), settings.lambda)?;
    if let Some(theta) = &settings.preload_theta {
        state.preload_theta(theta)?;
    }
    let mut cache = GramCache::from_state(&state, &edge_arms)?;
    let params = ConfidenceParams::new(settings.delta, env.sigma(), env.frobenius_bound(), arms.norm_bound(), g.m())?;

    let explore_rounds = settings.horizon / 3;
    let mut committed: Option<PairChoice<S>> = None;
    let mut group_count = vec![0usize; k * k];
    let mut group_sum = vec![S::zero(); k * k];
    let mut logs = Vec::with_capacity(settings.horizon);
    let (mut cum, mut cum1, mut cum2) = (S::zero(), S::zero(), S::zero());

    for t in 1..=settings.horizon {
        // round t decides with the confidence set built from rounds 1..t-1
        let radius = settings.radius_override.unwrap_or_else(|| state.beta_radius(&params, (t as u64 - 1).max(1)));
        let pair = match settings.policy {
            PolicyKind::Oful => select_oful_with(&cache, radius),
            PolicyKind::Improved => select_improved_with(&cache, radius, &counts),
            PolicyKind::Etc if t <= explore_rounds => {
                let e = rng.random_range(0..k * k);
                let (a, b) = (e / k, e % k);
                PairChoice { x: a, xp: b, ucb: cache.score(&oful_terms(a, b), S::zero()) }
            }
            PolicyKind::Etc => *committed.get_or_insert_with(|| select_oful_with(&cache, S::zero())),
        };

        let node_arms = allocate(&problem.partition, &pair);
        let mut expected_global = S::zero();
        let mut noisy_global = S::zero();
        for &(i, j) in g.edges() {
            let (a, b) = (node_arms[i], node_arms[j]);
            let mean = problem.table.get(a, b);
            let y = mean + env.sigma() * gaussian::<S, _>(rng);
            state.update(edge_arms.get(a, b).as_slice(), y)?;
            expected_global += mean;
            noisy_global += y;
            group_count[a * k + b] += 1;
            group_sum[a * k + b] += y;
        }
        for e in 0..k * k {
            if group_count[e] > 0 {
                cache.observe(e / k, e % k, group_count[e], group_sum[e]);
                group_count[e] = 0;
                group_sum[e] = S::zero();
            }
        }

        cum += alpha_regret_increment(S::one(), benchmark.opt_sum, expected_global);
        cum1 += alpha_regret_increment(benchmark.alpha1, benchmark.opt_sum, expected_global);
        cum2 += alpha_regret_increment(benchmark.alpha2, benchmark.opt_sum, expected_global);
        logs.push(RoundLog {
            t,
            pair,
            expected_global,
            noisy_global,
            cum_regret: cum,
            cum_alpha1_regret: cum1,
            cum_alpha2_regret: cum2,
        });
    }
    Ok(PolicyRun { logs, state })
}
