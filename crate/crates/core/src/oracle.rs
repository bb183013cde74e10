//! Ground-truth quantities computed from the hidden `M★`: the optimal joint
//! arm, the best plain and count-weighted arm pairs, and the problem
//! constants `γ`, `ε`, `Δ`, `α₁`, `α₂` that set the achievable regret level.

use serde::{Deserialize, Serialize};

use crate::bilinear::{ArmSet, EnvironmentSpec};
use crate::error::{check_dim, Error, Result};
use crate::graph::{CutCounts, Graph, Side};
use crate::scalar::Scalar;

/// Default cap on the number of joint assignments the brute force may visit.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// `values[a][b] = x_aᵀ M★ x_b` for every ordered pair of arm indices.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTable<S> {
    k: usize,
    values: Vec<S>,
}

impl<S: Scalar> PairTable<S> {
    pub fn new(arms: &ArmSet<S>, env: &EnvironmentSpec<S>) -> Result<Self> {
        check_dim(env.dim(), arms.dim())?;
        let k = arms.len();
        let mut values = Vec::with_capacity(k * k);
        for a in 0..k {
            for b in 0..k {
                values.push(env.bilinear(arms.arm(a), arms.arm(b))?);
            }
        }
        Ok(Self { k, values })
    }

    pub fn arms(&self) -> usize {
        self.k
    }

    pub fn get(&self, a: usize, b: usize) -> S {
        self.values[a * self.k + b]
    }

    /// `⟨z_ab + z_ba, θ★⟩`, the reward of one undirected edge carrying `(a, b)`.
    pub fn pair_value(&self, a: usize, b: usize) -> S {
        self.get(a, b) + self.get(b, a)
    }

    /// `⟨m12·z_ab + m21·z_ba + m1·z_aa + m2·z_bb, θ★⟩`.
    pub fn weighted_value(&self, counts: &CutCounts, a: usize, b: usize) -> S {
        let w = |c: usize| S::from_usize_exact(c);
        w(counts.m12) * self.get(a, b)
            + w(counts.m21) * self.get(b, a)
            + w(counts.m1) * self.get(a, a)
            + w(counts.m2) * self.get(b, b)
    }

    /// Expected global reward of one arm index per node.
    pub fn assignment_value(&self, g: &Graph, assignment: &[usize]) -> S {
        g.edges().iter().map(|&(i, j)| self.get(assignment[i], assignment[j])).sum()
    }

    /// Expected global reward when `V1` plays `a` and `V2` plays `b`.
    pub fn allocation_value(&self, g: &Graph, sides: &[Side], a: usize, b: usize) -> S {
        let pick = |s: Side| if s == Side::V1 { a } else { b };
        g.edges().iter().map(|&(i, j)| self.get(pick(sides[i]), pick(sides[j]))).sum()
    }

    /// Lexicographically first maximizer of `score` over all `K²` ordered pairs.
    pub fn argmax_pair(&self, mut score: impl FnMut(usize, usize) -> S) -> ((usize, usize), S) {
        let mut best = (0, 0);
        let mut best_val = score(0, 0);
        for a in 0..self.k {
            for b in 0..self.k {
                let v = score(a, b);
                if v > best_val {
                    best_val = v;
                    best = (a, b);
                }
            }
        }
        (best, best_val)
    }
}

/// An optimal joint arm and its expected global reward.
#[derive(Debug, Clone, PartialEq)]
pub struct JointOptimum<S> {
    /// Arm index per node.
    pub assignment: Vec<usize>,
    pub opt_sum: S,
}

/// Exhaustive search over `Kⁿ` joint arms. Returns the lexicographically
/// smallest maximizer; values within a relative `1e-12` count as ties so
/// that summation order cannot reorder equal optima.
pub fn optimal_joint_arm<S: Scalar>(
    g: &Graph,
    arms: &ArmSet<S>,
    env: &EnvironmentSpec<S>,
    budget: u128,
) -> Result<JointOptimum<S>> {
    let table = PairTable::new(arms, env)?;
    optimal_joint_arm_from_table(g, &table, budget)
}

pub fn joint_search_size(k: usize, n: usize) -> u128 {
    (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX)
}

pub fn optimal_joint_arm_from_table<S: Scalar>(
    g: &Graph,
    table: &PairTable<S>,
    budget: u128,
) -> Result<JointOptimum<S>> {
    let n = g.n();
    let k = table.arms();
    let required = joint_search_size(k, n);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    // earlier[i]: neighbors j < i, whose edges (i,j) and (j,i) are settled when i is placed
    let earlier: Vec<Vec<usize>> =
        (0..n).map(|i| g.neighbors(i).iter().copied().filter(|&j| j < i).collect()).collect();
    let mut search = JointSearch {
        table,
        earlier: &earlier,
        current: vec![0; n],
        best: Vec::new(),
        best_val: S::neg_infinity(),
        tol: S::lit(1e-12),
    };
    search.descend(0, S::zero());
    Ok(JointOptimum { assignment: search.best, opt_sum: search.best_val })
}

struct JointSearch<'a, S> {
    table: &'a PairTable<S>,
    earlier: &'a [Vec<usize>],
    current: Vec<usize>,
    best: Vec<usize>,
    best_val: S,
    tol: S,
}

impl<S: Scalar> JointSearch<'_, S> {
    fn descend(&mut self, node: usize, partial: S) {
        if node == self.current.len() {
            if self.best.is_empty() || partial > self.best_val + self.tol * (S::one() + self.best_val.abs()) {
                self.best_val = partial;
                self.best = self.current.clone();
            }
            return;
        }
        for a in 0..self.table.arms() {
            self.current[node] = a;
            let mut gain = S::zero();
            for &j in &self.earlier[node] {
                gain += self.table.pair_value(a, self.current[j]);
            }
            self.descend(node + 1, partial + gain);
        }
    }
}

/// `(x★, x★')`: lexicographically first maximizer of `⟨z_xx' + z_x'x, θ★⟩`.
pub fn best_pair<S: Scalar>(arms: &ArmSet<S>, env: &EnvironmentSpec<S>) -> Result<(usize, usize)> {
    let table = PairTable::new(arms, env)?;
    Ok(table.argmax_pair(|a, b| table.pair_value(a, b)).0)
}

/// `(x̃★, x̃★')`: lexicographically first maximizer of the count-weighted objective.
pub fn weighted_best_pair<S: Scalar>(
    arms: &ArmSet<S>,
    env: &EnvironmentSpec<S>,
    counts: &CutCounts,
) -> Result<(usize, usize)> {
    let table = PairTable::new(arms, env)?;
    Ok(table.argmax_pair(|a, b| table.weighted_value(counts, a, b)).0)
}

/// Both reference pairs of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestPairs {
    pub star: (usize, usize),
    pub weighted_star: (usize, usize),
}

impl BestPairs {
    pub fn from_table<S: Scalar>(table: &PairTable<S>, counts: &CutCounts) -> Self {
        Self {
            star: table.argmax_pair(|a, b| table.pair_value(a, b)).0,
            weighted_star: table.argmax_pair(|a, b| table.weighted_value(counts, a, b)).0,
        }
    }
}

/// `Δ`: weighted objective at `(x̃★, x̃★')` minus weighted objective at `(x★, x★')`.
pub fn compute_delta<S: Scalar>(arms: &ArmSet<S>, env: &EnvironmentSpec<S>, counts: &CutCounts) -> Result<S> {
    let table = PairTable::new(arms, env)?;
    Ok(delta_from_table(&table, counts))
}

pub fn delta_from_table<S: Scalar>(table: &PairTable<S>, counts: &CutCounts) -> S {
    let pairs = BestPairs::from_table(table, counts);
    let (a, b) = pairs.weighted_star;
    let (c, d) = pairs.star;
    table.weighted_value(counts, a, b) - table.weighted_value(counts, c, d)
}

/// `γ = min_x ⟨z_xx, θ★⟩ / (opt_sum / m)`, reported unclamped.
pub fn compute_gamma<S: Scalar>(arms: &ArmSet<S>, env: &EnvironmentSpec<S>, opt_sum: S, m: usize) -> Result<S> {
    let table = PairTable::new(arms, env)?;
    gamma_from_table(&table, opt_sum, m)
}

pub fn gamma_from_table<S: Scalar>(table: &PairTable<S>, opt_sum: S, m: usize) -> Result<S> {
    if opt_sum == S::zero() || m == 0 {
        return Err(Error::ZeroOptimum);
    }
    let min_diag = (0..table.arms()).map(|a| table.get(a, a)).fold(S::infinity(), S::min);
    Ok(min_diag / (opt_sum / S::from_usize_exact(m)))
}

/// `ε = Δ / opt_sum`.
pub fn compute_epsilon<S: Scalar>(delta_gap: S, opt_sum: S) -> Result<S> {
    if opt_sum == S::zero() {
        return Err(Error::ZeroOptimum);
    }
    Ok(delta_gap / opt_sum)
}

/// `α₁ = (1 + γ)/2` and `α₂ = 1 − [((m1 + m2)/m)(1 − γ) − ε]`.
pub fn compute_alphas<S: Scalar>(gamma: S, epsilon: S, counts: &CutCounts, m: usize) -> (S, S) {
    let half = S::lit(0.5);
    let alpha1 = half + half * gamma;
    let within = S::from_usize_exact(counts.m1 + counts.m2) / S::from_usize_exact(m);
    let alpha2 = S::one() - (within * (S::one() - gamma) - epsilon);
    (alpha1, alpha2)
}

/// `α·opt_sum − expected_global`, one round's contribution to the `α`-regret.
pub fn alpha_regret_increment<S: Scalar>(alpha: S, opt_sum: S, expected_global: S) -> S {
    alpha * opt_sum - expected_global
}

/// `m · ½⟨z_x★x★' + z_x★'x★, θ★⟩`, an upper bound on `opt_sum`.
pub fn pair_value_surrogate<S: Scalar>(arms: &ArmSet<S>, env: &EnvironmentSpec<S>, m: usize) -> Result<S> {
    let table = PairTable::new(arms, env)?;
    Ok(surrogate_from_table(&table, m))
}

pub fn surrogate_from_table<S: Scalar>(table: &PairTable<S>, m: usize) -> S {
    let (_, best) = table.argmax_pair(|a, b| table.pair_value(a, b));
    S::from_usize_exact(m) * S::lit(0.5) * best
}

/// How the `opt_sum` denominator was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Denominator {
    /// Exhaustive search; `γ`, `ε` are exact.
    Exact,
    /// Pair-value upper bound; `γ`, `ε` are lower bounds.
    Surrogate,
}

impl Denominator {
    pub fn label(&self) -> &'static str {
        match self {
            Denominator::Exact => "exact",
            Denominator::Surrogate => "surrogate",
        }
    }
}

/// Problem constants of one instance (graph, cut, arms, `M★`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    pub gamma: f64,
    pub epsilon: f64,
    pub delta_gap: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub opt_sum: f64,
    /// Only present when `denominator` is exact.
    pub opt_assignment: Option<Vec<usize>>,
    pub denominator: Denominator,
    pub best_pairs: BestPairs,
    pub counts: CutCounts,
    pub m: usize,
}

impl ProblemConstants {
    /// Uses brute force when `Kⁿ ≤ budget`, the pair surrogate otherwise.
    pub fn compute<S: Scalar>(g: &Graph, counts: &CutCounts, table: &PairTable<S>, budget: u128) -> Result<Self> {
        let m = g.m();
        let (opt_sum, opt_assignment, denominator) = match optimal_joint_arm_from_table(g, table, budget) {
            Ok(opt) => (opt.opt_sum, Some(opt.assignment), Denominator::Exact),
            Err(Error::BudgetExceeded { .. }) => (surrogate_from_table(table, m), None, Denominator::Surrogate),
            Err(e) => return Err(e),
        };
        let gamma = gamma_from_table(table, opt_sum, m)?;
        let delta_gap = delta_from_table(table, counts);
        let epsilon = compute_epsilon(delta_gap, opt_sum)?;
        let (alpha1, alpha2) = compute_alphas(gamma, epsilon, counts, m);
        Ok(Self {
            gamma: gamma.as_f64(),
            epsilon: epsilon.as_f64(),
            delta_gap: delta_gap.as_f64(),
            alpha1: alpha1.as_f64(),
            alpha2: alpha2.as_f64(),
            opt_sum: opt_sum.as_f64(),
            opt_assignment,
            denominator,
            best_pairs: BestPairs::from_table(table, counts),
            counts: *counts,
            m,
        })
    }

    /// Names of the constants outside their theoretical ranges
    /// (`0 ≤ γ ≤ 1`, `0 ≤ ε ≤ ½`, `α₂ ≥ ½`), with a small rounding slack.
    pub fn range_violations(&self) -> Vec<&'static str> {
        let tol = 1e-9;
        let mut out = Vec::new();
        if !(-tol..=1.0 + tol).contains(&self.gamma) {
            out.push("gamma");
        }
        if !(-tol..=0.5 + tol).contains(&self.epsilon) {
            out.push("epsilon");
        }
        if self.alpha2 < 0.5 - tol {
            out.push("alpha2");
        }
        if self.delta_gap < -tol {
            out.push("delta");
        }
        out
    }
}
