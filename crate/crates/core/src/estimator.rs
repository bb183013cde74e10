//! Ridge estimate of `θ★` from streamed `(edge-arm, reward)` pairs, the
//! confidence radius around it, and the closed-form optimistic value.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, mat_vec, norm2, Cholesky};
use crate::scalar::Scalar;

/// Accumulators `A = λI + Σ z zᵀ` and `b = Σ y z`.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeState<S> {
    dim: usize,
    a_mat: Vec<S>,
    b_vec: Vec<S>,
    lambda: S,
    pulls: u64,
}

impl<S: Scalar> RidgeState<S> {
    pub fn new(dim: usize, lambda: S) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("ridge dimension must be positive".into()));
        }
        if !(lambda > S::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda {lambda} must be > 0")));
        }
        let mut a_mat = vec![S::zero(); dim * dim];
        for i in 0..dim {
            a_mat[i * dim + i] = lambda;
        }
        Ok(Self { dim, a_mat, b_vec: vec![S::zero(); dim], lambda, pulls: 0 })
    }

    /// Shifts `b` so that the estimate equals `theta` before any data arrives
    /// (`b = λ·theta`). Later updates keep `θ̂ = θ★` exactly under noiseless
    /// rewards when `theta = θ★`.
    pub fn preload_theta(&mut self, theta: &[S]) -> Result<()> {
        check_dim(self.dim, theta.len())?;
        for (b, &t) in self.b_vec.iter_mut().zip(theta) {
            *b += self.lambda * t;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> S {
        self.lambda
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    pub fn a_mat(&self) -> &[S] {
        &self.a_mat
    }

    pub fn b_vec(&self) -> &[S] {
        &self.b_vec
    }

    /// `A += z zᵀ`, `b += y z`, one more pull. Zero coordinates of `z` are skipped.
    pub fn update(&mut self, z: &[S], y: S) -> Result<()> {
        check_dim(self.dim, z.len())?;
        let support: Vec<usize> = (0..self.dim).filter(|&k| z[k] != S::zero()).collect();
        for &i in &support {
            let zi = z[i];
            let row = &mut self.a_mat[i * self.dim..(i + 1) * self.dim];
            for &j in &support {
                row[j] += zi * z[j];
            }
            self.b_vec[i] += y * zi;
        }
        self.pulls += 1;
        Ok(())
    }

    /// Factors `A` and solves for `θ̂`.
    pub fn posterior(&self) -> Result<Posterior<S>> {
        let chol = Cholesky::factor(&self.a_mat, self.dim)?;
        let theta_hat = chol.solve(&self.b_vec);
        Ok(Posterior { chol, theta_hat })
    }

    /// `θ̂ = A⁻¹ b`.
    pub fn theta_hat(&self) -> Result<Vec<S>> {
        Ok(self.posterior()?.theta_hat)
    }

    /// Confidence radius `σ √(d² log((1 + t m L²/λ)/δ)) + √λ S`, where `d²` is
    /// the dimension of `θ`.
    pub fn beta_radius(&self, params: &ConfidenceParams<S>, t: u64) -> S {
        let dim = S::from_usize_exact(self.dim);
        let t = S::from_u64(t).expect("round index fits the scalar type");
        let m = S::from_usize_exact(params.edges_per_round);
        let growth = S::one() + t * m * params.norm_bound * params.norm_bound / self.lambda;
        params.sigma * (dim * (growth / params.delta).ln()).sqrt() + self.lambda.sqrt() * params.frobenius_bound
    }

    /// Convenience for [`Posterior::ucb_value`]; factors `A` on every call.
    pub fn ucb_value(&self, v: &[S], radius: S) -> Result<S> {
        self.posterior()?.ucb_value(v, radius)
    }

    /// Membership of `theta` in the confidence set at round `t`, measured in
    /// the norm selected by `params.convention`.
    pub fn contains_theta(&self, params: &ConfidenceParams<S>, t: u64, theta: &[S]) -> Result<bool> {
        check_dim(self.dim, theta.len())?;
        let post = self.posterior()?;
        let diff: Vec<S> = theta.iter().zip(&post.theta_hat).map(|(&a, &b)| a - b).collect();
        let dist = match params.convention {
            NormConvention::Classical => dot(&diff, &mat_vec(&self.a_mat, self.dim, &diff)).sqrt(),
            NormConvention::InverseGram => post.chol.inv_quad(&diff).sqrt(),
        };
        Ok(dist <= self.beta_radius(params, t))
    }

    pub fn to_json(&self) -> RidgeStateJson {
        RidgeStateJson {
            a_mat: self.a_mat.chunks_exact(self.dim).map(|r| r.iter().map(|v| v.as_f64()).collect()).collect(),
            b_vec: self.b_vec.iter().map(|v| v.as_f64()).collect(),
            lambda: self.lambda.as_f64(),
            pulls: self.pulls,
        }
    }

    pub fn from_json(json: &RidgeStateJson) -> Result<Self> {
        let dim = json.b_vec.len();
        let mut state = Self::new(dim, S::lit(json.lambda))?;
        check_dim(dim, json.a_mat.len())?;
        for (i, row) in json.a_mat.iter().enumerate() {
            check_dim(dim, row.len())?;
            for (j, &v) in row.iter().enumerate() {
                state.a_mat[i * dim + j] = S::lit(v);
            }
        }
        state.b_vec = json.b_vec.iter().map(|&v| S::lit(v)).collect();
        state.pulls = json.pulls;
        Ok(state)
    }
}

/// Checkpoint form of a [`RidgeState`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeStateJson {
    pub a_mat: Vec<Vec<f64>>,
    pub b_vec: Vec<f64>,
    pub lambda: f64,
    pub pulls: u64,
}

/// Factorized view of a ridge state: `θ̂` plus a Cholesky factor of `A`.
#[derive(Debug, Clone)]
pub struct Posterior<S> {
    chol: Cholesky<S>,
    theta_hat: Vec<S>,
}

impl<S: Scalar> Posterior<S> {
    pub fn theta_hat(&self) -> &[S] {
        &self.theta_hat
    }

    /// `L⁻¹ v` for the Cholesky factor `A = L Lᵀ`, so `‖L⁻¹v‖² = vᵀA⁻¹v`.
    pub fn whiten(&self, v: &[S]) -> Vec<S> {
        self.chol.forward(v)
    }

    /// `‖v‖_{A⁻¹}`.
    pub fn inverse_norm(&self, v: &[S]) -> Result<S> {
        check_dim(self.theta_hat.len(), v.len())?;
        Ok(self.chol.inv_quad(v).sqrt())
    }

    /// `max ⟨v, θ⟩` over `{θ : ‖θ − θ̂‖_A ≤ radius}`, i.e. `⟨v, θ̂⟩ + radius·‖v‖_{A⁻¹}`.
    pub fn ucb_value(&self, v: &[S], radius: S) -> Result<S> {
        if !(radius >= S::zero()) {
            return Err(Error::InvalidParameter(format!("radius {radius} must be >= 0")));
        }
        Ok(dot(v, &self.theta_hat) + radius * self.inverse_norm(v)?)
    }

    /// The point of the ellipsoid attaining [`Self::ucb_value`]:
    /// `θ̂ + radius·A⁻¹v / ‖v‖_{A⁻¹}` (just `θ̂` when `v = 0`).
    pub fn ucb_maximizer(&self, v: &[S], radius: S) -> Result<Vec<S>> {
        let norm = self.inverse_norm(v)?;
        if norm == S::zero() {
            return Ok(self.theta_hat.clone());
        }
        let dir = self.chol.solve(v);
        Ok(self.theta_hat.iter().zip(dir).map(|(&t, w)| t + radius * w / norm).collect())
    }

    /// Residual `‖A θ̂ − b‖₂` for the state this posterior was built from.
    pub fn residual(&self, state: &RidgeState<S>) -> S {
        let lhs = mat_vec(&state.a_mat, state.dim, &self.theta_hat);
        let r: Vec<S> = lhs.iter().zip(&state.b_vec).map(|(&a, &b)| a - b).collect();
        norm2(&r)
    }
}

/// Which norm measures `θ − θ̂` in the membership test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormConvention {
    /// `‖θ − θ̂‖_{A⁻¹}`, as the confidence set is literally written.
    #[default]
    InverseGram,
    /// `‖θ − θ̂‖_A`, the self-normalized bound of the OFUL analysis.
    Classical,
}

/// Inputs of the confidence radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceParams<S> {
    /// Failure probability `δ ∈ (0, 1]`.
    pub delta: S,
    pub sigma: S,
    /// `S`, bound on `‖M★‖_F`.
    pub frobenius_bound: S,
    /// `L`, bound on the arm norms.
    pub norm_bound: S,
    /// `m`, edge-arms pulled per round.
    pub edges_per_round: usize,
    pub convention: NormConvention,
}

impl<S: Scalar> ConfidenceParams<S> {
    pub fn new(delta: S, sigma: S, frobenius_bound: S, norm_bound: S, edges_per_round: usize) -> Result<Self> {
        if !(delta > S::zero() && delta <= S::one()) {
            return Err(Error::InvalidParameter(format!("delta {delta} outside (0, 1]")));
        }
        if !(sigma >= S::zero()) {
            return Err(Error::InvalidParameter(format!("sigma {sigma} must be >= 0")));
        }
        if !(frobenius_bound > S::zero() && norm_bound > S::zero()) || edges_per_round == 0 {
            return Err(Error::InvalidParameter("norm bounds and edge count must be positive".into()));
        }
        Ok(Self { delta, sigma, frobenius_bound, norm_bound, edges_per_round, convention: NormConvention::default() })
    }

    pub fn with_convention(mut self, convention: NormConvention) -> Self {
        self.convention = convention;
        self
    }
}
