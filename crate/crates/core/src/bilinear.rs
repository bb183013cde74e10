//! Node-arm sets, the bilinear reward model and its linearization.
//!
//! A pair of node-arms `(x, x')` induces the edge-arm `z = vec(x x'ᵀ)`
//! (columns stacked), so that `xᵀ M x' = ⟨z, vec(M)⟩`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm2};
use crate::scalar::Scalar;

/// Finite set of `K ≥ 2` distinct node-arms in `R^d`, with norm bound `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmSet<S> {
    dim: usize,
    arms: Vec<Vec<S>>,
    norm_bound: S,
}

impl<S: Scalar> ArmSet<S> {
    /// Uses the largest arm norm as `L`.
    pub fn new(arms: Vec<Vec<S>>) -> Result<Self> {
        let bound = arms.iter().map(|a| norm2(a)).fold(S::zero(), S::max);
        Self::with_bound(arms, bound)
    }

    pub fn with_bound(arms: Vec<Vec<S>>, norm_bound: S) -> Result<Self> {
        if arms.len() < 2 {
            return Err(Error::InvalidArms(format!("need at least 2 arms, got {}", arms.len())));
        }
        let dim = arms[0].len();
        if dim == 0 {
            return Err(Error::InvalidArms("arms must have positive dimension".into()));
        }
        for a in &arms {
            check_dim(dim, a.len())?;
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArms("non-finite arm coordinate".into()));
            }
            if norm2(a) > norm_bound {
                return Err(Error::InvalidArms(format!("arm norm exceeds bound {norm_bound}")));
            }
        }
        for (i, a) in arms.iter().enumerate() {
            if arms[..i].contains(a) {
                return Err(Error::InvalidArms(format!("arm {i} duplicates an earlier arm")));
            }
        }
        Ok(Self { dim, arms, norm_bound })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of arms `K`.
    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn arm(&self, k: usize) -> &[S] {
        &self.arms[k]
    }

    pub fn arms(&self) -> &[Vec<S>] {
        &self.arms
    }

    /// The norm bound `L`.
    pub fn norm_bound(&self) -> S {
        self.norm_bound
    }

    /// Edge-arm of the ordered pair of arm indices `(a, b)`.
    pub fn edge_arm(&self, a: usize, b: usize) -> EdgeArm<S> {
        vectorize_pair(&self.arms[a], &self.arms[b]).expect("arms share a dimension")
    }
}

/// Standard basis `e_1, ..., e_d` with `L = 1`.
pub fn make_canonical_arms<S: Scalar>(d: usize) -> Result<ArmSet<S>> {
    if d < 2 {
        return Err(Error::InvalidArms(format!("canonical arm set needs d >= 2, got {d}")));
    }
    let arms = (0..d)
        .map(|k| {
            let mut e = vec![S::zero(); d];
            e[k] = S::one();
            e
        })
        .collect();
    ArmSet::with_bound(arms, S::one())
}

/// `vec(x x'ᵀ)` in `R^{d²}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeArm<S>(Vec<S>);

impl<S: Scalar> EdgeArm<S> {
    pub fn as_slice(&self) -> &[S] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<S> {
        self.0
    }

    pub fn norm(&self) -> S {
        norm2(&self.0)
    }
}

/// Column-major `vec(x x'ᵀ)`: entry `(i, j)` of the outer product lands at `j·d + i`.
pub fn vectorize_pair<S: Scalar>(x: &[S], xp: &[S]) -> Result<EdgeArm<S>> {
    check_dim(x.len(), xp.len())?;
    let d = x.len();
    let mut z = Vec::with_capacity(d * d);
    for &c in xp {
        z.extend(x.iter().map(|&r| r * c));
    }
    Ok(EdgeArm(z))
}

/// Hidden bilinear parameter `M★`, its vectorization `θ★`, and the noise scale.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentSpec<S> {
    dim: usize,
    /// Row-major `M★`.
    mstar: Vec<S>,
    theta_star: Vec<S>,
    sigma: S,
    frobenius_bound: S,
    seed: u64,
}

impl<S: Scalar> EnvironmentSpec<S> {
    /// `mstar` is row-major `d × d`. `S` is set to `‖M★‖_F`.
    pub fn new(dim: usize, mstar: Vec<S>, sigma: S) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidEnvironment("dimension must be positive".into()));
        }
        check_dim(dim * dim, mstar.len())?;
        if mstar.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidEnvironment("non-finite entry in M★".into()));
        }
        if !(sigma >= S::zero()) || !sigma.is_finite() {
            return Err(Error::InvalidEnvironment(format!("noise scale {sigma} must be >= 0")));
        }
        let mut theta_star = vec![S::zero(); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                theta_star[j * dim + i] = mstar[i * dim + j];
            }
        }
        let frobenius_bound = norm2(&mstar);
        Ok(Self { dim, mstar, theta_star, sigma, frobenius_bound, seed: 0 })
    }

    pub fn from_rows(rows: &[Vec<S>], sigma: S) -> Result<Self> {
        let dim = rows.len();
        let mut flat = Vec::with_capacity(dim * dim);
        for r in rows {
            check_dim(dim, r.len())?;
            flat.extend_from_slice(r);
        }
        Self::new(dim, flat, sigma)
    }

    pub fn with_sigma(mut self, sigma: S) -> Result<Self> {
        if !(sigma >= S::zero()) || !sigma.is_finite() {
            return Err(Error::InvalidEnvironment(format!("noise scale {sigma} must be >= 0")));
        }
        self.sigma = sigma;
        Ok(self)
    }

    /// Records the seed the matrix was generated from (serialization only).
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mstar(&self, i: usize, j: usize) -> S {
        self.mstar[i * self.dim + j]
    }

    pub fn mstar_row_major(&self) -> &[S] {
        &self.mstar
    }

    pub fn theta_star(&self) -> &[S] {
        &self.theta_star
    }

    pub fn sigma(&self) -> S {
        self.sigma
    }

    /// The bound `S ≥ ‖M★‖_F`.
    pub fn frobenius_bound(&self) -> S {
        self.frobenius_bound
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Direct `xᵀ M★ x'`.
    pub fn bilinear(&self, x: &[S], xp: &[S]) -> Result<S> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, xp.len())?;
        let mut total = S::zero();
        for (i, &xi) in x.iter().enumerate() {
            total += xi * dot(&self.mstar[i * self.dim..(i + 1) * self.dim], xp);
        }
        Ok(total)
    }

    /// Checks `0 ≤ xᵀ M★ x' ≤ L·S` over every ordered pair of arms.
    pub fn check_arms(&self, arms: &ArmSet<S>) -> Result<()> {
        check_dim(self.dim, arms.dim())?;
        let cap = arms.norm_bound() * self.frobenius_bound;
        let slack = S::lit(1e3) * S::epsilon() * (S::one() + cap);
        for (a, x) in arms.arms().iter().enumerate() {
            for (b, xp) in arms.arms().iter().enumerate() {
                let r = self.bilinear(x, xp)?;
                if r < -slack || r > cap + slack {
                    return Err(Error::InvalidEnvironment(format!(
                        "expected reward {r} of arm pair ({a},{b}) outside [0, {cap}]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> EnvironmentJson {
        EnvironmentJson {
            d: self.dim,
            mstar: self.mstar.chunks_exact(self.dim).map(|row| row.iter().map(|v| v.as_f64()).collect()).collect(),
            sigma: self.sigma.as_f64(),
            seed: self.seed,
        }
    }

    pub fn from_json(json: &EnvironmentJson) -> Result<Self> {
        check_dim(json.d, json.mstar.len())?;
        let rows: Vec<Vec<S>> = json.mstar.iter().map(|r| r.iter().map(|&v| S::lit(v)).collect()).collect();
        Ok(Self::from_rows(&rows, S::lit(json.sigma))?.with_seed(json.seed))
    }
}

/// Serialized environment: `{"d", "mstar" (row-major nested), "sigma", "seed"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentJson {
    pub d: usize,
    pub mstar: Vec<Vec<f64>>,
    pub sigma: f64,
    pub seed: u64,
}

/// `⟨z, θ★⟩`.
pub fn expected_reward<S: Scalar>(z: &EdgeArm<S>, env: &EnvironmentSpec<S>) -> Result<S> {
    check_dim(env.theta_star.len(), z.0.len())?;
    Ok(dot(&z.0, &env.theta_star))
}

/// `⟨z, θ★⟩ + η` with `η ~ N(0, σ²)`. One normal draw per call, even when `σ = 0`.
pub fn sample_reward<S: Scalar, R: Rng + ?Sized>(z: &EdgeArm<S>, env: &EnvironmentSpec<S>, rng: &mut R) -> Result<S> {
    let mean = expected_reward(z, env)?;
    Ok(mean + env.sigma * gaussian(rng))
}

pub(crate) fn gaussian<S: Scalar, R: Rng + ?Sized>(rng: &mut R) -> S {
    let g: f64 = StandardNormal.sample(rng);
    S::lit(g)
}

/// `M★[i,j] = |g_ij|` with `g_ij` i.i.d. standard normal, drawn in row-major order.
/// Noise scale starts at zero; see [`EnvironmentSpec::with_sigma`].
pub fn gen_random_mstar<S: Scalar, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<EnvironmentSpec<S>> {
    if d < 2 {
        return Err(Error::InvalidEnvironment(format!("need d >= 2, got {d}")));
    }
    let mstar = (0..d * d).map(|_| gaussian::<S, _>(rng).abs()).collect();
    EnvironmentSpec::new(d, mstar, S::zero())
}

/// Index pair `(i★, j★)`, `i★ ≠ j★`, maximizing `M[i,j] + M[j,i]`; ties go to
/// the lexicographically smallest pair.
pub fn best_offdiagonal_pair<S: Scalar>(env: &EnvironmentSpec<S>) -> (usize, usize) {
    let d = env.dim();
    let mut best = (0, 1);
    let mut best_val = env.mstar(0, 1) + env.mstar(1, 0);
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let v = env.mstar(i, j) + env.mstar(j, i);
            if v > best_val {
                best_val = v;
                best = (i, j);
            }
        }
    }
    best
}

/// Sets `M★[i★,i★] = M★[j★,j★] = ζ·½(M★[i★,j★] + M★[j★,i★])` for the best
/// off-diagonal pair. All other entries are untouched; `S` is recomputed.
pub fn apply_zeta_coupling<S: Scalar>(env: &EnvironmentSpec<S>, zeta: S) -> Result<EnvironmentSpec<S>> {
    if !(zeta >= S::zero() && zeta < S::one()) {
        return Err(Error::InvalidParameter(format!("zeta {zeta} outside [0, 1)")));
    }
    if env.dim() < 2 {
        return Err(Error::InvalidEnvironment("coupling needs d >= 2".into()));
    }
    let d = env.dim();
    let (i, j) = best_offdiagonal_pair(env);
    let value = zeta * S::lit(0.5) * (env.mstar(i, j) + env.mstar(j, i));
    let mut mstar = env.mstar.clone();
    mstar[i * d + i] = value;
    mstar[j * d + j] = value;
    Ok(EnvironmentSpec::new(d, mstar, env.sigma)?.with_seed(env.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn identity(d: usize) -> EnvironmentSpec<f64> {
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            m[i * d + i] = 1.0;
        }
        EnvironmentSpec::new(d, m, 0.0).unwrap()
    }

    #[test]
    fn vectorize_examples() {
        let z = vectorize_pair(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(z.as_slice(), &[0.0, 0.0, 1.0, 0.0]);
        let z = vectorize_pair(&[1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(z.as_slice(), &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            vectorize_pair(&[1.0, 0.0], &[1.0, 0.0, 0.0]),
            Err(Error::DimensionMismatch { expected: 2, actual: 3 })
        ));
    }

    #[test]
    fn theta_star_is_column_major() {
        let env = EnvironmentSpec::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]], 0.0).unwrap();
        assert_eq!(env.theta_star(), &[1.0, 3.0, 2.0, 4.0]);
        assert!((env.frobenius_bound() - 30f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn expected_reward_examples() {
        let env = identity(2);
        let arms = make_canonical_arms::<f64>(2).unwrap();
        assert_eq!(expected_reward(&arms.edge_arm(0, 1), &env).unwrap(), 0.0);
        assert_eq!(expected_reward(&arms.edge_arm(0, 0), &env).unwrap(), 1.0);

        let env = gen_random_mstar::<f64, _>(3, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let arms = make_canonical_arms::<f64>(3).unwrap();
        let r = expected_reward(&arms.edge_arm(1, 2), &env).unwrap();
        assert_eq!(r, env.mstar(1, 2));
        assert_eq!(r, env.bilinear(arms.arm(1), arms.arm(2)).unwrap());
        let short = EdgeArm(vec![1.0; 4]);
        assert!(expected_reward(&short, &env).is_err());
    }

    #[test]
    fn noiseless_sample_equals_mean_and_is_seeded() {
        let env = gen_random_mstar::<f64, _>(3, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let arms = make_canonical_arms::<f64>(3).unwrap();
        let z = arms.edge_arm(0, 2);
        let y = sample_reward(&z, &env, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(y, expected_reward(&z, &env).unwrap());

        let noisy = env.clone().with_sigma(0.5).unwrap();
        let a = sample_reward(&z, &noisy, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = sample_reward(&z, &noisy, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noisy_sample_mean_matches_clt_band() {
        let env = gen_random_mstar::<f64, _>(2, &mut ChaCha8Rng::seed_from_u64(3)).unwrap().with_sigma(0.5).unwrap();
        let arms = make_canonical_arms::<f64>(2).unwrap();
        let z = arms.edge_arm(1, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let draws = 100_000;
        let mean = (0..draws).map(|_| sample_reward(&z, &env, &mut rng).unwrap()).sum::<f64>() / draws as f64;
        let tol = 3.0 * 0.5 / (draws as f64).sqrt();
        assert!((mean - env.mstar(1, 0)).abs() <= tol, "mean {mean}");
    }

    #[test]
    fn canonical_arms() {
        let a = make_canonical_arms::<f64>(2).unwrap();
        assert_eq!(a.arms(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(make_canonical_arms::<f64>(1).is_err());
        let a = make_canonical_arms::<f64>(10).unwrap();
        assert_eq!(a.len(), 10);
        assert_eq!(a.norm_bound(), 1.0);
        // induced edge-arms are exactly the canonical basis of R^100
        let mut hit = vec![0usize; 100];
        for x in 0..10 {
            for y in 0..10 {
                let z = a.edge_arm(x, y);
                assert_eq!(z.norm(), 1.0);
                let k = z.as_slice().iter().position(|&v| v == 1.0).unwrap();
                assert_eq!(z.as_slice().iter().filter(|&&v| v != 0.0).count(), 1);
                hit[k] += 1;
            }
        }
        assert!(hit.iter().all(|&h| h == 1));
    }

    #[test]
    fn arm_set_validation() {
        assert!(ArmSet::new(vec![vec![1.0, 0.0]]).is_err());
        assert!(ArmSet::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).is_err());
        assert!(ArmSet::new(vec![vec![1.0, 0.0], vec![1.0]]).is_err());
        assert!(ArmSet::with_bound(vec![vec![2.0, 0.0], vec![0.0, 1.0]], 1.0).is_err());
        let a = ArmSet::new(vec![vec![3.0, 4.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(a.norm_bound(), 5.0);
    }

    #[test]
    fn random_mstar_is_nonnegative_and_seeded() {
        let a = gen_random_mstar::<f64, _>(4, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        let b = gen_random_mstar::<f64, _>(4, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert_eq!(a, b);
        assert!(a.mstar_row_major().iter().all(|&v| v >= 0.0));
        assert_eq!(a.frobenius_bound(), norm2(a.mstar_row_major()));
        a.check_arms(&make_canonical_arms(4).unwrap()).unwrap();
        assert!(gen_random_mstar::<f64, _>(1, &mut ChaCha8Rng::seed_from_u64(8)).is_err());
    }

    #[test]
    fn half_normal_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut total = 0.0;
        let mut count = 0usize;
        for _ in 0..100 {
            let env = gen_random_mstar::<f64, _>(10, &mut rng).unwrap();
            total += env.mstar_row_major().iter().sum::<f64>();
            count += 100;
        }
        let mean = total / count as f64;
        assert!((mean - (2.0 / std::f64::consts::PI).sqrt()).abs() <= 0.03, "mean {mean}");
    }

    #[test]
    fn positivity_check_rejects_negative_rewards() {
        let env = EnvironmentSpec::from_rows(&[vec![1.0, -0.5], vec![0.0, 1.0]], 0.0).unwrap();
        assert!(env.check_arms(&make_canonical_arms(2).unwrap()).is_err());
    }

    #[test]
    fn zeta_coupling_edits_only_two_diagonals() {
        let env = gen_random_mstar::<f64, _>(3, &mut ChaCha8Rng::seed_from_u64(21)).unwrap();
        let (i, j) = best_offdiagonal_pair(&env);
        assert_ne!(i, j);
        let zeta = 0.3;
        let coupled = apply_zeta_coupling(&env, zeta).unwrap();
        let target = zeta * 0.5 * (env.mstar(i, j) + env.mstar(j, i));
        for r in 0..3 {
            for c in 0..3 {
                if (r, c) == (i, i) || (r, c) == (j, j) {
                    assert_eq!(coupled.mstar(r, c), target);
                } else {
                    assert_eq!(coupled.mstar(r, c), env.mstar(r, c));
                }
            }
        }
        let zero = apply_zeta_coupling(&env, 0.0).unwrap();
        assert_eq!((zero.mstar(i, i), zero.mstar(j, j)), (0.0, 0.0));
        assert!(apply_zeta_coupling(&env, 1.0).is_err());
        assert!(apply_zeta_coupling(&env, -0.1).is_err());
    }

    #[test]
    fn zeta_coupling_limit() {
        let env =
            EnvironmentSpec::<f64>::from_rows(&[vec![0.1, 2.0, 0.3], vec![2.0, 0.2, 0.1], vec![0.3, 0.4, 0.5]], 0.0)
                .unwrap();
        let coupled = apply_zeta_coupling(&env, 0.999_999).unwrap();
        assert!((coupled.mstar(0, 0) - 2.0).abs() < 1e-5);
        assert!((coupled.mstar(1, 1) - 2.0).abs() < 1e-5);
    }

    #[test]
    fn ties_break_lexicographically() {
        let env = EnvironmentSpec::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]], 0.0).unwrap();
        assert_eq!(best_offdiagonal_pair(&env), (0, 1));
    }

    #[test]
    fn environment_json_shape() {
        let env = EnvironmentSpec::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]], 0.5).unwrap().with_seed(7);
        let text = serde_json::to_string(&env.to_json()).unwrap();
        assert_eq!(text, r#"{"d":2,"mstar":[[1.0,2.0],[3.0,4.0]],"sigma":0.5,"seed":7}"#);
        let back = EnvironmentSpec::<f64>::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, env);
    }

    #[test]
    fn single_precision_model() {
        let env = EnvironmentSpec::<f32>::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]], 0.0).unwrap();
        let arms = make_canonical_arms::<f32>(2).unwrap();
        assert_eq!(expected_reward(&arms.edge_arm(0, 1), &env).unwrap(), 1.0f32);
    }
}
