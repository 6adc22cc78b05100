//! Entanglement and non-locality measures on a covariance matrix.
//!
//! Logarithmic negativity comes from the smallest symplectic eigenvalue of
//! the partially transposed state, evaluated through the 2x2 block
//! determinants. The Bell measure is the displaced-parity CHSH combination
//! of four Wigner-function values, maximized over the eight displacement
//! parameters by a seeded multi-start simplex search.

mod simplex;

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::CovMatrix;
use crate::error::CoreError;

/// Logarithmic negativity `E_N = max[0, -ln(2 nu)]`, with
/// `2 nu^2 = Sigma - sqrt(Sigma^2 - 4 det V)` and
/// `Sigma = det V_I + det V_S - 2 det C`.
///
/// The difference is evaluated in the rationalized form
/// `2 det V / (Sigma + sqrt(...))`, which stays accurate when the two terms
/// nearly cancel (strong squeezing). A discriminant within -1e-9 of zero is
/// clamped; anything more negative reports an inconsistent matrix.
pub fn log_negativity(v: &CovMatrix) -> Result<f64, CoreError> {
    let sigma = v.det_block_i() + v.det_block_s() - 2.0 * v.det_block_corr();
    let det = v.det();
    let mut disc = sigma * sigma - 4.0 * det;
    if disc < 0.0 {
        if disc < -1e-9 {
            return Err(CoreError::NumericalFailure(format!(
                "log-negativity discriminant {disc:.3e} below -1e-9"
            )));
        }
        disc = 0.0;
    }
    let denom = sigma + disc.sqrt();
    if denom <= 0.0 {
        return Err(CoreError::NumericalFailure(
            "non-positive symplectic invariant in log-negativity".into(),
        ));
    }
    let nu_sq = 2.0 * det / denom;
    if nu_sq <= 0.0 {
        return Err(CoreError::NumericalFailure(
            "non-positive squared symplectic eigenvalue".into(),
        ));
    }
    Ok((-(2.0 * nu_sq.sqrt()).ln()).max(0.0))
}

/// Cached Wigner-function evaluator for one covariance matrix.
///
/// Holds the inverse (via a positive-definite Cholesky factorization) and the
/// normalization `1 / (pi^2 sqrt(det V))`.
#[derive(Debug, Clone)]
pub struct WignerEvaluator {
    inv: Matrix4<f64>,
    norm: f64,
}

impl WignerEvaluator {
    pub fn new(v: &CovMatrix) -> Result<Self, CoreError> {
        let chol = v.matrix().cholesky().ok_or_else(|| {
            CoreError::NumericalFailure(
                "covariance matrix is not positive definite; cannot evaluate the Wigner function"
                    .into(),
            )
        })?;
        let det = chol.determinant();
        Ok(Self {
            inv: chol.inverse(),
            norm: (std::f64::consts::PI.powi(2) * det.sqrt()).recip(),
        })
    }

    pub fn eval(&self, u: &Vector4<f64>) -> f64 {
        let quad_form = (self.inv * u).dot(u);
        self.norm * (-0.5 * quad_form).exp()
    }
}

/// Wigner function `W(u) = exp(-u^T V^{-1} u / 2) / (pi^2 sqrt(det V))`.
pub fn wigner(v: &CovMatrix, u: &Vector4<f64>) -> Result<f64, CoreError> {
    Ok(WignerEvaluator::new(v)?.eval(u))
}

/// The eight phase-space displacements defining the four CHSH test points
/// `u^{mn} = [q_i^m, p_i^m, q_s^n, p_s^n]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BellSettings {
    pub q_i0: f64,
    pub p_i0: f64,
    pub q_i1: f64,
    pub p_i1: f64,
    pub q_s0: f64,
    pub p_s0: f64,
    pub q_s1: f64,
    pub p_s1: f64,
}

impl BellSettings {
    pub fn to_array(self) -> [f64; 8] {
        [
            self.q_i0, self.p_i0, self.q_i1, self.p_i1, self.q_s0, self.p_s0, self.q_s1,
            self.p_s1,
        ]
    }

    pub fn from_array(x: [f64; 8]) -> Self {
        Self {
            q_i0: x[0],
            p_i0: x[1],
            q_i1: x[2],
            p_i1: x[3],
            q_s0: x[4],
            p_s0: x[5],
            q_s1: x[6],
            p_s1: x[7],
        }
    }

    fn point(&self, m: usize, n: usize) -> Vector4<f64> {
        let (qi, pi) = if m == 0 { (self.q_i0, self.p_i0) } else { (self.q_i1, self.p_i1) };
        let (qs, ps) = if n == 0 { (self.q_s0, self.p_s0) } else { (self.q_s1, self.p_s1) };
        Vector4::new(qi, pi, qs, ps)
    }
}

fn bell_combination(w: &WignerEvaluator, s: &BellSettings) -> f64 {
    let quarter_pi_sq = 0.25 * std::f64::consts::PI.powi(2);
    quarter_pi_sq
        * (w.eval(&s.point(0, 0)) + w.eval(&s.point(0, 1)) + w.eval(&s.point(1, 0))
            - w.eval(&s.point(1, 1)))
}

/// CHSH Bell combination
/// `B = pi^2/4 [W(u^00) + W(u^01) + W(u^10) - W(u^11)]`.
pub fn bell_value(v: &CovMatrix, s: &BellSettings) -> Result<f64, CoreError> {
    Ok(bell_combination(&WignerEvaluator::new(v)?, s))
}

/// Configuration of the multi-start Bell maximization.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BellOptConfig {
    /// Random restarts on top of the deterministic origin start.
    pub n_restarts: usize,
    /// Simplex diameter tolerance.
    pub xtol: f64,
    /// Value spread tolerance.
    pub ftol: f64,
    /// Iteration cap per restart.
    pub max_iters: usize,
    /// Seed for the restart draws; equal seeds give identical results.
    pub seed: u64,
    /// Optional extra start, e.g. the previous grid point's argmax.
    #[serde(skip)]
    pub warm_start: Option<BellSettings>,
}

impl Default for BellOptConfig {
    fn default() -> Self {
        Self {
            n_restarts: 16,
            xtol: 1e-7,
            ftol: 1e-10,
            max_iters: 4000,
            seed: 0,
            warm_start: None,
        }
    }
}

/// Outcome of [`bell_max`].
#[derive(Debug, Clone, Copy)]
pub struct BellResult {
    pub b_max: f64,
    pub argmax: BellSettings,
    pub n_restarts_used: usize,
    /// False when the best run exhausted its iteration budget before
    /// reaching the tolerances.
    pub converged: bool,
}

/// Maximal absolute Bell value over the eight displacement parameters.
///
/// Starts are the origin, the optional warm start, and `n_restarts` draws
/// uniform in a box of half-width `3 sqrt(max diag V)`. Restarts run in
/// parallel; the reduction is by value with ties broken by start index, so
/// the result does not depend on scheduling.
pub fn bell_max(v: &CovMatrix, cfg: &BellOptConfig) -> Result<BellResult, CoreError> {
    let evaluator = WignerEvaluator::new(v)?;
    let half_width = 3.0 * v.max_diagonal().max(0.0).sqrt();
    let objective = |x: &[f64]| {
        let s = BellSettings::from_array(x.try_into().expect("8 coordinates"));
        -bell_combination(&evaluator, &s).abs()
    };

    let mut starts: Vec<[f64; 8]> = vec![[0.0; 8]];
    if let Some(warm) = cfg.warm_start {
        starts.push(warm.to_array());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.n_restarts {
        let mut x = [0.0; 8];
        for xi in &mut x {
            *xi = rng.gen_range(-half_width..=half_width);
        }
        starts.push(x);
    }

    let step = 0.2 * half_width.max(1e-3);
    let runs: Vec<simplex::SimplexOutcome> = starts
        .par_iter()
        .map(|x0| simplex::minimize(objective, x0, step, cfg.xtol, cfg.ftol, cfg.max_iters))
        .collect();

    let best = runs
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.value.total_cmp(&b.value).then(ia.cmp(ib)))
        .map(|(_, run)| run)
        .expect("at least one start");

    Ok(BellResult {
        b_max: -best.value,
        argmax: BellSettings::from_array(best.x.as_slice().try_into().expect("8 coordinates")),
        n_restarts_used: starts.len(),
        converged: best.converged,
    })
}
