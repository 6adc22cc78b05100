//! Brute-force verification paths, independent of the closed forms.
//!
//! [`convolve_element`] integrates the raw convolution integrands built from
//! the filter impulse responses and the scenario bath factors, and
//! [`grid_bell_max`] bounds the Bell maximum by exhaustive grid search. The
//! closed-form kernel/covariance modules share no code with these routines
//! beyond the filter evaluation itself.

pub mod verify;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{CovMatrix, Scenario, ScenarioParams};
use crate::error::CoreError;
use crate::kernels::thermal_occupancy;
use crate::measures::{BellSettings, WignerEvaluator};
use crate::quad;

/// Adaptive quadrature tolerances and budget.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 1e-12, max_subdivisions: 2000 }
    }
}

/// Covariance element selector for [`convolve_element`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovElement {
    DI,
    DS,
    C11,
    C12,
}

impl CovElement {
    pub const ALL: [CovElement; 4] = [CovElement::DI, CovElement::DS, CovElement::C11, CovElement::C12];

    pub fn name(&self) -> &'static str {
        match self {
            CovElement::DI => "d_i",
            CovElement::DS => "d_s",
            CovElement::C11 => "c11",
            CovElement::C12 => "c12",
        }
    }

    /// Read the matching element off an assembled matrix.
    pub fn of(&self, v: &CovMatrix) -> f64 {
        match self {
            CovElement::DI => v.d_i(),
            CovElement::DS => v.d_s(),
            CovElement::C11 => v.c11(),
            CovElement::C12 => v.c12(),
        }
    }
}

/// A quadrature value together with its achieved error estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadEstimate {
    pub value: f64,
    pub error: f64,
}

/// Numerically convolve the raw integrand for one covariance element.
///
/// The integration variable is the filter age `u = t - t'`; the domain is
/// split at the bath switch-on point `u = t` and, for carrier-mismatched
/// pairs, at every half period of the beat note before adaptive refinement.
pub fn convolve_element(
    element: CovElement,
    params: &ScenarioParams,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadEstimate, CoreError> {
    params.validate()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(CoreError::DomainError(format!("t must be >= 0 and finite, got {t}")));
    }

    // The cross decay factors of the output-thermalized scenario are equal
    // for both quadrature signs, so the antisymmetric element never builds
    // up: its integrand is identically zero.
    if params.scenario == Scenario::Tdtmsv && element == CovElement::C12 {
        return Ok(QuadEstimate { value: 0.0, error: 0.0 });
    }

    let ch = (2.0 * params.r).cosh();
    let sh = (2.0 * params.r).sinh();
    let p = *params;

    let (integrand, upper, delta): (Box<dyn Fn(f64) -> f64 + Sync>, f64, f64) = match (params.scenario, element) {
        (Scenario::Tmstdf, CovElement::DI) => (
            Box::new(move |u: f64| {
                let pi = thermal_occupancy(p.n_i, p.kappa_i, t - u);
                let ps = thermal_occupancy(p.n_s, p.kappa_s, t - u);
                p.filter_i.eval(u).norm_sqr() * ((pi + ps) * ch + pi - ps)
            }),
            p.filter_i.integration_cutoff(),
            0.0,
        ),
        (Scenario::Tmstdf, CovElement::DS) => (
            Box::new(move |u: f64| {
                let pi = thermal_occupancy(p.n_i, p.kappa_i, t - u);
                let ps = thermal_occupancy(p.n_s, p.kappa_s, t - u);
                p.filter_s.eval(u).norm_sqr() * ((pi + ps) * ch - pi + ps)
            }),
            p.filter_s.integration_cutoff(),
            0.0,
        ),
        (Scenario::Tmstdf, CovElement::C11) => (
            Box::new(move |u: f64| {
                let pi = thermal_occupancy(p.n_i, p.kappa_i, t - u);
                let ps = thermal_occupancy(p.n_s, p.kappa_s, t - u);
                (p.filter_i.eval(u) * p.filter_s.eval(u).conj()).re * (pi + ps) * sh
            }),
            pair_cutoff(&p),
            p.filter_i.omega - p.filter_s.omega,
        ),
        (Scenario::Tmstdf, CovElement::C12) => (
            Box::new(move |u: f64| {
                let pi = thermal_occupancy(p.n_i, p.kappa_i, t - u);
                let ps = thermal_occupancy(p.n_s, p.kappa_s, t - u);
                (p.filter_i.eval(u) * p.filter_s.eval(u).conj()).im * (pi - ps) * sh
            }),
            pair_cutoff(&p),
            p.filter_i.omega - p.filter_s.omega,
        ),
        (Scenario::Tdtmsv, CovElement::DI) => (
            Box::new(move |u: f64| {
                p.filter_i.eval(u).norm_sqr() * tdtmsv_diag_factor(t - u, p.n_i, p.kappa_i, ch)
            }),
            p.filter_i.integration_cutoff(),
            0.0,
        ),
        (Scenario::Tdtmsv, CovElement::DS) => (
            Box::new(move |u: f64| {
                p.filter_s.eval(u).norm_sqr() * tdtmsv_diag_factor(t - u, p.n_s, p.kappa_s, ch)
            }),
            p.filter_s.integration_cutoff(),
            0.0,
        ),
        (Scenario::Tdtmsv, CovElement::C11) => (
            Box::new(move |u: f64| {
                let age = t - u;
                let decay = if age >= 0.0 { (-(p.kappa_i + p.kappa_s) * age).exp() } else { 1.0 };
                (p.filter_i.eval(u) * p.filter_s.eval(u).conj()).re * decay * sh
            }),
            pair_cutoff(&p),
            p.filter_i.omega - p.filter_s.omega,
        ),
        (Scenario::Tdtmsv, CovElement::C12) => unreachable!("handled above"),
    };

    let mut marks = quad::half_period_marks(delta, upper);
    marks.push(t);
    marks.push(params.filter_i.tau);
    marks.push(params.filter_s.tau);

    let out = quad::integrate(
        |u| integrand(u),
        0.0,
        upper,
        &marks,
        cfg.rel_tol,
        cfg.abs_tol,
        cfg.max_subdivisions,
    )?;
    Ok(QuadEstimate { value: out.value, error: out.error })
}

fn tdtmsv_diag_factor(age: f64, n: f64, kappa: f64, ch: f64) -> f64 {
    if age >= 0.0 {
        let decay = (-2.0 * kappa * age).exp();
        (2.0 * n + 1.0) * (1.0 - decay) + decay * ch
    } else {
        ch
    }
}

fn pair_cutoff(params: &ScenarioParams) -> f64 {
    match params.filter_i.family {
        crate::filters::FilterFamily::Step => params.filter_i.tau.min(params.filter_s.tau),
        crate::filters::FilterFamily::Exponential => {
            40.0 * params.filter_i.tau.max(params.filter_s.tau)
        }
    }
}

/// Exhaustive lower bound for the Bell maximum on a symmetric grid of
/// `points_per_axis` values per displacement axis.
///
/// The Bell combination is invariant under global negation of the settings,
/// so the first axis is restricted to its non-negative half.
pub fn grid_bell_max(
    v: &CovMatrix,
    half_width: f64,
    points_per_axis: usize,
) -> Result<f64, CoreError> {
    assert!(points_per_axis >= 3, "grid_bell_max needs at least 3 points per axis");
    assert!(half_width > 0.0, "grid_bell_max needs a positive half-width");

    let evaluator = WignerEvaluator::new(v)?;
    let n = points_per_axis;
    let axis: Vec<f64> = (0..n)
        .map(|i| -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64)
        .collect();

    // Indices where the first coordinate is >= 0 (covers every sign orbit).
    let first_start = axis.iter().position(|x| *x >= 0.0).unwrap_or(0);
    let tail = n.pow(7);

    let quarter_pi_sq = 0.25 * std::f64::consts::PI.powi(2);
    let best = (first_start..n)
        .into_par_iter()
        .map(|i0| {
            let mut local_best = f64::NEG_INFINITY;
            let mut idx = [0usize; 7];
            for flat in 0..tail {
                let mut rem = flat;
                for slot in idx.iter_mut() {
                    *slot = rem % n;
                    rem /= n;
                }
                let s = BellSettings::from_array([
                    axis[i0], axis[idx[0]], axis[idx[1]], axis[idx[2]], axis[idx[3]],
                    axis[idx[4]], axis[idx[5]], axis[idx[6]],
                ]);
                let b = quarter_pi_sq
                    * (evaluator.eval(&s.point_00()) + evaluator.eval(&s.point_01())
                        + evaluator.eval(&s.point_10())
                        - evaluator.eval(&s.point_11()));
                local_best = local_best.max(b.abs());
            }
            local_best
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);

    Ok(best)
}

// Small named accessors so the grid loop avoids match arms in the hot path.
impl BellSettings {
    fn point_00(&self) -> nalgebra::Vector4<f64> {
        nalgebra::Vector4::new(self.q_i0, self.p_i0, self.q_s0, self.p_s0)
    }
    fn point_01(&self) -> nalgebra::Vector4<f64> {
        nalgebra::Vector4::new(self.q_i0, self.p_i0, self.q_s1, self.p_s1)
    }
    fn point_10(&self) -> nalgebra::Vector4<f64> {
        nalgebra::Vector4::new(self.q_i1, self.p_i1, self.q_s0, self.p_s0)
    }
    fn point_11(&self) -> nalgebra::Vector4<f64> {
        nalgebra::Vector4::new(self.q_i1, self.p_i1, self.q_s1, self.p_s1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::{pure_tmsv, thermal_product};
    use crate::filters::FilterSpec;
    use approx::assert_abs_diff_eq;
    use nalgebra::Matrix4;

    fn params(scenario: Scenario) -> ScenarioParams {
        ScenarioParams {
            scenario,
            r: 0.8,
            n_i: 0.6,
            n_s: 0.6,
            kappa_i: 0.07,
            kappa_s: 0.07,
            filter_i: FilterSpec::step(1.0, 0.2).unwrap(),
            filter_s: FilterSpec::step(1.0, 0.2).unwrap(),
        }
    }

    #[test]
    fn tmstdf_c12_vanishes_for_identical_filters() {
        let q = convolve_element(CovElement::C12, &params(Scenario::Tmstdf), 3.0, &QuadratureConfig::default())
            .unwrap();
        assert_abs_diff_eq!(q.value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn tdtmsv_c12_is_identically_zero() {
        let mut p = params(Scenario::Tdtmsv);
        p.filter_s = FilterSpec::step(1.7, 0.31).unwrap();
        p.n_s = 0.1;
        let q = convolve_element(CovElement::C12, &p, 2.0, &QuadratureConfig::default()).unwrap();
        assert_eq!(q.value, 0.0);
        assert_eq!(q.error, 0.0);
    }

    #[test]
    fn grid_bell_max_vacuum_hits_two_on_grid() {
        let v = CovMatrix::from_matrix(Matrix4::identity() * 0.5).unwrap();
        let found = grid_bell_max(&v, 1.2, 5).unwrap();
        assert_abs_diff_eq!(found, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn grid_bell_max_tmsv_finds_violation() {
        let found = grid_bell_max(&pure_tmsv(0.4), 1.2, 7).unwrap();
        assert!(found > 2.0, "grid should expose a violation, got {found}");
    }

    #[test]
    fn grid_bell_max_thermal_product_stays_local() {
        let found = grid_bell_max(&thermal_product(1.1, 1.1), 1.5, 5).unwrap();
        assert!(found <= 2.0 + 1e-9);
    }
}
