//! Assembly of the time-dependent 4x4 covariance matrix for both
//! thermalization scenarios.
//!
//! Quadrature ordering is `(X_I, Y_I, X_S, Y_S)` with vacuum variance 1/2.
//! The matrix carries the block structure
//! `V = [[V_I, C], [C^T, V_S]]` with `V_I = diag(D_I, D_I)/2`,
//! `V_S = diag(D_S, D_S)/2` and `C = [[C11, C12], [C21, C22]]/2`, where the
//! dynamics force `C21 = C12` and `C22 = -C11`.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::filters::FilterSpec;
use crate::kernels::{i_window, j_c, j_s, k_f, KernelArgs};

/// Which side of the squeezing crystal the thermal baths act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Baths thermalize the vacuum inputs before squeezing.
    Tmstdf,
    /// Baths act on the squeezed output before filtering.
    Tdtmsv,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scenario::Tmstdf => write!(f, "tmstdf"),
            Scenario::Tdtmsv => write!(f, "tdtmsv"),
        }
    }
}

/// Full physical configuration of one run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub scenario: Scenario,
    /// Squeezing amplitude, dimensionless.
    pub r: f64,
    /// Mean thermal occupancy of each party's bath.
    pub n_i: f64,
    pub n_s: f64,
    /// Bath coupling rates: input-side rates for [`Scenario::Tmstdf`],
    /// output-side rates for [`Scenario::Tdtmsv`].
    pub kappa_i: f64,
    pub kappa_s: f64,
    pub filter_i: FilterSpec,
    pub filter_s: FilterSpec,
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.r >= 0.0) || !self.r.is_finite() {
            return Err(CoreError::InvalidParameter {
                field: "r",
                reason: format!("r must be >= 0, got {}", self.r),
            });
        }
        for (field, v) in [("n_i", self.n_i), ("n_s", self.n_s)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(CoreError::InvalidParameter {
                    field,
                    reason: format!("{field} must be >= 0, got {v}"),
                });
            }
        }
        for (field, v) in [("kappa_i", self.kappa_i), ("kappa_s", self.kappa_s)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CoreError::InvalidParameter {
                    field,
                    reason: format!("{field} must be > 0, got {v}"),
                });
            }
        }
        if self.filter_i.family != self.filter_s.family {
            return Err(CoreError::InvalidParameter {
                field: "filter_s",
                reason: "both parties must use the same filter family".into(),
            });
        }
        FilterSpec::new(self.filter_i.family, self.filter_i.omega, self.filter_i.tau)?;
        FilterSpec::new(self.filter_s.family, self.filter_s.omega, self.filter_s.tau)?;
        Ok(())
    }

    /// Assemble the covariance matrix at time `t` for this scenario.
    pub fn assemble(&self, t: f64) -> Result<CovMatrix, CoreError> {
        match self.scenario {
            Scenario::Tmstdf => assemble_tmstdf(self, t),
            Scenario::Tdtmsv => assemble_tdtmsv(self, t),
        }
    }
}

/// Real symmetric 4x4 covariance matrix with named block accessors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovMatrix {
    m: Matrix4<f64>,
}

impl CovMatrix {
    /// Build from the scalar block elements, imposing `C21 = C12` and
    /// `C22 = -C11`.
    pub fn from_blocks(d_i: f64, d_s: f64, c11: f64, c12: f64) -> Self {
        let h = 0.5;
        let m = Matrix4::new(
            h * d_i, 0.0, h * c11, h * c12,
            0.0, h * d_i, h * c12, -h * c11,
            h * c11, h * c12, h * d_s, 0.0,
            h * c12, -h * c11, 0.0, h * d_s,
        );
        Self { m }
    }

    /// Wrap an arbitrary symmetric matrix. Fails if the asymmetry exceeds
    /// 1e-12; smaller asymmetries are symmetrized away.
    pub fn from_matrix(m: Matrix4<f64>) -> Result<Self, CoreError> {
        let asym = (m - m.transpose()).abs().max();
        if asym > 1e-12 {
            return Err(CoreError::NumericalFailure(format!(
                "covariance matrix asymmetry {asym:.3e} exceeds 1e-12"
            )));
        }
        Ok(Self { m: (m + m.transpose()) * 0.5 })
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.m
    }

    pub fn d_i(&self) -> f64 {
        2.0 * self.m[(0, 0)]
    }

    pub fn d_s(&self) -> f64 {
        2.0 * self.m[(2, 2)]
    }

    pub fn c11(&self) -> f64 {
        2.0 * self.m[(0, 2)]
    }

    pub fn c12(&self) -> f64 {
        2.0 * self.m[(0, 3)]
    }

    pub fn c21(&self) -> f64 {
        2.0 * self.m[(1, 2)]
    }

    pub fn c22(&self) -> f64 {
        2.0 * self.m[(1, 3)]
    }

    /// Determinant of the party-I diagonal block.
    pub fn det_block_i(&self) -> f64 {
        self.m[(0, 0)] * self.m[(1, 1)] - self.m[(0, 1)] * self.m[(1, 0)]
    }

    /// Determinant of the party-S diagonal block.
    pub fn det_block_s(&self) -> f64 {
        self.m[(2, 2)] * self.m[(3, 3)] - self.m[(2, 3)] * self.m[(3, 2)]
    }

    /// Determinant of the cross-correlation block.
    pub fn det_block_corr(&self) -> f64 {
        self.m[(0, 2)] * self.m[(1, 3)] - self.m[(0, 3)] * self.m[(1, 2)]
    }

    pub fn det(&self) -> f64 {
        self.m.determinant()
    }

    /// Largest diagonal entry, used to size search boxes in phase space.
    pub fn max_diagonal(&self) -> f64 {
        self.m.diagonal().max()
    }
}

/// Two-mode symplectic form in `(X_I, Y_I, X_S, Y_S)` ordering.
fn symplectic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0,
        -1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, -1.0, 0.0,
    )
}

/// Smallest symplectic eigenvalue of the full matrix: the minimum of
/// `|eig(i Omega V)|`. Physical states satisfy `nu_min >= 1/2` in this
/// convention.
pub fn min_symplectic_eigenvalue_full(v: &CovMatrix) -> Result<f64, CoreError> {
    let m = symplectic_form() * v.matrix();
    let schur = nalgebra::linalg::Schur::try_new(m, 1e-14, 50_000).ok_or_else(|| {
        CoreError::NumericalFailure("Schur iteration for the symplectic spectrum did not converge".into())
    })?;
    let eigs = schur.complex_eigenvalues();
    Ok(eigs.iter().map(|l| l.norm()).fold(f64::INFINITY, f64::min))
}

const PHYSICALITY_SLACK: f64 = 1e-9;

fn check_physical(v: CovMatrix) -> Result<CovMatrix, CoreError> {
    let nu_min = min_symplectic_eigenvalue_full(&v)?;
    if nu_min < 0.5 - PHYSICALITY_SLACK {
        return Err(CoreError::UnphysicalState { nu_min });
    }
    Ok(v)
}

fn validate_time(t: f64) -> Result<(), CoreError> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(CoreError::DomainError(format!("t must be >= 0 and finite, got {t}")));
    }
    Ok(())
}

/// Covariance matrix when the vacuum inputs thermalize before squeezing.
pub fn assemble_tmstdf(params: &ScenarioParams, t: f64) -> Result<CovMatrix, CoreError> {
    params.validate()?;
    validate_time(t)?;
    if params.scenario != Scenario::Tmstdf {
        return Err(CoreError::InvalidParameter {
            field: "scenario",
            reason: "assemble_tmstdf requires the tmstdf scenario".into(),
        });
    }

    let family = params.filter_i.family;
    let (tau_i, tau_s) = (params.filter_i.tau, params.filter_s.tau);
    let ch = (2.0 * params.r).cosh();
    let sh = (2.0 * params.r).sinh();
    let decay_i = (-2.0 * params.kappa_i * t).exp();
    let decay_s = (-2.0 * params.kappa_s * t).exp();

    // Window integrals of each party's own filter at the two bath rates.
    let wi = |kappa: f64| i_window(family, tau_i, kappa, t);
    let ws = |kappa: f64| i_window(family, tau_s, kappa, t);
    let d_i = params.n_i * (wi(0.0) - decay_i * wi(params.kappa_i)) * (1.0 + ch)
        - params.n_s * (wi(0.0) - decay_s * wi(params.kappa_s)) * (1.0 - ch)
        + ch;
    let d_s = -params.n_i * (ws(0.0) - decay_i * ws(params.kappa_i)) * (1.0 - ch)
        + params.n_s * (ws(0.0) - decay_s * ws(params.kappa_s)) * (1.0 + ch)
        + ch;

    let pair = |kappa: f64| KernelArgs::new(params.filter_i, params.filter_s, kappa, t);
    let jc0 = j_c(&pair(0.0)?);
    let jci = j_c(&pair(params.kappa_i)?);
    let jcs = j_c(&pair(params.kappa_s)?);
    let kf = k_f(&params.filter_i, &params.filter_s);
    let c11 = sh
        * (-params.n_i * decay_i * jci - params.n_s * decay_s * jcs
            + (params.n_i + params.n_s) * jc0
            + kf);

    let js0 = j_s(&pair(0.0)?);
    let jsi = j_s(&pair(params.kappa_i)?);
    let jss = j_s(&pair(params.kappa_s)?);
    let c12 = -sh
        * (-params.n_i * decay_i * jsi + params.n_s * decay_s * jss
            + (params.n_i - params.n_s) * js0);

    check_physical(CovMatrix::from_blocks(d_i, d_s, c11, c12))
}

/// Covariance matrix when the squeezed output thermalizes before filtering.
pub fn assemble_tdtmsv(params: &ScenarioParams, t: f64) -> Result<CovMatrix, CoreError> {
    params.validate()?;
    validate_time(t)?;
    if params.scenario != Scenario::Tdtmsv {
        return Err(CoreError::InvalidParameter {
            field: "scenario",
            reason: "assemble_tdtmsv requires the tdtmsv scenario".into(),
        });
    }

    let family = params.filter_i.family;
    let ch = (2.0 * params.r).cosh();
    let sh = (2.0 * params.r).sinh();
    let decay_i = (-2.0 * params.kappa_i * t).exp();
    let decay_s = (-2.0 * params.kappa_s * t).exp();

    let wi0 = i_window(family, params.filter_i.tau, 0.0, t);
    let wik = i_window(family, params.filter_i.tau, params.kappa_i, t);
    let ws0 = i_window(family, params.filter_s.tau, 0.0, t);
    let wsk = i_window(family, params.filter_s.tau, params.kappa_s, t);

    let d_i = (2.0 * params.n_i + 1.0) * (wi0 - decay_i * wik) + (1.0 - wi0 + decay_i * wik) * ch;
    let d_s = (2.0 * params.n_s + 1.0) * (ws0 - decay_s * wsk) + (1.0 - ws0 + decay_s * wsk) * ch;

    let kappa_mean = 0.5 * (params.kappa_i + params.kappa_s);
    let jc0 = j_c(&KernelArgs::new(params.filter_i, params.filter_s, 0.0, t)?);
    let jcm = j_c(&KernelArgs::new(params.filter_i, params.filter_s, kappa_mean, t)?);
    let kf = k_f(&params.filter_i, &params.filter_s);
    let c11 = (kf - jc0 + (-(params.kappa_i + params.kappa_s) * t).exp() * jcm) * sh;

    check_physical(CovMatrix::from_blocks(d_i, d_s, c11, 0.0))
}

/// Covariance matrix of the pure two-mode squeezed vacuum, the common
/// zero-decoherence limit of both scenarios with identical filters.
pub fn pure_tmsv(r: f64) -> CovMatrix {
    let ch = (2.0 * r).cosh();
    let sh = (2.0 * r).sinh();
    CovMatrix::from_blocks(ch, ch, sh, 0.0)
}

/// Product thermal state `diag(p, p, q, q)` with per-party variances p, q.
pub fn thermal_product(p: f64, q: f64) -> CovMatrix {
    CovMatrix::from_matrix(Matrix4::from_diagonal(&Vector4::new(p, p, q, q)))
        .expect("diagonal matrix is symmetric")
}
