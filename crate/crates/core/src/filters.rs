//! Temporal filter channels applied to the output field.
//!
//! A filter selects one spectral mode of the continuous output: a step window
//! of width `tau` or a one-sided exponential of decay time `tau`, both riding
//! on a carrier `exp(-i omega t)`. Frequencies are expressed in units of the
//! reference mode frequency and times in its inverse, so caption-style
//! parameters like `tau = 0.2` are entered directly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::quad;

/// Filter impulse-response family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterFamily {
    /// Rectangular window of width `tau`, amplitude `1/sqrt(tau)`.
    Step,
    /// One-sided exponential decay `exp(-t/tau)`, amplitude `sqrt(2/tau)`.
    Exponential,
}

/// One filter channel: family, carrier frequency and window parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub family: FilterFamily,
    /// Carrier angular frequency (units of the reference frequency).
    pub omega: f64,
    /// Window width (step) or decay time (exponential), strictly positive.
    pub tau: f64,
}

impl FilterSpec {
    pub fn new(family: FilterFamily, omega: f64, tau: f64) -> Result<Self, CoreError> {
        if !tau.is_finite() || tau <= 0.0 {
            return Err(CoreError::InvalidParameter {
                field: "tau",
                reason: format!("tau must be > 0, got {tau}"),
            });
        }
        if !omega.is_finite() {
            return Err(CoreError::InvalidParameter {
                field: "omega",
                reason: format!("omega must be finite, got {omega}"),
            });
        }
        Ok(Self { family, omega, tau })
    }

    pub fn step(omega: f64, tau: f64) -> Result<Self, CoreError> {
        Self::new(FilterFamily::Step, omega, tau)
    }

    pub fn exponential(omega: f64, tau: f64) -> Result<Self, CoreError> {
        Self::new(FilterFamily::Exponential, omega, tau)
    }

    /// Impulse response h(t).
    ///
    /// The step function is right-continuous (`theta(0) = 1`), so t = 0 lies
    /// inside the window for both families.
    pub fn eval(&self, t: f64) -> Complex64 {
        let env = match self.family {
            FilterFamily::Step => {
                if t >= 0.0 && t < self.tau {
                    self.tau.sqrt().recip()
                } else {
                    return Complex64::new(0.0, 0.0);
                }
            }
            FilterFamily::Exponential => {
                if t >= 0.0 {
                    (-t / self.tau).exp() / (self.tau / 2.0).sqrt()
                } else {
                    return Complex64::new(0.0, 0.0);
                }
            }
        };
        let phase = -self.omega * t;
        Complex64::new(env * phase.cos(), env * phase.sin())
    }

    /// End of the support: `tau` for the step family, infinite for the
    /// exponential family.
    pub fn support_end(&self) -> f64 {
        match self.family {
            FilterFamily::Step => self.tau,
            FilterFamily::Exponential => f64::INFINITY,
        }
    }

    /// Upper limit for numerical integration over this filter. The
    /// exponential tail is cut at `40 tau`, where the residual envelope mass
    /// is below `e^{-80}`.
    pub(crate) fn integration_cutoff(&self) -> f64 {
        match self.family {
            FilterFamily::Step => self.tau,
            FilterFamily::Exponential => 40.0 * self.tau,
        }
    }
}

/// Deviation from orthonormality of two filters of the same family:
/// `| int_0^inf h_i(t) h_j*(t) dt - delta_ij |`, evaluated by adaptive
/// quadrature.
///
/// Exact orthogonality of distinct modes holds for step filters with equal
/// `tau` and carrier offsets on the comb `2 pi k / tau`; exponential filters
/// keep a finite residual overlap at any offset, which this reports rather
/// than rejects.
pub fn orthonormality_defect(spec_i: &FilterSpec, spec_j: &FilterSpec) -> Result<f64, CoreError> {
    assert_eq!(
        spec_i.family, spec_j.family,
        "orthonormality_defect requires filters of the same family"
    );
    let delta = if spec_i == spec_j { 1.0 } else { 0.0 };

    let upper = spec_i.integration_cutoff().max(spec_j.integration_cutoff());
    let mut marks = quad::half_period_marks(spec_i.omega - spec_j.omega, upper);
    marks.push(spec_i.tau);
    marks.push(spec_j.tau);

    let re = quad::integrate(
        |t| (spec_i.eval(t) * spec_j.eval(t).conj()).re,
        0.0,
        upper,
        &marks,
        1e-11,
        1e-13,
        2000,
    )?;
    let im = quad::integrate(
        |t| (spec_i.eval(t) * spec_j.eval(t).conj()).im,
        0.0,
        upper,
        &marks,
        1e-11,
        1e-13,
        2000,
    )?;

    Ok(Complex64::new(re.value - delta, im.value).norm())
}
