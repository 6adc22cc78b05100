//! Closed forms of the bath-weighted filter overlap integrals.
//!
//! Every correlation-matrix element reduces to integrals of the form
//! `int_0^T env(u) {cos, sin}(u dOmega) e^{2 kappa u} du` with `dOmega` the
//! carrier mismatch and `env` the filter-pair envelope. Both families
//! evaluate through the single complex primitive `phi1(z) = (e^z - 1)/z`,
//! which keeps the removable singularities at `kappa -> 0`, `dOmega -> 0`
//! and `2 kappa -> 1/tau_I + 1/tau_S` on one code path.

use num_complex::Complex64;

use crate::error::CoreError;
use crate::filters::{FilterFamily, FilterSpec};

/// `(e^z - 1)/z` with a Taylor branch near the removable singularity.
///
/// For `|z| < 1e-2` the direct form loses digits to cancellation while the
/// fourth-order series is already accurate to ~1e-13 relative.
pub(crate) fn phi1(z: Complex64) -> Complex64 {
    if z.norm_sqr() < 1e-4 {
        let c = Complex64::new(1.0, 0.0);
        c + z * (c / 2.0 + z * (c / 6.0 + z * (c / 24.0 + z / 120.0)))
    } else {
        (z.exp() - Complex64::new(1.0, 0.0)) / z
    }
}

/// Arguments shared by the pair kernels `j_s` and `j_c`.
#[derive(Debug, Clone, Copy)]
pub struct KernelArgs {
    pub filter_i: FilterSpec,
    pub filter_s: FilterSpec,
    /// Bath rate the kernel is evaluated at (not necessarily a party rate).
    pub kappa: f64,
    pub t: f64,
}

impl KernelArgs {
    pub fn new(
        filter_i: FilterSpec,
        filter_s: FilterSpec,
        kappa: f64,
        t: f64,
    ) -> Result<Self, CoreError> {
        if filter_i.family != filter_s.family {
            return Err(CoreError::InvalidParameter {
                field: "filter_pair",
                reason: "both filters must share the same family".into(),
            });
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(CoreError::InvalidParameter {
                field: "kappa",
                reason: format!("kappa must be >= 0, got {kappa}"),
            });
        }
        if !(t >= 0.0) {
            return Err(CoreError::InvalidParameter {
                field: "t",
                reason: format!("t must be >= 0, got {t}"),
            });
        }
        Ok(Self { filter_i, filter_s, kappa, t })
    }

    fn delta_omega(&self) -> f64 {
        self.filter_i.omega - self.filter_s.omega
    }
}

/// Fused pair kernel: returns `j_c + i j_s` for the given arguments.
fn j_fused(args: &KernelArgs) -> Complex64 {
    let delta = args.delta_omega();
    let scale_root = (args.filter_i.tau * args.filter_s.tau).sqrt();
    match args.filter_i.family {
        FilterFamily::Step => {
            let tau_eff = args.t.min(args.filter_i.tau).min(args.filter_s.tau);
            let z = Complex64::new(2.0 * args.kappa, delta) * tau_eff;
            phi1(z) * (tau_eff / scale_root)
        }
        FilterFamily::Exponential => {
            let gamma = args.filter_i.tau.recip() + args.filter_s.tau.recip();
            let z = Complex64::new(2.0 * args.kappa - gamma, delta) * args.t;
            phi1(z) * (2.0 * args.t / scale_root)
        }
    }
}

/// Sine-weighted pair kernel `J_s(kappa)`:
/// `int_0^T env(u) sin(u dOmega) e^{2 kappa u} du / sqrt(tau_I tau_S)`,
/// where `T = min(t, tau_I, tau_S)` for the step family and `T = t` with the
/// exponential envelope folded in for the exponential family. Odd in the
/// carrier mismatch; identically zero for matched carriers.
pub fn j_s(args: &KernelArgs) -> f64 {
    j_fused(args).im
}

/// Cosine-weighted pair kernel `J_c(kappa)`, the even counterpart of [`j_s`].
/// For identical filters it coincides with the single-party window integral.
pub fn j_c(args: &KernelArgs) -> f64 {
    j_fused(args).re
}

/// Single-party window integral `I(kappa)`:
/// `int_0^t |h(u)|^2 e^{2 kappa u} du`.
///
/// Step family: `(e^{2 kappa tau_eff} - 1) / (2 kappa tau_party)` with
/// `tau_eff = min(t, tau_party)`. Exponential family:
/// `(e^{2 (kappa - 1/tau) t} - 1) / ((kappa - 1/tau) tau)`. The limits
/// `kappa -> 0` and `kappa -> 1/tau` go through the same series branch.
pub fn i_window(family: FilterFamily, tau_party: f64, kappa: f64, t: f64) -> f64 {
    debug_assert!(tau_party > 0.0 && kappa >= 0.0 && t >= 0.0);
    match family {
        FilterFamily::Step => {
            let tau_eff = t.min(tau_party);
            let z = Complex64::new(2.0 * kappa * tau_eff, 0.0);
            tau_eff * phi1(z).re / tau_party
        }
        FilterFamily::Exponential => {
            let z = Complex64::new(2.0 * (kappa - tau_party.recip()) * t, 0.0);
            2.0 * t * phi1(z).re / tau_party
        }
    }
}

/// Filter overlap constant `K_f`: the full-support integral of the real pair
/// envelope. Equals 1 exactly when the two filters are identical and is
/// strictly smaller for any carrier or width mismatch.
pub fn k_f(filter_i: &FilterSpec, filter_s: &FilterSpec) -> f64 {
    debug_assert_eq!(filter_i.family, filter_s.family);
    let delta = filter_i.omega - filter_s.omega;
    let scale_root = (filter_i.tau * filter_s.tau).sqrt();
    match filter_i.family {
        FilterFamily::Step => {
            let tau_min = filter_i.tau.min(filter_s.tau);
            let x = tau_min * delta;
            let sinc = if x.abs() < 1e-2 {
                1.0 - x * x / 6.0 + x.powi(4) / 120.0
            } else {
                x.sin() / x
            };
            tau_min * sinc / scale_root
        }
        FilterFamily::Exponential => {
            let gamma = filter_i.tau.recip() + filter_s.tau.recip();
            2.0 * gamma / (scale_root * (gamma * gamma + delta * delta))
        }
    }
}

/// Thermal occupancy factor `p(t) = n (1 - e^{-2 kappa t}) + 1/2` for
/// `t >= 0` and the vacuum value `1/2` before switch-on.
pub fn thermal_occupancy(n: f64, kappa: f64, t: f64) -> f64 {
    debug_assert!(n >= 0.0 && kappa >= 0.0);
    if t < 0.0 {
        0.5
    } else {
        n * (-(-2.0 * kappa * t).exp_m1()) + 0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn step_pair(omega_s: f64, tau_i: f64, tau_s: f64) -> (FilterSpec, FilterSpec) {
        (
            FilterSpec::step(1.0, tau_i).unwrap(),
            FilterSpec::step(omega_s, tau_s).unwrap(),
        )
    }

    #[test]
    fn j_s_vanishes_for_matched_carriers() {
        for (tau_i, tau_s, kappa, t) in [(0.2, 0.2, 0.07, 5.0), (0.3, 0.9, 0.4, 0.1)] {
            let (fi, fs) = step_pair(1.0, tau_i, tau_s);
            let args = KernelArgs::new(fi, fs, kappa, t).unwrap();
            assert_eq!(j_s(&args), 0.0);
        }
    }

    #[test]
    fn j_s_step_kappa_zero_matches_direct_integral() {
        // int_0^0.2 sin(0.5 u) du / 0.2 = (1 - cos(0.1)) * 10
        let (fi, fs) = step_pair(0.5, 0.2, 0.2);
        let args = KernelArgs::new(fi, fs, 0.0, 1.0).unwrap();
        assert_relative_eq!(j_s(&args), 0.049_958_347_219_742_34, max_relative = 1e-13);
    }

    #[test]
    fn j_c_step_kappa_zero_identical_filters_saturates_at_one() {
        let (fi, fs) = step_pair(1.0, 0.2, 0.2);
        let args = KernelArgs::new(fi, fs, 0.0, 0.5).unwrap();
        assert_relative_eq!(j_c(&args), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn j_c_equals_window_integral_for_identical_filters() {
        for family in [FilterFamily::Step, FilterFamily::Exponential] {
            let f = FilterSpec::new(family, 1.0, 0.31).unwrap();
            for (kappa, t) in [(0.0, 0.2), (0.12, 0.7), (0.4, 3.0)] {
                let args = KernelArgs::new(f, f, kappa, t).unwrap();
                assert_relative_eq!(
                    j_c(&args),
                    i_window(family, 0.31, kappa, t),
                    max_relative = 1e-13
                );
            }
        }
    }

    #[test]
    fn i_window_step_limits() {
        assert_relative_eq!(i_window(FilterFamily::Step, 0.2, 0.0, 1.0), 1.0, max_relative = 1e-15);
        assert_eq!(i_window(FilterFamily::Step, 0.2, 0.3, 0.0), 0.0);
        // Partially filled window at kappa = 0 is t / tau.
        assert_relative_eq!(i_window(FilterFamily::Step, 0.2, 0.0, 0.05), 0.25, max_relative = 1e-15);
    }

    #[test]
    fn i_window_exponential_degenerate_rate() {
        // kappa = 1/tau is the removable 0/0 point: I = 2 t / tau.
        let tau = 0.2;
        let t = 0.37;
        assert_relative_eq!(
            i_window(FilterFamily::Exponential, tau, tau.recip(), t),
            2.0 * t / tau,
            max_relative = 1e-13
        );
    }

    #[test]
    fn k_f_is_one_for_identical_filters() {
        for family in [FilterFamily::Step, FilterFamily::Exponential] {
            let f = FilterSpec::new(family, 1.3, 0.2).unwrap();
            assert_abs_diff_eq!(k_f(&f, &f), 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn k_f_step_sinc_zero() {
        let tau = 0.2;
        let (fi, fs) = step_pair(1.0 + std::f64::consts::PI / tau, tau, tau);
        assert_abs_diff_eq!(k_f(&fi, &fs), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn k_f_exponential_width_mismatch() {
        // 2 sqrt(tau_i tau_s) / (tau_i + tau_s) for matched carriers.
        let fi = FilterSpec::exponential(1.0, 0.2).unwrap();
        let fs = FilterSpec::exponential(1.0, 0.208).unwrap();
        assert_relative_eq!(k_f(&fi, &fs), 0.999_807_747_763_291_1, max_relative = 1e-14);
    }

    #[test]
    fn k_f_equals_j_c_at_zero_rate_past_both_windows() {
        let (fi, fs) = step_pair(1.7, 0.2, 0.35);
        let args = KernelArgs::new(fi, fs, 0.0, 0.4).unwrap();
        assert_relative_eq!(k_f(&fi, &fs), j_c(&args), max_relative = 1e-13);
    }

    #[test]
    fn step_kernels_continuous_across_window_branch() {
        let (fi, fs) = step_pair(1.9, 0.2, 0.3);
        let tau_min = 0.2;
        for kappa in [0.0, 0.2] {
            let lo = KernelArgs::new(fi, fs, kappa, tau_min - 1e-11).unwrap();
            let hi = KernelArgs::new(fi, fs, kappa, tau_min + 1e-11).unwrap();
            assert_abs_diff_eq!(j_c(&lo), j_c(&hi), epsilon = 1e-10);
            assert_abs_diff_eq!(j_s(&lo), j_s(&hi), epsilon = 1e-10);
        }
    }

    #[test]
    fn thermal_occupancy_switch_on_and_saturation() {
        assert_eq!(thermal_occupancy(0.6, 0.07, 0.0), 0.5);
        assert_eq!(thermal_occupancy(0.6, 0.07, -1.0), 0.5);
        assert_relative_eq!(thermal_occupancy(0.6, 0.07, 1e9), 1.1, max_relative = 1e-12);
        assert_relative_eq!(
            thermal_occupancy(0.6, 0.07, 10.0),
            0.952_041_821_635_036_1,
            max_relative = 1e-14
        );
    }

    #[test]
    fn rejects_mixed_families() {
        let fi = FilterSpec::step(1.0, 0.2).unwrap();
        let fs = FilterSpec::exponential(1.0, 0.2).unwrap();
        assert!(KernelArgs::new(fi, fs, 0.1, 1.0).is_err());
    }
}
