//! Randomized cross-check of the closed-form covariance elements against the
//! quadrature oracle, plus the physicality sweep over the same draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::covariance::{min_symplectic_eigenvalue_full, Scenario, ScenarioParams};
use crate::error::CoreError;
use crate::filters::{FilterFamily, FilterSpec};
use crate::oracle::{convolve_element, CovElement, QuadratureConfig};

/// Configuration of one verification run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VerificationConfig {
    /// Random parameter draws per scenario (split evenly across families).
    pub draws_per_scenario: usize,
    pub seed: u64,
    /// Relative agreement tolerance between closed form and quadrature.
    pub rel_tol: f64,
    /// Absolute tolerance near zeros.
    pub abs_tol: f64,
    pub quadrature: QuadratureConfig,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        Self {
            draws_per_scenario: 1000,
            seed: 42,
            rel_tol: 1e-6,
            abs_tol: 1e-10,
            quadrature: QuadratureConfig::default(),
        }
    }
}

/// Worst-case agreement statistics for one (scenario, element) pair.
#[derive(Debug, Clone, Serialize)]
pub struct ElementStats {
    pub scenario: Scenario,
    pub element: &'static str,
    pub checks: usize,
    pub worst_rel: f64,
    pub worst_abs: f64,
    pub failures: usize,
}

/// Outcome of [`run_verification`].
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub draws: usize,
    pub checks: usize,
    pub failures: usize,
    /// Smallest symplectic eigenvalue seen across every assembled matrix.
    pub min_symplectic: f64,
    pub per_element: Vec<ElementStats>,
    pub passed: bool,
}

/// Draw one random parameter set and evaluation time.
///
/// Ranges: carrier mismatch in [-5, 5], widths in [0.05, 1], a shared rate
/// in [0.01, 0.5], squeezing in [0, 2], occupancies drawn independently in
/// [0, 1.5] (asymmetric baths keep the antisymmetric element exercised),
/// time in [0, 50].
pub fn sample_scenario(
    rng: &mut impl Rng,
    scenario: Scenario,
    family: FilterFamily,
) -> (ScenarioParams, f64) {
    let delta: f64 = rng.gen_range(-5.0..=5.0);
    let tau_i: f64 = rng.gen_range(0.05..=1.0);
    let tau_s: f64 = rng.gen_range(0.05..=1.0);
    let kappa: f64 = rng.gen_range(0.01..=0.5);
    let r: f64 = rng.gen_range(0.0..=2.0);
    let n_i: f64 = rng.gen_range(0.0..=1.5);
    let n_s: f64 = rng.gen_range(0.0..=1.5);
    let t: f64 = rng.gen_range(0.0..=50.0);
    let params = ScenarioParams {
        scenario,
        r,
        n_i,
        n_s,
        kappa_i: kappa,
        kappa_s: kappa,
        filter_i: FilterSpec::new(family, 1.0, tau_i).expect("valid draw"),
        filter_s: FilterSpec::new(family, 1.0 + delta, tau_s).expect("valid draw"),
    };
    (params, t)
}

struct DrawOutcome {
    scenario: Scenario,
    nu_min: f64,
    // (element index, rel error, abs error, failed)
    elements: [(f64, f64, bool); 4],
}

/// Compare every assembled covariance element against the quadrature oracle
/// over a seeded random grid, and track the physicality of each draw.
pub fn run_verification(cfg: &VerificationConfig) -> Result<VerificationReport, CoreError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut draws: Vec<(ScenarioParams, f64)> = Vec::new();
    for scenario in [Scenario::Tmstdf, Scenario::Tdtmsv] {
        for k in 0..cfg.draws_per_scenario {
            let family = if k % 2 == 0 { FilterFamily::Step } else { FilterFamily::Exponential };
            draws.push(sample_scenario(&mut rng, scenario, family));
        }
    }

    let outcomes: Vec<DrawOutcome> = draws
        .par_iter()
        .map(|(params, t)| -> Result<DrawOutcome, CoreError> {
            let v = params.assemble(*t)?;
            let nu_min = min_symplectic_eigenvalue_full(&v)?;
            let mut elements = [(0.0, 0.0, false); 4];
            for (slot, element) in CovElement::ALL.iter().enumerate() {
                let closed = element.of(&v);
                let oracle = convolve_element(*element, params, *t, &cfg.quadrature)?;
                let abs_err = (closed - oracle.value).abs();
                let scale = closed.abs().max(oracle.value.abs());
                let rel_err = if scale > 0.0 { abs_err / scale } else { 0.0 };
                // The oracle's own achieved error widens the acceptance band.
                let failed =
                    abs_err > (cfg.abs_tol + oracle.error).max(cfg.rel_tol * scale + oracle.error);
                elements[slot] = (rel_err, abs_err, failed);
            }
            Ok(DrawOutcome { scenario: params.scenario, nu_min, elements })
        })
        .collect::<Result<_, _>>()?;

    let mut per_element = Vec::new();
    for scenario in [Scenario::Tmstdf, Scenario::Tdtmsv] {
        for (slot, element) in CovElement::ALL.iter().enumerate() {
            let mut stats = ElementStats {
                scenario,
                element: element.name(),
                checks: 0,
                worst_rel: 0.0,
                worst_abs: 0.0,
                failures: 0,
            };
            for out in outcomes.iter().filter(|o| o.scenario == scenario) {
                let (rel, abs, failed) = out.elements[slot];
                stats.checks += 1;
                // Worst relative error among points that are not both zero.
                if abs > cfg.abs_tol {
                    stats.worst_rel = stats.worst_rel.max(rel);
                }
                stats.worst_abs = stats.worst_abs.max(abs);
                stats.failures += usize::from(failed);
            }
            per_element.push(stats);
        }
    }

    let failures: usize = per_element.iter().map(|s| s.failures).sum();
    let min_symplectic = outcomes.iter().map(|o| o.nu_min).fold(f64::INFINITY, f64::min);
    let checks = outcomes.len() * CovElement::ALL.len();
    let physical = min_symplectic >= 0.5 - 1e-9;

    Ok(VerificationReport {
        draws: outcomes.len(),
        checks,
        failures,
        min_symplectic,
        per_element,
        passed: failures == 0 && physical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_verification_run_passes() {
        let cfg = VerificationConfig { draws_per_scenario: 24, seed: 7, ..Default::default() };
        let report = run_verification(&cfg).unwrap();
        assert_eq!(report.draws, 48);
        assert_eq!(report.failures, 0);
        assert!(report.min_symplectic >= 0.5 - 1e-9);
        assert!(report.passed);
    }

    #[test]
    fn identical_seeds_reproduce_the_report() {
        let cfg = VerificationConfig { draws_per_scenario: 8, seed: 3, ..Default::default() };
        let a = run_verification(&cfg).unwrap();
        let b = run_verification(&cfg).unwrap();
        assert_eq!(a.min_symplectic.to_bits(), b.min_symplectic.to_bits());
        for (x, y) in a.per_element.iter().zip(&b.per_element) {
            assert_eq!(x.worst_rel.to_bits(), y.worst_rel.to_bits());
        }
    }
}
