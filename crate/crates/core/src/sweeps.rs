//! Figure-level data production: time series on the normalized decoherence
//! clock, one-dimensional parameter sweeps, and extraction of the extremal
//! squeezing value with its threshold crossings.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::ScenarioParams;
use crate::error::CoreError;
use crate::measures::{bell_max, log_negativity, BellOptConfig, BellSettings};

/// Which measure a sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// Logarithmic negativity.
    En,
    /// Maximal displaced-parity Bell value.
    Bmax,
}

impl Measure {
    /// Threshold separating the "interesting" region: positivity for
    /// entanglement (with a small offset above the clamp), the local bound 2
    /// for the Bell value.
    pub fn threshold(&self) -> f64 {
        match self {
            Measure::En => 1e-9,
            Measure::Bmax => 2.0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Measure::En => "E_N",
            Measure::Bmax => "B_max",
        }
    }
}

/// Sweepable parameter axes. Occupancy and rate axes set both parties
/// symmetrically; the carrier axis offsets party S against party I; the
/// width axis overrides party S.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    R,
    N,
    Kappa,
    DeltaOmega,
    TauS,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::R => "r",
            SweepAxis::N => "n",
            SweepAxis::Kappa => "kappa",
            SweepAxis::DeltaOmega => "delta_omega",
            SweepAxis::TauS => "tau_s",
        }
    }

    fn apply(&self, base: &ScenarioParams, value: f64) -> ScenarioParams {
        let mut p = *base;
        match self {
            SweepAxis::R => p.r = value,
            SweepAxis::N => {
                p.n_i = value;
                p.n_s = value;
            }
            SweepAxis::Kappa => {
                p.kappa_i = value;
                p.kappa_s = value;
            }
            SweepAxis::DeltaOmega => p.filter_s.omega = p.filter_i.omega + value,
            SweepAxis::TauS => p.filter_s.tau = value,
        }
        p
    }
}

/// Labeled (abscissa, value) series with the full parameter snapshot it was
/// generated from.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSeries {
    pub label: String,
    pub abscissa_name: String,
    pub points: Vec<(f64, f64)>,
    pub meta: ScenarioParams,
}

/// Per-sweep evaluation options (currently the Bell optimizer settings).
#[derive(Debug, Clone, Copy, Default)]
pub struct MeasureConfig {
    pub bell: BellOptConfig,
}

/// Invert the decoherence clock `T = 1 - exp(-kappa t)`.
pub fn normalized_time(kappa: f64, t_norm: f64) -> Result<f64, CoreError> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(CoreError::DomainError(format!("kappa must be > 0, got {kappa}")));
    }
    if !(0.0..1.0).contains(&t_norm) {
        return Err(CoreError::DomainError(format!("T must lie in [0, 1), got {t_norm}")));
    }
    Ok(-(-t_norm).ln_1p() / kappa)
}

/// The rate that defines the shared clock when the two parties differ.
fn clock_rate(params: &ScenarioParams) -> f64 {
    params.kappa_i.max(params.kappa_s)
}

fn eval_measure(
    params: &ScenarioParams,
    t: f64,
    measure: Measure,
    bell: &BellOptConfig,
) -> Result<(f64, Option<BellSettings>), CoreError> {
    let v = params.assemble(t)?;
    match measure {
        Measure::En => Ok((log_negativity(&v)?, None)),
        Measure::Bmax => {
            let res = bell_max(&v, bell)?;
            Ok((res.b_max, Some(res.argmax)))
        }
    }
}

fn validate_grid(grid: &[f64]) -> Result<(), CoreError> {
    if grid.is_empty() {
        return Err(CoreError::DomainError("grid must be nonempty".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CoreError::DomainError("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Evaluate `measure` along a strictly increasing grid of normalized times.
///
/// Entanglement points evaluate in parallel. Bell points run in grid order
/// so each optimization warm-starts from the previous argmax, with the seed
/// advanced per point to keep runs reproducible.
pub fn time_series(
    params: &ScenarioParams,
    measure: Measure,
    t_grid: &[f64],
    cfg: &MeasureConfig,
) -> Result<SweepSeries, CoreError> {
    params.validate()?;
    validate_grid(t_grid)?;
    if t_grid[0] < 0.0 || *t_grid.last().unwrap() >= 1.0 {
        return Err(CoreError::DomainError("normalized times must lie in [0, 1)".into()));
    }

    let kappa = clock_rate(params);
    let points = match measure {
        Measure::En => t_grid
            .par_iter()
            .map(|&t_norm| {
                let t = normalized_time(kappa, t_norm)?;
                let (value, _) = eval_measure(params, t, measure, &cfg.bell)?;
                Ok((t_norm, value))
            })
            .collect::<Result<Vec<_>, CoreError>>()?,
        Measure::Bmax => {
            let mut out = Vec::with_capacity(t_grid.len());
            let mut warm: Option<BellSettings> = None;
            for (idx, &t_norm) in t_grid.iter().enumerate() {
                let t = normalized_time(kappa, t_norm)?;
                let bell = BellOptConfig {
                    seed: cfg.bell.seed.wrapping_add(idx as u64),
                    warm_start: warm,
                    ..cfg.bell
                };
                let (value, argmax) = eval_measure(params, t, measure, &bell)?;
                warm = argmax;
                out.push((t_norm, value));
            }
            out
        }
    };

    Ok(SweepSeries {
        label: format!("{}_{}", params.scenario, measure.label()),
        abscissa_name: "T".into(),
        points,
        meta: *params,
    })
}

/// Evaluate `measure` at fixed normalized time `t_norm` while one axis
/// varies. The clock follows the overridden parameters, so a rate sweep
/// compares states at matched `T` rather than matched `t`.
pub fn param_sweep(
    base: &ScenarioParams,
    axis: SweepAxis,
    values: &[f64],
    measure: Measure,
    t_norm: f64,
    cfg: &MeasureConfig,
) -> Result<SweepSeries, CoreError> {
    base.validate()?;
    if values.is_empty() {
        return Err(CoreError::DomainError("sweep values must be nonempty".into()));
    }

    let eval_at = |value: f64, bell: &BellOptConfig| -> Result<(f64, Option<BellSettings>), CoreError> {
        let params = axis.apply(base, value);
        params.validate()?;
        let t = normalized_time(clock_rate(&params), t_norm)?;
        eval_measure(&params, t, measure, bell)
    };

    let points = match measure {
        Measure::En => values
            .par_iter()
            .map(|&value| Ok((value, eval_at(value, &cfg.bell)?.0)))
            .collect::<Result<Vec<_>, CoreError>>()?,
        Measure::Bmax => {
            let mut out = Vec::with_capacity(values.len());
            let mut warm: Option<BellSettings> = None;
            for (idx, &value) in values.iter().enumerate() {
                let bell = BellOptConfig {
                    seed: cfg.bell.seed.wrapping_add(idx as u64),
                    warm_start: warm,
                    ..cfg.bell
                };
                let (v, argmax) = eval_at(value, &bell)?;
                warm = argmax;
                out.push((value, v));
            }
            out
        }
    };

    Ok(SweepSeries {
        label: format!("{}_{}_vs_{}", base.scenario, measure.label(), axis.name()),
        abscissa_name: axis.name().into(),
        points,
        meta: *base,
    })
}

/// Whether a threshold crossing was pinned down inside the search interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketStatus {
    Bracketed,
    NotBracketed,
}

/// Extremal squeezing report: the measure's peak over `r` and the threshold
/// crossings on both sides.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CutoffReport {
    pub r_max: f64,
    pub value_at_max: f64,
    /// Lower/upper crossing abscissas. When a side is not bracketed the
    /// search boundary is reported and flagged.
    pub r_lcf: f64,
    pub r_ucf: f64,
    pub threshold: f64,
    pub lower_bracket: BracketStatus,
    pub upper_bracket: BracketStatus,
    /// False when the measure never exceeds the threshold on the interval
    /// (no extremum worth reporting; cutoffs collapse onto `r_max`).
    pub exceeds_threshold: bool,
}

const SCAN_POINTS: usize = 32;
const GOLDEN_TOL: f64 = 1e-7;
const BISECT_RESIDUAL: f64 = 1e-9;

/// Locate the squeezing value maximizing `measure` at fixed normalized time,
/// then bisect for the threshold crossings on both sides.
///
/// A 32-point pre-scan brackets the global maximum first, so a multi-modal
/// profile degrades to scan+refine instead of misleading the golden-section
/// stage.
pub fn find_extremum_and_cutoffs(
    base: &ScenarioParams,
    measure: Measure,
    t_norm: f64,
    r_lo: f64,
    r_hi: f64,
    cfg: &MeasureConfig,
) -> Result<CutoffReport, CoreError> {
    if !(0.0 <= r_lo && r_lo < r_hi) {
        return Err(CoreError::DomainError(format!(
            "need 0 <= r_lo < r_hi, got [{r_lo}, {r_hi}]"
        )));
    }
    base.validate()?;

    let f = |r: f64| -> Result<f64, CoreError> {
        let params = SweepAxis::R.apply(base, r);
        let t = normalized_time(clock_rate(&params), t_norm)?;
        Ok(eval_measure(&params, t, measure, &cfg.bell)?.0)
    };

    // Pre-scan.
    let scan: Vec<(f64, f64)> = (0..SCAN_POINTS)
        .map(|i| {
            let r = r_lo + (r_hi - r_lo) * i as f64 / (SCAN_POINTS - 1) as f64;
            Ok((r, f(r)?))
        })
        .collect::<Result<_, CoreError>>()?;
    let best_idx = scan
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .unwrap();

    // Golden-section refinement inside the bracketing pair of scan points.
    let lo = scan[best_idx.saturating_sub(1)].0;
    let hi = scan[(best_idx + 1).min(SCAN_POINTS - 1)].0;
    let (mut r_max, mut value_at_max) = scan[best_idx];
    if hi > lo {
        let (r_g, v_g) = golden_max(&f, lo, hi)?;
        if v_g > value_at_max {
            r_max = r_g;
            value_at_max = v_g;
        }
    }

    let threshold = measure.threshold();
    if value_at_max <= threshold {
        return Ok(CutoffReport {
            r_max,
            value_at_max,
            r_lcf: r_max,
            r_ucf: r_max,
            threshold,
            lower_bracket: BracketStatus::NotBracketed,
            upper_bracket: BracketStatus::NotBracketed,
            exceeds_threshold: false,
        });
    }

    let (value_lo, value_hi) = (scan[0].1, scan[SCAN_POINTS - 1].1);
    let (r_lcf, lower_bracket) = if value_lo > threshold {
        (r_lo, BracketStatus::NotBracketed)
    } else {
        (bisect_crossing(&f, r_lo, r_max, threshold)?, BracketStatus::Bracketed)
    };
    let (r_ucf, upper_bracket) = if value_hi > threshold {
        (r_hi, BracketStatus::NotBracketed)
    } else {
        (bisect_crossing(&f, r_hi, r_max, threshold)?, BracketStatus::Bracketed)
    };

    Ok(CutoffReport {
        r_max,
        value_at_max,
        r_lcf,
        r_ucf,
        threshold,
        lower_bracket,
        upper_bracket,
        exceeds_threshold: true,
    })
}

fn golden_max(
    f: &impl Fn(f64) -> Result<f64, CoreError>,
    mut a: f64,
    mut b: f64,
) -> Result<(f64, f64), CoreError> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > GOLDEN_TOL {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    let mid = 0.5 * (a + b);
    Ok((mid, f(mid)?))
}

/// Bisect for `f(r) = threshold` between an outside point (`f <= threshold`)
/// and the peak (`f > threshold`).
fn bisect_crossing(
    f: &impl Fn(f64) -> Result<f64, CoreError>,
    outside: f64,
    peak: f64,
    threshold: f64,
) -> Result<f64, CoreError> {
    let mut lo = outside;
    let mut hi = peak;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        if (v - threshold).abs() < BISECT_RESIDUAL || (hi - lo).abs() < 1e-13 {
            return Ok(mid);
        }
        if v > threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(mid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::{Scenario, ScenarioParams};
    use crate::filters::FilterSpec;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn fig2() -> ScenarioParams {
        ScenarioParams {
            scenario: Scenario::Tmstdf,
            r: 1.0,
            n_i: 0.6,
            n_s: 0.6,
            kappa_i: 0.07,
            kappa_s: 0.07,
            filter_i: FilterSpec::step(1.0, 0.2).unwrap(),
            filter_s: FilterSpec::step(1.0, 0.2).unwrap(),
        }
    }

    #[test]
    fn normalized_time_closed_form() {
        assert_eq!(normalized_time(0.07, 0.0).unwrap(), 0.0);
        // T = 0.5 at t = ln 2 / kappa.
        assert_relative_eq!(
            normalized_time(0.07, 0.5).unwrap(),
            9.902_102_579_427_789,
            max_relative = 1e-13
        );
        assert!(normalized_time(0.07, 1.0).is_err());
        assert!(normalized_time(0.07, -0.1).is_err());
        assert!(normalized_time(0.0, 0.5).is_err());
    }

    #[test]
    fn normalized_time_round_trips() {
        for t_norm in [0.0, 0.1, 0.5, 0.93, 0.9999] {
            let t = normalized_time(0.23, t_norm).unwrap();
            assert_abs_diff_eq!(1.0 - (-0.23 * t).exp(), t_norm, epsilon = 1e-12);
        }
    }

    #[test]
    fn series_endpoint_matches_direct_evaluation() {
        let params = fig2();
        let grid = [0.0, 0.25, 0.5];
        let series = time_series(&params, Measure::En, &grid, &MeasureConfig::default()).unwrap();
        let direct = log_negativity(&params.assemble(0.0).unwrap()).unwrap();
        assert_eq!(series.points[0].1, direct);
        assert_eq!(series.points.len(), 3);
        assert_eq!(series.abscissa_name, "T");
    }

    #[test]
    fn fig2_series_is_nonincreasing() {
        let grid: Vec<f64> = (0..64).map(|i| 0.98 * i as f64 / 63.0).collect();
        let series = time_series(&fig2(), Measure::En, &grid, &MeasureConfig::default()).unwrap();
        for w in series.points.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12, "series increased: {w:?}");
        }
    }

    #[test]
    fn tdtmsv_series_dies_at_late_normalized_time() {
        let mut params = fig2();
        params.scenario = Scenario::Tdtmsv;
        let series =
            time_series(&params, Measure::En, &[0.0, 0.5, 0.999], &MeasureConfig::default())
                .unwrap();
        assert_eq!(series.points.last().unwrap().1, 0.0);
    }

    #[test]
    fn rejects_bad_grids() {
        let params = fig2();
        let cfg = MeasureConfig::default();
        assert!(time_series(&params, Measure::En, &[], &cfg).is_err());
        assert!(time_series(&params, Measure::En, &[0.0, 0.0], &cfg).is_err());
        assert!(time_series(&params, Measure::En, &[0.5, 0.2], &cfg).is_err());
        assert!(time_series(&params, Measure::En, &[0.5, 1.0], &cfg).is_err());
    }

    #[test]
    fn r_sweep_at_zero_squeezing_gives_zero() {
        let series = param_sweep(
            &fig2(),
            SweepAxis::R,
            &[0.0, 0.4],
            Measure::En,
            0.3,
            &MeasureConfig::default(),
        )
        .unwrap();
        assert_eq!(series.points[0].1, 0.0);
        assert!(series.points[1].1 > 0.0);
    }

    #[test]
    fn carrier_mismatch_sweep_is_symmetric_and_peaked_at_zero() {
        let values: Vec<f64> = (-5..=5).map(|k| k as f64).collect();
        let series = param_sweep(
            &fig2(),
            SweepAxis::DeltaOmega,
            &values,
            Measure::En,
            0.5,
            &MeasureConfig::default(),
        )
        .unwrap();
        let vals: Vec<f64> = series.points.iter().map(|p| p.1).collect();
        for k in 0..=4 {
            assert_abs_diff_eq!(vals[k], vals[10 - k], epsilon = 1e-9);
        }
        // Nonincreasing away from the matched point.
        for w in vals[5..].windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn occupancy_sweep_is_nonincreasing() {
        let series = param_sweep(
            &fig2(),
            SweepAxis::N,
            &[0.0, 0.3, 0.6, 1.0, 1.5],
            Measure::En,
            0.5,
            &MeasureConfig::default(),
        )
        .unwrap();
        for w in series.points.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12);
        }
    }

    #[test]
    fn stronger_coupling_decays_slower_on_the_normalized_clock() {
        let series = param_sweep(
            &fig2(),
            SweepAxis::Kappa,
            &[0.05, 0.1, 0.2, 0.4],
            Measure::En,
            0.5,
            &MeasureConfig::default(),
        )
        .unwrap();
        for w in series.points.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-12, "expected nondecreasing in kappa: {w:?}");
        }
    }

    #[test]
    fn monotone_profile_reports_unbracketed_upper_cutoff() {
        // Zero occupancy with identical filters: E_N = 2r, no bell shape.
        let mut params = fig2();
        params.n_i = 0.0;
        params.n_s = 0.0;
        let report = find_extremum_and_cutoffs(
            &params,
            Measure::En,
            0.0,
            0.0,
            2.0,
            &MeasureConfig::default(),
        )
        .unwrap();
        assert!(report.exceeds_threshold);
        assert_eq!(report.upper_bracket, BracketStatus::NotBracketed);
        assert!(report.r_max > 2.0 - 1e-3);
    }

    #[test]
    fn mismatched_filters_bracket_both_cutoffs() {
        let mut params = fig2();
        params.filter_s = FilterSpec::step(1.02, 0.208).unwrap();
        let report = find_extremum_and_cutoffs(
            &params,
            Measure::En,
            0.5,
            0.0,
            3.0,
            &MeasureConfig::default(),
        )
        .unwrap();
        assert!(report.exceeds_threshold);
        assert_eq!(report.lower_bracket, BracketStatus::Bracketed);
        assert_eq!(report.upper_bracket, BracketStatus::Bracketed);
        assert!(report.r_lcf < report.r_max && report.r_max < report.r_ucf);

        // Root-finder contract: the measure sits at the threshold.
        let f = |r: f64| {
            let p = SweepAxis::R.apply(&params, r);
            let t = normalized_time(0.07, 0.5).unwrap();
            log_negativity(&p.assemble(t).unwrap()).unwrap()
        };
        assert!((f(report.r_lcf) - report.threshold).abs() < 1e-6);
        assert!((f(report.r_ucf) - report.threshold).abs() < 1e-6);
    }

    #[test]
    fn no_violation_reported_when_measure_stays_at_threshold() {
        // r = 0 everywhere on a degenerate interval: E_N identically 0.
        let report = find_extremum_and_cutoffs(
            &fig2(),
            Measure::En,
            0.5,
            0.0,
            1e-12,
            &MeasureConfig::default(),
        );
        // Interval is invalid (lo == hi at fp resolution) -> domain error,
        // so use a tiny but valid interval instead.
        assert!(report.is_err() || !report.unwrap().exceeds_threshold);
        let mut params = fig2();
        params.n_i = 5.0;
        params.n_s = 5.0;
        let report = find_extremum_and_cutoffs(
            &params,
            Measure::En,
            0.9,
            0.0,
            0.5,
            &MeasureConfig::default(),
        )
        .unwrap();
        assert!(!report.exceeds_threshold);
        assert_eq!(report.r_lcf, report.r_max);
    }
}
