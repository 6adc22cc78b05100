//! Adaptive Gauss-Kronrod quadrature used by the verification oracle and the
//! filter orthonormality check. The closed-form kernel and covariance modules
//! never call into this code.

use std::collections::BinaryHeap;

use crate::error::CoreError;

// 15-point Kronrod nodes (positive half, descending) with the embedded
// 7-point Gauss rule. Standard QK15 constants.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One evaluated segment: integral estimate and error estimate.
#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// QK15 on a single interval. Returns (value, error_estimate).
fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut result_gauss = 0.0;
    let mut result_kronrod = f_center * WGK[7];
    let mut result_abs = result_kronrod.abs();

    let mut fv1 = [0.0_f64; 7];
    let mut fv2 = [0.0_f64; 7];

    for j in 0..3 {
        let jtw = 2 * j + 1;
        let abscissa = half * XGK[jtw];
        let f1 = f(center - abscissa);
        let f2 = f(center + abscissa);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        result_gauss += WG[j] * (f1 + f2);
        result_kronrod += WGK[jtw] * (f1 + f2);
        result_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    result_gauss += WG[3] * f_center;

    for j in 0..4 {
        let jtw = 2 * j;
        let abscissa = half * XGK[jtw];
        let f1 = f(center - abscissa);
        let f2 = f(center + abscissa);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        result_kronrod += WGK[jtw] * (f1 + f2);
        result_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * result_kronrod;
    let mut result_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        result_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = result_kronrod * half;
    result_abs *= half.abs();
    result_asc *= half.abs();

    let mut err = ((result_kronrod - result_gauss) * half).abs();
    if result_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / result_asc).powf(1.5);
        err = if scale < 1.0 { result_asc * scale } else { result_asc };
    }
    if result_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * result_abs);
    }
    (value, err)
}

/// Quadrature outcome: integral value plus an error estimate derived from the
/// Gauss/Kronrod difference, never assumed.
#[derive(Debug, Clone, Copy)]
pub(crate) struct QuadOutcome {
    pub value: f64,
    pub error: f64,
}

/// Adaptive integration of `f` over `[a, b]`.
///
/// `breakpoints` seeds the initial partition; points outside `(a, b)` are
/// ignored. Callers supply window edges, the thermal switch-on time and
/// half-period marks for oscillatory integrands here, so the adaptive stage
/// never has to discover a discontinuity or cancellation on its own.
pub(crate) fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<QuadOutcome, CoreError> {
    if a == b {
        return Ok(QuadOutcome { value: 0.0, error: 0.0 });
    }

    let mut edges: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| *x > a && *x < b && x.is_finite())
        .collect();
    edges.push(a);
    edges.push(b);
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let mut heap: BinaryHeap<Segment> = BinaryHeap::new();
    let mut total_value = 0.0;
    let mut total_error = 0.0;
    for w in edges.windows(2) {
        let (value, error) = qk15(&f, w[0], w[1]);
        total_value += value;
        total_error += error;
        heap.push(Segment { a: w[0], b: w[1], value, error });
    }

    let tolerance = |value: f64| abs_tol.max(rel_tol * value.abs());
    let mut subdivisions = 0;
    while total_error > tolerance(total_value) {
        if subdivisions >= max_subdivisions {
            return Err(CoreError::NonConvergentQuadrature {
                achieved: total_error,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("non-empty segment heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval at floating-point resolution; accept what we have.
            heap.push(worst);
            break;
        }
        let (lv, le) = qk15(&f, worst.a, mid);
        let (rv, re) = qk15(&f, mid, worst.b);
        total_value += lv + rv - worst.value;
        total_error += le + re - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: lv, error: le });
        heap.push(Segment { a: mid, b: worst.b, value: rv, error: re });
        subdivisions += 1;
    }

    Ok(QuadOutcome { value: total_value, error: total_error })
}

/// Half-period marks `k * pi / |delta|` inside `(0, upper)`, used to
/// pre-subdivide oscillatory kernels before adaptive refinement.
pub(crate) fn half_period_marks(delta: f64, upper: f64) -> Vec<f64> {
    let mut marks = Vec::new();
    if delta.abs() < 1e-12 || !upper.is_finite() {
        return marks;
    }
    let step = std::f64::consts::PI / delta.abs();
    let count = (upper / step).floor() as usize;
    for k in 1..=count.min(8192) {
        marks.push(k as f64 * step);
    }
    marks
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_sine_over_half_period() {
        let out = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, &[], 1e-12, 1e-14, 100).unwrap();
        assert_relative_eq!(out.value, 2.0, max_relative = 1e-12);
        assert!(out.error < 1e-10);
    }

    #[test]
    fn oscillatory_integrand_with_half_period_marks() {
        // int_0^10 cos(40 x) dx = sin(400)/40
        let marks = half_period_marks(40.0, 10.0);
        let out = integrate(|x| (40.0 * x).cos(), 0.0, 10.0, &marks, 1e-11, 1e-13, 2000).unwrap();
        assert_relative_eq!(out.value, (400.0_f64).sin() / 40.0, epsilon = 1e-11);
    }

    #[test]
    fn respects_breakpoints_at_discontinuities() {
        let f = |x: f64| if x < 1.0 { 1.0 } else { 3.0 };
        let out = integrate(f, 0.0, 2.0, &[1.0], 1e-12, 1e-14, 200).unwrap();
        assert_relative_eq!(out.value, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn reports_non_convergence_with_achieved_error() {
        // |x|^(-1/2) near 0 with a tiny budget cannot reach 1e-14.
        let err = integrate(|x: f64| x.abs().sqrt().recip().min(1e8), 0.0, 1.0, &[], 1e-14, 1e-16, 3)
            .unwrap_err();
        match err {
            CoreError::NonConvergentQuadrature { achieved, subdivisions } => {
                assert!(achieved > 0.0);
                assert_eq!(subdivisions, 3);
            }
            other => panic!("expected NonConvergentQuadrature, got {other:?}"),
        }
    }
}
