//! Adaptive Gauss–Kronrod (7, 15) quadrature on finite intervals.
//!
//! The interval is first split at caller-supplied breakpoints, then the
//! panel with the largest error estimate is bisected until the summed
//! estimate meets the tolerance. Final values are summed in left-to-right
//! panel order with Neumaier compensation so results do not depend on the
//! refinement order or on thread scheduling.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
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

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Panels evaluated in parallel once a batch is at least this large.
const PARALLEL_BATCH: usize = 32;

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
    /// Compensated sum, component by component.
    fn sum_compensated(values: impl Iterator<Item = Self>) -> Self;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }

    fn magnitude(self) -> f64 {
        self.abs()
    }

    fn sum_compensated(values: impl Iterator<Item = Self>) -> Self {
        let mut acc = NeumaierSum::default();
        values.for_each(|v| acc.add(v));
        acc.value()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::ZERO
    }

    fn magnitude(self) -> f64 {
        self.norm()
    }

    fn sum_compensated(values: impl Iterator<Item = Self>) -> Self {
        let mut re = NeumaierSum::default();
        let mut im = NeumaierSum::default();
        for v in values {
            re.add(v.re);
            im.add(v.im);
        }
        Complex64::new(re.value(), im.value())
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper bound on the number of panels after refinement.
    pub max_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-11,
            rel_tol: 1e-12,
            max_panels: 1 << 20,
        }
    }
}

impl QuadratureOptions {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult<T> {
    pub value: T,
    /// Sum of the per-panel |K15 − G7| estimates.
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_key(other) == Ordering::Equal
    }
}

impl<T> Eq for Panel<T> {}

impl<T> Panel<T> {
    // Largest error first; ties broken by position so the order is total.
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_key(other)
    }
}

/// One Gauss–Kronrod (7, 15) evaluation on `[a, b]`: `(K15, |K15 − G7|)`.
pub fn gauss_kronrod_15<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for k in 0..7 {
        let dx = half * XGK[k];
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * WGK[k];
        if k % 2 == 1 {
            gauss = gauss + pair * WG[k / 2];
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    (kronrod, (kronrod - gauss).magnitude())
}

fn evaluate_panels<T: QuadValue, F: Fn(f64) -> T + Sync>(f: &F, edges: &[(f64, f64)]) -> Vec<Panel<T>> {
    let eval = |&(a, b): &(f64, f64)| {
        let (value, error) = gauss_kronrod_15(f, a, b);
        Panel { a, b, value, error }
    };
    if edges.len() >= PARALLEL_BATCH {
        edges.par_iter().map(eval).collect()
    } else {
        edges.iter().map(eval).collect()
    }
}

/// Integrate `f` over `[breakpoints[0], breakpoints[last]]`.
///
/// `breakpoints` must be strictly increasing and contain at least two
/// points; each consecutive pair becomes an initial panel.
pub fn integrate<T, F>(f: F, breakpoints: &[f64], opts: &QuadratureOptions) -> Result<QuadratureResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T + Sync,
{
    if breakpoints.len() < 2 {
        return Err(Error::param("breakpoints", "need at least two points"));
    }
    if breakpoints.iter().any(|x| !x.is_finite()) || breakpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("breakpoints", "must be finite and strictly increasing"));
    }
    let edges: Vec<(f64, f64)> = breakpoints.windows(2).map(|w| (w[0], w[1])).collect();
    let mut heap: BinaryHeap<Panel<T>> = evaluate_panels(&f, &edges).into_iter().collect();

    let totals = |heap: &BinaryHeap<Panel<T>>| {
        let value = T::sum_compensated(heap.iter().map(|p| p.value));
        let error: f64 = heap.iter().map(|p| p.error).sum();
        (value, error)
    };
    let (mut value, mut error) = totals(&heap);

    loop {
        let target = opts.abs_tol.max(opts.rel_tol * value.magnitude());
        if error <= target {
            break;
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::QuadratureNonConvergence {
                achieved: error,
                requested: target,
            });
        }
        // Split the worst panels in one batch, sized so the batch can be
        // evaluated in parallel without overshooting the panel budget.
        let batch = (heap.len() / 8).clamp(1, opts.max_panels - heap.len());
        let mut halves = Vec::with_capacity(2 * batch);
        let mut progressed = false;
        for _ in 0..batch {
            let Some(worst) = heap.pop() else { break };
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) {
                // Panel at floating-point resolution; keep it as is.
                heap.push(Panel { error: 0.0, ..worst });
                continue;
            }
            progressed = true;
            halves.push((worst.a, mid));
            halves.push((mid, worst.b));
            // Only the worst panel is guaranteed to matter; stop once the
            // remaining candidates are far below it.
            if heap.peek().is_some_and(|p| p.error < 0.01 * worst.error) {
                break;
            }
        }
        heap.extend(evaluate_panels(&f, &halves));
        if !progressed {
            let (_, err) = totals(&heap);
            return Err(Error::QuadratureNonConvergence {
                achieved: err.max(error),
                requested: target,
            });
        }
        (value, error) = totals(&heap);
    }

    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    Ok(QuadratureResult {
        value: T::sum_compensated(panels.iter().map(|p| p.value)),
        error,
        panels: panels.len(),
    })
}

/// `n + 1` equally spaced breakpoints on `[a, b]`.
pub fn uniform_breakpoints(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    let mut pts: Vec<f64> = (0..n).map(|k| a + (b - a) * k as f64 / n as f64).collect();
    pts.push(b);
    pts
}
