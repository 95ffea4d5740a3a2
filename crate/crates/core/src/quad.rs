//! Adaptive Gauss–Kronrod quadrature for complex-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::operator::C64;

/// 15-point Kronrod abscissae on [-1, 1] (non-negative half, descending).
pub(crate) const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

pub(crate) const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// 7-point Gauss weights for the odd-indexed Kronrod abscissae.
pub(crate) const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// The 15 nodes of the Kronrod rule mapped onto `[a, b]`, in the order
/// `center, then (-x_k, +x_k)` pairs for `k = 0..7`.
pub(crate) fn gk15_nodes(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut out = [c; 15];
    for k in 0..7 {
        out[1 + 2 * k] = c - r * XGK[k];
        out[2 + 2 * k] = c + r * XGK[k];
    }
    out
}

/// Combine function values at [`gk15_nodes`] into (Kronrod, Gauss) estimates.
pub(crate) fn gk15_combine(values: &[C64; 15], half_width: f64) -> (C64, C64) {
    let mut kronrod = values[0] * WGK[7];
    let mut gauss = values[0] * WG[3];
    for k in 0..7 {
        let pair = values[1 + 2 * k] + values[2 + 2 * k];
        kronrod += pair * WGK[k];
        if k % 2 == 1 {
            gauss += pair * WG[k / 2];
        }
    }
    (kronrod * half_width, gauss * half_width)
}

/// One Kronrod pass: integral estimate and error estimate `|K - G|`.
pub fn gk15<F: FnMut(f64) -> C64>(f: &mut F, a: f64, b: f64) -> (C64, f64) {
    let nodes = gk15_nodes(a, b);
    let mut values = [C64::new(0.0, 0.0); 15];
    for (v, &x) in values.iter_mut().zip(nodes.iter()) {
        *v = f(x);
    }
    let (k, g) = gk15_combine(&values, 0.5 * (b - a));
    (k, (k - g).norm())
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Estimate {
    pub value: C64,
    pub error: f64,
    pub intervals: usize,
    pub evaluations: usize,
}

/// Tolerances for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub relative: f64,
    pub absolute: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            relative: 1e-10,
            absolute: 0.0,
            max_intervals: 200_000,
        }
    }
}

impl Tolerance {
    pub fn relative(relative: f64) -> Self {
        Tolerance {
            relative,
            ..Default::default()
        }
    }

    pub fn with_absolute(mut self, absolute: f64) -> Self {
        self.absolute = absolute;
        self
    }
}

struct Piece {
    a: f64,
    b: f64,
    value: C64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive integration over `[points[0], points[last]]`, starting
/// from the given breakpoints and bisecting the worst piece until the summed
/// error estimate is below `max(relative * |I|, absolute)`.
pub fn integrate<F: FnMut(f64) -> C64>(mut f: F, points: &[f64], tol: Tolerance) -> Result<Estimate> {
    if points.len() < 2 {
        return Err(Error::Numerical("integration needs at least two breakpoints".into()));
    }
    let mut heap = BinaryHeap::with_capacity(points.len() * 2);
    let mut total = C64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut evaluations = 0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b == a {
            continue;
        }
        let (value, err) = gk15(&mut f, a, b);
        evaluations += 15;
        total += value;
        error += err;
        heap.push(Piece { a, b, value, error: err });
    }
    loop {
        let target = (tol.relative * total.norm()).max(tol.absolute);
        if error <= target || heap.is_empty() {
            break;
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::Numerical(format!(
                "adaptive quadrature did not converge on [{}, {}]: error {:.3e} > target {:.3e} after {} intervals",
                points[0],
                points[points.len() - 1],
                error,
                target,
                heap.len()
            )));
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at floating-point resolution; accept it as is
            heap.push(Piece { error: 0.0, ..worst });
            error -= worst.error;
            continue;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // resum to shed accumulated update rounding
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Ok(Estimate {
        value,
        error,
        intervals: heap.len(),
        evaluations,
    })
}

/// `n + 1` evenly spaced points covering `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_integrates_high_degree_polynomials_exactly() {
        // K15 is exact through degree 22, G7 through degree 13
        let (k, _) = gk15(&mut |x: f64| C64::new(x.powi(22), 0.0), -1.0, 1.0);
        assert!((k.re - 2.0 / 23.0).abs() < 1e-15);
        let (k, err) = gk15(&mut |x: f64| C64::new(x.powi(12), x.powi(2)), 0.0, 2.0);
        assert!((k.re - 2f64.powi(13) / 13.0).abs() < 1e-11);
        assert!((k.im - 8.0 / 3.0).abs() < 1e-14);
        assert!(err < 1e-10);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // ∫_0^1 1/(1e-4 + x^2) dx = atan(100)/1e-2
        let est = integrate(
            |x| C64::new(1.0 / (1e-4 + x * x), 0.0),
            &[0.0, 1.0],
            Tolerance::relative(1e-12),
        )
        .unwrap();
        let exact = 100f64.atan() / 1e-2;
        assert!((est.value.re - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn oscillatory_with_breakpoints() {
        // ∫_0^{20π} cos(x) e^{-x/10} dx
        let pts = linspace(0.0, 20.0 * std::f64::consts::PI, 20);
        let est = integrate(
            |x| C64::new(x.cos() * (-x / 10.0).exp(), 0.0),
            &pts,
            Tolerance::relative(1e-12),
        )
        .unwrap();
        let s = 0.1;
        let end = 20.0 * std::f64::consts::PI;
        let exact = (s - (-s * end).exp() * s) / (1.0 + s * s);
        assert!((est.value.re - exact).abs() < 1e-12);
    }

    #[test]
    fn non_convergence_is_reported() {
        let tol = Tolerance {
            relative: 1e-15,
            absolute: 0.0,
            max_intervals: 4,
        };
        let r = integrate(|x| C64::new((1.0 / x).sin(), 0.0), &[1e-6, 1.0], tol);
        assert!(matches!(r, Err(Error::Numerical(_))));
    }
}
