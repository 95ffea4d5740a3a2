//! Special functions needed by the thermal correlation function.

use crate::operator::C64;

/// Bernoulli numbers B_2 .. B_14.
const BERNOULLI: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

/// Trigamma `ψ'(z) = Σ_{k≥0} 1/(z+k)²` for `Re z > 0`.
///
/// Recurrence up to `|z| ≥ 20`, then the asymptotic series
/// `1/z + 1/(2z²) + Σ B_{2k}/z^{2k+1}`.
pub fn trigamma(z: C64) -> C64 {
    debug_assert!(z.re > 0.0, "trigamma evaluated at Re z <= 0: {z}");
    let mut z = z;
    let mut acc = C64::new(0.0, 0.0);
    while z.norm() < 20.0 {
        acc += (z * z).inv();
        z += 1.0;
    }
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = inv + 0.5 * inv2;
    let mut power = inv2 * inv;
    for b in BERNOULLI {
        series += power * b;
        power *= inv2;
    }
    acc + series
}
