//! Hurwitz zeta function at s = 3.

/// Terms summed explicitly before switching to the Euler-Maclaurin tail.
const DIRECT_TERMS: usize = 20;

/// Hurwitz zeta `zeta(3, x) = sum_{k>=0} (k + x)^-3` for `x > 0`.
///
/// Direct summation of the first terms followed by an Euler-Maclaurin tail
/// with Bernoulli corrections up to B6. Relative accuracy is below 1e-13
/// for all `x > 0`.
pub fn hurwitz_zeta3(x: f64) -> f64 {
    assert!(x > 0.0, "hurwitz_zeta3 requires x > 0, got {x}");
    let mut direct = 0.0;
    for k in (0..DIRECT_TERMS).rev() {
        direct += (k as f64 + x).powi(-3);
    }
    let y = DIRECT_TERMS as f64 + x;
    let y2 = y * y;
    let tail = 0.5 / y2 + 0.5 / (y2 * y) + 0.25 / (y2 * y2) - 1.0 / (12.0 * y2 * y2 * y2)
        + 1.0 / (12.0 * y2 * y2 * y2 * y2);
    direct + tail
}
