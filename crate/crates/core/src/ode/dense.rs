/// Quintic Hermite interpolation on `[t0, t1]` through value, first and second
/// derivative at both ends.
///
/// Returns `(p(t), p'(t), p''(t))`. The first derivative of the interpolant is
/// used as the velocity, so `a` and `ȧ` read from a trajectory are exactly
/// consistent with each other.
#[allow(clippy::too_many_arguments)]
pub fn hermite_quintic(
    t0: f64,
    t1: f64,
    (p0, v0, c0): (f64, f64, f64),
    (p1, v1, c1): (f64, f64, f64),
    t: f64,
) -> (f64, f64, f64) {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;

    let w = [p0, h * v0, h * h * c0, p1, h * v1, h * h * c1];
    let basis = [
        1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
        s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
        0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5,
        10.0 * s3 - 15.0 * s4 + 6.0 * s5,
        -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
        0.5 * s3 - s4 + 0.5 * s5,
    ];
    let d1 = [
        -30.0 * s2 + 60.0 * s3 - 30.0 * s4,
        1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4,
        s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4,
        30.0 * s2 - 60.0 * s3 + 30.0 * s4,
        -12.0 * s2 + 28.0 * s3 - 15.0 * s4,
        1.5 * s2 - 4.0 * s3 + 2.5 * s4,
    ];
    let d2 = [
        -60.0 * s + 180.0 * s2 - 120.0 * s3,
        -36.0 * s + 96.0 * s2 - 60.0 * s3,
        1.0 - 9.0 * s + 18.0 * s2 - 10.0 * s3,
        60.0 * s - 180.0 * s2 + 120.0 * s3,
        -24.0 * s + 84.0 * s2 - 60.0 * s3,
        3.0 * s - 12.0 * s2 + 10.0 * s3,
    ];

    let dot = |b: &[f64; 6]| b.iter().zip(&w).map(|(b, w)| b * w).sum::<f64>();
    (dot(&basis), dot(&d1) / h, dot(&d2) / (h * h))
}
