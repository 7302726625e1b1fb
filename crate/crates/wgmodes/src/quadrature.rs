//! Fixed quadrature rules used by assembly and interpolation.

/// 7-point symmetric triangle rule, exact for polynomials of degree 5.
///
/// Points are barycentric, weights sum to 1 (multiply by the triangle area).
/// One rule is used for every element, including constant-material ones, so
/// P1-interpolated graded materials need no case split.
pub fn tri7() -> [([f64; 3], f64); 7] {
    let s15 = 15f64.sqrt();
    let t1 = (6.0 - s15) / 21.0;
    let t2 = (6.0 + s15) / 21.0;
    let w1 = (155.0 - s15) / 1200.0;
    let w2 = (155.0 + s15) / 1200.0;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 9.0 / 40.0),
        ([1.0 - 2.0 * t1, t1, t1], w1),
        ([t1, 1.0 - 2.0 * t1, t1], w1),
        ([t1, t1, 1.0 - 2.0 * t1], w1),
        ([1.0 - 2.0 * t2, t2, t2], w2),
        ([t2, 1.0 - 2.0 * t2, t2], w2),
        ([t2, t2, 1.0 - 2.0 * t2], w2),
    ]
}

/// 3-point Gauss-Legendre rule on [0, 1], exact to degree 5.
pub fn gauss3_unit() -> [(f64, f64); 3] {
    let s = (3.0f64 / 5.0).sqrt();
    [
        (0.5 * (1.0 - s), 5.0 / 18.0),
        (0.5, 8.0 / 18.0),
        (0.5 * (1.0 + s), 5.0 / 18.0),
    ]
}
