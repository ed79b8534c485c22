//! Polynomial least-squares fitting and five-point interpolation.

use crate::linalg::{lstsq_qr, Matrix};
use crate::scalar::Scalar;

/// Horner evaluation of `c[0] + c[1] u + c[2] u² + …`.
pub fn polyval<T: Scalar>(coeffs: &[T], u: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * u + c)
}

/// Least-squares monomial coefficients of the given degree. Abscissae
/// should already be scaled to roughly [-1, 1].
pub fn polyfit<T: Scalar>(u: &[T], y: &[T], degree: usize) -> Option<Vec<T>> {
    assert_eq!(u.len(), y.len());
    let a = Matrix::from_fn(u.len(), degree + 1, |r, c| u[r].powi(c as i32));
    lstsq_qr(&a, y)
}

/// Value at `t` of the quartic through `(k, values[k])` for `k = -2..=2`,
/// using Newton divided differences on the integer nodes.
pub fn interpolate_quartic<T: Scalar>(values: &[T; 5], t: T) -> T {
    let nodes = [-2.0, -1.0, 0.0, 1.0, 2.0].map(T::lit);
    let mut coef = *values;
    for order in 1..5 {
        for i in (order..5).rev() {
            coef[i] = (coef[i] - coef[i - 1]) / (nodes[i] - nodes[i - order]);
        }
    }
    let mut acc = coef[4];
    for i in (0..4).rev() {
        acc = acc * (t - nodes[i]) + coef[i];
    }
    acc
}
