//! Horner evaluation over the nested dense layout.
//!
//! The same routine evaluates affine polynomials (`x0 = 1`) and homogeneous
//! ones (`x0` is the homogenizing coordinate): at the innermost level each
//! coefficient is multiplied by `x0^e`, `e` being the leftover degree.

use super::basis::{MonomialBasis, MAX_VARS};

/// Partial derivatives indexed as `(x0, x1, ..., xn)`.
pub(crate) type Partials = [f64; MAX_VARS + 1];

pub(crate) fn value(basis: &MonomialBasis, nested: &[f64], x0: f64, x: &[f64]) -> f64 {
    value_rec(basis, nested, 0, basis.d(), x0, x)
}

fn value_rec(basis: &MonomialBasis, c: &[f64], var: usize, e: u32, x0: f64, x: &[f64]) -> f64 {
    let n = basis.n();
    if var == n {
        return c[0] * x0.powi(e as i32);
    }
    let rest = n - var - 1;
    let xv = x[var];
    let mut end = c.len();
    let mut acc = 0.0;
    for j in (0..=e).rev() {
        let start = end - basis.block_size(rest, e - j);
        acc = acc * xv + value_rec(basis, &c[start..end], var + 1, e - j, x0, x);
        end = start;
    }
    acc
}

/// Value together with all partials, forward mode through the Horner scheme.
pub(crate) fn jet(basis: &MonomialBasis, nested: &[f64], x0: f64, x: &[f64]) -> (f64, Partials) {
    jet_rec(basis, nested, 0, basis.d(), x0, x)
}

fn jet_rec(basis: &MonomialBasis, c: &[f64], var: usize, e: u32, x0: f64, x: &[f64]) -> (f64, Partials) {
    let n = basis.n();
    let mut grad = [0.0; MAX_VARS + 1];
    if var == n {
        if e == 0 {
            return (c[0], grad);
        }
        let p = x0.powi(e as i32 - 1);
        grad[0] = c[0] * e as f64 * p;
        return (c[0] * p * x0, grad);
    }
    let rest = n - var - 1;
    let xv = x[var];
    let slot = var + 1;
    let mut end = c.len();
    let mut acc = 0.0;
    for j in (0..=e).rev() {
        let start = end - basis.block_size(rest, e - j);
        let (bv, bg) = jet_rec(basis, &c[start..end], var + 1, e - j, x0, x);
        // Deeper blocks never depend on x_var, so bg[slot] == 0.
        for k in (0..=n).filter(|&k| k == 0 || k > slot) {
            grad[k] = grad[k] * xv + bg[k];
        }
        grad[slot] = grad[slot] * xv + acc;
        acc = acc * xv + bv;
        end = start;
    }
    (acc, grad)
}
