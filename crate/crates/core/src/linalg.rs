// Copyright 2026 The nla Authors
// SPDX-License-Identifier: Apache-2.0

//! Small dense complex-matrix helpers over [`Real`] scalars.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use num_complex::Complex64;
use num_traits::Zero;

use crate::scalar::{Real, C};

pub(crate) fn trace<T: Real>(m: &Array2<C<T>>) -> C<T> {
    m.diag().iter().fold(C::zero(), |acc, &z| acc + z)
}

/// Tr(A B) without forming the product.
pub(crate) fn trace_product<T: Real>(a: &Array2<C<T>>, b: &Array2<C<T>>) -> C<T> {
    let n = a.nrows();
    let mut acc = C::zero();
    for i in 0..n {
        for j in 0..n {
            acc = acc + a[[i, j]] * b[[j, i]];
        }
    }
    acc
}

/// (M + M†)/2
pub(crate) fn hermitize<T: Real>(m: &mut Array2<C<T>>) {
    let n = m.nrows();
    let half = T::of(0.5);
    for i in 0..n {
        m[[i, i]] = C::new(m[[i, i]].re, T::zero());
        for j in (i + 1)..n {
            let avg = (m[[i, j]] + m[[j, i]].conj()).scale(half);
            m[[i, j]] = avg;
            m[[j, i]] = avg.conj();
        }
    }
}

/// Largest |M_ij − conj(M_ji)|.
pub(crate) fn hermiticity_defect<T: Real>(m: &Array2<C<T>>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Ascending eigenvalues of a Hermitian matrix, evaluated in double precision.
pub(crate) fn hermitian_eigenvalues<T: Real>(m: &Array2<C<T>>) -> Vec<f64> {
    let n = m.nrows();
    let dm = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
        let z = m[[i, j]];
        Complex64::new(z.re.as_f64(), z.im.as_f64())
    });
    let mut values: Vec<f64> = SymmetricEigen::new(dm).eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.total_cmp(b));
    values
}

/// ln(n!) for n = 0..=n_max.
pub(crate) fn ln_factorials(n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0f64;
    out.push(0.0);
    for k in 1..=n_max {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}
