// Copyright 2026 The nla Authors
// SPDX-License-Identifier: Apache-2.0

//! Wigner functions in the shot-noise scaling of [`crate::fock`]: the vacuum
//! is W(x, p) = e^{−(x²+p²)/2} / 2π and |α⟩ is centred at (2 Re α, 2 Im α).
//!
//! Evaluation uses the Fock-basis Laguerre series in β = (x + ip)/2, built by
//! three-term recurrences over the matrix elements |m⟩⟨n| so no factorials
//! appear.

use std::io::Write;

use ndarray::Array2;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{expectation, same_cutoff, DensityMatrix, FockState, Observable};
use crate::scalar::{phase, Real, C};

/// Half-width of the default grid.
pub const DEFAULT_HALF_WIDTH: f64 = 8.0;
/// Points per axis of the default grid.
pub const DEFAULT_POINTS: usize = 201;

/// Sampled Wigner function; `values[[i, j]]` is W(x_axis[i], p_axis[j]).
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid<T> {
    pub x_axis: Vec<T>,
    pub p_axis: Vec<T>,
    pub values: Array2<T>,
}

#[derive(Serialize)]
struct GridJson<'a, T> {
    x_axis: &'a [T],
    p_axis: &'a [T],
    /// Row-major over x.
    values: Vec<T>,
}

/// `points` evenly spaced values on [−half_width, half_width].
pub fn uniform_axis<T: Real>(half_width: T, points: usize) -> Vec<T> {
    assert!(points >= 2, "an axis needs at least two points");
    let step = T::of(2.0) * half_width / T::of_usize(points - 1);
    (0..points)
        .map(|i| -half_width + step * T::of_usize(i))
        .collect()
}

fn axis_spacing<T: Real>(axis: &[T], name: &str) -> Result<T> {
    if axis.len() < 2 {
        return Err(Error::Format(format!("{name} axis needs at least two points")));
    }
    let h = (axis[axis.len() - 1] - axis[0]) / T::of_usize(axis.len() - 1);
    let uniform = axis
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= T::of(1e-6) * h.abs());
    if !(h > T::zero()) || !uniform {
        return Err(Error::Format(format!("{name} axis is not uniform and increasing")));
    }
    Ok(h)
}

/// 2√⟨n̂⟩ + 6: the largest possible centre |⟨x_θ⟩| plus six vacuum widths.
pub fn required_half_width<T: Real, S: FockState<T> + ?Sized>(state: &S) -> Result<T> {
    let n = expectation(state, Observable::Number)?.re.max(T::zero());
    Ok(T::of(2.0) * n.sqrt() + T::of(6.0))
}

fn check_coverage<T: Real>(axis: &[T], required: T) -> Result<()> {
    let (lo, hi) = (axis[0], axis[axis.len() - 1]);
    if lo > -required || hi < required {
        return Err(Error::GridTooNarrow {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            required: required.as_f64(),
        });
    }
    Ok(())
}

/// W(x, p) at a single point.
pub fn wigner_at<T: Real>(rho: &DensityMatrix<T>, x: T, p: T) -> T {
    let r = rho.elements();
    let d = rho.cutoff().dim();
    let two = T::of(2.0);
    let beta = C::new(x, p).scale(T::of(0.5));
    let two_beta = beta.scale(two);
    let two_beta_conj = two_beta.conj();
    let sqrt: Vec<T> = (0..d).map(|n| T::of_usize(n).sqrt()).collect();

    // w[n] holds the contribution kernel of |m⟩⟨n| for the current row m.
    let mut w = vec![C::<T>::zero(); d];
    w[0] = C::new((-two * beta.norm_sqr()).exp() / T::PI(), T::zero());
    let mut acc = r[[0, 0]].re * w[0].re;
    for n in 1..d {
        w[n] = (two_beta * w[n - 1]).unscale(sqrt[n]);
        acc += two * (r[[0, n]] * w[n]).re;
    }
    for m in 1..d {
        let mut prev = w[m];
        w[m] = (two_beta_conj * prev - w[m - 1].scale(sqrt[m])).unscale(sqrt[m]);
        acc += (r[[m, m]] * w[m]).re;
        for n in (m + 1)..d {
            let next = (two_beta * w[n - 1] - prev.scale(sqrt[m])).unscale(sqrt[n]);
            prev = w[n];
            w[n] = next;
            acc += two * (r[[m, n]] * w[n]).re;
        }
    }
    acc * T::of(0.5)
}

/// W on the product grid `x_axis × p_axis`; both axes must be uniform and
/// reach ±[`required_half_width`].
pub fn wigner_function<T: Real>(
    rho: &DensityMatrix<T>,
    x_axis: &[T],
    p_axis: &[T],
) -> Result<WignerGrid<T>> {
    axis_spacing(x_axis, "x")?;
    axis_spacing(p_axis, "p")?;
    let required = required_half_width(rho)?;
    check_coverage(x_axis, required)?;
    check_coverage(p_axis, required)?;
    let rows: Vec<Vec<T>> = x_axis
        .par_iter()
        .map(|&x| p_axis.iter().map(|&p| wigner_at(rho, x, p)).collect())
        .collect();
    let values = Array2::from_shape_fn((x_axis.len(), p_axis.len()), |(i, j)| rows[i][j]);
    Ok(WignerGrid {
        x_axis: x_axis.to_vec(),
        p_axis: p_axis.to_vec(),
        values,
    })
}

/// [`wigner_function`] on the default 201 × 201 grid over ±8, widened to
/// ±[`required_half_width`] when the state needs it.
pub fn wigner_default<T: Real>(rho: &DensityMatrix<T>) -> Result<WignerGrid<T>> {
    let half = required_half_width(rho)?.max(T::of(DEFAULT_HALF_WIDTH));
    let axis = uniform_axis(half, DEFAULT_POINTS);
    wigner_function(rho, &axis, &axis)
}

fn trapezoid_weights<T: Real>(axis: &[T]) -> Vec<T> {
    let h = (axis[axis.len() - 1] - axis[0]) / T::of_usize(axis.len() - 1);
    let mut w = vec![h; axis.len()];
    w[0] = h * T::of(0.5);
    *w.last_mut().unwrap() = h * T::of(0.5);
    w
}

impl<T: Real> WignerGrid<T> {
    /// Trapezoid-rule integral of `f(W)` over the grid.
    fn integrate(&self, f: impl Fn(usize, usize, T) -> T) -> T {
        let wx = trapezoid_weights(&self.x_axis);
        let wp = trapezoid_weights(&self.p_axis);
        let mut total = T::zero();
        for ((i, j), &v) in self.values.indexed_iter() {
            total += wx[i] * wp[j] * f(i, j, v);
        }
        total
    }

    /// ∫∫ W dx dp.
    pub fn integral(&self) -> T {
        self.integrate(|_, _, v| v)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    /// Bilinear interpolation; `None` outside the grid.
    pub fn interpolate(&self, x: T, p: T) -> Option<T> {
        let locate = |axis: &[T], v: T| -> Option<(usize, T)> {
            let (lo, hi) = (axis[0], axis[axis.len() - 1]);
            if v < lo || v > hi {
                return None;
            }
            let h = (hi - lo) / T::of_usize(axis.len() - 1);
            let f = (v - lo) / h;
            let i = f.floor().to_usize()?.min(axis.len() - 2);
            Some((i, f - T::of_usize(i)))
        };
        let (i, tx) = locate(&self.x_axis, x)?;
        let (j, tp) = locate(&self.p_axis, p)?;
        let v = &self.values;
        let one = T::one();
        Some(
            (one - tx) * (one - tp) * v[[i, j]]
                + tx * (one - tp) * v[[i + 1, j]]
                + (one - tx) * tp * v[[i, j + 1]]
                + tx * tp * v[[i + 1, j + 1]],
        )
    }

    /// `x,p,value` rows, x varying slowest.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "p", "value"])?;
        for ((i, j), v) in self.values.indexed_iter() {
            w.serialize((self.x_axis[i], self.p_axis[j], v))?;
        }
        w.flush()?;
        Ok(())
    }

    /// `{"x_axis": [..], "p_axis": [..], "values": [..]}`, values row-major
    /// over x.
    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        let doc = GridJson {
            x_axis: &self.x_axis,
            p_axis: &self.p_axis,
            values: self.values.iter().copied().collect(),
        };
        serde_json::to_writer(writer, &doc)?;
        Ok(())
    }
}

/// ∫∫ W_a W_b dx dp on a shared grid; equals Tr(ρ_a ρ_b)/4π in the limit.
pub fn overlap<T: Real>(a: &WignerGrid<T>, b: &WignerGrid<T>) -> Result<T> {
    if a.x_axis != b.x_axis || a.p_axis != b.p_axis {
        return Err(Error::Format("Wigner grids have different axes".into()));
    }
    Ok(a.integrate(|i, j, v| v * b.values[[i, j]]))
}

/// Distribution of x_θ = x cos θ + p sin θ, integrating W along the conjugate
/// direction with the trapezoid rule at step `spacing` over
/// ±[`required_half_width`].
pub fn marginal<T: Real>(rho: &DensityMatrix<T>, theta: T, q: &[T], spacing: T) -> Result<Vec<T>> {
    if !(spacing > T::zero()) {
        return Err(Error::param("spacing", spacing.as_f64(), "> 0"));
    }
    let half = required_half_width(rho)?;
    let steps = (T::of(2.0) * half / spacing).ceil().to_usize().unwrap_or(0).max(2);
    let s_axis = uniform_axis(half, steps + 1);
    let ws = trapezoid_weights(&s_axis);
    let (sin, cos) = theta.sin_cos();
    Ok(q.par_iter()
        .map(|&q| {
            s_axis
                .iter()
                .zip(&ws)
                .map(|(&s, &w)| w * wigner_at(rho, q * cos - s * sin, q * sin + s * cos))
                .sum()
        })
        .collect())
}

/// ρ'_{mn} = ρ_{mn} e^{i(m−n)φ}, taking |α⟩ to |α e^{iφ}⟩.
pub fn phase_shift<T: Real>(rho: &DensityMatrix<T>, phi: T) -> DensityMatrix<T> {
    let shifted = Array2::from_shape_fn(rho.elements().dim(), |(m, n)| {
        rho.elements()[[m, n]] * phase(T::of(m as f64 - n as f64) * phi)
    });
    DensityMatrix::from_matrix_unchecked(rho.cutoff(), shifted)
}

/// Σ w_i ρ_i with w_i ≥ 0 and Σ w_i = 1 (to 1e−9).
pub fn mixture<T: Real>(rhos: &[DensityMatrix<T>], weights: &[T]) -> Result<DensityMatrix<T>> {
    if rhos.is_empty() {
        return Err(Error::EmptyData("mixture components"));
    }
    if rhos.len() != weights.len() {
        return Err(Error::Format(format!(
            "{} states but {} weights",
            rhos.len(),
            weights.len()
        )));
    }
    if let Some(&w) = weights.iter().find(|&&w| !(w >= T::zero())) {
        return Err(Error::param("weight", w.as_f64(), ">= 0"));
    }
    let total: T = weights.iter().copied().sum();
    if (total - T::one()).abs() > T::of(1e-9) {
        return Err(Error::param("weight sum", total.as_f64(), "1"));
    }
    let cutoff = rhos[0].cutoff();
    let mut acc = Array2::zeros(rhos[0].elements().dim());
    for (rho, &w) in rhos.iter().zip(weights) {
        same_cutoff(cutoff, rho.cutoff())?;
        acc = acc + rho.elements().mapv(|z| z.scale(w));
    }
    Ok(DensityMatrix::from_matrix_unchecked(cutoff, acc))
}
