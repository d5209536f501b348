//! The discrete Weinstein transform
//! `F(λ) = ∫ f(x) Ψ(x, λ) dμ_{α,d}(x)`, `Ψ(x, λ) = e^{−i⟨x′,λ′⟩} j_α(λ_{d+1} x_{d+1})`.
//!
//! The axial factor is an FFT (phase-corrected for the grid origin at `−L`),
//! the radial factor is the quasi-discrete Hankel matrix of order `α`. The
//! inverse uses the reflected kernel `Ψ(−x, λ)`; the radial kernel is even, so
//! only the axial phase flips.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::Result;
use crate::field::{Field, Space};
use crate::grid::{Grid, WeinsteinParams};
use crate::scalar::{pairwise_slice, Real};
use crate::special_fn::normalized_bessel_j;

/// Boundary-to-peak ratio above which spectral accuracy is suspect.
pub const BOUNDARY_WARN: f64 = 1e-8;

/// `Ψ(x, λ) = e^{−i⟨x′,λ′⟩} j_α(λ_{d+1} x_{d+1})`.
///
/// Both points carry `d + 1` coordinates.
pub fn eigenfunction<T: Real>(params: &WeinsteinParams<T>, x: &[T], lambda: &[T]) -> Complex<T> {
    debug_assert_eq!(x.len(), params.d() + 1);
    debug_assert_eq!(lambda.len(), params.d() + 1);
    let d = params.d();
    let phase: T = x[..d].iter().zip(&lambda[..d]).map(|(&a, &b)| a * b).sum();
    let radial = normalized_bessel_j(params.order(), lambda[d] * x[d]);
    Complex::from_polar(radial, -phase)
}

/// Fast forward transform of a physical-space field.
pub fn forward<T: Real>(f: &Field<T>) -> Result<Field<T>> {
    f.expect_space(Space::Physical, "forward")?;
    let grid = f.grid();
    if log_boundary() {
        let edge = grid.boundary_magnitude(f);
        if edge > T::lit(BOUNDARY_WARN) {
            log::warn!("field boundary magnitude {edge:e} exceeds {BOUNDARY_WARN:e}; spectral accuracy is degraded");
        }
    }
    let mut values = f.values().to_vec();
    axial_pass(grid, &mut values, Direction::Forward);
    radial_pass(grid, grid.radial().forward_matrix(), &mut values);
    Ok(f.with_values(values, Space::Frequency))
}

/// Fast inverse transform of a frequency-space field.
pub fn inverse<T: Real>(f: &Field<T>) -> Result<Field<T>> {
    f.expect_space(Space::Frequency, "inverse")?;
    let grid = f.grid();
    let mut values = f.values().to_vec();
    radial_pass(grid, grid.radial().inverse_matrix(), &mut values);
    axial_pass(grid, &mut values, Direction::Inverse);
    Ok(f.with_values(values, Space::Physical))
}

/// Multiplies a frequency-space field by the symbol `−|λ|²` of `Δ_W`.
pub fn laplacian_symbol_apply<T: Real>(f: &Field<T>) -> Result<Field<T>> {
    f.expect_space(Space::Frequency, "laplacian_symbol_apply")?;
    let values = f
        .values()
        .iter()
        .zip(f.grid().lambda_sq())
        .map(|(&v, &l2)| v * (-l2))
        .collect();
    Ok(f.with_values(values, Space::Frequency))
}

/// Direct quadrature of the transform at an arbitrary frequency point:
/// `Σ_nodes w f(x) Ψ(x, λ)`. `O(len)` per point; used as an oracle.
pub fn forward_at<T: Real>(f: &Field<T>, lambda: &[T]) -> Result<Complex<T>> {
    f.expect_space(Space::Physical, "forward_at")?;
    let grid = f.grid();
    let params = grid.params();
    let terms: Vec<Complex<T>> = (0..grid.len())
        .map(|i| f.values()[i] * eigenfunction(params, &grid.point(i), lambda) * grid.weights()[i])
        .collect();
    Ok(pairwise_slice(&terms))
}

/// Direct quadrature of the inverse transform at an arbitrary physical point:
/// `Σ_dual nodes v F(λ) Ψ(−x, λ)`.
pub fn inverse_at<T: Real>(f: &Field<T>, x: &[T]) -> Result<Complex<T>> {
    f.expect_space(Space::Frequency, "inverse_at")?;
    let grid = f.grid();
    let params = grid.params();
    let d = params.d();
    let mut reflected = x.to_vec();
    for v in reflected[..d].iter_mut() {
        *v = -*v;
    }
    let terms: Vec<Complex<T>> = (0..grid.len())
        .map(|i| {
            f.values()[i] * eigenfunction(params, &reflected, &grid.freq_point(i)) * grid.freq_weights()[i]
        })
        .collect();
    Ok(pairwise_slice(&terms))
}

/// Row of the radial inverse at an off-grid radius: coefficients `K_m(ρ)` with
/// `f(ρ) = Σ_m K_m(ρ) F_m` for radially band-limited data. Zero beyond `R`.
pub(crate) fn radial_interpolation_row<T: Real>(grid: &Grid<T>, rho: T) -> Vec<T> {
    let radial = grid.radial();
    if rho > radial.extent() {
        return vec![T::zero(); radial.n()];
    }
    let norm = T::one() / grid.params().radial_norm();
    let order = grid.params().order();
    radial
        .freqs()
        .iter()
        .zip(radial.freq_weights())
        .map(|(&l, &v)| norm * v * normalized_bessel_j(order, l * rho))
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

fn log_boundary() -> bool {
    log::log_enabled!(log::Level::Warn)
}

/// Applies the 1-D axial transform along every axial dimension.
pub(crate) fn axial_pass<T: Real>(grid: &Grid<T>, values: &mut [Complex<T>], dir: Direction) {
    let Some(axial) = grid.axial() else {
        return;
    };
    let d = grid.d();
    let n = axial.n();
    let nr = grid.radial_n();
    let mut line = vec![Complex::new(T::zero(), T::zero()); n];
    for dim in 0..d {
        // stride (in values) between consecutive indices of this dimension
        let stride = n.pow((d - 1 - dim) as u32) * nr;
        let outer = grid.len() / (n * stride);
        for o in 0..outer {
            let base_outer = o * n * stride;
            for inner in 0..stride {
                let base = base_outer + inner;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = values[base + j * stride];
                }
                match dir {
                    Direction::Forward => axial.forward_line(&mut line),
                    Direction::Inverse => axial.inverse_line(&mut line),
                }
                for (j, slot) in line.iter().enumerate() {
                    values[base + j * stride] = *slot;
                }
            }
        }
    }
}

/// Multiplies every radial block by the given row-major `N×N` real matrix.
pub(crate) fn radial_pass<T: Real>(grid: &Grid<T>, matrix: &[T], values: &mut [Complex<T>]) {
    let n = grid.radial_n();
    values.par_chunks_mut(n).for_each(|block| {
        let input: Vec<Complex<T>> = block.to_vec();
        for (m, out) in block.iter_mut().enumerate() {
            let row = &matrix[m * n..(m + 1) * n];
            let mut re = T::zero();
            let mut im = T::zero();
            for (&a, v) in row.iter().zip(&input) {
                re = re + a * v.re;
                im = im + a * v.im;
            }
            *out = Complex::new(re, im);
        }
    });
}
