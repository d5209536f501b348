//! Tensor discretization of `ℝ^d × (0, ∞)` and quadrature for the measure
//! `dμ_{α,d}(x) = x_{d+1}^{2α+1} dx / ((2π)^{d/2} 2^α Γ(α+1))`.
//!
//! The first `d` (axial) variables live on a uniform periodic grid of
//! half-width `L`; the last (radial) variable lives on the quasi-discrete
//! Hankel grid of order `α`, with nodes at scaled Bessel zeros
//! `r_k = j_{α,k} R / j_{α,N+1}`. The full measure constant is folded into the
//! quadrature weights.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Space};
use crate::scalar::{pairwise_slice, Real};
use crate::special_fn::{
    bessel_j_unchecked, bessel_zeros, gamma, normalized_bessel_j, BesselOrder,
};

/// Largest number of axial dimensions a tensor grid is built for.
pub const MAX_AXIAL_DIMS: usize = 3;

/// The pair `(α, d)` with the derived exponent `σ = (d+2α+2)/2` and the
/// measure constant `c_{α,d} = ((2π)^{d/2} 2^α Γ(α+1))^{−1}`.
///
/// `d = 0` is accepted and describes the pure radial (Hankel) setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeinsteinParams<T> {
    alpha: T,
    d: usize,
    sigma: T,
    measure_const: T,
}

impl<T: Real> WeinsteinParams<T> {
    pub fn new(alpha: T, d: usize) -> Result<Self> {
        BesselOrder::new(alpha)?;
        if d > MAX_AXIAL_DIMS {
            return Err(Error::Config(format!(
                "at most {MAX_AXIAL_DIMS} axial dimensions are supported, got d = {d}"
            )));
        }
        let two = T::lit(2.0);
        let sigma = (T::from_count(d) + two * alpha + two) / two;
        let radial = two.powf(alpha) * gamma(alpha + T::one())?;
        let axial = T::TAU().powf(T::from_count(d) / two);
        Ok(Self {
            alpha,
            d,
            sigma,
            measure_const: T::one() / (axial * radial),
        })
    }

    #[inline]
    pub fn alpha(&self) -> T {
        self.alpha
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    /// `σ = (d + 2α + 2)/2`, also the Gaussian exponent `α + d/2 + 1`.
    #[inline]
    pub fn sigma(&self) -> T {
        self.sigma
    }

    #[inline]
    pub fn measure_const(&self) -> T {
        self.measure_const
    }

    #[inline]
    pub fn order(&self) -> BesselOrder<T> {
        BesselOrder::new(self.alpha).expect("validated at construction")
    }

    /// `2^α Γ(α+1)`, the radial part of the inverse measure constant.
    pub(crate) fn radial_norm(&self) -> T {
        T::lit(2.0).powf(self.alpha) * gamma(self.alpha + T::one()).expect("alpha > -1/2")
    }
}

/// Grid sizes and extents, as they appear in experiment configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axial_n: usize,
    pub half_width: f64,
    pub radial_n: usize,
    pub radial_extent: f64,
}

/// One periodic axial factor: `n` nodes `x_j = −L + jΔx` on `[−L, L)`.
#[derive(Clone)]
pub struct AxialGrid<T: Real> {
    n: usize,
    half_width: T,
    spacing: T,
    freqs: Vec<T>,
    fft: Arc<dyn Fft<T>>,
    ifft: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for AxialGrid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AxialGrid")
            .field("n", &self.n)
            .field("half_width", &self.half_width)
            .finish()
    }
}

impl<T: Real> AxialGrid<T> {
    pub fn new(n: usize, half_width: T) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Config(format!(
                "axial_n must be a power of two >= 8, got {n}"
            )));
        }
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::Config(format!(
                "axial half-width L must be positive, got {half_width}"
            )));
        }
        let spacing = T::lit(2.0) * half_width / T::from_count(n);
        let dk = T::PI() / half_width;
        let freqs = (0..n)
            .map(|k| {
                let signed = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
                T::lit(signed) * dk
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            half_width,
            spacing,
            freqs,
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn half_width(&self) -> T {
        self.half_width
    }

    #[inline]
    pub fn spacing(&self) -> T {
        self.spacing
    }

    /// Frequency spacing `π/L`.
    #[inline]
    pub fn freq_spacing(&self) -> T {
        T::PI() / self.half_width
    }

    #[inline]
    pub fn node(&self, j: usize) -> T {
        -self.half_width + T::from_count(j) * self.spacing
    }

    /// Dual frequencies in FFT order (`kπ/L`, negative half last).
    #[inline]
    pub fn freqs(&self) -> &[T] {
        &self.freqs
    }

    /// `(−1)^k` for the FFT index `k`: the phase `e^{iLλ_k}` from the grid
    /// starting at `−L`.
    #[inline]
    pub(crate) fn parity(&self, k: usize) -> T {
        if k % 2 == 0 {
            T::one()
        } else {
            -T::one()
        }
    }

    /// Forward 1-D transform `λ ↦ (2π)^{−1/2} ∫ f(x) e^{−ixλ} dx` of samples.
    pub fn forward_line(&self, line: &mut [Complex<T>]) {
        self.fft.process(line);
        let scale = self.spacing / T::TAU().sqrt();
        for (k, v) in line.iter_mut().enumerate() {
            *v = *v * (scale * self.parity(k));
        }
    }

    /// Inverse of [`AxialGrid::forward_line`].
    pub fn inverse_line(&self, line: &mut [Complex<T>]) {
        let scale = self.freq_spacing() / T::TAU().sqrt();
        for (k, v) in line.iter_mut().enumerate() {
            *v = *v * (scale * self.parity(k));
        }
        self.ifft.process(line);
    }
}

/// The radial factor: quasi-discrete Hankel grid of order `α`.
#[derive(Debug, Clone)]
pub struct RadialGrid<T> {
    n: usize,
    extent: T,
    zeros: Vec<T>,
    band_zero: T,
    nodes: Vec<T>,
    freqs: Vec<T>,
    weights: Vec<T>,
    freq_weights: Vec<T>,
    forward: Vec<T>,
    inverse: Vec<T>,
}

impl<T: Real> RadialGrid<T> {
    pub fn new(order: BesselOrder<T>, n: usize, extent: T) -> Result<Self> {
        if n < 16 {
            return Err(Error::Config(format!("radial_n must be >= 16, got {n}")));
        }
        if !(extent > T::zero()) || !extent.is_finite() {
            return Err(Error::Config(format!(
                "radial extent R must be positive, got {extent}"
            )));
        }
        let alpha = order.alpha();
        let mut zeros = bessel_zeros(order, n + 1)?;
        let band_zero = zeros.pop().expect("n + 1 zeros");
        let nodes: Vec<T> = zeros.iter().map(|&z| z * extent / band_zero).collect();
        let freqs: Vec<T> = zeros.iter().map(|&z| z / extent).collect();
        let two = T::lit(2.0);
        let next_order = alpha + T::one();
        let jp: Vec<T> = zeros.iter().map(|&z| bessel_j_unchecked(next_order, z)).collect();
        let band = band_zero / extent;
        let weights: Vec<T> = nodes
            .iter()
            .zip(&jp)
            .map(|(&r, &j)| two * r.powf(two * alpha) / (band * band * j * j))
            .collect();
        let freq_weights: Vec<T> = freqs
            .iter()
            .zip(&jp)
            .map(|(&l, &j)| two * l.powf(two * alpha) / (extent * extent * j * j))
            .collect();
        if weights.iter().chain(&freq_weights).any(|w| !(*w > T::zero())) {
            return Err(Error::Config("non-positive radial quadrature weight".into()));
        }

        let norm = T::one() / (two.powf(alpha) * gamma(alpha + T::one())?);
        let mut kernel = vec![T::zero(); n * n];
        for m in 0..n {
            for k in m..n {
                let v = normalized_bessel_j(order, zeros[m] * zeros[k] / band_zero);
                kernel[m * n + k] = v;
                kernel[k * n + m] = v;
            }
        }
        let mut forward = vec![T::zero(); n * n];
        let mut inverse = vec![T::zero(); n * n];
        for m in 0..n {
            for k in 0..n {
                let j = kernel[m * n + k];
                forward[m * n + k] = norm * weights[k] * j;
                inverse[k * n + m] = norm * freq_weights[m] * j;
            }
        }
        Ok(Self {
            n,
            extent,
            zeros,
            band_zero,
            nodes,
            freqs,
            weights,
            freq_weights,
            forward,
            inverse,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn extent(&self) -> T {
        self.extent
    }

    /// Radial band limit `j_{α,N+1}/R`.
    #[inline]
    pub fn band_limit(&self) -> T {
        self.band_zero / self.extent
    }

    #[inline]
    pub fn zeros(&self) -> &[T] {
        &self.zeros
    }

    #[inline]
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    #[inline]
    pub fn freqs(&self) -> &[T] {
        &self.freqs
    }

    /// Weights for `∫₀^∞ f(r) r^{2α+1} dr` at the nodes.
    #[inline]
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Weights for `∫₀^∞ F(λ) λ^{2α+1} dλ` at the dual nodes.
    #[inline]
    pub fn freq_weights(&self) -> &[T] {
        &self.freq_weights
    }

    /// Row-major `N×N`: `(m, k) ↦ W_k j_α(λ_m r_k) / (2^α Γ(α+1))`.
    #[inline]
    pub(crate) fn forward_matrix(&self) -> &[T] {
        &self.forward
    }

    /// Row-major `N×N`: `(k, m) ↦ V_m j_α(λ_m r_k) / (2^α Γ(α+1))`.
    #[inline]
    pub(crate) fn inverse_matrix(&self) -> &[T] {
        &self.inverse
    }
}

/// Immutable tensor grid. Node index layout is row-major over the axial
/// indices with the radial index fastest.
pub struct Grid<T: Real> {
    params: WeinsteinParams<T>,
    axial: Option<AxialGrid<T>>,
    radial: RadialGrid<T>,
    weights: Vec<T>,
    freq_weights: Vec<T>,
    lambda_sq: Vec<T>,
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("params", &self.params)
            .field("axial", &self.axial)
            .field("radial_n", &self.radial.n)
            .field("radial_extent", &self.radial.extent)
            .finish()
    }
}

impl<T: Real> Grid<T> {
    /// Builds the tensor grid. `axial_n` must be a power of two `≥ 8`, or `1`
    /// when `d = 0`.
    pub fn build(
        params: WeinsteinParams<T>,
        axial_n: usize,
        half_width: T,
        radial_n: usize,
        radial_extent: T,
    ) -> Result<Arc<Self>> {
        let axial = if params.d() == 0 {
            if axial_n != 1 {
                return Err(Error::Config(format!(
                    "a pure radial grid (d = 0) takes axial_n = 1, got {axial_n}"
                )));
            }
            None
        } else {
            Some(AxialGrid::new(axial_n, half_width)?)
        };
        let radial = RadialGrid::new(params.order(), radial_n, radial_extent)?;

        let d = params.d();
        let c = params.measure_const();
        let (dx, dl) = match &axial {
            Some(a) => (a.spacing().powi(d as i32), a.freq_spacing().powi(d as i32)),
            None => (T::one(), T::one()),
        };
        let axial_count = axial_n.pow(d as u32);
        let n = radial.n();
        let mut weights = Vec::with_capacity(axial_count * n);
        let mut freq_weights = Vec::with_capacity(axial_count * n);
        let mut lambda_sq = Vec::with_capacity(axial_count * n);
        let mut idx = vec![0usize; d];
        for block in 0..axial_count {
            unravel(block, axial_n, &mut idx);
            let axial_sq = match &axial {
                Some(a) => idx.iter().map(|&i| a.freqs()[i] * a.freqs()[i]).sum(),
                None => T::zero(),
            };
            for k in 0..n {
                weights.push(c * dx * radial.weights()[k]);
                freq_weights.push(c * dl * radial.freq_weights()[k]);
                lambda_sq.push(axial_sq + radial.freqs()[k] * radial.freqs()[k]);
            }
        }
        Ok(Arc::new(Self {
            params,
            axial,
            radial,
            weights,
            freq_weights,
            lambda_sq,
        }))
    }

    pub fn from_spec(params: WeinsteinParams<T>, spec: &GridSpec) -> Result<Arc<Self>> {
        Self::build(
            params,
            spec.axial_n,
            T::lit(spec.half_width),
            spec.radial_n,
            T::lit(spec.radial_extent),
        )
    }

    #[inline]
    pub fn params(&self) -> &WeinsteinParams<T> {
        &self.params
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.params.d()
    }

    #[inline]
    pub fn axial(&self) -> Option<&AxialGrid<T>> {
        self.axial.as_ref()
    }

    #[inline]
    pub fn radial(&self) -> &RadialGrid<T> {
        &self.radial
    }

    #[inline]
    pub fn axial_n(&self) -> usize {
        self.axial.as_ref().map_or(1, |a| a.n())
    }

    #[inline]
    pub fn radial_n(&self) -> usize {
        self.radial.n()
    }

    /// Number of axial blocks, `axial_n^d`.
    #[inline]
    pub fn axial_count(&self) -> usize {
        self.axial_n().pow(self.d() as u32)
    }

    /// `axial_n^d · radial_n`.
    #[inline]
    pub fn len(&self) -> usize {
        self.axial_count() * self.radial_n()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            axial_n: self.axial_n(),
            half_width: self.axial.as_ref().map_or(0.0, |a| a.half_width().as_f64()),
            radial_n: self.radial_n(),
            radial_extent: self.radial.extent().as_f64(),
        }
    }

    /// Physical-space quadrature weights for `dμ_{α,d}`, per node.
    #[inline]
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Frequency-space quadrature weights for `dμ_{α,d}`, per dual node.
    #[inline]
    pub fn freq_weights(&self) -> &[T] {
        &self.freq_weights
    }

    /// `|λ|²` at every frequency node.
    #[inline]
    pub fn lambda_sq(&self) -> &[T] {
        &self.lambda_sq
    }

    /// Splits a node index into axial multi-index and radial index.
    pub fn split_index(&self, index: usize, axial_idx: &mut [usize]) -> usize {
        let n = self.radial_n();
        unravel(index / n, self.axial_n(), axial_idx);
        index % n
    }

    /// Coordinates `(x′, x_{d+1})` of a physical node.
    pub fn point(&self, index: usize) -> Vec<T> {
        let mut idx = vec![0; self.d()];
        let k = self.split_index(index, &mut idx);
        let mut p: Vec<T> = match &self.axial {
            Some(a) => idx.iter().map(|&i| a.node(i)).collect(),
            None => Vec::new(),
        };
        p.push(self.radial.nodes()[k]);
        p
    }

    /// Coordinates `(λ′, λ_{d+1})` of a frequency node.
    pub fn freq_point(&self, index: usize) -> Vec<T> {
        let mut idx = vec![0; self.d()];
        let k = self.split_index(index, &mut idx);
        let mut p: Vec<T> = match &self.axial {
            Some(a) => idx.iter().map(|&i| a.freqs()[i]).collect(),
            None => Vec::new(),
        };
        p.push(self.radial.freqs()[k]);
        p
    }

    /// True when both grids share parameters and geometry.
    pub fn same_as(&self, other: &Grid<T>) -> bool {
        std::ptr::eq(self, other) || (self.params == other.params && self.spec() == other.spec())
    }

    /// Largest `|f|` on the outermost axial planes and radial shell, relative
    /// to the sup norm. Spectral accuracy presumes this is tiny.
    pub fn boundary_magnitude(&self, f: &Field<T>) -> T {
        let sup = f.values().iter().map(|v| v.norm()).fold(T::zero(), T::max);
        if sup == T::zero() {
            return T::zero();
        }
        let n = self.radial_n();
        let an = self.axial_n();
        let mut idx = vec![0; self.d()];
        let mut edge = T::zero();
        for (i, v) in f.values().iter().enumerate() {
            let k = self.split_index(i, &mut idx);
            let on_edge = k == n - 1 || idx.iter().any(|&j| j == 0 || j == an - 1);
            if on_edge {
                edge = edge.max(v.norm());
            }
        }
        edge / sup
    }
}

pub(crate) fn unravel(mut block: usize, n: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = block % n;
        block /= n;
    }
}

/// Quadrature approximation of `∫ f dμ_{α,d}` for a physical-space field.
pub fn integrate<T: Real>(f: &Field<T>) -> Result<Complex<T>> {
    if f.space() != Space::Physical {
        return Err(Error::Usage("integrate expects a physical-space field".into()));
    }
    let terms: Vec<Complex<T>> = f
        .values()
        .iter()
        .zip(f.grid().weights())
        .map(|(v, &w)| v * w)
        .collect();
    Ok(pairwise_slice(&terms))
}

/// `‖f‖_{α,p}` with respect to the weights of the field's space; `p = ∞` is
/// the maximum over nodes.
pub fn lp_norm<T: Real>(f: &Field<T>, p: T) -> Result<T> {
    let weights = match f.space() {
        Space::Physical => f.grid().weights(),
        Space::Frequency => f.grid().freq_weights(),
    };
    weighted_lp_norm(f.values(), weights, p)
}

pub(crate) fn weighted_lp_norm<T: Real>(values: &[Complex<T>], weights: &[T], p: T) -> Result<T> {
    if !(p >= T::one()) {
        return Err(Error::Domain(format!("Lp norm requires p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(values.iter().map(|v| v.norm()).fold(T::zero(), T::max));
    }
    let two = T::lit(2.0);
    let terms: Vec<T> = values
        .iter()
        .zip(weights)
        .map(|(v, &w)| {
            if p == two {
                w * v.norm_sqr()
            } else {
                w * v.norm().powf(p)
            }
        })
        .collect();
    Ok(pairwise_slice(&terms).powf(T::one() / p))
}

/// `⟨f, g⟩ = ∫ f ḡ dμ_{α,d}` in the fields' common space.
pub fn inner_product<T: Real>(f: &Field<T>, g: &Field<T>) -> Result<Complex<T>> {
    f.check_compatible(g)?;
    let weights = match f.space() {
        Space::Physical => f.grid().weights(),
        Space::Frequency => f.grid().freq_weights(),
    };
    let terms: Vec<Complex<T>> = f
        .values()
        .iter()
        .zip(g.values())
        .zip(weights)
        .map(|((a, b), &w)| a * b.conj() * w)
        .collect();
    Ok(pairwise_slice(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(alpha: f64, d: usize) -> WeinsteinParams<f64> {
        WeinsteinParams::new(alpha, d).unwrap()
    }

    fn gaussian(grid: &Arc<Grid<f64>>, s: f64) -> Field<f64> {
        Field::from_fn(grid, |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            Complex::new((-s * r2).exp(), 0.0)
        })
    }

    #[test]
    fn derived_quantities() {
        let p = params(0.5, 1);
        assert_eq!(p.sigma(), 2.0);
        let want = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * 2f64.sqrt() * gamma(1.5).unwrap());
        assert!((p.measure_const() - want).abs() < 1e-16);
        assert!(WeinsteinParams::new(-0.5, 1).is_err());
        assert!(WeinsteinParams::new(0.0, 4).is_err());
    }

    #[test]
    fn first_radial_node_for_half_order() {
        let g = Grid::build(params(0.5, 1), 64, 10.0, 64, 10.0).unwrap();
        assert_eq!(g.len(), 64 * 64);
        let r1 = g.radial().nodes()[0];
        assert!((r1 - 10.0 / 65.0).abs() < 1e-14, "{r1}");
    }

    #[test]
    fn nodes_increasing_and_weights_positive() {
        for a in [0.0, 0.5, 1.5] {
            let g = Grid::build(params(a, 1), 16, 5.0, 32, 7.0).unwrap();
            let nodes = g.radial().nodes();
            assert!(nodes[0] > 0.0 && *nodes.last().unwrap() < 7.0);
            assert!(nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(g.weights().iter().all(|&w| w > 0.0));
            assert!(g.freq_weights().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn invalid_sizes_rejected() {
        let p = params(0.5, 1);
        assert!(matches!(Grid::build(p, 12, 1.0, 32, 1.0), Err(Error::Config(_))));
        assert!(matches!(Grid::build(p, 4, 1.0, 32, 1.0), Err(Error::Config(_))));
        assert!(matches!(Grid::build(p, 16, 1.0, 8, 1.0), Err(Error::Config(_))));
        assert!(matches!(Grid::build(p, 16, -1.0, 32, 1.0), Err(Error::Config(_))));
        assert!(matches!(Grid::build(p, 16, 1.0, 32, 0.0), Err(Error::Config(_))));
        assert!(Grid::build(params(0.5, 0), 2, 1.0, 32, 1.0).is_err());
        assert!(Grid::build(params(0.5, 0), 1, 1.0, 32, 1.0).is_ok());
    }

    #[test]
    fn gaussian_integrals_match_closed_form() {
        for a in [0.0, 0.5, 1.5] {
            for d in [1usize, 2] {
                for s in [0.5, 1.0, 2.0] {
                    let ext = 8.0 / f64::sqrt(s);
                    let g = Grid::build(params(a, d), 64, ext, 64, ext).unwrap();
                    let v = integrate(&gaussian(&g, s)).unwrap();
                    let want = (2.0 * s).powf(-(a + d as f64 / 2.0 + 1.0));
                    assert!(((v.re - want) / want).abs() <= 1e-6, "a={a} d={d} s={s}");
                    assert!(v.im == 0.0);
                }
            }
        }
    }

    #[test]
    fn gaussian_mass_and_norm_values() {
        let g = Grid::build(params(0.5, 1), 64, 10.0, 64, 10.0).unwrap();
        let e = gaussian(&g, 1.0);
        // (2s)^{-σ} with σ = α + d/2 + 1 = 2.
        let want = 0.25;
        assert!((integrate(&e).unwrap().re - want).abs() / want < 1e-6);
        assert!((lp_norm(&e, 2.0).unwrap() - want).abs() / want < 1e-6);
    }

    #[test]
    fn second_moment_against_dense_reference() {
        // ∫ x_r² e^{-|x|²} dμ for d=1, α=0.5 by a dense midpoint rule on the
        // radial integral (the axial factor is (2π)^{-1/2}√π exactly).
        let a = 0.5;
        let n = 1_000_000;
        let h = 12.0 / n as f64;
        let mut radial = 0.0;
        for i in 0..n {
            let r = (i as f64 + 0.5) * h;
            radial += r * r * (-r * r).exp() * r.powf(2.0 * a + 1.0) * h;
        }
        let p = params(a, 1);
        let want = radial * std::f64::consts::PI.sqrt() * p.measure_const();
        let g = Grid::build(p, 64, 8.0, 64, 8.0).unwrap();
        let f = Field::from_fn(&g, |x| Complex::new(x[1] * x[1] * (-(x[0] * x[0] + x[1] * x[1])).exp(), 0.0));
        let got = integrate(&f).unwrap().re;
        assert!(((got - want) / want).abs() <= 1e-6, "{got} vs {want}");
    }

    #[test]
    fn radial_refinement_reduces_error() {
        let s = 1.0;
        let want = (2.0 * s as f64).powf(-1.5);
        let mut last = f64::INFINITY;
        for n in [16usize, 32, 64] {
            let g = Grid::build(params(0.5, 0), 1, 1.0, n, 8.0).unwrap();
            let err = (integrate(&gaussian(&g, s)).unwrap().re - want).abs();
            assert!(err < last || (err < 1e-13 && last < 1e-13), "n={n} err={err:e}");
            last = err;
        }
    }

    #[test]
    fn lp_norm_edge_cases() {
        let g = Grid::build(params(0.0, 1), 16, 4.0, 16, 4.0).unwrap();
        let z = Field::zeros(&g, Space::Physical);
        assert_eq!(lp_norm(&z, 2.0).unwrap(), 0.0);
        assert_eq!(lp_norm(&z, f64::INFINITY).unwrap(), 0.0);
        assert!(matches!(lp_norm(&z, 0.5), Err(Error::Domain(_))));
        let e = gaussian(&g, 1.0);
        let c = Complex::new(-0.3, 1.7);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            let scaled = lp_norm(&e.scaled(c), p).unwrap();
            let base = lp_norm(&e, p).unwrap();
            assert!((scaled - c.norm() * base).abs() <= 1e-13 * scaled);
        }
        assert_eq!(lp_norm(&e, f64::INFINITY).unwrap(), e.values().iter().map(|v| v.norm()).fold(0.0, f64::max));
    }

    #[test]
    fn integrate_rejects_frequency_fields() {
        let g = Grid::build(params(0.0, 1), 16, 4.0, 16, 4.0).unwrap();
        let z = Field::zeros(&g, Space::Frequency);
        assert!(matches!(integrate(&z), Err(Error::Usage(_))));
        let zp = Field::zeros(&g, Space::Physical);
        assert_eq!(integrate(&zp).unwrap(), Complex::new(0.0, 0.0));
    }
}
