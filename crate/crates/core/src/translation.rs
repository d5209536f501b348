//! Generalized translation `T_x` and the convolution `∗_W`.
//!
//! `T_x f(y) = (a_α/2) ∫₀^π f(x′+y′, ρ_θ) sin^{2α}θ dθ` with
//! `ρ_θ = √(x_{d+1}² + y_{d+1}² + 2x_{d+1}y_{d+1} cos θ)`, evaluated by
//! Gauss–Gegenbauer quadrature in `u = cos θ`.
//!
//! On a grid, the axial shift is spectral (periodic wrap on the box) and the
//! radial value at an off-grid radius is the Fourier–Bessel series of the
//! field's radial coefficients, clamped to zero beyond `R`.
//!
//! With the kernel `e^{−i⟨x′,λ′⟩}` the shift `x′+y′` gives
//! `𝓕(T_x f)(λ) = Ψ(x̌, λ) 𝓕f(λ)` where `x̌ = (−x′, x_{d+1})`, and the
//! convolution `f ∗_W g(x) = ∫ T_x f(y̌) g(y) dμ(y)` satisfies
//! `𝓕(f ∗_W g) = 𝓕f · 𝓕g`.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Field, Space};
use crate::grid::{unravel, Grid, WeinsteinParams};
use crate::scalar::Real;
use crate::special_fn::gamma;
use crate::transform::{axial_pass, forward, inverse, radial_interpolation_row, radial_pass, Direction};

/// Default number of Gegenbauer nodes.
pub const DEFAULT_NODES: usize = 64;

/// Quadrature for `∫₀^π g(θ) sin^{2α}θ dθ` and the constant `a_α`.
#[derive(Debug, Clone)]
pub struct TranslationRule<T> {
    cosines: Vec<T>,
    thetas: Vec<T>,
    weights: Vec<T>,
    a_alpha: T,
}

impl<T: Real> TranslationRule<T> {
    /// Golub–Welsch rule for the Jacobi weight `(1−u²)^{α−1/2}`.
    pub fn new(alpha: T, nodes: usize) -> Result<Self> {
        crate::special_fn::BesselOrder::new(alpha)?;
        if nodes < 2 {
            return Err(Error::Config(format!("need at least 2 Gegenbauer nodes, got {nodes}")));
        }
        let a = alpha.as_f64();
        let beta = a - 0.5;
        let mut jacobi = DMatrix::<f64>::zeros(nodes, nodes);
        for n in 1..nodes {
            let nf = n as f64;
            let e2 = if n == 1 {
                1.0 / (2.0 * a + 2.0)
            } else {
                nf * (nf + 2.0 * beta) / ((2.0 * nf + 2.0 * beta + 1.0) * (2.0 * nf + 2.0 * beta - 1.0))
            };
            jacobi[(n, n - 1)] = e2.sqrt();
            jacobi[(n - 1, n)] = e2.sqrt();
        }
        let a_alpha = 2.0 * gamma(a + 1.0)? / (std::f64::consts::PI.sqrt() * gamma(a + 0.5)?);
        let mu0 = 2.0 / a_alpha;
        let eig = SymmetricEigen::new(jacobi);
        let mut pairs: Vec<(f64, f64)> = (0..nodes)
            .map(|k| (eig.eigenvalues[k], mu0 * eig.eigenvectors[(0, k)].powi(2)))
            .collect();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        // symmetrize: the rule is even in u
        let sym: Vec<(f64, f64)> = (0..nodes)
            .map(|k| {
                let m = nodes - 1 - k;
                (0.5 * (pairs[k].0 - pairs[m].0), 0.5 * (pairs[k].1 + pairs[m].1))
            })
            .collect();
        let total: f64 = sym.iter().map(|p| p.1).sum();
        Ok(Self {
            cosines: sym.iter().map(|p| T::lit(p.0)).collect(),
            thetas: sym.iter().map(|p| T::lit(p.0.clamp(-1.0, 1.0).acos())).collect(),
            weights: sym.iter().map(|p| T::lit(p.1 * mu0 / total)).collect(),
            a_alpha: T::lit(a_alpha),
        })
    }

    pub fn for_params(params: &WeinsteinParams<T>) -> Result<Self> {
        Self::new(params.alpha(), DEFAULT_NODES)
    }

    /// `a_α = 2Γ(α+1)/(√π Γ(α+1/2))`, fixed by `T_x 1 = 1`.
    pub fn a_alpha(&self) -> T {
        self.a_alpha
    }

    pub fn thetas(&self) -> &[T] {
        &self.thetas
    }

    pub fn cosines(&self) -> &[T] {
        &self.cosines
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `(a_α/2) Σ_k w_k g(ρ_k)` with `ρ_k = √(a² + b² + 2ab cos θ_k)`.
    pub fn average<R, F>(&self, a: T, b: T, mut g: F) -> R
    where
        R: std::ops::Add<Output = R> + std::ops::Mul<T, Output = R> + Default,
        F: FnMut(T) -> R,
    {
        let half = self.a_alpha / T::lit(2.0);
        let mut acc = R::default();
        for (&c, &w) in self.cosines.iter().zip(&self.weights) {
            let rho = (a * a + b * b + T::lit(2.0) * a * b * c).max(T::zero()).sqrt();
            acc = acc + g(rho) * (w * half);
        }
        acc
    }
}

fn check_point<T: Real>(params: &WeinsteinParams<T>, x: &[T]) -> Result<()> {
    if x.len() != params.d() + 1 {
        return Err(Error::Usage(format!(
            "translation point has {} coordinates, expected {}",
            x.len(),
            params.d() + 1
        )));
    }
    if !(x[params.d()] >= T::zero()) {
        return Err(Error::Domain(format!(
            "translation point must have nonnegative last coordinate, got {}",
            x[params.d()]
        )));
    }
    Ok(())
}

/// `T_x f(y)` for a function given in closed form.
pub fn translate_fn<T, F>(rule: &TranslationRule<T>, params: &WeinsteinParams<T>, f: F, x: &[T], y: &[T]) -> Result<Complex<T>>
where
    T: Real,
    F: Fn(&[T]) -> Complex<T>,
{
    check_point(params, x)?;
    check_point(params, y)?;
    let d = params.d();
    let mut z: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a + b).collect();
    Ok(rule.average(x[d], y[d], |rho| {
        z[d] = rho;
        f(&z)
    }))
}

/// `B[y, m] = (a_α/2) Σ_k w_k K_m(ρ_k(x_r, y))`: maps radial coefficients to
/// the translated radial profile at every radial node `y`.
fn radial_translation_matrix<T: Real>(grid: &Grid<T>, rule: &TranslationRule<T>, xr: T) -> Vec<T> {
    let n = grid.radial_n();
    let nodes = grid.radial().nodes();
    let rows: Vec<Vec<T>> = nodes
        .par_iter()
        .map(|&y| rule.average(xr, y, |rho| RowAcc(radial_interpolation_row(grid, rho))).0)
        .collect();
    let mut m = Vec::with_capacity(n * n);
    for row in rows {
        m.extend(row);
    }
    m
}

/// Vector accumulator for [`TranslationRule::average`].
#[derive(Default)]
struct RowAcc<T>(Vec<T>);

impl<T: Real> std::ops::Add for RowAcc<T> {
    type Output = Self;
    fn add(self, other: Self) -> Self {
        if self.0.is_empty() {
            return other;
        }
        RowAcc(self.0.iter().zip(&other.0).map(|(&a, &b)| a + b).collect())
    }
}

impl<T: Real> std::ops::Mul<T> for RowAcc<T> {
    type Output = Self;
    fn mul(self, c: T) -> Self {
        RowAcc(self.0.into_iter().map(|a| a * c).collect())
    }
}

/// `T_x f` sampled at every physical node.
pub fn translate<T: Real>(f: &Field<T>, rule: &TranslationRule<T>, x: &[T]) -> Result<Field<T>> {
    f.expect_space(Space::Physical, "translate")?;
    let grid = f.grid();
    let params = grid.params();
    check_point(params, x)?;
    let d = params.d();
    let mut values = f.values().to_vec();
    if d > 0 && x[..d].iter().any(|&v| v != T::zero()) {
        axial_pass(grid, &mut values, Direction::Forward);
        apply_axial_phase(grid, &mut values, &x[..d]);
        axial_pass(grid, &mut values, Direction::Inverse);
    }
    radial_pass(grid, grid.radial().forward_matrix(), &mut values);
    let b = radial_translation_matrix(grid, rule, x[d]);
    radial_pass(grid, &b, &mut values);
    Ok(f.with_values(values, Space::Physical))
}

/// Multiplies axial spectra by `e^{i⟨λ′, shift⟩}` (a shift by `+shift`).
fn apply_axial_phase<T: Real>(grid: &Grid<T>, values: &mut [Complex<T>], shift: &[T]) {
    let Some(axial) = grid.axial() else {
        return;
    };
    let nr = grid.radial_n();
    let an = axial.n();
    let freqs = axial.freqs();
    values.par_chunks_mut(nr).enumerate().for_each(|(block, chunk)| {
        let mut idx = vec![0; shift.len()];
        unravel(block, an, &mut idx);
        let phase: T = idx.iter().zip(shift).map(|(&k, &s)| freqs[k] * s).sum();
        let rot = Complex::from_polar(T::one(), phase);
        for v in chunk.iter_mut() {
            *v = *v * rot;
        }
    });
}

/// `f ∗_W g = 𝓕⁻¹(𝓕f · 𝓕g)`.
pub fn convolve<T: Real>(f: &Field<T>, g: &Field<T>) -> Result<Field<T>> {
    f.expect_space(Space::Physical, "convolve")?;
    f.check_compatible(g)?;
    inverse(&forward(f)?.mul(&forward(g)?)?)
}

/// Direct quadrature `Σ_y w(y) T_x f(y̌) g(y)` at every node. Cost grows like
/// `(axial count)² · N³`; intended for small oracle grids.
pub fn convolve_direct<T: Real>(f: &Field<T>, g: &Field<T>, rule: &TranslationRule<T>) -> Result<Field<T>> {
    f.expect_space(Space::Physical, "convolve_direct")?;
    f.check_compatible(g)?;
    let grid: &Arc<Grid<T>> = f.grid();
    let d = grid.d();
    let nr = grid.radial_n();
    let an = grid.axial_n();
    let blocks = grid.axial_count();
    // radial coefficients of f on every axial node
    let mut coeffs = f.values().to_vec();
    radial_pass(grid, grid.radial().forward_matrix(), &mut coeffs);
    let nodes = grid.radial().nodes();
    // kernel[xr][yr][m]
    let kernel: Vec<Vec<T>> = nodes
        .par_iter()
        .map(|&xr| radial_translation_matrix(grid, rule, xr))
        .collect();
    let weights = grid.weights();
    let gw: Vec<Complex<T>> = g.values().iter().zip(weights).map(|(&v, &w)| v * w).collect();
    let out: Vec<Complex<T>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let xb = i / nr;
            let xk = i % nr;
            let mut xi = vec![0; d];
            let mut yi = vec![0; d];
            unravel(xb, an, &mut xi);
            let mut acc = Complex::new(T::zero(), T::zero());
            for yb in 0..blocks {
                unravel(yb, an, &mut yi);
                // axial node of x′ − y′ (origin at index an/2), wrapped
                let mut db = 0;
                for (&a, &b) in xi.iter().zip(&yi) {
                    db = db * an + (a + an + an / 2 - b) % an;
                }
                let fc = &coeffs[db * nr..(db + 1) * nr];
                let kx = &kernel[xk];
                for yk in 0..nr {
                    let row = &kx[yk * nr..(yk + 1) * nr];
                    let mut t = Complex::new(T::zero(), T::zero());
                    for (&k, &c) in row.iter().zip(fc) {
                        t = t + c * k;
                    }
                    acc = acc + t * gw[yb * nr + yk];
                }
            }
            acc
        })
        .collect();
    Ok(f.with_values(out, Space::Physical))
}
