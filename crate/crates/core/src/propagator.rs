//! The free group `I_α(t) = 𝓕⁻¹ e^{−it|λ|²} 𝓕`, its closed form on Gaussians,
//! the Duhamel integral, and dispersive-decay fits.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Field, Space};
use crate::grid::{Grid, GridSpec, WeinsteinParams};
use crate::separable::SeparableEvolver;
use crate::quadrature::simpson_weights;
use crate::scalar::Real;
use crate::transform::{forward, inverse};

/// Multiplier plan on a fixed grid; the symbol `|λ|²` is the grid's table.
#[derive(Debug, Clone)]
pub struct PropagatorPlan<T: Real> {
    grid: Arc<Grid<T>>,
}

impl<T: Real> PropagatorPlan<T> {
    pub fn new(grid: &Arc<Grid<T>>) -> Self {
        Self {
            grid: Arc::clone(grid),
        }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn symbol(&self) -> &[T] {
        self.grid.lambda_sq()
    }

    /// Multiplies a frequency-space field by `e^{−it|λ|²}` in place.
    pub fn apply_multiplier(&self, spectrum: &mut Field<T>, t: T) -> Result<()> {
        spectrum.expect_space(Space::Frequency, "apply_multiplier")?;
        if t == T::zero() {
            return Ok(());
        }
        let symbol = self.symbol();
        spectrum
            .values_mut()
            .par_iter_mut()
            .zip(symbol.par_iter())
            .for_each(|(v, &l2)| *v = *v * Complex::from_polar(T::one(), -t * l2));
        Ok(())
    }

    /// `I_α(t) g` for a physical-space field.
    pub fn evolve(&self, g: &Field<T>, t: T) -> Result<Field<T>> {
        g.expect_space(Space::Physical, "evolve")?;
        if !g.grid().same_as(&self.grid) {
            return Err(Error::Usage("field and propagator plan use different grids".into()));
        }
        if t == T::zero() {
            return Ok(g.clone());
        }
        let mut spec = forward(g)?;
        self.apply_multiplier(&mut spec, t)?;
        inverse(&spec)
    }
}

/// `I_α(t) g` with a throwaway plan.
pub fn free_evolve<T: Real>(g: &Field<T>, t: T) -> Result<Field<T>> {
    PropagatorPlan::new(g.grid()).evolve(g, t)
}

/// `I_α(t) e^{−s|·|²}` at `x`: `(1+4ist)^{−σ} e^{−s|x|²/(1+4ist)}`, principal branch.
pub fn gaussian_evolved<T: Real>(params: &WeinsteinParams<T>, s: T, t: T, x: &[T]) -> Complex<T> {
    let z = Complex::new(T::one(), T::lit(4.0) * s * t);
    let r2: T = x.iter().map(|&v| v * v).sum();
    let amp = (z.ln() * (-params.sigma())).exp();
    amp * (Complex::new(-s * r2, T::zero()) / z).exp()
}

/// `‖I_α(t) e^{−s|·|²}‖_∞ = (1 + 16s²t²)^{−σ/2}`.
pub fn gaussian_evolved_sup<T: Real>(params: &WeinsteinParams<T>, s: T, t: T) -> T {
    (T::one() + T::lit(16.0) * s * s * t * t).powf(-params.sigma() / T::lit(2.0))
}

/// `Φ_α(F)(t) = ∫_0^t I_α(t−s) F(s) ds` from samples on a uniform grid over
/// `[0, t]` (composite Simpson, 3/8 tail).
pub fn duhamel<T: Real>(plan: &PropagatorPlan<T>, samples: &[Field<T>], t: T) -> Result<Field<T>> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::Usage(format!("duhamel needs at least 3 time samples, got {n}")));
    }
    let h = t / T::from_count(n - 1);
    let w = simpson_weights(n, h)?;
    let mut acc = Field::zeros(plan.grid(), Space::Frequency);
    for (k, f) in samples.iter().enumerate() {
        f.expect_space(Space::Physical, "duhamel")?;
        let mut spec = forward(f)?;
        plan.apply_multiplier(&mut spec, t - T::from_count(k) * h)?;
        acc = acc.combine(Complex::new(T::one(), T::zero()), &spec, Complex::new(w[k], T::zero()))?;
    }
    inverse(&acc)
}

/// `Φ_α(F)(t_j)` at every sample time `t_j = j·dt`, using
/// `Φ(t_j) = I(t_j) ∫_0^{t_j} I(−s) F(s) ds`. Even prefixes use composite
/// Simpson, odd ones close with the 3/8 rule, and `j = 1` integrates the
/// quadratic through samples 0, 1, 2 (see [`crate::quadrature::cumulative_weights`]).
pub fn duhamel_cumulative<T: Real>(plan: &PropagatorPlan<T>, samples: &[Field<T>], dt: T) -> Result<Vec<Field<T>>> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::Usage(format!("duhamel needs at least 3 time samples, got {n}")));
    }
    let pulled: Vec<Vec<Complex<T>>> = samples
        .iter()
        .enumerate()
        .map(|(k, f)| {
            f.expect_space(Space::Physical, "duhamel_cumulative")?;
            let mut spec = forward(f)?;
            plan.apply_multiplier(&mut spec, -T::from_count(k) * dt)?;
            Ok(spec.into_values())
        })
        .collect::<Result<_>>()?;
    let len = plan.grid().len();
    let zero = Complex::new(T::zero(), T::zero());
    let h3 = dt / T::lit(3.0);
    let h38 = T::lit(3.0) * dt / T::lit(8.0);
    let h12 = dt / T::lit(12.0);
    let mut even: Vec<Vec<Complex<T>>> = vec![Vec::new(); n];
    even[0] = vec![zero; len];
    let mut k = 2;
    while k < n {
        let prev = &even[k - 2];
        let (a, b, c) = (&pulled[k - 2], &pulled[k - 1], &pulled[k]);
        even[k] = (0..len)
            .map(|i| prev[i] + (a[i] + b[i] * T::lit(4.0) + c[i]) * h3)
            .collect();
        k += 2;
    }
    (0..n)
        .into_par_iter()
        .map(|j| {
            let acc: Vec<Complex<T>> = if j % 2 == 0 {
                even[j].clone()
            } else if j == 1 {
                let (a, b, c) = (&pulled[0], &pulled[1], &pulled[2]);
                (0..len)
                    .map(|i| (a[i] * T::lit(5.0) + b[i] * T::lit(8.0) - c[i]) * h12)
                    .collect()
            } else {
                let base = &even[j - 3];
                let (a, b, c, e) = (&pulled[j - 3], &pulled[j - 2], &pulled[j - 1], &pulled[j]);
                (0..len)
                    .map(|i| base[i] + (a[i] + (b[i] + c[i]) * T::lit(3.0) + e[i]) * h38)
                    .collect()
            };
            let mut spec = Field::from_values(plan.grid(), acc, Space::Frequency)?;
            plan.apply_multiplier(&mut spec, T::from_count(j) * dt)?;
            inverse(&spec)
        })
        .collect()
}

/// Least-squares line `y = slope·x + intercept` with coefficient of
/// determination.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// Settings for [`decay_fit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFitConfig {
    pub s: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    /// Spatial exponent; `f64::INFINITY` for the sup norm.
    pub p: f64,
    pub axial_n: usize,
    pub half_width: f64,
    pub radial_n: usize,
    pub radial_extent: f64,
}

impl DecayFitConfig {
    /// Sizes the box so the Gaussian spread at `t_max` stays below `e^{−16}` at
    /// the edge, and the mesh resolves the initial spectrum to `e^{−25}`.
    pub fn auto(s: f64, t_min: f64, t_max: f64, p: f64) -> Self {
        let s_eff = s / (1.0 + 16.0 * s * s * t_max * t_max);
        let extent = (16.0 / s_eff).sqrt().max(8.0 / s.sqrt());
        let k_max = 10.0 * s.sqrt();
        let axial_n = ((2.0 * extent * k_max / std::f64::consts::PI).ceil() as usize).next_power_of_two().max(8);
        let radial_n = (k_max * extent / std::f64::consts::PI).ceil() as usize + 16;
        Self {
            s,
            t_min,
            t_max,
            samples: 24,
            p,
            axial_n,
            half_width: extent,
            radial_n,
            radial_extent: extent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecaySample {
    pub t: f64,
    pub norm: f64,
}

/// Result of [`decay_fit`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `−σ(1 − 2/p)`.
    pub target_slope: f64,
    /// `max_t (2t)^σ ‖I(t)g‖_∞ / ‖g‖_{α,1}`; reported for `p = ∞`.
    pub decay_constant: Option<f64>,
    pub samples: Vec<DecaySample>,
}

/// Log–log least-squares slope of `t ↦ ‖I_α(t)E_s‖_{α,p}` over log-spaced
/// times in `[t_min, t_max]`, using the separable evolution.
pub fn decay_fit(params: &WeinsteinParams<f64>, cfg: &DecayFitConfig) -> Result<DecayFit> {
    if !(cfg.t_min > 0.0 && cfg.t_max > cfg.t_min) || cfg.samples < 2 {
        return Err(Error::Config(format!(
            "decay fit needs 0 < t_min < t_max and at least 2 samples, got [{}, {}] with {}",
            cfg.t_min, cfg.t_max, cfg.samples
        )));
    }
    if !(cfg.p >= 2.0) {
        return Err(Error::Domain(format!("decay fit takes p in [2, inf], got {}", cfg.p)));
    }
    let s = cfg.s;
    let spec = GridSpec {
        axial_n: cfg.axial_n,
        half_width: cfg.half_width,
        radial_n: cfg.radial_n,
        radial_extent: cfg.radial_extent,
    };
    let sep = SeparableEvolver::new(*params, &spec)?;
    let gauss = |x: f64| Complex::new((-s * x * x).exp(), 0.0);
    let axial = vec![gauss; params.d()];
    let spectra = sep.spectra(&sep.sample(&axial, gauss))?;
    let ratio = cfg.t_max / cfg.t_min;
    let mut samples = Vec::with_capacity(cfg.samples);
    for k in 0..cfg.samples {
        let t = cfg.t_min * ratio.powf(k as f64 / (cfg.samples - 1) as f64);
        samples.push(DecaySample {
            t,
            norm: sep.norms_at(&spectra, t, &[cfg.p])?[0],
        });
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.t.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.norm.ln()).collect();
    let (slope, intercept, r_squared) = least_squares(&xs, &ys);
    let sigma = params.sigma();
    let decay_constant = if cfg.p.is_infinite() {
        let l1 = sep.norms_at(&spectra, 0.0, &[1.0])?[0];
        Some(
            samples
                .iter()
                .map(|smp| (2.0 * smp.t).powf(sigma) * smp.norm / l1)
                .fold(0.0, f64::max),
        )
    } else {
        None
    };
    Ok(DecayFit {
        slope,
        intercept,
        r_squared,
        target_slope: -sigma * (1.0 - 2.0 / cfg.p),
        decay_constant,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::lp_norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(alpha: f64, d: usize, n: usize, ext: f64) -> Arc<Grid<f64>> {
        Grid::build(WeinsteinParams::new(alpha, d).unwrap(), n, ext, n, ext).unwrap()
    }

    fn gaussian(g: &Arc<Grid<f64>>, s: f64) -> Field<f64> {
        Field::from_fn(g, |x| Complex::new((-s * x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0))
    }

    fn random_packet(g: &Arc<Grid<f64>>, rng: &mut ChaCha8Rng) -> Field<f64> {
        let (c, s, k) = (rng.gen_range(-1.0..1.0), rng.gen_range(0.5..1.5), rng.gen_range(-2.0..2.0));
        let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        Field::from_fn(g, |x| {
            let r2 = (x[0] - c).powi(2) + x[1] * x[1];
            Complex::new(a, b) * Complex::from_polar((-s * r2).exp(), k * x[0])
        })
    }

    #[test]
    fn zero_time_is_identity() {
        let g = grid(0.5, 1, 32, 8.0);
        let f = gaussian(&g, 1.0);
        let u = free_evolve(&f, 0.0).unwrap();
        assert_eq!(u.values(), f.values());
    }

    #[test]
    fn gaussian_closed_form() {
        let g = grid(0.5, 1, 128, 16.0);
        let p = *g.params();
        let f = gaussian(&g, 1.0);
        for t in [0.1, 0.5, 1.0] {
            let u = free_evolve(&f, t).unwrap();
            let want = Field::from_fn(&g, |x| gaussian_evolved(&p, 1.0, t, x));
            assert!(u.max_abs_diff(&want).unwrap() <= 1e-6 * want.sup(), "t={t}");
            let peak = gaussian_evolved(&p, 1.0, t, &[0.0, 0.0]).norm();
            assert!((peak - gaussian_evolved_sup(&p, 1.0, t)).abs() < 1e-14);
        }
    }

    #[test]
    fn unitarity_group_law_and_reversal() {
        let g = grid(1.5, 1, 64, 12.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_packet(&g, &mut rng);
        let m = lp_norm(&f, 2.0).unwrap();
        let plan = PropagatorPlan::new(&g);
        for t in [0.1, 1.0, 10.0] {
            let u = plan.evolve(&f, t).unwrap();
            assert!((lp_norm(&u, 2.0).unwrap() / m - 1.0).abs() < 1e-8);
        }
        let a = plan.evolve(&plan.evolve(&f, 0.3).unwrap(), 0.4).unwrap();
        let b = plan.evolve(&f, 0.7).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() <= 1e-9 * f.sup());
        let back = plan.evolve(&plan.evolve(&f, 0.9).unwrap(), -0.9).unwrap();
        assert!(back.max_abs_diff(&f).unwrap() <= 1e-9 * f.sup());
    }

    #[test]
    fn duhamel_of_free_orbit() {
        let g = grid(0.5, 1, 64, 12.0);
        let plan = PropagatorPlan::new(&g);
        let h = gaussian(&g, 1.0);
        let t = 0.8;
        let n = 10; // odd interval count exercises the 3/8 tail
        let samples: Vec<_> = (0..n)
            .map(|k| plan.evolve(&h, t * k as f64 / (n - 1) as f64).unwrap())
            .collect();
        let phi = duhamel(&plan, &samples, t).unwrap();
        let want = plan.evolve(&h, t).unwrap().scaled(Complex::new(t, 0.0));
        assert!(phi.max_abs_diff(&want).unwrap() <= 1e-6 * want.sup());
        let cum = duhamel_cumulative(&plan, &samples, t / (n - 1) as f64).unwrap();
        assert!(cum.last().unwrap().max_abs_diff(&want).unwrap() <= 1e-6 * want.sup());
        assert!(cum[0].sup() == 0.0);
        let dt = t / (n - 1) as f64;
        for j in 2..n {
            let single = duhamel(&plan, &samples[..=j], j as f64 * dt).unwrap();
            assert!(cum[j].max_abs_diff(&single).unwrap() <= 1e-13, "j={j}");
        }
        let zero = vec![Field::zeros(&g, Space::Physical); 5];
        assert_eq!(duhamel(&plan, &zero, 1.0).unwrap().sup(), 0.0);
        assert!(matches!(duhamel(&plan, &samples[..2], t), Err(Error::Usage(_))));
    }

    #[test]
    fn least_squares_recovers_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| -2.0 * x + 0.5).collect();
        let (m, b, r2) = least_squares(&xs, &ys);
        assert!((m + 2.0).abs() < 1e-14 && (b - 0.5).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn decay_fit_small_box_is_rejected() {
        let p = WeinsteinParams::new(0.5, 1).unwrap();
        let mut cfg = DecayFitConfig::auto(1.0, 1.0, 30.0, f64::INFINITY);
        cfg.half_width = 20.0;
        cfg.radial_extent = 20.0;
        cfg.axial_n = 64;
        cfg.radial_n = 64;
        assert!(matches!(decay_fit(&p, &cfg), Err(Error::GridTooSmall(_))));
    }
}
