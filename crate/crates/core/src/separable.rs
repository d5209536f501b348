//! Free evolution of tensor-product data `g(x) = Π_j a_j(x_j) · b(x_{d+1})`.
//!
//! The symbol `|λ|²` is a sum over coordinates, so `I_α(t)` factors into 1-D
//! axial Schrödinger groups and the radial (`d = 0`) group of order `α`, and
//! every `L^p_α` norm is the product of the factor norms. This allows boxes
//! large enough for long horizons.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{lp_norm, AxialGrid, Grid, GridSpec, WeinsteinParams};
use crate::propagator::PropagatorPlan;
use crate::transform::{forward, inverse};

/// Edge-to-peak ratio above which a factor is declared unresolved.
pub const EDGE_LIMIT: f64 = 1e-6;

/// Samples of the factors: `d` axial lines and one radial profile.
#[derive(Debug, Clone)]
pub struct SeparableData {
    pub axial: Vec<Vec<Complex<f64>>>,
    pub radial: Vec<Complex<f64>>,
}

/// Factor spectra of a [`SeparableData`].
#[derive(Debug, Clone)]
pub struct SeparableSpectra {
    axial: Vec<Vec<Complex<f64>>>,
    radial: Field<f64>,
}

#[derive(Debug)]
pub struct SeparableEvolver {
    params: WeinsteinParams<f64>,
    axial: Option<AxialGrid<f64>>,
    radial: Arc<Grid<f64>>,
    plan: PropagatorPlan<f64>,
}

impl SeparableEvolver {
    pub fn new(params: WeinsteinParams<f64>, spec: &GridSpec) -> Result<Self> {
        let axial = if params.d() > 0 {
            Some(AxialGrid::new(spec.axial_n, spec.half_width)?)
        } else {
            None
        };
        let radial = Grid::build(WeinsteinParams::new(params.alpha(), 0)?, 1, 1.0, spec.radial_n, spec.radial_extent)?;
        let plan = PropagatorPlan::new(&radial);
        Ok(Self {
            params,
            axial,
            radial,
            plan,
        })
    }

    pub fn params(&self) -> &WeinsteinParams<f64> {
        &self.params
    }

    /// Axial nodes (empty when `d = 0`).
    pub fn axial_nodes(&self) -> Vec<f64> {
        match &self.axial {
            Some(a) => (0..a.n()).map(|j| a.node(j)).collect(),
            None => Vec::new(),
        }
    }

    pub fn radial_nodes(&self) -> &[f64] {
        self.radial.radial().nodes()
    }

    /// Samples closed-form factors on the nodes.
    pub fn sample<A, B>(&self, axial: &[A], radial: B) -> SeparableData
    where
        A: Fn(f64) -> Complex<f64>,
        B: Fn(f64) -> Complex<f64>,
    {
        let nodes = self.axial_nodes();
        SeparableData {
            axial: axial.iter().map(|f| nodes.iter().map(|&x| f(x)).collect()).collect(),
            radial: self.radial_nodes().iter().map(|&r| radial(r)).collect(),
        }
    }

    pub fn spectra(&self, data: &SeparableData) -> Result<SeparableSpectra> {
        if data.axial.len() != self.params.d() {
            return Err(Error::Usage(format!(
                "separable data has {} axial factors, expected {}",
                data.axial.len(),
                self.params.d()
            )));
        }
        let mut axial = data.axial.clone();
        if let Some(grid) = &self.axial {
            for line in axial.iter_mut() {
                if line.len() != grid.n() {
                    return Err(Error::Usage("axial factor length does not match the grid".into()));
                }
                grid.forward_line(line);
            }
        }
        let radial = forward(&Field::from_values(&self.radial, data.radial.clone(), crate::field::Space::Physical)?)?;
        Ok(SeparableSpectra { axial, radial })
    }

    /// `‖I_α(t) g‖_{α,p}` for each `p` in `ps`. Fails with
    /// [`Error::GridTooSmall`] if any factor reaches the box edge.
    pub fn norms_at(&self, spectra: &SeparableSpectra, t: f64, ps: &[f64]) -> Result<Vec<f64>> {
        let mut norms = vec![1.0; ps.len()];
        if let Some(grid) = &self.axial {
            let w = grid.spacing() / std::f64::consts::TAU.sqrt();
            for spec in &spectra.axial {
                let mut line: Vec<Complex<f64>> = spec
                    .iter()
                    .zip(grid.freqs())
                    .map(|(&v, &k)| v * Complex::from_polar(1.0, -t * k * k))
                    .collect();
                grid.inverse_line(&mut line);
                let mags: Vec<f64> = line.iter().map(|v| v.norm()).collect();
                check_edge(mags[0].max(mags[mags.len() - 1]), &mags, t)?;
                for (n, &p) in norms.iter_mut().zip(ps) {
                    *n *= if p.is_infinite() {
                        mags.iter().copied().fold(0.0, f64::max)
                    } else {
                        mags.iter().map(|m| w * m.powf(p)).sum::<f64>().powf(1.0 / p)
                    };
                }
            }
        }
        let mut spec = spectra.radial.clone();
        self.plan.apply_multiplier(&mut spec, t)?;
        let u = inverse(&spec)?;
        let mags: Vec<f64> = u.values().iter().map(|v| v.norm()).collect();
        check_edge(*mags.last().unwrap_or(&0.0), &mags, t)?;
        for (n, &p) in norms.iter_mut().zip(ps) {
            *n *= lp_norm(&u, p)?;
        }
        Ok(norms)
    }
}

fn check_edge(edge: f64, mags: &[f64], t: f64) -> Result<()> {
    let sup = mags.iter().copied().fold(0.0, f64::max);
    if edge > EDGE_LIMIT * sup {
        return Err(Error::GridTooSmall(format!(
            "at t = {t} the evolved field reaches {:.3e} of its peak at the box edge (limit {EDGE_LIMIT:e}); enlarge the box",
            edge / sup
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::free_evolve;
    use crate::field::Space;

    #[test]
    fn matches_full_grid_evolution() {
        let p = WeinsteinParams::new(0.5, 1).unwrap();
        let spec = GridSpec {
            axial_n: 128,
            half_width: 16.0,
            radial_n: 96,
            radial_extent: 20.0,
        };
        let sep = SeparableEvolver::new(p, &spec).unwrap();
        let a = |x: f64| Complex::from_polar((-0.8 * (x - 0.5) * (x - 0.5)).exp(), 0.7 * x);
        let b = |r: f64| Complex::new((-0.6 * r * r).exp() + 0.3 * (-1.5 * r * r).exp(), 0.0);
        let data = sep.sample(&[a], b);
        let sp = sep.spectra(&data).unwrap();
        let grid = Grid::from_spec(p, &spec).unwrap();
        let g = Field::from_fn(&grid, |x| a(x[0]) * b(x[1]));
        let t = 0.7;
        let u = free_evolve(&g, t).unwrap();
        let ps = [2.0, 3.0, 8.0 / 3.0, f64::INFINITY];
        let got = sep.norms_at(&sp, t, &ps).unwrap();
        for (k, &pp) in ps.iter().enumerate() {
            let want = lp_norm(&u, pp).unwrap();
            assert!((got[k] - want).abs() <= 1e-10 * want, "p={pp}: {} vs {want}", got[k]);
        }
        assert_eq!(u.space(), Space::Physical);
    }
}
