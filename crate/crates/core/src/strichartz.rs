//! σ-admissible exponent pairs, mixed space-time norms and empirical
//! Strichartz quotients.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::Num;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{lp_norm, GridSpec, WeinsteinParams};
use crate::propagator::{duhamel_cumulative, PropagatorPlan};
use crate::quadrature::{cumulative_weights, simpson_weights};
use crate::scalar::Real;
use crate::separable::{SeparableData, SeparableEvolver};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Admissibility {
    Sharp,
    Nonsharp,
    Inadmissible,
}

/// An exponent pair with its classification for the `σ` it was built with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissiblePair<T> {
    pub q: T,
    pub r: T,
    pub class: Admissibility,
}

impl<T: Real> AdmissiblePair<T> {
    pub fn is_admissible(&self) -> bool {
        self.class != Admissibility::Inadmissible
    }
}

/// Exact classification from reciprocals `1/q`, `1/r` (zero for an infinite
/// exponent). Works for any exact number type, e.g. `Ratio<i64>`.
pub fn classify_reciprocals<N>(sigma: N, inv_q: N, inv_r: N) -> Admissibility
where
    N: Num + PartialOrd + Clone,
{
    let two = N::one() + N::one();
    let half = N::one() / two.clone();
    let zero = N::zero();
    let in_range = |v: &N| *v >= zero && *v <= half;
    if !in_range(&inv_q) || !in_range(&inv_r) {
        return Admissibility::Inadmissible;
    }
    if inv_q == half && inv_r == zero && sigma == N::one() {
        return Admissibility::Inadmissible;
    }
    let lhs = inv_q + sigma.clone() * inv_r;
    let rhs = sigma / two;
    if lhs == rhs {
        Admissibility::Sharp
    } else if lhs < rhs {
        Admissibility::Nonsharp
    } else {
        Admissibility::Inadmissible
    }
}

/// Floating-point classification; equalities are decided with a relative
/// tolerance of `64 ε`.
pub fn classify<T: Real>(params: &WeinsteinParams<T>, q: T, r: T) -> AdmissiblePair<T> {
    let class = classify_sigma(params.sigma(), q, r);
    AdmissiblePair { q, r, class }
}

pub fn classify_sigma<T: Real>(sigma: T, q: T, r: T) -> Admissibility {
    if !(q > T::zero()) || !(r > T::zero()) {
        return Admissibility::Inadmissible;
    }
    let tol = T::lit(64.0) * T::epsilon() * sigma.max(T::one());
    let half = T::lit(0.5);
    let (iq, ir) = (q.recip(), r.recip());
    if iq > half + tol || ir > half + tol {
        return Admissibility::Inadmissible;
    }
    if (iq - half).abs() <= tol && ir <= tol && (sigma - T::one()).abs() <= tol {
        return Admissibility::Inadmissible;
    }
    let gap = iq + sigma * ir - sigma * half;
    if gap.abs() <= tol {
        Admissibility::Sharp
    } else if gap < T::zero() {
        Admissibility::Nonsharp
    } else {
        Admissibility::Inadmissible
    }
}

/// Hölder conjugate `p′`.
pub fn conjugate<T: Real>(p: T) -> Result<T> {
    if !(p >= T::one()) {
        return Err(Error::Domain(format!("conjugate exponent needs p >= 1, got {p}")));
    }
    if p == T::one() {
        Ok(T::infinity())
    } else if p.is_infinite() {
        Ok(T::one())
    } else {
        Ok(p / (p - T::one()))
    }
}

/// Mass-critical power `4/(d+2α+2) = 2/σ`.
pub fn critical_power<T: Real>(params: &WeinsteinParams<T>) -> T {
    T::lit(2.0) / params.sigma()
}

/// `r` on the sharp line for a given `q`: `r = 2σq/(σq − 2)`; requires `σq > 2`.
pub fn sharp_r<T: Real>(sigma: T, q: T) -> Result<T> {
    if q.is_infinite() {
        return Ok(T::lit(2.0));
    }
    let den = sigma * q - T::lit(2.0);
    if !(den > T::zero()) {
        return Err(Error::Domain(format!("no sharp r for q = {q} at sigma = {sigma}")));
    }
    Ok(T::lit(2.0) * sigma * q / den)
}

/// The endpoint `(2, 2σ/(σ−1))`, which exists when `σ > 1`.
pub fn endpoint<T: Real>(params: &WeinsteinParams<T>) -> Option<(T, T)> {
    let s = params.sigma();
    (s > T::one()).then(|| (T::lit(2.0), T::lit(2.0) * s / (s - T::one())))
}

/// `r₁` with `1/q₁ + 1/r₁ = 2σ(1/2 − 1/r)`.
pub fn hls_partner<T: Real>(sigma: T, r: T, q1: T) -> Result<T> {
    let inv = T::lit(2.0) * sigma * (T::lit(0.5) - r.recip()) - q1.recip();
    if !(inv > T::zero()) {
        return Err(Error::Domain(format!("no HLS partner for r = {r}, q1 = {q1}")));
    }
    Ok(inv.recip())
}

/// Exponents and time window of `L^q([a, b]; L^r_α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixedNormSpec<T> {
    pub q: T,
    pub r: T,
    pub a: T,
    pub b: T,
}

impl<T: Real> MixedNormSpec<T> {
    pub fn new(q: T, r: T, a: T, b: T) -> Result<Self> {
        if !(q >= T::one()) || !(r >= T::one()) {
            return Err(Error::Domain(format!("mixed norm exponents must be >= 1, got q = {q}, r = {r}")));
        }
        if !(a < b) {
            return Err(Error::Domain(format!("mixed norm interval must have a < b, got [{a}, {b}]")));
        }
        Ok(Self { q, r, a, b })
    }
}

/// `(∫ v(t)^q dt)^{1/q}` from uniform samples (Simpson), or the maximum for
/// `q = ∞`.
pub fn time_norm<T: Real>(values: &[T], dt: T, q: T) -> Result<T> {
    if q.is_infinite() {
        return Ok(values.iter().copied().fold(T::zero(), T::max));
    }
    let w = simpson_weights(values.len(), dt)?;
    let s: T = values.iter().zip(&w).map(|(&v, &w)| w * v.powf(q)).sum();
    Ok(s.powf(q.recip()))
}

/// `(∫_0^{t_j} v^q dt)^{1/q}` for every prefix `j` (running maximum for
/// `q = ∞`). Fewer than three samples fall back to the trapezoid rule.
pub fn running_time_norm<T: Real>(values: &[T], dt: T, q: T) -> Result<Vec<T>> {
    if q.is_infinite() {
        let mut m = T::zero();
        return Ok(values
            .iter()
            .map(|&v| {
                m = m.max(v);
                m
            })
            .collect());
    }
    let inv = q.recip();
    let powered: Vec<T> = values.iter().map(|&v| v.powf(q)).collect();
    if values.len() < 3 {
        let mut acc = T::zero();
        let mut out = vec![T::zero()];
        for w in powered.windows(2) {
            acc = acc + (w[0] + w[1]) * dt / T::lit(2.0);
            out.push(acc.powf(inv));
        }
        out.truncate(values.len());
        return Ok(out);
    }
    Ok(cumulative_weights(values.len(), dt)?
        .iter()
        .map(|row| {
            let s: T = row.iter().zip(&powered).map(|(&w, &v)| w * v).sum();
            s.max(T::zero()).powf(inv)
        })
        .collect())
}

/// `‖u‖_{L^q([a,b]; L^r_α)}` over a uniformly sampled trajectory whose sample
/// times include `a` and `b`.
pub fn mixed_norm<T: Real>(traj: &Trajectory<T>, spec: &MixedNormSpec<T>) -> Result<T> {
    let dt = traj
        .uniform_step()
        .ok_or_else(|| Error::Usage("mixed_norm needs a uniformly sampled trajectory".into()))?;
    let (i0, i1) = window(traj, dt, spec.a, spec.b)?;
    let norms: Vec<T> = traj.states()[i0..=i1]
        .iter()
        .map(|u| lp_norm(u, spec.r))
        .collect::<Result<_>>()?;
    time_norm(&norms, dt, spec.q)
}

fn window<T: Real>(traj: &Trajectory<T>, dt: T, a: T, b: T) -> Result<(usize, usize)> {
    let end = traj.end_time();
    let tol = T::lit(1e-9) * dt;
    if a < -tol || b > end + tol {
        return Err(Error::Usage(format!(
            "interval [{a}, {b}] exceeds the trajectory span [0, {end}]"
        )));
    }
    let snap = |t: T| -> Result<usize> {
        let k = (t / dt).round();
        if (k * dt - t).abs() > tol * T::lit(16.0) {
            return Err(Error::Usage(format!("interval endpoint {t} is not a sample time")));
        }
        Ok(k.to_usize().unwrap_or(0))
    };
    Ok((snap(a)?, snap(b)?))
}

/// Initial data family for quotient ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DataFamily {
    /// `e^{−s|x|²}`, normalized; the ensemble has a single member.
    Gaussian { s: f64 },
    /// Products of random Gaussian packets in each axial variable and random
    /// radial Gaussian mixtures. Widths are drawn from `[s_min, s_max]`.
    RandomPackets { s_min: f64, s_max: f64 },
}

/// Settings for [`strichartz_quotient`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientConfig {
    /// `(q, r)` pairs; all must be admissible.
    pub pairs: Vec<(f64, f64)>,
    pub ensemble_size: usize,
    /// Half-window `T`; the doubled window `[−2T, 2T]` is also evaluated.
    pub horizon: f64,
    /// Largest acceptable time step.
    pub dt: f64,
    pub grid: GridSpec,
    pub family: DataFamily,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemberQuotient {
    pub index: usize,
    pub quotient: f64,
    pub quotient_2t: f64,
}

/// Ensemble statistics of `‖I_α(·)g‖_{L^q([−T,T]; L^r_α)} / ‖g‖_{α,2}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientStats {
    pub q: f64,
    pub r: f64,
    pub sigma: f64,
    pub ensemble_size: usize,
    pub horizon: f64,
    pub max: f64,
    pub mean: f64,
    pub max_2t: f64,
    pub mean_2t: f64,
    pub members: Vec<MemberQuotient>,
}

/// Deterministic per-member generator derived from `(seed, index)`.
pub fn member_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn random_coeff(rng: &mut ChaCha8Rng) -> Complex<f64> {
    Complex::from_polar(rng.gen_range(0.5..1.0), rng.gen_range(0.0..std::f64::consts::TAU))
}

fn member_data(sep: &SeparableEvolver, family: DataFamily, rng: &mut ChaCha8Rng) -> SeparableData {
    let d = sep.params().d();
    match family {
        DataFamily::Gaussian { s } => {
            let g = move |x: f64| Complex::new((-s * x * x).exp(), 0.0);
            sep.sample(&vec![g; d], g)
        }
        DataFamily::RandomPackets { s_min, s_max } => {
            let mut packets = Vec::with_capacity(d);
            for _ in 0..d {
                let terms: Vec<(Complex<f64>, f64, f64, f64)> = (0..2)
                    .map(|_| {
                        (
                            random_coeff(rng),
                            rng.gen_range(s_min..=s_max),
                            rng.gen_range(-2.0..2.0),
                            rng.gen_range(-1.0..1.0),
                        )
                    })
                    .collect();
                packets.push(move |x: f64| {
                    terms
                        .iter()
                        .map(|&(c, s, x0, k)| c * Complex::from_polar((-s * (x - x0).powi(2)).exp(), k * x))
                        .sum()
                });
            }
            let radial: Vec<(Complex<f64>, f64)> = (0..2)
                .map(|_| (random_coeff(rng), rng.gen_range(s_min..=s_max)))
                .collect();
            sep.sample(&packets, |r: f64| {
                radial.iter().map(|&(c, s)| c * (-s * r * r).exp()).sum()
            })
        }
    }
}

/// Empirical Strichartz quotients over an ensemble of separable data evolved
/// on `[−2T, 2T]`; both the `T` and `2T` windows are reported per pair.
pub fn strichartz_quotient(params: &WeinsteinParams<f64>, cfg: &QuotientConfig) -> Result<Vec<QuotientStats>> {
    let sigma = params.sigma();
    for &(q, r) in &cfg.pairs {
        if classify_sigma(sigma, q, r) == Admissibility::Inadmissible {
            return Err(Error::Usage(format!(
                "pair (q = {q}, r = {r}) is not admissible for sigma = {sigma}"
            )));
        }
    }
    if cfg.ensemble_size == 0 || !(cfg.horizon > 0.0) || !(cfg.dt > 0.0) {
        return Err(Error::Config("quotient ensemble needs size >= 1, T > 0 and dt > 0".into()));
    }
    let members = match cfg.family {
        DataFamily::Gaussian { .. } => 1,
        DataFamily::RandomPackets { .. } => cfg.ensemble_size,
    };
    let sep = SeparableEvolver::new(*params, &cfg.grid)?;
    // m steps per T, even, so both windows are Simpson-exact in parity
    let mut m = (cfg.horizon / cfg.dt).ceil() as usize;
    m += m % 2;
    let h = cfg.horizon / m as f64;
    let times: Vec<f64> = (0..=4 * m).map(|k| (k as f64 - 2.0 * m as f64) * h).collect();
    // distinct spatial exponents
    let mut rs: BTreeMap<u64, f64> = BTreeMap::new();
    for &(_, r) in &cfg.pairs {
        rs.insert(r.to_bits(), r);
    }
    let mut ps: Vec<f64> = rs.values().copied().collect();
    ps.push(2.0);
    let results: Vec<Vec<(f64, f64)>> = (0..members)
        .into_par_iter()
        .map(|index| {
            let mut rng = member_rng(cfg.seed, index);
            let spectra = sep.spectra(&member_data(&sep, cfg.family, &mut rng))?;
            let mass = sep.norms_at(&spectra, 0.0, &[2.0])?[0];
            let norms: Vec<Vec<f64>> = times
                .iter()
                .map(|&t| sep.norms_at(&spectra, t, &ps))
                .collect::<Result<_>>()?;
            cfg.pairs
                .iter()
                .map(|&(q, r)| {
                    let col = ps.iter().position(|&p| p == r).expect("collected above");
                    let series: Vec<f64> = norms.iter().map(|row| row[col] / mass).collect();
                    let inner = time_norm(&series[m..=3 * m], h, q)?;
                    let outer = time_norm(&series, h, q)?;
                    Ok((inner, outer))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(cfg
        .pairs
        .iter()
        .enumerate()
        .map(|(pi, &(q, r))| {
            let members: Vec<MemberQuotient> = results
                .iter()
                .enumerate()
                .map(|(index, row)| MemberQuotient {
                    index,
                    quotient: row[pi].0,
                    quotient_2t: row[pi].1,
                })
                .collect();
            let n = members.len() as f64;
            QuotientStats {
                q,
                r,
                sigma,
                ensemble_size: members.len(),
                horizon: cfg.horizon,
                max: members.iter().map(|m| m.quotient).fold(0.0, f64::max),
                mean: members.iter().map(|m| m.quotient).sum::<f64>() / n,
                max_2t: members.iter().map(|m| m.quotient_2t).fold(0.0, f64::max),
                mean_2t: members.iter().map(|m| m.quotient_2t).sum::<f64>() / n,
                members,
            }
        })
        .collect())
}

/// Closed-form quotient for a Gaussian `e^{−s|x|²}` and a sharp pair with
/// finite `q`: `‖I(t)g‖_r^q = (2rs)^{−qσ/r} (1+16s²t²)^{−1} ‖g‖_2^q`.
pub fn gaussian_sharp_quotient(sigma: f64, s: f64, q: f64, r: f64, horizon: f64) -> f64 {
    let integral = (2.0 * r * s).powf(-q * sigma / r) * (4.0 * s * horizon).atan() / (2.0 * s);
    integral.powf(1.0 / q) * (4.0 * s).powf(sigma / 2.0)
}

/// Norms `‖u_k‖_{α,r}` of a uniformly sampled sequence, integrated in time.
fn sequence_norm(states: &[Field<f64>], dt: f64, q: f64, r: f64) -> Result<f64> {
    let norms: Vec<f64> = states.iter().map(|u| lp_norm(u, r)).collect::<Result<_>>()?;
    time_norm(&norms, dt, q)
}

/// `(‖u‖_{L^q L^r} + sup_t ‖u(t)‖_2) / (‖g‖_2 + ‖F‖_{L^{q₁′} L^{r₁′}})` for
/// `u = I(t)g + Φ_α(F)(t)` on `[0, (n−1)dt]`.
pub fn inhomogeneous_quotient(
    plan: &PropagatorPlan<f64>,
    g: &Field<f64>,
    forcing: &[Field<f64>],
    dt: f64,
    pair: (f64, f64),
    dual: (f64, f64),
) -> Result<f64> {
    let phi = duhamel_cumulative(plan, forcing, dt)?;
    let u: Vec<Field<f64>> = phi
        .iter()
        .enumerate()
        .map(|(k, p)| plan.evolve(g, k as f64 * dt)?.add(p))
        .collect::<Result<_>>()?;
    let lhs = sequence_norm(&u, dt, pair.0, pair.1)? + sequence_norm(&u, dt, f64::INFINITY, 2.0)?;
    let rhs = lp_norm(g, 2.0)? + sequence_norm(forcing, dt, conjugate(dual.0)?, conjugate(dual.1)?)?;
    Ok(lhs / rhs)
}

/// `‖Φ_α(F)‖_{L^{q₁} L^r} / ‖F‖_{L^{r₁′} L^{r′}}` on `[0, (n−1)dt]`.
pub fn hls_quotient(plan: &PropagatorPlan<f64>, forcing: &[Field<f64>], dt: f64, q1: f64, r: f64, r1: f64) -> Result<f64> {
    let phi = duhamel_cumulative(plan, forcing, dt)?;
    Ok(sequence_norm(&phi, dt, q1, r)? / sequence_norm(forcing, dt, conjugate(r1)?, conjugate(r)?)?)
}
