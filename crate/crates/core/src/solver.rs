//! The Cauchy problem `∂_t u − iΔ_W u = F(u)`, `u(0) = g`, with
//! `F(u) = −iμ|u|^p u`.
//!
//! Production runs use Strang splitting (exact nonlinear flow, exact linear
//! flow). [`picard_solve`] iterates the Duhamel map
//! `𝓗(u)(t) = I_α(t)g + ∫_0^t I_α(t−s)F(u(s)) ds` literally in the space
//! `X = L^∞L² ∩ L^q L^{p+2}`.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Space};
use crate::grid::{lp_norm, WeinsteinParams};
use crate::propagator::{duhamel_cumulative, PropagatorPlan};
use crate::scalar::Real;
use crate::strichartz::{running_time_norm, time_norm, AdmissiblePair};
use crate::trajectory::{StepDiagnostics, Trajectory};

/// Default sup-norm ceiling for [`evolve`].
pub const DEFAULT_SUP_LIMIT: f64 = 1e6;

/// `F(u) = −iμ|u|^p u` with a Lipschitz constant for
/// `|F(u) − F(v)| ≤ C(|u|^p + |v|^p)|u − v|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec<T> {
    pub p: T,
    pub mu: Complex<T>,
    pub lipschitz_c: T,
}

impl<T: Real> NonlinearitySpec<T> {
    /// Uses `C = |μ| max(1, (p+1)/2)`.
    pub fn new(p: T, mu: Complex<T>) -> Result<Self> {
        if !(p > T::zero()) || !p.is_finite() {
            return Err(Error::Config(format!("nonlinearity power must be positive, got p = {p}")));
        }
        if !mu.re.is_finite() || !mu.im.is_finite() {
            return Err(Error::Config("coupling mu must be finite".into()));
        }
        Ok(Self {
            p,
            mu,
            lipschitz_c: default_lipschitz(p) * mu.norm(),
        })
    }

    /// Real coupling; `μ > 0` is defocusing.
    pub fn real(p: T, mu: T) -> Result<Self> {
        Self::new(p, Complex::new(mu, T::zero()))
    }

    pub fn with_lipschitz(mut self, c: T) -> Self {
        self.lipschitz_c = c;
        self
    }

    /// Mass is conserved iff `μ` is real.
    pub fn conserves_mass(&self) -> bool {
        self.mu.im == T::zero()
    }

    #[inline]
    pub fn eval(&self, u: Complex<T>) -> Complex<T> {
        let m = u.norm();
        if m == T::zero() {
            return u;
        }
        Complex::new(T::zero(), -T::one()) * self.mu * u * m.powf(self.p)
    }

    /// Exact flow of `u′ = F(u)` over time `tau`:
    /// `|u|(τ) = |u₀|(1 − pbρ₀^p τ)^{−1/p}` with `b = Im μ`, and phase
    /// `−Re μ ∫ρ^p`.
    pub fn flow(&self, u: Complex<T>, tau: T) -> Option<Complex<T>> {
        let rho = u.norm();
        if rho == T::zero() || tau == T::zero() {
            return Some(u);
        }
        let rp = rho.powf(self.p);
        let b = self.mu.im;
        let (scale, integral) = if b == T::zero() {
            (T::one(), rp * tau)
        } else {
            let z = -self.p * b * rp * tau;
            if !(z > -T::one()) {
                return None;
            }
            let log = z.ln_1p();
            ((-log / self.p).exp(), -log / (self.p * b))
        };
        Some(u * Complex::from_polar(scale, -self.mu.re * integral))
    }
}

/// `max(1, (p+1)/2)`: the smallest constant valid for all complex pairs.
pub fn default_lipschitz<T: Real>(p: T) -> T {
    T::one().max((p + T::one()) / T::lit(2.0))
}

/// Largest `|F(u) − F(v)| / ((|u|^p + |v|^p)|u − v|)` over random complex
/// pairs for `μ = 1`.
pub fn lipschitz_sweep(p: f64, samples: usize, seed: u64) -> f64 {
    let spec = NonlinearitySpec::real(p, 1.0).expect("p > 0");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let u = Complex::from_polar(10f64.powf(rng.gen_range(-3.0..3.0)), rng.gen_range(0.0..std::f64::consts::TAU));
        let v = if rng.gen_bool(0.5) {
            // nearby pairs probe the derivative
            u * Complex::from_polar(1.0 + rng.gen_range(-1e-3..1e-3), rng.gen_range(-1e-3..1e-3))
        } else {
            Complex::from_polar(10f64.powf(rng.gen_range(-3.0..3.0)), rng.gen_range(0.0..std::f64::consts::TAU))
        };
        let den = (u.norm().powf(p) + v.norm().powf(p)) * (u - v).norm();
        if den > 0.0 {
            worst = worst.max((spec.eval(u) - spec.eval(v)).norm() / den);
        }
    }
    worst
}

/// Pointwise `F(u)`.
pub fn nonlinearity_apply<T: Real>(spec: &NonlinearitySpec<T>, u: &Field<T>) -> Result<Field<T>> {
    u.expect_space(Space::Physical, "nonlinearity_apply")?;
    Ok(u.map(|v| spec.eval(v)))
}

/// Exact nonlinear substep over time `tau`.
pub fn nonlinear_flow<T: Real>(spec: &NonlinearitySpec<T>, u: &Field<T>, tau: T) -> Result<Field<T>> {
    u.expect_space(Space::Physical, "nonlinear_flow")?;
    let mut out = Vec::with_capacity(u.values().len());
    for &v in u.values() {
        match spec.flow(v, tau) {
            Some(w) => out.push(w),
            None => {
                return Err(Error::BlowUp {
                    time: tau.as_f64(),
                    sup: f64::INFINITY,
                    limit: DEFAULT_SUP_LIMIT,
                })
            }
        }
    }
    Field::from_values(u.grid(), out, Space::Physical)
}

/// Half nonlinear step, full linear step, half nonlinear step.
pub fn strang_step<T: Real>(plan: &PropagatorPlan<T>, spec: &NonlinearitySpec<T>, u: &Field<T>, dt: T) -> Result<Field<T>> {
    let half = dt / T::lit(2.0);
    let a = nonlinear_flow(spec, u, half)?;
    let b = plan.evolve(&a, dt)?;
    nonlinear_flow(spec, &b, half)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverMode {
    Splitting,
    Picard,
}

/// Time-stepping and fixed-point settings. The grid is carried by the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig<T> {
    pub nonlinearity: NonlinearitySpec<T>,
    pub horizon: T,
    pub dt: T,
    pub mode: SolverMode,
    /// Store every `record_every`-th splitting step.
    pub record_every: usize,
    /// Time samples of a Picard trajectory, including both ends.
    pub picard_samples: usize,
    pub picard_max_iter: usize,
    pub picard_tol: T,
    /// Radius `M` of the ball in `X`; `None` uses `M = 2C‖g‖₂`.
    pub ball_radius: Option<T>,
    /// Strichartz constant; the existence argument uses
    /// `C = strichartz_constant · lipschitz_c`.
    pub strichartz_constant: T,
    /// `(q, r)` for the accumulated mixed norm; `None` uses the `X` pair.
    pub pair: Option<(T, T)>,
    pub sup_limit: T,
    pub seed: u64,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(nonlinearity: NonlinearitySpec<T>, horizon: T, dt: T) -> Self {
        Self {
            nonlinearity,
            horizon,
            dt,
            mode: SolverMode::Splitting,
            record_every: 1,
            picard_samples: 129,
            picard_max_iter: 50,
            picard_tol: T::lit(1e-12),
            ball_radius: None,
            strichartz_constant: T::one(),
            pair: None,
            sup_limit: T::lit(DEFAULT_SUP_LIMIT),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !(self.horizon > T::zero()) || !(self.picard_tol > T::zero()) {
            return Err(Error::Config(format!(
                "solver needs dt > 0, T > 0 and picard_tol > 0 (dt = {}, T = {}, tol = {})",
                self.dt, self.horizon, self.picard_tol
            )));
        }
        if self.record_every == 0 || self.picard_samples < 3 || self.picard_max_iter == 0 {
            return Err(Error::Config(
                "record_every, picard_max_iter must be >= 1 and picard_samples >= 3".into(),
            ));
        }
        Ok(())
    }

    /// Existence constant `C = strichartz_constant · lipschitz_c`.
    pub fn existence_constant(&self) -> T {
        self.strichartz_constant * self.nonlinearity.lipschitz_c
    }
}

/// The sharp pair `(q, p+2)` with `q = 2(p+2)/(σp)` that defines `X`.
pub fn x_pair<T: Real>(params: &WeinsteinParams<T>, p: T) -> (T, T) {
    let r = p + T::lit(2.0);
    (T::lit(2.0) * r / (params.sigma() * p), r)
}

fn diagnostics_for<T: Real>(times: &[T], states: &[Field<T>], dt: T, pair: (T, T)) -> Result<Vec<StepDiagnostics>> {
    let lr: Vec<T> = states.iter().map(|u| lp_norm(u, pair.1)).collect::<Result<_>>()?;
    let accum = running_time_norm(&lr, dt, pair.0)?;
    times
        .iter()
        .zip(states)
        .zip(accum)
        .map(|((&t, u), acc)| {
            Ok(StepDiagnostics {
                t: t.as_f64(),
                mass: lp_norm(u, T::lit(2.0))?.as_f64(),
                sup_norm: u.sup().as_f64(),
                lqlr_accum: acc.as_f64(),
                contraction_ratio: None,
            })
        })
        .collect()
}

/// Strang-stepped trajectory on `[0, T]` with `n = round(T/dt)` steps of
/// `T/n`. Aborts with [`Error::BlowUp`] when `‖u‖_∞` exceeds the limit.
pub fn evolve<T: Real>(g: &Field<T>, cfg: &SolverConfig<T>) -> Result<Trajectory<T>> {
    cfg.validate()?;
    g.expect_space(Space::Physical, "evolve")?;
    let steps = (cfg.horizon / cfg.dt).round().to_usize().unwrap_or(0).max(1);
    let h = cfg.horizon / T::from_count(steps);
    let plan = PropagatorPlan::new(g.grid());
    let mut u = g.clone();
    let mut states = vec![g.clone()];
    let mut times = vec![T::zero()];
    for k in 1..=steps {
        u = strang_step(&plan, &cfg.nonlinearity, &u, h).map_err(|e| match e {
            Error::BlowUp { sup, limit, .. } => Error::BlowUp {
                time: (T::from_count(k) * h).as_f64(),
                sup,
                limit,
            },
            other => other,
        })?;
        let sup = u.sup();
        if !(sup <= cfg.sup_limit) {
            return Err(Error::BlowUp {
                time: (T::from_count(k) * h).as_f64(),
                sup: sup.as_f64(),
                limit: cfg.sup_limit.as_f64(),
            });
        }
        if k % cfg.record_every == 0 || k == steps {
            states.push(u.clone());
            times.push(T::from_count(k) * h);
        }
    }
    let pair = cfg.pair.unwrap_or_else(|| x_pair(g.grid().params(), cfg.nonlinearity.p));
    let rec_dt = h * T::from_count(cfg.record_every);
    let uniform = steps % cfg.record_every == 0;
    let diag = diagnostics_for(&times, &states, if uniform { rec_dt } else { h }, pair)?;
    let mut traj = Trajectory::new(times, states)?;
    traj.set_diagnostics(diag);
    Ok(traj)
}

/// Per-iteration record of a Picard solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub iterations: usize,
    pub converged: bool,
    /// `d(u^{(n+1)}, u^{(n)})` in `X`.
    pub distances: Vec<f64>,
    /// `distances[n] / distances[n−1]`.
    pub ratios: Vec<f64>,
    /// `‖u^{(n)}‖_X` for every iterate, starting with `u^{(0)}`.
    pub ball_norms: Vec<f64>,
    pub ball_radius: f64,
    pub stayed_in_ball: bool,
    pub constant: f64,
    pub horizon: f64,
    /// `(1/(2CM^p))^{q/(q−p−2)}`; absent when `q ≤ p+2`.
    pub time_bound: Option<f64>,
    pub within_bound: bool,
    pub q: f64,
    pub r: f64,
}

impl ContractionReport {
    /// Largest `|ratios[k+1]/ratios[k] − 1|` over `k ≥ skip`, ignoring
    /// ratios whose distances sit below `floor`.
    pub fn geometric_variation(&self, skip: usize, floor: f64) -> Option<f64> {
        let usable: Vec<f64> = self
            .ratios
            .iter()
            .enumerate()
            .filter(|(k, _)| self.distances[k + 1] > floor)
            .map(|(_, &r)| r)
            .collect();
        if usable.len() < skip + 2 {
            return None;
        }
        Some(
            usable[skip..]
                .windows(2)
                .map(|w| (w[1] / w[0] - 1.0).abs())
                .fold(0.0, f64::max),
        )
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct PicardOutcome<T: Real> {
    pub trajectory: Trajectory<T>,
    pub report: ContractionReport,
}

/// `‖u‖_X = sup_t ‖u(t)‖₂ + ‖u‖_{L^q L^r}` over uniform samples.
pub fn x_norm<T: Real>(states: &[Field<T>], dt: T, pair: (T, T)) -> Result<T> {
    let l2: Vec<T> = states.iter().map(|u| lp_norm(u, T::lit(2.0))).collect::<Result<_>>()?;
    let lr: Vec<T> = states.iter().map(|u| lp_norm(u, pair.1)).collect::<Result<_>>()?;
    Ok(l2.into_iter().fold(T::zero(), T::max) + time_norm(&lr, dt, pair.0)?)
}

fn x_distance<T: Real>(a: &[Field<T>], b: &[Field<T>], dt: T, pair: (T, T)) -> Result<T> {
    let diff: Vec<Field<T>> = a.iter().zip(b).map(|(x, y)| x.sub(y)).collect::<Result<_>>()?;
    x_norm(&diff, dt, pair)
}

struct DuhamelMap<'a, T: Real> {
    plan: PropagatorPlan<T>,
    free: Vec<Field<T>>,
    spec: &'a NonlinearitySpec<T>,
    dt: T,
}

impl<'a, T: Real> DuhamelMap<'a, T> {
    fn new(g: &Field<T>, cfg: &'a SolverConfig<T>) -> Result<Self> {
        let plan = PropagatorPlan::new(g.grid());
        let n = cfg.picard_samples;
        let dt = cfg.horizon / T::from_count(n - 1);
        let free = (0..n)
            .map(|j| plan.evolve(g, T::from_count(j) * dt))
            .collect::<Result<_>>()?;
        Ok(Self {
            plan,
            free,
            spec: &cfg.nonlinearity,
            dt,
        })
    }

    fn apply(&self, u: &[Field<T>]) -> Result<Vec<Field<T>>> {
        let forcing: Vec<Field<T>> = u.iter().map(|v| nonlinearity_apply(self.spec, v)).collect::<Result<_>>()?;
        let phi = duhamel_cumulative(&self.plan, &forcing, self.dt)?;
        self.free.iter().zip(&phi).map(|(a, b)| a.add(b)).collect()
    }
}

/// Picard iteration from `u^{(0)}(t) = I_α(t)g`.
pub fn picard_solve<T: Real>(g: &Field<T>, cfg: &SolverConfig<T>) -> Result<PicardOutcome<T>> {
    picard_solve_from(g, cfg, None)
}

/// Picard iteration from a given starting trajectory (same sample count as
/// `cfg.picard_samples`), or from the free evolution.
pub fn picard_solve_from<T: Real>(g: &Field<T>, cfg: &SolverConfig<T>, start: Option<Vec<Field<T>>>) -> Result<PicardOutcome<T>> {
    cfg.validate()?;
    g.expect_space(Space::Physical, "picard_solve")?;
    let map = DuhamelMap::new(g, cfg)?;
    let pair = x_pair(g.grid().params(), cfg.nonlinearity.p);
    let mut current = match start {
        Some(s) if s.len() == cfg.picard_samples => s,
        Some(s) => {
            return Err(Error::Usage(format!(
                "starting trajectory has {} samples, expected {}",
                s.len(),
                cfg.picard_samples
            )))
        }
        None => map.free.clone(),
    };
    let c = cfg.existence_constant();
    let g_norm = lp_norm(g, T::lit(2.0))?;
    let m = cfg.ball_radius.unwrap_or(T::lit(2.0) * c * g_norm);
    let mut distances = Vec::new();
    let mut ratios = Vec::new();
    let mut ball_norms = vec![x_norm(&current, map.dt, pair)?.as_f64()];
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..cfg.picard_max_iter {
        let next = map.apply(&current)?;
        let dist = x_distance(&next, &current, map.dt, pair)?.as_f64();
        if let Some(&prev) = distances.last() {
            ratios.push(dist / prev);
        }
        distances.push(dist);
        ball_norms.push(x_norm(&next, map.dt, pair)?.as_f64());
        current = next;
        iterations += 1;
        if !dist.is_finite() {
            break;
        }
        if dist < cfg.picard_tol.as_f64() {
            converged = true;
            break;
        }
    }
    let (q, r, p) = (pair.0.as_f64(), pair.1.as_f64(), cfg.nonlinearity.p.as_f64());
    let time_bound = (q > r).then(|| (1.0 / (2.0 * c.as_f64() * m.as_f64().powf(p))).powf(q / (q - r)));
    let horizon = cfg.horizon.as_f64();
    let stayed_in_ball = ball_norms.iter().all(|&b| b <= m.as_f64() * (1.0 + 1e-12));
    let report = ContractionReport {
        iterations,
        converged,
        distances,
        ratios,
        ball_norms,
        ball_radius: m.as_f64(),
        stayed_in_ball,
        constant: c.as_f64(),
        horizon,
        time_bound,
        within_bound: time_bound.is_some_and(|b| horizon <= b),
        q,
        r,
    };
    let times: Vec<T> = (0..current.len()).map(|j| T::from_count(j) * map.dt).collect();
    let mut diag = diagnostics_for(&times, &current, map.dt, cfg.pair.unwrap_or(pair))?;
    let last_ratio = report.ratios.last().copied();
    for d in diag.iter_mut() {
        d.contraction_ratio = last_ratio;
    }
    let mut trajectory = Trajectory::new(times, current)?;
    trajectory.set_diagnostics(diag);
    Ok(PicardOutcome { trajectory, report })
}

/// `‖u − 𝓗(u)‖_X` for a sampled trajectory on the Picard time grid.
pub fn picard_residual<T: Real>(g: &Field<T>, cfg: &SolverConfig<T>, u: &[Field<T>]) -> Result<T> {
    let map = DuhamelMap::new(g, cfg)?;
    let pair = x_pair(g.grid().params(), cfg.nonlinearity.p);
    x_distance(&map.apply(u)?, u, map.dt, pair)
}

/// Largest horizon in `[t_lo, t_hi]` for which the first `checked` Picard
/// ratios stay below `kappa`, located by bisection in `log T` to relative
/// precision `rel_tol`.
pub fn contraction_window<T: Real>(
    g: &Field<T>,
    cfg: &SolverConfig<T>,
    (t_lo, t_hi): (T, T),
    checked: usize,
    kappa: f64,
    rel_tol: T,
) -> Result<T> {
    if checked == 0 || !(kappa > 0.0) || !(t_lo > T::zero()) || !(t_hi > t_lo) {
        return Err(Error::Config("contraction_window needs checked >= 1, kappa > 0 and 0 < t_lo < t_hi".into()));
    }
    let contracts = |t: T| -> Result<bool> {
        let mut c = *cfg;
        c.horizon = t;
        c.picard_max_iter = checked + 1;
        c.picard_tol = T::min_positive_value();
        let out = picard_solve(g, &c)?;
        Ok(out.report.ratios.iter().take(checked).all(|&r| r < kappa))
    };
    if !contracts(t_lo)? {
        return Err(Error::Config(format!("Picard ratios exceed {kappa} already at T = {t_lo}")));
    }
    if contracts(t_hi)? {
        return Err(Error::Config(format!("Picard ratios stay below {kappa} up to T = {t_hi}; widen the search")));
    }
    let (mut lo, mut hi) = (t_lo.ln(), t_hi.ln());
    while hi - lo > rel_tol {
        let mid = (lo + hi) / T::lit(2.0);
        if contracts(mid.exp())? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(((lo + hi) / T::lit(2.0)).exp())
}

/// Blow-up proxies over a stored trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupReport {
    /// `1/(4C²)`.
    pub subcritical_bound: f64,
    /// `(T_end − t)^{(q−p−2)/q} ‖u(t)‖₂^p` per sample.
    pub subcritical_proxy: Vec<f64>,
    /// The proxy stays at or above the bound over the final quarter.
    pub subcritical_alarm: bool,
    /// `‖u‖_{L^{p+2}((0,t); L^{p+2})}` per sample.
    pub accumulated: Vec<f64>,
    /// Growth of `accumulated^{p+2}` over the last quarter divided by growth
    /// over the first quarter; below 1 means sublinear.
    pub increment_ratio: f64,
    pub critical_alarm: bool,
    pub interpolation: Option<InterpolationCheck>,
}

/// `‖u‖_{L^{p+2}L^{p+2}} ≤ ‖u‖^λ_{L^∞L²} ‖u‖^{1−λ}_{L^qL^r}`,
/// `λ = 2(r−p−2)/((p+2)(r−2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterpolationCheck {
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn blowup_monitor<T: Real>(traj: &Trajectory<T>, pair: &AdmissiblePair<T>, spec: &NonlinearitySpec<T>, constant: T) -> Result<BlowupReport> {
    let dt = traj
        .uniform_step()
        .ok_or_else(|| Error::Usage("blowup_monitor needs a uniformly sampled trajectory".into()))?;
    let p = spec.p;
    let two = T::lit(2.0);
    let pp2 = p + two;
    let (q, r) = (pair.q, pair.r);
    let mass: Vec<T> = traj.states().iter().map(|u| lp_norm(u, two)).collect::<Result<_>>()?;
    let lpp2: Vec<T> = traj.states().iter().map(|u| lp_norm(u, pp2)).collect::<Result<_>>()?;
    let end = traj.end_time();
    let expo = if q.is_infinite() { T::one() } else { (q - pp2) / q };
    let bound = T::one() / (T::lit(4.0) * constant * constant);
    let proxy: Vec<f64> = traj
        .times()
        .iter()
        .zip(&mass)
        .map(|(&t, &m)| ((end - t).max(T::zero()).powf(expo) * m.powf(p)).as_f64())
        .collect();
    let n = proxy.len();
    let tail_start = n - (n / 4).max(1);
    let subcritical_alarm = proxy[tail_start..n - 1].iter().all(|&v| v >= bound.as_f64()) && n > 2;
    let accumulated: Vec<f64> = running_time_norm(&lpp2, dt, pp2)?.iter().map(|v| v.as_f64()).collect();
    let powd: Vec<f64> = accumulated.iter().map(|a| a.powf(pp2.as_f64())).collect();
    let quarter = (n / 4).max(1);
    let first = powd[quarter.min(n - 1)] - powd[0];
    let last = powd[n - 1] - powd[n - 1 - quarter.min(n - 1)];
    let increment_ratio = if first > 0.0 { last / first } else { 0.0 };
    let critical_alarm = !accumulated.iter().all(|a| a.is_finite()) || increment_ratio > 1.0;
    let interpolation = if r > pp2 && n >= 3 {
        let lambda = (two * (r - pp2) / (pp2 * (r - two))).as_f64();
        let lhs = time_norm(&lpp2, dt, pp2)?.as_f64();
        let sup2 = mass.iter().copied().fold(T::zero(), T::max).as_f64();
        let lr: Vec<T> = traj.states().iter().map(|u| lp_norm(u, r)).collect::<Result<_>>()?;
        let lqlr = time_norm(&lr, dt, q)?.as_f64();
        let rhs = sup2.powf(lambda) * lqlr.powf(1.0 - lambda);
        Some(InterpolationCheck {
            lambda,
            lhs,
            rhs,
            holds: lhs <= rhs * (1.0 + 1e-3),
        })
    } else {
        None
    };
    Ok(BlowupReport {
        subcritical_bound: bound.as_f64(),
        subcritical_proxy: proxy,
        subcritical_alarm,
        accumulated,
        increment_ratio,
        critical_alarm,
        interpolation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::propagator::gaussian_evolved;
    use std::sync::Arc;

    fn grid(n: usize, ext: f64) -> Arc<Grid<f64>> {
        Grid::build(WeinsteinParams::new(0.5, 1).unwrap(), n, ext, n / 2, ext).unwrap()
    }

    fn gaussian(g: &Arc<Grid<f64>>, amp: f64, s: f64) -> Field<f64> {
        Field::from_fn(g, |x| Complex::new(amp * (-s * (x[0] * x[0] + x[1] * x[1])).exp(), 0.0))
    }

    #[test]
    fn nonlinearity_basics() {
        let spec = NonlinearitySpec::real(0.5, 1.0).unwrap();
        assert_eq!(spec.eval(Complex::new(0.0, 0.0)), Complex::new(0.0, 0.0));
        let u = Complex::new(0.3, -0.4);
        assert!((spec.eval(u).norm() - 0.5f64.powf(1.5)).abs() < 1e-15);
        assert!(NonlinearitySpec::real(0.0, 1.0).is_err());
    }

    #[test]
    fn lipschitz_constant_holds() {
        for p in [0.25, 0.5, 1.0, 2.0, 3.0] {
            let worst = lipschitz_sweep(p, 10_000, 11);
            assert!(worst <= default_lipschitz(p) * (1.0 + 1e-9), "p={p}: {worst}");
        }
        // max(1, 2^{1−p}) is too small once p > 1
        assert!(lipschitz_sweep(3.0, 10_000, 11) > 1.0);
    }

    #[test]
    fn exact_flow_matches_ode() {
        let spec = NonlinearitySpec::new(1.5, Complex::new(0.7, 0.3)).unwrap();
        let u0 = Complex::new(0.4, 0.2);
        // RK4 reference
        let mut u = u0;
        let h = 1e-4;
        for _ in 0..10_000 {
            let k1 = spec.eval(u);
            let k2 = spec.eval(u + k1 * (h / 2.0));
            let k3 = spec.eval(u + k2 * (h / 2.0));
            let k4 = spec.eval(u + k3 * h);
            u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        assert!((spec.flow(u0, 1.0).unwrap() - u).norm() < 1e-12);
        // focusing-gain coupling reaches the singularity
        assert!(spec.flow(Complex::new(10.0, 0.0), 100.0).is_none());
    }

    #[test]
    fn zero_coupling_is_free_flow() {
        let g = grid(64, 10.0);
        let f = gaussian(&g, 1.0, 1.0);
        let plan = PropagatorPlan::new(&g);
        let spec = NonlinearitySpec::real(1.0, 0.0).unwrap();
        let a = strang_step(&plan, &spec, &f, 0.1).unwrap();
        let b = plan.evolve(&f, 0.1).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn linear_evolve_matches_closed_form() {
        let g = grid(128, 16.0);
        let p = *g.params();
        let f = gaussian(&g, 1.0, 1.0);
        let cfg = SolverConfig::new(NonlinearitySpec::real(1.0, 0.0).unwrap(), 1.0, 0.1);
        let traj = evolve(&f, &cfg).unwrap();
        for (&t, u) in traj.times().iter().zip(traj.states()) {
            let want = Field::from_fn(&g, |x| gaussian_evolved(&p, 1.0, t, x));
            assert!(u.max_abs_diff(&want).unwrap() <= 1e-5 * want.sup(), "t={t}");
        }
        assert_eq!(traj.diagnostics().len(), traj.len());
    }

    #[test]
    fn mass_is_conserved() {
        let g = grid(64, 10.0);
        let f = gaussian(&g, 1.0, 1.0);
        let m0 = lp_norm(&f, 2.0).unwrap();
        let plan = PropagatorPlan::new(&g);
        let spec = NonlinearitySpec::real(2.0, 1.0).unwrap();
        let u = strang_step(&plan, &spec, &f, 0.05).unwrap();
        assert!((lp_norm(&u, 2.0).unwrap() / m0 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn focusing_blowup_is_flagged() {
        let g = grid(32, 6.0);
        let f = gaussian(&g, 1e3, 1.0);
        let mut cfg = SolverConfig::new(NonlinearitySpec::new(2.0, Complex::new(0.0, 1.0)).unwrap(), 1.0, 0.01);
        cfg.sup_limit = 1e6;
        assert!(matches!(evolve(&f, &cfg), Err(Error::BlowUp { .. })));
    }

    #[test]
    fn picard_free_case_converges_at_once() {
        let g = grid(32, 8.0);
        let f = gaussian(&g, 1.0, 1.0);
        let mut cfg = SolverConfig::new(NonlinearitySpec::real(0.5, 0.0).unwrap(), 0.5, 0.05);
        cfg.mode = SolverMode::Picard;
        cfg.picard_samples = 9;
        let out = picard_solve(&f, &cfg).unwrap();
        assert_eq!(out.report.iterations, 1);
        assert!(out.report.converged);
    }

    #[test]
    fn picard_fixed_point_and_uniqueness() {
        let g = grid(32, 10.0);
        let f = gaussian(&g, 0.3, 0.5);
        let mut cfg = SolverConfig::new(NonlinearitySpec::real(1.0, 1.0).unwrap(), 0.5, 0.05);
        cfg.mode = SolverMode::Picard;
        cfg.picard_samples = 17;
        cfg.picard_tol = 1e-11;
        let a = picard_solve(&f, &cfg).unwrap();
        assert!(a.report.converged);
        let res = picard_residual(&f, &cfg, a.trajectory.states()).unwrap();
        assert!(res <= 2.0 * cfg.picard_tol, "{res}");
        let start: Vec<Field<f64>> = a.trajectory.states().iter().map(|u| u.scaled(Complex::new(0.9, 0.1))).collect();
        let b = picard_solve_from(&f, &cfg, Some(start)).unwrap();
        let pair = x_pair(g.params(), 1.0);
        let dist = x_distance(a.trajectory.states(), b.trajectory.states(), 0.5 / 16.0, pair).unwrap();
        assert!(dist <= 10.0 * cfg.picard_tol, "{dist}");
    }
}
