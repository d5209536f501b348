//! Scalar special functions: Gamma, the classical Bessel function `J_ν` of
//! real order, the normalized Bessel function `j_α` and the positive zeros of
//! `J_α`.
//!
//! `j_α(ξ) = Γ(α+1) Σ_{n≥0} (−1)^n (ξ/2)^{2n} / (n! Γ(n+α+1))` is evaluated from
//! its power series for small arguments, from Miller's backward recurrence
//! (normalized by the Neumann series for `(x/2)^ν`) at moderate arguments and
//! from the Hankel asymptotic expansion at large arguments.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Below this argument the power series is used.
const SERIES_MAX: f64 = 6.0;
/// Lower bound of the Hankel asymptotic region; raised with the order.
const ASYMPTOTIC_MIN: f64 = 25.0;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Order `α > −1/2` of a Bessel function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselOrder<T> {
    alpha: T,
}

impl<T: Real> BesselOrder<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if !alpha.is_finite() || alpha <= T::lit(-0.5) {
            return Err(Error::Domain(format!(
                "Bessel order must satisfy alpha > -1/2, got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    #[inline]
    pub fn alpha(&self) -> T {
        self.alpha
    }
}

/// `Γ(x)` for `x > 0`.
pub fn gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    Ok(gamma_unchecked(x))
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    if x < T::lit(0.5) {
        let pi = T::PI();
        return Ok((pi / (pi * x).sin()).ln() - ln_gamma_lanczos(T::one() - x));
    }
    Ok(ln_gamma_lanczos(x))
}

fn gamma_unchecked<T: Real>(x: T) -> T {
    if x < T::lit(0.5) {
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma_unchecked(T::one() - x));
    }
    let (t, series) = lanczos_parts(x);
    let half = T::lit(0.5);
    let y = x - T::one();
    (T::TAU()).sqrt() * series * ((y + half) * t.ln() - t).exp()
}

fn ln_gamma_lanczos<T: Real>(x: T) -> T {
    let (t, series) = lanczos_parts(x);
    let y = x - T::one();
    T::lit(0.5) * T::TAU().ln() + (y + T::lit(0.5)) * t.ln() - t + series.ln()
}

fn lanczos_parts<T: Real>(x: T) -> (T, T) {
    let y = x - T::one();
    let mut series = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        series = series + T::lit(c) / (y + T::from_count(i));
    }
    (y + T::lit(LANCZOS_G + 0.5), series)
}

/// Normalized Bessel function `j_α(ξ) = Γ(α+1)(2/ξ)^α J_α(ξ)`, `j_α(0) = 1`.
///
/// The function is even; only `ξ²` (via `|ξ|`) enters the evaluation, so
/// `j_α(ξ)` and `j_α(−ξ)` are bit-identical.
pub fn normalized_bessel_j<T: Real>(order: BesselOrder<T>, xi: T) -> T {
    let alpha = order.alpha();
    let x = xi.abs();
    if x <= T::lit(SERIES_MAX) {
        return normalized_series(alpha, x);
    }
    let scale = gamma_unchecked(alpha + T::one());
    if x >= asymptotic_threshold(alpha) {
        let j = hankel_asymptotic(alpha, x);
        return scale * j * (T::lit(2.0) / x).powf(alpha);
    }
    let (value, log_prefactor) = miller(alpha, x);
    // J_α = value·(x/2)^{ν0}; j_α = Γ(α+1)(x/2)^{−α} J_α
    scale * value * (log_prefactor - alpha * (x / T::lit(2.0)).ln()).exp()
}

/// Classical Bessel function of the first kind `J_ν(x)` for real order
/// `ν > −1/2` and `x ≥ 0`.
pub fn bessel_j<T: Real>(order: BesselOrder<T>, x: T) -> Result<T> {
    if !(x >= T::zero()) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "bessel_j requires a finite x >= 0, got {x}"
        )));
    }
    Ok(bessel_j_unchecked(order.alpha(), x))
}

/// `J_ν(x)`, `x ≥ 0`, any `ν > −1` reachable from the public orders.
pub(crate) fn bessel_j_unchecked<T: Real>(nu: T, x: T) -> T {
    if x == T::zero() {
        return if nu == T::zero() {
            T::one()
        } else if nu > T::zero() {
            T::zero()
        } else {
            T::infinity()
        };
    }
    if x <= T::lit(SERIES_MAX) {
        let prefactor = (nu * (x / T::lit(2.0)).ln() - ln_gamma_lanczos_any(nu + T::one())).exp();
        return prefactor * normalized_series(nu, x);
    }
    if x >= asymptotic_threshold(nu) {
        return hankel_asymptotic(nu, x);
    }
    let (value, log_prefactor) = miller(nu, x);
    value * log_prefactor.exp()
}

fn ln_gamma_lanczos_any<T: Real>(x: T) -> T {
    if x < T::lit(0.5) {
        let pi = T::PI();
        (pi / (pi * x).sin()).abs().ln() - ln_gamma_lanczos(T::one() - x)
    } else {
        ln_gamma_lanczos(x)
    }
}

fn asymptotic_threshold<T: Real>(nu: T) -> T {
    T::lit(ASYMPTOTIC_MIN).max(T::lit(2.0) * nu * nu)
}

/// `Σ (−x²/4)^n Γ(ν+1)/(n! Γ(n+ν+1))`, summed until the tail is below
/// machine precision.
fn normalized_series<T: Real>(nu: T, x: T) -> T {
    let q = -(x * x) / T::lit(4.0);
    let mut term = T::one();
    let mut sum = T::one();
    let eps = T::epsilon() * T::lit(0.5);
    let peak = (x / T::lit(2.0)).to_usize().unwrap_or(0) + 1;
    for n in 1..200 {
        let nf = T::from_count(n);
        term = term * q / (nf * (nf + nu));
        sum = sum + term;
        if n > peak && term.abs() <= eps * sum.abs().max(T::min_positive_value()) {
            break;
        }
    }
    sum
}

/// Hankel expansion `J_ν(x) ≈ sqrt(2/(πx)) (P cos ω − Q sin ω)`,
/// `ω = x − (ν/2 + 1/4)π`.
fn hankel_asymptotic<T: Real>(nu: T, x: T) -> T {
    let mu = T::lit(4.0) * nu * nu;
    let eight_x = T::lit(8.0) * x;
    let mut p = T::one();
    let mut q = T::zero();
    let mut term = T::one();
    let mut last = T::infinity();
    for k in 1..120usize {
        let kf = T::from_count(k);
        let odd = T::from_count(2 * k - 1);
        term = term * (mu - odd * odd) / (kf * eight_x);
        let mag = term.abs();
        if mag > last {
            break;
        }
        last = mag;
        // k = 1 → +Q, k = 2 → −P, k = 3 → −Q, k = 4 → +P, ...
        match k % 4 {
            1 => q = q + term,
            2 => p = p - term,
            3 => q = q - term,
            _ => p = p + term,
        }
        if mag <= T::epsilon() * T::lit(0.1) {
            break;
        }
    }
    let phase = (nu / T::lit(2.0) + T::lit(0.25)) * T::PI();
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_w = cx * cp + sx * sp;
    let sin_w = sx * cp - cx * sp;
    (T::lit(2.0) / (T::PI() * x)).sqrt() * (p * cos_w - q * sin_w)
}

/// Miller backward recurrence for `J_ν(x)`.
///
/// Returns `(v, ln c)` with `J_ν(x) = v·c`; the split keeps the
/// normalization `(x/2)^{ν0}` out of overflow range.
fn miller<T: Real>(nu: T, x: T) -> (T, T) {
    let base = if nu >= T::zero() { nu - nu.floor() } else { nu };
    let target = (nu - base).round().to_usize().unwrap_or(0);
    let xf = x.as_f64();
    let start = target.max(xf.ceil() as usize) + 25 + (4.0 * xf.cbrt()).ceil() as usize;
    let big = T::max_value().sqrt().sqrt();
    let two = T::lit(2.0);

    // Neumann coefficients c_k for orders base + 2k.
    let mut coeffs = Vec::with_capacity(start / 2 + 2);
    let g1 = gamma_unchecked(base + T::one());
    coeffs.push(g1);
    let mut ratio = g1; // Γ(base + k)/k! at k = 1
    for k in 1..=(start / 2 + 1) {
        let kf = T::from_count(k);
        coeffs.push((base + two * kf) * ratio);
        ratio = ratio * (base + kf) / (kf + T::one());
    }

    let mut upper = T::zero(); // f_{m+1}
    let mut current = T::lit(1e-30); // f_m
    let mut norm = T::zero();
    let mut value = T::zero();
    let mut m = start;
    loop {
        if m == target {
            value = current;
        }
        if m % 2 == 0 {
            norm = norm + coeffs[m / 2] * current;
        }
        if m == 0 {
            break;
        }
        let order = base + T::from_count(m);
        let lower = two * order / x * current - upper;
        upper = current;
        current = lower;
        m -= 1;
        if current.abs() > big {
            let s = T::one() / big;
            current = current * s;
            upper = upper * s;
            norm = norm * s;
            value = value * s;
        }
    }
    (value / norm, base * (x / two).ln())
}

/// `J'_ν(x) = (ν/x) J_ν(x) − J_{ν+1}(x)`.
fn bessel_j_derivative<T: Real>(nu: T, x: T) -> T {
    nu / x * bessel_j_unchecked(nu, x) - bessel_j_unchecked(nu + T::one(), x)
}

/// The `k`-th positive zero `j_{α,k}` of `J_α` (`k ≥ 1`).
pub fn bessel_zero<T: Real>(order: BesselOrder<T>, k: usize) -> Result<T> {
    if k == 0 {
        return Err(Error::Domain("Bessel zero index k must be >= 1".into()));
    }
    Ok(*bessel_zeros(order, k)?.last().expect("k >= 1 zeros"))
}

/// The first `n` positive zeros of `J_α`, strictly increasing.
///
/// Each zero is bracketed by a sign scan in steps of 1/2 (consecutive zeros
/// are more than 2.8 apart for `α > −1/2`), then polished by safeguarded
/// Newton iteration.
pub fn bessel_zeros<T: Real>(order: BesselOrder<T>, n: usize) -> Result<Vec<T>> {
    if n == 0 {
        return Err(Error::Domain("number of Bessel zeros must be >= 1".into()));
    }
    let nu = order.alpha();
    let step = T::lit(0.5);
    let mut zeros = Vec::with_capacity(n);
    // j_{ν,1} > π/2 for every ν > −1/2.
    let mut lo = T::one();
    let mut f_lo = bessel_j_unchecked(nu, lo);
    while zeros.len() < n {
        let mut hi = lo + step;
        let mut f_hi = bessel_j_unchecked(nu, hi);
        while f_hi.signum() == f_lo.signum() && f_hi != T::zero() {
            lo = hi;
            f_lo = f_hi;
            hi = hi + step;
            f_hi = bessel_j_unchecked(nu, hi);
        }
        let root = polish_root(nu, lo, hi, f_lo);
        zeros.push(root);
        lo = hi;
        f_lo = f_hi;
    }
    Ok(zeros)
}

fn polish_root<T: Real>(nu: T, mut lo: T, mut hi: T, f_lo: T) -> T {
    let sign_lo = f_lo.signum();
    let mut x = (lo + hi) / T::lit(2.0);
    for _ in 0..100 {
        let f = bessel_j_unchecked(nu, x);
        if f == T::zero() {
            return x;
        }
        if f.signum() == sign_lo {
            lo = x;
        } else {
            hi = x;
        }
        let df = bessel_j_derivative(nu, x);
        let mut next = x - f / df;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = (lo + hi) / T::lit(2.0);
        }
        let delta = (next - x).abs();
        x = next;
        if delta <= T::epsilon() * x * T::lit(2.0) {
            break;
        }
    }
    x
}
