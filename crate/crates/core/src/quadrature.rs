//! Uniform-grid time quadrature.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Composite Simpson weights for `n` equally spaced samples with spacing `h`.
/// An odd number of intervals closes with Simpson's 3/8 rule on the last
/// three. Requires `n ≥ 3`.
pub fn simpson_weights<T: Real>(n: usize, h: T) -> Result<Vec<T>> {
    if n < 3 {
        return Err(Error::Usage(format!(
            "Simpson quadrature needs at least 3 samples, got {n}"
        )));
    }
    let mut w = vec![T::zero(); n];
    let intervals = n - 1;
    let simpson_end = if intervals % 2 == 0 { intervals } else { intervals - 3 };
    let third = h / T::lit(3.0);
    let mut k = 0;
    while k < simpson_end {
        w[k] = w[k] + third;
        w[k + 1] = w[k + 1] + T::lit(4.0) * third;
        w[k + 2] = w[k + 2] + third;
        k += 2;
    }
    if simpson_end < intervals {
        let e = T::lit(3.0) * h / T::lit(8.0);
        let k = simpson_end;
        w[k] = w[k] + e;
        w[k + 1] = w[k + 1] + T::lit(3.0) * e;
        w[k + 2] = w[k + 2] + T::lit(3.0) * e;
        w[k + 3] = w[k + 3] + e;
    }
    Ok(w)
}

/// Weights for `∫_0^{t_j}` at every prefix `j = 0..n`: row `j` has `j + 1`
/// entries. The first interval uses the quadratic through samples 0, 1, 2.
pub fn cumulative_weights<T: Real>(n: usize, h: T) -> Result<Vec<Vec<T>>> {
    if n < 3 {
        return Err(Error::Usage(format!(
            "cumulative quadrature needs at least 3 samples, got {n}"
        )));
    }
    let mut rows = Vec::with_capacity(n);
    rows.push(vec![T::zero()]);
    let twelfth = h / T::lit(12.0);
    rows.push(vec![T::lit(5.0) * twelfth, T::lit(8.0) * twelfth, -twelfth]);
    for j in 2..n {
        rows.push(simpson_weights(j + 1, h)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(n: usize, f: impl Fn(f64) -> f64, b: f64) -> f64 {
        let h = b / (n - 1) as f64;
        simpson_weights(n, h)
            .unwrap()
            .iter()
            .enumerate()
            .map(|(k, w)| w * f(k as f64 * h))
            .sum()
    }

    #[test]
    fn exact_for_cubics() {
        for n in 3..12 {
            let got = integrate(n, |t| 1.0 + t - 2.0 * t * t + t * t * t, 2.0);
            assert!((got - (2.0 + 2.0 - 16.0 / 3.0 + 4.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let e1 = (integrate(17, f64::exp, 1.0) - (1f64.exp() - 1.0)).abs();
        let e2 = (integrate(33, f64::exp, 1.0) - (1f64.exp() - 1.0)).abs();
        assert!((e1 / e2 - 16.0).abs() < 1.0);
    }

    #[test]
    fn too_few_samples() {
        assert!(simpson_weights::<f64>(2, 0.1).is_err());
    }

    #[test]
    fn cumulative_prefixes() {
        let h = 0.1;
        let rows = cumulative_weights(9, h).unwrap();
        for (j, row) in rows.iter().enumerate() {
            let got: f64 = row.iter().enumerate().map(|(k, w)| w * (k as f64 * h).powi(2)).sum();
            let t = j as f64 * h;
            assert!((got - t.powi(3) / 3.0).abs() < 1e-14, "j={j}");
        }
    }
}
