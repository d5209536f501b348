//! Acceptance run: one line per criterion, exit status 1 if any undocumented
//! criterion fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weinstein::grid::{lp_norm, Grid, GridSpec, WeinsteinParams};
use weinstein::propagator::{decay_fit, DecayFitConfig};
use weinstein::solver::{
    blowup_monitor, contraction_window, evolve, picard_solve, NonlinearitySpec, SolverConfig,
};
use weinstein::strichartz::{
    classify, classify_reciprocals, classify_sigma, critical_power, endpoint, strichartz_quotient,
    Admissibility, DataFamily, QuotientConfig,
};
use weinstein::transform::{eigenfunction, forward, forward_at};
use weinstein::translation::{convolve, convolve_direct, translate, translate_fn, TranslationRule};
use weinstein::Field;

type G = Arc<Grid<f64>>;

/// Criteria whose failure is analysed in the project notes and expected.
const DOCUMENTED_FAILURES: &[u32] = &[10];

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(detail: &mut Vec<String>, name: &str, value: f64, tol: f64, pass: bool) -> bool {
    detail.push(format!("{name}={value:.3e} (tol {tol:.1e})"));
    pass
}

fn budget(detail: &mut Vec<String>, start: Instant, limit: Duration) -> bool {
    let el = start.elapsed();
    detail.push(format!("{:.2}s/{}s", el.as_secs_f64(), limit.as_secs()));
    el <= limit
}

fn gaussian(g: &G, s: f64) -> Field<f64> {
    Field::from_fn(g, |x| Complex::new((-s * x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0))
}

/// Sum of random modulated Gaussian packets, even and smooth in the radial
/// variable.
fn packets(g: &G, rng: &mut ChaCha8Rng, count: usize, centre: f64, freq: f64) -> Field<f64> {
    let d = g.d();
    let terms: Vec<(Complex<f64>, f64, Vec<f64>, Vec<f64>, f64)> = (0..count)
        .map(|_| {
            (
                Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                rng.gen_range(0.5..1.5),
                (0..d).map(|_| rng.gen_range(-centre..centre)).collect(),
                (0..d).map(|_| rng.gen_range(-freq..freq)).collect(),
                rng.gen_range(0.0..freq),
            )
        })
        .collect();
    Field::from_fn(g, |x| {
        terms.iter().fold(Complex::new(0.0, 0.0), |acc, (c, s, a, xi, eta)| {
            let r = x[d];
            let shift: f64 = (0..d).map(|i| (x[i] - a[i]).powi(2)).sum();
            let phase: f64 = (0..d).map(|i| xi[i] * x[i]).sum();
            acc + c * (-s * (shift + r * r)).exp() * (eta * r).cos() * Complex::from_polar(1.0, phase)
        })
    })
}

fn c1_gaussian_pair() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for alpha in [0.0, 0.5, 1.5] {
        for d in [1, 2] {
            for s in [0.5f64, 1.0, 2.0, 4.0] {
                let p = WeinsteinParams::new(alpha, d).unwrap();
                let ext = 6.0 / s.sqrt();
                let g = Grid::build(p, 64, ext, 64, ext).unwrap();
                let hat = forward(&gaussian(&g, s)).unwrap();
                let sigma = p.sigma();
                let want = Field::from_freq_fn(&g, |l| {
                    let l2: f64 = l.iter().map(|v| v * v).sum();
                    Complex::new((2.0 * s).powf(-sigma) * (-l2 / (4.0 * s)).exp(), 0.0)
                });
                worst = worst.max(hat.max_abs_diff(&want).unwrap() / want.sup());
            }
        }
    }
    let mut detail = vec![];
    let a = check(&mut detail, "max_rel_err", worst, 1e-6, worst <= 1e-6);
    let b = budget(&mut detail, start, Duration::from_secs(10));
    Outcome { pass: a && b, detail: detail.join(", ") }
}

fn c2_plancherel() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for alpha in [0.0, 0.5, 1.5] {
        for d in [1, 2] {
            let p = WeinsteinParams::new(alpha, d).unwrap();
            let (n, ext) = if d == 1 { (64, 12.0) } else { (32, 8.0) };
            let g = Grid::build(p, n, ext, n, ext).unwrap();
            for _ in 0..20 {
                let f = packets(&g, &mut rng, 3, 2.0, 1.5);
                let n0 = lp_norm(&f, 2.0).unwrap();
                let n1 = lp_norm(&forward(&f).unwrap(), 2.0).unwrap();
                worst = worst.max((n1 / n0 - 1.0).abs());
            }
        }
    }
    let mut detail = vec![];
    let a = check(&mut detail, "max|ratio-1|", worst, 1e-8, worst <= 1e-8);
    let b = budget(&mut detail, start, Duration::from_secs(5));
    Outcome { pass: a && b, detail: detail.join(", ") }
}

fn c3_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst, mut own) = (0.0f64, 0.0f64);
    for alpha in [0.0, 0.5, 1.5] {
        let p = WeinsteinParams::new(alpha, 1).unwrap();
        let g = Grid::build(p, 16, 5.0, 16, 5.0).unwrap();
        let f = packets(&g, &mut rng, 3, 1.0, 1.0);
        let fast = forward(&f).unwrap();
        let direct: Vec<Complex<f64>> = (0..g.len()).map(|i| forward_at(&f, &g.freq_point(i)).unwrap()).collect();
        let peak = direct.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (v, w) in fast.values().iter().zip(&direct) {
            worst = worst.max((w - v).norm() / peak);
            own = own.max((w - v).norm() / w.norm());
        }
    }
    let mut detail = vec![];
    let a = check(&mut detail, "max_nodewise_err/peak", worst, 1e-8, worst <= 1e-8);
    detail.push(format!("max_nodewise_err/|value|={own:.3e}"));
    let b = budget(&mut detail, start, Duration::from_secs(5));
    Outcome { pass: a && b, detail: detail.join(", ") }
}

fn c4_translation() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = WeinsteinParams::new(0.5, 1).unwrap();
    let rule = TranslationRule::for_params(&p).unwrap();
    let mut product = 0.0f64;
    for _ in 0..50 {
        let x = [rng.gen_range(-3.0..3.0), rng.gen_range(0.0..3.0)];
        let y = [rng.gen_range(-3.0..3.0), rng.gen_range(0.0..3.0)];
        let l = [rng.gen_range(-3.0..3.0), rng.gen_range(0.0..3.0)];
        let got = translate_fn(&rule, &p, |z| eigenfunction(&p, z, &l), &x, &y).unwrap();
        let want = eigenfunction(&p, &x, &l) * eigenfunction(&p, &y, &l);
        // |Ψ| ≤ 1 = Ψ(0, λ)
        product = product.max((got - want).norm());
    }
    let g = Grid::build(p, 64, 12.0, 64, 12.0).unwrap();
    let mut identity = 0.0f64;
    for _ in 0..50 {
        let (s, c) = (rng.gen_range(0.6..1.5), rng.gen_range(-1.0..1.0));
        let f = Field::from_fn(&g, |z| Complex::new((-s * ((z[0] - c).powi(2) + z[1] * z[1])).exp(), 0.0));
        let x = [rng.gen_range(-1.5..1.5), rng.gen_range(0.0..1.5)];
        let lhs = forward(&translate(&f, &rule, &x).unwrap()).unwrap();
        let fh = forward(&f).unwrap();
        let xr = [-x[0], x[1]];
        let rhs = Field::from_freq_fn(&g, |l| eigenfunction(&p, &xr, l)).mul(&fh).unwrap();
        identity = identity.max(lhs.max_abs_diff(&rhs).unwrap() / fh.sup());
    }
    let mut detail = vec![];
    let a = check(&mut detail, "product_rel_err", product, 1e-7, product <= 1e-7);
    let b = check(&mut detail, "identity_rel_err", identity, 1e-6, identity <= 1e-6);
    let c = budget(&mut detail, start, Duration::from_secs(10));
    Outcome { pass: a && b && c, detail: detail.join(", ") }
}

fn c5_young() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = WeinsteinParams::new(0.5, 1).unwrap();
    let g = Grid::build(p, 64, 14.0, 64, 14.0).unwrap();
    let triples = [(1.0, 2.0, 2.0), (4.0 / 3.0, 4.0 / 3.0, 2.0), (2.0, 2.0, f64::INFINITY)];
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..30 {
        let f = packets(&g, &mut rng, 2, 1.5, 1.0);
        let h = packets(&g, &mut rng, 2, 1.5, 1.0);
        let fh = convolve(&f, &h).unwrap();
        for &(a, b, c) in &triples {
            let lhs = lp_norm(&fh, c).unwrap();
            let rhs = lp_norm(&f, a).unwrap() * lp_norm(&h, b).unwrap();
            worst = worst.max(lhs / rhs - 1.0);
        }
    }
    let small = Grid::build(p, 16, 6.0, 16, 6.0).unwrap();
    let rule = TranslationRule::for_params(&p).unwrap();
    let mut agree = 0.0f64;
    for _ in 0..3 {
        let (s1, c1, s2, c2) = (rng.gen_range(1.2..2.0), rng.gen_range(-0.5..0.5), rng.gen_range(1.2..2.0), rng.gen_range(-0.5..0.5));
        let a = Field::from_fn(&small, |z| Complex::new((-s1 * ((z[0] - c1).powi(2) + z[1] * z[1])).exp(), 0.0));
        let b = Field::from_fn(&small, |z| Complex::new((-s2 * ((z[0] - c2).powi(2) + z[1] * z[1])).exp(), 0.0));
        let fast = convolve(&a, &b).unwrap();
        let direct = convolve_direct(&a, &b, &rule).unwrap();
        agree = agree.max(fast.max_abs_diff(&direct).unwrap() / fast.sup());
    }
    let mut detail = vec![];
    let a = check(&mut detail, "max(lhs/rhs-1)", worst, 1e-6, worst <= 1e-6);
    let b = check(&mut detail, "fast_vs_direct", agree, 1e-6, agree <= 1e-6);
    let c = budget(&mut detail, start, Duration::from_secs(30));
    Outcome { pass: a && b && c, detail: detail.join(", ") }
}

fn c6_decay() -> Outcome {
    let start = Instant::now();
    let mut detail = vec![];
    let mut pass = true;
    for (d, alpha) in [(1, 0.0), (1, 0.5), (2, 0.0)] {
        let p = WeinsteinParams::new(alpha, d).unwrap();
        let fit = decay_fit(&p, &DecayFitConfig::auto(1.0, 1.0, 30.0, f64::INFINITY)).unwrap();
        let rel = (fit.slope / fit.target_slope - 1.0).abs();
        let k = fit.decay_constant.unwrap_or(f64::INFINITY);
        pass &= check(&mut detail, &format!("d={d},a={alpha}: slope {:.4} rel", fit.slope), rel, 0.02, rel <= 0.02);
        pass &= check(&mut detail, "decay_const", k, 1.1, k <= 1.1);
    }
    pass &= budget(&mut detail, start, Duration::from_secs(60));
    Outcome { pass, detail: detail.join(", ") }
}

fn c7_admissibility() -> Outcome {
    let start = Instant::now();
    let mut mismatches = 0usize;
    let n = 200i64;
    for sigma in [Ratio::new(1, 2), Ratio::new(1, 1), Ratio::new(3, 2), Ratio::new(2, 1), Ratio::new(5, 2)] {
        let sf = *sigma.numer() as f64 / *sigma.denom() as f64;
        for i in 0..n {
            for j in 0..n {
                // 1/q, 1/r on a 200×200 lattice of [0, 1/2 + 1/20]
                let iq = Ratio::new(i, 2 * (n - 20));
                let ir = Ratio::new(j, 2 * (n - 20));
                let brute = {
                    let half = Ratio::new(1, 2);
                    let ok = iq <= half && ir <= half && iq + sigma * ir <= sigma * half;
                    let excluded = sigma == Ratio::from_integer(1) && iq == half && ir == Ratio::from_integer(0);
                    if !ok || excluded {
                        Admissibility::Inadmissible
                    } else if iq + sigma * ir == sigma * half {
                        Admissibility::Sharp
                    } else {
                        Admissibility::Nonsharp
                    }
                };
                let to_exp = |v: Ratio<i64>| if v == Ratio::from_integer(0) { f64::INFINITY } else { *v.denom() as f64 / *v.numer() as f64 };
                let float = classify_sigma(sf, to_exp(iq), to_exp(ir));
                let exact = classify_reciprocals(sigma, iq, ir);
                mismatches += usize::from(float != brute) + usize::from(exact != brute);
            }
        }
    }
    let mut endpoint_ok = true;
    for (alpha, d) in [(0.5, 1), (0.0, 2), (1.5, 3)] {
        let p = WeinsteinParams::new(alpha, d).unwrap();
        let (q, r) = endpoint(&p).unwrap();
        endpoint_ok &= classify(&p, q, r).class == Admissibility::Sharp;
        let pc = critical_power(&p) + 2.0;
        endpoint_ok &= classify(&p, pc, pc).class == Admissibility::Sharp;
    }
    let mut detail = vec![];
    let a = check(&mut detail, "mismatches", mismatches as f64, 0.0, mismatches == 0);
    detail.push(format!("endpoint_sharp={endpoint_ok}"));
    let b = budget(&mut detail, start, Duration::from_secs(1));
    Outcome { pass: a && b && endpoint_ok, detail: detail.join(", ") }
}

fn c8_quotient() -> Outcome {
    let start = Instant::now();
    let p = WeinsteinParams::new(0.5, 1).unwrap();
    let mut runs = vec![];
    for (an, rn) in [(1024, 352), (2048, 704)] {
        let cfg = QuotientConfig {
            pairs: vec![(4.0, 8.0 / 3.0), (3.0, 3.0)],
            ensemble_size: 50,
            horizon: 10.0,
            dt: 0.1,
            grid: GridSpec { axial_n: an, half_width: 240.0, radial_n: rn, radial_extent: 190.0 },
            family: DataFamily::RandomPackets { s_min: 0.15, s_max: 0.3 },
            seed: 8,
        };
        runs.push(strichartz_quotient(&p, &cfg).unwrap());
    }
    let mut detail = vec![];
    let mut pass = true;
    for (coarse, fine) in runs[0].iter().zip(&runs[1]) {
        let dt = (coarse.max_2t / coarse.max - 1.0).abs();
        let dg = (fine.max / coarse.max - 1.0).abs();
        pass &= check(&mut detail, &format!("({},{:.3}) max {:.4} T-doubling", coarse.q, coarse.r, coarse.max), dt, 0.05, dt <= 0.05);
        pass &= check(&mut detail, "grid-doubling", dg, 0.05, dg <= 0.05);
    }
    pass &= budget(&mut detail, start, Duration::from_secs(120));
    Outcome { pass, detail: detail.join(", ") }
}

fn c9_strang() -> Outcome {
    let start = Instant::now();
    let p = WeinsteinParams::new(0.5, 1).unwrap();
    let g = Grid::build(p, 64, 12.0, 32, 12.0).unwrap();
    let f = gaussian(&g, 0.5);
    let spec = NonlinearitySpec::real(2.0, 1.0).unwrap();
    let run = |dt: f64| {
        let mut c = SolverConfig::new(spec, 1.0, dt);
        c.record_every = usize::MAX;
        evolve(&f, &c).unwrap().last().clone()
    };
    let reference = run(0.1 / 64.0);
    let err = |dt: f64| lp_norm(&run(dt).sub(&reference).unwrap(), 2.0).unwrap();
    let ratio = err(0.05) / err(0.025);
    let mut c = SolverConfig::new(spec, 10.0, 0.01);
    c.record_every = 1000;
    let traj = evolve(&f, &c).unwrap();
    let m0 = lp_norm(&f, 2.0).unwrap();
    let drift = traj.states().iter().map(|u| (lp_norm(u, 2.0).unwrap() / m0 - 1.0).abs()).fold(0.0, f64::max);
    let mut detail = vec![];
    let a = check(&mut detail, "|ratio/4-1|", (ratio / 4.0 - 1.0).abs(), 0.1, (ratio / 4.0 - 1.0).abs() <= 0.1);
    detail.push(format!("ratio={ratio:.4}"));
    let b = check(&mut detail, "mass_drift_1000_steps", drift, 1e-6, drift <= 1e-6);
    let c = budget(&mut detail, start, Duration::from_secs(60));
    Outcome { pass: a && b && c, detail: detail.join(", ") }
}

fn scaled_gaussian(g: &G, norm: f64, s: f64) -> Field<f64> {
    // ‖A e^{−s|x|²}‖₂ = A (4s)^{−σ/2}
    let a = norm * (4.0 * s).powf(g.params().sigma() / 2.0);
    gaussian(g, s).scaled(Complex::new(a, 0.0))
}

fn c10_picard() -> Outcome {
    let start = Instant::now();
    let p = WeinsteinParams::new(0.5, 1).unwrap();
    let spec = NonlinearitySpec::real(0.5, 1.0).unwrap();
    let mut detail = vec![];

    let g = Grid::build(p, 128, 60.0, 64, 60.0).unwrap();
    let f = scaled_gaussian(&g, 0.1, 0.1);
    let horizon = 1.0;
    let mut cfg = SolverConfig::new(spec, horizon, horizon / 128.0);
    cfg.picard_tol = 1e-16;
    let out = picard_solve(&f, &cfg).unwrap();
    let rep = &out.report;
    let bound = rep.time_bound.unwrap_or(0.0);
    let inside = check(&mut detail, "T/T_bound", horizon / bound, 1.0, rep.within_bound);
    let max_ratio = rep.max_ratio();
    let below = check(&mut detail, "max_ratio", max_ratio, 1.0, max_ratio < 1.0);
    let variation = rep.geometric_variation(2, 1e-14 * rep.distances[0]).unwrap_or(f64::INFINITY);
    let geometric = check(&mut detail, "ratio_variation", variation, 0.2, variation <= 0.2);
    let split = evolve(&f, &cfg).unwrap();
    let gap = split
        .states()
        .iter()
        .zip(out.trajectory.states())
        .map(|(a, b)| lp_norm(&a.sub(b).unwrap(), 2.0).unwrap())
        .fold(0.0, f64::max);
    let agree = check(&mut detail, "split_vs_picard_L2", gap, 1e-4, gap <= 1e-4);

    // g_λ(x) = λ^{2/p} g(λx) with λ = 2^{−1/2} halves ‖g‖₂
    let big = Grid::build(p, 256, 120.0, 128, 120.0).unwrap();
    let mut wcfg = SolverConfig::new(spec, 1.0, 0.1);
    wcfg.picard_samples = 33;
    let mut windows = vec![];
    for (norm, s) in [(0.1, 0.1), (0.05, 0.05)] {
        let h = scaled_gaussian(&big, norm, s);
        windows.push(contraction_window(&h, &wcfg, (1.0, 64.0), 1, 0.3, 0.005).unwrap());
    }
    let expected = 2f64.powf(rep.q * 0.5 / (rep.q - 2.5));
    let scale = windows[1] / windows[0];
    let scaling = check(&mut detail, &format!("T*({:.3}->{:.3}) ratio/expected-1", windows[0], windows[1]), scale / expected - 1.0, 0.05, (scale / expected - 1.0).abs() <= 0.05);
    let b = budget(&mut detail, start, Duration::from_secs(180));
    Outcome { pass: inside && below && geometric && agree && scaling && b, detail: detail.join(", ") }
}

fn c11_mass_critical() -> Outcome {
    let start = Instant::now();
    let p = WeinsteinParams::new(0.5, 1).unwrap();
    let pc = critical_power(&p);
    let g = Grid::build(p, 256, 140.0, 128, 140.0).unwrap();
    let f = scaled_gaussian(&g, 0.05, 0.125);
    let spec = NonlinearitySpec::real(pc, 1.0).unwrap();
    let mut cfg = SolverConfig::new(spec, 20.0, 0.05);
    cfg.record_every = 4;
    cfg.pair = Some((2.0, 4.0));
    let mut detail = vec![];
    let traj = match evolve(&f, &cfg) {
        Ok(t) => t,
        Err(e) => {
            return Outcome { pass: false, detail: format!("run aborted: {e}") };
        }
    };
    let pair = classify(&p, 2.0, 4.0);
    let rep = blowup_monitor(&traj, &pair, &spec, 1.0).unwrap();
    let acc = *rep.accumulated.last().unwrap();
    let bounded = check(&mut detail, "accumulated_Lp+2", acc, f64::INFINITY, acc.is_finite());
    let no_alarm = check(&mut detail, "increment_ratio", rep.increment_ratio, 1.0, !rep.critical_alarm);
    let interp = rep.interpolation.unwrap();
    let slack = interp.lhs / interp.rhs - 1.0;
    let holds = check(&mut detail, &format!("interpolation(lambda={:.4}) lhs/rhs-1", interp.lambda), slack, 1e-3, slack <= 1e-3);
    let identity = (1.0 / (pc + 2.0) - (interp.lambda / 2.0 + (1.0 - interp.lambda) / 4.0)).abs();
    let exps = check(&mut detail, "exponent_identity", identity, 1e-3, identity <= 1e-3);
    let b = budget(&mut detail, start, Duration::from_secs(120));
    Outcome { pass: bounded && no_alarm && holds && exps && b, detail: detail.join(", ") }
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "gaussian pair", c1_gaussian_pair),
        (2, "plancherel", c2_plancherel),
        (3, "transform oracle equivalence", c3_oracle),
        (4, "product formula and translation identity", c4_translation),
        (5, "young inequality and convolution paths", c5_young),
        (6, "dispersive decay", c6_decay),
        (7, "admissibility arithmetic", c7_admissibility),
        (8, "strichartz quotient stability", c8_quotient),
        (9, "strang splitting order", c9_strang),
        (10, "picard contraction", c10_picard),
        (11, "mass-critical small data", c11_mass_critical),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = 0;
    for (id, name, run) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let out = run();
        let tag = match (out.pass, DOCUMENTED_FAILURES.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (documented)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("criterion {id:>2} {tag}: {name}: {}", out.detail);
    }
    if unexpected > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
