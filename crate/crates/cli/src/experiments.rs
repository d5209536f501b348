//! The experiments a configuration can name.

use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use weinstein::grid::{lp_norm, Grid, GridSpec, WeinsteinParams};
use weinstein::io::{write_diagnostics_csv, write_field};
use weinstein::propagator::{decay_fit, DecayFitConfig};
use weinstein::solver::{
    blowup_monitor, contraction_window, evolve, picard_solve, x_pair, NonlinearitySpec, SolverConfig, SolverMode,
};
use weinstein::strichartz::{classify, strichartz_quotient, Admissibility, DataFamily, QuotientConfig};
use weinstein::transform::{eigenfunction, forward, forward_at, inverse};
use weinstein::translation::{convolve, convolve_direct, translate, translate_fn, TranslationRule};
use weinstein::{Error, Field, Result};

use crate::config::{DataBlock, DataKind, Experiment, ExperimentConfig, PicardBlock, SolverBlock};
use crate::report::{csv_table, num, Check, Report};

type G = Arc<Grid<f64>>;

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let params = WeinsteinParams::new(cfg.params.alpha, cfg.params.d)?;
    match cfg.experiment {
        Experiment::TransformSuite => transform_suite(cfg, params),
        Experiment::TranslationSuite => translation_suite(cfg, params),
        Experiment::Dispersion => dispersion(cfg, params),
        Experiment::StrichartzScan => strichartz_scan(cfg, params),
        Experiment::Solve => solve(cfg, params),
        Experiment::PicardVerify => picard_verify(cfg, params),
    }
}

fn grid_of(cfg: &ExperimentConfig, params: WeinsteinParams<f64>) -> Result<G> {
    let g = cfg
        .grid
        .as_ref()
        .ok_or_else(|| Error::Config("missing [grid] block".into()))?;
    Grid::from_spec(params, &g.spec())
}

fn rel_to_peak(a: &Field<f64>, b: &Field<f64>) -> Result<f64> {
    Ok(a.max_abs_diff(b)? / b.sup())
}

/// Superposition of Gaussian packets `c e^{−s(|x′−a|² + r²)} e^{i⟨ξ,x′⟩} cos(ηr)`.
#[derive(Debug, Clone)]
struct Packets {
    terms: Vec<Packet>,
}

#[derive(Debug, Clone)]
struct Packet {
    c: Complex<f64>,
    s: f64,
    centre: Vec<f64>,
    xi: Vec<f64>,
    eta: f64,
}

impl Packets {
    fn gaussian(d: usize, s: f64) -> Self {
        Self {
            terms: vec![Packet {
                c: Complex::new(1.0, 0.0),
                s,
                centre: vec![0.0; d],
                xi: vec![0.0; d],
                eta: 0.0,
            }],
        }
    }

    fn random(rng: &mut ChaCha8Rng, d: usize, count: usize, s: (f64, f64), centre: f64, freq: f64) -> Self {
        let terms = (0..count)
            .map(|_| Packet {
                c: Complex::from_polar(rng.gen_range(0.5..1.0), rng.gen_range(0.0..std::f64::consts::TAU)),
                s: if s.1 > s.0 { rng.gen_range(s.0..s.1) } else { s.0 },
                centre: (0..d).map(|_| rng.gen_range(-centre..=centre)).collect(),
                xi: (0..d).map(|_| rng.gen_range(-freq..=freq)).collect(),
                eta: rng.gen_range(0.0..=freq),
            })
            .collect();
        Self { terms }
    }

    fn eval(&self, x: &[f64]) -> Complex<f64> {
        let d = x.len() - 1;
        let r = x[d];
        self.terms.iter().fold(Complex::new(0.0, 0.0), |acc, t| {
            let shift: f64 = (0..d).map(|i| (x[i] - t.centre[i]).powi(2)).sum();
            let phase: f64 = (0..d).map(|i| t.xi[i] * x[i]).sum();
            acc + t.c * (-t.s * (shift + r * r)).exp() * (t.eta * r).cos() * Complex::from_polar(1.0, phase)
        })
    }

    /// `x ↦ k·g(λx)`.
    fn rescaled(&self, lambda: f64, k: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Packet {
                c: t.c * k,
                s: t.s * lambda * lambda,
                centre: t.centre.iter().map(|a| a / lambda).collect(),
                xi: t.xi.iter().map(|v| v * lambda).collect(),
                eta: t.eta * lambda,
            })
            .collect();
        Self { terms }
    }

    fn sample(&self, g: &G) -> Field<f64> {
        Field::from_fn(g, |x| self.eval(x))
    }

    /// Samples and rescales the amplitude to the given `L²_α` norm.
    fn sample_normalized(&mut self, g: &G, norm: f64) -> Result<Field<f64>> {
        let f = self.sample(g);
        let n = lp_norm(&f, 2.0)?;
        if !(n > 0.0) {
            return Err(Error::Config("initial data vanishes on the grid".into()));
        }
        for t in &mut self.terms {
            t.c *= norm / n;
        }
        Ok(f.scaled(Complex::new(norm / n, 0.0)))
    }
}

fn initial_data(block: &DataBlock, g: &G, seed: u64) -> Result<(Packets, Field<f64>)> {
    let d = g.d();
    let mut packets = match block.kind {
        DataKind::Gaussian => Packets::gaussian(d, block.s),
        DataKind::Packets => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = g.spec();
            let reach = if d == 0 { 0.0 } else { spec.half_width / 4.0 };
            Packets::random(&mut rng, d, block.count, (block.s, block.s_max.unwrap_or(block.s)), reach, block.s.sqrt())
        }
    };
    let f = packets.sample_normalized(g, block.norm)?;
    Ok((packets, f))
}

fn field_csv(f: &Field<f64>, extra: impl Fn(usize) -> Vec<String>, extra_cols: &[&str]) -> String {
    let g = f.grid();
    let mut header: Vec<String> = (1..=g.d()).map(|i| format!("lambda{i}")).collect();
    header.push("rho".into());
    header.extend(["re".into(), "im".into()]);
    header.extend(extra_cols.iter().map(|s| s.to_string()));
    let header: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let rows = f.values().iter().enumerate().map(|(i, v)| {
        let mut row: Vec<String> = g.freq_point(i).into_iter().map(num).collect();
        row.push(num(v.re));
        row.push(num(v.im));
        row.extend(extra(i));
        row
    });
    csv_table(&header, rows)
}

fn transform_suite(cfg: &ExperimentConfig, params: WeinsteinParams<f64>) -> Result<Report> {
    let g = grid_of(cfg, params)?;
    let suite = cfg.suite.unwrap_or_default();
    let mut rep = Report::default();
    let sigma = params.sigma();

    let gauss = Packets::gaussian(g.d(), suite.s).sample(&g);
    let hat = forward(&gauss)?;
    let exact = Field::from_freq_fn(&g, |l| {
        let l2: f64 = l.iter().map(|v| v * v).sum();
        Complex::new((2.0 * suite.s).powf(-sigma) * (-l2 / (4.0 * suite.s)).exp(), 0.0)
    });
    rep.check(Check::at_most("gaussian_pair_rel_err", rel_to_peak(&hat, &exact)?, 1e-6));
    rep.csv(
        "gaussian_pair.csv",
        field_csv(&hat, |i| vec![num(exact.values()[i].re)], &["exact"]),
    );

    let spec = g.spec();
    let reach = 0.15 * spec.radial_extent.min(if g.d() > 0 { spec.half_width } else { f64::INFINITY });
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut plancherel, mut round_trip) = (0.0f64, 0.0f64);
    let mut rows = vec![];
    for k in 0..suite.fields {
        let f = Packets::random(&mut rng, g.d(), 3, (0.5 * suite.s, 1.5 * suite.s), reach, suite.s.sqrt()).sample(&g);
        let fh = forward(&f)?;
        let (n0, n1) = (lp_norm(&f, 2.0)?, lp_norm(&fh, 2.0)?);
        plancherel = plancherel.max((n1 / n0 - 1.0).abs());
        round_trip = round_trip.max(rel_to_peak(&inverse(&fh)?, &f)?);
        rows.push(vec![k.to_string(), num(n0), num(n1)]);
    }
    rep.check(Check::at_most("plancherel_rel_err", plancherel, 1e-8));
    rep.check(Check::at_most("round_trip_rel_err", round_trip, 1e-8));
    rep.csv("plancherel.csv", csv_table(&["field", "norm", "transform_norm"], rows));

    let stride = (g.len() / suite.oracle_nodes.max(1)).max(1);
    let mut oracle = 0.0f64;
    for i in (0..g.len()).step_by(stride) {
        let direct = forward_at(&gauss, &g.freq_point(i))?;
        oracle = oracle.max((direct - hat.values()[i]).norm() / hat.sup());
    }
    rep.check(Check::at_most("oracle_rel_err", oracle, 1e-8));
    Ok(rep)
}

fn translation_suite(cfg: &ExperimentConfig, params: WeinsteinParams<f64>) -> Result<Report> {
    let g = grid_of(cfg, params)?;
    let suite = cfg.suite.unwrap_or_default();
    let rule = TranslationRule::for_params(&params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rep = Report::default();

    let mut product = 0.0f64;
    let mut rows = vec![];
    for _ in 0..50 {
        let x = [rng.gen_range(-3.0..3.0), rng.gen_range(0.0..3.0)];
        let y = [rng.gen_range(-3.0..3.0), rng.gen_range(0.0..3.0)];
        let l = [rng.gen_range(-3.0..3.0), rng.gen_range(0.0..3.0)];
        let got = translate_fn(&rule, &params, |z| eigenfunction(&params, z, &l), &x, &y)?;
        let want = eigenfunction(&params, &x, &l) * eigenfunction(&params, &y, &l);
        let err = (got - want).norm();
        product = product.max(err);
        rows.push([x[0], x[1], y[0], y[1], l[0], l[1], err].into_iter().map(num).collect());
    }
    rep.check(Check::at_most("product_formula_err", product, 1e-7));
    rep.csv("product_formula.csv", csv_table(&["x1", "x2", "y1", "y2", "lambda1", "lambda2", "abs_err"], rows));

    let mut identity = 0.0f64;
    for _ in 0..5 {
        let f = Packets::random(&mut rng, 1, 1, (0.6 * suite.s, 1.5 * suite.s), 1.0, 0.0).sample(&g);
        let x = [rng.gen_range(-1.5..1.5), rng.gen_range(0.0..1.5)];
        let lhs = forward(&translate(&f, &rule, &x)?)?;
        let fh = forward(&f)?;
        let xr = [-x[0], x[1]];
        let rhs = Field::from_freq_fn(&g, |l| eigenfunction(&params, &xr, l)).mul(&fh)?;
        identity = identity.max(lhs.max_abs_diff(&rhs)? / fh.sup());
    }
    rep.check(Check::at_most("translation_identity_rel_err", identity, 1e-6));

    let triples = [(1.0, 2.0, 2.0), (4.0 / 3.0, 4.0 / 3.0, 2.0), (2.0, 2.0, f64::INFINITY)];
    let mut young = f64::NEG_INFINITY;
    for _ in 0..suite.fields {
        let a = Packets::random(&mut rng, 1, 2, (0.5 * suite.s, 1.5 * suite.s), 1.5, 1.0).sample(&g);
        let b = Packets::random(&mut rng, 1, 2, (0.5 * suite.s, 1.5 * suite.s), 1.5, 1.0).sample(&g);
        let ab = convolve(&a, &b)?;
        for &(p, q, r) in &triples {
            young = young.max(lp_norm(&ab, r)? / (lp_norm(&a, p)? * lp_norm(&b, q)?) - 1.0);
        }
    }
    rep.check(Check::at_most("young_excess", young, 1e-6));

    let small = Grid::build(params, 16, 6.0, 16, 6.0)?;
    let a = Packets::random(&mut rng, 1, 1, (1.2, 2.0), 0.5, 0.0).sample(&small);
    let b = Packets::random(&mut rng, 1, 1, (1.2, 2.0), 0.5, 0.0).sample(&small);
    let fast = convolve(&a, &b)?;
    let direct = convolve_direct(&a, &b, &rule)?;
    rep.check(Check::at_most("convolution_paths_rel_err", rel_to_peak(&fast, &direct)?, 1e-6));
    Ok(rep)
}

fn dispersion(cfg: &ExperimentConfig, params: WeinsteinParams<f64>) -> Result<Report> {
    let b = cfg.dispersion.ok_or_else(|| Error::Config("missing [dispersion] block".into()))?;
    let p = b.p.value();
    let mut fit_cfg = DecayFitConfig::auto(b.s, b.t_min, b.t_max, p);
    fit_cfg.samples = b.samples;
    if let Some(g) = &cfg.grid {
        fit_cfg.axial_n = g.axial_n;
        fit_cfg.half_width = g.half_width;
        fit_cfg.radial_n = g.radial_n;
        fit_cfg.radial_extent = g.radial_extent;
    }
    let fit = decay_fit(&params, &fit_cfg)?;
    let mut rep = Report::default();
    let rel = if fit.target_slope == 0.0 {
        fit.slope.abs()
    } else {
        (fit.slope / fit.target_slope - 1.0).abs()
    };
    rep.check(Check::at_most("slope_rel_err", rel, 0.02));
    if let Some(k) = fit.decay_constant {
        rep.check(Check::at_most("decay_constant", k, 1.1));
    }
    rep.result("slope", fit.slope);
    rep.result("intercept", fit.intercept);
    rep.result("r_squared", fit.r_squared);
    rep.result("target_slope", fit.target_slope);
    rep.result("grid", GridSpec {
        axial_n: fit_cfg.axial_n,
        half_width: fit_cfg.half_width,
        radial_n: fit_cfg.radial_n,
        radial_extent: fit_cfg.radial_extent,
    });
    let col = if p.is_infinite() { "sup_norm" } else { "norm" };
    let rows = fit.samples.iter().map(|s| vec![num(s.t), num(s.norm)]);
    rep.csv("decay.csv", csv_table(&["t", col], rows));
    Ok(rep)
}

fn strichartz_scan(cfg: &ExperimentConfig, params: WeinsteinParams<f64>) -> Result<Report> {
    let b = cfg.strichartz.clone().ok_or_else(|| Error::Config("missing [strichartz] block".into()))?;
    let grid = cfg.grid.ok_or_else(|| Error::Config("missing [grid] block".into()))?.spec();
    let mut rep = Report::default();
    let sigma = params.sigma();
    for &[q, r] in &b.pairs {
        let gap = 1.0 / q + sigma / r - sigma / 2.0;
        let admissible = classify(&params, q, r).class != Admissibility::Inadmissible;
        rep.check(Check {
            name: format!("admissible({q},{r})"),
            value: gap,
            tolerance: 0.0,
            pass: admissible,
        });
    }
    if !rep.passed() {
        return Ok(rep);
    }
    let qcfg = QuotientConfig {
        pairs: b.pairs.iter().map(|&[q, r]| (q, r)).collect(),
        ensemble_size: b.ensemble_size,
        horizon: b.horizon,
        dt: b.dt,
        grid,
        family: DataFamily::RandomPackets { s_min: b.s_min, s_max: b.s_max },
        seed: cfg.seed,
    };
    let stats = strichartz_quotient(&params, &qcfg)?;
    let refined = if b.refine {
        let mut fine = qcfg.clone();
        fine.grid.axial_n *= if params.d() == 0 { 1 } else { 2 };
        fine.grid.radial_n *= 2;
        Some(strichartz_quotient(&params, &fine)?)
    } else {
        None
    };
    let mut summaries = vec![];
    let mut rows = vec![];
    for (k, st) in stats.iter().enumerate() {
        let tag = format!("({},{})", st.q, st.r);
        rep.check(Check::at_most(format!("quotient_T_doubling{tag}"), (st.max_2t / st.max - 1.0).abs(), 0.05));
        let mut summary = json!({
            "pair": [st.q, st.r],
            "sigma": st.sigma,
            "ensemble_size": st.ensemble_size,
            "T": st.horizon,
            "max": st.max,
            "mean": st.mean,
            "max_2T": st.max_2t,
        });
        if let Some(fine) = &refined {
            let f = &fine[k];
            rep.check(Check::at_most(format!("quotient_grid_doubling{tag}"), (f.max / st.max - 1.0).abs(), 0.05));
            summary["max_refined"] = json!(f.max);
        }
        summaries.push(summary);
        for m in &st.members {
            rows.push(vec![num(st.q), num(st.r), m.index.to_string(), num(m.quotient), num(m.quotient_2t)]);
        }
    }
    rep.result("pairs", summaries);
    rep.csv("members.csv", csv_table(&["q", "r", "member", "quotient", "quotient_2T"], rows));
    Ok(rep)
}

fn solver_config(b: &SolverBlock, mode: SolverMode, seed: u64) -> Result<SolverConfig<f64>> {
    let spec = NonlinearitySpec::new(b.p, Complex::new(b.mu[0], b.mu[1]))?;
    let mut c = SolverConfig::new(spec, b.horizon, b.dt);
    c.mode = mode;
    c.record_every = b.record_every;
    c.picard_samples = b.picard_samples;
    c.picard_max_iter = b.picard_max_iter;
    c.picard_tol = b.picard_tol;
    c.ball_radius = b.ball_radius;
    c.strichartz_constant = b.strichartz_constant;
    c.pair = b.pair.map(|[q, r]| (q, r));
    c.sup_limit = b.sup_limit;
    c.seed = seed;
    Ok(c)
}

fn field_bytes(f: &Field<f64>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_field(f, &mut buf)?;
    Ok(buf)
}

fn diagnostics_csv(d: &[weinstein::trajectory::StepDiagnostics]) -> Result<String> {
    let mut buf = Vec::new();
    write_diagnostics_csv(d, &mut buf)?;
    Ok(String::from_utf8(buf).expect("ASCII output"))
}

fn solve(cfg: &ExperimentConfig, params: WeinsteinParams<f64>) -> Result<Report> {
    let g = grid_of(cfg, params)?;
    let sb = cfg.solver.ok_or_else(|| Error::Config("missing [solver] block".into()))?;
    let db = cfg.data.ok_or_else(|| Error::Config("missing [data] block".into()))?;
    let (_, g0) = initial_data(&db, &g, cfg.seed)?;
    let scfg = solver_config(&sb, SolverMode::Splitting, cfg.seed)?;
    let mut rep = Report::default();
    let traj = match evolve(&g0, &scfg) {
        Ok(t) => t,
        Err(Error::BlowUp { time, sup, limit }) => {
            rep.check(Check::at_most("sup_over_limit", sup / limit, 1.0));
            rep.result("blowup_time", time);
            return Ok(rep);
        }
        Err(e) => return Err(e),
    };
    let diag = traj.diagnostics();
    let sup = diag.iter().map(|d| d.sup_norm).fold(0.0, f64::max);
    rep.check(Check::at_most("sup_over_limit", sup / sb.sup_limit, 1.0));
    if scfg.nonlinearity.conserves_mass() {
        let m0 = diag[0].mass;
        let drift = diag.iter().map(|d| (d.mass / m0 - 1.0).abs()).fold(0.0, f64::max);
        rep.check(Check::at_most("mass_drift", drift, 1e-6));
    }
    if traj.uniform_step().is_some() && traj.len() >= 3 {
        let (q, r) = sb.pair.map(|[q, r]| (q, r)).unwrap_or_else(|| x_pair(&params, sb.p));
        let pair = classify(&params, q, r);
        let mon = blowup_monitor(&traj, &pair, &scfg.nonlinearity, scfg.existence_constant())?;
        rep.check(Check::at_most("critical_increment_ratio", mon.increment_ratio, 1.0));
        if let Some(i) = mon.interpolation {
            rep.check(Check::at_most("interpolation_excess", i.lhs / i.rhs - 1.0, 1e-3));
            rep.result("interpolation", i);
        }
        rep.result("accumulated_norm", mon.accumulated.last().copied());
        rep.result("subcritical_alarm", mon.subcritical_alarm);
    }
    rep.csv("diagnostics.csv", diagnostics_csv(diag)?);
    let states = traj.states();
    let last = states.len() - 1;
    for (k, u) in states.iter().enumerate() {
        let keep = k == last || (sb.checkpoint_every > 0 && k % sb.checkpoint_every == 0);
        if keep {
            rep.binary.push((format!("checkpoints/state_{k:05}.wfld"), field_bytes(u)?));
        }
    }
    rep.result("end_time", traj.end_time());
    Ok(rep)
}

fn picard_verify(cfg: &ExperimentConfig, params: WeinsteinParams<f64>) -> Result<Report> {
    let g = grid_of(cfg, params)?;
    let sb = cfg.solver.ok_or_else(|| Error::Config("missing [solver] block".into()))?;
    let db = cfg.data.ok_or_else(|| Error::Config("missing [data] block".into()))?;
    let pb: PicardBlock = cfg.picard.unwrap_or_default();
    let (packets, g0) = initial_data(&db, &g, cfg.seed)?;
    let scfg = solver_config(&sb, SolverMode::Picard, cfg.seed)?;
    let out = picard_solve(&g0, &scfg)?;
    let r = &out.report;
    let mut rep = Report::default();
    match r.time_bound {
        Some(b) => rep.check(Check::at_most("T_over_T_bound", sb.horizon / b, 1.0)),
        None => rep.check(Check { name: "T_over_T_bound".into(), value: f64::NAN, tolerance: 1.0, pass: false }),
    }
    rep.check(Check::below("max_ratio", r.max_ratio(), 1.0));
    let floor = 1e-14 * r.distances.first().copied().unwrap_or(0.0);
    let variation = r.geometric_variation(pb.geometric_skip, floor).unwrap_or(f64::NAN);
    rep.check(Check::at_most("ratio_variation", variation, 0.2));
    let ball = r.ball_norms.iter().copied().fold(0.0, f64::max) / r.ball_radius;
    rep.check(Check::at_most("ball_norm_over_M", ball, 1.0));

    let mut split_cfg = scfg;
    split_cfg.mode = SolverMode::Splitting;
    split_cfg.dt = sb.horizon / (sb.picard_samples - 1) as f64;
    split_cfg.record_every = 1;
    let split = evolve(&g0, &split_cfg)?;
    let mut gap = 0.0f64;
    for (a, b) in split.states().iter().zip(out.trajectory.states()) {
        gap = gap.max(lp_norm(&a.sub(b)?, 2.0)?);
    }
    rep.check(Check::at_most("split_vs_picard_L2", gap, 1e-4));

    if pb.scaling {
        let sigma = params.sigma();
        let p = sb.p;
        if !(sigma * p < 2.0) {
            return Err(Error::Config("the scaling check needs a mass-subcritical power".into()));
        }
        // g_λ = λ^{2/p} g(λ·) with ‖g_λ‖₂ = ‖g‖₂/2
        let lambda = 2f64.powf(-p / (2.0 - sigma * p));
        let half = packets.rescaled(lambda, lambda.powf(2.0 / p)).sample(&g);
        let mut wcfg = scfg;
        wcfg.picard_samples = pb.window_samples;
        let window = (pb.window[0], pb.window[1]);
        let t1 = contraction_window(&g0, &wcfg, window, 1, pb.window_kappa, 0.005)?;
        let t2 = contraction_window(&half, &wcfg, window, 1, pb.window_kappa, 0.005)?;
        let expected = 2f64.powf(r.q * p / (r.q - p - 2.0));
        rep.check(Check::at_most("window_scaling_rel_err", (t2 / t1 / expected - 1.0).abs(), 0.05));
        rep.result("window", json!({"full_norm": t1, "half_norm": t2, "expected_ratio": expected}));
    }

    rep.result("contraction", r);
    let rows = (0..r.distances.len()).map(|k| {
        vec![
            (k + 1).to_string(),
            num(r.distances[k]),
            if k == 0 { String::new() } else { num(r.ratios[k - 1]) },
            num(r.ball_norms[k + 1]),
        ]
    });
    rep.csv("iterations.csv", csv_table(&["iteration", "distance", "ratio", "ball_norm"], rows));
    rep.csv("diagnostics.csv", diagnostics_csv(out.trajectory.diagnostics())?);
    rep.binary.push(("checkpoints/final.wfld".into(), field_bytes(out.trajectory.last())?));
    Ok(rep)
}

