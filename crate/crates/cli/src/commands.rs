//! The five subcommands. Each returns an [`Outcome`] for the driver to write.

use bo_core::algebra::Comparability;
use bo_core::estimates::{
    decay_fit, difference_scan, exhaustive_bound_scan, sample_field, standard_samplers, suite_scan, Bound, DecayFit,
    DecayTerm, LemmaId, Profile, RatioRecord, SamplerSpec,
};
use bo_core::fourier::{sobolev_norm, GridSpec, SpectralField};
use bo_core::gauge::{gauge_forward, gauge_inverse, omega_of};
use bo_core::nfr::{
    all_terms, dbp_identity_residual, omega_equation_residual, partition_residuals, second_stage_sizes, NfrConfig,
    TermId, DIRECT_MAX_BAND,
};
use bo_core::solver::{
    integrate_bo, uniqueness_experiment, v_tail_sup, ContractionModel, SolverConfig, Trajectory, UniquenessConfig,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{Datum, RunConfig};
use crate::report::{num, opt, Check, Outcome, Table};

pub enum CmdError {
    /// Parameters the library refused; exit status 2.
    Config(String),
    /// The computation itself broke down; exit status 1.
    Run(String),
}

impl From<bo_core::Error> for CmdError {
    fn from(e: bo_core::Error) -> Self {
        match e {
            bo_core::Error::BlowUp { .. } => CmdError::Run(e.to_string()),
            _ => CmdError::Config(e.to_string()),
        }
    }
}

type Res<T> = Result<T, CmdError>;

fn nfr(cfg: &RunConfig, n_max: usize) -> Res<NfrConfig> {
    Ok(NfrConfig::new(cfg.m, cfg.s, Comparability::new(cfg.k_const)?, n_max)?)
}

/// Real mean-zero field on `|n| ≤ band`, zero-padded to `n_max`, with ℓ² size `amp`.
fn band_limited(n_max: usize, band: usize, amp: f64, seed: u64) -> Res<SpectralField> {
    let spec = SamplerSpec::new(band.max(1), 0.0, Profile::RandomPhase, seed);
    let low = sample_field(&spec, amp);
    Ok(SpectralField::from_fn(GridSpec::dealiased(n_max)?, |n| low.coeff(n)))
}

fn initial_datum(cfg: &RunConfig, n_max: usize) -> Res<SpectralField> {
    let grid = GridSpec::dealiased(n_max)?;
    let a = cfg.amplitude;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    Ok(match cfg.datum {
        Datum::Zero => SpectralField::zeros(grid),
        Datum::Cos => SpectralField::from_modes(grid, &[(1, c(a, 0.0)), (-1, c(a, 0.0))])?,
        Datum::TwoMode => SpectralField::from_modes(
            grid,
            &[
                (1, c(a, 0.0)),
                (-1, c(a, 0.0)),
                (2, c(0.5 * a, 0.3 * a)),
                (-2, c(0.5 * a, -0.3 * a)),
            ],
        )?,
        Datum::Random => band_limited(n_max, n_max / 4, a, cfg.seed)?,
    })
}

fn checks_table(checks: &[Check]) -> Table {
    let mut t = Table::new(&["check", "value", "tolerance", "passed"]);
    for c in checks {
        t.push(vec![c.name.clone(), num(c.value), num(c.tolerance), c.passed.to_string()]);
    }
    t
}

fn checks_outcome(checks: Vec<Check>, extra: serde_json::Value) -> Outcome {
    let passed = checks.iter().all(|c| c.passed);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let table = checks_table(&checks);
    Outcome {
        passed,
        results: json!({ "checks": checks, "failed": failed, "details": extra }),
        table,
    }
}

pub fn verify_identities(cfg: &RunConfig) -> Res<Outcome> {
    let k = Comparability::new(cfg.k_const)?;
    let mut checks = Vec::new();

    // exact integer scans
    let nq = cfg.n_max.min(64);
    for bound in [Bound::PhiFactorisation, Bound::M1SignImplications] {
        let r = exhaustive_bound_scan(bound, nq, k)?;
        checks.push(
            Check::at_most(bound.name(), r.violations as f64, 0.0)
                .with_detail(format!("{} tuples, |n_i| ≤ {nq}", r.tuples)),
        );
    }
    let ns = cfg.n_max.min(32);
    let a1 = exhaustive_bound_scan(Bound::A1Stacked, ns, k)?;
    checks.push(
        Check::at_most("a1-second-branch-sign", a1.violations as f64, 0.0)
            .with_detail(format!("{} tuples, |n_i| ≤ {ns}, K = {}", a1.tuples, cfg.k_const)),
    );

    // The discrete gauge loses the spectral tail of V beyond the band, so the
    // field checks use small data on the lowest eighth of the band.
    let field_band = (cfg.n_max / 8).max(1);
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let u = band_limited(cfg.n_max, field_band, 0.25, cfg.seed.wrapping_add(i))?;
        let back = gauge_inverse(&gauge_forward(&u)?);
        worst = worst.max(sobolev_norm(&back.sub(&u)?, 1.0));
    }
    checks.push(
        Check::at_most("gauge-round-trip", worst, 1e-8).with_detail(format!("10 fields on |n| ≤ {field_band}, ℓ² size 0.25, H¹ error")),
    );

    // reduction identities on a band the direct loops can afford
    let nd = cfg.n_max.min(16);
    let ncfg = nfr(cfg, nd)?;
    let mut dbp = [0.0f64; 3];
    let mut part = [0.0f64; 3];
    for i in 0..4u64 {
        let u = band_limited(nd, (nd / 4).max(1), 0.5, cfg.seed.wrapping_add(100 + i))?;
        let omega = omega_of(&gauge_forward(&u)?.v, 0.1 * i as f64 + 0.05);
        let r = dbp_identity_residual(&u, &omega, &ncfg)?;
        for (w, x) in dbp.iter_mut().zip([r.first, r.second_a1, r.second_a3]) {
            *w = w.max(x.relative);
        }
        let p = partition_residuals(&u, &omega, &ncfg)?;
        for (w, x) in part.iter_mut().zip([Some(p.first), p.n1, p.n3]) {
            *w = w.max(x.map_or(0.0, |x| x.relative));
        }
    }
    let sizes = second_stage_sizes(nd, k);
    let at = format!("n_max {nd}, |A₁| = {}, |A₃| = {}", sizes.a1, sizes.a3);
    for (name, v) in ["dbp-first", "dbp-second-a1", "dbp-second-a3"].iter().zip(dbp) {
        checks.push(Check::at_most(*name, v, 1e-10).with_detail(at.clone()));
    }
    for (name, v) in ["partition-first", "partition-n1", "partition-n3"].iter().zip(part) {
        checks.push(Check::at_most(*name, v, 1e-12).with_detail(at.clone()));
    }

    let ne = cfg.n_max.min(DIRECT_MAX_BAND);
    let u = band_limited(ne, (ne / 8).max(1), 0.25, cfg.seed.wrapping_add(200))?;
    let eq = omega_equation_residual(&u, 0.3, cfg.s)?;
    checks.push(Check::at_most("omega-equation", eq.relative, 1e-8).with_detail(format!("n_max {ne}")));

    Ok(checks_outcome(checks, json!({ "second_stage": sizes })))
}

fn ratio_rows(table: &mut Table, records: &[RatioRecord]) {
    let cell = |x: f64| if x.is_nan() { String::new() } else { num(x) };
    for r in records {
        table.push(vec![
            r.lemma.clone(),
            num(r.s),
            num(r.m),
            r.n_max.to_string(),
            r.samples.to_string(),
            cell(r.max),
            cell(r.min),
            cell(r.median),
            opt(r.slope),
        ]);
    }
}

fn samplers(cfg: &RunConfig, n_max: usize, total: usize) -> Vec<SamplerSpec> {
    let fixed = standard_samplers(n_max, cfg.s, 0, cfg.seed).len();
    standard_samplers(n_max, cfg.s, total.saturating_sub(fixed), cfg.seed)
}

fn decay_fits(cfg: &RunConfig, ncfg: &NfrConfig, n_max: usize) -> Res<Vec<DecayFit>> {
    let ms = cfg.m_sweep.values();
    let sm = samplers(cfg, n_max, cfg.samples);
    DecayTerm::ALL
        .iter()
        .map(|&t| decay_fit(t, &ms, &sm, ncfg).map_err(CmdError::from))
        .collect()
}

pub fn verify_estimates(cfg: &RunConfig) -> Res<Outcome> {
    let ncfg = nfr(cfg, cfg.n_max)?;
    ncfg.check_estimate_range()?;
    let records = suite_scan(&LemmaId::suite(cfg.s), &samplers(cfg, cfg.n_max, cfg.samples), &ncfg)?;
    let fits = decay_fits(cfg, &ncfg, cfg.n_max)?;

    let mut checks: Vec<Check> = records
        .iter()
        .map(|r| Check::at_most(format!("finite-{}", r.lemma), if r.max.is_finite() { 0.0 } else { 1.0 }, 0.0))
        .collect();
    for f in &fits {
        let slope = f.slope.unwrap_or(f64::NAN);
        checks.push(Check {
            name: format!("decay-{:?}", f.term),
            value: slope,
            tolerance: -0.02,
            passed: slope < -0.02,
            detail: Some(format!("fitted over {:.1} octaves", f.fitted_octaves)),
        });
    }
    let mut table = Table::new(&["lemma", "s", "M", "n_max", "samples", "max", "min", "median", "slope"]);
    ratio_rows(&mut table, &records);
    for f in &fits {
        ratio_rows(&mut table, &f.records());
    }
    let passed = checks.iter().all(|c| c.passed);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    Ok(Outcome {
        passed,
        results: json!({ "checks": checks, "failed": failed, "records": records, "decay": fits }),
        table,
    })
}

#[derive(Serialize)]
struct TermNorm {
    term: &'static str,
    norm: f64,
}

pub fn nfr_check(cfg: &RunConfig) -> Res<Outcome> {
    let ncfg = nfr(cfg, cfg.n_max)?;
    let u = initial_datum(cfg, cfg.n_max)?;
    let omega = omega_of(&gauge_forward(&u)?.v, cfg.time);
    let set = all_terms(&u, &omega, &ncfg)?;
    let norms: Vec<TermNorm> = TermId::ALL
        .iter()
        .map(|&id| TermNorm { term: id.name(), norm: set.get(id).l2s(cfg.s) })
        .collect();
    let dbp = dbp_identity_residual(&u, &omega, &ncfg)?;
    let part = partition_residuals(&u, &omega, &ncfg)?;
    let mut checks = vec![
        Check::at_most("dbp-first", dbp.first.relative, 1e-10),
        Check::at_most("dbp-second-a1", dbp.second_a1.relative, 1e-10),
        Check::at_most("dbp-second-a3", dbp.second_a3.relative, 1e-10),
        Check::at_most("partition-first", part.first.relative, 1e-12),
    ];
    for (name, r) in [("partition-n1", part.n1), ("partition-n3", part.n3)] {
        if let Some(r) = r {
            checks.push(Check::at_most(name, r.relative, 1e-12));
        }
    }
    let mut out = checks_outcome(
        checks,
        json!({
            "second_stage": second_stage_sizes(cfg.n_max, ncfg.k),
            "terms": norms,
        }),
    );
    let mut table = Table::new(&["term", "norm"]);
    for t in &norms {
        table.push(vec![t.term.to_string(), num(t.norm)]);
    }
    out.table = table;
    Ok(out)
}

fn solver_config(cfg: &RunConfig, dt: f64) -> Res<SolverConfig> {
    let base = SolverConfig::new(cfg.n_max, dt, cfg.time)?;
    // keep about 64 stored states
    let steps = base.steps();
    let every = (1..=steps.div_ceil(64)).rev().find(|k| steps % k == 0).unwrap_or(1);
    Ok(base.with_record_every(every)?)
}

#[derive(Serialize)]
struct ConvergenceRow {
    dt: f64,
    /// `max |û_dt - û_{dt/2}|` at the final time.
    difference: f64,
    ratio: Option<f64>,
    order: Option<f64>,
}

/// Successive-halving differences of the final state.
fn convergence(cfg: &RunConfig, u0: &SpectralField) -> Res<Vec<ConvergenceRow>> {
    if cfg.dt_levels == 0 {
        return Ok(Vec::new());
    }
    let finals: Vec<SpectralField> = (0..=cfg.dt_levels)
        .into_par_iter()
        .map(|j| {
            let sc = SolverConfig::new(cfg.n_max, cfg.dt / 2f64.powi(j as i32), cfg.time)?;
            Ok(integrate_bo(u0, &sc)?.last().clone())
        })
        .collect::<Res<_>>()?;
    let diffs: Vec<f64> = finals.windows(2).map(|w| w[0].max_abs_diff(&w[1])).collect();
    Ok(diffs
        .iter()
        .enumerate()
        .map(|(j, &d)| {
            let ratio = (j > 0 && d > 0.0).then(|| diffs[j - 1] / d);
            ConvergenceRow {
                dt: cfg.dt / 2f64.powi(j as i32),
                difference: d,
                ratio,
                order: ratio.map(f64::log2),
            }
        })
        .collect())
}

pub struct Simulation {
    pub outcome: Outcome,
    pub trajectory: Trajectory,
}

pub fn simulate(cfg: &RunConfig) -> Res<Simulation> {
    let u0 = initial_datum(cfg, cfg.n_max)?;
    let traj = integrate_bo(&u0, &solver_config(cfg, cfg.dt)?)?;
    let m0 = traj.conservation[0].mass;
    let mass_drift = traj
        .conservation
        .iter()
        .map(|c| (c.mass - m0).abs())
        .fold(0.0, f64::max);
    let rows = convergence(cfg, &u0)?;
    let checks = vec![
        Check::at_most("mean-drift", traj.mean_drift(), 1e-13),
        Check::at_most("max-imag", traj.max_imag(), 1e-11),
    ];
    let mut outcome = checks_outcome(
        checks,
        json!({
            "steps": SolverConfig::new(cfg.n_max, cfg.dt, cfg.time)?.steps(),
            "stored_states": traj.times.len(),
            "mass": m0,
            "mass_drift": mass_drift,
            "final_h_s_norm": sobolev_norm(traj.last(), cfg.s),
            "convergence": rows,
        }),
    );
    outcome.table = if rows.is_empty() {
        let mut t = Table::new(&["t", "n", "re", "im"]);
        for (time, u) in traj.times.iter().zip(&traj.fields) {
            for (n, c) in u.iter() {
                t.push(vec![num(*time), n.to_string(), num(c.re), num(c.im)]);
            }
        }
        t
    } else {
        let mut t = Table::new(&["dt", "difference", "ratio", "order"]);
        for r in &rows {
            t.push(vec![num(r.dt), num(r.difference), opt(r.ratio), opt(r.order)]);
        }
        t
    };
    Ok(Simulation { outcome, trajectory: traj })
}

#[derive(Serialize)]
struct SweepRow {
    dt: f64,
    sup_total: f64,
    sup_omega_diff: f64,
}

pub fn uniqueness(cfg: &RunConfig) -> Res<Outcome> {
    let s = cfg.s;
    let ncfg = nfr(cfg, cfg.n_max)?;
    ncfg.check_estimate_range()?;
    let u0 = initial_datum(cfg, cfg.n_max)?;
    let ucfg = UniquenessConfig { s, n_split: cfg.n_split, m: cfg.m, samples: 4 };
    let pair = |dt: f64| -> Res<_> {
        let a = SolverConfig::new(cfg.n_max, dt, cfg.time)?;
        let b = SolverConfig::new(cfg.n_max, dt / 2.0, cfg.time)?;
        Ok(uniqueness_experiment(&u0, &a, &b, &ucfg)?)
    };
    let report = pair(cfg.dt)?;
    let mut sweep = vec![SweepRow { dt: cfg.dt, sup_total: report.sup_total, sup_omega_diff: report.sup_omega_diff }];
    for j in 1..=cfg.dt_levels {
        let dt = cfg.dt / 2f64.powi(j as i32);
        let r = pair(dt)?;
        sweep.push(SweepRow { dt, sup_total: r.sup_total, sup_omega_diff: r.sup_omega_diff });
    }

    // C̃ from measured difference constants and the solution size
    let sm = samplers(cfg, cfg.n_max, cfg.samples.min(32));
    let constants: Vec<f64> = LemmaId::suite(s)
        .iter()
        .map(|l| difference_scan(l, &sm, 1e-3, &ncfg).map(|r| r.max))
        .collect::<bo_core::Result<_>>()?;
    let fits = decay_fits(cfg, &ncfg, cfg.n_max)?;
    let delta_hat = fits
        .iter()
        .filter_map(|f| f.slope)
        .map(|x| -x)
        .fold(f64::INFINITY, f64::min);
    let mut checks = Vec::new();
    let mut choice = None;
    if delta_hat.is_finite() && delta_hat > 0.0 {
        let model = ContractionModel::assemble(&constants, report.u_norm, delta_hat, s)?;
        let traj = integrate_bo(&u0, &SolverConfig::new(cfg.n_max, cfg.dt, cfg.time)?)?;
        let ns: Vec<usize> = (2..=30).map(|j| 1usize << j).collect();
        let ms: Vec<f64> = (4..=80).map(|j| 2f64.powi(j)).collect();
        let c = model.choose(&ns, &ms, cfg.time, |n| v_tail_sup(&traj, n / 2, s))?;
        checks.push(
            Check {
                name: "contraction-factor".into(),
                value: c.factor,
                tolerance: 1.0,
                passed: c.factor < 1.0,
                detail: None,
            }
            .with_detail(format!("C̃ = {:.4e}, δ̂ = {delta_hat:.4}", model.c_tilde)),
        );
        choice = Some(json!({ "model": model, "choice": c }));
    } else {
        checks.push(Check {
            name: "contraction-factor".into(),
            value: f64::NAN,
            tolerance: 1.0,
            passed: false,
            detail: Some("no decaying fit, so no δ̂ to assemble the factor with".into()),
        });
    }
    if sweep.len() > 1 {
        let rising = sweep.windows(2).filter(|w| !(w[1].sup_total < w[0].sup_total)).count();
        checks.push(
            Check::at_most("separation-decreases-with-dt", rising as f64, 0.0)
                .with_detail("count of dt halvings that did not shrink sup‖u-ũ‖"),
        );
    }
    let mut table = Table::new(&["t", "low", "high", "total", "omega_diff"]);
    for x in &report.series {
        table.push(vec![num(x.t), num(x.low), num(x.high), num(x.total), num(x.omega_diff)]);
    }
    let mut out = checks_outcome(
        checks,
        json!({
            "experiment": report,
            "dt_sweep": sweep,
            "difference_constants": constants,
            "decay": fits,
            "contraction": choice,
        }),
    );
    out.table = table;
    Ok(out)
}
