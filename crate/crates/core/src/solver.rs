//! Pseudospectral time integration and the two-discretization uniqueness experiment.
//!
//! The Benjamin–Ono flow is integrated in the interaction picture: with
//! `w(n) = e^{itn|n|} û(n)` the linear part disappears and
//! `∂t w(n) = e^{itn|n|} in (u²)^(n)` is advanced by classical RK4.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, input, Error, Result};
use crate::fourier::{
    analyze_band, apply_projection, dealiased_product, sobolev_norm, synthesize, synthesize_on,
    GridSpec, Projection, SpectralField,
};
use crate::gauge::{gauge_forward, gauge_from_v, gauge_inverse, omega_of, v_of_on};
use crate::nfr::{all_terms, time_derivative, DuhamelSample, NfrConfig};
use crate::omega::{linear_phase, OmegaState};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Rk4IntegratingFactor,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: GridSpec,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    /// Alias-free products; when false, products are formed on `2·n_max + 1` points.
    pub dealias: bool,
    /// `dt ≤ cfl / n_max²`.
    pub cfl: f64,
    /// Keep every `record_every`-th step (the final state is always kept).
    pub record_every: usize,
}

impl SolverConfig {
    pub fn new(n_max: usize, dt: f64, t_end: f64) -> Result<Self> {
        let cfg = Self {
            grid: GridSpec::dealiased(n_max)?,
            dt,
            t_end,
            scheme: Scheme::Rk4IntegratingFactor,
            dealias: true,
            cfl: 0.5,
            record_every: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_record_every(mut self, k: usize) -> Result<Self> {
        self.record_every = k;
        self.validate()?;
        Ok(self)
    }

    pub fn with_cfl(mut self, c: f64) -> Result<Self> {
        self.cfl = c;
        self.validate()?;
        Ok(self)
    }

    pub fn n_max(&self) -> usize {
        self.grid.n_max()
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return config(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return config(format!("final time must be positive, got {}", self.t_end));
        }
        if !(self.cfl.is_finite() && self.cfl > 0.0) {
            return config("CFL constant must be positive");
        }
        let n = self.n_max() as f64;
        if self.dt > self.cfl / (n * n) {
            return config(format!(
                "dt = {} violates dt ≤ {}/n_max² = {:.3e}",
                self.dt,
                self.cfl,
                self.cfl / (n * n)
            ));
        }
        let steps = self.steps();
        if steps == 0 || (steps as f64 * self.dt - self.t_end).abs() > 1e-9 * self.t_end {
            return config(format!(
                "final time {} is not a whole number of steps of {}",
                self.t_end, self.dt
            ));
        }
        if self.record_every == 0 {
            return config("record_every must be at least 1");
        }
        Ok(())
    }
}

/// Diagnostics recorded alongside each stored state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conservation {
    pub t: f64,
    /// `|û(0)|`.
    pub mean: f64,
    /// `Σ |û(n)|²`, conserved by the flow.
    pub mass: f64,
    /// Largest imaginary part of the synthesized field.
    pub max_imag: f64,
}

impl Conservation {
    fn of(u: &SpectralField, t: f64) -> Self {
        Self {
            t,
            mean: u.coeff(0).norm(),
            mass: u.iter().map(|(_, c)| c.norm_sqr()).sum(),
            max_imag: synthesize(u).iter().map(|z| z.im.abs()).fold(0.0, f64::max),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub config: SolverConfig,
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField>,
    /// Empty unless the run advanced `ω`.
    pub omegas: Vec<OmegaState>,
    pub conservation: Vec<Conservation>,
}

impl Trajectory {
    fn new(config: SolverConfig) -> Self {
        Self {
            config,
            times: Vec::new(),
            fields: Vec::new(),
            omegas: Vec::new(),
            conservation: Vec::new(),
        }
    }

    fn push(&mut self, t: f64, u: SpectralField, omega: Option<OmegaState>) {
        self.conservation.push(Conservation::of(&u, t));
        self.times.push(t);
        self.fields.push(u);
        if let Some(w) = omega {
            self.omegas.push(w);
        }
    }

    pub fn last(&self) -> &SpectralField {
        self.fields.last().expect("trajectory holds the initial state")
    }

    /// Largest `|û(t, 0) - û(0, 0)|` over the stored states.
    pub fn mean_drift(&self) -> f64 {
        let m0 = self.fields[0].coeff(0);
        self.fields
            .iter()
            .map(|u| (u.coeff(0) - m0).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.conservation.iter().map(|c| c.max_imag).fold(0.0, f64::max)
    }

    /// Tidy `t,n,re,im` rows of the stored fields.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "t,n,re,im")?;
        for (t, u) in self.times.iter().zip(&self.fields) {
            for (n, c) in u.iter() {
                writeln!(w, "{t},{n},{},{}", c.re, c.im)?;
            }
        }
        Ok(())
    }

    pub fn write_omega_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "t,n,re,im")?;
        for om in &self.omegas {
            for (n, c) in om.iter() {
                writeln!(w, "{},{n},{},{}", om.t(), c.re, c.im)?;
            }
        }
        Ok(())
    }
}

fn require_real_mean_zero(u: &SpectralField) -> Result<()> {
    if !u.is_real() {
        return domain("initial datum must be real (Hermitian-symmetric coefficients)");
    }
    if !u.is_mean_zero() {
        return domain(format!(
            "initial datum must be mean-zero, mean is {}; remove it with gauge::remove_mean",
            u.coeff(0)
        ));
    }
    Ok(())
}

/// Hermitian projection with the mean pinned to zero.
fn clean(u: SpectralField) -> SpectralField {
    let grid = u.grid();
    SpectralField::from_fn(grid, |n| {
        if n == 0 {
            ZERO
        } else {
            (u.coeff(n) + u.coeff(-n).conj()) * 0.5
        }
    })
}

fn square(u: &SpectralField, dealias: bool) -> SpectralField {
    if dealias {
        dealiased_product(u, u, u.n_max())
    } else {
        let points = 2 * u.n_max() + 1;
        let s: Vec<Complex64> = synthesize_on(u, points).iter().map(|z| z * z).collect();
        analyze_band(&s, u.n_max()).with_grid(u.grid())
    }
}

/// `F(t, w) = e^{itn|n|} in (u²)^(n)` with `û = e^{-itn|n|} w`.
fn bo_rhs(t: f64, w: &SpectralField, dealias: bool) -> SpectralField {
    let u = w.map_coeffs(|n, c| linear_phase(-t, n) * c);
    let sq = square(&u, dealias);
    w.map_coeffs(|n, _| linear_phase(t, n) * Complex64::new(0.0, n as f64) * sq.coeff(n))
}

fn axpy(a: &SpectralField, h: f64, b: &SpectralField) -> SpectralField {
    a.map_coeffs(|n, c| c + b.coeff(n) * h)
}

fn finite(u: &SpectralField) -> bool {
    u.coeffs().iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// One integrating-factor RK4 step of size `h` (negative `h` steps backwards).
fn bo_step(u: &SpectralField, t: f64, h: f64, dealias: bool) -> SpectralField {
    let w = u.map_coeffs(|n, c| linear_phase(t, n) * c);
    let k1 = bo_rhs(t, &w, dealias);
    let k2 = bo_rhs(t + 0.5 * h, &axpy(&w, 0.5 * h, &k1), dealias);
    let k3 = bo_rhs(t + 0.5 * h, &axpy(&w, 0.5 * h, &k2), dealias);
    let k4 = bo_rhs(t + h, &axpy(&w, h, &k3), dealias);
    let next = w.map_coeffs(|n, c| {
        c + (k1.coeff(n) + k2.coeff(n) * 2.0 + k3.coeff(n) * 2.0 + k4.coeff(n)) * (h / 6.0)
    });
    clean(next.map_coeffs(|n, c| linear_phase(-(t + h), n) * c))
}

/// Advances `u` from `t0` by `steps` steps of signed size `h`.
pub fn evolve(u: &SpectralField, t0: f64, h: f64, steps: usize) -> Result<SpectralField> {
    require_real_mean_zero(u)?;
    let mut cur = clean(u.clone());
    let mut t = t0;
    for _ in 0..steps {
        let next = bo_step(&cur, t, h, true);
        if !finite(&next) {
            return Err(Error::BlowUp { last_good_time: t });
        }
        cur = next;
        t += h;
    }
    Ok(cur)
}

/// Integrates the Benjamin–Ono equation from a real mean-zero datum.
pub fn integrate_bo(u0: &SpectralField, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    require_real_mean_zero(u0)?;
    if u0.band_limit() > cfg.n_max() {
        return input(format!(
            "datum has modes up to {} beyond the solver band {}",
            u0.band_limit(),
            cfg.n_max()
        ));
    }
    let mut u = clean(u0.with_grid(cfg.grid));
    let mut traj = Trajectory::new(*cfg);
    traj.push(0.0, u.clone(), None);
    let steps = cfg.steps();
    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        let next = bo_step(&u, t, cfg.dt, cfg.dealias);
        if !finite(&next) {
            return Err(Error::BlowUp { last_good_time: t });
        }
        u = next;
        if (k + 1) % cfg.record_every == 0 || k + 1 == steps {
            traj.push((k + 1) as f64 * cfg.dt, u.clone(), None);
        }
    }
    Ok(traj)
}

/// How `ω` is advanced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaMode {
    /// RK4 on `∂t ω = N[ω] + 𝓡[u, ω]`.
    Direct,
    /// Integral form on `n > 0`: boundary term `N⁽⁰⁾` plus trapezoid quadrature of
    /// `N⁽¹⁾`, with a direct RK4 predictor (which also supplies `n ≤ 0`).
    NfrForm,
}

/// `u` reconstructed from `ω` through `v` and the inverse gauge transform.
pub fn field_of_omega(omega: &OmegaState, grid: GridSpec) -> SpectralField {
    let v = v_of_on(omega, grid);
    clean(gauge_inverse(&gauge_from_v(&v)))
}

fn omega_rhs(omega: &OmegaState, grid: GridSpec) -> Result<OmegaState> {
    let u = field_of_omega(omega, grid);
    time_derivative(&u, omega)
}

fn omega_rk4(omega: &OmegaState, h: f64, grid: GridSpec) -> Result<OmegaState> {
    let t = omega.t();
    let k1 = omega_rhs(omega, grid)?;
    let s2 = omega.axpy(0.5 * h, &k1)?.with_time(t + 0.5 * h);
    let k2 = omega_rhs(&s2, grid)?;
    let s3 = omega.axpy(0.5 * h, &k2)?.with_time(t + 0.5 * h);
    let k3 = omega_rhs(&s3, grid)?;
    let s4 = omega.axpy(h, &k3)?.with_time(t + h);
    let k4 = omega_rhs(&s4, grid)?;
    Ok(omega
        .axpy(h / 6.0, &k1)?
        .axpy(h / 3.0, &k2)?
        .axpy(h / 3.0, &k3)?
        .axpy(h / 6.0, &k4)?
        .with_time(t + h))
}

fn omega_finite(w: &OmegaState) -> bool {
    w.seq().iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// Integrates the `ω`-formulation from the gauge transform of `u0`.
pub fn integrate_omega(u0: &SpectralField, cfg: &SolverConfig, nfr: &NfrConfig, mode: OmegaMode) -> Result<Trajectory> {
    cfg.validate()?;
    require_real_mean_zero(u0)?;
    if nfr.n_max != cfg.n_max() {
        return config(format!(
            "reduction band {} differs from solver band {}",
            nfr.n_max,
            cfg.n_max()
        ));
    }
    let grid = cfg.grid;
    let u0 = clean(u0.with_grid(grid));
    let mut omega = omega_of(&gauge_forward(&u0)?.v, 0.0);
    let mut traj = Trajectory::new(*cfg);
    traj.push(0.0, field_of_omega(&omega, grid), Some(omega.clone()));
    let mut aggs = match mode {
        OmegaMode::NfrForm => {
            let set = all_terms(&field_of_omega(&omega, grid), &omega, nfr)?;
            Some((set.agg0, set.agg1))
        }
        OmegaMode::Direct => None,
    };
    let steps = cfg.steps();
    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        let pred = omega_rk4(&omega, cfg.dt, grid)?;
        if !omega_finite(&pred) {
            return Err(Error::BlowUp { last_good_time: t });
        }
        let next = match aggs.take() {
            None => pred,
            Some((a0, a1)) => {
                let set = all_terms(&field_of_omega(&pred, grid), &pred, nfr)?;
                let h = cfg.dt;
                let corrected = OmegaState::from_fn(nfr.n_max, t + h, |n| {
                    if n > 0 {
                        omega.get(n) + set.agg0.get(n) - a0.get(n)
                            + (a1.get(n) + set.agg1.get(n)) * (0.5 * h)
                    } else {
                        pred.get(n)
                    }
                });
                let set = all_terms(&field_of_omega(&corrected, grid), &corrected, nfr)?;
                aggs = Some((set.agg0, set.agg1));
                corrected
            }
        };
        if !omega_finite(&next) {
            return Err(Error::BlowUp { last_good_time: t });
        }
        omega = next;
        if (k + 1) % cfg.record_every == 0 || k + 1 == steps {
            traj.push(omega.t(), field_of_omega(&omega, grid), Some(omega.clone()));
        }
    }
    Ok(traj)
}

/// Samples for the integral-form residual, one per stored `ω`.
pub fn duhamel_samples(traj: &Trajectory, nfr: &NfrConfig) -> Result<Vec<DuhamelSample>> {
    if traj.omegas.is_empty() {
        return input("trajectory carries no ω samples");
    }
    traj.omegas
        .par_iter()
        .zip(&traj.fields)
        .map(|(w, u)| DuhamelSample::at(u, w, nfr))
        .collect()
}

/// `H^s` norm of the difference of two fields over the union of their bands.
fn diff_norm(a: &SpectralField, b: &SpectralField, s: f64, keep: impl Fn(i64) -> bool) -> f64 {
    let n = a.n_max().max(b.n_max()) as i64;
    (-n..=n)
        .filter(|&k| keep(k))
        .map(|k| crate::fourier::bracket(k).powf(2.0 * s) * (a.coeff(k) - b.coeff(k)).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessConfig {
    pub s: f64,
    /// Frequency split `N`.
    pub n_split: usize,
    /// Resonance threshold `M` used for the measured constants.
    pub m: f64,
    /// Number of comparison times after `t = 0`.
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessSample {
    pub t: f64,
    /// `‖P_{≤N}(u - ũ)‖_{H^s}`.
    pub low: f64,
    /// `‖P_{>N}(u - ũ)‖_{H^s}`.
    pub high: f64,
    /// `‖u - ũ‖_{H^s}`.
    pub total: f64,
    /// `‖1_{n>0}(ω - ω̃)‖_{ℓ²_s}`.
    pub omega_diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub config: UniquenessConfig,
    pub dt_a: f64,
    pub dt_b: f64,
    pub n_max_a: usize,
    pub n_max_b: usize,
    pub series: Vec<UniquenessSample>,
    /// `‖u - ũ‖_{C_T H^s}`.
    pub sup_total: f64,
    pub sup_low: f64,
    pub sup_high: f64,
    pub sup_omega_diff: f64,
    /// `max_t |total² - low² - high²|`.
    pub orthogonality_defect: f64,
    /// `sup_t ‖P_{>N/2} v(t)‖_{H^s}` on the first trajectory.
    pub v_tail: f64,
    /// `sup_t ‖u(t)‖_{H^s}` on the first trajectory.
    pub u_norm: f64,
}

fn aligned(cfg: &SolverConfig, samples: usize) -> Result<SolverConfig> {
    let steps = cfg.steps();
    if samples == 0 || steps % samples != 0 {
        return config(format!(
            "{steps} steps cannot be split into {samples} equal comparison intervals"
        ));
    }
    let mut c = *cfg;
    c.record_every = steps / samples;
    Ok(c)
}

/// `sup_t ‖P_{>cut} v(t)‖_{H^s}` along a trajectory.
pub fn v_tail_sup(traj: &Trajectory, cut: usize, s: f64) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for u in &traj.fields {
        let v = gauge_forward(u)?.v;
        let tail = apply_projection(&v, Projection::HighPass(cut));
        sup = sup.max(sobolev_norm(&tail, s));
    }
    Ok(sup)
}

/// Runs the same datum under two discretizations and measures their separation.
pub fn uniqueness_experiment(
    u0: &SpectralField,
    cfg_a: &SolverConfig,
    cfg_b: &SolverConfig,
    ucfg: &UniquenessConfig,
) -> Result<UniquenessReport> {
    if (cfg_a.t_end - cfg_b.t_end).abs() > 1e-12 * cfg_a.t_end {
        return config("both discretizations must run to the same final time");
    }
    let ca = aligned(cfg_a, ucfg.samples)?;
    let cb = aligned(cfg_b, ucfg.samples)?;
    let (ta, tb) = rayon::join(|| integrate_bo(u0, &ca), || integrate_bo(u0, &cb));
    let (ta, tb) = (ta?, tb?);
    let s = ucfg.s;
    let n_split = ucfg.n_split as i64;
    let series: Vec<UniquenessSample> = ta
        .fields
        .par_iter()
        .zip(&tb.fields)
        .zip(&ta.times)
        .map(|((a, b), &t)| {
            let wa = omega_of(&gauge_forward(a)?.v, t);
            let wb = omega_of(&gauge_forward(b)?.v, t);
            let n = wa.n_max().max(wb.n_max()) as i64;
            let omega_diff = (1..=n)
                .map(|k| crate::fourier::bracket(k).powf(2.0 * s) * (wa.get(k) - wb.get(k)).norm_sqr())
                .sum::<f64>()
                .sqrt();
            Ok(UniquenessSample {
                t,
                low: diff_norm(a, b, s, |k| k.abs() <= n_split),
                high: diff_norm(a, b, s, |k| k.abs() > n_split),
                total: diff_norm(a, b, s, |_| true),
                omega_diff,
            })
        })
        .collect::<Result<_>>()?;
    let sup = |f: fn(&UniquenessSample) -> f64| series.iter().map(f).fold(0.0, f64::max);
    let orthogonality_defect = series
        .iter()
        .map(|x| (x.total * x.total - x.low * x.low - x.high * x.high).abs())
        .fold(0.0, f64::max);
    Ok(UniquenessReport {
        config: *ucfg,
        dt_a: cfg_a.dt,
        dt_b: cfg_b.dt,
        n_max_a: cfg_a.n_max(),
        n_max_b: cfg_b.n_max(),
        sup_total: sup(|x| x.total),
        sup_low: sup(|x| x.low),
        sup_high: sup(|x| x.high),
        sup_omega_diff: sup(|x| x.omega_diff),
        orthogonality_defect,
        v_tail: v_tail_sup(&ta, ucfg.n_split / 2, s)?,
        u_norm: ta.fields.iter().map(|u| sobolev_norm(u, s)).fold(0.0, f64::max),
        series,
    })
}

/// The contraction factor `C̃(T'(N² + M) + N^{-s} + ‖P_{>N/2}v‖ + M^{-δ̂})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionModel {
    pub c_tilde: f64,
    /// Decay exponent `δ̂ > 0` (minus the fitted slope).
    pub delta_hat: f64,
    pub s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionChoice {
    pub n_split: usize,
    pub m: f64,
    pub t_prime: f64,
    pub v_tail: f64,
    pub factor: f64,
}

impl ContractionModel {
    /// `C̃ = max(1, C₁, …) · (1 + ‖u‖_{C_T H^s})⁵` from measured difference-ratio
    /// maxima `C_i` and the solution size. The power covers the quintic terms.
    pub fn assemble(constants: &[f64], u_norm: f64, delta_hat: f64, s: f64) -> Result<Self> {
        if !(delta_hat.is_finite() && delta_hat > 0.0) {
            return input(format!("decay exponent must be positive, got {delta_hat}"));
        }
        if constants.iter().any(|c| !c.is_finite() || *c < 0.0) || !(u_norm >= 0.0) {
            return input("constants and norms must be finite and nonnegative");
        }
        let c = constants.iter().copied().fold(1.0, f64::max);
        Ok(Self {
            c_tilde: c * (1.0 + u_norm).powi(5),
            delta_hat,
            s,
        })
    }

    pub fn factor(&self, n_split: usize, m: f64, t_prime: f64, v_tail: f64) -> f64 {
        let n = n_split as f64;
        self.c_tilde
            * (t_prime * (n * n + m) + n.powf(-self.s) + v_tail + m.powf(-self.delta_hat))
    }

    /// Searches `N` and `M` over the candidates; for each pair `T'` is the
    /// largest power-of-two fraction of `t_max` that spends at most half of the
    /// remaining budget (or `t_max` when there is none). Returns the smallest
    /// factor found.
    pub fn choose(
        &self,
        n_candidates: &[usize],
        m_candidates: &[f64],
        t_max: f64,
        v_tail: impl Fn(usize) -> Result<f64>,
    ) -> Result<ContractionChoice> {
        let mut best: Option<ContractionChoice> = None;
        for &n in n_candidates {
            let tail = v_tail(n)?;
            for &m in m_candidates {
                let base = self.factor(n, m, 0.0, tail);
                let mut t_prime = t_max;
                let rate = self.c_tilde * ((n * n) as f64 + m);
                // no T' helps once the T'-free part reaches 1
                if base < 1.0 {
                    let budget = 0.5 * (1.0 - base);
                    while t_prime * rate > budget {
                        t_prime *= 0.5;
                    }
                }
                let c = ContractionChoice {
                    n_split: n,
                    m,
                    t_prime,
                    v_tail: tail,
                    factor: self.factor(n, m, t_prime, tail),
                };
                if best.is_none_or(|b| c.factor < b.factor) {
                    best = Some(c);
                }
            }
        }
        best.ok_or_else(|| Error::Input("no (N, M) candidates given".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn datum(n_max: usize, a: f64) -> SpectralField {
        SpectralField::from_modes(
            GridSpec::dealiased(n_max).unwrap(),
            &[
                (1, Complex64::new(a, 0.0)),
                (-1, Complex64::new(a, 0.0)),
                (2, Complex64::new(0.5 * a, 0.3 * a)),
                (-2, Complex64::new(0.5 * a, -0.3 * a)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_datum_stays_zero() {
        let cfg = SolverConfig::new(8, 1.0 / 256.0, 0.25).unwrap();
        let traj = integrate_bo(&datum(8, 0.0), &cfg).unwrap();
        assert_eq!(traj.times.len(), 65);
        assert!(traj.fields.iter().all(|u| u.max_abs() == 0.0));
    }

    #[test]
    fn invalid_configs_are_refused() {
        let e = SolverConfig::new(16, 0.01, 1.0).unwrap_err();
        assert!(matches!(e, Error::Config(_)), "{e}");
        assert!(SolverConfig::new(8, 1.0 / 256.0, 0.3001).is_err());
        assert!(SolverConfig::new(8, -1.0, 1.0).is_err());
        let cfg = SolverConfig::new(8, 1.0 / 256.0, 0.25).unwrap();
        assert!(cfg.with_record_every(0).is_err());
    }

    #[test]
    fn datum_must_be_real_and_mean_zero() {
        let cfg = SolverConfig::new(8, 1.0 / 256.0, 0.25).unwrap();
        let grid = GridSpec::dealiased(8).unwrap();
        let complex = SpectralField::from_modes(grid, &[(1, Complex64::new(1.0, 0.0))]).unwrap();
        assert!(matches!(integrate_bo(&complex, &cfg), Err(Error::Domain(_))));
        let mean = SpectralField::from_modes(grid, &[(0, Complex64::new(1.0, 0.0))]).unwrap();
        assert!(matches!(integrate_bo(&mean, &cfg), Err(Error::Domain(_))));
        let wide = SpectralField::from_modes(
            GridSpec::dealiased(12).unwrap(),
            &[(10, Complex64::new(0.1, 0.0)), (-10, Complex64::new(0.1, 0.0))],
        )
        .unwrap();
        assert!(matches!(integrate_bo(&wide, &cfg), Err(Error::Input(_))));
    }

    #[test]
    fn mean_and_reality_are_kept() {
        let cfg = SolverConfig::new(16, 1.0 / 1024.0, 0.5).unwrap();
        let traj = integrate_bo(&datum(16, 0.5), &cfg).unwrap();
        assert!(traj.mean_drift() <= 1e-13);
        assert!(traj.max_imag() <= 1e-11);
        let m0 = traj.conservation[0].mass;
        assert!(traj.conservation.iter().all(|c| (c.mass - m0).abs() < 1e-6 * m0));
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn stepping_back_recovers_the_datum() {
        let u0 = datum(16, 0.5);
        let err = |steps: usize| {
            let h = 0.25 / steps as f64;
            let fwd = evolve(&u0, 0.0, h, steps).unwrap();
            evolve(&fwd, 0.25, -h, steps).unwrap().max_abs_diff(&u0)
        };
        let (e1, e2) = (err(128), err(256));
        assert!(e1 < 1e-7, "{e1}");
        assert!(e2 < e1 / 8.0, "{e1} then {e2}");
    }

    #[test]
    fn omega_of_zero_datum_is_constant() {
        let cfg = SolverConfig::new(8, 1.0 / 256.0, 0.0625).unwrap();
        let nfr = NfrConfig::new(2.0, 0.3, crate::algebra::Comparability::new(2.0).unwrap(), 8).unwrap();
        let u0 = datum(8, 0.0);
        let w0 = omega_of(&gauge_forward(&u0).unwrap().v, 0.0);
        for mode in [OmegaMode::Direct, OmegaMode::NfrForm] {
            let traj = integrate_omega(&u0, &cfg, &nfr, mode).unwrap();
            // the FFT round trip through u leaves roundoff only
            for w in &traj.omegas {
                assert!(w.max_abs_diff(&w0) <= 1e-15, "{mode:?}");
            }
        }
    }

    #[test]
    fn identical_runs_do_not_separate() {
        let cfg = SolverConfig::new(16, 1.0 / 1024.0, 0.125).unwrap();
        let ucfg = UniquenessConfig { s: 0.3, n_split: 4, m: 8.0, samples: 4 };
        let r = uniqueness_experiment(&datum(16, 0.5), &cfg, &cfg, &ucfg).unwrap();
        assert_eq!(r.series.len(), 5);
        assert_eq!(r.sup_total, 0.0);
        assert_eq!(r.sup_omega_diff, 0.0);
        let bad = UniquenessConfig { samples: 3, ..ucfg };
        assert!(uniqueness_experiment(&datum(16, 0.5), &cfg, &cfg, &bad).is_err());
    }

    #[test]
    fn low_and_high_parts_are_orthogonal() {
        let a = SolverConfig::new(16, 1.0 / 1024.0, 0.125).unwrap();
        let b = SolverConfig::new(16, 1.0 / 2048.0, 0.125).unwrap();
        let ucfg = UniquenessConfig { s: 0.3, n_split: 3, m: 8.0, samples: 4 };
        let r = uniqueness_experiment(&datum(16, 0.8), &a, &b, &ucfg).unwrap();
        assert!(r.sup_total > 0.0);
        assert!(r.orthogonality_defect <= 1e-14 * r.sup_total * r.sup_total);
    }

    #[test]
    fn contraction_factor_formula_and_search() {
        let model = ContractionModel::assemble(&[2.0, 0.5], 1.0, 0.5, 0.5).unwrap();
        assert_eq!(model.c_tilde, 64.0);
        let f = model.factor(4, 16.0, 0.01, 0.0);
        assert!((f - 64.0 * (0.01 * 32.0 + 0.5 + 0.25)).abs() < 1e-12);
        let pick = model
            .choose(&[1 << 10, 1 << 16], &[1e6, 1e8], 1.0, |_| Ok(0.0))
            .unwrap();
        assert!(pick.factor < 1.0, "{pick:?}");
        assert!(ContractionModel::assemble(&[1.0], 0.0, 0.0, 0.3).is_err());
        assert!(model.choose(&[], &[1.0], 1.0, |_| Ok(0.0)).is_err());
    }

    #[test]
    fn csv_rows_are_tidy() {
        let cfg = SolverConfig::new(4, 1.0 / 64.0, 1.0 / 32.0).unwrap();
        let traj = integrate_bo(&datum(4, 0.1), &cfg).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,n,re,im"));
        assert_eq!(lines.count(), 3 * 9);
    }
}
