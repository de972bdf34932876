//! Empirical checks of the multilinear estimates.
//!
//! Each lemma is turned into a ratio `‖term‖ / (right-hand normalization)`
//! evaluated over seeded samples. Where a bound carries an unspecified power
//! `M^{-δ}`, the power is left in the ratio and fitted separately by [`decay_fit`].

use std::cmp::Ordering;

use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    a1_branch_raw, bracket_sq, in_a3_raw, multiplier_bound_ratio, phase, phase_case_identity,
    phase_lower_bound_ratio, phase_raw, support_implications_hold, tilde_m1_value, A1Branch,
    Comparability, Family, QuadIndex,
};
use crate::error::{input, Result};
use crate::fourier::{bracket, sobolev_norm, GridSpec, NormParams, SpectralField};
use crate::gauge::{gauge_forward, lemma_exp_ratios, omega_of};
use crate::nfr::{all_terms, evaluate, NfrConfig, TermId, TermSet};
use crate::omega::OmegaState;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Shape of a sampled sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `|ω(n)| ∝ ⟨n⟩^{-s}` with seeded phases.
    Flat,
    /// Mass at `±n₀` only.
    Concentrated { n0: i64 },
    /// Equal `ℓ²_s` mass at `±n₀` and `±n₁`.
    TwoBump { n0: i64, n1: i64 },
    /// Gaussian coefficients times `⟨n⟩^{-s}`.
    RandomPhase,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub n_max: usize,
    pub s: f64,
    pub profile: Profile,
    pub seed: u64,
}

impl SamplerSpec {
    pub fn new(n_max: usize, s: f64, profile: Profile, seed: u64) -> Self {
        Self { n_max, s, profile, seed }
    }
}

fn unit_phase(rng: &mut ChaCha8Rng) -> Complex64 {
    let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    Complex64::from_polar(1.0, theta)
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Raw (unnormalized) coefficients for `|n| ≤ n_max`.
fn raw_profile(spec: &SamplerSpec, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let b = spec.n_max as i64;
    let clamp = |k: i64| k.abs().min(b);
    let decay = |n: i64| bracket(n).powf(-spec.s);
    (-b..=b)
        .map(|n| match spec.profile {
            Profile::Flat => decay(n) * unit_phase(rng),
            Profile::RandomPhase => decay(n) * gaussian(rng),
            Profile::Concentrated { n0 } => {
                if n.abs() == clamp(n0) {
                    decay(n) * unit_phase(rng)
                } else {
                    ZERO
                }
            }
            Profile::TwoBump { n0, n1 } => {
                if n.abs() == clamp(n0) || n.abs() == clamp(n1) {
                    decay(n) * unit_phase(rng)
                } else {
                    ZERO
                }
            }
        })
        .collect()
}

fn normalize(seq: &mut [Complex64], n_max: usize, s: f64) {
    let b = n_max as i64;
    let norm = crate::fourier::weighted_seq_norm((-b..=b).zip(seq.iter().copied()), NormParams::l2(s));
    if norm > 0.0 {
        for c in seq.iter_mut() {
            *c /= norm;
        }
    }
}

/// A seeded sequence with unit `ℓ²_s` norm, stamped at `t = 0`.
pub fn sample_omega(spec: &SamplerSpec) -> OmegaState {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut seq = raw_profile(spec, &mut rng);
    normalize(&mut seq, spec.n_max, spec.s);
    OmegaState::new(spec.n_max, 0.0, seq).expect("length matches band")
}

/// A seeded real mean-zero field with `‖u‖_{H^s} = amplitude`.
pub fn sample_field(spec: &SamplerSpec, amplitude: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
    let raw = raw_profile(spec, &mut rng);
    let b = spec.n_max as i64;
    let grid = GridSpec::dealiased(spec.n_max).expect("band is positive");
    let herm = SpectralField::from_fn(grid, |n| match n.cmp(&0) {
        Ordering::Greater => raw[(n + b) as usize],
        Ordering::Less => raw[(-n + b) as usize].conj(),
        Ordering::Equal => ZERO,
    });
    let norm = sobolev_norm(&herm, spec.s);
    if norm == 0.0 {
        return herm;
    }
    herm.scale(Complex64::new(amplitude / norm, 0.0))
}

/// Which estimate a ratio normalizes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LemmaId {
    /// `‖e^{-i∂x⁻¹f}‖_{H^{s+1}} / (1 + ‖f‖²_{H^s})`.
    Exp,
    R,
    NR,
    R1,
    N0,
    /// `‖N_j‖_{ℓ²_α} / ‖ω‖⁵`.
    WeakNj { j: u8, alpha: f64 },
    N1R,
    N11,
    N10,
    N2,
    N3R,
    N31,
    N30,
    /// `‖N[ω]‖_{ℓ²_β} / ‖ω‖³` with `β = 2s - 3/2`.
    Trilinear,
    Agg0,
    Agg1,
}

impl LemmaId {
    /// The standard lemma list at Sobolev index `s`.
    pub fn suite(s: f64) -> Vec<LemmaId> {
        let alpha = 3.0 * s - 1.0 - 0.01;
        vec![
            LemmaId::Exp,
            LemmaId::R,
            LemmaId::NR,
            LemmaId::R1,
            LemmaId::N0,
            LemmaId::WeakNj { j: 1, alpha },
            LemmaId::WeakNj { j: 2, alpha },
            LemmaId::WeakNj { j: 3, alpha },
            LemmaId::N1R,
            LemmaId::N11,
            LemmaId::N10,
            LemmaId::N2,
            LemmaId::N3R,
            LemmaId::N31,
            LemmaId::N30,
            LemmaId::Trilinear,
        ]
    }

    pub fn name(&self) -> String {
        match self {
            LemmaId::Exp => "exp".into(),
            LemmaId::R => "R".into(),
            LemmaId::NR => "N_R".into(),
            LemmaId::R1 => "R1".into(),
            LemmaId::N0 => "N0".into(),
            LemmaId::WeakNj { j, .. } => format!("weak-N{j}"),
            LemmaId::N1R => "N1R".into(),
            LemmaId::N11 => "N11".into(),
            LemmaId::N10 => "N10".into(),
            LemmaId::N2 => "N2".into(),
            LemmaId::N3R => "N3R".into(),
            LemmaId::N31 => "N31".into(),
            LemmaId::N30 => "N30".into(),
            LemmaId::Trilinear => "N-beta".into(),
            LemmaId::Agg0 => "N(0)".into(),
            LemmaId::Agg1 => "N(1)".into(),
        }
    }

    pub fn parse(name: &str, s: f64) -> Result<Self> {
        let alpha = 3.0 * s - 1.0 - 0.01;
        Ok(match name {
            "exp" => LemmaId::Exp,
            "R" => LemmaId::R,
            "N_R" => LemmaId::NR,
            "R1" => LemmaId::R1,
            "N0" => LemmaId::N0,
            "weak-N1" => LemmaId::WeakNj { j: 1, alpha },
            "weak-N2" => LemmaId::WeakNj { j: 2, alpha },
            "weak-N3" => LemmaId::WeakNj { j: 3, alpha },
            "N1R" => LemmaId::N1R,
            "N11" => LemmaId::N11,
            "N10" => LemmaId::N10,
            "N2" => LemmaId::N2,
            "N3R" => LemmaId::N3R,
            "N31" => LemmaId::N31,
            "N30" => LemmaId::N30,
            "N-beta" => LemmaId::Trilinear,
            "N(0)" => LemmaId::Agg0,
            "N(1)" => LemmaId::Agg1,
            _ => return input(format!("unknown lemma id {name:?}")),
        })
    }

    /// Whether the lemma involves `u` (and so needs `ω` consistent with it).
    pub fn needs_field(&self) -> bool {
        matches!(
            self,
            LemmaId::Exp | LemmaId::R | LemmaId::R1 | LemmaId::N11 | LemmaId::N31 | LemmaId::Agg1
        )
    }

    fn term(&self) -> Option<TermId> {
        Some(match self {
            LemmaId::Exp => return None,
            LemmaId::R => TermId::R,
            LemmaId::NR => TermId::NR,
            LemmaId::R1 => TermId::R1,
            LemmaId::N0 => TermId::N0,
            LemmaId::WeakNj { j: 1, .. } => TermId::N1,
            LemmaId::WeakNj { j: 2, .. } => TermId::N2,
            LemmaId::WeakNj { .. } => TermId::N3,
            LemmaId::N1R => TermId::N1R,
            LemmaId::N11 => TermId::N11,
            LemmaId::N10 => TermId::N10,
            LemmaId::N2 => TermId::N2,
            LemmaId::N3R => TermId::N3R,
            LemmaId::N31 => TermId::N31,
            LemmaId::N30 => TermId::N30,
            LemmaId::Trilinear => TermId::N,
            LemmaId::Agg0 => TermId::Nagg0,
            LemmaId::Agg1 => TermId::Nagg1,
        })
    }

    /// Norm index of the left-hand side.
    fn target_index(&self, s: f64) -> f64 {
        match self {
            LemmaId::WeakNj { alpha, .. } => *alpha,
            LemmaId::Trilinear => 2.0 * s - 1.5,
            _ => s,
        }
    }
}

/// A `(u, ω)` pair for a ratio evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaInputs {
    pub u: SpectralField,
    pub omega: OmegaState,
}

impl LemmaInputs {
    /// `ω` built from `u` through the gauge transform at `t`.
    pub fn from_field(u: SpectralField, t: f64) -> Result<Self> {
        let pair = gauge_forward(&u)?;
        let omega = omega_of(&pair.v, t);
        Ok(Self { u, omega })
    }

    /// Inputs drawn from a sampler: consistent `(u, ω)` if the lemma needs `u`,
    /// otherwise a unit sequence (with `u = 0`).
    pub fn sample(spec: &SamplerSpec, lemma: &LemmaId) -> Result<Self> {
        if lemma.needs_field() {
            Self::from_field(sample_field(spec, 1.0), 0.0)
        } else {
            let grid = GridSpec::dealiased(spec.n_max)?;
            Ok(Self {
                u: SpectralField::zeros(grid),
                omega: sample_omega(spec),
            })
        }
    }
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    if num == 0.0 && den == 0.0 {
        None
    } else {
        Some(num / den)
    }
}

fn term_norm(lemma: &LemmaId, x: &LemmaInputs, cfg: &NfrConfig, cache: Option<&TermSet>) -> Result<f64> {
    let id = lemma.term().expect("term lemma");
    let idx = lemma.target_index(cfg.s);
    let v = match cache {
        Some(set) => set.get(id).clone(),
        None => evaluate(id, &x.u, &x.omega, cfg)?.value,
    };
    Ok(v.l2s(idx))
}

/// Growth factor `1 + ‖u‖⁴ + ‖ω‖³` shared by the estimates involving `u`.
fn field_factor(u: f64, w: f64) -> f64 {
    1.0 + u.powi(4) + w.powi(3)
}

/// `‖term‖ / normalization` for one input; `None` for 0/0.
pub fn lemma_ratio(lemma: &LemmaId, x: &LemmaInputs, cfg: &NfrConfig) -> Result<Option<f64>> {
    lemma_ratio_with(lemma, x, cfg, None)
}

fn lemma_ratio_with(lemma: &LemmaId, x: &LemmaInputs, cfg: &NfrConfig, cache: Option<&TermSet>) -> Result<Option<f64>> {
    let s = cfg.s;
    if let LemmaId::Exp = lemma {
        let (r, _) = lemma_exp_ratios(&x.u, &x.u, s)?;
        return Ok(Some(r));
    }
    let u = sobolev_norm(&x.u, s);
    let w = x.omega.l2s(s);
    let num = term_norm(lemma, x, cfg, cache)?;
    let den = match lemma {
        LemmaId::R => field_factor(u, w),
        LemmaId::NR => cfg.m * w.powi(3),
        LemmaId::R1 => field_factor(u, w) * w.powi(2),
        LemmaId::N0 | LemmaId::Trilinear | LemmaId::Agg0 => w.powi(3),
        LemmaId::WeakNj { .. }
        | LemmaId::N1R
        | LemmaId::N10
        | LemmaId::N2
        | LemmaId::N3R
        | LemmaId::N30 => w.powi(5),
        LemmaId::N11 | LemmaId::N31 => field_factor(u, w) * w.powi(4),
        LemmaId::Agg1 => cfg.m * field_factor(u, w) * w.powi(3),
        LemmaId::Exp => unreachable!(),
    };
    Ok(ratio(num, den))
}

/// Difference form: `‖T[a] - T[b]‖` over the difference normalization.
pub fn lemma_difference_ratio(lemma: &LemmaId, a: &LemmaInputs, b: &LemmaInputs, cfg: &NfrConfig) -> Result<Option<f64>> {
    let s = cfg.s;
    if let LemmaId::Exp = lemma {
        let (_, r) = lemma_exp_ratios(&a.u, &b.u, s)?;
        return Ok(r);
    }
    let id = lemma.term().expect("term lemma");
    let ta = evaluate(id, &a.u, &a.omega, cfg)?.value;
    let tb = evaluate(id, &b.u, &b.omega, cfg)?.value;
    let num = ta.sub(&tb)?.l2s(lemma.target_index(s));
    let (ua, ub) = (sobolev_norm(&a.u, s), sobolev_norm(&b.u, s));
    let (wa, wb) = (a.omega.l2s(s), b.omega.l2s(s));
    let du = sobolev_norm(&a.u.sub(&b.u)?, s);
    let dw = a.omega.sub(&b.omega)?.l2s(s);
    let uu = 1.0 + ua.powi(4) + ub.powi(4);
    let den = match lemma {
        LemmaId::R => uu * du + (wa.powi(2) + wb.powi(2)) * dw,
        LemmaId::NR => cfg.m * (wa.powi(2) + wb.powi(2)) * dw,
        LemmaId::N0 | LemmaId::Trilinear => (wa.powi(2) + wb.powi(2)) * dw,
        LemmaId::R1 => {
            uu * (wa.powi(2) + wb.powi(2)) * du + (uu + wa.powi(3) + wb.powi(3)) * (wa + wb) * dw
        }
        LemmaId::WeakNj { .. }
        | LemmaId::N1R
        | LemmaId::N10
        | LemmaId::N2
        | LemmaId::N3R
        | LemmaId::N30 => (wa.powi(4) + wb.powi(4)) * dw,
        LemmaId::N11 | LemmaId::N31 => {
            uu * (wa.powi(4) + wb.powi(4)) * du
                + (uu + wa.powi(3) + wb.powi(3)) * (wa.powi(3) + wb.powi(3)) * dw
        }
        LemmaId::Agg0 => dw,
        LemmaId::Agg1 => cfg.m * (du + dw),
        LemmaId::Exp => unreachable!(),
    };
    Ok(ratio(num, den))
}

/// One JSON record of a ratio scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub lemma: String,
    pub s: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub n_max: usize,
    /// Samples that produced a ratio (0/0 skipped).
    pub samples: usize,
    pub max: f64,
    pub min: f64,
    pub median: f64,
    pub slope: Option<f64>,
}

impl RatioRecord {
    fn from_ratios(lemma: String, cfg: &NfrConfig, mut ratios: Vec<f64>, slope: Option<f64>) -> Self {
        ratios.sort_by(f64::total_cmp);
        let n = ratios.len();
        let median = match n {
            0 => 0.0,
            _ if n % 2 == 1 => ratios[n / 2],
            _ => 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]),
        };
        Self {
            lemma,
            s: cfg.s,
            m: cfg.m,
            n_max: cfg.n_max,
            samples: n,
            max: ratios.last().copied().unwrap_or(0.0),
            min: ratios.first().copied().unwrap_or(0.0),
            median,
            slope,
        }
    }
}

/// Deterministic sampler list: adversarial profiles first, then `random` seeded draws.
///
/// The adversarial part covers single modes, low/high two-bump pairs (the
/// `⟨n₁⟩ ∼ ⟨n₃⟩ ≫ ⟨n₂⟩` interaction) and the flat profile. It does not depend
/// on `n_max` beyond clamping, so the same worst cases are seen at every band.
pub fn standard_samplers(n_max: usize, s: f64, random: usize, seed: u64) -> Vec<SamplerSpec> {
    let mut out = Vec::new();
    let mut k = 0;
    let mut push = |profile: Profile, out: &mut Vec<SamplerSpec>| {
        out.push(SamplerSpec::new(n_max, s, profile, seed.wrapping_add(k)));
        k += 1;
    };
    for n0 in [1, 2, 3, 5, 8] {
        push(Profile::Concentrated { n0 }, &mut out);
    }
    for (a, b) in [(1, 4), (1, 8), (2, 7), (1, 3), (2, 5), (3, 8)] {
        push(Profile::TwoBump { n0: a, n1: b }, &mut out);
    }
    push(Profile::Flat, &mut out);
    for i in 0..random {
        let profile = if i % 2 == 0 { Profile::RandomPhase } else { Profile::Flat };
        push(profile, &mut out);
    }
    out
}

/// Ratio statistics of one lemma over a sampler list.
pub fn ratio_scan(lemma: &LemmaId, samplers: &[SamplerSpec], cfg: &NfrConfig) -> Result<RatioRecord> {
    let ratios: Vec<Option<f64>> = samplers
        .par_iter()
        .map(|spec| {
            let x = LemmaInputs::sample(spec, lemma)?;
            lemma_ratio(lemma, &x, cfg)
        })
        .collect::<Result<_>>()?;
    Ok(RatioRecord::from_ratios(
        lemma.name(),
        cfg,
        ratios.into_iter().flatten().collect(),
        None,
    ))
}

/// Ratio statistics for every lemma in `lemmas`, sharing one term evaluation per sample.
pub fn suite_scan(lemmas: &[LemmaId], samplers: &[SamplerSpec], cfg: &NfrConfig) -> Result<Vec<RatioRecord>> {
    // u-dependent and ω-only lemmas draw different inputs
    let per_sample: Vec<Vec<Option<f64>>> = samplers
        .par_iter()
        .map(|spec| {
            let with_u = LemmaInputs::from_field(sample_field(spec, 1.0), 0.0)?;
            let only_w = LemmaInputs::sample(spec, &LemmaId::N0)?;
            let set_u = all_terms(&with_u.u, &with_u.omega, cfg)?;
            let set_w = all_terms(&only_w.u, &only_w.omega, cfg)?;
            lemmas
                .iter()
                .map(|l| {
                    if l.needs_field() {
                        lemma_ratio_with(l, &with_u, cfg, Some(&set_u))
                    } else {
                        lemma_ratio_with(l, &only_w, cfg, Some(&set_w))
                    }
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(lemmas
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let r = per_sample.iter().filter_map(|row| row[i]).collect();
            RatioRecord::from_ratios(l.name(), cfg, r, None)
        })
        .collect())
}

/// Difference-ratio statistics over pairs `(ω, ω + ε η)` (or the same for `u`).
pub fn difference_scan(lemma: &LemmaId, samplers: &[SamplerSpec], eps: f64, cfg: &NfrConfig) -> Result<RatioRecord> {
    let ratios: Vec<Option<f64>> = samplers
        .par_iter()
        .map(|spec| {
            let other = SamplerSpec {
                seed: spec.seed ^ 0x5bd1_e995,
                profile: Profile::RandomPhase,
                ..*spec
            };
            let (a, b) = if lemma.needs_field() {
                let u = sample_field(spec, 1.0);
                let du = sample_field(&other, eps);
                (
                    LemmaInputs::from_field(u.clone(), 0.0)?,
                    LemmaInputs::from_field(u.add(&du)?, 0.0)?,
                )
            } else {
                let a = LemmaInputs::sample(spec, lemma)?;
                let eta = sample_omega(&other);
                let b = LemmaInputs {
                    u: a.u.clone(),
                    omega: a.omega.axpy(eps, &eta)?,
                };
                (a, b)
            };
            lemma_difference_ratio(lemma, &a, &b, cfg)
        })
        .collect::<Result<_>>()?;
    Ok(RatioRecord::from_ratios(
        format!("{}-diff", lemma.name()),
        cfg,
        ratios.into_iter().flatten().collect(),
        None,
    ))
}

/// Terms whose bounds carry a factor `M^{-δ}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayTerm {
    N0,
    N10,
    N30,
}

impl DecayTerm {
    pub const ALL: [DecayTerm; 3] = [DecayTerm::N0, DecayTerm::N10, DecayTerm::N30];

    fn lemma(self) -> LemmaId {
        match self {
            DecayTerm::N0 => LemmaId::N0,
            DecayTerm::N10 => LemmaId::N10,
            DecayTerm::N30 => LemmaId::N30,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    #[serde(rename = "M")]
    pub m: f64,
    pub max: f64,
}

/// Sweep of the max ratio over `M` and its least-squares log-log slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub term: DecayTerm,
    pub s: f64,
    pub n_max: usize,
    pub k: f64,
    pub samples: usize,
    pub points: Vec<DecayPoint>,
    /// `None` when fewer than two maxima are nonzero.
    pub slope: Option<f64>,
    /// Octaves spanned by the points entering the fit.
    pub fitted_octaves: f64,
}

impl DecayFit {
    pub fn records(&self) -> Vec<RatioRecord> {
        self.points
            .iter()
            .map(|p| RatioRecord {
                lemma: self.term.lemma().name(),
                s: self.s,
                m: p.m,
                n_max: self.n_max,
                samples: self.samples,
                max: p.max,
                min: f64::NAN,
                median: f64::NAN,
                slope: self.slope,
            })
            .collect()
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Fits `max ratio ∼ M^{slope}` over `m_list`.
///
/// Zero maxima (empty non-resonant set at that `M`) are reported but left out of the fit.
pub fn decay_fit(term: DecayTerm, m_list: &[f64], samplers: &[SamplerSpec], cfg: &NfrConfig) -> Result<DecayFit> {
    if m_list.len() < 2 || m_list.iter().any(|&m| !(m >= 2.0) || !m.is_finite()) {
        return input("M sweep needs at least two values, all ≥ 2");
    }
    let lo = m_list.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = m_list.iter().copied().fold(0.0, f64::max);
    if (hi / lo).log2() < 5.0 - 1e-9 {
        return input(format!("M sweep spans {:.2} octaves, at least 5 are required", (hi / lo).log2()));
    }
    let lemma = term.lemma();
    let inputs: Vec<LemmaInputs> = samplers
        .par_iter()
        .map(|spec| LemmaInputs::sample(spec, &lemma))
        .collect::<Result<_>>()?;
    let mut points = Vec::new();
    for &m in m_list {
        let c = cfg.with_m(m)?;
        let ratios: Vec<Option<f64>> = inputs
            .par_iter()
            .map(|x| lemma_ratio(&lemma, x, &c))
            .collect::<Result<_>>()?;
        let max = ratios.into_iter().flatten().fold(0.0, f64::max);
        points.push(DecayPoint { m, max });
    }
    let fit: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.max > 0.0)
        .map(|p| (p.m, p.max))
        .collect();
    let fitted_octaves = match (fit.first(), fit.last()) {
        (Some(a), Some(b)) => (b.0 / a.0).log2().abs(),
        _ => 0.0,
    };
    Ok(DecayFit {
        term,
        s: cfg.s,
        n_max: cfg.n_max,
        k: cfg.k.k(),
        samples: samplers.len(),
        slope: log_log_slope(&fit),
        points,
        fitted_octaves,
    })
}

/// Exhaustively scanned bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bound {
    /// `|m_k| · min⟨n_j⟩ / ⟨n⟩` over the support of `m_k`.
    Multiplier(Family),
    /// `|Φ| / (|n₁₂||n₂₃|)` or `/(|n₁₃||n₂₃|)` on the support of `m̃₁`.
    ClaimPhi,
    /// Factorised forms of `Φ` against the definition; violations counted.
    PhiFactorisation,
    /// `|Φ+Φ₁| / |Φ₁|` on `A₁`; violations are second-branch tuples with `Φ·Φ₁ ≤ 0`.
    A1Stacked,
    /// `|Φ+Φ₃| / (|n₃||n₁₄|)` on `A₃`.
    A3Stacked,
    /// `m̃₁ ≠ 0 ⇒ n₁ > n > 0 > n₂₃ > -n₁` (and the `m₂` mirror); violations counted.
    M1SignImplications,
}

impl Bound {
    pub const ALL: [Bound; 8] = [
        Bound::Multiplier(Family::M1),
        Bound::Multiplier(Family::M2),
        Bound::Multiplier(Family::M3),
        Bound::ClaimPhi,
        Bound::PhiFactorisation,
        Bound::A1Stacked,
        Bound::A3Stacked,
        Bound::M1SignImplications,
    ];

    pub fn name(&self) -> String {
        match self {
            Bound::Multiplier(f) => format!("multiplier-{}", match f {
                Family::M1 => "m1",
                Family::M2 => "m2",
                Family::M3 => "m3",
            }),
            Bound::ClaimPhi => "phi-lower-bound".into(),
            Bound::PhiFactorisation => "phi-factorisation".into(),
            Bound::A1Stacked => "a1-stacked-phase".into(),
            Bound::A3Stacked => "a3-stacked-phase".into(),
            Bound::M1SignImplications => "m1-sign-implications".into(),
        }
    }

    fn is_sextic(&self) -> bool {
        matches!(self, Bound::A1Stacked | Bound::A3Stacked)
    }
}

/// Result of an exhaustive scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub bound: String,
    pub n_max: usize,
    pub k: Option<f64>,
    /// Admissible tuples visited.
    pub tuples: u64,
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// Exact minimum for rational ratios, as `p/q`.
    pub min_exact: Option<String>,
    pub violations: u64,
    /// Sextic tuples with vanishing stacked phase.
    pub zero_totals: u64,
}

#[derive(Default, Clone)]
struct Acc {
    tuples: u64,
    min: Option<f64>,
    max: Option<f64>,
    min_exact: Option<Ratio<i64>>,
    violations: u64,
    zero_totals: u64,
}

impl Acc {
    fn value(&mut self, x: f64) {
        self.min = Some(self.min.map_or(x, |m| m.min(x)));
        self.max = Some(self.max.map_or(x, |m| m.max(x)));
    }

    fn exact(&mut self, r: Ratio<i64>) {
        self.value(*r.numer() as f64 / *r.denom() as f64);
        self.min_exact = Some(match self.min_exact {
            Some(m) if m <= r => m,
            _ => r,
        });
    }

    fn merge(mut self, o: Acc) -> Acc {
        self.tuples += o.tuples;
        self.violations += o.violations;
        self.zero_totals += o.zero_totals;
        if let Some(x) = o.min {
            self.value(x);
        }
        if let Some(x) = o.max {
            self.value(x);
        }
        if let Some(r) = o.min_exact {
            self.min_exact = Some(match self.min_exact {
                Some(m) if m <= r => m,
                _ => r,
            });
        }
        self
    }
}

fn quad_scan(bound: Bound, n: i64, b: i64) -> Acc {
    let mut acc = Acc::default();
    for n1 in -b..=b {
        for n2 in -b..=b {
            let n3 = n - n1 - n2;
            if n3.abs() > b {
                continue;
            }
            let q = QuadIndex::new(n, n1, n2, n3).expect("constraint holds");
            match bound {
                Bound::Multiplier(f) => {
                    let r = multiplier_bound_ratio(f, &q);
                    if r > 0.0 {
                        acc.tuples += 1;
                        acc.value(r);
                    }
                }
                Bound::ClaimPhi => {
                    if let Some(r) = phase_lower_bound_ratio(&q) {
                        acc.tuples += 1;
                        acc.exact(r);
                    }
                }
                Bound::PhiFactorisation => {
                    if let Some((_, v)) = phase_case_identity(&q) {
                        acc.tuples += 1;
                        if v != phase(&q) {
                            acc.violations += 1;
                        }
                    }
                }
                Bound::M1SignImplications => {
                    acc.tuples += 1;
                    if !support_implications_hold(&q) {
                        acc.violations += 1;
                    }
                }
                _ => unreachable!("sextic bound"),
            }
        }
    }
    acc
}

fn a1_scan(k: &Comparability, n: i64, b: i64) -> Acc {
    let mut acc = Acc::default();
    for n1 in (n + 1)..=b {
        for n2 in -b..=b {
            let n3 = n - n1 - n2;
            if n3.abs() > b || tilde_m1_value(n, n1, n2, n3) == ZERO {
                continue;
            }
            if !k.br_ll(bracket_sq(n2), bracket_sq(n)) {
                continue;
            }
            let phi = phase_raw(n, n1, n2, n3);
            for n4 in (n1 + 1)..=b {
                for n5 in -b..=b {
                    let n6 = n1 - n4 - n5;
                    if n6.abs() > b || tilde_m1_value(n1, n4, n5, n6) == ZERO {
                        continue;
                    }
                    let Some(branch) = a1_branch_raw(k, [n, n1, n2, n3, n4, n5, n6]) else {
                        continue;
                    };
                    let phi1 = phase_raw(n1, n4, n5, n6);
                    acc.tuples += 1;
                    if phi + phi1 == 0 {
                        acc.zero_totals += 1;
                    }
                    if branch == A1Branch::Separated && phi * phi1 <= 0 {
                        acc.violations += 1;
                    }
                    acc.exact(Ratio::new((phi + phi1).abs(), phi1.abs()));
                }
            }
        }
    }
    acc
}

fn a3_scan(k: &Comparability, n: i64, b: i64) -> Acc {
    let mut acc = Acc::default();
    for n1 in (n + 1)..=b {
        for n2 in -b..=b {
            let n3 = n - n1 - n2;
            if n3.abs() > b || n3 >= 0 || tilde_m1_value(n, n1, n2, n3) == ZERO {
                continue;
            }
            let phi = phase_raw(n, n1, n2, n3);
            for n4 in -b..n3 {
                for n5 in -b..=b {
                    let n6 = n3 - n4 - n5;
                    if n6.abs() > b || tilde_m1_value(-n3, -n4, -n5, -n6) == ZERO {
                        continue;
                    }
                    if !in_a3_raw(k, [n, n1, n2, n3, n4, n5, n6]) {
                        continue;
                    }
                    let phi3 = phase_raw(n3, n4, n5, n6);
                    acc.tuples += 1;
                    if phi + phi3 == 0 {
                        acc.zero_totals += 1;
                    }
                    acc.exact(Ratio::new((phi + phi3).abs(), (n3 * (n1 + n4)).abs()));
                }
            }
        }
    }
    acc
}

/// Exact extrema (or violation counts) of a bound over every admissible tuple in the band.
pub fn exhaustive_bound_scan(bound: Bound, n_max: usize, k: Comparability) -> Result<ScanReport> {
    let limit = if bound.is_sextic() { 32 } else { 64 };
    if n_max > limit {
        return input(format!("{} scans are limited to n_max ≤ {limit}", bound.name()));
    }
    let b = n_max as i64;
    let acc = (-b..=b)
        .into_par_iter()
        .map(|n| match bound {
            Bound::A1Stacked if n > 0 => a1_scan(&k, n, b),
            Bound::A3Stacked if n > 0 => a3_scan(&k, n, b),
            Bound::A1Stacked | Bound::A3Stacked => Acc::default(),
            _ => quad_scan(bound, n, b),
        })
        .reduce(Acc::default, Acc::merge);
    Ok(ScanReport {
        bound: bound.name(),
        n_max,
        k: bound.is_sextic().then(|| k.k()),
        tuples: acc.tuples,
        min: acc.min,
        max: acc.max,
        min_exact: acc.min_exact.map(|r| format!("{}/{}", r.numer(), r.denom())),
        violations: acc.violations,
        zero_totals: acc.zero_totals,
    })
}
