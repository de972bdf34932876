//! Right-hand side of the `ω`-equation and its two-stage normal-form reduction.
//!
//! Every index of every sum ranges over the band `[-n_max, n_max]` of the
//! input state; terms coming from the positive-frequency equation are
//! supported on `n > 0`.
//!
//! First stage (`|Φ| > M` part of the `m̃₁` sum, differentiated by parts):
//!
//! ```text
//! N_NR = ∂t N₀ + N₁ + N₂ + N₃ + R₁
//! ```
//!
//! Second stage, on the sets `A₁` and `A₃`:
//!
//! ```text
//! N₁ = N₁,R + N₁,NR,   N₁,NR = ∂t N₁,₀ + N₁,₁
//! N₃ = N₃,R + N₃,NR,   N₃,NR = ∂t N₃,₀ + N₃,₁
//! ```

mod identities;
mod plan;

use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::Comparability;
use crate::error::{config, input, Result};
use crate::fourier::{exact_convolution, Multiplier, SpectralField};
use crate::gauge::gauge_forward;
use crate::omega::{linear_phase, OmegaState};

pub use identities::{
    dbp_identity_residual, direct_n1r, direct_n3r, duhamel_residual, DuhamelSample, DIRECT_MAX_BAND, omega_equation_residual,
    partition_residuals, DbpResidual, PartitionResidual, Residual,
};
use plan::{quad_plans, quad_sum, sextic_plans, sextic_product_rule_sum, sextic_sum, Dephased};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Parameters of the reduction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NfrConfig {
    /// Resonance threshold `M > 0`.
    pub m: f64,
    /// Sobolev index used by norms and estimates.
    pub s: f64,
    pub k: Comparability,
    pub n_max: usize,
}

impl NfrConfig {
    pub fn new(m: f64, s: f64, k: Comparability, n_max: usize) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return config(format!("resonance threshold M must be positive and finite, got {m}"));
        }
        if !s.is_finite() {
            return config("Sobolev index s must be finite");
        }
        if n_max == 0 {
            return config("n_max must be positive");
        }
        Ok(Self { m, s, k, n_max })
    }

    /// The estimates are stated for `1/6 < s < 1/2`.
    pub fn check_estimate_range(&self) -> Result<()> {
        if self.s > 1.0 / 6.0 && self.s < 0.5 {
            Ok(())
        } else {
            config(format!(
                "s = {} is outside the range 1/6 < s < 1/2 where the uniqueness theorem and its estimates hold",
                self.s
            ))
        }
    }

    pub fn with_m(self, m: f64) -> Result<Self> {
        Self::new(m, self.s, self.k, self.n_max)
    }
}

/// Name of an evaluated term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TermId {
    N,
    NR,
    NNR,
    R,
    N0,
    N1,
    N2,
    N3,
    R1,
    N1R,
    N1NR,
    N10,
    N11,
    N3R,
    N3NR,
    N30,
    N31,
    Nagg0,
    Nagg1,
}

impl TermId {
    pub const ALL: [TermId; 19] = [
        TermId::N,
        TermId::NR,
        TermId::NNR,
        TermId::R,
        TermId::N0,
        TermId::N1,
        TermId::N2,
        TermId::N3,
        TermId::R1,
        TermId::N1R,
        TermId::N1NR,
        TermId::N10,
        TermId::N11,
        TermId::N3R,
        TermId::N3NR,
        TermId::N30,
        TermId::N31,
        TermId::Nagg0,
        TermId::Nagg1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TermId::N => "N",
            TermId::NR => "N_R",
            TermId::NNR => "N_NR",
            TermId::R => "R",
            TermId::N0 => "N0",
            TermId::N1 => "N1",
            TermId::N2 => "N2",
            TermId::N3 => "N3",
            TermId::R1 => "R1",
            TermId::N1R => "N1R",
            TermId::N1NR => "N1NR",
            TermId::N10 => "N10",
            TermId::N11 => "N11",
            TermId::N3R => "N3R",
            TermId::N3NR => "N3NR",
            TermId::N30 => "N30",
            TermId::N31 => "N31",
            TermId::Nagg0 => "N(0)",
            TermId::Nagg1 => "N(1)",
        }
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Output of one term evaluator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermValue {
    pub id: TermId,
    pub value: OmegaState,
}

impl TermValue {
    fn new(id: TermId, value: OmegaState) -> Self {
        Self { id, value }
    }
}

#[doc(hidden)]
pub mod fault {
    //! Deliberate defects for exercising failure paths of the verification suites.

    use super::*;

    pub(crate) static M1_SIGN: AtomicBool = AtomicBool::new(false);

    /// Flips the sign of the `m̃₁` family inside the trilinear evaluator.
    pub fn set_m1_sign_fault(on: bool) {
        M1_SIGN.store(on, Ordering::SeqCst);
    }
}

fn m1_sign() -> f64 {
    if fault::M1_SIGN.load(Ordering::Relaxed) {
        -1.0
    } else {
        1.0
    }
}

fn check_band(omega: &OmegaState, cfg: &NfrConfig) -> Result<()> {
    if omega.n_max() != cfg.n_max {
        return input(format!(
            "state band {} does not match configured n_max {}",
            omega.n_max(),
            cfg.n_max
        ));
    }
    Ok(())
}

fn check_pair(u: &SpectralField, omega: &OmegaState) -> Result<()> {
    if u.n_max() != omega.n_max() {
        return input(format!(
            "u has band {} but ω has band {}",
            u.n_max(),
            omega.n_max()
        ));
    }
    Ok(())
}

fn sum_states(parts: &[&OmegaState]) -> OmegaState {
    let first = parts[0];
    parts[1..]
        .iter()
        .fold(first.clone(), |acc, p| acc.add(p).expect("terms share a band"))
}

fn keep_all(_: i64) -> bool {
    true
}

fn one(_: i64) -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// `N[ω]`: the three trilinear sums of the `ω`-equation.
pub fn trilinear_n(omega: &OmegaState) -> TermValue {
    let plans = quad_plans(omega.n_max());
    let (n_max, t) = (omega.n_max(), omega.t());
    let d = Dephased::new(omega, t);
    let sign = m1_sign();
    let a = quad_sum(&plans.tilde1, n_max, t, [&d, &d, &d], keep_all, |_| {
        Complex64::new(sign, 0.0)
    });
    let b = quad_sum(&plans.m2, n_max, t, [&d, &d, &d], keep_all, one);
    let c = quad_sum(&plans.m3, n_max, t, [&d, &d, &d], keep_all, one);
    TermValue::new(TermId::N, sum_states(&[&a, &b, &c]))
}

/// Fourier coefficients of `R[u] = -P_c(u²)∂̂V - P_c[V(H∂x u - u²)]`.
pub fn remainder_coefficients(u: &SpectralField) -> Result<SpectralField> {
    let big_v = gauge_forward(u)?.big_v;
    let n_max = u.n_max() as i64;
    let mean_u2: Complex64 = (-n_max..=n_max).map(|k| u.coeff(k) * u.coeff(-k)).sum();
    let u2 = exact_convolution(u, u, u.n_max());
    let w = |k: i64| u.coeff(k) * k.abs() as f64 - u2.coeff(k);
    let mean_vw: Complex64 = (-n_max..=n_max).map(|k| big_v.coeff(k) * w(-k)).sum();
    Ok(big_v.map_coeffs(|n, c| {
        let dhat = Multiplier::DHat.apply_at(n, c);
        let r = -mean_u2 * dhat;
        if n == 0 {
            r - mean_vw
        } else {
            r
        }
    }))
}

/// `𝓡[u, ω]`: the degenerate `m₁` sum plus `e^{itn|n|} F[R[u]](n)`.
pub fn script_r(u: &SpectralField, omega: &OmegaState) -> Result<TermValue> {
    check_pair(u, omega)?;
    let plans = quad_plans(omega.n_max());
    let (n_max, t) = (omega.n_max(), omega.t());
    let d = Dephased::new(omega, t);
    let deg = quad_sum(&plans.degenerate1, n_max, t, [&d, &d, &d], keep_all, one);
    let r = remainder_coefficients(u)?;
    let value = deg.map(|n, c| c + linear_phase(t, n) * r.coeff(n));
    Ok(TermValue::new(TermId::R, value))
}

/// `∂t ω = N[ω] + 𝓡[u, ω]` on the whole band.
pub fn time_derivative(u: &SpectralField, omega: &OmegaState) -> Result<OmegaState> {
    let r = script_r(u, omega)?;
    Ok(trilinear_n(omega).value.add(&r.value).expect("same band"))
}

/// Resonant (`|Φ| ≤ M`) and non-resonant (`|Φ| > M`) parts of the `m̃₁` sum on `n > 0`.
pub fn split_resonant(omega: &OmegaState, cfg: &NfrConfig) -> Result<(TermValue, TermValue)> {
    check_band(omega, cfg)?;
    let plans = quad_plans(cfg.n_max);
    let t = omega.t();
    let d = Dephased::new(omega, t);
    let m = cfg.m;
    let r = quad_sum(&plans.tilde1, cfg.n_max, t, [&d, &d, &d], |p| (p.abs() as f64) <= m, one);
    let nr = quad_sum(&plans.tilde1, cfg.n_max, t, [&d, &d, &d], |p| (p.abs() as f64) > m, one);
    Ok((TermValue::new(TermId::NR, r), TermValue::new(TermId::NNR, nr)))
}

/// `W(a, b, c)(n) = Σ_{|Φ|>M} e^{itΦ} m̃₁/Φ · a(n₁) b(n₂) c*(n₃)`.
fn weighted_first_stage(cfg: &NfrConfig, t: f64, a: &OmegaState, b: &OmegaState, c: &OmegaState) -> OmegaState {
    let plans = quad_plans(cfg.n_max);
    let (da, db, dc) = (Dephased::new(a, t), Dephased::new(b, t), Dephased::new(c, t));
    let m = cfg.m;
    quad_sum(
        &plans.tilde1,
        cfg.n_max,
        t,
        [&da, &db, &dc],
        |p| (p.abs() as f64) > m,
        |p| Complex64::new(1.0 / p as f64, 0.0),
    )
}

/// `N₀ = -i W(ω, ω, ω)`.
pub fn term_n0(omega: &OmegaState, cfg: &NfrConfig) -> Result<TermValue> {
    check_band(omega, cfg)?;
    let w = weighted_first_stage(cfg, omega.t(), omega, omega, omega);
    Ok(TermValue::new(TermId::N0, w.scale(-I)))
}

fn nj_from(cfg: &NfrConfig, omega: &OmegaState, n: &OmegaState, j: u8) -> OmegaState {
    let t = omega.t();
    let w = match j {
        1 => weighted_first_stage(cfg, t, n, omega, omega),
        2 => weighted_first_stage(cfg, t, omega, n, omega),
        _ => weighted_first_stage(cfg, t, omega, omega, n),
    };
    w.scale(I)
}

/// `N_j`: `N[ω]` substituted into slot `j` of the weighted first-stage sum.
pub fn term_nj(omega: &OmegaState, cfg: &NfrConfig, j: u8) -> Result<TermValue> {
    check_band(omega, cfg)?;
    let id = match j {
        1 => TermId::N1,
        2 => TermId::N2,
        3 => TermId::N3,
        _ => return input(format!("j must be 1, 2 or 3, got {j}")),
    };
    let n = trilinear_n(omega).value;
    Ok(TermValue::new(id, nj_from(cfg, omega, &n, j)))
}

fn r1_from(cfg: &NfrConfig, omega: &OmegaState, r: &OmegaState) -> OmegaState {
    let t = omega.t();
    let a = weighted_first_stage(cfg, t, r, omega, omega);
    let b = weighted_first_stage(cfg, t, omega, r, omega);
    let c = weighted_first_stage(cfg, t, omega, omega, r);
    sum_states(&[&a, &b, &c]).scale(I)
}

/// `R₁`: `𝓡[u, ω]` substituted into each slot.
pub fn term_r1(u: &SpectralField, omega: &OmegaState, cfg: &NfrConfig) -> Result<TermValue> {
    check_band(omega, cfg)?;
    let r = script_r(u, omega)?.value;
    Ok(TermValue::new(TermId::R1, r1_from(cfg, omega, &r)))
}

/// Which second-stage set a sextic evaluation runs over.
#[derive(Clone, Copy)]
enum Stage {
    A1,
    A3,
}

fn nr_part(cfg: &NfrConfig, omega: &OmegaState, stage: Stage) -> OmegaState {
    let plans = sextic_plans(cfg.n_max, cfg.k);
    let plan = match stage {
        Stage::A1 => &plans.a1,
        Stage::A3 => &plans.a3,
    };
    let d = Dephased::new(omega, omega.t());
    sextic_sum(plan, cfg.n_max, omega.t(), cfg.m, [&d; 5], |phi, _| {
        I / phi as f64
    })
}

fn zero_part(cfg: &NfrConfig, omega: &OmegaState, stage: Stage) -> OmegaState {
    let plans = sextic_plans(cfg.n_max, cfg.k);
    let plan = match stage {
        Stage::A1 => &plans.a1,
        Stage::A3 => &plans.a3,
    };
    let d = Dephased::new(omega, omega.t());
    sextic_sum(plan, cfg.n_max, omega.t(), cfg.m, [&d; 5], |phi, total| {
        Complex64::new(1.0 / (phi as f64 * total as f64), 0.0)
    })
}

fn one_part(cfg: &NfrConfig, omega: &OmegaState, omega_dot: &OmegaState, stage: Stage) -> OmegaState {
    let plans = sextic_plans(cfg.n_max, cfg.k);
    let plan = match stage {
        Stage::A1 => &plans.a1,
        Stage::A3 => &plans.a3,
    };
    let t = omega.t();
    let (d, dd) = (Dephased::new(omega, t), Dephased::new(omega_dot, t));
    sextic_product_rule_sum(plan, cfg.n_max, t, cfg.m, &d, &dd, |phi, total| {
        Complex64::new(-1.0 / (phi as f64 * total as f64), 0.0)
    })
}

/// `(N₁,R, N₁,NR)`: the sextic form of `N₁` split by the indicator of `A₁`.
///
/// `N₁,NR` is summed over the (sparse) set `A₁`; `N₁,R = N₁ - N₁,NR`.
pub fn split_n1(omega: &OmegaState, cfg: &NfrConfig) -> Result<(TermValue, TermValue)> {
    let n1 = term_nj(omega, cfg, 1)?.value;
    let nr = nr_part(cfg, omega, Stage::A1);
    let r = n1.sub(&nr).expect("same band");
    Ok((TermValue::new(TermId::N1R, r), TermValue::new(TermId::N1NR, nr)))
}

/// `N₁,₀ = Σ 1_{A₁} e^{it(Φ+Φ₁)} m̃₁ m̃₁ / (Φ(Φ+Φ₁)) · ω(n₂)ω*(n₃)ω(n₄)ω(n₅)ω*(n₆)`.
pub fn term_n10(omega: &OmegaState, cfg: &NfrConfig) -> Result<TermValue> {
    check_band(omega, cfg)?;
    Ok(TermValue::new(TermId::N10, zero_part(cfg, omega, Stage::A1)))
}

/// `N₁,₁`: minus the `N₁,₀` weights applied to `∂t` of the five-fold product.
pub fn term_n11(omega: &OmegaState, omega_dot: &OmegaState, cfg: &NfrConfig) -> Result<TermValue> {
    check_band(omega, cfg)?;
    check_band(omega_dot, cfg)?;
    Ok(TermValue::new(TermId::N11, one_part(cfg, omega, omega_dot, Stage::A1)))
}

/// `(N₃,R, N₃,NR)` split by the indicator of `A₃`; `N₃,R = N₃ - N₃,NR`.
pub fn split_n3(omega: &OmegaState, cfg: &NfrConfig) -> Result<(TermValue, TermValue)> {
    let n3 = term_nj(omega, cfg, 3)?.value;
    let nr = nr_part(cfg, omega, Stage::A3);
    let r = n3.sub(&nr).expect("same band");
    Ok((TermValue::new(TermId::N3R, r), TermValue::new(TermId::N3NR, nr)))
}

/// `N₃,₀ = Σ 1_{A₃} e^{it(Φ+Φ₃)} m̃₁ m̃₁* / (Φ(Φ+Φ₃)) · ω(n₁)ω(n₂)ω*(n₄)ω*(n₅)ω(n₆)`.
pub fn term_n30(omega: &OmegaState, cfg: &NfrConfig) -> Result<TermValue> {
    check_band(omega, cfg)?;
    Ok(TermValue::new(TermId::N30, zero_part(cfg, omega, Stage::A3)))
}

pub fn term_n31(omega: &OmegaState, omega_dot: &OmegaState, cfg: &NfrConfig) -> Result<TermValue> {
    check_band(omega, cfg)?;
    check_band(omega_dot, cfg)?;
    Ok(TermValue::new(TermId::N31, one_part(cfg, omega, omega_dot, Stage::A3)))
}

/// Sizes of the second-stage sets for a band and comparability constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecondStageSizes {
    pub a1: usize,
    pub a3: usize,
    /// Tuples of `A₁ ∪ A₃` excluded because `Φ + Φⱼ = 0`.
    pub dropped_zero_total: usize,
}

pub fn second_stage_sizes(n_max: usize, k: Comparability) -> SecondStageSizes {
    let p = sextic_plans(n_max, k);
    SecondStageSizes {
        a1: p.a1.len(),
        a3: p.a3.len(),
        dropped_zero_total: p.a1.dropped_zero_total + p.a3.dropped_zero_total,
    }
}

/// Every term at one `(u, ω)`, computed with shared intermediates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSet {
    pub n: OmegaState,
    pub script_r: OmegaState,
    pub omega_dot: OmegaState,
    pub n_r: OmegaState,
    pub n_nr: OmegaState,
    pub n0: OmegaState,
    pub n1: OmegaState,
    pub n2: OmegaState,
    pub n3: OmegaState,
    pub r1: OmegaState,
    pub n1r: OmegaState,
    pub n1nr: OmegaState,
    pub n10: OmegaState,
    pub n11: OmegaState,
    pub n3r: OmegaState,
    pub n3nr: OmegaState,
    pub n30: OmegaState,
    pub n31: OmegaState,
    pub agg0: OmegaState,
    pub agg1: OmegaState,
}

impl TermSet {
    pub fn get(&self, id: TermId) -> &OmegaState {
        match id {
            TermId::N => &self.n,
            TermId::NR => &self.n_r,
            TermId::NNR => &self.n_nr,
            TermId::R => &self.script_r,
            TermId::N0 => &self.n0,
            TermId::N1 => &self.n1,
            TermId::N2 => &self.n2,
            TermId::N3 => &self.n3,
            TermId::R1 => &self.r1,
            TermId::N1R => &self.n1r,
            TermId::N1NR => &self.n1nr,
            TermId::N10 => &self.n10,
            TermId::N11 => &self.n11,
            TermId::N3R => &self.n3r,
            TermId::N3NR => &self.n3nr,
            TermId::N30 => &self.n30,
            TermId::N31 => &self.n31,
            TermId::Nagg0 => &self.agg0,
            TermId::Nagg1 => &self.agg1,
        }
    }
}

/// Evaluates every term once.
pub fn all_terms(u: &SpectralField, omega: &OmegaState, cfg: &NfrConfig) -> Result<TermSet> {
    check_band(omega, cfg)?;
    check_pair(u, omega)?;
    let n = trilinear_n(omega).value;
    let script_r = script_r(u, omega)?.value;
    let omega_dot = n.add(&script_r).expect("same band");
    let (n_r, n_nr) = split_resonant(omega, cfg)?;
    let n0 = term_n0(omega, cfg)?.value;
    let n1 = nj_from(cfg, omega, &n, 1);
    let n2 = nj_from(cfg, omega, &n, 2);
    let n3 = nj_from(cfg, omega, &n, 3);
    let r1 = r1_from(cfg, omega, &script_r);
    let n1nr = nr_part(cfg, omega, Stage::A1);
    let n1r = n1.sub(&n1nr).expect("same band");
    let n10 = zero_part(cfg, omega, Stage::A1);
    let n11 = one_part(cfg, omega, &omega_dot, Stage::A1);
    let n3nr = nr_part(cfg, omega, Stage::A3);
    let n3r = n3.sub(&n3nr).expect("same band");
    let n30 = zero_part(cfg, omega, Stage::A3);
    let n31 = one_part(cfg, omega, &omega_dot, Stage::A3);
    let agg0 = sum_states(&[&n0, &n10, &n30]);
    let r_pos = script_r.positive_part();
    let agg1 = sum_states(&[&r_pos, &n_r.value, &r1, &n1r, &n11, &n2, &n3r, &n31]);
    Ok(TermSet {
        n,
        script_r,
        omega_dot,
        n_r: n_r.value,
        n_nr: n_nr.value,
        n0,
        n1,
        n2,
        n3,
        r1,
        n1r,
        n1nr,
        n10,
        n11,
        n3r,
        n3nr,
        n30,
        n31,
        agg0,
        agg1,
    })
}

/// `(N⁽⁰⁾, N⁽¹⁾)` with `N⁽⁰⁾ = N₀ + N₁,₀ + N₃,₀` and
/// `N⁽¹⁾ = 𝓡 + N_R + R₁ + N₁,R + N₁,₁ + N₂ + N₃,R + N₃,₁` on `n > 0`.
pub fn aggregate(u: &SpectralField, omega: &OmegaState, cfg: &NfrConfig) -> Result<(TermValue, TermValue)> {
    let set = all_terms(u, omega, cfg)?;
    Ok((
        TermValue::new(TermId::Nagg0, set.agg0),
        TermValue::new(TermId::Nagg1, set.agg1),
    ))
}

/// Evaluates a single named term.
pub fn evaluate(id: TermId, u: &SpectralField, omega: &OmegaState, cfg: &NfrConfig) -> Result<TermValue> {
    check_band(omega, cfg)?;
    let v = match id {
        TermId::N => return Ok(trilinear_n(omega)),
        TermId::R => return script_r(u, omega),
        TermId::NR => return split_resonant(omega, cfg).map(|p| p.0),
        TermId::NNR => return split_resonant(omega, cfg).map(|p| p.1),
        TermId::N0 => return term_n0(omega, cfg),
        TermId::N1 => return term_nj(omega, cfg, 1),
        TermId::N2 => return term_nj(omega, cfg, 2),
        TermId::N3 => return term_nj(omega, cfg, 3),
        TermId::R1 => return term_r1(u, omega, cfg),
        TermId::N1R => return split_n1(omega, cfg).map(|p| p.0),
        TermId::N1NR => return split_n1(omega, cfg).map(|p| p.1),
        TermId::N10 => return term_n10(omega, cfg),
        TermId::N11 => {
            let dot = time_derivative(u, omega)?;
            return term_n11(omega, &dot, cfg);
        }
        TermId::N3R => return split_n3(omega, cfg).map(|p| p.0),
        TermId::N3NR => return split_n3(omega, cfg).map(|p| p.1),
        TermId::N30 => return term_n30(omega, cfg),
        TermId::N31 => {
            let dot = time_derivative(u, omega)?;
            return term_n31(omega, &dot, cfg);
        }
        TermId::Nagg0 => aggregate(u, omega, cfg)?.0,
        TermId::Nagg1 => aggregate(u, omega, cfg)?.1,
    };
    Ok(v)
}
