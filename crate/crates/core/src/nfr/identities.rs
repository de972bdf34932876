//! Algebraic identities of the reduction, checked numerically.
//!
//! The time derivatives of `N₀`, `N₁,₀` and `N₃,₀` are computed here by their
//! own closed-form loops (product rule over the plan, with the `iΦ` factor from
//! the oscillation), not through the evaluators they are compared against.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::plan::{collect_outputs, quad_plans, sextic_plans, Dephased, QuadPlan, SexticPlan, ZERO};
use super::{all_terms, check_band, check_pair, time_derivative, NfrConfig, I};
use crate::algebra::{a1_branch_raw, family_value, in_a3_raw, phase_raw, tilde_m1_value, Family};
use crate::error::{input, Result};
use crate::fourier::{apply_multiplier, exact_convolution, Multiplier, SpectralField};
use crate::gauge::{gauge_forward, omega_of};
use crate::omega::{linear_phase, OmegaState};

/// Bands above this are refused by the direct (un-planned) evaluators.
pub const DIRECT_MAX_BAND: usize = 24;

/// `‖lhs - Σ rhs‖` together with the scale it is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub absolute: f64,
    /// `max(‖lhs‖, max_j ‖rhs_j‖)`.
    pub scale: f64,
    pub relative: f64,
}

impl Residual {
    pub(crate) fn measure(lhs: &OmegaState, rhs: &[&OmegaState], s: f64) -> Self {
        let mut diff = lhs.clone();
        let mut scale = lhs.l2s(s);
        for r in rhs {
            diff = diff.sub(r).expect("terms share a band");
            scale = scale.max(r.l2s(s));
        }
        let absolute = diff.l2s(s);
        Self {
            absolute,
            scale,
            relative: if scale > 0.0 { absolute / scale } else { absolute },
        }
    }
}

/// Residuals of the three differentiation-by-parts identities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DbpResidual {
    /// `N_NR - (∂t N₀ + N₁ + N₂ + N₃ + R₁)`.
    pub first: Residual,
    /// `N₁,NR - (∂t N₁,₀ + N₁,₁)`.
    pub second_a1: Residual,
    /// `N₃,NR - (∂t N₃,₀ + N₃,₁)`.
    pub second_a3: Residual,
}

impl DbpResidual {
    pub fn worst(&self) -> f64 {
        self.first
            .relative
            .max(self.second_a1.relative)
            .max(self.second_a3.relative)
    }
}

fn dt_quad(plan: &QuadPlan, n_max: usize, t: f64, m: f64, x: &Dephased, dx: &Dephased) -> OmegaState {
    let b = n_max as i64;
    collect_outputs(
        n_max,
        t,
        |n| n > 0,
        |n| {
            let mut acc = ZERO;
            for q in &plan.by_n[(n + b) as usize] {
                if (q.phi.abs() as f64) <= m {
                    continue;
                }
                let v: [Complex64; 3] = std::array::from_fn(|j| x.at(q.idx[j], plan.star[j]));
                let d: [Complex64; 3] = std::array::from_fn(|j| dx.at(q.idx[j], plan.star[j]));
                let osc = I * q.phi as f64 * v[0] * v[1] * v[2];
                let prod = d[0] * v[1] * v[2] + v[0] * d[1] * v[2] + v[0] * v[1] * d[2];
                acc += -I * q.m / q.phi as f64 * (osc + prod);
            }
            acc
        },
    )
}

fn dt_sextic(plan: &SexticPlan, n_max: usize, t: f64, m: f64, x: &Dephased, dx: &Dephased) -> OmegaState {
    let b = n_max as i64;
    collect_outputs(
        n_max,
        t,
        |n| n > 0,
        |n| {
            let mut acc = ZERO;
            for s in &plan.by_n[(n + b) as usize] {
                if (s.phi.abs() as f64) <= m {
                    continue;
                }
                let v: [Complex64; 5] = std::array::from_fn(|j| x.at(s.slots[j], plan.star[j]));
                let d: [Complex64; 5] = std::array::from_fn(|j| dx.at(s.slots[j], plan.star[j]));
                let full: Complex64 = v.iter().product();
                let mut deriv = I * s.total as f64 * full;
                for j in 0..5 {
                    let others: Complex64 = (0..5).filter(|&i| i != j).map(|i| v[i]).product();
                    deriv += d[j] * others;
                }
                acc += s.w / (s.phi as f64 * s.total as f64) * deriv;
            }
            acc
        },
    )
}

/// Residuals of the first- and second-stage identities at one `(u, ω)`.
pub fn dbp_identity_residual(u: &SpectralField, omega: &OmegaState, cfg: &NfrConfig) -> Result<DbpResidual> {
    let terms = all_terms(u, omega, cfg)?;
    let t = omega.t();
    let x = Dephased::new(omega, t);
    let dx = Dephased::new(&terms.omega_dot, t);
    let quads = quad_plans(cfg.n_max);
    let sextics = sextic_plans(cfg.n_max, cfg.k);
    let dt_n0 = dt_quad(&quads.tilde1, cfg.n_max, t, cfg.m, &x, &dx);
    let dt_n10 = dt_sextic(&sextics.a1, cfg.n_max, t, cfg.m, &x, &dx);
    let dt_n30 = dt_sextic(&sextics.a3, cfg.n_max, t, cfg.m, &x, &dx);
    Ok(DbpResidual {
        first: Residual::measure(
            &terms.n_nr,
            &[&dt_n0, &terms.n1, &terms.n2, &terms.n3, &terms.r1],
            cfg.s,
        ),
        second_a1: Residual::measure(&terms.n1nr, &[&dt_n10, &terms.n11], cfg.s),
        second_a3: Residual::measure(&terms.n3nr, &[&dt_n30, &terms.n31], cfg.s),
    })
}

#[inline]
fn cis(x: f64) -> Complex64 {
    let (s, c) = x.sin_cos();
    Complex64::new(c, s)
}

/// `N[ω](k)` by a plain double loop with the oscillation applied directly.
fn direct_n_at(omega: &OmegaState, k: i64) -> Complex64 {
    let b = omega.n_max() as i64;
    let t = omega.t();
    let mut acc = ZERO;
    for n1 in -b..=b {
        for n2 in -b..=b {
            let n3 = k - n1 - n2;
            if n3.abs() > b {
                continue;
            }
            let e = cis(t * phase_raw(k, n1, n2, n3) as f64);
            let a = tilde_m1_value(k, n1, n2, n3);
            if a != ZERO {
                acc += e * a * omega.get(n1) * omega.get(n2) * omega.star(n3);
            }
            let m2 = family_value(Family::M2, k, n1, n2, n3);
            if m2 != ZERO {
                acc += e * m2 * omega.get(n1) * omega.star(n2) * omega.get(n3);
            }
            let m3 = family_value(Family::M3, k, n1, n2, n3);
            if m3 != ZERO {
                acc += e * m3 * omega.star(n1) * omega.get(n2) * omega.get(n3);
            }
        }
    }
    acc
}

fn check_direct(cfg: &NfrConfig) -> Result<()> {
    if cfg.n_max > DIRECT_MAX_BAND {
        return input(format!(
            "direct evaluation is limited to n_max ≤ {DIRECT_MAX_BAND}, got {}",
            cfg.n_max
        ));
    }
    Ok(())
}

/// `N₁,R` summed directly over the complement of `A₁` (plus the excluded `Φ+Φ₁ = 0` tuples).
pub fn direct_n1r(omega: &OmegaState, cfg: &NfrConfig) -> Result<OmegaState> {
    check_band(omega, cfg)?;
    check_direct(cfg)?;
    let b = cfg.n_max as i64;
    let t = omega.t();
    let n_full: Vec<Complex64> = (-b..=b).map(|k| direct_n_at(omega, k)).collect();
    Ok(OmegaState::from_fn(cfg.n_max, t, |n| {
        if n <= 0 {
            return ZERO;
        }
        let mut acc = ZERO;
        for n1 in -b..=b {
            for n2 in -b..=b {
                let n3 = n - n1 - n2;
                if n3.abs() > b {
                    continue;
                }
                let m_out = tilde_m1_value(n, n1, n2, n3);
                let phi = phase_raw(n, n1, n2, n3);
                if m_out == ZERO || (phi.abs() as f64) <= cfg.m {
                    continue;
                }
                // N(n₁) minus its A₁ part
                let mut inner = n_full[(n1 + b) as usize];
                for n4 in -b..=b {
                    for n5 in -b..=b {
                        let n6 = n1 - n4 - n5;
                        if n6.abs() > b {
                            continue;
                        }
                        let m_in = tilde_m1_value(n1, n4, n5, n6);
                        let phi1 = phase_raw(n1, n4, n5, n6);
                        let idx = [n, n1, n2, n3, n4, n5, n6];
                        if m_in == ZERO || phi + phi1 == 0 || a1_branch_raw(&cfg.k, idx).is_none() {
                            continue;
                        }
                        inner -= cis(t * phi1 as f64)
                            * m_in
                            * omega.get(n4)
                            * omega.get(n5)
                            * omega.star(n6);
                    }
                }
                acc += I * cis(t * phi as f64) * m_out / phi as f64
                    * inner
                    * omega.get(n2)
                    * omega.star(n3);
            }
        }
        acc
    }))
}

/// `N₃,R` summed directly over the complement of `A₃`.
pub fn direct_n3r(omega: &OmegaState, cfg: &NfrConfig) -> Result<OmegaState> {
    check_band(omega, cfg)?;
    check_direct(cfg)?;
    let b = cfg.n_max as i64;
    let t = omega.t();
    let n_full: Vec<Complex64> = (-b..=b).map(|k| direct_n_at(omega, k)).collect();
    Ok(OmegaState::from_fn(cfg.n_max, t, |n| {
        if n <= 0 {
            return ZERO;
        }
        let mut acc = ZERO;
        for n1 in -b..=b {
            for n2 in -b..=b {
                let n3 = n - n1 - n2;
                if n3.abs() > b {
                    continue;
                }
                let m_out = tilde_m1_value(n, n1, n2, n3);
                let phi = phase_raw(n, n1, n2, n3);
                if m_out == ZERO || (phi.abs() as f64) <= cfg.m {
                    continue;
                }
                // N*(n₃) minus its A₃ part
                let mut inner = n_full[(-n3 + b) as usize].conj();
                for n4 in -b..=b {
                    for n5 in -b..=b {
                        let n6 = n3 - n4 - n5;
                        if n6.abs() > b {
                            continue;
                        }
                        let m_in = tilde_m1_value(-n3, -n4, -n5, -n6).conj();
                        let phi3 = phase_raw(n3, n4, n5, n6);
                        let idx = [n, n1, n2, n3, n4, n5, n6];
                        if m_in == ZERO || phi + phi3 == 0 || !in_a3_raw(&cfg.k, idx) {
                            continue;
                        }
                        inner -= cis(t * phi3 as f64)
                            * m_in
                            * omega.star(n4)
                            * omega.star(n5)
                            * omega.get(n6);
                    }
                }
                acc += I * cis(t * phi as f64) * m_out / phi as f64
                    * inner
                    * omega.get(n1)
                    * omega.get(n2);
            }
        }
        acc
    }))
}

/// Partition checks: `N_R + N_NR` against the `n > 0` part of `N`, and (for
/// small bands) the planned `N₁,NR`, `N₃,NR` plus directly summed complements
/// against `N₁`, `N₃`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionResidual {
    pub first: Residual,
    pub n1: Option<Residual>,
    pub n3: Option<Residual>,
}

impl PartitionResidual {
    pub fn worst(&self) -> f64 {
        [Some(self.first), self.n1, self.n3]
            .iter()
            .flatten()
            .map(|r| r.relative)
            .fold(0.0, f64::max)
    }
}

pub fn partition_residuals(u: &SpectralField, omega: &OmegaState, cfg: &NfrConfig) -> Result<PartitionResidual> {
    let terms = all_terms(u, omega, cfg)?;
    let direct_pos = OmegaState::from_fn(cfg.n_max, omega.t(), |n| {
        if n > 0 {
            direct_n_at(omega, n)
        } else {
            ZERO
        }
    });
    let first = Residual::measure(&direct_pos, &[&terms.n_r, &terms.n_nr], cfg.s);
    let (n1, n3) = if cfg.n_max <= DIRECT_MAX_BAND {
        let r1 = direct_n1r(omega, cfg)?;
        let r3 = direct_n3r(omega, cfg)?;
        (
            Some(Residual::measure(&terms.n1, &[&r1, &terms.n1nr], cfg.s)),
            Some(Residual::measure(&terms.n3, &[&r3, &terms.n3nr], cfg.s)),
        )
    } else {
        (None, None)
    };
    Ok(PartitionResidual { first, n1, n3 })
}

/// `∂t ω` from the Benjamin–Ono flow at a real mean-zero `u` against `N[ω] + 𝓡[u, ω]`.
///
/// The flow derivative is exact: `∂t V = -i(∂x⁻¹∂t u)V` and `∂t v = i∂̂∂t V`
/// with `∂t u = -H∂x²u + ∂x(u²)` evaluated on twice the band. Only the tail of
/// `V` beyond the band separates the two sides.
pub fn omega_equation_residual(u: &SpectralField, t: f64, s: f64) -> Result<Residual> {
    let nb = u.n_max();
    let pair = gauge_forward(u)?;
    let omega = omega_of(&pair.v, t);
    let rhs = time_derivative(u, &omega)?;

    let wide = 2 * nb;
    let uw = u.with_band(wide);
    let big_v = gauge_forward(&uw)?.big_v;
    let u2 = exact_convolution(u, u, wide);
    let u_t = SpectralField::from_fn(uw.grid(), |n| {
        let k = n as f64;
        Complex64::new(0.0, -k * n.abs() as f64) * u.coeff(n) + Complex64::new(0.0, k) * u2.coeff(n)
    });
    let theta_t = apply_multiplier(&u_t, Multiplier::DxInv)?;
    let prod = exact_convolution(&theta_t, &big_v, nb);
    let lhs = OmegaState::from_fn(nb, t, |n| {
        // ∂t v̂ = i·∂̂(-i·prod) = ∂̂ prod
        let v_t = Multiplier::DHat.apply_at(n, prod.coeff(n));
        let lin = Complex64::new(0.0, (n * n.abs()) as f64) * pair.v.coeff(n);
        linear_phase(t, n) * (lin + v_t)
    });
    Ok(Residual::measure(&lhs, &[&rhs], s))
}

/// One sample of a trajectory for the integral-form check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DuhamelSample {
    pub omega: OmegaState,
    pub agg0: OmegaState,
    pub agg1: OmegaState,
}

impl DuhamelSample {
    pub fn at(u: &SpectralField, omega: &OmegaState, cfg: &NfrConfig) -> Result<Self> {
        check_pair(u, omega)?;
        let terms = all_terms(u, omega, cfg)?;
        Ok(Self {
            omega: omega.clone(),
            agg0: terms.agg0,
            agg1: terms.agg1,
        })
    }
}

/// `ω(T) - ω(0) - [N⁽⁰⁾]₀^T - ∫₀^T N⁽¹⁾` on `n > 0`, with the integral by the
/// trapezoid rule over the sample times.
pub fn duhamel_residual(samples: &[DuhamelSample], s: f64) -> Result<Residual> {
    if samples.len() < 2 {
        return input("the integral form needs at least two samples");
    }
    let first = &samples[0];
    let last = &samples[samples.len() - 1];
    let n_max = first.omega.n_max();
    if samples.iter().any(|x| x.omega.n_max() != n_max) {
        return input("samples must share a band");
    }
    let mut integral = OmegaState::zeros(n_max, last.omega.t());
    for w in samples.windows(2) {
        let h = w[1].omega.t() - w[0].omega.t();
        if !(h > 0.0) {
            return input("sample times must be strictly increasing");
        }
        integral = integral
            .axpy(0.5 * h, &w[0].agg1)?
            .axpy(0.5 * h, &w[1].agg1)?;
    }
    let lhs = last.omega.sub(&first.omega)?.positive_part();
    let boundary = last.agg0.sub(&first.agg0)?.positive_part();
    let integral = integral.positive_part();
    Ok(Residual::measure(&lhs, &[&boundary, &integral], s))
}
