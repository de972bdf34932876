//! Frequency-tuple plans and the weighted sums evaluated over them.
//!
//! A plan lists every admissible tuple of a sum together with its integer
//! phases and multiplier weight. Plans do not depend on `ω`, so they are
//! built once per band (and comparability constant) and shared.
//!
//! Sums are evaluated after dephasing: with `ψ(k) = e^{-itk|k|} x(k)` every
//! summand `e^{itΦ} x(n₁) y(n₂) z*(n₃)` becomes `e^{itn|n|} ψ_x(n₁) ψ_y(n₂) ψ_z*(n₃)`,
//! and the same holds for the sextic sums because `n₁` (or `n₃`) drops out of
//! the stacked phase.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebra::{
    a1_branch_raw, family_value, in_a3_raw, phase_raw, tilde_m1_value, Comparability, Family,
};
use crate::omega::{linear_phase, OmegaState};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A trilinear summand `(n₁, n₂, n₃)` for a fixed output `n`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct QuadTerm {
    pub idx: [u16; 3],
    pub phi: i64,
    pub m: Complex64,
}

/// Which factors of a product carry the `*` (conjugate-reflect) operation.
pub(crate) type StarMask<const K: usize> = [bool; K];

pub(crate) struct QuadPlan {
    pub star: StarMask<3>,
    /// Indexed by `n + n_max`.
    pub by_n: Vec<Vec<QuadTerm>>,
}

/// All trilinear plans of a band.
pub(crate) struct QuadPlans {
    /// `m̃₁ ω ω ω*`, outputs `n > 0`.
    pub tilde1: QuadPlan,
    /// `m₁ 1{n₁₂n₁₃=0} ω ω ω*`, outputs `n > 0`.
    pub degenerate1: QuadPlan,
    /// `m₂ ω ω* ω`, outputs `n < 0`.
    pub m2: QuadPlan,
    /// `m₃ ω* ω ω`, outputs `n < 0`.
    pub m3: QuadPlan,
}

/// A quintic summand for a fixed output `n` of a sextic sum.
#[derive(Clone, Copy, Debug)]
pub(crate) struct SexticTerm {
    /// Band offsets `k + n_max` of the five factors.
    pub slots: [u16; 5],
    pub phi: i64,
    /// `Φ + Φ₁` or `Φ + Φ₃`.
    pub total: i64,
    /// Product of the outer and inner multipliers.
    pub w: Complex64,
}

pub(crate) struct SexticPlan {
    pub star: StarMask<5>,
    pub by_n: Vec<Vec<SexticTerm>>,
    /// Tuples of the set dropped because `Φ + Φⱼ = 0`.
    pub dropped_zero_total: usize,
}

impl SexticPlan {
    pub fn len(&self) -> usize {
        self.by_n.iter().map(Vec::len).sum()
    }
}

pub(crate) struct SexticPlans {
    pub a1: SexticPlan,
    pub a3: SexticPlan,
}

#[inline]
fn off(k: i64, n_max: i64) -> u16 {
    (k + n_max) as u16
}

fn quad_plan(
    n_max: usize,
    star: StarMask<3>,
    weight: impl Fn(i64, i64, i64, i64) -> Complex64 + Sync,
) -> QuadPlan {
    let b = n_max as i64;
    let by_n = (-b..=b)
        .into_par_iter()
        .map(|n| {
            let mut terms = Vec::new();
            for n1 in -b..=b {
                for n2 in -b..=b {
                    let n3 = n - n1 - n2;
                    if n3.abs() > b {
                        continue;
                    }
                    let m = weight(n, n1, n2, n3);
                    if m != ZERO {
                        terms.push(QuadTerm {
                            idx: [off(n1, b), off(n2, b), off(n3, b)],
                            phi: phase_raw(n, n1, n2, n3),
                            m,
                        });
                    }
                }
            }
            terms
        })
        .collect();
    QuadPlan { star, by_n }
}

fn build_quad_plans(n_max: usize) -> QuadPlans {
    QuadPlans {
        tilde1: quad_plan(n_max, [false, false, true], tilde_m1_value),
        degenerate1: quad_plan(n_max, [false, false, true], |n, n1, n2, n3| {
            if (n1 + n2) * (n1 + n3) == 0 {
                family_value(Family::M1, n, n1, n2, n3)
            } else {
                ZERO
            }
        }),
        m2: quad_plan(n_max, [false, true, false], |n, n1, n2, n3| {
            family_value(Family::M2, n, n1, n2, n3)
        }),
        m3: quad_plan(n_max, [true, false, false], |n, n1, n2, n3| {
            family_value(Family::M3, n, n1, n2, n3)
        }),
    }
}

/// Outer tuples `(n₁, n₂, n₃)` with `m̃₁(n, n₁, n₂, n₃) ≠ 0` inside the band.
fn outer_tuples(n: i64, b: i64) -> impl Iterator<Item = (i64, i64, i64)> {
    ((n + 1)..=b).flat_map(move |n1| {
        (-b..=b).filter_map(move |n2| {
            let n3 = n - n1 - n2;
            (n3.abs() <= b && tilde_m1_value(n, n1, n2, n3) != ZERO).then_some((n1, n2, n3))
        })
    })
}

fn build_a1(n_max: usize, k: Comparability) -> SexticPlan {
    let b = n_max as i64;
    let mut by_n: Vec<Vec<SexticTerm>> = (0..2 * n_max + 1).map(|_| Vec::new()).collect();
    let results: Vec<(i64, Vec<SexticTerm>, usize)> = (1..=b)
        .into_par_iter()
        .map(|n| {
            let mut terms = Vec::new();
            let mut dropped = 0;
            for (n1, n2, n3) in outer_tuples(n, b) {
                let (bn, b2) = (1 + n * n, 1 + n2 * n2);
                if !k.br_ll(b2, bn) {
                    continue;
                }
                let m_out = tilde_m1_value(n, n1, n2, n3);
                let phi = phase_raw(n, n1, n2, n3);
                // inner m̃₁(n₁, n₄, n₅, n₆) needs n₄ > n₁
                for n4 in (n1 + 1)..=b {
                    for n5 in -b..=b {
                        let n6 = n1 - n4 - n5;
                        if n6.abs() > b {
                            continue;
                        }
                        let idx = [n, n1, n2, n3, n4, n5, n6];
                        if a1_branch_raw(&k, idx).is_none() {
                            continue;
                        }
                        let m_in = tilde_m1_value(n1, n4, n5, n6);
                        if m_in == ZERO {
                            continue;
                        }
                        let total = phi + phase_raw(n1, n4, n5, n6);
                        if total == 0 {
                            dropped += 1;
                            continue;
                        }
                        terms.push(SexticTerm {
                            slots: [off(n2, b), off(n3, b), off(n4, b), off(n5, b), off(n6, b)],
                            phi,
                            total,
                            w: m_out * m_in,
                        });
                    }
                }
            }
            (n, terms, dropped)
        })
        .collect();
    let mut dropped_zero_total = 0;
    for (n, terms, d) in results {
        by_n[(n + b) as usize] = terms;
        dropped_zero_total += d;
    }
    SexticPlan {
        // ω(n₂) ω*(n₃) ω(n₄) ω(n₅) ω*(n₆)
        star: [false, true, false, false, true],
        by_n,
        dropped_zero_total,
    }
}

fn build_a3(n_max: usize, k: Comparability) -> SexticPlan {
    let b = n_max as i64;
    let mut by_n: Vec<Vec<SexticTerm>> = (0..2 * n_max + 1).map(|_| Vec::new()).collect();
    let results: Vec<(i64, Vec<SexticTerm>, usize)> = (1..=b)
        .into_par_iter()
        .map(|n| {
            let mut terms = Vec::new();
            let mut dropped = 0;
            for (n1, n2, n3) in outer_tuples(n, b) {
                let (bn, b2, b3) = (1 + n * n, 1 + n2 * n2, 1 + n3 * n3);
                if !k.br_ll(b2, bn.min(b3)) {
                    continue;
                }
                let m_out = tilde_m1_value(n, n1, n2, n3);
                let phi = phase_raw(n, n1, n2, n3);
                // m̃₁*(n₃, n₄, n₅, n₆) needs n₄ < n₃ < 0
                if n3 >= 0 {
                    continue;
                }
                for n4 in -b..n3 {
                    for n5 in -b..=b {
                        let n6 = n3 - n4 - n5;
                        if n6.abs() > b {
                            continue;
                        }
                        let idx = [n, n1, n2, n3, n4, n5, n6];
                        if !in_a3_raw(&k, idx) {
                            continue;
                        }
                        let m_in = tilde_m1_value(-n3, -n4, -n5, -n6).conj();
                        if m_in == ZERO {
                            continue;
                        }
                        let total = phi + phase_raw(n3, n4, n5, n6);
                        if total == 0 {
                            dropped += 1;
                            continue;
                        }
                        terms.push(SexticTerm {
                            slots: [off(n1, b), off(n2, b), off(n4, b), off(n5, b), off(n6, b)],
                            phi,
                            total,
                            w: m_out * m_in,
                        });
                    }
                }
            }
            (n, terms, dropped)
        })
        .collect();
    let mut dropped_zero_total = 0;
    for (n, terms, d) in results {
        by_n[(n + b) as usize] = terms;
        dropped_zero_total += d;
    }
    SexticPlan {
        // ω(n₁) ω(n₂) ω*(n₄) ω*(n₅) ω(n₆)
        star: [false, false, true, true, false],
        by_n,
        dropped_zero_total,
    }
}

type QuadCache = Mutex<HashMap<usize, Arc<QuadPlans>>>;
type SexticCache = Mutex<HashMap<(usize, u64), Arc<SexticPlans>>>;

static QUAD_CACHE: OnceLock<QuadCache> = OnceLock::new();
static SEXTIC_CACHE: OnceLock<SexticCache> = OnceLock::new();

/// Shared trilinear plans for a band.
pub(crate) fn quad_plans(n_max: usize) -> Arc<QuadPlans> {
    let cache = QUAD_CACHE.get_or_init(Default::default);
    if let Some(p) = cache.lock().expect("plan cache poisoned").get(&n_max) {
        return Arc::clone(p);
    }
    let built = Arc::new(build_quad_plans(n_max));
    let mut guard = cache.lock().expect("plan cache poisoned");
    Arc::clone(guard.entry(n_max).or_insert(built))
}

/// Shared second-stage plans for a band and comparability constant.
pub(crate) fn sextic_plans(n_max: usize, k: Comparability) -> Arc<SexticPlans> {
    let cache = SEXTIC_CACHE.get_or_init(Default::default);
    let key = (n_max, k.k().to_bits());
    if let Some(p) = cache.lock().expect("plan cache poisoned").get(&key) {
        return Arc::clone(p);
    }
    let built = Arc::new(SexticPlans {
        a1: build_a1(n_max, k),
        a3: build_a3(n_max, k),
    });
    let mut guard = cache.lock().expect("plan cache poisoned");
    Arc::clone(guard.entry(key).or_insert(built))
}

/// `ψ(k) = e^{-itk|k|} x(k)` and `ψ*(k) = conj(ψ(-k))`, stored by band offset.
pub(crate) struct Dephased {
    pub psi: Vec<Complex64>,
    pub psi_star: Vec<Complex64>,
}

impl Dephased {
    pub fn new(x: &OmegaState, t: f64) -> Self {
        let psi: Vec<Complex64> = x.iter().map(|(k, c)| linear_phase(-t, k) * c).collect();
        let psi_star = psi.iter().rev().map(|c| c.conj()).collect();
        Self { psi, psi_star }
    }

    #[inline]
    pub fn at(&self, slot: u16, star: bool) -> Complex64 {
        if star {
            self.psi_star[slot as usize]
        } else {
            self.psi[slot as usize]
        }
    }
}

/// Assembles an output sequence from per-`n` values computed in parallel.
pub(crate) fn collect_outputs(
    n_max: usize,
    t: f64,
    outputs: impl Fn(i64) -> bool + Sync,
    value: impl Fn(i64) -> Complex64 + Sync,
) -> OmegaState {
    let b = n_max as i64;
    let seq: Vec<Complex64> = (-b..=b)
        .into_par_iter()
        .map(|n| if outputs(n) { linear_phase(t, n) * value(n) } else { ZERO })
        .collect();
    OmegaState::new(n_max, t, seq).expect("length matches band")
}

/// `Σ e^{itΦ} c(Φ) m · x(n₁) y(n₂) z(n₃)` with the plan's star pattern applied,
/// keeping only tuples with `keep(Φ)`.
pub(crate) fn quad_sum(
    plan: &QuadPlan,
    n_max: usize,
    t: f64,
    args: [&Dephased; 3],
    keep: impl Fn(i64) -> bool + Sync,
    coef: impl Fn(i64) -> Complex64 + Sync,
) -> OmegaState {
    let b = n_max as i64;
    collect_outputs(
        n_max,
        t,
        |n| !plan.by_n[(n + b) as usize].is_empty(),
        |n| {
            let mut acc = ZERO;
            for q in &plan.by_n[(n + b) as usize] {
                if !keep(q.phi) {
                    continue;
                }
                let p = args[0].at(q.idx[0], plan.star[0])
                    * args[1].at(q.idx[1], plan.star[1])
                    * args[2].at(q.idx[2], plan.star[2]);
                acc += coef(q.phi) * q.m * p;
            }
            acc
        },
    )
}

/// Sextic sum over a plan: `Σ e^{it(Φ+Φⱼ)} c(Φ, Φ+Φⱼ) w · Π slots`, restricted to `|Φ| > M`.
pub(crate) fn sextic_sum(
    plan: &SexticPlan,
    n_max: usize,
    t: f64,
    m: f64,
    args: [&Dephased; 5],
    coef: impl Fn(i64, i64) -> Complex64 + Sync,
) -> OmegaState {
    let b = n_max as i64;
    collect_outputs(
        n_max,
        t,
        |n| !plan.by_n[(n + b) as usize].is_empty(),
        |n| {
            let mut acc = ZERO;
            for s in &plan.by_n[(n + b) as usize] {
                if (s.phi.abs() as f64) <= m {
                    continue;
                }
                let mut p = s.w * coef(s.phi, s.total);
                for j in 0..5 {
                    p *= args[j].at(s.slots[j], plan.star[j]);
                }
                acc += p;
            }
            acc
        },
    )
}

/// Product-rule sum `Σ c · Σ_j (slot j replaced by the derivative)`.
pub(crate) fn sextic_product_rule_sum(
    plan: &SexticPlan,
    n_max: usize,
    t: f64,
    m: f64,
    x: &Dephased,
    dx: &Dephased,
    coef: impl Fn(i64, i64) -> Complex64 + Sync,
) -> OmegaState {
    let b = n_max as i64;
    collect_outputs(
        n_max,
        t,
        |n| !plan.by_n[(n + b) as usize].is_empty(),
        |n| {
            let mut acc = ZERO;
            for s in &plan.by_n[(n + b) as usize] {
                if (s.phi.abs() as f64) <= m {
                    continue;
                }
                let v: [Complex64; 5] =
                    std::array::from_fn(|j| x.at(s.slots[j], plan.star[j]));
                let d: [Complex64; 5] =
                    std::array::from_fn(|j| dx.at(s.slots[j], plan.star[j]));
                let mut deriv = ZERO;
                for j in 0..5 {
                    let mut p = d[j];
                    for (i, vi) in v.iter().enumerate() {
                        if i != j {
                            p *= vi;
                        }
                    }
                    deriv += p;
                }
                acc += s.w * coef(s.phi, s.total) * deriv;
            }
            acc
        },
    )
}
