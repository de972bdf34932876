//! Exact arithmetic on frequency tuples: multipliers, phases, and the
//! comparability sets used by the second normal-form stage.
//!
//! Indices are `i64`; phases stay exact for `|nᵢ| ≤ 2²⁰`.

use num_complex::{Complex, Complex64};
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{config, input, Result};

/// A complex number with rational parts.
pub type ExactComplex = Complex<Ratio<i64>>;

/// `n|n|`.
#[inline]
pub fn sq_signed(n: i64) -> i64 {
    n * n.abs()
}

/// `⟨n⟩² = 1 + n²`, exact.
#[inline]
pub fn bracket_sq(n: i64) -> i64 {
    1 + n * n
}

/// `n̂ = n - i·1{n=0}`.
pub fn nhat(n: i64) -> Complex64 {
    if n == 0 {
        Complex64::new(0.0, -1.0)
    } else {
        Complex64::new(n as f64, 0.0)
    }
}

fn nhat_exact(n: i64) -> ExactComplex {
    if n == 0 {
        Complex::new(Ratio::zero(), Ratio::from_integer(-1))
    } else {
        Complex::new(Ratio::from_integer(n), Ratio::zero())
    }
}

/// `(n, n₁, n₂, n₃)` with `n = n₁ + n₂ + n₃`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadIndex {
    n: i64,
    n1: i64,
    n2: i64,
    n3: i64,
}

impl QuadIndex {
    pub fn new(n: i64, n1: i64, n2: i64, n3: i64) -> Result<Self> {
        if n != n1 + n2 + n3 {
            return input(format!("quad ({n}, {n1}, {n2}, {n3}) violates n = n1 + n2 + n3"));
        }
        Ok(Self { n, n1, n2, n3 })
    }

    /// The quad with output `n₁ + n₂ + n₃`.
    pub fn from_inputs(n1: i64, n2: i64, n3: i64) -> Self {
        Self {
            n: n1 + n2 + n3,
            n1,
            n2,
            n3,
        }
    }

    pub fn n(&self) -> i64 {
        self.n
    }
    pub fn n1(&self) -> i64 {
        self.n1
    }
    pub fn n2(&self) -> i64 {
        self.n2
    }
    pub fn n3(&self) -> i64 {
        self.n3
    }

    pub fn negated(&self) -> Self {
        Self {
            n: -self.n,
            n1: -self.n1,
            n2: -self.n2,
            n3: -self.n3,
        }
    }

    pub fn as_array(&self) -> [i64; 4] {
        [self.n, self.n1, self.n2, self.n3]
    }
}

/// One of the three trilinear multiplier families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    M1,
    M2,
    M3,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::M1, Family::M2, Family::M3];
}

impl TryFrom<u8> for Family {
    type Error = crate::Error;

    fn try_from(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Family::M1),
            2 => Ok(Family::M2),
            3 => Ok(Family::M3),
            _ => input(format!("multiplier index must be 1, 2 or 3, got {k}")),
        }
    }
}

/// `2i·x / (n̂_a·n̂_b)` in double precision, one rounding per component.
#[inline]
fn two_i_over(x: i64, a: i64, b: i64) -> Complex64 {
    let zeros = (a == 0) as u8 + (b == 0) as u8;
    let p = if a == 0 { 1 } else { a } * if b == 0 { 1 } else { b };
    let q = (2 * x) as f64 / p as f64;
    match zeros {
        0 => Complex64::new(0.0, q),
        1 => Complex64::new(-q, 0.0),
        _ => Complex64::new(0.0, -q),
    }
}

/// `m₁`, `m₂`, `m₃` evaluated from raw indices, no validation.
#[inline]
pub(crate) fn family_value(f: Family, n: i64, n1: i64, n2: i64, n3: i64) -> Complex64 {
    let n23 = n2 + n3;
    match f {
        Family::M1 if n > 0 && n23 < 0 && n3 != 0 => two_i_over(n * n23, n1, n2),
        Family::M2 if n < 0 && n23 > 0 && n3 != 0 => two_i_over(n * n23, n1, n2),
        Family::M3 if n < 0 && n2 != 0 && n3 != 0 => two_i_over(n, n1, 1),
        _ => Complex64::new(0.0, 0.0),
    }
}

/// `m̃₁` from raw indices.
#[inline]
pub(crate) fn tilde_m1_value(n: i64, n1: i64, n2: i64, n3: i64) -> Complex64 {
    if (n1 + n2) * (n1 + n3) == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        family_value(Family::M1, n, n1, n2, n3)
    }
}

/// Multiplier `m_k(q)` in exact rational complex arithmetic.
pub fn multiplier_exact(f: Family, q: &QuadIndex) -> ExactComplex {
    let [n, n1, n2, n3] = q.as_array();
    let n23 = n2 + n3;
    let two_i = Complex::new(Ratio::zero(), Ratio::from_integer(2));
    let zero = Complex::new(Ratio::zero(), Ratio::zero());
    let int = |k: i64| Complex::new(Ratio::from_integer(k), Ratio::zero());
    match f {
        Family::M1 if n > 0 && n23 < 0 && n3 != 0 => {
            two_i * int(n * n23) / (nhat_exact(n1) * nhat_exact(n2))
        }
        Family::M2 if n < 0 && n23 > 0 && n3 != 0 => {
            two_i * int(n * n23) / (nhat_exact(n1) * nhat_exact(n2))
        }
        Family::M3 if n < 0 && n2 * n3 != 0 => two_i * int(n) / nhat_exact(n1),
        _ => zero,
    }
}

pub fn exact_to_f64(z: &ExactComplex) -> Complex64 {
    Complex64::new(
        z.re.to_f64().expect("finite ratio"),
        z.im.to_f64().expect("finite ratio"),
    )
}

/// `m_k(q)` in double precision.
pub fn multiplier(f: Family, q: &QuadIndex) -> Complex64 {
    let [n, n1, n2, n3] = q.as_array();
    family_value(f, n, n1, n2, n3)
}

/// `m̃₁ = m₁·1{n₁₂n₁₃ ≠ 0}`.
pub fn tilde_m1(q: &QuadIndex) -> Complex64 {
    let [n, n1, n2, n3] = q.as_array();
    tilde_m1_value(n, n1, n2, n3)
}

/// `m_k*(q) = conj(m_k(-q))`.
pub fn star_multiplier(f: Family, q: &QuadIndex) -> Complex64 {
    multiplier(f, &q.negated()).conj()
}

/// `m̃₁*(q) = conj(m̃₁(-q))`.
pub fn star_tilde_m1(q: &QuadIndex) -> Complex64 {
    tilde_m1(&q.negated()).conj()
}

/// `Φ = n|n| - n₁|n₁| - n₂|n₂| - n₃|n₃|`.
pub fn phase(q: &QuadIndex) -> i64 {
    sq_signed(q.n) - sq_signed(q.n1) - sq_signed(q.n2) - sq_signed(q.n3)
}

#[inline]
pub(crate) fn phase_raw(n: i64, n1: i64, n2: i64, n3: i64) -> i64 {
    sq_signed(n) - sq_signed(n1) - sq_signed(n2) - sq_signed(n3)
}

/// Sign pattern of `(n₂, n₃)` selecting a factorisation of `Φ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseCase {
    /// `n₂ ≥ 0 > n₃`: `Φ = 2 n₁₃ n₂₃`.
    SecondNonNegative,
    /// `n₂ < 0 ≤ n₃`: `Φ = 2 n₁₂ n₂₃`.
    ThirdNonNegative,
    /// `n₂, n₃ < 0`: `Φ = 2(n n₂₃ - n₂ n₃)`.
    BothNegative,
}

/// Case tag and factored value of `Φ`; `None` when `m̃₁(q) = 0`.
pub fn phase_case_identity(q: &QuadIndex) -> Option<(PhaseCase, i64)> {
    if tilde_m1(q) == Complex64::new(0.0, 0.0) {
        return None;
    }
    let [n, n1, n2, n3] = q.as_array();
    let n23 = n2 + n3;
    Some(match (n2 >= 0, n3 >= 0) {
        (true, false) => (PhaseCase::SecondNonNegative, 2 * (n1 + n3) * n23),
        (false, true) => (PhaseCase::ThirdNonNegative, 2 * (n1 + n2) * n23),
        (false, false) => (PhaseCase::BothNegative, 2 * (n * n23 - n2 * n3)),
        // n₂₃ < 0 rules this out on the support of m̃₁
        (true, true) => unreachable!("m̃₁ ≠ 0 forces n₂₃ < 0"),
    })
}

/// `|Φ| / (|n₁₂||n₂₃|)` if `|n₂| ≥ |n₃|`, else `|Φ| / (|n₁₃||n₂₃|)`; `None` when `m̃₁(q) = 0`.
pub fn phase_lower_bound_ratio(q: &QuadIndex) -> Option<Ratio<i64>> {
    if tilde_m1(q) == Complex64::new(0.0, 0.0) {
        return None;
    }
    let [_, n1, n2, n3] = q.as_array();
    let pair = if n2.abs() >= n3.abs() { n1 + n2 } else { n1 + n3 };
    Some(Ratio::new(phase(q).abs(), (pair * (n2 + n3)).abs()))
}

/// `|m_k(q)| · min_j ⟨n_j⟩ / ⟨n⟩`.
pub fn multiplier_bound_ratio(f: Family, q: &QuadIndex) -> f64 {
    let m = multiplier(f, q).norm();
    if m == 0.0 {
        return 0.0;
    }
    let [n, n1, n2, n3] = q.as_array();
    let min_sq = bracket_sq(n1).min(bracket_sq(n2)).min(bracket_sq(n3));
    m * (min_sq as f64 / bracket_sq(n) as f64).sqrt()
}

/// Support implications of `m̃₁` and `m₂`: `n₁ > n > 0 > n₂₃ > -n₁` and its mirror.
pub fn support_implications_hold(q: &QuadIndex) -> bool {
    let [n, n1, n2, n3] = q.as_array();
    let n23 = n2 + n3;
    let zero = Complex64::new(0.0, 0.0);
    let m1_ok = tilde_m1(q) == zero || (n1 > n && n > 0 && n23 < 0 && -n1 < n23);
    let m2_ok = multiplier(Family::M2, q) == zero || (-n1 > -n && -n > 0 && n23 > 0);
    m1_ok && m2_ok
}

/// Which input of the outer quad is expanded by a second substitution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expansion {
    /// `n₁ = n₄ + n₅ + n₆`.
    First,
    /// `n₂ = n₄ + n₅ + n₆`.
    Second,
    /// `n₃ = n₄ + n₅ + n₆`.
    Third,
}

/// `(n, n₁, …, n₆)` with `n = n₁₂₃` and the expanded input equal to `n₄₅₆`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SexticIndex {
    idx: [i64; 7],
    variant: Expansion,
}

impl SexticIndex {
    pub fn new(idx: [i64; 7], variant: Expansion) -> Result<Self> {
        let [n, n1, n2, n3, n4, n5, n6] = idx;
        if n != n1 + n2 + n3 {
            return input(format!("sextic {idx:?} violates n = n1 + n2 + n3"));
        }
        let expanded = match variant {
            Expansion::First => n1,
            Expansion::Second => n2,
            Expansion::Third => n3,
        };
        if expanded != n4 + n5 + n6 {
            return input(format!(
                "sextic {idx:?} violates the {variant:?} expansion constraint"
            ));
        }
        Ok(Self { idx, variant })
    }

    pub fn indices(&self) -> [i64; 7] {
        self.idx
    }

    pub fn variant(&self) -> Expansion {
        self.variant
    }

    pub fn outer(&self) -> QuadIndex {
        let [n, n1, n2, n3, ..] = self.idx;
        QuadIndex { n, n1, n2, n3 }
    }

    pub fn inner(&self) -> QuadIndex {
        let [_, n1, n2, n3, n4, n5, n6] = self.idx;
        let head = match self.variant {
            Expansion::First => n1,
            Expansion::Second => n2,
            Expansion::Third => n3,
        };
        QuadIndex {
            n: head,
            n1: n4,
            n2: n5,
            n3: n6,
        }
    }
}

/// `Φ₁`, `Φ₂` or `Φ₃` according to the variant.
pub fn sub_phase(x: &SexticIndex) -> i64 {
    phase(&x.inner())
}

/// Comparability constant `K > 1`: `a ≪ b` means `K·a < b`, `a ≳ b` means `a ≥ b/K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparability {
    k: f64,
}

impl Default for Comparability {
    fn default() -> Self {
        Self { k: 8.0 }
    }
}

impl Comparability {
    pub fn new(k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 1.0) {
            return config(format!("comparability constant must be a finite K > 1, got {k}"));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `⟨a⟩ ≪ ⟨b⟩` given squared brackets.
    #[inline]
    pub fn br_ll(&self, a_sq: i64, b_sq: i64) -> bool {
        self.k * self.k * (a_sq as f64) < b_sq as f64
    }

    /// `⟨a⟩ ≳ ⟨b⟩` given squared brackets.
    #[inline]
    pub fn br_gtrsim(&self, a_sq: i64, b_sq: i64) -> bool {
        self.k * self.k * (a_sq as f64) >= b_sq as f64
    }

    /// `|a| ≪ |b|` on plain magnitudes.
    #[inline]
    pub fn abs_ll(&self, a: i64, b: i64) -> bool {
        self.k * (a.unsigned_abs() as f64) < b.unsigned_abs() as f64
    }
}

/// Branch of the first comparability set that a tuple falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum A1Branch {
    /// `⟨n⟩ ≫ ⟨n₂⟩ ≳ ⟨n₃⟩`, `⟨n₅⟩ ≪ ⟨n₁⟩ ∧ ⟨n₆⟩`, `⟨n₂⟩ ≪ ⟨n₆⟩`.
    Comparable,
    /// `⟨n₂⟩ ≪ ⟨n⟩, ⟨n₃⟩` and `⟨n₅⟩ ≪ ⟨n₁⟩ ∧ ⟨n₆⟩` (not in the first branch).
    Separated,
}

#[inline]
pub(crate) fn a1_branch_raw(k: &Comparability, idx: [i64; 7]) -> Option<A1Branch> {
    let [n, n1, n2, n3, _, n5, n6] = idx.map(bracket_sq);
    if !k.br_ll(n5, n1.min(n6)) || !k.br_ll(n2, n) {
        return None;
    }
    if k.br_gtrsim(n2, n3) && k.br_ll(n2, n6) {
        Some(A1Branch::Comparable)
    } else if k.br_ll(n2, n3) {
        Some(A1Branch::Separated)
    } else {
        None
    }
}

#[inline]
pub(crate) fn in_a3_raw(k: &Comparability, idx: [i64; 7]) -> bool {
    let [n, n1, n2, n3, n4, n5, _] = idx;
    let [bn, _, b2, b3, _, b5, b6] = idx.map(bracket_sq);
    let n25 = n2 + n5;
    let n14 = n1 + n4;
    k.br_ll(b2, bn.min(b3))
        && k.br_ll(b5, b3.min(b6))
        && k.abs_ll(n25, n14)
        && k.abs_ll(n * n25, n3 * n14)
}

fn require(x: &SexticIndex, v: Expansion, set: &str) -> Result<()> {
    if x.variant != v {
        return input(format!(
            "{set} is defined on {v:?}-expanded sextics, got {:?}",
            x.variant
        ));
    }
    Ok(())
}

/// Branch of `A₁` containing `x`, if any.
pub fn a1_branch(x: &SexticIndex, k: &Comparability) -> Result<Option<A1Branch>> {
    require(x, Expansion::First, "A1")?;
    Ok(a1_branch_raw(k, x.idx))
}

pub fn in_a1(x: &SexticIndex, k: &Comparability) -> Result<bool> {
    Ok(a1_branch(x, k)?.is_some())
}

/// Membership in `A₃`. Tuples with `n₃ n₁₄ = 0` fail the last inequality and stay resonant.
pub fn in_a3(x: &SexticIndex, k: &Comparability) -> Result<bool> {
    require(x, Expansion::Third, "A3")?;
    Ok(in_a3_raw(k, x.idx))
}

/// `|Φ+Φ₁| / |Φ₁|` on `A₁`, or `|Φ+Φ₃| / (|n₃||n₁₄|)` on `A₃`.
///
/// `None` when the denominator vanishes.
pub fn stacked_phase_ratio(x: &SexticIndex, k: &Comparability) -> Result<Option<Ratio<i64>>> {
    let [_, n1, _, n3, n4, ..] = x.idx;
    let total = phase(&x.outer()) + sub_phase(x);
    let den = match x.variant {
        Expansion::First => {
            if !in_a1(x, k)? {
                return input(format!("{:?} is not in A1", x.idx));
            }
            sub_phase(x).abs()
        }
        Expansion::Third => {
            if !in_a3(x, k)? {
                return input(format!("{:?} is not in A3", x.idx));
            }
            (n3 * (n1 + n4)).abs()
        }
        Expansion::Second => return input("stacked phase ratios are defined for A1 and A3 only"),
    };
    Ok((den != 0).then(|| Ratio::new(total.abs(), den)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, n1: i64, n2: i64, n3: i64) -> QuadIndex {
        QuadIndex::new(n, n1, n2, n3).unwrap()
    }

    #[test]
    fn nhat_examples() {
        assert_eq!(nhat(0), Complex64::new(0.0, -1.0));
        assert_eq!(nhat(5), Complex64::new(5.0, 0.0));
        assert_eq!(nhat(-3), Complex64::new(-3.0, 0.0));
    }

    #[test]
    fn quad_constraint_enforced() {
        assert!(QuadIndex::new(1, 1, 1, 1).is_err());
        assert!(SexticIndex::new([1, 3, -1, -1, 1, 1, 0], Expansion::First).is_err());
    }

    #[test]
    fn multiplier_examples() {
        let a = q(1, 3, -1, -1);
        assert_eq!(
            multiplier_exact(Family::M1, &a),
            Complex::new(Ratio::zero(), Ratio::new(4, 3))
        );
        assert!((multiplier(Family::M1, &a) - Complex64::new(0.0, 4.0 / 3.0)).norm() < 1e-15);
        assert_eq!(tilde_m1(&a), multiplier(Family::M1, &a));
        assert_eq!(multiplier(Family::M1, &q(-2, -1, 1, -2)), Complex64::new(0.0, 0.0));
        assert_eq!(multiplier(Family::M3, &q(-2, -1, -1, 0)), Complex64::new(0.0, 0.0));
        assert!(Family::try_from(4).is_err());
    }

    #[test]
    fn phase_examples() {
        assert_eq!(phase(&q(1, 3, -1, -1)), -6);
        assert_eq!(phase(&q(5, 5, 0, 0)), 0);
        assert_eq!(phase(&q(2, 3, 1, -2)), -2);
    }

    #[test]
    fn phase_case_examples() {
        assert_eq!(
            phase_case_identity(&q(2, 3, 1, -2)),
            Some((PhaseCase::SecondNonNegative, -2))
        );
        assert_eq!(
            phase_case_identity(&q(1, 3, -1, -1)),
            Some((PhaseCase::BothNegative, -6))
        );
        assert_eq!(
            phase_case_identity(&q(2, 4, -3, 1)),
            Some((PhaseCase::ThirdNonNegative, -4))
        );
        assert_eq!(phase(&q(2, 4, -3, 1)), -4);
        assert_eq!(phase_case_identity(&q(-1, 1, -1, -1)), None);
    }

    #[test]
    fn lower_bound_ratio_examples() {
        assert_eq!(phase_lower_bound_ratio(&q(2, 3, 1, -2)), Some(Ratio::from_integer(2)));
        assert_eq!(phase_lower_bound_ratio(&q(1, 3, -1, -1)), Some(Ratio::new(3, 2)));
    }

    #[test]
    fn bound_ratio_example() {
        let r = multiplier_bound_ratio(Family::M1, &q(1, 3, -1, -1));
        assert!((r - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(multiplier_bound_ratio(Family::M2, &q(1, 3, -1, -1)), 0.0);
    }

    #[test]
    fn a1_examples() {
        let k = Comparability::default();
        // ⟨n₂⟩ = ⟨n₅⟩ = 1, the rest large
        let x = SexticIndex::new([-100, 200, 0, -300, 100, 0, 100], Expansion::First).unwrap();
        assert_eq!(a1_branch(&x, &k).unwrap(), Some(A1Branch::Separated));
        let y = SexticIndex::new([5, 3, 2, 0, 1, 3, -1], Expansion::First).unwrap();
        assert!(!in_a1(&y, &k).unwrap());
        let z = SexticIndex::new([1, 3, -1, -1, 3, 0, 0], Expansion::First).unwrap();
        assert!(!in_a1(&z, &k).unwrap());
        let w = SexticIndex::new([1, 3, -1, -1, 1, 1, -3], Expansion::Third).unwrap();
        assert!(in_a1(&w, &k).is_err());
    }

    #[test]
    fn a3_with_vanishing_n25() {
        let k = Comparability::new(2.0).unwrap();
        // n₂₅ = 0: needs n₁₄ ≠ 0 and n₃ ≠ 0
        let x = SexticIndex::new([20, 40, 0, -20, -10, 0, -10], Expansion::Third).unwrap();
        assert!(in_a3(&x, &k).unwrap());
        let y = SexticIndex::new([20, 40, 0, -20, -40, 0, 20], Expansion::Third).unwrap();
        assert!(!in_a3(&y, &k).unwrap());
    }

    #[test]
    fn comparability_validation() {
        assert!(Comparability::new(1.0).is_err());
        assert!(Comparability::new(f64::NAN).is_err());
        assert_eq!(Comparability::default().k(), 8.0);
    }
}
