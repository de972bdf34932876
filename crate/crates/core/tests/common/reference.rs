//! Brute-force evaluation of every term, written without touching the
//! library's plans, dephasing or FFTs. Sequences are indexed `n + b`.

use num_complex::Complex64;
use std::f64::consts::PI;

type C = Complex64;
pub type Seq = Vec<C>;

const ZERO: C = C::new(0.0, 0.0);
const I: C = C::new(0.0, 1.0);

#[derive(Clone, Copy, Debug)]
pub struct Ref {
    pub b: i64,
    pub t: f64,
    pub m: f64,
    pub k: f64,
}

fn cis(x: f64) -> C {
    C::new(x.cos(), x.sin())
}

fn hat(n: i64) -> C {
    if n == 0 {
        C::new(0.0, -1.0)
    } else {
        C::new(n as f64, 0.0)
    }
}

pub fn m1(n: i64, n1: i64, n2: i64, n3: i64) -> C {
    if n > 0 && n2 + n3 < 0 && n3 != 0 {
        2.0 * I * (n * (n2 + n3)) as f64 / (hat(n1) * hat(n2))
    } else {
        ZERO
    }
}

pub fn m2(n: i64, n1: i64, n2: i64, n3: i64) -> C {
    if n < 0 && n2 + n3 > 0 && n3 != 0 {
        2.0 * I * (n * (n2 + n3)) as f64 / (hat(n1) * hat(n2))
    } else {
        ZERO
    }
}

pub fn m3(n: i64, n1: i64, n2: i64, n3: i64) -> C {
    if n < 0 && n2 != 0 && n3 != 0 {
        2.0 * I * n as f64 / hat(n1)
    } else {
        ZERO
    }
}

pub fn mt1(n: i64, n1: i64, n2: i64, n3: i64) -> C {
    if (n1 + n2) * (n1 + n3) != 0 {
        m1(n, n1, n2, n3)
    } else {
        ZERO
    }
}

pub fn phi(n: i64, n1: i64, n2: i64, n3: i64) -> i64 {
    n * n.abs() - n1 * n1.abs() - n2 * n2.abs() - n3 * n3.abs()
}

fn br(n: i64) -> f64 {
    ((1 + n * n) as f64).sqrt()
}

impl Ref {
    fn ll(&self, a: f64, b: f64) -> bool {
        self.k * a < b
    }

    pub fn in_a1(&self, x: [i64; 7]) -> bool {
        let [n, n1, n2, n3, _, n5, n6] = x;
        let base = self.ll(br(n5), br(n1).min(br(n6))) && self.ll(br(n2), br(n));
        let first = self.k * br(n2) >= br(n3) && self.ll(br(n2), br(n6));
        let second = self.ll(br(n2), br(n3));
        base && (first || second)
    }

    pub fn in_a3(&self, x: [i64; 7]) -> bool {
        let [n, n1, n2, n3, n4, n5, n6] = x;
        let (n25, n14) = ((n2 + n5) as f64, (n1 + n4) as f64);
        self.ll(br(n2), br(n).min(br(n3)))
            && self.ll(br(n5), br(n3).min(br(n6)))
            && self.ll(n25.abs(), n14.abs())
            && self.ll((n as f64 * n25).abs(), (n3 as f64 * n14).abs())
    }

    pub fn zeros(&self) -> Seq {
        vec![ZERO; (2 * self.b + 1) as usize]
    }

    fn at(&self, s: &Seq, n: i64) -> C {
        if n.abs() > self.b {
            ZERO
        } else {
            s[(n + self.b) as usize]
        }
    }

    fn st(&self, s: &Seq, n: i64) -> C {
        self.at(s, -n).conj()
    }

    fn range(&self) -> std::ops::RangeInclusive<i64> {
        -self.b..=self.b
    }

    /// Calls `f(n, n1, n2, n3)` on every in-band quadruple.
    fn quads(&self, mut f: impl FnMut(i64, i64, i64, i64)) {
        for n in self.range() {
            for n1 in self.range() {
                for n2 in self.range() {
                    let n3 = n - n1 - n2;
                    if n3.abs() <= self.b {
                        f(n, n1, n2, n3);
                    }
                }
            }
        }
    }

    /// The three trilinear sums.
    pub fn big_n(&self, w: &Seq) -> Seq {
        let mut out = self.zeros();
        self.quads(|n, n1, n2, n3| {
            let e = cis(self.t * phi(n, n1, n2, n3) as f64);
            let a = mt1(n, n1, n2, n3) * self.at(w, n1) * self.at(w, n2) * self.st(w, n3);
            let b = m2(n, n1, n2, n3) * self.at(w, n1) * self.st(w, n2) * self.at(w, n3);
            let c = m3(n, n1, n2, n3) * self.st(w, n1) * self.at(w, n2) * self.at(w, n3);
            out[(n + self.b) as usize] += e * (a + b + c);
        });
        out
    }

    /// Coefficients of `V = exp(-i ∂⁻¹u)` on the band, by direct quadrature.
    pub fn big_v(&self, u: &Seq) -> Seq {
        let p = 512usize;
        let xs: Vec<f64> = (0..p).map(|j| 2.0 * PI * j as f64 / p as f64).collect();
        let vals: Vec<C> = xs
            .iter()
            .map(|&x| {
                let theta: C = self
                    .range()
                    .filter(|&k| k != 0)
                    .map(|k| self.at(u, k) / (I * k as f64) * cis(k as f64 * x))
                    .sum();
                (-I * theta.re).exp()
            })
            .collect();
        self.range()
            .map(|k| {
                vals.iter()
                    .zip(&xs)
                    .map(|(v, &x)| v * cis(-(k as f64) * x))
                    .sum::<C>()
                    / p as f64
            })
            .collect()
    }

    /// Coefficients of `R[u] = -P_c(u²)∂̂V - P_c[V(H∂x u - u²)]`, truncated to the band.
    pub fn remainder(&self, u: &Seq) -> Seq {
        let v = self.big_v(u);
        let mean_u2: C = self.range().map(|k| self.at(u, k) * self.at(u, -k)).sum();
        let u2 = |k: i64| -> C { self.range().map(|j| self.at(u, j) * self.at(u, k - j)).sum() };
        let w = |k: i64| self.at(u, k) * k.abs() as f64 - u2(k);
        let mean_vw: C = self.range().map(|k| self.at(&v, k) * w(-k)).sum();
        self.range()
            .map(|n| {
                let dv = if n == 0 { self.at(&v, 0) } else { I * n as f64 * self.at(&v, n) };
                let r = -mean_u2 * dv;
                if n == 0 {
                    r - mean_vw
                } else {
                    r
                }
            })
            .collect()
    }

    pub fn script_r(&self, u: &Seq, w: &Seq) -> Seq {
        let rem = self.remainder(u);
        let mut out = self.zeros();
        self.quads(|n, n1, n2, n3| {
            let deg = m1(n, n1, n2, n3) - mt1(n, n1, n2, n3);
            if deg != ZERO {
                let e = cis(self.t * phi(n, n1, n2, n3) as f64);
                out[(n + self.b) as usize] += e * deg * self.at(w, n1) * self.at(w, n2) * self.st(w, n3);
            }
        });
        for n in self.range() {
            out[(n + self.b) as usize] += cis(self.t * (n * n.abs()) as f64) * self.at(&rem, n);
        }
        out
    }

    /// `(resonant, non-resonant)` parts of the `m̃₁` sum.
    pub fn split(&self, w: &Seq) -> (Seq, Seq) {
        let (mut r, mut nr) = (self.zeros(), self.zeros());
        self.quads(|n, n1, n2, n3| {
            let p = phi(n, n1, n2, n3);
            let z = cis(self.t * p as f64) * mt1(n, n1, n2, n3) * self.at(w, n1) * self.at(w, n2) * self.st(w, n3);
            if (p.abs() as f64) <= self.m {
                r[(n + self.b) as usize] += z;
            } else {
                nr[(n + self.b) as usize] += z;
            }
        });
        (r, nr)
    }

    /// `Σ_{|Φ|>M} e^{itΦ} m̃₁/Φ a(n₁) b(n₂) c*(n₃)`.
    pub fn weighted(&self, a: &Seq, b: &Seq, c: &Seq) -> Seq {
        let mut out = self.zeros();
        self.quads(|n, n1, n2, n3| {
            let p = phi(n, n1, n2, n3);
            let m = mt1(n, n1, n2, n3);
            if m != ZERO && (p.abs() as f64) > self.m {
                out[(n + self.b) as usize] +=
                    cis(self.t * p as f64) * m / p as f64 * self.at(a, n1) * self.at(b, n2) * self.st(c, n3);
            }
        });
        out
    }

    /// Walks the `A₁` tuples with a non-vanishing total phase and outer `|Φ| > M`.
    fn a1_walk(&self, mut f: impl FnMut(i64, [i64; 7], i64, i64, C)) {
        for n in 1..=self.b {
            for n1 in self.range() {
                for n2 in self.range() {
                    let n3 = n - n1 - n2;
                    if n3.abs() > self.b {
                        continue;
                    }
                    let mo = mt1(n, n1, n2, n3);
                    let p = phi(n, n1, n2, n3);
                    if mo == ZERO || (p.abs() as f64) <= self.m {
                        continue;
                    }
                    for n4 in self.range() {
                        for n5 in self.range() {
                            let n6 = n1 - n4 - n5;
                            if n6.abs() > self.b {
                                continue;
                            }
                            let x = [n, n1, n2, n3, n4, n5, n6];
                            let mi = mt1(n1, n4, n5, n6);
                            let total = p + phi(n1, n4, n5, n6);
                            if mi == ZERO || total == 0 || !self.in_a1(x) {
                                continue;
                            }
                            f(n, x, p, total, mo * mi);
                        }
                    }
                }
            }
        }
    }

    fn a3_walk(&self, mut f: impl FnMut(i64, [i64; 7], i64, i64, C)) {
        for n in 1..=self.b {
            for n1 in self.range() {
                for n2 in self.range() {
                    let n3 = n - n1 - n2;
                    if n3.abs() > self.b {
                        continue;
                    }
                    let mo = mt1(n, n1, n2, n3);
                    let p = phi(n, n1, n2, n3);
                    if mo == ZERO || (p.abs() as f64) <= self.m {
                        continue;
                    }
                    for n4 in self.range() {
                        for n5 in self.range() {
                            let n6 = n3 - n4 - n5;
                            if n6.abs() > self.b {
                                continue;
                            }
                            let x = [n, n1, n2, n3, n4, n5, n6];
                            let mi = mt1(-n3, -n4, -n5, -n6).conj();
                            let total = p + phi(n3, n4, n5, n6);
                            if mi == ZERO || total == 0 || !self.in_a3(x) {
                                continue;
                            }
                            f(n, x, p, total, mo * mi);
                        }
                    }
                }
            }
        }
    }

    fn prod_a1(&self, w: &Seq, x: [i64; 7]) -> C {
        let [_, _, n2, n3, n4, n5, n6] = x;
        self.at(w, n2) * self.st(w, n3) * self.at(w, n4) * self.at(w, n5) * self.st(w, n6)
    }

    fn prod_a3(&self, w: &Seq, x: [i64; 7]) -> C {
        let [_, n1, n2, _, n4, n5, n6] = x;
        self.at(w, n1) * self.at(w, n2) * self.st(w, n4) * self.st(w, n5) * self.at(w, n6)
    }

    /// `∂t` of a five-fold product given per-slot values, derivatives and star flags.
    fn leibniz(&self, w: &Seq, wd: &Seq, slots: [i64; 5], star: [bool; 5]) -> C {
        let val = |s: &Seq, j: usize| if star[j] { self.st(s, slots[j]) } else { self.at(s, slots[j]) };
        (0..5)
            .map(|j| {
                (0..5)
                    .map(|i| if i == j { val(wd, i) } else { val(w, i) })
                    .product::<C>()
            })
            .sum()
    }

    pub fn n1nr(&self, w: &Seq) -> Seq {
        let mut out = self.zeros();
        self.a1_walk(|n, x, p, total, mm| {
            out[(n + self.b) as usize] += I / p as f64 * cis(self.t * total as f64) * mm * self.prod_a1(w, x);
        });
        out
    }

    pub fn n10(&self, w: &Seq) -> Seq {
        let mut out = self.zeros();
        self.a1_walk(|n, x, p, total, mm| {
            out[(n + self.b) as usize] +=
                cis(self.t * total as f64) * mm / (p as f64 * total as f64) * self.prod_a1(w, x);
        });
        out
    }

    pub fn n11(&self, w: &Seq, wd: &Seq) -> Seq {
        let mut out = self.zeros();
        self.a1_walk(|n, x, p, total, mm| {
            let [_, _, n2, n3, n4, n5, n6] = x;
            let d = self.leibniz(w, wd, [n2, n3, n4, n5, n6], [false, true, false, false, true]);
            out[(n + self.b) as usize] -= cis(self.t * total as f64) * mm / (p as f64 * total as f64) * d;
        });
        out
    }

    pub fn n3nr(&self, w: &Seq) -> Seq {
        let mut out = self.zeros();
        self.a3_walk(|n, x, p, total, mm| {
            out[(n + self.b) as usize] += I / p as f64 * cis(self.t * total as f64) * mm * self.prod_a3(w, x);
        });
        out
    }

    pub fn n30(&self, w: &Seq) -> Seq {
        let mut out = self.zeros();
        self.a3_walk(|n, x, p, total, mm| {
            out[(n + self.b) as usize] +=
                cis(self.t * total as f64) * mm / (p as f64 * total as f64) * self.prod_a3(w, x);
        });
        out
    }

    pub fn n31(&self, w: &Seq, wd: &Seq) -> Seq {
        let mut out = self.zeros();
        self.a3_walk(|n, x, p, total, mm| {
            let [_, n1, n2, _, n4, n5, n6] = x;
            let d = self.leibniz(w, wd, [n1, n2, n4, n5, n6], [false, false, true, true, false]);
            out[(n + self.b) as usize] -= cis(self.t * total as f64) * mm / (p as f64 * total as f64) * d;
        });
        out
    }

    /// Every term, keyed by the library's term names.
    pub fn all(&self, u: &Seq, w: &Seq) -> Vec<(&'static str, Seq)> {
        let nn = self.big_n(w);
        let r = self.script_r(u, w);
        let wd: Seq = nn.iter().zip(&r).map(|(a, b)| a + b).collect();
        let (nres, nnr) = self.split(w);
        let n0: Seq = self.weighted(w, w, w).iter().map(|z| -I * z).collect();
        let times_i = |s: Seq| -> Seq { s.into_iter().map(|z| I * z).collect() };
        let n1 = times_i(self.weighted(&nn, w, w));
        let n2 = times_i(self.weighted(w, &nn, w));
        let n3 = times_i(self.weighted(w, w, &nn));
        let r1 = times_i(add3(&self.weighted(&r, w, w), &self.weighted(w, &r, w), &self.weighted(w, w, &r)));
        let n1nr = self.n1nr(w);
        let n3nr = self.n3nr(w);
        let n1r = sub(&n1, &n1nr);
        let n3r = sub(&n3, &n3nr);
        let n10 = self.n10(w);
        let n11 = self.n11(w, &wd);
        let n30 = self.n30(w);
        let n31 = self.n31(w, &wd);
        let agg0 = add3(&n0, &n10, &n30);
        let r_pos: Seq = self
            .range()
            .map(|n| if n > 0 { self.at(&r, n) } else { ZERO })
            .collect();
        let agg1 = [&nres, &r1, &n1r, &n11, &n2, &n3r, &n31]
            .iter()
            .fold(r_pos, |acc, s| acc.iter().zip(s.iter()).map(|(a, b)| a + b).collect());
        vec![
            ("N", nn),
            ("R", r),
            ("N_R", nres),
            ("N_NR", nnr),
            ("N0", n0),
            ("N1", n1),
            ("N2", n2),
            ("N3", n3),
            ("R1", r1),
            ("N1R", n1r),
            ("N1NR", n1nr),
            ("N10", n10),
            ("N11", n11),
            ("N3R", n3r),
            ("N3NR", n3nr),
            ("N30", n30),
            ("N31", n31),
            ("N(0)", agg0),
            ("N(1)", agg1),
        ]
    }
}

fn add3(a: &Seq, b: &Seq, c: &Seq) -> Seq {
    a.iter().zip(b).zip(c).map(|((x, y), z)| x + y + z).collect()
}

fn sub(a: &Seq, b: &Seq) -> Seq {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
