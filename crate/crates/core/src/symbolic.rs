//! Exact multivariate polynomials with rational coefficients, and the
//! step-2 group law expanded symbolically.
//!
//! This is the oracle side of the compatibility checks: it multiplies out the
//! bilinear forms as full matrix sums `Σ v_a 𝓑_ab u_b` over exact rationals,
//! independent of the floating-point path in [`crate::carnot`].

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::carnot::Step2Group;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(e, BigRational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    fn insert(&mut self, e: Vec<u32>, c: BigRational) {
        let entry = self.terms.entry(e).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.insert(e, c1 * c2);
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mono: f64 = e.iter().zip(x).map(|(&k, v)| v.powi(k as i32)).product();
                c.to_f64().unwrap_or(f64::NAN) * mono
            })
            .sum()
    }

    /// Sum of |coefficients|, used to scale evaluation tolerances.
    pub fn coefficient_mass(&self) -> f64 {
        self.terms.values().map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY)).sum()
    }

    pub fn display_with<'a>(&'a self, names: &'a [String]) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, names }
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a Poly,
    names: &'a [String],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.poly.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(j, &k)| {
                    if k == 1 {
                        self.names[j].clone()
                    } else {
                        format!("{}^{}", self.names[j], k)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{mag}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

pub fn rational(v: f64) -> Result<BigRational> {
    BigRational::from_float(v).ok_or_else(|| Error::InvalidArgument(format!("{v} has no rational value")))
}

/// The group law over polynomials in `2(m+n)` variables: the coordinates of
/// `p` followed by those of `q`.
#[derive(Debug, Clone)]
pub struct SymbolicGroup {
    m: usize,
    n: usize,
    b: Vec<Vec<Vec<BigRational>>>,
}

/// The three compatibility expressions for one layer.
#[derive(Debug, Clone)]
pub struct CompatibilityPolys {
    pub a1: Poly,
    /// Sign-consistent with the coset projection `p·h(−p₁)`.
    pub a2: Poly,
    /// As printed: both mixed terms with a plus sign.
    pub a2_printed: Poly,
}

impl CompatibilityPolys {
    pub fn defect(&self) -> Poly {
        self.a1.sub(&self.a2)
    }

    pub fn printed_defect(&self) -> Poly {
        self.a1.sub(&self.a2_printed)
    }
}

impl SymbolicGroup {
    pub fn from_group(g: &Step2Group) -> Result<Self> {
        let m = g.m();
        let b = g
            .matrices()
            .iter()
            .map(|mat| {
                (0..m)
                    .map(|i| (0..m).map(|j| rational(mat[i * m + j])).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { m, n: g.n(), b })
    }

    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    pub fn nvars(&self) -> usize {
        2 * self.dim()
    }

    pub fn var_names(&self) -> Vec<String> {
        let d = self.dim();
        (0..d)
            .map(|i| format!("p{}", i + 1))
            .chain((0..d).map(|i| format!("q{}", i + 1)))
            .collect()
    }

    pub fn p(&self) -> Vec<Poly> {
        (0..self.dim()).map(|i| Poly::var(self.nvars(), i)).collect()
    }

    pub fn q(&self) -> Vec<Poly> {
        (0..self.dim()).map(|i| Poly::var(self.nvars(), self.dim() + i)).collect()
    }

    fn zero(&self) -> Poly {
        Poly::zero(self.nvars())
    }

    /// `⟨𝓑⁽ℓ⁾u, v⟩ = Σ_{a,b} v_a 𝓑_ab u_b` on first-layer vectors.
    pub fn bilinear(&self, layer: usize, u: &[Poly], v: &[Poly]) -> Poly {
        let mut acc = self.zero();
        for a in 0..self.m {
            for bb in 0..self.m {
                let c = &self.b[layer][a][bb];
                if c.is_zero() {
                    continue;
                }
                acc = acc.add(&v[a].mul(&u[bb]).scale(c));
            }
        }
        acc
    }

    pub fn multiply(&self, p: &[Poly], q: &[Poly]) -> Vec<Poly> {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let mut out: Vec<Poly> = (0..self.m).map(|i| p[i].add(&q[i])).collect();
        for l in 0..self.n {
            let br = self.bilinear(l, &p[..self.m], &q[..self.m]);
            out.push(p[self.m + l].add(&q[self.m + l]).add(&br.scale(&half)));
        }
        out
    }

    /// `p·h(−p₁)` with the first coordinate set to zero.
    pub fn coset_normal_form(&self, p: &[Poly]) -> Vec<Poly> {
        let mut h = vec![self.zero(); self.dim()];
        h[0] = p[0].scale(&-BigRational::one());
        let mut out = self.multiply(p, &h);
        out[0] = self.zero();
        out
    }

    /// `π(p·q) − π(p)·π(q)` per second-layer coordinate.
    pub fn homomorphism_residual(&self) -> Vec<Poly> {
        let (p, q) = (self.p(), self.q());
        let lhs = self.coset_normal_form(&self.multiply(&p, &q));
        let rhs = self.multiply(&self.coset_normal_form(&p), &self.coset_normal_form(&q));
        lhs.iter().zip(&rhs).map(|(a, b)| a.sub(b)).collect()
    }

    fn head(&self, v: &Poly) -> Vec<Poly> {
        let mut out = vec![self.zero(); self.m];
        out[0] = v.clone();
        out
    }

    fn tail(&self, v: &[Poly]) -> Vec<Poly> {
        let mut out = v[..self.m].to_vec();
        out[0] = self.zero();
        out
    }

    pub fn compatibility(&self) -> Vec<CompatibilityPolys> {
        let (p, q) = (self.p(), self.q());
        let (p1, q1) = (&p[..self.m], &q[..self.m]);
        let pt = self.tail(&p);
        let qt = self.tail(&q);
        let sum_tail: Vec<Poly> = pt.iter().zip(&qt).map(|(a, b)| a.add(b)).collect();
        let sum_head = self.head(&p[0].add(&q[0]));
        (0..self.n)
            .map(|l| {
                let a1 = self.bilinear(l, p1, q1).sub(&self.bilinear(l, &sum_tail, &sum_head));
                let cross = self.bilinear(l, &pt, &qt);
                let mixed_p = self.bilinear(l, &pt, &self.head(&p[0]));
                let mixed_q = self.bilinear(l, &qt, &self.head(&q[0]));
                CompatibilityPolys {
                    a1,
                    a2: cross.sub(&mixed_p).sub(&mixed_q),
                    a2_printed: cross.add(&mixed_p).add(&mixed_q),
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::make_heisenberg;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn polynomial_arithmetic() {
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        let s = x.add(&y);
        let sq = s.mul(&s);
        assert_eq!(sq.eval(&[2.0, 3.0]), 25.0);
        assert!(sq.sub(&sq).is_zero());
        let names = vec!["x".to_string(), "y".to_string()];
        assert_eq!(sq.display_with(&names).to_string(), "x^2 + 2*x*y + y^2");
        assert_eq!(x.scale(&r(-1, 2)).display_with(&names).to_string(), "-1/2*x");
    }

    #[test]
    fn heisenberg_expansions() {
        let h = make_heisenberg(1, 1).unwrap();
        let s = SymbolicGroup::from_group(h.group()).unwrap();
        let names = s.var_names();
        let c = &s.compatibility()[0];
        // A₁ = 2p₁q₂ + p₁p₂ + q₁q₂, A₂ = −p₁p₂ − q₁q₂ (printed), +p₁p₂ + q₁q₂ (consistent)
        let (p1, p2) = (Poly::var(6, 0), Poly::var(6, 1));
        let (q1, q2) = (Poly::var(6, 3), Poly::var(6, 4));
        let two = r(2, 1);
        let expect_a1 = p1.mul(&q2).scale(&two).add(&p1.mul(&p2)).add(&q1.mul(&q2));
        assert_eq!(c.a1, expect_a1, "{}", c.a1.display_with(&names));
        assert_eq!(c.a2, p1.mul(&p2).add(&q1.mul(&q2)));
        assert_eq!(c.defect(), p1.mul(&q2).scale(&two));
        assert_eq!(
            c.printed_defect(),
            p1.mul(&q2).add(&p1.mul(&p2)).add(&q1.mul(&q2)).scale(&two)
        );
        // π(pq) − π(p)π(q) = p₁q₂ in the centre
        let res = s.homomorphism_residual();
        assert!(res[..2].iter().all(Poly::is_zero));
        assert_eq!(res[2], p1.mul(&q2));
    }

    #[test]
    fn residual_is_half_the_defect_for_random_groups() {
        use crate::metric::seeded_rng;
        let mut rng = seeded_rng(11);
        for (m, n) in [(3, 2), (4, 2), (4, 3)] {
            let g = Step2Group::random_integer(m, n, 3, &mut rng).unwrap();
            let s = SymbolicGroup::from_group(&g).unwrap();
            let res = s.homomorphism_residual();
            let half = r(1, 2);
            for (l, c) in s.compatibility().iter().enumerate() {
                assert_eq!(res[m + l], c.defect().scale(&half));
            }
        }
    }
}
