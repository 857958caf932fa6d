//! Step-2 Carnot groups `(ℝ^{m+n}, ·, δ_λ)` in exponential coordinates.
//!
//! The product is
//!
//! ```text
//! (p¹, p²)·(q¹, q²) = (p¹ + q¹, p² + q² + ½⟨𝓑p¹, q¹⟩)
//! ```
//!
//! with `⟨𝓑p¹, q¹⟩_ℓ = ⟨𝓑⁽ℓ⁾p¹, q¹⟩` for skew-symmetric `m×m` matrices
//! `𝓑⁽¹⁾, …, 𝓑⁽ⁿ⁾`, and dilations act by `δ_λ(p¹, p²) = (λp¹, λ²p²)`.
//!
//! The splitting `G = N ⋊ H` takes `H` to be the first-coordinate axis of the
//! first layer and `N` the hyperplane where that coordinate vanishes. The
//! projection `π_N` sends `p` to the unique point of the coset `pH` that lies
//! in `N`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{check_finite, Quotient, Rng64};
use crate::minimize::{Minimum, ScanGolden};

pub const SKEW_TOL: f64 = 1e-14;
pub const PROJECTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPoint {
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
}

impl GroupPoint {
    pub fn new(p1: Vec<f64>, p2: Vec<f64>) -> Self {
        Self { p1, p2 }
    }

    pub fn identity(m: usize, n: usize) -> Self {
        Self {
            p1: vec![0.0; m],
            p2: vec![0.0; n],
        }
    }

    pub fn from_coords(m: usize, coords: &[f64]) -> Self {
        Self {
            p1: coords[..m].to_vec(),
            p2: coords[m..].to_vec(),
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut v = self.p1.clone();
        v.extend_from_slice(&self.p2);
        v
    }

    pub fn is_finite(&self) -> bool {
        self.p1.iter().chain(&self.p2).all(|v| v.is_finite())
    }

    /// Largest coordinate difference.
    pub fn sup_diff(&self, other: &Self) -> f64 {
        self.p1
            .iter()
            .zip(&other.p1)
            .chain(self.p2.iter().zip(&other.p2))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Group datum: dimensions and the skew-symmetric matrices of the second
/// layer, each stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step2Group {
    m: usize,
    n: usize,
    b: Vec<Vec<f64>>,
}

impl Step2Group {
    pub fn new(m: usize, n: usize, b: Vec<Vec<f64>>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidGroup("m and n must be positive".into()));
        }
        if b.len() != n {
            return Err(Error::InvalidGroup(format!("expected {n} matrices, got {}", b.len())));
        }
        for (l, mat) in b.iter().enumerate() {
            if mat.len() != m * m {
                return Err(Error::InvalidGroup(format!(
                    "matrix {} has {} entries, expected {}",
                    l + 1,
                    mat.len(),
                    m * m
                )));
            }
            if mat.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidGroup(format!("matrix {} has non-finite entries", l + 1)));
            }
            let asym = (0..m)
                .flat_map(|i| (0..m).map(move |j| (i, j)))
                .map(|(i, j)| (mat[i * m + j] + mat[j * m + i]).abs())
                .fold(0.0, f64::max);
            if asym > SKEW_TOL {
                return Err(Error::InvalidGroup(format!(
                    "matrix {} is not skew-symmetric (defect {asym:e})",
                    l + 1
                )));
            }
        }
        let vectorized = DMatrix::from_fn(m * m, n, |r, c| b[c][r]);
        let rank = vectorized.rank(1e-10);
        if rank < n {
            return Err(Error::InvalidGroup(format!(
                "the {n} matrices are not linearly independent (rank {rank})"
            )));
        }
        Ok(Self { m, n, b })
    }

    /// A group whose matrices have small integer entries, so that every
    /// product of dyadic coordinates is exact.
    pub fn random_integer<R: Rng + ?Sized>(m: usize, n: usize, max_entry: i32, rng: &mut R) -> Result<Self> {
        if m < 2 || n > m * (m - 1) / 2 {
            return Err(Error::InvalidGroup(format!(
                "no {n} independent skew-symmetric {m}x{m} matrices"
            )));
        }
        for _ in 0..1000 {
            let b: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let mut mat = vec![0.0; m * m];
                    for i in 0..m {
                        for j in i + 1..m {
                            let v = rng.gen_range(-max_entry..=max_entry) as f64;
                            mat[i * m + j] = v;
                            mat[j * m + i] = -v;
                        }
                    }
                    mat
                })
                .collect();
            if let Ok(g) = Self::new(m, n, b) {
                return Ok(g);
            }
        }
        Err(Error::InvalidGroup("could not draw independent matrices".into()))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    pub fn matrices(&self) -> &[Vec<f64>] {
        &self.b
    }

    pub fn entry(&self, layer: usize, i: usize, j: usize) -> f64 {
        self.b[layer][i * self.m + j]
    }

    pub fn identity(&self) -> GroupPoint {
        GroupPoint::identity(self.m, self.n)
    }

    pub fn check(&self, p: &GroupPoint) -> Result<()> {
        if p.p1.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: p.p1.len(),
            });
        }
        if p.p2.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: p.p2.len(),
            });
        }
        Ok(())
    }

    /// `⟨𝓑⁽ℓ⁾u, v⟩` for one layer, summed over `i < j` with the skew part of
    /// the matrix so that `⟨𝓑u, u⟩` is exactly zero in floating point.
    pub fn bilinear(&self, layer: usize, u: &[f64], v: &[f64]) -> f64 {
        let m = self.m;
        let mat = &self.b[layer];
        let mut acc = 0.0;
        for i in 0..m {
            for j in i + 1..m {
                let skew = 0.5 * (mat[i * m + j] - mat[j * m + i]);
                // B_ij u_j v_i + B_ji u_i v_j
                acc += skew * (u[j] * v[i] - u[i] * v[j]);
            }
        }
        acc
    }

    /// The vector `⟨𝓑u, v⟩ ∈ ℝⁿ`.
    pub fn bracket(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|l| self.bilinear(l, u, v)).collect()
    }

    pub fn multiply(&self, p: &GroupPoint, q: &GroupPoint) -> Result<GroupPoint> {
        self.check(p)?;
        self.check(q)?;
        let br = self.bracket(&p.p1, &q.p1);
        Ok(GroupPoint {
            p1: p.p1.iter().zip(&q.p1).map(|(a, b)| a + b).collect(),
            p2: p
                .p2
                .iter()
                .zip(&q.p2)
                .zip(&br)
                .map(|((a, b), c)| a + b + 0.5 * c)
                .collect(),
        })
    }

    pub fn invert(&self, p: &GroupPoint) -> GroupPoint {
        GroupPoint {
            p1: p.p1.iter().map(|v| -v).collect(),
            p2: p.p2.iter().map(|v| -v).collect(),
        }
    }

    pub fn dilate(&self, lambda: f64, p: &GroupPoint) -> GroupPoint {
        let l2 = lambda * lambda;
        GroupPoint {
            p1: p.p1.iter().map(|v| lambda * v).collect(),
            p2: p.p2.iter().map(|v| l2 * v).collect(),
        }
    }

    /// `max{|p¹|, √|p²|}` with Euclidean norms on each layer.
    pub fn gauge_norm(&self, p: &GroupPoint) -> f64 {
        let h = p.p1.iter().map(|v| v * v).sum::<f64>().sqrt();
        let v = p.p2.iter().map(|v| v * v).sum::<f64>().sqrt().sqrt();
        h.max(v)
    }

    /// `d(p, q) = ‖q⁻¹·p‖`.
    pub fn distance(&self, p: &GroupPoint, q: &GroupPoint) -> Result<f64> {
        Ok(self.gauge_norm(&self.multiply(&self.invert(q), p)?))
    }

    /// Uniform coordinates in `[-scale, scale]` on both layers.
    pub fn random_point<R: Rng + ?Sized>(&self, scale: f64, rng: &mut R) -> GroupPoint {
        GroupPoint {
            p1: (0..self.m).map(|_| rng.gen_range(-scale..scale)).collect(),
            p2: (0..self.n).map(|_| rng.gen_range(-scale..scale)).collect(),
        }
    }

    /// Coordinates that are multiples of `2^-10` in `[-scale, scale]`; the
    /// group law is exact on these for integer matrices.
    pub fn random_dyadic_point<R: Rng + ?Sized>(&self, scale: i64, rng: &mut R) -> GroupPoint {
        let mut draw = || rng.gen_range(-scale * 1024..=scale * 1024) as f64 / 1024.0;
        GroupPoint {
            p1: (0..self.m).map(|_| draw()).collect(),
            p2: (0..self.n).map(|_| draw()).collect(),
        }
    }
}

/// `G = N ⋊ H` with `H = {(t, 0, …, 0)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Splitting {
    group: Arc<Step2Group>,
    solver: ScanGolden,
}

impl Splitting {
    pub fn new(group: Arc<Step2Group>) -> Self {
        Self {
            group,
            solver: ScanGolden::default(),
        }
    }

    pub fn group(&self) -> &Step2Group {
        &self.group
    }

    pub fn group_arc(&self) -> &Arc<Step2Group> {
        &self.group
    }

    /// Dimension of `N`, i.e. of the base of `π_N`.
    pub fn n_dim(&self) -> usize {
        self.group.dim() - 1
    }

    /// `h(t) = (t, 0, …, 0)`.
    pub fn h(&self, t: f64) -> GroupPoint {
        let mut p = self.group.identity();
        p.p1[0] = t;
        p
    }

    pub fn in_n(&self, p: &GroupPoint) -> bool {
        p.p1[0] == 0.0
    }

    /// The point of `N` with the given coordinates `(x₂, …, x_{m+n})`.
    pub fn embed(&self, y: &[f64]) -> Result<GroupPoint> {
        if y.len() != self.n_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.n_dim(),
                got: y.len(),
            });
        }
        let mut coords = Vec::with_capacity(self.group.dim());
        coords.push(0.0);
        coords.extend_from_slice(y);
        Ok(GroupPoint::from_coords(self.group.m(), &coords))
    }

    /// Coordinates `(x₂, …, x_{m+n})` of a point, dropping the `H` coordinate.
    pub fn n_coords(&self, p: &GroupPoint) -> Vec<f64> {
        p.coords()[1..].to_vec()
    }

    /// `p·h(−p₁)`, the representative of `pH` in `N`.
    pub fn coset_normal_form(&self, p: &GroupPoint) -> Result<GroupPoint> {
        let mut out = self.group.multiply(p, &self.h(-p.p1[0]))?;
        out.p1[0] = 0.0;
        Ok(out)
    }

    /// Closed form of the coset representative:
    /// `[π(p)]_{m+ℓ} = p_{m+ℓ} − ½⟨𝓑⁽ℓ⁾(0, p₂, …, p_m), (p₁, 0, …, 0)⟩`.
    pub fn project_formula(&self, p: &GroupPoint) -> Result<GroupPoint> {
        self.group.check(p)?;
        let mut rest = p.p1.clone();
        rest[0] = 0.0;
        let head = self.h(p.p1[0]).p1;
        let br = self.group.bracket(&rest, &head);
        Ok(GroupPoint {
            p1: rest,
            p2: p.p2.iter().zip(&br).map(|(a, b)| a - 0.5 * b).collect(),
        })
    }

    /// `π_N(p)`, computed by the closed form and cross-checked against the
    /// coset normal form.
    pub fn project_n(&self, p: &GroupPoint) -> Result<GroupPoint> {
        let formula = self.project_formula(p)?;
        let coset = self.coset_normal_form(p)?;
        let scale = 1.0 + p.p1.iter().map(|v| v * v).sum::<f64>();
        let gap = formula.sup_diff(&coset);
        if gap > PROJECTION_TOL * scale {
            return Err(Error::Consistency(format!(
                "projection formula and coset normal form differ by {gap:e} at {p:?}"
            )));
        }
        Ok(formula)
    }

    /// `d(x, yH)` for `y ∈ N`, minimizing `t ↦ d(x, y·h(t))` over the bracket
    /// `[t₀ − g₀, t₀ + g₀]` with `t₀` the first coordinate of `y⁻¹x` and
    /// `g₀ = ‖y⁻¹x‖`. Outside the bracket the first-layer term alone exceeds
    /// `g₀`, which is the value at `t = 0`.
    pub fn fiber_distance_1d(&self, x: &GroupPoint, y: &GroupPoint) -> Result<Minimum> {
        let g = &self.group;
        let w = g.multiply(&g.invert(y), x)?;
        let t0 = w.p1[0];
        let g0 = g.gauge_norm(&w);
        // d(x, y·h(t)) = ‖h(−t)·y⁻¹x‖
        let objective = |t: f64| {
            g.gauge_norm(&g.multiply(&self.h(-t), &w).expect("dimensions checked"))
        };
        let m = self.solver.minimize(objective, t0 - g0, t0 + g0);
        let at_zero = Minimum { arg: 0.0, value: g0 };
        Ok(if m.value <= at_zero.value { m } else { at_zero })
    }
}

/// `π_N: G → N` as a [`Quotient`], with base points given by their
/// `N`-coordinates.
#[derive(Debug, Clone)]
pub struct CosetQuotient {
    split: Splitting,
}

impl CosetQuotient {
    pub fn new(split: Splitting) -> Self {
        Self { split }
    }

    pub fn splitting(&self) -> &Splitting {
        &self.split
    }

    fn point(&self, x: &[f64]) -> Result<GroupPoint> {
        let g = self.split.group();
        if x.len() != g.dim() {
            return Err(Error::DimensionMismatch {
                expected: g.dim(),
                got: x.len(),
            });
        }
        check_finite(x)?;
        Ok(GroupPoint::from_coords(g.m(), x))
    }

    /// Uniform point of the unit gauge ball of `N` (first coordinate zero).
    pub fn sample_unit_n_ball(&self, rng: &mut Rng64) -> GroupPoint {
        let g = self.split.group();
        loop {
            let mut p = g.random_point(1.0, rng);
            p.p1[0] = 0.0;
            if g.gauge_norm(&p) <= 1.0 {
                return p;
            }
        }
    }
}

impl Quotient for CosetQuotient {
    fn name(&self) -> String {
        let g = self.split.group();
        format!("pi_N on step-2 group (m={}, n={})", g.m(), g.n())
    }

    fn total_dim(&self) -> usize {
        self.split.group().dim()
    }

    fn base_dim(&self) -> usize {
        self.split.n_dim()
    }

    fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = self.point(x)?;
        Ok(self.split.n_coords(&self.split.project_n(&p)?))
    }

    fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let m = self.split.group().m();
        self.split
            .group()
            .distance(&GroupPoint::from_coords(m, x), &GroupPoint::from_coords(m, y))
            .expect("dimensions match the group")
    }

    fn fiber_distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let x = self.point(x)?;
        let y = self.split.embed(y)?;
        Ok(self.split.fiber_distance_1d(&x, &y)?.value)
    }

    fn base_distance(&self, y1: &[f64], y2: &[f64]) -> f64 {
        let a = self.split.embed(y1).expect("base dimension");
        let b = self.split.embed(y2).expect("base dimension");
        self.split.group().distance(&a, &b).expect("dimensions match the group")
    }

    /// `y·δ_r(u)` with `u` uniform in the unit gauge ball of `N`.
    fn sample_base_ball(&self, y: &[f64], r: f64, rng: &mut Rng64) -> Vec<f64> {
        let g = self.split.group();
        let u = self.sample_unit_n_ball(rng);
        let y = self.split.embed(y).expect("base dimension");
        let z = g.multiply(&y, &g.dilate(r, &u)).expect("dimensions match the group");
        self.split.n_coords(&z)
    }

    fn sample_total(&self, rng: &mut Rng64) -> Vec<f64> {
        self.split.group().random_point(1.0, rng).coords()
    }

    fn fiber_point(&self, y: &[f64], rng: &mut Rng64) -> Result<Vec<f64>> {
        let y = self.split.embed(y)?;
        let t = rng.gen_range(-2.0..2.0);
        Ok(self.split.group().multiply(&y, &self.split.h(t))?.coords())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::seeded_rng;

    fn h1() -> Arc<Step2Group> {
        // ⟨𝓑x, x'⟩ = x₁x₂' − x₁'x₂
        Arc::new(Step2Group::new(2, 1, vec![vec![0.0, -1.0, 1.0, 0.0]]).unwrap())
    }

    fn pt(c: &[f64]) -> GroupPoint {
        GroupPoint::from_coords(2, c)
    }

    #[test]
    fn heisenberg_product_by_hand() {
        let g = h1();
        let r = g.multiply(&pt(&[1.0, 0.0, 0.0]), &pt(&[0.0, 1.0, 0.0])).unwrap();
        assert_eq!(r, pt(&[1.0, 1.0, 0.5]));
    }

    #[test]
    fn identity_and_inverse() {
        let g = h1();
        let p = pt(&[0.3, -1.7, 2.5]);
        assert_eq!(g.multiply(&p, &g.identity()).unwrap(), p);
        assert_eq!(g.multiply(&g.identity(), &p).unwrap(), p);
        assert_eq!(g.invert(&pt(&[1.0, 2.0, 3.0])), pt(&[-1.0, -2.0, -3.0]));
        assert_eq!(g.invert(&g.identity()), g.identity());
        let mut rng = seeded_rng(1);
        for _ in 0..100 {
            let p = g.random_point(3.0, &mut rng);
            let e = g.multiply(&g.invert(&p), &p).unwrap();
            assert!(e.sup_diff(&g.identity()) <= 1e-15);
        }
    }

    #[test]
    fn dilation_by_hand() {
        let g = h1();
        assert_eq!(g.dilate(2.0, &pt(&[1.0, 1.0, 1.0])), pt(&[2.0, 2.0, 4.0]));
        let p = pt(&[0.1, 0.2, 0.3]);
        assert_eq!(g.dilate(1.0, &p), p);
    }

    #[test]
    fn gauge_by_hand() {
        let g = h1();
        assert_eq!(g.gauge_norm(&pt(&[3.0, 4.0, 0.0])), 5.0);
        assert_eq!(g.gauge_norm(&pt(&[0.0, 0.0, 4.0])), 2.0);
        assert_eq!(g.gauge_norm(&pt(&[0.0, 0.0, -4.0])), 2.0);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(matches!(
            Step2Group::new(2, 1, vec![vec![0.0, 1.0, 1.0, 0.0]]),
            Err(Error::InvalidGroup(_))
        ));
        let b = vec![0.0, -1.0, 1.0, 0.0];
        assert!(Step2Group::new(2, 2, vec![b.clone(), b.clone()]).is_err());
        assert!(Step2Group::new(2, 1, vec![vec![0.0; 3]]).is_err());
        assert!(Step2Group::new(2, 1, vec![vec![0.0; 4]]).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let g = h1();
        let bad = GroupPoint::new(vec![1.0], vec![0.0]);
        assert!(matches!(
            g.multiply(&bad, &g.identity()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn projection_by_hand() {
        let s = Splitting::new(h1());
        // (2,3,1)·(−2,0,0) = (0, 3, 1 + ½(2·0 − (−2)·3)) = (0, 3, 4)
        let p = pt(&[2.0, 3.0, 1.0]);
        assert_eq!(s.coset_normal_form(&p).unwrap(), pt(&[0.0, 3.0, 4.0]));
        assert_eq!(s.project_n(&p).unwrap(), pt(&[0.0, 3.0, 4.0]));
        let n = pt(&[0.0, 5.0, -1.0]);
        assert_eq!(s.project_n(&n).unwrap(), n);
    }

    #[test]
    fn h_is_a_one_parameter_subgroup() {
        let s = Splitting::new(h1());
        let g = s.group();
        assert_eq!(g.multiply(&s.h(1.5), &s.h(-0.25)).unwrap(), s.h(1.25));
    }

    #[test]
    fn fiber_distance_examples() {
        let s = Splitting::new(h1());
        let g = s.group();
        let y = pt(&[0.0, 0.0, 0.0]);
        let m = s.fiber_distance_1d(&pt(&[0.0, 1.0, 0.0]), &y).unwrap();
        assert!((m.value - 1.0).abs() < 1e-10);
        let base = pt(&[0.0, 0.7, -0.3]);
        let on = g.multiply(&base, &s.h(2.2)).unwrap();
        assert!(s.fiber_distance_1d(&on, &base).unwrap().value < 1e-10);
    }

    #[test]
    fn scan_oracle_agrees_with_solver() {
        let s = Splitting::new(h1());
        let g = s.group();
        let mut rng = seeded_rng(7);
        for _ in 0..20 {
            let x = g.random_point(2.0, &mut rng);
            let mut y = g.random_point(2.0, &mut rng);
            y.p1[0] = 0.0;
            let solved = s.fiber_distance_1d(&x, &y).unwrap().value;
            let brute = (-80_000..=80_000)
                .map(|i| i as f64 * 1e-4)
                .map(|t| g.distance(&x, &g.multiply(&y, &s.h(t)).unwrap()).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!(solved <= brute + 1e-12, "{solved} vs {brute}");
            assert!(brute - solved < 1e-3, "{solved} vs {brute}");
        }
    }
}
