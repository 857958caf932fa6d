//! The Heisenberg groups `ℍⁿ = ℝ^{2n+1}` with product
//!
//! ```text
//! (x, t)·(x', t') = (x + x', t + t' + ½ Σᵢ (xᵢ x'_{n+i} − x'ᵢ x_{n+i}))
//! ```
//!
//! and the splitting `H = {(x₁, …, x_k, 0, …, 0)}`, `N = {(0, …, 0, x_{k+1}, …, t)}`.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::carnot::{GroupPoint, Splitting, Step2Group};
use crate::error::{Error, Result};
use crate::metric::seeded_rng;

#[derive(Debug, Clone)]
pub struct HeisenbergInstance {
    n: usize,
    k: usize,
    group: Arc<Step2Group>,
}

/// The single second-layer matrix of `ℍⁿ`, row-major `2n × 2n`.
pub fn symplectic_matrix(n: usize) -> Vec<f64> {
    let m = 2 * n;
    let mut b = vec![0.0; m * m];
    for i in 0..n {
        // ⟨𝓑x, x'⟩ = Σ x'_a 𝓑_ab x_b, so x_i x'_{n+i} sits at (n+i, i)
        b[(n + i) * m + i] = 1.0;
        b[i * m + n + i] = -1.0;
    }
    b
}

pub fn make_heisenberg(n: usize, k: usize) -> Result<HeisenbergInstance> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k must satisfy 1 <= k <= n = {n}, got {k}")));
    }
    let group = Step2Group::new(2 * n, 1, vec![symplectic_matrix(n)])?;
    Ok(HeisenbergInstance {
        n,
        k,
        group: Arc::new(group),
    })
}

impl HeisenbergInstance {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn group(&self) -> &Step2Group {
        &self.group
    }

    pub fn group_arc(&self) -> &Arc<Step2Group> {
        &self.group
    }

    pub fn point(&self, coords: &[f64]) -> GroupPoint {
        GroupPoint::from_coords(2 * self.n, coords)
    }

    /// The one-dimensional splitting used by the step-2 machinery. Only
    /// available for `k = 1`.
    pub fn splitting(&self) -> Result<Splitting> {
        if self.k != 1 {
            return Err(Error::Precondition(format!(
                "operation needs a one-dimensional H, instance has k = {}",
                self.k
            )));
        }
        Ok(Splitting::new(Arc::clone(&self.group)))
    }

    /// The displayed product, written out coordinate by coordinate.
    pub fn closed_form_multiply(&self, p: &GroupPoint, q: &GroupPoint) -> Result<GroupPoint> {
        self.group.check(p)?;
        self.group.check(q)?;
        let n = self.n;
        let (x, xp) = (&p.p1, &q.p1);
        let omega: f64 = (0..n).map(|i| x[i] * xp[n + i] - xp[i] * x[n + i]).sum();
        Ok(GroupPoint {
            p1: x.iter().zip(xp).map(|(a, b)| a + b).collect(),
            p2: vec![p.p2[0] + q.p2[0] + 0.5 * omega],
        })
    }

    /// `h = (x₁, …, x_k, 0, …, 0)`.
    pub fn h(&self, head: &[f64]) -> GroupPoint {
        let mut p = self.group.identity();
        p.p1[..self.k].copy_from_slice(&head[..self.k]);
        p
    }

    /// `π_N(x, t) = (0, …, 0, x_{k+1}, …, x_{2n}, t + ½ Σ_{i≤k} xᵢ x_{n+i})`.
    pub fn project_n(&self, p: &GroupPoint) -> Result<GroupPoint> {
        self.group.check(p)?;
        let n = self.n;
        let mut p1 = p.p1.clone();
        let cross: f64 = (0..self.k).map(|i| p.p1[i] * p.p1[n + i]).sum();
        p1[..self.k].iter_mut().for_each(|v| *v = 0.0);
        Ok(GroupPoint {
            p1,
            p2: vec![p.p2[0] + 0.5 * cross],
        })
    }

    /// `p·h(−x₁, …, −x_k)` through the group law.
    pub fn coset_normal_form(&self, p: &GroupPoint) -> Result<GroupPoint> {
        let neg: Vec<f64> = p.p1[..self.k].iter().map(|v| -v).collect();
        let mut out = self.group.multiply(p, &self.h(&neg))?;
        out.p1[..self.k].iter_mut().for_each(|v| *v = 0.0);
        Ok(out)
    }

    /// Coordinates of `N` for this splitting.
    pub fn n_coords(&self, p: &GroupPoint) -> Vec<f64> {
        p.coords()[self.k..].to_vec()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommuteReport {
    pub max_defect: f64,
    pub n_samples: usize,
    pub witness: Option<(f64, Vec<f64>)>,
}

/// `‖π_N(δ_λp) − δ_λ(π_N p)‖∞` at one point.
pub fn dilation_commute_defect(inst: &HeisenbergInstance, lambda: f64, p: &GroupPoint) -> Result<f64> {
    let g = inst.group();
    let lhs = inst.project_n(&g.dilate(lambda, p))?;
    let rhs = g.dilate(lambda, &inst.project_n(p)?);
    Ok(lhs.sup_diff(&rhs))
}

/// Max commutation defect over random `λ ∈ [0.1, 10]` (log-uniform) and
/// points with coordinates in `[-1, 1]`.
pub fn check_dilation_commute(inst: &HeisenbergInstance, n_samples: usize, seed: u64) -> Result<CommuteReport> {
    let mut rng = seeded_rng(seed);
    let mut max_defect = 0.0f64;
    let mut witness = None;
    for _ in 0..n_samples {
        let lambda = 10f64.powf(rng.gen_range(-1.0..1.0));
        let p = inst.group().random_point(1.0, &mut rng);
        let d = dilation_commute_defect(inst, lambda, &p)?;
        if witness.is_none() || d > max_defect {
            max_defect = d;
            witness = Some((lambda, p.coords()));
        }
    }
    Ok(CommuteReport {
        max_defect,
        n_samples,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_convention_pinned_by_hand_products() {
        let h = make_heisenberg(1, 1).unwrap();
        let g = h.group();
        let cases = [
            ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.5]),
            ([0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, -0.5]),
            ([1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [5.0, 7.0, 9.0 + 0.5 * (5.0 - 8.0)]),
        ];
        for (a, b, want) in cases {
            let got = g.multiply(&h.point(&a), &h.point(&b)).unwrap();
            assert_eq!(got, h.point(&want));
        }
    }

    #[test]
    fn matrix_matches_closed_form_in_h2() {
        let h = make_heisenberg(2, 1).unwrap();
        let mut rng = seeded_rng(3);
        for _ in 0..200 {
            let p = h.group().random_point(2.0, &mut rng);
            let q = h.group().random_point(2.0, &mut rng);
            let a = h.group().multiply(&p, &q).unwrap();
            let b = h.closed_form_multiply(&p, &q).unwrap();
            assert!(a.sup_diff(&b) <= 1e-14);
        }
    }

    #[test]
    fn bad_k_rejected() {
        assert!(make_heisenberg(1, 0).is_err());
        assert!(make_heisenberg(1, 2).is_err());
        assert!(make_heisenberg(0, 1).is_err());
        assert!(make_heisenberg(2, 2).unwrap().splitting().is_err());
    }

    #[test]
    fn projection_examples() {
        let h1 = make_heisenberg(1, 1).unwrap();
        let p = h1.point(&[2.0, 3.0, 1.0]);
        assert_eq!(h1.project_n(&p).unwrap(), h1.point(&[0.0, 3.0, 4.0]));
        let n = h1.point(&[0.0, 3.0, 4.0]);
        assert_eq!(h1.project_n(&n).unwrap(), n);

        let h2 = make_heisenberg(2, 2).unwrap();
        let p = h2.point(&[1.0, 1.0, 1.0, 1.0, 0.0]);
        assert_eq!(h2.project_n(&p).unwrap(), h2.point(&[0.0, 0.0, 1.0, 1.0, 1.0]));
        assert_eq!(h2.coset_normal_form(&p).unwrap(), h2.point(&[0.0, 0.0, 1.0, 1.0, 1.0]));
    }

    #[test]
    fn k1_agrees_with_generic_projection() {
        let h = make_heisenberg(2, 1).unwrap();
        let s = h.splitting().unwrap();
        let mut rng = seeded_rng(5);
        for _ in 0..100 {
            let p = h.group().random_point(3.0, &mut rng);
            let a = h.project_n(&p).unwrap();
            let b = s.project_n(&p).unwrap();
            assert!(a.sup_diff(&b) <= 1e-12);
        }
    }

    #[test]
    fn commutation_by_hand() {
        let h = make_heisenberg(1, 1).unwrap();
        let p = h.point(&[1.0, 1.0, 1.0]);
        let g = h.group();
        let lhs = h.project_n(&g.dilate(2.0, &p)).unwrap();
        let rhs = g.dilate(2.0, &h.project_n(&p).unwrap());
        assert_eq!(lhs, h.point(&[0.0, 2.0, 6.0]));
        assert_eq!(rhs, h.point(&[0.0, 2.0, 6.0]));
        assert_eq!(dilation_commute_defect(&h, 1.0, &p).unwrap(), 0.0);
    }
}
