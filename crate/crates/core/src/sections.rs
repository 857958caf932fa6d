//! Sections of `π_N` in step-2 groups written as intrinsic graphs
//! `φ(y) = y·h(f(y))`, their dilations, and sums of compatible pairs.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::carnot::{CosetQuotient, GroupPoint, Splitting, Step2Group};
use crate::error::{Error, Result};
use crate::heisenberg::HeisenbergInstance;
use crate::metric::{
    pair_ratios, sample_pairs, seeded_rng, verify_section, BoxDomain, LipschitzReport, Quotient, Rng64, Sampler,
    Section, SectionCheck, DEGENERATE_TOL,
};
use crate::quasi_linear::RescaledQuotient;
use crate::symbolic::{CompatibilityPolys, SymbolicGroup};

/// Tolerance for `π_N(φ(y)) = y` on graph sections and their sums.
pub const SECTION_TOL: f64 = 1e-12;
/// Largest compatibility defect accepted before summing two sections.
pub const COMPATIBILITY_TOL: f64 = 1e-10;
/// Tolerance for `π(p·q) = π(p)·π(q)` and for oracle agreement.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Tolerance on the dilation preconditions.
pub const PRECONDITION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

/// Values on a regular product grid, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridTable {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

/// The `H`-component `f` of an intrinsic graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Height {
    Polynomial { terms: Vec<Monomial> },
    Grid(GridTable),
}

impl Height {
    pub fn zero() -> Self {
        Height::Polynomial { terms: Vec::new() }
    }

    /// `f(y) = c·y_i`.
    pub fn linear(dim: usize, i: usize, c: f64) -> Self {
        let mut powers = vec![0; dim];
        powers[i] = 1;
        Height::Polynomial {
            terms: vec![Monomial { coef: c, powers }],
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Height::Polynomial { terms } => {
                for t in terms {
                    if t.powers.len() != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            got: t.powers.len(),
                        });
                    }
                    if !t.coef.is_finite() {
                        return Err(Error::NonFinite(vec![t.coef]));
                    }
                }
                Ok(())
            }
            Height::Grid(g) => {
                for len in [g.lower.len(), g.upper.len(), g.shape.len()] {
                    if len != dim {
                        return Err(Error::DimensionMismatch { expected: dim, got: len });
                    }
                }
                if g.shape.iter().any(|&s| s < 2) {
                    return Err(Error::InvalidArgument("grid needs at least 2 nodes per axis".into()));
                }
                if g.lower.iter().zip(&g.upper).any(|(l, u)| !(l < u)) {
                    return Err(Error::InvalidArgument("grid bounds need lower < upper".into()));
                }
                let n: usize = g.shape.iter().product();
                if g.values.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: g.values.len(),
                    });
                }
                if g.values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite(g.values.clone()));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        match self {
            Height::Polynomial { terms } => Ok(terms
                .iter()
                .map(|t| {
                    t.coef * t.powers.iter().zip(y).map(|(&k, v)| v.powi(k as i32)).product::<f64>()
                })
                .sum()),
            Height::Grid(g) => g.interpolate(y),
        }
    }
}

impl GridTable {
    /// Multilinear interpolation. Points outside the grid box are rejected.
    pub fn interpolate(&self, y: &[f64]) -> Result<f64> {
        let d = self.shape.len();
        let mut cell = Vec::with_capacity(d);
        for k in 0..d {
            let (lo, hi) = (self.lower[k], self.upper[k]);
            if !(lo <= y[k] && y[k] <= hi) {
                return Err(Error::OutsideDomain {
                    what: "tabulated height",
                    point: y.to_vec(),
                });
            }
            let s = (y[k] - lo) / (hi - lo) * (self.shape[k] - 1) as f64;
            let i = (s.floor() as usize).min(self.shape[k] - 2);
            cell.push((i, s - i as f64));
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut idx = 0;
            for k in 0..d {
                let up = (corner >> k) & 1 == 1;
                let (i, frac) = cell[k];
                w *= if up { frac } else { 1.0 - frac };
                idx = idx * self.shape[k] + i + usize::from(up);
            }
            if w != 0.0 {
                acc += w * self.values[idx];
            }
        }
        Ok(acc)
    }
}

/// `φ(y) = y·h(f(y))` for `y ∈ N`, given in `N`-coordinates.
#[derive(Debug, Clone)]
pub struct GraphSection {
    name: String,
    split: Splitting,
    height: Arc<Height>,
}

impl GraphSection {
    pub fn new(name: impl Into<String>, split: Splitting, height: Height) -> Result<Self> {
        height.validate(split.n_dim())?;
        Ok(Self {
            name: name.into(),
            split,
            height: Arc::new(height),
        })
    }

    pub fn flat(split: Splitting) -> Self {
        Self {
            name: "flat".into(),
            split,
            height: Arc::new(Height::zero()),
        }
    }

    /// Graph section on `ℍⁿ`. Needs `k = 1`.
    pub fn on_heisenberg(inst: &HeisenbergInstance, name: impl Into<String>, height: Height) -> Result<Self> {
        Self::new(name, inst.splitting()?, height)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn splitting(&self) -> &Splitting {
        &self.split
    }

    pub fn group(&self) -> &Step2Group {
        self.split.group()
    }

    pub fn height(&self) -> &Height {
        &self.height
    }

    pub fn height_at(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.split.n_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.split.n_dim(),
                got: y.len(),
            });
        }
        self.height.eval(y)
    }

    pub fn point(&self, y: &[f64]) -> Result<GroupPoint> {
        graph_point(&self.split, &self.height, y)
    }

    pub fn quotient(&self) -> Arc<CosetQuotient> {
        Arc::new(CosetQuotient::new(self.split.clone()))
    }

    pub fn to_section(&self, sampler: Sampler) -> Result<Section> {
        let split = self.split.clone();
        let height = Arc::clone(&self.height);
        Section::new(self.name.clone(), self.quotient(), sampler, move |y| {
            Ok(graph_point(&split, &height, y)?.coords())
        })
    }
}

fn graph_point(split: &Splitting, height: &Height, y: &[f64]) -> Result<GroupPoint> {
    let base = split.embed(y)?;
    let t = height.eval(y)?;
    split.group().multiply(&base, &split.h(t))
}

fn same_group(a: &GraphSection, b: &GraphSection) -> Result<()> {
    if a.group() != b.group() {
        return Err(Error::InvalidArgument(format!(
            "sections {} and {} live on different groups",
            a.name, b.name
        )));
    }
    Ok(())
}

/// The explicit form of `π(p·q)`: first layer `(0, p' + q')`, second layer
/// `p² + q² + ½⟨𝓑p¹, q¹⟩ − ½⟨𝓑(0, p' + q'), (p₁ + q₁)e₁⟩`.
pub fn projected_product_formula(split: &Splitting, p: &GroupPoint, q: &GroupPoint) -> Result<GroupPoint> {
    let g = split.group();
    g.check(p)?;
    g.check(q)?;
    let mut tail: Vec<f64> = p.p1.iter().zip(&q.p1).map(|(a, b)| a + b).collect();
    let head = split.h(tail[0]).p1;
    tail[0] = 0.0;
    let p2 = (0..g.n())
        .map(|l| {
            p.p2[l] + q.p2[l] + 0.5 * g.bilinear(l, &p.p1, &q.p1) - 0.5 * g.bilinear(l, &tail, &head)
        })
        .collect();
    Ok(GroupPoint { p1: tail, p2 })
}

/// `‖π(p·q) − π(p)·π(q)‖∞`.
pub fn homomorphism_residual(split: &Splitting, p: &GroupPoint, q: &GroupPoint) -> Result<f64> {
    let g = split.group();
    let lhs = split.project_n(&g.multiply(p, q)?)?;
    let rhs = g.multiply(&split.project_n(p)?, &split.project_n(q)?)?;
    Ok(lhs.sup_diff(&rhs))
}

// ---------------------------------------------------------------- dilation

/// `δ_{1/λ} ∘ π_N`. The fiber over `b` is `π_N⁻¹(δ_λ b)`.
#[derive(Debug, Clone)]
pub struct DilatedQuotient {
    inner: CosetQuotient,
    lambda: f64,
}

impl DilatedQuotient {
    pub fn new(split: Splitting, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self {
            inner: CosetQuotient::new(split),
            lambda,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn scale_base(&self, b: &[f64], lambda: f64) -> Result<Vec<f64>> {
        let s = self.inner.splitting();
        let p = s.embed(b)?;
        Ok(s.n_coords(&s.group().dilate(lambda, &p)))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("dilation factor must be positive, got {lambda}")));
    }
    Ok(())
}

impl Quotient for DilatedQuotient {
    fn name(&self) -> String {
        format!("delta_(1/{}) o {}", self.lambda, self.inner.name())
    }

    fn total_dim(&self) -> usize {
        self.inner.total_dim()
    }

    fn base_dim(&self) -> usize {
        self.inner.base_dim()
    }

    fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        let y = self.inner.project(x)?;
        self.scale_base(&y, 1.0 / self.lambda)
    }

    fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        self.inner.distance(x, y)
    }

    fn fiber_distance(&self, x: &[f64], b: &[f64]) -> Result<f64> {
        self.inner.fiber_distance(x, &self.scale_base(b, self.lambda)?)
    }

    fn base_distance(&self, y1: &[f64], y2: &[f64]) -> f64 {
        self.inner.base_distance(y1, y2)
    }

    fn sample_base_ball(&self, y: &[f64], r: f64, rng: &mut Rng64) -> Vec<f64> {
        self.inner.sample_base_ball(y, r, rng)
    }

    fn sample_total(&self, rng: &mut Rng64) -> Vec<f64> {
        self.inner.sample_total(rng)
    }

    fn fiber_point(&self, b: &[f64], rng: &mut Rng64) -> Result<Vec<f64>> {
        self.inner.fiber_point(&self.scale_base(b, self.lambda)?, rng)
    }
}

/// Sampled defects of the hypotheses needed to dilate sections. Each is
/// normalized by `max(1, λ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilationPreconditions {
    pub n_samples: usize,
    /// `|‖δ_λp‖ − λ‖p‖|`.
    pub homogeneity_defect: f64,
    /// `‖δ_{1/λ}δ_λp − p‖∞`.
    pub involution_defect: f64,
    /// `‖π_N(δ_λp) − δ_λπ_N(p)‖∞`.
    pub commute_defect: f64,
    pub tolerance: f64,
}

impl DilationPreconditions {
    pub fn passed(&self) -> bool {
        self.homogeneity_defect <= self.tolerance
            && self.involution_defect <= self.tolerance
            && self.commute_defect <= self.tolerance
    }
}

pub fn dilation_preconditions(split: &Splitting, lambda: f64, n_samples: usize, seed: u64) -> Result<DilationPreconditions> {
    check_lambda(lambda)?;
    let g = split.group();
    let scale = lambda.powi(2).max(1.0);
    let mut rng = seeded_rng(seed);
    let mut out = DilationPreconditions {
        n_samples,
        homogeneity_defect: 0.0,
        involution_defect: 0.0,
        commute_defect: 0.0,
        tolerance: PRECONDITION_TOL,
    };
    for _ in 0..n_samples {
        let p = g.random_point(1.0, &mut rng);
        let dp = g.dilate(lambda, &p);
        let h = (g.gauge_norm(&dp) - lambda * g.gauge_norm(&p)).abs();
        let inv = g.dilate(1.0 / lambda, &dp).sup_diff(&p);
        let com = split.project_n(&dp)?.sup_diff(&g.dilate(lambda, &split.project_n(&p)?));
        out.homogeneity_defect = out.homogeneity_defect.max(h / scale);
        out.involution_defect = out.involution_defect.max(inv / scale);
        out.commute_defect = out.commute_defect.max(com / scale);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationReport {
    pub lambda: f64,
    pub n_pairs: usize,
    pub preconditions: DilationPreconditions,
    pub check: SectionCheck,
    /// `L̂(φ)` against `π_N`.
    pub original: LipschitzReport,
    /// `L̂(δ_λφ)` against `δ_{1/λ}∘π_N`.
    pub dilated: LipschitzReport,
    /// Max over pairs of |ratio(δ_λφ) − ratio(φ)|, both against their own
    /// quotients. Zero up to solver error.
    pub max_intrinsic_ratio_defect: f64,
    /// Max over pairs of `|d(δ_λφ(a), δ_λφ(b)) / d(φ(a), π_N⁻¹(b)) − λ·ratio(φ)|`.
    pub max_chain_ratio_defect: f64,
    /// Largest chain ratio, to compare with `λ·L̂(φ)`.
    pub chain_estimate: f64,
    /// `|chain_estimate − λ·L̂(φ)|`.
    pub estimate_defect: f64,
    pub tolerance: f64,
    /// Section check and chain scaling within tolerance.
    pub passed: bool,
    /// Intrinsic ratios unchanged within tolerance.
    pub invariance_passed: bool,
}

#[derive(Debug, Clone)]
pub struct DilatedSection {
    pub section: Section,
    pub report: DilationReport,
}

/// `δ_λ∘φ` as a section of `δ_{1/λ}∘π_N`, compared with `φ` on the same
/// sample pairs.
pub fn dilate_section(
    phi: &GraphSection,
    lambda: f64,
    sampler: &Sampler,
    n_pairs: usize,
    seed: u64,
    tol: f64,
) -> Result<DilatedSection> {
    check_lambda(lambda)?;
    let preconditions = dilation_preconditions(phi.splitting(), lambda, 256, seed)?;
    if !preconditions.passed() {
        return Err(Error::Precondition(format!(
            "dilation hypotheses fail: homogeneity {:e}, involution {:e}, commutation {:e}",
            preconditions.homogeneity_defect, preconditions.involution_defect, preconditions.commute_defect
        )));
    }
    let original = phi.to_section(sampler.clone())?;
    let quotient = Arc::new(DilatedQuotient::new(phi.splitting().clone(), lambda)?);
    let split = phi.splitting().clone();
    let height = Arc::clone(&phi.height);
    let psi = Section::new(
        format!("delta_{lambda}({})", phi.name()),
        quotient,
        sampler.clone(),
        move |y| {
            let p = graph_point(&split, &height, y)?;
            Ok(split.group().dilate(lambda, &p).coords())
        },
    )?;
    let check = verify_section(&psi, n_pairs.clamp(1, 1000), SECTION_TOL)?;

    let pairs = sample_pairs(&sampler.domain, n_pairs, seed);
    let r_phi = pair_ratios(&original, &pairs)?;
    let r_psi = pair_ratios(&psi, &pairs)?;
    let original_report = LipschitzReport::from_pair_ratios(&pairs, &r_phi)?;
    let dilated_report = LipschitzReport::from_pair_ratios(&pairs, &r_psi)?;

    let mut max_intrinsic = 0.0f64;
    let mut max_chain = 0.0f64;
    let mut chain_estimate = f64::NEG_INFINITY;
    for (a, b) in r_phi.iter().zip(&r_psi) {
        let Some(ra) = a.ratio() else { continue };
        let chain = b.numerator / a.denominator;
        max_chain = max_chain.max((chain - lambda * ra).abs());
        chain_estimate = chain_estimate.max(chain);
        if b.denominator >= DEGENERATE_TOL {
            max_intrinsic = max_intrinsic.max((b.numerator / b.denominator - ra).abs());
        }
    }
    let estimate_defect = (chain_estimate - lambda * original_report.estimate).abs();
    let passed = check.passed && max_chain <= tol && estimate_defect <= tol;
    let report = DilationReport {
        lambda,
        n_pairs,
        preconditions,
        check,
        original: original_report,
        dilated: dilated_report,
        max_intrinsic_ratio_defect: max_intrinsic,
        max_chain_ratio_defect: max_chain,
        chain_estimate,
        estimate_defect,
        tolerance: tol,
        passed,
        invariance_passed: max_intrinsic <= tol,
    };
    Ok(DilatedSection { section: psi, report })
}

// ----------------------------------------------------------- compatibility

/// Both displayed expressions for one layer and their differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerDefect {
    pub a1: f64,
    pub a2: f64,
    pub defect: f64,
    pub a2_printed: f64,
    pub printed_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityRow {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub layers: Vec<LayerDefect>,
    pub max_defect: f64,
    pub max_printed_defect: f64,
}

/// `𝓐₁,ℓ` and `𝓐₂,ℓ` at `p, q`, with second-layer arguments read as
/// zero-padded first-layer vectors.
pub fn compatibility_values(g: &Step2Group, p: &GroupPoint, q: &GroupPoint) -> Result<Vec<LayerDefect>> {
    g.check(p)?;
    g.check(q)?;
    let m = g.m();
    let e1 = |t: f64| {
        let mut v = vec![0.0; m];
        v[0] = t;
        v
    };
    let tail = |v: &[f64]| {
        let mut v = v.to_vec();
        v[0] = 0.0;
        v
    };
    let (pt, qt) = (tail(&p.p1), tail(&q.p1));
    let sum_tail: Vec<f64> = pt.iter().zip(&qt).map(|(a, b)| a + b).collect();
    let sum_head = e1(p.p1[0] + q.p1[0]);
    Ok((0..g.n())
        .map(|l| {
            let a1 = g.bilinear(l, &p.p1, &q.p1) - g.bilinear(l, &sum_tail, &sum_head);
            let cross = g.bilinear(l, &pt, &qt);
            let mp = g.bilinear(l, &pt, &e1(p.p1[0]));
            let mq = g.bilinear(l, &qt, &e1(q.p1[0]));
            let a2 = cross - mp - mq;
            let a2_printed = cross + mp + mq;
            LayerDefect {
                a1,
                a2,
                defect: a1 - a2,
                a2_printed,
                printed_defect: a1 - a2_printed,
            }
        })
        .collect())
}

/// One row of the compatibility report at `p = φ(a)`, `q = ψ(b)`.
pub fn compatibility_defect(phi: &GraphSection, psi: &GraphSection, a: &[f64], b: &[f64]) -> Result<CompatibilityRow> {
    same_group(phi, psi)?;
    let p = phi.point(a)?;
    let q = psi.point(b)?;
    let layers = compatibility_values(phi.group(), &p, &q)?;
    Ok(CompatibilityRow {
        a: a.to_vec(),
        b: b.to_vec(),
        p: p.coords(),
        q: q.coords(),
        max_defect: layers.iter().map(|l| l.defect.abs()).fold(0.0, f64::max),
        max_printed_defect: layers.iter().map(|l| l.printed_defect.abs()).fold(0.0, f64::max),
        layers,
    })
}

/// Exact polynomials for both defects, evaluated in floating point.
#[derive(Debug, Clone)]
pub struct DefectOracle {
    polys: Vec<CompatibilityPolys>,
    defect: Vec<crate::symbolic::Poly>,
    printed: Vec<crate::symbolic::Poly>,
}

impl DefectOracle {
    pub fn new(g: &Step2Group) -> Result<Self> {
        let polys = SymbolicGroup::from_group(g)?.compatibility();
        Ok(Self {
            defect: polys.iter().map(CompatibilityPolys::defect).collect(),
            printed: polys.iter().map(CompatibilityPolys::printed_defect).collect(),
            polys,
        })
    }

    pub fn polys(&self) -> &[CompatibilityPolys] {
        &self.polys
    }

    /// `(defect, printed_defect)` per layer at `(p, q)` coordinates.
    pub fn eval(&self, p: &[f64], q: &[f64]) -> Vec<(f64, f64)> {
        let x: Vec<f64> = p.iter().chain(q).copied().collect();
        self.defect
            .iter()
            .zip(&self.printed)
            .map(|(d, pr)| (d.eval(&x), pr.eval(&x)))
            .collect()
    }

    /// Largest gap between this oracle and a numeric row.
    pub fn gap(&self, row: &CompatibilityRow) -> f64 {
        self.eval(&row.p, &row.q)
            .iter()
            .zip(&row.layers)
            .map(|((d, pr), l)| (d - l.defect).abs().max((pr - l.printed_defect).abs()))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub n_pairs: usize,
    pub max_defect: f64,
    /// Pair with the largest defect and its per-layer defects.
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
    pub witness_defects: Vec<f64>,
    pub max_printed_defect: f64,
    pub printed_witness: Option<(Vec<f64>, Vec<f64>)>,
    /// Largest |oracle − numeric| over pairs and layers, when the oracle ran.
    pub oracle_max_gap: Option<f64>,
    pub tolerance: f64,
}

impl CompatibilityReport {
    pub fn oracle_agrees(&self) -> bool {
        self.oracle_max_gap.is_some_and(|g| g <= IDENTITY_TOL)
    }
}

pub fn compatibility_rows(
    phi: &GraphSection,
    psi: &GraphSection,
    pairs: &[(Vec<f64>, Vec<f64>)],
) -> Result<Vec<CompatibilityRow>> {
    same_group(phi, psi)?;
    pairs
        .par_iter()
        .map(|(a, b)| compatibility_defect(phi, psi, a, b))
        .collect()
}

/// Summarizes rows in input order; ties keep the earliest pair.
pub fn compatibility_report(rows: &[CompatibilityRow], oracle: Option<&DefectOracle>) -> CompatibilityReport {
    let mut out = CompatibilityReport {
        n_pairs: rows.len(),
        max_defect: 0.0,
        witness: None,
        witness_defects: Vec::new(),
        max_printed_defect: 0.0,
        printed_witness: None,
        oracle_max_gap: None,
        tolerance: COMPATIBILITY_TOL,
    };
    for row in rows {
        if out.witness.is_none() || row.max_defect > out.max_defect {
            out.max_defect = row.max_defect;
            out.witness = Some((row.a.clone(), row.b.clone()));
            out.witness_defects = row.layers.iter().map(|l| l.defect).collect();
        }
        if out.printed_witness.is_none() || row.max_printed_defect > out.max_printed_defect {
            out.max_printed_defect = row.max_printed_defect;
            out.printed_witness = Some((row.a.clone(), row.b.clone()));
        }
    }
    if let Some(o) = oracle {
        let gaps: Vec<f64> = rows.par_iter().map(|r| o.gap(r)).collect();
        out.oracle_max_gap = Some(gaps.into_iter().fold(0.0, f64::max));
    }
    out
}

// --------------------------------------------------------------------- sum

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSumReport {
    pub compatibility: CompatibilityReport,
    pub max_homomorphism_residual: f64,
    pub residual_tolerance: f64,
    pub check: SectionCheck,
    pub lipschitz: LipschitzReport,
    pub finite: bool,
}

#[derive(Debug, Clone)]
pub struct StepSum {
    pub section: Section,
    pub report: StepSumReport,
}

/// Pairs `(a, b)` drawn from the domain, followed by diagonal pairs `(y, y)`.
fn pairs_with_diagonal(domain: &BoxDomain, n: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut pairs = sample_pairs(domain, n, seed);
    let mut rng = seeded_rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    pairs.extend((0..n).map(|_| {
        let y = domain.sample(&mut rng);
        (y.clone(), y)
    }));
    pairs
}

/// `η(y) = φ(y)·ψ(y)` as a section of `½π_N`, once compatibility holds on
/// the sampled pairs.
pub fn sum_sections_step2(
    phi: &GraphSection,
    psi: &GraphSection,
    sampler: &Sampler,
    n_samples: usize,
    seed: u64,
) -> Result<StepSum> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    same_group(phi, psi)?;
    let pairs = pairs_with_diagonal(&sampler.domain, n_samples, seed);
    let rows = compatibility_rows(phi, psi, &pairs)?;
    let oracle = DefectOracle::new(phi.group())?;
    let compatibility = compatibility_report(&rows, Some(&oracle));
    if compatibility.max_defect > COMPATIBILITY_TOL {
        let (a, b) = compatibility.witness.clone().expect("nonempty rows");
        return Err(Error::CompatibilityViolated {
            a,
            b,
            defects: compatibility.witness_defects,
        });
    }
    let split = phi.splitting();
    let m = split.group().m();
    let residuals: Vec<Result<f64>> = rows
        .par_iter()
        .map(|r| {
            homomorphism_residual(
                split,
                &GroupPoint::from_coords(m, &r.p),
                &GroupPoint::from_coords(m, &r.q),
            )
        })
        .collect();
    let mut max_res = 0.0f64;
    for (r, row) in residuals.into_iter().zip(&rows) {
        let r = r?;
        if r > IDENTITY_TOL {
            return Err(Error::Consistency(format!(
                "defect {:e} at a = {:?}, b = {:?} but pi(pq) - pi(p)pi(q) = {r:e}",
                row.max_defect, row.a, row.b
            )));
        }
        max_res = max_res.max(r);
    }

    let quotient = Arc::new(RescaledQuotient::new(phi.quotient(), 0.5)?);
    let (s, hp, hq) = (split.clone(), Arc::clone(&phi.height), Arc::clone(&psi.height));
    let eta = Section::new(format!("{} * {}", phi.name(), psi.name()), quotient, sampler.clone(), move |y| {
        let p = graph_point(&s, &hp, y)?;
        let q = graph_point(&s, &hq, y)?;
        Ok(s.group().multiply(&p, &q)?.coords())
    })?;
    let check = verify_section(&eta, n_samples, SECTION_TOL)?;
    let lipschitz = crate::metric::lipschitz_estimate(&eta, n_samples, seed)?;
    let finite = lipschitz.estimate.is_finite();
    Ok(StepSum {
        section: eta,
        report: StepSumReport {
            compatibility,
            max_homomorphism_residual: max_res,
            residual_tolerance: IDENTITY_TOL,
            check,
            lipschitz,
            finite,
        },
    })
}

// ----------------------------------------------------------- classification

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Phi1Zero,
    PsiN1Zero,
    Both,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub n: usize,
    pub n_pairs: usize,
    pub max_abs_phi1: f64,
    /// `max |ψ_{n+1}(b)|`.
    pub max_abs_psi_n1: f64,
    pub branch: Branch,
    pub branch_tolerance: f64,
    pub compatibility: CompatibilityReport,
    pub defect_vanishes: bool,
    pub printed_defect_vanishes: bool,
    /// A detected branch comes with a vanishing defect.
    pub claim_confirmed: bool,
    /// Numeric path and symbolic oracle agree.
    pub internally_consistent: bool,
}

/// Tests the two branches `φ₁ ≡ 0` and `ψ_{n+1} ≡ 0` on sampled pairs and
/// cross-checks them against the defect, numerically and via the oracle.
pub fn heisenberg_compatibility_classify(
    inst: &HeisenbergInstance,
    phi: &GraphSection,
    phi_domain: &BoxDomain,
    psi: &GraphSection,
    psi_domain: &BoxDomain,
    n_pairs: usize,
    seed: u64,
) -> Result<Classification> {
    if inst.k() != 1 {
        return Err(Error::Precondition(format!("classification needs k = 1, got {}", inst.k())));
    }
    if phi.group() != inst.group() || psi.group() != inst.group() {
        return Err(Error::InvalidArgument("sections do not live on this Heisenberg group".into()));
    }
    let n = inst.n();
    let mut rng = seeded_rng(seed);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..n_pairs)
        .map(|_| (phi_domain.sample(&mut rng), psi_domain.sample(&mut rng)))
        .collect();
    let rows = compatibility_rows(phi, psi, &pairs)?;
    let oracle = DefectOracle::new(inst.group())?;
    let compatibility = compatibility_report(&rows, Some(&oracle));
    let max_abs_phi1 = rows.iter().map(|r| r.p[0].abs()).fold(0.0, f64::max);
    let max_abs_psi_n1 = rows.iter().map(|r| r.q[n].abs()).fold(0.0, f64::max);
    let tol = IDENTITY_TOL;
    let branch = match (max_abs_phi1 <= tol, max_abs_psi_n1 <= tol) {
        (true, true) => Branch::Both,
        (true, false) => Branch::Phi1Zero,
        (false, true) => Branch::PsiN1Zero,
        (false, false) => Branch::Neither,
    };
    let defect_vanishes = compatibility.max_defect <= COMPATIBILITY_TOL;
    Ok(Classification {
        n,
        n_pairs,
        max_abs_phi1,
        max_abs_psi_n1,
        branch,
        branch_tolerance: tol,
        defect_vanishes,
        printed_defect_vanishes: compatibility.max_printed_defect <= COMPATIBILITY_TOL,
        claim_confirmed: branch == Branch::Neither || defect_vanishes,
        internally_consistent: compatibility.oracle_agrees(),
        compatibility,
    })
}

/// A random polynomial height of total degree at most 2 with coefficients in
/// `[-1, 1]`, for sweeps.
pub fn random_quadratic_height<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Height {
    let mut terms = vec![Monomial {
        coef: rng.gen_range(-1.0..1.0),
        powers: vec![0; dim],
    }];
    for i in 0..dim {
        let mut powers = vec![0; dim];
        powers[i] = 1;
        terms.push(Monomial {
            coef: rng.gen_range(-1.0..1.0),
            powers: powers.clone(),
        });
        for j in i..dim {
            let mut pw = powers.clone();
            pw[j] += 1;
            terms.push(Monomial {
                coef: rng.gen_range(-1.0..1.0),
                powers: pw,
            });
        }
    }
    Height::Polynomial { terms }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::make_heisenberg;
    use crate::metric::SampleMode;

    fn h1() -> HeisenbergInstance {
        make_heisenberg(1, 1).unwrap()
    }

    fn sampler(dim: usize, seed: u64) -> Sampler {
        Sampler {
            domain: BoxDomain::cube(dim, -1.0, 1.0).unwrap(),
            mode: SampleMode::Random { seed },
        }
    }

    #[test]
    fn graph_lands_in_fiber() {
        let h = h1();
        let phi = GraphSection::on_heisenberg(&h, "x2", Height::linear(2, 0, 1.0)).unwrap();
        // φ(x₂, t) = (0, x₂, t)·(x₂, 0, 0) = (x₂, x₂, t − ½x₂²)
        assert_eq!(phi.point(&[2.0, 1.0]).unwrap().coords(), vec![2.0, 2.0, -1.0]);
        let s = phi.to_section(sampler(2, 1)).unwrap();
        assert!(verify_section(&s, 200, SECTION_TOL).unwrap().passed);
    }

    #[test]
    fn grid_interpolation_is_multilinear() {
        let g = GridTable {
            lower: vec![0.0, 0.0],
            upper: vec![1.0, 2.0],
            shape: vec![2, 3],
            values: vec![0.0, 1.0, 2.0, 10.0, 11.0, 12.0],
        };
        let h = Height::Grid(g.clone());
        h.validate(2).unwrap();
        assert_eq!(g.interpolate(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(g.interpolate(&[1.0, 2.0]).unwrap(), 12.0);
        // f = 10x + y exactly
        assert!((g.interpolate(&[0.25, 1.5]).unwrap() - 4.0).abs() < 1e-15);
        assert!(g.interpolate(&[1.5, 0.0]).is_err());
    }

    #[test]
    fn identity_points_have_no_defect() {
        let g = h1();
        let id = g.group().identity();
        for l in compatibility_values(g.group(), &id, &id).unwrap() {
            assert_eq!((l.a1, l.a2, l.defect), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn flat_sections_in_h1_by_hand() {
        // p₁ = q₁ = 0: A₁ = p₁q₂ − p₂q₁ − 0 = 0 and A₂ = 0 as well
        let h = h1();
        let flat = GraphSection::flat(h.splitting().unwrap());
        let row = compatibility_defect(&flat, &flat, &[0.7, 0.1], &[-0.3, 2.0]).unwrap();
        assert_eq!(row.max_defect, 0.0);
        assert_eq!(row.max_printed_defect, 0.0);
    }

    #[test]
    fn h1_defect_is_twice_p1_q2() {
        let h = h1();
        let phi = GraphSection::on_heisenberg(&h, "c", Height::linear(2, 1, 0.5)).unwrap();
        let psi = GraphSection::on_heisenberg(&h, "d", Height::linear(2, 0, -2.0)).unwrap();
        let row = compatibility_defect(&phi, &psi, &[0.5, 1.0], &[0.25, 3.0]).unwrap();
        let (p1, q2) = (row.p[0], row.q[1]);
        assert!((row.layers[0].defect - 2.0 * p1 * q2).abs() < 1e-15);
        let oracle = DefectOracle::new(h.group()).unwrap();
        assert!(oracle.gap(&row) < 1e-15);
    }

    #[test]
    fn product_formula_matches_projection() {
        let h = make_heisenberg(2, 1).unwrap();
        let s = h.splitting().unwrap();
        let mut rng = seeded_rng(4);
        for _ in 0..100 {
            let p = h.group().random_point(1.0, &mut rng);
            let q = h.group().random_point(1.0, &mut rng);
            let a = projected_product_formula(&s, &p, &q).unwrap();
            let b = s.project_n(&h.group().multiply(&p, &q).unwrap()).unwrap();
            assert!(a.sup_diff(&b) < 1e-12);
        }
    }

    #[test]
    fn flat_plus_flat_doubles() {
        let h = h1();
        let flat = GraphSection::flat(h.splitting().unwrap());
        let sum = sum_sections_step2(&flat, &flat, &sampler(2, 2), 50, 3).unwrap();
        assert_eq!(sum.report.compatibility.max_defect, 0.0);
        assert!(sum.report.check.passed);
        let y = [0.5, -0.25];
        assert_eq!(sum.section.evaluate(&y).unwrap(), vec![0.0, 1.0, -0.5]);
    }

    #[test]
    fn incompatible_pair_rejected_with_witness() {
        let h = h1();
        let phi = GraphSection::on_heisenberg(&h, "one", Height::linear(2, 1, 1.0)).unwrap();
        let psi = GraphSection::on_heisenberg(&h, "psi", Height::linear(2, 0, 1.0)).unwrap();
        match sum_sections_step2(&phi, &psi, &sampler(2, 5), 50, 3) {
            Err(Error::CompatibilityViolated { defects, .. }) => assert!(defects[0].abs() > COMPATIBILITY_TOL),
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn dilation_by_one_is_identity() {
        let h = h1();
        let phi = GraphSection::on_heisenberg(&h, "x2", Height::linear(2, 0, 1.0)).unwrap();
        let r = dilate_section(&phi, 1.0, &sampler(2, 6), 200, 7, 1e-9).unwrap().report;
        assert_eq!(r.original, r.dilated);
        assert!(r.passed && r.invariance_passed);
    }

    #[test]
    fn k2_rejected() {
        let h = make_heisenberg(2, 2).unwrap();
        assert!(GraphSection::on_heisenberg(&h, "f", Height::zero()).is_err());
    }
}
