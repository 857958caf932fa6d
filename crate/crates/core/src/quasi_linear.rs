//! Section algebra for quotients satisfying the weak-linearity condition
//! `π(αx₁ + βx₂) = α^λ π(x₁) + β^λ π(x₂)`.
//!
//! Linear combinations of sections are sections of a rescaled quotient
//! `μπ`, whose fibers are reached through `(μπ)⁻¹(y) = π⁻¹(y/μ)`.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{
    euclidean, intrinsic_slope, lipschitz_estimate_on_pairs, pair_ratios, sample_pairs, seeded_rng,
    verify_section, LipschitzReport, Quotient, Rng64, Section, SectionCheck, SlopeEstimate, SlopeParams,
    DEGENERATE_TOL,
};

/// Which real coefficients `α, β` the condition is asserted for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientDomain {
    /// `α, β ≥ 0`, `(α, β) ≠ (0, 0)`.
    #[default]
    NonNegative,
    /// All reals; negative bases need an odd integer exponent.
    Real,
    /// All reals, with `α^λ := sign(α)|α|^λ`.
    RealSignedPower,
}

#[derive(Clone)]
pub struct QuasiLinearQuotient {
    base: Arc<dyn Quotient>,
    lambda: f64,
    domain: CoefficientDomain,
    fibers_in_lines: bool,
}

impl std::fmt::Debug for QuasiLinearQuotient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuasiLinearQuotient")
            .field("base", &self.base.name())
            .field("lambda", &self.lambda)
            .field("domain", &self.domain)
            .field("fibers_in_lines", &self.fibers_in_lines)
            .finish()
    }
}

fn is_odd_integer(v: f64) -> bool {
    v.fract() == 0.0 && (v.abs() % 2.0) == 1.0
}

impl QuasiLinearQuotient {
    pub fn new(base: Arc<dyn Quotient>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("exponent must be positive, got {lambda}")));
        }
        Ok(Self {
            base,
            lambda,
            domain: CoefficientDomain::NonNegative,
            fibers_in_lines: false,
        })
    }

    pub fn with_domain(mut self, domain: CoefficientDomain) -> Self {
        self.domain = domain;
        self
    }

    /// Declares that every fiber lies in a straight line. Spot-checked by
    /// [`check_fibers_in_lines`].
    pub fn declare_fibers_in_lines(mut self) -> Self {
        self.fibers_in_lines = true;
        self
    }

    pub fn base(&self) -> &Arc<dyn Quotient> {
        &self.base
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn domain(&self) -> CoefficientDomain {
        self.domain
    }

    pub fn fibers_in_lines(&self) -> bool {
        self.fibers_in_lines
    }

    /// `α^λ` under the declared coefficient domain.
    pub fn power(&self, alpha: f64) -> Result<f64> {
        if alpha >= 0.0 {
            return Ok(alpha.powf(self.lambda));
        }
        match self.domain {
            CoefficientDomain::NonNegative => Err(Error::InvalidArgument(format!(
                "coefficient {alpha} outside the non-negative domain"
            ))),
            CoefficientDomain::Real if is_odd_integer(self.lambda) => Ok(-(-alpha).powf(self.lambda)),
            CoefficientDomain::Real => Err(Error::ExponentUndefined {
                base: alpha,
                exponent: self.lambda,
            }),
            CoefficientDomain::RealSignedPower => Ok(-(-alpha).powf(self.lambda)),
        }
    }

    pub fn rescaled(&self, factor: f64) -> Result<RescaledQuotient> {
        RescaledQuotient::new(Arc::clone(&self.base), factor)
    }

    fn owns(&self, section: &Section) -> bool {
        std::ptr::addr_eq(Arc::as_ptr(section.quotient()), Arc::as_ptr(&self.base))
    }

    fn require_owned(&self, sections: &[&Section]) -> Result<()> {
        for s in sections {
            if !self.owns(s) {
                return Err(Error::Precondition(format!(
                    "section '{}' is not declared against {}",
                    s.name(),
                    self.base.name()
                )));
            }
        }
        Ok(())
    }
}

/// The quotient `y ↦ μ·π(y)`.
#[derive(Clone)]
pub struct RescaledQuotient {
    parent: Arc<dyn Quotient>,
    factor: f64,
}

impl RescaledQuotient {
    pub fn new(parent: Arc<dyn Quotient>, factor: f64) -> Result<Self> {
        if factor == 0.0 || !factor.is_finite() {
            return Err(Error::InvalidArgument(format!("rescale factor must be nonzero, got {factor}")));
        }
        Ok(Self { parent, factor })
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    fn unscale(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|v| v / self.factor).collect()
    }
}

impl Quotient for RescaledQuotient {
    fn name(&self) -> String {
        format!("{} * ({})", self.factor, self.parent.name())
    }

    fn total_dim(&self) -> usize {
        self.parent.total_dim()
    }

    fn base_dim(&self) -> usize {
        self.parent.base_dim()
    }

    fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.parent.project(x)?.into_iter().map(|v| self.factor * v).collect())
    }

    fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        self.parent.distance(x, y)
    }

    fn fiber_distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.parent.fiber_distance(x, &self.unscale(y))
    }

    fn fiber_to_fiber_distance(&self, y1: &[f64], y2: &[f64]) -> Result<f64> {
        self.parent.fiber_to_fiber_distance(&self.unscale(y1), &self.unscale(y2))
    }

    fn base_distance(&self, y1: &[f64], y2: &[f64]) -> f64 {
        self.parent.base_distance(y1, y2)
    }

    fn sample_base_ball(&self, y: &[f64], r: f64, rng: &mut Rng64) -> Vec<f64> {
        self.parent.sample_base_ball(y, r, rng)
    }

    fn sample_total(&self, rng: &mut Rng64) -> Vec<f64> {
        self.parent.sample_total(rng)
    }

    fn fiber_point(&self, y: &[f64], rng: &mut Rng64) -> Result<Vec<f64>> {
        self.parent.fiber_point(&self.unscale(y), rng)
    }

    fn scaling(&self) -> Option<f64> {
        self.parent.scaling()
    }
}

/// One probe of the weak-linearity condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiLinearProbe {
    pub alpha: f64,
    pub beta: f64,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiLinearityReport {
    pub max_defect: f64,
    pub witness: Option<QuasiLinearProbe>,
    pub n_samples: usize,
    /// Probes whose combination left the domain of `π`.
    pub skipped: usize,
}

/// `‖π(αx₁+βx₂) − (α^λ π(x₁) + β^λ π(x₂))‖`.
pub fn quasi_linearity_defect(q: &QuasiLinearQuotient, probe: &QuasiLinearProbe) -> Result<f64> {
    if probe.alpha == 0.0 && probe.beta == 0.0 {
        return Err(Error::InvalidArgument("(alpha, beta) must not both vanish".into()));
    }
    let a = q.power(probe.alpha)?;
    let b = q.power(probe.beta)?;
    let combo: Vec<f64> = probe
        .x1
        .iter()
        .zip(&probe.x2)
        .map(|(u, v)| probe.alpha * u + probe.beta * v)
        .collect();
    let lhs = q.base.project(&combo)?;
    let p1 = q.base.project(&probe.x1)?;
    let p2 = q.base.project(&probe.x2)?;
    let rhs: Vec<f64> = p1.iter().zip(&p2).map(|(u, v)| a * u + b * v).collect();
    Ok(euclidean(&lhs, &rhs))
}

pub fn check_quasi_linearity_on(q: &QuasiLinearQuotient, probes: &[QuasiLinearProbe]) -> Result<QuasiLinearityReport> {
    let mut max_defect = 0.0f64;
    let mut witness = None;
    let mut skipped = 0;
    for probe in probes {
        match quasi_linearity_defect(q, probe) {
            Ok(d) => {
                if witness.is_none() || d > max_defect {
                    max_defect = d;
                    witness = Some(probe.clone());
                }
            }
            Err(e @ (Error::ExponentUndefined { .. } | Error::InvalidArgument(_))) => return Err(e),
            Err(_) => skipped += 1,
        }
    }
    if witness.is_none() {
        return Err(Error::Precondition(format!(
            "all {} quasi-linearity probes left the domain",
            probes.len()
        )));
    }
    Ok(QuasiLinearityReport {
        max_defect,
        witness,
        n_samples: probes.len(),
        skipped,
    })
}

/// Random probes with coefficients from the declared domain. The first probe
/// always uses `α = β = 1`, the second `α = 1, β = 0`.
pub fn quasi_linearity_probes(q: &QuasiLinearQuotient, n_samples: usize, seed: u64) -> Vec<QuasiLinearProbe> {
    let mut rng = seeded_rng(seed);
    let (lo, hi) = match q.domain {
        CoefficientDomain::NonNegative => (0.0, 2.0),
        _ => (-2.0, 2.0),
    };
    (0..n_samples)
        .map(|i| {
            let x1 = q.base.sample_total(&mut rng);
            let x2 = q.base.sample_total(&mut rng);
            let (alpha, beta) = match i {
                0 => (1.0, 1.0),
                1 => (1.0, 0.0),
                _ => loop {
                    let a: f64 = rng.gen_range(lo..hi);
                    let b: f64 = rng.gen_range(lo..hi);
                    if a != 0.0 || b != 0.0 {
                        break (a, b);
                    }
                },
            };
            QuasiLinearProbe { alpha, beta, x1, x2 }
        })
        .collect()
}

pub fn check_quasi_linearity(q: &QuasiLinearQuotient, n_samples: usize, seed: u64) -> Result<QuasiLinearityReport> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    check_quasi_linearity_on(q, &quasi_linearity_probes(q, n_samples, seed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineCheck {
    pub n_fibers: usize,
    /// Largest `1 − |cos θ|` between chords of sampled fiber triples.
    pub max_defect: f64,
    pub passed: bool,
}

/// Three collinearity tests per sampled fiber.
pub fn check_fibers_in_lines(q: &QuasiLinearQuotient, bases: &[Vec<f64>], seed: u64) -> Result<LineCheck> {
    let mut rng = seeded_rng(seed);
    let mut max_defect = 0.0f64;
    for y in bases {
        for _ in 0..3 {
            let a = q.base.fiber_point(y, &mut rng)?;
            let b = q.base.fiber_point(y, &mut rng)?;
            let c = q.base.fiber_point(y, &mut rng)?;
            let u: Vec<f64> = b.iter().zip(&a).map(|(p, q)| p - q).collect();
            let v: Vec<f64> = c.iter().zip(&a).map(|(p, q)| p - q).collect();
            let nu = u.iter().map(|t| t * t).sum::<f64>().sqrt();
            let nv = v.iter().map(|t| t * t).sum::<f64>().sqrt();
            if nu < DEGENERATE_TOL || nv < DEGENERATE_TOL {
                continue;
            }
            let cos = u.iter().zip(&v).map(|(p, q)| p * q).sum::<f64>() / (nu * nv);
            max_defect = max_defect.max(1.0 - cos.abs());
        }
    }
    Ok(LineCheck {
        n_fibers: bases.len(),
        max_defect,
        passed: max_defect <= 1e-9,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckParams {
    pub n_samples: usize,
    pub tol: f64,
}

impl Default for CheckParams {
    fn default() -> Self {
        Self {
            n_samples: 100,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CombinedSection {
    pub section: Section,
    /// `μ = 1/(α^λ + β^λ)`.
    pub factor: f64,
    pub check: SectionCheck,
}

/// `η = αφ + βψ`, declared against `(1/(α^λ+β^λ))π` and verified there.
pub fn combine_sections(
    q: &QuasiLinearQuotient,
    phi: &Section,
    psi: &Section,
    alpha: f64,
    beta: f64,
    params: CheckParams,
) -> Result<CombinedSection> {
    q.require_owned(&[phi, psi])?;
    if alpha == 0.0 && beta == 0.0 {
        return Err(Error::InvalidArgument("(alpha, beta) must not both vanish".into()));
    }
    let denom = q.power(alpha)? + q.power(beta)?;
    if denom == 0.0 {
        return Err(Error::InvalidArgument("alpha^lambda + beta^lambda vanishes".into()));
    }
    let factor = 1.0 / denom;
    let rescaled: Arc<dyn Quotient> = Arc::new(q.rescaled(factor)?);
    let (f, g) = (phi.map_fn(), psi.map_fn());
    let section = Section::new(
        format!("{alpha}*{} + {beta}*{}", phi.name(), psi.name()),
        rescaled,
        phi.sampler().clone(),
        move |y| {
            let a = f(y)?;
            let b = g(y)?;
            Ok(a.iter().zip(&b).map(|(u, v)| alpha * u + beta * v).collect())
        },
    )?;
    let check = verify_section(&section, params.n_samples, params.tol)?;
    if let Some(w) = &check.witness {
        return Err(Error::QuasiLinearityViolated {
            point: w.clone(),
            residual: check.max_residual,
        });
    }
    Ok(CombinedSection { section, factor, check })
}

#[derive(Debug, Clone)]
pub struct ScaleReport {
    pub section: Section,
    /// `1/α^λ`.
    pub factor: f64,
    pub check: SectionCheck,
    pub original: LipschitzReport,
    pub scaled: LipschitzReport,
    /// Max over informative pairs of |ratio(αφ) − ratio(φ)|.
    pub max_ratio_defect: f64,
    pub estimate_defect: f64,
    pub passed: bool,
}

/// `αφ` as a section of `(1/α^λ)π`, with the intrinsic ratios of `αφ` and `φ`
/// compared pair by pair.
pub fn scale_section(
    q: &QuasiLinearQuotient,
    phi: &Section,
    alpha: f64,
    n_pairs: usize,
    seed: u64,
    params: CheckParams,
) -> Result<ScaleReport> {
    q.require_owned(&[phi])?;
    if alpha == 0.0 {
        return Err(Error::InvalidArgument("alpha must be nonzero".into()));
    }
    let original_check = verify_section(phi, params.n_samples, params.tol)?;
    if let Some(w) = original_check.witness {
        return Err(Error::Precondition(format!("'{}' is not a section at {w:?}", phi.name())));
    }
    let factor = 1.0 / q.power(alpha)?;
    let rescaled: Arc<dyn Quotient> = Arc::new(q.rescaled(factor)?);
    let f = phi.map_fn();
    let section = Section::new(format!("{alpha}*{}", phi.name()), rescaled, phi.sampler().clone(), move |y| {
        Ok(f(y)?.into_iter().map(|v| alpha * v).collect())
    })?;
    let check = verify_section(&section, params.n_samples, params.tol)?;
    if let Some(w) = &check.witness {
        return Err(Error::QuasiLinearityViolated {
            point: w.clone(),
            residual: check.max_residual,
        });
    }
    let pairs = sample_pairs(&phi.sampler().domain, n_pairs, seed);
    let before = pair_ratios(phi, &pairs)?;
    let after = pair_ratios(&section, &pairs)?;
    let mut max_ratio_defect = 0.0f64;
    for (b, a) in before.iter().zip(&after) {
        match (b.ratio(), a.ratio()) {
            (Some(rb), Some(ra)) => max_ratio_defect = max_ratio_defect.max((ra - rb).abs()),
            (None, None) => {}
            _ => max_ratio_defect = f64::INFINITY,
        }
    }
    let original = lipschitz_estimate_on_pairs(phi, &pairs)?;
    let scaled = lipschitz_estimate_on_pairs(&section, &pairs)?;
    let estimate_defect = (scaled.estimate - original.estimate).abs();
    Ok(ScaleReport {
        section,
        factor,
        check,
        passed: estimate_defect <= params.tol && max_ratio_defect <= params.tol,
        original,
        scaled,
        max_ratio_defect,
        estimate_defect,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberScaling {
    pub lhs: f64,
    pub rhs: f64,
    pub defect: f64,
}

/// `|α|·d(π⁻¹(y₁), π⁻¹(y₂))` against `d((α^{-λ}π)⁻¹(y₁), (α^{-λ}π)⁻¹(y₂))`.
pub fn fiber_scaling_check(q: &QuasiLinearQuotient, alpha: f64, y1: &[f64], y2: &[f64]) -> Result<FiberScaling> {
    if alpha == 0.0 {
        return Err(Error::InvalidArgument("alpha must be nonzero".into()));
    }
    let lhs = alpha.abs() * q.base.fiber_to_fiber_distance(y1, y2)?;
    let rescaled = q.rescaled(1.0 / q.power(alpha)?)?;
    let rhs = rescaled.fiber_to_fiber_distance(y1, y2)?;
    Ok(FiberScaling {
        lhs,
        rhs,
        defect: (lhs - rhs).abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevReport {
    /// Lower bound for the optimal constant `c`.
    pub estimate: f64,
    pub witness: (Vec<f64>, Vec<f64>),
    /// Which section realized the witness.
    pub witness_section: String,
    pub n_pairs: usize,
    pub degenerate_pairs: usize,
    pub lower_bound: bool,
}

/// Largest sampled `d(f(y), π⁻¹(z)) / d(π⁻¹(y), π⁻¹(z))` over `f ∈ {φ, ψ}`.
pub fn sobolev_constant_estimate(phi: &Section, psi: &Section, n_pairs: usize, seed: u64) -> Result<SobolevReport> {
    if n_pairs == 0 {
        return Err(Error::InvalidArgument("n_pairs must be at least 1".into()));
    }
    let q = phi.quotient();
    let pairs = sample_pairs(&phi.sampler().domain, n_pairs, seed);
    let mut best: Option<(f64, usize, &str)> = None;
    let mut degenerate = 0;
    for (i, (y, z)) in pairs.iter().enumerate() {
        let denom = q.fiber_to_fiber_distance(y, z)?;
        if denom < DEGENERATE_TOL {
            degenerate += 1;
            continue;
        }
        for f in [phi, psi] {
            let r = q.fiber_distance(&f.evaluate(y)?, z)? / denom;
            if best.map_or(true, |(b, _, _)| r > b) {
                best = Some((r, i, f.name()));
            }
        }
    }
    let (estimate, i, name) = best.ok_or(Error::NoInformativePairs(n_pairs))?;
    Ok(SobolevReport {
        estimate,
        witness: pairs[i].clone(),
        witness_section: name.to_string(),
        n_pairs,
        degenerate_pairs: degenerate,
        lower_bound: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantSource {
    Supplied(f64),
    Estimated { n_pairs: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeibnizReport {
    pub base_point: Vec<f64>,
    pub c: f64,
    pub c_source: String,
    pub lambda: f64,
    pub slope_sum: SlopeEstimate,
    pub slope_phi: SlopeEstimate,
    pub slope_psi: SlopeEstimate,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub satisfied: bool,
}

/// Compares the slope of `φ + ψ` (against `½π`) at `y` with
/// `c / 2^{1/λ} · (slope(φ) + slope(ψ))`. All three slopes share one sample
/// set.
pub fn leibniz_bound_check(
    q: &QuasiLinearQuotient,
    phi: &Section,
    psi: &Section,
    y: &[f64],
    c: ConstantSource,
    slope: &SlopeParams,
    params: CheckParams,
) -> Result<LeibnizReport> {
    if !q.fibers_in_lines {
        return Err(Error::Precondition("fibers are not declared to lie in straight lines".into()));
    }
    let (c, c_source) = match c {
        ConstantSource::Supplied(c) => (c, "supplied".to_string()),
        ConstantSource::Estimated { n_pairs, seed } => (
            sobolev_constant_estimate(phi, psi, n_pairs, seed)?.estimate,
            "estimated (lower bound)".to_string(),
        ),
    };
    let eta = combine_sections(q, phi, psi, 1.0, 1.0, params)?;
    let slope_sum = intrinsic_slope(&eta.section, y, slope)?;
    let slope_phi = intrinsic_slope(phi, y, slope)?;
    let slope_psi = intrinsic_slope(psi, y, slope)?;
    let lhs = slope_sum.extrapolated;
    let rhs = c / 2f64.powf(1.0 / q.lambda) * (slope_phi.extrapolated + slope_psi.extrapolated);
    Ok(LeibnizReport {
        base_point: y.to_vec(),
        c,
        c_source,
        lambda: q.lambda,
        slope_sum,
        slope_phi,
        slope_psi,
        satisfied: lhs <= rhs + params.tol,
        lhs,
        rhs,
        tolerance: params.tol,
    })
}

#[derive(Debug, Clone)]
pub struct SumReport {
    pub section: Section,
    pub quasi_linearity: QuasiLinearityReport,
    pub lines: LineCheck,
    pub check: SectionCheck,
    pub lipschitz: LipschitzReport,
}

/// `φ + ψ` as a section of `½π`, after checking the weak-linearity condition
/// and the straight-line fibers on samples.
pub fn sum_sections(
    q: &QuasiLinearQuotient,
    phi: &Section,
    psi: &Section,
    n_pairs: usize,
    seed: u64,
    params: CheckParams,
) -> Result<SumReport> {
    q.require_owned(&[phi, psi])?;
    let quasi_linearity = check_quasi_linearity(q, params.n_samples, seed)?;
    if quasi_linearity.max_defect > params.tol {
        let w = quasi_linearity.witness.expect("report has a witness");
        let mut point = w.x1;
        point.extend(w.x2);
        return Err(Error::QuasiLinearityViolated {
            point,
            residual: quasi_linearity.max_defect,
        });
    }
    if !q.fibers_in_lines {
        return Err(Error::Precondition("fibers are not declared to lie in straight lines".into()));
    }
    let lines = check_fibers_in_lines(q, &phi.sample_points(10), seed)?;
    if !lines.passed {
        return Err(Error::Precondition(format!(
            "declared straight-line fibers fail the spot-check (defect {:e})",
            lines.max_defect
        )));
    }
    let eta = combine_sections(q, phi, psi, 1.0, 1.0, params)?;
    let pairs = sample_pairs(&phi.sampler().domain, n_pairs, seed);
    let lipschitz = lipschitz_estimate_on_pairs(&eta.section, &pairs)?;
    Ok(SumReport {
        section: eta.section,
        quasi_linearity,
        lines,
        check: eta.check,
        lipschitz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{LinearQuotient, PowerQuotient};

    fn probe(alpha: f64, beta: f64, x1: f64, x2: f64) -> QuasiLinearProbe {
        QuasiLinearProbe {
            alpha,
            beta,
            x1: vec![x1],
            x2: vec![x2],
        }
    }

    #[test]
    fn cube_map_is_not_additive() {
        let q = QuasiLinearQuotient::new(Arc::new(PowerQuotient { power: 3.0 }), 3.0).unwrap();
        let r = check_quasi_linearity_on(&q, &[probe(1.0, 1.0, 1.0, 1.0)]).unwrap();
        assert!((r.max_defect - 6.0).abs() < 1e-12);
    }

    #[test]
    fn negative_coefficient_needs_odd_exponent() {
        let base: Arc<dyn Quotient> = Arc::new(LinearQuotient::first_coordinate(2));
        let q = QuasiLinearQuotient::new(Arc::clone(&base), 1.5)
            .unwrap()
            .with_domain(CoefficientDomain::Real);
        assert!(matches!(q.power(-2.0), Err(Error::ExponentUndefined { .. })));
        let q = q.with_domain(CoefficientDomain::RealSignedPower);
        assert!((q.power(-4.0).unwrap() + 8.0).abs() < 1e-12);
        let q = QuasiLinearQuotient::new(base, 3.0).unwrap().with_domain(CoefficientDomain::Real);
        assert_eq!(q.power(-2.0).unwrap(), -8.0);
    }

    #[test]
    fn non_negative_domain_rejects_negative_alpha() {
        let base: Arc<dyn Quotient> = Arc::new(LinearQuotient::first_coordinate(2));
        let q = QuasiLinearQuotient::new(base, 1.0).unwrap();
        assert!(q.power(-1.0).is_err());
    }

    #[test]
    fn rescaled_fibers_are_parent_fibers_at_scaled_base() {
        let base: Arc<dyn Quotient> = Arc::new(LinearQuotient::first_coordinate(2));
        let r = RescaledQuotient::new(Arc::clone(&base), 0.5).unwrap();
        // (½π)⁻¹(1) = π⁻¹(2) = {x₁ = 2}
        assert_eq!(r.fiber_distance(&[0.0, 3.0], &[1.0]).unwrap(), 2.0);
        assert_eq!(r.project(&[4.0, 1.0]).unwrap(), vec![2.0]);
        assert!(RescaledQuotient::new(base, 0.0).is_err());
    }

    #[test]
    fn zero_coefficients_rejected() {
        let base: Arc<dyn Quotient> = Arc::new(LinearQuotient::first_coordinate(1));
        let q = QuasiLinearQuotient::new(base, 1.0).unwrap();
        assert!(check_quasi_linearity_on(&q, &[probe(0.0, 0.0, 1.0, 1.0)]).is_err());
    }
}
