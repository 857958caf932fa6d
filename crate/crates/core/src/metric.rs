//! Quotient maps, sections, and sample-based estimators for intrinsic
//! Lipschitz constants and intrinsic slopes.
//!
//! Nothing here knows about group structure. A [`Quotient`] supplies the
//! projection, the distance on the total space and a solver for the distance
//! from a point to a fiber; a [`Section`] supplies a map from base points into
//! the total space. Every estimator works on a finite sample and therefore
//! reports a lower bound together with the pair (or point) that realizes it.

use std::fmt;
use std::sync::Arc;

use rand::distributions::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fiber distances below this are treated as touching fibers and excluded
/// from ratios.
pub const DEGENERATE_TOL: f64 = 1e-12;

pub type Rng64 = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn sup_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub(crate) fn check_finite(x: &[f64]) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(x.to_vec()))
    }
}

/// A uniform point of the closed Euclidean ball of radius `r` around `center`.
pub fn sample_euclidean_ball<R: Rng + ?Sized>(center: &[f64], r: f64, rng: &mut R) -> Vec<f64> {
    let d = center.len();
    loop {
        let u: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if u.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            return center.iter().zip(&u).map(|(c, v)| c + r * v).collect();
        }
    }
}

/// A quotient map `π: X → Y` with the metric data the estimators need.
pub trait Quotient: Send + Sync {
    fn name(&self) -> String;
    fn total_dim(&self) -> usize;
    fn base_dim(&self) -> usize;

    fn project(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Distance on the total space. May be a quasi-metric; see
    /// [`metric_axiom_audit`].
    fn distance(&self, x: &[f64], y: &[f64]) -> f64;

    /// `d(x, π⁻¹(y))`.
    fn fiber_distance(&self, x: &[f64], y: &[f64]) -> Result<f64>;

    /// `d(π⁻¹(y₁), π⁻¹(y₂))`, where a closed form is known.
    fn fiber_to_fiber_distance(&self, _y1: &[f64], _y2: &[f64]) -> Result<f64> {
        Err(Error::Unsupported("fiber-to-fiber distance"))
    }

    /// Metric on the base used to define balls for the intrinsic slope.
    fn base_distance(&self, y1: &[f64], y2: &[f64]) -> f64 {
        euclidean(y1, y2)
    }

    /// A point `z` with `base_distance(y, z) <= r`.
    fn sample_base_ball(&self, y: &[f64], r: f64, rng: &mut Rng64) -> Vec<f64> {
        sample_euclidean_ball(y, r, rng)
    }

    /// A point of the total space, used by audits.
    fn sample_total(&self, rng: &mut Rng64) -> Vec<f64>;

    /// A point of the fiber `π⁻¹(y)`, used by geometric spot-checks.
    fn fiber_point(&self, _y: &[f64], _rng: &mut Rng64) -> Result<Vec<f64>> {
        Err(Error::Unsupported("fiber sampling"))
    }

    /// Exponent of the weak-linearity condition, when the instance has one.
    fn scaling(&self) -> Option<f64> {
        None
    }
}

impl fmt::Debug for dyn Quotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Quotient")
            .field("name", &self.name())
            .field("total_dim", &self.total_dim())
            .field("base_dim", &self.base_dim())
            .finish()
    }
}

/// Axis-aligned box of base points. A side may be degenerate (`lower == upper`)
/// to pin a coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "domain bounds must be finite with lower <= upper, got {lower:?} / {upper:?}"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        y.len() == self.dim()
            && y
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    /// Uniform point of the open box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| {
                let t: f64 = Open01.sample(rng);
                l + (u - l) * t
            })
            .collect()
    }

    /// Product grid including the corners, truncated to `n` points.
    pub fn grid(&self, n: usize) -> Vec<Vec<f64>> {
        let d = self.dim();
        if n == 0 {
            return Vec::new();
        }
        let mut per_axis = (n as f64).powf(1.0 / d as f64).ceil() as usize;
        while per_axis.pow(d as u32) < n {
            per_axis += 1;
        }
        let axis = |k: usize, i: usize| {
            if per_axis == 1 {
                0.5 * (self.lower[k] + self.upper[k])
            } else {
                self.lower[k] + (self.upper[k] - self.lower[k]) * i as f64 / (per_axis - 1) as f64
            }
        };
        (0..n)
            .map(|mut idx| {
                (0..d)
                    .map(|k| {
                        let i = idx % per_axis;
                        idx /= per_axis;
                        axis(k, i)
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum SampleMode {
    Grid,
    Random { seed: u64 },
}

/// Generator of base points for a section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sampler {
    pub domain: BoxDomain,
    pub mode: SampleMode,
}

impl Sampler {
    pub fn grid(domain: BoxDomain) -> Self {
        Self {
            domain,
            mode: SampleMode::Grid,
        }
    }

    pub fn random(domain: BoxDomain, seed: u64) -> Self {
        Self {
            domain,
            mode: SampleMode::Random { seed },
        }
    }

    pub fn points(&self, n: usize) -> Vec<Vec<f64>> {
        match self.mode {
            SampleMode::Grid => self.domain.grid(n),
            SampleMode::Random { seed } => {
                let mut rng = seeded_rng(seed);
                (0..n).map(|_| self.domain.sample(&mut rng)).collect()
            }
        }
    }
}

pub type SectionFn = dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync;

/// A map `φ: Y → X` declared against a quotient `π`.
#[derive(Clone)]
pub struct Section {
    name: String,
    quotient: Arc<dyn Quotient>,
    map: Arc<SectionFn>,
    sampler: Sampler,
}

impl fmt::Debug for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Section")
            .field("name", &self.name)
            .field("quotient", &self.quotient.name())
            .field("sampler", &self.sampler)
            .finish()
    }
}

impl Section {
    pub fn new<F>(name: impl Into<String>, quotient: Arc<dyn Quotient>, sampler: Sampler, map: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        Self::from_arc(name, quotient, sampler, Arc::new(map))
    }

    pub fn from_arc(
        name: impl Into<String>,
        quotient: Arc<dyn Quotient>,
        sampler: Sampler,
        map: Arc<SectionFn>,
    ) -> Result<Self> {
        if sampler.domain.dim() != quotient.base_dim() {
            return Err(Error::DimensionMismatch {
                expected: quotient.base_dim(),
                got: sampler.domain.dim(),
            });
        }
        Ok(Self {
            name: name.into(),
            quotient,
            map,
            sampler,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn quotient(&self) -> &Arc<dyn Quotient> {
        &self.quotient
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }

    pub fn map_fn(&self) -> Arc<SectionFn> {
        Arc::clone(&self.map)
    }

    /// Same map, declared against another quotient.
    pub fn with_quotient(&self, quotient: Arc<dyn Quotient>) -> Result<Self> {
        Self::from_arc(self.name.clone(), quotient, self.sampler.clone(), Arc::clone(&self.map))
    }

    pub fn with_sampler(mut self, sampler: Sampler) -> Result<Self> {
        if sampler.domain.dim() != self.quotient.base_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.quotient.base_dim(),
                got: sampler.domain.dim(),
            });
        }
        self.sampler = sampler;
        Ok(self)
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn evaluate(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.quotient.base_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.quotient.base_dim(),
                got: y.len(),
            });
        }
        let x = (self.map)(y).map_err(|e| Error::Evaluation {
            what: self.name.clone(),
            point: y.to_vec(),
            reason: e.to_string(),
        })?;
        if x.len() != self.quotient.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.quotient.total_dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation {
                what: self.name.clone(),
                point: y.to_vec(),
                reason: "non-finite image".into(),
            });
        }
        Ok(x)
    }

    pub fn sample_points(&self, n: usize) -> Vec<Vec<f64>> {
        self.sampler.points(n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionCheck {
    pub passed: bool,
    pub n_samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    /// First sampled base point whose image does not project back onto it.
    pub witness: Option<Vec<f64>>,
}

/// Checks `π(φ(y)) = y` in the sup norm on the section's own sample set.
pub fn verify_section(section: &Section, n_samples: usize, tol: f64) -> Result<SectionCheck> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let q = section.quotient();
    let points = section.sample_points(n_samples);
    let residuals: Vec<Result<f64>> = points
        .par_iter()
        .map(|y| {
            let x = section.evaluate(y)?;
            let back = q.project(&x).map_err(|e| Error::Evaluation {
                what: q.name(),
                point: x.clone(),
                reason: e.to_string(),
            })?;
            Ok(sup_norm_diff(&back, y))
        })
        .collect();
    let mut max_residual = 0.0f64;
    let mut witness = None;
    for (y, r) in points.into_iter().zip(residuals) {
        let r = r?;
        if !(r <= tol) && witness.is_none() {
            witness = Some(y);
        }
        max_residual = max_residual.max(r);
    }
    Ok(SectionCheck {
        passed: witness.is_none(),
        n_samples,
        max_residual,
        tolerance: tol,
        witness,
    })
}

/// Numerator and denominator of the intrinsic ratio for an ordered pair:
/// `d(φ(y₁), φ(y₂))` over `d(φ(y₁), π⁻¹(y₂))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRatio {
    pub numerator: f64,
    pub denominator: f64,
}

impl PairRatio {
    pub fn ratio(&self) -> Option<f64> {
        (self.denominator >= DEGENERATE_TOL).then(|| self.numerator / self.denominator)
    }
}

pub fn pair_ratio(section: &Section, y1: &[f64], y2: &[f64]) -> Result<PairRatio> {
    let q = section.quotient();
    let x1 = section.evaluate(y1)?;
    let x2 = section.evaluate(y2)?;
    Ok(PairRatio {
        numerator: q.distance(&x1, &x2),
        denominator: q.fiber_distance(&x1, y2)?,
    })
}

/// Ratios for explicit pairs, in input order. Order is preserved regardless
/// of how many rayon workers run.
pub fn pair_ratios(section: &Section, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<Vec<PairRatio>> {
    pairs
        .par_iter()
        .map(|(a, b)| pair_ratio(section, a, b))
        .collect()
}

pub fn sample_pairs(domain: &BoxDomain, n_pairs: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = seeded_rng(seed);
    (0..n_pairs)
        .map(|_| (domain.sample(&mut rng), domain.sample(&mut rng)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    /// Largest realized ratio. A lower bound for the true constant.
    pub estimate: f64,
    pub witness: (Vec<f64>, Vec<f64>),
    pub n_pairs: usize,
    pub degenerate_pairs: usize,
    pub tolerance: f64,
    pub lower_bound: bool,
    /// Triangle defect of the distance, when an audit was attached.
    pub triangle_defect: Option<f64>,
}

impl LipschitzReport {
    pub fn from_pair_ratios(pairs: &[(Vec<f64>, Vec<f64>)], ratios: &[PairRatio]) -> Result<Self> {
        let mut best: Option<(usize, f64)> = None;
        let mut degenerate = 0;
        for (i, pr) in ratios.iter().enumerate() {
            match pr.ratio() {
                None => degenerate += 1,
                Some(r) => {
                    // strict comparison keeps the earliest index on ties
                    if best.map_or(true, |(_, b)| r > b) {
                        best = Some((i, r));
                    }
                }
            }
        }
        let (i, estimate) = best.ok_or(Error::NoInformativePairs(pairs.len()))?;
        Ok(Self {
            estimate,
            witness: pairs[i].clone(),
            n_pairs: pairs.len(),
            degenerate_pairs: degenerate,
            tolerance: DEGENERATE_TOL,
            lower_bound: true,
            triangle_defect: None,
        })
    }

    pub fn with_audit(mut self, audit: &MetricAudit) -> Self {
        self.triangle_defect = Some(audit.max_triangle_defect);
        self
    }
}

pub fn lipschitz_estimate_on_pairs(section: &Section, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<LipschitzReport> {
    let ratios = pair_ratios(section, pairs)?;
    LipschitzReport::from_pair_ratios(pairs, &ratios)
}

/// Sampled lower bound for the intrinsic Lipschitz constant over `n_pairs`
/// random ordered pairs of the section's domain.
pub fn lipschitz_estimate(section: &Section, n_pairs: usize, seed: u64) -> Result<LipschitzReport> {
    if n_pairs == 0 {
        return Err(Error::InvalidArgument("n_pairs must be at least 1".into()));
    }
    let pairs = sample_pairs(&section.sampler().domain, n_pairs, seed);
    lipschitz_estimate_on_pairs(section, &pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeParams {
    pub r0: f64,
    pub n_levels: usize,
    pub samples_per_level: usize,
    pub seed: u64,
}

impl Default for SlopeParams {
    fn default() -> Self {
        Self {
            r0: 0.5,
            n_levels: 8,
            samples_per_level: 64,
            seed: 0,
        }
    }
}

/// Sup of intrinsic ratios over punctured balls of dyadically shrinking
/// radii. The finest level stands in for the limsup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeEstimate {
    pub base_point: Vec<f64>,
    pub radii: Vec<f64>,
    pub sup_ratios: Vec<f64>,
    pub extrapolated: f64,
    pub definition: String,
}

pub const SLOPE_DEFINITION: &str =
    "sup of d(phi(y),phi(z))/d(phi(y),pi^-1(z)) over sampled z in B(y, r0*2^-k)\\{y}; finest level reported";

fn slope_samples(section: &Section, y: &[f64], params: &SlopeParams) -> Result<Vec<(f64, Vec<Vec<f64>>)>> {
    let q = section.quotient();
    let domain = &section.sampler().domain;
    let mut rng = seeded_rng(params.seed);
    let mut levels = Vec::with_capacity(params.n_levels);
    for k in 0..params.n_levels {
        let r = params.r0 * 0.5f64.powi(k as i32);
        let mut zs = Vec::with_capacity(params.samples_per_level);
        let mut attempts = 0;
        while zs.len() < params.samples_per_level && attempts < 50 * params.samples_per_level {
            attempts += 1;
            let z = q.sample_base_ball(y, r, &mut rng);
            if domain.contains(&z) && q.base_distance(y, &z) > 0.0 {
                zs.push(z);
            }
        }
        levels.push((r, zs));
    }
    Ok(levels)
}

pub fn intrinsic_slope(section: &Section, y: &[f64], params: &SlopeParams) -> Result<SlopeEstimate> {
    if params.n_levels < 2 {
        return Err(Error::InvalidArgument("n_levels must be at least 2".into()));
    }
    if !(params.r0 > 0.0) {
        return Err(Error::InvalidArgument("r0 must be positive".into()));
    }
    if !section.sampler().domain.contains(y) {
        return Err(Error::OutsideDomain {
            what: "section domain",
            point: y.to_vec(),
        });
    }
    let levels = slope_samples(section, y, params)?;
    let mut radii = Vec::with_capacity(levels.len());
    let mut sups = Vec::with_capacity(levels.len());
    for (r, zs) in levels {
        let ratios: Vec<PairRatio> = zs
            .par_iter()
            .map(|z| pair_ratio(section, y, z))
            .collect::<Result<_>>()?;
        let sup = ratios
            .iter()
            .filter_map(PairRatio::ratio)
            .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))))
            .ok_or(Error::EmptyBall { radius: r })?;
        radii.push(r);
        sups.push(sup);
    }
    Ok(SlopeEstimate {
        base_point: y.to_vec(),
        extrapolated: *sups.last().expect("n_levels >= 2"),
        radii,
        sup_ratios: sups,
        definition: SLOPE_DEFINITION.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricAudit {
    /// Max of `d(x,z) - d(x,y) - d(y,z)`; positive means the triangle
    /// inequality fails somewhere on the sample.
    pub max_triangle_defect: f64,
    pub max_asymmetry: f64,
    pub n_triples: usize,
    pub witness: Option<[Vec<f64>; 3]>,
}

pub fn metric_axiom_audit(quotient: &dyn Quotient, n_triples: usize, seed: u64) -> Result<MetricAudit> {
    if n_triples == 0 {
        return Err(Error::InvalidArgument("n_triples must be at least 1".into()));
    }
    let mut rng = seeded_rng(seed);
    let triples: Vec<[Vec<f64>; 3]> = (0..n_triples)
        .map(|_| {
            [
                quotient.sample_total(&mut rng),
                quotient.sample_total(&mut rng),
                quotient.sample_total(&mut rng),
            ]
        })
        .collect();
    let values: Vec<(f64, f64)> = triples
        .par_iter()
        .map(|[x, y, z]| {
            let tri = quotient.distance(x, z) - quotient.distance(x, y) - quotient.distance(y, z);
            let asym = (quotient.distance(x, y) - quotient.distance(y, x)).abs();
            (tri, asym)
        })
        .collect();
    let mut max_tri = f64::NEG_INFINITY;
    let mut max_asym = 0.0f64;
    let mut witness = None;
    for (t, (tri, asym)) in triples.iter().zip(values) {
        if tri > max_tri {
            max_tri = tri;
            witness = Some(t.clone());
        }
        max_asym = max_asym.max(asym);
    }
    Ok(MetricAudit {
        max_triangle_defect: max_tri,
        max_asymmetry: max_asym,
        n_triples,
        witness,
    })
}
