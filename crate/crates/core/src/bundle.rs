//! Direct sums of line bundles `O(d_1) ⊕ … ⊕ O(d_r)` over the projective
//! line, covered by the closed unit disks of the charts `z` and `w = 1/z`.
//!
//! A section of `O(d)` is a polynomial of degree `≤ d` in the `z` chart,
//! stored in the monomial basis `1, z, …, z^d`. In the `w` chart the same
//! section reads `w^d p(1/w)`, so the monomial row becomes the reversed row
//! `(w^d, …, w, 1)`.

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{CMatrix, ToleranceSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chart {
    Z,
    W,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub chart: Chart,
    pub coord: Complex64,
}

impl ChartPoint {
    pub fn z(coord: Complex64) -> Self {
        ChartPoint {
            chart: Chart::Z,
            coord,
        }
    }

    pub fn w(coord: Complex64) -> Self {
        ChartPoint {
            chart: Chart::W,
            coord,
        }
    }

    pub fn z_re(x: f64) -> Self {
        Self::z(Complex64::new(x, 0.0))
    }

    pub fn infinity() -> Self {
        Self::w(Complex64::new(0.0, 0.0))
    }

    /// The same point expressed in the other chart, if it is not that chart's
    /// excluded point.
    pub fn switch_chart(&self) -> Option<ChartPoint> {
        if self.coord.norm() == 0.0 {
            return None;
        }
        let other = match self.chart {
            Chart::Z => Chart::W,
            Chart::W => Chart::Z,
        };
        Some(ChartPoint {
            chart: other,
            coord: self.coord.inv(),
        })
    }

    pub fn is_finite(&self) -> bool {
        self.coord.re.is_finite() && self.coord.im.is_finite()
    }
}

impl fmt::Display for ChartPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:?}, {}{:+}i)",
            self.chart, self.coord.re, self.coord.im
        )
    }
}

/// Registered non-Fubini–Study weights. Each is given by its two chart
/// functions; the `w` chart function satisfies `ã(w) = |w|^{2d} a(1/w)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CustomWeight {
    /// `a(z) = factor·(1 + stretch·|z|²)^{-d}`, `ã(w) = factor·(stretch + |w|²)^{-d}`.
    StretchedFubiniStudy {
        stretch: f64,
        #[serde(default = "one")]
        factor: f64,
    },
    /// `a(z) = (1 + |z|⁴)^{-d/2}` on both charts. Its curvature vanishes at
    /// `z = 0` and `z = ∞`.
    Quartic,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum MetricWeight {
    /// `a(z) = (1 + |z|²)^{-d}` on both charts.
    #[default]
    FubiniStudy,
    Custom(CustomWeight),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WeightRepr {
    Named(String),
    Custom { custom: CustomWeight },
}

impl Serialize for MetricWeight {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MetricWeight::FubiniStudy => WeightRepr::Named("fubini-study".into()).serialize(s),
            MetricWeight::Custom(c) => WeightRepr::Custom { custom: *c }.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for MetricWeight {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match WeightRepr::deserialize(d)? {
            WeightRepr::Named(name) if name == "fubini-study" => Ok(MetricWeight::FubiniStudy),
            WeightRepr::Named(name) => Err(serde::de::Error::custom(format!(
                "unknown weight `{name}` (expected \"fubini-study\" or {{\"custom\": …}})"
            ))),
            WeightRepr::Custom { custom } => Ok(MetricWeight::Custom(custom)),
        }
    }
}

impl MetricWeight {
    /// Weight of a degree-`d` summand at a chart point.
    pub fn value(&self, degree: usize, x: &ChartPoint) -> f64 {
        let d = degree as i32;
        let r2 = x.coord.norm_sqr();
        match *self {
            MetricWeight::FubiniStudy => (1.0 + r2).powi(-d),
            MetricWeight::Custom(CustomWeight::StretchedFubiniStudy { stretch, factor }) => {
                match x.chart {
                    Chart::Z => factor * (1.0 + stretch * r2).powi(-d),
                    Chart::W => factor * (stretch + r2).powi(-d),
                }
            }
            MetricWeight::Custom(CustomWeight::Quartic) => {
                (1.0 + r2 * r2).powf(-0.5 * degree as f64)
            }
        }
    }

    /// Curvature density `-∂∂̄ log a` in the coordinate of the chart.
    pub fn curvature_density(&self, degree: usize, x: &ChartPoint) -> f64 {
        let d = degree as f64;
        let r2 = x.coord.norm_sqr();
        match *self {
            MetricWeight::FubiniStudy => d / (1.0 + r2).powi(2),
            MetricWeight::Custom(CustomWeight::StretchedFubiniStudy { stretch, .. }) => {
                match x.chart {
                    Chart::Z => d * stretch / (1.0 + stretch * r2).powi(2),
                    Chart::W => d * stretch / (stretch + r2).powi(2),
                }
            }
            MetricWeight::Custom(CustomWeight::Quartic) => 2.0 * d * r2 / (1.0 + r2 * r2).powi(2),
        }
    }

    fn validate_parameters(&self) -> Result<()> {
        if let MetricWeight::Custom(CustomWeight::StretchedFubiniStudy { stretch, factor }) = *self
        {
            if !(stretch > 0.0 && stretch.is_finite() && factor > 0.0 && factor.is_finite()) {
                return Err(Error::InvalidWeight(format!(
                    "stretched-fubini-study needs positive finite stretch and factor (got {stretch}, {factor})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summand {
    pub degree: usize,
    #[serde(default)]
    pub weight: MetricWeight,
}

/// Immutable bundle model. Construct through [`BundleModel::new`], which
/// validates custom weights.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BundleModel {
    summands: Vec<Summand>,
    #[serde(skip)]
    offsets: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleRepr {
    summands: Vec<Summand>,
}

impl<'de> Deserialize<'de> for BundleModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = BundleRepr::deserialize(d)?;
        BundleModel::new(repr.summands).map_err(serde::de::Error::custom)
    }
}

impl BundleModel {
    pub fn new(summands: Vec<Summand>) -> Result<Self> {
        if summands.is_empty() {
            return Err(Error::InvalidScenario(
                "bundle needs at least one summand".into(),
            ));
        }
        let mut offsets = Vec::with_capacity(summands.len() + 1);
        let mut acc = 0;
        for s in &summands {
            offsets.push(acc);
            acc += s.degree + 1;
        }
        offsets.push(acc);
        let model = BundleModel { summands, offsets };
        for s in &model.summands {
            s.weight.validate_parameters()?;
        }
        model.validate_weights(&ToleranceSpec::default())?;
        Ok(model)
    }

    /// `O(d)` with the Fubini–Study weight.
    pub fn line(degree: usize) -> Self {
        Self::new(vec![Summand {
            degree,
            weight: MetricWeight::FubiniStudy,
        }])
        .expect("Fubini-Study line bundle is always valid")
    }

    pub fn line_with_weight(degree: usize, weight: MetricWeight) -> Result<Self> {
        Self::new(vec![Summand { degree, weight }])
    }

    /// `O(d_1) ⊕ … ⊕ O(d_r)`, all with Fubini–Study weights.
    pub fn direct_sum(degrees: &[usize]) -> Self {
        Self::new(
            degrees
                .iter()
                .map(|&degree| Summand {
                    degree,
                    weight: MetricWeight::FubiniStudy,
                })
                .collect(),
        )
        .expect("non-empty Fubini-Study sum is valid")
    }

    pub fn summands(&self) -> &[Summand] {
        &self.summands
    }

    pub fn rank(&self) -> usize {
        self.summands.len()
    }

    /// `N = Σ (d_i + 1)`.
    pub fn dim(&self) -> usize {
        self.offsets[self.summands.len()]
    }

    /// Column range of summand `a` in coefficient space.
    pub fn block(&self, a: usize) -> std::ops::Range<usize> {
        self.offsets[a]..self.offsets[a + 1]
    }

    pub fn max_degree(&self) -> usize {
        self.summands.iter().map(|s| s.degree).max().unwrap_or(0)
    }

    pub fn require_line(&self) -> Result<usize> {
        if self.rank() != 1 {
            return Err(Error::RankMismatch { rank: self.rank() });
        }
        Ok(self.summands[0].degree)
    }

    /// Positivity and chart compatibility `ã(w) = |w|^{-2d} a(1/w)` on the overlap.
    pub fn validate_weights(&self, tol: &ToleranceSpec) -> Result<()> {
        let grid = validation_grid(8, 16);
        for s in &self.summands {
            for x in &grid {
                let v = s.weight.value(s.degree, x);
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::InvalidWeight(format!(
                        "weight {v} is not positive at {x}"
                    )));
                }
                if x.chart == Chart::W && x.coord.norm() >= 0.5 {
                    let z = x.switch_chart().expect("nonzero coordinate");
                    let expected =
                        s.weight.value(s.degree, &z) / x.coord.norm_sqr().powi(s.degree as i32);
                    if (v - expected).abs() > tol.residual_tol * v.abs().max(1.0) {
                        return Err(Error::InvalidWeight(format!(
                            "chart compatibility fails at {x}: {v} vs {expected}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `r × N` matrix whose row `a` maps coefficients to the `a`-th component
    /// of `s(x)` in the trivialization of the chart of `x`.
    pub fn evaluation_row(&self, x: &ChartPoint) -> CMatrix {
        let mut e = CMatrix::zeros(self.rank(), self.dim());
        for (a, s) in self.summands.iter().enumerate() {
            let base = self.offsets[a];
            let mut power = Complex64::new(1.0, 0.0);
            for k in 0..=s.degree {
                let col = match x.chart {
                    Chart::Z => base + k,
                    Chart::W => base + s.degree - k,
                };
                e[(a, col)] = power;
                power *= x.coord;
            }
        }
        e
    }

    /// Derivative of [`Self::evaluation_row`] along the chart coordinate.
    fn derivative_row(&self, x: &ChartPoint) -> CMatrix {
        let mut e = CMatrix::zeros(self.rank(), self.dim());
        for (a, s) in self.summands.iter().enumerate() {
            let base = self.offsets[a];
            let mut power = Complex64::new(1.0, 0.0);
            for k in 1..=s.degree {
                let col = match x.chart {
                    Chart::Z => base + k,
                    Chart::W => base + s.degree - k,
                };
                e[(a, col)] = power * k as f64;
                power *= x.coord;
            }
        }
        e
    }

    /// First-order jet rows at `x` (line bundles only).
    pub fn jet_row(&self, x: &ChartPoint) -> Result<JetRow> {
        self.require_line()?;
        Ok(JetRow {
            value_row: self.evaluation_row(x),
            derivative_row: self.derivative_row(x),
        })
    }

    pub fn weight_at(&self, x: &ChartPoint) -> Vec<f64> {
        self.summands
            .iter()
            .map(|s| s.weight.value(s.degree, x))
            .collect()
    }

    /// Curvature densities of the summand weights at `x`.
    pub fn weight_curvature_at(&self, x: &ChartPoint) -> Vec<f64> {
        self.summands
            .iter()
            .map(|s| s.weight.curvature_density(s.degree, x))
            .collect()
    }

    pub fn zero_section(&self) -> Section {
        Section {
            coeffs: DVector::zeros(self.dim()),
        }
    }
}

/// `value_row` and `derivative_row` are `1 × N`.
#[derive(Clone, Debug)]
pub struct JetRow {
    pub value_row: CMatrix,
    pub derivative_row: CMatrix,
}

/// A global section, stored as concatenated monomial coefficient blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub coeffs: DVector<Complex64>,
}

impl Section {
    pub fn new(model: &BundleModel, coeffs: DVector<Complex64>) -> Result<Self> {
        if coeffs.len() != model.dim() {
            return Err(Error::DimensionMismatch(format!(
                "section has {} coefficients, model dimension is {}",
                coeffs.len(),
                model.dim()
            )));
        }
        Ok(Section { coeffs })
    }

    /// The monomial `z^j` in summand `a`.
    pub fn monomial(model: &BundleModel, a: usize, j: usize) -> Self {
        let mut coeffs = DVector::zeros(model.dim());
        coeffs[model.block(a).start + j] = Complex64::new(1.0, 0.0);
        Section { coeffs }
    }

    /// `s(x)` as an `r`-vector in the trivialization of the chart of `x`.
    pub fn evaluate(&self, model: &BundleModel, x: &ChartPoint) -> DVector<Complex64> {
        model.evaluation_row(x) * &self.coeffs
    }
}

/// Product grid over both charts: centers, then `n_radii` radii in `(0, 1]`
/// times `n_angles` equally spaced angles, chart `Z` first, radius-major.
/// Points of the `W` chart on the unit circle duplicate points of the `Z`
/// chart (the angle set is closed under conjugation) and are dropped.
pub fn validation_grid(n_radii: usize, n_angles: usize) -> Vec<ChartPoint> {
    let mut points = Vec::with_capacity(2 + 2 * n_radii * n_angles);
    for chart in [Chart::Z, Chart::W] {
        points.push(ChartPoint {
            chart,
            coord: Complex64::new(0.0, 0.0),
        });
        for k in 1..=n_radii {
            if chart == Chart::W && k == n_radii {
                continue;
            }
            let radius = k as f64 / n_radii as f64;
            for j in 0..n_angles {
                let angle = std::f64::consts::TAU * j as f64 / n_angles as f64;
                points.push(ChartPoint {
                    chart,
                    coord: Complex64::from_polar(radius, angle),
                });
            }
        }
    }
    points
}

/// Grid parameters for [`validation_grid`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_radii: usize,
    pub n_angles: usize,
}

impl GridSpec {
    pub fn new(n_radii: usize, n_angles: usize) -> Result<Self> {
        if n_radii == 0 || n_angles == 0 {
            return Err(Error::InvalidScenario(
                "grid needs n_radii, n_angles >= 1".into(),
            ));
        }
        Ok(GridSpec { n_radii, n_angles })
    }

    /// A grid fine enough to resolve every coefficient of a degree-`d` model.
    pub fn for_degree(d: usize) -> Self {
        GridSpec {
            n_radii: (d + 1).max(4),
            n_angles: (2 * d + 2).max(8),
        }
    }

    pub fn points(&self) -> Vec<ChartPoint> {
        validation_grid(self.n_radii, self.n_angles)
    }

    /// Spacing used for local refinement around a grid point.
    pub fn spacing(&self) -> f64 {
        (1.0 / self.n_radii as f64).min(std::f64::consts::TAU / self.n_angles as f64)
    }
}

/// A `5×5` patch of points around `center` with half-width `spacing`,
/// clipped to the closed unit disk of the chart.
pub fn refinement_patch(center: &ChartPoint, spacing: f64) -> Vec<ChartPoint> {
    let mut out = Vec::with_capacity(25);
    for i in -2..=2 {
        for j in -2..=2 {
            let offset = Complex64::new(i as f64, j as f64) * (spacing / 2.0);
            let coord = center.coord + offset;
            if coord.norm() <= 1.0 {
                out.push(ChartPoint {
                    chart: center.chart,
                    coord,
                });
            }
        }
    }
    out
}
