//! Box-dimension fits from ε-ladders or box counts, Minkowski content
//! proxies, exact theoretical dimensions per bifurcation scenario, and the
//! finite-stability check.

use crate::fit::weighted_line_fit;
use crate::neighborhood::{BoxCountSample, EpsAreaSample};
use crate::{Error, Result};
use num_rational::Ratio;
use serde::Serialize;

/// Box-dimension estimate fitted from an ε-ladder.
///
/// `dim_lower`/`dim_upper` are fits over the small-ε and large-ε halves of
/// the ladder, ordered so that `dim_lower <= dim_upper`; they are finite-data
/// proxies for the lower and upper box dimension, which cannot be computed
/// from finitely many scales. Contents are min/max over the ladder of
/// `|A_eps| / eps^(2 - dim)`, proxies for the lower and upper Minkowski
/// content at `d = dim`.
#[derive(Debug, Clone, Serialize)]
pub struct DimensionEstimate {
    pub dim: f64,
    pub dim_lower: f64,
    pub dim_upper: f64,
    pub content_lower: Option<f64>,
    pub content_upper: Option<f64>,
    pub r2: f64,
    pub slope_stderr: f64,
    #[serde(skip)]
    pub ladder: Vec<EpsAreaSample>,
}

impl DimensionEstimate {
    /// Numeric nondegeneracy proxy: the smallest ladder content exceeds
    /// one thousandth of the median content.
    pub fn content_nondegenerate(&self) -> bool {
        let (Some(lo), Some(_)) = (self.content_lower, self.content_upper) else {
            return false;
        };
        let mut contents: Vec<f64> = self
            .ladder
            .iter()
            .map(|s| s.area / s.eps.powf(2.0 - self.dim))
            .collect();
        contents.sort_by(f64::total_cmp);
        let median = contents[contents.len() / 2];
        lo > 1e-3 * median
    }
}

fn clamp_dim(d: f64) -> f64 {
    d.clamp(0.0, 2.0)
}

/// Weighted least squares of `log area` against `log eps`; the dimension is
/// `2 - slope`. Weights are `1/stderr^2` when every rung reports a positive
/// standard error, uniform otherwise.
pub fn fit_box_dimension(ladder: &[EpsAreaSample]) -> Result<DimensionEstimate> {
    if ladder.len() < 5 {
        return Err(Error::TooShort {
            have: ladder.len(),
            need: 5,
        });
    }
    if ladder.iter().any(|s| !(s.area > 0.0)) {
        return Err(Error::InvalidParameter(
            "all ladder areas must be positive".into(),
        ));
    }
    let mut sorted: Vec<EpsAreaSample> = ladder.to_vec();
    sorted.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    if sorted.first().unwrap().eps == sorted.last().unwrap().eps {
        return Err(Error::Degenerate("zero eps spread in ladder".into()));
    }

    let full = fit_dim_of(&sorted)?;
    let n = sorted.len();
    let low_half = &sorted[..n.div_ceil(2)];
    let high_half = &sorted[n / 2..];
    let d_low = fit_dim_of(low_half)?;
    let d_high = fit_dim_of(high_half)?;
    let dim = clamp_dim(full.dim);

    let contents: Vec<f64> = sorted
        .iter()
        .map(|s| s.area / s.eps.powf(2.0 - dim))
        .collect();
    let content_lower = contents.iter().copied().fold(f64::INFINITY, f64::min);
    let content_upper = contents.iter().copied().fold(0.0f64, f64::max);

    Ok(DimensionEstimate {
        dim,
        dim_lower: clamp_dim(d_low.dim.min(d_high.dim)),
        dim_upper: clamp_dim(d_low.dim.max(d_high.dim)),
        content_lower: Some(content_lower),
        content_upper: Some(content_upper),
        r2: full.r2,
        slope_stderr: full.stderr,
        ladder: sorted,
    })
}

struct RawFit {
    dim: f64,
    r2: f64,
    stderr: f64,
}

fn fit_dim_of(ladder: &[EpsAreaSample]) -> Result<RawFit> {
    let x: Vec<f64> = ladder.iter().map(|s| s.eps.ln()).collect();
    let y: Vec<f64> = ladder.iter().map(|s| s.area.ln()).collect();
    let weights: Option<Vec<f64>> = if ladder.iter().all(|s| s.stderr > 0.0) {
        Some(ladder.iter().map(|s| 1.0 / (s.stderr * s.stderr)).collect())
    } else {
        None
    };
    let fit = weighted_line_fit(&x, &y, weights.as_deref())?;
    Ok(RawFit {
        dim: 2.0 - fit.slope,
        r2: fit.r2,
        stderr: fit.slope_stderr,
    })
}

/// Dimension from grid box counts: the slope of `log N(delta)` against
/// `log (1/delta)`. Contents are left unset.
pub fn fit_box_dimension_from_counts(counts: &[BoxCountSample]) -> Result<DimensionEstimate> {
    if counts.len() < 5 {
        return Err(Error::TooShort {
            have: counts.len(),
            need: 5,
        });
    }
    let mut sorted: Vec<BoxCountSample> = counts.to_vec();
    sorted.sort_by(|a, b| a.delta.total_cmp(&b.delta));
    if sorted.first().unwrap().delta == sorted.last().unwrap().delta {
        return Err(Error::Degenerate("zero delta spread".into()));
    }
    let dim_of = |slice: &[BoxCountSample]| -> Result<RawFit> {
        let x: Vec<f64> = slice.iter().map(|s| (1.0 / s.delta).ln()).collect();
        let y: Vec<f64> = slice.iter().map(|s| (s.count as f64).ln()).collect();
        let fit = weighted_line_fit(&x, &y, None)?;
        Ok(RawFit {
            dim: fit.slope,
            r2: fit.r2,
            stderr: fit.slope_stderr,
        })
    };
    let full = dim_of(&sorted)?;
    let n = sorted.len();
    let low = dim_of(&sorted[..n.div_ceil(2)])?;
    let high = dim_of(&sorted[n / 2..])?;
    Ok(DimensionEstimate {
        dim: clamp_dim(full.dim),
        dim_lower: clamp_dim(low.dim.min(high.dim)),
        dim_upper: clamp_dim(low.dim.max(high.dim)),
        content_lower: None,
        content_upper: None,
        r2: full.r2,
        slope_stderr: full.stderr,
        ladder: Vec::new(),
    })
}

/// Bifurcation scenario of a planar system near a nonhyperbolic fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    /// All multipliers off the unit circle; orbits have dimension 0.
    Hyperbolic,
    /// Saddle-node (or transcritical) on the center manifold.
    SaddleNodeCm,
    /// Pitchfork or period-doubling on the center manifold, nondegeneracy
    /// order k.
    PitchforkOrPdCm { k: u32 },
    /// Neimark–Sacker with rational rotation number, radial order alpha.
    NsRational { alpha: u32 },
    /// Neimark–Sacker with irrational rotation number.
    NsIrrational { alpha: u32 },
    /// Spiral trajectory of the continuous rotational flow of order k.
    ContinuousHopfSpiral { k: u32 },
    /// Degenerate Neimark–Sacker (alpha = 5) in the irrational case.
    Chenciner,
}

impl Scenario {
    pub fn label(&self) -> String {
        match self {
            Scenario::Hyperbolic => "hyperbolic".into(),
            Scenario::SaddleNodeCm => "saddle-node-cm".into(),
            Scenario::PitchforkOrPdCm { k } => format!("pitchfork-or-pd-cm(k={k})"),
            Scenario::NsRational { alpha } => format!("ns-rational(alpha={alpha})"),
            Scenario::NsIrrational { alpha } => format!("ns-irrational(alpha={alpha})"),
            Scenario::ContinuousHopfSpiral { k } => format!("continuous-hopf-spiral(k={k})"),
            Scenario::Chenciner => "chenciner".into(),
        }
    }
}

/// Serialize exact rationals as "p/q" strings.
pub mod ratio_serde {
    use num_rational::Ratio;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(r: &Ratio<i64>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn serialize_opt<S: Serializer>(r: &Option<Ratio<i64>>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&r.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn serialize_bounds<S: Serializer>(
        b: &Option<(Ratio<i64>, Ratio<i64>)>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        match b {
            Some((lo, hi)) => s.serialize_some(&(lo.to_string(), hi.to_string())),
            None => s.serialize_none(),
        }
    }
}

/// Exact predicted dimension for a scenario, with envelope bounds where the
/// theory provides them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoreticalDimension {
    pub scenario: Scenario,
    #[serde(serialize_with = "ratio_serde::serialize")]
    pub value: Ratio<i64>,
    #[serde(serialize_with = "ratio_serde::serialize_bounds")]
    pub bounds: Option<(Ratio<i64>, Ratio<i64>)>,
}

impl TheoreticalDimension {
    pub fn value_f64(&self) -> f64 {
        *self.value.numer() as f64 / *self.value.denom() as f64
    }
    pub fn bounds_f64(&self) -> Option<(f64, f64)> {
        self.bounds.map(|(lo, hi)| {
            (
                *lo.numer() as f64 / *lo.denom() as f64,
                *hi.numer() as f64 / *hi.denom() as f64,
            )
        })
    }
}

fn check_alpha(alpha: u32) -> Result<i64> {
    if alpha < 3 || alpha.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be odd and >= 3, got {alpha}"
        )));
    }
    Ok(alpha as i64)
}

/// Exact orbit dimensions: hyperbolic 0; saddle-node 1/2; pitchfork or
/// period-doubling 1 - 1/k; Neimark–Sacker 1 - 1/alpha (rational) or
/// 2(1 - 1/alpha) (irrational), both inside the envelope
/// [1 - 1/alpha, 2(1 - 1/alpha)]; continuous spirals 2(1 - 1/(2k+1));
/// Chenciner 8/5.
pub fn theoretical_dimension(scenario: Scenario) -> Result<TheoreticalDimension> {
    let r = |n: i64, d: i64| Ratio::new(n, d);
    let (value, bounds) = match scenario {
        Scenario::Hyperbolic => (r(0, 1), None),
        Scenario::SaddleNodeCm => (r(1, 2), None),
        Scenario::PitchforkOrPdCm { k } => {
            if k < 2 {
                return Err(Error::InvalidParameter(format!(
                    "nondegeneracy order must be >= 2, got {k}"
                )));
            }
            (r(k as i64 - 1, k as i64), None)
        }
        Scenario::NsRational { alpha } => {
            let a = check_alpha(alpha)?;
            (r(a - 1, a), Some((r(a - 1, a), r(2 * (a - 1), a))))
        }
        Scenario::NsIrrational { alpha } => {
            let a = check_alpha(alpha)?;
            (r(2 * (a - 1), a), Some((r(a - 1, a), r(2 * (a - 1), a))))
        }
        Scenario::ContinuousHopfSpiral { k } => {
            if k < 1 {
                return Err(Error::InvalidParameter("k must be >= 1".into()));
            }
            let a = 2 * k as i64 + 1;
            (r(2 * (a - 1), a), None)
        }
        Scenario::Chenciner => (r(8, 5), Some((r(4, 5), r(8, 5)))),
    };
    Ok(TheoreticalDimension {
        scenario,
        value,
        bounds,
    })
}

/// Result of a finite-stability comparison between the dimension of a union
/// and the maximum dimension of its parts.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FiniteStabilityCheck {
    pub union_dim: f64,
    pub max_part_dim: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Box dimension is finitely stable: the dimension of a finite disjoint
/// union equals the maximum over the parts. Passes when the fitted union
/// dimension is within `tolerance` of the largest part dimension.
pub fn finite_stability_check(
    parts: &[DimensionEstimate],
    union: &DimensionEstimate,
    tolerance: f64,
) -> Result<FiniteStabilityCheck> {
    if parts.len() < 2 {
        return Err(Error::TooShort {
            have: parts.len(),
            need: 2,
        });
    }
    let max_part_dim = parts
        .iter()
        .map(|e| e.dim)
        .fold(f64::NEG_INFINITY, f64::max);
    let pass = (union.dim - max_part_dim).abs() <= tolerance;
    Ok(FiniteStabilityCheck {
        union_dim: union.dim,
        max_part_dim,
        tolerance,
        pass,
    })
}
