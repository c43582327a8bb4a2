//! Rotation-number rationality, resonance gates, and scenario
//! classification with predicted dimension and verdict.

use crate::center_manifold::{CenterManifoldReport, NondegeneracyOrder};
use crate::dimension::{theoretical_dimension, DimensionEstimate, Scenario, TheoreticalDimension};
use crate::normal_forms::PolarNormalForm;
use crate::overlaps::OverlapRegime;
use crate::rational::best_rational;
use crate::{Error, Result};
use serde::Serialize;
use std::f64::consts::TAU;

/// Default denominator bound for rationality detection. Every float is
/// rational, so "irrational" always means "no denominator up to q_max
/// within tol"; both values are reported alongside the verdict.
pub const DEFAULT_Q_MAX: u64 = 10_000;
pub const DEFAULT_RATIONALITY_TOL: f64 = 1e-9;
pub const DEFAULT_RESONANCE_TOL: f64 = 1e-9;
/// Default tolerance when comparing a fitted dimension to its predicted
/// value.
pub const DEFAULT_DIM_TOLERANCE: f64 = 0.12;
/// Angles at or below this are "small": the irrational-like overlap
/// ordering is expected to be visible at accessible scales. For larger
/// irrational angles the ordering evidence is uninformative and the q-th
/// root-map reduction applies instead.
pub const SMALL_ANGLE_MAX: f64 = 0.3;

/// Rationality classification of a rotation angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RotationKind {
    Rational { p: i64, q: u64 },
    Irrational,
}

/// Rotation-number analysis of theta0.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RotationAnalysis {
    pub theta0: f64,
    /// theta0 / (2 pi)
    pub beta: f64,
    pub kind: RotationKind,
    pub q_max: u64,
    pub tol: f64,
    /// e^{i n theta0} != 1 for n = 1..4 within tol.
    pub nonresonant: bool,
}

/// Detect whether `beta = theta0/(2 pi)` is within `tol` of a fraction with
/// denominator at most `q_max`, via continued-fraction convergents.
pub fn rotation_rationality(theta0: f64, q_max: u64, tol: f64) -> Result<RotationAnalysis> {
    if q_max < 2 {
        return Err(Error::InvalidParameter("q_max must be >= 2".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let beta = theta0 / TAU;
    let kind = match best_rational(beta, q_max) {
        Some(r) if r.error <= tol => RotationKind::Rational { p: r.p, q: r.q },
        _ => RotationKind::Irrational,
    };
    Ok(RotationAnalysis {
        theta0,
        beta,
        kind,
        q_max,
        tol,
        nonresonant: nonresonance_check(theta0, DEFAULT_RESONANCE_TOL),
    })
}

/// True iff `min over n = 1..4 of |e^{i n theta0} - 1| > tol`, i.e. theta0
/// avoids the strong resonances that invalidate the normal form.
pub fn nonresonance_check(theta0: f64, tol: f64) -> bool {
    (1..=4).all(|n| {
        let half = n as f64 * theta0 / 2.0;
        2.0 * half.sin().abs() > tol
    })
}

/// Outcome of comparing an estimate to the predicted dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Diagnostic signals disagree; the report refuses to guess.
    Inconclusive,
}

/// Classification report: scenario, exact predicted dimension, evidence and
/// the verdict against a supplied estimate.
#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub scenario: Scenario,
    pub predicted: TheoreticalDimension,
    pub rotation: Option<RotationAnalysis>,
    pub regime: Option<OverlapRegime>,
    pub estimated_dim: Option<f64>,
    pub verdict: Option<Verdict>,
    pub tolerance: f64,
    pub notes: Vec<String>,
}

/// Knobs for [`classify_polar`] and [`classify_restriction`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClassifySettings {
    pub q_max: u64,
    pub rationality_tol: f64,
    pub resonance_tol: f64,
    pub dim_tolerance: f64,
}

impl Default for ClassifySettings {
    fn default() -> Self {
        Self {
            q_max: DEFAULT_Q_MAX,
            rationality_tol: DEFAULT_RATIONALITY_TOL,
            resonance_tol: DEFAULT_RESONANCE_TOL,
            dim_tolerance: DEFAULT_DIM_TOLERANCE,
        }
    }
}

/// Classify a polar normal-form map. Refuses resonant rotation angles (the
/// normal form is invalid there). Overlap-regime evidence, when supplied,
/// must corroborate the rationality detection; contradictions downgrade the
/// verdict to `Inconclusive` except for large irrational angles, where
/// rational-like ordering at accessible scales is expected and the root-map
/// reduction is suggested instead.
pub fn classify_polar(
    map: &PolarNormalForm,
    regime: Option<OverlapRegime>,
    estimate: Option<&DimensionEstimate>,
    settings: &ClassifySettings,
) -> Result<ClassificationReport> {
    if !nonresonance_check(map.theta0(), settings.resonance_tol) {
        return Err(Error::ResonantAngle(format!(
            "theta0 = {} hits e^(i n theta0) = 1 for some n in 1..4; the \
             polar normal form does not apply",
            map.theta0()
        )));
    }
    let rotation = rotation_rationality(map.theta0(), settings.q_max, settings.rationality_tol)?;
    let alpha = map.alpha();
    let scenario = match rotation.kind {
        RotationKind::Rational { .. } => Scenario::NsRational { alpha },
        RotationKind::Irrational if alpha == 5 => Scenario::Chenciner,
        RotationKind::Irrational => Scenario::NsIrrational { alpha },
    };
    let predicted = theoretical_dimension(scenario)?;

    let mut notes = Vec::new();
    let mut conflicting_evidence = false;
    if let Some(reg) = regime {
        match (rotation.kind, reg) {
            (RotationKind::Rational { .. }, OverlapRegime::RationalLike) => {}
            (RotationKind::Irrational, OverlapRegime::IrrationalLike) => {}
            (RotationKind::Rational { p, q }, other) => {
                notes.push(format!(
                    "rotation detected rational {p}/{q} but overlap ordering is {other:?}; \
                     high denominators mimic the irrational case at accessible scales"
                ));
                conflicting_evidence = true;
            }
            (RotationKind::Irrational, other) => {
                if map.theta0().abs() <= SMALL_ANGLE_MAX {
                    notes.push(format!(
                        "rotation detected irrational but overlap ordering is {other:?} \
                         despite a small angle"
                    ));
                    conflicting_evidence = true;
                } else {
                    notes.push(format!(
                        "overlap ordering {other:?} is expected for a large irrational \
                         angle at accessible scales; consider the q-th root map \
                         (a/q, b/q, theta0/q) to expose the irrational-like ordering"
                    ));
                }
            }
        }
    }

    let (estimated_dim, verdict) = match estimate {
        None => (None, None),
        Some(est) => {
            let v = if conflicting_evidence {
                Verdict::Inconclusive
            } else {
                verdict_against(est.dim, &predicted, settings.dim_tolerance)
            };
            (Some(est.dim), Some(v))
        }
    };

    Ok(ClassificationReport {
        scenario,
        predicted,
        rotation: Some(rotation),
        regime,
        estimated_dim,
        verdict,
        tolerance: settings.dim_tolerance,
        notes,
    })
}

fn verdict_against(dim: f64, predicted: &TheoreticalDimension, tol: f64) -> Verdict {
    let close = (dim - predicted.value_f64()).abs() <= tol;
    let enveloped = match predicted.bounds_f64() {
        Some((lo, hi)) => dim >= lo - tol && dim <= hi + tol,
        None => true,
    };
    if close && enveloped {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Classify a center-manifold restriction by its nondegeneracy order.
pub fn classify_restriction(
    report: &CenterManifoldReport,
    estimate: Option<&DimensionEstimate>,
    settings: &ClassifySettings,
) -> Result<ClassificationReport> {
    let scenario = match report.nondegeneracy {
        NondegeneracyOrder::Order(2) => Scenario::SaddleNodeCm,
        NondegeneracyOrder::Order(k) => Scenario::PitchforkOrPdCm { k },
        NondegeneracyOrder::Undetermined => {
            return Err(Error::Degenerate(
                "nondegeneracy order undetermined up to cubic truncation".into(),
            ))
        }
    };
    let predicted = theoretical_dimension(scenario)?;
    let (estimated_dim, verdict) = match estimate {
        None => (None, None),
        Some(est) => (
            Some(est.dim),
            Some(verdict_against(est.dim, &predicted, settings.dim_tolerance)),
        ),
    };
    Ok(ClassificationReport {
        scenario,
        predicted,
        rotation: None,
        regime: None,
        estimated_dim,
        verdict,
        tolerance: settings.dim_tolerance,
        notes: Vec::new(),
    })
}
