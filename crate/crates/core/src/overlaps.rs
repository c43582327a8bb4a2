//! Overlap-distance sequences of a discrete spiral and their scaling.
//!
//! For points `A_k` of a spiral and the full-turn count `q0`, the three
//! distances
//!
//! ```text
//! y_k = d(A_k, A_{k+1})      adjacent points
//! z_k = d(A_k, A_{k+q0})     one full turn apart
//! w_k = d(A_{k+1}, A_{k+q0})
//! ```
//!
//! govern when the ε-disks around orbit points start to merge. Their decay
//! exponents and the order in which `y` and `z` shrink (rational-like:
//! z < y eventually; irrational-like small angle: y < z) separate the
//! bifurcation scenarios.

use crate::fit::{log_log_fit, ExponentFit};
use crate::normal_forms::PolarNormalForm;
use crate::orbits::DiscreteSpiral;
use crate::rational::best_rational;
use crate::{Error, Result};
use serde::Serialize;
use std::f64::consts::TAU;
use std::io::Write;

/// Fraction of the sequence used as the regime-detection window (the
/// ordering statements are eventual, so only the tail counts).
pub const DEFAULT_REGIME_WINDOW_FRACTION: f64 = 0.25;

/// Which overlap ordering the tail of the spiral exhibits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapRegime {
    /// `z_k < y_k` throughout the window: disks merge along rays first.
    RationalLike,
    /// `y_k < z_k` throughout the window: disks merge along the orbit path
    /// first, as for a continuous spiral.
    IrrationalLike,
    /// The ordering still flips inside the window.
    Mixed,
}

/// Overlap distances of one spiral, with regime diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct OverlapAnalysis {
    pub q0: usize,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    pub m1_eps: Option<usize>,
    pub m2_eps: Option<usize>,
    pub regime: OverlapRegime,
    /// First index after which the winning order never flips in the data.
    pub k0: Option<usize>,
}

/// Tail-fit exponents of the three overlap sequences.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OverlapExponents {
    pub y: ExponentFit,
    pub z: ExponentFit,
    pub w: ExponentFit,
}

/// Full-turn count of a rotation angle: the least `q0 >= 1` with
/// `q0 |theta0| >= 2 pi`. When `theta0/(2 pi)` is detected rational `p/q`
/// (so that `q theta0` is a multiple of 2π), returns `q` instead.
pub fn q0_of(theta0: f64) -> Result<usize> {
    if theta0 == 0.0 || !theta0.is_finite() {
        return Err(Error::InvalidParameter("zero rotation angle".into()));
    }
    let beta = theta0.abs() / TAU;
    if let Some(r) = best_rational(beta, crate::classification::DEFAULT_Q_MAX) {
        if r.error <= crate::classification::DEFAULT_RATIONALITY_TOL && r.q >= 1 {
            return Ok(r.q as usize);
        }
    }
    Ok((TAU / theta0.abs()).ceil() as usize)
}

/// Compute y, z, w from the stored points via the law of cosines on the
/// actual angle differences (not truncated expansions). All three sequences
/// share index range `0 .. len - q0 - 1`.
pub fn overlap_sequences(spiral: &DiscreteSpiral, q0: usize) -> Result<OverlapAnalysis> {
    overlap_sequences_of(spiral.points(), q0)
}

/// As [`overlap_sequences`], for a bare polar point sequence (for instance
/// an orbit of a flow map).
pub fn overlap_sequences_of(
    pts: &[crate::normal_forms::PolarPoint],
    q0: usize,
) -> Result<OverlapAnalysis> {
    if q0 < 1 {
        return Err(Error::InvalidParameter("q0 must be >= 1".into()));
    }
    if pts.len() <= q0 + 10 {
        return Err(Error::TooShort {
            have: pts.len(),
            need: q0 + 11,
        });
    }
    let m = pts.len() - q0;
    let mut y = Vec::with_capacity(m);
    let mut z = Vec::with_capacity(m);
    let mut w = Vec::with_capacity(m);
    for k in 0..m {
        y.push(pts[k].distance(&pts[k + 1]));
        z.push(pts[k].distance(&pts[k + q0]));
        w.push(pts[k + 1].distance(&pts[k + q0]));
    }
    let window = ((m as f64 * DEFAULT_REGIME_WINDOW_FRACTION).ceil() as usize).max(2);
    let (regime, k0) = ordering_regime(&y, &z, window);
    Ok(OverlapAnalysis {
        q0,
        y,
        z,
        w,
        m1_eps: None,
        m2_eps: None,
        regime,
        k0,
    })
}

impl OverlapAnalysis {
    /// Fill `m1_eps`/`m2_eps` for a given ε: the first indices at which the
    /// cross-turn distance z and the adjacent distance y drop below 2ε.
    pub fn with_overlap_indices(mut self, eps: f64) -> Self {
        self.m1_eps = first_overlap_index(&self.z, eps);
        self.m2_eps = first_overlap_index(&self.y, eps);
        self
    }

    /// Re-evaluate the ordering regime with an explicit window length.
    pub fn regime_with_window(&self, window: usize) -> (OverlapRegime, Option<usize>) {
        ordering_regime(&self.y, &self.z, window)
    }

    /// CSV export `k,y,z,w`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "k,y,z,w")?;
        for k in 0..self.y.len() {
            writeln!(
                w,
                "{k},{:.16e},{:.16e},{:.16e}",
                self.y[k], self.z[k], self.w[k]
            )?;
        }
        Ok(())
    }
}

/// Least index k with `seq[k] < 2 eps`, or `None`. Meaningful for
/// eventually decreasing sequences.
pub fn first_overlap_index(seq: &[f64], eps: f64) -> Option<usize> {
    seq.iter().position(|&v| v < 2.0 * eps)
}

/// Detect the tail ordering of y and z over the last `window` entries, and
/// the first index after which the winning order never flips in the data.
pub fn ordering_regime(y: &[f64], z: &[f64], window: usize) -> (OverlapRegime, Option<usize>) {
    let m = y.len().min(z.len());
    if m == 0 || window == 0 || window > m {
        return (OverlapRegime::Mixed, None);
    }
    let start = m - window;
    let z_wins = (start..m).all(|k| z[k] < y[k]);
    let y_wins = (start..m).all(|k| y[k] < z[k]);
    let regime = if z_wins {
        OverlapRegime::RationalLike
    } else if y_wins {
        OverlapRegime::IrrationalLike
    } else {
        return (OverlapRegime::Mixed, None);
    };
    let violates = |k: usize| {
        if z_wins {
            z[k] >= y[k]
        } else {
            y[k] >= z[k]
        }
    };
    let mut k0 = 0;
    for k in (0..m).rev() {
        if violates(k) {
            k0 = k + 1;
            break;
        }
    }
    (regime, Some(k0))
}

/// Log-log tail fits (k >= len/2) of the three overlap sequences.
pub fn overlap_exponents(analysis: &OverlapAnalysis) -> Result<OverlapExponents> {
    let m = analysis.y.len();
    if m < 1000 {
        return Err(Error::TooShort {
            have: m,
            need: 1000,
        });
    }
    let half = m / 2;
    let ks: Vec<f64> = (half..m).map(|k| k as f64).collect();
    let fit_tail = |seq: &[f64]| log_log_fit(&ks, &seq[half..], None);
    Ok(OverlapExponents {
        y: fit_tail(&analysis.y)?,
        z: fit_tail(&analysis.z)?,
        w: fit_tail(&analysis.w)?,
    })
}

/// Leading-order q-th functional root of a polar map: divides `a`, `b`,
/// `theta0` (and the family terms) by q. Iterating the root q times
/// reproduces the original map up to higher-order terms.
pub fn root_map(map: &PolarNormalForm, q: u32) -> Result<PolarNormalForm> {
    if q < 1 {
        return Err(Error::InvalidParameter("q must be >= 1".into()));
    }
    let qf = q as f64;
    PolarNormalForm::new(map.a() / qf, map.alpha(), map.b() / qf, map.theta0() / qf)?.with_family(
        map.d() / qf,
        map.c() / qf,
        map.mu(),
    )
}
