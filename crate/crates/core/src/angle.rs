//! Angle literals and reduction helpers.
//!
//! Config files write rotation angles either as plain decimals or in exact
//! `pi`-fraction syntax ("pi/6", "-2pi/5", "3pi/4"). Parsing the fraction
//! form avoids decimal drift before rationality detection.

use crate::{Error, Result};
use std::f64::consts::{PI, TAU};

/// Parse an angle literal: a decimal number, or `[sign][coef]pi[/den]`.
///
/// Accepted examples: `0.5236`, `pi`, `-pi/6`, `2pi/5`, `2*pi/12`, `3pi`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::InvalidParameter("empty angle literal".into()));
    }
    if let Ok(v) = t.parse::<f64>() {
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite angle {t:?}")));
        }
        return Ok(v);
    }
    let (sign, rest) = match t.strip_prefix('-') {
        Some(r) => (-1.0, r.trim()),
        None => (1.0, t.strip_prefix('+').unwrap_or(t).trim()),
    };
    let lower = rest.to_ascii_lowercase();
    let pi_pos = lower
        .find("pi")
        .ok_or_else(|| Error::InvalidParameter(format!("unrecognized angle literal {s:?}")))?;
    let coef_str = lower[..pi_pos].trim().trim_end_matches('*').trim();
    let coef = if coef_str.is_empty() {
        1.0
    } else {
        coef_str
            .parse::<f64>()
            .map_err(|_| Error::InvalidParameter(format!("bad coefficient in {s:?}")))?
    };
    let after = lower[pi_pos + 2..].trim();
    let den = if after.is_empty() {
        1.0
    } else if let Some(d) = after.strip_prefix('/') {
        let d = d
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidParameter(format!("bad denominator in {s:?}")))?;
        if d == 0.0 {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        d
    } else {
        return Err(Error::InvalidParameter(format!(
            "unrecognized angle literal {s:?}"
        )));
    };
    Ok(sign * coef * PI / den)
}

/// Reduce an angle to [0, 2π).
pub fn reduce_mod_tau(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    if r == TAU {
        0.0
    } else {
        r
    }
}

/// Distance between two angles on the circle, in [0, π].
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = reduce_mod_tau(a - b);
    d.min(TAU - d)
}
