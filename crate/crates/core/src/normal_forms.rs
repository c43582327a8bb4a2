//! Polar normal-form maps, their iterates and leading-order inverses, and
//! unit-time maps of planar rotational flows.
//!
//! The central object is [`PolarNormalForm`], the map pair
//!
//! ```text
//! r   ->  r + d*mu*r + a*r^alpha + radial tail
//! phi ->  phi + theta0 + c*mu + b*r^(alpha-1) + angular tail
//! ```
//!
//! with odd `alpha >= 3`. At `mu = 0` the origin is a nonhyperbolic fixed
//! point and the orbits are discrete spirals. [`ContinuousHopfSystem`] is the
//! continuous counterpart `r' = a r^(2k+1)`, `phi' = omega + b r^(2k)`; its
//! time-T flow map ([`FlowMap`]) reduces to the same normal form at leading
//! order.

use crate::angle::reduce_mod_tau;
use crate::{Error, Result};
use serde::Serialize;

/// Radius above which iteration and integration report blow-up.
pub const DEFAULT_BLOWUP_CEILING: f64 = 1e3;

/// Default fixed integration steps per unit time for flow maps.
pub const DEFAULT_FLOW_STEPS: usize = 256;

/// A point in polar coordinates. The angle is kept unreduced so winding
/// numbers survive; use [`PolarPoint::phi_reduced`] for the value in [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarPoint {
    pub r: f64,
    pub phi: f64,
}

impl PolarPoint {
    pub fn new(r: f64, phi: f64) -> Self {
        Self { r, phi }
    }

    /// Angle reduced to [0, 2π).
    pub fn phi_reduced(&self) -> f64 {
        reduce_mod_tau(self.phi)
    }

    pub fn to_cartesian(&self) -> [f64; 2] {
        [self.r * self.phi.cos(), self.r * self.phi.sin()]
    }

    /// Euclidean distance via the law of cosines on the actual angle gap,
    /// in the cancellation-free form
    /// `d^2 = (r1 - r2)^2 + 4 r1 r2 sin^2(dphi/2)`.
    pub fn distance(&self, other: &PolarPoint) -> f64 {
        let dr = self.r - other.r;
        let s = (0.5 * (other.phi - self.phi)).sin();
        (dr * dr + 4.0 * self.r * other.r * s * s).sqrt()
    }
}

/// Leading coefficients of the k-th iterate: `f^k(r) = r + k a r^alpha + ...`,
/// `g^k = phi + k theta0 + k b r^(alpha-1) + ...`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterateCoefficients {
    pub radial: f64,
    pub angle_shift: f64,
    pub angular: f64,
}

/// Polar normal form of a planar map near a nonhyperbolic fixed point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarNormalForm {
    a: f64,
    alpha: u32,
    b: f64,
    theta0: f64,
    d: f64,
    c: f64,
    mu: f64,
    radial_tail: Vec<(f64, f64)>,
    angular_tail: Vec<(f64, f64)>,
}

impl PolarNormalForm {
    /// Map at the bifurcation value (`d = c = mu = 0`, no tail terms).
    pub fn new(a: f64, alpha: u32, b: f64, theta0: f64) -> Result<Self> {
        if alpha < 3 || alpha.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be odd and >= 3, got {alpha}"
            )));
        }
        for v in [a, b, theta0] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter("non-finite coefficient".into()));
            }
        }
        Ok(Self {
            a,
            alpha,
            b,
            theta0,
            d: 0.0,
            c: 0.0,
            mu: 0.0,
            radial_tail: Vec::new(),
            angular_tail: Vec::new(),
        })
    }

    /// Parameter-family terms: `d*mu*r` radial, `c*mu` angular.
    pub fn with_family(mut self, d: f64, c: f64, mu: f64) -> Result<Self> {
        if ![d, c, mu].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite family term".into()));
        }
        self.d = d;
        self.c = c;
        self.mu = mu;
        Ok(self)
    }

    /// Higher-order radial terms `(coefficient, exponent)`; exponents must
    /// strictly exceed `alpha`.
    pub fn with_radial_tail(mut self, tail: Vec<(f64, f64)>) -> Result<Self> {
        for &(coef, exp) in &tail {
            if !coef.is_finite() || !exp.is_finite() || exp <= self.alpha as f64 {
                return Err(Error::InvalidParameter(format!(
                    "radial tail exponent {exp} must exceed alpha = {}",
                    self.alpha
                )));
            }
        }
        self.radial_tail = tail;
        Ok(self)
    }

    /// Higher-order angular terms; exponents must strictly exceed `alpha - 1`.
    pub fn with_angular_tail(mut self, tail: Vec<(f64, f64)>) -> Result<Self> {
        for &(coef, exp) in &tail {
            if !coef.is_finite() || !exp.is_finite() || exp <= (self.alpha - 1) as f64 {
                return Err(Error::InvalidParameter(format!(
                    "angular tail exponent {exp} must exceed alpha - 1 = {}",
                    self.alpha - 1
                )));
            }
        }
        self.angular_tail = tail;
        Ok(self)
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn alpha(&self) -> u32 {
        self.alpha
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn theta0(&self) -> f64 {
        self.theta0
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn radial_tail(&self) -> &[(f64, f64)] {
        &self.radial_tail
    }
    pub fn angular_tail(&self) -> &[(f64, f64)] {
        &self.angular_tail
    }

    /// Same map at a different parameter value.
    pub fn at_mu(&self, mu: f64) -> Result<Self> {
        let mut m = self.clone();
        if !mu.is_finite() {
            return Err(Error::InvalidParameter("non-finite mu".into()));
        }
        m.mu = mu;
        Ok(m)
    }

    /// One application of the map. Rejects negative radii.
    pub fn eval(&self, p: PolarPoint) -> Result<PolarPoint> {
        if p.r < 0.0 {
            return Err(Error::NegativeRadius(p.r));
        }
        let r = p.r;
        let mut r_next = r + self.d * self.mu * r + self.a * r.powi(self.alpha as i32);
        for &(coef, exp) in &self.radial_tail {
            r_next += coef * r.powf(exp);
        }
        let mut phi_next =
            p.phi + self.theta0 + self.c * self.mu + self.b * r.powi(self.alpha as i32 - 1);
        for &(coef, exp) in &self.angular_tail {
            phi_next += coef * r.powf(exp);
        }
        Ok(PolarPoint::new(r_next, phi_next))
    }

    /// Exact k-fold composition of [`PolarNormalForm::eval`].
    pub fn iterate_k(&self, p: PolarPoint, k: usize) -> Result<PolarPoint> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        let mut q = p;
        for _ in 0..k {
            q = self.eval(q)?;
        }
        Ok(q)
    }

    /// Leading coefficients of the k-th iterate, computed symbolically.
    pub fn leading_iterate_coefficients(&self, k: usize) -> Result<IterateCoefficients> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        let kf = k as f64;
        Ok(IterateCoefficients {
            radial: kf * self.a,
            angle_shift: kf * self.theta0,
            angular: kf * self.b,
        })
    }

    /// Leading-order inverse: flips the signs of `a`, `theta0`, `b` (and of
    /// the family terms `d`, `c`). Tail terms are dropped; they are not valid
    /// beyond leading order. Used to reduce the unstable case `a > 0` to the
    /// stable one.
    pub fn inverse_leading(&self) -> Self {
        Self {
            a: -self.a,
            alpha: self.alpha,
            b: -self.b,
            theta0: -self.theta0,
            d: -self.d,
            c: -self.c,
            mu: self.mu,
            radial_tail: Vec::new(),
            angular_tail: Vec::new(),
        }
    }

    /// Upper bound of the radial interval on which the `mu = 0`, tails-zero
    /// map is strictly contracting toward the origin (for `a < 0`).
    pub fn contracting_basin_radius(&self) -> Option<f64> {
        if self.a < 0.0 {
            Some((-1.0 / (2.0 * self.a)).powf(1.0 / (self.alpha as f64 - 1.0)))
        } else {
            None
        }
    }

    /// Plain-text config document with the fixed key set `a`, `alpha`, `b`,
    /// `theta0`, `d`, `c`, `mu`, `radial_tail`, `angular_tail`. The output
    /// round-trips through [`PolarNormalForm::from_config_str`] and loads
    /// as a `[map]` section.
    pub fn to_config_string(&self) -> String {
        let mut out = String::from("[map]\n");
        out.push_str(&format!("a = {}\n", fmt_config_f64(self.a)));
        out.push_str(&format!("alpha = {}\n", self.alpha));
        out.push_str(&format!("b = {}\n", fmt_config_f64(self.b)));
        out.push_str(&format!("theta0 = {}\n", fmt_config_f64(self.theta0)));
        out.push_str(&format!("d = {}\n", fmt_config_f64(self.d)));
        out.push_str(&format!("c = {}\n", fmt_config_f64(self.c)));
        out.push_str(&format!("mu = {}\n", fmt_config_f64(self.mu)));
        for (key, tail) in [
            ("radial_tail", &self.radial_tail),
            ("angular_tail", &self.angular_tail),
        ] {
            if !tail.is_empty() {
                let pairs: Vec<String> = tail
                    .iter()
                    .map(|(c, e)| format!("[{}, {}]", fmt_config_f64(*c), fmt_config_f64(*e)))
                    .collect();
                out.push_str(&format!("{key} = [{}]\n", pairs.join(", ")));
            }
        }
        out
    }

    /// Parse the `key = value` config document written by
    /// [`PolarNormalForm::to_config_string`]. Comment lines (`#`) and an
    /// optional `[map]` section header are accepted; `theta0` may be a
    /// decimal or a quoted "pi/6"-style literal.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut a = None;
        let mut alpha = 3u32;
        let mut b = 0.0;
        let mut theta0 = None;
        let (mut d, mut c, mut mu) = (0.0, 0.0, 0.0);
        let mut radial_tail = Vec::new();
        let mut angular_tail = Vec::new();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() || line == "[map]" {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("expected key = value, got {line:?}"))
            })?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "a" => a = Some(parse_config_f64(value)?),
                "alpha" => {
                    alpha = value
                        .parse()
                        .map_err(|_| Error::InvalidParameter(format!("bad alpha {value:?}")))?
                }
                "b" => b = parse_config_f64(value)?,
                "theta0" => theta0 = Some(parse_config_angle(value)?),
                "d" => d = parse_config_f64(value)?,
                "c" => c = parse_config_f64(value)?,
                "mu" => mu = parse_config_f64(value)?,
                "radial_tail" => radial_tail = parse_config_pairs(value)?,
                "angular_tail" => angular_tail = parse_config_pairs(value)?,
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown map config key {other:?}"
                    )))
                }
            }
        }
        let a = a.ok_or_else(|| Error::InvalidParameter("missing key a".into()))?;
        let theta0 = theta0.ok_or_else(|| Error::InvalidParameter("missing key theta0".into()))?;
        Self::new(a, alpha, b, theta0)?
            .with_family(d, c, mu)?
            .with_radial_tail(radial_tail)?
            .with_angular_tail(angular_tail)
    }
}

/// Round-trip float formatting with a forced decimal point.
fn fmt_config_f64(v: f64) -> String {
    let s = format!("{v}");
    if s.contains('.') || s.contains('e') || s.contains('E') {
        s
    } else {
        format!("{s}.0")
    }
}

fn parse_config_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad number {s:?}")))
}

fn parse_config_angle(s: &str) -> Result<f64> {
    let t = s.trim();
    if let Some(quoted) = t.strip_prefix('"').and_then(|u| u.strip_suffix('"')) {
        crate::angle::parse_angle(quoted)
    } else {
        crate::angle::parse_angle(t)
    }
}

/// Parse `[[c1, e1], [c2, e2], ...]`.
fn parse_config_pairs(s: &str) -> Result<Vec<(f64, f64)>> {
    let t = s.trim();
    let inner = t
        .strip_prefix('[')
        .and_then(|u| u.strip_suffix(']'))
        .ok_or_else(|| Error::InvalidParameter(format!("expected an array, got {t:?}")))?
        .trim();
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    let mut pairs = Vec::new();
    let mut rest = inner;
    while let Some(start) = rest.find('[') {
        let end = rest[start..]
            .find(']')
            .ok_or_else(|| Error::InvalidParameter("unterminated pair".into()))?
            + start;
        let body = &rest[start + 1..end];
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(Error::InvalidParameter(format!(
                "expected [coef, exponent], got [{body}]"
            )));
        }
        pairs.push((parse_config_f64(parts[0])?, parse_config_f64(parts[1])?));
        rest = &rest[end + 1..];
    }
    Ok(pairs)
}

/// Planar rotational flow `r' = d mu r + a r^(2k+1)`,
/// `phi' = omega + c mu + b r^(2k)`; `k = 1` is the classic cubic case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuousHopfSystem {
    a: f64,
    b: f64,
    omega: f64,
    k: u32,
    d: f64,
    c: f64,
    mu: f64,
}

impl ContinuousHopfSystem {
    pub fn new(a: f64, b: f64, omega: f64, k: u32) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        if omega == 0.0 || !omega.is_finite() {
            return Err(Error::InvalidParameter("omega must be nonzero".into()));
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(Self {
            a,
            b,
            omega,
            k,
            d: 0.0,
            c: 0.0,
            mu: 0.0,
        })
    }

    pub fn with_family(mut self, d: f64, c: f64, mu: f64) -> Result<Self> {
        if ![d, c, mu].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite family term".into()));
        }
        self.d = d;
        self.c = c;
        self.mu = mu;
        Ok(self)
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Third Lyapunov coefficient `(9 pi / omega) a`; defined for `k = 1`.
    pub fn third_lyapunov(&self) -> Option<f64> {
        (self.k == 1).then(|| 9.0 * std::f64::consts::PI / self.omega * self.a)
    }

    pub fn radial_rate(&self, r: f64) -> f64 {
        self.d * self.mu * r + self.a * r.powi(2 * self.k as i32 + 1)
    }

    pub fn angular_rate(&self, r: f64) -> f64 {
        self.omega + self.c * self.mu + self.b * r.powi(2 * self.k as i32)
    }

    /// Leading-order polar normal form of the unit-time map:
    /// `alpha = 2k + 1`, same `a`, `b`, `theta0 = omega`, same family terms.
    pub fn to_polar_normal_form(&self) -> Result<PolarNormalForm> {
        PolarNormalForm::new(self.a, 2 * self.k + 1, self.b, self.omega)?
            .with_family(self.d, self.c, self.mu)
    }

    /// Time-`t` flow map computed by classical fixed-step 4th-order
    /// integration with `steps_per_unit` steps per unit time (>= 16).
    pub fn unit_time_map(&self, t: f64, steps_per_unit: usize) -> Result<FlowMap> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("bad flow time {t}")));
        }
        if steps_per_unit < 16 {
            return Err(Error::InvalidParameter(format!(
                "need at least 16 steps per unit time, got {steps_per_unit}"
            )));
        }
        Ok(FlowMap {
            system: self.clone(),
            t,
            steps_per_unit,
            ceiling: DEFAULT_BLOWUP_CEILING,
        })
    }
}

/// Time-`t` flow map of a [`ContinuousHopfSystem`], evaluated by fixed-step
/// RK4. Immutable and reusable; `t = 0` is the identity.
#[derive(Debug, Clone, Serialize)]
pub struct FlowMap {
    system: ContinuousHopfSystem,
    t: f64,
    steps_per_unit: usize,
    ceiling: f64,
}

impl FlowMap {
    pub fn system(&self) -> &ContinuousHopfSystem {
        &self.system
    }
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn with_ceiling(mut self, ceiling: f64) -> Self {
        self.ceiling = ceiling;
        self
    }

    pub fn eval(&self, p: PolarPoint) -> Result<PolarPoint> {
        if p.r < 0.0 {
            return Err(Error::NegativeRadius(p.r));
        }
        if self.t == 0.0 {
            return Ok(p);
        }
        let n = ((self.steps_per_unit as f64 * self.t).ceil() as usize).max(1);
        let h = self.t / n as f64;
        let mut r = p.r;
        let mut phi = p.phi;
        for _ in 0..n {
            let (k1r, k1p) = (self.system.radial_rate(r), self.system.angular_rate(r));
            let r2 = r + 0.5 * h * k1r;
            let (k2r, k2p) = (self.system.radial_rate(r2), self.system.angular_rate(r2));
            let r3 = r + 0.5 * h * k2r;
            let (k3r, k3p) = (self.system.radial_rate(r3), self.system.angular_rate(r3));
            let r4 = r + h * k3r;
            let (k4r, k4p) = (self.system.radial_rate(r4), self.system.angular_rate(r4));
            r += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
            phi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            if !r.is_finite() || r > self.ceiling {
                return Err(Error::BlowUp {
                    r,
                    ceiling: self.ceiling,
                });
            }
        }
        Ok(PolarPoint::new(r, phi))
    }
}

/// Analytic solution of `r' = a r^(2k+1)`:
/// `r(t) = r0 (1 - 2 k a r0^(2k) t)^(-1/(2k))`.
///
/// Serves as the integration oracle for [`FlowMap`]. Errors when the
/// denominator base is not positive (finite-time blow-up).
pub fn flow_radial_closed_form(a: f64, k: u32, r0: f64, t: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if r0 < 0.0 {
        return Err(Error::NegativeRadius(r0));
    }
    if r0 == 0.0 {
        return Ok(0.0);
    }
    let two_k = 2.0 * k as f64;
    let denom = 1.0 - two_k * a * r0.powi(2 * k as i32) * t;
    if denom <= 0.0 {
        return Err(Error::FlowDomain { denom });
    }
    Ok(r0 * denom.powf(-1.0 / two_k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn cubic(a: f64, b: f64, theta0: f64) -> PolarNormalForm {
        PolarNormalForm::new(a, 3, b, theta0).unwrap()
    }

    #[test]
    fn eval_cubic_point() {
        let m = cubic(-1.0, 0.0, PI / 6.0);
        let q = m.eval(PolarPoint::new(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(q.r, 0.375, epsilon = 1e-15);
        assert_abs_diff_eq!(q.phi, PI / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn eval_origin_is_fixed_up_to_rotation() {
        let m = cubic(-2.0, 0.7, 0.9).with_family(1.0, 0.3, 0.2).unwrap();
        let q = m.eval(PolarPoint::new(0.0, 1.5)).unwrap();
        assert_eq!(q.r, 0.0);
        assert_abs_diff_eq!(q.phi, 1.5 + 0.9 + 0.3 * 0.2, epsilon = 1e-15);
    }

    #[test]
    fn eval_angular_radial_coupling() {
        let m = cubic(-1.0, 1.0, 1.0);
        let q = m.eval(PolarPoint::new(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(q.r, 0.375, epsilon = 1e-15);
        assert_abs_diff_eq!(q.phi, 1.25, epsilon = 1e-15); // 1 + 0.5^2
    }

    #[test]
    fn eval_rejects_negative_radius() {
        let m = cubic(-1.0, 0.0, 1.0);
        assert!(matches!(
            m.eval(PolarPoint::new(-0.1, 0.0)),
            Err(Error::NegativeRadius(_))
        ));
    }

    #[test]
    fn tails_enter_the_map() {
        let m = cubic(-1.0, 0.5, 0.2)
            .with_radial_tail(vec![(-0.5, 5.0)])
            .unwrap()
            .with_angular_tail(vec![(0.25, 4.0)])
            .unwrap();
        let r = 0.3;
        let q = m.eval(PolarPoint::new(r, 0.0)).unwrap();
        assert_abs_diff_eq!(q.r, r - r.powi(3) - 0.5 * r.powi(5), epsilon = 1e-15);
        assert_abs_diff_eq!(q.phi, 0.2 + 0.5 * r * r + 0.25 * r.powi(4), epsilon = 1e-15);
    }

    #[test]
    fn tail_exponent_validation() {
        let m = cubic(-1.0, 0.0, 1.0);
        assert!(m.clone().with_radial_tail(vec![(1.0, 3.0)]).is_err());
        assert!(m.clone().with_radial_tail(vec![(1.0, 2.0)]).is_err());
        assert!(m.clone().with_angular_tail(vec![(1.0, 2.0)]).is_err());
        assert!(m.clone().with_angular_tail(vec![(1.0, 2.5)]).is_ok());
    }

    #[test]
    fn alpha_must_be_odd_and_at_least_three() {
        assert!(PolarNormalForm::new(-1.0, 1, 0.0, 1.0).is_err());
        assert!(PolarNormalForm::new(-1.0, 4, 0.0, 1.0).is_err());
        assert!(PolarNormalForm::new(-1.0, 5, 0.0, 1.0).is_ok());
    }

    #[test]
    fn two_step_iterate_exact() {
        let m = cubic(-1.0, 0.0, PI / 6.0);
        let q = m.iterate_k(PolarPoint::new(0.5, 0.0), 2).unwrap();
        assert_eq!(q.r, 0.322265625); // 0.375 - 0.375^3, exact in binary
    }

    #[test]
    fn iterate_one_equals_eval_bitwise() {
        let m = cubic(-0.7, 0.3, 1.1);
        let p = PolarPoint::new(0.41, 2.2);
        assert_eq!(m.iterate_k(p, 1).unwrap(), m.eval(p).unwrap());
    }

    #[test]
    fn iterate_limit_recovers_k_times_a() {
        // (f^5(r) - r) / r^3 -> 5a as r -> 0
        let m = cubic(-1.0, 0.0, PI / 6.0);
        let r = 1e-4;
        let q = m.iterate_k(PolarPoint::new(r, 0.0), 5).unwrap();
        assert_abs_diff_eq!((q.r - r) / r.powi(3), -5.0, epsilon = 1e-5);
    }

    #[test]
    fn leading_iterate_coefficients_examples() {
        let m = cubic(-1.0, 1.0, PI / 6.0);
        let c = m.leading_iterate_coefficients(12).unwrap();
        assert_abs_diff_eq!(c.radial, -12.0);
        assert_abs_diff_eq!(c.angle_shift, 2.0 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(c.angular, 12.0);

        let c1 = m.leading_iterate_coefficients(1).unwrap();
        assert_eq!(
            (c1.radial, c1.angle_shift, c1.angular),
            (m.a(), m.theta0(), m.b())
        );

        let m2 = cubic(-2.0, 0.5, 1.0);
        let c7 = m2.leading_iterate_coefficients(7).unwrap();
        assert_abs_diff_eq!(c7.radial, -14.0);
        assert_abs_diff_eq!(c7.angle_shift, 7.0);
        assert_abs_diff_eq!(c7.angular, 3.5);
    }

    #[test]
    fn inverse_leading_flips_signs() {
        let m = PolarNormalForm::new(1.0, 3, 1.0, PI / 6.0).unwrap();
        let inv = m.inverse_leading();
        assert_eq!(inv.a(), -1.0);
        assert_eq!(inv.theta0(), -PI / 6.0);
        assert_eq!(inv.b(), -1.0);
        assert_eq!(inv.alpha(), 3);

        let back = inv.inverse_leading();
        assert_eq!(back.a(), m.a());
        assert_eq!(back.theta0(), m.theta0());
        assert_eq!(back.b(), m.b());
    }

    #[test]
    fn inverse_leading_residual_is_high_order() {
        let m = cubic(-1.0, 1.0, PI / 6.0);
        let inv = m.inverse_leading();
        let p = PolarPoint::new(1e-3, 0.4);
        let q = inv.eval(m.eval(p).unwrap()).unwrap();
        assert!((q.r - p.r).abs() < 1e-8);
        assert!((q.phi - p.phi).abs() < 1e-8);
    }

    #[test]
    fn composition_law_is_exact() {
        let m = cubic(-1.0, 0.8, 0.37);
        let p = PolarPoint::new(0.45, 1.0);
        let direct = m.iterate_k(p, 7).unwrap();
        let split = m.iterate_k(m.iterate_k(p, 3).unwrap(), 4).unwrap();
        assert_eq!(direct, split);
    }

    #[test]
    fn differences_eventually_decreasing() {
        let m = cubic(-1.0, 0.0, 1.0);
        let mut r = vec![0.5];
        for _ in 0..201 {
            let last = *r.last().unwrap();
            r.push(m.eval(PolarPoint::new(last, 0.0)).unwrap().r);
        }
        for k in 100..200 {
            assert!(r[k] - r[k + 1] > r[k + 1] - r[k + 2], "k = {k}");
        }
    }

    #[test]
    fn iterate_coefficient_scales_linearly_in_k() {
        // fitted coefficient of (f^k(r) - r) = c * r^alpha over small radii
        let m = cubic(-1.0, 0.0, 1.0);
        for k in [1usize, 5, 12, 20] {
            let radii = crate::fit::geomspace(1e-4, 1e-3, 16);
            let xs: Vec<f64> = radii.iter().map(|r| r.powi(3)).collect();
            let ys: Vec<f64> = radii
                .iter()
                .map(|&r| m.iterate_k(PolarPoint::new(r, 0.0), k).unwrap().r - r)
                .collect();
            let c = crate::fit::proportional_fit(&xs, &ys).unwrap();
            let expect = -(k as f64);
            assert!(
                (c - expect).abs() / expect.abs() < 0.01,
                "k = {k}: fitted {c}, expected {expect}"
            );
        }
    }

    proptest! {
        #[test]
        fn contracting_basin_radii_decrease(
            a in -2.0f64..-0.1,
            alpha_ix in 0usize..2,
            frac in 0.05f64..0.95,
        ) {
            let alpha = [3u32, 5][alpha_ix];
            let m = PolarNormalForm::new(a, alpha, 0.0, 1.0).unwrap();
            let basin = m.contracting_basin_radius().unwrap();
            let r0 = frac * basin;
            let mut r = r0;
            for _ in 0..200 {
                let next = m.eval(PolarPoint::new(r, 0.0)).unwrap().r;
                prop_assert!(next > 0.0);
                prop_assert!(next < r);
                r = next;
            }
        }
    }

    #[test]
    fn third_lyapunov_coefficient() {
        let s = ContinuousHopfSystem::new(-1.0, 0.0, 2.0, 1).unwrap();
        assert_abs_diff_eq!(
            s.third_lyapunov().unwrap(),
            -9.0 * PI / 2.0,
            epsilon = 1e-12
        );
        let s2 = ContinuousHopfSystem::new(-1.0, 0.0, 2.0, 2).unwrap();
        assert!(s2.third_lyapunov().is_none());
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(flow_radial_closed_form(-1.0, 1, 0.0, 5.0).unwrap(), 0.0);
        let r = flow_radial_closed_form(-1.0, 1, 0.5, 1.0).unwrap();
        assert_abs_diff_eq!(r, 0.5 / 1.5f64.sqrt(), epsilon = 1e-15);
        assert!(matches!(
            flow_radial_closed_form(1.0, 1, 1.0, 0.5),
            Err(Error::FlowDomain { .. })
        ));
    }

    #[test]
    fn unit_time_map_matches_closed_form() {
        let s = ContinuousHopfSystem::new(-1.0, 1.0, 1.0, 1).unwrap();
        let map = s.unit_time_map(1.0, DEFAULT_FLOW_STEPS).unwrap();
        let q = map.eval(PolarPoint::new(1e-2, 0.0)).unwrap();
        let oracle = flow_radial_closed_form(-1.0, 1, 1e-2, 1.0).unwrap();
        assert!((q.r - oracle).abs() < 1e-10);

        // radial equation decouples from b; it must hold for r0 up to 0.1
        for &r0 in &[1e-3, 0.01, 0.05, 0.1] {
            let q = map.eval(PolarPoint::new(r0, 0.3)).unwrap();
            let oracle = flow_radial_closed_form(-1.0, 1, r0, 1.0).unwrap();
            assert!((q.r - oracle).abs() < 1e-8, "r0 = {r0}");
        }
    }

    #[test]
    fn zero_time_map_is_identity() {
        let s = ContinuousHopfSystem::new(-1.0, 1.0, 1.0, 1).unwrap();
        let map = s.unit_time_map(0.0, 64).unwrap();
        let p = PolarPoint::new(0.3, 0.7);
        assert_eq!(map.eval(p).unwrap(), p);
    }

    #[test]
    fn unit_time_map_leading_coefficient_fit() {
        let s = ContinuousHopfSystem::new(-1.0, 1.0, 1.0, 1).unwrap();
        let map = s.unit_time_map(1.0, DEFAULT_FLOW_STEPS).unwrap();
        let radii = crate::fit::geomspace(1e-3, 1e-2, 12);
        let xs: Vec<f64> = radii.iter().map(|r| r.powi(3)).collect();
        let ys: Vec<f64> = radii
            .iter()
            .map(|&r| map.eval(PolarPoint::new(r, 0.0)).unwrap().r - r)
            .collect();
        let a_fit = crate::fit::proportional_fit(&xs, &ys).unwrap();
        assert!((a_fit - s.a()).abs() / s.a().abs() < 1e-3);
    }

    #[test]
    fn integration_blow_up_reported() {
        let s = ContinuousHopfSystem::new(1.0, 0.0, 1.0, 1).unwrap();
        let map = s.unit_time_map(1.0, 64).unwrap();
        assert!(matches!(
            map.eval(PolarPoint::new(5.0, 0.0)),
            Err(Error::BlowUp { .. })
        ));
    }

    #[test]
    fn steps_floor_enforced() {
        let s = ContinuousHopfSystem::new(-1.0, 0.0, 1.0, 1).unwrap();
        assert!(s.unit_time_map(1.0, 8).is_err());
    }

    #[test]
    fn map_config_round_trip() {
        let m = PolarNormalForm::new(-1.0, 3, 0.5, PI / 6.0)
            .unwrap()
            .with_family(1.0, -0.25, 0.1)
            .unwrap()
            .with_radial_tail(vec![(-0.5, 5.0)])
            .unwrap()
            .with_angular_tail(vec![(0.125, 4.0)])
            .unwrap();
        let text = m.to_config_string();
        let back = PolarNormalForm::from_config_str(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn map_config_accepts_angle_literals_and_comments() {
        let text = "# a comment\n[map]\na = -1.0\nalpha = 5\ntheta0 = \"pi/6\"\n";
        let m = PolarNormalForm::from_config_str(text).unwrap();
        assert_eq!(m.alpha(), 5);
        assert_abs_diff_eq!(m.theta0(), PI / 6.0);
        assert_eq!(m.b(), 0.0);

        assert!(PolarNormalForm::from_config_str("a = -1.0\n").is_err()); // no theta0
        assert!(PolarNormalForm::from_config_str("a = -1.0\ntheta0 = 1.0\nbogus = 2\n").is_err());
    }
}
