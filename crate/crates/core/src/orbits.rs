//! Discrete spirals (orbits of polar normal-form maps) and sampled
//! continuous spiral trajectories.

use crate::fit::{log_log_fit, ExponentFit};
use crate::normal_forms::{
    ContinuousHopfSystem, PolarNormalForm, PolarPoint, DEFAULT_BLOWUP_CEILING,
};
use crate::{Error, Result};
use serde::Serialize;
use std::io::Write;

/// Why orbit generation stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    MaxIterations,
    RadiusFloor,
    Escape,
}

/// Default angular gap bound when sampling continuous spirals.
pub const DEFAULT_MAX_ANGULAR_GAP: f64 = std::f64::consts::PI / 64.0;

/// Default first index for asymptotic tail fits; skips the pre-asymptotic
/// transient (the scaling laws hold for k big enough).
pub const DEFAULT_FIT_K_MIN: usize = 100;

/// A finite orbit of a [`PolarNormalForm`], the set whose dimension is
/// measured. Points carry unreduced angles.
#[derive(Debug, Clone, Serialize)]
pub struct DiscreteSpiral {
    points: Vec<PolarPoint>,
    #[serde(skip)]
    map: PolarNormalForm,
    r0: f64,
    phi0: f64,
    stop_reason: StopReason,
}

impl DiscreteSpiral {
    pub fn points(&self) -> &[PolarPoint] {
        &self.points
    }
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    pub fn map(&self) -> &PolarNormalForm {
        &self.map
    }
    pub fn r0(&self) -> f64 {
        self.r0
    }
    pub fn phi0(&self) -> f64 {
        self.phi0
    }
    pub fn stop_reason(&self) -> StopReason {
        self.stop_reason
    }

    /// Radius of the last stored point; the unreached tail lies inside this
    /// disk and is modelled as the nucleus by the area estimators.
    pub fn last_radius(&self) -> f64 {
        self.points.last().map(|p| p.r).unwrap_or(0.0)
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.r)
    }

    pub fn to_cartesian(&self) -> Vec<[f64; 2]> {
        self.points.iter().map(|p| p.to_cartesian()).collect()
    }

    /// Every `stride`-th point starting from `offset` (ray subsequences of a
    /// rational spiral are `stride = q`, `offset = 0..q`).
    pub fn stride_points(&self, offset: usize, stride: usize) -> Vec<PolarPoint> {
        assert!(stride >= 1);
        self.points
            .iter()
            .skip(offset)
            .step_by(stride)
            .copied()
            .collect()
    }

    /// CSV export with header `k,r,phi,x,y`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "k,r,phi,x,y")?;
        for (k, p) in self.points.iter().enumerate() {
            let [x, y] = p.to_cartesian();
            writeln!(w, "{k},{:.16e},{:.16e},{:.16e},{:.16e}", p.r, p.phi, x, y)?;
        }
        Ok(())
    }
}

/// Iterate `map` from `(r0, phi0)` until the radius drops below `r_floor`,
/// `max_iter` points have been stored, or the orbit escapes (radius above
/// the blow-up ceiling, negative, or non-finite).
pub fn generate_spiral(
    map: &PolarNormalForm,
    r0: f64,
    phi0: f64,
    max_iter: usize,
    r_floor: f64,
) -> Result<DiscreteSpiral> {
    if !(r_floor > 0.0) || !(r0 > r_floor) {
        return Err(Error::InvalidParameter(format!(
            "need r0 > r_floor > 0, got r0 = {r0}, r_floor = {r_floor}"
        )));
    }
    let mut points = Vec::new();
    let mut p = PolarPoint::new(r0, phi0);
    points.push(p);
    let mut stop_reason = StopReason::MaxIterations;
    while points.len() <= max_iter {
        let next = map.eval(p)?;
        if !next.r.is_finite() || !next.phi.is_finite() || next.r < 0.0 {
            stop_reason = StopReason::Escape;
            break;
        }
        if next.r > DEFAULT_BLOWUP_CEILING {
            stop_reason = StopReason::Escape;
            break;
        }
        if next.r < r_floor {
            stop_reason = StopReason::RadiusFloor;
            break;
        }
        points.push(next);
        p = next;
    }
    Ok(DiscreteSpiral {
        points,
        map: map.clone(),
        r0,
        phi0,
        stop_reason,
    })
}

/// Points sampled along a continuous spiral trajectory, densified so that
/// consecutive angular gaps stay below a bound.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuousSpiralSample {
    points: Vec<PolarPoint>,
    #[serde(skip)]
    system: ContinuousHopfSystem,
    pub phi_start: f64,
    pub phi_end: f64,
}

impl ContinuousSpiralSample {
    pub fn points(&self) -> &[PolarPoint] {
        &self.points
    }
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    pub fn system(&self) -> &ContinuousHopfSystem {
        &self.system
    }
    pub fn to_cartesian(&self) -> Vec<[f64; 2]> {
        self.points.iter().map(|p| p.to_cartesian()).collect()
    }
}

/// Angle along the trajectory as a function of radius, from the separable
/// closed form: `Phi(r) = -omega_eff/(2 k a) r^(-2k) + (b/a) ln r`.
pub fn spiral_angle_of_radius(system: &ContinuousHopfSystem, r: f64) -> f64 {
    let k = system.k() as f64;
    let omega_eff = system.omega() + system.c() * system.mu();
    -omega_eff / (2.0 * k * system.a()) * r.powi(-2 * system.k() as i32)
        + system.b() / system.a() * r.ln()
}

/// Sample the continuous spiral with radii geometrically spaced in
/// `[r_end, r_start]`, densified so consecutive angular gaps are at most
/// π/64. `n` is the base grid size; densification may add points.
pub fn sample_continuous_spiral(
    system: &ContinuousHopfSystem,
    r_start: f64,
    r_end: f64,
    n: usize,
) -> Result<ContinuousSpiralSample> {
    sample_continuous_spiral_with_gap(system, r_start, r_end, n, DEFAULT_MAX_ANGULAR_GAP)
}

/// As [`sample_continuous_spiral`] with an explicit angular gap bound.
pub fn sample_continuous_spiral_with_gap(
    system: &ContinuousHopfSystem,
    r_start: f64,
    r_end: f64,
    n: usize,
    max_gap: f64,
) -> Result<ContinuousSpiralSample> {
    if system.a() >= 0.0 {
        return Err(Error::InvalidParameter(
            "a must be negative; sample the inverse-time system instead".into(),
        ));
    }
    if system.d() * system.mu() != 0.0 {
        return Err(Error::InvalidParameter(
            "closed-form sampling requires d*mu = 0".into(),
        ));
    }
    if !(0.0 < r_end && r_end < r_start) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < r_end < r_start, got {r_end}, {r_start}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("need n >= 2".into()));
    }
    if !(max_gap > 0.0) {
        return Err(Error::InvalidParameter("max_gap must be positive".into()));
    }
    // angular rate must not vanish on the radius range
    let w1 = system.angular_rate(r_start);
    let w2 = system.angular_rate(r_end);
    if w1 == 0.0 || w2 == 0.0 || w1.signum() != w2.signum() {
        return Err(Error::Degenerate(
            "angular rate changes sign on the sampled radius range".into(),
        ));
    }

    let base = crate::fit::geomspace(r_end, r_start, n);
    let mut radii: Vec<f64> = base.into_iter().rev().collect(); // descending
                                                                // densify in log-radius until angular gaps obey the bound
    let mut i = 0;
    while i + 1 < radii.len() {
        let (hi, lo) = (radii[i], radii[i + 1]);
        let gap = (spiral_angle_of_radius(system, lo) - spiral_angle_of_radius(system, hi)).abs();
        if gap > max_gap {
            radii.insert(i + 1, (hi * lo).sqrt());
        } else {
            i += 1;
        }
    }
    let points: Vec<PolarPoint> = radii
        .iter()
        .map(|&r| PolarPoint::new(r, spiral_angle_of_radius(system, r)))
        .collect();
    let phi_start = points.first().unwrap().phi;
    let phi_end = points.last().unwrap().phi;
    Ok(ContinuousSpiralSample {
        points,
        system: system.clone(),
        phi_start,
        phi_end,
    })
}

/// Least-squares decay exponent of a positive sequence: the negated slope of
/// `log seq[k]` vs `log k` over `k >= k_min`. For the radial sequence of a
/// spiral the expected value is `1/(alpha - 1)`.
pub fn radial_decay_exponent_of(seq: &[f64], k_min: usize) -> Result<ExponentFit> {
    if k_min < 1 {
        return Err(Error::InvalidParameter("k_min must be >= 1".into()));
    }
    if seq.len() < 10 * k_min {
        return Err(Error::TooShort {
            have: seq.len(),
            need: 10 * k_min,
        });
    }
    let ks: Vec<f64> = (k_min..seq.len()).map(|k| k as f64).collect();
    let vals: Vec<f64> = seq[k_min..].to_vec();
    let fit = log_log_fit(&ks, &vals, None)?;
    Ok(ExponentFit {
        exponent: -fit.exponent,
        stderr: fit.stderr,
        r2: fit.r2,
    })
}

/// Decay exponent of a spiral's radial sequence.
pub fn radial_decay_exponent(spiral: &DiscreteSpiral, k_min: usize) -> Result<ExponentFit> {
    let radii: Vec<f64> = spiral.radii().collect();
    radial_decay_exponent_of(&radii, k_min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::reduce_mod_tau;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{PI, TAU};

    fn cubic(a: f64, b: f64, theta0: f64) -> PolarNormalForm {
        PolarNormalForm::new(a, 3, b, theta0).unwrap()
    }

    #[test]
    fn spiral_length_matches_decay_oracle() {
        // r_k ~ (2k)^(-1/2) says the floor 1e-3 is reached near k = 5e5
        let m = cubic(-1.0, 0.0, PI / 6.0);
        let s = generate_spiral(&m, 0.5, 0.0, 10_000_000, 1e-3).unwrap();
        assert_eq!(s.stop_reason(), StopReason::RadiusFloor);
        let expect = 0.5 / 1e-6; // 1/(2 * floor^2)
        assert!(s.len() as f64 > expect / 2.0 && (s.len() as f64) < expect * 2.0);
    }

    #[test]
    fn r0_just_above_floor() {
        // one radial step from 0.51 already undershoots a floor of 0.5
        let m = cubic(-1.0, 0.0, PI / 6.0);
        let s = generate_spiral(&m, 0.51, 0.0, 1000, 0.5).unwrap();
        assert!(s.len() <= 2);
        assert_eq!(s.stop_reason(), StopReason::RadiusFloor);
    }

    #[test]
    fn zero_iterations_keep_initial_point() {
        let m = cubic(-1.0, 0.0, PI / 6.0);
        let s = generate_spiral(&m, 0.5, 0.25, 0, 1e-3).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.points()[0], PolarPoint::new(0.5, 0.25));
        assert_eq!(s.stop_reason(), StopReason::MaxIterations);
    }

    #[test]
    fn unstable_map_escapes() {
        let m = cubic(1.0, 0.0, 1.0);
        let s = generate_spiral(&m, 0.9, 0.0, 100_000, 1e-6).unwrap();
        assert_eq!(s.stop_reason(), StopReason::Escape);
    }

    #[test]
    fn rational_angle_points_lie_on_rays() {
        let m = cubic(-1.0, 0.0, PI / 6.0);
        let s = generate_spiral(&m, 0.5, 0.3, 240, 1e-3).unwrap();
        for (k, p) in s.points().iter().enumerate().step_by(12) {
            let delta = reduce_mod_tau(p.phi - 0.3);
            let dist = delta.min(TAU - delta);
            assert!(dist < 1e-12, "k = {k}, dist = {dist:e}");
        }
    }

    #[test]
    fn rational_angle_q_distinct_values() {
        let theta0 = TAU * 3.0 / 7.0;
        let m = cubic(-1.0, 0.0, theta0);
        let s = generate_spiral(&m, 0.5, 0.0, 700, 1e-3).unwrap();
        let mut reduced: Vec<f64> = s.points().iter().map(|p| p.phi_reduced()).collect();
        reduced.sort_by(f64::total_cmp);
        let mut clusters = 1;
        for w in reduced.windows(2) {
            if w[1] - w[0] > 1e-10 {
                clusters += 1;
            }
        }
        // the circle wraps: values hugging 0 and 2 pi are the same ray
        if reduced.first().unwrap() + TAU - reduced.last().unwrap() < 1e-10 {
            clusters -= 1;
        }
        assert_eq!(clusters, 7);
    }

    #[test]
    fn stored_sequence_reproduces_under_eval() {
        let m = cubic(-1.0, 1.0, 1.0);
        let s = generate_spiral(&m, 0.5, 0.0, 5000, 1e-2).unwrap();
        for w in s.points().windows(2) {
            let q = m.eval(w[0]).unwrap();
            assert_eq!(q, w[1]);
        }
    }

    #[test]
    fn strictly_decreasing_in_contracting_basin() {
        let m = cubic(-1.0, 0.0, 1.0);
        let s = generate_spiral(&m, 0.5, 0.0, 10_000, 1e-2).unwrap();
        for w in s.points().windows(2) {
            assert!(w[1].r < w[0].r && w[1].r > 0.0);
        }
    }

    #[test]
    fn csv_format_and_roundtrip() {
        let m = cubic(-1.0, 0.5, 1.0);
        let s = generate_spiral(&m, 0.5, 0.0, 5, 1e-3).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "k,r,phi,x,y");
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], "0");
        assert_eq!(first[1].parse::<f64>().unwrap(), 0.5);
        // 17 significant digits survive the round trip bit-for-bit
        for (k, line) in text.lines().skip(1).enumerate() {
            let cols: Vec<f64> = line
                .split(',')
                .skip(1)
                .map(|c| c.parse().unwrap())
                .collect();
            assert_eq!(cols[0], s.points()[k].r);
            assert_eq!(cols[1], s.points()[k].phi);
        }
    }

    #[test]
    fn continuous_sample_two_points() {
        // radii close enough that the angular gap stays below pi/64
        let sys = ContinuousHopfSystem::new(-1.0, 0.0, 1.0, 1).unwrap();
        let s = sample_continuous_spiral(&sys, 0.1000, 0.09998, 2).unwrap();
        assert_eq!(s.len(), 2);
        assert_abs_diff_eq!(s.points()[0].r, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(s.points()[1].r, 0.09998, epsilon = 1e-15);
    }

    #[test]
    fn continuous_angle_closed_form() {
        // Phi(r) = 1/(2 r^2) for a = -1, b = 0, omega = 1, k = 1
        let sys = ContinuousHopfSystem::new(-1.0, 0.0, 1.0, 1).unwrap();
        let s = sample_continuous_spiral(&sys, 0.5, 0.1, 16).unwrap();
        let dphi = s.points().last().unwrap().phi - s.points().first().unwrap().phi;
        assert_abs_diff_eq!(dphi, 50.0 - 1.0 / (2.0 * 0.25), epsilon = 1e-9);
    }

    #[test]
    fn continuous_sample_monotone_and_gap_bounded() {
        let sys = ContinuousHopfSystem::new(-1.0, 1.0, 1.0, 1).unwrap();
        let s = sample_continuous_spiral(&sys, 0.5, 0.05, 32).unwrap();
        for w in s.points().windows(2) {
            assert!(w[1].r < w[0].r);
            assert!(w[1].phi > w[0].phi);
            assert!(w[1].phi - w[0].phi <= DEFAULT_MAX_ANGULAR_GAP * (1.0 + 1e-9));
        }
    }

    #[test]
    fn continuous_radius_angle_power_law() {
        // r = f(phi) ~ phi^(-1/(2k)): fitted log-log slope -0.5 for k = 1
        let sys = ContinuousHopfSystem::new(-1.0, 0.0, 1.0, 1).unwrap();
        let s = sample_continuous_spiral_with_gap(&sys, 0.5, 0.005, 200, 1e9).unwrap();
        let pts = s.points();
        let phi0 = pts[0].phi;
        let tail: Vec<&PolarPoint> = pts.iter().filter(|p| p.phi - phi0 > 50.0).collect();
        let phis: Vec<f64> = tail.iter().map(|p| p.phi - phi0).collect();
        let rs: Vec<f64> = tail.iter().map(|p| p.r).collect();
        let fit = log_log_fit(&phis, &rs, None).unwrap();
        assert!((fit.exponent + 0.5).abs() < 0.01, "slope {}", fit.exponent);
    }

    #[test]
    fn positive_a_rejected_for_sampling() {
        let sys = ContinuousHopfSystem::new(1.0, 0.0, 1.0, 1).unwrap();
        assert!(sample_continuous_spiral(&sys, 0.5, 0.1, 8).is_err());
    }

    #[test]
    fn decay_exponent_alpha_three() {
        let m = cubic(-1.0, 0.0, 1.0);
        let s = generate_spiral(&m, 0.5, 0.0, 1_000_000, 1e-2).unwrap();
        let fit = radial_decay_exponent(&s, DEFAULT_FIT_K_MIN).unwrap();
        assert!((fit.exponent - 0.5).abs() < 0.03, "gamma {}", fit.exponent);
        assert!(fit.is_power_law());
    }

    #[test]
    fn decay_exponent_alpha_five() {
        let m = PolarNormalForm::new(-1.0, 5, 0.0, 1.0).unwrap();
        let s = generate_spiral(&m, 0.5, 0.0, 1_000_000, 0.05).unwrap();
        let fit = radial_decay_exponent(&s, DEFAULT_FIT_K_MIN).unwrap();
        assert!((fit.exponent - 0.25).abs() < 0.03, "gamma {}", fit.exponent);
    }

    #[test]
    fn geometric_decay_fails_power_law_diagnostic() {
        let seq: Vec<f64> = (0..80).map(|k| 0.5 * 0.7f64.powi(k)).collect();
        let fit = radial_decay_exponent_of(&seq, 2).unwrap();
        assert!(!fit.is_power_law(), "r2 = {}", fit.r2);
    }

    #[test]
    fn decay_exponent_stable_under_dropping_prefix() {
        let m = cubic(-1.0, 0.0, 1.0);
        let s = generate_spiral(&m, 0.5, 0.0, 1_000_000, 5e-3).unwrap();
        let radii: Vec<f64> = s.radii().collect();
        let full = radial_decay_exponent_of(&radii, 100).unwrap();
        let half = &radii[radii.len() / 2..];
        // keep the absolute k index by fitting the tail directly
        let ks: Vec<f64> = (radii.len() / 2..radii.len()).map(|k| k as f64).collect();
        let tail_fit = log_log_fit(&ks, half, None).unwrap();
        assert!((full.exponent - (-tail_fit.exponent)).abs() < 0.01);
    }

    #[test]
    fn too_short_for_exponent() {
        let seq = vec![1.0; 50];
        assert!(matches!(
            radial_decay_exponent_of(&seq, 100),
            Err(Error::TooShort { .. })
        ));
    }
}
