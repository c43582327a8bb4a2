//! Center-manifold reduction of planar maps with one multiplier on the unit
//! circle, and the dimension of the lifted 1-D orbit.
//!
//! For `x -> lambda1 x + f(x, y)`, `y -> lambda2 y + g(x, y)` with
//! `lambda1 = ±1`, `|lambda2| < 1` and f, g starting at quadratic order, the
//! manifold is `v = (omega/2) u^2 + ...` and the restriction is the cubic
//! `x -> lambda1 x + (sigma/2) x^2 + c3 x^3` with
//! `sigma = f_xx(0,0)`, `c3 = (delta + 3 a b/(1 - c))/6`,
//! `delta = f_xxx(0,0)`, `a = g_xx(0,0)`, `b = f_xy(0,0)`.
//!
//! The coefficient `c` in the cubic term is taken to be `lambda2` (the usual
//! reduction denominator); it can be overridden.

use crate::dimension::{fit_box_dimension, DimensionEstimate};
use crate::neighborhood::{AreaMethod, PointCloud};
use crate::{Error, Result};
use num_rational::Ratio;
use serde::Serialize;

pub const DEFAULT_FD_STEP: f64 = 1e-4;
pub const DEFAULT_NONDEGENERACY_TOL: f64 = 1e-6;
const FIXED_POINT_TOL: f64 = 1e-12;

/// Bivariate polynomial, stored as `(i, j, coefficient)` terms for x^i y^j.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Poly2 {
    terms: Vec<(u32, u32, f64)>,
}

impl Poly2 {
    pub fn new(mut terms: Vec<(u32, u32, f64)>) -> Self {
        terms.retain(|t| t.2 != 0.0);
        terms.sort_by_key(|t| (t.0, t.1));
        Self { terms }
    }

    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(i, j, c)| c * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }

    pub fn terms(&self) -> &[(u32, u32, f64)] {
        &self.terms
    }

    fn lowest_total_degree(&self) -> Option<u32> {
        self.terms.iter().map(|t| t.0 + t.1).min()
    }
}

/// Planar map split into linear and nonlinear parts:
/// `x -> lambda1 x + f(x, y)`, `y -> lambda2 y + g(x, y)`.
#[derive(Debug, Clone, Serialize)]
pub struct PlanarMapSystem {
    pub lambda1: f64,
    pub lambda2: f64,
    f: Poly2,
    g: Poly2,
}

impl PlanarMapSystem {
    pub fn new(lambda1: f64, lambda2: f64, f: Poly2, g: Poly2) -> Result<Self> {
        if (lambda1.abs() - 1.0).abs() > FIXED_POINT_TOL {
            return Err(Error::InvalidParameter(format!(
                "lambda1 must be +1 or -1, got {lambda1}"
            )));
        }
        if lambda2.abs() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "|lambda2| must be < 1, got {lambda2}"
            )));
        }
        for (name, p) in [("f", &f), ("g", &g)] {
            if p.eval(0.0, 0.0).abs() > FIXED_POINT_TOL {
                return Err(Error::NotAFixedPoint {
                    residual: p.eval(0.0, 0.0).abs(),
                });
            }
            if let Some(deg) = p.lowest_total_degree() {
                if deg < 2 {
                    return Err(Error::InvalidParameter(format!(
                        "nonlinear part {name} contains terms of degree < 2"
                    )));
                }
            }
        }
        Ok(Self {
            lambda1,
            lambda2,
            f,
            g,
        })
    }

    pub fn f(&self) -> &Poly2 {
        &self.f
    }
    pub fn g(&self) -> &Poly2 {
        &self.g
    }

    /// Full map (x, y) -> (x', y').
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.lambda1 * x + self.f.eval(x, y),
            self.lambda2 * y + self.g.eval(x, y),
        )
    }
}

/// Output of the center-manifold reduction.
#[derive(Debug, Clone, Serialize)]
pub struct CenterManifoldReport {
    pub lambda1: f64,
    pub lambda2: f64,
    /// f_xx(0,0)
    pub sigma: f64,
    /// f_xxx(0,0)
    pub delta: f64,
    /// g_xx(0,0)
    pub a_coef: f64,
    /// f_xy(0,0)
    pub b_coef: f64,
    /// Quadratic manifold coefficient: v = (omega/2) u^2 + O(u^3), with
    /// omega = a / (lambda1^2 - lambda2).
    pub omega_cm: f64,
    /// Cubic coefficient of the restriction, (delta + 3 a b/(1 - c)) / 6.
    pub cubic_coef: f64,
    /// The c used in the cubic term (defaults to lambda2).
    pub c_used: f64,
    pub nondegeneracy: NondegeneracyOrder,
    /// 1 - 1/k when the order k is determined.
    #[serde(serialize_with = "crate::dimension::ratio_serde::serialize_opt")]
    pub predicted_dim: Option<Ratio<i64>>,
}

/// Order of nondegeneracy of a 1-D map at its fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NondegeneracyOrder {
    Order(u32),
    Undetermined,
}

/// Cubic 1-D map `x -> linear x + quad x^2 + cubic x^3`; the restriction of
/// a planar system to its center manifold, truncated at third order.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Cubic1D {
    pub linear: f64,
    pub quad: f64,
    pub cubic: f64,
}

impl Cubic1D {
    pub fn eval(&self, x: f64) -> f64 {
        ((self.cubic * x + self.quad) * x + self.linear) * x
    }

    /// n-th derivative at 0 (exact for the cubic polynomial).
    pub fn derivative_at_zero(&self, n: u32) -> f64 {
        match n {
            0 => 0.0,
            1 => self.linear,
            2 => 2.0 * self.quad,
            3 => 6.0 * self.cubic,
            _ => 0.0,
        }
    }
}

/// Center-manifold coefficients by central finite differences at the origin
/// (third derivative Richardson-refined), with `c = lambda2` in the cubic
/// term.
pub fn cm_coefficients(system: &PlanarMapSystem, fd_step: f64) -> Result<CenterManifoldReport> {
    cm_coefficients_with_c(system, fd_step, None)
}

/// As [`cm_coefficients`] with an explicit override for the `c` in
/// `3 a b / (1 - c)`.
pub fn cm_coefficients_with_c(
    system: &PlanarMapSystem,
    fd_step: f64,
    c_override: Option<f64>,
) -> Result<CenterManifoldReport> {
    if !(fd_step > 0.0) || fd_step > 0.1 {
        return Err(Error::InvalidParameter(format!("bad fd step {fd_step}")));
    }
    let h = fd_step;
    let f = |x: f64, y: f64| system.f().eval(x, y);
    let g = |x: f64, y: f64| system.g().eval(x, y);

    let sigma = (f(h, 0.0) - 2.0 * f(0.0, 0.0) + f(-h, 0.0)) / (h * h);
    let a_coef = (g(h, 0.0) - 2.0 * g(0.0, 0.0) + g(-h, 0.0)) / (h * h);
    let b_coef = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);

    let third = |hh: f64| {
        (f(2.0 * hh, 0.0) - 2.0 * f(hh, 0.0) + 2.0 * f(-hh, 0.0) - f(-2.0 * hh, 0.0))
            / (2.0 * hh * hh * hh)
    };
    // Richardson: error O(h^2) per estimate, O(h^4) combined
    let delta = (4.0 * third(h / 2.0) - third(h)) / 3.0;

    let c_used = c_override.unwrap_or(system.lambda2);
    if (1.0 - c_used).abs() < 1e-12 {
        return Err(Error::Degenerate("1 - c vanishes in the cubic term".into()));
    }
    let omega_cm = a_coef / (system.lambda1 * system.lambda1 - system.lambda2);
    let cubic_coef = (delta + 3.0 * a_coef * b_coef / (1.0 - c_used)) / 6.0;

    let restriction = Cubic1D {
        linear: system.lambda1,
        quad: 0.5 * sigma,
        cubic: cubic_coef,
    };
    let nondegeneracy = nondegeneracy_order(&restriction, DEFAULT_NONDEGENERACY_TOL)?;
    let predicted_dim = match nondegeneracy {
        NondegeneracyOrder::Order(k) => Some(Ratio::new(k as i64 - 1, k as i64)),
        NondegeneracyOrder::Undetermined => None,
    };

    Ok(CenterManifoldReport {
        lambda1: system.lambda1,
        lambda2: system.lambda2,
        sigma,
        delta,
        a_coef,
        b_coef,
        omega_cm,
        cubic_coef,
        c_used,
        nondegeneracy,
        predicted_dim,
    })
}

/// The 1-D restriction `x -> lambda1 x + (sigma/2) x^2 + cubic_coef x^3`.
pub fn restriction_map(report: &CenterManifoldReport, lambda1: f64) -> Cubic1D {
    Cubic1D {
        linear: lambda1,
        quad: 0.5 * report.sigma,
        cubic: report.cubic_coef,
    }
}

/// Least k >= 2 with nonvanishing k-th derivative at 0 while all lower ones
/// (from the second on) vanish within `tol`. Requires |map'(0)| = 1.
pub fn nondegeneracy_order(map: &Cubic1D, tol: f64) -> Result<NondegeneracyOrder> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    if (map.derivative_at_zero(1).abs() - 1.0).abs() > tol {
        return Err(Error::NotNonhyperbolic(format!(
            "|map'(0)| = {} is not 1",
            map.derivative_at_zero(1).abs()
        )));
    }
    for k in 2..=3u32 {
        let d = map.derivative_at_zero(k).abs();
        if d > tol {
            return Ok(NondegeneracyOrder::Order(k));
        }
    }
    Ok(NondegeneracyOrder::Undetermined)
}

/// Settings for [`cm_orbit_and_dimension`].
#[derive(Debug, Clone, Serialize)]
pub struct CmOrbitParams {
    pub max_iter: usize,
    pub x_floor: f64,
    pub basin_radius: f64,
    pub eps_min: f64,
    pub eps_max: f64,
    pub rungs: usize,
    pub method: AreaMethod,
    pub mc_samples: usize,
    pub seed: u64,
    pub fd_step: f64,
    pub c_override: Option<f64>,
}

impl Default for CmOrbitParams {
    fn default() -> Self {
        Self {
            max_iter: 200_000,
            x_floor: 1e-4,
            basin_radius: 1.0,
            eps_min: 3e-5,
            eps_max: 1e-3,
            rungs: 12,
            method: AreaMethod::GridRaster,
            mc_samples: crate::neighborhood::DEFAULT_MC_SAMPLES,
            seed: 42,
            fd_step: DEFAULT_FD_STEP,
            c_override: None,
        }
    }
}

/// A 1-D restricted orbit lifted through the quadratic manifold truncation
/// `h(x) = (omega/2) x^2`.
#[derive(Debug, Clone, Serialize)]
pub struct CmLiftedOrbit {
    pub report: CenterManifoldReport,
    pub orbit_1d: Vec<f64>,
    pub lifted: Vec<[f64; 2]>,
}

impl CmLiftedOrbit {
    /// Norm of the last lifted point; the unreached tail stays inside this
    /// disk.
    pub fn nucleus_radius(&self) -> f64 {
        let last = self.lifted.last().unwrap();
        last[0].hypot(last[1])
    }
}

/// A 1-D restricted orbit lifted onto the quadratic manifold truncation,
/// with its fitted dimension and the predicted value.
#[derive(Debug, Clone, Serialize)]
pub struct CmOrbitResult {
    pub report: CenterManifoldReport,
    pub orbit_1d: Vec<f64>,
    pub lifted: Vec<[f64; 2]>,
    pub estimate: DimensionEstimate,
    #[serde(serialize_with = "crate::dimension::ratio_serde::serialize_opt")]
    pub predicted_dim: Option<Ratio<i64>>,
}

/// Reduce, iterate from `x1` until `|x| < x_floor` or `max_iter`, and lift.
pub fn cm_lifted_orbit(
    system: &PlanarMapSystem,
    x1: f64,
    params: &CmOrbitParams,
) -> Result<CmLiftedOrbit> {
    let report = cm_coefficients_with_c(system, params.fd_step, params.c_override)?;
    let map = restriction_map(&report, system.lambda1);

    if x1.abs() >= params.basin_radius {
        return Err(Error::BasinEscape(x1));
    }
    let mut orbit = Vec::new();
    let mut x = x1;
    while orbit.len() < params.max_iter && x.abs() >= params.x_floor {
        orbit.push(x);
        x = map.eval(x);
        if !x.is_finite() || x.abs() > params.basin_radius {
            return Err(Error::BasinEscape(x));
        }
    }
    if orbit.len() < 10 {
        return Err(Error::TooShort {
            have: orbit.len(),
            need: 10,
        });
    }
    let lifted: Vec<[f64; 2]> = orbit
        .iter()
        .map(|&u| [u, 0.5 * report.omega_cm * u * u])
        .collect();
    Ok(CmLiftedOrbit {
        report,
        orbit_1d: orbit,
        lifted,
    })
}

/// Generate the restricted orbit from `x1`, lift it through
/// `h(x) = (omega/2) x^2`, and estimate the box dimension of the lifted
/// planar set (with the unreached tail as a nucleus disk).
pub fn cm_orbit_and_dimension(
    system: &PlanarMapSystem,
    x1: f64,
    params: &CmOrbitParams,
) -> Result<CmOrbitResult> {
    let lifted_orbit = cm_lifted_orbit(system, x1, params)?;
    let nucleus = lifted_orbit.nucleus_radius();
    let cloud = PointCloud::new(lifted_orbit.lifted.clone())?.with_nucleus(Some(nucleus));
    let ladder = cloud.eps_ladder(
        params.eps_min,
        params.eps_max,
        params.rungs,
        params.method,
        params.mc_samples,
        params.seed,
    )?;
    let estimate = fit_box_dimension(&ladder)?;
    let predicted_dim = lifted_orbit.report.predicted_dim;
    Ok(CmOrbitResult {
        report: lifted_orbit.report,
        orbit_1d: lifted_orbit.orbit_1d,
        lifted: lifted_orbit.lifted,
        estimate,
        predicted_dim,
    })
}

/// Fixed-point classification by multiplier moduli.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixedPointClass {
    Hyperbolic,
    Saddle,
    Nonhyperbolic,
}

/// Multipliers of a general planar map at a declared fixed point.
#[derive(Debug, Clone, Serialize)]
pub struct MultiplierReport {
    /// Eigenvalues as (re, im) pairs.
    pub lambda: [(f64, f64); 2],
    pub n0: usize,
    pub n_minus: usize,
    pub n_plus: usize,
    pub class: FixedPointClass,
}

pub const DEFAULT_UNIT_CIRCLE_TOL: f64 = 1e-6;

/// Jacobian eigenvalues via central differences at `fixed_point`, counted
/// by modulus against the unit circle (within `unit_tol`).
pub fn multipliers<F, G>(
    map_x: F,
    map_y: G,
    fixed_point: [f64; 2],
    fd_step: f64,
    unit_tol: f64,
) -> Result<MultiplierReport>
where
    F: Fn(f64, f64) -> f64,
    G: Fn(f64, f64) -> f64,
{
    let [x0, y0] = fixed_point;
    let rx = (map_x(x0, y0) - x0).abs();
    let ry = (map_y(x0, y0) - y0).abs();
    let residual = rx.hypot(ry);
    if residual > 1e-8 {
        return Err(Error::NotAFixedPoint { residual });
    }
    let h = fd_step;
    let j11 = (map_x(x0 + h, y0) - map_x(x0 - h, y0)) / (2.0 * h);
    let j12 = (map_x(x0, y0 + h) - map_x(x0, y0 - h)) / (2.0 * h);
    let j21 = (map_y(x0 + h, y0) - map_y(x0 - h, y0)) / (2.0 * h);
    let j22 = (map_y(x0, y0 + h) - map_y(x0, y0 - h)) / (2.0 * h);

    let tr = j11 + j22;
    let det = j11 * j22 - j12 * j21;
    let disc = tr * tr - 4.0 * det;
    let lambda: [(f64, f64); 2] = if disc >= 0.0 {
        let s = disc.sqrt();
        [((tr + s) / 2.0, 0.0), ((tr - s) / 2.0, 0.0)]
    } else {
        let s = (-disc).sqrt() / 2.0;
        [(tr / 2.0, s), (tr / 2.0, -s)]
    };

    let mut n0 = 0;
    let mut n_minus = 0;
    let mut n_plus = 0;
    for (re, im) in lambda {
        let modulus = re.hypot(im);
        if (modulus - 1.0).abs() <= unit_tol {
            n0 += 1;
        } else if modulus < 1.0 {
            n_minus += 1;
        } else {
            n_plus += 1;
        }
    }
    let class = if n0 > 0 {
        FixedPointClass::Nonhyperbolic
    } else if n_minus > 0 && n_plus > 0 {
        FixedPointClass::Saddle
    } else {
        FixedPointClass::Hyperbolic
    };
    Ok(MultiplierReport {
        lambda,
        n0,
        n_minus,
        n_plus,
        class,
    })
}
