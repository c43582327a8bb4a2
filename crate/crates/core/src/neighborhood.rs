//! Area of ε-neighbourhoods and grid box counts — the raw data behind every
//! dimension fit.
//!
//! The measured set is a finite point cloud plus an optional nucleus disk at
//! the origin. For a discrete spiral the nucleus radius is the radius of the
//! last stored point: every unreached iterate lies inside it, so the tail cut
//! off by the radius floor is replaced by a full disk of radius `rho + eps`.

use crate::orbits::DiscreteSpiral;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;
use std::io::Write;

/// Minimum Monte Carlo sample count accepted per rung.
pub const MIN_MC_SAMPLES: usize = 10_000;

/// Default Monte Carlo samples per ε rung.
pub const DEFAULT_MC_SAMPLES: usize = 200_000;

/// Grid refinement of the raster estimator: cell side is `eps / this`.
pub const GRID_RASTER_REFINE: f64 = 8.0;

/// How one |A_ε| value was estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AreaMethod {
    /// Uniform rejection sampling over the bounding disk. Unbiased; reports
    /// a binomial standard error.
    MonteCarlo,
    /// Sum of disk areas minus pairwise lens intersections of neighbour
    /// pairs (inclusion–exclusion depth 2). Fast, deterministic, and biased:
    /// it undercounts wherever three or more disks overlap.
    PairwiseLens,
    /// Deterministic pixel raster at cell side ε/8.
    GridRaster,
}

impl AreaMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            AreaMethod::MonteCarlo => "monte-carlo",
            AreaMethod::PairwiseLens => "pairwise-lens",
            AreaMethod::GridRaster => "grid-raster",
        }
    }
}

/// One (ε, |A_ε|) measurement.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EpsAreaSample {
    pub eps: f64,
    pub area: f64,
    /// Monte Carlo standard error; 0 for deterministic methods.
    pub stderr: f64,
    pub method: AreaMethod,
    /// Points whose centers lie outside the nucleus disk at this ε.
    pub n_active_points: usize,
}

/// Occupied-cell count of the axis-aligned grid of side `delta`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoxCountSample {
    pub delta: f64,
    pub count: usize,
}

/// A finite planar point set with an optional nucleus disk at the origin.
#[derive(Debug, Clone)]
pub struct PointCloud {
    points: Vec<[f64; 2]>,
    nucleus_radius: Option<f64>,
}

impl PointCloud {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Degenerate("empty point set".into()));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite point".into()));
        }
        Ok(Self {
            points,
            nucleus_radius: None,
        })
    }

    /// Replace the nucleus disk radius (`None` disables it).
    pub fn with_nucleus(mut self, rho: Option<f64>) -> Self {
        self.nucleus_radius = rho.filter(|r| *r > 0.0);
        self
    }

    /// Point cloud of a spiral with the nucleus rule applied.
    pub fn from_spiral(spiral: &DiscreteSpiral) -> Self {
        Self {
            points: spiral.to_cartesian(),
            nucleus_radius: Some(spiral.last_radius()).filter(|r| *r > 0.0),
        }
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }
    pub fn nucleus_radius(&self) -> Option<f64> {
        self.nucleus_radius
    }

    fn max_norm(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p[0].hypot(p[1]))
            .fold(self.nucleus_radius.unwrap_or(0.0), f64::max)
    }

    fn n_active(&self, eps: f64) -> usize {
        match self.nucleus_radius {
            None => self.points.len(),
            Some(rho) => self
                .points
                .iter()
                .filter(|p| p[0].hypot(p[1]) > rho + eps)
                .count(),
        }
    }

    /// |A_ε| by the chosen method. Monte Carlo uses substream 0 of `seed`;
    /// ladder rungs use their own substreams via [`PointCloud::eps_area_rung`].
    pub fn eps_area(
        &self,
        eps: f64,
        method: AreaMethod,
        mc_samples: usize,
        seed: u64,
    ) -> Result<EpsAreaSample> {
        self.eps_area_rung(eps, method, mc_samples, seed, 0)
    }

    /// |A_ε| with the Monte Carlo stream derived from `(seed, rung)`.
    /// Results are identical no matter in which order rungs are evaluated.
    pub fn eps_area_rung(
        &self,
        eps: f64,
        method: AreaMethod,
        mc_samples: usize,
        seed: u64,
        rung: u64,
    ) -> Result<EpsAreaSample> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidParameter(format!("bad eps {eps}")));
        }
        let n_active_points = self.n_active(eps);
        match method {
            AreaMethod::MonteCarlo => {
                if mc_samples < MIN_MC_SAMPLES {
                    return Err(Error::InvalidParameter(format!(
                        "need at least {MIN_MC_SAMPLES} Monte Carlo samples, got {mc_samples}"
                    )));
                }
                let (area, stderr) = self.mc_area(eps, mc_samples, seed, rung);
                Ok(EpsAreaSample {
                    eps,
                    area,
                    stderr,
                    method,
                    n_active_points,
                })
            }
            AreaMethod::PairwiseLens => Ok(EpsAreaSample {
                eps,
                area: self.lens_area(eps),
                stderr: 0.0,
                method,
                n_active_points,
            }),
            AreaMethod::GridRaster => Ok(EpsAreaSample {
                eps,
                area: self.raster_area(eps),
                stderr: 0.0,
                method,
                n_active_points,
            }),
        }
    }

    /// Geometric ε-ladder between `eps_min` and `eps_max` (inclusive).
    pub fn eps_ladder(
        &self,
        eps_min: f64,
        eps_max: f64,
        rungs: usize,
        method: AreaMethod,
        mc_samples: usize,
        seed: u64,
    ) -> Result<Vec<EpsAreaSample>> {
        if !(0.0 < eps_min && eps_min < eps_max) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < eps_min < eps_max, got {eps_min}, {eps_max}"
            )));
        }
        if rungs < 5 {
            return Err(Error::InvalidParameter(format!(
                "need at least 5 rungs, got {rungs}"
            )));
        }
        crate::fit::geomspace(eps_min, eps_max, rungs)
            .iter()
            .enumerate()
            .map(|(i, &eps)| self.eps_area_rung(eps, method, mc_samples, seed, i as u64))
            .collect()
    }

    fn mc_area(&self, eps: f64, samples: usize, seed: u64, rung: u64) -> (f64, f64) {
        let bound = self.max_norm() + eps;
        let bound_area = PI * bound * bound;
        let hash = SpatialHash::build(&self.points, eps);
        let nucleus_reach = self.nucleus_radius.map(|rho| rho + eps);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(rung);
        let mut hits = 0usize;
        for _ in 0..samples {
            let u: f64 = rng.gen();
            let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
            let rr = bound * u.sqrt();
            let x = rr * theta.cos();
            let y = rr * theta.sin();
            let in_nucleus = nucleus_reach.is_some_and(|reach| rr <= reach);
            if in_nucleus || hash.any_within(x, y, eps) {
                hits += 1;
            }
        }
        let p = hits as f64 / samples as f64;
        let area = bound_area * p;
        let stderr = bound_area * (p * (1.0 - p) / samples as f64).sqrt();
        (area, stderr)
    }

    fn lens_area(&self, eps: f64) -> f64 {
        let n = self.points.len();
        let mut area = n as f64 * PI * eps * eps;
        let hash = SpatialHash::build(&self.points, 2.0 * eps);
        for (i, p) in self.points.iter().enumerate() {
            for j in hash.neighbors_within(p[0], p[1], 2.0 * eps) {
                if j > i {
                    let q = self.points[j];
                    let d = (p[0] - q[0]).hypot(p[1] - q[1]);
                    area -= circle_intersection_area(eps, eps, d);
                }
            }
        }
        if let Some(rho) = self.nucleus_radius {
            let big = rho + eps;
            area += PI * big * big;
            for p in &self.points {
                let d = p[0].hypot(p[1]);
                if d < big + eps {
                    area -= circle_intersection_area(big, eps, d);
                }
            }
        }
        // depth-2 inclusion-exclusion can go below the one-disk floor in
        // heavily overlapped regions; the union never does
        area.max(PI * eps * eps)
    }

    fn raster_area(&self, eps: f64) -> f64 {
        let h = eps / GRID_RASTER_REFINE;
        let reach = (eps / h).ceil() as i64;
        let mut cells: HashSet<(i64, i64)> = HashSet::new();
        let eps2 = eps * eps;
        for p in &self.points {
            let ci = (p[0] / h).floor() as i64;
            let cj = (p[1] / h).floor() as i64;
            for di in -reach..=reach {
                for dj in -reach..=reach {
                    let cx = (ci + di) as f64 * h + 0.5 * h;
                    let cy = (cj + dj) as f64 * h + 0.5 * h;
                    let dx = cx - p[0];
                    let dy = cy - p[1];
                    if dx * dx + dy * dy <= eps2 {
                        cells.insert((ci + di, cj + dj));
                    }
                }
            }
        }
        if let Some(rho) = self.nucleus_radius {
            let big = rho + eps;
            let reach = (big / h).ceil() as i64;
            let big2 = big * big;
            for di in -reach..=reach {
                for dj in -reach..=reach {
                    let cx = di as f64 * h + 0.5 * h;
                    let cy = dj as f64 * h + 0.5 * h;
                    if cx * cx + cy * cy <= big2 {
                        cells.insert((di, dj));
                    }
                }
            }
        }
        cells.len() as f64 * h * h
    }

    /// Occupied cells of the grid of side `delta` anchored at the origin,
    /// including every cell met by the nucleus disk.
    pub fn box_count(&self, delta: f64) -> Result<BoxCountSample> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("bad delta {delta}")));
        }
        let mut cells: HashSet<(i64, i64)> = HashSet::new();
        for p in &self.points {
            cells.insert(((p[0] / delta).floor() as i64, (p[1] / delta).floor() as i64));
        }
        if let Some(rho) = self.nucleus_radius {
            let reach = (rho / delta).ceil() as i64 + 1;
            let rho2 = rho * rho;
            for i in -reach..=reach {
                for j in -reach..=reach {
                    // nearest point of cell [i,i+1)x[j,j+1) (in delta units)
                    let nx = clamp_to_interval(0.0, i as f64 * delta, (i + 1) as f64 * delta);
                    let ny = clamp_to_interval(0.0, j as f64 * delta, (j + 1) as f64 * delta);
                    if nx * nx + ny * ny <= rho2 {
                        cells.insert((i, j));
                    }
                }
            }
        }
        Ok(BoxCountSample {
            delta,
            count: cells.len(),
        })
    }
}

fn clamp_to_interval(v: f64, lo: f64, hi: f64) -> f64 {
    v.max(lo).min(hi)
}

/// |A_ε| of a spiral (points at radius >= floor, plus the nucleus disk).
pub fn eps_area(
    spiral: &DiscreteSpiral,
    eps: f64,
    method: AreaMethod,
    mc_samples: usize,
    seed: u64,
) -> Result<EpsAreaSample> {
    PointCloud::from_spiral(spiral).eps_area(eps, method, mc_samples, seed)
}

/// Geometric ε-ladder for a spiral; deterministic given `seed`.
pub fn eps_ladder(
    spiral: &DiscreteSpiral,
    eps_min: f64,
    eps_max: f64,
    rungs: usize,
    method: AreaMethod,
    mc_samples: usize,
    seed: u64,
) -> Result<Vec<EpsAreaSample>> {
    PointCloud::from_spiral(spiral).eps_ladder(eps_min, eps_max, rungs, method, mc_samples, seed)
}

/// Grid box count for a spiral (nucleus rule applied).
pub fn box_count(spiral: &DiscreteSpiral, delta: f64) -> Result<BoxCountSample> {
    PointCloud::from_spiral(spiral).box_count(delta)
}

/// Length of the longest orbit prefix whose points are pairwise more than
/// `2 eps` apart, found by inserting points in orbit order into a spatial
/// hash with cell side `2 eps` (disks of radius ε intersect only if their
/// centers are within 2ε).
pub fn overlap_count_tail(spiral: &DiscreteSpiral, eps: f64) -> usize {
    let pts = spiral.to_cartesian();
    let cell = 2.0 * eps;
    let mut hash: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (m, p) in pts.iter().enumerate() {
        let ci = (p[0] / cell).floor() as i64;
        let cj = (p[1] / cell).floor() as i64;
        for di in -1..=1 {
            for dj in -1..=1 {
                if let Some(ix) = hash.get(&(ci + di, cj + dj)) {
                    for &j in ix {
                        let q = pts[j];
                        if (p[0] - q[0]).hypot(p[1] - q[1]) <= 2.0 * eps {
                            return m;
                        }
                    }
                }
            }
        }
        hash.entry((ci, cj)).or_default().push(m);
    }
    pts.len()
}

/// Exact intersection area of two disks with radii `r1`, `r2` at center
/// distance `d`.
pub fn circle_intersection_area(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    let rmin = r1.min(r2);
    if d <= (r1 - r2).abs() {
        return PI * rmin * rmin;
    }
    let d2 = d * d;
    let a1 = ((d2 + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0);
    let a2 = ((d2 + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0);
    let t = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    r1 * r1 * a1.acos() + r2 * r2 * a2.acos() - 0.5 * t.max(0.0).sqrt()
}

/// CSV export of a ladder: `eps,area,stderr,method,n_active`.
pub fn ladder_to_csv<W: Write>(ladder: &[EpsAreaSample], mut w: W) -> std::io::Result<()> {
    writeln!(w, "eps,area,stderr,method,n_active")?;
    for s in ladder {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{},{}",
            s.eps,
            s.area,
            s.stderr,
            s.method.as_str(),
            s.n_active_points
        )?;
    }
    Ok(())
}

fn grid_hash_key(x: f64, y: f64, cell: f64) -> (i64, i64) {
    ((x / cell).floor() as i64, (y / cell).floor() as i64)
}

struct SpatialHash<'a> {
    cell: f64,
    map: HashMap<(i64, i64), Vec<u32>>,
    points: &'a [[f64; 2]],
}

impl<'a> SpatialHash<'a> {
    fn build(points: &'a [[f64; 2]], cell: f64) -> Self {
        let mut map: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            map.entry(grid_hash_key(p[0], p[1], cell))
                .or_default()
                .push(i as u32);
        }
        Self { cell, map, points }
    }

    /// Is any point within `radius <= cell` of (x, y)?
    fn any_within(&self, x: f64, y: f64, radius: f64) -> bool {
        let (ci, cj) = grid_hash_key(x, y, self.cell);
        let r2 = radius * radius;
        for di in -1..=1 {
            for dj in -1..=1 {
                if let Some(ix) = self.map.get(&(ci + di, cj + dj)) {
                    for &i in ix {
                        let p = self.points[i as usize];
                        let dx = x - p[0];
                        let dy = y - p[1];
                        if dx * dx + dy * dy <= r2 {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    /// Indices of points within `radius <= cell` of (x, y).
    fn neighbors_within(&self, x: f64, y: f64, radius: f64) -> Vec<usize> {
        let (ci, cj) = grid_hash_key(x, y, self.cell);
        let r2 = radius * radius;
        let mut out = Vec::new();
        for di in -1..=1 {
            for dj in -1..=1 {
                if let Some(ix) = self.map.get(&(ci + di, cj + dj)) {
                    for &i in ix {
                        let p = self.points[i as usize];
                        let dx = x - p[0];
                        let dy = y - p[1];
                        if dx * dx + dy * dy <= r2 {
                            out.push(i as usize);
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal_forms::PolarNormalForm;
    use crate::orbits::generate_spiral;
    use approx::assert_abs_diff_eq;

    fn single_point() -> PointCloud {
        PointCloud::new(vec![[1.0, 0.0]]).unwrap()
    }

    #[test]
    fn single_disk_area() {
        let pc = single_point();
        let eps = 0.2;
        let exact = PI * eps * eps;
        let lens = pc.eps_area(eps, AreaMethod::PairwiseLens, 0, 0).unwrap();
        assert_abs_diff_eq!(lens.area, exact, epsilon = 1e-12);
        let raster = pc.eps_area(eps, AreaMethod::GridRaster, 0, 0).unwrap();
        assert!((raster.area - exact).abs() / exact < 0.05);
        let mc = pc
            .eps_area(eps, AreaMethod::MonteCarlo, 200_000, 7)
            .unwrap();
        assert!((mc.area - exact).abs() < 3.0 * mc.stderr);
        assert_eq!(mc.n_active_points, 1);
    }

    #[test]
    fn two_disjoint_disks() {
        let eps = 0.1;
        let pc = PointCloud::new(vec![[0.0, 0.0], [3.0 * eps, 0.0]]).unwrap();
        let lens = pc.eps_area(eps, AreaMethod::PairwiseLens, 0, 0).unwrap();
        assert_abs_diff_eq!(lens.area, 2.0 * PI * eps * eps, epsilon = 1e-12);
    }

    #[test]
    fn two_overlapping_disks_match_analytic_lens() {
        // centers eps apart: union = eps^2 (4 pi / 3 + sqrt(3)/2)
        let eps = 0.1;
        let exact = eps * eps * (4.0 * PI / 3.0 + 3f64.sqrt() / 2.0);
        let pc = PointCloud::new(vec![[0.0, 0.0], [eps, 0.0]]).unwrap();
        let lens = pc.eps_area(eps, AreaMethod::PairwiseLens, 0, 0).unwrap();
        assert_abs_diff_eq!(lens.area, exact, epsilon = 1e-12);
        let mc = pc
            .eps_area(eps, AreaMethod::MonteCarlo, 400_000, 11)
            .unwrap();
        assert!(
            (mc.area - exact).abs() < 3.0 * mc.stderr,
            "mc {} vs exact {} (stderr {})",
            mc.area,
            exact,
            mc.stderr
        );
    }

    #[test]
    fn mc_sample_floor_enforced() {
        let pc = single_point();
        assert!(pc.eps_area(0.1, AreaMethod::MonteCarlo, 5000, 0).is_err());
    }

    #[test]
    fn ladder_geometric_spacing_and_determinism() {
        let pc = single_point();
        let lad = pc
            .eps_ladder(1e-3, 1e-1, 5, AreaMethod::MonteCarlo, 20_000, 42)
            .unwrap();
        for (i, s) in lad.iter().enumerate() {
            assert_abs_diff_eq!(s.eps, 1e-3 * 10f64.powf(0.5 * i as f64), epsilon = 1e-12);
        }
        let again = pc
            .eps_ladder(1e-3, 1e-1, 5, AreaMethod::MonteCarlo, 20_000, 42)
            .unwrap();
        for (a, b) in lad.iter().zip(&again) {
            assert_eq!(a.area.to_bits(), b.area.to_bits());
            assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
        }
    }

    #[test]
    fn ladder_areas_nondecreasing() {
        let m = PolarNormalForm::new(-1.0, 3, 0.0, 1.0).unwrap();
        let s = generate_spiral(&m, 0.5, 0.0, 100_000, 1e-2).unwrap();
        let lad = eps_ladder(&s, 2e-3, 5e-2, 8, AreaMethod::MonteCarlo, 50_000, 3).unwrap();
        for w in lad.windows(2) {
            let slack = 3.0 * (w[0].stderr + w[1].stderr);
            assert!(w[1].area + slack >= w[0].area);
        }
    }

    #[test]
    fn area_bounded_by_disjoint_union_without_nucleus() {
        let m = PolarNormalForm::new(-1.0, 3, 0.0, 1.0).unwrap();
        let s = generate_spiral(&m, 0.5, 0.0, 2_000, 1e-2).unwrap();
        let pc = PointCloud::new(s.to_cartesian()).unwrap();
        let eps = 5e-3;
        let est = pc
            .eps_area(eps, AreaMethod::MonteCarlo, 100_000, 5)
            .unwrap();
        let cap = s.len() as f64 * PI * eps * eps;
        assert!(est.area <= cap + 3.0 * est.stderr);
    }

    #[test]
    fn prefix_subset_monotonicity() {
        let m = PolarNormalForm::new(-1.0, 3, 1.0, 1.0).unwrap();
        let s = generate_spiral(&m, 0.5, 0.0, 20_000, 5e-3).unwrap();
        let all = PointCloud::new(s.to_cartesian()).unwrap();
        let prefix = PointCloud::new(s.to_cartesian()[..s.len() / 3].to_vec()).unwrap();
        let eps = 4e-3;
        let a_all = all
            .eps_area(eps, AreaMethod::MonteCarlo, 200_000, 9)
            .unwrap();
        let a_pre = prefix
            .eps_area(eps, AreaMethod::MonteCarlo, 200_000, 9)
            .unwrap();
        assert!(a_pre.area <= a_all.area + 3.0 * (a_all.stderr + a_pre.stderr));
    }

    #[test]
    fn stderr_scales_as_inverse_sqrt_samples() {
        let eps = 0.1;
        let pc = PointCloud::new(vec![[0.0, 0.0], [eps, 0.0]]).unwrap();
        let s1 = pc
            .eps_area(eps, AreaMethod::MonteCarlo, 50_000, 21)
            .unwrap();
        let s4 = pc
            .eps_area(eps, AreaMethod::MonteCarlo, 200_000, 21)
            .unwrap();
        let ratio = s4.stderr / s1.stderr;
        assert!(ratio > 0.4 && ratio < 0.6, "ratio {ratio}");
    }

    #[test]
    fn nucleus_disk_is_counted() {
        let pc = PointCloud::new(vec![[0.5, 0.0]])
            .unwrap()
            .with_nucleus(Some(0.2));
        let eps = 0.01;
        let lens = pc.eps_area(eps, AreaMethod::PairwiseLens, 0, 0).unwrap();
        let expect = PI * eps * eps + PI * 0.21 * 0.21;
        assert_abs_diff_eq!(lens.area, expect, epsilon = 1e-12);
        assert_eq!(lens.n_active_points, 1);
        let pc2 = PointCloud::new(vec![[0.05, 0.0]])
            .unwrap()
            .with_nucleus(Some(0.2));
        assert_eq!(
            pc2.eps_area(eps, AreaMethod::GridRaster, 0, 0)
                .unwrap()
                .n_active_points,
            0
        );
    }

    #[test]
    fn box_count_examples() {
        let one = PointCloud::new(vec![[0.3, 0.4]]).unwrap();
        assert_eq!(one.box_count(1.0).unwrap().count, 1);

        let two = PointCloud::new(vec![[0.05, 0.0], [0.15, 0.0]]).unwrap();
        assert_eq!(two.box_count(0.1).unwrap().count, 2);
    }

    #[test]
    fn box_count_nonincreasing_in_delta() {
        let m = PolarNormalForm::new(-1.0, 3, 1.0, 1.0).unwrap();
        let s = generate_spiral(&m, 0.5, 0.0, 20_000, 5e-3).unwrap();
        let pc = PointCloud::from_spiral(&s);
        let mut prev = usize::MAX;
        for delta in crate::fit::geomspace(2e-3, 5e-2, 8) {
            let c = pc.box_count(delta).unwrap().count;
            assert!(c <= prev);
            prev = c;
        }
    }

    #[test]
    fn box_count_covers_nucleus() {
        let pc = PointCloud::new(vec![[0.5, 0.0]])
            .unwrap()
            .with_nucleus(Some(0.1));
        // nucleus disk of radius 0.1 at origin meets 4 cells of side 0.1
        // per quadrant ring; exact count: cells intersecting the disk
        let c = pc.box_count(0.1).unwrap().count;
        assert!(c > 4, "count {c}");
    }

    #[test]
    fn overlap_count_tail_basics() {
        let m = PolarNormalForm::new(-1.0, 3, 0.0, 1.0).unwrap();
        let s = generate_spiral(&m, 0.5, 0.0, 400, 1e-2).unwrap();
        // eps larger than half the first inter-point gap: conflict at once
        let first_gap = s.points()[0].distance(&s.points()[1]);
        assert_eq!(overlap_count_tail(&s, 0.51 * first_gap), 1);
        // eps so small nothing conflicts within the stored range
        assert_eq!(overlap_count_tail(&s, 1e-9), s.len());
    }

    #[test]
    fn circle_intersection_limits() {
        assert_abs_diff_eq!(circle_intersection_area(1.0, 1.0, 2.0), 0.0);
        assert_abs_diff_eq!(circle_intersection_area(1.0, 1.0, 0.0), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(
            circle_intersection_area(2.0, 0.5, 0.1),
            PI * 0.25,
            epsilon = 1e-12
        );
        // half-overlap value used in the two-disk oracle
        let lens = circle_intersection_area(1.0, 1.0, 1.0);
        assert_abs_diff_eq!(lens, 2.0 * PI / 3.0 - 3f64.sqrt() / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn ladder_csv_format() {
        let pc = single_point();
        let lad = pc
            .eps_ladder(1e-2, 1e-1, 5, AreaMethod::PairwiseLens, 0, 0)
            .unwrap();
        let mut buf = Vec::new();
        ladder_to_csv(&lad, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("eps,area,stderr,method,n_active\n"));
        assert_eq!(text.lines().count(), 6);
        assert!(text.contains("pairwise-lens"));
    }
}
