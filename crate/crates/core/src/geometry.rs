//! Poisson transmitter fields on a square window, receiver placement and
//! interior (guard-region) sampling.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn distance_sq(self, other: Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn distance(self, other: Point2) -> f64 {
        self.distance_sq(other).sqrt()
    }
}

/// Square simulation window with an interior sampling square.
///
/// Transmitters are deployed over `[outer_min, outer_max)²`; only those in
/// `[inner_min, inner_max)²` count towards capacity, while interference is
/// always collected from the whole outer square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimWindow {
    outer_min: f64,
    outer_max: f64,
    inner_min: f64,
    inner_max: f64,
}

impl SimWindow {
    pub fn new(outer_min: f64, outer_max: f64, inner_min: f64, inner_max: f64) -> Result<Self> {
        let all_finite = [outer_min, outer_max, inner_min, inner_max]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidWindow("corners must be finite".into()));
        }
        if !(outer_min < inner_min && inner_min < inner_max && inner_max < outer_max) {
            return Err(Error::InvalidWindow(format!(
                "need outer_min < inner_min < inner_max < outer_max, got \
                 {outer_min} / {inner_min} / {inner_max} / {outer_max}"
            )));
        }
        Ok(SimWindow {
            outer_min,
            outer_max,
            inner_min,
            inner_max,
        })
    }

    pub fn outer_min(&self) -> f64 {
        self.outer_min
    }
    pub fn outer_max(&self) -> f64 {
        self.outer_max
    }
    pub fn inner_min(&self) -> f64 {
        self.inner_min
    }
    pub fn inner_max(&self) -> f64 {
        self.inner_max
    }

    pub fn outer_side(&self) -> f64 {
        self.outer_max - self.outer_min
    }

    pub fn outer_area(&self) -> f64 {
        self.outer_side() * self.outer_side()
    }

    /// Area used to normalise capacity counts (m²).
    pub fn inner_area(&self) -> f64 {
        let side = self.inner_max - self.inner_min;
        side * side
    }

    /// Half-open membership test for the interior square.
    pub fn in_interior(&self, p: Point2) -> bool {
        let inside = |v: f64| v >= self.inner_min && v < self.inner_max;
        inside(p.x) && inside(p.y)
    }

    fn in_outer(&self, p: Point2) -> bool {
        let inside = |v: f64| v >= self.outer_min && v <= self.outer_max;
        inside(p.x) && inside(p.y)
    }
}

impl Default for SimWindow {
    /// 600 m square with the [200, 400)² interior.
    fn default() -> Self {
        SimWindow {
            outer_min: 0.0,
            outer_max: 600.0,
            inner_min: 200.0,
            inner_max: 400.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub positions: Vec<Point2>,
}

impl PointSet {
    pub fn new(positions: Vec<Point2>) -> Self {
        PointSet { positions }
    }

    pub fn count(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// First `n` points.
    pub fn prefix(&self, n: usize) -> PointSet {
        PointSet::new(self.positions[..n].to_vec())
    }
}

/// Poisson field together with the density level at which each point
/// appears.
///
/// Points are generated in order of increasing level; the first `k` points
/// with level `<= λ` form a homogeneous PPP of intensity `λ`. Thinning by
/// level therefore couples fields of different densities drawn from the same
/// stream.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LeveledPoints {
    pub points: PointSet,
    pub levels: Vec<f64>,
}

impl LeveledPoints {
    /// Number of points present at intensity `density`.
    pub fn count_at(&self, density: f64) -> usize {
        self.levels.partition_point(|&l| l <= density)
    }
}

fn check_density(density: f64) -> Result<()> {
    if !(density >= 0.0) || !density.is_finite() {
        return Err(Error::param(
            "density",
            format!("must be finite and nonnegative, got {density}"),
        ));
    }
    Ok(())
}

/// Samples a PPP of intensity `density` (points per m²) over the outer square
/// and records each point's appearance level.
pub fn sample_leveled_ppp<R: Rng + ?Sized>(
    density: f64,
    window: &SimWindow,
    rng: &mut R,
) -> Result<LeveledPoints> {
    check_density(density)?;
    let area = window.outer_area();
    if !(area > 0.0) {
        return Err(Error::InvalidWindow("zero-area window".into()));
    }
    let side = window.outer_side();
    let mut out = LeveledPoints::default();
    if density == 0.0 {
        return Ok(out);
    }
    let mut level = 0.0;
    loop {
        // Arrivals of a rate-`area` Poisson process along the density axis.
        let gap: f64 = Exp1.sample(rng);
        level += gap / area;
        if level > density {
            break;
        }
        let x = window.outer_min + side * rng.random::<f64>();
        let y = window.outer_min + side * rng.random::<f64>();
        out.points.positions.push(Point2::new(x, y));
        out.levels.push(level);
    }
    Ok(out)
}

/// Samples a homogeneous PPP of intensity `density` over the outer square.
pub fn sample_ppp<R: Rng + ?Sized>(
    density: f64,
    window: &SimWindow,
    rng: &mut R,
) -> Result<PointSet> {
    sample_leveled_ppp(density, window, rng).map(|l| l.points)
}

/// Places one receiver per transmitter at distance `link_distance` and a
/// uniform angle. Receivers of edge transmitters may sit up to
/// `link_distance` outside the window.
pub fn place_receivers<R: Rng + ?Sized>(
    tx: &PointSet,
    link_distance: f64,
    rng: &mut R,
) -> Result<PointSet> {
    if !(link_distance > 0.0) || !link_distance.is_finite() {
        return Err(Error::param(
            "link_distance",
            format!("must be positive and finite, got {link_distance}"),
        ));
    }
    let positions = tx
        .positions
        .iter()
        .map(|p| {
            let theta = 2.0 * PI * rng.random::<f64>();
            let (s, c) = theta.sin_cos();
            Point2::new(p.x + link_distance * c, p.y + link_distance * s)
        })
        .collect();
    Ok(PointSet::new(positions))
}

/// `true` for transmitters inside the half-open interior square.
pub fn interior_mask(tx: &PointSet, window: &SimWindow) -> Vec<bool> {
    tx.positions.iter().map(|&p| window.in_interior(p)).collect()
}

/// `true` when every point lies in the closed outer square.
pub fn within_outer(points: &PointSet, window: &SimWindow) -> bool {
    points.positions.iter().all(|&p| window.in_outer(p))
}
