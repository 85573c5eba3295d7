//! Planar points and polylines, arc-length utilities and rigid alignment.
//!
//! Coordinates are meters in a projected, planar frame. Nothing in here
//! knows about geodesy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of points used to build index correspondences for alignment fits.
pub const ALIGN_NPTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y, t: None }
    }

    pub const fn with_time(x: f64, y: f64, t: f64) -> Self {
        Point { x, y, t: Some(t) }
    }

    /// Spatial equality, timestamps ignored.
    pub fn same_position(&self, other: &Point) -> bool {
        self.x == other.x && self.y == other.y
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Point {
        Point {
            x: self.x + dx,
            y: self.y + dy,
            t: self.t,
        }
    }

    pub(crate) fn dist2(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub(crate) fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// The point-to-point distance used by matchers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Norm {
    L1,
    #[default]
    L2,
    LInf,
}

pub fn point_distance(a: &Point, b: &Point, norm: Norm) -> f64 {
    let dx = (a.x - b.x).abs();
    let dy = (a.y - b.y).abs();
    match norm {
        Norm::L1 => dx + dy,
        Norm::L2 => dx.hypot(dy),
        Norm::LInf => dx.max(dy),
    }
}

/// An ordered polyline of at least two points.
///
/// Consecutive duplicates are allowed here (aggregation can legitimately
/// produce them); [`Trajectory::cleaned`] drops them for ingested data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub id: String,
    points: Vec<Point>,
}

impl Trajectory {
    pub fn new(id: impl Into<String>, points: Vec<Point>) -> Result<Self> {
        let id = id.into();
        if points.len() < 2 {
            return Err(Error::InvalidTrajectory(format!(
                "'{id}' has {} point(s), at least 2 required",
                points.len()
            )));
        }
        if let Some(k) = points.iter().position(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidTrajectory(format!(
                "'{id}' has a non-finite coordinate at index {k}"
            )));
        }
        let timed = points.iter().filter(|p| p.t.is_some()).count();
        if timed != 0 && timed != points.len() {
            return Err(Error::InvalidTrajectory(format!(
                "'{id}' mixes timestamped and untimestamped points"
            )));
        }
        if timed != 0 {
            for (k, w) in points.windows(2).enumerate() {
                let (a, b) = (w[0].t.unwrap(), w[1].t.unwrap());
                if !a.is_finite() || !b.is_finite() || b < a {
                    return Err(Error::InvalidTrajectory(format!(
                        "'{id}' timestamps decrease between index {k} and {}",
                        k + 1
                    )));
                }
            }
        }
        Ok(Trajectory { id, points })
    }

    /// Like [`Trajectory::new`] after dropping exactly repeated consecutive positions.
    pub fn cleaned(id: impl Into<String>, mut points: Vec<Point>) -> Result<Self> {
        points.dedup_by(|b, a| a.same_position(b));
        Trajectory::new(id, points)
    }

    pub fn from_xy(id: impl Into<String>, xy: &[(f64, f64)]) -> Result<Self> {
        Trajectory::new(id, xy.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_timestamps(&self) -> bool {
        self.points[0].t.is_some()
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(&w[1])).sum()
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// Applies `f` to every point. The result is re-validated.
    pub fn map_points(&self, f: impl FnMut(&Point) -> Point) -> Result<Trajectory> {
        Trajectory::new(self.id.clone(), self.points.iter().map(f).collect())
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Trajectory {
        Trajectory {
            id: self.id.clone(),
            points: self.points.iter().map(|p| p.translated(dx, dy)).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Trajectory {
        Trajectory {
            id: self.id.clone(),
            points: self
                .points
                .iter()
                .map(|p| Point {
                    x: p.x * factor,
                    y: p.y * factor,
                    t: p.t,
                })
                .collect(),
        }
    }

    /// Bit-exact coordinate key, used for cycle detection.
    pub fn coordinate_key(&self) -> Vec<(u64, u64)> {
        self.points
            .iter()
            .map(|p| (p.x.to_bits(), p.y.to_bits()))
            .collect()
    }
}

/// Cumulative L2 arc length at every vertex, starting at 0.
pub fn curvilinear_abscissa(traj: &Trajectory) -> Vec<f64> {
    let mut s = Vec::with_capacity(traj.len());
    let mut acc = 0.0;
    s.push(acc);
    for w in traj.points().windows(2) {
        acc += w[0].dist(&w[1]);
        s.push(acc);
    }
    s
}

/// Places `npts` points at equal arc-length spacing along `traj`, with linear
/// interpolation inside segments. Endpoints are copied exactly.
pub fn resample(traj: &Trajectory, npts: usize) -> Result<Trajectory> {
    if npts < 2 {
        return Err(Error::InvalidInput(format!(
            "resample needs at least 2 points, got {npts}"
        )));
    }
    let s = curvilinear_abscissa(traj);
    let total = *s.last().unwrap();
    if !(total > 0.0) {
        return Err(Error::DegenerateGeometry(format!(
            "'{}' has zero length and cannot be resampled",
            traj.id
        )));
    }
    let pts = traj.points();
    let last = pts.len() - 1;
    let mut out = Vec::with_capacity(npts);
    out.push(pts[0]);
    let mut seg = 0;
    for k in 1..npts - 1 {
        let target = total * k as f64 / (npts - 1) as f64;
        while seg + 1 < last && s[seg + 1] <= target {
            seg += 1;
        }
        let len = s[seg + 1] - s[seg];
        let (a, b) = (&pts[seg], &pts[seg + 1]);
        let u = if len > 0.0 {
            ((target - s[seg]) / len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(Point {
            x: a.x + u * (b.x - a.x),
            y: a.y + u * (b.y - a.y),
            t: a.t.zip(b.t).map(|(ta, tb)| ta + u * (tb - ta)),
        });
    }
    out.push(pts[last]);
    Trajectory::new(traj.id.clone(), out)
}

/// `p -> scale * R(rotation) * p + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub scale: f64,
    pub rotation: f64,
    pub tx: f64,
    pub ty: f64,
}

impl Similarity {
    pub const IDENTITY: Similarity = Similarity {
        scale: 1.0,
        rotation: 0.0,
        tx: 0.0,
        ty: 0.0,
    };

    pub fn apply(&self, p: &Point) -> Point {
        let (sin, cos) = self.rotation.sin_cos();
        let a = self.scale * cos;
        let b = self.scale * sin;
        Point {
            x: a * p.x - b * p.y + self.tx,
            y: b * p.x + a * p.y + self.ty,
            t: p.t,
        }
    }

    pub fn inverse(&self) -> Similarity {
        let scale = 1.0 / self.scale;
        let rotation = -self.rotation;
        let (sin, cos) = rotation.sin_cos();
        Similarity {
            scale,
            rotation,
            tx: -scale * (cos * self.tx - sin * self.ty),
            ty: -scale * (sin * self.tx + cos * self.ty),
        }
    }
}

/// General 2D affine map `p -> [a b; c d] p + (e, f)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl Affine {
    pub fn apply(&self, p: &Point) -> Point {
        Point {
            x: self.a * p.x + self.b * p.y + self.e,
            y: self.c * p.x + self.d * p.y + self.f,
            t: p.t,
        }
    }
}

impl From<Similarity> for Affine {
    fn from(s: Similarity) -> Self {
        let (sin, cos) = s.rotation.sin_cos();
        Affine {
            a: s.scale * cos,
            b: -s.scale * sin,
            c: s.scale * sin,
            d: s.scale * cos,
            e: s.tx,
            f: s.ty,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AlignMode {
    /// Rotation, uniform scale and translation.
    #[default]
    Similarity,
    /// Six-parameter affine map, shear included.
    FullAffine,
}

#[derive(Debug, Clone)]
pub struct Alignment {
    pub aligned: Trajectory,
    pub transform: Affine,
    /// Present for [`AlignMode::Similarity`] fits.
    pub similarity: Option<Similarity>,
    /// Summed squared distance of the correspondences after the fit.
    pub residual: f64,
    /// Same sum with the identity transform.
    pub identity_residual: f64,
}

fn sum_sq(a: &[Point], b: &[Point]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p.dist2(q)).sum()
}

fn centroid(pts: &[Point]) -> (f64, f64) {
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    (sx / n, sy / n)
}

/// Least-squares similarity mapping `src[i]` onto `dst[i]`.
pub fn fit_similarity(src: &[Point], dst: &[Point]) -> Result<Similarity> {
    if src.len() != dst.len() || src.is_empty() {
        return Err(Error::InvalidInput(
            "similarity fit needs equally sized, non-empty point sets".into(),
        ));
    }
    let (mx, my) = centroid(src);
    let (nx, ny) = centroid(dst);
    // Complex formulation: a = sum(conj(z) w) / sum(|z|^2) on centered points.
    let (mut re, mut im, mut norm) = (0.0, 0.0, 0.0);
    for (p, q) in src.iter().zip(dst) {
        let (zx, zy) = (p.x - mx, p.y - my);
        let (wx, wy) = (q.x - nx, q.y - ny);
        re += zx * wx + zy * wy;
        im += zx * wy - zy * wx;
        norm += zx * zx + zy * zy;
    }
    let spread = src.iter().map(|p| p.x.abs().max(p.y.abs())).fold(1.0, f64::max);
    if norm <= 1e-24 * spread * spread * src.len() as f64 {
        return Err(Error::DegenerateGeometry(
            "moving point set has no spatial extent; similarity fit is rank-deficient".into(),
        ));
    }
    let (a, b) = (re / norm, im / norm);
    Ok(Similarity {
        scale: a.hypot(b),
        rotation: b.atan2(a),
        tx: nx - (a * mx - b * my),
        ty: ny - (b * mx + a * my),
    })
}

/// Least-squares affine map `src[i]` onto `dst[i]`.
pub fn fit_affine(src: &[Point], dst: &[Point]) -> Result<Affine> {
    if src.len() != dst.len() || src.len() < 3 {
        return Err(Error::InvalidInput(
            "affine fit needs at least 3 corresponding points".into(),
        ));
    }
    let (mx, my) = centroid(src);
    let (nx, ny) = centroid(dst);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    let (mut ux, mut uy, mut vx, mut vy) = (0.0, 0.0, 0.0, 0.0);
    for (p, q) in src.iter().zip(dst) {
        let (zx, zy) = (p.x - mx, p.y - my);
        let (wx, wy) = (q.x - nx, q.y - ny);
        sxx += zx * zx;
        sxy += zx * zy;
        syy += zy * zy;
        ux += zx * wx;
        uy += zy * wx;
        vx += zx * wy;
        vy += zy * wy;
    }
    let det = sxx * syy - sxy * sxy;
    if det <= 1e-12 * (sxx * syy).max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateGeometry(
            "moving point set is collinear; affine normal equations are rank-deficient".into(),
        ));
    }
    let a = (ux * syy - uy * sxy) / det;
    let b = (uy * sxx - ux * sxy) / det;
    let c = (vx * syy - vy * sxy) / det;
    let d = (vy * sxx - vx * sxy) / det;
    Ok(Affine {
        a,
        b,
        c,
        d,
        e: nx - (a * mx + b * my),
        f: ny - (c * mx + d * my),
    })
}

/// Aligns `moving` onto `reference` by fitting a transform between their
/// arc-length resamplings (`ALIGN_NPTS` points, paired by index) and applying
/// it to the original vertices of `moving`.
pub fn affine_align(moving: &Trajectory, reference: &Trajectory, mode: AlignMode) -> Result<Alignment> {
    let src = resample(moving, ALIGN_NPTS)?;
    let dst = resample(reference, ALIGN_NPTS)?;
    let (transform, similarity) = match mode {
        AlignMode::Similarity => {
            let s = fit_similarity(src.points(), dst.points())?;
            (Affine::from(s), Some(s))
        }
        AlignMode::FullAffine => (fit_affine(src.points(), dst.points())?, None),
    };
    let fitted: Vec<Point> = src.points().iter().map(|p| transform.apply(p)).collect();
    let residual = sum_sq(&fitted, dst.points());
    let identity_residual = sum_sq(src.points(), dst.points());
    let aligned = moving.map_points(|p| transform.apply(p))?;
    Ok(Alignment {
        aligned,
        transform,
        similarity,
        residual,
        identity_residual,
    })
}
