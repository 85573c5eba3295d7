use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::AggMode;
use crate::geometry::Point;

/// Step tolerance, relative to the spread of the points.
const WEISZFELD_TOL: f64 = 1e-13;
const WEISZFELD_MAX_ITER: usize = 100_000;
const COINCIDENCE: f64 = 1e-12;
const SINGULAR_NUDGE: f64 = 1e-9;
const WELZL_SEED: u64 = 0x57e1_2c1c;

/// Collapses the representatives of one master vertex into a single point.
pub fn aggregate_point(reps: &[Point], mode: AggMode) -> Point {
    assert!(!reps.is_empty(), "aggregate_point needs at least one point");
    if reps.len() == 1 {
        return Point::new(reps[0].x, reps[0].y);
    }
    match mode {
        AggMode::MarginalMedian => marginal_median(reps),
        AggMode::MeanL2 => mean_point(reps),
        AggMode::GeometricMedian => geometric_median(reps).point,
        AggMode::MinCoveringCircle => min_covering_circle(reps).center,
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn marginal_median(pts: &[Point]) -> Point {
    Point::new(
        median(pts.iter().map(|p| p.x).collect()),
        median(pts.iter().map(|p| p.y).collect()),
    )
}

pub fn mean_point(pts: &[Point]) -> Point {
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Point::new(sx / n, sy / n)
}

#[derive(Debug, Clone)]
pub struct GeometricMedian {
    pub point: Point,
    /// Sum of distances at the centroid, then after each iterate that
    /// lowered it.
    pub objective_trace: Vec<f64>,
}

fn objective(q: &[(f64, f64)], y: (f64, f64)) -> f64 {
    q.iter().map(|&(x, z)| (x - y.0).hypot(z - y.1)).sum()
}

/// Index of an input point that is itself the geometric median: the pull of
/// the other points there does not exceed its multiplicity.
fn optimal_vertex(q: &[(f64, f64)]) -> Option<usize> {
    (0..q.len()).find(|&k| {
        let mut mult = 0usize;
        let (mut gx, mut gy) = (0.0, 0.0);
        for &(x, z) in q {
            let d = (x - q[k].0).hypot(z - q[k].1);
            if d == 0.0 {
                mult += 1;
            } else {
                gx += (x - q[k].0) / d;
                gy += (z - q[k].1) / d;
            }
        }
        gx.hypot(gy) <= mult as f64
    })
}

/// Weiszfeld iteration started from the centroid.
///
/// Input points satisfying the optimality condition are returned directly.
/// When an iterate lands on an input point otherwise, it is nudged along
/// the descent direction and iteration resumes.
pub fn geometric_median(pts: &[Point]) -> GeometricMedian {
    // Coordinates relative to the first point keep the result
    // translation-equivariant. Iteration starts at the centroid.
    let c = pts[0];
    let q: Vec<(f64, f64)> = pts.iter().map(|p| (p.x - c.x, p.y - c.y)).collect();
    let n = q.len() as f64;
    let mut y = q.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let mut f = objective(&q, y);
    let mut trace = vec![f];
    if let Some(k) = optimal_vertex(&q) {
        let f_k = objective(&q, q[k]);
        if f_k < f {
            trace.push(f_k);
        }
        return GeometricMedian {
            point: Point::new(pts[k].x, pts[k].y),
            objective_trace: trace,
        };
    }
    let spread = q.iter().fold(0.0f64, |m, p| m.max(p.0.abs()).max(p.1.abs()));
    let tol = WEISZFELD_TOL * spread.max(f64::MIN_POSITIVE);

    for _ in 0..WEISZFELD_MAX_ITER {
        let mut coincident = 0usize;
        let (mut nx, mut ny, mut den) = (0.0, 0.0, 0.0);
        let (mut gx, mut gy) = (0.0, 0.0);
        for &(x, z) in &q {
            let d = (x - y.0).hypot(z - y.1);
            if d < COINCIDENCE {
                coincident += 1;
                continue;
            }
            nx += x / d;
            ny += z / d;
            den += 1.0 / d;
            gx += (x - y.0) / d;
            gy += (z - y.1) / d;
        }
        let next = if coincident > 0 {
            let g = gx.hypot(gy);
            if g <= coincident as f64 {
                break;
            }
            (y.0 + SINGULAR_NUDGE * gx / g, y.1 + SINGULAR_NUDGE * gy / g)
        } else {
            (nx / den, ny / den)
        };
        let f_next = objective(&q, next);
        // Near the optimum the objective is flat to rounding while the
        // iterates still move, so only a real increase stops the loop.
        if f_next > f * (1.0 + 1e-12) {
            break;
        }
        let step = (next.0 - y.0).hypot(next.1 - y.1);
        y = next;
        if f_next < f {
            f = f_next;
            trace.push(f);
        }
        if coincident == 0 && step < tol {
            break;
        }
    }
    GeometricMedian {
        point: Point::new(y.0 + c.x, y.1 + c.y),
        objective_trace: trace,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    fn contains(&self, p: (f64, f64)) -> bool {
        (p.0 - self.center.x).hypot(p.1 - self.center.y) <= self.radius * (1.0 + 1e-14) + 1e-15
    }
}

/// Smallest circle enclosing `pts` (Welzl, iterative form, fixed-seed shuffle).
pub fn min_covering_circle(pts: &[Point]) -> Circle {
    assert!(!pts.is_empty(), "min_covering_circle needs at least one point");
    let c = pts[0];
    let mut q: Vec<(f64, f64)> = pts.iter().map(|p| (p.x - c.x, p.y - c.y)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(WELZL_SEED);
    q.shuffle(&mut rng);

    let mut circle: Option<Circle> = None;
    for i in 0..q.len() {
        if circle.is_none_or(|cc| !cc.contains(q[i])) {
            circle = Some(circle_with_one(&q[..=i], q[i]));
        }
    }
    let local = circle.unwrap();
    Circle {
        center: Point::new(local.center.x + c.x, local.center.y + c.y),
        radius: local.radius,
    }
}

fn circle_with_one(pts: &[(f64, f64)], p: (f64, f64)) -> Circle {
    let mut c = Circle {
        center: Point::new(p.0, p.1),
        radius: 0.0,
    };
    for i in 0..pts.len() {
        let q = pts[i];
        if !c.contains(q) {
            c = if c.radius == 0.0 {
                diameter(p, q)
            } else {
                circle_with_two(&pts[..=i], p, q)
            };
        }
    }
    c
}

fn circle_with_two(pts: &[(f64, f64)], p: (f64, f64), q: (f64, f64)) -> Circle {
    let circ = diameter(p, q);
    let mut left: Option<Circle> = None;
    let mut right: Option<Circle> = None;
    let cross = |a: (f64, f64), b: (f64, f64), c: (f64, f64)| {
        (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
    };
    for &r in pts {
        if circ.contains(r) {
            continue;
        }
        let side = cross(p, q, r);
        let Some(c) = circumcircle(p, q, r) else {
            continue;
        };
        let cside = cross(p, q, (c.center.x, c.center.y));
        if side > 0.0 && left.is_none_or(|l| cside > cross(p, q, (l.center.x, l.center.y))) {
            left = Some(c);
        } else if side < 0.0
            && right.is_none_or(|rr| cside < cross(p, q, (rr.center.x, rr.center.y)))
        {
            right = Some(c);
        }
    }
    match (left, right) {
        (None, None) => circ,
        (Some(l), None) => l,
        (None, Some(r)) => r,
        (Some(l), Some(r)) => {
            if l.radius <= r.radius {
                l
            } else {
                r
            }
        }
    }
}

fn diameter(a: (f64, f64), b: (f64, f64)) -> Circle {
    let cx = (a.0 + b.0) / 2.0;
    let cy = (a.1 + b.1) / 2.0;
    let r = (cx - a.0).hypot(cy - a.1).max((cx - b.0).hypot(cy - b.1));
    Circle {
        center: Point::new(cx, cy),
        radius: r,
    }
}

fn circumcircle(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Option<Circle> {
    let ox = (a.0.min(b.0).min(c.0) + a.0.max(b.0).max(c.0)) / 2.0;
    let oy = (a.1.min(b.1).min(c.1) + a.1.max(b.1).max(c.1)) / 2.0;
    let (ax, ay) = (a.0 - ox, a.1 - oy);
    let (bx, by) = (b.0 - ox, b.1 - oy);
    let (cx, cy) = (c.0 - ox, c.1 - oy);
    let d = (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by)) * 2.0;
    if d == 0.0 {
        return None;
    }
    let a2 = ax * ax + ay * ay;
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let x = ox + (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
    let y = oy + (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
    let r = [a, b, c]
        .iter()
        .map(|p| (p.0 - x).hypot(p.1 - y))
        .fold(0.0, f64::max);
    Some(Circle {
        center: Point::new(x, y),
        radius: r,
    })
}
