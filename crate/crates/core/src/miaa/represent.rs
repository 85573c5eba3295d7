use super::RepresentMode;
use crate::geometry::{Point, Trajectory};
use crate::matching::Component;

/// Representative of one connected component on the trajectory side.
pub fn representative(component: &Component, x: &Trajectory, r: &Trajectory, mode: RepresentMode) -> Point {
    let master = &r.points()[component.master_indices[0]];
    representative_of(&component.traj_indices, x, master, mode)
}

/// Representative of the points `x[indices]` (in increasing index order)
/// linked to `master`.
pub fn representative_of(indices: &[usize], x: &Trajectory, master: &Point, mode: RepresentMode) -> Point {
    assert!(!indices.is_empty(), "component has no trajectory point");
    let pts = x.points();
    if indices.len() == 1 {
        return pts[indices[0]];
    }
    match mode {
        RepresentMode::Barycentre => {
            let n = indices.len() as f64;
            let (sx, sy) = indices
                .iter()
                .fold((0.0, 0.0), |(sx, sy), &i| (sx + pts[i].x, sy + pts[i].y));
            Point::new(sx / n, sy / n)
        }
        RepresentMode::MedianTime => {
            let mut order = indices.to_vec();
            if x.has_timestamps() {
                order.sort_by(|&a, &b| pts[a].t.unwrap().total_cmp(&pts[b].t.unwrap()).then(a.cmp(&b)));
            }
            pts[order[(order.len() - 1) / 2]]
        }
        RepresentMode::Furthest => {
            let mut best = indices[0];
            let mut best_d = -1.0;
            for &i in indices {
                let d = pts[i].dist2(master);
                if d > best_d {
                    best_d = d;
                    best = i;
                }
            }
            pts[best]
        }
    }
}
