//! Brute-force reference implementations used to check the fast paths.
#![allow(dead_code)]

use std::collections::VecDeque;

use miaa::geometry::{point_distance, Norm, Point, Trajectory};
use miaa::matching::Matching;
use rand::Rng;

/// Integer-grid trajectory with a length drawn from `lens`.
pub fn random_grid_trajectory<R: Rng>(rng: &mut R, lens: std::ops::RangeInclusive<usize>, span: i32) -> Trajectory {
    let len = rng.random_range(lens);
    // Repeated consecutive points are rejected by the trajectory type, so
    // redraw until each point differs from the previous one.
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(len);
    while pts.len() < len {
        let p = (rng.random_range(0..=span) as f64, rng.random_range(0..=span) as f64);
        if pts.last() != Some(&p) {
            pts.push(p);
        }
    }
    Trajectory::from_xy("g", &pts).unwrap()
}

/// Every monotone lattice path from (0, 0) to (n - 1, m - 1) with unit
/// steps along either axis or both.
pub fn lattice_paths(n: usize, m: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(i: usize, j: usize, n: usize, m: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        cur.push((i, j));
        if i == n - 1 && j == m - 1 {
            out.push(cur.clone());
        } else {
            if i + 1 < n {
                rec(i + 1, j, n, m, cur, out);
            }
            if j + 1 < m {
                rec(i, j + 1, n, m, cur, out);
            }
            if i + 1 < n && j + 1 < m {
                rec(i + 1, j + 1, n, m, cur, out);
            }
        }
        cur.pop();
    }
    let mut out = Vec::new();
    rec(0, 0, n, m, &mut Vec::new(), &mut out);
    out
}

fn covering_non_crossing(links: &[(usize, usize)], n: usize, m: usize) -> bool {
    let mut cx = vec![false; n];
    let mut cr = vec![false; m];
    for &(i, j) in links {
        cx[i] = true;
        cr[j] = true;
    }
    if !cx.iter().all(|&b| b) || !cr.iter().all(|&b| b) {
        return false;
    }
    for &(i, j) in links {
        for &(k, l) in links {
            if i < k && j > l {
                return false;
            }
        }
    }
    true
}

/// Every link set over the n × m grid that covers both sides and has no
/// crossing pair. Exponential in n·m; keep n·m ≤ 16.
pub fn ordered_link_sets(n: usize, m: usize) -> Vec<Vec<(usize, usize)>> {
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    assert!(cells.len() <= 16);
    let mut out = Vec::new();
    for mask in 1u32..(1 << cells.len()) {
        let links: Vec<(usize, usize)> = (0..cells.len()).filter(|b| mask >> b & 1 == 1).map(|b| cells[b]).collect();
        if covering_non_crossing(&links, n, m) {
            out.push(links);
        }
    }
    out
}

fn d(x: &Trajectory, r: &Trajectory, i: usize, j: usize, norm: Norm) -> f64 {
    point_distance(&x.points()[i], &r.points()[j], norm)
}

pub fn min_sum_over(sets: &[Vec<(usize, usize)>], x: &Trajectory, r: &Trajectory, norm: Norm, p: u32) -> f64 {
    sets.iter()
        .map(|s| s.iter().map(|&(i, j)| d(x, r, i, j, norm).powi(p as i32)).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

pub fn min_max_over(sets: &[Vec<(usize, usize)>], x: &Trajectory, r: &Trajectory, norm: Norm) -> f64 {
    sets.iter()
        .map(|s| s.iter().map(|&(i, j)| d(x, r, i, j, norm)).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

/// Connected components of the bipartite link graph by breadth-first search,
/// as sorted (master indices, trajectory indices), ordered by first master index.
pub fn bfs_components(m: &Matching, n_x: usize, n_r: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    // Nodes 0..n_x are trajectory points, n_x.. are master points.
    let mut adj = vec![Vec::new(); n_x + n_r];
    for l in &m.links {
        adj[l.i].push(n_x + l.j);
        adj[n_x + l.j].push(l.i);
    }
    let mut seen = vec![false; n_x + n_r];
    let mut comps = Vec::new();
    for start in 0..n_x + n_r {
        if seen[start] || adj[start].is_empty() {
            continue;
        }
        let mut q = VecDeque::from([start]);
        seen[start] = true;
        let (mut xs, mut rs) = (Vec::new(), Vec::new());
        while let Some(u) = q.pop_front() {
            if u < n_x {
                xs.push(u);
            } else {
                rs.push(u - n_x);
            }
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    q.push_back(v);
                }
            }
        }
        xs.sort_unstable();
        rs.sort_unstable();
        comps.push((rs, xs));
    }
    comps.sort();
    comps
}

pub fn sum_dist(pts: &[Point], y: (f64, f64)) -> f64 {
    pts.iter().map(|p| (p.x - y.0).hypot(p.y - y.1)).sum()
}

/// Nested grid search for the point minimizing the sum of distances.
pub fn grid_geometric_median(pts: &[Point]) -> (f64, f64) {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let mut center = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let mut half = (x1 - x0).max(y1 - y0) / 2.0 + 1.0;
    const G: i32 = 40;
    // Shrink by half per level: a flat valley can put the grid minimum
    // several cells away from the true one.
    for _ in 0..40 {
        let step = 2.0 * half / G as f64;
        let mut best = (f64::INFINITY, center);
        for a in 0..=G {
            for b in 0..=G {
                let c = (center.0 - half + a as f64 * step, center.1 - half + b as f64 * step);
                let f = sum_dist(pts, c);
                if f < best.0 {
                    best = (f, c);
                }
            }
        }
        center = best.1;
        half = 10.0 * step;
    }
    center
}

/// Smallest circle through two or three of the points that contains all of
/// them, by exhaustive search.
pub fn brute_force_circle(pts: &[Point]) -> ((f64, f64), f64) {
    let contains = |c: (f64, f64), r: f64| pts.iter().all(|p| (p.x - c.0).hypot(p.y - c.1) <= r + 1e-9 * r.max(1.0));
    let mut best = ((pts[0].x, pts[0].y), if pts.len() == 1 { 0.0 } else { f64::INFINITY });
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let c = ((pts[i].x + pts[j].x) / 2.0, (pts[i].y + pts[j].y) / 2.0);
            let r = (pts[i].x - c.0).hypot(pts[i].y - c.1);
            if r < best.1 && contains(c, r) {
                best = (c, r);
            }
            for k in j + 1..pts.len() {
                let (a, b, cc) = (pts[i], pts[j], pts[k]);
                let dd = 2.0 * (a.x * (b.y - cc.y) + b.x * (cc.y - a.y) + cc.x * (a.y - b.y));
                if dd.abs() < 1e-12 {
                    continue;
                }
                let a2 = a.x * a.x + a.y * a.y;
                let b2 = b.x * b.x + b.y * b.y;
                let c2 = cc.x * cc.x + cc.y * cc.y;
                let ux = (a2 * (b.y - cc.y) + b2 * (cc.y - a.y) + c2 * (a.y - b.y)) / dd;
                let uy = (a2 * (cc.x - b.x) + b2 * (a.x - cc.x) + c2 * (b.x - a.x)) / dd;
                let r = (a.x - ux).hypot(a.y - uy);
                if r < best.1 && contains((ux, uy), r) {
                    best = ((ux, uy), r);
                }
            }
        }
    }
    best
}

/// Largest eigenvalue of a symmetric matrix by power iteration.
pub fn power_max_eigenvalue(a: &[Vec<f64>], iters: usize) -> f64 {
    let n = a.len();
    let mut v: Vec<f64> = (0..n).map(|k| 1.0 + (k as f64 * 0.37).sin() * 0.1).collect();
    let mut lambda = 0.0;
    for _ in 0..iters {
        let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[i][j] * v[j]).sum()).collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        lambda = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / v.iter().map(|x| x * x).sum::<f64>();
        v = w.into_iter().map(|x| x / norm).collect();
    }
    lambda
}

/// Smallest eigenvalue via power iteration on the shifted matrix λmax·I − A.
pub fn power_min_eigenvalue(a: &[Vec<f64>], iters: usize) -> f64 {
    let lmax = power_max_eigenvalue(a, iters);
    let n = a.len();
    let shifted: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { lmax - a[i][j] } else { -a[i][j] }).collect())
        .collect();
    lmax - power_max_eigenvalue(&shifted, iters)
}

/// Two-sided Mann-Whitney U test, normal approximation without ties.
/// Returns the z score of `b` being stochastically larger than `a`.
pub fn mann_whitney_z(a: &[f64], b: &[f64]) -> f64 {
    let mut all: Vec<(f64, usize)> = a.iter().map(|&v| (v, 0)).chain(b.iter().map(|&v| (v, 1))).collect();
    all.sort_by(|p, q| p.0.total_cmp(&q.0));
    let rank_b: f64 = all.iter().enumerate().filter(|(_, p)| p.1 == 1).map(|(k, _)| (k + 1) as f64).sum();
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let u = rank_b - n2 * (n2 + 1.0) / 2.0;
    let mean = n1 * n2 / 2.0;
    let sd = (n1 * n2 * (n1 + n2 + 1.0) / 12.0).sqrt();
    (u - mean) / sd
}
