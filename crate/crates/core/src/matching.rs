//! Bipartite matchings between a trajectory `X` and the master `R`.
//!
//! Ordered matchings come from dynamic programs over the `|X| x |R|` grid
//! with the three classic moves. Backtracking breaks cost ties by preferring
//! the diagonal move, then a master advance, then a trajectory advance.

use serde::{Deserialize, Serialize};

use crate::geometry::{point_distance, Norm, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MatchLink {
    /// Index into the trajectory.
    pub i: usize,
    /// Index into the master.
    pub j: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub links: Vec<MatchLink>,
    pub ordered: bool,
}

impl Matching {
    /// True when every vertex on both sides carries at least one link.
    pub fn covers(&self, n_x: usize, n_r: usize) -> bool {
        let mut seen_x = vec![false; n_x];
        let mut seen_r = vec![false; n_r];
        for l in &self.links {
            if l.i >= n_x || l.j >= n_r {
                return false;
            }
            seen_x[l.i] = true;
            seen_r[l.j] = true;
        }
        seen_x.into_iter().all(|s| s) && seen_r.into_iter().all(|s| s)
    }

    /// True when no two links `(i, j)`, `(k, l)` have `i < k` and `j > l`.
    pub fn is_non_crossing(&self) -> bool {
        let mut links = self.links.clone();
        links.sort();
        // After sorting by (i, j), a crossing exists iff some later link has
        // a smaller master index than a running maximum over strictly smaller i.
        let mut max_prev_rows = None::<usize>;
        let mut row_max = None::<usize>;
        let mut current_row = None::<usize>;
        for l in &links {
            if current_row != Some(l.i) {
                max_prev_rows = max_prev_rows.max(row_max);
                row_max = None;
                current_row = Some(l.i);
            }
            if let Some(m) = max_prev_rows {
                if l.j < m {
                    return false;
                }
            }
            row_max = row_max.max(Some(l.j));
        }
        true
    }

    /// All invariants of an ordered matching between sequences of the given sizes.
    pub fn is_valid_ordered(&self, n_x: usize, n_r: usize) -> bool {
        self.covers(n_x, n_r)
            && self.is_non_crossing()
            && self.links.contains(&MatchLink { i: 0, j: 0 })
            && self.links.contains(&MatchLink {
                i: n_x - 1,
                j: n_r - 1,
            })
    }

    pub fn sum_cost(&self, x: &Trajectory, r: &Trajectory, norm: Norm, p: u32) -> f64 {
        self.links
            .iter()
            .map(|l| link_cost(point_distance(&x.points()[l.i], &r.points()[l.j], norm), p))
            .sum()
    }

    pub fn max_distance(&self, x: &Trajectory, r: &Trajectory, norm: Norm) -> f64 {
        self.links
            .iter()
            .map(|l| point_distance(&x.points()[l.i], &r.points()[l.j], norm))
            .fold(0.0, f64::max)
    }
}

fn link_cost(d: f64, p: u32) -> f64 {
    match p {
        1 => d,
        2 => d * d,
        _ => d.powi(p as i32),
    }
}

#[derive(Debug, Clone)]
pub struct DtwOutcome {
    pub matching: Matching,
    /// Sum of `d^p` over the links.
    pub cost: f64,
}

impl DtwOutcome {
    /// `cost^(1/p)`.
    pub fn distance(&self, p: u32) -> f64 {
        self.cost.powf(1.0 / p as f64)
    }
}

#[derive(Debug, Clone)]
pub struct FrechetOutcome {
    pub matching: Matching,
    /// Discrete Fréchet distance, the maximum link distance.
    pub distance: f64,
    /// Sum of link distances of the realized matching.
    pub sum: f64,
}

fn distance_grid(x: &Trajectory, r: &Trajectory, norm: Norm) -> Vec<f64> {
    let mut d = Vec::with_capacity(x.len() * r.len());
    for a in x.points() {
        for b in r.points() {
            d.push(point_distance(a, b, norm));
        }
    }
    d
}

/// Min-sum DP over a row-major `n x m` grid of cell costs. Cells with an
/// infinite cost are forbidden.
fn min_sum_path(cost: &[f64], n: usize, m: usize) -> (Vec<MatchLink>, f64) {
    let mut acc = vec![f64::INFINITY; n * m];
    for i in 0..n {
        for j in 0..m {
            let c = cost[i * m + j];
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let mut best = f64::INFINITY;
                if i > 0 && j > 0 {
                    best = best.min(acc[(i - 1) * m + j - 1]);
                }
                if j > 0 {
                    best = best.min(acc[i * m + j - 1]);
                }
                if i > 0 {
                    best = best.min(acc[(i - 1) * m + j]);
                }
                best
            };
            acc[i * m + j] = c + best;
        }
    }
    let total = acc[n * m - 1];
    (backtrack(&acc, n, m), total)
}

fn backtrack(acc: &[f64], n: usize, m: usize) -> Vec<MatchLink> {
    let (mut i, mut j) = (n - 1, m - 1);
    let mut links = vec![MatchLink { i, j }];
    while i > 0 || j > 0 {
        let diag = if i > 0 && j > 0 {
            acc[(i - 1) * m + j - 1]
        } else {
            f64::INFINITY
        };
        let master = if j > 0 { acc[i * m + j - 1] } else { f64::INFINITY };
        let traj = if i > 0 { acc[(i - 1) * m + j] } else { f64::INFINITY };
        if i > 0 && j > 0 && diag <= master && diag <= traj {
            i -= 1;
            j -= 1;
        } else if j > 0 && (i == 0 || master <= traj) {
            j -= 1;
        } else {
            i -= 1;
        }
        links.push(MatchLink { i, j });
    }
    links.reverse();
    links
}

/// Optimal DTW matching minimizing the sum of `d^p` over links.
pub fn dtw_match(x: &Trajectory, r: &Trajectory, norm: Norm, p: u32) -> DtwOutcome {
    assert!(p >= 1, "dtw exponent must be at least 1");
    let (n, m) = (x.len(), r.len());
    let cost: Vec<f64> = distance_grid(x, r, norm)
        .into_iter()
        .map(|d| link_cost(d, p))
        .collect();
    let (links, cost) = min_sum_path(&cost, n, m);
    DtwOutcome {
        matching: Matching {
            links,
            ordered: true,
        },
        cost,
    }
}

/// Discrete Fréchet distance between the two vertex sequences.
pub fn frechet_distance(x: &Trajectory, r: &Trajectory, norm: Norm) -> f64 {
    let (n, m) = (x.len(), r.len());
    frechet_table(&distance_grid(x, r, norm), n, m)[n * m - 1]
}

fn frechet_table(d: &[f64], n: usize, m: usize) -> Vec<f64> {
    let mut f = vec![0.0; n * m];
    for i in 0..n {
        for j in 0..m {
            let c = d[i * m + j];
            f[i * m + j] = if i == 0 && j == 0 {
                c
            } else {
                let mut best = f64::INFINITY;
                if i > 0 && j > 0 {
                    best = best.min(f[(i - 1) * m + j - 1]);
                }
                if j > 0 {
                    best = best.min(f[i * m + j - 1]);
                }
                if i > 0 {
                    best = best.min(f[(i - 1) * m + j]);
                }
                c.max(best)
            };
        }
    }
    f
}

/// Ordered matching realizing the discrete Fréchet distance. Among all
/// minimax-optimal matchings the one with the smallest sum of link distances
/// is returned.
pub fn frechet_match(x: &Trajectory, r: &Trajectory, norm: Norm) -> FrechetOutcome {
    let (n, m) = (x.len(), r.len());
    let d = distance_grid(x, r, norm);
    let eps = frechet_table(&d, n, m)[n * m - 1];
    let restricted: Vec<f64> = d
        .iter()
        .map(|&v| if v <= eps { v } else { f64::INFINITY })
        .collect();
    let (links, sum) = min_sum_path(&restricted, n, m);
    FrechetOutcome {
        matching: Matching {
            links,
            ordered: true,
        },
        distance: eps,
        sum,
    }
}

fn nearest(from: &crate::geometry::Point, to: &Trajectory, norm: Norm) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, q) in to.points().iter().enumerate() {
        let d = point_distance(from, q, norm);
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    best
}

/// Each point of `x` goes to its nearest master point; master points left
/// without a link are then tied to their nearest point of `x`.
pub fn nn_match(x: &Trajectory, r: &Trajectory, norm: Norm) -> Matching {
    let mut links: Vec<MatchLink> = x
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| MatchLink {
            i,
            j: nearest(p, r, norm),
        })
        .collect();
    let mut hit = vec![false; r.len()];
    for l in &links {
        hit[l.j] = true;
    }
    for (j, q) in r.points().iter().enumerate() {
        if !hit[j] {
            links.push(MatchLink {
                i: nearest(q, x, norm),
                j,
            });
        }
    }
    links.sort();
    Matching {
        links,
        ordered: false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub master_indices: Vec<usize>,
    pub traj_indices: Vec<usize>,
}

fn find(parent: &mut [usize], mut a: usize) -> usize {
    while parent[a] != a {
        parent[a] = parent[parent[a]];
        a = parent[a];
    }
    a
}

/// Connected components of the bipartite graph, ordered by smallest master index.
pub fn connected_components(m: &Matching, n_x: usize, n_r: usize) -> Vec<Component> {
    // Nodes 0..n_x are trajectory points, n_x..n_x+n_r master points.
    let mut parent: Vec<usize> = (0..n_x + n_r).collect();
    for l in &m.links {
        let a = find(&mut parent, l.i);
        let b = find(&mut parent, n_x + l.j);
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut by_root: std::collections::BTreeMap<usize, Component> = Default::default();
    for v in 0..n_x + n_r {
        let root = find(&mut parent, v);
        let c = by_root.entry(root).or_insert(Component {
            master_indices: Vec::new(),
            traj_indices: Vec::new(),
        });
        if v < n_x {
            c.traj_indices.push(v);
        } else {
            c.master_indices.push(v - n_x);
        }
    }
    let mut comps: Vec<Component> = by_root.into_values().collect();
    comps.sort_by_key(|c| {
        (
            c.master_indices.first().copied().unwrap_or(usize::MAX),
            c.traj_indices.first().copied().unwrap_or(usize::MAX),
        )
    });
    comps
}
