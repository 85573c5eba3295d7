mod common;

use common::oracles::*;
use miaa::geometry::{point_distance, Norm, Point, Trajectory};
use miaa::matching::{connected_components, dtw_match, frechet_distance, frechet_match, nn_match, MatchLink, Matching};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn lattice_paths_agree_with_subset_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let n = rng.random_range(2..=4);
        let m = rng.random_range(2..=4);
        let x = random_grid_trajectory(&mut rng, n..=n, 6);
        let r = random_grid_trajectory(&mut rng, m..=m, 6);
        let paths = lattice_paths(n, m);
        let subsets = ordered_link_sets(n, m);
        for p in [1, 2] {
            let a = min_sum_over(&paths, &x, &r, Norm::L2, p);
            let b = min_sum_over(&subsets, &x, &r, Norm::L2, p);
            assert!(close(a, b, 1e-12), "{a} vs {b}");
            assert!(close(dtw_match(&x, &r, Norm::L2, p).cost, b, 1e-9));
        }
        assert!(close(min_max_over(&paths, &x, &r, Norm::L2), min_max_over(&subsets, &x, &r, Norm::L2), 1e-12));
    }
}

#[test]
fn dtw_and_frechet_match_exhaustive_minima() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..300 {
        let n = rng.random_range(2..=5);
        let m = rng.random_range(2..=5);
        let x = random_grid_trajectory(&mut rng, n..=n, 10);
        let r = random_grid_trajectory(&mut rng, m..=m, 10);
        let paths = lattice_paths(n, m);
        for norm in [Norm::L1, Norm::L2, Norm::LInf] {
            for p in [1, 2] {
                let out = dtw_match(&x, &r, norm, p);
                let oracle = min_sum_over(&paths, &x, &r, norm, p);
                assert!(close(out.cost, oracle, 1e-9), "dtw p={p}: {} vs {oracle}", out.cost);
                assert!(out.matching.is_valid_ordered(n, m));
                assert!(close(out.matching.sum_cost(&x, &r, norm, p), out.cost, 1e-12));
            }
            let f = frechet_match(&x, &r, norm);
            let oracle = min_max_over(&paths, &x, &r, norm);
            assert!(close(f.distance, oracle, 1e-9));
            assert_eq!(f.distance, frechet_distance(&x, &r, norm));
            assert!(f.matching.is_valid_ordered(n, m));
            assert!(close(f.matching.max_distance(&x, &r, norm), f.distance, 1e-12));
        }
    }
}

#[test]
fn high_exponent_dtw_approaches_frechet() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let x = random_grid_trajectory(&mut rng, 2..=5, 10);
        let r = random_grid_trajectory(&mut rng, 2..=5, 10);
        let eps = frechet_distance(&x, &r, Norm::L2);
        let dp = dtw_match(&x, &r, Norm::L2, 64).distance(64);
        assert!(dp >= eps * (1.0 - 1e-12));
        assert!(dp <= eps * 1.05 + 1e-12, "{dp} vs {eps}");
    }
}

#[test]
fn frechet_is_below_every_sampled_ordered_matching() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..100 {
        let x = random_grid_trajectory(&mut rng, 2..=12, 30);
        let r = random_grid_trajectory(&mut rng, 2..=12, 30);
        let eps = frechet_distance(&x, &r, Norm::L2);
        // Random monotone walk from corner to corner.
        let (mut i, mut j) = (0, 0);
        let mut links = vec![MatchLink { i, j }];
        while i + 1 < x.len() || j + 1 < r.len() {
            match rng.random_range(0..3) {
                0 if i + 1 < x.len() => i += 1,
                1 if j + 1 < r.len() => j += 1,
                _ => {
                    if i + 1 < x.len() {
                        i += 1;
                    }
                    if j + 1 < r.len() {
                        j += 1;
                    }
                }
            }
            links.push(MatchLink { i, j });
        }
        let m = Matching { links, ordered: true };
        assert!(m.is_valid_ordered(x.len(), r.len()));
        assert!(eps <= m.max_distance(&x, &r, Norm::L2) + 1e-12);
    }
}

#[test]
fn nearest_neighbour_links_are_verified_by_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..20 {
        let x = random_grid_trajectory(&mut rng, 20..=20, 100);
        let r = random_grid_trajectory(&mut rng, 20..=20, 100);
        let m = nn_match(&x, &r, Norm::L2);
        assert!(m.covers(20, 20));
        let d = |i: usize, j: usize| point_distance(&x.points()[i], &r.points()[j], Norm::L2);
        for i in 0..20 {
            let best = (0..20).map(|j| d(i, j)).fold(f64::INFINITY, f64::min);
            assert!(m.links.iter().any(|l| l.i == i && d(i, l.j) == best));
        }
        for l in &m.links {
            let best_for_x = (0..20).map(|j| d(l.i, j)).fold(f64::INFINITY, f64::min);
            let best_for_r = (0..20).map(|i| d(i, l.j)).fold(f64::INFINITY, f64::min);
            assert!(d(l.i, l.j) == best_for_x || d(l.i, l.j) == best_for_r);
        }
    }
}

#[test]
fn outlier_cluster_near_start_maps_to_first_master_point() {
    let r = Trajectory::from_xy("r", &[(0., 0.), (10., 0.), (20., 0.), (30., 0.)]).unwrap();
    let x = Trajectory::from_xy("x", &[(-50., 1.), (-51., 2.), (-52., 1.)]).unwrap();
    let m = nn_match(&x, &r, Norm::L2);
    for i in 0..3 {
        assert!(m.links.contains(&MatchLink { i, j: 0 }));
    }
    for j in 1..4 {
        assert!(m.links.contains(&MatchLink { i: 0, j }));
    }
}

#[test]
fn components_match_breadth_first_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..200 {
        let n = rng.random_range(2..=9);
        let m = rng.random_range(2..=9);
        let x = random_grid_trajectory(&mut rng, n..=n, 8);
        let r = random_grid_trajectory(&mut rng, m..=m, 8);
        for matching in [
            dtw_match(&x, &r, Norm::L2, 1).matching,
            dtw_match(&x, &r, Norm::L2, 2).matching,
            frechet_match(&x, &r, Norm::L2).matching,
            nn_match(&x, &r, Norm::L2),
        ] {
            let got: Vec<(Vec<usize>, Vec<usize>)> = connected_components(&matching, n, m)
                .into_iter()
                .map(|c| (c.master_indices, c.traj_indices))
                .collect();
            let want = bfs_components(&matching, n, m);
            let mut sorted = got.clone();
            sorted.sort();
            assert_eq!(sorted, want);
            if matching.ordered {
                assert!(matching.is_non_crossing());
                for (rs, xs) in &got {
                    assert!(rs.len() == 1 || xs.len() == 1, "{rs:?} x {xs:?}");
                }
            }
        }
    }
}

#[test]
fn moving_a_point_closer_to_every_master_point_never_raises_cost() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let r = random_grid_trajectory(&mut rng, 2..=8, 10);
        let mut xy: Vec<(f64, f64)> = (0..rng.random_range(2..=8))
            .map(|_| (rng.random_range(0..=10) as f64, rng.random_range(0..=10) as f64))
            .collect();
        let k = rng.random_range(0..xy.len());
        xy[k] = (50.0, 50.0);
        let Ok(far) = Trajectory::from_xy("x", &xy) else { continue };
        xy[k] = (30.0, 30.0);
        let Ok(near) = Trajectory::from_xy("x", &xy) else { continue };
        for p in [1, 2] {
            assert!(dtw_match(&near, &r, Norm::L2, p).cost <= dtw_match(&far, &r, Norm::L2, p).cost);
        }
    }
}

#[test]
fn identical_and_offset_inputs() {
    let pts: Vec<(f64, f64)> = (0..10).map(|k| (k as f64 * 3.0, (k as f64).sin())).collect();
    let a = Trajectory::from_xy("a", &pts).unwrap();
    let out = dtw_match(&a, &a, Norm::L2, 2);
    assert_eq!(out.cost, 0.0);
    assert_eq!(out.matching.links, (0..10).map(|k| MatchLink { i: k, j: k }).collect::<Vec<_>>());
    let line: Vec<Point> = (0..10).map(|k| Point::new(k as f64, 0.0)).collect();
    let la = Trajectory::new("a", line.clone()).unwrap();
    let lb = Trajectory::new("b", line.iter().map(|p| p.translated(0.0, 2.0)).collect()).unwrap();
    assert_eq!(frechet_match(&la, &lb, Norm::L2).distance, 2.0);
}
