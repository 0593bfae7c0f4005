mod common;

use hardcore::enumerate::{
    barrier_measures, brute_force_counts, conductance_lower_bound, occupancy_counts, occupancy_profile,
    partition_function,
};
use hardcore::exponents::{verify_appendix_polynomials, PolyClaim};
use hardcore::graphgen::{count_cycles, sample_graph, sample_graph_indexed, BipartiteMultigraph};
use hardcore::moments::{cycle_lambda, expected_z, expected_z2, size_biased_cycle_check};

#[test]
fn profile_matches_double_sided_enumeration() {
    for n in 1..=5 {
        for k in 0..20u64 {
            let d = 1 + (k as usize % 4);
            let g = sample_graph_indexed(n, d, 31, k).unwrap();
            let counts = occupancy_counts(&g).unwrap();
            assert_eq!(counts, brute_force_counts(&g).unwrap(), "n={n} k={k}");
            for lam in [0.5, 1.0, 4.0] {
                let p = occupancy_profile(&g, lam).unwrap();
                let direct: f64 = (0..=n)
                    .flat_map(|a| (0..=n).map(move |b| (a, b)))
                    .map(|(a, b)| counts[a][b] as f64 * lam.powi((a + b) as i32))
                    .sum();
                assert!((p.log_partition() - direct.ln()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn hand_computed_partition_functions() {
    let id = BipartiteMultigraph::from_matchings(2, vec![vec![0, 1]]).unwrap();
    assert!((partition_function(&id, 1.0).unwrap() - 9f64.ln()).abs() < 1e-14);
    let triple = BipartiteMultigraph::from_matchings(1, vec![vec![0]; 3]).unwrap();
    for lam in [0.3, 1.0, 7.0] {
        assert!((partition_function(&triple, lam).unwrap() - (1.0 + 2.0 * lam).ln()).abs() < 1e-14);
    }
}

#[test]
fn averaged_profile_reproduces_first_moment() {
    for (n, d) in [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2)] {
        let graphs = common::all_graphs(n, d);
        let mut total = vec![vec![0u128; n + 1]; n + 1];
        for g in &graphs {
            let c = occupancy_counts(g).unwrap();
            for a in 0..=n {
                for b in 0..=n {
                    total[a][b] += c[a][b];
                }
            }
        }
        for lam in [0.5, 1.0, 2.0] {
            for a in 0..=n {
                for b in 0..=n {
                    let want = expected_z(n, a, b, lam, d as u32).unwrap();
                    if total[a][b] == 0 {
                        assert_eq!(want, f64::NEG_INFINITY, "n={n} d={d} a={a} b={b}");
                        continue;
                    }
                    let got = (total[a][b] as f64 / graphs.len() as f64).ln() + (a + b) as f64 * f64::ln(lam);
                    assert!((got - want).abs() < 1e-12, "n={n} d={d} a={a} b={b}: {got} vs {want}");
                }
            }
        }
    }
}

#[test]
fn second_moment_matches_exhaustive_average() {
    for (n, d) in [(3, 2), (4, 2)] {
        for a in 0..=n {
            for b in 0..=n - a {
                let (_, e2) = common::exhaustive_log_moments(n, a, b, 1.5, d);
                let got = expected_z2(n, a, b, 1.5, d as u32).unwrap();
                assert!((got - e2).abs() < 1e-10, "n={n} a={a} b={b}: {got} vs {e2}");
            }
        }
    }
}

fn mean_cycles(graphs: &[BipartiteMultigraph], i: usize) -> f64 {
    graphs.iter().map(|g| count_cycles(g, 4).unwrap().get(i) as f64).sum::<f64>() / graphs.len() as f64
}

#[test]
fn exact_short_cycle_means() {
    // X₂ counts coinciding matching pairs: C(d,2) pairs, each 1/n per vertex.
    for n in 2..=4 {
        let graphs = common::all_graphs(n, 3);
        assert!((mean_cycles(&graphs, 2) - 3.0).abs() < 1e-12);
        let want4 = 1.5 + 3.0 * (n as f64 - 1.0) / n as f64;
        assert!((mean_cycles(&graphs, 4) - want4).abs() < 1e-12, "n={n}");
    }
}

/// `E[Y·X₂]/E[Y]` over all graphs, for `Y` the number of `(a, b)` independent
/// sets. Fixing `(S, T)` and a vertex `u` in a pair of matchings, the two
/// images coincide and land either in `T`, or outside `T` with `u ∉ S`.
fn size_biased_double_edges(n: usize, a: usize, b: usize, d: usize) -> f64 {
    let (n, a, b) = (n as f64, a as f64, b as f64);
    let pairs = (d * (d - 1) / 2) as f64;
    pairs * (a / (n - b) + b / (n - a) + (n - a - b).powi(2) / ((n - a) * (n - b)))
}

#[test]
fn size_biased_double_edge_mean_is_exact() {
    for (n, d) in [(3, 2), (4, 2), (3, 3)] {
        let graphs = common::all_graphs(n, d);
        let rows: Vec<(Vec<Vec<u128>>, u64)> =
            graphs.iter().map(|g| (occupancy_counts(g).unwrap(), count_cycles(g, 2).unwrap().get(2))).collect();
        for a in 0..n {
            for b in 0..n - a {
                let sy: u128 = rows.iter().map(|r| r.0[a][b]).sum();
                let syx: u128 = rows.iter().map(|r| r.0[a][b] * r.1 as u128).sum();
                let got = syx as f64 / sy as f64;
                let want = size_biased_double_edges(n, a, b, d);
                assert!((got - want).abs() < 1e-12, "n={n} d={d} a={a} b={b}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn lobes_are_equal_in_distribution() {
    let m = 500;
    let lobe = |seed: u64, second: bool| -> Vec<f64> {
        (0..m as u64)
            .map(|k| {
                let b = barrier_measures(&sample_graph_indexed(8, 3, seed, k).unwrap(), 2.0, 0).unwrap();
                if second {
                    b.mu_i2
                } else {
                    b.mu_i1
                }
            })
            .collect()
    };
    let d = common::ks_statistic(lobe(101, false), lobe(202, true));
    // two-sample Kolmogorov–Smirnov critical value at level 0.001
    let crit = (-(0.0005f64).ln() / 2.0).sqrt() * (2.0 / m as f64).sqrt();
    assert!(d < crit, "D = {d}, critical {crit}");
    let g = sample_graph(8, 3, 5).unwrap();
    let (x, y) = (barrier_measures(&g, 2.0, 0).unwrap(), barrier_measures(&g.swap_sides(), 2.0, 0).unwrap());
    assert!((x.mu_i1 - y.mu_i2).abs() < 1e-12 && (x.mu_i2 - y.mu_i1).abs() < 1e-12);
}

#[test]
fn three_state_barrier_and_conductance() {
    for d in [1, 3] {
        let g = BipartiteMultigraph::from_matchings(1, vec![vec![0]; d]).unwrap();
        let m = barrier_measures(&g, 1.0, 0).unwrap();
        for mu in [m.mu_i1, m.mu_i2, m.mu_ib] {
            assert!((mu - 1.0 / 3.0).abs() < 1e-15);
        }
        let c = conductance_lower_bound(&g, 1.0, 0).unwrap();
        assert!(!c.applicable);
        assert!((c.mu_a - 2.0 / 3.0).abs() < 1e-15);
        assert!((c.bound - 0.25).abs() < 1e-15);
        assert!((c.lobe_only_bound - 0.125).abs() < 1e-15);
    }
    let g = sample_graph(6, 3, 2).unwrap();
    assert!((barrier_measures(&g, 1.3, 6).unwrap().mu_ib - 1.0).abs() < 1e-15);
}

#[test]
fn polynomial_claims_hold() {
    for d in 3..=8 {
        let r = verify_appendix_polynomials(d);
        assert!(r.all_as_expected());
        for c in &r.checks {
            assert!(c.holds && c.grid_violations == 0, "d={d} {c:?}");
            if c.claim == PolyClaim::NoRoot {
                assert!(c.grid_min > 0.0 || c.grid_max < 0.0);
            }
        }
        // only the (d-2)^3 constant term of Q2 keeps the identity
        for id in &r.identities {
            assert_eq!(id.holds, id.name != "lhs at eps_min, Q2 with (d-2)^2 constant", "d={d} {id:?}");
            assert_eq!(id.holds, id.expected);
        }
    }
}

#[test]
fn sampled_cycle_means_match_poisson_limits() {
    for d in [3u32, 4] {
        let r = size_biased_cycle_check(200, 0, 0, &[2, 4], d, 2000, 77).unwrap();
        for e in r.estimates.iter().filter(|e| e.lengths.len() == 1) {
            assert_eq!(e.target, cycle_lambda(d, e.lengths[0]).unwrap());
            assert!(e.z_score < 4.0, "d={d} {e:?}");
        }
    }
}
