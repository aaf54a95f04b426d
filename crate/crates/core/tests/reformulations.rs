use mkcs_core::graph::{clique_counterexample, er_generate, nonisomorphic_graphs, pendant_counterexample, Graph, Probability};
use mkcs_core::mkcs::{alpha_bruteforce, is_feasible, objective, repair, Assignment, MkcsInstance};
use mkcs_core::qubo::{
    apply_mapping_m, apply_mapping_x, build_linear, build_nonlinear, decode_assignment, linear_bits, Slacks,
};
use mkcs_core::seeds;

/// Independent oracle: color vertices one at a time (or leave them out),
/// pruning when even coloring every remaining vertex cannot beat the best.
fn branch_and_prune(g: &Graph, k: usize) -> usize {
    fn go(g: &Graph, k: usize, v: usize, colors: &mut Vec<Option<usize>>, count: usize, best: &mut usize) {
        if count + (g.n() - v) <= *best {
            return;
        }
        if v == g.n() {
            *best = count;
            return;
        }
        for r in 0..k {
            if g.neighbors(v).iter().all(|&u| u >= v || colors[u] != Some(r)) {
                colors[v] = Some(r);
                go(g, k, v + 1, colors, count + 1, best);
            }
        }
        colors[v] = None;
        go(g, k, v + 1, colors, count, best);
    }
    let mut best = 0;
    go(g, k, 0, &mut vec![None; g.n()], 0, &mut best);
    best
}

#[test]
fn two_oracles_agree_up_to_six_vertices() {
    for n in 1..=6 {
        for g in nonisomorphic_graphs(n) {
            for k in 1..=2 {
                let expected = branch_and_prune(&g, k);
                let inst = MkcsInstance::new(g.clone(), k).unwrap();
                assert_eq!(alpha_bruteforce(&inst).unwrap().0, expected, "n={n} k={k} edges={:?}", g.edges());
            }
        }
    }
}

#[test]
fn known_alpha_values() {
    let petersen = Graph::new(
        10,
        [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 5), (1, 6), (2, 7), (3, 8), (4, 9), (5, 7), (7, 9), (9, 6), (6, 8), (8, 5)],
    )
    .unwrap();
    // Independence number 4, largest induced bipartite subgraph 7, chromatic number 3.
    assert_eq!(branch_and_prune(&petersen, 1), 4);
    assert_eq!(branch_and_prune(&petersen, 2), 7);
    assert_eq!(branch_and_prune(&petersen, 3), 10);
    let c5 = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
    let inst = MkcsInstance::new(c5, 2).unwrap();
    assert_eq!(alpha_bruteforce(&inst).unwrap().0, 4);
}

fn seeded(count: u64, base: u64) -> Vec<Graph> {
    (0..count)
        .map(|g| {
            let n = 2 + (g % 4) as usize;
            let p = [0.25, 0.5, 0.75][(g % 3) as usize];
            er_generate(n, Probability::new(p).unwrap(), seeds::derive(base, &[g]))
        })
        .collect()
}

#[test]
fn nonlinear_optimum_is_alpha_above_unit_penalties() {
    let grid = [1.5, 2.0, 5.0];
    let mut instances: Vec<MkcsInstance> =
        (1..=5).flat_map(nonisomorphic_graphs).map(|g| MkcsInstance::new(g, 1).unwrap()).collect();
    instances.extend(seeded(30, 11).into_iter().map(|g| MkcsInstance::new(g, 2).unwrap()));
    for inst in &instances {
        let alpha = alpha_bruteforce(inst).unwrap().0;
        for c1 in grid {
            for c2 in grid {
                let sol = build_nonlinear(inst, c1, c2).unwrap().solve_bruteforce().unwrap();
                assert_eq!(sol.value, alpha as f64);
                assert!(is_feasible(inst, &decode_assignment(inst, &sol.bits).unwrap()).unwrap());
            }
        }
    }
}

#[test]
fn linear_optimum_is_alpha_within_budget() {
    let mut solved = 0;
    for g in (1..=4).flat_map(nonisomorphic_graphs).chain(seeded(20, 12)) {
        for k in 1..=2 {
            let inst = MkcsInstance::new(g.clone(), k).unwrap();
            let alpha = alpha_bruteforce(&inst).unwrap().0;
            for (c1, c2) in [(1.5, 1.5), (2.0, 5.0), (5.0, 2.0)] {
                let m = build_linear(&inst, c1, c2).unwrap();
                if m.num_vars() > 20 {
                    continue;
                }
                let sol = m.solve_bruteforce().unwrap();
                assert_eq!(sol.value, alpha as f64);
                assert!(is_feasible(&inst, &decode_assignment(&inst, &sol.bits).unwrap()).unwrap());
                solved += 1;
            }
        }
    }
    assert!(solved > 100);
}

#[test]
fn unit_penalties_need_repair_but_reach_alpha() {
    for g in (1..=5).flat_map(nonisomorphic_graphs) {
        for k in 1..=2 {
            if g.n() * k > 10 {
                continue;
            }
            let inst = MkcsInstance::new(g.clone(), k).unwrap();
            let alpha = alpha_bruteforce(&inst).unwrap().0;
            for (c1, c2) in [(1.0, 1.0), (1.0, 3.0), (3.0, 1.0)] {
                let sol = build_nonlinear(&inst, c1, c2).unwrap().solve_bruteforce().unwrap();
                assert_eq!(sol.value, alpha as f64);
                let fixed = repair(&inst, &decode_assignment(&inst, &sol.bits).unwrap()).unwrap();
                assert!(is_feasible(&inst, &fixed).unwrap());
                assert_eq!(objective(&fixed), alpha);
            }
        }
    }
}

#[test]
fn sub_unit_penalties_overshoot() {
    for c in [0.25, 0.5, 0.75] {
        for k in 1..=3 {
            let inst = MkcsInstance::new(clique_counterexample(k), k).unwrap();
            let value = build_nonlinear(&inst, c, 2.0).unwrap().solve_bruteforce().unwrap().value;
            assert_eq!(value, (k + 1) as f64 - c);
            assert!(value > alpha_bruteforce(&inst).unwrap().0 as f64);
        }
        for k in 2..=3 {
            let inst = MkcsInstance::new(pendant_counterexample(k), k).unwrap();
            let value = build_nonlinear(&inst, 2.0, c).unwrap().solve_bruteforce().unwrap().value;
            if c == 0.5 {
                assert_eq!(value, (k + 2) as f64 - c);
            }
            assert!(value > alpha_bruteforce(&inst).unwrap().0 as f64);
        }
    }
}

/// `(H0, H1, H2)` of the linear model, straight from the squared sums.
fn linear_parts(inst: &MkcsInstance, x: &Assignment, sl: &Slacks) -> (f64, f64, f64) {
    let k = inst.k();
    let h0 = objective(x) as f64;
    let mut h1 = 0.0;
    for (e, &(i, j)) in inst.graph().edges().iter().enumerate() {
        for r in 0..k {
            let v = x.get(i, r) as i32 + x.get(j, r) as i32 + sl.s[e * k + r] as i32 - 1;
            h1 += (v * v) as f64;
        }
    }
    let mut h2 = 0.0;
    for i in 0..inst.n() {
        let v = x.row(i).iter().filter(|&&b| b).count() as i32 + sl.t[i] as i32 - 1;
        h2 += (v * v) as f64;
    }
    (h0, h1, h2)
}

#[test]
fn mappings_improve_violations_exhaustively() {
    // Every (x, s, t) of a few small instances: a violated edge improves under
    // the p = 0 mapping, a doubly colored vertex under p = 1.
    let graphs = [
        Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap(),
        Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap(),
        Graph::new(3, [(0, 1), (0, 2)]).unwrap(),
    ];
    let mut checked = 0;
    for g in graphs {
        for k in 1..=2 {
            let inst = MkcsInstance::new(g.clone(), k).unwrap();
            let m = build_linear(&inst, 1.0, 1.0).unwrap();
            let (n, ne) = (g.n(), g.num_edges());
            let total = n * k + ne * k + n;
            if total > 18 {
                continue;
            }
            for mask in 0u64..1 << total {
                let bits: Vec<bool> = (0..total).map(|b| mask >> b & 1 == 1).collect();
                let x = Assignment::from_bits(n, k, bits[..n * k].to_vec()).unwrap();
                let sl = Slacks { k, s: bits[n * k..n * k + ne * k].to_vec(), t: bits[n * k + ne * k..].to_vec() };
                let (h0, h1, h2) = linear_parts(&inst, &x, &sl);
                assert_eq!(m.evaluate(&bits).unwrap(), h0 - h1 - h2);
                for i in 0..n {
                    for r in 0..k {
                        if !x.get(i, r) {
                            continue;
                        }
                        let x2 = apply_mapping_x(&x, i, r).unwrap();
                        assert_eq!(apply_mapping_x(&x2, i, r).unwrap(), x2);
                        for &j in g.neighbors(i).iter().filter(|&&j| x.get(j, r)) {
                            let sl2 = apply_mapping_m(&g, &sl, i, Some(j), r, false).unwrap();
                            let (a0, a1, a2) = linear_parts(&inst, &x2, &sl2);
                            assert_eq!(a0, h0 - 1.0);
                            assert!(a1 <= h1 - 1.0 && a2 <= h2);
                            checked += 1;
                        }
                        if x.row(i).iter().filter(|&&b| b).count() > 1 {
                            let sl2 = apply_mapping_m(&g, &sl, i, None, r, true).unwrap();
                            let (a0, a1, a2) = linear_parts(&inst, &x2, &sl2);
                            assert_eq!(a0, h0 - 1.0);
                            assert!(a1 <= h1 && a2 <= h2 - 1.0);
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    assert!(checked > 10_000, "{checked}");
}

#[test]
fn tight_slacks_reproduce_the_objective() {
    let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
    let inst = MkcsInstance::new(g, 2).unwrap();
    let m = build_linear(&inst, 3.0, 4.0).unwrap();
    for mask in 0u64..1 << 10 {
        let x = Assignment::from_mask(5, 2, mask);
        if is_feasible(&inst, &x).unwrap() {
            let bits = linear_bits(&x, &Slacks::tight(&inst, &x).unwrap());
            assert_eq!(m.evaluate(&bits).unwrap(), objective(&x) as f64);
        }
    }
}
