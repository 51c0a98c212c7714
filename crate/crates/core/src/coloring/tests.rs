use super::*;
use crate::graph::fixtures::*;
use crate::graph::VertexSet;
use crate::reduction::{reduce, ReduceConfig};

fn merged(g: &Multigraph, s: &[usize]) -> EdgeColoring {
    let set = VertexSet::new(s.iter().copied());
    let a = g.shrink(&set).unwrap();
    let b = g.shrink(&set.complement(g.vertex_count())).unwrap();
    let ca = exact_chromatic_index(&a.shrunk).unwrap().1;
    let cb = exact_chromatic_index(&b.shrunk).unwrap().1;
    let k = ca.palette().max(cb.palette());
    merge_split(&ca, &cb, &a, &b, k).unwrap()
}

#[test]
fn merge_k4_on_a_triangle() {
    let g = complete(4);
    let c = merged(&g, &[1, 2, 3]);
    c.check_proper(&g).unwrap();
    assert_eq!(c.len(), 6);
    assert_eq!(c.colors_used(), 3);
}

#[test]
fn merge_fig2_on_a_triangle() {
    let g = fig2();
    let c = merged(&g, &[0, 2, 4]);
    c.check_proper(&g).unwrap();
    assert_eq!(c.len(), 18);
    assert!(c.colors_used() <= 7);
}

#[test]
fn merge_rejects_mismatched_sides() {
    let g = complete(4);
    let a = g.shrink(&VertexSet::new([1, 2, 3])).unwrap();
    let b = g.shrink(&VertexSet::new([1])).unwrap();
    let c = EdgeColoring::default();
    assert!(matches!(merge_split(&c, &c, &a, &b, 3), Err(ColoringError::Merge(_))));
}

#[test]
fn peel_lowers_phi_by_one_each_time() {
    let g = fat_triangle(2);
    let (ms, rest) = peel_matchings(&g, 2).unwrap();
    assert_eq!(ms.len(), 2);
    assert_eq!(crate::invariants::phi(&rest).unwrap(), 4);
    assert!(matches!(peel_matchings(&g, 7), Err(ColoringError::PeelCount { count: 7, phi: 6 })));
    let (all, empty) = peel_matchings(&g, 6).unwrap();
    assert_eq!((all.len(), empty.edge_count()), (6, 0));
}

#[test]
fn paths_and_cycles() {
    let even = cycle(8);
    let c = color_paths_and_cycles(&even);
    c.check_proper(&even).unwrap();
    assert_eq!(c.colors_used(), 2);
    let odd = cycle(7);
    let c = color_paths_and_cycles(&odd);
    c.check_proper(&odd).unwrap();
    assert_eq!(c.colors_used(), 3);
    let path = Multigraph::from_pairs(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
    assert_eq!(color_paths_and_cycles(&path).colors_used(), 2);
}

#[test]
fn terminal_coloring_uses_phi() {
    for g in [fat_triangle(3), complete(4), complete(6), fig2()] {
        let phi = crate::invariants::phi(&g).unwrap();
        let c = color_terminal(&g, crate::reduction::Criterion::OneA).unwrap();
        c.check_proper(&g).unwrap();
        assert_eq!(c.colors_used() as u64, phi);
    }
}

#[test]
fn greedy_is_proper() {
    let g = petersen();
    let c = greedy_by_matchings(&g);
    c.check_proper(&g).unwrap();
    assert!(c.colors_used() >= 4);
}

#[test]
fn coloring_checks() {
    let g = fat_triangle(1);
    let mut c = EdgeColoring::default();
    c.set(EdgeId(0), 0);
    c.set(EdgeId(1), 0);
    assert!(matches!(c.check_proper(&g), Err(ColoringError::Conflict { .. })));
    c.set(EdgeId(1), 1);
    assert!(matches!(c.check_proper(&g), Err(ColoringError::Uncolored(_))));
    c.set(EdgeId(2), 5);
    c.check_proper(&g).unwrap();
    assert_eq!(c.palette(), 6);
    assert_eq!(c.compact().palette(), 3);
    c.set(EdgeId(9), 0);
    assert!(c.check_proper(&g).is_err());
}

#[test]
fn certificates() {
    let g = petersen();
    let c = exact_chromatic_index(&g).unwrap().1;
    let cert = certify(&g, &c).unwrap();
    assert_eq!((cert.phi, cert.colors_used, cert.bound_floor), (3, 4, 5));
    assert!(cert.applicable && cert.satisfied);
    // two edges moved to fresh colors stay proper
    let mut six = c.clone();
    six.set(EdgeId(0), 4);
    six.set(EdgeId(1), 5);
    let cert = certify(&g, &six).unwrap();
    assert_eq!(cert.colors_used, 6);
    assert!(!cert.satisfied);
    let t2 = fat_triangle(2);
    let rainbow = EdgeColoring::from_map(t2.edge_ids().map(|e| (e, e.0)).collect());
    let cert = certify(&t2, &rainbow).unwrap();
    assert_eq!((cert.phi, cert.bound_floor), (6, 6));
    assert!(cert.satisfied);
}

#[test]
fn bound_is_exact() {
    // φ = 3, n = 10: 3 + log_{3/2} 3 ≈ 5.71
    assert_eq!(bound_floor(10, 3), 5);
    assert!((bound_value(10, 3) - 5.7095).abs() < 1e-3);
    // odd order rounds up: n' = 10
    assert_eq!(bound_floor(9, 3), 5);
    // n' = 4 leaves no room above φ
    assert_eq!(bound_floor(3, 6), 6);
    assert_eq!(bound_floor(6, 6), 7);
    assert!(within_bound(30, 10, 15));
    assert!(!within_bound(30, 10, 16));
}

#[test]
fn reconstruct_anchors() {
    for (g, to, most) in [(fig2(), 4, 7), (fig2(), 8, 6), (petersen(), 8, 5), (fat_triangle(3), 8, 9)] {
        let t = reduce(&g, &ReduceConfig {
            terminal_order: to,
            ..ReduceConfig::default()
        })
        .unwrap();
        let r = reconstruct_detailed(&t).unwrap();
        r.coloring.check_proper(&g).unwrap();
        assert!(r.coloring.colors_used() <= most);
        assert!(r.coloring.colors_used() as u32 <= r.leaf_bound);
    }
}
