use std::path::Path;

use multicolor::format::{emit_coloring, emit_trace, parse_coloring, parse_multigraph, parse_trace};
use multicolor::reduction::{reduce_stage2, verify_tree};
use multicolor::{certify, color, coloring, Multigraph, PipelineConfig, ReduceConfig};

fn data(name: &str) -> Multigraph {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    parse_multigraph(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn shipped_graphs_color_within_the_bound() {
    for name in ["petersen.mgraph", "fig2.mgraph", "handoff.mgraph", "matching_gap.mgraph"] {
        let g = data(name);
        let out = color(&g, &PipelineConfig::default()).unwrap();
        assert!(out.is_sound(), "{name}");
        let text = emit_coloring(&out.coloring);
        let back = parse_coloring(&text).unwrap();
        assert_eq!(certify(&g, &back).unwrap(), out.certificate);
    }
}

#[test]
fn trace_round_trip() {
    let g = data("handoff.mgraph");
    let out = color(&g, &PipelineConfig::default()).unwrap();
    let tree = out.tree.unwrap();
    let text = emit_trace(&tree);
    let trace = parse_trace(&text).unwrap();
    assert_eq!(trace.records.len(), tree.nodes.len());
    assert!(trace.records.iter().any(|r| r.stage == 2));
    assert_eq!(trace.header.input_edges, g.edge_count());
}

#[test]
fn second_stage_entry() {
    let g = data("matching_gap.mgraph");
    assert!(reduce_stage2(&g, 21, &ReduceConfig::default()).is_err());
    let cfg = ReduceConfig {
        fallback: true,
        ..ReduceConfig::default()
    };
    let tree = reduce_stage2(&g, 21, &cfg).unwrap();
    assert!(!verify_tree(&tree).is_clean());
    coloring::reconstruct(&tree).unwrap().check_proper(&g).unwrap();
}
