//! End-to-end coloring: reduce, color leaves, reassemble, certify.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{self, BoundCertificate, ColoringError, EdgeColoring};
use crate::graph::Multigraph;
use crate::reduction::{self, DecompTree, ReduceConfig, ReductionError, TreeReport};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
}

impl PipelineError {
    /// True when a runtime check inside the reduction failed.
    pub fn is_state_violation(&self) -> bool {
        matches!(
            self,
            PipelineError::Reduction(ReductionError::StateViolation(_))
                | PipelineError::Coloring(ColoringError::Reduction(ReductionError::StateViolation(_)))
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub reduce: ReduceConfig,
}

#[derive(Clone, Debug)]
pub struct ColorOutcome {
    pub coloring: EdgeColoring,
    /// `None` for graphs handled without a decomposition (no edges or fewer
    /// than three vertices).
    pub tree: Option<DecompTree>,
    pub report: Option<TreeReport>,
    pub certificate: BoundCertificate,
}

impl ColorOutcome {
    pub fn colors_used(&self) -> usize {
        self.coloring.colors_used()
    }

    /// Certificate satisfied and the tree audit clean.
    pub fn is_sound(&self) -> bool {
        self.certificate.satisfied && self.report.as_ref().is_none_or(TreeReport::is_clean)
    }
}

pub fn color(g: &Multigraph, config: &PipelineConfig) -> Result<ColorOutcome, PipelineError> {
    if g.edge_count() == 0 || g.vertex_count() < 3 {
        // every edge joins the same pair, or there are none
        let mut c = EdgeColoring::default();
        for (i, id) in g.edge_ids().enumerate() {
            c.set(id, i as u32);
        }
        let certificate = coloring::certify(g, &c)?;
        return Ok(ColorOutcome {
            coloring: c,
            tree: None,
            report: None,
            certificate,
        });
    }
    let tree = reduction::reduce(g, &config.reduce)?;
    let report = reduction::verify_tree(&tree);
    let c = coloring::reconstruct(&tree)?;
    let certificate = coloring::certify(g, &c)?;
    Ok(ColorOutcome {
        coloring: c,
        tree: Some(tree),
        report: Some(report),
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{fat_triangle, fig2, petersen};

    #[test]
    fn anchors() {
        let cfg = PipelineConfig::default();
        let out = color(&petersen(), &cfg).unwrap();
        assert!(out.is_sound());
        assert!(out.colors_used() <= 5);
        assert_eq!(out.certificate.bound_floor, 5);
        let t3 = color(&fat_triangle(3), &cfg).unwrap();
        assert_eq!(t3.colors_used(), 9);
        assert_eq!(t3.certificate.bound_floor, 9);
        let f = color(&fig2(), &cfg).unwrap();
        assert!(f.colors_used() <= 7);
        assert_eq!(f.certificate.bound_floor, 7);
    }

    #[test]
    fn trivial_inputs() {
        let cfg = PipelineConfig::default();
        let two = Multigraph::from_pairs(2, &[(0, 1); 4]).unwrap();
        let out = color(&two, &cfg).unwrap();
        assert_eq!(out.colors_used(), 4);
        assert!(out.certificate.satisfied && !out.certificate.applicable);
        let empty = Multigraph::new(5);
        assert_eq!(color(&empty, &cfg).unwrap().colors_used(), 0);
    }
}
