//! Geometric queries on confidence polytopes: feasibility LPs, uniform
//! sampling, axis-aligned bounding boxes, and the Chebyshev ball.

pub mod lp;
mod sampler;

pub use lp::{solve_lp, LinearProgram, LpOutcome};
pub use sampler::{hit_and_run_sample, interior_point, SampleSet, SamplerOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::ConfidencePolytope;
use crate::quantum::BlochVector;

/// Axis-aligned outer bound of the facet polytope. The PSD body is
/// deliberately ignored: the LP over facets is exact, and the box is
/// then a certified outer bound for the confidence region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundingBox {
    /// (lo, hi) per Bloch axis.
    pub intervals: Vec<(f64, f64)>,
    /// Axis with the longest edge — the suggested direction for
    /// further measurements.
    pub widest_axis: usize,
}

impl BoundingBox {
    pub fn edge_lengths(&self) -> Vec<f64> {
        self.intervals.iter().map(|(lo, hi)| hi - lo).collect()
    }

    pub fn contains(&self, coords: &[f64], tol: f64) -> bool {
        self.intervals
            .iter()
            .zip(coords)
            .all(|((lo, hi), x)| *x >= lo - tol && *x <= hi + tol)
    }
}

/// Facet list as LP constraints, skipping zero-normal (vacuous) rows.
/// A zero normal with negative offset makes the system infeasible.
fn facet_constraints(poly: &ConfidencePolytope) -> Result<Vec<(Vec<f64>, f64)>> {
    let mut rows = Vec::with_capacity(poly.facets().len());
    for f in poly.facets() {
        let norm: f64 = f.normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-14 {
            if f.offset < -1e-12 {
                return Err(Error::EmptyRegion(
                    "zero-normal facet with negative offset".into(),
                ));
            }
            continue;
        }
        rows.push((f.normal.clone(), f.offset));
    }
    Ok(rows)
}

/// Minimum enclosing axis-aligned box of the facet polytope, via one
/// min and one max LP per basis axis.
pub fn bounding_box(poly: &ConfidencePolytope) -> Result<BoundingBox> {
    let dim = poly.dim() * poly.dim() - 1;
    let constraints = facet_constraints(poly)?;
    let mut intervals = Vec::with_capacity(dim);
    for axis in 0..dim {
        let mut lohi = [0.0f64; 2];
        for (slot, sign) in [(0usize, -1.0f64), (1usize, 1.0f64)] {
            let mut objective = vec![0.0; dim];
            objective[axis] = sign;
            let outcome = solve_lp(&LinearProgram {
                objective,
                constraints: constraints.clone(),
            })?;
            match outcome {
                LpOutcome::Optimal { value, .. } => lohi[slot] = sign * value,
                LpOutcome::Infeasible => {
                    return Err(Error::EmptyRegion(format!(
                        "facet system infeasible (axis {axis})"
                    )))
                }
                LpOutcome::Unbounded => return Err(Error::UnboundedAxis(axis)),
            }
        }
        intervals.push((lohi[0], lohi[1]));
    }
    let widest_axis = intervals
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| (a.1 - a.0).partial_cmp(&(b.1 - b.0)).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(BoundingBox {
        intervals,
        widest_axis,
    })
}

/// Largest ball inscribed in the facet polytope: maximise R subject to
/// a·x + R‖a‖ ≤ b. The PSD body is ignored, as for the bounding box.
pub fn chebyshev_center(poly: &ConfidencePolytope) -> Result<(BlochVector, f64)> {
    let dim = poly.dim() * poly.dim() - 1;
    let constraints = facet_constraints(poly)?;
    // Boundedness per axis first, so an unbounded system is reported
    // with its axis rather than as an opaque unbounded LP.
    let _ = bounding_box(poly)?;
    let mut rows = Vec::with_capacity(constraints.len());
    for (a, b) in &constraints {
        let norm: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut row = a.clone();
        row.push(norm);
        rows.push((row, *b));
    }
    // R ≥ 0.
    let mut nonneg = vec![0.0; dim + 1];
    nonneg[dim] = -1.0;
    rows.push((nonneg, 0.0));
    let mut objective = vec![0.0; dim + 1];
    objective[dim] = 1.0;
    match solve_lp(&LinearProgram {
        objective,
        constraints: rows,
    })? {
        LpOutcome::Optimal { x, value } => {
            let center = BlochVector::new(poly.dim(), x[..dim].to_vec())?;
            Ok((center, value))
        }
        LpOutcome::Infeasible => Err(Error::EmptyRegion("facet system infeasible".into())),
        LpOutcome::Unbounded => Err(Error::EmptyRegion(
            "inscribed ball unbounded despite bounded box".into(),
        )),
    }
}
