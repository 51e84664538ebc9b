//! Finite sampled graphs of point-to-set operators, monotonicity and
//! maximality diagnostics, and builders for the standard examples.
//!
//! A graph is a finite sample of a relation T in X x X*. Every sup/inf over
//! T elsewhere in the crate is an exact max/min over this list, so grid
//! error enters only through how T was sampled.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::numerics::{BoxGrid, GridFunction};
use crate::spaces::{dot, DualityPair, SpaceSpec};

/// Tolerance for pairwise monotonicity products (pure arithmetic).
pub const MONOTONE_TOL: f64 = 1e-12;
/// Tolerance for subgradient inequalities (accumulated sums).
pub const SUBGRADIENT_TOL: f64 = 1e-9;

/// Sampled graph of an operator T in X x X*.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorGraph {
    space: SpaceSpec,
    pairs: Vec<DualityPair>,
}

/// A violating pair of graph points together with the recomputable product
/// `<x_a - x_b, x*_a - x*_b>`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityWitness {
    pub pair_a: DualityPair,
    pub pair_b: DualityPair,
    pub product: f64,
}

fn pair_product(a: &DualityPair, b: &DualityPair) -> f64 {
    let dx: Vec<f64> = a.x.iter().zip(&b.x).map(|(p, q)| p - q).collect();
    let ds: Vec<f64> = a.xstar.iter().zip(&b.xstar).map(|(p, q)| p - q).collect();
    dot(&dx, &ds)
}

impl OperatorGraph {
    pub fn new(space: SpaceSpec, pairs: Vec<DualityPair>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyGraph);
        }
        for p in &pairs {
            if p.dim() != space.dim {
                return Err(Error::DimensionMismatch {
                    expected: space.dim,
                    got: p.dim(),
                });
            }
        }
        for i in 0..pairs.len() {
            for j in (i + 1)..pairs.len() {
                if pairs[i] == pairs[j] {
                    return Err(Error::DuplicatePair);
                }
            }
        }
        Ok(OperatorGraph { space, pairs })
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn pairs(&self) -> &[DualityPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// First monotonicity violation in pair-index order, or `None` when the
    /// graph is monotone within [`MONOTONE_TOL`].
    pub fn monotonicity_witness(&self) -> Option<MonotonicityWitness> {
        let n = self.pairs.len();
        exec::find_map_first(n, |i| {
            for j in (i + 1)..n {
                let product = pair_product(&self.pairs[i], &self.pairs[j]);
                if product < -MONOTONE_TOL {
                    return Some(MonotonicityWitness {
                        pair_a: self.pairs[i].clone(),
                        pair_b: self.pairs[j].clone(),
                        product,
                    });
                }
            }
            None
        })
    }

    pub fn is_monotone(&self) -> bool {
        self.monotonicity_witness().is_none()
    }

    /// True iff `<z - p.x, z* - p.x*> >= -tol` for every (z, z*) in the
    /// graph.
    pub fn monotonically_related(&self, p: &DualityPair) -> bool {
        self.pairs
            .iter()
            .all(|q| pair_product(q, p) >= -MONOTONE_TOL)
    }

    /// Distance of a candidate pair from the sampled graph, as the max of
    /// the primal and dual norm distances to the nearest graph pair.
    pub fn graph_distance(&self, p: &DualityPair) -> f64 {
        self.pairs
            .iter()
            .map(|q| {
                let dx: Vec<f64> = q.x.iter().zip(&p.x).map(|(a, b)| a - b).collect();
                let ds: Vec<f64> = q.xstar.iter().zip(&p.xstar).map(|(a, b)| a - b).collect();
                crate::spaces::norm(&dx, &self.space).max(crate::spaces::dual_norm(&ds, &self.space))
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Probes a grid over X x X* for monotone extensions of the graph.
    ///
    /// Probe points within `tol` of the sampled graph are treated as
    /// on-graph at the probe resolution. An empty result means the sample is
    /// maximal at that resolution; each returned point extends the graph
    /// monotonically.
    pub fn maximality_probe(&self, probes: &BoxGrid, tol: f64) -> Vec<DualityPair> {
        let d = self.space.dim;
        assert_eq!(probes.dim(), 2 * d, "probe grid must live on X x X*");
        let found = exec::map_indexed(probes.node_count(), |i| {
            let node = probes.node(i);
            let p = DualityPair {
                x: node[..d].to_vec(),
                xstar: node[d..].to_vec(),
            };
            if self.graph_distance(&p) <= tol {
                return None;
            }
            if self.monotonically_related(&p) {
                Some(p)
            } else {
                None
            }
        });
        found.into_iter().flatten().collect()
    }
}

/// Subdifferential of a proper convex tabulated f: all (x, x*) over
/// primal x dual grid nodes where the subgradient inequality
/// `f(y) >= f(x) + <y - x, x*>` holds at every primal node within
/// [`SUBGRADIENT_TOL`].
pub fn build_subdifferential(
    f: &GridFunction,
    s: &SpaceSpec,
    dual_grid: &BoxGrid,
) -> Result<OperatorGraph> {
    let grid = f.grid();
    if grid.dim() != s.dim || dual_grid.dim() != s.dim {
        return Err(Error::DimensionMismatch {
            expected: s.dim,
            got: grid.dim(),
        });
    }
    let values = f.values_f64();
    let n = grid.node_count();
    let rows = exec::map_indexed(n, |xi| {
        let fx = values[xi];
        if !fx.is_finite() {
            return Vec::new();
        }
        let x = grid.node(xi);
        let mut out = Vec::new();
        let mut y = vec![0.0; s.dim];
        'dual: for di in 0..dual_grid.node_count() {
            let xstar = dual_grid.node(di);
            for (yi, &fy) in values.iter().enumerate() {
                grid.node_into(yi, &mut y);
                let diff: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
                if fy < fx + dot(&diff, &xstar) - SUBGRADIENT_TOL {
                    continue 'dual;
                }
            }
            out.push(DualityPair {
                x: x.clone(),
                xstar,
            });
        }
        out
    });
    let pairs: Vec<DualityPair> = rows.into_iter().flatten().collect();
    if pairs.is_empty() {
        return Err(Error::EmptyGraph);
    }
    OperatorGraph::new(*s, pairs)
}

/// Graph of a linear map x -> Ax sampled over a grid. The result must be
/// monotone (A positive semidefinite); otherwise an error with a witness is
/// returned.
pub fn build_linear(a: &[Vec<f64>], s: &SpaceSpec, sample_grid: &BoxGrid) -> Result<OperatorGraph> {
    if a.len() != s.dim || a.iter().any(|row| row.len() != s.dim) {
        return Err(Error::DimensionMismatch {
            expected: s.dim,
            got: a.len(),
        });
    }
    if sample_grid.dim() != s.dim {
        return Err(Error::DimensionMismatch {
            expected: s.dim,
            got: sample_grid.dim(),
        });
    }
    let pairs: Vec<DualityPair> = sample_grid
        .nodes()
        .map(|x| {
            let ax: Vec<f64> = a.iter().map(|row| dot(row, &x)).collect();
            DualityPair { x, xstar: ax }
        })
        .collect();
    let graph = OperatorGraph::new(*s, pairs)?;
    if let Some(w) = graph.monotonicity_witness() {
        return Err(Error::NotMonotone {
            a: w.pair_a.x,
            b: w.pair_b.x,
            product: w.product,
        });
    }
    Ok(graph)
}

/// Graph of x -> c x sampled over a grid, for c >= 0.
pub fn build_scaled_identity(s: &SpaceSpec, sample_grid: &BoxGrid, c: f64) -> Result<OperatorGraph> {
    let mut a = vec![vec![0.0; s.dim]; s.dim];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = c;
    }
    build_linear(&a, s, sample_grid)
}

/// 90-degree rotation in R^2: (a, b) -> (-b, a). Monotone but not a
/// subdifferential.
pub fn build_rotation(s: &SpaceSpec, sample_grid: &BoxGrid) -> Result<OperatorGraph> {
    if s.dim != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: s.dim });
    }
    let a = vec![vec![0.0, -1.0], vec![1.0, 0.0]];
    build_linear(&a, s, sample_grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ExtReal;
    use crate::spaces::NormTag;

    fn l2(dim: usize) -> SpaceSpec {
        SpaceSpec::new(dim, NormTag::L2).unwrap()
    }

    fn pair(x: f64, xs: f64) -> DualityPair {
        DualityPair::new(vec![x], vec![xs]).unwrap()
    }

    fn identity_graph(radius: f64, m: usize) -> OperatorGraph {
        let grid = BoxGrid::new(1, radius, m).unwrap();
        let pairs = grid.nodes().map(|x| DualityPair { xstar: x.clone(), x }).collect();
        OperatorGraph::new(l2(1), pairs).unwrap()
    }

    #[test]
    fn identity_is_monotone() {
        assert!(identity_graph(1.0, 11).is_monotone());
    }

    #[test]
    fn rotation_is_monotone_with_zero_products() {
        let grid = BoxGrid::new(2, 1.0, 5).unwrap();
        let g = build_rotation(&l2(2), &grid).unwrap();
        assert!(g.is_monotone());
        for a in g.pairs() {
            for b in g.pairs() {
                assert_eq!(pair_product(a, b), 0.0);
            }
        }
    }

    #[test]
    fn antitone_pair_gives_witness() {
        let g = OperatorGraph::new(l2(1), vec![pair(0.0, 1.0), pair(1.0, 0.0)]).unwrap();
        let w = g.monotonicity_witness().expect("must fail");
        assert_eq!(w.product, -1.0);
        assert!(!g.is_monotone());
    }

    #[test]
    fn graph_rejects_duplicates_and_empty() {
        assert!(matches!(
            OperatorGraph::new(l2(1), vec![]),
            Err(Error::EmptyGraph)
        ));
        assert!(matches!(
            OperatorGraph::new(l2(1), vec![pair(0.0, 0.0), pair(0.0, 0.0)]),
            Err(Error::DuplicatePair)
        ));
    }

    #[test]
    fn monotonically_related_examples() {
        let g = identity_graph(1.0, 21);
        assert!(g.monotonically_related(&pair(2.0, 2.0)));
        // (0, 1) is refuted by the interior sample z = 0.5
        assert!(!g.monotonically_related(&pair(0.0, 1.0)));
        // every graph pair is related to its own graph
        for p in g.pairs() {
            assert!(g.monotonically_related(p));
        }
    }

    #[test]
    fn maximality_probe_dense_identity_is_empty() {
        let g = identity_graph(1.0, 21);
        let probes = BoxGrid::new(2, 1.0, 21).unwrap();
        let tol = probes.spacing() * 1.0001;
        assert!(g.maximality_probe(&probes, tol).is_empty());
    }

    #[test]
    fn maximality_probe_truncated_identity_reports_extension() {
        // identity restricted to [0, 1]
        let pairs: Vec<DualityPair> = (0..=10).map(|i| pair(i as f64 / 10.0, i as f64 / 10.0)).collect();
        let g = OperatorGraph::new(l2(1), pairs).unwrap();
        let probes = BoxGrid::new(2, 2.0, 21).unwrap();
        let tol = probes.spacing() * 1.0001;
        let ext = g.maximality_probe(&probes, tol);
        assert!(ext.contains(&pair(2.0, 2.0)));
    }

    #[test]
    fn maximality_probe_single_point() {
        let g = OperatorGraph::new(l2(1), vec![pair(0.0, 0.0)]).unwrap();
        assert!(!g.monotonically_related(&pair(1.0, -1.0)));
        assert!(g.monotonically_related(&pair(1.0, 1.0)));
        let probes = BoxGrid::new(2, 1.0, 3).unwrap();
        let ext = g.maximality_probe(&probes, 1e-9);
        assert!(ext.contains(&pair(1.0, 1.0)));
        assert!(!ext.contains(&pair(1.0, -1.0)));
    }

    #[test]
    fn maximality_probe_reports_deleted_pair() {
        let full = identity_graph(1.0, 11);
        let mut pairs = full.pairs().to_vec();
        let deleted = pairs.remove(5);
        let g = OperatorGraph::new(l2(1), pairs).unwrap();
        let probes = BoxGrid::new(2, 1.0, 11).unwrap();
        let ext = g.maximality_probe(&probes, 1e-9);
        assert!(ext.contains(&deleted));
    }

    #[test]
    fn subdifferential_of_half_square_is_identity() {
        let grid = BoxGrid::new(1, 1.0, 9).unwrap();
        let f = GridFunction::from_fn(grid.clone(), |x| ExtReal::finite(0.5 * x[0] * x[0])).unwrap();
        let g = build_subdifferential(&f, &l2(1), &grid).unwrap();
        for p in g.pairs() {
            assert_eq!(p.x, p.xstar);
        }
        assert_eq!(g.len(), grid.node_count());
        assert!(g.is_monotone());
    }

    #[test]
    fn subdifferential_of_abs() {
        let grid = BoxGrid::new(1, 1.0, 9).unwrap();
        let f = GridFunction::from_fn(grid.clone(), |x| ExtReal::finite(x[0].abs())).unwrap();
        let g = build_subdifferential(&f, &l2(1), &grid).unwrap();
        for p in g.pairs() {
            let (x, xs) = (p.x[0], p.xstar[0]);
            if x == 0.0 {
                assert!(xs.abs() <= 1.0 + 1e-9);
            } else {
                assert!((xs - x.signum()).abs() <= 1e-9, "x={x} xs={xs}");
            }
        }
        assert!(g.is_monotone());
    }

    #[test]
    fn subdifferential_of_box_indicator_is_normal_cone() {
        let grid = BoxGrid::new(1, 2.0, 9).unwrap();
        let f = GridFunction::from_fn(grid.clone(), |x| {
            if x[0].abs() <= 1.0 {
                ExtReal::finite(0.0)
            } else {
                ExtReal::PosInf
            }
        })
        .unwrap();
        let g = build_subdifferential(&f, &l2(1), &grid).unwrap();
        for p in g.pairs() {
            let (x, xs) = (p.x[0], p.xstar[0]);
            assert!(x.abs() <= 1.0);
            if x == 1.0 {
                assert!(xs >= -1e-9);
            } else if x == -1.0 {
                assert!(xs <= 1e-9);
            } else {
                assert!(xs.abs() <= 1e-9);
            }
        }
        assert!(g.is_monotone());
    }

    #[test]
    fn linear_psd_examples() {
        let grid = BoxGrid::new(2, 1.0, 3).unwrap();
        let s = l2(2);
        let id = build_linear(&[vec![1.0, 0.0], vec![0.0, 1.0]], &s, &grid).unwrap();
        for p in id.pairs() {
            assert_eq!(p.x, p.xstar);
        }
        let flat = build_linear(&[vec![1.0, 0.0], vec![0.0, 0.0]], &s, &grid).unwrap();
        for p in flat.pairs() {
            assert_eq!(p.xstar[1], 0.0);
        }
        assert!(flat.is_monotone());
        // not PSD -> error
        let bad = build_linear(&[vec![-1.0, 0.0], vec![0.0, 1.0]], &s, &grid);
        assert!(matches!(bad, Err(Error::NotMonotone { .. })));
    }
}
