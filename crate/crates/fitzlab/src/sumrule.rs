//! Sum rule for represented operators: the inf-convolution (in the dual
//! variable) of two family members represents T1 + T2, the conjugate splits
//! as an exact min under the Attouch-Brezis qualification, and the equality
//! set of the flipped representative recovers the Minkowski-sum graph.
//!
//! Pair tables are laid out with the primal axes first, so a flat index
//! splits as `primal_flat * m^d + dual_flat`.

use crate::conjugation::{conjugate_value, flip_conjugate};
use crate::error::{Error, Result};
use crate::exec;
use crate::numerics::{BoxGrid, ExtReal, GridFunction};
use crate::operators::{OperatorGraph, MONOTONE_TOL};
use crate::report::CheckReport;
use crate::representations::family_membership;
use crate::spaces::{dot, DualityPair};

/// Primal grid nodes where some dual node makes h finite.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedDomain {
    pub dim: usize,
    pub nodes: Vec<Vec<f64>>,
}

fn half_dim(h: &GridFunction) -> Result<usize> {
    let dim = h.grid().dim();
    if dim % 2 != 0 {
        return Err(Error::InvalidGrid("pair grid must have even dimension".into()));
    }
    Ok(dim / 2)
}

/// Exact scan over the table; nonempty for proper h.
pub fn projected_domain(h: &GridFunction) -> Result<ProjectedDomain> {
    let d = half_dim(h)?;
    let grid = h.grid();
    let m = grid.points_per_axis();
    let md = m.pow(d as u32);
    let np = grid.node_count() / md;
    let nodes = (0..np)
        .filter(|&p| (0..md).any(|s| h.value(p * md + s).is_finite()))
        .map(|p| {
            let node = grid.node(p * md);
            node[..d].to_vec()
        })
        .collect();
    Ok(ProjectedDomain { dim: d, nodes })
}

fn gram_schmidt(points: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for p in points {
        let mut r = p.clone();
        for b in &basis {
            let c = dot(&r, b);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri -= c * bi;
            }
        }
        let n = dot(&r, &r).sqrt();
        if n > tol {
            for ri in r.iter_mut() {
                *ri /= n;
            }
            basis.push(r);
        }
    }
    basis
}

fn cross3(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Attouch-Brezis qualification: the cone spanned by D_X(h1) - D_X(h2)
/// must fill its linear span. A direction u with the whole difference set
/// on one side (and not all on the boundary) witnesses an asymmetric cone;
/// candidate directions are the normals of hyperplanes through 0 and
/// span-dimension-minus-one difference points.
pub fn qualification_check(h1: &GridFunction, h2: &GridFunction) -> Result<CheckReport> {
    let d1 = projected_domain(h1)?;
    let d2 = projected_domain(h2)?;
    if d1.dim != d2.dim {
        return Err(Error::DimensionMismatch {
            expected: d1.dim,
            got: d2.dim,
        });
    }
    let diffs: Vec<Vec<f64>> = d1
        .nodes
        .iter()
        .flat_map(|a| {
            d2.nodes
                .iter()
                .map(|b| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<f64>>())
        })
        .collect();
    let scale = diffs
        .iter()
        .flat_map(|p| p.iter().map(|c| c.abs()))
        .fold(1.0f64, f64::max);
    let tol = 1e-9 * scale;
    let basis = gram_schmidt(&diffs, tol);
    let k = basis.len();

    let mut report = CheckReport::new(
        "qualification_check",
        "Attouch-Brezis condition: union of scaled domain differences is a closed subspace",
        tol,
    );
    report.probes = diffs.len();
    for b in &basis {
        report.witness("span_basis", b.clone(), 0.0);
    }

    // difference points in span coordinates
    let coords: Vec<Vec<f64>> = diffs
        .iter()
        .map(|p| basis.iter().map(|b| dot(p, b)).collect())
        .collect();
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    match k {
        0 => {}
        1 => candidates.push(vec![1.0]),
        2 => {
            for p in &coords {
                if dot(p, p).sqrt() > tol {
                    candidates.push(vec![-p[1], p[0]]);
                }
            }
        }
        3 => {
            for (i, p) in coords.iter().enumerate() {
                for q in coords.iter().skip(i + 1) {
                    let c = cross3(p, q);
                    if dot(&c, &c).sqrt() > tol {
                        candidates.push(c);
                    }
                }
            }
        }
        _ => {
            return Err(Error::Config(format!(
                "qualification_check supports span dimension <= 3, got {k}"
            )))
        }
    }

    'outer: for cand in &candidates {
        for u in [cand.clone(), cand.iter().map(|c| -c).collect()] {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for p in &coords {
                let v = dot(p, &u);
                min = min.min(v);
                max = max.max(v);
            }
            if min >= -tol && max > tol {
                // embed the separating direction back into X
                let mut ambient = vec![0.0; d1.dim];
                for (c, b) in u.iter().zip(&basis) {
                    for (ai, bi) in ambient.iter_mut().zip(b) {
                        *ai += c * bi;
                    }
                }
                report.violate(
                    "cone_not_subspace",
                    ambient,
                    "difference set lies on one side of a hyperplane through 0".into(),
                );
                break 'outer;
            }
        }
    }
    Ok(report)
}

/// h(x, x*) = min over dual nodes y* of h1(x, y*) + h2(x, x* - y*), with
/// x* - y* off-lattice treated as +inf (truncated inf: can only raise h,
/// never fabricate equality).
pub fn inf_conv_representative(h1: &GridFunction, h2: &GridFunction) -> Result<GridFunction> {
    let d = half_dim(h1)?;
    if h1.grid() != h2.grid() {
        return Err(Error::InvalidGrid(
            "inf_conv_representative needs a shared pair grid".into(),
        ));
    }
    let grid = h1.grid();
    let m = grid.points_per_axis();
    let md = m.pow(d as u32);
    let v1 = h1.values_f64();
    let v2 = h2.values_f64();
    // dual multi-indices, shared across primal slices
    let duals: Vec<Vec<usize>> = (0..md)
        .map(|s| {
            let mut digits = Vec::with_capacity(d);
            let mut rem = s;
            for j in (0..d).rev() {
                let _ = j;
                digits.push(rem % m);
                rem /= m;
            }
            digits.reverse();
            digits
        })
        .collect();
    let values = exec::map_indexed(grid.node_count(), |i| {
        let p = i / md;
        let s = i % md;
        let mut best = f64::INFINITY;
        'y: for y in 0..md {
            let a = v1[p * md + y];
            if a == f64::INFINITY {
                continue;
            }
            // lattice index of x* - y*
            let mut rest = 0usize;
            for (ds, dy) in duals[s].iter().zip(&duals[y]) {
                let shifted = *ds as i64 - *dy as i64 + (m as i64 - 1) / 2;
                if shifted < 0 || shifted >= m as i64 {
                    continue 'y;
                }
                rest = rest * m + shifted as usize;
            }
            let b = v2[p * md + rest];
            if b == f64::INFINITY {
                continue;
            }
            let t = a + b;
            if t < best {
                best = t;
            }
        }
        if best == f64::INFINITY {
            ExtReal::PosInf
        } else {
            ExtReal::finite(best)
        }
    });
    GridFunction::new(grid.clone(), values)
}

/// h*(x*, x**) as the exact min over tabulated u* of
/// h1*(u*, x**) + h2*(x* - u*, x**). Guaranteed to match the direct
/// conjugate of the inf-convolution only when the qualification holds.
pub fn conjugate_min_formula(
    h1: &GridFunction,
    h2: &GridFunction,
    xstar: &[f64],
    xstarstar: &[f64],
) -> Result<ExtReal> {
    let d = half_dim(h1)?;
    if h1.grid() != h2.grid() {
        return Err(Error::InvalidGrid(
            "conjugate_min_formula needs a shared pair grid".into(),
        ));
    }
    if xstar.len() != d || xstarstar.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: xstar.len().max(xstarstar.len()),
        });
    }
    let grid = h1.grid();
    let lattice = BoxGrid::new(d, grid.radius(), grid.points_per_axis())?;
    let mut best = f64::INFINITY;
    for u in lattice.nodes() {
        let rest: Vec<f64> = xstar.iter().zip(&u).map(|(a, b)| a - b).collect();
        let mut p1 = u.clone();
        p1.extend_from_slice(xstarstar);
        let mut p2 = rest;
        p2.extend_from_slice(xstarstar);
        let t = conjugate_value(h1, &p1)? + conjugate_value(h2, &p2)?;
        if t < best {
            best = t;
        }
    }
    if best == f64::INFINITY {
        Ok(ExtReal::PosInf)
    } else {
        ExtReal::new(best)
    }
}

fn equality_nodes(h: &GridFunction, d: usize, eq_tol: f64) -> Vec<Vec<f64>> {
    let grid = h.grid();
    let flagged = exec::map_indexed(grid.node_count(), |i| {
        let ExtReal::Finite(v) = h.value(i) else {
            return None;
        };
        let node = grid.node(i);
        let pi = dot(&node[..d], &node[d..]);
        if (v - pi).abs() <= eq_tol {
            Some(node)
        } else {
            None
        }
    });
    flagged.into_iter().flatten().collect()
}

fn within_cell(a: &[f64], b: &[f64], cell: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= cell)
}

/// Pointwise Minkowski sum of two graphs at shared primal nodes, restricted
/// to sums that land on the dual lattice of the pair grid.
fn minkowski_sum(
    t1: &OperatorGraph,
    t2: &OperatorGraph,
    grid: &BoxGrid,
    d: usize,
) -> Vec<DualityPair> {
    let tol = grid.spacing() * 1e-6;
    let mut out: Vec<DualityPair> = Vec::new();
    for p1 in t1.pairs() {
        for p2 in t2.pairs() {
            if !within_cell(&p1.x, &p2.x, tol) {
                continue;
            }
            let sum: Vec<f64> = p1.xstar.iter().zip(&p2.xstar).map(|(a, b)| a + b).collect();
            let mut node = p1.x.clone();
            node.extend_from_slice(&sum);
            if grid.index_of(&node, tol).is_none() {
                continue;
            }
            let pair = DualityPair {
                x: p1.x.clone(),
                xstar: sum,
            };
            if !out.contains(&pair) {
                out.push(pair);
            }
        }
    }
    let _ = d;
    out
}

/// Builds the inf-convolution representative of T1 + T2 and compares its
/// equality sets {h = pi} and {flip(h) = pi} against the Minkowski-sum
/// graph; also sweeps NI deficits of the sum graph over `ni_probes`.
///
/// The comparison is two-sided at shared primal nodes: every on-lattice
/// Minkowski pair must have an equality node within one grid cell, and
/// every equality node whose primal part appears in the sum graph must be
/// within one cell of a sum pair. Equality nodes at primal locations the
/// sampled sum graph never reaches (conjugation truncation near the grid
/// boundary) are not counted against the verdict.
pub fn sum_operator_check(
    t1: &OperatorGraph,
    t2: &OperatorGraph,
    h1: &GridFunction,
    h2: &GridFunction,
    ni_probes: &BoxGrid,
) -> Result<CheckReport> {
    let d = half_dim(h1)?;
    for (label, h, t) in [("h1", h1, t1), ("h2", h2, t2)] {
        let m = family_membership(h, t, None)?;
        if !m.verdict.passed() {
            return Err(Error::MembershipFailed(format!(
                "{label} is not a family member: {:?}",
                m.first_violation
            )));
        }
    }
    let grid = h1.grid();
    let spacing = grid.spacing();
    let cell = spacing * 1.0001;
    let eq_tol = 0.25 * spacing * spacing + 1e-12;
    let mut report = CheckReport::new(
        "sum_operator_check",
        "inf-convolution representative of T1 + T2 and its equality set (Attouch-Brezis sum rule)",
        eq_tol,
    );

    let h = inf_conv_representative(h1, h2)?;
    let jh = flip_conjugate(&h)?;
    let sums = minkowski_sum(t1, t2, grid, d);
    if sums.is_empty() {
        return Err(Error::EmptyGraph);
    }

    for (label, table) in [("h", &h), ("flip", &jh)] {
        let eq = equality_nodes(table, d, eq_tol);
        report.probes += grid.node_count();
        for p in &sums {
            let mut node = p.x.clone();
            node.extend_from_slice(&p.xstar);
            if !eq.iter().any(|e| within_cell(e, &node, cell)) {
                report.violate(
                    &format!("{label}_misses_sum_pair"),
                    node,
                    "Minkowski-sum pair has no nearby equality node".into(),
                );
            }
        }
        for e in &eq {
            let shares_primal = sums.iter().any(|p| within_cell(&p.x, &e[..d], cell));
            if !shares_primal {
                continue;
            }
            let near = sums.iter().any(|p| {
                let mut node = p.x.clone();
                node.extend_from_slice(&p.xstar);
                within_cell(e, &node, cell)
            });
            if !near {
                report.violate(
                    &format!("{label}_spurious_equality"),
                    e.clone(),
                    "equality node with no nearby Minkowski-sum pair".into(),
                );
            }
        }
    }

    let sum_graph = OperatorGraph::new(*t1.space(), sums)?;
    let worst = exec::map_indexed(ni_probes.node_count(), |i| {
        let node = ni_probes.node(i);
        crate::analysis::ni_deficit(&sum_graph, &node[d..], &node[..d]).deficit
    })
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max);
    report.probes += ni_probes.node_count();
    if worst > MONOTONE_TOL {
        report.violate(
            "sum_ni_deficit",
            Vec::new(),
            format!("worst NI deficit {worst} > tol"),
        );
    }
    report.witness("worst_ni_deficit", Vec::new(), worst);
    Ok(report)
}
