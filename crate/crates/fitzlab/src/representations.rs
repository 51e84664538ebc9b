//! Convex representations of monotone operators: the Fitzpatrick function,
//! the S-function (largest family member), family membership checking, and
//! the quadratic coupling p(x,x*) = 1/2 ||x||^2 + 1/2 ||x*||^2.
//!
//! The Fitzpatrick function is an exact finite max over the sampled graph.
//! The S-function goes through grid biconjugation and is approximate at grid
//! resolution; the two must not be conflated when reasoning about
//! tolerances.

use crate::conjugation::{biconjugate, conjugate_value};
use crate::error::{Error, Result};
use crate::exec;
use crate::numerics::{BoxGrid, ExtReal, GridFunction};
use crate::operators::OperatorGraph;
use crate::report::CheckReport;
use crate::spaces::{dot, dual_norm, norm, SpaceSpec};

/// The coupling p(x,x*) = 1/2 ||x||^2 + 1/2 ||x*||^2 in the given norms.
/// p >= pi always, with equality exactly on the graph of the duality map.
pub fn quadratic_coupling(x: &[f64], xstar: &[f64], s: &SpaceSpec) -> f64 {
    let nx = norm(x, s);
    let ns = dual_norm(xstar, s);
    0.5 * nx * nx + 0.5 * ns * ns
}

/// phi_T(x,x*) = sup over graph pairs (y,y*) of <x,y*> + <y,x*> - <y,y*>.
/// Exact max over the finite graph; at a graph pair of a monotone T the
/// self-term wins and the value is pi(x,x*) exactly.
pub fn fitzpatrick(t: &OperatorGraph, x: &[f64], xstar: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for p in t.pairs() {
        let term = dot(x, &p.xstar) + dot(&p.x, xstar) - dot(&p.x, &p.xstar);
        if term > best {
            best = term;
        }
    }
    best
}

/// Tabulates phi_T over a pair grid (first half of the axes is x, second
/// half x*).
pub fn fitzpatrick_table(t: &OperatorGraph, pair_grid: &BoxGrid) -> Result<GridFunction> {
    let d = pair_half_dim(t, pair_grid)?;
    let values = exec::map_indexed(pair_grid.node_count(), |i| {
        let node = pair_grid.node(i);
        ExtReal::finite(fitzpatrick(t, &node[..d], &node[d..]))
    });
    GridFunction::new(pair_grid.clone(), values)
}

fn pair_half_dim(t: &OperatorGraph, pair_grid: &BoxGrid) -> Result<usize> {
    let d = t.space().dim;
    if pair_grid.dim() != 2 * d {
        return Err(Error::DimensionMismatch {
            expected: 2 * d,
            got: pair_grid.dim(),
        });
    }
    Ok(d)
}

/// The bifunction pi + delta_T tabulated on a pair grid: pi at graph nodes,
/// inf elsewhere. Graph pairs must sit on the grid.
pub fn pi_plus_indicator(t: &OperatorGraph, pair_grid: &BoxGrid) -> Result<GridFunction> {
    let d = pair_half_dim(t, pair_grid)?;
    let tol = pair_grid.spacing() * 1e-6;
    let mut values = vec![ExtReal::PosInf; pair_grid.node_count()];
    for p in t.pairs() {
        let mut point = Vec::with_capacity(2 * d);
        point.extend_from_slice(&p.x);
        point.extend_from_slice(&p.xstar);
        let idx = pair_grid
            .index_of(&point, tol)
            .ok_or_else(|| Error::OffGrid(format!("graph pair {point:?} not on the pair grid")))?;
        values[idx] = ExtReal::finite(dot(&p.x, &p.xstar));
    }
    GridFunction::new(pair_grid.clone(), values)
}

/// Domain of the discrete convex envelope: iterated on-grid midpoint
/// relaxation to a fixed point. Values only shrink, so the loop terminates;
/// a node left at +inf is outside the hull reachable at this resolution.
fn midpoint_envelope(h: &GridFunction) -> Vec<f64> {
    let grid = h.grid();
    let n = grid.node_count();
    let mut vals = h.values_f64();
    let digits: Vec<Vec<usize>> = (0..n).map(|i| grid.multi_index(i)).collect();
    loop {
        let mut changed = false;
        for a in 0..n {
            if !vals[a].is_finite() {
                continue;
            }
            for b in (a + 1)..n {
                if !vals[b].is_finite() {
                    continue;
                }
                if digits[a]
                    .iter()
                    .zip(&digits[b])
                    .any(|(&u, &v)| (u + v) % 2 != 0)
                {
                    continue;
                }
                let mid: Vec<usize> = digits[a]
                    .iter()
                    .zip(&digits[b])
                    .map(|(&u, &v)| (u + v) / 2)
                    .collect();
                let mi = grid.flat_index(&mid);
                let chord = 0.5 * (vals[a] + vals[b]);
                if chord < vals[mi] {
                    vals[mi] = chord;
                    changed = true;
                }
            }
        }
        if !changed {
            return vals;
        }
    }
}

/// S_T tabulated: the closed convex hull of pi + delta_T at grid
/// resolution. Values come from biconjugation over the pair grid; the
/// domain comes from the midpoint envelope, because the truncated dual sup
/// in the biconjugate cannot produce the +inf that clconv takes outside the
/// hull of the graph.
pub fn s_table(t: &OperatorGraph, pair_grid: &BoxGrid) -> Result<GridFunction> {
    let raw = pi_plus_indicator(t, pair_grid)?;
    let dom = midpoint_envelope(&raw);
    let bic = biconjugate(&raw)?;
    let values = (0..pair_grid.node_count())
        .map(|i| {
            if dom[i].is_finite() {
                bic.value(i)
            } else {
                ExtReal::PosInf
            }
        })
        .collect();
    GridFunction::new(pair_grid.clone(), values)
}

/// S_T at a single query node of the work grid.
pub fn s_function(
    t: &OperatorGraph,
    query_x: &[f64],
    query_xstar: &[f64],
    work_grid: &BoxGrid,
) -> Result<ExtReal> {
    let table = s_table(t, work_grid)?;
    let mut point = Vec::with_capacity(work_grid.dim());
    point.extend_from_slice(query_x);
    point.extend_from_slice(query_xstar);
    table.value_at(&point, work_grid.spacing() * 1e-6)
}

/// Estimates a local Lipschitz constant of `h` from finite axis-neighbor
/// differences; floors at 1 so the derived tolerance never collapses.
fn lipschitz_estimate(h: &GridFunction) -> f64 {
    let grid = h.grid();
    let spacing = grid.spacing();
    let m = grid.points_per_axis();
    let mut best = 1.0f64;
    for i in 0..grid.node_count() {
        let hv = h.value(i);
        if !hv.is_finite() {
            continue;
        }
        let digits = grid.multi_index(i);
        for (axis, &dig) in digits.iter().enumerate() {
            if dig + 1 >= m {
                continue;
            }
            let mut nb = digits.clone();
            nb[axis] = dig + 1;
            let nv = h.value(grid.flat_index(&nb));
            if nv.is_finite() {
                let slope = (nv.to_f64() - hv.to_f64()).abs() / spacing;
                if slope > best {
                    best = slope;
                }
            }
        }
    }
    best
}

/// Default membership tolerance: 10 * spacing * local Lipschitz estimate.
pub fn membership_tol(h: &GridFunction) -> f64 {
    10.0 * h.grid().spacing() * lipschitz_estimate(h)
}

/// Checks whether a tabulated bifunction h belongs to the Fitzpatrick family
/// of T: midpoint convexity on grid-aligned triples, h >= pi - tol at every
/// node, and |h - pi| <= tol on every graph pair. `tol` defaults to
/// 10 * spacing * Lipschitz estimate.
pub fn family_membership(
    h: &GridFunction,
    t: &OperatorGraph,
    tol: Option<f64>,
) -> Result<CheckReport> {
    let grid = h.grid();
    let d = pair_half_dim(t, grid)?;
    let tol = tol.unwrap_or_else(|| membership_tol(h));
    let mut report = CheckReport::new(
        "family_membership",
        "Fitzpatrick family: convex lsc h >= pi with equality on graph(T) (Fitzpatrick 1988)",
        tol,
    );
    let n = grid.node_count();

    // (iii) equality on the graph, checked first so the report's witnesses
    // lead with the graph pairs
    let pair_tol = grid.spacing() * 1e-6;
    for p in t.pairs() {
        let mut point = Vec::with_capacity(2 * d);
        point.extend_from_slice(&p.x);
        point.extend_from_slice(&p.xstar);
        let idx = grid
            .index_of(&point, pair_tol)
            .ok_or_else(|| Error::OffGrid(format!("graph pair {point:?} not on the grid")))?;
        report.probes += 1;
        let pi = dot(&p.x, &p.xstar);
        match h.value(idx) {
            ExtReal::PosInf => {
                report.violate("graph_equality", point, "h is +inf at a graph pair".into())
            }
            ExtReal::Finite(v) => {
                if (v - pi).abs() > tol {
                    report.violate(
                        "graph_equality",
                        point,
                        format!("|h - pi| = {} > tol", (v - pi).abs()),
                    );
                }
            }
        }
    }

    // (ii) minorization: h >= pi - tol at all nodes
    let minor = exec::find_map_first(n, |i| {
        let node = grid.node(i);
        let pi = dot(&node[..d], &node[d..]);
        match h.value(i) {
            ExtReal::PosInf => None,
            ExtReal::Finite(v) => {
                if v < pi - tol {
                    Some((node, pi - v))
                } else {
                    None
                }
            }
        }
    });
    report.probes += n;
    if let Some((node, gap)) = minor {
        report.violate("minorizes_pi", node, format!("pi - h = {gap} > tol"));
    }

    // (i) midpoint convexity on every node pair whose midpoint is on-grid
    let midpoint = exec::find_map_first(n, |a| {
        let da = grid.multi_index(a);
        let ha = h.value(a);
        for b in (a + 1)..n {
            let db = grid.multi_index(b);
            if da.iter().zip(&db).any(|(&u, &v)| (u + v) % 2 != 0) {
                continue;
            }
            let (ExtReal::Finite(va), ExtReal::Finite(vb)) = (ha, h.value(b)) else {
                continue;
            };
            let mid: Vec<usize> = da.iter().zip(&db).map(|(&u, &v)| (u + v) / 2).collect();
            let hm = h.value(grid.flat_index(&mid));
            let chord = 0.5 * (va + vb);
            let bad = match hm {
                ExtReal::PosInf => true,
                ExtReal::Finite(vm) => vm > chord + tol,
            };
            if bad {
                return Some((grid.node(grid.flat_index(&mid)), hm, chord));
            }
        }
        None
    });
    report.probes += n * (n - 1) / 2;
    if let Some((mid, hm, chord)) = midpoint {
        report.violate(
            "midpoint_convexity",
            mid,
            format!("h(mid) = {hm:?} exceeds chord value {chord} + tol"),
        );
    }
    Ok(report)
}

/// Fenchel-Young gap f(x) + f*(x*) - <x,x*>. Always >= 0 up to grid
/// tolerance; zero iff x* is a subgradient at x. f* is the exact sup over
/// the table, so x* need not be on any grid; x must be a node of f.
pub fn fenchel_young_gap(f: &GridFunction, x: &[f64], xstar: &[f64]) -> Result<ExtReal> {
    let fx = f.value_at(x, f.grid().spacing() * 1e-6)?;
    let fs = conjugate_value(f, xstar)?;
    match fx {
        ExtReal::PosInf => Ok(ExtReal::PosInf),
        ExtReal::Finite(v) => ExtReal::new(v + fs - dot(x, xstar)),
    }
}

/// Which construction produced a representation table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepKind {
    Fitzpatrick,
    SFunction,
    Custom,
}

/// A tabulated representation of an operator, tagged by construction so
/// reports can label values exact (Fitzpatrick) vs grid-approximate
/// (S-function, custom tables).
#[derive(Clone, Debug)]
pub struct Representation {
    pub operator: OperatorGraph,
    pub kind: RepKind,
    pub table: GridFunction,
}

impl Representation {
    pub fn fitzpatrick(t: OperatorGraph, pair_grid: &BoxGrid) -> Result<Self> {
        let table = fitzpatrick_table(&t, pair_grid)?;
        Ok(Representation {
            operator: t,
            kind: RepKind::Fitzpatrick,
            table,
        })
    }

    pub fn s_function(t: OperatorGraph, pair_grid: &BoxGrid) -> Result<Self> {
        let table = s_table(&t, pair_grid)?;
        Ok(Representation {
            operator: t,
            kind: RepKind::SFunction,
            table,
        })
    }

    pub fn custom(t: OperatorGraph, table: GridFunction) -> Result<Self> {
        if table.grid().dim() != 2 * t.space().dim {
            return Err(Error::DimensionMismatch {
                expected: 2 * t.space().dim,
                got: table.grid().dim(),
            });
        }
        Ok(Representation {
            operator: t,
            kind: RepKind::Custom,
            table,
        })
    }
}
