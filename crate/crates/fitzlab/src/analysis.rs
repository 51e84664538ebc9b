//! Theorem engine: NI deficit probes, the translated-infimum criterion, the
//! surjectivity/range-density equivalences, and the Brøndsted–Rockafellar
//! equality-point search.
//!
//! Probes for the bidual live in X* x X**; in finite dimension X** = X
//! through the canonical injection, so the x** argument is an ordinary
//! primal vector. This is exactly the identification that fails in
//! non-reflexive spaces, where type NI becomes a real restriction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::numerics::{BoxGrid, ExtReal, GridFunction};
use crate::operators::OperatorGraph;
use crate::report::{CheckReport, Verdict};
use crate::representations::quadratic_coupling;
use crate::spaces::{
    dot, dual_norm, duality_map, eps_duality_membership, norm, DualityPair, SpaceSpec,
};
use crate::conjugation::translate;

/// One NI probe: the deficit inf over the graph of <y* - x*, x** - y>,
/// together with the minimizing graph pair.
#[derive(Clone, Debug, Serialize)]
pub struct NIProbeResult {
    pub probe: DualityPair,
    pub deficit: f64,
    pub arginf: DualityPair,
}

/// Exact min over the sampled graph; T passes NI at this probe iff the
/// deficit is <= tol.
pub fn ni_deficit(t: &OperatorGraph, xstar: &[f64], xstarstar: &[f64]) -> NIProbeResult {
    let mut best = f64::INFINITY;
    let mut arg = 0usize;
    for (i, p) in t.pairs().iter().enumerate() {
        let ds: Vec<f64> = p.xstar.iter().zip(xstar).map(|(a, b)| a - b).collect();
        let dx: Vec<f64> = xstarstar.iter().zip(&p.x).map(|(a, b)| a - b).collect();
        let term = dot(&ds, &dx);
        if term < best {
            best = term;
            arg = i;
        }
    }
    NIProbeResult {
        probe: DualityPair {
            x: xstarstar.to_vec(),
            xstar: xstar.to_vec(),
        },
        deficit: best,
        arginf: t.pairs()[arg].clone(),
    }
}

/// min over the pair grid of h_(x0,x0*) + 1/2 ||x||^2 + 1/2 ||x*||^2.
/// Zero (within tolerance) characterizes NI representations; a strictly
/// positive value witnesses failure.
pub fn aux_infimum(h: &GridFunction, x0: &[f64], x0star: &[f64], s: &SpaceSpec) -> Result<f64> {
    let shifted = translate(h, x0, x0star)?;
    let grid = shifted.grid();
    let d = s.dim;
    if grid.dim() != 2 * d {
        return Err(Error::DimensionMismatch {
            expected: 2 * d,
            got: grid.dim(),
        });
    }
    let vals = exec::map_indexed(grid.node_count(), |i| match shifted.value(i) {
        ExtReal::PosInf => f64::INFINITY,
        ExtReal::Finite(v) => {
            let node = grid.node(i);
            v + quadratic_coupling(&node[..d], &node[d..], s)
        }
    });
    let best = vals.into_iter().fold(f64::INFINITY, f64::min);
    if best == f64::INFINITY {
        return Err(Error::ImproperFunction);
    }
    Ok(best)
}

/// Coverage report for R(T(. + z0) + mu * J_eps) against a dual probe grid.
#[derive(Clone, Debug, Serialize)]
pub struct RangeReport {
    pub mu: f64,
    pub eps: f64,
    pub z0: Vec<f64>,
    /// Fraction of dual probes hit.
    pub covered: f64,
    /// Dual probes with no candidate within `hit_tol`.
    pub misses: Vec<Vec<f64>>,
    /// Spacing of the enlargement search grid.
    pub resolution: f64,
}

/// Checks how much of the dual probe grid is reached by
/// T(. + z0) + mu * J_eps at the sampled resolution.
///
/// For each shifted graph pair (x, x*) the candidate duals are
/// x* + mu * v with v either an exact vertex of the duality map at x or an
/// enlargement-grid node passing the eps-membership inequality. The exact
/// vertices are included for every eps, so coverage is monotone in eps.
pub fn range_density_check(
    t: &OperatorGraph,
    s: &SpaceSpec,
    mu: f64,
    eps: f64,
    z0: &[f64],
    dual_probes: &BoxGrid,
    hit_tol: f64,
) -> Result<RangeReport> {
    if mu <= 0.0 {
        return Err(Error::Config(format!("mu must be positive, got {mu}")));
    }
    if eps < 0.0 {
        return Err(Error::NegativeEpsilon(eps));
    }
    let d = s.dim;
    if z0.len() != d || dual_probes.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: z0.len().max(dual_probes.dim()),
        });
    }

    // candidate duals reachable from each shifted graph pair
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    let mut max_x_norm = 0.0f64;
    let shifted: Vec<(Vec<f64>, &DualityPair)> = t
        .pairs()
        .iter()
        .map(|p| {
            let x: Vec<f64> = p.x.iter().zip(z0).map(|(a, b)| a - b).collect();
            max_x_norm = max_x_norm.max(norm(&x, s));
            (x, p)
        })
        .collect();
    let enlargement_radius = max_x_norm + (2.0 * eps).sqrt();
    let enlargement = BoxGrid::new(d, enlargement_radius.max(hit_tol), dual_probes.points_per_axis())?;
    for (x, p) in &shifted {
        for v in duality_map(x, s).vertices {
            let cand: Vec<f64> = p.xstar.iter().zip(&v).map(|(a, b)| a + mu * b).collect();
            candidates.push(cand);
        }
        if eps > 0.0 {
            for u in enlargement.nodes() {
                let pair = DualityPair {
                    x: x.clone(),
                    xstar: u.clone(),
                };
                if eps_duality_membership(&pair, eps, s)? {
                    let cand: Vec<f64> =
                        p.xstar.iter().zip(&u).map(|(a, b)| a + mu * b).collect();
                    candidates.push(cand);
                }
            }
        }
    }

    let hits = exec::map_indexed(dual_probes.node_count(), |i| {
        let w = dual_probes.node(i);
        let hit = candidates.iter().any(|c| {
            let diff: Vec<f64> = c.iter().zip(&w).map(|(a, b)| a - b).collect();
            dual_norm(&diff, s) <= hit_tol
        });
        (hit, w)
    });
    let total = hits.len();
    let misses: Vec<Vec<f64>> = hits
        .into_iter()
        .filter_map(|(hit, w)| if hit { None } else { Some(w) })
        .collect();
    Ok(RangeReport {
        mu,
        eps,
        z0: z0.to_vec(),
        covered: (total - misses.len()) as f64 / total as f64,
        misses,
        resolution: enlargement.spacing(),
    })
}

/// Probe grids and tolerances for the equivalence suite. The probe grids
/// are explicit because a sampled graph does not carry its sampling grid.
#[derive(Clone, Debug)]
pub struct EquivalenceParams {
    pub shifts: Vec<Vec<f64>>,
    pub epsilons: Vec<f64>,
    pub mus: Vec<f64>,
    /// Pair grid over X x X* probed for monotone extensions.
    pub maximality_probes: BoxGrid,
    pub maximality_tol: f64,
    /// Pair grid over X** x X* (primal layout) probed for NI deficits.
    pub ni_probes: BoxGrid,
    pub ni_tol: f64,
    /// Dual grid probed for range coverage.
    pub dual_probes: BoxGrid,
    pub hit_tol: f64,
}

/// Runs the maximality probe, the NI deficit sweep, and the range-density
/// check over every (mu, eps, z0) cell, then asserts the verdicts agree:
/// either everything passes, or maximality and every density cell fail
/// together. The NI sweep is reported but cannot dissent on its own — in
/// finite dimension no maximal monotone operator fails NI, so an NI failure
/// always travels with a maximality failure.
pub fn equivalence_suite(
    t: &OperatorGraph,
    s: &SpaceSpec,
    params: &EquivalenceParams,
) -> Result<CheckReport> {
    if !t.is_monotone() {
        return Err(Error::Config("equivalence_suite needs a monotone graph".into()));
    }
    let mut report = CheckReport::new(
        "equivalence_suite",
        "surjectivity of T + mu J_eps vs maximality and type NI (Simons; Gossez)",
        params.hit_tol,
    );

    let extensions = t.maximality_probe(&params.maximality_probes, params.maximality_tol);
    let maximal = extensions.is_empty();
    report.probes += params.maximality_probes.node_count();
    for e in extensions.iter().take(5) {
        let mut point = e.x.clone();
        point.extend_from_slice(&e.xstar);
        report.witness("monotone_extension", point, 0.0);
    }

    let d = s.dim;
    let ni_grid = &params.ni_probes;
    let worst = exec::map_indexed(ni_grid.node_count(), |i| {
        let node = ni_grid.node(i);
        let r = ni_deficit(t, &node[d..], &node[..d]);
        r.deficit
    })
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max);
    let ni_ok = worst <= params.ni_tol;
    report.probes += ni_grid.node_count();

    let mut cells = serde_json::Map::new();
    let mut all_density = true;
    let mut any_density = false;
    for mu in &params.mus {
        for eps in &params.epsilons {
            for z0 in &params.shifts {
                let r = range_density_check(t, s, *mu, *eps, z0, &params.dual_probes, params.hit_tol)?;
                report.probes += params.dual_probes.node_count();
                let pass = r.covered == 1.0;
                all_density &= pass;
                any_density |= pass;
                let key = format!("mu={mu} eps={eps} z0={z0:?}");
                cells.insert(
                    key,
                    serde_json::json!({
                        "verdict": if pass { "pass" } else { "fail" },
                        "covered": r.covered,
                    }),
                );
                if !pass {
                    if let Some(w) = r.misses.first() {
                        report.witness("missed_dual_probe", w.clone(), r.covered);
                    }
                }
            }
        }
    }

    let all_pass = maximal && ni_ok && all_density;
    let consistent = all_pass || (!maximal && !any_density);
    if !consistent {
        report.violate(
            "equivalence_agreement",
            Vec::new(),
            format!("maximality={maximal} ni={ni_ok} density_all={all_density} density_any={any_density}"),
        );
    }
    report.verdict = Verdict::from_bool(consistent);
    report.detail = Some(serde_json::json!({
        "conditions": {
            "maximality": if maximal { "pass" } else { "fail" },
            "ni": if ni_ok { "pass" } else { "fail" },
            "worst_ni_deficit": worst,
            "density": serde_json::Value::Object(cells),
        },
        "all_pass": all_pass,
        "equivalent": consistent,
    }));
    Ok(report)
}

/// Nearest equality-set node within the (lambda, eps/lambda) box around the
/// query, realizing the Brøndsted–Rockafellar guarantee at grid scale.
/// Preconditions: h is a family member (caller's duty, it is expensive to
/// re-verify) and h(x, x*) < pi(x, x*) + eps, which is checked. A miss at
/// the current resolution is reported as `ResolutionExhausted`, not as a
/// falsification — the continuum statement guarantees existence only in the
/// closure.
pub fn br_search(
    h: &GridFunction,
    _t: &OperatorGraph,
    x: &[f64],
    xstar: &[f64],
    eps: f64,
    lambda: f64,
    s: &SpaceSpec,
) -> Result<DualityPair> {
    if eps <= 0.0 || lambda <= 0.0 {
        return Err(Error::Config(format!(
            "br_search needs eps, lambda > 0, got {eps}, {lambda}"
        )));
    }
    let grid = h.grid();
    let d = s.dim;
    if grid.dim() != 2 * d || x.len() != d || xstar.len() != d {
        return Err(Error::DimensionMismatch {
            expected: 2 * d,
            got: grid.dim(),
        });
    }
    let mut query = x.to_vec();
    query.extend_from_slice(xstar);
    let hq = h.value_at(&query, grid.spacing() * 1e-6)?;
    let pi_q = dot(x, xstar);
    let gap = match hq {
        ExtReal::PosInf => f64::INFINITY,
        ExtReal::Finite(v) => v - pi_q,
    };
    if gap >= eps {
        return Err(Error::PreconditionGap { gap, eps });
    }

    // Tight enough that lattice neighbors of an exact equality node are
    // excluded for representations with quadratic growth off the equality
    // set (their gap is at least spacing^2 / 2).
    let eq_tol = 0.25 * grid.spacing() * grid.spacing() + 1e-12;
    let dual_radius = eps / lambda;
    let found = exec::map_indexed(grid.node_count(), |i| {
        let ExtReal::Finite(v) = h.value(i) else {
            return None;
        };
        let node = grid.node(i);
        let pi = dot(&node[..d], &node[d..]);
        if (v - pi).abs() > eq_tol {
            return None;
        }
        let dx: Vec<f64> = node[..d].iter().zip(x).map(|(a, b)| a - b).collect();
        let pd = norm(&dx, s);
        if pd >= lambda {
            return None;
        }
        let ds: Vec<f64> = node[d..].iter().zip(xstar).map(|(a, b)| a - b).collect();
        if dual_norm(&ds, s) >= dual_radius {
            return None;
        }
        Some((pd, i))
    });
    let best = found
        .into_iter()
        .flatten()
        .min_by(|a, b| a.partial_cmp(b).unwrap());
    match best {
        Some((_, i)) => {
            let node = grid.node(i);
            Ok(DualityPair {
                x: node[..d].to_vec(),
                xstar: node[d..].to_vec(),
            })
        }
        None => Err(Error::ResolutionExhausted),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::MONOTONE_TOL;
    use crate::operators::build_scaled_identity;
    use crate::spaces::NormTag;

    fn l2(dim: usize) -> SpaceSpec {
        SpaceSpec::new(dim, NormTag::L2).unwrap()
    }

    fn identity_graph(radius: f64, m: usize) -> OperatorGraph {
        build_scaled_identity(&l2(1), &BoxGrid::new(1, radius, m).unwrap(), 1.0).unwrap()
    }

    fn truncated_identity() -> OperatorGraph {
        let pairs = (0..=10)
            .map(|i| DualityPair::new(vec![i as f64 / 10.0], vec![i as f64 / 10.0]).unwrap())
            .collect();
        OperatorGraph::new(l2(1), pairs).unwrap()
    }

    fn coupling_table(grid: &BoxGrid, s: &SpaceSpec) -> GridFunction {
        let d = s.dim;
        GridFunction::from_fn(grid.clone(), |p| {
            ExtReal::finite(quadratic_coupling(&p[..d], &p[d..], s))
        })
        .unwrap()
    }

    #[test]
    fn ni_deficit_identity_at_origin() {
        let t = identity_graph(1.0, 11);
        let r = ni_deficit(&t, &[0.0], &[0.0]);
        assert_eq!(r.deficit, -1.0);
        assert_eq!(r.arginf.x, vec![-1.0]);
    }

    #[test]
    fn ni_deficit_singleton() {
        let t = OperatorGraph::new(
            l2(1),
            vec![DualityPair::new(vec![0.0], vec![0.0]).unwrap()],
        )
        .unwrap();
        let r = ni_deficit(&t, &[1.0], &[1.0]);
        assert_eq!(r.deficit, -1.0);
        // and a probe where the singleton fails NI
        assert_eq!(ni_deficit(&t, &[1.0], &[-1.0]).deficit, 1.0);
    }

    #[test]
    fn ni_deficit_nonpositive_on_graph_probes() {
        let t = identity_graph(1.0, 11);
        for p in t.pairs() {
            assert!(ni_deficit(&t, &p.xstar, &p.x).deficit <= 0.0);
        }
    }

    #[test]
    fn aux_infimum_identity_representative() {
        let s = l2(1);
        let grid = BoxGrid::new(2, 2.0, 17).unwrap();
        let h = coupling_table(&grid, &s);
        assert_eq!(aux_infimum(&h, &[0.0], &[0.0], &s).unwrap(), 0.0);
        // shift (1, 0): attained at (x, x*) = (-1/2, 1/2)
        assert_eq!(aux_infimum(&h, &[1.0], &[0.0], &s).unwrap(), 0.0);
    }

    #[test]
    fn aux_infimum_detects_non_maximal_singleton() {
        let s = l2(1);
        let grid = BoxGrid::new(2, 1.0, 3).unwrap();
        let h = GridFunction::from_fn(grid.clone(), |p| {
            if p[0] == 0.0 && p[1] == 0.0 {
                ExtReal::finite(0.0)
            } else {
                ExtReal::PosInf
            }
        })
        .unwrap();
        assert_eq!(aux_infimum(&h, &[1.0], &[1.0], &s).unwrap(), 2.0);
    }

    #[test]
    fn range_density_identity_full_coverage() {
        let t = identity_graph(1.0, 21);
        let probes = BoxGrid::new(1, 1.0, 11).unwrap();
        let r = range_density_check(&t, &l2(1), 1.0, 0.0, &[0.0], &probes, 1e-9).unwrap();
        assert_eq!(r.covered, 1.0, "misses: {:?}", r.misses);
    }

    #[test]
    fn range_density_truncated_identity_misses() {
        let t = truncated_identity();
        let probes = BoxGrid::new(1, 2.0, 9).unwrap();
        let r = range_density_check(&t, &l2(1), 1.0, 0.0, &[0.0], &probes, 1e-9).unwrap();
        assert!(r.covered < 1.0);
        assert!(r.misses.contains(&vec![-2.0]));
    }

    #[test]
    fn range_density_monotone_in_eps() {
        let t = truncated_identity();
        let probes = BoxGrid::new(1, 2.0, 9).unwrap();
        let s = l2(1);
        let r0 = range_density_check(&t, &s, 1.0, 0.0, &[0.0], &probes, 0.05).unwrap();
        let r1 = range_density_check(&t, &s, 1.0, 0.5, &[0.0], &probes, 0.05).unwrap();
        assert!(r1.covered >= r0.covered);
    }

    fn suite_params() -> EquivalenceParams {
        EquivalenceParams {
            shifts: vec![vec![0.0], vec![0.5]],
            epsilons: vec![0.05, 0.2],
            mus: vec![0.5, 1.0, 2.0],
            maximality_probes: BoxGrid::new(2, 1.0, 11).unwrap(),
            maximality_tol: BoxGrid::new(2, 1.0, 11).unwrap().spacing() * 1.0001,
            ni_probes: BoxGrid::new(2, 1.0, 11).unwrap(),
            ni_tol: MONOTONE_TOL,
            dual_probes: BoxGrid::new(1, 0.5, 11).unwrap(),
            hit_tol: 0.1,
        }
    }

    #[test]
    fn equivalence_identity_all_pass() {
        let t = identity_graph(2.0, 81);
        let r = equivalence_suite(&t, &l2(1), &suite_params()).unwrap();
        assert!(r.verdict.passed(), "{:?}", r.first_violation);
        let detail = r.detail.unwrap();
        assert_eq!(detail["all_pass"], serde_json::json!(true));
    }

    #[test]
    fn equivalence_truncated_identity_consistent_failure() {
        let t = truncated_identity();
        let mut p = suite_params();
        // probe where the truncation shows: extensions at x < 0 and a
        // positive NI deficit at (x*, x**) = (2, -1) need radius 2
        p.maximality_probes = BoxGrid::new(2, 2.0, 11).unwrap();
        p.maximality_tol = p.maximality_probes.spacing() * 1.0001;
        p.ni_probes = BoxGrid::new(2, 2.0, 11).unwrap();
        // probes must extend past the reach of T + mu J_eps for every
        // (mu, eps, z0) cell, else density passes in some cells while
        // maximality fails and the agreement is spuriously broken
        p.dual_probes = BoxGrid::new(1, 4.0, 9).unwrap();
        p.hit_tol = 0.05;
        let r = equivalence_suite(&t, &l2(1), &p).unwrap();
        assert!(r.verdict.passed(), "{:?}", r.first_violation);
        let detail = r.detail.unwrap();
        assert_eq!(detail["all_pass"], serde_json::json!(false));
        assert_eq!(detail["conditions"]["maximality"], serde_json::json!("fail"));
    }

    #[test]
    fn br_search_diagonal_example() {
        let s = l2(1);
        let grid = BoxGrid::new(2, 2.0, 201).unwrap();
        let h = coupling_table(&grid, &s);
        let t = identity_graph(2.0, 201);
        // query (1, 1.1): gap = 0.005 < eps
        let p = br_search(&h, &t, &[1.0], &[1.1], 0.0051, 0.1, &s).unwrap();
        assert_eq!(p.x, p.xstar);
        assert!((p.x[0] - 1.0).abs() < 0.1);
        assert!((p.xstar[0] - 1.1).abs() < 0.051);
    }

    #[test]
    fn br_search_on_equality_set_returns_query() {
        let s = l2(1);
        let grid = BoxGrid::new(2, 1.0, 41).unwrap();
        let h = coupling_table(&grid, &s);
        let t = identity_graph(1.0, 41);
        let p = br_search(&h, &t, &[0.5], &[0.5], 0.1, 0.3, &s).unwrap();
        assert_eq!(p.x, vec![0.5]);
        assert_eq!(p.xstar, vec![0.5]);
    }

    #[test]
    fn br_search_large_lambda_shrinks_dual_box() {
        let s = l2(1);
        let grid = BoxGrid::new(2, 2.0, 201).unwrap();
        let h = coupling_table(&grid, &s);
        let t = identity_graph(2.0, 201);
        let delta = 0.06;
        let p = br_search(&h, &t, &[1.0], &[1.0 + delta], 0.01, 1.0, &s).unwrap();
        assert!((p.xstar[0] - (1.0 + delta)).abs() < 0.01);
    }

    #[test]
    fn br_search_rejects_large_gap() {
        let s = l2(1);
        let grid = BoxGrid::new(2, 2.0, 41).unwrap();
        let h = coupling_table(&grid, &s);
        let t = identity_graph(2.0, 41);
        // gap at (1, 0) is 0.5
        assert!(matches!(
            br_search(&h, &t, &[1.0], &[0.0], 0.4, 0.5, &s),
            Err(Error::PreconditionGap { .. })
        ));
    }

    #[test]
    fn br_search_resolution_exhausted() {
        let s = l2(1);
        // coarse grid: gap at (1, 0) is 0.5 < eps, but the only equality
        // candidate (1, 1) sits outside the dual box of radius eps/lambda
        let grid = BoxGrid::new(2, 2.0, 5).unwrap();
        let h = coupling_table(&grid, &s);
        let t = identity_graph(2.0, 5);
        assert!(matches!(
            br_search(&h, &t, &[1.0], &[0.0], 0.6, 0.9, &s),
            Err(Error::ResolutionExhausted)
        ));
    }
}
