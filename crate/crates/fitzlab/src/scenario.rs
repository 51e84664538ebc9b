//! Scenario configs for the CLI: named operators and functions, check
//! dispatch, and the describe registry.
//!
//! A config is a single JSON document `{space, operators[], functions[],
//! checks[]}`. Checks execute in config order and every tolerance actually
//! used is echoed in the report; `tol_scale` multiplies explicit and
//! derived tolerances alike.

use std::collections::HashMap;

use serde::Deserialize;

use crate::analysis::{
    aux_infimum, br_search, equivalence_suite, ni_deficit, range_density_check, EquivalenceParams,
};
use crate::conjugation::legendre;
use crate::error::{Error, Result};
use crate::numerics::{BoxGrid, ExtReal, GridFunction};
use crate::operators::{
    build_linear, build_rotation, build_scaled_identity, build_subdifferential, OperatorGraph,
    MONOTONE_TOL, SUBGRADIENT_TOL,
};
use crate::report::{CheckReport, Verdict};
use crate::representations::{
    family_membership, fitzpatrick_table, membership_tol, pi_plus_indicator, quadratic_coupling,
    s_table,
};
use crate::spaces::{dot, norm, DualityPair, SpaceSpec};
use crate::sumrule::{qualification_check, sum_operator_check};

fn default_scale() -> f64 {
    1.0
}

fn default_coverage() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub space: SpaceSpec,
    #[serde(default)]
    pub operators: Vec<OperatorSpec>,
    #[serde(default)]
    pub functions: Vec<FunctionSpec>,
    pub checks: Vec<CheckSpec>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct OperatorSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: OperatorKind,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorKind {
    ScaledIdentity {
        grid: BoxGrid,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    Linear {
        matrix: Vec<Vec<f64>>,
        grid: BoxGrid,
    },
    Rotation {
        grid: BoxGrid,
    },
    Subdifferential {
        function: String,
        dual_grid: BoxGrid,
    },
    Pairs {
        pairs: Vec<DualityPair>,
    },
}

#[derive(Clone, Debug, Deserialize)]
pub struct FunctionSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: FunctionKind,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionKind {
    /// 1/2 ||x||^2 in the space norm, on a primal grid.
    HalfSquareNorm { grid: BoxGrid },
    /// Indicator of the centered box of the given half width.
    BoxIndicator { grid: BoxGrid, half_width: f64 },
    /// Inline table.
    Table { function: GridFunction },
    /// p(x, x*) = 1/2 ||x||^2 + 1/2 ||x*||^2 on a pair grid.
    QuadraticCoupling { grid: BoxGrid },
    /// pi + delta_T on a pair grid.
    PiPlusIndicator { operator: String, grid: BoxGrid },
    Fitzpatrick { operator: String, grid: BoxGrid },
    SFunction { operator: String, grid: BoxGrid },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum CheckSpec {
    Monotonicity {
        operator: String,
    },
    Maximality {
        operator: String,
        probes: BoxGrid,
        tol: Option<f64>,
    },
    FamilyMembership {
        function: String,
        operator: String,
        tol: Option<f64>,
    },
    FenchelYoung {
        function: String,
        tol: Option<f64>,
    },
    NiDeficit {
        operator: String,
        probes: BoxGrid,
        tol: Option<f64>,
    },
    AuxInfimum {
        function: String,
        x0: Vec<f64>,
        x0star: Vec<f64>,
        tol: Option<f64>,
        /// When set, the check passes iff the infimum exceeds this value
        /// (witnessing failure of the zero criterion); otherwise the
        /// infimum must vanish within tol.
        expect_above: Option<f64>,
    },
    RangeDensity {
        operator: String,
        mu: f64,
        eps: f64,
        z0: Vec<f64>,
        dual_probes: BoxGrid,
        hit_tol: f64,
        #[serde(default = "default_coverage")]
        min_coverage: f64,
    },
    EquivalenceSuite {
        operator: String,
        shifts: Vec<Vec<f64>>,
        epsilons: Vec<f64>,
        mus: Vec<f64>,
        maximality_probes: BoxGrid,
        maximality_tol: Option<f64>,
        ni_probes: BoxGrid,
        ni_tol: Option<f64>,
        dual_probes: BoxGrid,
        hit_tol: f64,
    },
    BrSearch {
        function: String,
        operator: String,
        x: Vec<f64>,
        xstar: Vec<f64>,
        eps: f64,
        lambda: f64,
    },
    Qualification {
        function1: String,
        function2: String,
    },
    SumRule {
        operator1: String,
        operator2: String,
        function1: String,
        function2: String,
        ni_probes: BoxGrid,
    },
}

impl CheckSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CheckSpec::Monotonicity { .. } => "monotonicity",
            CheckSpec::Maximality { .. } => "maximality",
            CheckSpec::FamilyMembership { .. } => "family_membership",
            CheckSpec::FenchelYoung { .. } => "fenchel_young",
            CheckSpec::NiDeficit { .. } => "ni_deficit",
            CheckSpec::AuxInfimum { .. } => "aux_infimum",
            CheckSpec::RangeDensity { .. } => "range_density",
            CheckSpec::EquivalenceSuite { .. } => "equivalence_suite",
            CheckSpec::BrSearch { .. } => "br_search",
            CheckSpec::Qualification { .. } => "qualification",
            CheckSpec::SumRule { .. } => "sum_rule",
        }
    }
}

/// (name, literature anchor, parameter sketch) for every check.
pub const CHECKS: &[(&str, &str, &str)] = &[
    (
        "monotonicity",
        "monotone relation: <x - y, x* - y*> >= 0 on the graph (Minty)",
        "{operator}",
    ),
    (
        "maximality",
        "maximal monotone: no proper monotone extension (Minty)",
        "{operator, probes: pair grid, tol?}",
    ),
    (
        "family_membership",
        "Fitzpatrick family F_T: convex lsc h >= pi, h = pi on the graph (Fitzpatrick 1988)",
        "{function: pair table, operator, tol?}",
    ),
    (
        "fenchel_young",
        "Fenchel-Young inequality f(x) + f*(x*) >= <x, x*>",
        "{function: primal table, tol?}",
    ),
    (
        "ni_deficit",
        "type NI: inf over the graph of <y* - x*, x** - y> <= 0 at every probe (Simons; Gossez)",
        "{operator, probes: pair grid over X** x X*, tol?}",
    ),
    (
        "aux_infimum",
        "translated-representative criterion: inf h_(x0,x0*) + 1/2||x||^2 + 1/2||x*||^2 = 0 for type NI",
        "{function: pair table, x0, x0star, tol?, expect_above?}",
    ),
    (
        "range_density",
        "density of R(T(.+z0) + mu J_eps) in X* (Gossez; Rockafellar surjectivity)",
        "{operator, mu, eps, z0, dual_probes, hit_tol, min_coverage?}",
    ),
    (
        "equivalence_suite",
        "equivalence of maximality, type NI, and range density of T + mu J_eps (Simons; Gossez)",
        "{operator, shifts, epsilons, mus, maximality_probes, ni_probes, dual_probes, hit_tol, ...tols?}",
    ),
    (
        "br_search",
        "Brøndsted–Rockafellar property: equality point within (lambda, eps/lambda) of an eps-approximate pair",
        "{function: pair table, operator, x, xstar, eps, lambda}",
    ),
    (
        "qualification",
        "Attouch–Brezis condition: scaled domain differences fill a closed subspace",
        "{function1, function2}",
    ),
    (
        "sum_rule",
        "sum via inf-convolution of representatives; equality set is graph(T1 + T2) (Attouch–Brezis)",
        "{operator1, operator2, function1, function2, ni_probes}",
    ),
];

pub fn describe(check: &str) -> Result<String> {
    for (name, anchor, params) in CHECKS {
        if *name == check {
            return Ok(format!("{name}\n  anchor: {anchor}\n  params: {params}\n"));
        }
    }
    let names: Vec<&str> = CHECKS.iter().map(|(n, _, _)| *n).collect();
    Err(Error::UnknownCheck(format!(
        "{check} (valid: {})",
        names.join(", ")
    )))
}

fn anchor_of(check: &str) -> &'static str {
    CHECKS
        .iter()
        .find(|(n, _, _)| *n == check)
        .map(|(_, a, _)| *a)
        .unwrap_or("")
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub tol_scale: f64,
    pub parallel: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            tol_scale: 1.0,
            parallel: false,
        }
    }
}

struct Resolved {
    space: SpaceSpec,
    operators: HashMap<String, OperatorGraph>,
    functions: HashMap<String, GridFunction>,
}

impl Resolved {
    fn operator(&self, name: &str) -> Result<&OperatorGraph> {
        self.operators
            .get(name)
            .ok_or_else(|| Error::Config(format!("unknown operator '{name}'")))
    }

    fn function(&self, name: &str) -> Result<&GridFunction> {
        self.functions
            .get(name)
            .ok_or_else(|| Error::Config(format!("unknown function '{name}'")))
    }
}

fn resolve(cfg: &Config) -> Result<Resolved> {
    let s = cfg.space;
    let mut r = Resolved {
        space: s,
        operators: HashMap::new(),
        functions: HashMap::new(),
    };
    // functions without operator references first, then operators (which
    // may consume them), then operator-derived functions
    for f in &cfg.functions {
        let table = match &f.kind {
            FunctionKind::HalfSquareNorm { grid } => GridFunction::from_fn(grid.clone(), |x| {
                let n = norm(x, &s);
                ExtReal::finite(0.5 * n * n)
            })?,
            FunctionKind::BoxIndicator { grid, half_width } => {
                GridFunction::from_fn(grid.clone(), |x| {
                    if x.iter().all(|c| c.abs() <= *half_width) {
                        ExtReal::finite(0.0)
                    } else {
                        ExtReal::PosInf
                    }
                })?
            }
            FunctionKind::Table { function } => function.clone(),
            FunctionKind::QuadraticCoupling { grid } => {
                let d = s.dim;
                if grid.dim() != 2 * d {
                    return Err(Error::DimensionMismatch {
                        expected: 2 * d,
                        got: grid.dim(),
                    });
                }
                GridFunction::from_fn(grid.clone(), |p| {
                    ExtReal::finite(quadratic_coupling(&p[..d], &p[d..], &s))
                })?
            }
            _ => continue,
        };
        if r.functions.insert(f.name.clone(), table).is_some() {
            return Err(Error::Config(format!("duplicate function '{}'", f.name)));
        }
    }
    for o in &cfg.operators {
        let graph = match &o.kind {
            OperatorKind::ScaledIdentity { grid, scale } => build_scaled_identity(&s, grid, *scale)?,
            OperatorKind::Linear { matrix, grid } => build_linear(matrix, &s, grid)?,
            OperatorKind::Rotation { grid } => build_rotation(&s, grid)?,
            OperatorKind::Subdifferential {
                function,
                dual_grid,
            } => {
                let f = r.function(function)?;
                build_subdifferential(f, &s, dual_grid)?
            }
            OperatorKind::Pairs { pairs } => OperatorGraph::new(s, pairs.clone())?,
        };
        if r.operators.insert(o.name.clone(), graph).is_some() {
            return Err(Error::Config(format!("duplicate operator '{}'", o.name)));
        }
    }
    for f in &cfg.functions {
        let table = match &f.kind {
            FunctionKind::PiPlusIndicator { operator, grid } => {
                pi_plus_indicator(r.operator(operator)?, grid)?
            }
            FunctionKind::Fitzpatrick { operator, grid } => {
                fitzpatrick_table(r.operator(operator)?, grid)?
            }
            FunctionKind::SFunction { operator, grid } => s_table(r.operator(operator)?, grid)?,
            _ => continue,
        };
        if r.functions.insert(f.name.clone(), table).is_some() {
            return Err(Error::Config(format!("duplicate function '{}'", f.name)));
        }
    }
    Ok(r)
}

fn run_check(spec: &CheckSpec, r: &Resolved, opts: &RunOptions) -> Result<Vec<CheckReport>> {
    let k = opts.tol_scale;
    let name = spec.name();
    let anchor = anchor_of(name);
    match spec {
        CheckSpec::Monotonicity { operator } => {
            let t = r.operator(operator)?;
            let mut rep = CheckReport::new(name, anchor, MONOTONE_TOL);
            rep.probes = t.len() * (t.len() - 1) / 2;
            if let Some(w) = t.monotonicity_witness() {
                let mut loc = w.pair_a.x.clone();
                loc.extend_from_slice(&w.pair_a.xstar);
                rep.violate(
                    "monotone_product",
                    loc,
                    format!("product {} < 0 against {:?}", w.product, w.pair_b),
                );
            }
            Ok(vec![rep])
        }
        CheckSpec::Maximality {
            operator,
            probes,
            tol,
        } => {
            let t = r.operator(operator)?;
            let tol = tol.unwrap_or_else(|| probes.spacing() * 1.0001) * k;
            let mut rep = CheckReport::new(name, anchor, tol);
            rep.probes = probes.node_count();
            let ext = t.maximality_probe(probes, tol);
            if let Some(first) = ext.first() {
                let mut loc = first.x.clone();
                loc.extend_from_slice(&first.xstar);
                rep.violate(
                    "monotone_extension",
                    loc,
                    format!("{} extension point(s) found", ext.len()),
                );
            }
            for e in ext.iter().take(10) {
                let mut p = e.x.clone();
                p.extend_from_slice(&e.xstar);
                rep.witness("extension", p, 0.0);
            }
            Ok(vec![rep])
        }
        CheckSpec::FamilyMembership {
            function,
            operator,
            tol,
        } => {
            let h = r.function(function)?;
            let t = r.operator(operator)?;
            let tol = tol.unwrap_or_else(|| membership_tol(h)) * k;
            let mut rep = family_membership(h, t, Some(tol))?;
            rep.anchor = anchor.to_string();
            Ok(vec![rep])
        }
        CheckSpec::FenchelYoung { function, tol } => {
            let f = r.function(function)?;
            let tol = tol.unwrap_or(SUBGRADIENT_TOL) * k;
            let mut rep = CheckReport::new(name, anchor, tol);
            let grid = f.grid();
            let star = legendre(f, grid)?;
            let n = grid.node_count();
            rep.probes = n * n;
            'outer: for i in 0..n {
                let ExtReal::Finite(fx) = f.value(i) else {
                    continue;
                };
                let x = grid.node(i);
                for j in 0..n {
                    let ExtReal::Finite(fs) = star.value(j) else {
                        continue;
                    };
                    let y = grid.node(j);
                    let gap = fx + fs - dot(&x, &y);
                    if gap < -tol {
                        let mut loc = x.clone();
                        loc.extend_from_slice(&y);
                        rep.violate("fenchel_young", loc, format!("gap {gap} < -tol"));
                        break 'outer;
                    }
                }
            }
            Ok(vec![rep])
        }
        CheckSpec::NiDeficit {
            operator,
            probes,
            tol,
        } => {
            let t = r.operator(operator)?;
            let d = t.space().dim;
            if probes.dim() != 2 * d {
                return Err(Error::DimensionMismatch {
                    expected: 2 * d,
                    got: probes.dim(),
                });
            }
            let tol = tol.unwrap_or(MONOTONE_TOL) * k;
            let mut rep = CheckReport::new(name, anchor, tol);
            rep.probes = probes.node_count();
            let mut worst = f64::NEG_INFINITY;
            let mut worst_probe = Vec::new();
            for i in 0..probes.node_count() {
                let node = probes.node(i);
                let res = ni_deficit(t, &node[d..], &node[..d]);
                if res.deficit > worst {
                    worst = res.deficit;
                    worst_probe = node;
                }
            }
            rep.witness("worst_deficit", worst_probe.clone(), worst);
            if worst > tol {
                rep.violate("ni_deficit", worst_probe, format!("deficit {worst} > tol"));
            }
            Ok(vec![rep])
        }
        CheckSpec::AuxInfimum {
            function,
            x0,
            x0star,
            tol,
            expect_above,
        } => {
            let h = r.function(function)?;
            let tol = tol.unwrap_or_else(|| 10.0 * h.grid().spacing()) * k;
            let mut rep = CheckReport::new(name, anchor, tol);
            rep.probes = h.grid().node_count();
            let inf = aux_infimum(h, x0, x0star, &r.space)?;
            let mut loc = x0.clone();
            loc.extend_from_slice(x0star);
            rep.witness("infimum", loc.clone(), inf);
            match expect_above {
                Some(lo) => {
                    if inf <= *lo {
                        rep.violate("aux_infimum", loc, format!("infimum {inf} <= {lo}"));
                    }
                }
                None => {
                    if inf.abs() > tol {
                        rep.violate("aux_infimum", loc, format!("|{inf}| > tol"));
                    }
                }
            }
            Ok(vec![rep])
        }
        CheckSpec::RangeDensity {
            operator,
            mu,
            eps,
            z0,
            dual_probes,
            hit_tol,
            min_coverage,
        } => {
            let t = r.operator(operator)?;
            let tol = hit_tol * k;
            let mut rep = CheckReport::new(name, anchor, tol);
            rep.probes = dual_probes.node_count();
            let rr = range_density_check(t, &r.space, *mu, *eps, z0, dual_probes, tol)?;
            if rr.covered < *min_coverage {
                let loc = rr.misses.first().cloned().unwrap_or_default();
                rep.violate(
                    "range_coverage",
                    loc,
                    format!("covered {} < {min_coverage}", rr.covered),
                );
            }
            for m in rr.misses.iter().take(10) {
                rep.witness("missed_probe", m.clone(), 0.0);
            }
            rep.detail = Some(serde_json::json!({
                "mu": rr.mu,
                "eps": rr.eps,
                "z0": rr.z0,
                "covered": rr.covered,
                "resolution": rr.resolution,
                "miss_count": rr.misses.len(),
            }));
            Ok(vec![rep])
        }
        CheckSpec::EquivalenceSuite {
            operator,
            shifts,
            epsilons,
            mus,
            maximality_probes,
            maximality_tol,
            ni_probes,
            ni_tol,
            dual_probes,
            hit_tol,
        } => {
            let t = r.operator(operator)?;
            let params = EquivalenceParams {
                shifts: shifts.clone(),
                epsilons: epsilons.clone(),
                mus: mus.clone(),
                maximality_probes: maximality_probes.clone(),
                maximality_tol: maximality_tol
                    .unwrap_or_else(|| maximality_probes.spacing() * 1.0001)
                    * k,
                ni_probes: ni_probes.clone(),
                ni_tol: ni_tol.unwrap_or(MONOTONE_TOL) * k,
                dual_probes: dual_probes.clone(),
                hit_tol: hit_tol * k,
            };
            let mut rep = equivalence_suite(t, &r.space, &params)?;
            rep.anchor = anchor.to_string();
            // one line per (mu, eps, z0) cell ahead of the summary line; a
            // cell passes when its density outcome agrees with maximality
            let mut out = Vec::new();
            if let Some(detail) = rep.detail.as_ref() {
                let conditions = &detail["conditions"];
                let maximal = conditions["maximality"] == "pass";
                if let Some(cells) = conditions["density"].as_object() {
                    for (key, cell) in cells {
                        let covered_cell = cell["verdict"] == "pass";
                        let mut line =
                            CheckReport::new("equivalence_suite", anchor, params.hit_tol);
                        line.probes = dual_probes.node_count();
                        if covered_cell != maximal {
                            line.violate(
                                "equivalence_agreement",
                                Vec::new(),
                                format!(
                                    "cell {key}: density {} but maximality {}",
                                    if covered_cell { "pass" } else { "fail" },
                                    if maximal { "pass" } else { "fail" }
                                ),
                            );
                        }
                        line.detail = Some(serde_json::json!({
                            "cell": key,
                            "covered": cell["covered"],
                            "density": cell["verdict"],
                        }));
                        out.push(line);
                    }
                }
            }
            out.push(rep);
            Ok(out)
        }
        CheckSpec::BrSearch {
            function,
            operator,
            x,
            xstar,
            eps,
            lambda,
        } => {
            let h = r.function(function)?;
            let t = r.operator(operator)?;
            let spacing = h.grid().spacing();
            let mut rep = CheckReport::new(name, anchor, 0.25 * spacing * spacing + 1e-12);
            rep.probes = h.grid().node_count();
            match br_search(h, t, x, xstar, *eps, *lambda, &r.space) {
                Ok(p) => {
                    let mut loc = p.x.clone();
                    loc.extend_from_slice(&p.xstar);
                    rep.witness("equality_pair", loc, 0.0);
                }
                Err(Error::ResolutionExhausted) => {
                    rep.verdict = Verdict::ResolutionExhausted;
                }
                Err(Error::PreconditionGap { gap, eps }) => {
                    let mut loc = x.clone();
                    loc.extend_from_slice(xstar);
                    rep.violate(
                        "precondition_gap",
                        loc,
                        format!("h - pi = {gap} >= eps = {eps}"),
                    );
                }
                Err(e) => return Err(e),
            }
            Ok(vec![rep])
        }
        CheckSpec::Qualification {
            function1,
            function2,
        } => {
            let h1 = r.function(function1)?;
            let h2 = r.function(function2)?;
            let mut rep = qualification_check(h1, h2)?;
            rep.anchor = anchor.to_string();
            rep.check = name.to_string();
            Ok(vec![rep])
        }
        CheckSpec::SumRule {
            operator1,
            operator2,
            function1,
            function2,
            ni_probes,
        } => {
            let t1 = r.operator(operator1)?;
            let t2 = r.operator(operator2)?;
            let h1 = r.function(function1)?;
            let h2 = r.function(function2)?;
            let mut rep = sum_operator_check(t1, t2, h1, h2, ni_probes)?;
            rep.anchor = anchor.to_string();
            rep.check = name.to_string();
            Ok(vec![rep])
        }
    }
}

/// Executes the config's checks in order. With `parallel`, independent
/// checks run concurrently; reports are still returned in config order and
/// are identical to a sequential run.
pub fn run_config(cfg: &Config, opts: &RunOptions) -> Result<Vec<CheckReport>> {
    if opts.tol_scale <= 0.0 {
        return Err(Error::Config(format!(
            "tol-scale must be positive, got {}",
            opts.tol_scale
        )));
    }
    let resolved = resolve(cfg)?;
    let results: Vec<Result<Vec<CheckReport>>> = if opts.parallel {
        crate::exec::map_indexed(cfg.checks.len(), |i| run_check(&cfg.checks[i], &resolved, opts))
    } else {
        crate::exec::map_indexed_seq(cfg.checks.len(), |i| {
            run_check(&cfg.checks[i], &resolved, opts)
        })
    };
    let mut reports = Vec::new();
    for r in results {
        reports.extend(r?);
    }
    Ok(reports)
}

/// Exit code for a report set: 1 if any check failed, else 3 if any check
/// exhausted the resolution, else 0.
pub fn exit_code(reports: &[CheckReport]) -> i32 {
    if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        1
    } else if reports
        .iter()
        .any(|r| r.verdict == Verdict::ResolutionExhausted)
    {
        3
    } else {
        0
    }
}
