//! Normed-space structure: norms and dual norms, the duality product, the
//! duality mapping J and its Gossez enlargement J_eps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm tag. The dual pairing is l1 <-> linf, l2 <-> l2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormTag {
    L1,
    L2,
    Linf,
}

impl NormTag {
    pub fn dual(self) -> NormTag {
        match self {
            NormTag::L1 => NormTag::Linf,
            NormTag::L2 => NormTag::L2,
            NormTag::Linf => NormTag::L1,
        }
    }

    pub fn eval(self, v: &[f64]) -> f64 {
        match self {
            NormTag::L1 => v.iter().map(|x| x.abs()).sum(),
            NormTag::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            NormTag::Linf => v.iter().fold(0.0f64, |acc, x| acc.max(x.abs())),
        }
    }
}

/// A finite-dimensional normed space: dimension 1..=3 plus a norm tag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpaceSpec")]
pub struct SpaceSpec {
    pub dim: usize,
    pub norm: NormTag,
}

#[derive(Deserialize)]
struct RawSpaceSpec {
    dim: usize,
    norm: NormTag,
}

impl TryFrom<RawSpaceSpec> for SpaceSpec {
    type Error = Error;
    fn try_from(raw: RawSpaceSpec) -> Result<Self> {
        SpaceSpec::new(raw.dim, raw.norm)
    }
}

impl SpaceSpec {
    pub fn new(dim: usize, norm: NormTag) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("space dim must be in 1..=3, got {dim}")));
        }
        Ok(SpaceSpec { dim, norm })
    }
}

/// A primal/dual point pair (x, x*).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityPair {
    pub x: Vec<f64>,
    pub xstar: Vec<f64>,
}

impl DualityPair {
    pub fn new(x: Vec<f64>, xstar: Vec<f64>) -> Result<Self> {
        if x.len() != xstar.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: xstar.len(),
            });
        }
        Ok(DualityPair { x, xstar })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// Plain inner sum used everywhere a duality product appears.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Duality product pi(x, x*) = <x, x*>.
pub fn dual_pair(p: &DualityPair) -> f64 {
    dot(&p.x, &p.xstar)
}

pub fn norm(x: &[f64], s: &SpaceSpec) -> f64 {
    s.norm.eval(x)
}

pub fn dual_norm(xstar: &[f64], s: &SpaceSpec) -> f64 {
    s.norm.dual().eval(xstar)
}

/// Tag for the shape of a set value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SetKind {
    Singleton,
    Polytope,
    Ball,
    Empty,
}

/// Rule used by a [`SetDescriptor`] membership predicate, kept separate from
/// the vertex list so tests can cross-validate the two descriptions.
#[derive(Clone, Debug, PartialEq)]
pub enum MembershipRule {
    /// The duality-mapping characterization ||x||^2 = ||x*||^2 = <x, x*>.
    DualityMap { x: Vec<f64>, space: SpaceSpec },
    /// Dual-norm ball of the given radius around a center.
    Ball { center: Vec<f64>, radius: f64, space: SpaceSpec },
    /// Nothing belongs.
    Nothing,
}

/// A set value such as J(x): a vertex description plus an independent
/// membership predicate.
#[derive(Clone, Debug, PartialEq)]
pub struct SetDescriptor {
    pub kind: SetKind,
    pub vertices: Vec<Vec<f64>>,
    pub rule: MembershipRule,
}

impl SetDescriptor {
    /// Membership within `tol`, evaluated from the defining rule rather than
    /// the vertex list.
    pub fn contains(&self, point: &[f64], tol: f64) -> bool {
        match &self.rule {
            MembershipRule::DualityMap { x, space } => {
                let nx = norm(x, space);
                let ns = dual_norm(point, space);
                let p = dot(x, point);
                (nx * nx - ns * ns).abs() <= tol && (nx * nx - p).abs() <= tol
            }
            MembershipRule::Ball { center, radius, space } => {
                let diff: Vec<f64> = point.iter().zip(center).map(|(a, b)| a - b).collect();
                dual_norm(&diff, space) <= radius + tol
            }
            MembershipRule::Nothing => false,
        }
    }
}

/// The duality mapping J(x) = { x* : ||x||^2 = ||x*||^2 = <x, x*> }.
///
/// For l2 this is the singleton {x}; for l1 and linf it is a scaled face of
/// the dual unit ball, returned as a polytope with lexicographically ordered
/// vertices.
pub fn duality_map(x: &[f64], s: &SpaceSpec) -> SetDescriptor {
    assert_eq!(x.len(), s.dim, "duality_map: dimension mismatch");
    let rule = MembershipRule::DualityMap {
        x: x.to_vec(),
        space: *s,
    };
    let nx = norm(x, s);
    if nx == 0.0 {
        return SetDescriptor {
            kind: SetKind::Singleton,
            vertices: vec![vec![0.0; s.dim]],
            rule,
        };
    }
    match s.norm {
        NormTag::L2 => SetDescriptor {
            kind: SetKind::Singleton,
            vertices: vec![x.to_vec()],
            rule,
        },
        NormTag::L1 => {
            // x*_i = sign(x_i) * ||x||_1 where x_i != 0; free in
            // [-||x||_1, ||x||_1] where x_i = 0. Vertices: all sign choices
            // on the zero coordinates, enumerated lexicographically
            // (negative branch first).
            let free: Vec<usize> = (0..s.dim).filter(|&i| x[i] == 0.0).collect();
            let mut vertices = Vec::with_capacity(1 << free.len());
            for mask in 0..(1usize << free.len()) {
                let mut v: Vec<f64> = x.iter().map(|&xi| xi.signum() * nx).collect();
                for (bit, &i) in free.iter().enumerate() {
                    v[i] = if mask >> (free.len() - 1 - bit) & 1 == 0 {
                        -nx
                    } else {
                        nx
                    };
                }
                vertices.push(v);
            }
            vertices.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let kind = if vertices.len() == 1 {
                SetKind::Singleton
            } else {
                SetKind::Polytope
            };
            SetDescriptor { kind, vertices, rule }
        }
        NormTag::Linf => {
            // x* supported on the argmax coordinates, with matching signs and
            // total l1 mass ||x||_inf. Vertices: one spike per tied argmax
            // coordinate, in coordinate order.
            let mut vertices = Vec::new();
            for i in 0..s.dim {
                if x[i].abs() == nx {
                    let mut v = vec![0.0; s.dim];
                    v[i] = x[i].signum() * nx;
                    vertices.push(v);
                }
            }
            let kind = if vertices.len() == 1 {
                SetKind::Singleton
            } else {
                SetKind::Polytope
            };
            SetDescriptor { kind, vertices, rule }
        }
    }
}

/// Membership in the Gossez enlargement J_eps:
/// `||x||^2/2 + ||x*||^2/2 <= <x, x*> + eps`.
pub fn eps_duality_membership(p: &DualityPair, eps: f64, s: &SpaceSpec) -> Result<bool> {
    if eps < 0.0 {
        return Err(Error::NegativeEpsilon(eps));
    }
    let nx = norm(&p.x, s);
    let ns = dual_norm(&p.xstar, s);
    Ok(0.5 * nx * nx + 0.5 * ns * ns <= dual_pair(p) + eps)
}

/// `| ||x|| - ||x*|| |`; whenever (x, x*) is in J_eps this is at most
/// sqrt(2 eps).
pub fn jeps_norm_gap(p: &DualityPair, s: &SpaceSpec) -> f64 {
    (norm(&p.x, s) - dual_norm(&p.xstar, s)).abs()
}

/// Explicit bounds on preimages of dual balls under T + J_eps, derived from
/// a graph point (z, z*) of T.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PreimageBound {
    /// Radius bounding `||y*||` for every y* in J_eps(x) with
    /// `||x* + y*|| <= M`.
    pub ystar: f64,
    /// Derived bound `||x|| <= ystar + sqrt(2 eps)`.
    pub x: f64,
}

/// Bound on `(T + J_eps)^{-1}(B[0, M])` computed from one graph point of a
/// monotone T:
/// `||y*|| <= 2||z|| + sqrt(4||z||^2 + 2[||z||sqrt(2e) + e] + ||z||^2 + (M + ||z*||)^2)`.
pub fn preimage_bound(z: &[f64], zstar: &[f64], m_radius: f64, eps: f64, s: &SpaceSpec) -> PreimageBound {
    let nz = norm(z, s);
    let nzs = dual_norm(zstar, s);
    let root = (2.0 * eps).sqrt();
    let ystar = 2.0 * nz
        + (4.0 * nz * nz + 2.0 * (nz * root + eps) + nz * nz + (m_radius + nzs) * (m_radius + nzs))
            .sqrt();
    PreimageBound {
        ystar,
        x: ystar + root,
    }
}
