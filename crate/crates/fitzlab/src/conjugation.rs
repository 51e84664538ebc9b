//! Discrete Legendre-Fenchel calculus: conjugates, biconjugates, the
//! flip-conjugation, and the translation action on bifunctions.
//!
//! Two code paths compute the conjugate. `legendre_brute` maximizes the
//! shared term `<x, x*> - f(x)` over every tabulated node. `legendre` runs a
//! per-axis sorted-slope (lower convex hull) transform, tracks the argmax
//! through the axes, and re-evaluates the final value with the same shared
//! term, so both paths emit identical bits on convex inputs. The brute-force
//! path is the ground truth; the fast path is anchored to it in tests.
//!
//! A grid truncates the supremum at the dual radius; callers that report
//! conjugate values must carry that truncation radius along.

use crate::error::{Error, Result};
use crate::exec;
use crate::numerics::{BoxGrid, ExtReal, GridFunction};
use crate::spaces::dot;

/// Shared evaluation of a single conjugate term. Both code paths funnel
/// through this so their outputs are comparable bit for bit.
#[inline]
fn pair_term(x: &[f64], y: &[f64], fx: f64) -> f64 {
    dot(x, y) - fx
}

fn check_dims(f: &GridFunction, dual: &BoxGrid) -> Result<()> {
    if f.grid().dim() != dual.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.grid().dim(),
            got: dual.dim(),
        });
    }
    Ok(())
}

fn brute_values<F>(f: &GridFunction, dual: &BoxGrid, map: F) -> Vec<f64>
where
    F: Fn(usize, Box<dyn Fn(usize) -> f64 + Sync + Send + '_>) -> Vec<f64>,
{
    let primal = f.grid();
    let values = f.values_f64();
    let n = primal.node_count();
    let nodes: Vec<Vec<f64>> = (0..n).map(|i| primal.node(i)).collect();
    let eval = move |di: usize| -> f64 {
        let y = dual.node(di);
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            let t = pair_term(&nodes[i], &y, values[i]);
            if t > best {
                best = t;
            }
        }
        best
    };
    map(dual.node_count(), Box::new(eval))
}

/// Brute-force conjugate: exact max of the shared term over every node.
pub fn legendre_brute(f: &GridFunction, dual: &BoxGrid) -> Result<GridFunction> {
    check_dims(f, dual)?;
    let vals = brute_values(f, dual, |n, eval| exec::map_indexed(n, |i| eval(i)));
    finish(dual.clone(), vals)
}

/// Sequential brute-force conjugate, kept for benchmarking the parallel
/// speedup.
#[doc(hidden)]
pub fn legendre_brute_seq(f: &GridFunction, dual: &BoxGrid) -> Result<GridFunction> {
    check_dims(f, dual)?;
    let vals = brute_values(f, dual, |n, eval| exec::map_indexed_seq(n, |i| eval(i)));
    finish(dual.clone(), vals)
}

fn finish(dual: BoxGrid, vals: Vec<f64>) -> Result<GridFunction> {
    let ext: Result<Vec<ExtReal>> = vals
        .into_iter()
        .map(|v| {
            if v == f64::NEG_INFINITY {
                Err(Error::ImproperFunction)
            } else {
                ExtReal::new(v)
            }
        })
        .collect();
    GridFunction::new(dual, ext?)
}

/// 1-D conjugate along one axis: for each dual coordinate, the max of
/// `x*y - psi(x)` over the axis nodes, via the lower convex hull of
/// `(x, psi(x))` and a monotone pointer sweep. Collinear hull points are
/// kept so that tied maximizers resolve to the smallest axis index, the
/// same tie-break the brute-force scan uses.
fn conjugate_axis(
    coords: &[f64],
    psi: &[f64],
    dual_coords: &[f64],
    out: &mut Vec<(f64, usize)>,
) {
    out.clear();
    let mut hull: Vec<usize> = Vec::with_capacity(psi.len());
    for (i, &p) in psi.iter().enumerate() {
        if p == f64::INFINITY {
            continue;
        }
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // pop b when it lies strictly above the chord a -> i
            if (psi[b] - psi[a]) * (coords[i] - coords[a])
                > (psi[i] - psi[a]) * (coords[b] - coords[a])
            {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    if hull.is_empty() {
        out.extend(dual_coords.iter().map(|_| (f64::NEG_INFINITY, usize::MAX)));
        return;
    }
    let value = |i: usize, y: f64| coords[i] * y - psi[i];
    let mut j = 0usize;
    for &y in dual_coords {
        while j + 1 < hull.len() && value(hull[j + 1], y) > value(hull[j], y) {
            j += 1;
        }
        out.push((value(hull[j], y), hull[j]));
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Base offset of the `o`-th slice along axis `k` (mixed-radix decomposition
/// of `o` over the remaining axes, in axis order).
fn slice_base(o: usize, k: usize, dims: &[usize], strides: &[usize]) -> usize {
    let mut rem = o;
    let mut base = 0usize;
    for j in (0..dims.len()).rev() {
        if j == k {
            continue;
        }
        base += (rem % dims[j]) * strides[j];
        rem /= dims[j];
    }
    base
}

/// Per-axis factorized conjugate. Returns, for each dual node, the staged
/// value and the flat primal index of the maximizer.
fn conjugate_table_fast(
    values: &[f64],
    primal: &BoxGrid,
    dual: &BoxGrid,
) -> Vec<(f64, usize)> {
    let d = primal.dim();
    let mp = primal.points_per_axis();
    let md = dual.points_per_axis();
    let pc = primal.axis_coords();
    let dc = dual.axis_coords();

    // T_{-1} = -f; each stage conjugates one more axis.
    let mut dims: Vec<usize> = vec![mp; d];
    let mut cur: Vec<(f64, usize)> = values.iter().map(|&v| (-v, 0usize)).collect();
    for k in 0..d {
        let arg_stride = mp.pow((d - 1 - k) as u32);
        let in_dims = dims.clone();
        let in_strides = strides(&in_dims);
        let mut out_dims = dims.clone();
        out_dims[k] = md;
        let out_strides = strides(&out_dims);
        let n_outer: usize = in_dims
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, &m)| m)
            .product();
        let slices: Vec<Vec<(f64, usize)>> = exec::map_indexed(n_outer, |o| {
            let base = slice_base(o, k, &in_dims, &in_strides);
            let mut psi = Vec::with_capacity(mp);
            let mut prev_args = Vec::with_capacity(mp);
            for i in 0..mp {
                let (v, a) = cur[base + i * in_strides[k]];
                // psi = -T_{k-1}; a -inf stage value turns into +inf and is
                // skipped by the hull
                psi.push(-v);
                prev_args.push(a);
            }
            let mut out = Vec::with_capacity(md);
            conjugate_axis(&pc, &psi, &dc, &mut out);
            out.iter()
                .map(|&(v, i)| {
                    if i == usize::MAX {
                        (f64::NEG_INFINITY, 0usize)
                    } else {
                        (v, prev_args[i] + i * arg_stride)
                    }
                })
                .collect()
        });
        let total: usize = out_dims.iter().product();
        let mut next = vec![(f64::NEG_INFINITY, 0usize); total];
        for (o, slice) in slices.iter().enumerate() {
            let base = slice_base(o, k, &out_dims, &out_strides);
            for (i, &entry) in slice.iter().enumerate() {
                next[base + i * out_strides[k]] = entry;
            }
        }
        cur = next;
        dims = out_dims;
    }
    cur
}

/// Fast conjugate. The factorized transform selects the maximizer; the
/// returned value is re-evaluated with the shared term at that maximizer.
pub fn legendre(f: &GridFunction, dual: &BoxGrid) -> Result<GridFunction> {
    check_dims(f, dual)?;
    let primal = f.grid();
    let values = f.values_f64();
    let staged = conjugate_table_fast(&values, primal, dual);
    let vals = exec::map_indexed(dual.node_count(), |di| {
        let (staged_v, arg) = staged[di];
        if staged_v == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            pair_term(&primal.node(arg), &dual.node(di), values[arg])
        }
    });
    finish(dual.clone(), vals)
}

/// Conjugate value at one (possibly off-grid) dual point: exact max of the
/// shared term over the table.
pub fn conjugate_value(f: &GridFunction, point: &[f64]) -> Result<f64> {
    if point.len() != f.grid().dim() {
        return Err(Error::DimensionMismatch {
            expected: f.grid().dim(),
            got: point.len(),
        });
    }
    let values = f.values_f64();
    let grid = f.grid();
    let mut best = f64::NEG_INFINITY;
    let mut buf = vec![0.0; grid.dim()];
    for (i, &v) in values.iter().enumerate() {
        grid.node_into(i, &mut buf);
        let t = pair_term(&buf, point, v);
        if t > best {
            best = t;
        }
    }
    Ok(best)
}

/// Closed convex hull at grid resolution: the conjugate applied twice over
/// the same grid. The result never exceeds the input pointwise.
pub fn biconjugate(f: &GridFunction) -> Result<GridFunction> {
    let star = legendre(f, f.grid())?;
    legendre(&star, f.grid())
}

/// Flip-conjugation on a bifunction table: conjugate in the full pair, then
/// swap the two argument halves. In finite dimension the bidual is the
/// primal space, so the swap is well-typed.
pub fn flip_conjugate(h: &GridFunction) -> Result<GridFunction> {
    let grid = h.grid();
    if grid.dim() % 2 != 0 {
        return Err(Error::InvalidGrid(
            "flip_conjugate needs an even-dimensional pair grid".into(),
        ));
    }
    let d = grid.dim() / 2;
    let star = legendre(h, grid)?;
    let star_vals = star.values();
    let swapped = exec::map_indexed(grid.node_count(), |i| {
        let digits = grid.multi_index(i);
        let mut sw = Vec::with_capacity(digits.len());
        sw.extend_from_slice(&digits[d..]);
        sw.extend_from_slice(&digits[..d]);
        star_vals[grid.flat_index(&sw)]
    });
    GridFunction::new(grid.clone(), swapped)
}

/// Translation action on a bifunction:
/// `h_(x0,x0*)(x, x*) = h(x + x0, x* + x0*) - [<x, x0*> + <x0, x*> + <x0, x0*>]`.
/// The shift must be on-grid; evaluation outside the shifted table is `inf`.
pub fn translate(h: &GridFunction, x0: &[f64], x0star: &[f64]) -> Result<GridFunction> {
    let grid = h.grid();
    if grid.dim() % 2 != 0 {
        return Err(Error::InvalidGrid("translate needs a pair grid".into()));
    }
    let d = grid.dim() / 2;
    if x0.len() != d || x0star.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x0.len().max(x0star.len()),
        });
    }
    let spacing = grid.spacing();
    let mut offsets = Vec::with_capacity(2 * d);
    for &c in x0.iter().chain(x0star.iter()) {
        let steps = c / spacing;
        let rounded = steps.round();
        if (steps - rounded).abs() > 1e-9 {
            return Err(Error::OffGrid(format!("shift coordinate {c} is not a lattice multiple")));
        }
        offsets.push(rounded as i64);
    }
    let shift = dot(x0, x0star);
    let m = grid.points_per_axis() as i64;
    let correction = |node: &[f64]| dot(&node[..d], x0star) + dot(x0, &node[d..]) + shift;
    let values = exec::map_indexed(grid.node_count(), |i| {
        let digits = grid.multi_index(i);
        let mut src = Vec::with_capacity(digits.len());
        for (j, &dig) in digits.iter().enumerate() {
            let s = dig as i64 + offsets[j];
            if s < 0 || s >= m {
                return ExtReal::PosInf;
            }
            src.push(s as usize);
        }
        match h.value(grid.flat_index(&src)) {
            ExtReal::PosInf => ExtReal::PosInf,
            ExtReal::Finite(v) => ExtReal::Finite(v - correction(&grid.node(i))),
        }
    });
    GridFunction::new(grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tab(grid: &BoxGrid, f: impl Fn(&[f64]) -> f64) -> GridFunction {
        GridFunction::from_fn(grid.clone(), |x| ExtReal::new(f(x)).unwrap()).unwrap()
    }

    #[test]
    fn half_square_is_self_conjugate() {
        let g = BoxGrid::new(1, 2.0, 17).unwrap();
        let f = tab(&g, |x| 0.5 * x[0] * x[0]);
        let star = legendre(&f, &g).unwrap();
        // dual nodes inside the primal slope range: maximizer x = x* on-grid
        for (i, v) in star.values().iter().enumerate() {
            let xs = g.node(i)[0];
            assert_eq!(v.to_f64(), 0.5 * xs * xs, "at {xs}");
        }
    }

    #[test]
    fn indicator_of_origin_conjugates_to_zero() {
        let g = BoxGrid::new(1, 1.0, 5).unwrap();
        let f = GridFunction::from_fn(g.clone(), |x| {
            if x[0] == 0.0 {
                ExtReal::finite(0.0)
            } else {
                ExtReal::PosInf
            }
        })
        .unwrap();
        let star = legendre(&f, &g).unwrap();
        assert!(star.values().iter().all(|v| v.to_f64() == 0.0));
    }

    #[test]
    fn abs_conjugates_to_box_indicator() {
        let r = 2.0;
        let g = BoxGrid::new(1, r, 17).unwrap();
        let f = tab(&g, |x| x[0].abs());
        let star = legendre(&f, &g).unwrap();
        for (i, v) in star.values().iter().enumerate() {
            let xs = g.node(i)[0];
            let expected = if xs.abs() <= 1.0 { 0.0 } else { r * (xs.abs() - 1.0) };
            assert!((v.to_f64() - expected).abs() < 1e-12, "at {xs}");
        }
    }

    #[test]
    fn fast_and_brute_agree_bitwise_on_convex_inputs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for dim in [1usize, 2] {
            let g = BoxGrid::new(dim, 1.5, 13).unwrap();
            let dual = BoxGrid::new(dim, 2.0, 11).unwrap();
            for _ in 0..20 {
                // random strictly convex quadratic plus random affine part
                let a: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.3..2.0)).collect();
                let b: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let f = tab(&g, |x| {
                    let mut s = 0.0;
                    for k in 0..dim {
                        s += 0.5 * a[k] * x[k] * x[k] + b[k] * x[k];
                    }
                    s
                });
                let fast = legendre(&f, &dual).unwrap();
                let brute = legendre_brute(&f, &dual).unwrap();
                for (u, v) in fast.values().iter().zip(brute.values()) {
                    assert_eq!(u.to_f64().to_bits(), v.to_f64().to_bits());
                }
            }
            // named convex shapes, including partial domains
            let shapes: Vec<GridFunction> = vec![
                tab(&g, |x| x.iter().map(|t| t.abs()).sum()),
                tab(&g, |x| x.iter().map(|t| 0.5 * t * t).sum()),
                GridFunction::from_fn(g.clone(), |x| {
                    if x.iter().all(|t| t.abs() <= 1.0) {
                        ExtReal::finite(0.0)
                    } else {
                        ExtReal::PosInf
                    }
                })
                .unwrap(),
            ];
            for f in shapes {
                let fast = legendre(&f, &dual).unwrap();
                let brute = legendre_brute(&f, &dual).unwrap();
                for (u, v) in fast.values().iter().zip(brute.values()) {
                    assert_eq!(u.to_f64().to_bits(), v.to_f64().to_bits());
                }
            }
        }
    }

    #[test]
    fn fast_matches_brute_on_nonconvex_input_values() {
        // the fast path only sees the convex hull, which is exactly what the
        // conjugate of a nonconvex table depends on
        let g = BoxGrid::new(1, 1.0, 9).unwrap();
        let f = tab(&g, |x| -x[0] * x[0] + 0.3 * x[0]);
        let fast = legendre(&f, &g).unwrap();
        let brute = legendre_brute(&f, &g).unwrap();
        for (u, v) in fast.values().iter().zip(brute.values()) {
            assert!((u.to_f64() - v.to_f64()).abs() < 1e-12);
        }
    }

    #[test]
    fn biconjugate_is_convex_hull_of_spike() {
        // f = 0 at +-1, 1 at 0 -> hull is 0 on [-1, 1]
        let g = BoxGrid::new(1, 1.0, 3).unwrap();
        let f = GridFunction::new(
            g.clone(),
            vec![ExtReal::finite(0.0), ExtReal::finite(1.0), ExtReal::finite(0.0)],
        )
        .unwrap();
        let cc = biconjugate(&f).unwrap();
        for v in cc.values() {
            assert_eq!(v.to_f64(), 0.0);
        }
    }

    #[test]
    fn biconjugate_fixes_convex_functions() {
        let g = BoxGrid::new(1, 1.0, 9).unwrap();
        let f = tab(&g, |x| 0.5 * x[0] * x[0]);
        let cc = biconjugate(&f).unwrap();
        for (u, v) in cc.values().iter().zip(f.values()) {
            assert_eq!(u.to_f64(), v.to_f64());
        }
    }

    #[test]
    fn biconjugate_of_segment_indicator_interpolates() {
        // bifunction pi + delta_T for T = {(0,0), (1,1)} on a pair grid:
        // hull value at ((0.5), (0.5)) is the chord midpoint 0.5
        let g = BoxGrid::new(2, 1.0, 5).unwrap();
        let f = GridFunction::from_fn(g.clone(), |p| {
            let on = (p[0] == 0.0 && p[1] == 0.0) || (p[0] == 1.0 && p[1] == 1.0);
            if on {
                ExtReal::finite(p[0] * p[1])
            } else {
                ExtReal::PosInf
            }
        })
        .unwrap();
        let cc = biconjugate(&f).unwrap();
        let idx = g.index_of(&[0.5, 0.5], 1e-12).unwrap();
        assert!((cc.value(idx).to_f64() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn biconjugate_never_exceeds_input_and_is_idempotent() {
        let g = BoxGrid::new(1, 1.0, 9).unwrap();
        // dyadic values keep the arithmetic exact
        let f = GridFunction::new(
            g.clone(),
            (0..9)
                .map(|i| ExtReal::finite(((i * i) % 5) as f64 * 0.25))
                .collect(),
        )
        .unwrap();
        let cc = biconjugate(&f).unwrap();
        for (u, v) in cc.values().iter().zip(f.values()) {
            assert!(u.to_f64() <= v.to_f64() + 1e-12);
        }
        let cc2 = biconjugate(&cc).unwrap();
        assert_eq!(cc.values(), cc2.values());
    }

    #[test]
    fn legendre_reverses_pointwise_order() {
        let g = BoxGrid::new(1, 1.0, 9).unwrap();
        let f = tab(&g, |x| 0.5 * x[0] * x[0]);
        let h = tab(&g, |x| 0.5 * x[0] * x[0] + 0.3);
        let fs = legendre(&f, &g).unwrap();
        let hs = legendre(&h, &g).unwrap();
        for (u, v) in fs.values().iter().zip(hs.values()) {
            assert!(u.to_f64() >= v.to_f64());
        }
    }

    #[test]
    fn flip_conjugate_fixes_quadratic_coupling() {
        let g = BoxGrid::new(2, 2.0, 17).unwrap();
        let h = tab(&g, |p| 0.5 * p[0] * p[0] + 0.5 * p[1] * p[1]);
        let jh = flip_conjugate(&h).unwrap();
        for (u, v) in jh.values().iter().zip(h.values()) {
            assert!((u.to_f64() - v.to_f64()).abs() < 1e-12);
        }
    }

    #[test]
    fn flip_conjugate_of_origin_indicator_is_zero() {
        let g = BoxGrid::new(2, 1.0, 5).unwrap();
        let h = GridFunction::from_fn(g.clone(), |p| {
            if p[0] == 0.0 && p[1] == 0.0 {
                ExtReal::finite(0.0)
            } else {
                ExtReal::PosInf
            }
        })
        .unwrap();
        let jh = flip_conjugate(&h).unwrap();
        assert!(jh.values().iter().all(|v| v.to_f64() == 0.0));
    }

    #[test]
    fn flip_conjugate_twice_is_closed_hull() {
        let g = BoxGrid::new(2, 1.0, 9).unwrap();
        let h = GridFunction::from_fn(g.clone(), |p| {
            let on = p[0] == p[1];
            if on {
                ExtReal::finite(p[0] * p[1])
            } else {
                ExtReal::PosInf
            }
        })
        .unwrap();
        let jj = flip_conjugate(&flip_conjugate(&h).unwrap()).unwrap();
        let hull = biconjugate(&h).unwrap();
        for (u, v) in jj.values().iter().zip(hull.values()) {
            assert!((u.to_f64() - v.to_f64()).abs() < 1e-9);
        }
    }

    #[test]
    fn translate_by_zero_is_identity() {
        let g = BoxGrid::new(2, 1.0, 9).unwrap();
        let h = tab(&g, |p| 0.5 * p[0] * p[0] + 0.5 * p[1] * p[1]);
        let t = translate(&h, &[0.0], &[0.0]).unwrap();
        assert_eq!(t.values(), h.values());
    }

    #[test]
    fn translate_group_law() {
        let g = BoxGrid::new(2, 2.0, 17).unwrap();
        let h = tab(&g, |p| 0.5 * p[0] * p[0] + 0.25 * p[1] * p[1] + 0.5 * p[0]);
        let a = (vec![0.25], vec![-0.5]);
        let b = (vec![0.5], vec![0.25]);
        let lhs = translate(&translate(&h, &a.0, &a.1).unwrap(), &b.0, &b.1).unwrap();
        let rhs = translate(&h, &[a.0[0] + b.0[0]], &[a.1[0] + b.1[0]]).unwrap();
        for (u, v) in lhs.values().iter().zip(rhs.values()) {
            match (u.is_finite(), v.is_finite()) {
                (true, true) => assert!((u.to_f64() - v.to_f64()).abs() < 1e-12),
                // composing two shifts clips the domain twice, so the
                // composite may be inf where the single shift is finite
                (false, _) => {}
                (true, false) => panic!("single shift lost a node the composite kept"),
            }
        }
    }

    #[test]
    fn translate_rejects_off_grid_shift() {
        let g = BoxGrid::new(2, 1.0, 9).unwrap();
        let h = tab(&g, |p| p[0] * p[0] + p[1] * p[1]);
        assert!(matches!(
            translate(&h, &[0.3], &[0.0]),
            Err(Error::OffGrid(_))
        ));
    }

    #[test]
    fn translate_commutes_with_conjugation() {
        // (h_(x0,x0*))* = (h*)_(x0*,x0), checked on a refined grid where the
        // quadratic's conjugate is exact
        let g = BoxGrid::new(2, 2.0, 33).unwrap();
        let h = tab(&g, |p| 0.5 * p[0] * p[0] + 0.5 * p[1] * p[1]);
        let x0 = vec![0.5];
        let x0s = vec![-0.25];
        let lhs = legendre(&translate(&h, &x0, &x0s).unwrap(), &g).unwrap();
        let rhs = translate(&legendre(&h, &g).unwrap(), &x0s, &x0).unwrap();
        // compare away from the boundary where the truncated sup differs
        for i in 0..g.node_count() {
            let node = g.node(i);
            if node.iter().any(|c| c.abs() > 1.0) {
                continue;
            }
            let (u, v) = (lhs.value(i), rhs.value(i));
            assert!(
                (u.to_f64() - v.to_f64()).abs() < 1e-9,
                "at {node:?}: {u:?} vs {v:?}"
            );
        }
    }

    #[test]
    fn fenchel_young_holds_on_grid() {
        let g = BoxGrid::new(1, 1.0, 17).unwrap();
        let f = tab(&g, |x| x[0].abs());
        let star = legendre(&f, &g).unwrap();
        for (i, fx) in f.values().iter().enumerate() {
            for (j, fs) in star.values().iter().enumerate() {
                let x = g.node(i)[0];
                let xs = g.node(j)[0];
                assert!(fx.to_f64() + fs.to_f64() >= x * xs - 1e-9);
            }
        }
    }

    #[test]
    fn eps_subdifferential_characterization_matches_brute_force() {
        let g = BoxGrid::new(1, 1.0, 17).unwrap();
        let f = tab(&g, |x| 0.5 * x[0] * x[0] + 0.25 * x[0]);
        let star = legendre(&f, &g).unwrap();
        let eps = 0.3;
        for xi in 0..g.node_count() {
            let x = g.node(xi)[0];
            let fx = f.value(xi).to_f64();
            for si in 0..g.node_count() {
                let xs = g.node(si)[0];
                let by_conjugate = fx + star.value(si).to_f64() <= x * xs + eps;
                let by_definition = (0..g.node_count()).all(|yi| {
                    let y = g.node(yi)[0];
                    f.value(yi).to_f64() >= fx + (y - x) * xs - eps
                });
                assert_eq!(by_conjugate, by_definition, "x={x} xs={xs}");
            }
        }
    }
}
