//! Placement optimization for the repeater variants whose completion time is
//! a max of affine pieces: exact minimization by vertex enumeration, plus a
//! grid sweep for cross-checking.

use crate::error::{Error, Result};
use crate::rational::{rat, Rat};
use num_traits::Zero;

/// Families with a hand-derived affine piece list. The piece lists are
/// asserted against the event engine in the test suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptFamily {
    P1_2,
    P1_3Style,
    P2_2,
    P3_2,
    P5_2,
    P8_2,
}

impl OptFamily {
    pub fn parse(name: &str) -> Result<OptFamily> {
        let n = name.trim().trim_start_matches(['P', 'p']);
        Ok(match n {
            "1.2" => OptFamily::P1_2,
            "1.3" => OptFamily::P1_3Style,
            "2.2" => OptFamily::P2_2,
            "3.2" => OptFamily::P3_2,
            "5.2" => OptFamily::P5_2,
            "8.2" => OptFamily::P8_2,
            _ => return Err(Error::Unsupported(format!("no optimizer family '{name}'"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            OptFamily::P1_2 => "P1.2",
            OptFamily::P1_3Style => "P1.3",
            OptFamily::P2_2 => "P2.2",
            OptFamily::P3_2 => "P3.2",
            OptFamily::P5_2 => "P5.2",
            OptFamily::P8_2 => "P8.2",
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            OptFamily::P1_3Style => 3,
            _ => 2,
        }
    }
}

/// One affine piece `coef . x + c`.
#[derive(Clone, Debug)]
pub struct Affine {
    pub coef: Vec<Rat>,
    pub c: Rat,
}

impl Affine {
    fn new(coef: &[i64], den: i64, c: Rat) -> Affine {
        Affine {
            coef: coef.iter().map(|&n| rat(n, den)).collect(),
            c,
        }
    }

    pub fn eval(&self, x: &[Rat]) -> Rat {
        let mut acc = self.c;
        for (a, &xi) in self.coef.iter().zip(x) {
            acc += *a * xi;
        }
        acc
    }
}

/// Affine pieces of the completion time, as expanded from each family's
/// engine formula.
pub fn pieces(family: OptFamily) -> Vec<Affine> {
    match family {
        // max{ 2(1-x2), max{2x1, x2-x1} + (x2-x1) } + max{x2, 1-x2}
        OptFamily::P1_2 | OptFamily::P3_2 | OptFamily::P8_2 => vec![
            Affine::new(&[1, 2], 1, rat(0, 1)),
            Affine::new(&[1, 0], 1, rat(1, 1)),
            Affine::new(&[-2, 3], 1, rat(0, 1)),
            Affine::new(&[-2, 1], 1, rat(1, 1)),
            Affine::new(&[0, -1], 1, rat(2, 1)),
            Affine::new(&[0, -3], 1, rat(3, 1)),
        ],
        // max{ max{2x1, x2-x1} + (x2-x1), 1-x2 } + 2(1-x2) + x2
        OptFamily::P2_2 => vec![
            Affine::new(&[1, 0], 1, rat(2, 1)),
            Affine::new(&[-2, 1], 1, rat(2, 1)),
            Affine::new(&[0, -2], 1, rat(3, 1)),
        ],
        // max{2x1, 2(1-x2), 2(x2-x1)} + max{x2, 1-x1}
        OptFamily::P5_2 => vec![
            Affine::new(&[2, 1], 1, rat(0, 1)),
            Affine::new(&[1, 0], 1, rat(1, 1)),
            Affine::new(&[0, -1], 1, rat(2, 1)),
            Affine::new(&[-1, -2], 1, rat(3, 1)),
            Affine::new(&[-2, 3], 1, rat(0, 1)),
            Affine::new(&[-3, 2], 1, rat(1, 1)),
        ],
        // A-chain, B-chain through the outer relays, plus the broadcast.
        OptFamily::P1_3Style => vec![
            Affine::new(&[1, 2, 0], 1, rat(0, 1)),
            Affine::new(&[1, 0, 0], 1, rat(1, 1)),
            Affine::new(&[-2, 3, 0], 1, rat(0, 1)),
            Affine::new(&[-2, 1, 0], 1, rat(1, 1)),
            Affine::new(&[0, 0, -1], 1, rat(2, 1)),
            Affine::new(&[0, -2, -1], 1, rat(3, 1)),
            Affine::new(&[0, -1, 2], 1, rat(0, 1)),
            Affine::new(&[0, -3, 2], 1, rat(1, 1)),
        ],
    }
}

/// Max over the family's pieces at a position vector.
pub fn objective(family: OptFamily, x: &[Rat]) -> Rat {
    pieces(family)
        .iter()
        .map(|p| p.eval(x))
        .max()
        .expect("family has pieces")
}

/// Solves a square rational linear system in place; returns None if singular.
fn solve(mut a: Vec<Vec<Rat>>, mut b: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col];
        for c in col..n {
            a[col][c] /= p;
        }
        b[col] /= p;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col];
                for c in col..n {
                    let v = a[col][c];
                    a[r][c] -= f * v;
                }
                let bv = b[col];
                b[r] -= f * bv;
            }
        }
    }
    Some(b)
}

/// Exact minimization of `max_i piece_i(x)` over `0 <= x_1 <= ... <= x_k <= 1`
/// by enumerating vertices of the epigraph polyhedron. Ties break toward the
/// lexicographically smallest position vector.
pub fn minimize_exact(family: OptFamily) -> (Vec<Rat>, Rat) {
    let k = family.param_count();
    let ps = pieces(family);
    // Constraints g . (x, t) >= h.
    let mut rows: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for p in &ps {
        let mut g: Vec<Rat> = p.coef.iter().map(|&a| -a).collect();
        g.push(rat(1, 1));
        rows.push((g, p.c));
    }
    for i in 0..k {
        // x_i - x_{i-1} >= 0 (with x_0 taken as 0).
        let mut g = vec![rat(0, 1); k + 1];
        g[i] = rat(1, 1);
        if i > 0 {
            g[i - 1] = rat(-1, 1);
        }
        rows.push((g, rat(0, 1)));
    }
    {
        let mut g = vec![rat(0, 1); k + 1];
        g[k - 1] = rat(-1, 1);
        rows.push((g, rat(-1, 1))); // 1 - x_k >= 0
    }
    let dims = k + 1;
    let m = rows.len();
    let mut best: Option<(Rat, Vec<Rat>)> = None;
    let mut choose = vec![0usize; dims];
    fn combos(m: usize, d: usize, start: usize, choose: &mut Vec<usize>, pos: usize, f: &mut impl FnMut(&[usize])) {
        if pos == d {
            f(choose);
            return;
        }
        for i in start..m {
            choose[pos] = i;
            combos(m, d, i + 1, choose, pos + 1, f);
        }
    }
    let mut consider = |subset: &[usize]| {
        let a: Vec<Vec<Rat>> = subset.iter().map(|&i| rows[i].0.clone()).collect();
        let b: Vec<Rat> = subset.iter().map(|&i| rows[i].1).collect();
        let Some(sol) = solve(a, b) else { return };
        // Feasibility against every constraint.
        for (g, h) in &rows {
            let lhs: Rat = g.iter().zip(&sol).map(|(a, v)| *a * *v).sum();
            if lhs < *h {
                return;
            }
        }
        let t = sol[k];
        let x = sol[..k].to_vec();
        let better = match &best {
            None => true,
            Some((bt, bx)) => t < *bt || (t == *bt && x < *bx),
        };
        if better {
            best = Some((t, x));
        }
    };
    combos(m, dims, 0, &mut choose, 0, &mut consider);
    let (t, x) = best.expect("feasible polyhedron has a vertex");
    (x, t)
}

/// Grid sweep at resolution 1/q with one 10x local refinement pass. Returns
/// the best lattice point and its objective value.
pub fn minimize_grid(family: OptFamily, q: i64) -> (Vec<Rat>, Rat) {
    let k = family.param_count();
    let ps = pieces(family);
    // Integer-scaled evaluation on the lattice x_i = n_i / den.
    let eval_scaled = |coords: &[i64], den: i64| -> Rat {
        let x: Vec<Rat> = coords.iter().map(|&n| rat(n, den)).collect();
        ps.iter().map(|p| p.eval(&x)).max().unwrap()
    };
    let mut best_val: Option<Rat> = None;
    let mut best_pt: Vec<i64> = vec![0; k];
    let sweep = |den: i64, lo: &[i64], hi: &[i64], best_val: &mut Option<Rat>, best_pt: &mut Vec<i64>| {
        let mut coords = lo.to_vec();
        loop {
            let ordered = coords.windows(2).all(|w| w[0] < w[1])
                && coords[0] > 0
                && coords[k - 1] < den;
            if ordered {
                let v = eval_scaled(&coords, den);
                let better = match best_val {
                    None => true,
                    Some(bv) => v < *bv,
                };
                if better {
                    *best_val = Some(v);
                    *best_pt = coords.clone();
                }
            }
            let mut i = k;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                coords[i] += 1;
                if coords[i] <= hi[i] {
                    break;
                }
                coords[i] = lo[i];
            }
        }
    };
    let lo = vec![1i64; k];
    let hi = vec![q - 1; k];
    sweep(q, &lo, &hi, &mut best_val, &mut best_pt);
    // Refine around the winner at 10x resolution.
    let fine = q * 10;
    let lo: Vec<i64> = best_pt.iter().map(|&n| (n * 10 - 10).max(1)).collect();
    let hi: Vec<i64> = best_pt.iter().map(|&n| (n * 10 + 10).min(fine - 1)).collect();
    let mut fine_val = None;
    let mut fine_pt = vec![0i64; k];
    sweep(fine, &lo, &hi, &mut fine_val, &mut fine_pt);
    let coarse = (
        best_pt.iter().map(|&n| rat(n, q)).collect::<Vec<_>>(),
        best_val.unwrap(),
    );
    match fine_val {
        Some(v) if v < coarse.1 => (fine_pt.iter().map(|&n| rat(n, fine)).collect(), v),
        _ => coarse,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exact,
    Grid,
}

/// Optimal repeater placement for the given family. `n` must match the
/// family's parameter count; grid resolution defaults to 1/1000 for
/// two-parameter families and 1/120 for three.
pub fn optimize_placement(family: OptFamily, n: usize, method: Method) -> Result<(Vec<Rat>, Rat)> {
    if n != family.param_count() {
        return Err(Error::ArityMismatch {
            variant: family.name().into(),
            expected: family.param_count(),
            got: n,
        });
    }
    Ok(match method {
        Method::Exact => minimize_exact(family),
        Method::Grid => {
            let q = if family.param_count() == 2 { 1000 } else { 120 };
            minimize_grid(family, q)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_recovers_known_optima() {
        let (x, t) = minimize_exact(OptFamily::P2_2);
        assert_eq!(x, vec![rat(1, 7), rat(3, 7)]);
        assert_eq!(t, rat(15, 7));

        let (x, t) = minimize_exact(OptFamily::P3_2);
        assert_eq!(x, vec![rat(1, 5), rat(3, 5)]);
        assert_eq!(t, rat(7, 5));

        let (x, t) = minimize_exact(OptFamily::P1_2);
        assert_eq!((x, t), (vec![rat(1, 5), rat(3, 5)], rat(7, 5)));

        let (x, t) = minimize_exact(OptFamily::P8_2);
        assert_eq!((x, t), (vec![rat(1, 5), rat(3, 5)], rat(7, 5)));

        let (x, t) = minimize_exact(OptFamily::P5_2);
        assert_eq!(x, vec![rat(1, 3), rat(2, 3)]);
        assert_eq!(t, rat(4, 3));

        let (x, t) = minimize_exact(OptFamily::P1_3Style);
        assert_eq!(x, vec![rat(1, 6), rat(1, 2), rat(5, 6)]);
        assert_eq!(t, rat(7, 6));
    }

    #[test]
    fn grid_agrees_with_exact() {
        for fam in [OptFamily::P2_2, OptFamily::P3_2, OptFamily::P5_2] {
            let (_, exact) = minimize_exact(fam);
            let (_, grid) = minimize_grid(fam, 1000);
            assert!(grid >= exact, "grid can never beat the exact minimum");
            assert!(grid - exact <= rat(3, 1000), "{fam:?}: {grid} vs {exact}");
        }
    }

    #[test]
    fn arity_is_checked() {
        assert!(optimize_placement(OptFamily::P3_2, 3, Method::Exact).is_err());
        assert!(optimize_placement(OptFamily::P1_3Style, 3, Method::Exact).is_ok());
    }
}
