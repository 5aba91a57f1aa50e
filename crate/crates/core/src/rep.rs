//! Projective representations of finite groups, given as matrix families with
//! multiplication tables and factor systems.

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::qops::{gen_pauli_x, gen_pauli_z};
use num_complex::Complex64;

pub const REP_TOL: f64 = 1e-9;

/// Decomposition of an abelian group into cyclic coordinates. Element `f` has
/// coordinate vector `coords[f]`; the dual group is indexed the same way.
#[derive(Clone, Debug)]
pub struct AbelianStructure {
    pub orders: Vec<usize>,
    pub coords: Vec<Vec<usize>>,
}

impl AbelianStructure {
    /// Character chi_h(f) for dual index h.
    pub fn character(&self, h: usize, f: usize) -> Complex64 {
        let hc = &self.coords[h];
        let fc = &self.coords[f];
        let mut theta = 0.0f64;
        for ((&hi, &fi), &m) in hc.iter().zip(fc).zip(&self.orders) {
            theta += std::f64::consts::TAU * (hi * fi) as f64 / m as f64;
        }
        Complex64::from_polar(1.0, theta)
    }

    /// Dual-group difference `h - g` as a flat index.
    pub fn dual_sub(&self, h: usize, g: usize) -> usize {
        let hc = &self.coords[h];
        let gc = &self.coords[g];
        let diff: Vec<usize> = hc
            .iter()
            .zip(gc)
            .zip(&self.orders)
            .map(|((&a, &b), &m)| (a + m - b) % m)
            .collect();
        self.flat_index(&diff)
    }

    fn flat_index(&self, coords: &[usize]) -> usize {
        // coords are unique per element; linear scan is fine at these sizes.
        self.coords
            .iter()
            .position(|c| c == coords)
            .expect("coordinate vector not in group")
    }
}

/// A projective representation: matrices multiplying as the group up to the
/// factor system `omega(f,g)`.
#[derive(Clone, Debug)]
pub struct ProjectiveRep {
    matrices: Vec<ComplexMatrix>,
    mult: Vec<Vec<usize>>,
    inv: Vec<usize>,
    identity: usize,
    phases: Vec<Vec<Complex64>>,
    abelian: Option<AbelianStructure>,
}

impl ProjectiveRep {
    /// Builds a representation from a closed family of matrices. Element
    /// products are matched numerically; fails if the family is not closed up
    /// to phases or contains proportional duplicates.
    pub fn from_matrices(matrices: Vec<ComplexMatrix>) -> Result<Self> {
        let n = matrices.len();
        if n == 0 {
            return Err(Error::InvalidForm("empty representation".into()));
        }
        let dim = matrices[0].rows();
        for m in &matrices {
            if !m.is_square() || m.rows() != dim {
                return Err(Error::DimensionMismatch(
                    "representation matrices differ in size".into(),
                ));
            }
            m.check_unitary(REP_TOL, "representation matrix")?;
        }
        let identity = matrices
            .iter()
            .position(|m| m.max_abs_diff(&ComplexMatrix::identity(dim)) <= REP_TOL)
            .ok_or_else(|| Error::InvalidForm("representation has no identity matrix".into()))?;
        // Pairwise distinguishability up to phase.
        for i in 0..n {
            for j in (i + 1)..n {
                let ov = matrices[i].hs_inner(&matrices[j]).norm() / dim as f64;
                if ov > 1.0 - 1e-6 {
                    return Err(Error::InvalidForm(format!(
                        "elements {i} and {j} coincide up to phase"
                    )));
                }
            }
        }
        let mut mult = vec![vec![0usize; n]; n];
        let mut phases = vec![vec![Complex64::new(1.0, 0.0); n]; n];
        for f in 0..n {
            for g in 0..n {
                let prod = matrices[f].mul(&matrices[g]);
                let mut best = (0usize, 0.0f64);
                for h in 0..n {
                    let score = matrices[h].hs_inner(&prod).norm() / dim as f64;
                    if score > best.1 {
                        best = (h, score);
                    }
                }
                let (h, score) = best;
                if score < 1.0 - 1e-6 {
                    return Err(Error::InvalidForm(format!(
                        "product of elements {f},{g} leaves the family"
                    )));
                }
                let omega = matrices[h].hs_inner(&prod) / dim as f64;
                let omega = omega / omega.norm();
                if prod.max_abs_diff(&matrices[h].scale(omega)) > REP_TOL {
                    return Err(Error::InvalidForm(format!(
                        "product of elements {f},{g} is not a phase multiple of element {h}"
                    )));
                }
                mult[f][g] = h;
                phases[f][g] = omega;
            }
        }
        let mut inv = vec![usize::MAX; n];
        for f in 0..n {
            inv[f] = mult[f]
                .iter()
                .position(|&h| h == identity)
                .ok_or_else(|| Error::InvalidForm(format!("element {f} has no inverse")))?;
        }
        let abelian = abelian_structure(&mult, identity);
        Ok(ProjectiveRep {
            matrices,
            mult,
            inv,
            identity,
            phases,
            abelian,
        })
    }

    pub fn order(&self) -> usize {
        self.matrices.len()
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].rows()
    }

    pub fn matrix(&self, f: usize) -> &ComplexMatrix {
        &self.matrices[f]
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    pub fn mul_elem(&self, f: usize, g: usize) -> usize {
        self.mult[f][g]
    }

    pub fn inv_elem(&self, f: usize) -> usize {
        self.inv[f]
    }

    pub fn identity_elem(&self) -> usize {
        self.identity
    }

    /// Factor-system phase omega(f,g) with `M(f) M(g) = omega(f,g) M(fg)`.
    pub fn phase(&self, f: usize, g: usize) -> Complex64 {
        self.phases[f][g]
    }

    pub fn mult_table(&self) -> &[Vec<usize>] {
        &self.mult
    }

    pub fn abelian(&self) -> Option<&AbelianStructure> {
        self.abelian.as_ref()
    }

    pub fn is_abelian(&self) -> bool {
        self.abelian.is_some()
    }

    /// Index of the rep element proportional to `m`, with the proportionality
    /// phase, if any.
    pub fn find_element(&self, m: &ComplexMatrix, tol: f64) -> Option<(usize, Complex64)> {
        let dim = self.dim() as f64;
        for (i, cand) in self.matrices.iter().enumerate() {
            let ov = cand.hs_inner(m) / dim;
            if ov.norm() > 1.0 - 1e-6 {
                let phase = ov / ov.norm();
                if m.max_abs_diff(&cand.scale(phase)) <= tol {
                    return Some((i, phase));
                }
            }
        }
        None
    }
}

/// Abstract finite group: multiplication table, inverses and (when abelian)
/// cyclic coordinates. Used where a matrix family may repeat elements.
#[derive(Clone, Debug)]
pub struct GroupTable {
    pub mult: Vec<Vec<usize>>,
    pub inv: Vec<usize>,
    pub identity: usize,
    pub abelian: Option<AbelianStructure>,
}

impl GroupTable {
    pub fn order(&self) -> usize {
        self.mult.len()
    }

    pub fn mul(&self, f: usize, g: usize) -> usize {
        self.mult[f][g]
    }

    /// Direct product of cyclic groups; element index is little-endian over
    /// `orders` (first coordinate varies fastest).
    pub fn product_of_cyclics(orders: &[usize]) -> Result<GroupTable> {
        if orders.is_empty() || orders.iter().any(|&m| m == 0) {
            return Err(Error::InvalidForm(format!("bad cyclic orders {orders:?}")));
        }
        let n: usize = orders.iter().product();
        let decode = |mut i: usize| -> Vec<usize> {
            orders
                .iter()
                .map(|&m| {
                    let c = i % m;
                    i /= m;
                    c
                })
                .collect()
        };
        let encode = |c: &[usize]| -> usize {
            let mut idx = 0;
            let mut stride = 1;
            for (&ci, &m) in c.iter().zip(orders) {
                idx += ci * stride;
                stride *= m;
            }
            idx
        };
        let coords: Vec<Vec<usize>> = (0..n).map(decode).collect();
        let mut mult = vec![vec![0usize; n]; n];
        let mut inv = vec![0usize; n];
        for f in 0..n {
            for g in 0..n {
                let sum: Vec<usize> = coords[f]
                    .iter()
                    .zip(&coords[g])
                    .zip(orders)
                    .map(|((&a, &b), &m)| (a + b) % m)
                    .collect();
                mult[f][g] = encode(&sum);
            }
            let neg: Vec<usize> = coords[f]
                .iter()
                .zip(orders)
                .map(|(&a, &m)| (m - a) % m)
                .collect();
            inv[f] = encode(&neg);
        }
        Ok(GroupTable {
            mult,
            inv,
            identity: 0,
            abelian: Some(AbelianStructure {
                orders: orders.to_vec(),
                coords,
            }),
        })
    }

    pub fn from_projective(rep: &ProjectiveRep) -> GroupTable {
        GroupTable {
            mult: rep.mult.clone(),
            inv: rep.inv.clone(),
            identity: rep.identity,
            abelian: rep.abelian.clone(),
        }
    }
}

/// Generalized Pauli projective representation of order d^2: element
/// `(j,k) -> X^j Z^k` with flat index `j*d + k`.
pub fn pauli_rep(d: usize) -> Result<ProjectiveRep> {
    if d < 2 {
        return Err(Error::InvalidDimension("pauli_rep needs d >= 2".into()));
    }
    let x = gen_pauli_x(d)?;
    let z = gen_pauli_z(d)?;
    let mut mats = Vec::with_capacity(d * d);
    for j in 0..d {
        for k in 0..d {
            mats.push(x.pow(j).mul(&z.pow(k)));
        }
    }
    ProjectiveRep::from_matrices(mats)
}

/// Closes a generating set under multiplication, canonicalizing phases so each
/// group element appears once. Fails if the closure exceeds `cap`.
pub fn closure_from_generators(gens: &[ComplexMatrix], cap: usize) -> Result<ProjectiveRep> {
    if gens.is_empty() {
        return Err(Error::InvalidForm("no generators".into()));
    }
    let dim = gens[0].rows();
    let canonical = |m: &ComplexMatrix| -> ComplexMatrix {
        // Divide out the phase of the first significant entry.
        for idx in 0..dim * dim {
            let v = m.entries()[idx];
            if v.norm() > 1e-8 {
                return m.scale((v / v.norm()).conj());
            }
        }
        m.clone()
    };
    let mut elems: Vec<ComplexMatrix> = vec![ComplexMatrix::identity(dim)];
    let mut frontier = vec![0usize];
    while let Some(i) = frontier.pop() {
        for g in gens {
            let prod = canonical(&elems[i].mul(g));
            if !elems.iter().any(|e| e.max_abs_diff(&prod) < 1e-8) {
                if elems.len() >= cap {
                    return Err(Error::InvalidForm(format!(
                        "generator closure exceeds cap {cap}"
                    )));
                }
                elems.push(prod);
                frontier.push(elems.len() - 1);
            }
        }
    }
    ProjectiveRep::from_matrices(elems)
}

/// Cyclic-coordinate decomposition of an abelian group given by its
/// multiplication table; `None` if the group is non-abelian.
fn abelian_structure(mult: &[Vec<usize>], identity: usize) -> Option<AbelianStructure> {
    let n = mult.len();
    for f in 0..n {
        for g in 0..n {
            if mult[f][g] != mult[g][f] {
                return None;
            }
        }
    }
    let orders_coords = decompose(&(0..n).collect::<Vec<_>>(), mult, identity);
    Some(orders_coords)
}

/// Peels off a maximal-order cyclic factor and recurses on the quotient.
fn decompose(elements: &[usize], mult: &[Vec<usize>], identity: usize) -> AbelianStructure {
    let n_total = mult.len();
    if elements.len() == 1 {
        return AbelianStructure {
            orders: vec![],
            coords: vec![vec![]; n_total],
        };
    }
    let order_of = |g: usize| -> usize {
        let mut o = 1;
        let mut cur = g;
        while cur != identity {
            cur = mult[cur][g];
            o += 1;
        }
        o
    };
    // Representative set is the whole group on the first call; on recursive
    // calls we work on quotient tables, so elements == 0..len.
    let _ = elements;
    let g1 = (0..n_total).max_by_key(|&g| order_of(g)).unwrap();
    let m1 = order_of(g1);
    if m1 == n_total {
        // Cyclic: coordinates are discrete logs base g1.
        let mut coords = vec![vec![0usize]; n_total];
        let mut cur = identity;
        for e in 0..m1 {
            coords[cur] = vec![e];
            cur = mult[cur][g1];
        }
        return AbelianStructure {
            orders: vec![m1],
            coords,
        };
    }
    // Cosets of <g1>.
    let mut powers = Vec::with_capacity(m1);
    let mut cur = identity;
    for _ in 0..m1 {
        powers.push(cur);
        cur = mult[cur][g1];
    }
    let mut coset_of = vec![usize::MAX; n_total];
    let mut reps: Vec<usize> = Vec::new();
    for e in 0..n_total {
        if coset_of[e] != usize::MAX {
            continue;
        }
        let id = reps.len();
        reps.push(e);
        for &p in &powers {
            coset_of[mult[e][p]] = id;
        }
    }
    let q = reps.len();
    let mut qmult = vec![vec![0usize; q]; q];
    for a in 0..q {
        for b in 0..q {
            qmult[a][b] = coset_of[mult[reps[a]][reps[b]]];
        }
    }
    let qid = coset_of[identity];
    let sub = decompose(&(0..q).collect::<Vec<_>>(), &qmult, qid);
    // Lift quotient generators and adjust so their order matches.
    let pow_elem = |g: usize, mut e: usize| -> usize {
        let mut acc = identity;
        while e > 0 {
            acc = mult[acc][g];
            e -= 1;
        }
        acc
    };
    let dlog_g1 = |h: usize| -> usize {
        powers
            .iter()
            .position(|&p| p == h)
            .expect("element not a power of g1")
    };
    // Reconstruct quotient generator reps: find, for each cyclic factor of the
    // quotient, an element of G whose coset has that coordinate = 1.
    let mut lifted = Vec::new();
    for (axis, &mi) in sub.orders.iter().enumerate() {
        let coset_idx = (0..q)
            .find(|&cid| {
                sub.coords[cid]
                    .iter()
                    .enumerate()
                    .all(|(i, &c)| if i == axis { c == 1 } else { c == 0 })
            })
            .expect("quotient generator coset missing");
        let h = reps[coset_idx];
        let t = dlog_g1(pow_elem(h, mi));
        debug_assert_eq!(t % mi, 0, "lifting adjustment must divide");
        let adj = pow_elem(g1, (m1 - t / mi % m1) % m1);
        lifted.push((mult[h][adj], mi));
    }
    // Coordinates: enumerate all products g1^a * prod lifted_i^{b_i}.
    let mut coords = vec![Vec::new(); n_total];
    let mut orders = vec![m1];
    orders.extend(lifted.iter().map(|&(_, m)| m));
    let mut counters = vec![0usize; orders.len()];
    loop {
        let mut e = pow_elem(g1, counters[0]);
        for (i, &(gen, _)) in lifted.iter().enumerate() {
            e = mult[e][pow_elem(gen, counters[i + 1])];
        }
        coords[e] = counters.clone();
        let mut i = 0;
        loop {
            if i == counters.len() {
                return AbelianStructure { orders, coords };
            }
            counters[i] += 1;
            if counters[i] < orders[i] {
                break;
            }
            counters[i] = 0;
            i += 1;
        }
    }
}
