//! Composite-system state vectors, subsystem operators and measurement branching.
//!
//! Subsystem ordering is little-endian over the `dims` list: subsystem 0
//! varies fastest, so a basis label `(i_0, i_1, ...)` maps to the flat index
//! `i_0 + d_0 * i_1 + d_0 * d_1 * i_2 + ...`.

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use num_complex::Complex64;
use rand::Rng;

/// Hard safety cap on the total Hilbert-space dimension.
pub const MAX_TOTAL_DIM: usize = 1 << 20;

/// Branch probabilities below this are dropped from measurement results.
pub const PROB_CUTOFF: f64 = 1e-12;

pub const NORM_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct QuditState {
    dims: Vec<usize>,
    amps: Vec<Complex64>,
}

/// One outcome of a projective measurement. The measured subsystems are
/// removed from the post-state.
#[derive(Clone, Debug)]
pub struct MeasurementBranch {
    pub outcome: usize,
    pub probability: f64,
    pub post_state: QuditState,
}

/// Measurement basis for one or more subsystems.
pub enum Basis<'a> {
    Computational,
    /// Columns are the basis vectors; must be unitary.
    Matrix(&'a ComplexMatrix),
}

fn total_dim(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::InvalidDimension(format!("bad dims list {dims:?}")));
    }
    let mut t: usize = 1;
    for &d in dims {
        t = t
            .checked_mul(d)
            .filter(|&t| t <= MAX_TOTAL_DIM)
            .ok_or_else(|| Error::InvalidDimension(format!("total dimension over cap {dims:?}")))?;
    }
    Ok(t)
}

impl QuditState {
    pub fn from_amplitudes(dims: Vec<usize>, amps: Vec<Complex64>) -> Result<Self> {
        let t = total_dim(&dims)?;
        if amps.len() != t {
            return Err(Error::DimensionMismatch(format!(
                "expected {} amplitudes for dims {:?}, got {}",
                t,
                dims,
                amps.len()
            )));
        }
        Ok(QuditState { dims, amps })
    }

    /// Computational basis state `|labels>`.
    pub fn basis_state(dims: &[usize], labels: &[usize]) -> Result<Self> {
        let t = total_dim(dims)?;
        if labels.len() != dims.len() || labels.iter().zip(dims).any(|(&l, &d)| l >= d) {
            return Err(Error::DimensionMismatch(format!(
                "labels {labels:?} out of range for dims {dims:?}"
            )));
        }
        let mut idx = 0usize;
        let mut stride = 1usize;
        for (l, d) in labels.iter().zip(dims) {
            idx += l * stride;
            stride *= d;
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); t];
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(QuditState {
            dims: dims.to_vec(),
            amps,
        })
    }

    /// Maximally entangled pair `1/sqrt(d) * sum_j |jj>` as a two-subsystem state.
    pub fn max_entangled(d: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidDimension("max_entangled d=0".into()));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); d * d];
        let a = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        for j in 0..d {
            amps[j + d * j] = a;
        }
        Ok(QuditState {
            dims: vec![d, d],
            amps,
        })
    }

    pub fn random(dims: &[usize], rng: &mut impl Rng) -> Result<Self> {
        let t = total_dim(dims)?;
        let mut amps = Vec::with_capacity(t);
        for _ in 0..t {
            let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
            let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = (-2.0 * u1.ln()).sqrt();
            amps.push(Complex64::new(r * u2.cos(), r * u2.sin()));
        }
        let mut s = QuditState {
            dims: dims.to_vec(),
            amps,
        };
        s.normalize();
        Ok(s)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    pub fn inner(&self, other: &QuditState) -> Result<Complex64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "inner product dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Appends `other`'s subsystems after this state's (this state varies fastest).
    pub fn kron(&self, other: &QuditState) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let t = total_dim(&dims)?;
        let mut amps = Vec::with_capacity(t);
        for b in &other.amps {
            for a in &self.amps {
                amps.push(a * b);
            }
        }
        Ok(QuditState { dims, amps })
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = Vec::with_capacity(self.dims.len());
        let mut acc = 1;
        for &d in &self.dims {
            s.push(acc);
            acc *= d;
        }
        s
    }

    fn check_targets(&self, targets: &[usize]) -> Result<()> {
        for (i, &t) in targets.iter().enumerate() {
            if t >= self.dims.len() {
                return Err(Error::DimensionMismatch(format!(
                    "target {t} out of range for {} subsystems",
                    self.dims.len()
                )));
            }
            if targets[..i].contains(&t) {
                return Err(Error::DimensionMismatch(format!("repeated target {t}")));
            }
        }
        Ok(())
    }

    /// Enumerates flat base offsets of all assignments to the non-target
    /// subsystems, with the targets held at 0.
    fn rest_offsets(&self, targets: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let rest: Vec<usize> = (0..self.dims.len()).filter(|k| !targets.contains(k)).collect();
        let rest_total: usize = rest.iter().map(|&k| self.dims[k]).product();
        let mut offsets = Vec::with_capacity(rest_total.max(1));
        let mut counters = vec![0usize; rest.len()];
        loop {
            let off: usize = rest
                .iter()
                .zip(&counters)
                .map(|(&k, &c)| c * strides[k])
                .sum();
            offsets.push(off);
            let mut i = 0;
            loop {
                if i == rest.len() {
                    return offsets;
                }
                counters[i] += 1;
                if counters[i] < self.dims[rest[i]] {
                    break;
                }
                counters[i] = 0;
                i += 1;
            }
        }
    }

    /// Offsets of the target composite index: `targets[0]` varies fastest.
    fn target_offsets(&self, targets: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let d_t: usize = targets.iter().map(|&t| self.dims[t]).product();
        let mut offs = Vec::with_capacity(d_t);
        for mut j in 0..d_t {
            let mut off = 0;
            for &t in targets {
                off += (j % self.dims[t]) * strides[t];
                j /= self.dims[t];
            }
            offs.push(off);
        }
        offs
    }

    /// Applies `op` on the ordered `targets` (tensored with identity elsewhere).
    pub fn apply_on(&self, op: &ComplexMatrix, targets: &[usize]) -> Result<QuditState> {
        self.check_targets(targets)?;
        let d_t: usize = targets.iter().map(|&t| self.dims[t]).product();
        if !op.is_square() || op.rows() != d_t {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, targets give dimension {d_t}",
                op.rows(),
                op.cols()
            )));
        }
        let t_offs = self.target_offsets(targets);
        let mut out = self.clone();
        let mut scratch = vec![Complex64::new(0.0, 0.0); d_t];
        for base in self.rest_offsets(targets) {
            for (j, &off) in t_offs.iter().enumerate() {
                scratch[j] = self.amps[base + off];
            }
            for (i, &off) in t_offs.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, v) in scratch.iter().enumerate() {
                    let m = op.at(i, j);
                    if m.norm_sqr() != 0.0 {
                        acc += m * v;
                    }
                }
                out.amps[base + off] = acc;
            }
        }
        Ok(out)
    }

    /// Applies `ops[f]` on `targets` whenever the `control` subsystem is in
    /// computational state `f`. Classically-controlled block application.
    pub fn apply_controlled(
        &self,
        control: usize,
        targets: &[usize],
        ops: &[ComplexMatrix],
    ) -> Result<QuditState> {
        let mut all = vec![control];
        all.extend_from_slice(targets);
        self.check_targets(&all)?;
        let d_c = self.dims[control];
        if ops.len() != d_c {
            return Err(Error::DimensionMismatch(format!(
                "need {d_c} controlled operators, got {}",
                ops.len()
            )));
        }
        let d_t: usize = targets.iter().map(|&t| self.dims[t]).product();
        for op in ops {
            if !op.is_square() || op.rows() != d_t {
                return Err(Error::DimensionMismatch(
                    "controlled operator dimension mismatch".into(),
                ));
            }
        }
        let strides = self.strides();
        let c_stride = strides[control];
        let t_offs = self.target_offsets(targets);
        let mut out = self.clone();
        let mut scratch = vec![Complex64::new(0.0, 0.0); d_t];
        for base in self.rest_offsets(&all) {
            for f in 0..d_c {
                let cbase = base + f * c_stride;
                let op = &ops[f];
                for (j, &off) in t_offs.iter().enumerate() {
                    scratch[j] = self.amps[cbase + off];
                }
                for (i, &off) in t_offs.iter().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, v) in scratch.iter().enumerate() {
                        let m = op.at(i, j);
                        if m.norm_sqr() != 0.0 {
                            acc += m * v;
                        }
                    }
                    out.amps[cbase + off] = acc;
                }
            }
        }
        Ok(out)
    }

    /// Multiplies the amplitude of each computational level of `target` by a phase.
    pub fn apply_diag(&self, target: usize, phases: &[Complex64]) -> Result<QuditState> {
        self.check_targets(&[target])?;
        if phases.len() != self.dims[target] {
            return Err(Error::DimensionMismatch("diag phase length".into()));
        }
        let stride = self.strides()[target];
        let d = self.dims[target];
        let mut out = self.clone();
        for (i, a) in out.amps.iter_mut().enumerate() {
            *a *= phases[(i / stride) % d];
        }
        Ok(out)
    }

    /// Projective measurement of `targets` in the given basis. The measured
    /// subsystems are removed from each branch's post-state; branches with
    /// probability below `PROB_CUTOFF` are dropped.
    pub fn measure(&self, targets: &[usize], basis: Basis) -> Result<Vec<MeasurementBranch>> {
        self.check_targets(targets)?;
        if targets.len() == self.dims.len() {
            return Err(Error::DimensionMismatch(
                "cannot measure away every subsystem".into(),
            ));
        }
        let d_t: usize = targets.iter().map(|&t| self.dims[t]).product();
        if let Basis::Matrix(b) = &basis {
            if !b.is_square() || b.rows() != d_t {
                return Err(Error::DimensionMismatch(format!(
                    "basis is {}x{}, targets give dimension {d_t}",
                    b.rows(),
                    b.cols()
                )));
            }
            b.check_unitary(crate::matrix::UNITARY_TOL, "measurement basis")?;
        }
        let t_offs = self.target_offsets(targets);
        let rest_offs = self.rest_offsets(targets);
        let rest_dims: Vec<usize> = (0..self.dims.len())
            .filter(|k| !targets.contains(k))
            .map(|k| self.dims[k])
            .collect();
        let mut branches = Vec::new();
        for o in 0..d_t {
            let mut amps = Vec::with_capacity(rest_offs.len());
            match &basis {
                Basis::Computational => {
                    let off = t_offs[o];
                    for &base in &rest_offs {
                        amps.push(self.amps[base + off]);
                    }
                }
                Basis::Matrix(b) => {
                    for &base in &rest_offs {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (j, &off) in t_offs.iter().enumerate() {
                            // Amplitude of basis vector o is <b_o|psi>.
                            acc += b.at(j, o).conj() * self.amps[base + off];
                        }
                        amps.push(acc);
                    }
                }
            }
            let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            if p < PROB_CUTOFF {
                continue;
            }
            let scale = 1.0 / p.sqrt();
            for a in &mut amps {
                *a *= scale;
            }
            branches.push(MeasurementBranch {
                outcome: o,
                probability: p,
                post_state: QuditState {
                    dims: rest_dims.clone(),
                    amps,
                },
            });
        }
        Ok(branches)
    }

    /// Samples a single measurement branch with the given RNG.
    pub fn sample_measure(
        &self,
        targets: &[usize],
        basis: Basis,
        rng: &mut impl Rng,
    ) -> Result<MeasurementBranch> {
        let branches = self.measure(targets, basis)?;
        let mut r: f64 = rng.gen_range(0.0..1.0);
        for b in &branches {
            if r < b.probability {
                return Ok(b.clone());
            }
            r -= b.probability;
        }
        Ok(branches.last().cloned().expect("no branches"))
    }

    /// Reorders subsystems: new subsystem `k` is old subsystem `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<QuditState> {
        if perm.len() != self.dims.len() {
            return Err(Error::DimensionMismatch("permutation length".into()));
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || seen[p] {
                return Err(Error::DimensionMismatch("invalid permutation".into()));
            }
            seen[p] = true;
        }
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let old_strides = self.strides();
        let mut new_strides = Vec::with_capacity(new_dims.len());
        let mut acc = 1;
        for &d in &new_dims {
            new_strides.push(acc);
            acc *= d;
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (old_idx, &a) in self.amps.iter().enumerate() {
            let mut new_idx = 0;
            for (k, &p) in perm.iter().enumerate() {
                let coord = (old_idx / old_strides[p]) % self.dims[p];
                new_idx += coord * new_strides[k];
            }
            amps[new_idx] = a;
        }
        Ok(QuditState {
            dims: new_dims,
            amps,
        })
    }

    /// Reduced density operator of the state after tracing out `targets`.
    pub fn reduced_density_excluding(&self, targets: &[usize]) -> Result<ComplexMatrix> {
        self.check_targets(targets)?;
        let t_offs = self.target_offsets(targets);
        let rest_offs = self.rest_offsets(targets);
        let n = rest_offs.len();
        let mut rho = ComplexMatrix::zeros(n, n);
        for (r, &b1) in rest_offs.iter().enumerate() {
            for (c, &b2) in rest_offs.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for &off in &t_offs {
                    acc += self.amps[b1 + off] * self.amps[b2 + off].conj();
                }
                rho.set(r, c, acc);
            }
        }
        Ok(rho)
    }
}

/// Global-phase-insensitive state equality: `|<a|b>| >= 1 - tol`.
pub fn equal_up_to_phase(a: &QuditState, b: &QuditState, tol: f64) -> Result<bool> {
    let ov = a.inner(b)?;
    Ok(ov.norm() >= 1.0 - tol)
}
