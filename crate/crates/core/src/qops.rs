//! Generalized Pauli and Fourier operators, and the teleportation primitive.

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::state::{MeasurementBranch, QuditState};
use num_complex::Complex64;

fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// Cyclic shift `X = sum_k |(k-1) mod N><k|`.
pub fn gen_pauli_x(n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension("pauli X with N=0".into()));
    }
    let mut m = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        m.set((k + n - 1) % n, k, Complex64::new(1.0, 0.0));
    }
    Ok(m)
}

/// Clock phase `Z = diag(e^{2 pi i k / N})`.
pub fn gen_pauli_z(n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension("pauli Z with N=0".into()));
    }
    let phases: Vec<Complex64> = (0..n)
        .map(|k| cis(std::f64::consts::TAU * k as f64 / n as f64))
        .collect();
    Ok(ComplexMatrix::diag(&phases))
}

/// `X^p Z^q` on an `n`-dimensional space.
pub fn gen_pauli(n: usize, p: usize, q: usize) -> Result<ComplexMatrix> {
    Ok(gen_pauli_x(n)?.pow(p % n.max(1)).mul(&gen_pauli_z(n)?.pow(q % n.max(1))))
}

/// Discrete Fourier operator with the convention `F X F† = Z`, i.e.
/// `F[j,k] = e^{-2 pi i j k / N} / sqrt(N)`.
pub fn fourier(n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension("fourier with N=0".into()));
    }
    let s = 1.0 / (n as f64).sqrt();
    Ok(ComplexMatrix::from_fn(n, n, |j, k| {
        cis(-std::f64::consts::TAU * (j * k) as f64 / n as f64) * s
    }))
}

/// Generalized Bell basis on a `d x d` pair: column `p*d + q` is
/// `(X^p Z^q (x) I) |Phi_d>`.
pub fn bell_basis(d: usize) -> Result<ComplexMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension("bell basis needs d >= 2".into()));
    }
    let scale = 1.0 / (d as f64).sqrt();
    let mut b = ComplexMatrix::zeros(d * d, d * d);
    for p in 0..d {
        for q in 0..d {
            let col = p * d + q;
            for j in 0..d {
                // (X^p Z^q)|j> = omega^{qj} |j - p>
                let row = ((j + d - p) % d) + d * j;
                b.set(
                    row,
                    col,
                    cis(std::f64::consts::TAU * (q * j) as f64 / d as f64) * scale,
                );
            }
        }
    }
    Ok(b)
}

/// Teleports a single d-dimensional input through `|Phi_d>` and applies the
/// Pauli correction on every branch, so all `d^2` post-states equal the input
/// up to global phase.
pub fn teleport(d: usize, input: &QuditState) -> Result<Vec<MeasurementBranch>> {
    if d < 2 {
        return Err(Error::InvalidDimension("teleport needs d >= 2".into()));
    }
    if input.dims() != [d] {
        return Err(Error::DimensionMismatch(format!(
            "teleport input must be a single subsystem of dimension {d}"
        )));
    }
    let joint = input.kron(&QuditState::max_entangled(d)?)?;
    let basis = bell_basis(d)?;
    let mut out = Vec::new();
    for br in joint.measure(&[0, 1], crate::state::Basis::Matrix(&basis))? {
        let p = br.outcome / d;
        let q = br.outcome % d;
        let corr = gen_pauli(d, p, q)?;
        let corrected = br.post_state.apply_on(&corr, &[0])?;
        out.push(MeasurementBranch {
            outcome: br.outcome,
            probability: br.probability,
            post_state: corrected,
        });
    }
    Ok(out)
}

/// SUM gate `|a,b> -> |a, a+b mod d>` on a two-qudit register (subsystem 0 is
/// the control and varies fastest).
pub fn sum_gate(d: usize) -> Result<ComplexMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension("sum gate needs d >= 2".into()));
    }
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            m.set(a + d * ((a + b) % d), a + d * b, Complex64::new(1.0, 0.0));
        }
    }
    Ok(m)
}

/// A diagonal Clifford phase gate: `diag(1, i)` for d=2, else
/// `S|k> = omega^{k(k-1)/2} |k>`.
pub fn phase_gate(d: usize) -> Result<ComplexMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension("phase gate needs d >= 2".into()));
    }
    if d == 2 {
        return Ok(ComplexMatrix::diag(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ]));
    }
    let phases: Vec<Complex64> = (0..d)
        .map(|k| cis(std::f64::consts::TAU * (k * k.saturating_sub(1) / 2) as f64 / d as f64))
        .collect();
    Ok(ComplexMatrix::diag(&phases))
}
