//! Small dense helpers: Hermitian eigenvalues, trace distance, random unitaries.

use crate::matrix::ComplexMatrix;
use num_complex::Complex64;
use rand::Rng;

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi sweeps.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Vec<f64> {
    assert!(a.is_square(), "hermitian_eigenvalues needs a square matrix");
    let n = a.rows();
    let mut m = a.clone();
    let scale = m.max_abs().max(1.0);
    for _sweep in 0..80 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m.at(p, q).norm());
            }
        }
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.at(p, q);
                let beta = apq.norm();
                if beta <= 1e-300 {
                    continue;
                }
                let phase = apq / beta;
                let alpha = m.at(p, p).re;
                let gamma = m.at(q, q).re;
                let tau = (gamma - alpha) / (2.0 * beta);
                // Smaller root of t^2 - 2 tau t - 1 = 0 zeroes the pivot.
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Right update: M <- M V, with V[p,p]=c, V[p,q]=-s*phase,
                // V[q,p]=s*conj(phase), V[q,q]=c.
                for k in 0..n {
                    let mkp = m.at(k, p);
                    let mkq = m.at(k, q);
                    m.set(k, p, mkp * c + mkq * s * phase.conj());
                    m.set(k, q, -mkp * s * phase + mkq * c);
                }
                // Left update: M <- V† M.
                for k in 0..n {
                    let mpk = m.at(p, k);
                    let mqk = m.at(q, k);
                    m.set(p, k, mpk * c + mqk * s * phase);
                    m.set(q, k, -mpk * s * phase.conj() + mqk * c);
                }
            }
        }
    }
    (0..n).map(|i| m.at(i, i).re).collect()
}

/// Trace distance `0.5 * ||a - b||_1` between two Hermitian operators.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let d = a.sub(b);
    0.5 * hermitian_eigenvalues(&d).iter().map(|l| l.abs()).sum::<f64>()
}

/// Standard complex Gaussian sample (Box-Muller).
fn gaussian_complex(rng: &mut impl Rng) -> Complex64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (-2.0 * u1.ln()).sqrt();
    Complex64::new(r * u2.cos(), r * u2.sin())
}

/// Haar-distributed random unitary via Ginibre + modified Gram-Schmidt.
pub fn haar_unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| gaussian_complex(rng));
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| (0..n).map(|i| g.at(i, j)).collect()) // column views
        .collect();
    let mut diag_phase = vec![Complex64::new(1.0, 0.0); n];
    for j in 0..n {
        // Two orthogonalization passes for numerical stability.
        for _ in 0..2 {
            for k in 0..j {
                let prev = cols[k].clone();
                let proj: Complex64 = prev
                    .iter()
                    .zip(cols[j].iter())
                    .map(|(p, v)| p.conj() * v)
                    .sum();
                for (v, p) in cols[j].iter_mut().zip(prev.iter()) {
                    *v -= proj * p;
                }
            }
        }
        let norm = cols[j].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm > 1e-12, "degenerate Ginibre sample");
        for v in cols[j].iter_mut() {
            *v /= norm;
        }
        // Phase fix from the original diagonal for Haar correction.
        let d = g.at(j, j);
        if d.norm() > 1e-12 {
            diag_phase[j] = d / d.norm();
        }
    }
    ComplexMatrix::from_fn(n, n, |i, j| cols[j][i] * diag_phase[j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eigenvalues_of_pauli_x() {
        let x = ComplexMatrix::from_rows(&[
            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        ])
        .unwrap();
        let mut ev = hermitian_eigenvalues(&x);
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] + 1.0).abs() < 1e-12);
        assert!((ev[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_roundtrip_udu() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = haar_unitary(5, &mut rng);
        assert!(u.is_unitary(1e-10));
        let d = ComplexMatrix::diag(&[
            Complex64::new(-2.0, 0.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.25, 0.0),
            Complex64::new(3.0, 0.0),
        ]);
        let h = u.mul(&d).mul(&u.dagger());
        let mut ev = hermitian_eigenvalues(&h);
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in ev.iter().zip([-2.0, -0.5, 0.0, 1.25, 3.0]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn trace_distance_of_orthogonal_projectors() {
        let p0 = ComplexMatrix::diag(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let p1 = ComplexMatrix::diag(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert!((trace_distance(&p0, &p1) - 1.0).abs() < 1e-12);
    }
}
