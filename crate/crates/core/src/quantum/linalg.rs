//! Dense complex linear algebra helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::QuantumError;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn zeros(d: usize) -> CMatrix {
    CMatrix::zeros(d, d)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// `(frobenius, operator)` norms.
pub fn matrix_norms(m: &CMatrix) -> Result<(f64, f64), QuantumError> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(QuantumError::NonFinite);
    }
    Ok((frobenius(m), operator_norm(m)))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.adjoint())) <= tol
}

pub fn is_projector(m: &CMatrix, tol: f64) -> bool {
    is_hermitian(m, tol) && max_abs(&(m * m - m)) <= tol
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Eigenvalues (ascending order not guaranteed) and eigenvectors of a
/// Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    (eig.eigenvalues.iter().cloned().collect(), eig.eigenvectors)
}

fn from_spectrum(vals: &[C64], vecs: &CMatrix) -> CMatrix {
    let mut scaled = vecs.clone();
    for (k, v) in vals.iter().enumerate() {
        for r in 0..scaled.nrows() {
            scaled[(r, k)] *= v;
        }
    }
    scaled * vecs.adjoint()
}

/// Square root of a positive semidefinite matrix. Eigenvalues in
/// `[-1e-10, 0)` are clamped to zero.
pub fn psd_sqrt(rho: &CMatrix) -> Result<CMatrix, QuantumError> {
    let (vals, vecs) = hermitian_eigen(rho);
    let mut roots = Vec::with_capacity(vals.len());
    for &v in &vals {
        if v < -1e-10 {
            return Err(QuantumError::Numerical(format!(
                "eigenvalue {v:e} below the PSD floor"
            )));
        }
        roots.push(C64::new(v.max(0.0).sqrt(), 0.0));
    }
    Ok(from_spectrum(&roots, &vecs))
}

/// `exp(i t H)` for Hermitian `H`.
pub fn unitary_exp(h: &CMatrix, t: f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(h);
    let phases: Vec<C64> = vals.iter().map(|&v| C64::from_polar(1.0, t * v)).collect();
    from_spectrum(&phases, &vecs)
}

/// `psi` reshaped to a `d_a x d_b` matrix, `M[a, b] = psi[a * d_b + b]`.
pub fn psi_matrix(psi: &CVector, d_a: usize, d_b: usize) -> CMatrix {
    CMatrix::from_fn(d_a, d_b, |a, b| psi[a * d_b + b])
}

/// `Tr_A |psi><psi|` from the reshaped state.
pub fn reduced_b(m: &CMatrix) -> CMatrix {
    m.transpose() * m.map(|z| z.conj())
}

/// `Tr_B |psi><psi|` from the reshaped state.
pub fn reduced_a(m: &CMatrix) -> CMatrix {
    m * m.adjoint()
}

/// `<psi| P (x) Q |psi>` for the reshaped state `m`.
pub fn expectation(m: &CMatrix, p: &CMatrix, q: &CMatrix) -> C64 {
    let z = m.adjoint() * p * m;
    z.component_mul(q).sum()
}

/// Isometry `W` in the polar decomposition `K = (K K^dagger)^{1/2} W`.
pub fn polar_isometry(k: &CMatrix) -> CMatrix {
    let svd = k.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    u * v_t
}

pub fn diag_projector(d: usize, on: impl IntoIterator<Item = usize>) -> CMatrix {
    let mut p = zeros(d);
    for k in on {
        p[(k, k)] = C64::new(1.0, 0.0);
    }
    p
}

/// Kronecker product, row index `a * dim(b) + b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_norms() {
        let (f, o) = matrix_norms(&identity(4)).unwrap();
        assert!((f - 2.0).abs() < 1e-12 && (o - 1.0).abs() < 1e-12);
        let mut bad = identity(2);
        bad[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert_eq!(matrix_norms(&bad).unwrap_err(), QuantumError::NonFinite);
    }

    #[test]
    fn sqrt_and_exp() {
        let rho = CMatrix::from_row_slice(2, 2, &[c(0.5), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(0.5)]);
        let s = psd_sqrt(&rho).unwrap();
        assert!(max_abs(&(&s * &s - &rho)) < 1e-12);
        let u = unitary_exp(&rho, 0.7);
        assert!(max_abs(&(&u * u.adjoint() - identity(2))) < 1e-12);
        let neg = CMatrix::from_row_slice(1, 1, &[c(-1e-3)]);
        assert!(psd_sqrt(&neg).is_err());
        let tiny = CMatrix::from_row_slice(1, 1, &[c(-1e-12)]);
        assert_eq!(psd_sqrt(&tiny).unwrap()[(0, 0)], c(0.0));
    }

    #[test]
    fn expectation_matches_kron() {
        let psi = CVector::from_vec(vec![c(0.5), C64::new(0.0, 0.5), c(-0.5), c(0.5)]);
        let p = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        let q = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.5), c(0.5), c(0.5)]);
        let direct = (psi.adjoint() * kron(&p, &q) * &psi)[(0, 0)];
        let m = psi_matrix(&psi, 2, 2);
        assert!((expectation(&m, &p, &q) - direct).norm() < 1e-12);
        let rho = reduced_b(&m);
        let direct_rho = (0..2)
            .map(|a| {
                let row = CMatrix::from_fn(2, 1, |b, _| psi[a * 2 + b]);
                &row * row.adjoint()
            })
            .fold(zeros(2), |acc, x| acc + x);
        assert!(max_abs(&(rho - direct_rho)) < 1e-12);
    }
}
