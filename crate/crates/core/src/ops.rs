//! Operators relative to a fundamental symmetry `J` given in majorant
//! (euclidean) coordinates, where the Krein form is `[x, y] = (Jx, y)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{check_len, inner, Matrix, C64};
use crate::random::Stream;
use crate::tol;

/// Checks that `j` is a hermitian involution and returns its order.
pub fn validate_symmetry(j: &Matrix) -> Result<usize> {
    let n = j.require_square("symmetry")?;
    let herm = j.hermiticity_residual();
    let inv = (&(j * j) - &Matrix::identity(n)).frobenius_norm();
    let residual = herm.max(inv);
    if residual > tol::DEFAULT * (n.max(1) as f64).sqrt() {
        return Err(Error::InvalidSymmetry { residual });
    }
    Ok(n)
}

/// `A^+ = J A^H J`.
pub fn krein_adjoint(a: &Matrix, j: &Matrix) -> Result<Matrix> {
    let n = validate_symmetry(j)?;
    a.require_order(n, "operator")?;
    Ok(&(j * &a.adjoint()) * j)
}

fn ja_residual(a: &Matrix, j: &Matrix, sign: f64) -> Result<f64> {
    let n = j.require_square("symmetry")?;
    a.require_order(n, "operator")?;
    let ja = j * a;
    Ok((&ja - &ja.adjoint().scale_real(sign)).frobenius_norm())
}

/// `|JA - (JA)^H| <= tol |A|`.
pub fn is_j_selfadjoint(a: &Matrix, j: &Matrix, tol: f64) -> Result<bool> {
    Ok(ja_residual(a, j, 1.0)? <= tol * a.frobenius_norm())
}

/// `|JA + (JA)^H| <= tol |A|`.
pub fn is_j_skew(a: &Matrix, j: &Matrix, tol: f64) -> Result<bool> {
    Ok(ja_residual(a, j, -1.0)? <= tol * a.frobenius_norm())
}

pub use crate::linalg::{anticommutator, commutator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expectation {
    /// `(JA phi, phi)`; imaginary part zeroed when `A` is J-self-adjoint.
    pub value: C64,
    pub j_selfadjoint: bool,
    /// Imaginary part discarded for a J-self-adjoint operator.
    pub imaginary_residual: f64,
}

/// Checks `(phi, phi) = 1`.
pub fn require_unit(phi: &[C64]) -> Result<()> {
    let norm_sq = inner(phi, phi).re;
    if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > tol::DEFAULT {
        return Err(Error::NotNormalized { norm_sq });
    }
    Ok(())
}

/// `(JA phi, phi)` for a unit vector `phi`.
pub fn expectation(a: &Matrix, j: &Matrix, phi: &[C64]) -> Result<Expectation> {
    let n = j.require_square("symmetry")?;
    a.require_order(n, "operator")?;
    check_len(phi, n, "state")?;
    require_unit(phi)?;
    let value = inner(&j.mul_vec(&a.mul_vec(phi)), phi);
    let j_selfadjoint = is_j_selfadjoint(a, j, tol::DEFAULT)?;
    if !j_selfadjoint {
        return Ok(Expectation { value, j_selfadjoint, imaginary_residual: 0.0 });
    }
    let imaginary_residual = value.im.abs();
    if imaginary_residual > tol::DEFAULT * a.frobenius_norm().max(1.0) {
        return Err(Error::ImaginaryResidual { value: value.im });
    }
    Ok(Expectation { value: C64::new(value.re, 0.0), j_selfadjoint, imaginary_residual })
}

/// An operator together with the symmetry it is measured against.
#[derive(Debug, Clone)]
pub struct KreinOperator {
    pub matrix: Matrix,
    pub symmetry: Matrix,
}

impl KreinOperator {
    pub fn new(matrix: Matrix, symmetry: Matrix) -> Result<Self> {
        let n = validate_symmetry(&symmetry)?;
        matrix.require_order(n, "operator")?;
        Ok(Self { matrix, symmetry })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn adjoint(&self) -> Self {
        let matrix = &(&self.symmetry * &self.matrix.adjoint()) * &self.symmetry;
        Self { matrix, symmetry: self.symmetry.clone() }
    }

    pub fn is_j_selfadjoint(&self, tol: f64) -> bool {
        is_j_selfadjoint(&self.matrix, &self.symmetry, tol).expect("validated operator")
    }

    pub fn is_j_skew(&self, tol: f64) -> bool {
        is_j_skew(&self.matrix, &self.symmetry, tol).expect("validated operator")
    }

    pub fn expectation(&self, phi: &[C64]) -> Result<Expectation> {
        expectation(&self.matrix, &self.symmetry, phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomSpec {
    pub seed: u64,
    pub dim: usize,
    pub scale: f64,
}

impl RandomSpec {
    pub fn new(seed: u64, dim: usize, scale: f64) -> Result<Self> {
        let spec = Self { seed, dim, scale };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {}", self.scale)));
        }
        Ok(())
    }

    /// Same dimension and scale, seed perturbed by `label`.
    pub fn derive(&self, label: &str) -> Self {
        Self { seed: crate::random::derive_seed(self.seed, label), ..*self }
    }
}

/// Seeded random hermitian matrix of order `spec.dim`.
pub fn random_hermitian(spec: &RandomSpec) -> Result<Matrix> {
    spec.validate()?;
    Ok(Stream::new(spec.seed, "hermitian").hermitian(spec.dim, spec.scale))
}

/// `A = J H` with `H` random hermitian, so `JA = H` is hermitian.
pub fn random_j_selfadjoint(spec: &RandomSpec, j: &Matrix) -> Result<Matrix> {
    let n = validate_symmetry(j)?;
    if n != spec.dim {
        return Err(Error::DimensionMismatch(format!(
            "symmetry has order {n}, spec asks for {}",
            spec.dim
        )));
    }
    Ok(j * &random_hermitian(spec)?)
}

/// `J = U diag(signs) U^H`, symmetrized to remove rounding asymmetry.
pub fn symmetry_from_unitary(u: &Matrix, signs: &[f64]) -> Result<Matrix> {
    let n = u.require_square("unitary")?;
    if signs.len() != n {
        return Err(Error::DimensionMismatch(format!("{} signs for order {n}", signs.len())));
    }
    if let Some(s) = signs.iter().find(|s| s.abs() != 1.0) {
        return Err(Error::InvalidArgument(format!("sign {s} is not +1 or -1")));
    }
    Ok((&(u * &Matrix::diag_real(signs)) * &u.adjoint()).hermitian_part())
}

/// Random fundamental symmetry with the given sign pattern.
pub fn random_symmetry_with_signs(spec: &RandomSpec, signs: &[f64]) -> Result<Matrix> {
    spec.validate()?;
    let u = Stream::new(spec.seed, "symmetry-unitary").unitary(spec.dim);
    symmetry_from_unitary(&u, signs)
}

/// Random fundamental symmetry with a random sign pattern.
pub fn random_symmetry(spec: &RandomSpec) -> Result<Matrix> {
    spec.validate()?;
    let mut stream = Stream::new(spec.seed, "symmetry-signs");
    let signs: Vec<f64> = (0..spec.dim).map(|_| stream.sign()).collect();
    random_symmetry_with_signs(spec, &signs)
}
