//! Indefinite hermitian forms `[u, v] = (Bu, v)` induced by a Gram matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_len, inner, norm, null_space, Matrix, C64};
use crate::tol;

/// Sign class of a vector under the form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VectorClass {
    Positive,
    Negative,
    Neutral,
    ZeroVector,
}

/// A hermitian Gram matrix `B` and the form it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct GramForm {
    gram: Matrix,
    scale: f64,
}

impl GramForm {
    pub fn new(gram: Matrix) -> Result<Self> {
        gram.require_square("gram matrix")?;
        let scale = gram.frobenius_norm();
        let residual = gram.hermiticity_residual();
        if residual > tol::DEFAULT * scale {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self { gram, scale })
    }

    /// The Lorentz metric `diag(1, -1, -1, -1)`.
    pub fn lorentz() -> Self {
        Self::new(Matrix::diag_real(&[1.0, -1.0, -1.0, -1.0])).expect("diagonal is hermitian")
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    /// `|B|_F`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `[u, v] = (Bu, v)`.
    pub fn eval(&self, u: &[C64], v: &[C64]) -> Result<C64> {
        check_len(u, self.dim(), "u")?;
        check_len(v, self.dim(), "v")?;
        Ok(inner(&self.gram.mul_vec(u), v))
    }

    /// ZeroVector when `|x| <= tol`, Neutral when `|[x,x]| <= tol |B|_F |x|^2`,
    /// otherwise the sign of `Re [x,x]`.
    pub fn classify(&self, x: &[C64], tol: f64) -> Result<VectorClass> {
        let nx = norm(x);
        if nx <= tol {
            check_len(x, self.dim(), "x")?;
            return Ok(VectorClass::ZeroVector);
        }
        let q = self.eval(x, x)?;
        let band = tol * self.scale * nx * nx;
        if q.im.abs() > tol * (self.scale * nx * nx).max(1.0) {
            return Err(Error::ImaginaryResidual { value: q.im });
        }
        Ok(if q.re.abs() <= band {
            VectorClass::Neutral
        } else if q.re > 0.0 {
            VectorClass::Positive
        } else {
            VectorClass::Negative
        })
    }

    /// A neutral vector `x + t y` on the segment through a positive `x` and
    /// a negative `y`, taking the larger real root of
    /// `[x,x] + 2t Re[x,y] + t^2 [y,y] = 0`.
    pub fn find_neutral(&self, positive: &[C64], negative: &[C64]) -> Result<Vec<C64>> {
        if self.classify(positive, tol::NEUTRAL)? != VectorClass::Positive
            || self.classify(negative, tol::NEUTRAL)? != VectorClass::Negative
        {
            return Err(Error::NotIndefinitePair);
        }
        let r = self.eval(positive, positive)?.re;
        let q = self.eval(positive, negative)?.re;
        let p = self.eval(negative, negative)?.re;
        // p < 0 < r, so the discriminant is strictly positive.
        let disc = (q * q - p * r).sqrt();
        let s = -(q + q.signum() * disc);
        let (t1, t2) = if s == 0.0 { (disc / p, -disc / p) } else { (s / p, r / s) };
        let t = t1.max(t2);
        Ok(positive
            .iter()
            .zip(negative)
            .map(|(a, b)| a + b * t)
            .collect())
    }

    /// `|[u, v]| <= tol |B|_F |u| |v|`.
    pub fn q_orthogonal(&self, u: &[C64], v: &[C64], tol: f64) -> Result<bool> {
        Ok(self.eval(u, v)?.norm() <= tol * self.scale * norm(u) * norm(v))
    }

    /// Orthonormal basis of the vectors form-orthogonal to the whole space, i.e. `ker B`.
    pub fn isotropic_subspace(&self, tol: f64) -> Matrix {
        null_space(&self.gram, tol)
    }

    /// `|A^H B A - B|_F <= tol |B|_F`, i.e. `[Au, Av] = [u, v]` for all `u, v`.
    pub fn is_isometry(&self, a: &Matrix, tol: f64) -> Result<bool> {
        a.require_order(self.dim(), "isometry candidate")?;
        let pulled = &(&a.adjoint() * &self.gram) * a;
        Ok((&pulled - &self.gram).frobenius_norm() <= tol * self.scale)
    }
}

/// Lorentz boost mixing coordinates 0 and 1 with rapidity `phi`.
pub fn lorentz_boost(phi: f64) -> Matrix {
    let (ch, sh) = (phi.cosh(), phi.sinh());
    let mut m = Matrix::identity(4);
    m[(0, 0)] = C64::new(ch, 0.0);
    m[(0, 1)] = C64::new(sh, 0.0);
    m[(1, 0)] = C64::new(sh, 0.0);
    m[(1, 1)] = C64::new(ch, 0.0);
    m
}
