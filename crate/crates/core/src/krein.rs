//! Canonical decompositions `V = H+ [+] H-` of a non-degenerate Gram form,
//! their projectors, the fundamental symmetry `J = P+ - P-`, and the
//! majorant inner product `<u, v> = [P+u, P+v] - [P-u, P-v] = [Ju, v]`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::{GramForm, VectorClass};
use crate::linalg::{check_len, condition_number, hermitian_eigen, inner, Lu, Matrix, C64};
use crate::random::Stream;
use crate::tol;

/// How a decomposition was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DecompositionSource {
    /// Eigenprojectors of `B` (euclidean-orthogonal).
    Spectral,
    /// Oblique projectors from caller-supplied subspace bases.
    Basis,
}

#[derive(Debug, Clone)]
pub struct CanonicalDecomposition {
    pub p_plus: Matrix,
    pub p_minus: Matrix,
    pub j: Matrix,
    /// Columns span `H+`.
    pub basis_pos: Matrix,
    /// Columns span `H-`.
    pub basis_neg: Matrix,
    pub gram: GramForm,
    pub source: DecompositionSource,
}

/// Residuals of the structural identities every decomposition must satisfy.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecompositionResiduals {
    pub resolution_of_identity: f64,
    pub idempotent_plus: f64,
    pub idempotent_minus: f64,
    pub cross_products: f64,
    pub involution: f64,
    pub bj_hermitian: f64,
    pub bp_plus_hermitian: f64,
    pub bp_minus_hermitian: f64,
    /// Largest `|[h+, h-]|` over basis columns, relative to `|B| |h+| |h-|`.
    pub subspace_cross_form: f64,
}

impl DecompositionResiduals {
    pub fn max(&self) -> f64 {
        [
            self.resolution_of_identity,
            self.idempotent_plus,
            self.idempotent_minus,
            self.cross_products,
            self.involution,
            self.bj_hermitian,
            self.bp_plus_hermitian,
            self.bp_minus_hermitian,
            self.subspace_cross_form,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Spectral canonical decomposition: `H+` and `H-` are spanned by the
/// eigenvectors of `B` with positive and negative eigenvalues.
pub fn decompose_spectral(form: &GramForm) -> Result<CanonicalDecomposition> {
    let eig = hermitian_eigen(form.gram())?;
    let threshold = tol::DEFAULT * form.scale();
    let kernel_dim = eig.values.iter().filter(|v| v.abs() <= threshold).count();
    if kernel_dim > 0 {
        return Err(Error::DegenerateForm { kernel_dim });
    }
    let n = form.dim();
    let pos: Vec<usize> = (0..n).filter(|&i| eig.values[i] > 0.0).collect();
    let neg: Vec<usize> = (0..n).filter(|&i| eig.values[i] < 0.0).collect();
    let basis_pos = eig.vectors.select_columns(&pos);
    let basis_neg = eig.vectors.select_columns(&neg);
    let p_plus = &basis_pos * &basis_pos.adjoint();
    let p_minus = &basis_neg * &basis_neg.adjoint();
    let j = &p_plus - &p_minus;
    Ok(CanonicalDecomposition {
        p_plus,
        p_minus,
        j,
        basis_pos,
        basis_neg,
        gram: form.clone(),
        source: DecompositionSource::Spectral,
    })
}

/// Canonical decomposition from explicit bases of a positive and a negative
/// subspace. The projectors are oblique in general: with `S = [pos | neg]`,
/// `P+ = S diag(I, 0) S^-1`.
pub fn decompose_from_basis(
    form: &GramForm,
    basis_pos: &Matrix,
    basis_neg: &Matrix,
) -> Result<CanonicalDecomposition> {
    let n = form.dim();
    if basis_pos.rows() != n || basis_neg.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "basis vectors must have length {n}"
        )));
    }
    let k = basis_pos.cols();
    if k + basis_neg.cols() != n {
        return Err(Error::InvalidBasis(format!(
            "{} + {} vectors cannot span a space of dimension {n}",
            k,
            basis_neg.cols()
        )));
    }
    for (cols, want, label) in [
        (basis_pos, VectorClass::Positive, "positive"),
        (basis_neg, VectorClass::Negative, "negative"),
    ] {
        for (i, c) in cols.columns().iter().enumerate() {
            let class = form.classify(c, tol::NEUTRAL)?;
            if class != want {
                return Err(Error::InvalidBasis(format!(
                    "{label} basis vector {i} classifies as {class:?}"
                )));
            }
        }
        definite_block(form, cols, want == VectorClass::Positive)
            .map_err(|msg| Error::InvalidBasis(format!("{label} span: {msg}")))?;
    }
    for (i, p) in basis_pos.columns().iter().enumerate() {
        for (l, m) in basis_neg.columns().iter().enumerate() {
            if !form.q_orthogonal(p, m, tol::DEFAULT)? {
                return Err(Error::InvalidBasis(format!(
                    "positive vector {i} and negative vector {l} are not form-orthogonal"
                )));
            }
        }
    }
    let s = basis_pos.hstack(basis_neg)?;
    let condition = condition_number(&s);
    if condition > tol::CONDITION_LIMIT {
        return Err(Error::InvalidBasis(format!(
            "basis is numerically dependent (condition {condition:.3e})"
        )));
    }
    let s_inv = Lu::factor(&s)?.inverse();
    let selector = |positive: bool| {
        Matrix::diag_real(
            &(0..n)
                .map(|i| if (i < k) == positive { 1.0 } else { 0.0 })
                .collect::<Vec<_>>(),
        )
    };
    let p_plus = &(&s * &selector(true)) * &s_inv;
    let p_minus = &(&s * &selector(false)) * &s_inv;
    let j = &p_plus - &p_minus;
    Ok(CanonicalDecomposition {
        p_plus,
        p_minus,
        j,
        basis_pos: basis_pos.clone(),
        basis_neg: basis_neg.clone(),
        gram: form.clone(),
        source: DecompositionSource::Basis,
    })
}

/// Checks that the form restricted to `span(cols)` is definite with the given sign.
fn definite_block(form: &GramForm, cols: &Matrix, positive: bool) -> std::result::Result<(), String> {
    if cols.cols() == 0 {
        return Ok(());
    }
    let block = &(&cols.adjoint() * form.gram()) * cols;
    let block = if positive { block } else { -&block };
    let eig = hermitian_eigen(&block.hermitian_part()).map_err(|e| e.to_string())?;
    let smallest = *eig.values.last().expect("non-empty block");
    if smallest <= tol::DEFAULT * block.frobenius_norm() {
        return Err(format!("restricted form is not definite (eigenvalue {smallest:.3e})"));
    }
    Ok(())
}

impl CanonicalDecomposition {
    pub fn dim(&self) -> usize {
        self.gram.dim()
    }

    /// `(dim H+, dim H-)`.
    pub fn signature(&self) -> (usize, usize) {
        (self.basis_pos.cols(), self.basis_neg.cols())
    }

    /// `B J`, the Gram matrix of the majorant: `<u, v> = (BJu, v)`.
    pub fn majorant_gram(&self) -> Matrix {
        self.gram.gram() * &self.j
    }

    /// `[P+u, P+v] - [P-u, P-v]`.
    pub fn majorant_inner(&self, u: &[C64], v: &[C64]) -> Result<C64> {
        let n = self.dim();
        check_len(u, n, "u")?;
        check_len(v, n, "v")?;
        let (pu, pv) = (self.p_plus.mul_vec(u), self.p_plus.mul_vec(v));
        let (mu, mv) = (self.p_minus.mul_vec(u), self.p_minus.mul_vec(v));
        Ok(self.gram.eval(&pu, &pv)? - self.gram.eval(&mu, &mv)?)
    }

    pub fn majorant_norm(&self, u: &[C64]) -> Result<f64> {
        Ok(self.majorant_inner(u, u)?.re.max(0.0).sqrt())
    }

    pub fn majorant(&self) -> MajorantMetric<'_> {
        MajorantMetric { decomposition: self }
    }

    pub fn residuals(&self) -> DecompositionResiduals {
        let n = self.dim();
        let id = Matrix::identity(n);
        let b = self.gram.gram();
        let bs = self.gram.scale().max(f64::MIN_POSITIVE);
        let herm = |m: &Matrix| m.hermiticity_residual() / (bs * (1.0 + self.j.frobenius_norm()));
        let mut cross: f64 = 0.0;
        for p in self.basis_pos.columns() {
            for m in self.basis_neg.columns() {
                let denom = bs * crate::linalg::norm(&p) * crate::linalg::norm(&m);
                let value = self.gram.eval(&p, &m).map(|z| z.norm()).unwrap_or(f64::INFINITY);
                cross = cross.max(value / denom);
            }
        }
        DecompositionResiduals {
            resolution_of_identity: (&(&self.p_plus + &self.p_minus) - &id).frobenius_norm(),
            idempotent_plus: (&(&self.p_plus * &self.p_plus) - &self.p_plus).frobenius_norm(),
            idempotent_minus: (&(&self.p_minus * &self.p_minus) - &self.p_minus).frobenius_norm(),
            cross_products: (&self.p_plus * &self.p_minus)
                .frobenius_norm()
                .max((&self.p_minus * &self.p_plus).frobenius_norm()),
            involution: (&(&self.j * &self.j) - &id).frobenius_norm(),
            bj_hermitian: herm(&(b * &self.j)),
            bp_plus_hermitian: herm(&(b * &self.p_plus)),
            bp_minus_hermitian: herm(&(b * &self.p_minus)),
            subspace_cross_form: cross,
        }
    }

    /// Residual report for the fundamental-symmetry axioms, each labeled
    /// with the metric it is measured in.
    pub fn verify_symmetry_axioms(&self) -> SymmetryReport {
        let n = self.dim();
        let b = self.gram.gram();
        let j = &self.j;
        let j_scale = j.frobenius_norm().max(1.0);
        let b_scale = self.gram.scale().max(f64::MIN_POSITIVE);
        let bj = self.majorant_gram();
        let mut checks = Vec::new();
        let mut push = |axiom, metric, residual: f64, threshold: f64, expect_small: bool| {
            let passed = if expect_small { residual <= threshold } else { residual > threshold };
            checks.push(AxiomCheck { axiom, metric, residual, threshold, passed });
        };

        let j2 = (&(j * j) - &Matrix::identity(n)).frobenius_norm();
        push(Axiom::Involution, Metric::Euclidean, j2, tol::DEFAULT * j_scale * j_scale, true);

        let bj_res = bj.hermiticity_residual();
        push(Axiom::FormHermitianBj, Metric::Form, bj_res, tol::DEFAULT * b_scale * j_scale, true);

        let min_eig = if n == 0 {
            f64::INFINITY
        } else {
            hermitian_eigen(&bj.hermitian_part())
                .map(|e| *e.values.last().expect("n > 0"))
                .unwrap_or(f64::NEG_INFINITY)
        };
        push(Axiom::MajorantPositive, Metric::Majorant, min_eig, tol::DEFAULT * bj.frobenius_norm(), false);

        let mut stream = Stream::new(0x5eed, "symmetry-axioms");
        let (mut iso, mut form_sym, mut maj_sym) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..16 {
            let u = stream.vector(n);
            let v = stream.vector(n);
            let ju = j.mul_vec(&u);
            let jv = j.mul_vec(&v);
            let maj = |x: &[C64], y: &[C64]| inner(&bj.mul_vec(x), y);
            let nu = maj(&u, &u).re;
            let nv = maj(&v, &v).re.max(0.0);
            if nu > 0.0 {
                iso = iso.max((maj(&ju, &ju).re - nu).abs() / nu);
            }
            let uv_scale = crate::linalg::norm(&u) * crate::linalg::norm(&v);
            let fs = (inner(&b.mul_vec(&ju), &v) - inner(&b.mul_vec(&u), &jv)).norm();
            form_sym = form_sym.max(fs / (b_scale * j_scale * uv_scale));
            let ms = (maj(&ju, &v) - maj(&u, &jv)).norm();
            maj_sym = maj_sym.max(ms / ((nu.max(0.0) * nv).sqrt() * j_scale * j_scale).max(f64::MIN_POSITIVE));
        }
        push(Axiom::MajorantIsometry, Metric::Majorant, iso, tol::DEFAULT * j_scale * j_scale, true);
        push(Axiom::FormSymmetric, Metric::Form, form_sym, tol::DEFAULT, true);
        push(Axiom::MajorantSymmetric, Metric::Majorant, maj_sym, tol::DEFAULT, true);

        let eh = j.hermiticity_residual();
        push(Axiom::EuclideanHermitian, Metric::Euclidean, eh, tol::DEFAULT * j_scale, true);

        SymmetryReport { checks }
    }
}

/// The majorant `<u, v> = [Ju, v]` attached to a decomposition.
#[derive(Debug, Clone, Copy)]
pub struct MajorantMetric<'a> {
    pub decomposition: &'a CanonicalDecomposition,
}

impl MajorantMetric<'_> {
    pub fn inner(&self, u: &[C64], v: &[C64]) -> Result<C64> {
        self.decomposition.majorant_inner(u, v)
    }

    /// `[Ju, v]`, the same value through the symmetry instead of the projectors.
    pub fn inner_via_symmetry(&self, u: &[C64], v: &[C64]) -> Result<C64> {
        let ju = self.decomposition.j.mul_vec(u);
        self.decomposition.gram.eval(&ju, v)
    }

    pub fn norm(&self, u: &[C64]) -> Result<f64> {
        self.decomposition.majorant_norm(u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axiom {
    /// `J^2 = I`.
    Involution,
    /// `BJ` hermitian, equivalently `[Ju, v] = [u, Jv]`.
    FormHermitianBj,
    /// `<u, u> > 0`: smallest eigenvalue of `BJ`.
    MajorantPositive,
    /// `|Ju| = |u|` in the majorant norm.
    MajorantIsometry,
    /// `[Ju, v] = [u, Jv]` on sampled vectors.
    FormSymmetric,
    /// `<Ju, v> = <u, Jv>` on sampled vectors.
    MajorantSymmetric,
    /// `J = J^H` in ambient coordinates; fails for oblique decompositions.
    EuclideanHermitian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Metric {
    Euclidean,
    Form,
    Majorant,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub metric: Metric,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub checks: Vec<AxiomCheck>,
}

impl SymmetryReport {
    pub fn get(&self, axiom: Axiom) -> &AxiomCheck {
        self.checks
            .iter()
            .find(|c| c.axiom == axiom)
            .expect("every axiom is checked")
    }

    pub fn passed(&self, axiom: Axiom) -> bool {
        self.get(axiom).passed
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}
