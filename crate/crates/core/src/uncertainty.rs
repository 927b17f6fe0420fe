//! J-standard deviations and uncertainty relations for operators on a space
//! with fundamental symmetry `J` (ambient coordinates are the majorant).
//!
//! Every verifier reports `lhs`, `rhs` and `margin = lhs - rhs`; a relation
//! passes when `margin >= -1e-8 (1 + |rhs|)`. Relations that assume a
//! commutation rule first measure how far the inputs are from it and refuse
//! to judge the inequality above the gate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{anticommutator, check_len, commutator, inner, norm, Matrix, C64};
use crate::ops::{is_j_selfadjoint, require_unit, validate_symmetry};
use crate::tol;

/// A state normalized in the ambient inner product, `(phi, phi) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    phi: Vec<C64>,
}

impl StateVector {
    pub fn new(phi: Vec<C64>) -> Result<Self> {
        require_unit(&phi)?;
        Ok(Self { phi })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(v: &[C64]) -> Result<Self> {
        let n = norm(v);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NotNormalized { norm_sq: n * n });
        }
        Self::new(v.iter().map(|z| z / n).collect())
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.phi
    }

    pub fn dim(&self) -> usize {
        self.phi.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationId {
    /// `sigma_J^2(A) sigma_J^2(B) >=` the Krein form of Schrodinger's bound.
    SchrodingerKrein,
    /// `[A,B] = aJ`, J-self-adjoint `A, B`, deviation `sigma_J`.
    AjThm72,
    /// `[A,B] = aJ`, J-self-adjoint `A, B`, deviation shifted by `Re (A phi, phi)`.
    AjThm73,
    /// `[A,B] = aJ`, hermitian `A, B`, ordinary standard deviation.
    AjThm74,
    /// `[A,B] = a(I + beta B^2)` (or `a(I + beta B^H B)`), `[J,A] = [J,B] = 0`.
    GupKrein,
    /// The previous relation with `J = I`.
    GupHilbert,
    /// `sigma(A) sigma(B) >= |([A,B] phi, phi)| / 2`.
    RobertsonHilbert,
    /// `sigma^2(A) sigma^2(B) >=` Schrodinger's bound.
    SchrodingerHilbert,
}

impl RelationId {
    pub const ALL: [RelationId; 8] = [
        RelationId::SchrodingerKrein,
        RelationId::AjThm72,
        RelationId::AjThm73,
        RelationId::AjThm74,
        RelationId::GupKrein,
        RelationId::GupHilbert,
        RelationId::RobertsonHilbert,
        RelationId::SchrodingerHilbert,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationId::SchrodingerKrein => "schrodinger-krein",
            RelationId::AjThm72 => "aj-thm72",
            RelationId::AjThm73 => "aj-thm73",
            RelationId::AjThm74 => "aj-thm74",
            RelationId::GupKrein => "gup-krein",
            RelationId::GupHilbert => "gup-hilbert",
            RelationId::RobertsonHilbert => "robertson-hilbert",
            RelationId::SchrodingerHilbert => "schrodinger-hilbert",
        }
    }

    pub fn needs_commutator_spec(self) -> bool {
        matches!(
            self,
            RelationId::AjThm72 | RelationId::AjThm73 | RelationId::AjThm74 | RelationId::GupKrein | RelationId::GupHilbert
        )
    }

    /// Relations measured with `J = I` whatever symmetry is supplied.
    pub fn is_hilbert(self) -> bool {
        matches!(self, RelationId::GupHilbert | RelationId::RobertsonHilbert | RelationId::SchrodingerHilbert)
    }
}

impl std::fmt::Display for RelationId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RelationId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RelationId::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown relation '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommutatorForm {
    /// `[A,B] = aJ`.
    #[serde(rename = "aJ")]
    AJ,
    /// `[A,B] = a(I + beta B^2)`.
    #[serde(rename = "aI_plus_beta_B2")]
    AIPlusBetaB2,
    /// `[A,B] = a(I + beta B^H B)`.
    #[serde(rename = "aI_plus_beta_BstarB")]
    AIPlusBetaBstarB,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorSpec {
    pub a: C64,
    pub beta: f64,
    pub form: CommutatorForm,
}

impl CommutatorSpec {
    pub fn new(a: C64, beta: f64, form: CommutatorForm) -> Result<Self> {
        let spec = Self { a, beta, form };
        spec.validate()?;
        Ok(spec)
    }

    /// `[A,B] = i a_im J`.
    pub fn aj(a_im: f64) -> Self {
        Self { a: C64::new(0.0, a_im), beta: 0.0, form: CommutatorForm::AJ }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.beta.is_finite()) {
            return Err(Error::InvalidCommutatorSpec("a and beta must be finite".into()));
        }
        if self.a.re.abs() > 1e-12 {
            return Err(Error::InvalidCommutatorSpec(format!(
                "a must be purely imaginary, got real part {}",
                self.a.re
            )));
        }
        Ok(())
    }

    /// The commutator the hypothesis prescribes.
    pub fn target(&self, b: &Matrix, j: &Matrix) -> Matrix {
        let n = b.rows();
        match self.form {
            CommutatorForm::AJ => j.scale(self.a),
            CommutatorForm::AIPlusBetaB2 => {
                (&Matrix::identity(n) + &(b * b).scale_real(self.beta)).scale(self.a)
            }
            CommutatorForm::AIPlusBetaBstarB => {
                (&Matrix::identity(n) + &(&b.adjoint() * b).scale_real(self.beta)).scale(self.a)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "FAIL-HYPOTHESIS")]
    FailHypothesis,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertaintyReport {
    pub relation: RelationId,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    /// The shift subtracted from `A` in its deviation.
    pub shift_a: f64,
    /// The shift subtracted from `B` in its deviation.
    pub shift_b: f64,
    pub hypothesis_residual: f64,
    /// `(J phi, phi)`; zero for a neutral state.
    pub jphi_phi: f64,
    /// `|(J phi, phi)| <= 1e-9`: the `aJ` bounds become trivial.
    pub neutral_state: bool,
    pub verdict: Verdict,
}

impl UncertaintyReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// `-1e-8 (1 + |rhs|)`.
pub fn pass_threshold(rhs: f64) -> f64 {
    -tol::VERDICT * (1.0 + rhs.abs())
}

fn check_state(m: &Matrix, phi: &StateVector) -> Result<usize> {
    let n = m.require_square("operator")?;
    check_len(phi.as_slice(), n, "state")?;
    Ok(n)
}

fn require_j_selfadjoint(a: &Matrix, j: &Matrix) -> Result<()> {
    if !is_j_selfadjoint(a, j, tol::DEFAULT)? {
        let ja = j * a;
        return Err(Error::NotJSelfAdjoint { residual: ja.hermiticity_residual() });
    }
    Ok(())
}

fn require_hermitian(a: &Matrix) -> Result<()> {
    if !a.is_hermitian(tol::DEFAULT) {
        return Err(Error::NotHermitian { residual: a.hermiticity_residual() });
    }
    Ok(())
}

/// Square root of a provably nonnegative quantity; small negative rounding
/// noise is clamped to zero.
fn sqrt_nonnegative(value: f64, scale: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value.sqrt())
    } else if value >= -tol::RADICAND_CLAMP * scale.max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::NegativeRadicand { value })
    }
}

/// Real expectation `(JA phi, phi)` of a J-self-adjoint operator.
fn j_expectation(a: &Matrix, j: &Matrix, phi: &[C64]) -> f64 {
    inner(&j.mul_vec(&a.mul_vec(phi)), phi).re
}

/// `(A phi, A phi) - 2 (JA phi, phi) Re (A phi, phi) + (JA phi, phi)^2`.
pub fn sigma_j_squared(a: &Matrix, j: &Matrix, phi: &StateVector) -> Result<f64> {
    let n = check_state(a, phi)?;
    validate_symmetry(j)?;
    j.require_order(n, "symmetry")?;
    require_j_selfadjoint(a, j)?;
    let p = phi.as_slice();
    let ap = a.mul_vec(p);
    let ap_ap = inner(&ap, &ap).re;
    let sigma = j_expectation(a, j, p);
    let value = ap_ap - 2.0 * sigma * inner(&ap, p).re + sigma * sigma;
    sqrt_nonnegative(value, ap_ap).map(|s| s * s)
}

/// The J-standard deviation `sigma_J(A)(phi)`.
pub fn sigma_j(a: &Matrix, j: &Matrix, phi: &StateVector) -> Result<f64> {
    sigma_j_squared(a, j, phi).map(f64::sqrt)
}

/// `{(A phi, A phi) - (Re (A phi, phi))^2}^{1/2}`.
pub fn sigma_j_alt(a: &Matrix, j: &Matrix, phi: &StateVector) -> Result<f64> {
    let n = check_state(a, phi)?;
    validate_symmetry(j)?;
    j.require_order(n, "symmetry")?;
    require_j_selfadjoint(a, j)?;
    let p = phi.as_slice();
    let ap = a.mul_vec(p);
    let ap_ap = inner(&ap, &ap).re;
    let mean = inner(&ap, p).re;
    sqrt_nonnegative(ap_ap - mean * mean, ap_ap)
}

/// Ordinary standard deviation `{(A phi, A phi) - (A phi, phi)^2}^{1/2}` of a
/// hermitian operator.
pub fn std_dev(a: &Matrix, phi: &StateVector) -> Result<f64> {
    check_state(a, phi)?;
    require_hermitian(a)?;
    let p = phi.as_slice();
    let ap = a.mul_vec(p);
    let ap_ap = inner(&ap, &ap).re;
    let mean = inner(&ap, p).re;
    sqrt_nonnegative(ap_ap - mean * mean, ap_ap)
}

fn check_pair(a: &Matrix, b: &Matrix, j: &Matrix, phi: &StateVector) -> Result<usize> {
    let n = check_state(a, phi)?;
    b.require_order(n, "B")?;
    validate_symmetry(j)?;
    j.require_order(n, "symmetry")?;
    Ok(n)
}

/// `{(J{A,B}/2 phi, phi) - (JA phi, phi)(JB phi, phi)(2 - (J phi, phi))}^2 + |(J[A,B]/2 phi, phi)|^2`.
pub fn schrodinger_krein_rhs(a: &Matrix, b: &Matrix, j: &Matrix, phi: &StateVector) -> Result<f64> {
    check_pair(a, b, j, phi)?;
    require_j_selfadjoint(a, j)?;
    require_j_selfadjoint(b, j)?;
    let p = phi.as_slice();
    let anti = inner(&j.mul_vec(&anticommutator(a, b)?.mul_vec(p)), p) / 2.0;
    let comm = inner(&j.mul_vec(&commutator(a, b)?.mul_vec(p)), p) / 2.0;
    let scale = (a.frobenius_norm() * b.frobenius_norm()).max(1.0);
    if anti.im.abs() > tol::DEFAULT * scale {
        return Err(Error::ImaginaryResidual { value: anti.im });
    }
    let sigma = j_expectation(a, j, p);
    let rho = j_expectation(b, j, p);
    let jpp = inner(&j.mul_vec(p), p).re;
    let first = anti.re - sigma * rho * (2.0 - jpp);
    Ok(first * first + comm.norm_sqr())
}

/// `[({A,B}/2 phi, phi) - (A phi, phi)(B phi, phi)]^2 + |([A,B]/2 phi, phi)|^2` for hermitian `A, B`.
pub fn schrodinger_hilbert_rhs(a: &Matrix, b: &Matrix, phi: &StateVector) -> Result<f64> {
    let n = check_state(a, phi)?;
    b.require_order(n, "B")?;
    require_hermitian(a)?;
    require_hermitian(b)?;
    let p = phi.as_slice();
    let anti = inner(&anticommutator(a, b)?.mul_vec(p), p).re / 2.0;
    let comm = inner(&commutator(a, b)?.mul_vec(p), p) / 2.0;
    let first = anti - inner(&a.mul_vec(p), p).re * inner(&b.mul_vec(p), p).re;
    Ok(first * first + comm.norm_sqr())
}

/// `|([A,B] phi, phi)| / 2` for hermitian `A, B`.
pub fn robertson_rhs(a: &Matrix, b: &Matrix, phi: &StateVector) -> Result<f64> {
    let n = check_state(a, phi)?;
    b.require_order(n, "B")?;
    require_hermitian(a)?;
    require_hermitian(b)?;
    let p = phi.as_slice();
    Ok(inner(&commutator(a, b)?.mul_vec(p), p).norm() / 2.0)
}

/// Both sides of `(J{A,B}phi,phi)^2/4 + |(J[A,B]phi,phi)|^2/4 <= |A phi|^2 |B phi|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaseInequality {
    pub bound: f64,
    pub product: f64,
}

pub fn base_inequality(a: &Matrix, b: &Matrix, j: &Matrix, phi: &StateVector) -> Result<BaseInequality> {
    check_pair(a, b, j, phi)?;
    require_j_selfadjoint(a, j)?;
    require_j_selfadjoint(b, j)?;
    let p = phi.as_slice();
    let anti = inner(&j.mul_vec(&anticommutator(a, b)?.mul_vec(p)), p);
    let comm = inner(&j.mul_vec(&commutator(a, b)?.mul_vec(p)), p);
    let (ap, bp) = (norm(&a.mul_vec(p)), norm(&b.mul_vec(p)));
    Ok(BaseInequality {
        bound: 0.25 * anti.re * anti.re + 0.25 * comm.norm_sqr(),
        product: ap * ap * bp * bp,
    })
}

/// Right side of the operator-dependent bound for `[A,B] = a(I + beta B^2)`:
/// `(|a|/2) [(1 + beta{Re(B^2 phi,phi) - 2 rho Re(B phi,phi) + rho^2})^2
///  + (beta{Im(B^2 phi,phi) - 2 rho Im(B phi,phi)})^2]^{1/2}`, `rho = (JB phi, phi)`.
pub fn gup_rhs_krein(a: C64, beta: f64, b: &Matrix, j: &Matrix, phi: &StateVector) -> Result<f64> {
    check_pair(b, b, j, phi)?;
    require_j_selfadjoint(b, j)?;
    let jb = commutator(j, b)?.frobenius_norm();
    if jb > tol::DEFAULT * b.frobenius_norm().max(1.0) {
        return Err(Error::SymmetryCommutatorViolated { residual: jb });
    }
    Ok(gup_rhs_krein_unchecked(a, beta, b, j, phi.as_slice()))
}

/// Orbit `f(0), f(f(0)), ...` of `f(s) = |a| (1 + beta s^2) / (2 sigma_A)`.
pub fn gup_series(a_abs: f64, beta: f64, sigma_a: f64, n: usize) -> Result<Vec<f64>> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta must be nonnegative, got {beta}")));
    }
    if !(sigma_a > 0.0 && sigma_a.is_finite()) {
        return Err(Error::InvalidArgument(format!("sigma_A must be positive, got {sigma_a}")));
    }
    if !(a_abs >= 0.0 && a_abs.is_finite()) {
        return Err(Error::InvalidArgument(format!("|a| must be nonnegative, got {a_abs}")));
    }
    if n > 20 {
        return Err(Error::InvalidArgument(format!("at most 20 iterations, got {n}")));
    }
    let f = |s: f64| a_abs / (2.0 * sigma_a) * (1.0 + beta * s * s);
    let mut orbit = Vec::with_capacity(n);
    let mut s = 0.0;
    for step in 1..=n {
        s = f(s);
        if s.is_nan() || s.abs() > 1e12 {
            return Err(Error::DivergentIteration { step, value: s });
        }
        orbit.push(s);
    }
    Ok(orbit)
}

/// Four-term expansion of `sigma_A f^4(0)`:
/// `|a|/2 + beta|a|^3/(8 s^2) + beta^2|a|^5/(16 s^4) + 5 beta^3|a|^7/(128 s^6)`.
pub fn gup_expansion(a_abs: f64, beta: f64, sigma_a: f64) -> f64 {
    let x = a_abs * a_abs / (sigma_a * sigma_a);
    a_abs / 2.0 * (1.0 + beta * x / 4.0 + beta * beta * x * x / 8.0 + 5.0 * beta.powi(3) * x.powi(3) / 64.0)
}

/// Both sides of the shift identity for the form `[x, y] = (Gx, y)`:
/// `[(A - s)phi, (A - s)phi]` and `[A phi, A phi] - 2 Re{s [phi, A phi]} + |s|^2 [phi, phi]`.
pub fn shift_identity(gram: &Matrix, a: &Matrix, sigma: C64, phi: &[C64]) -> Result<(C64, C64)> {
    let n = crate::linalg::check_same_square(gram, a)?;
    check_len(phi, n, "state")?;
    let form = |x: &[C64], y: &[C64]| inner(&gram.mul_vec(x), y);
    let ap = a.mul_vec(phi);
    let shifted: Vec<C64> = ap.iter().zip(phi).map(|(x, p)| x - sigma * p).collect();
    let direct = form(&shifted, &shifted);
    let expanded = form(&ap, &ap) - 2.0 * (sigma * form(phi, &ap)).re + sigma.norm_sqr() * form(phi, phi);
    Ok((direct, expanded))
}

/// Evaluates one relation. Hypothesis commutators are gated at
/// `1e-8 (1 + |A| |B|)`; above the gate the verdict is `FailHypothesis`.
pub fn verify_relation(
    relation: RelationId,
    a: &Matrix,
    b: &Matrix,
    j: &Matrix,
    phi: &StateVector,
    spec: Option<&CommutatorSpec>,
) -> Result<UncertaintyReport> {
    let n = check_pair(a, b, j, phi)?;
    let identity = Matrix::identity(n);
    let j = if relation.is_hilbert() { &identity } else { j };
    let spec = match (relation.needs_commutator_spec(), spec) {
        (true, None) => return Err(Error::MissingCommutatorSpec(relation.as_str())),
        (true, Some(s)) => {
            s.validate()?;
            let aj = s.form == CommutatorForm::AJ;
            let wants_aj = matches!(relation, RelationId::AjThm72 | RelationId::AjThm73 | RelationId::AjThm74);
            if aj != wants_aj {
                return Err(Error::InvalidCommutatorSpec(format!(
                    "relation {relation} does not take commutator form {:?}",
                    s.form
                )));
            }
            Some(*s)
        }
        (false, _) => None,
    };
    let p = phi.as_slice();
    let jpp = inner(&j.mul_vec(p), p).re;
    let gate_scale = 1.0 + a.frobenius_norm() * b.frobenius_norm();

    let mut hypothesis_residual = 0.0;
    if let Some(s) = spec {
        let c = commutator(a, b)?;
        hypothesis_residual = (&c - &s.target(b, j)).frobenius_norm();
        if matches!(relation, RelationId::GupKrein) {
            hypothesis_residual = hypothesis_residual
                .max(commutator(j, a)?.frobenius_norm())
                .max(commutator(j, b)?.frobenius_norm());
        }
    }

    let (lhs, rhs, shift_a, shift_b) = match relation {
        RelationId::SchrodingerKrein => {
            let lhs = sigma_j_squared(a, j, phi)? * sigma_j_squared(b, j, phi)?;
            let rhs = schrodinger_krein_rhs(a, b, j, phi)?;
            (lhs, rhs, j_expectation(a, j, p), j_expectation(b, j, p))
        }
        RelationId::AjThm72 | RelationId::AjThm73 => {
            require_j_selfadjoint(a, j)?;
            require_j_selfadjoint(b, j)?;
            let s = spec.expect("checked above");
            let rhs = s.a.norm() / 2.0 * jpp.abs();
            if relation == RelationId::AjThm72 {
                let lhs = sigma_j(a, j, phi)? * sigma_j(b, j, phi)?;
                (lhs, rhs, j_expectation(a, j, p), j_expectation(b, j, p))
            } else {
                let lhs = sigma_j_alt(a, j, phi)? * sigma_j_alt(b, j, phi)?;
                (lhs, rhs, inner(&a.mul_vec(p), p).re, inner(&b.mul_vec(p), p).re)
            }
        }
        RelationId::AjThm74 => {
            let s = spec.expect("checked above");
            let lhs = std_dev(a, phi)? * std_dev(b, phi)?;
            let rhs = s.a.norm() / 2.0 * jpp.abs();
            (lhs, rhs, inner(&a.mul_vec(p), p).re, inner(&b.mul_vec(p), p).re)
        }
        RelationId::GupKrein => {
            require_j_selfadjoint(a, j)?;
            require_j_selfadjoint(b, j)?;
            let s = spec.expect("checked above");
            let lhs = sigma_j(a, j, phi)? * sigma_j(b, j, phi)?;
            let rhs = match s.form {
                CommutatorForm::AIPlusBetaB2 => gup_rhs_krein_unchecked(s.a, s.beta, b, j, p),
                _ => s.a.norm() / 2.0 * (1.0 + s.beta * sigma_j_squared(b, j, phi)?).abs(),
            };
            (lhs, rhs, j_expectation(a, j, p), j_expectation(b, j, p))
        }
        RelationId::GupHilbert => {
            let s = spec.expect("checked above");
            let sb = std_dev(b, phi)?;
            let lhs = std_dev(a, phi)? * sb;
            let rhs = s.a.norm() / 2.0 * (1.0 + s.beta * sb * sb);
            (lhs, rhs, inner(&a.mul_vec(p), p).re, inner(&b.mul_vec(p), p).re)
        }
        RelationId::RobertsonHilbert => {
            let lhs = std_dev(a, phi)? * std_dev(b, phi)?;
            let rhs = robertson_rhs(a, b, phi)?;
            (lhs, rhs, inner(&a.mul_vec(p), p).re, inner(&b.mul_vec(p), p).re)
        }
        RelationId::SchrodingerHilbert => {
            let (sa, sb) = (std_dev(a, phi)?, std_dev(b, phi)?);
            let rhs = schrodinger_hilbert_rhs(a, b, phi)?;
            (sa * sa * sb * sb, rhs, inner(&a.mul_vec(p), p).re, inner(&b.mul_vec(p), p).re)
        }
    };
    let margin = lhs - rhs;
    let verdict = if hypothesis_residual > tol::HYPOTHESIS_GATE * gate_scale {
        Verdict::FailHypothesis
    } else if margin >= pass_threshold(rhs) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(UncertaintyReport {
        relation,
        lhs,
        rhs,
        margin,
        shift_a,
        shift_b,
        hypothesis_residual,
        jphi_phi: jpp,
        neutral_state: jpp.abs() <= tol::NEUTRAL,
        verdict,
    })
}

/// `gup_rhs_krein` without the `[J,B] = 0` precondition, so the verifier can
/// still report both sides when the hypothesis fails.
fn gup_rhs_krein_unchecked(a: C64, beta: f64, b: &Matrix, j: &Matrix, p: &[C64]) -> f64 {
    let bp = b.mul_vec(p);
    let b2 = inner(&b.mul_vec(&bp), p);
    let b1 = inner(&bp, p);
    let rho = j_expectation(b, j, p);
    let re = 1.0 + beta * (b2.re - 2.0 * rho * b1.re + rho * rho);
    let im = beta * (b2.im - 2.0 * rho * b1.im);
    a.norm() / 2.0 * (re * re + im * im).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{real_vec, I, ONE, ZERO};
    use crate::ops::{random_j_selfadjoint, random_symmetry, symmetry_from_unitary, RandomSpec};
    use crate::random::Stream;

    fn state(v: &[C64]) -> StateVector {
        StateVector::normalized(v).unwrap()
    }

    fn e1(n: usize) -> StateVector {
        let mut v = vec![ZERO; n];
        v[0] = ONE;
        StateVector::new(v).unwrap()
    }

    /// `|(A - s I) phi|` by forming the shifted vector.
    fn shifted_norm(a: &Matrix, s: f64, phi: &StateVector) -> f64 {
        let p = phi.as_slice();
        norm(&a.mul_vec(p).iter().zip(p).map(|(x, y)| x - y * s).collect::<Vec<_>>())
    }

    /// `(|a|/2) |1 + beta ((B - rho)^2 phi, phi)|`.
    fn gup_rhs_by_shifted_square(a: C64, beta: f64, b: &Matrix, j: &Matrix, phi: &StateVector) -> f64 {
        let p = phi.as_slice();
        let rho = j_expectation(b, j, p);
        let shifted = b - &Matrix::identity(b.rows()).scale_real(rho);
        let q = inner(&(&shifted * &shifted).mul_vec(p), p);
        a.norm() / 2.0 * (ONE + q * beta).norm()
    }

    fn aj_fixture() -> (Matrix, Matrix, Matrix) {
        (
            Matrix::real(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            Matrix::complex(2, 2, &[ZERO, I, I, ZERO]),
            Matrix::diag_real(&[1.0, -1.0]),
        )
    }

    fn pauli() -> (Matrix, Matrix, Matrix) {
        (
            Matrix::real(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            Matrix::complex(2, 2, &[ZERO, -I, I, ZERO]),
            Matrix::diag_real(&[1.0, -1.0]),
        )
    }

    #[test]
    fn deviation_examples() {
        let id = Matrix::identity(2);
        assert_eq!(sigma_j(&Matrix::diag_real(&[1.0, -1.0]), &id, &e1(2)).unwrap(), 0.0);
        let sx = Matrix::real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!((sigma_j(&sx, &id, &e1(2)).unwrap() - 1.0).abs() < 1e-15);
        let (a, _, j) = aj_fixture();
        let s = sigma_j(&a, &j, &e1(2)).unwrap();
        let sigma = j_expectation(&a, &j, e1(2).as_slice());
        assert!((s - shifted_norm(&a, sigma, &e1(2))).abs() < 1e-14);
        assert_eq!(sigma_j_alt(&Matrix::zeros(3, 3), &Matrix::identity(3), &e1(3)).unwrap(), 0.0);
    }

    #[test]
    fn deviation_preconditions() {
        let (_, _, j) = aj_fixture();
        let sx = Matrix::real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(sigma_j(&sx, &j, &e1(2)), Err(Error::NotJSelfAdjoint { .. })));
        assert!(matches!(StateVector::new(vec![ONE, ONE]), Err(Error::NotNormalized { .. })));
        assert!(matches!(std_dev(&aj_fixture().0, &e1(2)), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn deviations_match_norm_routes_on_random_instances() {
        for t in 0..300u64 {
            let n = 2 + (t % 5) as usize;
            let spec = RandomSpec::new(t, n, 1.0).unwrap();
            let j = random_symmetry(&spec).unwrap();
            let a = random_j_selfadjoint(&spec.derive("a"), &j).unwrap();
            let phi = StateVector::new(Stream::new(t, "phi").unit_vector(n)).unwrap();
            let p = phi.as_slice();
            let s = sigma_j(&a, &j, &phi).unwrap();
            assert!((s - shifted_norm(&a, j_expectation(&a, &j, p), &phi)).abs() <= 1e-10 * (1.0 + s));
            let alt = sigma_j_alt(&a, &j, &phi).unwrap();
            let mean = inner(&a.mul_vec(p), p).re;
            assert!((alt - shifted_norm(&a, mean, &phi)).abs() <= 1e-10 * (1.0 + alt));
            // Real shifts are optimal at Re(A phi, phi), so the alternative deviation is smaller.
            assert!(alt <= s + 1e-12);
        }
    }

    #[test]
    fn hilbert_reductions() {
        let mut st = Stream::new(8, "hilbert");
        for _ in 0..200 {
            let n = 2 + st.index(5);
            let a = st.hermitian(n, 1.0);
            let b = st.hermitian(n, 1.0);
            let phi = StateVector::new(st.unit_vector(n)).unwrap();
            let id = Matrix::identity(n);
            assert!((sigma_j(&a, &id, &phi).unwrap() - std_dev(&a, &phi).unwrap()).abs() < 1e-12);
            assert!((sigma_j_alt(&a, &id, &phi).unwrap() - std_dev(&a, &phi).unwrap()).abs() < 1e-12);
            let k = schrodinger_krein_rhs(&a, &b, &id, &phi).unwrap();
            let h = schrodinger_hilbert_rhs(&a, &b, &phi).unwrap();
            let r = robertson_rhs(&a, &b, &phi).unwrap();
            assert!((k - h).abs() <= 1e-10 * (1.0 + h));
            assert!(r * r <= h + 1e-12);
        }
    }

    #[test]
    fn joint_eigenstate_kills_both_terms() {
        let a = Matrix::diag_real(&[1.0, 2.0]);
        let b = Matrix::diag_real(&[3.0, -1.0]);
        let rhs = schrodinger_krein_rhs(&a, &b, &Matrix::identity(2), &e1(2)).unwrap();
        assert!(rhs.abs() < 1e-14);
    }

    #[test]
    fn robertson_pauli_equality() {
        let (a, b, _) = pauli();
        assert!((robertson_rhs(&a, &b, &e1(2)).unwrap() - 1.0).abs() < 1e-15);
        assert!((std_dev(&a, &e1(2)).unwrap() * std_dev(&b, &e1(2)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(robertson_rhs(&Matrix::diag_real(&[1.0, 2.0]), &Matrix::diag_real(&[0.0, 5.0]), &e1(2)).unwrap(), 0.0);
    }

    #[test]
    fn base_and_main_inequality_on_random_krein_instances() {
        for t in 0..1000u64 {
            let n = 2 + (t % 5) as usize;
            let spec = RandomSpec::new(t, n, 1.0).unwrap();
            let j = random_symmetry(&spec).unwrap();
            let a = random_j_selfadjoint(&spec.derive("a"), &j).unwrap();
            let b = random_j_selfadjoint(&spec.derive("b"), &j).unwrap();
            let phi = StateVector::new(Stream::new(t, "phi").unit_vector(n)).unwrap();
            let base = base_inequality(&a, &b, &j, &phi).unwrap();
            assert!(base.bound <= base.product + 1e-8 * (1.0 + base.product));
            let r = verify_relation(RelationId::SchrodingerKrein, &a, &b, &j, &phi, None).unwrap();
            assert!(r.passed(), "trial {t}: {r:?}");
        }
    }

    #[test]
    fn aj_fixture_relations() {
        let (a, b, j) = aj_fixture();
        let c = commutator(&a, &b).unwrap();
        assert_eq!(c, j.scale(I * 2.0));
        let spec = CommutatorSpec::aj(2.0);
        let mut st = Stream::new(72, "aj");
        for _ in 0..1000 {
            let phi = StateVector::new(st.unit_vector(2)).unwrap();
            for rel in [RelationId::AjThm72, RelationId::AjThm73] {
                let r = verify_relation(rel, &a, &b, &j, &phi, Some(&spec)).unwrap();
                assert_eq!(r.hypothesis_residual, 0.0);
                assert!(r.margin >= -1e-10, "{r:?}");
                assert!(r.passed());
            }
        }
        // The hermitian variant refuses non-hermitian input.
        let phi = e1(2);
        assert!(matches!(
            verify_relation(RelationId::AjThm74, &a, &b, &j, &phi, Some(&spec)),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn hermitian_aj_variant_on_pauli_pair() {
        let (a, b, j) = pauli();
        let spec = CommutatorSpec::aj(2.0);
        let mut st = Stream::new(74, "pauli");
        for _ in 0..1000 {
            let phi = StateVector::new(st.unit_vector(2)).unwrap();
            let r = verify_relation(RelationId::AjThm74, &a, &b, &j, &phi, Some(&spec)).unwrap();
            assert_eq!(r.hypothesis_residual, 0.0);
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn hypothesis_gate() {
        let (a, b, j) = aj_fixture();
        let r = verify_relation(RelationId::AjThm72, &a, &b, &j, &e1(2), Some(&CommutatorSpec::aj(1.0))).unwrap();
        assert_eq!(r.verdict, Verdict::FailHypothesis);
        assert!((r.hypothesis_residual - 2.0f64.sqrt()).abs() < 1e-14);
        assert!(matches!(
            verify_relation(RelationId::AjThm72, &a, &b, &j, &e1(2), None),
            Err(Error::MissingCommutatorSpec(_))
        ));
        assert!(CommutatorSpec::new(C64::new(0.1, 1.0), 0.0, CommutatorForm::AJ).is_err());
        let gup = CommutatorSpec::new(I, 0.5, CommutatorForm::AIPlusBetaB2).unwrap();
        assert!(matches!(
            verify_relation(RelationId::AjThm72, &a, &b, &j, &e1(2), Some(&gup)),
            Err(Error::InvalidCommutatorSpec(_))
        ));
    }

    #[test]
    fn equal_operators_have_no_commutator_term() {
        let mut st = Stream::new(3, "same");
        let j = random_symmetry(&RandomSpec::new(3, 4, 1.0).unwrap()).unwrap();
        let a = random_j_selfadjoint(&RandomSpec::new(4, 4, 1.0).unwrap(), &j).unwrap();
        let phi = StateVector::new(st.unit_vector(4)).unwrap();
        let p = phi.as_slice();
        let comm = inner(&j.mul_vec(&commutator(&a, &a).unwrap().mul_vec(p)), p);
        assert_eq!(comm, ZERO);
        assert!(verify_relation(RelationId::SchrodingerKrein, &a, &a, &j, &phi, None).unwrap().margin >= -1e-12);
        let h = st.hermitian(4, 1.0);
        for rel in [RelationId::RobertsonHilbert, RelationId::SchrodingerHilbert] {
            assert!(verify_relation(rel, &h, &h, &j, &phi, None).unwrap().margin >= -1e-12);
        }
    }

    #[test]
    fn schrodinger_hilbert_fixture() {
        let a = Matrix::diag_real(&[1.0, -1.0]);
        let b = Matrix::real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let phi = state(&real_vec(&[1.0, 1.0]));
        let r = verify_relation(RelationId::SchrodingerHilbert, &a, &b, &Matrix::identity(2), &phi, None).unwrap();
        // phi is an eigenvector of B, so sigma(B) = 0; the rhs by hand is
        // ((A B + B A)/2 phi,phi) - <A><B> = 0 - 0 and |([A,B]/2 phi,phi)| = 0.
        let sa = shifted_norm(&a, 0.0, &phi);
        let sb = shifted_norm(&b, 1.0, &phi);
        assert!((r.lhs - sa * sa * sb * sb).abs() < 1e-15);
        assert!(r.rhs.abs() < 1e-15 && r.margin >= 0.0);
    }

    #[test]
    fn gup_rhs_examples() {
        let mut st = Stream::new(81, "gup");
        for _ in 0..200 {
            let n = 2 + st.index(5);
            let b = st.hermitian(n, 1.0);
            let phi = StateVector::new(st.unit_vector(n)).unwrap();
            let id = Matrix::identity(n);
            let a = I * st.uniform_in(0.1, 3.0);
            let beta = st.uniform();
            let sd = std_dev(&b, &phi).unwrap();
            let want = a.norm() / 2.0 * (1.0 + beta * sd * sd).abs();
            let got = gup_rhs_krein(a, beta, &b, &id, &phi).unwrap();
            assert!((got - want).abs() <= 1e-10 * (1.0 + want));
            assert_eq!(gup_rhs_krein(a, 0.0, &b, &id, &phi).unwrap(), a.norm() / 2.0);
        }
    }

    #[test]
    fn gup_rhs_matches_shifted_square_route() {
        let mut st = Stream::new(82, "gup-two-route");
        for t in 0..500u64 {
            let half = 1 + st.index(3);
            let n = 2 * half;
            let u = st.unitary(n);
            let signs: Vec<f64> = (0..n).map(|i| if i < half { 1.0 } else { -1.0 }).collect();
            let j = symmetry_from_unitary(&u, &signs).unwrap();
            // B = JH with H hermitian commuting with J.
            let mut blocks = Matrix::zeros(n, n);
            let (p, q) = (st.hermitian(half, 1.0), st.hermitian(half, 1.0));
            for r in 0..half {
                for c in 0..half {
                    blocks[(r, c)] = p[(r, c)];
                    blocks[(half + r, half + c)] = q[(r, c)];
                }
            }
            let h = (&(&u * &blocks) * &u.adjoint()).hermitian_part();
            let b = &j * &h;
            let phi = StateVector::new(st.unit_vector(n)).unwrap();
            let a = I * st.uniform_in(0.1, 3.0);
            let beta = st.uniform();
            let formula = gup_rhs_krein(a, beta, &b, &j, &phi).unwrap();
            let route = gup_rhs_by_shifted_square(a, beta, &b, &j, &phi);
            assert!((formula - route).abs() <= 1e-10 * route.max(1e-300), "trial {t}");
        }
    }

    #[test]
    fn gup_rhs_requires_commuting_symmetry() {
        let (a, _, j) = aj_fixture();
        assert!(matches!(
            gup_rhs_krein(I, 1.0, &a, &j, &e1(2)),
            Err(Error::SymmetryCommutatorViolated { .. })
        ));
    }

    #[test]
    fn gup_series_orbits() {
        let orbit = gup_series(1.0, 0.0, 1.0, 5).unwrap();
        assert!(orbit.iter().all(|&s| s == 0.5));
        for beta in [1e-3, 1e-4] {
            let orbit = gup_series(1.0, beta, 1.0, 4).unwrap();
            let err = (orbit[3] - gup_expansion(1.0, beta, 1.0)).abs();
            assert!(err <= 10.0 * beta.powi(4), "beta {beta}: {err:e}");
        }
        let orbit = gup_series(2.0, 0.01, 3.0, 20).unwrap();
        assert!(orbit.windows(2).all(|w| w[1] >= w[0]));
        assert!((orbit[19] - orbit[18]).abs() < 1e-12);
        assert!(matches!(gup_series(10.0, 10.0, 1.0, 20), Err(Error::DivergentIteration { .. })));
        assert!(gup_series(1.0, -1.0, 1.0, 3).is_err());
        assert!(gup_series(1.0, 1.0, 0.0, 3).is_err());
        assert!(gup_series(1.0, 1.0, 1.0, 21).is_err());
    }

    #[test]
    fn shifted_commutator_bound_fails_outside_scalar_commutators() {
        // [A,B] = a(I + beta B^2) holds with A = diag(1,2), B = I, beta = -1,
        // a = i, yet phi = e1 is an eigenvector of A.
        let a = Matrix::diag_real(&[1.0, 2.0]);
        let b = Matrix::identity(2);
        let spec = CommutatorSpec::new(I, -1.0, CommutatorForm::AIPlusBetaB2).unwrap();
        for rel in [RelationId::GupKrein, RelationId::GupHilbert] {
            let r = verify_relation(rel, &a, &b, &Matrix::identity(2), &e1(2), Some(&spec)).unwrap();
            assert_eq!(r.hypothesis_residual, 0.0);
            assert_eq!(r.lhs, 0.0);
            assert!((r.rhs - 0.5).abs() < 1e-15);
            assert_eq!(r.verdict, Verdict::Fail);
        }
    }

    #[test]
    fn shift_identity_and_translation_invariance() {
        let mut st = Stream::new(74, "shift");
        for _ in 0..1000 {
            let n = 1 + st.index(6);
            let g = st.hermitian(n, 1.0);
            let a = st.matrix(n);
            let b = st.matrix(n);
            let (s, r) = (st.complex() * 3.0, st.complex() * 3.0);
            let phi = st.vector(n);
            let (direct, expanded) = shift_identity(&g, &a, s, &phi).unwrap();
            let scale = g.frobenius_norm() * (a.frobenius_norm() + s.norm()).powi(2) * norm(&phi).powi(2);
            assert!((direct - expanded).norm() <= 1e-12 * scale.max(1.0));
            let id = Matrix::identity(n);
            let shifted = commutator(&(&a - &id.scale(s)), &(&b - &id.scale(r))).unwrap();
            let plain = commutator(&a, &b).unwrap();
            assert!(shifted.max_abs_diff(&plain) <= 1e-14 * (1.0 + s.norm() * r.norm()) * (a.max_abs() + b.max_abs()));
            let anti = anticommutator(&(&a - &id.scale(s)), &(&b - &id.scale(r))).unwrap();
            let want = &(&(&anticommutator(&a, &b).unwrap() - &a.scale(r * 2.0)) - &b.scale(s * 2.0)) + &id.scale(s * r * 2.0);
            assert!(anti.max_abs_diff(&want) <= 1e-12 * (1.0 + s.norm()) * (1.0 + r.norm()) * (1.0 + a.frobenius_norm() + b.frobenius_norm()));
        }
    }

    #[test]
    fn krein_schwarz() {
        let mut st = Stream::new(43, "schwarz");
        for _ in 0..500 {
            let n = 1 + st.index(6);
            let j = random_symmetry(&RandomSpec::new(st.index(1 << 30) as u64, n, 1.0).unwrap()).unwrap();
            let (u, v) = (st.vector(n), st.vector(n));
            assert!(inner(&j.mul_vec(&u), &v).norm() <= norm(&u) * norm(&v) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn relation_ids_round_trip() {
        for r in RelationId::ALL {
            assert_eq!(r.as_str().parse::<RelationId>().unwrap(), r);
            assert_eq!(serde_json::to_value(r).unwrap(), r.as_str());
        }
        assert!("thm-7-9".parse::<RelationId>().is_err());
    }
}
