//! Seeded randomized sweeps of the uncertainty relations.
//!
//! Trial `t` draws everything from `seed ^ t`, so rows do not depend on
//! execution order and trials run in parallel.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, C64, I, ZERO};
use crate::ops::{random_j_selfadjoint, random_symmetry, symmetry_from_unitary, RandomSpec};
use crate::random::{trial_seed, Stream};
use crate::uncertainty::{verify_relation, CommutatorForm, CommutatorSpec, RelationId, StateVector, UncertaintyReport, Verdict};

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepConfig {
    pub relation: RelationId,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    /// Pass threshold: `margin >= -tol (1 + |rhs|)`.
    pub tol: f64,
}

impl SweepConfig {
    pub fn new(relation: RelationId, dim: usize, trials: usize, seed: u64) -> Result<Self> {
        let config = Self { relation, dim, trials, seed, tol: crate::tol::VERDICT };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if !(MIN_DIM..=MAX_DIM).contains(&self.dim) {
            return Err(Error::InvalidArgument(format!(
                "dimension must lie in [{MIN_DIM}, {MAX_DIM}], got {}",
                self.dim
            )));
        }
        let paired = matches!(self.relation, RelationId::AjThm72 | RelationId::AjThm73 | RelationId::AjThm74);
        if paired && !self.dim.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "[A,B] = aJ needs equal positive and negative dimensions, so an even dimension; got {}",
                self.dim
            )));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be nonnegative, got {}", self.tol)));
        }
        Ok(())
    }

    /// `# relation=... dim=... trials=... seed=... tol=...`
    pub fn comment_line(&self) -> String {
        format!(
            "# relation={} dim={} trials={} seed={} tol={:e}",
            self.relation, self.dim, self.trials, self.seed, self.tol
        )
    }
}

/// One randomly drawn instance of a relation.
#[derive(Debug, Clone)]
pub struct TrialInstance {
    pub a: Matrix,
    pub b: Matrix,
    pub j: Matrix,
    pub phi: StateVector,
    pub spec: Option<CommutatorSpec>,
}

/// Direct sum of `2 x 2` blocks placed on the diagonal.
fn block_diagonal(blocks: &[Matrix]) -> Matrix {
    let n: usize = blocks.iter().map(Matrix::rows).sum();
    let mut m = Matrix::zeros(n, n);
    let mut offset = 0;
    for b in blocks {
        for r in 0..b.rows() {
            for c in 0..b.cols() {
                m[(offset + r, offset + c)] = b[(r, c)];
            }
        }
        offset += b.rows();
    }
    m
}

fn conjugate(u: &Matrix, m: &Matrix) -> Matrix {
    &(u * m) * &u.adjoint()
}

/// Instance with `[A,B] = aJ`, built from scaled and shifted copies of a
/// `2 x 2` pair with commutator `2iJ0`, `J0 = diag(1,-1)`, rotated by a
/// random unitary.
fn aj_instance(s: &mut Stream, n: usize, hermitian: bool) -> (Matrix, Matrix, Matrix, CommutatorSpec) {
    let t = s.uniform_in(0.25, 2.0);
    let (mut a_blocks, mut b_blocks, mut j_blocks) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..n / 2 {
        let c = s.uniform_in(0.5, 2.0);
        let (sa, sb) = (s.uniform(), s.uniform());
        let (a0, b0) = if hermitian {
            // The Pauli pair sigma_x, sigma_y.
            (Matrix::real(2, 2, &[0.0, 1.0, 1.0, 0.0]), Matrix::complex(2, 2, &[ZERO, -I, I, ZERO]))
        } else {
            (Matrix::real(2, 2, &[0.0, 1.0, -1.0, 0.0]), Matrix::complex(2, 2, &[ZERO, I, I, ZERO]))
        };
        let id = Matrix::identity(2);
        a_blocks.push(&a0.scale_real(c * t) + &id.scale_real(sa));
        b_blocks.push(&b0.scale_real(1.0 / c) + &id.scale_real(sb));
        j_blocks.push(Matrix::diag_real(&[1.0, -1.0]));
    }
    let u = s.unitary(n);
    let j = conjugate(&u, &block_diagonal(&j_blocks)).hermitian_part();
    let a = conjugate(&u, &block_diagonal(&a_blocks));
    let b = conjugate(&u, &block_diagonal(&b_blocks));
    (a, b, j, CommutatorSpec::aj(2.0 * t))
}

/// Instance of `[A,B] = a(I + beta B^2)` with `[J,A] = [J,B] = 0`. In finite
/// dimensions this forces `[A,B] = 0` and `B^2 = -I/beta`, so `A`, `B` and
/// `J` are drawn diagonal in one random unitary basis.
fn gup_instance(s: &mut Stream, n: usize, hilbert: bool, form: CommutatorForm) -> (Matrix, Matrix, Matrix, CommutatorSpec) {
    let beta = -s.uniform_in(0.25, 4.0);
    let root = (-1.0 / beta).sqrt();
    let a_im = s.uniform_in(0.25, 3.0);
    let w = s.unitary(n);
    let j_signs: Vec<f64> = (0..n).map(|_| if hilbert { 1.0 } else { s.sign() }).collect();
    let b_signs: Vec<f64> = (0..n).map(|_| root * s.sign()).collect();
    let a_diag: Vec<f64> = (0..n).map(|_| s.uniform() * 2.0).collect();
    let j = symmetry_from_unitary(&w, &j_signs).expect("signs are +-1");
    let b = conjugate(&w, &Matrix::diag_real(&b_signs)).hermitian_part();
    let a = conjugate(&w, &Matrix::diag_real(&a_diag)).hermitian_part();
    (a, b, j, CommutatorSpec { a: C64::new(0.0, a_im), beta, form })
}

/// Draws the instance of trial `trial`.
pub fn draw_instance(config: &SweepConfig, trial: u64) -> Result<TrialInstance> {
    let seed = trial_seed(config.seed, trial);
    let n = config.dim;
    let mut s = Stream::new(seed, config.relation.as_str());
    let (a, b, j, spec) = match config.relation {
        RelationId::SchrodingerKrein => {
            let base = RandomSpec::new(seed, n, 1.0)?;
            let j = random_symmetry(&base)?;
            let a = random_j_selfadjoint(&base.derive("A"), &j)?;
            let b = random_j_selfadjoint(&base.derive("B"), &j)?;
            (a, b, j, None)
        }
        RelationId::RobertsonHilbert | RelationId::SchrodingerHilbert => {
            let a = s.hermitian(n, 1.0);
            let b = s.hermitian(n, 1.0);
            (a, b, Matrix::identity(n), None)
        }
        RelationId::AjThm72 | RelationId::AjThm73 => {
            let (a, b, j, spec) = aj_instance(&mut s, n, false);
            (a, b, j, Some(spec))
        }
        RelationId::AjThm74 => {
            let (a, b, j, spec) = aj_instance(&mut s, n, true);
            (a, b, j, Some(spec))
        }
        RelationId::GupKrein => {
            let (a, b, j, spec) = gup_instance(&mut s, n, false, CommutatorForm::AIPlusBetaB2);
            (a, b, j, Some(spec))
        }
        RelationId::GupHilbert => {
            let (a, b, j, spec) = gup_instance(&mut s, n, true, CommutatorForm::AIPlusBetaB2);
            (a, b, j, Some(spec))
        }
    };
    let phi = StateVector::new(s.unit_vector(n))?;
    Ok(TrialInstance { a, b, j, phi, spec })
}

/// Outcome of one trial judged at the sweep tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TrialOutcome {
    Pass,
    Violation,
    HypothesisViolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub trial: u64,
    pub report: UncertaintyReport,
    pub outcome: TrialOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
}

pub const CSV_HEADER: &str = "trial,lhs,rhs,margin,hypothesis_residual,jphi_phi";

impl SweepResult {
    pub fn count(&self, outcome: TrialOutcome) -> usize {
        self.rows.iter().filter(|r| r.outcome == outcome).count()
    }

    /// CSV with a config comment line, LF line endings and round-trippable floats.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 2));
        out.push_str(&self.config.comment_line());
        out.push('\n');
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let r = &row.report;
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                row.trial, r.lhs, r.rhs, r.margin, r.hypothesis_residual, r.jphi_phi
            ));
        }
        out
    }
}

pub fn run_trial(config: &SweepConfig, trial: u64) -> Result<SweepRow> {
    let inst = draw_instance(config, trial)?;
    let report = verify_relation(config.relation, &inst.a, &inst.b, &inst.j, &inst.phi, inst.spec.as_ref())?;
    let outcome = if report.verdict == Verdict::FailHypothesis {
        TrialOutcome::HypothesisViolation
    } else if report.margin >= -config.tol * (1.0 + report.rhs.abs()) {
        TrialOutcome::Pass
    } else {
        TrialOutcome::Violation
    };
    Ok(SweepRow { trial, report, outcome })
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let rows = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(config, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { config: *config, rows })
}
