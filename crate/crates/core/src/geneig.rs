//! The hermitian pencil `Ax = lambda Bx` with indefinite `B`.
//!
//! Eigenvalues are the roots of the characteristic polynomial of
//! `C = B^-1 A` (Faddeev-LeVerrier coefficients, Durand-Kerner roots);
//! eigenvectors come from inverse iteration on `A - lambda B`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::{GramForm, VectorClass};
use crate::linalg::{condition_number, hermitian_eigen, inner, norm, null_space, solve, Lu, Matrix, C64, ONE, ZERO};
use crate::random::Stream;
use crate::tol;

pub const DK_MAX_ITERATIONS: usize = 500;
pub const DK_TOLERANCE: f64 = 1e-13;
const INVERSE_ITERATIONS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralizedEigenPair {
    pub lambda: C64,
    /// Unit euclidean norm.
    pub vector: Vec<C64>,
    pub sign_class: VectorClass,
    /// `|Ax - lambda Bx|`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenEigReport {
    pub pairs: Vec<GeneralizedEigenPair>,
    pub degenerate: bool,
    pub note: String,
}

impl GenEigReport {
    /// `{"degenerate", "pairs": [{"lambda": [re, im], "class", "vector"}], "note"}`
    /// with each vector as an `n x 1` matrix.
    pub fn to_json_value(&self) -> serde_json::Value {
        let pairs: Vec<serde_json::Value> = self
            .pairs
            .iter()
            .map(|p| {
                serde_json::json!({
                    "lambda": [p.lambda.re, p.lambda.im],
                    "class": p.sign_class,
                    "vector": Matrix::column_vector(&p.vector),
                    "residual": p.residual,
                })
            })
            .collect();
        serde_json::json!({
            "degenerate": self.degenerate,
            "pairs": pairs,
            "note": self.note,
        })
    }
}

/// Monic characteristic polynomial of `c`, coefficients from the constant
/// term up: `p(z) = sum_k coeffs[k] z^k` with `coeffs[n] = 1`.
pub fn characteristic_polynomial(c: &Matrix) -> Result<Vec<C64>> {
    let n = c.require_square("matrix")?;
    let mut coeffs = vec![ZERO; n + 1];
    coeffs[n] = ONE;
    let id = Matrix::identity(n);
    let mut m = Matrix::zeros(n, n);
    for k in 1..=n {
        m = &(c * &m) + &id.scale(coeffs[n - k + 1]);
        coeffs[n - k] = -(c * &m).trace() / k as f64;
    }
    Ok(coeffs)
}

fn horner(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

/// Simultaneous Durand-Kerner iteration for the roots of a monic polynomial
/// given constant-term-first. Starts on a circle of radius `1 + max |coeff|`.
pub fn durand_kerner(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    let monic: Vec<C64> = coeffs.iter().map(|c| c / lead).collect();
    let radius = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(radius, std::f64::consts::TAU * k as f64 / n as f64 + 0.4))
        .collect();
    for _ in 0..DK_MAX_ITERATIONS {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let denom: C64 = (0..n).filter(|&j| j != i).map(|j| z[i] - z[j]).product();
            if denom == ZERO {
                z[i] += C64::new(1e-8, 1e-8) * radius;
                delta = f64::INFINITY;
                continue;
            }
            let step = horner(&monic, z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm() / z[i].norm().max(1.0));
        }
        if delta <= DK_TOLERANCE {
            break;
        }
    }
    z
}

/// Groups weighted roots closer than `radius` (single linkage) and returns
/// each group's weighted mean with its total multiplicity.
fn merge_roots(roots: &[(C64, usize)], radius: f64) -> Vec<(C64, usize)> {
    let n = roots.len();
    let mut group: Vec<usize> = (0..n).collect();
    fn find(g: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while g[r] != r {
            r = g[r];
        }
        g[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (roots[i].0 - roots[j].0).norm() <= radius {
                let (a, b) = (find(&mut group, i), find(&mut group, j));
                group[a.max(b)] = a.min(b);
            }
        }
    }
    let mut clusters: Vec<(usize, C64, usize)> = Vec::new();
    for (i, &(z, m)) in roots.iter().enumerate() {
        let root = find(&mut group, i);
        match clusters.iter_mut().find(|c| c.0 == root) {
            Some(c) => {
                c.1 += z * m as f64;
                c.2 += m;
            }
            None => clusters.push((root, z * m as f64, m)),
        }
    }
    clusters.into_iter().map(|(_, s, m)| (s / m as f64, m)).collect()
}

fn orthonormalize(columns: &mut [Vec<C64>], stream: &mut Stream) {
    let n = columns.first().map_or(0, Vec::len);
    for k in 0..columns.len() {
        for _attempt in 0..4 {
            for _pass in 0..2 {
                for l in 0..k {
                    let (done, rest) = columns.split_at_mut(k);
                    let proj = inner(&rest[0], &done[l]);
                    for (x, q) in rest[0].iter_mut().zip(&done[l]) {
                        *x -= proj * q;
                    }
                }
            }
            let nk = norm(&columns[k]);
            if nk > 1e-10 && nk.is_finite() {
                columns[k].iter_mut().for_each(|x| *x /= nk);
                break;
            }
            columns[k] = stream.vector(n);
        }
    }
}

/// Subspace inverse iteration `(A - sigma B) X_{k+1} = B X_k` for a root of
/// multiplicity `m`.
fn inverse_iteration(a: &Matrix, b: &Matrix, sigma: C64, m: usize, cluster: usize) -> Vec<Vec<C64>> {
    let n = a.rows();
    let scale = a.frobenius_norm() + sigma.norm() * b.frobenius_norm();
    // A fixed offset keeps the shifted matrix safely invertible when sigma
    // is (nearly) exact, without slowing convergence.
    let offset = C64::new(1.0, 1.0) * (1e-13 * scale.max(f64::MIN_POSITIVE));
    let mut shift = sigma + offset;
    let lu = loop {
        match Lu::factor(&(a - &b.scale(shift))) {
            Ok(lu) => break lu,
            Err(_) => shift += offset,
        }
    };
    let mut stream = Stream::new(cluster as u64, "inverse-iteration");
    let mut x: Vec<Vec<C64>> = (0..m).map(|_| stream.vector(n)).collect();
    orthonormalize(&mut x, &mut stream);
    for _ in 0..INVERSE_ITERATIONS {
        for col in x.iter_mut() {
            *col = lu.solve_vec(&b.mul_vec(col));
        }
        orthonormalize(&mut x, &mut stream);
    }
    x
}

/// Least-squares eigenvalue estimate `(Ax, Bx) / (Bx, Bx)`.
fn refine_lambda(a: &Matrix, b: &Matrix, x: &[C64]) -> C64 {
    let bx = b.mul_vec(x);
    inner(&a.mul_vec(x), &bx) / inner(&bx, &bx).re
}

fn pair_residual(a: &Matrix, b: &Matrix, lambda: C64, x: &[C64]) -> f64 {
    let ax = a.mul_vec(x);
    let bx = b.mul_vec(x);
    norm(&ax.iter().zip(&bx).map(|(p, q)| p - lambda * q).collect::<Vec<_>>())
}

/// The bound every returned pair satisfies: `1e-8 (|A| + |lambda| |B|)`.
pub fn residual_bound(a: &Matrix, b: &Matrix, lambda: C64) -> f64 {
    tol::PENCIL_RESIDUAL * (a.frobenius_norm() + lambda.norm() * b.frobenius_norm())
}

/// Spectrum and sign classes of `Ax = lambda Bx`; `tol` gates hermiticity
/// and the common-kernel test.
pub fn solve_pencil(a: &Matrix, b: &Matrix, tol: f64) -> Result<GenEigReport> {
    let n = a.require_square("A")?;
    b.require_order(n, "B")?;
    for m in [a, b] {
        if !m.is_hermitian(tol) {
            return Err(Error::NotHermitian { residual: m.hermiticity_residual() });
        }
    }
    if n > tol::MAX_PENCIL_DIM {
        return Err(Error::DimensionTooLarge { dim: n, max: tol::MAX_PENCIL_DIM });
    }
    let a = a.hermitian_part();
    let b = b.hermitian_part();
    if n == 0 {
        return Ok(GenEigReport { pairs: Vec::new(), degenerate: false, note: "empty pencil".into() });
    }
    let kernel = null_space(&a.vstack(&b)?, tol);
    if kernel.cols() > 0 {
        return Ok(GenEigReport {
            pairs: Vec::new(),
            degenerate: true,
            note: format!(
                "A and B share a {}-dimensional kernel; every complex number is an eigenvalue",
                kernel.cols()
            ),
        });
    }
    let condition = condition_number(&b);
    if condition > tol::CONDITION_LIMIT {
        return Err(Error::SingularBWithoutDegeneracy { condition });
    }
    let c = solve(&b, &a)?;
    // Work with C / |C| so coefficients and roots are O(1).
    let c_scale = c.frobenius_norm();
    let roots: Vec<C64> = if c_scale == 0.0 {
        vec![ZERO; n]
    } else {
        let coeffs = characteristic_polynomial(&c.scale_real(1.0 / c_scale))?;
        durand_kerner(&coeffs).into_iter().map(|z| z * c_scale).collect()
    };
    let radius = tol::ROOT_MERGE * c_scale.max(f64::MIN_POSITIVE);
    let singles: Vec<(C64, usize)> = roots.iter().map(|&z| (z, 1)).collect();
    // Roots of high multiplicity come out of the polynomial with errors far
    // above the merge radius, so simple roots are first sharpened from their
    // eigenvector and the clustering is repeated.
    let sharpened: Vec<(C64, usize)> = merge_roots(&singles, radius)
        .into_iter()
        .enumerate()
        .map(|(index, (sigma, m))| {
            if m > 1 {
                return (sigma, m);
            }
            let x = inverse_iteration(&a, &b, sigma, 1, index).remove(0);
            let lambda = refine_lambda(&a, &b, &x);
            (if lambda.is_finite() { lambda } else { sigma }, 1)
        })
        .collect();
    let clusters = merge_roots(&sharpened, radius);
    let form = GramForm::new(b.clone())?;
    let mut pairs = Vec::new();
    let mut missing = 0;
    for (index, &(sigma, m)) in clusters.iter().enumerate() {
        let vectors = inverse_iteration(&a, &b, sigma, m, index);
        let mut found = 0;
        for x in vectors {
            let lambda = if m == 1 { refine_lambda(&a, &b, &x) } else { sigma };
            let lambda = if lambda.is_finite() { lambda } else { sigma };
            let residual = pair_residual(&a, &b, lambda, &x);
            if residual > residual_bound(&a, &b, lambda) {
                continue;
            }
            let sign_class = form.classify(&x, tol::NEUTRAL)?;
            pairs.push(GeneralizedEigenPair { lambda, vector: x, sign_class, residual });
            found += 1;
        }
        missing += m - found;
    }
    pairs.sort_by(|p, q| q.lambda.re.total_cmp(&p.lambda.re).then(q.lambda.im.total_cmp(&p.lambda.im)));
    let note = if missing == 0 {
        String::new()
    } else {
        format!("{missing} eigenvalue(s) counted with multiplicity have no independent eigenvector (defective pencil)")
    };
    Ok(GenEigReport { pairs, degenerate: false, note })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QOrthogonalityEntry {
    pub i: usize,
    pub j: usize,
    /// `|(B x_i, x_j)|`.
    pub residual: f64,
    pub passed: bool,
}

/// Checks `(B x_i, x_j) = 0` for every pair with `lambda_i != conj(lambda_j)`.
pub fn verify_q_orthogonality(report: &GenEigReport, b: &Matrix, tol: f64) -> Result<Vec<QOrthogonalityEntry>> {
    if report.degenerate {
        return Err(Error::DegenerateReport);
    }
    let scale = report.pairs.iter().map(|p| p.lambda.norm()).fold(1.0, f64::max);
    let bound = tol * b.frobenius_norm();
    let mut table = Vec::new();
    for (i, p) in report.pairs.iter().enumerate() {
        b.require_order(p.vector.len(), "B")?;
        for (j, q) in report.pairs.iter().enumerate().skip(i + 1) {
            if (p.lambda - q.lambda.conj()).norm() <= tol * scale {
                continue;
            }
            let residual = inner(&b.mul_vec(&p.vector), &q.vector).norm();
            table.push(QOrthogonalityEntry { i, j, residual, passed: residual <= bound });
        }
    }
    Ok(table)
}

/// With `A` positive definite every eigenvalue is real; returns whether
/// all `|Im lambda| <= 1e-8 max(1, |lambda|)`.
pub fn reality_check(a: &Matrix, _b: &Matrix, report: &GenEigReport) -> Result<bool> {
    let eig = hermitian_eigen(&a.hermitian_part())?;
    let min_eigenvalue = eig.values.last().copied().unwrap_or(0.0);
    if min_eigenvalue <= tol::DEFAULT * a.frobenius_norm() {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    let scale = report.pairs.iter().map(|p| p.lambda.norm()).fold(1.0, f64::max);
    Ok(report.pairs.iter().all(|p| p.lambda.im.abs() <= tol::PENCIL_RESIDUAL * scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lambdas(r: &GenEigReport) -> Vec<C64> {
        r.pairs.iter().map(|p| p.lambda).collect()
    }

    /// Random positive definite matrix `H^2 + I/2`.
    fn pos_def(s: &mut Stream, n: usize) -> Matrix {
        let h = s.hermitian(n, 1.0);
        (&(&h * &h) + &Matrix::identity(n).scale_real(0.5)).hermitian_part()
    }

    fn indefinite(s: &mut Stream, n: usize) -> Matrix {
        let u = s.unitary(n);
        let d: Vec<f64> = (0..n)
            .map(|i| (0.5 + s.uniform().abs()) * if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        (&(&u * &Matrix::diag_real(&d)) * &u.adjoint()).hermitian_part()
    }

    #[test]
    fn common_kernel_is_degenerate() {
        let a = Matrix::diag_real(&[1.0, 0.0, -2.0]);
        let b = Matrix::diag_real(&[-1.0, 0.0, 2.0]);
        let r = solve_pencil(&a, &b, 1e-10).unwrap();
        assert!(r.degenerate && r.pairs.is_empty());
        assert_eq!(verify_q_orthogonality(&r, &b, 1e-8).unwrap_err(), Error::DegenerateReport);
    }

    #[test]
    fn standard_problem() {
        let r = solve_pencil(&Matrix::diag_real(&[2.0, 3.0]), &Matrix::identity(2), 1e-10).unwrap();
        let l = lambdas(&r);
        assert!((l[0] - 3.0).norm() < 1e-12 && (l[1] - 2.0).norm() < 1e-12);
        assert!(r.pairs.iter().all(|p| p.sign_class == VectorClass::Positive));
    }

    #[test]
    fn indefinite_weight_signs_follow_eigenvalues() {
        let a = Matrix::identity(2);
        let b = Matrix::diag_real(&[1.0, -1.0]);
        let r = solve_pencil(&a, &b, 1e-10).unwrap();
        let l = lambdas(&r);
        assert!((l[0] - 1.0).norm() < 1e-12 && (l[1] + 1.0).norm() < 1e-12);
        assert_eq!(r.pairs[0].sign_class, VectorClass::Positive);
        assert_eq!(r.pairs[1].sign_class, VectorClass::Negative);
        let table = verify_q_orthogonality(&r, &b, 1e-8).unwrap();
        assert_eq!(table.len(), 1);
        assert!(table[0].residual < 1e-14);
        assert!(reality_check(&a, &b, &r).unwrap());
    }

    #[test]
    fn repeated_eigenvalue_gets_full_eigenspace() {
        let r = solve_pencil(&Matrix::identity(3).scale_real(2.0), &Matrix::identity(3), 1e-10).unwrap();
        assert_eq!(r.pairs.len(), 3);
        assert!(r.note.is_empty());
        assert!(verify_q_orthogonality(&r, &Matrix::identity(3), 1e-8).unwrap().is_empty());
        let v = Matrix::from_columns(3, &r.pairs.iter().map(|p| p.vector.clone()).collect::<Vec<_>>()).unwrap();
        assert!((&(&v.adjoint() * &v) - &Matrix::identity(3)).frobenius_norm() < 1e-10);
    }

    #[test]
    fn complex_eigenvalues_have_neutral_vectors() {
        // A = [[0,1],[1,0]], B = diag(1,-1): lambda = +-i.
        let a = Matrix::real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let b = Matrix::diag_real(&[1.0, -1.0]);
        let r = solve_pencil(&a, &b, 1e-10).unwrap();
        assert_eq!(r.pairs.len(), 2);
        for p in &r.pairs {
            assert!((p.lambda.norm() - 1.0).abs() < 1e-12 && p.lambda.re.abs() < 1e-12);
            assert_eq!(p.sign_class, VectorClass::Neutral);
        }
        // lambda_0 = conj(lambda_1), so the pair is exempt.
        assert!(verify_q_orthogonality(&r, &b, 1e-8).unwrap().is_empty());
        assert!(matches!(reality_check(&a, &b, &r), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn defective_pencil_reports_missing_vectors() {
        // A = [[1,1],[1,0]], B = [[0,1],[1,0]]: C = [[1,0],[1,1]], Jordan block at 1.
        let a = Matrix::real(2, 2, &[1.0, 1.0, 1.0, 0.0]);
        let b = Matrix::real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let r = solve_pencil(&a, &b, 1e-10).unwrap();
        assert_eq!(r.pairs.len(), 1);
        assert!((r.pairs[0].lambda - 1.0).norm() < 1e-6);
        assert_eq!(r.pairs[0].sign_class, VectorClass::Neutral);
        assert!(!r.note.is_empty());
    }

    #[test]
    fn rejects_bad_pencils() {
        let bad = Matrix::real(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(solve_pencil(&bad, &Matrix::identity(2), 1e-10), Err(Error::NotHermitian { .. })));
        let big = Matrix::identity(9);
        assert!(matches!(solve_pencil(&big, &big, 1e-10), Err(Error::DimensionTooLarge { dim: 9, max: 8 })));
        let r = solve_pencil(&Matrix::identity(2), &Matrix::diag_real(&[1.0, 0.0]), 1e-10);
        assert!(matches!(r, Err(Error::SingularBWithoutDegeneracy { .. })));
    }

    #[test]
    fn durand_kerner_matches_quadratic_formula() {
        let mut s = Stream::new(2024, "dk-quadratic");
        for _ in 0..1000 {
            let a = s.hermitian(2, 2.0);
            let b = indefinite(&mut s, 2);
            let c = solve(&b, &a).unwrap();
            let tr = c.trace();
            let det = c[(0, 0)] * c[(1, 1)] - c[(0, 1)] * c[(1, 0)];
            let disc = (tr * tr - det * 4.0).sqrt();
            let expected = [(tr + disc) / 2.0, (tr - disc) / 2.0];
            let coeffs = characteristic_polynomial(&c).unwrap();
            let mut got = durand_kerner(&coeffs);
            if (got[0] - expected[0]).norm() > (got[1] - expected[0]).norm() {
                got.swap(0, 1);
            }
            let scale = tr.norm().max(det.norm().sqrt()).max(1.0);
            let gap = (expected[0] - expected[1]).norm();
            if gap < 1e-4 * scale {
                continue;
            }
            for (e, g) in expected.iter().zip(&got) {
                assert!((e - g).norm() <= 1e-10 * scale, "{e} vs {g}");
            }
        }
    }

    #[test]
    fn polynomial_of_known_matrix() {
        // diag(1, 2, 3): (z-1)(z-2)(z-3) = z^3 - 6z^2 + 11z - 6.
        let p = characteristic_polynomial(&Matrix::diag_real(&[1.0, 2.0, 3.0])).unwrap();
        let want = [-6.0, 11.0, -6.0, 1.0];
        for (c, w) in p.iter().zip(want) {
            assert!((c - w).norm() < 1e-12);
        }
        let mut roots = durand_kerner(&p);
        roots.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (r, w) in roots.iter().zip([1.0, 2.0, 3.0]) {
            assert!((r - w).norm() < 1e-12);
        }
    }

    #[test]
    fn random_definite_pencils() {
        let mut s = Stream::new(77, "definite-pencils");
        for trial in 0..100 {
            let n = 2 + trial % 7;
            let a = pos_def(&mut s, n);
            let b = indefinite(&mut s, n);
            let r = solve_pencil(&a, &b, 1e-10).unwrap();
            assert_eq!(r.pairs.len(), n, "trial {trial}: {}", r.note);
            assert!(reality_check(&a, &b, &r).unwrap());
            for p in &r.pairs {
                assert!(p.residual <= residual_bound(&a, &b, p.lambda));
                let want = if p.lambda.re > 0.0 { VectorClass::Positive } else { VectorClass::Negative };
                assert_eq!(p.sign_class, want, "trial {trial}");
            }
            for e in verify_q_orthogonality(&r, &b, 1e-8).unwrap() {
                assert!(e.passed, "trial {trial}: {e:?}");
            }
        }
    }

    #[test]
    fn planted_common_kernel() {
        let mut s = Stream::new(5, "planted");
        for _ in 0..50 {
            let n = 2 + s.index(6);
            let v = s.unit_vector(n);
            let p = &Matrix::identity(n) - &(&Matrix::column_vector(&v) * &Matrix::column_vector(&v).adjoint());
            let a = (&(&p * &s.hermitian(n, 1.0)) * &p).hermitian_part();
            let b = (&(&p * &s.hermitian(n, 1.0)) * &p).hermitian_part();
            assert!(solve_pencil(&a, &b, 1e-10).unwrap().degenerate);
        }
    }

    #[test]
    fn json_report_shape() {
        let r = solve_pencil(&Matrix::identity(2), &Matrix::diag_real(&[1.0, -1.0]), 1e-10).unwrap();
        let v = r.to_json_value();
        assert_eq!(v["degenerate"], false);
        assert_eq!(v["pairs"][0]["class"], "Positive");
        assert_eq!(v["pairs"][1]["lambda"][0], -1.0);
        assert_eq!(v["pairs"][0]["vector"]["shape"], serde_json::json!([2, 1]));
    }
}
