//! Seeded inputs shared by the benchmarks.

use krein_core::random::Stream;
use krein_core::Matrix;

/// Random hermitian matrix of order `n`, fixed per `n`.
pub fn hermitian(n: usize) -> Matrix {
    Stream::new(n as u64, "bench-hermitian").hermitian(n, 1.0)
}

/// Pencil `(A, B)` with both hermitian and `B` well conditioned.
pub fn pencil(n: usize) -> (Matrix, Matrix) {
    let mut s = Stream::new(n as u64, "bench-pencil");
    let a = s.hermitian(n, 1.0);
    let signs: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 2.0 } else { -2.0 }).collect();
    let b = &Matrix::diag_real(&signs) + &s.hermitian(n, 0.1);
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inputs_are_hermitian_and_deterministic() {
        assert_eq!(hermitian(5), hermitian(5));
        let (a, b) = pencil(4);
        assert!(a.is_hermitian(1e-12) && b.is_hermitian(1e-12));
    }
}
