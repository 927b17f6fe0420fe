//! Gaussian wave packet `f(x) = int g(k) e^{ikx} dk` with `g(k) = e^{-alpha (k-k0)^2}`.
//!
//! Widths are full widths at which the densities `|f|^2` and `|g|^2` fall to
//! `1/e` of their peak: `dx = 2 sqrt(2 alpha)` and `dk = 2 / sqrt(2 alpha)`.
//! Each is `2 sqrt(2)` times the standard deviation of the corresponding
//! density (`sqrt(alpha)` and `1 / (2 sqrt(alpha))`), so `dx dk = 4` while the
//! statistical product is `1/2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, C64, I, ZERO};
use crate::uncertainty::{verify_relation, RelationId, StateVector, UncertaintyReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WavePacketParams {
    pub alpha: f64,
    pub k0: f64,
}

impl WavePacketParams {
    pub fn new(alpha: f64, k0: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidAlpha(alpha));
        }
        if !k0.is_finite() {
            return Err(Error::InvalidArgument(format!("k0 must be finite, got {k0}")));
        }
        Ok(Self { alpha, k0 })
    }

    /// `|f(x)|^2 = (pi / alpha) e^{-x^2 / (2 alpha)}`.
    pub fn density(&self, x: f64) -> f64 {
        std::f64::consts::PI / self.alpha * (-x * x / (2.0 * self.alpha)).exp()
    }

    /// `f(x) = sqrt(pi / alpha) e^{-x^2 / (4 alpha)} e^{i k0 x}`.
    pub fn amplitude(&self, x: f64) -> C64 {
        let magnitude = (std::f64::consts::PI / self.alpha).sqrt() * (-x * x / (4.0 * self.alpha)).exp();
        C64::from_polar(magnitude, self.k0 * x)
    }
}

/// `n` equally spaced points from `x_min` to `x_max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::InvalidGrid(format!("need x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n < 8 {
            return Err(Error::InvalidGrid(format!("need at least 8 points, got {n}")));
        }
        Ok(Self { x_min, x_max, n })
    }

    /// Symmetric grid `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n).map(|i| self.x_min + i as f64 * h).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Widths {
    pub dx: f64,
    pub dk: f64,
    pub product: f64,
}

pub fn gaussian_widths(p: &WavePacketParams) -> Result<Widths> {
    let p = WavePacketParams::new(p.alpha, p.k0)?;
    let s = (2.0 * p.alpha).sqrt();
    let (dx, dk) = (2.0 * s, 2.0 / s);
    Ok(Widths { dx, dk, product: dx * dk })
}

/// Composite Simpson rule with `intervals` (even, at least 2) subintervals.
pub fn simpson<T>(f: impl Fn(f64) -> T, a: f64, b: f64, intervals: usize) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Copy,
{
    assert!(intervals >= 2 && intervals.is_multiple_of(2), "Simpson needs an even number of intervals");
    let h = (b - a) / intervals as f64;
    let mut sum = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum = sum + f(a + i as f64 * h) * w;
    }
    sum * (h / 3.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacketSamples {
    pub x: Vec<f64>,
    /// `|f(x)|^2` by quadrature.
    pub numeric: Vec<f64>,
    /// `(pi / alpha) e^{-x^2 / (2 alpha)}`.
    pub closed: Vec<f64>,
}

impl PacketSamples {
    /// `max |numeric - closed|` over the grid, relative to the peak `pi / alpha`.
    pub fn max_relative_error(&self, p: &WavePacketParams) -> f64 {
        let peak = p.density(0.0);
        self.numeric
            .iter()
            .zip(&self.closed)
            .map(|(a, b)| (a - b).abs() / peak)
            .fold(0.0, f64::max)
    }
}

/// Half width a grid needs so the packet has decayed: `6 sqrt(2 alpha)`.
pub fn required_half_width(p: &WavePacketParams) -> f64 {
    6.0 * (2.0 * p.alpha).sqrt()
}

/// `|f(x)|^2` on the grid by Simpson quadrature over
/// `k in [k0 - 8/sqrt(alpha), k0 + 8/sqrt(alpha)]` with `4n` intervals.
pub fn sampled_packet(g: &Grid, p: &WavePacketParams) -> Result<PacketSamples> {
    let g = Grid::new(g.x_min, g.x_max, g.n)?;
    let p = WavePacketParams::new(p.alpha, p.k0)?;
    let required = required_half_width(&p);
    if g.x_min.abs() < required || g.x_max.abs() < required {
        return Err(Error::GridTooNarrow { required });
    }
    let half = 8.0 / p.alpha.sqrt();
    let x = g.points();
    let numeric = x
        .iter()
        .map(|&x| {
            let f = simpson(
                |k| C64::from_polar((-p.alpha * (k - p.k0).powi(2)).exp(), k * x),
                p.k0 - half,
                p.k0 + half,
                4 * g.n,
            );
            f.norm_sqr()
        })
        .collect();
    let closed = x.iter().map(|&x| p.density(x)).collect();
    Ok(PacketSamples { x, numeric, closed })
}

/// Position operator `diag(x)` on the grid.
pub fn position_operator(g: &Grid) -> Matrix {
    Matrix::diag_real(&g.points())
}

/// Momentum `-i D` with `D` the periodic central difference; exactly hermitian.
pub fn momentum_operator(g: &Grid) -> Matrix {
    let n = g.n;
    let c = 1.0 / (2.0 * g.spacing());
    let mut p = Matrix::zeros(n, n);
    for i in 0..n {
        p[(i, (i + 1) % n)] += -I * c;
        p[((i + 1) % n, i)] += I * c;
    }
    p
}

/// Robertson's bound for the discretized position and momentum in the
/// normalized sampled packet, with the commutator formed explicitly.
pub fn discrete_robertson_check(g: &Grid, p: &WavePacketParams) -> Result<UncertaintyReport> {
    let g = Grid::new(g.x_min, g.x_max, g.n)?;
    let p = WavePacketParams::new(p.alpha, p.k0)?;
    let x = position_operator(&g);
    let mom = momentum_operator(&g);
    let psi: Vec<C64> = g.points().iter().map(|&x| p.amplitude(x)).collect();
    if psi.iter().all(|z| *z == ZERO) {
        return Err(Error::InvalidGrid("packet vanishes on every grid point".into()));
    }
    let phi = StateVector::normalized(&psi)?;
    verify_relation(RelationId::RobertsonHilbert, &x, &mom, &Matrix::identity(g.n), &phi, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(alpha: f64) -> WavePacketParams {
        WavePacketParams::new(alpha, 0.0).unwrap()
    }

    #[test]
    fn width_examples() {
        let w = gaussian_widths(&params(0.5)).unwrap();
        assert_eq!((w.dx, w.dk, w.product), (2.0, 2.0, 4.0));
        let w = gaussian_widths(&params(2.0)).unwrap();
        assert_eq!((w.dx, w.dk, w.product), (4.0, 1.0, 4.0));
        for alpha in [0.01, 0.1, 1.0, 10.0, 100.0] {
            assert_eq!(gaussian_widths(&params(alpha)).unwrap().product, 4.0);
        }
        let bad = WavePacketParams { alpha: -1.0, k0: 0.0 };
        assert_eq!(gaussian_widths(&bad).unwrap_err(), Error::InvalidAlpha(-1.0));
    }

    #[test]
    fn closed_form_values() {
        let p = params(1.0);
        assert!((p.density(0.0) - PI).abs() < 1e-15);
        let s = 2.0f64.sqrt();
        assert!((p.density(s) - PI / std::f64::consts::E).abs() < 1e-15);
        assert!((p.density(-s) - PI / std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        for (alpha, k0) in [(1.0, 0.0), (0.5, 1.5), (2.0, -3.0)] {
            let p = WavePacketParams::new(alpha, k0).unwrap();
            let half = required_half_width(&p);
            let s = sampled_packet(&Grid::symmetric(half, 129).unwrap(), &p).unwrap();
            assert!(s.max_relative_error(&p) <= 1e-6, "alpha {alpha}");
            let mid = s.numeric[64];
            assert!((mid - p.density(0.0)).abs() <= 1e-6 * p.density(0.0));
        }
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let p = params(1.0);
        let r = sampled_packet(&Grid::symmetric(3.0, 64).unwrap(), &p);
        assert!(matches!(r, Err(Error::GridTooNarrow { .. })));
        assert!(Grid::new(1.0, -1.0, 16).is_err());
        assert!(Grid::new(-1.0, 1.0, 7).is_err());
    }

    #[test]
    fn simpson_is_fourth_order() {
        // int_0^1 e^x dx = e - 1.
        let exact = std::f64::consts::E - 1.0;
        let err = |m| (simpson(f64::exp, 0.0, 1.0, m) - exact).abs();
        let (e1, e2) = (err(8), err(16));
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.1, "order {order}");
        assert!((simpson(|x: f64| x.powi(3), 0.0, 2.0, 2) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn discretized_operators_are_hermitian() {
        let g = Grid::symmetric(12.0, 64).unwrap();
        assert!(position_operator(&g).hermiticity_residual() <= 1e-12);
        assert!(momentum_operator(&g).hermiticity_residual() <= 1e-12);
    }

    #[test]
    fn discrete_robertson_holds_at_every_resolution() {
        for n in [8, 16, 64, 128] {
            for k0 in [0.0, 0.7] {
                let r = discrete_robertson_check(&Grid::symmetric(12.0, n).unwrap(), &WavePacketParams::new(1.0, k0).unwrap())
                    .unwrap();
                assert!(r.margin >= -1e-10, "n {n}: {r:?}");
            }
        }
    }
}
