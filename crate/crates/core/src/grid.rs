//! Angle grids for boundary sweeps and frequency scans.

use alloc::vec::Vec;
use core::f64::consts::PI;


#[allow(unused_imports)]
use num_traits::Float;

use crate::Complex;

pub const DEFAULT_BOUNDARY_POINTS: usize = 2048;
pub const DEFAULT_THETA_L_POINTS: usize = 720;
/// Angles closer than this to a plant pole angle are dropped from sweeps.
pub const POLE_ANGLE_TOL: f64 = 1e-9;

/// `n` uniform angles strictly inside `(0, pi)`.
pub fn open_half_circle(n: usize) -> Vec<f64> {
    (1..=n).map(|k| PI * k as f64 / (n + 1) as f64).collect()
}

/// `n + 1` uniform angles on `[0, pi]`, endpoints included.
pub fn closed_half_circle(n: usize) -> Vec<f64> {
    (0..=n).map(|k| PI * k as f64 / n as f64).collect()
}

/// `n` uniform angles on `[0, 2 pi)`.
pub fn full_circle(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// `n` log-spaced angles from `lo` to `hi` inclusive.
pub fn log_spaced(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Drops every angle within [`POLE_ANGLE_TOL`] of the argument of a pole
/// lying on the unit circle (either sign of the angle).
pub fn exclude_pole_angles(grid: &[f64], poles: &[Complex]) -> Vec<f64> {
    let on_circle: Vec<f64> = poles
        .iter()
        .filter(|p| (p.norm() - 1.0).abs() < 1e-6)
        .map(|p| p.arg().abs())
        .collect();
    grid.iter()
        .copied()
        .filter(|t| {
            let folded = wrap_angle(*t).abs();
            on_circle.iter().all(|a| (folded - a).abs() > POLE_ANGLE_TOL)
        })
        .collect()
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a % (2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    } else if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_have_expected_shape() {
        let g = open_half_circle(4);
        assert_eq!(g.len(), 4);
        assert!(g[0] > 0.0 && g[3] < PI);
        let c = closed_half_circle(4);
        assert_eq!(c.len(), 5);
        assert_eq!(c[0], 0.0);
        assert_eq!(c[4], PI);
        assert_eq!(full_circle(720).len(), 720);
        let l = log_spaced(3, 0.01, 1.0);
        assert!((l[1] - 0.1).abs() < 1e-15 && (l[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pole_angles_are_removed() {
        let grid = [0.5, PI / 2.0, 2.0];
        let poles = [Complex::new(0.0, 1.0), Complex::new(0.0, -1.0), Complex::new(0.3, 0.0)];
        assert_eq!(exclude_pole_angles(&grid, &poles), [0.5, 2.0]);
    }

    #[test]
    fn wrapping() {
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
    }
}
