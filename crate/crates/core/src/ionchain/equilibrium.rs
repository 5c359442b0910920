//! Equilibrium positions of a harmonically confined Coulomb chain.

use crate::constants::VACUUM_PERMITTIVITY;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

const MAX_NEWTON_ITERATIONS: usize = 200;

/// Dimensionless equilibrium positions u_1 < ... < u_N solving
/// u_j = sum_{n<j} (u_j - u_n)^{-2} - sum_{n>j} (u_j - u_n)^{-2}.
///
/// Newton iteration with an analytic Jacobian and backtracking line search,
/// started from a linear-spacing guess; converged when the force residual
/// drops below 1e-12.
pub fn equilibrium_dimensionless(n: usize) -> Result<Vec<f64>> {
    if n == 1 {
        return Ok(vec![0.0]);
    }
    if n == 0 {
        return Err(Error::InvalidModel("need at least one ion".into()));
    }
    // Minimum-spacing estimate ~ 2.018 / N^0.559 sets the guess scale.
    let spacing = 2.018 / (n as f64).powf(0.559);
    let mut u = DVector::<f64>::from_fn(n, |j, _| (j as f64 - (n as f64 - 1.0) / 2.0) * spacing);

    let force = |u: &DVector<f64>| -> DVector<f64> {
        let mut f = u.clone();
        for j in 0..n {
            for l in 0..n {
                if l == j {
                    continue;
                }
                let d = u[j] - u[l];
                f[j] -= d.signum() / (d * d);
            }
        }
        f
    };

    let mut res = force(&u);
    for _ in 0..MAX_NEWTON_ITERATIONS {
        if res.amax() < 1e-12 {
            return Ok(u.iter().copied().collect());
        }
        let mut jac = DMatrix::<f64>::identity(n, n);
        for j in 0..n {
            for l in 0..n {
                if l == j {
                    continue;
                }
                let d: f64 = u[j] - u[l];
                let w = 2.0 / d.abs().powi(3);
                jac[(j, j)] += w;
                jac[(j, l)] -= w;
            }
        }
        let step = jac
            .lu()
            .solve(&res)
            .ok_or_else(|| Error::EquilibriumNonConvergence(MAX_NEWTON_ITERATIONS))?;
        // Backtrack until the residual decreases and the ordering survives.
        let mut scale = 1.0;
        let norm0 = res.norm();
        loop {
            let trial = &u - &step * scale;
            let ordered = trial.as_slice().windows(2).all(|w| w[1] > w[0]);
            if ordered {
                let trial_res = force(&trial);
                if trial_res.norm() < norm0 {
                    u = trial;
                    res = trial_res;
                    break;
                }
            }
            scale *= 0.5;
            if scale < 1e-8 {
                return Err(Error::EquilibriumNonConvergence(MAX_NEWTON_ITERATIONS));
            }
        }
    }
    Err(Error::EquilibriumNonConvergence(MAX_NEWTON_ITERATIONS))
}

/// Length scale l0 = (q^2 / (4 pi eps0 M omega_z^2))^{1/3}.
pub fn length_scale(mass: f64, charge: f64, omega_z: f64) -> f64 {
    (charge * charge / (4.0 * PI * VACUUM_PERMITTIVITY * mass * omega_z * omega_z)).cbrt()
}

/// Equilibrium positions in meters.
pub fn equilibrium_positions(n: usize, omega_z: f64, mass: f64, charge: f64) -> Result<Vec<f64>> {
    let l0 = length_scale(mass, charge, omega_z);
    Ok(equilibrium_dimensionless(n)?
        .into_iter()
        .map(|u| u * l0)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bisection oracle for the symmetric two-ion problem: the outer ion
    /// position v > 0 solves v - 1/(2v)^2 = 0.
    fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn two_ions_match_bisection_oracle() {
        let want = bisect(|v| v - 1.0 / (4.0 * v * v), 0.1, 2.0);
        let u = equilibrium_dimensionless(2).unwrap();
        assert!((u[1] - want).abs() < 1e-10);
        assert!((u[0] + want).abs() < 1e-10);
        // Closed form (1/2)^{2/3}.
        assert!((want - 0.5f64.powf(2.0 / 3.0)).abs() < 1e-10);
    }

    #[test]
    fn three_ions_match_bisection_oracle() {
        // Outer ion at v solving v - 1/v^2 - 1/(2v)^2 = 0, center at 0.
        let want = bisect(|v| v - 1.0 / (v * v) - 1.0 / (4.0 * v * v), 0.5, 2.0);
        let u = equilibrium_dimensionless(3).unwrap();
        assert!(u[1].abs() < 1e-10);
        assert!((u[2] - want).abs() < 1e-10);
        assert!((want - 1.25f64.cbrt()).abs() < 1e-10);
    }

    #[test]
    fn antisymmetric_for_any_count() {
        for n in [2usize, 5, 8, 16, 21] {
            let u = equilibrium_dimensionless(n).unwrap();
            for j in 0..n {
                assert!(
                    (u[j] + u[n - 1 - j]).abs() < 1e-10,
                    "n={n} j={j}: {} vs {}",
                    u[j],
                    u[n - 1 - j]
                );
            }
            // Force residual is tiny (re-evaluated independently).
            for j in 0..n {
                let mut f = u[j];
                for l in 0..n {
                    if l != j {
                        let d: f64 = u[j] - u[l];
                        f -= d.signum() / (d * d);
                    }
                }
                assert!(f.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn physical_scale() {
        // Ca-40 at omega_z = 2 pi x 150 kHz: l0 around 15-16 um, so the
        // central spacing of a 16-ion chain lands near 10 um.
        let mass = 40.0 * crate::constants::ATOMIC_MASS_UNIT;
        let q = crate::constants::ELEMENTARY_CHARGE;
        let omega_z = std::f64::consts::TAU * 150e3;
        let z = equilibrium_positions(16, omega_z, mass, q).unwrap();
        let central_gap = z[8] - z[7];
        assert!(
            central_gap > 3e-6 && central_gap < 12e-6,
            "gap = {central_gap}"
        );
    }
}
