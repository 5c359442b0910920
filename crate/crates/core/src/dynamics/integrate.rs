//! Adaptive embedded Runge-Kutta integration (Dormand-Prince 5(4)).
//!
//! The generators here are time-independent, so the right-hand side takes no
//! explicit time argument. Output lands exactly on the requested grid by
//! clamping the step to the next grid time; grid values therefore carry the
//! full fifth-order accuracy.

use crate::{C64, Error, Result};
use nalgebra::{DMatrix, DVector};

/// States the integrator can advance: anything exposing its contiguous
/// complex storage.
pub trait OdeState: Clone {
    fn data(&self) -> &[C64];
    fn data_mut(&mut self) -> &mut [C64];
}

impl OdeState for DVector<C64> {
    fn data(&self) -> &[C64] {
        self.as_slice()
    }
    fn data_mut(&mut self) -> &mut [C64] {
        self.as_mut_slice()
    }
}

impl OdeState for DMatrix<C64> {
    fn data(&self) -> &[C64] {
        self.as_slice()
    }
    fn data_mut(&mut self) -> &mut [C64] {
        self.as_mut_slice()
    }
}

/// Relative/absolute tolerances and step limits.
#[derive(Debug, Clone)]
pub struct StepController {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; estimated from the first derivative when absent.
    pub h_init: Option<f64>,
    pub max_steps: usize,
    /// Consecutive rejections allowed before aborting.
    pub max_rejects: usize,
}

impl Default for StepController {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            h_init: None,
            max_steps: 50_000_000,
            max_rejects: 60,
        }
    }
}

impl StepController {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// 4th-order weights for the error estimate.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Workspace for repeated Dormand-Prince steps on one state shape.
pub struct Dp5<S: OdeState> {
    k: Vec<S>,
    tmp: S,
    pub controller: StepController,
}

impl<S: OdeState> Dp5<S> {
    pub fn new(shape: &S, controller: StepController) -> Self {
        Self {
            k: vec![shape.clone(); 7],
            tmp: shape.clone(),
            controller,
        }
    }

    /// One step of size h from y; `k1` caches f(y) when available (FSAL).
    /// Writes the 5th-order solution into `out` and returns the weighted
    /// error norm (<= 1 means acceptable).
    pub fn step<F>(&mut self, rhs: &mut F, y: &S, h: f64, k1_ready: bool, out: &mut S) -> f64
    where
        F: FnMut(&S, &mut S),
    {
        if !k1_ready {
            rhs(y, &mut self.k[0]);
        }
        for stage in 0..6 {
            // tmp = y + h * sum_j A[stage][j] k_j
            {
                let t = self.tmp.data_mut();
                t.copy_from_slice(y.data());
                for (j, row) in A[stage].iter().enumerate().take(stage + 1) {
                    if *row == 0.0 {
                        continue;
                    }
                    let c = *row * h;
                    let kj = self.k[j].data();
                    for (ti, ki) in t.iter_mut().zip(kj) {
                        *ti += c * ki;
                    }
                }
            }
            rhs(&self.tmp, &mut self.k[stage + 1]);
        }
        // The last stage argument y + h * sum A[5][j] k_j is already the
        // 5th-order solution.
        out.data_mut().copy_from_slice(self.tmp.data());

        // Weighted rms error between 5th and 4th order solutions.
        let mut err_sq = 0.0f64;
        let n = y.data().len();
        for i in 0..n {
            let mut e = C64::new(0.0, 0.0);
            for (j, (w5, w4)) in A[5].iter().chain([&0.0]).zip(B4.iter()).enumerate() {
                let d = *w5 - *w4;
                if d != 0.0 {
                    e += h * d * self.k[j].data()[i];
                }
            }
            let scale = self.controller.atol
                + self.controller.rtol * y.data()[i].norm().max(out.data()[i].norm());
            let r = e.norm() / scale;
            err_sq += r * r;
        }
        (err_sq / n as f64).sqrt()
    }

    /// Move k7 (f at the accepted point) into k1 for FSAL reuse.
    pub fn promote_fsal(&mut self) {
        self.k.swap(0, 6);
    }

    /// Estimate an initial step from the derivative magnitude.
    pub fn estimate_h0<F>(&mut self, rhs: &mut F, y: &S) -> f64
    where
        F: FnMut(&S, &mut S),
    {
        rhs(y, &mut self.k[0]);
        let ynorm = rms(y.data());
        let fnorm = rms(self.k[0].data());
        if fnorm <= 0.0 {
            return 1e-6;
        }
        0.01 * (ynorm + self.controller.atol) / fnorm
    }
}

fn rms(x: &[C64]) -> f64 {
    (x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64).sqrt()
}

/// Integrate from `t_grid[0]` to the end of the grid, invoking `observe`
/// exactly at every grid time (including the first). Returns the final
/// state.
pub fn integrate_grid<S, F, O>(
    rhs: &mut F,
    y0: &S,
    t_grid: &[f64],
    controller: &StepController,
    mut observe: O,
) -> Result<S>
where
    S: OdeState,
    F: FnMut(&S, &mut S),
    O: FnMut(usize, f64, &S) -> Result<()>,
{
    if t_grid.is_empty() {
        return Err(Error::Integration("empty time grid".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Integration("grid must be strictly increasing".into()));
    }
    let mut y = y0.clone();
    observe(0, t_grid[0], &y)?;
    if t_grid.len() == 1 {
        return Ok(y);
    }

    let mut stepper = Dp5::new(&y, controller.clone());
    let mut h = controller
        .h_init
        .unwrap_or_else(|| stepper.estimate_h0(rhs, &y));
    let mut k1_ready = controller.h_init.is_none();
    let mut t = t_grid[0];
    let mut out = y.clone();
    let mut steps = 0usize;
    let mut rejects_in_row = 0usize;

    for (gi, &tg) in t_grid.iter().enumerate().skip(1) {
        while t < tg {
            let clamped = h.min(tg - t);
            let err = stepper.step(rhs, &y, clamped, k1_ready, &mut out);
            steps += 1;
            if steps > controller.max_steps {
                return Err(Error::Integration(format!(
                    "step budget exhausted at t = {t:.6e}"
                )));
            }
            if err <= 1.0 || clamped <= 1e-14 * t.abs().max(1.0) {
                t += clamped;
                std::mem::swap(&mut y, &mut out);
                stepper.promote_fsal();
                k1_ready = true;
                rejects_in_row = 0;
                let grow = if err > 0.0 {
                    (0.9 * err.powf(-0.2)).min(5.0)
                } else {
                    5.0
                };
                let grown = clamped * grow;
                // A grid-clamped step must not shrink the adaptive step.
                h = if clamped < h { grown.max(h) } else { grown };
            } else {
                rejects_in_row += 1;
                if rejects_in_row > controller.max_rejects {
                    return Err(Error::Integration(format!(
                        "tolerance failure after {} step halvings at t = {t:.6e} (err = {err:.3e})",
                        controller.max_rejects
                    )));
                }
                h = clamped * (0.9 * err.powf(-0.2)).max(0.1);
                k1_ready = true; // k1 still holds f(y)
            }
        }
        observe(gi, tg, &y)?;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_scalarized() {
        // y' = -y on a 1-vector; exact e^{-t}.
        let y0 = DVector::from_vec(vec![C64::new(1.0, 0.0)]);
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.5).collect();
        let mut vals = Vec::new();
        let ctrl = StepController::default();
        let mut rhs = |y: &DVector<C64>, out: &mut DVector<C64>| {
            out.copy_from(y);
            out[0] *= C64::new(-1.0, 0.0);
        };
        let yf = integrate_grid(&mut rhs, &y0, &grid, &ctrl, |_, t, y| {
            vals.push((t, y[0].re));
            Ok(())
        })
        .unwrap();
        for (t, v) in vals {
            assert!((v - (-t).exp()).abs() < 1e-9, "t={t} v={v}");
        }
        assert!((yf[0].re - (-5.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn oscillator_phase_accuracy() {
        // y' = i w y, exact phase evolution.
        let w = 3.0;
        let y0 = DVector::from_vec(vec![C64::new(1.0, 0.0)]);
        let grid = vec![0.0, 2.0, 7.0];
        let mut rhs = |y: &DVector<C64>, out: &mut DVector<C64>| {
            out[0] = C64::new(0.0, w) * y[0];
        };
        let yf = integrate_grid(&mut rhs, &y0, &grid, &StepController::default(), |_, _, _| Ok(()))
            .unwrap();
        let exact = C64::from_polar(1.0, w * 7.0);
        assert!((yf[0] - exact).norm() < 1e-7);
    }

    #[test]
    fn matrix_state_supported() {
        // M' = -M elementwise on a 2x2.
        let m0 = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(2.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(-1.0, 0.5),
            ],
        );
        let grid = vec![0.0, 1.0];
        let mut rhs = |y: &DMatrix<C64>, out: &mut DMatrix<C64>| {
            out.copy_from(y);
            out.iter_mut().for_each(|v| *v = -*v);
        };
        let ctrl = StepController::with_tolerances(1e-11, 1e-13);
        let mf = integrate_grid(&mut rhs, &m0, &grid, &ctrl, |_, _, _| Ok(())).unwrap();
        let scale = (-1.0f64).exp();
        assert!((mf - m0 * C64::new(scale, 0.0)).camax() < 1e-9);
    }
}
