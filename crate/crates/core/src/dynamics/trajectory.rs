//! Monte-Carlo wavefunction (quantum jump) unraveling of the master
//! equation.
//!
//! Between jumps the state evolves under -i H_eff; a jump fires when the
//! squared norm crosses a uniform threshold, with the crossing time resolved
//! by bisection. Every trajectory draws from its own counter-based RNG
//! stream derived from (seed, trajectory index), so ensembles are
//! reproducible and order-independent.

use super::integrate::{Dp5, StepController};
use super::krylov::{build_arnoldi, KrylovOptions};
use super::lindblad::{LindbladSystem, NamedOp, Propagator};
use super::reduce::reduced_state_vec;
use super::series::ObservableSeries;
use crate::netmodel::SpaceDescriptor;
use crate::{C64, Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Ensemble controls.
#[derive(Debug, Clone)]
pub struct TrajectoryPlan {
    pub n_traj: usize,
    pub seed: u64,
    pub propagator: Propagator,
}

impl TrajectoryPlan {
    pub fn new(n_traj: usize, seed: u64) -> Self {
        Self {
            n_traj,
            seed,
            propagator: Propagator::default(),
        }
    }
}

/// Ensemble results: mean tracks with standard errors, plus (optionally) the
/// ensemble-averaged reduced system-spin state at every grid time.
pub struct TrajectoryOutput {
    pub series: ObservableSeries,
    pub mean_reduced: Option<Vec<DMatrix<C64>>>,
}

/// Relative bisection accuracy for the jump-time search within a step.
const JUMP_TIME_REL: f64 = 1e-10;

struct JumpMachinery<'a> {
    system: &'a LindbladSystem,
    rng: ChaCha12Rng,
    threshold: f64,
    scratch: DVector<C64>,
}

impl<'a> JumpMachinery<'a> {
    fn new(system: &'a LindbladSystem, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let threshold = rng.gen::<f64>();
        Self {
            system,
            rng,
            threshold,
            scratch: DVector::zeros(system.dim()),
        }
    }

    /// Choose a channel with probability proportional to Gamma_k |L_k psi|^2,
    /// apply it, renormalize and draw the next threshold.
    fn fire(&mut self, psi: &mut DVector<C64>) -> Result<()> {
        let mut weights = Vec::new();
        let mut total = 0.0;
        for (rate, l) in self.system.jump_channels() {
            l.apply_into(psi.as_slice(), self.scratch.as_mut_slice());
            let w = rate * self.scratch.norm_squared();
            weights.push(w);
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::Integration(
                "norm threshold crossed with no open jump channel".into(),
            ));
        }
        let u = self.rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = weights.len() - 1;
        for (k, w) in weights.iter().enumerate() {
            acc += w;
            if u <= acc {
                chosen = k;
                break;
            }
        }
        let (_, l) = self
            .system
            .jump_channels()
            .nth(chosen)
            .expect("channel index in range");
        l.apply_into(psi.as_slice(), self.scratch.as_mut_slice());
        let n = self.scratch.norm();
        if n == 0.0 {
            return Err(Error::Integration("jump produced a null state".into()));
        }
        psi.copy_from(&self.scratch);
        *psi /= C64::new(n, 0.0);
        self.threshold = self.rng.gen::<f64>();
        Ok(())
    }
}

/// Evolve one trajectory across the grid with the Runge-Kutta stepper,
/// invoking `observe` at every grid time with the (unnormalized) state.
fn run_trajectory_rk<O>(
    system: &LindbladSystem,
    psi0: &DVector<C64>,
    t_grid: &[f64],
    ctrl: &StepController,
    machinery: &mut JumpMachinery,
    mut observe: O,
) -> Result<()>
where
    O: FnMut(usize, &DVector<C64>) -> Result<()>,
{
    let minus_i = C64::new(0.0, -1.0);
    let mut rhs_buf = DVector::<C64>::zeros(system.dim());
    let mut rhs = |y: &DVector<C64>, out: &mut DVector<C64>| {
        system.h_eff.apply_into(y.as_slice(), rhs_buf.as_mut_slice());
        for (o, r) in out.iter_mut().zip(rhs_buf.iter()) {
            *o = minus_i * r;
        }
    };

    let mut psi = psi0.clone();
    observe(0, &psi)?;
    let mut stepper = Dp5::new(&psi, ctrl.clone());
    let mut h = ctrl.h_init.unwrap_or_else(|| stepper.estimate_h0(&mut rhs, &psi));
    let mut k1_ready = ctrl.h_init.is_none();
    let mut t = t_grid[0];
    let mut out = psi.clone();
    let mut steps = 0usize;

    for (gi, &tg) in t_grid.iter().enumerate().skip(1) {
        while t < tg {
            steps += 1;
            if steps > ctrl.max_steps {
                return Err(Error::Integration("trajectory step budget exhausted".into()));
            }
            let clamped = h.min(tg - t);
            let err = stepper.step(&mut rhs, &psi, clamped, k1_ready, &mut out);
            k1_ready = true;
            if err > 1.0 && clamped > 1e-14 * t.abs().max(1.0) {
                h = clamped * (0.9 * err.powf(-0.2)).max(0.1);
                continue;
            }
            let grow = if err > 0.0 {
                (0.9 * err.powf(-0.2)).min(5.0)
            } else {
                5.0
            };

            if out.norm_squared() > machinery.threshold {
                // No jump inside this step.
                t += clamped;
                std::mem::swap(&mut psi, &mut out);
                stepper.promote_fsal();
                let grown = clamped * grow;
                h = if clamped < h { grown.max(h) } else { grown };
            } else {
                // Bisect the crossing time within (0, clamped].
                let mut lo = 0.0f64;
                let mut hi = clamped;
                let mut mid_state = out.clone();
                while hi - lo > JUMP_TIME_REL * clamped {
                    let mid = 0.5 * (lo + hi);
                    stepper.step(&mut rhs, &psi, mid, true, &mut mid_state);
                    if mid_state.norm_squared() > machinery.threshold {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                stepper.step(&mut rhs, &psi, hi, true, &mut mid_state);
                t += hi;
                psi.copy_from(&mid_state);
                machinery.fire(&mut psi)?;
                k1_ready = false; // state changed discontinuously
            }
        }
        observe(gi, &psi)?;
    }
    Ok(())
}

/// Krylov-propagated variant of the trajectory driver.
fn run_trajectory_krylov<O>(
    system: &LindbladSystem,
    psi0: &DVector<C64>,
    t_grid: &[f64],
    opts: &KrylovOptions,
    machinery: &mut JumpMachinery,
    mut observe: O,
) -> Result<()>
where
    O: FnMut(usize, &DVector<C64>) -> Result<()>,
{
    let minus_i = C64::new(0.0, -1.0);
    let mut rhs_buf = vec![C64::default(); system.dim()];
    let mut apply = |x: &[C64], y: &mut [C64]| {
        system.h_eff.apply_into(x, &mut rhs_buf);
        for (o, r) in y.iter_mut().zip(rhs_buf.iter()) {
            *o = minus_i * r;
        }
    };

    let mut psi = psi0.clone();
    observe(0, &psi)?;
    let mut t = t_grid[0];
    let t_end = *t_grid.last().unwrap();
    let mut h = opts.h_init.unwrap_or(f64::NAN);
    let mut steps = 0usize;
    let mut state_buf = DVector::<C64>::zeros(system.dim());

    for (gi, &tg) in t_grid.iter().enumerate().skip(1) {
        while t < tg {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Integration("trajectory step budget exhausted".into()));
            }
            let ar = build_arnoldi(&mut apply, psi.as_slice(), opts.m);
            if ar.beta == 0.0 {
                return Err(Error::Integration("trajectory state vanished".into()));
            }
            if h.is_nan() {
                // First step: scale from the Hessenberg norm.
                let hn = ar.h.camax().max(1e-30);
                h = 0.5 / hn;
            }
            let mut attempt = h.min(tg - t);
            let mut accepted = None;
            for _ in 0..80 {
                let (coeffs, err) = ar.propagated_coeffs(attempt);
                let budget = opts.tol * ar.beta;
                if ar.exact || err <= budget.max(1e-300) {
                    accepted = Some((attempt, coeffs, err));
                    break;
                }
                let shrink = (budget / err).powf(1.0 / ar.k as f64).clamp(0.2, 0.9);
                attempt *= shrink;
            }
            let Some((h_used, coeffs, err)) = accepted else {
                return Err(Error::Integration(format!(
                    "Krylov trajectory step failed at t = {t:.6e}"
                )));
            };

            ar.reconstruct(&coeffs, state_buf.as_mut_slice());
            if state_buf.norm_squared() > machinery.threshold {
                t += h_used;
                psi.copy_from(&state_buf);
                if !ar.exact {
                    if err > 0.0 {
                        let budget = opts.tol * ar.beta;
                        h = h_used * (budget / err).powf(1.0 / ar.k as f64).clamp(0.3, 2.5);
                    } else {
                        h = h_used * 2.5;
                    }
                } else {
                    h = (t_end - t).max(h);
                }
            } else {
                // Bisect inside the accepted step using the same basis.
                let mut lo = 0.0f64;
                let mut hi = h_used;
                while hi - lo > JUMP_TIME_REL * h_used {
                    let mid = 0.5 * (lo + hi);
                    let (cm, _) = ar.propagated_coeffs(mid);
                    ar.reconstruct(&cm, state_buf.as_mut_slice());
                    if state_buf.norm_squared() > machinery.threshold {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let (cm, _) = ar.propagated_coeffs(hi);
                ar.reconstruct(&cm, state_buf.as_mut_slice());
                t += hi;
                psi.copy_from(&state_buf);
                machinery.fire(&mut psi)?;
            }
        }
        observe(gi, &psi)?;
    }
    Ok(())
}

/// Streaming mean/variance (Welford). Exact zero variance for identical
/// samples, which the naive sum-of-squares formula cannot deliver.
#[derive(Clone, Default)]
struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn add(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let var = (self.m2 / (self.count - 1) as f64).max(0.0);
        (var / self.count as f64).sqrt()
    }
}

/// Evolve an ensemble of quantum trajectories and average the requested
/// observables. `reduced_over` requests the ensemble-mean reduced
/// system-spin state at every grid time.
///
/// Trajectories run in a fixed order with per-trajectory RNG streams, so the
/// output is bit-identical for identical (seed, n_traj, tolerances)
/// regardless of scheduling.
pub fn evolve_trajectories(
    system: &LindbladSystem,
    psi0: &DVector<C64>,
    t_grid: &[f64],
    plan: &TrajectoryPlan,
    observables: &[NamedOp],
    reduced_over: Option<&SpaceDescriptor>,
) -> Result<TrajectoryOutput> {
    if plan.n_traj == 0 {
        return Err(Error::InvalidState("n_traj must be >= 1".into()));
    }
    if (psi0.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState("initial state must be normalized".into()));
    }
    if t_grid.len() < 2 {
        return Err(Error::Integration("grid needs at least two points".into()));
    }
    let n_t = t_grid.len();
    let n_obs = observables.len();
    let mut stats = vec![Welford::default(); n_obs * n_t];
    let mut reduced_sum: Option<Vec<DMatrix<C64>>> = reduced_over.map(|space| {
        let d = 1usize << space.n_sys();
        vec![DMatrix::zeros(d, d); n_t]
    });

    for traj in 0..plan.n_traj {
        let mut machinery = JumpMachinery::new(system, plan.seed, traj as u64);
        let observe = |gi: usize, psi: &DVector<C64>| -> Result<()> {
            let n2 = psi.norm_squared();
            if n2 <= 0.0 {
                return Err(Error::Integration("trajectory norm vanished".into()));
            }
            for (oi, (_, op)) in observables.iter().enumerate() {
                let v = op.expectation_vec(psi).re / n2;
                stats[oi * n_t + gi].add(v);
            }
            if let (Some(acc), Some(space)) = (reduced_sum.as_mut(), reduced_over) {
                let r = reduced_state_vec(space, psi)?;
                acc[gi] += r / C64::new(n2, 0.0);
            }
            Ok(())
        };
        match &plan.propagator {
            Propagator::AdaptiveRk(ctrl) => {
                run_trajectory_rk(system, psi0, t_grid, ctrl, &mut machinery, observe)?
            }
            Propagator::Krylov(opts) => {
                run_trajectory_krylov(system, psi0, t_grid, opts, &mut machinery, observe)?
            }
        }
    }

    let n = plan.n_traj as f64;
    let mut series = ObservableSeries::new(t_grid.to_vec())?;
    for (oi, (name, _)) in observables.iter().enumerate() {
        let mut means = Vec::with_capacity(n_t);
        let mut errs = Vec::with_capacity(n_t);
        for gi in 0..n_t {
            means.push(stats[oi * n_t + gi].mean);
            errs.push(stats[oi * n_t + gi].stderr());
        }
        series.push_track_with_stderr(name.clone(), means, Some(errs))?;
    }
    let mean_reduced = reduced_sum.map(|acc| {
        acc.into_iter()
            .map(|m| m / C64::new(n, 0.0))
            .collect::<Vec<_>>()
    });
    Ok(TrajectoryOutput {
        series,
        mean_reduced,
    })
}
