use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{from_operator, lowering, to_operator, FeedbackConfig, Operator, RecordKind, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::state::{bloch_of, BlochVector, DensityMatrix};

const MAX_HALVINGS: u32 = 6;
/// Trajectories simulated between reductions of the running sums.
const CHUNK: usize = 64;

/// Gaussian increments with variance `dt`, one independent stream per
/// `(seed, stream)` pair.
#[derive(Debug, Clone)]
pub struct WienerStream {
    rng: ChaCha8Rng,
    sqrt_dt: f64,
}

impl WienerStream {
    pub fn new(seed: u64, stream: u64, dt: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, sqrt_dt: dt.sqrt() }
    }

    pub fn next_increment(&mut self) -> f64 {
        let z: f64 = self.rng.sample(StandardNormal);
        self.sqrt_dt * z
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// One conditioned trajectory on stream 0.
pub fn simulate_trajectory(rho0: &DensityMatrix, cfg: &FeedbackConfig, t_end: f64) -> Result<TrajectoryRecord> {
    simulate_trajectory_stream(rho0, cfg, t_end, 0)
}

/// One conditioned trajectory driven by stream `stream` of `cfg.seed`.
///
/// Each step applies the homodyne measurement update
/// `M = 1 - (iH + c^dagger c / 2) dt + sqrt(eta) c dy` with
/// `dy = sqrt(eta) <c + c^dagger> dt + dW`, adds the undetected emission
/// `(1 - eta) dt c rho c^dagger`, renormalizes, and then rotates by
/// `exp(-i lambda sigma_phi dI)` with the photocurrent increment
/// `dI = dy / sqrt(eta)` taken `delay` earlier.
pub fn simulate_trajectory_stream(rho0: &DensityMatrix, cfg: &FeedbackConfig, t_end: f64, stream: u64) -> Result<TrajectoryRecord> {
    cfg.validate_sde()?;
    rho0.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter("t_end > 0 violated".into()));
    }
    let mut dt = cfg.dt;
    let mut last = String::new();
    for _ in 0..=MAX_HALVINGS {
        match attempt(rho0, cfg, t_end, stream, dt) {
            Ok(rec) => return Ok(rec),
            Err(reason) => last = reason,
        }
        dt *= 0.5;
    }
    Err(Error::StepInstability { retries: MAX_HALVINGS, reason: last })
}

fn attempt(rho0: &DensityMatrix, cfg: &FeedbackConfig, t_end: f64, stream: u64, dt: f64) -> std::result::Result<TrajectoryRecord, String> {
    let n_steps = (t_end / dt).round().max(1.0) as usize;
    let every = ((cfg.sample_dt / dt).round() as usize).max(1);
    let lag = (cfg.delay / dt).round() as usize;
    let mut buffer = vec![0.0; lag];

    let id = Operator::identity();
    let s_phi = cfg.sigma_phi();
    let c = lowering() * re(cfg.gamma.sqrt());
    let cd = c.adjoint();
    let drift = id - (s_phi * Complex64::new(0.0, cfg.alpha) + cd * c * re(0.5)) * re(dt);
    let sqrt_eta = cfg.eta.sqrt();
    let lost = (1.0 - cfg.eta) * dt;

    let mut noise = WienerStream::new(cfg.seed, stream, dt);
    let mut rho = to_operator(rho0);
    let mut times = vec![0.0];
    let mut states = vec![bloch_of(rho0)];
    for k in 0..n_steps {
        let x = 2.0 * (rho * c).trace().re;
        let dw = noise.next_increment();
        let dy = sqrt_eta * x * dt + dw;
        let m = drift + c * re(sqrt_eta * dy);
        let mut next = m * rho * m.adjoint();
        if lost > 0.0 {
            next += c * rho * cd * re(lost);
        }
        let tr = next.trace().re;
        if !(tr.is_finite() && tr > 0.0) {
            return Err(format!("trace {tr} at step {k}"));
        }
        next = (next + next.adjoint()) * re(0.5 / tr);

        let current = if cfg.eta > 0.0 { dy / sqrt_eta } else { 0.0 };
        let applied = if lag == 0 {
            current
        } else {
            let slot = k % lag;
            let past = if k >= lag { buffer[slot] } else { 0.0 };
            buffer[slot] = current;
            past
        };
        let angle = cfg.lambda * applied;
        if angle != 0.0 {
            let (s, co) = angle.sin_cos();
            let u = id * re(co) - s_phi * Complex64::new(0.0, s);
            next = u * next * u.adjoint();
        }
        rho = next;

        let step = k + 1;
        if step % every == 0 || step == n_steps {
            let state = from_operator(&rho);
            let lo = state.eigenvalues()[0];
            if !(lo >= -1e-9) {
                return Err(format!("eigenvalue {lo:e} at step {step}"));
            }
            times.push(step as f64 * dt);
            states.push(bloch_of(&state));
        }
    }
    Ok(TrajectoryRecord { kind: RecordKind::SingleConditioned, times, states, stderr: None })
}

pub fn ensemble_average(cfg: &FeedbackConfig, rho0: &DensityMatrix, t_end: f64) -> Result<TrajectoryRecord> {
    ensemble_average_with(Execution::default(), cfg, rho0, t_end)
}

/// Mean Bloch vector over `cfg.n_traj` trajectories (streams `0..n_traj`)
/// with the standard error of the mean. The reduction runs in trajectory
/// order, so the result does not depend on `exec`.
pub fn ensemble_average_with(exec: Execution, cfg: &FeedbackConfig, rho0: &DensityMatrix, t_end: f64) -> Result<TrajectoryRecord> {
    let n = cfg.n_traj;
    if n == 0 {
        return Err(Error::InvalidParameter("n_traj >= 1 violated".into()));
    }
    let mut times: Vec<f64> = Vec::new();
    let mut sum: Vec<[f64; 3]> = Vec::new();
    let mut sq: Vec<[f64; 3]> = Vec::new();
    let mut start = 0;
    while start < n {
        let len = CHUNK.min(n - start);
        let chunk = exec.map_indexed(len, |i| simulate_trajectory_stream(rho0, cfg, t_end, (start + i) as u64));
        for rec in chunk {
            let rec = rec?;
            if times.is_empty() {
                times = rec.times.clone();
                sum = vec![[0.0; 3]; times.len()];
                sq = vec![[0.0; 3]; times.len()];
            }
            if rec.times.len() != times.len() {
                return Err(Error::StepInstability { retries: MAX_HALVINGS, reason: "trajectory sample grids differ".into() });
            }
            for (j, v) in rec.states.iter().enumerate() {
                for (a, x) in [v.x, v.y, v.z].into_iter().enumerate() {
                    sum[j][a] += x;
                    sq[j][a] += x * x;
                }
            }
        }
        start += len;
    }
    let nf = n as f64;
    let mut states = Vec::with_capacity(times.len());
    let mut stderr = Vec::with_capacity(times.len());
    for (s, q) in sum.iter().zip(&sq) {
        let mean = [s[0] / nf, s[1] / nf, s[2] / nf];
        let se = |a: usize| {
            if n < 2 {
                0.0
            } else {
                ((q[a] - nf * mean[a] * mean[a]).max(0.0) / (nf - 1.0) / nf).sqrt()
            }
        };
        states.push(BlochVector::new(mean[0], mean[1], mean[2]));
        stderr.push(BlochVector::new(se(0), se(1), se(2)));
    }
    Ok(TrajectoryRecord { kind: RecordKind::EnsembleMean, times, states, stderr: Some(stderr) })
}
