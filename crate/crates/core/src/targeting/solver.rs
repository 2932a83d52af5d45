use crate::evolution::evolve_unchecked;
use crate::state::DensityMatrix;

use super::{Component, TargetingConfig};

/// Uniform probe intervals on `[-i_max, i_max]`.
pub const GRID_INTERVALS: usize = 64;
/// Bisection bracket width at termination.
pub const ROOT_TOL: f64 = 1e-12;
/// Residual below which `I = 0` is accepted without a search.
const ZERO_RESIDUAL: f64 = 1e-12;
/// Roots closer than this in magnitude count as ties.
const TIE_TOL: f64 = 1e-9;
const GOLDEN_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSolution {
    pub pulse_area: f64,
    /// `|component - zeta|` at the returned area.
    pub residual: f64,
    /// No root was bracketed; the area minimizes the residual instead.
    pub fallback: bool,
}

/// Finds the pulse area `I` in `[-i_max, i_max]` that brings `component` of
/// `evolve(rho_start, g_now, i_accumulated + I)` to `zeta`, preferring the
/// root of smallest magnitude.
pub fn solve_step(
    component: Component,
    zeta: f64,
    rho_start: &DensityMatrix,
    g_now: f64,
    i_accumulated: f64,
    cfg: &TargetingConfig,
) -> StepSolution {
    let idx = component.index();
    let f = |i: f64| evolve_unchecked(cfg.regime, rho_start, g_now, i_accumulated + i, cfg.axis).components()[idx] - zeta;
    let f0 = f(0.0);
    let i_max = cfg.i_max;
    if f0.abs() <= ZERO_RESIDUAL || i_max <= 0.0 {
        return StepSolution { pulse_area: 0.0, residual: f0.abs(), fallback: false };
    }

    let h = 2.0 * i_max / GRID_INTERVALS as f64;
    let xs: Vec<f64> = (0..=GRID_INTERVALS).map(|k| -i_max + k as f64 * h).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| if x == 0.0 { f0 } else { f(x) }).collect();

    let mut best: Option<(f64, f64)> = None;
    let mut consider = |x: f64, r: f64| {
        let better = match best {
            None => true,
            Some((bx, _)) => {
                let (ax, abx) = (x.abs(), bx.abs());
                ax < abx - TIE_TOL || ((ax - abx).abs() <= TIE_TOL && x > bx)
            }
        };
        if better {
            best = Some((x, r));
        }
    };
    for k in 0..=GRID_INTERVALS {
        if fs[k] == 0.0 {
            consider(xs[k], 0.0);
        }
        if k < GRID_INTERVALS && fs[k] * fs[k + 1] < 0.0 {
            let x = bisect(&f, xs[k], xs[k + 1], fs[k]);
            consider(x, f(x).abs());
        }
    }
    if let Some((x, r)) = best {
        return StepSolution { pulse_area: x, residual: r, fallback: false };
    }

    let k = (0..=GRID_INTERVALS).min_by(|&a, &b| fs[a].abs().total_cmp(&fs[b].abs())).expect("non-empty grid");
    let lo = xs[k.saturating_sub(1)];
    let hi = xs[(k + 1).min(GRID_INTERVALS)];
    let x = golden_min(|x| f(x).abs(), lo, hi);
    let (x, r) = if f(x).abs() < fs[k].abs() { (x, f(x).abs()) } else { (xs[k], fs[k].abs()) };
    StepSolution { pulse_area: x.clamp(-i_max, i_max), residual: r, fallback: true }
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm * flo < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    0.5 * (lo + hi)
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERS {
        if b - a <= ROOT_TOL {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
