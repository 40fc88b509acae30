use std::sync::atomic::{AtomicBool, Ordering};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{NormValue, OptimConfig, Witness};
use crate::error::{Error, Result};
use crate::spaces::Vector;

/// Sweeps per climb.
const MAX_SWEEPS: usize = 200;
const INITIAL_STEP: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

impl Direction {
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Maximize => a > b,
            Direction::Minimize => a < b,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ascent {
    pub value: f64,
    pub point: Vec<f64>,
    /// Index of the start that produced the optimum (seeds first).
    pub start: usize,
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            _ => {}
        }
    }
    false
}

pub(crate) fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn climb<F, P>(
    mut x: Vec<f64>,
    objective: &F,
    project: &P,
    dir: Direction,
    rng: &mut ChaCha8Rng,
    tol: f64,
) -> Option<(f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> f64,
    P: Fn(&mut Vec<f64>) -> bool,
{
    if !project(&mut x) {
        return None;
    }
    let mut f = objective(&x);
    if !f.is_finite() {
        return None;
    }
    let dim = x.len();
    let min_step = (10.0 * tol).max(1e-12);
    let mut step = INITIAL_STEP;
    for _ in 0..MAX_SWEEPS {
        let f0 = f;
        let scale = l2(&x).max(f64::MIN_POSITIVE);
        let attempt = |y: &mut Vec<f64>, x: &mut Vec<f64>, f: &mut f64| {
            if project(y) {
                let fy = objective(y);
                if fy.is_finite() && dir.better(fy, *f) {
                    *f = fy;
                    std::mem::swap(x, y);
                }
            }
        };
        for i in 0..dim {
            for s in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += s * step * scale;
                attempt(&mut y, &mut x, &mut f);
            }
        }
        for _ in 0..dim.max(2) {
            let d = random_point(rng, dim);
            let nd = l2(&d).max(f64::MIN_POSITIVE);
            let mut y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * scale * b / nd).collect();
            attempt(&mut y, &mut x, &mut f);
        }
        let gain = (f - f0).abs() / f0.abs().max(f64::MIN_POSITIVE);
        if gain < tol {
            step *= 0.5;
            if step < min_step {
                break;
            }
        }
    }
    Some((f, x))
}

/// Multi-start local search of `objective ∘ project` from the given seeds
/// plus `cfg.restarts` Gaussian starts.
///
/// `project` maps a point onto the feasible set in place and returns `false`
/// when the point is degenerate. Each climb sweeps coordinate and random
/// probes, halving the step once a sweep gains less than `cfg.tol`
/// (relative); at most 200 sweeps.
pub fn local_search<F, P>(
    objective: F,
    project: P,
    dim: usize,
    seeds: &[Vec<f64>],
    dir: Direction,
    cfg: &OptimConfig,
) -> Option<Ascent>
where
    F: Fn(&[f64]) -> f64 + Sync,
    P: Fn(&mut Vec<f64>) -> bool + Sync,
{
    let total = seeds.len() + cfg.restarts;
    let results: Vec<Option<(f64, Vec<f64>)>> = (0..total)
        .into_par_iter()
        .map(|i| {
            let mut rng = cfg.rng(i as u64);
            let start = if i < seeds.len() {
                seeds[i].clone()
            } else {
                random_point(&mut rng, dim)
            };
            climb(start, &objective, &project, dir, &mut rng, cfg.tol)
        })
        .collect();
    let mut best: Option<Ascent> = None;
    for (i, r) in results.into_iter().enumerate() {
        let Some((value, point)) = r else { continue };
        let replace = match &best {
            None => true,
            Some(b) => dir.better(value, b.value) || (value == b.value && lex_less(&point, &b.point)),
        };
        if replace {
            best = Some(Ascent { value, point, start: i });
        }
    }
    best
}

/// Maximizes the ratio of two positively homogeneous functions by local
/// search on the surface `denom = 1`.
pub fn ratio_ascent<N, D>(
    numer: N,
    denom: D,
    dim: usize,
    seeds: &[Vec<f64>],
    cfg: &OptimConfig,
) -> Option<Ascent>
where
    N: Fn(&[f64]) -> f64 + Sync,
    D: Fn(&[f64]) -> f64 + Sync,
{
    let project = |x: &mut Vec<f64>| {
        let d = denom(x);
        if !(d.is_finite() && d > 0.0) {
            return false;
        }
        x.iter_mut().for_each(|v| *v /= d);
        true
    };
    local_search(numer, project, dim, seeds, Direction::Maximize, cfg)
}

/// Approximates `sup{|ℓ(λ)| : ν(λ) ≤ 1}` over `R^dim`.
///
/// `membership` must be a norm and `objective` must return `|ℓ(λ)|`. The
/// result is a lower bound attained by the returned point; no upper bound
/// is attached here.
pub fn ball_linear_max<N, L>(
    membership: N,
    objective: L,
    dim: usize,
    seeds: &[Vec<f64>],
    cfg: &OptimConfig,
) -> Result<NormValue>
where
    N: Fn(&[f64]) -> f64 + Sync,
    L: Fn(&[f64]) -> f64 + Sync,
{
    let degenerate = AtomicBool::new(false);
    let project = |x: &mut Vec<f64>| {
        let v = membership(x);
        if !(v.is_finite() && v > 0.0) {
            if v == 0.0 && objective(x) > 0.0 {
                degenerate.store(true, Ordering::Relaxed);
            }
            return false;
        }
        x.iter_mut().for_each(|c| *c /= v);
        true
    };
    let best = local_search(&objective, project, dim, seeds, Direction::Maximize, cfg);
    if degenerate.load(Ordering::Relaxed) {
        return Err(Error::DegenerateNorm);
    }
    match best {
        Some(a) => Ok(NormValue::lower_bound(
            a.value,
            Witness::Point(Vector::real(&a.point)),
            "ball_linear_max",
        )),
        None => Ok(NormValue::lower_bound(0.0, Witness::None, "ball_linear_max")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lp(x: &[f64], p: f64) -> f64 {
        if p.is_infinite() {
            x.iter().fold(0.0, |a, b| a.max(b.abs()))
        } else {
            x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
        }
    }

    #[test]
    fn support_of_disc() {
        let cfg = OptimConfig::default();
        let v = ball_linear_max(|x| lp(x, 2.0), |x| x[0].abs(), 2, &[], &cfg).unwrap();
        assert_abs_diff_eq!(v.lower, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn support_of_polytopes() {
        let cfg = OptimConfig::default();
        let v = ball_linear_max(|x| lp(x, 1.0), |x| (x[0] + x[1]).abs(), 2, &[], &cfg).unwrap();
        assert_abs_diff_eq!(v.lower, 1.0, epsilon = 1e-8);
        let v = ball_linear_max(|x| lp(x, f64::INFINITY), |x| (x[0] + x[1]).abs(), 2, &[], &cfg)
            .unwrap();
        assert_abs_diff_eq!(v.lower, 2.0, epsilon = 1e-6);
    }

    #[test]
    fn degenerate_membership_is_rejected() {
        let cfg = OptimConfig::default().with_restarts(2);
        let r = ball_linear_max(|x| x[0].abs(), |x| x[1].abs(), 2, &[vec![0.0, 1.0]], &cfg);
        assert_eq!(r, Err(Error::DegenerateNorm));
    }

    #[test]
    fn deterministic_across_pools() {
        let cfg = OptimConfig::default().with_seed(7);
        let run = || {
            ratio_ascent(
                |x| (2.0 * x[0] - x[1]).abs() + (x[1] + 0.5 * x[2]).abs(),
                |x| lp(x, 3.0),
                3,
                &[],
                &cfg,
            )
            .unwrap()
        };
        let a = run();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(run);
        assert_eq!(a, b);
    }

    #[test]
    fn minimization() {
        let cfg = OptimConfig::default();
        let r = local_search(
            |x| lp(x, 1.0),
            |x| {
                let n = lp(x, 2.0);
                if n == 0.0 {
                    return false;
                }
                x.iter_mut().for_each(|v| *v /= n);
                true
            },
            3,
            &[],
            Direction::Minimize,
            &cfg,
        )
        .unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-7);
    }
}
