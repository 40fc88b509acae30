use std::f64::consts::PI;

use rayon::prelude::*;

use super::{NormValue, OptimConfig, Witness};
use crate::error::{Error, Result};
use crate::spaces::C64;

/// Rounds of coordinate moves per refinement pass.
const REFINE_ROUNDS: usize = 50;

fn pick(a: (f64, u64), b: (f64, u64)) -> (f64, u64) {
    // total order: larger value, then smaller index
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

// lexicographic in (+, -) with the first free coordinate most significant
fn signs_of(idx: u64, n: usize, symmetric: bool) -> Vec<f64> {
    let mut eps = vec![1.0; n];
    for j in usize::from(symmetric)..n {
        if (idx >> (n - 1 - j)) & 1 == 1 {
            eps[j] = -1.0;
        }
    }
    eps
}

/// Exact maximum of `f` over `{±1}^n`.
///
/// With `symmetric` the caller asserts `f(ε) = f(-ε)` and only sign vectors
/// with `ε_1 = +1` are visited.
pub fn sign_supremum<F>(f: F, n: usize, symmetric: bool, cfg: &OptimConfig) -> Result<NormValue>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if n >= 127 || (1u128 << n) > cfg.max_enum as u128 {
        return Err(Error::Budget { needed: 1u128 << n.min(127), budget: cfg.max_enum });
    }
    if n == 0 {
        return Ok(NormValue::exact(f(&[]), Witness::Signs(vec![]), "sign_enumeration"));
    }
    let free = if symmetric { n - 1 } else { n };
    let count = 1u64 << free;
    let (value, idx) = (0..count)
        .into_par_iter()
        .map(|idx| (f(&signs_of(idx, n, symmetric)), idx))
        .reduce(|| (f64::NEG_INFINITY, u64::MAX), pick);
    let witness = signs_of(idx, n, symmetric).iter().map(|e| *e as i8).collect();
    Ok(NormValue::exact(value, Witness::Signs(witness), "sign_enumeration"))
}

fn phases_to_torus(theta: &[f64]) -> Vec<C64> {
    theta.iter().map(|t| C64::from_polar(1.0, *t)).collect()
}

/// Lower bound for the maximum of a phase-invariant `f` over the torus `T^n`.
///
/// The first coordinate is pinned to `1`; the remaining phases run over a
/// grid of `cfg.grid_points` values each (coarsened when the grid exceeds
/// `cfg.max_enum`), then `cfg.refine_passes` passes of coordinate moves with
/// the step halved on every pass.
pub fn torus_supremum<F>(f: F, n: usize, cfg: &OptimConfig) -> NormValue
where
    F: Fn(&[C64]) -> f64 + Sync,
{
    if n == 0 {
        return NormValue::exact(f(&[]), Witness::Phases(vec![]), "torus:trivial");
    }
    if n == 1 {
        return NormValue::exact(f(&[C64::new(1.0, 0.0)]), Witness::Phases(vec![0.0]), "torus:trivial");
    }
    let free = (n - 1) as u32;
    let mut g = cfg.grid_points as u64;
    while g > 2 && (g as f64).powi(free as i32) > cfg.max_enum as f64 {
        g -= if cfg.grid_points % 2 == 0 { 2 } else { 1 };
    }
    let total = g.pow(free);
    let theta_of = |mut idx: u64| {
        let mut th = vec![0.0; n];
        for t in th.iter_mut().skip(1) {
            *t = 2.0 * PI * (idx % g) as f64 / g as f64;
            idx /= g;
        }
        th
    };
    let eval = |th: &[f64]| f(&phases_to_torus(th));
    let (mut best, idx) = (0..total)
        .into_par_iter()
        .map(|idx| (eval(&theta_of(idx)), idx))
        .reduce(|| (f64::NEG_INFINITY, u64::MAX), pick);
    let mut theta = theta_of(idx);
    let mut h = 2.0 * PI / g as f64;
    for _ in 0..cfg.refine_passes {
        h *= 0.5;
        for _ in 0..REFINE_ROUNDS {
            let mut improved = false;
            for j in 1..n {
                for s in [1.0, -1.0] {
                    let mut t = theta.clone();
                    t[j] += s * h;
                    let v = eval(&t);
                    if v > best {
                        best = v;
                        theta = t;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
    for t in theta.iter_mut() {
        *t = t.rem_euclid(2.0 * PI);
    }
    NormValue::lower_bound(best, Witness::Phases(theta), "torus_grid_refine")
}

/// A set partition of `{0..k-1}` as a list of blocks (each sorted, blocks
/// ordered by least element).
pub type SetPartition = Vec<Vec<usize>>;

/// All set partitions of `{0..k-1}` via restricted-growth strings.
pub fn set_partitions(k: usize) -> Vec<SetPartition> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; k];
    loop {
        let nb = rgs.iter().max().unwrap() + 1;
        let mut blocks = vec![Vec::new(); nb];
        for (i, b) in rgs.iter().enumerate() {
            blocks[*b].push(i);
        }
        out.push(blocks);
        // next restricted-growth string
        let mut i = k - 1;
        loop {
            if i == 0 {
                return out;
            }
            let max_prefix = rgs[..i].iter().max().cloned().unwrap_or(0);
            if rgs[i] <= max_prefix {
                rgs[i] += 1;
                for r in rgs.iter_mut().skip(i + 1) {
                    *r = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

pub fn count_assignments(n: usize, m: usize) -> u128 {
    (n as u128).checked_pow(m as u32).unwrap_or(u128::MAX)
}

/// The `idx`-th map `{0..m-1} → {0..n-1}` in mixed-radix order.
pub fn assignments(idx: u64, n: usize, m: usize) -> Vec<usize> {
    let mut a = vec![0; m];
    let mut r = idx;
    for slot in a.iter_mut() {
        *slot = (r % n as u64) as usize;
        r /= n as u64;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sign_examples() {
        let cfg = OptimConfig::default();
        let v = sign_supremum(|e| (e[0] + e[1]).abs(), 2, false, &cfg).unwrap();
        assert_eq!(v.lower, 2.0);
        assert_eq!(v.witness, Witness::Signs(vec![1, 1]));
        let v = sign_supremum(|e| (e[0] * e[0] + e[1] * e[1]).sqrt(), 2, true, &cfg).unwrap();
        assert_abs_diff_eq!(v.lower, 2f64.sqrt(), epsilon = 1e-15);
        let v = sign_supremum(|e| (e[0] - e[1]).abs(), 2, false, &cfg).unwrap();
        assert_eq!(v.lower, 2.0);
        assert_eq!(v.witness, Witness::Signs(vec![1, -1]));
    }

    #[test]
    fn sign_budget() {
        let cfg = OptimConfig { max_enum: 8, ..OptimConfig::default() };
        assert!(matches!(sign_supremum(|_| 0.0, 4, false, &cfg), Err(Error::Budget { .. })));
        assert!(sign_supremum(|_| 0.0, 3, false, &cfg).is_ok());
    }

    #[test]
    fn torus_examples() {
        let cfg = OptimConfig::default();
        let v = torus_supremum(|z| (z[0] + z[1]).norm(), 2, &cfg);
        assert_abs_diff_eq!(v.lower, 2.0, epsilon = 1e-12);
        let v = torus_supremum(|z| z[0].norm().max(z[1].norm()), 2, &cfg);
        assert_abs_diff_eq!(v.lower, 1.0, epsilon = 1e-12);
        let i = C64::new(0.0, 1.0);
        let v = torus_supremum(|z| (z[0] + i * z[1]).norm(), 2, &cfg);
        assert_abs_diff_eq!(v.lower, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52, 203, 877, 4140];
        for (k, b) in bell.iter().enumerate() {
            assert_eq!(set_partitions(k).len(), *b);
        }
    }

    #[test]
    fn assignment_order() {
        assert_eq!(assignments(0, 3, 2), vec![0, 0]);
        assert_eq!(assignments(5, 3, 2), vec![2, 1]);
        assert_eq!(count_assignments(3, 4), 81);
    }
}
