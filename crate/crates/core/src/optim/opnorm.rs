use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::search::{local_search, Direction};
use super::{sign_supremum, torus_supremum, NormValue, OptimConfig, Witness};
use crate::spaces::{
    dual_direction, exact_op_norm, lp_norm, top_singular, MatrixOp, ScalarField, Vector, C64,
};

const POWER_ITERS: usize = 200;
/// Sign-vector seeds are added for the power iteration up to this many columns.
const SIGN_SEED_COLS: usize = 8;

/// Certified upper bound for `‖a : l^p_n → l^q_m‖` from the exact `1 → q`,
/// `p → ∞` and `2 → 2` norms combined with the identity embeddings.
pub fn op_norm_upper_bound(a: &MatrixOp) -> f64 {
    let (m, n) = (a.rows() as f64, a.cols() as f64);
    let col = exact_op_norm(&a.with_roles(crate::spaces::Index::ONE, a.q)).map_or(f64::INFINITY, |v| v.upper);
    let row = exact_op_norm(&a.with_roles(a.p, crate::spaces::Index::INF)).map_or(f64::INFINITY, |v| v.upper);
    let (s, _) = top_singular(&a.entries);
    let u1 = n.powf(1.0 - a.p.recip()) * col;
    let u2 = m.powf(a.q.recip()) * row;
    let u3 = s * n.powf((0.5 - a.p.recip()).max(0.0)) * m.powf((a.q.recip() - 0.5).max(0.0));
    u1.min(u2).min(u3)
}

fn power_iteration(a: &MatrixOp, x0: Vec<C64>) -> (f64, Vec<C64>) {
    let at = a.entries.transpose();
    let pn = lp_norm(&x0, a.p);
    if pn == 0.0 {
        return (0.0, x0);
    }
    let mut x: Vec<C64> = x0.iter().map(|z| z / pn).collect();
    let mut val = a.ratio(&x);
    for _ in 0..POWER_ITERS {
        let y = a.apply(&x);
        let z = dual_direction(&y, a.q.conjugate());
        let w = crate::spaces::apply(&at, &z);
        let xn = dual_direction(&w, a.p);
        let vn = a.ratio(&xn);
        if !(vn > val * (1.0 + 1e-15)) {
            if vn > val {
                x = xn;
                val = vn;
            }
            break;
        }
        x = xn;
        val = vn;
    }
    (val, x)
}

fn to_params(x: &[C64], field: ScalarField) -> Vec<f64> {
    crate::spaces::flatten(&[Vector(x.to_vec())], field)
}

fn from_params(p: &[f64], n: usize, field: ScalarField) -> Vec<C64> {
    crate::spaces::unflatten(p, 1, n, field).remove(0).0
}

fn power_seeds(a: &MatrixOp, cfg: &OptimConfig) -> Vec<Vec<C64>> {
    let n = a.cols();
    let field = a.field;
    let mut seeds: Vec<Vec<C64>> = Vec::new();
    for j in 0..n {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[j] = C64::new(1.0, 0.0);
        seeds.push(e);
    }
    let (_, v) = top_singular(&a.entries);
    seeds.push(if field == ScalarField::Real { v.iter().map(|z| C64::new(z.re, 0.0)).collect() } else { v });
    for i in 0..a.rows() {
        let row: Vec<C64> = a.entries.row(i).iter().cloned().collect();
        seeds.push(dual_direction(&row, a.p));
    }
    if n <= SIGN_SEED_COLS && n > 0 {
        for idx in 0..(1u64 << (n - 1)) {
            seeds.push(
                (0..n)
                    .map(|j| {
                        let neg = j > 0 && (idx >> (j - 1)) & 1 == 1;
                        C64::new(if neg { -1.0 } else { 1.0 }, 0.0)
                    })
                    .collect(),
            );
        }
    }
    let base = seeds.len();
    for r in 0..cfg.restarts {
        let mut rng = cfg.rng((base + r) as u64);
        seeds.push(
            (0..n)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = if field == ScalarField::Complex { rng.sample(StandardNormal) } else { 0.0 };
                    C64::new(re, im)
                })
                .collect(),
        );
    }
    seeds
}

fn best_power(a: &MatrixOp, cfg: &OptimConfig) -> (f64, Vec<C64>) {
    let results: Vec<(f64, Vec<C64>)> = power_seeds(a, cfg).into_par_iter().map(|s| power_iteration(a, s)).collect();
    results
        .into_iter()
        .fold((f64::NEG_INFINITY, Vec::new()), |b, c| if c.0 > b.0 { c } else { b })
}

/// A fast lower estimate for use inside other searches: closed forms or sign
/// enumeration when available, otherwise unpolished power iteration.
pub fn op_norm_quick(a: &MatrixOp, cfg: &OptimConfig) -> f64 {
    if let Some(v) = exact_op_norm(a) {
        return v.lower;
    }
    if a.field == ScalarField::Real && (a.q.is_one() || a.p.is_inf()) {
        let v = op_norm_pq(a, &OptimConfig { restarts: 0, ..cfg.clone() });
        if v.is_exact() {
            return v.lower;
        }
    }
    best_power(a, cfg).0
}

/// Search-only lower bound (closed forms are not consulted).
pub(crate) fn op_norm_search(a: &MatrixOp, cfg: &OptimConfig) -> (f64, Vec<C64>) {
    let n = a.cols();
    let field = a.field;
    let (mut best, mut x) = best_power(a, cfg);
    // polish with a derivative-free climb from the best power-iteration point
    let polish_cfg = OptimConfig { restarts: 0, ..cfg.clone() };
    if let Some(p) = local_search(
        |q| a.ratio(&from_params(q, n, field)),
        |q| lp_norm(&from_params(q, n, field), a.p) > 0.0,
        to_params(&x, field).len(),
        &[to_params(&x, field)],
        Direction::Maximize,
        &polish_cfg,
    ) {
        if p.value > best {
            best = p.value;
            x = from_params(&p.point, n, field);
        }
    }
    let pn = lp_norm(&x, a.p);
    (best, x.iter().map(|z| z / pn).collect())
}

/// `‖a : l^p_n → l^q_m‖`.
///
/// Closed forms give `Exact`; over the real field `q = 1` and `p = ∞` are
/// exact by sign enumeration within `cfg.max_enum`; everything else is a
/// `Bracket` whose lower end is attained by the witness and whose upper end
/// comes from [`op_norm_upper_bound`].
pub fn op_norm_pq(a: &MatrixOp, cfg: &OptimConfig) -> NormValue {
    if let Some(v) = exact_op_norm(a) {
        return v;
    }
    let (m, n) = (a.rows(), a.cols());
    let at = a.entries.transpose();
    let pc = a.p.conjugate();
    if a.field == ScalarField::Real && a.q.is_one() {
        let f = |s: &[f64]| {
            let z: Vec<C64> = s.iter().map(|v| C64::new(*v, 0.0)).collect();
            lp_norm(&crate::spaces::apply(&at, &z), pc)
        };
        if let Ok(v) = sign_supremum(f, m, true, cfg) {
            let Witness::Signs(s) = &v.witness else { unreachable!() };
            let z: Vec<C64> = s.iter().map(|e| C64::new(*e as f64, 0.0)).collect();
            let x = dual_direction(&crate::spaces::apply(&at, &z), a.p);
            return NormValue::exact(v.lower, Witness::Point(Vector(x)), "sign_enumeration:dual");
        }
    }
    if a.field == ScalarField::Real && a.p.is_inf() {
        let f = |e: &[f64]| {
            let z: Vec<C64> = e.iter().map(|v| C64::new(*v, 0.0)).collect();
            lp_norm(&a.apply(&z), a.q)
        };
        if let Ok(v) = sign_supremum(f, n, true, cfg) {
            let Witness::Signs(s) = &v.witness else { unreachable!() };
            let x = Vector(s.iter().map(|e| C64::new(*e as f64, 0.0)).collect());
            return NormValue::exact(v.lower, Witness::Point(x), "sign_enumeration");
        }
    }
    let (mut best, mut x) = op_norm_search(a, cfg);
    let mut method = "power_iteration";
    if a.field == ScalarField::Complex && a.p.is_inf() {
        let t = torus_supremum(|z| lp_norm(&a.apply(z), a.q), n, cfg);
        if t.lower > best {
            let Witness::Phases(th) = &t.witness else { unreachable!() };
            best = t.lower;
            x = th.iter().map(|t| C64::from_polar(1.0, *t)).collect();
            method = "torus";
        }
    }
    if a.field == ScalarField::Complex && a.q.is_one() {
        let t = torus_supremum(|z| lp_norm(&crate::spaces::apply(&at, z), pc), m, cfg);
        if t.lower > best {
            let Witness::Phases(th) = &t.witness else { unreachable!() };
            let z: Vec<C64> = th.iter().map(|t| C64::from_polar(1.0, *t)).collect();
            x = dual_direction(&crate::spaces::apply(&at, &z), a.p);
            best = a.ratio(&x);
            method = "torus:dual";
        }
    }
    NormValue::bracket(best, op_norm_upper_bound(a).max(best), Witness::Point(Vector(x)), method)
        .promote(cfg.tol)
}
