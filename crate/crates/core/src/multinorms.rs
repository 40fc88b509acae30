//! Multi-norm evaluators behind one interface, plus the axiom auditor, the
//! rate-of-growth estimator and the Sup / multi-null prefix test.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decompositions::FamilyOfDecompositions;
use crate::error::{Error, Result};
use crate::optim::{
    assignments, ball_linear_max, count_assignments, local_search, op_norm_pq, ratio_ascent,
    Direction, NormValue, OptimConfig, Witness,
};
use crate::spaces::{
    dual_space, flatten, lp_combine, nuclear_norm, pair_raw, unflatten, Index, Matrix, MatrixOp,
    ScalarField, SpaceSpec, Tuple, Vector, C64, ZERO,
};
use crate::summing::{mu_weak, mu_weak_quick};

/// Which multi-norm to evaluate.
///
/// JSON uses an internal `variant` tag, e.g. `{"variant":"pq","p":1,"q":2}`.
/// Partition blocks are 0-based coordinate indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum MultiNormSpec {
    Min,
    Max,
    Pq { p: Index, q: Index },
    StandardQ { q: Index },
    Lattice,
    DualLattice,
    Hilbert,
    Partition { blocks: Vec<Vec<usize>> },
    Generated { family: FamilyOfDecompositions },
    Extended { base: Box<MultiNormSpec>, ops: Vec<Matrix> },
    WeakSumming { p: Index },
    /// Evaluated on tuples of the dual space; `base` lives on the primal.
    NumericalDual { base: Box<MultiNormSpec> },
    /// `(Σ ‖x_j‖^p)^{1/p}`; satisfies (A1)–(A3) but not (A4).
    LpSum { p: Index },
}

impl MultiNormSpec {
    pub fn name(&self) -> String {
        match self {
            MultiNormSpec::Min => "min".into(),
            MultiNormSpec::Max => "max".into(),
            MultiNormSpec::Pq { p, q } => format!("pq({p},{q})"),
            MultiNormSpec::StandardQ { q } => format!("standard_q({q})"),
            MultiNormSpec::Lattice => "lattice".into(),
            MultiNormSpec::DualLattice => "dual_lattice".into(),
            MultiNormSpec::Hilbert => "hilbert".into(),
            MultiNormSpec::Partition { blocks } => format!("partition({blocks:?})"),
            MultiNormSpec::Generated { family } => format!("generated({} members)", family.members.len()),
            MultiNormSpec::Extended { base, ops } => format!("extended({}, {} ops)", base.name(), ops.len()),
            MultiNormSpec::WeakSumming { p } => format!("weak_summing({p})"),
            MultiNormSpec::NumericalDual { base } => format!("numerical_dual({})", base.name()),
            MultiNormSpec::LpSum { p } => format!("lp_sum({p})"),
        }
    }

    /// Dual multi-norms satisfy (B4) in place of (A4).
    pub fn is_dual(&self) -> bool {
        match self {
            MultiNormSpec::DualLattice | MultiNormSpec::WeakSumming { .. } => true,
            MultiNormSpec::Extended { base, .. } => base.is_dual(),
            MultiNormSpec::NumericalDual { base } => !base.is_dual(),
            _ => false,
        }
    }

    /// Checks that the spec makes sense on tuples of `space`.
    pub fn validate(&self, space: &SpaceSpec) -> Result<()> {
        let bad = |m: String| Err(Error::Spec(m));
        match self {
            MultiNormSpec::Pq { p, q } => {
                if p.value() > q.value() || q.is_inf() {
                    return bad(format!("pq needs 1 ≤ p ≤ q < ∞, got p={p}, q={q}"));
                }
            }
            MultiNormSpec::StandardQ { q } => {
                if q.value() < space.p.value() {
                    return bad(format!("standard_q needs q ≥ {}, got {q}", space.p));
                }
            }
            MultiNormSpec::Hilbert => {
                if space.p != Index::TWO {
                    return bad(format!("hilbert needs p = 2, got {}", space.p));
                }
            }
            MultiNormSpec::Partition { blocks } => {
                let mut seen = vec![false; space.dim];
                for k in blocks.iter().flatten() {
                    if *k >= space.dim || seen[*k] {
                        return bad(format!("blocks {blocks:?} do not partition 0..{}", space.dim));
                    }
                    seen[*k] = true;
                }
                if seen.iter().any(|s| !s) || blocks.iter().any(|b| b.is_empty()) {
                    return bad(format!("blocks {blocks:?} do not partition 0..{}", space.dim));
                }
            }
            MultiNormSpec::Generated { family } => {
                for d in &family.members {
                    if d.dim() != space.dim {
                        return bad(format!("decomposition of dimension {} on a space of dimension {}", d.dim(), space.dim));
                    }
                }
            }
            MultiNormSpec::Extended { base, ops } => {
                base.validate(space)?;
                if ops.iter().any(|t| t.nrows() != space.dim || t.ncols() != space.dim) {
                    return bad("extension operators must map the space to itself".into());
                }
                let id = Matrix::identity(space.dim);
                if !ops.iter().any(|t| *t == id) {
                    return bad("extension family must contain the identity".into());
                }
                if space.field == ScalarField::Real && ops.iter().any(|t| t.iter().any(|z| z.im != 0.0)) {
                    return Err(Error::Field("complex operator on a real space".into()));
                }
            }
            MultiNormSpec::NumericalDual { base } => base.validate(&dual_space(space))?,
            _ => {}
        }
        Ok(())
    }
}

/// Evaluates `‖(x_1, ..., x_n)‖_n` for the given multi-norm.
pub fn evaluate(spec: &MultiNormSpec, t: &Tuple, cfg: &OptimConfig) -> Result<NormValue> {
    spec.validate(&t.space)?;
    eval_unchecked(spec, t, cfg)
}

pub(crate) fn eval_unchecked(spec: &MultiNormSpec, t: &Tuple, cfg: &OptimConfig) -> Result<NormValue> {
    Ok(match spec {
        MultiNormSpec::Min => NormValue::exact(t.max_norm(), Witness::None, "min"),
        MultiNormSpec::Lattice => NormValue::exact(lattice_value(t), Witness::None, "lattice"),
        MultiNormSpec::DualLattice => NormValue::exact(dual_lattice_value(t), Witness::None, "dual_lattice"),
        MultiNormSpec::LpSum { p } => NormValue::exact(lp_combine(t.norms(), *p), Witness::None, "lp_sum"),
        MultiNormSpec::StandardQ { q } => standard_q(*q, t, cfg),
        MultiNormSpec::Pq { p, q } => pq(*p, *q, t, cfg),
        MultiNormSpec::Max => max_multinorm(t, cfg),
        MultiNormSpec::Hilbert => hilbert(t, cfg),
        MultiNormSpec::Partition { blocks } => {
            NormValue::exact(partition_value(blocks, t), Witness::None, "partition")
        }
        MultiNormSpec::Generated { family } => generated(family, t, cfg)?,
        MultiNormSpec::Extended { base, ops } => {
            let mut best: Option<NormValue> = None;
            let mut upper = 0.0f64;
            for op in ops {
                let image = t.with_vectors(t.vectors.iter().map(|x| Vector(crate::spaces::apply(op, &x.0))).collect());
                let v = eval_unchecked(base, &image, cfg)?;
                upper = upper.max(v.upper);
                if best.as_ref().is_none_or(|b| v.lower > b.lower) {
                    best = Some(v);
                }
            }
            let b = best.expect("family contains the identity");
            let method = format!("extended:{}", b.method);
            let v = NormValue { upper, ..b }.with_method(method);
            if v.upper <= v.lower { v.promote(0.0) } else { v.demote() }
        }
        MultiNormSpec::WeakSumming { p } => mu_weak(*p, t, cfg),
        MultiNormSpec::NumericalDual { base } => numerical_dual(base, t, cfg)?,
    })
}

fn lattice_value(t: &Tuple) -> f64 {
    let sup: Vec<C64> = (0..t.space.dim)
        .map(|k| C64::new(t.vectors.iter().fold(0.0, |a, x| a.max(x.0[k].norm())), 0.0))
        .collect();
    t.space.norm_of(&sup)
}

fn dual_lattice_value(t: &Tuple) -> f64 {
    let sum: Vec<C64> =
        (0..t.space.dim).map(|k| C64::new(t.vectors.iter().map(|x| x.0[k].norm()).sum(), 0.0)).collect();
    t.space.norm_of(&sum)
}

/// `‖P_X x‖` restricted to a coordinate set given by a mask.
fn restricted_norm(space: &SpaceSpec, x: &Vector, keep: impl Fn(usize) -> bool) -> f64 {
    let v: Vec<C64> = x.0.iter().enumerate().map(|(k, z)| if keep(k) { *z } else { ZERO }).collect();
    space.norm_of(&v)
}

fn partition_value(blocks: &[Vec<usize>], t: &Tuple) -> f64 {
    lp_combine(
        blocks.iter().map(|b| {
            t.vectors
                .iter()
                .map(|x| restricted_norm(&t.space, x, |k| b.contains(&k)))
                .fold(0.0, f64::max)
        }),
        t.space.p,
    )
}

/// Value of an ordered partition given by `assign[k] = j` (coordinate `k` to block `j`).
fn assignment_value(t: &Tuple, q: Index, assign: &[usize]) -> f64 {
    lp_combine(
        (0..t.n()).map(|j| restricted_norm(&t.space, &t.vectors[j], |k| assign[k] == j)),
        q,
    )
}

/// Coordinatewise argmax assignment, lowest index on ties.
fn argmax_assignment(t: &Tuple) -> Vec<usize> {
    (0..t.space.dim)
        .map(|k| {
            let mut best = 0;
            for j in 1..t.n() {
                if t.vectors[j].0[k].norm() > t.vectors[best].0[k].norm() {
                    best = j;
                }
            }
            best
        })
        .collect()
}

fn standard_q(q: Index, t: &Tuple, cfg: &OptimConfig) -> NormValue {
    let (n, m) = (t.n(), t.space.dim);
    let lattice = lattice_value(t);
    let base = argmax_assignment(t);
    if q == t.space.p {
        return NormValue::exact(lattice, Witness::Assignment(base), "standard_q:coordinatewise");
    }
    let count = count_assignments(n, m);
    if count <= cfg.max_enum as u128 {
        let (value, idx) = (0..count as u64)
            .into_par_iter()
            .map(|idx| (assignment_value(t, q, &assignments(idx, n, m)), idx))
            .reduce(|| (f64::NEG_INFINITY, u64::MAX), |a, b| {
                if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) { a } else { b }
            });
        return NormValue::exact(value, Witness::Assignment(assignments(idx, n, m)), "standard_q:enumeration");
    }
    // coordinate-reassignment local search from the argmax start plus random starts
    let starts: Vec<Vec<usize>> = std::iter::once(base)
        .chain((0..cfg.restarts).map(|i| {
            let mut rng = cfg.rng(i as u64);
            (0..m).map(|_| rng.random_range(0..n)).collect()
        }))
        .collect();
    let results: Vec<(f64, Vec<usize>)> = starts
        .into_par_iter()
        .map(|mut a| {
            let mut v = assignment_value(t, q, &a);
            loop {
                let mut improved = false;
                for k in 0..m {
                    for j in 0..n {
                        if j == a[k] {
                            continue;
                        }
                        let old = a[k];
                        a[k] = j;
                        let w = assignment_value(t, q, &a);
                        if w > v * (1.0 + 1e-15) {
                            v = w;
                            improved = true;
                        } else {
                            a[k] = old;
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
            (v, a)
        })
        .collect();
    let (v, a) = results
        .into_iter()
        .fold((f64::NEG_INFINITY, vec![]), |b, c| if c.0 > b.0 || (c.0 == b.0 && c.1 < b.1) { c } else { b });
    NormValue::bracket(v, lattice.max(v), Witness::Assignment(a), "standard_q:local_search")
}

/// Configuration for evaluations nested inside another search.
pub(crate) fn inner_cfg(cfg: &OptimConfig) -> OptimConfig {
    OptimConfig { restarts: cfg.restarts.min(4), refine_passes: cfg.refine_passes.min(2), ..cfg.clone() }
}

/// Norming functionals of the entries (zero entries give zero functionals).
fn norming_tuple(t: &Tuple) -> Vec<Vector> {
    let dual = dual_space(&t.space);
    t.vectors
        .iter()
        .map(|x| if x.is_zero() { dual.zero() } else { dual.norming_vector(&x.0) })
        .collect()
}

fn pq(p: Index, q: Index, t: &Tuple, cfg: &OptimConfig) -> NormValue {
    let dual = dual_space(&t.space);
    let (n, m, field) = (t.n(), t.space.dim, t.space.field);
    let w = &t.space.weights;
    let objective = |l: &[Vector]| lp_combine(t.vectors.iter().zip(l).map(|(x, y)| pair_raw(w, &x.0, &y.0).norm()), q);
    let upper = lp_combine(t.norms(), q).min(max_upper_bound(t, cfg).0);
    if upper == 0.0 {
        return NormValue::exact(0.0, Witness::Tuple(vec![dual.zero(); n]), "pq:zero");
    }
    // seeds: norming functionals with several weightings, and single entries
    let norming = norming_tuple(t);
    let norms = t.norms();
    let mut seeds: Vec<Vec<Vector>> = vec![norming.clone()];
    // the same functionals cut down to the support of their entries
    seeds.push(
        norming
            .iter()
            .zip(&t.vectors)
            .map(|(l, x)| Vector(l.0.iter().zip(&x.0).map(|(a, b)| if *b == ZERO { ZERO } else { *a }).collect()))
            .collect(),
    );
    let qc = q.conjugate();
    if !qc.is_inf() && !q.is_one() {
        seeds.push(norming.iter().zip(&norms).map(|(l, r)| l.scale(r.powf(q.value() - 1.0))).collect());
    }
    for i in 0..n {
        seeds.push((0..n).map(|j| if i == j { norming[j].clone() } else { dual.zero() }).collect());
    }
    let seeds: Vec<Vec<f64>> = seeds.iter().map(|s| flatten(s, field)).collect();
    let inner = inner_cfg(cfg);
    let unflat = |x: &[f64]| unflatten(x, n, m, field);
    let best = ratio_ascent(
        |x| objective(&unflat(x)),
        |x| mu_weak_quick(p, &Tuple { space: dual.clone(), vectors: unflat(x) }, &inner),
        seeds[0].len(),
        &seeds,
        cfg,
    );
    let Some(best) = best else {
        return NormValue::bracket(0.0, upper, Witness::None, "pq:ratio_ascent");
    };
    let l = unflat(&best.point);
    let mu = mu_weak(p, &Tuple { space: dual.clone(), vectors: l.clone() }, cfg);
    let lower = objective(&l) / mu.upper;
    let l: Vec<Vector> = l.iter().map(|v| v.scale(1.0 / mu.upper)).collect();
    NormValue::bracket(lower, upper.max(lower), Witness::Tuple(l), "pq:ratio_ascent").promote(cfg.tol)
}

/// Certified upper bound for the maximum multi-norm, with its method tag.
///
/// Real field: the average of `‖Σ ε_j x_j‖` over sign vectors. Complex
/// field: the inequality of roots `(1/k) Σ_j ‖Σ_m ζ_k^{jm} x_m‖` for
/// `k ∈ {n, 2n}` (zero padded) over entry orderings. Both are capped by
/// `Σ ‖x_j‖`.
pub fn max_upper_bound(t: &Tuple, cfg: &OptimConfig) -> (f64, &'static str) {
    let n = t.n();
    let mut best = (t.norms().iter().sum::<f64>(), "sum_of_norms");
    let dim = t.space.dim;
    match t.space.field {
        ScalarField::Real => {
            if n < 63 && (1u64 << (n - 1)) <= cfg.max_enum {
                let count = 1u64 << (n - 1);
                let total: f64 = (0..count)
                    .into_par_iter()
                    .map(|idx| {
                        let v: Vec<C64> = (0..dim)
                            .map(|k| {
                                (0..n)
                                    .map(|j| {
                                        let neg = j > 0 && (idx >> (j - 1)) & 1 == 1;
                                        t.vectors[j].0[k] * if neg { -1.0 } else { 1.0 }
                                    })
                                    .sum()
                            })
                            .collect();
                        t.space.norm_of(&v)
                    })
                    .sum();
                let avg = total / count as f64;
                if avg < best.0 {
                    best = (avg, "rademacher_average");
                }
            }
        }
        ScalarField::Complex => {
            let mut orders: Vec<Vec<usize>> = Vec::new();
            if n <= 4 {
                permutations(n, &mut orders);
            } else {
                orders.push((0..n).collect());
                let mut rng = cfg.rng(0x0dde);
                for _ in 0..cfg.restarts {
                    let mut o: Vec<usize> = (0..n).collect();
                    o.shuffle(&mut rng);
                    orders.push(o);
                }
            }
            for k in [n, 2 * n] {
                for o in &orders {
                    let r = roots_bound(t, k, o);
                    if r < best.0 {
                        best = (r, "inequality_of_roots");
                    }
                }
            }
        }
    }
    best
}

fn permutations(n: usize, out: &mut Vec<Vec<usize>>) {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    rec(&mut Vec::new(), &mut vec![false; n], out);
}

/// `(1/k) Σ_{j=1}^k ‖Σ_m ζ_k^{jm} x_{order[m]}‖`, entries beyond `n` being zero.
pub fn roots_bound(t: &Tuple, k: usize, order: &[usize]) -> f64 {
    let dim = t.space.dim;
    let total: f64 = (1..=k)
        .map(|j| {
            let v: Vec<C64> = (0..dim)
                .map(|c| {
                    order
                        .iter()
                        .enumerate()
                        .map(|(m, &src)| {
                            let phase = 2.0 * PI * ((j * (m + 1)) % k) as f64 / k as f64;
                            t.vectors[src].0[c] * C64::from_polar(1.0, phase)
                        })
                        .sum()
                })
                .collect();
            t.space.norm_of(&v)
        })
        .sum();
    total / k as f64
}

fn max_multinorm(t: &Tuple, cfg: &OptimConfig) -> NormValue {
    if t.space.p.is_one() {
        return NormValue::exact(lattice_value(t), Witness::Assignment(argmax_assignment(t)), "max:l1_lattice");
    }
    let (upper, how) = max_upper_bound(t, cfg);
    let lower = pq(Index::ONE, Index::ONE, t, cfg);
    NormValue::bracket(lower.lower, upper.max(lower.lower), lower.witness, format!("max:pq11+{how}"))
        .promote(cfg.tol)
}

/// Nuclear norm of `[α_1 x_1, ..., α_n x_n]` in isometric coordinates.
fn scaled_matrix(t: &Tuple, alpha: &[f64]) -> nalgebra::DMatrix<C64> {
    let s = t.space.isometry_scale();
    nalgebra::DMatrix::from_fn(t.space.dim, t.n(), |k, j| t.vectors[j].0[k] * (s[k] * alpha[j]))
}

fn hilbert(t: &Tuple, cfg: &OptimConfig) -> NormValue {
    let n = t.n();
    let norms = t.norms();
    let upper = lp_combine(norms.iter().cloned(), Index::TWO);
    if upper == 0.0 {
        return NormValue::exact(0.0, Witness::Point(Vector::real(&vec![0.0; n])), "hilbert:zero");
    }
    let mut starts: Vec<Vec<f64>> = vec![vec![1.0 / (n as f64).sqrt(); n], norms.iter().map(|r| r / upper).collect()];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        starts.push(e);
    }
    for i in 0..cfg.restarts.min(8) {
        let mut rng = cfg.rng(i as u64);
        let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal).abs()).collect();
        let nv = lp_combine(v.iter().cloned(), Index::TWO);
        starts.push(v.iter().map(|x| x / nv).collect());
    }
    let s = t.space.isometry_scale();
    let results: Vec<(f64, Vec<f64>)> = starts
        .into_par_iter()
        .map(|mut alpha| {
            let mut val = nuclear_norm(&scaled_matrix(t, &alpha));
            for _ in 0..500 {
                let svd = scaled_matrix(t, &alpha).svd(true, true);
                let (u, v_t) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
                let w = u * v_t;
                let c: Vec<f64> = (0..n)
                    .map(|j| {
                        let dot: C64 = (0..t.space.dim).map(|k| w[(k, j)].conj() * t.vectors[j].0[k] * s[k]).sum();
                        dot.re.max(0.0)
                    })
                    .collect();
                let nc = lp_combine(c.iter().cloned(), Index::TWO);
                if nc == 0.0 {
                    break;
                }
                let next: Vec<f64> = c.iter().map(|x| x / nc).collect();
                let nv = nuclear_norm(&scaled_matrix(t, &next));
                if nv <= val * (1.0 + 1e-14) {
                    if nv > val {
                        val = nv;
                        alpha = next;
                    }
                    break;
                }
                val = nv;
                alpha = next;
            }
            (val, alpha)
        })
        .collect();
    let (val, alpha) = results.into_iter().fold((f64::NEG_INFINITY, vec![]), |b, c| if c.0 > b.0 { c } else { b });
    NormValue::bracket(val, upper.max(val), Witness::Point(Vector::real(&alpha)), "hilbert:nuclear_ascent")
        .promote(cfg.tol)
}

fn generated(family: &FamilyOfDecompositions, t: &Tuple, cfg: &OptimConfig) -> Result<NormValue> {
    let n = t.n();
    let mut best = NormValue::exact(t.max_norm(), Witness::None, "generated:trivial");
    for (mi, d) in family.members.iter().enumerate() {
        let k = d.len();
        let count = count_assignments(n, k);
        if count > cfg.max_enum as u128 {
            return Err(Error::Budget { needed: count, budget: cfg.max_enum });
        }
        let (value, idx) = (0..count as u64)
            .into_par_iter()
            .map(|idx| {
                let phi = assignments(idx, n, k);
                let v: Vec<C64> = (0..t.space.dim)
                    .map(|r| {
                        (0..k)
                            .map(|i| (0..t.space.dim).map(|c| d.projections[i][(r, c)] * t.vectors[phi[i]].0[c]).sum::<C64>())
                            .sum()
                    })
                    .collect();
                (t.space.norm_of(&v), idx)
            })
            .reduce(|| (f64::NEG_INFINITY, u64::MAX), |a, b| if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) { a } else { b });
        if value > best.lower {
            let mut phi = vec![mi];
            phi.extend(assignments(idx, n, k));
            best = NormValue::exact(value, Witness::Assignment(phi), "generated:enumeration");
        }
    }
    Ok(best)
}

fn numerical_dual(base: &MultiNormSpec, t: &Tuple, cfg: &OptimConfig) -> Result<NormValue> {
    let primal = dual_space(&t.space);
    let (n, m, field) = (t.n(), primal.dim, primal.field);
    let w = &primal.weights;
    let upper: f64 = t.norms().iter().sum();
    if upper == 0.0 {
        return Ok(NormValue::exact(0.0, Witness::Tuple(vec![primal.zero(); n]), "numerical_dual:zero"));
    }
    let unflat = |x: &[f64]| unflatten(x, n, m, field);
    let objective = |x: &[f64]| {
        let xs = unflat(x);
        xs.iter().zip(&t.vectors).map(|(a, l)| pair_raw(w, &a.0, &l.0)).sum::<C64>().norm()
    };
    let inner = inner_cfg(cfg);
    let member = |x: &[f64]| -> f64 {
        let v = eval_unchecked(base, &Tuple { space: primal.clone(), vectors: unflat(x) }, &inner);
        v.map_or(f64::NAN, |v| if v.upper.is_finite() { v.upper } else { v.lower })
    };
    // norming vectors aligned so that every pairing is real and positive
    let norming: Vec<Vector> = t
        .vectors
        .iter()
        .map(|l| if l.is_zero() { primal.zero() } else { primal.norming_vector(&l.0) })
        .collect();
    let mut seeds = vec![flatten(&norming, field)];
    for i in 0..n {
        let s: Vec<Vector> = (0..n).map(|j| if i == j { norming[j].clone() } else { primal.zero() }).collect();
        seeds.push(flatten(&s, field));
    }
    let v = ball_linear_max(member, objective, seeds[0].len(), &seeds, cfg)?;
    let (lower, witness) = match &v.witness {
        Witness::Point(p) => {
            let params: Vec<f64> = p.0.iter().map(|z| z.re).collect();
            let xs = unflat(&params);
            let exact = eval_unchecked(base, &Tuple { space: primal.clone(), vectors: xs.clone() }, cfg)?;
            let scale = if exact.upper.is_finite() { exact.upper } else { exact.lower };
            (objective(&params) / scale, Witness::Tuple(xs.iter().map(|x| x.scale(1.0 / scale)).collect()))
        }
        _ => (0.0, Witness::None),
    };
    Ok(NormValue::bracket(lower, upper.max(lower), witness, "numerical_dual:ball_linear_max").promote(cfg.tol))
}

/// One of the defining axioms of (dual) multi-norms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axiom {
    A1,
    A2,
    A3,
    A4,
    B4,
    /// `‖a·x‖_m ≤ ‖a : l^r_n → l^r_m‖ ‖x‖_n` for a sampled matrix `a`.
    MatrixLaw,
    /// A coagulation does not increase the value.
    Coagulation,
}

/// A failed axiom instance: `lhs = ‖lhs_tuple‖` against `rhs = factor · ‖rhs_tuple‖`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub lhs_tuple: Vec<Vector>,
    pub rhs_tuple: Vec<Vector>,
    pub factor: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    /// The matrix applied to `rhs_tuple`, for matrix-law violations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Matrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub spec: String,
    pub checked: Vec<Axiom>,
    pub violations: Vec<Violation>,
    pub violation_count: usize,
    pub trials: usize,
    pub tol: f64,
    /// Tolerance used when a compared value came from a search.
    pub search_tol: f64,
    /// Set when any compared value was not exact.
    pub heuristic: bool,
}

/// Tolerance for comparisons involving search-based values.
pub const SEARCH_TOL: f64 = 2e-2;
/// At most this many violations are stored in a report.
pub(crate) const MAX_STORED: usize = 64;

/// A random vector with occasional zero coordinates and repeated moduli.
pub fn random_vector(space: &SpaceSpec, rng: &mut ChaCha8Rng) -> Vector {
    let sparse = rng.random_bool(0.25);
    Vector(
        (0..space.dim)
            .map(|_| {
                if sparse && rng.random_bool(0.4) {
                    return ZERO;
                }
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = if space.field == ScalarField::Complex { rng.sample(StandardNormal) } else { 0.0 };
                C64::new(re, im)
            })
            .collect(),
    )
}

/// A random tuple of length `n`; sometimes with repeated entries or a zero entry.
pub fn random_tuple(space: &SpaceSpec, n: usize, rng: &mut ChaCha8Rng) -> Tuple {
    let mut v: Vec<Vector> = (0..n).map(|_| random_vector(space, rng)).collect();
    if n > 1 && rng.random_bool(0.15) {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        v[i] = v[j].clone();
    }
    if n > 1 && rng.random_bool(0.1) {
        let i = rng.random_range(0..n);
        v[i] = space.zero();
    }
    Tuple { space: space.clone(), vectors: v }
}

struct Compare {
    lhs: NormValue,
    rhs: NormValue,
}

impl Compare {
    fn exact(&self) -> bool {
        self.lhs.is_exact() && self.rhs.is_exact()
    }
}

/// Audits (A1)–(A3) and (A4) or (B4) on `trials` random tuples of length at most `n_max`.
///
/// Exact values are compared with `cfg.tol.max(1e-8)` relative to
/// `max(1, rhs)`; comparisons involving search values use [`SEARCH_TOL`] on
/// certified lower bounds and mark the report heuristic. A weak-summing
/// norm with `p > 1` is audited for (A1)–(A3) only.
pub fn check_axioms(
    spec: &MultiNormSpec,
    space: &SpaceSpec,
    n_max: usize,
    trials: usize,
    cfg: &OptimConfig,
) -> Result<AxiomReport> {
    spec.validate(space)?;
    if n_max == 0 {
        return Err(Error::Invalid("n_max must be positive".into()));
    }
    let tol = cfg.tol.max(1e-8);
    let fourth = match spec {
        MultiNormSpec::WeakSumming { p } if !p.is_one() => None,
        s if s.is_dual() => Some(Axiom::B4),
        _ => Some(Axiom::A4),
    };
    let mut checked = vec![Axiom::A1, Axiom::A2, Axiom::A3];
    checked.extend(fourth);
    let eval = |v: &[Vector]| eval_unchecked(spec, &Tuple { space: space.clone(), vectors: v.to_vec() }, cfg);
    let per_trial: Vec<Result<(Vec<Violation>, bool)>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = cfg.rng(i as u64);
            let n = rng.random_range(1..=n_max);
            let x = random_tuple(space, n, &mut rng).vectors;
            let base = eval(&x)?;
            let mut out = Vec::new();
            let mut heuristic = !base.is_exact();
            let mut record = |axiom: Axiom, l: Vec<Vector>, r: Vec<Vector>, factor: f64, c: Compare, eq: bool| {
                let (lhs, rhs, t) = if c.exact() {
                    (c.lhs.lower, factor * c.rhs.lower, tol)
                } else {
                    heuristic = true;
                    (c.lhs.lower, factor * c.rhs.lower, SEARCH_TOL)
                };
                let gap = if eq { (lhs - rhs).abs() } else { lhs - rhs };
                if gap > t * rhs.abs().max(lhs.abs()).max(1.0) {
                    out.push(Violation { axiom, lhs_tuple: l, rhs_tuple: r, factor, lhs, rhs, gap, matrix: None });
                }
            };
            // (A1) permutation
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let xp: Vec<Vector> = perm.iter().map(|&j| x[j].clone()).collect();
            record(Axiom::A1, xp.clone(), x.clone(), 1.0, Compare { lhs: eval(&xp)?, rhs: base.clone() }, true);
            // (A2) diagonal contraction
            let alpha: Vec<C64> = (0..n)
                .map(|_| {
                    let r: f64 = rng.random_range(0.0..=1.0);
                    match space.field {
                        ScalarField::Real => C64::new(if rng.random_bool(0.5) { r } else { -r }, 0.0),
                        ScalarField::Complex => C64::from_polar(r, rng.random_range(0.0..2.0 * PI)),
                    }
                })
                .collect();
            let amax = alpha.iter().fold(0.0f64, |a, z| a.max(z.norm()));
            let xa: Vec<Vector> = x.iter().zip(&alpha).map(|(v, a)| v.scale_c(*a)).collect();
            record(Axiom::A2, xa.clone(), x.clone(), amax, Compare { lhs: eval(&xa)?, rhs: base.clone() }, false);
            // (A3) append zero
            let mut xz = x.clone();
            xz.push(space.zero());
            record(Axiom::A3, xz.clone(), x.clone(), 1.0, Compare { lhs: eval(&xz)?, rhs: base.clone() }, true);
            // (A4) / (B4) repeat the last entry
            let mut xr = x.clone();
            xr.push(x[n - 1].clone());
            match fourth {
                Some(Axiom::A4) => {
                    record(Axiom::A4, xr.clone(), x.clone(), 1.0, Compare { lhs: eval(&xr)?, rhs: base.clone() }, true)
                }
                Some(Axiom::B4) => {
                    let mut xd = x.clone();
                    xd[n - 1] = x[n - 1].scale(2.0);
                    let c = Compare { lhs: eval(&xr)?, rhs: eval(&xd)? };
                    record(Axiom::B4, xr.clone(), xd, 1.0, c, true)
                }
                _ => {}
            }
            Ok((out, heuristic))
        })
        .collect();
    let mut violations = Vec::new();
    let mut count = 0;
    let mut heuristic = false;
    for r in per_trial {
        let (v, h) = r?;
        heuristic |= h;
        count += v.len();
        for x in v {
            if violations.len() < MAX_STORED {
                violations.push(x);
            }
        }
    }
    Ok(AxiomReport {
        spec: spec.name(),
        checked,
        violations,
        violation_count: count,
        trials,
        tol,
        search_tol: SEARCH_TOL,
        heuristic,
    })
}

/// Unit-vector tuples used to seed growth searches.
fn growth_seeds(space: &SpaceSpec, n: usize) -> Vec<Vec<Vector>> {
    let mut out = Vec::new();
    if n <= space.dim {
        out.push((0..n).map(|k| space.unit_basis(k)).collect());
    }
    out.push(vec![space.unit_basis(0); n]);
    if let Some(r) = crate::summing::roots_of_unity_tuple(space, n) {
        out.push(r);
    }
    out
}

/// Analytic upper bound for `φ_n` of the given multi-norm.
fn growth_upper(spec: &MultiNormSpec, space: &SpaceSpec, n: usize, cfg: &OptimConfig) -> f64 {
    let nf = n as f64;
    match spec {
        MultiNormSpec::Min => 1.0,
        MultiNormSpec::StandardQ { q } | MultiNormSpec::Pq { q, .. } => nf.powf(q.recip()),
        MultiNormSpec::Lattice | MultiNormSpec::Partition { .. } => nf.powf(space.p.recip()),
        MultiNormSpec::Hilbert => nf.sqrt(),
        MultiNormSpec::LpSum { p } | MultiNormSpec::WeakSumming { p } => nf.powf(p.recip()),
        MultiNormSpec::Generated { family } => {
            let bound = family
                .members
                .iter()
                .map(|d| {
                    d.projections
                        .iter()
                        .map(|pm| {
                            let op = MatrixOp { entries: weighted(space, pm), p: space.p, q: space.p, field: space.field };
                            op_norm_pq(&op, cfg).upper
                        })
                        .sum::<f64>()
                })
                .fold(1.0, f64::max);
            bound
        }
        MultiNormSpec::Extended { base, ops } => {
            let b = growth_upper(base, space, n, cfg);
            let t = ops
                .iter()
                .map(|m| {
                    let op = MatrixOp { entries: weighted(space, m), p: space.p, q: space.p, field: space.field };
                    op_norm_pq(&op, cfg).upper
                })
                .fold(1.0, f64::max);
            b * t
        }
        _ => nf,
    }
}

/// Matrix of an operator on the space in its unweighted isometric copy.
pub(crate) fn weighted(space: &SpaceSpec, m: &nalgebra::DMatrix<C64>) -> nalgebra::DMatrix<C64> {
    let s = space.isometry_scale();
    nalgebra::DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (s[i] / s[j]))
}

/// `φ_n = sup{‖(x_1, ..., x_n)‖_n : x_j ∈ E_{[1]}}`.
///
/// Canonical unit tuples are evaluated first; if one attains the analytic
/// bound the result is exact without further search.
pub fn rate_of_growth(spec: &MultiNormSpec, space: &SpaceSpec, n: usize, cfg: &OptimConfig) -> Result<NormValue> {
    spec.validate(space)?;
    if n == 0 {
        return Err(Error::Invalid("n must be positive".into()));
    }
    let upper = growth_upper(spec, space, n, cfg);
    let seeds = growth_seeds(space, n);
    let mut best = (f64::NEG_INFINITY, seeds[0].clone());
    for s in &seeds {
        let v = eval_unchecked(spec, &Tuple { space: space.clone(), vectors: s.clone() }, cfg)?.lower;
        if v > best.0 {
            best = (v, s.clone());
        }
    }
    if best.0 >= upper * (1.0 - cfg.tol) {
        return Ok(NormValue::exact(best.0, Witness::Tuple(best.1), "growth:canonical"));
    }
    let unflat = |x: &[f64]| unflatten(x, n, space.dim, space.field);
    let normalise = |x: &mut Vec<f64>| {
        let mut v = unflat(x);
        for u in v.iter_mut() {
            let nu = space.norm_of(&u.0);
            if !(nu.is_finite() && nu > 0.0) {
                return false;
            }
            *u = u.scale(1.0 / nu);
        }
        *x = flatten(&v, space.field);
        true
    };
    let flat_seeds: Vec<Vec<f64>> = seeds.iter().map(|s| flatten(s, space.field)).collect();
    let inner = inner_cfg(cfg);
    let found = local_search(
        |x| {
            eval_unchecked(spec, &Tuple { space: space.clone(), vectors: unflat(x) }, &inner)
                .map_or(f64::NEG_INFINITY, |v| v.lower)
        },
        normalise,
        flat_seeds[0].len(),
        &flat_seeds,
        Direction::Maximize,
        cfg,
    );
    if let Some(a) = found {
        let x = unflat(&a.point);
        let v = eval_unchecked(spec, &Tuple { space: space.clone(), vectors: x.clone() }, cfg)?.lower;
        if v > best.0 {
            best = (v, x);
        }
    }
    Ok(NormValue::bracket(best.0, upper.max(best.0), Witness::Tuple(best.1), "growth:search").promote(cfg.tol))
}

/// Result of [`sup_and_multinull`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiNullResult {
    /// `‖(x_1, ..., x_H)‖_H`.
    pub sup: NormValue,
    /// Least `n₀` whose tail norm is below `ε`; `None` when not found at the horizon.
    pub prefix: Option<usize>,
    pub horizon: usize,
    /// Certified upper bound of `‖(x_{n₀+1}, ..., x_H)‖` for each `n₀ < H`.
    pub tail_upper: Vec<f64>,
}

/// Sup value of a finite sequence and the multi-null prefix test.
///
/// By monotonicity in the tuple length, the supremum over tail windows
/// `(x_{n₀+1}, ..., x_{n₀+k})` is the value of the whole tail. The tail
/// must be non-empty, so `n₀ < H`; an all-zero sequence gives `n₀ = 0`.
pub fn sup_and_multinull(
    spec: &MultiNormSpec,
    space: &SpaceSpec,
    seq: &[Vector],
    eps: f64,
    cfg: &OptimConfig,
) -> Result<MultiNullResult> {
    let whole = Tuple::new(space.clone(), seq.to_vec())?;
    let sup = evaluate(spec, &whole, cfg)?;
    let tail_upper: Vec<f64> = (0..seq.len())
        .map(|n0| eval_unchecked(spec, &whole.with_vectors(seq[n0..].to_vec()), cfg).map(|v| v.upper))
        .collect::<Result<_>>()?;
    let prefix = tail_upper.iter().position(|v| *v < eps);
    Ok(MultiNullResult { sup, prefix, horizon: seq.len(), tail_upper })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg() -> OptimConfig {
        OptimConfig::default().with_restarts(8)
    }

    fn ev(spec: &MultiNormSpec, t: &Tuple) -> NormValue {
        evaluate(spec, t, &cfg()).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let l1 = SpaceSpec::lp(1.0, 2);
        let d = Tuple::deltas(&l1, 2).unwrap();
        assert_eq!(ev(&MultiNormSpec::Lattice, &d).lower, 2.0);
        let v = ev(&MultiNormSpec::StandardQ { q: Index::TWO }, &d);
        assert!(v.is_exact());
        assert_abs_diff_eq!(v.lower, 2f64.sqrt(), epsilon = 1e-15);
        let x = Tuple::from_real(&SpaceSpec::lp(3.0, 2), &[&[1.0, -2.0]]).unwrap();
        assert_abs_diff_eq!(ev(&MultiNormSpec::Min, &x).lower, 9f64.powf(1.0 / 3.0), epsilon = 1e-14);
    }

    #[test]
    fn max_on_deltas() {
        for r in [1.0, 1.5, 2.0] {
            for n in [2, 3] {
                let t = Tuple::deltas(&SpaceSpec::lp(r, 3), n).unwrap();
                let v = ev(&MultiNormSpec::Max, &t);
                let target = (n as f64).powf(1.0 / r);
                assert!(v.contains(target, 1e-9), "{v:?} vs {target}");
                assert!(v.width() <= 5e-2);
            }
        }
    }

    #[test]
    fn pq_on_deltas() {
        for (r, p, q) in [(1.0, 1.0, 2.0), (1.5, 2.0, 3.0), (2.0, 2.0, 2.0)] {
            let t = Tuple::deltas(&SpaceSpec::lp(r, 3), 3).unwrap();
            let spec = MultiNormSpec::Pq { p: Index::new(p).unwrap(), q: Index::new(q).unwrap() };
            let v = ev(&spec, &t);
            assert_abs_diff_eq!(v.lower, 3f64.powf(1.0 / q), epsilon = 1e-6);
            assert_abs_diff_eq!(v.upper, 3f64.powf(1.0 / q), epsilon = 1e-12);
        }
    }

    #[test]
    fn hilbert_on_scaled_deltas() {
        let beta = [0.3, -2.0, 1.1];
        let space = SpaceSpec::lp(2.0, 3);
        let t = Tuple::new(space.clone(), (0..3).map(|k| space.basis(k).scale(beta[k])).collect()).unwrap();
        let v = ev(&MultiNormSpec::Hilbert, &t);
        let target = beta.iter().map(|b| b * b).sum::<f64>().sqrt();
        assert_abs_diff_eq!(v.lower, target, epsilon = 1e-9);
    }

    #[test]
    fn standard_q_enumeration_matches_brute_force() {
        let space = SpaceSpec::lp(1.0, 3);
        let t = Tuple::from_real(&space, &[&[1.0, 0.5, -0.2], &[0.1, 2.0, 0.7]]).unwrap();
        let v = ev(&MultiNormSpec::StandardQ { q: Index::TWO }, &t);
        let mut best: f64 = 0.0;
        for a in 0..8u32 {
            let (mut s0, mut s1) = (0.0, 0.0);
            for k in 0..3 {
                if (a >> k) & 1 == 0 {
                    s0 += t.vectors[0].0[k].norm();
                } else {
                    s1 += t.vectors[1].0[k].norm();
                }
            }
            best = best.max((s0 * s0 + s1 * s1).sqrt());
        }
        assert_abs_diff_eq!(v.lower, best, epsilon = 1e-14);
        let small = OptimConfig { max_enum: 4, ..cfg() };
        let ls = evaluate(&MultiNormSpec::StandardQ { q: Index::TWO }, &t, &small).unwrap();
        assert!(ls.lower <= best + 1e-14 && ls.upper >= best - 1e-14);
    }

    #[test]
    fn invalid_specs() {
        let l1 = SpaceSpec::lp(2.0, 2);
        let t = Tuple::deltas(&l1, 2).unwrap();
        let bad = MultiNormSpec::Pq { p: Index::TWO, q: Index::ONE };
        assert!(matches!(evaluate(&bad, &t, &cfg()), Err(Error::Spec(_))));
        let bad = MultiNormSpec::StandardQ { q: Index::new(1.5).unwrap() };
        assert!(matches!(evaluate(&bad, &t, &cfg()), Err(Error::Spec(_))));
        let t1 = Tuple::deltas(&SpaceSpec::lp(1.0, 2), 2).unwrap();
        assert!(matches!(evaluate(&MultiNormSpec::Hilbert, &t1, &cfg()), Err(Error::Spec(_))));
        let bad = MultiNormSpec::Partition { blocks: vec![vec![0], vec![0, 1]] };
        assert!(matches!(evaluate(&bad, &t, &cfg()), Err(Error::Spec(_))));
    }

    #[test]
    fn spec_json() {
        let s: MultiNormSpec = serde_json::from_str(r#"{"variant":"pq","p":1,"q":2}"#).unwrap();
        assert_eq!(s, MultiNormSpec::Pq { p: Index::ONE, q: Index::TWO });
        let s: MultiNormSpec =
            serde_json::from_str(r#"{"variant":"numerical_dual","base":{"variant":"lattice"}}"#).unwrap();
        assert_eq!(s, MultiNormSpec::NumericalDual { base: Box::new(MultiNormSpec::Lattice) });
        let s: MultiNormSpec = serde_json::from_str(r#"{"variant":"standard_q","q":"inf"}"#).unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"variant":"standard_q","q":"inf"}"#);
    }

    #[test]
    fn axiom_examples() {
        let c = cfg();
        let r = check_axioms(&MultiNormSpec::Min, &SpaceSpec::lp(2.0, 3), 4, 200, &c).unwrap();
        assert_eq!(r.violation_count, 0);
        let r = check_axioms(&MultiNormSpec::LpSum { p: Index::TWO }, &SpaceSpec::lp(2.0, 3), 3, 50, &c).unwrap();
        assert!(r.violations.iter().any(|v| v.axiom == Axiom::A4));
        assert!(r.violations.iter().all(|v| v.axiom == Axiom::A4));
        let r = check_axioms(&MultiNormSpec::DualLattice, &SpaceSpec::lp(1.0, 2), 4, 200, &c).unwrap();
        assert_eq!(r.checked.last(), Some(&Axiom::B4));
        assert_eq!(r.violation_count, 0);
    }

    #[test]
    fn violation_witness_reevaluates() {
        let c = cfg();
        let space = SpaceSpec::lp(2.0, 3);
        let spec = MultiNormSpec::LpSum { p: Index::TWO };
        let r = check_axioms(&spec, &space, 3, 20, &c).unwrap();
        for v in &r.violations {
            let l = evaluate(&spec, &Tuple::new(space.clone(), v.lhs_tuple.clone()).unwrap(), &c).unwrap().lower;
            let rr = evaluate(&spec, &Tuple::new(space.clone(), v.rhs_tuple.clone()).unwrap(), &c).unwrap().lower;
            assert_abs_diff_eq!((l - v.factor * rr).abs(), v.gap, epsilon = 1e-12);
        }
    }

    #[test]
    fn growth_examples() {
        let c = cfg();
        let v = rate_of_growth(&MultiNormSpec::Min, &SpaceSpec::lp(3.0, 3), 5, &c).unwrap();
        assert!(v.is_exact() && v.lower == 1.0);
        let v = rate_of_growth(&MultiNormSpec::Max, &SpaceSpec::lp(1.0, 2), 2, &c).unwrap();
        assert!(v.is_exact());
        assert_abs_diff_eq!(v.lower, 2.0, epsilon = 1e-12);
        let v = rate_of_growth(&MultiNormSpec::StandardQ { q: Index::new(3.0).unwrap() }, &SpaceSpec::lp(2.0, 4), 3, &c)
            .unwrap();
        assert!(v.is_exact());
        assert_abs_diff_eq!(v.lower, 3f64.powf(1.0 / 3.0), epsilon = 1e-12);
    }

    #[test]
    fn multinull_examples() {
        let c = cfg();
        let space = SpaceSpec::lp(2.0, 1);
        let seq: Vec<Vector> = (1..=20).map(|i| Vector::real(&[1.0 / i as f64])).collect();
        let r = sup_and_multinull(&MultiNormSpec::Min, &space, &seq, 0.1, &c).unwrap();
        assert_eq!(r.prefix, Some(10));
        assert_eq!(r.sup.lower, 1.0);
        let zero = vec![space.zero(); 5];
        let r = sup_and_multinull(&MultiNormSpec::Lattice, &space, &zero, 0.1, &c).unwrap();
        assert_eq!((r.sup.lower, r.prefix), (0.0, Some(0)));
        let space = SpaceSpec::lp(2.0, 6);
        let alpha = [1.0, -0.5, 0.25, 2.0, 0.0, 0.1];
        let seq: Vec<Vector> = (0..6).map(|i| space.basis(i).scale(alpha[i])).collect();
        let r = sup_and_multinull(&MultiNormSpec::StandardQ { q: Index::TWO }, &space, &seq, 1e-3, &c).unwrap();
        assert_abs_diff_eq!(r.sup.lower, alpha.iter().map(|a| a * a).sum::<f64>().sqrt(), epsilon = 1e-14);
        assert_eq!(r.prefix, None);
    }

    #[test]
    fn extended_with_identity_is_base() {
        let space = SpaceSpec::lp(1.5, 3);
        let mut rng = OptimConfig::default().rng(3);
        let t = random_tuple(&space, 3, &mut rng);
        let base = MultiNormSpec::StandardQ { q: Index::TWO };
        let ext = MultiNormSpec::Extended { base: Box::new(base.clone()), ops: vec![Matrix::identity(3)] };
        assert_eq!(ev(&ext, &t).lower, ev(&base, &t).lower);
        let missing = MultiNormSpec::Extended { base: Box::new(base), ops: vec![] };
        assert!(evaluate(&missing, &t, &cfg()).is_err());
    }
}
