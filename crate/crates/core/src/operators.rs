//! Amplifications, multi-bounds of finite sets and multi-bounded operator
//! norms between multi-normed spaces.
//!
//! `‖T‖_mb = sup_n ‖T^{(n)}‖` is truncated at a finite level; every level
//! is reported with its own bracket. Multi-continuity coincides with
//! multi-boundedness, so no separate continuity check exists.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multinorms::{eval_unchecked, inner_cfg, MultiNormSpec};
use crate::optim::{op_norm_pq, ratio_ascent, NormValue, OptimConfig, Witness};
use crate::spaces::{flatten, top_singular, unflatten, Index, Matrix, MatrixOp, ScalarField, SpaceSpec, Tuple, Vector, C64};

/// Levels `p_n(T)` of a multi-bounded norm estimate for `n = 1..=n_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MBNormResult {
    /// Certified lower bounds, made nondecreasing (a lower bound at level
    /// `n` is one at level `n + 1` by zero padding).
    pub p_seq: Vec<f64>,
    pub levels: Vec<NormValue>,
    pub sup_estimate: NormValue,
    /// Whether the raw per-level lower bounds were already nondecreasing.
    pub monotone: bool,
    pub n_max: usize,
}

fn check_operator(t: &Matrix, source: &SpaceSpec, target: &SpaceSpec) -> Result<()> {
    if t.ncols() != source.dim {
        return Err(Error::Dimension { expected: source.dim, found: t.ncols() });
    }
    if t.nrows() != target.dim {
        return Err(Error::Dimension { expected: target.dim, found: t.nrows() });
    }
    if source.field != target.field {
        return Err(Error::Field("source and target must share the scalar field".into()));
    }
    if source.field == ScalarField::Real && t.iter().any(|z| z.im != 0.0) {
        return Err(Error::Field("complex matrix between real spaces".into()));
    }
    Ok(())
}

/// The matrix of `T` between the unweighted isometric copies of the spaces.
fn unweighted(t: &Matrix, source: &SpaceSpec, target: &SpaceSpec) -> MatrixOp {
    let (s, r) = (source.isometry_scale(), target.isometry_scale());
    MatrixOp {
        entries: DMatrix::from_fn(t.nrows(), t.ncols(), |i, j| t[(i, j)] * (r[i] / s[j])),
        p: source.p,
        q: target.p,
        field: source.field,
    }
}

/// `‖T : E → F‖`, with the witness mapped back to the coordinates of `E`.
pub fn operator_norm(t: &Matrix, source: &SpaceSpec, target: &SpaceSpec, cfg: &OptimConfig) -> Result<NormValue> {
    check_operator(t, source, target)?;
    let mut v = op_norm_pq(&unweighted(t, source, target), cfg);
    if let Witness::Point(x) = &v.witness {
        let s = source.isometry_scale();
        v.witness = Witness::Point(Vector(x.0.iter().zip(&s).map(|(z, sk)| z / *sk).collect()));
    }
    Ok(v)
}

/// `T^{(n)}(x_1, ..., x_n) = (T x_1, ..., T x_n)`.
pub fn amplify(t: &Matrix, x: &Tuple, target: &SpaceSpec) -> Result<Tuple> {
    check_operator(t, &x.space, target)?;
    Ok(Tuple {
        space: target.clone(),
        vectors: x.vectors.iter().map(|v| Vector(crate::spaces::apply(t, &v.0))).collect(),
    })
}

/// Multi-bound `c_B` of a finite set: the value of the tuple listing all of
/// its elements, which dominates every tuple drawn from the set.
pub fn multi_bound(spec: &MultiNormSpec, pool: &Tuple, cfg: &OptimConfig) -> Result<NormValue> {
    crate::multinorms::evaluate(spec, pool, cfg)
}

/// True when `T` has rank at most one to working precision.
fn is_rank_one(t: &DMatrix<C64>) -> bool {
    let frob2: f64 = t.iter().map(|z| z.norm_sqr()).sum();
    let (s, _) = top_singular(t);
    frob2 - s * s <= 1e-12 * frob2
}

/// Seed tuples of length `n`: windows of unit vectors, the norming vector
/// of `T` alone and repeated.
fn level_seeds(space: &SpaceSpec, n: usize, norming: Option<&Vector>) -> Vec<Vec<Vector>> {
    let dim = space.dim;
    let mut out = Vec::new();
    for s in 0..dim {
        out.push((0..n).map(|j| if j < dim { space.unit_basis((s + j) % dim) } else { space.zero() }).collect());
    }
    if let Some(v) = norming {
        out.push((0..n).map(|j| if j == 0 { v.clone() } else { space.zero() }).collect());
        out.push(vec![v.clone(); n]);
    }
    out
}

/// Sup of `numer / denom` over tuples of length `n` on `source`, certified
/// by re-evaluating the best point with the full configuration.
fn tuple_ratio<F>(
    source: &SpaceSpec,
    spec_e: &MultiNormSpec,
    n: usize,
    seeds: &[Vec<Vector>],
    numer: F,
    cfg: &OptimConfig,
) -> Result<(f64, Vec<Vector>)>
where
    F: Fn(&[Vector], &OptimConfig) -> Result<f64> + Sync,
{
    let (dim, field) = (source.dim, source.field);
    let inner = OptimConfig { restarts: 1, ..inner_cfg(cfg) };
    let search = OptimConfig { restarts: cfg.restarts.min(4), tol: cfg.tol.max(1e-7), ..cfg.clone() };
    let tuple = |x: &[f64]| unflatten(x, n, dim, field);
    let denom = |v: &[Vector], c: &OptimConfig| {
        eval_unchecked(spec_e, &Tuple { space: source.clone(), vectors: v.to_vec() }, c).map(|r| r.upper)
    };
    let flat: Vec<Vec<f64>> = seeds.iter().map(|s| flatten(s, field)).collect();
    let best = ratio_ascent(
        |x| numer(&tuple(x), &inner).unwrap_or(0.0),
        |x| denom(&tuple(x), &inner).unwrap_or(f64::NAN),
        n * dim * if field == ScalarField::Complex { 2 } else { 1 },
        &flat,
        &search,
    );
    let Some(best) = best else { return Ok((0.0, vec![source.zero(); n])) };
    let x = tuple(&best.point);
    let d = denom(&x, cfg)?;
    if !(d.is_finite() && d > 0.0) {
        return Ok((0.0, x));
    }
    let value = numer(&x, cfg)? / d;
    Ok((value, x.iter().map(|v| v.scale(1.0 / d)).collect()))
}

/// Estimates `p_n(T) = ‖T^{(n)} : (E^n, ‖·‖_n) → (F^n, ‖·‖_n)‖` for
/// `n = 1..=n_max`.
///
/// When the target is the minimum multi-norm or the source the maximum
/// one, every level equals `‖T‖`. Otherwise each level is a ratio ascent
/// seeded with unit-vector tuples; the upper bound is `n ‖T‖`, or `‖T‖`
/// for a rank-one `T` into a multi-norm.
pub fn mb_norm(
    t: &Matrix,
    source: &SpaceSpec,
    spec_e: &MultiNormSpec,
    target: &SpaceSpec,
    spec_f: &MultiNormSpec,
    n_max: usize,
    cfg: &OptimConfig,
) -> Result<MBNormResult> {
    spec_e.validate(source)?;
    spec_f.validate(target)?;
    if n_max == 0 {
        return Err(Error::Invalid("n_max must be positive".into()));
    }
    let op = operator_norm(t, source, target, cfg)?;
    let fast = match (spec_e, spec_f) {
        (_, MultiNormSpec::Min) => Some("mb:minimum_target"),
        (MultiNormSpec::Max, _) => Some("mb:maximum_source"),
        _ => None,
    };
    let levels: Vec<NormValue> = if let Some(method) = fast {
        vec![op.clone().with_method(method); n_max]
    } else {
        let rank_one = !spec_f.is_dual() && is_rank_one(t);
        let norming = match &op.witness {
            Witness::Point(v) => Some(v.clone()),
            _ => None,
        };
        (1..=n_max)
            .into_par_iter()
            .map(|n| {
                let upper = if rank_one { op.upper } else { n as f64 * op.upper };
                if n == 1 {
                    return Ok(op.clone().with_method("mb:operator_norm"));
                }
                let seeds = level_seeds(source, n, norming.as_ref());
                let numer = |x: &[Vector], c: &OptimConfig| {
                    let image = Tuple {
                        space: target.clone(),
                        vectors: x.iter().map(|v| Vector(crate::spaces::apply(t, &v.0))).collect(),
                    };
                    eval_unchecked(spec_f, &image, c).map(|r| r.lower)
                };
                let (value, x) = tuple_ratio(source, spec_e, n, &seeds, numer, cfg)?;
                let (lower, witness) = if value >= op.lower {
                    (value, Witness::Tuple(x))
                } else {
                    let mut padded = vec![source.zero(); n];
                    if let Some(v) = &norming {
                        padded[0] = v.clone();
                    }
                    (op.lower, Witness::Tuple(padded))
                };
                Ok(NormValue::bracket(lower, upper.max(lower), witness, "mb:ratio_ascent").promote(cfg.tol))
            })
            .collect::<Result<_>>()?
    };
    let raw: Vec<f64> = levels.iter().map(|v| v.lower).collect();
    let monotone = raw.windows(2).all(|w| w[1] >= w[0] - cfg.tol.max(1e-12) * w[0].max(1.0));
    let p_seq: Vec<f64> = raw
        .iter()
        .scan(0.0f64, |m, v| {
            *m = m.max(*v);
            Some(*m)
        })
        .collect();
    let best = levels
        .iter()
        .enumerate()
        .fold(0, |b, (i, v)| if v.lower > levels[b].lower { i } else { b });
    let top = &levels[best];
    let upper = levels.iter().map(|v| v.upper).fold(0.0, f64::max);
    let sup_estimate = NormValue { upper, ..top.clone() };
    let sup_estimate = if sup_estimate.upper <= sup_estimate.lower { sup_estimate.promote(0.0) } else { sup_estimate.demote() };
    Ok(MBNormResult { p_seq, levels, sup_estimate, monotone, n_max })
}

/// Lower bound for `‖(T_1, ..., T_n)‖^{mb}`: the sup over tuples
/// `(x_1, ..., x_k)`, `k ≤ k_max`, of `‖(T_i x_j)_{i,j}‖_{nk} / ‖x‖_k`.
///
/// Exact with a minimum-norm target, where it equals `max ‖T_i‖`.
/// Otherwise the upper bound is `k_max Σ ‖T_i‖`.
pub fn mb_tuple_norm(
    ts: &[Matrix],
    source: &SpaceSpec,
    spec_e: &MultiNormSpec,
    target: &SpaceSpec,
    spec_f: &MultiNormSpec,
    k_max: usize,
    cfg: &OptimConfig,
) -> Result<NormValue> {
    spec_e.validate(source)?;
    spec_f.validate(target)?;
    if ts.is_empty() || k_max == 0 {
        return Err(Error::Invalid("need at least one operator and k_max ≥ 1".into()));
    }
    let norms: Vec<NormValue> = ts.iter().map(|t| operator_norm(t, source, target, cfg)).collect::<Result<_>>()?;
    let max_lower = norms.iter().map(|v| v.lower).fold(0.0, f64::max);
    let best_op = norms.iter().position(|v| v.lower == max_lower).unwrap_or(0);
    if max_lower == 0.0 && norms.iter().all(|v| v.upper == 0.0) {
        return Ok(NormValue::exact(0.0, Witness::None, "mb_tuple:zero"));
    }
    if matches!(spec_f, MultiNormSpec::Min) {
        let upper = norms.iter().map(|v| v.upper).fold(0.0, f64::max);
        let v = NormValue::bracket(max_lower, upper, norms[best_op].witness.clone(), "mb_tuple:minimum_target");
        return Ok(if upper <= max_lower { v.promote(0.0) } else { v });
    }
    let upper = k_max as f64 * norms.iter().map(|v| v.upper).sum::<f64>();
    let norming = match &norms[best_op].witness {
        Witness::Point(v) => Some(v.clone()),
        _ => None,
    };
    let numer = |x: &[Vector], c: &OptimConfig| {
        let vectors = ts
            .iter()
            .flat_map(|t| x.iter().map(move |v| Vector(crate::spaces::apply(t, &v.0))))
            .collect();
        eval_unchecked(spec_f, &Tuple { space: target.clone(), vectors }, c).map(|r| r.lower)
    };
    let mut lower = max_lower;
    let mut witness = Witness::Tuple(vec![norming.clone().unwrap_or_else(|| source.zero())]);
    for k in 1..=k_max {
        let seeds = level_seeds(source, k, norming.as_ref());
        let (value, x) = tuple_ratio(source, spec_e, k, &seeds, numer, cfg)?;
        if value > lower {
            lower = value;
            witness = Witness::Tuple(x);
        }
    }
    Ok(NormValue::bracket(lower, upper.max(lower), witness, "mb_tuple:ratio_ascent").promote(cfg.tol))
}

/// The matrix of `f ↦ f ∘ σ` on `C^m`.
pub fn permutation_operator(sigma: &[usize]) -> Matrix {
    let m = sigma.len();
    Matrix(DMatrix::from_fn(m, m, |i, j| if sigma[i] == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }))
}

/// `m_σ = max_P |{Q ∈ Π : σ(Q) ∩ P ≠ ∅}|` and the bound `m_σ^{1/p}` on the
/// multi-bounded norm of `f ↦ f ∘ σ` for the partition multi-norm of `Π`.
/// Blocks and `σ` are 0-based.
pub fn partition_permutation_bound(blocks: &[Vec<usize>], sigma: &[usize], p: Index) -> Result<(usize, f64)> {
    let m = sigma.len();
    let mut seen = vec![false; m];
    for &s in sigma {
        if s >= m || std::mem::replace(&mut seen[s], true) {
            return Err(Error::Invalid("sigma must be a permutation of 0..m".into()));
        }
    }
    let mut owner = vec![usize::MAX; m];
    for (b, block) in blocks.iter().enumerate() {
        for &k in block {
            if k >= m || owner[k] != usize::MAX {
                return Err(Error::Invalid("blocks must partition 0..m".into()));
            }
            owner[k] = b;
        }
    }
    if owner.contains(&usize::MAX) || blocks.iter().any(|b| b.is_empty()) {
        return Err(Error::Invalid("blocks must partition 0..m".into()));
    }
    let m_sigma = (0..blocks.len())
        .map(|p_idx| {
            blocks
                .iter()
                .filter(|q| q.iter().any(|&k| owner[sigma[k]] == p_idx))
                .count()
        })
        .max()
        .unwrap_or(0);
    Ok((m_sigma, (m_sigma as f64).powf(p.recip())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg() -> OptimConfig {
        OptimConfig::default().with_restarts(4)
    }

    #[test]
    fn amplify_examples() {
        let space = SpaceSpec::lp(2.0, 2);
        let t = Tuple::from_real(&space, &[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        assert_eq!(amplify(&Matrix::identity(2), &t, &space).unwrap(), t);
        let zero = amplify(&Matrix::real(&[&[0.0, 0.0], &[0.0, 0.0]]), &t, &space).unwrap();
        assert!(zero.vectors.iter().all(|v| v.is_zero()));
        let d = amplify(&Matrix::real(&[&[2.0, 0.0], &[0.0, 1.0]]), &t, &space).unwrap();
        assert_eq!(d, Tuple::from_real(&space, &[&[2.0, 0.0], &[0.0, 1.0]]).unwrap());
        assert!(amplify(&Matrix::identity(3), &t, &space).is_err());
    }

    #[test]
    fn multi_bound_examples() {
        let c = cfg();
        let d2 = Tuple::deltas(&SpaceSpec::lp(2.0, 2), 2).unwrap();
        assert_abs_diff_eq!(multi_bound(&MultiNormSpec::Min, &d2, &c).unwrap().lower, 1.0);
        let d1 = Tuple::deltas(&SpaceSpec::lp(1.0, 2), 2).unwrap();
        assert_abs_diff_eq!(multi_bound(&MultiNormSpec::Lattice, &d1, &c).unwrap().lower, 2.0);
        let x = Tuple::from_real(&SpaceSpec::lp(3.0, 2), &[&[1.0, -2.0]]).unwrap();
        assert_abs_diff_eq!(multi_bound(&MultiNormSpec::Lattice, &x, &c).unwrap().lower, 9f64.powf(1.0 / 3.0), epsilon = 1e-12);
    }

    #[test]
    fn identity_asymmetry() {
        let space = SpaceSpec::lp(1.0, 4);
        let i = Matrix::identity(4);
        let r = mb_norm(&i, &space, &MultiNormSpec::Lattice, &space, &MultiNormSpec::Min, 4, &cfg()).unwrap();
        assert!(r.levels.iter().all(|v| v.is_exact() && (v.lower - 1.0).abs() < 1e-10));
        let r = mb_norm(&i, &space, &MultiNormSpec::Min, &space, &MultiNormSpec::Lattice, 4, &cfg()).unwrap();
        for (n, v) in r.levels.iter().enumerate() {
            assert!(v.is_exact(), "{v:?}");
            assert_abs_diff_eq!(v.lower, (n + 1) as f64, epsilon = 1e-12);
        }
        assert!(r.monotone);
    }

    #[test]
    fn level_one_is_operator_norm() {
        let space = SpaceSpec::lp(2.0, 2);
        let t = Matrix::real(&[&[1.0, 2.0], &[0.0, 1.0]]);
        let r = mb_norm(&t, &space, &MultiNormSpec::Lattice, &space, &MultiNormSpec::DualLattice, 1, &cfg()).unwrap();
        assert_abs_diff_eq!(r.p_seq[0], operator_norm(&t, &space, &space, &cfg()).unwrap().lower, epsilon = 1e-12);
    }

    #[test]
    fn rank_one_is_bounded_by_its_norm() {
        let space = SpaceSpec::lp(2.0, 3);
        let (y, l) = ([1.0, -2.0, 0.5], [0.5, 1.0, 1.0]);
        let rows: Vec<Vec<f64>> = y.iter().map(|a| l.iter().map(|b| a * b).collect()).collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let t = Matrix::real(&refs);
        let r = mb_norm(&t, &space, &MultiNormSpec::Min, &space, &MultiNormSpec::Lattice, 3, &cfg()).unwrap();
        let expect = (1.0f64 + 4.0 + 0.25).sqrt() * 2.25f64.sqrt();
        assert_abs_diff_eq!(r.sup_estimate.upper, expect, epsilon = 1e-9);
        assert!(r.sup_estimate.lower >= expect - 2e-2);
    }

    #[test]
    fn tuple_norm_examples() {
        let space = SpaceSpec::lp(2.0, 2);
        let c = cfg();
        let rank_one = |y: [f64; 2]| Matrix::real(&[&[y[0] * 3.0, y[0] * 4.0], &[y[1] * 3.0, y[1] * 4.0]]);
        let ts = [rank_one([1.0, 0.0]), rank_one([0.0, 2.0])];
        let v = mb_tuple_norm(&ts, &space, &MultiNormSpec::Lattice, &space, &MultiNormSpec::Min, 2, &c).unwrap();
        assert!(v.is_exact());
        assert_abs_diff_eq!(v.lower, 10.0, epsilon = 1e-9);
        let zero = Matrix::real(&[&[0.0, 0.0], &[0.0, 0.0]]);
        let v = mb_tuple_norm(&[zero.clone(), zero], &space, &MultiNormSpec::Min, &space, &MultiNormSpec::Lattice, 2, &c);
        assert_eq!(v.unwrap().lower, 0.0);
        let t = Matrix::real(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let single = mb_tuple_norm(&[t.clone()], &space, &MultiNormSpec::Min, &space, &MultiNormSpec::Lattice, 2, &c).unwrap();
        let mb = mb_norm(&t, &space, &MultiNormSpec::Min, &space, &MultiNormSpec::Lattice, 2, &c).unwrap();
        assert_abs_diff_eq!(single.lower, mb.sup_estimate.lower, epsilon = 2e-2);
    }

    #[test]
    fn partition_permutation_examples() {
        let id = [0, 1, 2, 3];
        let blocks = vec![vec![0, 1], vec![2], vec![3]];
        assert_eq!(partition_permutation_bound(&blocks, &id, Index::ONE).unwrap(), (1, 1.0));
        assert_eq!(partition_permutation_bound(&[vec![0], vec![1]], &[1, 0], Index::ONE).unwrap(), (1, 1.0));
        let sigma = [2, 3, 0, 1];
        assert_eq!(partition_permutation_bound(&blocks, &sigma, Index::ONE).unwrap(), (2, 2.0));
        assert!(partition_permutation_bound(&blocks, &[0, 0, 1, 2], Index::ONE).is_err());

        let space = SpaceSpec::lp(1.0, 4);
        let spec = MultiNormSpec::Partition { blocks };
        let r = mb_norm(&permutation_operator(&sigma), &space, &spec, &space, &spec, 4, &cfg()).unwrap();
        assert_abs_diff_eq!(r.sup_estimate.lower, 2.0, epsilon = 2e-2);
    }
}
