//! Row- and column-special decompositions of matrices and the matrix
//! inequalities that characterize multi-norms, dual multi-norms and type-p
//! multi-norms.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multinorms::{eval_unchecked, random_tuple, Axiom, AxiomReport, MultiNormSpec, Violation, MAX_STORED, SEARCH_TOL};
use crate::optim::{op_norm_pq, set_partitions, OptimConfig};
use crate::spaces::{Index, Matrix, MatrixOp, ScalarField, SpaceSpec, Tuple, Vector, C64, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecialKind {
    RowSpecial,
    ColumnSpecial,
}

/// `a = Σ parts` with `Σ norms = ‖a‖` in the role matching `kind`
/// (`∞ → ∞` for row-special, `1 → 1` for column-special).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecialDecomposition {
    pub parts: Vec<Matrix>,
    pub norms: Vec<f64>,
    pub kind: SpecialKind,
}

impl SpecialDecomposition {
    pub fn sum(&self, rows: usize, cols: usize) -> DMatrix<C64> {
        self.parts.iter().fold(DMatrix::zeros(rows, cols), |acc, p| acc + &p.0)
    }

    pub fn total(&self) -> f64 {
        self.norms.iter().sum()
    }
}

/// At most one nonzero entry in each row.
pub fn is_row_special(a: &DMatrix<C64>) -> bool {
    a.row_iter().all(|r| r.iter().filter(|z| **z != ZERO).count() <= 1)
}

/// At most one nonzero entry in each column.
pub fn is_column_special(a: &DMatrix<C64>) -> bool {
    is_row_special(&a.transpose())
}

/// Maximum absolute row sum, `‖a : l^∞ → l^∞‖`.
pub fn max_row_sum(a: &DMatrix<C64>) -> f64 {
    a.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Greedy decomposition into row-special parts.
///
/// Each step takes, in every nonzero row, the last nonzero entry `c_i`;
/// with `i₀` the row of smallest `|c_i|` (first on ties) it removes the
/// part whose entries are `c_i/|c_i| · |c_{i₀}|`. Entries below
/// `1e-14 ‖a‖` are treated as zero, so the loop ends after at most `m·n`
/// steps.
pub fn row_special_decompose(a: &MatrixOp) -> SpecialDecomposition {
    let mut rest = a.entries.clone();
    let (m, n) = rest.shape();
    let thr = 1e-14 * max_row_sum(&rest);
    let mut parts = Vec::new();
    let mut norms = Vec::new();
    for _ in 0..m * n {
        rest.iter_mut().filter(|z| z.norm() <= thr).for_each(|z| *z = ZERO);
        let lead: Vec<Option<usize>> = (0..m).map(|i| (0..n).rev().find(|&j| rest[(i, j)] != ZERO)).collect();
        let mut i0: Option<usize> = None;
        for (i, j) in lead.iter().enumerate() {
            if let Some(j) = j {
                if i0.is_none_or(|k| rest[(i, *j)].norm() < rest[(k, lead[k].unwrap())].norm()) {
                    i0 = Some(i);
                }
            }
        }
        let Some(i0) = i0 else { break };
        let size = rest[(i0, lead[i0].unwrap())].norm();
        let mut b = DMatrix::zeros(m, n);
        for (i, j) in lead.iter().enumerate() {
            if let Some(j) = *j {
                let c = rest[(i, j)];
                // entries of the same modulus are removed exactly
                b[(i, j)] = if (c.norm() - size).abs() <= thr { c } else { c / c.norm() * size };
                rest[(i, j)] -= b[(i, j)];
            }
        }
        parts.push(Matrix(b));
        norms.push(size);
    }
    SpecialDecomposition { parts, norms, kind: SpecialKind::RowSpecial }
}

/// Column-special decomposition through the transpose; `Σ norms = ‖a‖_{1→1}`.
pub fn column_special_decompose(a: &MatrixOp) -> SpecialDecomposition {
    let d = row_special_decompose(&a.transpose());
    SpecialDecomposition {
        parts: d.parts.into_iter().map(|p| Matrix(p.0.transpose())).collect(),
        norms: d.norms,
        kind: SpecialKind::ColumnSpecial,
    }
}

/// `(a·x)_i = Σ_j a_{ij} x_j`.
pub fn matrix_action(a: &DMatrix<C64>, xs: &[Vector]) -> Result<Vec<Vector>> {
    if a.ncols() != xs.len() {
        return Err(Error::Dimension { expected: a.ncols(), found: xs.len() });
    }
    let dim = xs.first().map_or(0, |x| x.len());
    Ok((0..a.nrows())
        .map(|i| {
            Vector((0..dim).map(|k| xs.iter().enumerate().map(|(j, x)| a[(i, j)] * x.0[k]).sum()).collect())
        })
        .collect())
}

fn random_scalar(field: ScalarField, rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = if field == ScalarField::Complex && rng.random_bool(0.5) { rng.sample(StandardNormal) } else { 0.0 };
    C64::new(re, im)
}

/// A random `m × n` matrix: dense, row-special, column-special or 0/1.
fn random_matrix(m: usize, n: usize, field: ScalarField, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    match rng.random_range(0..4) {
        0 => DMatrix::from_fn(m, n, |_, _| random_scalar(field, rng)),
        1 => {
            let mut a = DMatrix::zeros(m, n);
            for i in 0..m {
                let j = rng.random_range(0..n);
                a[(i, j)] = random_scalar(field, rng);
            }
            a
        }
        2 => {
            let mut a = DMatrix::zeros(m, n);
            for j in 0..n {
                let i = rng.random_range(0..m);
                a[(i, j)] = random_scalar(field, rng);
            }
            a
        }
        _ => DMatrix::from_fn(m, n, |_, _| if rng.random_bool(0.5) { C64::new(1.0, 0.0) } else { ZERO }),
    }
}

/// One sampled inequality `‖lhs‖ ≤ factor · ‖rhs‖`.
struct Probe {
    matrix: DMatrix<C64>,
    rhs: Vec<Vector>,
    factor: f64,
}

fn audit<S>(
    spec: &MultiNormSpec,
    space: &SpaceSpec,
    axiom: Axiom,
    trials: usize,
    cfg: &OptimConfig,
    sample: S,
) -> Result<AxiomReport>
where
    S: Fn(usize, &mut ChaCha8Rng) -> Probe + Sync,
{
    spec.validate(space)?;
    let tol = cfg.tol.max(1e-8);
    let eval = |v: Vec<Vector>| eval_unchecked(spec, &Tuple { space: space.clone(), vectors: v }, cfg);
    let per_trial: Vec<Result<(Option<Violation>, bool)>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = cfg.rng(i as u64);
            let probe = sample(i, &mut rng);
            let image = matrix_action(&probe.matrix, &probe.rhs)?;
            let l = eval(image.clone())?;
            let r = eval(probe.rhs.clone())?;
            let heuristic = !(l.is_exact() && r.is_exact());
            // lower bound against upper bound: a reported violation is certified
            let (lhs, rhs) = (l.lower, probe.factor * r.upper);
            let gap = lhs - rhs;
            let violation = (gap > tol * lhs.abs().max(rhs.abs()).max(1.0)).then(|| Violation {
                axiom,
                lhs_tuple: image,
                rhs_tuple: probe.rhs,
                factor: probe.factor,
                lhs,
                rhs,
                gap,
                matrix: Some(Matrix(probe.matrix)),
            });
            Ok((violation, heuristic))
        })
        .collect();
    let mut violations = Vec::new();
    let mut count = 0;
    let mut heuristic = false;
    for r in per_trial {
        let (v, h) = r?;
        heuristic |= h;
        if let Some(v) = v {
            count += 1;
            if violations.len() < MAX_STORED {
                violations.push(v);
            }
        }
    }
    Ok(AxiomReport {
        spec: spec.name(),
        checked: vec![axiom],
        violations,
        violation_count: count,
        trials,
        tol,
        search_tol: SEARCH_TOL,
        heuristic,
    })
}

/// Tests `‖a·x‖_m ≤ ‖a : l^r_n → l^r_m‖ ‖x‖_n` on sampled matrices and
/// tuples with `m, n ≤ n_max`, where `r = p_role`.
///
/// `r = ∞` is the multi-norm law, `r = 1` the dual multi-norm law and a
/// general `r` the type-`r` law. The first trial uses `a = [[1,1],[0,0]]`
/// on a repeated pair. A violation compares a certified lower bound of the
/// left side with an upper bound of the right side, so it is never an
/// artefact of search.
pub fn check_multinorm_matrix_law(
    spec: &MultiNormSpec,
    space: &SpaceSpec,
    p_role: Index,
    n_max: usize,
    trials: usize,
    cfg: &OptimConfig,
) -> Result<AxiomReport> {
    if n_max == 0 {
        return Err(Error::Invalid("n_max must be positive".into()));
    }
    let op_norm = |a: &DMatrix<C64>| {
        op_norm_pq(&MatrixOp { entries: a.clone(), p: p_role, q: p_role, field: space.field }, &crate::multinorms::inner_cfg(cfg))
            .upper
    };
    audit(spec, space, Axiom::MatrixLaw, trials, cfg, |i, rng| {
        let (a, x) = if i == 0 && n_max >= 2 {
            let v = random_tuple(space, 1, rng).vectors.remove(0);
            let a = DMatrix::from_fn(2, 2, |r, _| if r == 0 { C64::new(1.0, 0.0) } else { ZERO });
            (a, vec![v.clone(), v])
        } else {
            let m = rng.random_range(1..=n_max);
            let n = rng.random_range(1..=n_max);
            let a = random_matrix(m, n, space.field, rng);
            (a, random_tuple(space, n, rng).vectors)
        };
        let factor = op_norm(&a);
        Probe { matrix: a, rhs: x, factor }
    })
}

/// The coagulation matrix of a set partition: row `b` sums the block `b`.
pub fn coagulation_matrix(blocks: &[Vec<usize>], n: usize) -> DMatrix<C64> {
    let mut a = DMatrix::zeros(blocks.len(), n);
    for (b, block) in blocks.iter().enumerate() {
        for &j in block {
            a[(b, j)] = C64::new(1.0, 0.0);
        }
    }
    a
}

/// Tests `‖coagulation(x)‖_m ≤ ‖x‖_n` over random tuples of length at most
/// `n_max ≤ 8` and uniformly chosen set partitions of their index sets.
/// Holds for every dual multi-norm.
pub fn check_coagulation_bound(
    spec: &MultiNormSpec,
    space: &SpaceSpec,
    n_max: usize,
    trials: usize,
    cfg: &OptimConfig,
) -> Result<AxiomReport> {
    if !(1..=8).contains(&n_max) {
        return Err(Error::Invalid("n_max must be in 1..=8".into()));
    }
    let partitions: Vec<_> = (1..=n_max).map(set_partitions).collect();
    audit(spec, space, Axiom::Coagulation, trials, cfg, |_, rng| {
        let n = rng.random_range(1..=n_max);
        let all = &partitions[n - 1];
        let blocks = &all[rng.random_range(0..all.len())];
        Probe { matrix: coagulation_matrix(blocks, n), rhs: random_tuple(space, n, rng).vectors, factor: 1.0 }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn op(rows: &[&[f64]]) -> MatrixOp {
        MatrixOp::real(rows, f64::INFINITY, f64::INFINITY).unwrap()
    }

    fn cfg() -> OptimConfig {
        OptimConfig::default().with_restarts(4)
    }

    #[test]
    fn row_special_examples() {
        let d = row_special_decompose(&op(&[&[2.0, 1.0], &[0.0, 3.0]]));
        assert_eq!(d.parts, vec![Matrix::real(&[&[0.0, 1.0], &[0.0, 1.0]]), Matrix::real(&[&[2.0, 0.0], &[0.0, 2.0]])]);
        assert_eq!(d.norms, vec![1.0, 2.0]);

        let d = row_special_decompose(&op(&[&[0.0, 0.0], &[0.0, 0.0]]));
        assert!(d.parts.is_empty());
        assert_eq!(d.total(), 0.0);

        let d = row_special_decompose(&op(&[&[5.0, 0.0], &[0.0, 0.0]]));
        assert_eq!(d.parts, vec![Matrix::real(&[&[5.0, 0.0], &[0.0, 0.0]])]);
        assert_eq!(d.norms, vec![5.0]);
    }

    #[test]
    fn column_special_examples() {
        let d = column_special_decompose(&op(&[&[2.0, 0.0], &[1.0, 3.0]]));
        assert_eq!(d.parts, vec![Matrix::real(&[&[0.0, 0.0], &[1.0, 1.0]]), Matrix::real(&[&[2.0, 0.0], &[0.0, 2.0]])]);
        assert_eq!(d.total(), 3.0);
        assert!(d.parts.iter().all(|p| is_column_special(p)));

        let d = column_special_decompose(&op(&[&[1.0, 0.0], &[0.0, 1.0]]));
        assert_eq!(d.parts.len(), 1);
        assert_eq!(d.total(), 1.0);
        assert!(column_special_decompose(&op(&[&[0.0]])).parts.is_empty());
    }

    #[test]
    fn complex_phases_are_kept() {
        let a = DMatrix::from_row_slice(1, 2, &[C64::new(0.0, 2.0), C64::new(3.0, 4.0)]);
        let d = row_special_decompose(&MatrixOp::new(a.clone(), Index::INF, Index::INF).unwrap());
        assert!((d.sum(1, 2) - a).iter().all(|z| z.norm() < 1e-12));
        assert_abs_diff_eq!(d.total(), 7.0, epsilon = 1e-12);
    }

    #[test]
    fn min_matrix_laws() {
        let space = SpaceSpec::lp(2.0, 3);
        let r = check_multinorm_matrix_law(&MultiNormSpec::Min, &space, Index::INF, 4, 200, &cfg()).unwrap();
        assert_eq!(r.violation_count, 0);
        let r = check_multinorm_matrix_law(&MultiNormSpec::Min, &space, Index::TWO, 4, 50, &cfg()).unwrap();
        let v = r.violations.iter().find(|v| v.matrix.as_ref().is_some_and(|m| m.shape() == (2, 2) && m[(0, 1)] == C64::new(1.0, 0.0) && m[(1, 0)] == ZERO));
        let v = v.expect("fixture matrix violates the l^2 law");
        assert_abs_diff_eq!(v.lhs / v.rhs, 2f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn dual_and_weak_summing_laws() {
        let space = SpaceSpec::lp(1.5, 3);
        let r = check_multinorm_matrix_law(&MultiNormSpec::DualLattice, &space, Index::ONE, 4, 200, &cfg()).unwrap();
        assert_eq!(r.violation_count, 0);
        let r = check_coagulation_bound(&MultiNormSpec::DualLattice, &space, 5, 200, &cfg()).unwrap();
        assert_eq!(r.violation_count, 0);
        let space = SpaceSpec::lp(2.0, 3);
        let r = check_multinorm_matrix_law(&MultiNormSpec::WeakSumming { p: Index::TWO }, &space, Index::TWO, 3, 100, &cfg())
            .unwrap();
        assert_eq!(r.violation_count, 0);
    }
}
