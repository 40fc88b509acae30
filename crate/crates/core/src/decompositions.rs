//! Direct-sum decompositions given by projection families: hermitian, small
//! and orthogonal detectors, closed families, generated multi-norms and
//! multi-duals.
//!
//! A `false` verdict always carries a counterexample. A `true` verdict only
//! means that no counterexample was found within the sampling budget.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multinorms::{evaluate, random_tuple, random_vector, MultiNormSpec};
use crate::optim::{set_partitions, torus_supremum, OptimConfig};
use crate::spaces::{dual_space, Matrix, ScalarField, SpaceSpec, Tuple, Vector, C64};

/// Tolerance for the projection identities.
pub const PROJECTION_TOL: f64 = 1e-10;
/// Substream tag for sampled probes.
const PROBE_STREAM: u64 = 0x4e21;
/// Largest decomposition length for coagulation enumeration.
pub const MAX_ORTHOGONAL_LEN: usize = 8;

/// Idempotent, mutually annihilating projections summing to the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDecomposition")]
pub struct Decomposition {
    pub projections: Vec<Matrix>,
}

#[derive(Deserialize)]
struct RawDecomposition {
    projections: Vec<Matrix>,
}

impl TryFrom<RawDecomposition> for Decomposition {
    type Error = Error;
    fn try_from(r: RawDecomposition) -> Result<Self> {
        Decomposition::new(r.projections)
    }
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

impl Decomposition {
    pub fn new(projections: Vec<Matrix>) -> Result<Self> {
        let Some(first) = projections.first() else {
            return Err(Error::Invalid("a decomposition needs at least one projection".into()));
        };
        let dim = first.nrows();
        if dim == 0 || projections.iter().any(|p| p.nrows() != dim || p.ncols() != dim) {
            return Err(Error::Invalid("projections must be square of a common size".into()));
        }
        let mut sum = DMatrix::<C64>::zeros(dim, dim);
        for (i, p) in projections.iter().enumerate() {
            sum += &p.0;
            if max_abs(&(&p.0 * &p.0 - &p.0)) > PROJECTION_TOL {
                return Err(Error::Invalid(format!("projection {i} is not idempotent")));
            }
            for (j, q) in projections.iter().enumerate() {
                if i != j && max_abs(&(&p.0 * &q.0)) > PROJECTION_TOL {
                    return Err(Error::Invalid(format!("projections {i} and {j} do not annihilate")));
                }
            }
        }
        if max_abs(&(sum - DMatrix::identity(dim, dim))) > PROJECTION_TOL {
            return Err(Error::Invalid("projections do not sum to the identity".into()));
        }
        Ok(Decomposition { projections })
    }

    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projections[0].nrows()
    }

    /// The band decomposition of a coordinate space along `blocks` (0-based).
    pub fn coordinate(dim: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let projections = blocks
            .iter()
            .map(|b| {
                let mut m = DMatrix::<C64>::zeros(dim, dim);
                for &k in b {
                    if k >= dim {
                        return Err(Error::Dimension { expected: dim, found: k + 1 });
                    }
                    m[(k, k)] = C64::new(1.0, 0.0);
                }
                Ok(Matrix(m))
            })
            .collect::<Result<Vec<_>>>()?;
        Decomposition::new(projections)
    }

    /// `E = E ⊕ 0 ⊕ ... ⊕ 0` of length `len`, with the identity at `pos`.
    pub fn trivial(dim: usize, len: usize, pos: usize) -> Self {
        let projections = (0..len)
            .map(|i| if i == pos { Matrix::identity(dim) } else { Matrix(DMatrix::zeros(dim, dim)) })
            .collect();
        Decomposition { projections }
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Decomposition { projections: perm.iter().map(|&i| self.projections[i].clone()).collect() }
    }

    /// Replaces `P_i, P_j` (`i < j`) by `P_i + P_j` at position `i`.
    pub fn merged(&self, i: usize, j: usize) -> Self {
        let mut projections = self.projections.clone();
        let pj = projections.remove(j);
        projections[i] = Matrix(&projections[i].0 + &pj.0);
        Decomposition { projections }
    }

    /// `Σ ζ_i P_i x`.
    pub fn combine(&self, zeta: &[C64], x: &[C64]) -> Vec<C64> {
        let dim = self.dim();
        (0..dim)
            .map(|r| {
                self.projections
                    .iter()
                    .zip(zeta)
                    .map(|(p, z)| z * (0..dim).map(|c| p[(r, c)] * x[c]).sum::<C64>())
                    .sum()
            })
            .collect()
    }

    /// `Σ P_i x_i`.
    pub fn synthesize(&self, xs: &[Vector]) -> Vector {
        let dim = self.dim();
        Vector(
            (0..dim)
                .map(|r| {
                    self.projections
                        .iter()
                        .zip(xs)
                        .map(|(p, x)| (0..dim).map(|c| p[(r, c)] * x.0[c]).sum::<C64>())
                        .sum()
                })
                .collect(),
        )
    }

    pub fn project(&self, i: usize, x: &Vector) -> Vector {
        Vector(crate::spaces::apply(&self.projections[i], &x.0))
    }

    fn key(&self) -> Vec<i64> {
        self.projections
            .iter()
            .flat_map(|p| p.iter().flat_map(|z| [(z.re * 1e9).round() as i64, (z.im * 1e9).round() as i64]))
            .collect()
    }

    fn check_space(&self, space: &SpaceSpec) -> Result<()> {
        if self.dim() != space.dim {
            return Err(Error::Dimension { expected: space.dim, found: self.dim() });
        }
        if space.field == ScalarField::Real && self.projections.iter().any(|p| p.iter().any(|z| z.im != 0.0)) {
            return Err(Error::Field("complex projections on a real space".into()));
        }
        Ok(())
    }
}

/// A finite family of decompositions of one space.
///
/// JSON: `{"members": [...], "close": bool}`; with `close` the family is
/// closed on load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFamily")]
pub struct FamilyOfDecompositions {
    pub members: Vec<Decomposition>,
    #[serde(rename = "close")]
    pub closed: bool,
}

#[derive(Deserialize)]
struct RawFamily {
    members: Vec<Decomposition>,
    #[serde(default)]
    close: bool,
}

impl TryFrom<RawFamily> for FamilyOfDecompositions {
    type Error = Error;
    fn try_from(r: RawFamily) -> Result<Self> {
        if let Some(d) = r.members.first() {
            if r.members.iter().any(|m| m.dim() != d.dim()) {
                return Err(Error::Invalid("family members act on different dimensions".into()));
            }
        }
        let f = FamilyOfDecompositions { members: r.members, closed: false };
        Ok(if r.close { close_family(&f, None) } else { f })
    }
}

impl FamilyOfDecompositions {
    pub fn new(members: Vec<Decomposition>) -> Self {
        FamilyOfDecompositions { members, closed: false }
    }

    /// The closed family of trivial decompositions of length at most `max_len`.
    pub fn trivial(dim: usize, max_len: usize) -> Self {
        close_family(&FamilyOfDecompositions::new(vec![Decomposition::trivial(dim, 1, 0)]), Some(max_len))
    }

    /// Coordinate-partition decompositions for every ordered set partition of
    /// `0..dim` into at most `max_len` blocks.
    pub fn bands(dim: usize, max_len: usize) -> Self {
        let members = set_partitions(dim)
            .into_iter()
            .filter(|p| p.len() <= max_len)
            .map(|p| Decomposition::coordinate(dim, &p).expect("set partition"))
            .collect();
        close_family(&FamilyOfDecompositions::new(members), Some(max_len))
    }
}

fn all_permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for i in 0..k {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..=i).map(move |pos| {
                    let mut q = p.clone();
                    q.insert(pos, i);
                    q
                })
            })
            .collect();
    }
    out
}

/// Closes a family under permutations (C1), pairwise merges (C2) and adds the
/// trivial decompositions (C3) of every length up to the longest member
/// (or `max_len` when given, default 1 for an empty family).
pub fn close_family(f: &FamilyOfDecompositions, max_len: Option<usize>) -> FamilyOfDecompositions {
    let Some(dim) = f.members.first().map(|d| d.dim()) else {
        return FamilyOfDecompositions { members: vec![], closed: true };
    };
    let longest = max_len.unwrap_or_else(|| f.members.iter().map(|d| d.len()).max().unwrap_or(1));
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut members = Vec::new();
    let mut queue: Vec<Decomposition> = f.members.clone();
    for len in 1..=longest {
        queue.push(Decomposition::trivial(dim, len, 0));
    }
    while let Some(d) = queue.pop() {
        if !seen.insert(d.key()) {
            continue;
        }
        for perm in all_permutations(d.len()) {
            let e = d.permuted(&perm);
            if !seen.contains(&e.key()) {
                queue.push(e);
            }
        }
        for i in 0..d.len() {
            for j in i + 1..d.len() {
                let e = d.merged(i, j);
                if !seen.contains(&e.key()) {
                    queue.push(e);
                }
            }
        }
        members.push(d);
    }
    members.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.key().cmp(&b.key())));
    FamilyOfDecompositions { members, closed: true }
}

/// A counterexample to one of the decomposition properties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub tuple: Vec<Vector>,
    /// Scalars `ζ_i` (hermitian test).
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub scalars: Vec<C64>,
    /// Blocks of the failing coagulation (orthogonality tests).
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub partition: Vec<Vec<usize>>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<Counterexample>,
    /// Largest observed `lhs − rhs`.
    pub max_gap: f64,
    pub trials: usize,
}

/// One probe: observed gap, allowed gap, and the evidence.
type Probe = (f64, f64, Counterexample);

impl Verdict {
    fn from_probes(found: Vec<Probe>) -> Verdict {
        let trials = found.len();
        let mut max_gap = 0.0f64;
        let mut witness: Option<(f64, Counterexample)> = None;
        for (gap, allowed, c) in found {
            max_gap = max_gap.max(gap);
            if gap > allowed && witness.as_ref().is_none_or(|(g, _)| gap > *g) {
                witness = Some((gap, c));
            }
        }
        Verdict { holds: witness.is_none(), witness: witness.map(|w| w.1), max_gap, trials }
    }
}

fn rel_tol(tol: f64, scale: f64) -> f64 {
    tol * scale.max(1.0)
}

/// Test vectors: basis vectors, the all-ones vector, then random samples.
fn probe_vectors(space: &SpaceSpec, trials: usize, cfg: &OptimConfig) -> Vec<Vector> {
    let mut out: Vec<Vector> = (0..space.dim).map(|k| space.basis(k)).collect();
    out.push(Vector(vec![C64::new(1.0, 0.0); space.dim]));
    let mut rng = cfg.rng(PROBE_STREAM);
    for _ in 0..trials {
        out.push(random_vector(space, &mut rng));
    }
    out
}

/// Hermitian test: `‖Σ ζ_i P_i x‖ ≤ ‖x‖` for all `|ζ_i| ≤ 1`.
///
/// Real field: every sign vector, then sampled `ζ ∈ [−1, 1]^k`. Complex
/// field: a torus search per probe vector.
pub fn is_hermitian(d: &Decomposition, space: &SpaceSpec, trials: usize, cfg: &OptimConfig) -> Result<Verdict> {
    d.check_space(space)?;
    let k = d.len();
    let tol = cfg.tol.max(1e-9);
    let probes = probe_vectors(space, trials, cfg);
    let found: Vec<Probe> = probes
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let nx = space.norm_of(&x.0);
            let mut best = (f64::NEG_INFINITY, Vec::new(), 0.0);
            let mut consider = |zeta: Vec<C64>| {
                let v = space.norm_of(&d.combine(&zeta, &x.0));
                if v - nx > best.0 {
                    best = (v - nx, zeta, v);
                }
            };
            match space.field {
                ScalarField::Real => {
                    if k < 24 {
                        for idx in 0..(1u64 << k) {
                            consider((0..k).map(|j| C64::new(if (idx >> j) & 1 == 1 { -1.0 } else { 1.0 }, 0.0)).collect());
                        }
                    }
                    let mut rng = cfg.rng(i as u64);
                    for _ in 0..16 {
                        consider((0..k).map(|_| C64::new(rng.random_range(-1.0..=1.0), 0.0)).collect());
                    }
                }
                ScalarField::Complex => {
                    let grid = OptimConfig { grid_points: if k <= 2 { cfg.grid_points } else { 16 }, ..cfg.clone() };
                    let t = torus_supremum(|z| space.norm_of(&d.combine(z, &x.0)), k, &grid);
                    if let crate::optim::Witness::Phases(th) = &t.witness {
                        consider(th.iter().map(|a| C64::from_polar(1.0, *a)).collect());
                    }
                }
            }
            let (gap, zeta, lhs) = best;
            (gap, rel_tol(tol, nx), Counterexample { tuple: vec![x.clone()], scalars: zeta, partition: vec![], lhs, rhs: nx })
        })
        .collect();
    Ok(Verdict::from_probes(found))
}

/// Random tuples of length `k` together with structured ones built from basis
/// vectors.
fn probe_tuples(space: &SpaceSpec, k: usize, trials: usize, cfg: &OptimConfig) -> Vec<Vec<Vector>> {
    let mut out = vec![(0..k).map(|i| space.basis(i % space.dim)).collect::<Vec<_>>()];
    out.push(vec![Vector(vec![C64::new(1.0, 0.0); space.dim]); k]);
    let mut rng = cfg.rng(PROBE_STREAM + 1);
    for _ in 0..trials {
        out.push(random_tuple(space, k, &mut rng).vectors);
    }
    out
}

/// Small test: `‖Σ P_i x_i‖ ≤ ‖(x_1, ..., x_k)‖_k` for sampled tuples.
pub fn is_small(
    d: &Decomposition,
    spec: &MultiNormSpec,
    space: &SpaceSpec,
    trials: usize,
    cfg: &OptimConfig,
) -> Result<Verdict> {
    d.check_space(space)?;
    spec.validate(space)?;
    let tol = cfg.tol.max(1e-8);
    let probes = probe_tuples(space, d.len(), trials, cfg);
    let found = probes
        .par_iter()
        .map(|xs| {
            let lhs = space.norm_of(&d.synthesize(xs).0);
            let rhs = evaluate(spec, &Tuple { space: space.clone(), vectors: xs.clone() }, cfg)?.upper;
            Ok((lhs - rhs, rel_tol(tol, rhs), Counterexample { tuple: xs.clone(), scalars: vec![], partition: vec![], lhs, rhs }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Verdict::from_probes(found))
}

/// Largest coagulation discrepancy of a fixed tuple: for every set partition
/// of the entries, compares the norm of the block sums with the norm of the
/// tuple. Returns `(gap, counterexample)` for the worst partition.
fn coagulation_gap(
    spec: &MultiNormSpec,
    space: &SpaceSpec,
    xs: &[Vector],
    cfg: &OptimConfig,
) -> Result<(f64, Counterexample)> {
    let whole = evaluate(spec, &Tuple { space: space.clone(), vectors: xs.to_vec() }, cfg)?.lower;
    let mut worst = (f64::NEG_INFINITY, Counterexample { tuple: xs.to_vec(), scalars: vec![], partition: vec![], lhs: 0.0, rhs: whole });
    for part in set_partitions(xs.len()) {
        let ys: Vec<Vector> = part
            .iter()
            .map(|b| b.iter().fold(space.zero(), |acc, &i| acc.add(&xs[i])))
            .collect();
        let v = evaluate(spec, &Tuple { space: space.clone(), vectors: ys }, cfg)?.lower;
        let gap = (v - whole).abs();
        if gap > worst.0 {
            worst = (gap, Counterexample { tuple: xs.to_vec(), scalars: vec![], partition: part, lhs: v, rhs: whole });
        }
    }
    Ok(worst)
}

/// Orthogonality of a fixed tuple: every coagulation has the same multi-norm.
pub fn is_orthogonal_set(spec: &MultiNormSpec, space: &SpaceSpec, xs: &[Vector], cfg: &OptimConfig) -> Result<Verdict> {
    if xs.len() > MAX_ORTHOGONAL_LEN {
        return Err(Error::Budget { needed: xs.len() as u128, budget: MAX_ORTHOGONAL_LEN as u64 });
    }
    spec.validate(space)?;
    let tol = cfg.tol.max(1e-8);
    let (gap, c) = coagulation_gap(spec, space, xs, cfg)?;
    let allowed = rel_tol(tol, c.rhs.max(c.lhs));
    Ok(Verdict::from_probes(vec![(gap, allowed, c)]))
}

/// Orthogonal test: for sampled `x_i ∈ range(P_i)`, every coagulation keeps
/// the multi-norm value. Needs `k ≤ 8`.
pub fn is_orthogonal(
    d: &Decomposition,
    spec: &MultiNormSpec,
    space: &SpaceSpec,
    trials: usize,
    cfg: &OptimConfig,
) -> Result<Verdict> {
    d.check_space(space)?;
    spec.validate(space)?;
    if d.len() > MAX_ORTHOGONAL_LEN {
        return Err(Error::Budget { needed: d.len() as u128, budget: MAX_ORTHOGONAL_LEN as u64 });
    }
    let tol = cfg.tol.max(1e-8);
    let probes: Vec<Vec<Vector>> = probe_tuples(space, d.len(), trials, cfg)
        .into_iter()
        .map(|ys| ys.iter().enumerate().map(|(i, y)| d.project(i, y)).collect())
        .collect();
    let found = probes
        .par_iter()
        .map(|xs| {
            let (gap, c) = coagulation_gap(spec, space, xs, cfg)?;
            let allowed = rel_tol(tol, c.rhs.max(c.lhs));
            Ok((gap, allowed, c))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Verdict::from_probes(found))
}

/// The multi-norm generated by a family; every member must pass the
/// hermitian test on `space`.
pub fn generated_multinorm(
    f: &FamilyOfDecompositions,
    space: &SpaceSpec,
    trials: usize,
    cfg: &OptimConfig,
) -> Result<MultiNormSpec> {
    for (i, d) in f.members.iter().enumerate() {
        let v = is_hermitian(d, space, trials, cfg)?;
        if !v.holds {
            return Err(Error::Hermitian(format!("member {i} is not hermitian (gap {:.3e})", v.max_gap)));
        }
    }
    Ok(MultiNormSpec::Generated { family: f.clone() })
}

/// Dual projections `P' = W^{-1} Pᵀ W` with respect to the weighted bilinear pairing.
pub fn dual_family(f: &FamilyOfDecompositions, space: &SpaceSpec) -> Result<FamilyOfDecompositions> {
    let w = &space.weights;
    let members = f
        .members
        .iter()
        .map(|d| {
            d.check_space(space)?;
            Decomposition::new(
                d.projections
                    .iter()
                    .map(|p| Matrix(DMatrix::from_fn(space.dim, space.dim, |i, j| p[(j, i)] * (w[j] / w[i]))))
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FamilyOfDecompositions { members, closed: f.closed })
}

/// The multi-norm on `E'` generated by the dual family.
pub fn multi_dual(
    f: &FamilyOfDecompositions,
    space: &SpaceSpec,
    trials: usize,
    cfg: &OptimConfig,
) -> Result<MultiNormSpec> {
    generated_multinorm(&dual_family(f, space)?, &dual_space(space), trials, cfg)
}

/// Largest sampled gap `‖t‖_spec − ‖t‖_generated` over tuples of length at most `n_max`.
pub fn is_orthogonal_multinorm(
    spec: &MultiNormSpec,
    f: &FamilyOfDecompositions,
    space: &SpaceSpec,
    n_max: usize,
    trials: usize,
    cfg: &OptimConfig,
) -> Result<Verdict> {
    spec.validate(space)?;
    let generated = MultiNormSpec::Generated { family: f.clone() };
    generated.validate(space)?;
    let tol = cfg.tol.max(1e-8);
    let mut probes: Vec<Vec<Vector>> = (1..=n_max.min(space.dim)).map(|n| (0..n).map(|k| space.basis(k)).collect()).collect();
    for i in 0..trials {
        let mut rng = cfg.rng(i as u64);
        let n = rng.random_range(1..=n_max.max(1));
        probes.push(random_tuple(space, n, &mut rng).vectors);
    }
    let found = probes
        .par_iter()
        .map(|xs| {
            let t = Tuple { space: space.clone(), vectors: xs.clone() };
            let a = evaluate(spec, &t, cfg)?.lower;
            let b = evaluate(&generated, &t, cfg)?.lower;
            let c = Counterexample { tuple: xs.clone(), scalars: vec![], partition: vec![], lhs: a, rhs: b };
            Ok(((a - b).abs(), rel_tol(tol, a.max(b)), c))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Verdict::from_probes(found))
}
