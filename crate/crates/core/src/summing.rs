//! Weak `p`-summing norms `μ_{p,n}`, the summing constants
//! `π_{q,p}^{(n)}`, and the constants `c_n(E)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multinorms::inner_cfg;
use crate::optim::{
    local_search, op_norm_pq, op_norm_quick, ratio_ascent, sign_supremum, Direction, NormValue, OptimConfig,
    Witness,
};
use crate::spaces::{dual_space, lp_combine, Index, MatrixOp, ScalarField, SpaceSpec, Tuple, Vector, C64, ZERO};

/// A summing quantity together with the indices it was computed for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummingResult {
    pub value: NormValue,
    pub p: Index,
    pub q: Option<Index>,
    pub n: usize,
}

/// Matrix of `T_x : a ↦ Σ a_j x_j` in the unweighted coordinates of the space.
fn synthesis_matrix(t: &Tuple) -> DMatrix<C64> {
    let s = t.space.isometry_scale();
    DMatrix::from_fn(t.space.dim, t.n(), |k, j| t.vectors[j].0[k] * s[k])
}

/// `μ_{p,n}(x_1, ..., x_n) = ‖T_x : l^{p'}_n → E‖`.
///
/// Over the real field with `p = 1` the value is the exact maximum of
/// `‖Σ ε_j x_j‖` over sign vectors.
pub fn mu_weak(p: Index, t: &Tuple, cfg: &OptimConfig) -> NormValue {
    if p.is_one() && t.space.field == ScalarField::Real {
        let f = |e: &[f64]| {
            let v: Vec<C64> = (0..t.space.dim)
                .map(|k| t.vectors.iter().zip(e).map(|(x, s)| x.0[k] * *s).sum())
                .collect();
            t.space.norm_of(&v)
        };
        if let Ok(v) = sign_supremum(f, t.n(), true, cfg) {
            return v.with_method("mu_weak:signs");
        }
    }
    let a = MatrixOp { entries: synthesis_matrix(t), p: p.conjugate(), q: t.space.p, field: t.space.field };
    let v = op_norm_pq(&a, cfg);
    let method = format!("mu_weak:{}", v.method);
    v.with_method(method)
}

/// Fast estimate of `μ_{p,n}` for use inside other searches; exact on the
/// closed-form and sign-enumeration paths, a lower estimate otherwise.
pub fn mu_weak_quick(p: Index, t: &Tuple, cfg: &OptimConfig) -> f64 {
    let a = MatrixOp { entries: synthesis_matrix(t), p: p.conjugate(), q: t.space.p, field: t.space.field };
    op_norm_quick(&a, cfg)
}

/// `μ_{p,n}(λ_1, ..., λ_n) = sup{(Σ_j |⟨x, λ_j⟩|^p)^{1/p} : x ∈ E_{[1]}}` for a
/// tuple living in the dual `E'`; the primal space is `dual_space(t.space)`.
pub fn mu_weak_dual(p: Index, t: &Tuple, cfg: &OptimConfig) -> NormValue {
    let primal = dual_space(&t.space);
    let s = primal.isometry_scale();
    // x = D^{-1} x̃ with D = diag(s); ⟨x, λ_j⟩ = Σ_k x̃_k (w_k / s_k) λ_j(k)
    let b = DMatrix::from_fn(t.n(), primal.dim, |j, k| t.vectors[j].0[k] * (primal.weights[k] / s[k]));
    let a = MatrixOp { entries: b, p: primal.p, q: p, field: primal.field };
    let v = op_norm_pq(&a, cfg);
    let witness = match &v.witness {
        Witness::Point(x) => Witness::Point(Vector(x.0.iter().zip(&s).map(|(z, sk)| z / *sk).collect())),
        w => w.clone(),
    };
    let method = format!("mu_weak_dual:{}", v.method);
    NormValue { witness, ..v }.with_method(method)
}


fn check_op(source: &SpaceSpec, target: &SpaceSpec, t: &DMatrix<C64>) -> Result<()> {
    if t.ncols() != source.dim || t.nrows() != target.dim {
        return Err(Error::Dimension { expected: source.dim, found: t.ncols() });
    }
    if source.field != target.field {
        return Err(Error::Field("source and target fields differ".into()));
    }
    Ok(())
}

fn apply_space(t: &DMatrix<C64>, x: &Vector) -> Vector {
    Vector(crate::spaces::apply(t, &x.0))
}

/// Canonical starting tuples: `δ`-tuples, repeated `δ_1`, and the
/// roots-of-unity (complex) or Walsh (real) tuples.
fn canonical_tuples(space: &SpaceSpec, n: usize) -> Vec<Vec<Vector>> {
    let mut out = Vec::new();
    if n <= space.dim {
        out.push((0..n).map(|k| space.unit_basis(k)).collect());
    }
    out.push(vec![space.unit_basis(0); n]);
    if n <= space.dim {
        let u = match space.field {
            ScalarField::Complex => roots_of_unity_tuple(space, n),
            ScalarField::Real => walsh_tuple(space, n),
        };
        if let Some(u) = u {
            out.push(u);
        }
    }
    out
}

/// Rows `(ζ^j, ζ^{2j}, ..., ζ^{nj})` with `ζ = exp(2πi/n)`, normalised and
/// placed on the first `n` coordinates.
pub fn roots_of_unity_tuple(space: &SpaceSpec, n: usize) -> Option<Vec<Vector>> {
    if n > space.dim || space.field != ScalarField::Complex {
        return None;
    }
    Some(
        (1..=n)
            .map(|j| {
                let mut v = vec![ZERO; space.dim];
                for k in 1..=n {
                    v[k - 1] = C64::from_polar(1.0, 2.0 * PI * ((j * k) % n) as f64 / n as f64);
                }
                let nv = space.norm_of(&v);
                Vector(v).scale(1.0 / nv)
            })
            .collect(),
    )
}

/// First `n` rows of a Sylvester–Hadamard matrix, normalised.
fn walsh_tuple(space: &SpaceSpec, n: usize) -> Option<Vec<Vector>> {
    let size = n.next_power_of_two();
    if size > space.dim {
        return None;
    }
    Some(
        (0..n)
            .map(|j| {
                let mut v = vec![ZERO; space.dim];
                for (k, c) in v.iter_mut().enumerate().take(size) {
                    let sign = if (j & k).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    *c = C64::new(sign, 0.0);
                }
                let nv = space.norm_of(&v);
                Vector(v).scale(1.0 / nv)
            })
            .collect(),
    )
}

/// `z_i = Σ_j ζ_j ω^{ij}` for `i = 1..k`, with `ω = exp(2πi/k)`.
pub fn roots_of_unity_mix(zetas: &[C64]) -> Vec<C64> {
    let k = zetas.len();
    (1..=k)
        .map(|i| {
            zetas
                .iter()
                .enumerate()
                .map(|(j, z)| z * C64::from_polar(1.0, 2.0 * PI * ((i * (j + 1)) % k) as f64 / k as f64))
                .sum()
        })
        .collect()
}

/// Lower bound for `π_{q,p}^{(n)}(T) = sup{(Σ‖T x_j‖^q)^{1/q} : μ_{p,n}(x) ≤ 1}`.
///
/// The reported lower bound divides by the certified upper bound of `μ` at
/// the witness, so it holds even when `μ` itself is only bracketed. The
/// upper bound is the definitional `n^{1/q} ‖T‖`.
#[allow(clippy::too_many_arguments)]
pub fn pi_summing(
    q: Index,
    p: Index,
    source: &SpaceSpec,
    target: &SpaceSpec,
    t: &DMatrix<C64>,
    n: usize,
    cfg: &OptimConfig,
) -> Result<NormValue> {
    if q.value() < p.value() {
        return Err(Error::Spec(format!("summing constants need q ≥ p, got q={q}, p={p}")));
    }
    if n == 0 {
        return Err(Error::Invalid("n must be positive".into()));
    }
    check_op(source, target, t)?;
    let inner = inner_cfg(cfg);
    let numer = |x: &[Vector]| lp_combine(x.iter().map(|v| target.norm_of(&apply_space(t, v).0)), q);
    let seeds: Vec<Vec<f64>> = canonical_tuples(source, n)
        .into_iter()
        .map(|v| crate::spaces::flatten(&v, source.field))
        .collect();
    let unflat = |x: &[f64]| crate::spaces::unflatten(x, n, source.dim, source.field);
    let best = ratio_ascent(
        |x| numer(&unflat(x)),
        |x| mu_weak_quick(p, &Tuple { space: source.clone(), vectors: unflat(x) }, &inner),
        seeds.first().map_or(0, |s| s.len()),
        &seeds,
        cfg,
    );
    let op = MatrixOp { entries: source_to_target(source, target, t), p: source.p, q: target.p, field: source.field };
    let upper = (n as f64).powf(q.recip()) * op_norm_pq(&op, cfg).upper;
    let Some(best) = best else {
        return Ok(NormValue::bracket(0.0, upper, Witness::None, "pi_summing"));
    };
    let x = unflat(&best.point);
    let mu = mu_weak(p, &Tuple { space: source.clone(), vectors: x.clone() }, cfg);
    let lower = numer(&x) / mu.upper;
    Ok(NormValue::bracket(lower, upper.max(lower), Witness::Tuple(x), "pi_summing:ratio_ascent").promote(cfg.tol))
}

/// `π_{q,p}^{(n)}(E)`: the summing constant of the identity on `E`.
pub fn pi_summing_space(q: Index, p: Index, space: &SpaceSpec, n: usize, cfg: &OptimConfig) -> Result<NormValue> {
    let id = DMatrix::<C64>::identity(space.dim, space.dim);
    pi_summing(q, p, space, space, &id, n, cfg)
}

/// Matrix of `T` between the unweighted copies of source and target.
fn source_to_target(source: &SpaceSpec, target: &SpaceSpec, t: &DMatrix<C64>) -> DMatrix<C64> {
    let (s, u) = (source.isometry_scale(), target.isometry_scale());
    DMatrix::from_fn(t.nrows(), t.ncols(), |i, j| t[(i, j)] * (u[i] / s[j]))
}

/// `c_n(E) = inf{μ_{1,n}(x) : x_j ∈ S_E}`.
///
/// This is a minimum, so the roles of the ends are swapped relative to a
/// supremum: `upper` is attained by the witness tuple, `lower` is an
/// analytic bound (`1` in general, `√n` on `l²`). Uses `2 · cfg.restarts`
/// random starts.
pub fn c_n(space: &SpaceSpec, n: usize, cfg: &OptimConfig) -> Result<NormValue> {
    if n == 0 {
        return Err(Error::Invalid("n must be positive".into()));
    }
    let lower = if space.p == Index::TWO { (n as f64).sqrt() } else { 1.0 };
    if n == 1 {
        return Ok(NormValue::exact(1.0, Witness::Tuple(vec![space.unit_basis(0)]), "c_n:trivial"));
    }
    let unflat = |x: &[f64]| crate::spaces::unflatten(x, n, space.dim, space.field);
    let normalise = |x: &mut Vec<f64>| {
        let mut v = unflat(x);
        for u in v.iter_mut() {
            let nu = space.norm_of(&u.0);
            if !(nu.is_finite() && nu > 0.0) {
                return false;
            }
            *u = u.scale(1.0 / nu);
        }
        *x = crate::spaces::flatten(&v, space.field);
        true
    };
    let seeds: Vec<Vec<f64>> = canonical_tuples(space, n)
        .into_iter()
        .map(|v| crate::spaces::flatten(&v, space.field))
        .collect();
    let search_cfg = OptimConfig { restarts: 2 * cfg.restarts, ..cfg.clone() };
    let inner = inner_cfg(cfg);
    let best = local_search(
        |x| mu_weak_quick(Index::ONE, &Tuple { space: space.clone(), vectors: unflat(x) }, &inner),
        normalise,
        seeds[0].len(),
        &seeds,
        Direction::Minimize,
        &search_cfg,
    )
    .expect("canonical seeds are feasible");
    let x = unflat(&best.point);
    let upper = mu_weak(Index::ONE, &Tuple { space: space.clone(), vectors: x.clone() }, cfg).upper;
    Ok(NormValue::bracket(lower.min(upper), upper, Witness::Tuple(x), "c_n:descent").promote(cfg.tol))
}

/// Lower bound `n / μ_{1,n}(x)` for `π̄_1^{(n)}(E)` from a tuple of unit vectors,
/// typically the witness of [`c_n`].
pub fn pi_bar_from_unit_tuple(space: &SpaceSpec, unit: &[Vector], cfg: &OptimConfig) -> NormValue {
    let t = Tuple { space: space.clone(), vectors: unit.to_vec() };
    let mu = mu_weak(Index::ONE, &t, cfg);
    let x: Vec<Vector> = unit.iter().map(|v| v.scale(1.0 / mu.upper)).collect();
    NormValue::lower_bound(unit.len() as f64 / mu.upper, Witness::Tuple(x), "pi_bar:unit_tuple")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg() -> OptimConfig {
        OptimConfig::default().with_restarts(8)
    }

    #[test]
    fn mu_examples() {
        let c = cfg();
        let t = Tuple::deltas(&SpaceSpec::lp(2.0, 2), 2).unwrap();
        assert_abs_diff_eq!(mu_weak(Index::ONE, &t, &c).lower, 2f64.sqrt(), epsilon = 1e-12);
        let t = Tuple::deltas(&SpaceSpec::lp(f64::INFINITY, 2), 2).unwrap();
        assert_abs_diff_eq!(mu_weak(Index::ONE, &t, &c).lower, 1.0, epsilon = 1e-12);
        let t = Tuple::from_real(&SpaceSpec::lp(2.0, 2), &[&[1.0, 0.0], &[1.0, 0.0]]).unwrap();
        let v = mu_weak(Index::TWO, &t, &c);
        assert!(v.is_exact());
        assert_abs_diff_eq!(v.lower, 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn mu_dual_examples() {
        let c = cfg();
        let t = Tuple::deltas(&dual_space(&SpaceSpec::lp(1.0, 2)), 2).unwrap();
        assert_abs_diff_eq!(mu_weak_dual(Index::ONE, &t, &c).lower, 1.0, epsilon = 1e-12);
        let t = Tuple::deltas(&dual_space(&SpaceSpec::lp(f64::INFINITY, 2)), 2).unwrap();
        assert_abs_diff_eq!(mu_weak_dual(Index::ONE, &t, &c).lower, 2.0, epsilon = 1e-12);
        let t = Tuple::from_real(&SpaceSpec::lp(2.0, 2), &[&[1.0, 0.0], &[1.0, 0.0]]).unwrap();
        assert_abs_diff_eq!(mu_weak_dual(Index::TWO, &t, &c).lower, 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn mu_dual_matches_mu_on_weighted_dual() {
        let c = cfg();
        let primal = SpaceSpec::weighted(Index::new(3.0).unwrap(), vec![2.0, 0.5, 1.0], ScalarField::Real).unwrap();
        let t = Tuple::from_real(&dual_space(&primal), &[&[1.0, -2.0, 0.5], &[0.3, 1.0, 1.0]]).unwrap();
        for p in [Index::ONE, Index::TWO] {
            let a = mu_weak(p, &t, &c);
            let b = mu_weak_dual(p, &t, &c);
            assert!(a.lower <= b.upper + 1e-9 && b.lower <= a.upper + 1e-9);
            assert_abs_diff_eq!(a.lower, b.lower, epsilon = 1e-6);
        }
    }

    #[test]
    fn pi_examples() {
        let c = cfg();
        let v = pi_summing_space(Index::ONE, Index::ONE, &SpaceSpec::lp(f64::INFINITY, 3), 3, &c).unwrap();
        assert!(v.is_exact());
        assert_abs_diff_eq!(v.lower, 3.0, epsilon = 1e-12);
        let v = pi_summing_space(Index::ONE, Index::ONE, &SpaceSpec::lp(1.5, 3), 1, &c).unwrap();
        assert_abs_diff_eq!(v.lower, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.upper, 1.0, epsilon = 1e-12);
        let v = pi_summing_space(Index::TWO, Index::TWO, &SpaceSpec::lp(2.0, 2), 2, &c).unwrap();
        assert_abs_diff_eq!(v.lower, 2f64.sqrt(), epsilon = 1e-12);
        assert!(pi_summing_space(Index::ONE, Index::TWO, &SpaceSpec::lp(2.0, 2), 2, &c).is_err());
    }

    #[test]
    fn c_n_examples() {
        let c = cfg();
        assert_eq!(c_n(&SpaceSpec::lp(3.0, 2), 1, &c).unwrap().lower, 1.0);
        let v = c_n(&SpaceSpec::lp(2.0, 2), 2, &c).unwrap();
        assert_abs_diff_eq!(v.upper, 2f64.sqrt(), epsilon = 1e-6);
        assert_abs_diff_eq!(v.lower, 2f64.sqrt(), epsilon = 1e-12);
        let v = c_n(&SpaceSpec::lp(1.0, 2), 2, &c).unwrap();
        assert!(v.upper <= 2f64.sqrt() + 1e-12);
    }

    #[test]
    fn pi_bar_times_c_n() {
        let c = cfg();
        let space = SpaceSpec::lp(2.0, 3);
        let cn = c_n(&space, 3, &c).unwrap();
        let Witness::Tuple(x) = &cn.witness else { panic!() };
        let pb = pi_bar_from_unit_tuple(&space, x, &c);
        assert_abs_diff_eq!(pb.lower * cn.upper, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn roots_of_unity_identities() {
        for k in 2..7 {
            let unimodular: Vec<C64> = (0..k).map(|j| C64::from_polar(1.0, 0.7 * j as f64 + 0.1)).collect();
            let z = roots_of_unity_mix(&unimodular);
            let s: f64 = z.iter().map(|v| v.norm_sqr()).sum();
            assert_abs_diff_eq!(s, (k * k) as f64, epsilon = 1e-9);
            let raw: Vec<C64> = (0..k).map(|j| C64::new(j as f64 - 1.0, 0.5)).collect();
            let nr: f64 = raw.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let unit: Vec<C64> = raw.iter().map(|v| v / nr).collect();
            let s: f64 = roots_of_unity_mix(&unit).iter().map(|v| v.norm_sqr()).sum();
            assert_abs_diff_eq!(s, k as f64, epsilon = 1e-9);
        }
    }

    #[test]
    fn roots_of_unity_witness_bounds_c_n() {
        let space = SpaceSpec::lp_complex(1.0, 3);
        let u = roots_of_unity_tuple(&space, 3).unwrap();
        let mu = mu_weak(Index::ONE, &Tuple { space: space.clone(), vectors: u }, &cfg());
        assert!(mu.lower <= 3f64.sqrt() + 1e-9);
    }
}
