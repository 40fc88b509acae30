//! Finite-dimensional weighted `l^p` spaces, their duals, the coordinate
//! lattice order, and matrices viewed as operators between `l^p` spaces.
//!
//! A [`SpaceSpec`] describes `L^p(Ω, μ)` for a finite measure space with
//! `|Ω| = dim` atoms of mass `weights[k]`. Scalars are always stored as
//! [`C64`]; a space over the real field rejects vectors with a nonzero
//! imaginary part.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::optim::{NormValue, OptimConfig, Witness};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarField {
    Real,
    Complex,
}

impl Default for ScalarField {
    fn default() -> Self {
        ScalarField::Real
    }
}

/// An exponent in `[1, ∞]`.
#[derive(Clone, Copy, PartialEq, PartialOrd)]
pub struct Index(f64);

impl Index {
    pub const ONE: Index = Index(1.0);
    pub const TWO: Index = Index(2.0);
    pub const INF: Index = Index(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::Invalid(format!("index must lie in [1, inf], got {p}")));
        }
        Ok(Index(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_inf(self) -> bool {
        self.0.is_infinite()
    }

    pub fn is_one(self) -> bool {
        self.0 == 1.0
    }

    /// The conjugate index `p'` with `1/p + 1/p' = 1`.
    pub fn conjugate(self) -> Index {
        if self.0 == 1.0 {
            Index::INF
        } else if self.is_inf() {
            Index::ONE
        } else {
            Index(self.0 / (self.0 - 1.0))
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn recip(self) -> f64 {
        if self.is_inf() {
            0.0
        } else {
            1.0 / self.0
        }
    }
}

impl fmt::Debug for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inf() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Index {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_inf() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Index {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        let p = match Raw::deserialize(d)? {
            Raw::Num(p) => p,
            Raw::Str(s) => match s.to_ascii_lowercase().as_str() {
                "inf" | "infinity" => f64::INFINITY,
                other => other
                    .parse::<f64>()
                    .map_err(|_| de::Error::custom(format!("bad index {s:?}")))?,
            },
        };
        Index::new(p).map_err(de::Error::custom)
    }
}

/// `(Σ v_k^p)^{1/p}` for nonnegative `v`, read as `max` when `p = ∞`.
pub fn lp_combine<I: IntoIterator<Item = f64>>(values: I, p: Index) -> f64 {
    if p.is_inf() {
        return values.into_iter().fold(0.0, f64::max);
    }
    let v: Vec<f64> = values.into_iter().collect();
    let scale = v.iter().cloned().fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    if p.is_one() {
        return v.iter().sum();
    }
    let s: f64 = v.iter().map(|x| (x / scale).powf(p.0)).sum();
    scale * s.powf(1.0 / p.0)
}

/// Unweighted `l^p` norm of a coordinate vector.
pub fn lp_norm(x: &[C64], p: Index) -> f64 {
    lp_combine(x.iter().map(|z| z.norm()), p)
}

/// A unit vector `u` of `l^p` with `Σ u_k w_k = ‖w‖_{p'}` (bilinear pairing).
///
/// Returns the zero vector when `w = 0`.
pub fn dual_direction(w: &[C64], p: Index) -> Vec<C64> {
    let pc = p.conjugate();
    let nw = lp_norm(w, pc);
    if nw == 0.0 {
        return vec![ZERO; w.len()];
    }
    if p.is_inf() {
        return w
            .iter()
            .map(|z| if z.norm() == 0.0 { ONE } else { z.conj() / z.norm() })
            .collect();
    }
    if p.is_one() {
        // all mass on one coordinate of maximal modulus
        let (k, _) = w
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bk, bv), (k, z)| if z.norm() > bv { (k, z.norm()) } else { (bk, bv) });
        let mut u = vec![ZERO; w.len()];
        u[k] = w[k].conj() / w[k].norm();
        return u;
    }
    let e = pc.0 - 1.0;
    w.iter()
        .map(|z| {
            let r = z.norm();
            if r == 0.0 {
                ZERO
            } else {
                z.conj() / r * (r / nw).powf(e)
            }
        })
        .collect()
}

/// A finite-dimensional weighted `l^p` space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct SpaceSpec {
    pub p: Index,
    pub dim: usize,
    pub weights: Vec<f64>,
    #[serde(default)]
    pub field: ScalarField,
}

#[derive(Deserialize)]
struct RawSpace {
    p: Index,
    dim: usize,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    #[serde(default)]
    field: ScalarField,
}

impl TryFrom<RawSpace> for SpaceSpec {
    type Error = Error;
    fn try_from(r: RawSpace) -> Result<Self> {
        match r.weights {
            Some(w) => SpaceSpec::weighted(r.p, w, r.field),
            None => SpaceSpec::new(r.p, r.dim, r.field),
        }
        .and_then(|s| {
            if s.dim != r.dim {
                Err(Error::Dimension { expected: r.dim, found: s.dim })
            } else {
                Ok(s)
            }
        })
    }
}

impl SpaceSpec {
    pub fn new(p: Index, dim: usize, field: ScalarField) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("dimension must be positive".into()));
        }
        Ok(SpaceSpec { p, dim, weights: vec![1.0; dim], field })
    }

    pub fn weighted(p: Index, weights: Vec<f64>, field: ScalarField) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Invalid("dimension must be positive".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Invalid("weights must be finite and strictly positive".into()));
        }
        Ok(SpaceSpec { p, dim: weights.len(), weights, field })
    }

    /// Real `l^p_m` with unit weights.
    pub fn lp(p: f64, dim: usize) -> Self {
        SpaceSpec::new(Index::new(p).expect("valid index"), dim, ScalarField::Real).expect("valid space")
    }

    /// Complex `l^p_m` with unit weights.
    pub fn lp_complex(p: f64, dim: usize) -> Self {
        SpaceSpec::new(Index::new(p).expect("valid index"), dim, ScalarField::Complex)
            .expect("valid space")
    }

    pub fn is_unweighted(&self) -> bool {
        self.weights.iter().all(|w| *w == 1.0)
    }

    pub fn with_field(&self, field: ScalarField) -> Self {
        SpaceSpec { field, ..self.clone() }
    }

    /// Norm of raw coordinates; no validation.
    pub fn norm_of(&self, x: &[C64]) -> f64 {
        if self.p.is_inf() {
            return lp_norm(x, self.p);
        }
        if self.is_unweighted() {
            return lp_norm(x, self.p);
        }
        let p = self.p.0;
        lp_combine(
            x.iter().zip(&self.weights).map(|(z, w)| z.norm() * w.powf(1.0 / p)),
            self.p,
        )
    }

    /// `w_k^{1/p}` factors mapping this space isometrically onto unweighted `l^p`.
    pub fn isometry_scale(&self) -> Vec<f64> {
        if self.p.is_inf() {
            vec![1.0; self.dim]
        } else {
            self.weights.iter().map(|w| w.powf(1.0 / self.p.0)).collect()
        }
    }

    pub fn check(&self, x: &Vector) -> Result<()> {
        if x.0.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, found: x.0.len() });
        }
        if self.field == ScalarField::Real && x.0.iter().any(|z| z.im != 0.0) {
            return Err(Error::Field("complex entry in a real space".into()));
        }
        if x.0.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Invalid("non-finite entry".into()));
        }
        Ok(())
    }

    pub fn zero(&self) -> Vector {
        Vector(vec![ZERO; self.dim])
    }

    pub fn basis(&self, k: usize) -> Vector {
        let mut v = vec![ZERO; self.dim];
        v[k] = ONE;
        Vector(v)
    }

    /// `δ_k / ‖δ_k‖`.
    pub fn unit_basis(&self, k: usize) -> Vector {
        let b = self.basis(k);
        let n = self.norm_of(&b.0);
        b.scale(1.0 / n)
    }

    /// A unit vector `u` with `⟨u, λ⟩ = ‖λ‖_{dual}` for `λ` in the dual space.
    pub fn norming_vector(&self, lambda: &[C64]) -> Vector {
        // pass to unweighted coordinates: u = D^{-1} ũ, pairing Σ w u λ = Σ ũ (w D^{-1} λ)
        let s = self.isometry_scale();
        let w_tilde: Vec<C64> = lambda
            .iter()
            .enumerate()
            .map(|(k, l)| l * (self.weights[k] / s[k]))
            .collect();
        let ut = dual_direction(&w_tilde, self.p);
        Vector(ut.iter().zip(&s).map(|(u, sk)| u / *sk).collect())
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let field = match self.field {
            ScalarField::Real => "R",
            ScalarField::Complex => "C",
        };
        write!(f, "l^{}_{}({})", self.p, self.dim, field)?;
        if !self.is_unweighted() {
            write!(f, " w={:?}", self.weights)?;
        }
        Ok(())
    }
}

/// Coordinates of an element of some [`SpaceSpec`].
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Vector(pub Vec<C64>);

impl Vector {
    pub fn real(v: &[f64]) -> Self {
        Vector(v.iter().map(|x| C64::new(*x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scale(&self, a: f64) -> Vector {
        Vector(self.0.iter().map(|z| z * a).collect())
    }

    pub fn scale_c(&self, a: C64) -> Vector {
        Vector(self.0.iter().map(|z| z * a).collect())
    }

    pub fn add(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| z.norm() == 0.0)
    }

    pub fn max_abs_diff(&self, other: &Vector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl Serialize for Vector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let real = self.0.iter().all(|z| z.im == 0.0);
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for z in &self.0 {
            if real {
                seq.serialize_element(&z.re)?;
            } else {
                seq.serialize_element(&[z.re, z.im])?;
            }
        }
        seq.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawScalar {
    Re(f64),
    Pair([f64; 2]),
}

impl From<RawScalar> for C64 {
    fn from(r: RawScalar) -> C64 {
        match r {
            RawScalar::Re(x) => C64::new(x, 0.0),
            RawScalar::Pair([a, b]) => C64::new(a, b),
        }
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<RawScalar> = Vec::deserialize(d)?;
        Ok(Vector(raw.into_iter().map(C64::from).collect()))
    }
}

/// A dense scalar matrix; JSON is an array of rows in the [`Vector`] format.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix(pub DMatrix<C64>);

impl Matrix {
    pub fn real(rows: &[&[f64]]) -> Self {
        let n = rows.first().map_or(0, |r| r.len());
        Matrix(DMatrix::from_fn(rows.len(), n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn identity(n: usize) -> Self {
        Matrix(DMatrix::identity(n, n))
    }
}

impl std::ops::Deref for Matrix {
    type Target = DMatrix<C64>;
    fn deref(&self) -> &DMatrix<C64> {
        &self.0
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vector> =
            (0..self.0.nrows()).map(|i| Vector(self.0.row(i).iter().cloned().collect())).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vector> = Vec::deserialize(d)?;
        let n = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n) {
            return Err(de::Error::custom("ragged matrix"));
        }
        if rows.iter().flat_map(|r| &r.0).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(de::Error::custom("matrix entries must be finite"));
        }
        Ok(Matrix(DMatrix::from_fn(rows.len(), n, |i, j| rows[i].0[j])))
    }
}

/// An ordered, non-empty `n`-tuple of vectors in one space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tuple {
    pub space: SpaceSpec,
    pub vectors: Vec<Vector>,
}

impl Tuple {
    pub fn new(space: SpaceSpec, vectors: Vec<Vector>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::Invalid("a tuple needs at least one vector".into()));
        }
        for v in &vectors {
            space.check(v)?;
        }
        Ok(Tuple { space, vectors })
    }

    pub fn from_real(space: &SpaceSpec, rows: &[&[f64]]) -> Result<Self> {
        Tuple::new(space.clone(), rows.iter().map(|r| Vector::real(r)).collect())
    }

    /// `(δ_1, ..., δ_n)`.
    pub fn deltas(space: &SpaceSpec, n: usize) -> Result<Self> {
        if n > space.dim {
            return Err(Error::Dimension { expected: space.dim, found: n });
        }
        Tuple::new(space.clone(), (0..n).map(|k| space.basis(k)).collect())
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.vectors.iter().map(|v| self.space.norm_of(&v.0)).collect()
    }

    pub fn max_norm(&self) -> f64 {
        self.norms().into_iter().fold(0.0, f64::max)
    }

    pub fn with_vectors(&self, vectors: Vec<Vector>) -> Tuple {
        Tuple { space: self.space.clone(), vectors }
    }

    /// Flattens into `[re, im, re, im, ...]` (complex) or `[re, ...]` (real).
    pub fn to_params(&self) -> Vec<f64> {
        flatten(&self.vectors, self.space.field)
    }

    pub fn from_params(space: &SpaceSpec, n: usize, params: &[f64]) -> Tuple {
        Tuple { space: space.clone(), vectors: unflatten(params, n, space.dim, space.field) }
    }
}

pub(crate) fn flatten(vectors: &[Vector], field: ScalarField) -> Vec<f64> {
    let mut out = Vec::new();
    for v in vectors {
        for z in &v.0 {
            out.push(z.re);
            if field == ScalarField::Complex {
                out.push(z.im);
            }
        }
    }
    out
}

pub(crate) fn unflatten(params: &[f64], n: usize, dim: usize, field: ScalarField) -> Vec<Vector> {
    let stride = if field == ScalarField::Complex { 2 } else { 1 };
    (0..n)
        .map(|j| {
            Vector(
                (0..dim)
                    .map(|k| {
                        let base = (j * dim + k) * stride;
                        if stride == 2 {
                            C64::new(params[base], params[base + 1])
                        } else {
                            C64::new(params[base], 0.0)
                        }
                    })
                    .collect(),
            )
        })
        .collect()
}

pub fn norm(space: &SpaceSpec, x: &Vector) -> Result<f64> {
    space.check(x)?;
    Ok(space.norm_of(&x.0))
}

/// Bilinear pairing `Σ w_k x_k λ_k`, using the weights of the primal space.
pub fn pairing(space: &SpaceSpec, x: &Vector, lambda: &Vector) -> Result<C64> {
    if x.len() != space.dim {
        return Err(Error::Dimension { expected: space.dim, found: x.len() });
    }
    if lambda.len() != space.dim {
        return Err(Error::Dimension { expected: space.dim, found: lambda.len() });
    }
    Ok(pair_raw(&space.weights, &x.0, &lambda.0))
}

pub(crate) fn pair_raw(weights: &[f64], x: &[C64], l: &[C64]) -> C64 {
    x.iter().zip(l).zip(weights).map(|((a, b), w)| a * b * *w).sum()
}

pub fn dual_space(space: &SpaceSpec) -> SpaceSpec {
    SpaceSpec { p: space.p.conjugate(), ..space.clone() }
}

/// A matrix regarded as an operator `l^p_n → l^q_m` (unweighted).
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixOp {
    pub entries: DMatrix<C64>,
    pub p: Index,
    pub q: Index,
    pub field: ScalarField,
}

impl MatrixOp {
    pub fn new(entries: DMatrix<C64>, p: Index, q: Index) -> Result<Self> {
        if entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Invalid("matrix entries must be finite".into()));
        }
        let field = if entries.iter().all(|z| z.im == 0.0) {
            ScalarField::Real
        } else {
            ScalarField::Complex
        };
        Ok(MatrixOp { entries, p, q, field })
    }

    pub fn real(rows: &[&[f64]], p: f64, q: f64) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("ragged matrix".into()));
        }
        let entries = DMatrix::from_fn(m, n, |i, j| C64::new(rows[i][j], 0.0));
        MatrixOp::new(entries, Index::new(p)?, Index::new(q)?)
    }

    /// Forces the field over which the supremum is taken.
    pub fn over(mut self, field: ScalarField) -> Result<Self> {
        if field == ScalarField::Real && self.entries.iter().any(|z| z.im != 0.0) {
            return Err(Error::Field("complex matrix cannot act over the real field".into()));
        }
        self.field = field;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        apply(&self.entries, x)
    }

    /// `aᵀ` with roles `q' → p'`.
    pub fn transpose(&self) -> MatrixOp {
        MatrixOp {
            entries: self.entries.transpose(),
            p: self.q.conjugate(),
            q: self.p.conjugate(),
            field: self.field,
        }
    }

    pub fn with_roles(&self, p: Index, q: Index) -> MatrixOp {
        MatrixOp { p, q, ..self.clone() }
    }

    /// `‖a x‖_q / ‖x‖_p`.
    pub fn ratio(&self, x: &[C64]) -> f64 {
        let d = lp_norm(x, self.p);
        if d == 0.0 {
            return 0.0;
        }
        lp_norm(&self.apply(x), self.q) / d
    }
}

pub(crate) fn apply(a: &DMatrix<C64>, x: &[C64]) -> Vec<C64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

/// Closed-form operator norms: `1 → q` (max column `q`-norm), `p → ∞`
/// (max row `p'`-norm), monomial matrices, and `2 → 2`
/// (largest singular value).
pub fn exact_op_norm(a: &MatrixOp) -> Option<NormValue> {
    let (m, n) = (a.rows(), a.cols());
    if m == 0 || n == 0 {
        return Some(NormValue::exact(0.0, Witness::None, "empty"));
    }
    if a.p.is_one() {
        let (j, v) = (0..n)
            .map(|j| {
                let col: Vec<C64> = a.entries.column(j).iter().cloned().collect();
                (j, lp_norm(&col, a.q))
            })
            .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        let mut w = vec![ZERO; n];
        w[j] = ONE;
        return Some(NormValue::exact(v, Witness::Point(Vector(w)), "closed_form:max_column_norm"));
    }
    if a.q.is_inf() {
        let pc = a.p.conjugate();
        let (i, v) = (0..m)
            .map(|i| {
                let row: Vec<C64> = a.entries.row(i).iter().cloned().collect();
                (i, lp_norm(&row, pc))
            })
            .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        let row: Vec<C64> = a.entries.row(i).iter().cloned().collect();
        let w = dual_direction(&row, a.p);
        return Some(NormValue::exact(v, Witness::Point(Vector(w)), "closed_form:max_row_norm"));
    }
    if let Some(v) = monomial_op_norm(a) {
        return Some(v);
    }
    if a.p == Index::TWO && a.q == Index::TWO {
        let (s, v) = top_singular(&a.entries);
        // a real matrix has a real top singular vector
        let w = if a.field == ScalarField::Real {
            v.iter().map(|z| C64::new(z.re, 0.0)).collect()
        } else {
            v
        };
        return Some(NormValue::exact(s, Witness::Point(Vector(w)), "closed_form:spectral"));
    }
    None
}

/// Matrices with at most one nonzero entry in every row and every column act
/// as a diagonal map up to coordinate relabelling: the norm is `max |d|` when
/// `p ≤ q` and `‖d‖_s` with `1/s = 1/q − 1/p` otherwise.
fn monomial_op_norm(a: &MatrixOp) -> Option<NormValue> {
    let (m, n) = (a.rows(), a.cols());
    let mut d = vec![(0usize, ZERO); n];
    let mut row_used = vec![false; m];
    for j in 0..n {
        for i in 0..m {
            let z = a.entries[(i, j)];
            if z != ZERO {
                if d[j].1 != ZERO || row_used[i] {
                    return None;
                }
                d[j] = (i, z);
                row_used[i] = true;
            }
        }
    }
    let abs: Vec<f64> = d.iter().map(|(_, z)| z.norm()).collect();
    let mut w = vec![ZERO; n];
    if a.p.value() <= a.q.value() {
        let (k, v) = abs.iter().enumerate().fold((0, -1.0), |b, (k, v)| if *v > b.1 { (k, *v) } else { b });
        w[k] = ONE;
        return Some(NormValue::exact(v, Witness::Point(Vector(w)), "closed_form:monomial"));
    }
    let s = Index::new(1.0 / (a.q.recip() - a.p.recip())).ok()?;
    let v = lp_combine(abs.iter().cloned(), s);
    if v == 0.0 {
        w[0] = ONE;
        return Some(NormValue::exact(0.0, Witness::Point(Vector(w)), "closed_form:monomial"));
    }
    let e = if a.p.is_inf() { 0.0 } else { s.0 / a.p.0 };
    for (k, x) in abs.iter().enumerate() {
        w[k] = C64::new((x / v).powf(e), 0.0);
        if *x == 0.0 && e > 0.0 {
            w[k] = ZERO;
        }
    }
    Some(NormValue::exact(v, Witness::Point(Vector(w)), "closed_form:monomial"))
}

/// Largest singular value and a matching right singular vector.
pub fn top_singular(a: &DMatrix<C64>) -> (f64, Vec<C64>) {
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let (k, s) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, -1.0), |b, (k, s)| if *s > b.1 { (k, *s) } else { b });
    let mut v: Vec<C64> = v_t.row(k).iter().map(|z| z.conj()).collect();
    if a.iter().all(|z| z.im == 0.0) {
        // fix the global phase so that the vector is real
        if let Some(piv) = v.iter().cloned().max_by(|x, y| x.norm().total_cmp(&y.norm())) {
            if piv.norm() > 0.0 {
                let ph = piv.conj() / piv.norm();
                v = v.iter().map(|z| z * ph).collect();
            }
        }
    }
    (s.max(0.0), v)
}

pub fn nuclear_norm(a: &DMatrix<C64>) -> f64 {
    a.clone().svd(false, false).singular_values.iter().sum()
}

/// Operator norm with exact closed forms where available, else the shared
/// search kernel under the default configuration.
pub fn matrix_op_norm(a: &MatrixOp) -> NormValue {
    crate::optim::op_norm_pq(a, &OptimConfig::default())
}

fn require_real(x: &Vector) -> Result<()> {
    if x.0.iter().any(|z| z.im != 0.0) {
        Err(Error::Field("lattice sup/inf need real-valued vectors".into()))
    } else {
        Ok(())
    }
}

fn same_len(x: &Vector, y: &Vector) -> Result<()> {
    if x.len() != y.len() {
        Err(Error::Dimension { expected: x.len(), found: y.len() })
    } else {
        Ok(())
    }
}

/// Coordinatewise modulus.
pub fn lattice_abs(x: &Vector) -> Vector {
    Vector(x.0.iter().map(|z| C64::new(z.norm(), 0.0)).collect())
}

pub fn lattice_sup(x: &Vector, y: &Vector) -> Result<Vector> {
    same_len(x, y)?;
    require_real(x)?;
    require_real(y)?;
    Ok(Vector(x.0.iter().zip(&y.0).map(|(a, b)| C64::new(a.re.max(b.re), 0.0)).collect()))
}

pub fn lattice_inf(x: &Vector, y: &Vector) -> Result<Vector> {
    same_len(x, y)?;
    require_real(x)?;
    require_real(y)?;
    Ok(Vector(x.0.iter().zip(&y.0).map(|(a, b)| C64::new(a.re.min(b.re), 0.0)).collect()))
}

pub fn pos_part(x: &Vector) -> Result<Vector> {
    lattice_sup(x, &Vector(vec![ZERO; x.len()]))
}

pub fn neg_part(x: &Vector) -> Result<Vector> {
    lattice_sup(&x.scale(-1.0), &Vector(vec![ZERO; x.len()]))
}

/// Positive and negative sets of a real signed measure on `{0..m-1}`;
/// zero atoms go to the positive set.
pub fn hahn_split(mu: &Vector) -> Result<(Vec<usize>, Vec<usize>)> {
    require_real(mu)?;
    let (pos, neg): (Vec<usize>, Vec<usize>) = (0..mu.len()).partition(|&k| mu.0[k].re >= 0.0);
    Ok((pos, neg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn norm_examples() {
        let l2 = SpaceSpec::lp(2.0, 3);
        assert_abs_diff_eq!(norm(&l2, &Vector::real(&[3.0, 4.0, 0.0])).unwrap(), 5.0, epsilon = 1e-15);
        let l1w = SpaceSpec::weighted(Index::ONE, vec![2.0, 1.0], ScalarField::Real).unwrap();
        assert_abs_diff_eq!(norm(&l1w, &Vector::real(&[1.0, 1.0])).unwrap(), 3.0, epsilon = 1e-15);
        let linf = SpaceSpec::lp(f64::INFINITY, 2);
        assert_eq!(norm(&linf, &Vector::real(&[1.0, -2.0])).unwrap(), 2.0);
    }

    #[test]
    fn norm_rejects_bad_vectors() {
        let l2 = SpaceSpec::lp(2.0, 3);
        assert!(matches!(norm(&l2, &Vector::real(&[1.0])), Err(Error::Dimension { .. })));
        let z = Vector(vec![C64::new(0.0, 1.0), ZERO, ZERO]);
        assert!(matches!(norm(&l2, &z), Err(Error::Field(_))));
    }

    #[test]
    fn pairing_examples() {
        let s = SpaceSpec::lp(2.0, 2);
        let v = pairing(&s, &Vector::real(&[1.0, 2.0]), &Vector::real(&[3.0, -1.0])).unwrap();
        assert_eq!(v, C64::new(1.0, 0.0));
        let w = SpaceSpec::weighted(Index::TWO, vec![2.0, 1.0], ScalarField::Real).unwrap();
        let v = pairing(&w, &Vector::real(&[1.0, 0.0]), &Vector::real(&[1.0, 5.0])).unwrap();
        assert_eq!(v.re, 2.0);
        let v = pairing(&w, &w.basis(0), &w.basis(1)).unwrap();
        assert_eq!(v.norm(), 0.0);
    }

    #[test]
    fn dual_indices() {
        assert_eq!(dual_space(&SpaceSpec::lp(2.0, 2)).p, Index::TWO);
        assert!(dual_space(&SpaceSpec::lp(1.0, 2)).p.is_inf());
        assert_abs_diff_eq!(dual_space(&SpaceSpec::lp(3.0, 2)).p.value(), 1.5, epsilon = 1e-15);
        assert!(dual_space(&dual_space(&SpaceSpec::lp(1.0, 2))).p.is_one());
    }

    #[test]
    fn op_norm_closed_forms() {
        let a = MatrixOp::real(&[&[1.0, 2.0], &[3.0, -4.0]], f64::INFINITY, f64::INFINITY).unwrap();
        assert_eq!(exact_op_norm(&a).unwrap().lower, 7.0);
        let a = a.with_roles(Index::ONE, Index::ONE);
        assert_eq!(exact_op_norm(&a).unwrap().lower, 6.0);
        let id = MatrixOp::new(DMatrix::identity(3, 3), Index::TWO, Index::TWO).unwrap();
        assert_abs_diff_eq!(exact_op_norm(&id).unwrap().lower, 1.0, epsilon = 1e-12);
        assert!(exact_op_norm(&a.with_roles(Index::new(3.0).unwrap(), Index::TWO)).is_none());
    }

    #[test]
    fn closed_form_witnesses_attain_value() {
        let a = MatrixOp::real(&[&[1.0, -2.0, 0.5], &[0.3, 4.0, -1.0]], 3.0, f64::INFINITY).unwrap();
        let v = exact_op_norm(&a).unwrap();
        let Witness::Point(x) = &v.witness else { panic!() };
        assert_abs_diff_eq!(a.ratio(&x.0), v.lower, epsilon = 1e-12);
        let a = a.with_roles(Index::TWO, Index::TWO);
        let v = exact_op_norm(&a).unwrap();
        let Witness::Point(x) = &v.witness else { panic!() };
        assert_abs_diff_eq!(a.ratio(&x.0), v.lower, epsilon = 1e-10);
        assert!(x.0.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn lattice_examples() {
        let x = Vector(vec![C64::new(-1.0, 0.0), C64::new(0.0, 2.0)]);
        assert_eq!(lattice_abs(&x), Vector::real(&[1.0, 2.0]));
        assert_eq!(
            lattice_sup(&Vector::real(&[1.0, 0.0]), &Vector::real(&[0.0, 2.0])).unwrap(),
            Vector::real(&[1.0, 2.0])
        );
        assert_eq!(pos_part(&Vector::real(&[-3.0, 4.0])).unwrap(), Vector::real(&[0.0, 4.0]));
        assert!(matches!(lattice_sup(&x, &x), Err(Error::Field(_))));
    }

    #[test]
    fn hahn_examples() {
        assert_eq!(hahn_split(&Vector::real(&[1.0, -2.0, 0.0])).unwrap(), (vec![0, 2], vec![1]));
        assert_eq!(hahn_split(&Vector::real(&[-1.0, -1.0])).unwrap(), (vec![], vec![0, 1]));
        assert_eq!(hahn_split(&Vector::real(&[5.0])).unwrap(), (vec![0], vec![]));
    }

    #[test]
    fn norming_vector_attains_dual_norm() {
        let s = SpaceSpec::weighted(Index::new(3.0).unwrap(), vec![0.5, 2.0, 1.0], ScalarField::Real).unwrap();
        let lam = Vector::real(&[1.0, -0.5, 2.0]);
        let u = s.norming_vector(&lam.0);
        assert_abs_diff_eq!(s.norm_of(&u.0), 1.0, epsilon = 1e-12);
        let d = dual_space(&s);
        assert_abs_diff_eq!(pairing(&s, &u, &lam).unwrap().re, d.norm_of(&lam.0), epsilon = 1e-12);
    }

    #[test]
    fn space_json() {
        let s: SpaceSpec = serde_json::from_str(r#"{"p":"inf","dim":2,"field":"complex"}"#).unwrap();
        assert!(s.p.is_inf());
        assert_eq!(s.weights, vec![1.0, 1.0]);
        let bad = serde_json::from_str::<SpaceSpec>(r#"{"p":0.5,"dim":2}"#);
        assert!(bad.is_err());
        let bad = serde_json::from_str::<SpaceSpec>(r#"{"p":2,"dim":2,"weights":[1,-1]}"#);
        assert!(bad.is_err());
        let v: Vector = serde_json::from_str("[1, [0, 2]]").unwrap();
        assert_eq!(v.0[1], C64::new(0.0, 2.0));
    }
}
