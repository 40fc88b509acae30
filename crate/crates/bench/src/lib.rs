//! Deterministic fixtures for the benchmarks.

use multinorm::{Index, MatrixOp, ScalarField, SpaceSpec, Tuple, Vector};

/// Unweighted real `l^p_dim`.
pub fn space(p: f64, dim: usize) -> SpaceSpec {
    SpaceSpec::new(Index::new(p).expect("valid index"), dim, ScalarField::Real).expect("positive dimension")
}

/// An `n`-tuple with entries `sin((j + 1)(k + 1))`.
pub fn tuple(space: &SpaceSpec, n: usize) -> Tuple {
    let vectors = (0..n)
        .map(|j| Vector::real(&(0..space.dim).map(|k| (((j + 1) * (k + 1)) as f64).sin()).collect::<Vec<_>>()))
        .collect();
    Tuple::new(space.clone(), vectors).expect("tuple matches the space")
}

/// A dense `rows × cols` matrix with entries `cos(i + 2j)` as an operator
/// `l^p → l^q`.
pub fn operator(rows: usize, cols: usize, p: f64, q: f64) -> MatrixOp {
    let entries: Vec<Vec<f64>> = (0..rows).map(|i| (0..cols).map(|j| ((i + 2 * j) as f64).cos()).collect()).collect();
    let refs: Vec<&[f64]> = entries.iter().map(Vec::as_slice).collect();
    MatrixOp::real(&refs, p, q).expect("valid operator")
}
