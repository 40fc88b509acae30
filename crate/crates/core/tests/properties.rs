use multinorm::decompositions::{is_hermitian, is_orthogonal, is_small};
use multinorm::matrix_laws::{check_coagulation_bound, is_row_special, max_row_sum, row_special_decompose};
use multinorm::multinorms::random_tuple;
use multinorm::operators::{mb_norm, operator_norm, partition_permutation_bound, permutation_operator};
use multinorm::optim::op_norm_pq;
use multinorm::summing::{mu_weak, mu_weak_dual};
use multinorm::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg() -> OptimConfig {
    OptimConfig::default().with_restarts(4)
}

fn index() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(3.0), Just(f64::INFINITY)]
}

fn field() -> impl Strategy<Value = ScalarField> {
    prop_oneof![Just(ScalarField::Real), Just(ScalarField::Complex)]
}

fn space(p: f64, dim: usize, field: ScalarField, weighted: bool, rng: &mut ChaCha8Rng) -> SpaceSpec {
    let p = Index::new(p).unwrap();
    if weighted {
        SpaceSpec::weighted(p, (0..dim).map(|_| rng.random_range(0.25..4.0)).collect(), field).unwrap()
    } else {
        SpaceSpec::new(p, dim, field).unwrap()
    }
}

fn random_matrix(m: usize, n: usize, field: ScalarField, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    DMatrix::from_fn(m, n, |_, _| {
        let im = if field == ScalarField::Complex { rng.random_range(-1.0..=1.0) } else { 0.0 };
        C64::new(rng.random_range(-1.0..=1.0), im)
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn row_special_parts_reassemble(seed in any::<u64>(), m in 1usize..=6, n in 1usize..=6, f in field()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(m, n, f, &mut rng);
        let d = row_special_decompose(&MatrixOp::new(a.clone(), Index::INF, Index::INF).unwrap());
        let err = (d.sum(m, n) - &a).iter().fold(0.0f64, |x, z| x.max(z.norm()));
        prop_assert!(err <= 1e-12);
        prop_assert!((d.total() - max_row_sum(&a)).abs() <= 1e-9);
        prop_assert!(d.parts.iter().all(|p| is_row_special(p)));
        prop_assert!(d.parts.len() <= m * n);
    }

    #[test]
    fn every_value_is_squeezed_between_max_and_sum(seed in any::<u64>(), p in index(), f in field(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = space(p, 3, f, rng.random_bool(0.5), &mut rng);
        let t = random_tuple(&s, n, &mut rng);
        let (lo, hi) = (t.max_norm(), t.norms().iter().sum::<f64>());
        let mut specs = vec![
            MultiNormSpec::Min,
            MultiNormSpec::Lattice,
            MultiNormSpec::DualLattice,
            MultiNormSpec::Partition { blocks: vec![vec![0, 2], vec![1]] },
        ];
        if !s.p.is_inf() {
            specs.push(MultiNormSpec::StandardQ { q: s.p });
            specs.push(MultiNormSpec::StandardQ { q: Index::new(s.p.value() + 1.0).unwrap() });
        }
        for spec in specs {
            let v = evaluate(&spec, &t, &cfg()).unwrap();
            prop_assert!(v.lower <= v.upper);
            prop_assert!(v.lower >= lo - 1e-9 * lo.max(1.0), "{} below max: {} < {}", spec.name(), v.lower, lo);
            prop_assert!(v.lower <= hi + 1e-9 * hi.max(1.0), "{} above sum: {} > {}", spec.name(), v.lower, hi);
        }
    }

    #[test]
    fn standard_q_decreases_in_q(seed in any::<u64>(), p in prop_oneof![Just(1.0), Just(2.0)], n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = SpaceSpec::lp(p, 4);
        let t = random_tuple(&s, n, &mut rng);
        let mut prev = f64::INFINITY;
        for q in [p, p + 0.5, p + 1.0, p + 3.0] {
            let v = evaluate(&MultiNormSpec::StandardQ { q: Index::new(q).unwrap() }, &t, &cfg()).unwrap();
            prop_assert!(v.is_exact());
            prop_assert!(v.lower <= prev + 1e-12);
            prev = v.lower;
        }
    }

    #[test]
    fn op_norm_bracket_dominates_samples(seed in any::<u64>(), p in index(), q in index(), f in field()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = MatrixOp { entries: random_matrix(3, 3, f, &mut rng), p: Index::new(p).unwrap(), q: Index::new(q).unwrap(), field: f };
        let v = op_norm_pq(&a, &cfg());
        prop_assert!(v.lower <= v.upper * (1.0 + 1e-12));
        if let Witness::Point(x) = &v.witness {
            prop_assert!((a.ratio(&x.0) - v.lower).abs() <= 1e-9 * v.lower.max(1.0));
        }
        for _ in 0..16 {
            let x: Vec<C64> = (0..3).map(|_| C64::new(rng.random_range(-1.0..1.0), if f == ScalarField::Complex { rng.random_range(-1.0..1.0) } else { 0.0 })).collect();
            prop_assert!(a.ratio(&x) <= v.upper * (1.0 + 1e-9));
        }
    }

    #[test]
    fn weak_summing_bracket_and_dual_form_agree(seed in any::<u64>(), p in prop_oneof![Just(1.0), Just(2.0), Just(3.0)], r in index(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = space(r, 3, ScalarField::Real, true, &mut rng);
        let t = random_tuple(&s, n, &mut rng);
        let p = Index::new(p).unwrap();
        let a = mu_weak(p, &t, &cfg());
        prop_assert!(a.lower <= a.upper * (1.0 + 1e-12));
        let b = mu_weak_dual(p, &t, &cfg());
        prop_assert!(a.lower <= b.upper * (1.0 + 1e-9) + 1e-12);
        prop_assert!(b.lower <= a.upper * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn dual_lattice_is_contracted_by_coagulation(seed in any::<u64>(), p in index(), f in field()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = space(p, 3, f, rng.random_bool(0.5), &mut rng);
        let c = cfg().with_seed(seed);
        let r = check_coagulation_bound(&MultiNormSpec::DualLattice, &s, 6, 64, &c).unwrap();
        prop_assert_eq!(r.violation_count, 0);
    }

    #[test]
    fn band_decompositions_are_small_orthogonal_and_hermitian(seed in any::<u64>(), p in index()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = space(p, 4, ScalarField::Real, rng.random_bool(0.5), &mut rng);
        let mut coords: Vec<usize> = (0..4).collect();
        coords.shuffle(&mut rng);
        let cut = rng.random_range(1..4);
        let d = Decomposition::coordinate(4, &[coords[..cut].to_vec(), coords[cut..].to_vec()]).unwrap();
        let c = cfg().with_seed(seed);
        let small = is_small(&d, &MultiNormSpec::Lattice, &s, 16, &c).unwrap().holds;
        let orth = is_orthogonal(&d, &MultiNormSpec::Lattice, &s, 16, &c).unwrap().holds;
        let herm = is_hermitian(&d, &s, 16, &c).unwrap().holds;
        prop_assert!(small && orth && herm);
        // values on block-supported tuples equal the norm of the sum
        let xs: Vec<Vector> = random_tuple(&s, 2, &mut rng).vectors.iter().enumerate().map(|(i, x)| d.project(i, x)).collect();
        let sum = xs[0].add(&xs[1]);
        let v = evaluate(&MultiNormSpec::Lattice, &Tuple::new(s.clone(), xs).unwrap(), &c).unwrap().lower;
        let expected = s.norm_of(&sum.0);
        prop_assert!((v - expected).abs() <= 1e-8 * expected.max(1.0));
    }

    #[test]
    fn hermitian_decompositions_compare(seed in any::<u64>(), p in index()) {
        // two band decompositions of the same length: ‖Σ Q_i x_i‖ ≤ ‖Σ x_i‖ for x_i ∈ range(P_i)
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = space(p, 4, ScalarField::Real, true, &mut rng);
        let split = |rng: &mut ChaCha8Rng| {
            let mut c: Vec<usize> = (0..4).collect();
            c.shuffle(rng);
            let cut = rng.random_range(1..4);
            Decomposition::coordinate(4, &[c[..cut].to_vec(), c[cut..].to_vec()]).unwrap()
        };
        let (dp, dq) = (split(&mut rng), split(&mut rng));
        let xs: Vec<Vector> = random_tuple(&s, 2, &mut rng).vectors.iter().enumerate().map(|(i, x)| dp.project(i, x)).collect();
        let lhs = s.norm_of(&dq.synthesize(&xs).0);
        let rhs = s.norm_of(&xs[0].add(&xs[1]).0);
        prop_assert!(lhs <= rhs + 1e-8 * rhs.max(1.0));
    }

    #[test]
    fn spec_json_round_trips(q in prop_oneof![Just(1.0), Just(2.5), Just(4.0)], blocks in Just(vec![vec![0usize, 2], vec![1]])) {
        let specs = [
            MultiNormSpec::Pq { p: Index::ONE, q: Index::new(q).unwrap() },
            MultiNormSpec::StandardQ { q: Index::new(q).unwrap() },
            MultiNormSpec::Partition { blocks },
            MultiNormSpec::NumericalDual { base: Box::new(MultiNormSpec::Lattice) },
        ];
        for s in specs {
            let json = serde_json::to_string(&s).unwrap();
            prop_assert_eq!(serde_json::from_str::<MultiNormSpec>(&json).unwrap(), s);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn mb_levels_are_monotone_and_dominate_the_operator_norm(seed in any::<u64>(), p in index()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = space(p, 3, ScalarField::Real, false, &mut rng);
        let t = Matrix(random_matrix(3, 3, ScalarField::Real, &mut rng));
        let c = cfg().with_seed(seed);
        let r = mb_norm(&t, &s, &MultiNormSpec::Lattice, &s, &MultiNormSpec::DualLattice, 3, &c).unwrap();
        let op = operator_norm(&t, &s, &s, &c).unwrap();
        prop_assert!(r.p_seq.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(r.p_seq[0] >= op.lower - 1e-9 * op.lower.max(1.0));
        for v in &r.levels {
            prop_assert!(v.lower <= v.upper * (1.0 + 1e-12));
        }
    }

    #[test]
    fn rank_one_operators_have_mb_norm_of_their_norm(seed in any::<u64>(), p in index()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = space(p, 3, ScalarField::Real, false, &mut rng);
        let y: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let l: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let t = Matrix(DMatrix::from_fn(3, 3, |i, j| C64::new(y[i] * l[j], 0.0)));
        let c = cfg().with_seed(seed);
        let yv = Vector::real(&y);
        let ln = SpaceSpec { p: s.p.conjugate(), ..s.clone() }.norm_of(&Vector::real(&l).0);
        let expected = s.norm_of(&yv.0) * ln;
        let r = mb_norm(&t, &s, &MultiNormSpec::Lattice, &s, &MultiNormSpec::Partition { blocks: vec![vec![0, 2], vec![1]] }, 3, &c).unwrap();
        prop_assert!((r.sup_estimate.lower - expected).abs() <= 2e-2 * expected.max(1.0));
        let op = operator_norm(&t, &s, &s, &c).unwrap();
        prop_assert!(r.sup_estimate.upper <= op.upper * (1.0 + 1e-12));
    }

    #[test]
    fn partition_permutation_bound_is_attained(seed in any::<u64>(), p in prop_oneof![Just(1.0), Just(2.0)], m in 2usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sigma: Vec<usize> = (0..m).collect();
        sigma.shuffle(&mut rng);
        let owner: Vec<usize> = (0..m).map(|_| rng.random_range(0..m.min(3))).collect();
        let blocks: Vec<Vec<usize>> = (0..m.min(3))
            .map(|b| (0..m).filter(|k| owner[*k] == b).collect::<Vec<_>>())
            .filter(|b| !b.is_empty())
            .collect();
        let (_, bound) = partition_permutation_bound(&blocks, &sigma, Index::new(p).unwrap()).unwrap();
        let s = SpaceSpec::lp(p, m);
        let spec = MultiNormSpec::Partition { blocks };
        let r = mb_norm(&permutation_operator(&sigma), &s, &spec, &s, &spec, m, &cfg().with_seed(seed)).unwrap();
        prop_assert!((r.sup_estimate.lower - bound).abs() <= 2e-2 * bound, "{} vs {}", r.sup_estimate.lower, bound);
    }
}
