mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use tensormor_core::formats::{alpha_rank, hosvd, tt_svd, CpTensor, TtTensor, TuckerTensor};
use tensormor_core::generators::{uniform_grid, TestFunction};
use tensormor_core::{DenseTensor, Error, Matrix};

fn random_dense(shape: &[usize], seed: u64) -> DenseTensor {
    let mut r = rng(seed);
    DenseTensor::from_fn(shape.to_vec(), |_| r.random_range(-1.0..1.0)).unwrap()
}

fn random_tt(shape: &[usize], ranks: &[usize], seed: u64) -> TtTensor {
    let mut full = vec![1];
    full.extend_from_slice(ranks);
    full.push(1);
    let cores = shape
        .iter()
        .enumerate()
        .map(|(k, &n)| random_dense(&[full[k], n, full[k + 1]], seed.wrapping_mul(31).wrapping_add(k as u64)))
        .collect();
    TtTensor::new(cores).unwrap()
}

fn rel_diff(a: &DenseTensor, b: &DenseTensor) -> f64 {
    a.sub(b).unwrap().norm() / a.norm().max(f64::MIN_POSITIVE)
}

/// α-rank through the eigenvalues of the Gram matrix of the unfolding.
fn oracle_alpha_rank(t: &DenseTensor, modes: &[usize], tol: f64) -> usize {
    let s = singular_values(&t.matricize(modes).unwrap().matrix);
    s.iter().filter(|&&x| x >= tol.max(1e-14) * s[0]).count()
}

#[test]
fn rank_one_function_has_unit_ranks() {
    let f = TestFunction::RankOneFn { d: 4 };
    let grids = vec![uniform_grid(7, -1.0, 1.0); 4];
    let t = f.on_grid(&grids).unwrap();
    let tt = tt_svd(&t, 1e-10, None).unwrap();
    assert_eq!(tt.ranks(), vec![1, 1, 1]);
    for modes in [vec![0], vec![1, 3], vec![0, 1, 2], vec![2]] {
        assert_eq!(alpha_rank(&t, &modes, 1e-10).unwrap(), 1);
    }
}

#[test]
fn additive_function_ranks_at_most_two() {
    let f = TestFunction::AdditiveFn { d: 5 };
    let grids = vec![uniform_grid(8, 0.0, 1.0); 5];
    let t = f.on_grid(&grids).unwrap();
    let tt = tt_svd(&t, 1e-10, None).unwrap();
    assert!(tt.ranks().iter().all(|&r| r <= 2), "{:?}", tt.ranks());
    for modes in [vec![0], vec![1, 3], vec![0, 2, 4], vec![4], vec![1, 2, 3, 4]] {
        assert!(alpha_rank(&t, &modes, 1e-10).unwrap() <= 2);
    }
    let cp = f.cp_on_grid(&grids).unwrap().unwrap();
    assert_eq!(cp.rank(), 5);
    assert!(rel_diff(&t, &cp.to_dense().unwrap()) <= 1e-12);
}

#[test]
fn single_variable_function_has_unit_complementary_rank() {
    let t = DenseTensor::from_fn(vec![5, 4, 6], |i| ((i[1] as f64) * 0.7).exp()).unwrap();
    assert_eq!(alpha_rank(&t, &[0, 2], 1e-12).unwrap(), 1);
    assert_eq!(alpha_rank(&t, &[0], 1e-12).unwrap(), 1);
}

#[test]
fn tt_rounding_meets_tolerance() {
    for seed in 0..100u64 {
        let mut r = rng(seed + 1000);
        let ranks: Vec<usize> = (0..3).map(|_| r.random_range(1..=5)).collect();
        let t = random_tt(&[6; 4], &ranks, seed);
        let dense = t.to_dense().unwrap();
        for tau in [1e-2, 1e-6, 1e-10] {
            let rounded = t.round(tau);
            let err = dense.sub(&rounded.to_dense().unwrap()).unwrap().norm();
            assert!(err <= tau * dense.norm() * (1.0 + 1e-12), "seed {seed}, τ {tau}: {err}");
            assert!(rounded.ranks().iter().zip(t.ranks()).all(|(a, b)| *a <= b));
        }
    }
}

#[test]
fn tt_svd_exact_and_minimal() {
    let t = random_dense(&[3, 3, 3], 7);
    let tt = tt_svd(&t, 0.0, None).unwrap();
    assert!(rel_diff(&t, &tt.to_dense().unwrap()) <= 1e-12);
    let low = random_tt(&[4, 5, 3, 4], &[2, 3, 2], 9).to_dense().unwrap();
    let tt = tt_svd(&low, 0.0, None).unwrap();
    for (k, &r) in tt.ranks().iter().enumerate() {
        let modes: Vec<usize> = (0..=k).collect();
        assert_eq!(r, alpha_rank(&low, &modes, 1e-12).unwrap());
    }
    assert_eq!(tt.ranks(), vec![2, 3, 2]);
}

#[test]
fn hosvd_ranks_match_alpha_ranks() {
    let core = random_dense(&[2, 3, 2], 4);
    let factors: Vec<Matrix> = [5, 6, 4]
        .iter()
        .zip([2, 3, 2])
        .enumerate()
        .map(|(k, (&n, r))| tensormor_core::linalg::qr(&random_matrix(n, r, 50 + k as u64)).q)
        .collect();
    let tk = TuckerTensor::new(core, factors).unwrap();
    let dense = tk.to_dense().unwrap();
    let h = hosvd(&dense, &[2, 3, 2]).unwrap();
    assert!(rel_diff(&dense, &h.to_dense().unwrap()) <= 1e-12);
    for mode in 0..3 {
        assert_eq!(alpha_rank(&dense, &[mode], 1e-12).unwrap(), h.ranks()[mode]);
    }
    assert!((h.norm() - dense.norm()).abs() <= 1e-12 * dense.norm());
}

#[test]
fn dense_cap_is_enforced() {
    let t = TtTensor::rank_one(&vec![vec![1.0; 100]; 4]).unwrap();
    assert!(matches!(t.to_dense_with_cap(1000), Err(Error::Capacity { requested: 100_000_000, cap: 1000 })));
}

#[test]
fn binary_round_trips() {
    let tt = random_tt(&[3, 4, 2], &[2, 2], 5);
    assert_eq!(TtTensor::from_bytes(&tt.to_bytes()).unwrap(), tt);
    let cp = CpTensor::new(vec![2.0, -1.0], vec![random_matrix(3, 2, 1), random_matrix(4, 2, 2)]).unwrap();
    assert_eq!(CpTensor::from_bytes(&cp.to_bytes()).unwrap(), cp);
    let tk = hosvd(&random_dense(&[3, 4, 2], 8), &[2, 2, 2]).unwrap();
    assert_eq!(TuckerTensor::from_bytes(&tk.to_bytes()).unwrap(), tk);
    assert!(TtTensor::from_bytes(&cp.to_bytes()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn alpha_rank_matches_gram_oracle(seed in any::<u64>(), r in 1usize..4) {
        let t = random_tt(&[3, 4, 3, 2], &[r, r, r.min(2)], seed).to_dense().unwrap();
        for modes in [vec![0], vec![0, 1], vec![1, 3], vec![2]] {
            prop_assert_eq!(alpha_rank(&t, &modes, 1e-6).unwrap(), oracle_alpha_rank(&t, &modes, 1e-6));
        }
    }

    #[test]
    fn tt_arithmetic_commutes_with_dense(seed in any::<u64>(), c in -3.0f64..3.0) {
        let a = random_tt(&[3, 2, 4], &[2, 3], seed);
        let b = random_tt(&[3, 2, 4], &[1, 2], seed ^ 0xABCD);
        let (da, db) = (a.to_dense().unwrap(), b.to_dense().unwrap());
        let sum = a.add(&b.scaled(c)).unwrap().to_dense().unwrap();
        let expect = DenseTensor::new(
            da.shape().to_vec(),
            da.data().iter().zip(db.data()).map(|(x, y)| x + c * y).collect(),
        ).unwrap();
        prop_assert!(rel_diff(&expect, &sum) <= 1e-10);
        prop_assert!((a.dot(&b).unwrap() - da.dot(&db).unwrap()).abs() <= 1e-10 * da.norm() * db.norm());
        prop_assert!((a.norm() - da.norm()).abs() <= 1e-10 * da.norm());
        prop_assert!(rel_diff(&da, &a.right_orthogonalized().to_dense().unwrap()) <= 1e-10);
    }

    #[test]
    fn cp_and_tucker_consistent_with_dense(seed in any::<u64>()) {
        let cp = CpTensor::new(vec![1.5, -0.5, 2.0], vec![random_matrix(3, 3, seed), random_matrix(2, 3, seed + 1), random_matrix(4, 3, seed + 2)]).unwrap();
        let dense = cp.to_dense().unwrap();
        let idx = [2, 1, 3];
        prop_assert!((cp.eval(&idx).unwrap() - dense.get(&idx).unwrap()).abs() < 1e-12);
        let normalized = cp.clone().normalized().to_dense().unwrap();
        prop_assert!(rel_diff(&dense, &normalized) <= 1e-12);
        prop_assert!((cp.dot(&cp).unwrap() - dense.dot(&dense).unwrap()).abs() <= 1e-10 * dense.dot(&dense).unwrap());
        let h = hosvd(&dense, &[3, 2, 3]).unwrap();
        prop_assert!(rel_diff(&dense, &h.to_dense().unwrap()) <= 1e-10);
    }
}
