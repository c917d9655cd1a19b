mod common;

use common::*;
use rand::Rng;
use tensormor_core::formats::{CpTensor, TtTensor};
use tensormor_core::generators::{diffusion_affine, uniform_grid};
use tensormor_core::linalg::svd;
use tensormor_core::rom::{AffineModel, AffineOperator, AffineVector, CoefficientFunction, ParameterDomain};
use tensormor_core::solver::{
    assemble_from_affine, estimate_spectrum, greedy_rank_one, truncated_richardson, KroneckerOperator, ModeMatrix,
    PgdOptions, RichardsonOptions, SolveTrace, StepSize,
};
use tensormor_core::{DenseTensor, Error, Matrix};

fn stencil(n: usize) -> Matrix {
    let h = 1.0 / (n + 1) as f64;
    Matrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => 2.0 / (h * h),
        1 => -1.0 / (h * h),
        _ => 0.0,
    })
}

fn random_tt(shape: &[usize], rank: usize, seed: u64) -> TtTensor {
    let mut r = rng(seed);
    let d = shape.len();
    let cores = (0..d)
        .map(|k| {
            let rl = if k == 0 { 1 } else { rank };
            let rr = if k == d - 1 { 1 } else { rank };
            DenseTensor::from_fn(vec![rl, shape[k], rr], |_| r.random_range(-1.0..1.0)).unwrap()
        })
        .collect();
    TtTensor::new(cores).unwrap()
}

fn dense_solution(a: &KroneckerOperator, b: &TtTensor) -> Vec<f64> {
    gauss_solve(&a.to_matrix().unwrap(), b.to_dense().unwrap().data())
}

#[test]
fn operator_apply_matches_assembled_matrix() {
    let a = KroneckerOperator::new(vec![
        vec![ModeMatrix::Dense(random_matrix(3, 3, 1)), ModeMatrix::Identity(4), ModeMatrix::Diagonal(vec![1.0, 2.0])],
        vec![
            ModeMatrix::Diagonal(vec![0.5, 1.0, -1.0]),
            ModeMatrix::Dense(random_matrix(4, 4, 2)),
            ModeMatrix::Identity(2),
        ],
    ])
    .unwrap();
    let x = random_tt(&[3, 4, 2], 2, 3);
    let y = random_tt(&[3, 4, 2], 2, 4);
    let dense_x = x.to_dense().unwrap();
    let expect = a.to_matrix().unwrap().matvec(dense_x.data());
    let got = a.apply(&x).unwrap().to_dense().unwrap();
    assert!(diff_norm(got.data(), &expect) <= 1e-12 * norm(&expect));
    assert!(diff_norm(a.apply_dense(&dense_x).unwrap().data(), &expect) <= 1e-12 * norm(&expect));
    // linearity
    let lhs = a.apply(&x.add(&y).unwrap()).unwrap().to_dense().unwrap();
    let rhs = a.apply(&x).unwrap().add(&a.apply(&y).unwrap()).unwrap().to_dense().unwrap();
    assert!(lhs.sub(&rhs).unwrap().norm() <= 1e-10 * lhs.norm());
}

#[test]
fn affine_model_assembles_to_kronecker_form() {
    let model = diffusion_affine(12, 2).unwrap();
    let grids = vec![uniform_grid(5, 0.1, 1.0), uniform_grid(4, 0.1, 1.0)];
    let (a, b) = assemble_from_affine(&model, &grids).unwrap();
    assert_eq!(a.shape(), vec![12, 5, 4]);
    let bd = b.to_dense().unwrap();
    let mut r = rng(8);
    for _ in 0..10 {
        let (k1, k2) = (r.random_range(0..5), r.random_range(0..4));
        let xi = [grids[0][k1], grids[1][k2]];
        let (am, bm) = model.assemble(&xi).unwrap();
        let block = a.parametric_block(&[k1, k2]).unwrap();
        let mut d = block;
        d.add_scaled(-1.0, &am);
        assert!(d.frobenius_norm() <= 1e-12 * am.frobenius_norm());
        for (i, bi) in bm.iter().enumerate() {
            assert!((bd.get(&[i, k1, k2]).unwrap() - bi).abs() <= 1e-14);
        }
    }
}

#[test]
fn non_separable_coefficient_is_rejected() {
    let op = AffineOperator::new(
        vec![Matrix::identity(3), Matrix::identity(3)],
        vec![
            CoefficientFunction::constant(1.0),
            CoefficientFunction::Tabulated { points: vec![vec![0.0, 0.0], vec![1.0, 1.0]], values: vec![1.0, 2.0] },
        ],
    )
    .unwrap();
    let rhs = AffineVector::new(vec![vec![1.0; 3]], vec![CoefficientFunction::constant(1.0)]).unwrap();
    let domain = ParameterDomain::uniform_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    let model = AffineModel::new(op, rhs, domain, None).unwrap();
    let grids = vec![vec![0.0, 1.0], vec![0.5]];
    assert!(matches!(assemble_from_affine(&model, &grids), Err(Error::UnsupportedCoefficient { term: 1, .. })));
}

#[test]
fn richardson_solves_laplacian() {
    let n = 16;
    let a = KroneckerOperator::laplacian_like(&stencil(n), 2).unwrap();
    let b = TtTensor::rank_one(&[vec![1.0; n], vec![1.0; n]]).unwrap();
    let opts = RichardsonOptions { epsilon: 1e-8, target_residual: 1e-7, ..Default::default() };
    let out = truncated_richardson(&a, &b, &opts).unwrap();
    let last = out.trace.records.last().unwrap();
    assert!(last.residual <= 1e-6 * b.norm(), "relative residual {}", last.residual / b.norm());
    let u = dense_solution(&a, &b);
    let got = out.solution.to_dense().unwrap();
    assert!(diff_norm(got.data(), &u) <= 1e-5 * norm(&u));
    // final record uses the exact residual
    let exact = a.to_matrix().unwrap().matvec(got.data());
    let exact_res = diff_norm(&exact, b.to_dense().unwrap().data());
    assert!((exact_res - last.residual).abs() <= 1e-8 * exact_res.max(1e-300));
}

#[test]
fn richardson_plateau_improves_with_tolerance() {
    let n = 16;
    let a = KroneckerOperator::laplacian_like(&stencil(n), 2).unwrap();
    let b = TtTensor::rank_one(&[vec![1.0; n], (0..n).map(|i| (i as f64).sin() + 1.5).collect()]).unwrap();
    let run = |eps: f64| {
        let opts = RichardsonOptions { epsilon: eps, target_residual: 1e-14, max_iter: 3000, ..Default::default() };
        truncated_richardson(&a, &b, &opts).unwrap().plateau
    };
    let (coarse, fine) = (run(1e-2), run(1e-3));
    assert!(coarse.is_finite() && fine.is_finite());
    assert!(fine * 2.0 <= coarse, "plateau {coarse} → {fine}");
}

#[test]
fn richardson_reports_divergence() {
    let a = KroneckerOperator::laplacian_like(&stencil(8), 2).unwrap();
    let b = TtTensor::rank_one(&[vec![1.0; 8], vec![1.0; 8]]).unwrap();
    let spec = estimate_spectrum(&a).unwrap();
    let opts = RichardsonOptions { step: StepSize::Fixed(3.0 / spec.lambda_max), ..Default::default() };
    match truncated_richardson(&a, &b, &opts) {
        Err(Error::Divergence { trace, .. }) => assert!(trace.records.len() > 10),
        other => panic!("expected divergence, got {:?}", other.map(|o| o.stop)),
    }
}

#[test]
fn spectrum_estimates_bracket_eigenvalues() {
    let a = KroneckerOperator::laplacian_like(&stencil(6), 2).unwrap();
    let (eig, _) = sym_eig(&rows(&a.to_matrix().unwrap()));
    let s = estimate_spectrum(&a).unwrap();
    let (top, bottom) = (eig[0], eig[eig.len() - 1]);
    assert!(s.lambda_max <= top * (1.0 + 1e-12) && s.lambda_max_bound >= top * (1.0 - 1e-12));
    assert!(s.lambda_min >= bottom * (1.0 - 1e-12) && s.lambda_min <= bottom * 1.01);
}

#[test]
fn pgd_identity_rank_one_rhs() {
    let a =
        KroneckerOperator::new(vec![vec![ModeMatrix::Identity(5), ModeMatrix::Identity(4), ModeMatrix::Identity(3)]])
            .unwrap();
    let b =
        TtTensor::rank_one(&[vec![1.0, -2.0, 0.5, 3.0, 1.0], vec![0.3, 0.1, -1.0, 2.0], vec![1.0, 1.0, -1.0]]).unwrap();
    let out = greedy_rank_one(&a, &b, &PgdOptions { max_rank: 1, ..Default::default() }).unwrap();
    let j = out.trace.records.last().unwrap().functional;
    assert!(j <= 1e-12 * b.norm().powi(2), "J = {j}");
}

#[test]
fn pgd_identity_reproduces_svd_truncation() {
    let (p, q) = (12, 10);
    let m = random_matrix(p, q, 17);
    let f = svd(&m);
    let a = KroneckerOperator::new(vec![vec![ModeMatrix::Identity(p), ModeMatrix::Identity(q)]]).unwrap();
    let b = tensormor_core::formats::tt_svd(&DenseTensor::from_matrix(&m).unwrap(), 0.0, None).unwrap();
    let out = greedy_rank_one(&a, &b, &PgdOptions { max_rank: 6, inner_sweeps: 200, tol: 1e-14, ..Default::default() })
        .unwrap();
    let res = out.trace.residuals();
    for (k, &got) in res.iter().enumerate().skip(1) {
        let tail = f.tail_norm(k);
        assert!((got - tail).abs() <= 0.05 * tail, "rank {k}: {got} vs {tail}");
    }
    assert_monotone(&out.trace);
}

fn assert_monotone(trace: &SolveTrace) {
    let j = trace.functionals();
    assert!(j.windows(2).all(|w| w[1] <= w[0]), "{j:?}");
}

#[test]
fn pgd_on_diffusion_system_improves() {
    let model = diffusion_affine(10, 2).unwrap();
    let grids = vec![uniform_grid(4, 0.1, 1.0), uniform_grid(3, 0.1, 1.0)];
    let (a, b) = assemble_from_affine(&model, &grids).unwrap();
    let u = dense_solution(&a, &b);
    let out = greedy_rank_one(&a, &b, &PgdOptions { max_rank: 4, ..Default::default() }).unwrap();
    assert_monotone(&out.trace);
    let errors: Vec<f64> = (1..=out.solution.rank())
        .map(|r| {
            let terms: Vec<(f64, Vec<Vec<f64>>)> = (0..r).map(|i| out.solution.term(i)).collect();
            let partial = CpTensor::from_terms(&terms).unwrap().to_dense().unwrap();
            diff_norm(partial.data(), &u)
        })
        .collect();
    assert!(errors.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-8)), "{errors:?}");
    assert!(errors[errors.len() - 1] <= 0.1 * norm(&u));
}

#[test]
fn trace_csv_round_trip() {
    let a = KroneckerOperator::laplacian_like(&stencil(4), 2).unwrap();
    let b = TtTensor::rank_one(&[vec![1.0; 4], vec![1.0; 4]]).unwrap();
    let out = truncated_richardson(&a, &b, &RichardsonOptions { max_iter: 20, ..Default::default() }).unwrap();
    let mut buf = Vec::new();
    out.trace.write_csv(&mut buf, false).unwrap();
    assert!(String::from_utf8(buf.clone()).unwrap().starts_with("k,ranks,resid,J,seconds\n"));
    let back = SolveTrace::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back.residuals(), out.trace.residuals());
}
