use num_complex::Complex64;
use rand::Rng;

use tensor_rek::harness::generate::duplicate_trailing_slices;
use tensor_rek::oracle::{
    bcirc_materialize, dense_pinv_apply, dense_rank, dense_svd, fold_matrix, null_space_basis,
    orthonormality_defect, real_embedding, tprod_dense, unfold_matrix, DenseMatrix,
};
use tensor_rek::rng::{randn, substream, Gaussian, StreamRng};
use tensor_rek::spectral::{self, svd_complex, CMatrix, RankTolerance};
use tensor_rek::{Dims3, SliceKind, Tensor3};

const SHAPES: u64 = 120;

fn dims(r: &mut StreamRng, max: usize) -> Dims3 {
    Dims3::new(
        r.random_range(1..=max),
        r.random_range(1..=max),
        r.random_range(1..=max),
    )
    .unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn sigma_above(s: &[f64], tol: RankTolerance) -> f64 {
    let cut = tol.cutoff(s[0]);
    s.iter()
        .copied()
        .filter(|&v| v > cut)
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn tprod_matches_bcirc_route() {
    for t in 0..SHAPES {
        let mut r = substream(100, t);
        let d = dims(&mut r, 8);
        let k = r.random_range(1..=8);
        let a = randn(d, &mut r);
        let b = randn(Dims3::new(d.n2, k, d.n3).unwrap(), &mut r);
        let fast = a.tprod(&b).unwrap();
        let dense = tprod_dense(&a, &b).unwrap();
        assert!(
            fast.distance(&dense).unwrap() <= 1e-12 * dense.frobenius_norm(),
            "shape {d}"
        );
    }
}

#[test]
fn tprod_hand_example_and_explicit_circulant() {
    let a = Tensor3::from_vec(Dims3::new(1, 1, 2).unwrap(), vec![1.0, 2.0]).unwrap();
    let b = Tensor3::from_vec(Dims3::new(1, 1, 2).unwrap(), vec![3.0, 4.0]).unwrap();
    assert_eq!(a.tprod(&b).unwrap().as_slice(), &[11.0, 10.0]);
    assert_eq!(tprod_dense(&a, &b).unwrap().as_slice(), &[11.0, 10.0]);
    let (x, y, z) = (1.5, -2.0, 0.25);
    let c = Tensor3::from_vec(Dims3::new(1, 1, 3).unwrap(), vec![x, y, z]).unwrap();
    let m = bcirc_materialize(&c);
    assert_eq!(m.as_slice(), &[x, z, y, y, x, z, z, y, x]);
}

#[test]
fn bcirc_of_transpose_is_transpose_of_bcirc() {
    for t in 0..SHAPES {
        let mut r = substream(101, t);
        let a = randn(dims(&mut r, 8), &mut r);
        assert_eq!(
            bcirc_materialize(&a.transpose()),
            bcirc_materialize(&a).transpose()
        );
    }
}

#[test]
fn single_slice_bcirc_is_the_slice() {
    let a = randn(Dims3::new(3, 4, 1).unwrap(), &mut substream(1, 0));
    let m = bcirc_materialize(&a);
    assert_eq!(m, unfold_matrix(&a));
}

#[test]
fn unfold_fold_round_trip() {
    for t in 0..20 {
        let mut r = substream(102, t);
        let a = randn(dims(&mut r, 6), &mut r);
        assert_eq!(fold_matrix(&unfold_matrix(&a), a.dims()).unwrap(), a);
    }
}

#[test]
fn adjoint_identity() {
    for t in 0..SHAPES {
        let mut r = substream(103, t);
        let d = dims(&mut r, 8);
        let k = r.random_range(1..=8);
        let a = randn(d, &mut r);
        let b = randn(Dims3::new(d.n2, k, d.n3).unwrap(), &mut r);
        let c = randn(Dims3::new(d.n1, k, d.n3).unwrap(), &mut r);
        let lhs = a.tprod(&b).unwrap().inner(&c).unwrap();
        let rhs = b.inner(&a.transpose().tprod(&c).unwrap()).unwrap();
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }
}

#[test]
fn spectral_norm_matches_dense() {
    for t in 0..SHAPES {
        let mut r = substream(104, t);
        let a = randn(dims(&mut r, 8), &mut r);
        let want = dense_svd(&bcirc_materialize(&a)).unwrap().singular_values[0];
        let got = spectral::spectral_norm(&a).unwrap();
        assert!(rel(got, want) < 1e-10, "{got} vs {want}");
        let gt = spectral::spectral_norm(&a.transpose()).unwrap();
        assert!(rel(gt, got) < 1e-10);
    }
}

#[test]
fn sigma_min_matches_dense() {
    let tol = RankTolerance::default();
    for t in 0..SHAPES {
        let mut r = substream(105, t);
        let a = randn(dims(&mut r, 8), &mut r);
        let want = sigma_above(
            &dense_svd(&bcirc_materialize(&a)).unwrap().singular_values,
            tol,
        );
        let got = spectral::sigma_min_nonzero(&a, tol).unwrap();
        assert!(rel(got, want) < 1e-8, "{got} vs {want}");
    }
}

#[test]
fn sigma_min_ignores_rank_deficiency() {
    let tol = RankTolerance::default();
    let mut a = randn(Dims3::new(6, 3, 4).unwrap(), &mut substream(9, 0));
    let s0 = a.horizontal_slice(0).unwrap();
    a.embed_slice(SliceKind::Horizontal, 1, &s0).unwrap();
    // 3 columns per block, so a tall 6x3 block stays full rank; use a wide one
    let mut w = randn(Dims3::new(3, 5, 4).unwrap(), &mut substream(9, 1));
    let w0 = w.horizontal_slice(0).unwrap();
    w.embed_slice(SliceKind::Horizontal, 2, &w0).unwrap();
    for x in [&a, &w] {
        let dense = dense_svd(&bcirc_materialize(x)).unwrap().singular_values;
        let want = sigma_above(&dense, tol);
        let got = spectral::sigma_min_nonzero(x, tol).unwrap();
        assert!(rel(got, want) < 1e-8, "{got} vs {want}");
    }
    let dense = dense_svd(&bcirc_materialize(&w)).unwrap().singular_values;
    assert!(
        dense.last().unwrap() < &1e-10,
        "wide tensor should be rank deficient"
    );
    assert_eq!(spectral::numerical_rank(&w, tol).unwrap(), 2 * 4);
    assert_eq!(dense_rank(&bcirc_materialize(&w), tol).unwrap(), 2 * 4);
}

fn dense_slice_lambda(a: &Tensor3, kind: SliceKind) -> f64 {
    let n = if kind == SliceKind::Horizontal {
        a.dims().n1
    } else {
        a.dims().n2
    };
    (0..n)
        .map(|i| {
            let s = a.slice(kind, i).unwrap();
            let top = dense_svd(&bcirc_materialize(&s)).unwrap().singular_values[0];
            top * top / s.frobenius_norm_sq()
        })
        .fold(0.0, f64::max)
}

#[test]
fn lambdas_match_dense() {
    for t in 0..SHAPES {
        let mut r = substream(106, t);
        let a = randn(dims(&mut r, 8), &mut r);
        let lr = spectral::lambda_row(&a).unwrap();
        let lc = spectral::lambda_col(&a).unwrap();
        assert!((lr - dense_slice_lambda(&a, SliceKind::Horizontal)).abs() < 1e-10);
        assert!((lc - dense_slice_lambda(&a, SliceKind::Lateral)).abs() < 1e-10);
        let n3 = a.dims().n3 as f64;
        for l in [lr, lc] {
            assert!(
                (1.0 - 1e-12..=n3 + 1e-12).contains(&l),
                "{l} outside [1, {n3}]"
            );
        }
        if a.dims().n3 == 1 {
            assert!((lr - 1.0).abs() < 1e-12 && (lc - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn pinv_matches_dense() {
    let tol = RankTolerance::default();
    for t in 0..SHAPES {
        let mut r = substream(107, t);
        let d = dims(&mut r, 8);
        let k = r.random_range(1..=8);
        let a = randn(d, &mut r);
        let b = randn(Dims3::new(d.n1, k, d.n3).unwrap(), &mut r);
        let got = spectral::pinv_apply(&a, &b, tol).unwrap();
        let m = dense_pinv_apply(&bcirc_materialize(&a), &unfold_matrix(&b), tol).unwrap();
        let want = fold_matrix(&m, got.dims()).unwrap();
        assert!(
            got.distance(&want).unwrap() <= 1e-8 * want.frobenius_norm(),
            "shape {d}"
        );
    }
}

#[test]
fn pinv_recovers_consistent_solution() {
    let a = randn(Dims3::new(8, 3, 4).unwrap(), &mut substream(3, 0));
    let x0 = randn(Dims3::new(3, 2, 4).unwrap(), &mut substream(3, 1));
    let b = a.tprod(&x0).unwrap();
    let x = spectral::pinv_apply(&a, &b, Default::default()).unwrap();
    assert!(x.distance(&x0).unwrap() < 1e-8 * x0.frobenius_norm());
}

#[test]
fn moore_penrose_residual() {
    let tol = RankTolerance::default();
    for t in 0..30 {
        let mut r = substream(108, t);
        let a = randn(dims(&mut r, 6), &mut r);
        let m = bcirc_materialize(&a);
        let mpm = m.matmul(&dense_pinv_apply(&m, &m, tol).unwrap()).unwrap();
        assert!(mpm.sub(&m).unwrap().frobenius_norm() < 1e-9 * m.frobenius_norm());
    }
    let id = DenseMatrix::identity(4);
    assert_eq!(dense_pinv_apply(&id, &id, tol).unwrap(), id);
}

#[test]
fn dense_svd_agrees_with_frequency_blocks() {
    let a = randn(Dims3::new(3, 2, 4).unwrap(), &mut substream(5, 5));
    let m = bcirc_materialize(&a);
    assert_eq!((m.rows(), m.cols()), (12, 8));
    let dense = dense_svd(&m).unwrap().singular_values;
    let mut blocks: Vec<f64> = spectral::to_frequency(&a)
        .singular_values()
        .unwrap()
        .into_iter()
        .flatten()
        .collect();
    blocks.sort_by(|x, y| y.total_cmp(x));
    assert_eq!(dense.len(), blocks.len());
    for (d, b) in dense.iter().zip(&blocks) {
        assert!((d - b).abs() < 1e-10 * dense[0]);
    }
}

#[test]
fn dense_svd_reconstructs() {
    for t in 0..20 {
        let mut r = substream(109, t);
        let (rows, cols) = (r.random_range(1..=9), r.random_range(1..=9));
        let mut g = Gaussian::new();
        let m = DenseMatrix::from_fn(rows, cols, |_, _| g.sample(&mut r));
        let svd = dense_svd(&m).unwrap();
        let us = DenseMatrix::from_fn(rows, svd.u.cols(), |i, j| {
            svd.u.get(i, j) * svd.singular_values[j]
        });
        let back = us.matmul(&svd.v.transpose()).unwrap();
        assert!(back.sub(&m).unwrap().frobenius_norm() < 1e-10 * svd.singular_values[0]);
    }
}

#[test]
fn complex_svd_matches_real_embedding() {
    for t in 0..30 {
        let mut r = substream(110, t);
        let mut g = Gaussian::new();
        let (rows, cols) = if t == 0 {
            (5, 3)
        } else {
            (r.random_range(1..=6), r.random_range(1..=6))
        };
        let m = CMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(g.sample(&mut r), g.sample(&mut r))
        });
        let s = svd_complex(&m, false).unwrap().singular_values;
        let e = dense_svd(&real_embedding(&m)).unwrap().singular_values;
        for (i, v) in s.iter().enumerate() {
            assert!((v - e[2 * i]).abs() < 1e-10 * s[0].max(1.0));
            assert!((v - e[2 * i + 1]).abs() < 1e-10 * s[0].max(1.0));
        }
    }
}

#[test]
fn submultiplicativity() {
    for t in 0..SHAPES {
        let mut r = substream(111, t);
        let d = dims(&mut r, 8);
        let a = randn(d, &mut r);
        let b = randn(
            Dims3::new(d.n2, r.random_range(1..=8), d.n3).unwrap(),
            &mut r,
        );
        let lhs = a.tprod(&b).unwrap().frobenius_norm();
        let rhs = spectral::spectral_norm(&a).unwrap() * b.frobenius_norm();
        assert!(lhs <= rhs * (1.0 + 1e-12));
    }
}

#[test]
fn range_lower_bound() {
    let tol = RankTolerance::default();
    for t in 0..50 {
        let mut r = substream(112, t);
        let d = dims(&mut r, 8);
        let a = randn(d, &mut r);
        let y = randn(
            Dims3::new(d.n2, r.random_range(1..=4), d.n3).unwrap(),
            &mut r,
        );
        let x = a.tprod(&y).unwrap();
        let s = spectral::sigma_min_nonzero(&a, tol).unwrap();
        let lhs = a.transpose().tprod(&x).unwrap().frobenius_norm_sq();
        assert!(lhs >= (1.0 - 1e-8) * s * s * x.frobenius_norm_sq());
    }
}

#[test]
fn null_space_of_full_rank_transpose_is_empty() {
    let a = randn(Dims3::new(4, 4, 2).unwrap(), &mut substream(6, 0));
    let m = bcirc_materialize(&a);
    assert_eq!(
        null_space_basis(&m.transpose(), Default::default())
            .unwrap()
            .cols(),
        0
    );
}

#[test]
fn duplicated_slices_give_kernel() {
    let (n1, n2, n3, k) = (12, 14, 3, 2);
    let mut a = randn(Dims3::new(n1, n2, n3).unwrap(), &mut substream(7, 0));
    duplicate_trailing_slices(&mut a).unwrap();
    let m = bcirc_materialize(&a);
    let z = null_space_basis(&m.transpose(), Default::default()).unwrap();
    assert!(z.cols() >= 5 * n3);
    assert!(orthonormality_defect(&z).unwrap() < 1e-12);
    assert!(m.transpose().matmul(&z).unwrap().frobenius_norm() < 1e-8 * m.frobenius_norm());

    let mut g = Gaussian::new();
    let mut r = substream(7, 1);
    let gm = DenseMatrix::from_fn(z.cols(), k, |_, _| g.sample(&mut r));
    let e = fold_matrix(&z.matmul(&gm).unwrap(), Dims3::new(n1, k, n3).unwrap()).unwrap();
    assert!(a.transpose().tprod(&e).unwrap().frobenius_norm() < 1e-8 * e.frobenius_norm());

    // the projected-Gaussian construction spans the same kernel: its
    // component outside span(Z) vanishes
    let proj = tensor_rek::harness::generate::range_orthogonal_noise(&a, k, &mut r).unwrap();
    let pm = unfold_matrix(&proj);
    let coeff = z.transpose().matmul(&pm).unwrap();
    let back = z.matmul(&coeff).unwrap();
    assert!(back.sub(&pm).unwrap().frobenius_norm() < 1e-8 * pm.frobenius_norm());
}
