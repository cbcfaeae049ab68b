use tensor_rek::harness::generate::sparse_ground_truth;
use tensor_rek::harness::tensor_file::{decode, encode};
use tensor_rek::harness::{
    gen_least_squares, gen_sparse_recovery, generate_trial, read_tensor, run_experiment,
    trace_grid, write_tensor, ExperimentKind, ExperimentSpec, TraceCsv,
};
use tensor_rek::rng::{randn, substream};
use tensor_rek::{Algorithm, Dims3, Error};

fn small_lsq() -> ExperimentSpec {
    ExperimentSpec {
        n1: 16,
        n2: 5,
        n3: 3,
        k: 2,
        trials: 2,
        max_iters: 300,
        log_every: 50,
        ..ExperimentSpec::least_squares()
    }
}

fn small_sparse() -> ExperimentSpec {
    ExperimentSpec {
        n1: 20,
        n2: 30,
        n3: 3,
        k: 2,
        trials: 2,
        max_iters: 500,
        log_every: 100,
        ..ExperimentSpec::sparse_recovery()
    }
}

#[test]
fn noiseless_least_squares_is_consistent() {
    let spec = ExperimentSpec {
        noise_scale: 0.0,
        ..small_lsq()
    };
    let inst = gen_least_squares(&spec, &mut substream(60, 0)).unwrap();
    let ax = inst.a.tprod(&inst.reference).unwrap();
    assert!(ax.distance(&inst.b).unwrap() < 1e-10 * inst.b.frobenius_norm());
    assert_eq!(inst.noise.frobenius_norm(), 0.0);
}

#[test]
fn reference_solves_the_normal_equations() {
    for seed in 0..5 {
        let inst = gen_least_squares(&small_lsq(), &mut substream(61, seed)).unwrap();
        let at = inst.a.transpose();
        let resid = inst.a.tprod(&inst.reference).unwrap().sub(&inst.b).unwrap();
        let normal = at.tprod(&resid).unwrap();
        assert!(normal.frobenius_norm() < 1e-8 * inst.b.frobenius_norm());
        // the noise keeps the system inconsistent
        assert!(resid.frobenius_norm() > 1e-3 * inst.b.frobenius_norm());
    }
}

#[test]
fn sparse_noise_is_orthogonal_to_the_range() {
    for seed in 0..3 {
        let inst = gen_sparse_recovery(&small_sparse(), &mut substream(62, seed)).unwrap();
        let at_e = inst.a.transpose().tprod(&inst.noise).unwrap();
        assert!(at_e.frobenius_norm() < 1e-8 * inst.noise.frobenius_norm());
        assert!(inst.noise.frobenius_norm() > 0.0);
        let n1 = inst.a.dims().n1;
        for off in 0..5 {
            assert_eq!(
                inst.a.horizontal_slice(n1 - 10 + off).unwrap(),
                inst.a.horizontal_slice(n1 - 5 + off).unwrap()
            );
        }
    }
}

#[test]
fn sparse_ground_truth_density() {
    let d = Dims3::new(200, 20, 10).unwrap();
    let mut nnz = 0usize;
    let draws = 5;
    for s in 0..draws {
        let x = sparse_ground_truth(d, &mut substream(63, s));
        nnz += x.as_slice().iter().filter(|&&v| v != 0.0).count();
        assert!(x.as_slice().iter().all(|&v| v == 0.0 || v >= 2.33));
    }
    let density = nnz as f64 / (draws as usize * d.len()) as f64;
    assert!((density - 0.0099).abs() < 0.003, "{density}");
}

#[test]
fn trials_are_reproducible() {
    let spec = small_sparse();
    assert_eq!(
        generate_trial(&spec, 1).unwrap(),
        generate_trial(&spec, 1).unwrap()
    );
    assert_ne!(
        generate_trial(&spec, 0).unwrap().a,
        generate_trial(&spec, 1).unwrap().a
    );
}

#[test]
fn experiment_csv_is_byte_identical() {
    for spec in [
        ExperimentSpec {
            trials: 1,
            algorithms: vec![
                Algorithm::Trk,
                Algorithm::Rrk,
                Algorithm::Trek,
                Algorithm::Rrek,
            ],
            ..small_lsq()
        },
        small_sparse(),
    ] {
        let first = run_experiment(&spec, None).unwrap().csv.render();
        let second = run_experiment(&spec, None).unwrap().csv.render();
        assert_eq!(first, second);
        let parsed = TraceCsv::parse(&first).unwrap();
        assert_eq!(parsed.iters, trace_grid(spec.max_iters, spec.log_every));
        assert_eq!(parsed.render(), first);
        let header = first.lines().next().unwrap();
        for alg in &spec.algorithms {
            assert!(header.contains(&format!("{alg}_mean_relerr")), "{header}");
        }
    }
}

#[test]
fn experiment_dumps_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec {
        trials: 1,
        ..small_lsq()
    };
    let out = run_experiment(&spec, Some(dir.path())).unwrap();
    let inst = generate_trial(&spec, 0).unwrap();
    assert_eq!(
        read_tensor(dir.path().join("trial0_A.tt3")).unwrap(),
        inst.a
    );
    assert_eq!(
        read_tensor(dir.path().join("trial0_B.tt3")).unwrap(),
        inst.b
    );
    assert_eq!(
        read_tensor(dir.path().join("trial0_reference.tt3")).unwrap(),
        inst.reference
    );
    let x = read_tensor(dir.path().join("trial0_trek_x.tt3")).unwrap();
    let want = out
        .outcomes_for(Algorithm::Trek)
        .next()
        .unwrap()
        .final_relerr;
    let got = x.distance(&inst.reference).unwrap() / inst.reference.frobenius_norm();
    assert!((got - want).abs() <= 1e-15 * want.max(1.0));
}

#[test]
fn tensor_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let t = randn(Dims3::new(3, 5, 2).unwrap(), &mut substream(64, 0));
    let path = dir.path().join("t.tt3");
    write_tensor(&path, &t).unwrap();
    assert_eq!(read_tensor(&path).unwrap(), t);

    let mut bytes = encode(&t).unwrap();
    assert_eq!(decode(&bytes).unwrap(), t);
    bytes.pop();
    assert!(matches!(decode(&bytes), Err(Error::Format(_))));
    let mut bad = encode(&t).unwrap();
    bad[0] = b'X';
    assert!(matches!(decode(&bad), Err(Error::Format(_))));
    assert!(matches!(
        read_tensor(dir.path().join("missing.tt3")),
        Err(Error::Io(_))
    ));
}

#[test]
fn invalid_specs_are_rejected() {
    let bad = [
        ExperimentSpec {
            n1: 0,
            ..small_lsq()
        },
        ExperimentSpec {
            trials: 0,
            ..small_lsq()
        },
        ExperimentSpec {
            step_factor: 2.0,
            ..small_lsq()
        },
        ExperimentSpec {
            n1: 8,
            ..small_sparse()
        },
        ExperimentSpec {
            algorithms: vec![Algorithm::RrekSparse],
            kind: ExperimentKind::LeastSquares,
            ..small_lsq()
        },
    ];
    for spec in bad {
        assert!(
            spec.validate().is_err() || run_experiment(&spec, None).is_err(),
            "{spec:?}"
        );
    }
}
