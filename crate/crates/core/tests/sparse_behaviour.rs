mod common;

use approx::assert_abs_diff_eq;
use sdib::{
    adjusted_rand_index, default_bandwidths, generate, per_feature_mi_vector, run_sparse_dib,
    run_sparse_dib_with, tune_sparsity, warm_start_weights, Balance, DibConfig, MixtureSpec, Shape,
    SparseDibConfig, WeightInit,
};

fn spec(p: usize, q: f64, sep: f64, seed: u64) -> MixtureSpec {
    MixtureSpec {
        n: 200,
        p,
        q_ratio: q,
        k: 3,
        balance: Balance::Balanced,
        shape: Shape::Spherical,
        separation: sep,
        seed,
        shuffle_columns: false,
    }
}

fn cfg(u: f64, init: WeightInit) -> SparseDibConfig {
    SparseDibConfig {
        u,
        init,
        dib: DibConfig {
            k: 3,
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn infinite_eps_stops_after_one_outer_iteration() {
    let ds = generate::<f64>(&spec(20, 0.25, 5.0, 1)).unwrap();
    let c = SparseDibConfig {
        eps: f64::INFINITY,
        ..cfg(2.0, WeightInit::Uniform)
    };
    let res = run_sparse_dib(&ds.data.standardized().unwrap(), &c).unwrap();
    assert_eq!(res.outer_iterations, 1);
    assert!(res.converged);
    assert_eq!(res.weight_change_trace.len(), 1);
}

#[test]
fn warm_start_with_one_cluster_is_degenerate() {
    let ds = generate::<f64>(&spec(10, 0.3, 5.0, 2)).unwrap();
    let x = ds.data.standardized().unwrap();
    let b = default_bandwidths(&x).unwrap();
    let mut c = cfg(2.0, WeightInit::WarmStart);
    c.dib.k = 1;
    assert_eq!(
        warm_start_weights(&x, &b, &c).unwrap_err(),
        sdib::Error::DegenerateMi
    );
}

#[test]
fn noise_features_carry_little_information() {
    let ds = generate::<f64>(&spec(30, 0.2, 8.0, 3)).unwrap();
    let x = ds.data.standardized().unwrap();
    let b = default_bandwidths(&x).unwrap();
    let mi = per_feature_mi_vector(&x, &b, &ds.labels, 1e-12).unwrap();
    for (m, &v) in mi.iter().enumerate() {
        if ds.informative.contains(&m) {
            assert!(v > 0.1, "informative feature {m}: {v}");
        } else {
            assert!(v < 0.05, "noise feature {m}: {v}");
        }
    }
}

#[test]
fn easy_instance_recovers_clusters_and_features() {
    let ds = generate::<f64>(&spec(50, 0.1, 10.0, 4)).unwrap();
    let x = ds.data.standardized().unwrap();
    let res = run_sparse_dib(&x, &cfg(2.0, WeightInit::WarmStart)).unwrap();
    assert!(res.converged);
    let ari = adjusted_rand_index(ds.labels.labels(), res.partition.labels()).unwrap();
    assert!(ari > 0.99, "ari {ari}");
    let support = res.weights.support();
    for m in &ds.informative {
        assert!(support.contains(m));
    }
    assert!(res.weights.is_feasible(2.0));
}

#[test]
fn feature_permutation_permutes_weights() {
    let ds = generate::<f64>(&spec(12, 0.25, 8.0, 5)).unwrap();
    let x = ds.data.standardized().unwrap();
    let b = default_bandwidths(&x).unwrap();
    let order: Vec<usize> = (0..12).rev().collect();
    let xp = x.select_features(&order).unwrap();
    let bp = b.select(&order);
    let c = cfg(1.5, WeightInit::Uniform);
    let a = run_sparse_dib_with(&x, &b, &c, None).unwrap();
    let r = run_sparse_dib_with(&xp, &bp, &c, None).unwrap();
    assert_eq!(a.partition.canonical(), r.partition.canonical());
    for (c_new, &c_old) in order.iter().enumerate() {
        assert_abs_diff_eq!(r.weights[c_new], a.weights[c_old], epsilon = 1e-8);
    }
}

#[test]
fn rerun_is_bit_identical() {
    let ds = generate::<f64>(&spec(20, 0.2, 6.0, 6)).unwrap();
    let x = ds.data.standardized().unwrap();
    let c = cfg(2.0, WeightInit::WarmStart);
    let a = run_sparse_dib(&x, &c).unwrap();
    let b = run_sparse_dib(&x, &c).unwrap();
    assert_eq!(a, b);
}

#[test]
fn tuning_sweep_shapes() {
    let ds = generate::<f64>(&spec(20, 0.25, 10.0, 7)).unwrap();
    let x = ds.data.standardized().unwrap();
    let b = default_bandwidths(&x).unwrap();
    let grid: Vec<f64> = (1..=12).map(|i| i as f64 * 0.25).collect();
    let traj = tune_sparsity(&x, &b, &cfg(1.0, WeightInit::WarmStart), &grid).unwrap();
    assert_eq!(traj.points.len(), grid.len());
    for pt in &traj.points {
        assert!(pt.weights.is_feasible(pt.u));
        assert!((0.0..=1.0 + 1e-12).contains(&pt.normalized_entropy));
    }
    let plateau = traj.plateau.expect("easy instance has a plateau");
    assert_eq!(plateau.support, ds.informative);

    let single = tune_sparsity(&x, &b, &cfg(1.0, WeightInit::WarmStart), &[2.0]).unwrap();
    assert!(single.plateau.is_none());
    assert!(tune_sparsity(&x, &b, &cfg(1.0, WeightInit::Uniform), &[2.0, 1.0]).is_err());
}
