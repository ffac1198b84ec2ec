mod common;

use cmnlab::discord::{
    measure_state, measurement_transfer, n_angles, unitary_from_angles, MeasurementFamily,
};
use cmnlab::linalg::{pauli_x, pauli_y, pauli_z, singular_values};
use cmnlab::zoo;
use cmnlab::{
    bipartite_discord_cmn, global_discord_cmn, Bipartition, CMatrix, CmnParams, DensityMatrix,
    OptimizerCfg, SchattenP, Side,
};
use common::{c, correlation_matrix_brute, elementary_symmetric_brute, kron_brute};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p1(h: usize) -> CmnParams {
    CmnParams::new(h, SchattenP::One).unwrap()
}

fn s2_brute(rho: &DensityMatrix, side_a: &[usize], side_b: &[usize]) -> f64 {
    elementary_symmetric_brute(
        2,
        &singular_values(&correlation_matrix_brute(rho, side_a, side_b)),
    )
}

/// Projector onto the Bloch direction `(theta, phi)` and its complement.
fn qubit_pair(theta: f64, phi: f64) -> [CMatrix; 2] {
    let n = pauli_x() * c(theta.sin() * phi.cos())
        + pauli_y() * c(theta.sin() * phi.sin())
        + pauli_z() * c(theta.cos());
    let id = CMatrix::identity(2, 2);
    [(&id + &n) * c(0.5), (&id - &n) * c(0.5)]
}

#[test]
fn ghz_global_discord_matches_grid_search() {
    let ghz = zoo::ghz(3, 2).unwrap().projector();
    let unmeasured = s2_brute(&ghz, &[0], &[1, 2]);
    assert!((unmeasured - 1.5).abs() < 1e-12);

    let angles: Vec<(f64, f64)> = (0..5)
        .flat_map(|i| {
            (0..4).map(move |j| (i as f64 * 45f64.to_radians(), j as f64 * 90f64.to_radians()))
        })
        .collect();
    let mut grid_max: f64 = 0.0;
    for &a in &angles {
        for &b in &angles {
            for &g in &angles {
                let (pa, pb, pc) = (
                    qubit_pair(a.0, a.1),
                    qubit_pair(b.0, b.1),
                    qubit_pair(g.0, g.1),
                );
                let mut out = CMatrix::zeros(8, 8);
                for x in &pa {
                    for y in &pb {
                        for z in &pc {
                            let p = kron_brute(&kron_brute(x, y), z);
                            out += &p * ghz.data() * &p;
                        }
                    }
                }
                let measured = DensityMatrix::new(vec![2, 2, 2], out).unwrap();
                grid_max = grid_max.max(s2_brute(&measured, &[0], &[1, 2]));
            }
        }
    }
    assert!((grid_max - 0.25).abs() < 1e-12, "{grid_max}");

    let cfg = OptimizerCfg::default();
    let r = global_discord_cmn(&ghz, &Bipartition::new(3, &[0]).unwrap(), &p1(2), &cfg).unwrap();
    assert!(r.best_measured >= grid_max - 1e-6);
    assert!((r.value - (unmeasured - grid_max)).abs() < 1e-4);
    assert!(r.converged);
}

#[test]
fn bell_discord_reference() {
    let bell = zoo::bell(1).unwrap().projector();
    let part = Bipartition::new(2, &[0]).unwrap();
    let r = bipartite_discord_cmn(&bell, &part, Side::A, &p1(2), &OptimizerCfg::default()).unwrap();
    assert!((r.unmeasured - 1.5).abs() < 1e-12);
    assert!((r.value - 1.25).abs() < 1e-6);
}

#[test]
fn classical_and_product_states_have_no_discord() {
    let cfg = OptimizerCfg {
        restarts: 8,
        ..OptimizerCfg::default()
    };
    let part = Bipartition::new(2, &[0]).unwrap();
    let states = [
        zoo::classical_cc(),
        DensityMatrix::maximally_mixed(vec![2, 2]).unwrap(),
        zoo::random_fully_separable(&[2, 2], 1, 3).unwrap(),
        zoo::random_fully_separable(&[2, 3], 1, 4).unwrap(),
    ];
    for rho in &states {
        for side in [Side::A, Side::B] {
            let r = bipartite_discord_cmn(rho, &part, side, &p1(2), &cfg).unwrap();
            assert!(r.value.abs() <= 1e-6, "{side}: {}", r.value);
        }
    }
    let classical = zoo::random_classical(&[2, 2, 2], 8).unwrap();
    let r = global_discord_cmn(
        &classical,
        &Bipartition::new(3, &[1]).unwrap(),
        &p1(2),
        &cfg,
    )
    .unwrap();
    assert!(r.value.abs() <= 1e-6);
}

#[test]
fn transfer_maps_are_contractions_fixing_the_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for dims in [vec![2, 2], vec![2, 3], vec![2, 2, 2]] {
        let n = dims.len();
        for _ in 0..10 {
            let m: usize = dims.iter().map(|&d| n_angles(d)).sum();
            let params: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * 6.0).collect();
            let all: Vec<usize> = (0..n).collect();
            let family = MeasurementFamily::from_angles(&dims, &all, &params).unwrap();
            for part in Bipartition::all(n) {
                let (l, r) = measurement_transfer(&dims, &family, &part).unwrap();
                for m in [l, r] {
                    let s = singular_values(&m);
                    assert!((s[0] - 1.0).abs() <= 1e-9);
                    assert!((m[(0, 0)] - 1.0).abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn discord_is_symmetric_under_relabeling() {
    let swap = CMatrix::from_fn(4, 4, |r, col| {
        c(if r == (col % 2) * 2 + col / 2 {
            1.0
        } else {
            0.0
        })
    });
    let part = Bipartition::new(2, &[0]).unwrap();
    let cfg = OptimizerCfg::default();
    for seed in 0..3 {
        let rho = zoo::random_density(&[2, 2], 2, 60 + seed).unwrap();
        let swapped = DensityMatrix::new(vec![2, 2], &swap * rho.data() * &swap).unwrap();
        let a = bipartite_discord_cmn(&rho, &part, Side::A, &p1(2), &cfg).unwrap();
        let b = bipartite_discord_cmn(&swapped, &part, Side::B, &p1(2), &cfg).unwrap();
        assert!(
            (a.value - b.value).abs() <= 2.0 * cfg.opt_tol,
            "{} vs {}",
            a.value,
            b.value
        );
        assert!(a.value >= -1e-9);
    }
}

#[test]
fn diagonal_states_survive_computational_measurement() {
    let weights = [0.3, 0.05, 0.1, 0.2, 0.15, 0.2];
    let diag = CMatrix::from_fn(6, 6, |r, col| c(if r == col { weights[r] } else { 0.0 }));
    let rho = DensityMatrix::new(vec![2, 3], diag).unwrap();
    let family = MeasurementFamily::computational(&[2, 3], &[0, 1]).unwrap();
    let out = measure_state(&rho, &family).unwrap();
    assert!((out.data() - rho.data()).iter().all(|z| z.norm() < 1e-14));
    let bell = zoo::bell(1).unwrap().projector();
    let out = measure_state(
        &bell,
        &MeasurementFamily::computational(&[2, 2], &[0]).unwrap(),
    )
    .unwrap();
    let expected = CMatrix::from_fn(4, 4, |r, col| {
        c(if r == col && (r == 0 || r == 3) {
            0.5
        } else {
            0.0
        })
    });
    assert!((out.data() - expected).iter().all(|z| z.norm() < 1e-14));
}

#[test]
fn invalid_inputs_are_rejected() {
    let not_unitary = CMatrix::from_fn(2, 2, |_, _| c(1.0));
    assert!(MeasurementFamily::new(&[2, 2], vec![0], vec![not_unitary]).is_err());
    assert!(MeasurementFamily::new(&[2, 2], vec![0], vec![CMatrix::identity(3, 3)]).is_err());
    assert!(MeasurementFamily::new(&[2, 2], vec![1, 0], vec![CMatrix::identity(2, 2); 2]).is_err());
    assert!(unitary_from_angles(3, &[0.0; 2]).is_err());
    let bell = zoo::bell(1).unwrap().projector();
    let part = Bipartition::new(2, &[0]).unwrap();
    assert!(
        bipartite_discord_cmn(&bell, &part, Side::A, &p1(5), &OptimizerCfg::default()).is_err()
    );
    let wrong = Bipartition::new(3, &[0]).unwrap();
    assert!(global_discord_cmn(&bell, &wrong, &p1(2), &OptimizerCfg::default()).is_err());
}

#[test]
fn same_seed_same_result() {
    let rho = zoo::random_density(&[2, 2, 2], 3, 77).unwrap();
    let part = Bipartition::new(3, &[2]).unwrap();
    let cfg = OptimizerCfg {
        restarts: 6,
        seed: 99,
        ..OptimizerCfg::default()
    };
    let a = global_discord_cmn(&rho, &part, &p1(2), &cfg).unwrap();
    let b = global_discord_cmn(&rho, &part, &p1(2), &cfg).unwrap();
    assert_eq!(a, b);
}
