//! The sparse engine against exact state vectors on small trees.

mod common;

use bbqram::dense::{dense_query_fidelity, dense_run, state_fidelity};
use bbqram::ecs::{query_fidelity, run_circuit, EcsState};
use bbqram::model::{build_query_circuit, QramGeometry};
use bbqram::noise::{sample_rng, ErrorConfiguration};

fn compare(layers: usize, seed: u64, trials: usize) {
    let g = QramGeometry::new(layers).unwrap();
    let mut rng = sample_rng(seed, 0);
    for _ in 0..trials {
        let address = common::random_address(layers, &mut rng);
        let data = common::random_data(&g, &mut rng);
        let c = build_query_circuit(g, &data).unwrap();
        for k in 0..5 {
            let errors = if k == 0 {
                ErrorConfiguration::empty()
            } else {
                common::random_errors(&c, &mut rng)
            };
            let mut ecs = EcsState::init_state(&g, &address).unwrap();
            run_circuit(&mut ecs, &c, &errors).unwrap();
            let dense = dense_run(&c, &address, &errors).unwrap();
            let f = state_fidelity(&ecs.materialize().unwrap(), &dense.to_full().unwrap());
            assert!(f >= 1.0 - 1e-10, "state fidelity {f} for {errors:?}");
            let qe = query_fidelity(&ecs, &g, &address, &data).unwrap();
            let qd = dense_query_fidelity(&dense, &g, &address, &data).unwrap();
            assert!((qe - qd).abs() < 1e-10, "query fidelity {qe} vs {qd} for {errors:?}");
        }
    }
}

#[test]
fn one_layer_agrees() {
    compare(1, 101, 20);
}

#[test]
fn two_layers_agree() {
    compare(2, 202, 20);
}

#[test]
fn three_layers_agree_on_a_few_cases() {
    compare(3, 303, 3);
}
