use qss_core::gate::GateOp;
use qss_core::sim::state::Backend;
use qss_protocol::adversary::{Honest, LyingBroadcaster, PauliTamper, Strategy};
use qss_protocol::circuit::{LogicalCircuit, WireRole};
use qss_protocol::mpqc::{mpqc_run_basis, AncillaPlan};
use qss_protocol::net::{Network, NetworkConfig, PlayerId, Regime};

fn network(seed: u64) -> Network {
    let cfg = NetworkConfig::mpqc_default().with_seed(seed);
    Network::new(cfg, Regime::Mpqc, Backend::Tableau, Box::new(Honest)).unwrap()
}

fn inputs(k: usize) -> Vec<WireRole> {
    (0..k).map(|i| WireRole::Input(PlayerId::at(i))).collect()
}

fn all_out(k: usize) -> Vec<(usize, PlayerId)> {
    (0..k).map(|w| (w, PlayerId::at(w + 3))).collect()
}

#[test]
fn sum_adds_control_into_target() {
    let c = LogicalCircuit::new(inputs(2), vec![GateOp::Sum { control: 0, target: 1 }], all_out(2)).unwrap();
    let mut net = network(1);
    let out = mpqc_run_basis(&mut net, &c, &[4, 5]).unwrap();
    assert_eq!(out.values, vec![(0, 4), (1, 9)]);
    assert!(out.run.honest_agree());
    assert!(out.run.outputs.iter().all(|o| !o.fault));
}

#[test]
fn toffoli_adds_product_into_target() {
    let c = LogicalCircuit::new(inputs(3), vec![GateOp::Toffoli { a: 0, b: 1, target: 2 }], all_out(3)).unwrap();
    assert_eq!(AncillaPlan::of(&c), AncillaPlan { product_targets: 1, reducers: 1 });
    let mut net = network(2);
    let out = mpqc_run_basis(&mut net, &c, &[2, 3, 1]).unwrap();
    assert_eq!(out.values, vec![(0, 2), (1, 3), (2, 7)]);
    assert_eq!(out.run.degrees, vec![vec![2, 2, 2]]);
    assert!(out.run.honest_agree());
}

#[test]
fn toffoli_keeps_target_phases() {
    // F⁻¹ X^{ab} F acts on |v⟩ as a phase, so a wrong phase correction
    // inside the Toffoli would show up as a changed output.
    let gates = vec![
        GateOp::Fourier { wire: 2, r: 1 },
        GateOp::Toffoli { a: 0, b: 1, target: 2 },
        GateOp::FourierInverse { wire: 2, r: 1 },
    ];
    let c = LogicalCircuit::new(inputs(3), gates, all_out(3)).unwrap();
    let mut net = network(3);
    let out = mpqc_run_basis(&mut net, &c, &[2, 5, 6]).unwrap();
    assert_eq!(out.values, vec![(0, 2), (1, 5), (2, 6)]);
    assert_eq!(out.run.degrees, vec![vec![2, 2, 4], vec![2, 2, 2], vec![2, 2, 4]]);
}

#[test]
fn fourier_round_trip_passes_through_high_degree() {
    let gates = vec![GateOp::Fourier { wire: 0, r: 1 }, GateOp::FourierInverse { wire: 0, r: 1 }];
    let c = LogicalCircuit::new(inputs(1), gates, all_out(1)).unwrap();
    let mut net = network(4);
    let out = mpqc_run_basis(&mut net, &c, &[8]).unwrap();
    assert_eq!(out.values, vec![(0, 8)]);
    assert_eq!(out.run.degrees, vec![vec![4], vec![2]]);
}

fn corrupt_network(seed: u64, strategy: Box<dyn Strategy>) -> Network {
    let cfg = NetworkConfig::mpqc_default().with_seed(seed).with_corrupt(&[2]);
    Network::new(cfg, Regime::Mpqc, Backend::Tableau, strategy).unwrap()
}

#[test]
fn toffoli_survives_pauli_tampering() {
    let c = LogicalCircuit::new(inputs(3), vec![GateOp::Toffoli { a: 0, b: 1, target: 2 }], all_out(3)).unwrap();
    for seed in 0..3 {
        let mut net = corrupt_network(seed, Box::new(PauliTamper::default()));
        let out = mpqc_run_basis(&mut net, &c, &[2, 3, 1]).unwrap();
        assert_eq!(out.values, vec![(0, 2), (1, 3), (2, 7)], "seed {seed}");
        assert!(out.run.honest_agree());
    }
}

#[test]
fn toffoli_survives_lying_broadcasts() {
    let c = LogicalCircuit::new(inputs(3), vec![GateOp::Toffoli { a: 0, b: 1, target: 2 }], all_out(3)).unwrap();
    for seed in 0..3 {
        let mut net = corrupt_network(seed, Box::new(LyingBroadcaster));
        let out = mpqc_run_basis(&mut net, &c, &[4, 6, 0]).unwrap();
        assert_eq!(out.values, vec![(0, 4), (1, 6), (2, 2)], "seed {seed}");
        assert!(out.run.honest_agree());
    }
}
