//! Fixed-seed invariant suites.

use qss_core::css::CssCode;
use qss_core::gate::{GateKind, GateOp};
use qss_core::sim::dense::DenseState;
use qss_core::sim::state::{dense_oracle_compare, Backend, QuantumState};
use qss_core::{Fe, PrimeField};
use qss_protocol::adversary::{Honest, PauliTamper, Strategy};
use qss_protocol::circuit::{LogicalCircuit, WireRole};
use qss_protocol::mpqc::mpqc_run_basis;
use qss_protocol::net::EventKind;
use qss_protocol::vqss::{vqss_reconstruct, vqss_share, SharingKind};
use qss_protocol::{Network, NetworkConfig, PlayerId, Regime, Transcript};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::run::{codec_check, logical_outputs};

type Outcome = std::result::Result<String, String>;
type Suite = fn(u64, bool) -> Outcome;

pub const SUITES: [(&str, Suite); 6] = [
    ("codec", codec),
    ("backends", backends),
    ("transversal", transversal),
    ("vqss", vqss),
    ("mpqc", mpqc),
    ("transcripts", transcripts),
];

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Runs every suite; `inject` names a suite whose check is deliberately
/// perturbed, so the harness can be shown to notice.
pub fn run_all(seed: u64, inject: Option<&str>) -> Vec<SuiteResult> {
    SUITES
        .iter()
        .map(|&(name, suite)| {
            let fault = inject == Some(name);
            let (passed, detail) = match suite(seed, fault) {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            SuiteResult { name: name.into(), passed, detail }
        })
        .collect()
}

fn field(p: u32) -> PrimeField {
    PrimeField::new(p).expect("prime")
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn codec(_seed: u64, fault: bool) -> Outcome {
    codec_check(field(7), 5, 2, fault)
}

fn random_gate(rng: &mut ChaCha8Rng, p: u32, m: usize, toffoli: bool) -> GateOp {
    let wire = rng.gen_range(0..m);
    let other = (wire + rng.gen_range(1..m)) % m;
    let c = rng.gen_range(1..p);
    match rng.gen_range(0..if toffoli { 7 } else { 6 }) {
        0 => GateOp::Shift { wire, c },
        1 => GateOp::ScalarMul { wire, c },
        2 => GateOp::PhaseShift { wire, c },
        3 => GateOp::Fourier { wire, r: c },
        4 => GateOp::FourierInverse { wire, r: c },
        5 => GateOp::Sum { control: wire, target: other },
        _ => {
            let third = (0..m).find(|&w| w != wire && w != other).expect("three wires");
            GateOp::Toffoli { a: wire, b: other, target: third }
        }
    }
}

fn backends(seed: u64, fault: bool) -> Outcome {
    let f = field(7);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..40 {
        let toffoli = i % 2 == 1;
        let m = if toffoli { 3 } else { rng.gen_range(2..=4) };
        let mut circuit: Vec<GateOp> = (0..15).map(|_| random_gate(&mut rng, 7, m, toffoli)).collect();
        let input: Vec<Fe> = (0..m).map(|_| rng.gen_range(0..7)).collect();
        if fault && i == 0 {
            // the oracle sees one gate the backends do not
            circuit.push(GateOp::Shift { wire: 0, c: 1 });
            let mut d = DenseState::basis(f, &input).map_err(err)?;
            d.apply_all(&circuit).map_err(err)?;
            let mut s = QuantumState::new(Backend::Sparse, f, m);
            for (wire, &c) in input.iter().enumerate() {
                s.apply(&GateOp::Shift { wire, c }).map_err(err)?;
            }
            s.apply_all(&circuit[..circuit.len() - 1]).map_err(err)?;
            worst = worst.max(s.to_dense().map_err(err)?.distance_up_to_phase(&d));
            continue;
        }
        worst = worst.max(dense_oracle_compare(f, &circuit, &input).map_err(err)?);
    }
    if worst > 1e-9 {
        return Err(format!("backend deviates from dense oracle by {worst:e}"));
    }
    Ok(format!("40 circuits, max deviation {worst:.1e}"))
}

fn transversal(seed: u64, fault: bool) -> Outcome {
    let f = field(7);
    let code = CssCode::new(f, 5, 2).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = 0;
    for kind in [GateKind::Shift, GateKind::ScalarMul, GateKind::Fourier, GateKind::Sum] {
        for a in 0..7 {
            let b = rng.gen_range(0..7);
            let c = rng.gen_range(1..7);
            let mut s = QuantumState::new(Backend::Tableau, f, 0);
            let mut blocks = vec![code.encode_value(&mut s, a).map_err(err)?, code.encode_value(&mut s, b).map_err(err)?];
            let (logical, width) = match kind {
                GateKind::Sum => (GateOp::Sum { control: 0, target: 1 }, 2),
                GateKind::Shift => (GateOp::Shift { wire: 0, c }, 1),
                GateKind::ScalarMul => (GateOp::ScalarMul { wire: 0, c }, 1),
                _ => (GateOp::Fourier { wire: 0, r: c }, 1),
            };
            CssCode::transversal_apply(&mut s, kind, c, &mut blocks[..width]).map_err(err)?;
            let mut wires = Vec::new();
            for blk in blocks {
                wires.push(blk.code.clone().decode_d(&mut s, blk, &mut rng).map_err(err)?.logical);
            }
            let got = s.pure_reduced(&wires).map_err(err)?;
            let mut want = DenseState::basis(f, &[a, b]).map_err(err)?;
            want.apply(&logical).map_err(err)?;
            if fault && cases == 0 {
                want.apply(&GateOp::Shift { wire: 1, c: 1 }).map_err(err)?;
            }
            let dist = got.trace_distance(&want);
            if dist > 1e-9 {
                return Err(format!("{kind:?} with c={c} on ({a}, {b}): trace distance {dist:e}"));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} encoded gate applications match the logical gate"))
}

fn vqss_net(seed: u64, corrupt: &[usize], strategy: Box<dyn Strategy>) -> std::result::Result<Network, String> {
    let cfg = NetworkConfig::vqss_default().with_seed(seed).with_corrupt(corrupt);
    Network::new(cfg, Regime::Vqss, Backend::Tableau, strategy).map_err(err)
}

fn vqss(seed: u64, fault: bool) -> Outcome {
    let mut runs = 0;
    for trial in 0..6u64 {
        let value = trial as Fe % 7;
        // honest runs, then a tampering non-dealer
        let (corrupt, strategy): (&[usize], Box<dyn Strategy>) =
            if trial < 3 { (&[], Box::new(Honest)) } else { (&[3], Box::new(PauliTamper::default())) };
        let mut net = vqss_net(seed ^ trial, corrupt, strategy)?;
        let f = *net.field();
        let code = CssCode::new(f, 5, 2).map_err(err)?;
        let dealer = PlayerId::at(0);
        let q = net.environment(1)[0];
        if value != 0 {
            net.state_mut().apply(&GateOp::Shift { wire: q, c: value }).map_err(err)?;
        }
        net.give(q, dealer).map_err(err)?;
        let sh = vqss_share(&mut net, &code, dealer, SharingKind::Plain, Some(q)).map_err(err)?;
        if !sh.accepted {
            return Err(format!("honest dealer rejected (trial {trial})"));
        }
        let rec = vqss_reconstruct(&mut net, &sh, PlayerId::at(1)).map_err(err)?;
        let got = net.state().pure_reduced(&[rec.wire]).map_err(err)?;
        let want = DenseState::basis(f, &[if fault && trial == 0 { value + 1 } else { value }]).map_err(err)?;
        let fid = got.fidelity(&want);
        if fid < 1.0 - 1e-9 {
            return Err(format!("trial {trial}: reconstruction fidelity {fid}"));
        }
        runs += 1;
    }
    Ok(format!("{runs} sharings accepted and reconstructed exactly, 3 under Pauli tampering"))
}

fn mpqc(seed: u64, fault: bool) -> Outcome {
    let roles = |k: usize| (0..k).map(|i| WireRole::Input(PlayerId::at(i))).collect::<Vec<_>>();
    let circuits = [
        LogicalCircuit::new(roles(2), vec![GateOp::Sum { control: 0, target: 1 }], vec![(1, PlayerId::at(3))]),
        LogicalCircuit::new(roles(3), vec![GateOp::Toffoli { a: 0, b: 1, target: 2 }], vec![(2, PlayerId::at(4))]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut runs = 0;
    for (i, c) in circuits.into_iter().enumerate() {
        let c = c.map_err(err)?;
        let cfg = NetworkConfig::mpqc_default().with_seed(seed ^ i as u64).with_corrupt(&[7]);
        let mut net = Network::new(cfg, Regime::Mpqc, Backend::Tableau, Box::new(PauliTamper::default())).map_err(err)?;
        let f = *net.field();
        let values: Vec<Fe> = (0..c.inputs().len()).map(|_| rng.gen_range(0..11)).collect();
        let want = logical_outputs(f, &c, &values).map_err(err)?.ok_or("logical output not deterministic")?;
        let mut out = mpqc_run_basis(&mut net, &c, &values).map_err(err)?;
        if fault && i == 0 {
            out.values[0].1 = f.add(out.values[0].1, 1);
        }
        if out.values != want || !out.run.honest_agree() {
            return Err(format!("circuit {i} on {values:?}: got {:?}, expected {want:?}", out.values));
        }
        runs += 1;
    }
    Ok(format!("{runs} computations under Pauli tampering match logical evaluation"))
}

fn transcripts(seed: u64, fault: bool) -> Outcome {
    let run = |s: u64| -> std::result::Result<Transcript, String> {
        let mut net = vqss_net(s, &[2], Box::new(PauliTamper::default()))?;
        let code = CssCode::new(*net.field(), 5, 2).map_err(err)?;
        let sh = vqss_share(&mut net, &code, PlayerId::at(0), SharingKind::ProvedZero, None).map_err(err)?;
        if sh.accepted {
            vqss_reconstruct(&mut net, &sh, PlayerId::at(3)).map_err(err)?;
        }
        Ok(net.transcript())
    };
    let a = run(seed)?;
    let b = run(if fault { seed + 1 } else { seed })?;
    let text = a.to_jsonl();
    if text != b.to_jsonl() {
        return Err("replay with the same seed produced a different transcript".into());
    }
    if Transcript::from_jsonl(&text).map_err(err)? != a {
        return Err("transcript does not round-trip through JSON lines".into());
    }
    if !a.rounds_monotone() {
        return Err("event rounds are not monotone".into());
    }
    Ok(format!(
        "{} events over {} rounds replay identically and round-trip ({} adversary actions)",
        a.events.len(),
        a.last_round(),
        a.count(EventKind::AdversaryAction)
    ))
}
