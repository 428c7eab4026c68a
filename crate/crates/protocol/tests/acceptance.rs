//! End-to-end acceptance checks. Each check prints one PASS/FAIL line with
//! its wall time; the process fails if any check fails or overruns.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qss_core::css::{on_block, CssCode};
use qss_core::gate::{GateKind, GateOp};
use qss_core::rs::{ReedSolomonCode, Variant};
use qss_core::sim::dense::DenseState;
use qss_core::sim::state::{Backend, QuantumState};
use qss_core::{Fe, PrimeField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qss_core::sim::tableau::Tableau;
use qss_protocol::adversary::{
    BadBranchDealer, CliffordWireAttack, Honest, LyingBroadcaster, PauliTamper, Strategy, WrongStateDealer,
};
use qss_protocol::circuit::{LogicalCircuit, WireRole};
use qss_protocol::mpqc::{mpqc_run, mpqc_run_basis};
use qss_protocol::net::{Network, NetworkConfig, PlayerId, Regime};
use qss_protocol::vqss::{two_good_quantum_check, vqss_reconstruct, vqss_share, SharingKind};

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn f7() -> PrimeField {
    PrimeField::new(7).unwrap()
}

fn f11() -> PrimeField {
    PrimeField::new(11).unwrap()
}

fn random_amplitudes<R: Rng>(rng: &mut R, p: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..p)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / n).collect()
}

fn random_clifford_on<R: Rng>(rng: &mut R, p: u32, wires: &[usize]) -> GateOp {
    let wire = wires[rng.gen_range(0..wires.len())];
    let c = rng.gen_range(1..p);
    match rng.gen_range(0..6) {
        0 => GateOp::Shift { wire, c },
        1 => GateOp::ScalarMul { wire, c },
        2 => GateOp::PhaseShift { wire, c },
        3 => GateOp::Fourier { wire, r: c },
        4 => GateOp::FourierInverse { wire, r: c },
        _ if wires.len() > 1 => {
            let mut target = wire;
            while target == wire {
                target = wires[rng.gen_range(0..wires.len())];
            }
            GateOp::Sum { control: wire, target }
        }
        _ => GateOp::Shift { wire, c },
    }
}

/// Single-wire gate of `kind` with parameter `c`.
fn gate(kind: GateKind, wire: usize, c: Fe) -> GateOp {
    match kind {
        GateKind::Shift => GateOp::Shift { wire, c },
        GateKind::ScalarMul => GateOp::ScalarMul { wire, c },
        GateKind::PhaseShift => GateOp::PhaseShift { wire, c },
        GateKind::Fourier => GateOp::Fourier { wire, r: c },
        GateKind::FourierInverse => GateOp::FourierInverse { wire, r: c },
        GateKind::Sum | GateKind::Toffoli => unreachable!("single-wire gates only"),
    }
}

/// Reference wire maximally entangled with a fresh input wire.
fn bell_pair(s: &mut QuantumState) -> (usize, usize) {
    let w = s.allocate(2);
    s.apply(&GateOp::Fourier { wire: w[0], r: 1 }).unwrap();
    s.apply(&GateOp::Sum { control: w[0], target: w[1] }).unwrap();
    (w[0], w[1])
}

/// `(I ⊗ gates) Σ_a |a, a⟩ / √p`.
fn bell_reference(f: PrimeField, gates: &[GateOp]) -> DenseState {
    let mut d = DenseState::new(f, 2).unwrap();
    d.apply(&GateOp::Fourier { wire: 0, r: 1 }).unwrap();
    d.apply(&GateOp::Sum { control: 0, target: 1 }).unwrap();
    d.apply_all(gates).unwrap();
    d
}

/// Output of the channel whose pure Choi state (references, then outputs)
/// is `choi`, on input `ψ`: `√(p^m) (⟨ψ*| ⊗ I) |choi⟩`.
fn channel_output(choi: &DenseState, psi: &[Complex64]) -> DenseState {
    let f = *choi.field();
    let m = choi.num_qupits() / 2;
    let dim = psi.len();
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for (a, &amp) in psi.iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let da = DenseState::new(f, m).unwrap().digits(a);
        for (b, o) in out.iter_mut().enumerate() {
            let mut digits = da.clone();
            digits.extend(DenseState::new(f, m).unwrap().digits(b));
            *o += amp * choi.amplitudes()[choi.index(&digits)];
        }
    }
    let scale = (dim as f64).sqrt();
    DenseState::from_amplitudes(f, m, out.into_iter().map(|v| v * scale).collect()).unwrap()
}

// ---------------------------------------------------------------------------
// codec

fn codec_exactness() -> Result<String, String> {
    let f = f7();
    let (n, delta) = (5usize, 2usize);
    let v = ReedSolomonCode::new(f, n, delta, Variant::V).map_err(|e| e.to_string())?;
    let eval = |coeffs: &[Fe], x: Fe| coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c));
    let mut words = 0;
    let mut corrected = 0;
    for s in 0..7 {
        for r1 in 0..7 {
            for r2 in 0..7 {
                let want: Vec<Fe> = (1..=n as Fe).map(|x| eval(&[s, r1, r2], x)).collect();
                let word = v.encode(s, &[r1, r2]).map_err(|e| e.to_string())?;
                ensure(word == want, || format!("encode({s}, [{r1}, {r2}]) = {word:?}, expected {want:?}"))?;
                let d = v.decode(&word).map_err(|e| e.to_string())?;
                ensure(d.secret == s && d.error_positions.is_empty(), || format!("decode of {word:?}"))?;
                words += 1;
                for pos in 0..n {
                    for e in 1..7 {
                        let mut bad = word.clone();
                        bad[pos] = f.add(bad[pos], e);
                        let d = v.decode(&bad).map_err(|e| e.to_string())?;
                        ensure(
                            d.secret == s && d.codeword == word && d.error_positions == vec![pos] && d.error_values == vec![e],
                            || format!("weight-1 error {e} at {pos} on {word:?}"),
                        )?;
                        corrected += 1;
                    }
                }
            }
        }
    }
    // d_i w_i over V_0 of degree n - 1 - δ is orthogonal to V^δ
    let d = qss_core::rs::dual_constants(&f, n, delta).map_err(|e| e.to_string())?;
    ensure(d.iter().all(|&x| x != 0), || format!("zero dual constant in {d:?}"))?;
    let dual_delta = n - 1 - delta;
    let mut pairs = 0;
    let p = f.p() as usize;
    for vi in 0..p.pow(delta as u32 + 1) {
        let vc: Vec<Fe> = (0..=delta).map(|k| ((vi / p.pow(k as u32)) % p) as Fe).collect();
        let vw: Vec<Fe> = (1..=n as Fe).map(|x| eval(&vc, x)).collect();
        for wi in 0..p.pow(dual_delta as u32) {
            let mut wc = vec![0];
            wc.extend((0..dual_delta).map(|k| ((wi / p.pow(k as u32)) % p) as Fe));
            let ww: Vec<Fe> = (1..=n as Fe).map(|x| eval(&wc, x)).collect();
            let ip = (0..n).fold(0, |acc, i| f.add(acc, f.mul(vw[i], f.mul(d[i], ww[i]))));
            ensure(ip == 0, || format!("⟨v, d·w⟩ = {ip} for v={vw:?}, w={ww:?}"))?;
            pairs += 1;
        }
    }
    Ok(format!("{words} codewords, {corrected} weight-1 corrections, {pairs} dual pairs"))
}

// ---------------------------------------------------------------------------
// transversal gates

fn transversal_homomorphism() -> Result<String, String> {
    let f = f7();
    let code = CssCode::new(f, 5, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let single = [GateKind::Shift, GateKind::ScalarMul, GateKind::PhaseShift, GateKind::Fourier];
    // every logical basis input, every nonzero parameter
    for kind in single {
        for c in 1..7 {
            for a in 0..7 {
                let mut s = QuantumState::new(Backend::Tableau, f, 0);
                let mut blk = [code.encode_value(&mut s, a).unwrap()];
                CssCode::transversal_apply(&mut s, kind, c, &mut blk).map_err(|e| e.to_string())?;
                let [blk] = blk;
                let out = blk.code.clone().decode_d(&mut s, blk, &mut rng).map_err(|e| e.to_string())?;
                let got = s.pure_reduced(&[out.logical]).unwrap();
                let mut want = DenseState::basis(f, &[a]).unwrap();
                want.apply(&gate(kind, 0, c)).unwrap();
                worst = worst.max(got.trace_distance(&want));
                cases += 1;
            }
        }
    }
    for a in 0..7 {
        for b in 0..7 {
            let mut s = QuantumState::new(Backend::Tableau, f, 0);
            let mut pair = [code.encode_value(&mut s, a).unwrap(), code.encode_value(&mut s, b).unwrap()];
            CssCode::transversal_apply(&mut s, GateKind::Sum, 0, &mut pair).map_err(|e| e.to_string())?;
            let [x, y] = pair;
            let ox = code.decode_d(&mut s, x, &mut rng).map_err(|e| e.to_string())?;
            let oy = code.decode_d(&mut s, y, &mut rng).map_err(|e| e.to_string())?;
            let got = s.pure_reduced(&[ox.logical, oy.logical]).unwrap();
            let want = DenseState::basis(f, &[a, f.add(a, b)]).unwrap();
            worst = worst.max(got.trace_distance(&want));
            cases += 1;
        }
    }
    // superpositions: one run per gate with reference qupits entangled to
    // the logical inputs; its Choi state fixes the action on any input
    for kind in [GateKind::Shift, GateKind::ScalarMul, GateKind::PhaseShift, GateKind::Fourier, GateKind::Sum] {
        let c = rng.gen_range(1..7);
        let m = if kind == GateKind::Sum { 2 } else { 1 };
        let mut s = QuantumState::new(Backend::Tableau, f, 0);
        let (refs, logicals): (Vec<usize>, Vec<usize>) = (0..m).map(|_| bell_pair(&mut s)).unzip();
        let mut blocks: Vec<_> = logicals.iter().map(|&l| code.encode(&mut s, l).unwrap()).collect();
        CssCode::transversal_apply(&mut s, kind, c, &mut blocks).map_err(|e| e.to_string())?;
        let mut wires = refs.clone();
        for blk in blocks {
            wires.push(blk.code.clone().decode_d(&mut s, blk, &mut rng).map_err(|e| e.to_string())?.logical);
        }
        let choi = s.pure_reduced(&wires).map_err(|e| e.to_string())?;
        let logical = if kind == GateKind::Sum { GateOp::Sum { control: 0, target: 1 } } else { gate(kind, 0, c) };
        for _ in 0..10 {
            let amps = random_amplitudes(&mut rng, 7usize.pow(m as u32));
            let mut want = DenseState::from_amplitudes(f, m, amps.clone()).unwrap();
            want.apply(&logical).unwrap();
            worst = worst.max(channel_output(&choi, &amps).trace_distance(&want));
            cases += 1;
        }
    }
    ensure(worst < 1e-9, || format!("max deviation {worst:e}"))?;
    Ok(format!("{cases} cases, max deviation {worst:.1e}"))
}

// ---------------------------------------------------------------------------
// degree reduction

fn degree_reduction() -> Result<String, String> {
    let f = f11();
    let low = CssCode::new(f, 7, 2).unwrap();
    let high = CssCode::new(f, 7, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for a in 0..11 {
        let mut s = QuantumState::new(Backend::Tableau, f, 0);
        let blk = high.encode_value(&mut s, a).unwrap();
        let anc = low.encode_uniform(&mut s).unwrap();
        let (out, _) = CssCode::degree_reduce(&mut s, blk, anc, &mut rng).map_err(|e| e.to_string())?;
        ensure(out.code.delta() == 2, || format!("reduced block has degree {}", out.code.delta()))?;
        let dec = low.decode_d(&mut s, out, &mut rng).map_err(|e| e.to_string())?;
        let got = s.pure_reduced(&[dec.logical]).unwrap();
        worst = worst.max(1.0 - got.fidelity(&DenseState::basis(f, &[a]).unwrap()));
    }
    // superpositions: each run carries a reference qupit, and the run's
    // reference/output state determines its action on any input
    for _ in 0..20 {
        let mut s = QuantumState::new(Backend::Tableau, f, 0);
        let (r, l) = bell_pair(&mut s);
        let blk = high.encode(&mut s, l).unwrap();
        let anc = low.encode_uniform(&mut s).unwrap();
        let (out, _) = CssCode::degree_reduce(&mut s, blk, anc, &mut rng).map_err(|e| e.to_string())?;
        let dec = low.decode_d(&mut s, out, &mut rng).map_err(|e| e.to_string())?;
        let choi = s.pure_reduced(&[r, dec.logical]).map_err(|e| e.to_string())?;
        let support: BTreeSet<usize> = (0..rng.gen_range(2..=4)).map(|_| rng.gen_range(0..11)).collect();
        let mut amps = vec![Complex64::new(0.0, 0.0); 11];
        for &k in &support {
            amps[k] = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<Complex64> = amps.into_iter().map(|a| a / norm).collect();
        let want = DenseState::from_amplitudes(f, 1, amps.clone()).unwrap();
        let got = channel_output(&choi, &amps);
        worst = worst.max(1.0 - got.fidelity(&want));
        worst = worst.max(1.0 - choi.fidelity(&bell_reference(f, &[])));
    }
    ensure(worst <= 1e-9, || format!("worst infidelity {worst:e}"))?;
    Ok(format!("11 basis states, 20 superpositions, worst infidelity {worst:.1e}"))
}

// ---------------------------------------------------------------------------
// neighborhoods

fn neighborhood_theory() -> Result<String, String> {
    let f = f7();
    let code = CssCode::new(f, 5, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let (mut accepted, mut rejected, mut compared) = (0, 0, 0);

    // decoder and ideal recovery on one state in the B-neighborhood
    let mut compare = |s: QuantumState, r: usize, blk: qss_core::css::EncodedBlock, b: &BTreeSet<usize>, rng: &mut ChaCha8Rng| -> Result<(), String> {
        let mut s2 = s.clone();
        let mut s1 = s;
        let out_r = code.ideal_recover(&mut s1, blk.clone(), b, rng).map_err(|e| e.to_string())?;
        let out_d = code.decode_d(&mut s2, blk, rng).map_err(|e| e.to_string())?;
        let a = s1.pure_reduced(&[r, out_r]).map_err(|e| e.to_string())?;
        let c = s2.pure_reduced(&[r, out_d.logical]).map_err(|e| e.to_string())?;
        worst = worst.max(a.trace_distance(&c));
        compared += 1;
        Ok(())
    };

    for trial in 0..100 {
        let bpos = trial % 5;
        let b: BTreeSet<usize> = [bpos].into();
        let mut s = QuantumState::new(Backend::Tableau, f, 0);
        let (r, l) = bell_pair(&mut s);
        let blk = code.encode(&mut s, l).unwrap();
        let env = s.allocate(1)[0];
        for _ in 0..12 {
            s.apply(&random_clifford_on(&mut rng, 7, &[blk.wires[bpos], env])).unwrap();
        }
        ensure(code.cb_member(&s, &blk, &b).unwrap(), || format!("B-local unitary {trial} rejected"))?;
        accepted += 1;
        compare(s, r, blk, &b, &mut rng)?;
    }
    for bpos in 0..5 {
        let b: BTreeSet<usize> = [bpos].into();
        for x in 0..7 {
            for z in 0..7 {
                if (x, z) == (0, 0) {
                    continue;
                }
                // the same Pauli on B stays in the neighborhood ...
                let mut s = QuantumState::new(Backend::Tableau, f, 0);
                let (r, l) = bell_pair(&mut s);
                let blk = code.encode(&mut s, l).unwrap();
                let m = s.num_qupits();
                let mut inside = s.clone();
                inside.apply_pauli(&on_block(m, &[blk.wires[bpos]], Some(&[x]), Some(&[z]))).unwrap();
                ensure(code.cb_member(&inside, &blk, &b).unwrap(), || format!("Pauli on B={bpos} rejected"))?;
                accepted += 1;
                compare(inside, r, blk.clone(), &b, &mut rng)?;
                // ... and off B it is caught
                for w in (0..5).filter(|&w| w != bpos) {
                    let mut outside = s.clone();
                    outside.apply_pauli(&on_block(m, &[blk.wires[w]], Some(&[x]), Some(&[z]))).unwrap();
                    ensure(!code.cb_member(&outside, &blk, &b).unwrap(), || {
                        format!("X^{x}Z^{z} on wire {w} accepted with B={{{bpos}}}")
                    })?;
                    rejected += 1;
                }
            }
        }
    }
    ensure(worst < 1e-9, || format!("decoder vs ideal recovery distance {worst:e}"))?;
    Ok(format!("{accepted} accepted, {rejected} rejected, {compared} recoveries compared, max distance {worst:.1e}"))
}

// ---------------------------------------------------------------------------
// verifiable sharing

fn vqss_network(seed: u64, k: usize, corrupt: &[usize], strategy: Box<dyn Strategy>) -> Network {
    let mut cfg = NetworkConfig::vqss_default().with_seed(seed).with_corrupt(corrupt);
    cfg.k = k;
    Network::new(cfg, Regime::Vqss, Backend::Tableau, strategy).unwrap()
}

/// A fresh environment qupit in `|value⟩`, or `F|0⟩` for `None`, handed
/// to `p`.
fn input_qupit(net: &mut Network, value: Option<Fe>, p: PlayerId) -> usize {
    let w = net.environment(1)[0];
    match value {
        Some(0) => {}
        Some(c) => net.state_mut().apply(&GateOp::Shift { wire: w, c }).unwrap(),
        None => net.state_mut().apply(&GateOp::Fourier { wire: w, r: 1 }).unwrap(),
    }
    net.give(w, p).unwrap();
    w
}

fn expected_input(f: PrimeField, value: Option<Fe>) -> DenseState {
    let mut d = DenseState::new(f, 1).unwrap();
    match value {
        Some(c) => d.apply(&GateOp::Shift { wire: 0, c }).unwrap(),
        None => d.apply(&GateOp::Fourier { wire: 0, r: 1 }).unwrap(),
    }
    d
}

fn vqss_completeness() -> Result<String, String> {
    let inputs = [Some(0), Some(1), Some(3), None];
    let dealer = PlayerId::at(0);
    let mut runs = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        for &value in &inputs {
            let mut net = vqss_network(seed, 4, &[], Box::new(Honest));
            let f = *net.field();
            let code = CssCode::new(f, 5, 2).unwrap();
            let q = input_qupit(&mut net, value, dealer);
            let sh = vqss_share(&mut net, &code, dealer, SharingKind::Plain, Some(q)).map_err(|e| e.to_string())?;
            ensure(sh.accepted, || format!("honest sharing rejected (seed {seed}, input {value:?})"))?;
            let receiver = PlayerId::at(1 + seed as usize % 4);
            let rec = vqss_reconstruct(&mut net, &sh, receiver).map_err(|e| e.to_string())?;
            ensure(!rec.fault, || format!("reconstruction fault (seed {seed})"))?;
            let got = net.state().pure_reduced(&[rec.wire]).map_err(|e| e.to_string())?;
            worst = worst.max(1.0 - got.fidelity(&expected_input(f, value)));
            runs += 1;
        }
    }
    ensure(worst <= 1e-9, || format!("worst infidelity {worst:e}"))?;
    Ok(format!("{runs}/{runs} accepted, worst infidelity {worst:.1e}"))
}

fn vqss_soundness_trend() -> Result<String, String> {
    const TRIALS: usize = 200;
    let dealer = PlayerId::at(0);
    let mut summary = Vec::new();
    for name in ["bad_branch_dealer", "wrong_state_dealer"] {
        let mut rates = Vec::new();
        let mut not_good = 0;
        for k in 1..=4usize {
            let mut caught = 0;
            for trial in 0..TRIALS {
                let strategy: Box<dyn Strategy> = match name {
                    "bad_branch_dealer" => Box::new(BadBranchDealer::default()),
                    _ => Box::new(WrongStateDealer::default()),
                };
                let seed = 1_000 * k as u64 + trial as u64;
                let mut net = vqss_network(seed, k, &[1], strategy);
                let code = CssCode::new(*net.field(), 5, 2).unwrap();
                let sh = if name == "bad_branch_dealer" {
                    let q = input_qupit(&mut net, Some(0), dealer);
                    vqss_share(&mut net, &code, dealer, SharingKind::Plain, Some(q))
                } else {
                    vqss_share(&mut net, &code, dealer, SharingKind::ProvedZero, None)
                }
                .map_err(|e| e.to_string())?;
                let blamed = sh.sets.b.contains(&dealer.position());
                if !sh.accepted || (name == "bad_branch_dealer" && blamed) {
                    caught += 1;
                }
                if k == 4 && sh.accepted && !two_good_quantum_check(&net, &sh, seed).map_err(|e| e.to_string())? {
                    not_good += 1;
                }
            }
            rates.push(caught as f64 / TRIALS as f64);
        }
        for w in rates.windows(2) {
            let sd = |r: f64| r * (1.0 - r) / TRIALS as f64;
            let slack = 2.0 * (sd(w[0]) + sd(w[1])).sqrt();
            ensure(w[1] + slack >= w[0], || format!("{name}: catch rate fell {rates:?}"))?;
        }
        ensure(not_good == 0, || format!("{name}: {not_good} accepted runs at k=4 fail the 2-GOOD check"))?;
        summary.push(format!("{name} {rates:?}"));
    }
    Ok(format!("catch rates by k=1..4: {}", summary.join("; ")))
}

fn tamper_invariance() -> Result<String, String> {
    let dealer = PlayerId::at(0);
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for c in 0..5usize {
        let cheater = PlayerId::at(c);
        let receiver = PlayerId::at((c + 1) % 5);
        let mut net = vqss_network(7 + c as u64, 4, &[c + 1], Box::new(Honest));
        let f = *net.field();
        let code = CssCode::new(f, 5, 2).unwrap();
        let r = net.environment(1)[0];
        let q = net.environment(1)[0];
        net.state_mut().apply(&GateOp::Fourier { wire: r, r: 1 }).unwrap();
        net.state_mut().apply(&GateOp::Sum { control: r, target: q }).unwrap();
        net.give(q, dealer).unwrap();
        let sh = vqss_share(&mut net, &code, dealer, SharingKind::Plain, Some(q)).map_err(|e| e.to_string())?;
        ensure(sh.accepted, || "honest sharing rejected".into())?;
        let reference = {
            let mut base = net.clone();
            let rec = vqss_reconstruct(&mut base, &sh, receiver).map_err(|e| e.to_string())?;
            base.state().pure_reduced(&[r, rec.wire]).map_err(|e| e.to_string())?
        };
        worst = worst.max(reference.trace_distance(&bell_reference(f, &[])));
        let held = net.held_by(cheater);
        ensure(held.len() == 5, || format!("{cheater} holds {} wires after sharing", held.len()))?;
        for &w in &held {
            for x in 0..7 {
                for z in 0..7 {
                    let mut run = net.clone();
                    let m = run.state().num_qupits();
                    run.state_mut().apply_pauli(&on_block(m, &[w], Some(&[x]), Some(&[z]))).unwrap();
                    let rec = vqss_reconstruct(&mut run, &sh, receiver).map_err(|e| e.to_string())?;
                    let got = run.state().pure_reduced(&[r, rec.wire]).map_err(|e| e.to_string())?;
                    worst = worst.max(got.trace_distance(&reference));
                    runs += 1;
                }
            }
        }
    }
    ensure(worst < 1e-9, || format!("max trace distance {worst:e}"))?;
    Ok(format!("{runs} tampered reconstructions, max trace distance {worst:.1e}"))
}

// ---------------------------------------------------------------------------
// multiparty computation

fn mpqc_circuits() -> Vec<(&'static str, LogicalCircuit)> {
    let roles = |k: usize| (0..k).map(|i| WireRole::Input(PlayerId::at(i))).collect::<Vec<_>>();
    let outs = |k: usize| (0..k).map(|w| (w, PlayerId::at(w + 3))).collect::<Vec<_>>();
    let mk = |k: usize, gates: Vec<GateOp>| LogicalCircuit::new(roles(k), gates, outs(k)).unwrap();
    vec![
        ("sum", mk(2, vec![GateOp::Sum { control: 0, target: 1 }])),
        ("scalar_mul", mk(1, vec![GateOp::ScalarMul { wire: 0, c: 3 }])),
        ("shift", mk(1, vec![GateOp::Shift { wire: 0, c: 5 }])),
        (
            "fourier_round_trip",
            mk(1, vec![GateOp::Fourier { wire: 0, r: 1 }, GateOp::FourierInverse { wire: 0, r: 1 }]),
        ),
        ("toffoli", mk(3, vec![GateOp::Toffoli { a: 0, b: 1, target: 2 }])),
    ]
}

/// Logical outputs by direct simulation of the unencoded circuit; the
/// tested circuits map basis states to basis states.
fn logical_outputs(f: PrimeField, circuit: &LogicalCircuit, inputs: &[Fe]) -> Vec<(usize, Fe)> {
    let mut d = DenseState::basis(f, inputs).unwrap();
    d.apply_all(&circuit.gates).unwrap();
    let probs = d.distribution();
    let (idx, &pmax) = probs.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    assert!(pmax > 1.0 - 1e-9, "logical circuit output is not a basis state");
    let digits = d.digits(idx);
    circuit.outputs.iter().map(|&(w, _)| (w, digits[w])).collect()
}

fn mpqc_end_to_end() -> Result<String, String> {
    const TRIALS: u64 = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut runs = 0;
    let mut disagreements = 0;
    for (name, circuit) in mpqc_circuits() {
        for strategy in ["honest", "pauli_tamper", "lying_broadcaster"] {
            for trial in 0..TRIALS {
                let s: Box<dyn Strategy> = match strategy {
                    "honest" => Box::new(Honest),
                    "pauli_tamper" => Box::new(PauliTamper::default()),
                    _ => Box::new(LyingBroadcaster),
                };
                let corrupt: &[usize] = if strategy == "honest" { &[] } else { &[7] };
                let cfg = NetworkConfig::mpqc_default().with_seed(trial * 31 + runs as u64).with_corrupt(corrupt);
                let mut net = Network::new(cfg, Regime::Mpqc, Backend::Tableau, s).unwrap();
                let f = *net.field();
                let values: Vec<Fe> = (0..circuit.inputs().len()).map(|_| rng.gen_range(0..f.p())).collect();
                let out = mpqc_run_basis(&mut net, &circuit, &values).map_err(|e| format!("{name}/{strategy}: {e}"))?;
                let want = logical_outputs(f, &circuit, &values);
                ensure(out.values == want, || {
                    format!("{name}/{strategy} trial {trial}: inputs {values:?} gave {:?}, expected {want:?}", out.values)
                })?;
                if !out.run.honest_agree() {
                    disagreements += 1;
                }
                runs += 1;
            }
        }
    }
    ensure(disagreements == 0, || format!("{disagreements} runs where honest decodes disagreed"))?;
    Ok(format!("{runs}/{runs} runs matched logical evaluation, honest decodes always agreed"))
}

// ---------------------------------------------------------------------------
// privacy

fn tableau_of(net: &Network) -> &Tableau {
    match net.state() {
        QuantumState::Tableau(t) => t,
        QuantumState::Sparse(_) => panic!("privacy checks run on the tableau backend"),
    }
}

/// Pairwise comparison of the corrupt players' reduced states.
fn views_agree(nets: &[Network], cheaters: &[PlayerId]) -> Result<usize, String> {
    let wires = |net: &Network| -> Vec<usize> { cheaters.iter().flat_map(|&p| net.held_by(p)).collect() };
    let mut pairs = 0;
    for i in 0..nets.len() {
        for j in i + 1..nets.len() {
            let (wi, wj) = (wires(&nets[i]), wires(&nets[j]));
            ensure(!wi.is_empty() && wi.len() == wj.len(), || format!("cheater holds {} vs {} wires", wi.len(), wj.len()))?;
            ensure(tableau_of(&nets[i]).same_reduced_state(&wi, tableau_of(&nets[j]), &wj), || {
                format!("cheater views differ between inputs {i} and {j}")
            })?;
            pairs += 1;
        }
    }
    Ok(pairs)
}

fn privacy() -> Result<String, String> {
    let dealer = PlayerId::at(0);
    let mut pairs = 0;
    for c in [2usize, 4] {
        let cheater = PlayerId::at(c - 1);
        let mut nets = Vec::new();
        for value in [Some(0), Some(1), None] {
            let mut net = vqss_network(90 + c as u64, 1, &[c], Box::new(CliffordWireAttack::default()));
            let code = CssCode::new(*net.field(), 5, 2).unwrap();
            let q = input_qupit(&mut net, value, dealer);
            let sh = vqss_share(&mut net, &code, dealer, SharingKind::Plain, Some(q)).map_err(|e| e.to_string())?;
            ensure(sh.tree.is_some(), || "sharing rejected".into())?;
            nets.push(net);
        }
        pairs += views_agree(&nets, &[cheater])?;
    }
    // two-gate computation whose outputs go to honest players
    let circuit = LogicalCircuit::new(
        vec![WireRole::Input(PlayerId::at(0)), WireRole::Input(PlayerId::at(1))],
        vec![GateOp::Sum { control: 0, target: 1 }, GateOp::Fourier { wire: 0, r: 1 }],
        vec![(0, PlayerId::at(2)), (1, PlayerId::at(3))],
    )
    .unwrap();
    let cheater = PlayerId::at(6);
    let mut nets = Vec::new();
    for values in [[Some(0), Some(0)], [Some(1), Some(4)], [None, Some(9)]] {
        let cfg = NetworkConfig::mpqc_default().with_seed(95).with_corrupt(&[7]);
        let mut net = Network::new(cfg, Regime::Mpqc, Backend::Tableau, Box::new(CliffordWireAttack::default())).unwrap();
        let qs: Vec<usize> = values.iter().zip(0..).map(|(&v, i)| input_qupit(&mut net, v, PlayerId::at(i))).collect();
        mpqc_run(&mut net, &circuit, &qs).map_err(|e| e.to_string())?;
        nets.push(net);
    }
    pairs += views_agree(&nets, &[cheater])?;
    Ok(format!("{pairs} input pairs with identical cheater reduced states (trace distance 0)"))
}

// ---------------------------------------------------------------------------
// backends

fn backend_cross_validation() -> Result<String, String> {
    let f = f7();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let deviation = |a: &DenseState, b: &DenseState| {
        a.distribution().iter().zip(b.distribution()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    };
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let m = rng.gen_range(1..=4);
        let wires: Vec<usize> = (0..m).collect();
        let mut t = QuantumState::new(Backend::Tableau, f, m);
        let mut d = DenseState::new(f, m).unwrap();
        for _ in 0..rng.gen_range(1..30) {
            let g = random_clifford_on(&mut rng, 7, &wires);
            t.apply(&g).unwrap();
            d.apply(&g).unwrap();
        }
        let td = t.to_dense().unwrap();
        worst = worst.max(deviation(&td, &d)).max(td.distance_up_to_phase(&d));
    }
    for _ in 0..50 {
        let m = 3;
        let mut s = QuantumState::new(Backend::Sparse, f, m);
        let mut d = DenseState::new(f, m).unwrap();
        for _ in 0..20 {
            let g = if rng.gen_bool(0.3) {
                let mut w = [0usize, 1, 2];
                for i in (1..3).rev() {
                    w.swap(i, rng.gen_range(0..=i));
                }
                GateOp::Toffoli { a: w[0], b: w[1], target: w[2] }
            } else {
                random_clifford_on(&mut rng, 7, &[0, 1, 2])
            };
            s.apply(&g).unwrap();
            d.apply(&g).unwrap();
        }
        let sd = s.to_dense().unwrap();
        worst = worst.max(deviation(&sd, &d)).max(sd.distance_up_to_phase(&d));
    }
    ensure(worst < 1e-9, || format!("max deviation {worst:e}"))?;
    Ok(format!("250 circuits, max deviation {worst:.1e}"))
}

// ---------------------------------------------------------------------------

fn main() {
    let checks: [(&str, Check, u64); 10] = [
        ("codec exactness", codec_exactness, 10),
        ("transversal homomorphism", transversal_homomorphism, 60),
        ("degree reduction", degree_reduction, 120),
        ("neighborhood theory", neighborhood_theory, 120),
        ("sharing completeness", vqss_completeness, 300),
        ("sharing soundness trend", vqss_soundness_trend, 1200),
        ("tamper invariance", tamper_invariance, 600),
        ("computation end to end", mpqc_end_to_end, 1800),
        ("privacy", privacy, 600),
        ("backend cross-validation", backend_cross_validation, 300),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check, limit)) in checks.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed > Duration::from_secs(*limit) {
                Err(format!("took {elapsed:.1?}, limit {limit} s ({detail})"))
            } else {
                Ok(detail)
            }
        });
        let (verdict, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{:>2}/10] {verdict} {name} ({:.1} s, limit {limit} s): {detail}", i + 1, elapsed.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}
