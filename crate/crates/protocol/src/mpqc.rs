//! Multiparty computation on top-level sharings: every logical qupit is a
//! block of the degree-`2t` code with one share per player. Clifford gates
//! are transversal; a Toffoli moves its target into the degree-`4t` code,
//! multiplies share-wise and degree-reduces with a proved `Σ_a |a⟩`.

use std::collections::BTreeSet;

use qss_core::css::{CssCode, EncodedBlock};
use qss_core::gate::{GateKind, GateOp};
use qss_core::Fe;
use serde::Serialize;
use serde_json::json;

use crate::adversary::Stage;
use crate::circuit::{LogicalCircuit, WireRole};
use crate::error::{Error, Result};
use crate::net::{EventKind, Network, PlayerId};
use crate::vqss::{vqss_reconstruct, vqss_share, SharingKind, VqssSharing};

/// The two top-level codes: degree `2t` for data, `4t` for products.
#[derive(Clone, Debug)]
pub struct MpqcCodes {
    pub low: CssCode,
    pub high: CssCode,
}

impl MpqcCodes {
    pub fn for_network(net: &Network) -> Result<Self> {
        let (f, n, t) = (*net.field(), net.n(), net.t());
        Ok(Self { low: CssCode::new(f, n, 2 * t)?, high: CssCode::new(f, n, 4 * t)? })
    }
}

#[derive(Clone, Debug)]
pub struct TopLevelSharing {
    pub dealer: PlayerId,
    pub kind: SharingKind,
    pub accepted: bool,
    /// Share `j` is held by player `j + 1`. Present iff accepted.
    pub block: Option<EncodedBlock>,
    /// Receivers whose reconstruction fell back to `|0⟩`.
    pub faults: Vec<PlayerId>,
}

fn discard_tree(net: &mut Network, sharing: &VqssSharing) -> Result<()> {
    if let Some(tree) = &sharing.tree {
        for w in tree.wires() {
            if let Some(p) = net.owner_of(w) {
                net.with_owned(p, &[w], |s, rng| s.discard(w, rng))?;
            }
        }
    }
    Ok(())
}

/// Shares one qupit under `top`: the dealer runs two-level sharings of the
/// secret, of `δ` proved `Σ_a |a⟩` and of `n - δ - 1` proved `|0⟩`; every
/// player applies the encoding matrix across the `n` sharings leaf by leaf,
/// and player `i` reconstructs sharing `i` as its share.
///
/// A rejected two-level sharing rejects the whole top-level sharing; the
/// wires dealt so far are released.
pub fn top_level_share(
    net: &mut Network,
    top: &CssCode,
    dealer: PlayerId,
    kind: SharingKind,
    input: Option<usize>,
) -> Result<TopLevelSharing> {
    let n = net.n();
    let f = *net.field();
    let inner = CssCode::new(f, n, 2 * net.t())?;
    let delta = top.delta();
    let mut sharings: Vec<VqssSharing> = Vec::with_capacity(n);
    for s in 0..n {
        let (k, inp) = match s {
            0 => (kind, input),
            s if s <= delta => (SharingKind::ProvedUniform, None),
            _ => (SharingKind::ProvedZero, None),
        };
        let sh = vqss_share(net, &inner, dealer, k, inp)?;
        if !sh.accepted {
            for done in &sharings {
                discard_tree(net, done)?;
            }
            net.record(EventKind::SetUpdate, Some(dealer), json!({ "top_level": "rejected", "sharing": s }));
            return Ok(TopLevelSharing { dealer, kind, accepted: false, block: None, faults: Vec::new() });
        }
        sharings.push(sh);
    }

    net.set_round(net.round() + 1);
    let m = top.encoding_matrix();
    for p in net.players() {
        let j = p.position();
        for i in 0..n {
            let wires: Vec<usize> = sharings
                .iter()
                .map(|sh| sh.tree.as_ref().unwrap().branches[i].wires[j])
                .collect();
            net.apply_linear(p, &wires, &m)?;
        }
    }

    let mut shares = Vec::with_capacity(n);
    let mut faults = Vec::new();
    for (i, sh) in sharings.iter().enumerate() {
        let receiver = PlayerId::at(i);
        let rec = vqss_reconstruct(net, sh, receiver)?;
        if rec.fault {
            faults.push(receiver);
        }
        shares.push(rec.wire);
    }
    let block = EncodedBlock { wires: shares, code: top.clone() };
    net.stage(Stage::Shared, &block.wires)?;
    Ok(TopLevelSharing { dealer, kind, accepted: true, block: Some(block), faults })
}

/// Outcome of measuring a shared block and decoding the broadcast word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BroadcastDecode {
    pub round: u32,
    pub word: Vec<Fe>,
    /// Value decoded by each honest player from its own view.
    pub per_player: Vec<(PlayerId, Fe)>,
    /// Agreed value (the first honest player's).
    pub value: Fe,
    /// Set when the word did not decode and `0` was substituted.
    pub fault: bool,
}

impl BroadcastDecode {
    pub fn honest_agree(&self) -> bool {
        self.per_player.iter().all(|&(_, v)| v == self.value)
    }
}

/// Every player measures its share and broadcasts the outcome; each honest
/// player decodes the broadcast word in the block code's computational
/// basis. An undecodable word yields `0` and a logged fault.
pub fn measurement_broadcast_decode(net: &mut Network, block: EncodedBlock) -> Result<BroadcastDecode> {
    let n = net.n();
    net.set_round(net.round() + 1);
    let round = net.round();
    let mut messages = Vec::with_capacity(n);
    for p in net.players() {
        let out = net.measure_batch(p, &[block.wires[p.position()]])?;
        messages.push((p, out));
    }
    net.broadcast_round(messages)?;
    let code = block.code.v_code().clone();
    let mut per_player = Vec::new();
    let mut fault = false;
    let mut word = Vec::new();
    for p in net.honest() {
        let mut seen: Vec<(PlayerId, Fe)> = net
            .view(p)
            .iter()
            .filter(|r| r.round == round)
            .map(|r| (r.from, r.values.first().copied().unwrap_or(0)))
            .collect();
        seen.sort_by_key(|&(q, _)| q);
        word = seen.iter().map(|&(_, v)| v).collect();
        let v = match code.decode(&word) {
            Ok(d) => d.secret,
            Err(_) => {
                fault = true;
                0
            }
        };
        per_player.push((p, v));
    }
    let value = per_player.first().map_or(0, |&(_, v)| v);
    let out = BroadcastDecode { round, word, per_player, value, fault };
    net.record(EventKind::SetUpdate, None, json!({ "broadcast_decode": &out }));
    Ok(out)
}

/// Applies a transversal Clifford gate: each player runs its position's
/// local gates. Fourier gates retag `blocks[0]`.
pub fn transversal(net: &mut Network, kind: GateKind, scalar: Fe, blocks: &mut [EncodedBlock]) -> Result<()> {
    let (per_position, code) = CssCode::transversal_gates(kind, scalar, blocks)?;
    for (j, gates) in per_position.iter().enumerate() {
        net.apply(PlayerId::at(j), gates)?;
    }
    blocks[0].code = code;
    Ok(())
}

/// Moves a degree-`4t` block into the proved `Σ_a |a⟩` ancilla.
pub fn degree_reduce(
    net: &mut Network,
    block: EncodedBlock,
    ancilla: EncodedBlock,
) -> Result<(EncodedBlock, BroadcastDecode)> {
    let mut pair = [ancilla, block];
    transversal(net, GateKind::Sum, 0, &mut pair)?;
    let [mut ancilla, block] = pair;
    let m = measurement_broadcast_decode(net, block)?;
    let f = *net.field();
    transversal(net, GateKind::ScalarMul, f.neg(1), std::slice::from_mut(&mut ancilla))?;
    transversal(net, GateKind::Shift, m.value, std::slice::from_mut(&mut ancilla))?;
    Ok((ancilla, m))
}

/// Fresh top-level ancillas a circuit consumes, in order of use.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AncillaPlan {
    /// Proved `|0⟩` in the degree-`4t` code, one per Toffoli.
    pub product_targets: usize,
    /// Proved `Σ_a |a⟩` in the degree-`2t` code, one per degree reduction.
    pub reducers: usize,
}

impl AncillaPlan {
    /// Walks the circuit tracking which code each wire is in. Toffoli
    /// controls and the control of a `Sum` into a low-degree target must
    /// be in the low-degree code and are reduced first when they are not.
    pub fn of(circuit: &LogicalCircuit) -> Self {
        let mut high = vec![false; circuit.num_wires];
        let mut plan = Self::default();
        for g in &circuit.gates {
            match *g {
                GateOp::Fourier { wire, .. } | GateOp::FourierInverse { wire, .. } => high[wire] = !high[wire],
                GateOp::Sum { control, target } if high[control] && !high[target] => {
                    plan.reducers += 1;
                    high[control] = false;
                }
                GateOp::Toffoli { a, b, target } => {
                    for w in [a, b] {
                        if high[w] {
                            plan.reducers += 1;
                            high[w] = false;
                        }
                    }
                    plan.product_targets += 1;
                    plan.reducers += 1;
                    high[target] = false;
                }
                _ => {}
            }
        }
        plan
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Replacement {
    pub caught: PlayerId,
    pub dealer: PlayerId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OutputShare {
    pub wire: usize,
    pub receiver: PlayerId,
    /// The receiver's physical output qupit.
    pub qupit: usize,
    /// Set when decoding failed and `|0⟩` was output.
    pub fault: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct MpqcRun {
    pub outputs: Vec<OutputShare>,
    pub caught: BTreeSet<PlayerId>,
    pub replacements: Vec<Replacement>,
    pub decodes: Vec<BroadcastDecode>,
    /// Degree of each logical wire's code after every gate.
    pub degrees: Vec<Vec<usize>>,
    pub plan: AncillaPlan,
    /// Reconstruction fallbacks during top-level sharing.
    pub share_faults: usize,
}

impl MpqcRun {
    pub fn honest_agree(&self) -> bool {
        self.decodes.iter().all(BroadcastDecode::honest_agree)
    }
}

struct Computation<'a> {
    codes: &'a MpqcCodes,
    run: MpqcRun,
}

impl Computation<'_> {
    fn next_dealer(&self, net: &Network) -> Result<PlayerId> {
        net.players()
            .into_iter()
            .find(|p| !self.run.caught.contains(p))
            .ok_or_else(|| Error::ConfigRejected("every player was caught cheating".into()))
    }

    /// Top-level sharing with replacement: a rejected dealer is caught and
    /// the lowest uncaught player shares a proved state instead.
    fn share(
        &mut self,
        net: &mut Network,
        top: &CssCode,
        dealer: PlayerId,
        kind: SharingKind,
        input: Option<usize>,
    ) -> Result<EncodedBlock> {
        let (mut dealer, mut kind, mut input) = (dealer, kind, input);
        loop {
            let tls = top_level_share(net, top, dealer, kind, input)?;
            self.run.share_faults += tls.faults.len();
            if let Some(block) = tls.block {
                return Ok(block);
            }
            self.run.caught.insert(dealer);
            if self.run.caught.len() > net.t() {
                return Err(Error::ConfigRejected(format!("more than t = {} dealers caught", net.t())));
            }
            let next = self.next_dealer(net)?;
            self.run.replacements.push(Replacement { caught: dealer, dealer: next });
            net.record(EventKind::SetUpdate, None, json!({ "caught": dealer, "replacement_dealer": next }));
            if kind == SharingKind::Plain {
                kind = SharingKind::ProvedZero;
            }
            (dealer, input) = (next, None);
        }
    }

    fn ancilla(&mut self, net: &mut Network, top: &CssCode, kind: SharingKind) -> Result<EncodedBlock> {
        let dealer = self.next_dealer(net)?;
        self.share(net, top, dealer, kind, None)
    }

    fn reduce(&mut self, net: &mut Network, block: EncodedBlock, reducers: &mut Vec<EncodedBlock>) -> Result<EncodedBlock> {
        if block.code.delta() == self.codes.low.delta() {
            return Ok(block);
        }
        let anc = reducers.pop().expect("planned reducer");
        let (out, d) = degree_reduce(net, block, anc)?;
        self.run.decodes.push(d);
        Ok(out)
    }
}

/// Runs `circuit` on the network. `inputs[k]` is the qupit holding the
/// `k`-th input wire (in wire order), already owned by its player.
pub fn mpqc_run(net: &mut Network, circuit: &LogicalCircuit, inputs: &[usize]) -> Result<MpqcRun> {
    circuit.validate(net.field(), net.n())?;
    let declared = circuit.inputs();
    if declared.len() != inputs.len() {
        return Err(Error::InvalidCircuit(format!("{} inputs declared, {} given", declared.len(), inputs.len())));
    }
    let codes = MpqcCodes::for_network(net)?;
    let plan = AncillaPlan::of(circuit);
    let mut cx = Computation { codes: &codes, run: MpqcRun { plan: plan.clone(), ..MpqcRun::default() } };

    // input phase
    let mut blocks: Vec<Option<EncodedBlock>> = vec![None; circuit.num_wires];
    for (&(w, p), &q) in declared.iter().zip(inputs) {
        blocks[w] = Some(cx.share(net, &codes.low, p, SharingKind::Plain, Some(q))?);
    }
    for w in circuit.ancillas() {
        blocks[w] = Some(cx.ancilla(net, &codes.low, SharingKind::ProvedZero)?);
    }
    let mut targets = Vec::with_capacity(plan.product_targets);
    for _ in 0..plan.product_targets {
        targets.push(cx.ancilla(net, &codes.high, SharingKind::ProvedZero)?);
    }
    let mut reducers = Vec::with_capacity(plan.reducers);
    for _ in 0..plan.reducers {
        reducers.push(cx.ancilla(net, &codes.low, SharingKind::ProvedUniform)?);
    }
    targets.reverse();
    reducers.reverse();
    let mut blocks: Vec<EncodedBlock> = blocks.into_iter().map(|b| b.expect("every wire declared")).collect();

    // computation phase
    for (gi, g) in circuit.gates.iter().enumerate() {
        net.set_round(net.round() + 1);
        let f = *net.field();
        match *g {
            GateOp::Shift { wire, c } => transversal(net, GateKind::Shift, c, &mut blocks[wire..=wire])?,
            GateOp::ScalarMul { wire, c } => transversal(net, GateKind::ScalarMul, c, &mut blocks[wire..=wire])?,
            GateOp::PhaseShift { wire, c } => transversal(net, GateKind::PhaseShift, c, &mut blocks[wire..=wire])?,
            GateOp::Fourier { wire, r } => transversal(net, GateKind::Fourier, r, &mut blocks[wire..=wire])?,
            GateOp::FourierInverse { wire, r } => {
                transversal(net, GateKind::FourierInverse, r, &mut blocks[wire..=wire])?
            }
            GateOp::Sum { control, target } => {
                if blocks[control].code.delta() > blocks[target].code.delta() {
                    let b = blocks[control].clone();
                    blocks[control] = cx.reduce(net, b, &mut reducers)?;
                }
                let mut pair = [blocks[control].clone(), blocks[target].clone()];
                transversal(net, GateKind::Sum, 0, &mut pair)?;
            }
            GateOp::Toffoli { a, b, target } => {
                for w in [a, b] {
                    let blk = blocks[w].clone();
                    blocks[w] = cx.reduce(net, blk, &mut reducers)?;
                }
                let mut z = targets.pop().expect("planned product target");
                // teleport the target into the high-degree block
                let mut pair = [blocks[target].clone(), z.clone()];
                transversal(net, GateKind::Sum, 0, &mut pair)?;
                let mut old = blocks[target].clone();
                transversal(net, GateKind::Fourier, 1, std::slice::from_mut(&mut old))?;
                let d = measurement_broadcast_decode(net, old)?;
                transversal(net, GateKind::PhaseShift, f.neg(d.value), std::slice::from_mut(&mut z))?;
                cx.run.decodes.push(d);
                // share-wise products
                let layer: Vec<(PlayerId, GateOp)> = net
                    .players()
                    .into_iter()
                    .map(|p| {
                        let j = p.position();
                        let g = GateOp::Toffoli { a: blocks[a].wires[j], b: blocks[b].wires[j], target: z.wires[j] };
                        (p, g)
                    })
                    .collect();
                net.apply_layer(&layer)?;
                let anc = reducers.pop().expect("planned reducer");
                let (out, d) = degree_reduce(net, z, anc)?;
                cx.run.decodes.push(d);
                blocks[target] = out;
            }
        }
        cx.run.degrees.push(blocks.iter().map(|b| b.code.delta()).collect());
        let live: Vec<usize> = blocks.iter().flat_map(|b| b.wires.iter().copied()).collect();
        net.stage(Stage::Gate(gi), &live)?;
    }

    // output phase
    net.set_round(net.round() + 1);
    let outputs: BTreeSet<usize> = circuit.outputs.iter().map(|&(w, _)| w).collect();
    for (w, blk) in blocks.iter().enumerate() {
        if !outputs.contains(&w) {
            for p in net.players() {
                net.measure_batch(p, &[blk.wires[p.position()]])?;
            }
        }
    }
    for &(w, receiver) in &circuit.outputs {
        let blk = blocks[w].clone();
        for p in net.players() {
            if p != receiver {
                net.send(p, receiver, &[blk.wires[p.position()]])?;
            }
        }
        let code = blk.code.clone();
        let attempt = {
            let blk = blk.clone();
            net.with_owned(receiver, &blk.wires.clone(), |s, rng| code.decode_d(s, blk, rng))
        };
        let (qupit, fault) = match attempt {
            Ok(out) => (out.logical, false),
            Err(Error::Core(_)) => {
                for &q in &blk.wires {
                    if net.owner_of(q) == Some(receiver) {
                        net.with_owned(receiver, &[q], |s, rng| s.discard(q, rng))?;
                    }
                }
                (net.allocate(receiver, 1)?[0], true)
            }
            Err(e) => return Err(e),
        };
        net.record(EventKind::SetUpdate, Some(receiver), json!({ "output": w, "fault": fault }));
        cx.run.outputs.push(OutputShare { wire: w, receiver, qupit, fault });
    }
    Ok(cx.run)
}

/// Result of [`mpqc_run_basis`].
#[derive(Clone, Debug, Serialize)]
pub struct BasisOutcome {
    pub run: MpqcRun,
    /// `(wire, measured value)` for every output, measured by its receiver.
    pub values: Vec<(usize, Fe)>,
}

/// Gives each input player the basis state `values[k]` for its `k`-th
/// declared input, runs the circuit and has receivers measure outputs.
pub fn mpqc_run_basis(net: &mut Network, circuit: &LogicalCircuit, values: &[Fe]) -> Result<BasisOutcome> {
    let declared = circuit.inputs();
    if declared.len() != values.len() {
        return Err(Error::InvalidCircuit(format!("{} inputs declared, {} values given", declared.len(), values.len())));
    }
    let mut qupits = Vec::with_capacity(values.len());
    for (&(_, p), &v) in declared.iter().zip(values) {
        let q = net.environment(1)[0];
        if v % net.field().p() != 0 {
            net.state_mut().apply(&GateOp::Shift { wire: q, c: v })?;
        }
        net.give(q, p)?;
        qupits.push(q);
    }
    let run = mpqc_run(net, circuit, &qupits)?;
    let mut out = Vec::with_capacity(run.outputs.len());
    for o in &run.outputs {
        let v = net.measure_batch(o.receiver, &[o.qupit])?[0];
        out.push((o.wire, v));
    }
    Ok(BasisOutcome { run, values: out })
}

/// Inputs of a circuit as `(wire, player)`, for callers building inputs.
pub fn input_players(circuit: &LogicalCircuit) -> Vec<(usize, PlayerId)> {
    circuit
        .roles
        .iter()
        .enumerate()
        .filter_map(|(w, r)| match r {
            WireRole::Input(p) => Some((w, *p)),
            WireRole::Ancilla => None,
        })
        .collect()
}
