//! Two-level verifiable sharing of a qupit with cut-and-choose checks in
//! both bases, and reconstruction by a designated receiver.
//!
//! Systems `S_{l,m}` are dealt lazily: each check system is prepared right
//! before it is consumed and measured, so only the `k + 1` control trees and
//! one check tree are alive at a time. Checks on distinct systems commute,
//! and the adversary only ever sees coins and broadcasts of rounds it has
//! reached, so this ordering is indistinguishable from dealing everything
//! up front.

use std::collections::BTreeSet;

use qss_core::css::{CssCode, EncodedBlock};
use qss_core::gate::GateOp;
use qss_core::rs::{for_each_subset, two_good_check, ReedSolomonCode};
use qss_core::sim::state::QuantumState;
use qss_core::Fe;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::adversary::{EncodeEvent, Stage};
use crate::error::Result;
use crate::net::{EventKind, Network, PlayerId};

/// Index `(l, m)` of a dealt system `S_{l,m}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SystemLabel {
    pub l: usize,
    pub m: usize,
}

impl SystemLabel {
    /// `S_{0,0}`, the system carrying the secret.
    pub const DATA: SystemLabel = SystemLabel { l: 0, m: 0 };

    pub fn new(l: usize, m: usize) -> Self {
        Self { l, m }
    }
}

/// Which encoding a block belongs to in the share tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    /// The dealer's encoding of the system.
    Root,
    /// A player's re-encoding of its root component.
    Branch(PlayerId),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharingKind {
    /// Share the dealer's input wire.
    #[default]
    Plain,
    /// Share `|0⟩` and prove it.
    ProvedZero,
    /// Share `Σ_a |a⟩` and prove it.
    ProvedUniform,
}

#[derive(Clone, Copy, Debug)]
enum Prep {
    Input(usize),
    Zero,
    Uniform,
}

impl SharingKind {
    fn prep(self, label: SystemLabel, input: Option<usize>) -> Prep {
        match (self, label.l, label.m) {
            (SharingKind::Plain, 0, 0) => Prep::Input(input.expect("plain sharing needs an input")),
            (SharingKind::Plain, 0, _) => Prep::Uniform,
            (SharingKind::Plain, _, _) | (SharingKind::ProvedZero, _, _) => Prep::Zero,
            (SharingKind::ProvedUniform, _, _) => Prep::Uniform,
        }
    }
}

/// Apparent cheaters, as 0-based positions: `b` holds branches (the
/// dealer's set), `leaves[i]` the leaves of branch `i`. Both only grow.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CheaterSets {
    pub b: BTreeSet<usize>,
    pub leaves: Vec<BTreeSet<usize>>,
}

impl CheaterSets {
    pub fn new(n: usize) -> Self {
        Self { b: BTreeSet::new(), leaves: vec![BTreeSet::new(); n] }
    }

    pub fn is_clean(&self) -> bool {
        self.b.is_empty() && self.leaves.iter().all(BTreeSet::is_empty)
    }
}

/// Result of checking one round of broadcast words.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckReport {
    /// Decoded value of every branch not in `B`.
    pub branch_values: Vec<Option<Fe>>,
    /// Value of the decoded root word, if it decoded.
    pub root_value: Option<Fe>,
    pub root_failure: bool,
}

/// Folds one set of broadcast words (`words[i][j]`: leaf `j` of branch `i`)
/// into the cheater sets. A branch joins `B` when its word does not decode
/// or its cumulative leaf set exceeds `t`; root-level error positions join
/// `B` as well.
pub fn update_cheater_sets(
    words: &[Vec<Fe>],
    code: &ReedSolomonCode,
    t: usize,
    sets: &mut CheaterSets,
) -> CheckReport {
    let n = code.n();
    let mut report = CheckReport { branch_values: vec![None; n], ..CheckReport::default() };
    for (i, word) in words.iter().enumerate() {
        if sets.b.contains(&i) {
            continue;
        }
        match code.decode(word) {
            Ok(d) => {
                sets.leaves[i].extend(d.error_positions.iter().copied());
                if sets.leaves[i].len() > t {
                    sets.b.insert(i);
                } else {
                    report.branch_values[i] = Some(d.secret);
                }
            }
            Err(_) => {
                sets.b.insert(i);
            }
        }
    }
    if sets.b.len() > t {
        return report;
    }
    let root: Vec<Fe> = report.branch_values.iter().map(|v| v.unwrap_or(0)).collect();
    match code.decode_with_erasures(&root, &sets.b) {
        Ok(d) => {
            sets.b.extend(d.error_positions.iter().copied());
            report.root_value = Some(d.secret);
        }
        Err(_) => report.root_failure = true,
    }
    report
}

/// The surviving share tree: `branches[i]` is `S_{0,0,i}`, whose position
/// `j` is held by player `j + 1`.
#[derive(Clone, Debug)]
pub struct ShareTree {
    pub code: CssCode,
    pub branches: Vec<EncodedBlock>,
}

impl ShareTree {
    pub fn wires(&self) -> Vec<usize> {
        self.branches.iter().flat_map(|b| b.wires.iter().copied()).collect()
    }

    /// Leaves held by player `p`, one per branch.
    pub fn leaves_of(&self, p: PlayerId) -> Vec<usize> {
        self.branches.iter().map(|b| b.wires[p.position()]).collect()
    }
}

#[derive(Clone, Debug)]
pub struct VqssSharing {
    pub dealer: PlayerId,
    pub kind: SharingKind,
    pub sets: CheaterSets,
    pub accepted: bool,
    /// Present iff accepted.
    pub tree: Option<ShareTree>,
    /// First round of this instance.
    pub first_round: u32,
}

const DEAL: u32 = 1;
const BRANCH: u32 = 2;
const CHECK: u32 = 3;
const FOURIER_CHECK: u32 = 4;
const ROTATE_BACK: u32 = 5;
/// Rounds used by one sharing.
pub const SHARING_ROUNDS: u32 = 5;

struct Instance<'c> {
    code: &'c CssCode,
    dealer: PlayerId,
    kind: SharingKind,
    base: u32,
}

impl Instance<'_> {
    fn deal(&self, net: &mut Network, label: SystemLabel, input: Option<usize>) -> Result<Vec<EncodedBlock>> {
        let n = net.n();
        let code = self.code;
        let dealer = self.dealer;
        net.set_round(self.base + DEAL);
        let root = match self.kind.prep(label, input) {
            Prep::Input(w) => net.with_owned(dealer, &[w], |s, _| code.encode(s, w))?,
            Prep::Zero => net.with_owned(dealer, &[], |s, _| code.encode_value(s, 0))?,
            Prep::Uniform => net.with_owned(dealer, &[], |s, _| code.encode_uniform(s))?,
        };
        net.encoded(&EncodeEvent {
            player: dealer,
            dealer,
            system: label,
            level: Level::Root,
            kind: self.kind,
            code,
            block: &root,
        })?;
        for (i, &w) in root.wires.iter().enumerate() {
            let p = PlayerId::at(i);
            if p != dealer {
                net.send(dealer, p, &[w])?;
            }
        }
        net.set_round(self.base + BRANCH);
        let mut branches = Vec::with_capacity(n);
        for (i, &w) in root.wires.iter().enumerate() {
            let p = PlayerId::at(i);
            let block = net.with_owned(p, &[w], |s, _| code.encode(s, w))?;
            net.encoded(&EncodeEvent {
                player: p,
                dealer,
                system: label,
                level: Level::Branch(p),
                kind: self.kind,
                code,
                block: &block,
            })?;
            for (j, &leaf) in block.wires.iter().enumerate() {
                let q = PlayerId::at(j);
                if q != p {
                    net.send(p, q, &[leaf])?;
                }
            }
            branches.push(block);
        }
        let all: Vec<usize> = branches.iter().flat_map(|b| b.wires.iter().copied()).collect();
        net.stage(Stage::Distributed(label), &all)?;
        Ok(branches)
    }

    /// Each player adds `b` times its control leaves into its target leaves,
    /// measures the targets and broadcasts. Returns `words[i][j]`.
    fn check(
        &self,
        net: &mut Network,
        control: &[EncodedBlock],
        target: &[EncodedBlock],
        b: Fe,
    ) -> Result<Vec<Vec<Fe>>> {
        let n = net.n();
        let add = vec![vec![1, 0], vec![b, 1]];
        let mut messages = Vec::with_capacity(n);
        for p in net.players() {
            let j = p.position();
            if b != 0 {
                for i in 0..n {
                    net.apply_linear(p, &[control[i].wires[j], target[i].wires[j]], &add)?;
                }
            }
            let leaves: Vec<usize> = target.iter().map(|blk| blk.wires[j]).collect();
            messages.push((p, net.measure_batch(p, &leaves)?));
        }
        let delivered = net.broadcast_round(messages)?;
        Ok((0..n).map(|i| (0..n).map(|j| delivered[j][i]).collect()).collect())
    }

    fn rotate(&self, net: &mut Network, trees: &[&[EncodedBlock]], inverse: bool) -> Result<()> {
        for p in net.players() {
            let j = p.position();
            let gates: Vec<GateOp> = trees
                .iter()
                .flat_map(|t| t.iter())
                .map(|blk| {
                    let wire = blk.wires[j];
                    if inverse {
                        GateOp::FourierInverse { wire, r: 1 }
                    } else {
                        GateOp::Fourier { wire, r: 1 }
                    }
                })
                .collect();
            net.apply(p, &gates)?;
        }
        Ok(())
    }

    /// Updates the sets and decides whether the dealer is still in.
    fn judge(
        &self,
        net: &mut Network,
        words: &[Vec<Fe>],
        code: &ReedSolomonCode,
        sets: &mut CheaterSets,
        require_zero: bool,
    ) -> bool {
        let t = net.t();
        let report = update_cheater_sets(words, code, t, sets);
        let proof_failed = require_zero && report.root_value.is_some_and(|v| v != 0);
        let ok = sets.b.len() <= t && !report.root_failure && !proof_failed;
        net.record(
            EventKind::SetUpdate,
            None,
            json!({
                "b": sets.b.iter().map(|&i| PlayerId::at(i)).collect::<Vec<_>>(),
                "leaves": sets.leaves.iter()
                    .map(|s| s.iter().map(|&j| PlayerId::at(j)).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
                "root_failure": report.root_failure,
                "proof_failed": proof_failed,
            }),
        );
        ok
    }
}

/// Releases wires after an aborted instance (each holder measures its own).
fn release(net: &mut Network, trees: &[Vec<EncodedBlock>]) -> Result<()> {
    for blk in trees.iter().flatten() {
        for &w in &blk.wires {
            if let Some(p) = net.owner_of(w) {
                net.with_owned(p, &[w], |s, rng| s.discard(w, rng))?;
            }
        }
    }
    Ok(())
}

/// Runs the sharing and verification phases. `input` is the dealer's wire
/// for [`SharingKind::Plain`] and ignored otherwise. The sharing is
/// rejected as soon as `|B| > t`, the root word fails to decode or a proof
/// check fails; the instance then halts and its wires are released.
pub fn vqss_share(
    net: &mut Network,
    code: &CssCode,
    dealer: PlayerId,
    kind: SharingKind,
    input: Option<usize>,
) -> Result<VqssSharing> {
    let n = net.n();
    let k = net.config().k;
    let base = net.round();
    let inst = Instance { code, dealer, kind, base };
    let v = code.v_code().clone();
    let w = code.w_code();
    let mut sets = CheaterSets::new(n);
    let mut live: Vec<Vec<EncodedBlock>> = Vec::new();
    let reject = |net: &mut Network, live: &[Vec<EncodedBlock>], sets: CheaterSets| -> Result<VqssSharing> {
        release(net, live)?;
        net.set_round(base + SHARING_ROUNDS);
        Ok(VqssSharing { dealer, kind, sets, accepted: false, tree: None, first_round: base + 1 })
    };

    net.set_round(base + CHECK);
    let coins = net.public_coin(k);
    for l in 0..=k {
        let control = inst.deal(net, SystemLabel::new(l, 0), input)?;
        live.push(control);
        for (m, &b) in (1..=k).zip(&coins) {
            let target = inst.deal(net, SystemLabel::new(l, m), None)?;
            net.set_round(base + CHECK);
            let words = inst.check(net, &live[l], &target, b)?;
            let zero = kind == SharingKind::ProvedZero;
            if !inst.judge(net, &words, &v, &mut sets, zero) {
                return reject(net, &live, sets);
            }
        }
    }

    net.set_round(base + FOURIER_CHECK);
    let trees: Vec<&[EncodedBlock]> = live.iter().map(Vec::as_slice).collect();
    inst.rotate(net, &trees, false)?;
    let coins = net.public_coin(k);
    for (l, &b) in (1..=k).zip(&coins) {
        let (data, rest) = live.split_at_mut(1);
        let target = std::mem::take(&mut rest[l - 1]);
        let words = inst.check(net, &data[0], &target, b)?;
        let uniform = kind == SharingKind::ProvedUniform;
        if !inst.judge(net, &words, &w, &mut sets, uniform) {
            return reject(net, &live, sets);
        }
    }

    net.set_round(base + ROTATE_BACK);
    inst.rotate(net, &[&live[0]], true)?;
    let branches = live.swap_remove(0);
    let tree = ShareTree { code: code.clone(), branches };
    net.stage(Stage::Shared, &tree.wires())?;
    Ok(VqssSharing { dealer, kind, sets, accepted: true, tree: Some(tree), first_round: base + 1 })
}

#[derive(Clone, Debug)]
pub struct Reconstruction {
    /// The receiver's output qupit.
    pub wire: usize,
    /// Cheater sets after the receiver's own checks.
    pub sets: CheaterSets,
    /// Chosen `B̃_i` per branch (`None` for branches in `B`).
    pub neighborhoods: Vec<Option<BTreeSet<usize>>>,
    /// Set when too few branches survived and `|0⟩` was output instead.
    pub fault: bool,
}

/// Smallest `B̃ ⊇ base` with `|B̃| ≤ t` whose neighborhood contains the block.
fn find_neighborhood(
    state: &QuantumState,
    code: &CssCode,
    block: &EncodedBlock,
    base: &BTreeSet<usize>,
    t: usize,
) -> Result<Option<BTreeSet<usize>>> {
    if base.len() > t {
        return Ok(None);
    }
    let free: Vec<usize> = (0..code.n()).filter(|j| !base.contains(j)).collect();
    for extra in 0..=(t - base.len()) {
        let mut found = None;
        let mut failure = None;
        for_each_subset(&free, extra, &mut |more| {
            let mut cand = base.clone();
            cand.extend(more.iter().copied());
            match code.cb_member(state, block, &cand) {
                Ok(true) => {
                    found = Some(cand);
                    false
                }
                Ok(false) => true,
                Err(e) => {
                    failure = Some(e);
                    false
                }
            }
        });
        if let Some(e) = failure {
            return Err(e.into());
        }
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

/// Every player sends its leaves to `receiver`, who locates each branch's
/// neighborhood, decodes it and interpolates the root from the first
/// `n - 2t` surviving branches.
pub fn vqss_reconstruct(net: &mut Network, sharing: &VqssSharing, receiver: PlayerId) -> Result<Reconstruction> {
    let tree = sharing
        .tree
        .as_ref()
        .ok_or_else(|| crate::error::Error::InvalidCircuit("reconstruction of a rejected sharing".into()))?;
    let code = &tree.code;
    let n = net.n();
    let t = net.t();
    let mut sets = sharing.sets.clone();
    net.set_round(net.round() + 1);
    for p in net.players() {
        if p != receiver {
            net.send(p, receiver, &tree.leaves_of(p))?;
        }
    }

    let mut outputs: Vec<Option<usize>> = vec![None; n];
    let mut neighborhoods = vec![None; n];
    for (i, block) in tree.branches.iter().enumerate() {
        if sets.b.contains(&i) {
            continue;
        }
        match find_neighborhood(net.state(), code, block, &sets.leaves[i], t)? {
            Some(nb) => {
                let blk = block.clone();
                let out = net.with_owned(receiver, &block.wires, |s, rng| code.decode_d(s, blk, rng))?;
                outputs[i] = Some(out.logical);
                neighborhoods[i] = Some(nb);
            }
            None => {
                sets.b.insert(i);
            }
        }
    }
    for (i, block) in tree.branches.iter().enumerate() {
        if outputs[i].is_none() {
            for &w in &block.wires {
                net.with_owned(receiver, &[w], |s, rng| s.discard(w, rng))?;
            }
        }
    }

    let need = n - code.delta();
    let alive: Vec<(usize, usize)> = outputs.iter().enumerate().filter_map(|(i, w)| w.map(|w| (i, w))).collect();
    let fault = alive.len() < need;
    let wire = if fault {
        for &(_, w) in &alive {
            net.with_owned(receiver, &[w], |s, rng| s.discard(w, rng))?;
        }
        net.allocate(receiver, 1)?[0]
    } else {
        for &(_, w) in &alive[need..] {
            net.with_owned(receiver, &[w], |s, rng| s.discard(w, rng))?;
        }
        let kept = alive[..need].to_vec();
        let wires: Vec<usize> = kept.iter().map(|&(_, w)| w).collect();
        net.with_owned(receiver, &wires, |s, rng| code.recover_subset(s, &kept, rng))?
    };
    net.record(
        EventKind::SetUpdate,
        Some(receiver),
        json!({ "b": sets.b.iter().map(|&i| PlayerId::at(i)).collect::<Vec<_>>(), "fault": fault }),
    );
    Ok(Reconstruction { wire, sets, neighborhoods, fault })
}

/// Ideal two-level recovery using knowledge of the corrupt set: erasure
/// interpolation over the first `n - 2t` honest branches outside `B`, each
/// from its first `n - 2t` honest leaves outside `B_i`. Only honest
/// players' wires are touched; it is an analysis oracle, not a protocol
/// step, so it works on the state directly.
pub fn ideal_interpolation_tree(net: &mut Network, sharing: &VqssSharing) -> Result<usize> {
    let tree = sharing
        .tree
        .as_ref()
        .ok_or_else(|| crate::error::Error::InvalidCircuit("ideal recovery of a rejected sharing".into()))?;
    let code = &tree.code;
    let n = net.n();
    let need = n - code.delta();
    let corrupt = net.config().corrupt_positions();
    let branches: Vec<usize> = (0..n)
        .filter(|i| !sharing.sets.b.contains(i) && !corrupt.contains(i))
        .take(need)
        .collect();
    if branches.len() < need {
        return Err(crate::error::Error::InvalidCircuit("too few honest branches outside B".into()));
    }
    let mut roots = Vec::with_capacity(need);
    for &i in &branches {
        let block = &tree.branches[i];
        let kept: Vec<(usize, usize)> = (0..n)
            .filter(|j| !sharing.sets.leaves[i].contains(j) && !corrupt.contains(j))
            .take(need)
            .map(|j| (j, block.wires[j]))
            .collect();
        for &(_, w) in &kept {
            assert!(net.owner_of(w).is_some_and(|p| !net.is_corrupt(p)), "ideal recovery touched a corrupt wire");
        }
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        roots.push((i, code.recover_subset(net.state_mut(), &kept, &mut rng)?));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(0);
    Ok(code.recover_subset(net.state_mut(), &roots, &mut rng)?)
}

/// Test oracle: measures a copy of the state in the computational basis and
/// another copy in the Fourier basis, and checks that both share trees are
/// 2-GOOD for the current cheater sets.
pub fn two_good_quantum_check(net: &Network, sharing: &VqssSharing, seed: u64) -> Result<bool> {
    let Some(tree) = sharing.tree.as_ref() else {
        return Ok(false);
    };
    let code = &tree.code;
    let corrupt = net.config().corrupt_positions();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut holds = true;
    for (fourier, classical) in [(false, code.v_code().clone()), (true, code.w_code())] {
        let mut s = net.state().clone();
        let mut words = Vec::with_capacity(tree.branches.len());
        for blk in &tree.branches {
            let mut word = Vec::with_capacity(blk.wires.len());
            for &wire in &blk.wires {
                if fourier {
                    s.apply(&GateOp::Fourier { wire, r: 1 })?;
                }
                word.push(s.measure(wire, &mut rng)?);
            }
            words.push(word);
        }
        let report = two_good_check(&words, &classical, &sharing.sets.b, &sharing.sets.leaves, &corrupt);
        holds &= report.holds();
    }
    Ok(holds)
}
