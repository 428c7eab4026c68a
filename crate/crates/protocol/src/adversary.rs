//! Adversary interposition: a restricted handle on the global state and the
//! shipped cheating strategies.

use std::collections::{BTreeMap, BTreeSet};

use qss_core::css::{CssCode, EncodedBlock};
use qss_core::gate::GateOp;
use qss_core::pauli::PauliOperator;
use qss_core::sim::state::QuantumState;
use qss_core::{Fe, PrimeField};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::net::{BroadcastRecord, EventKind, PlayerId, TranscriptEvent};
use crate::vqss::{Level, SharingKind, SystemLabel};

/// The adversary's view of the network during a callback. Every operation
/// is checked against wire ownership: only wires held by corrupt players
/// can be read or changed.
pub struct Adversary<'a> {
    state: &'a mut QuantumState,
    owner: &'a mut Vec<Option<PlayerId>>,
    corrupt: &'a BTreeSet<PlayerId>,
    rng: &'a mut ChaCha20Rng,
    events: &'a mut Vec<TranscriptEvent>,
    views: &'a [BroadcastRecord],
    coins: &'a [(u32, Vec<Fe>)],
    round: u32,
}

impl<'a> Adversary<'a> {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        state: &'a mut QuantumState,
        owner: &'a mut Vec<Option<PlayerId>>,
        corrupt: &'a BTreeSet<PlayerId>,
        rng: &'a mut ChaCha20Rng,
        events: &'a mut Vec<TranscriptEvent>,
        views: &'a [BroadcastRecord],
        coins: &'a [(u32, Vec<Fe>)],
        round: u32,
    ) -> Self {
        Self { state, owner, corrupt, rng, events, views, coins, round }
    }

    pub fn field(&self) -> PrimeField {
        *self.state.field()
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn corrupt(&self) -> &BTreeSet<PlayerId> {
        self.corrupt
    }

    pub fn rng(&mut self) -> &mut ChaCha20Rng {
        self.rng
    }

    fn holder(&self, wire: usize) -> Option<PlayerId> {
        self.owner.get(wire).copied().flatten().filter(|p| self.corrupt.contains(p))
    }

    /// All wires currently held by corrupt players.
    pub fn held_wires(&self) -> Vec<usize> {
        (0..self.owner.len()).filter(|&w| self.holder(w).is_some()).collect()
    }

    pub fn held_by(&self, p: PlayerId) -> Vec<usize> {
        if !self.corrupt.contains(&p) {
            return Vec::new();
        }
        (0..self.owner.len()).filter(|&w| self.owner[w] == Some(p)).collect()
    }

    fn check(&self, wire: usize) -> Result<()> {
        match self.holder(wire) {
            Some(_) => Ok(()),
            None => Err(Error::OwnershipViolation { wire, holder: "a corrupt player".into() }),
        }
    }

    fn log(&mut self, actor: Option<PlayerId>, payload: Value) {
        self.events.push(TranscriptEvent {
            round: self.round,
            kind: EventKind::AdversaryAction,
            actor,
            payload,
        });
    }

    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        let wires = gate.wires();
        for &w in &wires {
            self.check(w)?;
        }
        self.state.apply(gate)?;
        let actor = self.holder(wires[0]);
        self.log(actor, json!({ "gate": gate.to_string() }));
        Ok(())
    }

    /// Applies `X^x Z^z` to one held wire.
    pub fn apply_pauli(&mut self, wire: usize, x: Fe, z: Fe) -> Result<()> {
        self.check(wire)?;
        let op = PauliOperator::single(self.state.num_qupits(), wire, x, z);
        self.state.apply_pauli(&op)?;
        let actor = self.holder(wire);
        self.log(actor, json!({ "pauli": { "wire": wire, "x": x, "z": z } }));
        Ok(())
    }

    /// A private ancilla in `|0⟩` held by corrupt player `p`.
    pub fn allocate(&mut self, p: PlayerId) -> Result<usize> {
        if !self.corrupt.contains(&p) {
            return Err(Error::NotAllowed { player: p, action: "receive adversary ancillas".into() });
        }
        let w = self.state.allocate(1)[0];
        if self.owner.len() < self.state.num_qupits() {
            self.owner.resize(self.state.num_qupits(), None);
        }
        self.owner[w] = Some(p);
        self.log(Some(p), json!({ "allocate": w }));
        Ok(w)
    }

    pub fn measure(&mut self, wire: usize) -> Result<Fe> {
        self.check(wire)?;
        let out = self.state.measure(wire, &mut *self.rng)?;
        let actor = self.holder(wire);
        self.log(actor, json!({ "measure": wire, "outcome": out }));
        Ok(out)
    }

    /// Broadcasts delivered up to the current round.
    pub fn broadcasts(&self) -> impl Iterator<Item = &BroadcastRecord> {
        let round = self.round;
        self.views.iter().filter(move |r| r.round <= round)
    }

    /// Public coins published up to the current round.
    pub fn coins(&self) -> Vec<Fe> {
        self.coins
            .iter()
            .filter(|(r, _)| *r <= self.round)
            .flat_map(|(_, v)| v.iter().copied())
            .collect()
    }
}

/// Where in a protocol an adversary callback fires.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// A two-level system has just been distributed.
    Distributed(SystemLabel),
    /// A sharing finished verification; shares are at rest.
    Shared,
    /// After gate `i` of a distributed computation.
    Gate(usize),
}

/// A corrupt player has just encoded a block it is about to distribute.
pub struct EncodeEvent<'a> {
    pub player: PlayerId,
    pub dealer: PlayerId,
    pub system: SystemLabel,
    pub level: Level,
    pub kind: SharingKind,
    pub code: &'a CssCode,
    pub block: &'a EncodedBlock,
}

/// Behavior of the corrupt players. Callbacks default to honest behavior.
pub trait Strategy: Send {
    fn name(&self) -> &'static str;

    fn boxed_clone(&self) -> Box<dyn Strategy>;

    fn on_encoded(&mut self, _adv: &mut Adversary<'_>, _ev: &EncodeEvent<'_>) -> Result<()> {
        Ok(())
    }

    fn on_send(&mut self, _adv: &mut Adversary<'_>, _from: PlayerId, _to: PlayerId, _wires: &[usize]) -> Result<()> {
        Ok(())
    }

    fn on_broadcast(&mut self, _adv: &mut Adversary<'_>, _from: PlayerId, _values: &mut Vec<Fe>) -> Result<()> {
        Ok(())
    }

    fn on_stage(&mut self, _adv: &mut Adversary<'_>, _stage: Stage, _held: &[usize]) -> Result<()> {
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct Honest;

impl Strategy for Honest {
    fn name(&self) -> &'static str {
        "honest"
    }

    fn boxed_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }
}

/// Applies `X^x Z^z` to every held share at the end of every stage; random
/// exponents when not fixed.
#[derive(Clone, Debug, Default)]
pub struct PauliTamper {
    pub fixed: Option<(Fe, Fe)>,
}

impl Strategy for PauliTamper {
    fn name(&self) -> &'static str {
        "pauli_tamper"
    }

    fn boxed_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }

    fn on_stage(&mut self, adv: &mut Adversary<'_>, _stage: Stage, held: &[usize]) -> Result<()> {
        let p = adv.field().p();
        for &w in held {
            let (x, z) = match self.fixed {
                Some(xz) => xz,
                None => (adv.rng().gen_range(0..p), adv.rng().gen_range(0..p)),
            };
            if (x, z) != (0, 0) {
                adv.apply_pauli(w, x, z)?;
            }
        }
        Ok(())
    }
}

/// Corrupt dealer whose own branch of the data system is re-encoded with
/// errors on two honest leaves, a word at distance 2 from `V`.
#[derive(Clone, Debug)]
pub struct BadBranchDealer {
    pub error: Fe,
}

impl Default for BadBranchDealer {
    fn default() -> Self {
        Self { error: 1 }
    }
}

impl Strategy for BadBranchDealer {
    fn name(&self) -> &'static str {
        "bad_branch_dealer"
    }

    fn boxed_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }

    fn on_encoded(&mut self, adv: &mut Adversary<'_>, ev: &EncodeEvent<'_>) -> Result<()> {
        if ev.player != ev.dealer || ev.level != Level::Branch(ev.dealer) || ev.system != SystemLabel::DATA {
            return Ok(());
        }
        let targets: Vec<usize> = (0..ev.block.wires.len())
            .filter(|&j| !adv.corrupt().contains(&PlayerId::at(j)))
            .take(2)
            .collect();
        for j in targets {
            adv.apply(&GateOp::Shift { wire: ev.block.wires[j], c: self.error })?;
        }
        Ok(())
    }
}

/// Corrupt dealer that shares `|value⟩` in place of the state it claims
/// (its input, or `|0⟩` in a proved-zero sharing).
#[derive(Clone, Debug)]
pub struct WrongStateDealer {
    pub value: Fe,
}

impl Default for WrongStateDealer {
    fn default() -> Self {
        Self { value: 1 }
    }
}

impl Strategy for WrongStateDealer {
    fn name(&self) -> &'static str {
        "wrong_state_dealer"
    }

    fn boxed_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }

    fn on_encoded(&mut self, adv: &mut Adversary<'_>, ev: &EncodeEvent<'_>) -> Result<()> {
        if ev.player != ev.dealer || ev.level != Level::Root || ev.system != SystemLabel::DATA {
            return Ok(());
        }
        // logical X^value is X^value on every position
        for &w in &ev.block.wires {
            adv.apply(&GateOp::Shift { wire: w, c: self.value })?;
        }
        Ok(())
    }
}

/// Corrupt players broadcast uniformly random values instead of their
/// measurement outcomes.
#[derive(Clone, Debug, Default)]
pub struct LyingBroadcaster;

impl Strategy for LyingBroadcaster {
    fn name(&self) -> &'static str {
        "lying_broadcaster"
    }

    fn boxed_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }

    fn on_broadcast(&mut self, adv: &mut Adversary<'_>, from: PlayerId, values: &mut Vec<Fe>) -> Result<()> {
        let p = adv.field().p();
        for v in values.iter_mut() {
            *v = adv.rng().gen_range(0..p);
        }
        adv.log(Some(from), json!({ "lie": values.clone() }));
        Ok(())
    }
}

/// Random Clifford circuits over the held shares and one private ancilla
/// per corrupt player, applied at the end of every stage.
#[derive(Clone, Debug)]
pub struct CliffordWireAttack {
    pub depth: usize,
    ancillas: BTreeMap<PlayerId, usize>,
}

impl CliffordWireAttack {
    pub fn new(depth: usize) -> Self {
        Self { depth, ancillas: BTreeMap::new() }
    }
}

impl Default for CliffordWireAttack {
    fn default() -> Self {
        Self::new(6)
    }
}

impl Strategy for CliffordWireAttack {
    fn name(&self) -> &'static str {
        "clifford_wire_attack"
    }

    fn boxed_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }

    fn on_stage(&mut self, adv: &mut Adversary<'_>, _stage: Stage, held: &[usize]) -> Result<()> {
        let p = adv.field().p();
        let players: Vec<PlayerId> = adv.corrupt().iter().copied().collect();
        let mut pool: Vec<usize> = held.to_vec();
        for player in players {
            let anc = match self.ancillas.get(&player) {
                Some(&w) if adv.held_by(player).contains(&w) => w,
                _ => {
                    let w = adv.allocate(player)?;
                    self.ancillas.insert(player, w);
                    w
                }
            };
            pool.push(anc);
        }
        for _ in 0..self.depth {
            let wire = pool[adv.rng().gen_range(0..pool.len())];
            let c = adv.rng().gen_range(1..p);
            let gate = match adv.rng().gen_range(0..5) {
                0 => GateOp::Shift { wire, c },
                1 => GateOp::ScalarMul { wire, c },
                2 => GateOp::PhaseShift { wire, c },
                3 => GateOp::Fourier { wire, r: c },
                _ => {
                    let target = pool[adv.rng().gen_range(0..pool.len())];
                    if target == wire {
                        GateOp::FourierInverse { wire, r: c }
                    } else {
                        GateOp::Sum { control: wire, target }
                    }
                }
            };
            adv.apply(&gate)?;
        }
        Ok(())
    }
}

/// Registered strategy names.
pub const STRATEGIES: [&str; 6] = [
    "honest",
    "pauli_tamper",
    "bad_branch_dealer",
    "wrong_state_dealer",
    "lying_broadcaster",
    "clifford_wire_attack",
];

/// Builds a strategy from its registry name and integer parameters:
/// `pauli_tamper {x, z}` (fixed exponents, both required), `bad_branch_dealer
/// {error}`, `wrong_state_dealer {value}`, `clifford_wire_attack {depth}`.
pub fn strategy_by_name(name: &str, params: &BTreeMap<String, i64>) -> Result<Box<dyn Strategy>> {
    let get = |key: &str| params.get(key).map(|&v| v.max(0) as Fe);
    Ok(match name {
        "honest" => Box::new(Honest),
        "pauli_tamper" => Box::new(PauliTamper { fixed: get("x").zip(get("z")) }),
        "bad_branch_dealer" => Box::new(BadBranchDealer { error: get("error").unwrap_or(1) }),
        "wrong_state_dealer" => Box::new(WrongStateDealer { value: get("value").unwrap_or(1) }),
        "lying_broadcaster" => Box::new(LyingBroadcaster),
        "clifford_wire_attack" => Box::new(CliffordWireAttack::new(get("depth").unwrap_or(6) as usize)),
        other => return Err(Error::UnknownStrategy(other.to_string())),
    })
}
