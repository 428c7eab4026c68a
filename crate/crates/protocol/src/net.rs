//! Synchronous network of `n` players sharing one global simulator state.
//!
//! Quantum messages are ownership transfers of wire handles, so entanglement
//! between adversary ancillas and protocol data survives every send. All
//! randomness comes from three ChaCha streams derived from the run seed: one
//! for simulated measurements, one for the public coin beacon and one for the
//! adversary.

use std::collections::BTreeSet;
use std::fmt;

use qss_core::linalg::Matrix;
use qss_core::gate::GateOp;
use qss_core::sim::state::{Backend, QuantumState};
use qss_core::{Fe, PrimeField};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::adversary::{Adversary, EncodeEvent, Honest, Stage, Strategy};
use crate::error::{Error, Result};

/// A participant, numbered `1..=n`. Player `i` holds code position `i - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(usize);

impl PlayerId {
    pub fn new(index: usize, n: usize) -> Result<Self> {
        if index == 0 || index > n {
            return Err(Error::NoSuchPlayer(index));
        }
        Ok(Self(index))
    }

    /// The player holding 0-based code position `pos`.
    pub fn at(pos: usize) -> Self {
        Self(pos + 1)
    }

    pub fn index(self) -> usize {
        self.0
    }

    pub fn position(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

/// Threshold regime a run must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `n = 4t + 1`
    Vqss,
    /// `n = 6t + 1`
    Mpqc,
}

impl Regime {
    pub fn players_for(self, t: usize) -> usize {
        match self {
            Regime::Vqss => 4 * t + 1,
            Regime::Mpqc => 6 * t + 1,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Vqss => "vqss",
            Regime::Mpqc => "mpqc",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub n: usize,
    pub t: usize,
    pub p: u32,
    /// Number of cut-and-choose challenges per basis.
    pub k: usize,
    #[serde(default)]
    pub corrupt: BTreeSet<PlayerId>,
    #[serde(default)]
    pub seed: u64,
}

impl NetworkConfig {
    pub fn vqss_default() -> Self {
        Self { n: 5, t: 1, p: 7, k: 4, corrupt: BTreeSet::new(), seed: 0 }
    }

    pub fn mpqc_default() -> Self {
        Self { n: 7, t: 1, p: 11, k: 3, corrupt: BTreeSet::new(), seed: 0 }
    }

    pub fn with_corrupt(mut self, players: &[usize]) -> Self {
        self.corrupt = players.iter().map(|&i| PlayerId(i)).collect();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn validate(&self, regime: Regime) -> Result<()> {
        let reject = |msg: String| Err(Error::ConfigRejected(msg));
        if self.t == 0 {
            return reject("t must be at least 1".into());
        }
        let want = regime.players_for(self.t);
        if self.n != want {
            return reject(format!("n = {} but the {regime} regime with t = {} needs n = {want}", self.n, self.t));
        }
        if let Err(e) = PrimeField::new(self.p) {
            return reject(e.to_string());
        }
        if self.p as usize <= self.n {
            return reject(format!("p = {} leaves no room for {} distinct evaluation points", self.p, self.n));
        }
        if !(1..=8).contains(&self.k) {
            return reject(format!("k = {} outside 1..=8", self.k));
        }
        if let Some(bad) = self.corrupt.iter().find(|c| c.0 == 0 || c.0 > self.n) {
            return reject(format!("corrupt player {} out of range", bad.0));
        }
        if self.corrupt.len() > self.t {
            return reject(format!("{} corrupt players exceed t = {}", self.corrupt.len(), self.t));
        }
        Ok(())
    }

    pub fn field(&self) -> Result<PrimeField> {
        Ok(PrimeField::new(self.p)?)
    }

    pub fn players(&self) -> impl Iterator<Item = PlayerId> {
        (1..=self.n).map(PlayerId)
    }

    /// Corrupt players as 0-based code positions.
    pub fn corrupt_positions(&self) -> BTreeSet<usize> {
        self.corrupt.iter().map(|p| p.position()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    #[serde(rename = "qsend")]
    QSend,
    #[serde(rename = "csend")]
    CSend,
    #[serde(rename = "broadcast")]
    Broadcast,
    #[serde(rename = "coin")]
    Coin,
    #[serde(rename = "measure")]
    Measure,
    #[serde(rename = "adversary_action")]
    AdversaryAction,
    #[serde(rename = "set_update")]
    SetUpdate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEvent {
    pub round: u32,
    pub kind: EventKind,
    pub actor: Option<PlayerId>,
    pub payload: Value,
}

/// Event log of one run, ordered by round.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Transcript {
    pub events: Vec<TranscriptEvent>,
}

impl Transcript {
    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut events = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let e = serde_json::from_str(line)
                .map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
            events.push(e);
        }
        Ok(Self { events })
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    pub fn rounds_monotone(&self) -> bool {
        self.events.windows(2).all(|w| w[0].round <= w[1].round)
    }

    pub fn last_round(&self) -> u32 {
        self.events.last().map_or(0, |e| e.round)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BroadcastRecord {
    pub round: u32,
    pub from: PlayerId,
    pub values: Vec<Fe>,
}

pub struct Network {
    config: NetworkConfig,
    field: PrimeField,
    pub(crate) state: QuantumState,
    pub(crate) owner: Vec<Option<PlayerId>>,
    sim_rng: ChaCha20Rng,
    coin_rng: ChaCha20Rng,
    pub(crate) adv_rng: ChaCha20Rng,
    strategy: Box<dyn Strategy>,
    pub(crate) events: Vec<TranscriptEvent>,
    views: Vec<Vec<BroadcastRecord>>,
    pub(crate) coins: Vec<(u32, Vec<Fe>)>,
    round: u32,
}

impl Clone for Network {
    fn clone(&self) -> Self {
        Self {
            config: self.config.clone(),
            field: self.field,
            state: self.state.clone(),
            owner: self.owner.clone(),
            sim_rng: self.sim_rng.clone(),
            coin_rng: self.coin_rng.clone(),
            adv_rng: self.adv_rng.clone(),
            strategy: self.strategy.boxed_clone(),
            events: self.events.clone(),
            views: self.views.clone(),
            coins: self.coins.clone(),
            round: self.round,
        }
    }
}

fn stream(seed: u64, id: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

impl Network {
    pub fn new(config: NetworkConfig, regime: Regime, backend: Backend, strategy: Box<dyn Strategy>) -> Result<Self> {
        config.validate(regime)?;
        let field = config.field()?;
        let n = config.n;
        Ok(Self {
            field,
            state: QuantumState::new(backend, field, 0),
            owner: Vec::new(),
            sim_rng: stream(config.seed, 0),
            coin_rng: stream(config.seed, 1),
            adv_rng: stream(config.seed, 2),
            strategy,
            events: Vec::new(),
            views: vec![Vec::new(); n],
            coins: Vec::new(),
            round: 0,
            config,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn t(&self) -> usize {
        self.config.t
    }

    pub fn strategy_name(&self) -> &'static str {
        self.strategy.name()
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    /// Sets the logical round for subsequent events. Protocols may revisit
    /// earlier rounds when they schedule independent work lazily; the
    /// exported transcript is ordered by round.
    pub fn set_round(&mut self, round: u32) {
        self.round = round;
    }

    pub fn is_corrupt(&self, p: PlayerId) -> bool {
        self.config.corrupt.contains(&p)
    }

    pub fn players(&self) -> Vec<PlayerId> {
        self.config.players().collect()
    }

    pub fn honest(&self) -> Vec<PlayerId> {
        self.config.players().filter(|p| !self.is_corrupt(*p)).collect()
    }

    /// Read access to the global state (test and oracle use).
    pub fn state(&self) -> &QuantumState {
        &self.state
    }

    /// Unrestricted access to the global state. Bypasses ownership, so it
    /// is reserved for test oracles and for environment preparation.
    pub fn state_mut(&mut self) -> &mut QuantumState {
        &mut self.state
    }

    pub fn sim_rng(&mut self) -> &mut ChaCha20Rng {
        &mut self.sim_rng
    }

    pub fn owner_of(&self, wire: usize) -> Option<PlayerId> {
        self.owner.get(wire).copied().flatten().filter(|_| self.state.is_active(wire))
    }

    pub fn held_by(&self, p: PlayerId) -> Vec<usize> {
        (0..self.owner.len()).filter(|&w| self.owner_of(w) == Some(p)).collect()
    }

    pub fn record(&mut self, kind: EventKind, actor: Option<PlayerId>, payload: Value) {
        self.events.push(TranscriptEvent { round: self.round, kind, actor, payload });
    }

    fn check_player(&self, p: PlayerId) -> Result<()> {
        PlayerId::new(p.0, self.config.n).map(|_| ())
    }

    fn check_owned(&self, player: PlayerId, wires: &[usize]) -> Result<()> {
        for &w in wires {
            if self.owner_of(w) != Some(player) {
                return Err(Error::OwnershipViolation { wire: w, holder: player.to_string() });
            }
        }
        Ok(())
    }

    fn active_snapshot(&self) -> Vec<bool> {
        (0..self.state.num_qupits()).map(|w| self.state.is_active(w)).collect()
    }

    /// New wires go to `holder`; released wires lose their owner.
    pub(crate) fn sync_owners(&mut self, holder: Option<PlayerId>, before: &[bool]) {
        let m = self.state.num_qupits();
        self.owner.resize(m, None);
        for w in 0..m {
            let active = self.state.is_active(w);
            if !active {
                self.owner[w] = None;
            } else if !before.get(w).copied().unwrap_or(false) {
                self.owner[w] = holder;
            }
        }
    }

    /// Runs a local computation of `player` touching `wires` (which it must
    /// hold). Wires allocated inside become the player's.
    pub fn with_owned<T>(
        &mut self,
        player: PlayerId,
        wires: &[usize],
        f: impl FnOnce(&mut QuantumState, &mut dyn RngCore) -> qss_core::Result<T>,
    ) -> Result<T> {
        self.check_player(player)?;
        self.check_owned(player, wires)?;
        let before = self.active_snapshot();
        let out = f(&mut self.state, &mut self.sim_rng);
        self.sync_owners(Some(player), &before);
        Ok(out?)
    }

    pub fn allocate(&mut self, player: PlayerId, k: usize) -> Result<Vec<usize>> {
        self.with_owned(player, &[], |s, _| Ok(s.allocate(k)))
    }

    /// Unowned wires standing for the outside world (inputs, references).
    pub fn environment(&mut self, k: usize) -> Vec<usize> {
        let before = self.active_snapshot();
        let w = self.state.allocate(k);
        self.sync_owners(None, &before);
        w
    }

    /// Hands an environment wire to `player` as a protocol input.
    pub fn give(&mut self, wire: usize, player: PlayerId) -> Result<()> {
        self.check_player(player)?;
        if !self.state.is_active(wire) || self.owner_of(wire).is_some() {
            return Err(Error::OwnershipViolation { wire, holder: "the environment".into() });
        }
        self.owner[wire] = Some(player);
        Ok(())
    }

    pub fn apply(&mut self, player: PlayerId, gates: &[GateOp]) -> Result<()> {
        for g in gates {
            self.check_owned(player, &g.wires())?;
        }
        Ok(self.state.apply_all(gates)?)
    }

    /// `|x⟩ ↦ |M x⟩` on wires held by `player`.
    pub fn apply_linear(&mut self, player: PlayerId, wires: &[usize], m: &Matrix) -> Result<()> {
        self.check_owned(player, wires)?;
        Ok(self.state.apply_linear(wires, m)?)
    }

    /// Gates applied simultaneously by several players, each on its own
    /// wires. Needed for Toffoli layers, which keep the state a stabilizer
    /// state only as a whole.
    pub fn apply_layer(&mut self, gates: &[(PlayerId, GateOp)]) -> Result<()> {
        for (p, g) in gates {
            self.check_owned(*p, &g.wires())?;
        }
        let layer: Vec<GateOp> = gates.iter().map(|&(_, g)| g).collect();
        Ok(self.state.apply_layer(&layer)?)
    }

    /// Measures and releases `wires` held by `player`.
    pub fn measure_batch(&mut self, player: PlayerId, wires: &[usize]) -> Result<Vec<Fe>> {
        self.check_owned(player, wires)?;
        let mut out = Vec::with_capacity(wires.len());
        for &w in wires {
            out.push(self.state.discard(w, &mut self.sim_rng)?);
            self.owner[w] = None;
        }
        self.record(EventKind::Measure, Some(player), json!({ "wires": wires, "outcomes": out }));
        Ok(out)
    }

    /// Transfers `wires` from `from` to `to`. A corrupt sender may first
    /// transform them.
    pub fn send(&mut self, from: PlayerId, to: PlayerId, wires: &[usize]) -> Result<()> {
        self.check_player(from)?;
        self.check_player(to)?;
        self.check_owned(from, wires)?;
        if self.is_corrupt(from) {
            self.adversary_call(|s, adv| s.on_send(adv, from, to, wires))?;
            self.check_owned(from, wires)?;
        }
        for &w in wires {
            self.owner[w] = Some(to);
        }
        self.record(EventKind::QSend, Some(from), json!({ "to": to, "wires": wires }));
        Ok(())
    }

    /// Classical point-to-point message; only logged.
    pub fn send_classical(&mut self, from: PlayerId, to: PlayerId, payload: Value) {
        self.record(EventKind::CSend, Some(from), json!({ "to": to, "message": payload }));
    }

    /// One broadcast round. Honest messages are fixed first; corrupt players
    /// then choose theirs having seen them (rushing). Every player records
    /// the same sequence. Returns the delivered values in input order.
    pub fn broadcast_round(&mut self, messages: Vec<(PlayerId, Vec<Fe>)>) -> Result<Vec<Vec<Fe>>> {
        let mut delivered: Vec<Option<Vec<Fe>>> = vec![None; messages.len()];
        let order: Vec<usize> = (0..messages.len())
            .filter(|&i| !self.is_corrupt(messages[i].0))
            .chain((0..messages.len()).filter(|&i| self.is_corrupt(messages[i].0)))
            .collect();
        for i in order {
            let (from, mut values) = messages[i].clone();
            self.check_player(from)?;
            if self.is_corrupt(from) {
                self.adversary_call(|s, adv| s.on_broadcast(adv, from, &mut values))?;
            }
            let rec = BroadcastRecord { round: self.round, from, values: values.clone() };
            for view in &mut self.views {
                view.push(rec.clone());
            }
            self.record(EventKind::Broadcast, Some(from), json!({ "values": values }));
            delivered[i] = Some(values);
        }
        Ok(delivered.into_iter().map(|v| v.expect("every message delivered")).collect())
    }

    /// Uniform public field elements from the trusted beacon.
    pub fn public_coin(&mut self, count: usize) -> Vec<Fe> {
        let p = self.field.p();
        let values: Vec<Fe> = (0..count).map(|_| self.coin_rng.gen_range(0..p)).collect();
        self.coins.push((self.round, values.clone()));
        self.record(EventKind::Coin, None, json!({ "values": values }));
        values
    }

    /// Broadcast history as recorded by `p`.
    pub fn view(&self, p: PlayerId) -> &[BroadcastRecord] {
        &self.views[p.position()]
    }

    pub fn views(&self) -> &[Vec<BroadcastRecord>] {
        &self.views
    }

    /// Gives the adversary a chance to act on the corrupt-held subset of
    /// `wires` at the end of a protocol stage.
    pub fn stage(&mut self, stage: Stage, wires: &[usize]) -> Result<()> {
        if self.config.corrupt.is_empty() {
            return Ok(());
        }
        let held: Vec<usize> = wires
            .iter()
            .copied()
            .filter(|&w| self.owner_of(w).is_some_and(|p| self.is_corrupt(p)))
            .collect();
        if held.is_empty() {
            return Ok(());
        }
        self.adversary_call(|s, adv| s.on_stage(adv, stage, &held))
    }

    /// Called after `ev.player` encodes a block; corrupt players may deviate.
    pub fn encoded(&mut self, ev: &EncodeEvent<'_>) -> Result<()> {
        if !self.is_corrupt(ev.player) {
            return Ok(());
        }
        self.adversary_call(|s, adv| s.on_encoded(adv, ev))
    }

    pub(crate) fn adversary_call<T>(
        &mut self,
        f: impl FnOnce(&mut dyn Strategy, &mut Adversary<'_>) -> Result<T>,
    ) -> Result<T> {
        let mut strategy = std::mem::replace(&mut self.strategy, Box::new(Honest));
        let views = self.views.first().map(Vec::as_slice).unwrap_or(&[]);
        let mut adv = Adversary::new(
            &mut self.state,
            &mut self.owner,
            &self.config.corrupt,
            &mut self.adv_rng,
            &mut self.events,
            views,
            &self.coins,
            self.round,
        );
        let out = f(strategy.as_mut(), &mut adv);
        self.strategy = strategy;
        out
    }

    /// The event log ordered by round (stable within a round).
    pub fn transcript(&self) -> Transcript {
        let mut events = self.events.clone();
        events.sort_by_key(|e| e.round);
        Transcript { events }
    }
}

/// Outcome of [`run_rounds`]: the protocol result (possibly an error) and
/// the network at the point where it stopped.
pub struct RunOutput<T> {
    pub result: Result<T>,
    pub network: Network,
}

impl<T> RunOutput<T> {
    pub fn transcript(&self) -> Transcript {
        self.network.transcript()
    }
}

/// Builds a network and drives `protocol` on it. Configuration errors are
/// returned directly; protocol errors are kept with the partial transcript.
pub fn run_rounds<T>(
    config: NetworkConfig,
    regime: Regime,
    backend: Backend,
    strategy: Box<dyn Strategy>,
    protocol: impl FnOnce(&mut Network) -> Result<T>,
) -> Result<RunOutput<T>> {
    let mut network = Network::new(config, regime, backend, strategy)?;
    let result = protocol(&mut network);
    Ok(RunOutput { result, network })
}
