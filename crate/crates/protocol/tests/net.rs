use qss_core::css::CssCode;
use qss_core::gate::GateOp;
use qss_core::sim::state::Backend;
use qss_protocol::adversary::{Adversary, Honest, LyingBroadcaster, PauliTamper, Stage, Strategy};
use qss_protocol::net::{EventKind, Network, NetworkConfig, PlayerId, Regime, Transcript};
use qss_protocol::vqss::{vqss_reconstruct, vqss_share, SharingKind};
use qss_protocol::Error;

fn network(seed: u64, corrupt: &[usize], strategy: Box<dyn Strategy>) -> Network {
    let cfg = NetworkConfig::vqss_default().with_seed(seed).with_corrupt(corrupt);
    Network::new(cfg, Regime::Vqss, Backend::Tableau, strategy).unwrap()
}

/// Shares `|2⟩` from player 1 and reconstructs at player 4.
fn share_and_reconstruct(net: &mut Network) -> Result<bool, Error> {
    let code = CssCode::new(*net.field(), 5, 2)?;
    let dealer = PlayerId::at(0);
    let q = net.environment(1)[0];
    net.state_mut().apply(&GateOp::Shift { wire: q, c: 2 })?;
    net.give(q, dealer)?;
    let sh = vqss_share(net, &code, dealer, SharingKind::Plain, Some(q))?;
    if sh.accepted {
        vqss_reconstruct(net, &sh, PlayerId::at(3))?;
    }
    Ok(sh.accepted)
}

/// Tries to flip a wire it does not hold once shares are at rest.
#[derive(Clone)]
struct Snoop;

impl Strategy for Snoop {
    fn name(&self) -> &'static str {
        "snoop"
    }

    fn boxed_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }

    fn on_stage(&mut self, adv: &mut Adversary<'_>, stage: Stage, _held: &[usize]) -> qss_protocol::Result<()> {
        if stage != Stage::Shared {
            return Ok(());
        }
        let held = adv.held_wires();
        let foreign = (0..).find(|w| !held.contains(w)).unwrap();
        adv.apply_pauli(foreign, 1, 0)
    }
}

#[test]
fn config_rejected_outside_threshold() {
    let too_many = NetworkConfig::vqss_default().with_corrupt(&[1, 2]);
    assert!(matches!(too_many.validate(Regime::Vqss), Err(Error::ConfigRejected(_))));
    let wrong_n = NetworkConfig::vqss_default();
    assert!(matches!(wrong_n.validate(Regime::Mpqc), Err(Error::ConfigRejected(_))));
    let mut small_p = NetworkConfig::vqss_default();
    small_p.p = 5;
    assert!(matches!(small_p.validate(Regime::Vqss), Err(Error::ConfigRejected(_))));
    let r = Network::new(too_many, Regime::Vqss, Backend::Tableau, Box::new(Honest));
    assert!(matches!(r, Err(Error::ConfigRejected(_))));
    assert!(NetworkConfig::mpqc_default().validate(Regime::Mpqc).is_ok());
}

#[test]
fn strategies_cannot_touch_honest_wires() {
    let mut net = network(1, &[3], Box::new(Snoop));
    let err = share_and_reconstruct(&mut net).unwrap_err();
    assert!(matches!(err, Error::OwnershipViolation { .. }), "{err}");
}

#[test]
fn players_act_only_on_their_own_wires() {
    let mut net = network(1, &[], Box::new(Honest));
    let w = net.allocate(PlayerId::at(1), 1).unwrap()[0];
    let err = net.apply(PlayerId::at(0), &[GateOp::Shift { wire: w, c: 1 }]).unwrap_err();
    assert!(matches!(err, Error::OwnershipViolation { .. }));
    net.send(PlayerId::at(1), PlayerId::at(0), &[w]).unwrap();
    net.apply(PlayerId::at(0), &[GateOp::Shift { wire: w, c: 1 }]).unwrap();
    assert_eq!(net.owner_of(w), Some(PlayerId::at(0)));
    assert!(net.send(PlayerId::at(1), PlayerId::at(2), &[w]).is_err());
}

#[test]
fn broadcast_views_agree_under_lying() {
    let mut net = network(4, &[2], Box::new(LyingBroadcaster));
    share_and_reconstruct(&mut net).unwrap();
    let views = net.views();
    assert!(!views[0].is_empty());
    assert!(views.iter().all(|v| v == &views[0]));
    assert!(net.transcript().rounds_monotone());
}

#[test]
fn honest_run_has_no_adversary_actions() {
    let mut net = network(2, &[], Box::new(Honest));
    assert!(share_and_reconstruct(&mut net).unwrap());
    let t = net.transcript();
    assert_eq!(t.count(EventKind::AdversaryAction), 0);
    assert!(t.count(EventKind::Broadcast) > 0);
    assert!(t.count(EventKind::Coin) > 0);
    assert!(t.rounds_monotone());
}

#[test]
fn same_seed_replays_byte_identical_transcript() {
    let run = |seed| {
        let mut net = network(seed, &[3], Box::new(PauliTamper::default()));
        share_and_reconstruct(&mut net).unwrap();
        net.transcript().to_jsonl()
    };
    let a = run(9);
    assert_eq!(a, run(9));
    assert_ne!(a, run(10));
    assert!(a.contains("\"adversary_action\""));
}

#[test]
fn transcript_round_trips_through_json_lines() {
    let mut net = network(5, &[2], Box::new(PauliTamper::default()));
    share_and_reconstruct(&mut net).unwrap();
    let t = net.transcript();
    let text = t.to_jsonl();
    let back = Transcript::from_jsonl(&text).unwrap();
    assert_eq!(back, t);
    assert_eq!(back.to_jsonl(), text);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["round", "kind", "actor", "payload"] {
            assert!(v.get(key).is_some(), "missing {key} in {line}");
        }
    }
    assert!(matches!(Transcript::from_jsonl("{\"round\": 1}\n"), Err(Error::Parse { line: 1, .. })));
}

#[test]
fn public_coins_are_uniform() {
    let mut net = network(6, &[], Box::new(Honest));
    let p = net.field().p() as usize;
    let draws = 7000;
    let mut counts = vec![0usize; p];
    for v in net.public_coin(draws) {
        counts[v as usize] += 1;
    }
    let expect = draws as f64 / p as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    // 0.999 quantile of chi-square with 6 degrees of freedom
    assert!(chi2 < 22.46, "chi-square {chi2} for counts {counts:?}");
}
