use proptest::prelude::*;
use qss_core::gate::GateOp;
use qss_core::PrimeField;
use qss_protocol::circuit::{LogicalCircuit, WireRole};
use qss_protocol::net::PlayerId;
use qss_protocol::Error;

const TOFFOLI: &str = "qss-circuit 1
wires 4
input 0 1   # a
input 1 2
input 2 3
ancilla 3
toffoli 0 1 2
sum 2 3
scalar_mul 3 4
fourier 0
fourier_inverse 0 3
phase_shift 1 2
shift 2 5
output 2 4
output 3 5
";

fn parse_line_err(text: &str) -> (usize, String) {
    match LogicalCircuit::parse(text) {
        Err(Error::Parse { line, message }) => (line, message),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn parses_every_record() {
    let c = LogicalCircuit::parse(TOFFOLI).unwrap();
    assert_eq!(c.num_wires, 4);
    assert_eq!(c.roles[3], WireRole::Ancilla);
    assert_eq!(c.inputs(), vec![(0, PlayerId::at(0)), (1, PlayerId::at(1)), (2, PlayerId::at(2))]);
    assert_eq!(c.ancillas(), vec![3]);
    assert_eq!(c.gates.len(), 7);
    assert_eq!(c.gates[4], GateOp::FourierInverse { wire: 0, r: 3 });
    assert_eq!(c.outputs, vec![(2, PlayerId::at(3)), (3, PlayerId::at(4))]);
    assert!(c.has_toffoli());
    assert_eq!(LogicalCircuit::parse(&c.to_text()).unwrap(), c);
}

#[test]
fn parse_errors_name_the_line() {
    assert_eq!(parse_line_err("qss-circuit 1\nwires 2\ninput 0 1\nfrobnicate 0\n").0, 4);
    let (line, msg) = parse_line_err("qss-circuit 1\nwires 2\ninput 5 1\n");
    assert_eq!(line, 3);
    assert!(msg.contains("out of range"), "{msg}");
    assert_eq!(parse_line_err("qss-circuit 1\nsum 0 1\n").0, 2);
    assert_eq!(parse_line_err("qss-circuit 1\nwires 2\ninput 0 1\ninput 0 2\n").0, 4);
    assert_eq!(parse_line_err("qss-circuit 1\nwires 1\ninput 0 0\n").0, 3);
    assert_eq!(parse_line_err("circuit\n").0, 1);
    assert_eq!(parse_line_err("qss-circuit 1\nwires 3\ninput 0 1\ninput 1 1\ninput 2 1\ntoffoli 0 1\n").0, 6);
    assert!(matches!(LogicalCircuit::parse("qss-circuit 1\nwires 2\ninput 0 1\n"), Err(Error::InvalidCircuit(_))));
}

#[test]
fn classical_evaluation() {
    let f = PrimeField::new(11).unwrap();
    let c = LogicalCircuit::parse(
        "qss-circuit 1\nwires 4\ninput 0 1\ninput 1 2\ninput 2 3\nancilla 3\ntoffoli 0 1 2\nsum 2 3\nscalar_mul 3 4\nshift 0 5\noutput 3 4\n",
    )
    .unwrap();
    // target 6 + 3·5 = 21 = 10; ancilla 10·4 = 40 = 7; wire 0: 3 + 5
    assert_eq!(c.evaluate_classical(&f, &[3, 5, 6, 0]), Some(vec![8, 5, 10, 7]));
    let with_fourier = LogicalCircuit::parse(TOFFOLI).unwrap();
    assert_eq!(with_fourier.evaluate_classical(&f, &[0, 0, 0, 0]), None);
}

#[test]
fn validation_against_network() {
    let f = PrimeField::new(11).unwrap();
    let c = LogicalCircuit::parse(TOFFOLI).unwrap();
    assert!(c.validate(&f, 7).is_ok());
    let far = LogicalCircuit::parse("qss-circuit 1\nwires 1\ninput 0 9\noutput 0 1\n").unwrap();
    assert!(far.validate(&f, 7).is_err());
}

fn arb_circuit() -> impl Strategy<Value = LogicalCircuit> {
    (1usize..5).prop_flat_map(|m| {
        let roles = prop::collection::vec(prop_oneof![Just(None), (1usize..=7).prop_map(Some)], m);
        let gates = prop::collection::vec((0usize..m, 0usize..m, 0usize..m, 1u32..11, 0..8), 0..10);
        let outputs = prop::collection::vec((0usize..m, 1usize..=7), 0..3);
        (Just(m), roles, gates, outputs).prop_filter_map("distinct wires", |(m, roles, gates, outputs)| {
            let roles = roles
                .into_iter()
                .map(|r| r.map_or(WireRole::Ancilla, |p| WireRole::Input(PlayerId::at(p - 1))))
                .collect();
            let mut ops = Vec::new();
            for (a, b, t, c, which) in gates {
                ops.push(match which {
                    0 => GateOp::Shift { wire: a, c },
                    1 => GateOp::ScalarMul { wire: a, c },
                    2 => GateOp::PhaseShift { wire: a, c },
                    3 => GateOp::Fourier { wire: a, r: c },
                    4 => GateOp::FourierInverse { wire: a, r: c },
                    5 | 6 if a != b => GateOp::Sum { control: a, target: b },
                    _ if m >= 3 && a != b && b != t && a != t => GateOp::Toffoli { a, b, target: t },
                    _ => GateOp::Shift { wire: a, c },
                });
            }
            let outputs = outputs.into_iter().map(|(w, p)| (w, PlayerId::at(p - 1))).collect();
            LogicalCircuit::new(roles, ops, outputs).ok()
        })
    })
}

proptest! {
    #[test]
    fn text_round_trip(c in arb_circuit()) {
        let text = c.to_text();
        prop_assert_eq!(LogicalCircuit::parse(&text).unwrap(), c);
    }
}
