use std::collections::BTreeSet;

use proptest::prelude::*;
use qss_core::gate::GateOp;
use qss_core::pauli::PauliOperator;
use qss_core::rs::{ReedSolomonCode, Variant};
use qss_core::sim::dense::DenseState;
use qss_core::sim::state::{Backend, QuantumState};
use qss_core::{Fe, PrimeField};

const PRIMES: [u32; 5] = [3, 5, 7, 11, 13];

fn field() -> impl Strategy<Value = PrimeField> {
    prop::sample::select(PRIMES.to_vec()).prop_map(|p| PrimeField::new(p).unwrap())
}

fn gate(m: usize) -> impl Strategy<Value = GateOp> {
    (0..m, 0..m, 1u32..7, 0..6).prop_map(move |(wire, other, c, which)| {
        let target = if other == wire { (wire + 1) % m } else { other };
        match which {
            0 => GateOp::Shift { wire, c },
            1 => GateOp::ScalarMul { wire, c },
            2 => GateOp::PhaseShift { wire, c },
            3 => GateOp::Fourier { wire, r: c },
            4 => GateOp::FourierInverse { wire, r: c },
            _ if m > 1 => GateOp::Sum { control: wire, target },
            _ => GateOp::Shift { wire, c },
        }
    })
}

proptest! {
    #[test]
    fn field_axioms(f in field(), a in 0u32..13, b in 0u32..13, c in 0u32..13) {
        let (a, b, c) = (a % f.p(), b % f.p(), c % f.p());
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        prop_assert_eq!(f.add(a, f.neg(a)), 0);
        match f.inv(a) {
            Some(i) => prop_assert_eq!(f.mul(a, i), 1),
            None => prop_assert_eq!(a, 0),
        }
        prop_assert_eq!(f.pow(a.max(1), (f.p() - 1) as u64), 1);
    }

    #[test]
    fn rs_corrects_up_to_radius(
        secret in 0u32..7,
        rand in prop::collection::vec(0u32..7, 2),
        errs in prop::collection::btree_map(0usize..5, 1u32..7, 0..=1),
    ) {
        let f = PrimeField::new(7).unwrap();
        let v = ReedSolomonCode::new(f, 5, 2, Variant::V).unwrap();
        let word = v.encode(secret, &rand).unwrap();
        let mut bad = word.clone();
        for (&pos, &e) in &errs {
            bad[pos] = f.add(bad[pos], e);
        }
        let d = v.decode(&bad).unwrap();
        prop_assert_eq!(d.secret, secret);
        prop_assert_eq!(&d.codeword, &word);
        prop_assert_eq!(d.error_positions, errs.keys().copied().collect::<Vec<_>>());
    }

    #[test]
    fn rs_erasures_within_budget_interpolate(
        secret in 0u32..11,
        rand in prop::collection::vec(0u32..11, 2),
        erased in prop::collection::btree_set(0usize..7, 0..=4),
    ) {
        let f = PrimeField::new(11).unwrap();
        let v = ReedSolomonCode::new(f, 7, 2, Variant::V).unwrap();
        let word = v.encode(secret, &rand).unwrap();
        let kept: BTreeSet<usize> = (0..7).filter(|i| !erased.contains(i)).collect();
        prop_assert_eq!(v.erasure_interpolate(&word, &kept).unwrap(), secret);
        prop_assert_eq!(v.decode_with_erasures(&word, &erased).unwrap().secret, secret);
    }

    #[test]
    fn pauli_group_laws(
        xs in prop::collection::vec((0u32..5, 0u32..5), 3),
        ys in prop::collection::vec((0u32..5, 0u32..5), 3),
    ) {
        let f = PrimeField::new(5).unwrap();
        let build = |v: &[(Fe, Fe)]| {
            v.iter().enumerate().fold(PauliOperator::identity(3), |acc, (w, &(a, b))| {
                acc.compose(&f, &PauliOperator::single(3, w, a, b))
            })
        };
        let (a, b) = (build(&xs), build(&ys));
        prop_assert!(a.compose(&f, &a.inverse(&f)).same_up_to_phase(&PauliOperator::identity(3)));
        prop_assert!(a.compose(&f, &b).same_up_to_phase(&b.compose(&f, &a)));
        prop_assert_eq!(a.commutation(&f, &b), f.neg(b.commutation(&f, &a)));
        prop_assert!(a.pow(&f, 5).same_up_to_phase(&PauliOperator::identity(3)));
        prop_assert!(a.weight() <= 3);
    }

    #[test]
    fn tableau_matches_dense(
        (m, gates) in (1usize..=3).prop_flat_map(|m| (Just(m), prop::collection::vec(gate(m), 1..25))),
        input in prop::collection::vec(0u32..7, 3),
    ) {
        let f = PrimeField::new(7).unwrap();
        let input = &input[..m];
        let mut d = DenseState::basis(f, input).unwrap();
        let mut t = QuantumState::new(Backend::Tableau, f, m);
        for (wire, &c) in input.iter().enumerate() {
            if c != 0 {
                t.apply(&GateOp::Shift { wire, c }).unwrap();
            }
        }
        for g in &gates {
            d.apply(g).unwrap();
            t.apply(g).unwrap();
        }
        prop_assert!(t.to_dense().unwrap().distance_up_to_phase(&d) < 1e-9);
    }

    #[test]
    fn pauli_conjugation_matches_dense(
        gates in prop::collection::vec(gate(2), 1..12),
        (a, b, w) in (0u32..7, 0u32..7, 0usize..2),
    ) {
        // applying P then undoing it after any circuit leaves the same state as never applying it
        let f = PrimeField::new(7).unwrap();
        let p = PauliOperator::single(2, w, a, b);
        let mut s = QuantumState::new(Backend::Tableau, f, 2);
        s.apply_all(&gates).unwrap();
        let before = s.to_dense().unwrap();
        s.apply_pauli(&p).unwrap();
        let mut d = before.clone();
        d.apply_pauli(&p).unwrap();
        prop_assert!(s.to_dense().unwrap().distance_up_to_phase(&d) < 1e-9);
        s.apply_pauli(&p.inverse(&f)).unwrap();
        prop_assert!(s.to_dense().unwrap().distance_up_to_phase(&before) < 1e-9);
    }
}
