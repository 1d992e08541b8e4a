use std::collections::BTreeSet;

use trilab_core::analyzer::InputLaw;
use trilab_core::bgw::{self, BgwParams};
use trilab_core::engine::exact::{explore, Observe, Order};
use trilab_core::engine::{enumerate_tapes, run, PartyId, PartyOutput};
use trilab_core::hamdist::HamDistParams;
use trilab_core::protocol::Protocol;
use trilab_core::Field;

fn hamdist(n: usize, order: u32) -> Protocol {
    Protocol::hamdist(HamDistParams::new(n, Field::of_order(order).unwrap()).unwrap())
}

fn assert_correct(p: &Protocol) {
    let starts = InputLaw::Uniform.starts(p).unwrap();
    let outcomes = explore(p.schedule(), &p.honest_programs(), &starts, &Observe::default(), Order::Canonical);
    for (o, _) in outcomes {
        let s = &starts[o.start];
        let expected = [PartyOutput::Null, PartyOutput::Null, PartyOutput::Value(p.evaluate(&s.x, &s.y))];
        assert_eq!(o.outputs, expected, "x={:?} y={:?}", s.x, s.y);
    }
}

#[test]
fn hamdist_computes_hamming_distance() {
    for order in [2, 3, 4] {
        assert_correct(&hamdist(2, order));
    }
    assert_correct(&hamdist(3, 2));
}

#[test]
fn hamdist_tape_count() {
    let p = hamdist(2, 3);
    let tapes: u128 = p.honest_programs().iter().map(|q| q.tape_space().size()).product();
    // 9 masks, 4 nonzero scalar pairs, 2 permutations.
    assert_eq!(tapes, 72);
}

#[test]
fn extractors_recover_honest_inputs() {
    let p = hamdist(2, 3);
    let starts = InputLaw::Uniform.starts(&p).unwrap();
    for party in [PartyId::Alice, PartyId::Bob] {
        let observe = Observe { views: [false; 3], capture: p.extractor_slots(party).unwrap() };
        let outcomes = explore(p.schedule(), &p.honest_programs(), &starts, &observe, Order::Canonical);
        for (o, _) in outcomes {
            let s = &starts[o.start];
            let own = if party == PartyId::Alice { &s.x } else { &s.y };
            assert_eq!(&p.extract(party, &o.captured).unwrap(), own);
        }
    }
}

#[test]
fn bgw_computes_quadratic_distance() {
    assert_correct(&Protocol::bgw(BgwParams::new(1, 2, 5, None).unwrap()));
    assert_correct(&Protocol::bgw(BgwParams::new(1, 3, 5, None).unwrap()));
    assert_correct(&Protocol::bgw(BgwParams::new(2, 2, 7, None).unwrap()));
}

#[test]
fn bgw_range_by_brute_force() {
    for (n, s) in [(1, 3), (2, 2), (2, 3), (4, 2)] {
        let mut seen = BTreeSet::new();
        let mut x = vec![0u64; n];
        let combos = (s as u64).pow(2 * n as u32);
        for code in 0..combos {
            let mut c = code;
            let mut y = vec![0u64; n];
            for v in x.iter_mut().chain(y.iter_mut()) {
                *v = c % s as u64;
                c /= s as u64;
            }
            seen.insert(bgw::quadratic_distance(&x, &y));
        }
        assert_eq!(seen, bgw::output_range(n, s), "n={n} s={s}");
    }
    assert_eq!(bgw::output_range(1, 3).into_iter().collect::<Vec<_>>(), [0, 1, 4]);
}

#[test]
fn bgw_rejects_bad_parameters() {
    assert!(BgwParams::new(1, 2, 4, None).is_err());
    assert!(BgwParams::new(1, 2, 5, Some([1, 1, 2])).is_err());
    assert!(BgwParams::new(1, 2, 5, Some([0, 1, 2])).is_err());
}

#[test]
fn run_records_views() {
    let p = hamdist(2, 3);
    let programs = p.honest_programs();
    let x = p.parse_input(PartyId::Alice, &[2, 2]).unwrap();
    let y = p.parse_input(PartyId::Bob, &[2, 0]).unwrap();
    let tapes = enumerate_tapes(&programs, 100).unwrap().last().unwrap();
    let record = run(p.schedule(), &programs, &x, &y, &tapes).unwrap();
    assert_eq!(record.output(PartyId::Charlie), &PartyOutput::Value(1));
    assert_eq!(record.view(PartyId::Alice).input, x);
    assert!(record.view(PartyId::Charlie).input.is_empty());
    assert_eq!(record.view(PartyId::Charlie).received.len(), 2);
}
