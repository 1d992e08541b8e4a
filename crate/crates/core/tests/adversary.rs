use trilab_core::adversary::{Deviation, TamperAction, TamperRule};
use trilab_core::analyzer::{check_active_suite, EffectiveInput, InputLaw, Options, SecurityReport, VerdictTag};
use trilab_core::bgw::BgwParams;
use trilab_core::engine::PartyId;
use trilab_core::hamdist::{self, HamDistParams};
use trilab_core::protocol::Protocol;
use trilab_core::Field;

fn hamdist_gf3() -> Protocol {
    Protocol::hamdist(HamDistParams::new(2, Field::prime(3).unwrap()).unwrap())
}

fn active(p: &Protocol, d: &Deviation) -> SecurityReport {
    check_active_suite(p, d, &InputLaw::Uniform, &Options::default()).unwrap()
}

fn verdict(r: &SecurityReport, id: &str) -> VerdictTag {
    r.condition(id).unwrap_or_else(|| panic!("no {id}")).verdict
}

fn tamper(p: &Protocol, target: PartyId, slot: &str, action: TamperAction) -> Deviation {
    Deviation::message_tamper(p, target, vec![TamperRule { slot: slot.into(), action }]).unwrap()
}

#[test]
fn only_the_target_is_replaced() {
    let p = hamdist_gf3();
    let honest = p.honest_programs();
    let d = Deviation::leak_view(&p, PartyId::Bob).unwrap();
    let programs = d.programs(&p);
    assert_eq!(programs[0].name(), honest[0].name());
    assert_ne!(programs[1].name(), honest[1].name());
    assert_eq!(programs[2].name(), honest[2].name());
}

#[test]
fn zero_scalar_is_sanitized_and_harmless() {
    let p = hamdist_gf3();
    let r = active(&p, &tamper(&p, PartyId::Alice, hamdist::SCALARS, TamperAction::ZeroAt { position: 0 }));
    assert_eq!(r.effective_input, Some(EffectiveInput::Extractor));
    assert_eq!(verdict(&r, "alice-privacy"), VerdictTag::Holds);
    assert_eq!(verdict(&r, "alice-correctness"), VerdictTag::Holds);
}

#[test]
fn omitted_messages_keep_alice_and_bob_secure() {
    let p = hamdist_gf3();
    for slot in [hamdist::MASK, hamdist::PERMUTATION, hamdist::ALICE_TO_CHARLIE] {
        let r = active(&p, &tamper(&p, PartyId::Alice, slot, TamperAction::Omit));
        assert_eq!(r.status().exit_code(), 0, "alice omits {slot}");
    }
    let r = active(&p, &tamper(&p, PartyId::Bob, hamdist::BOB_TO_CHARLIE, TamperAction::Omit));
    assert_eq!(r.status().exit_code(), 0);
}

#[test]
fn substitution_is_captured_by_the_extractor() {
    let p = hamdist_gf3();
    let r = active(&p, &Deviation::input_substitution(&p, PartyId::Alice, &[1, 1], true).unwrap());
    assert_eq!(r.status().exit_code(), 0);
}

#[test]
fn deviations_off_schedule_are_rejected() {
    let p = hamdist_gf3();
    let rule = TamperRule { slot: hamdist::BOB_TO_CHARLIE.into(), action: TamperAction::Omit };
    assert!(Deviation::message_tamper(&p, PartyId::Alice, vec![rule]).is_err());
    assert!(Deviation::uniform_final_share(&p, PartyId::Alice).is_err());
    assert!(Deviation::input_substitution(&p, PartyId::Charlie, &[0, 0], false).is_err());
    assert!(Deviation::input_substitution(&p, PartyId::Alice, &[0, 3], false).is_err());
}

#[test]
fn uniform_final_share_breaks_bgw_correctness() {
    let p = Protocol::bgw(BgwParams::new(1, 3, 5, None).unwrap());
    for party in [PartyId::Alice, PartyId::Bob] {
        let r = active(&p, &Deviation::uniform_final_share(&p, party).unwrap());
        let c = r.condition("correctness").unwrap();
        assert_eq!(c.verdict, VerdictTag::Violated);
        assert_eq!(c.violating_mass.as_deref(), Some("4/5"));
        // No extractor and outputs differ from honest: not checkable.
        assert_eq!(r.conditions.iter().filter(|c| c.verdict == VerdictTag::NotCheckable).count(), 2);
        assert_eq!(r.status().exit_code(), 2);
    }
}

#[test]
fn pass_through_tamper_on_bgw_uses_true_input() {
    let p = Protocol::bgw(BgwParams::new(1, 2, 5, None).unwrap());
    let d = Deviation::message_tamper(&p, PartyId::Alice, vec![]).unwrap();
    let r = active(&p, &d);
    assert_eq!(r.effective_input, Some(EffectiveInput::Identity));
    assert_eq!(verdict(&r, "alice-correctness"), VerdictTag::Holds);
}

#[test]
fn charlie_leaking_his_view_learns_only_f() {
    let p = hamdist_gf3();
    let r = active(&p, &Deviation::leak_view(&p, PartyId::Charlie).unwrap());
    assert_eq!(verdict(&r, "charlie-privacy"), VerdictTag::Holds);
    assert_eq!(verdict(&r, "charlie-correctness"), VerdictTag::Holds);
}
