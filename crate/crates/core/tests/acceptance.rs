//! Acceptance run. Prints one line per criterion and fails on any result
//! that is not listed in `KNOWN_FAILURES`.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use trilab_core::adversary::{Deviation, TamperAction, TamperRule};
use trilab_core::analyzer::{
    build_joint, check_active_suite, check_cond_indep, Channel, EffectiveInput, InputLaw, JointDistribution, Options,
    Status, Value, Var, VerdictTag,
};
use trilab_core::bgw;
use trilab_core::engine::exact::{explore_exhaustive, Observe, Order};
use trilab_core::engine::{PartyId, PartyOutput};
use trilab_core::hamdist::{self, HamDistParams};
use trilab_core::protocol::Protocol;
use trilab_core::scenario::Scenario;
use trilab_core::Field;

/// Criteria expected to fail, with the reason.
const KNOWN_FAILURES: &[(u32, &str)] =
    &[(7, "r is not re-randomized, so Charlie's three shares of r fix its quadratic coefficient")];

const SHUFFLED: Order = Order::Shuffled(0x5eed);

struct Outcome {
    pass: bool,
    detail: String,
    /// Canonical serialization of everything the criterion computed.
    report: String,
}

fn outcome(pass: bool, detail: impl Into<String>, report: &impl Serialize) -> Outcome {
    Outcome { pass, detail: detail.into(), report: serde_json::to_string(report).expect("serializes") }
}

fn options(order: Order) -> Options {
    Options { order, ..Options::default() }
}

fn scenario(name: &str) -> Scenario {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"));
    Scenario::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn hamdist_protocol(order: u32) -> Protocol {
    Protocol::hamdist(HamDistParams::new(2, Field::of_order(order).unwrap()).unwrap())
}

fn w_marginal(dist: &JointDistribution) -> Vec<(u64, Ratio<u64>)> {
    let w = dist.marginal(&[Var::W]).unwrap();
    w.atoms()
        .map(|(v, _)| match v[0] {
            Value::Int(k) => (k, w.probability(v)),
            ref other => panic!("W = {other:?}"),
        })
        .collect()
}

fn field_axioms() -> Outcome {
    let mut failures = Vec::new();
    for order in [2, 3, 4, 5, 8, 9] {
        let f = Field::of_order(order).unwrap();
        let all = f.elements();
        let (zero, one) = (f.zero(), f.one());
        let mut ok = all.len() == order as usize;
        for &a in &all {
            ok &= a + zero == a && a * one == a && a + (-a) == zero;
            ok &= a.is_zero() || a * a.inv().unwrap() == one;
            for &b in &all {
                ok &= a + b == b + a && a * b == b * a;
                for &c in &all {
                    ok &= (a + b) + c == a + (b + c);
                    ok &= (a * b) * c == a * (b * c);
                    ok &= a * (b + c) == a * b + a * c;
                }
            }
        }
        if !ok {
            failures.push(order);
        }
    }
    let detail = if failures.is_empty() {
        "GF(2,3,4,5,8,9) exhaustive".to_string()
    } else {
        format!("axioms fail for orders {failures:?}")
    };
    outcome(failures.is_empty(), detail, &failures)
}

fn hamdist_correctness(order: Order) -> Outcome {
    let p = hamdist_protocol(3);
    let starts = InputLaw::Uniform.starts(&p).unwrap();
    let runs =
        explore_exhaustive(p.schedule(), &p.honest_programs(), &starts, &Observe::default(), order, 10_000).unwrap();
    let total: u64 = runs.iter().map(|(_, c)| c).sum();
    let wrong = runs
        .iter()
        .filter(|(o, _)| {
            let s = &starts[o.start];
            o.outputs != [PartyOutput::Null, PartyOutput::Null, PartyOutput::Value(p.evaluate(&s.x, &s.y))]
        })
        .count();
    let pass = wrong == 0 && starts.len() == 81 && total == 81 * 72;
    let vars = [Var::X, Var::Y, Var::U, Var::V, Var::W];
    let dist = build_joint(&p, &Deviation::honest(), &InputLaw::Uniform, &vars, &options(order)).unwrap();
    outcome(pass, format!("{} inputs x 72 tapes, {total} runs, {wrong} wrong", starts.len()), &dist)
}

fn hamdist_passive(order: Order) -> Outcome {
    let passive = scenario("hamdist-passive").analyze(&options(order)).unwrap();
    let control = scenario("hamdist-identity-permutation").analyze(&options(order)).unwrap();
    let leak = control.condition("privacy-against-charlie").unwrap();
    let pass = passive.status() == Status::AllHold && leak.verdict == VerdictTag::Violated;
    let detail = format!(
        "{} executions, all hold: {}; identity permutation leaks {:.3} bits to Charlie",
        passive.executions,
        passive.status() == Status::AllHold,
        leak.leakage_bits.unwrap_or(0.0)
    );
    outcome(pass, detail, &(passive, control))
}

fn rule(slot: &str, action: TamperAction) -> Vec<TamperRule> {
    vec![TamperRule { slot: slot.into(), action }]
}

fn hamdist_active(order: Order) -> Outcome {
    let p = hamdist_protocol(3);
    let tamper = |party, slot: &str, action| Deviation::message_tamper(&p, party, rule(slot, action)).unwrap();
    let deviations = vec![
        Deviation::input_substitution(&p, PartyId::Alice, &[0, 0], false).unwrap(),
        Deviation::input_substitution(&p, PartyId::Alice, &[1, 2], true).unwrap(),
        tamper(PartyId::Alice, hamdist::SCALARS, TamperAction::ZeroAt { position: 1 }),
        tamper(PartyId::Alice, hamdist::ALICE_TO_CHARLIE, TamperAction::Omit),
        tamper(PartyId::Alice, hamdist::ALICE_TO_CHARLIE, TamperAction::RandomTable { seed: 11 }),
        tamper(PartyId::Alice, hamdist::PERMUTATION, TamperAction::Omit),
        Deviation::input_substitution(&p, PartyId::Bob, &[2, 2], false).unwrap(),
        Deviation::input_substitution(&p, PartyId::Bob, &[1, 0], true).unwrap(),
        tamper(PartyId::Bob, hamdist::BOB_TO_CHARLIE, TamperAction::ZeroAt { position: 0 }),
        tamper(PartyId::Bob, hamdist::BOB_TO_CHARLIE, TamperAction::Omit),
        tamper(PartyId::Bob, hamdist::BOB_TO_CHARLIE, TamperAction::RandomTable { seed: 5 }),
        tamper(PartyId::Bob, hamdist::BOB_TO_CHARLIE, TamperAction::Uniform),
    ];
    let reports: Vec<_> =
        deviations.iter().map(|d| check_active_suite(&p, d, &InputLaw::Uniform, &options(order)).unwrap()).collect();
    let failing: Vec<&str> = reports
        .iter()
        .filter(|r| r.status() != Status::AllHold || r.effective_input != Some(EffectiveInput::Extractor))
        .map(|r| r.deviation.as_str())
        .collect();
    let per = |party| reports.iter().filter(|r| r.target == Some(party)).count();
    let (alice, bob) = (per(PartyId::Alice), per(PartyId::Bob));
    let pass = failing.is_empty() && alice >= 5 && bob >= 5;
    let detail = format!("{alice} Alice and {bob} Bob deviations, failing: {failing:?}");
    outcome(pass, detail, &reports)
}

fn hamdist_charlie(order: Order) -> Outcome {
    let mut reports = Vec::new();
    for q in [3, 4] {
        let p = hamdist_protocol(q);
        let d = Deviation::leak_view(&p, PartyId::Charlie).unwrap();
        reports.push(check_active_suite(&p, &d, &InputLaw::Uniform, &options(order)).unwrap());
    }
    let holds = |r: &trilab_core::analyzer::SecurityReport| {
        r.condition("charlie-privacy").map(|c| c.verdict) == Some(VerdictTag::Holds)
    };
    let pass = reports.iter().all(holds);
    let detail = format!("I(W;X,Y|f) = 0 at GF(3): {}, GF(4): {}", holds(&reports[0]), holds(&reports[1]));
    outcome(pass, detail, &reports)
}

fn bgw_interpolation() -> Outcome {
    let f = Field::prime(5).unwrap();
    let mut wrong = Vec::new();
    let mut count = 0;
    for c0 in f.elements() {
        for c1 in f.elements() {
            for c2 in f.elements() {
                let eval = |e: i64| {
                    let e = f.from_int(e);
                    c0 + c1 * e + c2 * e * e
                };
                count += 1;
                if bgw::interpolate_r0(eval(1), eval(2), eval(3)) != c0 {
                    wrong.push([c0.index(), c1.index(), c2.index()]);
                }
            }
        }
    }
    outcome(wrong.is_empty() && count == 125, format!("{count} polynomials over Z_5, {} wrong", wrong.len()), &wrong)
}

fn bgw_passive(order: Order) -> Outcome {
    let report = scenario("bgw-passive").analyze(&options(order)).unwrap();
    let violated: Vec<String> = report
        .conditions
        .iter()
        .filter(|c| c.verdict != VerdictTag::Holds)
        .map(|c| match c.leakage_bits {
            Some(bits) => format!("{} ({bits:.3} bits)", c.id),
            None => c.id.to_string(),
        })
        .collect();
    let detail = if violated.is_empty() {
        format!("{} executions, all hold", report.executions)
    } else {
        format!("{} executions, violated: {}", report.executions, violated.join(", "))
    };
    outcome(report.status() == Status::AllHold && report.executions == 16 * 625, detail, &report)
}

fn bgw_hamming(order: Order) -> Outcome {
    let report = scenario("bgw-hamming-demo").attack_demo(&options(order)).unwrap();
    let real = w_marginal(&report.real);
    let ideal = w_marginal(&report.ideal.distribution);
    let uniform = real.len() == 5 && real.iter().enumerate().all(|(k, &(w, p))| w == k as u64 && p == Ratio::new(1, 5));
    let binomial = ideal
        .iter()
        .map(|&(w, p)| (w, p))
        .eq([1, 4, 6, 4, 1].into_iter().enumerate().map(|(k, c)| (k as u64, Ratio::new(c, 16))));
    // Independent TVD over the union of supports.
    let mut tvd = Ratio::from_integer(0u128);
    for w in 0..5u64 {
        let get = |d: &[(u64, Ratio<u64>)]| {
            d.iter()
                .find(|(k, _)| *k == w)
                .map_or(Ratio::from_integer(0u128), |(_, p)| Ratio::new(u128::from(*p.numer()), u128::from(*p.denom())))
        };
        let (a, b) = (get(&real), get(&ideal));
        tvd += if a > b { a - b } else { b - a };
    }
    tvd /= 2;
    let violated = report.correctness.verdict == VerdictTag::Violated;
    let pass = uniform && binomial && tvd == report.tvd() && tvd > Ratio::from_integer(0) && violated;
    let detail = format!(
        "real uniform: {uniform}, ideal (1,4,6,4,1)/16: {binomial}, TVD {} (exact {tvd}), correctness violated: {violated}",
        report.tvd()
    );
    outcome(pass, detail, &report)
}

fn bgw_quadratic(order: Order) -> Outcome {
    let report = scenario("bgw-quadratic-demo").attack_demo(&options(order)).unwrap();
    let mut range = BTreeSet::new();
    for x in 0..3 {
        for y in 0..3 {
            range.insert(bgw::quadratic_distance(&[x], &[y]));
        }
    }
    let maps: BTreeSet<Vec<u64>> = report
        .channels
        .iter()
        .filter_map(|c| match &c.channel {
            Channel::Map { entries } => {
                let mut image = vec![u64::MAX; 3];
                for e in entries {
                    image[e.from[0] as usize] = e.to[0];
                }
                Some(image)
            }
            _ => None,
        })
        .collect();
    let has_uniform = report.channels.iter().any(|c| c.channel == Channel::Uniform);
    let ideal_inside = report.channels.iter().all(|c| c.mass_outside_range == "0");
    let range_ok = range.iter().copied().eq(report.output_range.iter().copied()) && range == [0, 1, 4].into();
    let pass = report.real_mass_outside_range == "2/5" && range_ok && maps.len() == 27 && has_uniform && ideal_inside;
    let detail = format!(
        "real P(W outside {{0,1,4}}) = {}, {} deterministic channels + uniform: {has_uniform}, all ideal mass inside: {ideal_inside}",
        report.real_mass_outside_range,
        maps.len()
    );
    outcome(pass, detail, &report)
}

// Four ternary variables: A as U, B as V, and X, Y.
fn random_joint(rng: &mut ChaCha8Rng, shape: usize) -> JointDistribution {
    let mut d = JointDistribution::new(vec![Var::U, Var::V, Var::X, Var::Y]).unwrap();
    let w = |rng: &mut ChaCha8Rng| -> u64 {
        if rng.gen_bool(0.2) {
            0
        } else {
            rng.gen_range(1..4)
        }
    };
    let table = |rng: &mut ChaCha8Rng, n: usize| -> Vec<u64> { (0..n).map(|_| w(rng)).collect() };
    let pb = table(rng, 3);
    let pa_b = table(rng, 9);
    let px_b = table(rng, 9);
    let py_bx = table(rng, 27);
    let py_abx = table(rng, 81);
    let pxy_b = table(rng, 27);
    let free = table(rng, 81);
    for a in 0..3 {
        for b in 0..3 {
            for x in 0..3 {
                for y in 0..3 {
                    let count = match shape {
                        // A - B - (X, Y)
                        0 => pb[b] * pa_b[3 * b + a] * pxy_b[9 * b + 3 * x + y],
                        // A - B - X and A - (B, X) - Y
                        1 => pb[b] * pa_b[3 * b + a] * px_b[3 * b + x] * py_bx[9 * b + 3 * x + y],
                        // A - B - X only
                        2 => pb[b] * pa_b[3 * b + a] * px_b[3 * b + x] * py_abx[27 * a + 9 * b + 3 * x + y],
                        _ => free[27 * a + 9 * b + 3 * x + y],
                    };
                    if count > 0 {
                        d.add(
                            vec![
                                Value::Int(a as u64),
                                Value::Int(b as u64),
                                Value::Int(x as u64),
                                Value::Int(y as u64),
                            ],
                            count,
                        );
                    }
                }
            }
        }
    }
    d
}

fn markov_chain_rules() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut split_bad, mut compose_bad) = (Vec::new(), Vec::new());
    let (mut chains, mut premises, mut built) = (0, 0, 0);
    while built < 1000 {
        let d = random_joint(&mut rng, built % 4);
        if d.denominator() == 0 {
            continue;
        }
        built += 1;
        let holds = |b: &[Var], c: &[Var]| check_cond_indep(&d, &[Var::U], b, c).unwrap().verdict.holds();
        let joint = holds(&[Var::X, Var::Y], &[Var::V]);
        let a_b_x = holds(&[Var::X], &[Var::V]);
        let a_bx_y = holds(&[Var::Y], &[Var::V, Var::X]);
        let a_b_y = holds(&[Var::Y], &[Var::V]);
        chains += joint as usize;
        premises += (a_b_x && a_bx_y) as usize;
        if joint != (a_b_x && a_bx_y) {
            split_bad.push(built);
        }
        if a_b_x && a_bx_y && !a_b_y {
            compose_bad.push(built);
        }
    }
    let pass = split_bad.is_empty() && compose_bad.is_empty() && chains >= 100 && premises >= 100;
    let detail = format!(
        "{built} joints, {chains} with A-B-(X,Y), {premises} with both premises; counterexamples {} and {}",
        split_bad.len(),
        compose_bad.len()
    );
    outcome(pass, detail, &(split_bad, compose_bad))
}

type Rerun = fn(Order) -> Outcome;

/// Number, time limit in seconds, check.
type Criterion = (u32, Option<u64>, Box<dyn Fn() -> Outcome>);

fn determinism() -> Outcome {
    let runs: [(u32, Rerun); 7] = [
        (2, hamdist_correctness),
        (3, hamdist_passive),
        (4, hamdist_active),
        (5, hamdist_charlie),
        (7, bgw_passive),
        (8, bgw_hamming),
        (9, bgw_quadratic),
    ];
    let mut differ = Vec::new();
    for (n, f) in runs {
        if f(Order::Canonical).report != f(SHUFFLED).report {
            differ.push(n);
        }
    }
    // Criterion 6 enumerates no executions; its report is order free.
    let detail = format!("criteria 2-5 and 7-9 rerun shuffled, differing: {differ:?}");
    outcome(differ.is_empty(), detail, &differ)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (1, Some(1), Box::new(field_axioms)),
        (2, Some(1), Box::new(|| hamdist_correctness(Order::Canonical))),
        (3, Some(5), Box::new(|| hamdist_passive(Order::Canonical))),
        (4, Some(30), Box::new(|| hamdist_active(Order::Canonical))),
        (5, Some(30), Box::new(|| hamdist_charlie(Order::Canonical))),
        (6, Some(1), Box::new(bgw_interpolation)),
        (7, Some(10), Box::new(|| bgw_passive(Order::Canonical))),
        (8, Some(30), Box::new(|| bgw_hamming(Order::Canonical))),
        (9, Some(10), Box::new(|| bgw_quadratic(Order::Canonical))),
        (10, Some(30), Box::new(markov_chain_rules)),
        (11, None, Box::new(determinism)),
    ];
    let mut unexpected = Vec::new();
    for (n, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|s| elapsed < Duration::from_secs(s));
        let pass = result.pass && in_time;
        let timing = match limit {
            Some(s) => format!("{:.2} s, limit {s} s", elapsed.as_secs_f64()),
            None => format!("{:.2} s", elapsed.as_secs_f64()),
        };
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == n);
        let mut line = format!("criterion {n}: {} ({}; {timing})", if pass { "PASS" } else { "FAIL" }, result.detail);
        match (pass, known) {
            (false, Some((_, why))) => line.push_str(&format!(" [known: {why}]")),
            (false, None) => unexpected.push(n),
            (true, _) => {}
        }
        println!("{line}");
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
