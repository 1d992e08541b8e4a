//! Condition suites for the active and passive models, and the real versus
//! ideal comparison used to demonstrate attacks.

use num_rational::Ratio;
use serde::Serialize;

use super::ideal::{ideal_output_distribution, mass_outside, total_variation, Channel};
use super::indep::{check_almost_sure, check_cond_indep, Atom, IndepCheck, SureCheck, Verdict, Witness};
use super::joint::{JointDistribution, Value, Var};
use super::{build_joint, effective_input, evaluate_values, EffectiveInput, InputLaw, Options};
use crate::adversary::Deviation;
use crate::engine::exact::required_atoms;
use crate::engine::PartyId;
use crate::error::{Error, Result};
use crate::protocol::Protocol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictTag {
    Holds,
    Violated,
    NotCheckable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionRecord {
    pub id: &'static str,
    pub formula: &'static str,
    pub verdict: VerdictTag,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Conditional mutual information in bits; informational.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leakage_bits: Option<f64>,
    /// Probability of the atoms failing an almost-sure condition.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violating_mass: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ConditionRecord {
    fn from_verdict(id: &'static str, formula: &'static str, verdict: Verdict) -> Self {
        let (tag, witness) = match verdict {
            Verdict::Holds => (VerdictTag::Holds, None),
            Verdict::Violated(w) => (VerdictTag::Violated, Some(w)),
        };
        ConditionRecord { id, formula, verdict: tag, witness, leakage_bits: None, violating_mass: None, note: None }
    }

    fn indep(id: &'static str, formula: &'static str, check: IndepCheck) -> Self {
        let mut r = Self::from_verdict(id, formula, check.verdict);
        r.leakage_bits = Some(check.leakage_bits);
        r
    }

    fn sure(id: &'static str, formula: &'static str, check: SureCheck) -> Self {
        let mut r = Self::from_verdict(id, formula, check.verdict);
        r.violating_mass = Some(check.violating_mass.to_string());
        r
    }

    fn not_checkable(id: &'static str, formula: &'static str, note: String) -> Self {
        ConditionRecord {
            id,
            formula,
            verdict: VerdictTag::NotCheckable,
            witness: None,
            leakage_bits: None,
            violating_mass: None,
            note: Some(note),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    AllHold,
    Violated,
    NotCheckable,
}

impl Status {
    /// Process exit code for this status.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::AllHold => 0,
            Status::Violated => 2,
            Status::NotCheckable => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecurityReport {
    pub suite: &'static str,
    pub protocol: &'static str,
    pub deviation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<PartyId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_input: Option<EffectiveInput>,
    /// Number of weighted (input, joint tape) executions the verdicts cover.
    pub executions: u64,
    pub conditions: Vec<ConditionRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution: Option<JointDistribution>,
}

impl SecurityReport {
    /// Violations dominate; otherwise any unverifiable condition.
    pub fn status(&self) -> Status {
        if self.conditions.iter().any(|c| c.verdict == VerdictTag::Violated) {
            Status::Violated
        } else if self.conditions.iter().any(|c| c.verdict == VerdictTag::NotCheckable) {
            Status::NotCheckable
        } else {
            Status::AllHold
        }
    }

    pub fn condition(&self, id: &str) -> Option<&ConditionRecord> {
        self.conditions.iter().find(|c| c.id == id)
    }

    /// Adds the exact distribution of `vars`, or a not-checkable record when
    /// an effective input is requested that cannot be extracted.
    pub fn attach_distribution(
        &mut self,
        protocol: &Protocol,
        deviation: &Deviation,
        law: &InputLaw,
        vars: &[Var],
        options: &Options,
    ) -> Result<()> {
        match build_joint(protocol, deviation, law, vars, options) {
            Ok(d) => self.distribution = Some(d),
            Err(e @ Error::NoExtractor { .. }) => self.conditions.push(ConditionRecord::not_checkable(
                "tracked-variables",
                "distribution of the requested variables",
                e.to_string(),
            )),
            Err(e) => return Err(e),
        }
        Ok(())
    }
}

const CORRECTNESS: &str = "Pr[(U,V,W) = (∅,∅,f(X,Y))] = 1";

fn correctness(dist: &JointDistribution) -> ConditionRecord {
    let check = check_almost_sure(dist, |a| {
        a.get(Var::U).is_null() && a.get(Var::V).is_null() && *a.get(Var::W) == Value::Int(f_of(a))
    });
    ConditionRecord::sure("correctness", CORRECTNESS, check)
}

fn f_of(a: &Atom<'_>) -> u64 {
    match a.get(Var::F) {
        Value::Int(v) => *v,
        other => panic!("f takes integer values, got {other}"),
    }
}

struct Sides {
    own_out: Var,
    other_out: Var,
    own_in: Var,
    other_in: Var,
    effective: Var,
    privacy: (&'static str, &'static str),
    correct: (&'static str, &'static str),
}

fn sides(party: PartyId) -> Sides {
    match party {
        PartyId::Alice => Sides {
            own_out: Var::U,
            other_out: Var::V,
            own_in: Var::X,
            other_in: Var::Y,
            effective: Var::Xbar,
            privacy: ("alice-privacy", "I(U,X̄;Y|X) = 0"),
            correct: ("alice-correctness", "Pr[(V,W) = (∅,f(X̄,Y))] = 1"),
        },
        _ => Sides {
            own_out: Var::V,
            other_out: Var::U,
            own_in: Var::Y,
            other_in: Var::X,
            effective: Var::Ybar,
            privacy: ("bob-privacy", "I(V,Ȳ;X|Y) = 0"),
            correct: ("bob-correctness", "Pr[(U,W) = (∅,f(X,Ȳ))] = 1"),
        },
    }
}

fn executions(protocol: &Protocol, deviation: &Deviation, law: &InputLaw) -> Result<u64> {
    let starts = law.starts(protocol)?;
    let atoms = required_atoms(&deviation.programs(protocol), &starts);
    Ok(u64::try_from(atoms).unwrap_or(u64::MAX))
}

/// Checks the active-model conditions for the deviating party.
///
/// With an honest deviation only correctness applies. A deviating Alice or
/// Bob is checked against an effective input from the protocol's extractor
/// or, failing that, the input the deviation declares. Without either, the
/// conditions are verifiable only when correctness still holds, in which
/// case the true input serves; otherwise they are reported as not checkable
/// next to the failed correctness record.
pub fn check_active_suite(
    protocol: &Protocol,
    deviation: &Deviation,
    law: &InputLaw,
    options: &Options,
) -> Result<SecurityReport> {
    let mut report = SecurityReport {
        suite: "active",
        protocol: protocol.id(),
        deviation: deviation.label.clone(),
        target: deviation.target(),
        effective_input: None,
        executions: executions(protocol, deviation, law)?,
        conditions: Vec::new(),
        distribution: None,
    };
    let base = [Var::X, Var::Y, Var::U, Var::V, Var::W, Var::F];
    match deviation.target() {
        None => {
            let dist = build_joint(protocol, deviation, law, &base, options)?;
            report.conditions.push(correctness(&dist));
        }
        Some(PartyId::Charlie) => {
            let dist = build_joint(protocol, deviation, law, &base, options)?;
            let privacy = check_cond_indep(&dist, &[Var::W], &[Var::X, Var::Y], &[Var::F])?;
            report.conditions.push(ConditionRecord::indep("charlie-privacy", "I(W;X,Y|f(X,Y)) = 0", privacy));
            let sure = check_almost_sure(&dist, |a| a.get(Var::U).is_null() && a.get(Var::V).is_null());
            report.conditions.push(ConditionRecord::sure("charlie-correctness", "Pr[(U,V) = (∅,∅)] = 1", sure));
        }
        Some(party) => {
            let s = sides(party);
            match effective_input(protocol, deviation, party) {
                Some(source) => {
                    report.effective_input = Some(source);
                    let mut vars = base.to_vec();
                    vars.push(s.effective);
                    let dist = build_joint(protocol, deviation, law, &vars, options)?;
                    let privacy = check_cond_indep(&dist, &[s.own_out, s.effective], &[s.other_in], &[s.own_in])?;
                    report.conditions.push(ConditionRecord::indep(s.privacy.0, s.privacy.1, privacy));
                    let sure = check_almost_sure(&dist, |a| {
                        let (x, y) = match party {
                            PartyId::Alice => (a.get(Var::Xbar), a.get(Var::Y)),
                            _ => (a.get(Var::X), a.get(Var::Ybar)),
                        };
                        let expected = evaluate_values(protocol, x, y).map(Value::Int);
                        a.get(s.other_out).is_null() && Some(a.get(Var::W)) == expected.as_ref()
                    });
                    report.conditions.push(ConditionRecord::sure(s.correct.0, s.correct.1, sure));
                }
                None => {
                    let dist = build_joint(protocol, deviation, law, &base, options)?;
                    let honest = correctness(&dist);
                    if honest.verdict == VerdictTag::Holds {
                        // Outputs match the honest run, so the true input is an
                        // effective input and the own output is null.
                        report.effective_input = Some(EffectiveInput::Identity);
                        let privacy = check_cond_indep(&dist, &[s.own_out], &[s.other_in], &[s.own_in])?;
                        report.conditions.push(
                            ConditionRecord::indep(s.privacy.0, s.privacy.1, privacy)
                                .with_note("effective input taken as the true input"),
                        );
                        let sure = check_almost_sure(&dist, |a| {
                            a.get(s.other_out).is_null() && *a.get(Var::W) == Value::Int(f_of(a))
                        });
                        report.conditions.push(ConditionRecord::sure(s.correct.0, s.correct.1, sure));
                    } else {
                        let why = Error::NoExtractor { party, protocol: protocol.id() }.to_string();
                        report.conditions.push(ConditionRecord::not_checkable(s.privacy.0, s.privacy.1, why.clone()));
                        report.conditions.push(ConditionRecord::not_checkable(s.correct.0, s.correct.1, why));
                    }
                    report.conditions.push(honest);
                }
            }
        }
    }
    Ok(report)
}

/// Correctness and the three privacy conditions of the passive model, on
/// the protocol's honest programs.
pub fn check_passive_suite(protocol: &Protocol, law: &InputLaw, options: &Options) -> Result<SecurityReport> {
    let deviation = Deviation::honest();
    let vars = [Var::X, Var::Y, Var::U, Var::V, Var::W, Var::M1, Var::M2, Var::M3, Var::F];
    let dist = build_joint(protocol, &deviation, law, &vars, options)?;
    let conditions = vec![
        correctness(&dist),
        ConditionRecord::indep(
            "privacy-against-alice",
            "I(M1;Y,f(X,Y)|X) = 0",
            check_cond_indep(&dist, &[Var::M1], &[Var::Y, Var::F], &[Var::X])?,
        ),
        ConditionRecord::indep(
            "privacy-against-bob",
            "I(M2;X,f(X,Y)|Y) = 0",
            check_cond_indep(&dist, &[Var::M2], &[Var::X, Var::F], &[Var::Y])?,
        ),
        ConditionRecord::indep(
            "privacy-against-charlie",
            "I(M3;X,Y|f(X,Y)) = 0",
            check_cond_indep(&dist, &[Var::M3], &[Var::X, Var::Y], &[Var::F])?,
        ),
    ];
    Ok(SecurityReport {
        suite: "passive",
        protocol: protocol.id(),
        deviation: deviation.label.clone(),
        target: None,
        effective_input: None,
        executions: executions(protocol, &deviation, law)?,
        conditions,
        distribution: None,
    })
}

/// One ideal-model comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdealComparison {
    pub channel: Channel,
    pub distribution: JointDistribution,
    pub tvd: String,
    pub mass_outside_range: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackReport {
    pub protocol: &'static str,
    pub deviation: String,
    /// The party whose ideal-model input is substituted.
    pub substituting: PartyId,
    pub output_range: Vec<u64>,
    pub real: JointDistribution,
    pub real_mass_outside_range: String,
    /// Ideal model with honest inputs.
    pub ideal: IdealComparison,
    /// Ideal models with the listed substitution channels.
    pub channels: Vec<IdealComparison>,
    pub correctness: ConditionRecord,
}

impl AttackReport {
    pub fn tvd(&self) -> Ratio<u128> {
        parse_ratio(&self.ideal.tvd)
    }
}

fn parse_ratio(s: &str) -> Ratio<u128> {
    match s.split_once('/') {
        Some((n, d)) => Ratio::new(n.parse().expect("numerator"), d.parse().expect("denominator")),
        None => Ratio::from_integer(s.parse().expect("integer")),
    }
}

/// Real output distribution under `deviation` against the ideal model with
/// honest inputs and with each of `channels`.
pub fn attack_demo(
    protocol: &Protocol,
    deviation: &Deviation,
    law: &InputLaw,
    channels: &[Channel],
    options: &Options,
) -> Result<AttackReport> {
    let party = match deviation.target() {
        Some(PartyId::Bob) => PartyId::Bob,
        _ => PartyId::Alice,
    };
    let joint = build_joint(protocol, deviation, law, &[Var::X, Var::Y, Var::U, Var::V, Var::W, Var::F], options)?;
    let real = joint.marginal(&[Var::W])?;
    let range = protocol.output_range();
    let compare = |channel: &Channel| -> Result<IdealComparison> {
        let ideal = ideal_output_distribution(protocol, law, party, channel)?;
        Ok(IdealComparison {
            channel: channel.clone(),
            tvd: total_variation(&real, &ideal)?.to_string(),
            mass_outside_range: mass_outside(&ideal, Var::W, &range)?.to_string(),
            distribution: ideal,
        })
    };
    Ok(AttackReport {
        protocol: protocol.id(),
        deviation: deviation.label.clone(),
        substituting: party,
        output_range: range.iter().copied().collect(),
        real_mass_outside_range: mass_outside(&real, Var::W, &range)?.to_string(),
        ideal: compare(&Channel::Identity)?,
        channels: channels.iter().map(compare).collect::<Result<_>>()?,
        correctness: correctness(&joint),
        real,
    })
}
