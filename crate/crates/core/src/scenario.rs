//! Scenario files: a protocol, at most one deviation, an input law and what
//! to check.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{Deviation, DeviationKind, DeviationSpec};
use crate::analyzer::{
    attack_demo, check_active_suite, check_passive_suite, AttackReport, Channel, InputLaw, Options, SecurityReport, Var,
};
use crate::engine::{run, ExecutionRecord, PartyId};
use crate::error::{Error, Result};
use crate::protocol::{Protocol, ProtocolSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    /// Conditions for the deviation's target; correctness when honest.
    #[default]
    Active,
    /// Correctness and the three privacy conditions on honest programs.
    Passive,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<PathBuf>,
}

impl Outputs {
    fn is_empty(&self) -> bool {
        self.report.is_none() && self.distribution.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub protocol: ProtocolSpec,
    #[serde(default)]
    pub deviation: DeviationSpec,
    #[serde(default)]
    pub input_law: InputLaw,
    #[serde(default)]
    pub suite: SuiteKind,
    /// Variables whose exact joint distribution is added to the report.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tracked: Vec<String>,
    /// Most (input, tape) atoms the analysis may stand for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    /// Substitution channels compared by the attack demonstration.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub channels: Vec<Channel>,
    #[serde(default, skip_serializing_if = "Outputs::is_empty")]
    pub output: Outputs,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Scenario::from_toml(&text)
    }

    /// Resolves every reference; loading fails on the first bad one.
    pub fn validate(&self) -> Result<()> {
        if self.budget == Some(0) {
            return Err(Error::Scenario("budget must be positive".into()));
        }
        let protocol = self.protocol()?;
        self.deviation(&protocol)?;
        self.tracked_vars()?;
        self.input_law.starts(&protocol)?;
        if self.suite == SuiteKind::Passive && self.deviation.kind != DeviationKind::Honest {
            return Err(Error::Scenario("the passive suite runs honest programs only".into()));
        }
        Ok(())
    }

    pub fn protocol(&self) -> Result<Protocol> {
        Protocol::from_spec(&self.protocol)
    }

    pub fn deviation(&self, protocol: &Protocol) -> Result<Deviation> {
        Deviation::from_spec(protocol, &self.deviation)
    }

    pub fn tracked_vars(&self) -> Result<Vec<Var>> {
        self.tracked.iter().map(|s| s.parse()).collect()
    }

    pub fn analyze(&self, options: &Options) -> Result<SecurityReport> {
        let protocol = self.protocol()?;
        let deviation = self.deviation(&protocol)?;
        let mut report = match self.suite {
            SuiteKind::Active => check_active_suite(&protocol, &deviation, &self.input_law, options)?,
            SuiteKind::Passive => check_passive_suite(&protocol, &self.input_law, options)?,
        };
        let vars = self.tracked_vars()?;
        if !vars.is_empty() {
            report.attach_distribution(&protocol, &deviation, &self.input_law, &vars, options)?;
        }
        Ok(report)
    }

    pub fn attack_demo(&self, options: &Options) -> Result<AttackReport> {
        let protocol = self.protocol()?;
        let deviation = self.deviation(&protocol)?;
        attack_demo(&protocol, &deviation, &self.input_law, &self.channels, options)
    }

    /// One execution on explicit inputs, with every tape drawn from `seed`.
    pub fn run(&self, x: &[u64], y: &[u64], seed: u64) -> Result<ExecutionRecord> {
        let protocol = self.protocol()?;
        let programs = self.deviation(&protocol)?.programs(&protocol);
        let x = protocol.parse_input(PartyId::Alice, x)?;
        let y = protocol.parse_input(PartyId::Bob, y)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tapes = std::array::from_fn(|p| programs[p].tape_space().sample(&mut rng));
        Ok(run(protocol.schedule(), &programs, &x, &y, &tapes)?)
    }
}

/// A report next to the scenario that produced it.
#[derive(Debug, Serialize)]
pub struct ScenarioReport<'a, T: Serialize> {
    pub scenario: &'a Scenario,
    #[serde(flatten)]
    pub report: T,
}

#[cfg(test)]
mod tests {
    use super::*;

    const PASSIVE: &str = r#"
        name = "p"
        suite = "passive"
        protocol = { id = "hamdist", n = 2, field = { p = 3 } }
    "#;

    #[test]
    fn minimal_scenario_loads_with_defaults() {
        let s = Scenario::from_toml(PASSIVE).unwrap();
        assert_eq!(s.input_law, InputLaw::Uniform);
        assert_eq!(s.deviation.kind, DeviationKind::Honest);
        assert_eq!(s.budget, None);
    }

    #[test]
    fn bad_references_are_rejected() {
        let cases = [
            "name = \"a\"\nprotocol = { id = \"bgw\", n = 2, s = 2, N = 4 }",
            "name = \"a\"\nprotocol = { id = \"nope\" }",
            "name = \"a\"\nbudget = 0\nprotocol = { id = \"bgw\", n = 1, s = 2, N = 5 }",
            "name = \"a\"\ntracked = [\"Q\"]\nprotocol = { id = \"bgw\", n = 1, s = 2, N = 5 }",
            "name = \"a\"\nprotocol = { id = \"bgw\", n = 1, s = 2, N = 5 }\ndeviation = { kind = \"leak_view\" }",
            "name = \"a\"\nsuite = \"passive\"\nprotocol = { id = \"bgw\", n = 1, s = 2, N = 5 }\n\
             deviation = { target = \"charlie\", kind = \"leak_view\" }",
            "name = \"a\"\nprotocol = { id = \"bgw\", n = 1, s = 2, N = 5 }\nunknown = 1",
        ];
        for text in cases {
            assert!(Scenario::from_toml(text).is_err(), "accepted: {text}");
        }
    }

    #[test]
    fn runs_are_reproducible_per_seed() {
        let s = Scenario::from_toml(PASSIVE).unwrap();
        let a = s.run(&[0, 1], &[0, 2], 7).unwrap();
        assert_eq!(a, s.run(&[0, 1], &[0, 2], 7).unwrap());
        assert_eq!(a.outputs[2], crate::engine::PartyOutput::Value(1));
        assert!(s.run(&[0, 3], &[0, 2], 7).is_err());
    }
}
