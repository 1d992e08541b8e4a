use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::engine::{Message, PartyOutput, View};
use crate::error::{Error, Result};
use crate::field::FieldElement;

/// Random variables a joint distribution can track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    X,
    Y,
    U,
    V,
    W,
    M1,
    M2,
    M3,
    #[serde(rename = "Xbar", alias = "X̄")]
    Xbar,
    #[serde(rename = "Ybar", alias = "Ȳ")]
    Ybar,
    #[serde(rename = "f")]
    F,
}

impl Var {
    pub const ALL: [Var; 11] =
        [Var::X, Var::Y, Var::U, Var::V, Var::W, Var::M1, Var::M2, Var::M3, Var::Xbar, Var::Ybar, Var::F];

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "X",
            Var::Y => "Y",
            Var::U => "U",
            Var::V => "V",
            Var::W => "W",
            Var::M1 => "M1",
            Var::M2 => "M2",
            Var::M3 => "M3",
            Var::Xbar => "Xbar",
            Var::Ybar => "Ybar",
            Var::F => "f",
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Var {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X̄" => return Ok(Var::Xbar),
            "Ȳ" => return Ok(Var::Ybar),
            _ => {}
        }
        Var::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| Error::UnknownVariable(s.into()))
    }
}

/// Value of one variable in one atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(untagged)]
pub enum Value {
    Null,
    Int(u64),
    Words(Vec<u64>),
}

impl Value {
    pub fn seq(seq: &[FieldElement]) -> Self {
        Value::Words(seq.iter().map(|e| e.index() as u64).collect())
    }

    pub fn output(out: &PartyOutput) -> Self {
        match out {
            PartyOutput::Null => Value::Null,
            PartyOutput::Value(v) => Value::Int(*v),
            PartyOutput::Words(w) => Value::Words(w.iter().map(|&x| x as u64).collect()),
        }
    }

    /// Flat encoding of a view: input, tape, then each received payload with
    /// its length, in schedule order.
    pub fn view(view: &View) -> Self {
        let mut words: Vec<u64> = Vec::new();
        words.push(view.input.len() as u64);
        words.extend(view.input.iter().map(|e| e.index() as u64));
        words.push(view.tape.len() as u64);
        words.extend(view.tape.iter().map(|&t| t as u64));
        for r in &view.received {
            let payload = crate::adversary::message_words(&r.message);
            let tag = match r.message {
                Message::Sequence(_) => 0,
                Message::Permutation(_) => 1,
                Message::Share(_) => 2,
                Message::Missing => 3,
            };
            words.push(tag);
            words.push(payload.len() as u64);
            words.extend(payload);
        }
        Value::Words(words)
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("∅"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Words(w) => {
                let parts: Vec<String> = w.iter().map(u64::to_string).collect();
                write!(f, "({})", parts.join(","))
            }
        }
    }
}

/// Exact distribution over named variables as integer counts.
///
/// The probability of an atom is its count divided by [`Self::denominator`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointDistribution {
    vars: Vec<Var>,
    atoms: BTreeMap<Vec<Value>, u64>,
    total: u64,
}

impl JointDistribution {
    pub fn new(vars: Vec<Var>) -> Result<Self> {
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::OverlappingVariables(v.name().into()));
            }
        }
        Ok(JointDistribution { vars, atoms: BTreeMap::new(), total: 0 })
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn add(&mut self, values: Vec<Value>, count: u64) {
        assert_eq!(values.len(), self.vars.len(), "atom arity");
        if count == 0 {
            return;
        }
        *self.atoms.entry(values).or_insert(0) += count;
        self.total = self.total.checked_add(count).expect("distribution total overflows u64");
    }

    /// Adds every atom of `other`, which must track the same variables.
    pub fn merge(&mut self, other: &JointDistribution) -> Result<()> {
        if other.vars != self.vars {
            return Err(Error::DomainMismatch(self.describe(), other.describe()));
        }
        for (k, &c) in &other.atoms {
            self.add(k.clone(), c);
        }
        Ok(())
    }

    pub fn denominator(&self) -> u64 {
        self.total
    }

    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    /// Atoms in canonical order.
    pub fn atoms(&self) -> impl Iterator<Item = (&[Value], u64)> + '_ {
        self.atoms.iter().map(|(k, &c)| (k.as_slice(), c))
    }

    pub fn count(&self, values: &[Value]) -> u64 {
        self.atoms.get(values).copied().unwrap_or(0)
    }

    pub fn probability(&self, values: &[Value]) -> Ratio<u64> {
        Ratio::new(self.count(values), self.total.max(1))
    }

    pub fn index_of(&self, var: Var) -> Result<usize> {
        self.vars.iter().position(|&v| v == var).ok_or_else(|| Error::UnknownVariable(var.name().into()))
    }

    pub fn marginal(&self, vars: &[Var]) -> Result<JointDistribution> {
        let idx: Vec<usize> = vars.iter().map(|&v| self.index_of(v)).collect::<Result<_>>()?;
        let mut out = JointDistribution::new(vars.to_vec())?;
        for (k, &c) in &self.atoms {
            out.add(idx.iter().map(|&i| k[i].clone()).collect(), c);
        }
        Ok(out)
    }

    /// Same distribution with every count scaled by `factor`.
    pub fn scaled(&self, factor: u64) -> JointDistribution {
        JointDistribution {
            vars: self.vars.clone(),
            atoms: self.atoms.iter().map(|(k, &c)| (k.clone(), c * factor)).collect(),
            total: self.total * factor,
        }
    }

    fn describe(&self) -> String {
        let names: Vec<&str> = self.vars.iter().map(|v| v.name()).collect();
        names.join(",")
    }
}

impl Serialize for JointDistribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Atom<'a> {
            values: &'a [Value],
            count: u64,
        }
        let atoms: Vec<Atom<'_>> = self.atoms.iter().map(|(k, &c)| Atom { values: k, count: c }).collect();
        let mut st = s.serialize_struct("JointDistribution", 3)?;
        st.serialize_field("variables", &self.vars)?;
        st.serialize_field("denominator", &self.total)?;
        st.serialize_field("atoms", &atoms)?;
        st.end()
    }
}
