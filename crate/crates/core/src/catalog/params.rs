//! Named parameter sets and the flat `key = value` parameter-file format.
//!
//! ```text
//! # constants
//! mu0 = 1.5
//! # function slots: kind, then arguments
//! rho = poly
//! rho.c2 = 0.3
//! # words
//! profile = jacobi-ex1
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{validation, Error, Result};
use crate::function::{Function1D, Kind};

/// Independent variable of a function slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    R,
    Phi,
    Z,
}

impl Variable {
    pub fn name(self) -> &'static str {
        match self {
            Variable::R => "r",
            Variable::Phi => "phi",
            Variable::Z => "Z",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstSpec {
    pub name: &'static str,
    pub default: Option<f64>,
    pub doc: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotSpec {
    pub name: &'static str,
    pub variable: Variable,
    pub doc: &'static str,
}

impl SlotSpec {
    pub fn periodic(&self) -> bool {
        self.variable == Variable::Phi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordSpec {
    pub name: &'static str,
    pub choices: &'static [&'static str],
    pub default: &'static str,
}

/// Parameter schema of a family.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schema {
    pub constants: Vec<ConstSpec>,
    pub slots: Vec<SlotSpec>,
    pub words: Vec<WordSpec>,
}

impl Schema {
    pub fn render(&self) -> String {
        let mut out = String::new();
        if !self.words.is_empty() {
            out.push_str("selectors:\n");
            for w in &self.words {
                let _ = writeln!(out, "  {} = {} (default {})", w.name, w.choices.join(" | "), w.default);
            }
        }
        if !self.constants.is_empty() {
            out.push_str("constants:\n");
            for c in &self.constants {
                let default = c.default.map(|d| format!(" (default {d})")).unwrap_or_default();
                let _ = writeln!(out, "  {}{}: {}", c.name, default, c.doc);
            }
        }
        if !self.slots.is_empty() {
            out.push_str("function slots (kinds: zero | const | poly | power | trig | exp2, default zero):\n");
            for s in &self.slots {
                let periodic = if s.periodic() {
                    ", 2pi-periodic (integer k in trig)"
                } else {
                    ""
                };
                let _ = writeln!(out, "  {}({}){}: {}", s.name, s.variable.name(), periodic, s.doc);
            }
        }
        out
    }
}

/// Constants, function slots and selector words of one system.
#[derive(Debug, Clone, Default)]
pub struct ParamSet {
    constants: BTreeMap<String, f64>,
    slots: BTreeMap<String, Function1D>,
    words: BTreeMap<String, String>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_const(mut self, name: &str, value: f64) -> Self {
        self.constants.insert(name.to_string(), value);
        self
    }

    pub fn with_slot(mut self, name: &str, f: Function1D) -> Self {
        self.slots.insert(name.to_string(), f);
        self
    }

    pub fn with_word(mut self, name: &str, value: &str) -> Self {
        self.words.insert(name.to_string(), value.to_string());
        self
    }

    pub fn set_const(&mut self, name: &str, value: f64) {
        self.constants.insert(name.to_string(), value);
    }

    pub fn constants(&self) -> &BTreeMap<String, f64> {
        &self.constants
    }

    pub fn slots(&self) -> &BTreeMap<String, Function1D> {
        &self.slots
    }

    pub fn words(&self) -> &BTreeMap<String, String> {
        &self.words
    }

    /// Rejects keys that are not part of `schema`.
    pub fn check_keys(&self, schema: &Schema) -> Result<()> {
        for k in self.constants.keys() {
            if !schema.constants.iter().any(|c| c.name == k) {
                return Err(validation(format!("unknown constant '{k}'")));
            }
        }
        for k in self.slots.keys() {
            if !schema.slots.iter().any(|s| s.name == k) {
                return Err(validation(format!("unknown function slot '{k}'")));
            }
        }
        for (k, v) in &self.words {
            if schema.slots.iter().any(|s| s.name == k) {
                return Err(validation(format!(
                    "slot {k}: unknown function kind '{v}' (expected {})",
                    KINDS.join(" | ")
                )));
            }
            let spec = schema
                .words
                .iter()
                .find(|w| w.name == k)
                .ok_or_else(|| validation(format!("unknown selector '{k}'")))?;
            if !spec.choices.contains(&v.as_str()) {
                return Err(validation(format!(
                    "{k} must be one of {}, got '{v}'",
                    spec.choices.join(" | ")
                )));
            }
        }
        for s in &schema.slots {
            if let (true, Some(Kind::Trig { k, .. })) = (s.periodic(), self.slots.get(s.name).and_then(|f| f.kind())) {
                if k.fract() != 0.0 {
                    return Err(validation(format!(
                        "periodic slot {} needs an integer trig frequency, got k = {k}",
                        s.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Constant value, falling back to the schema default.
    pub fn constant(&self, schema: &Schema, name: &str) -> Result<f64> {
        if let Some(v) = self.constants.get(name) {
            if !v.is_finite() {
                return Err(validation(format!("{name} must be finite")));
            }
            return Ok(*v);
        }
        schema
            .constants
            .iter()
            .find(|c| c.name == name)
            .and_then(|c| c.default)
            .ok_or_else(|| validation(format!("missing required constant '{name}'")))
    }

    pub fn slot(&self, name: &str) -> Function1D {
        self.slots.get(name).cloned().unwrap_or_else(Function1D::zero)
    }

    pub fn word<'a>(&'a self, schema: &'a Schema, name: &str) -> &'a str {
        self.words
            .get(name)
            .map(String::as_str)
            .or_else(|| schema.words.iter().find(|w| w.name == name).map(|w| w.default))
            .unwrap_or("")
    }

    /// Parses the flat parameter-file text.
    pub fn parse(text: &str) -> Result<Self> {
        let mut numbers: BTreeMap<String, f64> = BTreeMap::new();
        let mut words: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(Error::Parse(format!("line {}: empty key or value", lineno + 1)));
            }
            let dup = match v.parse::<f64>() {
                Ok(x) => numbers.insert(k.to_string(), x).is_some() || words.contains_key(k),
                Err(_) => words.insert(k.to_string(), v.to_string()).is_some() || numbers.contains_key(k),
            };
            if dup {
                return Err(Error::Parse(format!("line {}: duplicate key '{k}'", lineno + 1)));
            }
        }

        let mut set = ParamSet::new();
        let mut slot_args: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for (k, v) in numbers {
            match k.split_once('.') {
                Some((slot, arg)) => {
                    slot_args
                        .entry(slot.to_string())
                        .or_default()
                        .insert(arg.to_string(), v);
                }
                None => {
                    set.constants.insert(k, v);
                }
            }
        }
        for (k, v) in words {
            if k.contains('.') {
                return Err(Error::Parse(format!("slot argument '{k}' must be numeric")));
            }
            match slot_kind(&v) {
                Some(kind) => {
                    let args = slot_args.remove(&k).unwrap_or_default();
                    set.slots.insert(k.clone(), build_slot(&k, kind, &args)?);
                }
                None => {
                    set.words.insert(k, v);
                }
            }
        }
        if let Some((slot, _)) = slot_args.into_iter().next() {
            return Err(Error::Parse(format!(
                "arguments given for '{slot}' but no kind declared"
            )));
        }
        Ok(set)
    }

    /// Renders the set back into parameter-file text (grammar slots only).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.words {
            let _ = writeln!(out, "{k} = {v}");
        }
        for (k, v) in &self.constants {
            let _ = writeln!(out, "{k} = {v:?}");
        }
        for (k, f) in &self.slots {
            match f.kind() {
                Some(kind) => {
                    let _ = writeln!(out, "{k} = {}", kind.name());
                    for (arg, val) in slot_arguments(kind) {
                        let _ = writeln!(out, "{k}.{arg} = {val:?}");
                    }
                }
                None => {
                    let _ = writeln!(out, "# {k}: {}", f.describe());
                }
            }
        }
        out
    }
}

const KINDS: [&str; 6] = ["zero", "const", "poly", "power", "trig", "exp2"];

fn slot_kind(word: &str) -> Option<&'static str> {
    KINDS.iter().copied().find(|k| *k == word)
}

fn slot_arguments(kind: &Kind) -> Vec<(&'static str, f64)> {
    match *kind {
        Kind::Zero => vec![],
        Kind::Const(c) => vec![("c", c)],
        Kind::Poly(c) => vec![("c0", c[0]), ("c1", c[1]), ("c2", c[2]), ("c3", c[3]), ("c4", c[4])],
        Kind::Power { a, n } => vec![("a", a), ("n", n)],
        Kind::Trig { a, b, k } | Kind::Exp2 { a, b, k } => vec![("a", a), ("b", b), ("k", k)],
    }
}

fn build_slot(name: &str, kind: &str, args: &BTreeMap<String, f64>) -> Result<Function1D> {
    let allowed: &[&str] = match kind {
        "zero" => &[],
        "const" => &["c"],
        "poly" => &["c0", "c1", "c2", "c3", "c4"],
        "power" => &["a", "n"],
        _ => &["a", "b", "k"],
    };
    for a in args.keys() {
        if !allowed.contains(&a.as_str()) {
            return Err(Error::Parse(format!(
                "slot {name} of kind {kind} has no argument '{a}' (allowed: {})",
                allowed.join(", ")
            )));
        }
    }
    let g = |a: &str| args.get(a).copied().unwrap_or(0.0);
    Ok(match kind {
        "zero" => Function1D::zero(),
        "const" => Function1D::constant(g("c")),
        "poly" => Function1D::poly(&[g("c0"), g("c1"), g("c2"), g("c3"), g("c4")]),
        "power" => {
            if !args.contains_key("n") {
                return Err(Error::Parse(format!(
                    "slot {name}: power needs the exponent '{name}.n'"
                )));
            }
            Function1D::power(g("a"), g("n"))
        }
        "trig" => Function1D::trig(g("a"), g("b"), g("k")),
        _ => Function1D::exp2(g("a"), g("b"), g("k")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_constants_slots_and_words() {
        let text = "profile = closed # trailing\nmu0 = 1.5\nrho = poly\nrho.c2 = 0.3\n\nW1 = zero\n";
        let p = ParamSet::parse(text).unwrap();
        assert_eq!(p.constants()["mu0"], 1.5);
        assert_eq!(p.words()["profile"], "closed");
        assert_eq!(p.slot("rho").eval(2.0).unwrap(), 1.2);
        assert!(p.slot("W1").is_identically_zero());
        assert!(p.slot("missing").is_identically_zero());
    }

    #[test]
    fn parse_errors() {
        assert!(ParamSet::parse("mu0 1.0").is_err());
        assert!(ParamSet::parse("rho.c2 = 1").is_err());
        assert!(ParamSet::parse("rho = poly\nrho.k = 1").is_err());
        assert!(ParamSet::parse("a = 1\na = 2").is_err());
        assert!(ParamSet::parse("rho = power\nrho.a = 1").is_err());
    }

    #[test]
    fn round_trip_through_text() {
        let p = ParamSet::new()
            .with_const("tau0", 0.25)
            .with_slot("sigma", Function1D::trig(0.1, 0.2, 3.0))
            .with_word("profile", "closed");
        let q = ParamSet::parse(&p.to_text()).unwrap();
        assert_eq!(q.constants(), p.constants());
        assert_eq!(q.words(), p.words());
        assert_eq!(q.slot("sigma").kind(), p.slot("sigma").kind());
    }

    #[test]
    fn schema_checks() {
        let schema = Schema {
            constants: vec![ConstSpec {
                name: "a",
                default: Some(2.0),
                doc: "",
            }],
            slots: vec![SlotSpec {
                name: "tau",
                variable: Variable::Phi,
                doc: "",
            }],
            words: vec![WordSpec {
                name: "profile",
                choices: &["x", "y"],
                default: "x",
            }],
        };
        let ok = ParamSet::new().with_slot("tau", Function1D::trig(1.0, 0.0, 2.0));
        assert!(ok.check_keys(&schema).is_ok());
        assert_eq!(ok.constant(&schema, "a").unwrap(), 2.0);
        assert_eq!(ok.word(&schema, "profile"), "x");
        assert!(ParamSet::new().with_const("b", 1.0).check_keys(&schema).is_err());
        assert!(ParamSet::new().with_word("profile", "z").check_keys(&schema).is_err());
        let bad = ParamSet::new().with_slot("tau", Function1D::trig(1.0, 0.0, 2.5));
        assert!(bad.check_keys(&schema).is_err());
    }
}
