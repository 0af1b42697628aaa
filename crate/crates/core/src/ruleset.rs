//! The shipped rule library: loading, soundness checks, colour-swapped
//! variants and the audit behind `rules check`.
//!
//! Rules are written in gate form: every gate is its own vertex, a CNOT is a
//! Z(0)–X(0) leg pair. They are stored as JSON files grouped by directory.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::circuit::{circuit_size, random_clifford_circuit, translate, Circuit, CircuitError, Gate, WireBuilder};
use crate::graph::{Diagram, VertexKind};
use crate::passes::{self, PassKind};
use crate::rewrite::{Rule, RuleLookup, RewriteError};
use crate::semantics::{self, SemanticsError};

#[derive(Debug, Error)]
pub enum RulesetError {
    #[error("rule {0} is unsound: its sides differ beyond a scalar")]
    UnsoundRuleError(String),
    #[error("always-rule {rule} does not shrink the diagram ({lhs} -> {rhs})")]
    NotReducing { rule: String, lhs: usize, rhs: usize },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Malformed(#[from] RewriteError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("line {text:?}: {message}")]
    Line { text: String, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleGroup {
    Init,
    Always,
    PauliCommute,
    CnotCommute,
    C2,
    Euler,
}

impl RuleGroup {
    pub const ALL: [RuleGroup; 6] = [
        RuleGroup::Init,
        RuleGroup::Always,
        RuleGroup::PauliCommute,
        RuleGroup::CnotCommute,
        RuleGroup::C2,
        RuleGroup::Euler,
    ];

    pub fn dir_name(self) -> &'static str {
        match self {
            RuleGroup::Init => "init",
            RuleGroup::Always => "always",
            RuleGroup::PauliCommute => "pauli_commute",
            RuleGroup::CnotCommute => "cnot_commute",
            RuleGroup::C2 => "c2",
            RuleGroup::Euler => "euler",
        }
    }
}

impl fmt::Display for RuleGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.dir_name())
    }
}

/// Suffix naming the mechanically generated Z↔X variant of a rule.
pub const SWAP_SUFFIX: &str = "~cs";

#[derive(Clone, Debug, Default)]
pub struct Ruleset {
    groups: BTreeMap<RuleGroup, Vec<Rule>>,
}

impl Ruleset {
    pub fn group(&self, g: RuleGroup) -> &[Rule] {
        self.groups.get(&g).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn init(&self) -> &[Rule] {
        self.group(RuleGroup::Init)
    }

    pub fn always(&self) -> &[Rule] {
        self.group(RuleGroup::Always)
    }

    pub fn pauli_commute(&self) -> &[Rule] {
        self.group(RuleGroup::PauliCommute)
    }

    pub fn cnot_commute(&self) -> &[Rule] {
        self.group(RuleGroup::CnotCommute)
    }

    pub fn c2(&self) -> &[Rule] {
        self.group(RuleGroup::C2)
    }

    pub fn euler(&self) -> &[Rule] {
        self.group(RuleGroup::Euler)
    }

    pub fn iter(&self) -> impl Iterator<Item = (RuleGroup, &Rule)> {
        self.groups.iter().flat_map(|(g, rs)| rs.iter().map(move |r| (*g, r)))
    }

    pub fn len(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Add a rule and its colour-swapped variant (unless the variant is
    /// already present), after checking soundness.
    pub fn insert(&mut self, group: RuleGroup, rule: Rule) -> Result<(), RulesetError> {
        check_rule(group, &rule)?;
        let swapped = rule.colour_swapped(format!("{}{SWAP_SUFFIX}", rule.name));
        let list = self.groups.entry(group).or_default();
        list.push(rule);
        let known = list
            .iter()
            .any(|r| r.lhs.iso_equal(&swapped.lhs) && r.rhs.iso_equal(&swapped.rhs));
        if !known {
            check_rule(group, &swapped)?;
            list.push(swapped);
        }
        Ok(())
    }
}

impl RuleLookup for Ruleset {
    fn rule(&self, name: &str) -> Option<&Rule> {
        self.groups.values().flat_map(|rs| rs.iter()).find(|r| r.name == name)
    }
}

fn check_rule(group: RuleGroup, rule: &Rule) -> Result<(), RulesetError> {
    rule.check_shape()?;
    if !rule.is_sound()? {
        return Err(RulesetError::UnsoundRuleError(rule.name.clone()));
    }
    if group == RuleGroup::Always {
        let (lhs, rhs) = (circuit_size(&rule.lhs), circuit_size(&rule.rhs));
        if lhs <= rhs {
            return Err(RulesetError::NotReducing {
                rule: rule.name.clone(),
                lhs,
                rhs,
            });
        }
    }
    Ok(())
}

/// Load `<dir>/<group>/*.json` for every group, each directory in filename
/// order. Missing group directories are empty.
pub fn load_ruleset(dir: &Path) -> Result<Ruleset, RulesetError> {
    let io = |path: &Path, e: std::io::Error| RulesetError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut set = Ruleset::default();
    for g in RuleGroup::ALL {
        let sub = dir.join(g.dir_name());
        if !sub.is_dir() {
            continue;
        }
        let mut files: Vec<_> = std::fs::read_dir(&sub)
            .map_err(|e| io(&sub, e))?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        for f in files {
            let text = std::fs::read_to_string(&f).map_err(|e| io(&f, e))?;
            set.insert(g, Rule::from_json(&text)?)?;
        }
    }
    Ok(set)
}

include!("shipped_rules.rs");

/// The rule files compiled into the library (same content as `rules/v1`).
pub fn shipped_ruleset() -> Result<Ruleset, RulesetError> {
    let mut set = Ruleset::default();
    for (group, _file, text) in SHIPPED {
        let g = RuleGroup::ALL
            .into_iter()
            .find(|g| g.dir_name() == *group)
            .expect("shipped group name");
        set.insert(g, Rule::from_json(text)?)?;
    }
    Ok(set)
}

/// Shared, checked copy of the shipped rules.
pub fn default_ruleset() -> &'static Ruleset {
    static SET: std::sync::OnceLock<Ruleset> = std::sync::OnceLock::new();
    SET.get_or_init(|| shipped_ruleset().expect("shipped rules load"))
}

fn line_error(text: &str, message: impl Into<String>) -> RulesetError {
    RulesetError::Line {
        text: text.into(),
        message: message.into(),
    }
}

enum Token {
    Spider(usize, VertexKind),
    H(usize),
    Cx(usize, usize),
    Swap(usize, usize),
}

/// Parse a gate line such as `"cx 0 1; x1 0; z2 1"`. Spiders are written
/// colour then quarter turns (`z0`..`z3`, `x0`..`x3`).
fn tokens(width: usize, text: &str) -> Result<Vec<Token>, RulesetError> {
    let mut out = Vec::new();
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let words: Vec<&str> = part.split_whitespace().collect();
        let wires: Vec<usize> = words[1..]
            .iter()
            .map(|w| w.parse::<usize>().map_err(|_| line_error(text, format!("bad wire in {part:?}"))))
            .collect::<Result<_, _>>()?;
        if wires.iter().any(|w| *w >= width) {
            return Err(line_error(text, format!("wire out of range in {part:?}")));
        }
        let tok = match (words[0], wires.as_slice()) {
            ("h", [w]) => Token::H(*w),
            ("cx", [c, t]) if c != t => Token::Cx(*c, *t),
            ("swap", [a, b]) if a != b => Token::Swap(*a, *b),
            (s, [w]) if s.len() == 2 && (s.starts_with('z') || s.starts_with('x')) => {
                let q: i64 = s[1..].parse().map_err(|_| line_error(text, format!("bad phase in {part:?}")))?;
                let p = crate::graph::Phase::new(q);
                let kind = if s.starts_with('z') { VertexKind::Z(p) } else { VertexKind::X(p) };
                Token::Spider(*w, kind)
            }
            _ => return Err(line_error(text, format!("cannot read {part:?}"))),
        };
        out.push(tok);
    }
    Ok(out)
}

/// Gate-form diagram of a gate line.
pub fn line_diagram(width: usize, text: &str) -> Result<Diagram, RulesetError> {
    let mut b = WireBuilder::new(width);
    for t in tokens(width, text)? {
        match t {
            Token::Spider(w, k) => {
                b.push(w, k);
            }
            Token::H(w) => {
                b.push(w, VertexKind::H);
            }
            Token::Cx(c, t) => {
                b.cnot(c, t);
            }
            Token::Swap(a, c) => b.swap(a, c),
        }
    }
    Ok(b.finish())
}

/// The same gate line as a circuit (a three-quarter turn becomes two gates).
pub fn line_circuit(width: usize, text: &str) -> Result<Circuit, RulesetError> {
    let mut gates = Vec::new();
    for t in tokens(width, text)? {
        match t {
            Token::Spider(w, k) => gates.extend(crate::normal_forms::spider_gates(
                k.colour().expect("spider"),
                k.phase().expect("spider"),
                w,
            )),
            Token::H(w) => gates.push(Gate::H(w)),
            Token::Cx(c, t) => gates.push(Gate::Cnot(c, t)),
            Token::Swap(a, b) => gates.push(Gate::Swap(a, b)),
        }
    }
    Circuit::from_gates(width, gates).map_err(|e: CircuitError| line_error(text, e.to_string()))
}

/// A rule from two gate lines.
pub fn line_rule(name: &str, width: usize, lhs: &str, rhs: &str) -> Result<Rule, RulesetError> {
    Ok(Rule::new(name, line_diagram(width, lhs)?, line_diagram(width, rhs)?)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditRow {
    pub group: String,
    pub name: String,
    pub sound: bool,
    pub lhs_size: usize,
    pub rhs_size: usize,
    pub micros: u128,
}

/// Re-check every rule with the oracle, and every structural pass on a fixed
/// sample of small diagrams (widths 1 to 3).
pub fn audit(set: &Ruleset) -> Vec<AuditRow> {
    let mut rows = Vec::new();
    for (g, r) in set.iter() {
        let t = Instant::now();
        let sound = r.is_sound().unwrap_or(false);
        rows.push(AuditRow {
            group: g.to_string(),
            name: r.name.clone(),
            sound,
            lhs_size: circuit_size(&r.lhs),
            rhs_size: circuit_size(&r.rhs),
            micros: t.elapsed().as_micros(),
        });
    }
    let samples: Vec<Diagram> = (0..24u64)
        .map(|i| translate(&random_clifford_circuit(1 + (i % 3) as usize, 12, 7_000 + i)))
        .collect();
    for pass in PassKind::ALL {
        let t = Instant::now();
        let mut sound = true;
        let mut sizes = (0, 0);
        for d in &samples {
            for (before, after) in pass_instances(d, pass) {
                sizes.0 += circuit_size(&before);
                sizes.1 += circuit_size(&after);
                sound &= semantics::diagrams_equal(&before, &after, semantics::DEFAULT_TOL).unwrap_or(false);
            }
        }
        rows.push(AuditRow {
            group: "pass".into(),
            name: pass.name().into(),
            sound,
            lhs_size: sizes.0,
            rhs_size: sizes.1,
            micros: t.elapsed().as_micros(),
        });
    }
    rows
}

/// (before, after) pairs exercising `pass` on `d`.
fn pass_instances(d: &Diagram, pass: PassKind) -> Vec<(Diagram, Diagram)> {
    match pass {
        PassKind::ColourChangeVertex => d
            .interior()
            .filter(|v| d.kind(*v).is_spider())
            .take(3)
            .filter_map(|v| passes::colour_change_vertex(d, v).ok().map(|o| (d.clone(), o)))
            .collect(),
        PassKind::PiCopy => {
            let base = passes::simple_form(d);
            let mut out = Vec::new();
            for p in base.interior() {
                let k = base.kind(p);
                if base.degree(p) != 2 || k.phase().is_none_or(|ph| ph.quarter_turns() != 2) {
                    continue;
                }
                for (s, _) in base.neighbours(p) {
                    if let Ok((o, _)) = passes::pi_copy(&base, p, s) {
                        out.push((base.clone(), o));
                    }
                }
            }
            out
        }
        _ => {
            let mut before = d.clone();
            if pass != PassKind::HEulerExpand {
                passes::run_pass(&mut before, PassKind::HEulerExpand);
            }
            let mut after = before.clone();
            passes::run_pass(&mut after, pass);
            vec![(before, after)]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_dsl() {
        let d = line_diagram(2, "cx 0 1; x1 0; z3 1; h 1; swap 0 1").unwrap();
        assert_eq!(d.num_interior(), 5);
        let c = line_circuit(2, "z3 0").unwrap();
        assert_eq!(c.gates(), &[Gate::Z(0), Gate::S(0)]);
        assert!(line_diagram(1, "cx 0 1").is_err());
        assert!(line_diagram(1, "q1 0").is_err());
    }

    #[test]
    fn unsound_rule_is_rejected() {
        let mut set = Ruleset::default();
        let bad = line_rule("GreenPi", 1, "z2 0; z2 0", "z1 0").unwrap();
        assert!(matches!(set.insert(RuleGroup::Init, bad), Err(RulesetError::UnsoundRuleError(n)) if n == "GreenPi"));
        let grow = line_rule("Grow", 1, "z2 0; z2 0", "z1 0; z1 0; z2 0").unwrap();
        assert!(matches!(set.insert(RuleGroup::Always, grow), Err(RulesetError::NotReducing { .. })));
    }

    #[test]
    fn shipped_rules_load_with_variants() {
        let set = shipped_ruleset().unwrap();
        for name in ["GreenMinus", "AlwaysH", "GreenPi", "Cx", "CxSw", "GreenPiCx", "C2GreenCxCommute"] {
            assert!(set.rule(name).is_some(), "{name} missing");
        }
        assert!(set.rule(&format!("Cx{SWAP_SUFFIX}")).is_some());
        for r in set.always() {
            assert!(circuit_size(&r.lhs) > circuit_size(&r.rhs), "{}", r.name);
        }
    }

    #[test]
    fn loads_from_directory() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("rules/v1");
        let from_disk = load_ruleset(&dir).unwrap();
        let shipped = shipped_ruleset().unwrap();
        assert_eq!(from_disk.len(), shipped.len());
    }
}
