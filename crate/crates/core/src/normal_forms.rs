//! Standard minimal forms: the 24 single-qubit Cliffords (CC1) and the 11520
//! two-qubit forms (CC2), with semantic lookup and structural membership.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::circuit::{gate_matrix_product, Circuit, Gate, WireBuilder};
use crate::graph::{Colour, Diagram, Phase, VertexKind};
use crate::passes::simple_form;
use crate::semantics::{interpret, scalar_free_equal, ScalarFreeMatrix, DEFAULT_TOL};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalFormError {
    #[error("matrix is not a Clifford of the expected size")]
    NotAClifford,
    #[error("normal-form self-check failed: {0}")]
    SelfCheck(String),
}

/// Lookup key: divide by the first max-magnitude entry and round.
pub fn matrix_key(m: &ScalarFreeMatrix, decimals: i32) -> Vec<i64> {
    let scale = 10f64.powi(decimals);
    m.normalised()
        .entries()
        .iter()
        .flat_map(|z| [(z.re * scale).round() as i64, (z.im * scale).round() as i64])
        .collect()
}

const KEY_DECIMALS: i32 = 12;

/// A single-qubit line word, read from input to output.
pub type Word = Vec<(Colour, Phase)>;

fn word_name(w: &Word) -> String {
    if w.is_empty() {
        return "id".into();
    }
    w.iter()
        .map(|(c, p)| {
            let c = match c {
                Colour::Z => "z",
                Colour::X => "x",
            };
            let p = match p.quarter_turns() {
                1 => "+",
                3 => "-",
                2 => "",
                _ => "0",
            };
            format!("{c}{p}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Gates realising one spider on wire `q` (3π/2 needs two gates).
pub fn spider_gates(colour: Colour, phase: Phase, q: usize) -> Vec<Gate> {
    let (quarter, half): (Gate, Gate) = match colour {
        Colour::Z => (Gate::S(q), Gate::Z(q)),
        Colour::X => (Gate::V(q), Gate::X(q)),
    };
    match phase.quarter_turns() {
        1 => vec![quarter],
        2 => vec![half],
        3 => vec![half, quarter],
        _ => Vec::new(),
    }
}

fn push_word(b: &mut WireBuilder, q: usize, w: &Word) {
    for (c, p) in w {
        b.push(q, VertexKind::spider(*c, *p));
    }
}

fn word_gates(w: &Word, q: usize) -> Vec<Gate> {
    w.iter().flat_map(|(c, p)| spider_gates(*c, *p, q)).collect()
}

fn parse_word(text: &str) -> Word {
    text.split_whitespace()
        .map(|t| {
            let colour = if t.starts_with('z') { Colour::Z } else { Colour::X };
            let phase = match &t[1..] {
                "+" => Phase::QUARTER,
                "-" => Phase::THREE_QUARTERS,
                _ => Phase::HALF,
            };
            (colour, phase)
        })
        .collect()
}

/// The 24 CC1 words: identity, 6 single spiders, 13 pairs, 4 Euler triples.
const CC1_WORDS: [&str; 24] = [
    "",
    "z+", "z", "z-", "x+", "x", "x-",
    "z x", "z x-", "z x+", "x z-", "x z+",
    "z- x-", "z- x+", "z+ x-", "z+ x+",
    "x- z-", "x- z+", "x+ z-", "x+ z+",
    "z+ x+ z+", "z+ x- z+", "z+ x+ z-", "z+ x- z-",
];

#[derive(Clone, Debug)]
pub struct Cc1Entry {
    pub name: String,
    pub word: Word,
    pub diagram: Diagram,
    pub matrix: ScalarFreeMatrix,
}

impl Cc1Entry {
    pub fn gates(&self, q: usize) -> Vec<Gate> {
        word_gates(&self.word, q)
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
}

#[derive(Debug)]
pub struct Cc1Table {
    entries: Vec<Cc1Entry>,
    index: HashMap<Vec<i64>, usize>,
}

impl Cc1Table {
    /// Build the table and run its self-checks (distinctness and minimality).
    pub fn build() -> Result<Self, NormalFormError> {
        let mut entries = Vec::new();
        for text in CC1_WORDS {
            let word = parse_word(text);
            let mut b = WireBuilder::new(1);
            push_word(&mut b, 0, &word);
            let diagram = b.finish();
            let circuit = Circuit::from_gates(1, word_gates(&word, 0)).expect("one-qubit word");
            let matrix = gate_matrix_product(&circuit).expect("one qubit");
            entries.push(Cc1Entry {
                name: word_name(&word),
                word,
                diagram,
                matrix,
            });
        }
        for (i, a) in entries.iter().enumerate() {
            for b in &entries[i + 1..] {
                if scalar_free_equal(&a.matrix, &b.matrix, DEFAULT_TOL).unwrap() {
                    return Err(NormalFormError::SelfCheck(format!("{} and {} coincide", a.name, b.name)));
                }
            }
        }
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (matrix_key(&e.matrix, KEY_DECIMALS), i))
            .collect::<HashMap<_, _>>();
        if index.len() != entries.len() {
            return Err(NormalFormError::SelfCheck("CC1 keys collide".into()));
        }
        let table = Cc1Table { entries, index };
        table.check_minimality()?;
        Ok(table)
    }

    pub fn entries(&self) -> &[Cc1Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, m: &ScalarFreeMatrix) -> Option<&Cc1Entry> {
        if m.rows() != 2 || m.cols() != 2 {
            return None;
        }
        if let Some(i) = self.index.get(&matrix_key(m, KEY_DECIMALS)) {
            return Some(&self.entries[*i]);
        }
        self.entries
            .iter()
            .find(|e| scalar_free_equal(&e.matrix, m, DEFAULT_TOL).unwrap_or(false))
    }

    /// No spider-only line diagram with fewer vertices (any colours, any
    /// phases, zero included) has the same semantics as a table entry. H boxes
    /// are left out: a lone H is one vertex by definition.
    pub fn check_minimality(&self) -> Result<(), NormalFormError> {
        let mut kinds = Vec::new();
        for q in 0..4 {
            kinds.push(VertexKind::Z(Phase::new(q)));
            kinds.push(VertexKind::X(Phase::new(q)));
        }
        let mut lines: Vec<Vec<VertexKind>> = vec![Vec::new()];
        let mut frontier: Vec<Vec<VertexKind>> = vec![Vec::new()];
        for _ in 0..2 {
            frontier = frontier
                .iter()
                .flat_map(|w| {
                    kinds.iter().map(move |k| {
                        let mut w = w.clone();
                        w.push(*k);
                        w
                    })
                })
                .collect();
            lines.extend(frontier.iter().cloned());
        }
        for line in lines {
            let mut b = WireBuilder::new(1);
            for k in &line {
                b.push(0, *k);
            }
            let m = interpret(&b.finish()).map_err(|e| NormalFormError::SelfCheck(e.to_string()))?;
            if let Some(e) = self.lookup(&m) {
                if e.len() > line.len() {
                    return Err(NormalFormError::SelfCheck(format!(
                        "{} has a {}-vertex equivalent",
                        e.name,
                        line.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn cc1_table() -> &'static Cc1Table {
    static TABLE: OnceLock<Cc1Table> = OnceLock::new();
    TABLE.get_or_init(|| Cc1Table::build().expect("CC1 table self-check"))
}

/// Whether `d` is (isomorphic to) a CC1 diagram.
pub fn cc1_contains(d: &Diagram) -> bool {
    if d.num_inputs() != 1 || d.num_outputs() != 1 {
        return false;
    }
    let Ok(m) = interpret(d) else { return false };
    cc1_table().lookup(&m).is_some_and(|e| e.diagram.iso_equal(d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Cc2Shape {
    /// C1 ⊗ C2
    Local,
    /// (C1 ⊗ C2) ∘ σ
    Swapped,
    /// (A ⊗ B) ∘ CNOT ∘ (C1 ⊗ C2)
    Cnot,
    /// (B ⊗ A) ∘ σ ∘ CNOT ∘ (C1 ⊗ C2)
    Tonc,
}

/// Tails after the CNOT's Z leg and X leg respectively.
const A_WORDS: [&str; 3] = ["", "x+", "x+ z+"];
const B_WORDS: [&str; 3] = ["", "z+", "z+ x+"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Cc2Member {
    pub shape: Cc2Shape,
    pub c1: usize,
    pub c2: usize,
    pub a: usize,
    pub b: usize,
}

impl Cc2Member {
    fn words(&self) -> (Word, Word, Word, Word) {
        let t = cc1_table();
        (
            t.entries[self.c1].word.clone(),
            t.entries[self.c2].word.clone(),
            parse_word(A_WORDS[self.a]),
            parse_word(B_WORDS[self.b]),
        )
    }

    pub fn circuit(&self) -> Circuit {
        let (c1, c2, a, b) = self.words();
        let mut gates = word_gates(&c1, 0);
        gates.extend(word_gates(&c2, 1));
        match self.shape {
            Cc2Shape::Local => {}
            Cc2Shape::Swapped => {
                gates.insert(0, Gate::Swap(0, 1));
            }
            Cc2Shape::Cnot => {
                gates.push(Gate::Cnot(0, 1));
                gates.extend(word_gates(&a, 0));
                gates.extend(word_gates(&b, 1));
            }
            Cc2Shape::Tonc => {
                gates.push(Gate::Cnot(0, 1));
                gates.push(Gate::Swap(0, 1));
                gates.extend(word_gates(&b, 0));
                gates.extend(word_gates(&a, 1));
            }
        }
        Circuit::from_gates(2, gates).expect("two-qubit member")
    }

    /// The member drawn with one spider per word letter and bare CNOT legs.
    pub fn diagram(&self) -> Diagram {
        let (c1, c2, a, b) = self.words();
        let mut d = WireBuilder::new(2);
        if self.shape == Cc2Shape::Swapped {
            d.swap(0, 1);
        }
        push_word(&mut d, 0, &c1);
        push_word(&mut d, 1, &c2);
        match self.shape {
            Cc2Shape::Local | Cc2Shape::Swapped => {}
            Cc2Shape::Cnot => {
                d.cnot(0, 1);
                push_word(&mut d, 0, &a);
                push_word(&mut d, 1, &b);
            }
            Cc2Shape::Tonc => {
                d.cnot(0, 1);
                d.swap(0, 1);
                push_word(&mut d, 0, &b);
                push_word(&mut d, 1, &a);
            }
        }
        d.finish()
    }

    /// Simple form of [`Cc2Member::diagram`]: CNOT legs absorb adjacent
    /// same-colour phases.
    pub fn simple_diagram(&self) -> Diagram {
        simple_form(&self.diagram())
    }
}

impl fmt::Display for Cc2Member {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = cc1_table();
        write!(f, "{:?}[{} | {}", self.shape, t.entries[self.c1].name, t.entries[self.c2].name)?;
        if matches!(self.shape, Cc2Shape::Cnot | Cc2Shape::Tonc) {
            write!(f, " ; A={} B={}", A_WORDS[self.a], B_WORDS[self.b])?;
        }
        write!(f, "]")
    }
}

#[derive(Debug)]
pub struct Cc2Family {
    members: Vec<Cc2Member>,
    matrices: Vec<ScalarFreeMatrix>,
    index: HashMap<Vec<i64>, usize>,
}

impl Cc2Family {
    pub fn build() -> Result<Self, NormalFormError> {
        let mut members = Vec::new();
        for shape in [Cc2Shape::Local, Cc2Shape::Swapped, Cc2Shape::Cnot, Cc2Shape::Tonc] {
            let tails = if matches!(shape, Cc2Shape::Cnot | Cc2Shape::Tonc) { 3 } else { 1 };
            for c1 in 0..24 {
                for c2 in 0..24 {
                    for a in 0..tails {
                        for b in 0..tails {
                            members.push(Cc2Member { shape, c1, c2, a, b });
                        }
                    }
                }
            }
        }
        if members.len() != 11520 {
            return Err(NormalFormError::SelfCheck(format!("CC2 has {} members", members.len())));
        }
        let matrices: Vec<ScalarFreeMatrix> = members
            .iter()
            .map(|m| gate_matrix_product(&m.circuit()).expect("two qubits"))
            .collect();
        let index: HashMap<Vec<i64>, usize> = matrices
            .iter()
            .enumerate()
            .map(|(i, m)| (matrix_key(m, KEY_DECIMALS), i))
            .collect();
        if index.len() != members.len() {
            return Err(NormalFormError::SelfCheck(format!(
                "CC2 has {} distinct keys for {} members",
                index.len(),
                members.len()
            )));
        }
        Ok(Cc2Family {
            members,
            matrices,
            index,
        })
    }

    pub fn members(&self) -> &[Cc2Member] {
        &self.members
    }

    pub fn matrix(&self, i: usize) -> &ScalarFreeMatrix {
        &self.matrices[i]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Number of distinct keys at the given rounding.
    pub fn distinct_keys(&self, decimals: i32) -> usize {
        let keys: std::collections::HashSet<Vec<i64>> =
            self.matrices.iter().map(|m| matrix_key(m, decimals)).collect();
        keys.len()
    }

    pub fn lookup(&self, u: &ScalarFreeMatrix) -> Result<&Cc2Member, NormalFormError> {
        if u.rows() != 4 || u.cols() != 4 {
            return Err(NormalFormError::NotAClifford);
        }
        if let Some(i) = self.index.get(&matrix_key(u, KEY_DECIMALS)) {
            return Ok(&self.members[*i]);
        }
        self.matrices
            .iter()
            .position(|m| scalar_free_equal(m, u, DEFAULT_TOL).unwrap_or(false))
            .map(|i| &self.members[i])
            .ok_or(NormalFormError::NotAClifford)
    }
}

pub fn cc2_family() -> &'static Cc2Family {
    static FAMILY: OnceLock<Cc2Family> = OnceLock::new();
    FAMILY.get_or_init(|| Cc2Family::build().expect("CC2 family self-check"))
}

pub fn cc2_lookup(u: &ScalarFreeMatrix) -> Result<&'static Cc2Member, NormalFormError> {
    cc2_family().lookup(u)
}

/// Whether `d` is a CC2 member, drawn either with bare CNOT legs or in
/// simple form. The semantics pick the only candidate; the shape check is
/// isomorphism against it.
pub fn cc2_contains(d: &Diagram) -> bool {
    if d.num_inputs() != 2 || d.num_outputs() != 2 {
        return false;
    }
    let Ok(m) = interpret(d) else { return false };
    let Ok(member) = cc2_lookup(&m) else { return false };
    let drawn = member.diagram();
    d.iso_equal(&drawn) || d.iso_equal(&simple_form(&drawn))
}

#[derive(Serialize)]
pub struct NormalFormSummary {
    pub cc1: Vec<Cc1Summary>,
    pub cc2_members: usize,
    pub cc2_per_shape: Vec<(Cc2Shape, usize)>,
    pub cc2_distinct_keys: usize,
}

#[derive(Serialize)]
pub struct Cc1Summary {
    pub name: String,
    pub vertices: usize,
    pub matrix: Vec<(f64, f64)>,
}

pub fn summary() -> NormalFormSummary {
    let fam = cc2_family();
    let mut per_shape: Vec<(Cc2Shape, usize)> = Vec::new();
    for m in fam.members() {
        match per_shape.last_mut() {
            Some((s, n)) if *s == m.shape => *n += 1,
            _ => per_shape.push((m.shape, 1)),
        }
    }
    NormalFormSummary {
        cc1: cc1_table()
            .entries()
            .iter()
            .map(|e| Cc1Summary {
                name: e.name.clone(),
                vertices: e.len(),
                matrix: e.matrix.normalised().to_row_major(),
            })
            .collect(),
        cc2_members: fam.len(),
        cc2_per_shape: per_shape,
        cc2_distinct_keys: fam.distinct_keys(KEY_DECIMALS),
    }
}
