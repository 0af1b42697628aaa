//! Gate-level Clifford circuits: text format, matrices, translation to
//! diagrams and random generation.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Diagram, Phase, VertexId, VertexKind};
use crate::semantics::{self, ScalarFreeMatrix, SemanticsConfig, SemanticsError, C64};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: wire {wire} out of range for {width} qubits")]
    WireOutOfRange { line: usize, wire: usize, width: usize },
    #[error("gate {0} uses the same wire twice")]
    RepeatedWire(Gate),
    #[error("gate {gate} does not fit a circuit of width {width}")]
    GateOutOfRange { gate: Gate, width: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gate {
    S(usize),
    V(usize),
    Z(usize),
    X(usize),
    H(usize),
    Cnot(usize, usize),
    Tonc(usize, usize),
    Swap(usize, usize),
}

impl Gate {
    pub fn wires(&self) -> Vec<usize> {
        match *self {
            Gate::S(w) | Gate::V(w) | Gate::Z(w) | Gate::X(w) | Gate::H(w) => vec![w],
            Gate::Cnot(a, b) | Gate::Tonc(a, b) | Gate::Swap(a, b) => vec![a, b],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::S(_) => "S",
            Gate::V(_) => "V",
            Gate::Z(_) => "Z",
            Gate::X(_) => "X",
            Gate::H(_) => "H",
            Gate::Cnot(..) => "CNOT",
            Gate::Tonc(..) => "TONC",
            Gate::Swap(..) => "SWAP",
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.wires().len() == 2
    }

    /// Same gate with wires renamed by `f`.
    pub fn map_wires(&self, f: impl Fn(usize) -> usize) -> Gate {
        match *self {
            Gate::S(w) => Gate::S(f(w)),
            Gate::V(w) => Gate::V(f(w)),
            Gate::Z(w) => Gate::Z(f(w)),
            Gate::X(w) => Gate::X(f(w)),
            Gate::H(w) => Gate::H(f(w)),
            Gate::Cnot(a, b) => Gate::Cnot(f(a), f(b)),
            Gate::Tonc(a, b) => Gate::Tonc(f(a), f(b)),
            Gate::Swap(a, b) => Gate::Swap(f(a), f(b)),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        for w in self.wires() {
            write!(f, " {w}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    width: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(width: usize) -> Self {
        Circuit {
            width,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(width: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self, CircuitError> {
        let mut c = Circuit::new(width);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, g: Gate) -> Result<(), CircuitError> {
        let ws = g.wires();
        if ws.len() == 2 && ws[0] == ws[1] {
            return Err(CircuitError::RepeatedWire(g));
        }
        if ws.iter().any(|w| *w >= self.width) {
            return Err(CircuitError::GateOutOfRange {
                gate: g,
                width: self.width,
            });
        }
        self.gates.push(g);
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Serialise in the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut s = format!("qubits {}\n", self.width);
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Circuit {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_circuit(s)
    }
}

pub fn serialize_circuit(c: &Circuit) -> String {
    c.to_text()
}

pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    let mut circuit: Option<Circuit> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let syntax = |message: String| CircuitError::Syntax { line, message };
        let num = |t: &str| -> Result<usize, CircuitError> {
            t.parse::<usize>()
                .map_err(|_| syntax(format!("expected a wire index, found `{t}`")))
        };
        let Some(c) = circuit.as_mut() else {
            if toks.len() != 2 || toks[0] != "qubits" {
                return Err(syntax("expected `qubits <n>` header".into()));
            }
            let width = toks[1]
                .parse::<usize>()
                .ok()
                .filter(|w| *w > 0)
                .ok_or_else(|| syntax(format!("bad qubit count `{}`", toks[1])))?;
            circuit = Some(Circuit::new(width));
            continue;
        };
        let arity = match toks[0] {
            "S" | "V" | "Z" | "X" | "H" => 1,
            "CNOT" | "TONC" | "SWAP" => 2,
            other => return Err(syntax(format!("unknown gate `{other}`"))),
        };
        if toks.len() != arity + 1 {
            return Err(syntax(format!("{} takes {arity} wire(s)", toks[0])));
        }
        let ws = toks[1..].iter().map(|t| num(t)).collect::<Result<Vec<_>, _>>()?;
        for w in &ws {
            if *w >= c.width {
                return Err(CircuitError::WireOutOfRange {
                    line,
                    wire: *w,
                    width: c.width,
                });
            }
        }
        let g = match toks[0] {
            "S" => Gate::S(ws[0]),
            "V" => Gate::V(ws[0]),
            "Z" => Gate::Z(ws[0]),
            "X" => Gate::X(ws[0]),
            "H" => Gate::H(ws[0]),
            "CNOT" => Gate::Cnot(ws[0], ws[1]),
            "TONC" => Gate::Tonc(ws[0], ws[1]),
            _ => Gate::Swap(ws[0], ws[1]),
        };
        c.push(g).map_err(|e| syntax(e.to_string()))?;
    }
    circuit.ok_or(CircuitError::Syntax {
        line: 0,
        message: "missing `qubits <n>` header".into(),
    })
}

/// Builds circuit-shaped diagrams wire by wire.
#[derive(Clone, Debug)]
pub struct WireBuilder {
    d: Diagram,
    ends: Vec<VertexId>,
}

impl WireBuilder {
    pub fn new(width: usize) -> Self {
        let mut d = Diagram::new();
        let ends = (0..width).map(|_| d.add_input()).collect();
        WireBuilder { d, ends }
    }

    /// Continue building on `d`, wire `i` currently ending at `ends[i]`.
    pub fn extend(d: Diagram, ends: Vec<VertexId>) -> Self {
        WireBuilder { d, ends }
    }

    /// The diagram and the current wire ends, without adding outputs.
    pub fn into_parts(self) -> (Diagram, Vec<VertexId>) {
        (self.d, self.ends)
    }

    /// Append a vertex of `kind` to wire `w`.
    pub fn push(&mut self, w: usize, kind: VertexKind) -> VertexId {
        let v = self.d.add_vertex(kind);
        self.d.add_edge(self.ends[w], v);
        self.ends[w] = v;
        v
    }

    pub fn z(&mut self, w: usize, quarter_turns: i64) -> VertexId {
        self.push(w, VertexKind::Z(Phase::new(quarter_turns)))
    }

    pub fn x(&mut self, w: usize, quarter_turns: i64) -> VertexId {
        self.push(w, VertexKind::X(Phase::new(quarter_turns)))
    }

    /// Z(0) on `control` joined to X(0) on `target`.
    pub fn cnot(&mut self, control: usize, target: usize) -> (VertexId, VertexId) {
        let z = self.z(control, 0);
        let x = self.x(target, 0);
        self.d.add_edge(z, x);
        (z, x)
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.ends.swap(a, b);
    }

    pub fn gate(&mut self, g: &Gate) {
        match *g {
            Gate::S(w) => {
                self.z(w, 1);
            }
            Gate::Z(w) => {
                self.z(w, 2);
            }
            Gate::V(w) => {
                self.x(w, 1);
            }
            Gate::X(w) => {
                self.x(w, 2);
            }
            Gate::H(w) => {
                self.push(w, VertexKind::H);
            }
            Gate::Cnot(c, t) => {
                self.cnot(c, t);
            }
            Gate::Tonc(c, t) => {
                self.cnot(t, c);
            }
            Gate::Swap(a, b) => self.swap(a, b),
        }
    }

    pub fn finish(mut self) -> Diagram {
        for e in self.ends {
            let o = self.d.add_output();
            self.d.add_edge(e, o);
        }
        self.d
    }
}

/// Build the diagram of a circuit: one wire per qubit, gates in order.
pub fn translate(c: &Circuit) -> Diagram {
    let mut b = WireBuilder::new(c.width);
    for g in &c.gates {
        b.gate(g);
    }
    b.finish()
}

/// Number of non-trivial interior vertices: zero-phase degree-2 spiders are
/// free, everything else (including each CNOT leg and each H) counts once.
pub fn circuit_size(d: &Diagram) -> usize {
    d.interior()
        .filter(|v| {
            let k = d.kind(*v);
            !(k.is_spider() && k.phase() == Some(Phase::ZERO) && d.degree(*v) == 2)
        })
        .count()
}

fn single_qubit_matrix(g: &Gate) -> [[C64; 2]; 2] {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match g {
        Gate::S(_) => [[one, o], [o, i]],
        Gate::Z(_) => [[one, o], [o, -one]],
        Gate::X(_) => [[o, one], [one, o]],
        Gate::V(_) => {
            let a = C64::new(0.5, 0.5);
            let b = C64::new(0.5, -0.5);
            [[a, b], [b, a]]
        }
        Gate::H(_) => [[one * r, one * r], [one * r, -one * r]],
        _ => unreachable!("not a single-qubit gate"),
    }
}

/// Left-multiply a row-major `dim × cols` matrix by a gate on `width` qubits.
fn apply_gate(data: &mut [C64], width: usize, cols: usize, g: &Gate) {
    let dim = 1usize << width;
    let mask = |w: usize| 1usize << (width - 1 - w);
    match *g {
        Gate::Cnot(c, t) | Gate::Tonc(t, c) => {
            let (mc, mt) = (mask(c), mask(t));
            for r in 0..dim {
                if r & mc != 0 && r & mt == 0 {
                    let s = r | mt;
                    for k in 0..cols {
                        data.swap(r * cols + k, s * cols + k);
                    }
                }
            }
        }
        Gate::Swap(a, b) => {
            let (ma, mb) = (mask(a), mask(b));
            for r in 0..dim {
                if r & ma != 0 && r & mb == 0 {
                    let s = (r & !ma) | mb;
                    for k in 0..cols {
                        data.swap(r * cols + k, s * cols + k);
                    }
                }
            }
        }
        _ => {
            let w = g.wires()[0];
            let m = single_qubit_matrix(g);
            let mw = mask(w);
            for r0 in 0..dim {
                if r0 & mw != 0 {
                    continue;
                }
                let r1 = r0 | mw;
                for k in 0..cols {
                    let a = data[r0 * cols + k];
                    let b = data[r1 * cols + k];
                    data[r0 * cols + k] = m[0][0] * a + m[0][1] * b;
                    data[r1 * cols + k] = m[1][0] * a + m[1][1] * b;
                }
            }
        }
    }
}

/// The unitary of a circuit (last gate leftmost), qubit 0 most significant.
pub fn gate_matrix_product(c: &Circuit) -> Result<ScalarFreeMatrix, SemanticsError> {
    gate_matrix_product_with(c, &SemanticsConfig::default())
}

pub fn gate_matrix_product_with(c: &Circuit, cfg: &SemanticsConfig) -> Result<ScalarFreeMatrix, SemanticsError> {
    if c.width > cfg.max_qubits {
        return Err(SemanticsError::SemanticsSizeError {
            wires: c.width,
            bound: cfg.max_qubits,
        });
    }
    let dim = 1usize << c.width;
    let mut data = ScalarFreeMatrix::identity(dim).entries().to_vec();
    for g in &c.gates {
        apply_gate(&mut data, c.width, dim, g);
    }
    Ok(ScalarFreeMatrix::from_rows(dim, dim, data))
}

/// The circuit's unitary agrees with the interpretation of its diagram.
pub fn check_translation_soundness(c: &Circuit) -> Result<bool, SemanticsError> {
    semantics::scalar_free_equal(
        &gate_matrix_product(c)?,
        &semantics::interpret(&translate(c))?,
        semantics::DEFAULT_TOL,
    )
}

/// `depth` layers; each layer is, with equal probability, a single-qubit
/// gate drawn uniformly from {S, V, Z, X, H} on a uniform wire, or a CNOT on
/// a uniform ordered pair of distinct wires (only when `width ≥ 2`).
pub fn random_clifford_circuit(width: usize, depth: usize, seed: u64) -> Circuit {
    assert!(width >= 1, "circuit width must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(width);
    for _ in 0..depth {
        let g = if width >= 2 && rng.gen_bool(0.5) {
            let a = rng.gen_range(0..width);
            let mut b = rng.gen_range(0..width - 1);
            if b >= a {
                b += 1;
            }
            Gate::Cnot(a, b)
        } else {
            let w = rng.gen_range(0..width);
            match rng.gen_range(0..5) {
                0 => Gate::S(w),
                1 => Gate::V(w),
                2 => Gate::Z(w),
                3 => Gate::X(w),
                _ => Gate::H(w),
            }
        };
        c.gates.push(g);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::{interpret, scalar_free_equal};

    fn circ(width: usize, gates: &[Gate]) -> Circuit {
        Circuit::from_gates(width, gates.iter().copied()).unwrap()
    }

    fn same(a: &ScalarFreeMatrix, b: &ScalarFreeMatrix) -> bool {
        scalar_free_equal(a, b, 1e-9).unwrap()
    }

    #[test]
    fn parse_examples() {
        let c = parse_circuit("qubits 1\nS 0\n").unwrap();
        assert_eq!(c, circ(1, &[Gate::S(0)]));
        let c = parse_circuit("qubits 2\nCNOT 0 1\nH 1\n").unwrap();
        assert_eq!(c.gates(), &[Gate::Cnot(0, 1), Gate::H(1)]);
        assert!(matches!(
            parse_circuit("qubits 2\nCNOT 0 2\n"),
            Err(CircuitError::WireOutOfRange { line: 2, wire: 2, width: 2 })
        ));
    }

    #[test]
    fn parse_comments_and_errors() {
        let c = parse_circuit("# header\nqubits 2 # two\n\nSWAP 0 1 # cross\n").unwrap();
        assert_eq!(c.gates(), &[Gate::Swap(0, 1)]);
        assert!(matches!(parse_circuit("S 0\n"), Err(CircuitError::Syntax { line: 1, .. })));
        assert!(matches!(parse_circuit("qubits 1\nT 0\n"), Err(CircuitError::Syntax { line: 2, .. })));
        assert!(matches!(parse_circuit("qubits 2\nCNOT 1 1\n"), Err(CircuitError::Syntax { line: 2, .. })));
        assert!(parse_circuit("").is_err());
    }

    #[test]
    fn text_round_trip() {
        let c = random_clifford_circuit(3, 30, 7);
        assert_eq!(parse_circuit(&serialize_circuit(&c)).unwrap(), c);
    }

    #[test]
    fn generator_identities() {
        let x = gate_matrix_product(&circ(1, &[Gate::X(0)])).unwrap();
        let vv = gate_matrix_product(&circ(1, &[Gate::V(0), Gate::V(0)])).unwrap();
        assert!(same(&vv, &x));
        let z = gate_matrix_product(&circ(1, &[Gate::Z(0)])).unwrap();
        let ss = gate_matrix_product(&circ(1, &[Gate::S(0), Gate::S(0)])).unwrap();
        assert!(same(&ss, &z));
        let h = gate_matrix_product(&circ(1, &[Gate::H(0)])).unwrap();
        let svs = gate_matrix_product(&circ(1, &[Gate::S(0), Gate::V(0), Gate::S(0)])).unwrap();
        assert!(same(&svs, &h));
    }

    #[test]
    fn three_cnots_make_a_swap() {
        let swap = gate_matrix_product(&circ(2, &[Gate::Swap(0, 1)])).unwrap();
        let a = gate_matrix_product(&circ(2, &[Gate::Cnot(0, 1), Gate::Tonc(0, 1), Gate::Cnot(0, 1)])).unwrap();
        let b = gate_matrix_product(&circ(2, &[Gate::Cnot(0, 1), Gate::Cnot(1, 0), Gate::Cnot(0, 1)])).unwrap();
        assert!(same(&a, &swap));
        assert!(same(&b, &swap));
        assert!(!same(&gate_matrix_product(&Circuit::new(2)).unwrap(), &swap));
    }

    #[test]
    fn cnot_matrix_uses_qubit_zero_as_high_bit() {
        let m = gate_matrix_product(&circ(2, &[Gate::Cnot(0, 1)])).unwrap();
        assert_eq!(m.get(3, 2), C64::new(1.0, 0.0));
        assert_eq!(m.get(1, 1), C64::new(1.0, 0.0));
    }

    #[test]
    fn translation_shapes() {
        let d = translate(&circ(1, &[Gate::S(0)]));
        assert_eq!(d.num_interior(), 1);
        let v = d.interior().next().unwrap();
        assert_eq!(d.kind(v), VertexKind::Z(Phase::QUARTER));

        let d = translate(&circ(2, &[Gate::Swap(0, 1)]));
        assert_eq!(d.num_interior(), 0);
        assert!(d.adjacent(d.inputs()[0], d.outputs()[1]));
        assert!(d.adjacent(d.inputs()[1], d.outputs()[0]));

        let d = translate(&circ(2, &[Gate::Cnot(0, 1)]));
        assert!(d.iso_equal(&d.adjoint()));
        assert_eq!(circuit_size(&d), 2);
        assert_eq!(circuit_size(&translate(&circ(1, &[Gate::S(0), Gate::V(0), Gate::Z(0)]))), 3);
        assert_eq!(circuit_size(&Diagram::identity_wire()), 0);
    }

    #[test]
    fn translation_is_sound_on_examples() {
        for c in [
            circ(1, &[Gate::S(0)]),
            circ(2, &[Gate::Cnot(0, 1), Gate::Cnot(1, 0), Gate::Cnot(0, 1)]),
            circ(2, &[Gate::Tonc(0, 1), Gate::H(1), Gate::Swap(0, 1), Gate::V(0)]),
            random_clifford_circuit(3, 20, 1),
        ] {
            assert!(check_translation_soundness(&c).unwrap(), "{c}");
        }
        let swap = gate_matrix_product(&circ(2, &[Gate::Swap(0, 1)])).unwrap();
        let d = translate(&circ(2, &[Gate::Cnot(0, 1), Gate::Cnot(1, 0), Gate::Cnot(0, 1)]));
        assert!(same(&interpret(&d).unwrap(), &swap));
    }

    #[test]
    fn random_circuits_are_deterministic() {
        assert_eq!(random_clifford_circuit(3, 20, 5), random_clifford_circuit(3, 20, 5));
        assert_ne!(random_clifford_circuit(3, 20, 5), random_clifford_circuit(3, 20, 6));
        let c = random_clifford_circuit(1, 20, 9);
        assert_eq!(c.len(), 20);
        assert!(c.gates().iter().all(|g| !g.is_two_qubit()));
    }
}
