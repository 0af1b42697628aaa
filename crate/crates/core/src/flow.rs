//! Causal flow, path covers and circuit extraction.
//!
//! Flow is found by layer-wise propagation backward from the outputs: a
//! vertex whose only unprocessed neighbour is `u` becomes `u`'s successor.
//! This never needs to guess, and it finds a causal flow whenever one exists,
//! so no backtracking is involved.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::circuit::{Circuit, Gate};
use crate::graph::{Colour, Diagram, VertexId, VertexKind};
use crate::passes::is_simple;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowError {
    #[error("not a circuit: {reason}")]
    NotACircuit { reason: String, stranded: Vec<VertexId> },
    #[error("cross edge {0}–{1} joins vertices that cannot form a CNOT")]
    CrossEdgeColourError(VertexId, VertexId),
    #[error("path cover does not fit the diagram: {0}")]
    InvalidPathCover(String),
}

fn not_a_circuit(reason: impl Into<String>, stranded: Vec<VertexId>) -> FlowError {
    FlowError::NotACircuit {
        reason: reason.into(),
        stranded,
    }
}

/// A successor function with its order; `v ≺ u` iff `rank[v] > rank[u]`
/// (outputs have rank 0).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalFlow {
    pub successor: BTreeMap<VertexId, VertexId>,
    pub rank: BTreeMap<VertexId, usize>,
}

impl CausalFlow {
    pub fn precedes(&self, v: VertexId, u: VertexId) -> bool {
        self.rank[&v] > self.rank[&u]
    }

    /// Check F1–F3 against `d`.
    pub fn verify(&self, d: &Diagram) -> Result<(), String> {
        for (v, f) in &self.successor {
            if !d.adjacent(*v, *f) {
                return Err(format!("F1: {f} is not adjacent to {v}"));
            }
            if !self.precedes(*v, *f) {
                return Err(format!("F2: {v} does not precede {f}"));
            }
            for (u, _) in d.neighbours(*f) {
                if u != *v && !self.precedes(*v, u) {
                    return Err(format!("F3: {u} ~ f({v}) but {v} does not precede {u}"));
                }
            }
        }
        Ok(())
    }
}

/// One input-to-output path per qubit (indexed by input position), boundary
/// vertices included at both ends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathCover {
    pub paths: Vec<Vec<VertexId>>,
    pub position: BTreeMap<VertexId, (usize, usize)>,
    pub flow: CausalFlow,
}

impl PathCover {
    pub fn qubit_of(&self, v: VertexId) -> Option<usize> {
        self.position.get(&v).map(|p| p.0)
    }

    pub fn pos_of(&self, v: VertexId) -> Option<usize> {
        self.position.get(&v).map(|p| p.1)
    }

    pub fn width(&self) -> usize {
        self.paths.len()
    }

    /// Path neighbours of `v` (predecessor, successor) when it is interior.
    pub fn path_neighbours(&self, v: VertexId) -> Option<(VertexId, VertexId)> {
        let (q, i) = *self.position.get(&v)?;
        let p = &self.paths[q];
        if i == 0 || i + 1 >= p.len() {
            return None;
        }
        Some((p[i - 1], p[i + 1]))
    }

    /// Neighbours of `v` that are not its path predecessor or successor.
    pub fn cross_neighbours(&self, d: &Diagram, v: VertexId) -> Vec<(VertexId, u32)> {
        let (a, b) = self.path_neighbours(v).unwrap_or((v, v));
        d.neighbours(v)
            .map(|(u, k)| {
                let on_path = u32::from(u == a) + u32::from(u == b);
                (u, k - on_path.min(k))
            })
            .filter(|(_, k)| *k > 0)
            .collect()
    }

    /// Check disjointness, totality, adjacency and F1–F3.
    pub fn verify(&self, d: &Diagram) -> Result<(), FlowError> {
        let bad = FlowError::InvalidPathCover;
        let mut seen = BTreeSet::new();
        for (q, path) in self.paths.iter().enumerate() {
            if path.first() != d.inputs().get(q) {
                return Err(bad(format!("path {q} does not start at input {q}")));
            }
            if !path.last().is_some_and(|o| d.is_output(*o)) {
                return Err(bad(format!("path {q} does not end at an output")));
            }
            for w in path.windows(2) {
                if !d.adjacent(w[0], w[1]) {
                    return Err(bad(format!("{} and {} are consecutive but not adjacent", w[0], w[1])));
                }
                if self.flow.successor.get(&w[0]) != Some(&w[1]) {
                    return Err(bad(format!("successor of {} disagrees with the path", w[0])));
                }
            }
            for v in path {
                if !seen.insert(*v) {
                    return Err(bad(format!("{v} lies on two paths")));
                }
            }
        }
        if seen.len() != d.num_vertices() {
            return Err(bad("paths do not cover every vertex".into()));
        }
        self.flow.verify(d).map_err(bad)
    }
}

/// Find a causal flow and the induced path cover.
pub fn find_path_cover(d: &Diagram) -> Result<PathCover, FlowError> {
    if d.num_inputs() != d.num_outputs() {
        return Err(not_a_circuit(
            format!("{} inputs but {} outputs", d.num_inputs(), d.num_outputs()),
            Vec::new(),
        ));
    }
    let inputs: BTreeSet<VertexId> = d.inputs().iter().copied().collect();
    let mut processed: BTreeSet<VertexId> = d.outputs().iter().copied().collect();
    let mut rank: BTreeMap<VertexId, usize> = processed.iter().map(|v| (*v, 0)).collect();
    let mut successor = BTreeMap::new();
    let mut correctors: BTreeSet<VertexId> = processed.difference(&inputs).copied().collect();
    let mut layer = 0;
    loop {
        layer += 1;
        let mut fresh: Vec<(VertexId, VertexId)> = Vec::new();
        let mut claimed = BTreeSet::new();
        for v in &correctors {
            let mut open = d.neighbours(*v).map(|(u, _)| u).filter(|u| !processed.contains(u));
            let (Some(u), None) = (open.next(), open.next()) else {
                continue;
            };
            if claimed.insert(u) {
                fresh.push((u, *v));
            }
        }
        if fresh.is_empty() {
            break;
        }
        for (u, v) in fresh {
            successor.insert(u, v);
            rank.insert(u, layer);
            processed.insert(u);
            correctors.remove(&v);
            if !inputs.contains(&u) {
                correctors.insert(u);
            }
        }
    }
    if processed.len() != d.num_vertices() {
        let stranded: Vec<VertexId> = d.vertex_ids().filter(|v| !processed.contains(v)).collect();
        return Err(not_a_circuit(
            format!("{} vertices admit no causal successor", stranded.len()),
            stranded,
        ));
    }

    let mut paths = Vec::new();
    let mut position = BTreeMap::new();
    for (q, i) in d.inputs().iter().enumerate() {
        let mut path = vec![*i];
        let mut cur = *i;
        while let Some(next) = successor.get(&cur) {
            path.push(*next);
            cur = *next;
        }
        for (k, v) in path.iter().enumerate() {
            position.insert(*v, (q, k));
        }
        paths.push(path);
    }
    let pc = PathCover {
        paths,
        position,
        flow: CausalFlow { successor, rank },
    };
    pc.verify(d).map_err(|e| match e {
        FlowError::InvalidPathCover(reason) => {
            let stranded = d.vertex_ids().filter(|v| !pc.position.contains_key(v)).collect();
            not_a_circuit(reason, stranded)
        }
        other => other,
    })?;
    Ok(pc)
}

/// Simple, square, and admits a causal flow.
pub fn is_circuit_like(d: &Diagram) -> bool {
    d.num_inputs() == d.num_outputs() && is_simple(d) && find_path_cover(d).is_ok()
}

/// Memoised path covers keyed by the diagram's serialised form.
#[derive(Default, Debug)]
pub struct PathCoverCache {
    entries: HashMap<String, Result<PathCover, FlowError>>,
}

impl PathCoverCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, d: &Diagram) -> Result<PathCover, FlowError> {
        self.entries
            .entry(d.to_json())
            .or_insert_with(|| find_path_cover(d))
            .clone()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn local_gates(kind: VertexKind, q: usize) -> Vec<Gate> {
    match kind {
        VertexKind::H => vec![Gate::H(q)],
        VertexKind::Z(p) => match p.quarter_turns() {
            1 => vec![Gate::S(q)],
            2 => vec![Gate::Z(q)],
            3 => vec![Gate::Z(q), Gate::S(q)],
            _ => Vec::new(),
        },
        VertexKind::X(p) => match p.quarter_turns() {
            1 => vec![Gate::V(q)],
            2 => vec![Gate::X(q)],
            3 => vec![Gate::X(q), Gate::V(q)],
            _ => Vec::new(),
        },
        VertexKind::Boundary => Vec::new(),
    }
}

/// Read a circuit off a diagram with a path cover.
///
/// Each path vertex contributes its phase gate, each cross edge a CNOT from
/// the Z end to the X end. CNOTs are emitted once both endpoints are current
/// on their qubits, picking the smallest (max position, qubit) first; the
/// flow order guarantees this never stalls. A trailing permutation of the
/// outputs is realised with SWAP gates.
pub fn extract_circuit(d: &Diagram, pc: &PathCover) -> Result<Circuit, FlowError> {
    pc.verify(d)?;
    let n = pc.width();
    let mut circuit = Circuit::new(n.max(1));
    let emit = |c: &mut Circuit, g: Gate| c.push(g).expect("extracted gate within width");

    let mut pending: BTreeMap<VertexId, BTreeMap<VertexId, u32>> = BTreeMap::new();
    for path in &pc.paths {
        for v in &path[1..path.len() - 1] {
            let cross = pc.cross_neighbours(d, *v);
            for (u, _) in &cross {
                let (kv, ku) = (d.kind(*v), d.kind(*u));
                if kv.colour().is_none() || ku.colour().is_none() || kv.colour() == ku.colour() {
                    return Err(FlowError::CrossEdgeColourError(*v, *u));
                }
            }
            pending.insert(*v, cross.into_iter().collect());
        }
    }

    // Pointer into each path; start on the input boundary.
    let mut at: Vec<usize> = vec![0; n];
    loop {
        // Advance past every finished vertex.
        for q in 0..n {
            let path = &pc.paths[q];
            while at[q] + 1 < path.len() {
                let cur = path[at[q]];
                if pending.get(&cur).is_some_and(|m| !m.is_empty()) {
                    break;
                }
                at[q] += 1;
                let next = path[at[q]];
                for g in local_gates(d.kind(next), q) {
                    emit(&mut circuit, g);
                }
            }
        }
        if (0..n).all(|q| at[q] + 1 == pc.paths[q].len()) {
            break;
        }
        let current: BTreeMap<VertexId, usize> = (0..n).map(|q| (pc.paths[q][at[q]], q)).collect();
        let mut best: Option<((usize, usize, usize), VertexId, VertexId)> = None;
        for (v, q) in &current {
            let Some(edges) = pending.get(v) else { continue };
            for u in edges.keys() {
                let Some(r) = current.get(u) else { continue };
                let key = (at[*q].max(at[*r]), (*q).min(*r), (*q).max(*r));
                if best.is_none_or(|(k, _, _)| key < k) {
                    best = Some((key, *v, *u));
                }
            }
        }
        let Some((_, v, u)) = best else {
            let stuck: Vec<VertexId> = current.keys().copied().collect();
            return Err(not_a_circuit("extraction stalled: no schedulable CNOT", stuck));
        };
        let (z, x) = if d.kind(v).colour() == Some(Colour::Z) { (v, u) } else { (u, v) };
        emit(&mut circuit, Gate::Cnot(current[&z], current[&x]));
        for (a, b) in [(v, u), (u, v)] {
            let m = pending.get_mut(&a).unwrap();
            let k = m.get_mut(&b).unwrap();
            *k -= 1;
            if *k == 0 {
                m.remove(&b);
            }
        }
    }

    // Path q must end on output wire out[q].
    let out_index: BTreeMap<VertexId, usize> = d.outputs().iter().enumerate().map(|(i, o)| (*o, i)).collect();
    let mut on_wire: Vec<usize> = (0..n).collect();
    for t in 0..n {
        let q = (0..n).find(|q| out_index[pc.paths[*q].last().unwrap()] == t).unwrap();
        let w = on_wire.iter().position(|x| *x == q).unwrap();
        if w != t {
            emit(&mut circuit, Gate::Swap(t, w));
            on_wire.swap(t, w);
        }
    }
    Ok(circuit)
}

/// Path cover then extraction.
pub fn extract(d: &Diagram) -> Result<Circuit, FlowError> {
    let pc = find_path_cover(d)?;
    extract_circuit(d, &pc)
}
