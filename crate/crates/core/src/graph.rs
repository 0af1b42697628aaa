//! Framed open graphs: the diagram data model and its structural algebra.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A phase angle restricted to multiples of π/2, stored as quarter turns mod 4.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ZERO: Phase = Phase(0);
    pub const QUARTER: Phase = Phase(1);
    pub const HALF: Phase = Phase(2);
    pub const THREE_QUARTERS: Phase = Phase(3);

    pub fn new(quarter_turns: i64) -> Self {
        Phase(quarter_turns.rem_euclid(4) as u8)
    }

    pub fn quarter_turns(self) -> u8 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Phase π: the spider is a Pauli.
    pub fn is_pauli(self) -> bool {
        self.0 == 2
    }

    /// ±π/2.
    pub fn is_proper_clifford(self) -> bool {
        self.0 % 2 == 1
    }

    pub fn radians(self) -> f64 {
        f64::from(self.0) * std::f64::consts::FRAC_PI_2
    }
}

impl Add for Phase {
    type Output = Phase;
    fn add(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl Sub for Phase {
    type Output = Phase;
    fn sub(self, rhs: Phase) -> Phase {
        self + (-rhs)
    }
}

impl Neg for Phase {
    type Output = Phase;
    fn neg(self) -> Phase {
        Phase((4 - self.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            0 => write!(f, "0"),
            1 => write!(f, "π/2"),
            2 => write!(f, "π"),
            _ => write!(f, "3π/2"),
        }
    }
}

/// Spider colour.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Colour {
    Z,
    X,
}

impl Colour {
    pub fn other(self) -> Colour {
        match self {
            Colour::Z => Colour::X,
            Colour::X => Colour::Z,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexKind {
    Z(Phase),
    X(Phase),
    H,
    Boundary,
}

impl VertexKind {
    pub fn spider(colour: Colour, phase: Phase) -> Self {
        match colour {
            Colour::Z => VertexKind::Z(phase),
            Colour::X => VertexKind::X(phase),
        }
    }

    pub fn is_spider(self) -> bool {
        matches!(self, VertexKind::Z(_) | VertexKind::X(_))
    }

    pub fn is_boundary(self) -> bool {
        self == VertexKind::Boundary
    }

    pub fn colour(self) -> Option<Colour> {
        match self {
            VertexKind::Z(_) => Some(Colour::Z),
            VertexKind::X(_) => Some(Colour::X),
            _ => None,
        }
    }

    pub fn phase(self) -> Option<Phase> {
        match self {
            VertexKind::Z(p) | VertexKind::X(p) => Some(p),
            _ => None,
        }
    }

    /// Same kind with the phase replaced; non-spiders are returned unchanged.
    pub fn with_phase(self, phase: Phase) -> Self {
        match self {
            VertexKind::Z(_) => VertexKind::Z(phase),
            VertexKind::X(_) => VertexKind::X(phase),
            other => other,
        }
    }

    /// Exchange Z and X, keeping the phase.
    pub fn colour_swapped(self) -> Self {
        match self {
            VertexKind::Z(p) => VertexKind::X(p),
            VertexKind::X(p) => VertexKind::Z(p),
            other => other,
        }
    }

    pub fn adjoint(self) -> Self {
        match self {
            VertexKind::Z(p) => VertexKind::Z(-p),
            VertexKind::X(p) => VertexKind::X(-p),
            other => other,
        }
    }
}

impl fmt::Display for VertexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexKind::Z(p) => write!(f, "Z({p})"),
            VertexKind::X(p) => write!(f, "X({p})"),
            VertexKind::H => write!(f, "H"),
            VertexKind::Boundary => write!(f, "B"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// `num_inputs → num_outputs` typing of a diagram.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiagramSignature {
    pub num_inputs: usize,
    pub num_outputs: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("cannot compose: first diagram has {outputs} outputs but second has {inputs} inputs")]
    CompositionArityError { outputs: usize, inputs: usize },
    #[error("edge endpoint {0} is not a vertex")]
    DanglingEdge(VertexId),
    #[error("boundary vertex {0} has degree {1}, expected 1")]
    BoundaryDegree(VertexId, usize),
    #[error("H vertex {0} has degree {1}, expected 2")]
    HDegree(VertexId, usize),
    #[error("boundary vertex {0} is not listed exactly once among inputs and outputs")]
    UnlistedBoundary(VertexId),
    #[error("vertex {0} is listed as a boundary but is not a boundary vertex")]
    NotABoundary(VertexId),
    #[error("malformed diagram JSON: {0}")]
    Json(String),
}

/// A framed undirected open graph.
///
/// Edges are stored as adjacency multiplicities; a self-loop on `v` is
/// recorded as `adj[v][v]` and contributes 2 to the degree of `v`.
/// All iteration follows the `VertexId` order.
#[derive(Clone, Debug, Default)]
pub struct Diagram {
    kinds: BTreeMap<VertexId, VertexKind>,
    adj: BTreeMap<VertexId, BTreeMap<VertexId, u32>>,
    inputs: Vec<VertexId>,
    outputs: Vec<VertexId>,
    next: u32,
}

/// Structural equality on ids, kinds, edges and boundary lists.
impl PartialEq for Diagram {
    fn eq(&self, other: &Self) -> bool {
        self.kinds == other.kinds
            && self.adj == other.adj
            && self.inputs == other.inputs
            && self.outputs == other.outputs
    }
}

impl Eq for Diagram {}

impl Diagram {
    pub fn new() -> Self {
        Self::default()
    }

    /// The empty diagram `0 → 0`.
    pub fn empty() -> Self {
        Self::default()
    }

    /// One bare wire: input boundary joined directly to output boundary.
    pub fn identity_wire() -> Self {
        Self::identity(1)
    }

    pub fn identity(n: usize) -> Self {
        let mut d = Diagram::new();
        for _ in 0..n {
            let i = d.add_input();
            let o = d.add_output();
            d.add_edge(i, o);
        }
        d
    }

    pub fn add_vertex(&mut self, kind: VertexKind) -> VertexId {
        let id = VertexId(self.next);
        self.next += 1;
        self.kinds.insert(id, kind);
        self.adj.insert(id, BTreeMap::new());
        id
    }

    /// Insert with an explicit id (used by deserialisation).
    pub fn add_vertex_with_id(&mut self, id: VertexId, kind: VertexKind) {
        self.kinds.insert(id, kind);
        self.adj.entry(id).or_default();
        self.next = self.next.max(id.0 + 1);
    }

    pub fn add_input(&mut self) -> VertexId {
        let v = self.add_vertex(VertexKind::Boundary);
        self.inputs.push(v);
        v
    }

    pub fn add_output(&mut self) -> VertexId {
        let v = self.add_vertex(VertexKind::Boundary);
        self.outputs.push(v);
        v
    }

    pub fn set_inputs(&mut self, inputs: Vec<VertexId>) {
        self.inputs = inputs;
    }

    pub fn set_outputs(&mut self, outputs: Vec<VertexId>) {
        self.outputs = outputs;
    }

    pub fn add_edge(&mut self, a: VertexId, b: VertexId) {
        self.add_edges(a, b, 1);
    }

    pub fn add_edges(&mut self, a: VertexId, b: VertexId, count: u32) {
        if count == 0 {
            return;
        }
        *self.adj.entry(a).or_default().entry(b).or_insert(0) += count;
        if a != b {
            *self.adj.entry(b).or_default().entry(a).or_insert(0) += count;
        }
    }

    /// Remove one copy of the edge `a–b`; returns false if there was none.
    pub fn remove_edge(&mut self, a: VertexId, b: VertexId) -> bool {
        self.remove_edges(a, b, 1) == 1
    }

    /// Remove up to `count` copies of `a–b`, returning how many were removed.
    pub fn remove_edges(&mut self, a: VertexId, b: VertexId, count: u32) -> u32 {
        let have = self.multiplicity(a, b);
        let k = have.min(count);
        if k == 0 {
            return 0;
        }
        for (x, y) in [(a, b), (b, a)] {
            if let Some(m) = self.adj.get_mut(&x) {
                let left = m[&y] - k;
                if left == 0 {
                    m.remove(&y);
                } else {
                    m.insert(y, left);
                }
            }
            if a == b {
                break;
            }
        }
        k
    }

    /// Delete a vertex together with every incident edge. Boundary lists are
    /// left alone; callers removing boundaries must fix them up.
    pub fn remove_vertex(&mut self, v: VertexId) {
        if let Some(nbrs) = self.adj.remove(&v) {
            for u in nbrs.keys() {
                if *u != v {
                    if let Some(m) = self.adj.get_mut(u) {
                        m.remove(&v);
                    }
                }
            }
        }
        self.kinds.remove(&v);
    }

    pub fn set_kind(&mut self, v: VertexId, kind: VertexKind) {
        self.kinds.insert(v, kind);
    }

    pub fn kind(&self, v: VertexId) -> VertexKind {
        self.kinds[&v]
    }

    pub fn try_kind(&self, v: VertexId) -> Option<VertexKind> {
        self.kinds.get(&v).copied()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.kinds.contains_key(&v)
    }

    pub fn multiplicity(&self, a: VertexId, b: VertexId) -> u32 {
        self.adj
            .get(&a)
            .and_then(|m| m.get(&b))
            .copied()
            .unwrap_or(0)
    }

    pub fn self_loops(&self, v: VertexId) -> u32 {
        self.multiplicity(v, v)
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj.get(&v).map_or(0, |m| {
            m.iter()
                .map(|(u, k)| if *u == v { 2 * *k as usize } else { *k as usize })
                .sum()
        })
    }

    /// Distinct neighbours other than `v` itself, with edge multiplicities.
    pub fn neighbours(&self, v: VertexId) -> impl Iterator<Item = (VertexId, u32)> + '_ {
        self.adj
            .get(&v)
            .into_iter()
            .flat_map(move |m| m.iter().filter(move |(u, _)| **u != v).map(|(u, k)| (*u, *k)))
    }

    pub fn neighbour_ids(&self, v: VertexId) -> Vec<VertexId> {
        self.neighbours(v).map(|(u, _)| u).collect()
    }

    pub fn adjacent(&self, a: VertexId, b: VertexId) -> bool {
        self.multiplicity(a, b) > 0
    }

    pub fn vertices(&self) -> impl Iterator<Item = (VertexId, VertexKind)> + '_ {
        self.kinds.iter().map(|(v, k)| (*v, *k))
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.kinds.keys().copied()
    }

    /// Non-boundary vertices.
    pub fn interior(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.kinds
            .iter()
            .filter(|(_, k)| !k.is_boundary())
            .map(|(v, _)| *v)
    }

    pub fn num_vertices(&self) -> usize {
        self.kinds.len()
    }

    pub fn num_interior(&self) -> usize {
        self.interior().count()
    }

    /// Every edge once as `(a, b, multiplicity)` with `a <= b`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, u32)> + '_ {
        self.adj.iter().flat_map(|(a, m)| {
            m.iter()
                .filter(move |(b, _)| *a <= **b)
                .map(move |(b, k)| (*a, *b, *k))
        })
    }

    pub fn num_edges(&self) -> usize {
        self.edges().map(|(_, _, k)| k as usize).sum()
    }

    pub fn inputs(&self) -> &[VertexId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[VertexId] {
        &self.outputs
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn signature(&self) -> DiagramSignature {
        DiagramSignature {
            num_inputs: self.inputs.len(),
            num_outputs: self.outputs.len(),
        }
    }

    pub fn is_input(&self, v: VertexId) -> bool {
        self.inputs.contains(&v)
    }

    pub fn is_output(&self, v: VertexId) -> bool {
        self.outputs.contains(&v)
    }

    /// The unique neighbour of a boundary vertex.
    pub fn boundary_neighbour(&self, b: VertexId) -> Option<VertexId> {
        self.adj.get(&b).and_then(|m| m.keys().next().copied())
    }

    /// Id that the next `add_vertex` call will hand out.
    pub fn next_id(&self) -> u32 {
        self.next
    }

    pub fn validate(&self) -> Result<(), DiagramError> {
        for (a, m) in &self.adj {
            if !self.kinds.contains_key(a) {
                return Err(DiagramError::DanglingEdge(*a));
            }
            for b in m.keys() {
                if !self.kinds.contains_key(b) {
                    return Err(DiagramError::DanglingEdge(*b));
                }
            }
        }
        let mut listed = BTreeSet::new();
        for v in self.inputs.iter().chain(&self.outputs) {
            if self.kinds.get(v) != Some(&VertexKind::Boundary) {
                return Err(DiagramError::NotABoundary(*v));
            }
            if !listed.insert(*v) {
                return Err(DiagramError::UnlistedBoundary(*v));
            }
        }
        for (v, k) in &self.kinds {
            match k {
                VertexKind::Boundary => {
                    if !listed.contains(v) {
                        return Err(DiagramError::UnlistedBoundary(*v));
                    }
                    let deg = self.degree(*v);
                    if deg != 1 {
                        return Err(DiagramError::BoundaryDegree(*v, deg));
                    }
                }
                VertexKind::H => {
                    let deg = self.degree(*v);
                    if deg != 2 {
                        return Err(DiagramError::HDegree(*v, deg));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    /// Copy every vertex and edge of `other` into `self` under fresh ids,
    /// returning the id translation. Boundary lists are not touched.
    fn absorb(&mut self, other: &Diagram) -> BTreeMap<VertexId, VertexId> {
        let map: BTreeMap<VertexId, VertexId> = other
            .vertices()
            .map(|(v, k)| (v, self.add_vertex(k)))
            .collect();
        for (a, b, k) in other.edges() {
            self.add_edges(map[&a], map[&b], k);
        }
        map
    }

    /// Sequential composition: `first` then `second`.
    pub fn compose(first: &Diagram, second: &Diagram) -> Result<Diagram, DiagramError> {
        if first.num_outputs() != second.num_inputs() {
            return Err(DiagramError::CompositionArityError {
                outputs: first.num_outputs(),
                inputs: second.num_inputs(),
            });
        }
        let mut d = first.clone();
        let map = d.absorb(second);
        let joins: Vec<(VertexId, VertexId)> = first
            .outputs
            .iter()
            .zip(&second.inputs)
            .map(|(o, i)| (*o, map[i]))
            .collect();
        for (o, i) in joins {
            let x = d.boundary_neighbour(o);
            let y = d.boundary_neighbour(i);
            d.remove_vertex(o);
            d.remove_vertex(i);
            match (x, y) {
                // The two junction ends were wired to each other: a closed loop, a scalar.
                (Some(x), Some(_)) if x == i => {}
                (Some(x), Some(y)) => d.add_edge(x, y),
                _ => {}
            }
        }
        d.inputs = first.inputs.clone();
        d.outputs = second.outputs.iter().map(|v| map[v]).collect();
        Ok(d)
    }

    /// Compose a sequence left to right.
    pub fn compose_all<'a>(
        parts: impl IntoIterator<Item = &'a Diagram>,
    ) -> Result<Diagram, DiagramError> {
        let mut it = parts.into_iter();
        let Some(first) = it.next() else {
            return Ok(Diagram::empty());
        };
        let mut acc = first.clone();
        for p in it {
            acc = Diagram::compose(&acc, p)?;
        }
        Ok(acc)
    }

    /// Monoidal product: `top` above `bottom`.
    pub fn tensor(top: &Diagram, bottom: &Diagram) -> Diagram {
        let mut d = top.clone();
        let map = d.absorb(bottom);
        d.inputs.extend(bottom.inputs.iter().map(|v| map[v]));
        d.outputs.extend(bottom.outputs.iter().map(|v| map[v]));
        d
    }

    /// Mirror image with negated phases.
    pub fn adjoint(&self) -> Diagram {
        let mut d = self.clone();
        for k in d.kinds.values_mut() {
            *k = k.adjoint();
        }
        std::mem::swap(&mut d.inputs, &mut d.outputs);
        d
    }

    /// Exchange Z and X everywhere.
    pub fn colour_swapped(&self) -> Diagram {
        let mut d = self.clone();
        for k in d.kinds.values_mut() {
            *k = k.colour_swapped();
        }
        d
    }

    /// Renumber vertices `0..n` in the current id order.
    pub fn compacted(&self) -> Diagram {
        let map: BTreeMap<VertexId, VertexId> = self
            .kinds
            .keys()
            .enumerate()
            .map(|(i, v)| (*v, VertexId(i as u32)))
            .collect();
        let mut d = Diagram::new();
        for (v, k) in self.vertices() {
            d.add_vertex_with_id(map[&v], k);
        }
        for (a, b, k) in self.edges() {
            d.add_edges(map[&a], map[&b], k);
        }
        d.inputs = self.inputs.iter().map(|v| map[v]).collect();
        d.outputs = self.outputs.iter().map(|v| map[v]).collect();
        d
    }

    /// Isomorphism of framed labelled graphs, boundaries matched by position.
    pub fn iso_equal(&self, other: &Diagram) -> bool {
        crate::iso::isomorphic(self, other)
    }
}

#[derive(Serialize, Deserialize)]
struct VertexJson {
    id: VertexId,
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    phase: Option<u8>,
}

#[derive(Serialize, Deserialize)]
struct DiagramJson {
    vertices: Vec<VertexJson>,
    edges: Vec<[VertexId; 2]>,
    inputs: Vec<VertexId>,
    outputs: Vec<VertexId>,
}

impl Serialize for Diagram {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let vertices = self
            .vertices()
            .map(|(id, k)| {
                let (kind, phase) = match k {
                    VertexKind::Z(p) => ("Z", Some(p.quarter_turns())),
                    VertexKind::X(p) => ("X", Some(p.quarter_turns())),
                    VertexKind::H => ("H", None),
                    VertexKind::Boundary => ("B", None),
                };
                VertexJson {
                    id,
                    kind: kind.to_string(),
                    phase,
                }
            })
            .collect();
        let edges = self
            .edges()
            .flat_map(|(a, b, k)| std::iter::repeat_n([a, b], k as usize))
            .collect();
        DiagramJson {
            vertices,
            edges,
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Diagram {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = DiagramJson::deserialize(de)?;
        let mut d = Diagram::new();
        for v in raw.vertices {
            let phase = || {
                v.phase
                    .filter(|p| *p < 4)
                    .map(|p| Phase::new(p.into()))
                    .ok_or_else(|| D::Error::custom(format!("vertex {} needs a phase in 0..3", v.id)))
            };
            let kind = match v.kind.as_str() {
                "Z" => VertexKind::Z(phase()?),
                "X" => VertexKind::X(phase()?),
                "H" => VertexKind::H,
                "B" => VertexKind::Boundary,
                other => return Err(D::Error::custom(format!("unknown vertex kind {other:?}"))),
            };
            if d.contains(v.id) {
                return Err(D::Error::custom(format!("duplicate vertex id {}", v.id)));
            }
            d.add_vertex_with_id(v.id, kind);
        }
        for [a, b] in raw.edges {
            if !d.contains(a) || !d.contains(b) {
                return Err(D::Error::custom(format!("edge [{a}, {b}] names an unknown vertex")));
            }
            d.add_edge(a, b);
        }
        d.inputs = raw.inputs;
        d.outputs = raw.outputs;
        d.validate().map_err(D::Error::custom)?;
        Ok(d)
    }
}

impl Diagram {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("diagram serialisation cannot fail")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("diagram serialisation cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Diagram, DiagramError> {
        serde_json::from_str(text).map_err(|e| DiagramError::Json(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(kind: VertexKind) -> Diagram {
        let mut d = Diagram::new();
        let i = d.add_input();
        let v = d.add_vertex(kind);
        let o = d.add_output();
        d.add_edge(i, v);
        d.add_edge(v, o);
        d
    }

    #[test]
    fn phase_arithmetic_wraps() {
        assert_eq!(Phase::new(5), Phase::QUARTER);
        assert_eq!(Phase::new(-1), Phase::THREE_QUARTERS);
        assert_eq!(-Phase::QUARTER, Phase::THREE_QUARTERS);
        assert_eq!(-Phase::ZERO, Phase::ZERO);
        assert_eq!(Phase::THREE_QUARTERS + Phase::HALF, Phase::QUARTER);
    }

    #[test]
    fn identity_composes_to_identity() {
        let w = Diagram::identity_wire();
        let c = Diagram::compose(&w, &w).unwrap();
        assert_eq!(c.num_interior(), 0);
        assert_eq!(c.num_edges(), 1);
        assert!(c.iso_equal(&w));
        c.validate().unwrap();
    }

    #[test]
    fn compose_joins_two_spiders_on_a_wire() {
        let s = single(VertexKind::Z(Phase::QUARTER));
        let c = Diagram::compose(&s, &s).unwrap();
        let zs: Vec<_> = c.interior().collect();
        assert_eq!(zs.len(), 2);
        assert!(c.adjacent(zs[0], zs[1]));
    }

    #[test]
    fn compose_rejects_arity_mismatch() {
        let two = Diagram::identity(2);
        let one = Diagram::identity_wire();
        assert_eq!(
            Diagram::compose(&two, &one),
            Err(DiagramError::CompositionArityError { outputs: 2, inputs: 1 })
        );
    }

    #[test]
    fn compose_cup_with_cap_drops_the_closed_loop() {
        let mut cup = Diagram::new();
        let a = cup.add_output();
        let b = cup.add_output();
        cup.add_edge(a, b);
        let mut cap = Diagram::new();
        let a = cap.add_input();
        let b = cap.add_input();
        cap.add_edge(a, b);
        let c = Diagram::compose(&cup, &cap).unwrap();
        assert_eq!(c.num_vertices(), 0);
        c.validate().unwrap();
    }

    #[test]
    fn tensor_with_empty_is_unit() {
        let s = single(VertexKind::X(Phase::HALF));
        assert!(Diagram::tensor(&Diagram::empty(), &s).iso_equal(&s));
        assert!(Diagram::tensor(&s, &Diagram::empty()).iso_equal(&s));
    }

    #[test]
    fn adjoint_negates_phase_and_swaps_boundaries() {
        let s = single(VertexKind::Z(Phase::QUARTER));
        let a = s.adjoint();
        assert!(a.iso_equal(&single(VertexKind::Z(Phase::THREE_QUARTERS))));
        assert!(a.adjoint().iso_equal(&s));
        assert!(Diagram::identity_wire().adjoint().iso_equal(&Diagram::identity_wire()));
    }

    #[test]
    fn different_kinds_are_not_isomorphic() {
        let s = single(VertexKind::Z(Phase::QUARTER));
        let v = single(VertexKind::X(Phase::QUARTER));
        assert!(!s.iso_equal(&v));
    }

    #[test]
    fn validate_catches_bad_degrees() {
        let mut d = single(VertexKind::H);
        let extra = d.add_vertex(VertexKind::Z(Phase::ZERO));
        let h = d.interior().next().unwrap();
        d.add_edge(h, extra);
        assert!(matches!(d.validate(), Err(DiagramError::HDegree(_, 3))));
        let mut d = Diagram::identity_wire();
        let i = d.inputs()[0];
        let z = d.add_vertex(VertexKind::Z(Phase::ZERO));
        d.add_edge(i, z);
        assert!(matches!(d.validate(), Err(DiagramError::BoundaryDegree(_, 2))));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mut d = single(VertexKind::Z(Phase::THREE_QUARTERS));
        let z = d.interior().next().unwrap();
        d.add_edge(z, z);
        let h = d.add_vertex(VertexKind::H);
        d.add_edges(z, h, 2);
        let text = d.to_json();
        let back = Diagram::from_json(&text).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.to_json(), text);
        let pretty = d.to_json_pretty();
        assert_eq!(Diagram::from_json(&pretty).unwrap().to_json_pretty(), pretty);
    }

    #[test]
    fn json_rejects_missing_phase() {
        let text = r#"{"vertices":[{"id":0,"kind":"Z"}],"edges":[],"inputs":[],"outputs":[]}"#;
        assert!(Diagram::from_json(text).is_err());
    }
}
