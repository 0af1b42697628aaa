//! Built-in structural rewrites for the variable-arity axioms: spider
//! fusion, identity and self-loop removal, hopf, H expansion, colour change
//! and π-commutation.
//!
//! Every pass is deterministic: work is picked in vertex-id order, so
//! re-running a pass on the same diagram reproduces the same result.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Colour, Diagram, Phase, VertexId, VertexKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PassError {
    #[error("vertex {0} is not a spider")]
    TargetKindError(VertexId),
    #[error("vertex {0} is not a degree-2 Pauli spider")]
    NotAPauli(VertexId),
    #[error("vertices {0} and {1} are not adjacent spiders of opposite colour")]
    NotOppositeNeighbours(VertexId, VertexId),
    #[error("vertex {0} does not exist")]
    MissingVertex(VertexId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PassKind {
    FuseSpiders,
    RemoveIdentities,
    RemoveSelfLoops,
    HopfReduce,
    HEulerExpand,
    ColourChangeVertex,
    PiCopy,
}

impl PassKind {
    pub const ALL: [PassKind; 7] = [
        PassKind::FuseSpiders,
        PassKind::RemoveIdentities,
        PassKind::RemoveSelfLoops,
        PassKind::HopfReduce,
        PassKind::HEulerExpand,
        PassKind::ColourChangeVertex,
        PassKind::PiCopy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PassKind::FuseSpiders => "fuse_spiders",
            PassKind::RemoveIdentities => "remove_identities",
            PassKind::RemoveSelfLoops => "remove_self_loops",
            PassKind::HopfReduce => "hopf_reduce",
            PassKind::HEulerExpand => "h_euler_expand",
            PassKind::ColourChangeVertex => "colour_change_vertex",
            PassKind::PiCopy => "pi_copy",
        }
    }

    pub fn from_name(name: &str) -> Option<PassKind> {
        PassKind::ALL.into_iter().find(|p| p.name() == name)
    }
}

impl fmt::Display for PassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn same_colour_spiders(d: &Diagram, a: VertexId, b: VertexId) -> bool {
    match (d.kind(a).colour(), d.kind(b).colour()) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    }
}

fn opposite_colour_spiders(d: &Diagram, a: VertexId, b: VertexId) -> bool {
    match (d.kind(a).colour(), d.kind(b).colour()) {
        (Some(x), Some(y)) => x != y,
        _ => false,
    }
}

/// Merge `u` into its same-colour neighbour `v`: phases add, edges move over,
/// one `u–v` edge is contracted and any others become self-loops on `v`.
pub(crate) fn merge_into(d: &mut Diagram, v: VertexId, u: VertexId) {
    let pu = d.kind(u).phase().unwrap_or(Phase::ZERO);
    let kv = d.kind(v);
    d.set_kind(v, kv.with_phase(kv.phase().unwrap_or(Phase::ZERO) + pu));
    let between = d.multiplicity(u, v);
    let loops = d.self_loops(u);
    let others: Vec<(VertexId, u32)> = d.neighbours(u).filter(|(w, _)| *w != v).collect();
    d.remove_vertex(u);
    for (w, k) in others {
        d.add_edges(v, w, k);
    }
    d.add_edges(v, v, between - 1 + loops);
}

/// Fuse adjacent same-colour spiders until none remain. Returns the
/// surviving vertices of each fusion.
pub(crate) fn fuse_spiders_in(d: &mut Diagram) -> Vec<VertexId> {
    let mut touched = Vec::new();
    loop {
        let pair = d.interior().find_map(|v| {
            d.neighbours(v)
                .map(|(u, _)| u)
                .find(|u| same_colour_spiders(d, v, *u))
                .map(|u| (v, u))
        });
        let Some((v, u)) = pair else { break };
        merge_into(d, v, u);
        if !touched.contains(&v) {
            touched.push(v);
        }
    }
    touched
}

pub fn fuse_spiders(d: &Diagram) -> Diagram {
    let mut d = d.clone();
    fuse_spiders_in(&mut d);
    d
}

/// Whether `v` is a removable identity: a zero-phase degree-2 spider
/// without self-loops.
pub fn is_identity_spider(d: &Diagram, v: VertexId) -> bool {
    let k = d.kind(v);
    k.is_spider() && k.phase() == Some(Phase::ZERO) && d.degree(v) == 2 && d.self_loops(v) == 0
}

/// Remove one identity spider, splicing its two edges together.
pub(crate) fn splice_out(d: &mut Diagram, v: VertexId) {
    let nbrs: Vec<(VertexId, u32)> = d.neighbours(v).collect();
    d.remove_vertex(v);
    match nbrs.as_slice() {
        [(a, 1), (b, 1)] => d.add_edge(*a, *b),
        [(a, 2)] => d.add_edge(*a, *a),
        _ => unreachable!("splice_out needs a degree-2 vertex"),
    }
}

/// Scalar-valued closed components of at most two spiders whose value is
/// known to be nonzero.
fn removable_scalar(d: &Diagram, v: VertexId) -> Option<Vec<VertexId>> {
    let k = d.kind(v);
    if !k.is_spider() {
        return None;
    }
    let nbrs: Vec<(VertexId, u32)> = d.neighbours(v).collect();
    let loops = d.self_loops(v);
    if nbrs.is_empty() {
        // 1 + e^{iα}, or 2^{…}(1 + e^{iα}) for X: zero exactly at phase π.
        return (loops == 0 && k.phase() != Some(Phase::HALF)).then(|| vec![v]);
    }
    if let [(u, 1)] = nbrs.as_slice() {
        let ku = d.kind(*u);
        if loops == 0 && ku.is_spider() && d.degree(*u) == 1 && ku.colour() != k.colour() {
            // ⟨Z(α) | X(β)⟩ vanishes only when both phases are π.
            let both_pi = k.phase() == Some(Phase::HALF) && ku.phase() == Some(Phase::HALF);
            return (!both_pi).then(|| vec![v.min(*u), v.max(*u)]);
        }
    }
    None
}

/// Delete identity spiders and nonzero scalar components.
pub(crate) fn remove_identities_in(d: &mut Diagram) -> Vec<VertexId> {
    let mut removed = Vec::new();
    loop {
        let next = d.interior().find(|v| is_identity_spider(d, *v));
        if let Some(v) = next {
            splice_out(d, v);
            removed.push(v);
            continue;
        }
        let scalar = d.interior().find_map(|v| removable_scalar(d, v));
        match scalar {
            Some(vs) => {
                for v in vs {
                    d.remove_vertex(v);
                    removed.push(v);
                }
            }
            None => break,
        }
    }
    removed
}

pub fn remove_identities(d: &Diagram) -> Diagram {
    let mut d = d.clone();
    remove_identities_in(&mut d);
    d
}

pub(crate) fn remove_self_loops_in(d: &mut Diagram) -> Vec<VertexId> {
    let looped: Vec<VertexId> = d
        .interior()
        .filter(|v| d.kind(*v).is_spider() && d.self_loops(*v) > 0)
        .collect();
    for v in &looped {
        let k = d.self_loops(*v);
        d.remove_edges(*v, *v, k);
    }
    looped
}

pub fn remove_self_loops(d: &Diagram) -> Diagram {
    let mut d = d.clone();
    remove_self_loops_in(&mut d);
    d
}

pub(crate) fn hopf_reduce_in(d: &mut Diagram) -> Vec<VertexId> {
    let mut touched = Vec::new();
    let pairs: Vec<(VertexId, VertexId, u32)> = d
        .edges()
        .filter(|(a, b, k)| a != b && *k >= 2 && opposite_colour_spiders(d, *a, *b))
        .collect();
    for (a, b, k) in pairs {
        d.remove_edges(a, b, k - k % 2);
        touched.push(a);
        touched.push(b);
    }
    touched
}

pub fn hopf_reduce(d: &Diagram) -> Diagram {
    let mut d = d.clone();
    hopf_reduce_in(&mut d);
    d
}

/// Replace `h` by the chain Z(π/2)–X(π/2)–Z(π/2).
pub(crate) fn expand_h(d: &mut Diagram, h: VertexId) -> [VertexId; 3] {
    let ends: Vec<VertexId> = if d.self_loops(h) > 0 {
        Vec::new()
    } else {
        d.neighbours(h)
            .flat_map(|(u, k)| std::iter::repeat_n(u, k as usize))
            .collect()
    };
    d.remove_vertex(h);
    let a = d.add_vertex(VertexKind::Z(Phase::QUARTER));
    let b = d.add_vertex(VertexKind::X(Phase::QUARTER));
    let c = d.add_vertex(VertexKind::Z(Phase::QUARTER));
    d.add_edge(a, b);
    d.add_edge(b, c);
    match ends.as_slice() {
        [x, y] => {
            d.add_edge(*x, a);
            d.add_edge(c, *y);
        }
        _ => d.add_edge(c, a),
    }
    [a, b, c]
}

pub(crate) fn h_euler_expand_in(d: &mut Diagram) -> Vec<VertexId> {
    let hs: Vec<VertexId> = d.interior().filter(|v| d.kind(*v) == VertexKind::H).collect();
    for h in &hs {
        expand_h(d, *h);
    }
    hs
}

pub fn h_euler_expand(d: &Diagram) -> Diagram {
    let mut d = d.clone();
    h_euler_expand_in(&mut d);
    d
}

/// Flip the colour of spider `v`, putting an H on every incident edge and
/// cancelling any H that was already there.
pub fn colour_change_vertex(d: &Diagram, v: VertexId) -> Result<Diagram, PassError> {
    let mut d = d.clone();
    colour_change_in(&mut d, v)?;
    Ok(d)
}

pub(crate) fn colour_change_in(d: &mut Diagram, v: VertexId) -> Result<(), PassError> {
    let k = d.try_kind(v).ok_or(PassError::MissingVertex(v))?;
    if !k.is_spider() {
        return Err(PassError::TargetKindError(v));
    }
    d.set_kind(v, k.colour_swapped());
    let nbrs: Vec<(VertexId, u32)> = d.neighbours(v).collect();
    for (u, mult) in nbrs {
        let other = (d.kind(u) == VertexKind::H && mult == 1)
            .then(|| d.neighbours(u).map(|(w, _)| w).find(|w| *w != v))
            .flatten();
        match other {
            Some(w) => {
                d.remove_vertex(u);
                d.add_edge(v, w);
            }
            None => {
                for _ in 0..mult {
                    d.remove_edge(v, u);
                    let h = d.add_vertex(VertexKind::H);
                    d.add_edge(v, h);
                    d.add_edge(h, u);
                }
            }
        }
    }
    Ok(())
}

/// Push the degree-2 Pauli spider `p` through its opposite-colour neighbour
/// `s`: `s`'s phase is negated and a copy of `p` lands on each of `s`'s other
/// legs. Returns the new Pauli vertices.
pub fn pi_copy(d: &Diagram, p: VertexId, s: VertexId) -> Result<(Diagram, Vec<VertexId>), PassError> {
    let mut d = d.clone();
    let new = pi_copy_in(&mut d, p, s)?;
    Ok((d, new))
}

pub(crate) fn pi_copy_in(d: &mut Diagram, p: VertexId, s: VertexId) -> Result<Vec<VertexId>, PassError> {
    let kp = d.try_kind(p).ok_or(PassError::MissingVertex(p))?;
    d.try_kind(s).ok_or(PassError::MissingVertex(s))?;
    if !(kp.is_spider() && kp.phase() == Some(Phase::HALF) && d.degree(p) == 2 && d.self_loops(p) == 0) {
        return Err(PassError::NotAPauli(p));
    }
    if !(d.multiplicity(p, s) == 1 && opposite_colour_spiders(d, p, s)) {
        return Err(PassError::NotOppositeNeighbours(p, s));
    }
    let colour: Colour = kp.colour().unwrap();
    let a = d.neighbours(p).map(|(u, _)| u).find(|u| *u != s).unwrap();
    d.remove_vertex(p);
    let legs: Vec<(VertexId, u32)> = d.neighbours(s).collect();
    let ks = d.kind(s);
    d.set_kind(s, ks.with_phase(-ks.phase().unwrap()));
    let mut new = Vec::new();
    for (u, k) in legs {
        for _ in 0..k {
            d.remove_edge(s, u);
            let q = d.add_vertex(VertexKind::spider(colour, Phase::HALF));
            d.add_edge(s, q);
            d.add_edge(q, u);
            new.push(q);
        }
    }
    // Self-loops of `s` pass two copies of the Pauli, which fuse to nothing.
    d.add_edge(a, s);
    Ok(new)
}

/// No H boxes, self-loops or parallel edges; no same-colour neighbours; no
/// zero-phase degree-2 spiders.
pub fn is_simple(d: &Diagram) -> bool {
    for (v, k) in d.vertices() {
        if k == VertexKind::H || d.self_loops(v) > 0 {
            return false;
        }
        if k.is_spider() && k.phase() == Some(Phase::ZERO) && d.degree(v) == 2 {
            return false;
        }
        for (u, m) in d.neighbours(v) {
            if m > 1 || same_colour_spiders(d, v, u) {
                return false;
            }
        }
    }
    true
}

/// Passes applied by one round of [`simple_form`], in order.
pub const SIMPLIFY_ROUND: [PassKind; 4] = [
    PassKind::FuseSpiders,
    PassKind::RemoveSelfLoops,
    PassKind::HopfReduce,
    PassKind::RemoveIdentities,
];

/// Run one whole-diagram pass by kind; targeted passes are not runnable here.
pub(crate) fn run_pass(d: &mut Diagram, pass: PassKind) -> Vec<VertexId> {
    match pass {
        PassKind::FuseSpiders => fuse_spiders_in(d),
        PassKind::RemoveIdentities => remove_identities_in(d),
        PassKind::RemoveSelfLoops => remove_self_loops_in(d),
        PassKind::HopfReduce => hopf_reduce_in(d),
        PassKind::HEulerExpand => h_euler_expand_in(d),
        PassKind::ColourChangeVertex | PassKind::PiCopy => {
            panic!("{pass} needs a target vertex")
        }
    }
}

/// Expand H boxes, then fuse / anti-loop / hopf / identity to a fixpoint.
/// Calls `on_pass` for each pass that changed something.
pub(crate) fn simple_form_with(d: &Diagram, mut on_pass: impl FnMut(PassKind, &[VertexId], &Diagram)) -> Diagram {
    let mut d = d.clone();
    let hs = h_euler_expand_in(&mut d);
    if !hs.is_empty() {
        on_pass(PassKind::HEulerExpand, &hs, &d);
    }
    loop {
        let mut changed = false;
        for pass in SIMPLIFY_ROUND {
            let touched = run_pass(&mut d, pass);
            if !touched.is_empty() {
                changed = true;
                on_pass(pass, &touched, &d);
            }
        }
        if !changed {
            return d;
        }
    }
}

pub fn simple_form(d: &Diagram) -> Diagram {
    simple_form_with(d, |_, _, _| {})
}
