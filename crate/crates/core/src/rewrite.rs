//! Fixed-arity rule matching and application, proof traces and the
//! rewrite strategy combinators.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Diagram, VertexId};
use crate::passes::{self, PassKind};
use crate::semantics::{self, SemanticsError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RewriteError {
    #[error("rule {rule}: {reason}")]
    MalformedRule { rule: String, reason: String },
    #[error("match for {0} no longer fits the diagram")]
    StaleMatchError(String),
    #[error("replay diverged at step {step}: {reason}")]
    ReplayDivergence { step: usize, reason: String },
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// A directed equation between two diagrams with the same boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub name: String,
    pub lhs: Diagram,
    pub rhs: Diagram,
}

impl Rule {
    pub fn new(name: impl Into<String>, lhs: Diagram, rhs: Diagram) -> Result<Rule, RewriteError> {
        let rule = Rule {
            name: name.into(),
            lhs,
            rhs,
        };
        rule.check_shape()?;
        Ok(rule)
    }

    fn malformed(&self, reason: impl Into<String>) -> RewriteError {
        RewriteError::MalformedRule {
            rule: self.name.clone(),
            reason: reason.into(),
        }
    }

    /// Boundary counts agree, the LHS has an interior, and every LHS
    /// boundary hangs off an interior vertex.
    pub fn check_shape(&self) -> Result<(), RewriteError> {
        for d in [&self.lhs, &self.rhs] {
            d.validate().map_err(|e| self.malformed(e.to_string()))?;
        }
        if self.lhs.num_inputs() != self.rhs.num_inputs() || self.lhs.num_outputs() != self.rhs.num_outputs() {
            return Err(self.malformed("boundary counts differ between sides"));
        }
        if self.lhs.num_interior() == 0 {
            return Err(self.malformed("left-hand side has no interior vertex"));
        }
        for b in self.lhs.inputs().iter().chain(self.lhs.outputs()) {
            let n = self.lhs.boundary_neighbour(*b);
            if !n.is_some_and(|v| !self.lhs.kind(v).is_boundary()) {
                return Err(self.malformed("left-hand side boundary wired straight to another boundary"));
            }
        }
        Ok(())
    }

    /// Z and X exchanged on both sides.
    pub fn colour_swapped(&self, name: impl Into<String>) -> Rule {
        Rule {
            name: name.into(),
            lhs: self.lhs.colour_swapped(),
            rhs: self.rhs.colour_swapped(),
        }
    }

    /// Same rule with both sides mirrored (inputs and outputs exchanged).
    pub fn adjoint(&self, name: impl Into<String>) -> Rule {
        Rule {
            name: name.into(),
            lhs: self.lhs.adjoint(),
            rhs: self.rhs.adjoint(),
        }
    }

    /// Oracle check: both sides have the same semantics up to scalar.
    pub fn is_sound(&self) -> Result<bool, SemanticsError> {
        semantics::diagrams_equal(&self.lhs, &self.rhs, semantics::DEFAULT_TOL)
    }

    /// Position of an LHS boundary vertex in the boundary lists.
    fn boundary_slot(d: &Diagram, b: VertexId) -> Option<Slot> {
        if let Some(i) = d.inputs().iter().position(|x| *x == b) {
            return Some(Slot::Input(i));
        }
        d.outputs().iter().position(|x| *x == b).map(Slot::Output)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rule serialises")
    }

    pub fn from_json(text: &str) -> Result<Rule, RewriteError> {
        let rule: Rule = serde_json::from_str(text).map_err(|e| RewriteError::MalformedRule {
            rule: "<file>".into(),
            reason: e.to_string(),
        })?;
        rule.check_shape()?;
        Ok(rule)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Slot {
    Input(usize),
    Output(usize),
}

/// The target edge an LHS boundary stands for: from the matched vertex
/// `inner` out to the unmatched vertex `outer`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfEdge {
    pub inner: VertexId,
    pub outer: VertexId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Match {
    pub rule_name: String,
    /// LHS interior vertex → target vertex.
    pub vertex_map: BTreeMap<VertexId, VertexId>,
    /// Target edges covered by LHS interior edges, with multiplicity.
    pub edge_map: Vec<((VertexId, VertexId), (VertexId, VertexId), u32)>,
    /// LHS boundary vertex → the target half-edge it stands for.
    pub boundary_attach: BTreeMap<VertexId, HalfEdge>,
}

impl Match {
    /// Sorted target images of the LHS interior.
    pub fn image(&self) -> Vec<VertexId> {
        let mut v: Vec<VertexId> = self.vertex_map.values().copied().collect();
        v.sort();
        v
    }

    /// Stable text identifying this match within its rule's match list.
    pub fn fingerprint(&self) -> String {
        let mut s = String::new();
        for (l, t) in &self.vertex_map {
            let _ = write!(s, "{l}>{t};");
        }
        s.push('|');
        for (b, h) in &self.boundary_attach {
            let _ = write!(s, "{b}>{}-{};", h.inner, h.outer);
        }
        s
    }

    fn order_key(&self) -> (Vec<VertexId>, Vec<VertexId>, Vec<HalfEdge>) {
        (
            self.image(),
            self.vertex_map.values().copied().collect(),
            self.boundary_attach.values().copied().collect(),
        )
    }
}

/// All matches of `rule` in `target`, ordered by sorted image, then by the
/// mapping itself, then by boundary attachment.
pub fn find_matches(rule: &Rule, target: &Diagram) -> Vec<Match> {
    let mut out = Vec::new();
    Matcher::new(rule, target, None).run(&mut out);
    out.sort_by_key(|m| m.order_key());
    out
}

/// Matches with `anchor` (an LHS interior vertex) sent to `at`.
pub fn find_matches_at(rule: &Rule, target: &Diagram, anchor: VertexId, at: VertexId) -> Vec<Match> {
    let mut out = Vec::new();
    if rule.lhs.try_kind(anchor).is_some_and(|k| !k.is_boundary()) && target.contains(at) {
        Matcher::new(rule, target, Some((anchor, at))).run(&mut out);
    }
    out.sort_by_key(|m| m.order_key());
    out
}

struct Matcher<'a> {
    rule: &'a Rule,
    lhs: &'a Diagram,
    target: &'a Diagram,
    order: Vec<VertexId>,
    pinned: Option<(VertexId, VertexId)>,
    forward: BTreeMap<VertexId, VertexId>,
    used: BTreeSet<VertexId>,
}

impl<'a> Matcher<'a> {
    fn new(rule: &'a Rule, target: &'a Diagram, pinned: Option<(VertexId, VertexId)>) -> Self {
        let lhs = &rule.lhs;
        // Breadth-first over the LHS interior, starting from the pinned
        // vertex if any, so later vertices have a mapped neighbour.
        let interior: Vec<VertexId> = lhs.interior().collect();
        let mut order = Vec::new();
        let mut seen = BTreeSet::new();
        let mut roots: Vec<VertexId> = pinned.map(|(a, _)| a).into_iter().chain(interior.iter().copied()).collect();
        roots.dedup();
        for r in roots {
            if !seen.insert(r) {
                continue;
            }
            let mut q = VecDeque::from([r]);
            order.push(r);
            while let Some(v) = q.pop_front() {
                for (u, _) in lhs.neighbours(v) {
                    if !lhs.kind(u).is_boundary() && seen.insert(u) {
                        order.push(u);
                        q.push_back(u);
                    }
                }
            }
        }
        Matcher {
            rule,
            lhs,
            target,
            order,
            pinned,
            forward: BTreeMap::new(),
            used: BTreeSet::new(),
        }
    }

    fn run(&mut self, out: &mut Vec<Match>) {
        self.extend(0, out);
    }

    fn candidates(&self, v: VertexId) -> Vec<VertexId> {
        if let Some((a, t)) = self.pinned {
            if a == v {
                return vec![t];
            }
        }
        let anchor = self
            .lhs
            .neighbours(v)
            .find_map(|(u, _)| self.forward.get(&u).copied());
        match anchor {
            Some(img) => self.target.neighbour_ids(img),
            None => self.target.interior().collect(),
        }
    }

    fn fits(&self, v: VertexId, t: VertexId) -> bool {
        let (l, g) = (self.lhs, self.target);
        if self.used.contains(&t) || g.kind(t) != l.kind(v) || g.kind(t).is_boundary() {
            return false;
        }
        if g.degree(t) != l.degree(v) || g.self_loops(t) != l.self_loops(v) {
            return false;
        }
        // Edges to already-mapped vertices must agree exactly, in both directions.
        for (w, img) in &self.forward {
            if l.multiplicity(v, *w) != g.multiplicity(t, *img) {
                return false;
            }
        }
        true
    }

    fn extend(&mut self, depth: usize, out: &mut Vec<Match>) {
        let Some(&v) = self.order.get(depth) else {
            self.attach_boundaries(out);
            return;
        };
        for t in self.candidates(v) {
            if !self.fits(v, t) {
                continue;
            }
            self.forward.insert(v, t);
            self.used.insert(t);
            self.extend(depth + 1, out);
            self.forward.remove(&v);
            self.used.remove(&t);
        }
    }

    /// Assign LHS boundary legs to the outgoing half-edges of each image,
    /// over all distinct bijections.
    fn attach_boundaries(&self, out: &mut Vec<Match>) {
        let (l, g) = (self.lhs, self.target);
        let mut per_vertex: Vec<(Vec<VertexId>, Vec<HalfEdge>)> = Vec::new();
        for (v, t) in &self.forward {
            let legs: Vec<VertexId> = l
                .neighbours(*v)
                .filter(|(u, _)| l.kind(*u).is_boundary())
                .map(|(u, _)| u)
                .collect();
            let halves: Vec<HalfEdge> = g
                .neighbours(*t)
                .filter(|(u, _)| !self.used.contains(u))
                .flat_map(|(u, k)| std::iter::repeat_n(HalfEdge { inner: *t, outer: u }, k as usize))
                .collect();
            if legs.len() != halves.len() {
                return;
            }
            per_vertex.push((legs, halves));
        }
        let mut edge_map = Vec::new();
        for (a, b, k) in l.edges() {
            if let (Some(x), Some(y)) = (self.forward.get(&a), self.forward.get(&b)) {
                edge_map.push(((a, b), (*x, *y), k));
            }
        }
        let mut choices: Vec<Vec<Vec<HalfEdge>>> = Vec::new();
        for (_, halves) in &per_vertex {
            choices.push(distinct_permutations(halves));
        }
        let mut idx = vec![0usize; per_vertex.len()];
        loop {
            let mut attach = BTreeMap::new();
            for (k, (legs, _)) in per_vertex.iter().enumerate() {
                for (leg, h) in legs.iter().zip(&choices[k][idx[k]]) {
                    attach.insert(*leg, *h);
                }
            }
            out.push(Match {
                rule_name: self.rule.name.clone(),
                vertex_map: self.forward.clone(),
                edge_map: edge_map.clone(),
                boundary_attach: attach,
            });
            // Odometer over the per-vertex permutation lists.
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return;
                }
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
}

/// All orderings of `items`, without repeats when items coincide.
fn distinct_permutations(items: &[HalfEdge]) -> Vec<Vec<HalfEdge>> {
    let mut sorted = items.to_vec();
    sorted.sort();
    let mut out = Vec::new();
    let mut used = vec![false; sorted.len()];
    let mut cur = Vec::new();
    fn go(sorted: &[HalfEdge], used: &mut [bool], cur: &mut Vec<HalfEdge>, out: &mut Vec<Vec<HalfEdge>>) {
        if cur.len() == sorted.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..sorted.len() {
            if used[i] || (i > 0 && sorted[i] == sorted[i - 1] && !used[i - 1]) {
                continue;
            }
            used[i] = true;
            cur.push(sorted[i]);
            go(sorted, used, cur, out);
            cur.pop();
            used[i] = false;
        }
    }
    go(&sorted, &mut used, &mut cur, &mut out);
    out
}

/// Re-check a match against the current diagram.
fn revalidate(rule: &Rule, target: &Diagram, m: &Match) -> bool {
    let l = &rule.lhs;
    let images: BTreeSet<VertexId> = m.vertex_map.values().copied().collect();
    if images.len() != m.vertex_map.len() || m.vertex_map.len() != l.num_interior() {
        return false;
    }
    for (v, t) in &m.vertex_map {
        if l.try_kind(*v).is_none_or(|k| k.is_boundary()) || target.try_kind(*t) != Some(l.kind(*v)) {
            return false;
        }
        if target.degree(*t) != l.degree(*v) || target.self_loops(*t) != l.self_loops(*v) {
            return false;
        }
        for (w, s) in &m.vertex_map {
            if v < w && l.multiplicity(*v, *w) != target.multiplicity(*t, *s) {
                return false;
            }
        }
    }
    // Boundary legs use each outgoing half-edge exactly once.
    let mut wanted: BTreeMap<(VertexId, VertexId), u32> = BTreeMap::new();
    for (b, h) in &m.boundary_attach {
        let Some(inner) = l.boundary_neighbour(*b) else { return false };
        if m.vertex_map.get(&inner) != Some(&h.inner) || images.contains(&h.outer) {
            return false;
        }
        *wanted.entry((h.inner, h.outer)).or_insert(0) += 1;
    }
    let legs = l.inputs().len() + l.outputs().len();
    if m.boundary_attach.len() != legs {
        return false;
    }
    for t in &images {
        for (u, k) in target.neighbours(*t) {
            if !images.contains(&u) && wanted.get(&(*t, u)).copied().unwrap_or(0) != k {
                return false;
            }
        }
    }
    true
}

/// Replace the matched region by a fresh copy of the rule's right-hand side.
pub fn apply_match(rule: &Rule, target: &Diagram, m: &Match) -> Result<Diagram, RewriteError> {
    if m.rule_name != rule.name || !revalidate(rule, target, m) {
        return Err(RewriteError::StaleMatchError(m.rule_name.clone()));
    }
    let mut d = target.clone();
    for t in m.vertex_map.values() {
        d.remove_vertex(*t);
    }
    let (l, r) = (&rule.lhs, &rule.rhs);
    let copies: BTreeMap<VertexId, VertexId> = r.interior().map(|v| (v, d.add_vertex(r.kind(v)))).collect();
    for (a, b, k) in r.edges() {
        if let (Some(x), Some(y)) = (copies.get(&a), copies.get(&b)) {
            d.add_edges(*x, *y, k);
        }
    }
    // Where each RHS boundary plugs in: the outer end of the matching LHS leg.
    let outer_of = |rb: VertexId| -> VertexId {
        let slot = Rule::boundary_slot(r, rb).expect("rhs boundary");
        let lb = match slot {
            Slot::Input(i) => l.inputs()[i],
            Slot::Output(i) => l.outputs()[i],
        };
        m.boundary_attach[&lb].outer
    };
    let mut done = BTreeSet::new();
    for rb in r.inputs().iter().chain(r.outputs()) {
        if done.contains(rb) {
            continue;
        }
        let n = r.boundary_neighbour(*rb).expect("rhs boundary has a neighbour");
        if r.kind(n).is_boundary() {
            done.insert(n);
            d.add_edge(outer_of(*rb), outer_of(n));
        } else {
            d.add_edge(outer_of(*rb), copies[&n]);
        }
    }
    debug_assert!(d.is_valid(), "rewrite left an invalid diagram");
    Ok(d)
}

/// One recorded step of a proof.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ProofStep {
    AxiomaticRewrite {
        rule: String,
        fingerprint: String,
    },
    StructuralPass {
        pass: PassKind,
        /// Vertex arguments of targeted passes (colour change, π-copy).
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        targets: Vec<VertexId>,
        affected: Vec<VertexId>,
    },
    SemanticNormalisation {
        region: Vec<VertexId>,
        replacement: String,
        result: Diagram,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProofTrace {
    pub initial: Diagram,
    pub steps: Vec<ProofStep>,
    #[serde(rename = "final")]
    pub final_diagram: Diagram,
}

impl ProofTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serialises")
    }

    pub fn from_json(text: &str) -> Result<ProofTrace, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn rewrite_count(&self) -> usize {
        self.steps.len()
    }
}

/// Collects steps while a strategy runs.
#[derive(Clone, Debug, Default)]
pub struct Trace {
    steps: Vec<ProofStep>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, step: ProofStep) {
        self.steps.push(step);
    }

    pub fn steps(&self) -> &[ProofStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn truncate(&mut self, len: usize) {
        self.steps.truncate(len);
    }

    pub fn finish(self, initial: Diagram, final_diagram: Diagram) -> ProofTrace {
        ProofTrace {
            initial,
            steps: self.steps,
            final_diagram,
        }
    }
}

/// Looks rules up by name during replay.
pub trait RuleLookup {
    fn rule(&self, name: &str) -> Option<&Rule>;
}

impl RuleLookup for [Rule] {
    fn rule(&self, name: &str) -> Option<&Rule> {
        self.iter().find(|r| r.name == name)
    }
}

impl RuleLookup for Vec<Rule> {
    fn rule(&self, name: &str) -> Option<&Rule> {
        self.as_slice().rule(name)
    }
}

/// Apply a structural pass and record it.
pub fn apply_pass(d: &Diagram, pass: PassKind, targets: &[VertexId], trace: &mut Trace) -> Option<Diagram> {
    let (out, affected) = run_structural(d, pass, targets).ok()?;
    if affected.is_empty() {
        return None;
    }
    trace.push(ProofStep::StructuralPass {
        pass,
        targets: targets.to_vec(),
        affected,
    });
    Some(out)
}

fn run_structural(d: &Diagram, pass: PassKind, targets: &[VertexId]) -> Result<(Diagram, Vec<VertexId>), String> {
    let mut out = d.clone();
    let affected = match (pass, targets) {
        (PassKind::ColourChangeVertex, [v]) => {
            passes::colour_change_in(&mut out, *v).map_err(|e| e.to_string())?;
            vec![*v]
        }
        (PassKind::PiCopy, [p, s]) => {
            let mut new = passes::pi_copy_in(&mut out, *p, *s).map_err(|e| e.to_string())?;
            new.insert(0, *s);
            new
        }
        (PassKind::ColourChangeVertex | PassKind::PiCopy, _) => {
            return Err(format!("{pass} given {} targets", targets.len()))
        }
        (_, []) => passes::run_pass(&mut out, pass),
        _ => return Err(format!("{pass} takes no targets")),
    };
    Ok((out, affected))
}

/// Re-run every step from the initial diagram.
pub fn replay<L: RuleLookup + ?Sized>(trace: &ProofTrace, rules: &L) -> Result<Diagram, RewriteError> {
    let mut d = trace.initial.clone();
    let diverged = |step: usize, reason: String| RewriteError::ReplayDivergence { step, reason };
    d.validate().map_err(|e| diverged(0, e.to_string()))?;
    for (i, step) in trace.steps.iter().enumerate() {
        d = match step {
            ProofStep::AxiomaticRewrite { rule, fingerprint } => {
                let r = rules
                    .rule(rule)
                    .ok_or_else(|| diverged(i, format!("unknown rule {rule}")))?;
                let m = find_matches(r, &d)
                    .into_iter()
                    .find(|m| &m.fingerprint() == fingerprint)
                    .ok_or_else(|| diverged(i, format!("{rule} no longer matches at {fingerprint}")))?;
                apply_match(r, &d, &m).map_err(|e| diverged(i, e.to_string()))?
            }
            ProofStep::StructuralPass {
                pass,
                targets,
                affected,
            } => {
                let (out, got) = run_structural(&d, *pass, targets).map_err(|e| diverged(i, e))?;
                if &got != affected {
                    return Err(diverged(i, format!("{pass} touched different vertices")));
                }
                out
            }
            ProofStep::SemanticNormalisation { region, result, .. } => {
                check_semantic_step(&d, region, result).map_err(|e| diverged(i, e))?;
                result.clone()
            }
        };
        d.validate().map_err(|e| diverged(i, e.to_string()))?;
    }
    if !d.iso_equal(&trace.final_diagram) {
        return Err(diverged(trace.steps.len(), "final diagram differs".into()));
    }
    Ok(d)
}

/// A semantic step may only touch `region`, must keep the boundary, and
/// must preserve semantics when the oracle can afford to check.
pub fn check_semantic_step(before: &Diagram, region: &[VertexId], after: &Diagram) -> Result<(), String> {
    let region: BTreeSet<VertexId> = region.iter().copied().collect();
    if before.inputs() != after.inputs() || before.outputs() != after.outputs() {
        return Err("boundary changed".into());
    }
    for (v, k) in before.vertices() {
        if region.contains(&v) {
            continue;
        }
        if after.try_kind(v) != Some(k) {
            return Err(format!("vertex {v} outside the region changed"));
        }
        for (u, m) in before.neighbours(v) {
            if !region.contains(&u) && after.multiplicity(v, u) != m {
                return Err(format!("edge {v}–{u} outside the region changed"));
            }
        }
    }
    match semantics::diagrams_equal(before, after, semantics::DEFAULT_TOL) {
        Ok(true) => Ok(()),
        Ok(false) => Err("semantics changed".into()),
        Err(SemanticsError::SemanticsSizeError { .. }) | Err(SemanticsError::ContractionTooLarge { .. }) => Ok(()),
        Err(e) => Err(e.to_string()),
    }
}

fn record(trace: &mut Trace, m: &Match) {
    trace.push(ProofStep::AxiomaticRewrite {
        rule: m.rule_name.clone(),
        fingerprint: m.fingerprint(),
    });
}

/// First match of the first rule that matches at all.
pub fn rewrite_first(rules: &[Rule], d: &Diagram, trace: &mut Trace) -> Option<Diagram> {
    rewrite_first_where(rules, d, trace, |_| true)
}

/// Like [`rewrite_first`] but skipping results rejected by `accept`.
pub fn rewrite_first_where(
    rules: &[Rule],
    d: &Diagram,
    trace: &mut Trace,
    accept: impl Fn(&Diagram) -> bool,
) -> Option<Diagram> {
    for r in rules {
        for m in find_matches(r, d) {
            let Ok(out) = apply_match(r, d, &m) else { continue };
            if accept(&out) {
                record(trace, &m);
                return Some(out);
            }
        }
    }
    None
}

/// First match (rules in order, matches in order) whose
/// result has strictly smaller metric.
pub fn rewrite_metric<M: Ord>(
    rules: &[Rule],
    d: &Diagram,
    metric: impl Fn(&Diagram) -> M,
    trace: &mut Trace,
) -> Option<Diagram> {
    let base = metric(d);
    for r in rules {
        for m in find_matches(r, d) {
            let Ok(out) = apply_match(r, d, &m) else { continue };
            if metric(&out) < base {
                record(trace, &m);
                return Some(out);
            }
        }
    }
    None
}

/// Only matches sending `anchor` to the vertex chosen by
/// `target_fn`.
pub fn rewrite_targeted(
    rule: &Rule,
    anchor: VertexId,
    d: &Diagram,
    target_fn: impl Fn(&Diagram) -> Option<VertexId>,
    trace: &mut Trace,
) -> Option<Diagram> {
    let at = target_fn(d)?;
    let m = find_matches_at(rule, d, anchor, at).into_iter().next()?;
    let out = apply_match(rule, d, &m).ok()?;
    record(trace, &m);
    Some(out)
}

#[derive(Clone, Debug)]
pub struct ReduceOutcome {
    pub diagram: Diagram,
    pub steps: usize,
    /// False when the step budget ran out first.
    pub fixpoint: bool,
}

/// Apply `strategy` until it returns nothing or the budget is spent.
pub fn reduce(
    mut strategy: impl FnMut(&Diagram, &mut Trace) -> Option<Diagram>,
    d: &Diagram,
    trace: &mut Trace,
    max_steps: usize,
) -> ReduceOutcome {
    let mut cur = d.clone();
    for steps in 0..max_steps {
        match strategy(&cur, trace) {
            Some(next) => cur = next,
            None => {
                return ReduceOutcome {
                    diagram: cur,
                    steps,
                    fixpoint: true,
                }
            }
        }
    }
    ReduceOutcome {
        diagram: cur,
        steps: max_steps,
        fixpoint: false,
    }
}

/// Default budget for a single `reduce` call.
pub const DEFAULT_STEP_BUDGET: usize = 10_000;
