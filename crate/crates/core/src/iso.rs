//! Isomorphism of framed labelled graphs.
//!
//! Boundaries are pinned positionally, so most of the search is forced by
//! propagation outward from them; closed components fall back to plain
//! backtracking with kind, degree and adjacency-count pruning.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::graph::{Diagram, VertexId};

pub(crate) fn isomorphic(a: &Diagram, b: &Diagram) -> bool {
    if a.num_vertices() != b.num_vertices()
        || a.num_edges() != b.num_edges()
        || a.num_inputs() != b.num_inputs()
        || a.num_outputs() != b.num_outputs()
    {
        return false;
    }
    if kind_histogram(a) != kind_histogram(b) {
        return false;
    }

    let mut forward = BTreeMap::new();
    let mut backward = BTreeMap::new();
    for (x, y) in a
        .inputs()
        .iter()
        .zip(b.inputs())
        .chain(a.outputs().iter().zip(b.outputs()))
    {
        forward.insert(*x, *y);
        backward.insert(*y, *x);
    }
    // Bare wires between boundaries are not seen by the interior search.
    for (x, y) in &forward {
        for (w, k) in a.neighbours(*x) {
            if let Some(w2) = forward.get(&w) {
                if b.multiplicity(*y, *w2) != k {
                    return false;
                }
            }
        }
        if b.degree(*y) != a.degree(*x) {
            return false;
        }
    }

    let order = search_order(a, &forward);
    let mut state = Search {
        a,
        b,
        forward,
        backward,
        order,
    };
    state.extend(0)
}

fn kind_histogram(d: &Diagram) -> BTreeMap<(crate::graph::VertexKind, usize, u32), usize> {
    let mut h = BTreeMap::new();
    for (v, k) in d.vertices() {
        *h.entry((k, d.degree(v), d.self_loops(v))).or_insert(0) += 1;
    }
    h
}

/// Unmapped vertices of `a` in breadth-first order from the mapped ones,
/// then remaining components in id order.
fn search_order(a: &Diagram, mapped: &BTreeMap<VertexId, VertexId>) -> Vec<VertexId> {
    let mut seen: BTreeSet<VertexId> = mapped.keys().copied().collect();
    let mut order = Vec::new();
    let mut queue: VecDeque<VertexId> = mapped.keys().copied().collect();
    let mut roots = a.vertex_ids().collect::<Vec<_>>().into_iter();
    loop {
        while let Some(v) = queue.pop_front() {
            for (u, _) in a.neighbours(v) {
                if seen.insert(u) {
                    order.push(u);
                    queue.push_back(u);
                }
            }
        }
        match roots.find(|v| !seen.contains(v)) {
            Some(r) => {
                seen.insert(r);
                order.push(r);
                queue.push_back(r);
            }
            None => break,
        }
    }
    order
}

struct Search<'d> {
    a: &'d Diagram,
    b: &'d Diagram,
    forward: BTreeMap<VertexId, VertexId>,
    backward: BTreeMap<VertexId, VertexId>,
    order: Vec<VertexId>,
}

impl Search<'_> {
    fn extend(&mut self, depth: usize) -> bool {
        let Some(&v) = self.order.get(depth) else {
            return true;
        };
        for c in self.candidates(v) {
            if !self.consistent(v, c) {
                continue;
            }
            self.forward.insert(v, c);
            self.backward.insert(c, v);
            if self.extend(depth + 1) {
                return true;
            }
            self.forward.remove(&v);
            self.backward.remove(&c);
        }
        false
    }

    fn candidates(&self, v: VertexId) -> Vec<VertexId> {
        let anchor = self
            .a
            .neighbours(v)
            .find_map(|(u, _)| self.forward.get(&u).copied());
        match anchor {
            Some(image) => self
                .b
                .neighbours(image)
                .map(|(c, _)| c)
                .filter(|c| !self.backward.contains_key(c))
                .collect(),
            None => self
                .b
                .vertex_ids()
                .filter(|c| !self.backward.contains_key(c))
                .collect(),
        }
    }

    fn consistent(&self, v: VertexId, c: VertexId) -> bool {
        let (a, b) = (self.a, self.b);
        if a.kind(v) != b.kind(c) || a.degree(v) != b.degree(c) || a.self_loops(v) != b.self_loops(c) {
            return false;
        }
        let mut mapped_a = 0;
        for (u, k) in a.neighbours(v) {
            if let Some(u2) = self.forward.get(&u) {
                if b.multiplicity(c, *u2) != k {
                    return false;
                }
                mapped_a += k;
            }
        }
        let mapped_b: u32 = b
            .neighbours(c)
            .filter(|(u, _)| self.backward.contains_key(u))
            .map(|(_, k)| k)
            .sum();
        mapped_a == mapped_b
    }
}

#[cfg(test)]
mod tests {
    use crate::graph::{Diagram, Phase, VertexKind};

    fn cycle(kinds: &[VertexKind]) -> Diagram {
        let mut d = Diagram::new();
        let vs: Vec<_> = kinds.iter().map(|k| d.add_vertex(*k)).collect();
        for i in 0..vs.len() {
            d.add_edge(vs[i], vs[(i + 1) % vs.len()]);
        }
        d
    }

    #[test]
    fn closed_cycles_are_matched_up_to_rotation() {
        let z = VertexKind::Z(Phase::ZERO);
        let x = VertexKind::X(Phase::ZERO);
        let p = VertexKind::Z(Phase::HALF);
        let a = cycle(&[z, x, p, x]);
        let b = cycle(&[p, x, z, x]);
        assert!(a.iso_equal(&b));
        let c = cycle(&[z, x, z, x]);
        assert!(!a.iso_equal(&c));
    }

    #[test]
    fn boundary_order_matters() {
        let mut a = Diagram::new();
        let i0 = a.add_input();
        let i1 = a.add_input();
        let o0 = a.add_output();
        let o1 = a.add_output();
        let mut crossed = a.clone();
        a.add_edge(i0, o0);
        a.add_edge(i1, o1);
        crossed.add_edge(i0, o1);
        crossed.add_edge(i1, o0);
        assert!(!a.iso_equal(&crossed));
        assert!(crossed.iso_equal(&crossed.clone()));
    }

    #[test]
    fn relabelled_diagram_is_isomorphic() {
        let mut a = Diagram::new();
        let i = a.add_input();
        let z = a.add_vertex(VertexKind::Z(Phase::QUARTER));
        let x = a.add_vertex(VertexKind::X(Phase::ZERO));
        let o = a.add_output();
        a.add_edge(i, z);
        a.add_edges(z, x, 2);
        a.add_edge(x, o);
        a.add_edge(x, x);

        let mut b = Diagram::new();
        let x2 = b.add_vertex(VertexKind::X(Phase::ZERO));
        let o2 = b.add_output();
        let z2 = b.add_vertex(VertexKind::Z(Phase::QUARTER));
        let i2 = b.add_input();
        b.add_edge(x2, x2);
        b.add_edge(x2, o2);
        b.add_edges(x2, z2, 2);
        b.add_edge(z2, i2);
        assert!(a.iso_equal(&b));
        b.remove_edge(x2, z2);
        b.add_edge(z2, z2);
        assert!(!a.iso_equal(&b));
    }
}
