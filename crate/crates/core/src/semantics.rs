//! Dense matrix interpretation of diagrams, compared up to a nonzero scalar.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::graph::{Diagram, VertexKind};

pub type C64 = Complex64;

/// Default tolerance for scalar-free comparison.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemanticsError {
    #[error("diagram has {wires} open wires on one side, above the bound of {bound}")]
    SemanticsSizeError { wires: usize, bound: usize },
    #[error("contraction needs a rank-{rank} intermediate, above the bound of {bound}")]
    ContractionTooLarge { rank: usize, bound: usize },
    #[error("shape mismatch: {0}x{1} vs {2}x{3}")]
    ShapeError(usize, usize, usize, usize),
}

/// Limits for the dense oracle.
#[derive(Clone, Copy, Debug)]
pub struct SemanticsConfig {
    /// Maximum number of inputs (and of outputs).
    pub max_qubits: usize,
    /// Maximum rank of any intermediate tensor.
    pub max_rank: usize,
}

impl Default for SemanticsConfig {
    fn default() -> Self {
        SemanticsConfig {
            max_qubits: 10,
            max_rank: 24,
        }
    }
}

/// Dense complex matrix whose equality is taken up to a nonzero scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarFreeMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ScalarFreeMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ScalarFreeMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Row-major construction; panics if the length is wrong.
    pub fn from_rows(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has the wrong length");
        ScalarFreeMatrix { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        Self::from_rows(rows, cols, data.iter().map(|x| C64::new(*x, 0.0)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn scaled(&self, z: C64) -> Self {
        ScalarFreeMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * z).collect(),
        }
    }

    /// `self · rhs`.
    pub fn mul(&self, rhs: &ScalarFreeMatrix) -> ScalarFreeMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }

    pub fn kron(&self, rhs: &ScalarFreeMatrix) -> ScalarFreeMatrix {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out.data[(i * rhs.rows + k) * cols + j * rhs.cols + l] = a * rhs.get(k, l);
                    }
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> ScalarFreeMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Index of the first entry of (near) maximal magnitude.
    fn pivot(&self) -> usize {
        let max = self.max_abs();
        self.data
            .iter()
            .position(|x| x.norm() >= max * (1.0 - 1e-9))
            .unwrap_or(0)
    }

    /// Divide by the first max-magnitude entry so that it becomes 1.
    pub fn normalised(&self) -> ScalarFreeMatrix {
        if self.max_abs() == 0.0 {
            return self.clone();
        }
        let p = self.data[self.pivot()];
        self.scaled(p.inv())
    }

    /// Row-major complex list, for debugging output.
    pub fn to_row_major(&self) -> Vec<(f64, f64)> {
        self.data.iter().map(|x| (x.re, x.im)).collect()
    }
}

impl fmt::Display for ScalarFreeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| {
                    let x = self.get(r, c);
                    format!("{:+.4}{:+.4}i", x.re, x.im)
                })
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// True iff `b = z·a` for some nonzero `z`, to within `tol` relative to `‖b‖∞`.
pub fn scalar_free_equal(
    a: &ScalarFreeMatrix,
    b: &ScalarFreeMatrix,
    tol: f64,
) -> Result<bool, SemanticsError> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(SemanticsError::ShapeError(a.rows, a.cols, b.rows, b.cols));
    }
    let i = a.pivot();
    let a_max = a.data.get(i).map_or(0.0, |x| x.norm());
    let b_max = b.max_abs();
    if a_max < tol {
        return Ok(b_max < tol);
    }
    let z = b.data[i] / a.data[i];
    if z.norm() < tol {
        return Ok(false);
    }
    let bound = tol * b_max.max(1.0);
    Ok(a
        .data
        .iter()
        .zip(&b.data)
        .all(|(x, y)| (y - z * x).norm() <= bound))
}

/// Dense tensor over binary indices; `labels[0]` is the most significant bit.
#[derive(Clone, Debug)]
struct Tensor {
    labels: Vec<usize>,
    data: Vec<C64>,
}

impl Tensor {
    fn scalar(x: C64) -> Self {
        Tensor {
            labels: Vec::new(),
            data: vec![x],
        }
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Build from a leg list that may repeat a label (self-loops): the
    /// entry function sees leg values, repeated legs share one bit, and
    /// repeated labels are then summed out.
    fn from_legs(legs: &[usize], entry: impl Fn(&[u8]) -> C64) -> Tensor {
        let mut distinct: Vec<usize> = Vec::new();
        for l in legs {
            if !distinct.contains(l) {
                distinct.push(*l);
            }
        }
        let pos: Vec<usize> = legs
            .iter()
            .map(|l| distinct.iter().position(|d| d == l).unwrap())
            .collect();
        let n = distinct.len();
        let mut bits = vec![0u8; legs.len()];
        let data = (0..1usize << n)
            .map(|idx| {
                for (k, p) in pos.iter().enumerate() {
                    bits[k] = ((idx >> (n - 1 - p)) & 1) as u8;
                }
                entry(&bits)
            })
            .collect();
        let mut t = Tensor {
            labels: distinct,
            data,
        };
        let looped: Vec<usize> = t
            .labels
            .iter()
            .copied()
            .filter(|l| legs.iter().filter(|x| *x == l).count() > 1)
            .collect();
        for l in looped {
            t = t.sum_out(l);
        }
        // Entries are O(1); anything at round-off level is an exact zero.
        for x in t.data.iter_mut() {
            if x.norm() < 1e-12 {
                *x = C64::new(0.0, 0.0);
            }
        }
        t
    }

    fn sum_out(&self, label: usize) -> Tensor {
        let n = self.labels.len();
        let p = self.labels.iter().position(|l| *l == label).unwrap();
        let shift = n - 1 - p;
        let labels: Vec<usize> = self.labels.iter().copied().filter(|l| *l != label).collect();
        let mut data = vec![C64::new(0.0, 0.0); 1 << (n - 1)];
        for (idx, x) in self.data.iter().enumerate() {
            let high = (idx >> (shift + 1)) << shift;
            let low = idx & ((1 << shift) - 1);
            data[high | low] += x;
        }
        Tensor { labels, data }
    }

    /// Contract every shared label of `self` and `other`.
    fn contract(&self, other: &Tensor) -> Tensor {
        let shared: Vec<usize> = self
            .labels
            .iter()
            .copied()
            .filter(|l| other.labels.contains(l))
            .collect();
        let mut labels: Vec<usize> = self
            .labels
            .iter()
            .copied()
            .filter(|l| !shared.contains(l))
            .collect();
        labels.extend(other.labels.iter().copied().filter(|l| !shared.contains(l)));

        let weight = |t: &Tensor, l: usize| -> usize {
            let n = t.labels.len();
            t.labels
                .iter()
                .position(|x| *x == l)
                .map_or(0, |p| 1 << (n - 1 - p))
        };
        let nr = labels.len();
        let ns = shared.len();
        let res_w: Vec<(usize, usize)> = labels.iter().map(|l| (weight(self, *l), weight(other, *l))).collect();
        let sh_w: Vec<(usize, usize)> = shared.iter().map(|l| (weight(self, *l), weight(other, *l))).collect();

        let shared_offsets: Vec<(usize, usize)> = (0..1usize << ns)
            .map(|s| {
                let mut ia = 0;
                let mut ib = 0;
                for (k, (wa, wb)) in sh_w.iter().enumerate() {
                    if (s >> (ns - 1 - k)) & 1 == 1 {
                        ia += wa;
                        ib += wb;
                    }
                }
                (ia, ib)
            })
            .collect();

        let mut data = vec![C64::new(0.0, 0.0); 1 << nr];
        for (r, out) in data.iter_mut().enumerate() {
            let mut ia = 0;
            let mut ib = 0;
            for (k, (wa, wb)) in res_w.iter().enumerate() {
                if (r >> (nr - 1 - k)) & 1 == 1 {
                    ia += wa;
                    ib += wb;
                }
            }
            let mut acc = C64::new(0.0, 0.0);
            for (sa, sb) in &shared_offsets {
                acc += self.data[ia + sa] * other.data[ib + sb];
            }
            *out = acc;
        }
        Tensor { labels, data }
    }
}

fn spider_entry(colour_is_z: bool, phase: f64) -> impl Fn(&[u8]) -> C64 {
    let e = C64::from_polar(1.0, phase);
    move |bits: &[u8]| {
        if colour_is_z {
            if bits.iter().all(|b| *b == 0) {
                C64::new(1.0, 0.0) + if bits.is_empty() { e } else { C64::new(0.0, 0.0) }
            } else if bits.iter().all(|b| *b == 1) {
                e
            } else {
                C64::new(0.0, 0.0)
            }
        } else {
            let parity = bits.iter().filter(|b| **b == 1).count() % 2;
            let sign = if parity == 0 { 1.0 } else { -1.0 };
            C64::new(1.0, 0.0) + e * sign
        }
    }
}

/// Interpret a diagram as a `2^outputs × 2^inputs` matrix, normalised so its
/// first largest entry is 1 (or exactly zero).
pub fn interpret(d: &Diagram) -> Result<ScalarFreeMatrix, SemanticsError> {
    interpret_with(d, &SemanticsConfig::default())
}

pub fn interpret_with(d: &Diagram, cfg: &SemanticsConfig) -> Result<ScalarFreeMatrix, SemanticsError> {
    let wires = d.num_inputs().max(d.num_outputs());
    if wires > cfg.max_qubits {
        return Err(SemanticsError::SemanticsSizeError {
            wires,
            bound: cfg.max_qubits,
        });
    }

    // One label per edge copy, then one free label per boundary vertex.
    let mut legs: BTreeMap<crate::graph::VertexId, Vec<usize>> = BTreeMap::new();
    let mut next = 0usize;
    for (a, b, k) in d.edges() {
        for _ in 0..k {
            legs.entry(a).or_default().push(next);
            legs.entry(b).or_default().push(next);
            next += 1;
        }
    }
    let mut free = BTreeMap::new();
    let mut tensors = Vec::new();
    for (v, kind) in d.vertices() {
        let vlegs = legs.remove(&v).unwrap_or_default();
        let t = match kind {
            VertexKind::Z(p) => Tensor::from_legs(&vlegs, spider_entry(true, p.radians())),
            VertexKind::X(p) => Tensor::from_legs(&vlegs, spider_entry(false, p.radians())),
            VertexKind::H => Tensor::from_legs(&vlegs, |bits: &[u8]| {
                if bits.iter().all(|b| *b == 1) && !bits.is_empty() {
                    C64::new(-1.0, 0.0)
                } else {
                    C64::new(1.0, 0.0)
                }
            }),
            VertexKind::Boundary => {
                let f = next;
                next += 1;
                free.insert(v, f);
                let mut all = vec![f];
                all.extend(vlegs);
                Tensor::from_legs(&all, |bits: &[u8]| {
                    if bits.iter().all(|b| *b == bits[0]) {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
            }
        };
        tensors.push(t);
    }

    let mut result = contract_network(tensors, cfg)?;
    let order: Vec<usize> = d
        .outputs()
        .iter()
        .chain(d.inputs())
        .map(|v| free[v])
        .collect();
    result = permute(&result, &order);
    let rows = 1usize << d.num_outputs();
    let cols = 1usize << d.num_inputs();
    let m = ScalarFreeMatrix::from_rows(rows, cols, result.data);
    Ok(m.normalised())
}

/// Greedy pairwise contraction: always contract the connected pair whose
/// result has the smallest rank; disconnected pieces are joined last.
fn contract_network(mut tensors: Vec<Tensor>, cfg: &SemanticsConfig) -> Result<Tensor, SemanticsError> {
    if tensors.is_empty() {
        return Ok(Tensor::scalar(C64::new(1.0, 0.0)));
    }
    loop {
        if tensors.len() == 1 {
            return Ok(tensors.pop().unwrap());
        }
        let mut owners: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, t) in tensors.iter().enumerate() {
            for l in &t.labels {
                owners.entry(*l).or_default().push(i);
            }
        }
        let mut best: Option<(usize, usize, usize)> = None;
        for own in owners.values() {
            if own.len() != 2 {
                continue;
            }
            let (i, j) = (own[0].min(own[1]), own[0].max(own[1]));
            let shared = tensors[i]
                .labels
                .iter()
                .filter(|l| tensors[j].labels.contains(l))
                .count();
            let rank = tensors[i].labels.len() + tensors[j].labels.len() - 2 * shared;
            if best.is_none_or(|(r, bi, bj)| (rank, i, j) < (r, bi, bj)) {
                best = Some((rank, i, j));
            }
        }
        let (rank, i, j) = match best {
            Some(b) => b,
            None => {
                // No shared labels left: outer product of the two smallest.
                let mut idx: Vec<usize> = (0..tensors.len()).collect();
                idx.sort_by_key(|k| (tensors[*k].labels.len(), *k));
                let (i, j) = (idx[0].min(idx[1]), idx[0].max(idx[1]));
                (tensors[i].labels.len() + tensors[j].labels.len(), i, j)
            }
        };
        if rank > cfg.max_rank {
            return Err(SemanticsError::ContractionTooLarge {
                rank,
                bound: cfg.max_rank,
            });
        }
        let b = tensors.swap_remove(j);
        let a = tensors.swap_remove(i);
        let scale = a.max_abs() * b.max_abs();
        let mut c = a.contract(&b);
        // Rescale to keep magnitudes near 1; cancellation to round-off is exact zero.
        let shared = (a.labels.len() + b.labels.len() - c.labels.len()) / 2;
        let m = c.max_abs();
        if m <= 1e-10 * scale * (1u64 << shared) as f64 || m == 0.0 {
            c.data.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        } else {
            let inv = 1.0 / m;
            c.data.iter_mut().for_each(|x| *x *= inv);
        }
        tensors.push(c);
    }
}

fn permute(t: &Tensor, order: &[usize]) -> Tensor {
    let n = t.labels.len();
    debug_assert_eq!(n, order.len());
    let weights: Vec<usize> = order
        .iter()
        .map(|l| {
            let p = t.labels.iter().position(|x| x == l).expect("free label missing");
            1 << (n - 1 - p)
        })
        .collect();
    let data = (0..1usize << n)
        .map(|idx| {
            let mut src = 0;
            for (k, w) in weights.iter().enumerate() {
                if (idx >> (n - 1 - k)) & 1 == 1 {
                    src += w;
                }
            }
            t.data[src]
        })
        .collect();
    Tensor {
        labels: order.to_vec(),
        data,
    }
}

/// Scalar-free equality of two diagrams' interpretations.
pub fn diagrams_equal(a: &Diagram, b: &Diagram, tol: f64) -> Result<bool, SemanticsError> {
    scalar_free_equal(&interpret(a)?, &interpret(b)?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Phase, VertexKind};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn single(kind: VertexKind) -> Diagram {
        let mut d = Diagram::new();
        let i = d.add_input();
        let v = d.add_vertex(kind);
        let o = d.add_output();
        d.add_edge(i, v);
        d.add_edge(v, o);
        d
    }

    fn cnot() -> Diagram {
        let mut d = Diagram::new();
        let i0 = d.add_input();
        let i1 = d.add_input();
        let z = d.add_vertex(VertexKind::Z(Phase::ZERO));
        let x = d.add_vertex(VertexKind::X(Phase::ZERO));
        let o0 = d.add_output();
        let o1 = d.add_output();
        d.add_edge(i0, z);
        d.add_edge(z, o0);
        d.add_edge(i1, x);
        d.add_edge(x, o1);
        d.add_edge(z, x);
        d
    }

    #[test]
    fn identity_wire_is_identity() {
        let m = interpret(&Diagram::identity_wire()).unwrap();
        assert!(scalar_free_equal(&m, &ScalarFreeMatrix::identity(2), 1e-12).unwrap());
    }

    #[test]
    fn hadamard_box_matches_hadamard() {
        let m = interpret(&single(VertexKind::H)).unwrap();
        let h = ScalarFreeMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        assert!(scalar_free_equal(&m, &h, 1e-12).unwrap());
    }

    #[test]
    fn quarter_spiders_match_s_and_v() {
        let s = ScalarFreeMatrix::from_rows(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)]);
        let z = interpret(&single(VertexKind::Z(Phase::QUARTER))).unwrap();
        assert!(scalar_free_equal(&z, &s, 1e-12).unwrap());
        let w = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let v = ScalarFreeMatrix::from_rows(2, 2, vec![w, w.conj(), w.conj(), w]);
        let x = interpret(&single(VertexKind::X(Phase::QUARTER))).unwrap();
        assert!(scalar_free_equal(&x, &v, 1e-12).unwrap());
    }

    #[test]
    fn cnot_diagram_is_cnot() {
        let m = interpret(&cnot()).unwrap();
        let want = ScalarFreeMatrix::from_real(
            4,
            4,
            &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.],
        );
        assert!(scalar_free_equal(&m, &want, 1e-12).unwrap());
    }

    #[test]
    fn scalar_multiples_are_equal() {
        let m = ScalarFreeMatrix::from_rows(2, 2, vec![c(1., 2.), c(0., 0.), c(-3., 0.5), c(0., 1.)]);
        let z = c(0.0, 3.7);
        assert!(scalar_free_equal(&m, &m.scaled(z), 1e-9).unwrap());
        assert!(scalar_free_equal(&m.scaled(z), &m, 1e-9).unwrap());
    }

    #[test]
    fn zero_matrices() {
        let z = ScalarFreeMatrix::zeros(2, 2);
        let i = ScalarFreeMatrix::identity(2);
        assert!(scalar_free_equal(&z, &z, 1e-9).unwrap());
        assert!(!scalar_free_equal(&z, &i, 1e-9).unwrap());
        assert!(!scalar_free_equal(&i, &z, 1e-9).unwrap());
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = ScalarFreeMatrix::identity(2);
        let b = ScalarFreeMatrix::identity(4);
        assert!(matches!(scalar_free_equal(&a, &b, 1e-9), Err(SemanticsError::ShapeError(..))));
    }

    #[test]
    fn pauli_x_spider_without_legs_is_zero() {
        let mut d = Diagram::new();
        d.add_vertex(VertexKind::X(Phase::HALF));
        let m = interpret(&d).unwrap();
        assert_eq!(m.max_abs(), 0.0);
    }

    #[test]
    fn hadamard_self_loop_is_zero_and_plain_loop_is_not() {
        let mut d = Diagram::new();
        let h = d.add_vertex(VertexKind::H);
        d.add_edge(h, h);
        assert_eq!(interpret(&d).unwrap().max_abs(), 0.0);

        let mut d = single(VertexKind::X(Phase::QUARTER));
        let x = d.interior().next().unwrap();
        d.add_edge(x, x);
        let plain = interpret(&single(VertexKind::X(Phase::QUARTER))).unwrap();
        assert!(scalar_free_equal(&interpret(&d).unwrap(), &plain, 1e-12).unwrap());
    }

    #[test]
    fn size_bound_is_enforced() {
        let cfg = SemanticsConfig {
            max_qubits: 1,
            max_rank: 24,
        };
        assert!(matches!(
            interpret_with(&cnot(), &cfg),
            Err(SemanticsError::SemanticsSizeError { wires: 2, bound: 1 })
        ));
    }

    #[test]
    fn crossing_is_swap() {
        let mut d = Diagram::new();
        let i0 = d.add_input();
        let i1 = d.add_input();
        let o0 = d.add_output();
        let o1 = d.add_output();
        d.add_edge(i0, o1);
        d.add_edge(i1, o0);
        let swap = ScalarFreeMatrix::from_real(
            4,
            4,
            &[1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.],
        );
        assert!(scalar_free_equal(&interpret(&d).unwrap(), &swap, 1e-12).unwrap());
    }
}
