//! Regenerates `rules/v1` and `src/shipped_rules.rs`.
//!
//! Right-hand sides marked `?` are found by a cheapest-first search over
//! two-qubit gate lines, checked with the semantics oracle.

use std::collections::{BTreeMap, BinaryHeap, HashSet};
use std::cmp::Reverse;
use std::fmt::Write as _;
use std::path::Path;

use zxcliff::circuit::{circuit_size, gate_matrix_product};
use zxcliff::normal_forms::matrix_key;
use zxcliff::ruleset::{line_circuit, line_diagram, line_rule};

const RULES: &[(&str, &str, usize, &str, &str)] = &[
    ("init", "GreenMinus", 1, "z3 0", "z2 0; z1 0"),
    ("init", "RedMinus", 1, "x3 0", "x2 0; x1 0"),
    ("init", "AlwaysH", 1, "h 0", "z1 0; x1 0; z1 0"),
    ("always", "GreenPi", 1, "z2 0; z2 0", ""),
    ("always", "GreenPi2", 1, "z2 0; x2 0; z2 0", "x2 0"),
    ("always", "GreenPlus", 1, "z1 0; z1 0", "z2 0"),
    ("always", "RedPi", 1, "x2 0; x2 0", ""),
    ("always", "RedPi2", 1, "x2 0; z2 0; x2 0", "z2 0"),
    ("always", "Euler", 1, "z1 0; x1 0; z1 0; x1 0", "?"),
    ("always", "RedPlus", 1, "x1 0; x1 0", "x2 0"),
    ("always", "Cx", 2, "cx 0 1; cx 0 1", ""),
    ("always", "CxSw", 2, "cx 0 1; cx 1 0; cx 0 1", "swap 0 1"),
    ("always", "C2Plus2Bit", 2, "cx 0 1; x1 0; z1 0; z1 1; x1 1; cx 1 0", "?"),
    ("euler", "H", 1, "z1 0; x1 0; z1 0", "x1 0; z1 0; x1 0"),
    ("pauli_commute", "GreenPiCommute", 1, "x1 0; z2 0", "z2 0; x2 0; x1 0"),
    ("pauli_commute", "RedPiCommute", 1, "z1 0; x2 0", "x2 0; z2 0; z1 0"),
    ("pauli_commute", "GreenCommute", 1, "z1 0; z2 0", "z2 0; z1 0"),
    ("pauli_commute", "RedCommute", 1, "x1 0; x2 0", "x2 0; x1 0"),
    ("cnot_commute", "GreenCxCommute", 2, "cx 0 1; z2 0", "z2 0; cx 0 1"),
    ("cnot_commute", "GreenPiCx", 2, "cx 0 1; z2 1", "z2 0; z2 1; cx 0 1"),
    ("cnot_commute", "RedPiCx", 2, "cx 0 1; x2 0", "x2 0; x2 1; cx 0 1"),
    ("cnot_commute", "RedCxCommute", 2, "cx 0 1; x2 1", "x2 1; cx 0 1"),
    ("c2", "C2GreenCxCommute", 2, "cx 0 1; z1 0", "z1 0; cx 0 1"),
    ("c2", "C2RedCxCommute", 2, "cx 0 1; x1 1", "x1 1; cx 0 1"),
    ("c2", "CxCommute", 3, "cx 0 1; cx 0 2", "cx 0 2; cx 0 1"),
];

fn alphabet(width: usize) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    for w in 0..width {
        for s in ["z2", "x2", "z1", "x1"] {
            out.push((format!("{s} {w}"), 1));
        }
    }
    for c in 0..width {
        for t in 0..width {
            if c != t {
                out.push((format!("cx {c} {t}"), 2));
            }
        }
    }
    out
}

fn key(width: usize, line: &str) -> Vec<i64> {
    matrix_key(&gate_matrix_product(&line_circuit(width, line).unwrap()).unwrap(), 9)
}

/// Cheapest gate line (optionally ending in a swap) equal to `lhs`.
fn search(width: usize, lhs: &str, allow_equal: bool) -> Option<String> {
    let target = key(width, lhs);
    let bound = circuit_size(&line_diagram(width, lhs).unwrap());
    let letters = alphabet(width);
    let mut heap = BinaryHeap::from([Reverse((0usize, String::new()))]);
    let mut seen = HashSet::new();
    while let Some(Reverse((cost, line))) = heap.pop() {
        if cost > bound || (cost == bound && !allow_equal) {
            return None;
        }
        let k = key(width, &line);
        if !seen.insert(k.clone()) {
            continue;
        }
        let tails = if width == 2 { vec!["", "swap 0 1"] } else { vec![""] };
        for tail in tails {
            let full = [line.as_str(), tail].iter().filter(|s| !s.is_empty()).cloned().collect::<Vec<_>>().join("; ");
            if key(width, &full) == target && full.matches("cx").count() < lhs.matches("cx").count().max(1) + usize::from(!allow_equal) {
                return Some(full);
            }
        }
        for (l, c) in &letters {
            let next = if line.is_empty() { l.clone() } else { format!("{line}; {l}") };
            heap.push(Reverse((cost + c, next)));
        }
    }
    None
}

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let out = root.join("rules/v1");
    let _ = std::fs::remove_dir_all(&out);
    let mut counters: BTreeMap<&str, usize> = BTreeMap::new();
    let mut manifest = String::from(
        "// Generated by `cargo run --example gen_rules`; do not edit by hand.\nconst SHIPPED: &[(&str, &str, &str)] = &[\n",
    );
    for (group, name, width, lhs, rhs) in RULES {
        let rhs = if *rhs == "?" {
            match search(*width, lhs, false).or_else(|| search(*width, lhs, true)) {
                Some(found) => found,
                None => {
                    println!("{name}: no smaller equivalent, skipped");
                    continue;
                }
            }
        } else {
            rhs.to_string()
        };
        let rule = line_rule(name, *width, lhs, &rhs).unwrap();
        assert!(rule.is_sound().unwrap(), "{name} unsound");
        println!("{group:14} {name:18} [{lhs}] -> [{rhs}]");
        let n = counters.entry(group).or_insert(0);
        *n += 1;
        let file = format!("{:02}_{name}.json", n);
        let dir = out.join(group);
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join(&file), rule.to_json() + "\n").unwrap();
        let _ = writeln!(
            manifest,
            "    (\"{group}\", \"{file}\", include_str!(\"../rules/v1/{group}/{file}\")),"
        );
    }
    manifest.push_str("];\n");
    std::fs::write(root.join("src/shipped_rules.rs"), manifest).unwrap();
}
