use proptest::prelude::*;
use zxcliff::circuit::{gate_matrix_product, parse_circuit};
use zxcliff::normal_forms::cc1_contains;
use zxcliff::optimiser::{is_gate_form, line_to_pauli_standard};
use zxcliff::rewrite::{apply_match, find_matches, rewrite_first, rewrite_metric, Trace};
use zxcliff::{
    cc2_contains, circuit_size, default_ruleset, find_path_cover, interpret, is_circuit_like, is_simple, optimise,
    random_clifford_circuit, replay, scalar_free_equal, simple_form, translate, Circuit, Diagram, Gate,
    OptimiserConfig, PauliMetric, ProofTrace,
};

fn same(a: &Circuit, b: &Circuit) -> bool {
    scalar_free_equal(&gate_matrix_product(a).unwrap(), &gate_matrix_product(b).unwrap(), 1e-9).unwrap()
}

fn gate_strategy(width: usize) -> impl Strategy<Value = Gate> {
    let single = (0..5usize, 0..width).prop_map(|(k, q)| match k {
        0 => Gate::S(q),
        1 => Gate::V(q),
        2 => Gate::Z(q),
        3 => Gate::X(q),
        _ => Gate::H(q),
    });
    if width == 1 {
        return single.boxed();
    }
    let pair = (0..width, 1..width).prop_map(move |(c, off)| Gate::Cnot(c, (c + off) % width));
    prop_oneof![single, pair].boxed()
}

fn circuit_strategy(max_width: usize, max_len: usize) -> impl Strategy<Value = Circuit> {
    (1..=max_width).prop_flat_map(move |w| {
        prop::collection::vec(gate_strategy(w), 0..max_len).prop_map(move |g| Circuit::from_gates(w, g).unwrap())
    })
}

#[test]
fn s_four_times_is_empty() {
    let c = parse_circuit("qubits 1\nS 0\nS 0\nS 0\nS 0\n").unwrap();
    let r = optimise(&c, &OptimiserConfig::default()).unwrap();
    assert!(r.circuit.is_empty());
}

#[test]
fn hadamard_squared_is_identity() {
    let c = parse_circuit("qubits 1\nH 0\nH 0\n").unwrap();
    let r = optimise(&c, &OptimiserConfig::default()).unwrap();
    assert_eq!(r.stats.output_size, 0);
}

#[test]
fn cnot_pair_cancels() {
    let c = parse_circuit("qubits 2\nCNOT 0 1\nCNOT 0 1\n").unwrap();
    for fallback in [true, false] {
        let cfg = OptimiserConfig {
            semantic_fallback: fallback,
            ..Default::default()
        };
        assert_eq!(optimise(&c, &cfg).unwrap().stats.output_size, 0);
    }
}

#[test]
fn generator_after_cc2_member_lands_in_cc2() {
    // g∘k for a sample of CC2 members k and every generator g.
    let fam = zxcliff::cc2_family();
    let gens = [
        Gate::S(0),
        Gate::S(1),
        Gate::V(0),
        Gate::V(1),
        Gate::Cnot(0, 1),
        Gate::Cnot(1, 0),
    ];
    let cfg = OptimiserConfig::default();
    for (i, k) in fam.members().iter().enumerate().step_by(997) {
        for g in gens {
            let mut c = k.circuit();
            c.push(g).unwrap();
            let r = optimise(&c, &cfg).unwrap();
            assert!(cc2_contains(&r.diagram), "member {i} then {g}");
            assert!(same(&c, &r.circuit));
        }
    }
}

#[test]
fn pauli_is_moved_before_the_cnot() {
    // A Z on the target after a CNOT is a Z on both wires before it.
    let d = translate(&Circuit::from_gates(2, [Gate::Cnot(0, 1), Gate::Z(1)]).unwrap());
    let rules = default_ruleset();
    let mut t = Trace::new();
    let out = rewrite_metric(rules.cnot_commute(), &d, PauliMetric::of, &mut t).unwrap();
    assert!(PauliMetric::of(&out) < PauliMetric::of(&d));
    assert!(is_gate_form(&out));
    assert!(zxcliff::semantics::diagrams_equal(&d, &out, 1e-9).unwrap());
}

#[test]
fn ambiguous_pauli_copy_match_is_not_taken_by_the_metric() {
    let d = translate(&Circuit::from_gates(3, [Gate::Cnot(1, 2), Gate::Cnot(0, 1), Gate::Z(1)]).unwrap());
    let rules = default_ruleset();
    let rule = rules.cnot_commute().iter().find(|r| r.name == "GreenPiCx").unwrap();
    let results: Vec<Diagram> = find_matches(rule, &d)
        .iter()
        .map(|m| apply_match(rule, &d, m).unwrap())
        .collect();
    assert!(results.iter().any(|r| find_path_cover(r).is_err()));
    assert!(results.iter().any(is_gate_form));
    // Plain first-match rewriting picks a bad one; the metric does not.
    let mut t = Trace::new();
    let first = rewrite_first(std::slice::from_ref(rule), &d, &mut t).unwrap();
    assert!(!is_circuit_like(&simple_form(&first)) || find_path_cover(&first).is_err());
    let chosen = rewrite_metric(std::slice::from_ref(rule), &d, PauliMetric::of, &mut t).unwrap();
    assert!(is_gate_form(&chosen));
}

#[test]
fn traces_are_byte_stable() {
    let c = random_clifford_circuit(3, 20, 77);
    let cfg = OptimiserConfig::default();
    let a = optimise(&c, &cfg).unwrap().trace.to_json();
    let b = optimise(&c, &cfg).unwrap().trace.to_json();
    assert_eq!(a, b);
    let back = ProofTrace::from_json(&a).unwrap();
    let d = replay(&back, default_ruleset()).unwrap();
    assert!(d.iso_equal(&back.final_diagram));
}

#[test]
fn line_graphs_reach_pauli_standard_form() {
    for seed in 0..20 {
        let c = random_clifford_circuit(1, 12, 300 + seed);
        let d = simple_form(&translate(&c));
        let out = line_to_pauli_standard(&d, &mut Trace::new()).unwrap();
        assert!(scalar_free_equal(&interpret(&d).unwrap(), &interpret(&out).unwrap(), 1e-9).unwrap());
        let pc = find_path_cover(&out).unwrap();
        let path = &pc.paths[0];
        let pauli = |v| out.kind(v).phase().is_some_and(|p| p.is_pauli() && !p.is_zero());
        // Paulis only in a prefix of at most two vertices.
        let count = path.iter().filter(|v| pauli(**v)).count();
        let prefix = path[1..].iter().take_while(|v| pauli(**v)).count();
        assert!(count == prefix && count <= 2, "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn optimise_preserves_semantics(c in circuit_strategy(3, 24)) {
        for fallback in [true, false] {
            let cfg = OptimiserConfig { semantic_fallback: fallback, verify_each_step: true, ..Default::default() };
            let r = optimise(&c, &cfg).unwrap();
            prop_assert!(same(&c, &r.circuit));
            prop_assert!(is_circuit_like(&r.diagram));
            let replayed = replay(&r.trace, default_ruleset()).unwrap();
            prop_assert!(replayed.iso_equal(&r.diagram));
            if !fallback {
                // Outputs have no H gates; each H may cost two extra vertices.
                let h = c.gates().iter().filter(|g| matches!(g, Gate::H(_))).count();
                prop_assert!(r.stats.output_size <= r.stats.simple_input_size);
                prop_assert!(r.stats.output_size <= r.stats.input_size + 2 * h);
            }
            match c.width() {
                1 => prop_assert!(cc1_contains(&r.diagram)),
                2 if fallback => prop_assert!(cc2_contains(&r.diagram)),
                _ => {}
            }
        }
    }

    #[test]
    fn simple_form_is_idempotent_and_circuit_like(c in circuit_strategy(4, 30)) {
        let s = simple_form(&translate(&c));
        prop_assert!(is_simple(&s));
        prop_assert!(is_circuit_like(&s));
        prop_assert!(simple_form(&s).iso_equal(&s));
        // H expands to three spiders, so only H-free circuits cannot grow.
        if !c.gates().iter().any(|g| matches!(g, Gate::H(_))) {
            prop_assert!(circuit_size(&s) <= circuit_size(&translate(&c)));
        }
    }

    #[test]
    fn translated_circuits_are_in_gate_form(c in circuit_strategy(4, 30)) {
        prop_assert!(is_gate_form(&translate(&c)));
    }
}
