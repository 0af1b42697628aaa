// Generated by `cargo run --example gen_rules`; do not edit by hand.
const SHIPPED: &[(&str, &str, &str)] = &[
    ("init", "01_GreenMinus.json", include_str!("../rules/v1/init/01_GreenMinus.json")),
    ("init", "02_RedMinus.json", include_str!("../rules/v1/init/02_RedMinus.json")),
    ("init", "03_AlwaysH.json", include_str!("../rules/v1/init/03_AlwaysH.json")),
    ("always", "01_GreenPi.json", include_str!("../rules/v1/always/01_GreenPi.json")),
    ("always", "02_GreenPi2.json", include_str!("../rules/v1/always/02_GreenPi2.json")),
    ("always", "03_GreenPlus.json", include_str!("../rules/v1/always/03_GreenPlus.json")),
    ("always", "04_RedPi.json", include_str!("../rules/v1/always/04_RedPi.json")),
    ("always", "05_RedPi2.json", include_str!("../rules/v1/always/05_RedPi2.json")),
    ("always", "06_Euler.json", include_str!("../rules/v1/always/06_Euler.json")),
    ("always", "07_RedPlus.json", include_str!("../rules/v1/always/07_RedPlus.json")),
    ("always", "08_Cx.json", include_str!("../rules/v1/always/08_Cx.json")),
    ("always", "09_CxSw.json", include_str!("../rules/v1/always/09_CxSw.json")),
    ("always", "10_C2Plus2Bit.json", include_str!("../rules/v1/always/10_C2Plus2Bit.json")),
    ("euler", "01_H.json", include_str!("../rules/v1/euler/01_H.json")),
    ("pauli_commute", "01_GreenPiCommute.json", include_str!("../rules/v1/pauli_commute/01_GreenPiCommute.json")),
    ("pauli_commute", "02_RedPiCommute.json", include_str!("../rules/v1/pauli_commute/02_RedPiCommute.json")),
    ("pauli_commute", "03_GreenCommute.json", include_str!("../rules/v1/pauli_commute/03_GreenCommute.json")),
    ("pauli_commute", "04_RedCommute.json", include_str!("../rules/v1/pauli_commute/04_RedCommute.json")),
    ("cnot_commute", "01_GreenCxCommute.json", include_str!("../rules/v1/cnot_commute/01_GreenCxCommute.json")),
    ("cnot_commute", "02_GreenPiCx.json", include_str!("../rules/v1/cnot_commute/02_GreenPiCx.json")),
    ("cnot_commute", "03_RedPiCx.json", include_str!("../rules/v1/cnot_commute/03_RedPiCx.json")),
    ("cnot_commute", "04_RedCxCommute.json", include_str!("../rules/v1/cnot_commute/04_RedCxCommute.json")),
    ("c2", "01_C2GreenCxCommute.json", include_str!("../rules/v1/c2/01_C2GreenCxCommute.json")),
    ("c2", "02_C2RedCxCommute.json", include_str!("../rules/v1/c2/02_C2RedCxCommute.json")),
    ("c2", "03_CxCommute.json", include_str!("../rules/v1/c2/03_CxCommute.json")),
];
