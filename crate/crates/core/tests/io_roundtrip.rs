use cavsim::io::{emit, parse_config, run, sidecar_path, Format, RunConfig};

const TWO_QUBIT: &str = "\
# two qubits, asymmetric couplings
mode = twoqubit
kappa = 0.5
j = 0.5
j_b = 1.0
gamma2 = 0.01
alpha = 0.57735026918962573
beta = 0.81649658092772603
t_end = 20
n = 201
";

#[test]
fn result_json_reproduces_its_own_run() {
    let cfg = parse_config(TWO_QUBIT).unwrap();
    let first = run(&cfg).unwrap();
    let replayed = RunConfig::from_text(&first.to_json()).unwrap();
    let second = run(&replayed).unwrap();
    assert_eq!(first.to_csv(), second.to_csv());
}

#[test]
fn csv_values_survive_a_text_round_trip() {
    let cfg = parse_config(TWO_QUBIT).unwrap();
    let table = run(&cfg).unwrap();
    let csv = table.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("gamma_t,concurrence"));
    for (line, row) in lines.zip(&table.rows) {
        let parsed: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let expected: Vec<f64> = row
            .iter()
            .map(|c| serde_json::to_value(c).unwrap().as_f64().unwrap())
            .collect();
        assert_eq!(parsed, expected);
    }
}

#[test]
fn emitted_csv_carries_a_metadata_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/out.csv");
    let cfg = parse_config("mode = coherence\nkappa = 0.4\nj = 1\nt_end = 2\nn = 5").unwrap();
    let written = emit(&run(&cfg).unwrap(), Format::Csv, &path).unwrap();
    assert_eq!(written, vec![path.clone(), sidecar_path(&path)]);
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(sidecar_path(&path)).unwrap()).unwrap();
    assert_eq!(meta["meta"]["generator"], "cavsim");
    assert_eq!(meta["meta"]["config"]["kappa"], 0.4);
}

#[test]
fn equivalent_config_syntaxes_agree() {
    let lines = parse_config("mode = coherence\nkappa = 0.24\nj = 2\nt_end = 3\nn = 7").unwrap();
    let flow = parse_config("{mode: coherence, kappa: 0.24, j: 2, t_end: 3, n: 7}").unwrap();
    let json = parse_config(r#"{"mode": "coherence", "kappa": 0.24, "j": 2, "t_end": 3, "n": 7}"#).unwrap();
    let a = run(&lines).unwrap().to_csv();
    assert_eq!(a, run(&flow).unwrap().to_csv());
    assert_eq!(a, run(&json).unwrap().to_csv());
}
