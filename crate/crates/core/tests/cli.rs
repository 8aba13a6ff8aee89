use std::io::Write;
use std::process::{Command, Output};

fn ruban(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ruban"))
        .args(args)
        .env_remove("RUBAN_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap().trim_end().to_string()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

fn temp_file(name: &str, text: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("ruban-cli-{}-{name}", std::process::id()));
    std::fs::File::create(&path).unwrap().write_all(text.as_bytes()).unwrap();
    path
}

#[test]
fn expand_examples() {
    let o = ruban(&["expand", "--prime", "5", "--rational", "1/2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), r#"{"p":5,"quotients":["3","23/5"],"tail":"p-minus-periodic"}"#);

    let o = ruban(&["expand", "--prime", "5", "--sqrt", "-1", "--branch", "a", "--depth", "1", "--json"]);
    assert_eq!(stdout(&o), r#"{"p":5,"quotients":["2"],"tail":"open"}"#);

    let o = ruban(&["expand", "--prime", "5", "--rational", "-5"]);
    assert_eq!(stdout(&o), r#"{"p":5,"quotients":["0"],"tail":"p-minus-periodic"}"#);
}

#[test]
fn emitted_fractions_reparse() {
    let o = ruban(&["expand", "--prime", "7", "--rational", "-123/45", "--convergents"]);
    let v = json(&o);
    for s in v["quotients"].as_array().unwrap() {
        let s = s.as_str().unwrap();
        let x = ruban::fraction::parse_fraction(s).unwrap();
        assert_eq!(ruban::fraction::format_fraction(&x), s);
    }
    let convergents = v["convergents"].as_array().unwrap();
    assert_eq!(convergents.len(), v["quotients"].as_array().unwrap().len());
}

#[test]
fn precondition_failures_exit_2_without_output() {
    for args in [
        &["expand", "--prime", "5", "--sqrt", "4"][..],
        &["expand", "--prime", "4", "--rational", "1"],
        &["expand", "--prime", "5", "--sqrt", "2"],
        &["classify", "--prime", "5", "--rational", "1/0"],
    ] {
        let o = ruban(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    let o = ruban(&["expand", "--prime", "5", "--sqrt", "4"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("perfect square"));
}

#[test]
fn budget_exhaustion_exits_3() {
    let o = ruban(&["expand", "--prime", "5", "--rational", "1/3", "--depth", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());

    let o = Command::new(env!("CARGO_BIN_EXE_ruban"))
        .args(["classify", "--prime", "5", "--rational", "1/3"])
        .env("RUBAN_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    let o = Command::new(env!("CARGO_BIN_EXE_ruban"))
        .args(["classify", "--prime", "5", "--rational", "1/3", "--budget", "100"])
        .env("RUBAN_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn usage_errors_are_nonzero() {
    assert_ne!(ruban(&[]).status.code(), Some(0));
    assert_ne!(ruban(&["expand", "--prime", "5"]).status.code(), Some(0));
    assert_ne!(
        ruban(&["expand", "--prime", "5", "--rational", "1", "--sqrt", "2"]).status.code(),
        Some(0)
    );
    assert_ne!(ruban(&["criterion", "--theorem", "4", "--example", "1", "--prime", "5"]).status.code(), Some(0));
}

#[test]
fn classify_examples() {
    let o = ruban(&["classify", "--prime", "5", "--sqrt", "-1", "--branch", "a"]);
    assert_eq!(
        stdout(&o),
        r#"{"kind":"certified-non-periodic","certificate":{"m":0,"R":"0","Q":"1","Rnext":"2"}}"#
    );
    let o = ruban(&["classify", "--prime", "5", "--rational", "-5"]);
    assert_eq!(stdout(&o), r#"{"kind":"p-minus-periodic","preperiod":["0"]}"#);
    let o = ruban(&["classify", "--prime", "5", "--rational", "3"]);
    assert_eq!(stdout(&o), r#"{"kind":"finite","quotients":["3"]}"#);
}

#[test]
fn height_examples() {
    let spec = temp_file("h1.json", r#"{"p":5,"quotients":["0","24/5"],"tail":{"preperiod":1,"period":1}}"#);
    let o = ruban(&["height", "--prime", "5", "--spec", spec.to_str().unwrap()]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["value"], "-5");
    assert_eq!(v["H"], "5");
    assert_eq!(v["all_hold"], true);

    // the same value written with the all-(p - 1/p) tail
    let spec = temp_file("h2.json", r#"{"p":5,"quotients":["0"],"tail":"p-minus-periodic"}"#);
    let v = json(&ruban(&["height", "--spec", spec.to_str().unwrap()]));
    assert_eq!(v["value"], "-5");

    let bad = temp_file("h3.json", r#"{"p":5,"quotients":["3","24/5"],"tail":{"preperiod":1,"period":1}}"#);
    let o = ruban(&["height", "--spec", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("hypothesis violated"));

    let o = ruban(&["height", "--prime", "7", "--spec", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn height_sweep_holds() {
    let v = json(&ruban(&["height", "--prime", "3", "--sweep", "200", "--seed", "11"]));
    assert_eq!(v["count"], 200);
    assert_eq!(v["all_hold"], true);
    assert_eq!(v["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn criterion_examples() {
    let v = json(&ruban(&["criterion", "--theorem", "1", "--example", "1", "--prime", "5"]));
    assert_eq!((v["B"].as_str(), v["ratio"].as_str(), v["verdict"].as_str()), (Some("1"), Some("2"), Some("criterion-satisfied")));
    let v = json(&ruban(&["criterion", "--theorem", "3", "--example", "2", "--prime", "5"]));
    assert_eq!((v["ratio"].as_str(), v["verdict"].as_str()), (Some("17"), Some("criterion-satisfied")));
    let v = json(&ruban(&["criterion", "--theorem", "3", "--example", "1", "--prime", "5"]));
    assert_eq!((v["ratio"].as_str(), v["verdict"].as_str()), (Some("3"), Some("not-satisfied")));
    let v = json(&ruban(&["criterion", "--theorem", "2", "--example", "1", "--prime", "5", "--A", "5"]));
    assert_eq!((v["Bprime"].as_str(), v["verdict"].as_str()), (Some("3"), Some("not-satisfied")));
    let v = json(&ruban(&["criterion", "--theorem", "1", "--example", "1", "--prime", "5", "--A", "10"]));
    assert_eq!(v["threshold_exact"], false);
}

#[test]
fn criterion_spec_files() {
    let geometric = temp_file(
        "g.json",
        r#"{"p":5,"quotients":["0"],"generator":{"kind":"geometric","n":{"c":"1","g":3},"lambda":{"c":"2","g":3},"blocks":[["24/5"],["1/5"]]}}"#,
    );
    let v = json(&ruban(&["criterion", "--theorem", "1", "--spec", geometric.to_str().unwrap()]));
    assert_eq!(v["verdict"], "criterion-satisfied");
    assert_eq!(v["A"], "5");

    let shallow = temp_file(
        "t.json",
        r#"{"p":5,"quotients":["0"],"generator":{"kind":"tabulated","blocks":[{"n":1,"lambda":2,"contents":["24/5"]},{"n":3,"lambda":6,"contents":["1/5"]}]}}"#,
    );
    let v = json(&ruban(&["criterion", "--theorem", "1", "--spec", shallow.to_str().unwrap(), "--depth", "9"]));
    assert_eq!(v["verdict"], "insufficient-evidence");
    let finite_depth = v["checklist"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["certainty"] == "finite-depth")
        .count();
    assert!(finite_depth > 0);

    let overlapping = temp_file(
        "o.json",
        r#"{"p":5,"quotients":["0"],"generator":{"kind":"tabulated","blocks":[{"n":1,"lambda":3,"contents":["24/5"]},{"n":2,"lambda":1,"contents":["1/5"]}]}}"#,
    );
    let o = ruban(&["criterion", "--theorem", "1", "--spec", overlapping.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("inconsistent"));
}

#[test]
fn telescope_command() {
    let v = json(&ruban(&["telescope", "--example", "1", "--prime", "3", "--max-i", "3"]));
    assert_eq!(v["all_exact"], true);
    assert_eq!(v["entries"].as_array().unwrap().len(), 4);
}

#[test]
fn output_is_deterministic() {
    let cases: [&[&str]; 4] = [
        &["height", "--prime", "5", "--sweep", "50", "--seed", "3"],
        &["expand", "--prime", "3", "--sqrt", "7", "--depth", "12", "--convergents"],
        &["criterion", "--theorem", "2", "--example", "2", "--prime", "7"],
        &["classify", "--prime", "2", "--sqrt", "-7", "--branch", "b"],
    ];
    for args in cases {
        let a = ruban(args);
        let b = ruban(args);
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let a = ruban(&["height", "--prime", "5", "--sweep", "50", "--seed", "3"]);
    let b = ruban(&["height", "--prime", "5", "--sweep", "50", "--seed", "4"]);
    assert_ne!(a.stdout, b.stdout);
}
