use std::process::{Command, Output};

use serde_json::Value;

fn pmplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmplab")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

const Z2: &str = r#"{"algebra":{"atoms":["1/2","1/2"]},"k":2,"gens":[[1,0],[1,0]]}"#;

#[test]
fn quotient_and_delta_examples() {
    let out = pmplab(&["gen-quotient", "cyclic:2:1,1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim_end(), Z2);
    let out = pmplab(&["delta", "[2,0,1]", "[2,0,1]"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim_end(), r#"{"delta":"0/1"}"#);
    let out = pmplab(&["delta", "[1,0]", "[0,1]", "--algebra", r#"{"atoms":["1/2","1/2"]}"#]);
    assert_eq!(json(&out)["delta"], "1/1");
}

#[test]
fn exit_codes() {
    assert_eq!(pmplab(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(pmplab(&["dist"]).status.code(), Some(64));
    assert_eq!(pmplab(&["--help"]).status.code(), Some(0));
    let out = pmplab(&["tensor", Z2, r#"{"atoms":["1/2","1/3"]}"#]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "MassNotOne");
    let out = pmplab(&["--k", "3", "refine", Z2, "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "GeneratorCountMismatch");
    let out = pmplab(&["dist", r#"{"atoms":["1"]}"#, "[[0]]", "not json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn emitted_objects_reparse() {
    let q = String::from_utf8(pmplab(&["gen-quotient", "sym:3:1,0,2;1,2,0"]).stdout).unwrap();
    let t = pmplab(&["tensor", q.trim(), r#"{"atoms":["1/3","2/3"]}"#]);
    assert_eq!(t.status.code(), Some(0));
    let t = json(&t);
    assert_eq!(t["algebra"]["atoms"].as_array().unwrap().len(), 12);
    let joint = json(&pmplab(&["joint-quotient", "cyclic:2:1,1", "cyclic:3:1,1"]));
    assert_eq!(joint["group"]["order"], 6);
    let group = joint["group"].to_string();
    let q6 = json(&pmplab(&["gen-quotient", &group]));
    assert_eq!(q6["algebra"]["atoms"].as_array().unwrap().len(), 6);
}

#[test]
fn file_inputs_and_out_flag() {
    let dir = std::env::temp_dir().join(format!("pmplab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let alg = dir.join("alg.json");
    std::fs::write(&alg, r#"{"atoms":["1/4","1/4","1/2"]}"#).unwrap();
    let report = dir.join("report.json");
    let out = pmplab(&[
        "dist",
        alg.to_str().unwrap(),
        r#"[[0],{"members":[1]}]"#,
        "[[1],[1]]",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["d"], "1/2");
    assert_eq!(v["d_P"], "1/2");
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(saved, v);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn audit_commands() {
    let c1 = json(&pmplab(&["audit-c1", Z2, "[[0]]", "[[[0]],[[1]],[[1]]]", "--eps", "1/100"]));
    assert_eq!(c1["report"]["satisfied"], true);
    assert_eq!(c1["report"]["xi"][0]["exact"], "0/1");
    assert_eq!(c1["config"]["metric"], "tv");
    let c2 = json(&pmplab(&["audit-c2", Z2, "[[0]]", "[[[0]],[[1]],[[1]]]", "--eps", "1/100"]));
    assert_eq!(c2["found"], true);
    assert_eq!(c2["witness"]["c"][0]["members"], serde_json::json!([0]));
    assert_eq!(c2["witness"]["distance"]["exact"], "0/1");
    let res = json(&pmplab(&["--metric", "max", "audit-residual", Z2, "[[0]]", "[[[0]],[[1]],[[1]]]"]));
    assert_eq!(res["report"]["residual"]["exact"], "0/1");
    let big = json(&pmplab(&["tensor", Z2, r#"{"atoms":["1/2","1/2"]}"#])).to_string();
    let ec = json(&pmplab(&["audit-ec", Z2, &big, "[[0,1],[2,3]]", "[[0]]", "[[0,2]]", "[[1]]", "--eps", "1/4"]));
    assert_eq!(ec["found"], true);
    assert!(ec["witness"]["refinement_depth"].as_u64().unwrap() <= 2);
}

#[test]
fn constructions_through_the_cli() {
    let m = json(&pmplab(&["match", r#"{"atoms":["1/4","1/4","1/2"]}"#, "[[0]]", "[[1]]"]));
    assert_eq!(m["g"], serde_json::json!([1, 0, 2]));
    let e = json(&pmplab(&["eppa", r#"{"atoms":["1/2","1/2"]}"#, "[[[[0],[1]]]]"]));
    assert_eq!(e["action"]["gens"], serde_json::json!([[1, 0]]));
    let act = r#"{"algebra":{"atoms":["1/4","1/4","1/4","1/4"]},"gens":[[1,0,2,3],[0,1,3,2]]}"#;
    let erg = json(&pmplab(&["ergodize", act]));
    assert_eq!(erg["modifications"].as_array().unwrap().len(), 1);
    let emb = json(&pmplab(&["embed", act]));
    assert_eq!(emb["mode"], "tensor");
    let emb = json(&pmplab(&["embed", Z2]));
    assert_eq!(emb["mode"], "quotient");
    let ind = json(&pmplab(&["indep", r#"{"atoms":["1/4","1/4","1/4","1/4"]}"#, "[]", "[[0,1]]", "[[0,2]]", "--eps", "1/10"]));
    assert_eq!(ind["deficiency"], "0/1");
    assert_eq!(ind["independent"], true);
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let big = json(&pmplab(&["tensor", Z2, r#"{"atoms":["1/3","2/3"]}"#])).to_string();
    let args = ["--seed", "7", "conjsearch", Z2, big.as_str(), "--depth", "2", "--beam", "6"];
    let base = pmplab(&args);
    assert_eq!(base.status.code(), Some(0));
    for threads in ["1", "3"] {
        let again = Command::new(env!("CARGO_BIN_EXE_pmplab"))
            .args(args)
            .env("PMPLAB_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(again.stdout, base.stdout);
    }
    assert_eq!(json(&base)["config"]["seed"], 7);
}
