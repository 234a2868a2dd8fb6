use std::path::PathBuf;
use std::process::{Command, Output};

use icdof_core::RationalDist;
use serde_json::Value;

fn input(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("inputs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn icdof(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_icdof"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn ok(args: &[&str]) -> Value {
    let out = icdof(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    json(&out)
}

fn fails(args: &[&str], code: &str) -> Value {
    let out = icdof(args);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["code"], code);
    assert!(v["message"].is_string());
    v
}

fn num(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn hlambda_on_the_four_point_pair() {
    let p = input("prop4.json");
    let v = ok(&["hlambda", "--lambda", "-1", "--u", &p, "--v", &p]);
    assert!((num(&v["bound"]) - 1.13258).abs() < 5e-6);
    assert_eq!(v["lambda"], "-1");
}

#[test]
fn floor_values() {
    let v = ok(&["bound-floor", "--k", "3", "--d", "3", "--n", "4"]);
    assert_eq!(num(&v["floor"]), -2.625);
    assert_eq!(num(&v["per_user_floor"]), -0.875);
    let v = ok(&["bound-floor", "--k", "3", "--d", "1", "--n", "2"]);
    assert_eq!(num(&v["floor"]), -9.0);
    let v = ok(&["bound-floor", "--k", "2", "--d", "5", "--n", "2^1000"]);
    assert!((num(&v["floor"]) - 2.0 / 3.0).abs() < 1e-11);
    assert_eq!(v["params"]["N"].as_str().unwrap().len(), 302);
}

#[test]
fn condition_violation_is_a_result() {
    let v = ok(&["condition", "--matrix", &input("rational3.json"), "--degree", "1"]);
    assert_eq!(v["status"], "violated");
    let w = &v["witness"];
    assert_eq!(w["family"], "monomial");
    let coeffs: Vec<&str> = w["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["coefficient"].as_str().unwrap())
        .collect();
    assert_eq!(coeffs, ["3", "-1"]);

    let v = ok(&["condition", "--matrix", &input("generic3.json"), "--degree", "2"]);
    assert_eq!(v["status"], "holds-up-to-bound");
    assert!(v["witness"].is_null());
}

#[test]
fn certified_bounds() {
    let v = ok(&["bound-thm1", "--k", "3", "--d", "1", "--n", "2"]);
    assert!((num(&v["bound"]) - 3.0 / 28.0).abs() < 1e-11);
    assert_eq!(v["caveat"], "non-exceptional-r");
    for s in v["decomposition"].as_array().unwrap() {
        assert_eq!(s["factorizes"], true);
    }
    let v = fails(
        &["bound-thm1", "--matrix", &input("rational3.json"), "--d", "1", "--n", "2"],
        "condition-violated",
    );
    assert_eq!(v["witness"]["degree"], 1);

    let v = ok(&["bound-integer", "--matrix", &input("ones3.json"), "--n", "4"]);
    assert_eq!(num(&v["bound"]), num(&v["closed_form"]));
    assert!((num(&v["bound"]) - 0.654313).abs() < 1e-6);
}

#[test]
fn budget_flag_limits_work() {
    fails(
        &["bound-thm1", "--budget", "1000", "--k", "3", "--d", "1", "--n", "2"],
        "budget-exceeded",
    );
}

#[test]
fn bad_inputs_exit_with_two() {
    let bit = input("bit.json");
    fails(&["hlambda", "--lambda", "-1", "--u", "no-such-file.json", "--v", &bit], "io");
    fails(&["hlambda", "--lambda", "1/0", "--u", &bit, "--v", &bit], "parse");
    fails(&["bound-floor", "--k", "1", "--d", "1", "--n", "4"], "invalid-parameter");
    fails(&["bound-floor", "--k", "3", "--d", "1", "--n", "two"], "parse");
    fails(&["bound-integer", "--matrix", &input("generic3.json"), "--n", "4"], "invalid-parameter");
    let p = input("point.json");
    fails(&["hlambda", "--lambda", "-1", "--u", &p, "--v", &p], "deterministic-inputs");
}

#[test]
fn optimize_is_reproducible() {
    let args = ["optimize", "--n", "3", "--restarts", "3", "--max-iters", "150", "--seed", "11"];
    let (a, b) = (icdof(&args), icdof(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["seed"], 11);
    let best: Vec<RationalDist> = serde_json::from_value(v["best"].clone()).unwrap();
    assert_eq!(best.len(), 2);
    let u = serde_json::to_string(&best[0]).unwrap();
    let v = serde_json::to_string(&best[1]).unwrap();
    let dir = std::env::temp_dir();
    let (pu, pv) = (dir.join("icdof-opt-u.json"), dir.join("icdof-opt-v.json"));
    std::fs::write(&pu, u).unwrap();
    std::fs::write(&pv, v).unwrap();
    let again = ok(&[
        "hlambda",
        "--lambda",
        "-1",
        "--u",
        pu.to_str().unwrap(),
        "--v",
        pv.to_str().unwrap(),
    ]);
    assert!((num(&again["bound"]) - num(&json(&a)["best_value"])).abs() < 1e-10);
}

#[test]
fn reports_round_trip() {
    let out = icdof(&["condition", "--matrix", &input("generic3.json"), "--degree", "1"]);
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(serde_json::to_string_pretty(&json(&out)).unwrap() + "\n", text);

    let v = ok(&["infodim", "--ifs", &input("cantor.json"), "--m", "8"]);
    let d = 2f64.ln() / 3f64.ln();
    assert!((num(&v["formula"]["value"]) - d).abs() < 1e-11);
    assert!((num(&v["empirical"]["value"]) - d).abs() < 1e-11);
    assert_eq!(v["empirical"]["guard_ok"], true);

    let v = ok(&["sumset", "--a", &input("progression_a.json"), "--b", &input("progression_b.json")]);
    assert_eq!(v["bounds"]["size_sum"], 6);
    assert_eq!(v["attains_progression_bound"], true);

    let v = ok(&["ineq-suite", "--u", &input("prop4.json"), "--v", &input("bit.json")]);
    assert!(num(&v["h_sum"]) >= num(&v["h_u"]).max(num(&v["h_v"])));

    let p = input("prop4.json");
    let q = input("point.json");
    let v = ok(&["ratio-thm3", "--matrix", &input("hlambda.json"), "--input", &p, "--input", &p, "--input", &q]);
    assert!(num(&v["ratio"]) <= 2.0 - 0.748186691213 / 0.862538180862 + 1e-9);
}
