use serde_json::Value;
use std::path::PathBuf;
use std::process::Command;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/data").join(name).display().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&d).unwrap();
    d.join(name)
}

fn run(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_mdpsat")).args(args).output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let first = stdout.lines().next().unwrap_or_else(|| panic!("no output for {args:?}"));
    (out.status.code().unwrap(), serde_json::from_str(first).unwrap())
}

fn without_time(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wallTimeMs");
    v
}

#[test]
fn positivity_reports_first_negative() {
    let (code, v) = run(&["positivity", "--lrs", &data("osc.json"), "--horizon", "20"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["firstNegative"], 4);
    let (_, v) = run(&["positivity", "--lrs", &data("osc.json"), "--horizon", "3"]);
    assert!(v["result"]["firstNegative"].is_null());
    let (_, v) = run(&["positivity", "--lrs", &data("osc.json")]);
    assert_eq!(v["result"]["horizon"], 24);
}

#[test]
fn report_carries_command_and_digest() {
    let f = data("risk.json");
    let (code, v) = run(&["solve", "cvar", "-p", "1/2", "-f", &f]);
    assert_eq!(code, 0);
    assert_eq!(v["command"][0], "solve");
    let digest = v["inputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    assert_eq!(v["result"]["value"], "2");
    assert_eq!(v["result"]["var"], "4");
    assert!(v["result"]["K"].is_string());
    assert!(v["wallTimeMs"].is_u64());
}

#[test]
fn reports_are_deterministic_up_to_time() {
    let args = ["solve", "wlf", "-f", &data("loop.json"), "--goal", "rest"];
    let a = without_time(run(&args).1);
    let b = without_time(run(&args).1);
    assert_eq!(a, b);
    assert_eq!(a["result"]["value"], "5/4");

    let o1 = scratch("det1.json");
    let o2 = scratch("det2.json");
    run(&["gadget", "wlf", "--lrs", &data("small.json"), "-o", o1.to_str().unwrap()]);
    run(&["gadget", "wlf", "--lrs", &data("small.json"), "-o", o2.to_str().unwrap()]);
    assert_eq!(std::fs::read(o1).unwrap(), std::fs::read(o2).unwrap());
}

#[test]
fn validation_errors_exit_2() {
    let (code, v) = run(&["solve", "cvar", "-p", "1/2", "-f", &data("gamble.json")]);
    assert_eq!(code, 2);
    assert!(v["error"]["message"].as_str().unwrap().contains("end component"));

    let bad = scratch("bad.json");
    std::fs::write(&bad, r#"{"states":[{"id":"s"}],"initial":"t","actions":[]}"#).unwrap();
    let (code, v) = run(&["solve", "sspp", "-f", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "UnknownStateReference");

    let (code, _) = run(&["solve", "cvar", "-p", "3/2", "-f", &data("risk.json")]);
    assert_eq!(code, 2);
    let (code, _) = run(&["oracle", "cvar", "-f", &data("risk.json")]);
    assert_eq!(code, 2);
}

#[test]
fn fltl_check() {
    let f = data("loop.json");
    let (_, v) = run(&["check", "fltl", "--until", "a", "b", "--theta", "3/4", "-f", &f]);
    assert_eq!(v["result"]["holds"], true);
    assert_eq!(v["result"]["perMecGain"][0]["gain"], "1");
    let (_, v) = run(&["check", "fltl", "--until", "a", "b", "--theta", "1", "-f", &f]);
    assert_eq!(v["result"]["holds"], false);
}

#[test]
fn gadget_output_is_a_loadable_model() {
    for kind in ["pe", "cvar", "wlf", "lrp"] {
        let out = scratch(&format!("g_{kind}.json"));
        let rep = scratch(&format!("r_{kind}.json"));
        let (code, v) = run(&[
            "gadget",
            kind,
            "--lrs",
            &data("small.json"),
            "-o",
            out.to_str().unwrap(),
            "--report",
            rep.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{kind}: {v}");
        let m = mdpsat::mdp::parse_mdp(&std::fs::read(&out).unwrap()).unwrap();
        assert!(m.n_states() > 4);
        let report: Value = serde_json::from_slice(&std::fs::read(&rep).unwrap()).unwrap();
        assert!(report["lambda"].is_string());
        if kind != "lrp" {
            assert!(report["theta"].is_string());
            assert_eq!(report["matrixDimensions"], serde_json::json!([4, 4]));
        }
    }
}

#[test]
fn reduce_then_solve() {
    let out = scratch("pe_ce.json");
    let (code, v) = run(&["reduce", "pe-ce", "-f", &data("gamble.json"), "--theta", "1/2", "-o", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let threshold = v["result"]["threshold"].as_str().unwrap().to_string();
    let (_, s) = run(&["solve", "sspp", "--kind", "ce", "-f", out.to_str().unwrap()]);
    let ce: mdpsat::Rat = s["result"]["value"].as_str().unwrap().parse().unwrap();
    // the gamble's PE max is 1 > 1/2
    assert!(ce > threshold.parse().unwrap());
}

#[test]
fn oracle_matches_solver() {
    let f = data("risk.json");
    for p in ["1/4", "1/2", "9/10"] {
        let (_, s) = run(&["solve", "cvar", "-p", p, "-f", &f]);
        let (_, o) = run(&["oracle", "cvar", "-p", p, "-f", &f]);
        assert_eq!(s["result"]["value"], o["result"]["value"], "p = {p}");
    }
    let (_, o) = run(&["oracle", "wlf", "--memory", "6", "-f", &data("loop.json")]);
    assert_eq!(o["result"]["value"], "5/4");
    let (_, o) = run(&["oracle", "pe", "-f", &data("gamble.json"), "--min"]);
    assert_eq!(o["result"]["value"], "0");
}

#[test]
fn human_table_follows_json() {
    let out = Command::new(env!("CARGO_BIN_EXE_mdpsat"))
        .args(["--human", "positivity", "--lrs", &data("osc.json"), "--horizon", "9"])
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("firstNegative") && l.ends_with('4')));
}
