use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knotlab")).args(args).output().expect("spawn knotlab")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn num(v: &Value) -> f64 {
    v.as_str().expect("decimal string").parse().expect("decimal")
}

/// Every numeric string field `k` must come with `k_err`, or `k_re`/`k_im` with `k_err`.
fn assert_bounded(row: &serde_json::Map<String, Value>) {
    for k in row.keys() {
        if k.ends_with("_err") || !row[k].is_string() || row[k].as_str().unwrap().parse::<f64>().is_err() {
            continue;
        }
        let base = k.strip_suffix("_re").or_else(|| k.strip_suffix("_im")).unwrap_or(k);
        assert!(row.contains_key(&format!("{base}_err")), "no bound for {k}");
    }
}

#[test]
fn jones_output() {
    let out = run(&["jones", "4_1"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), r#"{"5/2":1,"-5/2":1}"#);
    let out = run(&["jones", "unknot"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), r#"{"1/2":1,"-1/2":1}"#);
    let out = run(&["jones", "--knot", "4_1", "--format", "csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "q_exponent,coefficient\n5/2,1\n-5/2,1\n");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["jones", "nosuch"]).status.code(), Some(2));
    assert_eq!(run(&["kashaev", "--N", "3:1"]).status.code(), Some(2));
    assert_eq!(run(&["kashaev", "--N", "1:3", "--digits", "16"]).status.code(), Some(2));
    assert_eq!(run(&["volume", "--u", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    // m = e^(iπ/3) is a branch point of the geometric sheet
    assert_eq!(run(&["volume", "--u", "1.0471975511965977461542144610932488i"]).status.code(), Some(1));
}

#[test]
fn kashaev_values() {
    let r = json(&["kashaev", "--N", "1:3"]);
    let rows = r["results"].as_array().unwrap();
    let vals: Vec<f64> = rows.iter().map(|row| num(&row["value_re"])).collect();
    for (v, want) in vals.iter().zip([1.0, 5.0, 13.0]) {
        assert!((v - want).abs() < 1e-30);
    }
    for row in rows {
        assert_bounded(row.as_object().unwrap());
    }
    // other knots go through the cabling route
    let r = json(&["kashaev", "--knot", "3_1", "--N", "1:2"]);
    assert_eq!(r["results"].as_array().unwrap().len(), 2);
}

#[test]
fn volume_at_complete_structure() {
    let r = json(&["volume", "--u", "ipi"]);
    let row = r["results"][0].as_object().unwrap();
    assert!((num(&row["vol"]) - 2.029883212819307).abs() < 1e-14);
    assert!(num(&row["cs"]).abs() < 1e-30);
    assert!(num(&row["vol_err"]) < 1e-30);
    assert_bounded(row);
}

#[test]
fn fit_reproduces_growth_rate() {
    let r = json(&["fit", "--u", "ipi", "--N", "100:800"]);
    let rows = r["results"].as_array().unwrap();
    let a = rows.iter().find(|row| row["parameter"] == "a").unwrap();
    assert!((num(&a["value_re"]) - 0.3230659).abs() < 1e-7);
    for row in rows {
        assert_bounded(row.as_object().unwrap());
    }
}

#[test]
fn output_is_deterministic_and_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.csv");
    let p2 = dir.path().join("b.csv");
    for p in [&p1, &p2] {
        let out = run(&["kashaev", "--N", "5:9:2", "--format", "csv", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
    }
    let a = std::fs::read(&p1).unwrap();
    assert_eq!(a, std::fs::read(&p2).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("N,value_re,value_im,value_err\n5,"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn custom_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    std::fs::write(&path, r#"{"knots":[{"name":"trefoil","pd":[[4,2,5,1],[6,4,1,3],[2,6,3,5]]}]}"#).unwrap();
    let out = run(&["jones", "trefoil", "--table", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["-9/2"], -1);
    std::fs::write(&path, "{").unwrap();
    assert_eq!(run(&["jones", "trefoil", "--table", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn recursion_for_the_unknot() {
    let r = json(&["recursion", "--knot", "unknot", "--order", "2", "--degree", "0"]);
    assert_eq!(r["found"], true);
    assert_eq!(r["s_degree"], 2);
    assert_eq!(r["results"].as_array().unwrap().len(), 3);
    assert_eq!(run(&["recursion", "--knot", "3_1"]).status.code(), Some(2));
}

#[test]
fn quantize_checks() {
    let r = json(&["quantize", "graphs"]);
    let counts: Vec<String> = r["results"].as_array().unwrap().iter().map(|x| x["count"].as_str().unwrap().to_string()).collect();
    assert_eq!(counts, ["2", "36", "1728"]);
    let r = json(&["quantize", "moyal"]);
    let comm: Vec<&Value> = r["results"].as_array().unwrap().iter().filter(|x| x["product"] == "[x,p]").collect();
    assert_eq!(comm.len(), 2);
    assert_eq!(comm[1]["coefficient"], "2");
    let r = json(&["quantize", "associativity", "--seed", "11"]);
    assert!(r["results"].as_array().unwrap().iter().all(|x| x["associative"] == "true"));
    let r = json(&["quantize", "oscillator"]);
    assert!(r["results"].as_array().unwrap().iter().all(|x| x["residual_zero"] == "true"));
    let r = json(&["quantize", "bohr-sommerfeld", "--energy", "5/2", "--hbar", "1/2"]);
    assert_eq!(r["results"][0]["level"], "5");
    assert_eq!(run(&["quantize", "graphs", "--order", "5"]).status.code(), Some(2));
}
