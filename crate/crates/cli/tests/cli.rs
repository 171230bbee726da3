use std::io::Write;
use std::process::{Command, Output};

use tempfile::NamedTempFile;

const KINK: &str = r#"{
  "polytope": {"dim": 1, "vertices": [["0"], ["1"]]},
  "function": {"pieces": [{"slope": ["0"], "constant": "0"}, {"slope": ["2"], "constant": "-1"}]}
}"#;

const AFFINE: &str = r#"{
  "polytope": {"dim": 1, "vertices": [["0"], ["1"]]},
  "function": {"pieces": [{"slope": ["3"], "constant": "-2"}]}
}"#;

fn input(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn kstab(args: &[&str], file: &NamedTempFile) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kstab")).args(args).arg("--input").arg(file.path()).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn df_prints_exact_value() {
    let o = kstab(&["df"], &input(KINK));
    assert!(o.status.success());
    assert_eq!(stdout(&o), "DF = 1/4\n");
}

#[test]
fn detect_product_direction() {
    let o = kstab(&["detect-product", "--torus", "full"], &input(AFFINE));
    assert_eq!(stdout(&o), "product: true, direction = (3)\n");
    let o = kstab(&["detect-product"], &input(KINK));
    assert_eq!(stdout(&o), "product: false, residual mean square = 1/48\n");
}

#[test]
fn moments_csv_is_exact() {
    let o = kstab(&["moments", "--p", "2", "--k", "4,8,16", "--mode", "projected"], &input(KINK));
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "k,m_k,target,residual");
    for (line, k) in lines[1..].iter().zip(["4", "8", "16"]) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[0], k);
        assert!(!cells[1].contains('.') && !cells[1].contains('e'), "{line}");
        assert_eq!(cells[2], "1/12");
    }
    // m_k = 1/12 + 1/(6k) exactly
    assert_eq!(lines[1], "4,1/8,1/12,4.16666666666667e-2");
    assert_eq!(lines[3], "16,3/32,1/12,1.04166666666667e-2");
}

#[test]
fn exact_commands_are_deterministic() {
    let f = input(KINK);
    for cmd in [&["ehrhart"][..], &["weights", "--k", "3,5"], &["project"], &["reduced-norm", "--p", "1"]] {
        let a = kstab(cmd, &f);
        let b = kstab(cmd, &f);
        assert!(a.status.success(), "{cmd:?}");
        assert_eq!(a.stdout, b.stdout, "{cmd:?}");
    }
}

#[test]
fn ehrhart_and_project_values() {
    let f = input(KINK);
    let out = stdout(&kstab(&["ehrhart"], &f));
    assert!(out.contains("F0 = 1/4\n") && out.contains("F1 = 1/4\n"), "{out}");
    let out = stdout(&kstab(&["project"], &f));
    assert!(out.contains("residual mean square = 1/48\n") && out.contains("DF_T = 1/4\n"), "{out}");
}

#[test]
fn json_output_uses_rational_strings() {
    let o = kstab(&["reduced-norm", "--json"], &input(KINK));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["exact_inner"], "1/48");
    assert_eq!(v["kind"], "reduced");
    assert!(v["value"].as_str().unwrap().contains('e'));
}

#[test]
fn inf_norm_attains_reduced_at_p2() {
    let o = kstab(&["inf-norm", "--p", "2", "--json"], &input(KINK));
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let inf: f64 = v["infimum"]["value"].as_str().unwrap().parse().unwrap();
    let red: f64 = v["reduced"]["value"].as_str().unwrap().parse().unwrap();
    assert!((inf - red).abs() < 1e-8);
}

#[test]
fn weights_round_trip() {
    let o = kstab(&["weights", "--k", "6"], &input(KINK));
    let out = stdout(&o);
    // k f(a/k) for k = 6 and f = max(0, 2x − 1): 0,0,0,0,2,4,6
    let raw: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(raw, ["0", "0", "0", "0", "2", "4", "6"]);
}

#[test]
fn scan_csv() {
    let batch = r#"{"configs": [
  {"id": "kink", "polytope": {"vertices": [[0], [1]]}, "function": {"pieces": [{"slope": [0], "constant": 0}, {"slope": [2], "constant": -1}]}},
  {"id": "affine", "polytope": {"vertices": [[0], [1]]}, "function": {"pieces": [{"slope": [3], "constant": -2}]}}
]}"#;
    let out = stdout(&kstab(&["scan"], &input(batch)));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "id,DF,DF_T,norm1,ratio,product");
    assert!(lines[1].starts_with("kink,1/4,1/4,") && lines[1].ends_with(",false"), "{}", lines[1]);
    assert!(lines[2].starts_with("affine,") && lines[2].ends_with(",0,,true"), "{}", lines[2]);
    assert!(lines[3].starts_with("# empirical delta = "));
}

#[test]
fn validation_errors_exit_2_with_line() {
    let bad = KINK.replace("\"dim\": 1", "\"dim\": 3");
    let o = kstab(&["df"], &input(&bad));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");

    let o = kstab(&["moments", "--p", "1.5", "--k", "2"], &input(KINK));
    assert_eq!(o.status.code(), Some(2));
    let o = kstab(&["reduced-norm", "--torus", "[[1, 2]]"], &input(KINK));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn computational_errors_exit_3() {
    let square = r#"{"polytope": {"vertices": [[0,0],[1,0],[0,1],[1,1]]},
"function": {"pieces": [{"slope": [0, 0], "constant": 0}, {"slope": [1, 1], "constant": -1}]}}"#;
    // k = 1 sees only the origin, too few points for two generators
    let tiny = r#"{"polytope": {"vertices": [["0","0"],["1/3","0"],["0","1/3"]]},
"function": {"pieces": [{"slope": [1, 0], "constant": 0}]}}"#;
    assert!(kstab(&["moments", "--k", "1,2"], &input(square)).status.success());
    let o = kstab(&["moments", "--k", "1"], &input(tiny));
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("moments") && err.contains("Gram"), "{err}");
}

#[test]
fn point_budget_env() {
    let o = Command::new(env!("CARGO_BIN_EXE_kstab"))
        .args(["moments", "--input"])
        .arg(input(KINK).path())
        .env("KSTAB_POINT_BUDGET", "40")
        .output()
        .unwrap();
    let out = stdout(&o);
    let ks: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    // the kink at x = 1/2 gives period 2
    assert_eq!(ks, ["2", "4", "8", "16", "32"]);
}
