use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use henon_core::io::{parse_map_spec, MapSpec};
use henon_core::{fixtures, Point2};
use serde_json::Value;
use tempfile::TempDir;

fn henon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_henon"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_spec(dir: &Path, name: &str, h: &henon_core::HenonChain) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, MapSpec::from_chain(h, None).to_json()).unwrap();
    path
}

struct Fixture {
    dir: TempDir,
    f: String,
    h: String,
}

fn fixture() -> Fixture {
    let dir = TempDir::new().unwrap();
    let f = write_spec(dir.path(), "F.json", &fixtures::twisted_basic_map());
    let h = write_spec(dir.path(), "H.json", &fixtures::basic_map());
    Fixture {
        f: f.to_str().unwrap().into(),
        h: h.to_str().unwrap().into(),
        dir,
    }
}

fn json_out(o: &Output) -> Value {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn rigidity_on_twisted_pair() {
    let fx = fixture();
    let o = henon(&["rigidity", "--f", &fx.f, "--h", &fx.h]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("commute_FH: false"));
    assert!(text.contains("commute_squares: true"));

    let v = json_out(&henon(&[
        "rigidity", "--f", &fx.f, "--h", &fx.h, "--format", "json",
    ]));
    assert_eq!(v["command"], "rigidity");
    let eta = &v["results"]["twist"]["eta"];
    let w2 = fixtures::omega() * fixtures::omega();
    assert!((eta[0].as_f64().unwrap() - w2.re).abs() <= 1e-9);
    assert!((eta[1].as_f64().unwrap() - w2.im).abs() <= 1e-9);
    assert_eq!(v["results"]["commute_squares"]["commute"], true);
}

#[test]
fn green_at_reference_point() {
    let fx = fixture();
    let v = json_out(&henon(&[
        "green", "--map", &fx.h, "--point", "0", "10", "--sign", "plus", "--format", "json",
    ]));
    let value = v["results"]["value"].as_f64().unwrap();
    assert!((value - 2.3022).abs() <= 1e-3);
    for key in ["tool_version", "command", "inputs", "results", "residuals"] {
        assert!(v.get(key).is_some());
    }
    let neg = henon(&["green", "-m", &fx.h, "--point", "-1.5", "-0.25"]);
    assert!(neg.status.success());
}

#[test]
fn normalize_square_reparses_and_matches() {
    let fx = fixture();
    let o = henon(&["normalize-square", "--map", &fx.f]);
    assert!(o.status.success());
    let normal = parse_map_spec(&stdout(&o)).unwrap();
    let f = fixtures::twisted_basic_map();
    for z in [
        Point2::real(0.3, -0.7),
        Point2::real(1.5, 0.2),
        Point2::origin(),
    ] {
        let a = normal.forward(z);
        let b = f.forward(f.forward(z));
        assert!(a.dist(&b) <= 1e-12 * (1.0 + b.norm()));
    }
}

#[test]
fn validation_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"factors":[{"b":[1,0],"c":[0,0],"delta":[0,0],"p":[[0,0],[0,0],[1,0]]}]}"#,
    )
    .unwrap();
    let o = henon(&["expand", "--map", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("factor 0"));

    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(
        henon(&["expand", "--map", bad.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(henon(&["expand", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(henon(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn oversized_expansion_exits_two() {
    let dir = TempDir::new().unwrap();
    let cubic = henon_core::HenonChain::simple_real(&[0.0, 0.0, 0.0, 1.0])
        .unwrap()
        .power(4)
        .unwrap();
    let path = write_spec(dir.path(), "big.json", &cubic);
    assert_eq!(
        henon(&["expand", "--map", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn render_is_deterministic() {
    let fx = fixture();
    let dir = fx.dir.path();
    let run = |name: &str, workers: &str, format: &str| {
        let out = dir.join(name);
        let o = henon(&[
            "render",
            "--map",
            &fx.h,
            "--res",
            "32",
            "24",
            "--window",
            "0",
            "0",
            "5",
            "4",
            "--workers",
            workers,
            "--format",
            format,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out).unwrap()
    };
    let a = run("a.csv", "1", "csv");
    assert_eq!(a, run("b.csv", "1", "csv"));
    assert_eq!(a, run("c.csv", "4", "csv"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# henon-grid v1, mode=gmax,"));
    assert_eq!(text.lines().count(), 25);

    let p = run("a.pgm", "1", "pgm");
    assert_eq!(p, run("b.pgm", "3", "pgm"));
    assert!(p.starts_with(b"P5\n32 24\n65535\n"));
    let meta = fs::read_to_string(dir.join("a.pgm.meta")).unwrap();
    assert!(meta.contains("scale_max"));

    let stdout_run = henon(&["render", "--map", &fx.h, "--res", "8", "8", "--mode", "k"]);
    assert!(stdout_run.status.success());
    let pgm_without_out = henon(&[
        "render", "--map", &fx.h, "--res", "8", "8", "--format", "pgm",
    ]);
    assert_eq!(pgm_without_out.status.code(), Some(1));
}

#[test]
fn algebra_commands() {
    let fx = fixture();
    let composed =
        parse_map_spec(&stdout(&henon(&["compose", "--f", &fx.f, "--h", &fx.h]))).unwrap();
    assert_eq!(composed.len(), 2);
    let z = Point2::real(0.4, -0.3);
    let f = fixtures::twisted_basic_map();
    let h = fixtures::basic_map();
    assert!(composed.forward(z).dist(&f.forward(h.forward(z))) <= 1e-14);

    let expanded = json_out(&henon(&["expand", "--map", &fx.h, "--format", "json"]));
    assert_eq!(expanded["results"]["second"].as_array().unwrap().len(), 2);

    let group = json_out(&henon(&["twist-group", "--map", &fx.h, "--format", "json"]));
    assert_eq!(group["results"]["order"], 3);
    let not_normal = henon(&["twist-group", "--map", &fx.f]);
    assert_eq!(not_normal.status.code(), Some(1));

    let fixed = henon(&["fix-origin", "--map", &fx.h]);
    assert!(fixed.status.success());
    let chain = henon(&["normalize-chain", "--map", &fx.h]);
    assert_eq!(chain.status.code(), Some(1), "a single factor is rejected");
}

#[test]
fn dynamics_commands() {
    let fx = fixture();
    let c = stdout(&henon(&["classify", "--map", &fx.h, "--point", "0", "0"]));
    assert_eq!(c.trim(), "class: in K (candidate)");
    let c = stdout(&henon(&[
        "classify", "--map", &fx.h, "--point", "0", "10", "--sign", "plus",
    ]));
    assert!(c.contains("escaped forward at step 0"));

    let d = json_out(&henon(&[
        "verify-domination",
        "--map",
        &fx.h,
        "--samples",
        "20",
        "--format",
        "json",
    ]));
    assert_eq!(d["results"]["all_certified"], true);
    let d2 = json_out(&henon(&[
        "verify-domination",
        "--map",
        &fx.h,
        "--samples",
        "20",
        "--format",
        "json",
    ]));
    assert_eq!(d, d2);
    let low = henon(&["verify-domination", "--map", &fx.h, "--r0", "1"]);
    assert_eq!(low.status.code(), Some(1));

    let fp = json_out(&henon(&[
        "fixed-points",
        "--map",
        &fx.h,
        "--format",
        "json",
    ]));
    assert_eq!(fp["results"]["points"].as_array().unwrap().len(), 2);
}

#[test]
fn twist_and_commute_commands() {
    let fx = fixture();
    let t = json_out(&henon(&[
        "twist", "--f", &fx.f, "--h", &fx.h, "--format", "json",
    ]));
    assert_eq!(t["results"]["found"], true);
    let c = stdout(&henon(&["commute", "--f", &fx.f, "--h", &fx.h]));
    assert!(c.starts_with("commute: false"));
    let s = stdout(&henon(&[
        "commute",
        "--f",
        &fx.f,
        "--h",
        &fx.h,
        "--squares",
    ]));
    assert!(s.starts_with("commute: true"));
}

#[test]
fn verify_passes() {
    let o = henon(&["verify"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(!text.contains("FAIL"));
    assert_eq!(text.lines().count(), 7);
}
