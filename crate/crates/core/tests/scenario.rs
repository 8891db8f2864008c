use qconstrain::scenario::schema::{suggest, FrameSpec, GeometrySpec, ModeSpec};
use qconstrain::scenario::{default_stage, parse_scenario, parse_scenario_str, run_scenario, Stage};
use qconstrain::Error;
use std::path::{Path, PathBuf};

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn validation_errors(text: &str) -> Vec<String> {
    match parse_scenario_str(text, Path::new(".")) {
        Err(Error::Validation(v)) => v,
        other => panic!("expected validation errors, got {other:?}"),
    }
}

fn data_rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).skip(1).map(String::from).collect()
}

const MINIMAL: &str = r#"
schema_version = 1
name = "ring"

[geometry]
family = "circle"
rho = 1.0

[transverse]
shape = "disk"
radius = 1.0
"#;

#[test]
fn minimal_scenario_takes_defaults() {
    let s = parse_scenario_str(MINIMAL, Path::new(".")).unwrap();
    assert_eq!(s.hbar, 1.0);
    assert_eq!(s.solver.n_grid, 256);
    assert_eq!(s.solver.k_eigs, 6);
    assert!(s.solver.eps_list.is_none());
    assert!(matches!(s.frame, FrameSpec::Frenet));
    assert!(matches!(s.modes, ModeSpec::Angular { m: 0 }));
    assert!(matches!(s.geometry, GeometrySpec::Curve { samples: 400, .. }));
    assert_eq!(default_stage(&s), Stage::Spectrum);
}

#[test]
fn negative_width_names_the_field() {
    let text = format!("{MINIMAL}\n[solver]\neps_list = [0.2, -0.1, 0.05]\n");
    let errs = validation_errors(&text);
    assert!(errs.iter().any(|e| e.contains("solver.eps_list") && e.contains("positive")), "{errs:?}");
}

#[test]
fn misspelled_key_gets_a_suggestion() {
    let text = MINIMAL.replace("[transverse]", "[frame]\ntwst = 0.1\n\n[transverse]");
    let errs = validation_errors(&text);
    assert!(errs.iter().any(|e| e.contains("frame.twst") && e.contains("did you mean `twist`")), "{errs:?}");
}

#[test]
fn every_problem_is_reported_at_once() {
    let text = MINIMAL.replace("rho = 1.0", "rho = -1.0\ncolour = 3").replace("radius = 1.0", "radius = 0.0");
    let errs = validation_errors(&text);
    assert!(errs.len() >= 3, "{errs:?}");
}

#[test]
fn unparsable_toml_is_a_parse_error() {
    assert!(matches!(parse_scenario_str("name = ", Path::new(".")), Err(Error::Parse(_))));
}

// brute-force nearest neighbour under edit distance, written out directly
fn nearest(key: &str, known: &[&str]) -> (usize, String) {
    fn lev(a: &str, b: &str) -> usize {
        let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        let mut prev: Vec<usize> = (0..=b.len()).collect();
        for i in 1..=a.len() {
            let mut cur = vec![i; b.len() + 1];
            for j in 1..=b.len() {
                let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
                cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
            }
            prev = cur;
        }
        prev[b.len()]
    }
    known.iter().map(|k| (lev(key, k), k.to_string())).min().unwrap()
}

#[test]
fn suggestions_agree_with_exhaustive_search() {
    let known = ["profile", "theta0", "rate", "twist", "file"];
    for key in ["twst", "rte", "proflie", "thet0", "fil", "twists"] {
        let (d, best) = nearest(key, &known);
        assert!(d <= 2);
        assert_eq!(suggest(key, &known), Some(best.as_str()), "{key}");
    }
}

#[test]
fn bundled_scenarios_parse() {
    let mut n = 0;
    for entry in std::fs::read_dir(scenarios_dir()).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            parse_scenario(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            n += 1;
        }
    }
    assert!(n >= 6);
}

#[test]
fn bent_arc_convergence_run() {
    let s = parse_scenario(&scenarios_dir().join("bent_arc.toml")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = run_scenario(&s, Stage::Converge, dir.path(), None).unwrap();
    let rows = data_rows(&dir.path().join("convergence.csv"));
    assert!(rows.len() >= 3);
    let c = &report.metadata["convergence"];
    let order = c["order"].as_f64().unwrap();
    assert!(order > 0.5, "order {order}");
    assert_eq!(c["monotone"], true);
    for f in ["curve.csv", "modes.csv", "effective_field.csv", "spectrum.csv", "metadata.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn sphere_surface_has_no_extrapotential() {
    let s = parse_scenario(&scenarios_dir().join("sphere.toml")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_scenario(&s, Stage::Effective, dir.path(), None).unwrap();
    let text = std::fs::read_to_string(dir.path().join("effective_field.csv")).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| h.starts_with("Vex")).expect("Vex column");
    let mut count = 0;
    for l in lines {
        let v: f64 = l.split(',').nth(col).unwrap().parse().unwrap();
        assert!(v.abs() < 1e-7, "{v}");
        count += 1;
    }
    assert_eq!(count, 24 * 32);
}

#[test]
fn runs_are_reproducible_and_labelled() {
    let s = parse_scenario(&scenarios_dir().join("circle.toml")).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_scenario(&s, Stage::Spectrum, a.path(), Some(3)).unwrap();
    run_scenario(&s, Stage::Spectrum, b.path(), Some(3)).unwrap();
    for f in ["curve.csv", "modes.csv", "effective_field.csv", "spectrum.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        assert_eq!(x, std::fs::read(b.path().join(f)).unwrap(), "{f}");
        let text = String::from_utf8(x).unwrap();
        assert!(text.starts_with('#'), "{f} lacks the convention header");
    }
    let meta: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.path().join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 3);
    assert!(meta["conventions"].is_object());
}

#[test]
fn stages_stop_where_asked() {
    let s = parse_scenario(&scenarios_dir().join("circle.toml")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_scenario(&s, Stage::Curve, dir.path(), None).unwrap();
    assert!(dir.path().join("curve.csv").exists());
    assert!(!dir.path().join("modes.csv").exists());
}
