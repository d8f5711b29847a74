//! fetch -> sweep -> evaluate -> visualize through the binary, against
//! golden outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use openlearner::datasets::{load_peek, ColumnMapping};
use openlearner::harness::{evaluate, ExperimentConfig, SweepResult};
use openlearner::ModelKind;

pub fn fixtures() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures"))
}

fn sample() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/peek-sample"))
}

pub fn openlearner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_openlearner"))
        .args(args)
        .env_remove("OPENLEARNER_CACHE")
        .output()
        .expect("binary runs")
}

fn ok(step: &str, out: Output) -> Result<String, String> {
    if out.status.success() {
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    } else {
        Err(format!(
            "{step} exited with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        ))
    }
}

fn golden(name: &str, actual: &str) -> Result<(), String> {
    let path = fixtures().join("e2e").join("golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(path.parent().unwrap()).map_err(|e| e.to_string())?;
        return fs::write(&path, actual).map_err(|e| e.to_string());
    }
    let want = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if want != actual {
        return Err(format!("{name} differs from its golden file"));
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn check() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let t = tmp.path();
    let s = |p: &Path| p.to_str().expect("utf-8 path").to_string();
    let e2e = fixtures().join("e2e");

    let manifest = read(&e2e.join("manifest.json.in"))?.replace("{SAMPLE}", &s(&sample()));
    fs::write(t.join("manifest.json"), manifest).map_err(|e| e.to_string())?;
    let cache = t.join("cache");
    let fetched = ok(
        "fetch",
        openlearner(&["fetch", "--dataset", "peek", "--cache", &s(&cache), "--manifest", &s(&t.join("manifest.json"))]),
    )?;
    if fetched.lines().count() != 3 {
        return Err(format!("fetch listed {fetched:?}"));
    }
    // A warm cache is a no-op with the same listing.
    if ok(
        "fetch again",
        openlearner(&["fetch", "--dataset", "peek", "--cache", &s(&cache), "--manifest", &s(&t.join("manifest.json"))]),
    )? != fetched
    {
        return Err("second fetch listed different files".into());
    }

    let best = t.join("best.json");
    ok(
        "sweep",
        openlearner(&[
            "sweep", "--model", "ink", "--grid", &s(&e2e.join("grid.json")), "--out", &s(&best), "--cache", &s(&cache),
        ]),
    )?;
    let best_text = read(&best)?;
    golden("best.json", &best_text)?;

    let report = t.join("report.json");
    let learners = t.join("learners");
    let table = ok(
        "evaluate",
        openlearner(&[
            "evaluate", "--model", "ink", "--config", &s(&e2e.join("config.json")), "--params", &s(&best), "--out",
            &s(&report), "--cache", &s(&cache), "--save-learners", &s(&learners), "--jobs", "2",
        ]),
    )?;
    if !table.contains("f1") {
        return Err(format!("evaluate printed {table:?}"));
    }
    let report_text = read(&report)?;
    golden("report.json", &report_text)?;

    // The binary and the library agree on the same inputs.
    let sweep_result: SweepResult = serde_json::from_str(&best_text).map_err(|e| e.to_string())?;
    let data = load_peek(&cache, &ColumnMapping::default()).map_err(|e| e.to_string())?;
    let (lib_report, _) = evaluate(&ExperimentConfig::new(ModelKind::Ink), &sweep_result.best_params, &data.test)
        .map_err(|e| e.to_string())?;
    if lib_report.to_json().map_err(|e| e.to_string())? != report_text {
        return Err("CLI report differs from the library report".into());
    }

    let viz = t.join("viz");
    fs::create_dir_all(&viz).map_err(|e| e.to_string())?;
    for (kind, html) in [("bubble", false), ("line", true)] {
        let mut args = vec![
            "visualize", "--learner", "10", "--state", "knowledge", "--kind", kind, "--top", "15",
        ];
        let (out, learners_s) = (s(&viz), s(&learners));
        args.extend(["--out", &out, "--learners", &learners_s]);
        if html {
            args.push("--html");
        }
        ok("visualize", openlearner(&args))?;
        let name = format!("10.{kind}.{}", if html { "html" } else { "svg" });
        golden(&name, &read(&viz.join(&name))?)?;
    }

    let missing = openlearner(&[
        "visualize", "--learner", "10", "--state", "interest", "--kind", "line", "--out", &s(&viz), "--learners",
        &s(&learners),
    ]);
    if missing.status.success() || missing.status.code() != Some(2) {
        return Err(format!("line chart without history exited with {:?}", missing.status.code()));
    }
    Ok("fetch, sweep, evaluate and visualize matched 4 golden files".into())
}
