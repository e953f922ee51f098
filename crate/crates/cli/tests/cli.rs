//! End-to-end CLI behaviour: exit codes, CSV schema pinning, derived
//! value columns, SLD dumps, and failure sidecars.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_fermifisher")
}

fn run_cli(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn single_mode_config(dir: &Path, out: &str) -> PathBuf {
    let body = format!(
        r#"{{
        "family": {{"name": "single_mode"}},
        "grid": {{"axes": [{{"min": -0.9, "max": 0.9, "steps": 19}}]}},
        "outputs": ["qfim", "purity"],
        "output_path": "{}"
    }}"#,
        dir.join(out).display()
    );
    write_config(dir, "cfg.json", &body)
}

#[test]
fn run_emits_schema_header_and_qfi_curve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = single_mode_config(dir.path(), "out.csv");
    let out = run_cli(&["run", cfg.to_str().unwrap()], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "# fermifisher.report.v1");
    assert_eq!(
        lines.next().unwrap(),
        "lambda,J_11,purity,singular_pairs,residual"
    );
    let mut rows = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let lambda: f64 = cells[0].parse().unwrap();
        let j11: f64 = cells[1].parse().unwrap();
        let purity: f64 = cells[2].parse().unwrap();
        let expect = 1.0 / (1.0 - lambda * lambda);
        assert!((j11 - expect).abs() <= 1e-8 * expect, "λ={lambda}: {j11}");
        let expect_p = 0.5 * (1.0 + lambda * lambda);
        assert!((purity - expect_p).abs() < 1e-12);
        rows += 1;
    }
    assert_eq!(rows, 19);
}

#[test]
fn empty_grid_exits_two_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("never.csv");
    let body = format!(
        r#"{{
        "family": {{"name": "single_mode"}},
        "grid": {{"points": []}},
        "outputs": ["purity"],
        "output_path": "{}"
    }}"#,
        out_path.display()
    );
    let cfg = write_config(dir.path(), "cfg.json", &body);
    let out = run_cli(&["run", cfg.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_path.exists());
}

#[test]
fn malformed_config_reports_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "cfg.json",
        r#"{"family": {"name": "single_mode"}, "grid": {"axes": [{"min": 0, "max": "oops", "steps": 2}]}, "outputs": ["purity"], "output_path": "x.csv"}"#,
    );
    let out = run_cli(&["run", cfg.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("grid.axes"), "stderr: {err}");
}

#[test]
fn check_verb_guards_and_passes() {
    let out = run_cli(&["check", "--modes", "7", "--trials", "5"], &[]);
    assert_eq!(out.status.code(), Some(2));

    let out = run_cli(&["check", "--modes", "3", "--trials", "0"], &[]);
    assert_eq!(out.status.code(), Some(2));

    let out = run_cli(
        &["check", "--modes", "2", "--trials", "4", "--seed", "1"],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("all"), "{stdout}");
    assert!(stdout.contains("sld_defining_equation"));
}

#[test]
fn check_gate_run_passes() {
    // the canonical cross-validation invocation
    let out = run_cli(
        &["check", "--modes", "3", "--trials", "25", "--seed", "1"],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("all 11 checks passed"), "{stdout}");
}

#[test]
fn rotation_bound_column_matches_recomputed_inverse_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("rot.csv");
    // 2-mode mixed base, two generators, identity cost
    let body = format!(
        r#"{{
        "family": {{
            "name": "rotation",
            "base": {{"modes": 2, "rep": [[0.0, 0.7, 0.0, 0.0], [-0.7, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.3], [0.0, 0.0, -0.3, 0.0]]}},
            "generators": [
                {{"modes": 2, "rep": [[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]]}},
                {{"modes": 2, "rep": [[0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 1.0, 0.0], [0.0, -1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0]]}}
            ]
        }},
        "grid": {{"points": [[0.1, -0.2], [0.0, 0.4]]}},
        "cost_matrix": [[1.0, 0.0], [0.0, 1.0]],
        "outputs": ["qfim", "bound"],
        "output_path": "{}"
    }}"#,
        out_path.display()
    );
    let cfg = write_config(dir.path(), "cfg.json", &body);
    let out = run_cli(&["run", cfg.to_str().unwrap()], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines().skip(1);
    assert_eq!(
        lines.next().unwrap(),
        "theta_1,theta_2,J_11,J_12,J_22,bound,singular_pairs,residual"
    );
    for line in lines {
        let c: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let (j11, j12, j22, bound) = (c[2], c[3], c[4], c[5]);
        let det = j11 * j22 - j12 * j12;
        let tr_inv = (j11 + j22) / det;
        assert!((bound - tr_inv).abs() <= 1e-10 * tr_inv.abs(), "{bound} vs {tr_inv}");
    }
}

#[test]
fn finite_diff_mode_matches_analytic_on_linear_family() {
    let dir = tempfile::tempdir().unwrap();
    let render = |out: &str, derivative: &str| {
        format!(
            r#"{{
            "family": {{"name": "single_mode"}},
            "grid": {{"points": [[0.3], [0.6]]}},
            "derivative": {derivative},
            "outputs": ["qfim"],
            "output_path": "{}"
        }}"#,
            dir.path().join(out).display()
        )
    };
    let cfg_a = write_config(dir.path(), "a.json", &render("a.csv", r#"{"mode": "analytic"}"#));
    let cfg_f = write_config(
        dir.path(),
        "f.json",
        &render("f.csv", r#"{"mode": "finite_diff", "h": 1e-3, "richardson": true}"#),
    );
    assert!(run_cli(&["run", cfg_a.to_str().unwrap()], &[]).status.success());
    assert!(run_cli(&["run", cfg_f.to_str().unwrap()], &[]).status.success());

    let parse = |name: &str| -> Vec<f64> {
        std::fs::read_to_string(dir.path().join(name))
            .unwrap()
            .lines()
            .skip(2)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect()
    };
    // central differences are exact on a linear family
    for (a, f) in parse("a.csv").iter().zip(parse("f.csv")) {
        assert!((a - f).abs() <= 1e-10 * a.abs(), "{a} vs {f}");
    }
}

#[test]
fn thermal_family_with_embedded_coefficient_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("thermal.csv");
    let body = format!(
        r#"{{
        "family": {{
            "name": "thermal",
            "coefficient": {{"modes": 2, "rep": [[0.0, 1.2, 0.0, 0.4], [-1.2, 0.0, -0.3, 0.0], [0.0, 0.3, 0.0, 0.9], [-0.4, 0.0, -0.9, 0.0]]}}
        }},
        "grid": {{"axes": [{{"min": 0.5, "max": 2.0, "steps": 4}}]}},
        "outputs": ["qfim", "purity"],
        "output_path": "{}"
    }}"#,
        out_path.display()
    );
    let cfg = write_config(dir.path(), "cfg.json", &body);
    let out = run_cli(&["run", cfg.to_str().unwrap()], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().nth(1).unwrap().starts_with("beta,J_11"));
    // purity rises monotonically with β toward the pure-state limit
    let mut last = 0.0;
    for line in text.lines().skip(2) {
        let p: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(p > last && p <= 1.0 + 1e-12, "{p}");
        last = p;
    }
}

#[test]
fn json_format_emits_schema_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("out.json");
    let body = format!(
        r#"{{
        "family": {{"name": "single_mode"}},
        "grid": {{"points": [[0.3]]}},
        "outputs": ["qfim", "purity"],
        "output_path": "{}",
        "format": "json"
    }}"#,
        out_path.display()
    );
    let cfg = write_config(dir.path(), "cfg.json", &body);
    let out = run_cli(&["run", cfg.to_str().unwrap()], &[]);
    assert!(out.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc["schema"], "fermifisher.report.v1");
    let j11 = doc["rows"][0]["j_upper"][0].as_f64().unwrap();
    assert!((j11 - 1.0 / (1.0 - 0.09)).abs() < 1e-10);
}

#[test]
fn numerical_failure_exits_three_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("fail.csv");
    // proportional generators make J singular; the bound then fails
    let body = format!(
        r#"{{
        "family": {{
            "name": "rotation",
            "base": {{"modes": 1, "rep": [[0.0, 0.5], [-0.5, 0.0]]}},
            "generators": [
                {{"modes": 1, "rep": [[0.0, 1.0], [-1.0, 0.0]]}},
                {{"modes": 1, "rep": [[0.0, 2.0], [-2.0, 0.0]]}}
            ]
        }},
        "grid": {{"points": [[0.1, 0.2]]}},
        "cost_matrix": [[1.0, 0.0], [0.0, 1.0]],
        "outputs": ["qfim", "bound"],
        "output_path": "{}"
    }}"#,
        out_path.display()
    );
    let cfg = write_config(dir.path(), "cfg.json", &body);
    let out = run_cli(&["run", cfg.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(3));

    let sidecar = dir.path().join("fail.csv.error.json");
    assert!(sidecar.exists());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&sidecar).unwrap()).unwrap();
    assert_eq!(doc["point_index"], 0);
    assert!(doc["error"].as_str().unwrap().contains("singular"));
}

#[test]
fn sld_dump_at_maximally_mixed_point_and_reload() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("dump.json");
    let body = format!(
        r#"{{
        "family": {{"name": "single_mode"}},
        "grid": {{"points": [[0.0]]}},
        "outputs": ["sld_dump"],
        "output_path": "{}"
    }}"#,
        out_path.display()
    );
    let cfg = write_config(dir.path(), "cfg.json", &body);
    let out = run_cli(
        &["sld-dump", cfg.to_str().unwrap(), "--point", "0.0", "--dense"],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = std::fs::read_to_string(&out_path).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    // at Γ = 0 the Lyapunov equation gives K = −Γ̇ and η = 0
    assert_eq!(doc["entries"][0]["sld"]["eta"], 0.0);
    assert_eq!(doc["entries"][0]["sld"]["k_rep"][0][1], -1.0);
    assert!(doc["entries"][0]["dense"]["spectrum"].is_array());

    // reload through the typed representation: bitwise-identical k_rep
    let dump: fermifisher_cli::dump::SldDump = serde_json::from_str(&text).unwrap();
    let re_serialized = serde_json::to_string_pretty(&dump).unwrap();
    let reparsed: fermifisher_cli::dump::SldDump =
        serde_json::from_str(&re_serialized).unwrap();
    assert_eq!(
        dump.entries[0].sld.krep().matrix(),
        reparsed.entries[0].sld.krep().matrix()
    );
    assert_eq!(dump.entries[0].sld.eta(), reparsed.entries[0].sld.eta());
}

#[test]
fn sld_dump_generic_point_reproduces_dense_qfi() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("dump.json");
    let body = format!(
        r#"{{
        "family": {{"name": "kitaev_chain", "sites": 2, "boundary": "open", "beta": 1.4}},
        "grid": {{"points": [[0.4, 0.8, 0.5]]}},
        "outputs": ["sld_dump"],
        "output_path": "{}"
    }}"#,
        out_path.display()
    );
    let cfg = write_config(dir.path(), "cfg.json", &body);
    let out = run_cli(
        &["sld-dump", cfg.to_str().unwrap(), "--point", "0.4,0.8,0.5"],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let dump: fermifisher_cli::dump::SldDump =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();

    // dumped (K, η) must reproduce J_{μμ} = Tr(ρ L_μ²) through the oracle
    use fermifisher::models::{Boundary, StateFamily};
    use fermifisher::oracle;
    let fam = StateFamily::kitaev_chain(2, Boundary::Open, 1.4).unwrap();
    let point = [0.4, 0.8, 0.5];
    let g = fam.evaluate(&point).unwrap();
    let ops = oracle::majorana_matrices(2).unwrap();
    let rho = oracle::dense_state(&g, &ops).unwrap();
    for (mu, entry) in dump.entries.iter().enumerate() {
        let l = oracle::dense_quadratic(entry.sld.krep(), entry.sld.eta(), &ops);
        let j_dense = (&rho * &l * &l).trace().re;
        let t = fam.analytic_tangent(&point, mu).unwrap();
        let res = fermifisher::sld::qfim(&g, &[t], fermifisher::sld::SingularPolicy::Zero)
            .unwrap();
        let j_closed = res.j_matrix()[(0, 0)];
        assert!(
            (j_dense - j_closed).abs() <= 1e-8 * j_closed.abs().max(1e-12),
            "mu={mu}: {j_dense} vs {j_closed}"
        );
    }
}

#[test]
fn sld_dump_in_run_outputs_writes_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sweep.csv");
    let body = format!(
        r#"{{
        "family": {{"name": "single_mode"}},
        "grid": {{"points": [[0.2], [0.4]]}},
        "outputs": ["qfim", "sld_dump"],
        "output_path": "{}"
    }}"#,
        out_path.display()
    );
    let cfg = write_config(dir.path(), "cfg.json", &body);
    let out = run_cli(&["run", cfg.to_str().unwrap()], &[]);
    assert!(out.status.success());
    let sidecar = dir.path().join("sweep.csv.sld.json");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&sidecar).unwrap()).unwrap();
    assert_eq!(doc.as_array().unwrap().len(), 2);
    assert_eq!(doc[0]["point"][0], 0.2);
}

#[test]
fn bad_point_argument_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = single_mode_config(dir.path(), "x.csv");
    let out = run_cli(&["sld-dump", cfg.to_str().unwrap(), "--point", "abc"], &[]);
    assert_eq!(out.status.code(), Some(2));
}
