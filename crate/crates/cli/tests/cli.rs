//! End-to-end checks of the `sugartax` binary: command surface, file
//! outputs, config handling and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn instance_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/cola.csv")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sugartax"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_on_cola(args: &[&str]) -> Output {
    let mut full = args.to_vec();
    let path = instance_path();
    full.push("--instance");
    full.push(path.to_str().unwrap());
    Command::new(env!("CARGO_BIN_EXE_sugartax"))
        .args(full)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn solve_reports_the_full_tax_optimum() {
    let out = run_on_cola(&["solve", "--welfare-mode", "paper-example"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("optimal tax rate: 1.00 (exact 1)"));
    assert!(text.contains("seller prices: (4.70, 5.47)"));
    assert!(text.contains("paper-example  [selected]"));
    assert!(text.contains("W (display prices):      156037.07"));
    // Both modes always shown.
    assert!(text.contains("definition\n"));
    assert!(text.contains("W (display prices):      109309.67"));
}

#[test]
fn solve_definition_mode_reports_zero_rate() {
    let out = run_on_cola(&["solve"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("optimal tax rate: 0.00 (exact 0)"));
    assert!(text.contains("staircase (definition mode):"));
}

#[test]
fn candidates_csv_contains_the_optimum_row() {
    let csv_path = "/tmp/cli_candidates.csv";
    let out = run_on_cola(&["candidates", "--out", csv_path]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(csv_path).unwrap();
    assert!(csv.starts_with(
        "nr,price:cola,price:zero,choice:high,utility:high,choice:medium,utility:medium,choice:low,utility:low,revenue,revenue_exact"
    ));
    assert!(csv
        .lines()
        .any(|l| l.contains(",4.70,5.47,cola,0.00,-,,zero,0.00,109309.67,109316.40")));
}

#[test]
fn welfare_curve_spans_the_published_endpoints() {
    let csv_path = "/tmp/cli_curve.csv";
    let out = run_on_cola(&["welfare-curve", "--samples", "3", "--out", csv_path]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(csv_path).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert!(rows.first().unwrap().starts_with("0,"));
    assert!(rows.last().unwrap().starts_with("1,"));
    // Definition-mode welfare is flat at the display-price figure, the
    // paper-example one climbs to the headline number.
    for row in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[3], "109309.67");
    }
    assert!(rows.last().unwrap().split(',').nth(4).unwrap() == "156037.07");
}

#[test]
fn plot_writes_svg() {
    let svg_path = "/tmp/cli_plot.svg";
    let out = run_on_cola(&["plot", "--out", svg_path]);
    assert!(out.status.success());
    let svg = std::fs::read_to_string(svg_path).unwrap();
    assert!(svg.starts_with("<svg "));
    assert!(svg.trim_end().ends_with("</svg>"));
}

#[test]
fn plot_rejects_non_two_product_markets() {
    let path = "/tmp/cli_three_products.csv";
    std::fs::write(
        path,
        "[products]\nid,taxed\na,true\nb,false\nc,false\n\n[consumers]\nconsumer,product,beta,sensitivity,demand\nx,a,1,1,1\nx,b,1,1,1\nx,c,1,1,1\n",
    )
    .unwrap();
    let out = run(&["plot", "--instance", path]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("plot requires exactly two products"));
}

#[test]
fn invalid_instances_exit_with_code_two() {
    let out = run(&["solve", "--instance", "/tmp/does_not_exist.csv"]);
    assert_eq!(out.status.code(), Some(2));

    let path = "/tmp/cli_bad_sensitivity.csv";
    std::fs::write(
        path,
        "[products]\nid,taxed\na,true\nb,false\n\n[consumers]\nconsumer,product,beta,sensitivity,demand\nx,a,1,0,1\nx,b,1,1,1\n",
    )
    .unwrap();
    let out = run(&["solve", "--instance", path]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 8"), "got: {err}");
}

#[test]
fn verify_passes_on_the_bundled_instance() {
    let out = run_on_cola(&["verify"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("status: pass"));
}

#[test]
fn solve_with_oracle_reports_the_verdict() {
    let json_path = "/tmp/cli_solve_oracle.json";
    let out = run_on_cola(&[
        "solve",
        "--oracle",
        "--grid-step",
        "0.05",
        "--alpha-step",
        "0.1",
        "--out",
        json_path,
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("grid points"));
    assert!(text.contains(": pass"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(json_path).unwrap()).unwrap();
    assert_eq!(json["oracle"]["passed"], true);
    assert!(json["oracle"]["grid_points"].as_u64().unwrap() > 1_000_000);
}

#[test]
fn config_file_sets_defaults_and_flags_override() {
    let config = "/tmp/cli_config.txt";
    std::fs::write(config, "welfare_mode = paper-example\nprecision = 3\n").unwrap();
    let out = run_on_cola(&["solve", "--config", config]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("paper-example  [selected]"));
    assert!(text.contains("seller prices: (4.700, 5.471)"));
    // An explicit flag beats the file.
    let out = run_on_cola(&["solve", "--config", config, "--welfare-mode", "definition"]);
    assert!(stdout(&out).contains("definition  [selected]"));
}

#[test]
fn empty_consumer_instance_solves_to_zero() {
    let path = "/tmp/cli_empty_consumers.csv";
    std::fs::write(path, "[products]\nid,taxed\na,true\nb,false\n").unwrap();
    let out = run(&["solve", "--instance", path]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("candidate price points: 1"));
    assert!(text.contains("optimal tax rate: 0.00"));
    assert!(text.contains("W (display prices):      0.00"));
}
