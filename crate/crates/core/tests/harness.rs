use lrnn_dg::harness::run::{results_csv, RESULTS_HEADER, SUMMARY_HEADER};
use lrnn_dg::harness::{run, run_to_dir, ExperimentConfig, RunOptions};

fn strip_wall_ms(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map(|(head, _)| head).unwrap_or(l))
        .collect::<Vec<_>>()
        .join("\n")
}

fn config(extra: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!(
        r#"{{"example":"poisson2d","scheme":"c0dg","h_list":[0.5,0.25],"m_list":[12,20],
            "w0":0.63,"seeds":[1,2],"collocation_per_face":10,"quad_per_axis":12{extra}}}"#
    ))
    .unwrap()
}

#[test]
fn csv_is_identical_across_runs_and_thread_counts() {
    for cfg in [
        config(""),
        ExperimentConfig::from_json(
            r#"{"example":"heat1d","scheme":"dg","lambda":1,"h_list":[0.5],"m_list":[15],
                "eta_e":8,"w0":1.5,"seeds":[3,4],"quad_per_axis":12}"#,
        )
        .unwrap(),
    ] {
        let one = RunOptions { threads: Some(1), ..RunOptions::default() };
        let four = RunOptions { threads: Some(4), ..RunOptions::default() };
        let a = strip_wall_ms(&results_csv(&run(&cfg, &one).unwrap()));
        let b = strip_wall_ms(&results_csv(&run(&cfg, &one).unwrap()));
        let c = strip_wall_ms(&results_csv(&run(&cfg, &four).unwrap()));
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}

#[test]
fn one_row_per_cell_in_sorted_order() {
    let cfg = config("");
    let rows = run(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 2);
    let keys: Vec<(f64, usize, u64)> = rows.iter().map(|r| (r.h, r.m, r.seed)).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(keys, sorted);
    assert!(rows.iter().all(|r| !r.failed() && r.l2_error.is_finite()));
    let csv = results_csv(&rows);
    assert_eq!(csv.lines().count(), rows.len() + 1);
    assert_eq!(csv.lines().next(), Some(RESULTS_HEADER));
}

#[test]
fn seed_override_replaces_seed_list() {
    let opts = RunOptions { seed_override: Some(9), ..RunOptions::default() };
    let rows = run(&config(""), &opts).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.seed == 9));
}

#[test]
fn output_directory_contents() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions { dump_grid: Some(5), ..RunOptions::default() };
    let rows = run_to_dir(&config(""), &opts, dir.path()).unwrap();
    let results = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(results, results_csv(&rows));
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().next(), Some(SUMMARY_HEADER));
    assert_eq!(summary.lines().count(), 1 + 4);
    let back = ExperimentConfig::from_path(&dir.path().join("config.json")).unwrap();
    assert_eq!(back, config(""));
    let grid = std::fs::read_to_string(dir.path().join("grid_h0.25_m20.csv")).unwrap();
    assert_eq!(grid.lines().next(), Some("x,y,value,exact,abs_error"));
    assert_eq!(grid.lines().count(), 1 + 25);
    let leftovers: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}
