use std::fs;
use std::process::Command;

use alphahp::bb_stage::FairnessSpec;
use alphahp::harness::{
    emit_results, load_config, run_campaign, save_config, Method, Summary, SystemConfig, RECORD_COLUMNS,
    TRACE_COLUMNS,
};
use alphahp::optimizers::Algorithm;

fn quick_config() -> SystemConfig {
    let mut cfg = SystemConfig::with_groups(2, 4);
    cfg.n_rf_per_group = 4;
    cfg.algorithms = vec![Algorithm::Gwo, Algorithm::Cs];
    cfg.fairness = vec![FairnessSpec::Alpha(0.0), FairnessSpec::Alpha(1.0), FairnessSpec::MaxMin];
    cfg.p_t_dbm = vec![20.0];
    cfg.optimizer.n_agents = 8;
    cfg.optimizer.iterations = 3;
    cfg.n_realizations = 6;
    cfg.master_seed = 99;
    cfg
}

fn read_csv(path: &std::path::Path) -> (Vec<String>, Vec<csv::StringRecord>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(Result::unwrap).collect();
    (header, rows)
}

#[test]
fn emitted_files_match_the_campaign() {
    let cfg = quick_config();
    let result = run_campaign(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_results(&result, dir.path()).unwrap();

    let (header, rows) = read_csv(&dir.path().join("records.csv"));
    assert_eq!(header, RECORD_COLUMNS);
    assert_eq!(rows.len(), 6 * 3 * 3);
    assert_eq!(rows.len(), result.records.len());
    for (row, rec) in rows.iter().zip(&result.records) {
        assert_eq!(row[2].parse::<Method>().unwrap(), rec.method);
        assert_eq!(row[5].parse::<f64>().unwrap(), rec.metrics.sum_rate);
        let rates: Vec<f64> = row[11].split(';').map(|x| x.parse().unwrap()).collect();
        assert_eq!(rates, rec.metrics.per_ue_rates);
    }

    let (header, rows) = read_csv(&dir.path().join("traces.csv"));
    assert_eq!(header, TRACE_COLUMNS);
    let optimized = result.records.iter().filter(|r| r.method != Method::Baseline).count();
    assert_eq!(rows.len(), optimized * 4);

    let summary: Summary =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.aggregates, result.aggregates);
    assert_eq!(summary.master_seed, 99);
    assert_eq!(summary.n_records, result.records.len());
    assert_eq!(summary.config, cfg);

    // the embedded config regenerates byte-identical records
    let again = run_campaign(&summary.config).unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    emit_results(&again, dir2.path()).unwrap();
    for f in ["records.csv", "traces.csv", "summary.json"] {
        assert_eq!(
            fs::read(dir.path().join(f)).unwrap(),
            fs::read(dir2.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn worker_count_and_parallel_evaluation_do_not_change_results() {
    let mut cfg = quick_config();
    cfg.workers = 1;
    let one = run_campaign(&cfg).unwrap();
    cfg.workers = 3;
    cfg.optimizer.parallel_eval = true;
    let many = run_campaign(&cfg).unwrap();
    assert_eq!(one.records, many.records);
    assert_eq!(one.aggregates, many.aggregates);
}

#[test]
fn extending_a_campaign_keeps_its_prefix() {
    let mut cfg = quick_config();
    cfg.n_realizations = 3;
    let short = run_campaign(&cfg).unwrap();
    cfg.n_realizations = 6;
    let long = run_campaign(&cfg).unwrap();
    assert_eq!(short.records[..], long.records[..short.records.len()]);
}

#[test]
fn single_realization_aggregate_equals_its_record() {
    let mut cfg = quick_config();
    cfg.n_realizations = 1;
    let result = run_campaign(&cfg).unwrap();
    for r in &result.records {
        let a = result.find(r.p_t_dbm, r.method, r.fairness).unwrap();
        assert_eq!((a.n, a.sum_rate.mean, a.sum_rate.se), (1, r.metrics.sum_rate, 0.0));
        assert_eq!(a.objective.mean, r.objective);
        assert_eq!(a.jain.mean, r.metrics.jain.unwrap());
    }
}

#[test]
fn standard_error_shrinks_with_realizations() {
    let mut cfg = SystemConfig::with_groups(2, 2);
    cfg.algorithms = vec![Algorithm::Gwo];
    cfg.optimizer.n_agents = 4;
    cfg.optimizer.iterations = 0;
    cfg.p_t_dbm = vec![0.0];
    let se: Vec<f64> = [50, 200, 800]
        .into_iter()
        .map(|n| {
            cfg.n_realizations = n;
            let r = run_campaign(&cfg).unwrap();
            r.find(0.0, Method::Baseline, FairnessSpec::Alpha(0.0)).unwrap().sum_rate.se
        })
        .collect();
    // quadrupling the sample should roughly halve the standard error
    for w in se.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.4..2.8).contains(&ratio), "{se:?}");
    }
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    let cfg = quick_config();
    save_config(&cfg, &path).unwrap();
    assert_eq!(load_config(&path).unwrap(), cfg);
    fs::write(&path, "").unwrap();
    assert_eq!(load_config(&path).unwrap(), SystemConfig::from_json("{}").unwrap());
}

fn simulate() -> Command {
    Command::new(env!("CARGO_BIN_EXE_simulate"))
}

#[test]
fn cli_runs_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    fs::write(
        &cfg_path,
        r#"{"n_ues": 2, "optimizer": {"n_agents": 6, "iterations": 2}, "n_realizations": 50}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = simulate()
        .args(["--config", cfg_path.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .args(["--seed", "5", "--realizations", "2", "--algorithms", "pso,fa"])
        .args(["--alpha", "0,2,maxmin", "--pt-dbm", "-10,30", "--workers", "1"])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let summary: Summary = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.master_seed, 5);
    assert_eq!(summary.config.n_realizations, 2);
    assert_eq!(summary.config.algorithms, vec![Algorithm::Pso, Algorithm::Fa]);
    assert_eq!(summary.config.p_t_dbm, vec![-10.0, 30.0]);
    assert_eq!(
        summary.config.fairness,
        vec![FairnessSpec::Alpha(0.0), FairnessSpec::Alpha(2.0), FairnessSpec::MaxMin]
    );
    // 2 realizations x 2 powers x 3 fairness x (2 algorithms + baseline)
    assert_eq!(summary.n_records, 36);
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"n_ues": 40}"#).unwrap();
    let code = |args: &[&str]| simulate().args(args).output().unwrap().status.code();
    assert_eq!(code(&["--config", bad.to_str().unwrap()]), Some(2));
    assert_eq!(code(&["--config", dir.path().join("missing.json").to_str().unwrap()]), Some(2));

    let good = dir.path().join("good.json");
    fs::write(&good, r#"{"n_ues": 2, "n_realizations": 1, "optimizer": {"iterations": 0}}"#).unwrap();
    assert_eq!(code(&["--config", good.to_str().unwrap(), "--alpha", "-3"]), Some(2));

    // an output path that is a regular file cannot become a directory
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "x").unwrap();
    assert_eq!(
        code(&["--config", good.to_str().unwrap(), "--out", blocker.to_str().unwrap(), "--algorithms", "gwo"]),
        Some(3)
    );
}
