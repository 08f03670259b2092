use std::process::{Command, Output};

fn gof(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gof"))
        .args(args)
        .env_remove("GOF_WORKERS")
        .output()
        .expect("spawn gof")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("report is json")
}

#[test]
fn data_list_names_every_builtin() {
    let o = gof(&["data", "list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for name in gof_core::datasets::BUILTIN_NAMES {
        assert!(text.lines().any(|l| l.starts_with(&format!("{name}\t"))), "{name} missing");
    }
    assert!(text.contains("2608 draws"));
}

#[test]
fn data_dump_and_checksum() {
    let o = gof(&["data", "dump", "alpha_decay"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("57,203,383,525,532,408,273,139,45,27,10,4,0,1,1"));

    let o = gof(&["data", "checksum", "yeast"]);
    assert!(stdout(&o).starts_with("d937503954eb122bf91905e729cffd47f915509977968ebfa57cd72d1714d80f"));

    let o = gof(&["data", "dump", "builtin:nosuch"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("yeast"));
}

#[test]
fn perfect_fit_gives_unit_p_values() {
    let o = gof(&[
        "test",
        "--data",
        "list:5,5,5,5",
        "--model",
        "fully-specified{probs=0.25,0.25,0.25,0.25}",
        "--sims",
        "2000",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    let results = r["results"].as_array().unwrap();
    assert_eq!(results.len(), 5);
    for k in results {
        assert_eq!(k["p_value"].as_f64(), Some(1.0), "{k}");
    }
    assert_eq!(r["sims"], 2000);
    assert_eq!(r["dataset"]["draws"], 20);
}

#[test]
fn usage_errors_exit_two() {
    let bad_spec = gof(&["test", "--data", "list:1,2", "--model", "nonsense{m=2}"]);
    assert_eq!(bad_spec.status.code(), Some(2));
    let bad_stat = gof(&["test", "--data", "list:1,2", "--model", "synth{m=2}", "--stats", "kl"]);
    assert_eq!(bad_stat.status.code(), Some(2));
    let too_many_bins = gof(&["test", "--data", "list:1,2,3", "--model", "synth{m=2}"]);
    assert_eq!(too_many_bins.status.code(), Some(2));
    let no_args = gof(&[]);
    assert_eq!(no_args.status.code(), Some(2));
    let help = gof(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("power"));
}

#[test]
fn truncate_and_extend_are_recorded() {
    let o = gof(&[
        "test", "--data", "list:3,2,1,1", "--model", "geom-rebinned{m=3}", "--sims", "500", "--truncate",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["dataset"]["transforms"][0], "truncate 3");
    assert_eq!(r["dataset"]["draws"], 6);

    let o = gof(&["test", "--data", "list:3,2", "--model", "geom-rebinned{m=4}", "--sims", "500"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["dataset"]["transforms"][0], "extend 4");
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |workers: &str, file: &str| {
        let path = dir.path().join(file);
        let o = gof(&[
            "--workers",
            workers,
            "test",
            "--data",
            "genotypes",
            "--model",
            "hardy-weinberg{k=4}",
            "--sims",
            "3000",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
        std::fs::read(path).unwrap()
    };
    let one = run("1", "a.json");
    let three = run("3", "b.json");
    assert_eq!(one, three);

    let r: serde_json::Value = serde_json::from_slice(&one).unwrap();
    let echo: Vec<&str> = r["command"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(!echo.contains(&"--workers") && !echo.contains(&"--out"));
    assert!(r.get("wall_time_s").is_none());

    // Re-running the echoed command reproduces the report.
    let again = gof(&echo);
    assert_eq!(again.stdout, one);
}

#[test]
fn csv_indexed_file_and_dumped_simulations() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("counts.csv");
    std::fs::write(&data, "# m=5\nbin,count\n1,9\n2,4\n4,1\n").unwrap();
    let sims = dir.path().join("sims.csv");
    let o = gof(&[
        "test",
        "--data",
        data.to_str().unwrap(),
        "--model",
        "geom-rebinned{m=5}",
        "--stats",
        "chi2,rms",
        "--sims",
        "250",
        "--dump-sims",
        sims.to_str().unwrap(),
        "--format",
        "text",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("14 draws in 5 bins"));
    let dumped = std::fs::read_to_string(sims).unwrap();
    let mut lines = dumped.lines();
    assert_eq!(lines.next(), Some("chi2,rms"));
    assert_eq!(lines.count(), 250);
}

#[test]
fn power_sweep_writes_csv() {
    let o = gof(&[
        "power",
        "--model",
        "synth{m=$m}",
        "--actual",
        "synth-alt{m=$m}",
        "--sweep",
        "m=4,8",
        "--stats",
        "rms",
        "--sims",
        "300",
        "--n",
        "50",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# gof power"));
    assert_eq!(lines[1], "m,kind,n,rate,rejections");
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("4,rms,50,"));
    assert!(lines[3].starts_with("8,rms,50,"));
}

#[test]
fn indistinguishable_power_search_is_capped() {
    let o = gof(&[
        "power",
        "--model",
        "synth{m=4}",
        "--actual",
        "synth{m=4}",
        "--stats",
        "chi2",
        "--sims",
        "200",
        "--cap",
        "64",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("chi2,,true"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("did not distinguish"));
}

#[test]
fn estimation_failures_map_to_exit_three() {
    let e = gof_cli::CliError::Core(gof_core::Error::Estimation {
        family: "poisson-trunc".into(),
        reason: "no interior maximum".into(),
    });
    assert_eq!(e.exit_code(), 3);
}
