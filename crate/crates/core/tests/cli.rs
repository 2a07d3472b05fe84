use std::path::Path;
use std::process::{Command, Output};

use nuca::odometer::build_three_state_odometer;
use nuca::rules::{save_distribution, save_rules};

fn nuca(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nuca"));
    cmd.args(args);
    match threads {
        Some(n) => cmd.env("NUCA_THREADS", n),
        None => cmd.env_remove("NUCA_THREADS"),
    };
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> String {
    let p = dir.join(name);
    std::fs::write(&p, bytes).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(nuca(&["--help"], None).status.code(), Some(0));
    assert_eq!(nuca(&["--version"], None).status.code(), Some(0));
    assert_eq!(nuca(&[], None).status.code(), Some(1));
    assert_eq!(
        nuca(&["verify", "not-a-check"], None).status.code(),
        Some(1)
    );
}

#[test]
fn simulate_odometer_cell_one() {
    let o = nuca(
        &[
            "simulate",
            "--builtin",
            "odometer",
            "--init",
            "uniform:0",
            "--cell",
            "1",
            "--steps",
            "18",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let values: String = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(values, "0011102220011102220");
}

#[test]
fn file_sources_match_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let theta = build_three_state_odometer();
    let rules = write(dir.path(), "rules.json", &save_rules(theta.rules()));
    let dist = write(dir.path(), "dist.json", &save_distribution(&theta));
    let args = ["--init", "seed:4", "--cell", "6", "--steps", "100"];
    let from_files = nuca(
        &[
            &["simulate", "--rules", &rules, "--distribution", &dist],
            &args[..],
        ]
        .concat(),
        None,
    );
    let builtin = nuca(
        &[&["simulate", "--builtin", "odometer"], &args[..]].concat(),
        None,
    );
    assert_eq!(from_files.status.code(), Some(0));
    assert_eq!(stdout(&from_files), stdout(&builtin));

    let missing = nuca(
        &[
            "simulate",
            "--rules",
            "/nonexistent.json",
            "--distribution",
            &dist,
            "--cell",
            "0",
            "--steps",
            "1",
        ],
        None,
    );
    assert_eq!(missing.status.code(), Some(1));
    let broken = write(
        dir.path(),
        "broken.json",
        br#"{"q": 3, "rules": [{"name": "g", "neighborhood": [[0]], "table": [1, 2]}]}"#,
    );
    let o = nuca(
        &[
            "simulate",
            "--rules",
            &broken,
            "--distribution",
            &dist,
            "--cell",
            "0",
            "--steps",
            "1",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("expected 3"));
}

#[test]
fn pattern_init_and_cone_escape() {
    let dir = tempfile::tempdir().unwrap();
    let pattern = write(
        dir.path(),
        "p.json",
        br#"{"cells": [[2], [3]], "states": [1, 2]}"#,
    );
    let init = format!("pattern:{pattern}");
    let o = nuca(
        &[
            "simulate",
            "--builtin",
            "odometer",
            "--init",
            &init,
            "--cell",
            "3",
            "--steps",
            "5",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("uncovered cells: 0 1"), "{err}");

    let o = nuca(
        &[
            "simulate",
            "--builtin",
            "odometer",
            "--init",
            &init,
            "--cell",
            "3",
            "--steps",
            "1",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "t,state\n0,2\n1,2\n");

    let filled = write(
        dir.path(),
        "q.json",
        br#"{"cells": [[0]], "states": [2], "fill": {"uniform": 1}}"#,
    );
    let o = nuca(
        &[
            "simulate",
            "--builtin",
            "odometer",
            "--init",
            &format!("pattern:{filled}"),
            "--cell",
            "0",
            "--steps",
            "2",
        ],
        None,
    );
    assert_eq!(stdout(&o), "t,state\n0,2\n1,0\n2,1\n");
}

#[test]
fn verify_exit_codes() {
    let o = nuca(&["verify", "lemma2", "--lmax", "16"], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"pass\": true"));
    let o = nuca(&["verify", "candidate-period", "--xmax", "5"], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"pass\": null"));
    let o = nuca(&["verify", "odometer-period", "--lmax", "3"], None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn output_independent_of_thread_count() {
    let runs: &[&[&str]] = &[
        &["verify", "odometer-period", "--xmax", "6"],
        &["verify", "spiral-equivalence"],
        &[
            "render",
            "--builtin",
            "spiral",
            "--init",
            "seed:3",
            "--cells",
            "0:48",
            "--steps",
            "60",
        ],
        &[
            "simulate",
            "--builtin",
            "example1",
            "--init",
            "seed:5",
            "--cell",
            "-7",
            "--steps",
            "40",
            "--format",
            "json",
        ],
    ];
    for args in runs {
        let reference = stdout(&nuca(args, Some("1")));
        assert!(!reference.is_empty());
        for threads in ["2", "4", "16"] {
            assert_eq!(
                stdout(&nuca(args, Some(threads))),
                reference,
                "{args:?} with {threads} threads"
            );
        }
        assert_eq!(stdout(&nuca(args, None)), reference);
    }
    assert_eq!(
        nuca(&["spiral", "export", "--n", "3"], Some("zero"))
            .status
            .code(),
        Some(1)
    );
}
