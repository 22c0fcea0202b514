use std::fs;
use std::path::Path;
use std::process::Command as Proc;

use disclab_cli::commands::{Command, Density, McDensity, NpkGrid, SupportMode, SupportScan};
use disclab_cli::{run_sweep, Common, SweepConfig};

fn bin() -> Proc {
    Proc::new(env!("CARGO_BIN_EXE_disclab"))
}

fn density_cfg(out: &Path, n: Vec<usize>) -> SweepConfig {
    SweepConfig {
        command: Command::Density(Density {
            grid: NpkGrid {
                n,
                p: vec![3],
                k: vec![1],
            },
            oracle: true,
        }),
        common: Common {
            out: out.to_path_buf(),
            ..Common::default()
        },
    }
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn empty_grid_is_rejected_without_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert!(run_sweep(&density_cfg(&out, vec![])).is_err());
    assert!(!out.exists());
    let status = bin().args(["density", "--n", "--out"]).arg(&out).output().unwrap().status;
    assert_eq!(status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn density_row_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = density_cfg(dir.path(), vec![2]);
    let r = run_sweep(&cfg).unwrap();
    assert_eq!(r.report.exit_code(), 0);
    let csv = read(dir.path(), "density.csv");
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        format!("# fingerprint={} seed=1 version={} command=density", cfg.fingerprint(), disclab_cli::CODE_VERSION)
    );
    assert_eq!(lines.next().unwrap(), "n,p,k,count,modulus_exp,density,method,oracle_count,status");
    assert_eq!(lines.next().unwrap(), "2,3,1,9,4,1/9,coset,9,ok");
    for f in ["density.json", "density.gp", "density.timing.json"] {
        assert!(read(dir.path(), f).contains(&cfg.fingerprint()), "{f}");
    }
}

#[test]
fn fingerprint_ignores_threads_and_paths() {
    let a = density_cfg(Path::new("a"), vec![2]);
    let mut b = density_cfg(Path::new("b"), vec![2]);
    b.common.threads = Some(3);
    b.common.cache = Some("x.jsonl".into());
    assert_eq!(a.fingerprint(), b.fingerprint());
    b.common.seed = 2;
    assert_ne!(a.fingerprint(), b.fingerprint());
}

#[test]
fn rerun_hits_cache_with_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = density_cfg(&dir.path().join("o"), vec![2, 3]);
    cfg.common.cache = Some(dir.path().join("cache.jsonl"));
    let first = run_sweep(&cfg).unwrap();
    assert_eq!(first.timing.computed, 2);
    let files: Vec<String> = ["density.csv", "density.json", "density.gp"].iter().map(|f| read(&cfg.common.out, f)).collect();
    let second = run_sweep(&cfg).unwrap();
    assert_eq!(second.timing.cached, 2);
    assert_eq!(second.timing.computed, 0);
    let again: Vec<String> = ["density.csv", "density.json", "density.gp"].iter().map(|f| read(&cfg.common.out, f)).collect();
    assert_eq!(files, again);
}

#[test]
fn corrupt_cache_line_does_not_break_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache.jsonl");
    fs::write(&cache, "garbage\n").unwrap();
    let mut cfg = density_cfg(&dir.path().join("o"), vec![2]);
    cfg.common.cache = Some(cache.clone());
    let r = run_sweep(&cfg).unwrap();
    assert_eq!(r.report.exit_code(), 0);
    assert_eq!(fs::read_to_string(&cache).unwrap().lines().count(), 2);
}

#[test]
fn thread_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for threads in [1usize, 4] {
        let out = dir.path().join(format!("t{threads}"));
        let cfg = SweepConfig {
            command: Command::McDensity(McDensity {
                n: vec![2, 3],
                delta: Some(vec![0.25, 0.0625]),
                samples: 200_000,
            }),
            common: Common {
                out: out.clone(),
                threads: Some(threads),
                ..Common::default()
            },
        };
        run_sweep(&cfg).unwrap();
        texts.push((read(&out, "mc-density.csv"), read(&out, "mc-density.json")));
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn exit_codes_for_violation_and_capacity() {
    let dir = tempfile::tempdir().unwrap();
    let planted = SweepConfig {
        command: Command::SupportScan(SupportScan {
            grid: NpkGrid {
                n: vec![3],
                p: vec![2],
                k: vec![1],
            },
            mode: SupportMode::Exhaustive,
            samples: 0,
            planted: true,
        }),
        common: Common {
            out: dir.path().join("p"),
            ..Common::default()
        },
    };
    assert_eq!(run_sweep(&planted).unwrap().report.exit_code(), 3);
    let status = bin()
        .args(["density", "--n", "6", "--p", "3", "--k", "3", "--capacity", "10", "--out"])
        .arg(dir.path().join("c"))
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    let status = bin()
        .args(["support-scan", "--n", "3", "--p", "2", "--k", "1", "--out"])
        .arg(dir.path().join("s"))
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
}

#[test]
fn invalid_point_is_a_validation_error() {
    let status = bin().args(["density", "--p", "4", "--out", "/nonexistent/never"]).output().unwrap();
    assert_eq!(status.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&status.stderr).contains("prime"));
}

#[test]
fn env_thread_override_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("DISCLAB_THREADS", "2")
        .args(["powerful-divisor", "--m", "64", "--k", "3", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(read(dir.path(), "powerful-divisor.timing.json").contains("\"threads\": 2"));
}
