//! Byte-for-byte comparison of CLI outputs with checked-in files.
//! Set `NTERM_UPDATE_GOLDEN=1` to rewrite them.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn nterm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nterm")).args(args).output().expect("spawn nterm")
}

fn golden_dir(case: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(case)
}

fn compare(case: &str, out: &Path, files: &[&str], stdout: &[u8]) {
    let dir = golden_dir(case);
    let update = std::env::var_os("NTERM_UPDATE_GOLDEN").is_some();
    let mut produced: Vec<(String, Vec<u8>)> =
        files.iter().map(|f| (f.to_string(), std::fs::read(out.join(f)).unwrap_or_else(|_| panic!("missing {f}")))).collect();
    produced.push(("stdout.txt".into(), stdout.to_vec()));
    for (name, bytes) in produced {
        let path = dir.join(&name);
        if update {
            std::fs::create_dir_all(&dir).unwrap();
            std::fs::write(&path, &bytes).unwrap();
            continue;
        }
        let want = std::fs::read(&path).unwrap_or_else(|_| panic!("no golden file {}", path.display()));
        assert!(want == bytes, "{case}/{name} differs from the golden copy");
    }
}

#[test]
fn disk_approximation() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let common = ["--function", "disk:0.3@0.5,0.5", "-J", "5", "-k", "1", "-p", "1", "-q", "2", "-N", "16", "--out", out];
    let mut args = vec!["approx"];
    args.extend(common);
    args.extend(["--dump-tree", "--rings"]);
    let o = nterm(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut args = vec!["render", "--what", "covering"];
    args.extend(common);
    assert!(nterm(&args).status.success());
    compare(
        "disk",
        tmp.path(),
        &["approx_N16.json", "tree_N16.json", "reconstruction_N16.csv", "rings_N16.csv", "covering_N16.svg"],
        &o.stdout,
    );
}

#[test]
fn sine_sweep() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = nterm(&["sweep", "--function", "sine:1", "-J", "5", "-k", "2", "-N", "8..64", "--no-time", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    compare("sine", tmp.path(), &["sweep.csv"], &o.stdout);
}

#[test]
fn interior_ring_cover() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = nterm(&["ring-cover", "--inner", "3:1,1", "--outer", "1:0,0", "--svg", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    compare("ring", tmp.path(), &["ring_cover.json", "ring_cover.svg"], &o.stdout);
    let svg = std::fs::read_to_string(tmp.path().join("ring_cover.svg")).unwrap();
    assert_eq!(svg.matches("<rect").count(), 12);
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "function = \"c=0.7\"\nd = 3\nJ = 2\nN = [4]\n").unwrap();
    let out = tmp.path().join("o");
    let o = nterm(&["gen", "--config", cfg.to_str().unwrap(), "-d", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("function.csv")).unwrap();
    assert_eq!(csv, "d,J\n1,2\n0.7,0.7,0.7,0.7\n");
}

#[test]
fn exit_codes() {
    let rejected = nterm(&["approx", "--function", "sine:1", "-d", "3", "-k", "2", "-q", "inf"]);
    assert_eq!(rejected.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&rejected.stderr).contains("s = d(1/p - 1/q) = 3"));
    assert_eq!(nterm(&["approx", "--function", "nope:1"]).status.code(), Some(2));
    let tmp = tempfile::tempdir().unwrap();
    let ok = nterm(&["verify", "--function", "step:1,1;1", "-J", "5", "-N", "4,16", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let render3d = nterm(&["render", "--what", "covering", "--function", "disk:0.3", "-d", "3", "-J", "3", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(render3d.status.code(), Some(2));
}
