use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Runs the built binary and returns (stdout, exit code).
pub fn run_bin(args: &[String]) -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_lexchain"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        String::from_utf8(out.stdout).expect("utf-8 output"),
        out.status.code().expect("exit code"),
    )
}

/// Every golden case as (name, expected, actual).
pub fn golden_cases() -> Vec<(String, String, String)> {
    let mut names: Vec<String> = fs::read_dir(golden_dir())
        .expect("golden dir")
        .filter_map(|e| {
            let p = e.ok()?.path();
            if p.extension()? != "args" {
                return None;
            }
            Some(p.file_stem()?.to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|name| {
            let dir = golden_dir();
            let args: Vec<String> = fs::read_to_string(dir.join(format!("{name}.args")))
                .expect("args file")
                .lines()
                .map(str::to_owned)
                .collect();
            let expected = fs::read_to_string(dir.join(format!("{name}.out"))).expect("out file");
            let (stdout, code) = run_bin(&args);
            let actual = format!("{}\nexit: {code}\n", stdout.trim_end_matches('\n'));
            (name, expected, actual)
        })
        .collect()
}
