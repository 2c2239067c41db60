//! Seeded `bornlab` invocations shared by the CLI tests and the acceptance harness.
//!
//! Arguments starting with `@` name a file under `tests/fixtures`.
//! Set `BORNLAB_BLESS=1` to rewrite golden files from the current binary.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub struct Case {
    pub golden: Option<&'static str>,
    pub args: &'static [&'static str],
    pub exit: i32,
}

const fn golden(name: &'static str, args: &'static [&'static str], exit: i32) -> Case {
    Case {
        golden: Some(name),
        args,
        exit,
    }
}

const fn status(args: &'static [&'static str], exit: i32) -> Case {
    Case {
        golden: None,
        args,
        exit,
    }
}

pub const GOLDEN: &[Case] = &[
    golden(
        "sample_haar3.json",
        &["sample", "--kind", "haar-unitary", "--dim", "3", "--seed", "7"],
        0,
    ),
    golden(
        "sample_uni3.json",
        &["sample", "--kind", "unistochastic", "--dim", "3", "--seed", "7"],
        0,
    ),
    golden(
        "sample_bi4.json",
        &["sample", "--kind", "bistochastic", "--dim", "4", "--seed", "3"],
        0,
    ),
    golden("check_circulant.json", &["check", "@circulant.json"], 1),
    golden("check_uniform3.json", &["check", "@uniform3.json"], 0),
    golden("check_not_stochastic.json", &["check", "@not_stochastic.json"], 1),
    golden("born_hadamard.csv", &["born", "--unitary", "@hadamard.json"], 0),
    golden(
        "born_z_to_y.csv",
        &["born", "--from", "@z_basis.json", "--to", "@y_basis.json"],
        0,
    ),
    golden(
        "recover_uniform3.json",
        &["recover", "@uniform3.json", "--seed", "1"],
        0,
    ),
    golden(
        "recover_not_stochastic.json",
        &["recover", "@not_stochastic.json"],
        1,
    ),
    golden(
        "chain_half.json",
        &[
            "chain",
            "--spin",
            "1/2",
            "--axis-angles",
            "0,1,0,pi/2",
            "--axis-angles",
            "1,0,0,pi/3",
        ],
        0,
    ),
    golden(
        "chain_one.json",
        &[
            "chain",
            "--spin",
            "1",
            "--axis-angles",
            "0,1,0,pi/3",
            "--start",
            "1",
        ],
        0,
    ),
    golden(
        "gleason_demo3.json",
        &["gleason", "demo", "--dim", "3", "--seed", "5"],
        0,
    ),
    golden(
        "gleason_cubic.json",
        &[
            "gleason",
            "demo",
            "--dim",
            "2",
            "--counterexample",
            "--contexts",
            "200",
        ],
        1,
    ),
    golden("gleason_fit_one.json", &["gleason", "fit", "@one_sample.json"], 0),
];

pub const STATUS: &[Case] = &[
    status(&["--help"], 0),
    status(&["--version"], 0),
    status(&[], 64),
    status(&["frobnicate"], 64),
    status(&["check"], 64),
    status(&["sample", "--dim", "3"], 64),
    status(&["sample", "--kind", "haar-unitary", "--dim", "1"], 64),
    status(&["chain", "--spin", "2", "--axis-angles", "0,0,1,1"], 64),
    status(&["chain", "--spin", "1/2", "--axis-angles", "0,0,1"], 64),
    status(
        &[
            "chain",
            "--spin",
            "1/2",
            "--axis-angles",
            "0,0,1,1",
            "--start",
            "2",
        ],
        64,
    ),
    status(&["gleason", "demo", "--dim", "4", "--counterexample"], 64),
    status(
        &[
            "born",
            "--unitary",
            "x.json",
            "--from",
            "y.json",
            "--to",
            "z.json",
        ],
        64,
    ),
    status(
        &[
            "--seed",
            "minus-one",
            "sample",
            "--kind",
            "haar-unitary",
            "--dim",
            "2",
        ],
        64,
    ),
    status(&["check", "@malformed.json"], 65),
    status(&["check", "@not_square.json"], 65),
    status(&["check", "@missing.json"], 65),
    status(&["born", "--unitary", "@not_unitary.json"], 65),
    status(
        &["born", "--from", "@z_basis.json", "--to", "@overlapping.json"],
        65,
    ),
    status(&["gleason", "fit", "@malformed.json"], 65),
    status(
        &[
            "sample",
            "--kind",
            "bistochastic",
            "--dim",
            "3",
            "--out",
            "@no-such-dir/x.json",
        ],
        65,
    ),
    status(&["recover", "@circulant.json", "--restarts", "2"], 2),
];

pub fn tests_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests")
}

pub fn bornlab<S: AsRef<str>>(args: &[S]) -> Output {
    let fixtures = tests_dir().join("fixtures");
    let args: Vec<String> = args
        .iter()
        .map(|a| match a.as_ref().strip_prefix('@') {
            Some(name) => fixtures.join(name).to_string_lossy().into_owned(),
            None => a.as_ref().to_string(),
        })
        .collect();
    Command::new(env!("CARGO_BIN_EXE_bornlab"))
        .args(&args)
        .output()
        .expect("spawn bornlab")
}

/// Runs `case` and compares exit status, stdout against its golden file, and the
/// absence of stdout on usage and input errors.
pub fn verify(case: &Case) -> Result<(), String> {
    let out = bornlab(case.args);
    let code = out.status.code();
    if code != Some(case.exit) {
        return Err(format!(
            "{:?}: exit {code:?}, expected {}; stderr: {}",
            case.args,
            case.exit,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    if case.exit >= 64 && !out.stdout.is_empty() {
        return Err(format!("{:?}: error exit wrote to stdout", case.args));
    }
    let Some(name) = case.golden else {
        return Ok(());
    };
    let path = tests_dir().join("golden").join(name);
    if std::env::var_os("BORNLAB_BLESS").is_some() {
        std::fs::write(&path, &out.stdout).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let want = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if out.stdout != want {
        return Err(format!("{:?}: stdout differs from {name}", case.args));
    }
    Ok(())
}
