//! Golden-file cases: `NAME.fohh` carries `% goal:` and optional `% flags:`
//! header comments, `NAME.in` holds the read script and `NAME.out` the
//! expected transcript followed by `% exit N`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

pub struct Case {
    pub name: String,
    pub program: PathBuf,
    pub goal: String,
    pub flags: Vec<String>,
    pub script: Option<PathBuf>,
    pub expected: PathBuf,
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn cases() -> Vec<Case> {
    let dir = golden_dir();
    let mut names: Vec<PathBuf> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "fohh"))
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|program| {
            let text = fs::read_to_string(&program).unwrap();
            let header = |key: &str| text.lines().find_map(|l| l.strip_prefix(key).map(|v| v.trim().to_string()));
            let goal = header("% goal:").unwrap_or_else(|| panic!("{}: no goal header", program.display()));
            let flags =
                header("% flags:").map(|f| f.split_whitespace().map(String::from).collect()).unwrap_or_default();
            let script = Some(program.with_extension("in")).filter(|p| p.exists());
            Case {
                name: program.file_stem().unwrap().to_string_lossy().into_owned(),
                expected: program.with_extension("out"),
                program,
                goal,
                flags,
                script,
            }
        })
        .collect()
}

/// Runs the case through the full command line and returns the transcript
/// with the exit code appended.
pub fn run(case: &Case) -> Vec<u8> {
    let mut args: Vec<OsString> = vec!["fohh".into()];
    args.extend(case.flags.iter().map(OsString::from));
    if let Some(s) = &case.script {
        args.push("--script".into());
        args.push(s.into());
    }
    args.push(case.program.clone().into());
    args.push(case.goal.clone().into());
    let mut out = Vec::new();
    let code = fohh_cli::main_with(args, &mut std::io::empty(), &mut out);
    out.extend_from_slice(format!("% exit {code}\n").as_bytes());
    out
}
