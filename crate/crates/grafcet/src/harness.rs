//! Compiles a generated C controller and replays an event script through it.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

/// Flags every controller must compile cleanly under.
pub const CFLAGS: &[&str] = &["-std=c99", "-O1", "-Wall", "-Wextra", "-Werror"];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("no C compiler found (set CC)")]
    NoCompiler,
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("compilation failed:\n{0}")]
    Compile(String),
    #[error("controller exited with status {status}: {stderr}")]
    Runtime { status: i32, stdout: String, stderr: String },
    #[error("controller did not finish within {0:?}")]
    Timeout(Duration),
}

/// `$CC`, or the first of `cc`, `gcc`, `clang` that runs.
pub fn find_compiler() -> Option<PathBuf> {
    let candidates: Vec<PathBuf> = match std::env::var_os("CC") {
        Some(cc) => vec![PathBuf::from(cc)],
        None => ["cc", "gcc", "clang"].iter().map(PathBuf::from).collect(),
    };
    candidates.into_iter().find(|c| {
        Command::new(c).arg("--version").stdout(Stdio::null()).stderr(Stdio::null()).status().is_ok_and(|s| s.success())
    })
}

/// Compiles `source` into `work_dir` and returns the executable path.
pub fn build(source: &Path, work_dir: &Path) -> Result<PathBuf, HarnessError> {
    let cc = find_compiler().ok_or(HarnessError::NoCompiler)?;
    let stem = source.file_stem().map_or_else(|| "controller".into(), |s| s.to_string_lossy().into_owned());
    let exe = work_dir.join(stem);
    let out = Command::new(cc).args(CFLAGS).arg("-o").arg(&exe).arg(source).output()?;
    if !out.status.success() {
        return Err(HarnessError::Compile(String::from_utf8_lossy(&out.stderr).into_owned()));
    }
    Ok(exe)
}

/// Runs `exe` with `script` on standard input and returns its standard output.
pub fn run(exe: &Path, script: &str, timeout: Duration) -> Result<String, HarnessError> {
    let mut child = Command::new(exe).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn()?;
    let mut stdin = child.stdin.take().expect("piped");
    let script = script.to_owned();
    let writer = thread::spawn(move || {
        let _ = stdin.write_all(script.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped");
    let reader = thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stdout.read_to_end(&mut buf);
        buf
    });
    let mut stderr = child.stderr.take().expect("piped");
    let err_reader = thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stderr.read_to_end(&mut buf);
        buf
    });
    let start = Instant::now();
    let status = loop {
        if let Some(s) = child.try_wait()? {
            break s;
        }
        if start.elapsed() > timeout {
            let _ = child.kill();
            let _ = child.wait();
            return Err(HarnessError::Timeout(timeout));
        }
        thread::sleep(Duration::from_millis(5));
    };
    let _ = writer.join();
    let out = reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();
    if !status.success() {
        return Err(HarnessError::Runtime {
            status: status.code().unwrap_or(-1),
            stdout: String::from_utf8_lossy(&out).into_owned(),
            stderr: String::from_utf8_lossy(&err).into_owned(),
        });
    }
    Ok(String::from_utf8_lossy(&out).into_owned())
}

/// [`build`] then [`run`] with the script file's contents.
pub fn build_and_run(source: &Path, script: &Path, work_dir: &Path) -> Result<String, HarnessError> {
    let exe = build(source, work_dir)?;
    let text = std::fs::read_to_string(script)?;
    run(&exe, &text, DEFAULT_TIMEOUT)
}
