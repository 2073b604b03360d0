//! Optional verification through a real compiler. Off unless configured.
//!
//! `compile_cmd` and `run_cmd` are shell templates; `{src}` expands to the
//! source file and `{bin}` to the output binary path.

use std::io::{Read, Write};
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::equiv::{outputs_match, EquivalenceVerdict, ErrorClass, Verdict};
use super::exec::{ExecutionResult, RuntimeReason, Status};
use crate::corpus::TestCase;
use crate::frontend::SyntaxCategory;
use crate::interp::SemanticCategory;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalBackend {
    pub compile_cmd: String,
    pub run_cmd: String,
    pub timeout_secs: f64,
}

impl Default for ExternalBackend {
    fn default() -> Self {
        ExternalBackend { compile_cmd: "g++ -O2 -o {bin} {src}".into(), run_cmd: "{bin}".into(), timeout_secs: 10.0 }
    }
}

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("compilation failed: {0}")]
    CompileFailed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

struct Captured {
    code: Option<i32>,
    stdout: Vec<u8>,
    stderr: Vec<u8>,
    timed_out: bool,
}

fn expand(template: &str, src: &Path, bin: &Path) -> String {
    template.replace("{src}", &src.to_string_lossy()).replace("{bin}", &bin.to_string_lossy())
}

fn run_shell(cmd: &str, stdin: &[u8], timeout: Duration) -> std::io::Result<Captured> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(cmd)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()?;
    let mut input = child.stdin.take().expect("piped stdin");
    let data = stdin.to_vec();
    let writer = std::thread::spawn(move || {
        let _ = input.write_all(&data);
    });
    let mut out = child.stdout.take().expect("piped stdout");
    let mut err = child.stderr.take().expect("piped stderr");
    let out_reader = std::thread::spawn(move || {
        let mut b = Vec::new();
        let _ = out.read_to_end(&mut b);
        b
    });
    let err_reader = std::thread::spawn(move || {
        let mut b = Vec::new();
        let _ = err.read_to_end(&mut b);
        b
    });
    let start = Instant::now();
    let mut timed_out = false;
    let status = loop {
        if let Some(s) = child.try_wait()? {
            break Some(s);
        }
        if start.elapsed() >= timeout {
            let _ = child.kill();
            let _ = child.wait();
            timed_out = true;
            break None;
        }
        std::thread::sleep(Duration::from_millis(5));
    };
    let _ = writer.join();
    let stdout = out_reader.join().unwrap_or_default();
    let stderr = err_reader.join().unwrap_or_default();
    Ok(Captured { code: status.and_then(|s| s.code()), stdout, stderr, timed_out })
}

/// A compiled program ready to run against test inputs.
pub struct Compiled {
    _dir: tempfile::TempDir,
    run_cmd: String,
    timeout: Duration,
}

impl ExternalBackend {
    pub fn compile(&self, source: &str) -> Result<Compiled, ExternalError> {
        let dir = tempfile::tempdir()?;
        let src = dir.path().join("main.cpp");
        let bin = dir.path().join("main.bin");
        std::fs::write(&src, source)?;
        let timeout = Duration::from_secs_f64(self.timeout_secs.max(0.001));
        let c = run_shell(&expand(&self.compile_cmd, &src, &bin), b"", timeout)?;
        if c.timed_out || c.code != Some(0) {
            return Err(ExternalError::CompileFailed(String::from_utf8_lossy(&c.stderr).into_owned()));
        }
        Ok(Compiled { run_cmd: expand(&self.run_cmd, &src, &bin), _dir: dir, timeout })
    }

    /// Syntax failures from the compiler are reported as `syntax/other`: its
    /// diagnostics are not mapped onto finer categories.
    pub fn check_equivalence(
        &self,
        candidate_source: &str,
        tests: &[TestCase],
    ) -> Result<EquivalenceVerdict, ExternalError> {
        let compiled = match self.compile(candidate_source) {
            Ok(c) => c,
            Err(ExternalError::CompileFailed(_)) => {
                return Ok(EquivalenceVerdict {
                    verdict: Verdict::SyntaxFail,
                    failure: Some(ErrorClass::Syntax(SyntaxCategory::Other)),
                    failed_case: None,
                })
            }
            Err(e) => return Err(e),
        };
        for (i, t) in tests.iter().enumerate() {
            let r = compiled.run(&t.input)?;
            if !(r.is_ok() && outputs_match(&r.stdout, &t.expected_output, t.tolerance)) {
                return Ok(EquivalenceVerdict {
                    verdict: Verdict::SemanticFail,
                    failure: Some(ErrorClass::Semantic(SemanticCategory::MisusedVariable)),
                    failed_case: Some(i),
                });
            }
        }
        Ok(EquivalenceVerdict { verdict: Verdict::Equivalent, failure: None, failed_case: None })
    }
}

impl Compiled {
    /// Exit code 0 is `ok`; any other exit is a runtime error. `steps` is always 0.
    pub fn run(&self, stdin: &str) -> Result<ExecutionResult, ExternalError> {
        let c = run_shell(&self.run_cmd, stdin.as_bytes(), self.timeout)?;
        let status = match (c.timed_out, c.code) {
            (true, _) => Status::Timeout,
            (false, Some(0)) => Status::Ok,
            _ => Status::RuntimeError(RuntimeReason::Unresolved),
        };
        Ok(ExecutionResult {
            status,
            stdout: String::from_utf8_lossy(&c.stdout).into_owned(),
            steps: 0,
            input_items: 0,
            input_stmts: 0,
            output_stmts: 0,
            message: (!c.stderr.is_empty()).then(|| String::from_utf8_lossy(&c.stderr).into_owned()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shell_backend() -> ExternalBackend {
        // The "compiler" copies the source and the "program" echoes stdin.
        ExternalBackend { compile_cmd: "cp {src} {bin}".into(), run_cmd: "cat".into(), timeout_secs: 5.0 }
    }

    #[test]
    fn shell_templates_capture_stdout() {
        let b = shell_backend();
        let v = b.check_equivalence("ignored", &[TestCase::new("7\n", "7"), TestCase::new("x", "x")]).unwrap();
        assert!(v.is_equivalent());
        let v = b.check_equivalence("ignored", &[TestCase::new("7", "8")]).unwrap();
        assert_eq!(v.failed_case, Some(0));
    }

    #[test]
    fn compile_failure_is_syntax_fail() {
        let b = ExternalBackend { compile_cmd: "exit 3".into(), ..shell_backend() };
        let v = b.check_equivalence("x", &[TestCase::new("", "")]).unwrap();
        assert_eq!(v.verdict, Verdict::SyntaxFail);
    }

    #[test]
    fn timeout_is_enforced() {
        let b = ExternalBackend { run_cmd: "exec sleep 5".into(), timeout_secs: 0.2, ..shell_backend() };
        let r = b.compile("").unwrap().run("").unwrap();
        assert_eq!(r.status, Status::Timeout);
    }

    #[test]
    fn real_compiler_when_available() {
        if Command::new("g++").arg("--version").output().is_err() {
            return;
        }
        let src =
            "#include <iostream>\nusing namespace std;\nint main(){int a,b; cin>>a>>b; cout<<a+b<<endl; return 0;}\n";
        let v = ExternalBackend::default().check_equivalence(src, &[TestCase::new("2 3", "5\n")]).unwrap();
        assert!(v.is_equivalent());
    }
}
