use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::error::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Lines in, one translation per line out.
    Translate,
    /// Lines in, one blank-line-separated Penman block per line out.
    Parse,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Translate => "translate",
            Stage::Parse => "parse",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdapterKind {
    /// Shell command run with `sh -c`. `{lang}` is replaced by the source
    /// language tag.
    Subprocess { command: String },
    /// POST `{input_field: [...]}`, expect `{output_field: [...]}`.
    Http {
        endpoint: String,
        input_field: String,
        output_field: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdapterSpec {
    pub kind: AdapterKind,
    pub batch_size: usize,
    pub timeout: Duration,
    /// Recorded in provenance and part of the cache key.
    pub version: Option<String>,
}

impl AdapterSpec {
    pub fn subprocess(command: impl Into<String>) -> Self {
        Self {
            kind: AdapterKind::Subprocess {
                command: command.into(),
            },
            batch_size: 32,
            timeout: Duration::from_secs(600),
            version: None,
        }
    }

    pub fn http(endpoint: impl Into<String>) -> Self {
        Self {
            kind: AdapterKind::Http {
                endpoint: endpoint.into(),
                input_field: "sentences".into(),
                output_field: "outputs".into(),
            },
            batch_size: 32,
            timeout: Duration::from_secs(600),
            version: None,
        }
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size;
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn with_version(mut self, version: impl Into<String>) -> Self {
        self.version = Some(version.into());
        self
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.batch_size == 0 {
            return Err(PipelineError::InvalidSpec("batch size must be at least 1".into()));
        }
        match &self.kind {
            AdapterKind::Subprocess { command } if command.trim().is_empty() => {
                Err(PipelineError::InvalidSpec("empty command".into()))
            }
            AdapterKind::Http { endpoint, .. } if endpoint.trim().is_empty() => {
                Err(PipelineError::InvalidSpec("empty endpoint".into()))
            }
            _ => Ok(()),
        }
    }

    /// Stable identifier used in cache keys and provenance.
    pub fn identity(&self) -> String {
        let base = match &self.kind {
            AdapterKind::Subprocess { command } => format!("subprocess:{command}"),
            AdapterKind::Http {
                endpoint,
                input_field,
                output_field,
            } => format!("http:{endpoint}#{input_field}->{output_field}"),
        };
        match &self.version {
            Some(v) => format!("{base}@{v}"),
            None => base,
        }
    }
}

/// A configured backend. Invocations are serialized: external tools are
/// not assumed to be reentrant.
#[derive(Debug)]
pub struct Adapter {
    spec: AdapterSpec,
    language: Option<String>,
    invocations: AtomicUsize,
    lock: Mutex<()>,
}

impl Adapter {
    pub fn new(spec: AdapterSpec) -> Result<Self, PipelineError> {
        spec.validate()?;
        Ok(Self {
            spec,
            language: None,
            invocations: AtomicUsize::new(0),
            lock: Mutex::new(()),
        })
    }

    /// Source language substituted for `{lang}` in command templates.
    pub fn with_language(mut self, language: impl Into<String>) -> Self {
        self.language = Some(language.into());
        self
    }

    pub fn spec(&self) -> &AdapterSpec {
        &self.spec
    }

    pub fn identity(&self) -> String {
        let id = self.spec.identity();
        match (&self.spec.kind, &self.language) {
            (AdapterKind::Subprocess { command }, Some(lang)) if command.contains("{lang}") => {
                id.replace("{lang}", lang)
            }
            _ => id,
        }
    }

    /// Number of backend calls made so far.
    pub fn invocations(&self) -> usize {
        self.invocations.load(Ordering::SeqCst)
    }

    /// Sends one batch and returns one output per input, unchecked for
    /// count.
    pub fn invoke(&self, batch_index: usize, inputs: &[String], stage: Stage) -> Result<Vec<String>, PipelineError> {
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        self.invocations.fetch_add(1, Ordering::SeqCst);
        match &self.spec.kind {
            AdapterKind::Subprocess { command } => {
                let command = match &self.language {
                    Some(lang) => command.replace("{lang}", lang),
                    None => command.clone(),
                };
                let stdout = run_subprocess(&command, inputs, self.spec.timeout, batch_index)?;
                Ok(match stage {
                    Stage::Translate => stdout.lines().map(str::to_string).collect(),
                    Stage::Parse => split_blocks(&stdout),
                })
            }
            AdapterKind::Http {
                endpoint,
                input_field,
                output_field,
            } => post_json(
                endpoint,
                input_field,
                output_field,
                inputs,
                self.spec.timeout,
                batch_index,
            ),
        }
    }
}

/// Splits parser output into blank-line-separated blocks, dropping
/// comment lines and comment-only blocks.
pub fn split_blocks(text: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut cur = String::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !cur.is_empty() {
                blocks.push(std::mem::take(&mut cur));
            }
            continue;
        }
        if line.trim_start().starts_with('#') {
            continue;
        }
        cur.push_str(line);
        cur.push('\n');
    }
    if !cur.is_empty() {
        blocks.push(cur);
    }
    blocks
}

fn run_subprocess(command: &str, inputs: &[String], timeout: Duration, batch: usize) -> Result<String, PipelineError> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|source| PipelineError::Spawn {
            batch,
            command: command.to_string(),
            source,
        })?;

    let mut payload = String::new();
    for line in inputs {
        payload.push_str(line);
        payload.push('\n');
    }
    let mut stdin = child.stdin.take().expect("piped stdin");
    let writer = thread::spawn(move || {
        // a backend that exits early closes the pipe; that is reported
        // through its exit status instead
        let _ = stdin.write_all(payload.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let mut stderr = child.stderr.take().expect("piped stderr");
    let out_reader = thread::spawn(move || {
        let mut buf = Vec::new();
        stdout.read_to_end(&mut buf).map(|_| buf)
    });
    let err_reader = thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stderr.read_to_end(&mut buf);
        buf
    });

    let deadline = Instant::now() + timeout;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(PipelineError::Timeout { batch, timeout });
            }
            Ok(None) => thread::sleep(Duration::from_millis(5)),
            Err(source) => {
                return Err(PipelineError::Spawn {
                    batch,
                    command: command.to_string(),
                    source,
                })
            }
        }
    };
    let _ = writer.join();
    let out = out_reader
        .join()
        .expect("stdout reader")
        .map_err(|source| PipelineError::Spawn {
            batch,
            command: command.to_string(),
            source,
        })?;
    let err = err_reader.join().expect("stderr reader");
    if !status.success() {
        return Err(PipelineError::Failed {
            batch,
            status: status.to_string(),
            stderr: String::from_utf8_lossy(&err).trim().to_string(),
        });
    }
    String::from_utf8(out).map_err(|_| PipelineError::Failed {
        batch,
        status: status.to_string(),
        stderr: "output is not valid UTF-8".into(),
    })
}

fn post_json(
    endpoint: &str,
    input_field: &str,
    output_field: &str,
    inputs: &[String],
    timeout: Duration,
    batch: usize,
) -> Result<Vec<String>, PipelineError> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(true)
        .build()
        .into();
    let mut body = serde_json::Map::new();
    body.insert(input_field.to_string(), json!(inputs));
    let response = agent.post(endpoint).send_json(Value::Object(body)).map_err(|e| match e {
        ureq::Error::Timeout(_) => PipelineError::Timeout { batch, timeout },
        other => PipelineError::Http {
            batch,
            message: other.to_string(),
        },
    })?;
    let value: Value = response
        .into_body()
        .read_json()
        .map_err(|e| PipelineError::Http {
            batch,
            message: e.to_string(),
        })?;
    let outputs = value
        .get(output_field)
        .and_then(Value::as_array)
        .ok_or_else(|| PipelineError::Http {
            batch,
            message: format!("response has no `{output_field}` array"),
        })?;
    outputs
        .iter()
        .map(|v| {
            v.as_str().map(str::to_string).ok_or_else(|| PipelineError::Http {
                batch,
                message: format!("non-string item in `{output_field}`"),
            })
        })
        .collect()
}
