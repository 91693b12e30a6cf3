use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::args::{Command, GlobalArgs};

pub const TOOL: &str = "filterscope";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Identifies the run that produced a file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    /// The hash covers the parsed command and global flags except `--out`,
    /// so the same analysis written elsewhere hashes the same.
    pub fn new(global: &GlobalArgs, command: &Command) -> Self {
        let mut g = global.clone();
        g.out = PathBuf::new();
        let digest = Sha256::digest(format!("{VERSION}\n{g:?}\n{command:?}").as_bytes());
        Provenance {
            tool: TOOL,
            version: VERSION,
            command: command.name(),
            seed: global.seed,
            config_hash: hex::encode(&digest[..8]),
        }
    }

    /// One-line form for comment headers.
    pub fn line(&self) -> String {
        format!(
            "{} {} {} seed={} config={}",
            self.tool, self.version, self.command, self.seed, self.config_hash
        )
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("provenance serializes")
    }
}

/// Writes every output file of a command into one directory.
pub struct Output {
    dir: PathBuf,
    pub prov: Provenance,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, prov: Provenance) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            prov,
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn record(&mut self, path: PathBuf) {
        self.written.push(path);
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, data).with_context(|| format!("writing {}", path.display()))?;
        self.record(path);
        Ok(())
    }

    /// JSON object with a leading `provenance` field.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut obj = Map::new();
        obj.insert("provenance".into(), self.prov.to_value());
        match serde_json::to_value(value)? {
            Value::Object(m) => obj.extend(m),
            other => {
                obj.insert("data".into(), other);
            }
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(obj))?;
        text.push('\n');
        self.bytes(name, text.as_bytes())
    }

    /// CSV with a `#` comment line carrying the provenance.
    pub fn csv<R: AsRef<[String]>>(&mut self, name: &str, header: &[&str], rows: &[R]) -> Result<()> {
        let mut buf = format!("# {}\n", self.prov.line()).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(header)?;
            for r in rows {
                w.write_record(r.as_ref())?;
            }
            w.flush()?;
        }
        self.bytes(name, &buf)
    }

    pub fn text(&mut self, name: &str, text: &str) -> Result<()> {
        self.bytes(name, text.as_bytes())
    }
}

/// Lists written files on stdout.
pub fn report(out: &Output) {
    let mut stdout = std::io::stdout().lock();
    for p in out.written() {
        let _ = writeln!(stdout, "wrote {}", p.display());
    }
}

/// Shortest round-tripping text of a float; empty for `None`.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// File-name safe form of a group value.
pub fn slug(s: &str) -> String {
    let s: String = s
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect();
    if s.is_empty() {
        "_".into()
    } else {
        s
    }
}
