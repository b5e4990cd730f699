use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::ExperimentConfig;

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config_sha256: String,
}

impl Provenance {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Provenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: cfg.seed()?,
            config_sha256: cfg.digest(),
        })
    }

    fn comment(&self) -> String {
        format!("# {} {} seed={} config_sha256={}\n", self.tool, self.version, self.seed, self.config_sha256)
    }
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    body: &'a T,
}

pub struct OutDir {
    dir: PathBuf,
    prov: Provenance,
}

impl OutDir {
    pub fn create(dir: &Path, prov: Provenance) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(OutDir { dir: dir.to_path_buf(), prov })
    }

    /// Writes a CSV produced by `fill`, prefixed with the provenance comment.
    pub fn csv(&self, name: &str, fill: impl FnOnce(&mut Vec<u8>) -> motsim::Result<()>) -> Result<PathBuf> {
        let mut buf = self.prov.comment().into_bytes();
        fill(&mut buf)?;
        self.write(name, &buf)
    }

    /// Writes `body` as pretty JSON with a `provenance` member merged in.
    pub fn json<T: Serialize>(&self, name: &str, body: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(&Stamped { provenance: &self.prov, body })?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn ms(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.6}")
    }
}
