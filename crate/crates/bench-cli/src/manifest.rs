//! Run provenance: every command writes its artifacts into a fresh
//! timestamped directory and finishes with a `manifest.json` recording the
//! tool version, the exact command, the seed, the config echo, and a SHA-256
//! digest of every artifact. The manifest is written last, so its presence
//! marks a run that got to the end (possibly with `status: "partial"`).

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactEntry {
    /// Path relative to the run directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// The subcommand and its arguments as invoked.
    pub command: Vec<String>,
    pub seed: u64,
    /// Echo of the configuration the run actually used.
    pub config: serde_json::Value,
    pub started_utc: String,
    pub finished_utc: String,
    /// "complete" or "partial" (some artifacts written, then an error).
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub artifacts: Vec<ArtifactEntry>,
}

/// Handle for one run directory; collects artifacts and finalizes the
/// manifest.
pub struct RunDir {
    root: PathBuf,
    started_utc: String,
    artifacts: Vec<ArtifactEntry>,
}

impl RunDir {
    /// Create `<parent>/<UTC stamp>-seed<seed>`, suffixing `-1`, `-2`, … on
    /// collision (two runs inside the same second).
    pub fn create(parent: &Path, seed: u64) -> anyhow::Result<Self> {
        let stamp = Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
        let base = format!("{stamp}-seed{seed}");
        let mut candidate = parent.join(&base);
        let mut n = 0u32;
        loop {
            match std::fs::create_dir_all(candidate.parent().unwrap_or(parent))
                .and_then(|()| std::fs::create_dir(&candidate))
            {
                Ok(()) => break,
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    n += 1;
                    if n > 1000 {
                        anyhow::bail!("cannot create a unique run directory under {parent:?}");
                    }
                    candidate = parent.join(format!("{base}-{n}"));
                }
                Err(e) => {
                    return Err(anyhow::anyhow!(
                        "cannot create run directory {}: {e}",
                        candidate.display()
                    ))
                }
            }
        }
        Ok(RunDir {
            root: candidate,
            started_utc: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
            artifacts: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    /// Absolute path for a new artifact inside the run directory.
    pub fn file(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Register an already-written file (path relative to the run dir, or
    /// absolute inside it) in the manifest's artifact list.
    pub fn register(&mut self, path: &Path) -> anyhow::Result<()> {
        let rel = path
            .strip_prefix(&self.root)
            .unwrap_or(path)
            .to_string_lossy()
            .into_owned();
        let bytes = std::fs::read(path)
            .map_err(|e| anyhow::anyhow!("cannot hash artifact {}: {e}", path.display()))?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        self.artifacts.push(ArtifactEntry {
            path: rel,
            sha256: format!("{:x}", hasher.finalize()),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Write the manifest and consume the run directory handle.
    pub fn finalize(
        self,
        command: &[String],
        seed: u64,
        config: serde_json::Value,
        error: Option<String>,
    ) -> anyhow::Result<PathBuf> {
        let manifest = RunManifest {
            tool: "coems-bench".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_vec(),
            seed,
            config,
            started_utc: self.started_utc.clone(),
            finished_utc: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
            status: if error.is_none() {
                "complete".to_string()
            } else {
                "partial".to_string()
            },
            error,
            artifacts: self.artifacts,
        };
        let path = self.root.join("manifest.json");
        let body = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(&path, body)
            .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?;
        Ok(self.root)
    }
}
