use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSource {
    Flag,
    Entropy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    /// Path relative to the output directory, `/`-separated.
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub seed_source: SeedSource,
    pub config: BTreeMap<String, String>,
    pub duration_seconds: f64,
    pub outputs: Vec<OutputDigest>,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Files whose digest no longer matches, relative to `dir`.
    pub fn mismatches(&self, dir: &Path) -> Vec<String> {
        self.outputs
            .iter()
            .filter(|o| {
                digest_file(&dir.join(&o.file)).map_or(true, |(h, n)| h != o.sha256 || n != o.bytes)
            })
            .map(|o| o.file.clone())
            .collect()
    }

    /// The recorded configuration in config-file syntax.
    pub fn config_text(&self) -> String {
        self.config
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

pub fn digest_file(path: &Path) -> std::io::Result<(String, u64)> {
    let bytes = fs::read(path)?;
    Ok((hex::encode(Sha256::digest(&bytes)), bytes.len() as u64))
}

/// Output files of one run. Everything written through it is removed again
/// unless [`OutputSet::finish`] succeeds.
pub struct OutputSet {
    dir: PathBuf,
    written: Vec<String>,
    finished: bool,
}

impl OutputSet {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let stale = dir.join(MANIFEST_FILE);
        if stale.exists() {
            fs::remove_file(&stale).map_err(|e| CliError::io(&stale, e))?;
        }
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            finished: false,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        self.written.push(name.to_string());
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut out = BufWriter::new(file);
        body(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| CliError::io(&path, e))
    }

    /// Digests every output and writes the manifest last.
    pub fn finish(mut self, mut manifest: RunManifest) -> Result<RunManifest, CliError> {
        manifest.outputs = self
            .written
            .iter()
            .map(|name| {
                let path = self.dir.join(name);
                let (sha256, bytes) = digest_file(&path).map_err(|e| CliError::io(&path, e))?;
                Ok(OutputDigest {
                    file: name.clone(),
                    sha256,
                    bytes,
                })
            })
            .collect::<Result<_, CliError>>()?;
        let path = self.dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.finished = true;
        Ok(manifest)
    }
}

impl Drop for OutputSet {
    fn drop(&mut self) {
        if self.finished {
            return;
        }
        for name in &self.written {
            let _ = fs::remove_file(self.dir.join(name));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> RunManifest {
        RunManifest {
            version: "0".into(),
            command: "test".into(),
            seed: 1,
            seed_source: SeedSource::Flag,
            config: BTreeMap::from([("model.phi".to_string(), "0".to_string())]),
            duration_seconds: 0.0,
            outputs: Vec::new(),
        }
    }

    #[test]
    fn digests_verify_and_detect_edits() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputSet::create(dir.path()).unwrap();
        out.write("a.csv", |w| w.write_all(b"x\n1\n")).unwrap();
        out.write("sub/b.csv", |w| w.write_all(b"y\n")).unwrap();
        let m = out.finish(manifest()).unwrap();
        assert_eq!(m.outputs.len(), 2);
        assert_eq!(m.outputs[0].bytes, 4);
        let back = RunManifest::read(&dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(back, m);
        assert!(back.mismatches(dir.path()).is_empty());
        fs::write(dir.path().join("a.csv"), b"x\n2\n").unwrap();
        assert_eq!(back.mismatches(dir.path()), vec!["a.csv".to_string()]);
    }

    #[test]
    fn unfinished_outputs_are_removed() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut out = OutputSet::create(dir.path()).unwrap();
            out.write("a.csv", |w| w.write_all(b"x\n")).unwrap();
        }
        assert!(!dir.path().join("a.csv").exists());
        assert!(!dir.path().join(MANIFEST_FILE).exists());
    }
}
