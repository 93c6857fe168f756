use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub flags: Value,
    pub threads: Option<usize>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub cache_dir: Option<PathBuf>,
    pub versions: Versions,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Versions {
    pub qssep_cli: String,
    pub qssep_core: String,
}

/// A run in progress; collects paths and the seed before output.
pub struct Context {
    pub manifest: RunManifest,
}

/// Document written by `--json`.
#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    manifest: &'a RunManifest,
    result: &'a T,
}

impl Context {
    pub fn new(subcommand: &str, flags: &impl Serialize, threads: Option<usize>) -> Self {
        Context {
            manifest: RunManifest {
                subcommand: subcommand.to_string(),
                argv: std::env::args().collect(),
                flags: serde_json::to_value(flags).unwrap_or(Value::Null),
                threads,
                inputs: Vec::new(),
                outputs: Vec::new(),
                seed: None,
                cache_dir: std::env::var_os(crate::commands::CACHE_ENV).map(PathBuf::from),
                versions: Versions {
                    qssep_cli: env!("CARGO_PKG_VERSION").to_string(),
                    qssep_core: qssep_core::VERSION.to_string(),
                },
            },
        }
    }

    pub fn input(&mut self, p: &Path) {
        self.manifest.inputs.push(p.to_path_buf());
    }

    pub fn output(&mut self, p: &Path) {
        self.manifest.outputs.push(p.to_path_buf());
    }

    /// Prints the result either as one JSON document or as text followed by
    /// the manifest on a `# manifest` line.
    pub fn emit<T: Serialize>(&self, json: bool, result: &T, text: &str) -> anyhow::Result<()> {
        if json {
            let doc = Document {
                manifest: &self.manifest,
                result,
            };
            println!("{}", serde_json::to_string_pretty(&doc)?);
        } else {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            println!("# manifest {}", serde_json::to_string(&self.manifest)?);
        }
        Ok(())
    }
}
