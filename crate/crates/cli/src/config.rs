use std::path::{Path, PathBuf};

use scenario_forge::text_extract::{ProviderConfig, ProviderKind};
use serde::Deserialize;

use crate::Failure;

pub const DEFAULT_SEED: u64 = 20240513;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub provider: Option<ProviderSection>,
    pub vision: Option<VisionSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
pub enum ProviderSection {
    Mock {
        dir: PathBuf,
    },
    Http {
        endpoint: String,
        model: String,
        token_env: Option<String>,
        timeout_secs: Option<u64>,
        retries: Option<u32>,
        backoff_ms: Option<u64>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisionSection {
    pub confidence_floor: Option<f64>,
    pub dedup_iou: Option<f64>,
    pub front_margin: Option<f64>,
}

impl ConfigFile {
    /// Reads a TOML config; relative paths inside resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<ConfigFile, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let mut cfg: ConfigFile =
            toml::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = cfg.out_dir.as_mut() {
            rebase(p);
        }
        if let Some(p) = cfg.catalog.as_mut() {
            rebase(p);
        }
        if let Some(ProviderSection::Mock { dir }) = cfg.provider.as_mut() {
            rebase(dir);
        }
        Ok(cfg)
    }

    pub fn provider(&self) -> Option<ProviderConfig> {
        Some(match self.provider.as_ref()? {
            ProviderSection::Mock { dir } => ProviderConfig::mock(dir),
            ProviderSection::Http {
                endpoint,
                model,
                token_env,
                timeout_secs,
                retries,
                backoff_ms,
            } => {
                let mut p = ProviderConfig::http(endpoint, model);
                if let ProviderKind::Http { token_env: t, .. } = &mut p.kind {
                    if token_env.is_some() {
                        t.clone_from(token_env);
                    }
                }
                p.timeout_secs = timeout_secs.unwrap_or(p.timeout_secs);
                p.retries = retries.unwrap_or(p.retries);
                p.backoff_ms = backoff_ms.unwrap_or(p.backoff_ms);
                p
            }
        })
    }
}
