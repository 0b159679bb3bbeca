use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};

use anyhow::{Context, Result};
use degenwave_core::model::ModelSpec;
use degenwave_core::shooting::{shoot, ShootConfig, ShootError, ShotResult};

use crate::output::sha256_hex;

/// Shots memoized on disk, keyed by model, speed and shooting settings.
#[derive(Debug, Clone)]
pub struct ShotCache {
    dir: PathBuf,
}

impl ShotCache {
    pub fn open(dir: PathBuf) -> Result<Self> {
        fs::create_dir_all(&dir).with_context(|| format!("creating cache {}", dir.display()))?;
        Ok(Self { dir })
    }

    pub fn key(model_hash: &str, c: f64, cfg: &ShootConfig) -> String {
        let settings = serde_json::to_string(cfg).unwrap_or_default();
        sha256_hex(format!("{model_hash}|{:016x}|{settings}", c.to_bits()).as_bytes())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("shot-{key}.json"))
    }

    pub fn get(&self, key: &str) -> Option<ShotResult> {
        let text = fs::read(self.path(key)).ok()?;
        serde_json::from_slice(&text).ok()
    }

    pub fn put(&self, key: &str, shot: &ShotResult) {
        let Ok(bytes) = serde_json::to_vec(shot) else {
            return;
        };
        static SEQ: AtomicUsize = AtomicUsize::new(0);
        let n = SEQ.fetch_add(1, Ordering::Relaxed);
        let tmp = self
            .dir
            .join(format!(".{key}.{}.{n}.tmp", std::process::id()));
        if fs::write(&tmp, bytes).is_ok() && fs::rename(&tmp, self.path(key)).is_err() {
            let _ = fs::remove_file(&tmp);
        }
    }
}

/// Shoots through the cache when one is configured.
pub fn shoot_cached(
    cache: Option<&ShotCache>,
    model_hash: &str,
    m: &ModelSpec,
    c: f64,
    cfg: &ShootConfig,
) -> Result<ShotResult, ShootError> {
    let Some(cache) = cache else {
        return shoot(m, c, cfg);
    };
    let key = ShotCache::key(model_hash, c, cfg);
    if let Some(hit) = cache.get(&key) {
        return Ok(hit);
    }
    let shot = shoot(m, c, cfg)?;
    cache.put(&key, &shot);
    Ok(shot)
}
