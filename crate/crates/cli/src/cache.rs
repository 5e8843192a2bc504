//! On-disk saturation cache: one JSON file per key under `<dir>/v1/`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use gentensor::{saturate, ClassIndex, RuleSystem, SaturationOptions, Stability};

use crate::config::{CarrierSpec, RulesSpec};
use crate::CliError;

pub const CACHE_VERSION: &str = "v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CacheStatus {
    Disabled,
    Hit,
    Miss,
}

#[derive(Serialize)]
struct KeyInput<'a> {
    version: &'a str,
    x: &'a CarrierSpec,
    y: &'a CarrierSpec,
    rules: &'a RulesSpec,
    bound: usize,
    stability: bool,
    max_words: usize,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    bound: usize,
    stability: String,
    partition: Vec<u32>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct Cache {
    dir: Option<PathBuf>,
}

pub struct SaturationRequest<'a> {
    pub x: &'a CarrierSpec,
    pub y: &'a CarrierSpec,
    pub rules_spec: &'a RulesSpec,
    pub rules: Arc<RuleSystem>,
    pub bound: usize,
    pub opts: SaturationOptions,
}

fn parse_stability(s: &str) -> Option<Stability> {
    match s {
        "stable" => Some(Stability::Stable),
        "unstable" => Some(Stability::Unstable),
        "unchecked" => Some(Stability::Unchecked),
        _ => None,
    }
}

impl Cache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Cache { dir }
    }

    pub fn key(req: &SaturationRequest<'_>) -> String {
        let input = KeyInput {
            version: CACHE_VERSION,
            x: req.x,
            y: req.y,
            rules: req.rules_spec,
            bound: req.bound,
            stability: req.opts.check_stability,
            max_words: req.opts.max_words,
        };
        sha256_hex(&serde_json::to_vec(&input).expect("key input serializes"))
    }

    fn path(dir: &Path, key: &str) -> PathBuf {
        dir.join(CACHE_VERSION).join(format!("{key}.json"))
    }

    /// Loads a cached partition or saturates and stores it. Unreadable or
    /// mismatched entries are recomputed.
    pub fn saturate(
        &self,
        req: SaturationRequest<'_>,
    ) -> Result<(ClassIndex, CacheStatus), CliError> {
        let Some(dir) = &self.dir else {
            return Ok((
                saturate(req.rules.clone(), req.bound, &req.opts)?,
                CacheStatus::Disabled,
            ));
        };
        let key = Cache::key(&req);
        let path = Cache::path(dir, &key);
        if let Some(idx) = self.load(&path, &key, &req) {
            return Ok((idx, CacheStatus::Hit));
        }
        let idx = saturate(req.rules.clone(), req.bound, &req.opts)?;
        let entry = Entry {
            key: key.clone(),
            bound: req.bound,
            stability: idx.stability().to_string(),
            partition: idx.partition().to_vec(),
        };
        let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
        fs::create_dir_all(path.parent().expect("cache path has a parent")).map_err(io)?;
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_vec(&entry).expect("entry serializes")).map_err(io)?;
        fs::rename(&tmp, &path).map_err(io)?;
        Ok((idx, CacheStatus::Miss))
    }

    fn load(&self, path: &Path, key: &str, req: &SaturationRequest<'_>) -> Option<ClassIndex> {
        let entry: Entry = serde_json::from_slice(&fs::read(path).ok()?).ok()?;
        if entry.key != key || entry.bound != req.bound {
            return None;
        }
        let stability = parse_stability(&entry.stability)?;
        ClassIndex::from_partition(
            req.rules.clone(),
            req.bound,
            entry.partition,
            stability,
            req.opts.max_words,
        )
        .ok()
    }
}
