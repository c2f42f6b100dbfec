//! Machine-readable run reports. A report's hashed body covers the command,
//! the full configuration, the results, and the hashes of every consumed
//! artifact — but never wall-clock timings, so identical configurations
//! produce byte-identical hashed bodies across runs and machines.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::PipelineError;
use crate::stage::{content_key, sha256_hex, StageConfig};

/// The configuration echo embedded in every report.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ReportConfig {
    pub genus: usize,
    pub weight: usize,
    pub seed: u64,
    pub primes: Vec<u64>,
    pub threads: usize,
    pub batch_size: usize,
    pub stable_batches: usize,
    pub max_batches: usize,
}

impl ReportConfig {
    pub fn new(cfg: &StageConfig, threads: usize) -> Self {
        ReportConfig {
            genus: cfg.genus,
            weight: cfg.weight,
            seed: cfg.seed,
            primes: cfg.primes.to_vec(),
            threads,
            batch_size: cfg.budget.batch_size,
            stable_batches: cfg.budget.stable_batches,
            max_batches: cfg.budget.max_batches,
        }
    }

    pub fn hash(&self) -> String {
        content_key(&serde_json::to_string(self).expect("config serializes"))
    }
}

/// Everything the hash covers, in one stable serialization order.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ReportBody {
    command: String,
    config: ReportConfig,
    config_hash: String,
    results: BTreeMap<String, serde_json::Value>,
    artifacts: BTreeMap<String, String>,
}

/// A finished report: the hashed body plus run-local fields (timings and
/// cache hits) and the body hash.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub config: ReportConfig,
    pub config_hash: String,
    pub results: BTreeMap<String, serde_json::Value>,
    pub artifacts: BTreeMap<String, String>,
    pub report_hash: String,
    pub cache_hits: BTreeMap<String, bool>,
    pub timings_ms: BTreeMap<String, u128>,
}

/// Accumulates results and artifact hashes, then seals them into a report.
#[derive(Debug)]
pub struct ReportBuilder {
    command: String,
    config: ReportConfig,
    results: BTreeMap<String, serde_json::Value>,
    artifacts: BTreeMap<String, String>,
    cache_hits: BTreeMap<String, bool>,
    timings_ms: BTreeMap<String, u128>,
}

impl ReportBuilder {
    pub fn new(command: &str, config: ReportConfig) -> Self {
        ReportBuilder {
            command: command.to_string(),
            config,
            results: BTreeMap::new(),
            artifacts: BTreeMap::new(),
            cache_hits: BTreeMap::new(),
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let value = serde_json::to_value(value).expect("result serializes");
        self.results.insert(key.to_string(), value);
        self
    }

    pub fn artifact(&mut self, name: &str, hash: &str) -> &mut Self {
        self.artifacts.insert(name.to_string(), hash.to_string());
        self
    }

    /// Run-local: whether an artifact came from cache. Outside the hash.
    pub fn cache(&mut self, name: &str, hit: bool) -> &mut Self {
        self.cache_hits.insert(name.to_string(), hit);
        self
    }

    pub fn timing(&mut self, name: &str, millis: u128) -> &mut Self {
        self.timings_ms.insert(name.to_string(), millis);
        self
    }

    pub fn finish(self) -> Report {
        let config_hash = self.config.hash();
        let body = ReportBody {
            command: self.command,
            config: self.config,
            config_hash,
            results: self.results,
            artifacts: self.artifacts,
        };
        let body_bytes = serde_json::to_vec(&body).expect("report body serializes");
        let report_hash = sha256_hex(&body_bytes);
        Report {
            command: body.command,
            config: body.config,
            config_hash: body.config_hash,
            results: body.results,
            artifacts: body.artifacts,
            report_hash,
            cache_hits: self.cache_hits,
            timings_ms: self.timings_ms,
        }
    }
}

impl Report {
    /// Pretty JSON with stable field order (struct order + sorted maps).
    pub fn to_json(&self) -> Result<String, PipelineError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Flat `key,value` lines for the hashed fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command,{}\n", self.command));
        out.push_str(&format!("config_hash,{}\n", self.config_hash));
        for (k, v) in &self.results {
            out.push_str(&format!("{k},{}\n", flat(v)));
        }
        for (k, v) in &self.artifacts {
            out.push_str(&format!("artifact:{k},{v}\n"));
        }
        out.push_str(&format!("report_hash,{}\n", self.report_hash));
        out
    }

    /// Human-readable lines; timings included since nothing hashes this form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{}\n", self.command));
        out.push_str(&format!(
            "  genus {}  weight {}  seed {}\n",
            self.config.genus, self.config.weight, self.config.seed
        ));
        for (k, v) in &self.results {
            out.push_str(&format!("  {k}: {}\n", flat(v)));
        }
        for (k, v) in &self.artifacts {
            out.push_str(&format!("  artifact {k}: {v}\n"));
        }
        for (k, v) in &self.timings_ms {
            out.push_str(&format!("  {k}: {v} ms\n"));
        }
        out.push_str(&format!("  report hash: {}\n", self.report_hash));
        out
    }
}

fn flat(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;
    use sympder_core::SamplingBudget;

    fn config() -> ReportConfig {
        let cfg = StageConfig {
            genus: 3,
            weight: 12,
            seed: 7,
            primes: sympder_linalg::default_primes(),
            budget: SamplingBudget::default(),
            cache_dir: None::<PathBuf>.map(Into::into),
        };
        ReportConfig::new(&cfg, 1)
    }

    #[test]
    fn identical_inputs_give_byte_identical_hashed_bodies() {
        let build = |sleepy: u128, hit: bool| {
            let mut b = ReportBuilder::new("dim-invariants", config());
            b.result("dim", 354usize).artifact("coordinates", "abc123");
            b.cache("coordinates", hit);
            b.timing("select", sleepy);
            b.finish()
        };
        let a = build(10, false);
        let b = build(99_999, true);
        assert_eq!(a.report_hash, b.report_hash);
        assert_eq!(a.to_csv(), b.to_csv());
        let strip = |r: &Report| {
            let mut v = serde_json::to_value(r).unwrap();
            let map = v.as_object_mut().unwrap();
            map.remove("timings_ms");
            map.remove("cache_hits");
            serde_json::to_string(&v).unwrap()
        };
        assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn different_results_change_the_hash() {
        let mut a = ReportBuilder::new("dim-invariants", config());
        a.result("dim", 354usize);
        let mut b = ReportBuilder::new("dim-invariants", config());
        b.result("dim", 650usize);
        assert_ne!(a.finish().report_hash, b.finish().report_hash);
    }

    #[test]
    fn config_hash_tracks_every_field() {
        let base = config();
        let mut other = config();
        other.threads = 4;
        assert_ne!(base.hash(), other.hash());
    }

    #[test]
    fn formats_render_without_panicking() {
        let mut b = ReportBuilder::new("es", config());
        b.result("rank", 284usize)
            .result("certified", true)
            .artifact("cocycle", "deadbeef");
        b.timing("pairing", 1234);
        let r = b.finish();
        assert!(r.to_json().unwrap().contains("\"rank\": 284"));
        assert!(r.to_csv().contains("rank,284"));
        assert!(r.to_text().contains("rank: 284"));
    }
}
