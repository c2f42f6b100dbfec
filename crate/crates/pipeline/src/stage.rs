//! Resumable stages: each expensive artifact (coordinate system, bracket
//! matrix, cocycle) is cached on disk under a key derived from exactly the
//! inputs that determine it, with a content hash alongside to detect
//! corruption. Loading re-validates cheap invariants; anything suspicious
//! falls back to recomputation or fails loudly.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};
use sympder_core::{select_coordinates, CoordinateSystem, Genus, SamplingBudget};

use crate::cocycle::{extract_cocycle, Cocycle};
use crate::error::PipelineError;
use crate::wmatrix::{build_w_matrix, WMatrix};

/// Inputs that determine every artifact downstream.
#[derive(Debug, Clone)]
pub struct StageConfig {
    pub genus: usize,
    pub weight: usize,
    pub seed: u64,
    pub primes: [u64; 2],
    pub budget: SamplingBudget,
    pub cache_dir: Option<PathBuf>,
}

impl StageConfig {
    pub fn genus_t(&self) -> Result<Genus, PipelineError> {
        Genus::new(self.genus).map_err(PipelineError::Core)
    }

    fn budget_key(&self) -> String {
        format!(
            "batch={},stable={},max={}",
            self.budget.batch_size, self.budget.stable_batches, self.budget.max_batches
        )
    }

    /// Key of the coordinate-selection stage.
    pub fn coordinates_key(&self) -> String {
        content_key(&format!(
            "coordinates:g={},w={},seed={},p={},{},{}",
            self.genus, self.weight, self.seed, self.primes[0], self.primes[1], self.budget_key()
        ))
    }

    /// Key of the bracket-matrix stage over the given coordinate artifact.
    pub fn w_matrix_key(&self, coords_key: &str, sampler_genus: usize) -> String {
        content_key(&format!(
            "bracket-matrix:over={coords_key},g={sampler_genus},seed={},p={},{},{}",
            self.seed, self.primes[0], self.primes[1], self.budget_key()
        ))
    }

    /// Key of the cocycle-extraction stage over the given inputs.
    pub fn cocycle_key(&self, coords_key: &str, w_key: &str) -> String {
        content_key(&format!("cocycle:coords={coords_key},w={w_key}"))
    }
}

/// Hex SHA-256 of a canonical description string.
pub fn content_key(description: &str) -> String {
    let mut h = Sha256::new();
    h.update(description.as_bytes());
    let digest = h.finalize();
    let mut out = String::with_capacity(16);
    for b in &digest[..8] {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// A stage product plus provenance.
#[derive(Debug)]
pub struct Staged<T> {
    pub value: T,
    pub cache_hit: bool,
    /// SHA-256 of the serialized artifact, when one was written or read.
    pub artifact_hash: Option<String>,
    pub artifact_path: Option<PathBuf>,
    pub elapsed: Duration,
}

fn cache_path(dir: &Path, name: &str, key: &str) -> PathBuf {
    dir.join(format!("{name}-{key}.json"))
}

/// Write bytes atomically and a `.sha256` sidecar; returns the content hash.
fn write_cached(path: &Path, bytes: &[u8]) -> Result<String, PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    let hash = sha256_hex(bytes);
    fs::write(sidecar(path), &hash)?;
    Ok(hash)
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".sha256");
    PathBuf::from(s)
}

/// Read a cached artifact, verifying the content hash when a sidecar exists.
fn read_cached(path: &Path) -> Result<Option<(Vec<u8>, String)>, PipelineError> {
    if !path.exists() {
        return Ok(None);
    }
    let bytes = fs::read(path)?;
    let hash = sha256_hex(&bytes);
    let side = sidecar(path);
    if side.exists() {
        let recorded = fs::read_to_string(&side)?;
        if recorded.trim() != hash {
            return Err(PipelineError::Artifact(format!(
                "cache corruption: {} does not match its recorded hash",
                path.display()
            )));
        }
    }
    Ok(Some((bytes, hash)))
}

/// Select (or reload) the coordinate system for the config.
pub fn stage_coordinates(cfg: &StageConfig) -> Result<Staged<CoordinateSystem>, PipelineError> {
    let start = Instant::now();
    let key = cfg.coordinates_key();
    if let Some(dir) = &cfg.cache_dir {
        let path = cache_path(dir, "coordinates", &key);
        if let Some((bytes, hash)) = read_cached(&path)? {
            let cs: CoordinateSystem = serde_json::from_slice(&bytes)?;
            if cs.genus == cfg.genus
                && cs.weight == cfg.weight
                && cs.seed == cfg.seed
                && cs.primes == cfg.primes
                && cs.verify_minor(cfg.primes).map_err(PipelineError::Core)?
            {
                return Ok(Staged {
                    value: cs,
                    cache_hit: true,
                    artifact_hash: Some(hash),
                    artifact_path: Some(path),
                    elapsed: start.elapsed(),
                });
            }
            return Err(PipelineError::Artifact(format!(
                "cached coordinates at {} disagree with the requested config",
                path.display()
            )));
        }
    }
    let cs = select_coordinates(
        cfg.genus_t()?,
        cfg.weight,
        cfg.seed,
        &cfg.budget,
        cfg.primes,
    )
    .map_err(PipelineError::Core)?;
    let mut staged = Staged {
        cache_hit: false,
        artifact_hash: None,
        artifact_path: None,
        elapsed: Duration::ZERO,
        value: cs,
    };
    if let Some(dir) = &cfg.cache_dir {
        let path = cache_path(dir, "coordinates", &key);
        let bytes = serde_json::to_vec(&staged.value)?;
        staged.artifact_hash = Some(write_cached(&path, &bytes)?);
        staged.artifact_path = Some(path);
    }
    staged.elapsed = start.elapsed();
    Ok(staged)
}

/// Build (or reload) the bracket matrix over `cs`, sampling at
/// `sampler_genus` (which may exceed the coordinate genus).
pub fn stage_w_matrix(
    cfg: &StageConfig,
    cs: &CoordinateSystem,
    sampler_genus: usize,
) -> Result<Staged<WMatrix>, PipelineError> {
    let start = Instant::now();
    let key = cfg.w_matrix_key(&cfg.coordinates_key(), sampler_genus);
    if let Some(dir) = &cfg.cache_dir {
        let path = cache_path(dir, "bracket-matrix", &key);
        if let Some((bytes, hash)) = read_cached(&path)? {
            let w: WMatrix = serde_json::from_slice(&bytes)?;
            if w.genus == sampler_genus
                && w.weight == cs.weight
                && w.ncols == cs.rank
                && w.rows.len() == w.rank
                && w.rank_under(cfg.primes[0]) == w.rank
            {
                return Ok(Staged {
                    value: w,
                    cache_hit: true,
                    artifact_hash: Some(hash),
                    artifact_path: Some(path),
                    elapsed: start.elapsed(),
                });
            }
            return Err(PipelineError::Artifact(format!(
                "cached bracket matrix at {} disagrees with the requested config",
                path.display()
            )));
        }
    }
    let genus = Genus::new(sampler_genus).map_err(PipelineError::Core)?;
    let w = build_w_matrix(cs, genus, cfg.seed, &cfg.budget, cfg.primes)?;
    let mut staged = Staged {
        cache_hit: false,
        artifact_hash: None,
        artifact_path: None,
        elapsed: Duration::ZERO,
        value: w,
    };
    if let Some(dir) = &cfg.cache_dir {
        let path = cache_path(dir, "bracket-matrix", &key);
        let bytes = serde_json::to_vec(&staged.value)?;
        staged.artifact_hash = Some(write_cached(&path, &bytes)?);
        staged.artifact_path = Some(path);
    }
    staged.elapsed = start.elapsed();
    Ok(staged)
}

/// Extract (or reload) the cocycle over `cs` and `w`.
pub fn stage_cocycle(
    cfg: &StageConfig,
    cs: &CoordinateSystem,
    w: &WMatrix,
) -> Result<Staged<Cocycle>, PipelineError> {
    let start = Instant::now();
    let key = cfg.cocycle_key(
        &cfg.coordinates_key(),
        &cfg.w_matrix_key(&cfg.coordinates_key(), w.genus),
    );
    if let Some(dir) = &cfg.cache_dir {
        let path = cache_path(dir, "cocycle", &key);
        if let Some((bytes, hash)) = read_cached(&path)? {
            let artifact: crate::cocycle::CocycleVector = serde_json::from_slice(&bytes)?;
            let cocycle = Cocycle::from_artifact(artifact, cs)?;
            return Ok(Staged {
                value: cocycle,
                cache_hit: true,
                artifact_hash: Some(hash),
                artifact_path: Some(path),
                elapsed: start.elapsed(),
            });
        }
    }
    let cocycle = extract_cocycle(w, cs, cfg.seed)?;
    let mut staged = Staged {
        cache_hit: false,
        artifact_hash: None,
        artifact_path: None,
        elapsed: Duration::ZERO,
        value: cocycle,
    };
    if let Some(dir) = &cfg.cache_dir {
        let path = cache_path(dir, "cocycle", &key);
        let bytes = serde_json::to_vec_pretty(staged.value.artifact())?;
        staged.artifact_hash = Some(write_cached(&path, &bytes)?);
        staged.artifact_path = Some(path);
    }
    staged.elapsed = start.elapsed();
    Ok(staged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dir: Option<PathBuf>) -> StageConfig {
        StageConfig {
            genus: 2,
            weight: 4,
            seed: 5,
            primes: sympder_linalg::default_primes(),
            budget: SamplingBudget {
                batch_size: 32,
                stable_batches: 3,
                max_batches: 200,
            },
            cache_dir: dir,
        }
    }

    #[test]
    fn coordinates_round_trip_through_the_cache() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = cfg(Some(dir.path().to_path_buf()));
        let first = stage_coordinates(&cfg).unwrap();
        assert!(!first.cache_hit);
        let second = stage_coordinates(&cfg).unwrap();
        assert!(second.cache_hit);
        assert_eq!(first.value, second.value);
        assert_eq!(first.artifact_hash, second.artifact_hash);
    }

    #[test]
    fn corrupted_cache_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = cfg(Some(dir.path().to_path_buf()));
        let first = stage_coordinates(&cfg).unwrap();
        let path = first.artifact_path.unwrap();
        let mut bytes = fs::read(&path).unwrap();
        let n = bytes.len();
        bytes[n / 2] ^= 0x20;
        fs::write(&path, &bytes).unwrap();
        let err = stage_coordinates(&cfg).unwrap_err();
        assert!(err.to_string().contains("corruption"), "{err}");
    }

    #[test]
    fn stages_chain_and_cache() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = cfg(Some(dir.path().to_path_buf()));
        let cs = stage_coordinates(&cfg).unwrap().value;
        let w1 = stage_w_matrix(&cfg, &cs, 2).unwrap();
        assert!(!w1.cache_hit);
        let w2 = stage_w_matrix(&cfg, &cs, 2).unwrap();
        assert!(w2.cache_hit);
        assert_eq!(w1.value.rows, w2.value.rows);
    }

    #[test]
    fn keys_separate_configs() {
        let a = cfg(None);
        let mut b = cfg(None);
        b.seed = 6;
        assert_ne!(a.coordinates_key(), b.coordinates_key());
        let ck = a.coordinates_key();
        assert_ne!(a.w_matrix_key(&ck, 2), a.w_matrix_key(&ck, 3));
    }
}
