//! Kernel extraction and evaluation of the abelianization cocycle.
//!
//! The bracket-image matrix `W` is expected to have corank exactly one over
//! the selected coordinates. The one-dimensional kernel is computed modulo
//! as many word-size primes as rational reconstruction needs, lifted by CRT,
//! cleared to a primitive integer vector, and re-verified exactly over the
//! integers. The vector is then rescaled so a fixed witness spider evaluates
//! to 5832, which pins the normalization used for every reported value.

use std::fs;
use std::path::Path;

use num::{BigInt, BigRational, Integer, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use sympder_core::{
    selected_profile, spider_bracket, CoordinateSystem, Expansion, SelectedMatchings, Spider,
};
use sympder_linalg::modp::invmod;
use sympder_linalg::{crt_combine, fallback_primes, nullspace_mod, rational_reconstruct};

use crate::brackets::BracketSampler;
use crate::error::PipelineError;
use crate::wmatrix::WMatrix;

/// The witness spider fixing the overall scale of the cocycle.
pub const WITNESS_LEGS: &str = "S(a1,b1,a1,a1,a1,a1,a2,a1,b1,b1,b1,b1,b1,b2)";
/// The value the cocycle takes on the witness after normalization.
pub const WITNESS_VALUE: i64 = 5832;

/// Serializable cocycle artifact. Numbers are decimal strings so the JSON
/// form is exact regardless of magnitude.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CocycleVector {
    pub genus: usize,
    pub weight: usize,
    pub seed: u64,
    /// Every prime that contributed a kernel residue.
    pub primes_used: Vec<u64>,
    pub witness: String,
    /// Pairing of the primitive integer kernel with the witness.
    pub raw_witness_value: String,
    /// Primitive integer kernel of `W`, first nonzero entry positive.
    pub integer_kernel: Vec<String>,
    /// `integer_kernel` rescaled so the witness evaluates to 5832.
    pub coefficients: Vec<String>,
}

impl CocycleVector {
    pub fn save(&self, path: &Path) -> Result<(), PipelineError> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_vec_pretty(self)?)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }
}

/// A cocycle ready to evaluate: parsed coefficients plus the coordinate
/// columns they refer to.
#[derive(Debug, Clone)]
pub struct Cocycle {
    artifact: CocycleVector,
    kernel: Vec<BigInt>,
    coeffs: Vec<BigRational>,
    sel: SelectedMatchings,
}

impl Cocycle {
    /// Parse an artifact against the coordinate system it was built on.
    pub fn from_artifact(
        artifact: CocycleVector,
        cs: &CoordinateSystem,
    ) -> Result<Self, PipelineError> {
        if artifact.weight != cs.weight {
            return Err(PipelineError::Artifact(format!(
                "cocycle weight {} but coordinate weight {}",
                artifact.weight, cs.weight
            )));
        }
        if artifact.integer_kernel.len() != cs.rank || artifact.coefficients.len() != cs.rank {
            return Err(PipelineError::Artifact(format!(
                "cocycle has {} entries but the coordinate system has rank {}",
                artifact.integer_kernel.len(),
                cs.rank
            )));
        }
        let kernel: Result<Vec<BigInt>, _> = artifact
            .integer_kernel
            .iter()
            .map(|s| s.parse::<BigInt>())
            .collect();
        let kernel = kernel.map_err(|e| PipelineError::Artifact(e.to_string()))?;
        let coeffs: Result<Vec<BigRational>, _> = artifact
            .coefficients
            .iter()
            .map(|s| sympder_linalg::parse_rational(s))
            .collect();
        Ok(Cocycle {
            kernel,
            coeffs: coeffs?,
            sel: cs.selected()?,
            artifact,
        })
    }

    pub fn artifact(&self) -> &CocycleVector {
        &self.artifact
    }

    pub fn kernel(&self) -> &[BigInt] {
        &self.kernel
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn selected(&self) -> &SelectedMatchings {
        &self.sel
    }

    /// The factor taking the primitive integer kernel to the normalized
    /// coefficients: 5832 over the raw witness pairing.
    pub fn scale(&self) -> BigRational {
        let raw: BigInt = self
            .artifact
            .raw_witness_value
            .parse()
            .expect("artifact validated on construction");
        BigRational::new(BigInt::from(WITNESS_VALUE), raw)
    }

    /// Copy with the kernel bumped by one in `column`; the coefficients move
    /// consistently. Control object for mutation tests.
    pub fn mutated(&self, column: usize) -> Cocycle {
        let mut out = self.clone();
        out.kernel[column] += BigInt::one();
        out.coeffs[column] += self.scale();
        out.artifact.integer_kernel[column] = out.kernel[column].to_string();
        out.artifact.coefficients[column] = out.coeffs[column].to_string();
        out
    }

    /// Cocycle value on an expansion of the right degree.
    pub fn eval(&self, e: &Expansion) -> Result<BigRational, PipelineError> {
        let profile = selected_profile(e, &self.sel)?;
        let mut acc = BigRational::zero();
        for (c, &v) in self.coeffs.iter().zip(&profile) {
            if v != 0 {
                acc += c * BigRational::from(BigInt::from(v));
            }
        }
        Ok(acc)
    }

    /// Pairing of the primitive integer kernel with an expansion. Zero on
    /// exactly the same expansions as `eval`.
    pub fn eval_kernel(&self, e: &Expansion) -> Result<BigInt, PipelineError> {
        let profile = selected_profile(e, &self.sel)?;
        let mut acc = BigInt::zero();
        for (c, &v) in self.kernel.iter().zip(&profile) {
            if v != 0 {
                acc += c * BigInt::from(v);
            }
        }
        Ok(acc)
    }
}

/// One normalized kernel vector of `w` modulo `p`, or `None` when `p` is
/// unlucky (kernel dimension off, or the reference entry vanishes).
fn kernel_mod(w: &WMatrix, p: u64, reference: Option<usize>) -> Option<(usize, Vec<u64>)> {
    let ns = nullspace_mod(&w.sparse_mod(p));
    if ns.len() != 1 {
        return None;
    }
    let mut v = ns.into_iter().next().unwrap();
    let r = match reference {
        Some(r) => r,
        None => v.iter().position(|&x| x != 0)?,
    };
    if v[r] == 0 {
        return None;
    }
    let inv = invmod(v[r], p);
    for x in v.iter_mut() {
        *x = sympder_linalg::modp::mulmod(*x, inv, p);
    }
    Some((r, v))
}

/// CRT-lift the per-prime kernels and attempt rational reconstruction of
/// every coordinate. `None` means more primes are needed.
fn reconstruct(entries: &[(u64, Vec<u64>)], ncols: usize) -> Option<Vec<BigRational>> {
    let mut out = Vec::with_capacity(ncols);
    for j in 0..ncols {
        let residues: Vec<(u64, u64)> = entries.iter().map(|(p, v)| (v[j], *p)).collect();
        let (r, m) = crt_combine(&residues);
        out.push(rational_reconstruct(&r, &m)?);
    }
    Some(out)
}

/// Extract the one-dimensional kernel of `w` as a normalized cocycle.
///
/// Fails with the observed corank when it is not one, escalates through
/// fallback primes until rational reconstruction succeeds, verifies
/// `W · k = 0` exactly over the integers, and requires the witness pairing
/// to be nonzero before rescaling it to 5832.
pub fn extract_cocycle(
    w: &WMatrix,
    cs: &CoordinateSystem,
    seed: u64,
) -> Result<Cocycle, PipelineError> {
    let corank = w.ncols - w.rank;
    if corank != 1 {
        return Err(PipelineError::CorankNotOne { corank });
    }

    let mut pool: Vec<u64> = w.primes.to_vec();
    pool.extend(
        fallback_primes(192)
            .into_iter()
            .filter(|p| !w.primes.contains(p)),
    );
    let mut pool = pool.into_iter();

    let mut entries: Vec<(u64, Vec<u64>)> = Vec::new();
    let mut reference: Option<usize> = None;
    let mut kernel: Option<Vec<BigRational>> = None;
    let mut target = 2usize;
    while kernel.is_none() {
        while entries.len() < target {
            let p = pool.next().ok_or(PipelineError::PrimeExhaustion {
                primes_used: entries.len(),
            })?;
            if let Some((r, v)) = kernel_mod(w, p, reference) {
                reference = Some(r);
                entries.push((p, v));
            }
        }
        kernel = reconstruct(&entries, w.ncols);
        if kernel.is_none() {
            target *= 2;
            if target > 192 {
                return Err(PipelineError::PrimeExhaustion {
                    primes_used: entries.len(),
                });
            }
        }
    }

    // Clear denominators and content to get the primitive integer kernel.
    let rational = kernel.unwrap();
    let mut denom_lcm = BigInt::one();
    for c in &rational {
        denom_lcm = denom_lcm.lcm(c.denom());
    }
    let mut ints: Vec<BigInt> = rational
        .iter()
        .map(|c| (c * BigRational::from(denom_lcm.clone())).to_integer())
        .collect();
    let mut content = BigInt::zero();
    for v in &ints {
        content = content.gcd(v);
    }
    if content.is_zero() {
        return Err(PipelineError::Artifact("kernel vector is zero".into()));
    }
    let flip = ints
        .iter()
        .find(|v| !v.is_zero())
        .map(|v| v.is_negative())
        .unwrap_or(false);
    if flip {
        content = -content;
    }
    for v in ints.iter_mut() {
        *v = &*v / &content;
    }

    // Exact check: every stored row of W annihilates the integer kernel.
    for (i, row) in w.rows.iter().enumerate() {
        let mut acc = BigInt::zero();
        for (k, &a) in ints.iter().zip(row) {
            if a != 0 {
                acc += k * BigInt::from(a);
            }
        }
        if !acc.is_zero() {
            return Err(PipelineError::KernelCheck { row: i });
        }
    }

    // Witness normalization.
    let witness: Spider = WITNESS_LEGS
        .parse()
        .map_err(|e: sympder_core::CoreError| PipelineError::Artifact(e.to_string()))?;
    let sel = cs.selected()?;
    let wprofile = selected_profile(&witness.expand(), &sel)?;
    let mut raw = BigInt::zero();
    for (k, &v) in ints.iter().zip(&wprofile) {
        if v != 0 {
            raw += k * BigInt::from(v);
        }
    }
    if raw.is_zero() {
        return Err(PipelineError::WitnessVanishes);
    }
    let scale = BigRational::new(BigInt::from(WITNESS_VALUE), raw.clone());
    let coeffs: Vec<BigRational> = ints
        .iter()
        .map(|k| BigRational::from(k.clone()) * &scale)
        .collect();

    let artifact = CocycleVector {
        genus: cs.genus,
        weight: cs.weight,
        seed,
        primes_used: entries.iter().map(|(p, _)| *p).collect(),
        witness: WITNESS_LEGS.to_string(),
        raw_witness_value: raw.to_string(),
        integer_kernel: ints.iter().map(|v| v.to_string()).collect(),
        coefficients: coeffs.iter().map(|c| c.to_string()).collect(),
    };
    Ok(Cocycle {
        artifact,
        kernel: ints,
        coeffs,
        sel,
    })
}

/// Evaluate the cocycle on `count` fresh brackets spread over the given
/// genus range and every split of the weight; all values must vanish.
/// Returns the number of brackets checked; the error names the first
/// offending bracket.
pub fn verify_cocycle_numeric(
    cocycle: &Cocycle,
    genus_range: std::ops::RangeInclusive<usize>,
    count: usize,
    seed: u64,
) -> Result<usize, PipelineError> {
    let weight = cocycle.artifact.weight;
    let genera: Vec<usize> = genus_range.collect();
    let splits: Vec<usize> = (1..=weight / 2).collect();
    let mut samplers: Vec<BracketSampler> = genera
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            BracketSampler::new(
                sympder_core::Genus::new(g).expect("genus range within bounds"),
                weight,
                seed.wrapping_add(i as u64),
            )
        })
        .collect();
    for n in 0..count {
        let which = n % samplers.len();
        let split = splits[(n / samplers.len()) % splits.len()];
        let (p, q) = samplers[which].pair_at_split(split);
        let bracket = spider_bracket(&p, &q)?;
        let value = cocycle.eval_kernel(&bracket.to_expansion())?;
        if !value.is_zero() {
            return Err(PipelineError::Holdout {
                bracket: format!("[{p}, {q}]"),
                value: value.to_string(),
            });
        }
    }
    Ok(count)
}
