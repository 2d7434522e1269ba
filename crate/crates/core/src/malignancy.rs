//! Malignant location sets: exhaustive counts and Monte-Carlo estimates.
//!
//! A set of `k` locations is malignant when some assignment of one
//! nontrivial fault to each of its locations makes the exRec incorrect.
//! Exact counts enumerate all `C(L, k)` sets in colex order, split into
//! chunks that can be checkpointed and run in parallel. Monte-Carlo runs
//! draw uniform `k`-subsets in fixed-size blocks, each block with its own
//! ChaCha stream, so a report depends only on the seed and sample count.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuits::{text, Circuit, ExRec, OpKind};
use crate::error::{Error, Result};
use crate::faultsim::{exrec_correct, CompiledCircuit, FaultAction, FaultAssignment, Scratch};
use crate::pauli::Pauli1;

pub const TOOL_VERSION: &str = concat!("bsft ", env!("CARGO_PKG_VERSION"));

/// Samples per Monte-Carlo block. Fixed so that reports only depend on the
/// seed and the sample count.
pub const MC_BLOCK: u64 = 4096;

/// Default cap on the estimated number of fault-assignment evaluations.
pub const DEFAULT_MAX_COST: f64 = 5e10;

/// `C(n, k)`, or `None` on overflow.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Colex rank of a strictly increasing index list.
pub fn colex_rank(set: &[usize]) -> u128 {
    set.iter()
        .enumerate()
        .map(|(i, &c)| binomial(c, i + 1).expect("rank fits in u128"))
        .sum()
}

/// Inverse of [`colex_rank`].
pub fn colex_unrank(mut rank: u128, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for i in (0..k).rev() {
        // largest c with C(c, i + 1) <= rank
        let mut c = i;
        while binomial(c + 1, i + 1).expect("rank fits in u128") <= rank {
            c += 1;
        }
        out[i] = c;
        rank -= binomial(c, i + 1).expect("rank fits in u128");
    }
    out
}

/// Advances `set` to its colex successor among subsets of `0..n`.
/// Returns `false` after the last subset.
pub fn colex_next(set: &mut [usize], n: usize) -> bool {
    let k = set.len();
    for i in 0..k {
        let limit = if i + 1 < k { set[i + 1] } else { n };
        if set[i] + 1 < limit {
            set[i] += 1;
            for (j, s) in set.iter_mut().enumerate().take(i) {
                *s = j;
            }
            return true;
        }
    }
    false
}

/// SHA-256 of the circuit's text dump, hex encoded.
pub fn circuit_hash(c: &Circuit) -> String {
    Sha256::digest(text::dump(c).as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Exact count or Monte-Carlo estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    Exact {
        malignant_count: u128,
    },
    MonteCarlo {
        samples: u64,
        malignant_samples: u64,
        f_hat: f64,
        sigma: f64,
        /// One seed per pooled shard.
        seeds: Vec<u64>,
        /// No malignant sample was seen; `f_hat` only bounds the fraction.
        upper_bound_only: bool,
    },
}

impl Estimate {
    /// Monte-Carlo estimate from pooled counts.
    pub fn monte_carlo(samples: u64, malignant_samples: u64, seeds: Vec<u64>) -> Self {
        let f = if samples == 0 {
            0.0
        } else {
            malignant_samples as f64 / samples as f64
        };
        let sigma = if samples == 0 {
            0.0
        } else {
            (f * (1.0 - f) / samples as f64).sqrt()
        };
        Estimate::MonteCarlo {
            samples,
            malignant_samples,
            f_hat: f,
            sigma,
            seeds,
            upper_bound_only: malignant_samples == 0,
        }
    }
}

/// Result of a malignancy analysis at one order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MalignancyReport {
    pub tool_version: String,
    pub circuit_hash: String,
    pub exrec: String,
    pub locations: usize,
    pub order: usize,
    pub total_sets: u128,
    pub method: Estimate,
}

impl MalignancyReport {
    pub fn is_exact(&self) -> bool {
        matches!(self.method, Estimate::Exact { .. })
    }

    /// Malignant fraction (exact, or the point estimate).
    pub fn fraction(&self) -> f64 {
        match &self.method {
            Estimate::Exact { malignant_count } => {
                if self.total_sets == 0 {
                    0.0
                } else {
                    *malignant_count as f64 / self.total_sets as f64
                }
            }
            Estimate::MonteCarlo { f_hat, .. } => *f_hat,
        }
    }

    /// Standard error of the fraction; zero for exact counts.
    pub fn sigma(&self) -> f64 {
        match &self.method {
            Estimate::Exact { .. } => 0.0,
            Estimate::MonteCarlo { sigma, .. } => *sigma,
        }
    }

    /// Estimated number of malignant sets, `f · C(L, k)`.
    pub fn alpha(&self) -> f64 {
        match &self.method {
            Estimate::Exact { malignant_count } => *malignant_count as f64,
            Estimate::MonteCarlo { f_hat, .. } => f_hat * self.total_sets as f64,
        }
    }

    /// Pools two Monte-Carlo shards of the same circuit and order.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.circuit_hash != other.circuit_hash || self.order != other.order {
            return Err(Error::InvalidParameter(
                "reports describe different circuits or orders".into(),
            ));
        }
        match (&self.method, &other.method) {
            (
                Estimate::MonteCarlo {
                    samples: n1,
                    malignant_samples: m1,
                    seeds: s1,
                    ..
                },
                Estimate::MonteCarlo {
                    samples: n2,
                    malignant_samples: m2,
                    seeds: s2,
                    ..
                },
            ) => {
                let mut seeds = s1.clone();
                seeds.extend(s2);
                Ok(Self {
                    method: Estimate::monte_carlo(n1 + n2, m1 + m2, seeds),
                    ..self.clone()
                })
            }
            (Estimate::Exact { .. }, Estimate::Exact { .. }) if self == other => Ok(self.clone()),
            _ => Err(Error::InvalidParameter(
                "only Monte-Carlo shards (or identical exact reports) can be merged".into(),
            )),
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// How a long analysis is run.
#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Worker threads; 0 means all available cores.
    pub jobs: usize,
    /// Sets per chunk for exact enumeration.
    pub chunk_size: u64,
    /// Directory for chunk checkpoints.
    pub checkpoint: Option<PathBuf>,
    /// Stop with [`Error::Interrupted`] after this many new chunks.
    pub stop_after_chunks: Option<usize>,
    /// Refuse runs whose estimated evaluation count exceeds this.
    pub max_cost: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            jobs: 0,
            chunk_size: 1 << 16,
            checkpoint: None,
            stop_after_chunks: None,
            max_cost: DEFAULT_MAX_COST,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Manifest {
    tool_version: String,
    circuit_hash: String,
    exrec: String,
    order: usize,
    kind: String,
    items: u128,
    chunk_size: u64,
    seed: Option<u64>,
    chunks: u64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
struct ChunkRecord {
    index: u64,
    items: u64,
    malignant: u64,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn chunk_path(dir: &Path, i: u64) -> PathBuf {
    dir.join(format!("chunk-{i:08}.json"))
}

/// Loads or creates the checkpoint directory; returns finished chunks.
fn open_checkpoint(dir: &Path, manifest: &Manifest) -> Result<Vec<Option<ChunkRecord>>> {
    fs::create_dir_all(dir)?;
    let mpath = dir.join("manifest.json");
    if mpath.exists() {
        let old: Manifest = serde_json::from_str(&fs::read_to_string(&mpath)?)?;
        if &old != manifest {
            return Err(Error::Checkpoint(format!(
                "{} belongs to a different run ({} order {} {})",
                dir.display(),
                old.exrec,
                old.order,
                old.kind
            )));
        }
    } else {
        write_atomic(&mpath, &serde_json::to_vec_pretty(manifest)?)?;
    }
    let mut done = vec![None; manifest.chunks as usize];
    for (i, slot) in done.iter_mut().enumerate() {
        let p = chunk_path(dir, i as u64);
        if p.exists() {
            let rec: ChunkRecord = serde_json::from_str(&fs::read_to_string(&p)?)
                .map_err(|e| Error::Checkpoint(format!("{}: {e}", p.display())))?;
            if rec.index != i as u64 {
                return Err(Error::Checkpoint(format!(
                    "{} has index {}",
                    p.display(),
                    rec.index
                )));
            }
            *slot = Some(rec);
        }
    }
    Ok(done)
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs == 1 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs every chunk not yet on disk and returns the per-chunk records.
fn run_chunks<F>(manifest: &Manifest, opts: &RunOptions, work: F) -> Result<Vec<ChunkRecord>>
where
    F: Fn(u64, &mut Scratch) -> ChunkRecord + Sync,
{
    let mut done = match &opts.checkpoint {
        Some(dir) => open_checkpoint(dir, manifest)?,
        None => vec![None; manifest.chunks as usize],
    };
    let todo: Vec<u64> = (0..manifest.chunks)
        .filter(|&i| done[i as usize].is_none())
        .collect();
    let limit = opts.stop_after_chunks.unwrap_or(usize::MAX);
    let claimed = AtomicUsize::new(0);
    let run_one = |i: u64, scratch: &mut Scratch| -> Result<Option<ChunkRecord>> {
        if claimed.fetch_add(1, Ordering::SeqCst) >= limit {
            return Ok(None);
        }
        let rec = work(i, scratch);
        if let Some(dir) = &opts.checkpoint {
            write_atomic(&chunk_path(dir, i), &serde_json::to_vec(&rec)?)?;
        }
        Ok(Some(rec))
    };
    let results: Vec<Result<Option<ChunkRecord>>> = with_pool(opts.jobs, || {
        if opts.jobs == 1 {
            let mut scratch = Scratch::default();
            todo.iter().map(|&i| run_one(i, &mut scratch)).collect()
        } else {
            todo.par_iter()
                .map_init(Scratch::default, |scratch, &i| run_one(i, scratch))
                .collect()
        }
    })?;
    for (rec, &i) in results.into_iter().zip(&todo) {
        if let Some(r) = rec? {
            done[i as usize] = Some(r);
        }
    }
    let finished = done.iter().filter(|d| d.is_some()).count();
    if finished < done.len() {
        return Err(Error::Interrupted(finished));
    }
    Ok(done
        .into_iter()
        .map(|d| d.expect("all chunks finished"))
        .collect())
}

/// Precompiled exRec ready for malignancy analysis.
#[derive(Clone, Debug)]
pub struct Analyzer {
    compiled: CompiledCircuit,
    descriptor: String,
    hash: String,
}

impl Analyzer {
    pub fn new(exrec: &ExRec) -> Result<Self> {
        Ok(Self {
            compiled: CompiledCircuit::for_exrec(exrec)?,
            descriptor: exrec.descriptor(),
            hash: circuit_hash(exrec.circuit()),
        })
    }

    /// Analyzer for a plain circuit whose outputs must decode to the
    /// fault-free result.
    pub fn from_circuit(c: &Circuit, descriptor: impl Into<String>) -> Result<Self> {
        Ok(Self {
            compiled: CompiledCircuit::new(c)?,
            descriptor: descriptor.into(),
            hash: circuit_hash(c),
        })
    }

    pub fn num_locations(&self) -> usize {
        self.compiled.num_locations()
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn circuit_hash(&self) -> &str {
        &self.hash
    }

    pub fn compiled(&self) -> &CompiledCircuit {
        &self.compiled
    }

    fn normalize(&self, locations: &[usize]) -> Result<Vec<usize>> {
        let mut v = locations.to_vec();
        v.sort_unstable();
        v.dedup();
        if let Some(&bad) = v.iter().find(|&&l| l >= self.num_locations()) {
            return Err(Error::UnknownId {
                kind: "location",
                id: bad,
            });
        }
        Ok(v)
    }

    /// A failing assignment supported exactly on `locations`, if any.
    pub fn witness(&self, locations: &[usize]) -> Result<Option<FaultAssignment>> {
        let locs = self.normalize(locations)?;
        let mut scratch = Scratch::default();
        match self.compiled.find_failure(&locs, &mut scratch) {
            Some(choice) => Ok(Some(self.compiled.assignment(&locs, &choice)?)),
            None => Ok(None),
        }
    }

    pub fn is_malignant(&self, locations: &[usize]) -> Result<bool> {
        Ok(self.witness(locations)?.is_some())
    }

    fn total_sets(&self, k: usize) -> Result<u128> {
        binomial(self.num_locations(), k).ok_or_else(|| {
            Error::ResourceGuard(format!("C({}, {k}) overflows", self.num_locations()))
        })
    }

    /// Expected number of fault-assignment evaluations for an exact run at
    /// order `k`, assuming no early exits.
    pub fn estimated_cost(&self, k: usize) -> f64 {
        let l = self.num_locations();
        let mean = (0..l)
            .map(|i| self.compiled.num_actions(i) as f64)
            .sum::<f64>()
            / l.max(1) as f64;
        binomial(l, k).map_or(f64::INFINITY, |c| c as f64) * mean.powi(k as i32)
    }

    fn report(&self, k: usize, total_sets: u128, method: Estimate) -> MalignancyReport {
        MalignancyReport {
            tool_version: TOOL_VERSION.to_string(),
            circuit_hash: self.hash.clone(),
            exrec: self.descriptor.clone(),
            locations: self.num_locations(),
            order: k,
            total_sets,
            method,
        }
    }

    /// Counts every malignant set of `k` locations.
    pub fn enumerate_exact(&self, k: usize, opts: &RunOptions) -> Result<MalignancyReport> {
        if k == 0 {
            return Err(Error::InvalidParameter("order must be at least 1".into()));
        }
        let total = self.total_sets(k)?;
        let cost = self.estimated_cost(k);
        if cost > opts.max_cost {
            return Err(Error::ResourceGuard(format!(
                "exact order-{k} analysis of {} needs about {cost:.2e} evaluations over {total} sets (limit {:.2e})",
                self.descriptor, opts.max_cost
            )));
        }
        let chunk = opts.chunk_size.max(1);
        let chunks = total.div_ceil(chunk as u128);
        let chunks =
            u64::try_from(chunks).map_err(|_| Error::ResourceGuard("too many chunks".into()))?;
        let manifest = Manifest {
            tool_version: TOOL_VERSION.to_string(),
            circuit_hash: self.hash.clone(),
            exrec: self.descriptor.clone(),
            order: k,
            kind: "exact".into(),
            items: total,
            chunk_size: chunk,
            seed: None,
            chunks,
        };
        let l = self.num_locations();
        let records = run_chunks(&manifest, opts, |i, scratch| {
            let start = i as u128 * chunk as u128;
            let end = (start + chunk as u128).min(total);
            let mut set = colex_unrank(start, k);
            let mut malignant = 0u64;
            for r in start..end {
                if self.compiled.is_malignant(&set, scratch) {
                    malignant += 1;
                }
                if r + 1 < end {
                    colex_next(&mut set, l);
                }
            }
            ChunkRecord {
                index: i,
                items: (end - start) as u64,
                malignant,
            }
        })?;
        let count: u128 = records.iter().map(|r| r.malignant as u128).sum();
        Ok(self.report(
            k,
            total,
            Estimate::Exact {
                malignant_count: count,
            },
        ))
    }

    /// Estimates the malignant fraction from `samples` uniform `k`-subsets.
    pub fn sample_mc(
        &self,
        k: usize,
        samples: u64,
        seed: u64,
        opts: &RunOptions,
    ) -> Result<MalignancyReport> {
        if k == 0 || k > self.num_locations() {
            return Err(Error::InvalidParameter(format!(
                "order {k} out of range 1..={}",
                self.num_locations()
            )));
        }
        if samples == 0 {
            return Err(Error::InvalidParameter("need at least one sample".into()));
        }
        let total = self.total_sets(k)?;
        let manifest = Manifest {
            tool_version: TOOL_VERSION.to_string(),
            circuit_hash: self.hash.clone(),
            exrec: self.descriptor.clone(),
            order: k,
            kind: "monte_carlo".into(),
            items: samples as u128,
            chunk_size: MC_BLOCK,
            seed: Some(seed),
            chunks: samples.div_ceil(MC_BLOCK),
        };
        let l = self.num_locations();
        let records = run_chunks(&manifest, opts, |b, scratch| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let items = MC_BLOCK.min(samples - b * MC_BLOCK);
            let mut malignant = 0u64;
            let mut set = Vec::with_capacity(k);
            for _ in 0..items {
                set.clear();
                set.extend(index::sample(&mut rng, l, k).iter());
                set.sort_unstable();
                if self.compiled.is_malignant(&set, scratch) {
                    malignant += 1;
                }
            }
            ChunkRecord {
                index: b,
                items,
                malignant,
            }
        })?;
        let hits: u64 = records.iter().map(|r| r.malignant).sum();
        Ok(self.report(k, total, Estimate::monte_carlo(samples, hits, vec![seed])))
    }
}

/// Every nontrivial fault action of an op kind, without reductions.
pub fn full_action_set(kind: OpKind) -> Vec<FaultAction> {
    use Pauli1::*;
    match kind {
        OpKind::MeasZ | OpKind::MeasX => vec![FaultAction::Flip],
        OpKind::Cnot => [I, X, Y, Z]
            .iter()
            .flat_map(|&a| [I, X, Y, Z].map(move |b| FaultAction::Pair(a, b)))
            .filter(|f| !f.is_identity())
            .collect(),
        _ => vec![
            FaultAction::Single(X),
            FaultAction::Single(Y),
            FaultAction::Single(Z),
        ],
    }
}

/// Reference check by direct frame propagation over the full action set.
/// Slow; intended for cross-validation.
pub fn is_malignant_naive(exrec: &ExRec, locations: &[usize]) -> Result<bool> {
    let c = exrec.circuit();
    let mut locs = locations.to_vec();
    locs.sort_unstable();
    locs.dedup();
    let actions = locs
        .iter()
        .map(|&l| Ok(full_action_set(c.op_at(l)?.kind)))
        .collect::<Result<Vec<_>>>()?;
    let mut idx = vec![0usize; locs.len()];
    loop {
        let mut a = FaultAssignment::new();
        for (j, &l) in locs.iter().enumerate() {
            a.insert(l, actions[j][idx[j]])?;
        }
        if !exrec_correct(exrec, &a)? {
            return Ok(true);
        }
        let mut j = 0;
        loop {
            if j == locs.len() {
                return Ok(false);
            }
            idx[j] += 1;
            if idx[j] < actions[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}
