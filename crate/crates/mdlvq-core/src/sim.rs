//! Monte-Carlo measurement of rates and distortions over a labeling.
//!
//! The sample stream is split into fixed-size chunks; `simulate_chunk` is a
//! pure function of (config, chunk index) and `merge_chunks` folds partial
//! accumulators in chunk order, so results are identical for any degree of
//! parallelism.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::analysis;
use crate::codec::{Codec, CodecError};
use crate::labeling::pattern_order;
use crate::rng::{Stream, StreamKind};
use crate::vecmath;
use crate::weights::{mask_label, Mask};

pub const CHUNK_LEN: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SourceSpec {
    Gaussian { variance: f64 },
}

impl SourceSpec {
    /// Differential entropy in bits per source vector of dimension `l`.
    pub fn entropy_bits(&self, l: usize) -> f64 {
        match self {
            SourceSpec::Gaussian { variance } => {
                let tpe = 2.0 * core::f64::consts::PI * core::f64::consts::E;
                l as f64 / 2.0 * libm::log2(tpe * variance)
            }
        }
    }

    pub fn fill(&self, stream: &mut Stream, out: &mut [f64]) {
        match self {
            SourceSpec::Gaussian { variance } => {
                stream.fill_normal(out);
                let s = libm::sqrt(*variance);
                for v in out.iter_mut() {
                    *v *= s;
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SimConfig {
    pub source: SourceSpec,
    pub samples: u64,
    pub seed: u64,
}

/// Per-chunk partial sums. Merging is associative and order-fixed.
#[derive(Clone, Debug)]
pub struct ChunkAccum {
    pub chunk: u64,
    pub count: u64,
    /// Sum of per-dimension squared errors per pattern (pattern_order).
    pub sse: Vec<f64>,
    /// Per description: (product translate, rep index) -> count.
    pub symbol_counts: Vec<BTreeMap<(Vec<i64>, u32), u64>>,
}

/// Simulate one chunk of the sample stream.
pub fn simulate_chunk(codec: &Codec<'_>, cfg: &SimConfig, chunk: u64) -> Result<ChunkAccum, CodecError> {
    let system = codec.labeling().system();
    let n = system.descriptions();
    let dim = system.dim();
    let patterns = pattern_order(n);

    let start = chunk * CHUNK_LEN;
    let len = CHUNK_LEN.min(cfg.samples.saturating_sub(start));
    let mut stream = Stream::new(cfg.seed, StreamKind::Source, chunk);
    let mut x = vec![0.0; dim];
    let mut sse = vec![0.0; patterns.len()];
    let mut symbol_counts: Vec<BTreeMap<(Vec<i64>, u32), u64>> = vec![BTreeMap::new(); n];

    for _ in 0..len {
        cfg.source.fill(&mut stream, &mut x);
        let frame = codec.encode(&x)?;
        for (pi, &pattern) in patterns.iter().enumerate() {
            let xhat = codec.decode(&frame, pattern)?;
            sse[pi] += vecmath::dist_nsq(&x, &xhat);
        }
        for i in 0..n {
            let key = (frame.side_translates[i].clone(), frame.side_indices[i]);
            *symbol_counts[i].entry(key).or_insert(0) += 1;
        }
    }
    Ok(ChunkAccum { chunk, count: len, sse, symbol_counts })
}

pub fn chunk_count(samples: u64) -> u64 {
    samples.div_ceil(CHUNK_LEN)
}

#[derive(Clone, Debug)]
pub struct PatternResult {
    pub pattern: Mask,
    pub label: String,
    pub samples: u64,
    pub empirical_mse: f64,
    pub theory_mse: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub seed: u64,
    pub samples: u64,
    pub patterns: Vec<PatternResult>,
    /// Full-reception (central) distortion; identical to the all-pattern row.
    pub central_mse: f64,
    pub central_theory: f64,
    /// Plug-in entropy of each description's (translate, index) symbols,
    /// bits per dimension.
    pub side_entropy_bits_per_dim: Vec<f64>,
    pub side_rate_theory: Vec<f64>,
    pub central_rate_theory: f64,
    /// Filled by drivers that can observe a clock; never serialized.
    pub wall_clock_ms: Option<u64>,
}

/// Fold chunk accumulators (must cover chunks `0..chunk_count` in order)
/// into the final result with theory attached.
pub fn merge_chunks(
    codec: &Codec<'_>,
    cfg: &SimConfig,
    accums: &[ChunkAccum],
) -> ExperimentResult {
    let system = codec.labeling().system();
    let n = system.descriptions();
    let l = system.dim();
    let patterns = pattern_order(n);

    let mut sse = vec![0.0; patterns.len()];
    let mut counts: Vec<BTreeMap<(Vec<i64>, u32), u64>> = vec![BTreeMap::new(); n];
    let mut total = 0u64;
    for (k, acc) in accums.iter().enumerate() {
        debug_assert_eq!(acc.chunk, k as u64);
        total += acc.count;
        for (a, b) in sse.iter_mut().zip(&acc.sse) {
            *a += b;
        }
        for i in 0..n {
            for (key, c) in &acc.symbol_counts[i] {
                *counts[i].entry(key.clone()).or_insert(0) += c;
            }
        }
    }

    let h = cfg.source.entropy_bits(l);
    let nu_c = system.central().cell_volume();
    let g_central = system.central().second_moment();
    let central_theory = analysis::central_distortion(g_central, l, nu_c);
    let n_idx: Vec<u64> = system.subs().iter().map(|s| s.index()).collect();
    let (rc, ri) = analysis::rates(h, l, nu_c, &n_idx, system.mu());

    let theory = theory_per_pattern(codec, h);
    let full: Mask = (1 << n) - 1;
    let mut pattern_results = Vec::with_capacity(patterns.len());
    let mut central_mse = 0.0;
    for (pi, &pattern) in patterns.iter().enumerate() {
        let mse = sse[pi] / total.max(1) as f64;
        if pattern == full {
            central_mse = mse;
        }
        pattern_results.push(PatternResult {
            pattern,
            label: mask_label(pattern),
            samples: total,
            empirical_mse: mse,
            theory_mse: theory.get(&pattern).copied(),
        });
    }

    let side_entropy = counts
        .iter()
        .map(|m| plug_in_entropy_bits(m) / l as f64)
        .collect();

    ExperimentResult {
        seed: cfg.seed,
        samples: total,
        patterns: pattern_results,
        central_mse,
        central_theory,
        side_entropy_bits_per_dim: side_entropy,
        side_rate_theory: ri,
        central_rate_theory: rc,
        wall_clock_ms: None,
    }
}

/// Closed-form predictions where available: two- and odd-L three-description
/// side distortions, and the central distortion for the full pattern.
pub fn theory_per_pattern(codec: &Codec<'_>, _h: f64) -> BTreeMap<Mask, f64> {
    let system = codec.labeling().system();
    let profile = codec.profile();
    let n = system.descriptions();
    let l = system.dim();
    let nu_c = system.central().cell_volume();
    let mut out = BTreeMap::new();
    let full: Mask = (1 << n) - 1;
    out.insert(full, analysis::central_distortion(system.central().second_moment(), l, nu_c));
    if n == 2 {
        let g0 = profile.gamma(0b01);
        let g1 = profile.gamma(0b10);
        let (d0, d1) = analysis::side_distortion_two(
            g0,
            g1,
            l,
            nu_c,
            system.sub(0).index(),
            system.sub(1).index(),
            profile.mu()[0],
            profile.mu()[1],
        );
        out.insert(0b01, d0);
        out.insert(0b10, d1);
    } else if n == 3 {
        let n_idx = [system.sub(0).index(), system.sub(1).index(), system.sub(2).index()];
        if let Ok(map) = analysis::side_distortion_three(profile, l, nu_c, &n_idx) {
            for (m, d) in map {
                out.insert(m, d);
            }
        }
    }
    out
}

/// Plug-in (empirical) entropy of a symbol histogram, in bits.
pub fn plug_in_entropy_bits(counts: &BTreeMap<(Vec<i64>, u32), u64>) -> f64 {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return 0.0;
    }
    let tf = total as f64;
    let mut h = 0.0;
    for &c in counts.values() {
        if c > 0 {
            let p = c as f64 / tf;
            h -= p * libm::log2(p);
        }
    }
    h
}

/// Sequential driver: all chunks in order.
pub fn simulate(codec: &Codec<'_>, cfg: &SimConfig) -> Result<ExperimentResult, CodecError> {
    let mut accums = Vec::new();
    for chunk in 0..chunk_count(cfg.samples) {
        accums.push(simulate_chunk(codec, cfg, chunk)?);
    }
    Ok(merge_chunks(codec, cfg, &accums))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::build_labeling;
    use crate::lattice::LatticeSpec;
    use crate::nested::{NestedSystem, ProductRule, SimilarityKind};
    use crate::weights::WeightProfile;

    fn scalar_two_channel(scale: f64, n0: i64, n1: i64) -> (NestedSystem, WeightProfile) {
        let sys = NestedSystem::build(
            LatticeSpec::with_scale(crate::lattice::LatticeName::Integer, 1, scale).unwrap(),
            &[SimilarityKind::Scalar(n0), SimilarityKind::Scalar(n1)],
            &[1.0, 1.0],
            ProductRule::Deduplicated,
        )
        .unwrap();
        (sys, WeightProfile::two_channel(1.0, 1.0).unwrap())
    }

    #[test]
    fn central_distortion_tracks_uniform_high_rate() {
        let delta = 0.01;
        let (sys, profile) = scalar_two_channel(delta, 4, 5);
        let lab = build_labeling(&sys, &profile, 1 << 24).unwrap();
        let codec = Codec::new(&lab, profile).unwrap();
        let cfg = SimConfig { source: SourceSpec::Gaussian { variance: 1.0 }, samples: 1_000_000, seed: 5 };
        let res = simulate(&codec, &cfg).unwrap();
        let expect = delta * delta / 12.0;
        assert!((res.central_mse / expect - 1.0).abs() < 0.01, "{} vs {expect}", res.central_mse);
        // the all-received row equals the central row exactly
        let full = res.patterns.iter().find(|p| p.pattern == 0b11).unwrap();
        assert_eq!(full.empirical_mse, res.central_mse);
    }

    #[test]
    fn deterministic_across_chunking() {
        let (sys, profile) = scalar_two_channel(0.05, 4, 5);
        let lab = build_labeling(&sys, &profile, 1 << 24).unwrap();
        let codec = Codec::new(&lab, profile).unwrap();
        let cfg = SimConfig { source: SourceSpec::Gaussian { variance: 1.0 }, samples: 150_000, seed: 11 };
        let a = simulate(&codec, &cfg).unwrap();
        // merge in two stages to mimic a parallel driver
        let accums: Vec<ChunkAccum> =
            (0..chunk_count(cfg.samples)).map(|k| simulate_chunk(&codec, &cfg, k).unwrap()).collect();
        let b = merge_chunks(&codec, &cfg, &accums);
        for (x, y) in a.patterns.iter().zip(&b.patterns) {
            assert_eq!(x.empirical_mse.to_bits(), y.empirical_mse.to_bits());
        }
        for (x, y) in a.side_entropy_bits_per_dim.iter().zip(&b.side_entropy_bits_per_dim) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn source_moments_in_band() {
        let mut stream = Stream::new(3, StreamKind::Source, 0);
        let spec = SourceSpec::Gaussian { variance: 2.5 };
        let n = 400_000usize;
        let mut buf = vec![0.0; 2];
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..n / 2 {
            spec.fill(&mut stream, &mut buf);
            sum += buf[0] + buf[1];
            sq += buf[0] * buf[0] + buf[1] * buf[1];
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        let se_mean = libm::sqrt(2.5 / n as f64);
        assert!(mean.abs() < 3.0 * se_mean, "{mean}");
        assert!((var - 2.5).abs() < 3.0 * 2.5 * libm::sqrt(2.0 / n as f64), "{var}");
        assert!((spec.entropy_bits(1) - 0.5 * libm::log2(2.0 * core::f64::consts::PI * core::f64::consts::E * 2.5)).abs() < 1e-12);
    }

    #[test]
    fn plug_in_entropy_basics() {
        let mut counts = BTreeMap::new();
        counts.insert((vec![0i64], 0u32), 1u64);
        counts.insert((vec![0i64], 1u32), 1u64);
        assert!((plug_in_entropy_bits(&counts) - 1.0).abs() < 1e-12);
    }
}
