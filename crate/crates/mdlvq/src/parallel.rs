//! Parallel simulation driver: chunks fan out over a rayon pool and merge in
//! chunk order, so the result is bit-identical for any worker count.

use rayon::prelude::*;

use mdlvq_core::codec::Codec;
use mdlvq_core::mc::{self, DistanceProfile, McEstimate};
use mdlvq_core::sim::{self, ChunkAccum, ExperimentResult, SimConfig};

use crate::CliError;

/// Build a rayon pool with the requested worker count (0 = rayon default).
pub fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::internal(e.to_string()))
}

pub fn simulate(
    codec: &Codec<'_>,
    cfg: &SimConfig,
    workers: usize,
) -> Result<ExperimentResult, CliError> {
    let chunks = sim::chunk_count(cfg.samples);
    let accums: Result<Vec<ChunkAccum>, CliError> = pool(workers)?.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|k| {
                sim::simulate_chunk(codec, cfg, k).map_err(|e| CliError::internal(e.to_string()))
            })
            .collect()
    });
    let accums = accums?;
    Ok(sim::merge_chunks(codec, cfg, &accums))
}

pub fn intersection_oracle(
    l: usize,
    profile: DistanceProfile,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<McEstimate, CliError> {
    let chunks = samples.div_ceil(mc::CHUNK_LEN);
    let partials: Vec<(u64, u64)> = pool(workers)?.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|k| mc::intersection_oracle_chunk(l, profile, samples, seed, k))
            .collect()
    });
    let mut hits = 0;
    let mut count = 0;
    for (h, c) in partials {
        hits += h;
        count += c;
    }
    Ok(mc::finish_oracle(l, profile, hits, count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use mdlvq_core::labeling::build_labeling;
    use mdlvq_core::lattice::LatticeSpec;
    use mdlvq_core::nested::{NestedSystem, ProductRule, SimilarityKind};
    use mdlvq_core::sim::SourceSpec;
    use mdlvq_core::weights::WeightProfile;

    #[test]
    fn worker_count_does_not_change_results() {
        let sys = NestedSystem::build(
            LatticeSpec::with_scale(mdlvq_core::lattice::LatticeName::Integer, 1, 0.05).unwrap(),
            &[SimilarityKind::Scalar(4), SimilarityKind::Scalar(5)],
            &[1.0, 1.0],
            ProductRule::Deduplicated,
        )
        .unwrap();
        let profile = WeightProfile::two_channel(1.0, 1.0).unwrap();
        let lab = build_labeling(&sys, &profile, 1 << 24).unwrap();
        let codec = Codec::new(&lab, profile).unwrap();
        let cfg = SimConfig {
            source: SourceSpec::Gaussian { variance: 1.0 },
            samples: 200_000,
            seed: 3,
        };
        let a = simulate(&codec, &cfg, 1).unwrap();
        let b = simulate(&codec, &cfg, 4).unwrap();
        for (x, y) in a.patterns.iter().zip(&b.patterns) {
            assert_eq!(x.empirical_mse.to_bits(), y.empirical_mse.to_bits());
        }
        let oa = intersection_oracle(3, DistanceProfile::ShellCount, 1_000_000, 9, 1).unwrap();
        let ob = intersection_oracle(3, DistanceProfile::ShellCount, 1_000_000, 9, 4).unwrap();
        assert_eq!(oa.value.to_bits(), ob.value.to_bits());
    }
}
