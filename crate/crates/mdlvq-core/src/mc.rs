//! Monte-Carlo geometry oracles: sphere-intersection shell integrals (the
//! independent check of the closed-form constants) and normalized second
//! moments of lattice cells. Chunked and deterministic like the simulator.

use alloc::vec;
use alloc::vec::Vec;

use crate::lattice::{unit_sphere_volume, LatticeSpec};
use crate::rng::{Stream, StreamKind};
use crate::vecmath;

pub const CHUNK_LEN: u64 = 1 << 18;

/// What to integrate over the two-unit-sphere geometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DistanceProfile {
    /// Plain intersection volume of two unit spheres centered `b` apart.
    Fixed(f64),
    /// Shell-integrated count form: centers distributed over the sphere
    /// shells, yielding the count-form constant.
    ShellCount,
    /// Shell-integrated squared-distance form, yielding the weighted
    /// constant.
    ShellSecondMoment,
}

#[derive(Clone, Copy, Debug)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

struct BernoulliAccum {
    hits: u64,
    count: u64,
}

fn oracle_chunk(l: usize, profile: DistanceProfile, seed: u64, chunk: u64, len: u64) -> BernoulliAccum {
    let mut stream = Stream::new(seed, StreamKind::Oracle, chunk);
    let mut dir = vec![0.0; l];
    let mut hits = 0u64;
    for _ in 0..len {
        // uniform point in the unit ball
        stream.fill_normal(&mut dir);
        let norm = libm::sqrt(vecmath::dot(&dir, &dir)).max(1e-300);
        let radius = libm::pow(stream.uniform(), 1.0 / l as f64);
        let scale = radius / norm;
        // center distance by profile
        let b = match profile {
            DistanceProfile::Fixed(b) => b,
            DistanceProfile::ShellCount => libm::pow(stream.uniform(), 1.0 / l as f64),
            DistanceProfile::ShellSecondMoment => {
                libm::pow(stream.uniform(), 1.0 / (l as f64 + 2.0))
            }
        };
        // membership in the sphere centered at b*e1
        let mut d2 = 0.0;
        for (k, v) in dir.iter().enumerate() {
            let x = v * scale - if k == 0 { b } else { 0.0 };
            d2 += x * x;
        }
        if d2 <= 1.0 {
            hits += 1;
        }
    }
    BernoulliAccum { hits, count: len }
}

/// Monte-Carlo estimate of intersection geometry. `Fixed(b)` estimates the
/// plain lens volume; the shell profiles estimate the closed-form constants
/// checked against `analysis::beta_l` / `analysis::beta_tilde_l`.
pub fn intersection_oracle(
    l: usize,
    profile: DistanceProfile,
    samples: u64,
    seed: u64,
) -> McEstimate {
    assert!(l >= 1);
    let chunks = samples.div_ceil(CHUNK_LEN);
    let mut hits = 0u64;
    let mut count = 0u64;
    for chunk in 0..chunks {
        let len = CHUNK_LEN.min(samples - chunk * CHUNK_LEN);
        let acc = oracle_chunk(l, profile, seed, chunk, len);
        hits += acc.hits;
        count += acc.count;
    }
    finish_oracle(l, profile, hits, count)
}

/// Partial computation for parallel drivers.
pub fn intersection_oracle_chunk(
    l: usize,
    profile: DistanceProfile,
    samples: u64,
    seed: u64,
    chunk: u64,
) -> (u64, u64) {
    let start = chunk * CHUNK_LEN;
    let len = CHUNK_LEN.min(samples.saturating_sub(start));
    let acc = oracle_chunk(l, profile, seed, chunk, len);
    (acc.hits, acc.count)
}

pub fn finish_oracle(l: usize, profile: DistanceProfile, hits: u64, count: u64) -> McEstimate {
    let p = hits as f64 / count.max(1) as f64;
    let se_p = libm::sqrt(p * (1.0 - p) / count.max(1) as f64);
    let lf = l as f64;
    let coef = match profile {
        DistanceProfile::Fixed(_) => unit_sphere_volume(l),
        DistanceProfile::ShellCount => {
            (lf + 1.0) * unit_sphere_volume(l)
                / (2.0 * lf * omega_lower(l))
        }
        DistanceProfile::ShellSecondMoment => {
            (lf + 1.0) * unit_sphere_volume(l)
                / (2.0 * (lf + 2.0) * omega_lower(l))
        }
    };
    McEstimate { value: coef * p, std_error: coef * se_p, samples: count }
}

fn omega_lower(l: usize) -> f64 {
    if l == 1 {
        1.0 // zero-dimensional unit sphere volume
    } else {
        unit_sphere_volume(l - 1)
    }
}

/// Monte-Carlo estimate of a lattice's normalized second moment by uniform
/// rejection sampling of the origin cell.
pub fn second_moment_oracle(spec: &LatticeSpec, samples: u64, seed: u64) -> McEstimate {
    let l = spec.dim();
    let r = spec.covering_radius() * (1.0 + 1e-12);
    let chunks = samples.div_ceil(CHUNK_LEN);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    let mut accepted = 0u64;
    for chunk in 0..chunks {
        let len = CHUNK_LEN.min(samples - chunk * CHUNK_LEN);
        let mut stream = Stream::new(seed, StreamKind::Oracle, chunk);
        let mut dir = vec![0.0; l];
        for _ in 0..len {
            stream.fill_normal(&mut dir);
            let norm = libm::sqrt(vecmath::dot(&dir, &dir)).max(1e-300);
            let radius = r * libm::pow(stream.uniform(), 1.0 / l as f64);
            let x: Vec<f64> = dir.iter().map(|v| v * radius / norm).collect();
            let q = spec.nearest_point(&x).expect("dimension matches");
            if q.basis_coords.iter().all(|&k| k == 0) {
                let v = vecmath::nsq(&x);
                sum += v;
                sumsq += v * v;
                accepted += 1;
            }
        }
    }
    let mean = sum / accepted.max(1) as f64;
    let var = (sumsq / accepted.max(1) as f64 - mean * mean).max(0.0);
    let denom = libm::pow(spec.cell_volume(), 2.0 / l as f64);
    McEstimate {
        value: mean / denom,
        std_error: libm::sqrt(var / accepted.max(1) as f64) / denom,
        samples: accepted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis;
    use crate::lattice::{LatticeName, G_HEXAGONAL, G_INTEGER};

    #[test]
    fn fixed_distance_limits() {
        // zero separation recovers the full sphere volume
        for l in [1usize, 3] {
            let est = intersection_oracle(l, DistanceProfile::Fixed(0.0), 200_000, 1);
            assert!((est.value - unit_sphere_volume(l)).abs() < 1e-9, "L={l}");
        }
        // separation >= 2 has empty intersection
        let est = intersection_oracle(2, DistanceProfile::Fixed(2.0), 100_000, 1);
        assert_eq!(est.value, 0.0);
        // 1-D overlap of unit intervals distance 1 apart has length 1
        let est = intersection_oracle(1, DistanceProfile::Fixed(1.0), 400_000, 1);
        assert!((est.value - 1.0).abs() < 0.01, "{}", est.value);
    }

    #[test]
    fn shell_profiles_match_closed_forms_smoke() {
        // tight agreement is covered by the acceptance suite at 1e7 samples;
        // this is a quick 1e6-sample sanity run
        for l in [1usize, 3] {
            let beta = analysis::beta_l(l).unwrap();
            let est = intersection_oracle(l, DistanceProfile::ShellCount, 1_000_000, 7);
            assert!(
                (est.value / beta - 1.0).abs() < 4e-3,
                "L={l}: {} vs {beta} (se {})",
                est.value,
                est.std_error
            );
            let bt = analysis::beta_tilde_l(l).unwrap();
            let est = intersection_oracle(l, DistanceProfile::ShellSecondMoment, 1_000_000, 7);
            assert!((est.value / bt - 1.0).abs() < 4e-3, "L={l}: {} vs {bt}", est.value);
        }
    }

    #[test]
    fn second_moment_oracle_integer_lattices() {
        for (spec, g) in [
            (LatticeSpec::integer(1).unwrap(), G_INTEGER),
            (LatticeSpec::integer(2).unwrap(), G_INTEGER),
            (LatticeSpec::with_scale(LatticeName::Integer, 2, 0.3).unwrap(), G_INTEGER),
            (LatticeSpec::hexagonal().unwrap(), G_HEXAGONAL),
        ] {
            let est = second_moment_oracle(&spec, 600_000, 3);
            assert!(
                (est.value / g - 1.0).abs() < 0.01,
                "{}: {} vs {g}",
                spec.describe(),
                est.value
            );
        }
    }
}
