//! End-to-end encoder/decoder over a labeling function, and random binning
//! of the side codebooks for two-of-three decoding.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::labeling::{LabelingFunction, Tuple};
use crate::nested::CellLattice;
use crate::rng::{Stream, StreamKind};
use crate::vecmath;
use crate::weights::{mask_indices, Mask, WeightProfile};

#[derive(Clone, Debug, PartialEq)]
pub enum CodecError {
    Corrupt,
    EmptyPattern,
    BadPattern(Mask),
    Lattice(crate::lattice::LatticeError),
}

impl core::fmt::Display for CodecError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CodecError::Corrupt => write!(f, "frame does not decode to a labeled tuple"),
            CodecError::EmptyPattern => write!(f, "empty pattern: reconstruct with the source mean"),
            CodecError::BadPattern(m) => write!(f, "pattern {m:#b} out of range"),
            CodecError::Lattice(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for CodecError {}

/// Transported representation of one quantized source vector: the product
/// cell of the central point plus, per description, the canonical
/// representative index and the product-cell component of that description's
/// point. Reconstruction of every side point is exact, including tuples with
/// elements outside the anchor cell.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedFrame {
    pub product_translate: Vec<i64>,
    pub side_indices: Vec<u32>,
    pub side_translates: Vec<Vec<i64>>,
}

/// Encoder/decoder bound to one labeling. Precomputes the per-description
/// codebooks (canonical representatives) and their index maps.
pub struct Codec<'a> {
    labeling: &'a LabelingFunction,
    profile: WeightProfile,
    side_reps: Vec<Vec<Vec<i64>>>,
    side_index: Vec<BTreeMap<Vec<i64>, u32>>,
}

impl<'a> Codec<'a> {
    pub fn new(labeling: &'a LabelingFunction, profile: WeightProfile) -> Result<Self, CodecError> {
        let system = labeling.system();
        let n = system.descriptions();
        let mut side_reps = Vec::with_capacity(n);
        let mut side_index = Vec::with_capacity(n);
        for i in 0..n {
            let reps = system
                .points_in_product_cell(CellLattice::Sub(i))
                .map_err(|_| CodecError::Corrupt)?;
            let map: BTreeMap<Vec<i64>, u32> =
                reps.iter().cloned().enumerate().map(|(k, v)| (v, k as u32)).collect();
            side_reps.push(reps);
            side_index.push(map);
        }
        Ok(Codec { labeling, profile, side_reps, side_index })
    }

    pub fn labeling(&self) -> &LabelingFunction {
        self.labeling
    }

    pub fn profile(&self) -> &WeightProfile {
        &self.profile
    }

    pub fn descriptions(&self) -> usize {
        self.labeling.system().descriptions()
    }

    /// Codebook size of description i within one product cell.
    pub fn side_codebook_len(&self, i: usize) -> usize {
        self.side_reps[i].len()
    }

    /// Quantize a source vector and transport its labeling.
    pub fn encode(&self, x: &[f64]) -> Result<EncodedFrame, CodecError> {
        let system = self.labeling.system();
        let lc = system.central().nearest_point(x).map_err(CodecError::Lattice)?;
        Ok(self.encode_central(&lc.basis_coords))
    }

    /// Encode a central point given directly in central basis coordinates.
    pub fn encode_central(&self, lambda_c: &[i64]) -> EncodedFrame {
        let system = self.labeling.system();
        let (_, trans) = system.canonical_rep_with_translate(lambda_c);
        let tuple = self.labeling.alpha_apply(lambda_c);
        let mut side_indices = Vec::with_capacity(tuple.len());
        let mut side_translates = Vec::with_capacity(tuple.len());
        for (i, z) in tuple.iter().enumerate() {
            let (rep, t) = system.canonical_rep_with_translate(z);
            side_indices.push(self.side_index[i][&rep]);
            side_translates.push(t);
        }
        EncodedFrame { product_translate: trans, side_indices, side_translates }
    }

    /// Side point `lambda_i` carried by the frame, central basis coords.
    pub fn side_point(&self, frame: &EncodedFrame, i: usize) -> Vec<i64> {
        let system = self.labeling.system();
        let rep = &self.side_reps[i][frame.side_indices[i] as usize];
        let shift = system.product_translate_to_central(&frame.side_translates[i]);
        rep.iter().zip(&shift).map(|(a, b)| a + b).collect()
    }

    /// Reconstruct from the subset `pattern` of received descriptions. The
    /// full set inverts the labeling exactly; partial sets average the
    /// received weighted points. The empty pattern is the caller's job
    /// (source mean).
    pub fn decode(&self, frame: &EncodedFrame, pattern: Mask) -> Result<Vec<f64>, CodecError> {
        let system = self.labeling.system();
        let n = system.descriptions();
        let full: Mask = (1 << n) - 1;
        if pattern == 0 {
            return Err(CodecError::EmptyPattern);
        }
        if pattern & !full != 0 {
            return Err(CodecError::BadPattern(pattern));
        }
        if pattern == full {
            let tuple: Tuple = (0..n).map(|i| self.side_point(frame, i)).collect();
            let lc = self.labeling.alpha_invert(&tuple).map_err(|_| CodecError::Corrupt)?;
            return Ok(system.central_coords(&lc));
        }
        let idx = mask_indices(pattern);
        let mu = self.profile.mu();
        let dim = system.dim();
        let mut out = vec![0.0; dim];
        for &i in &idx {
            let p = self.side_point(frame, i);
            vecmath::add_scaled_into(&mut out, &system.central_coords(&p), mu[i]);
        }
        for v in out.iter_mut() {
            *v /= idx.len() as f64;
        }
        Ok(out)
    }
}

/// Balanced random binning of each side codebook: indices are dealt
/// round-robin after a seeded shuffle, so bin occupancies differ by at most
/// one and binning at full rate is injective.
#[derive(Clone, Debug)]
pub struct BinTable {
    pub bins: u64,
    pub rate_bits_per_dim: f64,
    /// Per description: canonical rep index -> bin id.
    assign: Vec<Vec<u32>>,
    /// Per unordered description pair (i, j), i < j: map from (bin_i, bin_j)
    /// to the distinct co-occurring rep-index pairs and the tuples carrying
    /// each pair.
    pair_lookup: BTreeMap<(usize, usize), BTreeMap<(u32, u32), Vec<((u32, u32), Vec<usize>)>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BinDecode {
    /// Exactly one consistent pair; its side points (central basis coords)
    /// and the central points of the tuples carrying it.
    Unique { pair: (Vec<i64>, Vec<i64>), central_candidates: Vec<Vec<i64>> },
    /// Multiple consistent pairs: ambiguity is data, not failure.
    Ambiguous { pairs: usize },
    /// No consistent pair (invalid bin combination).
    Empty,
}

/// Hash every side index uniformly into `2^{L R_b}` bins per description.
pub fn bin_assign(codec: &Codec<'_>, rate_bits_per_dim: f64, seed: u64) -> BinTable {
    let system = codec.labeling.system();
    let n = codec.descriptions();
    let l = system.dim() as f64;
    let bins = libm::round(libm::exp2(rate_bits_per_dim * l)).max(1.0) as u64;

    let mut assign = Vec::with_capacity(n);
    for i in 0..n {
        let len = codec.side_codebook_len(i);
        let mut ids: Vec<u32> = (0..len as u32).collect();
        let mut stream = Stream::new(seed, StreamKind::Binning, i as u64);
        stream.shuffle(&mut ids);
        let mut table = vec![0u32; len];
        for (pos, &rep) in ids.iter().enumerate() {
            table[rep as usize] = (pos as u64 % bins) as u32;
        }
        assign.push(table);
    }

    // index the tuple inventory by bin pairs
    let mut pair_lookup = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut by_pair: BTreeMap<(u32, u32), Vec<((u32, u32), Vec<usize>)>> = BTreeMap::new();
            for (tidx, tuple) in codec.labeling.forward().iter().enumerate() {
                let (rep_i, _) = system.canonical_rep_with_translate(&tuple[i]);
                let (rep_j, _) = system.canonical_rep_with_translate(&tuple[j]);
                let ri = codec.side_index[i][&rep_i];
                let rj = codec.side_index[j][&rep_j];
                let key = (assign[i][ri as usize], assign[j][rj as usize]);
                let entry = by_pair.entry(key).or_default();
                if let Some(slot) = entry.iter_mut().find(|(p, _)| *p == (ri, rj)) {
                    slot.1.push(tidx);
                } else {
                    entry.push(((ri, rj), vec![tidx]));
                }
            }
            pair_lookup.insert((i, j), by_pair);
        }
    }

    BinTable { bins, rate_bits_per_dim, assign, pair_lookup }
}

impl BinTable {
    pub fn bin_of(&self, desc: usize, rep_index: u32) -> u32 {
        self.assign[desc][rep_index as usize]
    }

    /// Largest bin occupancy over all descriptions.
    pub fn max_bin_occupancy(&self) -> usize {
        let mut m = 0;
        for table in &self.assign {
            let mut counts = BTreeMap::new();
            for &b in table {
                *counts.entry(b).or_insert(0usize) += 1;
            }
            m = m.max(counts.values().copied().max().unwrap_or(0));
        }
        m
    }
}

/// Intersect two received bins over the tuple inventory.
pub fn bin_decode(
    codec: &Codec<'_>,
    table: &BinTable,
    descs: (usize, usize),
    bins: (u32, u32),
) -> BinDecode {
    let (i, j) = (descs.0.min(descs.1), descs.0.max(descs.1));
    let Some(by_pair) = table.pair_lookup.get(&(i, j)) else {
        return BinDecode::Empty;
    };
    match by_pair.get(&bins) {
        None => BinDecode::Empty,
        Some(entries) if entries.len() == 1 => {
            let ((ri, rj), tuples) = &entries[0];
            let pair = (
                codec.side_reps[i][*ri as usize].clone(),
                codec.side_reps[j][*rj as usize].clone(),
            );
            let centrals =
                tuples.iter().map(|&t| codec.labeling.centrals()[t].clone()).collect();
            BinDecode::Unique { pair, central_candidates: centrals }
        }
        Some(entries) => BinDecode::Ambiguous { pairs: entries.len() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::build_labeling;
    use crate::lattice::LatticeSpec;
    use crate::nested::{NestedSystem, ProductRule, SimilarityKind};

    fn small_system() -> (NestedSystem, WeightProfile) {
        let sys = NestedSystem::build(
            LatticeSpec::integer(1).unwrap(),
            &[SimilarityKind::Scalar(4), SimilarityKind::Scalar(5)],
            &[1.0, 1.0],
            ProductRule::Deduplicated,
        )
        .unwrap();
        (sys, WeightProfile::two_channel(1.0, 1.0).unwrap())
    }

    #[test]
    fn roundtrip_full_pattern() {
        use crate::rng::{Stream, StreamKind};
        let (sys, profile) = small_system();
        let lab = build_labeling(&sys, &profile, 1 << 24).unwrap();
        let codec = Codec::new(&lab, profile).unwrap();
        let mut s = Stream::new(19, StreamKind::Oracle, 0);
        for _ in 0..5000 {
            let x = [(s.uniform() - 0.5) * 1000.0];
            let frame = codec.encode(&x).unwrap();
            let full = codec.decode(&frame, 0b11).unwrap();
            let expect = sys.central().nearest_point(&x).unwrap();
            assert!((full[0] - expect.coords[0]).abs() < 1e-9);
        }
        // a lattice point encodes to itself
        let frame = codec.encode(&[12.0]).unwrap();
        assert_eq!(codec.decode(&frame, 0b11).unwrap(), vec![12.0]);
        // zero maps to the zero frame
        let zf = codec.encode(&[0.0]).unwrap();
        assert_eq!(codec.decode(&zf, 0b11).unwrap(), vec![0.0]);
    }

    #[test]
    fn partial_patterns_average() {
        let (sys, profile) = small_system();
        let lab = build_labeling(&sys, &profile, 1 << 24).unwrap();
        let codec = Codec::new(&lab, profile).unwrap();
        let frame = codec.encode(&[7.3]).unwrap();
        let p0 = codec.side_point(&frame, 0);
        // single description with mu=1 reconstructs the side point itself
        let d0 = codec.decode(&frame, 0b01).unwrap();
        assert!((d0[0] - p0[0] as f64).abs() < 1e-12);
        assert!(codec.decode(&frame, 0).is_err());
        assert!(codec.decode(&frame, 0b100).is_err());
    }

    #[test]
    fn three_description_pair_average() {
        let sys = NestedSystem::build(
            LatticeSpec::integer(1).unwrap(),
            &[
                SimilarityKind::Scalar(3),
                SimilarityKind::Scalar(3),
                SimilarityKind::Scalar(3),
            ],
            &[1.0, 1.0, 1.0],
            ProductRule::FullProduct,
        )
        .unwrap();
        let profile = WeightProfile::symmetric(3);
        let lab = build_labeling(&sys, &profile, 1 << 24).unwrap();
        let codec = Codec::new(&lab, profile).unwrap();
        let frame = codec.encode(&[5.2]).unwrap();
        let p0 = codec.side_point(&frame, 0)[0] as f64;
        let p1 = codec.side_point(&frame, 1)[0] as f64;
        let d = codec.decode(&frame, 0b011).unwrap();
        assert!((d[0] - (p0 + p1) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn corrupt_frame_detected() {
        let (sys, profile) = small_system();
        let lab = build_labeling(&sys, &profile, 1 << 24).unwrap();
        let codec = Codec::new(&lab, profile).unwrap();
        let mut frame = codec.encode(&[3.0]).unwrap();
        frame.side_indices[0] = (frame.side_indices[0] + 1) % codec.side_codebook_len(0) as u32;
        // the damaged pair is almost surely not a labeled tuple
        match codec.decode(&frame, 0b11) {
            Err(CodecError::Corrupt) => {}
            Ok(v) => {
                // if it happens to hit another tuple it must be a different point
                assert!((v[0] - 3.0).abs() > 1e-9);
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn stray_elements_reconstruct_exactly() {
        // three equal descriptions: tuples near the cell edge legitimately
        // contain out-of-cell elements; side reconstruction must still be
        // exact for every canonical central point
        let sys = NestedSystem::build(
            LatticeSpec::integer(1).unwrap(),
            &[
                SimilarityKind::Scalar(5),
                SimilarityKind::Scalar(5),
                SimilarityKind::Scalar(5),
            ],
            &[1.0, 1.0, 1.0],
            ProductRule::FullProduct,
        )
        .unwrap();
        let profile = WeightProfile::symmetric(3);
        let lab = build_labeling(&sys, &profile, 1 << 26).unwrap();
        let codec = Codec::new(&lab, profile).unwrap();
        for c in lab.centrals() {
            let tuple = lab.alpha_apply(c);
            let frame = codec.encode_central(c);
            for i in 0..3 {
                assert_eq!(codec.side_point(&frame, i), tuple[i], "central {c:?} desc {i}");
            }
        }
    }

    #[test]
    fn injective_binning_at_full_rate() {
        let sys = NestedSystem::build(
            LatticeSpec::integer(1).unwrap(),
            &[
                SimilarityKind::Scalar(4),
                SimilarityKind::Scalar(4),
                SimilarityKind::Scalar(4),
            ],
            &[1.0, 1.0, 1.0],
            ProductRule::FullProduct,
        )
        .unwrap();
        let profile = WeightProfile::symmetric(3);
        let lab = build_labeling(&sys, &profile, 1 << 24).unwrap();
        let codec = Codec::new(&lab, profile.clone()).unwrap();
        // one point per bin: codebook is N_pi / N_i = 16 per description
        let full_rate = libm::log2(16.0);
        let table = bin_assign(&codec, full_rate, 99);
        assert_eq!(table.bins, 16);
        assert_eq!(table.max_bin_occupancy(), 1);
        for c in lab.centrals() {
            let frame = codec.encode_central(c);
            for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
                let b = (
                    table.bin_of(i, frame.side_indices[i]),
                    table.bin_of(j, frame.side_indices[j]),
                );
                match bin_decode(&codec, &table, (i, j), b) {
                    BinDecode::Unique { .. } => {}
                    other => panic!("expected unique decode, got {other:?}"),
                }
            }
        }
    }
}
