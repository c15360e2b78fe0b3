//! Central lattice / sublattice / product lattice hierarchies with exact
//! integer index values and coset arithmetic modulo the product lattice.
//!
//! Sublattices are geometrically similar scalings of the central lattice:
//! scalar multiples for Z^L and D4, Gaussian-integer multipliers for Z^2 and
//! Eisenstein multipliers for the hexagonal lattice. Points of a sublattice
//! are always carried in *central* basis coordinates, which keeps every
//! membership and coset computation exact.

use alloc::vec;
use alloc::vec::Vec;

use crate::intmath::{self, IMat};
use crate::lattice::{LatticeName, LatticeSpec};

#[derive(Clone, Debug, PartialEq)]
pub enum NestedError {
    BadIndex { desc: usize },
    WrongFamily { desc: usize },
    NotNested { desc: usize },
    BadWeight { desc: usize },
    DescriptionCount(usize),
    Capacity,
}

impl core::fmt::Display for NestedError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            NestedError::BadIndex { desc } => write!(f, "description {desc}: index must be >= 1"),
            NestedError::WrongFamily { desc } => {
                write!(f, "description {desc}: similarity kind not valid for this lattice")
            }
            NestedError::NotNested { desc } => write!(
                f,
                "product lattice is not nested inside sublattice {desc}; combination rejected"
            ),
            NestedError::BadWeight { desc } => {
                write!(f, "description {desc}: weight must be positive and finite")
            }
            NestedError::DescriptionCount(n) => write!(f, "need at least 1 description, got {n}"),
            NestedError::Capacity => write!(f, "cell enumeration exceeds the memory budget"),
        }
    }
}

impl core::error::Error for NestedError {}

/// Integer similarity choices that keep sublattices geometrically similar to
/// the central lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimilarityKind {
    /// `k * Lambda`, index k^L. Valid for every supported lattice.
    Scalar(i64),
    /// Gaussian integer a + bi acting on Z^2, index a^2 + b^2.
    Gaussian(i64, i64),
    /// Eisenstein integer a + b*zeta (zeta = e^{i pi/3}) on the hexagonal
    /// lattice, index a^2 + ab + b^2.
    Eisenstein(i64, i64),
}

impl SimilarityKind {
    pub fn to_matrix(self, name: LatticeName, dim: usize) -> Result<IMat, NestedError> {
        match self {
            SimilarityKind::Scalar(k) => {
                let mut m = intmath::identity(dim);
                for (i, row) in m.iter_mut().enumerate() {
                    row[i] = k;
                }
                Ok(m)
            }
            SimilarityKind::Gaussian(a, b) => {
                if name != LatticeName::Integer || dim != 2 {
                    return Err(NestedError::WrongFamily { desc: 0 });
                }
                Ok(vec![vec![a, -b], vec![b, a]])
            }
            SimilarityKind::Eisenstein(a, b) => {
                if name != LatticeName::Hexagonal {
                    return Err(NestedError::WrongFamily { desc: 0 });
                }
                // multiplication by a + b*zeta in the basis {1, zeta}
                Ok(vec![vec![a, -b], vec![b, a + b]])
            }
        }
    }
}

/// How the product lattice is derived from the sublattice similarities.
#[derive(Clone, Debug, PartialEq)]
pub enum ProductRule {
    /// Keep one copy of literally repeated similarity matrices; if a single
    /// distinct matrix remains, use its square.
    Deduplicated,
    /// Multiply all similarity matrices as given.
    FullProduct,
    /// Use this matrix directly.
    Explicit(IMat),
}

#[derive(Clone, Debug)]
pub struct SublatticeSpec {
    /// Integer similarity matrix over the central basis.
    scale_matrix: IMat,
    index: u64,
    nesting_ratio: f64,
}

impl SublatticeSpec {
    /// Build directly from an integer similarity matrix.
    pub fn from_matrix(scale_matrix: IMat, dim: usize) -> Result<Self, NestedError> {
        Self::new(scale_matrix, dim)
    }

    fn new(scale_matrix: IMat, dim: usize) -> Result<Self, NestedError> {
        let d = intmath::det(&scale_matrix);
        if d == 0 {
            return Err(NestedError::BadIndex { desc: 0 });
        }
        let index = d.unsigned_abs() as u64;
        Ok(SublatticeSpec {
            scale_matrix,
            index,
            nesting_ratio: libm::pow(index as f64, 1.0 / dim as f64),
        })
    }

    pub fn scale_matrix(&self) -> &IMat {
        &self.scale_matrix
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn nesting_ratio(&self) -> f64 {
        self.nesting_ratio
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellLattice {
    Central,
    Sub(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CleanReport {
    pub clean: bool,
    /// Central-basis coordinates of a point sitting on a cell boundary.
    pub witness: Option<Vec<i64>>,
}

#[derive(Clone, Debug)]
pub struct NestedSystem {
    central: LatticeSpec,
    subs: Vec<SublatticeSpec>,
    product: SublatticeSpec,
    mu: Vec<f64>,
    // cached exact inverse data for coset reduction
    product_adj: Vec<Vec<i128>>,
    product_det: i128,
}

impl NestedSystem {
    /// Assemble the hierarchy from similarity choices. Order of `kinds` is
    /// preserved: description i keeps identity i.
    pub fn build(
        central: LatticeSpec,
        kinds: &[SimilarityKind],
        mu: &[f64],
        rule: ProductRule,
    ) -> Result<Self, NestedError> {
        let dim = central.dim();
        let mut mats = Vec::with_capacity(kinds.len());
        for (i, kind) in kinds.iter().enumerate() {
            let m = kind
                .to_matrix(central.name(), dim)
                .map_err(|_| NestedError::WrongFamily { desc: i })?;
            mats.push(m);
        }
        Self::build_from_matrices(central, &mats, mu, rule)
    }

    /// Assemble from explicit integer similarity matrices over the central
    /// basis (the serialized form).
    pub fn build_from_matrices(
        central: LatticeSpec,
        mats: &[IMat],
        mu: &[f64],
        rule: ProductRule,
    ) -> Result<Self, NestedError> {
        if mats.is_empty() {
            return Err(NestedError::DescriptionCount(0));
        }
        if mu.len() != mats.len() {
            return Err(NestedError::DescriptionCount(mu.len()));
        }
        for (i, &m) in mu.iter().enumerate() {
            if !(m > 0.0) || !m.is_finite() {
                return Err(NestedError::BadWeight { desc: i });
            }
        }
        let dim = central.dim();
        let mut subs = Vec::with_capacity(mats.len());
        for (i, m) in mats.iter().enumerate() {
            if m.len() != dim || m.iter().any(|row| row.len() != dim) {
                return Err(NestedError::WrongFamily { desc: i });
            }
            let s =
                SublatticeSpec::new(m.clone(), dim).map_err(|_| NestedError::BadIndex { desc: i })?;
            if s.index < 1 {
                return Err(NestedError::BadIndex { desc: i });
            }
            subs.push(s);
        }

        let product_matrix = match rule {
            ProductRule::Explicit(m) => m,
            ProductRule::FullProduct => {
                let mut p = intmath::identity(dim);
                for s in &subs {
                    p = intmath::mat_mul(&p, &s.scale_matrix);
                }
                p
            }
            ProductRule::Deduplicated => {
                let mut distinct: Vec<&IMat> = Vec::new();
                for s in &subs {
                    if !distinct.iter().any(|m| **m == s.scale_matrix) {
                        distinct.push(&s.scale_matrix);
                    }
                }
                let mut p = intmath::identity(dim);
                if distinct.len() == 1 && subs.len() >= 2 {
                    p = intmath::mat_mul(distinct[0], distinct[0]);
                } else {
                    for m in distinct {
                        p = intmath::mat_mul(&p, m);
                    }
                }
                p
            }
        };
        let product = SublatticeSpec::new(product_matrix, dim)
            .map_err(|_| NestedError::BadIndex { desc: usize::MAX })?;

        for (i, s) in subs.iter().enumerate() {
            if !intmath::divides(&s.scale_matrix, &product.scale_matrix) {
                return Err(NestedError::NotNested { desc: i });
            }
        }

        let mut product_adj = intmath::adjugate(&product.scale_matrix);
        let mut product_det = intmath::det(&product.scale_matrix);
        if product_det < 0 {
            product_det = -product_det;
            for row in product_adj.iter_mut() {
                for v in row.iter_mut() {
                    *v = -*v;
                }
            }
        }

        Ok(NestedSystem { central, subs, product, mu: mu.to_vec(), product_adj, product_det })
    }

    pub fn central(&self) -> &LatticeSpec {
        &self.central
    }

    pub fn dim(&self) -> usize {
        self.central.dim()
    }

    pub fn descriptions(&self) -> usize {
        self.subs.len()
    }

    pub fn sub(&self, i: usize) -> &SublatticeSpec {
        &self.subs[i]
    }

    pub fn subs(&self) -> &[SublatticeSpec] {
        &self.subs
    }

    pub fn product(&self) -> &SublatticeSpec {
        &self.product
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn product_index(&self) -> u64 {
        self.product.index
    }

    /// Cell volume of the product lattice: `N_pi * nu_c` exactly.
    pub fn product_cell_volume(&self) -> f64 {
        self.product.index as f64 * self.central.cell_volume()
    }

    /// Ambient coordinates of a point given in central-basis coordinates.
    pub fn central_coords(&self, z: &[i64]) -> Vec<f64> {
        self.central.point_from_basis_coords(z).coords
    }

    /// Decompose a central-lattice point `z` (central basis coords) as
    /// `z = rep + P * t` with the representative in the canonical half-open
    /// fundamental cell of the product lattice. Exact integer arithmetic.
    pub fn canonical_rep_with_translate(&self, z: &[i64]) -> (Vec<i64>, Vec<i64>) {
        let w = intmath::adj_vec(&self.product_adj, z);
        let t: Vec<i64> = w
            .iter()
            .map(|&wi| i64::try_from(intmath::floor_div(wi, self.product_det)).expect("translate"))
            .collect();
        let pt = intmath::mat_vec(&self.product.scale_matrix, &t);
        let rep: Vec<i64> = z.iter().zip(&pt).map(|(a, b)| a - b).collect();
        (rep, t)
    }

    /// Canonical coset representative of `z` modulo the product lattice.
    pub fn canonical_rep(&self, z: &[i64]) -> Vec<i64> {
        self.canonical_rep_with_translate(z).0
    }

    /// True iff `z` (central basis coords) lies in the canonical cell.
    pub fn is_canonical(&self, z: &[i64]) -> bool {
        let w = intmath::adj_vec(&self.product_adj, z);
        w.iter().all(|&wi| 0 <= wi && wi < self.product_det)
    }

    /// Translate `t` (product-basis coords) as central-basis coordinates.
    pub fn product_translate_to_central(&self, t: &[i64]) -> Vec<i64> {
        intmath::mat_vec(&self.product.scale_matrix, t)
    }

    /// Canonical-cell translate of an ambient point: returns integer
    /// product-basis coordinates `t` such that `x - P*t` lies in the cell.
    pub fn cell_translate_of_point(&self, x: &[f64]) -> Vec<i64> {
        // fractional product-basis coordinates via the f64 inverse
        let dim = self.dim();
        let kb: Vec<f64> = {
            // central basis coords (f64)
            let mut kb = vec![0.0; dim];
            for i in 0..dim {
                kb[i] = crate::vecmath::dot(inv_row(&self.central, i), x);
            }
            kb
        };
        (0..dim)
            .map(|i| {
                let mut s = 0.0;
                for k in 0..dim {
                    s += self.product_adj[i][k] as f64 * kb[k];
                }
                libm::floor(s / self.product_det as f64) as i64
            })
            .collect()
    }

    /// Is `z` (central basis coords) a member of sublattice `i`?
    pub fn in_sublattice(&self, i: usize, z: &[i64]) -> bool {
        let m = &self.subs[i].scale_matrix;
        let adj = intmath::adjugate(m);
        let d = intmath::det(m);
        let w = intmath::adj_vec(&adj, z);
        w.iter().all(|&wi| wi % d == 0)
    }

    /// Sublattice-i points inside the canonical product cell, as central
    /// basis coordinates, lexicographically sorted. For `Central` this is
    /// the full set of N_pi coset representatives.
    pub fn points_in_product_cell(&self, which: CellLattice) -> Result<Vec<Vec<i64>>, NestedError> {
        let dim = self.dim();
        let gen: IMat = match which {
            CellLattice::Central => intmath::identity(dim),
            CellLattice::Sub(i) => self.subs[i].scale_matrix.clone(),
        };
        // z = gen * u must satisfy 0 <= adj(P) z < det; bound u by the box of
        // gen^{-1} P [0,1]^L corners
        let gadj = intmath::adjugate(&gen);
        let gdet = intmath::det(&gen);
        let mut lo = vec![i64::MAX; dim];
        let mut hi = vec![i64::MIN; dim];
        for corner in 0..(1u32 << dim) {
            let mut v = vec![0i128; dim];
            for j in 0..dim {
                if corner >> j & 1 == 1 {
                    for (i, vi) in v.iter_mut().enumerate() {
                        *vi += self.product.scale_matrix[i][j] as i128;
                    }
                }
            }
            // u = gen^{-1} v = adj(gen) v / det(gen)
            for i in 0..dim {
                let mut s: i128 = 0;
                for k in 0..dim {
                    s += gadj[i][k] * v[k];
                }
                let q = if gdet > 0 {
                    intmath::floor_div(s, gdet)
                } else {
                    intmath::floor_div(-s, -gdet)
                };
                lo[i] = lo[i].min(q as i64 - 1);
                hi[i] = hi[i].max(q as i64 + 2);
            }
        }
        let mut count: u128 = 1;
        for i in 0..dim {
            count = count.saturating_mul((hi[i] - lo[i] + 1) as u128);
        }
        if count > 1 << 28 {
            return Err(NestedError::Capacity);
        }

        let mut out: Vec<Vec<i64>> = Vec::new();
        let mut u = lo.clone();
        loop {
            let z = intmath::mat_vec(&gen, &u);
            if self.is_canonical(&z) {
                out.push(z);
            }
            let mut axis = dim;
            loop {
                if axis == 0 {
                    out.sort();
                    return Ok(out);
                }
                axis -= 1;
                if u[axis] < hi[axis] {
                    u[axis] += 1;
                    for a in axis + 1..dim {
                        u[a] = lo[a];
                    }
                    break;
                }
            }
        }
    }

    /// Does any point of the chosen lattice sit on a Voronoi-cell boundary of
    /// the product lattice (within 1e-9)? Returns a witness if so.
    pub fn is_clean(&self, which: CellLattice) -> Result<CleanReport, NestedError> {
        let pts = self.points_in_product_cell(which)?;
        let margin = self.central.covering_radius_bound(self.product.index);
        for z in &pts {
            let x = self.central_coords(z);
            // distances to nearby product-lattice points (0 is within range
            // because `margin` bounds the covering radius)
            let near = self
                .product_points_near(&x, 2.2 * margin)
                .map_err(|_| NestedError::Capacity)?;
            let mut d0 = f64::INFINITY;
            let mut d1 = f64::INFINITY;
            for p in &near {
                let d = libm::sqrt(crate::vecmath::dist_sq(p, &x));
                if d < d0 {
                    d1 = d0;
                    d0 = d;
                } else if d < d1 {
                    d1 = d;
                }
            }
            if d1 - d0 <= 1e-9 {
                return Ok(CleanReport { clean: false, witness: Some(z.clone()) });
            }
        }
        Ok(CleanReport { clean: true, witness: None })
    }

    fn product_points_near(&self, x: &[f64], radius: f64) -> Result<Vec<Vec<f64>>, NestedError> {
        let dim = self.dim();
        // enumerate t with |P t - x| <= radius by scanning a box in t
        let pf = intmath::mat_to_f64(&self.product.scale_matrix);
        // crude per-axis bound via adjugate rows
        let mut lo = vec![0i64; dim];
        let mut hi = vec![0i64; dim];
        let kb: Vec<f64> =
            (0..dim).map(|i| crate::vecmath::dot(inv_row(&self.central, i), x)).collect();
        for i in 0..dim {
            let mut c = 0.0;
            let mut row = vec![0.0; dim];
            for k in 0..dim {
                let a = self.product_adj[i][k] as f64 / self.product_det as f64;
                c += a * kb[k];
                crate::vecmath::add_scaled_into(&mut row, inv_row(&self.central, k), a);
            }
            let w = radius * libm::sqrt(crate::vecmath::dot(&row, &row)) + 1.0;
            lo[i] = libm::floor(c - w) as i64;
            hi[i] = libm::ceil(c + w) as i64;
        }
        let mut count: u128 = 1;
        for i in 0..dim {
            count = count.saturating_mul((hi[i] - lo[i] + 1) as u128);
        }
        if count > 1 << 24 {
            return Err(NestedError::Capacity);
        }
        let r2 = radius * radius;
        let mut out = Vec::new();
        let mut t = lo.clone();
        loop {
            // ambient coords of P t in the central basis
            let mut z = vec![0.0; dim];
            for j in 0..dim {
                for i in 0..dim {
                    z[i] += pf[i][j] * t[j] as f64;
                }
            }
            let amb = {
                let zc: Vec<i64> = z.iter().map(|&v| libm::round(v) as i64).collect();
                self.central_coords(&zc)
            };
            if crate::vecmath::dist_sq(&amb, x) <= r2 {
                out.push(amb);
            }
            let mut axis = dim;
            loop {
                if axis == 0 {
                    return Ok(out);
                }
                axis -= 1;
                if t[axis] < hi[axis] {
                    t[axis] += 1;
                    for a in axis + 1..dim {
                        t[a] = lo[a];
                    }
                    break;
                }
            }
        }
    }

    /// Points of sublattice `i` (central basis coords) within Euclidean
    /// `radius` of ambient point `center`.
    pub fn sub_points_in_ball(
        &self,
        i: usize,
        center: &[f64],
        radius: f64,
        budget: u128,
    ) -> Result<Vec<Vec<i64>>, NestedError> {
        let dim = self.dim();
        let m = &self.subs[i].scale_matrix;
        let adj = intmath::adjugate(m);
        let d = intmath::det(m) as f64;
        // u-coords of center: u = M^{-1} B^{-1} x; box bounds use the true
        // ambient row norms of (B M)^{-1}
        let kb: Vec<f64> =
            (0..dim).map(|r| crate::vecmath::dot(inv_row(&self.central, r), center)).collect();
        let mut lo = vec![0i64; dim];
        let mut hi = vec![0i64; dim];
        for r in 0..dim {
            let mut c = 0.0;
            let mut row = vec![0.0; dim];
            for k in 0..dim {
                let a = adj[r][k] as f64 / d;
                c += a * kb[k];
                crate::vecmath::add_scaled_into(&mut row, inv_row(&self.central, k), a);
            }
            let w = radius * libm::sqrt(crate::vecmath::dot(&row, &row)) + 1.0;
            lo[r] = libm::floor(c - w) as i64;
            hi[r] = libm::ceil(c + w) as i64;
        }
        let mut count: u128 = 1;
        for r in 0..dim {
            count = count.saturating_mul((hi[r] - lo[r] + 1) as u128);
        }
        if count > budget {
            return Err(NestedError::Capacity);
        }
        let r2 = radius * radius * (1.0 + 1e-12) + 1e-12;
        let mut out = Vec::new();
        let mut u = lo.clone();
        loop {
            let z = intmath::mat_vec(m, &u);
            let amb = self.central_coords(&z);
            if crate::vecmath::dist_sq(&amb, center) <= r2 {
                out.push(z);
            }
            let mut axis = dim;
            loop {
                if axis == 0 {
                    out.sort();
                    return Ok(out);
                }
                axis -= 1;
                if u[axis] < hi[axis] {
                    u[axis] += 1;
                    for a in axis + 1..dim {
                        u[a] = lo[a];
                    }
                    break;
                }
            }
        }
    }
}

fn inv_row(spec: &LatticeSpec, i: usize) -> &[f64] {
    spec.inv_rows(i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;

    fn z1_system(indices: &[i64], rule: ProductRule) -> NestedSystem {
        let kinds: Vec<SimilarityKind> = indices.iter().map(|&k| SimilarityKind::Scalar(k)).collect();
        let mu = vec![1.0; indices.len()];
        NestedSystem::build(LatticeSpec::integer(1).unwrap(), &kinds, &mu, rule).unwrap()
    }

    #[test]
    fn z1_counts() {
        let sys = z1_system(&[4, 5], ProductRule::Deduplicated);
        assert_eq!(sys.product_index(), 20);
        let central = sys.points_in_product_cell(CellLattice::Central).unwrap();
        assert_eq!(central.len(), 20);
        let s0 = sys.points_in_product_cell(CellLattice::Sub(0)).unwrap();
        assert_eq!(s0, vec![vec![0], vec![4], vec![8], vec![12], vec![16]]);
        let s1 = sys.points_in_product_cell(CellLattice::Sub(1)).unwrap();
        assert_eq!(s1.len(), 4);
    }

    #[test]
    fn gaussian_product_dedup() {
        let sys = NestedSystem::build(
            LatticeSpec::integer(2).unwrap(),
            &[SimilarityKind::Gaussian(2, 1), SimilarityKind::Gaussian(2, -1)],
            &[1.0, 1.0],
            ProductRule::Deduplicated,
        )
        .unwrap();
        assert_eq!(sys.sub(0).index(), 5);
        assert_eq!(sys.sub(1).index(), 5);
        assert_eq!(sys.product_index(), 25);
        let central = sys.points_in_product_cell(CellLattice::Central).unwrap();
        assert_eq!(central.len(), 25);
        for i in 0..2 {
            let pts = sys.points_in_product_cell(CellLattice::Sub(i)).unwrap();
            assert_eq!(pts.len(), 5, "sub {i}");
        }
    }

    #[test]
    fn identity_sublattice() {
        let sys = NestedSystem::build(
            LatticeSpec::integer(2).unwrap(),
            &[SimilarityKind::Scalar(1)],
            &[1.0],
            ProductRule::Deduplicated,
        )
        .unwrap();
        assert_eq!(sys.sub(0).index(), 1);
    }

    #[test]
    fn all_equal_uses_square() {
        let sys = z1_system(&[7, 7, 7], ProductRule::Deduplicated);
        assert_eq!(sys.product_index(), 49);
        let full = z1_system(&[7, 7, 7], ProductRule::FullProduct);
        assert_eq!(full.product_index(), 343);
    }

    #[test]
    fn partial_dedup_keeps_one_copy() {
        let sys = z1_system(&[4, 4, 5], ProductRule::Deduplicated);
        assert_eq!(sys.product_index(), 20);
    }

    #[test]
    fn canonical_rep_is_modular_reduction() {
        let sys = z1_system(&[4, 5], ProductRule::Deduplicated);
        assert_eq!(sys.canonical_rep(&[23]), vec![3]);
        assert_eq!(sys.canonical_rep(&[3]), vec![3]);
        assert_eq!(sys.canonical_rep(&[-1]), vec![19]);
    }

    #[test]
    fn canonical_rep_retraction_property() {
        use crate::rng::{Stream, StreamKind};
        let sys = NestedSystem::build(
            LatticeSpec::integer(2).unwrap(),
            &[SimilarityKind::Gaussian(2, 1), SimilarityKind::Gaussian(2, -1)],
            &[1.0, 1.0],
            ProductRule::Deduplicated,
        )
        .unwrap();
        let mut s = Stream::new(3, StreamKind::Oracle, 0);
        for _ in 0..10_000 {
            let z = vec![s.below(4001) as i64 - 2000, s.below(4001) as i64 - 2000];
            let (rep, t) = sys.canonical_rep_with_translate(&z);
            assert!(sys.is_canonical(&rep));
            let back = sys.product_translate_to_central(&t);
            assert_eq!(z[0], rep[0] + back[0]);
            assert_eq!(z[1], rep[1] + back[1]);
            // adding a product translate never changes the representative
            let shift = sys.product_translate_to_central(&[1, -2]);
            let z2 = vec![z[0] + shift[0], z[1] + shift[1]];
            assert_eq!(sys.canonical_rep(&z2), rep);
        }
    }

    #[test]
    fn volume_index_consistency() {
        let sys = z1_system(&[4, 5], ProductRule::Deduplicated);
        let ratio = sys.product_cell_volume() / sys.central().cell_volume();
        assert!((ratio - sys.product_index() as f64).abs() < 1e-9);
    }

    #[test]
    fn cleanliness() {
        // odd product index on Z^1 avoids midpoints
        let sys = z1_system(&[3, 5], ProductRule::Deduplicated);
        assert!(sys.is_clean(CellLattice::Central).unwrap().clean);

        // Lambda_pi = 2Z against Z: boundary point at 1
        let sys = z1_system(&[2], ProductRule::Explicit(alloc::vec![alloc::vec![2]]));
        let rep = sys.is_clean(CellLattice::Central).unwrap();
        assert!(!rep.clean);
        assert_eq!(rep.witness, Some(vec![1]));

        // Gaussian index-5 sublattice of Z^2 is clean
        let sys = NestedSystem::build(
            LatticeSpec::integer(2).unwrap(),
            &[SimilarityKind::Gaussian(2, 1)],
            &[1.0],
            ProductRule::Deduplicated,
        )
        .unwrap();
        assert!(sys.is_clean(CellLattice::Central).unwrap().clean);
    }

    #[test]
    fn non_nested_rejected() {
        // explicit product 3Z cannot contain the index-2 sublattice 2Z
        let err = NestedSystem::build(
            LatticeSpec::integer(1).unwrap(),
            &[SimilarityKind::Scalar(2)],
            &[1.0],
            ProductRule::Explicit(alloc::vec![alloc::vec![3]]),
        )
        .unwrap_err();
        assert_eq!(err, NestedError::NotNested { desc: 0 });
    }

    #[test]
    fn eisenstein_similarity() {
        let sys = NestedSystem::build(
            LatticeSpec::hexagonal().unwrap(),
            &[SimilarityKind::Eisenstein(2, 1), SimilarityKind::Scalar(2)],
            &[1.0, 1.0],
            ProductRule::Deduplicated,
        )
        .unwrap();
        assert_eq!(sys.sub(0).index(), 7); // 4 + 2 + 1
        assert_eq!(sys.sub(1).index(), 4);
        assert_eq!(sys.product_index(), 28);
        let pts = sys.points_in_product_cell(CellLattice::Central).unwrap();
        assert_eq!(pts.len(), 28);
    }
}
