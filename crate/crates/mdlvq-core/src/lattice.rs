//! Concrete lattices with exact nearest-point rules, cell geometry and point
//! enumeration.
//!
//! Supported family: the integer lattice Z^L (any L >= 1), the hexagonal
//! lattice A2 and the checkerboard lattice D4, each optionally scaled. These
//! have O(1)/O(L) exact quantizers and known normalized second moments, which
//! is all the rest of the crate needs.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::vecmath;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeName {
    /// Z^L for any L >= 1.
    Integer,
    /// Hexagonal lattice, L = 2.
    Hexagonal,
    /// Checkerboard lattice D4, L = 4.
    Checkerboard,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LatticeError {
    DimensionMismatch { expected: usize, got: usize },
    /// Ball enumeration would visit more candidates than the budget allows.
    CapacityExceeded { candidates: u128, budget: u128 },
    BadDimension { name: LatticeName, dim: usize },
    BadScale(f64),
}

impl core::fmt::Display for LatticeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LatticeError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            LatticeError::CapacityExceeded { candidates, budget } => write!(
                f,
                "ball enumeration needs {candidates} candidates, budget is {budget}"
            ),
            LatticeError::BadDimension { name, dim } => {
                write!(f, "{name:?} does not exist in dimension {dim}")
            }
            LatticeError::BadScale(s) => write!(f, "scale must be positive and finite, got {s}"),
        }
    }
}

impl core::error::Error for LatticeError {}

/// A lattice point, carried both in ambient coordinates and as integer
/// coefficients over the lattice basis. The integer side is authoritative.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticePoint {
    pub coords: Vec<f64>,
    pub basis_coords: Vec<i64>,
}

/// Normalized second moment of Z^L.
pub const G_INTEGER: f64 = 1.0 / 12.0;
/// Normalized second moment of the hexagonal lattice: 5 / (36 sqrt(3)).
pub const G_HEXAGONAL: f64 = 0.08018753739745999; // 5/(36*sqrt(3))
/// Normalized second moment of D4: 13 / (120 sqrt(2)).
pub const G_CHECKERBOARD: f64 = 0.07660323462854266; // 13/(120*sqrt(2))

#[derive(Clone, Debug)]
pub struct LatticeSpec {
    name: LatticeName,
    dim: usize,
    scale: f64,
    /// Generator columns: `basis[j]` is the j-th generator in ambient coords.
    basis: Vec<Vec<f64>>,
    /// Rows of the inverse basis matrix (maps ambient -> basis coords).
    inv_rows: Vec<Vec<f64>>,
    cell_volume: f64,
    second_moment: f64,
}

impl LatticeSpec {
    pub fn integer(dim: usize) -> Result<Self, LatticeError> {
        Self::with_scale(LatticeName::Integer, dim, 1.0)
    }

    pub fn hexagonal() -> Result<Self, LatticeError> {
        Self::with_scale(LatticeName::Hexagonal, 2, 1.0)
    }

    pub fn checkerboard() -> Result<Self, LatticeError> {
        Self::with_scale(LatticeName::Checkerboard, 4, 1.0)
    }

    /// Build a lattice whose basis is `scale` times the canonical basis.
    pub fn with_scale(name: LatticeName, dim: usize, scale: f64) -> Result<Self, LatticeError> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(LatticeError::BadScale(scale));
        }
        let (dim_ok, canon, inv, vol1, g) = match name {
            LatticeName::Integer => {
                if dim == 0 {
                    return Err(LatticeError::BadDimension { name, dim });
                }
                let mut cols = vec![vec![0.0; dim]; dim];
                let mut inv = vec![vec![0.0; dim]; dim];
                for i in 0..dim {
                    cols[i][i] = 1.0;
                    inv[i][i] = 1.0;
                }
                (true, cols, inv, 1.0, G_INTEGER)
            }
            LatticeName::Hexagonal => {
                let s3 = libm::sqrt(3.0);
                // generators (1, 0) and (1/2, sqrt(3)/2)
                let cols = vec![vec![1.0, 0.0], vec![0.5, s3 / 2.0]];
                let inv = vec![vec![1.0, -1.0 / s3], vec![0.0, 2.0 / s3]];
                (dim == 2, cols, inv, s3 / 2.0, G_HEXAGONAL)
            }
            LatticeName::Checkerboard => {
                // generators of {x in Z^4 : sum(x) even}
                let cols = vec![
                    vec![1.0, -1.0, 0.0, 0.0],
                    vec![0.0, 1.0, -1.0, 0.0],
                    vec![0.0, 0.0, 1.0, -1.0],
                    vec![0.0, 0.0, 1.0, 1.0],
                ];
                let inv = vec![
                    vec![1.0, 0.0, 0.0, 0.0],
                    vec![1.0, 1.0, 0.0, 0.0],
                    vec![0.5, 0.5, 0.5, -0.5],
                    vec![0.5, 0.5, 0.5, 0.5],
                ];
                (dim == 4, cols, inv, 2.0, G_CHECKERBOARD)
            }
        };
        if !dim_ok {
            return Err(LatticeError::BadDimension { name, dim });
        }
        let basis: Vec<Vec<f64>> = canon
            .iter()
            .map(|c| c.iter().map(|v| v * scale).collect())
            .collect();
        let inv_rows: Vec<Vec<f64>> = inv
            .iter()
            .map(|r| r.iter().map(|v| v / scale).collect())
            .collect();
        Ok(LatticeSpec {
            name,
            dim,
            scale,
            basis,
            inv_rows,
            cell_volume: vol1 * libm::pow(scale, dim as f64),
            second_moment: g,
        })
    }

    pub fn name(&self) -> LatticeName {
        self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    /// Generator columns in ambient coordinates.
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Row `i` of the inverse basis matrix (ambient -> basis coords).
    pub fn inv_rows(&self, i: usize) -> &[f64] {
        &self.inv_rows[i]
    }

    /// Exact covering radius of the supported family.
    pub fn covering_radius(&self) -> f64 {
        let r1 = match self.name {
            LatticeName::Integer => libm::sqrt(self.dim as f64) / 2.0,
            LatticeName::Hexagonal => 1.0 / libm::sqrt(3.0),
            LatticeName::Checkerboard => 1.0,
        };
        r1 * self.scale
    }

    pub fn point_from_basis_coords(&self, k: &[i64]) -> LatticePoint {
        debug_assert_eq!(k.len(), self.dim);
        let mut coords = vec![0.0; self.dim];
        for (j, kj) in k.iter().enumerate() {
            vecmath::add_scaled_into(&mut coords, &self.basis[j], *kj as f64);
        }
        LatticePoint { coords, basis_coords: k.to_vec() }
    }

    fn ambient_to_basis(&self, x: &[f64]) -> Vec<f64> {
        self.inv_rows.iter().map(|r| vecmath::dot(r, x)).collect()
    }

    /// Quantize to the nearest lattice point. Exact minimizer of the
    /// Euclidean distance; ties go to the lexicographically smallest basis
    /// coordinates so boundaries are deterministic.
    pub fn nearest_point(&self, x: &[f64]) -> Result<LatticePoint, LatticeError> {
        if x.len() != self.dim {
            return Err(LatticeError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        match self.name {
            LatticeName::Integer => {
                let k: Vec<i64> = x
                    .iter()
                    .map(|&v| {
                        let y = v / self.scale;
                        round_tie_down(y)
                    })
                    .collect();
                Ok(self.point_from_basis_coords(&k))
            }
            LatticeName::Hexagonal => {
                let kb = self.ambient_to_basis(x);
                let k0: Vec<i64> = kb.iter().map(|&v| round_tie_down(v)).collect();
                Ok(self.best_in_box(x, &k0, 2))
            }
            LatticeName::Checkerboard => {
                let kb: Vec<f64> = x.iter().map(|&v| v / self.scale).collect();
                // search Z^4 integer box, keep even-coordinate-sum points
                let base: Vec<i64> = kb.iter().map(|&v| libm::floor(v) as i64).collect();
                let mut best: Option<(f64, Vec<i64>)> = None;
                let mut z = vec![0i64; 4];
                for a in -1..=2i64 {
                    for b in -1..=2i64 {
                        for c in -1..=2i64 {
                            for d in -1..=2i64 {
                                z[0] = base[0] + a;
                                z[1] = base[1] + b;
                                z[2] = base[2] + c;
                                z[3] = base[3] + d;
                                if (z.iter().sum::<i64>()).rem_euclid(2) != 0 {
                                    continue;
                                }
                                let mut d2 = 0.0;
                                for i in 0..4 {
                                    let e = kb[i] - z[i] as f64;
                                    d2 += e * e;
                                }
                                let bc = self.d4_basis_coords(&z);
                                better(&mut best, d2, bc);
                            }
                        }
                    }
                }
                let (_, bc) = best.expect("non-empty candidate box");
                Ok(self.point_from_basis_coords(&bc))
            }
        }
    }

    fn d4_basis_coords(&self, z: &[i64]) -> Vec<i64> {
        // exact inverse of the canonical generator matrix; the even
        // coordinate sum makes the last two entries integral
        let s = z[0] + z[1] + z[2];
        debug_assert_eq!((s + z[3]).rem_euclid(2), 0);
        vec![z[0], z[0] + z[1], (s - z[3]) / 2, (s + z[3]) / 2]
    }

    fn best_in_box(&self, x: &[f64], center: &[i64], halfwidth: i64) -> LatticePoint {
        let mut best: Option<(f64, Vec<i64>)> = None;
        let mut k = center.to_vec();
        self.box_recurse(x, center, halfwidth, 0, &mut k, &mut best);
        let (_, bc) = best.expect("non-empty candidate box");
        self.point_from_basis_coords(&bc)
    }

    fn box_recurse(
        &self,
        x: &[f64],
        center: &[i64],
        hw: i64,
        depth: usize,
        k: &mut Vec<i64>,
        best: &mut Option<(f64, Vec<i64>)>,
    ) {
        if depth == self.dim {
            let p = self.point_from_basis_coords(k);
            let d2 = vecmath::dist_sq(&p.coords, x);
            better(best, d2, k.clone());
            return;
        }
        for d in -hw..=hw {
            k[depth] = center[depth] + d;
            self.box_recurse(x, center, hw, depth + 1, k, best);
        }
    }

    /// All lattice points with `|p - center| <= radius` (boundary included),
    /// sorted lexicographically by basis coordinates.
    pub fn enumerate_in_ball(
        &self,
        center: &[f64],
        radius: f64,
        budget: u128,
    ) -> Result<Vec<LatticePoint>, LatticeError> {
        if center.len() != self.dim {
            return Err(LatticeError::DimensionMismatch { expected: self.dim, got: center.len() });
        }
        debug_assert!(radius >= 0.0);
        let cb = self.ambient_to_basis(center);
        let mut lo = vec![0i64; self.dim];
        let mut hi = vec![0i64; self.dim];
        let mut count: u128 = 1;
        for i in 0..self.dim {
            let row_norm = libm::sqrt(vecmath::dot(&self.inv_rows[i], &self.inv_rows[i]));
            let w = radius * row_norm + 1e-9;
            lo[i] = libm::floor(cb[i] - w) as i64;
            hi[i] = libm::ceil(cb[i] + w) as i64;
            count = count.saturating_mul((hi[i] - lo[i] + 1) as u128);
        }
        if count > budget {
            return Err(LatticeError::CapacityExceeded { candidates: count, budget });
        }
        let r2 = radius * radius * (1.0 + 1e-12) + 1e-12;
        let mut out = Vec::new();
        let mut k = lo.clone();
        loop {
            let p = self.point_from_basis_coords(&k);
            if vecmath::dist_sq(&p.coords, center) <= r2 {
                out.push(p);
            }
            // odometer over the box; lo..hi per axis keeps output lex sorted
            let mut axis = self.dim;
            loop {
                if axis == 0 {
                    return Ok(out);
                }
                axis -= 1;
                if k[axis] < hi[axis] {
                    k[axis] += 1;
                    for a in axis + 1..self.dim {
                        k[a] = lo[a];
                    }
                    break;
                }
            }
        }
    }

    /// Worst-case covering-radius bound for a sublattice of index `n` whose
    /// shape is Z-like: `(1/2) sqrt(2) * volume^{1/L} * n^{1/L}`.
    pub fn covering_radius_bound(&self, index: u64) -> f64 {
        debug_assert!(index >= 1);
        let l = self.dim as f64;
        0.5 * libm::sqrt(2.0)
            * libm::pow(self.cell_volume, 1.0 / l)
            * libm::pow(index as f64, 1.0 / l)
    }

    pub fn describe(&self) -> String {
        format!("{:?} L={} scale={}", self.name, self.dim, self.scale)
    }
}

fn better(best: &mut Option<(f64, Vec<i64>)>, d2: f64, bc: Vec<i64>) -> bool {
    match best {
        None => {
            *best = Some((d2, bc));
            true
        }
        Some((bd, bk)) => {
            if d2 < *bd || (d2 == *bd && bc < *bk) {
                *best = Some((d2, bc));
                true
            } else {
                false
            }
        }
    }
}

/// Round half toward negative infinity so the smaller basis coordinate wins
/// exact ties.
fn round_tie_down(y: f64) -> i64 {
    let fl = libm::floor(y);
    let frac = y - fl;
    if frac > 0.5 {
        fl as i64 + 1
    } else {
        fl as i64
    }
}

/// Volume of the L-dimensional unit sphere.
pub fn unit_sphere_volume(l: usize) -> f64 {
    debug_assert!(l >= 1);
    let lf = l as f64;
    libm::pow(core::f64::consts::PI, lf / 2.0) / libm::tgamma(lf / 2.0 + 1.0)
}

/// Normalized second moment of the L-sphere:
/// `Gamma(L/2 + 1)^{2/L} / ((L + 2) pi)`.
pub fn sphere_second_moment(l: usize) -> f64 {
    debug_assert!(l >= 1);
    let lf = l as f64;
    libm::pow(libm::tgamma(lf / 2.0 + 1.0), 2.0 / lf) / ((lf + 2.0) * core::f64::consts::PI)
}

/// 1/(2 pi e), the large-L limit of both lattice and sphere second moments.
pub fn second_moment_floor() -> f64 {
    1.0 / (2.0 * core::f64::consts::PI * core::f64::consts::E)
}
