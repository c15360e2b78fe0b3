//! Construction of the shift-invariant labeling function: tuple generation
//! inside expanding spheres, coset reduction, centroid costs and the optimal
//! assignment of tuples to central lattice points.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::assign::{self, CostMatrix};
use crate::lattice::unit_sphere_volume;
use crate::nested::{CellLattice, NestedSystem};
use crate::vecmath;
use crate::weights::{subsets, Mask, WeightProfile};
use crate::analysis;

/// One n-tuple of sublattice points, each in central-basis coordinates.
pub type Tuple = Vec<Vec<i64>>;

#[derive(Clone, Debug, PartialEq)]
pub enum LabelError {
    /// Sublattice index too large for the product cell: the construction
    /// sphere cannot reach enough points.
    IndexBound { desc: usize, index: u64, bound: f64 },
    Capacity,
    CosetCollision { survivors: usize, expected: usize },
    ProfileMismatch { expected: usize, got: usize },
    NotALabel,
    Certificate(assign::CertificateError),
}

impl core::fmt::Display for LabelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LabelError::IndexBound { desc, index, bound } => write!(
                f,
                "sublattice {desc} index {index} exceeds the reachable bound {bound:.1}; \
                 no tuple sphere can collect enough points"
            ),
            LabelError::Capacity => write!(f, "tuple enumeration exceeds the memory budget"),
            LabelError::CosetCollision { survivors, expected } => write!(
                f,
                "coset reduction left {survivors} tuples, expected {expected}; \
                 radius search must resume"
            ),
            LabelError::ProfileMismatch { expected, got } => {
                write!(f, "profile has {got} descriptions, system has {expected}")
            }
            LabelError::NotALabel => write!(f, "tuple is not in the image of the labeling"),
            LabelError::Certificate(e) => write!(f, "assignment not optimal: {e}"),
        }
    }
}

impl core::error::Error for LabelError {}

/// The shift-invariant tuple inventory for one product cell.
#[derive(Clone, Debug)]
pub struct TupleSet {
    tuples: Vec<Tuple>,
    radius: f64,
    psi: f64,
}

impl TupleSet {
    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Realized sphere expansion factor `(volume_final / volume_bound)^{1/L}`.
    pub fn psi(&self) -> f64 {
        self.psi
    }
}

fn tuple_coords(system: &NestedSystem, t: &Tuple) -> Vec<Vec<f64>> {
    t.iter().map(|z| system.central_coords(z)).collect()
}

/// Pairwise selection cost of one tuple:
/// `sum_kappa sum_{i<j} hat_gamma_pair * |mu_i l_i - mu_j l_j|^2`.
pub fn pairwise_cost(system: &NestedSystem, profile: &WeightProfile, t: &Tuple) -> f64 {
    let n = system.descriptions();
    let pts = tuple_coords(system, t);
    let mu = profile.mu();
    let mut cost = 0.0;
    for kappa in 1..n {
        for i in 0..n {
            for j in i + 1..n {
                let h = profile.hat_gamma_pair(kappa, i, j).expect("aggregate nonzero");
                let d = vecmath::sub(&vecmath::scaled(&pts[i], mu[i]), &vecmath::scaled(&pts[j], mu[j]));
                cost += h * vecmath::nsq(&d);
            }
        }
    }
    cost
}

/// Centroid cost of assigning `tuple` to the central point `lambda_c`:
/// `sum_kappa gbar_kappa |lambda_c - kappa-centroid|^2`.
pub fn assignment_cost(
    system: &NestedSystem,
    profile: &WeightProfile,
    lambda_c: &[i64],
    tuple: &Tuple,
) -> f64 {
    let n = system.descriptions();
    let lc = system.central_coords(lambda_c);
    let pts = tuple_coords(system, tuple);
    let mut cost = 0.0;
    for kappa in 1..n {
        let gbar = profile.gamma_bar(kappa, crate::weights::Filter::All);
        let centroid = profile.kappa_centroid(kappa, &pts);
        cost += gbar * vecmath::dist_nsq(&lc, &centroid);
    }
    cost
}

/// Lower-bound volume of the construction sphere: `nu_c prod N_i^{1/(n-1)}`.
fn volume_bound(system: &NestedSystem) -> f64 {
    let n = system.descriptions();
    let mut prod = 1.0;
    for s in system.subs() {
        prod *= libm::pow(s.index() as f64, 1.0 / (n as f64 - 1.0));
    }
    system.central().cell_volume() * prod
}

/// Reference expansion factor for the reachability bound; closed form where
/// available, else the conservative unit value.
fn psi_reference(n: usize, l: usize) -> f64 {
    if n == 2 {
        analysis::psi2()
    } else if n == 3 {
        analysis::psi3(l).unwrap_or(1.0)
    } else {
        1.0
    }
}

/// Check the index-reachability bound
/// `N_i <= (sqrt(2) psi)^L w_L N_pi^{1/(n-1)}` for every description.
fn check_index_bound(system: &NestedSystem) -> Result<(), LabelError> {
    let n = system.descriptions();
    let l = system.dim();
    let psi = psi_reference(n, l);
    let bound = libm::pow(libm::sqrt(2.0) * psi, l as f64)
        * unit_sphere_volume(l)
        * libm::pow(system.product_index() as f64, 1.0 / (n as f64 - 1.0));
    for (i, s) in system.subs().iter().enumerate() {
        if s.index() as f64 > bound {
            return Err(LabelError::IndexBound { desc: i, index: s.index(), bound });
        }
    }
    Ok(())
}

struct Candidate {
    tuple: Tuple,
    /// Smallest sphere radius at which the tuple becomes feasible:
    /// `max_{i<j} |l_i - l_j| / c_{i,j}`.
    activation: f64,
}

fn candidates_for_anchor(
    system: &NestedSystem,
    profile: &WeightProfile,
    anchor: &[i64],
    radius: f64,
    budget: u128,
) -> Result<Vec<Candidate>, LabelError> {
    let n = system.descriptions();
    let anchor_x = system.central_coords(anchor);
    // per-description candidate points within the anchor sphere
    let mut per_desc: Vec<Vec<Vec<i64>>> = Vec::with_capacity(n);
    per_desc.push(vec![anchor.to_vec()]);
    for i in 1..n {
        let r_i = radius * profile.c_factor(0, i);
        let pts = system
            .sub_points_in_ball(i, &anchor_x, r_i, budget)
            .map_err(|_| LabelError::Capacity)?;
        per_desc.push(pts);
    }
    let mut total: u128 = 1;
    for pd in &per_desc {
        total = total.saturating_mul(pd.len() as u128);
    }
    if total > budget {
        return Err(LabelError::Capacity);
    }

    let coords: Vec<Vec<Vec<f64>>> = per_desc
        .iter()
        .map(|pd| pd.iter().map(|z| system.central_coords(z)).collect())
        .collect();

    let mut out = Vec::new();
    let mut pick = vec![0usize; n];
    'outer: loop {
        // activation radius over all pairs
        let mut act = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                let d = libm::sqrt(vecmath::dist_sq(&coords[i][pick[i]], &coords[j][pick[j]]));
                act = act.max(d / profile.c_factor(i, j));
            }
        }
        if act <= radius {
            let tuple: Tuple = (0..n).map(|i| per_desc[i][pick[i]].clone()).collect();
            out.push(Candidate { tuple, activation: act });
        }
        // odometer
        let mut axis = n;
        loop {
            if axis == 1 {
                break 'outer;
            }
            axis -= 1;
            if pick[axis] + 1 < per_desc[axis].len() {
                pick[axis] += 1;
                for a in axis + 1..n {
                    pick[a] = 0;
                }
                continue 'outer;
            }
        }
    }
    Ok(out)
}

/// Generate the shift-invariant tuple inventory: one anchor pass per
/// sublattice-0 point in the canonical cell, radius grown to the smallest
/// inter-point breakpoint at which every anchor owns at least `N_0`
/// feasible tuples, then the cheapest `N_0` kept per anchor.
pub fn generate_tuples(
    system: &NestedSystem,
    profile: &WeightProfile,
    budget: u128,
) -> Result<TupleSet, LabelError> {
    let n = system.descriptions();
    if profile.descriptions() != n {
        return Err(LabelError::ProfileMismatch { expected: n, got: profile.descriptions() });
    }
    check_index_bound(system)?;

    let l = system.dim();
    let n0 = system.sub(0).index() as usize;
    let anchors = system.points_in_product_cell(CellLattice::Sub(0)).map_err(|_| LabelError::Capacity)?;
    debug_assert_eq!(anchors.len() as u64 * n0 as u64, system.product_index());

    let nu_bound = volume_bound(system);
    let r_bound = libm::pow(nu_bound / unit_sphere_volume(l), 1.0 / l as f64);

    // enumerate with a widening search radius until the breakpoint radius is
    // known to be fully covered for every anchor
    let mut search = r_bound * 1.6 + system.central().covering_radius();
    for _attempt in 0..24 {
        let mut all: Vec<Vec<Candidate>> = Vec::with_capacity(anchors.len());
        let mut needed = r_bound;
        let mut feasible = true;
        for anchor in &anchors {
            let mut cands = candidates_for_anchor(system, profile, anchor, search, budget)?;
            if cands.len() < n0 {
                feasible = false;
                break;
            }
            cands.sort_by(|a, b| a.activation.partial_cmp(&b.activation).unwrap());
            needed = needed.max(cands[n0 - 1].activation);
            all.push(cands);
        }
        if !feasible || needed > search {
            search = (needed.max(search) * 1.35).max(search * 1.35);
            continue;
        }
        let radius = needed;

        // keep the N_0 cheapest feasible tuples per anchor
        let mut tuples: Vec<Tuple> = Vec::with_capacity(anchors.len() * n0);
        for cands in all.iter_mut() {
            let mut feas: Vec<&Candidate> =
                cands.iter().filter(|c| c.activation <= radius + 1e-9).collect();
            feas.sort_by(|a, b| {
                let ca = pairwise_cost(system, profile, &a.tuple);
                let cb = pairwise_cost(system, profile, &b.tuple);
                ca.partial_cmp(&cb).unwrap().then_with(|| a.tuple.cmp(&b.tuple))
            });
            debug_assert!(feas.len() >= n0);
            for c in feas.into_iter().take(n0) {
                tuples.push(c.tuple.clone());
            }
        }

        let psi = libm::pow(
            unit_sphere_volume(l) * libm::pow(radius, l as f64) / nu_bound,
            1.0 / l as f64,
        );
        return Ok(TupleSet { tuples, radius, psi });
    }
    Err(LabelError::Capacity)
}

/// Canonicalize every tuple so its first element is the coset representative
/// and drop duplicates. The inventory from `generate_tuples` is already
/// canonical, so this is a validation pass there; arbitrary inventories may
/// shrink, which is reported as an error.
pub fn reduce_to_cosets(system: &NestedSystem, set: &TupleSet) -> Result<TupleSet, LabelError> {
    let expected = set.tuples.len();
    let mut seen: BTreeMap<Tuple, ()> = BTreeMap::new();
    for t in &set.tuples {
        let (_, trans) = system.canonical_rep_with_translate(&t[0]);
        let shift = system.product_translate_to_central(&trans);
        let canon: Tuple = t
            .iter()
            .map(|z| z.iter().zip(&shift).map(|(a, b)| a - b).collect())
            .collect();
        seen.insert(canon, ());
    }
    if seen.len() != expected {
        return Err(LabelError::CosetCollision { survivors: seen.len(), expected });
    }
    Ok(TupleSet {
        tuples: seen.into_keys().collect(),
        radius: set.radius,
        psi: set.psi,
    })
}

/// The labeling function: a bijection between canonical central points and
/// tuple cosets, extended shift-invariantly to the whole lattice.
#[derive(Clone, Debug)]
pub struct LabelingFunction {
    system: NestedSystem,
    /// Canonical central representatives, lexicographically sorted.
    centrals: Vec<Vec<i64>>,
    central_index: BTreeMap<Vec<i64>, usize>,
    /// Assigned tuple per central point (translate chosen by the optimizer).
    forward: Vec<Tuple>,
    /// Coset-canonical tuple -> (central idx, canonicalizing translate of the
    /// stored tuple, in product coords).
    inverse: BTreeMap<Tuple, (usize, Vec<i64>)>,
    psi: f64,
    radius: f64,
}

impl LabelingFunction {
    pub fn system(&self) -> &NestedSystem {
        &self.system
    }

    pub fn centrals(&self) -> &[Vec<i64>] {
        &self.centrals
    }

    pub fn forward(&self) -> &[Tuple] {
        &self.forward
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn size(&self) -> usize {
        self.centrals.len()
    }

    /// Rebuild the derived lookup tables from (centrals, forward) pairs;
    /// used when loading a stored labeling table.
    pub fn from_parts(
        system: NestedSystem,
        centrals: Vec<Vec<i64>>,
        forward: Vec<Tuple>,
        psi: f64,
        radius: f64,
    ) -> Result<Self, LabelError> {
        if centrals.len() != forward.len() || centrals.len() != system.product_index() as usize {
            return Err(LabelError::CosetCollision {
                survivors: forward.len(),
                expected: system.product_index() as usize,
            });
        }
        let central_index: BTreeMap<Vec<i64>, usize> =
            centrals.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        let mut inverse = BTreeMap::new();
        for (idx, t) in forward.iter().enumerate() {
            let (_, trans) = system.canonical_rep_with_translate(&t[0]);
            let shift = system.product_translate_to_central(&trans);
            let canon: Tuple = t
                .iter()
                .map(|z| z.iter().zip(&shift).map(|(a, b)| a - b).collect())
                .collect();
            if inverse.insert(canon, (idx, trans)).is_some() {
                return Err(LabelError::CosetCollision {
                    survivors: idx,
                    expected: forward.len(),
                });
            }
        }
        Ok(LabelingFunction { system, centrals, central_index, forward, inverse, psi, radius })
    }

    /// Apply the labeling to any central-lattice point (central basis
    /// coords); shift invariance supplies points outside the canonical cell.
    pub fn alpha_apply(&self, lambda_c: &[i64]) -> Tuple {
        let (rep, trans) = self.system.canonical_rep_with_translate(lambda_c);
        let idx = *self.central_index.get(&rep).expect("canonical rep enumerated");
        let shift = self.system.product_translate_to_central(&trans);
        self.forward[idx]
            .iter()
            .map(|z| z.iter().zip(&shift).map(|(a, b)| a + b).collect())
            .collect()
    }

    /// Invert a tuple back to its central point; errors if the tuple is not
    /// in the image of the labeling.
    pub fn alpha_invert(&self, tuple: &Tuple) -> Result<Vec<i64>, LabelError> {
        if tuple.len() != self.system.descriptions() {
            return Err(LabelError::NotALabel);
        }
        let (_, qtrans) = self.system.canonical_rep_with_translate(&tuple[0]);
        let qshift = self.system.product_translate_to_central(&qtrans);
        let canon: Tuple = tuple
            .iter()
            .map(|z| z.iter().zip(&qshift).map(|(a, b)| a - b).collect())
            .collect();
        let (idx, strans) = self.inverse.get(&canon).ok_or(LabelError::NotALabel)?;
        // query = stored + P (qtrans - strans)
        let delta: Vec<i64> = qtrans.iter().zip(strans).map(|(a, b)| a - b).collect();
        let shift = self.system.product_translate_to_central(&delta);
        Ok(self.centrals[*idx]
            .iter()
            .zip(&shift)
            .map(|(a, b)| a + b)
            .collect())
    }

    /// Average per-cell distortion contribution of the labeling table for one
    /// erasure pattern: `(1/N_pi) sum_c |lambda_c - xhat_ell(c)|^2`.
    pub fn pattern_table_distortion(&self, profile: &WeightProfile, pattern: Mask) -> f64 {
        let mut acc = 0.0;
        for (c, t) in self.centrals.iter().zip(&self.forward) {
            let lc = self.system.central_coords(c);
            let pts = tuple_coords(&self.system, t);
            let rec = profile.pattern_reconstruction(pattern, &pts);
            acc += vecmath::dist_nsq(&lc, &rec);
        }
        acc / self.centrals.len() as f64
    }

    /// Cost split of the stored labeling: pairwise sum `f`, centroid sum `g`
    /// and the per-cell weighted total `J`.
    pub fn evaluate(&self, profile: &WeightProfile) -> CostSplit {
        let n = self.system.descriptions();
        let mut f = 0.0;
        let mut g = 0.0;
        let mut j_weighted = 0.0;
        for (c, t) in self.centrals.iter().zip(&self.forward) {
            f += pairwise_cost(&self.system, profile, t);
            let lc = self.system.central_coords(c);
            let pts = tuple_coords(&self.system, t);
            for kappa in 1..n {
                let centroid = profile.kappa_centroid(kappa, &pts);
                let d = vecmath::dist_nsq(&lc, &centroid);
                g += d;
                j_weighted += profile.gamma_bar(kappa, crate::weights::Filter::All) * d;
            }
        }
        CostSplit { pairwise: f, centroid: g, total: (f + j_weighted) / self.centrals.len() as f64 }
    }
}

/// Labeling cost decomposition.
#[derive(Clone, Copy, Debug)]
pub struct CostSplit {
    /// Pairwise inter-tuple term (unnormalized sum over the cell).
    pub pairwise: f64,
    /// Unweighted centroid term (unnormalized sum over the cell).
    pub centroid: f64,
    /// Per-cell weighted total cost.
    pub total: f64,
}

/// Assign tuples to central points by minimum total centroid cost. Each
/// tuple is offered at the coset translate that wraps its first-level
/// weighted centroid into the canonical cell; the matching is certified
/// optimal via reduced costs.
pub fn assign_tuples(
    system: &NestedSystem,
    profile: &WeightProfile,
    set: &TupleSet,
) -> Result<LabelingFunction, LabelError> {
    let n = system.descriptions();
    if profile.descriptions() != n {
        return Err(LabelError::ProfileMismatch { expected: n, got: profile.descriptions() });
    }
    let centrals = system.points_in_product_cell(CellLattice::Central).map_err(|_| LabelError::Capacity)?;
    let size = centrals.len();
    if set.tuples.len() != size {
        return Err(LabelError::CosetCollision { survivors: set.tuples.len(), expected: size });
    }

    // wrap each tuple so its kappa=1 weighted centroid lands in the cell
    let wrapped: Vec<Tuple> = set
        .tuples
        .iter()
        .map(|t| {
            let pts = tuple_coords(system, t);
            let centroid = profile.kappa_centroid(1, &pts);
            let trans = system.cell_translate_of_point(&centroid);
            let shift = system.product_translate_to_central(&trans);
            t.iter()
                .map(|z| z.iter().zip(&shift).map(|(a, b)| a - b).collect())
                .collect()
        })
        .collect();

    let cost = CostMatrix::from_fn(size, |r, c| {
        assignment_cost(system, profile, &centrals[r], &wrapped[c])
    });
    let solution = assign::solve(&cost);
    let scale = solution.cost.abs().max(1.0) / size as f64;
    assign::certify(&cost, &solution, 1e-7 * scale.max(1.0)).map_err(LabelError::Certificate)?;

    let forward: Vec<Tuple> =
        solution.row_to_col.iter().map(|&c| wrapped[c].clone()).collect();
    LabelingFunction::from_parts(system.clone(), centrals, forward, set.psi, set.radius)
}

/// Convenience pipeline: generate, validate cosets, assign.
pub fn build_labeling(
    system: &NestedSystem,
    profile: &WeightProfile,
    budget: u128,
) -> Result<LabelingFunction, LabelError> {
    let set = generate_tuples(system, profile, budget)?;
    let set = reduce_to_cosets(system, &set)?;
    assign_tuples(system, profile, &set)
}

/// Fraction of tuples with any element outside the canonical cell.
pub fn stray_fraction(system: &NestedSystem, set: &TupleSet) -> f64 {
    let mut stray = 0usize;
    for t in &set.tuples {
        if t.iter().any(|z| !system.is_canonical(z)) {
            stray += 1;
        }
    }
    stray as f64 / set.tuples.len() as f64
}

/// Pattern masks in output order: ascending kappa, lexicographic within.
pub fn pattern_order(n: usize) -> Vec<Mask> {
    let mut out = Vec::new();
    for kappa in 1..=n {
        out.extend(subsets(n, kappa));
    }
    out
}
