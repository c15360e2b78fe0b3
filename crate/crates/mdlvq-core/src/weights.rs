//! Distortion-weight algebra over erasure patterns: index-set families of
//! kappa-subsets, aggregate weights, the derived pairwise and per-pattern
//! coefficients, and executable checks of the algebraic identities the
//! labeling construction rests on.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::vecmath;

/// Erasure pattern as a bitmask over descriptions `0..n`.
pub type Mask = u32;

pub fn mask_from_indices(idx: &[usize]) -> Mask {
    idx.iter().fold(0, |m, &i| m | 1 << i)
}

pub fn mask_indices(mask: Mask) -> Vec<usize> {
    (0..32).filter(|i| mask >> i & 1 == 1).collect()
}

pub fn mask_len(mask: Mask) -> usize {
    mask.count_ones() as usize
}

/// Pattern label like "0", "02", "012" (sorted description indices).
pub fn mask_label(mask: Mask) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    for i in mask_indices(mask) {
        let _ = write!(s, "{i}");
    }
    s
}

/// All kappa-subsets of `{0..n}` in lexicographic order of their index lists.
pub fn subsets(n: usize, kappa: usize) -> Vec<Mask> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(kappa);
    fn rec(n: usize, kappa: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Mask>) {
        if cur.len() == kappa {
            out.push(mask_from_indices(cur));
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, kappa, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, kappa, 0, &mut cur, &mut out);
    out
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num *= (n - i) as u128;
        den *= (i + 1) as u128;
    }
    (num / den) as u64
}

/// Which aggregate to take over a kappa-family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Filter {
    All,
    Containing(usize),
    ContainingPair(usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightError {
    NegativeGamma(Mask),
    EmptyKappaSum(usize),
    BadMu(usize),
    BadPattern(Mask),
    InfeasibleRadiusFactors { i: usize, j: usize, k: usize },
    ZeroAggregate(usize),
}

impl core::fmt::Display for WeightError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            WeightError::NegativeGamma(m) => {
                write!(f, "gamma weight for pattern {} is negative", mask_label(*m))
            }
            WeightError::EmptyKappaSum(k) => {
                write!(f, "gamma weights for kappa={k} sum to zero")
            }
            WeightError::BadMu(i) => write!(f, "mu[{i}] must be positive and finite"),
            WeightError::BadPattern(m) => write!(f, "pattern {m:#b} out of range"),
            WeightError::InfeasibleRadiusFactors { i, j, k } => write!(
                f,
                "radius factors violate the triangle bound: c[{i},{j}] > c[{i},{k}] + c[{k},{j}]"
            ),
            WeightError::ZeroAggregate(k) => {
                write!(f, "aggregate weight for kappa={k} is zero; coefficient undefined")
            }
        }
    }
}

impl core::error::Error for WeightError {}

/// Lagrangian distortion weights gamma per erasure pattern, description
/// weights mu, and optional pairwise sphere-radius factors.
#[derive(Clone, Debug)]
pub struct WeightProfile {
    n: usize,
    gamma: BTreeMap<Mask, f64>,
    mu: Vec<f64>,
    radius_factors: Option<BTreeMap<(usize, usize), f64>>,
}

impl WeightProfile {
    pub fn new(
        n: usize,
        gamma: BTreeMap<Mask, f64>,
        mu: Vec<f64>,
        radius_factors: Option<BTreeMap<(usize, usize), f64>>,
    ) -> Result<Self, WeightError> {
        assert!(n >= 1 && n <= 31);
        for (i, &m) in mu.iter().enumerate() {
            if !(m > 0.0) || !m.is_finite() {
                return Err(WeightError::BadMu(i));
            }
        }
        assert_eq!(mu.len(), n);
        let full: Mask = if n == 32 { Mask::MAX } else { (1 << n) - 1 };
        for (&mask, &g) in &gamma {
            if mask == 0 || mask & !full != 0 {
                return Err(WeightError::BadPattern(mask));
            }
            if g < 0.0 || !g.is_finite() {
                return Err(WeightError::NegativeGamma(mask));
            }
        }
        let p = WeightProfile { n, gamma, mu, radius_factors };
        for kappa in 1..n.max(2) {
            if kappa < n && p.gamma_bar(kappa, Filter::All) <= 0.0 {
                return Err(WeightError::EmptyKappaSum(kappa));
            }
        }
        p.check_radius_factors()?;
        Ok(p)
    }

    /// Equal weights for every pattern, unit description weights.
    pub fn symmetric(n: usize) -> Self {
        let mut gamma = BTreeMap::new();
        for kappa in 1..n {
            for m in subsets(n, kappa) {
                gamma.insert(m, 1.0);
            }
        }
        WeightProfile::new(n, gamma, vec![1.0; n], None).expect("symmetric profile is valid")
    }

    /// Two-description profile with the given single-description weights.
    pub fn two_channel(gamma0: f64, gamma1: f64) -> Result<Self, WeightError> {
        let mut gamma = BTreeMap::new();
        gamma.insert(0b01, gamma0);
        gamma.insert(0b10, gamma1);
        WeightProfile::new(2, gamma, vec![1.0, 1.0], None)
    }

    fn check_radius_factors(&self) -> Result<(), WeightError> {
        if let Some(c) = &self.radius_factors {
            for (&(i, j), &v) in c {
                assert!(i < j && j < self.n && v > 0.0);
            }
            // triangle feasibility of intersecting construction spheres
            for i in 0..self.n {
                for j in i + 1..self.n {
                    for k in 0..self.n {
                        if k == i || k == j {
                            continue;
                        }
                        if self.c_factor(i, j) > self.c_factor(i, k) + self.c_factor(k, j) + 1e-12 {
                            return Err(WeightError::InfeasibleRadiusFactors { i, j, k });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn descriptions(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn gamma_map(&self) -> &BTreeMap<Mask, f64> {
        &self.gamma
    }

    pub fn radius_factors(&self) -> Option<&BTreeMap<(usize, usize), f64>> {
        self.radius_factors.as_ref()
    }

    pub fn gamma(&self, mask: Mask) -> f64 {
        *self.gamma.get(&mask).unwrap_or(&0.0)
    }

    /// Pairwise sphere-radius factor, 1 unless configured.
    pub fn c_factor(&self, i: usize, j: usize) -> f64 {
        let key = (i.min(j), i.max(j));
        self.radius_factors.as_ref().and_then(|c| c.get(&key)).copied().unwrap_or(1.0)
    }

    pub fn max_c_factor(&self) -> f64 {
        let mut m: f64 = 1.0;
        if let Some(c) = &self.radius_factors {
            for &v in c.values() {
                m = m.max(v);
            }
        }
        m
    }

    /// Sum of gamma over the kappa-subsets selected by `filter`.
    pub fn gamma_bar(&self, kappa: usize, filter: Filter) -> f64 {
        let mut s = 0.0;
        for m in subsets(self.n, kappa) {
            let keep = match filter {
                Filter::All => true,
                Filter::Containing(i) => m >> i & 1 == 1,
                Filter::ContainingPair(i, j) => m >> i & 1 == 1 && m >> j & 1 == 1,
            };
            if keep {
                s += self.gamma(m);
            }
        }
        s
    }

    /// Pairwise coefficient from the per-kappa cost split:
    /// `(1/kappa^2) (gbar_i gbar_j / gbar - gbar_ij)`.
    pub fn hat_gamma_pair(&self, kappa: usize, i: usize, j: usize) -> Result<f64, WeightError> {
        assert!(i != j && i < self.n && j < self.n);
        let gbar = self.gamma_bar(kappa, Filter::All);
        if gbar == 0.0 {
            return Err(WeightError::ZeroAggregate(kappa));
        }
        let gi = self.gamma_bar(kappa, Filter::Containing(i));
        let gj = self.gamma_bar(kappa, Filter::Containing(j));
        let gij = self.gamma_bar(kappa, Filter::ContainingPair(i, j));
        Ok((gi * gj / gbar - gij) / (kappa * kappa) as f64)
    }

    /// Per-pattern side-distortion coefficient (general radius-factor form).
    /// With unit factors and n = 3 it reduces to the closed three-description
    /// constants.
    pub fn hat_gamma_ell(&self, kappa: usize, ell: Mask) -> Result<f64, WeightError> {
        let gbar = self.gamma_bar(kappa, Filter::All);
        if gbar == 0.0 {
            return Err(WeightError::ZeroAggregate(kappa));
        }
        let idx = mask_indices(ell);
        assert_eq!(idx.len(), kappa);
        let gi: Vec<f64> = (0..self.n).map(|i| self.gamma_bar(kappa, Filter::Containing(i))).collect();

        let mut t1 = 0.0;
        for &j in &idx {
            for i in 0..self.n {
                if i != j {
                    t1 += gi[i] * self.c_factor(i, j);
                }
            }
        }
        t1 *= gbar;

        let mut t2 = 0.0;
        for a in 0..idx.len() {
            for b in a + 1..idx.len() {
                t2 += self.c_factor(idx[a], idx[b]);
            }
        }
        t2 *= gbar * gbar;

        let mut t3 = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                t3 += gi[i] * gi[j] * self.c_factor(i, j);
            }
        }

        Ok((t1 - t2 - t3) / (gbar * gbar * (kappa * kappa) as f64))
    }

    /// Reconstruction for pattern `ell`: `(1/kappa) sum_{i in ell} mu_i v_i`.
    pub fn pattern_reconstruction(&self, ell: Mask, points: &[Vec<f64>]) -> Vec<f64> {
        let idx = mask_indices(ell);
        let dim = points[0].len();
        let mut out = vec![0.0; dim];
        for &i in &idx {
            vecmath::add_scaled_into(&mut out, &points[i], self.mu[i]);
        }
        let k = idx.len() as f64;
        for v in out.iter_mut() {
            *v /= k;
        }
        out
    }

    /// Weighted centroid of the scaled points at level kappa:
    /// `(1/(kappa gbar)) sum_i gbar_i mu_i v_i`.
    pub fn kappa_centroid(&self, kappa: usize, points: &[Vec<f64>]) -> Vec<f64> {
        let gbar = self.gamma_bar(kappa, Filter::All);
        let dim = points[0].len();
        let mut out = vec![0.0; dim];
        for i in 0..self.n {
            let gi = self.gamma_bar(kappa, Filter::Containing(i));
            vecmath::add_scaled_into(&mut out, &points[i], gi * self.mu[i]);
        }
        let d = kappa as f64 * gbar;
        for v in out.iter_mut() {
            *v /= d;
        }
        out
    }
}

/// Residual of the per-kappa cost decomposition on one instance:
/// `sum_ell gamma_ell |lc - (1/k) sum mu_i l_i|^2` against the pairwise +
/// centroid split. Zero up to rounding for any inputs.
pub fn theorem1_residual(
    profile: &WeightProfile,
    kappa: usize,
    lambda_c: &[f64],
    lambda: &[Vec<f64>],
) -> f64 {
    let n = profile.descriptions();
    assert_eq!(lambda.len(), n);
    let mut lhs = 0.0;
    for m in subsets(n, kappa) {
        let rec = profile.pattern_reconstruction(m, lambda);
        lhs += profile.gamma(m) * vecmath::dist_nsq(lambda_c, &rec);
    }

    let mut rhs = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let hij = profile.hat_gamma_pair(kappa, i, j).expect("aggregate nonzero");
            let d = vecmath::sub(
                &vecmath::scaled(&lambda[i], profile.mu()[i]),
                &vecmath::scaled(&lambda[j], profile.mu()[j]),
            );
            rhs += hij * vecmath::nsq(&d);
        }
    }
    let gbar = profile.gamma_bar(kappa, Filter::All);
    let centroid = profile.kappa_centroid(kappa, lambda);
    rhs += gbar * vecmath::dist_nsq(lambda_c, &centroid);

    (lhs - rhs).abs()
}

/// Outcome of one identity check.
#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub max_residual: f64,
    pub scale: f64,
}

impl IdentityCheck {
    pub fn passed(&self, rel_tol: f64) -> bool {
        self.max_residual <= rel_tol * self.scale.max(1.0)
    }
}

/// Randomized check of the aggregate-weight and norm identities used by the
/// cost decomposition, for all kappa in `1..=n`.
pub fn check_combinatorial_identities(
    n: usize,
    profile: &WeightProfile,
    vectors: &[Vec<f64>],
    lambda_c: &[f64],
) -> Vec<IdentityCheck> {
    assert_eq!(profile.descriptions(), n);
    assert_eq!(vectors.len(), n);
    let mut sum_lj = IdentityCheck { name: "aggregate_sum_over_others", max_residual: 0.0, scale: 0.0 };
    let mut sum_lij = IdentityCheck { name: "aggregate_pair_sum", max_residual: 0.0, scale: 0.0 };
    let mut inner = IdentityCheck { name: "inner_product_aggregation", max_residual: 0.0, scale: 0.0 };
    let mut norm0 = IdentityCheck { name: "weighted_pair_norm_split", max_residual: 0.0, scale: 0.0 };
    let mut norm1 = IdentityCheck { name: "pair_aggregate_norm_split", max_residual: 0.0, scale: 0.0 };
    let mut norm2 = IdentityCheck { name: "pattern_sum_norm_split", max_residual: 0.0, scale: 0.0 };
    let mut mean = IdentityCheck { name: "centroid_decomposition", max_residual: 0.0, scale: 0.0 };

    for kappa in 1..=n {
        let gbar = profile.gamma_bar(kappa, Filter::All);
        let gi: Vec<f64> =
            (0..n).map(|i| profile.gamma_bar(kappa, Filter::Containing(i))).collect();

        // sum over j != i of gbar_j == kappa gbar - gbar_i
        for i in 0..n {
            let lhs: f64 = (0..n).filter(|&j| j != i).map(|j| gi[j]).sum();
            let rhs = kappa as f64 * gbar - gi[i];
            sum_lj.max_residual = sum_lj.max_residual.max((lhs - rhs).abs());
            sum_lj.scale = sum_lj.scale.max(rhs.abs());
        }

        // sum over all j of gbar_{i,j} == kappa gbar_i (with gbar_{i,i} = gbar_i)
        for i in 0..n {
            let mut lhs = 0.0;
            for j in 0..n {
                lhs += if j == i {
                    gi[i]
                } else {
                    profile.gamma_bar(kappa, Filter::ContainingPair(i, j))
                };
            }
            let rhs = kappa as f64 * gi[i];
            sum_lij.max_residual = sum_lij.max_residual.max((lhs - rhs).abs());
            sum_lij.scale = sum_lij.scale.max(rhs.abs());
        }

        // sum_ell gamma <lc, sum_{i in ell} v_i> == <lc, sum_i gbar_i v_i>
        {
            let mut lhs = 0.0;
            for m in subsets(n, kappa) {
                let mut s = vec![0.0; lambda_c.len()];
                for i in mask_indices(m) {
                    vecmath::add_scaled_into(&mut s, &vectors[i], 1.0);
                }
                lhs += profile.gamma(m) * vecmath::dot(lambda_c, &s) / lambda_c.len() as f64;
            }
            let mut agg = vec![0.0; lambda_c.len()];
            for i in 0..n {
                vecmath::add_scaled_into(&mut agg, &vectors[i], gi[i]);
            }
            let rhs = vecmath::dot(lambda_c, &agg) / lambda_c.len() as f64;
            inner.max_residual = inner.max_residual.max((lhs - rhs).abs());
            inner.scale = inner.scale.max(rhs.abs());
        }

        // weighted pair-norm split over gbar_i gbar_j
        {
            let mut lhs = 0.0;
            let mut cross = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    let d = vecmath::sub(&vectors[i], &vectors[j]);
                    lhs += gi[i] * gi[j] * vecmath::nsq(&d);
                    cross +=
                        gi[i] * gi[j] * vecmath::dot(&vectors[i], &vectors[j]) / lambda_c.len() as f64;
                }
            }
            let mut rhs = -2.0 * cross;
            for i in 0..n {
                rhs += gi[i] * (kappa as f64 * gbar - gi[i]) * vecmath::nsq(&vectors[i]);
            }
            norm0.max_residual = norm0.max_residual.max((lhs - rhs).abs());
            norm0.scale = norm0.scale.max(rhs.abs());
        }

        // pair-aggregate norm split over gbar_{i,j}
        {
            let mut lhs = 0.0;
            let mut cross = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    let gij = profile.gamma_bar(kappa, Filter::ContainingPair(i, j));
                    let d = vecmath::sub(&vectors[i], &vectors[j]);
                    lhs += gij * vecmath::nsq(&d);
                    cross += gij * vecmath::dot(&vectors[i], &vectors[j]) / lambda_c.len() as f64;
                }
            }
            let mut rhs = -2.0 * cross;
            for i in 0..n {
                rhs += (kappa as f64 - 1.0) * gi[i] * vecmath::nsq(&vectors[i]);
            }
            norm1.max_residual = norm1.max_residual.max((lhs - rhs).abs());
            norm1.scale = norm1.scale.max(rhs.abs().max(lhs.abs()));
        }

        // sum_ell gamma |sum_{i in ell} v_i|^2 split
        {
            let mut lhs = 0.0;
            for m in subsets(n, kappa) {
                let mut s = vec![0.0; lambda_c.len()];
                for i in mask_indices(m) {
                    vecmath::add_scaled_into(&mut s, &vectors[i], 1.0);
                }
                lhs += profile.gamma(m) * vecmath::nsq(&s);
            }
            let mut rhs = 0.0;
            for i in 0..n {
                rhs += kappa as f64 * gi[i] * vecmath::nsq(&vectors[i]);
            }
            for i in 0..n {
                for j in i + 1..n {
                    let gij = profile.gamma_bar(kappa, Filter::ContainingPair(i, j));
                    let d = vecmath::sub(&vectors[i], &vectors[j]);
                    rhs -= gij * vecmath::nsq(&d);
                }
            }
            norm2.max_residual = norm2.max_residual.max((lhs - rhs).abs());
            norm2.scale = norm2.scale.max(rhs.abs().max(lhs.abs()));
        }

        // full centroid decomposition (mu = 1 specialization of the cost split)
        {
            let mut lhs = 0.0;
            for m in subsets(n, kappa) {
                let idx = mask_indices(m);
                let mut rec = vec![0.0; lambda_c.len()];
                for &i in &idx {
                    vecmath::add_scaled_into(&mut rec, &vectors[i], 1.0);
                }
                for v in rec.iter_mut() {
                    *v /= kappa as f64;
                }
                lhs += profile.gamma(m) * vecmath::dist_nsq(lambda_c, &rec);
            }
            let mut centroid = vec![0.0; lambda_c.len()];
            for i in 0..n {
                vecmath::add_scaled_into(&mut centroid, &vectors[i], gi[i]);
            }
            for v in centroid.iter_mut() {
                *v /= kappa as f64 * gbar;
            }
            let mut rhs = gbar * vecmath::dist_nsq(lambda_c, &centroid);
            for i in 0..n {
                for j in i + 1..n {
                    let coeff = (gi[i] * gi[j] / gbar
                        - profile.gamma_bar(kappa, Filter::ContainingPair(i, j)))
                        / (kappa * kappa) as f64;
                    let d = vecmath::sub(&vectors[i], &vectors[j]);
                    rhs += coeff * vecmath::nsq(&d);
                }
            }
            mean.max_residual = mean.max_residual.max((lhs - rhs).abs());
            mean.scale = mean.scale.max(rhs.abs());
        }
    }

    vec![sum_lj, sum_lij, inner, norm0, norm1, norm2, mean]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Stream, StreamKind};

    fn random_profile(n: usize, s: &mut Stream) -> WeightProfile {
        let mut gamma = BTreeMap::new();
        for kappa in 1..=n {
            for m in subsets(n, kappa) {
                gamma.insert(m, 0.1 + s.uniform() * 3.0);
            }
        }
        let mu: Vec<f64> = (0..n).map(|_| 0.5 + s.uniform() * 2.0).collect();
        WeightProfile::new(n, gamma, mu, None).unwrap()
    }

    fn random_vectors(n: usize, dim: usize, s: &mut Stream) -> Vec<Vec<f64>> {
        (0..n).map(|_| (0..dim).map(|_| (s.uniform() - 0.5) * 10.0).collect()).collect()
    }

    #[test]
    fn family_cardinalities() {
        for n in 2..=8usize {
            for kappa in 1..=n {
                let fam = subsets(n, kappa);
                assert_eq!(fam.len() as u64, binomial(n, kappa));
                for i in 0..n {
                    let ci = fam.iter().filter(|&&m| m >> i & 1 == 1).count() as u64;
                    assert_eq!(ci, binomial(n - 1, kappa - 1));
                    for j in 0..n {
                        if j == i {
                            continue;
                        }
                        let cij = fam
                            .iter()
                            .filter(|&&m| m >> i & 1 == 1 && m >> j & 1 == 1)
                            .count() as u64;
                        assert_eq!(cij, if kappa >= 2 { binomial(n - 2, kappa - 2) } else { 0 });
                    }
                }
            }
        }
    }

    #[test]
    fn subsets_are_lexicographic() {
        let fam = subsets(3, 2);
        assert_eq!(fam, vec![0b011, 0b101, 0b110]);
    }

    #[test]
    fn gamma_bar_examples() {
        let p = WeightProfile::symmetric(3);
        assert!((p.gamma_bar(2, Filter::All) - 3.0).abs() < 1e-12);
        // patterns containing description 1 at kappa=2: {0,1} and {1,2}
        assert!((p.gamma_bar(2, Filter::Containing(1)) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_bar_matches_brute_force() {
        let mut s = Stream::new(2, StreamKind::Oracle, 0);
        let p = random_profile(5, &mut s);
        for kappa in 1..=4usize {
            for i in 0..5 {
                let brute: f64 = subsets(5, kappa)
                    .iter()
                    .filter(|&&m| m >> i & 1 == 1)
                    .map(|&m| p.gamma(m))
                    .sum();
                assert!((p.gamma_bar(kappa, Filter::Containing(i)) - brute).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hat_gamma_pair_two_descriptions() {
        let p = WeightProfile::two_channel(1.7, 0.4).unwrap();
        let h = p.hat_gamma_pair(1, 0, 1).unwrap();
        assert!((h - 1.7 * 0.4 / 2.1).abs() < 1e-12);
    }

    #[test]
    fn hat_gamma_pair_symmetry() {
        let mut s = Stream::new(4, StreamKind::Oracle, 0);
        let p = random_profile(4, &mut s);
        for kappa in 1..=3 {
            for i in 0..4 {
                for j in 0..4 {
                    if i == j {
                        continue;
                    }
                    let a = p.hat_gamma_pair(kappa, i, j).unwrap();
                    let b = p.hat_gamma_pair(kappa, j, i).unwrap();
                    assert!((a - b).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn hat_gamma_ell_three_description_constants() {
        let p = WeightProfile::symmetric(3);
        for i in 0..3 {
            let h = p.hat_gamma_ell(1, 1 << i).unwrap();
            assert!((h - 1.0 / 3.0).abs() < 1e-12, "{h}");
        }
        for m in subsets(3, 2) {
            let h = p.hat_gamma_ell(2, m).unwrap();
            assert!((h - 1.0 / 12.0).abs() < 1e-12, "{h}");
        }
    }

    #[test]
    fn hat_gamma_ell_asymmetric_value() {
        let mut gamma = BTreeMap::new();
        gamma.insert(0b001u32, 2.0);
        gamma.insert(0b010u32, 1.0);
        gamma.insert(0b100u32, 1.0);
        for m in subsets(3, 2) {
            gamma.insert(m, 1.0);
        }
        let p = WeightProfile::new(3, gamma, vec![1.0; 3], None).unwrap();
        // (g1^2 + g2^2 + g1 g2) / (g0+g1+g2)^2 = 3/16
        let h = p.hat_gamma_ell(1, 0b001).unwrap();
        assert!((h - 3.0 / 16.0).abs() < 1e-12, "{h}");
    }

    #[test]
    fn hat_gamma_ell_reduces_to_kappa_forms() {
        // the general radius-factor expression at unit factors equals the
        // closed three-description forms for random weights
        let mut s = Stream::new(9, StreamKind::Oracle, 0);
        for _ in 0..200 {
            let p = random_profile(3, &mut s);
            let g = |m: Mask| p.gamma(m);
            let s1 = g(0b001) + g(0b010) + g(0b100);
            for i in 0..3usize {
                let (j, k) = match i {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let direct = (g(1 << j) * g(1 << j) + g(1 << k) * g(1 << k)
                    + g(1 << j) * g(1 << k))
                    / (s1 * s1);
                let h = p.hat_gamma_ell(1, 1 << i).unwrap();
                assert!((h - direct).abs() < 1e-12 * direct.max(1.0));
            }
            let s2 = g(0b011) + g(0b101) + g(0b110);
            let pair = |a: usize, b: usize| g(mask_from_indices(&[a, b]));
            for m in subsets(3, 2) {
                let idx = mask_indices(m);
                let (i, j) = (idx[0], idx[1]);
                let k = 3 - i - j;
                let direct = 0.25
                    * (pair(i, k) * pair(i, k) + pair(j, k) * pair(j, k) + pair(i, k) * pair(j, k))
                    / (s2 * s2);
                let h = p.hat_gamma_ell(2, m).unwrap();
                assert!((h - direct).abs() < 1e-12 * direct.max(1.0));
            }
        }
    }

    #[test]
    fn symmetric_hat_gamma_constant_within_kappa() {
        for n in 2..=6usize {
            let p = WeightProfile::symmetric(n);
            for kappa in 1..n {
                let fam = subsets(n, kappa);
                let first = p.hat_gamma_ell(kappa, fam[0]).unwrap();
                for m in fam {
                    assert!((p.hat_gamma_ell(kappa, m).unwrap() - first).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn cost_split_residuals() {
        let mut s = Stream::new(7, StreamKind::Oracle, 0);
        for n in 2..=5usize {
            let mut max_rel = 0.0f64;
            for _ in 0..1000 {
                let p = random_profile(n, &mut s);
                let dim = 1 + s.below(4) as usize;
                let v = random_vectors(n, dim, &mut s);
                let lc: Vec<f64> = (0..dim).map(|_| (s.uniform() - 0.5) * 10.0).collect();
                for kappa in 1..n {
                    let r = theorem1_residual(&p, kappa, &lc, &v);
                    let scale: f64 = subsets(n, kappa)
                        .iter()
                        .map(|&m| p.gamma(m) * vecmath::dist_nsq(&lc, &p.pattern_reconstruction(m, &v)))
                        .sum();
                    max_rel = max_rel.max(r / scale.max(1.0));
                }
            }
            assert!(max_rel < 1e-9, "n={n}: {max_rel}");
        }
    }

    #[test]
    fn cost_split_zero_distortion_point() {
        // all scaled points equal to lambda_c: both sides vanish
        let p = WeightProfile::symmetric(3);
        let lc = vec![2.0, -1.0];
        let v = vec![lc.clone(), lc.clone(), lc.clone()];
        for kappa in 1..3 {
            assert!(theorem1_residual(&p, kappa, &lc, &v) < 1e-12);
        }
    }

    #[test]
    fn cost_split_two_channel_decomposition() {
        // kappa=1, n=2: LHS is the plain weighted sum of the two distortions
        let p = WeightProfile::two_channel(1.3, 0.6).unwrap();
        let lc = vec![0.7];
        let v = vec![vec![1.9], vec![-0.4]];
        let lhs = 1.3 * (0.7f64 - 1.9).powi(2) + 0.6 * (0.7f64 + 0.4).powi(2);
        let h = p.hat_gamma_pair(1, 0, 1).unwrap();
        let centroid = (1.3 * 1.9 + 0.6 * -0.4) / 1.9;
        let rhs = h * (1.9f64 + 0.4).powi(2) + 1.9 * (0.7 - centroid) * (0.7 - centroid);
        assert!((lhs - rhs).abs() < 1e-12);
        assert!(theorem1_residual(&p, 1, &lc, &v) < 1e-12);
    }

    #[test]
    fn identity_suite_randomized() {
        let mut s = Stream::new(11, StreamKind::Oracle, 0);
        for n in 2..=6usize {
            for _ in 0..200 {
                let p = random_profile(n, &mut s);
                let dim = 1 + s.below(3) as usize;
                let v = random_vectors(n, dim, &mut s);
                let lc: Vec<f64> = (0..dim).map(|_| (s.uniform() - 0.5) * 10.0).collect();
                for c in check_combinatorial_identities(n, &p, &v, &lc) {
                    assert!(c.passed(1e-9), "n={n} {}: {} vs {}", c.name, c.max_residual, c.scale);
                }
            }
        }
    }

    #[test]
    fn kappa_one_pair_sum_degenerates() {
        // at kappa=1 the pair aggregates vanish, so the pair-sum identity
        // reads gbar_i = kappa gbar_i
        let p = WeightProfile::symmetric(4);
        assert_eq!(p.gamma_bar(1, Filter::ContainingPair(0, 1)), 0.0);
    }

    #[test]
    fn infeasible_radius_factors_rejected() {
        let mut c = BTreeMap::new();
        c.insert((0usize, 1usize), 5.0);
        c.insert((0usize, 2usize), 1.0);
        c.insert((1usize, 2usize), 1.0);
        let mut gamma = BTreeMap::new();
        for kappa in 1..3 {
            for m in subsets(3, kappa) {
                gamma.insert(m, 1.0);
            }
        }
        let err = WeightProfile::new(3, gamma, vec![1.0; 3], Some(c)).unwrap_err();
        assert!(matches!(err, WeightError::InfeasibleRadiusFactors { .. }));
    }

    #[test]
    fn negative_gamma_rejected() {
        let mut gamma = BTreeMap::new();
        gamma.insert(0b01u32, -1.0);
        gamma.insert(0b10u32, 1.0);
        let err = WeightProfile::new(2, gamma, vec![1.0, 1.0], None).unwrap_err();
        assert!(matches!(err, WeightError::NegativeGamma(_)));
    }
}
