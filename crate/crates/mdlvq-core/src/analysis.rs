//! Closed-form rate/distortion analysis: sphere-intersection shell integrals
//! and the expansion factor they determine, the finite-dimensional side
//! distortion constant, theoretical distortions and rates, distortion
//! products, the Gaussian inner bound, rate loss, and binning thresholds.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::lattice::{sphere_second_moment, unit_sphere_volume};
use crate::vecmath::Kahan;
use crate::weights::{self, Mask, WeightProfile};

/// Normalized second moment of the body-centered cubic lattice,
/// 19 / (192 * 2^(1/3)). Cross-checked by Monte-Carlo cell sampling in the
/// test suite before being relied on.
pub const G_BCC: f64 = 0.07854330666385403;

/// Largest odd dimension for which the alternating shell sums retain useful
/// f64 precision.
pub const MAX_ODD_DIM: usize = 41;

#[derive(Clone, Debug, PartialEq)]
pub enum AnalysisError {
    /// The shell integrals have closed forms for odd dimensions only.
    EvenDimension(usize),
    DimensionTooLarge(usize),
    InfeasibleRate { needed_index: f64 },
    BadParameter(&'static str),
}

impl core::fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AnalysisError::EvenDimension(l) => {
                write!(f, "dimension {l} unsupported: closed forms exist for odd L only")
            }
            AnalysisError::DimensionTooLarge(l) => {
                write!(f, "dimension {l} exceeds the numerically stable cap {MAX_ODD_DIM}")
            }
            AnalysisError::InfeasibleRate { needed_index } => {
                write!(f, "rate inversion yields index {needed_index} < 1; rate infeasible")
            }
            AnalysisError::BadParameter(s) => write!(f, "bad parameter: {s}"),
        }
    }
}

impl core::error::Error for AnalysisError {}

fn require_odd(l: usize) -> Result<(), AnalysisError> {
    if l == 0 || l % 2 == 0 {
        return Err(AnalysisError::EvenDimension(l));
    }
    if l > MAX_ODD_DIM {
        return Err(AnalysisError::DimensionTooLarge(l));
    }
    Ok(())
}

fn binomial_f(n: usize, k: usize) -> f64 {
    weights::binomial(n, k) as f64
}

/// Shell integral over two intersecting unit spheres: with `extra = 0` the
/// count form (denominators `L+m+j`), with `extra = 2` the squared-distance
/// weighted form (`L+m+j+2`). Compensated summation keeps the alternating
/// terms honest.
fn shell_sum(l: usize, extra: usize) -> f64 {
    let hp = (l + 1) / 2; // (L+1)/2
    let mut acc = Kahan::default();
    for m in 0..=hp {
        let outer = binomial_f(hp, m)
            * libm::pow(2.0, (hp - m) as f64)
            * if m % 2 == 0 { 1.0 } else { -1.0 };
        // Pochhammer ratio ((L+1)/2)_k ((1-L)/2)_k / (((L+3)/2)_k k!)
        let mut poch = 1.0;
        for k in 0..=(l - 1) / 2 {
            if k > 0 {
                let kf = k as f64;
                let a = (l as f64 + 1.0) / 2.0 + kf - 1.0;
                let b = (1.0 - l as f64) / 2.0 + kf - 1.0;
                let c = (l as f64 + 3.0) / 2.0 + kf - 1.0;
                poch *= a * b / (c * kf);
            }
            let mut inner = Kahan::default();
            for j in 0..=k {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                let t = binomial_f(k, j)
                    * libm::pow(0.5, (k - j) as f64)
                    * sign
                    * libm::pow(0.25, j as f64)
                    / (l + m + j + extra) as f64;
                inner.add(t);
            }
            acc.add(outer * poch * inner.value());
        }
    }
    acc.value()
}

/// Count-form shell integral constant (odd L).
pub fn beta_l(l: usize) -> Result<f64, AnalysisError> {
    require_odd(l)?;
    Ok(shell_sum(l, 0))
}

/// Squared-distance-weighted shell integral constant (odd L).
pub fn beta_tilde_l(l: usize) -> Result<f64, AnalysisError> {
    require_odd(l)?;
    Ok(shell_sum(l, 2))
}

/// Sphere expansion factor for three descriptions, odd L:
/// `(w_L/w_{L-1})^{1/2L} ((L+1)/2L)^{1/2L} beta_L^{-1/2L}`.
pub fn psi3(l: usize) -> Result<f64, AnalysisError> {
    require_odd(l)?;
    let beta = beta_l(l)?;
    let w_ratio = if l == 1 {
        2.0 // w_1 / w_0 = 2 / 1
    } else {
        unit_sphere_volume(l) / unit_sphere_volume(l - 1)
    };
    let e = 1.0 / (2.0 * l as f64);
    Ok(libm::pow(w_ratio, e)
        * libm::pow((l as f64 + 1.0) / (2.0 * l as f64), e)
        * libm::pow(beta, -e))
}

/// Two descriptions never need expansion.
pub fn psi2() -> f64 {
    1.0
}

/// Large-L limit of the three-description expansion factor: (4/3)^{1/4}.
pub fn psi3_infinity() -> f64 {
    libm::pow(4.0 / 3.0, 0.25)
}

/// Finite-dimensional three-description distortion constant:
/// `(L+2)/L * (beta~_L / beta_L) * psi_{3,L}^2`.
pub fn phi_l(l: usize) -> Result<f64, AnalysisError> {
    require_odd(l)?;
    let p = psi3(l)?;
    Ok((l as f64 + 2.0) / l as f64 * (beta_tilde_l(l)? / beta_l(l)?) * p * p)
}

/// Large-L limit of the distortion constant: (4/3)^{1/2}.
pub fn phi_infinity() -> f64 {
    libm::sqrt(4.0 / 3.0)
}

/// Two-description side distortions:
/// `D_i = (gamma_j / (gamma_0+gamma_1))^2 G(S_L) (nu_c N_0 N_1 mu_0 mu_1)^{2/L}`.
pub fn side_distortion_two(
    gamma0: f64,
    gamma1: f64,
    l: usize,
    nu_c: f64,
    n0: u64,
    n1: u64,
    mu0: f64,
    mu1: f64,
) -> (f64, f64) {
    let base = sphere_second_moment(l)
        * libm::pow(nu_c * (n0 as f64) * (n1 as f64) * mu0 * mu1, 2.0 / l as f64);
    let s = gamma0 + gamma1;
    (gamma1 * gamma1 / (s * s) * base, gamma0 * gamma0 / (s * s) * base)
}

/// Same, with the index pair supplied by the Diggavi-style comparison
/// constant `g_cell` in place of the sphere moment.
pub fn side_distortion_two_with_constant(
    gamma0: f64,
    gamma1: f64,
    l: usize,
    nu_c: f64,
    n0: u64,
    n1: u64,
    mu0: f64,
    mu1: f64,
    g_cell: f64,
) -> (f64, f64) {
    let (d0, d1) = side_distortion_two(gamma0, gamma1, l, nu_c, n0, n1, mu0, mu1);
    let f = g_cell / sphere_second_moment(l);
    (d0 * f, d1 * f)
}

/// Three-description side distortions per erasure pattern, keyed by mask:
/// `D_ell = hat_gamma_ell Phi_L G(S_L) nu_c^{2/L} (mu_0 mu_1 mu_2 N_0 N_1 N_2)^{1/L}`.
pub fn side_distortion_three(
    profile: &WeightProfile,
    l: usize,
    nu_c: f64,
    n_idx: &[u64; 3],
) -> Result<BTreeMap<Mask, f64>, AnalysisError> {
    require_odd(l)?;
    assert_eq!(profile.descriptions(), 3);
    let phi = phi_l(l)?;
    let mu = profile.mu();
    let scale = phi
        * sphere_second_moment(l)
        * libm::pow(nu_c, 2.0 / l as f64)
        * libm::pow(
            mu[0] * mu[1] * mu[2] * (n_idx[0] * n_idx[1] * n_idx[2]) as f64,
            1.0 / l as f64,
        );
    let mut out = BTreeMap::new();
    for kappa in 1..3usize {
        for m in weights::subsets(3, kappa) {
            let h = profile
                .hat_gamma_ell(kappa, m)
                .map_err(|_| AnalysisError::BadParameter("zero aggregate weight"))?;
            out.insert(m, h * scale);
        }
    }
    Ok(out)
}

/// Central distortion `G(Lambda_c) nu_c^{2/L}`.
pub fn central_distortion(g_central: f64, l: usize, nu_c: f64) -> f64 {
    g_central * libm::pow(nu_c, 2.0 / l as f64)
}

/// Central and side description rates in bits/dimension given the source
/// differential entropy `h` (bits per vector).
pub fn rates(h: f64, l: usize, nu_c: f64, n_idx: &[u64], mu: &[f64]) -> (f64, Vec<f64>) {
    let lf = l as f64;
    let rc = h / lf - libm::log2(nu_c) / lf;
    let ri = n_idx
        .iter()
        .zip(mu)
        .map(|(&n, &m)| rc - libm::log2(n as f64 * m) / lf)
        .collect();
    (rc, ri)
}

/// Invert a side rate to the (real-valued) index: `N = 2^{h - L R} / (nu_c mu)`.
pub fn index_from_rate(
    h: f64,
    l: usize,
    nu_c: f64,
    rate: f64,
    mu: f64,
) -> Result<f64, AnalysisError> {
    let n = libm::exp2(h - l as f64 * rate) / (nu_c * mu);
    if n < 1.0 {
        return Err(AnalysisError::InfeasibleRate { needed_index: n });
    }
    Ok(n)
}

/// Symmetric three-description distortion product
/// `(1/36) Phi_L^2 G(S_L)^2 G_c 2^{(6/L) h - 6R}`; independent of the central
/// rate by construction.
pub fn distortion_product_three(
    l: usize,
    rate: f64,
    h: f64,
    g_central: f64,
) -> Result<f64, AnalysisError> {
    let phi = phi_l(l)?;
    let g = sphere_second_moment(l);
    Ok(phi * phi * g * g * g_central / 36.0
        * libm::exp2(6.0 * h / l as f64 - 6.0 * rate))
}

/// Large-L Gaussian limit of the distortion product: `(1/27) sigma^6 2^{-6R}`.
pub fn gaussian_limit_product(rate: f64, sigma2: f64) -> f64 {
    sigma2 * sigma2 * sigma2 / 27.0 * libm::exp2(-6.0 * rate)
}

#[derive(Clone, Debug)]
pub struct GaussianInnerBound {
    pub noise_var: f64,
    pub mmse1: f64,
    pub mmse2: f64,
    pub mmse3: f64,
    pub distortion_product: f64,
}

/// High-resolution MMSE triple of the correlated-noise Gaussian test channel
/// with three looks, and its distortion product. `rho` in (-1/2, 1/2].
pub fn gaussian_inner_bound(rho: f64, rate: f64) -> Result<GaussianInnerBound, AnalysisError> {
    if !(rho > -0.5 && rho <= 0.5) {
        return Err(AnalysisError::BadParameter("rho must lie in (-1/2, 1/2]"));
    }
    let noise_var =
        libm::pow(1.0 - rho, -2.0 / 3.0) * libm::pow(1.0 + 2.0 * rho, -1.0 / 3.0) * libm::exp2(-2.0 * rate);
    Ok(inner_bound_from_noise(rho, noise_var))
}

/// Same bound parametrized by the test-channel noise variance directly.
pub fn gaussian_inner_bound_from_noise(
    rho: f64,
    noise_var: f64,
) -> Result<GaussianInnerBound, AnalysisError> {
    if !(rho > -0.5 && rho <= 0.5) {
        return Err(AnalysisError::BadParameter("rho must lie in (-1/2, 1/2]"));
    }
    if !(noise_var > 0.0) {
        return Err(AnalysisError::BadParameter("noise variance must be positive"));
    }
    Ok(inner_bound_from_noise(rho, noise_var))
}

fn inner_bound_from_noise(rho: f64, noise_var: f64) -> GaussianInnerBound {
    let mmse1 = noise_var;
    let mmse2 = 0.5 * noise_var * (1.0 + rho);
    let mmse3 = (1.0 + 2.0 * rho) * noise_var / 3.0;
    GaussianInnerBound {
        noise_var,
        mmse1,
        mmse2,
        mmse3,
        distortion_product: mmse1 * mmse2 * mmse3,
    }
}

/// Per-description excess rate of the finite-dimensional symmetric scheme
/// over the Gaussian inner bound:
/// `(1/6)[log2 Phi_L^2 + log2(3/4) + log2(G(S_L)^2 G_c (2 pi e)^3)]`.
pub fn rate_loss(l: usize, g_central: f64) -> Result<f64, AnalysisError> {
    let phi = phi_l(l)?;
    let g = sphere_second_moment(l);
    let tpe = 2.0 * core::f64::consts::PI * core::f64::consts::E;
    Ok((libm::log2(phi * phi)
        + libm::log2(0.75)
        + libm::log2(g * g * g_central * tpe * tpe * tpe))
        / 6.0)
}

/// Minimum binning rate for reliable two-of-three decoding:
/// `R/2 + (1/2) log2(psi_{3,L} sqrt(N'))`.
pub fn binning_threshold(rate: f64, nesting_ratio: f64, l: usize) -> Result<f64, AnalysisError> {
    let psi = psi3(l)?;
    Ok(0.5 * rate + 0.5 * libm::log2(psi * libm::sqrt(nesting_ratio)))
}

/// Two-received-descriptions distortion in binned form:
/// `(N')^2 psi_inf^4 2^{-4 R_b} / 12`.
pub fn binned_pair_distortion(binning_rate: f64, nesting_ratio: f64) -> f64 {
    let p2 = phi_infinity(); // psi_inf^2
    nesting_ratio * nesting_ratio * p2 * p2 * libm::exp2(-4.0 * binning_rate) / 12.0
}

/// All-received (central) distortion in binned form:
/// `psi_inf^2 2^{-4 R_b} / N'`.
pub fn binned_central_distortion(binning_rate: f64, nesting_ratio: f64) -> f64 {
    phi_infinity() * libm::exp2(-4.0 * binning_rate) / nesting_ratio
}

/// Three-look distortion of the Gaussian inner bound expressed against the
/// binning rate; approaches the binned central distortion as rho -> -1/2.
pub fn inner_bound_binned_central(
    rho: f64,
    binning_rate: f64,
    nesting_ratio: f64,
) -> Result<f64, AnalysisError> {
    if !(rho > -0.5 && rho < 0.5) {
        return Err(AnalysisError::BadParameter("rho must lie in (-1/2, 1/2)"));
    }
    let psi4 = phi_infinity() * phi_infinity(); // psi_inf^4
    let c = libm::sqrt(nesting_ratio * nesting_ratio * psi4 / 12.0);
    Ok(2.0 / 3.0 / c
        * libm::sqrt((1.0 + rho) / (1.0 - rho))
        * libm::exp2(-4.0 * binning_rate))
}

/// One row of the convergence table: dimension, sphere-moment term
/// `log2(G(S_L) 2 pi e)` and scheme term `log2(Phi_L^2 3/4)`.
#[derive(Clone, Copy, Debug)]
pub struct ConvergenceRow {
    pub l: usize,
    pub sphere_term: f64,
    pub scheme_term: f64,
}

/// Convergence table for odd dimensions up to `l_max` (<= MAX_ODD_DIM).
pub fn convergence_table(l_max: usize) -> Result<Vec<ConvergenceRow>, AnalysisError> {
    require_odd(l_max)?;
    let tpe = 2.0 * core::f64::consts::PI * core::f64::consts::E;
    let mut out = Vec::new();
    let mut l = 1;
    while l <= l_max {
        let phi = phi_l(l)?;
        out.push(ConvergenceRow {
            l,
            sphere_term: libm::log2(sphere_second_moment(l) * tpe),
            scheme_term: libm::log2(phi * phi * 0.75),
        });
        l += 2;
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct TradeoffReport {
    /// (a, central rate, product of central and two side distortions)
    pub rows: Vec<(f64, f64, f64)>,
    pub max_relative_spread: f64,
}

/// Sweep the central/side rate split parameter `a` in (0,1) for a symmetric
/// three-description system and report the product of the central distortion
/// with two side distortions; the product is invariant in `a`.
pub fn tradeoff_sweep(
    a_grid: &[f64],
    sum_side_rates: f64,
    h: f64,
    l: usize,
    g_central: f64,
) -> Result<TradeoffReport, AnalysisError> {
    let phi = phi_l(l)?;
    let g = sphere_second_moment(l);
    let lf = l as f64;
    let mut rows = Vec::new();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &a in a_grid {
        if !(a > 0.0 && a < 1.0) {
            return Err(AnalysisError::BadParameter("a must lie in (0,1)"));
        }
        let rc = sum_side_rates * (a * 2.0 + 1.0) / 3.0;
        let exps = libm::exp2(2.0 * h / lf + rc - sum_side_rates);
        let d_one = 1.0 / 3.0 * phi * g * exps;
        let d_pair = 1.0 / 12.0 * phi * g * exps;
        let d_central = g_central * libm::exp2(2.0 * h / lf - 2.0 * rc);
        let product = d_central * d_one * d_pair;
        lo = lo.min(product);
        hi = hi.max(product);
        rows.push((a, rc, product));
    }
    let spread = if lo > 0.0 { hi / lo - 1.0 } else { 0.0 };
    Ok(TradeoffReport { rows, max_relative_spread: spread })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = core::f64::consts::PI;

    #[test]
    fn shell_integrals_small_dims_exact() {
        // closed forms cross-checked against exact lens-volume integrals:
        // L=1: 3/2 and 5/12; L=3: 5/12 and 53/240
        assert!((beta_l(1).unwrap() - 1.5).abs() < 1e-12);
        assert!((beta_tilde_l(1).unwrap() - 5.0 / 12.0).abs() < 1e-12);
        assert!((beta_l(3).unwrap() - 5.0 / 12.0).abs() < 1e-12);
        assert!((beta_tilde_l(3).unwrap() - 53.0 / 240.0).abs() < 1e-12);
    }

    #[test]
    fn shell_integral_ratio_below_one() {
        for l in (1..=21).step_by(2) {
            let r = beta_tilde_l(l).unwrap() / beta_l(l).unwrap();
            assert!(r > 0.0 && r < 1.0, "L={l}: {r}");
        }
    }

    #[test]
    fn even_dimension_rejected() {
        assert!(matches!(beta_l(2), Err(AnalysisError::EvenDimension(2))));
        assert!(matches!(psi3(4), Err(AnalysisError::EvenDimension(4))));
        assert!(matches!(phi_l(0), Err(AnalysisError::EvenDimension(0))));
        assert!(matches!(beta_l(43), Err(AnalysisError::DimensionTooLarge(43))));
        assert!(beta_l(41).unwrap().is_finite());
    }

    #[test]
    fn psi_values_and_convergence() {
        assert!((psi3(1).unwrap() - libm::sqrt(4.0 / 3.0)).abs() < 1e-12);
        assert!((psi3(3).unwrap() - libm::pow(32.0 / 15.0, 1.0 / 6.0)).abs() < 1e-12);
        assert!((psi3_infinity() - 1.0745699318235423).abs() < 1e-12);
        assert_eq!(psi2(), 1.0);
        // monotone decrease toward the limit over the tabulated range
        let lim = psi3_infinity();
        let mut prev = f64::INFINITY;
        for l in (1..=21).step_by(2) {
            let p = psi3(l).unwrap();
            assert!(p < prev, "L={l}");
            assert!(p > lim, "L={l}");
            prev = p;
        }
        // frozen tabulation endpoint; residual gap to the limit is ~0.024
        assert!((psi3(21).unwrap() - 1.09859382185519).abs() < 1e-12);
    }

    #[test]
    fn phi_values() {
        assert!((phi_l(1).unwrap() - 10.0 / 9.0).abs() < 1e-12);
        assert!((phi_infinity() - libm::sqrt(4.0 / 3.0)).abs() < 1e-15);
        // strictly increasing over the tabulated range; crosses the limit
        // near L=7 and overshoots by under 1% (confirmed independently by
        // the Monte-Carlo shell oracle), so convergence is not monotone
        let mut prev = 0.0;
        for l in (1..=21).step_by(2) {
            let p = phi_l(l).unwrap();
            assert!(p > prev, "L={l}: {p}");
            prev = p;
        }
        assert!(phi_l(5).unwrap() < phi_infinity());
        assert!(phi_l(9).unwrap() > phi_infinity());
        assert!((phi_l(21).unwrap() - 1.16426871797081).abs() < 1e-12);
        assert!(phi_l(21).unwrap() / phi_infinity() - 1.0 < 0.01);
    }

    #[test]
    fn convergence_table_ordering() {
        let rows = convergence_table(21).unwrap();
        assert_eq!(rows.len(), 11);
        assert!((rows[0].sphere_term - libm::log2(2.0 * PI * core::f64::consts::E / 12.0)).abs() < 1e-12);
        let mut prev_s = f64::INFINITY;
        let mut prev_p = f64::NEG_INFINITY;
        for r in &rows {
            // the sphere term strictly dominates and decreases; the scheme
            // term rises from -0.111 through zero to a small positive
            // overshoot within this range
            assert!(r.sphere_term > r.scheme_term, "L={}", r.l);
            assert!(r.sphere_term < prev_s);
            assert!(r.scheme_term > prev_p, "L={}", r.l);
            assert!(r.scheme_term.abs() < 0.12);
            prev_s = r.sphere_term;
            prev_p = r.scheme_term;
        }
    }

    #[test]
    fn two_description_distortions() {
        // symmetric weights give coefficient 1/4
        let (d0, d1) = side_distortion_two(1.0, 1.0, 2, 1.0, 4, 4, 1.0, 1.0);
        let base = sphere_second_moment(2) * 16.0;
        assert!((d0 - base / 4.0).abs() < 1e-12);
        assert!((d1 - d0).abs() < 1e-15);
        // the comparison constant only swaps the geometry factor
        let (c0, _) = side_distortion_two_with_constant(1.0, 1.0, 2, 1.0, 4, 4, 1.0, 1.0, 1.0 / 12.0);
        let gap_db = 10.0 * libm::log10(c0 / d0);
        assert!((gap_db - 0.2003) .abs() < 5e-4, "{gap_db}");
    }

    #[test]
    fn three_description_ratio_is_four() {
        let p = WeightProfile::symmetric(3);
        let d = side_distortion_three(&p, 1, 1.0, &[15, 15, 15]).unwrap();
        let d_one = d[&0b001];
        let d_pair = d[&0b011];
        assert!((d_one / d_pair - 4.0).abs() < 1e-12);
        // and the absolute scale: hat 1/3, Phi_1 = 10/9, G(S_1) = 1/12
        assert!((d_one - (10.0 / 9.0) / 36.0 * 3375.0).abs() < 1e-9);
    }

    #[test]
    fn central_distortion_scalar() {
        let delta: f64 = 0.25;
        let d = central_distortion(1.0 / 12.0, 1, delta);
        assert!((d - delta * delta / 12.0).abs() < 1e-15);
        // volume scaling s^L multiplies distortion by s^2
        let d2 = central_distortion(1.0 / 12.0, 2, 0.7);
        let d2s = central_distortion(1.0 / 12.0, 2, 0.7 * 9.0);
        assert!((d2s / d2 - 9.0).abs() < 1e-12);
    }

    #[test]
    fn rates_roundtrip() {
        let h = 2.0471; // per-vector entropy, L=1 unit Gaussian
        let (rc, ri) = rates(h, 1, 0.01, &[4, 5], &[1.0, 2.0]);
        assert!((ri[0] - (rc - libm::log2(4.0))).abs() < 1e-12);
        for (i, (&n, &m)) in [4u64, 5].iter().zip(&[1.0, 2.0]).enumerate() {
            let back = index_from_rate(h, 1, 0.01, ri[i], m).unwrap();
            assert!((back - n as f64).abs() < 1e-9, "desc {i}: {back}");
        }
        // index 1 with unit weight sends at the central rate
        let (rc2, ri2) = rates(h, 1, 0.01, &[1], &[1.0]);
        assert!((ri2[0] - rc2).abs() < 1e-15);
    }

    #[test]
    fn infeasible_rate_detected() {
        let err = index_from_rate(2.0, 1, 0.5, 10.0, 1.0).unwrap_err();
        assert!(matches!(err, AnalysisError::InfeasibleRate { .. }));
    }

    #[test]
    fn product_independent_of_central_rate() {
        let h = 2.0471;
        let base = distortion_product_three(1, 3.0, h, 1.0 / 12.0).unwrap();
        // direct sweep over the central rate via the explicit distortions
        for rc in [4.0, 6.0, 9.0, 14.0] {
            let phi = phi_l(1).unwrap();
            let g = sphere_second_moment(1);
            let d1 = phi * g / 3.0 * libm::exp2(2.0 * h + rc - 9.0);
            let d2 = phi * g / 12.0 * libm::exp2(2.0 * h + rc - 9.0);
            let dc = central_distortion(1.0 / 12.0, 1, libm::exp2(h - rc));
            let p = dc * d1 * d2;
            assert!((p / base - 1.0).abs() < 1e-12, "rc={rc}");
        }
    }

    #[test]
    fn gaussian_limit_value() {
        assert!((gaussian_limit_product(0.0, 1.0) - 1.0 / 27.0).abs() < 1e-15);
        // substituting the limit constants into the finite form recovers it
        let tpe = 2.0 * PI * core::f64::consts::E;
        let g_inf = 1.0 / tpe;
        let phi2 = 4.0 / 3.0;
        let h = 0.5 * libm::log2(tpe); // unit Gaussian, L=1 form scaled below
        for r in [0.0, 1.5] {
            let finite = phi2 * g_inf * g_inf * g_inf / 36.0 * libm::exp2(6.0 * h - 6.0 * r);
            assert!((finite - gaussian_limit_product(r, 1.0)).abs() < 1e-12 * finite);
        }
    }

    #[test]
    fn inner_bound_values() {
        let b = gaussian_inner_bound(0.0, 2.0).unwrap();
        assert!((b.mmse1 - b.noise_var).abs() < 1e-15);
        assert!((b.mmse2 - b.noise_var / 2.0).abs() < 1e-15);
        // rho -> -1/2 recovers the limit product
        let b = gaussian_inner_bound(-0.5 + 1e-9, 1.25).unwrap();
        let lim = gaussian_limit_product(1.25, 1.0);
        assert!((b.distortion_product / lim - 1.0).abs() < 1e-6);
        assert!(gaussian_inner_bound(-0.6, 1.0).is_err());
    }

    #[test]
    fn rate_loss_values() {
        // scalar case: formula evaluates to 0.23611 (printed as 0.2358)
        let r1 = rate_loss(1, 1.0 / 12.0).unwrap();
        assert!((r1 - 0.23610881).abs() < 1e-6, "{r1}");
        // body-centered cubic case per the same formula
        let r3 = rate_loss(3, G_BCC).unwrap();
        assert!((r3 - 0.19472).abs() < 1e-4, "{r3}");
        // limit constants drive the loss to zero
        let tpe = 2.0 * PI * core::f64::consts::E;
        let ideal = (libm::log2(4.0 / 3.0) + libm::log2(0.75)
            + libm::log2(1.0 / (tpe * tpe * tpe) * tpe * tpe * tpe))
            / 6.0;
        assert!(ideal.abs() < 1e-12);
    }

    #[test]
    fn binning_threshold_and_forms() {
        let l = 1;
        let psi = psi3(l).unwrap();
        let t = binning_threshold(6.0, 31.0, l).unwrap();
        assert!((t - (3.0 + 0.5 * libm::log2(psi * libm::sqrt(31.0)))).abs() < 1e-12);
        // degenerate nesting ratio 1
        let t1 = binning_threshold(6.0, 1.0, l).unwrap();
        assert!((t1 - (3.0 + 0.5 * libm::log2(psi))).abs() < 1e-12);
        // binned central distortion matches the inner-bound route as rho -> -1/2
        let ours = binned_central_distortion(4.0, 20.0);
        let theirs = inner_bound_binned_central(-0.5 + 1e-10, 4.0, 20.0).unwrap();
        assert!((ours / theirs - 1.0).abs() < 1e-5, "{ours} vs {theirs}");
    }

    #[test]
    fn tradeoff_product_invariant() {
        let grid = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
        let rep = tradeoff_sweep(&grid, 9.0, 2.0471, 1, 1.0 / 12.0).unwrap();
        assert!(rep.max_relative_spread < 1e-9, "{}", rep.max_relative_spread);
        // and the product equals the closed product form at R = sum/3
        let direct = distortion_product_three(1, 3.0, 2.0471, 1.0 / 12.0).unwrap();
        assert!((rep.rows[0].2 / direct - 1.0).abs() < 1e-9);
    }
}
