//! Runtime verification suites: the identity checks, the Monte-Carlo oracle
//! agreement for the shell constants, and matching-vs-brute-force. These back
//! the CLI `verify` subcommand; deliberately configurable so a perturbed
//! constant is caught.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::analysis;
use crate::assign::{self, CostMatrix};
use crate::mc::{self, DistanceProfile};
use crate::rng::{Stream, StreamKind};
use crate::weights::{self, subsets, WeightProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteId {
    CostSplit,
    CombinatorialIdentities,
    ShellOracle,
    Matching,
}

impl SuiteId {
    pub fn name(self) -> &'static str {
        match self {
            SuiteId::CostSplit => "cost-split",
            SuiteId::CombinatorialIdentities => "identities",
            SuiteId::ShellOracle => "shell-oracle",
            SuiteId::Matching => "matching",
        }
    }

    pub fn parse(s: &str) -> Option<SuiteId> {
        match s {
            "cost-split" => Some(SuiteId::CostSplit),
            "identities" => Some(SuiteId::CombinatorialIdentities),
            "shell-oracle" => Some(SuiteId::ShellOracle),
            "matching" => Some(SuiteId::Matching),
            _ => None,
        }
    }

    pub fn all() -> Vec<SuiteId> {
        vec![
            SuiteId::CostSplit,
            SuiteId::CombinatorialIdentities,
            SuiteId::ShellOracle,
            SuiteId::Matching,
        ]
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub suites: Vec<SuiteId>,
    pub seed: u64,
    /// Samples per shell-oracle estimate.
    pub oracle_samples: u64,
    /// Relative tolerance for the shell-oracle agreement.
    pub oracle_rel_tol: f64,
    /// Fault injection: multiply the closed-form shell constant by
    /// `1 + delta` before comparing; nonzero values must fail the suite.
    pub beta_perturbation: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            suites: SuiteId::all(),
            seed: 0x5eed,
            oracle_samples: 2_000_000,
            oracle_rel_tol: 2.5e-3,
            beta_perturbation: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub bound: f64,
}

#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub suite: SuiteId,
    pub passed: bool,
    pub checks: Vec<CheckLine>,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
    /// True when no suites were selected at all.
    pub empty_selection: bool,
}

pub fn run(opts: &VerifyOptions) -> VerifyReport {
    let mut suites = Vec::new();
    for &s in &opts.suites {
        let result = match s {
            SuiteId::CostSplit => cost_split_suite(opts),
            SuiteId::CombinatorialIdentities => identities_suite(opts),
            SuiteId::ShellOracle => shell_oracle_suite(opts),
            SuiteId::Matching => matching_suite(opts),
        };
        suites.push(result);
    }
    VerifyReport {
        passed: suites.iter().all(|s| s.passed),
        suites,
        empty_selection: opts.suites.is_empty(),
    }
}

fn random_profile(n: usize, s: &mut Stream) -> WeightProfile {
    let mut gamma = BTreeMap::new();
    for kappa in 1..=n {
        for m in subsets(n, kappa) {
            gamma.insert(m, 0.05 + s.uniform() * 4.0);
        }
    }
    let mu: Vec<f64> = (0..n).map(|_| 0.25 + s.uniform() * 3.0).collect();
    WeightProfile::new(n, gamma, mu, None).expect("random profile valid")
}

fn cost_split_suite(opts: &VerifyOptions) -> SuiteResult {
    let mut s = Stream::new(opts.seed, StreamKind::Oracle, 101);
    let mut checks = Vec::new();
    for n in 2..=5usize {
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let p = random_profile(n, &mut s);
            let dim = 1 + s.below(4) as usize;
            let lambda: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..dim).map(|_| (s.uniform() - 0.5) * 20.0).collect())
                .collect();
            let lc: Vec<f64> = (0..dim).map(|_| (s.uniform() - 0.5) * 20.0).collect();
            for kappa in 1..n {
                let r = weights::theorem1_residual(&p, kappa, &lc, &lambda);
                let scale: f64 = subsets(n, kappa)
                    .iter()
                    .map(|&m| {
                        p.gamma(m)
                            * crate::vecmath::dist_nsq(&lc, &p.pattern_reconstruction(m, &lambda))
                    })
                    .sum();
                worst = worst.max(r / scale.max(1.0));
            }
        }
        checks.push(CheckLine {
            name: format!("cost-split residual n={n}"),
            passed: worst <= 1e-9,
            observed: worst,
            bound: 1e-9,
        });
    }
    SuiteResult { suite: SuiteId::CostSplit, passed: checks.iter().all(|c| c.passed), checks }
}

fn identities_suite(opts: &VerifyOptions) -> SuiteResult {
    let mut s = Stream::new(opts.seed, StreamKind::Oracle, 202);
    let mut checks = Vec::new();
    for n in 2..=6usize {
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let p = random_profile(n, &mut s);
            let dim = 1 + s.below(3) as usize;
            let v: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..dim).map(|_| (s.uniform() - 0.5) * 20.0).collect())
                .collect();
            let lc: Vec<f64> = (0..dim).map(|_| (s.uniform() - 0.5) * 20.0).collect();
            for c in weights::check_combinatorial_identities(n, &p, &v, &lc) {
                worst = worst.max(c.max_residual / c.scale.max(1.0));
            }
        }
        checks.push(CheckLine {
            name: format!("aggregate identities n={n}"),
            passed: worst <= 1e-9,
            observed: worst,
            bound: 1e-9,
        });
    }
    SuiteResult {
        suite: SuiteId::CombinatorialIdentities,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

fn shell_oracle_suite(opts: &VerifyOptions) -> SuiteResult {
    let fudge = 1.0 + opts.beta_perturbation.unwrap_or(0.0);
    let mut checks = Vec::new();
    for l in [1usize, 3] {
        for (name, closed, profile) in [
            ("count", analysis::beta_l(l).unwrap() * fudge, DistanceProfile::ShellCount),
            (
                "weighted",
                analysis::beta_tilde_l(l).unwrap() * fudge,
                DistanceProfile::ShellSecondMoment,
            ),
        ] {
            let est = mc::intersection_oracle(l, profile, opts.oracle_samples, opts.seed);
            let rel = (est.value / closed - 1.0).abs();
            checks.push(CheckLine {
                name: format!("shell {name} L={l}"),
                passed: rel <= opts.oracle_rel_tol,
                observed: rel,
                bound: opts.oracle_rel_tol,
            });
        }
    }
    SuiteResult { suite: SuiteId::ShellOracle, passed: checks.iter().all(|c| c.passed), checks }
}

fn matching_suite(opts: &VerifyOptions) -> SuiteResult {
    let mut s = Stream::new(opts.seed, StreamKind::Oracle, 303);
    let mut worst = 0.0f64;
    let mut certified = true;
    for n in 2..=8usize {
        for _ in 0..25 {
            let cost = CostMatrix::from_fn(n, |_, _| s.uniform() * 100.0);
            let a = assign::solve(&cost);
            let (_, bc) = assign::brute_force(&cost);
            worst = worst.max((a.cost - bc).abs());
            if assign::certify(&cost, &a, 1e-9).is_err() {
                certified = false;
            }
        }
    }
    let checks = vec![
        CheckLine {
            name: String::from("matching equals brute force (n <= 8)"),
            passed: worst <= 1e-9,
            observed: worst,
            bound: 1e-9,
        },
        CheckLine {
            name: String::from("dual certificate holds"),
            passed: certified,
            observed: if certified { 0.0 } else { 1.0 },
            bound: 0.0,
        },
    ];
    SuiteResult { suite: SuiteId::Matching, passed: checks.iter().all(|c| c.passed), checks }
}
