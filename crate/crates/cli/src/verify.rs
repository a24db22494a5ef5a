use catswap::catbell::{BellLabels, CatLabels};
use catswap::statevec::MAX_AMPLITUDES;
use catswap::swapcalc::{oracle_outcome_probabilities, verify_swap_identity, SwapCase, SwapRule};
use catswap::Dimension;
use clap::{Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::report::{Check, RunReport};
use crate::{CommonArgs, UsageError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Bell,
    Black,
    White,
    All,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Qudit dimension.
    #[arg(long)]
    pub d: u32,

    /// Cat size for the black- and white-node rules.
    #[arg(long, default_value_t = 3)]
    pub n: usize,

    #[arg(long, value_enum, default_value_t = RuleArg::All)]
    pub rule: RuleArg,

    /// Enumerate every label tuple.
    #[arg(long, conflicts_with = "samples")]
    pub exhaustive: bool,

    /// Number of random label tuples per rule (default 100).
    #[arg(long)]
    pub samples: Option<usize>,

    /// Maximum allowed amplitude deviation.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,

    #[command(flatten)]
    pub common: CommonArgs,
}

fn selected(rule: RuleArg) -> Vec<SwapRule> {
    match rule {
        RuleArg::Bell => vec![SwapRule::BellBell],
        RuleArg::Black => vec![SwapRule::BlackNode],
        RuleArg::White => vec![SwapRule::WhiteNode],
        RuleArg::All => SwapRule::ALL.to_vec(),
    }
}

/// Particles in the dense product state a rule needs.
fn particles_for(rule: SwapRule, n: usize) -> usize {
    match rule {
        SwapRule::BellBell => 4,
        SwapRule::BlackNode | SwapRule::WhiteNode => n + 2,
    }
}

fn exhaustive_cases(rule: SwapRule, dim: Dimension, n: usize) -> Vec<SwapCase> {
    let bells: Vec<BellLabels> = dim
        .dits()
        .flat_map(|a| dim.dits().map(move |b| BellLabels { u1: a, u2: b }))
        .collect();
    match rule {
        SwapRule::BellBell => bells
            .iter()
            .flat_map(|&first| bells.iter().map(move |&second| SwapCase::BellBell { first, second }))
            .collect(),
        SwapRule::BlackNode => CatLabels::all(dim, n)
            .expect("n >= 2 and within cap")
            .flat_map(|cat| bells.iter().map(move |&bell| SwapCase::BlackNode { cat: cat.clone(), bell }))
            .collect(),
        SwapRule::WhiteNode => CatLabels::all(dim, n)
            .expect("n >= 2 and within cap")
            .flat_map(|cat| {
                bells.iter().flat_map(move |&bell| {
                    let cat = cat.clone();
                    (1..n).map(move |slot| SwapCase::WhiteNode { cat: cat.clone(), bell, slot })
                })
            })
            .collect(),
    }
}

fn sampled_cases(rule: SwapRule, dim: Dimension, n: usize, samples: usize, rng: &mut ChaCha8Rng) -> Vec<SwapCase> {
    let d = dim.get() as i64;
    let bell = |rng: &mut ChaCha8Rng| BellLabels::new(dim, rng.gen_range(0..d), rng.gen_range(0..d));
    let cat = |rng: &mut ChaCha8Rng| CatLabels::from_values(dim, (0..n).map(|_| rng.gen_range(0..d))).expect("n >= 2");
    let mut cases = Vec::new();
    for _ in 0..samples {
        match rule {
            SwapRule::BellBell => {
                let first = bell(rng);
                cases.push(SwapCase::BellBell { first, second: bell(rng) });
            }
            SwapRule::BlackNode => {
                let c = cat(rng);
                cases.push(SwapCase::BlackNode { cat: c, bell: bell(rng) });
            }
            SwapRule::WhiteNode => {
                let c = cat(rng);
                let b = bell(rng);
                cases.extend((1..n).map(|slot| SwapCase::WhiteNode { cat: c.clone(), bell: b, slot }));
            }
        }
    }
    cases
}

pub fn run(args: &VerifyArgs, argv: Vec<String>) -> Result<RunReport, UsageError> {
    let dim = Dimension::new(args.d)?;
    if args.n < 2 {
        return Err(UsageError(format!("--n must be at least 2, got {}", args.n)));
    }
    let rules = selected(args.rule);
    for &rule in &rules {
        let k = particles_for(rule, args.n);
        let count = dim.checked_pow(k).unwrap_or(u128::MAX);
        if count > MAX_AMPLITUDES {
            return Err(UsageError(format!(
                "refusing: rule {} needs {}^{} = {} amplitudes, above the oracle cap of {}",
                rule.name(),
                args.d,
                k,
                count,
                MAX_AMPLITUDES
            )));
        }
    }

    let mut report = RunReport::new("verify", argv);
    report.param("d", args.d);
    report.param("n", args.n);
    report.param("rule", format!("{:?}", args.rule).to_lowercase());
    report.param("tol", args.tol);
    let mut rng = if args.exhaustive {
        report.param("mode", "exhaustive");
        None
    } else {
        let seed = args.common.resolve_seed();
        let samples = args.samples.unwrap_or(100);
        report.param("mode", "samples");
        report.param("samples", samples);
        report.param("seed", seed);
        Some((ChaCha8Rng::seed_from_u64(seed), samples))
    };

    let uniform = 1.0 / (args.d as f64).powi(2);
    for rule in rules {
        let cases = match rng.as_mut() {
            None => exhaustive_cases(rule, dim, args.n),
            Some((rng, samples)) => sampled_cases(rule, dim, args.n, *samples, rng),
        };
        let (identity, born) = cases
            .par_iter()
            .map(|case| {
                let identity = verify_swap_identity(case).unwrap_or(f64::INFINITY);
                let born = oracle_outcome_probabilities(case)
                    .map(|probs| probs.iter().map(|(_, p)| (p - uniform).abs()).fold(0.0, f64::max))
                    .unwrap_or(f64::INFINITY);
                (identity, born)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
        report.check(Check::below(format!("{} identity max deviation", rule.name()), identity, args.tol));
        report.check(Check::below(format!("{} born max |p - 1/d^2|", rule.name()), born, args.tol));
        report.stat(&format!("{}_cases", rule.name()), cases.len());
    }
    Ok(report)
}
