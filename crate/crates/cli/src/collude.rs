use catswap::protocol::{collusion_branch_counts, collusion_posterior, run_round, Engine, ProtocolConfig};
use catswap::Dimension;
use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::{Check, RunReport};
use crate::{CommonArgs, UsageError};

/// Largest `d^{3n}` for which `--oracle` enumerates every branch.
pub const ORACLE_BRANCH_CAP: u128 = 1 << 16;

#[derive(Args)]
pub struct ColludeArgs {
    #[arg(long)]
    pub d: u32,

    #[arg(long)]
    pub n: usize,

    /// Parties absent from the coalition, e.g. `2,4`. The coalition is every
    /// other party in `2..=n`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub missing: Vec<usize>,

    #[arg(long, default_value_t = 1)]
    pub rounds: usize,

    /// Confirm each posterior by enumerating all dense-engine branches.
    #[arg(long)]
    pub oracle: bool,

    #[command(flatten)]
    pub common: CommonArgs,
}

pub fn run(args: &ColludeArgs, argv: Vec<String>) -> Result<RunReport, UsageError> {
    let dim = Dimension::new(args.d)?;
    if args.n < 2 {
        return Err(UsageError(format!("--n must be at least 2, got {}", args.n)));
    }
    if args.missing.is_empty() {
        return Err(UsageError("--missing must name at least one party".into()));
    }
    if let Some(&bad) = args.missing.iter().find(|&&p| p < 2 || p > args.n) {
        return Err(UsageError(format!("--missing party {bad} is outside 2..={}", args.n)));
    }
    if args.oracle {
        let count = dim.checked_pow(3 * args.n).unwrap_or(u128::MAX);
        if count > ORACLE_BRANCH_CAP {
            return Err(UsageError(format!(
                "refusing: --oracle needs {}^{} = {count} amplitudes per branch, above {ORACLE_BRANCH_CAP}",
                args.d,
                3 * args.n
            )));
        }
    }
    let mut missing = args.missing.clone();
    missing.sort_unstable();
    missing.dedup();
    let known: Vec<usize> = (2..=args.n).filter(|p| !missing.contains(p)).collect();
    let seed = args.common.resolve_seed();

    let mut report = RunReport::new("collude", argv);
    report.param("d", args.d);
    report.param("n", args.n);
    report.param("missing", missing.clone());
    report.param("known", known.clone());
    report.param("rounds", args.rounds);
    report.param("oracle", args.oracle);
    report.param("seed", seed);
    if args.rounds == 0 {
        return Ok(report);
    }

    let uniform = 1.0 / args.d as f64;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut max_deviation = 0.0f64;
    let mut non_uniform = 0usize;
    let mut oracle_unequal = 0usize;
    let mut first_posterior = None;
    let mut first_counts = None;
    for _ in 0..args.rounds {
        let labels_seed: u64 = master.gen();
        let round_seed: u64 = master.gen();
        let mut rng = ChaCha8Rng::seed_from_u64(labels_seed);
        let config = ProtocolConfig::random(dim, args.n, round_seed, &mut rng)?;
        let engine = if args.oracle { Engine::StateVector } else { Engine::Symbolic };
        let transcript = run_round(&config, engine)?;
        let posterior = collusion_posterior(&transcript, &known)?;
        let probs = posterior.probabilities().expect("coalition misses a share");
        max_deviation = probs.iter().map(|p| (p - uniform).abs()).fold(max_deviation, f64::max);
        if !posterior.is_uniform() {
            non_uniform += 1;
        }
        first_posterior.get_or_insert(probs);
        if args.oracle {
            let counts = collusion_branch_counts(&transcript, &known)?;
            if counts.windows(2).any(|w| w[0] != w[1]) || counts[0] == 0 {
                oracle_unequal += 1;
            }
            first_counts.get_or_insert(counts);
        }
    }

    report.check(Check::equals("rounds with non-uniform posterior", non_uniform as f64, 0.0));
    report.check(Check::below("posterior max |p - 1/d|", max_deviation, 1e-12));
    if let Some(probs) = first_posterior {
        report.stat("posterior", probs);
    }
    if let Some(counts) = first_counts {
        report.check(Check::equals("rounds with unequal oracle branch counts", oracle_unequal as f64, 0.0));
        report.stat("oracle_branch_counts", counts);
    }
    Ok(report)
}
