use std::path::PathBuf;

use catswap::catbell::{BellLabels, CatLabels};
use catswap::protocol::{recover_first_dit_pooled, recover_second_dit, run_round, Engine, ProtocolConfig, Transcript};
use catswap::statevec::MAX_AMPLITUDES;
use catswap::Dimension;
use clap::{Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::report::{Check, RunReport};
use crate::{CommonArgs, EngineArg, UsageError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LabelsArg {
    Zero,
    Random,
    File,
}

#[derive(Args)]
pub struct ProtocolArgs {
    #[arg(long)]
    pub d: u32,

    /// Number of parties sharing the cat state.
    #[arg(long)]
    pub n: usize,

    #[arg(long, default_value_t = 1000)]
    pub rounds: usize,

    #[arg(long, value_enum, default_value_t = EngineArg::Symbolic)]
    pub engine: EngineArg,

    /// Initial labels: all zero, fresh random labels each round, or read
    /// from `--labels-file`.
    #[arg(long, value_enum, default_value_t = LabelsArg::Zero)]
    pub labels: LabelsArg,

    /// JSON file `{"cat": [u1, ...], "bells": [[v1, v1'], ...]}`.
    #[arg(long, value_name = "PATH", required_if_eq("labels", "file"))]
    pub labels_file: Option<PathBuf>,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Deserialize)]
struct LabelsFile {
    cat: Vec<i64>,
    bells: Vec<[i64; 2]>,
}

fn load_labels(path: &PathBuf, dim: Dimension, n: usize) -> Result<ProtocolConfig, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    let file: LabelsFile = serde_json::from_str(&text)?;
    if file.cat.len() != n {
        return Err(UsageError(format!("labels file has {} cat labels, expected {n}", file.cat.len())));
    }
    let cat = CatLabels::from_values(dim, file.cat)?;
    let bells = file.bells.iter().map(|&[a, b]| BellLabels::new(dim, a, b)).collect();
    Ok(ProtocolConfig::new(dim, cat, bells, 0)?)
}

struct RoundResult {
    transcript: Transcript,
    second: Vec<u32>,
    first_pooled: u32,
    second_ok: usize,
    first_ok: bool,
    consistent: bool,
}

fn evaluate(config: &ProtocolConfig, engine: Engine) -> catswap::Result<RoundResult> {
    let transcript = run_round(config, engine)?;
    let views = (2..=config.n).map(|i| transcript.view(i)).collect::<catswap::Result<Vec<_>>>()?;
    let second: Vec<u32> = views.iter().map(|v| recover_second_dit(v).value()).collect();
    let first_pooled = recover_first_dit_pooled(&views)?.value();
    let [key_first, key_second] = transcript.key.values();
    Ok(RoundResult {
        second_ok: second.iter().filter(|&&s| s == key_second).count(),
        first_ok: first_pooled == key_first,
        consistent: transcript.consistency_error().is_none(),
        second,
        first_pooled,
        transcript,
    })
}

fn transcript_json(r: &RoundResult) -> Value {
    let t = &r.transcript;
    json!({
        "d": t.config.dim.get(),
        "n": t.config.n,
        "seed": t.config.seed,
        "engine": t.engine.name(),
        "cat_labels": t.config.cat_labels.values(),
        "bell_labels": t.config.bell_labels.iter().map(|b| b.values()).collect::<Vec<_>>(),
        "outcomes": t.outcomes.iter().enumerate().map(|(i, o)| json!({
            "party": i + 1,
            "k": o.k.value(),
            "l": o.l.value(),
        })).collect::<Vec<_>>(),
        "announced": t.announced.values(),
        "key": t.key.values(),
        "recovered": {
            "second_per_party": r.second,
            "first_pooled": r.first_pooled,
        },
        "ok": r.first_ok && r.consistent && r.second_ok == r.second.len(),
    })
}

/// Pearson statistic of `counts` against the uniform distribution.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
}

/// Upper critical value of χ² with `df` degrees of freedom at significance `alpha`.
pub fn chi_square_critical(df: usize, alpha: f64) -> f64 {
    ChiSquared::new(df as f64).expect("df > 0").inverse_cdf(1.0 - alpha)
}

pub const CHI_SQUARE_ALPHA: f64 = 0.001;

pub fn run(args: &ProtocolArgs, argv: Vec<String>) -> Result<RunReport, UsageError> {
    let dim = Dimension::new(args.d)?;
    if args.n < 2 {
        return Err(UsageError(format!("--n must be at least 2, got {}", args.n)));
    }
    let engine = match args.engine {
        EngineArg::Symbolic => Engine::Symbolic,
        EngineArg::Statevector => Engine::StateVector,
    };
    if engine == Engine::StateVector {
        let count = dim.checked_pow(3 * args.n).unwrap_or(u128::MAX);
        if count > MAX_AMPLITUDES {
            return Err(UsageError(format!(
                "refusing: the statevector engine needs {}^{} = {count} amplitudes, above the oracle cap of {}; use --engine symbolic",
                args.d,
                3 * args.n,
                MAX_AMPLITUDES
            )));
        }
    }
    let fixed = match args.labels {
        LabelsArg::Zero => Some(ProtocolConfig::zero(dim, args.n, 0)?),
        LabelsArg::Random => None,
        LabelsArg::File => Some(load_labels(args.labels_file.as_ref().expect("required by clap"), dim, args.n)?),
    };
    let seed = args.common.resolve_seed();

    let mut report = RunReport::new("protocol", argv);
    report.param("d", args.d);
    report.param("n", args.n);
    report.param("rounds", args.rounds);
    report.param("engine", engine.name());
    report.param("labels", format!("{:?}", args.labels).to_lowercase());
    report.param("seed", seed);
    if args.rounds == 0 {
        return Ok(report);
    }

    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let configs: Vec<ProtocolConfig> = (0..args.rounds)
        .map(|_| {
            let labels_seed: u64 = master.gen();
            let round_seed: u64 = master.gen();
            match &fixed {
                Some(c) => ProtocolConfig { seed: round_seed, ..c.clone() },
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(labels_seed);
                    ProtocolConfig::random(dim, args.n, round_seed, &mut rng).expect("validated above")
                }
            }
        })
        .collect();
    let results = configs
        .par_iter()
        .map(|c| evaluate(c, engine))
        .collect::<catswap::Result<Vec<_>>>()?;

    let rounds = results.len() as f64;
    let parties = (args.n - 1) as f64;
    let second_ok: usize = results.iter().map(|r| r.second_ok).sum();
    let first_ok = results.iter().filter(|r| r.first_ok).count();
    let consistent = results.iter().filter(|r| r.consistent).count();
    report.check(Check::equals("second dit recovery rate", second_ok as f64 / (rounds * parties), 1.0));
    report.check(Check::equals("pooled first dit recovery rate", first_ok as f64 / rounds, 1.0));
    report.check(Check::equals("label consistency rate", consistent as f64 / rounds, 1.0));

    let d = dim.as_usize();
    let mut histogram = vec![0u64; d * d];
    for r in &results {
        let [a, b] = r.transcript.key.values();
        histogram[a as usize * d + b as usize] += 1;
    }
    let chi2 = chi_square_uniform(&histogram);
    report.stat("key_histogram", histogram.clone());
    report.stat("key_chi_square", chi2);
    if args.rounds >= 5 * d * d {
        let critical = chi_square_critical(d * d - 1, CHI_SQUARE_ALPHA);
        report.check(Check::at_most("key chi-square vs uniform (alpha 0.001)", chi2, critical));
    }
    report.transcripts = results.iter().map(transcript_json).collect();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_square_of_exact_uniform_is_zero() {
        assert_eq!(chi_square_uniform(&[5, 5, 5, 5]), 0.0);
        assert_eq!(chi_square_uniform(&[8, 0]), 8.0);
    }

    #[test]
    fn critical_value_matches_table() {
        // df 3 at 0.001: 16.266
        assert!((chi_square_critical(3, 0.001) - 16.266).abs() < 1e-3);
        // df 8 at 0.001: 26.124
        assert!((chi_square_critical(8, 0.001) - 26.124).abs() < 1e-3);
    }
}
