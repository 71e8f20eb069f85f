//! Solver output against exhaustive enumeration on instances small enough
//! to enumerate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use stepscript::synthgen::{brute_force_localize, brute_force_msa, step_token, LOCALIZE_CAPS, MSA_CAPS};
use stepscript::textalign::io::read_sequences;
use stepscript::textalign::{build_token_cost, fw_msa, MsaOptions, TokenCostMatrix, TokenSequence};
use stepscript::vidcluster::{first_infeasible_step, fw_localize, FeatureStream, LocalizeOptions, ResidualKernel, StepWindow};

use crate::commands::write_json;
use crate::config::RunConfig;
use crate::error::Result;

/// Relative tolerance for calling a solver value optimal.
pub const OPTIMALITY_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trial {
    pub solver: f64,
    pub exact: f64,
    pub optimal: bool,
}

impl Trial {
    fn new(solver: f64, exact: f64) -> Self {
        Trial {
            solver,
            exact,
            optimal: (solver - exact).abs() <= OPTIMALITY_RTOL * exact.abs().max(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub problem: String,
    pub trials: usize,
    pub optimal: usize,
    pub details: Vec<Trial>,
}

impl OracleReport {
    fn new(problem: &str, details: Vec<Trial>) -> Self {
        OracleReport {
            problem: problem.into(),
            trials: details.len(),
            optimal: details.iter().filter(|t| t.optimal).count(),
            details,
        }
    }
}

/// Random sequences over a small vocabulary and a template length, all
/// within the enumeration caps.
pub fn tiny_msa_instance(rng: &mut impl Rng) -> (Vec<TokenSequence>, usize) {
    let (max_n, max_len, max_slots) = MSA_CAPS;
    let n = rng.random_range(2..=max_n);
    let sequences: Vec<TokenSequence> = (0..n)
        .map(|i| {
            let len = rng.random_range(1..=max_len);
            let tokens = (0..len).map(|_| step_token(rng.random_range(0..4))).collect();
            TokenSequence::untimed(format!("s{i}"), tokens)
        })
        .collect();
    let longest = sequences.iter().map(TokenSequence::len).max().unwrap_or(1);
    let slots = rng.random_range(longest..=max_slots);
    (sequences, slots)
}

/// Random feature streams, a step count and, on about half the draws,
/// feasible random step windows.
pub fn tiny_localize_instance(rng: &mut impl Rng) -> (Vec<FeatureStream>, Vec<Vec<StepWindow>>, usize) {
    let (max_n, max_len, max_k) = LOCALIZE_CAPS;
    let n = rng.random_range(1..=max_n);
    let k = rng.random_range(1..=max_k);
    let streams: Vec<FeatureStream> = (0..n)
        .map(|i| {
            let len = rng.random_range(k..=max_len);
            let x = nalgebra::DMatrix::from_fn(len, 3, |_, _| rng.random_range(-1.0..1.0));
            FeatureStream::new(format!("v{i}"), x, 1.0).expect("finite features")
        })
        .collect();
    let windows = if rng.random_bool(0.5) {
        streams
            .iter()
            .map(|s| {
                let w: Vec<StepWindow> = (0..k)
                    .map(|_| rng.random_bool(0.5).then(|| (0..s.num_intervals()).map(|_| rng.random_bool(0.6)).collect()))
                    .collect();
                if first_infeasible_step(s.num_intervals(), &w).is_some() {
                    vec![None; k]
                } else {
                    w
                }
            })
            .collect()
    } else {
        Vec::new()
    };
    (streams, windows, k)
}

pub fn check_msa(sequences: &[TokenSequence], cost: &TokenCostMatrix, options: &MsaOptions) -> Result<Trial> {
    let sol = fw_msa(sequences, cost, options)?;
    let (_, exact) = brute_force_msa(sequences, cost, sol.alignment.num_slots)?;
    Ok(Trial::new(sol.objective, exact))
}

pub fn check_localize(
    streams: &[FeatureStream],
    windows: &[Vec<StepWindow>],
    num_steps: usize,
    options: &LocalizeOptions,
) -> Result<Trial> {
    let sol = fw_localize(streams, windows, num_steps, options)?;
    let kernel = ResidualKernel::from_streams(streams, sol.lambda)?;
    let lengths: Vec<usize> = streams.iter().map(FeatureStream::num_intervals).collect();
    let (_, exact) = brute_force_localize(&kernel, &lengths, windows, num_steps)?;
    Ok(Trial::new(sol.objective, exact))
}

/// With a token file or a feature directory, checks that corpus (which must
/// fit the caps); otherwise runs `trials` seeded random instances of each
/// problem. Writes `oracle_check.json`.
pub fn cmd_oracle_check(config: &RunConfig, trials: usize) -> Result<Vec<OracleReport>> {
    config.validate()?;
    let msa_options = config.msa_options();
    let loc_options = config.localize_options();
    let mut reports = Vec::new();
    if config.tokens.is_some() || config.features.is_some() {
        if let Some(path) = &config.tokens {
            let sequences = read_sequences(path)?;
            let cost = build_token_cost(&sequences, config.match_reward, config.mismatch_penalty)?;
            reports.push(OracleReport::new("msa", vec![check_msa(&sequences, &cost, &msa_options)?]));
        }
        if let Some(dir) = &config.features {
            let ids = stepscript::vidcluster::list_feature_dir(dir)?;
            let streams = stepscript::vidcluster::read_feature_dir(dir, &ids, config.interval_duration_s)?;
            let trial = check_localize(&streams, &[], config.k[0], &loc_options)?;
            reports.push(OracleReport::new("localize", vec![trial]));
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut msa = Vec::with_capacity(trials);
        for _ in 0..trials {
            let (sequences, slots) = tiny_msa_instance(&mut rng);
            let cost = build_token_cost(&sequences, config.match_reward, config.mismatch_penalty)?;
            let options = MsaOptions {
                num_slots: Some(slots),
                ..msa_options.clone()
            };
            msa.push(check_msa(&sequences, &cost, &options)?);
        }
        let mut loc = Vec::with_capacity(trials);
        for _ in 0..trials {
            let (streams, windows, k) = tiny_localize_instance(&mut rng);
            loc.push(check_localize(&streams, &windows, k, &loc_options)?);
        }
        reports.push(OracleReport::new("msa", msa));
        reports.push(OracleReport::new("localize", loc));
    }
    std::fs::create_dir_all(&config.output).map_err(|e| crate::error::CliError::io(&config.output, e))?;
    write_json(&config.output.join("oracle_check.json"), &reports)?;
    Ok(reports)
}
