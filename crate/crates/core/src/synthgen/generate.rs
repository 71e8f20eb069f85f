use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::config::SynthConfig;
use super::vocab::{distractor_token, step_token};
use crate::error::{Error, Result};
use crate::evalkit::{AnnotatedEvent, AnnotatedItem, CorpusAnnotation};
use crate::textalign::{Span, Token, TokenSequence};
use crate::vidcluster::FeatureStream;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub sequences: Vec<TokenSequence>,
    pub streams: Vec<FeatureStream>,
    pub annotation: CorpusAnnotation,
    /// Narration token of each ground-truth step, in script order.
    pub true_script: Vec<Token>,
}

/// Random stream `id` of the configured seed.
fn stream_rng(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn generate(config: &SynthConfig) -> Result<SynthCorpus> {
    config.validate()?;
    let k = config.num_steps;
    let mut shared = stream_rng(config.seed, 0);
    let centers = {
        let rng = &mut shared;
        let mut c = DMatrix::<f64>::from_fn(k, config.feature_dim, |_, _| StandardNormal.sample(rng));
        for mut row in c.row_iter_mut() {
            let norm = row.norm();
            if norm > 0.0 {
                row *= config.center_norm / norm;
            }
        }
        c
    };

    let mut plan = corruption_plan(config, &mut shared);

    let mut sequences = Vec::with_capacity(config.num_items);
    let mut streams = Vec::with_capacity(config.num_items);
    let mut items = Vec::with_capacity(config.num_items);
    for n in 0..config.num_items {
        let mut rng = stream_rng(config.seed, n as u64 + 1);
        let item_id = format!("item{n:03}");
        let events = std::mem::take(&mut plan[n]);
        let (sequence, stream, item) = generate_item(config, &centers, item_id, events, &mut rng)?;
        sequences.push(sequence);
        streams.push(stream);
        items.push(item);
    }
    Ok(SynthCorpus {
        sequences,
        streams,
        annotation: CorpusAnnotation {
            num_gt_steps: k,
            items,
        },
        true_script: (0..k).map(step_token).collect(),
    })
}

/// Steps shown by every item, in order. Corruptions are placed at random
/// but their counts are fixed for the corpus so that the measured
/// statistics match the configured rates up to rounding: a step goes
/// missing in `round(miss N K)` (item, step) pairs, `round(swap U)` disjoint
/// pairs of neighbours swap (each costs one step of in-order agreement),
/// and `round(U r / (1 - r))` steps repeat right after themselves, where
/// `U` counts the steps shown. Every item keeps at least one step.
fn corruption_plan(config: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let (n, k) = (config.num_items, config.num_steps);
    let mut shown = vec![vec![true; k]; n];
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..k).map(move |j| (i, j))).collect();
    pairs.shuffle(rng);
    let mut missing = (config.miss_rate * (n * k) as f64).round() as usize;
    let mut left = vec![k; n];
    for (i, j) in pairs {
        if missing == 0 {
            break;
        }
        if left[i] > 1 {
            shown[i][j] = false;
            left[i] -= 1;
            missing -= 1;
        }
    }
    let mut orders: Vec<Vec<usize>> = shown
        .iter()
        .map(|row| (0..k).filter(|&j| row[j]).collect())
        .collect();
    let unique: usize = orders.iter().map(Vec::len).sum();

    let mut swaps = (config.swap_rate * unique as f64).round() as usize;
    let mut neighbours: Vec<(usize, usize)> = orders
        .iter()
        .enumerate()
        .flat_map(|(i, o)| (0..o.len().saturating_sub(1)).map(move |p| (i, p)))
        .collect();
    neighbours.shuffle(rng);
    let mut touched: Vec<Vec<bool>> = orders.iter().map(|o| vec![false; o.len()]).collect();
    for (i, p) in neighbours {
        if swaps == 0 {
            break;
        }
        if !touched[i][p] && !touched[i][p + 1] {
            touched[i][p] = true;
            touched[i][p + 1] = true;
            orders[i].swap(p, p + 1);
            swaps -= 1;
        }
    }

    let repeats = (config.repeat_rate / (1.0 - config.repeat_rate) * unique as f64).round() as usize;
    let mut positions: Vec<(usize, usize)> = orders
        .iter()
        .enumerate()
        .flat_map(|(i, o)| (0..o.len()).map(move |p| (i, p)))
        .collect();
    positions.shuffle(rng);
    let mut again: Vec<Vec<bool>> = orders.iter().map(|o| vec![false; o.len()]).collect();
    for &(i, p) in positions.iter().take(repeats) {
        again[i][p] = true;
    }
    orders
        .iter()
        .zip(&again)
        .map(|(o, a)| {
            o.iter()
                .zip(a)
                .flat_map(|(&step, &twice)| std::iter::repeat_n(step, 1 + twice as usize))
                .collect()
        })
        .collect()
}

fn generate_item(
    config: &SynthConfig,
    centers: &DMatrix<f64>,
    item_id: String,
    events: Vec<usize>,
    rng: &mut ChaCha8Rng,
) -> Result<(TokenSequence, FeatureStream, AnnotatedItem)> {
    let len = rng.random_range(config.min_intervals..=config.max_intervals);
    let lengths: Vec<usize> = events
        .iter()
        .map(|_| rng.random_range(config.min_action_intervals..=config.max_action_intervals))
        .collect();
    let busy: usize = lengths.iter().sum();
    if busy > len {
        return Err(Error::InvalidParameter(format!(
            "item `{item_id}`: {} actions need {busy} intervals, only {len} available",
            events.len()
        )));
    }
    let free = len - busy;
    let weights: Vec<f64> = (0..=events.len()).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = weights.iter().sum();
    let gaps: Vec<usize> = weights
        .iter()
        .map(|w| (free as f64 * w / total).floor() as usize)
        .collect();

    let dur = config.interval_duration_s;
    let mut starts = Vec::with_capacity(events.len());
    let mut t = 0;
    for (gap, l) in gaps.iter().zip(&lengths) {
        t += gap;
        starts.push(t);
        t += l;
    }

    let mut features = DMatrix::<f64>::from_fn(len, config.feature_dim, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        config.feature_noise_sigma * z
    });
    for ((&s, &start), &l) in events.iter().zip(&starts).zip(&lengths) {
        for r in start..start + l {
            let mut row = features.row_mut(r);
            row += centers.row(s);
        }
    }

    // Captions precede their action; each one starts no earlier than the
    // previous so narration order follows action order.
    let mut timed: Vec<(f64, Token)> = Vec::new();
    let mut last = 0.0f64;
    let extra = config.distractor_rate / (1.0 - config.distractor_rate);
    let horizon = len as f64 * dur;
    for (&s, &start) in events.iter().zip(&starts) {
        let lag = rng.random_range(config.min_lag_s..=config.max_lag_s);
        let at = (start as f64 * dur - lag).max(last);
        last = at;
        timed.push((at, step_token(s)));
        if rng.random_bool(extra) {
            let at = rng.random_range(0.0..horizon);
            timed.push((at, distractor_token(rng.random_range(0..64))));
        }
    }
    timed.sort_by(|a, b| a.0.total_cmp(&b.0));
    let spans = timed
        .iter()
        .map(|&(at, _)| Span {
            start_s: at,
            end_s: at + config.caption_duration_s,
        })
        .collect();
    let sequence = TokenSequence::new(item_id.clone(), timed.into_iter().map(|(_, tok)| tok).collect(), spans)?;

    let annotated = AnnotatedItem {
        item_id: item_id.clone(),
        events: events
            .iter()
            .zip(&starts)
            .zip(&lengths)
            .map(|((&step, &start), &l)| AnnotatedEvent {
                step,
                start_s: start as f64 * dur,
                end_s: (start + l) as f64 * dur,
            })
            .collect(),
    };
    let stream = FeatureStream::new(item_id, features, dur)?;
    Ok((sequence, stream, annotated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalkit::corpus_stats;

    #[test]
    fn clean_corpus_shows_full_script() {
        let corpus = generate(&SynthConfig::clean()).unwrap();
        let stats = corpus_stats(&corpus.annotation).unwrap();
        assert_eq!((stats.order_error, stats.missing, stats.repetition), (Some(0.0), 0.0, Some(0.0)));
        for seq in &corpus.sequences {
            assert_eq!(seq.tokens, corpus.true_script);
        }
    }

    #[test]
    fn requested_rates_hold_per_corpus() {
        for seed in 0..5 {
            let cfg = SynthConfig {
                seed,
                ..SynthConfig::default()
            };
            let stats = corpus_stats(&generate(&cfg).unwrap().annotation).unwrap();
            assert!((stats.missing - cfg.miss_rate).abs() < 0.01, "{stats:?}");
            assert!((stats.order_error.unwrap() - cfg.swap_rate).abs() < 0.01, "{stats:?}");
            assert!((stats.repetition.unwrap() - cfg.repeat_rate).abs() < 0.01, "{stats:?}");
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let cfg = SynthConfig {
            seed: 42,
            ..SynthConfig::default()
        };
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let other = SynthConfig { seed: 43, ..cfg.clone() };
        assert_ne!(generate(&cfg).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn features_follow_annotation() {
        let cfg = SynthConfig {
            num_items: 3,
            ..SynthConfig::clean()
        };
        let corpus = generate(&cfg).unwrap();
        for (stream, item) in corpus.streams.iter().zip(&corpus.annotation.items) {
            let mut busy = vec![None; stream.num_intervals()];
            for e in &item.events {
                for slot in &mut busy[e.start_s as usize..e.end_s as usize] {
                    *slot = Some(e.step);
                }
            }
            for (t, step) in busy.iter().enumerate() {
                let norm = stream.features.row(t).norm();
                match step {
                    Some(_) => assert!((norm - 1.0).abs() < 1e-12),
                    None => assert_eq!(norm, 0.0),
                }
            }
        }
    }

    #[test]
    fn too_short_items_are_rejected() {
        let cfg = SynthConfig {
            num_steps: 5,
            min_intervals: 6,
            max_intervals: 6,
            min_action_intervals: 2,
            ..SynthConfig::clean()
        };
        assert!(generate(&cfg).is_err());
    }
}
