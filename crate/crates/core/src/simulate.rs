//! Synthetic labelers driving a campaign end to end.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;

use chrono::DateTime;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::campaign::{
    Campaign, CampaignError, CampaignOptions, CampaignPool, IssuedPrompt, Mode, PromptPayload,
};
use crate::features::FEATURE_COUNT;
use crate::prompt::PairKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Users take turns one prompt at a time.
    #[default]
    RoundRobin,
    /// Each user finishes before the next starts.
    Sequential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationConfig {
    pub users: usize,
    pub utility_seed: u64,
    /// Standard deviation of per-judgement Gaussian noise on the utility gap.
    pub noise_sd: f64,
    /// Gaps smaller than this are ties.
    pub tie_threshold: f64,
    pub schedule: Schedule,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            users: 21,
            utility_seed: 0,
            noise_sd: 0.25,
            tie_threshold: 0.1,
            schedule: Schedule::RoundRobin,
        }
    }
}

/// Linear utility over z-normalized feature vectors with unit-norm weights.
#[derive(Debug, Clone)]
pub struct Labeler {
    weights: [f64; FEATURE_COUNT],
}

impl Labeler {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: [f64; FEATURE_COUNT] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        let norm = raw
            .iter()
            .map(|w| w * w)
            .sum::<f64>()
            .sqrt()
            .max(f64::MIN_POSITIVE);
        Self {
            weights: raw.map(|w| w / norm),
        }
    }

    pub fn utility(&self, z: &[f64; FEATURE_COUNT]) -> f64 {
        self.weights.iter().zip(z).map(|(w, x)| w * x).sum()
    }

    /// Presentation-frame score given the utility gap left − right.
    pub fn judge(gap: f64, tie_threshold: f64) -> f64 {
        if gap.abs() < tie_threshold {
            0.5
        } else if gap > 0.0 {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub pair: PairKey,
    pub count: usize,
    pub disagreement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub mode: Mode,
    pub users: usize,
    pub unique_labels: usize,
    pub check_labels: usize,
    pub count_min: usize,
    pub count_max: usize,
    pub mean_disagreement: f64,
    pub mean_consistency: f64,
    pub pairs: Vec<PairReport>,
    pub consistency: BTreeMap<String, f64>,
    pub traces: BTreeMap<String, Vec<IssuedPrompt>>,
}

/// Deterministic one-second-per-call clock starting at a fixed instant.
pub fn virtual_clock() -> crate::campaign::Clock {
    let t = Arc::new(AtomicI64::new(1_700_000_000));
    Arc::new(move || {
        DateTime::from_timestamp(t.fetch_add(1, Ordering::Relaxed), 0).expect("in range")
    })
}

pub fn simulate(
    options: CampaignOptions,
    pool: Arc<CampaignPool>,
    config: &SimulationConfig,
) -> Result<SimulationReport, CampaignError> {
    let mut campaign = Campaign::in_memory(options, pool).with_clock(virtual_clock());
    simulate_labelers(&mut campaign, config)
}

/// Registers `config.users` labelers and runs every session to completion.
pub fn simulate_labelers(
    campaign: &mut Campaign,
    config: &SimulationConfig,
) -> Result<SimulationReport, CampaignError> {
    let labeler = Labeler::random(config.utility_seed);
    let noise = Normal::new(0.0, config.noise_sd.max(0.0)).expect("finite sd");
    let mut rng = ChaCha8Rng::seed_from_u64(config.utility_seed.wrapping_add(1));
    let pool = Arc::clone(campaign.pool());
    let utility = |id: &str| -> Result<f64, CampaignError> {
        let v = pool.charts.vector(id)?;
        Ok(labeler.utility(&pool.charts.stats().z_normalize(v)))
    };

    let users: Vec<String> = (1..=config.users)
        .map(|i| campaign.register(Some(&format!("sim-{i:02}"))))
        .collect::<Result<_, _>>()?;
    let step = |campaign: &mut Campaign,
                user: &str,
                rng: &mut ChaCha8Rng|
     -> Result<bool, CampaignError> {
        let p: PromptPayload = match campaign.next(user) {
            Ok(p) => p,
            Err(CampaignError::CampaignComplete(_)) => return Ok(false),
            Err(e) => return Err(e),
        };
        let mut gap = utility(&p.left.id)? - utility(&p.right.id)?;
        if config.noise_sd > 0.0 {
            gap += noise.sample(rng);
        }
        let view_ms = rng.random_range(3_000..15_000);
        campaign.submit(
            user,
            &p.token,
            Labeler::judge(gap, config.tie_threshold),
            view_ms,
        )?;
        Ok(true)
    };
    match config.schedule {
        Schedule::Sequential => {
            for u in &users {
                while step(campaign, u, &mut rng)? {}
            }
        }
        Schedule::RoundRobin => {
            let mut active = users.clone();
            while !active.is_empty() {
                let mut still = Vec::with_capacity(active.len());
                for u in active {
                    if step(campaign, &u, &mut rng)? {
                        still.push(u);
                    }
                }
                active = still;
            }
        }
    }
    report(campaign, &users)
}

fn report(campaign: &Campaign, users: &[String]) -> Result<SimulationReport, CampaignError> {
    let log = campaign.log();
    let pairs: Vec<PairReport> = campaign
        .pool()
        .context
        .pairs()
        .iter()
        .map(|p| {
            let s = log.pair_statistics(p);
            PairReport {
                pair: p.clone(),
                count: s.label_count,
                disagreement: s.score_variance,
            }
        })
        .collect();
    let consistency: BTreeMap<String, f64> = users
        .iter()
        .filter_map(|u| log.consistency_score(u).ok().map(|c| (u.clone(), c)))
        .collect();
    let traces = users
        .iter()
        .map(|u| Ok((u.clone(), campaign.trace(u)?.to_vec())))
        .collect::<Result<_, CampaignError>>()?;
    let mean = |xs: &mut dyn Iterator<Item = f64>| {
        let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
        if n == 0 {
            0.0
        } else {
            s / n as f64
        }
    };
    Ok(SimulationReport {
        mode: campaign.mode(),
        users: users.len(),
        unique_labels: log.unique_count(),
        check_labels: log.check_count(),
        count_min: pairs.iter().map(|p| p.count).min().unwrap_or(0),
        count_max: pairs.iter().map(|p| p.count).max().unwrap_or(0),
        mean_disagreement: mean(&mut pairs.iter().filter(|p| p.count > 0).map(|p| p.disagreement)),
        mean_consistency: mean(&mut consistency.values().copied()),
        pairs,
        consistency,
        traces,
    })
}
