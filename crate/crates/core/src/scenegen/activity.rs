use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::util::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActivityParams {
    /// Mean time between state transitions.
    pub mean_dwell_s: f64,
    pub segment_s: f64,
    pub max_sources: usize,
    /// Probability that a slot starts the segment active.
    pub initial_active_prob: f64,
}

impl Default for ActivityParams {
    fn default() -> Self {
        Self {
            mean_dwell_s: 1.5,
            segment_s: 2.0,
            max_sources: 2,
            initial_active_prob: 0.5,
        }
    }
}

/// One active stretch of a source slot. `brir` indexes the candidate BRIR list
/// the timeline was sampled against; it stays fixed for the whole interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivityInterval {
    pub start_s: f64,
    pub end_s: f64,
    pub brir: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityTimeline {
    pub segment_s: f64,
    /// Non-overlapping, time-ordered intervals per source slot.
    pub slots: Vec<Vec<ActivityInterval>>,
}

impl ActivityTimeline {
    pub fn empty(segment_s: f64, n_slots: usize) -> Self {
        Self {
            segment_s,
            slots: vec![Vec::new(); n_slots],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.slots.iter().all(Vec::is_empty)
    }

    pub fn intervals(&self) -> impl Iterator<Item = &ActivityInterval> {
        self.slots.iter().flatten()
    }

    /// Number of state changes strictly inside the segment, over all slots.
    pub fn transitions(&self) -> usize {
        self.intervals()
            .map(|iv| usize::from(iv.start_s > 0.0) + usize::from(iv.end_s < self.segment_s))
            .sum()
    }

    /// Largest number of simultaneously active slots.
    pub fn max_concurrent(&self) -> usize {
        let mut edges: Vec<(f64, i32)> = self
            .intervals()
            .flat_map(|iv| [(iv.start_s, 1), (iv.end_s, -1)])
            .collect();
        edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let (mut cur, mut best) = (0, 0);
        for (_, d) in edges {
            cur += d;
            best = best.max(cur);
        }
        best as usize
    }
}

/// Samples an activity timeline: every slot runs an independent two-state
/// (active/inactive) Markov chain in continuous time with exponential dwell
/// times of mean `mean_dwell_s`. Each activation picks a uniformly random BRIR
/// among `n_brirs` candidates.
pub fn sample_activity_with<R: Rng + ?Sized>(
    params: &ActivityParams,
    n_brirs: usize,
    rng: &mut R,
) -> Result<ActivityTimeline> {
    if !(params.mean_dwell_s > 0.0) {
        return Err(Error::invalid("mean dwell time must be positive"));
    }
    if !(params.segment_s > 0.0) {
        return Err(Error::invalid("segment length must be positive"));
    }
    if !(0.0..=1.0).contains(&params.initial_active_prob) {
        return Err(Error::invalid(
            "initial active probability must be in [0, 1]",
        ));
    }
    if n_brirs == 0 && params.max_sources > 0 {
        return Err(Error::invalid("no BRIRs to choose source positions from"));
    }
    let dwell = (params.mean_dwell_s.is_finite())
        .then(|| Exp::new(1.0 / params.mean_dwell_s).expect("positive rate"));
    let draw = |rng: &mut R| dwell.as_ref().map_or(f64::INFINITY, |d| d.sample(rng));

    let mut slots = Vec::with_capacity(params.max_sources);
    for _ in 0..params.max_sources {
        let mut intervals = Vec::new();
        let mut active = rng.random::<f64>() < params.initial_active_prob;
        let mut t = 0.0;
        while t < params.segment_s {
            let end = (t + draw(rng)).min(params.segment_s);
            if active {
                intervals.push(ActivityInterval {
                    start_s: t,
                    end_s: end,
                    brir: rng.random_range(0..n_brirs),
                });
            }
            t = end;
            active = !active;
        }
        slots.push(intervals);
    }
    Ok(ActivityTimeline {
        segment_s: params.segment_s,
        slots,
    })
}

/// Seeded variant of [`sample_activity_with`].
pub fn sample_activity(
    params: &ActivityParams,
    n_brirs: usize,
    seed: u64,
) -> Result<ActivityTimeline> {
    sample_activity_with(params, n_brirs, &mut rng(seed))
}
