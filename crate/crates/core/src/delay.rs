//! Delay schedules and the feedback queue.
//!
//! The gradient queried in round k arrives at the end of round k + d_k − 1.
//! Solvers never see this module: the harness drains the queue and hands
//! them bare gradients.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::vector::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayVariant {
    Fixed(usize),
    UniformRandom { d_max: usize, seed: u64 },
    /// `burst` when t mod `period` = 0, else 1.
    Bursty { period: usize, burst: usize },
}

impl DelayVariant {
    fn validate(&self) -> Result<()> {
        match *self {
            DelayVariant::Fixed(0) => Err(Error::param("fixed delay must be >= 1")),
            DelayVariant::UniformRandom { d_max: 0, .. } => {
                Err(Error::param("uniform delay needs d_max >= 1"))
            }
            DelayVariant::Bursty { period: 0, .. } => {
                Err(Error::param("bursty delay needs period >= 1"))
            }
            DelayVariant::Bursty { burst: 0, .. } => {
                Err(Error::param("bursty delay needs burst >= 1"))
            }
            _ => Ok(()),
        }
    }
}

/// A delay sequence d_1..d_T materialized up front.
#[derive(Debug, Clone)]
pub struct DelaySchedule {
    variant: DelayVariant,
    delays: Vec<usize>,
}

impl DelaySchedule {
    pub fn new(variant: DelayVariant, horizon: usize) -> Result<Self> {
        variant.validate()?;
        let delays = match variant {
            DelayVariant::Fixed(d) => vec![d; horizon],
            DelayVariant::UniformRandom { d_max, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..horizon).map(|_| rng.random_range(1..=d_max)).collect()
            }
            DelayVariant::Bursty { period, burst } => (1..=horizon)
                .map(|t| if t % period == 0 { burst } else { 1 })
                .collect(),
        };
        Ok(DelaySchedule { variant, delays })
    }

    pub fn variant(&self) -> DelayVariant {
        self.variant
    }

    pub fn horizon(&self) -> usize {
        self.delays.len()
    }

    /// d_t for 1 ≤ t ≤ T.
    pub fn delay(&self, t: usize) -> Result<usize> {
        if t == 0 || t > self.delays.len() {
            return Err(Error::RoundOutOfRange {
                t,
                horizon: self.delays.len(),
            });
        }
        Ok(self.delays[t - 1])
    }

    pub fn delays(&self) -> &[usize] {
        &self.delays
    }

    /// d = max_t d_t (0 for an empty schedule).
    pub fn max_delay(&self) -> usize {
        self.delays.iter().copied().max().unwrap_or(0)
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "t,d")?;
        for (i, d) in self.delays.iter().enumerate() {
            writeln!(out, "{},{}", i + 1, d)?;
        }
        Ok(())
    }
}

/// Buffer releasing g_k at round k + d_k − 1.
#[derive(Debug, Default)]
pub struct FeedbackQueue {
    pending: BTreeMap<usize, Vec<(usize, Vector)>>,
    seen: HashSet<usize>,
    last_drained: usize,
    horizon: Option<usize>,
    dropped: usize,
}

impl FeedbackQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// A queue that discards gradients arriving after round `horizon`.
    pub fn with_horizon(horizon: usize) -> Self {
        FeedbackQueue {
            horizon: Some(horizon),
            ..Self::default()
        }
    }

    /// Arrival round of a gradient queried at `k` with delay `d`.
    pub fn arrival_round(k: usize, d: usize) -> usize {
        k + d - 1
    }

    pub fn enqueue(&mut self, k: usize, g: Vector, d: usize) -> Result<()> {
        if k == 0 || d == 0 {
            return Err(Error::contract(format!("enqueue needs k >= 1 and d >= 1 (k={k}, d={d})")));
        }
        if !self.seen.insert(k) {
            return Err(Error::contract(format!("gradient for round {k} enqueued twice")));
        }
        let arrival = Self::arrival_round(k, d);
        if arrival <= self.last_drained {
            return Err(Error::contract(format!(
                "gradient {k} would arrive at round {arrival}, already drained"
            )));
        }
        if self.horizon.is_some_and(|h| arrival > h) {
            self.dropped += 1;
            return Ok(());
        }
        let slot = self.pending.entry(arrival).or_default();
        let pos = slot.partition_point(|(j, _)| *j < k);
        slot.insert(pos, (k, g));
        Ok(())
    }

    /// All (k, g_k) with k + d_k − 1 = t, ascending in k.
    pub fn drain(&mut self, t: usize) -> Result<Vec<(usize, Vector)>> {
        if t <= self.last_drained {
            return Err(Error::contract(format!(
                "drain({t}) after drain({}); rounds must increase",
                self.last_drained
            )));
        }
        self.last_drained = t;
        Ok(self.pending.remove(&t).unwrap_or_default())
    }

    pub fn pending_count(&self) -> usize {
        self.pending.values().map(Vec::len).sum()
    }

    /// Gradients discarded because they would arrive after the horizon.
    pub fn dropped_count(&self) -> usize {
        self.dropped
    }
}
