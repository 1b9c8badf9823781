//! The round loop: play, query, enqueue, drain, ingest.

use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::delay::{DelaySchedule, FeedbackQueue};
use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, MEMBERSHIP_TOL};
use crate::harness::config::{EtaRule, ExperimentConfig};
use crate::losses::LossStream;
use crate::oracle::{self, ComparatorResult, GapReport};
use crate::solvers::{
    eta_general, eta_strongly_convex_set, ogd_step, AlgorithmRegistry, LearnerContext,
    OnlineLearner,
};
use crate::vector::Vector;

#[derive(Debug, Clone, PartialEq)]
pub struct RoundLog {
    pub t: usize,
    /// f_t(x_t)
    pub loss: f64,
    pub cum_loss: f64,
    /// |F_t|
    pub arrivals: usize,
    /// τ after the round's updates
    pub tau: usize,
    /// Σ_{s≤t} f_s(x_s) − Σ_{s≤t} f_s(x*)
    pub cum_regret: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub rounds: Vec<RoundLog>,
    pub cum_loss: f64,
    pub comparator: ComparatorResult,
    /// R(T)
    pub regret: f64,
    /// d = max_t d_t, reported only
    pub max_delay: usize,
    /// Gradients that would have arrived after round T.
    pub undelivered: usize,
    pub duration: Duration,
}

/// All objects for one experiment, built from a config.
#[derive(Debug)]
pub struct Experiment {
    pub set: Arc<dyn FeasibleSet>,
    pub stream: Box<dyn LossStream>,
    pub schedule: DelaySchedule,
    pub eta: f64,
    pub beta: f64,
    pub y1: Vector,
}

impl Experiment {
    pub fn build(config: &ExperimentConfig) -> Result<Self> {
        let set = config.set.build()?;
        let stream = config.stream.build(set.as_ref(), config.horizon, config.base_seed)?;
        let schedule = DelaySchedule::new(config.delays.variant(config.base_seed), config.horizon)?;
        let (d, g, t) = (set.diameter(), stream.gradient_bound(), config.horizon);
        let eta = match config.eta_rule {
            EtaRule::General => eta_general(d, g, t)?,
            EtaRule::StronglyConvexSet => eta_strongly_convex_set(d, g, t)?,
            EtaRule::Explicit(eta) => eta,
        };
        let beta = config.beta.unwrap_or_else(|| stream.strong_convexity());
        let y1 = match &config.y1 {
            Some(y) => Vector::new(y.clone()),
            None => set.lmo(&Vector::zeros(set.dimension()))?,
        };
        Ok(Experiment {
            set,
            stream,
            schedule,
            eta,
            beta,
            y1,
        })
    }

    pub fn learner_context(&self, config: &ExperimentConfig) -> Result<LearnerContext> {
        let step = match config.ogd_step {
            Some(s) => s,
            None => ogd_step(self.set.diameter(), self.stream.gradient_bound(), config.horizon)?,
        };
        Ok(LearnerContext {
            set: self.set.clone(),
            y1: self.y1.clone(),
            eta: self.eta,
            beta: self.beta,
            ogd_step: step,
        })
    }
}

/// Called with the learner after every state change.
pub type Observer<'a> = dyn FnMut(&dyn OnlineLearner) -> Result<()> + 'a;

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_with(config, &AlgorithmRegistry::builtin(), None)
}

/// Runs one experiment. When an observer is given it sees the learner once
/// before the first round and again after every ingested gradient (or after
/// every round for learners that are not incremental).
pub fn run_experiment_with(
    config: &ExperimentConfig,
    registry: &AlgorithmRegistry,
    mut observer: Option<&mut Observer<'_>>,
) -> Result<ExperimentResult> {
    let started = Instant::now();
    let mut config = config.clone();
    config.validate(registry, 0)?;
    let exp = Experiment::build(&config)?;
    let mut learner = registry.create(&config.algorithm, &exp.learner_context(&config)?)?;
    let horizon = config.horizon;
    let mut queue = FeedbackQueue::with_horizon(horizon);

    if let Some(obs) = observer.as_mut() {
        obs(learner.as_ref())?;
    }

    let mut rounds = Vec::with_capacity(horizon);
    let mut cum_loss = 0.0;
    for t in 1..=horizon {
        let x = learner.play().clone();
        if !exp.set.contains(&x, MEMBERSHIP_TOL) {
            return Err(Error::Invariant(format!("round {t}: played decision left the set")));
        }
        let loss = exp.stream.value(t, &x)?;
        let g = exp.stream.gradient(t, &x)?;
        queue.enqueue(t, g, exp.schedule.delay(t)?)?;
        let arrivals: Vec<Vector> = queue.drain(t)?.into_iter().map(|(_, g)| g).collect();

        match observer.as_mut() {
            Some(obs) if learner.is_incremental() => {
                for g in &arrivals {
                    learner.receive(std::slice::from_ref(g))?;
                    obs(learner.as_ref())?;
                }
            }
            Some(obs) => {
                learner.receive(&arrivals)?;
                obs(learner.as_ref())?;
            }
            None => learner.receive(&arrivals)?,
        }

        cum_loss += loss;
        rounds.push(RoundLog {
            t,
            loss,
            cum_loss,
            arrivals: arrivals.len(),
            tau: learner.tau(),
            cum_regret: 0.0,
        });
    }

    let comparator = oracle::offline_comparator(exp.set.as_ref(), exp.stream.as_ref())?;
    let mut comparator_cum = 0.0;
    for r in rounds.iter_mut() {
        comparator_cum += exp.stream.value(r.t, &comparator.x_star)?;
        r.cum_regret = r.cum_loss - comparator_cum;
    }
    let regret = cum_loss - comparator.offline_total;

    Ok(ExperimentResult {
        max_delay: exp.schedule.max_delay(),
        undelivered: queue.dropped_count(),
        config,
        rounds,
        cum_loss,
        comparator,
        regret,
        duration: started.elapsed(),
    })
}

#[derive(Debug, Clone)]
pub struct GapCheckSummary {
    pub checked: usize,
    pub violations: Vec<GapReport>,
    /// Largest gap / bound ratio seen.
    pub worst_ratio: f64,
    pub result: ExperimentResult,
}

/// Runs an experiment while checking the surrogate-gap bound after every
/// ingested gradient. Only learners that expose their surrogate qualify.
pub fn gap_check(config: &ExperimentConfig) -> Result<GapCheckSummary> {
    let registry = AlgorithmRegistry::builtin();
    let exp = Experiment::build(config)?;
    let set = exp.set.clone();
    let grad_bound = exp.stream.gradient_bound();
    let mut checked = 0;
    let mut violations = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    let mut observe = |learner: &dyn OnlineLearner| -> Result<()> {
        let snapshot = learner.surrogate().ok_or_else(|| {
            Error::config(
                0,
                format!("gapcheck needs a Frank-Wolfe learner; `{}` has no surrogate", learner.name()),
            )
        })?;
        if let Some(report) = oracle::surrogate_gap(set.as_ref(), snapshot, grad_bound)? {
            checked += 1;
            worst_ratio = worst_ratio.max(report.gap / report.bound);
            if !report.holds() {
                violations.push(report);
            }
        }
        Ok(())
    };
    let result = run_experiment_with(config, &registry, Some(&mut observe))?;
    Ok(GapCheckSummary {
        checked,
        violations,
        worst_ratio,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{DelaySpec, SetSpec, StreamKind};

    fn cube(n: usize) -> SetSpec {
        SetSpec::Box {
            lo: vec![-1.0; n],
            hi: vec![1.0; n],
        }
    }

    #[test]
    fn single_round() {
        let cfg = ExperimentConfig::new(cube(3), StreamKind::Linear { grad_bound: 1.0 }, "dofw_convex", 1);
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.rounds.len(), 1);
        let exp = Experiment::build(&cfg).unwrap();
        // y1 is the hi corner; the comparator is lmo(g_1).
        let f1_y1 = exp.stream.value(1, &Vector::filled(3, 1.0)).unwrap();
        let best = exp.stream.value(1, &exp.set.lmo(&exp.stream.gradient(1, &exp.y1).unwrap()).unwrap()).unwrap();
        assert!((res.regret - (f1_y1 - best)).abs() < 1e-12);
        assert_eq!(res.rounds[0].arrivals, 1);
        assert_eq!(res.rounds[0].tau, 2);
    }

    #[test]
    fn starved_solver_plays_y1() {
        let cfg = ExperimentConfig::new(cube(2), StreamKind::Linear { grad_bound: 1.0 }, "dofw_convex", 20)
            .with_delays(DelaySpec::Fixed { d: 50 });
        let mut plays = Vec::new();
        let mut obs = |l: &dyn OnlineLearner| -> Result<()> {
            plays.push(l.play().clone());
            Ok(())
        };
        let res = run_experiment_with(&cfg, &AlgorithmRegistry::builtin(), Some(&mut obs)).unwrap();
        assert!(res.rounds.iter().all(|r| r.arrivals == 0 && r.tau == 1));
        assert!(plays.iter().all(|p| p == &Vector::filled(2, 1.0)));
        assert_eq!(res.undelivered, 20);
        assert_eq!(res.max_delay, 50);
    }

    #[test]
    fn fixed_delay_plays_y1_until_first_arrival() {
        let cfg = ExperimentConfig::new(cube(2), StreamKind::Linear { grad_bound: 1.0 }, "dofw_convex", 30)
            .with_delays(DelaySpec::Fixed { d: 5 });
        let res = run_experiment(&cfg).unwrap();
        for r in &res.rounds[..4] {
            assert_eq!(r.tau, 1);
        }
        assert_eq!(res.rounds[4].tau, 2);
        assert_eq!(res.undelivered, 4);
    }

    #[test]
    fn regret_accounting_identity() {
        let cfg = ExperimentConfig::new(cube(4), StreamKind::Quadratic { beta: 1.0 }, "dofw_sc", 300)
            .with_delays(DelaySpec::Uniform { d_max: 7, seed: None });
        let res = run_experiment(&cfg).unwrap();
        let summed: f64 = res.rounds.iter().map(|r| r.loss).sum();
        assert!((summed - res.cum_loss).abs() <= 1e-9 * res.cum_loss.abs().max(1.0));
        let last = res.rounds.last().unwrap();
        assert!((last.cum_regret - res.regret).abs() <= 1e-9 * res.regret.abs().max(1.0));
    }

    #[test]
    fn gap_check_rejects_ogd() {
        let cfg = ExperimentConfig::new(cube(2), StreamKind::Linear { grad_bound: 1.0 }, "delayed_ogd", 5);
        assert!(matches!(gap_check(&cfg), Err(Error::Config { .. })));
    }

    #[test]
    fn validation_happens_before_running() {
        let cfg = ExperimentConfig::new(cube(2), StreamKind::Linear { grad_bound: 1.0 }, "dofw_sc", 5);
        assert!(matches!(run_experiment(&cfg), Err(Error::Config { .. })));
    }
}
