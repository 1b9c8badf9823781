//! Online learners and the name-keyed algorithm registry.
//!
//! A learner sees only the gradients the harness hands it; it never learns
//! the delays, the delay schedule, or which round a gradient came from.

mod line_search;
mod ofw;
mod ogd;
mod reference;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use line_search::{
    eta_general, eta_strongly_convex_set, line_search_convex, line_search_sc, ogd_step,
};
pub use ofw::{ConvexOfw, StronglyConvexOfw};
pub use ogd::DelayedOgd;
pub use reference::OfwReference;

use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::vector::Vector;

/// Read-only view of a Frank-Wolfe learner's current surrogate, used by the
/// gap checks.
#[derive(Debug, Clone, Copy)]
pub enum SurrogateSnapshot<'a> {
    /// F(y) = η⟨ḡ, y⟩ + ‖y − y_1‖² built from τ − 1 gradients.
    Convex {
        y: &'a Vector,
        y1: &'a Vector,
        gbar: &'a Vector,
        eta: f64,
        tau: usize,
    },
    /// `ysum` holds y_1 + … + y_τ, including the current point.
    StronglyConvex {
        y: &'a Vector,
        gbar: &'a Vector,
        ysum: &'a Vector,
        beta: f64,
        tau: usize,
    },
}

pub trait OnlineLearner: Send {
    fn name(&self) -> &'static str;

    /// Decision for the current round. Does not mutate.
    fn play(&self) -> &Vector;

    /// Feed the gradients released at the end of a round, in delivery order.
    fn receive(&mut self, arrivals: &[Vector]) -> Result<()>;

    /// 1 + number of gradients ingested.
    fn tau(&self) -> usize;

    /// True when `receive(&[a, b])` is the same as `receive(&[a])` followed
    /// by `receive(&[b])`.
    fn is_incremental(&self) -> bool {
        false
    }

    fn surrogate(&self) -> Option<SurrogateSnapshot<'_>> {
        None
    }
}

/// Everything a factory may need to build a learner.
#[derive(Debug, Clone)]
pub struct LearnerContext {
    pub set: Arc<dyn FeasibleSet>,
    pub y1: Vector,
    pub eta: f64,
    pub beta: f64,
    pub ogd_step: f64,
}

pub type LearnerFactory = fn(&LearnerContext) -> Result<Box<dyn OnlineLearner>>;

/// What an algorithm demands from the experiment configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Requirements {
    /// Needs a strongly convex loss stream (β > 0).
    pub strongly_convex_losses: bool,
    /// Only defined when every gradient arrives in the round it was queried.
    pub undelayed_feedback: bool,
}

#[derive(Clone)]
pub struct AlgorithmEntry {
    pub description: &'static str,
    pub requirements: Requirements,
    factory: LearnerFactory,
}

impl fmt::Debug for AlgorithmEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlgorithmEntry")
            .field("description", &self.description)
            .field("requirements", &self.requirements)
            .finish()
    }
}

#[derive(Debug, Clone, Default)]
pub struct AlgorithmRegistry {
    entries: BTreeMap<String, AlgorithmEntry>,
}

impl AlgorithmRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry holding every learner shipped with the crate.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register(
            "dofw_convex",
            "delayed online Frank-Wolfe for convex losses",
            Requirements::default(),
            |ctx| Ok(Box::new(ConvexOfw::new(ctx.set.clone(), ctx.y1.clone(), ctx.eta)?)),
        );
        reg.register(
            "dofw_sc",
            "delayed online Frank-Wolfe for strongly convex losses",
            Requirements {
                strongly_convex_losses: true,
                ..Requirements::default()
            },
            |ctx| {
                Ok(Box::new(StronglyConvexOfw::new(
                    ctx.set.clone(),
                    ctx.y1.clone(),
                    ctx.beta,
                )?))
            },
        );
        reg.register(
            "delayed_ogd",
            "projected gradient descent on the sum of each round's arrivals",
            Requirements::default(),
            |ctx| Ok(Box::new(DelayedOgd::new(ctx.set.clone(), ctx.y1.clone(), ctx.ogd_step)?)),
        );
        reg.register(
            "ofw_reference",
            "textbook non-delayed online Frank-Wolfe (convex surrogate)",
            Requirements {
                undelayed_feedback: true,
                ..Requirements::default()
            },
            |ctx| Ok(Box::new(OfwReference::convex(ctx.set.clone(), ctx.y1.clone(), ctx.eta)?)),
        );
        reg.register(
            "ofw_reference_sc",
            "textbook non-delayed online Frank-Wolfe (strongly convex surrogate)",
            Requirements {
                strongly_convex_losses: true,
                undelayed_feedback: true,
            },
            |ctx| {
                Ok(Box::new(OfwReference::strongly_convex(
                    ctx.set.clone(),
                    ctx.y1.clone(),
                    ctx.beta,
                )?))
            },
        );
        reg
    }

    /// Adds or replaces an entry.
    pub fn register(
        &mut self,
        name: &str,
        description: &'static str,
        requirements: Requirements,
        factory: LearnerFactory,
    ) {
        self.entries.insert(
            name.to_string(),
            AlgorithmEntry {
                description,
                requirements,
                factory,
            },
        );
    }

    pub fn get(&self, name: &str) -> Option<&AlgorithmEntry> {
        self.entries.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn create(&self, name: &str, ctx: &LearnerContext) -> Result<Box<dyn OnlineLearner>> {
        let entry = self.get(name).ok_or_else(|| {
            Error::param(format!(
                "unknown algorithm `{name}` (known: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        (entry.factory)(ctx)
    }
}
