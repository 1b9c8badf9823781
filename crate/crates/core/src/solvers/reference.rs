use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::oracle::ReferenceOfw;
use crate::solvers::OnlineLearner;
use crate::vector::Vector;

/// Adapter exposing the oracle's textbook OFW as a learner. It requires
/// exactly one gradient per round, i.e. undelayed feedback.
#[derive(Debug)]
pub struct OfwReference {
    inner: ReferenceOfw,
    name: &'static str,
}

impl OfwReference {
    pub fn convex(set: Arc<dyn FeasibleSet>, x1: Vector, eta: f64) -> Result<Self> {
        Ok(OfwReference {
            inner: ReferenceOfw::convex(set, x1, eta)?,
            name: "ofw_reference",
        })
    }

    pub fn strongly_convex(set: Arc<dyn FeasibleSet>, x1: Vector, beta: f64) -> Result<Self> {
        Ok(OfwReference {
            inner: ReferenceOfw::strongly_convex(set, x1, beta)?,
            name: "ofw_reference_sc",
        })
    }
}

impl OnlineLearner for OfwReference {
    fn name(&self) -> &'static str {
        self.name
    }

    fn play(&self) -> &Vector {
        self.inner.current()
    }

    fn receive(&mut self, arrivals: &[Vector]) -> Result<()> {
        match arrivals {
            [g] => self.inner.step(g),
            _ => Err(Error::contract(format!(
                "{} needs exactly one gradient per round, got {}",
                self.name,
                arrivals.len()
            ))),
        }
    }

    fn tau(&self) -> usize {
        self.inner.rounds() + 1
    }
}
