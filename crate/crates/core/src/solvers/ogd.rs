use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, MEMBERSHIP_TOL};
use crate::solvers::OnlineLearner;
use crate::vector::Vector;

/// Delayed online gradient descent baseline: one projected step per round
/// with the sum of the gradients that arrived in that round.
#[derive(Debug, Clone)]
pub struct DelayedOgd {
    set: Arc<dyn FeasibleSet>,
    x: Vector,
    step: f64,
    received: usize,
}

impl DelayedOgd {
    pub fn new(set: Arc<dyn FeasibleSet>, x0: Vector, step: f64) -> Result<Self> {
        x0.check_dim(set.dimension())?;
        if !set.contains(&x0, MEMBERSHIP_TOL) {
            return Err(Error::param("initial OGD point is not in the feasible set"));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::param(format!("OGD step must be positive, got {step}")));
        }
        Ok(DelayedOgd {
            set,
            x: x0,
            step,
            received: 0,
        })
    }

    pub fn step_size(&self) -> f64 {
        self.step
    }
}

impl OnlineLearner for DelayedOgd {
    fn name(&self) -> &'static str {
        "delayed_ogd"
    }

    fn play(&self) -> &Vector {
        &self.x
    }

    fn receive(&mut self, arrivals: &[Vector]) -> Result<()> {
        if arrivals.is_empty() {
            return Ok(());
        }
        let mut total = Vector::zeros(self.x.len());
        for g in arrivals {
            g.check_dim(self.x.len())?;
            total.add_assign(g);
        }
        let mut moved = self.x.clone();
        moved.axpy(-self.step, &total);
        self.x = self.set.project(&moved)?;
        self.received += arrivals.len();
        Ok(())
    }

    fn tau(&self) -> usize {
        1 + self.received
    }
}
