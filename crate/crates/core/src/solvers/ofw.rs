//! Delayed online Frank-Wolfe.
//!
//! Each received gradient triggers one linear-optimization step on a
//! surrogate built from the sum of everything received so far. The played
//! decision is always the latest intermediate point y_τ.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, MEMBERSHIP_TOL};
use crate::solvers::line_search::{line_search_convex, line_search_sc};
use crate::solvers::{OnlineLearner, SurrogateSnapshot};
use crate::vector::Vector;

fn check_start(set: &dyn FeasibleSet, y1: &Vector) -> Result<()> {
    y1.check_dim(set.dimension())?;
    if !set.contains(y1, MEMBERSHIP_TOL) {
        return Err(Error::param("initial point y1 is not in the feasible set"));
    }
    Ok(())
}

fn check_gradient(set: &dyn FeasibleSet, g: &Vector) -> Result<()> {
    g.check_dim(set.dimension())?;
    if !g.is_finite() {
        return Err(Error::contract("received a non-finite gradient"));
    }
    Ok(())
}

/// Delayed OFW for convex losses, surrogate F_τ(y) = η⟨ḡ_τ, y⟩ + ‖y − y_1‖².
#[derive(Debug, Clone)]
pub struct ConvexOfw {
    set: Arc<dyn FeasibleSet>,
    y1: Vector,
    y: Vector,
    gbar: Vector,
    tau: usize,
    eta: f64,
}

impl ConvexOfw {
    pub fn new(set: Arc<dyn FeasibleSet>, y1: Vector, eta: f64) -> Result<Self> {
        check_start(set.as_ref(), &y1)?;
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::param(format!("eta must be positive, got {eta}")));
        }
        let n = y1.len();
        Ok(ConvexOfw {
            set,
            y: y1.clone(),
            y1,
            gbar: Vector::zeros(n),
            tau: 1,
            eta,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn gbar(&self) -> &Vector {
        &self.gbar
    }

    pub fn y1(&self) -> &Vector {
        &self.y1
    }

    /// ∇F_τ(at) = η·ḡ_τ + 2(at − y_1).
    pub fn surrogate_gradient(&self, at: &Vector) -> Vector {
        let mut grad = at.sub(&self.y1).scale(2.0);
        grad.axpy(self.eta, &self.gbar);
        grad
    }

    pub fn ingest(&mut self, g: &Vector) -> Result<()> {
        check_gradient(self.set.as_ref(), g)?;
        self.gbar.add_assign(g);
        let grad = self.surrogate_gradient(&self.y);
        let v = self.set.lmo(&grad)?;
        let dir = v.sub(&self.y);
        let sigma = line_search_convex(&grad, &dir);
        self.y.axpy(sigma, &dir);
        self.tau += 1;
        Ok(())
    }
}

impl OnlineLearner for ConvexOfw {
    fn name(&self) -> &'static str {
        "dofw_convex"
    }

    fn play(&self) -> &Vector {
        &self.y
    }

    fn receive(&mut self, arrivals: &[Vector]) -> Result<()> {
        arrivals.iter().try_for_each(|g| self.ingest(g))
    }

    fn tau(&self) -> usize {
        self.tau
    }

    fn is_incremental(&self) -> bool {
        true
    }

    fn surrogate(&self) -> Option<SurrogateSnapshot<'_>> {
        Some(SurrogateSnapshot::Convex {
            y: &self.y,
            y1: &self.y1,
            gbar: &self.gbar,
            eta: self.eta,
            tau: self.tau,
        })
    }
}

/// Delayed OFW for β-strongly convex losses,
/// surrogate F_τ(y) = ⟨ḡ_τ, y⟩ + Σ_{i≤τ} (β/2)‖y − y_i‖².
#[derive(Debug, Clone)]
pub struct StronglyConvexOfw {
    set: Arc<dyn FeasibleSet>,
    y1: Vector,
    y: Vector,
    gbar: Vector,
    /// y_1 + … + y_τ
    ysum: Vector,
    tau: usize,
    beta: f64,
}

impl StronglyConvexOfw {
    pub fn new(set: Arc<dyn FeasibleSet>, y1: Vector, beta: f64) -> Result<Self> {
        check_start(set.as_ref(), &y1)?;
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::param(format!("beta must be positive, got {beta}")));
        }
        let n = y1.len();
        Ok(StronglyConvexOfw {
            set,
            y: y1.clone(),
            ysum: y1.clone(),
            y1,
            gbar: Vector::zeros(n),
            tau: 1,
            beta,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gbar(&self) -> &Vector {
        &self.gbar
    }

    pub fn ysum(&self) -> &Vector {
        &self.ysum
    }

    pub fn y1(&self) -> &Vector {
        &self.y1
    }

    /// ∇F_τ(at) = ḡ_τ + β(τ·at − Σ y_i).
    pub fn surrogate_gradient(&self, at: &Vector) -> Vector {
        let mut grad = at.scale(self.tau as f64).sub(&self.ysum).scale(self.beta);
        grad.add_assign(&self.gbar);
        grad
    }

    pub fn ingest(&mut self, g: &Vector) -> Result<()> {
        check_gradient(self.set.as_ref(), g)?;
        self.gbar.add_assign(g);
        let grad = self.surrogate_gradient(&self.y);
        let v = self.set.lmo(&grad)?;
        let dir = v.sub(&self.y);
        let sigma = line_search_sc(&grad, &dir, self.beta, self.tau);
        self.y.axpy(sigma, &dir);
        self.tau += 1;
        self.ysum.add_assign(&self.y);
        Ok(())
    }
}

impl OnlineLearner for StronglyConvexOfw {
    fn name(&self) -> &'static str {
        "dofw_sc"
    }

    fn play(&self) -> &Vector {
        &self.y
    }

    fn receive(&mut self, arrivals: &[Vector]) -> Result<()> {
        arrivals.iter().try_for_each(|g| self.ingest(g))
    }

    fn tau(&self) -> usize {
        self.tau
    }

    fn is_incremental(&self) -> bool {
        true
    }

    fn surrogate(&self) -> Option<SurrogateSnapshot<'_>> {
        Some(SurrogateSnapshot::StronglyConvex {
            y: &self.y,
            gbar: &self.gbar,
            ysum: &self.ysum,
            beta: self.beta,
            tau: self.tau,
        })
    }
}
