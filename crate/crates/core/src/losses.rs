//! Online loss streams.
//!
//! Every stream draws its randomness once at construction, so `value` and
//! `gradient` are pure functions of `(t, x)` and can be replayed under any
//! delay pattern.

use std::fmt::Debug;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::harness::csv::fmt_real;
use crate::vector::Vector;

/// Structure a stream exposes so the offline comparator can be solved in
/// closed form.
#[derive(Debug, Clone, Copy)]
pub enum LossStructure<'a> {
    /// f_t(x) = ⟨g_t, x⟩
    Linear { gradients: &'a [Vector] },
    /// f_t(x) = (β/2)‖x − θ_t‖²
    Quadratic { targets: &'a [Vector], beta: f64 },
    /// No exploitable structure; use offline Frank-Wolfe.
    Opaque,
}

pub trait LossStream: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    fn horizon(&self) -> usize;

    fn dimension(&self) -> usize;

    /// G with ‖∇f_t(x)‖₂ ≤ G over the feasible set.
    fn gradient_bound(&self) -> f64;

    /// β with every f_t β-strongly convex; 0 for merely convex streams.
    fn strong_convexity(&self) -> f64;

    /// f_t(x) for 1 ≤ t ≤ T.
    fn value(&self, t: usize, x: &Vector) -> Result<f64>;

    /// ∇f_t(x) for 1 ≤ t ≤ T.
    fn gradient(&self, t: usize, x: &Vector) -> Result<Vector>;

    fn structure(&self) -> LossStructure<'_> {
        LossStructure::Opaque
    }

    /// One row per round with the stream's drawn parameters.
    fn write_params_csv(&self, out: &mut dyn Write) -> std::io::Result<()>;
}

fn check_round(t: usize, horizon: usize) -> Result<()> {
    if t == 0 || t > horizon {
        return Err(Error::RoundOutOfRange { t, horizon });
    }
    Ok(())
}

fn write_vector_rows(
    out: &mut dyn Write,
    prefix: &str,
    rows: &[Vector],
) -> std::io::Result<()> {
    let dim = rows.first().map_or(0, Vector::len);
    let header: Vec<String> = (0..dim).map(|i| format!("{prefix}{i}")).collect();
    writeln!(out, "t,{}", header.join(","))?;
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|&x| fmt_real(x)).collect();
        writeln!(out, "{},{}", i + 1, cells.join(","))?;
    }
    Ok(())
}

/// Linear losses f_t(x) = ⟨g_t, x⟩.
#[derive(Debug, Clone)]
pub struct LinearStream {
    gradients: Vec<Vector>,
    bound: f64,
}

impl LinearStream {
    /// Draws g_t uniformly on the radius-G sphere in R^n.
    pub fn random(dim: usize, horizon: usize, bound: f64, seed: u64) -> Result<Self> {
        if dim == 0 || horizon == 0 {
            return Err(Error::param("linear stream needs positive dimension and horizon"));
        }
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::param(format!("gradient bound must be > 0, got {bound}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gradients = (0..horizon)
            .map(|_| loop {
                let g: Vector = (0..dim)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect::<Vec<_>>()
                    .into();
                let norm = g.norm();
                if norm > 0.0 {
                    break g.scale(bound / norm);
                }
            })
            .collect();
        Ok(LinearStream { gradients, bound })
    }

    /// A stream with explicit per-round gradients. The bound is their largest norm.
    pub fn from_gradients(gradients: Vec<Vector>) -> Result<Self> {
        let dim = gradients
            .first()
            .map(Vector::len)
            .ok_or_else(|| Error::param("linear stream needs at least one round"))?;
        if gradients.iter().any(|g| g.len() != dim || !g.is_finite()) {
            return Err(Error::param("gradients must be finite and share one dimension"));
        }
        let bound = gradients.iter().map(Vector::norm).fold(0.0, f64::max);
        // G must be positive even for an all-zero stream.
        let bound = if bound > 0.0 { bound } else { f64::MIN_POSITIVE };
        Ok(LinearStream { gradients, bound })
    }

    pub fn gradients(&self) -> &[Vector] {
        &self.gradients
    }
}

impl LossStream for LinearStream {
    fn name(&self) -> &'static str {
        "linear"
    }

    fn horizon(&self) -> usize {
        self.gradients.len()
    }

    fn dimension(&self) -> usize {
        self.gradients[0].len()
    }

    fn gradient_bound(&self) -> f64 {
        self.bound
    }

    fn strong_convexity(&self) -> f64 {
        0.0
    }

    fn value(&self, t: usize, x: &Vector) -> Result<f64> {
        check_round(t, self.horizon())?;
        x.check_dim(self.dimension())?;
        Ok(self.gradients[t - 1].dot(x))
    }

    fn gradient(&self, t: usize, x: &Vector) -> Result<Vector> {
        check_round(t, self.horizon())?;
        x.check_dim(self.dimension())?;
        Ok(self.gradients[t - 1].clone())
    }

    fn structure(&self) -> LossStructure<'_> {
        LossStructure::Linear {
            gradients: &self.gradients,
        }
    }

    fn write_params_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        write_vector_rows(out, "g", &self.gradients)
    }
}

/// Strongly convex losses f_t(x) = (β/2)‖x − θ_t‖² with θ_t in the set.
#[derive(Debug, Clone)]
pub struct QuadraticStream {
    targets: Vec<Vector>,
    beta: f64,
    bound: f64,
}

impl QuadraticStream {
    /// Draws θ_t uniformly from `set`. G = β·D for the set's diameter D.
    pub fn random(set: &dyn FeasibleSet, horizon: usize, beta: f64, seed: u64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::param("quadratic stream needs a positive horizon"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let targets = (0..horizon).map(|_| set.sample(&mut rng)).collect();
        Self::from_targets(targets, beta, set.diameter())
    }

    /// Explicit targets; `diameter` is the diameter of the set they live in.
    pub fn from_targets(targets: Vec<Vector>, beta: f64, diameter: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::param(format!("quadratic stream needs beta > 0, got {beta}")));
        }
        if !(diameter > 0.0 && diameter.is_finite()) {
            return Err(Error::param("diameter must be positive"));
        }
        let dim = targets
            .first()
            .map(Vector::len)
            .ok_or_else(|| Error::param("quadratic stream needs at least one round"))?;
        if targets.iter().any(|th| th.len() != dim || !th.is_finite()) {
            return Err(Error::param("targets must be finite and share one dimension"));
        }
        Ok(QuadraticStream {
            targets,
            beta,
            bound: beta * diameter,
        })
    }

    pub fn targets(&self) -> &[Vector] {
        &self.targets
    }
}

impl LossStream for QuadraticStream {
    fn name(&self) -> &'static str {
        "quadratic"
    }

    fn horizon(&self) -> usize {
        self.targets.len()
    }

    fn dimension(&self) -> usize {
        self.targets[0].len()
    }

    fn gradient_bound(&self) -> f64 {
        self.bound
    }

    fn strong_convexity(&self) -> f64 {
        self.beta
    }

    fn value(&self, t: usize, x: &Vector) -> Result<f64> {
        check_round(t, self.horizon())?;
        x.check_dim(self.dimension())?;
        Ok(0.5 * self.beta * x.sub(&self.targets[t - 1]).norm_sq())
    }

    fn gradient(&self, t: usize, x: &Vector) -> Result<Vector> {
        check_round(t, self.horizon())?;
        x.check_dim(self.dimension())?;
        Ok(x.sub(&self.targets[t - 1]).scale(self.beta))
    }

    fn structure(&self) -> LossStructure<'_> {
        LossStructure::Quadratic {
            targets: &self.targets,
            beta: self.beta,
        }
    }

    fn write_params_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        write_vector_rows(out, "theta", &self.targets)
    }
}
