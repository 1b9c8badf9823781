//! Feasible sets: linear minimization oracles, diameters, strong-convexity
//! moduli, and Euclidean projections.
//!
//! The online solvers only ever call [`FeasibleSet::lmo`]. Projections are
//! here for the oracle module and the delayed OGD baseline.

use std::fmt::Debug;

use rand::{Rng, RngCore};
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::vector::Vector;

/// Membership tolerance used when checking played decisions.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

pub trait FeasibleSet: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    fn dimension(&self) -> usize;

    /// Upper bound on ‖x − y‖₂ over the set.
    fn diameter(&self) -> f64;

    /// Strong-convexity modulus of the set; 0 for sets that are not
    /// strongly convex.
    fn strong_convexity(&self) -> f64;

    /// A minimizer of ⟨g, x⟩ over the set.
    fn lmo(&self, g: &Vector) -> Result<Vector>;

    /// Euclidean projection onto the set.
    fn project(&self, x: &Vector) -> Result<Vector>;

    /// Membership with additive tolerance `tol` on every defining constraint.
    fn contains(&self, x: &Vector, tol: f64) -> bool;

    /// A point drawn uniformly from the set.
    fn sample(&self, rng: &mut dyn RngCore) -> Vector;
}

fn check_input(set: &dyn FeasibleSet, v: &Vector) -> Result<()> {
    v.check_dim(set.dimension())?;
    if !v.is_finite() {
        return Err(Error::contract("non-finite input vector"));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct L2Ball {
    center: Vector,
    radius: f64,
}

impl L2Ball {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::param(format!("ball radius must be > 0, got {radius}")));
        }
        if center.is_empty() || !center.is_finite() {
            return Err(Error::param("ball center must be a non-empty finite vector"));
        }
        Ok(L2Ball { center, radius })
    }

    /// Ball of radius `radius` centered at the origin of R^n.
    pub fn centered(n: usize, radius: f64) -> Result<Self> {
        Self::new(Vector::zeros(n), radius)
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl FeasibleSet for L2Ball {
    fn name(&self) -> &'static str {
        "l2ball"
    }

    fn dimension(&self) -> usize {
        self.center.len()
    }

    fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    fn strong_convexity(&self) -> f64 {
        1.0 / self.radius
    }

    fn lmo(&self, g: &Vector) -> Result<Vector> {
        check_input(self, g)?;
        let norm = g.norm();
        if norm == 0.0 {
            return Ok(self.center.clone());
        }
        let mut v = self.center.clone();
        v.axpy(-self.radius / norm, g);
        Ok(v)
    }

    fn project(&self, x: &Vector) -> Result<Vector> {
        check_input(self, x)?;
        let offset = x.sub(&self.center);
        let dist = offset.norm();
        if dist <= self.radius {
            return Ok(x.clone());
        }
        let mut p = self.center.clone();
        p.axpy(self.radius / dist, &offset);
        Ok(p)
    }

    fn contains(&self, x: &Vector, tol: f64) -> bool {
        x.len() == self.dimension() && x.is_finite() && x.dist(&self.center) <= self.radius + tol
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vector {
        let n = self.dimension();
        let dir = loop {
            let d: Vector = (0..n)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect::<Vec<_>>()
                .into();
            let norm = d.norm();
            if norm > 0.0 {
                break d.scale(1.0 / norm);
            }
        };
        let u: f64 = rng.random();
        let r = self.radius * u.powf(1.0 / n as f64);
        let mut x = self.center.clone();
        x.axpy(r, &dir);
        x
    }
}

/// Axis-aligned box {x : lo ≤ x ≤ hi}.
#[derive(Debug, Clone)]
pub struct Hyperbox {
    lo: Vector,
    hi: Vector,
}

impl Hyperbox {
    pub fn new(lo: Vector, hi: Vector) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::param("box bounds must be non-empty and equal length"));
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::param("box bounds must be finite"));
        }
        if lo.iter().zip(hi.iter()).any(|(l, h)| l >= h) {
            return Err(Error::param("box requires lo_i < hi_i for every coordinate"));
        }
        Ok(Hyperbox { lo, hi })
    }

    /// The cube [lo, hi]^n.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(Vector::filled(n, lo), Vector::filled(n, hi))
    }

    pub fn lo(&self) -> &Vector {
        &self.lo
    }

    pub fn hi(&self) -> &Vector {
        &self.hi
    }
}

impl FeasibleSet for Hyperbox {
    fn name(&self) -> &'static str {
        "box"
    }

    fn dimension(&self) -> usize {
        self.lo.len()
    }

    fn diameter(&self) -> f64 {
        self.hi.dist(&self.lo)
    }

    fn strong_convexity(&self) -> f64 {
        0.0
    }

    fn lmo(&self, g: &Vector) -> Result<Vector> {
        check_input(self, g)?;
        Ok(g.iter()
            .enumerate()
            .map(|(i, &gi)| if gi > 0.0 { self.lo[i] } else { self.hi[i] })
            .collect::<Vec<_>>()
            .into())
    }

    fn project(&self, x: &Vector) -> Result<Vector> {
        check_input(self, x)?;
        Ok(x.iter()
            .enumerate()
            .map(|(i, &xi)| xi.clamp(self.lo[i], self.hi[i]))
            .collect::<Vec<_>>()
            .into())
    }

    fn contains(&self, x: &Vector, tol: f64) -> bool {
        x.len() == self.dimension()
            && x.iter()
                .enumerate()
                .all(|(i, &xi)| xi >= self.lo[i] - tol && xi <= self.hi[i] + tol)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vector {
        (0..self.dimension())
            .map(|i| {
                let u: f64 = rng.random();
                self.lo[i] + u * (self.hi[i] - self.lo[i])
            })
            .collect::<Vec<_>>()
            .into()
    }
}

/// Scaled probability simplex {x ≥ 0 : Σ x_i = scale}.
#[derive(Debug, Clone)]
pub struct Simplex {
    dim: usize,
    scale: f64,
}

impl Simplex {
    pub fn new(dim: usize, scale: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("simplex dimension must be positive"));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::param(format!("simplex scale must be > 0, got {scale}")));
        }
        Ok(Simplex { dim, scale })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl FeasibleSet for Simplex {
    fn name(&self) -> &'static str {
        "simplex"
    }

    fn dimension(&self) -> usize {
        self.dim
    }

    fn diameter(&self) -> f64 {
        self.scale * std::f64::consts::SQRT_2
    }

    fn strong_convexity(&self) -> f64 {
        0.0
    }

    fn lmo(&self, g: &Vector) -> Result<Vector> {
        check_input(self, g)?;
        let mut best = 0;
        for i in 1..self.dim {
            if g[i] < g[best] {
                best = i;
            }
        }
        Ok(Vector::basis(self.dim, best, self.scale))
    }

    fn project(&self, x: &Vector) -> Result<Vector> {
        check_input(self, x)?;
        // Sort descending, find the largest k with u_k - (Σ_{j≤k} u_j - s)/k > 0.
        let mut sorted = x.as_slice().to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut cumsum = 0.0;
        let mut theta = 0.0;
        for (k, &u) in sorted.iter().enumerate() {
            cumsum += u;
            let candidate = (cumsum - self.scale) / (k + 1) as f64;
            if u - candidate > 0.0 {
                theta = candidate;
            }
        }
        Ok(x.iter().map(|&xi| (xi - theta).max(0.0)).collect::<Vec<_>>().into())
    }

    fn contains(&self, x: &Vector, tol: f64) -> bool {
        x.len() == self.dim
            && x.iter().all(|&xi| xi >= -tol)
            && (x.iter().sum::<f64>() - self.scale).abs() <= tol
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vector {
        let e: Vec<f64> = (0..self.dim).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = e.iter().sum();
        e.into_iter()
            .map(|v| self.scale * v / total)
            .collect::<Vec<_>>()
            .into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec())
    }

    #[test]
    fn lmo_examples() {
        let ball = L2Ball::centered(2, 1.0).unwrap();
        assert_eq!(ball.lmo(&v(&[1.0, 0.0])).unwrap(), v(&[-1.0, 0.0]));

        let cube = Hyperbox::cube(2, -1.0, 1.0).unwrap();
        assert_eq!(cube.lmo(&v(&[0.5, -2.0])).unwrap(), v(&[-1.0, 1.0]));

        let simplex = Simplex::new(3, 1.0).unwrap();
        assert_eq!(simplex.lmo(&v(&[3.0, 1.0, 2.0])).unwrap(), v(&[0.0, 1.0, 0.0]));
    }

    #[test]
    fn shifted_ball_lmo_matches_boundary_grid() {
        let ball = L2Ball::new(v(&[1.0, 1.0]), 2.0).unwrap();
        let g = v(&[0.0, -1.0]);
        let got = ball.lmo(&g).unwrap();
        assert!(got.max_abs_diff(&v(&[1.0, 3.0])) < 1e-15);

        // Grid over boundary angles.
        let mut best = (f64::INFINITY, Vector::zeros(2));
        for k in 0..36_000 {
            let a = k as f64 * std::f64::consts::TAU / 36_000.0;
            let p = v(&[1.0 + 2.0 * a.cos(), 1.0 + 2.0 * a.sin()]);
            let val = g.dot(&p);
            if val < best.0 {
                best = (val, p);
            }
        }
        assert!(best.1.max_abs_diff(&got) < 1e-6);
        assert!(g.dot(&got) <= best.0 + 1e-12);
    }

    #[test]
    fn lmo_ties_and_zero_gradient() {
        let ball = L2Ball::new(v(&[0.5, -0.5]), 1.0).unwrap();
        assert_eq!(ball.lmo(&Vector::zeros(2)).unwrap(), v(&[0.5, -0.5]));
        let cube = Hyperbox::new(v(&[0.0, -2.0]), v(&[1.0, 3.0])).unwrap();
        assert_eq!(cube.lmo(&Vector::zeros(2)).unwrap(), v(&[1.0, 3.0]));
        let simplex = Simplex::new(3, 2.0).unwrap();
        assert_eq!(simplex.lmo(&v(&[1.0, 1.0, 1.0])).unwrap(), v(&[2.0, 0.0, 0.0]));
    }

    #[test]
    fn lmo_dimension_mismatch() {
        let ball = L2Ball::centered(3, 1.0).unwrap();
        assert!(matches!(
            ball.lmo(&Vector::zeros(2)),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
        let simplex = Simplex::new(3, 1.0).unwrap();
        assert!(simplex.project(&Vector::zeros(4)).is_err());
    }

    #[test]
    fn projection_examples() {
        let ball = L2Ball::centered(2, 1.0).unwrap();
        assert!(ball.project(&v(&[3.0, 4.0])).unwrap().max_abs_diff(&v(&[0.6, 0.8])) < 1e-15);
        let cube = Hyperbox::cube(2, -1.0, 1.0).unwrap();
        assert_eq!(cube.project(&v(&[2.0, 0.0])).unwrap(), v(&[1.0, 0.0]));
        let simplex = Simplex::new(3, 1.0).unwrap();
        let p = simplex.project(&v(&[0.5, 0.5, 0.5])).unwrap();
        assert!(p.max_abs_diff(&Vector::filled(3, 1.0 / 3.0)) < 1e-15);
    }

    #[test]
    fn simplex_projection_matches_grid() {
        let simplex = Simplex::new(3, 1.0).unwrap();
        let x = v(&[0.5, 0.5, 0.5]);
        let steps = 600;
        let mut best = (f64::INFINITY, Vector::zeros(3));
        for i in 0..=steps {
            for j in 0..=(steps - i) {
                let p = v(&[
                    i as f64 / steps as f64,
                    j as f64 / steps as f64,
                    (steps - i - j) as f64 / steps as f64,
                ]);
                let d = p.dist(&x);
                if d < best.0 {
                    best = (d, p);
                }
            }
        }
        let proj = simplex.project(&x).unwrap();
        assert!(proj.max_abs_diff(&best.1) < 2.0 / steps as f64);
        assert!(proj.dist(&x) <= best.0 + 1e-12);

        // Off-center input with an active nonnegativity constraint.
        let y = v(&[2.0, 0.1, -1.0]);
        let py = simplex.project(&y).unwrap();
        assert!(py.max_abs_diff(&v(&[1.0, 0.0, 0.0])) < 1e-15);
    }

    #[test]
    fn contains_examples() {
        let ball = L2Ball::centered(2, 1.0).unwrap();
        assert!(ball.contains(&v(&[1.0 + 1e-12, 0.0]), 1e-9));
        let unit = Hyperbox::cube(2, 0.0, 1.0).unwrap();
        assert!(!unit.contains(&v(&[1.1, 0.0]), 1e-9));
        let simplex = Simplex::new(3, 1.0).unwrap();
        assert!(simplex.contains(&v(&[0.2, 0.3, 0.5]), 0.0));
        assert!(!simplex.contains(&v(&[0.2, 0.3]), 1.0));
    }

    #[test]
    fn declared_constants() {
        let ball = L2Ball::centered(4, 2.0).unwrap();
        assert_eq!(ball.diameter(), 4.0);
        assert_eq!(ball.strong_convexity(), 0.5);
        let cube = Hyperbox::cube(4, -1.0, 1.0).unwrap();
        assert_eq!(cube.diameter(), 4.0);
        assert_eq!(cube.strong_convexity(), 0.0);
        let simplex = Simplex::new(5, 3.0).unwrap();
        assert!((simplex.diameter() - 3.0 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn constructor_errors() {
        assert!(L2Ball::centered(2, 0.0).is_err());
        assert!(Hyperbox::new(v(&[0.0, 1.0]), v(&[1.0, 1.0])).is_err());
        assert!(Simplex::new(0, 1.0).is_err());
        assert!(Simplex::new(2, -1.0).is_err());
    }

    #[test]
    fn samples_are_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sets: Vec<Box<dyn FeasibleSet>> = vec![
            Box::new(L2Ball::new(v(&[1.0, -2.0, 0.5]), 0.7).unwrap()),
            Box::new(Hyperbox::new(v(&[0.0, -1.0, 2.0]), v(&[1.0, 1.0, 5.0])).unwrap()),
            Box::new(Simplex::new(3, 2.5).unwrap()),
        ];
        for set in &sets {
            for _ in 0..500 {
                let x = set.sample(&mut rng);
                assert!(set.contains(&x, 1e-12), "{} sample {:?}", set.name(), x);
            }
        }
    }
}
