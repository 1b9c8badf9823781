//! Closed-form line searches and step-size rules.
//!
//! Both line-search objectives are one-dimensional convex quadratics
//! σ ↦ σ·⟨dir, dF⟩ + c·σ²‖dir‖² on [0, 1], so the clamped vertex is exact.

use crate::error::{Error, Result};
use crate::vector::Vector;

fn clamped_vertex(dir: &Vector, grad: &Vector, curvature: f64) -> f64 {
    let dir_sq = dir.norm_sq();
    if dir_sq == 0.0 {
        return 0.0;
    }
    let sigma = -dir.dot(grad) / (2.0 * curvature * dir_sq);
    sigma.clamp(0.0, 1.0)
}

/// argmin over σ ∈ [0,1] of ⟨σ·dir, dF⟩ + σ²‖dir‖².
pub fn line_search_convex(grad: &Vector, dir: &Vector) -> f64 {
    clamped_vertex(dir, grad, 1.0)
}

/// argmin over σ ∈ [0,1] of ⟨σ·dir, dF⟩ + (β·τ·σ²/2)‖dir‖².
pub fn line_search_sc(grad: &Vector, dir: &Vector, beta: f64, tau: usize) -> f64 {
    clamped_vertex(dir, grad, 0.5 * beta * tau as f64)
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::param(format!("{name} must be positive, got {value}")));
    }
    Ok(())
}

/// η = D / (√2 · G · (T+2)^{3/4}), the general-set tuning.
pub fn eta_general(diameter: f64, grad_bound: f64, horizon: usize) -> Result<f64> {
    check_positive("diameter", diameter)?;
    check_positive("gradient bound", grad_bound)?;
    if horizon == 0 {
        return Err(Error::param("horizon must be >= 1"));
    }
    let t = (horizon + 2) as f64;
    Ok(diameter / (std::f64::consts::SQRT_2 * grad_bound * t.powf(0.75)))
}

/// η = D / (2 · G · (T+2)^{2/3}), the strongly-convex-set tuning.
pub fn eta_strongly_convex_set(diameter: f64, grad_bound: f64, horizon: usize) -> Result<f64> {
    check_positive("diameter", diameter)?;
    check_positive("gradient bound", grad_bound)?;
    if horizon == 0 {
        return Err(Error::param("horizon must be >= 1"));
    }
    let t = (horizon + 2) as f64;
    Ok(diameter / (2.0 * grad_bound * t.powf(2.0 / 3.0)))
}

/// Delayed OGD baseline step D / (G·√T).
pub fn ogd_step(diameter: f64, grad_bound: f64, horizon: usize) -> Result<f64> {
    check_positive("diameter", diameter)?;
    check_positive("gradient bound", grad_bound)?;
    if horizon == 0 {
        return Err(Error::param("horizon must be >= 1"));
    }
    Ok(diameter / (grad_bound * (horizon as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec())
    }

    /// Grid over σ ∈ {0, 1e-4, …, 1}.
    fn grid(grad: &Vector, dir: &Vector, curvature: f64) -> f64 {
        let (a, c) = (dir.dot(grad), curvature * dir.norm_sq());
        (0..=10_000)
            .map(|i| i as f64 * 1e-4)
            .min_by(|x, y| (a * x + c * x * x).total_cmp(&(a * y + c * y * y)))
            .unwrap()
    }

    #[test]
    fn convex_examples() {
        let s = line_search_convex(&v(&[2.0, 0.0]), &v(&[-1.0, 0.0]));
        assert_eq!(s, 1.0);
        assert_eq!(grid(&v(&[2.0, 0.0]), &v(&[-1.0, 0.0]), 1.0), 1.0);

        let s = line_search_convex(&v(&[1.0, 0.0]), &v(&[-1.0, 0.0]));
        assert_eq!(s, 0.5);
        assert!((grid(&v(&[1.0, 0.0]), &v(&[-1.0, 0.0]), 1.0) - 0.5).abs() < 1e-12);

        assert_eq!(line_search_convex(&v(&[0.0, 1.0]), &v(&[1.0, 0.0])), 0.0);
        assert_eq!(line_search_convex(&v(&[1.0, 1.0]), &Vector::zeros(2)), 0.0);
    }

    #[test]
    fn strongly_convex_examples() {
        let g = v(&[1.0, 0.0]);
        let d = v(&[-1.0, 0.0]);
        assert_eq!(line_search_sc(&g, &d, 1.0, 2), 0.5);
        assert!((grid(&g, &d, 1.0) - 0.5).abs() < 1e-12);
        assert_eq!(line_search_sc(&g, &d, 1.0, 1), 1.0);
        assert!((grid(&g, &d, 0.5) - 1.0).abs() < 1e-12);
        assert_eq!(line_search_sc(&g, &v(&[1.0, 0.0]), 1.0, 3), 0.0);
        assert_eq!(line_search_sc(&g, &Vector::zeros(2), 1.0, 3), 0.0);
    }

    #[test]
    fn eta_examples() {
        let e = eta_general(2.0, 1.0, 14).unwrap();
        assert!((e - 2.0 / (2f64.sqrt() * 8.0)).abs() < 1e-15);
        assert!((e - 0.176_776_695_296_636_9).abs() < 1e-12);
        let e = eta_strongly_convex_set(2.0, 1.0, 6).unwrap();
        assert!((e - 0.25).abs() < 1e-15);
    }

    #[test]
    fn eta_scaling() {
        let base = eta_general(1.0, 1.0, 100).unwrap();
        assert!((eta_general(2.0, 1.0, 100).unwrap() - 2.0 * base).abs() < 1e-15);
        let sc = eta_strongly_convex_set(1.0, 1.0, 100).unwrap();
        assert!((eta_strongly_convex_set(1.0, 2.0, 100).unwrap() - 0.5 * sc).abs() < 1e-15);
        assert!(eta_general(1.0, 1.0, 1_000_000).unwrap() < 1e-4);
    }

    #[test]
    fn eta_rules_compared_numerically() {
        // The 2/3 rule is smaller exactly when 2(T+2)^{2/3} > √2 (T+2)^{3/4}.
        for t in [1usize, 10, 100, 1_000, 100_000] {
            let general = eta_general(1.0, 1.0, t).unwrap();
            let sc_set = eta_strongly_convex_set(1.0, 1.0, t).unwrap();
            let tt = (t + 2) as f64;
            let predicate = 2.0 * tt.powf(2.0 / 3.0) > 2f64.sqrt() * tt.powf(0.75);
            assert_eq!(sc_set < general, predicate, "T = {t}");
        }
    }

    #[test]
    fn eta_rejects_bad_input() {
        assert!(eta_general(0.0, 1.0, 5).is_err());
        assert!(eta_general(1.0, -1.0, 5).is_err());
        assert!(eta_strongly_convex_set(1.0, 1.0, 0).is_err());
        assert!(ogd_step(1.0, 0.0, 5).is_err());
    }
}
