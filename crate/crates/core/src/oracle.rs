//! Independent ground truth for tests, acceptance checks and `gapcheck`.
//!
//! Nothing here calls into the solvers. The exact surrogate minimizers rely
//! on both surrogates having an isotropic Hessian (2·I for the convex one,
//! βτ·I for the strongly convex one): only then is the constrained minimizer
//! the projection of the unconstrained vertex. A surrogate with any other
//! Hessian needs a real solver.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::losses::{LossStream, LossStructure};
use crate::solvers::SurrogateSnapshot;
use crate::vector::Vector;

/// Tolerance on the Frank-Wolfe duality gap for the offline comparator.
pub const COMPARATOR_GAP_TOL: f64 = 1e-8;
/// Iteration cap for the offline Frank-Wolfe comparator.
pub const COMPARATOR_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparatorMethod {
    ClosedFormLinear,
    ClosedFormQuadratic,
    OfflineFw,
}

#[derive(Debug, Clone)]
pub struct ComparatorResult {
    pub x_star: Vector,
    /// Σ_t f_t(x_star)
    pub offline_total: f64,
    pub method: ComparatorMethod,
    /// Upper bound on offline_total − min; zero for closed forms.
    pub certified_gap: f64,
    /// False when offline FW hit the iteration cap above tolerance.
    pub converged: bool,
}

/// argmin over the set of η⟨ḡ, y⟩ + ‖y − y_1‖².
pub fn exact_surrogate_min_convex(
    set: &dyn FeasibleSet,
    gbar: &Vector,
    y1: &Vector,
    eta: f64,
) -> Result<Vector> {
    let mut vertex = y1.clone();
    vertex.axpy(-0.5 * eta, gbar);
    set.project(&vertex)
}

/// argmin over the set of ⟨ḡ, y⟩ + Σ_{i≤τ} (β/2)‖y − y_i‖², given Σ y_i.
pub fn exact_surrogate_min_sc(
    set: &dyn FeasibleSet,
    gbar: &Vector,
    ysum: &Vector,
    tau: usize,
    beta: f64,
) -> Result<Vector> {
    if tau == 0 || beta.is_nan() || beta <= 0.0 {
        return Err(Error::param("strongly convex surrogate needs tau >= 1 and beta > 0"));
    }
    let count = tau as f64;
    let mut vertex = ysum.scale(1.0 / count);
    vertex.axpy(-1.0 / (beta * count), gbar);
    set.project(&vertex)
}

/// 8D²/√(τ+2)
pub fn convex_gap_bound(diameter: f64, tau: usize) -> f64 {
    8.0 * diameter * diameter / ((tau + 2) as f64).sqrt()
}

/// 16(G + 2βD)²(τ−1)^{1/3}/β, meaningful for τ ≥ 2.
pub fn sc_gap_bound(grad_bound: f64, beta: f64, diameter: f64, tau: usize) -> f64 {
    let c = grad_bound + 2.0 * beta * diameter;
    16.0 * c * c * ((tau - 1) as f64).cbrt() / beta
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    pub tau: usize,
    /// F_{τ−1}(y_τ) − F_{τ−1}(y*_τ)
    pub gap: f64,
    pub bound: f64,
}

impl GapReport {
    pub fn holds(&self) -> bool {
        self.gap <= self.bound
    }
}

/// Suboptimality of the learner's current point on the surrogate built from
/// the gradients it has ingested, against the matching bound. `None` for the
/// strongly convex surrogate at τ = 1, where no bound is stated.
pub fn surrogate_gap(
    set: &dyn FeasibleSet,
    snapshot: SurrogateSnapshot<'_>,
    grad_bound: f64,
) -> Result<Option<GapReport>> {
    let diameter = set.diameter();
    match snapshot {
        SurrogateSnapshot::Convex {
            y,
            y1,
            gbar,
            eta,
            tau,
        } => {
            let y_star = exact_surrogate_min_convex(set, gbar, y1, eta)?;
            let value = |p: &Vector| eta * gbar.dot(p) + p.sub(y1).norm_sq();
            Ok(Some(GapReport {
                tau,
                gap: value(y) - value(&y_star),
                bound: convex_gap_bound(diameter, tau),
            }))
        }
        SurrogateSnapshot::StronglyConvex {
            y,
            gbar,
            ysum,
            beta,
            tau,
        } => {
            if tau < 2 {
                return Ok(None);
            }
            // F_{τ−1} regularizes toward y_1..y_{τ−1}, excluding the current point.
            let prev = ysum.sub(y);
            let count = (tau - 1) as f64;
            let y_star = exact_surrogate_min_sc(set, gbar, &prev, tau - 1, beta)?;
            let diff = y.sub(&y_star);
            let gap = gbar.dot(&diff)
                + 0.5 * beta * (count * (y.norm_sq() - y_star.norm_sq()) - 2.0 * diff.dot(&prev));
            Ok(Some(GapReport {
                tau,
                gap,
                bound: sc_gap_bound(grad_bound, beta, diameter, tau),
            }))
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum ReferenceKind {
    Convex { eta: f64 },
    StronglyConvex { beta: f64 },
}

/// Textbook online Frank-Wolfe without delays.
///
/// Each step rebuilds the surrogate gradient from the full history of
/// gradients and decisions, so a step costs O(t·n).
#[derive(Debug, Clone)]
pub struct ReferenceOfw {
    set: Arc<dyn FeasibleSet>,
    kind: ReferenceKind,
    decisions: Vec<Vector>,
    gradients: Vec<Vector>,
}

impl ReferenceOfw {
    pub fn convex(set: Arc<dyn FeasibleSet>, x1: Vector, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::param("reference OFW needs eta > 0"));
        }
        Self::with_kind(set, x1, ReferenceKind::Convex { eta })
    }

    pub fn strongly_convex(set: Arc<dyn FeasibleSet>, x1: Vector, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::param("reference OFW needs beta > 0"));
        }
        Self::with_kind(set, x1, ReferenceKind::StronglyConvex { beta })
    }

    fn with_kind(set: Arc<dyn FeasibleSet>, x1: Vector, kind: ReferenceKind) -> Result<Self> {
        x1.check_dim(set.dimension())?;
        if !set.contains(&x1, crate::geometry::MEMBERSHIP_TOL) {
            return Err(Error::param("reference OFW start point is infeasible"));
        }
        Ok(ReferenceOfw {
            set,
            kind,
            decisions: vec![x1],
            gradients: Vec::new(),
        })
    }

    pub fn current(&self) -> &Vector {
        self.decisions.last().expect("trajectory is never empty")
    }

    pub fn rounds(&self) -> usize {
        self.gradients.len()
    }

    /// x_1, …, x_{t+1}
    pub fn trajectory(&self) -> &[Vector] {
        &self.decisions
    }

    /// Consume ∇f_t(x_t) and produce x_{t+1}.
    pub fn step(&mut self, g: &Vector) -> Result<()> {
        g.check_dim(self.set.dimension())?;
        self.gradients.push(g.clone());
        let t = self.gradients.len();
        let n = g.len();
        let x = self.current().clone();
        let x1 = &self.decisions[0];

        let mut gsum = vec![0.0; n];
        for gi in &self.gradients {
            for (s, v) in gsum.iter_mut().zip(gi.iter()) {
                *s += v;
            }
        }

        let grad: Vector = match self.kind {
            ReferenceKind::Convex { eta } => (0..n)
                .map(|i| eta * gsum[i] + 2.0 * (x[i] - x1[i]))
                .collect::<Vec<_>>()
                .into(),
            ReferenceKind::StronglyConvex { beta } => {
                let mut xsum = vec![0.0; n];
                for xi in &self.decisions {
                    for (s, v) in xsum.iter_mut().zip(xi.iter()) {
                        *s += v;
                    }
                }
                (0..n)
                    .map(|i| gsum[i] + beta * (t as f64 * x[i] - xsum[i]))
                    .collect::<Vec<_>>()
                    .into()
            }
        };

        let v = self.set.lmo(&grad)?;
        let d: Vec<f64> = (0..n).map(|i| v[i] - x[i]).collect();
        let d_sq: f64 = d.iter().map(|di| di * di).sum();
        let slope: f64 = d.iter().zip(grad.iter()).map(|(di, gi)| di * gi).sum();
        let sigma = if d_sq == 0.0 {
            0.0
        } else {
            let denom = match self.kind {
                ReferenceKind::Convex { .. } => 2.0 * d_sq,
                ReferenceKind::StronglyConvex { beta } => beta * t as f64 * d_sq,
            };
            (-slope / denom).clamp(0.0, 1.0)
        };
        let next: Vector = (0..n).map(|i| x[i] + sigma * d[i]).collect::<Vec<_>>().into();
        self.decisions.push(next);
        Ok(())
    }
}

/// Non-delayed OFW trajectory x_1..x_{T+1} on a fixed gradient sequence.
pub fn reference_ofw_convex(
    set: Arc<dyn FeasibleSet>,
    x1: Vector,
    gradients: &[Vector],
    eta: f64,
) -> Result<Vec<Vector>> {
    let mut r = ReferenceOfw::convex(set, x1, eta)?;
    for g in gradients {
        r.step(g)?;
    }
    Ok(r.decisions)
}

/// Strongly convex counterpart of [`reference_ofw_convex`].
pub fn reference_ofw_sc(
    set: Arc<dyn FeasibleSet>,
    x1: Vector,
    gradients: &[Vector],
    beta: f64,
) -> Result<Vec<Vector>> {
    let mut r = ReferenceOfw::strongly_convex(set, x1, beta)?;
    for g in gradients {
        r.step(g)?;
    }
    Ok(r.decisions)
}

/// Brute-force argmin over σ ∈ {0, 1e-4, …, 1} of
/// ⟨σ·dir, dF⟩ + curvature·σ²‖dir‖². Ties go to the smallest σ.
pub fn grid_line_search(grad: &Vector, dir: &Vector, curvature: f64) -> f64 {
    let slope = dir.dot(grad);
    let quad = curvature * dir.norm_sq();
    let mut best = (0.0, 0.0);
    for i in 1..=10_000 {
        let s = i as f64 * 1e-4;
        let val = slope * s + quad * s * s;
        if val < best.1 {
            best = (s, val);
        }
    }
    best.0
}

fn total_value(stream: &dyn LossStream, x: &Vector) -> Result<f64> {
    (1..=stream.horizon()).map(|t| stream.value(t, x)).sum()
}

fn total_gradient(stream: &dyn LossStream, x: &Vector) -> Result<Vector> {
    let mut acc = Vector::zeros(x.len());
    for t in 1..=stream.horizon() {
        acc.add_assign(&stream.gradient(t, x)?);
    }
    Ok(acc)
}

/// min over the set of Σ_t f_t(x), in closed form when the stream allows.
pub fn offline_comparator(set: &dyn FeasibleSet, stream: &dyn LossStream) -> Result<ComparatorResult> {
    if set.dimension() != stream.dimension() {
        return Err(Error::DimensionMismatch {
            expected: set.dimension(),
            got: stream.dimension(),
        });
    }
    let (x_star, method) = match stream.structure() {
        LossStructure::Linear { gradients } => {
            let mut total = Vector::zeros(set.dimension());
            gradients.iter().for_each(|g| total.add_assign(g));
            (set.lmo(&total)?, ComparatorMethod::ClosedFormLinear)
        }
        // Σ (β/2)‖x − θ_t‖² = (Tβ/2)‖x − θ̄‖² + const.
        LossStructure::Quadratic { targets, .. } => {
            let mut mean = Vector::zeros(set.dimension());
            targets.iter().for_each(|th| mean.add_assign(th));
            let mean = mean.scale(1.0 / targets.len() as f64);
            (set.project(&mean)?, ComparatorMethod::ClosedFormQuadratic)
        }
        LossStructure::Opaque => {
            return offline_frank_wolfe(set, stream, COMPARATOR_MAX_ITER, COMPARATOR_GAP_TOL)
        }
    };
    Ok(ComparatorResult {
        offline_total: total_value(stream, &x_star)?,
        x_star,
        method,
        certified_gap: 0.0,
        converged: true,
    })
}

/// Offline Frank-Wolfe on Σ_t f_t, stopped once the duality gap drops to
/// `gap_tol`.
///
/// The step is the secant minimizer along the FW direction, exact for
/// quadratic objectives; if it fails to decrease the objective the standard
/// 2/(k+2) step is used instead.
pub fn offline_frank_wolfe(
    set: &dyn FeasibleSet,
    stream: &dyn LossStream,
    max_iter: usize,
    gap_tol: f64,
) -> Result<ComparatorResult> {
    let mut x = set.lmo(&Vector::zeros(set.dimension()))?;
    let mut value = total_value(stream, &x)?;
    let mut gap = f64::INFINITY;
    for k in 0..max_iter {
        let grad = total_gradient(stream, &x)?;
        let v = set.lmo(&grad)?;
        let dir = v.sub(&x);
        gap = (-grad.dot(&dir)).max(0.0);
        if gap <= gap_tol {
            break;
        }
        let at_vertex = total_gradient(stream, &v)?;
        let curvature = at_vertex.sub(&grad).dot(&dir);
        let secant = if curvature > 0.0 {
            (gap / curvature).min(1.0)
        } else {
            1.0
        };
        // Rounding in Σ_t f_t can make an exact step look like a slight increase.
        let slack = 1e-12 * value.abs().max(1.0);
        let mut candidate = x.clone();
        candidate.axpy(secant, &dir);
        let mut cand_value = total_value(stream, &candidate)?;
        if cand_value > value + slack {
            let fallback = 2.0 / (k as f64 + 2.0);
            candidate = x.clone();
            candidate.axpy(fallback, &dir);
            cand_value = total_value(stream, &candidate)?;
        }
        x = candidate;
        value = cand_value;
    }
    let converged = gap <= gap_tol;
    if !converged {
        // Recompute the gap at the returned point.
        let grad = total_gradient(stream, &x)?;
        let v = set.lmo(&grad)?;
        gap = (-grad.dot(&v.sub(&x))).max(0.0);
    }
    Ok(ComparatorResult {
        x_star: x,
        offline_total: value,
        method: ComparatorMethod::OfflineFw,
        certified_gap: gap,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Hyperbox, L2Ball};
    use crate::losses::{LinearStream, QuadraticStream};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec())
    }

    #[test]
    fn convex_min_examples() {
        let cube = Hyperbox::cube(2, -1.0, 1.0).unwrap();
        let y1 = v(&[0.3, -0.2]);
        assert_eq!(exact_surrogate_min_convex(&cube, &Vector::zeros(2), &y1, 1.0).unwrap(), y1);

        let got = exact_surrogate_min_convex(&cube, &v(&[3.0, 0.0]), &Vector::zeros(2), 2.0).unwrap();
        assert_eq!(got, v(&[-1.0, 0.0]));
        // Grid over the box.
        let f = |y: &Vector| 2.0 * 3.0 * y[0] + y.norm_sq();
        let mut best = (f64::INFINITY, Vector::zeros(2));
        for i in 0..=400 {
            for j in 0..=400 {
                let p = v(&[-1.0 + i as f64 / 200.0, -1.0 + j as f64 / 200.0]);
                if f(&p) < best.0 {
                    best = (f(&p), p);
                }
            }
        }
        assert!(best.1.max_abs_diff(&got) < 1e-2);
        assert!(f(&got) <= best.0 + 1e-12);

        let inside = exact_surrogate_min_convex(&cube, &v(&[0.2, 0.2]), &Vector::zeros(2), 1.0).unwrap();
        assert_eq!(inside, v(&[-0.1, -0.1]));
    }

    #[test]
    fn sc_min_examples() {
        let ball = L2Ball::centered(2, 3.0).unwrap();
        let c = v(&[0.5, 1.0]);
        let got = exact_surrogate_min_sc(&ball, &Vector::zeros(2), &c.scale(4.0), 4, 2.0).unwrap();
        assert!(got.max_abs_diff(&c) < 1e-15);

        let got = exact_surrogate_min_sc(&ball, &v(&[2.0, 0.0]), &v(&[2.0, 0.0]), 2, 1.0).unwrap();
        assert_eq!(got, Vector::zeros(2));
        // Stationarity by finite differences: F(y) = ⟨ḡ,y⟩ + ½(‖y−y1‖² + ‖y−y2‖²) with y1+y2 = (2,0).
        let f = |y: &Vector| 2.0 * y[0] + 0.5 * (y.sub(&v(&[2.0, 0.0])).norm_sq() + y.norm_sq());
        for i in 0..2 {
            let mut p = got.clone();
            let mut m = got.clone();
            p[i] += 1e-6;
            m[i] -= 1e-6;
            assert!(((f(&p) - f(&m)) / 2e-6).abs() < 1e-6);
        }
    }

    #[test]
    fn sc_min_outside_ball_matches_grid() {
        let ball = L2Ball::centered(2, 1.0).unwrap();
        let (gbar, ysum, tau, beta) = (v(&[-6.0, -2.0]), v(&[0.5, 0.2]), 2, 1.5);
        let got = exact_surrogate_min_sc(&ball, &gbar, &ysum, tau, beta).unwrap();
        assert!((got.norm() - 1.0).abs() < 1e-12);
        // F up to a constant: ⟨ḡ,y⟩ + (βτ/2)‖y‖² − β⟨y, Σy_i⟩.
        let f = |y: &Vector| gbar.dot(y) + 0.5 * beta * tau as f64 * y.norm_sq() - beta * y.dot(&ysum);
        let mut best = (f64::INFINITY, Vector::zeros(2));
        for i in 0..=600 {
            for j in 0..=600 {
                let p = v(&[-1.0 + i as f64 / 300.0, -1.0 + j as f64 / 300.0]);
                if p.norm() <= 1.0 && f(&p) < best.0 {
                    best = (f(&p), p);
                }
            }
        }
        assert!(best.1.max_abs_diff(&got) < 2e-2);
        assert!(f(&got) <= best.0 + 1e-12);
    }

    #[test]
    fn exact_minimizers_first_order_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sets: Vec<Box<dyn FeasibleSet>> = vec![
            Box::new(Hyperbox::cube(3, -1.0, 1.0).unwrap()),
            Box::new(L2Ball::centered(3, 1.0).unwrap()),
            Box::new(crate::geometry::Simplex::new(3, 1.0).unwrap()),
        ];
        for set in &sets {
            let gbar: Vector = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect::<Vec<_>>().into();
            let y1 = set.sample(&mut rng);
            let eta = 0.7;
            let ys = exact_surrogate_min_convex(set.as_ref(), &gbar, &y1, eta).unwrap();
            let grad = gbar.scale(eta).add(&ys.sub(&y1).scale(2.0));
            for _ in 0..100 {
                let x = set.sample(&mut rng);
                assert!(grad.dot(&x.sub(&ys)) >= -1e-6);
            }

            let ysum = set.sample(&mut rng).add(&set.sample(&mut rng));
            let ys = exact_surrogate_min_sc(set.as_ref(), &gbar, &ysum, 2, 1.3).unwrap();
            let grad = gbar.add(&ys.scale(2.0).sub(&ysum).scale(1.3));
            for _ in 0..100 {
                let x = set.sample(&mut rng);
                assert!(grad.dot(&x.sub(&ys)) >= -1e-6);
            }
        }
    }

    #[test]
    fn reference_trajectory_basics() {
        let set: Arc<dyn FeasibleSet> = Arc::new(L2Ball::centered(2, 1.0).unwrap());
        let traj = reference_ofw_convex(set.clone(), Vector::zeros(2), &[], 0.1).unwrap();
        assert_eq!(traj, vec![Vector::zeros(2)]);
        // One step: ∇F = η g, v = −g/‖g‖, σ = η‖g‖/2 from the clamped vertex.
        let traj = reference_ofw_convex(set, Vector::zeros(2), &[v(&[1.0, 0.0])], 0.5).unwrap();
        assert_eq!(traj.len(), 2);
        assert!(traj[1].max_abs_diff(&v(&[-0.25, 0.0])) < 1e-15);
    }

    #[test]
    fn grid_line_search_examples() {
        assert_eq!(grid_line_search(&v(&[1.0]), &Vector::zeros(1), 1.0), 0.0);
        assert_eq!(grid_line_search(&v(&[1.0]), &v(&[1.0]), 1.0), 0.0);
        assert!((grid_line_search(&v(&[1.0]), &v(&[-1.0]), 1.0) - 0.5).abs() < 1e-12);
        assert_eq!(grid_line_search(&v(&[5.0]), &v(&[-1.0]), 1.0), 1.0);
    }

    #[test]
    fn comparator_aligned_linear() {
        let ball = L2Ball::centered(2, 1.0).unwrap();
        let stream = LinearStream::from_gradients(vec![v(&[1.0, 0.0]); 7]).unwrap();
        let c = offline_comparator(&ball, &stream).unwrap();
        assert_eq!(c.method, ComparatorMethod::ClosedFormLinear);
        assert_eq!(c.x_star, v(&[-1.0, 0.0]));
        assert_eq!(c.offline_total, -7.0);
    }

    #[test]
    fn comparator_constant_quadratic() {
        let ball = L2Ball::centered(2, 1.0).unwrap();
        let theta = v(&[0.2, -0.3]);
        let stream = QuadraticStream::from_targets(vec![theta.clone(); 5], 1.0, 2.0).unwrap();
        let c = offline_comparator(&ball, &stream).unwrap();
        assert_eq!(c.method, ComparatorMethod::ClosedFormQuadratic);
        assert!(c.x_star.max_abs_diff(&theta) < 1e-15);
        assert!(c.offline_total.abs() < 1e-28);
    }

    #[test]
    fn offline_fw_agrees_with_closed_form() {
        let cube = Hyperbox::cube(3, -1.0, 1.0).unwrap();
        let stream = QuadraticStream::random(&cube, 50, 1.0, 8).unwrap();
        let closed = offline_comparator(&cube, &stream).unwrap();
        let fw = offline_frank_wolfe(&cube, &stream, COMPARATOR_MAX_ITER, COMPARATOR_GAP_TOL).unwrap();
        assert!(fw.converged);
        assert!(fw.certified_gap <= COMPARATOR_GAP_TOL);
        assert!((fw.offline_total - closed.offline_total).abs() <= 1e-6);
    }

    #[test]
    fn gap_bound_formulas() {
        assert!((convex_gap_bound(1.0, 2) - 4.0).abs() < 1e-15);
        assert!((sc_gap_bound(1.0, 1.0, 1.0, 9) - 16.0 * 9.0 * 2.0).abs() < 1e-12);
    }
}
