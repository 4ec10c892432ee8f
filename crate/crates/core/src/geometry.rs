//! Closed convex feasible sets and their oracles.
//!
//! Every set answers three questions exactly: Euclidean projection, linear
//! minimization (the support oracle used to certify the UMD variational
//! condition and to compute regret comparators), and distance-based
//! membership.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{check_dim, Result, UmdError};
use crate::linalg::Vector;
use crate::math;

/// Closed, convex, nonempty subset of `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSet {
    FullSpace(usize),
    EuclideanBall { center: Vector, radius: f64 },
    /// Probability simplex `{x >= 0, sum x = 1}` in `R^n`.
    Simplex(usize),
    Box { lower: Vector, upper: Vector },
    /// Line segment between two points; the 2-D case `[0,1] x {0}` is the
    /// classic example where the admissible dual set is a half-plane strip.
    Segment { start: Vector, end: Vector },
    /// Cartesian product of sets, coordinates concatenated in order.
    Product(Vec<ConstraintSet>),
}

/// Result of a linear-minimization query.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    pub value: f64,
    pub witness: Vector,
}

impl ConstraintSet {
    pub fn full_space(n: usize) -> Self {
        ConstraintSet::FullSpace(n)
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(UmdError::Argument(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        if !center.is_finite() {
            return Err(UmdError::Argument("ball center must be finite".into()));
        }
        Ok(ConstraintSet::EuclideanBall { center, radius })
    }

    /// Ball of radius `radius` centered at the origin of `R^n`.
    pub fn centered_ball(n: usize, radius: f64) -> Result<Self> {
        Self::ball(Vector::zeros(n), radius)
    }

    pub fn simplex(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(UmdError::Argument("simplex dimension must be >= 1".into()));
        }
        Ok(ConstraintSet::Simplex(n))
    }

    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if !lower.is_finite() || !upper.is_finite() {
            return Err(UmdError::Argument("box bounds must be finite".into()));
        }
        if let Some(i) = (0..lower.len()).find(|&i| lower[i] > upper[i]) {
            return Err(UmdError::Argument(format!(
                "box lower bound exceeds upper bound at coordinate {i}"
            )));
        }
        Ok(ConstraintSet::Box { lower, upper })
    }

    pub fn segment(start: Vector, end: Vector) -> Result<Self> {
        check_dim(start.len(), end.len())?;
        if !start.is_finite() || !end.is_finite() {
            return Err(UmdError::Argument("segment endpoints must be finite".into()));
        }
        Ok(ConstraintSet::Segment { start, end })
    }

    /// Segment between two points of the plane.
    pub fn segment_2d(start: [f64; 2], end: [f64; 2]) -> Result<Self> {
        Self::segment(Vector::from_slice(&start), Vector::from_slice(&end))
    }

    pub fn product(parts: Vec<ConstraintSet>) -> Result<Self> {
        if parts.is_empty() {
            return Err(UmdError::Argument("product of zero sets".into()));
        }
        Ok(ConstraintSet::Product(parts))
    }

    pub fn dim(&self) -> usize {
        match self {
            ConstraintSet::FullSpace(n) | ConstraintSet::Simplex(n) => *n,
            ConstraintSet::EuclideanBall { center, .. } => center.len(),
            ConstraintSet::Box { lower, .. } => lower.len(),
            ConstraintSet::Segment { start, .. } => start.len(),
            ConstraintSet::Product(parts) => parts.iter().map(|p| p.dim()).sum(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            ConstraintSet::FullSpace(n) => format!("full-space({n})"),
            ConstraintSet::EuclideanBall { radius, .. } => {
                format!("ball({}, r={radius})", self.dim())
            }
            ConstraintSet::Simplex(n) => format!("simplex({n})"),
            ConstraintSet::Box { .. } => format!("box({})", self.dim()),
            ConstraintSet::Segment { .. } => format!("segment({})", self.dim()),
            ConstraintSet::Product(parts) => {
                let names: Vec<String> = parts.iter().map(|p| p.name()).collect();
                names.join(" x ")
            }
        }
    }

    pub fn is_compact(&self) -> bool {
        match self {
            ConstraintSet::FullSpace(_) => false,
            ConstraintSet::Product(parts) => parts.iter().all(|p| p.is_compact()),
            _ => true,
        }
    }

    fn part_dims(parts: &[ConstraintSet]) -> Vec<usize> {
        parts.iter().map(|p| p.dim()).collect()
    }

    /// Minimizes `<g, x>` over the set.
    pub fn support_min(&self, g: &Vector) -> Result<Support> {
        check_dim(self.dim(), g.len())?;
        match self {
            ConstraintSet::FullSpace(n) => {
                if g.iter().all(|v| *v == 0.0) {
                    Ok(Support {
                        value: 0.0,
                        witness: Vector::zeros(*n),
                    })
                } else {
                    Err(UmdError::Unbounded(self.name()))
                }
            }
            ConstraintSet::EuclideanBall { center, radius } => {
                let ng = g.norm2();
                if ng == 0.0 {
                    return Ok(Support {
                        value: 0.0,
                        witness: center.clone(),
                    });
                }
                Ok(Support {
                    value: g.dot(center) - radius * ng,
                    witness: center.axpy(-radius / ng, g),
                })
            }
            ConstraintSet::Simplex(n) => {
                let mut best = 0;
                for i in 1..*n {
                    if g[i] < g[best] {
                        best = i;
                    }
                }
                Ok(Support {
                    value: g[best],
                    witness: Vector::basis(*n, best),
                })
            }
            ConstraintSet::Box { lower, upper } => {
                let witness: Vec<f64> = (0..g.len())
                    .map(|i| if g[i] >= 0.0 { lower[i] } else { upper[i] })
                    .collect();
                let witness = Vector::from_vec(witness);
                Ok(Support {
                    value: g.dot(&witness),
                    witness,
                })
            }
            ConstraintSet::Segment { start, end } => {
                let (a, b) = (g.dot(start), g.dot(end));
                if b < a {
                    Ok(Support {
                        value: b,
                        witness: end.clone(),
                    })
                } else {
                    Ok(Support {
                        value: a,
                        witness: start.clone(),
                    })
                }
            }
            ConstraintSet::Product(parts) => {
                let blocks = g.split(&Self::part_dims(parts));
                let mut value = 0.0;
                let mut witness = Vec::with_capacity(parts.len());
                for (p, gb) in parts.iter().zip(&blocks) {
                    let s = p.support_min(gb)?;
                    value += s.value;
                    witness.push(s.witness);
                }
                Ok(Support {
                    value,
                    witness: Vector::concat(&witness),
                })
            }
        }
    }

    /// Euclidean projection `argmin_{x in X} ||x - y||_2`.
    pub fn project(&self, y: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), y.len());
        match self {
            ConstraintSet::FullSpace(_) => y.clone(),
            ConstraintSet::EuclideanBall { center, radius } => {
                let d = y - center;
                let nd = d.norm2();
                if nd <= *radius {
                    y.clone()
                } else {
                    center.axpy(radius / nd, &d)
                }
            }
            ConstraintSet::Simplex(_) => project_simplex(y),
            ConstraintSet::Box { lower, upper } => Vector::from_vec(
                (0..y.len())
                    .map(|i| y[i].clamp(lower[i], upper[i]))
                    .collect(),
            ),
            ConstraintSet::Segment { start, end } => {
                let dir = end - start;
                let len2 = dir.dot(&dir);
                if len2 == 0.0 {
                    return start.clone();
                }
                let s = ((y - start).dot(&dir) / len2).clamp(0.0, 1.0);
                start.axpy(s, &dir)
            }
            ConstraintSet::Product(parts) => {
                let blocks = y.split(&Self::part_dims(parts));
                let projected: Vec<Vector> =
                    parts.iter().zip(&blocks).map(|(p, b)| p.project(b)).collect();
                Vector::concat(&projected)
            }
        }
    }

    /// Checked form of [`project`](Self::project).
    pub fn euclidean_project(&self, y: &Vector) -> Result<Vector> {
        check_dim(self.dim(), y.len())?;
        Ok(self.project(y))
    }

    /// True iff `x` is within Euclidean distance `tol` of the set.
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        x.distance(&self.project(x)) <= tol
    }

    /// A canonical interior-ish point: ball center, simplex barycenter, box or
    /// segment midpoint, origin of the full space.
    pub fn center(&self) -> Vector {
        match self {
            ConstraintSet::FullSpace(n) => Vector::zeros(*n),
            ConstraintSet::EuclideanBall { center, .. } => center.clone(),
            ConstraintSet::Simplex(n) => Vector::filled(*n, 1.0 / *n as f64),
            ConstraintSet::Box { lower, upper } => (lower + upper).scale(0.5),
            ConstraintSet::Segment { start, end } => (start + end).scale(0.5),
            ConstraintSet::Product(parts) => {
                Vector::concat(&parts.iter().map(|p| p.center()).collect::<Vec<_>>())
            }
        }
    }

    /// Vertices of polytopes (simplex, box up to 16 dimensions, segment, and
    /// products of these with at most 65536 vertices). `None` for the ball and
    /// the full space.
    pub fn vertices(&self) -> Option<Vec<Vector>> {
        match self {
            ConstraintSet::FullSpace(_) | ConstraintSet::EuclideanBall { .. } => None,
            ConstraintSet::Simplex(n) => Some((0..*n).map(|i| Vector::basis(*n, i)).collect()),
            ConstraintSet::Segment { start, end } => Some(vec![start.clone(), end.clone()]),
            ConstraintSet::Box { lower, upper } => {
                let n = lower.len();
                if n > 16 {
                    return None;
                }
                Some(
                    (0..1usize << n)
                        .map(|mask| {
                            Vector::from_vec(
                                (0..n)
                                    .map(|i| if mask >> i & 1 == 1 { upper[i] } else { lower[i] })
                                    .collect(),
                            )
                        })
                        .collect(),
                )
            }
            ConstraintSet::Product(parts) => {
                let mut acc: Vec<Vec<Vector>> = vec![Vec::new()];
                for p in parts {
                    let vs = p.vertices()?;
                    if acc.len() * vs.len() > 1 << 16 {
                        return None;
                    }
                    let mut next = Vec::with_capacity(acc.len() * vs.len());
                    for prefix in &acc {
                        for v in &vs {
                            let mut combo = prefix.clone();
                            combo.push(v.clone());
                            next.push(combo);
                        }
                    }
                    acc = next;
                }
                Some(acc.iter().map(|blocks| Vector::concat(blocks)).collect())
            }
        }
    }

    /// Draws a feasible point. Not uniform; covers the interior and, for
    /// polytopes, the relative interior of faces with positive probability.
    /// The full space is sampled from the cube `[-10, 10]^n`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        match self {
            ConstraintSet::FullSpace(n) => {
                Vector::from_vec((0..*n).map(|_| rng.random_range(-10.0..10.0)).collect())
            }
            ConstraintSet::EuclideanBall { center, radius } => {
                let n = center.len();
                let dir = loop {
                    let d = Vector::from_vec((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
                    if d.norm2() > 1e-3 {
                        break d;
                    }
                };
                let r = radius * rng.random_range(0.0f64..=1.0);
                center.axpy(r / dir.norm2(), &dir)
            }
            ConstraintSet::Simplex(n) => {
                let w: Vec<f64> = (0..*n)
                    .map(|_| -math::ln(1.0 - rng.random_range(0.0..1.0)))
                    .collect();
                let s: f64 = w.iter().sum();
                if s > 0.0 {
                    Vector::from_vec(w.iter().map(|v| v / s).collect())
                } else {
                    self.center()
                }
            }
            ConstraintSet::Box { lower, upper } => Vector::from_vec(
                (0..lower.len())
                    .map(|i| {
                        let u: f64 = rng.random_range(0.0..=1.0);
                        lower[i] + u * (upper[i] - lower[i])
                    })
                    .collect(),
            ),
            ConstraintSet::Segment { start, end } => {
                let u: f64 = rng.random_range(0.0..=1.0);
                start.axpy(u, &(end - start))
            }
            ConstraintSet::Product(parts) => {
                Vector::concat(&parts.iter().map(|p| p.sample(rng)).collect::<Vec<_>>())
            }
        }
    }
}

/// Euclidean projection onto the probability simplex by sorting and
/// thresholding: `x_i = max(y_i - tau, 0)` with `tau` chosen so the entries
/// sum to one.
pub fn project_simplex(y: &Vector) -> Vector {
    let n = y.len();
    let mut sorted: Vec<f64> = y.as_slice().to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let candidate = (cumsum - 1.0) / (k + 1) as f64;
        if v - candidate > 0.0 {
            tau = candidate;
        }
    }
    let mut x: Vec<f64> = y.iter().map(|v| (v - tau).max(0.0)).collect();
    // Renormalize away rounding drift; the support is unchanged.
    let s: f64 = x.iter().sum();
    if s > 0.0 && n > 0 {
        for v in &mut x {
            *v /= s;
        }
    }
    Vector::from_vec(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_slice(xs)
    }

    #[test]
    fn support_min_examples() {
        let ball = ConstraintSet::centered_ball(2, 1.0).unwrap();
        let s = ball.support_min(&v(&[3.0, 4.0])).unwrap();
        assert!((s.value + 5.0).abs() < 1e-15);
        assert!(s.witness.distance(&v(&[-0.6, -0.8])) < 1e-15);

        let simplex = ConstraintSet::simplex(3).unwrap();
        let s = simplex.support_min(&v(&[0.2, -1.0, 4.0])).unwrap();
        assert_eq!(s.value, -1.0);
        assert_eq!(s.witness, v(&[0.0, 1.0, 0.0]));

        let seg = ConstraintSet::segment_2d([0.0, 0.0], [1.0, 0.0]).unwrap();
        let s = seg.support_min(&v(&[-1.0, 7.0])).unwrap();
        assert_eq!(s.value, -1.0);
        assert_eq!(s.witness, v(&[1.0, 0.0]));
    }

    #[test]
    fn support_min_full_space() {
        let fs = ConstraintSet::full_space(2);
        assert!(matches!(fs.support_min(&v(&[1.0, 0.0])), Err(UmdError::Unbounded(_))));
        assert_eq!(fs.support_min(&v(&[0.0, 0.0])).unwrap().value, 0.0);
    }

    #[test]
    fn projection_examples() {
        let ball = ConstraintSet::centered_ball(2, 1.0).unwrap();
        assert_eq!(ball.project(&v(&[2.0, 0.0])), v(&[1.0, 0.0]));
        let simplex = ConstraintSet::simplex(3).unwrap();
        assert_eq!(simplex.project(&v(&[2.0, 0.0, 0.0])), v(&[1.0, 0.0, 0.0]));
        let seg = ConstraintSet::segment_2d([0.0, 0.0], [1.0, 0.0]).unwrap();
        assert_eq!(seg.project(&v(&[-1.0, 0.5])), v(&[0.0, 0.0]));
    }

    // Independent water-filling oracle: bisection on tau for sum max(y - tau, 0) = 1.
    fn water_fill(y: &[f64]) -> Vec<f64> {
        let (mut lo, mut hi) = (
            y.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0,
            y.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let s: f64 = y.iter().map(|v| (v - mid).max(0.0)).sum();
            if s > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let tau = 0.5 * (lo + hi);
        y.iter().map(|v| (v - tau).max(0.0)).collect()
    }

    #[test]
    fn simplex_projection_matches_water_filling() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..8 {
            for _ in 0..50 {
                let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
                let p = project_simplex(&v(&y));
                let o = water_fill(&y);
                for i in 0..n {
                    assert!((p[i] - o[i]).abs() < 1e-10, "{y:?}");
                }
            }
        }
    }

    #[test]
    fn simplex_projection_matches_grid_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let simplex = ConstraintSet::simplex(3).unwrap();
        let steps = 400;
        for _ in 0..10 {
            let y: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..2.0)).collect();
            let y = v(&y);
            let mut best = (f64::INFINITY, Vector::zeros(3));
            for i in 0..=steps {
                for j in 0..=(steps - i) {
                    let p = v(&[
                        i as f64 / steps as f64,
                        j as f64 / steps as f64,
                        (steps - i - j) as f64 / steps as f64,
                    ]);
                    let d = p.distance(&y);
                    if d < best.0 {
                        best = (d, p);
                    }
                }
            }
            let p = simplex.project(&y);
            assert!(p.distance(&best.1) < 1e-2, "grid resolution bound");
            assert!(p.distance(&y) <= best.0 + 1e-12);
            // Objective values agree within 1e-4.
            assert!((p.distance(&y) - best.0).abs() < 1e-4);
        }
    }

    #[test]
    fn contains_examples() {
        let simplex = ConstraintSet::simplex(2).unwrap();
        assert!(simplex.contains(&v(&[0.5, 0.5]), 0.0));
        let ball = ConstraintSet::centered_ball(2, 1.0).unwrap();
        assert!(ball.contains(&v(&[1.0 + 1e-12, 0.0]), 1e-9));
        let bx = ConstraintSet::boxed(v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
        assert!(!bx.contains(&v(&[1.1, 0.5]), 1e-3));
    }

    #[test]
    fn constructors_validate() {
        assert!(ConstraintSet::centered_ball(2, 0.0).is_err());
        assert!(ConstraintSet::simplex(0).is_err());
        assert!(ConstraintSet::boxed(v(&[1.0]), v(&[0.0])).is_err());
        assert!(ConstraintSet::segment(v(&[0.0]), v(&[0.0, 1.0])).is_err());
    }

    fn all_sets() -> Vec<ConstraintSet> {
        vec![
            ConstraintSet::ball(v(&[0.5, -1.0, 2.0]), 1.5).unwrap(),
            ConstraintSet::simplex(4).unwrap(),
            ConstraintSet::boxed(v(&[-1.0, 0.0, 2.0]), v(&[1.0, 0.5, 3.0])).unwrap(),
            ConstraintSet::segment_2d([0.0, 0.0], [1.0, 0.0]).unwrap(),
            ConstraintSet::product(vec![
                ConstraintSet::simplex(2).unwrap(),
                ConstraintSet::simplex(3).unwrap(),
            ])
            .unwrap(),
        ]
    }

    #[test]
    fn projection_optimality_and_idempotence() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for set in all_sets() {
            let n = set.dim();
            for _ in 0..20 {
                let y = Vector::from_vec((0..n).map(|_| rng.random_range(-5.0..5.0)).collect());
                let p = set.project(&y);
                assert!(set.contains(&p, 1e-12));
                assert!(set.project(&p).distance(&p) < 1e-12);
                for _ in 0..100 {
                    let x = set.sample(&mut rng);
                    assert!((&y - &p).dot(&(&x - &p)) <= 1e-9, "{}", set.name());
                }
            }
        }
    }

    #[test]
    fn support_min_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for set in all_sets() {
            let n = set.dim();
            for _ in 0..20 {
                let g = Vector::from_vec((0..n).map(|_| rng.random_range(-5.0..5.0)).collect());
                let s = set.support_min(&g).unwrap();
                assert!(set.contains(&s.witness, 1e-12));
                assert!((g.dot(&s.witness) - s.value).abs() < 1e-12);
                for _ in 0..100 {
                    let x = set.sample(&mut rng);
                    assert!(s.value <= g.dot(&x) + 1e-10);
                }
            }
        }
    }

    #[test]
    fn vertices_of_polytopes() {
        let bx = ConstraintSet::boxed(v(&[0.0, 0.0]), v(&[1.0, 2.0])).unwrap();
        assert_eq!(bx.vertices().unwrap().len(), 4);
        let prod = ConstraintSet::product(vec![
            ConstraintSet::simplex(2).unwrap(),
            ConstraintSet::simplex(3).unwrap(),
        ])
        .unwrap();
        let vs = prod.vertices().unwrap();
        assert_eq!(vs.len(), 6);
        assert!(vs.iter().all(|p| prod.contains(p, 0.0)));
        assert!(ConstraintSet::centered_ball(2, 1.0).unwrap().vertices().is_none());
    }
}
