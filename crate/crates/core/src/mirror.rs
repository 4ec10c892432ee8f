//! Regularizers `h` with closed-form conjugates, and the mirror maps `F` they
//! are built from.
//!
//! Each regularizer exposes `grad h*` (which realizes the "projection" step of
//! every UMD method), the value of `h` and `h*` for certification, and, when
//! `h = F + I_X` for a differentiable mirror map `F`, the canonical subgradient
//! `grad F(x)` used by mirror-descent style dual resets.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{check_dim, Result, UmdError};
use crate::geometry::ConstraintSet;
use crate::linalg::{NormTag, ReferenceNorm, Vector};
use crate::math;

/// Distance tolerance used when deciding whether a point lies in `dom h`.
pub const DOMAIN_TOL: f64 = 1e-9;

/// An `X`-regularizer: strictly convex, with `dom h* = R^n`.
#[derive(Debug, Clone, PartialEq)]
pub enum Regularizer {
    /// `h = 1/2 ||x||_2^2 + I_X`. 1-strongly convex w.r.t. L2.
    /// `grad h*` is the Euclidean projection onto `X`.
    Euclidean { set: ConstraintSet },
    /// `h = sum x_i ln x_i + I_simplex`, with `0 ln 0 = 0`.
    /// 1-strongly convex w.r.t. L1 (Pinsker).
    EntropySimplex { n: usize },
    /// `h = ||x||_1 + ||x||_2^2` on `R^n`. 2-strongly convex w.r.t. L2. Not of
    /// the form `F + I_X` with differentiable `F`, so it has no mirror map.
    ElasticNet { n: usize },
    /// Separable sum over concatenated blocks. Strong convexity is the
    /// minimum of the block constants w.r.t. the product norm.
    Product(Vec<Regularizer>),
}

/// The differentiable part `F` of `h = F + I_X`.
#[derive(Debug, Clone, PartialEq)]
pub enum MirrorMap {
    /// `F = 1/2 ||x||_2^2` on `R^n`.
    Euclidean,
    /// `F = sum x_i ln x_i` on the nonnegative orthant.
    Entropy,
    /// Blockwise mirror maps with their block dimensions.
    Product(Vec<(usize, MirrorMap)>),
}

impl Regularizer {
    pub fn euclidean(set: ConstraintSet) -> Self {
        Regularizer::Euclidean { set }
    }

    pub fn euclidean_free(n: usize) -> Self {
        Regularizer::Euclidean {
            set: ConstraintSet::full_space(n),
        }
    }

    pub fn euclidean_ball(center: Vector, radius: f64) -> Result<Self> {
        Ok(Regularizer::Euclidean {
            set: ConstraintSet::ball(center, radius)?,
        })
    }

    pub fn entropy_simplex(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(UmdError::Argument("entropy simplex needs n >= 1".into()));
        }
        Ok(Regularizer::EntropySimplex { n })
    }

    pub fn elastic_net(n: usize) -> Self {
        Regularizer::ElasticNet { n }
    }

    pub fn product(parts: Vec<Regularizer>) -> Result<Self> {
        if parts.is_empty() {
            return Err(UmdError::Argument("product of zero regularizers".into()));
        }
        Ok(Regularizer::Product(parts))
    }

    pub fn dim(&self) -> usize {
        match self {
            Regularizer::Euclidean { set } => set.dim(),
            Regularizer::EntropySimplex { n } | Regularizer::ElasticNet { n } => *n,
            Regularizer::Product(parts) => parts.iter().map(|p| p.dim()).sum(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Regularizer::Euclidean { set } => format!("euclidean[{}]", set.name()),
            Regularizer::EntropySimplex { n } => format!("entropy-simplex({n})"),
            Regularizer::ElasticNet { n } => format!("elastic-net({n})"),
            Regularizer::Product(parts) => {
                let names: Vec<String> = parts.iter().map(|p| p.name()).collect();
                names.join(" x ")
            }
        }
    }

    /// The closure of `dom h`.
    pub fn domain(&self) -> ConstraintSet {
        match self {
            Regularizer::Euclidean { set } => set.clone(),
            Regularizer::EntropySimplex { n } => ConstraintSet::Simplex(*n),
            Regularizer::ElasticNet { n } => ConstraintSet::FullSpace(*n),
            Regularizer::Product(parts) => {
                ConstraintSet::Product(parts.iter().map(|p| p.domain()).collect())
            }
        }
    }

    /// Strong convexity modulus `K` w.r.t. [`norm`](Self::norm).
    pub fn strong_convexity(&self) -> f64 {
        match self {
            Regularizer::Euclidean { .. } | Regularizer::EntropySimplex { .. } => 1.0,
            Regularizer::ElasticNet { .. } => 2.0,
            Regularizer::Product(parts) => parts
                .iter()
                .map(|p| p.strong_convexity())
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn norm(&self) -> ReferenceNorm {
        match self {
            Regularizer::Euclidean { set } => ReferenceNorm::single(set.dim(), NormTag::L2),
            Regularizer::EntropySimplex { n } => ReferenceNorm::single(*n, NormTag::L1),
            Regularizer::ElasticNet { n } => ReferenceNorm::single(*n, NormTag::L2),
            Regularizer::Product(parts) => {
                ReferenceNorm::product(&parts.iter().map(|p| p.norm()).collect::<Vec<_>>())
            }
        }
    }

    pub fn mirror_map(&self) -> Option<MirrorMap> {
        match self {
            Regularizer::Euclidean { .. } => Some(MirrorMap::Euclidean),
            Regularizer::EntropySimplex { .. } => Some(MirrorMap::Entropy),
            Regularizer::ElasticNet { .. } => None,
            Regularizer::Product(parts) => parts
                .iter()
                .map(|p| p.mirror_map().map(|m| (p.dim(), m)))
                .collect::<Option<Vec<_>>>()
                .map(MirrorMap::Product),
        }
    }

    pub fn has_mirror_map(&self) -> bool {
        self.mirror_map().is_some()
    }

    fn block_dims(parts: &[Regularizer]) -> Vec<usize> {
        parts.iter().map(|p| p.dim()).collect()
    }

    /// `h(x)`, or `+inf` outside `dom h` (up to [`DOMAIN_TOL`]).
    pub fn value(&self, x: &Vector) -> f64 {
        if x.len() != self.dim() {
            return f64::INFINITY;
        }
        match self {
            Regularizer::Euclidean { set } => {
                if set.contains(x, DOMAIN_TOL) {
                    0.5 * x.dot(x)
                } else {
                    f64::INFINITY
                }
            }
            Regularizer::EntropySimplex { .. } => {
                if x.iter().any(|v| *v < 0.0) || math::abs(x.sum() - 1.0) > DOMAIN_TOL {
                    f64::INFINITY
                } else {
                    x.iter().map(|v| math::xlogx(*v)).sum()
                }
            }
            Regularizer::ElasticNet { .. } => x.norm1() + x.dot(x),
            Regularizer::Product(parts) => parts
                .iter()
                .zip(x.split(&Self::block_dims(parts)))
                .map(|(p, b)| p.value(&b))
                .sum(),
        }
    }

    /// Fenchel conjugate `h*(zeta) = sup_x <zeta, x> - h(x)`, finite everywhere.
    pub fn conjugate(&self, zeta: &Vector) -> f64 {
        match self {
            Regularizer::Euclidean { set } => {
                let p = set.project(zeta);
                zeta.dot(&p) - 0.5 * p.dot(&p)
            }
            Regularizer::EntropySimplex { .. } => log_sum_exp(zeta),
            Regularizer::ElasticNet { .. } => zeta
                .iter()
                .map(|z| {
                    let s = (math::abs(*z) - 1.0).max(0.0);
                    0.25 * s * s
                })
                .sum(),
            Regularizer::Product(parts) => parts
                .iter()
                .zip(zeta.split(&Self::block_dims(parts)))
                .map(|(p, b)| p.conjugate(&b))
                .sum(),
        }
    }

    /// `grad h*(zeta)`: the unique maximizer of `<zeta, x> - h(x)`.
    pub fn grad_conjugate(&self, zeta: &Vector) -> Vector {
        debug_assert_eq!(zeta.len(), self.dim());
        match self {
            Regularizer::Euclidean { set } => set.project(zeta),
            Regularizer::EntropySimplex { .. } => softmax(zeta),
            Regularizer::ElasticNet { .. } => zeta.map(|z| {
                let s = (math::abs(z) - 1.0).max(0.0) * 0.5;
                if z < 0.0 {
                    -s
                } else {
                    s
                }
            }),
            Regularizer::Product(parts) => Vector::concat(
                &parts
                    .iter()
                    .zip(zeta.split(&Self::block_dims(parts)))
                    .map(|(p, b)| p.grad_conjugate(&b))
                    .collect::<Vec<_>>(),
            ),
        }
    }

    /// The mirror-descent subgradient `grad F(x)`, an element of `dh(x)`.
    ///
    /// Euclidean: `x` itself. Entropy: `1 + ln x_i`, which needs every
    /// coordinate strictly positive.
    pub fn md_subgradient(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x.len())?;
        match self {
            Regularizer::Euclidean { set } => {
                if !set.contains(x, DOMAIN_TOL) {
                    return Err(UmdError::Domain(format!(
                        "point outside {} for the euclidean mirror map",
                        set.name()
                    )));
                }
                Ok(x.clone())
            }
            Regularizer::EntropySimplex { .. } => {
                if let Some(i) = x.iter().position(|v| *v <= 0.0) {
                    return Err(UmdError::Domain(format!(
                        "entropy mirror map needs x_i > 0, got x_{i} = {}",
                        x[i]
                    )));
                }
                if math::abs(x.sum() - 1.0) > DOMAIN_TOL {
                    return Err(UmdError::Domain("point is not on the simplex".into()));
                }
                Ok(x.map(|v| 1.0 + math::ln(v)))
            }
            Regularizer::ElasticNet { .. } => Err(UmdError::Unsupported(
                "elastic-net has no mirror map; mirror-descent dual resets are undefined".into(),
            )),
            Regularizer::Product(parts) => {
                let blocks = x.split(&Self::block_dims(parts));
                let mut out = Vec::with_capacity(parts.len());
                for (p, b) in parts.iter().zip(&blocks) {
                    out.push(p.md_subgradient(b)?);
                }
                Ok(Vector::concat(&out))
            }
        }
    }

    /// `grad F(grad h*(zeta))`, the mirror-descent reset of the dual `zeta`.
    ///
    /// Equal to `md_subgradient(grad_conjugate(zeta))` but computed from
    /// `zeta` where possible: for the entropy it is `1 + zeta - lse(zeta)`,
    /// finite even when coordinates of the primal point underflow to zero.
    pub fn md_dual(&self, zeta: &Vector) -> Result<Vector> {
        check_dim(self.dim(), zeta.len())?;
        match self {
            Regularizer::Euclidean { set } => Ok(set.project(zeta)),
            Regularizer::EntropySimplex { .. } => {
                let lse = log_sum_exp(zeta);
                if !lse.is_finite() {
                    return Err(UmdError::Domain("non-finite dual for the entropy mirror map".into()));
                }
                Ok(zeta.map(|z| 1.0 + (z - lse)))
            }
            Regularizer::ElasticNet { .. } => self.md_subgradient(&self.grad_conjugate(zeta)),
            Regularizer::Product(parts) => {
                let blocks = zeta.split(&Self::block_dims(parts));
                let mut out = Vec::with_capacity(parts.len());
                for (p, b) in parts.iter().zip(&blocks) {
                    out.push(p.md_dual(b)?);
                }
                Ok(Vector::concat(&out))
            }
        }
    }
}

impl MirrorMap {
    /// `F(x)`, `+inf` outside `dom F`.
    pub fn value(&self, x: &Vector) -> f64 {
        match self {
            MirrorMap::Euclidean => 0.5 * x.dot(x),
            MirrorMap::Entropy => {
                if x.iter().any(|v| *v < 0.0) {
                    f64::INFINITY
                } else {
                    x.iter().map(|v| math::xlogx(*v)).sum()
                }
            }
            MirrorMap::Product(parts) => {
                let dims: Vec<usize> = parts.iter().map(|p| p.0).collect();
                parts
                    .iter()
                    .zip(x.split(&dims))
                    .map(|((_, m), b)| m.value(&b))
                    .sum()
            }
        }
    }

    /// `grad F(x)` on `int dom F`.
    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        match self {
            MirrorMap::Euclidean => Ok(x.clone()),
            MirrorMap::Entropy => {
                self.check_interior(x)?;
                Ok(x.map(|v| 1.0 + math::ln(v)))
            }
            MirrorMap::Product(parts) => {
                let dims: Vec<usize> = parts.iter().map(|p| p.0).collect();
                let mut out = Vec::new();
                for ((_, m), b) in parts.iter().zip(x.split(&dims)) {
                    out.push(m.gradient(&b)?);
                }
                Ok(Vector::concat(&out))
            }
        }
    }

    /// Bregman divergence `D_F(x, x0) = F(x) - F(x0) - <grad F(x0), x - x0>`.
    pub fn divergence(&self, x: &Vector, x0: &Vector) -> Result<f64> {
        let g = self.gradient(x0)?;
        Ok(self.value(x) - self.value(x0) - g.dot(&(x - x0)))
    }

    fn check_interior(&self, x: &Vector) -> Result<()> {
        match self {
            MirrorMap::Euclidean => Ok(()),
            MirrorMap::Entropy => match x.iter().position(|v| *v <= 0.0) {
                Some(i) => Err(UmdError::Domain(format!(
                    "point outside the interior of the entropy domain at coordinate {i}"
                ))),
                None => Ok(()),
            },
            MirrorMap::Product(parts) => {
                let dims: Vec<usize> = parts.iter().map(|p| p.0).collect();
                for ((_, m), b) in parts.iter().zip(x.split(&dims)) {
                    m.check_interior(&b)?;
                }
                Ok(())
            }
        }
    }
}

/// Bregman projection `argmin_{x in X} D_F(x, x0)`.
///
/// Closed forms: Euclidean projection for the Euclidean mirror map; for
/// entropy, normalization onto the simplex, clipping onto a box (the problem
/// is separable) and the identity on the full space.
pub fn bregman_project(map: &MirrorMap, set: &ConstraintSet, x0: &Vector) -> Result<Vector> {
    check_dim(set.dim(), x0.len())?;
    map.check_interior(x0)?;
    match (map, set) {
        (MirrorMap::Euclidean, _) => Ok(set.project(x0)),
        (MirrorMap::Entropy, ConstraintSet::Simplex(_)) => Ok(x0.scale(1.0 / x0.sum())),
        (MirrorMap::Entropy, ConstraintSet::FullSpace(_)) => Ok(x0.clone()),
        (MirrorMap::Entropy, ConstraintSet::Box { lower, upper }) => {
            if let Some(i) = (0..upper.len()).find(|&i| upper[i] <= 0.0) {
                return Err(UmdError::Domain(format!(
                    "box misses the entropy domain interior at coordinate {i}"
                )));
            }
            Ok(Vector::from_vec(
                (0..x0.len())
                    .map(|i| x0[i].clamp(lower[i], upper[i]))
                    .collect(),
            ))
        }
        (MirrorMap::Product(parts), ConstraintSet::Product(sets)) if parts.len() == sets.len() => {
            let dims: Vec<usize> = parts.iter().map(|p| p.0).collect();
            let mut out = Vec::new();
            for (((_, m), s), b) in parts.iter().zip(sets).zip(x0.split(&dims)) {
                out.push(bregman_project(m, s, &b)?);
            }
            Ok(Vector::concat(&out))
        }
        _ => Err(UmdError::Unsupported(format!(
            "no closed-form Bregman projection onto {}",
            set.name()
        ))),
    }
}

/// `ln sum exp(z_i)` with max-shift.
pub fn log_sum_exp(z: &Vector) -> f64 {
    let m = z.max();
    if !m.is_finite() {
        return m;
    }
    m + math::ln(z.iter().map(|v| math::exp(v - m)).sum::<f64>())
}

/// `exp(z_i) / sum exp(z_j)` with max-shift, so dual points of magnitude
/// `1e40` and beyond stay finite.
pub fn softmax(z: &Vector) -> Vector {
    let m = z.max();
    let w = z.map(|v| math::exp(v - m));
    let s = w.sum();
    w.scale(1.0 / s)
}
