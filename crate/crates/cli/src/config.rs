//! Experiment configuration: a TOML file resolved into solver objects.
//!
//! Parsing happens in two passes. Serde reads the raw tables with unknown
//! keys rejected; `kind` strings are then resolved by hand so that an
//! unsupported kind is reported by name together with the accepted ones.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use umd_core::online::{Adversary, AlternatingAdversary, FixedAdversary, SeededRandomAdversary, ZeroAdversary};
use umd_core::problems::{
    make_bilinear_saddle, make_least_squares, make_logistic, random_constrained_quadratic,
    synthetic_least_squares, BilinearSaddle, L1Distance, ZeroProblem,
};
use umd_core::vi::{AffineOperator, MonotoneOperator, ZetaPolicy};
use umd_core::{ConstraintSet, Dataset, DualChoice, DualPolicy, Matrix, Problem, Regularizer, Vector};

use crate::error::{CliError, CliResult};
use crate::ingest::{ingest_csv, DataFormat, Delimiter, IngestOptions};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub problem: Option<RawProblem>,
    pub set: Option<RawSet>,
    pub regularizer: Option<RawRegularizer>,
    pub run: Option<RawRun>,
    pub vi: Option<RawVi>,
    pub regret: Option<RawRegret>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RawProblem {
    pub kind: String,
    /// `synthetic` (default) or `csv`, for data-driven kinds.
    pub source: Option<String>,
    pub path: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    /// `last-column-target` (default) or `separate-labels`.
    pub format: Option<String>,
    pub feature_scale: Option<f64>,
    /// `,` by default; `whitespace` splits on runs of blanks.
    pub delimiter: Option<String>,
    pub header: Option<bool>,
    pub samples: Option<usize>,
    pub features: Option<usize>,
    pub condition: Option<f64>,
    pub seed: Option<u64>,
    pub dim: Option<usize>,
    pub center: Option<Vec<f64>>,
    pub payoff: Option<Vec<Vec<f64>>>,
    pub matrix: Option<Vec<Vec<f64>>>,
    pub offset: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSet {
    pub kind: String,
    pub dim: Option<usize>,
    pub center: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
    pub start: Option<Vec<f64>>,
    pub end: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRegularizer {
    pub kind: String,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RawRun {
    pub policies: Option<Vec<String>>,
    pub step_sizes: Option<Vec<f64>>,
    /// `absolute` (default), `smooth` (multiples of K/L) or `nonsmooth`
    /// (multiples of Omega/M sqrt(K/T)).
    pub step_unit: Option<String>,
    pub horizon: Option<usize>,
    pub theta1: Option<Vec<f64>>,
    pub certify: Option<bool>,
    pub f_star: Option<f64>,
    pub f_star_budget: Option<usize>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RawVi {
    /// `mirror-prox`, `dual-extrapolation` or `dual-averaging` (default).
    pub variant: Option<String>,
    /// Defaults to K/L.
    pub gamma: Option<f64>,
    pub horizon: Option<usize>,
    pub theta1: Option<Vec<f64>>,
    pub certify: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RawRegret {
    pub adversary: String,
    pub payoff: Option<Vec<f64>>,
    pub bound: Option<f64>,
    pub seed: Option<u64>,
    /// Defaults to the tuned rate for the horizon.
    pub eta: Option<f64>,
    pub horizon: Option<usize>,
    pub policy: Option<String>,
    pub theta1: Option<Vec<f64>>,
    pub certify: Option<bool>,
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub certify: bool,
    pub seed: Option<u64>,
}

pub fn load(path: &Path) -> CliResult<(RawConfig, PathBuf)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let raw: RawConfig = toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((raw, base))
}

fn need<T>(value: Option<T>, what: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::config(format!("missing `{what}`")))
}

fn unknown(what: &str, kind: &str, accepted: &[&str]) -> CliError {
    CliError::config(format!("unknown {what} kind `{kind}` (expected one of: {})", accepted.join(", ")))
}

fn matrix(rows: &[Vec<f64>], what: &str) -> CliResult<Matrix> {
    Matrix::from_rows(rows).map_err(|e| CliError::config(format!("`{what}`: {e}")))
}

/// A first-order problem usable by the solve and sweep commands.
pub type BoxedProblem = Box<dyn Problem + Send + Sync>;

/// What `[problem]` resolves to.
pub enum ProblemSpec {
    Objective(BoxedProblem),
    Bilinear(BilinearSaddle),
    Affine(AffineOperator),
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        match self {
            ProblemSpec::Objective(p) => p.dim(),
            ProblemSpec::Bilinear(b) => b.dim(),
            ProblemSpec::Affine(a) => a.dim(),
        }
    }
}

fn resolve_dataset(p: &RawProblem, base: &Path, seed: u64, classification: bool) -> CliResult<Dataset> {
    match p.source.as_deref().unwrap_or("synthetic") {
        "synthetic" => {
            let samples = p.samples.unwrap_or(50);
            let features = p.features.unwrap_or(20);
            if samples == 0 || features == 0 {
                return Err(CliError::config("synthetic data needs samples >= 1 and features >= 1"));
            }
            let (data, _) = synthetic_least_squares(seed, samples, features, p.condition.unwrap_or(100.0));
            if !classification {
                return Ok(data);
            }
            let labels = data.targets().map(|y| if y >= 0.0 { 1.0 } else { -1.0 });
            Ok(Dataset::new(data.features().clone(), labels)?)
        }
        "csv" => {
            let path = base.join(need(p.path.as_ref(), "problem.path")?);
            let format = match p.format.as_deref().unwrap_or("last-column-target") {
                "last-column-target" => DataFormat::LastColumnTarget,
                "separate-labels" => DataFormat::SeparateLabels(base.join(need(p.labels.as_ref(), "problem.labels")?)),
                other => return Err(unknown("data format", other, &["last-column-target", "separate-labels"])),
            };
            let delimiter = match p.delimiter.as_deref().unwrap_or(",") {
                "whitespace" => Delimiter::Whitespace,
                d if d.len() == 1 => Delimiter::Byte(d.as_bytes()[0]),
                "\\t" => Delimiter::Byte(b'\t'),
                other => {
                    return Err(CliError::config(format!(
                        "delimiter `{other}` must be a single byte or `whitespace`"
                    )))
                }
            };
            let feature_scale = p.feature_scale.unwrap_or(1.0);
            if !(feature_scale.is_finite() && feature_scale != 0.0) {
                return Err(CliError::config("feature-scale must be finite and nonzero"));
            }
            let options = IngestOptions {
                delimiter,
                has_header: p.header.unwrap_or(false),
                feature_scale,
            };
            Ok(ingest_csv(&path, &format, &options)?)
        }
        other => Err(unknown("data source", other, &["synthetic", "csv"])),
    }
}

pub fn resolve_problem(raw: &RawConfig, base: &Path, overrides: &Overrides) -> CliResult<ProblemSpec> {
    let p = need(raw.problem.as_ref(), "[problem]")?;
    let seed = overrides.seed.or(p.seed).unwrap_or(0);
    const KINDS: [&str; 7] = ["least-squares", "logistic", "quadratic", "l1-distance", "zero", "bilinear", "affine"];
    let spec = match p.kind.as_str() {
        "least-squares" => ProblemSpec::Objective(Box::new(make_least_squares(resolve_dataset(p, base, seed, false)?))),
        "logistic" => ProblemSpec::Objective(Box::new(make_logistic(resolve_dataset(p, base, seed, true)?)?)),
        "quadratic" => {
            let n = need(p.dim, "problem.dim")?;
            if n == 0 {
                return Err(CliError::config("problem.dim must be >= 1"));
            }
            ProblemSpec::Objective(Box::new(random_constrained_quadratic(seed, n, 1.0).0))
        }
        "l1-distance" => ProblemSpec::Objective(Box::new(L1Distance::new(Vector::from_vec(need(
            p.center.clone(),
            "problem.center",
        )?)))),
        "zero" => ProblemSpec::Objective(Box::new(ZeroProblem::new(need(p.dim, "problem.dim")?))),
        "bilinear" => ProblemSpec::Bilinear(make_bilinear_saddle(matrix(
            need(p.payoff.as_ref(), "problem.payoff")?,
            "problem.payoff",
        )?)?),
        "affine" => {
            let m = matrix(need(p.matrix.as_ref(), "problem.matrix")?, "problem.matrix")?;
            let b = Vector::from_vec(p.offset.clone().unwrap_or_else(|| vec![0.0; m.rows()]));
            ProblemSpec::Affine(AffineOperator::new(m, b)?)
        }
        other => return Err(unknown("problem", other, &KINDS)),
    };
    if spec.dim() == 0 {
        return Err(CliError::config("problem has dimension 0"));
    }
    Ok(spec)
}

fn vec_of(v: &Option<Vec<f64>>, what: &str, n: usize) -> CliResult<Vector> {
    let v = Vector::from_vec(need(v.clone(), what)?);
    if v.len() != n {
        return Err(CliError::config(format!("`{what}` has {} entries, expected {n}", v.len())));
    }
    Ok(v)
}

/// Resolves `[set]` for a problem of dimension `n`. A missing table means the
/// full space, except for bilinear saddles whose set is the simplex product.
pub fn resolve_set(raw: &RawConfig, n: usize, problem: Option<&ProblemSpec>) -> CliResult<ConstraintSet> {
    if let Some(ProblemSpec::Bilinear(b)) = problem {
        if raw.set.is_some() {
            return Err(CliError::config("bilinear problems fix their set; remove [set]"));
        }
        return Ok(b.set());
    }
    let Some(s) = raw.set.as_ref() else {
        return Ok(ConstraintSet::full_space(n));
    };
    let n = s.dim.unwrap_or(n);
    const KINDS: [&str; 5] = ["ball", "simplex", "box", "full", "segment"];
    let set = match s.kind.as_str() {
        "ball" => {
            let center = match &s.center {
                Some(_) => vec_of(&s.center, "set.center", n)?,
                None => Vector::zeros(n),
            };
            ConstraintSet::ball(center, need(s.radius, "set.radius")?)?
        }
        "simplex" => ConstraintSet::simplex(n)?,
        "box" => ConstraintSet::boxed(vec_of(&s.lower, "set.lower", n)?, vec_of(&s.upper, "set.upper", n)?)?,
        "full" => ConstraintSet::full_space(n),
        "segment" => ConstraintSet::segment(vec_of(&s.start, "set.start", n)?, vec_of(&s.end, "set.end", n)?)?,
        other => return Err(unknown("set", other, &KINDS)),
    };
    Ok(set)
}

/// Resolves `[regularizer]` (default `euclidean`) on `set`.
pub fn resolve_regularizer(raw: &RawConfig, set: &ConstraintSet) -> CliResult<Regularizer> {
    let kind = raw.regularizer.as_ref().map_or("euclidean", |r| r.kind.as_str());
    match kind {
        "euclidean" => Ok(Regularizer::euclidean(set.clone())),
        "entropy" => match set {
            ConstraintSet::Simplex(n) => Ok(Regularizer::entropy_simplex(*n)?),
            ConstraintSet::Product(parts) if parts.iter().all(|p| matches!(p, ConstraintSet::Simplex(_))) => {
                let blocks = parts
                    .iter()
                    .map(|p| Regularizer::entropy_simplex(p.dim()))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Regularizer::product(blocks)?)
            }
            other => Err(CliError::config(format!("entropy needs a simplex set, got {}", other.name()))),
        },
        "elastic-net" => match set {
            ConstraintSet::FullSpace(n) => Ok(Regularizer::elastic_net(*n)),
            other => Err(CliError::config(format!("elastic-net lives on the full space, got {}", other.name()))),
        },
        other => Err(unknown("regularizer", other, &["euclidean", "entropy", "elastic-net"])),
    }
}

/// One solver configuration of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Umd(DualPolicy),
    QuasiMonotone(DualChoice),
    Accelerated,
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::Umd(p) => p.label(),
            Method::QuasiMonotone(DualChoice::MirrorDescent) => "quasi-md".into(),
            Method::QuasiMonotone(DualChoice::DualAveraging) => "quasi-da".into(),
            Method::Accelerated => "aumd".into(),
        }
    }
}

/// Parses `md`, `da`, `gold<k>`, `gold<k>-<tau>`, `quasi-md`, `quasi-da`,
/// `aumd`.
pub fn parse_method(label: &str) -> CliResult<Method> {
    let bad = || {
        CliError::config(format!(
            "unknown policy kind `{label}` (expected md, da, gold<k>, gold<k>-<tau>, quasi-md, quasi-da or aumd)"
        ))
    };
    let method = match label {
        "md" => Method::Umd(DualPolicy::MirrorDescent),
        "da" => Method::Umd(DualPolicy::DualAveraging),
        "quasi-md" => Method::QuasiMonotone(DualChoice::MirrorDescent),
        "quasi-da" => Method::QuasiMonotone(DualChoice::DualAveraging),
        "aumd" => Method::Accelerated,
        _ => {
            let rest = label.strip_prefix("gold").ok_or_else(bad)?;
            let policy = match rest.split_once('-') {
                None => DualPolicy::Gold { k: rest.parse().map_err(|_| bad())? },
                Some((k, tau)) => DualPolicy::GoldLookahead {
                    k: k.parse().map_err(|_| bad())?,
                    tau: tau.parse().map_err(|_| bad())?,
                },
            };
            policy.validate().map_err(|e| CliError::config(format!("policy `{label}`: {e}")))?;
            Method::Umd(policy)
        }
    };
    Ok(method)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepUnit {
    Absolute,
    Smooth,
    Nonsmooth,
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub methods: Vec<Method>,
    pub step_sizes: Vec<f64>,
    pub step_unit: StepUnit,
    pub horizon: usize,
    pub theta1: Vector,
    pub certify: bool,
    pub f_star: Option<f64>,
    pub f_star_budget: usize,
    pub output: PathBuf,
}

fn theta1(v: &Option<Vec<f64>>, what: &str, n: usize) -> CliResult<Vector> {
    match v {
        Some(_) => vec_of(v, what, n),
        None => Ok(Vector::zeros(n)),
    }
}

fn horizon(h: Option<usize>, default: usize) -> CliResult<usize> {
    match h.unwrap_or(default) {
        0 => Err(CliError::config("horizon must be >= 1")),
        t => Ok(t),
    }
}

pub fn resolve_run(raw: &RawConfig, n: usize, overrides: &Overrides) -> CliResult<RunSpec> {
    let r = raw.run.clone().unwrap_or_default();
    let methods = r
        .policies
        .unwrap_or_else(|| vec!["md".into(), "da".into(), "gold5".into()])
        .iter()
        .map(|s| parse_method(s))
        .collect::<CliResult<Vec<_>>>()?;
    if methods.is_empty() {
        return Err(CliError::config("run.policies is empty"));
    }
    let step_sizes = r.step_sizes.unwrap_or_else(|| vec![1.0]);
    if step_sizes.is_empty() {
        return Err(CliError::config("run.step-sizes is empty"));
    }
    if let Some(g) = step_sizes.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return Err(CliError::config(format!("step size {g} is not positive and finite")));
    }
    let step_unit = match r.step_unit.as_deref().unwrap_or("absolute") {
        "absolute" => StepUnit::Absolute,
        "smooth" => StepUnit::Smooth,
        "nonsmooth" => StepUnit::Nonsmooth,
        other => return Err(unknown("step unit", other, &["absolute", "smooth", "nonsmooth"])),
    };
    Ok(RunSpec {
        methods,
        step_sizes,
        step_unit,
        horizon: horizon(r.horizon, 200)?,
        theta1: theta1(&r.theta1, "run.theta1", n)?,
        certify: overrides.certify || r.certify.unwrap_or(false),
        f_star: r.f_star,
        f_star_budget: r.f_star_budget.unwrap_or(10_000),
        output: overrides.out.clone().or(r.output).unwrap_or_else(|| PathBuf::from("out")),
    })
}

#[derive(Debug, Clone)]
pub struct ViSpec {
    pub zeta: ZetaPolicy,
    pub theta_update: DualChoice,
    pub label: &'static str,
    pub gamma: Option<f64>,
    pub horizon: usize,
    pub theta1: Vector,
    pub certify: bool,
}

pub fn resolve_vi(raw: &RawConfig, n: usize, overrides: &Overrides) -> CliResult<ViSpec> {
    let v = raw.vi.clone().unwrap_or_default();
    let (zeta, theta_update, label) = match v.variant.as_deref().unwrap_or("dual-averaging") {
        "mirror-prox" => (ZetaPolicy::MirrorDescent, DualChoice::MirrorDescent, "mirror-prox"),
        "dual-extrapolation" => (ZetaPolicy::MirrorDescent, DualChoice::DualAveraging, "dual-extrapolation"),
        "dual-averaging" => (ZetaPolicy::DualAveraging, DualChoice::DualAveraging, "dual-averaging"),
        other => {
            return Err(unknown(
                "vi variant",
                other,
                &["mirror-prox", "dual-extrapolation", "dual-averaging"],
            ))
        }
    };
    if let Some(g) = v.gamma {
        if !(g > 0.0 && g.is_finite()) {
            return Err(CliError::config(format!("vi.gamma = {g} is not positive and finite")));
        }
    }
    Ok(ViSpec {
        zeta,
        theta_update,
        label,
        gamma: v.gamma,
        horizon: horizon(v.horizon, 1000)?,
        theta1: theta1(&v.theta1, "vi.theta1", n)?,
        certify: overrides.certify || v.certify.unwrap_or(false),
    })
}

pub struct RegretSpec {
    pub adversary: Box<dyn Adversary + Send>,
    pub eta: Option<f64>,
    pub horizon: usize,
    pub policy: DualPolicy,
    pub theta1: Vector,
    pub certify: bool,
}

/// Fixed and alternating payoffs default their bound to the payoff's dual
/// norm under `h`.
pub fn resolve_regret(raw: &RawConfig, h: &Regularizer, overrides: &Overrides) -> CliResult<RegretSpec> {
    let n = h.dim();
    let r = need(raw.regret.clone(), "[regret]")?;
    let payoff = |what| vec_of(&r.payoff, what, n);
    let adversary: Box<dyn Adversary + Send> = match r.adversary.as_str() {
        "zero" => Box::new(ZeroAdversary(n)),
        "fixed" | "alternating" => {
            let payoff = payoff("regret.payoff")?;
            let bound = r.bound.unwrap_or_else(|| h.norm().dual_norm(&payoff));
            if r.adversary == "fixed" {
                Box::new(FixedAdversary { payoff, bound })
            } else {
                Box::new(AlternatingAdversary { payoff, bound })
            }
        }
        "seeded-random" => {
            let bound = need(r.bound, "regret.bound")?;
            // Coordinates in [-c, c] with c * ||1||_* = bound.
            let c = bound / h.norm().dual_norm(&Vector::filled(n, 1.0));
            Box::new(DualBounded {
                inner: SeededRandomAdversary::new(n, c, overrides.seed.or(r.seed).unwrap_or(0)),
                bound,
            })
        }
        other => return Err(unknown("adversary", other, &["zero", "fixed", "alternating", "seeded-random"])),
    };
    let policy = match r.policy.as_deref().unwrap_or("da") {
        "da" => DualPolicy::DualAveraging,
        "md" => DualPolicy::MirrorDescent,
        other => return Err(unknown("regret policy", other, &["md", "da"])),
    };
    if let Some(eta) = r.eta {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(CliError::config(format!("regret.eta = {eta} is not positive and finite")));
        }
    }
    Ok(RegretSpec {
        adversary,
        eta: r.eta,
        horizon: horizon(r.horizon, 1000)?,
        policy,
        theta1: theta1(&r.theta1, "regret.theta1", n)?,
        certify: overrides.certify || r.certify.unwrap_or(false),
    })
}

/// Seeded uniform payoffs, rescaled so the dual norm of `h` stays within
/// `bound`.
struct DualBounded {
    inner: SeededRandomAdversary,
    bound: f64,
}

impl Adversary for DualBounded {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn payoff(&mut self, plays: &[Vector], payoffs: &[Vector]) -> Vector {
        self.inner.payoff(plays, payoffs)
    }
    fn bound(&self) -> f64 {
        self.bound
    }
}

/// The dimension of a regret game: `[set] dim`, else the payoff length.
pub fn regret_dim(raw: &RawConfig) -> CliResult<usize> {
    raw.set
        .as_ref()
        .and_then(|s| s.dim)
        .or_else(|| raw.regret.as_ref().and_then(|r| r.payoff.as_ref().map(Vec::len)))
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::config("regret games need `set.dim` (or a `regret.payoff` vector)"))
}
