//! Data generators and the Monte Carlo size/power harness.
//!
//! Two families of synthetic data:
//!
//! * high-dimensional vectors `x_i = Gamma z_{1i}`, `y_i = Gamma z_{2i}`
//!   with `Gamma Gamma^T = Sigma / tr(Sigma^2)` and AR(1) correlation
//!   `Sigma[s][t] = rho^|s-t|`; innovations come from a standard normal, a
//!   scaled t4, or a centered scaled chi-square_1. The power variant sets
//!   `y_ij = delta (x_ij + x_ij^2) + z_{2ij}` with t4-scaled noise.
//! * functional curves built from 50 cosine basis terms,
//!   `x_i(t) = sum_j z_{1ij} sqrt(2) cos(j pi t)`, where the first `m`
//!   y-coefficients are a fixed function of the x-coefficients and the rest
//!   are fresh standard normals.
//!
//! Draws are filled row-major from a ChaCha8 stream seeded per run, so a
//! seed fully determines every sample. Studies derive per-run seeds with
//! [`crate::seeding::derive`] and reductions are order-independent, making
//! reports identical at any thread count.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelConfig, Sample};
use crate::nulldist::MethodKind;
use crate::runner::{run_test, Method};
use crate::seeding;

/// Innovation distribution for the high-dimensional models. All three have
/// mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnovationModel {
    /// Standard normal.
    Normal,
    /// `t_4 / sqrt(2)`; Var(t_4) = 2.
    T4Scaled,
    /// `(chi^2_1 - 1) / sqrt(2)`; Var(chi^2_1) = 2.
    Chisq1Scaled,
}

/// Coefficient link for the functional power model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkFn {
    /// `f(u) = u^3` (monotone)
    Cube,
    /// `f(u) = u^2`
    Square,
    /// `f(u) = u sin(u)`
    USinU,
    /// `f(u) = u cos(u)`
    UCosU,
}

impl LinkFn {
    fn apply(self, u: f64) -> f64 {
        match self {
            LinkFn::Cube => u * u * u,
            LinkFn::Square => u * u,
            LinkFn::USinU => u * u.sin(),
            LinkFn::UCosU => u * u.cos(),
        }
    }
}

/// Null scenario of the high-dimensional study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sim2NullSpec {
    pub model: InnovationModel,
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub seed: u64,
}

/// Power scenario of the high-dimensional study; `x` uses normal
/// innovations, the noise on `y` is t4-scaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sim2AltSpec {
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub delta: f64,
    pub seed: u64,
}

/// Functional scenario: `m = 0` is the null, larger `m` couples more
/// coefficients through `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sim3Spec {
    pub f: LinkFn,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
}

/// Number of cosine basis coefficients in the functional model.
const SIM3_TERMS: usize = 50;

fn check_sim2_dims(n: usize, p: usize, rho: f64) -> Result<()> {
    if n < 3 {
        return Err(Error::TooFewObservations { needed: 3, got: n });
    }
    if p < 1 {
        return Err(Error::InvalidParameter("dimension p must be >= 1".into()));
    }
    if !rho.is_finite() || !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!(
            "rho must lie in [0, 1), got {rho}"
        )));
    }
    Ok(())
}

/// The mixing matrix `Gamma = chol(Sigma) / sqrt(tr(Sigma^2))` for the
/// AR(1) correlation `Sigma[s][t] = rho^|s-t|`. Built once per `(p, rho)`
/// and shared across the runs of a study.
#[derive(Debug, Clone)]
pub struct Ar1Mixing {
    gamma_t: Array2<f64>,
}

impl Ar1Mixing {
    pub fn new(p: usize, rho: f64) -> Result<Self> {
        check_sim2_dims(3, p, rho)?;
        let mut sigma = Array2::zeros((p, p));
        for s in 0..p {
            for t in 0..p {
                sigma[[s, t]] = rho.powi((s as i32 - t as i32).abs());
            }
        }
        // tr(Sigma^2) by direct summation; Sigma is symmetric.
        let tr_sq: f64 = sigma.iter().map(|v| v * v).sum();
        let l = cholesky_lower(&sigma)?;
        let gamma = l / tr_sq.sqrt();
        Ok(Self {
            gamma_t: gamma.t().to_owned(),
        })
    }

    /// Mix innovation rows: returns `Z Gamma^T`.
    fn mix(&self, z: &Array2<f64>) -> Array2<f64> {
        z.dot(&self.gamma_t)
    }
}

fn cholesky_lower(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    let mut l: Array2<f64> = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return Err(Error::Numeric(format!(
                        "Cholesky failed at pivot {i}: {sum}"
                    )));
                }
                l[[i, j]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Ok(l)
}

/// Draw an `n x p` innovation matrix, filling row-major.
fn draw_innovations(rng: &mut ChaCha8Rng, n: usize, p: usize, model: InnovationModel) -> Array2<f64> {
    let v: Vec<f64> = match model {
        InnovationModel::Normal => (0..n * p).map(|_| rng.sample(StandardNormal)).collect(),
        InnovationModel::T4Scaled => {
            let t4 = StudentT::new(4.0).expect("valid dof");
            (0..n * p)
                .map(|_| rng.sample::<f64, _>(t4) / std::f64::consts::SQRT_2)
                .collect()
        }
        InnovationModel::Chisq1Scaled => {
            let chi = ChiSquared::new(1.0).expect("valid dof");
            (0..n * p)
                .map(|_| (rng.sample::<f64, _>(chi) - 1.0) / std::f64::consts::SQRT_2)
                .collect()
        }
    };
    Array2::from_shape_vec((n, p), v).expect("shape matches draw count")
}

/// Independent pair for the high-dimensional null: `x = Gamma z_1`,
/// `y = Gamma z_2`, both innovation matrices from the selected model.
/// `z_1` is drawn before `z_2`, each row-major.
pub fn gen_sim2_null(spec: &Sim2NullSpec) -> Result<(Sample, Sample)> {
    let mixing = Ar1Mixing::new(spec.p, spec.rho)?;
    gen_sim2_null_with(spec, &mixing)
}

fn gen_sim2_null_with(spec: &Sim2NullSpec, mixing: &Ar1Mixing) -> Result<(Sample, Sample)> {
    check_sim2_dims(spec.n, spec.p, spec.rho)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let z1 = draw_innovations(&mut rng, spec.n, spec.p, spec.model);
    let z2 = draw_innovations(&mut rng, spec.n, spec.p, spec.model);
    Ok((
        Sample::vector(mixing.mix(&z1))?,
        Sample::vector(mixing.mix(&z2))?,
    ))
}

/// Dependent pair for the high-dimensional power study:
/// `y_ij = delta (x_ij + x_ij^2) + z_{2ij}` with normal `z_1` and
/// t4-scaled `z_2` left unmixed.
pub fn gen_sim2_alt(spec: &Sim2AltSpec) -> Result<(Sample, Sample)> {
    let mixing = Ar1Mixing::new(spec.p, spec.rho)?;
    gen_sim2_alt_with(spec, &mixing)
}

fn gen_sim2_alt_with(spec: &Sim2AltSpec, mixing: &Ar1Mixing) -> Result<(Sample, Sample)> {
    check_sim2_dims(spec.n, spec.p, spec.rho)?;
    if !(spec.delta > 0.0) || !spec.delta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "delta must be positive, got {}",
            spec.delta
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let z1 = draw_innovations(&mut rng, spec.n, spec.p, InnovationModel::Normal);
    let z2 = draw_innovations(&mut rng, spec.n, spec.p, InnovationModel::T4Scaled);
    let x = mixing.mix(&z1);
    let mut y = z2;
    for i in 0..spec.n {
        for j in 0..spec.p {
            let xv = x[[i, j]];
            y[[i, j]] += spec.delta * (xv + xv * xv);
        }
    }
    Ok((Sample::vector(x)?, Sample::vector(y)?))
}

/// Cosine basis evaluated on the uniform grid `t_r = r / (k - 1)`:
/// row `j` holds `sqrt(2) cos((j + 1) pi t_r)`.
fn cosine_basis(k: usize) -> (Array2<f64>, Vec<f64>) {
    let grid: Vec<f64> = (0..k).map(|r| r as f64 / (k - 1) as f64).collect();
    let mut basis = Array2::zeros((SIM3_TERMS, k));
    for j in 0..SIM3_TERMS {
        let freq = (j + 1) as f64 * std::f64::consts::PI;
        for (r, t) in grid.iter().enumerate() {
            basis[[j, r]] = std::f64::consts::SQRT_2 * (freq * t).cos();
        }
    }
    (basis, grid)
}

/// Functional pair: both curves expand in the same 50-term cosine basis on
/// the uniform unit grid; the first `m` y-coefficients are `f` of the
/// x-coefficients, the remaining ones fresh standard normals.
/// Draw order: all of `z_1` row-major, then the fresh `z_2` cells row-major.
pub fn gen_sim3(spec: &Sim3Spec) -> Result<(Sample, Sample)> {
    let (basis, grid) = prepare_sim3(spec)?;
    gen_sim3_with(spec, &basis, &grid)
}

fn prepare_sim3(spec: &Sim3Spec) -> Result<(Array2<f64>, Vec<f64>)> {
    if spec.n < 3 {
        return Err(Error::TooFewObservations {
            needed: 3,
            got: spec.n,
        });
    }
    if spec.k < 2 {
        return Err(Error::GridTooShort(spec.k));
    }
    if spec.m > SIM3_TERMS {
        return Err(Error::InvalidParameter(format!(
            "dependency level m must be at most {SIM3_TERMS}, got {}",
            spec.m
        )));
    }
    Ok(cosine_basis(spec.k))
}

fn gen_sim3_with(spec: &Sim3Spec, basis: &Array2<f64>, grid: &[f64]) -> Result<(Sample, Sample)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let z1 = draw_innovations(&mut rng, spec.n, SIM3_TERMS, InnovationModel::Normal);
    let mut z2 = Array2::zeros((spec.n, SIM3_TERMS));
    for i in 0..spec.n {
        for j in 0..SIM3_TERMS {
            z2[[i, j]] = if j < spec.m {
                spec.f.apply(z1[[i, j]])
            } else {
                rng.sample(StandardNormal)
            };
        }
    }
    let x = z1.dot(basis);
    let y = z2.dot(basis);
    Ok((
        Sample::functional(x, grid.to_vec())?,
        Sample::functional(y, grid.to_vec())?,
    ))
}

// ---------------------------------------------------------------------------
// Studies
// ---------------------------------------------------------------------------

/// One cell of a study grid; the per-run seed is derived by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Scenario {
    Sim2Null {
        model: InnovationModel,
        n: usize,
        p: usize,
        rho: f64,
    },
    Sim2Alt {
        n: usize,
        p: usize,
        rho: f64,
        delta: f64,
    },
    Sim3 {
        f: LinkFn,
        m: usize,
        n: usize,
        k: usize,
    },
}

impl Scenario {
    /// Whether independence holds under this scenario.
    pub fn is_null(&self) -> bool {
        match self {
            Scenario::Sim2Null { .. } => true,
            Scenario::Sim2Alt { .. } => false,
            Scenario::Sim3 { m, .. } => *m == 0,
        }
    }

    /// Stable identifier built from the scenario parameters alone, so that
    /// identical scenarios reproduce identical study rows wherever they
    /// appear in the grid.
    pub fn content_id(&self) -> u64 {
        use crate::seeding::mix;
        match *self {
            Scenario::Sim2Null { model, n, p, rho } => {
                let mut h = mix(0x53_32_4e, model as u64);
                h = mix(h, n as u64);
                h = mix(h, p as u64);
                mix(h, rho.to_bits())
            }
            Scenario::Sim2Alt { n, p, rho, delta } => {
                let mut h = mix(0x53_32_41, n as u64);
                h = mix(h, p as u64);
                h = mix(h, rho.to_bits());
                mix(h, delta.to_bits())
            }
            Scenario::Sim3 { f, m, n, k } => {
                let mut h = mix(0x53_33, f as u64);
                h = mix(h, m as u64);
                h = mix(h, n as u64);
                mix(h, k as u64)
            }
        }
    }

    /// Generate one paired sample from this scenario.
    pub fn generate(&self, seed: u64) -> Result<(Sample, Sample)> {
        self.prepare()?.generate(seed)
    }

    fn prepare(&self) -> Result<PreparedScenario> {
        match *self {
            Scenario::Sim2Null { model, n, p, rho } => {
                check_sim2_dims(n, p, rho)?;
                Ok(PreparedScenario::Sim2Null {
                    model,
                    n,
                    p,
                    rho,
                    mixing: Ar1Mixing::new(p, rho)?,
                })
            }
            Scenario::Sim2Alt { n, p, rho, delta } => {
                check_sim2_dims(n, p, rho)?;
                Ok(PreparedScenario::Sim2Alt {
                    n,
                    p,
                    rho,
                    delta,
                    mixing: Ar1Mixing::new(p, rho)?,
                })
            }
            Scenario::Sim3 { f, m, n, k } => {
                let spec = Sim3Spec {
                    f,
                    m,
                    n,
                    k,
                    seed: 0,
                };
                let (basis, grid) = prepare_sim3(&spec)?;
                Ok(PreparedScenario::Sim3 {
                    f,
                    m,
                    n,
                    k,
                    basis,
                    grid,
                })
            }
        }
    }
}

/// A scenario with its per-grid precomputations (mixing matrix or cosine
/// basis) done once, shared across runs.
enum PreparedScenario {
    Sim2Null {
        model: InnovationModel,
        n: usize,
        p: usize,
        rho: f64,
        mixing: Ar1Mixing,
    },
    Sim2Alt {
        n: usize,
        p: usize,
        rho: f64,
        delta: f64,
        mixing: Ar1Mixing,
    },
    Sim3 {
        f: LinkFn,
        m: usize,
        n: usize,
        k: usize,
        basis: Array2<f64>,
        grid: Vec<f64>,
    },
}

impl PreparedScenario {
    fn generate(&self, seed: u64) -> Result<(Sample, Sample)> {
        match self {
            PreparedScenario::Sim2Null {
                model,
                n,
                p,
                rho,
                mixing,
            } => gen_sim2_null_with(
                &Sim2NullSpec {
                    model: *model,
                    n: *n,
                    p: *p,
                    rho: *rho,
                    seed,
                },
                mixing,
            ),
            PreparedScenario::Sim2Alt {
                n,
                p,
                rho,
                delta,
                mixing,
            } => gen_sim2_alt_with(
                &Sim2AltSpec {
                    n: *n,
                    p: *p,
                    rho: *rho,
                    delta: *delta,
                    seed,
                },
                mixing,
            ),
            PreparedScenario::Sim3 {
                f,
                m,
                n,
                k,
                basis,
                grid,
            } => gen_sim3_with(
                &Sim3Spec {
                    f: *f,
                    m: *m,
                    n: *n,
                    k: *k,
                    seed,
                },
                basis,
                grid,
            ),
        }
    }
}

/// Full configuration of a Monte Carlo study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub scenarios: Vec<Scenario>,
    pub method: MethodKind,
    /// Permutation count; used only when `method` is `Permutation`.
    #[serde(default = "default_permutations")]
    pub permutations: usize,
    pub runs: usize,
    pub alpha: f64,
    pub master_seed: u64,
    /// Worker threads; 0 uses the global rayon pool.
    #[serde(default)]
    pub threads: usize,
}

fn default_permutations() -> usize {
    200
}

/// Result row for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub scenario: Scenario,
    pub method: MethodKind,
    pub runs: usize,
    pub rejections: usize,
    pub empirical_rate: f64,
}

/// Study output: one row per scenario plus the ARE across scenarios when
/// every scenario is a null scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub alpha: f64,
    pub runs: usize,
    pub master_seed: u64,
    pub outcomes: Vec<ScenarioOutcome>,
    pub are: Option<f64>,
}

/// Average relative error of empirical rates from the nominal level:
/// `100 / M * sum |rate_j - alpha| / alpha`.
pub fn average_relative_error(rates: &[f64], alpha: f64) -> f64 {
    100.0 / rates.len() as f64 * rates.iter().map(|r| (r - alpha).abs() / alpha).sum::<f64>()
}

/// Run every scenario for `runs` Monte Carlo repetitions and report
/// rejection proportions at level `alpha`.
///
/// Run `r` of a scenario uses the seed
/// `derive(mix(master_seed, scenario.content_id()), 0, r)` for data
/// generation (and, for the permutation method, as the permutation stream
/// base), so the report depends only on the configuration, never on thread
/// count or scenario order. A failing run aborts the study with its
/// context.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport> {
    if cfg.runs < 1 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {}",
            cfg.alpha
        )));
    }
    if cfg.scenarios.is_empty() {
        return Err(Error::InvalidParameter("no scenarios given".into()));
    }
    if cfg.method == MethodKind::Permutation && cfg.permutations < 1 {
        return Err(Error::InvalidParameter(
            "permutation count must be at least 1".into(),
        ));
    }
    let body = || -> Result<Vec<ScenarioOutcome>> {
        cfg.scenarios
            .iter()
            .map(|scenario| run_scenario(cfg, scenario))
            .collect()
    };
    let outcomes = if cfg.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?;
        pool.install(body)?
    } else {
        body()?
    };
    let are = if cfg.scenarios.iter().all(Scenario::is_null) {
        let rates: Vec<f64> = outcomes.iter().map(|o| o.empirical_rate).collect();
        Some(average_relative_error(&rates, cfg.alpha))
    } else {
        None
    };
    Ok(StudyReport {
        alpha: cfg.alpha,
        runs: cfg.runs,
        master_seed: cfg.master_seed,
        outcomes,
        are,
    })
}

fn run_scenario(cfg: &StudyConfig, scenario: &Scenario) -> Result<ScenarioOutcome> {
    let prepared = scenario.prepare()?;
    let auto = KernelConfig::auto();
    let base = seeding::mix(cfg.master_seed, scenario.content_id());
    let flags: Vec<bool> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| -> Result<bool> {
            let seed = seeding::derive(base, 0, run as u64);
            let (x, y) = prepared.generate(seed)?;
            let method = match cfg.method {
                MethodKind::New => Method::New,
                MethodKind::Gamma => Method::Gamma,
                MethodKind::Permutation => Method::Permutation {
                    permutations: cfg.permutations,
                    seed,
                },
            };
            let result = run_test(&x, &y, &auto, &auto, method)
                .map_err(|e| Error::Numeric(format!("scenario {scenario:?}, run {run}: {e}")))?;
            Ok(result.p_value <= cfg.alpha)
        })
        .collect::<Result<Vec<bool>>>()?;
    let rejections = flags.iter().filter(|&&r| r).count();
    Ok(ScenarioOutcome {
        scenario: *scenario,
        method: cfg.method,
        runs: cfg.runs,
        rejections,
        empirical_rate: rejections as f64 / cfg.runs as f64,
    })
}
