//! TOML experiment configuration for the `hypercross` CLI.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::fourier::{hyperbolic_cross, TrigPoly};
use crate::kernels::{AveragerFamily, KernelFamily};
use crate::operators::{FunctionModel, QuasiInterpOp};
use crate::spaces::{check_cond, NormFamily, NormSpec, ResolutionOfUnity};
use crate::testbed::{f_lower, korobov, phi_j, step_signal, TestFunction};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::ConfigInvalid {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    /// Shortcut for a named operator: "i", "v", "k", "kstar".
    pub name: Option<String>,
    /// Explicit kernel tag: dlvp | dirichlet | modified_dirichlet |
    /// shifted_dirichlet_combo | modified_dlvp.
    pub kernel: Option<String>,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_support")]
    pub support: f64,
    #[serde(default = "default_sigma")]
    pub sigma: u32,
    /// Shift-combination weights (real parts), when the kernel needs them.
    pub shift_weights: Option<Vec<f64>>,
    /// Averager tag: delta | char | delta_combo.
    pub averager: Option<String>,
    pub averager_weights: Option<Vec<f64>>,
    #[serde(default)]
    pub convolution: bool,
    pub d: usize,
}

fn default_rho() -> f64 {
    0.5
}
fn default_support() -> f64 {
    1.0
}
fn default_sigma() -> u32 {
    2
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionConfig {
    /// korobov | step | f_lower | phi_block | random
    pub kind: String,
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_bandwidth")]
    pub bandwidth: i64,
    /// Lower-bound witness offset; defaults to the averager's own value
    /// from `check_cond`.
    pub xi: Option<u32>,
    /// Block levels for phi_block.
    pub levels: Option<Vec<u32>>,
    /// Cross parameter for random test polynomials.
    #[serde(default = "default_random_n")]
    pub random_n: u32,
}

fn default_a() -> f64 {
    2.0
}
fn default_bandwidth() -> i64 {
    4096
}
fn default_random_n() -> u32 {
    4
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n_min: u32,
    pub n_max: u32,
    #[serde(default = "default_q")]
    pub q: Vec<f64>,
}

fn default_q() -> Vec<f64> {
    vec![2.0]
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n_min: 2,
            n_max: 8,
            q: default_q(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_r")]
    pub r: f64,
    /// "b" or "f"
    #[serde(default = "default_family")]
    pub family: String,
    /// "smooth" or "hat"
    #[serde(default = "default_phi0")]
    pub phi0: String,
    #[serde(default = "default_jmax")]
    pub jmax: u32,
    /// |j|₁ bound for the block-polynomial corpus in lp-check.
    #[serde(default = "default_corpus_jmax")]
    pub corpus_jmax: u32,
    /// Acceptance bound on max/min equivalence ratio.
    #[serde(default = "default_ratio_bound")]
    pub ratio_bound: f64,
}

fn default_p() -> f64 {
    2.0
}
fn default_theta() -> f64 {
    2.0
}
fn default_r() -> f64 {
    1.5
}
fn default_family() -> String {
    "b".into()
}
fn default_phi0() -> String {
    "smooth".into()
}
fn default_jmax() -> u32 {
    8
}
fn default_corpus_jmax() -> u32 {
    6
}
fn default_ratio_bound() -> f64 {
    50.0
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig {
            p: default_p(),
            theta: default_theta(),
            r: default_r(),
            family: default_family(),
            phi0: default_phi0(),
            jmax: default_jmax(),
            corpus_jmax: default_corpus_jmax(),
            ratio_bound: default_ratio_bound(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionsConfig {
    #[serde(default = "default_s_values")]
    pub s_values: Vec<f64>,
    #[serde(default = "default_umax")]
    pub umax: u32,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_defect_level")]
    pub defect_level: u32,
}

fn default_s_values() -> Vec<f64> {
    vec![2.0, 3.0]
}
fn default_umax() -> u32 {
    12
}
fn default_delta() -> f64 {
    4.0
}
fn default_defect_level() -> u32 {
    12
}

impl Default for ConditionsConfig {
    fn default() -> Self {
        ConditionsConfig {
            s_values: default_s_values(),
            umax: default_umax(),
            delta: default_delta(),
            defect_level: default_defect_level(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub operator: OperatorConfig,
    pub function: Option<FunctionConfig>,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub norms: NormConfig,
    #[serde(default)]
    pub conditions: ConditionsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_seed() -> u64 {
    1
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = toml::from_str(text)
            .map_err(|e| invalid("(toml)", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        let op = &self.operator;
        if op.d == 0 || op.d > 6 {
            return Err(invalid("operator.d", "dimension must be in 1..=6"));
        }
        if op.name.is_none() && op.kernel.is_none() {
            return Err(invalid(
                "operator",
                "either `name` or `kernel` must be given",
            ));
        }
        if let Some(name) = &op.name {
            if !matches!(name.as_str(), "i" | "v" | "k" | "kstar") {
                return Err(invalid(
                    "operator.name",
                    format!("unknown named operator `{name}`"),
                ));
            }
        }
        if let Some(kernel) = &op.kernel {
            match kernel.as_str() {
                "dlvp" | "modified_dlvp" => {
                    if !(op.rho > 0.0 && op.rho < op.support) {
                        return Err(invalid(
                            "operator.rho",
                            "need 0 < rho < support",
                        ));
                    }
                }
                "dirichlet" | "modified_dirichlet" => {}
                "shifted_dirichlet_combo" => {
                    if op.shift_weights.as_deref().map_or(true, |w| w.is_empty()) {
                        return Err(invalid(
                            "operator.shift_weights",
                            "shifted combination needs nonempty weights",
                        ));
                    }
                }
                other => {
                    return Err(invalid(
                        "operator.kernel",
                        format!("unknown kernel tag `{other}`"),
                    ))
                }
            }
            let avg = op.averager.as_deref().unwrap_or("delta");
            match avg {
                "delta" | "char" => {}
                "delta_combo" => {
                    if op
                        .averager_weights
                        .as_deref()
                        .map_or(true, |w| w.is_empty())
                    {
                        return Err(invalid(
                            "operator.averager_weights",
                            "delta combination needs nonempty weights",
                        ));
                    }
                }
                other => {
                    return Err(invalid(
                        "operator.averager",
                        format!("unknown averager tag `{other}`"),
                    ))
                }
            }
        }
        if let Some(f) = &self.function {
            match f.kind.as_str() {
                "korobov" => {
                    if !(f.a > 0.5) {
                        return Err(invalid("function.a", "korobov decay needs a > 1/2"));
                    }
                    if f.bandwidth < 1 {
                        return Err(invalid("function.bandwidth", "must be >= 1"));
                    }
                }
                "step" | "f_lower" | "random" => {}
                "phi_block" => {
                    let lv = f.levels.as_deref().unwrap_or(&[]);
                    if lv.len() != self.operator.d {
                        return Err(invalid(
                            "function.levels",
                            format!(
                                "phi_block needs {} levels, got {}",
                                self.operator.d,
                                lv.len()
                            ),
                        ));
                    }
                }
                other => {
                    return Err(invalid(
                        "function.kind",
                        format!("unknown function kind `{other}`"),
                    ))
                }
            }
        }
        if self.sweep.n_min > self.sweep.n_max {
            return Err(invalid("sweep.n_min", "n_min must not exceed n_max"));
        }
        for &q in &self.sweep.q {
            if !(q >= 1.0) {
                return Err(invalid("sweep.q", format!("q must be >= 1, got {q}")));
            }
        }
        if !(self.norms.p >= 1.0) {
            return Err(invalid("norms.p", "p must be >= 1"));
        }
        if !(self.norms.theta >= 1.0) {
            return Err(invalid("norms.theta", "theta must be >= 1"));
        }
        if !(self.norms.r > 0.0) {
            return Err(invalid("norms.r", "r must be positive"));
        }
        match self.norms.family.as_str() {
            "b" | "f" => {}
            other => {
                return Err(invalid(
                    "norms.family",
                    format!("unknown family `{other}` (use b or f)"),
                ))
            }
        }
        match self.norms.phi0.as_str() {
            "smooth" | "hat" => {}
            other => {
                return Err(invalid(
                    "norms.phi0",
                    format!("unknown resolution kind `{other}` (use smooth or hat)"),
                ))
            }
        }
        for &s in &self.conditions.s_values {
            if !(s > 0.0) {
                return Err(invalid("conditions.s_values", "s must be positive"));
            }
        }
        if self.conditions.umax < 4 {
            return Err(invalid("conditions.umax", "umax must be >= 4"));
        }
        Ok(())
    }

    pub fn build_operator(&self) -> Result<QuasiInterpOp> {
        let oc = &self.operator;
        if let Some(name) = &oc.name {
            let nm = match name.as_str() {
                "i" => crate::operators::OpName::I,
                "v" => crate::operators::OpName::V,
                "k" => crate::operators::OpName::K,
                "kstar" => crate::operators::OpName::KStar,
                other => {
                    return Err(invalid(
                        "operator.name",
                        format!("unknown named operator `{other}`"),
                    ))
                }
            };
            return crate::operators::named_operator(nm, oc.d, oc.sigma);
        }
        let kern = match oc.kernel.as_deref().unwrap() {
            "dlvp" => KernelFamily::dlvp(oc.rho, oc.support)?,
            "dirichlet" => KernelFamily::dirichlet(),
            "modified_dirichlet" => KernelFamily::modified_dirichlet(oc.sigma)?,
            "shifted_dirichlet_combo" => KernelFamily::shifted_dirichlet_combo(
                oc.sigma,
                oc.shift_weights
                    .as_ref()
                    .unwrap()
                    .iter()
                    .map(|&w| Complex64::new(w, 0.0))
                    .collect(),
            )?,
            "modified_dlvp" => KernelFamily::modified_dlvp(oc.rho, oc.support, oc.sigma)?,
            _ => unreachable!("validated"),
        };
        let avg = match oc.averager.as_deref().unwrap_or("delta") {
            "delta" => AveragerFamily::delta(),
            "char" => AveragerFamily::char_averager(oc.sigma)?,
            "delta_combo" => AveragerFamily::delta_combo(
                oc.sigma,
                oc.averager_weights
                    .as_ref()
                    .unwrap()
                    .iter()
                    .map(|&w| Complex64::new(w, 0.0))
                    .collect(),
            )?,
            _ => unreachable!("validated"),
        };
        Ok(QuasiInterpOp {
            kern,
            avg,
            d: oc.d,
            convolution: oc.convolution,
        })
    }

    pub fn norm_spec(&self) -> Result<NormSpec> {
        let family = if self.norms.family == "f" {
            NormFamily::F
        } else {
            NormFamily::B
        };
        NormSpec::new(family, self.norms.p, self.norms.theta, self.norms.r)
    }

    pub fn resolution(&self) -> ResolutionOfUnity {
        if self.norms.phi0 == "hat" {
            ResolutionOfUnity::PiecewiseLinear
        } else {
            ResolutionOfUnity::SmoothBump
        }
    }

    /// Default lower-bound offset: configured, or read off the averager.
    pub fn xi_for_lower(&self, op: &QuasiInterpOp) -> Result<u32> {
        if let Some(xi) = self.function.as_ref().and_then(|f| f.xi) {
            return Ok(xi);
        }
        match check_cond(&op.avg, self.conditions.umax) {
            Some((xi, _)) => Ok(xi),
            None => Err(invalid(
                "function.xi",
                "averager shows no lower-bound pattern; set xi explicitly",
            )),
        }
    }

    /// Build the configured test function. `n` is the sweep level, which
    /// the lower-bound witness depends on.
    pub fn build_function(&self, op: &QuasiInterpOp, n: u32) -> Result<TestFunction> {
        let d = op.d;
        let fc = self.function.as_ref().ok_or_else(|| {
            invalid("function", "this command needs a [function] section")
        })?;
        match fc.kind.as_str() {
            "korobov" => korobov(fc.a, d, fc.bandwidth),
            "step" => Ok(step_signal(d, fc.bandwidth)),
            "f_lower" => {
                let xi = self.xi_for_lower(op)?;
                Ok(f_lower(n, xi, d))
            }
            "phi_block" => Ok(phi_j(
                &crate::fourier::LevelVec::new(fc.levels.clone().unwrap()),
                self.resolution(),
            )),
            "random" => Ok(random_cross_poly(fc.random_n, d, self.seed)),
            _ => unreachable!("validated"),
        }
    }
}

/// Deterministic random trigonometric polynomial supported on the
/// hyperbolic cross of parameter n.
pub fn random_cross_poly(n: u32, d: usize, seed: u64) -> TestFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = TrigPoly::new(d);
    for k in hyperbolic_cross(n, d) {
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        p.set_coeff(&k, c);
    }
    TestFunction {
        model: FunctionModel::exact(p),
        label: format!("random(n={n},d={d},seed={seed})"),
        claimed_membership: None,
    }
}
