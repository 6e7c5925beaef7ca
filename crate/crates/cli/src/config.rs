//! Experiment configuration: one JSON document per run, unknown keys rejected.

use std::path::{Path, PathBuf};

use ovskale_core::lattice::{KernelScale, KernelSpec};
use ovskale_core::{KernelPair, ScaleSpec, Torus};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<ScaleBlock>,
    #[serde(default, skip_serializing_if = "SolverBlock::is_default")]
    pub solver: SolverBlock,
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputBlock,
}

/// Kernel document: the torus and the two interaction kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelDoc {
    pub dim: usize,
    /// Sites per axis `M`.
    pub sites: usize,
    pub spacing: f64,
    pub a: KernelDef,
    pub phi: KernelDef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum KernelDef {
    Gaussian(GaussianParams),
    Tophat(TophatParams),
    /// Values in site order, length `S`.
    Table(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianParams {
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TophatParams {
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
}

fn kernel_scale(mass: Option<f64>, amplitude: Option<f64>, what: &str) -> Result<KernelScale, CliError> {
    match (mass, amplitude) {
        (Some(m), None) => Ok(KernelScale::Mass(m)),
        (None, Some(a)) => Ok(KernelScale::Amplitude(a)),
        _ => Err(CliError::Config(format!("kernel {what}: give exactly one of \"mass\" or \"amplitude\""))),
    }
}

impl KernelDef {
    pub fn to_spec(&self, what: &str) -> Result<KernelSpec, CliError> {
        Ok(match self {
            KernelDef::Gaussian(p) => KernelSpec::Gaussian { sigma: p.sigma, scale: kernel_scale(p.mass, p.amplitude, what)? },
            KernelDef::Tophat(p) => KernelSpec::TopHat { radius: p.radius, scale: kernel_scale(p.mass, p.amplitude, what)? },
            KernelDef::Table(v) => KernelSpec::Table(v.clone()),
        })
    }
}

impl KernelDoc {
    pub fn build(&self) -> Result<KernelPair, CliError> {
        let torus = Torus::new(self.dim, self.sites, self.spacing).map_err(CliError::config)?;
        KernelPair::from_specs(torus, &self.a.to_spec("a")?, &self.phi.to_spec("phi")?).map_err(CliError::config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub kernels: KernelDoc,
    pub m: f64,
    pub lambda: f64,
    /// Truncation order of the hierarchy.
    #[serde(default = "default_truncation")]
    pub n_max: usize,
    /// Frozen constant `N̂` of the singular bound.
    #[serde(default = "default_n_hat")]
    pub n_hat: f64,
}

fn default_truncation() -> usize {
    3
}

fn default_n_hat() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleBlock {
    pub alpha_s: f64,
    pub alpha_star: f64,
    #[serde(default = "one")]
    pub nu: f64,
    #[serde(default)]
    pub omega: f64,
}

fn one() -> f64 {
    1.0
}

impl ScaleBlock {
    pub fn build(&self) -> Result<ScaleSpec, CliError> {
        ScaleSpec::with_constants(self.alpha_s, self.alpha_star, self.nu, self.omega).map_err(CliError::config)
    }
}

/// Series solver settings; anything left out is chosen automatically.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    #[serde(rename = "Upsilon", default, skip_serializing_if = "Option::is_none")]
    pub upsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extrapolate: Option<bool>,
}

impl SolverBlock {
    fn is_default(&self) -> bool {
        *self == SolverBlock::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Also emit long-format plot data.
    #[serde(default = "yes")]
    pub plotdata: bool,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { dir: default_dir(), plotdata: true }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn yes() -> bool {
    true
}

/// Initial correlation function of a hierarchy run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    /// `e_λ(ρ, ·)` with a constant density.
    Product(f64),
    /// `e_λ(ρ, ·)` with a density given per site.
    Density(Vec<f64>),
    /// A correlation-vector JSON file, relative to the config file.
    File(PathBuf),
}

/// Initial field of a kinetic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialField {
    Constant(f64),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Experiment {
    Evolve {
        initial: InitialState,
        /// `t − s` as a fraction of `T(α_s, α*)`; mutually exclusive with `span`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_fraction: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        span: Option<f64>,
        #[serde(default)]
        s: f64,
        #[serde(default = "yes")]
        oracle: bool,
        /// Intermediate time for the flow check, as a fraction of `t − s`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        flow_tau_fraction: Option<f64>,
    },
    Vlasov {
        epsilons: Vec<f64>,
        initial: InitialState,
        #[serde(default = "half")]
        t_fraction: f64,
        #[serde(default = "default_samples")]
        samples: usize,
        /// Admissible range of successive ratios `e(ε_{k+1})/e(ε_k)`.
        #[serde(default = "default_ratio_window")]
        ratio_window: [f64; 2],
    },
    Kinetic {
        initial: InitialField,
        t_end: f64,
        dt: f64,
        /// Write every `record_every`-th nominal step.
        #[serde(default = "one_usize")]
        record_every: usize,
        #[serde(default)]
        full_field: bool,
        /// For constant data, compare with the homogeneous ODE to this tolerance.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        homogeneous_tol: Option<f64>,
    },
    Bifurcation {
        b: Vec<f64>,
        c: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_hi: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resolution: Option<usize>,
        /// `b` values for the fold curve; each must lie in `(0, b*)`.
        #[serde(default)]
        fold_b: Vec<f64>,
        /// Expected root count for every grid point, if given.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_roots: Option<usize>,
    },
    Bounds {
        #[serde(default = "default_samples")]
        samples: usize,
        /// Samples used to fit `N̂` before the check; 0 keeps the model's `n_hat`.
        #[serde(default)]
        calibration_samples: usize,
    },
    Horizon {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        search_hi: Option<f64>,
        /// `t − s` values as fractions of the maximal horizon.
        #[serde(default = "default_fractions")]
        t_fractions: Vec<f64>,
        #[serde(default = "default_curve_points")]
        curve_points: usize,
    },
}

fn half() -> f64 {
    0.5
}

fn one_usize() -> usize {
    1
}

fn default_samples() -> usize {
    500
}

fn default_ratio_window() -> [f64; 2] {
    [0.3, 0.7]
}

fn default_fractions() -> Vec<f64> {
    vec![0.25, 0.5, 0.75]
}

fn default_curve_points() -> usize {
    200
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Evolve { .. } => "evolve",
            Experiment::Vlasov { .. } => "vlasov",
            Experiment::Kinetic { .. } => "kinetic",
            Experiment::Bifurcation { .. } => "bifurcation",
            Experiment::Bounds { .. } => "bounds",
            Experiment::Horizon { .. } => "horizon",
        }
    }

    fn needs_model(&self) -> bool {
        !matches!(self, Experiment::Bifurcation { .. })
    }

    fn needs_scale(&self) -> bool {
        !matches!(self, Experiment::Bifurcation { .. } | Experiment::Kinetic { .. })
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be finite and > 0, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks that go beyond the JSON shape. Runs before any compute.
    pub fn validate(&self) -> Result<(), CliError> {
        let exp = &self.experiment;
        if exp.needs_model() && self.model.is_none() {
            return Err(CliError::Config(format!("experiment {} needs a \"model\" block", exp.name())));
        }
        if exp.needs_scale() && self.scale.is_none() {
            return Err(CliError::Config(format!("experiment {} needs a \"scale\" block", exp.name())));
        }
        if let Some(m) = &self.model {
            m.kernels.build()?;
            if !(m.m >= 0.0 && m.lambda >= 0.0 && m.m.is_finite() && m.lambda.is_finite()) {
                return Err(CliError::Config("model rates m and lambda must be finite and >= 0".into()));
            }
            if !(m.n_hat.is_finite() && m.n_hat >= 0.0) {
                return Err(CliError::Config("n_hat must be finite and >= 0".into()));
            }
        }
        if let Some(s) = &self.scale {
            s.build()?;
        }
        match exp {
            Experiment::Evolve { t_fraction, span, flow_tau_fraction, .. } => {
                match (t_fraction, span) {
                    (Some(f), None) => positive("t_fraction", *f)?,
                    (None, Some(s)) => positive("span", *s)?,
                    _ => return Err(CliError::Config("evolve: give exactly one of t_fraction or span".into())),
                }
                if let Some(f) = flow_tau_fraction {
                    if !(*f > 0.0 && *f < 1.0) {
                        return Err(CliError::Config("flow_tau_fraction must lie in (0, 1)".into()));
                    }
                }
            }
            Experiment::Vlasov { epsilons, t_fraction, samples, ratio_window, .. } => {
                ovskale_core::vlasov::EpsilonSweep::new(epsilons.clone()).map_err(CliError::config)?;
                positive("t_fraction", *t_fraction)?;
                if *samples == 0 {
                    return Err(CliError::Config("samples must be >= 1".into()));
                }
                if ratio_window[0].is_nan() || ratio_window[1].is_nan() || ratio_window[0] > ratio_window[1] {
                    return Err(CliError::Config("ratio_window must be [lo, hi] with lo <= hi".into()));
                }
            }
            Experiment::Kinetic { t_end, dt, record_every, .. } => {
                positive("dt", *dt)?;
                if !(t_end.is_finite() && *t_end >= 0.0) {
                    return Err(CliError::Config("t_end must be finite and >= 0".into()));
                }
                if *record_every == 0 {
                    return Err(CliError::Config("record_every must be >= 1".into()));
                }
            }
            Experiment::Bifurcation { b, c, resolution, x_hi, .. } => {
                if b.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || c.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(CliError::Config("bifurcation grid needs b >= 0 and c > 0".into()));
                }
                if let Some(r) = resolution {
                    if *r < 2 {
                        return Err(CliError::Config("resolution must be >= 2".into()));
                    }
                }
                if let Some(x) = x_hi {
                    positive("x_hi", *x)?;
                }
            }
            Experiment::Bounds { samples, .. } => {
                if *samples == 0 {
                    return Err(CliError::Config("samples must be >= 1".into()));
                }
            }
            Experiment::Horizon { search_hi, t_fractions, curve_points } => {
                if let (Some(hi), Some(s)) = (search_hi, &self.scale) {
                    if hi.is_nan() || *hi <= s.alpha_s {
                        return Err(CliError::Config("search_hi must exceed alpha_s".into()));
                    }
                }
                if t_fractions.iter().any(|f| !(*f >= 0.0 && *f < 1.0)) {
                    return Err(CliError::Config("t_fractions must lie in [0, 1)".into()));
                }
                if *curve_points < 2 {
                    return Err(CliError::Config("curve_points must be >= 2".into()));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample_model() -> ModelBlock {
        let g = KernelDef::Gaussian(GaussianParams { sigma: 0.2, mass: Some(1.0), amplitude: None });
        ModelBlock {
            kernels: KernelDoc { dim: 1, sites: 6, spacing: 1.0 / 6.0, a: g.clone(), phi: g },
            m: 1.0,
            lambda: 1.0,
            n_max: 3,
            n_hat: 1e-6,
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"experiment": {"kind": "bifurcation", "b": [0.05], "c": [0.3]}, "sed": 3}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
        let text = r#"{"experiment": {"kind": "bifurcation", "b": [0.05], "c": [0.3], "extra": 1}}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
    }

    #[test]
    fn kernel_documents_parse() {
        let text = r#"{"dim":1,"sites":4,"spacing":0.25,
            "a":{"kind":"tophat","params":{"radius":0.3,"amplitude":2.0}},
            "phi":{"kind":"table","params":[0.0,1.0,0.5,1.0]}}"#;
        let doc: KernelDoc = serde_json::from_str(text).unwrap();
        let k = doc.build().unwrap();
        assert_eq!(k.phi_values(), &[0.0, 1.0, 0.5, 1.0]);
        let bad = r#"{"dim":1,"sites":4,"spacing":0.25,
            "a":{"kind":"gaussian","params":{"sigma":0.3}},
            "phi":{"kind":"table","params":[0.0,1.0,0.5,1.0]}}"#;
        let doc: KernelDoc = serde_json::from_str(bad).unwrap();
        assert!(doc.build().is_err());
    }

    #[test]
    fn semantic_validation() {
        let mut cfg = ExperimentConfig {
            model: None,
            scale: None,
            solver: SolverBlock::default(),
            experiment: Experiment::Bounds { samples: 10, calibration_samples: 0 },
            seed: 0,
            output: OutputBlock::default(),
        };
        assert!(cfg.validate().is_err());
        cfg.model = Some(sample_model());
        cfg.scale = Some(ScaleBlock { alpha_s: 1.2, alpha_star: 2.0, nu: 1.0, omega: 0.0 });
        cfg.validate().unwrap();
        cfg.scale = Some(ScaleBlock { alpha_s: 2.2, alpha_star: 2.0, nu: 1.0, omega: 0.0 });
        assert!(cfg.validate().is_err());
    }
}
