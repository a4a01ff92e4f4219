//! Run configuration: one JSON document, unknown keys rejected, every default
//! materialized in the echoed copy.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vortex_stir::perturbation::{FourierMode, SearchConfig, StirringProtocol};
use vortex_stir::sweep::SweepGrid;
use vortex_stir::Params;

use crate::Failure;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub params: Option<Params>,
    #[serde(default)]
    pub protocol: Option<ProtocolConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed_grid: SearchConfig<f64>,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub resonance: ResonanceConfig,
    #[serde(default)]
    pub portrait: PortraitConfig,
    #[serde(default)]
    pub sweep: Option<SweepGrid<f64>>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: None,
            protocol: None,
            tolerances: Tolerances::default(),
            output_dir: default_output_dir(),
            seed_grid: SearchConfig::default(),
            scan: ScanConfig::default(),
            resonance: ResonanceConfig::default(),
            portrait: PortraitConfig::default(),
            sweep: None,
        }
    }
}

/// Perturbation protocol as written in a config; `r0` defaults to the path
/// radius of `params` and `f` to `cos(2πt/T)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    #[serde(default)]
    pub r0: Option<f64>,
    pub epsilon: f64,
    #[serde(rename = "T")]
    pub period: f64,
    #[serde(default = "cosine_mode")]
    pub f: Vec<FourierMode<f64>>,
    #[serde(default)]
    pub g: Vec<FourierMode<f64>>,
}

fn cosine_mode() -> Vec<FourierMode<f64>> {
    vec![FourierMode {
        k: 1,
        cos: 1.0,
        sin: 0.0,
    }]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Half-width of the curves C1-C3 in the classifier.
    pub curve: f64,
    /// Axis-root residual relative to R³.
    pub residual: f64,
    /// Integration tolerance for streamlines and separatrices.
    pub orbit: f64,
    /// Integration tolerance for periods.
    pub period: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            curve: 1e-9,
            residual: 1e-10,
            orbit: 1e-10,
            period: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub samples: usize,
    pub first_offset: f64,
    pub last_gap: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            samples: 40,
            first_offset: 1e-3,
            last_gap: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResonanceConfig {
    pub m_max: usize,
    pub n_max: usize,
    /// How many pairs (lowest `mT/n` first) to search.
    pub max_pairs: usize,
    pub dump_trajectories: bool,
    pub trajectory_samples_per_period: usize,
}

impl Default for ResonanceConfig {
    fn default() -> Self {
        Self {
            m_max: 20,
            n_max: 2,
            max_pairs: 1,
            dump_trajectories: true,
            trajectory_samples_per_period: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PortraitConfig {
    /// Streamlines seeded on the x-axis.
    pub streamlines: usize,
    /// Streamline integration time in units of 1/|θ0|.
    pub streamline_time: f64,
    /// Separatrix seed offset from the saddle, relative to R.
    pub separatrix_offset: f64,
    /// Separatrix integration time in units of 1/|θ0|.
    pub separatrix_time: f64,
    /// A separatrix branch ends this close to a saddle (relative to R).
    pub stop_radius: f64,
}

impl Default for PortraitConfig {
    fn default() -> Self {
        Self {
            streamlines: 16,
            streamline_time: 50.0,
            separatrix_offset: 1e-8,
            separatrix_time: 200.0,
            stop_radius: 1e-5,
        }
    }
}

/// Values given on the command line take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub domain_radius: Option<f64>,
    pub circulation: Option<f64>,
    pub angular_velocity: Option<f64>,
    pub path_radius: Option<f64>,
    pub epsilon: Option<f64>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, Failure> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("invalid config: {e}")))?
            }
            None => RunConfig::default(),
        };
        cfg.apply(overrides)?;
        cfg.resolve()?;
        Ok(cfg)
    }

    fn apply(&mut self, o: &Overrides) -> Result<(), Failure> {
        if let Some(d) = &o.output_dir {
            self.output_dir = d.clone();
        }
        let fields = [o.domain_radius, o.circulation, o.angular_velocity, o.path_radius];
        if fields.iter().any(Option::is_some) {
            let base = self.params;
            let pick = |v: Option<f64>, old: Option<f64>, name: &str| {
                v.or(old)
                    .ok_or_else(|| Failure::Usage(format!("parameter {name} is missing")))
            };
            self.params = Some(Params {
                domain_radius: pick(o.domain_radius, base.map(|p| p.domain_radius), "R")?,
                circulation: pick(o.circulation, base.map(|p| p.circulation), "Gamma")?,
                angular_velocity: pick(o.angular_velocity, base.map(|p| p.angular_velocity), "theta0")?,
                path_radius: pick(o.path_radius, base.map(|p| p.path_radius), "r0")?,
            });
        }
        if let Some(e) = o.epsilon {
            match &mut self.protocol {
                Some(pr) => pr.epsilon = e,
                None => {
                    return Err(Failure::Usage("--epsilon needs a protocol in the config".into()));
                }
            }
        }
        Ok(())
    }

    fn resolve(&mut self) -> Result<(), Failure> {
        if let Some(p) = &self.params {
            p.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        }
        if let Some(pr) = &mut self.protocol {
            if pr.r0.is_none() {
                pr.r0 = self.params.map(|p| p.path_radius);
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<Params, Failure> {
        self.params
            .ok_or_else(|| Failure::Usage("this command needs params (config or --R/--gamma/--theta0/--r0)".into()))
    }

    pub fn protocol(&self) -> Result<StirringProtocol<f64>, Failure> {
        let pr = self
            .protocol
            .as_ref()
            .ok_or_else(|| Failure::Usage("this command needs a protocol in the config".into()))?;
        let r0 = pr
            .r0
            .ok_or_else(|| Failure::Usage("protocol r0 is missing and no params are given".into()))?;
        Ok(StirringProtocol {
            r0,
            epsilon: pr.epsilon,
            period: pr.period,
            f_modes: pr.f.clone(),
            g_modes: pr.g.clone(),
        })
    }

    pub fn resolved_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// SHA-256 of the resolved config without `output_dir`, so that the same
    /// computation written to different places shares one hash.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("output_dir");
        }
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"tolerances": {"curv": 1}}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(
            r#"{"params": {"R": 1, "Gamma": 1, "theta0": 1, "r0": 0.5, "x": 0}}"#
        )
        .is_err());
    }

    #[test]
    fn defaults_are_materialized() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"params": {"R": 1, "Gamma": 6.283185307179586, "theta0": 1, "r0": 0.5},
                "protocol": {"epsilon": 0.001, "T": 1}}"#,
        )
        .unwrap();
        let mut cfg = cfg;
        cfg.resolve().unwrap();
        let echo: serde_json::Value = serde_json::from_str(&cfg.resolved_json()).unwrap();
        assert_eq!(echo["protocol"]["r0"], 0.5);
        assert_eq!(echo["protocol"]["f"][0]["k"], 1);
        assert_eq!(echo["seed_grid"]["radial"], 32);
        assert_eq!(echo["tolerances"]["curve"], 1e-9);
        let back: RunConfig = serde_json::from_value(echo).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn hash_ignores_the_output_dir() {
        let a = RunConfig::default();
        let b = RunConfig {
            output_dir: PathBuf::from("elsewhere"),
            ..RunConfig::default()
        };
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn overrides_fill_params() {
        let o = Overrides {
            domain_radius: Some(1.0),
            circulation: Some(1.0),
            angular_velocity: Some(1.0),
            path_radius: Some(0.5),
            ..Overrides::default()
        };
        let cfg = RunConfig::load(None, &o).unwrap();
        assert_eq!(cfg.params().unwrap().path_radius, 0.5);
        let partial = Overrides {
            path_radius: Some(0.5),
            ..Overrides::default()
        };
        assert!(RunConfig::load(None, &partial).is_err());
    }
}
