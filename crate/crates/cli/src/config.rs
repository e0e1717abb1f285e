//! Run configuration: one JSON document with a section per subcommand.
//! Command-line flags override the file.

use std::path::PathBuf;

use isodeform::algebra::C64;
use isodeform::connection::SpecInput;
use isodeform::demo::DemoConfig;
use isodeform::unfolding::DEFAULT_FROBENIUS_ORDER;
use serde::{Deserialize, Serialize};

/// Upper bound on truncation orders accepted from the user.
pub const MAX_ORDER: usize = 256;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub spec: Option<SpecInput>,
    /// Endomorphism `N` as coefficient matrices of `z^0, z^1, ..`; drawn
    /// from the seed when absent.
    pub n: Option<Vec<Vec<Vec<C64>>>>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub order: Option<usize>,
    pub out: Option<PathBuf>,
    pub validate: ValidateSection,
    pub unfold: UnfoldSection,
    pub flow: FlowSection,
    pub monodromy: MonodromySection,
    pub hypergeom_demo: DemoConfig,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnfoldSection {
    /// Bound on the curvature residual.
    pub tol: f64,
    /// Angles per radius of the annulus grid.
    pub grid_angles: usize,
}

impl Default for UnfoldSection {
    fn default() -> Self {
        UnfoldSection { tol: 1e-8, grid_angles: 16 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSection {
    /// Falls back to `spec.m`, then 2.
    pub m: Option<usize>,
    pub j: usize,
    pub psi0: f64,
    pub xi: u8,
    /// Defaults to `pi / (48 m)`.
    pub delta: Option<f64>,
    pub starts: usize,
    /// Range of `|eps|` for the sampled starts; the region needs `s < 1/3`.
    pub s_min: f64,
    pub s_max: f64,
    pub margin: f64,
    /// Convergence radius around the target zero.
    pub tol: f64,
    /// Required fraction of starts reaching the target.
    pub min_fraction: f64,
}

impl Default for FlowSection {
    fn default() -> Self {
        FlowSection {
            m: None,
            j: 0,
            psi0: 0.0,
            xi: 1,
            delta: None,
            starts: 200,
            s_min: 0.02,
            s_max: 1.0 / 3.0,
            margin: 1e-3,
            tol: 1e-6,
            min_fraction: 0.95,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonodromySection {
    /// `v[l][j]`; absent means no deformation check.
    pub direction: Option<Vec<Vec<C64>>>,
    /// Transport tolerance per unit parameter.
    pub tol: f64,
    pub trace_tol: f64,
    pub local_tol: f64,
}

impl Default for MonodromySection {
    fn default() -> Self {
        MonodromySection { direction: None, tol: 1e-11, trace_tol: 1e-6, local_tol: 1e-6 }
    }
}

impl RunConfig {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn order(&self) -> usize {
        self.order.unwrap_or(DEFAULT_FROBENIUS_ORDER)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("isodeform-out"))
    }

    /// Positive tolerances and bounded orders.
    pub fn check(&self) -> Result<(), String> {
        let tols = [
            ("tol", self.tol),
            ("unfold.tol", Some(self.unfold.tol)),
            ("flow.tol", Some(self.flow.tol)),
            ("flow.margin", Some(self.flow.margin)),
            ("monodromy.tol", Some(self.monodromy.tol)),
            ("monodromy.trace_tol", Some(self.monodromy.trace_tol)),
            ("monodromy.local_tol", Some(self.monodromy.local_tol)),
        ];
        for (name, t) in tols {
            if let Some(t) = t {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(format!("{name} must be positive, got {t}"));
                }
            }
        }
        if let Some(k) = self.order {
            if k == 0 || k > MAX_ORDER {
                return Err(format!("order must lie in 1..={MAX_ORDER}, got {k}"));
            }
        }
        if self.unfold.grid_angles == 0 || self.flow.starts == 0 {
            return Err("grid_angles and starts must be positive".into());
        }
        if !(self.flow.s_min > 0.0) || self.flow.s_max <= self.flow.s_min {
            return Err("flow s range must satisfy 0 < s_min < s_max".into());
        }
        Ok(())
    }
}

/// `source` is a path, or inline JSON when it starts with `{`.
pub fn load(source: &str) -> Result<RunConfig, String> {
    let text = if source.trim_start().starts_with('{') {
        source.to_string()
    } else {
        std::fs::read_to_string(source).map_err(|e| format!("cannot read {source}: {e}"))?
    };
    serde_json::from_str(&text).map_err(|e| format!("config parse error at line {} column {}: {e}", e.line(), e.column()))
}
