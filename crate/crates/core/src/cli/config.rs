use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse, Expression};
use crate::tensor::{BrinkmannMetric, DomainBox, GridSpec, Tolerances};

/// JSON description of a metric `2du(dv + H du + Ω_i dx^i) + γ_ij dx^i dx^j`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    #[serde(default)]
    pub name: String,
    #[serde(rename = "H")]
    pub h: String,
    #[serde(rename = "Omega1", default = "zero")]
    pub omega1: String,
    #[serde(rename = "Omega2", default = "zero")]
    pub omega2: String,
    /// Optional; must equal the identity on the domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<[[String; 2]; 2]>,
    #[serde(default)]
    pub domain: DomainBox,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub grid: GridSpec,
}

fn zero() -> String {
    "0".to_string()
}

fn field(name: &str, text: &str) -> Result<Expression> {
    parse(text).map_err(|e| Error::Invalid(format!("{name}: {e}")))
}

impl MetricConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("config: {e}")))
    }

    pub fn metric(&self) -> Result<BrinkmannMetric> {
        let h = field("H", &self.h)?;
        let omega = [field("Omega1", &self.omega1)?, field("Omega2", &self.omega2)?];
        let gamma = match &self.gamma {
            Some(g) => [
                [field("gamma11", &g[0][0])?, field("gamma12", &g[0][1])?],
                [field("gamma21", &g[1][0])?, field("gamma22", &g[1][1])?],
            ],
            None => crate::tensor::identity_gamma(),
        };
        let m = BrinkmannMetric::new(h, omega, gamma, self.domain, self.tolerances)?;
        m.require_identity_gamma()?;
        Ok(m)
    }
}
