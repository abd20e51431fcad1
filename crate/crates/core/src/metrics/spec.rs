use serde::Deserialize;

use super::{builtin_metric, BuiltinName, Domain, MetricKernel, MetricParams, VolumeDensity};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpecKind {
    Builtin,
    Expression,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub radius: Option<f64>,
}

impl DomainSpec {
    fn to_domain(&self) -> Result<Domain> {
        match (self.kind.as_str(), self.radius) {
            ("all", None) => Ok(Domain::All),
            ("all", Some(_)) => Err(Error::Input("domain 'all' takes no radius".into())),
            ("ball", r) => {
                let radius = r.unwrap_or(1.0);
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(Error::Input(format!("ball radius must be positive, got {radius}")));
                }
                Ok(Domain::Ball { radius })
            }
            (other, _) => Err(Error::Input(format!("unknown domain type '{other}' (expected ball or all)"))),
        }
    }
}

/// JSON description of a metric, e.g.
/// `{"dim": 2, "kind": "builtin", "name": "funk"}` or
/// `{"dim": 2, "kind": "expression", "expression": "sqrt(norm2(y))"}`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub dim: usize,
    pub kind: SpecKind,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub params: Option<MetricParams>,
    #[serde(default)]
    pub expression: Option<String>,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub volume: Option<String>,
}

impl MetricSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("invalid metric spec: {e}")))
    }

    /// Builds the kernel and the volume density. An explicit `domain`
    /// narrows a builtin's own domain; it never widens it.
    pub fn build(&self) -> Result<(MetricKernel, VolumeDensity)> {
        let kernel = match self.kind {
            SpecKind::Builtin => {
                let name: BuiltinName = self
                    .name
                    .as_deref()
                    .ok_or_else(|| Error::Input("builtin metric spec needs a 'name'".into()))?
                    .parse()?;
                if self.expression.is_some() {
                    return Err(Error::Input("builtin metric spec takes no 'expression'".into()));
                }
                let params = self.params.clone().unwrap_or_default();
                let k = builtin_metric(name, self.dim, &params)?;
                match &self.domain {
                    Some(d) => {
                        let dom = k.domain().intersect(&d.to_domain()?);
                        k.with_domain(dom)
                    }
                    None => k,
                }
            }
            SpecKind::Expression => {
                if self.name.is_some() || self.params.is_some() {
                    return Err(Error::Input("expression metric spec takes no 'name' or 'params'".into()));
                }
                let text = self
                    .expression
                    .as_deref()
                    .ok_or_else(|| Error::Input("expression metric spec needs an 'expression'".into()))?;
                let dom = match &self.domain {
                    Some(d) => d.to_domain()?,
                    None => Domain::All,
                };
                MetricKernel::parse(text, self.dim)?.with_domain(dom)
            }
        };
        let volume = match &self.volume {
            Some(text) => VolumeDensity::parse(text, self.dim)?,
            None => VolumeDensity::unit(self.dim),
        };
        Ok((kernel, volume))
    }
}
