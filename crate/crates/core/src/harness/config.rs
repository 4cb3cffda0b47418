use std::collections::BTreeMap;
use std::sync::Arc;

use super::benchmarks::{BenchmarkSpec, Problem};
use super::HarnessError;
use crate::ale::{AleMode, AleStrategy, BoundaryMotion};
use crate::fem::{BoundaryTag, ElementKind};
use crate::scheme::{Integrator, SchemeVersion};

/// Plain-text `key = value` settings; `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("line {}: expected key = value", n + 1)))?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    /// Later settings override earlier ones.
    pub fn merged(mut self, other: &RunConfig) -> Self {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
        self
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, HarnessError> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| HarnessError::Config(format!("bad value '{v}' for {key}")))
            })
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<Option<bool>, HarnessError> {
        self.get(key)
            .map(|v| match v {
                "true" | "on" | "yes" | "1" => Ok(true),
                "false" | "off" | "no" | "0" => Ok(false),
                _ => Err(HarnessError::Config(format!("bad value '{v}' for {key}"))),
            })
            .transpose()
    }

    pub fn problem(&self) -> Result<Problem, HarnessError> {
        self.get("problem")
            .ok_or_else(|| HarnessError::Config("missing key 'problem'".into()))?
            .parse()
    }

    pub fn level(&self) -> Result<usize, HarnessError> {
        Ok(self.num("level")?.unwrap_or(0))
    }

    /// Standard setup for `problem` with every recognised key applied.
    pub fn to_spec(&self) -> Result<BenchmarkSpec, HarnessError> {
        let mut spec = BenchmarkSpec::standard(self.problem()?);
        if let Some(v) = self.get("fem") {
            spec.kind = v
                .parse()
                .map_err(|_| HarnessError::Config(format!("unknown element '{v}'")))?;
            if spec.kind == ElementKind::Segment {
                return Err(HarnessError::Config("benchmarks are two-dimensional".into()));
            }
        }
        if let Some(v) = self.get("scheme") {
            spec.version = match v {
                "v1" => SchemeVersion::V1,
                "v2" => SchemeVersion::V2,
                _ => return Err(HarnessError::Config(format!("unknown scheme '{v}'"))),
            };
        }
        if let Some(v) = self.get("integrator") {
            spec.integrator = match v {
                "euler" => Integrator::ForwardEuler,
                "ssp3" => Integrator::SspRk3,
                _ => return Err(HarnessError::Config(format!("unknown integrator '{v}'"))),
            };
        }
        if let Some(c) = self.num("cfl")? {
            spec.cfl = c;
        }
        if let Some(t) = self.num("final_time")? {
            spec.final_time = t;
        }
        if let Some(v) = self.flag("viscosity")? {
            spec.viscosity = v;
        }
        if let Some(v) = self.flag("nonuniform")? {
            spec.nonuniform = v;
        }
        let omega: Option<f64> = self.num("ale.omega")?;
        let sweeps: Option<usize> = self.num("ale.sweeps")?;
        let mode = match self.get("ale.mode") {
            None => None,
            Some("none") => Some(AleMode::None),
            Some("lagrangian") => Some(AleMode::Lagrangian),
            Some("smoothed") | Some("smoothed_lagrangian") => Some(AleMode::SmoothedLagrangian {
                omega: omega.unwrap_or(0.9),
                sweeps: sweeps.unwrap_or(2),
            }),
            Some(other) => return Err(HarnessError::Config(format!("unknown ale.mode '{other}'"))),
        };
        if let Some(mode) = mode {
            spec.ale = AleStrategy {
                boundary: spec.ale.boundary.clone(),
                ..AleStrategy::new(mode).map_err(|e| HarnessError::Config(e.to_string()))?
            };
        } else if let AleMode::SmoothedLagrangian { omega: o, sweeps: s } = spec.ale.mode {
            let m = AleMode::SmoothedLagrangian {
                omega: omega.unwrap_or(o),
                sweeps: sweeps.unwrap_or(s),
            };
            spec.ale = AleStrategy {
                boundary: spec.ale.boundary.clone(),
                ..AleStrategy::new(m).map_err(|e| HarnessError::Config(e.to_string()))?
            };
        }
        for tag in BoundaryTag::ALL {
            let key = format!("bc.{}.motion", tag.as_str());
            if let Some(v) = self.get(&key) {
                let motion = match v {
                    "fixed" => BoundaryMotion::Fixed,
                    "slide" => BoundaryMotion::Slide,
                    "free" => BoundaryMotion::Free,
                    "radial_inward" => BoundaryMotion::Prescribed(Arc::new(|x, _| {
                        let r = x[0].hypot(x[1]);
                        [-x[0] / r, -x[1] / r]
                    })),
                    _ => return Err(HarnessError::Config(format!("unknown motion '{v}' for {key}"))),
                };
                spec.ale = spec.ale.with_boundary(tag, motion);
            }
        }
        Ok(spec)
    }
}
