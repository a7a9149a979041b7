//! Instance files: a space, an element, a feasible set and an optional direction.

use std::path::Path;

use bochner_core::{BallSpec, BochnerSpace, CylinderSpec, Element, SetSpec, SupportSet};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub space: SpaceFile,
    /// One row of length `dim` per atom.
    pub element: Vec<Vec<f64>>,
    pub set: SetFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    pub weights: Vec<f64>,
    pub dim: usize,
    pub rho: f64,
    pub p: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    Subspace,
    Ball,
    Cylinder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetFile {
    pub kind: SetKind,
    /// Atom indices of `A`, zero-based.
    pub support: Vec<usize>,
    /// Ball center, rows per atom; zero when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

/// A validated instance.
pub struct Instance {
    pub element: Element,
    pub set: SetSpec,
    pub direction: Option<Element>,
}

impl InstanceFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Read(path.to_path_buf(), e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse(path.to_path_buf(), e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| CliError::Write(path.to_path_buf(), e))
    }

    pub fn build(&self) -> Result<Instance, CliError> {
        let s = &self.space;
        let space = BochnerSpace::build(s.weights.clone(), s.dim, s.rho, s.p)?;
        let element = Element::from_rows(&space, &self.element)?;
        let support = SupportSet::new(&space, &self.set.support)?;
        let ball = || -> Result<BallSpec, CliError> {
            let radius = self
                .set
                .radius
                .ok_or(CliError::Invalid("ball and cylinder sets need a radius"))?;
            let center = match &self.set.center {
                Some(rows) => Element::from_rows(&space, rows)?,
                None => Element::zeros(&space),
            };
            Ok(BallSpec::new(support.clone(), center, radius)?)
        };
        let set = match self.set.kind {
            SetKind::Subspace => {
                if self.set.center.is_some() || self.set.radius.is_some() {
                    return Err(CliError::Invalid("subspace sets take no center or radius"));
                }
                SetSpec::Subspace(support.clone())
            }
            SetKind::Ball => SetSpec::Ball(ball()?),
            SetKind::Cylinder => SetSpec::Cylinder(CylinderSpec::new(ball()?)),
        };
        let direction = self
            .direction
            .as_ref()
            .map(|rows| Element::from_rows(&space, rows))
            .transpose()?;
        Ok(Instance {
            element,
            set,
            direction,
        })
    }
}
