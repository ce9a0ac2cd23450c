//! JSON file I/O and the ensemble file format.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use qsot_core::Dynamics;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::specs::{channel_value, state_value};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid JSON in {}", path.display()))
}

pub fn to_json(value: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string(value)? + "\n")
}

/// Writes to `out` if given, otherwise to stdout. Nothing is written unless
/// serialization succeeded.
pub fn emit(value: &impl Serialize, out: Option<&Path>) -> Result<()> {
    let text = to_json(value)?;
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Weighted list of dynamics.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub weights: Vec<f64>,
    pub dynamics: Vec<Dynamics>,
}

impl Ensemble {
    pub fn single(&self) -> Result<&Dynamics> {
        match self.dynamics.as_slice() {
            [d] => Ok(d),
            _ => bail!("expected a single dynamics, got an ensemble of {}", self.dynamics.len()),
        }
    }
}

fn dynamics_value(v: &Value) -> Result<Dynamics> {
    let obj = v.as_object().ok_or_else(|| anyhow!("dynamics must be an object with 'state' and 'channel'"))?;
    let state = state_value(obj.get("state").ok_or_else(|| anyhow!("dynamics is missing 'state'"))?)?;
    let channel = channel_value(obj.get("channel").ok_or_else(|| anyhow!("dynamics is missing 'channel'"))?)?;
    Ok(Dynamics::new(state, channel)?)
}

/// Reads either `{"state", "channel"}` or
/// `{"weights": [...], "dynamics": [{"state", "channel"}, ...]}`. States may
/// be names (`"0"`, `"+"`, `"mixed[3]"`) and channels may be names
/// (`"X"`, `"Y[pi/2]"`).
pub fn read_ensemble(path: &Path) -> Result<Ensemble> {
    let v: Value = read_json(path)?;
    parse_ensemble(&v).with_context(|| format!("in {}", path.display()))
}

pub fn parse_ensemble(v: &Value) -> Result<Ensemble> {
    if let Some(list) = v.get("dynamics") {
        let list = list.as_array().ok_or_else(|| anyhow!("'dynamics' must be an array"))?;
        let dynamics = list.iter().map(dynamics_value).collect::<Result<Vec<_>>>()?;
        let weights: Vec<f64> = match v.get("weights") {
            Some(w) => serde_json::from_value(w.clone()).context("'weights' must be an array of numbers")?,
            None => vec![1.0 / dynamics.len() as f64; dynamics.len()],
        };
        if weights.len() != dynamics.len() || dynamics.is_empty() {
            bail!("{} weights for {} dynamics", weights.len(), dynamics.len());
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            bail!("weights must be nonnegative and sum to 1, got {weights:?}");
        }
        Ok(Ensemble { weights, dynamics })
    } else {
        Ok(Ensemble {
            weights: vec![1.0],
            dynamics: vec![dynamics_value(v)?],
        })
    }
}
