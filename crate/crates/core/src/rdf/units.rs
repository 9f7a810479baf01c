use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitEntry {
    pub unit_id: String,
    pub target: String,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UnitError {
    #[error("factor for ({unit_id}, {target}) must be finite and positive, got {factor}")]
    BadFactor { unit_id: String, target: String, factor: f64 },
    #[error("conflicting factors for ({unit_id}, {target})")]
    Conflict { unit_id: String, target: String },
}

/// Multiplicative factors from a source unit id into a named target unit.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UnitTable {
    factors: BTreeMap<(String, String), f64>,
}

#[derive(Serialize, Deserialize)]
struct UnitFile {
    entries: Vec<UnitEntry>,
}

impl UnitTable {
    pub fn new(entries: Vec<UnitEntry>) -> Result<Self, UnitError> {
        let mut factors = BTreeMap::new();
        for e in entries {
            if !(e.factor.is_finite() && e.factor > 0.0) {
                return Err(UnitError::BadFactor {
                    unit_id: e.unit_id,
                    target: e.target,
                    factor: e.factor,
                });
            }
            match factors.insert((e.unit_id.clone(), e.target.clone()), e.factor) {
                Some(old) if old != e.factor => {
                    return Err(UnitError::Conflict {
                        unit_id: e.unit_id,
                        target: e.target,
                    })
                }
                _ => {}
            }
        }
        Ok(UnitTable { factors })
    }

    /// Factor from `unit_id` into `target`; a unit id spelled like its target is the identity.
    pub fn factor(&self, unit_id: &str, target: &str) -> Option<f64> {
        if unit_id == target {
            return Some(1.0);
        }
        self.factors
            .get(&(String::from(unit_id), String::from(target)))
            .copied()
    }

    pub fn entries(&self) -> Vec<UnitEntry> {
        self.factors
            .iter()
            .map(|((u, t), f)| UnitEntry {
                unit_id: u.clone(),
                target: t.clone(),
                factor: *f,
            })
            .collect()
    }
}

impl Serialize for UnitTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        UnitFile { entries: self.entries() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnitTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let f = UnitFile::deserialize(d)?;
        UnitTable::new(f.entries).map_err(serde::de::Error::custom)
    }
}
