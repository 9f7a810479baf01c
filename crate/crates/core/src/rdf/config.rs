use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::schema::{
    Characteristics, EntitySchema, GraphSchema, PropertySchema, RelationSchema, SchemaError, NAME_PROPERTY,
};
use crate::value::Datatype;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyMapping {
    pub label: String,
    pub wd_source: String,
    pub datatype: Datatype,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantity_unit: Option<String>,
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub quantity_convert_unit: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMapping {
    pub label: String,
    pub wd_source: String,
    #[serde(default)]
    pub fetch_only_connected: bool,
    #[serde(default)]
    pub properties: Vec<PropertyMapping>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationMapping {
    pub label: String,
    pub wd_source: String,
    pub subj_label: String,
    pub obj_label: String,
    #[serde(default)]
    pub time_sensitive: bool,
    /// Qualifier mappings; start/end times map to `start_year`/`end_year` ints.
    #[serde(default)]
    pub properties: Vec<PropertyMapping>,
    #[serde(default)]
    pub characteristics: Characteristics,
}

fn default_language() -> String {
    "en".into()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingConfig {
    pub name: String,
    #[serde(default = "default_language")]
    pub label_language: String,
    #[serde(default)]
    pub entities: Vec<EntityMapping>,
    #[serde(default)]
    pub relations: Vec<RelationMapping>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("property `{owner}.{property}` enables unit conversion without a quantity_unit")]
    MissingUnit { owner: String, property: String },
    #[error("property `{owner}.{property}` converts units but has non-numeric datatype {datatype}")]
    UnitOnNonNumeric {
        owner: String,
        property: String,
        datatype: Datatype,
    },
    #[error("entity property `{0}.name` is filled from labels and cannot be mapped")]
    MappedName(String),
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

impl MappingConfig {
    /// Checks cross references and unit settings.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.schema().map(|_| ())
    }

    /// Target schema described by the mapping.
    pub fn schema(&self) -> Result<GraphSchema, ConfigError> {
        let props = |owner: &str, ps: &[PropertyMapping]| -> Result<Vec<PropertySchema>, ConfigError> {
            ps.iter()
                .map(|p| {
                    if p.quantity_convert_unit {
                        if p.quantity_unit.is_none() {
                            return Err(ConfigError::MissingUnit {
                                owner: owner.into(),
                                property: p.label.clone(),
                            });
                        }
                        if !p.datatype.is_numeric() {
                            return Err(ConfigError::UnitOnNonNumeric {
                                owner: owner.into(),
                                property: p.label.clone(),
                                datatype: p.datatype,
                            });
                        }
                    }
                    Ok(PropertySchema::new(p.label.clone(), p.datatype))
                })
                .collect()
        };
        let mut entities = Vec::new();
        for e in &self.entities {
            if e.properties.iter().any(|p| p.label == NAME_PROPERTY) {
                return Err(ConfigError::MappedName(e.label.clone()));
            }
            let mut properties = alloc::vec![PropertySchema::new(NAME_PROPERTY, Datatype::Str)];
            properties.extend(props(&e.label, &e.properties)?);
            entities.push(EntitySchema {
                label: e.label.clone(),
                properties,
            });
        }
        let mut relations = Vec::new();
        for r in &self.relations {
            relations.push(RelationSchema {
                label: r.label.clone(),
                subj_label: r.subj_label.clone(),
                obj_label: r.obj_label.clone(),
                properties: props(&r.label, &r.properties)?,
                time_sensitive: r.time_sensitive,
                characteristics: r.characteristics.clone(),
            });
        }
        Ok(GraphSchema {
            name: self.name.clone(),
            entities,
            relations,
        }
        .normalize()?)
    }

    pub fn entity(&self, label: &str) -> Option<&EntityMapping> {
        self.entities.iter().find(|e| e.label == label)
    }

    /// Knowledge-base type ids of every mapped label, in declaration order.
    pub fn type_ids(&self) -> BTreeSet<&str> {
        self.entities.iter().map(|e| e.wd_source.as_str()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MOVIE: &str = r#"{
      "name": "movie",
      "entities": [
        {"label": "Movie", "wd_source": "Q11424", "properties": [
          {"label": "runtime_minute", "wd_source": "P2047", "datatype": "float",
           "quantity_unit": "minute", "quantity_convert_unit": true}]},
        {"label": "Award", "wd_source": "Q618779"}
      ],
      "relations": [
        {"label": "receivesAward", "wd_source": "P166", "subj_label": "Movie", "obj_label": "Award",
         "properties": [{"label": "year", "wd_source": "P585", "datatype": "int"}]}
      ]
    }"#;

    #[test]
    fn sample_blocks_load() {
        let c: MappingConfig = serde_json::from_str(MOVIE).unwrap();
        let s = c.schema().unwrap();
        let rt = &c.entities[0].properties[0];
        assert_eq!(rt.datatype, Datatype::Float);
        assert_eq!(rt.quantity_unit.as_deref(), Some("minute"));
        assert!(rt.quantity_convert_unit);
        assert_eq!(s.relation_property("receivesAward", "year"), Some(Datatype::Int));
        assert_eq!(s.entity_property("Award", "name"), Some(Datatype::Str));
    }

    #[test]
    fn undeclared_endpoint_rejected() {
        let bad = MOVIE.replace("\"obj_label\": \"Award\"", "\"obj_label\": \"Ghost\"");
        let c: MappingConfig = serde_json::from_str(&bad).unwrap();
        assert!(matches!(
            c.validate(),
            Err(ConfigError::Schema(SchemaError::UndeclaredEndpoint { .. }))
        ));
    }

    #[test]
    fn conversion_needs_unit() {
        let bad = MOVIE.replace("\"quantity_unit\": \"minute\",", "");
        let c: MappingConfig = serde_json::from_str(&bad).unwrap();
        assert!(matches!(c.validate(), Err(ConfigError::MissingUnit { .. })));
    }

    #[test]
    fn unknown_datatype_rejected() {
        let bad = MOVIE.replace("\"datatype\": \"int\"", "\"datatype\": \"bool\"");
        assert!(serde_json::from_str::<MappingConfig>(&bad).is_err());
    }
}
