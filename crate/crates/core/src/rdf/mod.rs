//! RDF statements to schema-enforced property graphs.

mod build;
mod config;
mod convert;
mod rank;
mod source;
mod statement;
mod units;

pub use build::{build_graph, fetch_conforming_relations, BuildError, Counts, TransformStats};
pub use config::{ConfigError, EntityMapping, MappingConfig, PropertyMapping, RelationMapping};
pub use convert::{convert_property_value, parse_time, DiscardReason, TimeValue};
pub use rank::select_by_rank;
pub use source::{Instance, MemorySource, StatementSource, INSTANCE_OF, LABEL};
pub use statement::{Qualifier, Rank, RawValue, Statement};
pub use units::{UnitEntry, UnitError, UnitTable};
