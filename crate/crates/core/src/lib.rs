//! Property-graph data model, Cypher-subset engine, RDF transformation, task
//! generation and execution metrics. Everything here is `no_std` + `alloc`;
//! file and network IO live in the `cypherkit` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod budget;
pub mod cypher;
pub mod generator;
pub mod graph;
pub mod metrics;
pub mod rdf;
pub mod schema;
pub mod schema_doc;
pub mod synthetic;
pub mod task;
pub mod value;

pub use budget::{Budget, Deadline, NoDeadline};
pub use graph::{Entity, EntityId, PropertyGraph, Relation, RelationId};
pub use schema::GraphSchema;
pub use value::{Datatype, Date, PropertyValue};
