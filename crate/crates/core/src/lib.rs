//! Association rule extraction from self-organizing map clusterings.
//!
//! The pipeline: load or synthesize a weighted object × feature dataset
//! ([`dataset`]), train a base SOM ([`som`]), stack its MultiSOM
//! generalization levels ([`multisom`]), then, for every cluster of every
//! level, derive threshold-free Type I rules and Apriori-backed Type II rules
//! ([`marc`]) using the cluster quality measures in [`metrics`]. [`report`]
//! aggregates per-level statistics and compares against a plain Apriori
//! baseline ([`apriori`]).
//!
//! ```
//! use marc_core::dataset::WeightedDataset;
//! use marc_core::marc::{mine_assignments, MarcParams, RuleType};
//! use marc_core::som::{ClusterAssignment, Neuron};
//!
//! let csv = "object,t1,t2,t3,t4,t5,t6\n\
//!            d1,3,6,4,0,1,0\nd2,5,7,6,0,0,2\nd3,3,5,4,3,0,4\n\
//!            d4,0,0,0,0,6,7\nd5,0,0,0,0,6,5\n";
//! let data = WeightedDataset::read_matrix_csv(csv.as_bytes(), "example").unwrap();
//! let (l, r) = (Neuron::new(0, 0), Neuron::new(0, 1));
//! let clusters = ClusterAssignment::new(1, 2, vec![l, l, l, r, r]).unwrap();
//!
//! let rules = mine_assignments([&clusters], &data, &MarcParams::default()).unwrap();
//! assert_eq!(rules.of_type(RuleType::TypeI).count(), 4);
//! assert!(rules.of_type(RuleType::TypeI).all(|r| r.confidence == 1.0));
//! ```

pub mod apriori;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod marc;
pub mod metrics;
pub mod model;
pub mod multisom;
pub mod report;
pub mod rule_io;
pub mod som;

pub use error::{Error, Result};
