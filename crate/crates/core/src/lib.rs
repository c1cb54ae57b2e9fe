//! Communication for omniscience: minimum sum-rate, fundamental partition,
//! optimal rate region, and fair rate allocations within it.
//!
//! ```
//! use std::sync::Arc;
//! use omnifair::fixtures::five_user_source;
//! use omnifair::omniscience::{min_sum_rate, SolveOptions};
//! use omnifair::shapley::shapley_exact;
//! use omnifair::value::Rational;
//!
//! let ctx = min_sum_rate(Arc::new(five_user_source()), SolveOptions::default()).unwrap();
//! assert_eq!(*ctx.r_co(), Rational::new(13, 2));
//! let shapley = shapley_exact(&ctx.whole()).unwrap();
//! assert_eq!(shapley.total(), Rational::new(13, 2));
//! ```

pub mod cli;
pub mod egalitarian;
pub mod error;
pub mod fixtures;
pub mod omniscience;
pub mod rate;
pub mod report;
pub mod setfn;
pub mod shapley;
pub mod source_model;
pub mod subset;
pub mod value;

pub use error::{Error, Result};
pub use omniscience::{min_sum_rate, GameContext, Partition, SolveOptions, Subgame};
pub use rate::RateVector;
pub use source_model::{EntropyOracle, LinearSource, PmfSource, Source, UserSet};
pub use subset::Subset;
pub use value::{Rational, Value};
