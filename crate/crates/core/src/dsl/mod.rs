pub mod ast;
pub mod check;
pub mod corpus;
pub mod parse;

pub use ast::{Expr, MinMaxMap};
pub use check::{
    check_dt_nonexpansive, check_order_preserving, check_subhomogeneous, CheckOutcome,
    CheckReport, Property, Sampler, Witness,
};
pub use corpus::{corpus, random_map, CorpusConfig};
pub use parse::parse_map;
