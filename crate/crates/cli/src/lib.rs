//! File formats, experiment configuration and subcommand drivers for the
//! `stochvc` command-line tool.

pub mod commands;
pub mod config;
pub mod edgelist;

pub use config::{ExperimentConfig, Generator, GraphSource, Mode};
pub use edgelist::{parse_edge_list, parse_edge_list_str, parse_labeled_edge_list, write_edge_list, ParseError};
