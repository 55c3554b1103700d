//! Bit-exact serialization and experiment configuration.

mod config;
mod ffpk;

pub use config::{parse_config, parse_config_str, ExperimentConfig};
pub use ffpk::{
    crc32, load_dataset, load_potential, read_container, save_dataset, save_potential,
    write_container, ArrayData, NamedArray,
};
