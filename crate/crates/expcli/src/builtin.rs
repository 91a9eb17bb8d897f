//! Configs shipped with the binary, addressable as `builtin:<name>`.

use crate::config::{parse_config, ConfigError, ExperimentConfig};

pub const BUILTIN: &[(&str, &str)] = &[
    ("group1", include_str!("../configs/group1.toml")),
    ("group1b", include_str!("../configs/group1b.toml")),
    ("group1c", include_str!("../configs/group1c.toml")),
    ("group1c-sv256", include_str!("../configs/group1c-sv256.toml")),
    ("group1-singular", include_str!("../configs/group1-singular.toml")),
    ("table1", include_str!("../configs/table1.toml")),
    ("group2", include_str!("../configs/group2.toml")),
    ("group2b", include_str!("../configs/group2b.toml")),
    ("group2c", include_str!("../configs/group2c.toml")),
    ("group3", include_str!("../configs/group3.toml")),
    ("group3-hermitian", include_str!("../configs/group3-hermitian.toml")),
];

pub fn builtin_source(name: &str) -> Option<&'static str> {
    BUILTIN.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn builtin(name: &str) -> Option<Result<ExperimentConfig, ConfigError>> {
    builtin_source(name).map(parse_config)
}
