use super::CliError;
use crate::parser::{parse_system_file, SystemSpec};

/// Built-in systems: name, one-line description, file contents.
pub const EXAMPLES: &[(&str, &str, &str)] = &[
    (
        "example1",
        "H = (p^2 + 1/q^2)/2 with time shift, dilation and projective symmetries",
        include_str!("../../systems/example1.toml"),
    ),
    (
        "coulomb",
        "H = p^2/2 + 1/q; the scaling symmetry gives no first integral",
        include_str!("../../systems/coulomb.toml"),
    ),
    (
        "oscillator",
        "H = (p^2 + q^2)/2 with a time-dependent angle integral",
        include_str!("../../systems/oscillator.toml"),
    ),
    (
        "kepler2",
        "planar Kepler motion: energy, angular momentum, Runge-Lenz vector",
        include_str!("../../systems/kepler2.toml"),
    ),
    (
        "kepler3",
        "spatial Kepler motion: energy, angular momentum, Runge-Lenz vector",
        include_str!("../../systems/kepler3.toml"),
    ),
];

pub fn example_names() -> impl Iterator<Item = &'static str> {
    EXAMPLES.iter().map(|(name, _, _)| *name)
}

/// Text of a built-in system file.
pub fn example_source(name: &str) -> Option<&'static str> {
    EXAMPLES.iter().find(|(n, _, _)| *n == name).map(|(_, _, text)| *text)
}

pub fn load_example(name: &str) -> Result<SystemSpec, CliError> {
    let text = example_source(name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown example `{name}` (available: {})",
            example_names().collect::<Vec<_>>().join(", ")
        ))
    })?;
    Ok(parse_system_file(text)?)
}
