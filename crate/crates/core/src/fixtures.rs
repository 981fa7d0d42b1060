//! The bundled `.ode` corpus. Every file is parsed, and its declared
//! integrals checked, on each call to [`fixture`].

use crate::error::{Error, Result};
use crate::specfile::{parse_spec, OdeSpec};

const SOURCES: &[(&str, &str)] = &[
    ("ralston", include_str!("../fixtures/ralston.ode")),
    ("lv2", include_str!("../fixtures/lv2.ode")),
    ("lv3", include_str!("../fixtures/lv3.ode")),
    ("ratode", include_str!("../fixtures/ratode.ode")),
    ("nonrat", include_str!("../fixtures/nonrat.ode")),
    ("jordan3", include_str!("../fixtures/jordan3.ode")),
    ("skew3", include_str!("../fixtures/skew3.ode")),
    ("fivedim-alg1", include_str!("../fixtures/fivedim-alg1.ode")),
    ("fivedim-complex", include_str!("../fixtures/fivedim-complex.ode")),
    ("circle-negative", include_str!("../fixtures/circle-negative.ode")),
];

pub const FIXTURE_NAMES: &[&str] = &[
    "ralston",
    "lv2",
    "lv3",
    "ratode",
    "nonrat",
    "jordan3",
    "skew3",
    "fivedim-alg1",
    "fivedim-complex",
    "circle-negative",
];

/// Fixtures whose declared integrals are all affine.
pub const AFFINE_FIXTURES: &[&str] = &["ralston", "lv2", "lv3", "ratode", "nonrat", "jordan3"];

pub fn fixture_source(name: &str) -> Result<&'static str> {
    SOURCES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| Error::UnknownFixture(name.to_string()))
}

pub fn fixture(name: &str) -> Result<OdeSpec> {
    parse_spec(fixture_source(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_loads() {
        assert_eq!(SOURCES.len(), FIXTURE_NAMES.len());
        for name in FIXTURE_NAMES {
            let spec = fixture(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(spec.name, *name);
        }
        assert!(matches!(fixture("nope"), Err(Error::UnknownFixture(_))));
    }
}
