//! Built-in scenarios, shipped as TOML next to the crate.

use serde::Serialize;

use super::config::ScenarioConfig;
use crate::error::Result;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegistryEntry {
    pub name: &'static str,
    pub summary: &'static str,
    #[serde(skip)]
    pub toml: &'static str,
}

impl RegistryEntry {
    pub fn config(&self) -> Result<ScenarioConfig> {
        ScenarioConfig::from_toml(self.toml)
    }
}

macro_rules! entry {
    ($name:literal, $summary:literal) => {
        RegistryEntry {
            name: $name,
            summary: $summary,
            toml: include_str!(concat!("../../scenarios/", $name, ".toml")),
        }
    };
}

const ENTRIES: [RegistryEntry; 7] = [
    entry!("harmonic-brownian", "sigma = 1, no jumps, V = x^2/2"),
    entry!("stable08-poly", "pure stable, alpha = 0.8, V = x^4"),
    entry!("stable12-poly", "pure stable, alpha = 1.2, V = x^4"),
    entry!("stable15-poly", "pure stable, alpha = 1.5, V = x^4; spectrum and Levy baseline"),
    entry!("stable15-bm-poly", "sigma = 1 plus stable alpha = 1.5 (scale 0.25), V = x^4; spectrum"),
    entry!("logpert-poly", "log-perturbed density with index 2, V = x^4"),
    entry!("well-stable15", "pure stable, alpha = 1.5, square well; exploratory"),
];

pub fn entries() -> &'static [RegistryEntry] {
    &ENTRIES
}

pub fn find(name: &str) -> Option<&'static RegistryEntry> {
    ENTRIES.iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_consistent() {
        assert!(!entries().is_empty());
        for e in entries() {
            let c = e.config().unwrap();
            assert_eq!(c.name, e.name);
            assert!(!c.reference.curve.is_empty());
        }
        let exploratory: Vec<&str> =
            entries().iter().filter(|e| e.config().unwrap().exploratory).map(|e| e.name).collect();
        assert_eq!(exploratory, vec!["well-stable15"]);
        assert!(find("stable15-poly").is_some());
        assert!(find("nope").is_none());
    }
}
