//! Acceptance gates. Every report carries all of them, in this order.

use serde::{Deserialize, Serialize};

/// `(id, short name)` of every gate.
pub const CRITERIA: [(u8, &str); 15] = [
    (1, "eigensolver-oracle"),
    (2, "eigen-residual"),
    (3, "ground-state-tail"),
    (4, "unitary-equivalence"),
    (5, "bg-index"),
    (6, "martingale-problem"),
    (7, "stationarity"),
    (8, "thinning-law"),
    (9, "levy-baseline"),
    (10, "spectrum-pure-jump"),
    (11, "spectrum-diffusive"),
    (12, "covering-sets"),
    (13, "dyadic-counts"),
    (14, "kato-diagnostic"),
    (15, "determinism"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    pub id: u8,
    pub name: String,
    pub status: GateStatus,
    /// Only hard gates decide the exit status.
    pub hard: bool,
    pub detail: String,
}

impl GateResult {
    pub fn failed_hard(&self) -> bool {
        self.hard && self.status == GateStatus::Fail
    }
}

/// Collects gate outcomes; any id never set is reported as not applicable.
#[derive(Debug)]
pub struct GateBook {
    exploratory: bool,
    gates: Vec<GateResult>,
}

impl GateBook {
    pub fn new(exploratory: bool) -> Self {
        let gates = CRITERIA
            .iter()
            .map(|&(id, name)| GateResult {
                id,
                name: name.to_string(),
                status: GateStatus::NotApplicable,
                hard: false,
                detail: "not applicable to this scenario".into(),
            })
            .collect();
        Self { exploratory, gates }
    }

    pub fn set(&mut self, id: u8, pass: bool, detail: impl Into<String>) {
        let g = &mut self.gates[id as usize - 1];
        g.status = if pass { GateStatus::Pass } else { GateStatus::Fail };
        g.hard = !self.exploratory;
        g.detail = detail.into();
    }

    pub fn fail(&mut self, id: u8, detail: impl Into<String>) {
        self.set(id, false, detail);
    }

    pub fn finish(self) -> Vec<GateResult> {
        self.gates
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_dense_and_names_unique() {
        for (k, (id, _)) in CRITERIA.iter().enumerate() {
            assert_eq!(*id as usize, k + 1);
        }
        let mut names: Vec<&str> = CRITERIA.iter().map(|c| c.1).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), CRITERIA.len());
    }

    #[test]
    fn exploratory_gates_never_bite() {
        let mut b = GateBook::new(true);
        b.fail(3, "x");
        let g = b.finish();
        assert_eq!(g.len(), 15);
        assert_eq!(g[2].status, GateStatus::Fail);
        assert!(!g.iter().any(GateResult::failed_hard));
    }
}
