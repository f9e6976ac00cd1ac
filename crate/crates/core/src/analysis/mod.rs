//! Verifiers, the clique extractor, and the Ramsey tools.

mod extract;
mod ramsey;
mod verify;

use std::fmt;

pub use extract::{check_certificate, extract_clique, CliqueCertificate, ExtractOptions, StepWitness};
pub use ramsey::{
    brute_force_mono_clique, dense_pattern_labels, index_colouring, longest_decreasing, longest_increasing,
    max_mono_clique_prefix, mono_dense_subset, AllBlue, AllRed, Colour, DenominatorParity, DenseCase, DenseSubset,
    Inconclusive, VertexColouring,
};
pub use verify::{
    check_pair_disjointness, density_witnesses, pair_disjointness, reconstruct_records, verify_maker_strategy,
    verify_pairing, verify_trace, DensityWitness, MakerReplay,
};

/// Line-oriented verdict: `OK` or `FAIL <n> violations`, then one line per
/// violation, then informational notes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub violations: Vec<String>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violation(&mut self, msg: impl Into<String>) {
        self.violations.push(msg.into());
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    pub fn merge(&mut self, other: Report) {
        self.violations.extend(other.violations);
        self.notes.extend(other.notes);
    }

    pub fn verdict(&self) -> String {
        if self.is_ok() {
            "OK".into()
        } else {
            format!("FAIL {} violations", self.violations.len())
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.verdict())?;
        for v in &self.violations {
            writeln!(f, "violation: {v}")?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}
