//! The five reference examples and their expected irreducibility values.

use serde::Serialize;

use crate::distribution::JointDistribution;
use crate::error::{Error, Result};
use crate::irreducibility::{full_report, IrreducibilityReport};
use crate::union_info::UnionMeasure;

/// Absolute tolerance for matching the expected table.
pub const TABLE_TOL: f64 = 1e-6;

/// A built-in example with its expected `(I(X;Y), IbE, IbDp, Ib2p, IbAp)`.
#[derive(Debug, Clone)]
pub struct NamedExample {
    pub name: &'static str,
    pub title: &'static str,
    pub tsv: &'static str,
    pub expected: [f64; 5],
}

impl NamedExample {
    pub fn distribution(&self) -> JointDistribution {
        JointDistribution::parse(self.tsv).expect("built-in example parses")
    }
}

pub const EXAMPLES: [NamedExample; 5] = [
    NamedExample { name: "xor", title: "Xor", tsv: include_str!("../data/xor.tsv"), expected: [1.0, 1.0, 1.0, 1.0, 1.0] },
    NamedExample {
        name: "xor_unique",
        title: "XorUnique",
        tsv: include_str!("../data/xor_unique.tsv"),
        expected: [2.0, 1.0, 0.0, 0.0, 0.0],
    },
    NamedExample {
        name: "double_xor",
        title: "DoubleXor",
        tsv: include_str!("../data/double_xor.tsv"),
        expected: [2.0, 2.0, 1.0, 0.0, 0.0],
    },
    NamedExample {
        name: "triple_xor",
        title: "TripleXor",
        tsv: include_str!("../data/triple_xor.tsv"),
        expected: [3.0, 3.0, 2.0, 1.0, 0.0],
    },
    NamedExample {
        name: "parity",
        title: "Parity",
        tsv: include_str!("../data/parity.tsv"),
        expected: [1.0, 1.0, 1.0, 1.0, 1.0],
    },
];

pub fn load_example(name: &str) -> Result<&'static NamedExample> {
    EXAMPLES.iter().find(|e| e.name == name).ok_or_else(|| Error::UnknownExample(name.to_string()))
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusRow {
    pub name: &'static str,
    pub expected: [f64; 5],
    pub computed: [f64; 5],
    pub max_abs_error: f64,
    pub matches: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusReport {
    pub measure: &'static str,
    pub tolerance: f64,
    pub rows: Vec<CorpusRow>,
    pub all_match: bool,
}

impl CorpusReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &CorpusRow> {
        self.rows.iter().filter(|r| !r.matches)
    }
}

/// Compares one computed report with the expected row.
pub fn compare(example: &NamedExample, report: &IrreducibilityReport) -> CorpusRow {
    let computed = report.values();
    let max_abs_error = computed.iter().zip(&example.expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    CorpusRow { name: example.name, expected: example.expected, computed, max_abs_error, matches: max_abs_error <= TABLE_TOL }
}

/// Runs every example and compares against the expected table.
pub fn verify_corpus(m: &UnionMeasure) -> Result<CorpusReport> {
    let rows = EXAMPLES
        .iter()
        .map(|e| Ok(compare(e, &full_report(&e.distribution(), m)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CorpusReport { measure: m.kind.name(), tolerance: TABLE_TOL, all_match: rows.iter().all(|r| r.matches), rows })
}
