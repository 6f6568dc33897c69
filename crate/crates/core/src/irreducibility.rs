//! The four irreducibility measures and the combined report.
//!
//! Each is `I(X; Y)` minus the union information of some collection of
//! parts, clamped to `[0, I(X; Y)]`:
//!
//! * IbE: the elements `{X1}, ..., {Xn}`.
//! * IbDp: the best bipartition.
//! * Ib2p: the best pair of Almosts.
//! * IbAp: all Almosts.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::distribution::JointDistribution;
use crate::error::{Error, Result};
use crate::parts::{self, PartFamily};
use crate::union_info::UnionMeasure;

/// Slack allowed in `0 <= IbAp <= Ib2p <= IbDp <= IbE <= I(X;Y)`.
pub const ORDERING_SLACK: f64 = 1e-6;

/// One measure: clamped value, unclamped value and, for the maximizing
/// measures, the winning family with every candidate's union value.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureValue {
    pub value: f64,
    pub raw: f64,
    pub witness: Option<String>,
    pub candidates: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IrreducibilityReport {
    pub whole_mi: f64,
    pub ibe: MeasureValue,
    pub ibdp: MeasureValue,
    pub ib2p: MeasureValue,
    pub ibap: MeasureValue,
    pub measure: UnionMeasure,
}

fn predictors(d: &JointDistribution) -> Result<usize> {
    let n = d.predictors().len();
    if n < 2 {
        return Err(Error::TooFewPredictors(n));
    }
    Ok(n)
}

fn clamp(whole: f64, union: f64) -> (f64, f64) {
    let raw = whole - union;
    (raw.clamp(0.0, whole), raw)
}

fn single(d: &JointDistribution, m: &UnionMeasure, family: &PartFamily) -> Result<MeasureValue> {
    let whole = d.whole_mi();
    let union = m.union_information(d, family)?;
    let (value, raw) = clamp(whole, union);
    Ok(MeasureValue { value, raw, witness: None, candidates: vec![(family.label(&names(d)), union)] })
}

/// Maximizes union information over `families`; ties within the measure
/// tolerance go to the earliest family.
fn best_of(d: &JointDistribution, m: &UnionMeasure, families: Vec<(String, PartFamily)>) -> Result<MeasureValue> {
    let whole = d.whole_mi();
    let values: Vec<f64> =
        families.par_iter().map(|(_, f)| m.union_information(d, f)).collect::<Result<Vec<_>>>()?;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let win = values.iter().position(|&v| v >= max - m.settings.tolerance).expect("nonempty family list");
    let (value, raw) = clamp(whole, max);
    Ok(MeasureValue {
        value,
        raw,
        witness: Some(families[win].0.clone()),
        candidates: families.into_iter().map(|(l, _)| l).zip(values).collect(),
    })
}

fn names(d: &JointDistribution) -> Vec<String> {
    d.predictors().iter().map(|&i| d.names()[i].clone()).collect()
}

/// Information beyond the elements.
pub fn ibe(d: &JointDistribution, m: &UnionMeasure) -> Result<MeasureValue> {
    single(d, m, &parts::elements(predictors(d)?)?)
}

/// Information beyond disjoint parts, maximized over bipartitions.
pub fn ibdp(d: &JointDistribution, m: &UnionMeasure) -> Result<MeasureValue> {
    let names = names(d);
    let fams = parts::all_bipartitions(predictors(d)?)?.into_iter().map(|b| (b.label(&names), b.family())).collect();
    best_of(d, m, fams)
}

/// Information beyond two parts, maximized over pairs of Almosts.
pub fn ib2p(d: &JointDistribution, m: &UnionMeasure) -> Result<MeasureValue> {
    let names = names(d);
    let fams = parts::almost_pairs(predictors(d)?)?.into_iter().map(|f| (f.label(&names), f)).collect();
    best_of(d, m, fams)
}

/// Information beyond all parts, via the Almosts.
pub fn ibap(d: &JointDistribution, m: &UnionMeasure) -> Result<MeasureValue> {
    single(d, m, &parts::all_almosts(predictors(d)?)?)
}

/// All four measures; fails if they are out of order.
pub fn full_report(d: &JointDistribution, m: &UnionMeasure) -> Result<IrreducibilityReport> {
    predictors(d)?;
    m.settings.validate()?;
    let report = IrreducibilityReport {
        whole_mi: d.whole_mi(),
        ibe: ibe(d, m)?,
        ibdp: ibdp(d, m)?,
        ib2p: ib2p(d, m)?,
        ibap: ibap(d, m)?,
        measure: *m,
    };
    report.check_ordering()?;
    Ok(report)
}

impl IrreducibilityReport {
    /// `(whole_mi, ibe, ibdp, ib2p, ibap)`.
    pub fn values(&self) -> [f64; 5] {
        [self.whole_mi, self.ibe.value, self.ibdp.value, self.ib2p.value, self.ibap.value]
    }

    pub fn check_ordering(&self) -> Result<()> {
        let [whole, e, dp, p2, ap] = self.values();
        let chain = [("0", 0.0), ("IbAp", ap), ("Ib2p", p2), ("IbDp", dp), ("IbE", e), ("I(X;Y)", whole)];
        for w in chain.windows(2) {
            if w[0].1 > w[1].1 + ORDERING_SLACK {
                return Err(Error::OrderingViolation(format!("{} = {:.9} > {} = {:.9}", w[0].0, w[0].1, w[1].0, w[1].1)));
            }
        }
        Ok(())
    }

    /// Stable JSON with nine decimals per value.
    pub fn to_json(&self) -> Value {
        let s = &self.measure.settings;
        json!({
            "whole_mi": fixed(self.whole_mi),
            "ibe": fixed(self.ibe.value),
            "ibdp": fixed(self.ibdp.value),
            "ib2p": fixed(self.ib2p.value),
            "ibap": fixed(self.ibap.value),
            "witnesses": {
                "ibdp": self.ibdp.witness,
                "ib2p": self.ib2p.witness,
            },
            "union": {
                "elements": candidates(&self.ibe.candidates),
                "bipartitions": candidates(&self.ibdp.candidates),
                "almost_pairs": candidates(&self.ib2p.candidates),
                "almosts": candidates(&self.ibap.candidates),
            },
            "settings": {
                "measure": self.measure.kind.name(),
                "tolerance": s.tolerance,
                "max_iterations": s.max_iterations,
                "restarts": s.restarts,
                "seed": s.seed,
            },
            "residuals": {
                "ibe": fixed(self.ibe.raw - self.ibe.value),
                "ibdp": fixed(self.ibdp.raw - self.ibdp.value),
                "ib2p": fixed(self.ib2p.raw - self.ib2p.value),
                "ibap": fixed(self.ibap.raw - self.ibap.value),
            },
        })
    }

    /// One header line and one value line.
    pub fn to_tsv(&self) -> String {
        let v = self.values();
        format!(
            "whole_mi\tibe\tibdp\tib2p\tibap\n{}\t{}\t{}\t{}\t{}\n",
            fmt9(v[0]),
            fmt9(v[1]),
            fmt9(v[2]),
            fmt9(v[3]),
            fmt9(v[4])
        )
    }

    pub fn to_human(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("I(X;Y) = {} bits\n", fmt9(self.whole_mi)));
        for (name, mv) in [("IbE", &self.ibe), ("IbDp", &self.ibdp), ("Ib2p", &self.ib2p), ("IbAp", &self.ibap)] {
            out.push_str(&format!("{name:<5}= {}", fmt9(mv.value)));
            if let Some(w) = &mv.witness {
                out.push_str(&format!("   best {w}"));
            }
            out.push('\n');
            for (label, u) in &mv.candidates {
                out.push_str(&format!("        union {label} = {}\n", fmt9(*u)));
            }
        }
        out
    }
}

/// Formats with nine decimals, without a negative zero.
pub fn fmt9(x: f64) -> String {
    let s = format!("{x:.9}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

/// A JSON number printed with exactly nine decimals.
pub fn fixed(x: f64) -> Value {
    Value::Number(fmt9(x).parse().expect("formatted float is a JSON number"))
}

fn candidates(c: &[(String, f64)]) -> Value {
    Value::Array(c.iter().map(|(label, v)| json!({ "family": label, "union": fixed(*v) })).collect())
}
