//! Accuracy, recall, precision and prevalence from a confusion tally.

use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::format::format_f64;
use crate::recognizer::ConfusionTally;

/// Ratio with a zero denominator is `None`, printed as `undefined`.
fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub tally: ConfusionTally,
    pub accuracy: Option<f64>,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub prevalence: Option<f64>,
}

/// accuracy = (TP+TN)/total, recall = TP/(TP+FN), precision = TP/(TP+FP),
/// prevalence = (TP+FN)/total.
pub fn compute_metrics(tally: &ConfusionTally) -> MetricsReport {
    let t = tally;
    MetricsReport {
        tally: *t,
        accuracy: ratio(t.true_positive + t.true_negative, t.total),
        recall: ratio(t.true_positive, t.true_positive + t.false_negative),
        precision: ratio(t.true_positive, t.true_positive + t.false_positive),
        prevalence: ratio(t.true_positive + t.false_negative, t.total),
    }
}

#[derive(Serialize)]
struct JsonReport {
    tp: u64,
    tn: u64,
    fp: u64,
    #[serde(rename = "fn")]
    fn_: u64,
    total: u64,
    accuracy: Option<f64>,
    recall: Option<f64>,
    precision: Option<f64>,
    prevalence: Option<f64>,
}

impl MetricsReport {
    fn metrics(&self) -> [(&'static str, Option<f64>); 4] {
        [
            ("accuracy", self.accuracy),
            ("recall", self.recall),
            ("precision", self.precision),
            ("prevalence", self.prevalence),
        ]
    }

    /// One `metric=value` line per field.
    pub fn to_text(&self) -> String {
        let t = &self.tally;
        let mut out = String::new();
        for (name, n) in [
            ("tp", t.true_positive),
            ("tn", t.true_negative),
            ("fp", t.false_positive),
            ("fn", t.false_negative),
            ("total", t.total),
        ] {
            writeln!(out, "{name}={n}").unwrap();
        }
        for (name, value) in self.metrics() {
            match value {
                Some(x) => writeln!(out, "{name}={}", format_f64(x)).unwrap(),
                None => writeln!(out, "{name}=undefined").unwrap(),
            }
        }
        out
    }

    /// Single JSON object; undefined metrics are `null`.
    pub fn to_json(&self) -> String {
        let t = &self.tally;
        serde_json::to_string(&JsonReport {
            tp: t.true_positive,
            tn: t.true_negative,
            fp: t.false_positive,
            fn_: t.false_negative,
            total: t.total,
            accuracy: self.accuracy,
            recall: self.recall,
            precision: self.precision,
            prevalence: self.prevalence,
        })
        .expect("plain struct serializes")
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_table() {
        let r = compute_metrics(&ConfusionTally::new(10, 0, 0, 0));
        assert_eq!(r.recall, Some(1.0));
        assert_eq!(r.precision, Some(1.0));
        assert_eq!(r.prevalence, Some(1.0));
        assert_eq!(r.accuracy, Some(1.0));
    }

    #[test]
    fn empty_denominators() {
        let r = compute_metrics(&ConfusionTally::new(0, 5, 0, 0));
        assert_eq!(r.recall, None);
        assert_eq!(r.precision, None);
        assert_eq!(r.prevalence, Some(0.0));
        assert_eq!(r.accuracy, Some(1.0));

        let r = compute_metrics(&ConfusionTally::default());
        assert_eq!((r.accuracy, r.prevalence), (None, None));
    }

    #[test]
    fn mixed_tally() {
        // TP=3 TN=0 FP=1 FN=1: recall 3/4, precision 3/4, prevalence 4/5, accuracy 3/5
        let r = compute_metrics(&ConfusionTally::new(3, 0, 1, 1));
        assert_eq!(r.recall, Some(0.75));
        assert_eq!(r.precision, Some(0.75));
        assert_eq!(r.prevalence, Some(0.8));
        assert_eq!(r.accuracy, Some(0.6));
    }

    #[test]
    fn text_and_json() {
        let r = compute_metrics(&ConfusionTally::new(0, 5, 0, 0));
        assert_eq!(
            r.to_text(),
            "tp=0\ntn=5\nfp=0\nfn=0\ntotal=5\naccuracy=1\nrecall=undefined\nprecision=undefined\nprevalence=0\n"
        );
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["tn"], 5);
        assert_eq!(json["fn"], 0);
        assert_eq!(json["accuracy"], 1.0);
        assert!(json["recall"].is_null());
        assert_eq!(json.as_object().unwrap().len(), 9);
    }
}
