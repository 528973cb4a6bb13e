//! Nearest-neighbour matching in weight space with threshold rejection.

use std::collections::HashSet;

use crate::exec::{map_range, Execution};
use crate::imageio::DatasetManifest;
use crate::linalg::{squared_distance, Vector};
use crate::trainer::{EigenspaceModel, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Known { label: String, matched_index: usize, distance: f64 },
    /// No training image within the threshold; `distance` is the closest one.
    Unknown { distance: f64 },
}

impl Decision {
    pub fn distance(&self) -> f64 {
        match self {
            Decision::Known { distance, .. } | Decision::Unknown { distance } => *distance,
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            Decision::Known { label, .. } => Some(label),
            Decision::Unknown { .. } => None,
        }
    }

    pub fn is_known(&self) -> bool {
        matches!(self, Decision::Known { .. })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ConfusionTally {
    pub true_positive: u64,
    pub true_negative: u64,
    pub false_positive: u64,
    pub false_negative: u64,
    pub total: u64,
}

impl ConfusionTally {
    /// Builds a tally whose total is the sum of the four cells.
    pub fn new(true_positive: u64, true_negative: u64, false_positive: u64, false_negative: u64) -> Self {
        ConfusionTally {
            true_positive,
            true_negative,
            false_positive,
            false_negative,
            total: true_positive + true_negative + false_positive + false_negative,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.true_positive + self.true_negative + self.false_positive + self.false_negative == self.total
    }

    /// Files one decision against the sample's true label.
    pub fn record(&mut self, decision: &Decision, truth: &str, label_in_model: bool) {
        match decision {
            Decision::Known { label, .. } if label == truth => self.true_positive += 1,
            Decision::Known { .. } => self.false_positive += 1,
            Decision::Unknown { .. } if label_in_model => self.false_negative += 1,
            Decision::Unknown { .. } => self.true_negative += 1,
        }
        self.total += 1;
    }
}

/// Projects `image`, finds the nearest training weight vector (lowest index
/// on ties) and accepts it when the distance is at most the threshold.
pub fn recognize(model: &EigenspaceModel, image: &Vector) -> Result<Decision> {
    let omega = model.project(image)?;
    let weights = model.training_weights();
    let mut best = (0usize, f64::INFINITY);
    for j in 0..model.m() {
        let col: Vec<f64> = (0..model.k()).map(|i| weights.get(i, j)).collect();
        let d = squared_distance(omega.as_slice(), &col).sqrt();
        if d < best.1 {
            best = (j, d);
        }
    }
    let (index, distance) = best;
    Ok(if distance <= model.threshold() {
        Decision::Known { label: model.labels()[index].clone(), matched_index: index, distance }
    } else {
        Decision::Unknown { distance }
    })
}

pub fn evaluate(model: &EigenspaceModel, testset: &DatasetManifest) -> Result<(ConfusionTally, Vec<Decision>)> {
    evaluate_with(model, testset, Execution::default())
}

/// Recognizes every test sample and tallies the outcomes:
/// a Known decision is a true positive when its label matches and a false
/// positive otherwise; an Unknown decision is a false negative when the true
/// label exists in the model and a true negative when it does not.
pub fn evaluate_with(
    model: &EigenspaceModel,
    testset: &DatasetManifest,
    exec: Execution,
) -> Result<(ConfusionTally, Vec<Decision>)> {
    let samples = testset.samples();
    let decisions = map_range(exec, samples.len(), |i| recognize(model, &samples[i].vector))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let vocabulary: HashSet<&str> = model.labels().iter().map(String::as_str).collect();
    let mut tally = ConfusionTally::default();
    for (sample, decision) in samples.iter().zip(&decisions) {
        tally.record(decision, &sample.label, vocabulary.contains(sample.label.as_str()));
    }
    Ok((tally, decisions))
}
