use std::fmt::Write as _;

use serde::Serialize;

use crate::descriptor::Descriptor;
use crate::metrics::PrCurve;

/// One accuracy measurement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub descriptor: Descriptor,
    pub max_window: usize,
    /// Noise kind, or `none`.
    pub noise: String,
    pub param: f64,
    /// Trial index for noisy runs, partition or fold index for noise-free runs.
    pub trial: usize,
    pub accuracy: f64,
}

impl ResultRow {
    fn group(&self) -> (Descriptor, usize, &str, u64) {
        (self.descriptor, self.max_window, &self.noise, self.param.to_bits())
    }
}

/// Mean accuracy of consecutive rows sharing descriptor, window, noise and parameter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupMean {
    pub descriptor: Descriptor,
    pub max_window: usize,
    pub noise: String,
    pub param: f64,
    pub count: usize,
    pub accuracy: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn push(&mut self, row: ResultRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: ResultTable) {
        self.rows.extend(other.rows);
    }

    /// Group means in first-appearance order.
    pub fn means(&self) -> Vec<GroupMean> {
        let mut out: Vec<(GroupMean, f64)> = Vec::new();
        for row in &self.rows {
            match out.iter_mut().find(|(m, _)| {
                (m.descriptor, m.max_window, m.noise.as_str(), m.param.to_bits()) == row.group()
            }) {
                Some((m, sum)) => {
                    m.count += 1;
                    *sum += row.accuracy;
                }
                None => out.push((
                    GroupMean {
                        descriptor: row.descriptor,
                        max_window: row.max_window,
                        noise: row.noise.clone(),
                        param: row.param,
                        count: 1,
                        accuracy: 0.0,
                    },
                    row.accuracy,
                )),
            }
        }
        out.into_iter()
            .map(|(mut m, sum)| {
                m.accuracy = sum / m.count as f64;
                m
            })
            .collect()
    }

    /// Mean accuracy of the group with this noise kind and parameter.
    pub fn mean_for(&self, noise: &str, param: f64) -> Option<f64> {
        self.means()
            .into_iter()
            .find(|m| m.noise == noise && m.param == param)
            .map(|m| m.accuracy)
    }

    /// Trial rows, then one `mean` row per group.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("descriptor,max_window,noise,param,trial,accuracy\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{},{}", r.descriptor, r.max_window, r.noise, r.param, r.trial, r.accuracy);
        }
        for m in self.means() {
            let _ = writeln!(out, "{},{},{},{},mean,{}", m.descriptor, m.max_window, m.noise, m.param, m.accuracy);
        }
        out
    }
}

/// A PR curve tagged with the run that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct RetrievalCurve {
    pub descriptor: Descriptor,
    pub max_window: usize,
    pub noise: String,
    pub param: f64,
    pub curve: PrCurve,
}

pub fn retrieval_csv(curves: &[RetrievalCurve]) -> String {
    let mut out = String::from("descriptor,max_window,noise,param,k,recall,precision\n");
    for c in curves {
        for ((k, r), p) in c.curve.ks.iter().zip(&c.curve.recall).zip(&c.curve.precision) {
            let _ = writeln!(out, "{},{},{},{},{k},{r},{p}", c.descriptor, c.max_window, c.noise, c.param);
        }
    }
    out
}
