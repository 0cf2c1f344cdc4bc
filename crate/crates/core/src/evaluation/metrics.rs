use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::iou3d;
use crate::error::{Error, Result};
use crate::geometry::OrientedBox3D;
use crate::io::Manifest;

/// IoU thresholds reported by default.
pub const THRESHOLDS: [f64; 2] = [0.25, 0.5];

/// A box with an identity and a class, either predicted or ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Labeled {
    pub id: u64,
    pub class_id: u32,
    pub obb: OrientedBox3D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

/// Rates derived from counts; empty denominators give 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(flatten)]
    pub counts: Counts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl From<Counts> for Metrics {
    fn from(c: Counts) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            counts: c,
            precision,
            recall,
            f1,
        }
    }
}

/// Per-class tallies and the accepted (prediction id, gt id, IoU) pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchResult {
    pub per_class: BTreeMap<u32, Counts>,
    pub pairs: Vec<(u64, u64, f64)>,
}

impl MatchResult {
    pub fn overall(&self) -> Counts {
        let mut total = Counts::default();
        for c in self.per_class.values() {
            total += *c;
        }
        total
    }
}

/// Greedy once-only matching within each class: candidate pairs in
/// descending IoU (ties by lower prediction id, then lower gt id) are accepted
/// when IoU ≥ `threshold` and both sides are still free.
pub fn match_predictions(
    preds: &[Labeled],
    gts: &[Labeled],
    threshold: f64,
) -> Result<MatchResult> {
    let classes: BTreeSet<u32> = preds.iter().chain(gts).map(|l| l.class_id).collect();
    let mut out = MatchResult::default();
    for class in classes {
        let p: Vec<&Labeled> = preds.iter().filter(|l| l.class_id == class).collect();
        let g: Vec<&Labeled> = gts.iter().filter(|l| l.class_id == class).collect();
        let mut cands = Vec::new();
        for (i, a) in p.iter().enumerate() {
            for (j, b) in g.iter().enumerate() {
                let v = iou3d(&a.obb, &b.obb)?;
                if v >= threshold && v > 0.0 {
                    cands.push((v, i, j));
                }
            }
        }
        cands.sort_by(|x, y| {
            y.0.total_cmp(&x.0)
                .then(p[x.1].id.cmp(&p[y.1].id))
                .then(g[x.2].id.cmp(&g[y.2].id))
        });
        let mut p_used = vec![false; p.len()];
        let mut g_used = vec![false; g.len()];
        let mut tp = 0;
        for (v, i, j) in cands {
            if !p_used[i] && !g_used[j] {
                p_used[i] = true;
                g_used[j] = true;
                tp += 1;
                out.pairs.push((p[i].id, g[j].id, v));
            }
        }
        out.per_class.insert(
            class,
            Counts {
                tp,
                fp: p.len() - tp,
                fn_: g.len() - tp,
            },
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class_id: u32,
    #[serde(flatten)]
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub threshold: f64,
    pub overall: Metrics,
    pub per_class: Vec<ClassMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalReport {
    pub thresholds: Vec<ThresholdReport>,
    pub matching_accuracy: Option<f64>,
    pub manifest: Manifest,
}

impl EvalReport {
    /// One row per class per threshold, then one overall row per threshold.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("class_id,threshold,tp,fp,fn,precision,recall,f1\n");
        let row = |s: &mut String, class: &str, t: f64, m: &Metrics| {
            s.push_str(&format!(
                "{class},{t},{},{},{},{},{},{}\n",
                m.counts.tp, m.counts.fp, m.counts.fn_, m.precision, m.recall, m.f1
            ));
        };
        for t in &self.thresholds {
            for c in &t.per_class {
                row(&mut s, &c.class_id.to_string(), t.threshold, &c.metrics);
            }
        }
        for t in &self.thresholds {
            row(&mut s, "overall", t.threshold, &t.overall);
        }
        s
    }
}

/// Scores predictions against ground truth at each threshold. `classes` is
/// the vocabulary; boxes of any other class are a schema error.
pub fn evaluate_run(
    preds: &[Labeled],
    gts: &[Labeled],
    classes: &[u32],
    thresholds: &[f64],
    matching_accuracy: Option<f64>,
    manifest: Manifest,
) -> Result<EvalReport> {
    let vocab: BTreeSet<u32> = classes.iter().copied().collect();
    for (what, set) in [("prediction", preds), ("ground truth", gts)] {
        if let Some(l) = set.iter().find(|l| !vocab.contains(&l.class_id)) {
            return Err(Error::schema(
                "class vocabulary",
                format!(
                    "{what} class {} is not among the configured categories",
                    l.class_id
                ),
            ));
        }
    }
    let mut reports = Vec::new();
    for &t in thresholds {
        let m = match_predictions(preds, gts, t)?;
        reports.push(ThresholdReport {
            threshold: t,
            overall: m.overall().into(),
            per_class: vocab
                .iter()
                .map(|&class_id| ClassMetrics {
                    class_id,
                    metrics: m
                        .per_class
                        .get(&class_id)
                        .copied()
                        .unwrap_or_default()
                        .into(),
                })
                .collect(),
        });
    }
    Ok(EvalReport {
        thresholds: reports,
        matching_accuracy,
        manifest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RigidPose;
    use nalgebra::Vector3;

    fn cube(id: u64, class_id: u32, x: f64) -> Labeled {
        Labeled {
            id,
            class_id,
            obb: OrientedBox3D::new(
                RigidPose::from_translation(Vector3::new(x, 0.0, 0.0)),
                Vector3::repeat(0.5),
            )
            .unwrap(),
        }
    }

    #[test]
    fn single_weak_match_counts() {
        // offset 0.5385 -> IoU 0.3
        let x = 1.0 - 0.6 / 1.3;
        let m = match_predictions(&[cube(0, 1, x)], &[cube(0, 1, 0.0)], 0.25).unwrap();
        let r = Metrics::from(m.overall());
        assert_eq!(
            r.counts,
            Counts {
                tp: 1,
                fp: 0,
                fn_: 0
            }
        );
        assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn duplicates_are_penalized() {
        let m = match_predictions(
            &[cube(0, 1, 0.0), cube(1, 1, 0.1)],
            &[cube(0, 1, 0.0)],
            0.25,
        )
        .unwrap();
        let r = Metrics::from(m.overall());
        assert_eq!(
            r.counts,
            Counts {
                tp: 1,
                fp: 1,
                fn_: 0
            }
        );
        assert_eq!(r.precision, 0.5);
        assert_eq!(r.recall, 1.0);
        assert!((r.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.pairs[0].0, 0);
    }

    #[test]
    fn ties_go_to_lower_prediction_id() {
        let m = match_predictions(
            &[cube(5, 1, 0.25), cube(2, 1, -0.25)],
            &[cube(0, 1, 0.0)],
            0.25,
        )
        .unwrap();
        assert_eq!(m.pairs[0].0, 2);
    }

    #[test]
    fn class_mismatch_is_fp_and_fn() {
        let m = match_predictions(&[cube(0, 1, 0.0)], &[cube(0, 2, 0.0)], 0.25).unwrap();
        assert_eq!(
            m.overall(),
            Counts {
                tp: 0,
                fp: 1,
                fn_: 1
            }
        );
    }

    #[test]
    fn empty_predictions_convention() {
        let r = evaluate_run(
            &[],
            &[cube(0, 1, 0.0)],
            &[1],
            &THRESHOLDS,
            None,
            Manifest::default(),
        )
        .unwrap();
        for t in &r.thresholds {
            assert_eq!(t.overall.precision, 0.0);
            assert_eq!(t.overall.recall, 0.0);
            assert_eq!(t.overall.f1, 0.0);
        }
    }

    #[test]
    fn csv_rows_and_thresholds() {
        let r = evaluate_run(
            &[cube(0, 1, 0.0)],
            &[cube(0, 1, 0.0)],
            &[1, 2, 3],
            &THRESHOLDS,
            Some(1.0),
            Manifest::default(),
        )
        .unwrap();
        let ts: Vec<f64> = r.thresholds.iter().map(|t| t.threshold).collect();
        assert_eq!(ts, vec![0.25, 0.5]);
        assert_eq!(r.to_csv().lines().count(), 1 + 3 * 2 + 2);
        assert_eq!(r.thresholds[0].overall.f1, 1.0);
    }

    #[test]
    fn unknown_class_is_schema_error() {
        let err = evaluate_run(
            &[cube(0, 9, 0.0)],
            &[],
            &[1],
            &THRESHOLDS,
            None,
            Manifest::default(),
        )
        .unwrap_err();
        assert!(err.is_input_error());
    }
}
