//! Detection metrics: IoU, greedy matching, 101-point interpolated AP, mAP.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::BoundingBox;
use crate::error::{Error, Result};
use crate::report::MetricReport;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: BoundingBox,
    pub class_id: usize,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthBox {
    pub bbox: BoundingBox,
    pub class_id: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
}

pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let w = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let h = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let inter = w * h;
    if inter == 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Order in which predictions are consumed: descending score, ties by input order.
pub fn score_order(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));
    order
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// Prediction indices in processing order.
    pub order: Vec<usize>,
    /// TP (true) / FP (false) per entry of `order`.
    pub flags: Vec<bool>,
    pub false_negatives: usize,
}

/// Greedy matching for one image and one class.
///
/// Each prediction, best score first, takes the still-unmatched ground truth
/// with the highest IoU, provided that IoU reaches `iou_threshold`.
pub fn match_detections(
    preds: &[Detection],
    gts: &[GroundTruthBox],
    iou_threshold: f64,
) -> MatchResult {
    let scores: Vec<f64> = preds.iter().map(|p| p.score).collect();
    let order = score_order(&scores);
    let mut used = vec![false; gts.len()];
    let mut flags = Vec::with_capacity(preds.len());
    for &pi in &order {
        let mut best: Option<(usize, f64)> = None;
        for (gi, gt) in gts.iter().enumerate() {
            if used[gi] {
                continue;
            }
            let v = iou(&preds[pi].bbox, &gt.bbox);
            if v >= iou_threshold && best.is_none_or(|(_, b)| v > b) {
                best = Some((gi, v));
            }
        }
        match best {
            Some((gi, _)) => {
                used[gi] = true;
                flags.push(true);
            }
            None => flags.push(false),
        }
    }
    let false_negatives = used.iter().filter(|u| !**u).count();
    MatchResult {
        order,
        flags,
        false_negatives,
    }
}

/// Cumulative precision/recall after each flag.
pub fn pr_curve(flags: &[bool], n_gt: usize) -> Vec<PrPoint> {
    let mut tp = 0usize;
    let mut out = Vec::with_capacity(flags.len());
    for (i, &f) in flags.iter().enumerate() {
        if f {
            tp += 1;
        }
        out.push(PrPoint {
            recall: if n_gt == 0 { 0.0 } else { tp as f64 / n_gt as f64 },
            precision: tp as f64 / (i + 1) as f64,
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragePrecision {
    pub value: f64,
    /// Set when `n_gt == 0`; `value` is then reported as 0.
    pub no_ground_truth: bool,
}

pub const RECALL_POINTS: usize = 101;

/// 101-point interpolated AP over score-ordered TP/FP flags.
pub fn average_precision(flags: &[bool], n_gt: usize) -> AveragePrecision {
    if n_gt == 0 {
        return AveragePrecision {
            value: 0.0,
            no_ground_truth: true,
        };
    }
    let curve = pr_curve(flags, n_gt);
    // precision envelope: best precision at any recall to the right
    let mut envelope = vec![0.0f64; curve.len()];
    let mut best = 0.0f64;
    for i in (0..curve.len()).rev() {
        best = best.max(curve[i].precision);
        envelope[i] = best;
    }
    let mut sum = 0.0;
    let mut cursor = 0;
    for k in 0..RECALL_POINTS {
        let r = k as f64 / 100.0;
        while cursor < curve.len() && curve[cursor].recall < r {
            cursor += 1;
        }
        if cursor < curve.len() {
            sum += envelope[cursor];
        }
    }
    AveragePrecision {
        value: sum / RECALL_POINTS as f64,
        no_ground_truth: false,
    }
}

/// IoU thresholds 0.50, 0.55, ..., 0.95.
pub fn coco_thresholds() -> Vec<f64> {
    (0..10).map(|i| (50 + 5 * i) as f64 / 100.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapMode {
    #[serde(rename = "50")]
    Map50,
    #[serde(rename = "50-95")]
    Map50To95,
}

impl MapMode {
    pub fn thresholds(self) -> Vec<f64> {
        match self {
            MapMode::Map50 => vec![0.5],
            MapMode::Map50To95 => coco_thresholds(),
        }
    }
}

impl std::str::FromStr for MapMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "50" => Ok(MapMode::Map50),
            "50-95" => Ok(MapMode::Map50To95),
            _ => Err(Error::invalid(format!("mAP mode must be 50 or 50-95, got {s:?}"))),
        }
    }
}

/// One line of a prediction or ground-truth JSON Lines file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRecord {
    pub image: String,
    pub class: String,
    pub bbox: BoundingBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassAp {
    pub class: String,
    pub n_gt: usize,
    pub n_pred: usize,
    pub ap: Vec<f64>,
    /// Precision and recall over all predictions at the first threshold.
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionReport {
    pub thresholds: Vec<f64>,
    pub classes: Vec<ClassAp>,
    pub map_per_threshold: Vec<f64>,
    pub map: f64,
    /// Predicted classes that never occur in the ground truth, with counts.
    pub unmatched_pred_classes: BTreeMap<String, usize>,
}

impl DetectionReport {
    pub fn to_metric_report(&self) -> MetricReport {
        let mut r = MetricReport::new()
            .metric("map", self.map)
            .setting("thresholds", format!("{:?}", self.thresholds))
            .setting("interpolation", "101-point");
        for (t, m) in self.thresholds.iter().zip(&self.map_per_threshold) {
            r = r.metric(format!("map@{t:.2}"), *m);
        }
        for c in &self.classes {
            r = r.metric(format!("ap[{}]", c.class), mean(&c.ap));
        }
        for (cls, n) in &self.unmatched_pred_classes {
            r.warn(format!("{n} predictions of class {cls:?} have no ground truth"));
        }
        r
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean AP over the classes present in the ground truth, per threshold and averaged.
pub fn mean_ap(preds: &[BoxRecord], gts: &[BoxRecord], thresholds: &[f64]) -> Result<DetectionReport> {
    if gts.is_empty() {
        return Err(Error::invalid("ground truth is empty across all classes"));
    }
    if thresholds.is_empty() {
        return Err(Error::invalid("no IoU thresholds given"));
    }
    for p in preds {
        match p.score {
            Some(s) if s.is_finite() => {}
            _ => {
                return Err(Error::invalid(format!(
                    "prediction on image {:?} lacks a finite score",
                    p.image
                )))
            }
        }
    }
    let classes: BTreeSet<&str> = gts.iter().map(|g| g.class.as_str()).collect();
    let mut unmatched_pred_classes = BTreeMap::new();
    for p in preds {
        if !classes.contains(p.class.as_str()) {
            *unmatched_pred_classes.entry(p.class.clone()).or_default() += 1;
        }
    }

    let mut class_aps = Vec::new();
    for &cls in &classes {
        let cls_preds: Vec<usize> = (0..preds.len()).filter(|&i| preds[i].class == cls).collect();
        let cls_gts: Vec<usize> = (0..gts.len()).filter(|&i| gts[i].class == cls).collect();
        let mut images: BTreeMap<&str, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        for &i in &cls_preds {
            images.entry(&preds[i].image).or_default().0.push(i);
        }
        for &i in &cls_gts {
            images.entry(&gts[i].image).or_default().1.push(i);
        }

        let scores: Vec<f64> = cls_preds.iter().map(|&i| preds[i].score.unwrap_or(0.0)).collect();
        let global_order: Vec<usize> = score_order(&scores).into_iter().map(|k| cls_preds[k]).collect();

        let mut aps = Vec::with_capacity(thresholds.len());
        let mut first_pr = (0.0, 0.0);
        for (ti, &thr) in thresholds.iter().enumerate() {
            let mut is_tp: HashMap<usize, bool> = HashMap::new();
            for (pred_idx, gt_idx) in images.values() {
                let dets: Vec<Detection> = pred_idx
                    .iter()
                    .map(|&i| Detection {
                        bbox: preds[i].bbox,
                        class_id: 0,
                        score: preds[i].score.unwrap_or(0.0),
                    })
                    .collect();
                let g: Vec<GroundTruthBox> = gt_idx
                    .iter()
                    .map(|&i| GroundTruthBox {
                        bbox: gts[i].bbox,
                        class_id: 0,
                    })
                    .collect();
                let m = match_detections(&dets, &g, thr);
                for (k, &local) in m.order.iter().enumerate() {
                    is_tp.insert(pred_idx[local], m.flags[k]);
                }
            }
            let flags: Vec<bool> = global_order.iter().map(|i| is_tp[i]).collect();
            aps.push(average_precision(&flags, cls_gts.len()).value);
            if ti == 0 {
                let tp = flags.iter().filter(|f| **f).count();
                let precision = if flags.is_empty() { 0.0 } else { tp as f64 / flags.len() as f64 };
                first_pr = (precision, tp as f64 / cls_gts.len() as f64);
            }
        }
        class_aps.push(ClassAp {
            class: cls.to_string(),
            n_gt: cls_gts.len(),
            n_pred: cls_preds.len(),
            ap: aps,
            precision: first_pr.0,
            recall: first_pr.1,
        });
    }

    let map_per_threshold: Vec<f64> = (0..thresholds.len())
        .map(|t| class_aps.iter().map(|c| c.ap[t]).sum::<f64>() / class_aps.len() as f64)
        .collect();
    Ok(DetectionReport {
        thresholds: thresholds.to_vec(),
        map: mean(&map_per_threshold),
        map_per_threshold,
        classes: class_aps,
        unmatched_pred_classes,
    })
}
