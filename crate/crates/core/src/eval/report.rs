use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::accuracy::ie_accuracy;
use super::benchmark::BenchmarkRecord;
use super::inject::{inject_detection_drop, inject_text_hallucination, repetition_seed, InjectKind, Injection};
use super::project::{check_mask, project_fields, InvalidPath};
use super::ted::ted;
use crate::ir::{canonical_tree, Scenario};
use crate::pipeline::{finish, PipelineConfig};
use crate::text_extract::extract_textual_ir;
use crate::vision::build_visual_ir;

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub pipeline: PipelineConfig,
    pub repetitions: usize,
    /// Field paths made unspecified on both sides before scoring.
    pub mask: Vec<String>,
    pub injection: Option<Injection>,
    pub jobs: usize,
}

impl EvalConfig {
    pub fn new(pipeline: PipelineConfig, repetitions: usize) -> EvalConfig {
        EvalConfig {
            pipeline,
            repetitions,
            mask: Vec::new(),
            injection: None,
            jobs: 1,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("repetitions must be at least 1")]
    NoRepetitions,
    #[error("no records to evaluate")]
    NoRecords,
    #[error(transparent)]
    Mask(#[from] InvalidPath),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunScore {
    pub repetition: usize,
    pub ted: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordResult {
    pub id: String,
    pub ground_truth_nodes: usize,
    pub runs: Vec<RunScore>,
    pub mean_accuracy: Option<f64>,
    pub margin_of_error: Option<f64>,
    /// Set when any repetition failed; the record is then left out of the
    /// aggregate.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub repetitions: usize,
    pub scored_records: usize,
    pub failed_records: usize,
    /// Mean accuracy of each repetition over the scored records.
    pub run_means: Vec<f64>,
    pub mean_accuracy: Option<f64>,
    /// Half-width of the 95% t-interval over `run_means`; absent for a
    /// single repetition.
    pub margin_of_error: Option<f64>,
    pub mask: Vec<String>,
    pub injection: Option<Injection>,
    pub records: Vec<RecordResult>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Half-width of the two-sided 95% Student-t interval for the mean.
pub fn margin_of_error(samples: &[f64]) -> Option<f64> {
    let n = samples.len();
    if n < 2 {
        return None;
    }
    if samples.iter().all(|&x| x == samples[0]) {
        return Some(0.0);
    }
    let m = mean(samples)?;
    let var = samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).ok()?.inverse_cdf(0.975);
    Some(t * var.sqrt() / (n as f64).sqrt())
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks for ties. `None` when the
/// lengths differ, fewer than two points exist, or either side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let (mx, my) = (mean(&rx)?, mean(&ry)?);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

fn pipeline_output(record: &BenchmarkRecord, config: &EvalConfig, rep: usize) -> Result<Scenario, String> {
    let pipeline = &config.pipeline;
    let mut detections = std::borrow::Cow::Borrowed(&record.detections);
    let mut textual = extract_textual_ir(&record.description, &pipeline.fewshot, &pipeline.provider)
        .map_err(|e| format!("text extraction: {e}"))?;
    if let Some(inj) = &config.injection {
        let seed = repetition_seed(inj.seed, rep);
        match inj.kind {
            InjectKind::Text => {
                textual = inject_text_hallucination(&textual, inj.rate, seed).map_err(|e| format!("injection: {e}"))?
            }
            InjectKind::Detections => {
                detections = std::borrow::Cow::Owned(
                    inject_detection_drop(&record.detections, inj.rate, seed).map_err(|e| format!("injection: {e}"))?,
                )
            }
        }
    }
    let visual = build_visual_ir(&detections, &pipeline.vision);
    Ok(finish(textual, visual).merged)
}

fn score_record(record: &BenchmarkRecord, config: &EvalConfig) -> RecordResult {
    let truth = project_fields(&record.ground_truth, &config.mask);
    let mut result = RecordResult {
        id: record.id.clone(),
        ground_truth_nodes: 0,
        runs: Vec::new(),
        mean_accuracy: None,
        margin_of_error: None,
        error: None,
    };
    let truth = match truth {
        Ok(t) => t,
        Err(e) => {
            result.error = Some(e.to_string());
            return result;
        }
    };
    let gt_tree = canonical_tree(&truth);
    result.ground_truth_nodes = gt_tree.node_count();
    for rep in 0..config.repetitions {
        let scored = pipeline_output(record, config, rep)
            .and_then(|s| project_fields(&s, &config.mask).map_err(|e| e.to_string()));
        match scored {
            Ok(s) => result.runs.push(RunScore {
                repetition: rep,
                ted: ted(&canonical_tree(&s), &gt_tree),
                accuracy: ie_accuracy(&s, &truth),
            }),
            Err(e) => {
                result.error = Some(format!("repetition {rep}: {e}"));
                result.runs.clear();
                return result;
            }
        }
    }
    let accs: Vec<f64> = result.runs.iter().map(|r| r.accuracy).collect();
    result.mean_accuracy = mean(&accs);
    result.margin_of_error = margin_of_error(&accs);
    result
}

/// Runs the full pipeline on every record `repetitions` times and scores
/// the merged IR against the ground truth. Failing records are reported,
/// not fatal.
pub fn evaluate(records: &[BenchmarkRecord], config: &EvalConfig) -> Result<EvalReport, EvalError> {
    if config.repetitions == 0 {
        return Err(EvalError::NoRepetitions);
    }
    if records.is_empty() {
        return Err(EvalError::NoRecords);
    }
    check_mask(&config.mask)?;

    let jobs = config.jobs.clamp(1, records.len());
    let chunk = records.len().div_ceil(jobs);
    let mut results: Vec<RecordResult> = std::thread::scope(|scope| {
        let handles: Vec<_> = records
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(|r| score_record(r, config)).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("evaluation worker panicked"))
            .collect()
    });
    results.sort_by(|a, b| a.id.cmp(&b.id));

    let scored: Vec<&RecordResult> = results.iter().filter(|r| r.error.is_none()).collect();
    let run_means: Vec<f64> = (0..config.repetitions)
        .filter_map(|rep| mean(&scored.iter().map(|r| r.runs[rep].accuracy).collect::<Vec<_>>()))
        .collect();
    Ok(EvalReport {
        repetitions: config.repetitions,
        scored_records: scored.len(),
        failed_records: results.len() - scored.len(),
        mean_accuracy: mean(&run_means),
        margin_of_error: margin_of_error(&run_means),
        run_means,
        mask: config.mask.clone(),
        injection: config.injection,
        records: results,
    })
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{:.2}", v * 100.0))
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text table, one row per record plus a summary line.
    pub fn to_table(&self) -> String {
        let width = self.records.iter().map(|r| r.id.len()).max().unwrap_or(0).max(6);
        let mut out = format!(
            "{:<width$}  {:>5}  {:>9}  {:>10}  {:>8}  {}\n",
            "record", "nodes", "mean TED", "accuracy %", "± %", "status"
        );
        for r in &self.records {
            let mean_ted = (!r.runs.is_empty())
                .then(|| r.runs.iter().map(|x| x.ted as f64).sum::<f64>() / r.runs.len() as f64);
            out.push_str(&format!(
                "{:<width$}  {:>5}  {:>9}  {:>10}  {:>8}  {}\n",
                r.id,
                r.ground_truth_nodes,
                mean_ted.map_or_else(|| "n/a".to_string(), |t| format!("{t:.2}")),
                pct(r.mean_accuracy),
                pct(r.margin_of_error),
                r.error.as_deref().unwrap_or("ok"),
            ));
        }
        out.push_str(&format!(
            "mean accuracy {}% ± {} over {} run(s); {} scored, {} failed\n",
            pct(self.mean_accuracy),
            pct(self.margin_of_error),
            self.repetitions,
            self.scored_records,
            self.failed_records,
        ));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub rate: f64,
    pub mean_accuracy: Option<f64>,
    pub margin_of_error: Option<f64>,
    pub scored_records: usize,
}

/// Evaluates the pipeline once per injection rate with a shared seed.
pub fn injection_sweep(
    records: &[BenchmarkRecord],
    config: &EvalConfig,
    kind: InjectKind,
    rates: &[f64],
    seed: u64,
) -> Result<Vec<SweepPoint>, EvalError> {
    rates
        .iter()
        .map(|&rate| {
            let mut c = config.clone();
            c.injection = Some(Injection { kind, rate, seed });
            let r = evaluate(records, &c)?;
            Ok(SweepPoint {
                rate,
                mean_accuracy: r.mean_accuracy,
                margin_of_error: r.margin_of_error,
                scored_records: r.scored_records,
            })
        })
        .collect()
}
