//! Plottable comma-separated artifact tables.
//!
//! One header row, `\n` line endings, floating-point fields rendered with 9
//! significant digits in scientific form. Rendering is a pure function of
//! the inputs, so identical runs produce byte-identical tables.

use crate::capability::{AgentKind, PerAgent};
use crate::fit::BoundsTrace;
use crate::sim::{EpisodeLog, Metrics, Scenario};
use crate::trust::{CapabilityBelief, DEFAULT_QUANTILES};

/// Canonical float rendering for tables: 9 significant digits, scientific.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.8e}")
}

/// Per-task episode table. Columns:
/// `task_id,req_0..req_{n-1},trust_human,trust_robot,expected_reward_human,`
/// `expected_reward_robot,chosen,tie_broken,outcome,realized_reward,cumulative_reward`.
pub fn episode_log_csv(log: &EpisodeLog) -> String {
    let n = log
        .records
        .first()
        .map_or(0, |r| r.requirements.values().len());
    let mut out = String::from("task_id");
    for d in 0..n {
        out.push_str(&format!(",req_{d}"));
    }
    out.push_str(
        ",trust_human,trust_robot,expected_reward_human,expected_reward_robot,\
         chosen,tie_broken,outcome,realized_reward,cumulative_reward\n",
    );
    for (record, cumulative) in log.records.iter().zip(&log.cumulative_reward) {
        out.push_str(&record.task_id);
        for &v in record.requirements.values() {
            out.push(',');
            out.push_str(&fmt_float(v));
        }
        for v in [
            record.trust.human,
            record.trust.robot,
            record.expected_reward.human,
            record.expected_reward.robot,
        ] {
            out.push(',');
            out.push_str(&fmt_float(v));
        }
        out.push_str(&format!(
            ",{},{},{},{},{}\n",
            record.chosen,
            record.tie_broken,
            record.outcome,
            fmt_float(record.realized_reward),
            fmt_float(*cumulative),
        ));
    }
    out
}

fn push_bounds_row(
    out: &mut String,
    step: usize,
    agent: &str,
    dim: usize,
    lower: f64,
    upper: f64,
    true_value: f64,
) {
    out.push_str(&format!(
        "{step},{agent},{dim},{},{},{}\n",
        fmt_float(lower),
        fmt_float(upper),
        fmt_float(true_value),
    ));
}

/// Credible-bound trace of an episode, both agents, with the hidden truth
/// for reference. Step 0 is the initial uniform belief; step `t` is the
/// state after task `t`. Columns: `step,agent,dim,lower,upper,true_value`.
pub fn episode_bounds_csv(scenario: &Scenario, log: &EpisodeLog) -> String {
    let mut out = String::from("step,agent,dim,lower,upper,true_value\n");
    let n = scenario.space.n();
    let uniform = CapabilityBelief::uniform(&scenario.space);
    let (lo_q, hi_q) = DEFAULT_QUANTILES;
    let initial: Vec<(f64, f64)> = (0..n)
        .map(|d| {
            uniform
                .credible_bounds(d, lo_q, hi_q)
                .expect("uniform belief has valid bounds")
        })
        .collect();
    for kind in AgentKind::ALL {
        let truth = scenario.agents.get(kind).true_capabilities.values();
        for (d, &(lo, hi)) in initial.iter().enumerate() {
            push_bounds_row(&mut out, 0, kind.as_str(), d, lo, hi, truth[d]);
        }
    }
    for (t, record) in log.records.iter().enumerate() {
        for kind in AgentKind::ALL {
            let truth = scenario.agents.get(kind).true_capabilities.values();
            for (d, &(lo, hi)) in record.bounds.get(kind).iter().enumerate() {
                push_bounds_row(&mut out, t + 1, kind.as_str(), d, lo, hi, truth[d]);
            }
        }
    }
    out
}

/// Credible-bound trace of a batch fit (single trustee). Step 0 is the
/// uniform prior; later steps follow each update. `true_capabilities`
/// fills the reference column when the generating truth is known, else NaN.
/// Columns: `step,agent,dim,lower,upper,true_value`.
pub fn fit_bounds_csv(trace: &BoundsTrace, true_capabilities: Option<&[f64]>) -> String {
    let mut out = String::from("step,agent,dim,lower,upper,true_value\n");
    for step in 0..trace.steps() {
        for dim in 0..trace.dims() {
            let (lo, hi) = trace.per_dim[dim][step];
            let truth = true_capabilities.map_or(f64::NAN, |t| t[dim]);
            push_bounds_row(&mut out, step, "trustee", dim, lo, hi, truth);
        }
    }
    out
}

/// Fit outcome summary as `metric,value` rows.
pub fn fit_summary_csv(trace: &BoundsTrace) -> String {
    let mut out = String::from("metric,value\n");
    out.push_str(&format!(
        "converged,{}\n",
        if trace.converged { 1 } else { 0 }
    ));
    out.push_str(&format!("sweeps,{}\n", trace.sweeps));
    out.push_str(&format!("steps,{}\n", trace.steps()));
    for dim in 0..trace.dims() {
        let (lo, hi) = trace.final_bounds(dim);
        out.push_str(&format!("final_lower_{dim},{}\n", fmt_float(lo)));
        out.push_str(&format!("final_upper_{dim},{}\n", fmt_float(hi)));
    }
    out
}

/// Episode metrics as `metric,value` rows.
pub fn metrics_csv(metrics: &Metrics) -> String {
    let mut out = String::from("metric,value\n");
    out.push_str(&format!("task_count,{}\n", metrics.task_count));
    out.push_str(&format!(
        "total_reward,{}\n",
        fmt_float(metrics.total_reward)
    ));
    out.push_str(&format!(
        "assignments_human,{}\n",
        metrics.assignments.human
    ));
    out.push_str(&format!(
        "assignments_robot,{}\n",
        metrics.assignments.robot
    ));
    out.push_str(&format!(
        "success_rate,{}\n",
        fmt_float(metrics.success_rate)
    ));
    out.push_str(&format!(
        "final_belief_l1_error_human,{}\n",
        fmt_float(metrics.final_belief_l1_error.human)
    ));
    out.push_str(&format!(
        "final_belief_l1_error_robot,{}\n",
        fmt_float(metrics.final_belief_l1_error.robot)
    ));
    if let Some(regret) = metrics.regret {
        out.push_str(&format!("regret,{}\n", fmt_float(regret)));
    }
    out
}

/// Parses a `metric,value` table back into pairs.
pub fn parse_metrics_csv(text: &str) -> Result<Vec<(String, f64)>, String> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if idx == 0 {
            if line != "metric,value" {
                return Err(format!("unexpected header `{line}`"));
            }
            continue;
        }
        let (name, value) = line
            .split_once(',')
            .ok_or_else(|| format!("line {}: expected `metric,value`", idx + 1))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("line {}: bad value `{value}`", idx + 1))?;
        rows.push((name.trim().to_string(), value));
    }
    Ok(rows)
}

/// Aggregates metric tables from several runs. Metrics keep first-seen
/// order. Columns: `metric,count,mean,min,max`.
pub fn aggregate_metrics_csv(runs: &[Vec<(String, f64)>]) -> String {
    let mut order: Vec<String> = Vec::new();
    let mut samples: std::collections::HashMap<String, Vec<f64>> = std::collections::HashMap::new();
    for run in runs {
        for (name, value) in run {
            if !samples.contains_key(name) {
                order.push(name.clone());
            }
            samples.entry(name.clone()).or_default().push(*value);
        }
    }
    let mut out = String::from("metric,count,mean,min,max\n");
    for name in order {
        let values = &samples[&name];
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out.push_str(&format!(
            "{name},{count},{},{},{}\n",
            fmt_float(mean),
            fmt_float(min),
            fmt_float(max),
        ));
    }
    out
}

/// Renders mean L1-error traces as `step,agent,l1_error` rows; plumbing for
/// learning-curve plots.
pub fn l1_trace_csv(trace: &PerAgent<Vec<f64>>) -> String {
    let mut out = String::from("step,agent,l1_error\n");
    for kind in AgentKind::ALL {
        for (step, v) in trace.get(kind).iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                step + 1,
                kind.as_str(),
                fmt_float(*v)
            ));
        }
    }
    out
}
