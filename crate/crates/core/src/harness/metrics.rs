use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::planners::PlannerKind;
use crate::sim::MissionTrace;

/// First line of every metrics file.
pub const METRICS_HEADER: &str = "# udop-metrics v1";

const COLUMNS: [&str; 12] = [
    "instance",
    "planner",
    "theta_min",
    "delta_mu",
    "delta_sigma",
    "executions",
    "successes",
    "msr",
    "prize_mean",
    "prize_sd",
    "cost_mean",
    "cost_sd",
];

/// Aggregate over the executions of one (instance, planner, cell).
///
/// Prize and cost statistics cover successful executions only; `None` is
/// written as `NA`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub instance: String,
    pub planner: PlannerKind,
    pub theta_min: f64,
    pub delta_mu: f64,
    pub delta_sigma: f64,
    pub executions: usize,
    pub successes: usize,
    pub msr: f64,
    pub prize_mean: Option<f64>,
    pub prize_sd: Option<f64>,
    pub cost_mean: Option<f64>,
    pub cost_sd: Option<f64>,
}

/// Mean and sample standard deviation; the sd needs two values.
pub fn mean_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (Some(mean), None);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (Some(mean), Some((ss / (n - 1.0)).sqrt()))
}

/// Metrics for one cell. Cell labels come from the first trace.
///
/// # Panics
/// On an empty slice.
pub fn compute_metrics(traces: &[MissionTrace]) -> MetricsRecord {
    let first = traces.first().expect("compute_metrics needs at least one trace");
    let wins: Vec<&MissionTrace> = traces.iter().filter(|t| t.succeeded()).collect();
    let prizes: Vec<f64> = wins.iter().map(|t| t.total_prize).collect();
    let costs: Vec<f64> = wins.iter().map(|t| t.total_cost).collect();
    let (prize_mean, prize_sd) = mean_sd(&prizes);
    let (cost_mean, cost_sd) = mean_sd(&costs);
    MetricsRecord {
        instance: first.instance.clone(),
        planner: first.planner,
        theta_min: first.theta_min,
        delta_mu: first.delta_mu,
        delta_sigma: first.delta_sigma,
        executions: traces.len(),
        successes: wins.len(),
        msr: wins.len() as f64 / traces.len() as f64,
        prize_mean,
        prize_sd,
        cost_mean,
        cost_sd,
    }
}

fn same_cell(a: &MissionTrace, b: &MissionTrace) -> bool {
    a.instance == b.instance
        && a.planner == b.planner
        && a.theta_min == b.theta_min
        && a.delta_mu == b.delta_mu
        && a.delta_sigma == b.delta_sigma
}

/// Splits traces into runs of the same cell, keeping their order.
pub fn group_cells(traces: &[MissionTrace]) -> Vec<&[MissionTrace]> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=traces.len() {
        if i == traces.len() || !same_cell(&traces[start], &traces[i]) {
            if i > start {
                groups.push(&traces[start..i]);
            }
            start = i;
        }
    }
    groups
}

/// One record per run of consecutive same-cell traces.
pub fn metrics_from_traces(traces: &[MissionTrace]) -> Vec<MetricsRecord> {
    group_cells(traces).into_iter().map(compute_metrics).collect()
}

fn fixed(v: f64) -> String {
    format!("{v:.6}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), fixed)
}

/// Renders the metrics file: the version line, a header, then one row per
/// record with six decimals.
pub fn metrics_csv(records: &[MetricsRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS).expect("writing to memory");
    for r in records {
        w.write_record([
            r.instance.clone(),
            r.planner.name().to_string(),
            fixed(r.theta_min),
            fixed(r.delta_mu),
            fixed(r.delta_sigma),
            r.executions.to_string(),
            r.successes.to_string(),
            fixed(r.msr),
            opt(r.prize_mean),
            opt(r.prize_sd),
            opt(r.cost_mean),
            opt(r.cost_sd),
        ])
        .expect("writing to memory");
    }
    let body = String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv output is utf-8");
    format!("{METRICS_HEADER}\n{body}")
}

/// Per-cell re-plan wall times. Not reproducible, so kept apart from the
/// metrics file.
pub fn timing_csv(traces: &[MissionTrace]) -> String {
    let mut out = String::from("instance,planner,theta_min,delta_mu,delta_sigma,replans,mean_s,max_s\n");
    for cell in group_cells(traces) {
        let times: Vec<f64> = cell.iter().flat_map(|t| t.replan_wall_times()).collect();
        let t = &cell[0];
        let (mean, _) = mean_sd(&times);
        let max = times
            .iter()
            .copied()
            .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))));
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{},{},{}",
            t.instance,
            t.planner.name(),
            t.theta_min,
            t.delta_mu,
            t.delta_sigma,
            times.len(),
            opt(mean),
            opt(max)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_sd_edge_cases() {
        assert_eq!(mean_sd(&[]), (None, None));
        assert_eq!(mean_sd(&[3.0]), (Some(3.0), None));
        let (m, s) = mean_sd(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, Some(5.0));
        assert!((s.unwrap() - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let r = MetricsRecord {
            instance: "a".into(),
            planner: PlannerKind::Offline,
            theta_min: 0.75,
            delta_mu: 0.2,
            delta_sigma: -0.1,
            executions: 50,
            successes: 0,
            msr: 0.0,
            prize_mean: None,
            prize_sd: None,
            cost_mean: None,
            cost_sd: None,
        };
        let text = metrics_csv(&[r]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], METRICS_HEADER);
        assert!(lines[1].starts_with("instance,planner,theta_min"));
        assert_eq!(
            lines[2],
            "a,Offline,0.750000,0.200000,-0.100000,50,0,0.000000,NA,NA,NA,NA"
        );
    }
}
