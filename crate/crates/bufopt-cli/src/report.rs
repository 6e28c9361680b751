//! Report rendering for the solve and verify subcommands.

use bufopt::oracle::EvalReport;
use bufopt::solver::{Kernel, SolveResult};
use bufopt::Assignment;
use serde_json::json;

use crate::ModeArg;

pub struct SolveReport {
    pub kernel: &'static str,
    pub mode: &'static str,
    pub slack: f64,
    pub assignment: Assignment,
    pub wall_seconds: f64,
    pub candidate_counts: std::collections::BTreeMap<String, usize>,
    pub stats: Option<bufopt::KernelStats>,
}

fn assignment_compact(a: &Assignment) -> String {
    a.placements
        .iter()
        .map(|(v, b)| format!("{v}:{b}"))
        .collect::<Vec<_>>()
        .join(";")
}

impl SolveReport {
    pub fn from_solve(kernel: Kernel, mode: ModeArg, res: SolveResult, wall: f64) -> Self {
        Self {
            kernel: match kernel {
                Kernel::Fast => "fast",
                Kernel::Baseline => "baseline",
            },
            mode: match mode {
                ModeArg::Destructive => "destructive",
                ModeArg::Copy => "copy",
            },
            slack: res.slack,
            assignment: res.assignment,
            wall_seconds: wall,
            candidate_counts: res.candidate_counts,
            stats: Some(res.stats),
        }
    }

    pub fn from_brute(slack: f64, assignment: Assignment, wall: f64) -> Self {
        Self {
            kernel: "brute",
            mode: "-",
            slack,
            assignment,
            wall_seconds: wall,
            candidate_counts: Default::default(),
            stats: None,
        }
    }

    fn peak_candidates(&self) -> usize {
        self.stats
            .map(|s| s.peak_list_len)
            .unwrap_or_else(|| self.candidate_counts.values().copied().max().unwrap_or(0))
    }

    pub fn to_json(&self) -> String {
        let stats = self.stats.map(|s| {
            json!({
                "convex_prune_calls": s.scan.calls,
                "scan_forward_moves": s.scan.forward_moves,
                "scan_backward_moves": s.scan.backward_moves,
                "candidates_pruned_convex": s.scan.pruned,
                "candidates_created": s.candidates_created,
                "candidates_dropped": s.candidates_dropped,
                "betas_generated": s.betas_generated,
                "wire_ops": s.wire_ops,
                "merge_ops": s.merge_ops,
                "buffer_ops": s.buffer_ops,
                "peak_candidates": s.peak_list_len,
            })
        });
        let mut body = serde_json::to_string_pretty(&json!({
            "slack_seconds": self.slack,
            "kernel": self.kernel,
            "mode": self.mode,
            "wall_seconds": self.wall_seconds,
            "assignment": { "placements": self.assignment.placements },
            "candidate_counts": self.candidate_counts,
            "kernel_stats": stats,
        }))
        .expect("report serialization cannot fail");
        body.push('\n');
        body
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "slack_seconds,wall_seconds,kernel,mode,peak_candidates,buffers_placed,assignment\n",
        );
        out.push_str(&format!(
            "{:e},{:e},{},{},{},{},{}\n",
            self.slack,
            self.wall_seconds,
            self.kernel,
            self.mode,
            self.peak_candidates(),
            self.assignment.placements.len(),
            assignment_compact(&self.assignment),
        ));
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("slack:      {:e} s\n", self.slack));
        out.push_str(&format!("kernel:     {} ({})\n", self.kernel, self.mode));
        out.push_str(&format!("wall time:  {:.6} s\n", self.wall_seconds));
        out.push_str(&format!(
            "buffers:    {} placed\n",
            self.assignment.placements.len()
        ));
        if !self.assignment.placements.is_empty() {
            out.push_str(&format!(
                "assignment: {}\n",
                assignment_compact(&self.assignment)
            ));
        }
        if let Some(s) = self.stats {
            out.push_str(&format!(
                "candidates: {} created, {} dropped, peak list {}\n",
                s.candidates_created, s.candidates_dropped, s.peak_list_len
            ));
            out.push_str(&format!(
                "scans:      {} convex prunes, {} fwd / {} bwd moves, {} betas\n",
                s.scan.calls, s.scan.forward_moves, s.scan.backward_moves, s.betas_generated
            ));
        }
        out
    }
}

pub fn verify_json(report: &EvalReport) -> String {
    let per_sink: serde_json::Map<String, serde_json::Value> = report
        .per_sink
        .iter()
        .map(|(id, t)| {
            (
                id.clone(),
                json!({ "delay_seconds": t.delay, "slack_seconds": t.slack }),
            )
        })
        .collect();
    let mut body = serde_json::to_string_pretty(&json!({
        "slack_seconds": report.slack,
        "per_sink": per_sink,
        "downstream_cap_farads": report.downstream_cap,
    }))
    .expect("report serialization cannot fail");
    body.push('\n');
    body
}

pub fn verify_text(report: &EvalReport) -> String {
    let mut out = format!("slack: {:e} s\n", report.slack);
    out.push_str("sink            delay (s)       slack (s)\n");
    for (id, t) in &report.per_sink {
        out.push_str(&format!("{id:<15} {:<15e} {:<15e}\n", t.delay, t.slack));
    }
    out
}
