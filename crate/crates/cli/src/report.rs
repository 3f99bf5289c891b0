//! Metrics documents: `key = value` text and the matching JSON.

use serde::Serialize;
use svplan::pipeline::PlanResult;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTimes {
    pub path: f64,
    pub r2: f64,
    pub se2: f64,
    pub check: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lengths {
    pub r2: f64,
    pub se2: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidates {
    pub tried: usize,
    pub survived: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateLine {
    pub path_id: usize,
    /// `"ok"` or the failure reason.
    pub outcome: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub status: String,
    pub seed: u64,
    pub time: StageTimes,
    pub len: Lengths,
    pub candidates: Candidates,
    pub pieces: usize,
    pub certificate_clear: Option<bool>,
    pub control_effort: Option<f64>,
    pub candidate_outcomes: Vec<CandidateLine>,
    pub failure: Option<String>,
}

fn one_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

impl Metrics {
    pub fn from_result(r: &PlanResult, seed: u64) -> Self {
        let m = &r.metrics;
        let t = &m.timings;
        Self {
            status: r.status.as_str().to_string(),
            seed,
            time: StageTimes {
                path: t.path,
                r2: t.r2,
                se2: t.se2,
                check: t.check,
                total: t.total,
            },
            len: Lengths {
                r2: m.len_r2,
                se2: m.len_se2,
                total: m.len_total,
            },
            candidates: Candidates {
                tried: m.candidates_tried,
                survived: m.candidates_survived,
            },
            pieces: r.plan.as_ref().map_or(0, |p| p.trajectory.num_pieces()),
            certificate_clear: r.plan.as_ref().map(|p| p.certificate.is_clear()),
            control_effort: r.plan.as_ref().map(|p| p.control_effort),
            candidate_outcomes: r
                .candidates
                .iter()
                .map(|c| CandidateLine {
                    path_id: c.path_id,
                    outcome: match &c.result {
                        Ok(_) => "ok".into(),
                        Err(e) => one_line(e),
                    },
                })
                .collect(),
            failure: r.failure.as_deref().map(one_line),
        }
    }

    /// One `key = value` line per metric.
    pub fn to_text(&self) -> String {
        let mut lines = vec![
            format!("status = {}", self.status),
            format!("seed = {}", self.seed),
            format!("time.path = {:.6}", self.time.path),
            format!("time.r2 = {:.6}", self.time.r2),
            format!("time.se2 = {:.6}", self.time.se2),
            format!("time.check = {:.6}", self.time.check),
            format!("time.total = {:.6}", self.time.total),
            format!("len.r2 = {:.6}", self.len.r2),
            format!("len.se2 = {:.6}", self.len.se2),
            format!("len.total = {:.6}", self.len.total),
            format!("candidates.tried = {}", self.candidates.tried),
            format!("candidates.survived = {}", self.candidates.survived),
            format!("pieces = {}", self.pieces),
        ];
        if let Some(c) = self.certificate_clear {
            lines.push(format!("certificate.clear = {c}"));
        }
        if let Some(j) = self.control_effort {
            lines.push(format!("control_effort = {j:.6}"));
        }
        for c in &self.candidate_outcomes {
            lines.push(format!("candidate.{} = {}", c.path_id, c.outcome));
        }
        if let Some(f) = &self.failure {
            lines.push(format!("failure = {f}"));
        }
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metrics serialize");
        s.push('\n');
        s
    }
}
