//! Structured run results and their plain-text rendering.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Duration;

use crate::limit::{LimitMethod, Verdict};

/// One re-checked invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub stage: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalTriple {
    pub karp: f64,
    pub lp: Option<f64>,
    /// Mean of `-λ u_λ` at the ergodic λ.
    pub ergodic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionFlag {
    pub name: &'static str,
    pub holds: bool,
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveSummary {
    pub family: String,
    pub lambda: f64,
    pub iterations: usize,
    pub residual: f64,
    pub status: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub scenario: String,
    pub output_dir: PathBuf,
    pub critical: Option<CriticalTriple>,
    pub aubry: Vec<usize>,
    pub mather_value: Option<f64>,
    pub mather_support: Vec<usize>,
    pub conditions: Vec<ConditionFlag>,
    pub solves: Vec<SolveSummary>,
    pub limit_method: Option<LimitMethod>,
    pub verdicts: Vec<(String, Verdict)>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub timings: Vec<(&'static str, Duration)>,
    pub files: Vec<String>,
    pub config_echo: String,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    /// 0 when every invariant passed, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            2
        }
    }

    pub fn verdict(&self, family: &str) -> Option<Verdict> {
        self.verdicts.iter().find(|(f, _)| f == family).map(|(_, v)| *v)
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionFlag> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario: {}", self.scenario);
        let _ = writeln!(out, "output: {}", self.output_dir.display());
        let passed = self.checks.iter().filter(|c| c.passed).count();
        let _ = writeln!(
            out,
            "result: {} ({passed}/{} invariants passed)",
            if self.all_passed() { "PASS" } else { "FAIL" },
            self.checks.len()
        );

        out.push_str("\n== critical value\n");
        if let Some(c) = &self.critical {
            let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| x.to_string());
            let _ = writeln!(out, "c0 karp    = {}", c.karp);
            let _ = writeln!(out, "c0 lp      = {}", opt(c.lp));
            let _ = writeln!(out, "c0 ergodic = {}", opt(c.ergodic));
        }
        let _ = writeln!(out, "aubry nodes ({}): {:?}", self.aubry.len(), self.aubry);
        if let Some(v) = self.mather_value {
            let _ = writeln!(out, "mather value = {v}, support nodes {:?}", self.mather_support);
        }

        if !self.conditions.is_empty() {
            out.push_str("\n== conditions\n");
            for c in &self.conditions {
                let margin = c.margin.map_or(String::new(), |m| format!(" (margin {m:e})"));
                let _ = writeln!(out, "{:<10} {}{margin}", c.name, if c.holds { "holds" } else { "fails" });
            }
        }

        if !self.solves.is_empty() {
            out.push_str("\n== solves\n");
            let _ = writeln!(
                out,
                "{:<12} {:>10} {:>9} {:>11} {:>10} {:>14} {:>14}",
                "family", "lambda", "iters", "residual", "status", "min", "max"
            );
            for s in &self.solves {
                let _ = writeln!(
                    out,
                    "{:<12} {:>10} {:>9} {:>11.3e} {:>10} {:>14.6} {:>14.6}",
                    s.family, s.lambda, s.iterations, s.residual, s.status, s.min, s.max
                );
            }
        }

        if self.limit_method.is_some() || !self.verdicts.is_empty() {
            out.push_str("\n== limit and verdicts\n");
            if let Some(m) = self.limit_method {
                let _ = writeln!(out, "u0 method: {m:?}");
            }
            for (family, verdict) in &self.verdicts {
                let _ = writeln!(out, "{family:<12} {verdict}");
            }
        }

        out.push_str("\n== invariants\n");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "[{}] {:<9} {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.stage,
                c.name,
                c.detail
            );
        }

        if !self.notes.is_empty() {
            out.push_str("\n== notes\n");
            for n in &self.notes {
                let _ = writeln!(out, "- {n}");
            }
        }

        out.push_str("\n== timings\n");
        for (stage, d) in &self.timings {
            let _ = writeln!(out, "{stage:<10} {:.3} s", d.as_secs_f64());
        }

        out.push_str("\n== files\n");
        for f in &self.files {
            let _ = writeln!(out, "{f}");
        }

        out.push_str("\n== config\n");
        out.push_str(&self.config_echo);
        out
    }
}
