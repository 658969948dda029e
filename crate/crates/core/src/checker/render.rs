use std::fmt::Write as _;

use serde::Serialize;

use crate::expand::KripkeStructure;

use super::{Lasso, Move, Verdict};

/// One numbered position of a rendered counterexample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    pub index: usize,
    /// The move that led here; `None` for the initial position.
    pub action: Option<String>,
    pub state: String,
    pub counters: Vec<u32>,
    pub flags: Vec<String>,
    pub loop_start: bool,
}

impl Move {
    pub fn display(self, k: &KripkeStructure) -> String {
        match self {
            Move::Act(a) => a.display(k.sps().alphabet()),
            Move::Quiescent => "quiescent".into(),
        }
    }
}

impl Lasso {
    /// Positions `0..=stem+cycle`; the last one repeats the loop start.
    pub fn steps(&self, k: &KripkeStructure) -> Vec<Step> {
        let step = |index: usize, action: Option<Move>, id: usize| {
            let st = k.state(id);
            Step {
                index,
                action: action.map(|m| m.display(k)),
                state: k.sps().state_name(st.state).to_string(),
                counters: st.counters.clone(),
                flags: st.flag_list(k.grounding()),
                loop_start: index == self.stem.len(),
            }
        };
        let mut out = vec![step(0, None, self.initial)];
        for (i, &(m, id)) in self.stem.iter().chain(&self.cycle).enumerate() {
            out.push(step(i + 1, Some(m), id));
        }
        out
    }

    /// Numbered text rendering, one position per line.
    pub fn render(&self, k: &KripkeStructure) -> String {
        let steps = self.steps(k);
        let width = steps
            .iter()
            .filter_map(|s| s.action.as_ref().map(String::len))
            .max()
            .unwrap_or(0)
            .max("(initial)".len());
        let last = steps.len() - 1;
        let mut out = String::new();
        for s in &steps {
            let action = s.action.clone().unwrap_or_else(|| "(initial)".into());
            let counters: Vec<String> = s.counters.iter().map(u32::to_string).collect();
            let mut line = format!(
                "{:>4}  {:<width$}  {} <{}> {{{}}}",
                s.index,
                action,
                s.state,
                counters.join(","),
                s.flags.join(", ")
            );
            if s.loop_start {
                line.push_str("  <- loop starts");
            } else if s.index == last {
                let _ = write!(line, "  (back to step {})", self.stem.len());
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

impl Verdict {
    pub fn render(&self, k: &KripkeStructure) -> String {
        let mut out = String::new();
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        if self.deadlocks_completed > 0 {
            let _ = writeln!(
                out,
                "note: {} deadlocked state(s) completed with a quiescent self-loop",
                self.deadlocks_completed
            );
        }
        match &self.counterexample {
            None => out.push_str("property holds\n"),
            Some(cx) => {
                let _ = writeln!(
                    out,
                    "property violated; counterexample (stem {}, cycle {}):",
                    cx.stem.len(),
                    cx.cycle.len()
                );
                out.push_str(&cx.render(k));
            }
        }
        out
    }
}
