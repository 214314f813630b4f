use serde::Serialize;

/// One verification step: what was expected, what was observed, and whether
/// the two agree.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        expected: impl ToString,
        observed: impl ToString,
        pass: bool,
    ) -> Check {
        Check {
            name: name.into(),
            expected: expected.to_string(),
            observed: observed.to_string(),
            pass,
        }
    }
}

/// Echo of the fully resolved run configuration.  Two runs with identical
/// echoes produce byte-identical reports apart from `timing_ms`.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub field: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kmax: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<String>,
    pub trials: usize,
    pub jet_trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub config: ConfigEcho,
    pub checks: Vec<Check>,
    pub pass: bool,
    /// Present for finite-field runs, where randomized rank estimates carry a
    /// per-trial error bound instead of being unconditionally exact.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub soundness: Option<String>,
    pub timing_ms: u128,
}

impl Report {
    pub fn render_human(&self, notes: &[String]) -> String {
        use std::fmt::Write;

        let mut out = String::new();
        let _ = writeln!(
            out,
            "glab {}  [field {}, seed {}, trials {}, jet trials {}]",
            self.command,
            self.config.field,
            self.config.seed,
            self.config.trials,
            self.config.jet_trials
        );
        let width = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(0);
        for c in &self.checks {
            let _ = writeln!(
                out,
                "  {}  {:width$}  expected {}; observed {}",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.expected,
                c.observed,
            );
        }
        for note in notes {
            let _ = writeln!(out, "  {note}");
        }
        if let Some(note) = &self.soundness {
            let _ = writeln!(out, "  note: {note}");
        }
        let good = self.checks.iter().filter(|c| c.pass).count();
        let _ = writeln!(
            out,
            "{}: {good}/{} checks passed in {} ms",
            if self.pass { "PASS" } else { "FAIL" },
            self.checks.len(),
            self.timing_ms
        );
        out
    }
}
