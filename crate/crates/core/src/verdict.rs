use serde::{Deserialize, Serialize};

/// Outcome of a witness search.
///
/// `Fail` is reserved for cases where the absence of a witness is backed by
/// an analytic argument; an unsuccessful search without one is `Inconclusive`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }

    /// Combines per-item verdicts: any inconclusive item wins, then any failure.
    pub fn all<I: IntoIterator<Item = Verdict>>(items: I) -> Verdict {
        let mut out = Verdict::Pass;
        for v in items {
            match v {
                Verdict::Inconclusive => return Verdict::Inconclusive,
                Verdict::Fail => out = Verdict::Fail,
                Verdict::Pass => {}
            }
        }
        out
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}
