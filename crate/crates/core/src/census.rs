//! Exhaustive classification of all 9^5 digit sequences.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::opening::{
    classify, matches_forced_win_pattern, DigitSequence, OpeningClass, RollPolicy, SEQUENCE_COUNT,
};

/// Exact rational with a display rendering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub numerator: u64,
    pub denominator: u64,
    /// Percentage to three significant digits, display only.
    pub percent: String,
}

impl Fraction {
    pub fn new(numerator: u64, denominator: u64) -> Self {
        assert!(denominator > 0);
        Fraction {
            numerator,
            denominator,
            percent: format_percent(numerator, denominator),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

fn format_percent(numerator: u64, denominator: u64) -> String {
    if numerator == 0 {
        return "0%".to_string();
    }
    let pct = 100.0 * numerator as f64 / denominator as f64;
    let magnitude = pct.log10().floor() as i32;
    let decimals = (2 - magnitude).max(0) as usize;
    format!("{pct:.decimals$}%")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fractions {
    pub illegal: Fraction,
    pub forced_win_pattern_raw: Fraction,
    pub forced_win_legal: Fraction,
    pub playable: Fraction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusReport {
    pub total: u64,
    pub illegal: u64,
    /// Sequences matching the digit pattern, legal or not.
    pub forced_win_pattern_raw: u64,
    /// Pattern matches whose four placements are all legal.
    pub forced_win_legal: u64,
    pub playable: u64,
    pub illegal_by_conflict_index: BTreeMap<u8, u64>,
    pub fractions: Fractions,
}

pub fn enumerate_all() -> CensusReport {
    let mut illegal = 0;
    let mut raw = 0;
    let mut legal_pattern = 0;
    let mut playable = 0;
    let mut by_index: BTreeMap<u8, u64> = (2..=4).map(|k| (k, 0)).collect();

    for seq in DigitSequence::all() {
        if matches_forced_win_pattern(seq) {
            raw += 1;
        }
        match classify(seq) {
            OpeningClass::Playable => playable += 1,
            OpeningClass::ForcedWinPattern => legal_pattern += 1,
            OpeningClass::Illegal { conflict_index } => {
                illegal += 1;
                *by_index.entry(conflict_index).or_default() += 1;
            }
        }
    }

    let total = SEQUENCE_COUNT as u64;
    CensusReport {
        total,
        illegal,
        forced_win_pattern_raw: raw,
        forced_win_legal: legal_pattern,
        playable,
        illegal_by_conflict_index: by_index,
        fractions: Fractions {
            illegal: Fraction::new(illegal, total),
            forced_win_pattern_raw: Fraction::new(raw, total),
            forced_win_legal: Fraction::new(legal_pattern, total),
            playable: Fraction::new(playable, total),
        },
    }
}

/// The report, computed once per process.
pub fn census() -> &'static CensusReport {
    static REPORT: OnceLock<CensusReport> = OnceLock::new();
    REPORT.get_or_init(enumerate_all)
}

/// Probability that a single five-digit draw is discarded under `policy`.
pub fn expected_rejection_fraction(policy: &RollPolicy) -> Fraction {
    let report = census();
    let rejected = if policy.reject_forced_win_pattern {
        report.illegal + report.forced_win_legal
    } else {
        report.illegal
    };
    Fraction::new(rejected, report.total)
}

impl CensusReport {
    /// Pattern matches that are discarded as illegal (O4 lands on O2's cell).
    pub fn forced_win_pattern_illegal(&self) -> u64 {
        self.forced_win_pattern_raw - self.forced_win_legal
    }

    /// Plain-text table: `name count numerator/denominator percent` per row.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let mut row = |name: &str, count: u64| {
            let f = Fraction::new(count, self.total);
            let _ = writeln!(out, "{name} {count} {f} {}", f.percent);
        };
        row("total", self.total);
        row("illegal", self.illegal);
        for (k, &n) in &self.illegal_by_conflict_index {
            row(&format!("illegal_at_move_{k}"), n);
        }
        row("forced_win_pattern_raw", self.forced_win_pattern_raw);
        row("forced_win_legal", self.forced_win_legal);
        row(
            "forced_win_pattern_illegal",
            self.forced_win_pattern_illegal(),
        );
        row("playable", self.playable);
        out
    }
}
