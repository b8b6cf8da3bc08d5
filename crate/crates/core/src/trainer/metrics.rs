use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::env::Outcome;

/// One line of the per-episode JSONL log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    /// 1-based episode number.
    pub ep: u64,
    pub winner: Outcome,
    pub ret_pink: f64,
    pub ret_green: f64,
    pub tiles_pink: u32,
    pub tiles_green: u32,
    /// Green played uniformly at random this episode.
    pub mixed: bool,
    pub wr_roll100: f64,
    pub wr_cum: f64,
    pub ent_pink: f64,
    pub ent_green: f64,
    pub ev_pink: f64,
    pub ev_green: f64,
    pub loss_pi_pink: f64,
    pub loss_v_pink: f64,
    pub loss_pi_green: f64,
    pub loss_v_green: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secs: Option<f64>,
}

/// Pink's rolling-100 and cumulative win rates. Ties count for nobody.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WinTracker {
    pub episodes: u64,
    pub pink_wins: u64,
    pub green_wins: u64,
    pub ties: u64,
    /// Pink-win flags of the most recent episodes, oldest first.
    pub recent: VecDeque<bool>,
}

pub const ROLLING_WINDOW: usize = 100;

impl WinTracker {
    pub fn record(&mut self, outcome: Outcome) {
        self.episodes += 1;
        match outcome {
            Outcome::Pink => self.pink_wins += 1,
            Outcome::Green => self.green_wins += 1,
            Outcome::Tie => self.ties += 1,
        }
        if self.recent.len() == ROLLING_WINDOW {
            self.recent.pop_front();
        }
        self.recent.push_back(outcome == Outcome::Pink);
    }

    pub fn rolling(&self) -> f64 {
        if self.recent.is_empty() {
            return 0.0;
        }
        self.recent.iter().filter(|w| **w).count() as f64 / self.recent.len() as f64
    }

    pub fn cumulative(&self) -> f64 {
        if self.episodes == 0 {
            return 0.0;
        }
        self.pink_wins as f64 / self.episodes as f64
    }
}

/// Parses a metrics log, reporting the 1-based line number of the first
/// malformed record.
pub fn parse_metrics(text: &str) -> Result<Vec<EpisodeMetrics>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("line {}: {e}", i + 1)))
        .collect()
}
