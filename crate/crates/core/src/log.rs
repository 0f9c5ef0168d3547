//! Per-episode training records.

/// One row of a training log.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub seed: u64,
    pub episode: usize,
    /// Undiscounted sum of rewards.
    pub reward: f64,
    pub steps: usize,
    pub epsilon: f64,
    pub alpha: f64,
    /// Mean over `(s, a)` of the generator-vs-Monte-Carlo W1 diagnostic.
    pub w1_diag: Option<f64>,
    pub truncated: bool,
}

/// Per-`(s, a)` W1 diagnostic at one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagRecord {
    pub episode: usize,
    /// `(state, action, W1)` for every probed pair.
    pub pairs: Vec<(usize, usize, f64)>,
}

impl DiagRecord {
    pub fn mean(&self) -> f64 {
        self.pairs.iter().map(|p| p.2).sum::<f64>() / self.pairs.len().max(1) as f64
    }

    pub fn get(&self, s: usize, a: usize) -> Option<f64> {
        self.pairs.iter().find(|p| p.0 == s && p.1 == a).map(|p| p.2)
    }
}

/// Everything one seed's run produces.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    pub seed: u64,
    pub rows: Vec<EpisodeRecord>,
    pub diagnostics: Vec<DiagRecord>,
    /// Set when training stopped on a non-finite loss.
    pub diverged: Option<String>,
}

impl TrainLog {
    pub fn new(seed: u64) -> Self {
        TrainLog { seed, ..Default::default() }
    }

    pub fn mean_reward(&self) -> f64 {
        self.rows.iter().map(|r| r.reward).sum::<f64>() / self.rows.len().max(1) as f64
    }

    /// Mean reward of the last `window` episodes (fewer if the log is short).
    pub fn trailing_mean(&self, window: usize) -> f64 {
        let start = self.rows.len().saturating_sub(window);
        let tail = &self.rows[start..];
        tail.iter().map(|r| r.reward).sum::<f64>() / tail.len().max(1) as f64
    }

    /// First episode (1-based count) at which the trailing mean over a full
    /// window reaches `threshold`.
    pub fn solved_at(&self, window: usize, threshold: f64) -> Option<usize> {
        if self.rows.len() < window {
            return None;
        }
        let mut sum: f64 = self.rows[..window].iter().map(|r| r.reward).sum();
        if sum / window as f64 >= threshold {
            return Some(window);
        }
        for i in window..self.rows.len() {
            sum += self.rows[i].reward - self.rows[i - window].reward;
            if sum / window as f64 >= threshold {
                return Some(i + 1);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log(rewards: &[f64]) -> TrainLog {
        let rows = rewards
            .iter()
            .enumerate()
            .map(|(i, &r)| EpisodeRecord {
                seed: 0,
                episode: i,
                reward: r,
                steps: 1,
                epsilon: 0.0,
                alpha: 0.0,
                w1_diag: None,
                truncated: false,
            })
            .collect();
        TrainLog { rows, ..TrainLog::new(0) }
    }

    #[test]
    fn trailing_and_solved() {
        let l = log(&[0.0, 0.0, 10.0, 10.0, 10.0]);
        assert_eq!(l.trailing_mean(2), 10.0);
        assert_eq!(l.mean_reward(), 6.0);
        assert_eq!(l.solved_at(2, 10.0), Some(4));
        assert_eq!(l.solved_at(3, 10.0), Some(5));
        assert_eq!(l.solved_at(6, 0.0), None);
    }
}
