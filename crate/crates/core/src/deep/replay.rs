use std::collections::VecDeque;

use rand::Rng;

use crate::env::Transition;
use crate::error::{Error, Result};

/// Fixed-capacity FIFO store of transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    storage: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer { capacity, storage: VecDeque::with_capacity(capacity.min(1 << 16)) }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    /// Appends, evicting the oldest transition when full.
    pub fn push(&mut self, t: Transition) {
        if self.storage.len() == self.capacity {
            self.storage.pop_front();
        }
        self.storage.push_back(t);
    }

    /// `m` transitions drawn uniformly with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<Vec<&Transition>> {
        if self.storage.is_empty() {
            return Err(Error::Empty("replay buffer"));
        }
        Ok((0..m).map(|_| &self.storage[rng.random_range(0..self.storage.len())]).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.storage.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Observation;
    use crate::rng::stream_rng;

    pub(crate) fn tagged(r: f64) -> Transition {
        let o = Observation { features: vec![0.0], state_id: None };
        Transition { obs: o.clone(), action: 0, reward: r, next_obs: o, terminal: false }
    }

    #[test]
    fn fifo_eviction() {
        let mut b = ReplayBuffer::new(2);
        for r in [1.0, 2.0, 3.0] {
            b.push(tagged(r));
        }
        let rewards: Vec<f64> = b.iter().map(|t| t.reward).collect();
        assert_eq!(rewards, vec![2.0, 3.0]);
    }

    #[test]
    fn exhaustive_small_fifo() {
        for cap in 1..5 {
            let mut b = ReplayBuffer::new(cap);
            for n in 0..12usize {
                b.push(tagged(n as f64));
                let got: Vec<f64> = b.iter().map(|t| t.reward).collect();
                let lo = (n + 1).saturating_sub(cap);
                let want: Vec<f64> = (lo..=n).map(|v| v as f64).collect();
                assert_eq!(got, want);
                assert!(b.len() <= cap);
            }
        }
    }

    #[test]
    fn singleton_and_empty() {
        let mut rng = stream_rng(0, 0);
        let mut b = ReplayBuffer::new(3);
        assert!(b.sample(1, &mut rng).is_err());
        b.push(tagged(7.0));
        let s = b.sample(5, &mut rng).unwrap();
        assert!(s.len() == 5 && s.iter().all(|t| t.reward == 7.0));
    }
}
