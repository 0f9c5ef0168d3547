//! Exact dynamics of the tabular presets.

use crate::error::Result;
use crate::mdp::TabularMdp;

pub const CHAIN_LEN: usize = 10;
pub const CHAIN_START: usize = 5;
const CHAIN_SINK: usize = CHAIN_LEN;

/// Interior side of the 6x6 walled grid.
const GRID_SIDE: usize = 4;
/// Wall coordinate (1,1).
pub const GRID_START: usize = 0;
/// Wall coordinate (4,4).
pub const GRID_GOAL: usize = GRID_SIDE * GRID_SIDE - 1;

fn deterministic(n_states: usize, n_actions: usize, next: impl Fn(usize, usize) -> usize) -> Vec<Vec<Vec<f64>>> {
    (0..n_states)
        .map(|s| {
            (0..n_actions)
                .map(|a| {
                    let mut row = vec![0.0; n_states];
                    row[next(s, a)] = 1.0;
                    row
                })
                .collect()
        })
        .collect()
}

/// Two states; action 0 stays, action 1 switches.
pub fn two_state_mdp(gamma: f64) -> Result<TabularMdp> {
    let p = deterministic(2, 2, |s, a| if a == 0 { s } else { 1 - s });
    let r = vec![vec![20.0, -10.0], vec![-0.5, -2.0]];
    TabularMdp::new(p, r, vec![0], vec![], gamma)
}

/// Ten-cell chain with goals at both ends. Pushing against the end of the
/// chain while standing on a goal pays +1 and moves to an absorbing sink
/// (index 10). Action 0 moves left, action 1 moves right.
pub fn chain_mdp(gamma: f64) -> Result<TabularMdp> {
    let n = CHAIN_LEN + 1;
    let next = |s: usize, a: usize| match (s, a) {
        (CHAIN_SINK, _) => CHAIN_SINK,
        (0, 0) => CHAIN_SINK,
        (s, 1) if s == CHAIN_LEN - 1 => CHAIN_SINK,
        (s, 0) => s - 1,
        (s, _) => s + 1,
    };
    let p = deterministic(n, 2, next);
    let r = (0..n)
        .map(|s| {
            (0..2)
                .map(|a| if s != CHAIN_SINK && next(s, a) == CHAIN_SINK { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    TabularMdp::new(p, r, vec![CHAIN_START], vec![CHAIN_SINK], gamma)
}

/// 4x4 playable interior of a 6x6 walled grid, row-major from the start
/// corner. Actions: 0 up, 1 right, 2 down, 3 left. Bumping a wall leaves the
/// agent in place. Every move costs -1 except the one entering the goal.
pub fn gridworld_mdp(gamma: f64) -> Result<TabularMdp> {
    let n = GRID_SIDE * GRID_SIDE;
    let next = |s: usize, a: usize| {
        if s == GRID_GOAL {
            return s;
        }
        let (row, col) = (s / GRID_SIDE, s % GRID_SIDE);
        let (row, col) = match a {
            0 if row > 0 => (row - 1, col),
            1 if col + 1 < GRID_SIDE => (row, col + 1),
            2 if row + 1 < GRID_SIDE => (row + 1, col),
            3 if col > 0 => (row, col - 1),
            _ => (row, col),
        };
        row * GRID_SIDE + col
    };
    let p = deterministic(n, 4, next);
    let r = (0..n)
        .map(|s| {
            (0..4)
                .map(|a| if s == GRID_GOAL || next(s, a) == GRID_GOAL { 0.0 } else { -1.0 })
                .collect()
        })
        .collect();
    TabularMdp::new(p, r, vec![GRID_START], vec![GRID_GOAL], gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::VecDeque;

    #[test]
    fn two_state_switch_is_deterministic() {
        let m = two_state_mdp(0.95).unwrap();
        assert_eq!(m.p(0, 1, 1), 1.0);
        assert_eq!(m.r(1, 1), -2.0);
    }

    #[test]
    fn grid_shortest_path_is_six_moves() {
        let m = gridworld_mdp(0.9).unwrap();
        let mut dist = vec![usize::MAX; m.n_states];
        dist[GRID_START] = 0;
        let mut q = VecDeque::from([GRID_START]);
        while let Some(s) = q.pop_front() {
            for a in 0..m.n_actions {
                for s2 in 0..m.n_states {
                    if m.p(s, a, s2) > 0.0 && dist[s2] == usize::MAX {
                        dist[s2] = dist[s] + 1;
                        q.push_back(s2);
                    }
                }
            }
        }
        assert_eq!(dist[GRID_GOAL], 6);
    }

    #[test]
    fn grid_rewards() {
        let m = gridworld_mdp(0.9).unwrap();
        // into goal from (3,2) moving right
        assert_eq!(m.r(GRID_GOAL - 1, 1), 0.0);
        assert_eq!(m.r(GRID_START, 0), -1.0);
        assert_eq!(m.r(GRID_START, 1), -1.0);
    }

    #[test]
    fn chain_only_goal_pushes_pay() {
        let m = chain_mdp(0.6).unwrap();
        let paying: Vec<(usize, usize)> = (0..m.n_states)
            .flat_map(|s| (0..2).map(move |a| (s, a)))
            .filter(|&(s, a)| m.r(s, a) != 0.0)
            .collect();
        assert_eq!(paying, vec![(0, 0), (9, 1)]);
    }
}
