//! Ground-truth machinery: exact and iterative Bellman solutions, the
//! distributional Bellman operator on categorical tables, Wasserstein
//! metrics, Monte-Carlo return sampling and the Dirac/quadratic-critic
//! equilibrium.

mod bandit;
mod categorical;
mod exact;
mod monte_carlo;
mod wasserstein;

pub use bandit::{bandit_misordering_demo, quadratic_dirac_equilibrium, BanditReport};
pub use categorical::{distributional_backup, project_onto, support_for, CategoricalDist, ValueDistTable};
pub use exact::{
    greedy_policy, q_from_v, solve_optimal, solve_value_exact, value_iteration, OptimalSolution, PolicyTable,
};
pub use monte_carlo::{monte_carlo_returns, table_policy};
pub use wasserstein::{wasserstein_categorical, wasserstein_empirical, wasserstein_max, wasserstein_weighted};
