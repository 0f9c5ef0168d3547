//! Canned experiments: the tabular comparison table, the W1 diagnostic
//! series, exact solutions, the bandit counterexample and gradient checks.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::env::{build_env, EnvKind, EnvSpec};
use crate::error::{Error, Result};
use crate::log::TrainLog;
use crate::nn::{gradient_check, DenseNet, CONTROL_WIDTH, TABULAR_WIDTH};
use crate::par::par_map;
use crate::rng::stream_rng;
use crate::solvers::{bandit_misordering_demo, solve_optimal, BanditReport, OptimalSolution};

use super::config::{AgentKind, Overrides, RunConfig};
use super::output::{line_plot_svg, mean_std, Series};
use super::run::train_seed;

pub const TABLE1_AGENTS: [AgentKind; 3] = [AgentKind::Q, AgentKind::Dq, AgentKind::GanDqn];
pub const TABLE1_ENVS: [EnvKind; 3] = [EnvKind::TwoState, EnvKind::TwoGoalChain, EnvKind::Gridworld];

/// One agent/environment cell: per-seed mean reward per episode.
#[derive(Debug, Clone, PartialEq)]
pub struct TableCell {
    pub agent: AgentKind,
    pub env: EnvKind,
    pub seeds: Vec<u64>,
    pub seed_means: Vec<f64>,
    pub diverged: Vec<u64>,
}

impl TableCell {
    pub fn mean(&self) -> f64 {
        mean_std(&self.seed_means).0
    }

    pub fn std(&self) -> f64 {
        mean_std(&self.seed_means).1
    }

    /// Seeds whose mean reward is at least `threshold`.
    pub fn count_at_least(&self, threshold: f64) -> usize {
        self.seed_means.iter().filter(|&&m| m >= threshold).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1 {
    /// Row-major over `TABLE1_AGENTS` × `TABLE1_ENVS`.
    pub cells: Vec<TableCell>,
}

impl Table1 {
    pub fn cell(&self, agent: AgentKind, env: EnvKind) -> Option<&TableCell> {
        self.cells.iter().find(|c| c.agent == agent && c.env == env)
    }

    /// Markdown grid of `mean ± std` with agents as rows.
    pub fn render(&self) -> String {
        let mut out = String::from("| agent |");
        for env in TABLE1_ENVS {
            write!(out, " {env} |").unwrap();
        }
        out += "\n|---|---|---|---|\n";
        for agent in TABLE1_AGENTS {
            write!(out, "| {agent} |").unwrap();
            for env in TABLE1_ENVS {
                let c = self.cell(agent, env).expect("full grid");
                write!(out, " {:.3} ± {:.3} |", c.mean(), c.std()).unwrap();
            }
            out += "\n";
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("agent,env,mean,std,seed_means\n");
        for c in &self.cells {
            let per: Vec<String> = c.seed_means.iter().map(f64::to_string).collect();
            writeln!(out, "{},{},{},{},{}", c.agent, c.env, c.mean(), c.std(), per.join(";")).unwrap();
        }
        fs::write(path, out)?;
        Ok(())
    }
}

/// Runs the nine agent/environment cells over `seeds`, in parallel across
/// every (cell, seed) job. `overrides` apply to every cell.
pub fn table1(seeds: &[u64], overrides: &Overrides) -> Result<Table1> {
    if seeds.is_empty() {
        return Err(Error::Config("seed list is empty".into()));
    }
    let mut jobs = Vec::new();
    for agent in TABLE1_AGENTS {
        for env in TABLE1_ENVS {
            let mut cfg = RunConfig { env, agent, seeds: seeds.to_vec(), overrides: overrides.clone(), ..RunConfig::default() };
            // The per-episode W1 diagnostic is only needed for the fig1 preset.
            cfg.overrides.diag_every = Some(overrides.diag_every.unwrap_or(0));
            cfg.validate()?;
            jobs.extend(seeds.iter().map(|&s| (cfg.clone(), s)));
        }
    }
    let logs = par_map(&jobs, |(cfg, seed)| train_seed(cfg, *seed)).into_iter().collect::<Result<Vec<TrainLog>>>()?;
    let mut cells = Vec::new();
    for (chunk, jobs) in logs.chunks(seeds.len()).zip(jobs.chunks(seeds.len())) {
        cells.push(TableCell {
            agent: jobs[0].0.agent,
            env: jobs[0].0.env,
            seeds: seeds.to_vec(),
            seed_means: chunk.iter().map(TrainLog::mean_reward).collect(),
            diverged: chunk.iter().filter(|l| l.diverged.is_some()).map(|l| l.seed).collect(),
        });
    }
    Ok(Table1 { cells })
}

/// GAN Q-learning on the two-state MDP with the W1 diagnostic every
/// `diag_every` episodes; returns one log per seed.
pub fn fig1(seeds: &[u64], overrides: &Overrides) -> Result<Vec<TrainLog>> {
    let cfg = RunConfig {
        env: EnvKind::TwoState,
        agent: AgentKind::GanDqn,
        seeds: seeds.to_vec(),
        overrides: overrides.clone(),
        ..RunConfig::default()
    };
    cfg.validate()?;
    if cfg.gan_config(0).diag_every == 0 {
        return Err(Error::Config("fig1 needs diag_every > 0".into()));
    }
    par_map(seeds, |&s| train_seed(&cfg, s)).into_iter().collect()
}

/// Long-form diagnostic CSV (`seed,episode,state,action,w1`) and one SVG
/// per `(s, a)` pair showing every seed.
pub fn write_fig1(logs: &[TrainLog], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut csv = String::from("seed,episode,state,action,w1\n");
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for log in logs {
        for d in &log.diagnostics {
            for &(s, a, w) in &d.pairs {
                writeln!(csv, "{},{},{s},{a},{w}", log.seed, d.episode).unwrap();
                if !pairs.contains(&(s, a)) {
                    pairs.push((s, a));
                }
            }
        }
    }
    fs::write(dir.join("fig1-w1.csv"), csv)?;
    for (s, a) in pairs {
        let series: Vec<Series> = logs
            .iter()
            .map(|log| Series {
                label: format!("seed {}", log.seed),
                points: log.diagnostics.iter().filter_map(|d| d.get(s, a).map(|w| (d.episode as f64, w))).collect(),
                band: None,
            })
            .collect();
        let title = format!("W1(generator, Monte-Carlo) at s{s}, a{a}");
        fs::write(dir.join(format!("fig1-s{s}-a{a}.svg")), line_plot_svg(&title, "episode", "W1", &series))?;
    }
    Ok(())
}

/// Exact optimal values and policy of a tabular environment.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub env: EnvKind,
    pub solution: OptimalSolution,
    /// Undiscounted return of the optimal policy from the start state over
    /// one capped episode (deterministic environments only).
    pub episode_return: Option<f64>,
    pub terminal: Vec<bool>,
}

pub fn solve(env: EnvKind) -> Result<SolveReport> {
    if !env.is_tabular() {
        return Err(Error::NotTabular(env.name().to_string()));
    }
    let spec = EnvSpec::preset(env);
    let mut e = build_env(spec, 0)?;
    let mdp = e.tabular_dynamics()?;
    let solution = solve_optimal(&mdp)?;
    let deterministic = (0..mdp.n_states).all(|s| (0..mdp.n_actions).all(|a| mdp.row(s, a).iter().all(|&p| p == 0.0 || p == 1.0)));
    let episode_return = if deterministic {
        let mut obs = e.reset();
        let mut total = 0.0;
        loop {
            let step = e.step(solution.policy[obs.state_id.expect("tabular")])?;
            total += step.reward;
            if step.done() {
                break Some(total);
            }
            obs = step.obs;
        }
    } else {
        None
    };
    let terminal = (0..mdp.n_states).map(|s| mdp.is_terminal(s)).collect();
    Ok(SolveReport { env, solution, episode_return, terminal })
}

impl SolveReport {
    pub fn render(&self) -> String {
        let mut out = format!("exact solution for {}\nstate  V*  Q*(s, a)...  greedy\n", self.env);
        for (s, v) in self.solution.v.iter().enumerate() {
            if self.terminal[s] {
                writeln!(out, "s{s}  terminal").unwrap();
                continue;
            }
            let q: Vec<String> = self.solution.q[s].iter().map(|x| format!("{x:.6}")).collect();
            writeln!(out, "s{s}  {v:.6}  {}  a{}", q.join("  "), self.solution.policy[s]).unwrap();
        }
        if let Some(r) = self.episode_return {
            writeln!(out, "optimal undiscounted episode return from start: {r}").unwrap();
        }
        out
    }
}

pub fn bandit_demo(epsilon: f64) -> Result<(BanditReport, String)> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} outside (0, 0.5)")));
    }
    let r = bandit_misordering_demo(epsilon)?;
    let text = format!(
        "arm A: deterministic {:.6}; arm B: Bernoulli(1/2), mean {:.6}\n\
         Dirac equilibrium under a quadratic critic: A -> {:.9}, B -> {:.9} (1/sqrt(2) = {:.9})\n\
         {}\n",
        r.mean_a,
        r.mean_b,
        r.equilibrium_a,
        r.equilibrium_b,
        std::f64::consts::FRAC_1_SQRT_2,
        r.verdict()
    );
    Ok((r, text))
}

/// Result of checking one random network.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckLine {
    pub sizes: Vec<usize>,
    pub param: f64,
    pub input: Option<f64>,
    pub penalty: Option<f64>,
}

/// Gradient checks on `n` random networks, cycling through scalar-output
/// critics and multi-head generators at both preset widths and a few
/// narrow shapes.
pub fn gradcheck_sweep(n: usize, seed: u64) -> Vec<GradCheckLine> {
    let shapes: Vec<Vec<usize>> = vec![
        vec![1 + 2 + 2, TABULAR_WIDTH, TABULAR_WIDTH, 1],
        vec![2 + 8, TABULAR_WIDTH, TABULAR_WIDTH, 2],
        vec![1 + 4 + 2, CONTROL_WIDTH, CONTROL_WIDTH, 1],
        vec![6 + 16, CONTROL_WIDTH, CONTROL_WIDTH, 3],
        vec![3, 5, 1],
        vec![4, 7, 6, 1],
        vec![2, 3, 3, 3, 2],
    ];
    let idx: Vec<usize> = (0..n).collect();
    par_map(&idx, |&i| {
        let mut rng = stream_rng(seed, 1000 + i as u64);
        let net = DenseNet::new(&shapes[i % shapes.len()], &mut rng);
        let r = gradient_check(&net, 1e-4, &mut rng);
        GradCheckLine { sizes: net.sizes(), param: r.param, input: r.input, penalty: r.penalty }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_rejects_control() {
        assert!(solve(EnvKind::CartPole).is_err());
    }

    #[test]
    fn gridworld_return() {
        assert_eq!(solve(EnvKind::Gridworld).unwrap().episode_return, Some(-5.0));
    }

    #[test]
    fn bandit_range() {
        assert!(bandit_demo(0.5).is_err());
        assert!(bandit_demo(0.0).is_err());
        let (_, text) = bandit_demo(0.01).unwrap();
        assert!(text.contains("0.707106781"));
        assert!(text.contains("equilibrium prefers arm B; truth prefers arm A"));
    }
}
