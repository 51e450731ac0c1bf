//! Bandit optimization of the wall position.
//!
//! Each episode runs one cycle at a chosen wall fraction and returns its work
//! as the reward. A tabular action-value learner with ε-greedy exploration
//! picks the fraction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::engine::{cycle_outcomes, expected_cycle, CycleConfig, CycleLedger, CycleOutcomes, Regime};
use crate::error::{invalid, Result};
use crate::spectrum::{BoxGeometry, ThermalState, UnitSystem, DEFAULT_REL_TOL};
use crate::stats;

pub const CURVE_WINDOW: usize = 100;
pub const LEARNING_CURVE_HEADER: &str = "episode,windowed_mean_reward,greedy_action";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    /// `extraction_work − insertion_cost`.
    ExtractionOnly,
    /// `net_work` with erasure charged.
    NetWithErasure,
}

impl std::str::FromStr for RewardMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "extraction_only" => Ok(Self::ExtractionOnly),
            "net_with_erasure" => Ok(Self::NetWithErasure),
            other => Err(invalid(format!(
                "unknown reward mode {other:?} (expected extraction_only or net_with_erasure)"
            ))),
        }
    }
}

/// Everything in a [`CycleConfig`] except the wall fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleTemplate {
    pub length: f64,
    pub state: ThermalState,
    pub units: UnitSystem,
    pub regime: Regime,
    pub rel_tol: f64,
}

impl CycleTemplate {
    pub fn natural(temperature: f64, regime: Regime) -> Result<Self> {
        let units = UnitSystem::natural();
        Ok(Self {
            length: 1.0,
            state: ThermalState::new(temperature, &units)?,
            units,
            regime,
            rel_tol: DEFAULT_REL_TOL,
        })
    }

    pub fn config(&self, wall_fraction: f64) -> Result<CycleConfig> {
        CycleConfig::with_tolerance(
            BoxGeometry::with_wall(self.length, wall_fraction)?,
            self.state,
            self.units,
            self.regime,
            true,
            self.rel_tol,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    action_grid: Vec<f64>,
    template: CycleTemplate,
    reward_mode: RewardMode,
    stochastic: bool,
}

/// `{0.1, 0.2, …, 0.9}`.
pub fn default_grid() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

impl EnvSpec {
    pub fn new(
        action_grid: Vec<f64>,
        template: CycleTemplate,
        reward_mode: RewardMode,
        stochastic: bool,
    ) -> Result<Self> {
        if action_grid.is_empty() {
            return Err(invalid("action grid is empty"));
        }
        if action_grid.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return Err(invalid("action grid fractions must lie in (0, 1)"));
        }
        if action_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("action grid must be strictly increasing"));
        }
        Ok(Self {
            action_grid,
            template,
            reward_mode,
            stochastic,
        })
    }

    pub fn action_grid(&self) -> &[f64] {
        &self.action_grid
    }

    pub fn template(&self) -> &CycleTemplate {
        &self.template
    }

    pub fn reward_mode(&self) -> RewardMode {
        self.reward_mode
    }

    pub fn stochastic(&self) -> bool {
        self.stochastic
    }

    pub fn actions(&self) -> usize {
        self.action_grid.len()
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.actions() {
            return Err(invalid(format!(
                "action index {index} out of range for a grid of {}",
                self.actions()
            )));
        }
        Ok(())
    }
}

fn reward_of(ledger: &CycleLedger, mode: RewardMode) -> f64 {
    match mode {
        RewardMode::ExtractionOnly => ledger.extraction_work - ledger.insertion_cost,
        RewardMode::NetWithErasure => ledger.net_work,
    }
}

/// Reward of one episode at grid point `action_index`. `seed` only matters
/// in stochastic mode.
pub fn env_step(spec: &EnvSpec, action_index: usize, seed: u64) -> Result<f64> {
    spec.check_index(action_index)?;
    let config = spec.template.config(spec.action_grid[action_index])?;
    let ledger = if spec.stochastic {
        crate::engine::run_cycle(&config, seed)?
    } else {
        expected_cycle(&config)?
    };
    Ok(reward_of(&ledger, spec.reward_mode))
}

/// Per-action ledgers computed once, giving the same rewards as [`env_step`].
#[derive(Debug, Clone)]
pub struct Environment {
    spec: EnvSpec,
    outcomes: Vec<CycleOutcomes>,
}

impl Environment {
    pub fn new(spec: &EnvSpec) -> Result<Self> {
        let outcomes = spec
            .action_grid
            .iter()
            .map(|&x| cycle_outcomes(&spec.template.config(x)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec: spec.clone(),
            outcomes,
        })
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn step(&self, action_index: usize, seed: u64) -> Result<f64> {
        self.spec.check_index(action_index)?;
        let o = &self.outcomes[action_index];
        let ledger = if self.spec.stochastic {
            o.draw(seed)
        } else {
            o.expected
        };
        Ok(reward_of(&ledger, self.spec.reward_mode))
    }

    /// Expected reward of every action.
    pub fn expected_rewards(&self) -> Vec<f64> {
        self.outcomes
            .iter()
            .map(|o| reward_of(&o.expected, self.spec.reward_mode))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Policy {
    pub values: Vec<f64>,
    pub visit_counts: Vec<u64>,
}

impl Policy {
    pub fn new(actions: usize, initial_value: f64) -> Self {
        Self {
            values: vec![initial_value; actions],
            visit_counts: vec![0; actions],
        }
    }

    /// Index of the largest value; the lowest index wins ties.
    pub fn greedy_action(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn to_json(&self, action_grid: &[f64]) -> serde_json::Value {
        serde_json::json!({
            "actions": action_grid,
            "values": self.values,
            "visit_counts": self.visit_counts,
            "greedy_action": action_grid[self.greedy_action()],
        })
    }
}

/// `value ← value + alpha·(reward − value)` for one action.
pub fn q_update(mut policy: Policy, action_index: usize, reward: f64, alpha: f64) -> Result<Policy> {
    if action_index >= policy.values.len() {
        return Err(invalid(format!(
            "action index {action_index} out of range for {} actions",
            policy.values.len()
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let v = &mut policy.values[action_index];
    *v += alpha * (reward - *v);
    policy.visit_counts[action_index] += 1;
    Ok(policy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearningRate {
    Constant(f64),
    /// `1/n` for the n-th visit of an action.
    SampleAverage,
}

impl LearningRate {
    fn alpha(self, visits_before: u64) -> f64 {
        match self {
            Self::Constant(a) => a,
            Self::SampleAverage => 1.0 / (visits_before + 1) as f64,
        }
    }
}

/// `ε_k = max(end, start·decay^k)` for episode `k` counted from zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay: f64,
}

impl EpsilonSchedule {
    pub fn constant(epsilon: f64) -> Self {
        Self {
            start: epsilon,
            end: epsilon,
            decay: 1.0,
        }
    }

    /// Geometric decay from `start` reaching `end` after `episodes`.
    pub fn decaying(start: f64, end: f64, episodes: usize) -> Self {
        let decay = if start > 0.0 && end > 0.0 && episodes > 0 {
            (end / start).powf(1.0 / episodes as f64)
        } else {
            0.0
        };
        Self { start, end, decay }
    }

    pub fn at(&self, episode: usize) -> f64 {
        let e = i32::try_from(episode).map_or(0.0, |k| self.start * self.decay.powi(k));
        e.max(self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub episodes: usize,
    pub learning_rate: LearningRate,
    pub epsilon: EpsilonSchedule,
    pub seed: u64,
    pub initial_value: f64,
}

pub const DEFAULT_EPISODES: usize = 20_000;

impl TrainConfig {
    /// α = 0.1, ε from 0.3 to 0.01 over 20000 episodes, zero initial values.
    pub fn defaults(seed: u64) -> Self {
        Self {
            episodes: DEFAULT_EPISODES,
            learning_rate: LearningRate::Constant(0.1),
            epsilon: EpsilonSchedule::decaying(0.3, 0.01, DEFAULT_EPISODES),
            seed,
            initial_value: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(invalid("training needs at least one episode"));
        }
        if let LearningRate::Constant(a) = self.learning_rate {
            if !(a > 0.0 && a <= 1.0) {
                return Err(invalid(format!("learning rate must lie in (0, 1], got {a}")));
            }
        }
        let e = self.epsilon;
        if [e.start, e.end].iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(invalid("epsilon values must lie in [0, 1]"));
        }
        if !(e.decay >= 0.0 && e.decay.is_finite()) || !self.initial_value.is_finite() {
            return Err(invalid("epsilon decay and initial value must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub episode_indices: Vec<usize>,
    /// Mean reward over the last [`CURVE_WINDOW`] episodes (fewer at the start).
    pub windowed_mean_reward: Vec<f64>,
    /// Greedy wall fraction after each episode.
    pub greedy_action_history: Vec<f64>,
}

impl LearningCurve {
    pub fn len(&self) -> usize {
        self.episode_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episode_indices.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(LEARNING_CURVE_HEADER);
        out.push('\n');
        for i in 0..self.len() {
            let _ = writeln!(
                out,
                "{},{},{}",
                self.episode_indices[i], self.windowed_mean_reward[i], self.greedy_action_history[i]
            );
        }
        out
    }
}

/// ε-greedy tabular learning. One generator seeded from `config.seed`
/// drives both exploration and the per-episode environment seeds.
pub fn train(spec: &EnvSpec, config: &TrainConfig) -> Result<(Policy, LearningCurve)> {
    config.validate()?;
    let env = Environment::new(spec)?;
    let n = spec.actions();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut policy = Policy::new(n, config.initial_value);
    let mut curve = LearningCurve {
        episode_indices: Vec::with_capacity(config.episodes),
        windowed_mean_reward: Vec::with_capacity(config.episodes),
        greedy_action_history: Vec::with_capacity(config.episodes),
    };
    let mut window = std::collections::VecDeque::with_capacity(CURVE_WINDOW);
    let mut window_sum = 0.0;
    for k in 0..config.episodes {
        let explore: f64 = rng.random();
        let action = if explore < config.epsilon.at(k) {
            rng.random_range(0..n)
        } else {
            policy.greedy_action()
        };
        let reward = env.step(action, rng.random())?;
        let alpha = config.learning_rate.alpha(policy.visit_counts[action]);
        policy = q_update(policy, action, reward, alpha)?;

        window.push_back(reward);
        window_sum += reward;
        if window.len() > CURVE_WINDOW {
            window_sum -= window.pop_front().expect("nonempty");
        }
        curve.episode_indices.push(k + 1);
        curve.windowed_mean_reward.push(window_sum / window.len() as f64);
        curve.greedy_action_history.push(spec.action_grid[policy.greedy_action()]);
    }
    Ok((policy, curve))
}

/// Mean and standard error of the reward of the greedy action over
/// `episodes` independent episodes.
pub fn evaluate(policy: &Policy, spec: &EnvSpec, episodes: usize, seed: u64) -> Result<(f64, f64)> {
    if episodes == 0 {
        return Err(invalid("evaluation needs at least one episode"));
    }
    if policy.values.len() != spec.actions() {
        return Err(invalid("policy and action grid sizes differ"));
    }
    let env = Environment::new(spec)?;
    let action = policy.greedy_action();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rewards = (0..episodes)
        .map(|_| env.step(action, rng.random()))
        .collect::<Result<Vec<f64>>>()?;
    Ok((stats::mean(&rewards), stats::standard_error(&rewards)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::LN_2;

    fn spec(t: f64, regime: Regime, mode: RewardMode, stochastic: bool) -> EnvSpec {
        EnvSpec::new(default_grid(), CycleTemplate::natural(t, regime).unwrap(), mode, stochastic).unwrap()
    }

    #[test]
    fn symmetric_classical_reward() {
        let s = spec(2.0, Regime::Classical, RewardMode::ExtractionOnly, false);
        assert_relative_eq!(env_step(&s, 4, 0).unwrap(), 2.0 * LN_2, max_relative = 1e-14);
    }

    #[test]
    fn net_reward_closes() {
        for regime in [Regime::Classical, Regime::Quantum] {
            let s = spec(1.0, regime, RewardMode::NetWithErasure, false);
            for i in 0..9 {
                assert!(env_step(&s, i, 0).unwrap().abs() < 1e-9);
            }
        }
    }

    #[test]
    fn stochastic_step_is_repeatable() {
        let s = spec(1.0, Regime::Quantum, RewardMode::ExtractionOnly, true);
        assert_eq!(env_step(&s, 2, 99).unwrap(), env_step(&s, 2, 99).unwrap());
        let env = Environment::new(&s).unwrap();
        for seed in 0..20 {
            assert_eq!(env.step(2, seed).unwrap(), env_step(&s, 2, seed).unwrap());
        }
    }

    #[test]
    fn bad_index_and_grid() {
        let s = spec(1.0, Regime::Classical, RewardMode::ExtractionOnly, false);
        assert!(env_step(&s, 9, 0).is_err());
        let t = CycleTemplate::natural(1.0, Regime::Classical).unwrap();
        assert!(EnvSpec::new(vec![], t, RewardMode::ExtractionOnly, false).is_err());
        assert!(EnvSpec::new(vec![0.5, 0.4], t, RewardMode::ExtractionOnly, false).is_err());
        assert!(EnvSpec::new(vec![0.0, 0.4], t, RewardMode::ExtractionOnly, false).is_err());
    }

    #[test]
    fn update_arithmetic() {
        let p = q_update(Policy::new(3, 0.0), 1, 1.0, 0.5).unwrap();
        assert_eq!(p.values, vec![0.0, 0.5, 0.0]);
        assert_eq!(p.visit_counts, vec![0, 1, 0]);
        let p = q_update(p, 1, 7.25, 1.0).unwrap();
        assert_eq!(p.values[1], 7.25);
        assert!(q_update(p.clone(), 3, 1.0, 0.5).is_err());
        assert!(q_update(p, 0, 1.0, 0.0).is_err());
    }

    #[test]
    fn sample_average_matches_batch_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rewards: Vec<f64> = (0..500).map(|_| rng.random::<f64>() * 3.0 - 1.0).collect();
        let mut p = Policy::new(1, 0.0);
        for &r in &rewards {
            let a = LearningRate::SampleAverage.alpha(p.visit_counts[0]);
            p = q_update(p, 0, r, a).unwrap();
        }
        assert_relative_eq!(p.values[0], stats::mean(&rewards), max_relative = 1e-12);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let s = spec(1.0, Regime::Classical, RewardMode::NetWithErasure, false);
        let cfg = TrainConfig {
            episodes: 50,
            learning_rate: LearningRate::Constant(0.5),
            epsilon: EpsilonSchedule::constant(0.0),
            seed: 1,
            initial_value: 0.0,
        };
        let (p, curve) = train(&s, &cfg).unwrap();
        assert_eq!(p.greedy_action(), 0);
        assert_eq!(p.visit_counts[0], 50);
        assert!(curve.greedy_action_history.iter().all(|&a| a == 0.1));
    }

    #[test]
    fn optimistic_greedy_finds_argmax() {
        for regime in [Regime::Classical, Regime::Quantum] {
            let s = spec(1.0, regime, RewardMode::ExtractionOnly, false);
            let cfg = TrainConfig {
                episodes: 200,
                learning_rate: LearningRate::Constant(0.5),
                epsilon: EpsilonSchedule::constant(0.0),
                seed: 3,
                initial_value: 10.0,
            };
            let (p, _) = train(&s, &cfg).unwrap();
            assert_eq!(p.greedy_action(), 4, "{regime:?}");
        }
    }

    #[test]
    fn deterministic_evaluation_has_zero_error() {
        let s = spec(1.0, Regime::Quantum, RewardMode::ExtractionOnly, false);
        let (m, se) = evaluate(&Policy::new(9, 0.0), &s, 10, 0).unwrap();
        assert_eq!(se, 0.0);
        assert_eq!(m, env_step(&s, 0, 0).unwrap());
    }

    #[test]
    fn training_is_reproducible() {
        let s = spec(1.0, Regime::Classical, RewardMode::ExtractionOnly, true);
        let mut cfg = TrainConfig::defaults(8);
        cfg.episodes = 2000;
        assert_eq!(train(&s, &cfg).unwrap(), train(&s, &cfg).unwrap());
        let (p, curve) = train(&s, &cfg).unwrap();
        assert_eq!(curve.len(), 2000);
        assert_eq!(p.visit_counts.iter().sum::<u64>(), 2000);
        assert_eq!(curve.to_csv().lines().count(), 2001);
        assert_eq!(
            evaluate(&p, &s, 100, 5).unwrap(),
            evaluate(&p, &s, 100, 5).unwrap()
        );
    }

    #[test]
    fn epsilon_schedule_endpoints() {
        let e = EpsilonSchedule::decaying(0.3, 0.01, 20_000);
        assert_eq!(e.at(0), 0.3);
        assert_relative_eq!(e.at(20_000), 0.01, max_relative = 1e-9);
        assert_eq!(e.at(40_000), 0.01);
    }

    #[test]
    fn policy_json_fields() {
        let p = q_update(Policy::new(3, 0.0), 2, 1.0, 1.0).unwrap();
        let j = p.to_json(&[0.25, 0.5, 0.75]);
        assert_eq!(j["greedy_action"], 0.75);
        assert_eq!(j["visit_counts"][2], 1);
        assert_eq!(j.as_object().unwrap().len(), 4);
    }
}
