//! Episode simulation and Monte Carlo value estimation.

use crate::model::{LmdpModel, Step, Trajectory};
use crate::policy::Policy;
use rand::Rng;
use crate::rng::{sample_index, substream};
use crate::{par, rng::RunRng};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("policy has {policy} actions but model has {model}")]
    ActionSpaceMismatch { policy: usize, model: usize },
}

/// Draw one episode of the model's horizon: context `m ~ w`, `s_1 ~ nu_m`,
/// then for each step the policy's action, `r ~ R_m`, `s' ~ T_m`.
///
/// Deterministic given the RNG state; `true_context` records the drawn `m`.
pub fn sample_episode<P: Policy>(
    model: &LmdpModel,
    policy: &P,
    rng: &mut RunRng,
) -> Result<Trajectory, SimError> {
    sample_episode_with_horizon(model, policy, model.horizon(), rng)
}

/// Same as [`sample_episode`] but with an explicit number of steps, used by
/// the PSR sampler which needs trajectories shorter or longer than the
/// model's nominal horizon.
pub fn sample_episode_with_horizon<P: Policy>(
    model: &LmdpModel,
    policy: &P,
    horizon: usize,
    rng: &mut RunRng,
) -> Result<Trajectory, SimError> {
    if policy.num_actions() != model.num_actions() {
        return Err(SimError::ActionSpaceMismatch {
            policy: policy.num_actions(),
            model: model.num_actions(),
        });
    }
    let m = sample_index(model.mixing(), rng);
    let mut state = sample_index(model.initial_dist(m), rng);
    let mut steps = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let action = policy.sample_action(t, &steps, state, rng);
        let reward = if rng.random::<f64>() < model.reward_prob(m, state, action, 1) {
            1u8
        } else {
            0u8
        };
        steps.push(Step {
            state,
            action,
            reward,
        });
        state = sample_index(model.transition_row(m, state, action), rng);
    }
    Ok(Trajectory {
        steps,
        true_context: Some(m),
    })
}

/// Sample mean and standard error of the episode return over `n_episodes`
/// rollouts. Episode `i` draws from `substream(seed, i)`, so the result does
/// not depend on thread scheduling.
pub fn monte_carlo_value<P: Policy>(
    model: &LmdpModel,
    policy: &P,
    n_episodes: usize,
    seed: u64,
) -> Result<(f64, f64), SimError> {
    if policy.num_actions() != model.num_actions() {
        return Err(SimError::ActionSpaceMismatch {
            policy: policy.num_actions(),
            model: model.num_actions(),
        });
    }
    let returns = par::map_indexed(n_episodes, |i| {
        let mut rng = substream(seed, i as u64);
        let traj = sample_episode(model, policy, &mut rng).expect("dims checked");
        traj.episode_return()
    });
    Ok(mean_and_std_error(&returns))
}

/// Sequential twin of [`monte_carlo_value`]; same results, used by the
/// benchmark suite to compare against the rayon path.
pub fn monte_carlo_value_seq<P: Policy>(
    model: &LmdpModel,
    policy: &P,
    n_episodes: usize,
    seed: u64,
) -> Result<(f64, f64), SimError> {
    if policy.num_actions() != model.num_actions() {
        return Err(SimError::ActionSpaceMismatch {
            policy: policy.num_actions(),
            model: model.num_actions(),
        });
    }
    let returns = par::map_indexed_seq(n_episodes, |i| {
        let mut rng = substream(seed, i as u64);
        let traj = sample_episode(model, policy, &mut rng).expect("dims checked");
        traj.episode_return()
    });
    Ok(mean_and_std_error(&returns))
}

/// Returns are integer-valued, so the sums below are exact in f64 and
/// independent of summation order.
fn mean_and_std_error(returns: &[f64]) -> (f64, f64) {
    let n = returns.len() as f64;
    if returns.is_empty() {
        return (0.0, 0.0);
    }
    let sum: f64 = returns.iter().sum();
    let sum_sq: f64 = returns.iter().map(|x| x * x).sum();
    let mean = sum / n;
    if returns.len() == 1 {
        return (mean, 0.0);
    }
    let var = ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0);
    (mean, (var / n).sqrt())
}
