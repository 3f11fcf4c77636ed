//! Brute-force probability and value oracles.
//!
//! Everything here enumerates histories exhaustively and is guarded to desk
//! scale; these functions are the ground truth that the planners, the
//! optimism machinery, and the PSR pipeline are tested against.

use crate::model::{LmdpModel, Step, Trajectory};
use crate::policy::Policy;
use thiserror::Error;

/// Hard cap on the number of history prefixes an enumeration may touch.
pub const ENUMERATION_GUARD: f64 = 1e7;

#[derive(Debug, Error)]
pub enum EnumerationError {
    #[error("enumeration size {size:.3e} exceeds guard {guard:.1e}")]
    TooLarge { size: f64, guard: f64 },
}

/// `(2SA)^H`, the number of observable histories, computed in f64 so that
/// oversized instances fail the guard instead of overflowing.
pub fn enumeration_size(model: &LmdpModel) -> f64 {
    let base = 2.0 * model.num_states() as f64 * model.num_actions() as f64;
    base.powi(model.horizon() as i32)
}

pub(crate) fn check_enumeration(model: &LmdpModel) -> Result<(), EnumerationError> {
    let size = enumeration_size(model);
    if size > ENUMERATION_GUARD {
        return Err(EnumerationError::TooLarge {
            size,
            guard: ENUMERATION_GUARD,
        });
    }
    Ok(())
}

/// Per-context and mixture probability of a full trajectory under a policy.
///
/// `per_context[m] = nu_m(s_1) * prod_t pi(a_t|h_t) R_m(r_t|s_t,a_t)
/// T_m(s_{t+1}|s_t,a_t)` with the transition factor omitted at the final
/// step; `mixture = sum_m w_m per_context[m]`.
pub fn trajectory_probability<P: Policy>(
    model: &LmdpModel,
    policy: &P,
    traj: &Trajectory,
) -> (Vec<f64>, f64) {
    let m_count = model.num_contexts();
    let h = traj.len();
    let mut per_context = vec![0.0; m_count];
    if h == 0 {
        return (per_context, 0.0);
    }
    // Policy factors are common across contexts.
    let mut policy_prob = 1.0;
    for t in 0..h {
        let st = &traj.steps[t];
        policy_prob *= policy.action_prob(t, &traj.steps[..t], st.state, st.action);
    }
    for (m, pc) in per_context.iter_mut().enumerate() {
        let mut p = model.initial_prob(m, traj.steps[0].state);
        for t in 0..h {
            let st = &traj.steps[t];
            p *= model.reward_prob(m, st.state, st.action, st.reward);
            if t + 1 < h {
                p *= model.transition(m, st.state, st.action, traj.steps[t + 1].state);
            }
        }
        *pc = p * policy_prob;
    }
    let mixture = per_context
        .iter()
        .zip(model.mixing())
        .map(|(p, w)| p * w)
        .sum();
    (per_context, mixture)
}

/// Exact expected cumulative reward of `policy` on `model` by exhaustive
/// recursion over histories. Guarded by [`ENUMERATION_GUARD`].
pub fn exact_value<P: Policy>(model: &LmdpModel, policy: &P) -> Result<f64, EnumerationError> {
    check_enumeration(model)?;
    let mut history: Vec<Step> = Vec::with_capacity(model.horizon());
    let init_weights: Vec<f64> = model.mixing().to_vec();
    let mut total = 0.0;
    for s1 in 0..model.num_states() {
        let weights: Vec<f64> = (0..model.num_contexts())
            .map(|m| init_weights[m] * model.initial_prob(m, s1))
            .collect();
        if weights.iter().sum::<f64>() == 0.0 {
            continue;
        }
        total += expected_reward_rec(model, policy, 0, s1, &weights, &mut history);
    }
    Ok(total)
}

/// Recursive expected reward: `weights[m]` is the unnormalized probability
/// (including mixing, policy, reward, and transition factors so far) of
/// reaching `state` at time `t` with the given history in context `m`.
fn expected_reward_rec<P: Policy>(
    model: &LmdpModel,
    policy: &P,
    t: usize,
    state: usize,
    weights: &[f64],
    history: &mut Vec<Step>,
) -> f64 {
    let probs = policy.action_probs(t, history, state);
    let mut total = 0.0;
    for (a, &pa) in probs.iter().enumerate() {
        if pa == 0.0 {
            continue;
        }
        // immediate expected reward: only r=1 contributes
        let imm: f64 = weights
            .iter()
            .enumerate()
            .map(|(m, &wm)| wm * pa * model.reward_prob(m, state, a, 1))
            .sum();
        total += imm;
        if t + 1 == model.horizon() {
            continue;
        }
        for r in 0..2u8 {
            let after_reward: Vec<f64> = weights
                .iter()
                .enumerate()
                .map(|(m, &wm)| wm * pa * model.reward_prob(m, state, a, r))
                .collect();
            if after_reward.iter().sum::<f64>() == 0.0 {
                continue;
            }
            for s_next in 0..model.num_states() {
                let next: Vec<f64> = after_reward
                    .iter()
                    .enumerate()
                    .map(|(m, &wm)| wm * model.transition(m, state, a, s_next))
                    .collect();
                if next.iter().sum::<f64>() == 0.0 {
                    continue;
                }
                history.push(Step {
                    state,
                    action: a,
                    reward: r,
                });
                total += expected_reward_rec(model, policy, t + 1, s_next, &next, history);
                history.pop();
            }
        }
    }
    total
}

/// Visit every trajectory shape of `h` steps over the model's state/action
/// space (all `(s_1, a_1, r_1, ..., a_h, r_h)` index combinations).
///
/// Purely combinatorial; the callback decides what to do with zero-probability
/// trajectories. Used by completeness and indistinguishability checks.
pub fn for_each_trajectory<F: FnMut(&Trajectory)>(
    num_states: usize,
    num_actions: usize,
    h: usize,
    mut f: F,
) {
    let mut steps: Vec<Step> = Vec::with_capacity(h);
    fn rec<F: FnMut(&Trajectory)>(
        num_states: usize,
        num_actions: usize,
        h: usize,
        state: usize,
        steps: &mut Vec<Step>,
        f: &mut F,
    ) {
        if steps.len() == h {
            f(&Trajectory {
                steps: steps.clone(),
                true_context: None,
            });
            return;
        }
        for a in 0..num_actions {
            for r in 0..2u8 {
                steps.push(Step {
                    state,
                    action: a,
                    reward: r,
                });
                if steps.len() == h {
                    rec(num_states, num_actions, h, usize::MAX, steps, f);
                } else {
                    for s_next in 0..num_states {
                        rec(num_states, num_actions, h, s_next, steps, f);
                    }
                }
                steps.pop();
            }
        }
    }
    for s1 in 0..num_states {
        rec(num_states, num_actions, h, s1, &mut steps, &mut f);
    }
}
