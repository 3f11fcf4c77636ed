//! Alpha-vector policy evaluation.
//!
//! The value of a history-dependent policy in an LMDP factors through the
//! belief state: `V_t(h, s) = b(h)^T alpha_{t,s}^{h,pi}` where the alpha
//! vectors depend only on `(t, s, h, pi)`, not on the belief mapping. They
//! obey the backward recursion
//!
//! `alpha_{t,s}^{h,pi}(m) = sum_a pi(a|h) [ rbar_m(s,a)
//!     + sum_{s',r} T_m(s'|s,a) R_m(r|s,a) alpha_{t+1,s'}^{ha(rs'),pi}(m) ]`
//!
//! with `alpha_{H+1} = 0`. On a model with hidden rewards, `rbar` includes
//! the hidden bonus while the propagation term keeps the observable
//! parameters, which is the optimistic variant of the recursion. This module
//! enumerates every history (guarded to desk scale) and returns all vectors,
//! so tests can check coordinatewise optimism claims directly.

use super::HiddenRewardModel;
use crate::model::Step;
use crate::policy::Policy;
use crate::value::{check_enumeration, EnumerationError};
use std::collections::BTreeMap;

/// Encoded observable history `[s_1, a_1, r_1, s_2, ..., s_t]`, always ending
/// with the current state. The time step is `len / 3` and the current state
/// is the last entry.
pub type HistoryKey = Vec<u32>;

/// All alpha vectors of a policy on a model, plus the resulting value.
#[derive(Debug, Clone)]
pub struct AlphaEval {
    /// Vector per history key; the key's last entry is the state `s` of
    /// `alpha_{t,s}^{h,pi}`.
    pub alphas: BTreeMap<HistoryKey, Vec<f64>>,
    /// `sum_s sum_m w_m nu_m(s) alpha_{1,s}(m)` plus the initial hidden
    /// bonus.
    pub value: f64,
}

/// Evaluate `policy` on `hm` by the alpha-vector recursion.
pub fn alpha_policy_eval<P: Policy>(
    hm: &HiddenRewardModel,
    policy: &P,
) -> Result<AlphaEval, EnumerationError> {
    check_enumeration(&hm.model)?;
    let mut alphas = BTreeMap::new();
    let mut history: Vec<Step> = Vec::new();
    let mut key: HistoryKey = Vec::new();
    let mut value = hm.initial_bonus();
    for s1 in 0..hm.model.num_states() {
        key.push(s1 as u32);
        let alpha = alpha_rec(hm, policy, 0, s1, &mut history, &mut key, &mut alphas);
        for m in 0..hm.model.num_contexts() {
            value += hm.model.mixing()[m] * hm.model.initial_prob(m, s1) * alpha[m];
        }
        key.pop();
    }
    Ok(AlphaEval { alphas, value })
}

fn alpha_rec<P: Policy>(
    hm: &HiddenRewardModel,
    policy: &P,
    t: usize,
    state: usize,
    history: &mut Vec<Step>,
    key: &mut HistoryKey,
    alphas: &mut BTreeMap<HistoryKey, Vec<f64>>,
) -> Vec<f64> {
    let model = &hm.model;
    let m_n = model.num_contexts();
    let mut alpha = vec![0.0; m_n];
    let probs = policy.action_probs(t, history, state);
    for (a, &pa) in probs.iter().enumerate() {
        if pa == 0.0 {
            continue;
        }
        for (m, slot) in alpha.iter_mut().enumerate() {
            *slot += pa * hm.mean_reward(m, state, a);
        }
        if t + 1 == model.horizon() {
            continue;
        }
        for r in 0..2u8 {
            for s_next in 0..model.num_states() {
                // skip branches unreachable in every context
                let reachable = (0..m_n).any(|m| {
                    model.transition(m, state, a, s_next) * model.reward_prob(m, state, a, r) > 0.0
                });
                if !reachable {
                    continue;
                }
                history.push(Step {
                    state,
                    action: a,
                    reward: r,
                });
                key.push(a as u32);
                key.push(r as u32);
                key.push(s_next as u32);
                let next = alpha_rec(hm, policy, t + 1, s_next, history, key, alphas);
                key.pop();
                key.pop();
                key.pop();
                history.pop();
                for (m, slot) in alpha.iter_mut().enumerate() {
                    *slot += pa
                        * model.transition(m, state, a, s_next)
                        * model.reward_prob(m, state, a, r)
                        * next[m];
                }
            }
        }
    }
    alphas.insert(key.clone(), alpha.clone());
    alpha
}

#[cfg(test)]
mod tests {
    use super::super::test_models::random_model;
    use super::super::HiddenRewardModel;
    use super::*;
    use crate::policy::UniformPolicy;
    use crate::value::exact_value;
    use approx::assert_abs_diff_eq;

    #[test]
    fn all_zero_rewards_give_zero_alphas() {
        let model = crate::model::LmdpModel::new(
            1,
            2,
            1,
            3,
            vec![1.0],
            vec![0.5, 0.5],
            vec![0.5; 4],
            vec![1.0, 0.0, 1.0, 0.0],
        )
        .unwrap();
        let hm = HiddenRewardModel::plain(model);
        let policy = UniformPolicy { num_actions: 1 };
        let eval = alpha_policy_eval(&hm, &policy).unwrap();
        assert_eq!(eval.value, 0.0);
        assert!(eval
            .alphas
            .values()
            .all(|alpha| alpha.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn alpha_value_matches_exact_value() {
        for seed in 0..8 {
            let model = random_model(300 + seed, 2, 2, 2, 2);
            let hm = HiddenRewardModel::plain(model.clone());
            let policy = UniformPolicy { num_actions: 2 };
            let eval = alpha_policy_eval(&hm, &policy).unwrap();
            let exact = exact_value(&model, &policy).unwrap();
            assert_abs_diff_eq!(eval.value, exact, epsilon = 1e-9);
        }
    }

    #[test]
    fn alpha_norms_bounded_by_horizon_on_true_models() {
        let model = random_model(77, 3, 2, 2, 3);
        let hm = HiddenRewardModel::plain(model.clone());
        let policy = UniformPolicy { num_actions: 2 };
        let eval = alpha_policy_eval(&hm, &policy).unwrap();
        let h = model.horizon() as f64;
        for alpha in eval.alphas.values() {
            for &v in alpha {
                assert!(v.abs() <= h + 1e-9);
            }
        }
    }

    #[test]
    fn extending_horizon_preserves_boundary() {
        // alpha_{H+1} = 0: evaluating with horizon H and H+1 gives values
        // that differ only through the extra step's contribution, and the
        // H-step suffix vectors of the longer run at t = H are the terminal
        // immediate rewards alone.
        let model = random_model(91, 2, 2, 1, 2);
        let policy = UniformPolicy { num_actions: 1 };
        let short = alpha_policy_eval(&HiddenRewardModel::plain(model.clone()), &policy).unwrap();
        let long_model = model.clone().with_horizon(3);
        let long = alpha_policy_eval(&HiddenRewardModel::plain(long_model.clone()), &policy).unwrap();
        // terminal vectors in the long run: keys of length 3*2+1 = 7
        for (key, alpha) in &long.alphas {
            if key.len() == 7 {
                let s = *key.last().unwrap() as usize;
                for m in 0..2 {
                    assert_abs_diff_eq!(
                        alpha[m],
                        long_model.mean_reward(m, s, 0),
                        epsilon = 1e-12
                    );
                }
            }
        }
        assert!(long.value >= short.value - 1e-12); // extra nonnegative reward
    }
}
