//! Exact evaluation of the value-difference bound between two LMDPs.
//!
//! For any history-dependent policy `pi` and models `M1`, `M2`,
//!
//! `|V_1 - V_2| <= H * E_{pi,M2}[ ||(nu^1_m - nu^2_m)(s)||_1 ]
//!   + sum_t E_{pi,M2}[ |rbar^1_m - rbar^2_m|(s_t,a_t) ]
//!   + H * sum_t E_{pi,M2}[ ||(P^1_m - P^2_m)(s',r|s_t,a_t)||_1 ]`
//!
//! where the expectations run over contexts and the on-policy occupancy of
//! `M2`. This module computes the right-hand side exactly by enumerating
//! histories of `M2`, for use as a test oracle.

use crate::model::{LmdpModel, Step};
use crate::policy::Policy;
use crate::value::{check_enumeration, EnumerationError};

/// Exact right-hand side of the value-difference inequality.
pub fn value_difference_bound<P: Policy>(
    m1: &LmdpModel,
    m2: &LmdpModel,
    policy: &P,
) -> Result<f64, EnumerationError> {
    assert_eq!(m1.num_contexts(), m2.num_contexts());
    assert_eq!(m1.num_states(), m2.num_states());
    assert_eq!(m1.num_actions(), m2.num_actions());
    assert_eq!(m1.horizon(), m2.horizon());
    check_enumeration(m2)?;
    let (m_n, s_n, a_n, h) = (
        m2.num_contexts(),
        m2.num_states(),
        m2.num_actions(),
        m2.horizon(),
    );

    // occupancy[((m*H + t)*S + s)*A + a] under (pi, M2), including mixing
    // weights
    let mut occupancy = vec![0.0; m_n * h * s_n * a_n];
    let mut history: Vec<Step> = Vec::new();
    for s1 in 0..s_n {
        let weights: Vec<f64> = (0..m_n)
            .map(|m| m2.mixing()[m] * m2.initial_prob(m, s1))
            .collect();
        if weights.iter().sum::<f64>() > 0.0 {
            occupancy_rec(m2, policy, 0, s1, &weights, &mut history, &mut occupancy);
        }
    }

    let nu_term: f64 = (0..m_n)
        .map(|m| {
            let l1: f64 = (0..s_n)
                .map(|s| (m1.initial_prob(m, s) - m2.initial_prob(m, s)).abs())
                .sum();
            m2.mixing()[m] * l1
        })
        .sum();

    let mut reward_term = 0.0;
    let mut joint_term = 0.0;
    for m in 0..m_n {
        for s in 0..s_n {
            for a in 0..a_n {
                let dr = (m1.mean_reward(m, s, a) - m2.mean_reward(m, s, a)).abs();
                let dp: f64 = (0..s_n)
                    .flat_map(|s_next| {
                        (0..2u8).map(move |r| {
                            (m1.joint_obs_prob(m, s, a, s_next, r)
                                - m2.joint_obs_prob(m, s, a, s_next, r))
                            .abs()
                        })
                    })
                    .sum();
                let occ: f64 = (0..h)
                    .map(|t| occupancy[((m * h + t) * s_n + s) * a_n + a])
                    .sum();
                reward_term += occ * dr;
                joint_term += occ * dp;
            }
        }
    }

    Ok(h as f64 * nu_term + reward_term + h as f64 * joint_term)
}

fn occupancy_rec<P: Policy>(
    model: &LmdpModel,
    policy: &P,
    t: usize,
    state: usize,
    weights: &[f64],
    history: &mut Vec<Step>,
    occupancy: &mut [f64],
) {
    let (s_n, a_n, h) = (model.num_states(), model.num_actions(), model.horizon());
    let probs = policy.action_probs(t, history, state);
    for (a, &pa) in probs.iter().enumerate() {
        if pa == 0.0 {
            continue;
        }
        for (m, &wm) in weights.iter().enumerate() {
            occupancy[((m * h + t) * s_n + state) * a_n + a] += wm * pa;
        }
        if t + 1 == h {
            continue;
        }
        for r in 0..2u8 {
            for s_next in 0..s_n {
                let next: Vec<f64> = weights
                    .iter()
                    .enumerate()
                    .map(|(m, &wm)| {
                        wm * pa
                            * model.reward_prob(m, state, a, r)
                            * model.transition(m, state, a, s_next)
                    })
                    .collect();
                if next.iter().sum::<f64>() > 0.0 {
                    history.push(Step {
                        state,
                        action: a,
                        reward: r,
                    });
                    occupancy_rec(model, policy, t + 1, s_next, &next, history, occupancy);
                    history.pop();
                }
            }
        }
    }
}
