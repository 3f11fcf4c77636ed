//! Planning oracles for latent MDPs.
//!
//! Planners operate on a [`HiddenRewardModel`]: an LMDP plus nonnegative
//! hidden per-step rewards and per-context initial bonuses. Hidden rewards
//! enter the expected reward additively during planning but never appear in
//! trajectories, which is exactly how the optimistic models built by
//! [`crate::lucrl`] encode their exploration bonuses. Planning on a plain
//! model is the zero-hidden-reward special case.

mod alpha;
mod diff;
mod pbvi;

pub use alpha::{alpha_policy_eval, AlphaEval, HistoryKey};
pub use diff::value_difference_bound;
pub use pbvi::{pbvi_policy, PbviTables};

use crate::model::{belief_update, initial_belief, Belief, LmdpModel, Step};
use crate::policy::Policy;
use crate::value::EnumerationError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlanningError {
    #[error("belief grid size {size:.3e} exceeds guard {guard:.1e}")]
    GridTooLarge { size: f64, guard: f64 },
    #[error("epsilon_d must lie in (0, 1], got {0}")]
    BadResolution(f64),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
    #[error("hidden reward out of range at (m={m}, s={s}, a={a}): {value}")]
    HiddenRewardRange { m: usize, s: usize, a: usize, value: f64 },
    #[error("initial hidden reward out of range at m={m}: {value}")]
    InitHiddenRange { m: usize, value: f64 },
}

/// An LMDP with hidden planning-time rewards.
///
/// `hidden[(m*S+s)*A+a]` is a per-step bonus in `[0, H]`; `init_hidden[m]`
/// is in `[0, 1]` and contributes `H * init_hidden[m]` to the value of an
/// episode played in context `m` (the episode-start counterpart of the
/// per-step bonuses).
#[derive(Debug, Clone)]
pub struct HiddenRewardModel {
    pub model: LmdpModel,
    hidden: Vec<f64>,
    init_hidden: Vec<f64>,
}

impl HiddenRewardModel {
    pub fn new(
        model: LmdpModel,
        hidden: Vec<f64>,
        init_hidden: Vec<f64>,
    ) -> Result<Self, PlanningError> {
        let (m, s, a, h) = (
            model.num_contexts(),
            model.num_states(),
            model.num_actions(),
            model.horizon(),
        );
        assert_eq!(hidden.len(), m * s * a);
        assert_eq!(init_hidden.len(), m);
        for mm in 0..m {
            for ss in 0..s {
                for aa in 0..a {
                    let v = hidden[(mm * s + ss) * a + aa];
                    if !(0.0..=h as f64 + 1e-12).contains(&v) {
                        return Err(PlanningError::HiddenRewardRange {
                            m: mm,
                            s: ss,
                            a: aa,
                            value: v,
                        });
                    }
                }
            }
        }
        for (mm, &v) in init_hidden.iter().enumerate() {
            if !(0.0..=1.0 + 1e-12).contains(&v) {
                return Err(PlanningError::InitHiddenRange { m: mm, value: v });
            }
        }
        Ok(HiddenRewardModel {
            model,
            hidden,
            init_hidden,
        })
    }

    /// Wrap a model with zero hidden rewards.
    pub fn plain(model: LmdpModel) -> Self {
        let hidden = vec![0.0; model.num_contexts() * model.num_states() * model.num_actions()];
        let init_hidden = vec![0.0; model.num_contexts()];
        HiddenRewardModel {
            model,
            hidden,
            init_hidden,
        }
    }

    #[inline]
    pub fn hidden_reward(&self, m: usize, s: usize, a: usize) -> f64 {
        self.hidden[(m * self.model.num_states() + s) * self.model.num_actions() + a]
    }

    #[inline]
    pub fn init_hidden(&self, m: usize) -> f64 {
        self.init_hidden[m]
    }

    /// Expected planning-time reward: observable mean plus hidden bonus.
    #[inline]
    pub fn mean_reward(&self, m: usize, s: usize, a: usize) -> f64 {
        self.model.mean_reward(m, s, a) + self.hidden_reward(m, s, a)
    }

    /// Value contribution of the initial hidden rewards,
    /// `H * sum_m w_m * init_hidden[m]`.
    pub fn initial_bonus(&self) -> f64 {
        self.model.horizon() as f64
            * self
                .init_hidden
                .iter()
                .zip(self.model.mixing())
                .map(|(b, w)| b * w)
                .sum::<f64>()
    }
}

/// Per-context, per-timestep action values from finite-horizon backward
/// induction: `Q_{m,t}(s,a) = rbar_m(s,a) + sum_{s'} T_m(s'|s,a) V_{m,t+1}(s')`
/// with `V_{m,H+1} = 0`.
#[derive(Debug, Clone)]
pub struct QTables {
    m: usize,
    s: usize,
    a: usize,
    h: usize,
    q: Vec<f64>,
    v: Vec<f64>,
}

impl QTables {
    /// `Q_{m,t}(s,a)`, `t` 0-based.
    #[inline]
    pub fn q(&self, m: usize, t: usize, s: usize, a: usize) -> f64 {
        self.q[((m * self.h + t) * self.s + s) * self.a + a]
    }

    /// `V_{m,t}(s) = max_a Q_{m,t}(s,a)`, `t` 0-based; `t == H` gives 0.
    #[inline]
    pub fn v(&self, m: usize, t: usize, s: usize) -> f64 {
        if t >= self.h {
            0.0
        } else {
            self.v[(m * self.h + t) * self.s + s]
        }
    }

    pub fn horizon(&self) -> usize {
        self.h
    }
}

/// Finite-horizon Bellman backups, one independent pass per context.
pub fn backward_induction(hm: &HiddenRewardModel) -> QTables {
    let model = &hm.model;
    let (m_n, s_n, a_n, h) = (
        model.num_contexts(),
        model.num_states(),
        model.num_actions(),
        model.horizon(),
    );
    let mut q = vec![0.0; m_n * h * s_n * a_n];
    let mut v = vec![0.0; m_n * h * s_n];
    for m in 0..m_n {
        for t in (0..h).rev() {
            for s in 0..s_n {
                let mut best = f64::NEG_INFINITY;
                for a in 0..a_n {
                    let mut val = hm.mean_reward(m, s, a);
                    if t + 1 < h {
                        let row = model.transition_row(m, s, a);
                        for (s_next, &p) in row.iter().enumerate() {
                            if p > 0.0 {
                                val += p * v[(m * h + t + 1) * s_n + s_next];
                            }
                        }
                    }
                    q[((m * h + t) * s_n + s) * a_n + a] = val;
                    if val > best {
                        best = val;
                    }
                }
                v[(m * h + t) * s_n + s] = best;
            }
        }
    }
    QTables {
        m: m_n,
        s: s_n,
        a: a_n,
        h,
        q,
        v,
    }
}

#[derive(Debug, Clone)]
pub(crate) enum PlannerTables {
    Qmdp(QTables),
    Pbvi(PbviTables),
}

/// Belief-based deterministic policy produced by the planners.
///
/// The policy replays the context belief from the observed history through
/// the model it was planned on, then acts greedily: Q-MDP takes
/// `argmax_a sum_m b(m) Q_{m,t}(s,a)`, PBVI does a one-step lookahead into
/// its grid values. Ties break to the smallest action index.
#[derive(Debug, Clone)]
pub struct BeliefPolicy {
    model: LmdpModel,
    tables: PlannerTables,
}

impl BeliefPolicy {
    /// Belief at time `t` given the observed prefix, replayed on the
    /// planner's own model estimate.
    pub fn replay_belief(&self, history: &[Step], state: usize) -> Belief {
        let s1 = if history.is_empty() {
            state
        } else {
            history[0].state
        };
        let mut b = initial_belief(&self.model, s1);
        for (i, st) in history.iter().enumerate() {
            let s_next = if i + 1 < history.len() {
                history[i + 1].state
            } else {
                state
            };
            b = belief_update(&self.model, &b, st.state, st.action, st.reward, s_next);
        }
        b
    }

    /// Greedy action at `(t, belief, state)`.
    pub fn choose(&self, t: usize, belief: &Belief, state: usize) -> usize {
        match &self.tables {
            PlannerTables::Qmdp(q) => {
                let mut best = 0;
                let mut best_val = f64::NEG_INFINITY;
                for a in 0..q.a {
                    let val: f64 = (0..q.m)
                        .map(|m| belief.prob(m) * q.q(m, t, state, a))
                        .sum();
                    if val > best_val {
                        best_val = val;
                        best = a;
                    }
                }
                best
            }
            PlannerTables::Pbvi(tables) => tables.choose(&self.model, t, belief, state),
        }
    }
}

impl Policy for BeliefPolicy {
    fn num_actions(&self) -> usize {
        self.model.num_actions()
    }

    fn action_probs(&self, t: usize, history: &[Step], state: usize) -> Vec<f64> {
        let belief = self.replay_belief(history, state);
        let mut probs = vec![0.0; self.model.num_actions()];
        probs[self.choose(t, &belief, state)] = 1.0;
        probs
    }
}

/// Q-MDP heuristic: plan per context, act greedily on the belief-weighted Q
/// values.
pub fn qmdp_policy(hm: &HiddenRewardModel) -> BeliefPolicy {
    let tables = backward_induction(hm);
    BeliefPolicy {
        model: hm.model.clone(),
        tables: PlannerTables::Qmdp(tables),
    }
}

/// The scalar value estimate Q-MDP assigns to the initial belief:
/// `sum_s max_a sum_m w_m nu_m(s) Q_{m,1}(s,a)` plus the initial hidden
/// bonus. An upper bound on the optimal value of the planning model; logged
/// per episode by the learning loop.
pub fn qmdp_value_estimate(hm: &HiddenRewardModel, tables: &QTables) -> f64 {
    let model = &hm.model;
    let mut total = 0.0;
    for s in 0..model.num_states() {
        let mut best = f64::NEG_INFINITY;
        for a in 0..model.num_actions() {
            let val: f64 = (0..model.num_contexts())
                .map(|m| model.mixing()[m] * model.initial_prob(m, s) * tables.q(m, 0, s, a))
                .sum();
            if val > best {
                best = val;
            }
        }
        if best.is_finite() {
            total += best;
        }
    }
    total + hm.initial_bonus()
}

/// Exact value of the best history-dependent policy by exhaustive recursion
/// over histories. The comparison target for the approximate planners.
pub fn optimal_history_value(model: &LmdpModel) -> Result<f64, EnumerationError> {
    crate::value::check_enumeration(model)?;
    let mut total = 0.0;
    for s1 in 0..model.num_states() {
        let weights: Vec<f64> = (0..model.num_contexts())
            .map(|m| model.mixing()[m] * model.initial_prob(m, s1))
            .collect();
        if weights.iter().sum::<f64>() == 0.0 {
            continue;
        }
        total += best_value_rec(model, 0, s1, &weights);
    }
    Ok(total)
}

fn best_value_rec(model: &LmdpModel, t: usize, state: usize, weights: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for a in 0..model.num_actions() {
        let mut val: f64 = weights
            .iter()
            .enumerate()
            .map(|(m, &wm)| wm * model.reward_prob(m, state, a, 1))
            .sum();
        if t + 1 < model.horizon() {
            for r in 0..2u8 {
                for s_next in 0..model.num_states() {
                    let next: Vec<f64> = weights
                        .iter()
                        .enumerate()
                        .map(|(m, &wm)| {
                            wm * model.reward_prob(m, state, a, r)
                                * model.transition(m, state, a, s_next)
                        })
                        .collect();
                    if next.iter().sum::<f64>() > 0.0 {
                        val += best_value_rec(model, t + 1, s_next, &next);
                    }
                }
            }
        }
        if val > best {
            best = val;
        }
    }
    best
}

#[cfg(test)]
pub(crate) mod test_models {
    use crate::model::LmdpModel;
    use crate::rng::substream;
    use rand::Rng;

    /// Random dense model with Dirichlet(1)-style rows.
    pub fn random_model(seed: u64, m: usize, s: usize, a: usize, h: usize) -> LmdpModel {
        let mut rng = substream(seed, 0);
        let mut draw_row = |n: usize| -> Vec<f64> {
            let mut row: Vec<f64> = (0..n)
                .map(|_| -f64::ln(1.0 - rng.random::<f64>()))
                .collect();
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= total);
            row
        };
        let w = vec![1.0 / m as f64; m];
        let mut nu = Vec::new();
        for _ in 0..m {
            nu.extend(draw_row(s));
        }
        let mut t = Vec::new();
        let mut r = Vec::new();
        for _ in 0..(m * s * a) {
            t.extend(draw_row(s));
            r.extend(draw_row(2));
        }
        LmdpModel::new(m, s, a, h, w, nu, t, r).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::test_models::random_model;
    use super::*;
    use crate::policy::UniformPolicy;
    use crate::value::exact_value;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_rewards_give_zero_q() {
        let model = LmdpModel::new(
            1,
            2,
            2,
            3,
            vec![1.0],
            vec![0.5, 0.5],
            vec![0.5; 8],
            vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0],
        )
        .unwrap();
        let tables = backward_induction(&HiddenRewardModel::plain(model));
        for t in 0..3 {
            for s in 0..2 {
                for a in 0..2 {
                    assert_eq!(tables.q(0, t, s, a), 0.0);
                }
            }
        }
    }

    #[test]
    fn single_step_q_is_mean_reward() {
        let model = random_model(8, 2, 3, 2, 1);
        let hm = HiddenRewardModel::plain(model.clone());
        let tables = backward_induction(&hm);
        for m in 0..2 {
            for s in 0..3 {
                for a in 0..2 {
                    assert_abs_diff_eq!(
                        tables.q(m, 0, s, a),
                        model.mean_reward(m, s, a),
                        epsilon = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn q_values_bounded_by_horizon_for_plain_models() {
        let model = random_model(9, 2, 3, 2, 5);
        let tables = backward_induction(&HiddenRewardModel::plain(model));
        for m in 0..2 {
            for t in 0..5 {
                for s in 0..3 {
                    for a in 0..2 {
                        let q = tables.q(m, t, s, a);
                        assert!((0.0..=5.0 + 1e-9).contains(&q));
                        assert!(tables.v(m, t, s) >= q - 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn backward_induction_matches_action_sequence_enumeration() {
        // S=2, A=2, H=3 chain, M=1: optimal value by enumerating all
        // open-loop action sequences cannot exceed the closed-loop optimum,
        // and for M=1 the memoryless optimum equals it.
        let model = random_model(12, 1, 2, 2, 3);
        let hm = HiddenRewardModel::plain(model.clone());
        let tables = backward_induction(&hm);
        let v_bi: f64 = (0..2)
            .map(|s| model.initial_prob(0, s) * tables.v(0, 0, s))
            .sum();
        let v_opt = optimal_history_value(&model).unwrap();
        assert_abs_diff_eq!(v_bi, v_opt, epsilon = 1e-10);
    }

    #[test]
    fn qmdp_is_exact_for_single_context() {
        let model = random_model(21, 1, 3, 2, 4);
        let hm = HiddenRewardModel::plain(model.clone());
        let tables = backward_induction(&hm);
        let v_bi: f64 = (0..3)
            .map(|s| model.initial_prob(0, s) * tables.v(0, 0, s))
            .sum();
        let policy = qmdp_policy(&hm);
        let v_policy = exact_value(&model, &policy).unwrap();
        assert_abs_diff_eq!(v_policy, v_bi, epsilon = 1e-12);
    }

    #[test]
    fn qmdp_under_identified_context_matches_per_context_optimum() {
        let model = random_model(33, 2, 2, 2, 3);
        let hm = HiddenRewardModel::plain(model.clone());
        let tables = backward_induction(&hm);
        let policy = qmdp_policy(&hm);
        // with a one-hot belief the chosen action is the per-context argmax
        for m in 0..2 {
            let belief = crate::model::Belief::one_hot(m, 2);
            for t in 0..3 {
                for s in 0..2 {
                    let chosen = policy.choose(t, &belief, s);
                    let best = (0..2)
                        .max_by(|&x, &y| {
                            tables
                                .q(m, t, s, x)
                                .partial_cmp(&tables.q(m, t, s, y))
                                .unwrap()
                        })
                        .unwrap();
                    assert_abs_diff_eq!(
                        tables.q(m, t, s, chosen),
                        tables.q(m, t, s, best),
                        epsilon = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn qmdp_value_is_at_most_best_history_dependent_value() {
        for seed in 0..10 {
            let model = random_model(100 + seed, 2, 2, 2, 2);
            let hm = HiddenRewardModel::plain(model.clone());
            let policy = qmdp_policy(&hm);
            let v_qmdp = exact_value(&model, &policy).unwrap();
            let v_best = optimal_history_value(&model).unwrap();
            assert!(
                v_qmdp <= v_best + 1e-9,
                "seed {seed}: qmdp {v_qmdp} > best {v_best}"
            );
        }
    }

    #[test]
    fn uniform_policy_value_is_at_most_optimum() {
        let model = random_model(55, 2, 2, 2, 3);
        let uniform = UniformPolicy { num_actions: 2 };
        let v_u = exact_value(&model, &uniform).unwrap();
        let v_best = optimal_history_value(&model).unwrap();
        assert!(v_u <= v_best + 1e-9);
    }

    #[test]
    fn hidden_reward_validation() {
        let model = random_model(1, 1, 2, 1, 2);
        let bad = HiddenRewardModel::new(model.clone(), vec![3.0, 0.0], vec![0.0]);
        assert!(matches!(bad, Err(PlanningError::HiddenRewardRange { .. })));
        let bad = HiddenRewardModel::new(model.clone(), vec![0.5, 0.0], vec![1.5]);
        assert!(matches!(bad, Err(PlanningError::InitHiddenRange { .. })));
        let ok = HiddenRewardModel::new(model, vec![0.5, 2.0], vec![1.0]);
        assert!(ok.is_ok());
        assert_abs_diff_eq!(ok.unwrap().initial_bonus(), 2.0, epsilon = 1e-12);
    }
}
