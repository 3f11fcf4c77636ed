//! Policies: mappings from (time step, observed history, current state) to
//! action distributions.
//!
//! Policies are pure functions of their inputs, which makes replay exact:
//! the same history always yields the same distribution. Belief-based
//! policies (Q-MDP, PBVI) recompute their belief from the history through
//! the model estimate they were planned on; see [`crate::planning`].

use crate::model::Step;
use crate::rng::sample_index;

/// History-dependent stochastic policy over `A` actions.
///
/// `history` holds the steps strictly before time `t` (so `history.len() ==
/// t`), and `state` is the state observed at time `t`. Time is 0-based.
pub trait Policy: Send + Sync {
    fn num_actions(&self) -> usize;

    /// Distribution over actions; must sum to 1.
    fn action_probs(&self, t: usize, history: &[Step], state: usize) -> Vec<f64>;

    /// Probability of one action.
    fn action_prob(&self, t: usize, history: &[Step], state: usize, action: usize) -> f64 {
        self.action_probs(t, history, state)[action]
    }

    /// Sample an action.
    fn sample_action<R: rand::Rng + ?Sized>(
        &self,
        t: usize,
        history: &[Step],
        state: usize,
        rng: &mut R,
    ) -> usize
    where
        Self: Sized,
    {
        sample_index(&self.action_probs(t, history, state), rng)
    }
}

/// Uniformly random actions, the default sampling/exploration policy.
#[derive(Debug, Clone)]
pub struct UniformPolicy {
    pub num_actions: usize,
}

impl Policy for UniformPolicy {
    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn action_probs(&self, _t: usize, _history: &[Step], _state: usize) -> Vec<f64> {
        vec![1.0 / self.num_actions as f64; self.num_actions]
    }

    fn action_prob(&self, _t: usize, _history: &[Step], _state: usize, _action: usize) -> f64 {
        1.0 / self.num_actions as f64
    }

    fn sample_action<R: rand::Rng + ?Sized>(
        &self,
        _t: usize,
        _history: &[Step],
        _state: usize,
        rng: &mut R,
    ) -> usize {
        rng.random_range(0..self.num_actions)
    }
}

/// Deterministic state-to-action table.
#[derive(Debug, Clone)]
pub struct MemorylessPolicy {
    pub actions_by_state: Vec<usize>,
    pub num_actions: usize,
}

impl Policy for MemorylessPolicy {
    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn action_probs(&self, _t: usize, _history: &[Step], state: usize) -> Vec<f64> {
        let mut probs = vec![0.0; self.num_actions];
        probs[self.actions_by_state[state]] = 1.0;
        probs
    }

    fn action_prob(&self, _t: usize, _history: &[Step], state: usize, action: usize) -> f64 {
        if self.actions_by_state[state] == action {
            1.0
        } else {
            0.0
        }
    }

    fn sample_action<R: rand::Rng + ?Sized>(
        &self,
        _t: usize,
        _history: &[Step],
        state: usize,
        _rng: &mut R,
    ) -> usize {
        self.actions_by_state[state]
    }
}

/// Stochastic memoryless policy: one distribution per state.
#[derive(Debug, Clone)]
pub struct StochasticMemorylessPolicy {
    /// `probs[state * num_actions + action]`
    pub probs: Vec<f64>,
    pub num_actions: usize,
}

impl Policy for StochasticMemorylessPolicy {
    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn action_probs(&self, _t: usize, _history: &[Step], state: usize) -> Vec<f64> {
        self.probs[state * self.num_actions..(state + 1) * self.num_actions].to_vec()
    }

    fn action_prob(&self, _t: usize, _history: &[Step], state: usize, action: usize) -> f64 {
        self.probs[state * self.num_actions + action]
    }
}

/// Open-loop policy playing a fixed action sequence indexed by time.
#[derive(Debug, Clone)]
pub struct FixedSequencePolicy {
    pub actions: Vec<usize>,
    pub num_actions: usize,
}

impl Policy for FixedSequencePolicy {
    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn action_probs(&self, t: usize, _history: &[Step], _state: usize) -> Vec<f64> {
        let mut probs = vec![0.0; self.num_actions];
        probs[self.actions[t]] = 1.0;
        probs
    }

    fn action_prob(&self, t: usize, _history: &[Step], _state: usize, action: usize) -> f64 {
        if self.actions[t] == action {
            1.0
        } else {
            0.0
        }
    }

    fn sample_action<R: rand::Rng + ?Sized>(
        &self,
        t: usize,
        _history: &[Step],
        _state: usize,
        _rng: &mut R,
    ) -> usize {
        self.actions[t]
    }
}
