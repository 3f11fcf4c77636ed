//! Latent-MDP model, trajectories, and the context-belief recursion.
//!
//! An [`LmdpModel`] bundles `M` component MDPs over shared state/action
//! spaces with mixing weights and an episode horizon. Rewards are binary and
//! stored as two-entry distributions `R_m(r|s,a)`, mirroring the way the
//! transition table stores `T_m(s'|s,a)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Stochasticity tolerance for model validation and belief invariants.
pub const PROB_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension must be at least 1: {0}")]
    EmptyDimension(&'static str),
    #[error("{what} has wrong length: expected {expected}, got {got}")]
    BadLength {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{what} is not a probability distribution at {at}: sum {sum}")]
    NotStochastic {
        what: &'static str,
        at: String,
        sum: f64,
    },
    #[error("{what} has entry outside [0,1] at {at}: {value}")]
    OutOfRange {
        what: &'static str,
        at: String,
        value: f64,
    },
}

/// A latent MDP: `M` MDPs over `S` states and `A` actions, horizon `H`.
///
/// Tables are stored flat; the JSON form uses nested arrays (see
/// [`LmdpModel::to_json`]). All rows are validated to be probability
/// distributions within [`PROB_TOL`] at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelWire", into = "ModelWire")]
pub struct LmdpModel {
    m: usize,
    s: usize,
    a: usize,
    h: usize,
    /// Mixing weights, length `M`.
    w: Vec<f64>,
    /// Initial state distributions, `M*S`.
    nu: Vec<f64>,
    /// Transition tensor, `M*S*A*S`, row-stochastic over the last axis.
    t: Vec<f64>,
    /// Reward probabilities over binary rewards, `M*S*A*2`.
    r: Vec<f64>,
}

/// JSON wire format: `{"M","S","A","H","w","nu","T","R"}` with nested arrays.
#[derive(Serialize, Deserialize)]
struct ModelWire {
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "S")]
    s: usize,
    #[serde(rename = "A")]
    a: usize,
    #[serde(rename = "H")]
    h: usize,
    w: Vec<f64>,
    nu: Vec<Vec<f64>>,
    #[serde(rename = "T")]
    t: Vec<Vec<Vec<Vec<f64>>>>,
    #[serde(rename = "R")]
    r: Vec<Vec<Vec<Vec<f64>>>>,
}

impl From<LmdpModel> for ModelWire {
    fn from(model: LmdpModel) -> Self {
        let (m, s, a) = (model.m, model.s, model.a);
        let nu = (0..m)
            .map(|mm| model.nu[mm * s..(mm + 1) * s].to_vec())
            .collect();
        let t = (0..m)
            .map(|mm| {
                (0..s)
                    .map(|ss| {
                        (0..a)
                            .map(|aa| model.transition_row(mm, ss, aa).to_vec())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let r = (0..m)
            .map(|mm| {
                (0..s)
                    .map(|ss| {
                        (0..a)
                            .map(|aa| model.reward_row(mm, ss, aa).to_vec())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        ModelWire {
            m,
            s,
            a,
            h: model.h,
            w: model.w,
            nu,
            t,
            r,
        }
    }
}

impl TryFrom<ModelWire> for LmdpModel {
    type Error = ModelError;

    fn try_from(wire: ModelWire) -> Result<Self, ModelError> {
        let flatten4 = |v: Vec<Vec<Vec<Vec<f64>>>>| -> Vec<f64> {
            v.into_iter().flatten().flatten().flatten().collect()
        };
        LmdpModel::new(
            wire.m,
            wire.s,
            wire.a,
            wire.h,
            wire.w,
            wire.nu.into_iter().flatten().collect(),
            flatten4(wire.t),
            flatten4(wire.r),
        )
    }
}

fn check_row(what: &'static str, at: impl Fn() -> String, row: &[f64]) -> Result<(), ModelError> {
    for &v in row {
        if !(0.0..=1.0 + PROB_TOL).contains(&v) || v.is_nan() {
            return Err(ModelError::OutOfRange {
                what,
                at: at(),
                value: v,
            });
        }
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(ModelError::NotStochastic {
            what,
            at: at(),
            sum,
        });
    }
    Ok(())
}

impl LmdpModel {
    /// Build a model from flat tables and validate all invariants.
    ///
    /// Layouts: `w[m]`, `nu[m*S+s]`, `t[((m*S+s)*A+a)*S+s']`,
    /// `r[((m*S+s)*A+a)*2+reward]`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        m: usize,
        s: usize,
        a: usize,
        h: usize,
        w: Vec<f64>,
        nu: Vec<f64>,
        t: Vec<f64>,
        r: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if m == 0 {
            return Err(ModelError::EmptyDimension("M"));
        }
        if s == 0 {
            return Err(ModelError::EmptyDimension("S"));
        }
        if a == 0 {
            return Err(ModelError::EmptyDimension("A"));
        }
        if h == 0 {
            return Err(ModelError::EmptyDimension("H"));
        }
        let expect = |what: &'static str, got: usize, expected: usize| {
            if got != expected {
                Err(ModelError::BadLength {
                    what,
                    expected,
                    got,
                })
            } else {
                Ok(())
            }
        };
        expect("w", w.len(), m)?;
        expect("nu", nu.len(), m * s)?;
        expect("T", t.len(), m * s * a * s)?;
        expect("R", r.len(), m * s * a * 2)?;

        check_row("w", || "mixing weights".to_string(), &w)?;
        for mm in 0..m {
            check_row("nu", || format!("m={mm}"), &nu[mm * s..(mm + 1) * s])?;
            for ss in 0..s {
                for aa in 0..a {
                    let base = ((mm * s + ss) * a + aa) * s;
                    check_row(
                        "T",
                        || format!("m={mm},s={ss},a={aa}"),
                        &t[base..base + s],
                    )?;
                    let rbase = ((mm * s + ss) * a + aa) * 2;
                    check_row(
                        "R",
                        || format!("m={mm},s={ss},a={aa}"),
                        &r[rbase..rbase + 2],
                    )?;
                }
            }
        }
        Ok(LmdpModel {
            m,
            s,
            a,
            h,
            w,
            nu,
            t,
            r,
        })
    }

    pub fn num_contexts(&self) -> usize {
        self.m
    }

    pub fn num_states(&self) -> usize {
        self.s
    }

    pub fn num_actions(&self) -> usize {
        self.a
    }

    pub fn horizon(&self) -> usize {
        self.h
    }

    pub fn mixing(&self) -> &[f64] {
        &self.w
    }

    pub fn initial_dist(&self, m: usize) -> &[f64] {
        &self.nu[m * self.s..(m + 1) * self.s]
    }

    pub fn initial_prob(&self, m: usize, s: usize) -> f64 {
        self.nu[m * self.s + s]
    }

    #[inline]
    pub fn transition(&self, m: usize, s: usize, a: usize, s_next: usize) -> f64 {
        self.t[((m * self.s + s) * self.a + a) * self.s + s_next]
    }

    #[inline]
    pub fn transition_row(&self, m: usize, s: usize, a: usize) -> &[f64] {
        let base = ((m * self.s + s) * self.a + a) * self.s;
        &self.t[base..base + self.s]
    }

    #[inline]
    pub fn reward_prob(&self, m: usize, s: usize, a: usize, reward: u8) -> f64 {
        self.r[((m * self.s + s) * self.a + a) * 2 + reward as usize]
    }

    #[inline]
    pub fn reward_row(&self, m: usize, s: usize, a: usize) -> &[f64] {
        let base = ((m * self.s + s) * self.a + a) * 2;
        &self.r[base..base + 2]
    }

    /// Expected observable reward at `(m, s, a)`.
    #[inline]
    pub fn mean_reward(&self, m: usize, s: usize, a: usize) -> f64 {
        self.reward_prob(m, s, a, 1)
    }

    /// Joint observation probability `P_m(s', r | s, a) = T_m(s'|s,a) R_m(r|s,a)`.
    #[inline]
    pub fn joint_obs_prob(&self, m: usize, s: usize, a: usize, s_next: usize, reward: u8) -> f64 {
        self.transition(m, s, a, s_next) * self.reward_prob(m, s, a, reward)
    }

    /// Replace the horizon, keeping all tables.
    pub fn with_horizon(mut self, h: usize) -> Self {
        assert!(h >= 1);
        self.h = h;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// One time step of an episode: the state seen, the action taken, the binary
/// reward received.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub state: usize,
    pub action: usize,
    pub reward: u8,
}

/// An episode of `H` steps. `true_context` is the simulator-side label,
/// available in hindsight-mode learning and for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    pub true_context: Option<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Total reward.
    pub fn episode_return(&self) -> f64 {
        self.steps.iter().map(|st| st.reward as f64).sum()
    }
}

/// Posterior over contexts. `degenerate` is set when an update saw zero
/// likelihood under every context and fell back to the uniform belief.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    probs: Vec<f64>,
    degenerate: bool,
}

impl Belief {
    pub fn uniform(m: usize) -> Self {
        Belief {
            probs: vec![1.0 / m as f64; m],
            degenerate: false,
        }
    }

    pub fn one_hot(m_star: usize, m: usize) -> Self {
        assert!(m_star < m, "context index {m_star} out of range for M={m}");
        let mut probs = vec![0.0; m];
        probs[m_star] = 1.0;
        Belief {
            probs,
            degenerate: false,
        }
    }

    /// Normalize a nonnegative weight vector into a belief. Zero total mass
    /// yields the uniform belief with the degenerate flag set.
    pub fn from_weights(weights: Vec<f64>) -> Self {
        let total: f64 = weights.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            let m = weights.len();
            return Belief {
                probs: vec![1.0 / m as f64; m],
                degenerate: true,
            };
        }
        Belief {
            probs: weights.into_iter().map(|v| v / total).collect(),
            degenerate: false,
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, m: usize) -> f64 {
        self.probs[m]
    }

    pub fn num_contexts(&self) -> usize {
        self.probs.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Index of the most likely context (smallest index on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for i in 1..self.probs.len() {
            if self.probs[i] > self.probs[best] {
                best = i;
            }
        }
        best
    }
}

/// Posterior over contexts after observing the initial state `s1`:
/// `b_1(m) = w_m nu_m(s1) / sum_m w_m nu_m(s1)`.
///
/// If `s1` is unreachable under every context the uniform belief is returned
/// with the degenerate flag set.
pub fn initial_belief(model: &LmdpModel, s1: usize) -> Belief {
    let weights: Vec<f64> = (0..model.num_contexts())
        .map(|m| model.mixing()[m] * model.initial_prob(m, s1))
        .collect();
    Belief::from_weights(weights)
}

/// One step of the belief recursion:
/// `b'(m) ∝ b(m) T_m(s_next|s,a) R_m(r|s,a)`.
///
/// A zero normalizer (the observation has zero likelihood under every
/// context weighted by the current belief) resets to the uniform belief and
/// sets the degenerate flag, so learning loops continue on model mismatch.
pub fn belief_update(
    model: &LmdpModel,
    belief: &Belief,
    s: usize,
    a: usize,
    r: u8,
    s_next: usize,
) -> Belief {
    let weights: Vec<f64> = (0..model.num_contexts())
        .map(|m| belief.prob(m) * model.transition(m, s, a, s_next) * model.reward_prob(m, s, a, r))
        .collect();
    let mut out = Belief::from_weights(weights);
    out.degenerate |= belief.degenerate;
    out
}

/// Belief update on a reward observation alone, used for the final step of
/// an episode where no next state exists.
pub fn belief_update_reward_only(
    model: &LmdpModel,
    belief: &Belief,
    s: usize,
    a: usize,
    r: u8,
) -> Belief {
    let weights: Vec<f64> = (0..model.num_contexts())
        .map(|m| belief.prob(m) * model.reward_prob(m, s, a, r))
        .collect();
    let mut out = Belief::from_weights(weights);
    out.degenerate |= belief.degenerate;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Deterministic two-context toy: context 0 cycles 0->1->0, context 1
    /// stays put; context 0 always rewards, context 1 never does.
    pub(crate) fn two_context_toy() -> LmdpModel {
        let m = 2;
        let s = 2;
        let a = 1;
        let mut t = vec![0.0; m * s * a * s];
        let mut r = vec![0.0; m * s * a * 2];
        for ss in 0..s {
            // context 0: move to the other state, reward 1
            t[((ss) * a) * s + (1 - ss)] = 1.0;
            r[((ss) * a) * 2 + 1] = 1.0;
            // context 1: stay, reward 0
            t[((s + ss) * a) * s + ss] = 1.0;
            r[((s + ss) * a) * 2] = 1.0;
        }
        LmdpModel::new(
            m,
            s,
            a,
            3,
            vec![0.5, 0.5],
            vec![1.0, 0.0, 1.0, 0.0],
            t,
            r,
        )
        .unwrap()
    }

    #[test]
    fn validation_rejects_bad_rows() {
        let mut t = vec![0.5, 0.5, 0.5, 0.5];
        let r = vec![0.5, 0.5, 0.5, 0.5];
        let ok = LmdpModel::new(
            1,
            2,
            1,
            1,
            vec![1.0],
            vec![0.5, 0.5],
            t.clone(),
            r.clone(),
        );
        assert!(ok.is_ok());
        t[0] = 0.6;
        let bad = LmdpModel::new(1, 2, 1, 1, vec![1.0], vec![0.5, 0.5], t, r);
        assert!(matches!(bad, Err(ModelError::NotStochastic { .. })));
    }

    #[test]
    fn validation_rejects_empty_dims() {
        let err = LmdpModel::new(0, 1, 1, 1, vec![], vec![], vec![], vec![]);
        assert!(matches!(err, Err(ModelError::EmptyDimension("M"))));
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let model = two_context_toy();
        let json = model.to_json();
        let back = LmdpModel::from_json(&json).unwrap();
        assert_eq!(model, back);
        // Exercise a value with no short decimal representation.
        let nu = vec![1.0 / 3.0, 2.0 / 3.0];
        let model = LmdpModel::new(
            1,
            2,
            1,
            1,
            vec![1.0],
            nu.clone(),
            vec![0.1 + 0.2, 1.0 - (0.1 + 0.2), 0.25, 0.75],
            vec![0.5, 0.5, 0.5, 0.5],
        )
        .unwrap();
        let back = LmdpModel::from_json(&model.to_json()).unwrap();
        assert_eq!(model, back);
        assert_eq!(back.initial_dist(0), &nu[..]);
    }

    #[test]
    fn json_field_names_match_schema() {
        let model = two_context_toy();
        let v: serde_json::Value = serde_json::from_str(&model.to_json()).unwrap();
        for key in ["M", "S", "A", "H", "w", "nu", "T", "R"] {
            assert!(v.get(key).is_some(), "missing key {key}");
        }
        assert_eq!(v["T"][0][0][0].as_array().unwrap().len(), 2);
        assert_eq!(v["R"][0][0][0].as_array().unwrap().len(), 2);
    }

    #[test]
    fn single_context_belief_is_always_one() {
        let model = LmdpModel::new(
            1,
            2,
            1,
            1,
            vec![1.0],
            vec![0.5, 0.5],
            vec![0.5, 0.5, 0.5, 0.5],
            vec![0.5, 0.5, 0.5, 0.5],
        )
        .unwrap();
        let b = initial_belief(&model, 0);
        assert_eq!(b.probs(), &[1.0]);
        let b = belief_update(&model, &b, 0, 0, 1, 1);
        assert_eq!(b.probs(), &[1.0]);
    }

    #[test]
    fn belief_update_matches_hand_computation() {
        // M=2, b=(0.5,0.5), likelihoods (0.2, 0.1) -> (2/3, 1/3)
        let model = LmdpModel::new(
            2,
            2,
            1,
            1,
            vec![0.5, 0.5],
            vec![1.0, 0.0, 1.0, 0.0],
            // T_0(1|0,0)=0.2, T_1(1|0,0)=0.1; rewards sure so likelihood = T
            vec![0.8, 0.2, 0.5, 0.5, 0.9, 0.1, 0.5, 0.5],
            vec![0.0, 1.0, 0.5, 0.5, 0.0, 1.0, 0.5, 0.5],
        )
        .unwrap();
        let b = Belief::uniform(2);
        let b = belief_update(&model, &b, 0, 0, 1, 1);
        assert_abs_diff_eq!(b.prob(0), 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.prob(1), 1.0 / 3.0, epsilon = 1e-12);
        assert!(!b.is_degenerate());
    }

    #[test]
    fn symmetric_likelihoods_leave_belief_unchanged() {
        let model = two_context_toy();
        // both contexts assign probability 1 to their own (different)
        // successor; craft an update where likelihoods coincide instead
        let uniform = LmdpModel::new(
            2,
            2,
            1,
            1,
            vec![0.5, 0.5],
            vec![0.5, 0.5, 0.5, 0.5],
            vec![0.5; 8],
            vec![0.5; 8],
        )
        .unwrap();
        let b = Belief::from_weights(vec![0.3, 0.7]);
        let b2 = belief_update(&uniform, &b, 0, 0, 1, 1);
        assert_abs_diff_eq!(b2.prob(0), 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(b2.prob(1), 0.7, epsilon = 1e-12);
        let _ = model;
    }

    #[test]
    fn initial_belief_examples() {
        // identical nu -> belief equals w
        let model = LmdpModel::new(
            2,
            2,
            1,
            1,
            vec![0.25, 0.75],
            vec![0.5, 0.5, 0.5, 0.5],
            vec![0.5; 8],
            vec![0.5; 8],
        )
        .unwrap();
        let b = initial_belief(&model, 1);
        assert_abs_diff_eq!(b.prob(0), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(b.prob(1), 0.75, epsilon = 1e-12);

        // nu_0(s1)=0.4, nu_1(s1)=0.1, w uniform -> (0.8, 0.2)
        let model = LmdpModel::new(
            2,
            2,
            1,
            1,
            vec![0.5, 0.5],
            vec![0.4, 0.6, 0.1, 0.9],
            vec![0.5; 8],
            vec![0.5; 8],
        )
        .unwrap();
        let b = initial_belief(&model, 0);
        assert_abs_diff_eq!(b.prob(0), 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(b.prob(1), 0.2, epsilon = 1e-12);

        // fully informative initial state
        let model = LmdpModel::new(
            2,
            2,
            1,
            1,
            vec![0.5, 0.5],
            vec![1.0, 0.0, 0.0, 1.0],
            vec![0.5; 8],
            vec![0.5; 8],
        )
        .unwrap();
        let b = initial_belief(&model, 0);
        assert_eq!(b.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn degenerate_evidence_resets_to_uniform() {
        let model = two_context_toy();
        // from state 0, context 0 goes to 1 and context 1 stays at 0;
        // observing "stay at 0 with reward 1" is impossible in both
        let b = Belief::uniform(2);
        let b = belief_update(&model, &b, 0, 0, 1, 0);
        assert!(b.is_degenerate());
        assert_eq!(b.probs(), &[0.5, 0.5]);
        // the flag sticks through subsequent valid updates
        let b = belief_update(&model, &b, 0, 0, 1, 1);
        assert!(b.is_degenerate());
    }

    #[test]
    fn unreachable_initial_state_flags_degenerate() {
        let model = two_context_toy();
        let b = initial_belief(&model, 1);
        assert!(b.is_degenerate());
        assert_eq!(b.probs(), &[0.5, 0.5]);
    }
}
