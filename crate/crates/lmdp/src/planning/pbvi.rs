//! Point-based value iteration on a discretized context-belief simplex.
//!
//! The belief space over contexts is covered by the regular barycentric
//! lattice of resolution `k = ceil(1/epsilon_d)`; belief transitions are
//! snapped to the nearest lattice point in Euclidean distance. The returned
//! policy does a one-step lookahead from the exact (un-snapped) current
//! belief into the grid values of the next step.

use super::{BeliefPolicy, HiddenRewardModel, PlannerTables, PlanningError};
use crate::model::{belief_update, initial_belief, Belief, LmdpModel};

const GRID_GUARD: f64 = 1e7;

#[derive(Debug, Clone)]
pub struct PbviTables {
    /// Lattice points, each a length-M belief.
    grid: Vec<Vec<f64>>,
    /// `values[(t * grid.len() + g) * S + s]`, `t` in `0..H`.
    values: Vec<f64>,
    h: usize,
    s: usize,
    a: usize,
    m: usize,
    /// Per-step hidden rewards copied from the planning model.
    hidden: Vec<f64>,
}

impl PbviTables {
    fn value(&self, t: usize, g: usize, s: usize) -> f64 {
        if t >= self.h {
            0.0
        } else {
            self.values[(t * self.grid.len() + g) * self.s + s]
        }
    }

    fn snap(&self, belief: &Belief) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (g, point) in self.grid.iter().enumerate() {
            let d: f64 = point
                .iter()
                .zip(belief.probs())
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            if d < best_d {
                best_d = d;
                best = g;
            }
        }
        best
    }

    /// One-step lookahead Q from an arbitrary belief.
    fn lookahead(&self, model: &LmdpModel, t: usize, belief: &Belief, s: usize, a: usize) -> f64 {
        let mut val: f64 = (0..self.m)
            .map(|m| {
                belief.prob(m)
                    * (model.mean_reward(m, s, a) + self.hidden[(m * self.s + s) * self.a + a])
            })
            .sum();
        if t + 1 < self.h {
            for r in 0..2u8 {
                for s_next in 0..self.s {
                    let prob: f64 = (0..self.m)
                        .map(|m| belief.prob(m) * model.joint_obs_prob(m, s, a, s_next, r))
                        .sum();
                    if prob > 0.0 {
                        let next = belief_update(model, belief, s, a, r, s_next);
                        val += prob * self.value(t + 1, self.snap(&next), s_next);
                    }
                }
            }
        }
        val
    }

    pub(crate) fn choose(&self, model: &LmdpModel, t: usize, belief: &Belief, s: usize) -> usize {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for a in 0..self.a {
            let val = self.lookahead(model, t, belief, s, a);
            if val > best_val {
                best_val = val;
                best = a;
            }
        }
        best
    }
}

/// Enumerate the lattice `{ b : b = (i_1/k, ..., i_M/k), sum i_j = k }`.
fn barycentric_grid(m: usize, k: usize) -> Vec<Vec<f64>> {
    let mut grid = Vec::new();
    let mut point = vec![0usize; m];
    fn rec(m: usize, k: usize, idx: usize, left: usize, point: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if idx == m - 1 {
            point[idx] = left;
            out.push(point.iter().map(|&i| i as f64 / k as f64).collect());
            return;
        }
        for i in 0..=left {
            point[idx] = i;
            rec(m, k, idx + 1, left - i, point, out);
        }
    }
    rec(m, k, 0, k, &mut point, &mut grid);
    grid
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut out = 1.0;
    for i in 0..k {
        out *= (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Value iteration over the belief lattice; returns a belief-based policy.
pub fn pbvi_policy(hm: &HiddenRewardModel, epsilon_d: f64) -> Result<BeliefPolicy, PlanningError> {
    if !(epsilon_d > 0.0 && epsilon_d <= 1.0) {
        return Err(PlanningError::BadResolution(epsilon_d));
    }
    let model = &hm.model;
    let (m_n, s_n, a_n, h) = (
        model.num_contexts(),
        model.num_states(),
        model.num_actions(),
        model.horizon(),
    );
    let k = (1.0 / epsilon_d).ceil() as usize;
    let size = binomial(k + m_n, m_n) * s_n as f64 * h as f64;
    if size > GRID_GUARD {
        return Err(PlanningError::GridTooLarge {
            size,
            guard: GRID_GUARD,
        });
    }
    let grid = barycentric_grid(m_n, k);
    let mut tables = PbviTables {
        grid,
        values: Vec::new(),
        h,
        s: s_n,
        a: a_n,
        m: m_n,
        hidden: (0..m_n * s_n * a_n)
            .map(|i| {
                let a = i % a_n;
                let s = (i / a_n) % s_n;
                let m = i / (a_n * s_n);
                hm.hidden_reward(m, s, a)
            })
            .collect(),
    };
    let g_n = tables.grid.len();
    tables.values = vec![0.0; h * g_n * s_n];
    for t in (0..h).rev() {
        for g in 0..g_n {
            let belief = Belief::from_weights(tables.grid[g].clone());
            for s in 0..s_n {
                let mut best = f64::NEG_INFINITY;
                for a in 0..a_n {
                    let val = tables.lookahead(model, t, &belief, s, a);
                    if val > best {
                        best = val;
                    }
                }
                tables.values[(t * g_n + g) * s_n + s] = best;
            }
        }
    }
    Ok(BeliefPolicy {
        model: model.clone(),
        tables: PlannerTables::Pbvi(tables),
    })
}

/// PBVI's own estimate of the initial value: expected grid value of the
/// snapped initial belief plus the initial hidden bonus.
pub fn pbvi_value_estimate(hm: &HiddenRewardModel, policy: &BeliefPolicy) -> f64 {
    let model = &hm.model;
    let tables = match &policy.tables {
        PlannerTables::Pbvi(t) => t,
        PlannerTables::Qmdp(_) => unreachable!("pbvi_value_estimate called on a Q-MDP policy"),
    };
    let mut total = hm.initial_bonus();
    for s in 0..model.num_states() {
        let p_s: f64 = (0..model.num_contexts())
            .map(|m| model.mixing()[m] * model.initial_prob(m, s))
            .sum();
        if p_s > 0.0 {
            let b = initial_belief(model, s);
            total += p_s * tables.value(0, tables.snap(&b), s);
        }
    }
    total
}
