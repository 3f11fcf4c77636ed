//! Reinforcement learning in latent Markov decision processes (LMDPs).
//!
//! An LMDP is a mixture of `M` MDPs over shared state and action spaces: at
//! the start of each episode one MDP is drawn according to mixing weights and
//! its identity stays hidden from the agent. This crate provides
//!
//! - the core model, simulator, belief recursion, and brute-force value
//!   oracles ([`model`], [`sim`], [`value`]),
//! - planning oracles: per-context backward induction, the Q-MDP heuristic,
//!   simplex-discretized PBVI, and alpha-vector policy evaluation
//!   ([`planning`]),
//! - the optimistic learning loop with hindsight or inferred context beliefs
//!   ([`lucrl`]),
//! - spectral learning of a predictive state representation and the
//!   clustering-based initialization built on top of it ([`psr`],
//!   [`cluster`]),
//! - hard-instance constructions and deterministic-LMDP exploration
//!   ([`hardness`]),
//! - random instance generation with controlled separation and the experiment
//!   runners behind the CLI ([`gen`], [`experiment`]).
//!
//! All episode-level randomness flows through a single seedable generator
//! (ChaCha8, see [`rng`]); fan-out over episodes or seeds uses derived
//! substreams so that results are identical whether or not the `parallel`
//! feature is enabled.

pub mod cluster;
pub mod experiment;
pub mod gen;
pub mod hardness;
pub mod io;
pub mod lucrl;
pub mod model;
pub(crate) mod par;
pub mod planning;
pub mod policy;
pub mod psr;
pub mod rng;
pub mod sim;
pub mod value;

pub use model::{Belief, LmdpModel, ModelError, Step, Trajectory};
pub use policy::Policy;
