//! Min-flooding k-agreement in p-partitioned dynamic networks.
//!
//! A dynamic network is p-partitioned when every round's communication graph
//! has at most `p` connected components. Processes repeatedly broadcast the
//! smallest value they have seen; with a known bound `n` on the network
//! size, deciding after a fixed budget of rounds yields p-agreement (or
//! `ceil((1 + eps) p)`-agreement after a budget linear in `n / eps`).
//! Without that bound an adversary can force `k + 1` distinct decisions.
//!
//! * [`netcore`]: per-round topologies and component counting.
//! * [`protocol`]: the process state machine and round budgets.
//! * [`adversary`]: topology schedulers, from scripted to adaptive.
//! * [`analysis`]: value classes, the potential, quotient graphs, verdicts.
//! * [`oracle`]: exhaustive worst-case search for tiny networks.
//! * [`sim`]: scenarios and the lockstep round loop.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod adversary;
pub mod analysis;
pub mod netcore;
pub mod oracle;
pub mod protocol;
pub mod sim;

pub use adversary::{Adversary, AdversaryContext, AdversaryStrategy, PhasedPathParams};
pub use analysis::{Verdict, ValueClasses};
pub use netcore::{count_components, validate_p_partitioned, ComponentLabeling, RoundTopology};
pub use protocol::{Epsilon, ProcessState, ProtocolVariant, Value};
pub use sim::{run, ExecutionTrace, Scenario, ScenarioParams};
