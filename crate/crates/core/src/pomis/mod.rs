//! Phase one of the bandit: learn just enough of the graph to recover the
//! POMIS family.

mod learn;
mod witness;

pub use learn::{
    learn_pomis_structure, learn_pomis_structure_with, next_required_pair, phase_one_bound,
    LedgerEntry, PairPolicy, PhaseCounts, PomisStructure, TestLedger,
};
pub use witness::{bi, pomis_divergence_witness, territory_of, DivergenceWitness};
