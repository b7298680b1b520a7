//! Strong bisimilarity, weak bisimulation certificates and testing equivalences.

mod strong;
mod testing;
mod weak;

pub use strong::{
    bisimulation_labels, is_stable, labels_to_partition, lifted_strong_equal, partition_labels, quotient_graph,
    strong_bisim, StrongBisimResult,
};
pub use testing::{
    context_value, enumerate_contexts, fresh_channels, generate_observers, replay, search_contexts, testing_equiv,
    ContextClass, ContextWitness, Justification, Kind, SearchReport, TestingOptions, TestingVerdict,
};
pub use weak::{
    almost_simulation_report, greedy_weak_certificate, weak_bisim_verify, weak_combined_feasible, weak_feasible_in,
    AlmostSimRow, FlowWitness, WeakBisimCertificate, WeakCheck,
};
