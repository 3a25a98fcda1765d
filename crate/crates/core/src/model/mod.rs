//! Domain types: schedule sets, topology with fixed routes, queue states,
//! arrival processes, and the load-headroom LP.

mod arrivals;
mod headroom;
mod network;
mod schedule;
mod state;

pub use arrivals::{stream_rng, ArrivalKind, ArrivalProcess, Stream};
pub use headroom::{boundary_scale, load_headroom, Headroom, HULL_TOL};
pub use network::{validate_network, Link, Network, RawLink, RawNetwork, RawRoute, Route, Station};
pub use schedule::ScheduleSet;
pub use state::{MultiHopState, QueueState};

/// `S_Q = { sigma ∧ Q : sigma in S }`, duplicates removed, zero retained.
pub fn truncate_schedules(set: &ScheduleSet, q: &QueueState) -> ScheduleSet {
    set.truncate(&q.q)
}
