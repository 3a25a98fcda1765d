use super::network::Network;

/// Single-hop queue vector `Q(t)` together with its slot index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueueState {
    pub q: Vec<u64>,
    pub time: u64,
}

impl QueueState {
    pub fn new(q: Vec<u64>) -> Self {
        QueueState { q, time: 0 }
    }

    pub fn empty(links: usize) -> Self {
        Self::new(vec![0; links])
    }

    pub fn total(&self) -> u64 {
        self.q.iter().sum()
    }
}

/// Multihop state: per-station counts `X_jr(t)`. Link queues are derived.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiHopState {
    pub x: Vec<u64>,
    pub time: u64,
}

impl MultiHopState {
    pub fn new(x: Vec<u64>) -> Self {
        MultiHopState { x, time: 0 }
    }

    pub fn empty(net: &Network) -> Self {
        Self::new(vec![0; net.stations().len()])
    }

    /// `Q_j = sum over routes through j of X_jr`.
    pub fn link_queues(&self, net: &Network) -> Vec<u64> {
        net.link_totals(&self.x)
    }

    pub fn total(&self) -> u64 {
        self.x.iter().sum()
    }
}
