use std::collections::BTreeSet;

use serde::Serialize;

use crate::model::Network;

/// Queues a node must keep under each policy family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeCounts {
    pub node: String,
    /// One queue per route leaving through the node.
    pub per_route_bp: usize,
    /// One queue per destination of those routes.
    pub per_destination_bp: usize,
    /// One queue per outgoing link.
    pub proportional: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueueCountReport {
    /// Nodes with a single neighbor.
    pub leaves: usize,
    pub routes: usize,
    /// Node with the most per-route queues (first in node order on ties).
    pub busiest: NodeCounts,
    pub nodes: Vec<NodeCounts>,
}

pub fn queue_count_report(net: &Network) -> QueueCountReport {
    let n = net.nodes().len();
    let mut routes = vec![BTreeSet::new(); n];
    let mut dests = vec![BTreeSet::new(); n];
    let mut out_degree = vec![0usize; n];
    let mut neighbors = vec![BTreeSet::new(); n];
    for l in net.links() {
        out_degree[l.tail] += 1;
        neighbors[l.tail].insert(l.head);
        neighbors[l.head].insert(l.tail);
    }
    for (r, route) in net.routes().iter().enumerate() {
        let dest = net.links()[*route.links.last().expect("routes are nonempty")].head;
        for &j in &route.links {
            let tail = net.links()[j].tail;
            routes[tail].insert(r);
            dests[tail].insert(dest);
        }
    }
    let nodes: Vec<NodeCounts> = (0..n)
        .map(|v| NodeCounts {
            node: net.nodes()[v].clone(),
            per_route_bp: routes[v].len(),
            per_destination_bp: dests[v].len(),
            proportional: out_degree[v],
        })
        .collect();
    let busiest = nodes
        .iter()
        .fold(None::<&NodeCounts>, |best, c| match best {
            Some(b) if b.per_route_bp >= c.per_route_bp => Some(b),
            _ => Some(c),
        })
        .cloned()
        .unwrap_or(NodeCounts {
            node: String::new(),
            per_route_bp: 0,
            per_destination_bp: 0,
            proportional: 0,
        });
    QueueCountReport {
        leaves: neighbors.iter().filter(|s| s.len() == 1).count(),
        routes: net.routes().len(),
        busiest,
        nodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::Preset;

    #[test]
    fn tandem_counts() {
        let b = Preset::Tandem2.build(0.5).unwrap();
        let r = queue_count_report(&b.net);
        assert_eq!(r.routes, 1);
        let a = &r.nodes[0];
        assert_eq!(
            (a.per_route_bp, a.per_destination_bp, a.proportional),
            (1, 1, 1)
        );
        assert_eq!(r.nodes[2].per_route_bp, 0);
    }
}
