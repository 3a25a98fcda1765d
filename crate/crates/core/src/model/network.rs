use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::schedule::ScheduleSet;
use crate::error::ValidationError;

/// A directed link as it appears in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawLink {
    pub id: String,
    pub tail: String,
    pub head: String,
}

/// A fixed route: an ordered list of link ids and the external arrival rate at its ingress.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRoute {
    pub id: String,
    pub links: Vec<String>,
    pub rate: f64,
}

/// Unvalidated network description (the `nodes`/`links`/`schedules`/`routes` part of a config).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNetwork {
    pub nodes: Vec<String>,
    pub links: Vec<RawLink>,
    /// One integer array per schedule, ordered as `links`.
    pub schedules: Vec<Vec<i64>>,
    pub routes: Vec<RawRoute>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub id: String,
    pub tail: usize,
    pub head: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub id: String,
    pub links: Vec<usize>,
    pub rate: f64,
}

/// A (link, route) class: the packets of route `route` waiting for link `link`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Station {
    pub link: usize,
    pub route: usize,
    pub hop: usize,
}

/// Validated topology with fixed routes and per-route arrival rates.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: Vec<String>,
    links: Vec<Link>,
    routes: Vec<Route>,
    stations: Vec<Station>,
    route_stations: Vec<Vec<usize>>,
    link_stations: Vec<Vec<usize>>,
    link_loads: Vec<f64>,
}

impl Network {
    /// Validates a topology given by node names, `(id, tail, head)` links and routes.
    pub fn new(
        nodes: Vec<String>,
        links: &[RawLink],
        routes: &[RawRoute],
    ) -> Result<Self, ValidationError> {
        if links.is_empty() {
            return Err(ValidationError::NoLinks);
        }
        let mut node_index = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if node_index.insert(n.as_str(), i).is_some() {
                return Err(ValidationError::DuplicateId {
                    kind: "node",
                    id: n.clone(),
                });
            }
        }
        let mut link_index = HashMap::new();
        let mut out_links = Vec::with_capacity(links.len());
        for (i, l) in links.iter().enumerate() {
            if link_index.insert(l.id.as_str(), i).is_some() {
                return Err(ValidationError::DuplicateId {
                    kind: "link",
                    id: l.id.clone(),
                });
            }
            let lookup = |node: &str| {
                node_index
                    .get(node)
                    .copied()
                    .ok_or_else(|| ValidationError::UnknownNode {
                        link: l.id.clone(),
                        node: node.to_string(),
                    })
            };
            let tail = lookup(&l.tail)?;
            let head = lookup(&l.head)?;
            if tail == head {
                return Err(ValidationError::SelfLoop {
                    link: l.id.clone(),
                    node: l.tail.clone(),
                });
            }
            out_links.push(Link {
                id: l.id.clone(),
                tail,
                head,
            });
        }

        let mut seen_routes = HashSet::new();
        let mut out_routes = Vec::with_capacity(routes.len());
        for r in routes {
            if !seen_routes.insert(r.id.as_str()) {
                return Err(ValidationError::DuplicateId {
                    kind: "route",
                    id: r.id.clone(),
                });
            }
            if !r.rate.is_finite() {
                return Err(ValidationError::NonFiniteRate {
                    route: r.id.clone(),
                });
            }
            if r.rate < 0.0 {
                return Err(ValidationError::NegativeRate {
                    route: r.id.clone(),
                    rate: r.rate,
                });
            }
            if r.links.is_empty() {
                return Err(ValidationError::EmptyRoute {
                    route: r.id.clone(),
                });
            }
            let mut idx = Vec::with_capacity(r.links.len());
            for lid in &r.links {
                let j =
                    *link_index
                        .get(lid.as_str())
                        .ok_or_else(|| ValidationError::UnknownLink {
                            route: r.id.clone(),
                            link: lid.clone(),
                        })?;
                if idx.contains(&j) {
                    return Err(ValidationError::RouteRevisitsLink {
                        route: r.id.clone(),
                        link: lid.clone(),
                    });
                }
                idx.push(j);
            }
            for w in idx.windows(2) {
                let (a, b) = (&out_links[w[0]], &out_links[w[1]]);
                if a.head != b.tail {
                    return Err(ValidationError::NotChained {
                        route: r.id.clone(),
                        from: a.id.clone(),
                        to: b.id.clone(),
                        head: nodes[a.head].clone(),
                        tail: nodes[b.tail].clone(),
                    });
                }
            }
            out_routes.push(Route {
                id: r.id.clone(),
                links: idx,
                rate: r.rate,
            });
        }

        let mut stations = Vec::new();
        let mut route_stations = Vec::with_capacity(out_routes.len());
        let mut link_stations = vec![Vec::new(); out_links.len()];
        for (ri, r) in out_routes.iter().enumerate() {
            let mut per_route = Vec::with_capacity(r.links.len());
            for (hop, &j) in r.links.iter().enumerate() {
                link_stations[j].push(stations.len());
                per_route.push(stations.len());
                stations.push(Station {
                    link: j,
                    route: ri,
                    hop,
                });
            }
            route_stations.push(per_route);
        }

        let mut net = Network {
            nodes,
            links: out_links,
            routes: out_routes,
            stations,
            route_stations,
            link_stations,
            link_loads: Vec::new(),
        };
        net.recompute_loads();
        Ok(net)
    }

    fn recompute_loads(&mut self) {
        let mut loads = vec![0.0; self.links.len()];
        for r in &self.routes {
            for &j in &r.links {
                loads[j] += r.rate;
            }
        }
        self.link_loads = loads;
    }

    /// Same topology with new per-route rates.
    pub fn with_rates(&self, rates: &[f64]) -> Result<Network, ValidationError> {
        assert_eq!(rates.len(), self.routes.len());
        let mut net = self.clone();
        for (r, &rate) in net.routes.iter_mut().zip(rates) {
            if !rate.is_finite() {
                return Err(ValidationError::NonFiniteRate {
                    route: r.id.clone(),
                });
            }
            if rate < 0.0 {
                return Err(ValidationError::NegativeRate {
                    route: r.id.clone(),
                    rate,
                });
            }
            r.rate = rate;
        }
        net.recompute_loads();
        Ok(net)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link_ids(&self) -> Vec<String> {
        self.links.iter().map(|l| l.id.clone()).collect()
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    pub fn route_rates(&self) -> Vec<f64> {
        self.routes.iter().map(|r| r.rate).collect()
    }

    /// Per-link load: the sum of rates of the routes traversing each link.
    pub fn link_loads(&self) -> &[f64] {
        &self.link_loads
    }

    pub fn stations(&self) -> &[Station] {
        &self.stations
    }

    /// Station indices of route `r`, in hop order.
    pub fn route_stations(&self, r: usize) -> &[usize] {
        &self.route_stations[r]
    }

    /// Station indices sharing link `j`.
    pub fn link_stations(&self, j: usize) -> &[usize] {
        &self.link_stations[j]
    }

    /// The downstream station of `s` on its route, if any.
    pub fn next_station(&self, s: usize) -> Option<usize> {
        let st = self.stations[s];
        self.route_stations[st.route].get(st.hop + 1).copied()
    }

    /// The upstream station of `s` on its route, if any.
    pub fn prev_station(&self, s: usize) -> Option<usize> {
        let st = self.stations[s];
        st.hop
            .checked_sub(1)
            .map(|h| self.route_stations[st.route][h])
    }

    pub fn is_single_hop(&self) -> bool {
        self.routes.iter().all(|r| r.links.len() == 1)
    }

    pub fn link_index(&self, id: &str) -> Option<usize> {
        self.links.iter().position(|l| l.id == id)
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    /// Aggregates per-station quantities into per-link sums.
    pub fn link_totals<T>(&self, per_station: &[T]) -> Vec<T>
    where
        T: Copy + Default + std::ops::AddAssign,
    {
        let mut out = vec![T::default(); self.links.len()];
        for (s, st) in self.stations.iter().enumerate() {
            out[st.link] += per_station[s];
        }
        out
    }
}

/// Checks every invariant of a raw network description and returns the
/// normalized network together with its schedule set.
pub fn validate_network(raw: &RawNetwork) -> Result<(Network, ScheduleSet), ValidationError> {
    let net = Network::new(raw.nodes.clone(), &raw.links, &raw.routes)?;
    let names = net.link_ids();
    let mut atoms = Vec::with_capacity(raw.schedules.len());
    for (index, s) in raw.schedules.iter().enumerate() {
        if s.len() != names.len() {
            return Err(ValidationError::ScheduleDimension {
                index,
                found: s.len(),
                expected: names.len(),
            });
        }
        let mut atom = Vec::with_capacity(s.len());
        for (j, &v) in s.iter().enumerate() {
            if v < 0 {
                return Err(ValidationError::NegativeScheduleComponent {
                    index,
                    link: names[j].clone(),
                    value: v,
                });
            }
            atom.push(u32::try_from(v).unwrap_or(u32::MAX));
        }
        atoms.push(atom);
    }
    let set = ScheduleSet::new(&names, atoms)?;
    Ok((net, set))
}
