#![allow(dead_code)]

use rand::Rng;
use switchsim::model::{
    boundary_scale, validate_network, Network, RawLink, RawNetwork, RawRoute, ScheduleSet,
};

/// Path `n0 -> n1 -> ... -> nk` with one transmission per pair of adjacent
/// links at most (no two consecutive links active).
pub fn line_schedules(k: usize) -> Vec<Vec<i64>> {
    (0..1u32 << k)
        .filter(|m| m & (m >> 1) == 0)
        .map(|m| (0..k).map(|j| i64::from((m >> j) & 1)).collect())
        .collect()
}

/// Random multihop line network on `k` links: one route over the whole path
/// plus up to two random contiguous segments, rates at `load` times the
/// hull boundary.
pub fn random_line<R: Rng>(rng: &mut R, k: usize, load: f64) -> (Network, ScheduleSet) {
    let nodes: Vec<String> = (0..=k).map(|i| format!("n{i}")).collect();
    let links: Vec<RawLink> = (0..k)
        .map(|j| RawLink {
            id: format!("l{j}"),
            tail: nodes[j].clone(),
            head: nodes[j + 1].clone(),
        })
        .collect();
    let mut routes = vec![RawRoute {
        id: "full".into(),
        links: links.iter().map(|l| l.id.clone()).collect(),
        rate: 1.0,
    }];
    for r in 0..rng.random_range(0..=2) {
        let a = rng.random_range(0..k);
        let b = rng.random_range(a..k);
        routes.push(RawRoute {
            id: format!("seg{r}"),
            links: (a..=b).map(|j| format!("l{j}")).collect(),
            rate: rng.random_range(0.2..1.0),
        });
    }
    let raw = RawNetwork {
        nodes,
        links,
        schedules: line_schedules(k),
        routes,
    };
    let (net, set) = validate_network(&raw).unwrap();
    let theta = boundary_scale(net.link_loads(), &set).unwrap();
    let rates: Vec<f64> = net.route_rates().iter().map(|r| r * theta * load).collect();
    (net.with_rates(&rates).unwrap(), set)
}
