use crate::error::{Error, Result};
use crate::model::{ArrivalProcess, MultiHopState, Network, QueueState, ScheduleSet};
use crate::policy::{Policy, ServiceAction};

/// `Q(t+1) = Q(t) - sigma + a`, with the identity re-checked in integers.
pub fn apply_single_hop(q: &QueueState, sigma: &[u64], arrivals: &[u64]) -> Result<QueueState> {
    let mut next = Vec::with_capacity(q.q.len());
    for (j, ((&qj, &s), &a)) in q.q.iter().zip(sigma).zip(arrivals).enumerate() {
        let Some(after) = qj.checked_sub(s) else {
            return Err(Error::PolicyBug {
                slot: q.time,
                detail: format!("link #{j}: service {s} exceeds queue {qj}"),
            });
        };
        let v = after + a;
        if v + s != qj + a {
            return Err(Error::Conservation {
                slot: q.time,
                detail: format!("link #{j}"),
            });
        }
        next.push(v);
    }
    Ok(QueueState {
        q: next,
        time: q.time + 1,
    })
}

/// `X_s(t+1) = X_s + a_s - xi_s + xi_{prev(s)}`; returns the new state and the
/// number of packets leaving the network.
pub fn apply_multihop(
    net: &Network,
    x: &MultiHopState,
    xi: &[u64],
    station_arrivals: &[u64],
) -> Result<(MultiHopState, u64)> {
    let mut next = vec![0u64; x.x.len()];
    let mut departed = 0;
    for s in 0..x.x.len() {
        let Some(after) = x.x[s].checked_sub(xi[s]) else {
            return Err(Error::PolicyBug {
                slot: x.time,
                detail: format!("station #{s}: service {} exceeds queue {}", xi[s], x.x[s]),
            });
        };
        let inflow = net.prev_station(s).map_or(0, |p| xi[p]);
        next[s] = after + station_arrivals[s] + inflow;
        if next[s] + xi[s] != x.x[s] + station_arrivals[s] + inflow {
            return Err(Error::Conservation {
                slot: x.time,
                detail: format!("station #{s}"),
            });
        }
        if net.next_station(s).is_none() {
            departed += xi[s];
        }
    }
    Ok((
        MultiHopState {
            x: next,
            time: x.time + 1,
        },
        departed,
    ))
}

/// Per-link arrivals for a single-hop network (each route is one link).
pub fn link_arrivals(net: &Network, route_arrivals: &[u64]) -> Vec<u64> {
    let mut out = vec![0; net.num_links()];
    for (r, &a) in route_arrivals.iter().enumerate() {
        out[net.routes()[r].links[0]] += a;
    }
    out
}

/// Per-station arrivals: each route's packets enter at its first station.
pub fn station_arrivals(net: &Network, route_arrivals: &[u64]) -> Vec<u64> {
    let mut out = vec![0; net.stations().len()];
    for (r, &a) in route_arrivals.iter().enumerate() {
        out[net.route_stations(r)[0]] += a;
    }
    out
}

/// One slot: the policy observes `Q(t)`, service is applied, then arrivals.
pub fn step_single_hop(
    q: &QueueState,
    policy: &mut Policy,
    net: &Network,
    set: &ScheduleSet,
    arrivals: &mut ArrivalProcess,
) -> Result<(QueueState, ServiceAction, Vec<u64>)> {
    let action = policy.decide_single_hop(q, set)?;
    action
        .check_single_hop(q)
        .map_err(|detail| Error::PolicyBug {
            slot: q.time,
            detail,
        })?;
    let a = link_arrivals(net, &arrivals.sample());
    let next = apply_single_hop(q, &action.sigma, &a)?;
    Ok((next, action, a))
}

/// Multihop slot; returns the new state, the action, arrivals per station and
/// the number of departures.
pub fn step_multihop(
    x: &MultiHopState,
    policy: &mut Policy,
    net: &Network,
    set: &ScheduleSet,
    arrivals: &mut ArrivalProcess,
) -> Result<(MultiHopState, ServiceAction, Vec<u64>, u64)> {
    let action = policy.decide_multihop(x, net, set)?;
    action
        .check_multihop(net, x)
        .map_err(|detail| Error::PolicyBug {
            slot: x.time,
            detail,
        })?;
    let a = station_arrivals(net, &arrivals.sample());
    let (next, departed) = apply_multihop(net, x, &action.xi, &a)?;
    Ok((next, action, a, departed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RawLink, RawRoute};

    #[test]
    fn single_hop_arithmetic() {
        let q = QueueState::new(vec![4]);
        assert_eq!(apply_single_hop(&q, &[2], &[1]).unwrap().q, vec![3]);
        let z = QueueState::new(vec![0]);
        assert_eq!(apply_single_hop(&z, &[0], &[0]).unwrap().q, vec![0]);
        assert!(matches!(
            apply_single_hop(&QueueState::new(vec![1]), &[2], &[0]),
            Err(Error::PolicyBug { .. })
        ));
    }

    fn tandem() -> Network {
        let l = |id: &str, t: &str, h: &str| RawLink {
            id: id.into(),
            tail: t.into(),
            head: h.into(),
        };
        Network::new(
            vec!["a".into(), "b".into(), "c".into()],
            &[l("ab", "a", "b"), l("bc", "b", "c")],
            &[RawRoute {
                id: "r".into(),
                links: vec!["ab".into(), "bc".into()],
                rate: 0.0,
            }],
        )
        .unwrap()
    }

    #[test]
    fn hop_transfer() {
        let net = tandem();
        let x = MultiHopState::new(vec![1, 0]);
        let (next, out) = apply_multihop(&net, &x, &[1, 0], &[0, 0]).unwrap();
        assert_eq!(next.x, vec![0, 1]);
        assert_eq!(out, 0);
    }

    #[test]
    fn last_hop_departs() {
        let net = tandem();
        let x = MultiHopState::new(vec![0, 2]);
        let (next, out) = apply_multihop(&net, &x, &[0, 1], &[0, 0]).unwrap();
        assert_eq!(next.x, vec![0, 1]);
        assert_eq!(out, 1);
    }

    #[test]
    fn idle_slot_adds_arrivals() {
        let net = tandem();
        let x = MultiHopState::new(vec![3, 1]);
        let (next, _) = apply_multihop(&net, &x, &[0, 0], &[2, 0]).unwrap();
        assert_eq!(next.x, vec![5, 1]);
    }
}
