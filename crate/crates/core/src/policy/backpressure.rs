use super::ServiceAction;
use crate::model::{MultiHopState, Network, ScheduleSet};
use crate::program::capped_linear_oracle;

/// Per-link differential backlog and the route that attains it.
#[derive(Debug, Clone, PartialEq)]
pub struct BackPressureWeights {
    pub w: Vec<f64>,
    /// Maximizing route index per link; `None` when the link carries no route.
    pub r_star: Vec<Option<usize>>,
    /// Station `(j, r_star_j)` per link.
    pub station: Vec<Option<usize>>,
}

/// `w_j = max_r max(X_jr - X_{j+ r}, 0)`, with the downstream count taken as
/// zero at the last hop. Ties between routes go to the smallest route id.
pub fn backpressure_weights(x: &MultiHopState, net: &Network) -> BackPressureWeights {
    let n = net.num_links();
    let mut w = vec![0.0; n];
    let mut r_star = vec![None; n];
    let mut station = vec![None; n];
    for j in 0..n {
        let mut best: Option<(i64, &str, usize, usize)> = None;
        for &s in net.link_stations(j) {
            let down = net.next_station(s).map_or(0, |t| x.x[t]);
            let diff = x.x[s] as i64 - down as i64;
            let r = net.stations()[s].route;
            let id = net.routes()[r].id.as_str();
            let better = match best {
                None => true,
                Some((d, bid, _, _)) => diff > d || (diff == d && id < bid),
            };
            if better {
                best = Some((diff, id, r, s));
            }
        }
        if let Some((d, _, r, s)) = best {
            w[j] = d.max(0) as f64;
            r_star[j] = Some(r);
            station[j] = Some(s);
        }
    }
    BackPressureWeights { w, r_star, station }
}

/// BackPressure: maximize `sum_j sigma_j w_j`, serve route `r*_j` on each
/// link with positive weight, nothing elsewhere.
///
/// The vertex search runs over the atoms truncated at the packets available
/// to serve (`X_{j r*_j}` where `w_j > 0`, zero elsewhere), so the chosen
/// schedule is exactly the service delivered.
pub fn backpressure(x: &MultiHopState, net: &Network, set: &ScheduleSet) -> ServiceAction {
    let bp = backpressure_weights(x, net);
    let cap: Vec<u64> = (0..net.num_links())
        .map(|j| match bp.station[j] {
            Some(s) if bp.w[j] > 0.0 => x.x[s],
            _ => 0,
        })
        .collect();
    let sigma = capped_linear_oracle(&bp.w, &cap, set);
    let mut action = ServiceAction::idle_multihop(net);
    for (j, &sj) in sigma.iter().enumerate() {
        if sj > 0 {
            let s = bp.station[j].expect("capped links have a station");
            action.xi[s] = u64::from(sj);
            action.sigma[j] = u64::from(sj);
        }
    }
    action
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RawLink, RawRoute};

    fn link(id: &str, t: &str, h: &str) -> RawLink {
        RawLink {
            id: id.into(),
            tail: t.into(),
            head: h.into(),
        }
    }

    fn route(id: &str, links: &[&str]) -> RawRoute {
        RawRoute {
            id: id.into(),
            links: links.iter().map(|s| s.to_string()).collect(),
            rate: 0.1,
        }
    }

    fn tandem() -> (Network, ScheduleSet) {
        let net = Network::new(
            vec!["a".into(), "b".into(), "c".into()],
            &[link("ab", "a", "b"), link("bc", "b", "c")],
            &[route("r1", &["ab", "bc"])],
        )
        .unwrap();
        let set = ScheduleSet::from_atoms(2, vec![vec![0, 0], vec![1, 0], vec![0, 1]]).unwrap();
        (net, set)
    }

    #[test]
    fn last_hop_compares_with_zero() {
        let net = Network::new(
            vec!["a".into(), "b".into()],
            &[link("ab", "a", "b")],
            &[route("r", &["ab"])],
        )
        .unwrap();
        let bp = backpressure_weights(&MultiHopState::new(vec![5]), &net);
        assert_eq!(bp.w, vec![5.0]);
    }

    #[test]
    fn differential_with_downstream() {
        let (net, _) = tandem();
        let bp = backpressure_weights(&MultiHopState::new(vec![5, 2]), &net);
        assert_eq!(bp.w, vec![3.0, 2.0]);
    }

    #[test]
    fn negative_differentials_idle() {
        let (net, set) = tandem();
        let x = MultiHopState::new(vec![0, 0]);
        assert_eq!(
            backpressure(&x, &net, &set),
            ServiceAction::idle_multihop(&net)
        );
        // upstream 1 below downstream 3: link ab idle, bc serves
        let a = backpressure(&MultiHopState::new(vec![1, 3]), &net, &set);
        assert_eq!(a.sigma, vec![0, 1]);
        assert_eq!(a.xi, vec![0, 1]);
    }

    #[test]
    fn service_capped_at_available() {
        let net = Network::new(
            vec!["a".into(), "b".into()],
            &[link("ab", "a", "b")],
            &[route("r", &["ab"])],
        )
        .unwrap();
        let set = ScheduleSet::from_atoms(1, vec![vec![0], vec![3]]).unwrap();
        let a = backpressure(&MultiHopState::new(vec![2]), &net, &set);
        assert_eq!(a.sigma, vec![2]);
        assert!(a.check_multihop(&net, &MultiHopState::new(vec![2])).is_ok());
    }

    #[test]
    fn route_ties_go_to_smallest_id() {
        let net = Network::new(
            vec!["a".into(), "b".into()],
            &[link("ab", "a", "b")],
            &[route("z", &["ab"]), route("m", &["ab"])],
        )
        .unwrap();
        let bp = backpressure_weights(&MultiHopState::new(vec![4, 4]), &net);
        assert_eq!(bp.r_star, vec![Some(1)]);
    }
}
