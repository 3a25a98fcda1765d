use crate::model::{MultiHopState, Network, QueueState};

/// Realized service in one slot.
///
/// `xi` is indexed by station (see [`Network::stations`]) and is empty for
/// single-hop decisions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceAction {
    pub sigma: Vec<u64>,
    pub xi: Vec<u64>,
}

impl ServiceAction {
    pub fn idle(links: usize) -> Self {
        ServiceAction {
            sigma: vec![0; links],
            xi: Vec::new(),
        }
    }

    pub fn idle_multihop(net: &Network) -> Self {
        ServiceAction {
            sigma: vec![0; net.num_links()],
            xi: vec![0; net.stations().len()],
        }
    }

    /// `sigma <= Q`.
    pub fn check_single_hop(&self, q: &QueueState) -> Result<(), String> {
        if self.sigma.len() != q.q.len() {
            return Err(format!(
                "action has {} links, state has {}",
                self.sigma.len(),
                q.q.len()
            ));
        }
        for (j, (&s, &qj)) in self.sigma.iter().zip(&q.q).enumerate() {
            if s > qj {
                return Err(format!("link #{j}: serves {s} with only {qj} queued"));
            }
        }
        Ok(())
    }

    /// `sum_r xi_jr = sigma_j`, `xi_jr <= X_jr`.
    pub fn check_multihop(&self, net: &Network, x: &MultiHopState) -> Result<(), String> {
        if self.xi.len() != x.x.len() {
            return Err(format!(
                "action has {} stations, state has {}",
                self.xi.len(),
                x.x.len()
            ));
        }
        for (s, (&served, &present)) in self.xi.iter().zip(&x.x).enumerate() {
            if served > present {
                return Err(format!(
                    "station #{s}: serves {served} with only {present} queued"
                ));
            }
        }
        let totals = net.link_totals(&self.xi);
        for (j, (&t, &s)) in totals.iter().zip(&self.sigma).enumerate() {
            if t != s {
                return Err(format!("link #{j}: sigma = {s} but xi sums to {t}"));
            }
        }
        Ok(())
    }
}
