use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{
    boundary_scale, validate_network, Network, RawLink, RawNetwork, RawRoute, ScheduleSet,
};

/// Presets whose schedule set would exceed this many atoms are built without
/// one; they serve the queue-count report only.
pub const MAX_PRESET_ATOMS: usize = 200_000;

pub const MAX_IQ_PORTS: usize = 5;

/// Load used when a preset is built without an explicit one.
pub const DEFAULT_LOAD: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Two links into one node, one may be active per slot.
    Simplex2,
    /// One two-hop route over links that cannot be active together.
    Tandem2,
    /// Tree with node degree `d` and leaf-to-leaf diameter `diameter`. All
    /// ordered leaf pairs are routes unless `routes` picks the first `k` of
    /// the cyclic pairs `leaf i -> leaf i + leaves/d`.
    Tree {
        d: usize,
        diameter: usize,
        routes: Option<usize>,
    },
    /// `n x n` input-queued switch; schedules are the partial matchings.
    IqSwitch { n: usize },
}

impl Preset {
    pub fn builtin() -> Vec<Preset> {
        vec![
            Preset::Simplex2,
            Preset::Tandem2,
            Preset::Tree {
                d: 3,
                diameter: 6,
                routes: None,
            },
            Preset::Tree {
                d: 3,
                diameter: 4,
                routes: Some(3),
            },
            Preset::IqSwitch { n: 3 },
        ]
    }

    pub fn describe(&self) -> &'static str {
        match self {
            Preset::Simplex2 => "two single-hop links sharing one slot",
            Preset::Tandem2 => "one route over two conflicting links",
            Preset::Tree { .. } => {
                "leaf-to-leaf routes on a regular tree, one transmission per node"
            }
            Preset::IqSwitch { .. } => "input-queued switch, partial matchings",
        }
    }

    /// Builds the preset with route rates `load * theta * 1`, where
    /// `theta` puts unit route rates on the hull boundary.
    pub fn build(&self, load: f64) -> Result<Built> {
        if !(load >= 0.0) || !load.is_finite() {
            return Err(Error::Config(format!(
                "load must be finite and nonnegative (got {load})"
            )));
        }
        let mut raw = match *self {
            Preset::Simplex2 => simplex2(),
            Preset::Tandem2 => tandem2(),
            Preset::Tree {
                d,
                diameter,
                routes,
            } => tree(d, diameter, routes)?,
            Preset::IqSwitch { n } => iq_switch(n)?,
        };
        let Some(schedules) = raw.schedules.take() else {
            let net = Network::new(raw.nodes, &raw.links, &raw.routes)?;
            return Ok(Built {
                preset: *self,
                net,
                set: None,
            });
        };
        let unit = RawNetwork {
            nodes: raw.nodes,
            links: raw.links,
            schedules,
            routes: raw.routes,
        };
        let (net, set) = validate_network(&unit)?;
        let direction = net.link_loads().to_vec();
        let theta = boundary_scale(&direction, &set)?;
        let rates = vec![load * theta; net.routes().len()];
        let net = net.with_rates(&rates)?;
        Ok(Built {
            preset: *self,
            net,
            set: Some(set),
        })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Simplex2 => f.write_str("simplex2"),
            Preset::Tandem2 => f.write_str("tandem2"),
            Preset::Tree {
                d,
                diameter,
                routes: None,
            } => write!(f, "tree({d},{diameter})"),
            Preset::Tree {
                d,
                diameter,
                routes: Some(k),
            } => write!(f, "tree({d},{diameter},{k})"),
            Preset::IqSwitch { n } => write!(f, "iq-switch({n})"),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    /// Accepts the forms printed by `Display`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(i) if s.ends_with(')') => (&s[..i], &s[i + 1..s.len() - 1]),
            Some(_) => return Err(Error::Config(format!("malformed preset `{s}`"))),
            None => (s, ""),
        };
        let nums: Vec<usize> = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| a.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Config(format!("malformed preset arguments in `{s}`")))?
        };
        match (name, nums.as_slice()) {
            ("simplex2", []) => Ok(Preset::Simplex2),
            ("tandem2", []) => Ok(Preset::Tandem2),
            ("tree", [d, diameter]) => Ok(Preset::Tree {
                d: *d,
                diameter: *diameter,
                routes: None,
            }),
            ("tree", [d, diameter, k]) => Ok(Preset::Tree {
                d: *d,
                diameter: *diameter,
                routes: Some(*k),
            }),
            ("iq-switch", [n]) => Ok(Preset::IqSwitch { n: *n }),
            _ => Err(Error::Config(format!("unknown preset `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Built {
    pub preset: Preset,
    pub net: Network,
    /// `None` when the schedule set is too large to list.
    pub set: Option<ScheduleSet>,
}

impl Built {
    pub fn schedule_set(&self) -> Result<&ScheduleSet> {
        self.set.as_ref().ok_or_else(|| {
            Error::Config(format!(
                "preset {} has more than {MAX_PRESET_ATOMS} schedules; only the report mode is available",
                self.preset
            ))
        })
    }
}

struct Draft {
    nodes: Vec<String>,
    links: Vec<RawLink>,
    schedules: Option<Vec<Vec<i64>>>,
    routes: Vec<RawRoute>,
}

fn link(id: &str, tail: &str, head: &str) -> RawLink {
    RawLink {
        id: id.into(),
        tail: tail.into(),
        head: head.into(),
    }
}

fn route(id: &str, links: &[&str]) -> RawRoute {
    RawRoute {
        id: id.into(),
        links: links.iter().map(|l| l.to_string()).collect(),
        rate: 1.0,
    }
}

fn simplex2() -> Draft {
    Draft {
        nodes: vec!["a".into(), "b".into(), "c".into()],
        links: vec![link("l1", "a", "c"), link("l2", "b", "c")],
        schedules: Some(vec![vec![0, 0], vec![1, 0], vec![0, 1]]),
        routes: vec![route("r1", &["l1"]), route("r2", &["l2"])],
    }
}

fn tandem2() -> Draft {
    Draft {
        nodes: vec!["a".into(), "b".into(), "c".into()],
        links: vec![link("ab", "a", "b"), link("bc", "b", "c")],
        schedules: Some(vec![vec![0, 0], vec![1, 0], vec![0, 1]]),
        routes: vec![route("r", &["ab", "bc"])],
    }
}

fn iq_switch(n: usize) -> Result<Draft> {
    if n == 0 || n > MAX_IQ_PORTS {
        return Err(Error::Config(format!(
            "iq-switch needs 1 <= n <= {MAX_IQ_PORTS} (got {n})"
        )));
    }
    let mut nodes: Vec<String> = (0..n).map(|i| format!("in{i}")).collect();
    nodes.extend((0..n).map(|o| format!("out{o}")));
    let mut links = Vec::new();
    let mut routes = Vec::new();
    for i in 0..n {
        for o in 0..n {
            let id = format!("i{i}o{o}");
            links.push(link(&id, &format!("in{i}"), &format!("out{o}")));
            routes.push(route(&format!("r{i}{o}"), &[&id]));
        }
    }
    // Partial matchings: each input picks an unused output or stays idle.
    let mut schedules = Vec::new();
    let mut pick = vec![usize::MAX; n];
    fn rec(
        i: usize,
        n: usize,
        pick: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<i64>>,
    ) {
        if i == n {
            let mut s = vec![0; n * n];
            for (a, &o) in pick.iter().enumerate() {
                if o != usize::MAX {
                    s[a * n + o] = 1;
                }
            }
            out.push(s);
            return;
        }
        pick[i] = usize::MAX;
        rec(i + 1, n, pick, used, out);
        for o in 0..n {
            if !used[o] {
                used[o] = true;
                pick[i] = o;
                rec(i + 1, n, pick, used, out);
                used[o] = false;
            }
        }
        pick[i] = usize::MAX;
    }
    rec(0, n, &mut pick, &mut vec![false; n], &mut schedules);
    Ok(Draft {
        nodes,
        links,
        schedules: Some(schedules),
        routes,
    })
}

fn up_path<'a>(parent: &'a BTreeMap<String, String>, mut v: &'a str) -> Vec<String> {
    let mut path = vec![v.to_string()];
    while let Some(p) = parent.get(v) {
        path.push(p.clone());
        v = p;
    }
    path
}

/// Node names encode the path from the center: `c`, `c.0`, `c.0.1`, ...
fn tree(d: usize, diameter: usize, k: Option<usize>) -> Result<Draft> {
    if d < 2 || diameter < 2 || diameter % 2 != 0 {
        return Err(Error::Config(format!(
            "tree needs d >= 2 and an even diameter >= 2 (got d={d}, D={diameter})"
        )));
    }
    let depth = diameter / 2;
    let mut parent: BTreeMap<String, String> = BTreeMap::new();
    let mut nodes = vec!["c".to_string()];
    let mut frontier = vec!["c".to_string()];
    for level in 0..depth {
        let mut next = Vec::new();
        for u in &frontier {
            let children = if level == 0 { d } else { d - 1 };
            for c in 0..children {
                let v = format!("{u}.{c}");
                parent.insert(v.clone(), u.clone());
                nodes.push(v.clone());
                next.push(v);
            }
        }
        frontier = next;
    }
    let leaves = frontier;
    let total_leaves = leaves.len();

    let pairs: Vec<(usize, usize)> = match k {
        None => (0..total_leaves)
            .flat_map(|a| {
                (0..total_leaves)
                    .filter(move |&b| b != a)
                    .map(move |b| (a, b))
            })
            .collect(),
        Some(k) => {
            if k == 0 || k > total_leaves {
                return Err(Error::Config(format!(
                    "tree route count must be in 1..={total_leaves} (got {k})"
                )));
            }
            (0..k)
                .map(|i| (i, (i + total_leaves / d) % total_leaves))
                .collect()
        }
    };

    let mut used: Vec<(String, String)> = Vec::new();
    let mut routes = Vec::new();
    for (a, b) in pairs {
        let up = up_path(&parent, &leaves[a]);
        let down = up_path(&parent, &leaves[b]);
        // Lowest common ancestor: longest common suffix of the two paths.
        let mut common = 0;
        while common < up.len().min(down.len())
            && up[up.len() - 1 - common] == down[down.len() - 1 - common]
        {
            common += 1;
        }
        let mut hops: Vec<String> = up[..up.len() - common + 1].to_vec();
        hops.extend(down[..down.len() - common].iter().rev().cloned());
        let mut ids = Vec::new();
        for w in hops.windows(2) {
            let pair = (w[0].clone(), w[1].clone());
            if !used.contains(&pair) {
                used.push(pair);
            }
            ids.push(format!("{}>{}", w[0], w[1]));
        }
        routes.push(RawRoute {
            id: format!("{}~{}", leaves[a], leaves[b]),
            links: ids,
            rate: 1.0,
        });
    }
    used.sort();
    let links: Vec<RawLink> = used
        .iter()
        .map(|(t, h)| link(&format!("{t}>{h}"), t, h))
        .collect();

    // Each node transmits on at most one of its outgoing links.
    let mut by_tail: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (j, l) in links.iter().enumerate() {
        by_tail.entry(l.tail.as_str()).or_default().push(j);
    }
    let count = by_tail
        .values()
        .try_fold(1usize, |acc, v| acc.checked_mul(v.len() + 1))
        .unwrap_or(usize::MAX);
    let schedules = (count <= MAX_PRESET_ATOMS).then(|| {
        let mut out = vec![vec![0i64; links.len()]];
        for outs in by_tail.values() {
            let mut next = Vec::with_capacity(out.len() * (outs.len() + 1));
            for s in &out {
                next.push(s.clone());
                for &j in outs {
                    let mut t = s.clone();
                    t[j] = 1;
                    next.push(t);
                }
            }
            out = next;
        }
        out
    });
    Ok(Draft {
        nodes,
        links,
        schedules,
        routes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in Preset::builtin() {
            assert_eq!(p.to_string().parse::<Preset>().unwrap(), p);
        }
        assert!("tree(3)".parse::<Preset>().is_err());
        assert!("ring".parse::<Preset>().is_err());
    }

    #[test]
    fn simplex_rates_scale_to_boundary() {
        let b = Preset::Simplex2.build(0.9).unwrap();
        assert!((b.net.route_rates()[0] - 0.45).abs() < 1e-9);
    }

    #[test]
    fn iq_switch_matchings() {
        let b = Preset::IqSwitch { n: 3 }.build(0.9).unwrap();
        // 1 + 9 + 18 + 6 partial matchings of a 3x3 bipartite graph.
        assert_eq!(b.set.unwrap().len(), 34);
        assert!((b.net.route_rates()[0] - 0.3).abs() < 1e-9);
    }

    #[test]
    fn small_tree_with_three_routes() {
        let b = Preset::Tree {
            d: 3,
            diameter: 4,
            routes: Some(3),
        }
        .build(0.5)
        .unwrap();
        assert_eq!(b.net.routes().len(), 3);
        assert_eq!(b.net.num_links(), 10);
        assert_eq!(b.set.unwrap().len(), 384);
    }

    #[test]
    fn full_tree_is_report_only() {
        let b = Preset::Tree {
            d: 3,
            diameter: 6,
            routes: None,
        }
        .build(0.5)
        .unwrap();
        assert!(b.set.is_none());
        assert_eq!(b.net.routes().len(), 132);
    }
}
