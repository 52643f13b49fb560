use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// One (user, community, count) engagement record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interaction {
    pub user_id: String,
    pub community: String,
    pub count: u64,
}

impl Interaction {
    pub fn new(user: &str, community: &str, count: u64) -> Self {
        Interaction { user_id: user.to_string(), community: community.to_string(), count }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Community,
    User,
}

/// User–community bipartite graph with summed interaction weights.
///
/// Nodes are numbered communities first (sorted by name), then users
/// (sorted by id).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BipartiteGraph {
    communities: Vec<String>,
    users: Vec<String>,
    /// Sorted neighbour lists with weights.
    adjacency: Vec<Vec<(usize, f64)>>,
    edges: usize,
}

impl BipartiteGraph {
    /// Sums repeated (user, community) records into one edge. Records with a
    /// zero count are ignored.
    pub fn build(interactions: &[Interaction]) -> BipartiteGraph {
        let mut weights: BTreeMap<(&str, &str), u64> = BTreeMap::new();
        for r in interactions.iter().filter(|r| r.count > 0) {
            *weights.entry((r.user_id.as_str(), r.community.as_str())).or_insert(0) += r.count;
        }
        let communities: Vec<String> =
            weights.keys().map(|(_, c)| *c).collect::<BTreeSet<_>>().into_iter().map(str::to_string).collect();
        let users: Vec<String> =
            weights.keys().map(|(u, _)| *u).collect::<BTreeSet<_>>().into_iter().map(str::to_string).collect();
        let c_index: BTreeMap<&str, usize> = communities.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
        let u_index: BTreeMap<&str, usize> =
            users.iter().enumerate().map(|(i, u)| (u.as_str(), communities.len() + i)).collect();
        let mut adjacency = vec![Vec::new(); communities.len() + users.len()];
        for ((u, c), w) in &weights {
            let (ui, ci) = (u_index[u], c_index[c]);
            adjacency[ui].push((ci, *w as f64));
            adjacency[ci].push((ui, *w as f64));
        }
        for list in &mut adjacency {
            list.sort_by_key(|(n, _)| *n);
        }
        BipartiteGraph { communities, users, adjacency, edges: weights.len() }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn communities(&self) -> &[String] {
        &self.communities
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn kind(&self, node: usize) -> NodeKind {
        if node < self.communities.len() { NodeKind::Community } else { NodeKind::User }
    }

    pub fn name(&self, node: usize) -> &str {
        match self.kind(node) {
            NodeKind::Community => &self.communities[node],
            NodeKind::User => &self.users[node - self.communities.len()],
        }
    }

    pub fn community_node(&self, name: &str) -> Option<usize> {
        self.communities.binary_search_by(|c| c.as_str().cmp(name)).ok()
    }

    pub fn user_node(&self, id: &str) -> Option<usize> {
        self.users.binary_search_by(|u| u.as_str().cmp(id)).ok().map(|i| i + self.communities.len())
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        let list = &self.adjacency[a];
        list.binary_search_by_key(&b, |(n, _)| *n).ok().map(|i| list[i].1)
    }

    /// Connected component label of every node (labels are the smallest
    /// node index in the component).
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.node_count()];
        for start in 0..self.node_count() {
            if label[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            label[start] = start;
            while let Some(v) = stack.pop() {
                for &(w, _) in self.neighbors(v) {
                    if label[w] == usize::MAX {
                        label[w] = start;
                        stack.push(w);
                    }
                }
            }
        }
        label
    }
}

/// Community–community edge weighted by the number of shared users.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoEngagement {
    pub a: String,
    pub b: String,
    pub shared_users: usize,
}

/// Projects the bipartite graph onto communities; `a < b` in every edge and
/// communities without shared users are not connected.
pub fn cooccurrence_projection(g: &BipartiteGraph) -> Vec<CoEngagement> {
    let mut shared: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for u in g.communities.len()..g.node_count() {
        let cs = g.neighbors(u);
        for (i, &(a, _)) in cs.iter().enumerate() {
            for &(b, _) in &cs[i + 1..] {
                *shared.entry((a, b)).or_insert(0) += 1;
            }
        }
    }
    shared
        .into_iter()
        .map(|((a, b), n)| CoEngagement { a: g.name(a).to_string(), b: g.name(b).to_string(), shared_users: n })
        .collect()
}
