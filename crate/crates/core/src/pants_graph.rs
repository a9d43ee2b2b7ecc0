//! Trivalent dual graphs of pants decompositions and their admissible
//! labelings.
//!
//! A pants decomposition of a closed genus-`g` surface has `2g - 2` pairs of
//! pants glued along `3g - 3` curves. Its dual graph has one vertex per pair
//! of pants and one edge per curve; a pair of pants glued to itself along two
//! of its boundary circles gives a loop. Every vertex has three slots
//! (`0`, `1`, `2`), one for each boundary circle, and every slot is occupied
//! by exactly one edge end.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One end of an edge: a vertex index and a boundary slot in `0..3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Endpoint {
    pub vertex: usize,
    pub slot: u8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub a: Endpoint,
    pub b: Endpoint,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.a.vertex == self.b.vertex
    }
}

/// A validated connected trivalent multigraph (loops allowed).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrivalentGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    /// `slots[v][s]` is the index of the edge occupying slot `s` at vertex `v`.
    slots: Vec<[usize; 3]>,
}

impl TrivalentGraph {
    /// Builds a graph from vertex ids and edges given as
    /// `(edge id, (vertex id, slot), (vertex id, slot))`.
    #[allow(clippy::type_complexity)]
    pub fn new<V, E>(vertices: Vec<V>, edges: Vec<(E, (V, u8), (V, u8))>) -> Result<Self>
    where
        V: Into<String>,
        E: Into<String>,
    {
        let vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        let mut index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::Structure(format!("duplicate vertex id {v:?}")));
            }
        }
        let lookup = |v: String, slot: u8| -> Result<Endpoint> {
            let vertex = *index
                .get(&v)
                .ok_or_else(|| Error::Structure(format!("edge refers to unknown vertex {v:?}")))?;
            if slot > 2 {
                return Err(Error::Structure(format!("slot {slot} at vertex {v:?} is not in 0..3")));
            }
            Ok(Endpoint { vertex, slot })
        };
        let mut built = Vec::with_capacity(edges.len());
        for (id, (va, sa), (vb, sb)) in edges {
            built.push(Edge {
                id: id.into(),
                a: lookup(va.into(), sa)?,
                b: lookup(vb.into(), sb)?,
            });
        }
        Self::from_parts(vertices, built)
    }

    fn from_parts(vertices: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Structure("graph has no vertices".into()));
        }
        let mut ids = BTreeSet::new();
        for e in &edges {
            if !ids.insert(e.id.clone()) {
                return Err(Error::Structure(format!("duplicate edge id {:?}", e.id)));
            }
        }
        let mut slots = vec![[usize::MAX; 3]; vertices.len()];
        for (ei, e) in edges.iter().enumerate() {
            if e.a == e.b {
                return Err(Error::Structure(format!("edge {:?} uses one slot twice", e.id)));
            }
            for end in [e.a, e.b] {
                let cell = &mut slots[end.vertex][end.slot as usize];
                if *cell != usize::MAX {
                    return Err(Error::Structure(format!(
                        "slot {} at vertex {:?} is occupied twice",
                        end.slot, vertices[end.vertex]
                    )));
                }
                *cell = ei;
            }
        }
        for (v, s) in slots.iter().enumerate() {
            if s.contains(&usize::MAX) {
                return Err(Error::Structure(format!(
                    "vertex {:?} does not have three occupied slots",
                    vertices[v]
                )));
            }
        }
        // 3|V| = 2|E| follows from the slot check; the closed-surface
        // constraint is |V| = 2g - 2 with g >= 2.
        let nv = vertices.len();
        if nv < 2 || !nv.is_multiple_of(2) {
            return Err(Error::Structure(format!(
                "{nv} vertices cannot be the dual graph of a closed surface of genus >= 2"
            )));
        }
        let graph = TrivalentGraph { vertices, edges, slots };
        if !graph.is_connected_without(None) {
            return Err(Error::Structure("graph is disconnected".into()));
        }
        Ok(graph)
    }

    /// Graph whose slot `s` of vertex `v` is the global slot `3v + s`, with
    /// edges given as pairs of global slots.
    pub fn from_slot_pairing(n_vertices: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let vertices = (0..n_vertices).map(|v| format!("v{v}")).collect();
        let edges = pairs
            .iter()
            .enumerate()
            .map(|(i, &(p, q))| Edge {
                id: format!("e{i}"),
                a: Endpoint { vertex: p / 3, slot: (p % 3) as u8 },
                b: Endpoint { vertex: q / 3, slot: (q % 3) as u8 },
            })
            .collect();
        Self::from_parts(vertices, edges)
    }

    /// Genus 2: two vertices joined by three parallel edges.
    pub fn theta() -> Self {
        Self::from_slot_pairing(2, &[(0, 3), (1, 4), (2, 5)]).expect("theta graph")
    }

    /// Genus 2: a loop at each vertex joined by a bridge.
    pub fn dumbbell() -> Self {
        Self::from_slot_pairing(2, &[(0, 1), (2, 5), (3, 4)]).expect("dumbbell graph")
    }

    /// Genus `g >= 2` chain: loop, bridge, double edge, bridge, ..., loop.
    pub fn chain(genus: usize) -> Result<Self> {
        if genus < 2 {
            return Err(Error::Structure(format!("chain graphs need genus >= 2, got {genus}")));
        }
        let nv = 2 * genus - 2;
        let last = nv - 1;
        let slot = |v: usize, s: usize| 3 * v + s;
        let mut pairs = vec![(slot(0, 0), slot(0, 1))];
        for v in (0..last).step_by(2) {
            let right = if v == 0 { slot(v, 2) } else { slot(v, 0) };
            let left = if v + 1 == last { slot(v + 1, 2) } else { slot(v + 1, 0) };
            pairs.push((right, left));
            if v + 1 != last {
                pairs.push((slot(v + 1, 1), slot(v + 2, 1)));
                pairs.push((slot(v + 1, 2), slot(v + 2, 2)));
            }
        }
        pairs.push((slot(last, 0), slot(last, 1)));
        Self::from_slot_pairing(nv, &pairs)
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_ids(&self) -> Vec<&str> {
        self.edges.iter().map(|e| e.id.as_str()).collect()
    }

    /// Edge indices in slots 0, 1, 2 of vertex `v`.
    pub fn vertex_edges(&self, v: usize) -> [usize; 3] {
        self.slots[v]
    }

    pub fn genus(&self) -> usize {
        self.edges.len() - self.vertices.len() + 1
    }

    fn is_connected_without(&self, removed: Option<usize>) -> bool {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &ei in &self.slots[v] {
                if Some(ei) == removed {
                    continue;
                }
                let e = &self.edges[ei];
                for w in [e.a.vertex, e.b.vertex] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            vertices: self.vertices.iter().cloned().map(RawId::Str).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    id: RawId::Str(e.id.clone()),
                    a: (RawId::Str(self.vertices[e.a.vertex].clone()), e.a.slot),
                    b: (RawId::Str(self.vertices[e.b.vertex].clone()), e.b.slot),
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("graph serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)?;
        let vertices: Vec<String> = file.vertices.into_iter().map(RawId::into_string).collect();
        let edges = file
            .edges
            .into_iter()
            .map(|e| (e.id.into_string(), (e.a.0.into_string(), e.a.1), (e.b.0.into_string(), e.b.1)))
            .collect();
        Self::new(vertices, edges)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawId {
    Num(u64),
    Str(String),
}

impl RawId {
    fn into_string(self) -> String {
        match self {
            RawId::Num(n) => n.to_string(),
            RawId::Str(s) => s,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    id: RawId,
    a: (RawId, u8),
    b: (RawId, u8),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    vertices: Vec<RawId>,
    edges: Vec<EdgeRecord>,
}

/// Edge labels in `0..=level`, indexed like [`TrivalentGraph::edges`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Labeling {
    pub values: Vec<u32>,
    pub level: u32,
}

impl Labeling {
    pub fn new(values: Vec<u32>, level: u32) -> Result<Self> {
        if let Some(&v) = values.iter().find(|&&v| v > level) {
            return Err(Error::OutOfRange(format!("label {v} exceeds level {level}")));
        }
        Ok(Labeling { values, level })
    }

    /// The labels of the three slots at vertex `v`.
    pub fn vertex_triple(&self, graph: &TrivalentGraph, v: usize) -> (u32, u32, u32) {
        let [e0, e1, e2] = graph.vertex_edges(v);
        (self.values[e0], self.values[e1], self.values[e2])
    }
}

/// Bridges of the graph: the edges whose removal disconnects it.
pub fn separating_edges(graph: &TrivalentGraph) -> BTreeSet<usize> {
    // Tarjan low-link over edge indices, so parallel edges are handled.
    let n = graph.vertices.len();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut bridges = BTreeSet::new();
    let mut timer = 0;
    // Iterative DFS: (vertex, edge used to enter, next slot to scan).
    let mut stack: Vec<(usize, Option<usize>, usize)> = vec![(0, None, 0)];
    disc[0] = 0;
    low[0] = 0;
    timer += 1;
    while let Some(&mut (v, parent_edge, ref mut next)) = stack.last_mut() {
        if *next < 3 {
            let ei = graph.slots[v][*next];
            *next += 1;
            let e = &graph.edges[ei];
            if e.is_loop() || Some(ei) == parent_edge {
                continue;
            }
            let w = if e.a.vertex == v { e.b.vertex } else { e.a.vertex };
            if disc[w] == usize::MAX {
                disc[w] = timer;
                low[w] = timer;
                timer += 1;
                stack.push((w, Some(ei), 0));
            } else {
                low[v] = low[v].min(disc[w]);
            }
        } else {
            stack.pop();
            if let (Some(ei), Some(&(p, _, _))) = (parent_edge, stack.last()) {
                low[p] = low[p].min(low[v]);
                if low[v] > disc[p] {
                    bridges.insert(ei);
                }
            }
        }
    }
    bridges
}

/// Edge ids of [`separating_edges`].
pub fn separating_edge_ids(graph: &TrivalentGraph) -> BTreeSet<String> {
    separating_edges(graph).into_iter().map(|e| graph.edges[e].id.clone()).collect()
}

/// Triangle inequality, level bound and parity for a vertex triple.
pub fn is_admissible_triple(l1: u32, l2: u32, l3: u32, level: u32) -> Result<bool> {
    for l in [l1, l2, l3] {
        if l > level {
            return Err(Error::OutOfRange(format!("label {l} exceeds level {level}")));
        }
    }
    Ok(admissible(l1, l2, l3, level))
}

fn admissible(l1: u32, l2: u32, l3: u32, level: u32) -> bool {
    let sum = l1 + l2 + l3;
    l1.abs_diff(l2) <= l3 && l3 <= l1 + l2 && sum <= 2 * level && sum.is_multiple_of(2)
}

/// Checks membership of `labeling` in `L_k` for `graph`.
pub fn check_member(graph: &TrivalentGraph, labeling: &Labeling) -> Result<()> {
    if labeling.values.len() != graph.edges.len() {
        return Err(Error::NotMember(format!(
            "{} labels for {} edges",
            labeling.values.len(),
            graph.edges.len()
        )));
    }
    let level = labeling.level;
    if let Some(&v) = labeling.values.iter().find(|&&v| v > level) {
        return Err(Error::OutOfRange(format!("label {v} exceeds level {level}")));
    }
    for e in separating_edges(graph) {
        if !labeling.values[e].is_multiple_of(2) {
            return Err(Error::NotMember(format!(
                "separating edge {:?} carries odd label {}",
                graph.edges[e].id, labeling.values[e]
            )));
        }
    }
    for v in 0..graph.vertices.len() {
        let (a, b, c) = labeling.vertex_triple(graph, v);
        if !admissible(a, b, c, level) {
            return Err(Error::NotAdmissible(a, b, c, level));
        }
    }
    Ok(())
}

/// All labelings in `L_k`, in lexicographic order of the edge-indexed values.
pub fn enumerate_labelings(graph: &TrivalentGraph, level: u32) -> Vec<Labeling> {
    let order = dfs_edge_order(graph);
    let separating = separating_edges(graph);
    let ne = graph.edges.len();

    // A vertex is checked once the last of its edges (in `order`) is set.
    let mut position = vec![0; ne];
    for (p, &e) in order.iter().enumerate() {
        position[e] = p;
    }
    let mut complete_at: Vec<Vec<usize>> = vec![Vec::new(); ne];
    for v in 0..graph.vertices.len() {
        let last = graph.slots[v].iter().map(|&e| position[e]).max().unwrap();
        complete_at[last].push(v);
    }

    let mut values = vec![0u32; ne];
    let mut out = Vec::new();
    let mut search = Search { graph, level, order: &order, separating: &separating, complete_at: &complete_at };
    search.descend(0, &mut values, &mut out);
    out.sort();
    out
}

struct Search<'a> {
    graph: &'a TrivalentGraph,
    level: u32,
    order: &'a [usize],
    separating: &'a BTreeSet<usize>,
    complete_at: &'a [Vec<usize>],
}

impl Search<'_> {
    fn descend(&mut self, depth: usize, values: &mut [u32], out: &mut Vec<Labeling>) {
        if depth == self.order.len() {
            out.push(Labeling { values: values.to_vec(), level: self.level });
            return;
        }
        let e = self.order[depth];
        let step = if self.separating.contains(&e) { 2 } else { 1 };
        for l in (0..=self.level).step_by(step) {
            values[e] = l;
            let ok = self.complete_at[depth].iter().all(|&v| {
                let [a, b, c] = self.graph.slots[v];
                admissible(values[a], values[b], values[c], self.level)
            });
            if ok {
                self.descend(depth + 1, values, out);
            }
        }
    }
}

fn dfs_edge_order(graph: &TrivalentGraph) -> Vec<usize> {
    let mut seen_edge = vec![false; graph.edges.len()];
    let mut seen_vertex = vec![false; graph.vertices.len()];
    let mut order = Vec::with_capacity(graph.edges.len());
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        if seen_vertex[v] {
            continue;
        }
        seen_vertex[v] = true;
        for &e in &graph.slots[v] {
            if !seen_edge[e] {
                seen_edge[e] = true;
                order.push(e);
            }
            let edge = &graph.edges[e];
            let w = if edge.a.vertex == v { edge.b.vertex } else { edge.a.vertex };
            if !seen_vertex[w] {
                stack.push(w);
            }
        }
    }
    order
}

/// The trace coordinate `2 cos(pi l / k)` of a label.
pub fn label_to_trace(label: u32, level: u32) -> Result<f64> {
    if level == 0 {
        return Err(Error::OutOfRange("label_to_trace needs level >= 1".into()));
    }
    if label > level {
        return Err(Error::OutOfRange(format!("label {label} exceeds level {level}")));
    }
    if 2 * label == level {
        return Ok(0.0);
    }
    Ok(2.0 * (std::f64::consts::PI * label as f64 / level as f64).cos())
}

/// SU(2) Verlinde number of a closed genus-`g` surface at level `k`:
/// `((k+2)/2)^(g-1) * sum_{j=1}^{k+1} sin(j pi/(k+2))^(2-2g)`.
pub fn verlinde_number(genus: u32, level: u32) -> f64 {
    let r = (level + 2) as f64;
    let s: f64 = (1..=level + 1)
        .map(|j| (j as f64 * std::f64::consts::PI / r).sin().powi(2 - 2 * genus as i32))
        .sum();
    (r / 2.0).powi(genus as i32 - 1) * s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_have_expected_genus() {
        assert_eq!(TrivalentGraph::theta().genus(), 2);
        assert_eq!(TrivalentGraph::dumbbell().genus(), 2);
        for g in 2..6 {
            let c = TrivalentGraph::chain(g).unwrap();
            assert_eq!(c.genus(), g);
            assert_eq!(c.vertices().len(), 2 * g - 2);
            assert_eq!(c.edges().len(), 3 * g - 3);
        }
    }

    #[test]
    fn rejects_malformed_graphs() {
        // Two disjoint thetas.
        let pairs = [(0, 3), (1, 4), (2, 5), (6, 9), (7, 10), (8, 11)];
        assert!(matches!(TrivalentGraph::from_slot_pairing(4, &pairs), Err(Error::Structure(_))));
        // Missing slot.
        assert!(matches!(
            TrivalentGraph::from_slot_pairing(2, &[(0, 3), (1, 4)]),
            Err(Error::Structure(_))
        ));
        // Slot used twice.
        assert!(matches!(
            TrivalentGraph::from_slot_pairing(2, &[(0, 3), (0, 4), (2, 5)]),
            Err(Error::Structure(_))
        ));
        // Odd vertex count is not a closed-surface dual.
        let r = TrivalentGraph::new(vec!["a"], vec![("x", ("a", 0), ("a", 1))]);
        assert!(matches!(r, Err(Error::Structure(_))));
        let r = TrivalentGraph::new(
            vec!["a", "b"],
            vec![("x", ("a", 0), ("b", 0)), ("y", ("a", 1), ("b", 1)), ("z", ("a", 2), ("c", 2))],
        );
        assert!(matches!(r, Err(Error::Structure(_))));
    }

    #[test]
    fn bridges_of_small_graphs() {
        assert!(separating_edges(&TrivalentGraph::theta()).is_empty());
        let d = TrivalentGraph::dumbbell();
        let b = separating_edges(&d);
        assert_eq!(b.len(), 1);
        assert!(!d.edges()[*b.iter().next().unwrap()].is_loop());
        let chain = TrivalentGraph::chain(3).unwrap();
        let ids: Vec<_> = separating_edge_ids(&chain).into_iter().collect();
        // Loop e0, bridge e1, double edge e2/e3, bridge e4, loop e5.
        assert_eq!(ids, vec!["e1".to_string(), "e4".to_string()]);
    }

    #[test]
    fn admissible_triples() {
        assert!(is_admissible_triple(1, 1, 0, 1).unwrap());
        assert!(!is_admissible_triple(1, 0, 0, 1).unwrap());
        for k in 1..10 {
            assert!(!is_admissible_triple(k, k, k, k).unwrap());
        }
        assert!(is_admissible_triple(0, 0, 0, 0).unwrap());
        assert!(!is_admissible_triple(2, 0, 0, 3).unwrap());
        assert!(matches!(is_admissible_triple(3, 1, 1, 2), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn theta_level_one_labelings() {
        let ls = enumerate_labelings(&TrivalentGraph::theta(), 1);
        let values: Vec<_> = ls.iter().map(|l| l.values.clone()).collect();
        assert_eq!(values, vec![vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
    }

    #[test]
    fn dumbbell_level_two_has_ten() {
        assert_eq!(enumerate_labelings(&TrivalentGraph::dumbbell(), 2).len(), 10);
        assert_eq!(enumerate_labelings(&TrivalentGraph::theta(), 2).len(), 10);
    }

    #[test]
    fn level_zero_is_all_zero() {
        for g in [TrivalentGraph::theta(), TrivalentGraph::dumbbell(), TrivalentGraph::chain(4).unwrap()] {
            let ls = enumerate_labelings(&g, 0);
            assert_eq!(ls.len(), 1);
            assert!(ls[0].values.iter().all(|&v| v == 0));
        }
    }

    #[test]
    fn enumerated_labelings_are_members() {
        let g = TrivalentGraph::chain(3).unwrap();
        for l in enumerate_labelings(&g, 3) {
            check_member(&g, &l).unwrap();
        }
        let bad = Labeling::new(vec![1, 1, 1, 0, 0, 0], 3).unwrap();
        assert!(check_member(&g, &bad).is_err());
    }

    #[test]
    fn label_traces() {
        assert_eq!(label_to_trace(0, 5).unwrap(), 2.0);
        assert!((label_to_trace(5, 5).unwrap() + 2.0).abs() < 1e-15);
        assert_eq!(label_to_trace(3, 6).unwrap(), 0.0);
        assert!(label_to_trace(6, 5).is_err());
        assert!(label_to_trace(0, 0).is_err());
        for k in 1..12 {
            for l in 0..k {
                assert!(label_to_trace(l, k).unwrap() > label_to_trace(l + 1, k).unwrap());
            }
        }
    }

    #[test]
    fn json_round_trip_and_numeric_ids() {
        let g = TrivalentGraph::chain(3).unwrap();
        assert_eq!(TrivalentGraph::from_json(&g.to_json()).unwrap(), g);
        let text = r#"{"vertices":[1,2],"edges":[{"id":10,"a":[1,0],"b":[2,0]},
            {"id":11,"a":[1,1],"b":[2,1]},{"id":12,"a":[1,2],"b":[2,2]}]}"#;
        let theta = TrivalentGraph::from_json(text).unwrap();
        assert_eq!(theta.edge_ids(), vec!["10", "11", "12"]);
        assert!(TrivalentGraph::from_json(r#"{"vertices":[],"edges":[],"extra":1}"#).is_err());
    }

    #[test]
    fn verlinde_spot_values() {
        assert!((verlinde_number(2, 1) - 4.0).abs() < 1e-9);
        assert!((verlinde_number(2, 2) - 10.0).abs() < 1e-9);
        assert!((verlinde_number(3, 8) - 6105.0).abs() < 1e-6);
    }
}
