//! Precinct dual graph: one node per precinct, edges between adjacent precincts.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A single precinct with its aggregate weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Precinct {
    /// Opaque identifier, unique within a graph.
    pub id: String,
    /// Area in arbitrary square units.
    pub area: f64,
    /// Resident population.
    pub population: u64,
}

/// Which per-precinct weight an operation aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Area,
    Population,
}

impl WeightKind {
    pub fn weight_of(self, p: &Precinct) -> f64 {
        match self {
            WeightKind::Area => p.area,
            WeightKind::Population => p.population as f64,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WeightKind::Area => "area",
            WeightKind::Population => "population",
        }
    }
}

impl std::str::FromStr for WeightKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "area" => Ok(WeightKind::Area),
            "population" => Ok(WeightKind::Population),
            other => Err(format!("unknown weight kind {other:?}")),
        }
    }
}

impl std::fmt::Display for WeightKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Connected precinct adjacency graph. Immutable once built; node indices are
/// stable and follow the order precincts were supplied in.
#[derive(Debug, Clone)]
pub struct DualGraph {
    precincts: Vec<Precinct>,
    index: HashMap<String, u32>,
    neighbors: Vec<Vec<u32>>,
    edges: Vec<(u32, u32)>,
    total_area: f64,
    total_population: u64,
}

impl DualGraph {
    /// Builds and validates a graph from precincts and id-pair edges.
    ///
    /// Rejects duplicate ids, negative areas, dangling or self-loop edges, and
    /// disconnected graphs. Duplicate edges are collapsed.
    pub fn new(precincts: Vec<Precinct>, edge_ids: &[(String, String)]) -> Result<Self> {
        if precincts.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut index = HashMap::with_capacity(precincts.len());
        for (i, p) in precincts.iter().enumerate() {
            if p.area < 0.0 || !p.area.is_finite() {
                return Err(Error::NegativeArea { id: p.id.clone() });
            }
            if index.insert(p.id.clone(), i as u32).is_some() {
                return Err(Error::DuplicateId { id: p.id.clone() });
            }
        }

        let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(edge_ids.len());
        for (a, b) in edge_ids {
            let ai = *index
                .get(a)
                .ok_or_else(|| Error::UnknownEndpoint { id: a.clone() })?;
            let bi = *index
                .get(b)
                .ok_or_else(|| Error::UnknownEndpoint { id: b.clone() })?;
            if ai == bi {
                return Err(Error::SelfLoop { id: a.clone() });
            }
            pairs.push((ai.min(bi), ai.max(bi)));
        }
        pairs.sort_unstable();
        pairs.dedup();

        let mut neighbors = vec![Vec::new(); precincts.len()];
        for &(a, b) in &pairs {
            neighbors[a as usize].push(b);
            neighbors[b as usize].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }

        let total_area = precincts.iter().map(|p| p.area).sum();
        let total_population = precincts.iter().map(|p| p.population).sum();
        let graph = DualGraph {
            precincts,
            index,
            neighbors,
            edges: pairs,
            total_area,
            total_population,
        };
        graph.check_connected()?;
        Ok(graph)
    }

    fn check_connected(&self) -> Result<()> {
        let mut seen = vec![false; self.len()];
        let mut reps = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            reps.push(self.precincts[start].id.clone());
            let mut stack = vec![start as u32];
            seen[start] = true;
            while let Some(node) = stack.pop() {
                for &next in &self.neighbors[node as usize] {
                    if !seen[next as usize] {
                        seen[next as usize] = true;
                        stack.push(next);
                    }
                }
            }
        }
        if reps.len() > 1 {
            return Err(Error::Disconnected { reps });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.precincts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.precincts.is_empty()
    }

    pub fn precinct(&self, idx: u32) -> &Precinct {
        &self.precincts[idx as usize]
    }

    pub fn precincts(&self) -> &[Precinct] {
        &self.precincts
    }

    pub fn index_of(&self, id: &str) -> Option<u32> {
        self.index.get(id).copied()
    }

    /// Neighbor indices of a node, ascending.
    pub fn neighbors(&self, idx: u32) -> &[u32] {
        &self.neighbors[idx as usize]
    }

    /// All edges as (low, high) index pairs, sorted.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn total_area(&self) -> f64 {
        self.total_area
    }

    pub fn total_population(&self) -> u64 {
        self.total_population
    }

    pub fn total_weight(&self, kind: WeightKind) -> f64 {
        match kind {
            WeightKind::Area => self.total_area,
            WeightKind::Population => self.total_population as f64,
        }
    }
}
