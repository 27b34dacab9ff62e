//! Plan generation: recursive-merge seeding and the optimal-recombination
//! chain step (merge two adjacent districts, draw a random spanning tree of
//! the merged cluster, keep the cut that best balances population).

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::DualGraph;
use crate::plan::{validate_plan, Plan};

/// Parameters of one chain. `rng_seed` fully determines the run: the chain
/// RNG is ChaCha8 seeded with it, so identical inputs replay bit-identically
/// on any platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainConfig {
    /// Number of recombination steps to apply.
    pub steps: u64,
    pub rng_seed: u64,
    /// Spanning trees drawn per step; the best cut across all of them wins.
    pub trees_per_step: u32,
}

impl ChainConfig {
    pub fn new(steps: u64, rng_seed: u64) -> Self {
        ChainConfig {
            steps,
            rng_seed,
            trees_per_step: 1,
        }
    }
}

/// Builds the deterministic recursive-merge seed plan: every precinct starts
/// as its own cluster, and the lowest-population cluster repeatedly absorbs
/// its lowest-population neighbor (ties to the lowest cluster id, which is
/// the smallest precinct index in the cluster) until `districts` remain.
/// District labels follow ascending cluster id.
pub fn seed_plan(graph: &DualGraph, districts: u32) -> Result<Plan> {
    if districts == 0 {
        return Err(Error::InvalidConfig {
            reason: "districts must be positive".into(),
        });
    }
    let n = graph.len();
    if districts as usize > n {
        return Err(Error::TooManyDistricts {
            districts,
            precincts: n,
        });
    }

    let mut alive = vec![true; n];
    let mut pops: Vec<u64> = graph.precincts().iter().map(|p| p.population).collect();
    let mut members: Vec<Vec<u32>> = (0..n as u32).map(|i| vec![i]).collect();
    let mut neighbor_sets: Vec<BTreeSet<u32>> = (0..n)
        .map(|i| graph.neighbors(i as u32).iter().copied().collect())
        .collect();

    // (population, cluster id) priority queue with lazy invalidation.
    let mut heap: BTreeSet<(u64, u32)> = (0..n).map(|i| (pops[i], i as u32)).collect();
    let mut remaining = n;
    while remaining > districts as usize {
        let &(pop, id) = heap.iter().next().expect("heap tracks live clusters");
        heap.remove(&(pop, id));
        if !alive[id as usize] || pops[id as usize] != pop {
            continue;
        }
        let target = neighbor_sets[id as usize]
            .iter()
            .map(|&nb| (pops[nb as usize], nb))
            .min()
            .expect("connected graph leaves no isolated cluster")
            .1;
        let keep = id.min(target);
        let drop = id.max(target);

        let dropped_members = std::mem::take(&mut members[drop as usize]);
        members[keep as usize].extend(dropped_members);
        heap.remove(&(pops[keep as usize], keep));
        heap.remove(&(pops[drop as usize], drop));
        pops[keep as usize] += pops[drop as usize];
        alive[drop as usize] = false;

        let dropped_neighbors = std::mem::take(&mut neighbor_sets[drop as usize]);
        for nb in dropped_neighbors {
            if nb == keep {
                continue;
            }
            neighbor_sets[nb as usize].remove(&drop);
            neighbor_sets[nb as usize].insert(keep);
            neighbor_sets[keep as usize].insert(nb);
        }
        neighbor_sets[keep as usize].remove(&keep);
        neighbor_sets[keep as usize].remove(&drop);
        heap.insert((pops[keep as usize], keep));
        remaining -= 1;
    }

    let mut assignment = vec![Plan::UNASSIGNED; n];
    let mut label = 0u32;
    for id in 0..n {
        if alive[id] {
            for &node in &members[id] {
                assignment[node as usize] = label;
            }
            label += 1;
        }
    }
    let plan = Plan {
        assignment,
        num_districts: districts,
    };
    debug_assert!(validate_plan(graph, &plan).is_empty());
    Ok(plan)
}

/// A rooted spanning tree over a precinct subset with per-node cumulative
/// populations.
#[derive(Debug, Clone)]
pub struct SpanningTree {
    nodes: Vec<u32>,
    parent: Vec<usize>,
    children: Vec<Vec<usize>>,
    subtree_pop: Vec<u64>,
    total_pop: u64,
}

impl SpanningTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Graph indices spanned by the tree, ascending; the first is the root.
    pub fn nodes(&self) -> &[u32] {
        &self.nodes
    }

    pub fn parent(&self, local: usize) -> usize {
        self.parent[local]
    }

    pub fn subtree_pop(&self, local: usize) -> u64 {
        self.subtree_pop[local]
    }

    pub fn total_pop(&self) -> u64 {
        self.total_pop
    }

    /// Graph indices in the subtree rooted at `local`.
    pub fn subtree_members(&self, local: usize) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack = vec![local];
        while let Some(v) = stack.pop() {
            out.push(self.nodes[v]);
            stack.extend(&self.children[v]);
        }
        out
    }

    /// Tree edges as (parent, child) graph-index pairs.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        (0..self.len())
            .filter(|&v| self.parent[v] != v)
            .map(|v| (self.nodes[self.parent[v]], self.nodes[v]))
            .collect()
    }
}

/// Draws a random spanning tree of the induced subgraph: every induced edge
/// gets an independent uniform weight and the minimum spanning tree is taken.
/// Rooted at the smallest graph index in `nodes`.
pub fn random_spanning_tree(
    graph: &DualGraph,
    nodes: &[u32],
    rng: &mut impl Rng,
) -> Result<SpanningTree> {
    let mut local_nodes: Vec<u32> = nodes.to_vec();
    local_nodes.sort_unstable();
    local_nodes.dedup();
    if local_nodes.is_empty() {
        return Err(Error::DisconnectedSubset);
    }
    let mut local_of = vec![usize::MAX; graph.len()];
    for (i, &node) in local_nodes.iter().enumerate() {
        local_of[node as usize] = i;
    }

    // Induced edges in graph edge-list order so the weight stream is stable.
    let mut induced: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in graph.edges() {
        let (la, lb) = (local_of[a as usize], local_of[b as usize]);
        if la != usize::MAX && lb != usize::MAX {
            induced.push((la, lb));
        }
    }
    let mut weighted: Vec<(f64, usize)> = induced
        .iter()
        .enumerate()
        .map(|(idx, _)| (rng.gen::<f64>(), idx))
        .collect();
    weighted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("weights are finite"));

    let n = local_nodes.len();
    let mut dsu = DisjointSets::new(n);
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut chosen = 0usize;
    for &(_, idx) in &weighted {
        let (a, b) = induced[idx];
        if dsu.union(a, b) {
            adjacency[a].push(b);
            adjacency[b].push(a);
            chosen += 1;
            if chosen == n - 1 {
                break;
            }
        }
    }
    if chosen != n - 1 {
        return Err(Error::DisconnectedSubset);
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }

    let mut parent = vec![usize::MAX; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    parent[0] = 0;
    let mut stack = vec![0usize];
    while let Some(v) = stack.pop() {
        order.push(v);
        for &next in &adjacency[v] {
            if parent[next] == usize::MAX {
                parent[next] = v;
                children[v].push(next);
                stack.push(next);
            }
        }
    }
    debug_assert_eq!(order.len(), n);

    let mut subtree_pop: Vec<u64> = local_nodes
        .iter()
        .map(|&node| graph.precinct(node).population)
        .collect();
    for &v in order.iter().rev() {
        if parent[v] != v {
            subtree_pop[parent[v]] += subtree_pop[v];
        }
    }
    let total_pop = subtree_pop[0];
    Ok(SpanningTree {
        nodes: local_nodes,
        parent,
        children,
        subtree_pop,
        total_pop,
    })
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            false
        } else {
            self.parent[ra] = rb;
            true
        }
    }
}

/// The winning tree cut: removing the edge above `child` splits the cluster
/// into the child's subtree and the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeCut {
    /// Graph index of the parent endpoint.
    pub parent: u32,
    /// Graph index of the child endpoint; its subtree is one side.
    pub child: u32,
    /// Local index of `child` in the tree's node list.
    pub child_local: usize,
    /// Absolute population difference of the two sides.
    pub gap: u64,
}

/// Evaluates every tree edge and returns the cut minimizing the population
/// gap between the two sides. Ties break to the smaller
/// (parent id, child id) pair.
pub fn best_cut(tree: &SpanningTree, graph: &DualGraph) -> Result<TreeCut> {
    if tree.len() < 2 {
        return Err(Error::SingleNodeTree);
    }
    let total = tree.total_pop;
    let mut best: Option<TreeCut> = None;
    for v in 0..tree.len() {
        if tree.parent[v] == v {
            continue;
        }
        let side = tree.subtree_pop[v];
        let gap = side.abs_diff(total - side);
        let candidate = TreeCut {
            parent: tree.nodes[tree.parent[v]],
            child: tree.nodes[v],
            child_local: v,
            gap,
        };
        let better = match &best {
            None => true,
            Some(cur) => {
                gap < cur.gap
                    || (gap == cur.gap && {
                        let cand_pair = (
                            &graph.precinct(candidate.parent).id,
                            &graph.precinct(candidate.child).id,
                        );
                        let cur_pair = (
                            &graph.precinct(cur.parent).id,
                            &graph.precinct(cur.child).id,
                        );
                        cand_pair < cur_pair
                    })
            }
        };
        if better {
            best = Some(candidate);
        }
    }
    Ok(best.expect("tree with >= 2 nodes has an edge"))
}

/// One recombination step: pick a uniformly random adjacent district pair,
/// merge them, and re-split along the best cut over `trees_per_step` random
/// spanning trees. The pair's labels are reused; the lower label goes to the
/// side containing the lexicographically smallest precinct id.
pub fn recom_step(
    graph: &DualGraph,
    plan: &Plan,
    cfg: &ChainConfig,
    rng: &mut impl Rng,
) -> Result<Plan> {
    if cfg.trees_per_step == 0 {
        return Err(Error::InvalidConfig {
            reason: "trees_per_step must be positive".into(),
        });
    }
    let mut pairs: BTreeSet<(u32, u32)> = BTreeSet::new();
    for &(a, b) in graph.edges() {
        let (da, db) = (plan.assignment[a as usize], plan.assignment[b as usize]);
        if da != db {
            pairs.insert((da.min(db), da.max(db)));
        }
    }
    if pairs.is_empty() {
        return Err(Error::NoAdjacentDistricts);
    }
    let pairs: Vec<(u32, u32)> = pairs.into_iter().collect();
    let (low, high) = pairs[rng.gen_range(0..pairs.len())];

    let merged: Vec<u32> = plan
        .assignment
        .iter()
        .enumerate()
        .filter(|&(_, &d)| d == low || d == high)
        .map(|(i, _)| i as u32)
        .collect();

    let mut winner: Option<(SpanningTree, TreeCut)> = None;
    for _ in 0..cfg.trees_per_step {
        let tree = random_spanning_tree(graph, &merged, rng)?;
        let cut = best_cut(&tree, graph)?;
        let replace = winner.as_ref().is_none_or(|(_, best)| cut.gap < best.gap);
        if replace {
            winner = Some((tree, cut));
        }
    }
    let (tree, cut) = winner.expect("trees_per_step >= 1");

    let mut in_subtree = vec![false; graph.len()];
    for node in tree.subtree_members(cut.child_local) {
        in_subtree[node as usize] = true;
    }
    let smallest = merged
        .iter()
        .min_by_key(|&&node| &graph.precinct(node).id)
        .expect("merged cluster is nonempty");
    let subtree_gets_low = in_subtree[*smallest as usize];

    let mut next = plan.clone();
    for &node in &merged {
        let side = in_subtree[node as usize];
        next.assignment[node as usize] = if side == subtree_gets_low { low } else { high };
    }
    debug_assert!(validate_plan(graph, &next).is_empty());
    Ok(next)
}

/// Applies `cfg.steps` recombination steps from `start`. Fully determined by
/// the inputs and `cfg.rng_seed`.
pub fn run_chain(graph: &DualGraph, start: Plan, cfg: &ChainConfig) -> Result<Plan> {
    let violations = validate_plan(graph, &start);
    if !violations.is_empty() {
        return Err(Error::InvalidPlan { violations });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut plan = start;
    for _ in 0..cfg.steps {
        plan = recom_step(graph, &plan, cfg, &mut rng)?;
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Precinct;
    use crate::plan::population_deviation;
    use crate::synth::{grid_state, GridSpec, PopulationPattern};
    use std::collections::HashMap;

    fn path4(pops: [u64; 4]) -> DualGraph {
        let precincts = ["a", "b", "c", "d"]
            .iter()
            .zip(pops)
            .map(|(id, population)| Precinct {
                id: id.to_string(),
                area: 1.0,
                population,
            })
            .collect();
        let edges = [("a", "b"), ("b", "c"), ("c", "d")]
            .map(|(a, b)| (a.to_string(), b.to_string()));
        DualGraph::new(precincts, &edges).unwrap()
    }

    fn star4(center_pop: u64) -> DualGraph {
        let pops = [center_pop, 1, 1, 1];
        let precincts = ["s0", "s1", "s2", "s3"]
            .iter()
            .zip(pops)
            .map(|(id, population)| Precinct {
                id: id.to_string(),
                area: 1.0,
                population,
            })
            .collect();
        let edges = [("s0", "s1"), ("s0", "s2"), ("s0", "s3")]
            .map(|(a, b)| (a.to_string(), b.to_string()));
        DualGraph::new(precincts, &edges).unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn seed_single_district() {
        let g = path4([1; 4]);
        let p = seed_plan(&g, 1).unwrap();
        assert_eq!(p.assignment, vec![0, 0, 0, 0]);
    }

    #[test]
    fn seed_all_singletons() {
        let g = path4([1; 4]);
        let p = seed_plan(&g, 4).unwrap();
        assert_eq!(p.assignment, vec![0, 1, 2, 3]);
    }

    #[test]
    fn seed_balanced_path_pairs() {
        // Merge trace: {0}+{1} (lowest pop, lowest id), then {2}+{3}.
        let g = path4([1; 4]);
        let p = seed_plan(&g, 2).unwrap();
        assert_eq!(p.assignment, vec![0, 0, 1, 1]);
    }

    #[test]
    fn seed_rejects_too_many_districts() {
        let g = path4([1; 4]);
        assert!(matches!(
            seed_plan(&g, 5),
            Err(Error::TooManyDistricts { .. })
        ));
    }

    #[test]
    fn seed_plans_are_always_valid() {
        let g = grid_state(&GridSpec {
            rows: 6,
            cols: 6,
            population: PopulationPattern::Uniform { per_cell: 10 },
        })
        .unwrap();
        for m in 1..=8 {
            let p = seed_plan(&g, m).unwrap();
            assert!(validate_plan(&g, &p).is_empty(), "m = {m}");
            assert_eq!(p.num_districts, m);
        }
    }

    #[test]
    fn two_node_tree_is_the_single_edge() {
        let g = path4([1; 4]);
        let t = random_spanning_tree(&g, &[1, 2], &mut rng(1)).unwrap();
        assert_eq!(t.nodes(), &[1, 2]);
        assert_eq!(t.edges(), vec![(1, 2)]);
    }

    #[test]
    fn path_subgraph_tree_is_the_path() {
        let g = path4([1; 4]);
        let t = random_spanning_tree(&g, &[0, 1, 2, 3], &mut rng(2)).unwrap();
        let mut edges = t.edges();
        edges.sort_unstable();
        assert_eq!(edges, vec![(0, 1), (1, 2), (2, 3)]);
        assert_eq!(t.total_pop(), 4);
    }

    #[test]
    fn disconnected_subset_is_rejected() {
        let g = path4([1; 4]);
        assert!(matches!(
            random_spanning_tree(&g, &[0, 3], &mut rng(3)),
            Err(Error::DisconnectedSubset)
        ));
    }

    #[test]
    fn triangle_trees_are_near_uniform() {
        let precincts = ["a", "b", "c"]
            .map(|id| Precinct {
                id: id.to_string(),
                area: 1.0,
                population: 1,
            })
            .to_vec();
        let edges = [("a", "b"), ("b", "c"), ("a", "c")]
            .map(|(a, b)| (a.to_string(), b.to_string()));
        let g = DualGraph::new(precincts, &edges).unwrap();
        let mut counts: HashMap<Vec<(u32, u32)>, u32> = HashMap::new();
        let mut r = rng(7);
        let draws = 3000;
        for _ in 0..draws {
            let t = random_spanning_tree(&g, &[0, 1, 2], &mut r).unwrap();
            let mut edges = t.edges();
            edges.sort_unstable();
            *counts.entry(edges).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 3);
        for (_, count) in counts {
            let freq = count as f64 / draws as f64;
            assert!((freq - 1.0 / 3.0).abs() <= 0.03, "freq = {freq}");
        }
    }

    #[test]
    fn best_cut_prefers_the_middle_of_a_uniform_path() {
        let g = path4([1; 4]);
        let t = random_spanning_tree(&g, &[0, 1, 2, 3], &mut rng(4)).unwrap();
        let cut = best_cut(&t, &g).unwrap();
        assert_eq!(cut.gap, 0);
        assert_eq!((cut.parent, cut.child), (1, 2));
    }

    #[test]
    fn best_cut_balances_a_skewed_path() {
        // Cut gaps along the path: 0 (after node 0), 2, 4.
        let g = path4([3, 1, 1, 1]);
        let t = random_spanning_tree(&g, &[0, 1, 2, 3], &mut rng(5)).unwrap();
        let cut = best_cut(&t, &g).unwrap();
        assert_eq!(cut.gap, 0);
        assert_eq!((cut.parent, cut.child), (0, 1));
    }

    #[test]
    fn best_cut_tie_breaks_by_id_pair_on_a_star() {
        // Every cut splits 1 vs 7; the (s0, s1) edge wins the tie.
        let g = star4(5);
        let t = random_spanning_tree(&g, &[0, 1, 2, 3], &mut rng(6)).unwrap();
        let cut = best_cut(&t, &g).unwrap();
        assert_eq!(cut.gap, 6);
        assert_eq!((cut.parent, cut.child), (0, 1));
    }

    #[test]
    fn best_cut_rejects_single_node() {
        let g = path4([1; 4]);
        let t = random_spanning_tree(&g, &[2], &mut rng(8)).unwrap();
        assert!(matches!(best_cut(&t, &g), Err(Error::SingleNodeTree)));
    }

    #[test]
    fn recom_step_rebalances_the_path() {
        // Start {a,b}/{c,d} with pops 4/2; the only spanning tree is the path
        // and its best cut splits {a} (pop 3) from {b,c,d} (pop 3).
        let g = path4([3, 1, 1, 1]);
        let p = Plan::from_assignment(&g, vec![0, 0, 1, 1]).unwrap();
        let cfg = ChainConfig::new(1, 0);
        let next = recom_step(&g, &p, &cfg, &mut rng(9)).unwrap();
        assert_eq!(next.assignment, vec![0, 1, 1, 1]);
        assert_eq!(population_deviation(&g, &next).unwrap(), 0.0);
    }

    #[test]
    fn recom_step_touches_only_the_merged_pair() {
        let g = grid_state(&GridSpec {
            rows: 4,
            cols: 4,
            population: PopulationPattern::Uniform { per_cell: 1 },
        })
        .unwrap();
        let start = seed_plan(&g, 4).unwrap();
        let cfg = ChainConfig::new(1, 0);
        let mut r = rng(11);
        for _ in 0..20 {
            let next = recom_step(&g, &start, &cfg, &mut r).unwrap();
            assert_eq!(next.num_districts, start.num_districts);
            assert!(validate_plan(&g, &next).is_empty());
            let changed: BTreeSet<u32> = start
                .assignment
                .iter()
                .zip(&next.assignment)
                .flat_map(|(&a, &b)| if a != b { vec![a, b] } else { vec![] })
                .collect();
            assert!(changed.len() <= 2, "changed labels: {changed:?}");
        }
    }

    #[test]
    fn chain_zero_steps_is_identity() {
        let g = path4([1; 4]);
        let p = seed_plan(&g, 2).unwrap();
        let out = run_chain(&g, p.clone(), &ChainConfig::new(0, 42)).unwrap();
        assert_eq!(out, p);
    }

    #[test]
    fn chain_is_deterministic() {
        let g = grid_state(&GridSpec {
            rows: 5,
            cols: 5,
            population: PopulationPattern::Uniform { per_cell: 3 },
        })
        .unwrap();
        let start = seed_plan(&g, 3).unwrap();
        let cfg = ChainConfig::new(40, 1234);
        let a = run_chain(&g, start.clone(), &cfg).unwrap();
        let b = run_chain(&g, start, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn chain_rejects_invalid_start() {
        let g = path4([1; 4]);
        let bad = Plan {
            assignment: vec![0, 1, 0, 1],
            num_districts: 2,
        };
        assert!(matches!(
            run_chain(&g, bad, &ChainConfig::new(1, 0)),
            Err(Error::InvalidPlan { .. })
        ));
    }

    #[test]
    fn chains_tend_to_reduce_deviation() {
        let g = grid_state(&GridSpec {
            rows: 6,
            cols: 6,
            population: PopulationPattern::Uniform { per_cell: 1 },
        })
        .unwrap();
        let start = seed_plan(&g, 3).unwrap();
        let start_dev = population_deviation(&g, &start).unwrap();
        let runs = 50;
        let mut improved = 0;
        for seed in 0..runs {
            let cfg = ChainConfig::new(150, seed);
            let out = run_chain(&g, start.clone(), &cfg).unwrap();
            if population_deviation(&g, &out).unwrap() <= start_dev {
                improved += 1;
            }
        }
        assert!(
            improved * 10 >= runs * 9,
            "only {improved}/{runs} runs improved on {start_dev}"
        );
    }
}
