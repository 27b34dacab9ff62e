//! Plan-to-plan similarity: district intersection weights, maximum-weight
//! assignment between district labels, and the normalized score.
//!
//! The score between two plans is the largest fraction of the state's weight
//! (area or population) that can stay in the same-numbered district under the
//! best relabeling, which makes it invariant to how either plan happens to
//! number its districts.

use crate::error::{Error, Result};
use crate::graph::{DualGraph, WeightKind};
use crate::plan::{require_structurally_valid, Plan};

/// Shared weight between every district pair of two plans.
///
/// Entry `(i, j)` is the total weight of precincts assigned to district `i`
/// by the first plan and district `j` by the second. Rows never outnumber
/// columns; callers orient the smaller plan first.
#[derive(Debug, Clone)]
pub struct IntersectionMatrix {
    weights: Vec<f64>,
    rows: usize,
    cols: usize,
    kind: WeightKind,
    total: f64,
}

impl IntersectionMatrix {
    /// Wraps a row-major weight matrix. `total` is the whole-state weight the
    /// score divides by.
    pub fn new(
        rows: usize,
        cols: usize,
        weights: Vec<f64>,
        kind: WeightKind,
        total: f64,
    ) -> Result<Self> {
        if rows > cols {
            return Err(Error::MatrixOrientation { rows, cols });
        }
        assert_eq!(weights.len(), rows * cols, "weight buffer shape mismatch");
        if total.is_nan() || total <= 0.0 {
            return Err(Error::NonPositiveTotal { total });
        }
        Ok(IntersectionMatrix {
            weights,
            rows,
            cols,
            kind,
            total,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], kind: WeightKind, total: f64) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        let mut weights = Vec::with_capacity(n * k);
        for row in rows {
            assert_eq!(row.len(), k, "ragged rows");
            weights.extend_from_slice(row);
        }
        Self::new(n, k, weights, kind, total)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.cols + col]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j)).sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j)).sum())
            .collect()
    }
}

/// Injective map from row districts to column districts and the weight it
/// keeps in place.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `mapping[i]` is the column matched to row `i`.
    pub mapping: Vec<u32>,
    /// Sum of the matched matrix entries.
    pub matched_weight: f64,
}

/// Similarity value in `[0, 1]` for one weight kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityScore {
    pub value: f64,
    pub kind: WeightKind,
}

/// Builds the intersection matrix in one pass over the precincts.
///
/// Both plans must cover the graph; `p1` must not have more districts than
/// `p2` (swap the arguments otherwise).
pub fn intersection_matrix(
    graph: &DualGraph,
    p1: &Plan,
    p2: &Plan,
    kind: WeightKind,
) -> Result<IntersectionMatrix> {
    let mut out = intersection_matrices(graph, p1, p2, &[kind])?;
    Ok(out.pop().expect("one kind in, one matrix out"))
}

/// Builds matrices for several weight kinds in a single pass; the precinct
/// partition overlap is shared, only the added weight differs.
pub fn intersection_matrices(
    graph: &DualGraph,
    p1: &Plan,
    p2: &Plan,
    kinds: &[WeightKind],
) -> Result<Vec<IntersectionMatrix>> {
    require_structurally_valid(graph, p1)?;
    require_structurally_valid(graph, p2)?;
    let n = p1.num_districts as usize;
    let k = p2.num_districts as usize;
    if n > k {
        return Err(Error::MatrixOrientation { rows: n, cols: k });
    }
    let mut buffers = vec![vec![0.0_f64; n * k]; kinds.len()];
    for (idx, (&a, &b)) in p1.assignment.iter().zip(&p2.assignment).enumerate() {
        let cell = a as usize * k + b as usize;
        let precinct = graph.precinct(idx as u32);
        for (buf, &kind) in buffers.iter_mut().zip(kinds) {
            buf[cell] += kind.weight_of(precinct);
        }
    }
    buffers
        .into_iter()
        .zip(kinds)
        .map(|(weights, &kind)| {
            IntersectionMatrix::new(n, k, weights, kind, graph.total_weight(kind))
        })
        .collect()
}

/// Exact maximum-weight assignment of rows to columns.
///
/// Runs shortest-augmenting-path search with potentials in `O(rows^2 * cols)`
/// and then canonicalizes ties so that among equal-weight optima the returned
/// mapping vector is lexicographically smallest.
pub fn solve_assignment(mtx: &IntersectionMatrix) -> Result<Assignment> {
    let (n, k) = (mtx.rows, mtx.cols);
    for i in 0..n {
        for j in 0..k {
            let w = mtx.get(i, j);
            if !w.is_finite() {
                return Err(Error::NonFiniteWeight { row: i, col: j });
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight { row: i, col: j });
            }
        }
    }
    let (row_to_col, v) = augmenting_path_max(n, k, &mtx.weights);
    let mapping = lexmin_optimal(n, k, &mtx.weights, &row_to_col, &v);
    let matched_weight = mapping
        .iter()
        .enumerate()
        .fold(0.0, |sum, (i, &j)| sum + mtx.get(i, j as usize));
    Ok(Assignment {
        mapping,
        matched_weight,
    })
}

/// Shortest-augmenting-path assignment on the maximization problem, solved as
/// a minimization over negated weights. Returns the matched column per row
/// plus the column potentials of the minimization form.
fn augmenting_path_max(n: usize, k: usize, w: &[f64]) -> (Vec<u32>, Vec<f64>) {
    debug_assert!(n <= k && n > 0);
    let cost = |i: usize, j: usize| -w[i * k + j];
    // Index k doubles as the virtual start column of each phase.
    let mut u = vec![0.0_f64; n];
    let mut v = vec![0.0_f64; k + 1];
    let mut col_row = vec![usize::MAX; k + 1];
    for i in 0..n {
        col_row[k] = i;
        let mut j_cur = k;
        let mut min_to = vec![f64::INFINITY; k + 1];
        let mut prev = vec![k; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j_cur] = true;
            let row = col_row[j_cur];
            let mut delta = f64::INFINITY;
            let mut j_next = usize::MAX;
            for j in 0..k {
                if used[j] {
                    continue;
                }
                let reduced = cost(row, j) - u[row] - v[j];
                if reduced < min_to[j] {
                    min_to[j] = reduced;
                    prev[j] = j_cur;
                }
                if min_to[j] < delta {
                    delta = min_to[j];
                    j_next = j;
                }
            }
            debug_assert!(j_next != usize::MAX, "free column always reachable");
            for j in 0..=k {
                if used[j] {
                    if col_row[j] != usize::MAX {
                        u[col_row[j]] += delta;
                    }
                    v[j] -= delta;
                } else {
                    min_to[j] -= delta;
                }
            }
            j_cur = j_next;
            if col_row[j_cur] == usize::MAX {
                break;
            }
        }
        // Flip the alternating path back to the virtual column.
        loop {
            let j_prev = prev[j_cur];
            col_row[j_cur] = col_row[j_prev];
            j_cur = j_prev;
            if j_cur == k {
                break;
            }
        }
    }
    let mut row_to_col = vec![u32::MAX; n];
    for j in 0..k {
        if col_row[j] != usize::MAX {
            row_to_col[col_row[j]] = j as u32;
        }
    }
    v.truncate(k);
    (row_to_col, v)
}

/// Among the optima certified by the solver's potentials, picks the mapping
/// whose column vector is lexicographically smallest.
///
/// Works on the square problem padded with zero-weight dummy rows: with
/// optimal potentials, the optimal assignments are exactly the perfect
/// matchings of the tight-edge graph, so each row in order gets the smallest
/// tight column that still leaves the remaining rows a perfect matching.
fn lexmin_optimal(n: usize, k: usize, w: &[f64], row_to_col: &[u32], v: &[f64]) -> Vec<u32> {
    let cost = |i: usize, j: usize| -w[i * k + j];
    // Force exact tightness on the matched edges.
    let u: Vec<f64> = (0..n)
        .map(|i| cost(i, row_to_col[i] as usize) - v[row_to_col[i] as usize])
        .collect();
    // Dummy rows n..k carry zero weight; their tight columns are those with
    // zero potential, which includes every column the solver left unmatched.
    let is_tight = |row: usize, j: usize| -> bool {
        if row < n {
            cost(row, j) == u[row] + v[j]
        } else {
            v[j] == 0.0
        }
    };

    let mut row_col: Vec<usize> = row_to_col.iter().map(|&c| c as usize).collect();
    let mut col_of = vec![usize::MAX; k];
    for (i, &c) in row_col.iter().enumerate() {
        col_of[c] = i;
    }
    for (j, slot) in col_of.iter_mut().enumerate() {
        if *slot == usize::MAX {
            row_col.push(j);
            *slot = row_col.len() - 1;
        }
    }
    debug_assert_eq!(row_col.len(), k);

    let mut frozen = vec![false; k];
    for i in 0..n {
        let cur = row_col[i];
        for c in 0..cur {
            if !is_tight(i, c) {
                continue;
            }
            let displaced = col_of[c];
            if frozen[displaced] {
                continue;
            }
            if rewire(i, c, &mut row_col, &mut col_of, &frozen, &is_tight, k) {
                break;
            }
        }
        frozen[i] = true;
    }
    row_col.truncate(n);
    row_col.iter().map(|&c| c as u32).collect()
}

/// Tries to produce a perfect tight matching containing `(row, col)` without
/// moving frozen rows, by rerouting the row currently on `col` to the column
/// `row` frees up. Mutates the matching only on success.
fn rewire(
    row: usize,
    col: usize,
    row_col: &mut [usize],
    col_of: &mut [usize],
    frozen: &[bool],
    is_tight: &dyn Fn(usize, usize) -> bool,
    k: usize,
) -> bool {
    let displaced = col_of[col];
    let freed = row_col[row];
    let mut visited_row = vec![false; k];
    let mut reached_via = vec![usize::MAX; k];
    visited_row[row] = true;
    visited_row[displaced] = true;
    let mut queue = std::collections::VecDeque::from([displaced]);
    let mut found = false;
    'search: while let Some(x) = queue.pop_front() {
        for j in 0..k {
            if j == col || reached_via[j] != usize::MAX || !is_tight(x, j) {
                continue;
            }
            reached_via[j] = x;
            if j == freed {
                found = true;
                break 'search;
            }
            let y = col_of[j];
            if !frozen[y] && !visited_row[y] {
                visited_row[y] = true;
                queue.push_back(y);
            }
        }
    }
    if !found {
        return false;
    }
    let mut j = freed;
    loop {
        let x = reached_via[j];
        let next = row_col[x];
        row_col[x] = j;
        col_of[j] = x;
        if x == displaced {
            break;
        }
        j = next;
    }
    row_col[row] = col;
    col_of[col] = row;
    true
}

/// Exhaustive assignment maximum; the independent oracle for
/// [`solve_assignment`]. Limited to 9 columns.
pub fn brute_force_assignment(mtx: &IntersectionMatrix) -> Result<Assignment> {
    const LIMIT: usize = 9;
    let (n, k) = (mtx.rows, mtx.cols);
    if k > LIMIT {
        return Err(Error::BruteForceTooLarge {
            cols: k,
            limit: LIMIT,
        });
    }
    let mut best_mapping: Option<Vec<u32>> = None;
    let mut best_weight = f64::NEG_INFINITY;
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; k];
    // Columns are tried in ascending order, so mappings are generated in
    // lexicographic order and the first maximum seen is the canonical one.
    fn descend(
        mtx: &IntersectionMatrix,
        row: usize,
        sum: f64,
        current: &mut Vec<u32>,
        used: &mut [bool],
        best_mapping: &mut Option<Vec<u32>>,
        best_weight: &mut f64,
    ) {
        if row == mtx.rows() {
            if *best_weight < sum || best_mapping.is_none() {
                *best_weight = sum;
                *best_mapping = Some(current.clone());
            }
            return;
        }
        for col in 0..mtx.cols() {
            if used[col] {
                continue;
            }
            used[col] = true;
            current.push(col as u32);
            descend(
                mtx,
                row + 1,
                sum + mtx.get(row, col),
                current,
                used,
                best_mapping,
                best_weight,
            );
            current.pop();
            used[col] = false;
        }
    }
    descend(
        mtx,
        0,
        0.0,
        &mut current,
        &mut used,
        &mut best_mapping,
        &mut best_weight,
    );
    let mapping = best_mapping.expect("n >= 1 guarantees at least one mapping");
    Ok(Assignment {
        mapping,
        matched_weight: best_weight,
    })
}

/// Normalized similarity between two plans: best matched intersection weight
/// over the state total. Symmetric and relabeling-invariant.
pub fn similarity_score(
    graph: &DualGraph,
    p1: &Plan,
    p2: &Plan,
    kind: WeightKind,
) -> Result<SimilarityScore> {
    let mut out = similarity_scores(graph, p1, p2, &[kind])?;
    Ok(out.pop().expect("one kind in, one score out"))
}

/// Scores for several weight kinds sharing one pass over the precincts.
pub fn similarity_scores(
    graph: &DualGraph,
    p1: &Plan,
    p2: &Plan,
    kinds: &[WeightKind],
) -> Result<Vec<SimilarityScore>> {
    let (a, b) = if p1.num_districts <= p2.num_districts {
        (p1, p2)
    } else {
        (p2, p1)
    };
    let matrices = intersection_matrices(graph, a, b, kinds)?;
    matrices
        .iter()
        .map(|mtx| {
            let assignment = solve_assignment(mtx)?;
            // Matched weight can drift past the cached total by rounding; the
            // score is a fraction by definition.
            let value = (assignment.matched_weight / mtx.total).clamp(0.0, 1.0);
            Ok(SimilarityScore {
                value,
                kind: mtx.kind,
            })
        })
        .collect()
}

/// Renumbers `p2`'s districts to the matched labels of the reference plan the
/// assignment was solved against. District `j` takes label `i` where
/// `mapping[i] == j`; districts left unmatched take fresh labels
/// `n, n + 1, ...` in ascending order of their old index. Membership is
/// untouched.
pub fn relabel_plan(p2: &Plan, assignment: &Assignment) -> Result<Plan> {
    let n = assignment.mapping.len();
    let k = p2.num_districts as usize;
    if n > k {
        return Err(Error::AssignmentShapeMismatch {
            rows: n,
            expected: k,
        });
    }
    let mut new_label = vec![u32::MAX; k];
    for (i, &j) in assignment.mapping.iter().enumerate() {
        if j as usize >= k || new_label[j as usize] != u32::MAX {
            return Err(Error::AssignmentShapeMismatch {
                rows: n,
                expected: k,
            });
        }
        new_label[j as usize] = i as u32;
    }
    let mut fresh = n as u32;
    for label in new_label.iter_mut() {
        if *label == u32::MAX {
            *label = fresh;
            fresh += 1;
        }
    }
    let assignment = p2
        .assignment
        .iter()
        .map(|&d| {
            if d == Plan::UNASSIGNED {
                d
            } else {
                new_label[d as usize]
            }
        })
        .collect();
    Ok(Plan {
        assignment,
        num_districts: p2.num_districts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Precinct;
    use crate::synth::{grid_state, GridSpec, PopulationPattern};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mtx(rows: &[Vec<f64>]) -> IntersectionMatrix {
        let total: f64 = rows.iter().flatten().sum();
        IntersectionMatrix::from_rows(rows, WeightKind::Area, total.max(1.0)).unwrap()
    }

    fn grid2x2() -> DualGraph {
        grid_state(&GridSpec {
            rows: 2,
            cols: 2,
            population: PopulationPattern::Uniform { per_cell: 1 },
        })
        .unwrap()
    }

    fn horizontal(g: &DualGraph) -> Plan {
        Plan::from_assignment(g, vec![0, 0, 1, 1]).unwrap()
    }

    fn vertical(g: &DualGraph) -> Plan {
        Plan::from_assignment(g, vec![0, 1, 0, 1]).unwrap()
    }

    #[test]
    fn identity_matrix_is_diagonal() {
        let g = grid2x2();
        let p = horizontal(&g);
        let m = intersection_matrix(&g, &p, &p, WeightKind::Area).unwrap();
        assert_eq!(m.get(0, 0), 2.0);
        assert_eq!(m.get(1, 1), 2.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.get(1, 0), 0.0);
    }

    #[test]
    fn crossed_splits_spread_evenly() {
        let g = grid2x2();
        let m = intersection_matrix(&g, &horizontal(&g), &vertical(&g), WeightKind::Area).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(m.get(i, j), 1.0);
            }
        }
    }

    #[test]
    fn population_matrix_with_hotspot_cell() {
        // Cell (0,0) holds population 10, the rest 1 each. Brute-force over
        // the four cells: top row vs left column share only cell (0,0).
        let g = grid_state(&GridSpec {
            rows: 2,
            cols: 2,
            population: PopulationPattern::Uniform { per_cell: 1 },
        })
        .unwrap();
        let precincts: Vec<Precinct> = g
            .precincts()
            .iter()
            .cloned()
            .map(|mut p| {
                if p.id == "0-0" {
                    p.population = 10;
                }
                p
            })
            .collect();
        let edges: Vec<(String, String)> = g
            .edges()
            .iter()
            .map(|&(a, b)| {
                (
                    g.precinct(a).id.clone(),
                    g.precinct(b).id.clone(),
                )
            })
            .collect();
        let g = DualGraph::new(precincts, &edges).unwrap();
        let m =
            intersection_matrix(&g, &horizontal(&g), &vertical(&g), WeightKind::Population)
                .unwrap();
        assert_eq!(m.get(0, 0), 10.0);
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(1, 0), 1.0);
        assert_eq!(m.get(1, 1), 1.0);
        assert_eq!(m.row_sums(), vec![11.0, 2.0]);
        assert_eq!(m.col_sums(), vec![11.0, 2.0]);
    }

    #[test]
    fn row_and_col_sums_match_district_weights() {
        let g = grid2x2();
        let (p1, p2) = (horizontal(&g), vertical(&g));
        let m = intersection_matrix(&g, &p1, &p2, WeightKind::Area).unwrap();
        assert_eq!(
            m.row_sums(),
            crate::plan::district_weights(&g, &p1, WeightKind::Area).unwrap()
        );
        assert_eq!(
            m.col_sums(),
            crate::plan::district_weights(&g, &p2, WeightKind::Area).unwrap()
        );
    }

    #[test]
    fn all_ones_ties_break_to_identity() {
        let a = solve_assignment(&mtx(&[vec![1.0, 1.0], vec![1.0, 1.0]])).unwrap();
        assert_eq!(a.mapping, vec![0, 1]);
        assert_eq!(a.matched_weight, 2.0);
    }

    #[test]
    fn two_by_two_unique_optimum() {
        let a = solve_assignment(&mtx(&[vec![3.0, 1.0], vec![2.0, 4.0]])).unwrap();
        assert_eq!(a.mapping, vec![0, 1]);
        assert_eq!(a.matched_weight, 7.0);
    }

    #[test]
    fn single_row_picks_max() {
        let a = solve_assignment(&mtx(&[vec![5.0, 1.0, 2.0]])).unwrap();
        assert_eq!(a.mapping, vec![0]);
        assert_eq!(a.matched_weight, 5.0);
    }

    #[test]
    fn rejects_nan_and_negative() {
        assert!(matches!(
            solve_assignment(&mtx(&[vec![f64::NAN, 1.0], vec![1.0, 1.0]])),
            Err(Error::NonFiniteWeight { row: 0, col: 0 })
        ));
        assert!(matches!(
            solve_assignment(&mtx(&[vec![0.0, 1.0], vec![-2.0, 1.0]])),
            Err(Error::NegativeWeight { row: 1, col: 0 })
        ));
    }

    #[test]
    fn brute_force_examples() {
        let a = brute_force_assignment(&mtx(&[vec![3.0, 1.0], vec![2.0, 4.0]])).unwrap();
        assert_eq!(a.matched_weight, 7.0);
        let a = brute_force_assignment(&mtx(&[vec![42.0]])).unwrap();
        assert_eq!(a.matched_weight, 42.0);
        let zeros = mtx(&[vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]]);
        let a = brute_force_assignment(&zeros).unwrap();
        assert_eq!(a.matched_weight, 0.0);
        assert_eq!(a.mapping, vec![0, 1, 2]);
    }

    #[test]
    fn brute_force_rejects_large() {
        let wide = IntersectionMatrix::new(1, 10, vec![0.0; 10], WeightKind::Area, 1.0).unwrap();
        assert!(matches!(
            brute_force_assignment(&wide),
            Err(Error::BruteForceTooLarge { .. })
        ));
    }

    #[test]
    fn random_six_by_six_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let rows: Vec<Vec<f64>> = (0..6)
                .map(|_| (0..6).map(|_| rng.gen::<f64>() * 10.0).collect())
                .collect();
            let m = mtx(&rows);
            let fast = solve_assignment(&m).unwrap();
            let slow = brute_force_assignment(&m).unwrap();
            assert_eq!(fast.matched_weight, slow.matched_weight);
            assert_eq!(fast.mapping, slow.mapping);
        }
    }

    #[test]
    fn rectangular_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let n = rng.gen_range(1..=4);
            let k = rng.gen_range(n..=7);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..k).map(|_| rng.gen::<f64>()).collect())
                .collect();
            let m = mtx(&rows);
            let fast = solve_assignment(&m).unwrap();
            let slow = brute_force_assignment(&m).unwrap();
            assert_eq!(fast.matched_weight, slow.matched_weight);
            assert_eq!(fast.mapping, slow.mapping);
        }
    }

    #[test]
    fn zero_weight_matches_are_legal() {
        // Row 1 shares nothing with any column yet must still be assigned.
        let a = solve_assignment(&mtx(&[vec![4.0, 0.0], vec![0.0, 0.0]])).unwrap();
        assert_eq!(a.mapping, vec![0, 1]);
        assert_eq!(a.matched_weight, 4.0);
    }

    #[test]
    fn self_similarity_is_one() {
        let g = grid2x2();
        let p = horizontal(&g);
        let s = similarity_score(&g, &p, &p, WeightKind::Area).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn crossed_splits_score_half() {
        let g = grid2x2();
        let s = similarity_score(&g, &horizontal(&g), &vertical(&g), WeightKind::Area).unwrap();
        assert_eq!(s.value, 0.5);
    }

    #[test]
    fn score_is_symmetric_and_orients_internally() {
        let g = grid2x2();
        let one = Plan::from_assignment(&g, vec![0, 0, 0, 0]).unwrap();
        let two = horizontal(&g);
        let ab = similarity_score(&g, &one, &two, WeightKind::Area).unwrap();
        let ba = similarity_score(&g, &two, &one, WeightKind::Area).unwrap();
        assert_eq!(ab.value, ba.value);
    }

    #[test]
    fn relabel_identity_is_noop() {
        let g = grid2x2();
        let p = horizontal(&g);
        let a = Assignment {
            mapping: vec![0, 1],
            matched_weight: 4.0,
        };
        assert_eq!(relabel_plan(&p, &a).unwrap(), p);
    }

    #[test]
    fn relabel_swap_exchanges_labels() {
        let g = grid2x2();
        let p = horizontal(&g);
        let a = Assignment {
            mapping: vec![1, 0],
            matched_weight: 0.0,
        };
        let q = relabel_plan(&p, &a).unwrap();
        assert_eq!(q.assignment, vec![1, 1, 0, 0]);
    }

    #[test]
    fn relabel_rectangular_fills_fresh_labels() {
        // n = 2, k = 3, mapping {0 -> 2, 1 -> 0}: old districts (2, 0, 1)
        // become labels (0, 1, 2).
        let p = Plan {
            assignment: vec![0, 1, 2],
            num_districts: 3,
        };
        let a = Assignment {
            mapping: vec![2, 0],
            matched_weight: 0.0,
        };
        let q = relabel_plan(&p, &a).unwrap();
        assert_eq!(q.assignment, vec![1, 2, 0]);
        assert_eq!(q.num_districts, 3);
    }

    #[test]
    fn relabel_rejects_shape_mismatch() {
        let p = Plan {
            assignment: vec![0],
            num_districts: 1,
        };
        let a = Assignment {
            mapping: vec![0, 1],
            matched_weight: 0.0,
        };
        assert!(matches!(
            relabel_plan(&p, &a),
            Err(Error::AssignmentShapeMismatch { .. })
        ));
    }

    proptest! {
        /// With small integer weights ties are common; the solver must agree
        /// with the exhaustive oracle on the full canonical mapping, not just
        /// the weight.
        #[test]
        fn lexicographic_tie_break_matches_oracle(
            n in 1usize..=4,
            k_extra in 0usize..=3,
            seed in any::<u64>(),
        ) {
            let k = n + k_extra;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..k).map(|_| rng.gen_range(0..4) as f64).collect())
                .collect();
            let m = mtx(&rows);
            let fast = solve_assignment(&m).unwrap();
            let slow = brute_force_assignment(&m).unwrap();
            prop_assert_eq!(fast.matched_weight, slow.matched_weight);
            prop_assert_eq!(fast.mapping, slow.mapping);
        }

        #[test]
        fn scores_stay_in_unit_interval(seed in any::<u64>()) {
            let g = grid2x2();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let splits = [vec![0, 0, 1, 1], vec![0, 1, 0, 1], vec![0, 0, 0, 1], vec![0, 1, 1, 1]];
            let p1 = Plan::from_assignment(&g, splits[rng.gen_range(0..splits.len())].clone()).unwrap();
            let p2 = Plan::from_assignment(&g, splits[rng.gen_range(0..splits.len())].clone()).unwrap();
            let s = similarity_score(&g, &p1, &p2, WeightKind::Area).unwrap();
            prop_assert!((0.0..=1.0).contains(&s.value));
        }
    }
}
