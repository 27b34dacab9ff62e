//! Plan representation and validation against a [`DualGraph`].

use crate::error::{Error, Result};
use crate::graph::{DualGraph, WeightKind};

/// An assignment of precincts to district indices.
///
/// `assignment[i]` is the district of precinct `i` (graph index order);
/// district indices are dense `0..num_districts`. Slots may hold
/// [`Plan::UNASSIGNED`] until the plan is validated; [`validate_plan`] reports
/// such slots as coverage violations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub assignment: Vec<u32>,
    pub num_districts: u32,
}

impl Plan {
    /// Sentinel for a precinct not covered by the plan.
    pub const UNASSIGNED: u32 = u32::MAX;

    /// Wraps an assignment vector, deriving the district count from the
    /// largest assigned index. The vector must cover the whole graph.
    pub fn from_assignment(graph: &DualGraph, assignment: Vec<u32>) -> Result<Self> {
        if assignment.len() != graph.len() {
            return Err(Error::PlanGraphMismatch {
                expected: graph.len(),
                actual: assignment.len(),
            });
        }
        let num_districts = assignment
            .iter()
            .filter(|&&d| d != Self::UNASSIGNED)
            .max()
            .map_or(0, |&d| d + 1);
        Ok(Plan {
            assignment,
            num_districts,
        })
    }

    pub fn district_of(&self, precinct: u32) -> u32 {
        self.assignment[precinct as usize]
    }

    /// Precinct indices of one district, ascending.
    pub fn district_members(&self, district: u32) -> Vec<u32> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &d)| d == district)
            .map(|(i, _)| i as u32)
            .collect()
    }
}

/// A single failed plan invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A graph precinct has no district.
    MissingPrecinct { id: String },
    /// Assignment vector length does not match the graph.
    LengthMismatch { expected: usize, actual: usize },
    /// A district index outside `0..num_districts`.
    InvalidDistrict { id: String, district: u32 },
    /// A district with no precincts.
    EmptyDistrict { district: u32 },
    /// A district whose precincts form more than one connected component.
    Discontiguous { district: u32, components: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::MissingPrecinct { id } => write!(f, "precinct {id:?} has no district"),
            Violation::LengthMismatch { expected, actual } => {
                write!(f, "plan covers {actual} precincts, graph has {expected}")
            }
            Violation::InvalidDistrict { id, district } => {
                write!(f, "precinct {id:?} assigned out-of-range district {district}")
            }
            Violation::EmptyDistrict { district } => write!(f, "district {district} is empty"),
            Violation::Discontiguous {
                district,
                components,
            } => write!(
                f,
                "district {district} is discontiguous ({components} components)"
            ),
        }
    }
}

/// Checks every plan invariant against the graph; empty means valid.
pub fn validate_plan(graph: &DualGraph, plan: &Plan) -> Vec<Violation> {
    let mut violations = Vec::new();
    if plan.assignment.len() != graph.len() {
        violations.push(Violation::LengthMismatch {
            expected: graph.len(),
            actual: plan.assignment.len(),
        });
        return violations;
    }
    let m = plan.num_districts as usize;
    let mut sizes = vec![0usize; m];
    for (i, &d) in plan.assignment.iter().enumerate() {
        if d == Plan::UNASSIGNED {
            violations.push(Violation::MissingPrecinct {
                id: graph.precinct(i as u32).id.clone(),
            });
        } else if (d as usize) < m {
            sizes[d as usize] += 1;
        } else {
            violations.push(Violation::InvalidDistrict {
                id: graph.precinct(i as u32).id.clone(),
                district: d,
            });
        }
    }
    for (d, &size) in sizes.iter().enumerate() {
        if size == 0 {
            violations.push(Violation::EmptyDistrict { district: d as u32 });
        }
    }
    for (d, components) in district_component_counts(graph, plan).into_iter().enumerate() {
        if components > 1 {
            violations.push(Violation::Discontiguous {
                district: d as u32,
                components,
            });
        }
    }
    violations
}

/// Connected-component count per district (0 for empty districts).
fn district_component_counts(graph: &DualGraph, plan: &Plan) -> Vec<usize> {
    let m = plan.num_districts as usize;
    let mut counts = vec![0usize; m];
    let mut seen = vec![false; graph.len()];
    let mut stack = Vec::new();
    for start in 0..graph.len() {
        let d = plan.assignment[start];
        if seen[start] || d == Plan::UNASSIGNED || d as usize >= m {
            continue;
        }
        counts[d as usize] += 1;
        seen[start] = true;
        stack.push(start as u32);
        while let Some(node) = stack.pop() {
            for &next in graph.neighbors(node) {
                if !seen[next as usize] && plan.assignment[next as usize] == d {
                    seen[next as usize] = true;
                    stack.push(next);
                }
            }
        }
    }
    counts
}

pub(crate) fn require_structurally_valid(graph: &DualGraph, plan: &Plan) -> Result<()> {
    // Cheap subset of validate_plan; contiguity is the caller's precondition.
    if plan.assignment.len() != graph.len() {
        return Err(Error::PlanGraphMismatch {
            expected: graph.len(),
            actual: plan.assignment.len(),
        });
    }
    let m = plan.num_districts as usize;
    let mut sizes = vec![0usize; m];
    let mut violations = Vec::new();
    for (i, &d) in plan.assignment.iter().enumerate() {
        if d == Plan::UNASSIGNED {
            violations.push(Violation::MissingPrecinct {
                id: graph.precinct(i as u32).id.clone(),
            });
        } else if (d as usize) < m {
            sizes[d as usize] += 1;
        } else {
            violations.push(Violation::InvalidDistrict {
                id: graph.precinct(i as u32).id.clone(),
                district: d,
            });
        }
    }
    for (d, &size) in sizes.iter().enumerate() {
        if size == 0 {
            violations.push(Violation::EmptyDistrict { district: d as u32 });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidPlan { violations })
    }
}

/// Per-district totals of the chosen weight; entries sum to the graph total.
pub fn district_weights(graph: &DualGraph, plan: &Plan, kind: WeightKind) -> Result<Vec<f64>> {
    require_structurally_valid(graph, plan)?;
    let mut weights = vec![0.0; plan.num_districts as usize];
    for (i, &d) in plan.assignment.iter().enumerate() {
        weights[d as usize] += kind.weight_of(graph.precinct(i as u32));
    }
    Ok(weights)
}

/// Per-district integer populations.
pub fn district_populations(graph: &DualGraph, plan: &Plan) -> Result<Vec<u64>> {
    require_structurally_valid(graph, plan)?;
    let mut pops = vec![0u64; plan.num_districts as usize];
    for (i, &d) in plan.assignment.iter().enumerate() {
        pops[d as usize] += graph.precinct(i as u32).population;
    }
    Ok(pops)
}

/// Maximum relative gap between any district population and the ideal
/// (total / districts). Zero iff perfectly equal.
pub fn population_deviation(graph: &DualGraph, plan: &Plan) -> Result<f64> {
    let pops = district_populations(graph, plan)?;
    let ideal = graph.total_population() as f64 / plan.num_districts as f64;
    if ideal == 0.0 {
        return Ok(0.0);
    }
    let max_gap = pops
        .iter()
        .map(|&p| (p as f64 - ideal).abs())
        .fold(0.0_f64, f64::max);
    Ok(max_gap / ideal)
}
