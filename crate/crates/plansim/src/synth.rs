//! Synthetic inputs: rook-adjacency grids, wedge circles, and the radial
//! plans whose pairwise similarity has a closed form.

use crate::error::{Error, Result};
use crate::graph::{DualGraph, Precinct};
use crate::plan::Plan;

/// How population is spread over a synthetic grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PopulationPattern {
    /// Every cell holds `per_cell` people.
    Uniform { per_cell: u64 },
    /// `round(total * fraction)` people live in the top-left `block`×`block`
    /// corner, the rest elsewhere; within each region the count is spread as
    /// evenly as integers allow (earlier cells in row-major order take the
    /// remainder).
    CornerHotspot { total: u64, fraction: f64, block: u32 },
}

/// A `rows`×`cols` unit-area grid with rook adjacency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub rows: u32,
    pub cols: u32,
    pub population: PopulationPattern,
}

/// Splits `total` across `slots` cells as evenly as integers allow; the
/// first `total % slots` cells take one extra.
fn spread(total: u64, slots: usize) -> Vec<u64> {
    let n = slots as u64;
    let base = total / n;
    let rem = (total % n) as usize;
    (0..slots)
        .map(|i| if i < rem { base + 1 } else { base })
        .collect()
}

/// Builds the grid graph described by `spec`. Cells are named `"{r}-{c}"`
/// and indexed in row-major order.
pub fn grid_state(spec: &GridSpec) -> Result<DualGraph> {
    if spec.rows == 0 || spec.cols == 0 {
        return Err(Error::InvalidGridSpec {
            reason: "rows and cols must be positive".into(),
        });
    }
    let (rows, cols) = (spec.rows as usize, spec.cols as usize);
    let n = rows * cols;

    let populations: Vec<u64> = match spec.population {
        PopulationPattern::Uniform { per_cell } => vec![per_cell; n],
        PopulationPattern::CornerHotspot {
            total,
            fraction,
            block,
        } => {
            if !(0.0..=1.0).contains(&fraction) {
                return Err(Error::InvalidGridSpec {
                    reason: format!("hotspot fraction {fraction} is outside [0, 1]"),
                });
            }
            if block == 0 || block > spec.rows.min(spec.cols) {
                return Err(Error::InvalidGridSpec {
                    reason: format!(
                        "hotspot block {block} does not fit a {}x{} grid",
                        spec.rows, spec.cols
                    ),
                });
            }
            let block = block as usize;
            let corner_cells = block * block;
            let rest_cells = n - corner_cells;
            let corner_total = (total as f64 * fraction).round() as u64;
            let rest_total = total - corner_total;
            if rest_cells == 0 && rest_total > 0 {
                return Err(Error::InvalidGridSpec {
                    reason: "hotspot block covers the whole grid but fraction < 1".into(),
                });
            }
            let corner = spread(corner_total, corner_cells);
            let rest = if rest_cells == 0 {
                Vec::new()
            } else {
                spread(rest_total, rest_cells)
            };
            let (mut ci, mut ri) = (0, 0);
            let mut out = Vec::with_capacity(n);
            for r in 0..rows {
                for c in 0..cols {
                    if r < block && c < block {
                        out.push(corner[ci]);
                        ci += 1;
                    } else {
                        out.push(rest[ri]);
                        ri += 1;
                    }
                }
            }
            out
        }
    };

    let mut precincts = Vec::with_capacity(n);
    for r in 0..rows {
        for c in 0..cols {
            precincts.push(Precinct {
                id: format!("{r}-{c}"),
                area: 1.0,
                population: populations[r * cols + c],
            });
        }
    }
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((format!("{r}-{c}"), format!("{r}-{}", c + 1)));
            }
            if r + 1 < rows {
                edges.push((format!("{r}-{c}"), format!("{}-{c}", r + 1)));
            }
        }
    }
    DualGraph::new(precincts, &edges)
}

/// A circle of `wedges` equal slices: cycle adjacency, each wedge with area
/// `1 / wedges` and population 1. Wedges are named `"w{i}"` in cycle order.
pub fn circle_state(wedges: u32) -> Result<DualGraph> {
    if wedges < 3 {
        return Err(Error::TooFewWedges { wedges });
    }
    let n = wedges as usize;
    let precincts = (0..n)
        .map(|i| Precinct {
            id: format!("w{i}"),
            area: 1.0 / wedges as f64,
            population: 1,
        })
        .collect();
    let edges: Vec<(String, String)> = (0..n)
        .map(|i| (format!("w{i}"), format!("w{}", (i + 1) % n)))
        .collect();
    DualGraph::new(precincts, &edges)
}

/// The radial plan on a `wedges`-slice circle: `districts` equal contiguous
/// arcs, district 0 starting at wedge `offset`.
pub fn radial_plan(wedges: u32, districts: u32, offset: u32) -> Result<Plan> {
    if districts == 0 {
        return Err(Error::InvalidConfig {
            reason: "districts must be positive".into(),
        });
    }
    if !wedges.is_multiple_of(districts) {
        return Err(Error::IndivisibleWedges { wedges, districts });
    }
    if offset >= wedges {
        return Err(Error::OffsetOutOfRange { wedges, offset });
    }
    let span = wedges / districts;
    let assignment = (0..wedges)
        .map(|j| ((j + wedges - offset) % wedges) / span)
        .collect();
    Ok(Plan {
        assignment,
        num_districts: districts,
    })
}
