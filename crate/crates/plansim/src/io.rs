//! On-disk formats: graph JSON, plan CSV, scores CSV, summary JSON, and the
//! run manifest. All parsers take raw bytes and never touch the filesystem.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ensemble::{PairScore, PairwiseScores, ScoreSummary};
use crate::error::{Error, Result};
use crate::graph::{DualGraph, Precinct, WeightKind};
use crate::plan::Plan;

/// Lowercase hex SHA-256 digest of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

// ---------------------------------------------------------------- graph JSON

#[derive(Serialize, Deserialize)]
struct GraphFile {
    nodes: Vec<GraphNode>,
    edges: Vec<(String, String)>,
}

#[derive(Serialize, Deserialize)]
struct GraphNode {
    id: String,
    area: f64,
    population: i64,
}

/// Parses a graph from node-link JSON:
/// `{"nodes": [{"id", "area", "population"}, ...], "edges": [["a", "b"], ...]}`.
pub fn parse_graph_json(bytes: &[u8]) -> Result<DualGraph> {
    let file: GraphFile = serde_json::from_slice(bytes).map_err(|e| Error::MalformedGraph {
        reason: e.to_string(),
    })?;
    let mut precincts = Vec::with_capacity(file.nodes.len());
    for node in file.nodes {
        if node.population < 0 {
            return Err(Error::NegativePopulation { id: node.id });
        }
        precincts.push(Precinct {
            id: node.id,
            area: node.area,
            population: node.population as u64,
        });
    }
    DualGraph::new(precincts, &file.edges)
}

/// Serializes a graph to the node-link JSON accepted by
/// [`parse_graph_json`]. Byte-deterministic for a given graph.
pub fn write_graph_json(graph: &DualGraph) -> String {
    let file = GraphFile {
        nodes: graph
            .precincts()
            .iter()
            .map(|p| GraphNode {
                id: p.id.clone(),
                area: p.area,
                population: p.population as i64,
            })
            .collect(),
        edges: graph
            .edges()
            .iter()
            .map(|&(a, b)| (graph.precinct(a).id.clone(), graph.precinct(b).id.clone()))
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("graph serializes");
    out.push('\n');
    out
}

// ----------------------------------------------------------------- plan CSV

/// A plan as read from CSV: raw `(precinct_id, district label)` rows, not
/// yet tied to a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPlan {
    pub rows: Vec<(String, String)>,
}

/// A plan bound to a graph, with the original district labels retained in
/// dense-index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundPlan {
    pub plan: Plan,
    /// `labels[d]` is the file's label for dense district `d`.
    pub labels: Vec<String>,
}

/// Parses `precinct_id,district` CSV rows. Labels are kept verbatim;
/// binding to a graph happens in [`bind_plan`].
pub fn parse_plan_csv(bytes: &[u8]) -> Result<LabeledPlan> {
    let malformed = |reason: String| Error::MalformedPlan { reason };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes);
    let headers = reader.headers().map_err(|e| malformed(e.to_string()))?;
    if headers != vec!["precinct_id", "district"] {
        return Err(malformed(format!(
            "expected header precinct_id,district, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| malformed(e.to_string()))?;
        if record.len() != 2 {
            return Err(malformed(format!(
                "row {} has {} fields, expected 2",
                line + 2,
                record.len()
            )));
        }
        let (id, label) = (&record[0], &record[1]);
        if id.is_empty() || label.is_empty() {
            return Err(malformed(format!("row {} has an empty field", line + 2)));
        }
        rows.push((id.to_string(), label.to_string()));
    }
    Ok(LabeledPlan { rows })
}

/// Resolves precinct ids against `graph` and densifies district labels to
/// 0-based indices in order of first appearance. Precincts the file never
/// mentions stay unassigned, which [`crate::plan::validate_plan`] reports.
pub fn bind_plan(graph: &DualGraph, labeled: &LabeledPlan) -> Result<BoundPlan> {
    let mut assignment = vec![Plan::UNASSIGNED; graph.len()];
    let mut labels: Vec<String> = Vec::new();
    for (id, label) in &labeled.rows {
        let idx = graph
            .index_of(id)
            .ok_or_else(|| Error::UnknownPrecinct { id: id.clone() })?;
        if assignment[idx as usize] != Plan::UNASSIGNED {
            return Err(Error::DuplicateAssignment { id: id.clone() });
        }
        let district = match labels.iter().position(|l| l == label) {
            Some(d) => d as u32,
            None => {
                labels.push(label.clone());
                labels.len() as u32 - 1
            }
        };
        assignment[idx as usize] = district;
    }
    let plan = Plan {
        assignment,
        num_districts: labels.len() as u32,
    };
    Ok(BoundPlan { plan, labels })
}

/// Writes a plan as `precinct_id,district` CSV in graph precinct order.
/// District cells use `labels` when given, else the dense index itself.
pub fn write_plan_csv(graph: &DualGraph, plan: &Plan, labels: Option<&[String]>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["precinct_id", "district"])
        .expect("in-memory write");
    for (idx, precinct) in graph.precincts().iter().enumerate() {
        let district = plan.assignment[idx];
        debug_assert_ne!(district, Plan::UNASSIGNED, "refusing to write a partial plan");
        let label = labels
            .and_then(|l| l.get(district as usize).cloned())
            .unwrap_or_else(|| district.to_string());
        writer
            .write_record([precinct.id.as_str(), label.as_str()])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

// --------------------------------------------------------------- scores CSV

/// Writes pairwise scores as `i,j,kind,score` CSV. When several kinds are
/// given they must cover the same `(i, j)` sequence; rows interleave kinds
/// per pair so the file stays sorted by `(i, j)`. Scores are written at full
/// round-trip precision.
pub fn write_scores_csv(scores: &[PairwiseScores]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["i", "j", "kind", "score"])
        .expect("in-memory write");
    let pairs = scores.first().map_or(0, |s| s.entries.len());
    for idx in 0..pairs {
        for kind_scores in scores {
            let e = &kind_scores.entries[idx];
            debug_assert_eq!(
                (e.i, e.j),
                (scores[0].entries[idx].i, scores[0].entries[idx].j),
                "kinds must share the pair sequence"
            );
            writer
                .write_record([
                    e.i.to_string(),
                    e.j.to_string(),
                    kind_scores.kind.to_string(),
                    e.score.to_string(),
                ])
                .expect("in-memory write");
        }
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// Parses `i,j,kind,score` CSV back into per-kind score lists. Kinds appear
/// in order of first appearance; entries are sorted by `(i, j)`.
pub fn parse_scores_csv(bytes: &[u8]) -> Result<Vec<PairwiseScores>> {
    let malformed = |reason: String| Error::MalformedScores { reason };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes);
    let headers = reader.headers().map_err(|e| malformed(e.to_string()))?;
    if headers != vec!["i", "j", "kind", "score"] {
        return Err(malformed(format!(
            "expected header i,j,kind,score, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut groups: Vec<PairwiseScores> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| malformed(e.to_string()))?;
        let row = line + 2;
        if record.len() != 4 {
            return Err(malformed(format!(
                "row {row} has {} fields, expected 4",
                record.len()
            )));
        }
        let i: u32 = record[0]
            .parse()
            .map_err(|_| malformed(format!("row {row}: bad index {:?}", &record[0])))?;
        let j: u32 = record[1]
            .parse()
            .map_err(|_| malformed(format!("row {row}: bad index {:?}", &record[1])))?;
        let kind: WeightKind = record[2]
            .parse()
            .map_err(|_| malformed(format!("row {row}: bad kind {:?}", &record[2])))?;
        let score: f64 = record[3]
            .parse()
            .map_err(|_| malformed(format!("row {row}: bad score {:?}", &record[3])))?;
        if i >= j {
            return Err(malformed(format!("row {row}: pair ({i}, {j}) is not i < j")));
        }
        if !score.is_finite() || !(0.0..=1.0).contains(&score) {
            return Err(malformed(format!(
                "row {row}: score {score} is outside [0, 1]"
            )));
        }
        let entry = PairScore { i, j, score };
        match groups.iter_mut().find(|g| g.kind == kind) {
            Some(group) => group.entries.push(entry),
            None => groups.push(PairwiseScores {
                kind,
                entries: vec![entry],
            }),
        }
    }
    for group in &mut groups {
        group.entries.sort_by_key(|e| (e.i, e.j));
    }
    Ok(groups)
}

// -------------------------------------------------------------- summary JSON

/// Serializes summaries as a JSON object keyed by weight kind.
pub fn write_summary_json(summaries: &[ScoreSummary]) -> String {
    let mut map = serde_json::Map::new();
    for summary in summaries {
        map.insert(
            summary.kind.to_string(),
            serde_json::to_value(summary).expect("summary serializes"),
        );
    }
    let mut out = serde_json::to_string_pretty(&serde_json::Value::Object(map))
        .expect("summary map serializes");
    out.push('\n');
    out
}

// ------------------------------------------------------------- run manifest

/// Everything needed to replay an ensemble run bit-for-bit, plus digests to
/// verify the replay against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub graph_sha256: String,
    pub districts: u32,
    pub num_chains: u32,
    pub steps_per_chain: u64,
    pub base_seed: u64,
    pub trees_per_step: u32,
    pub parallelism: usize,
    pub chain_seeds: Vec<u64>,
    pub plans: Vec<PlanDigest>,
    pub wall_ms: u64,
}

/// One ensemble output file and its digest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanDigest {
    pub file: String,
    pub sha256: String,
}

/// Parses and structurally validates a run manifest.
pub fn parse_manifest_json(bytes: &[u8]) -> Result<RunManifest> {
    let malformed = |reason: String| Error::MalformedManifest { reason };
    let manifest: RunManifest =
        serde_json::from_slice(bytes).map_err(|e| malformed(e.to_string()))?;
    if manifest.tool != "plansim" {
        return Err(malformed(format!(
            "manifest written by {:?}, not plansim",
            manifest.tool
        )));
    }
    if manifest.chain_seeds.len() != manifest.num_chains as usize {
        return Err(malformed(format!(
            "{} chain seeds for {} chains",
            manifest.chain_seeds.len(),
            manifest.num_chains
        )));
    }
    if manifest.plans.len() != manifest.num_chains as usize {
        return Err(malformed(format!(
            "{} plan digests for {} chains",
            manifest.plans.len(),
            manifest.num_chains
        )));
    }
    Ok(manifest)
}

/// Serializes a run manifest as pretty JSON.
pub fn write_manifest_json(manifest: &RunManifest) -> String {
    let mut out = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightKind;
    use crate::plan::validate_plan;
    use crate::synth::{grid_state, GridSpec, PopulationPattern};

    fn grid2x2() -> DualGraph {
        grid_state(&GridSpec {
            rows: 2,
            cols: 2,
            population: PopulationPattern::Uniform { per_cell: 3 },
        })
        .unwrap()
    }

    #[test]
    fn sha256_known_vectors() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn graph_json_round_trips() {
        let g = grid2x2();
        let text = write_graph_json(&g);
        let back = parse_graph_json(text.as_bytes()).unwrap();
        assert_eq!(back.precincts(), g.precincts());
        assert_eq!(back.edges(), g.edges());
        // Determinism: same graph, same bytes.
        assert_eq!(write_graph_json(&back), text);
    }

    #[test]
    fn graph_json_rejects_syntax_errors() {
        assert!(matches!(
            parse_graph_json(b"{not json"),
            Err(Error::MalformedGraph { .. })
        ));
        assert!(matches!(
            parse_graph_json(b"{\"nodes\": [], \"edges\": 3}"),
            Err(Error::MalformedGraph { .. })
        ));
    }

    #[test]
    fn graph_json_rejects_negative_population() {
        let text = r#"{"nodes": [{"id": "a", "area": 1.0, "population": -5}], "edges": []}"#;
        assert!(matches!(
            parse_graph_json(text.as_bytes()),
            Err(Error::NegativePopulation { id }) if id == "a"
        ));
    }

    #[test]
    fn graph_json_propagates_structural_validation() {
        let text = r#"{
            "nodes": [
                {"id": "a", "area": 1.0, "population": 1},
                {"id": "b", "area": 1.0, "population": 1}
            ],
            "edges": [["a", "zz"]]
        }"#;
        assert!(matches!(
            parse_graph_json(text.as_bytes()),
            Err(Error::UnknownEndpoint { id }) if id == "zz"
        ));
    }

    #[test]
    fn plan_csv_round_trips_with_labels() {
        let g = grid2x2();
        let plan = Plan::from_assignment(&g, vec![0, 0, 1, 1]).unwrap();
        let labels = vec!["north".to_string(), "south".to_string()];
        let text = write_plan_csv(&g, &plan, Some(&labels));
        let bound = bind_plan(&g, &parse_plan_csv(text.as_bytes()).unwrap()).unwrap();
        assert_eq!(bound.plan, plan);
        assert_eq!(bound.labels, labels);
        assert_eq!(write_plan_csv(&g, &bound.plan, Some(&bound.labels)), text);
    }

    #[test]
    fn numeric_labels_round_trip_without_a_label_table() {
        let g = grid2x2();
        let plan = Plan::from_assignment(&g, vec![1, 0, 1, 0]).unwrap();
        let text = write_plan_csv(&g, &plan, None);
        assert_eq!(text, "precinct_id,district\n0-0,1\n0-1,0\n1-0,1\n1-1,0\n");
        let bound = bind_plan(&g, &parse_plan_csv(text.as_bytes()).unwrap()).unwrap();
        // Densification follows first appearance: file label "1" becomes 0.
        assert_eq!(bound.labels, vec!["1".to_string(), "0".to_string()]);
        assert_eq!(bound.plan.assignment, vec![0, 1, 0, 1]);
    }

    #[test]
    fn plan_csv_rejects_bad_shapes() {
        assert!(matches!(
            parse_plan_csv(b"wrong,header\na,0\n"),
            Err(Error::MalformedPlan { .. })
        ));
        assert!(matches!(
            parse_plan_csv(b"precinct_id,district\na\n"),
            Err(Error::MalformedPlan { .. })
        ));
        assert!(matches!(
            parse_plan_csv(b"precinct_id,district\na,\n"),
            Err(Error::MalformedPlan { .. })
        ));
    }

    #[test]
    fn bind_rejects_unknown_and_duplicate_precincts() {
        let g = grid2x2();
        let unknown = LabeledPlan {
            rows: vec![("9-9".into(), "0".into())],
        };
        assert!(matches!(
            bind_plan(&g, &unknown),
            Err(Error::UnknownPrecinct { id }) if id == "9-9"
        ));
        let duplicate = LabeledPlan {
            rows: vec![("0-0".into(), "0".into()), ("0-0".into(), "1".into())],
        };
        assert!(matches!(
            bind_plan(&g, &duplicate),
            Err(Error::DuplicateAssignment { id }) if id == "0-0"
        ));
    }

    #[test]
    fn bind_leaves_missing_precincts_for_validation() {
        let g = grid2x2();
        let partial = LabeledPlan {
            rows: vec![("0-0".into(), "x".into()), ("0-1".into(), "y".into())],
        };
        let bound = bind_plan(&g, &partial).unwrap();
        let violations = validate_plan(&g, &bound.plan);
        assert_eq!(violations.len(), 2);
    }

    #[test]
    fn scores_csv_round_trips_full_precision() {
        let third = 1.0 / 3.0;
        let scores = vec![
            PairwiseScores {
                kind: WeightKind::Area,
                entries: vec![
                    PairScore {
                        i: 0,
                        j: 1,
                        score: third,
                    },
                    PairScore {
                        i: 0,
                        j: 2,
                        score: 1.0,
                    },
                ],
            },
            PairwiseScores {
                kind: WeightKind::Population,
                entries: vec![
                    PairScore {
                        i: 0,
                        j: 1,
                        score: 0.5,
                    },
                    PairScore {
                        i: 0,
                        j: 2,
                        score: 0.25,
                    },
                ],
            },
        ];
        let text = write_scores_csv(&scores);
        assert!(text.starts_with("i,j,kind,score\n"));
        assert!(text.contains("0,1,area,0.3333333333333333\n"));
        let back = parse_scores_csv(text.as_bytes()).unwrap();
        assert_eq!(back, scores);
        assert_eq!(back[0].entries[0].score, third);
    }

    #[test]
    fn scores_csv_rejects_invalid_rows() {
        for bad in [
            "x,j,kind,score\n0,1,area,0.5\n",
            "i,j,kind,score\n1,0,area,0.5\n",
            "i,j,kind,score\n0,1,mass,0.5\n",
            "i,j,kind,score\n0,1,area,1.5\n",
            "i,j,kind,score\n0,1,area,NaN\n",
        ] {
            assert!(
                matches!(
                    parse_scores_csv(bad.as_bytes()),
                    Err(Error::MalformedScores { .. })
                ),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn summary_json_is_keyed_by_kind() {
        let scores = PairwiseScores {
            kind: WeightKind::Area,
            entries: vec![PairScore {
                i: 0,
                j: 1,
                score: 0.5,
            }],
        };
        let summary = crate::ensemble::summarize(&scores, 4).unwrap();
        let text = write_summary_json(&[summary]);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["area"]["count"], 1);
        assert_eq!(value["area"]["mean"], 0.5);
        assert_eq!(
            value["area"]["histogram"]["counts"]
                .as_array()
                .unwrap()
                .len(),
            4
        );
    }

    #[test]
    fn manifest_round_trips() {
        let manifest = RunManifest {
            tool: "plansim".into(),
            version: "0.1.0".into(),
            graph_sha256: sha256_hex(b"graph"),
            districts: 4,
            num_chains: 2,
            steps_per_chain: 200,
            base_seed: 99,
            trees_per_step: 1,
            parallelism: 2,
            chain_seeds: vec![1, 2],
            plans: vec![
                PlanDigest {
                    file: "plan_000.csv".into(),
                    sha256: sha256_hex(b"p0"),
                },
                PlanDigest {
                    file: "plan_001.csv".into(),
                    sha256: sha256_hex(b"p1"),
                },
            ],
            wall_ms: 1234,
        };
        let text = write_manifest_json(&manifest);
        assert_eq!(parse_manifest_json(text.as_bytes()).unwrap(), manifest);
    }

    #[test]
    fn manifest_rejects_inconsistent_counts() {
        let mut manifest = RunManifest {
            tool: "plansim".into(),
            version: "0.1.0".into(),
            graph_sha256: String::new(),
            districts: 2,
            num_chains: 2,
            steps_per_chain: 1,
            base_seed: 0,
            trees_per_step: 1,
            parallelism: 1,
            chain_seeds: vec![1],
            plans: vec![],
            wall_ms: 0,
        };
        let text = write_manifest_json(&manifest);
        assert!(matches!(
            parse_manifest_json(text.as_bytes()),
            Err(Error::MalformedManifest { .. })
        ));
        manifest.tool = "othertool".into();
        manifest.chain_seeds = vec![1, 2];
        manifest.plans = vec![
            PlanDigest {
                file: "a".into(),
                sha256: String::new(),
            },
            PlanDigest {
                file: "b".into(),
                sha256: String::new(),
            },
        ];
        let text = write_manifest_json(&manifest);
        assert!(matches!(
            parse_manifest_json(text.as_bytes()),
            Err(Error::MalformedManifest { .. })
        ));
    }
}
