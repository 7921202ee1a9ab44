use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;

use super::TopologyError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lane {
    pub nodes: Vec<String>,
    #[serde(default)]
    pub successors: Vec<String>,
}

/// Validated lane graph of one intersection.
///
/// Every successor, entrance and exit refers to an existing lane, every
/// lane polyline refers to existing nodes and has at least two of them, and
/// every entrance reaches at least one exit.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaneGraph {
    pub nodes: BTreeMap<String, [f64; 2]>,
    pub lanes: BTreeMap<String, Lane>,
    pub entrances: Vec<String>,
    pub exits: Vec<String>,
}

/// An entrance-to-exit lane sequence and its concatenated polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub lanes: Vec<String>,
    pub points: Vec<[f64; 2]>,
}

/// Parses and validates a JSON lane map.
pub fn parse_map(bytes: &[u8]) -> Result<LaneGraph, TopologyError> {
    let graph: LaneGraph = serde_json::from_slice(bytes).map_err(|e| TopologyError::Parse(e.to_string()))?;
    graph.validate()?;
    Ok(graph)
}

impl LaneGraph {
    fn validate(&self) -> Result<(), TopologyError> {
        let dangling = |from: &str, to: &str| TopologyError::DanglingReference {
            from: from.to_owned(),
            to: to.to_owned(),
        };
        for (id, lane) in &self.lanes {
            if lane.nodes.len() < 2 {
                return Err(TopologyError::ShortLane(id.clone()));
            }
            for n in &lane.nodes {
                if !self.nodes.contains_key(n) {
                    return Err(dangling(id, n));
                }
            }
            for s in &lane.successors {
                if !self.lanes.contains_key(s) {
                    return Err(dangling(id, s));
                }
            }
        }
        for id in self.entrances.iter().chain(&self.exits) {
            if !self.lanes.contains_key(id) {
                return Err(dangling("entrances/exits", id));
            }
        }
        for (id, p) in &self.nodes {
            if !(p[0].is_finite() && p[1].is_finite()) {
                return Err(TopologyError::Parse(format!("node {id} has non-finite coordinates")));
            }
        }
        let exits: BTreeSet<&str> = self.exits.iter().map(String::as_str).collect();
        for entrance in &self.entrances {
            if !self.reaches_exit(entrance, &exits) {
                return Err(TopologyError::UnreachableExit(entrance.clone()));
            }
        }
        Ok(())
    }

    fn reaches_exit(&self, start: &str, exits: &BTreeSet<&str>) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(lane) = stack.pop() {
            if exits.contains(lane) {
                return true;
            }
            if seen.insert(lane) {
                stack.extend(self.lanes[lane].successors.iter().map(String::as_str));
            }
        }
        false
    }

    fn lane_points(&self, lane: &str) -> impl Iterator<Item = [f64; 2]> + '_ {
        self.lanes[lane].nodes.iter().map(|n| self.nodes[n])
    }
}

/// All simple entrance→exit lane sequences, sorted by lane-id sequence.
///
/// A sequence ends at every exit lane it meets; it may continue through an
/// exit lane that has successors. No sequence repeats a lane, so rings
/// terminate.
pub fn enumerate_paths(graph: &LaneGraph) -> Vec<Route> {
    let exits: BTreeSet<&str> = graph.exits.iter().map(String::as_str).collect();
    let mut entrances: Vec<&str> = graph.entrances.iter().map(String::as_str).collect();
    entrances.sort_unstable();
    entrances.dedup();

    let mut sequences: Vec<Vec<String>> = Vec::new();
    for entrance in entrances {
        let mut current = vec![entrance];
        walk(graph, &exits, &mut current, &mut sequences);
    }
    sequences.sort();
    sequences.dedup();
    sequences
        .into_iter()
        .map(|lanes| {
            let mut points: Vec<[f64; 2]> = Vec::new();
            for lane in &lanes {
                for p in graph.lane_points(lane) {
                    if points.last() != Some(&p) {
                        points.push(p);
                    }
                }
            }
            Route { lanes, points }
        })
        .collect()
}

fn walk<'g>(graph: &'g LaneGraph, exits: &BTreeSet<&str>, current: &mut Vec<&'g str>, out: &mut Vec<Vec<String>>) {
    let lane = *current.last().expect("walk starts with one lane");
    if exits.contains(lane) {
        out.push(current.iter().map(|s| (*s).to_owned()).collect());
    }
    let mut successors: Vec<&str> = graph.lanes[lane].successors.iter().map(String::as_str).collect();
    successors.sort_unstable();
    successors.dedup();
    for next in successors {
        if current.contains(&next) {
            continue;
        }
        current.push(next);
        walk(graph, exits, current, out);
        current.pop();
    }
}
