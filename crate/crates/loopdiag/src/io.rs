//! Graph file format: a single JSON object
//! `{"nodes": N, "edges": [{"i", "j", "psi": [[..]]}], "phi": [[..], ..]}`.
//! Index 0 of every table means `x = +1`, index 1 means `x = -1`.

use crate::error::{Error, Result};
use crate::graph::{Mrf, Psi};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeFile {
    pub i: usize,
    pub j: usize,
    pub psi: Psi,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: usize,
    pub edges: Vec<EdgeFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<[f64; 2]>>,
}

impl TryFrom<GraphFile> for Mrf {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Mrf> {
        let edges = file.edges.into_iter().map(|e| (e.i, e.j, e.psi)).collect();
        let m = Mrf::new(file.nodes, edges)?;
        match file.phi {
            Some(phi) => m.with_phi(phi),
            None => Ok(m),
        }
    }
}

impl From<&Mrf> for GraphFile {
    fn from(m: &Mrf) -> Self {
        GraphFile {
            nodes: m.node_count(),
            edges: m
                .edges()
                .iter()
                .map(|e| EdgeFile {
                    i: e.i,
                    j: e.j,
                    psi: e.psi,
                })
                .collect(),
            phi: m.phi().map(|p| p.to_vec()),
        }
    }
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<Mrf> {
    let text = std::fs::read_to_string(path)?;
    parse_graph(&text)
}

pub fn parse_graph(text: &str) -> Result<Mrf> {
    let file: GraphFile = serde_json::from_str(text)?;
    Mrf::try_from(file)
}

pub fn graph_to_string(m: &Mrf) -> String {
    serde_json::to_string_pretty(&GraphFile::from(m)).expect("graph serializes")
}

pub fn write_graph(m: &Mrf, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, graph_to_string(m) + "\n")?;
    Ok(())
}
