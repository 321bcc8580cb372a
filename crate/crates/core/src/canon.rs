//! Canonical codes: byte strings that identify isomorphism classes of
//! unrooted, rooted and doubly rooted finite graphs.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{DoublyRootedGraph, FiniteGraph, RootedGraph};
use crate::refine::{pinned_partition, search};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeKind {
    Unrooted,
    Rooted,
    DoublyRooted,
}

impl CodeKind {
    fn tag(self) -> u8 {
        match self {
            CodeKind::Unrooted => 0,
            CodeKind::Rooted => 1,
            CodeKind::DoublyRooted => 2,
        }
    }

    fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(CodeKind::Unrooted),
            1 => Some(CodeKind::Rooted),
            2 => Some(CodeKind::DoublyRooted),
            _ => None,
        }
    }
}

/// Canonical code of a graph with zero, one or two roots.
///
/// Layout: kind tag, coincident-roots flag, vertex count (u32 big endian),
/// then the upper triangle of the canonically labeled adjacency matrix,
/// MSB first. Roots always receive the first canonical labels. Codes order
/// by their bytes, which starts with the kind tag.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCode {
    bytes: Vec<u8>,
}

impl CanonicalCode {
    pub fn kind(&self) -> CodeKind {
        CodeKind::from_tag(self.bytes[0]).expect("validated at construction")
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn vertex_count(&self) -> usize {
        u32::from_be_bytes(self.bytes[2..6].try_into().unwrap()) as usize
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.bytes)
    }

    pub fn from_hex(text: &str) -> Result<Self> {
        let bytes = hex::decode(text.trim()).map_err(|e| Error::Parse(format!("bad code hex: {e}")))?;
        if bytes.len() < 6 || CodeKind::from_tag(bytes[0]).is_none() || bytes[1] > 1 {
            return Err(Error::Parse("bad code header".into()));
        }
        let code = CanonicalCode { bytes };
        let n = code.vertex_count();
        if code.bytes.len() != 6 + (n * n.saturating_sub(1) / 2).div_ceil(8) {
            return Err(Error::Parse("code length does not match vertex count".into()));
        }
        Ok(code)
    }

    /// Rebuilds the canonically labeled graph carried by the code, with its
    /// roots (labels 0, and 1 for distinct doubly rooted codes).
    pub fn decode(&self) -> (FiniteGraph, Vec<usize>) {
        let n = self.vertex_count();
        let mut edges = Vec::new();
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                if self.bytes[6 + k / 8] & (0x80 >> (k % 8)) != 0 {
                    edges.push((i, j));
                }
                k += 1;
            }
        }
        let g = FiniteGraph::new(n, &edges).expect("codes carry simple graphs");
        let roots = match self.kind() {
            CodeKind::Unrooted => vec![],
            CodeKind::Rooted => vec![0],
            CodeKind::DoublyRooted if self.bytes[1] == 1 => vec![0, 0],
            CodeKind::DoublyRooted => vec![0, 1],
        };
        (g, roots)
    }
}

impl fmt::Debug for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalCode({})", self.to_hex())
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for CanonicalCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for CanonicalCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        CanonicalCode::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// Canonical code of `g` with up to two roots.
///
/// Rooted kinds require a connected graph; the unrooted kind accepts any
/// graph.
pub fn canonical_code(g: &FiniteGraph, roots: &[usize]) -> Result<CanonicalCode> {
    canonical_form(g, roots).map(|(code, _)| code)
}

/// Canonical code together with the canonical labeling (`labeling[v]` is the
/// canonical position of `v`).
pub fn canonical_form(g: &FiniteGraph, roots: &[usize]) -> Result<(CanonicalCode, Vec<usize>)> {
    let kind = match roots.len() {
        0 => CodeKind::Unrooted,
        1 => CodeKind::Rooted,
        2 => CodeKind::DoublyRooted,
        k => return Err(Error::InvalidParameter(format!("at most two roots, got {k}"))),
    };
    for &r in roots {
        g.check_vertex(r)?;
    }
    if kind != CodeKind::Unrooted {
        g.require_connected()?;
    }
    crate::check_guard(g.vertex_count())?;
    let n = g.vertex_count();
    let result = search(g, pinned_partition(n, roots));
    let coincident = roots.len() == 2 && roots[0] == roots[1];
    let mut bytes = Vec::with_capacity(6 + result.code.len());
    bytes.push(kind.tag());
    bytes.push(coincident as u8);
    bytes.extend_from_slice(&(n as u32).to_be_bytes());
    bytes.extend_from_slice(&result.code);
    Ok((CanonicalCode { bytes }, result.labeling))
}

pub fn rooted_code(g: &RootedGraph) -> Result<CanonicalCode> {
    canonical_code(&g.graph, &[g.root])
}

pub fn doubly_rooted_code(g: &DoublyRootedGraph) -> Result<CanonicalCode> {
    canonical_code(&g.graph, &[g.primary_root, g.secondary_root])
}

/// Isomorphism of rooted graphs (root mapped to root).
pub fn are_isomorphic(a: &RootedGraph, b: &RootedGraph) -> Result<bool> {
    if a.graph.vertex_count() != b.graph.vertex_count() || a.graph.edge_count() != b.graph.edge_count() {
        a.graph.require_connected()?;
        b.graph.require_connected()?;
        return Ok(false);
    }
    Ok(rooted_code(a)? == rooted_code(b)?)
}
