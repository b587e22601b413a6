//! Plain-text edge lists: one `source target weight` record per line,
//! whitespace separated, `#` starts a comment. A missing weight means 1.

use std::fmt::Write as _;

use thiserror::Error;

use super::{DirectedGraph, TrophicError};

#[derive(Debug, Error)]
pub enum EdgeListError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Graph { line: usize, source: TrophicError },
}

pub type EdgeList = DirectedGraph<f64>;

pub fn parse_edge_list(text: &str) -> Result<EdgeList, EdgeListError> {
    let mut g = DirectedGraph::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let weight = match fields.len() {
            2 => 1.0,
            3 => fields[2].parse::<f64>().map_err(|e| EdgeListError::Parse {
                line,
                message: format!("bad weight {:?}: {e}", fields[2]),
            })?,
            k => {
                return Err(EdgeListError::Parse {
                    line,
                    message: format!("expected `source target weight`, got {k} fields"),
                })
            }
        };
        if !weight.is_finite() {
            return Err(EdgeListError::Parse {
                line,
                message: format!("weight must be finite, got {weight}"),
            });
        }
        g.add_edge(fields[0], fields[1], weight)
            .map_err(|source| EdgeListError::Graph { line, source })?;
    }
    Ok(g)
}

/// Serialises a graph in the format read by [`parse_edge_list`].
pub fn format_edge_list(g: &DirectedGraph<f64>) -> String {
    let mut out = String::new();
    for (s, t, w) in g.edges() {
        let _ = writeln!(out, "{} {} {}", g.label(s), g.label(t), w);
    }
    out
}
