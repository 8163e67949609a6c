//! graph6 encoding for simple undirected graphs (semiedge-free, no parallel
//! edges). The optional `>>graph6<<` header is accepted on input.

use crate::multipole::Multipole;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Graph6Error {
    #[error("invalid character {0:?} at byte {1}")]
    InvalidChar(char, usize),
    #[error("truncated input: expected {expected} payload bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error("trailing bytes after a complete graph")]
    Trailing,
    #[error("graph order {0} not supported")]
    Order(u64),
    #[error("multipole has semiedges; graph6 encodes graphs only")]
    NotAGraph,
    #[error("parallel edges cannot be encoded in graph6")]
    ParallelEdges,
}

const HEADER: &str = ">>graph6<<";

fn decode_byte(b: u8, pos: usize) -> Result<u8, Graph6Error> {
    if !(63..=126).contains(&b) {
        return Err(Graph6Error::InvalidChar(b as char, pos));
    }
    Ok(b - 63)
}

/// Parses one graph6 string into a graph.
pub fn parse_graph6(input: &str) -> Result<Multipole, Graph6Error> {
    let s = input.trim();
    let s = s.strip_prefix(HEADER).unwrap_or(s);
    let bytes = s.as_bytes();
    if bytes.is_empty() {
        return Err(Graph6Error::Truncated { expected: 1, got: 0 });
    }
    let (n, mut idx): (u64, usize) = if bytes[0] == b'~' {
        if bytes.len() >= 2 && bytes[1] == b'~' {
            // 8-byte form: n up to 2^36-1; far beyond this crate's scope.
            let mut n = 0u64;
            if bytes.len() < 8 {
                return Err(Graph6Error::Truncated { expected: 8, got: bytes.len() });
            }
            for (i, &b) in bytes[2..8].iter().enumerate() {
                n = (n << 6) | decode_byte(b, 2 + i)? as u64;
            }
            (n, 8)
        } else {
            if bytes.len() < 4 {
                return Err(Graph6Error::Truncated { expected: 4, got: bytes.len() });
            }
            let mut n = 0u64;
            for (i, &b) in bytes[1..4].iter().enumerate() {
                n = (n << 6) | decode_byte(b, 1 + i)? as u64;
            }
            (n, 4)
        }
    } else {
        (decode_byte(bytes[0], 0)? as u64, 1)
    };
    if n > 10_000 {
        return Err(Graph6Error::Order(n));
    }
    let n = n as usize;
    let nbits = n * (n.saturating_sub(1)) / 2;
    let nbytes = nbits.div_ceil(6);
    if bytes.len() - idx < nbytes {
        return Err(Graph6Error::Truncated {
            expected: nbytes,
            got: bytes.len() - idx,
        });
    }
    if bytes.len() - idx > nbytes {
        return Err(Graph6Error::Trailing);
    }
    let mut bits = Vec::with_capacity(nbytes * 6);
    for _ in 0..nbytes {
        let v = decode_byte(bytes[idx], idx)?;
        idx += 1;
        for shift in (0..6).rev() {
            bits.push((v >> shift) & 1 == 1);
        }
    }
    let mut edges = Vec::new();
    let mut bit = 0usize;
    for v in 1..n {
        for u in 0..v {
            if bits[bit] {
                edges.push((u as u32, v as u32));
            }
            bit += 1;
        }
    }
    Ok(Multipole::graph(n, edges).expect("loop-free by construction"))
}

/// Emits the canonical graph6 bytes of a simple graph.
pub fn emit_graph6(m: &Multipole) -> Result<String, Graph6Error> {
    if !m.is_graph() {
        return Err(Graph6Error::NotAGraph);
    }
    let n = m.vertex_count();
    let mut adj = vec![false; n * n];
    for &(u, v) in m.edges() {
        let (u, v) = (u as usize, v as usize);
        if adj[u * n + v] {
            return Err(Graph6Error::ParallelEdges);
        }
        adj[u * n + v] = true;
        adj[v * n + u] = true;
    }
    let mut out = Vec::new();
    if n < 63 {
        out.push(n as u8 + 63);
    } else if n < (1 << 18) {
        out.push(b'~');
        out.push(((n >> 12) & 63) as u8 + 63);
        out.push(((n >> 6) & 63) as u8 + 63);
        out.push((n & 63) as u8 + 63);
    } else {
        return Err(Graph6Error::Order(n as u64));
    }
    let mut acc = 0u8;
    let mut nbits = 0u8;
    for v in 1..n {
        for u in 0..v {
            acc = (acc << 1) | adj[u * n + v] as u8;
            nbits += 1;
            if nbits == 6 {
                out.push(acc + 63);
                acc = 0;
                nbits = 0;
            }
        }
    }
    if nbits > 0 {
        out.push((acc << (6 - nbits)) + 63);
    }
    Ok(String::from_utf8(out).expect("ascii"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_is_minimal() {
        let m = Multipole::graph(0, vec![]).expect("ok");
        let s = emit_graph6(&m).expect("graph");
        assert_eq!(s, "?");
        let back = parse_graph6(&s).expect("parse");
        assert_eq!(back.vertex_count(), 0);
    }

    #[test]
    fn known_small_graph() {
        // Path on 3 vertices 0-1-2: bits x(0,1)=1, x(0,2)=0, x(1,2)=1 -> 101000 -> 'h'... compute:
        let m = Multipole::graph(3, vec![(0, 1), (1, 2)]).expect("ok");
        let s = emit_graph6(&m).expect("graph");
        let back = parse_graph6(&s).expect("parse");
        assert_eq!(back.vertex_count(), 3);
        let mut edges: Vec<(u32, u32)> = back.edges().to_vec();
        edges.sort();
        assert_eq!(edges, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn header_is_accepted() {
        let m = Multipole::graph(3, vec![(0, 1)]).expect("ok");
        let s = format!(">>graph6<<{}", emit_graph6(&m).expect("graph"));
        assert_eq!(parse_graph6(&s).expect("parse").edge_count(), 1);
    }

    #[test]
    fn semiedges_rejected() {
        let m = Multipole::new(
            1,
            vec![],
            vec![crate::multipole::Incidence::Vertex(0); 3],
            vec![],
        )
        .expect("ok");
        assert_eq!(emit_graph6(&m).unwrap_err(), Graph6Error::NotAGraph);
    }

    #[test]
    fn invalid_characters_rejected() {
        // Correct length for n=3 but a payload byte outside 63..=126.
        assert!(matches!(parse_graph6("B\x1f"), Err(Graph6Error::InvalidChar(_, _))));
        assert!(matches!(parse_graph6("Bw~~"), Err(Graph6Error::Trailing)));
    }
}
