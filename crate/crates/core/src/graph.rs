//! Static unit-capacity undirected graph with a fixed orientation per edge.
//!
//! Each edge keeps the orientation it was given at build time. The adjacency
//! index stores, for every vertex, the incident edge ids together with the
//! sign of that vertex in the edge's column of the incidence matrix: `+1` for
//! the tail, `-1` for the head.

use rustc_hash::FxHashSet;

use crate::error::GraphError;
use crate::flow::{Flow, SourceFunction};

pub type Vertex = u32;
pub type EdgeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub edge: EdgeId,
    /// `+1` if the vertex is the tail of `edge`, `-1` if it is the head.
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    offsets: Vec<usize>,
    adjacency: Vec<Incidence>,
}

impl Graph {
    /// Builds a graph on `n` vertices. Edge `i` is oriented `edges[i].0 -> edges[i].1`.
    pub fn new(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if n > Vertex::MAX as usize || edges.len() > EdgeId::MAX as usize {
            return Err(GraphError::TooLarge);
        }
        let mut degree = vec![0usize; n];
        for (index, &(u, v)) in edges.iter().enumerate() {
            if u as usize >= n || v as usize >= n {
                return Err(GraphError::OutOfRange {
                    edge: index,
                    u,
                    v,
                    n,
                });
            }
            if u == v {
                return Err(GraphError::SelfLoop {
                    edge: index,
                    vertex: u,
                });
            }
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }

        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut adjacency = vec![Incidence { edge: 0, sign: 0 }; 2 * edges.len()];
        for (index, &(u, v)) in edges.iter().enumerate() {
            let e = index as EdgeId;
            adjacency[cursor[u as usize]] = Incidence { edge: e, sign: 1 };
            cursor[u as usize] += 1;
            adjacency[cursor[v as usize]] = Incidence { edge: e, sign: -1 };
            cursor[v as usize] += 1;
        }

        Ok(Self {
            n,
            edges: edges.to_vec(),
            offsets,
            adjacency,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Oriented endpoints `(tail, head)` of edge `e`.
    #[inline]
    pub fn endpoints(&self, e: EdgeId) -> (Vertex, Vertex) {
        self.edges[e as usize]
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Incident edges of `v` in ascending edge id order.
    #[inline]
    pub fn incident(&self, v: Vertex) -> &[Incidence] {
        let v = v as usize;
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    /// The endpoint of `e` that is not `v`.
    #[inline]
    pub fn opposite(&self, e: EdgeId, v: Vertex) -> Vertex {
        let (a, b) = self.endpoints(e);
        if a == v {
            b
        } else {
            a
        }
    }

    pub fn contains(&self, v: Vertex) -> bool {
        (v as usize) < self.n
    }

    /// `vol(S)`: sum of degrees over `s`.
    pub fn volume<'a>(&self, s: impl IntoIterator<Item = &'a Vertex>) -> usize {
        s.into_iter().map(|&v| self.degree(v)).sum()
    }

    /// `δS`: number of edges with exactly one endpoint in `s`.
    ///
    /// Runs in `O(vol(S))`; duplicates in `s` are ignored.
    pub fn boundary_size<'a>(&self, s: impl IntoIterator<Item = &'a Vertex>) -> usize {
        let members: FxHashSet<Vertex> = s.into_iter().copied().collect();
        let mut boundary = 0;
        for &v in &members {
            for inc in self.incident(v) {
                if !members.contains(&self.opposite(inc.edge, v)) {
                    boundary += 1;
                }
            }
        }
        boundary
    }

    /// `Bf` as a sparse vertex vector.
    pub fn apply_incidence(&self, f: &Flow) -> SourceFunction {
        let mut out = SourceFunction::new();
        for (e, value) in f.iter() {
            let (u, v) = self.endpoints(e);
            out.add(u, value);
            out.add(v, -value);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn builds_single_edge_and_triangle() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!((g.degree(0), g.degree(1)), (1, 1));
        let t = triangle();
        assert_eq!(
            (0..3).map(|v| t.degree(v)).collect::<Vec<_>>(),
            vec![2, 2, 2]
        );
    }

    #[test]
    fn rejects_self_loop_and_out_of_range() {
        assert!(matches!(
            Graph::new(2, &[(0, 0)]),
            Err(GraphError::SelfLoop { edge: 0, vertex: 0 })
        ));
        assert!(matches!(
            Graph::new(2, &[(0, 1), (1, 2)]),
            Err(GraphError::OutOfRange { edge: 1, .. })
        ));
        assert!(matches!(Graph::new(0, &[]), Err(GraphError::Empty)));
    }

    #[test]
    fn adjacency_signs_follow_orientation() {
        let g = Graph::new(3, &[(0, 1), (2, 1), (0, 1)]).unwrap();
        assert_eq!(
            g.incident(1),
            &[
                Incidence { edge: 0, sign: -1 },
                Incidence { edge: 1, sign: -1 },
                Incidence { edge: 2, sign: -1 }
            ]
        );
        assert_eq!(g.incident(0)[1], Incidence { edge: 2, sign: 1 });
        let total: usize = (0..3).map(|v| g.degree(v)).sum();
        assert_eq!(total, 2 * g.edge_count());
    }

    #[test]
    fn boundary_and_volume() {
        let t = triangle();
        assert_eq!(t.boundary_size(&[0]), 2);
        assert_eq!(t.boundary_size(&[0, 1, 2]), 0);
        let path = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(path.boundary_size(&[1]), 2);

        assert_eq!(t.volume(&[0, 1]), 4);
        assert_eq!(t.volume(&[]), 0);
        let single = Graph::new(2, &[(0, 1)]).unwrap();
        assert_eq!(single.volume(&[0, 1]), 2);
    }

    #[test]
    fn incidence_sign_convention() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        let f = Flow::from_entries([(0, 1.0)]);
        let b = g.apply_incidence(&f);
        assert_eq!(b.get(0), 1.0);
        assert_eq!(b.get(1), -1.0);
        assert!(g.apply_incidence(&Flow::new()).is_empty());
    }

    #[test]
    fn oriented_triangle_circulation_has_zero_divergence() {
        // Columns of B for (0,1),(1,2),(2,0): e0 + e1 + e2 sums to zero row-wise.
        let t = triangle();
        let f = Flow::from_entries([(0, 1.0), (1, 1.0), (2, 1.0)]);
        assert!(t.apply_incidence(&f).is_empty());
    }
}
