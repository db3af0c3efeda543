//! Path metrics on a weighted metric graph.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{EdgeId, GraphError, VertexId, WeightedMetricGraph};

/// Which edge-length family a distance or offset refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Scale {
    /// The user-supplied lengths `l`.
    #[default]
    Given,
    /// `l_c = l / b`.
    Canonical,
    /// `l_i = l·√(a / b)`.
    Intrinsic,
}

/// A point of the metric graph. Edge offsets are measured from the head of
/// the edge in the given length scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Vertex(VertexId),
    Edge { edge: EdgeId, offset: f64 },
}

/// A shortest path: its length and the vertices it passes through, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Geodesic {
    pub length: f64,
    pub vertices: Vec<VertexId>,
}

impl WeightedMetricGraph {
    /// Length of edge `e` in the requested scale.
    pub fn edge_length(&self, e: EdgeId, scale: Scale) -> f64 {
        match scale {
            Scale::Given => self.weights().length[e.0],
            Scale::Canonical => self.scales(e).canonical_length,
            Scale::Intrinsic => self.scales(e).intrinsic_length,
        }
    }

    /// Convert an offset given in the `l` scale to `scale`.
    pub fn convert_offset(&self, e: EdgeId, offset: f64, scale: Scale) -> f64 {
        offset * self.edge_length(e, scale) / self.weights().length[e.0]
    }

    fn check_point(&self, p: Point) -> Result<(), GraphError> {
        match p {
            Point::Vertex(v) if v.0 >= self.vertex_count() => {
                Err(GraphError::UnknownVertex(format!("#{}", v.0)))
            }
            Point::Edge { edge, .. } if edge.0 >= self.edge_count() => {
                Err(GraphError::UnknownEdge(edge.0))
            }
            Point::Edge { edge, offset } => {
                let l = self.weights().length[edge.0];
                if !(0.0..=l).contains(&offset) {
                    Err(GraphError::OffsetOutOfRange {
                        edge: edge.0,
                        offset,
                        length: l,
                    })
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Vertices a point is attached to, with the distance to each.
    fn anchors(&self, p: Point, scale: Scale) -> Vec<(VertexId, f64)> {
        match p {
            Point::Vertex(v) => vec![(v, 0.0)],
            Point::Edge { edge, offset } => {
                let (h, t) = self.endpoints(edge);
                let l = self.edge_length(edge, scale);
                let s = self.convert_offset(edge, offset, scale);
                vec![(h, s), (t, (l - s).max(0.0))]
            }
        }
    }
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(g: &WeightedMetricGraph, sources: &[(VertexId, f64)], scale: Scale) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.vertex_count()];
    let mut heap = BinaryHeap::new();
    for &(v, d) in sources {
        if d < dist[v.0] {
            dist[v.0] = d;
            heap.push(Item(d, v.0));
        }
    }
    while let Some(Item(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for inc in g.incident(VertexId(v)) {
            let nd = d + g.edge_length(inc.edge, scale);
            if nd < dist[inc.other.0] {
                dist[inc.other.0] = nd;
                heap.push(Item(nd, inc.other.0));
            }
        }
    }
    dist
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

/// Shortest path between two points in the chosen scale.
///
/// Among several shortest paths the one with the lexicographically smallest
/// vertex sequence is returned.
pub fn geodesic(
    g: &WeightedMetricGraph,
    x: Point,
    y: Point,
    scale: Scale,
) -> Result<Geodesic, GraphError> {
    g.check_point(x)?;
    g.check_point(y)?;
    if let (Point::Vertex(a), Point::Vertex(b)) = (x, y) {
        if a == b {
            return Ok(Geodesic {
                length: 0.0,
                vertices: vec![a],
            });
        }
    }
    // both points on the same edge: the direct segment is a candidate
    let direct = match (x, y) {
        (Point::Edge { edge: e1, offset: s1 }, Point::Edge { edge: e2, offset: s2 }) if e1 == e2 => {
            Some(g.convert_offset(e1, (s1 - s2).abs(), scale))
        }
        (Point::Edge { edge, offset }, Point::Vertex(v))
        | (Point::Vertex(v), Point::Edge { edge, offset }) => {
            let (h, t) = g.endpoints(edge);
            let s = g.convert_offset(edge, offset, scale);
            let l = g.edge_length(edge, scale);
            if v == h {
                Some(s)
            } else if v == t {
                Some(l - s)
            } else {
                None
            }
        }
        _ => None,
    };

    let src = g.anchors(x, scale);
    let dst = g.anchors(y, scale);
    let from = dijkstra(g, &src, scale);
    let to = dijkstra(g, &dst, scale);
    let through = dst
        .iter()
        .map(|&(v, d)| from[v.0] + d)
        .fold(f64::INFINITY, f64::min);

    if let Some(d) = direct {
        if d <= through || close(d, through) {
            return Ok(Geodesic {
                length: d,
                vertices: match (x, y) {
                    (Point::Vertex(v), _) | (_, Point::Vertex(v)) => vec![v],
                    _ => Vec::new(),
                },
            });
        }
    }
    if !through.is_finite() {
        return Err(GraphError::UnreachablePoint);
    }

    // greedy walk: smallest admissible vertex id at every step
    let total = through;
    let mut current = src
        .iter()
        .filter(|&&(v, d)| close(d + to[v.0], total))
        .map(|&(v, _)| v)
        .min()
        .ok_or(GraphError::UnreachablePoint)?;
    let mut walked = src.iter().find(|s| s.0 == current).map(|s| s.1).unwrap();
    let mut vertices = vec![current];
    loop {
        if dst
            .iter()
            .any(|&(v, d)| v == current && close(walked + d, total))
        {
            break;
        }
        let next = g
            .incident(current)
            .iter()
            .filter(|inc| {
                let w = walked + g.edge_length(inc.edge, scale);
                close(w + to[inc.other.0], total)
            })
            .min_by_key(|inc| inc.other)
            .ok_or(GraphError::UnreachablePoint)?;
        walked += g.edge_length(next.edge, scale);
        current = next.other;
        vertices.push(current);
    }
    Ok(Geodesic {
        length: total,
        vertices,
    })
}

/// `d(x, y) = inf { L(p) : p connects x and y }` in the chosen scale.
pub fn path_distance(
    g: &WeightedMetricGraph,
    x: Point,
    y: Point,
    scale: Scale,
) -> Result<f64, GraphError> {
    geodesic(g, x, y, scale).map(|p| p.length)
}

/// Largest vertex-to-vertex distance in the chosen scale. Edge points never
/// exceed it by more than half the longest edge.
pub fn vertex_diameter(g: &WeightedMetricGraph, scale: Scale) -> f64 {
    g.vertices()
        .map(|v| {
            dijkstra(g, &[(v, 0.0)], scale)
                .into_iter()
                .filter(|d| d.is_finite())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Distances from one vertex to all vertices; unreachable ones are infinite.
pub fn distances_from(g: &WeightedMetricGraph, x: VertexId, scale: Scale) -> Vec<f64> {
    dijkstra(g, &[(x, 0.0)], scale)
}
