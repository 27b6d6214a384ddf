//! Digital map model, map ingestion and planar geometry.
//!
//! A map is a set of weighted intersection nodes joined by streets. Street
//! loads are folded into their endpoints at load time, so after
//! [`load_map`] every subscriber lives on a node and the clustering code
//! never has to look at streets again.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of an intersection node. Always positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A point in the local planar frame, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// An intersection node carrying its effective subscriber load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: NodeId,
    pub name: String,
    pub x_m: f64,
    pub y_m: f64,
    pub subscribers: f64,
}

impl Node {
    pub fn point(&self) -> Point {
        Point::new(self.x_m, self.y_m)
    }
}

/// A street link between two nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Street {
    pub id: u64,
    pub name: String,
    #[serde(rename = "from")]
    pub from_node: NodeId,
    #[serde(rename = "to")]
    pub to_node: NodeId,
    pub load: f64,
}

/// The clustering universe: nodes with loads, plus the street links they
/// came from.
///
/// Node subscriber counts already include the distributed street loads.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitalMap {
    pub name: String,
    pub declared_area_m2: Option<f64>,
    pub nodes: Vec<Node>,
    pub streets: Vec<Street>,
}

#[derive(Debug, Error)]
pub enum MapError {
    #[error("map parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("map read error: {0}")]
    Io(#[from] std::io::Error),
    #[error("map has no nodes")]
    Empty,
    #[error("node id must be positive")]
    ZeroNodeId,
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("node {0} has non-finite coordinates")]
    NonFiniteCoordinate(NodeId),
    #[error("node {0} has invalid subscriber count {1}")]
    InvalidSubscribers(NodeId, f64),
    #[error("street {street} references unknown endpoint {node}")]
    UnknownEndpoint { street: u64, node: NodeId },
    #[error("street {0} is a self-loop")]
    SelfLoop(u64),
    #[error("street {0} has negative or non-finite load {1}")]
    InvalidLoad(u64, f64),
    #[error("declared_area_m2 must be positive and finite, got {0}")]
    InvalidDeclaredArea(f64),
}

/// On-disk map layout, before street loads are distributed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_area_m2: Option<f64>,
    pub nodes: Vec<Node>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub streets: Vec<Street>,
}

impl MapFile {
    /// Validate and fold street loads onto nodes, half to each endpoint.
    pub fn into_map(self) -> Result<DigitalMap, MapError> {
        if self.nodes.is_empty() {
            return Err(MapError::Empty);
        }
        if let Some(a) = self.declared_area_m2 {
            if !(a.is_finite() && a > 0.0) {
                return Err(MapError::InvalidDeclaredArea(a));
            }
        }
        let mut index = BTreeMap::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id.0 == 0 {
                return Err(MapError::ZeroNodeId);
            }
            if index.insert(node.id, i).is_some() {
                return Err(MapError::DuplicateNode(node.id));
            }
            if !(node.x_m.is_finite() && node.y_m.is_finite()) {
                return Err(MapError::NonFiniteCoordinate(node.id));
            }
            if !(node.subscribers.is_finite() && node.subscribers >= 0.0) {
                return Err(MapError::InvalidSubscribers(node.id, node.subscribers));
            }
        }
        let mut nodes = self.nodes;
        for street in &self.streets {
            if !(street.load.is_finite() && street.load >= 0.0) {
                return Err(MapError::InvalidLoad(street.id, street.load));
            }
            if street.from_node == street.to_node {
                return Err(MapError::SelfLoop(street.id));
            }
            let mut ends = [0usize; 2];
            for (slot, id) in ends.iter_mut().zip([street.from_node, street.to_node]) {
                *slot = *index.get(&id).ok_or(MapError::UnknownEndpoint {
                    street: street.id,
                    node: id,
                })?;
            }
            let half = street.load / 2.0;
            for i in ends {
                nodes[i].subscribers += half;
            }
        }
        Ok(DigitalMap {
            name: self.name,
            declared_area_m2: self.declared_area_m2,
            nodes,
            streets: self.streets,
        })
    }
}

/// Parse a map JSON document and distribute street loads onto nodes.
pub fn load_map<R: Read>(source: R) -> Result<DigitalMap, MapError> {
    let file: MapFile = serde_json::from_reader(source)?;
    file.into_map()
}

impl DigitalMap {
    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_ids(&self) -> BTreeSet<NodeId> {
        self.nodes.iter().map(|n| n.id).collect()
    }

    /// Serializable form of this map. Street loads are already part of the
    /// node counts, so the streets are written with zero load to keep a
    /// reload from counting them twice.
    pub fn to_file(&self) -> MapFile {
        MapFile {
            name: self.name.clone(),
            declared_area_m2: self.declared_area_m2,
            nodes: self.nodes.clone(),
            streets: self
                .streets
                .iter()
                .map(|s| Street {
                    load: 0.0,
                    ..s.clone()
                })
                .collect(),
        }
    }
}

/// Euclidean distance between two nodes, meters.
pub fn distance(a: &Node, b: &Node) -> f64 {
    point_distance(a.point(), b.point())
}

pub fn point_distance(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex hull in counter-clockwise order (Andrew's monotone chain).
///
/// Collinear boundary points are dropped. Fewer than three distinct
/// non-collinear inputs yield a degenerate hull of one or two points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(pts.len() * 2);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Shoelace area of a simple polygon, absolute value.
pub fn polygon_area(ring: &[Point]) -> f64 {
    if ring.len() < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for (i, p) in ring.iter().enumerate() {
        let q = ring[(i + 1) % ring.len()];
        twice += p.x * q.y - q.x * p.y;
    }
    twice.abs() / 2.0
}

/// Area of the convex hull of the given nodes, m².
pub fn region_area<'a, I>(nodes: I) -> f64
where
    I: IntoIterator<Item = &'a Node>,
{
    let pts: Vec<Point> = nodes.into_iter().map(Node::point).collect();
    polygon_area(&convex_hull(&pts))
}

pub fn total_subscribers<'a, I>(nodes: I) -> f64
where
    I: IntoIterator<Item = &'a Node>,
{
    nodes.into_iter().map(|n| n.subscribers).sum()
}

/// Area to plan: the declared area when the map carries one, otherwise the
/// hull of all nodes.
pub fn map_area(map: &DigitalMap) -> f64 {
    map.declared_area_m2
        .unwrap_or_else(|| region_area(&map.nodes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: u64, x: f64, y: f64, subs: f64) -> Node {
        Node {
            id: NodeId(id),
            name: format!("n{id}"),
            x_m: x,
            y_m: y,
            subscribers: subs,
        }
    }

    fn load(s: &str) -> Result<DigitalMap, MapError> {
        load_map(s.as_bytes())
    }

    #[test]
    fn street_load_split_between_endpoints() {
        let map = load(
            r#"{"name":"t","nodes":[
                {"id":1,"name":"A","x_m":0,"y_m":0,"subscribers":10},
                {"id":2,"name":"B","x_m":1,"y_m":0,"subscribers":0}],
              "streets":[{"id":1,"name":"AB","from":1,"to":2,"load":4}]}"#,
        )
        .unwrap();
        assert_eq!(map.nodes[0].subscribers, 12.0);
        assert_eq!(map.nodes[1].subscribers, 2.0);
    }

    #[test]
    fn no_streets_leaves_loads() {
        let map =
            load(r#"{"name":"t","nodes":[{"id":1,"name":"A","x_m":0,"y_m":0,"subscribers":7}]}"#)
                .unwrap();
        assert_eq!(map.nodes[0].subscribers, 7.0);
        assert!(map.streets.is_empty());
    }

    #[test]
    fn unknown_endpoint_reported() {
        let err = load(
            r#"{"name":"t","nodes":[{"id":1,"name":"A","x_m":0,"y_m":0,"subscribers":1}],
              "streets":[{"id":5,"name":"s","from":1,"to":99,"load":1}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("unknown endpoint 99"), "{err}");
    }

    #[test]
    fn duplicate_id_reported() {
        let err = load(
            r#"{"name":"t","nodes":[
                {"id":3,"name":"A","x_m":0,"y_m":0,"subscribers":1},
                {"id":3,"name":"B","x_m":1,"y_m":0,"subscribers":1}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, MapError::DuplicateNode(NodeId(3))));
    }

    #[test]
    fn rejects_bad_inputs() {
        let base = |extra: &str| {
            format!(
                r#"{{"name":"t","nodes":[
                {{"id":1,"name":"A","x_m":0,"y_m":0,"subscribers":1}},
                {{"id":2,"name":"B","x_m":1,"y_m":0,"subscribers":1}}]{extra}}}"#
            )
        };
        let neg = load(&base(
            r#","streets":[{"id":8,"name":"s","from":1,"to":2,"load":-1}]"#,
        ));
        assert!(matches!(neg, Err(MapError::InvalidLoad(8, _))));
        let self_loop = load(&base(
            r#","streets":[{"id":4,"name":"s","from":1,"to":1,"load":1}]"#,
        ));
        assert!(matches!(self_loop, Err(MapError::SelfLoop(4))));
        let unknown_key = load(&base(r#","colour":"red""#));
        assert!(matches!(unknown_key, Err(MapError::Parse(_))));
        let area = load(&base(r#","declared_area_m2":0"#));
        assert!(matches!(area, Err(MapError::InvalidDeclaredArea(_))));
        assert!(matches!(
            load(r#"{"name":"t","nodes":[]}"#),
            Err(MapError::Empty)
        ));
        assert!(matches!(
            load(r#"{"name":"t","nodes":[{"id":1,"name":"A","x_m":0,"y_m":0,"subscribers":-2}]}"#),
            Err(MapError::InvalidSubscribers(NodeId(1), _))
        ));
    }

    #[test]
    fn distances() {
        assert_eq!(distance(&node(1, 0., 0., 0.), &node(2, 3., 4., 0.)), 5.0);
        assert_eq!(distance(&node(1, 7., 7., 0.), &node(2, 7., 7., 0.)), 0.0);
        let d = distance(&node(1, 0., 0., 0.), &node(2, 1., 1., 0.));
        assert!((d - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn hull_areas() {
        let square = [
            node(1, 0., 0., 0.),
            node(2, 1., 0., 0.),
            node(3, 1., 1., 0.),
            node(4, 0., 1., 0.),
        ];
        assert_eq!(region_area(&square), 1.0);
        assert_eq!(region_area(&square[..2]), 0.0);
        let tri = [
            node(1, 0., 0., 0.),
            node(2, 4., 0., 0.),
            node(3, 0., 3., 0.),
        ];
        assert_eq!(region_area(&tri), 6.0);
        let line = [
            node(1, 0., 0., 0.),
            node(2, 1., 1., 0.),
            node(3, 2., 2., 0.),
        ];
        assert_eq!(region_area(&line), 0.0);
    }

    #[test]
    fn subscriber_sums() {
        assert_eq!(total_subscribers(&[]), 0.0);
        assert_eq!(
            total_subscribers(&[node(1, 0., 0., 10.), node(2, 0., 0., 2.)]),
            12.0
        );
    }

    #[test]
    fn map_area_fallbacks() {
        let mut map = DigitalMap {
            name: "m".into(),
            declared_area_m2: Some(337_800.0),
            nodes: vec![node(1, 0., 0., 0.)],
            streets: vec![],
        };
        assert_eq!(map_area(&map), 337_800.0);
        map.declared_area_m2 = None;
        assert_eq!(map_area(&map), 0.0);
        map.nodes = vec![
            node(1, 0., 0., 0.),
            node(2, 1., 0., 0.),
            node(3, 1., 1., 0.),
            node(4, 0., 1., 0.),
        ];
        assert_eq!(map_area(&map), 1.0);
    }

    #[test]
    fn to_file_reload_does_not_double_count() {
        let map = load(
            r#"{"name":"t","nodes":[
                {"id":1,"name":"A","x_m":0,"y_m":0,"subscribers":10},
                {"id":2,"name":"B","x_m":1,"y_m":0,"subscribers":0}],
              "streets":[{"id":1,"name":"AB","from":1,"to":2,"load":4}]}"#,
        )
        .unwrap();
        let text = serde_json::to_string(&map.to_file()).unwrap();
        let again = load(&text).unwrap();
        assert_eq!(again.nodes, map.nodes);
    }
}
