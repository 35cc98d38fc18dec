//! Seeded synthetic worlds and the graph JSON file format.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::navgraph::{NavGraph, NodeId, NodeRecord};
use crate::rng::{self, SplitMix64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WorldKind {
    GridRooms,
    RandomGeometric,
    /// Euclidean minimum spanning tree of a random geometric instance.
    RandomTree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    pub kind: WorldKind,
    /// Node count for geometric and tree worlds; grid worlds derive it.
    pub n_nodes: usize,
    pub feature_dim: usize,
    pub n_categories: usize,
    pub noise_sigma: f64,
    /// Edge radius in meters (geometric and tree worlds).
    pub connect_radius: f64,
    /// Side of the square the geometric points are drawn in, in meters.
    pub extent: f64,
    pub room_rows: usize,
    pub room_cols: usize,
    /// Nodes per room side; a room holds `room_size²` nodes.
    pub room_size: usize,
    /// Fraction of boundary grid edges kept as doorways between adjacent rooms.
    pub doorway_fraction: f64,
    /// Uniform position jitter (meters) around grid points spaced 1 m apart.
    pub jitter: f64,
    pub seed: u64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            kind: WorldKind::GridRooms,
            n_nodes: 30,
            feature_dim: 12,
            n_categories: 9,
            noise_sigma: 0.1,
            connect_radius: 1.5,
            extent: 5.0,
            room_rows: 3,
            room_cols: 3,
            room_size: 2,
            doorway_fraction: 0.5,
            jitter: 0.1,
            seed: 0,
        }
    }
}

const GEOMETRIC_RETRIES: usize = 100;

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::UnsatisfiableConfig(m.to_string()));
        if self.feature_dim == 0 || self.n_categories == 0 {
            return bad("feature_dim and n_categories must be positive");
        }
        if self.n_categories > self.feature_dim {
            return bad("n_categories must not exceed feature_dim");
        }
        if !(self.noise_sigma >= 0.0) {
            return bad("noise_sigma must be nonnegative");
        }
        match self.kind {
            WorldKind::GridRooms => {
                if self.room_rows == 0 || self.room_cols == 0 || self.room_size == 0 {
                    return bad("room grid sizes must be positive");
                }
                if !(0.0..0.5).contains(&self.jitter) {
                    return bad("jitter must be in [0, 0.5)");
                }
                if !(0.0..=1.0).contains(&self.doorway_fraction) {
                    return bad("doorway_fraction must be in [0, 1]");
                }
                if self.doorway_fraction == 0.0 && self.room_rows * self.room_cols > 1 {
                    return bad("zero doorways would disconnect the rooms");
                }
            }
            WorldKind::RandomGeometric | WorldKind::RandomTree => {
                if self.n_nodes == 0 || !(self.extent > 0.0) || !(self.connect_radius >= 0.0) {
                    return bad("n_nodes, extent must be positive and connect_radius nonnegative");
                }
            }
        }
        Ok(())
    }
}

pub fn generate(cfg: &WorldConfig) -> Result<NavGraph> {
    match cfg.kind {
        WorldKind::GridRooms => gen_grid_rooms(cfg),
        WorldKind::RandomGeometric => gen_random_geometric(cfg),
        WorldKind::RandomTree => gen_random_tree(cfg),
    }
}

/// One-hot category embedding in the first `n_categories` dims of a `dim`-vector.
pub fn category_embedding(category: usize, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[category] = 1.0;
    v
}

fn noisy_feature(category: usize, cfg: &WorldConfig, rng: &mut SplitMix64) -> Vec<f64> {
    let mut f = category_embedding(category, cfg.feature_dim);
    if cfg.noise_sigma > 0.0 {
        for x in &mut f {
            *x += cfg.noise_sigma * rng::normal(rng);
        }
    }
    f
}

/// Rooms laid out on a jittered unit grid. Grid neighbors inside a room are
/// always connected; a fraction of the grid edges crossing each shared room
/// wall (at least one) are kept as doorways.
pub fn gen_grid_rooms(cfg: &WorldConfig) -> Result<NavGraph> {
    cfg.validate()?;
    if cfg.kind != WorldKind::GridRooms {
        return Err(Error::UnsatisfiableConfig("gen_grid_rooms needs kind grid-rooms".into()));
    }
    let s = cfg.room_size;
    let (w, h) = (cfg.room_cols * s, cfg.room_rows * s);
    let id = |x: usize, y: usize| y * w + x;
    let room_of = |x: usize, y: usize| (y / s) * cfg.room_cols + x / s;
    let n_rooms = cfg.room_rows * cfg.room_cols;

    // Categories cycle through shuffled decks so each category is used evenly.
    let mut cat_rng = rng::child_rng(cfg.seed, "grid/categories", 0);
    let mut room_cat = Vec::with_capacity(n_rooms);
    while room_cat.len() < n_rooms {
        let mut deck: Vec<usize> = (0..cfg.n_categories).collect();
        for i in (1..deck.len()).rev() {
            deck.swap(i, cat_rng.random_range(0..=i));
        }
        room_cat.extend(deck);
    }
    room_cat.truncate(n_rooms);

    let mut pos_rng = rng::child_rng(cfg.seed, "grid/positions", 0);
    let mut feat_rng = rng::child_rng(cfg.seed, "grid/features", 0);
    let mut nodes = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let jx = pos_rng.random_range(-1.0..=1.0) * cfg.jitter;
            let jy = pos_rng.random_range(-1.0..=1.0) * cfg.jitter;
            let category = room_cat[room_of(x, y)];
            nodes.push(NodeRecord {
                id: id(x, y),
                position: [x as f64 + jx, y as f64 + jy],
                feature: noisy_feature(category, cfg, &mut feat_rng),
                category,
            });
        }
    }

    let mut edges = Vec::new();
    // Doorway candidates grouped by the (room, room) wall they cross.
    let mut walls: std::collections::BTreeMap<(usize, usize), Vec<(NodeId, NodeId)>> = Default::default();
    for y in 0..h {
        for x in 0..w {
            for (nx, ny) in [(x + 1, y), (x, y + 1)] {
                if nx >= w || ny >= h {
                    continue;
                }
                let (a, b) = (id(x, y), id(nx, ny));
                let (ra, rb) = (room_of(x, y), room_of(nx, ny));
                if ra == rb {
                    edges.push((a, b));
                } else {
                    walls.entry((ra.min(rb), ra.max(rb))).or_default().push((a, b));
                }
            }
        }
    }
    let mut door_rng = rng::child_rng(cfg.seed, "grid/doorways", 0);
    for mut cands in walls.into_values() {
        let keep = ((cfg.doorway_fraction * cands.len() as f64).ceil() as usize).clamp(1, cands.len());
        for i in 0..keep {
            let j = door_rng.random_range(i..cands.len());
            cands.swap(i, j);
        }
        edges.extend_from_slice(&cands[..keep]);
    }
    NavGraph::build(nodes, &edges)
}

fn geometric_points(cfg: &WorldConfig, attempt: usize) -> Vec<[f64; 2]> {
    let mut r = rng::child_rng(cfg.seed, "geometric/points", attempt as u64);
    (0..cfg.n_nodes)
        .map(|_| [r.random::<f64>() * cfg.extent, r.random::<f64>() * cfg.extent])
        .collect()
}

fn geometric_nodes(cfg: &WorldConfig, points: &[[f64; 2]], attempt: usize) -> Vec<NodeRecord> {
    let mut anchor_rng = rng::child_rng(cfg.seed, "geometric/anchors", attempt as u64);
    let anchors: Vec<[f64; 2]> = (0..cfg.n_categories)
        .map(|_| [anchor_rng.random::<f64>() * cfg.extent, anchor_rng.random::<f64>() * cfg.extent])
        .collect();
    let mut feat_rng = rng::child_rng(cfg.seed, "geometric/features", attempt as u64);
    points
        .iter()
        .enumerate()
        .map(|(id, &p)| {
            let category = (0..anchors.len())
                .min_by(|&a, &b| {
                    let da = (p[0] - anchors[a][0]).hypot(p[1] - anchors[a][1]);
                    let db = (p[0] - anchors[b][0]).hypot(p[1] - anchors[b][1]);
                    da.total_cmp(&db)
                })
                .unwrap_or(0);
            NodeRecord { id, position: p, feature: noisy_feature(category, cfg, &mut feat_rng), category }
        })
        .collect()
}

fn radius_edges(points: &[[f64; 2]], radius: f64) -> Vec<(NodeId, NodeId)> {
    let mut edges = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = (points[i][0] - points[j][0]).hypot(points[i][1] - points[j][1]);
            if d > 0.0 && d <= radius {
                edges.push((i, j));
            }
        }
    }
    edges
}

fn geometric_instance(cfg: &WorldConfig) -> Result<(Vec<NodeRecord>, Vec<(NodeId, NodeId)>)> {
    for attempt in 0..GEOMETRIC_RETRIES {
        let points = geometric_points(cfg, attempt);
        let edges = radius_edges(&points, cfg.connect_radius);
        let nodes = geometric_nodes(cfg, &points, attempt);
        match NavGraph::build(nodes.clone(), &edges) {
            Ok(_) => return Ok((nodes, edges)),
            Err(Error::DisconnectedGraph(_)) | Err(Error::CoincidentPositions(..)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ConnectivityRetriesExhausted(GEOMETRIC_RETRIES))
}

/// Uniform points in an `extent`-sided square joined within `connect_radius`,
/// redrawn with fresh derived seeds until connected.
pub fn gen_random_geometric(cfg: &WorldConfig) -> Result<NavGraph> {
    cfg.validate()?;
    let (nodes, edges) = geometric_instance(cfg)?;
    NavGraph::build(nodes, &edges)
}

/// Euclidean minimum spanning tree (Kruskal) of a connected geometric instance.
pub fn gen_random_tree(cfg: &WorldConfig) -> Result<NavGraph> {
    cfg.validate()?;
    let (nodes, mut edges) = geometric_instance(cfg)?;
    let len = |&(a, b): &(NodeId, NodeId)| {
        let (p, q) = (nodes[a].position, nodes[b].position);
        (p[0] - q[0]).hypot(p[1] - q[1])
    };
    edges.sort_by(|x, y| len(x).total_cmp(&len(y)).then(x.cmp(y)));
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut tree = Vec::with_capacity(nodes.len().saturating_sub(1));
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            tree.push((a, b));
        }
    }
    NavGraph::build(nodes, &tree)
}

// ---------------------------------------------------------------------------
// Graph JSON
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct NodeJson {
    id: NodeId,
    pos: [f64; 2],
    cat: usize,
    feat: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    d: usize,
    nodes: Vec<NodeJson>,
    edges: Vec<[NodeId; 2]>,
}

pub fn graph_to_json(g: &NavGraph) -> String {
    let doc = GraphJson {
        d: g.feature_dim(),
        nodes: g
            .nodes()
            .iter()
            .map(|n| NodeJson { id: n.id, pos: n.position, cat: n.category, feat: n.feature.clone() })
            .collect(),
        edges: g.edges().iter().map(|e| [e.u, e.v]).collect(),
    };
    let mut s = serde_json::to_string(&doc).expect("graph serializes");
    s.push('\n');
    s
}

pub fn graph_from_json(text: &str, path: &Path) -> Result<NavGraph> {
    let doc: GraphJson = serde_json::from_str(text).map_err(|e| Error::schema(path, e))?;
    if let Some(n) = doc.nodes.iter().find(|n| n.feat.len() != doc.d) {
        return Err(Error::schema(path, format!("node {} has {} features, expected d = {}", n.id, n.feat.len(), doc.d)));
    }
    if let Some(e) = doc.edges.iter().find(|e| e[0] >= e[1]) {
        return Err(Error::schema(path, format!("edge [{}, {}] must satisfy u < v", e[0], e[1])));
    }
    let nodes = doc
        .nodes
        .into_iter()
        .map(|n| NodeRecord { id: n.id, position: n.pos, feature: n.feat, category: n.cat })
        .collect();
    let edges: Vec<(NodeId, NodeId)> = doc.edges.iter().map(|e| (e[0], e[1])).collect();
    NavGraph::build(nodes, &edges).map_err(|e| Error::schema(path, e))
}

/// Writes `contents` to `path` through a temp file in the same directory and
/// an atomic rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn save_graph(g: &NavGraph, path: &Path) -> Result<()> {
    write_atomic(path, graph_to_json(g).as_bytes())
}

pub fn load_graph(path: &Path) -> Result<NavGraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    graph_from_json(&text, path)
}
