//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use navvi_core::geom::{orient, Vec2};
use navvi_core::navmesh::{mesh_from_grid, GridFrame, NavMesh, OccupancyGrid};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn scene_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenes").join(name)
}

pub fn load(name: &str) -> navvi_core::world::SceneDescription {
    let file = std::fs::File::open(scene_path(name)).expect("scene file");
    navvi_core::world::load_scene(file).expect("valid scene")
}

/// Random walkable grid with rectangular obstacles, triangulated. Retries
/// until the mesh is non-trivial and has at most `max_triangles`.
pub fn random_mesh(rng: &mut ChaCha8Rng, max_triangles: usize) -> NavMesh {
    loop {
        let width = rng.gen_range(8..24);
        let depth = rng.gen_range(6..18);
        let frame = GridFrame {
            origin: Vec2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)),
            cell_size: 0.5,
            width,
            depth,
        };
        let mut grid = OccupancyGrid::new_filled(frame, true);
        for _ in 0..rng.gen_range(0..8) {
            let (w, d) = (rng.gen_range(1..5), rng.gen_range(1..5));
            let (i0, j0) = (rng.gen_range(0..width), rng.gen_range(0..depth));
            for i in i0..(i0 + w).min(width) {
                for j in j0..(j0 + d).min(depth) {
                    grid.walkable[frame.index(i, j)] = false;
                }
            }
        }
        let mesh = mesh_from_grid(&grid, 0.0).expect("triangulation");
        if mesh.len() >= 4 && mesh.len() <= max_triangles {
            return mesh;
        }
    }
}

/// Uniform random point inside triangle `t`.
pub fn point_in(rng: &mut ChaCha8Rng, mesh: &NavMesh, t: usize) -> Vec2 {
    let [a, b, c] = mesh.triangle(t);
    let (mut u, mut w): (f64, f64) = (rng.gen(), rng.gen());
    if u + w > 1.0 {
        u = 1.0 - u;
        w = 1.0 - w;
    }
    a + (b - a) * u + (c - a) * w
}

/// Plain O(V²) Dijkstra over triangle centroids, computed straight from the
/// vertex data.
pub fn dijkstra(mesh: &NavMesh, blocked: &[bool], source: usize) -> Vec<f64> {
    let n = mesh.triangles.len();
    let centroid = |t: usize| {
        let tri = mesh.triangles[t];
        let p = |k: usize| mesh.vertices[tri[k] as usize];
        (p(0) + p(1) + p(2)) * (1.0 / 3.0)
    };
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[source] = 0.0;
    loop {
        let mut best = None;
        for t in 0..n {
            if !done[t] && dist[t].is_finite() && best.is_none_or(|b: usize| dist[t] < dist[b]) {
                best = Some(t);
            }
        }
        let Some(u) = best else { break };
        done[u] = true;
        for nb in mesh.neighbors[u].iter().flatten() {
            let w = *nb as usize;
            if blocked[w] {
                continue;
            }
            let d = dist[u] + centroid(u).distance(centroid(w));
            if d < dist[w] {
                dist[w] = d;
            }
        }
    }
    dist
}

fn in_triangle(tri: [Vec2; 3], p: Vec2) -> bool {
    let eps = 1e-12;
    (0..3).all(|k| orient(tri[k], tri[(k + 1) % 3], p) >= -eps)
}

/// Whether segment `a-b` stays inside the union of `tris`.
pub fn segment_in_region(tris: &[[Vec2; 3]], a: Vec2, b: Vec2) -> bool {
    let d = b - a;
    let mut cuts = vec![0.0, 1.0];
    for tri in tris {
        for k in 0..3 {
            let (p, q) = (tri[k], tri[(k + 1) % 3]);
            let e = q - p;
            let denom = d.cross(e);
            if denom.abs() < 1e-15 {
                continue;
            }
            let t = (p - a).cross(e) / denom;
            let s = (p - a).cross(d) / denom;
            if (0.0..=1.0).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&s) {
                cuts.push(t);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2).all(|w| {
        if w[1] - w[0] < 1e-12 {
            return true;
        }
        let mid = a + d * (0.5 * (w[0] + w[1]));
        tris.iter().any(|&tri| in_triangle(tri, mid))
    })
}

/// Whether the corridor touches itself: two non-consecutive triangles share
/// an edge, or share a vertex that the triangles between them do not all
/// have (the corridor wraps round and pinches at that vertex).
pub fn corridor_touches_itself(mesh: &NavMesh, corridor: &[usize]) -> bool {
    let has = |t: usize, v: u32| mesh.triangles[t].contains(&v);
    for (i, &a) in corridor.iter().enumerate() {
        for (j, &b) in corridor.iter().enumerate().skip(i + 2) {
            if mesh.neighbors[a].contains(&Some(b as u32)) {
                return true;
            }
            for &v in &mesh.triangles[a] {
                if has(b, v) && !corridor[i..=j].iter().all(|&t| has(t, v)) {
                    return true;
                }
            }
        }
    }
    false
}

/// Shortest start→goal path inside the union of the corridor triangles,
/// by Dijkstra over a visibility graph of start, goal and every corridor
/// vertex.
pub fn corridor_visibility_shortest(mesh: &NavMesh, corridor: &[usize], start: Vec2, goal: Vec2) -> f64 {
    let tris: Vec<[Vec2; 3]> = corridor.iter().map(|&t| mesh.triangle(t)).collect();
    let mut nodes = vec![start, goal];
    for &t in corridor {
        for &vi in &mesh.triangles[t] {
            let p = mesh.vertices[vi as usize];
            if !nodes.contains(&p) {
                nodes.push(p);
            }
        }
    }
    let n = nodes.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[0] = 0.0;
    loop {
        let mut best = None;
        for i in 0..n {
            if !done[i] && dist[i].is_finite() && best.is_none_or(|b: usize| dist[i] < dist[b]) {
                best = Some(i);
            }
        }
        let Some(u) = best else { break };
        if u == 1 {
            break;
        }
        done[u] = true;
        for w in 0..n {
            if done[w] || w == u {
                continue;
            }
            let d = dist[u] + nodes[u].distance(nodes[w]);
            if d < dist[w] && segment_in_region(&tris, nodes[u], nodes[w]) {
                dist[w] = d;
            }
        }
    }
    dist[1]
}

/// Range of parameters `t ∈ [0, 1]` at which segment `a-b` meets segment
/// `p-q`, or `None` when they miss.
fn crossing_interval(a: Vec2, b: Vec2, p: Vec2, q: Vec2) -> Option<(f64, f64)> {
    let eps = 1e-12;
    let d = b - a;
    let e = q - p;
    let denom = d.cross(e);
    if denom.abs() < 1e-15 {
        // parallel: only a colinear overlap counts
        if (p - a).cross(d).abs() > eps * (1.0 + d.length() * (p - a).length()) {
            return None;
        }
        let dd = d.dot(d);
        if dd == 0.0 {
            let on = (a - p).cross(e).abs() <= eps && (a - p).dot(a - q) <= eps;
            return on.then_some((0.0, 0.0));
        }
        let (t0, t1) = ((p - a).dot(d) / dd, (q - a).dot(d) / dd);
        let (lo, hi) = (t0.min(t1).max(0.0), t0.max(t1).min(1.0));
        return (lo <= hi + eps).then_some((lo, hi.max(lo)));
    }
    let t = (p - a).cross(e) / denom;
    let s = (p - a).cross(d) / denom;
    let tol = 1e-9;
    ((-tol..=1.0 + tol).contains(&t) && (-tol..=1.0 + tol).contains(&s)).then_some((t, t))
}

/// Shortest start→goal path that crosses the corridor's portals in order.
/// Corners can only sit on portal endpoints, so this is a longest-path-free
/// DP over (portal index, endpoint) nodes: an edge is allowed when the
/// straight segment meets every portal in between, in order.
pub fn corridor_portal_shortest(portals: &[(Vec2, Vec2)], start: Vec2, goal: Vec2) -> f64 {
    let mut gates = vec![(start, start)];
    gates.extend_from_slice(portals);
    gates.push((goal, goal));
    let nodes: Vec<(usize, Vec2)> = gates
        .iter()
        .enumerate()
        .flat_map(|(i, &(l, r))| if l == r { vec![(i, l)] } else { vec![(i, l), (i, r)] })
        .collect();
    let mut best = vec![f64::INFINITY; nodes.len()];
    best[0] = 0.0;
    for u in 0..nodes.len() {
        if !best[u].is_finite() {
            continue;
        }
        let (gi, a) = nodes[u];
        for w in u + 1..nodes.len() {
            let (gj, b) = nodes[w];
            if gj <= gi {
                continue;
            }
            let mut at = 0.0;
            let ok = gates[gi + 1..gj].iter().all(|&(p, q)| match crossing_interval(a, b, p, q) {
                Some((lo, hi)) if hi >= at - 1e-9 => {
                    at = lo.max(at);
                    true
                }
                _ => false,
            });
            if ok {
                best[w] = best[w].min(best[u] + a.distance(b));
            }
        }
    }
    *best.last().unwrap()
}
