//! Zero curves on S² by marching triangles over a geodesic icosahedral mesh.
//!
//! Each of the 20 faces is subdivided independently into `f²` triangles
//! (`f = 2^level`). Vertices on shared icosahedron edges are generated by a
//! single canonical formula and carry global ids, so neighbouring faces see
//! bitwise identical positions and signs and the crossing segments glue into
//! closed loops without a global mesh in memory.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::function::SphereFunction;
use crate::sphere::{arc_distance, normalize3, Rotation3};

/// Arc-length tolerance for crossing points.
pub const CROSSING_TOLERANCE: f64 = 1e-10;

/// Highest accepted subdivision level.
pub const MAX_LEVEL: u32 = 10;

/// A closed polyline on S²; the first vertex is not repeated at the end.
pub type Polyline = Vec<[f64; 3]>;

struct Icosahedron {
    vertices: [[f64; 3]; 12],
    faces: Vec<[usize; 3]>,
    edges: HashMap<(usize, usize), usize>,
}

fn icosahedron() -> &'static Icosahedron {
    static ICO: OnceLock<Icosahedron> = OnceLock::new();
    ICO.get_or_init(|| {
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        let mut raw = Vec::with_capacity(12);
        for s1 in [-1.0, 1.0] {
            for s2 in [-1.0, 1.0] {
                raw.push([0.0, s1, s2 * g]);
                raw.push([s1, s2 * g, 0.0]);
                raw.push([s2 * g, 0.0, s1]);
            }
        }
        // a fixed generic rotation keeps mesh edges off coordinate planes
        let tilt = Rotation3::about_axis([0.31, 0.72, 0.23], 0.61);
        let mut vertices = [[0.0; 3]; 12];
        for (v, r) in vertices.iter_mut().zip(&raw) {
            let u = normalize3(*r);
            let w = tilt.apply(&u);
            *v = [w[0], w[1], w[2]];
        }
        let d2 = |a: &[f64; 3], b: &[f64; 3]| (0..3).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>();
        let edge2 = (1..12).map(|j| d2(&vertices[0], &vertices[j])).fold(f64::INFINITY, f64::min);
        let adjacent = |i: usize, j: usize| d2(&vertices[i], &vertices[j]) < 1.01 * edge2;
        let mut faces = Vec::new();
        let mut edges = HashMap::new();
        for i in 0..12 {
            for j in i + 1..12 {
                if !adjacent(i, j) {
                    continue;
                }
                let id = edges.len();
                edges.insert((i, j), id);
                for k in j + 1..12 {
                    if adjacent(i, k) && adjacent(j, k) {
                        faces.push([i, j, k]);
                    }
                }
            }
        }
        debug_assert_eq!((faces.len(), edges.len()), (20, 30));
        Icosahedron { vertices, faces, edges }
    })
}

/// Default level `⌈log₂(8d)⌉`.
pub fn default_level(d: usize) -> u32 {
    let target = (8 * d.max(1)) as f64;
    target.log2().ceil() as u32
}

/// Coarsest level whose edges are at most four neck widths `√(δ/(d²‖p‖_BW))`,
/// the distance at which two branches of the zero set can approach each
/// other near a point where `δ(p)` is attained.
pub fn resolving_level(d: usize, delta: f64, bw: f64) -> u32 {
    let d = d.max(1) as f64;
    let neck = (delta / (d * d * bw)).sqrt();
    let mut level = 0;
    while edge_length(level) > 4.0 * neck && level <= MAX_LEVEL {
        level += 1;
    }
    level
}

/// Longest mesh edge at a given level, in radians.
pub fn edge_length(level: u32) -> f64 {
    // icosahedron edge angle is atan(2); the central subdivision edges are
    // the longest ones after projection
    let base = 2f64.atan();
    1.3 * base / (1u64 << level) as f64
}

fn lerp(a: &[f64; 3], b: &[f64; 3], t: f64) -> [f64; 3] {
    normalize3([
        (1.0 - t) * a[0] + t * b[0],
        (1.0 - t) * a[1] + t * b[1],
        (1.0 - t) * a[2] + t * b[2],
    ])
}

struct Crossing {
    a: [f64; 3],
    b: [f64; 3],
    a_positive: bool,
}

/// Sign-change segments of one mesh level, keyed by the crossed mesh edge.
struct Segments {
    segments: Vec<[(u64, u64); 2]>,
    crossings: HashMap<(u64, u64), Crossing>,
}

fn march(f: &dyn SphereFunction, level: u32, keep_positions: bool) -> Segments {
    let ico = icosahedron();
    let fr = 1usize << level;
    let fr64 = fr as u64;
    let inner = (fr.saturating_sub(1) * fr.saturating_sub(2) / 2) as u64;
    let interior_base = 12 + 30 * (fr64 - 1);
    let row = |i: usize| i * (fr + 1) - i * (i.saturating_sub(1)) / 2;
    let idx = |i: usize, j: usize| row(i) + j;
    let npts = (fr + 1) * (fr + 2) / 2;

    let mut out = Segments { segments: Vec::new(), crossings: HashMap::new() };
    let mut ids = vec![0u64; npts];
    let mut pos = vec![[0.0; 3]; npts];
    let mut sign = vec![false; npts];

    for (fi, face) in ico.faces.iter().enumerate() {
        let [a, b, c] = *face;
        let (va, vb, vc) = (&ico.vertices[a], &ico.vertices[b], &ico.vertices[c]);
        let edge_point = |u: usize, v: usize, k: usize| -> (u64, [f64; 3]) {
            let e = ico.edges[&(u, v)] as u64;
            let (pu, pv) = (&ico.vertices[u], &ico.vertices[v]);
            let (wu, wv) = ((fr - k) as f64, k as f64);
            let p = normalize3([
                wu * pu[0] + wv * pv[0],
                wu * pu[1] + wv * pv[1],
                wu * pu[2] + wv * pv[2],
            ]);
            (12 + e * (fr64 - 1) + (k as u64 - 1), p)
        };
        let mut interior = 0u64;
        for i in 0..=fr {
            for j in 0..=fr - i {
                let (id, p) = if i == 0 && j == 0 {
                    (a as u64, *va)
                } else if i == fr {
                    (b as u64, *vb)
                } else if j == fr {
                    (c as u64, *vc)
                } else if j == 0 {
                    edge_point(a, b, i)
                } else if i == 0 {
                    edge_point(a, c, j)
                } else if i + j == fr {
                    edge_point(b, c, j)
                } else {
                    let w = (fr - i - j) as f64;
                    let (wi, wj) = (i as f64, j as f64);
                    let p = normalize3([
                        w * va[0] + wi * vb[0] + wj * vc[0],
                        w * va[1] + wi * vb[1] + wj * vc[1],
                        w * va[2] + wi * vb[2] + wj * vc[2],
                    ]);
                    let id = interior_base + fi as u64 * inner + interior;
                    interior += 1;
                    (id, p)
                };
                let k = idx(i, j);
                ids[k] = id;
                pos[k] = p;
                sign[k] = f.value(&p) >= 0.0;
            }
        }
        let mut emit = |tri: [usize; 3]| {
            let s = tri.map(|k| sign[k]);
            if s[0] == s[1] && s[1] == s[2] {
                return;
            }
            let mut keys = Vec::with_capacity(2);
            for (x, y) in [(0, 1), (1, 2), (2, 0)] {
                if s[x] != s[y] {
                    let (kx, ky) = (tri[x], tri[y]);
                    let key = (ids[kx].min(ids[ky]), ids[kx].max(ids[ky]));
                    if keep_positions {
                        out.crossings.entry(key).or_insert_with(|| Crossing {
                            a: pos[kx],
                            b: pos[ky],
                            a_positive: sign[kx],
                        });
                    }
                    keys.push(key);
                }
            }
            out.segments.push([keys[0], keys[1]]);
        };
        for i in 0..fr {
            for j in 0..fr - i {
                emit([idx(i, j), idx(i + 1, j), idx(i, j + 1)]);
                if i + j + 2 <= fr {
                    emit([idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]);
                }
            }
        }
    }
    out
}

/// Chains segments into loops of crossed-edge keys.
fn loops(segments: &[[(u64, u64); 2]]) -> Result<Vec<Vec<(u64, u64)>>> {
    let mut incident: HashMap<(u64, u64), Vec<usize>> = HashMap::new();
    for (s, seg) in segments.iter().enumerate() {
        for key in seg {
            incident.entry(*key).or_default().push(s);
        }
    }
    if incident.values().any(|v| v.len() != 2) {
        return Err(Error::Resolution("crossed mesh edge not shared by exactly two triangles".into()));
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let first = segments[start][0];
        let mut chain = vec![first];
        let mut key = segments[start][1];
        let mut seg = start;
        while key != first {
            chain.push(key);
            let next = incident[&key].iter().copied().find(|&t| t != seg).expect("two incidences");
            used[next] = true;
            let [k0, k1] = segments[next];
            key = if k0 == key { k1 } else { k0 };
            seg = next;
        }
        out.push(chain);
    }
    Ok(out)
}

fn locate(f: &dyn SphereFunction, c: &Crossing) -> [f64; 3] {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while arc_distance(&lerp(&c.a, &c.b, lo), &lerp(&c.a, &c.b, hi)) > CROSSING_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if (f.value(&lerp(&c.a, &c.b, mid)) >= 0.0) == c.a_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lerp(&c.a, &c.b, 0.5 * (lo + hi))
}

/// Number of zero curves seen at a mesh level.
pub fn component_count(f: &dyn SphereFunction, level: u32) -> Result<usize> {
    Ok(loops(&march(f, level, false).segments)?.len())
}

/// Outcome of a curve extraction.
#[derive(Debug, Clone)]
pub struct CurveSet {
    pub curves: Vec<Polyline>,
    pub level: u32,
    pub edge_length: f64,
}

/// Closed zero curves of `f` on S².
///
/// The level is accepted only when the next finer level sees the same
/// number of loops; otherwise one finer level is tried before giving up.
pub fn extract_curves(f: &dyn SphereFunction, level: Option<u32>) -> Result<CurveSet> {
    if f.n() != 2 {
        return Err(Error::UnsupportedDimension(f.n()));
    }
    let start = level.unwrap_or_else(|| default_level(f.degree()));
    if start > MAX_LEVEL {
        return Err(Error::InvalidInput(format!("subdivision level {start} exceeds {MAX_LEVEL}")));
    }
    let mut counts = Vec::new();
    let mut lvl = start;
    let mut current = march(f, lvl, true);
    let mut current_loops = loops(&current.segments)?;
    counts.push((lvl, current_loops.len()));
    loop {
        if lvl + 1 > MAX_LEVEL || lvl > start + 1 {
            return Err(Error::Resolution(format!(
                "component count unstable under refinement: {}",
                counts.iter().map(|(l, c)| format!("level {l}: {c}")).collect::<Vec<_>>().join(", ")
            )));
        }
        let finer = component_count(f, lvl + 1)?;
        counts.push((lvl + 1, finer));
        if finer == current_loops.len() {
            break;
        }
        lvl += 1;
        current = march(f, lvl, true);
        current_loops = loops(&current.segments)?;
    }
    let curves = current_loops
        .iter()
        .map(|chain| chain.iter().map(|key| locate(f, &current.crossings[key])).collect())
        .collect();
    Ok(CurveSet { curves, level: lvl, edge_length: edge_length(lvl) })
}

/// `curve,vertex,x,y,z` rows for external plotting.
pub fn curves_csv(curves: &[Polyline]) -> String {
    let mut s = String::from("curve,vertex,x,y,z\n");
    for (c, poly) in curves.iter().enumerate() {
        for (v, p) in poly.iter().enumerate() {
            s.push_str(&format!("{c},{v},{:.17e},{:.17e},{:.17e}\n", p[0], p[1], p[2]));
        }
    }
    s
}
