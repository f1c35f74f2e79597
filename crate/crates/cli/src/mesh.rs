//! Triangle-mesh export of qubit confidence polytopes clipped to the
//! Bloch ball.
//!
//! The region is convex, so its boundary is meshed as the convex hull
//! of an exhaustive boundary point set: plane-triple vertices, the
//! plane-pair edge points on the sphere, discretised facet/sphere
//! intersection circles, and a 5°-spaced spherical grid restricted to
//! the feasible cap. A box polytope strictly inside the ball therefore
//! meshes to exactly its 8 corners.

use serde_json::json;

use tomopoly::error::Error;
use tomopoly::polytope::ConfidencePolytope;

/// Angular resolution of spherical patches, in degrees.
const ANGLE_STEP_DEG: f64 = 5.0;
/// Feasibility slack for boundary points.
const FEAS_TOL: f64 = 1e-9;
/// Points closer than this merge into one mesh vertex.
const DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriangleMesh {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "vertices": self.vertices,
            "triangles": self.triangles,
        })
    }
}

type Plane = ([f64; 3], f64); // a·r ≤ b with |a| > 0

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Effective planes of the polytope: vacuous (clamped) facets contain
/// the whole ball and contribute nothing; zero normals are skipped.
fn planes_of(poly: &ConfidencePolytope) -> Vec<Plane> {
    poly.facets()
        .iter()
        .filter(|f| !f.clamped)
        .filter_map(|f| {
            let a = [f.normal[0], f.normal[1], f.normal[2]];
            if norm(&a) < 1e-14 {
                None
            } else {
                Some((a, f.offset))
            }
        })
        .collect()
}

fn feasible(planes: &[Plane], p: &[f64; 3], skip: &[usize]) -> bool {
    planes
        .iter()
        .enumerate()
        .all(|(i, (a, b))| skip.contains(&i) || dot(a, p) <= b + FEAS_TOL)
}

/// Solve the 3×3 system a_i·x = b_i for three planes.
fn plane_triple_point(p0: &Plane, p1: &Plane, p2: &Plane) -> Option<[f64; 3]> {
    let det = dot(&p0.0, &cross(&p1.0, &p2.0));
    if det.abs() < 1e-10 {
        return None;
    }
    let x = [
        p0.1 * (p1.0[1] * p2.0[2] - p1.0[2] * p2.0[1])
            + p1.1 * (p2.0[1] * p0.0[2] - p2.0[2] * p0.0[1])
            + p2.1 * (p0.0[1] * p1.0[2] - p0.0[2] * p1.0[1]),
        p0.1 * (p1.0[2] * p2.0[0] - p1.0[0] * p2.0[2])
            + p1.1 * (p2.0[2] * p0.0[0] - p2.0[0] * p0.0[2])
            + p2.1 * (p0.0[2] * p1.0[0] - p0.0[0] * p1.0[2]),
        p0.1 * (p1.0[0] * p2.0[1] - p1.0[1] * p2.0[0])
            + p1.1 * (p2.0[0] * p0.0[1] - p2.0[1] * p0.0[0])
            + p2.1 * (p0.0[0] * p1.0[1] - p0.0[1] * p1.0[0]),
    ];
    Some([x[0] / det, x[1] / det, x[2] / det])
}

/// Two orthonormal vectors perpendicular to `n`.
fn tangent_frame(n: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let pick = if n[0].abs() <= n[1].abs() && n[0].abs() <= n[2].abs() {
        [1.0, 0.0, 0.0]
    } else if n[1].abs() <= n[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let mut u = cross(n, &pick);
    let un = norm(&u);
    u = [u[0] / un, u[1] / un, u[2] / un];
    let v = cross(n, &u);
    let vn = norm(&v);
    (u, [v[0] / vn, v[1] / vn, v[2] / vn])
}

fn boundary_points(planes: &[Plane]) -> Vec<[f64; 3]> {
    let mut pts: Vec<[f64; 3]> = Vec::new();
    let k = planes.len();
    // Plane-triple corners inside the ball.
    for i in 0..k {
        for j in (i + 1)..k {
            for l in (j + 1)..k {
                if let Some(p) = plane_triple_point(&planes[i], &planes[j], &planes[l]) {
                    if norm(&p) <= 1.0 + FEAS_TOL && feasible(planes, &p, &[i, j, l]) {
                        pts.push(p);
                    }
                }
            }
        }
    }
    // Plane-pair edge lines hitting the sphere.
    for i in 0..k {
        for j in (i + 1)..k {
            let (ai, bi) = (&planes[i].0, planes[i].1);
            let (aj, bj) = (&planes[j].0, planes[j].1);
            let dir = cross(ai, aj);
            let dn = norm(&dir);
            if dn < 1e-12 {
                continue;
            }
            let dir = [dir[0] / dn, dir[1] / dn, dir[2] / dn];
            // Point on the intersection line: x = α a_i + β a_j.
            let aii = dot(ai, ai);
            let ajj = dot(aj, aj);
            let aij = dot(ai, aj);
            let det = aii * ajj - aij * aij;
            if det.abs() < 1e-14 {
                continue;
            }
            let alpha = (bi * ajj - bj * aij) / det;
            let beta = (bj * aii - bi * aij) / det;
            let p0 = [
                alpha * ai[0] + beta * aj[0],
                alpha * ai[1] + beta * aj[1],
                alpha * ai[2] + beta * aj[2],
            ];
            // |p0 + t dir| = 1.
            let c = dot(&p0, &p0) - 1.0;
            let bq = dot(&p0, &dir);
            let disc = bq * bq - c;
            if disc < 0.0 {
                continue;
            }
            for sgn in [-1.0, 1.0] {
                let t = -bq + sgn * disc.sqrt();
                let p = [p0[0] + t * dir[0], p0[1] + t * dir[1], p0[2] + t * dir[2]];
                if feasible(planes, &p, &[i, j]) {
                    pts.push(p);
                }
            }
        }
    }
    // Facet/sphere circles at the angular resolution.
    let steps = (360.0 / ANGLE_STEP_DEG) as usize;
    for (i, (a, b)) in planes.iter().enumerate() {
        let an = norm(a);
        let h = b / an;
        if h.abs() >= 1.0 {
            continue;
        }
        let nhat = [a[0] / an, a[1] / an, a[2] / an];
        let radius = (1.0 - h * h).sqrt();
        let (u, v) = tangent_frame(&nhat);
        for s in 0..steps {
            let th = 2.0 * std::f64::consts::PI * s as f64 / steps as f64;
            let (ct, st) = (th.cos(), th.sin());
            let p = [
                h * nhat[0] + radius * (ct * u[0] + st * v[0]),
                h * nhat[1] + radius * (ct * u[1] + st * v[1]),
                h * nhat[2] + radius * (ct * u[2] + st * v[2]),
            ];
            if feasible(planes, &p, &[i]) {
                pts.push(p);
            }
        }
    }
    // Spherical grid restricted to the feasible cap.
    let lat_steps = (180.0 / ANGLE_STEP_DEG) as usize;
    for li in 0..=lat_steps {
        let lat = -std::f64::consts::FRAC_PI_2
            + std::f64::consts::PI * li as f64 / lat_steps as f64;
        let (cl, sl) = (lat.cos(), lat.sin());
        let lon_steps = if li == 0 || li == lat_steps { 1 } else { steps };
        for lo in 0..lon_steps {
            let lon = 2.0 * std::f64::consts::PI * lo as f64 / lon_steps as f64;
            let p = [cl * lon.cos(), cl * lon.sin(), sl];
            if feasible(planes, &p, &[]) {
                pts.push(p);
            }
        }
    }
    pts
}

fn dedup(points: Vec<[f64; 3]>) -> Vec<[f64; 3]> {
    let mut out: Vec<[f64; 3]> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| norm(&sub(&p, q)) < DEDUP_TOL) {
            out.push(p);
        }
    }
    out
}

// ---- incremental 3-D convex hull ----

struct HullFace {
    vs: [usize; 3],
    normal: [f64; 3],
    offset: f64,
    alive: bool,
}

/// Face with the winding taken as given; normal follows the winding.
fn face_wound(pts: &[[f64; 3]], vs: [usize; 3]) -> HullFace {
    let e1 = sub(&pts[vs[1]], &pts[vs[0]]);
    let e2 = sub(&pts[vs[2]], &pts[vs[0]]);
    let n = cross(&e1, &e2);
    let offset = dot(&n, &pts[vs[0]]);
    HullFace {
        vs,
        normal: n,
        offset,
        alive: true,
    }
}

/// Face oriented away from an interior reference point; used only for
/// the seed tetrahedron. Horizon fans keep their edge winding, which
/// preserves the outward orientation automatically.
fn face_from(pts: &[[f64; 3]], vs: [usize; 3], inside: &[f64; 3]) -> HullFace {
    let f = face_wound(pts, vs);
    if dot(&f.normal, inside) > f.offset {
        let mut vs = vs;
        vs.swap(1, 2);
        face_wound(pts, vs)
    } else {
        f
    }
}

fn hull_3d(pts: &[[f64; 3]]) -> Result<Vec<[usize; 3]>, Error> {
    let n = pts.len();
    if n < 4 {
        return Err(Error::DegenerateMesh(format!(
            "{n} boundary points cannot bound a volume"
        )));
    }
    // Seed tetrahedron: two extreme points, the farthest from their
    // line, and the farthest from their plane.
    let mut i0 = 0;
    let mut i1 = 0;
    let mut best = -1.0;
    for ax in 0..3 {
        let lo = (0..n).min_by(|&a, &b| pts[a][ax].partial_cmp(&pts[b][ax]).unwrap()).unwrap();
        let hi = (0..n).max_by(|&a, &b| pts[a][ax].partial_cmp(&pts[b][ax]).unwrap()).unwrap();
        let d = norm(&sub(&pts[hi], &pts[lo]));
        if d > best {
            best = d;
            i0 = lo;
            i1 = hi;
        }
    }
    if best < DEDUP_TOL {
        return Err(Error::DegenerateMesh("all points coincide".into()));
    }
    let axis = sub(&pts[i1], &pts[i0]);
    let i2 = (0..n)
        .max_by(|&a, &b| {
            let da = norm(&cross(&sub(&pts[a], &pts[i0]), &axis));
            let db = norm(&cross(&sub(&pts[b], &pts[i0]), &axis));
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    if norm(&cross(&sub(&pts[i2], &pts[i0]), &axis)) < 1e-10 {
        return Err(Error::DegenerateMesh("points are collinear".into()));
    }
    let base_n = cross(&sub(&pts[i1], &pts[i0]), &sub(&pts[i2], &pts[i0]));
    let i3 = (0..n)
        .max_by(|&a, &b| {
            let da = (dot(&base_n, &sub(&pts[a], &pts[i0]))).abs();
            let db = (dot(&base_n, &sub(&pts[b], &pts[i0]))).abs();
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    let height = dot(&base_n, &sub(&pts[i3], &pts[i0])).abs() / norm(&base_n).max(1e-300);
    if height < 1e-10 {
        return Err(Error::DegenerateMesh("points are coplanar".into()));
    }
    let inside = [
        (pts[i0][0] + pts[i1][0] + pts[i2][0] + pts[i3][0]) / 4.0,
        (pts[i0][1] + pts[i1][1] + pts[i2][1] + pts[i3][1]) / 4.0,
        (pts[i0][2] + pts[i1][2] + pts[i2][2] + pts[i3][2]) / 4.0,
    ];
    let mut faces = vec![
        face_from(pts, [i0, i1, i2], &inside),
        face_from(pts, [i0, i1, i3], &inside),
        face_from(pts, [i0, i2, i3], &inside),
        face_from(pts, [i1, i2, i3], &inside),
    ];
    let seed = [i0, i1, i2, i3];
    for p in 0..n {
        if seed.contains(&p) {
            continue;
        }
        // Visible faces.
        let visible: Vec<usize> = faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.alive)
            .filter(|(_, f)| {
                let scale = norm(&f.normal).max(1e-300);
                dot(&f.normal, &pts[p]) - f.offset > 1e-10 * scale
            })
            .map(|(i, _)| i)
            .collect();
        if visible.is_empty() {
            continue;
        }
        // Horizon: directed edges of visible faces whose reverse is not
        // in the visible set.
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for &fi in &visible {
            let [a, b, c] = faces[fi].vs;
            for (u, v) in [(a, b), (b, c), (c, a)] {
                if let Some(pos) = edges.iter().position(|&(x, y)| x == v && y == u) {
                    edges.swap_remove(pos);
                } else {
                    edges.push((u, v));
                }
            }
        }
        for &fi in &visible {
            faces[fi].alive = false;
        }
        for (u, v) in edges {
            faces.push(face_wound(pts, [u, v, p]));
        }
    }
    Ok(faces
        .into_iter()
        .filter(|f| f.alive)
        .map(|f| f.vs)
        .collect())
}

/// Mesh the qubit region bounded by the polytope facets and the Bloch
/// sphere. Every emitted vertex satisfies all facets and |r| ≤ 1 + 1e−9.
pub fn mesh_qubit_polytope(poly: &ConfidencePolytope) -> Result<TriangleMesh, Error> {
    if poly.dim() != 2 {
        return Err(Error::NonQubit(poly.dim()));
    }
    let planes = planes_of(poly);
    let pts = dedup(boundary_points(&planes));
    if pts.is_empty() {
        return Err(Error::EmptyRegion(
            "no feasible boundary points; the facet system excludes the ball".into(),
        ));
    }
    let tris = hull_3d(&pts)?;
    // Keep only referenced vertices, in first-use order.
    let mut remap = vec![usize::MAX; pts.len()];
    let mut vertices = Vec::new();
    let mut triangles = Vec::with_capacity(tris.len());
    for t in tris {
        let mut out = [0usize; 3];
        for (slot, &vi) in out.iter_mut().zip(&t) {
            if remap[vi] == usize::MAX {
                remap[vi] = vertices.len();
                vertices.push(pts[vi]);
            }
            *slot = remap[vi];
        }
        triangles.push(out);
    }
    Ok(TriangleMesh {
        vertices,
        triangles,
    })
}
