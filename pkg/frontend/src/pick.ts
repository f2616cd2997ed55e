import { MeshData, faceVertices } from "./mesh";
import { Vec3, cross, dot, sub } from "./vec";

/** A ray-mesh intersection: the hit face, the surface point, and the ray
 * parameter (distance along a unit direction). */
export interface SurfaceHit {
  face: number;
  point: Vec3;
  t: number;
}

const EPS = 1e-12;

/** Moller-Trumbore ray-triangle test. Returns the ray parameter t, or
 * null when the ray misses (including hits behind the origin). Backfaces
 * count as hits so picking works from inside open regions. */
export function rayTriangle(
  origin: Vec3,
  dir: Vec3,
  v0: Vec3,
  v1: Vec3,
  v2: Vec3,
): number | null {
  const e1 = sub(v1, v0);
  const e2 = sub(v2, v0);
  const p = cross(dir, e2);
  const det = dot(e1, p);
  if (Math.abs(det) < EPS) return null;
  const inv = 1 / det;
  const s = sub(origin, v0);
  const u = dot(s, p) * inv;
  if (u < 0 || u > 1) return null;
  const q = cross(s, e1);
  const v = dot(dir, q) * inv;
  if (v < 0 || u + v > 1) return null;
  const t = dot(e2, q) * inv;
  return t > EPS ? t : null;
}

/** Closest ray hit over all faces. Linear scan; the meshes served here
 * stay in the low thousands of faces. */
export function pickSurface(
  mesh: MeshData,
  origin: Vec3,
  dir: Vec3,
): SurfaceHit | null {
  let best: SurfaceHit | null = null;
  for (let f = 0; f < mesh.faces.length; f++) {
    const [v0, v1, v2] = faceVertices(mesh, f);
    const t = rayTriangle(origin, dir, v0, v1, v2);
    if (t !== null && (best === null || t < best.t)) {
      best = {
        face: f,
        t,
        point: [
          origin[0] + dir[0] * t,
          origin[1] + dir[1] * t,
          origin[2] + dir[2] * t,
        ],
      };
    }
  }
  return best;
}
