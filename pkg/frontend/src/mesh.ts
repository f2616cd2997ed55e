import { Vec3 } from "./vec";

/** Triangle mesh as served by the API: vertex rows and face index rows. */
export interface MeshData {
  vertices: number[][];
  faces: number[][];
}

export function vertex(mesh: MeshData, i: number): Vec3 {
  const v = mesh.vertices[i];
  return [v[0], v[1], v[2]];
}

export function faceVertices(mesh: MeshData, f: number): [Vec3, Vec3, Vec3] {
  const [a, b, c] = mesh.faces[f];
  return [vertex(mesh, a), vertex(mesh, b), vertex(mesh, c)];
}

export function faceCentroid(mesh: MeshData, f: number): Vec3 {
  const [a, b, c] = faceVertices(mesh, f);
  return [
    (a[0] + b[0] + c[0]) / 3,
    (a[1] + b[1] + c[1]) / 3,
    (a[2] + b[2] + c[2]) / 3,
  ];
}

export function faceCentroids(mesh: MeshData): Vec3[] {
  return mesh.faces.map((_, f) => faceCentroid(mesh, f));
}

/** Axis-aligned bounding-box diagonal; the length scale for brush radii
 * and tolerance thresholds. */
export function bboxDiagonal(mesh: MeshData): number {
  const lo = [Infinity, Infinity, Infinity];
  const hi = [-Infinity, -Infinity, -Infinity];
  for (const v of mesh.vertices) {
    for (let k = 0; k < 3; k++) {
      if (v[k] < lo[k]) lo[k] = v[k];
      if (v[k] > hi[k]) hi[k] = v[k];
    }
  }
  return Math.hypot(hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]);
}
