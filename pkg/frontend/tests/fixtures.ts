import { MeshData } from "../src/mesh";

/** Unit octahedron: 6 vertices, 8 faces. Faces 0-3 touch the +z apex,
 * faces 4-7 the -z apex, so the equator splits the face list in half. */
export function octahedron(): MeshData {
  return {
    vertices: [
      [1, 0, 0],
      [-1, 0, 0],
      [0, 1, 0],
      [0, -1, 0],
      [0, 0, 1],
      [0, 0, -1],
    ],
    faces: [
      [0, 2, 4],
      [2, 1, 4],
      [1, 3, 4],
      [3, 0, 4],
      [2, 0, 5],
      [1, 2, 5],
      [3, 1, 5],
      [0, 3, 5],
    ],
  };
}

export const TOP_FACES = [0, 1, 2, 3];
export const BOTTOM_FACES = [4, 5, 6, 7];

/** Hemisphere paint: top faces included, bottom excluded. */
export function hemisphereMask(): boolean[] {
  return octahedron().faces.map((_, f) => TOP_FACES.includes(f));
}
