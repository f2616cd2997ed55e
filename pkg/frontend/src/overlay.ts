import { MeshData } from "./mesh";

/** Per-face classification of a previewed boundary field. Feasible means
 * the signed distance is negative (inside the included region). */
export type FaceClass = "feasible" | "infeasible" | "boundary";

/** Classify each face from per-vertex signed distances: the face value is
 * the mean over its corners, faces within the band of zero render as the
 * boundary. bandFrac scales the band width by the bbox diagonal. */
export function classifyFaces(
  mesh: MeshData,
  vertexDistance: number[],
  diagonal: number,
  bandFrac = 0.02,
): FaceClass[] {
  if (vertexDistance.length !== mesh.vertices.length) {
    throw new Error(
      `distance length ${vertexDistance.length} does not match vertex count ${mesh.vertices.length}`,
    );
  }
  const band = bandFrac * diagonal;
  return mesh.faces.map(([a, b, c]) => {
    const d = (vertexDistance[a] + vertexDistance[b] + vertexDistance[c]) / 3;
    if (Math.abs(d) <= band) return "boundary";
    return d < 0 ? "feasible" : "infeasible";
  });
}
