import { MeshData, bboxDiagonal, faceCentroids } from "./mesh";
import { Vec3, dist } from "./vec";
import { SurfaceHit } from "./pick";

export type BrushMode = "include" | "exclude";

/** One stroke's reversible effect: the faces it flipped and their prior
 * values. Replaying the stack backwards restores the original mask. */
export interface MaskDiff {
  faces: number[];
  prev: boolean[];
}

/** Editing state for one shape's painted face mask.
 *
 * The brush radius is stored as a fraction of the bbox diagonal so the
 * same setting feels identical across shapes of different size.
 */
export class PaintSession {
  readonly shapeId: string;
  readonly faceCount: number;
  readonly diagonal: number;
  mask: boolean[];
  brushRadiusFrac = 0.1;
  brushMode: BrushMode = "exclude";
  dirty = false;

  private undoStack: MaskDiff[] = [];
  private centroids: Vec3[];
  private editCounter = 0;
  private previewCounter = -1;

  constructor(shapeId: string, mesh: MeshData, mask?: boolean[]) {
    this.shapeId = shapeId;
    this.faceCount = mesh.faces.length;
    this.diagonal = bboxDiagonal(mesh);
    this.centroids = faceCentroids(mesh);
    if (mask !== undefined && mask.length !== this.faceCount) {
      throw new Error(
        `mask length ${mask.length} does not match face count ${this.faceCount}`,
      );
    }
    this.mask = mask ? mask.slice() : new Array(this.faceCount).fill(true);
  }

  get undoDepth(): number {
    return this.undoStack.length;
  }

  /** Apply one brush stamp at a surface hit. The hit face always takes
   * the brush mode; other faces join when their centroid lies within the
   * brush radius of the hit point. Records an undo diff for the faces
   * that actually changed; a stamp that changes nothing records nothing. */
  paintStroke(hit: SurfaceHit, radiusFrac?: number): number {
    const frac = radiusFrac ?? this.brushRadiusFrac;
    const radius = frac * this.diagonal;
    const value = this.brushMode === "include";
    const diff: MaskDiff = { faces: [], prev: [] };
    for (let f = 0; f < this.faceCount; f++) {
      const inBrush =
        f === hit.face || dist(this.centroids[f], hit.point) <= radius;
      if (inBrush && this.mask[f] !== value) {
        diff.faces.push(f);
        diff.prev.push(this.mask[f]);
        this.mask[f] = value;
      }
    }
    if (diff.faces.length > 0) {
      this.undoStack.push(diff);
      this.touch();
    }
    return diff.faces.length;
  }

  /** Revert the most recent stroke. Returns false when there is nothing
   * left to undo. */
  undo(): boolean {
    const diff = this.undoStack.pop();
    if (!diff) return false;
    for (let k = 0; k < diff.faces.length; k++) {
      this.mask[diff.faces[k]] = diff.prev[k];
    }
    this.touch();
    return true;
  }

  /** Replace the whole mask (e.g. after reloading from the service). */
  resetMask(mask: boolean[]): void {
    if (mask.length !== this.faceCount) {
      throw new Error(
        `mask length ${mask.length} does not match face count ${this.faceCount}`,
      );
    }
    this.mask = mask.slice();
    this.undoStack = [];
    this.dirty = false;
    this.editCounter += 1;
  }

  markSaved(): void {
    this.dirty = false;
  }

  markPreviewed(): void {
    this.previewCounter = this.editCounter;
  }

  /** True when the mask changed after the last boundary preview. */
  get previewStale(): boolean {
    return this.editCounter !== this.previewCounter;
  }

  private touch(): void {
    this.dirty = true;
    this.editCounter += 1;
  }
}
