import { PlaneJson } from "./constraints";
import { Vec3, cross, norm, normalize, scale, sub } from "./vec";

/** Builds a cutting plane from three picked surface points.
 *
 * The first pick anchors the plane; the normal is the unit cross product
 * of the two edges fanning out from it, negated when flipped. Which side
 * is kept follows the normal, so flipping swaps feasible and infeasible
 * halves.
 */
export class PlaneDraft {
  readonly diagonal: number;
  flip = false;
  private points: Vec3[] = [];

  constructor(diagonal: number) {
    this.diagonal = diagonal;
  }

  get pickCount(): number {
    return this.points.length;
  }

  get picks(): Vec3[] {
    return this.points.slice();
  }

  get complete(): boolean {
    return this.points.length === 3;
  }

  /** Add a picked point. The third pick is rejected when the three
   * points are collinear (cross-product magnitude below 1e-9 * diag^2,
   * the scale of an area), leaving the draft at two points. */
  addPick(p: Vec3): { accepted: boolean; message?: string } {
    if (this.complete) {
      return { accepted: false, message: "plane already has 3 points" };
    }
    if (this.points.length === 2) {
      const area = norm(
        cross(sub(this.points[1], this.points[0]), sub(p, this.points[0])),
      );
      if (area < 1e-9 * this.diagonal * this.diagonal) {
        return {
          accepted: false,
          message: "picked points are collinear; pick a point off the line",
        };
      }
    }
    this.points.push(p);
    return { accepted: true };
  }

  clear(): void {
    this.points = [];
    this.flip = false;
  }

  /** The finalized plane, or null until three valid picks are in. */
  toPlane(): PlaneJson | null {
    if (!this.complete) return null;
    const [a, b, c] = this.points;
    let n = normalize(cross(sub(b, a), sub(c, a)));
    if (this.flip) n = scale(n, -1);
    return { origin: [a[0], a[1], a[2]], normal: [n[0], n[1], n[2]] };
  }
}
