/** Constraint document schema shared with the service. The UI authors
 * planes and one painted face mask; spheres are file-editable only and
 * pass through untouched. */

export interface PlaneJson {
  origin: number[];
  normal: number[];
}

export interface SphereJson {
  center: number[];
  radius: number;
  mode: string;
}

export interface FfcJson {
  face_mask: boolean[];
}

export interface ConstraintDoc {
  planes: PlaneJson[];
  spheres: SphereJson[];
  ffcs: FfcJson[];
}

export function emptyDoc(): ConstraintDoc {
  return { planes: [], spheres: [], ffcs: [] };
}

/** Extract the painted mask from a document: the first free-form entry,
 * or an all-included mask when none is present. */
export function maskFromDoc(doc: ConstraintDoc, faceCount: number): boolean[] {
  if (doc.ffcs.length > 0) {
    const mask = doc.ffcs[0].face_mask;
    if (mask.length !== faceCount) {
      throw new Error(
        `mask length ${mask.length} does not match face count ${faceCount}`,
      );
    }
    return mask.slice();
  }
  return new Array(faceCount).fill(true);
}

/** Rebuild a document from editor state, preserving unedited sections.
 * A mask that includes every face encodes as no free-form entry at all:
 * it constrains nothing, and the service rejects boundary-free masks.
 * An all-excluded mask has no feasible region and cannot be saved. */
export function docFromEditor(
  base: ConstraintDoc,
  mask: boolean[],
  planes: PlaneJson[],
): ConstraintDoc {
  if (!mask.some((m) => m)) {
    throw new Error("mask excludes every face; no feasible region remains");
  }
  const ffcs: FfcJson[] = mask.every((m) => m)
    ? []
    : [{ face_mask: mask.slice() }];
  return { planes: planes.slice(), spheres: base.spheres.slice(), ffcs };
}
