import { ConstraintDoc } from "./constraints";
import { MeshData } from "./mesh";

export interface ShapeInfo {
  id: number | string;
  name: string;
  mesh_url: string;
  constraint_url: string;
}

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function errorFrom(res: Response): Promise<ApiError> {
  let message = `${res.status} ${res.statusText}`;
  try {
    const body = await res.json();
    if (body && typeof body.detail === "string") message = body.detail;
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(res.status, message);
}

/** Thin typed client for the constraint-editing service. */
export class ApiClient {
  readonly base: string;

  constructor(base = "") {
    this.base = base.replace(/\/$/, "");
  }

  private async getJson<T>(path: string): Promise<T> {
    const res = await fetch(this.base + path);
    if (!res.ok) throw await errorFrom(res);
    return (await res.json()) as T;
  }

  listShapes(): Promise<ShapeInfo[]> {
    return this.getJson("/api/shapes");
  }

  getMesh(id: string): Promise<MeshData> {
    return this.getJson(`/api/shapes/${id}/mesh`);
  }

  getConstraints(id: string): Promise<ConstraintDoc> {
    return this.getJson(`/api/shapes/${id}/constraints`);
  }

  async putConstraints(id: string, doc: ConstraintDoc): Promise<void> {
    const res = await fetch(`${this.base}/api/shapes/${id}/constraints`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(doc),
    });
    if (!res.ok) throw await errorFrom(res);
  }

  async copyToAll(id: string): Promise<void> {
    const res = await fetch(
      `${this.base}/api/shapes/${id}/constraints/copy-to-all`,
      { method: "POST" },
    );
    if (!res.ok) throw await errorFrom(res);
  }

  async previewFfc(
    id: string,
    faceMask: boolean[],
  ): Promise<{ vertex_distance: number[] }> {
    const res = await fetch(`${this.base}/api/shapes/${id}/ffc/preview`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ face_mask: faceMask }),
    });
    if (!res.ok) throw await errorFrom(res);
    return (await res.json()) as { vertex_distance: number[] };
  }

  /** Optimized particle positions, or null when none exist yet. */
  async getParticles(id: string): Promise<number[][] | null> {
    const res = await fetch(`${this.base}/api/particles/${id}`);
    if (res.status === 404) return null;
    if (!res.ok) throw await errorFrom(res);
    return (await res.json()) as number[][];
  }
}
