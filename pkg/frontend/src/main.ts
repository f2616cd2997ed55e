import { ApiClient, ApiError, ShapeInfo } from "./api";
import { ConstraintDoc, PlaneJson, docFromEditor, maskFromDoc } from "./constraints";
import { MeshData } from "./mesh";
import { classifyFaces } from "./overlay";
import { pickSurface } from "./pick";
import { PaintSession } from "./session";
import { PlaneDraft } from "./plane";
import { Viewer, Rgb } from "./viewer";

const INCLUDED: Rgb = [0.93, 0.82, 0.25];
const EXCLUDED: Rgb = [0.42, 0.43, 0.48];
const BOUNDARY: Rgb = [0.75, 0.18, 0.12];

type Tool = "paint" | "plane";

const api = new ApiClient("");

const el = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

const canvas = el<HTMLCanvasElement>("view");
const viewer = new Viewer(canvas);
const shapeSel = el<HTMLSelectElement>("shape");
const toolSel = el<HTMLSelectElement>("tool");
const modeSel = el<HTMLSelectElement>("brush-mode");
const radiusInp = el<HTMLInputElement>("brush-radius");
const radiusOut = el<HTMLSpanElement>("radius-value");
const flipChk = el<HTMLInputElement>("flip");
const planeList = el<HTMLUListElement>("plane-list");
const statusEl = el<HTMLDivElement>("status");

let shapes: ShapeInfo[] = [];
let mesh: MeshData | null = null;
let session: PaintSession | null = null;
let draft: PlaneDraft | null = null;
let baseDoc: ConstraintDoc | null = null;
let planes: PlaneJson[] = [];
let preview: ReturnType<typeof classifyFaces> | null = null;
let painting = false;

function status(msg: string, isError = false): void {
  statusEl.textContent = msg;
  statusEl.className = isError ? "error" : "";
}

function refreshColors(): void {
  if (!session) return;
  const colors: Rgb[] = session.mask.map((m) => (m ? INCLUDED : EXCLUDED));
  if (preview && !session.previewStale) {
    preview.forEach((cls, f) => {
      colors[f] =
        cls === "boundary" ? BOUNDARY : cls === "feasible" ? INCLUDED : EXCLUDED;
    });
  }
  viewer.setFaceColors(colors);
  refreshBadges();
}

function refreshBadges(): void {
  el<HTMLSpanElement>("dirty").textContent = session?.dirty ? "unsaved" : "";
  el<HTMLSpanElement>("stale").textContent =
    preview && session?.previewStale ? "preview stale" : "";
}

function refreshPlaneList(): void {
  planeList.innerHTML = "";
  planes.forEach((p, i) => {
    const li = document.createElement("li");
    const n = p.normal.map((x) => x.toFixed(2)).join(", ");
    li.textContent = `plane ${i + 1}: n = (${n}) `;
    const del = document.createElement("button");
    del.textContent = "remove";
    del.onclick = () => {
      planes.splice(i, 1);
      if (session) session.dirty = true;
      refreshPlaneList();
      refreshBadges();
    };
    li.appendChild(del);
    planeList.appendChild(li);
  });
}

async function selectShape(id: string): Promise<void> {
  try {
    mesh = await api.getMesh(id);
    baseDoc = await api.getConstraints(id);
    session = new PaintSession(id, mesh, maskFromDoc(baseDoc, mesh.faces.length));
    draft = new PlaneDraft(session.diagonal);
    planes = baseDoc.planes.slice();
    preview = null;
    viewer.setMesh(mesh);
    viewer.setPickMarkers([], 0);
    refreshColors();
    refreshPlaneList();
    status(`loaded ${id}: ${mesh.faces.length} faces`);
  } catch (e) {
    status(`load failed: ${(e as Error).message}`, true);
  }
}

function onPick(ev: MouseEvent): void {
  if (!mesh || !session || !draft) return;
  const { origin, dir } = viewer.rayFromEvent(ev);
  const hit = pickSurface(mesh, origin, dir);
  if (!hit) return;
  if ((toolSel.value as Tool) === "paint") {
    session.brushMode = modeSel.value as "include" | "exclude";
    const changed = session.paintStroke(hit);
    if (changed > 0) refreshColors();
  } else {
    const res = draft.addPick(hit.point);
    if (!res.accepted) {
      status(res.message ?? "pick rejected", true);
      return;
    }
    viewer.setPickMarkers(draft.picks, session.diagonal * 0.01);
    if (draft.complete) {
      draft.flip = flipChk.checked;
      const plane = draft.toPlane();
      if (plane) {
        planes.push(plane);
        session.dirty = true;
        draft.clear();
        viewer.setPickMarkers([], 0);
        refreshPlaneList();
        refreshBadges();
        status("plane added");
      }
    } else {
      status(`plane draft: ${draft.pickCount}/3 points`);
    }
  }
}

async function save(): Promise<void> {
  if (!session || !baseDoc) return;
  try {
    const doc = docFromEditor(baseDoc, session.mask, planes);
    await api.putConstraints(session.shapeId, doc);
    baseDoc = doc;
    session.markSaved();
    refreshBadges();
    status("saved");
  } catch (e) {
    const msg =
      e instanceof ApiError ? `rejected: ${e.message}` : (e as Error).message;
    status(`save failed, edits kept: ${msg}`, true);
  }
}

async function runPreview(): Promise<void> {
  if (!session || !mesh) return;
  try {
    const res = await api.previewFfc(session.shapeId, session.mask);
    preview = classifyFaces(mesh, res.vertex_distance, session.diagonal);
    session.markPreviewed();
    refreshColors();
    status("boundary preview updated");
  } catch (e) {
    status(`preview failed: ${(e as Error).message}`, true);
  }
}

async function toggleParticles(show: boolean): Promise<void> {
  if (!session) return;
  if (!show) {
    viewer.setParticles(null, 0);
    return;
  }
  try {
    const pts = await api.getParticles(session.shapeId);
    if (!pts) {
      status("no particles for this shape yet", true);
      return;
    }
    viewer.setParticles(pts, session.diagonal * 0.02);
    status(`${pts.length} particles`);
  } catch (e) {
    status(`particles failed: ${(e as Error).message}`, true);
  }
}

async function init(): Promise<void> {
  shapes = await api.listShapes();
  for (const s of shapes) {
    const opt = document.createElement("option");
    opt.value = String(s.id);
    opt.textContent = s.name;
    shapeSel.appendChild(opt);
  }
  shapeSel.onchange = () => void selectShape(shapeSel.value);
  radiusInp.oninput = () => {
    const frac = Number(radiusInp.value);
    if (session) session.brushRadiusFrac = frac;
    radiusOut.textContent = frac.toFixed(2);
  };
  canvas.addEventListener("pointerdown", (ev) => {
    if (ev.button !== 0 || !ev.shiftKey) return;
    painting = true;
    onPick(ev);
  });
  canvas.addEventListener("pointermove", (ev) => {
    if (painting && (toolSel.value as Tool) === "paint") onPick(ev);
  });
  window.addEventListener("pointerup", () => {
    painting = false;
  });
  el<HTMLButtonElement>("undo").onclick = () => {
    if (session?.undo()) {
      refreshColors();
      status("undone");
    }
  };
  el<HTMLButtonElement>("save").onclick = () => void save();
  el<HTMLButtonElement>("preview").onclick = () => void runPreview();
  el<HTMLButtonElement>("copy-all").onclick = async () => {
    if (!session) return;
    if (session.dirty) {
      status("save before copying to all shapes", true);
      return;
    }
    try {
      await api.copyToAll(session.shapeId);
      status("constraints copied to all shapes");
    } catch (e) {
      status(`copy failed: ${(e as Error).message}`, true);
    }
  };
  el<HTMLButtonElement>("clear-draft").onclick = () => {
    draft?.clear();
    viewer.setPickMarkers([], 0);
    status("plane draft cleared");
  };
  el<HTMLInputElement>("particles").onchange = (ev) =>
    void toggleParticles((ev.target as HTMLInputElement).checked);
  if (shapes.length > 0) {
    shapeSel.value = String(shapes[0].id);
    await selectShape(String(shapes[0].id));
  }
  status(`${shapes.length} shapes; shift-click to paint or pick`);
}

void init();
