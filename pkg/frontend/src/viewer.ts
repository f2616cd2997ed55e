import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";
import { MeshData } from "./mesh";
import { Vec3 } from "./vec";

export type Rgb = readonly [number, number, number];

/** WebGL scene wrapper: renders one mesh with per-face colors plus an
 * optional particle overlay, and converts mouse positions to world rays
 * for surface picking. */
export class Viewer {
  private renderer: THREE.WebGLRenderer;
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private controls: OrbitControls;
  private meshObj: THREE.Mesh | null = null;
  private particleObj: THREE.Points | null = null;
  private markerObjs: THREE.Mesh[] = [];
  private faceCount = 0;

  constructor(private canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.camera = new THREE.PerspectiveCamera(45, 1, 0.01, 1000);
    this.camera.position.set(0, 0, 3);
    this.controls = new OrbitControls(this.camera, canvas);
    this.controls.enableDamping = false;
    this.scene.background = new THREE.Color(0x1c1e24);
    const key = new THREE.DirectionalLight(0xffffff, 2.0);
    key.position.set(1, 1, 2);
    this.scene.add(key);
    const back = new THREE.DirectionalLight(0xffffff, 0.6);
    back.position.set(-1, -0.5, -2);
    this.scene.add(back);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.5));
    const loop = () => {
      requestAnimationFrame(loop);
      this.resize();
      this.renderer.render(this.scene, this.camera);
    };
    loop();
  }

  private resize(): void {
    const w = this.canvas.clientWidth;
    const h = this.canvas.clientHeight;
    const dpr = window.devicePixelRatio || 1;
    if (
      this.canvas.width !== Math.round(w * dpr) ||
      this.canvas.height !== Math.round(h * dpr)
    ) {
      this.renderer.setSize(w, h, false);
      this.renderer.setPixelRatio(dpr);
      this.camera.aspect = w / h;
      this.camera.updateProjectionMatrix();
    }
  }

  /** Replace the displayed mesh. Geometry is de-indexed so each face owns
   * its three vertices and can be colored independently. */
  setMesh(mesh: MeshData): void {
    this.clearMesh();
    this.faceCount = mesh.faces.length;
    const pos = new Float32Array(this.faceCount * 9);
    let k = 0;
    for (const [a, b, c] of mesh.faces) {
      for (const vi of [a, b, c]) {
        const v = mesh.vertices[vi];
        pos[k++] = v[0];
        pos[k++] = v[1];
        pos[k++] = v[2];
      }
    }
    const geo = new THREE.BufferGeometry();
    geo.setAttribute("position", new THREE.BufferAttribute(pos, 3));
    geo.setAttribute(
      "color",
      new THREE.BufferAttribute(new Float32Array(this.faceCount * 9), 3),
    );
    geo.computeVertexNormals();
    const mat = new THREE.MeshLambertMaterial({
      vertexColors: true,
      side: THREE.DoubleSide,
    });
    this.meshObj = new THREE.Mesh(geo, mat);
    this.scene.add(this.meshObj);
    this.frameMesh(geo);
  }

  private frameMesh(geo: THREE.BufferGeometry): void {
    geo.computeBoundingSphere();
    const bs = geo.boundingSphere;
    if (!bs) return;
    this.controls.target.copy(bs.center);
    const d = bs.radius / Math.tan((this.camera.fov * Math.PI) / 360);
    this.camera.position
      .copy(bs.center)
      .add(new THREE.Vector3(0.4, 0.3, 1).normalize().multiplyScalar(d * 1.3));
    this.camera.near = bs.radius / 100;
    this.camera.far = bs.radius * 100;
    this.camera.updateProjectionMatrix();
    this.controls.update();
  }

  setFaceColors(colors: Rgb[]): void {
    if (!this.meshObj || colors.length !== this.faceCount) return;
    const attr = this.meshObj.geometry.getAttribute(
      "color",
    ) as THREE.BufferAttribute;
    const arr = attr.array as Float32Array;
    for (let f = 0; f < this.faceCount; f++) {
      const [r, g, b] = colors[f];
      for (let v = 0; v < 3; v++) {
        arr[f * 9 + v * 3] = r;
        arr[f * 9 + v * 3 + 1] = g;
        arr[f * 9 + v * 3 + 2] = b;
      }
    }
    attr.needsUpdate = true;
  }

  setParticles(points: number[][] | null, radius: number): void {
    if (this.particleObj) {
      this.scene.remove(this.particleObj);
      this.particleObj.geometry.dispose();
      (this.particleObj.material as THREE.Material).dispose();
      this.particleObj = null;
    }
    if (!points || points.length === 0) return;
    const pos = new Float32Array(points.length * 3);
    points.forEach((p, i) => pos.set(p, i * 3));
    const geo = new THREE.BufferGeometry();
    geo.setAttribute("position", new THREE.BufferAttribute(pos, 3));
    const mat = new THREE.PointsMaterial({
      color: 0x3fb3ff,
      size: radius,
      sizeAttenuation: true,
    });
    this.particleObj = new THREE.Points(geo, mat);
    this.scene.add(this.particleObj);
  }

  /** Show small spheres at plane-draft picks. */
  setPickMarkers(points: Vec3[], radius: number): void {
    for (const m of this.markerObjs) {
      this.scene.remove(m);
      m.geometry.dispose();
      (m.material as THREE.Material).dispose();
    }
    this.markerObjs = [];
    for (const p of points) {
      const m = new THREE.Mesh(
        new THREE.SphereGeometry(radius, 12, 8),
        new THREE.MeshBasicMaterial({ color: 0xff5533 }),
      );
      m.position.set(p[0], p[1], p[2]);
      this.scene.add(m);
      this.markerObjs.push(m);
    }
  }

  /** World-space ray through a mouse event, for surface picking. */
  rayFromEvent(ev: MouseEvent): { origin: Vec3; dir: Vec3 } {
    const rect = this.canvas.getBoundingClientRect();
    const ndc = new THREE.Vector2(
      ((ev.clientX - rect.left) / rect.width) * 2 - 1,
      -((ev.clientY - rect.top) / rect.height) * 2 + 1,
    );
    const rc = new THREE.Raycaster();
    rc.setFromCamera(ndc, this.camera);
    const o = rc.ray.origin;
    const d = rc.ray.direction;
    return { origin: [o.x, o.y, o.z], dir: [d.x, d.y, d.z] };
  }

  private clearMesh(): void {
    if (this.meshObj) {
      this.scene.remove(this.meshObj);
      this.meshObj.geometry.dispose();
      (this.meshObj.material as THREE.Material).dispose();
      this.meshObj = null;
    }
    this.setParticles(null, 0);
    this.setPickMarkers([], 0);
  }
}
