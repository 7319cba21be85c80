/**
 * Three.js view: domain box with resize/pose handles, the 26 pickable
 * boundary entities, the voxel field, and a small orbit camera. All
 * problem state comes from the store; this layer only draws and reports
 * pointer gestures to the controller.
 */

import * as THREE from "three";

import { Controller } from "./controller.js";
import { closureOf, ENTITIES, entityExtent, rankPick } from "./entities.js";
import { voxelGridIndex } from "./protocol.js";
import { AppStore } from "./store.js";
import { visibleVoxels } from "./voxels.js";

export const STATE_COLORS = {
  free: 0x9aa3ab,
  clamped: 0x2563eb, // blue
  traction: 0xdc2626, // red
  hover: 0xf59e0b,
} as const;

export const STATE_OPACITY = { free: 0.18, clamped: 0.85, traction: 0.85 } as const;

class OrbitCamera {
  theta = Math.PI / 4;
  phi = Math.PI / 3;
  radius = 4;
  target = new THREE.Vector3();

  constructor(public camera: THREE.PerspectiveCamera) {}

  apply(): void {
    const sp = Math.sin(this.phi);
    this.camera.position.set(
      this.target.x + this.radius * sp * Math.cos(this.theta),
      this.target.y + this.radius * sp * Math.sin(this.theta),
      this.target.z + this.radius * Math.cos(this.phi),
    );
    this.camera.up.set(0, 0, 1);
    this.camera.lookAt(this.target);
  }

  rotate(dx: number, dy: number): void {
    this.theta -= dx * 0.008;
    this.phi = Math.min(Math.PI - 0.05, Math.max(0.05, this.phi - dy * 0.008));
    this.apply();
  }

  zoom(factor: number): void {
    this.radius = Math.min(50, Math.max(0.5, this.radius * factor));
    this.apply();
  }
}

export class View3D {
  scene = new THREE.Scene();
  camera: THREE.PerspectiveCamera;
  orbit: OrbitCamera;
  renderer: THREE.WebGLRenderer;
  raycaster = new THREE.Raycaster();

  private root = new THREE.Group();
  private entityMeshes = new Map<string, THREE.Mesh>();
  private voxelMesh: THREE.InstancedMesh | null = null;
  private arrows = new Map<string, THREE.ArrowHelper>();
  private dragging: { entity: string; startPoint: THREE.Vector3; plane: THREE.Plane } | null = null;
  private pointerMoved = false;

  constructor(
    private canvas: HTMLCanvasElement,
    private store: AppStore,
    private controller: Controller,
  ) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.camera = new THREE.PerspectiveCamera(50, 1, 0.01, 200);
    this.orbit = new OrbitCamera(this.camera);
    this.scene.background = new THREE.Color(0xf4f5f7);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.75));
    const sun = new THREE.DirectionalLight(0xffffff, 1.2);
    sun.position.set(3, 2, 5);
    this.scene.add(sun);
    this.scene.add(this.root);
    this.bindPointer();
    store.subscribe(() => this.sync());
    this.sync();
  }

  private dims(): [number, number, number] {
    const d = this.store.status?.domain;
    return d ? [d.lx, d.ly, d.lz] : [2, 1, 1];
  }

  /** Rebuild static geometry (domain pose, entities) and the voxel field. */
  sync(): void {
    const dims = this.dims();
    const dom = this.store.status?.domain;
    this.root.position.set(...(dom?.position ?? [0, 0, 0]));
    this.root.rotation.set(0, 0, dom?.yaw ?? 0); // yaw about the vertical axis
    this.ensureEntities(dims);
    this.styleEntities();
    this.syncVoxels(dims);
    this.orbit.target.set(dims[0] / 2, dims[1] / 2, dims[2] / 2);
    this.orbit.apply();
  }

  private ensureEntities(dims: [number, number, number]): void {
    const key = dims.join(",");
    if (this.root.userData.dimsKey !== key) {
      for (const mesh of this.entityMeshes.values()) this.root.remove(mesh);
      this.entityMeshes.clear();
      for (const ent of ENTITIES) {
        const { center, size } = entityExtent(ent.id, dims);
        const geo = new THREE.BoxGeometry(...size);
        const mat = new THREE.MeshStandardMaterial({ transparent: true });
        const mesh = new THREE.Mesh(geo, mat);
        mesh.position.set(...center);
        mesh.userData.entityId = ent.id;
        this.root.add(mesh);
        this.entityMeshes.set(ent.id, mesh);
      }
      this.root.userData.dimsKey = key;
    }
  }

  private styleEntities(): void {
    const hover = this.store.view.hover;
    const highlight = new Set(hover ? [hover, ...closureOf(hover)] : []);
    const showEntities = this.store.view.tab === "bcs";
    for (const [id, mesh] of this.entityMeshes) {
      const echo = this.store.entityState(id);
      const mat = mesh.material as THREE.MeshStandardMaterial;
      const state = echo.state;
      mat.color.setHex(highlight.has(id) ? STATE_COLORS.hover : STATE_COLORS[state]);
      mat.opacity = highlight.has(id) ? 0.95 : STATE_OPACITY[state];
      mesh.visible = showEntities || state !== "free";
      this.syncArrow(id, echo.force);
    }
  }

  private syncArrow(id: string, force?: [number, number, number]): void {
    const existing = this.arrows.get(id);
    if (!force) {
      if (existing) {
        this.root.remove(existing);
        this.arrows.delete(id);
      }
      return;
    }
    const dims = this.dims();
    const { center } = entityExtent(id, dims);
    const vec = new THREE.Vector3(...force);
    const len = Math.min(1.5, 0.2 + 0.1 * vec.length()) * Math.min(...dims);
    const dir = vec.clone().normalize();
    if (existing) {
      existing.position.set(...center);
      existing.setDirection(dir);
      existing.setLength(len, 0.3 * len, 0.12 * len);
    } else {
      const arrow = new THREE.ArrowHelper(dir, new THREE.Vector3(...center), len, 0x111111);
      this.root.add(arrow);
      this.arrows.set(id, arrow);
    }
  }

  private syncVoxels(dims: [number, number, number]): void {
    const frame = this.store.frame;
    if (this.voxelMesh) {
      this.root.remove(this.voxelMesh);
      this.voxelMesh.dispose();
      this.voxelMesh = null;
    }
    if (!frame || this.store.view.tab === "bcs") return;
    const [nx, ny, nz] = frame.shape;
    const h = [dims[0] / nx, dims[1] / ny, dims[2] / nz];
    const visible = visibleVoxels(frame.densities, this.store.view.threshold, {
      phase: this.store.phase,
      softBelow: this.store.phase === "running",
    });
    if (visible.length === 0) return;
    const geo = new THREE.BoxGeometry(h[0] * 0.98, h[1] * 0.98, h[2] * 0.98);
    const mat = new THREE.MeshStandardMaterial({ color: 0x30363d, transparent: true });
    const mesh = new THREE.InstancedMesh(geo, mat, visible.length);
    const m = new THREE.Matrix4();
    visible.forEach((vox, slot) => {
      const [ex, ey, ez] = voxelGridIndex(vox.index, frame.shape);
      m.makeTranslation((ex + 0.5) * h[0], (ey + 0.5) * h[1], (ez + 0.5) * h[2]);
      mesh.setMatrixAt(slot, m);
    });
    mesh.instanceMatrix.needsUpdate = true;
    this.voxelMesh = mesh;
    this.root.add(mesh);
  }

  // -- pointer handling ------------------------------------------------

  private pointerRay(ev: PointerEvent | WheelEvent): THREE.Raycaster {
    const rect = this.canvas.getBoundingClientRect();
    const ndc = new THREE.Vector2(
      ((ev.clientX - rect.left) / rect.width) * 2 - 1,
      -((ev.clientY - rect.top) / rect.height) * 2 + 1,
    );
    this.raycaster.setFromCamera(ndc, this.camera);
    return this.raycaster;
  }

  private pickEntity(ev: PointerEvent): string | null {
    if (this.store.view.tab !== "bcs") return null;
    const ray = this.pointerRay(ev);
    const hits = ray.intersectObjects([...this.entityMeshes.values()]);
    return rankPick(hits.map((h) => h.object.userData.entityId as string));
  }

  private bindPointer(): void {
    let lastX = 0;
    let lastY = 0;
    let orbiting = false;

    this.canvas.addEventListener("pointerdown", (ev) => {
      lastX = ev.clientX;
      lastY = ev.clientY;
      this.pointerMoved = false;
      const picked = this.pickEntity(ev);
      if (picked) {
        const ray = this.pointerRay(ev);
        const hit = ray.intersectObject(this.entityMeshes.get(picked)!)[0];
        const normal = this.camera.getWorldDirection(new THREE.Vector3()).negate();
        this.dragging = {
          entity: picked,
          startPoint: hit.point.clone(),
          plane: new THREE.Plane().setFromNormalAndCoplanarPoint(normal, hit.point),
        };
      } else {
        orbiting = true; // picking misses fall through to camera orbit
      }
      this.canvas.setPointerCapture(ev.pointerId);
    });

    this.canvas.addEventListener("pointermove", (ev) => {
      const dx = ev.clientX - lastX;
      const dy = ev.clientY - lastY;
      if (Math.abs(dx) + Math.abs(dy) > 2) this.pointerMoved = true;
      if (orbiting) {
        this.orbit.rotate(dx, dy);
        lastX = ev.clientX;
        lastY = ev.clientY;
      } else if (!this.dragging) {
        this.store.setHover(this.pickEntity(ev));
      }
    });

    this.canvas.addEventListener("pointerup", (ev) => {
      if (this.dragging) {
        const drag = this.dragging;
        this.dragging = null;
        if (!this.pointerMoved) {
          void this.controller.tapEntity(drag.entity);
        } else {
          const ray = this.pointerRay(ev);
          const end = new THREE.Vector3();
          if (ray.ray.intersectPlane(drag.plane, end)) {
            const delta = end.sub(drag.startPoint);
            void this.controller.dragEntity(drag.entity, [delta.x, delta.y, delta.z]);
          }
        }
      }
      orbiting = false;
      this.canvas.releasePointerCapture(ev.pointerId);
    });

    this.canvas.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      this.orbit.zoom(ev.deltaY > 0 ? 1.1 : 0.9);
    });
  }

  resize(width: number, height: number): void {
    this.renderer.setSize(width, height, false);
    this.camera.aspect = width / height;
    this.camera.updateProjectionMatrix();
  }

  renderLoop(): void {
    const tick = () => {
      this.renderer.render(this.scene, this.camera);
      requestAnimationFrame(tick);
    };
    tick();
  }
}
