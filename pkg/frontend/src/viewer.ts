// three.js point rendering. Geometry/color buffers are built separately
// from the GL renderer so payload handling stays testable headless; the
// color attribute receives buildColorBuffer's bytes 1:1 (normalized).

import * as THREE from "three";
import { OrbitControls } from "three/addons/controls/OrbitControls.js";

import { buildColorBuffer } from "./colormap.js";
import type { ColorMode, DecodedResponse } from "./types.js";

export interface LegendInfo {
  effectiveThreshold: number;
  maskedFraction: number;
  count: number;
}

export function buildGeometry(
  data: DecodedResponse,
  strength: number,
  mode: ColorMode,
): THREE.BufferGeometry {
  if (
    data.positions.length !== data.count * 3 ||
    data.mask.length !== data.count ||
    data.magnitudes.length !== data.count
  ) {
    throw new Error("payload arrays disagree on point count");
  }
  const geometry = new THREE.BufferGeometry();
  geometry.setAttribute("position", new THREE.BufferAttribute(data.positions, 3));
  const colors = buildColorBuffer(data.mask, data.magnitudes, strength, mode);
  geometry.setAttribute("color", new THREE.BufferAttribute(colors, 3, true));
  geometry.computeBoundingSphere();
  return geometry;
}

export class CloudViewer {
  private readonly scene = new THREE.Scene();
  private readonly camera: THREE.PerspectiveCamera;
  private renderer: THREE.WebGLRenderer | null = null;
  private controls: OrbitControls | null = null;
  private points: THREE.Points | null = null;
  private data: DecodedResponse | null = null;
  private strength = 0.05;
  private mode: ColorMode = "magnitude";

  constructor(private readonly onLegend?: (info: LegendInfo) => void) {
    this.camera = new THREE.PerspectiveCamera(50, 1, 0.001, 100);
    this.camera.position.set(0, -1.5, 1.5);
    this.scene.background = new THREE.Color(0x10141c);
  }

  attach(canvas: HTMLCanvasElement): void {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.controls = new OrbitControls(this.camera, canvas);
    this.controls.enableDamping = true;
    const animate = () => {
      requestAnimationFrame(animate);
      this.controls?.update();
      this.renderer?.render(this.scene, this.camera);
    };
    animate();
  }

  resize(width: number, height: number): void {
    this.camera.aspect = width / height;
    this.camera.updateProjectionMatrix();
    this.renderer?.setSize(width, height, false);
  }

  /** Replace the rendered payload (a fresh API response). */
  setData(data: DecodedResponse, strength: number): void {
    this.data = data;
    this.strength = strength;
    this.rebuild();
    this.retarget();
    this.onLegend?.({
      effectiveThreshold: data.effectiveThreshold,
      maskedFraction: data.maskedFraction,
      count: data.count,
    });
  }

  /** Client-side recolor only; no data re-request. */
  setColorMode(mode: ColorMode): void {
    this.mode = mode;
    if (this.data) {
      this.rebuild();
    }
  }

  get colorMode(): ColorMode {
    return this.mode;
  }

  /** Current color bytes, exactly as handed to the GPU. */
  colorBytes(): Uint8Array | null {
    if (!this.points) return null;
    const attr = this.points.geometry.getAttribute("color");
    return attr ? (attr.array as Uint8Array) : null;
  }

  private rebuild(): void {
    if (!this.data) return;
    if (this.points) {
      this.scene.remove(this.points);
      this.points.geometry.dispose();
      (this.points.material as THREE.Material).dispose();
    }
    const geometry = buildGeometry(this.data, this.strength, this.mode);
    const material = new THREE.PointsMaterial({
      size: 2.0,
      sizeAttenuation: false,
      vertexColors: true,
    });
    this.points = new THREE.Points(geometry, material);
    this.scene.add(this.points);
  }

  private retarget(): void {
    if (!this.controls) return;
    const sphere = this.points?.geometry.boundingSphere;
    if (sphere) {
      this.controls.target.copy(sphere.center);
      const d = Math.max(sphere.radius * 2.5, 0.1);
      this.camera.position.set(
        sphere.center.x,
        sphere.center.y - d,
        sphere.center.z + d,
      );
    }
  }
}
