/**
 * Rendering contract for density frames.
 *
 * A voxel is solid when its quantized density reaches 255 * threshold.
 * While the optimization runs, voxels below the cut may optionally render
 * as translucent "x-ray" hints; once finished the view is strictly
 * black-and-white: solid or absent.
 */

import { DensityFrame, Phase } from "./protocol.js";

export interface VoxelAppearance {
  index: number;
  alpha: number;
}

export interface VoxelViewOptions {
  phase: Phase;
  softBelow?: boolean;
}

export function visibleVoxels(
  densities: Uint8Array,
  threshold: number,
  opts: VoxelViewOptions,
): VoxelAppearance[] {
  const cut = 255 * threshold;
  const soft = opts.softBelow === true && opts.phase === "running";
  const out: VoxelAppearance[] = [];
  for (let i = 0; i < densities.length; i++) {
    const q = densities[i];
    if (q >= cut) {
      out.push({ index: i, alpha: 1.0 });
    } else if (soft && q > 0) {
      out.push({ index: i, alpha: (q / 255) * 0.35 });
    }
  }
  return out;
}

export function solidCount(frame: DensityFrame, threshold: number): number {
  return visibleVoxels(frame.densities, threshold, { phase: "finished" }).length;
}
