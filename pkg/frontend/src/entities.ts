/**
 * Client-side mirror of the server's 26-entity boundary catalog: ids,
 * constrained axes, hierarchical closure, and pickable extents for a given
 * domain size. Ids must match the server exactly; the test suite pins them.
 */

export type Axis = 0 | 1 | 2;
export type Side = 0 | 1;
export type EntityKind = "face" | "edge" | "vertex";

export interface EntityDef {
  kind: EntityKind;
  id: string;
  /** constrained axes with their side: 0 at the min face, 1 at the max */
  sides: [Axis, Side][];
}

const AXES = ["x", "y", "z"] as const;
const SIGNS = ["-", "+"] as const;

function buildCatalog(): EntityDef[] {
  const out: EntityDef[] = [];
  for (let axis = 0 as Axis; axis < 3; axis++) {
    for (let side = 0 as Side; side < 2; side++) {
      out.push({
        kind: "face",
        id: `face:${AXES[axis]}${SIGNS[side]}`,
        sides: [[axis as Axis, side as Side]],
      });
    }
  }
  for (let free = 0; free < 3; free++) {
    const [a, b] = [0, 1, 2].filter((ax) => ax !== free) as [Axis, Axis];
    for (let sb = 0 as Side; sb < 2; sb++) {
      for (let sa = 0 as Side; sa < 2; sa++) {
        out.push({
          kind: "edge",
          id: `edge:${AXES[a]}${SIGNS[sa]}${AXES[b]}${SIGNS[sb]}`,
          sides: [
            [a, sa as Side],
            [b, sb as Side],
          ],
        });
      }
    }
  }
  for (let i = 0; i < 8; i++) {
    const s: Side[] = [(i & 1) as Side, ((i >> 1) & 1) as Side, ((i >> 2) & 1) as Side];
    out.push({
      kind: "vertex",
      id: `vertex:x${SIGNS[s[0]]}y${SIGNS[s[1]]}z${SIGNS[s[2]]}`,
      sides: [
        [0, s[0]],
        [1, s[1]],
        [2, s[2]],
      ],
    });
  }
  return out;
}

export const ENTITIES: readonly EntityDef[] = buildCatalog();
export const ENTITY_BY_ID = new Map(ENTITIES.map((e) => [e.id, e]));

/**
 * Hierarchical closure: the lower-dimensional entities a selection also
 * covers (a face brings its 4 edges and 4 vertices, an edge its 2 ends).
 */
export function closureOf(id: string): string[] {
  const ent = ENTITY_BY_ID.get(id);
  if (!ent) throw new Error(`unknown entity ${id}`);
  const fixed = new Map(ent.sides);
  const contained = (other: EntityDef) =>
    other !== ent &&
    [...fixed].every(([axis, side]) =>
      other.sides.some(([a, s]) => a === axis && s === side),
    );
  return ENTITIES.filter((e) => e.kind !== "face" && contained(e)).map((e) => e.id);
}

export interface Extent {
  center: [number, number, number];
  size: [number, number, number];
}

/**
 * Pickable/renderable box for an entity on a box of dims (lx, ly, lz)
 * anchored at the origin corner. Constrained axes collapse to a thin pad
 * so faces become slabs, edges bars and vertices knobs.
 */
export function entityExtent(id: string, dims: [number, number, number], pad = 0.04): Extent {
  const ent = ENTITY_BY_ID.get(id);
  if (!ent) throw new Error(`unknown entity ${id}`);
  const fixed = new Map(ent.sides);
  const thickness = pad * Math.min(...dims);
  const center: [number, number, number] = [0, 0, 0];
  const size: [number, number, number] = [0, 0, 0];
  for (let axis = 0 as Axis; axis < 3; axis++) {
    if (fixed.has(axis)) {
      center[axis] = fixed.get(axis)! === 0 ? 0 : dims[axis];
      size[axis] = thickness;
    } else {
      center[axis] = dims[axis] / 2;
      size[axis] = dims[axis];
    }
  }
  return { center, size };
}

/** Pick priority when several overlapping entities are hit: corners win. */
export function rankPick(ids: string[]): string | null {
  const order: Record<EntityKind, number> = { vertex: 0, edge: 1, face: 2 };
  let best: string | null = null;
  let bestRank = 99;
  for (const id of ids) {
    const ent = ENTITY_BY_ID.get(id);
    if (!ent) continue;
    if (order[ent.kind] < bestRank) {
      best = id;
      bestRank = order[ent.kind];
    }
  }
  return best;
}
