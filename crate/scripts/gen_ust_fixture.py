#!/usr/bin/env python3
"""Generate the (1+1)D unstructured space-time meshes for the pressure pulse.

Delaunay triangulation in (x, c0 t), written in (x, t). The lower and upper
time levels share the same x nodes so slabs can be stacked.

    python3 scripts/gen_ust_fixture.py slab   > crates/core/tests/fixtures/pulse_ust_slab.stmesh
    python3 scripts/gen_ust_fixture.py coarse > crates/core/tests/fixtures/pulse_ust_coarse.stmesh
"""
import math
import sys

import numpy as np
from scipy.spatial import Delaunay

R, GAMMA, T0 = 287.0, 1.4, 273.15
C0 = math.sqrt(GAMMA * R * T0)
LENGTH = 4.0


def build(dx, height, layers, seed):
    rng = np.random.default_rng(seed)
    nx = int(round(LENGTH / dx))
    xs = np.linspace(0.0, LENGTH, nx + 1)
    pts = [(x, 0.0) for x in xs] + [(x, height) for x in xs]
    dz = height / layers
    for k in range(1, layers):
        z = k * dz
        pts += [(0.0, z), (LENGTH, z)]
        shift = 0.5 * dx if k % 2 else 0.0
        for x in np.arange(shift + dx, LENGTH - 0.5 * dx, dx):
            jx = x + rng.uniform(-0.2, 0.2) * dx
            jz = z + rng.uniform(-0.2, 0.2) * dz
            pts.append((jx, jz))
    pts = np.array(pts)
    tri = Delaunay(pts)
    elems = []
    for s in tri.simplices:
        a, b, c = pts[s]
        area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
        if abs(area) < 1e-12 * dx * dz:
            continue
        elems.append(s)
    facets = []
    for s in elems:
        for i in range(3):
            e = [s[i], s[(i + 1) % 3]]
            xa, xb = pts[e[0]][0], pts[e[1]][0]
            if xa == 0.0 and xb == 0.0:
                facets.append(("left", e))
            elif xa == LENGTH and xb == LENGTH:
                facets.append(("right", e))
    return pts, elems, facets


def main():
    kind = sys.argv[1] if len(sys.argv) > 1 else "slab"
    if kind == "slab":
        # one of 50 stacked slabs reaching t_f = lambda / c0
        pts, elems, facets = build(dx=0.005, height=1.0 / 50.0, layers=4, seed=7)
    elif kind == "coarse":
        pts, elems, facets = build(dx=0.1, height=1.0, layers=10, seed=3)
    else:
        sys.exit(f"unknown fixture '{kind}'")
    out = sys.stdout
    out.write(f"# pressure pulse UST fixture ({kind}), coordinates (x, t)\n")
    out.write(f"stmesh 2 {len(pts)} {len(elems)} {len(facets)}\n")
    for i, (x, z) in enumerate(pts):
        out.write(f"{i} {x:.17e} {z / C0:.17e}\n")
    for i, s in enumerate(elems):
        out.write(f"{i} {s[0]} {s[1]} {s[2]}\n")
    for tag, e in facets:
        out.write(f"{tag} {e[0]} {e[1]}\n")


if __name__ == "__main__":
    main()
