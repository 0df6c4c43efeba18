#!/usr/bin/env python3
"""Regenerate the unstructured test meshes under tests/data.

Uses the Python bindings of Triangle (``pip install triangle``) for the unit
square and TetGen (``pip install tetgen``) for the unit cube, and writes the
results in the native Triangle/TetGen ASCII formats (1-based indices).

Boundary markers: square sides are 1 (y=0), 2 (x=1), 3 (y=1), 4 (x=0);
cube faces are 1 (z=0), 2 (z=1), 3 (y=0), 4 (x=1), 5 (y=1), 6 (x=0).
"""
import argparse
import pathlib

import numpy as np

SQUARE_RUNS = {
    "square_a0p1": "pqa0.1",
    "square_a0p05": "pqa0.05",
    "square_q36": "pqa0.038",
    "square_a0p01": "pqa0.01",
    "square_a0p001": "pa0.001",
    "square_a0p0001": "pa0.0001",
}

CUBE_RUNS = {
    "cube_v0p1": "pq1.414a0.1",
    "cube_v0p03": "pq1.414a0.03",
    "cube_v0p01": "pq1.414a0.01",
    "cube_v0p0059": "pq1.414a0.0059",
    "cube_v0p005": "pq1.414a0.005",
    "cube_v0p0048": "pq1.414a0.0048",
    "cube_v0p003": "pq1.414a0.003",
    "cube_v0p0005": "pq1.414a0.0005",
}


def side_marker_2d(p):
    x, y = p
    tol = 1e-12
    if abs(y) < tol:
        return 1
    if abs(x - 1) < tol:
        return 2
    if abs(y - 1) < tol:
        return 3
    if abs(x) < tol:
        return 4
    raise ValueError(f"point {p} is not on the square boundary")


def face_marker_3d(c):
    tol = 1e-12
    x, y, z = c
    for value, marker in ((z, 1), (1 - z, 2), (y, 3), (1 - x, 4), (1 - y, 5), (x, 6)):
        if abs(value) < tol:
            return marker
    raise ValueError(f"face centroid {c} is not on the cube boundary")


def boundary_facets(cells, k):
    """Facets (k vertices) incident to exactly one cell."""
    from itertools import combinations
    count = {}
    for cell in cells:
        for f in combinations(sorted(cell), k):
            count[f] = count.get(f, 0) + 1
    return [f for f, n in count.items() if n == 1]


def write_node(path, pts):
    with open(path, "w") as out:
        out.write(f"{len(pts)} {pts.shape[1]} 0 0\n")
        for i, p in enumerate(pts):
            out.write(f"{i + 1} " + " ".join(f"{x:.17g}" for x in p) + "\n")


def write_ele(path, cells):
    with open(path, "w") as out:
        out.write(f"{len(cells)} {cells.shape[1]} 0\n")
        for i, c in enumerate(cells):
            out.write(f"{i + 1} " + " ".join(str(v + 1) for v in c) + "\n")


def write_facets(path, facets, markers):
    with open(path, "w") as out:
        out.write(f"{len(facets)} 1\n")
        for i, (f, m) in enumerate(zip(facets, markers)):
            out.write(f"{i + 1} " + " ".join(str(v + 1) for v in f) + f" {m}\n")


def make_square(outdir, name, switches):
    import triangle
    square = dict(vertices=np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float),
                  segments=np.array([[0, 1], [1, 2], [2, 3], [3, 0]]))
    t = triangle.triangulate(square, switches)
    pts, tri = t["vertices"], t["triangles"]
    facets = sorted(boundary_facets(tri, 2))
    markers = [side_marker_2d(pts[list(f)].mean(axis=0)) for f in facets]
    write_node(outdir / f"{name}.node", pts)
    write_ele(outdir / f"{name}.ele", tri)
    write_facets(outdir / f"{name}.edge", facets, markers)
    print(f"{name}: {len(tri)} triangles, {len(pts)} vertices")


def make_cube(outdir, name, switches):
    import tetgen
    v = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
                  [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]], float)
    quads = [[0, 3, 2, 1], [4, 5, 6, 7], [0, 1, 5, 4],
             [1, 2, 6, 5], [2, 3, 7, 6], [3, 0, 4, 7]]
    f = []
    for q in quads:
        f += [[q[0], q[1], q[2]], [q[0], q[2], q[3]]]
    gen = tetgen.TetGen(v, np.array(f))
    pts, tets, *_ = gen.tetrahedralize(switches=switches + "Q")
    tets = np.asarray(tets)[:, :4]
    facets = sorted(boundary_facets(tets, 3))
    markers = [face_marker_3d(pts[list(fc)].mean(axis=0)) for fc in facets]
    write_node(outdir / f"{name}.node", pts)
    write_ele(outdir / f"{name}.ele", tets)
    write_facets(outdir / f"{name}.face", facets, markers)
    print(f"{name}: {len(tets)} tetrahedra, {len(pts)} vertices")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=pathlib.Path(__file__).parent.parent / "tests" / "data",
                        type=pathlib.Path)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, sw in SQUARE_RUNS.items():
        make_square(args.out, name, sw)
    for name, sw in CUBE_RUNS.items():
        make_cube(args.out, name, sw)


if __name__ == "__main__":
    main()
