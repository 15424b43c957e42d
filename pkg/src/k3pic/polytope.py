"""Newton polytopes of weighted-projective K3 hypersurfaces.

The degree-``s`` monomials of ``P(q1, q2, q3, q4)`` are the lattice points of
the simplex ``Q``; ``Delta`` is their convex hull.  All computations happen in
an integer rank-3 coordinate system on the hyperplane ``sum q_i x_i = s``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .errors import DegeneratePolytope, InvalidWeights, NoUniqueInteriorPoint

Vec3 = Tuple[int, int, int]


@dataclass(frozen=True)
class WeightVector:
    q: Tuple[int, int, int, int]

    def __post_init__(self):
        q = tuple(self.q)
        if len(q) != 4 or any(not isinstance(x, int) or x <= 0 for x in q):
            raise InvalidWeights(f"weights must be four positive integers, got {self.q!r}")
        if reduce(gcd, q) != 1:
            raise InvalidWeights(f"weights {q} are not coprime")
        object.__setattr__(self, "q", q)

    @property
    def s(self) -> int:
        return sum(self.q)


@dataclass(frozen=True)
class Facet:
    normal: Vec3          # primitive inward normal
    support: int          # <normal, x> >= support on Delta
    vertices: Tuple[int, ...]   # indices into LatticePolytope.vertices, cyclic order


@dataclass(frozen=True)
class Edge:
    endpoints: Tuple[int, int]
    facets: Tuple[int, int]
    lattice_length: int


@dataclass
class LatticePolytope:
    weights: WeightVector
    rational_vertices: List[Tuple[Fraction, ...]]
    basis: List[Tuple[int, ...]]
    base_point: Tuple[int, ...]
    vertices: List[Vec3]
    facets: List[Facet]
    edges: List[Edge]
    points: List[Vec3]
    interior_points: List[Vec3]
    _unproject: List[List[int]] = field(repr=False, default_factory=list)

    def to_ambient(self, y: Sequence[int]) -> Tuple[int, ...]:
        """Map projected coordinates back to exponent vectors."""
        return tuple(b + sum(c * bi[k] for c, bi in zip(y, self.basis))
                     for k, b in enumerate(self.base_point))

    def facets_containing(self, y: Sequence[int]) -> List[int]:
        return [i for i, f in enumerate(self.facets)
                if linalg.dot(f.normal, y) == f.support]

    @property
    def dual_vertices(self) -> List[Tuple[Fraction, ...]]:
        return polar_dual(self)[0]

    def to_dict(self) -> dict:
        dual, reflexive = polar_dual(self) if len(self.interior_points) == 1 else (None, None)
        return {
            "weights": list(self.weights.q),
            "rational_vertices": [[str(x) for x in v] for v in self.rational_vertices],
            "basis": [list(b) for b in self.basis],
            "base_point": list(self.base_point),
            "vertices": [list(v) for v in self.vertices],
            "facets": [{"normal": list(f.normal), "support": f.support,
                        "vertices": list(f.vertices)} for f in self.facets],
            "edges": [{"endpoints": list(e.endpoints), "facets": list(e.facets),
                       "lattice_length": e.lattice_length} for e in self.edges],
            "num_points": len(self.points),
            "dual_vertices": None if dual is None else [[str(x) for x in v] for v in dual],
            "reflexive": reflexive,
        }


def monomials(w: WeightVector) -> List[Tuple[int, int, int, int]]:
    """Exponent vectors of all degree-``s`` monomials, lexicographic order."""
    q1, q2, q3, q4 = w.q
    s = w.s
    out = []
    for a in range(s // q1 + 1):
        r1 = s - a * q1
        for b in range(r1 // q2 + 1):
            r2 = r1 - b * q2
            for c in range(r2 // q3 + 1):
                r3 = r2 - c * q3
                if r3 % q4 == 0:
                    out.append((a, b, c, r3 // q4))
    return out


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0])


def _primitive(v):
    g = reduce(gcd, (abs(x) for x in v))
    return tuple(x // g for x in v) if g else tuple(v)


def _hull_triangles(pts: Sequence[Vec3]) -> List[Tuple[Vec3, Vec3, Vec3]]:
    """Incremental 3D hull over integer points; returns outward-oriented
    triangles (coplanar triangles are merged by the caller)."""
    p0 = pts[0]
    p1 = next((p for p in pts if p != p0), None)
    if p1 is None:
        raise DegeneratePolytope("polytope is a point")
    p2 = next((p for p in pts if any(_cross(_sub(p1, p0), _sub(p, p0)))), None)
    if p2 is None:
        raise DegeneratePolytope("polytope is at most 1-dimensional")
    nrm = _cross(_sub(p1, p0), _sub(p2, p0))
    p3 = next((p for p in pts if linalg.dot(nrm, _sub(p, p0)) != 0), None)
    if p3 is None:
        raise DegeneratePolytope("polytope is at most 2-dimensional")

    def orient(tri, p):
        a, b, c = tri
        return linalg.dot(_cross(_sub(b, a), _sub(c, a)), _sub(p, a))

    faces = []
    for tri, opp in (((p0, p1, p2), p3), ((p0, p1, p3), p2),
                     ((p0, p2, p3), p1), ((p1, p2, p3), p0)):
        if orient(tri, opp) > 0:
            tri = (tri[0], tri[2], tri[1])
        faces.append(tri)

    seed = {p0, p1, p2, p3}
    for p in pts:
        if p in seed:
            continue
        visible = [f for f in faces if orient(f, p) > 0]
        if not visible:
            continue
        vis_edges = set()
        for a, b, c in visible:
            vis_edges.update(((a, b), (b, c), (c, a)))
        horizon = [(u, v) for (u, v) in vis_edges if (v, u) not in vis_edges]
        vis_ids = {id(f) for f in visible}
        faces = [f for f in faces if id(f) not in vis_ids]
        faces.extend((u, v, p) for (u, v) in horizon)
    return faces


def _planar_hull(points: Sequence[Vec3], normal: Vec3) -> List[Vec3]:
    """Extreme points of a planar point set, counter-clockwise seen from the
    tip of ``normal``."""
    axis = max(range(3), key=lambda k: abs(normal[k]))
    keep = [k for k in range(3) if k != axis]
    flip = normal[axis] < 0
    # projection to the two kept coordinates flips orientation when
    # (keep, axis) is an odd permutation
    if axis == 1:
        flip = not flip

    def proj(p):
        return (p[keep[0]], p[keep[1]])

    pts = sorted(set(points), key=proj)

    def turn(o, a, b):
        oa, ob = _sub2(proj(a), proj(o)), _sub2(proj(b), proj(o))
        return oa[0] * ob[1] - oa[1] * ob[0]

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and turn(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and turn(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    cyc = lower[:-1] + upper[:-1]
    if flip:
        cyc = cyc[:1] + cyc[1:][::-1]
    return cyc


def _sub2(a, b):
    return (a[0] - b[0], a[1] - b[1])


def _projection(w: WeightVector, basis_change: Optional[Sequence[Sequence[int]]] = None):
    v = linalg.unimodular_completion(w.q)
    cols = linalg.transpose(v)
    kernel = cols[1:]
    if basis_change is not None:
        if abs(linalg.det(basis_change)) != 1:
            raise ValueError("basis change must be unimodular")
        kernel = linalg.matmul(linalg.transpose(basis_change), kernel)
    full = [cols[0]] + [list(k) for k in kernel]
    inv = linalg.inverse(linalg.transpose(full))
    inv = [[int(x) for x in row] for row in inv]
    return full, inv


def build_newton_polytope(w: WeightVector,
                          basis_change: Optional[Sequence[Sequence[int]]] = None
                          ) -> LatticePolytope:
    """Build ``Delta`` for the weight vector ``w``.

    ``basis_change`` (a unimodular 3x3 matrix) re-expresses the affine lattice
    basis; every combinatorial output is independent of it.
    """
    s = w.s
    rational = []
    for i, qi in enumerate(w.q):
        rational.append(tuple(Fraction(s, qi) if j == i else Fraction(0) for j in range(4)))

    full, inv = _projection(w, basis_change)
    mons = monomials(w)
    pts = []
    for m in mons:
        z = linalg.matvec(inv, m)
        assert z[0] == s
        pts.append((z[1], z[2], z[3]))

    tris = _hull_triangles(pts)
    planes: Dict[Tuple[Vec3, int], None] = {}
    for a, b, c in tris:
        n = _primitive(_cross(_sub(b, a), _sub(c, a)))
        planes.setdefault((n, linalg.dot(n, a)), None)

    vert_index: Dict[Vec3, int] = {}
    facet_cycles = []
    for (n_out, h) in sorted(planes):
        on_plane = [p for p in pts if linalg.dot(n_out, p) == h]
        cyc = _planar_hull(on_plane, n_out)
        facet_cycles.append((n_out, h, cyc))
        for p in cyc:
            vert_index.setdefault(p, None)
    vertices = sorted(vert_index)
    vert_index = {p: i for i, p in enumerate(vertices)}

    facets = []
    for n_out, h, cyc in facet_cycles:
        n_in = tuple(-x for x in n_out)
        facets.append(Facet(normal=n_in, support=-h,
                            vertices=tuple(vert_index[p] for p in cyc)))

    edge_map: Dict[Tuple[int, int], List[int]] = {}
    for fi, f in enumerate(facets):
        k = len(f.vertices)
        for j in range(k):
            a, b = f.vertices[j], f.vertices[(j + 1) % k]
            edge_map.setdefault((min(a, b), max(a, b)), []).append(fi)
    edges = []
    for (a, b), fs in sorted(edge_map.items()):
        if len(fs) != 2:
            raise DegeneratePolytope(f"edge {(a, b)} lies on {len(fs)} facets")
        d = _sub(vertices[a], vertices[b])
        edges.append(Edge(endpoints=(a, b), facets=(fs[0], fs[1]),
                          lattice_length=reduce(gcd, (abs(x) for x in d))))

    interior = [p for p in pts
                if all(linalg.dot(f.normal, p) > f.support for f in facets)]

    basis = [tuple(full[k]) for k in range(1, 4)]
    base = tuple(s * x for x in full[0])
    return LatticePolytope(weights=w, rational_vertices=rational, basis=basis,
                           base_point=base, vertices=vertices, facets=facets,
                           edges=edges, points=sorted(pts),
                           interior_points=sorted(interior), _unproject=full)


def interior_point(p: LatticePolytope) -> Vec3:
    if len(p.interior_points) != 1:
        raise NoUniqueInteriorPoint(
            f"Delta has {len(p.interior_points)} interior lattice points")
    return p.interior_points[0]


def facet_dual_vertex(p: LatticePolytope, facet_index: int) -> Tuple[Fraction, ...]:
    """Vertex of the polar dual attached to a facet, with the interior point
    as origin."""
    o = interior_point(p)
    f = p.facets[facet_index]
    c = linalg.dot(f.normal, o) - f.support
    return tuple(Fraction(x, c) for x in f.normal)


def polar_dual(p: LatticePolytope):
    """Vertices of ``{y : <y, x> >= -1 on Delta}`` and the reflexivity flag."""
    dual = [facet_dual_vertex(p, i) for i in range(len(p.facets))]
    reflexive = all(x.denominator == 1 for v in dual for x in v)
    return dual, reflexive


def dual_of_vertex_set(vertices: Sequence[Sequence[Fraction]]) -> List[Tuple[Fraction, ...]]:
    """Polar dual of a polytope (origin in the interior) given by vertices.

    Used to check the duality involution; brute-force over vertex triples.
    """
    pts = [tuple(Fraction(x) for x in v) for v in vertices]
    out = set()
    n = len(pts)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                a, b, c = pts[i], pts[j], pts[k]
                m = [list(a), list(b), list(c)]
                try:
                    inv = linalg.inverse(m)
                except ZeroDivisionError:
                    continue
                y = tuple(-sum(inv[r][col] for col in range(3)) for r in range(3))
                if all(linalg.dot(y, x) >= -1 for x in pts):
                    out.add(y)
    return sorted(out)


def face_lattice_counts(p: LatticePolytope):
    """Return ``(facet_interior, edge_length)``: the number of lattice points in
    the relative interior of each facet and ``(points on edge) - 1`` for each
    edge."""
    facet_interior = [0] * len(p.facets)
    for y in p.points:
        fs = p.facets_containing(y)
        if len(fs) == 1:
            facet_interior[fs[0]] += 1
    return facet_interior, [e.lattice_length for e in p.edges]


def boundary_partition(p: LatticePolytope) -> Dict[str, int]:
    """Classify boundary lattice points as vertex / edge-interior /
    facet-interior points."""
    counts = {"vertex": 0, "edge": 0, "facet": 0, "interior": 0}
    vset = set(p.vertices)
    for y in p.points:
        fs = p.facets_containing(y)
        if not fs:
            counts["interior"] += 1
        elif len(fs) == 1:
            counts["facet"] += 1
        elif y in vset:
            counts["vertex"] += 1
        else:
            counts["edge"] += 1
    return counts
