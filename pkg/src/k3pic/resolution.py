"""Toric desingularization: edge singularities, the curve graph, Picard rank."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from functools import reduce
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .errors import NonGorensteinEdge, RankMismatch
from .polytope import LatticePolytope, face_lattice_counts, interior_point


@dataclass(frozen=True)
class EdgeResolution:
    edge_id: int
    cone_index: int
    hj_entries: Tuple[int, ...]
    multiplicity: int
    facets: Tuple[int, int]

    @property
    def a_type(self) -> int:
        return len(self.hj_entries)

    @property
    def gorenstein(self) -> bool:
        return all(b == 2 for b in self.hj_entries)


def hirzebruch_jung(d: int, k: int) -> List[int]:
    """Entries ``[b1, b2, ...]`` with ``d/k = b1 - 1/(b2 - ...)``."""
    out = []
    while k:
        b = -(-d // k)
        out.append(b)
        d, k = k, b * k - d
    return out


def cone_normal_form(u: Sequence[int], w: Sequence[int]) -> Tuple[int, int]:
    """Normal form ``(d, k)`` of the 2D cone spanned by integer vectors.

    The cone is reduced to the saturated rank-2 lattice it spans and brought
    to ``cone(e2, d*e1 - k*e2)`` with ``0 <= k < d``.  ``u`` must be primitive.
    """
    cr = tuple(u[(i + 1) % 3] * w[(i + 2) % 3] - u[(i + 2) % 3] * w[(i + 1) % 3]
               for i in range(3))
    d = reduce(gcd, (abs(x) for x in cr))
    if d == 0:
        raise ValueError("cone generators are parallel")
    # basis of the saturation: integer kernel of the primitive normal cr/d
    k1, k2 = linalg.integer_kernel([[x // d for x in cr]])

    def coords(v):
        # solve v = a*k1 + b*k2 exactly
        for i in range(3):
            for j in range(i + 1, 3):
                m = k1[i] * k2[j] - k1[j] * k2[i]
                if m:
                    a = (v[i] * k2[j] - v[j] * k2[i])
                    b = (k1[i] * v[j] - k1[j] * v[i])
                    assert a % m == 0 and b % m == 0
                    return a // m, b // m
        raise AssertionError("degenerate kernel basis")

    a1, a2 = coords(u)
    b1, b2 = coords(w)
    det = a1 * b2 - a2 * b1
    assert abs(det) == d
    # complete u to a basis (u, f) with det(u, f) = 1
    g, x, y = _ext_gcd(a1, a2)
    assert g == 1
    f = (-y, x)          # a1*x + a2*y = 1  =>  det(u, f) = 1
    # w = alpha*u + det*f
    alpha_num = b1 * f[1] - b2 * f[0]
    if det < 0:
        det = -det
    k = (-alpha_num) % det if det > 1 else 0
    return det, k


def _ext_gcd(a: int, b: int) -> Tuple[int, int, int]:
    if b == 0:
        return (abs(a), (1 if a >= 0 else -1), 0)
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


def resolve_edges(p: LatticePolytope, strict: bool = True) -> List[EdgeResolution]:
    out = []
    for eid, e in enumerate(p.edges):
        fi, fj = e.facets
        d, k = cone_normal_form(p.facets[fi].normal, p.facets[fj].normal)
        hj = tuple(hirzebruch_jung(d, k)) if d > 1 else ()
        res = EdgeResolution(edge_id=eid, cone_index=d, hj_entries=hj,
                             multiplicity=e.lattice_length,
                             facets=(min(fi, fj), max(fi, fj)))
        if not res.gorenstein:
            if strict:
                raise NonGorensteinEdge(f"edge {eid} has HJ entries {hj}")
            warnings.warn(f"edge {eid} is not of type A (HJ entries {hj})")
        out.append(res)
    return out


@dataclass(frozen=True)
class Curve:
    id: int
    kind: str            # facet | exceptional | virtual
    genus: int
    self_intersection: int
    origin: Tuple = ()   # ("facet", i) or ("edge", edge_id, copy, position)


@dataclass
class CurveGraph:
    vertices: List[Curve]
    edges: Dict[Tuple[int, int], int]
    gram: List[List[int]] = field(default_factory=list)

    def __post_init__(self):
        if not self.gram:
            self.gram = self._gram()

    def _gram(self):
        n = len(self.vertices)
        g = [[0] * n for _ in range(n)]
        for c in self.vertices:
            g[c.id][c.id] = c.self_intersection
        for (i, j), m in self.edges.items():
            g[i][j] = g[j][i] = m
        return g

    def __len__(self):
        return len(self.vertices)

    def neighbours(self, i: int) -> List[int]:
        return [j for j in range(len(self.vertices)) if j != i and self.gram[i][j]]

    def to_dot(self, name="S", styles: Optional[Dict[int, dict]] = None) -> str:
        styles = styles or {}
        lines = [f"graph {name} {{"]
        for c in self.vertices:
            attrs = {"label": f"{c.id + 1}\\n{c.kind[0]} g={c.genus} "
                              f"C^2={c.self_intersection}"}
            if c.kind == "virtual":
                attrs["style"] = "dashed"
            attrs.update(styles.get(c.id, {}))
            a = ", ".join(f'{k}="{v}"' for k, v in attrs.items())
            lines.append(f"  v{c.id} [{a}];")
        for (i, j), m in sorted(self.edges.items()):
            lines.append(f'  v{i} -- v{j} [label="{m}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "vertices": [{"id": c.id, "kind": c.kind, "genus": c.genus,
                          "self_intersection": c.self_intersection}
                         for c in self.vertices],
            "edges": [{"pair": [i, j], "multiplicity": m}
                      for (i, j), m in sorted(self.edges.items())],
        }


def build_curve_graph(p: LatticePolytope, res: Sequence[EdgeResolution]) -> CurveGraph:
    facet_int, _ = face_lattice_counts(p)
    verts: List[Curve] = []
    for i, g in enumerate(facet_int):
        verts.append(Curve(id=i, kind="facet", genus=g,
                           self_intersection=2 * g - 2, origin=("facet", i)))
    edges: Dict[Tuple[int, int], int] = {}

    def link(a, b, m=1):
        key = (min(a, b), max(a, b))
        edges[key] = edges.get(key, 0) + m

    for r in res:
        fi, fj = r.facets
        if r.a_type == 0:
            link(fi, fj, r.multiplicity)
            continue
        for copy in range(r.multiplicity):
            prev = fi
            for pos in range(r.a_type):
                cid = len(verts)
                verts.append(Curve(id=cid, kind="exceptional", genus=0,
                                   self_intersection=-2,
                                   origin=("edge", r.edge_id, copy, pos)))
                link(prev, cid)
                prev = cid
            link(prev, fj)
    return CurveGraph(vertices=verts, edges=edges)


@dataclass(frozen=True)
class RankReport:
    rho: int
    facet_excess: int
    edge_sum: int
    matrix_rank: int
    matrix_dim: int

    @property
    def consistent(self) -> bool:
        return self.rho == self.matrix_rank

    def to_dict(self) -> dict:
        return {"rho": self.rho, "facet_excess": self.facet_excess,
                "edge_sum": self.edge_sum, "matrix_rank": self.matrix_rank,
                "matrix_dim": self.matrix_dim}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def picard_rank(p: LatticePolytope, res: Sequence[EdgeResolution],
                g: CurveGraph, check: bool = True) -> RankReport:
    """rho = 1 + (#facets - 4) + sum over edges of l(E) * k_E, cross-checked
    against the exact rank of the intersection matrix."""
    excess = len(p.facets) - 4
    edge_sum = sum(r.multiplicity * r.a_type for r in res)
    rho = 1 + excess + edge_sum
    mr = linalg.rank(g.gram)
    rep = RankReport(rho=rho, facet_excess=excess, edge_sum=edge_sum,
                     matrix_rank=mr, matrix_dim=len(g.gram))
    if check and mr != rho:
        raise RankMismatch(rho, mr, f"weights {p.weights.q}")
    return rep


def toric_rank_oracle(p: LatticePolytope) -> int:
    """Picard number from the dual polytope's lattice-point counts.

    ``l(D°) - 4 - sum l*(facets of D°) + sum_edges l*(e) l*(e°)``, computed by
    enumerating lattice points of the polar dual directly.  Independent of the
    cone normal forms used by :func:`resolve_edges`.
    """
    from .polytope import polar_dual
    dual, reflexive = polar_dual(p)
    if not reflexive:
        raise ValueError("polar dual is not integral")
    dv = [tuple(int(x) for x in v) for v in dual]
    # facets of the dual correspond to vertices of Delta (origin-centred)
    o = interior_point(p)
    dvert = [tuple(a - b for a, b in zip(v, o)) for v in p.vertices]
    lo = [min(v[k] for v in dv) for k in range(3)]
    hi = [max(v[k] for v in dv) for k in range(3)]
    pts = []
    for x in range(lo[0], hi[0] + 1):
        for y in range(lo[1], hi[1] + 1):
            for z in range(lo[2], hi[2] + 1):
                if all(x * a + y * b + z * c >= -1 for a, b, c in dvert):
                    pts.append((x, y, z))
    on = {pt: [i for i, v in enumerate(dvert) if linalg.dot(pt, v) == -1] for pt in pts}
    facet_interior = sum(1 for pt in pts if len(on[pt]) == 1)
    corr = 0
    for e in p.edges:
        fi, fj = e.facets
        a, b = dv[fi], dv[fj]
        d = reduce(gcd, (abs(x - y) for x, y in zip(a, b)))
        corr += (e.lattice_length - 1) * (d - 1)
    return len(pts) - 4 - facet_interior + corr
