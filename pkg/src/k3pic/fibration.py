"""Elliptic fibrations read off the curve graph.

A fibration is determined by its fibre class ``F``, written as an integer
combination of graph curves.  Curves with ``F.C = 0`` are vertical; the rest
are sections (degree 1) or multisections.  Vertical components that are
proper subdiagrams of an extended Dynkin diagram are completed with
"virtual" (-2)-curves that the toric graph does not see.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce
from itertools import product
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .budget import as_budget
from .discform import (discriminant_form, enumerate_isotropic, is_isomorphic,
                       overlattice_gram)
from .errors import (BudgetExhausted, CapExceeded, HasSection, InfiniteMW, NoFibreFound,
                     Overfull, RankMismatch, ValidationError)
from .lattice import GramLattice, root_gram
from .resolution import Curve, CurveGraph

IRREDUCIBLE = "I"


# -- extended Dynkin diagrams ----------------------------------------------------

@dataclass(frozen=True)
class Diagram:
    name: str                 # "A~3", "D~5", "E~7"
    adjacency: Tuple[Tuple[int, ...], ...]
    marks: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.marks)

    @property
    def family(self) -> str:
        return self.name[0]

    @property
    def n(self) -> int:
        return int(self.name[2:])


def _adjacency(n: int, edges) -> Tuple[Tuple[int, ...], ...]:
    a = [[0] * n for _ in range(n)]
    for i, j in edges:
        a[i][j] += 1
        a[j][i] += 1
    return tuple(tuple(r) for r in a)


def _marks(adj) -> Tuple[int, ...]:
    n = len(adj)
    g = [[-2 if i == j else adj[i][j] for j in range(n)] for i in range(n)]
    (v,) = linalg.integer_kernel(g)
    if v[0] < 0:
        v = [-x for x in v]
    return tuple(v)


def extended_diagram(family: str, n: int) -> Diagram:
    if family == "A":
        if n < 1:
            raise ValueError("A~n needs n >= 1")
        # n = 1: two curves meeting twice
        edges = [(0, 1), (0, 1)] if n == 1 else [(i, (i + 1) % (n + 1)) for i in range(n + 1)]
        adj = _adjacency(n + 1, edges)
    elif family == "D":
        if n < 4:
            raise ValueError("D~n needs n >= 4")
        m = n - 3                            # spine length
        edges = [(i, i + 1) for i in range(m - 1)]
        edges += [(0, m), (0, m + 1), (m - 1, m + 2), (m - 1, m + 3)]
        adj = _adjacency(n + 1, edges)
    elif family == "E":
        legs = {6: (2, 2, 2), 7: (3, 3, 1), 8: (5, 2, 1)}.get(n)
        if legs is None:
            raise ValueError("E~n needs n in 6, 7, 8")
        edges, nxt = [], 1
        for ln in legs:
            prev = 0
            for _ in range(ln):
                edges.append((prev, nxt))
                prev = nxt
                nxt += 1
        adj = _adjacency(nxt, edges)
    else:
        raise ValueError(family)
    return Diagram(name=f"{family}~{n}", adjacency=adj, marks=_marks(adj))


def diagrams_of_size(size: int) -> List[Diagram]:
    out = []
    if size >= 2:
        out.append(extended_diagram("A", size - 1))
    if size >= 5:
        out.append(extended_diagram("D", size - 1))
    for n in (6, 7, 8):
        if size == n + 1:
            out.append(extended_diagram("E", n))
    return out


def root_part(name: str) -> Tuple[str, int]:
    """``"D~16" -> ("D", 16)``."""
    return name[0], int(name[2:])


def disc_order(name: str) -> int:
    """Order of the discriminant group of the fibre's root lattice."""
    if name == IRREDUCIBLE:
        return 1
    fam, n = root_part(name)
    if fam == "A":
        return n + 1
    if fam == "D":
        return 4
    return {6: 3, 7: 2, 8: 1}[n]


# -- report types ---------------------------------------------------------------

@dataclass(frozen=True)
class KodairaFibre:
    dynkin_type: str
    component_ids: Tuple[int, ...]
    added_count: int
    marks: Tuple[int, ...]

    @property
    def components(self) -> int:
        return len(self.component_ids)

    @property
    def reducible(self) -> bool:
        return self.dynkin_type != IRREDUCIBLE

    def to_dict(self) -> dict:
        return {"type": self.dynkin_type, "components": list(self.component_ids),
                "added": self.added_count, "marks": list(self.marks)}


@dataclass(frozen=True)
class VirtualCurve:
    id: int
    meets: Tuple[Tuple[int, int], ...]      # (curve id, intersection number)


@dataclass
class FibrationReport:
    fibres: List[KodairaFibre]
    sections: List[int]
    multisections: List[Tuple[int, int]]
    rk_mw: int
    fibre_class: Tuple[int, ...]
    virtual: List[VirtualCurve] = field(default_factory=list)
    mw_lower: Optional[int] = None
    mw_upper: Optional[int] = None
    disc_product: int = 1
    pic_disc_candidates: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def added_count(self) -> int:
        return sum(f.added_count for f in self.fibres)

    def type_counts(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for f in self.fibres:
            out[f.dynkin_type] = out.get(f.dynkin_type, 0) + 1
        return out

    def describe(self) -> str:
        parts = [f"{c}x{t}" if c > 1 else t for t, c in sorted(self.type_counts().items())]
        return " + ".join(parts)

    def to_dict(self) -> dict:
        return {
            "fibres": [f.to_dict() for f in self.fibres],
            "sections": self.sections,
            "multisections": [list(m) for m in self.multisections],
            "rk_mw": self.rk_mw,
            "mw_lower": self.mw_lower,
            "mw_upper": self.mw_upper,
            "disc_product": self.disc_product,
            "pic_disc_candidates": [list(c) for c in self.pic_disc_candidates],
            "fibre_class": list(self.fibre_class),
            "virtual": [{"id": v.id, "meets": [list(m) for m in v.meets]} for v in self.virtual],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


class FibrationList(list):
    """Search result; ``truncated`` is set when the budget ran out."""
    truncated = False


# -- Shioda-Tate and Mordell-Weil -------------------------------------------------

def shioda_tate_check(fibres: Sequence, n_sections_exhibited: Optional[int], rho: int) -> int:
    """``rho - 2 - sum(components - 1)``; fibres may be KodairaFibre objects,
    diagram names or component counts.

    ``n_sections_exhibited`` is informational: the count does not enter the
    formula, and ``0``/``None`` marks a sectionless (Jacobian) fibration.
    """
    total = 0
    for f in fibres:
        if isinstance(f, KodairaFibre):
            c = f.components
        elif isinstance(f, str):
            c = 1 if f == IRREDUCIBLE else extended_diagram(*root_part(f)).size
        else:
            c = int(f)
        total += c - 1
    rk = rho - 2 - total
    if rk < 0:
        raise Overfull(rk)
    return rk


def mw_bounds(r: FibrationReport) -> Tuple[int, int, List[int]]:
    """Bounds on the order of a finite Mordell-Weil group.

    The upper bound is the gcd of the discriminant-group orders of the
    reducible fibres (1 when there are none); candidates are the orders in
    range whose square divides the product of those orders.
    """
    if r.rk_mw > 0:
        raise InfiniteMW(f"rk(MW) = {r.rk_mw}")
    if not r.sections:
        raise ValidationError("no section exhibited")
    lower = len(r.sections)
    orders = [disc_order(f.dynkin_type) for f in r.fibres if f.reducible]
    upper = reduce(gcd, orders) if orders else 1
    prod_ = 1
    for o in orders:
        prod_ *= o
    cands = [m for m in range(lower, upper + 1) if prod_ % (m * m) == 0]
    return lower, upper, cands


# -- the search ---------------------------------------------------------------

def _components(vertices: Sequence[int], gram) -> List[List[int]]:
    left = set(vertices)
    out = []
    for v in sorted(vertices):
        if v not in left:
            continue
        comp, stack = [], [v]
        left.discard(v)
        while stack:
            x = stack.pop()
            comp.append(x)
            for y in list(left):
                if gram[x][y]:
                    left.discard(y)
                    stack.append(y)
        out.append(sorted(comp))
    return out


def _sub(gram, idx):
    return [[gram[i][j] for j in idx] for i in idx]


def _kind(gram, idx) -> str:
    """'definite', 'affine' (semidefinite, corank 1) or 'other'."""
    pos, zero, neg = linalg.inertia(_sub(gram, idx))
    if pos == 0 and zero == 0:
        return "definite"
    if pos == 0 and zero == 1:
        return "affine"
    return "other"


def _affine_marks(gram, idx) -> List[int]:
    (v,) = linalg.integer_kernel(_sub(gram, idx))
    if v[0] < 0:
        v = [-x for x in v]
    return v


def dynkin_seeds(g: CurveGraph, budget=None) -> List[Tuple[int, ...]]:
    """Connected sets of (-2)-curves spanning an extended Dynkin diagram,
    found by growing negative definite connected sets."""
    budget = as_budget(budget)
    gram = g.gram
    roots = [c.id for c in g.vertices if c.self_intersection == -2 and c.genus == 0]
    rset = set(roots)
    seen = set()
    out = []
    stack = [frozenset([v]) for v in reversed(roots)]
    while stack:
        s = stack.pop()
        if s in seen:
            continue
        seen.add(s)
        budget.tick()
        kind = _kind(gram, sorted(s))
        if kind == "affine":
            out.append(tuple(sorted(s)))
            continue
        if kind != "definite":
            continue
        nbrs = {y for x in s for y in g.neighbours(x) if y in rset and y not in s}
        for y in sorted(nbrs, reverse=True):
            t = s | {y}
            if t not in seen:
                stack.append(t)
    out.sort()
    return out


def _embeddings(gram, comp: Sequence[int], target: Diagram, budget):
    """Injective maps comp -> target vertices preserving all intersection
    numbers (induced subgraph embeddings)."""
    order = []
    left = list(comp)
    while left:
        nxt = next((v for v in left if any(gram[v][u] for u in order)), left[0])
        order.append(nxt)
        left.remove(nxt)
    adj = target.adjacency
    img: Dict[int, int] = {}
    used = set()

    def rec(t):
        budget.tick()
        if t == len(order):
            yield dict(img)
            return
        v = order[t]
        for x in range(target.size):
            if x in used:
                continue
            if any(adj[x][img[u]] != gram[v][u] for u in order[:t]):
                continue
            img[v] = x
            used.add(x)
            yield from rec(t + 1)
            used.discard(x)
            del img[v]

    yield from rec(0)


@dataclass(frozen=True)
class _Completion:
    diagram: str
    marks: Tuple[Tuple[int, int], ...]                 # (real curve, mark)
    virtual: Tuple[Tuple[int, Tuple[Tuple[int, int], ...], Tuple[int, ...]], ...]
    # virtual entries: (mark, ((real curve, mult), ...), (other virtual index, ...))


def _represent(r: int, marks: Sequence[int]) -> Optional[List[int]]:
    """Nonnegative x with sum x_i * marks_i = r, preferring the fewest terms."""
    best: Dict[int, List[int]] = {0: [0] * len(marks)}
    for total in range(1, r + 1):
        cand = None
        for i, m in enumerate(marks):
            if m <= total and (total - m) in best:
                x = list(best[total - m])
                x[i] += 1
                if cand is None or sum(x) < sum(cand):
                    cand = x
        if cand is not None:
            best[total] = cand
    return best.get(r)


def complete_component(g: CurveGraph, comp: Sequence[int], degrees: Sequence[int],
                       horizontal: Sequence[int], budget=None,
                       max_add: int = 8) -> Tuple[int, List[Tuple[_Completion, Dict]]]:
    """Minimal completions of a negative definite (-2)-component.

    Returns ``(added, options)``; each option pairs a completion with the
    intersections ``{(horizontal curve, virtual index): mult}`` needed to
    make every horizontal curve meet the fibre in its degree.
    """
    budget = as_budget(budget)
    gram = g.gram
    for a in range(1, max_add + 1):
        options = []
        keys = set()
        for target in diagrams_of_size(len(comp) + a):
            for emb in _embeddings(gram, comp, target, budget):
                inv = {x: v for v, x in emb.items()}
                free = [x for x in range(target.size) if x not in inv]
                mark = dict((v, target.marks[x]) for v, x in emb.items())
                virt = []
                for x in free:
                    meets = tuple(sorted((inv[y], target.adjacency[x][y])
                                         for y in inv if target.adjacency[x][y]))
                    others = tuple(free.index(y) for y in free if target.adjacency[x][y])
                    virt.append((target.marks[x], meets, others))
                comp_key = (target.name, tuple(sorted(mark.items())),
                            tuple(sorted(virt)))
                if comp_key in keys:
                    continue
                keys.add(comp_key)
                # horizontal curves must meet the completed fibre in their degree
                extra = {}
                ok = True
                for h in horizontal:
                    r = degrees[h] - sum(mark[v] * gram[h][v] for v in comp)
                    if r < 0:
                        ok = False
                        break
                    if r:
                        x = _represent(r, [m for m, _, _ in virt])
                        if x is None:
                            ok = False
                            break
                        for i, c in enumerate(x):
                            if c:
                                extra[(h, i)] = c
                if ok:
                    options.append((_Completion(target.name, tuple(sorted(mark.items())),
                                                tuple(virt)), extra))
        if options:
            return a, options
    return 0, []


def _fibre_degrees(gram, f) -> List[int]:
    return linalg.matvec(gram, f)


def _analyse_class(g: CurveGraph, f: Sequence[int], rho: int, budget):
    """All fibrations with fibre class ``f``; empty when ``f`` is not nef
    or some vertical component cannot be a fibre."""
    gram = g.gram
    n = len(g)
    deg = _fibre_degrees(gram, f)
    if any(d < 0 for d in deg):
        return []
    vertical = [i for i in range(n) if deg[i] == 0]
    horizontal = [i for i in range(n) if deg[i] > 0]
    for i in horizontal:
        if deg[i] == 1 and g.vertices[i].genus > 0:
            return []
    fixed: List[KodairaFibre] = []
    pending = []          # (component, added, options)
    for comp in _components(vertical, gram):
        curves = [g.vertices[i] for i in comp]
        if any(c.genus >= 2 for c in curves):
            return []
        if any(c.genus == 1 for c in curves):
            if len(comp) != 1:
                return []
            fixed.append(KodairaFibre(IRREDUCIBLE, tuple(comp), 0, (1,)))
            continue
        kind = _kind(gram, comp)
        if kind == "affine":
            marks = _affine_marks(gram, comp)
            v = [0] * n
            for i, m in zip(comp, marks):
                v[i] = m
            if _fibre_degrees(gram, v) != deg:
                return []
            name = _identify(gram, comp)
            if name is None:
                return []
            fixed.append(KodairaFibre(name, tuple(comp), 0, tuple(marks)))
        elif kind == "definite":
            added, opts = complete_component(g, comp, deg, horizontal, budget)
            if not opts:
                return []
            pending.append((comp, added, opts))
        else:
            return []
    sections = [i for i in horizontal if deg[i] == 1]
    multis = [(i, deg[i]) for i in horizontal if deg[i] > 1]
    reports = []
    for choice in product(*(opts for _, _, opts in pending)):
        budget.tick()
        fibres = list(fixed)
        virtual: List[VirtualCurve] = []
        nid = n
        for (comp, added, _), (cpl, extra) in zip(pending, choice):
            ids = [nid + k for k in range(len(cpl.virtual))]
            for k, (m, meets, others) in enumerate(cpl.virtual):
                hm = tuple((h, c) for (h, vi), c in sorted(extra.items()) if vi == k)
                virtual.append(VirtualCurve(ids[k], tuple(sorted(meets + hm
                                                                 + tuple((ids[o], 1) for o in others)))))
            cmarks = dict(cpl.marks)
            fibres.append(KodairaFibre(cpl.diagram, tuple(comp) + tuple(ids), len(ids),
                                       tuple(cmarks[c] for c in comp)
                                       + tuple(m for m, _, _ in cpl.virtual)))
            nid += len(ids)
        try:
            rk = shioda_tate_check(fibres, len(sections), rho)
        except Overfull:
            continue
        rep = FibrationReport(fibres=sorted(fibres, key=lambda fb: fb.component_ids),
                              sections=sections, multisections=multis, rk_mw=rk,
                              fibre_class=tuple(f), virtual=virtual)
        if virtual and linalg.rank(completed_graph(g, rep).gram) != rho:
            continue
        _fill_mw(rep)
        reports.append(rep)
    return reports


def _identify(gram, comp) -> Optional[str]:
    for target in diagrams_of_size(len(comp)):
        for _ in _embeddings(gram, comp, target, as_budget(None)):
            return target.name
    return None


def _fill_mw(rep: FibrationReport) -> None:
    orders = [disc_order(f.dynkin_type) for f in rep.fibres if f.reducible]
    rep.disc_product = 1
    for o in orders:
        rep.disc_product *= o
    if rep.rk_mw == 0 and rep.sections:
        lo, up, cands = mw_bounds(rep)
        rep.mw_lower, rep.mw_upper = lo, up
        rep.pic_disc_candidates = [(m, rep.disc_product // (m * m)) for m in cands]


def completed_graph(g: CurveGraph, rep: FibrationReport) -> CurveGraph:
    """The curve graph with the report's virtual curves appended."""
    verts = list(g.vertices)
    edges = dict(g.edges)
    for v in rep.virtual:
        verts.append(Curve(id=v.id, kind="virtual", genus=0, self_intersection=-2,
                           origin=("virtual",)))
    for v in rep.virtual:
        for other, m in v.meets:
            edges[(min(v.id, other), max(v.id, other))] = m
    return CurveGraph(vertices=verts, edges=edges)


def find_fibrations(g: CurveGraph, rho: int, budget=None) -> FibrationList:
    """Enumerate fibrations seeded by genus-1 curves and extended Dynkin
    subgraphs; ranked by rk(MW) then by number of virtual curves."""
    budget = as_budget(budget)
    n = len(g)
    out = FibrationList()
    seen = set()
    try:
        seeds: List[List[int]] = []
        for c in g.vertices:
            if c.genus == 1 and c.self_intersection == 0:
                f = [0] * n
                f[c.id] = 1
                seeds.append(f)
        if not seeds and not dynkin_seeds(g, budget):
            raise NoFibreFound("no genus-1 curve and no extended Dynkin subgraph")
        for s in dynkin_seeds(g, budget):
            f = [0] * n
            for i, m in zip(s, _affine_marks(g.gram, list(s))):
                f[i] = m
            seeds.append(f)
        for f in seeds:
            key = tuple(_fibre_degrees(g.gram, f))
            if key in seen:
                continue
            seen.add(key)
            out.extend(_analyse_class(g, f, rho, budget))
    except BudgetExhausted:
        out.truncated = True
    out.sort(key=lambda r: (r.rk_mw != 0, r.rk_mw, r.added_count, len(r.fibres)))
    return out


# -- sectionless fibrations --------------------------------------------------

def jacobian_lattice(r: FibrationReport) -> GramLattice:
    blocks = [[[0, 1], [1, 0]]]
    for f in r.fibres:
        if f.reducible:
            blocks.append(root_gram(*root_part(f.dynkin_type)))
    return GramLattice.from_matrix(linalg.block_diag(*blocks))


def jacobian_analysis(r: FibrationReport, rho: int, budget=None, cap: int = 4096):
    """Picard lattice of the Jacobian fibration, the multisection index and
    candidate index-n sublattices containing the fibre class.

    Candidates are kernels of surjections ``L -> Z/n`` vanishing on the fibre
    class (basis vector 0 of the ``U`` summand), one per discriminant-form
    isomorphism class.
    """
    if r.sections:
        raise HasSection("fibration has a section; use the Picard lattice directly")
    if not r.multisections:
        raise ValidationError("no multisection exhibited")
    budget = as_budget(budget)
    jac = jacobian_lattice(r)
    expected = 2 + sum(f.components - 1 for f in r.fibres)
    if jac.rank != rho or expected != rho:
        raise RankMismatch(expected, rho, "Jacobian fibre accounting")
    n = reduce(gcd, (d for _, d in r.multisections))
    if n == 1:
        return jac, 1, [jac]
    rk = jac.rank
    seen_hnf = set()
    cands: List[GramLattice] = []
    forms = []
    for phi in product(range(n), repeat=rk - 1):
        budget.tick()
        phi = (0,) + phi
        if reduce(gcd, phi, n) != 1:
            continue
        kern = linalg.integer_kernel([list(phi) + [n]])
        basis = linalg.hermite_rows([k[:rk] for k in kern])
        key = tuple(map(tuple, basis))
        if key in seen_hnf:
            continue
        seen_hnf.add(key)
        gm = linalg.matmul(linalg.matmul(basis, jac.matrix()), linalg.transpose(basis))
        lat = GramLattice.from_matrix(gm)
        q = discriminant_form(lat)
        dup = False
        for other, oq in zip(cands, forms):
            if other.det != lat.det:
                continue
            try:
                if is_isomorphic(q, oq, cap=cap, budget=budget):
                    dup = True
                    break
            except CapExceeded:
                if sorted(q.invariant_factors()) == sorted(oq.invariant_factors()):
                    dup = True
                    break
        if not dup:
            cands.append(lat)
            forms.append(q)
    return jac, n, cands


def pic_candidates(r: FibrationReport, rho: int, budget=None,
                   cap: int = 4096) -> List[Tuple[int, GramLattice]]:
    """Candidate Picard lattices ``(|MW| or index, lattice)`` implied by a
    fibration with finite Mordell-Weil group.

    With sections, each admissible |MW| = m gives the overlattices of
    ``U + roots`` glued along isotropic subgroups of order m; without
    sections the Jacobian candidates are returned.
    """
    budget = as_budget(budget)
    if r.rk_mw != 0:
        return []
    if not r.sections:
        if not r.multisections:
            return []
        _, n, cands = jacobian_analysis(r, rho, budget=budget, cap=cap)
        return [(n, c) for c in cands]
    triv = jacobian_lattice(r)
    out = []
    for m, _ in r.pic_disc_candidates:
        if m == 1:
            out.append((1, triv))
            continue
        q = discriminant_form(triv)
        for h in enumerate_isotropic(q, order=m, cap=cap, budget=budget):
            out.append((m, overlattice_gram(triv, h, form=q)))
    return out


def best_report(reports: Sequence[FibrationReport]) -> Optional[FibrationReport]:
    """The report the Picard lattice is read from: a fibration with a
    section and finite MW if there is one, otherwise the top-ranked one."""
    for r in reports:
        if r.sections and r.rk_mw == 0:
            return r
    return reports[0] if reports else None


# -- export -----------------------------------------------------------------

_COLOURS = ["red", "blue", "darkgreen", "orange", "purple", "brown", "magenta",
            "cyan", "gold", "grey"]


def report_dot(g: CurveGraph, rep: FibrationReport, name: str = "fibration") -> str:
    full = completed_graph(g, rep)
    styles: Dict[int, dict] = {}
    for k, f in enumerate(rep.fibres):
        for c in f.component_ids:
            styles.setdefault(c, {})["color"] = _COLOURS[k % len(_COLOURS)]
    for s in rep.sections:
        styles.setdefault(s, {})["shape"] = "box"
    for m, _ in rep.multisections:
        styles.setdefault(m, {})["shape"] = "diamond"
    return full.to_dot(name=name, styles=styles)
