"""Finite quadratic forms: discriminant forms of even lattices, Nikulin's
atoms ``u_k``, ``v_k``, ``w^eps_{p,k}``, isomorphism testing, isotropic
subgroups and overlattices.

A form lives on ``G = Z/d_1 + ... + Z/d_r`` (a direct sum of cyclic groups,
one generator each); it is stored as the raw rational values ``q(g_i)`` and
``b(g_i, g_j)``.  Values are reduced mod 2 (``q``) or mod 1 (``b``) only when
compared, so the unreduced "lifted" values stay available for tables that
print signed representatives.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from itertools import product
from math import floor, gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import linalg
from .budget import Budget, as_budget
from .errors import (CapExceeded, InvalidFormParams, NonIntegralGlue, NotIsotropic,
                     ParseError, ValidationError)
from .lattice import GramLattice

Elem = Tuple[int, ...]
DEFAULT_CAP = 2 ** 16


def mod2(x) -> Fraction:
    x = Fraction(x)
    return x - 2 * floor(x / 2)


def mod1(x) -> Fraction:
    x = Fraction(x)
    return x - floor(x)


def _factor(n: int) -> Dict[int, int]:
    out: Dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


class FiniteQuadraticForm:
    """Quadratic form ``q: G -> Q/2Z`` on a finite abelian group."""

    def __init__(self, orders: Sequence[int], q_gen: Sequence, b_gen: Sequence[Sequence],
                 label: Optional[str] = None, lifts: Optional[List[List[Fraction]]] = None,
                 gram: Optional[Sequence[Sequence[int]]] = None):
        self.orders = tuple(int(d) for d in orders)
        self.q_gen = tuple(Fraction(x) for x in q_gen)
        self.b_gen = tuple(tuple(Fraction(x) for x in row) for row in b_gen)
        self.label = label
        self.lifts = lifts            # generator i as a rational vector of the source lattice
        self.gram = gram              # Gram matrix of the source lattice, if any
        r = len(self.orders)
        if len(self.q_gen) != r or len(self.b_gen) != r:
            raise ValidationError("generator table has the wrong size")
        for i, d in enumerate(self.orders):
            if d < 2:
                raise ValidationError("cyclic factors must have order >= 2")
            if mod1(self.b_gen[i][i] - self.q_gen[i]) != 0:
                raise ValidationError("b(g, g) and q(g) disagree mod 1")
            if mod2(d * d * self.q_gen[i]) != 0 or (d * self.q_gen[i]).denominator != 1:
                raise ValidationError(f"q(g_{i}) = {self.q_gen[i]} is not compatible with order {d}")
            for j in range(r):
                if self.b_gen[i][j] != self.b_gen[j][i]:
                    raise ValidationError("bilinear table is not symmetric")
                if (d * self.b_gen[i][j]).denominator != 1:
                    raise ValidationError("bilinear values incompatible with orders")

    # -- group arithmetic -------------------------------------------------

    @property
    def rank(self) -> int:
        return len(self.orders)

    @property
    def order(self) -> int:
        out = 1
        for d in self.orders:
            out *= d
        return out

    @property
    def zero(self) -> Elem:
        return (0,) * self.rank

    def elements(self) -> Iterable[Elem]:
        return product(*(range(d) for d in self.orders))

    def add(self, x: Elem, y: Elem) -> Elem:
        return tuple((a + b) % d for a, b, d in zip(x, y, self.orders))

    def sub(self, x: Elem, y: Elem) -> Elem:
        return tuple((a - b) % d for a, b, d in zip(x, y, self.orders))

    def scale(self, c: int, x: Elem) -> Elem:
        return tuple((c * a) % d for a, d in zip(x, self.orders))

    def normalize(self, x: Sequence[int]) -> Elem:
        return tuple(a % d for a, d in zip(x, self.orders))

    def elem_order(self, x: Elem) -> int:
        return reduce(_lcm, (d // gcd(a, d) for a, d in zip(x, self.orders)), 1)

    def q_lift(self, x: Sequence[int]) -> Fraction:
        """Unreduced value ``sum x_i^2 q_i + 2 sum_{i<j} x_i x_j b_ij``."""
        val = Fraction(0)
        idx = [i for i, a in enumerate(x) if a]
        for n, i in enumerate(idx):
            a = x[i]
            val += a * a * self.q_gen[i]
            row = self.b_gen[i]
            for j in idx[n + 1:]:
                val += 2 * a * x[j] * row[j]
        return val

    def q(self, x: Sequence[int]) -> Fraction:
        return mod2(self.q_lift(x))

    def b(self, x: Sequence[int], y: Sequence[int]) -> Fraction:
        val = Fraction(0)
        for i, a in enumerate(x):
            if a:
                row = self.b_gen[i]
                for j, c in enumerate(y):
                    if c:
                        val += a * c * row[j]
        return mod1(val)

    @cached_property
    def value_table(self) -> Dict[Elem, Fraction]:
        return {x: self.q(x) for x in self.elements()}

    def span(self, gens: Iterable[Elem]) -> frozenset:
        h = {self.zero}
        for g in gens:
            g = self.normalize(g)
            if g in h:
                continue
            mult = []
            cur = g
            while cur not in h:
                mult.append(cur)
                cur = self.add(cur, g)
            new = set(h)
            for m in mult:
                new.update(self.add(x, m) for x in h)
            h = new
        return frozenset(h)

    def invariant_factors(self) -> List[int]:
        d, _, _ = linalg.smith_normal_form([[d if i == j else 0 for j in range(self.rank)]
                                            for i, d in enumerate(self.orders)])
        return [x for x in d if x > 1]

    # -- derived forms ----------------------------------------------------

    def subform(self, gens: Sequence[Elem], orders: Sequence[int],
                label: Optional[str] = None) -> "FiniteQuadraticForm":
        """Form on the subgroup with direct-sum basis ``gens`` (of ``orders``)."""
        gens = [self.normalize(g) for g in gens]
        qg = [self.q_lift(g) for g in gens]
        bg = [[self._b_lift(g, h) for h in gens] for g in gens]
        lifts = None
        if self.lifts is not None:
            n = len(self.lifts[0]) if self.lifts else 0
            lifts = [[sum((c * self.lifts[i][k] for i, c in enumerate(g)), Fraction(0))
                      for k in range(n)] for g in gens]
        return FiniteQuadraticForm(orders, qg, bg, label=label, lifts=lifts, gram=self.gram)

    def _b_lift(self, x, y) -> Fraction:
        val = Fraction(0)
        for i, a in enumerate(x):
            if a:
                for j, c in enumerate(y):
                    if c:
                        val += a * c * self.b_gen[i][j]
        return val

    def primary_parts(self) -> Dict[int, "FiniteQuadraticForm"]:
        gens: Dict[int, List[Tuple[Elem, int]]] = {}
        for i, d in enumerate(self.orders):
            for p, a in _factor(d).items():
                e = [0] * self.rank
                e[i] = d // p ** a
                gens.setdefault(p, []).append((tuple(e), p ** a))
        out = {}
        for p in sorted(gens):
            gs = gens[p]
            out[p] = self.subform([g for g, _ in gs], [o for _, o in gs])
        return out

    def __add__(self, other: "FiniteQuadraticForm") -> "FiniteQuadraticForm":
        r, s = self.rank, other.rank
        b = [[Fraction(0)] * (r + s) for _ in range(r + s)]
        for i in range(r):
            for j in range(r):
                b[i][j] = self.b_gen[i][j]
        for i in range(s):
            for j in range(s):
                b[r + i][r + j] = other.b_gen[i][j]
        parts = [x for x in (self.label, other.label) if x and x != "0"]
        label = "+".join(parts) if parts or (self.label and other.label) else None
        if self.label == "0" and other.label == "0":
            label = "0"
        return FiniteQuadraticForm(self.orders + other.orders, self.q_gen + other.q_gen, b,
                                   label=label)

    def __repr__(self):
        lab = f" {self.label}" if self.label else ""
        return f"<FiniteQuadraticForm{lab} on {list(self.orders)}>"

    def to_dict(self, full_table_limit: int = 4096) -> dict:
        out = {"group": list(self.orders), "label": self.label or canonical_label(self)}
        if self.order <= full_table_limit:
            out["q"] = [[",".join(map(str, x)), str(v)] for x, v in self.value_table.items()]
        else:
            out["q_generators"] = [str(mod2(x)) for x in self.q_gen]
            out["b_generators"] = [[str(mod1(x)) for x in row] for row in self.b_gen]
        return out


def trivial_form() -> FiniteQuadraticForm:
    return FiniteQuadraticForm((), (), (), label="0")


# -- from a lattice -----------------------------------------------------------

def discriminant_form(lat) -> FiniteQuadraticForm:
    """Discriminant form ``q(x) = <x, x> mod 2`` on ``L*/L``.

    Generators are images of the dual-basis combinations singled out by the
    Smith normal form of the Gram matrix.
    """
    g = lat.gram if isinstance(lat, GramLattice) else lat
    g = [list(r) for r in g]
    n = len(g)
    if n == 0:
        return trivial_form()
    d, u, _ = linalg.smith_normal_form(g)
    if any(x == 0 for x in d):
        raise ValidationError("lattice is degenerate")
    ginv = linalg.inverse(g)
    uinv = linalg.inverse(u)
    keep = [i for i, x in enumerate(d) if x > 1]
    # generator i of L*/L: the vector G^-1 U^-1 e_i of L (x) Q
    cols = [[uinv[r][i] for r in range(n)] for i in keep]
    lifts = [linalg.matvec(ginv, c) for c in cols]
    qg = [linalg.dot(v, linalg.matvec(g, v)) for v in lifts]
    bg = [[linalg.dot(v, linalg.matvec(g, w)) for w in lifts] for v in lifts]
    return FiniteQuadraticForm([d[i] for i in keep], qg, bg, lifts=lifts, gram=g)


# -- Nikulin atoms --------------------------------------------------------------

def _legendre(a: int, p: int) -> int:
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, int(p ** 0.5) + 1))


def atom(kind: str, *params: int) -> FiniteQuadraticForm:
    """``atom('w', p, k, eps)``, ``atom('u', k)`` or ``atom('v', k)``."""
    if kind == "w":
        if len(params) != 3:
            raise InvalidFormParams("w needs (p, k, eps)")
        p, k, eps = params
        if not _is_prime(p) or k < 1:
            raise InvalidFormParams(f"w({p},{k},{eps}): need p prime and k >= 1")
        if p == 2:
            allowed = (1, -1) if k == 1 else (1, -1, 5, -5)
            if eps not in allowed:
                raise InvalidFormParams(f"w(2,{k},{eps}): eps must be in {allowed}")
            val = Fraction(eps, 2 ** k)
        else:
            if eps not in (1, -1):
                raise InvalidFormParams(f"w({p},{k},{eps}): eps must be +-1")
            a = 2
            while a % p == 0 or _legendre(a, p) != eps:
                a += 2
            val = Fraction(a, p ** k)
        return FiniteQuadraticForm((p ** k,), (val,), ((val,),), label=f"w({p},{k},{eps})")
    if kind in ("u", "v"):
        if len(params) != 1 or params[0] < 1:
            raise InvalidFormParams(f"{kind} needs one parameter k >= 1")
        k = params[0]
        s = Fraction(1, 2 ** k)
        diag = 0 if kind == "u" else 2 * s
        return FiniteQuadraticForm((2 ** k, 2 ** k), (diag, diag), ((diag, s), (s, diag)),
                                   label=f"{kind}({k})")
    raise InvalidFormParams(f"unknown atom kind {kind!r}")


_FORM_TERM = re.compile(r"\s*(?:([wuv])\(\s*(-?\d+(?:\s*,\s*-?\d+)*)\s*\)|(0))(?:\s*\^\s*(\d+))?\s*")


def parse_form(text: str) -> FiniteQuadraticForm:
    """Parse ``w(p,k,eps)``, ``u(k)``, ``v(k)`` terms joined by ``+``; a
    term may carry ``^m``.  ``0`` is the trivial form."""
    pos = 0
    terms = []
    text = text.strip()
    while True:
        m = _FORM_TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError("bad form term", pos, text)
        times = int(m.group(4) or 1)
        if m.group(3):
            f = trivial_form()
        else:
            f = atom(m.group(1), *(int(x) for x in m.group(2).split(",")))
        terms.extend([f] * times)
        pos = m.end()
        if pos == len(text):
            break
        if text[pos] != "+":
            raise ParseError("expected '+'", pos, text)
        pos += 1
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    out.label = _compress_label([t.label for t in terms if t.label != "0"]) or "0"
    return out


def _compress_label(parts: List[str]) -> str:
    out = []
    for p in parts:
        if out and out[-1][0] == p:
            out[-1][1] += 1
        else:
            out.append([p, 1])
    return "+".join(p if n == 1 else f"{p}^{n}" for p, n in out)


def negate(f: FiniteQuadraticForm) -> FiniteQuadraticForm:
    return FiniteQuadraticForm(f.orders, [-x for x in f.q_gen],
                               [[-x for x in row] for row in f.b_gen],
                               lifts=f.lifts, gram=None if f.gram is None else
                               [[-x for x in row] for row in f.gram])


# -- isomorphism ------------------------------------------------------------------

def _signature(f: FiniteQuadraticForm) -> Counter:
    return Counter((f.elem_order(x), v) for x, v in f.value_table.items())


def _check_cap(f, cap):
    if f.order > cap:
        raise CapExceeded(f"group of order {f.order} exceeds cap {cap}")


def _iso_search(f1: FiniteQuadraticForm, f2: FiniteQuadraticForm, budget: Budget,
                leaf_check=None, partial_check=None):
    """Backtracking search for generator images; ``f1`` and ``f2`` are forms
    of equal order.  Returns a list of images or None."""
    order_idx = sorted(range(f1.rank), key=lambda i: -f1.orders[i])
    pools: Dict[Tuple[int, Fraction], List[Elem]] = {}
    for x, v in f2.value_table.items():
        pools.setdefault((f2.elem_order(x), v), []).append(x)
    images: Dict[int, Elem] = {}

    def rec(t):
        budget.tick()
        if t == len(order_idx):
            imgs = [images[i] for i in range(f1.rank)]
            if leaf_check is None or leaf_check(imgs):
                return imgs
            return None
        i = order_idx[t]
        key = (f1.orders[i], mod2(f1.q_gen[i]))
        for y in pools.get(key, ()):
            if any(f2.b(y, images[j]) != mod1(f1.b_gen[i][j]) for j in order_idx[:t]):
                continue
            images[i] = y
            if partial_check is None or partial_check(images):
                res = rec(t + 1)
                if res is not None:
                    return res
            del images[i]
        return None

    return rec(0)


def find_isomorphism(f1: FiniteQuadraticForm, f2: FiniteQuadraticForm,
                     cap: int = DEFAULT_CAP, budget=None) -> Optional[List[Elem]]:
    """Images in ``f2`` of the generators of ``f1`` under a q-preserving
    group isomorphism, or None if the forms are not isomorphic."""
    _check_cap(f1, cap)
    _check_cap(f2, cap)
    budget = as_budget(budget)
    if f1.order != f2.order:
        return None
    if f1.order == 1:
        return []
    if sorted(f1.invariant_factors()) != sorted(f2.invariant_factors()):
        return None
    if _signature(f1) != _signature(f2):
        return None
    p1, p2 = f1.primary_parts(), f2.primary_parts()
    part_maps = {}
    for p in p1:
        imgs = _iso_search(p1[p], p2[p], budget)
        if imgs is None:
            return None
        part_maps[p] = imgs
    # reassemble: generator i of f1 is a sum of its primary components
    witness = []
    prim_index = {p: 0 for p in p1}
    gens2 = {p: _primary_gens(f2, p) for p in p2}
    for i, d in enumerate(f1.orders):
        img = f2.zero
        fac = _factor(d)
        for p, a in sorted(fac.items()):
            pa = p ** a
            m = d // pa
            # idempotent coefficient: c*m = 1 mod p^a
            c = pow(m, -1, pa) if pa > 1 else 0
            comp = part_maps[p][prim_index[p]]
            prim_index[p] += 1
            # comp is in p-part coordinates of f2
            comp_full = f2.zero
            for coef, g in zip(comp, gens2[p]):
                comp_full = f2.add(comp_full, f2.scale(coef, g))
            img = f2.add(img, f2.scale(c, comp_full))
        witness.append(img)
    assert all(f2.q(witness[i]) == mod2(f1.q_gen[i]) for i in range(f1.rank))
    return witness


def _primary_gens(f: FiniteQuadraticForm, p: int) -> List[Elem]:
    out = []
    for i, d in enumerate(f.orders):
        a = _factor(d).get(p, 0)
        if a:
            e = [0] * f.rank
            e[i] = d // p ** a
            out.append(tuple(e))
    return out


def is_isomorphic(f1, f2, cap: int = DEFAULT_CAP, budget=None) -> bool:
    return find_isomorphism(f1, f2, cap=cap, budget=budget) is not None


# -- canonical labels ----------------------------------------------------------

def _w_label(p: int, k: int, val: Fraction) -> str:
    r = val * p ** k
    assert r.denominator == 1
    r = int(r)
    if p == 2:
        if k == 1:
            eps = 1 if r % 4 == 1 else -1
        else:
            eps = {1: 1, 3: -5, 5: 5, 7: -1}[r % 8]
    else:
        eps = _legendre(r, p)
    return f"w({p},{k},{eps})"


def _atom_key(label: str):
    kind, params = label[0], tuple(int(x) for x in label[2:-1].split(","))
    if kind == "w":
        return (params[0], 1, params[1], -params[2])
    return (2, 0, params[0], kind)


def canonical_label(f: FiniteQuadraticForm, cap: int = 4096) -> Optional[str]:
    """Best-effort decomposition into atoms by greedy peeling, verified by an
    isomorphism test.  Returns None if no decomposition was found.

    Atoms are printed in a fixed order, but the decomposition itself is not
    unique, so two isomorphic forms may get different labels."""
    if f.order == 1:
        return "0"
    if f.order > cap:
        return None
    atoms: List[str] = []
    for p, part in f.primary_parts().items():
        h = sorted(part.elements())
        while len(h) > 1:
            maxord = max(part.elem_order(x) for x in h)
            k = _factor(maxord)[p]
            top = [x for x in h if part.elem_order(x) == maxord]
            x = next((x for x in top if part.b(x, x).denominator == maxord), None)
            if x is not None:
                atoms.append(_w_label(p, k, part.q(x)))
                h = [y for y in h if part.b(x, y) == 0]
                continue
            pair = next(((x, y) for x in top for y in top
                         if part.b(x, y).denominator == maxord), None)
            if pair is None or p != 2:
                return None
            x, y = pair
            block = part.span([x, y])
            kind = "u" if any(part.q(z) == 0 and part.elem_order(z) == maxord
                              for z in block) else "v"
            atoms.append(f"{kind}({k})")
            h = [z for z in h if part.b(z, x) == 0 and part.b(z, y) == 0]
    label = _compress_label(sorted(atoms, key=_atom_key))
    if not is_isomorphic(parse_form(label), f):
        return None
    return label


# -- subgroups ------------------------------------------------------------------

def cyclic_decomposition(f: FiniteQuadraticForm, gens: Sequence[Elem],
                         modulo: Sequence[Elem] = ()) -> List[Tuple[Elem, int]]:
    """Direct-sum basis ``[(element, order), ...]`` of ``<gens> / <modulo>``."""
    r = f.rank
    gens = [f.normalize(g) for g in gens]
    m = len(gens)
    if m == 0:
        return []
    # relations: c with sum c_j gens_j in <modulo> + D Z^r
    a = []
    for row in range(r):
        a.append([g[row] for g in gens] + [h[row] for h in modulo]
                 + [f.orders[row] if k == row else 0 for k in range(r)])
    kern = linalg.integer_kernel(a)
    rel = linalg.hermite_rows([k[:m] for k in kern])
    d, _, v = linalg.smith_normal_form(rel)
    vinv = [[int(x) for x in row] for row in linalg.inverse(v)]
    out = []
    for i, e in enumerate(d):
        if e > 1:
            el = f.zero
            for j in range(m):
                if vinv[i][j]:
                    el = f.add(el, f.scale(vinv[i][j], gens[j]))
            out.append((el, e))
    return out


def _minimal_generators(f: FiniteQuadraticForm, elems: Iterable[Elem]) -> List[Elem]:
    gens: List[Elem] = []
    cur = frozenset([f.zero])
    for x in sorted(elems):
        if x not in cur:
            gens.append(x)
            cur = f.span(gens)
    return gens


@dataclass(frozen=True)
class IsotropicSubgroup:
    generators: Tuple[Elem, ...]
    order: int
    elements: frozenset

    def __repr__(self):
        return f"IsotropicSubgroup(order={self.order}, generators={list(self.generators)})"


def make_subgroup(f: FiniteQuadraticForm, gens: Sequence[Elem]) -> IsotropicSubgroup:
    gens = tuple(f.normalize(g) for g in gens)
    els = f.span(gens)
    return IsotropicSubgroup(generators=tuple(_minimal_generators(f, els)) if gens else (),
                             order=len(els), elements=els)


def is_isotropic(f: FiniteQuadraticForm, h: IsotropicSubgroup) -> bool:
    return (all(f.q(g) == 0 for g in h.generators)
            and all(f.b(g, g2) == 0 for g in h.generators for g2 in h.generators))


def perp(f: FiniteQuadraticForm, h: IsotropicSubgroup) -> List[Elem]:
    return [x for x in f.elements() if all(f.b(x, g) == 0 for g in h.generators)]


def enumerate_isotropic(f: FiniteQuadraticForm, dedup: bool = True,
                        order: Optional[int] = None, cap: int = DEFAULT_CAP,
                        budget=None) -> List[IsotropicSubgroup]:
    """All q-isotropic subgroups (the zero subgroup included), optionally one
    per orbit of the automorphism group of ``f`` and/or of a given order."""
    _check_cap(f, cap)
    budget = as_budget(budget)
    iso = [x for x, v in f.value_table.items() if v == 0 and any(x)]
    start = frozenset([f.zero])
    seen = {start}
    stack = [(start, ())]
    found = [(start, ())]
    while stack:
        h, gens = stack.pop()
        for x in iso:
            budget.tick()
            if x in h or any(f.b(x, g) != 0 for g in gens):
                continue
            new = f.span(gens + (x,))
            if new in seen:
                continue
            seen.add(new)
            item = (new, gens + (x,))
            found.append(item)
            stack.append(item)
    subs = [IsotropicSubgroup(tuple(_minimal_generators(f, h)), len(h), h) for h, _ in found]
    subs.sort(key=lambda s: (s.order, sorted(s.elements)))
    if order is not None:
        subs = [s for s in subs if s.order == order]
    if dedup:
        subs = _dedup_orbits(f, subs, budget)
    return subs


def _subgroup_invariant(f, h: IsotropicSubgroup):
    orders = Counter(f.elem_order(x) for x in h.elements)
    hp = perp(f, h)
    vals = Counter((f.elem_order(x), f.q(x)) for x in hp)
    return (h.order, tuple(sorted(orders.items())), tuple(sorted(vals.items())))


def _dedup_orbits(f, subs, budget):
    reps: List[IsotropicSubgroup] = []
    inv_of: Dict[int, tuple] = {}
    for s in subs:
        inv = _subgroup_invariant(f, s)
        merged = False
        for i, r in enumerate(reps):
            if inv_of[i] != inv:
                continue
            if same_orbit(f, r, s, budget=budget):
                merged = True
                break
        if not merged:
            inv_of[len(reps)] = inv
            reps.append(s)
    return reps


def same_orbit(f: FiniteQuadraticForm, h1: IsotropicSubgroup, h2: IsotropicSubgroup,
               budget=None) -> bool:
    """Is there an automorphism of ``f`` carrying ``h1`` onto ``h2``?"""
    if h1.order != h2.order:
        return False
    budget = as_budget(budget)
    # elements of h1 grouped by the deepest generator index they involve
    order_idx = sorted(range(f.rank), key=lambda i: -f.orders[i])
    pos = {g: t for t, g in enumerate(order_idx)}
    by_depth: Dict[int, List[Elem]] = {}
    for x in h1.elements:
        nz = [pos[i] for i, a in enumerate(x) if a]
        if nz:
            by_depth.setdefault(max(nz), []).append(x)
    target = h2.elements

    def image(x, images):
        y = f.zero
        for i, a in enumerate(x):
            if a:
                y = f.add(y, f.scale(a, images[i]))
        return y

    def partial(images):
        t = len(images) - 1
        return all(image(x, images) in target for x in by_depth.get(t, ()))

    return _iso_search(f, f, budget, partial_check=partial) is not None


def quotient_form(f: FiniteQuadraticForm, h: IsotropicSubgroup) -> FiniteQuadraticForm:
    """``(q restricted to H^perp) / H``."""
    if not is_isotropic(f, h):
        raise NotIsotropic("subgroup is not q-isotropic")
    if h.order == 1:
        return f
    hp = perp(f, h)
    gens = _minimal_generators(f, hp)
    basis = cyclic_decomposition(f, gens, h.generators)
    for g, _ in basis:
        for x in h.elements:
            assert f.q(f.add(g, x)) == f.q(g), "q is not constant on a coset"
    out = f.subform([g for g, _ in basis], [o for _, o in basis])
    assert out.order * h.order ** 2 == f.order
    return out


def signed_mod2(x) -> Fraction:
    """Representative of ``x mod 2`` in ``(-2, 0]``."""
    r = mod2(x)
    return r - 2 if r > 0 else r


def perp_table(f: FiniteQuadraticForm, h: Elem, elements: Iterable[Elem]):
    """Rows ``(a, a + h, q(a), q(a + h), q(a) - q(a + h))`` with values in
    ``(-2, 0]``; ``a`` is orthogonal to ``h`` iff the difference is 0 mod 2."""
    rows = []
    for a in elements:
        a = f.normalize(a)
        ah = f.add(a, h)
        qa, qah = signed_mod2(f.q_lift(a)), signed_mod2(f.q_lift(ah))
        rows.append((a, ah, qa, qah, qa - qah))
    return rows


def coset_table(f: FiniteQuadraticForm, h: IsotropicSubgroup):
    """One row ``(a, a + h, q(a))`` per coset of ``h`` in ``h^perp`` (order-2
    ``h``), smallest representative first, values in ``(-2, 0]``."""
    if not is_isotropic(f, h):
        raise NotIsotropic("subgroup is not q-isotropic")
    seen = set()
    rows = []
    for a in sorted(perp(f, h)):
        if a in seen:
            continue
        coset = sorted(f.add(a, x) for x in h.elements)
        seen.update(coset)
        rows.append((coset[0], tuple(coset[1:]) if len(coset) > 2 else coset[1],
                     signed_mod2(f.q_lift(a))))
    return rows


def overlattice_gram(lat: GramLattice, h: IsotropicSubgroup,
                     form: Optional[FiniteQuadraticForm] = None) -> GramLattice:
    """Gram matrix of the even overlattice ``L + <lifts of H>``.

    ``h`` is given in the coordinates of ``discriminant_form(lat)`` (or of
    ``form`` when passed, which must come from ``lat``).
    """
    f = form or discriminant_form(lat)
    if not is_isotropic(f, h):
        raise NotIsotropic("subgroup is not q-isotropic")
    g = [list(r) for r in lat.gram]
    n = len(g)
    vecs = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for x in h.generators:
        v = [sum((c * f.lifts[i][k] for i, c in enumerate(x)), Fraction(0)) for k in range(n)]
        vecs.append(v)
    basis = linalg.rational_lattice_basis(vecs)
    gm = [[linalg.dot(u, linalg.matvec(g, w)) for w in basis] for u in basis]
    if any(x.denominator != 1 for row in gm for x in row):
        raise NonIntegralGlue("glue vectors do not pair integrally")
    gm = [[int(x) for x in row] for row in gm]
    if any(gm[i][i] % 2 for i in range(n)):
        raise NonIntegralGlue("overlattice is not even")
    out = GramLattice.from_matrix(gm)
    assert out.det * h.order ** 2 == lat.det
    return out
