"""Mirror pairs of K3 Picard lattices.

``L`` and ``M`` are mirror when ``rank L + rank M = 20`` and the
discriminant form of ``M`` is isomorphic to the negative of that of ``L``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Union

from .discform import (DEFAULT_CAP, FiniteQuadraticForm, _signature, discriminant_form,
                       find_isomorphism, negate)
from .lattice import GramLattice

K3_TOTAL = 20


@dataclass(frozen=True)
class MirrorVerdict:
    rank_check: bool
    form_check: bool
    witness: Optional[list] = None

    @property
    def is_pair(self) -> bool:
        return self.rank_check and self.form_check

    def to_dict(self) -> dict:
        return {"is_pair": self.is_pair, "rank_check": self.rank_check,
                "form_check": self.form_check,
                "witness": None if self.witness is None else [list(x) for x in self.witness]}


def _form(x) -> FiniteQuadraticForm:
    return x if isinstance(x, FiniteQuadraticForm) else discriminant_form(x)


def mirror_check(l: GramLattice, m: Union[GramLattice, FiniteQuadraticForm],
                 rank_m: Optional[int] = None, cap: int = DEFAULT_CAP) -> MirrorVerdict:
    """``m`` may be a bare form, in which case only the form is compared
    unless ``rank_m`` is given."""
    if isinstance(m, GramLattice):
        rank_m = m.rank
    rank_ok = True if rank_m is None else l.rank + rank_m == K3_TOTAL
    target = negate(_form(l))
    witness = find_isomorphism(_form(m), target, cap=cap)
    return MirrorVerdict(rank_check=rank_ok, form_check=witness is not None, witness=witness)


def mirror_scan(fixtures: Sequence, cap: int = DEFAULT_CAP) -> Dict[int, List[int]]:
    """Family id -> ids of all families whose Pic is a mirror partner."""
    lats = {r.id: r.pic_lattice() for r in fixtures}
    forms = {i: discriminant_form(l) for i, l in lats.items()}
    negs = {i: negate(f) for i, f in forms.items()}
    sigs = {i: _signature(f) for i, f in forms.items()}
    nsigs = {i: _signature(f) for i, f in negs.items()}
    out: Dict[int, List[int]] = {}
    for i in sorted(lats):
        partners = []
        for j in sorted(lats):
            if lats[i].rank + lats[j].rank != K3_TOTAL:
                continue
            if forms[j].order != forms[i].order or sigs[j] != nsigs[i]:
                continue
            if find_isomorphism(forms[j], negs[i], cap=cap) is not None:
                partners.append(j)
        out[i] = partners
    return out


def scan_differences(fixtures: Sequence, scan: Dict[int, List[int]]) -> Dict[int, tuple]:
    """Rows where the scan and the table's partner column disagree:
    ``id -> (table, scan)``."""
    out = {}
    for r in fixtures:
        got = sorted(scan.get(r.id, []))
        want = sorted(r.mirror_ids)
        if got != want:
            out[r.id] = (want, got)
    return out


def pairing_table(scan: Dict[int, List[int]]) -> str:
    lines = [f"{'family':>6}  partners"]
    for i in sorted(scan):
        p = ", ".join(map(str, scan[i])) or "not on list"
        lines.append(f"{i:>6}  {p}")
    return "\n".join(lines) + "\n"
