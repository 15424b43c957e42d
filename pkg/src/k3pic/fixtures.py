"""The 95-family table shipped as package data."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import List, Optional, Sequence, Tuple, Union

from .discform import FiniteQuadraticForm, parse_form
from .errors import FixtureError, InvalidWeights, K3PicError
from .lattice import GramLattice, to_gram
from .polytope import WeightVector

METHODS = ("fibration", "intermediate", "jacobian", "matrix")
_FORM_START = ("w(", "u(", "v(")


def is_form_descriptor(text: str) -> bool:
    return text.strip().startswith(_FORM_START)


@dataclass(frozen=True)
class FamilyRecord:
    id: int
    weights: WeightVector
    expected_rank: int
    pic_expr: str
    mirror_ids: Tuple[int, ...]
    mirror_expr: Optional[str]
    method_tag: str
    pic_alt: Optional[str] = None
    note: Optional[str] = None

    def pic_lattice(self) -> GramLattice:
        return to_gram(self.pic_expr)

    def mirror_object(self) -> Union[GramLattice, FiniteQuadraticForm, None]:
        """Lattice or bare form given in the mirror column."""
        if self.mirror_expr is None:
            return None
        if is_form_descriptor(self.mirror_expr):
            return parse_form(self.mirror_expr)
        return to_gram(self.mirror_expr)

    def to_dict(self) -> dict:
        d = {"id": self.id, "weights": list(self.weights.q), "rank": self.expected_rank,
             "pic": self.pic_expr, "mirror_ids": list(self.mirror_ids),
             "method": self.method_tag}
        if self.mirror_expr is not None:
            d["mirror"] = self.mirror_expr
        if self.pic_alt is not None:
            d["pic_alt"] = self.pic_alt
        if self.note is not None:
            d["note"] = self.note
        return d


def record_from_dict(d: dict, row: Optional[int] = None) -> FamilyRecord:
    try:
        rid = d["id"]
        if not isinstance(rid, int) or isinstance(rid, bool):
            raise FixtureError("id must be an integer", row)
        method = d["method"]
        if method not in METHODS:
            raise FixtureError(f"unknown method {method!r}", row)
        rank = d["rank"]
        if not isinstance(rank, int) or not 1 <= rank <= 19:
            raise FixtureError(f"rank {rank!r} out of range", row)
        mids = d.get("mirror_ids", [])
        if not all(isinstance(x, int) for x in mids):
            raise FixtureError("mirror_ids must be integers", row)
        return FamilyRecord(id=rid, weights=WeightVector(tuple(d["weights"])),
                            expected_rank=rank, pic_expr=str(d["pic"]),
                            mirror_ids=tuple(mids), mirror_expr=d.get("mirror"),
                            method_tag=method, pic_alt=d.get("pic_alt"),
                            note=d.get("note"))
    except KeyError as e:
        raise FixtureError(f"missing key {e.args[0]!r}", row) from None
    except (InvalidWeights, TypeError) as e:
        raise FixtureError(f"bad weights: {e}", row) from None


def parse_fixtures(text: str, complete: bool = True) -> List[FamilyRecord]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise FixtureError(f"invalid JSON: {e}") from None
    if not isinstance(data, list):
        raise FixtureError("fixture file must hold a JSON array")
    recs = []
    for n, d in enumerate(data, 1):
        if not isinstance(d, dict):
            raise FixtureError("record is not an object", n)
        recs.append(record_from_dict(d, n))
    ids = [r.id for r in recs]
    if len(set(ids)) != len(ids):
        raise FixtureError("duplicate family ids")
    if complete and sorted(ids) != list(range(1, 96)):
        raise FixtureError("family ids must be exactly 1..95")
    return sorted(recs, key=lambda r: r.id)


def dump_fixtures(recs: Sequence[FamilyRecord]) -> str:
    """Canonical text: one record per line, sorted keys, compact separators."""
    lines = [json.dumps(r.to_dict(), sort_keys=True, separators=(",", ":")) for r in recs]
    return "[\n" + ",\n".join(lines) + "\n]\n"


def default_fixture_text() -> str:
    return resources.files("k3pic").joinpath("data/families.json").read_text()


def load_fixtures(path=None) -> List[FamilyRecord]:
    if path is None:
        return parse_fixtures(default_fixture_text())
    with open(path) as fh:
        return parse_fixtures(fh.read())


def validate_record(r: FamilyRecord) -> None:
    """Pic expression must be even of rank ``expected_rank``, signature
    ``(1, rank - 1)``."""
    try:
        lat = r.pic_lattice()
    except K3PicError as e:
        raise FixtureError(f"Pic expression does not elaborate: {e}", r.id) from None
    if lat.rank != r.expected_rank:
        raise FixtureError(f"Pic rank {lat.rank} != {r.expected_rank}", r.id)
    if lat.signature != (1, lat.rank - 1) or not lat.is_even:
        raise FixtureError(f"Pic is not even hyperbolic (signature {lat.signature})", r.id)
