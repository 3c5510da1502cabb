"""Generalized charts: nets of diffeomorphisms with nets of inverses."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .gfunc import CompactBox, Domain, GFunc, c_bounded_witness, compose, equals_in_G, identity
from .net import DEFAULT_GRID, DEFAULT_POLICY, EpsilonGrid, Policy


@dataclass
class GChart:
    """``forward: source -> target`` with ``inverse: target -> source``.

    ``inverse`` may be None when the chart is only used for pullbacks of vector
    fields (which need the forward map and its Jacobian only).
    """

    forward: GFunc
    inverse: GFunc | None
    source: Domain
    target: Domain
    tag: str = "user-closed-form"
    source_boxes: list[CompactBox] = field(default_factory=list)
    target_boxes: list[CompactBox] = field(default_factory=list)
    note: str = ""
    verification: dict | None = None

    def verify(self, grid: EpsilonGrid = DEFAULT_GRID, policy: Policy = DEFAULT_POLICY) -> dict:
        """Round trips and c-boundedness on the declared boxes."""
        out: dict = {"tag": self.tag}
        if self.inverse is None:
            out["round_trip"] = None
            out["passed"] = False
            out["note"] = self.note or "no inverse net supplied"
            return out
        witnesses_ok = True
        for K in self.source_boxes:
            witnesses_ok &= c_bounded_witness(self.forward, K, grid, policy) is not None
        for K in self.target_boxes:
            witnesses_ok &= c_bounded_witness(self.inverse, K, grid, policy) is not None
        out["c_bounded"] = bool(witnesses_ok)
        if not witnesses_ok:
            out["passed"] = False
            return out
        ok1, v1 = (True, [])
        ok2, v2 = (True, [])
        if self.target_boxes:
            ok1, v1 = equals_in_G(compose(self.forward, self.inverse, self.target_boxes, grid, policy),
                                  identity(self.target), self.target_boxes, grid, policy)
        if self.source_boxes:
            ok2, v2 = equals_in_G(compose(self.inverse, self.forward, self.source_boxes, grid, policy),
                                  identity(self.source), self.source_boxes, grid, policy)
        out["forward_after_inverse"] = [v.as_dict() for v in v1]
        out["inverse_after_forward"] = [v.as_dict() for v in v2]
        out["round_trip"] = bool(ok1 and ok2)
        out["passed"] = bool(ok1 and ok2)
        return out
