"""Run reports emitted by the command line tools."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any

from .scalars import Scalar, discrepancy, format_scalar


@dataclass
class MethodResult:
    name: str
    value: Scalar
    terms: int | None = None
    elapsed_ms: float | None = None


@dataclass
class RunReport:
    """Values from one or more methods plus their pairwise discrepancies.

    Discrepancies are ``|a - b| / max(|a|, |b|, 1)`` and are computed from the
    same values that get serialised, so a reader can recompute them.
    """

    command: str
    methods: list[MethodResult] = field(default_factory=list)
    kernel_dim: int | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def add(self, result: MethodResult) -> None:
        self.methods.append(result)

    def discrepancies(self) -> list[dict[str, Any]]:
        out = []
        for a, b in itertools.combinations(self.methods, 2):
            diff = abs(complex(a.value) - complex(b.value))
            out.append(
                {
                    "a": a.name,
                    "b": b.name,
                    "abs": 0.0 if a.value == b.value else diff,
                    "rel": discrepancy(a.value, b.value),
                }
            )
        return out

    def max_discrepancy(self) -> float:
        return max((d["rel"] for d in self.discrepancies()), default=0.0)

    def to_json(self, timing: bool = True) -> dict[str, Any]:
        return {
            "command": self.command,
            "kernel_dim": self.kernel_dim,
            "methods": [
                {
                    "name": m.name,
                    "value": format_scalar(m.value),
                    "terms": m.terms,
                    "elapsed_ms": m.elapsed_ms if timing else None,
                }
                for m in self.methods
            ],
            "discrepancies": self.discrepancies(),
            **self.extra,
        }
