"""Operation counters emitted by instrumented verifiers.

Verifiers take an optional :class:`VerifyTrace`; every group operation,
pairing check, hash and field operation they perform is recorded under the
currently open category.  The gas model in :mod:`zkparametric.insurance`
prices these counts.
"""

from __future__ import annotations

from collections import Counter
from contextlib import contextmanager
from typing import Iterator

OPS = (
    "pairing_equation",
    "pairing",
    "g1_add",
    "g1_mul",
    "mulmod",
    "addmod",
    "modexp",
    "keccak",
    "keccak_words",
    "calldata_zero_bytes",
    "calldata_nonzero_bytes",
    "sload_words",
    "ecrecover",
    "compare",
)


class VerifyTrace:
    def __init__(self) -> None:
        self.by_category: dict[str, Counter] = {}
        self._stack: list[str] = ["Others"]

    @property
    def category(self) -> str:
        return self._stack[-1]

    @contextmanager
    def section(self, name: str) -> Iterator[VerifyTrace]:
        self._stack.append(name)
        try:
            yield self
        finally:
            self._stack.pop()

    def add(self, op: str, n: int = 1) -> None:
        if op not in OPS:
            raise KeyError(f"unknown traced op {op!r}")
        if n < 0:
            raise ValueError("trace counters only grow")
        if n:
            self.by_category.setdefault(self.category, Counter())[op] += n

    def pairing_equation(self, pairs: int) -> None:
        self.add("pairing_equation")
        self.add("pairing", pairs)

    def msm(self, terms: int) -> None:
        self.add("g1_mul", terms)
        self.add("g1_add", max(terms - 1, 0))

    def hash(self, nbytes: int) -> None:
        self.add("keccak")
        self.add("keccak_words", (nbytes + 31) // 32)

    def calldata(self, data: bytes) -> None:
        zeros = data.count(0)
        self.add("calldata_zero_bytes", zeros)
        self.add("calldata_nonzero_bytes", len(data) - zeros)

    def totals(self) -> Counter:
        out: Counter = Counter()
        for c in self.by_category.values():
            out.update(c)
        return out

    @property
    def pairing_equations(self) -> int:
        return self.totals()["pairing_equation"]

    @property
    def pairings(self) -> int:
        return self.totals()["pairing"]

    def to_dict(self) -> dict:
        return {cat: dict(sorted(c.items())) for cat, c in self.by_category.items()}


class _NullTrace(VerifyTrace):
    """Accepts and discards everything, so verifiers need no branches."""

    def add(self, op: str, n: int = 1) -> None:
        return None

    @contextmanager
    def section(self, name: str) -> Iterator[VerifyTrace]:
        yield self


NULL_TRACE = _NullTrace()


def ensure(trace: VerifyTrace | None) -> VerifyTrace:
    return NULL_TRACE if trace is None else trace
