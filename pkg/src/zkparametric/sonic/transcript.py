"""Fiat-Shamir transcript over keccak-256."""

from __future__ import annotations

from typing import Iterable

from ..algebra import hash_to_scalar, keccak256
from ..trace import VerifyTrace, ensure

DOMAIN = b"zkparametric/sonic/v1"


class Transcript:
    """Running keccak state; challenges are pure functions of what was absorbed.

    ``challenge`` does not advance the state, so two challenges drawn from the
    same state under different labels are independent, and drawing a
    challenge twice gives the same value.
    """

    def __init__(self, p: int, domain: bytes = DOMAIN, trace: VerifyTrace | None = None) -> None:
        self.p = p
        self.state = keccak256(domain)
        self.log: list[tuple[str, bytes]] = []
        self._trace = ensure(trace)

    def absorb(self, label: str, data: bytes) -> None:
        lb = label.encode()
        msg = self.state + len(lb).to_bytes(2, "big") + lb + len(data).to_bytes(4, "big") + data
        self._trace.hash(len(msg))
        self.state = keccak256(msg)
        self.log.append((label, bytes(data)))

    def absorb_many(self, label: str, items: Iterable[bytes]) -> None:
        for k, item in enumerate(items):
            self.absorb(f"{label}[{k}]", item)

    def challenge(self, label: str) -> int:
        self._trace.hash(len(self.state) + len(label) + 4)
        return hash_to_scalar(label, self.state, self.p)

    def challenge_avoiding(self, label: str, forbidden: Iterable[int]) -> int:
        """Challenge re-derived with a counter until it leaves ``forbidden``."""
        banned = {f % self.p for f in forbidden}
        v = self.challenge(label)
        counter = 0
        while v in banned or v == 0:
            counter += 1
            self._trace.hash(len(self.state) + len(label) + 8)
            v = hash_to_scalar(label, self.state + counter.to_bytes(4, "big"), self.p)
        return v

    @classmethod
    def replay(cls, p: int, log: Iterable[tuple[str, bytes]], domain: bytes = DOMAIN) -> Transcript:
        t = cls(p, domain)
        for label, data in log:
            t.absorb(label, data)
        return t
