"""Proof container, canonical bytes and JSON form."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Iterator

from ..algebra import CurveParams, G1Point, from_hex, get_curve, to_hex
from ..pcs import BatchProof

PROOF_VERSION = 1
VARIANTS = ("basic", "dat", "ev")

# names in transcript order
BASE_POINTS = ("S_Y", "K")
PROVER_POINTS = ("R", "T", "S_X")
BASE_SCALARS = ("r1", "r2", "t", "k", "s", "s1", "s2")
BASE_PROOFS = ("pi_r1", "pi_r2", "pi_t", "pi_k", "pi_s", "pi_s1", "pi_s2")
# batched family: polynomial name -> opening scalars in point-set order
BATCH_FAMILY = (
    ("R_tilde", ("r_tilde",)),
    ("R", ("r1", "r2")),
    ("T", ("t",)),
    ("K", ("k",)),
    ("S_X", ("s", "s1")),
    ("S_Y", ("s2",)),
)


@dataclass
class SonicProof:
    variant: str
    curve: CurveParams
    points: dict[str, G1Point]
    scalars: dict[str, int]
    data_commitments: list[G1Point] = field(default_factory=list)
    data_openings: list[int] = field(default_factory=list)
    opening_proofs: dict[str, G1Point] = field(default_factory=dict)
    data_proofs: list[G1Point] = field(default_factory=list)
    gammas: dict[str, list[int]] = field(default_factory=dict)
    batch: BatchProof | None = None
    signatures: list[bytes] = field(default_factory=list)
    source_pks: list[bytes] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown proof variant {self.variant!r}")

    @property
    def J(self) -> int:
        return len(self.data_commitments)

    # --- element access (used by serializers and mutation tests) --------

    def elements(self) -> Iterator[tuple[tuple, object]]:
        """Every proof element with its path, in canonical order."""
        for name in BASE_POINTS:
            yield ("points", name), self.points[name]
        for j, D in enumerate(self.data_commitments):
            yield ("data_commitments", j), D
        if "R_tilde" in self.points:
            yield ("points", "R_tilde"), self.points["R_tilde"]
        for name in PROVER_POINTS:
            yield ("points", name), self.points[name]
        for name, v in self.scalars.items():
            yield ("scalars", name), v
        for j, v in enumerate(self.data_openings):
            yield ("data_openings", j), v
        for name, coeffs in self.gammas.items():
            for k, v in enumerate(coeffs):
                yield ("gammas", name, k), v
        if self.batch is not None:
            yield ("batch", "pi1"), self.batch.pi1
            yield ("batch", "pi2"), self.batch.pi2
        for name, pt in self.opening_proofs.items():
            yield ("opening_proofs", name), pt
        for j, pt in enumerate(self.data_proofs):
            yield ("data_proofs", j), pt
        for j, sig in enumerate(self.signatures):
            yield ("signatures", j), sig

    def with_element(self, path: tuple, value) -> SonicProof:
        out = copy.copy(self)
        kind = path[0]
        if kind == "batch":
            pi1, pi2 = self.batch.pi1, self.batch.pi2
            out.batch = BatchProof(value, pi2) if path[1] == "pi1" else BatchProof(pi1, value)
            return out
        container = copy.deepcopy(getattr(self, kind)) if kind == "gammas" else copy.copy(getattr(self, kind))
        if kind == "gammas":
            container[path[1]][path[2]] = value
        else:
            container[path[1]] = value
        setattr(out, kind, container)
        return out

    # --- sizes ----------------------------------------------------------

    def to_bytes(self) -> bytes:
        p = self.curve.p
        parts = []
        for _, v in self.elements():
            if isinstance(v, G1Point):
                parts.append(v.to_bytes())
            elif isinstance(v, int):
                parts.append((v % p).to_bytes(32, "big"))
            else:
                parts.append(bytes(v))
        return b"".join(parts)

    def uint256_count(self) -> int:
        """Size in EVM words: 2 per G1 point, 1 per scalar, 2 per signature."""
        words = 0
        for path, v in self.elements():
            if isinstance(v, G1Point):
                words += 2
            elif isinstance(v, int):
                words += 1
            else:
                words += (len(v) + 31) // 32
        return words

    # --- JSON -----------------------------------------------------------

    def to_json(self) -> dict:
        p = self.curve.p

        def sc(v: int) -> str:
            return to_hex((v % p).to_bytes(32, "big"))

        out = {
            "version": PROOF_VERSION,
            "variant": self.variant,
            "curve": self.curve.name,
            "commitments": {name: self.points[name].hex() for name in self._point_order()},
            "data_commitments": [D.hex() for D in self.data_commitments],
            "openings": {name: sc(v) for name, v in self.scalars.items()},
            "data_openings": [sc(v) for v in self.data_openings],
            "gammas": {name: [sc(v) for v in coeffs] for name, coeffs in self.gammas.items()},
            "opening_proofs": {name: pt.hex() for name, pt in self.opening_proofs.items()},
            "data_proofs": [pt.hex() for pt in self.data_proofs],
            "signatures": [to_hex(s) for s in self.signatures],
            "source_pks": [to_hex(pk) for pk in self.source_pks],
        }
        if self.batch is not None:
            out["batch"] = {"pi1": self.batch.pi1.hex(), "pi2": self.batch.pi2.hex()}
        return out

    def _point_order(self) -> list[str]:
        names = list(BASE_POINTS)
        if "R_tilde" in self.points:
            names.append("R_tilde")
        return names + list(PROVER_POINTS)

    @classmethod
    def from_json(cls, data: dict) -> SonicProof:
        if data.get("version") != PROOF_VERSION:
            raise ValueError("unsupported proof version")
        curve = get_curve(data["curve"])

        def pt(h: str) -> G1Point:
            return curve.g1_from_bytes(from_hex(h))

        def sc(h: str) -> int:
            return curve.field.from_bytes(from_hex(h))

        batch = None
        if "batch" in data:
            batch = BatchProof(pt(data["batch"]["pi1"]), pt(data["batch"]["pi2"]))
        return cls(
            variant=data["variant"],
            curve=curve,
            points={k: pt(v) for k, v in data["commitments"].items()},
            scalars={k: sc(v) for k, v in data["openings"].items()},
            data_commitments=[pt(v) for v in data["data_commitments"]],
            data_openings=[sc(v) for v in data["data_openings"]],
            opening_proofs={k: pt(v) for k, v in data["opening_proofs"].items()},
            data_proofs=[pt(v) for v in data["data_proofs"]],
            gammas={k: [sc(x) for x in v] for k, v in data["gammas"].items()},
            batch=batch,
            signatures=[from_hex(s) for s in data["signatures"]],
            source_pks=[from_hex(s) for s in data["source_pks"]],
        )
