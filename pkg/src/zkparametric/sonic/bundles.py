"""Signed data bundles from independent data providers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..algebra import from_hex, to_hex
from ..pcs import SRS, Commitment, VerifierKey, rkzg_commit
from ..poly import LaurentPoly
from ..sigs import KeyPair, LocationTag, sign_data_bundle, verify_data_bundle

BUNDLE_VERSION = 1


class BundleError(ValueError):
    pass


def data_poly(values: Sequence[int], p: int) -> LaurentPoly:
    """d(X) = sum_{t=1..m} values[t-1] X^t; the constant term stays zero."""
    return LaurentPoly({t: v for t, v in enumerate(values, 1)}, p)


@dataclass(frozen=True)
class DataSourceBundle:
    source_id: str
    values: tuple[int, ...]
    srs: SRS
    commitment: Commitment
    H: LocationTag
    signature: bytes
    pk: bytes

    @property
    def m(self) -> int:
        return len(self.values)

    def poly(self) -> LaurentPoly:
        return data_poly(self.values, self.srs.curve.p)

    def public(self) -> SourcePublic:
        return SourcePublic(self.source_id, self.pk, self.srs.verifier_key(), self.m)

    def check(self) -> None:
        """Raise unless the commitment matches the values and the signature holds."""
        if rkzg_commit(self.srs, self.poly()).point != self.commitment.point:
            raise BundleError(f"source {self.source_id}: values do not match the signed commitment")
        if not verify_data_bundle(self.pk, self.H, self.commitment.to_bytes(), self.signature):
            raise BundleError(f"source {self.source_id}: signature does not verify")

    def to_json(self) -> dict:
        return {
            "version": BUNDLE_VERSION,
            "source_id": self.source_id,
            "H": self.H.hex(),
            "commitment": self.commitment.point.hex(),
            "signature": to_hex(self.signature),
            "pk": to_hex(self.pk),
            "srs_digest": to_hex(self.srs.digest()),
            "values": list(self.values),
        }

    @classmethod
    def from_json(cls, data: dict, srs: SRS) -> DataSourceBundle:
        if data.get("version") != BUNDLE_VERSION:
            raise BundleError("unsupported bundle version")
        if from_hex(data["srs_digest"]) != srs.digest():
            raise BundleError(f"source {data['source_id']}: bundle was made under a different SRS")
        curve = srs.curve
        return cls(
            source_id=str(data["source_id"]),
            values=tuple(int(v) % curve.p for v in data["values"]),
            srs=srs,
            commitment=Commitment(curve.g1_from_bytes(from_hex(data["commitment"])), "rkzg"),
            H=LocationTag.from_hex(data["H"]),
            signature=from_hex(data["signature"]),
            pk=from_hex(data["pk"]),
        )


@dataclass(frozen=True)
class SourcePublic:
    """What a verifier knows about a provider: key, SRS and data length."""

    source_id: str
    pk: bytes
    vk: VerifierKey
    m: int

    def to_json(self) -> dict:
        return {"source_id": self.source_id, "pk": to_hex(self.pk), "m": self.m, "srs": self.vk.to_subset()}

    @classmethod
    def from_json(cls, data: dict) -> SourcePublic:
        return cls(str(data["source_id"]), from_hex(data["pk"]), VerifierKey.from_subset(data["srs"]), int(data["m"]))


def make_bundle(key: KeyPair, srs: SRS, H: LocationTag, values: Sequence[int], source_id: str = "1") -> DataSourceBundle:
    p = srs.curve.p
    vals = tuple(int(v) % p for v in values)
    if not vals:
        raise BundleError("a data source must provide at least one value")
    if len(vals) > srs.d:
        raise BundleError(f"{len(vals)} values exceed the provider SRS bound {srs.d}")
    D = rkzg_commit(srs, data_poly(vals, p))
    sig = sign_data_bundle(key, H, D.to_bytes())
    return DataSourceBundle(source_id, vals, srs, D, H, sig, key.pk)
