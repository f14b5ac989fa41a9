"""Data-provider signatures and location tags.

Providers sign ``H || D`` where ``H`` is a keccak digest of the insured
location and acquisition dates and ``D`` is the serialized commitment to
their data.  The scheme is deterministic ECDSA on secp256k1 over a keccak-256
digest, with signatures normalized to low-s so that each message has exactly
one valid 64-byte encoding.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Sequence

import ecdsa
from ecdsa.util import sigdecode_string, sigencode_string

from .algebra import DeterministicRng, keccak256

_CURVE = ecdsa.SECP256k1
_N = _CURVE.order
SIGNATURE_LEN = 64
PUBLIC_KEY_LEN = 64


class SignatureError(ValueError):
    pass


@dataclass(frozen=True)
class KeyPair:
    sk: int = field(repr=False)
    pk: bytes

    def export_secret(self) -> str:
        return self.sk.to_bytes(32, "big").hex()

    @classmethod
    def from_secret(cls, hex_sk: str) -> KeyPair:
        sk = int(hex_sk.removeprefix("0x"), 16)
        if not 1 <= sk < _N:
            raise SignatureError("secret key out of range")
        return cls(sk, _public_key(sk))


@dataclass(frozen=True)
class LocationTag:
    H: bytes

    def __post_init__(self) -> None:
        if len(self.H) != 32:
            raise SignatureError("location tag must be 32 bytes")

    def hex(self) -> str:
        return "0x" + self.H.hex()

    @classmethod
    def from_hex(cls, text: str) -> LocationTag:
        return cls(bytes.fromhex(text.removeprefix("0x")))


def _public_key(sk: int) -> bytes:
    key = ecdsa.SigningKey.from_secret_exponent(sk, curve=_CURVE)
    return key.get_verifying_key().to_string()


def keygen(rng: DeterministicRng) -> KeyPair:
    sk = 1 + rng.randbelow(_N - 1)
    return KeyPair(sk, _public_key(sk))


def sign(key: KeyPair, message: bytes) -> bytes:
    digest = keccak256(message)
    sk = ecdsa.SigningKey.from_secret_exponent(key.sk, curve=_CURVE)
    # RFC 6979 nonces; sha256 drives the nonce generator only
    sig = sk.sign_digest_deterministic(digest, hashfunc=hashlib.sha256, sigencode=sigencode_string)
    r, s = sigdecode_string(sig, _N)
    if s > _N // 2:
        s = _N - s
    return sigencode_string(r, s, _N)


def verify(pk: bytes, message: bytes, signature: bytes) -> bool:
    if len(signature) != SIGNATURE_LEN or len(pk) != PUBLIC_KEY_LEN:
        return False
    r, s = sigdecode_string(signature, _N)
    if not (1 <= r < _N and 1 <= s <= _N // 2):
        return False
    try:
        vk = ecdsa.VerifyingKey.from_string(pk, curve=_CURVE)
        return vk.verify_digest(signature, keccak256(message), sigdecode=sigdecode_string)
    except (ecdsa.BadSignatureError, ecdsa.MalformedPointError, ValueError, AssertionError):
        return False


def sign_data_bundle(key: KeyPair, H: LocationTag, D_bytes: bytes) -> bytes:
    return sign(key, H.H + D_bytes)


def verify_data_bundle(pk: bytes, H: LocationTag, D_bytes: bytes, signature: bytes) -> bool:
    return verify(pk, H.H + D_bytes, signature)


# ---------------------------------------------------------------------------
# location encoding


def _canon_decimal(value) -> str:
    try:
        d = Decimal(str(value).strip())
    except InvalidOperation:
        raise SignatureError(f"not a decimal number: {value!r}") from None
    if not d.is_finite():
        raise SignatureError(f"not a finite number: {value!r}")
    if d == 0:
        return "0"
    return format(d.normalize(), "f")


def canonical_location(lat, lon, acquisitions: Sequence[tuple[str, str]] = ()) -> str:
    """``lat:<d>,lon:<d>`` followed by ``,epoch:<e>,date:<iso>`` per acquisition."""
    la, lo = Decimal(_canon_decimal(lat)), Decimal(_canon_decimal(lon))
    if not (-90 <= la <= 90 and -180 <= lo <= 180):
        raise SignatureError("latitude/longitude out of range")
    text = f"lat:{_canon_decimal(lat)},lon:{_canon_decimal(lon)}"
    for epoch, date in acquisitions:
        if epoch not in ("pre", "post"):
            raise SignatureError(f"epoch must be 'pre' or 'post', got {epoch!r}")
        text += f",epoch:{epoch},date:{date}"
    return text


def location_tag(lat, lon, acquisitions: Sequence[tuple[str, str]] = ()) -> LocationTag:
    return LocationTag(keccak256(canonical_location(lat, lon, acquisitions).encode("utf-8")))


def parse_location(text: str) -> LocationTag:
    """Accepts ``lat,lon[,pre=DATE][,post=DATE]`` as typed on a command line."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if len(parts) < 2:
        raise SignatureError("location needs at least 'lat,lon'")
    acq = []
    for item in parts[2:]:
        if "=" not in item:
            raise SignatureError(f"bad acquisition {item!r}; expected pre=DATE or post=DATE")
        epoch, date = item.split("=", 1)
        acq.append((epoch.strip(), date.strip()))
    return location_tag(parts[0], parts[1], acq)
