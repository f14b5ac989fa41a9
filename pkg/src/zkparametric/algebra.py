"""Pairing groups, the scalar field, hashing and seeded randomness.

Two curve backends sit behind one interface:

* ``bls12_381`` wraps the Rust arkworks bindings and is the default, since
  pure-Python pairings are roughly a hundred times slower.
* ``bn254`` (the alt_bn128 parameters of Ethereum's pairing precompile) wraps
  ``py_ecc`` and serializes exactly like the precompile's calldata.

Scalars are plain Python ints kept in ``[0, p)``; :class:`ScalarField` holds
the modulus and the checked operations.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from Crypto.Hash import keccak


class AlgebraError(ValueError):
    pass


class InvalidPointError(AlgebraError):
    pass


class ZeroInversionError(ZeroDivisionError):
    pass


def keccak256(data: bytes) -> bytes:
    return keccak.new(digest_bits=256, data=data).digest()


def to_hex(data: bytes) -> str:
    return "0x" + data.hex()


def from_hex(text: str) -> bytes:
    if text.startswith(("0x", "0X")):
        text = text[2:]
    return bytes.fromhex(text)


# ---------------------------------------------------------------------------
# scalar field


@dataclass(frozen=True)
class ScalarField:
    p: int

    def canon(self, a: int) -> int:
        return a % self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return a * b % self.p

    def neg(self, a: int) -> int:
        return -a % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroInversionError("zero has no inverse")
        return pow(a, -1, self.p)

    def div(self, a: int, b: int) -> int:
        return a * self.inv(b) % self.p

    def batch_inv(self, values: Sequence[int]) -> list[int]:
        """Montgomery's trick: one inversion for the whole list."""
        p = self.p
        prefix = []
        acc = 1
        for v in values:
            if v % p == 0:
                raise ZeroInversionError("zero has no inverse")
            prefix.append(acc)
            acc = acc * v % p
        inv_acc = pow(acc, -1, p)
        out = [0] * len(values)
        for i in range(len(values) - 1, -1, -1):
            out[i] = prefix[i] * inv_acc % p
            inv_acc = inv_acc * values[i] % p
        return out

    def to_bytes(self, a: int) -> bytes:
        return (a % self.p).to_bytes(32, "big")

    def from_bytes(self, data: bytes) -> int:
        if len(data) != 32:
            raise AlgebraError(f"scalar encoding must be 32 bytes, got {len(data)}")
        v = int.from_bytes(data, "big")
        if v >= self.p:
            raise AlgebraError("scalar encoding is not canonical")
        return v


def scalar_arith(field: ScalarField, op: str, a: int, b: int | None = None) -> int:
    if op in ("inv", "neg"):
        return getattr(field, op)(a)
    if b is None:
        raise TypeError(f"{op} needs two operands")
    if op not in ("add", "sub", "mul"):
        raise ValueError(f"unknown scalar op {op!r}")
    return getattr(field, op)(a, b)


# ---------------------------------------------------------------------------
# backends: thin adapters over the raw libraries


class _ArkworksBackend:
    name = "bls12_381"
    curve_id = 2
    order = 0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001
    g1_len = 48
    g2_len = 96

    def __init__(self) -> None:
        import py_arkworks_bls12381 as ark

        self._ark = ark
        self._Scalar = ark.Scalar

    def gen(self, group: int):
        return self._ark.G1Point() if group == 1 else self._ark.G2Point()

    def zero(self, group: int):
        return self._ark.G1Point.identity() if group == 1 else self._ark.G2Point.identity()

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, k: int):
        return a * self._Scalar(k % self.order)

    def eq(self, a, b) -> bool:
        return a == b

    def msm(self, group: int, points: list, scalars: list[int]):
        if not points:
            return self.zero(group)
        S = self._Scalar
        p = self.order
        cls = self._ark.G1Point if group == 1 else self._ark.G2Point
        return cls.multiexp_unchecked(points, [S(k % p) for k in scalars])

    def encode(self, group: int, a) -> bytes:
        return bytes(a.to_compressed_bytes())

    def decode(self, group: int, data: bytes):
        cls = self._ark.G1Point if group == 1 else self._ark.G2Point
        want = self.g1_len if group == 1 else self.g2_len
        if len(data) != want:
            raise InvalidPointError(f"expected {want} bytes, got {len(data)}")
        try:
            return cls.from_compressed_bytes(list(data))
        except Exception as exc:  # the binding raises bare ValueError/TypeError
            raise InvalidPointError(str(exc)) from None

    def pairing(self, a, b):
        return self._ark.GT.pairing(a, b)

    def pairing_product(self, g1s: list, g2s: list):
        return self._ark.GT.multi_pairing(g1s, g2s)

    def gt_one(self):
        return self._ark.GT.one()

    def gt_mul(self, a, b):
        return a * b

    def gt_eq(self, a, b) -> bool:
        return a == b


class _PyEccBackend:
    name = "bn254"
    curve_id = 1
    g1_len = 64
    g2_len = 128

    def __init__(self) -> None:
        from py_ecc import optimized_bn128 as bn

        self._bn = bn
        self.order = bn.curve_order
        self._q = bn.field_modulus

    def gen(self, group: int):
        return self._bn.G1 if group == 1 else self._bn.G2

    def zero(self, group: int):
        return self._bn.Z1 if group == 1 else self._bn.Z2

    def add(self, a, b):
        return self._bn.add(a, b)

    def neg(self, a):
        return self._bn.neg(a)

    def mul(self, a, k: int):
        k %= self.order
        if k == 0:
            return self.zero(1 if self._is_g1(a) else 2)
        return self._bn.multiply(a, k)

    def eq(self, a, b) -> bool:
        return self._bn.eq(a, b)

    def msm(self, group: int, points: list, scalars: list[int]):
        acc = self.zero(group)
        for pt, k in zip(points, scalars):
            if k % self.order:
                acc = self._bn.add(acc, self.mul(pt, k))
        return acc

    def _is_g1(self, a) -> bool:
        return isinstance(a[0], self._bn.FQ)

    def encode(self, group: int, a) -> bytes:
        bn = self._bn
        if bn.is_inf(a):
            return bytes(self.g1_len if group == 1 else self.g2_len)
        x, y = bn.normalize(a)
        if group == 1:
            return int(x).to_bytes(32, "big") + int(y).to_bytes(32, "big")
        # precompile order: imaginary part first
        out = b""
        for c in (x, y):
            out += int(c.coeffs[1]).to_bytes(32, "big") + int(c.coeffs[0]).to_bytes(32, "big")
        return out

    def decode(self, group: int, data: bytes):
        bn = self._bn
        want = self.g1_len if group == 1 else self.g2_len
        if len(data) != want:
            raise InvalidPointError(f"expected {want} bytes, got {len(data)}")
        words = [int.from_bytes(data[i : i + 32], "big") for i in range(0, want, 32)]
        if any(w >= self._q for w in words):
            raise InvalidPointError("coordinate out of range")
        if not any(words):
            return self.zero(group)
        if group == 1:
            pt = (bn.FQ(words[0]), bn.FQ(words[1]), bn.FQ.one())
            if not bn.is_on_curve(pt, bn.b):
                raise InvalidPointError("point not on curve")
            return pt  # cofactor 1: on-curve implies subgroup membership
        x = bn.FQ2([words[1], words[0]])
        y = bn.FQ2([words[3], words[2]])
        pt = (x, y, bn.FQ2.one())
        if not bn.is_on_curve(pt, bn.b2):
            raise InvalidPointError("point not on curve")
        if not bn.is_inf(bn.multiply(pt, self.order)):
            raise InvalidPointError("point not in prime-order subgroup")
        return pt

    def pairing(self, a, b):
        return self._bn.pairing(b, a)

    def pairing_product(self, g1s: list, g2s: list):
        bn = self._bn
        acc = bn.FQ12.one()
        for a, b in zip(g1s, g2s):
            acc = acc * bn.pairing(b, a, final_exponentiate=False)
        return bn.final_exponentiate(acc)

    def gt_one(self):
        return self._bn.FQ12.one()

    def gt_mul(self, a, b):
        return a * b

    def gt_eq(self, a, b) -> bool:
        return a == b


# ---------------------------------------------------------------------------
# group element wrappers


class _GroupPoint:
    __slots__ = ("curve", "raw")
    group = 0

    def __init__(self, curve: CurveParams, raw) -> None:
        self.curve = curve
        self.raw = raw

    def _wrap(self, raw):
        return type(self)(self.curve, raw)

    def __add__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self._wrap(self.curve.backend.add(self.raw, other.raw))

    def __sub__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        b = self.curve.backend
        return self._wrap(b.add(self.raw, b.neg(other.raw)))

    def __neg__(self):
        return self._wrap(self.curve.backend.neg(self.raw))

    def __mul__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        b = self.curve.backend
        k %= b.order
        if k == 0:
            return self._wrap(b.zero(self.group))
        return self._wrap(b.mul(self.raw, k))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if type(other) is not type(self) or other.curve.name != self.curve.name:
            return False
        return self.curve.backend.eq(self.raw, other.raw)

    def __hash__(self) -> int:
        return hash(self.to_bytes())

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_bytes().hex()[:16]}...)"

    def is_identity(self) -> bool:
        return self == self._wrap(self.curve.backend.zero(self.group))

    def to_bytes(self) -> bytes:
        return self.curve.backend.encode(self.group, self.raw)

    def hex(self) -> str:
        return to_hex(self.to_bytes())


class G1Point(_GroupPoint):
    __slots__ = ()
    group = 1


class G2Point(_GroupPoint):
    __slots__ = ()
    group = 2


class GtElement:
    __slots__ = ("curve", "raw")

    def __init__(self, curve: CurveParams, raw) -> None:
        self.curve = curve
        self.raw = raw

    def __mul__(self, other: GtElement) -> GtElement:
        return GtElement(self.curve, self.curve.backend.gt_mul(self.raw, other.raw))

    def __pow__(self, k: int) -> GtElement:
        k %= self.curve.p
        acc = self.curve.gt_one()
        base = self
        while k:
            if k & 1:
                acc = acc * base
            base = base * base
            k >>= 1
        return acc

    def __eq__(self, other) -> bool:
        return isinstance(other, GtElement) and self.curve.backend.gt_eq(self.raw, other.raw)

    def __hash__(self):
        raise TypeError("GtElement is unhashable")

    def is_one(self) -> bool:
        return self == self.curve.gt_one()


# ---------------------------------------------------------------------------
# curve parameters


class CurveParams:
    """A pairing curve: group order, generators and group operations."""

    def __init__(self, backend) -> None:
        self.backend = backend
        self.name: str = backend.name
        self.curve_id: int = backend.curve_id
        self.p: int = backend.order
        self.field = ScalarField(self.p)
        self.g1_len: int = backend.g1_len
        self.g2_len: int = backend.g2_len
        self.g = G1Point(self, backend.gen(1))
        self.h = G2Point(self, backend.gen(2))

    def __repr__(self) -> str:
        return f"CurveParams({self.name})"

    def g1_identity(self) -> G1Point:
        return G1Point(self, self.backend.zero(1))

    def g2_identity(self) -> G2Point:
        return G2Point(self, self.backend.zero(2))

    def gt_one(self) -> GtElement:
        return GtElement(self, self.backend.gt_one())

    def msm(self, points: Sequence[_GroupPoint], scalars: Sequence[int]):
        if len(points) != len(scalars):
            raise AlgebraError(f"msm length mismatch: {len(points)} points, {len(scalars)} scalars")
        if not points:
            raise AlgebraError("msm of an empty list has no group; use the identity directly")
        cls = type(points[0])
        raw = self.backend.msm(cls.group, [pt.raw for pt in points], list(scalars))
        return cls(self, raw)

    def pairing(self, a: G1Point, b: G2Point) -> GtElement:
        return GtElement(self, self.backend.pairing(a.raw, b.raw))

    def pairing_product(self, pairs: Iterable[tuple[G1Point, G2Point]]) -> GtElement:
        pairs = list(pairs)
        raw = self.backend.pairing_product([a.raw for a, _ in pairs], [b.raw for _, b in pairs])
        return GtElement(self, raw)

    def pairing_check(self, pairs: Iterable[tuple[G1Point, G2Point]]) -> bool:
        """True iff the product of the pairings is the identity of GT."""
        return self.pairing_product(pairs).is_one()

    def g1_from_bytes(self, data: bytes) -> G1Point:
        return G1Point(self, self.backend.decode(1, bytes(data)))

    def g2_from_bytes(self, data: bytes) -> G2Point:
        return G2Point(self, self.backend.decode(2, bytes(data)))

    def hash_to_scalar(self, domain_tag: bytes | str, data: bytes) -> int:
        return hash_to_scalar(domain_tag, data, self.p)

    def fixed_base_table(self, base: G1Point, window: int = 8) -> FixedBaseTable:
        return FixedBaseTable(base, self.p.bit_length(), window)


class FixedBaseTable:
    """Windowed precomputation for many multiplications of one base point."""

    def __init__(self, base: _GroupPoint, bits: int, window: int = 8) -> None:
        self.window = window
        self.base = base
        b = base.curve.backend
        self._add = b.add
        self._zero = b.zero(base.group)
        self.rows = []
        cur = base.raw
        for _ in range((bits + window - 1) // window):
            row = [self._zero]
            acc = self._zero
            for _ in range((1 << window) - 1):
                acc = b.add(acc, cur)
                row.append(acc)
            self.rows.append(row)
            cur = b.add(acc, cur)  # base * 2^(window * (i + 1))
        self._mask = (1 << window) - 1

    def mul(self, k: int) -> _GroupPoint:
        k %= self.base.curve.p
        acc = None
        add = self._add
        for row in self.rows:
            digit = k & self._mask
            if digit:
                acc = row[digit] if acc is None else add(acc, row[digit])
            k >>= self.window
            if not k:
                break
        return type(self.base)(self.base.curve, self._zero if acc is None else acc)


_CURVE_ALIASES = {"bls12_381": "bls12_381", "bls12381": "bls12_381",
                  "bn254": "bn254", "alt_bn128": "bn254", "bn128": "bn254"}


def get_curve(name: str = "bls12_381") -> CurveParams:
    key = _CURVE_ALIASES.get(name.lower().replace("-", "_"))
    if key is None:
        raise AlgebraError(f"unknown curve {name!r}")
    return _curve(key)


@lru_cache(maxsize=None)
def _curve(key: str) -> CurveParams:
    return CurveParams(_ArkworksBackend() if key == "bls12_381" else _PyEccBackend())


def curve_by_id(curve_id: int) -> CurveParams:
    for name in ("bn254", "bls12_381"):
        if get_curve(name).curve_id == curve_id:
            return get_curve(name)
    raise AlgebraError(f"unknown curve id {curve_id}")


DEFAULT_CURVE = "bls12_381"


# ---------------------------------------------------------------------------
# hashing and randomness


def hash_to_scalar(domain_tag: bytes | str, data: bytes, p: int) -> int:
    """keccak-256(len(tag) || tag || data [|| counter]) reduced mod p.

    Digests at or above the largest multiple of p below 2^256 are rejected
    and re-hashed with an appended counter byte, so the result carries no
    modular bias.
    """
    if isinstance(domain_tag, str):
        domain_tag = domain_tag.encode()
    msg = len(domain_tag).to_bytes(4, "big") + domain_tag + bytes(data)
    limit = (1 << 256) - (1 << 256) % p
    v = int.from_bytes(keccak256(msg), "big")
    counter = 0
    while v >= limit:
        counter += 1
        if counter > 255:
            raise AlgebraError("rejection sampling did not terminate")
        v = int.from_bytes(keccak256(msg + bytes([counter])), "big")
    return v % p


class DeterministicRng:
    """keccak-256 in counter mode; every draw is a pure function of the seed."""

    def __init__(self, seed: int | bytes | str | None = None) -> None:
        if seed is None:
            seed = os.urandom(32)
        elif isinstance(seed, int):
            seed = seed.to_bytes(max(1, (seed.bit_length() + 7) // 8), "big", signed=False)
        elif isinstance(seed, str):
            seed = seed.encode()
        self._key = keccak256(b"zkparametric-rng" + seed)
        self._counter = 0
        self._buf = b""

    def random_bytes(self, n: int) -> bytes:
        while len(self._buf) < n:
            self._buf += keccak256(self._key + self._counter.to_bytes(8, "big"))
            self._counter += 1
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("upper bound must be positive")
        nbytes = (n.bit_length() + 7) // 8 + 8  # 64 spare bits keep the bias negligible
        return int.from_bytes(self.random_bytes(nbytes), "big") % n

    def randint(self, lo: int, hi: int) -> int:
        return lo + self.randbelow(hi - lo + 1)

    def choice(self, seq: Sequence):
        return seq[self.randbelow(len(seq))]

    def sample(self, seq: Sequence, k: int) -> list:
        pool = list(seq)
        out = []
        for _ in range(k):
            out.append(pool.pop(self.randbelow(len(pool))))
        return out

    def scalar(self, p: int, exclude: Iterable[int] = ()) -> int:
        banned = set(exclude)
        while True:
            v = self.randbelow(p)
            if v not in banned:
                return v

    def fork(self, label: str) -> DeterministicRng:
        return DeterministicRng(self._key + label.encode())
