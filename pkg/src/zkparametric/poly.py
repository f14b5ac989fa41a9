"""Sparse Laurent polynomials over a prime field.

A :class:`LaurentPoly` maps integer exponents (possibly negative) to nonzero
residues mod ``p``.  Values are immutable; every operation returns a new
polynomial.  Large products switch to Kronecker substitution, which packs
both operands into Python big integers and lets CPython's Karatsuba do the
convolution.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence


class PolyError(ValueError):
    pass


class DegreeBoundError(PolyError):
    pass


class InexactDivisionError(PolyError):
    pass


# products with fewer term pairs than this use the plain dict convolution
_KRONECKER_THRESHOLD = 20_000


class LaurentPoly:
    __slots__ = ("coeffs", "p", "d")

    def __init__(self, coeffs: Mapping[int, int] | None, p: int, d: int | None = None) -> None:
        clean = {}
        if coeffs:
            for e, c in coeffs.items():
                c %= p
                if c:
                    clean[int(e)] = c
        if d is not None and clean:
            if min(clean) < -d or max(clean) > d:
                raise DegreeBoundError(f"exponents [{min(clean)}, {max(clean)}] exceed bound {d}")
        self.coeffs: dict[int, int] = clean
        self.p = p
        self.d = d

    @classmethod
    def _raw(cls, coeffs: dict[int, int], p: int, d: int | None = None) -> LaurentPoly:
        # trusted constructor: coeffs already reduced and free of zeros
        obj = cls.__new__(cls)
        obj.coeffs = coeffs
        obj.p = p
        obj.d = d
        return obj

    @classmethod
    def zero(cls, p: int) -> LaurentPoly:
        return cls._raw({}, p)

    @classmethod
    def constant(cls, c: int, p: int) -> LaurentPoly:
        return cls({0: c}, p)

    @classmethod
    def monomial(cls, exp: int, c: int, p: int) -> LaurentPoly:
        return cls({exp: c}, p)

    @classmethod
    def from_dense(cls, lo: int, values: Sequence[int], p: int) -> LaurentPoly:
        """Coefficients ``values[k]`` placed at exponent ``lo + k``."""
        return cls({lo + k: v for k, v in enumerate(values) if v % p}, p)

    # --- inspection -----------------------------------------------------

    def __len__(self) -> int:
        return len(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def min_exp(self) -> int:
        return min(self.coeffs) if self.coeffs else 0

    def max_exp(self) -> int:
        return max(self.coeffs) if self.coeffs else 0

    def coeff(self, exp: int) -> int:
        return self.coeffs.get(exp, 0)

    def constant_term(self) -> int:
        return self.coeffs.get(0, 0)

    def is_ordinary(self) -> bool:
        return not self.coeffs or self.min_exp() >= 0

    def check_bound(self, d: int) -> None:
        if self.coeffs and (self.min_exp() < -d or self.max_exp() > d):
            raise DegreeBoundError(
                f"exponents [{self.min_exp()}, {self.max_exp()}] exceed bound {d}"
            )

    def with_bound(self, d: int) -> LaurentPoly:
        self.check_bound(d)
        return LaurentPoly._raw(self.coeffs, self.p, d)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.p == other.p and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.p, frozenset(self.coeffs.items())))

    def __repr__(self) -> str:
        if not self.coeffs:
            return "LaurentPoly(0)"
        terms = [f"{c}*X^{e}" for e, c in sorted(self.coeffs.items(), reverse=True)[:6]]
        more = " + ..." if len(self.coeffs) > 6 else ""
        return "LaurentPoly(" + " + ".join(terms) + more + ")"

    def _check_field(self, other: LaurentPoly) -> None:
        if other.p != self.p:
            raise PolyError("polynomials over different fields")

    def _bound_for(self, other: LaurentPoly | None = None) -> int | None:
        if other is None or other.d is None:
            return self.d
        if self.d is None:
            return other.d
        return min(self.d, other.d)

    # --- arithmetic -----------------------------------------------------

    def __add__(self, other: LaurentPoly) -> LaurentPoly:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        self._check_field(other)
        p = self.p
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            v = (out.get(e, 0) + c) % p
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        bound = self._bound_for(other)
        res = LaurentPoly._raw(out, p, bound)
        if bound is not None:
            res.check_bound(bound)
        return res

    def __neg__(self) -> LaurentPoly:
        p = self.p
        return LaurentPoly._raw({e: p - c for e, c in self.coeffs.items()}, p, self.d)

    def __sub__(self, other: LaurentPoly) -> LaurentPoly:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self + (-other)

    def scale(self, k: int) -> LaurentPoly:
        p = self.p
        k %= p
        if k == 0:
            return LaurentPoly._raw({}, p, self.d)
        return LaurentPoly._raw({e: c * k % p for e, c in self.coeffs.items()}, p, self.d)

    def shift(self, k: int, bound: int | None = None) -> LaurentPoly:
        """Multiply by X^k."""
        bound = self.d if bound is None else bound
        return LaurentPoly({e + k: c for e, c in self.coeffs.items()}, self.p, bound)

    def mul(self, other: LaurentPoly, bound: int | None = None) -> LaurentPoly:
        self._check_field(other)
        if bound is None:
            bound = self._bound_for(other)
        if not self.coeffs or not other.coeffs:
            return LaurentPoly._raw({}, self.p, bound)
        if len(self.coeffs) * len(other.coeffs) < _KRONECKER_THRESHOLD:
            out = _mul_sparse(self.coeffs, other.coeffs, self.p)
        else:
            out = _mul_kronecker(self.coeffs, other.coeffs, self.p)
        res = LaurentPoly._raw(out, self.p, bound)
        if bound is not None:
            res.check_bound(bound)
        return res

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        if isinstance(other, LaurentPoly):
            return self.mul(other)
        return NotImplemented

    __rmul__ = __mul__

    def without_constant(self) -> LaurentPoly:
        out = dict(self.coeffs)
        out.pop(0, None)
        return LaurentPoly._raw(out, self.p, self.d)

    # --- evaluation -----------------------------------------------------

    def eval(self, z: int) -> int:
        p = self.p
        z %= p
        if not self.coeffs:
            return 0
        lo, hi = self.min_exp(), self.max_exp()
        if z == 0:
            if lo < 0:
                raise PolyError("cannot evaluate a Laurent polynomial with negative terms at 0")
            return self.coeffs.get(0, 0)
        span = hi - lo + 1
        if span <= 4 * len(self.coeffs):
            get = self.coeffs.get
            acc = 0
            for e in range(hi, lo - 1, -1):
                acc = (acc * z + get(e, 0)) % p
            return acc * pow(z, lo, p) % p
        return sum(c * pow(z, e, p) for e, c in self.coeffs.items()) % p

    __call__ = eval

    # --- division -------------------------------------------------------

    def divide_by_linear(self, z: int) -> LaurentPoly:
        """The quotient q with (X - z) q = f - f(z)."""
        p = self.p
        z %= p
        if z == 0:
            raise PolyError("division by X is not a Laurent-polynomial quotient here; z must be nonzero")
        out: dict[int, int] = {}
        pos = {e: c for e, c in self.coeffs.items() if e > 0}
        if pos:
            # synthetic division of the non-negative part (constant term drops out)
            hi = max(pos)
            acc = 0
            for e in range(hi, 0, -1):
                acc = (acc * z + pos.get(e, 0)) % p
                if acc:
                    out[e - 1] = acc
        neg = {-e: c for e, c in self.coeffs.items() if e < 0}
        if neg:
            # X^-k - z^-k = -(X - z) * sum_{m=1..k} X^-m z^-(k-m+1)
            w = pow(z, -1, p)
            top = max(neg)
            s = 0
            for m in range(top, 0, -1):
                s = (neg.get(m, 0) + w * s) % p
                c = -w * s % p
                if c:
                    out[-m] = c
        return LaurentPoly._raw(out, p, self.d)

    def divide_exact(self, divisor: LaurentPoly) -> LaurentPoly:
        """Exact division by an ordinary polynomial with nonzero constant term."""
        self._check_field(divisor)
        p = self.p
        if divisor.is_zero() or not divisor.is_ordinary():
            raise PolyError("divisor must be a nonzero ordinary polynomial")
        if not self.coeffs:
            return LaurentPoly._raw({}, p, self.d)
        lo = self.min_exp()
        num = [0] * (self.max_exp() - lo + 1)
        for e, c in self.coeffs.items():
            num[e - lo] = c
        dlo = divisor.min_exp()
        den = [divisor.coeff(e) for e in range(dlo, divisor.max_exp() + 1)]
        k = len(den) - 1
        lead_inv = pow(den[-1], -1, p)
        if len(num) <= k:
            raise InexactDivisionError("nonzero remainder")
        quot = [0] * (len(num) - k)
        for i in range(len(num) - 1, k - 1, -1):
            c = num[i] * lead_inv % p
            if c:
                quot[i - k] = c
                for j in range(k + 1):
                    num[i - k + j] = (num[i - k + j] - c * den[j]) % p
        if any(num[:k]):
            raise InexactDivisionError("nonzero remainder")
        return LaurentPoly.from_dense(lo - dlo, quot, p)


def _mul_sparse(a: dict[int, int], b: dict[int, int], p: int) -> dict[int, int]:
    out: dict[int, int] = {}
    get = out.get
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = ea + eb
            out[e] = get(e, 0) + ca * cb
    return {e: c % p for e, c in out.items() if c % p}


def _mul_kronecker(a: dict[int, int], b: dict[int, int], p: int) -> dict[int, int]:
    alo, ahi = min(a), max(a)
    blo, bhi = min(b), max(b)
    n = min(ahi - alo, bhi - blo) + 1
    width = (2 * p.bit_length() + n.bit_length() + 8) // 8 + 1
    A = _pack(a, alo, ahi, width)
    B = _pack(b, blo, bhi, width)
    prod = (A * B).to_bytes((ahi - alo + bhi - blo + 1) * width + 1, "little")
    base = alo + blo
    out = {}
    for k in range(ahi - alo + bhi - blo + 1):
        c = int.from_bytes(prod[k * width : (k + 1) * width], "little") % p
        if c:
            out[base + k] = c
    return out


def _pack(coeffs: dict[int, int], lo: int, hi: int, width: int) -> int:
    get = coeffs.get
    zero = bytes(width)
    parts = []
    for e in range(lo, hi + 1):
        c = get(e)
        parts.append(c.to_bytes(width, "little") if c else zero)
    return int.from_bytes(b"".join(parts), "little")


def poly_arith(f: LaurentPoly, g: LaurentPoly | int, op: str, bound: int | None = None) -> LaurentPoly:
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f.mul(g, bound)
    if op == "scale":
        return f.scale(g)
    if op == "shift":
        return f.shift(g, bound)
    raise ValueError(f"unknown polynomial op {op!r}")


def vanishing_poly(points: Iterable[int], p: int) -> LaurentPoly:
    pts = [x % p for x in points]
    if not pts:
        raise PolyError("vanishing polynomial of an empty set")
    if len(set(pts)) != len(pts):
        raise PolyError("vanishing set has repeated points")
    coeffs = [1]  # ascending
    for x in pts:
        nxt = [0] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i + 1] = (nxt[i + 1] + c) % p
            nxt[i] = (nxt[i] - x * c) % p
        coeffs = nxt
    return LaurentPoly.from_dense(0, coeffs, p)


def lagrange_interpolate(points: Sequence[tuple[int, int]], p: int) -> LaurentPoly:
    xs = [x % p for x, _ in points]
    if len(set(xs)) != len(xs):
        raise PolyError("duplicate abscissa in interpolation points")
    if not points:
        return LaurentPoly.zero(p)
    n = len(xs)
    acc = [0] * n
    full = vanishing_poly(xs, p)
    dense_full = [full.coeff(e) for e in range(n + 1)]
    for i, (xi, yi) in enumerate(zip(xs, (y % p for _, y in points))):
        if yi == 0:
            continue
        # basis numerator: full / (X - xi) by synthetic division
        num = [0] * n
        carry = 0
        for e in range(n, 0, -1):
            carry = (dense_full[e] + carry * xi) % p
            num[e - 1] = carry
        denom = 1
        for j, xj in enumerate(xs):
            if j != i:
                denom = denom * (xi - xj) % p
        k = yi * pow(denom, -1, p) % p
        for e in range(n):
            acc[e] = (acc[e] + k * num[e]) % p
    return LaurentPoly.from_dense(0, acc, p)
