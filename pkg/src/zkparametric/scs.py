"""Constraint systems with N multiplication gates and Q linear constraints.

Gates are 1-based.  A witness (a, b, c) satisfies the system when
``a_i * b_i = c_i`` for every gate and ``a.u_q + b.v_q + c.w_q = k_q`` for
every linear constraint.  The system is compiled into the Laurent
polynomials used by the argument:

* ``R(Z) = sum a_i Z^i + b_i Z^-i + c_i Z^(-i-N)`` so that ``r[X, Y] = R(XY)``
* ``s[X, Y] = sum u^_i(Y) X^-i + v^_i(Y) X^i + w^_i(Y) X^(i+N)``
* ``k^(Y) = sum k_q Y^(q+N)``

and ``t[X, y] = R(X) (R(Xy) + s[X, y]) - k^(y)`` has constant term
``sum (a_i b_i - c_i)(y^i + y^-i) + sum_q y^(q+N) (a.u_q + b.v_q + c.w_q - k_q)``,
which vanishes identically in y exactly when the witness is satisfying.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .poly import LaurentPoly


class ConstraintError(ValueError):
    pass


class UnsatisfiedError(ConstraintError):
    """The witness does not satisfy the system (t has a nonzero constant term)."""


SparseVec = dict[int, int]


@dataclass(frozen=True)
class LinearConstraint:
    u: SparseVec
    v: SparseVec
    w: SparseVec
    k: int


@dataclass
class ConstraintSystem:
    p: int
    N: int = 0
    linear: list[LinearConstraint] = field(default_factory=list)

    @property
    def Q(self) -> int:
        return len(self.linear)

    def add_multiplication(self, count: int = 1) -> int:
        """Append gates; returns the index of the first new gate."""
        first = self.N + 1
        self.N += count
        return first

    def add_linear(self, u: Mapping[int, int] | None = None, v: Mapping[int, int] | None = None,
                   w: Mapping[int, int] | None = None, k: int = 0) -> int:
        vecs = []
        for vec in (u, v, w):
            clean = {}
            for i, coef in (vec or {}).items():
                if not 1 <= i <= self.N:
                    raise ConstraintError(f"gate index {i} outside [1, {self.N}]")
                coef %= self.p
                if coef:
                    clean[i] = (clean.get(i, 0) + coef) % self.p
            vecs.append({i: c for i, c in clean.items() if c})
        self.linear.append(LinearConstraint(*vecs, k % self.p))
        return self.Q

    def to_json(self) -> str:
        def sv(vec):
            return [[i, c] for i, c in sorted(vec.items())]

        return json.dumps({
            "N": self.N,
            "Q": self.Q,
            "linear": [{"u": sv(c.u), "v": sv(c.v), "w": sv(c.w), "k": c.k} for c in self.linear],
        })

    @classmethod
    def from_json(cls, text: str, p: int) -> ConstraintSystem:
        data = json.loads(text)
        cs = cls(p)
        cs.add_multiplication(data["N"])
        for c in data["linear"]:
            cs.add_linear(dict(map(tuple, c["u"])), dict(map(tuple, c["v"])), dict(map(tuple, c["w"])), c["k"])
        return cs


@dataclass(frozen=True)
class Witness:
    a: tuple[int, ...]
    b: tuple[int, ...]
    c: tuple[int, ...]

    @classmethod
    def of(cls, a: Sequence[int], b: Sequence[int], c: Sequence[int], p: int) -> Witness:
        if not len(a) == len(b) == len(c):
            raise ConstraintError("witness vectors differ in length")
        return cls(tuple(x % p for x in a), tuple(x % p for x in b), tuple(x % p for x in c))

    @property
    def N(self) -> int:
        return len(self.a)


def _dot(vec: SparseVec, xs: Sequence[int]) -> int:
    return sum(coef * xs[i - 1] for i, coef in vec.items())


def is_satisfied(cs: ConstraintSystem, wit: Witness) -> bool:
    if wit.N != cs.N:
        raise ConstraintError(f"witness has {wit.N} gates, system has {cs.N}")
    p = cs.p
    if any((x * y - z) % p for x, y, z in zip(wit.a, wit.b, wit.c)):
        return False
    return all(
        (_dot(lc.u, wit.a) + _dot(lc.v, wit.b) + _dot(lc.w, wit.c) - lc.k) % p == 0 for lc in cs.linear
    )


def unsatisfied_constraints(cs: ConstraintSystem, wit: Witness) -> list[str]:
    """Names of violated constraints ('mul:i' or 'lin:q'), for diagnostics."""
    p = cs.p
    bad = [f"mul:{i + 1}" for i, (x, y, z) in enumerate(zip(wit.a, wit.b, wit.c)) if (x * y - z) % p]
    for q, lc in enumerate(cs.linear, 1):
        if (_dot(lc.u, wit.a) + _dot(lc.v, wit.b) + _dot(lc.w, wit.c) - lc.k) % p:
            bad.append(f"lin:{q}")
    return bad


# ---------------------------------------------------------------------------
# polynomial encodings


@dataclass(frozen=True)
class RPoly:
    poly: LaurentPoly
    N: int

    def eval_xy(self, x: int, y: int) -> int:
        """r[x, y] = R(x y)."""
        return self.poly.eval(x * y)

    def at_y(self, y: int) -> LaurentPoly:
        """r[X, y] as a polynomial in X."""
        p = self.poly.p
        y %= p
        return LaurentPoly._raw({e: c * pow(y, e, p) % p for e, c in self.poly.coeffs.items()}, p)


def build_r_poly(wit: Witness, p: int, N: int | None = None) -> RPoly:
    """Place a_i at Z^i, b_i at Z^-i and c_i at Z^(-i-N)."""
    N = wit.N if N is None else N
    if wit.N > N:
        raise ConstraintError("witness longer than the gate count")
    coeffs = {}
    for i, (x, y, z) in enumerate(zip(wit.a, wit.b, wit.c), 1):
        if x:
            coeffs[i] = x
        if y:
            coeffs[-i] = y
        if z:
            coeffs[-i - N] = z
    return RPoly(LaurentPoly(coeffs, p), N)


class SKPolys:
    """The public polynomials s[X, Y] and k^(Y) of a constraint system."""

    def __init__(self, cs: ConstraintSystem) -> None:
        self.cs = cs
        self.p = cs.p
        self.N = cs.N
        p, N = self.p, self.N
        s_y: dict[int, int] = {}
        for i in range(1, N + 1):
            s_y[i] = p - 1
            s_y[-i] = p - 1
        for q, lc in enumerate(cs.linear, 1):
            tot = sum(lc.u.values()) + sum(lc.v.values()) + sum(lc.w.values())
            if tot % p:
                s_y[q + N] = (s_y.get(q + N, 0) + tot) % p
        self.s_y = LaurentPoly(s_y, p)  # s[1, Y]
        self.k_hat = LaurentPoly({q + N: lc.k for q, lc in enumerate(cs.linear, 1)}, p)

    def degree_needed(self) -> int:
        """Smallest SRS bound covering t, s and k for this system."""
        return max(4 * self.N, self.N + self.cs.Q, 1)

    def _weights(self, y: int) -> tuple[list[int], list[int], list[int]]:
        p, N = self.p, self.N
        u = [0] * (N + 1)
        v = [0] * (N + 1)
        w = [0] * (N + 1)
        yq = pow(y, N, p)
        for lc in self.cs.linear:
            yq = yq * y % p
            for i, c in lc.u.items():
                u[i] += c * yq
            for i, c in lc.v.items():
                v[i] += c * yq
            for i, c in lc.w.items():
                w[i] += c * yq
        y_inv = pow(y, -1, p)
        yi = yi_inv = 1
        for i in range(1, N + 1):
            yi = yi * y % p
            yi_inv = yi_inv * y_inv % p
            w[i] -= yi + yi_inv
        return u, v, w

    def s_x(self, y: int) -> LaurentPoly:
        """s[X, y] as a polynomial in X."""
        p, N = self.p, self.N
        y %= p
        if y == 0:
            raise ConstraintError("y must be nonzero")
        u, v, w = self._weights(y)
        coeffs = {}
        for i in range(1, N + 1):
            coeffs[-i] = u[i]
            coeffs[i] = v[i]
            coeffs[i + N] = w[i]
        return LaurentPoly(coeffs, p)

    def eval_s(self, x: int, y: int) -> int:
        return self.s_x(y).eval(x)


def build_sk_polys(cs: ConstraintSystem) -> SKPolys:
    return SKPolys(cs)


def compute_t(r: RPoly, sk: SKPolys, y: int, strict: bool = True) -> LaurentPoly:
    """t[X, y] = R(X) (R(Xy) + s[X, y]) - k^(y).

    With ``strict`` the constant term must be zero and is dropped, so the
    result can be committed under the restricted scheme; a nonzero constant
    raises :class:`UnsatisfiedError`.
    """
    p = sk.p
    rx = r.poly
    t = rx.mul(r.at_y(y) + sk.s_x(y)) - LaurentPoly.constant(sk.k_hat.eval(y), p)
    if not strict:
        return t
    if t.constant_term():
        raise UnsatisfiedError("witness does not satisfy the constraint system")
    return t.without_constant()


def t_constant_term(cs: ConstraintSystem, wit: Witness, y: int) -> int:
    """The constant term of t[X, y] computed directly from the constraints."""
    p = cs.p
    y %= p
    y_inv = pow(y, -1, p)
    acc = 0
    yi = yi_inv = 1
    for x, b, c in zip(wit.a, wit.b, wit.c):
        yi = yi * y % p
        yi_inv = yi_inv * y_inv % p
        acc += (x * b - c) * (yi + yi_inv)
    yq = pow(y, cs.N, p)
    for lc in cs.linear:
        yq = yq * y % p
        acc += yq * (_dot(lc.u, wit.a) + _dot(lc.v, wit.b) + _dot(lc.w, wit.c) - lc.k)
    return acc % p


# ---------------------------------------------------------------------------
# small reference circuits


def binary_check_system(w: int, p: int) -> ConstraintSystem:
    """w(w - 1) = 0 as one gate (w, w, w^2) and three linear constraints."""
    cs = ConstraintSystem(p)
    cs.add_multiplication()
    cs.add_linear(u={1: 1}, v={1: -1})
    cs.add_linear(u={1: 1}, w={1: -1})
    cs.add_linear(u={1: 1}, k=w)
    return cs


def binary_check_witness(w: int, p: int) -> Witness:
    return Witness.of([w], [w], [w * w], p)


def range_check_system(w: int, k: int, p: int) -> ConstraintSystem:
    """0 <= w < 2^k via scaled bits e_i in {0, 2^(i-1)} summing to w.

    Gate i holds (e_i, e_i, e_i^2); e_i^2 = 2^(i-1) e_i pins e_i to the two
    allowed values.
    """
    cs = ConstraintSystem(p)
    cs.add_multiplication(k)
    for i in range(1, k + 1):
        cs.add_linear(u={i: 1}, v={i: -1})
        cs.add_linear(u={i: 1 << (i - 1)}, w={i: -1})
    cs.add_linear(u={i: 1 for i in range(1, k + 1)}, k=w)
    return cs


def range_check_witness(w: int, k: int, p: int) -> Witness:
    if not 0 <= w < (1 << k):
        raise ConstraintError(f"{w} is not representable in {k} bits")
    bits = [w & (1 << i) for i in range(k)]
    return Witness.of(bits, bits, [e * e for e in bits], p)
