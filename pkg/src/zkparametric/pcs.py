"""KZG commitments over Laurent polynomials, in three flavours.

``kzg_*``
    plain KZG: F = g^{f(x)}, checked against h^x.
``rkzg_*``
    restricted KZG: F = g^{alpha f(x)} with the g^alpha power absent from the
    SRS, so only polynomials with a zero constant term can be committed.
``rkzgb_*``
    restricted KZG with one-shot verification of many polynomials opened at
    many points (a BDFG-style batch over the restricted pairing equation).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .algebra import (
    AlgebraError,
    CurveParams,
    DeterministicRng,
    G1Point,
    G2Point,
    get_curve,
    curve_by_id,
    from_hex,
    keccak256,
    to_hex,
)
from .poly import DegreeBoundError, InexactDivisionError, LaurentPoly, PolyError, lagrange_interpolate, vanishing_poly
from .trace import VerifyTrace, ensure

SRS_MAGIC = b"ZKPSRS01"
SRS_VERSION = 1


class CommitmentError(ValueError):
    pass


class ConstantTermError(CommitmentError):
    """A restricted commitment was asked to commit to a nonzero constant term."""


@dataclass
class SRS:
    curve: CurveParams
    d: int
    g_powers: list[G1Point]  # exponent i stored at index i + d
    g_alpha_powers: list[G1Point | None]  # same indexing, None at exponent 0
    h: G2Point
    h_x: G2Point
    h_alpha: G2Point
    h_alpha_x: G2Point
    _digest: bytes | None = field(default=None, repr=False, compare=False)

    @property
    def g(self) -> G1Point:
        return self.g_powers[self.d]

    def g_power(self, i: int) -> G1Point:
        if not -self.d <= i <= self.d:
            raise DegreeBoundError(f"exponent {i} outside [-{self.d}, {self.d}]")
        return self.g_powers[i + self.d]

    def g_alpha_power(self, i: int) -> G1Point:
        if i == 0:
            raise ConstantTermError("the SRS holds no g^alpha term")
        if not -self.d <= i <= self.d:
            raise DegreeBoundError(f"exponent {i} outside [-{self.d}, {self.d}]")
        return self.g_alpha_powers[i + self.d]

    # --- consistency ----------------------------------------------------

    def self_check(self, rng: DeterministicRng | None = None) -> bool:
        """Randomized check that the powers share one trapdoor pair.

        Random linear combinations collapse the per-index pairing checks
        into three multi-pairings.
        """
        c = self.curve
        rng = rng or DeterministicRng(b"srs-self-check" + self.digest())
        d = self.d
        rho = [rng.scalar(c.p) for _ in range(2 * d)]
        lo = c.msm(self.g_powers[:-1], rho)  # exponents -d .. d-1
        hi = c.msm(self.g_powers[1:], rho)  # exponents -d+1 .. d
        if not c.pairing_check([(hi, self.h), (-lo, self.h_x)]):
            return False
        idx = [i for i in range(-d, d + 1) if i != 0]
        rho2 = [rng.scalar(c.p) for _ in idx]
        plain = c.msm([self.g_powers[i + d] for i in idx], rho2)
        shifted = c.msm([self.g_alpha_powers[i + d] for i in idx], rho2)
        if not c.pairing_check([(shifted, self.h), (-plain, self.h_alpha)]):
            return False
        return c.pairing_check([(self.g_alpha_power(1), self.h), (-self.g, self.h_alpha_x)])

    # --- serialization --------------------------------------------------

    def to_bytes(self) -> bytes:
        out = [SRS_MAGIC, struct.pack(">HI", self.curve.curve_id, self.d)]

        def arr(points):
            out.append(struct.pack(">I", len(points)))
            out.extend(pt.to_bytes() for pt in points)

        arr(self.g_powers)
        arr([pt for pt in self.g_alpha_powers if pt is not None])
        arr([self.h, self.h_x, self.h_alpha, self.h_alpha_x])
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> SRS:
        if data[:8] != SRS_MAGIC:
            raise CommitmentError("not an SRS file (bad magic)")
        curve_id, d = struct.unpack(">HI", data[8:14])
        curve = curve_by_id(curve_id)
        pos = 14

        def arr(size, decode):
            nonlocal pos
            (count,) = struct.unpack(">I", data[pos : pos + 4])
            pos += 4
            items = []
            for _ in range(count):
                items.append(decode(data[pos : pos + size]))
                pos += size
            return items

        g_powers = arr(curve.g1_len, curve.g1_from_bytes)
        alpha = arr(curve.g1_len, curve.g1_from_bytes)
        g2 = arr(curve.g2_len, curve.g2_from_bytes)
        if len(g_powers) != 2 * d + 1 or len(alpha) != 2 * d or len(g2) != 4 or pos != len(data):
            raise CommitmentError("SRS file has inconsistent array lengths")
        alpha_powers: list[G1Point | None] = alpha[:d] + [None] + alpha[d:]
        srs = cls(curve, d, g_powers, alpha_powers, *g2)
        srs._digest = keccak256(data)
        return srs

    def digest(self) -> bytes:
        if self._digest is None:
            self._digest = keccak256(self.to_bytes())
        return self._digest

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path: str | Path, check: bool = True) -> SRS:
        srs = cls.from_bytes(Path(path).read_bytes())
        if check and not srs.self_check():
            raise CommitmentError(f"{path}: SRS self-check failed")
        return srs

    def verifier_subset(self) -> dict:
        """The elements an on-chain restricted-KZG verifier needs."""
        elements = {"g": self.g, "h": self.h, "h_alpha": self.h_alpha, "h_alpha_x": self.h_alpha_x}
        return {
            "version": SRS_VERSION,
            "curve": self.curve.name,
            "d": self.d,
            "srs_digest": to_hex(self.digest()),
            "elements": {k: pt.hex() for k, pt in elements.items()},
            "element_count": subset_words(elements.values()),
        }

    def save_verifier_subset(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.verifier_subset(), indent=2) + "\n")

    def verifier_key(self) -> VerifierKey:
        return VerifierKey(self.curve, self.g, self.h, self.h_alpha, self.h_alpha_x, self.digest())


@dataclass(frozen=True)
class VerifierKey:
    """The restricted-scheme verification elements of an SRS."""

    curve: CurveParams
    g: G1Point
    h: G2Point
    h_alpha: G2Point
    h_alpha_x: G2Point
    srs_digest: bytes

    @classmethod
    def from_subset(cls, data: dict) -> VerifierKey:
        if data.get("version") != SRS_VERSION:
            raise CommitmentError("unsupported verifier-subset version")
        curve = get_curve(data["curve"])
        el = data["elements"]
        return cls(
            curve,
            curve.g1_from_bytes(from_hex(el["g"])),
            curve.g2_from_bytes(from_hex(el["h"])),
            curve.g2_from_bytes(from_hex(el["h_alpha"])),
            curve.g2_from_bytes(from_hex(el["h_alpha_x"])),
            from_hex(data["srs_digest"]),
        )

    def to_subset(self) -> dict:
        elements = {"g": self.g, "h": self.h, "h_alpha": self.h_alpha, "h_alpha_x": self.h_alpha_x}
        return {
            "version": SRS_VERSION,
            "curve": self.curve.name,
            "srs_digest": to_hex(self.srs_digest),
            "elements": {k: pt.hex() for k, pt in elements.items()},
            "element_count": subset_words(elements.values()),
        }


def subset_words(points) -> int:
    """uint256 words for affine coordinates: 2 per G1 element, 4 per G2 element."""
    return sum(2 if isinstance(pt, G1Point) else 4 for pt in points)


def setup(d: int, rng: DeterministicRng, curve: CurveParams | str | None = None) -> SRS:
    if d < 1:
        raise ValueError("degree bound must be at least 1")
    if not isinstance(curve, CurveParams):
        curve = get_curve(curve or "bls12_381")
    p = curve.p
    x = rng.scalar(p, exclude=(0, 1))
    alpha = rng.scalar(p, exclude=(0, 1))
    table = curve.fixed_base_table(curve.g)
    x_inv = pow(x, -1, p)
    exps = [0] * (2 * d + 1)
    exps[d] = 1
    for i in range(1, d + 1):
        exps[d + i] = exps[d + i - 1] * x % p
        exps[d - i] = exps[d - i + 1] * x_inv % p
    g_powers = [table.mul(e) for e in exps]
    g_alpha: list[G1Point | None] = [None if i == d else table.mul(alpha * e) for i, e in enumerate(exps)]
    h = curve.h
    srs = SRS(curve, d, g_powers, g_alpha, h, h * x, h * alpha, h * (alpha * x % p))
    del x, alpha, x_inv, exps  # trapdoor leaves scope here
    return srs


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class Commitment:
    point: G1Point
    scheme: str = "rkzg"

    def to_bytes(self) -> bytes:
        return self.point.to_bytes()


@dataclass(frozen=True)
class OpeningProof:
    witness: G1Point


@dataclass(frozen=True)
class BatchProof:
    pi1: G1Point
    pi2: G1Point


@dataclass(frozen=True)
class BatchOpeningClaim:
    commitment: Commitment
    points: tuple[int, ...]
    gamma: LaurentPoly

    def evaluations(self) -> list[int]:
        return [self.gamma.eval(s) for s in self.points]


def _msm_poly(srs: SRS, f: LaurentPoly, alpha: bool) -> G1Point:
    c = srs.curve
    if f.is_zero():
        return c.g1_identity()
    f.check_bound(srs.d)
    get = srs.g_alpha_power if alpha else srs.g_power
    exps = list(f.coeffs)
    return c.msm([get(e) for e in exps], [f.coeffs[e] for e in exps])


# ---------------------------------------------------------------------------
# plain KZG


def kzg_commit(srs: SRS, f: LaurentPoly) -> Commitment:
    return Commitment(_msm_poly(srs, f, alpha=False), "kzg")


def kzg_open(srs: SRS, f: LaurentPoly, z: int) -> tuple[int, OpeningProof]:
    v = f.eval(z)
    q = f.divide_by_linear(z)
    return v, OpeningProof(_msm_poly(srs, q, alpha=False))


def kzg_verify(srs: SRS, F: Commitment, z: int, v: int, proof: OpeningProof, trace: VerifyTrace | None = None) -> bool:
    # e(F - v g + z pi, h) == e(pi, h^x)
    tr = ensure(trace)
    try:
        c = srs.curve
        lhs = F.point - srs.g * v + proof.witness * z
        tr.add("g1_mul", 2)
        tr.add("g1_add", 2)
        tr.pairing_equation(2)
        return c.pairing_check([(lhs, srs.h), (-proof.witness, srs.h_x)])
    except (AlgebraError, TypeError, AttributeError):
        return False


# ---------------------------------------------------------------------------
# restricted KZG


def rkzg_commit(srs: SRS, f: LaurentPoly) -> Commitment:
    if f.constant_term():
        raise ConstantTermError("restricted commitments require a zero constant term")
    return Commitment(_msm_poly(srs, f, alpha=True), "rkzg")


def rkzg_open(srs: SRS, f: LaurentPoly, z: int) -> tuple[int, OpeningProof]:
    return kzg_open(srs, f, z)


def rkzg_check_pairs(srs: SRS | VerifierKey, F: G1Point, z: int, v: int, pi: G1Point) -> list[tuple[G1Point, G2Point]]:
    """Pairs whose product is one iff e(pi, h^ax) e(g^v pi^-z, h^a) = e(F, h)."""
    return [(pi, srs.h_alpha_x), (srs.g * v - pi * z, srs.h_alpha), (-F, srs.h)]


def rkzg_verify(srs: SRS | VerifierKey, F: Commitment, z: int, v: int, proof: OpeningProof, trace: VerifyTrace | None = None) -> bool:
    tr = ensure(trace)
    try:
        pairs = rkzg_check_pairs(srs, F.point, z, v, proof.witness)
        tr.add("g1_mul", 2)
        tr.add("g1_add", 1)
        tr.pairing_equation(3)
        return srs.curve.pairing_check(pairs)
    except (AlgebraError, TypeError, AttributeError):
        return False


# ---------------------------------------------------------------------------
# restricted KZG, batched


def union_points(point_sets: Sequence[Sequence[int]], p: int) -> list[int]:
    seen: dict[int, None] = {}
    for S in point_sets:
        for s in S:
            seen.setdefault(s % p, None)
    return list(seen)


def make_claims(srs: SRS, commitments: Sequence[Commitment], polys: Sequence[LaurentPoly],
                point_sets: Sequence[Sequence[int]]) -> list[BatchOpeningClaim]:
    """Opener-side claims: gamma_i interpolates f_i over its point set."""
    p = srs.curve.p
    claims = []
    for F, f, S in zip(commitments, polys, point_sets, strict=True):
        pts = tuple(s % p for s in S)
        gamma = lagrange_interpolate([(s, f.eval(s)) for s in pts], p)
        claims.append(BatchOpeningClaim(F, pts, gamma))
    return claims


def _vanishing_eval(points: Sequence[int], mu: int, p: int) -> int:
    acc = 1
    for s in points:
        acc = acc * (mu - s) % p
    return acc


@dataclass
class BatchOpening:
    """Prover state between the two rounds of a batch opening.

    The first round fixes pi1 = g^{p(x)} with p = f_hat / Z_S and
    ``f_hat = sum_i beta^i Z_{S \\ S_i} (f_i - gamma_i)``.  Once the challenge
    mu is known, :meth:`finish` returns pi2 = g^{w(x)} with w = l / (X - mu),
    ``l = sum_i psi_i (f_i - gamma_i(mu)) - Z_S(mu) p`` and
    ``psi_i = beta^i Z_{S \\ S_i}(mu)``.
    """

    srs: SRS
    polys: list[LaurentPoly]
    sets: list[list[int]]
    gammas: list[LaurentPoly]
    points: list[int]
    beta: int
    quotient: LaurentPoly
    pi1: G1Point

    def finish(self, mu: int) -> BatchProof:
        p = self.srs.curve.p
        mu %= p
        if mu in self.points:
            raise CommitmentError("mu collides with an evaluation point")
        ell = self.quotient.scale(-_vanishing_eval(self.points, mu, p))
        b_pow = 1
        for f, S, gamma in zip(self.polys, self.sets, self.gammas):
            rest = [s for s in self.points if s not in S]
            psi = b_pow * _vanishing_eval(rest, mu, p) % p
            ell = ell + (f - LaurentPoly.constant(gamma.eval(mu), p)).scale(psi)
            b_pow = b_pow * self.beta % p
        if ell.eval(mu):
            raise InexactDivisionError("l(mu) != 0")
        w = ell.divide_by_linear(mu)
        return BatchProof(self.pi1, _msm_poly(self.srs, w, alpha=False))


def rkzgb_open_quotient(srs: SRS, polys: Sequence[LaurentPoly], point_sets: Sequence[Sequence[int]], beta: int,
                        gammas: Sequence[LaurentPoly] | None = None) -> BatchOpening:
    p = srs.curve.p
    if len(polys) != len(point_sets) or not polys:
        raise CommitmentError("need one nonempty point set per polynomial")
    for f in polys:
        if f.constant_term():
            raise ConstantTermError("restricted commitments require a zero constant term")
    sets = [[s % p for s in S] for S in point_sets]
    if any(not S for S in sets) or any(len(set(S)) != len(S) for S in sets):
        raise CommitmentError("point sets must be nonempty and free of repeats")
    S_all = union_points(sets, p)
    if gammas is None:
        gammas = [lagrange_interpolate([(s, f.eval(s)) for s in S], p) for f, S in zip(polys, sets)]
    f_hat = LaurentPoly.zero(p)
    b_pow = 1
    for f, S, gamma in zip(polys, sets, gammas):
        rest = [s for s in S_all if s not in S]
        diff = f - gamma
        f_hat = f_hat + (diff.mul(vanishing_poly(rest, p)) if rest else diff).scale(b_pow)
        b_pow = b_pow * beta % p
    try:
        quotient = f_hat.divide_exact(vanishing_poly(S_all, p))
    except InexactDivisionError:
        raise InexactDivisionError("claimed evaluations are inconsistent with the polynomials") from None
    pi1 = _msm_poly(srs, quotient, alpha=False)
    return BatchOpening(srs, list(polys), sets, list(gammas), S_all, beta % p, quotient, pi1)


def rkzgb_batch_open(srs: SRS, polys: Sequence[LaurentPoly], point_sets: Sequence[Sequence[int]], beta: int, mu: int,
                     gammas: Sequence[LaurentPoly] | None = None) -> BatchProof:
    """Both rounds at once, for callers that already hold mu."""
    return rkzgb_open_quotient(srs, polys, point_sets, beta, gammas).finish(mu)


def rkzgb_terms(srs: SRS | VerifierKey, claims: Sequence[BatchOpeningClaim], beta: int, mu: int, proof: BatchProof,
                trace: VerifyTrace | None = None) -> list[tuple[G1Point, G2Point]]:
    """Pairs whose product is one iff e(pi2, h^ax) = e(Theta, h) e(Phi', h^a)."""
    tr = ensure(trace)
    c = srs.curve
    p = c.p
    mu %= p
    sets = [tuple(s % p for s in cl.points) for cl in claims]
    if not claims or any(not S for S in sets):
        raise CommitmentError("empty claim")
    for cl, S in zip(claims, sets):
        if len(set(S)) != len(S) or (not cl.gamma.is_ordinary()) or (cl.gamma.coeffs and cl.gamma.max_exp() >= len(S)):
            raise CommitmentError("gamma degree must be below the number of points")
    S_all = union_points(sets, p)
    if mu in S_all:
        raise CommitmentError("mu collides with an evaluation point")
    with tr.section("Computing Ψ_i"):
        psis = []
        b_pow = 1
        for i, S in enumerate(sets):
            rest = [s for s in S_all if s not in S]
            psis.append(b_pow * _vanishing_eval(rest, mu, p) % p)
            tr.add("addmod", len(rest))
            tr.add("mulmod", len(rest) + (1 if i else 0) + 1)
            b_pow = b_pow * beta % p
        z_s_mu = _vanishing_eval(S_all, mu, p)
        tr.add("addmod", len(S_all))
        tr.add("mulmod", len(S_all))
    with tr.section("Computing Θ"):
        theta = c.msm([cl.commitment.point for cl in claims], psis)
        tr.msm(len(claims))
    with tr.section("Computing Φ"):
        gamma_sum = 0
        for cl, psi in zip(claims, psis):
            deg = max(len(cl.gamma.coeffs), 1)
            tr.add("mulmod", deg + 1)
            tr.add("addmod", deg + 1)
            gamma_sum = (gamma_sum + cl.gamma.eval(mu) * psi) % p
        phi = c.msm([proof.pi2, proof.pi1, srs.g], [mu, -z_s_mu % p, -gamma_sum % p])
        tr.msm(3)
    return [(proof.pi2, srs.h_alpha_x), (-theta, srs.h), (-phi, srs.h_alpha)]


def rkzgb_batch_verify(srs: SRS | VerifierKey, claims: Sequence[BatchOpeningClaim], beta: int, mu: int, proof: BatchProof,
                       trace: VerifyTrace | None = None) -> bool:
    tr = ensure(trace)
    try:
        pairs = rkzgb_terms(srs, claims, beta, mu, proof, tr)
    except (CommitmentError, PolyError, AlgebraError, TypeError, AttributeError, ZeroDivisionError):
        return False
    with tr.section("Checking Single Pairing Equation"):
        tr.pairing_equation(len(pairs))
        return srs.curve.pairing_check(pairs)

