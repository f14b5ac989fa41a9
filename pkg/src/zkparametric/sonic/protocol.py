"""Provers and verifiers for the three argument variants.

``basic``
    commitments R, T, S_X and seven individually proved openings.
``dat``
    adds signed data sources: the witness polynomial is split as
    ``R(Z) = R~(Z) + sum_j d_j(Z) Z^offset_j`` and every d_j is opened under
    its provider's own SRS (nine pairing equations for one source).
``ev``
    the same statement, but all openings under the main SRS are proved by one
    batch proof and the per-source openings are folded in with transcript
    weights, so verification is a single multi-pairing equation.

Challenge schedule (all variants absorb the public S_Y and K first):
``y`` after D_j, R~ and R; ``z`` after T and S_X; for ``ev`` then ``beta``
after every claimed evaluation, ``mu`` after pi1 and the folding weights
after pi2 and the data proofs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..algebra import G1Point, from_hex, get_curve
from ..pcs import (
    SRS,
    BatchOpeningClaim,
    Commitment,
    CommitmentError,
    OpeningProof,
    VerifierKey,
    rkzg_check_pairs,
    rkzg_commit,
    rkzg_open,
    rkzg_verify,
    rkzgb_open_quotient,
    rkzgb_terms,
    union_points,
)
from ..poly import LaurentPoly, PolyError, lagrange_interpolate
from ..scs import ConstraintSystem, SKPolys, Witness, build_r_poly, compute_t
from ..sigs import LocationTag, verify_data_bundle
from ..trace import VerifyTrace, ensure
from .bundles import BundleError, DataSourceBundle, SourcePublic
from .proof import BASE_PROOFS, BASE_SCALARS, BATCH_FAMILY, SonicProof
from .transcript import Transcript

CIRCUIT_VERSION = 1


class ProofError(ValueError):
    pass


class LayoutError(ProofError):
    pass


@dataclass(frozen=True)
class CircuitCommitments:
    """Public commitments to s[1, Y] and k^(Y) plus the gate layout."""

    S_Y: G1Point
    K: G1Point
    N: int
    Q: int
    data_lengths: tuple[int, ...] = ()

    @property
    def N_core(self) -> int:
        return self.N - sum(self.data_lengths)

    def offsets(self) -> list[int]:
        out = []
        off = self.N_core
        for m in self.data_lengths:
            out.append(off)
            off += m
        return out

    def to_json(self) -> dict:
        return {
            "version": CIRCUIT_VERSION,
            "curve": self.S_Y.curve.name,
            "S_Y": self.S_Y.hex(),
            "K": self.K.hex(),
            "N": self.N,
            "Q": self.Q,
            "data_lengths": list(self.data_lengths),
        }

    @classmethod
    def from_json(cls, data: dict) -> CircuitCommitments:
        if data.get("version") != CIRCUIT_VERSION:
            raise ValueError("unsupported circuit-commitment version")
        curve = get_curve(data["curve"])
        return cls(
            curve.g1_from_bytes(from_hex(data["S_Y"])),
            curve.g1_from_bytes(from_hex(data["K"])),
            int(data["N"]),
            int(data["Q"]),
            tuple(int(m) for m in data["data_lengths"]),
        )


def commit_circuit(srs: SRS, cs: ConstraintSystem, data_lengths: Sequence[int] = (), sk: SKPolys | None = None) -> CircuitCommitments:
    sk = sk or SKPolys(cs)
    if srs.d < sk.degree_needed():
        raise LayoutError(f"SRS bound {srs.d} is below the {sk.degree_needed()} this circuit needs")
    if sum(data_lengths) > cs.N:
        raise LayoutError("data slots exceed the gate count")
    return CircuitCommitments(
        rkzg_commit(srs, sk.s_y).point, rkzg_commit(srs, sk.k_hat).point, cs.N, cs.Q, tuple(data_lengths)
    )


# ---------------------------------------------------------------------------
# prover


@dataclass
class _Round:
    """Everything the prover knows after the z challenge."""

    transcript: Transcript
    y: int
    z: int
    polys: dict[str, LaurentPoly]
    points: dict[str, G1Point]
    scalars: dict[str, int]


def _full_witness(cs: ConstraintSystem, core: Witness, bundles: Sequence[DataSourceBundle]) -> Witness:
    m_total = sum(b.m for b in bundles)
    if core.N + m_total != cs.N:
        raise LayoutError(f"core witness ({core.N}) plus data ({m_total}) does not fill {cs.N} gates")
    data = [v for b in bundles for v in b.values]
    zeros = (0,) * m_total
    return Witness(core.a + tuple(data), core.b + zeros, core.c + zeros)


def _run_rounds(srs: SRS, cs: ConstraintSystem, core: Witness, bundles: Sequence[DataSourceBundle],
                circuit: CircuitCommitments | None, sk: SKPolys | None) -> tuple[_Round, CircuitCommitments]:
    p = srs.curve.p
    sk = sk or SKPolys(cs)
    circuit = circuit or commit_circuit(srs, cs, [b.m for b in bundles], sk)
    if circuit.data_lengths != tuple(b.m for b in bundles):
        raise LayoutError("bundle lengths do not match the circuit layout")
    for b in bundles:
        b.check()
    full = _full_witness(cs, core, bundles)
    R = build_r_poly(full, p, cs.N).poly
    polys = {"R": R, "S_Y": sk.s_y, "K": sk.k_hat}
    points = {"S_Y": circuit.S_Y, "K": circuit.K}

    tr = Transcript(p)
    tr.absorb("S_Y", circuit.S_Y.to_bytes())
    tr.absorb("K", circuit.K.to_bytes())
    for b in bundles:
        tr.absorb("D", b.commitment.to_bytes())
    if bundles:
        R_tilde = build_r_poly(core, p, cs.N).poly
        polys["R_tilde"] = R_tilde
        points["R_tilde"] = rkzg_commit(srs, R_tilde).point
        tr.absorb("R_tilde", points["R_tilde"].to_bytes())
    points["R"] = rkzg_commit(srs, R).point
    tr.absorb("R", points["R"].to_bytes())
    y = tr.challenge_avoiding("y", (0, 1))

    T = compute_t(build_r_poly(full, p, cs.N), sk, y)  # raises UnsatisfiedError
    S_X = sk.s_x(y)
    polys["T"], polys["S_X"] = T, S_X
    points["T"] = rkzg_commit(srs, T).point
    points["S_X"] = rkzg_commit(srs, S_X).point
    tr.absorb("T", points["T"].to_bytes())
    tr.absorb("S_X", points["S_X"].to_bytes())
    z = tr.challenge_avoiding("z", (0, 1))

    scalars = {
        "r1": R.eval(z),
        "r2": R.eval(z * y),
        "t": T.eval(z),
        "k": sk.k_hat.eval(y),
        "s": S_X.eval(z),
        "s1": S_X.eval(1),
        "s2": sk.s_y.eval(y),
    }
    if bundles:
        scalars["r_tilde"] = polys["R_tilde"].eval(z)
    if scalars["t"] != (scalars["r1"] * (scalars["r2"] + scalars["s"]) - scalars["k"]) % p:
        raise ProofError("internal error: t identity does not hold at z")
    return _Round(tr, y, z, polys, points, scalars), circuit


# opening points for each scalar of the individually proved variants
def _opening_points(y: int, z: int) -> dict[str, tuple[str, int]]:
    return {
        "r1": ("R", z),
        "r2": ("R", z * y),
        "t": ("T", z),
        "k": ("K", y),
        "s": ("S_X", z),
        "s1": ("S_X", 1),
        "s2": ("S_Y", y),
        "r_tilde": ("R_tilde", z),
    }


def _pk_list(bundles: Sequence[DataSourceBundle]) -> list[bytes]:
    return [b.pk for b in bundles]


def prove_basic(srs: SRS, cs: ConstraintSystem, wit: Witness, circuit: CircuitCommitments | None = None,
                sk: SKPolys | None = None) -> SonicProof:
    rnd, _ = _run_rounds(srs, cs, wit, (), circuit, sk)
    where = _opening_points(rnd.y, rnd.z)
    proofs = {}
    for name, pi_name in zip(BASE_SCALARS, BASE_PROOFS):
        poly_name, point = where[name]
        _, pi = rkzg_open(srs, rnd.polys[poly_name], point)
        proofs[pi_name] = pi.witness
    return SonicProof("basic", srs.curve, rnd.points, rnd.scalars, opening_proofs=proofs)


def _data_openings(bundles: Sequence[DataSourceBundle], z: int) -> tuple[list[int], list[G1Point]]:
    values, proofs = [], []
    for b in bundles:
        v, pi = rkzg_open(b.srs, b.poly(), z)
        values.append(v)
        proofs.append(pi.witness)
    return values, proofs


def prove_with_data(srs: SRS, cs: ConstraintSystem, core: Witness, bundles: Sequence[DataSourceBundle],
                    circuit: CircuitCommitments | None = None, sk: SKPolys | None = None) -> SonicProof:
    if not bundles:
        raise LayoutError("the data variant needs at least one data source")
    _check_location(bundles)
    rnd, _ = _run_rounds(srs, cs, core, bundles, circuit, sk)
    where = _opening_points(rnd.y, rnd.z)
    proofs = {}
    for name in BASE_SCALARS + ("r_tilde",):
        poly_name, point = where[name]
        _, pi = rkzg_open(srs, rnd.polys[poly_name], point)
        proofs["pi_rt" if name == "r_tilde" else "pi_" + name] = pi.witness
    d_vals, d_proofs = _data_openings(bundles, rnd.z)
    return SonicProof(
        "dat", srs.curve, rnd.points, rnd.scalars,
        data_commitments=[b.commitment.point for b in bundles],
        data_openings=d_vals,
        opening_proofs=proofs,
        data_proofs=d_proofs,
        signatures=[b.signature for b in bundles],
        source_pks=_pk_list(bundles),
    )


def _family_sets(y: int, z: int, p: int) -> dict[str, tuple[int, ...]]:
    return {
        "R_tilde": (z,),
        "R": (z, z * y % p),
        "T": (z,),
        "K": (y,),
        "S_X": (z, 1),
        "S_Y": (y,),
    }


def _dense(gamma: LaurentPoly, size: int) -> list[int]:
    return [gamma.coeff(e) for e in range(size)]


def _absorb_claims(tr: Transcript, scalars: dict[str, int], d_vals: Sequence[int], gammas: dict[str, list[int]]) -> None:
    for name, v in scalars.items():
        tr.absorb(name, v.to_bytes(32, "big"))
    for v in d_vals:
        tr.absorb("d", v.to_bytes(32, "big"))
    for name, coeffs in gammas.items():
        tr.absorb("gamma_" + name, b"".join(c.to_bytes(32, "big") for c in coeffs))


def prove_batched(srs: SRS, cs: ConstraintSystem, core: Witness, bundles: Sequence[DataSourceBundle],
                  circuit: CircuitCommitments | None = None, sk: SKPolys | None = None) -> SonicProof:
    if not bundles:
        raise LayoutError("the batched variant needs at least one data source")
    _check_location(bundles)
    p = srs.curve.p
    rnd, _ = _run_rounds(srs, cs, core, bundles, circuit, sk)
    tr = rnd.transcript
    sets = _family_sets(rnd.y, rnd.z, p)
    names = [name for name, _ in BATCH_FAMILY]
    gamma_polys = {}
    gammas = {}
    for name, scalar_names in BATCH_FAMILY:
        pts = sets[name]
        gamma = lagrange_interpolate([(s, rnd.scalars[sn]) for s, sn in zip(pts, scalar_names)], p)
        gamma_polys[name] = gamma
        gammas[name] = _dense(gamma, len(pts))
    d_vals, d_proofs = _data_openings(bundles, rnd.z)
    _absorb_claims(tr, rnd.scalars, d_vals, gammas)
    beta = tr.challenge("beta")
    opening = rkzgb_open_quotient(
        srs, [rnd.polys[n] for n in names], [sets[n] for n in names], beta, [gamma_polys[n] for n in names]
    )
    tr.absorb("pi1", opening.pi1.to_bytes())
    mu = tr.challenge_avoiding("mu", union_points(list(sets.values()), p))
    batch = opening.finish(mu)
    return SonicProof(
        "ev", srs.curve, rnd.points, rnd.scalars,
        data_commitments=[b.commitment.point for b in bundles],
        data_openings=d_vals,
        data_proofs=d_proofs,
        gammas=gammas,
        batch=batch,
        signatures=[b.signature for b in bundles],
        source_pks=_pk_list(bundles),
    )


def _check_location(bundles: Sequence[DataSourceBundle]) -> None:
    tags = {b.H.H for b in bundles}
    if len(tags) != 1:
        raise BundleError("data sources disagree on the location tag")


# ---------------------------------------------------------------------------
# verifier


@dataclass
class _Replayed:
    transcript: Transcript
    y: int
    z: int


def _replay(proof: SonicProof, circuit: CircuitCommitments, p: int, trace: VerifyTrace) -> _Replayed:
    tr = Transcript(p, trace=trace)
    tr.absorb("S_Y", circuit.S_Y.to_bytes())
    tr.absorb("K", circuit.K.to_bytes())
    for D in proof.data_commitments:
        tr.absorb("D", D.to_bytes())
    if "R_tilde" in proof.points:
        tr.absorb("R_tilde", proof.points["R_tilde"].to_bytes())
    tr.absorb("R", proof.points["R"].to_bytes())
    y = tr.challenge_avoiding("y", (0, 1))
    tr.absorb("T", proof.points["T"].to_bytes())
    tr.absorb("S_X", proof.points["S_X"].to_bytes())
    z = tr.challenge_avoiding("z", (0, 1))
    return _Replayed(tr, y, z)


def _check_shape(proof: SonicProof, circuit: CircuitCommitments, variant: str, J: int) -> bool:
    if proof.variant != variant or proof.curve.name != circuit.S_Y.curve.name:
        return False
    if proof.points.get("S_Y") != circuit.S_Y or proof.points.get("K") != circuit.K:
        return False
    want_scalars = set(BASE_SCALARS) | ({"r_tilde"} if variant != "basic" else set())
    if set(proof.scalars) != want_scalars:
        return False
    if not (len(proof.data_commitments) == len(proof.data_openings) == len(proof.signatures) == J):
        return False
    if variant != "basic" and len(circuit.data_lengths) != J:
        return False
    if variant == "ev":
        return proof.batch is not None and len(proof.data_proofs) == J and not proof.opening_proofs
    return len(proof.data_proofs) == J and proof.batch is None


def _check_signatures(sources: Sequence[SourcePublic], H: LocationTag, proof: SonicProof, tr: VerifyTrace) -> bool:
    ok = True
    with tr.section("Others"):
        for src, D, sig in zip(sources, proof.data_commitments, proof.signatures):
            tr.add("ecrecover")
            tr.hash(32 + len(D.to_bytes()))
            ok = ok and verify_data_bundle(src.pk, H, D.to_bytes(), sig)
    return ok


def _scalar_equations(proof: SonicProof, circuit: CircuitCommitments, z: int, p: int, tr: VerifyTrace) -> bool:
    s = proof.scalars
    with tr.section("Checking Other Equations"):
        tr.add("mulmod", 1)
        tr.add("addmod", 2)
        tr.add("compare", 2)
        ok = s["t"] == (s["r1"] * (s["r2"] + s["s"]) - s["k"]) % p and s["s1"] == s["s2"]
        if proof.variant != "basic":
            acc = s["r_tilde"]
            for d, off in zip(proof.data_openings, circuit.offsets()):
                tr.add("modexp")
                tr.add("mulmod")
                tr.add("addmod")
                acc = (acc + d * pow(z, off, p)) % p
            tr.add("compare")
            ok = ok and acc == s["r1"]
    return ok


def _record_input(proof: SonicProof, sources: Sequence[SourcePublic], tr: VerifyTrace, srs_in_calldata: bool) -> None:
    with tr.section("Processing Input"):
        tr.calldata(proof.to_bytes())
    # verifier SRS subsets: the main one plus one per data source
    words = 14 * (1 + len(sources))
    if srs_in_calldata:
        with tr.section("Processing Input"):
            tr.add("calldata_nonzero_bytes", 32 * words)
    else:
        with tr.section("Others"):
            tr.add("sload_words", words)


def _verify_individual(vk: SRS | VerifierKey, circuit: CircuitCommitments, proof: SonicProof,
                       sources: Sequence[SourcePublic], H: LocationTag | None, variant: str,
                       trace: VerifyTrace | None, sk: SKPolys | None, srs_in_calldata: bool) -> bool:
    tr = ensure(trace)
    p = vk.curve.p
    J = len(sources)
    try:
        if not _check_shape(proof, circuit, variant, J):
            return False
        _record_input(proof, sources, tr, srs_in_calldata)
        with tr.section("Processing Input"):
            rep = _replay(proof, circuit, p, tr)
        y, z = rep.y, rep.z
        if J and not _check_signatures(sources, H, proof, tr):
            return False
        if not _scalar_equations(proof, circuit, z, p, tr):
            return False
        if sk is not None and proof.scalars["s"] != sk.eval_s(z, y):
            return False
        where = _opening_points(y, z)
        checks = []
        for name in BASE_SCALARS + (("r_tilde",) if variant == "dat" else ()):
            poly_name, point = where[name]
            pi_name = "pi_rt" if name == "r_tilde" else "pi_" + name
            checks.append((proof.points[poly_name], point, proof.scalars[name], proof.opening_proofs[pi_name], vk))
        for src, D, d, pi in zip(sources, proof.data_commitments, proof.data_openings, proof.data_proofs):
            checks.append((D, z, d, pi, src.vk))
        with tr.section(f"Checking {len(checks)} Pairing Equations"):
            for F, point, v, pi, key in checks:
                if not rkzg_verify(key, _as_commitment(F), point, v, OpeningProof(pi), tr):
                    return False
        return True
    except (KeyError, ValueError, TypeError, AttributeError, ZeroDivisionError):
        return False


def _as_commitment(pt: G1Point) -> Commitment:
    return Commitment(pt, "rkzg")


def verify_basic(vk: SRS | VerifierKey, circuit: CircuitCommitments, proof: SonicProof, trace: VerifyTrace | None = None,
                 sk: SKPolys | None = None, srs_in_calldata: bool = False) -> bool:
    """Seven opening checks plus t = r1 (r2 + s) - k and s1 = s2.

    Passing ``sk`` additionally recomputes s[z, y] from the constraint
    system instead of trusting the outsourced S_X.
    """
    return _verify_individual(vk, circuit, proof, (), None, "basic", trace, sk, srs_in_calldata)


def verify_with_data(vk: SRS | VerifierKey, circuit: CircuitCommitments, sources: Sequence[SourcePublic], H: LocationTag,
                     proof: SonicProof, trace: VerifyTrace | None = None, sk: SKPolys | None = None,
                     srs_in_calldata: bool = False) -> bool:
    return _verify_individual(vk, circuit, proof, sources, H, "dat", trace, sk, srs_in_calldata)


def verify_batched(vk: SRS | VerifierKey, circuit: CircuitCommitments, sources: Sequence[SourcePublic], H: LocationTag,
                   proof: SonicProof, trace: VerifyTrace | None = None, sk: SKPolys | None = None,
                   srs_in_calldata: bool = False) -> bool:
    tr = ensure(trace)
    c = vk.curve
    p = c.p
    J = len(sources)
    try:
        if not _check_shape(proof, circuit, "ev", J):
            return False
        _record_input(proof, sources, tr, srs_in_calldata)
        with tr.section("Processing Input"):
            rep = _replay(proof, circuit, p, tr)
            t = rep.transcript
            _absorb_claims(t, proof.scalars, proof.data_openings, proof.gammas)
            beta = t.challenge("beta")
            sets = _family_sets(rep.y, rep.z, p)
            t.absorb("pi1", proof.batch.pi1.to_bytes())
            mu = t.challenge_avoiding("mu", union_points(list(sets.values()), p))
            t.absorb("pi2", proof.batch.pi2.to_bytes())
            for pi in proof.data_proofs:
                t.absorb("pi_d", pi.to_bytes())
            rhos = [t.challenge(f"rho[{j}]") for j in range(J)]
        if not _check_signatures(sources, H, proof, tr):
            return False
        if not _scalar_equations(proof, circuit, rep.z, p, tr):
            return False
        if sk is not None and proof.scalars["s"] != sk.eval_s(rep.z, rep.y):
            return False
        claims = []
        with tr.section("Checking Other Equations"):
            if set(proof.gammas) != {name for name, _ in BATCH_FAMILY}:
                return False
            for name, scalar_names in BATCH_FAMILY:
                coeffs = proof.gammas[name]
                pts = sets[name]
                if len(coeffs) != len(pts):
                    return False
                gamma = LaurentPoly(dict(enumerate(coeffs)), p)
                for s, sn in zip(pts, scalar_names):
                    tr.add("mulmod", len(coeffs))
                    tr.add("addmod", len(coeffs))
                    tr.add("compare")
                    if gamma.eval(s) != proof.scalars[sn]:
                        return False
                claims.append(BatchOpeningClaim(_as_commitment(proof.points[name]), pts, gamma))
        pairs = rkzgb_terms(vk, claims, beta, mu, proof.batch, tr)
        with tr.section("Checking Single Pairing Equation"):
            for rho, src, D, d, pi in zip(rhos, sources, proof.data_commitments, proof.data_openings, proof.data_proofs):
                (a1, b1), (a2, b2), (a3, b3) = rkzg_check_pairs(src.vk, D, rep.z, d, pi)
                tr.add("g1_mul", 2 + 3)
                tr.add("g1_add", 1)
                pairs += [(a1 * rho, b1), (a2 * rho, b2), (a3 * rho, b3)]
            tr.pairing_equation(len(pairs))
            return c.pairing_check(pairs)
    except (KeyError, ValueError, TypeError, AttributeError, ZeroDivisionError, PolyError, CommitmentError):
        return False


def verify(vk: SRS | VerifierKey, circuit: CircuitCommitments, proof: SonicProof, sources: Sequence[SourcePublic] = (),
           H: LocationTag | None = None, trace: VerifyTrace | None = None, sk: SKPolys | None = None,
           srs_in_calldata: bool = False) -> bool:
    """Dispatch on the proof's variant tag."""
    if proof.variant == "basic":
        return verify_basic(vk, circuit, proof, trace, sk, srs_in_calldata)
    if H is None:
        return False
    fn = verify_with_data if proof.variant == "dat" else verify_batched
    return fn(vk, circuit, sources, H, proof, trace, sk, srs_in_calldata)
