import pytest

from zkparametric.algebra import DeterministicRng
from zkparametric.pcs import setup
from zkparametric.scs import (
    UnsatisfiedError,
    Witness,
    binary_check_system,
    binary_check_witness,
    range_check_system,
    range_check_witness,
)
from zkparametric.sigs import keygen, location_tag
from zkparametric.sonic import (
    BundleError,
    LayoutError,
    SonicProof,
    Transcript,
    commit_circuit,
    make_bundle,
    prove_basic,
    prove_batched,
    prove_with_data,
    verify,
    verify_basic,
    verify_batched,
    verify_with_data,
)
from zkparametric.trace import VerifyTrace

from helpers import attach_data, mutate, toy_system

H = location_tag("-33.86", "151.2", [("pre", "2019-11-01"), ("post", "2020-02-01")])
H_OTHER = location_tag("-35.28", "149.13")


@pytest.fixture(scope="module")
def key():
    return keygen(DeterministicRng("provider"))


def test_transcript(p):
    t = Transcript(p)
    t.absorb("R", b"commitment")
    y1, y2 = t.challenge("y"), t.challenge("y")
    assert y1 == y2
    assert t.challenge("z") != y1
    u = Transcript(p)
    u.absorb("R", b"other")
    assert u.challenge("y") != y1
    assert Transcript.replay(p, t.log).challenge("y") == y1
    t.absorb("T", b"x")
    assert t.challenge("y") != y1
    assert t.challenge_avoiding("z", [t.challenge("z")]) != t.challenge("z")


@pytest.mark.parametrize("w", [0, 1])
def test_binary_check_basic(srs64, w, p):
    cs = binary_check_system(w, p)
    proof = prove_basic(srs64, cs, binary_check_witness(w, p))
    circuit = commit_circuit(srs64, cs)
    trace = VerifyTrace()
    assert verify_basic(srs64.verifier_key(), circuit, proof, trace)
    assert trace.pairing_equations == 7
    assert verify_basic(srs64, circuit, proof, sk=None)


def test_binary_check_forged_witness(srs64, p):
    cs = binary_check_system(1, p)
    with pytest.raises(UnsatisfiedError):
        prove_basic(srs64, cs, Witness.of([1], [1], [0], p))


def test_range_check_basic(srs64, p):
    cs = range_check_system(5, 3, p)
    proof = prove_basic(srs64, cs, range_check_witness(5, 3, p))
    assert verify_basic(srs64, commit_circuit(srs64, cs), proof)


def test_basic_scalar_and_commitment_mutations(srs64, p, curve):
    cs = range_check_system(5, 3, p)
    circuit = commit_circuit(srs64, cs)
    proof = prove_basic(srs64, cs, range_check_witness(5, 3, p))
    for name in ("r1", "r2", "t", "k", "s", "s1", "s2"):
        assert not verify_basic(srs64, circuit, proof.with_element(("scalars", name), proof.scalars[name] + 1))
    bad_T = proof.with_element(("points", "T"), proof.points["T"] + curve.g)
    assert not verify_basic(srs64, circuit, bad_T)


def test_basic_rejects_other_circuit(srs64, p):
    proof = prove_basic(srs64, range_check_system(5, 3, p), range_check_witness(5, 3, p))
    assert not verify_basic(srs64, commit_circuit(srs64, range_check_system(6, 3, p)), proof)


def _sources(bundles):
    return [b.public() for b in bundles]


@pytest.mark.parametrize("prover,verifier,equations", [
    (prove_with_data, verify_with_data, 9),
    (prove_batched, verify_batched, 1),
])
def test_toy_with_data(srs64, key, p, prover, verifier, equations):
    cs, core, d = toy_system(p)
    bundle = make_bundle(key, srs64, H, d)
    circuit = commit_circuit(srs64, cs, [4])
    proof = prover(srs64, cs, core, [bundle], circuit)
    trace = VerifyTrace()
    assert verifier(srs64.verifier_key(), circuit, _sources([bundle]), H, proof, trace)
    assert trace.pairing_equations == equations
    assert not verifier(srs64, circuit, _sources([bundle]), H_OTHER, proof)
    assert verify(srs64, circuit, proof, _sources([bundle]), H)
    assert not verify(srs64, circuit, proof, _sources([bundle]), None)


def test_toy_wrong_witness_fails(srs64, key, p):
    cs, core, d = toy_system(p)
    bundle = make_bundle(key, srs64, H, [3, 4, 5, 7])  # (3+4)(5+7) != 77
    with pytest.raises(UnsatisfiedError):
        prove_batched(srs64, cs, core, [bundle])


def test_data_altered_after_signing(srs64, key, p):
    cs, core, d = toy_system(p)
    bundle = make_bundle(key, srs64, H, d)
    tampered = type(bundle)(bundle.source_id, (3, 5, 5, 6), bundle.srs, bundle.commitment, bundle.H,
                            bundle.signature, bundle.pk)
    with pytest.raises(BundleError):
        tampered.check()
    with pytest.raises(BundleError):
        prove_with_data(srs64, cs, core, [tampered])


def test_layout_errors(srs64, key, p):
    cs, core, d = toy_system(p)
    bundle = make_bundle(key, srs64, H, d)
    with pytest.raises(LayoutError):
        prove_batched(srs64, cs, core, [])
    with pytest.raises(LayoutError):
        prove_batched(srs64, cs, core, [bundle], commit_circuit(srs64, cs, [3]))
    with pytest.raises(LayoutError):
        commit_circuit(setup(2, DeterministicRng(0)), cs)


def test_two_sources_distinct_srs(srs64, srs256, p):
    cs, core, d = toy_system(p)
    k1, k2 = keygen(DeterministicRng("k1")), keygen(DeterministicRng("k2"))
    b1 = make_bundle(k1, srs64, H, d[:2], "pre")
    b2 = make_bundle(k2, srs256, H, d[2:], "post")
    circuit = commit_circuit(srs64, cs, [2, 2])
    sources = _sources([b1, b2])
    swapped = [type(s)(s.source_id, s.pk, o.vk, s.m) for s, o in zip(sources, sources[::-1])]
    for prover, verifier in ((prove_with_data, verify_with_data), (prove_batched, verify_batched)):
        proof = prover(srs64, cs, core, [b1, b2], circuit)
        assert verifier(srs64, circuit, sources, H, proof)
        assert not verifier(srs64, circuit, swapped, H, proof)
        assert not verifier(srs64, circuit, sources[::-1], H, proof)


def test_mixed_locations_refused(srs64, key, p):
    cs, core, d = toy_system(p)
    b1 = make_bundle(key, srs64, H, d[:2], "pre")
    b2 = make_bundle(key, srs64, H_OTHER, d[2:], "post")
    with pytest.raises(BundleError):
        prove_batched(srs64, cs, core, [b1, b2])


@pytest.mark.parametrize("make", ["binary", "range"])
def test_examples_under_every_variant(srs64, key, p, make):
    if make == "binary":
        cs, wit = binary_check_system(1, p), binary_check_witness(1, p)
    else:
        cs, wit = range_check_system(5, 3, p), range_check_witness(5, 3, p)
    ext, core, values = attach_data(cs, wit, gate=1)
    bundle = make_bundle(key, srs64, H, values)
    circuit = commit_circuit(srs64, ext, [len(values)])
    for prover in (prove_with_data, prove_batched):
        proof = prover(srs64, ext, core, [bundle], circuit)
        assert verify(srs64, circuit, proof, _sources([bundle]), H)


def sweep(proof, accept, curve):
    false_accepts = []
    for path, value in proof.elements():
        for j in (1, 2):
            if accept(proof.with_element(path, mutate(value, curve, j))):
                false_accepts.append((path, j))
    return false_accepts


def test_mutation_sweep_every_variant(srs64, key, p, curve):
    cs, core, d = toy_system(p)
    bundle = make_bundle(key, srs64, H, d)
    circuit = commit_circuit(srs64, cs, [4])
    sources = _sources([bundle])
    basic_cs = range_check_system(5, 3, p)
    basic_circuit = commit_circuit(srs64, basic_cs)
    basic = prove_basic(srs64, basic_cs, range_check_witness(5, 3, p), basic_circuit)
    assert sweep(basic, lambda pr: verify_basic(srs64, basic_circuit, pr), curve) == []
    for prover in (prove_with_data, prove_batched):
        proof = prover(srs64, cs, core, [bundle], circuit)
        assert sweep(proof, lambda pr: verify(srs64, circuit, pr, sources, H), curve) == []


def test_variant_confusion_rejected(srs64, key, p):
    cs, core, d = toy_system(p)
    bundle = make_bundle(key, srs64, H, d)
    circuit = commit_circuit(srs64, cs, [4])
    dat = prove_with_data(srs64, cs, core, [bundle], circuit)
    dat.variant = "ev"
    assert not verify(srs64, circuit, dat, _sources([bundle]), H)


def test_sk_recomputation(srs64, key, p):
    from zkparametric.scs import SKPolys

    cs, core, d = toy_system(p)
    bundle = make_bundle(key, srs64, H, d)
    circuit = commit_circuit(srs64, cs, [4])
    proof = prove_batched(srs64, cs, core, [bundle], circuit)
    assert verify_batched(srs64, circuit, _sources([bundle]), H, proof, sk=SKPolys(cs))


def test_determinism_and_json(srs64, key, p):
    cs, core, d = toy_system(p)
    bundle = make_bundle(key, srs64, H, d)
    a = prove_batched(srs64, cs, core, [bundle])
    b = prove_batched(srs64, cs, core, [bundle])
    assert a.to_bytes() == b.to_bytes()
    again = SonicProof.from_json(a.to_json())
    assert again.to_bytes() == a.to_bytes()
    assert verify(srs64, commit_circuit(srs64, cs, [4]), again, _sources([bundle]), H)


def test_proof_size_constant_in_circuit_size(srs256, key, p):
    sizes = set()
    for w, k in ((5, 3), (200, 8), (3000, 12)):
        cs, wit = range_check_system(w, k, p), range_check_witness(w, k, p)
        ext, core, values = attach_data(cs, wit, gate=1, m=4)
        bundle = make_bundle(key, srs256, H, values)
        proof = prove_batched(srs256, ext, core, [bundle])
        sizes.add((len(proof.to_bytes()), proof.uint256_count()))
    assert len(sizes) == 1
