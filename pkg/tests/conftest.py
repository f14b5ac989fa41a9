import pytest

from zkparametric.algebra import DeterministicRng, get_curve
from zkparametric.pcs import setup


@pytest.fixture(scope="session")
def curve():
    return get_curve()


@pytest.fixture(scope="session")
def p(curve):
    return curve.p


@pytest.fixture(scope="session")
def srs64(curve):
    return setup(64, DeterministicRng("test-srs-64"), curve)


@pytest.fixture(scope="session")
def srs256(curve):
    return setup(256, DeterministicRng("test-srs-256"), curve)


@pytest.fixture(scope="session")
def srs_big(curve):
    # enough for the bushfire circuit at 32 pixels
    return setup(4096, DeterministicRng("test-srs-4096"), curve)


@pytest.fixture
def rng(request):
    return DeterministicRng(request.node.name)


@pytest.fixture(scope="session")
def bushfire_case(srs_big):
    """A valid 4-pixel claim proved under both data-aware variants."""
    from types import SimpleNamespace

    from zkparametric.bushfire import FixedPointParams, RasterPair, build_bushfire_cs, build_bushfire_witness
    from zkparametric.scs import SKPolys
    from zkparametric.sigs import keygen, location_tag
    from zkparametric.sonic import commit_circuit, make_bundle, prove_batched, prove_with_data

    p = srs_big.curve.p
    params = FixedPointParams()
    raster = RasterPair.from_rows(2, 2, [(100, 20, 20, 100), (50, 50, 50, 50), (300, 100, 100, 300),
                                         (80, 20, 30, 20)])
    cs = build_bushfire_cs(4, params, p)
    sk = SKPolys(cs)
    H = location_tag("-33.86", "151.2", [("pre", "2019-11-01"), ("post", "2020-02-01")])
    key = keygen(DeterministicRng("bushfire provider"))
    core, data = build_bushfire_witness(raster, params, p)
    bundles = [make_bundle(key, srs_big, H, d) for d in data]
    circuit = commit_circuit(srs_big, cs, [b.m for b in bundles], sk)
    return SimpleNamespace(
        srs=srs_big, params=params, raster=raster, cs=cs, sk=sk, H=H, key=key, core=core, bundles=bundles,
        circuit=circuit, sources=[b.public() for b in bundles],
        ev=prove_batched(srs_big, cs, core, bundles, circuit, sk),
        dat=prove_with_data(srs_big, cs, core, bundles, circuit, sk),
    )


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
