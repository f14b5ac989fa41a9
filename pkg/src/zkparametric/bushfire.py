"""Bushfire claims: fixed-point dNBR, the claim circuit and a plain oracle.

For every pixel and epoch the circuit proves ``scale (r - s) = n (r + s) + theta``
where ``n`` is the scaled NBR and ``theta`` the rounding residue; the residues
are bounded in aggregate by ``sum theta^2 < theta_max``.  A pixel counts as
burnt (indicator 1) when ``n_pre - n_post >= kappa``, shown by decomposing
``i (n_pre - n_post - kappa)`` into scaled bits ``e_j in {0, 2^(j-1)}``.  The
claim holds when ``G = sum i - epsilon`` is non-negative, again by a bit
decomposition.

Gate layout (1-based, n pixels, k bits)::

    A  NBR products      2n   (n, r+s, n(r+s)), pre then post
    C  indicators         n   (i, i-1, 0)
    E  linkage            n   (i, n_pre-n_post-kappa, sum_j e_ij)
    H  residue squares   2n   (theta, theta, theta^2), pre then post
    D  pixel bits        nk   (e, e-2^(j-1), 0)
    F  theta slack bits   k
    G  claim-margin bits  k
    data                 4n   r_pre, s_pre, r_post, s_post (b = c = 0)

for ``10n + (n+2)k`` gates and ``(11+2k)n + 4k + 2`` linear constraints.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from .algebra import keccak256
from .scs import ConstraintSystem, Witness


class BushfireError(ValueError):
    pass


class RasterError(BushfireError):
    pass


class ClaimRejected(BushfireError):
    """The claim conditions do not hold, so no witness exists."""


# ---------------------------------------------------------------------------
# parameters and rasters


@dataclass(frozen=True)
class FixedPointParams:
    scale: int = 1000
    kappa_scaled: int = 660
    epsilon: int = 1
    k_bits: int = 20
    theta_max: int | None = None  # defaults to 2^k_bits

    def __post_init__(self) -> None:
        if self.theta_max is None:
            object.__setattr__(self, "theta_max", 1 << self.k_bits)
        if self.scale < 1:
            raise BushfireError("scale must be positive")
        if not 0 < self.kappa_scaled < 2 * self.scale:
            raise BushfireError("kappa_scaled must lie in (0, 2*scale)")
        if 2 * self.scale >= 1 << self.k_bits:
            raise BushfireError(f"k_bits={self.k_bits} cannot hold 2*scale={2 * self.scale}")
        if not 0 < self.theta_max <= 1 << self.k_bits:
            raise BushfireError("theta_max must lie in (0, 2^k_bits]")
        if self.epsilon < 0:
            raise BushfireError("epsilon must be non-negative")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> FixedPointParams:
        return cls(**{k: int(v) for k, v in data.items() if k in cls.__dataclass_fields__})

    def digest(self) -> bytes:
        return keccak256(json.dumps(self.to_json(), sort_keys=True).encode())


@dataclass(frozen=True)
class RasterPair:
    width: int
    height: int
    pre_nir: tuple[int, ...]
    pre_swir: tuple[int, ...]
    post_nir: tuple[int, ...]
    post_swir: tuple[int, ...]

    def __post_init__(self) -> None:
        n = self.width * self.height
        if self.width < 1 or self.height < 1:
            raise RasterError("raster must have at least one pixel")
        bands = (self.pre_nir, self.pre_swir, self.post_nir, self.post_swir)
        if any(len(b) != n for b in bands):
            raise RasterError(f"every band needs {n} = {self.width}x{self.height} values")
        if any(v < 0 for b in bands for v in b):
            raise RasterError("reflectance values must be non-negative")
        for i in range(n):
            if self.pre_nir[i] + self.pre_swir[i] == 0 or self.post_nir[i] + self.post_swir[i] == 0:
                raise RasterError(f"pixel {i}: NIR + SWIR is zero, NBR undefined")

    @property
    def n(self) -> int:
        return self.width * self.height

    def rows(self) -> list[tuple[int, int, int, int]]:
        return list(zip(self.pre_nir, self.pre_swir, self.post_nir, self.post_swir))

    @classmethod
    def from_rows(cls, width: int, height: int, rows: Sequence[Sequence[int]]) -> RasterPair:
        cols = list(zip(*rows)) if rows else [(), (), (), ()]
        return cls(width, height, *(tuple(int(v) for v in c) for c in cols))


_INT_TOKEN = re.compile(r"-?\d+")


def _read_header(lines: list[str], path) -> tuple[int, int, list[str]]:
    body = [ln for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    if body and body[0].replace(" ", "").lower() == "width,height":
        body = body[1:]
    if not body:
        raise RasterError(f"{path}: empty raster file")
    head = [t.strip() for t in body[0].split(",")]
    try:
        width, height = int(head[0]), int(head[1])
    except (ValueError, IndexError):
        raise RasterError(f"{path}: first line must be 'width,height'") from None
    if len(head) != 2:
        raise RasterError(f"{path}: first line must be 'width,height'")
    return width, height, body[1:]


def load_raster(path: str | Path) -> RasterPair:
    """Combined format: 'W,H' then W*H rows of pre_nir,pre_swir,post_nir,post_swir."""
    width, height, body = _read_header(Path(path).read_text().splitlines(), path)
    rows = []
    for line_no, row in enumerate(csv.reader(body), 2):
        try:
            vals = [int(v) for v in row]
        except ValueError:
            raise RasterError(f"{path}:{line_no}: non-integer value") from None
        if len(vals) != 4:
            raise RasterError(f"{path}:{line_no}: expected 4 values, got {len(vals)}")
        rows.append(vals)
    if len(rows) != width * height:
        raise RasterError(f"{path}: {len(rows)} rows for a {width}x{height} raster")
    return RasterPair.from_rows(width, height, rows)


def load_band(path: str | Path) -> tuple[int, int, list[int]]:
    """One band per file: 'W,H' then W*H integers in row-major order."""
    width, height, body = _read_header(Path(path).read_text().splitlines(), path)
    text = ",".join(body)
    tokens = [t for t in re.split(r"[,\s]+", text) if t]
    if any(not _INT_TOKEN.fullmatch(t) for t in tokens):
        raise RasterError(f"{path}: non-integer value")
    vals = [int(t) for t in tokens]
    if len(vals) != width * height:
        raise RasterError(f"{path}: {len(vals)} values for a {width}x{height} band")
    return width, height, vals


def load_raster_bands(pre_nir, pre_swir, post_nir, post_swir) -> RasterPair:
    bands = [load_band(p) for p in (pre_nir, pre_swir, post_nir, post_swir)]
    dims = {(w, h) for w, h, _ in bands}
    if len(dims) != 1:
        raise RasterError("band files disagree on dimensions")
    (w, h), = dims
    return RasterPair(w, h, *(tuple(v) for _, _, v in bands))


def load_raster_files(paths: Sequence[str | Path]) -> RasterPair:
    if len(paths) == 1:
        return load_raster(paths[0])
    if len(paths) == 4:
        return load_raster_bands(*paths)
    raise RasterError("give one combined raster file or four band files")


def write_raster(path: str | Path, raster: RasterPair) -> None:
    lines = ["width,height", f"{raster.width},{raster.height}"]
    lines += [",".join(map(str, row)) for row in raster.rows()]
    Path(path).write_text("\n".join(lines) + "\n")


# Digital Earth Australia Sentinel-2 ARD measurement names for the four bands;
# a GeoTIFF reader would clip each band to the insured polygon, flatten it in
# row-major order and pass the arrays to RasterPair.
DEA_BANDS = {
    "pre_nir": "nbart_nir_1",
    "pre_swir": "nbart_swir_3",
    "post_nir": "nbart_nir_1",
    "post_swir": "nbart_swir_3",
}


# ---------------------------------------------------------------------------
# fixed-point arithmetic and the oracle


def compute_nbr_fixed(r: int, s: int, scale: int) -> tuple[int, int]:
    """(n, theta) with scale (r - s) = n (r + s) + theta, n rounded half away from zero."""
    den = r + s
    if den <= 0:
        raise BushfireError("r + s must be positive")
    num = scale * (r - s)
    mag = (2 * abs(num) + den) // (2 * den)
    n = mag if num >= 0 else -mag
    return n, num - n * den


@dataclass(frozen=True)
class PixelTrace:
    n_pre: int
    theta_pre: int
    n_post: int
    theta_post: int
    dnbr: int
    indicator: int


@dataclass(frozen=True)
class ClaimOutcome:
    G: int
    valid: bool
    dnbr: list[int]
    indicators: list[int]
    theta_sq_sum: int
    representable: bool
    pixels: list[PixelTrace] = field(repr=False, default_factory=list)


def ground_truth_claim(raster: RasterPair, params: FixedPointParams) -> ClaimOutcome:
    """Plain integer evaluation of the claim; the reference for the circuit."""
    pixels = []
    for r_pre, s_pre, r_post, s_post in raster.rows():
        n_pre, th_pre = compute_nbr_fixed(r_pre, s_pre, params.scale)
        n_post, th_post = compute_nbr_fixed(r_post, s_post, params.scale)
        dnbr = n_pre - n_post
        pixels.append(PixelTrace(n_pre, th_pre, n_post, th_post, dnbr, int(dnbr >= params.kappa_scaled)))
    ind = [px.indicator for px in pixels]
    G = sum(ind) - params.epsilon
    theta_sq = sum(px.theta_pre ** 2 + px.theta_post ** 2 for px in pixels)
    representable = theta_sq <= params.theta_max - 1 and G < 1 << params.k_bits
    return ClaimOutcome(G, G >= 0 and representable, [px.dnbr for px in pixels], ind, theta_sq, representable, pixels)


# ---------------------------------------------------------------------------
# circuit


@dataclass(frozen=True)
class BushfireLayout:
    n: int
    k: int

    def A(self, i: int, post: bool) -> int:
        return i + (self.n if post else 0)

    def C(self, i: int) -> int:
        return 2 * self.n + i

    def E(self, i: int) -> int:
        return 3 * self.n + i

    def H(self, i: int, post: bool) -> int:
        return 4 * self.n + i + (self.n if post else 0)

    def D(self, i: int, j: int) -> int:
        return 6 * self.n + (i - 1) * self.k + j

    def F(self, j: int) -> int:
        return 6 * self.n + self.n * self.k + j

    def G(self, j: int) -> int:
        return 6 * self.n + self.n * self.k + self.k + j

    @property
    def N_core(self) -> int:
        return 6 * self.n + self.n * self.k + 2 * self.k

    def data(self, i: int, band: int) -> int:
        """band 0..3 = r_pre, s_pre, r_post, s_post."""
        return self.N_core + band * self.n + i

    @property
    def N(self) -> int:
        return self.N_core + 4 * self.n


def data_lengths(n: int, sources: int = 1) -> tuple[int, ...]:
    if sources == 1:
        return (4 * n,)
    if sources == 2:
        return (2 * n, 2 * n)
    raise BushfireError("supported data splits: 1 source (all bands) or 2 (pre, post)")


def _bit_constraints(cs: ConstraintSystem, gate: int, j: int) -> None:
    cs.add_linear(u={gate: 1}, v={gate: -1}, k=1 << (j - 1))
    cs.add_linear(w={gate: 1})


def build_bushfire_cs(n_pixels: int, params: FixedPointParams, p: int) -> ConstraintSystem:
    if n_pixels < 1:
        raise BushfireError("need at least one pixel")
    L = BushfireLayout(n_pixels, params.k_bits)
    k, S = params.k_bits, params.scale
    cs = ConstraintSystem(p)
    cs.add_multiplication(L.N)
    for i in range(1, n_pixels + 1):
        for post in (False, True):
            A, H = L.A(i, post), L.H(i, post)
            r, s = L.data(i, 2 if post else 0), L.data(i, 3 if post else 1)
            cs.add_linear(u={r: -1, s: -1}, v={A: 1})
            cs.add_linear(u={r: S, s: -S, H: -1}, w={A: -1})
            cs.add_linear(u={H: -1}, v={H: 1})
        C, E = L.C(i), L.E(i)
        cs.add_linear(u={C: 1}, v={C: -1}, k=1)
        cs.add_linear(w={C: 1})
        cs.add_linear(u={E: 1, C: -1})
        cs.add_linear(u={L.A(i, False): -1, L.A(i, True): 1}, v={E: 1}, k=-params.kappa_scaled)
        cs.add_linear(u={L.D(i, j): -1 for j in range(1, k + 1)}, w={E: 1})
        for j in range(1, k + 1):
            _bit_constraints(cs, L.D(i, j), j)
    for j in range(1, k + 1):
        _bit_constraints(cs, L.F(j), j)
        _bit_constraints(cs, L.G(j), j)
    cs.add_linear(u={**{L.C(i): 1 for i in range(1, n_pixels + 1)}, **{L.G(j): -1 for j in range(1, k + 1)}},
                  k=params.epsilon)
    squares = {L.H(i, post): 1 for i in range(1, n_pixels + 1) for post in (False, True)}
    cs.add_linear(u={L.F(j): 1 for j in range(1, k + 1)}, w=squares, k=params.theta_max - 1)
    return cs


def constraint_counts(n_pixels: int, params: FixedPointParams) -> tuple[int, int]:
    """(linear, multiplicative) counts, without building the system."""
    k = params.k_bits
    return (11 + 2 * k) * n_pixels + 4 * k + 2, (10 + k) * n_pixels + 2 * k


def scaled_bits(value: int, k: int) -> list[int]:
    if not 0 <= value < 1 << k:
        raise BushfireError(f"{value} does not fit in {k} bits")
    return [value & (1 << j) for j in range(k)]


def bushfire_data(raster: RasterPair, sources: int = 1) -> list[list[int]]:
    """Data vectors per source, in data-slot order."""
    flat = list(raster.pre_nir) + list(raster.pre_swir) + list(raster.post_nir) + list(raster.post_swir)
    if sources == 1:
        return [flat]
    if sources == 2:
        half = 2 * raster.n
        return [flat[:half], flat[half:]]
    raise BushfireError("supported data splits: 1 source (all bands) or 2 (pre, post)")


def build_bushfire_witness(raster: RasterPair, params: FixedPointParams, p: int,
                           sources: int = 1, indicators: Sequence[int] | None = None) -> tuple[Witness, list[list[int]]]:
    """Core witness and per-source data vectors for a claim.

    ``indicators`` overrides the honest burnt flags; this is only useful for
    building deliberately bad witnesses in tests.
    """
    outcome = ground_truth_claim(raster, params)
    n, k = raster.n, params.k_bits
    L = BushfireLayout(n, k)
    a = [0] * (L.N_core + 1)
    b = [0] * (L.N_core + 1)
    c = [0] * (L.N_core + 1)
    ind = list(indicators) if indicators is not None else outcome.indicators
    theta_sq = 0
    for i, (px, row) in enumerate(zip(outcome.pixels, raster.rows()), 1):
        r_pre, s_pre, r_post, s_post = row
        for post, nv, th, den in ((False, px.n_pre, px.theta_pre, r_pre + s_pre),
                                  (True, px.n_post, px.theta_post, r_post + s_post)):
            A, H = L.A(i, post), L.H(i, post)
            a[A], b[A], c[A] = nv, den, nv * den
            a[H], b[H], c[H] = th, th, th * th
            theta_sq += th * th
        flag = ind[i - 1]
        C, E = L.C(i), L.E(i)
        a[C], b[C], c[C] = flag, flag - 1, 0
        margin = px.n_pre - px.n_post - params.kappa_scaled
        a[E], b[E], c[E] = flag, margin, flag * margin
        for j, e in enumerate(scaled_bits(flag * margin, k), 1):
            D = L.D(i, j)
            a[D], b[D], c[D] = e, e - (1 << (j - 1)), 0
    slack = params.theta_max - 1 - theta_sq
    if slack < 0:
        raise ClaimRejected(f"theta_max exceeded: sum of squared residues {theta_sq} >= {params.theta_max}")
    G = sum(ind) - params.epsilon
    if G < 0:
        raise ClaimRejected(f"claim conditions not satisfied: {sum(ind)} burnt pixels, {params.epsilon} required")
    for gate, value in [(L.F, slack), (L.G, G)]:
        for j, e in enumerate(scaled_bits(value, k), 1):
            a[gate(j)], b[gate(j)], c[gate(j)] = e, e - (1 << (j - 1)), 0
    core = Witness.of(a[1:], b[1:], c[1:], p)
    return core, bushfire_data(raster, sources)
