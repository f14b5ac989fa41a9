"""Command-line pipelines: setup, data commitment, policies, proving, verification, claims, bench.

Exit codes: 0 success or accepted proof, 1 usage or IO problem, 2 domain
rejection (unsatisfied claim, broken data binding, failed verification).
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
import tracemalloc
from pathlib import Path

from . import __version__
from .algebra import DeterministicRng, to_hex
from .bushfire import (
    BushfireError,
    ClaimRejected,
    FixedPointParams,
    RasterPair,
    build_bushfire_cs,
    build_bushfire_witness,
    constraint_counts,
    data_lengths,
    ground_truth_claim,
    load_raster_files,
)
from .insurance import (
    MODES,
    GasCostModel,
    GasReport,
    InsuranceChain,
    InsuranceError,
    Ledger,
    PolicyDraft,
    estimate_gas,
    load_scenario,
    run_scenario,
)
from .pcs import SRS, CommitmentError, setup
from .report import gas_rows, plot_bench, plot_gas, write_csv
from .scs import SKPolys, UnsatisfiedError
from .sigs import KeyPair, SignatureError, keygen, parse_location
from .sonic import (
    BundleError,
    DataSourceBundle,
    ProofError,
    SonicProof,
    SourcePublic,
    commit_circuit,
    make_bundle,
    prove_batched,
    prove_with_data,
    verify_batched,
    verify_with_data,
)
from .trace import VerifyTrace

FILE_VERSION = 1
WORKSPACE_DIRS = ("srs", "keys", "policies", "data", "proofs", "reports")


class UsageError(Exception):
    pass


class Rejected(Exception):
    pass


# ---------------------------------------------------------------------------
# file helpers


def _out_path(args, path: str | Path) -> Path:
    path = Path(path)
    if not path.is_absolute():
        path = Path(args.workspace) / path
    if path.exists() and not args.force:
        raise UsageError(f"{path} exists; pass --force to overwrite")
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _in_path(args, path: str | Path) -> Path:
    path = Path(path)
    if not path.is_absolute() and not path.exists():
        path = Path(args.workspace) / path
    return path


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n")


def _read_json(path: Path, kind: str) -> dict:
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict) or "version" not in data:
        raise UsageError(f"{path}: {kind} file lacks a version field")
    return data


def _emit(args, payload: dict, text: str) -> None:
    print(json.dumps(payload, indent=2, ensure_ascii=False) if args.json else text)


def _load_srs(args, path: str) -> SRS:
    return SRS.load(_in_path(args, path), check=not args.no_check)


def _params_from_args(args) -> FixedPointParams:
    if getattr(args, "params", None):
        data = _read_json(_in_path(args, args.params), "params")
        return FixedPointParams.from_json(data["params"])
    return FixedPointParams(args.scale, args.kappa, args.epsilon, args.k_bits, args.theta_max)


# ---------------------------------------------------------------------------
# commands


def cmd_setup(args) -> int:
    out = _out_path(args, args.out)
    vk_out = _out_path(args, str(args.out) + ".vk.json")
    rng = DeterministicRng(f"setup:{args.seed}".encode())
    t0 = time.perf_counter()
    srs = setup(args.degree, rng, args.curve)
    elapsed = time.perf_counter() - t0
    if not srs.self_check(rng.fork("check")):
        raise Rejected("SRS self-check failed")
    srs.save(out)
    srs.save_verifier_subset(vk_out)
    subset = srs.verifier_subset()
    _emit(args, {"srs": str(out), "verifier_subset": str(vk_out), "degree": srs.d, "curve": srs.curve.name,
                 "digest": to_hex(srs.digest()), "element_count": subset["element_count"], "seconds": elapsed},
          f"wrote {out} (d={srs.d}, {srs.curve.name}) and {vk_out} ({subset['element_count']} verifier elements)")
    return 0


def cmd_keygen(args) -> int:
    out = _out_path(args, args.out)
    key = keygen(DeterministicRng(f"keygen:{args.seed}:{args.out}".encode()))
    _write_json(out, {"version": FILE_VERSION, "sk": key.export_secret(), "pk": to_hex(key.pk)})
    _emit(args, {"key": str(out), "pk": to_hex(key.pk)}, f"wrote {out} (pk {to_hex(key.pk)[:18]}...)")
    return 0


def _load_key(args, path: str) -> KeyPair:
    data = _read_json(_in_path(args, path), "key")
    return KeyPair.from_secret(data["sk"])


def _bundle_values(raster: RasterPair, part: str) -> list[int]:
    pre = list(raster.pre_nir) + list(raster.pre_swir)
    post = list(raster.post_nir) + list(raster.post_swir)
    return {"all": pre + post, "pre": pre, "post": post}[part]


def cmd_data_commit(args) -> int:
    raster = load_raster_files([_in_path(args, p) for p in args.raster])
    srs = _load_srs(args, args.srs)
    key = _load_key(args, args.key)
    H = parse_location(args.location)
    bundle = make_bundle(key, srs, H, _bundle_values(raster, args.part), args.source_id)
    out = _out_path(args, args.out)
    pub_out = _out_path(args, str(args.out).removesuffix(".json") + ".public.json")
    data = bundle.to_json()
    data["part"] = args.part
    data["shape"] = [raster.width, raster.height]
    _write_json(out, data)
    _write_json(pub_out, {"version": FILE_VERSION, **bundle.public().to_json(), "part": args.part})
    _emit(args, {"bundle": str(out), "public": str(pub_out), "m": bundle.m, "H": H.hex(),
                 "srs_digest": to_hex(srs.digest())},
          f"wrote {out} ({bundle.m} values) and {pub_out}")
    return 0


def cmd_policy(args) -> int:
    params = _params_from_args(args)
    srs = _load_srs(args, args.srs)
    sources, parts = [], []
    for p in args.sources:
        data = _read_json(_in_path(args, p), "source")
        sources.append(SourcePublic.from_json(data))
        parts.append(data.get("part", "all"))
    if parts not in (["all"], ["pre", "post"]):
        raise UsageError("sources must be one 'all' provider or a 'pre' and a 'post' provider, in that order")
    lengths = data_lengths(args.n_pixels, len(sources))
    if tuple(s.m for s in sources) != lengths:
        raise UsageError(f"source lengths {[s.m for s in sources]} do not fit {args.n_pixels} pixels")
    cs = build_bushfire_cs(args.n_pixels, params, srs.curve.p)
    circuit = commit_circuit(srs, cs, lengths)
    draft = PolicyDraft(
        policy_id=args.id, insurer=args.insurer, insuree=args.insuree, premium=args.premium,
        sum_insured=args.sum_insured, H=parse_location(args.location), params_digest=params.digest(),
        expiry=args.expiry, circuit=circuit, sources=tuple(sources), verifier=args.verifier, mode=args.mode,
        srs_subset=srs.verifier_subset(),
    )
    out = _out_path(args, args.out)
    _write_json(out, {**draft.to_json(), "params": params.to_json(), "n_pixels": args.n_pixels})
    _emit(args, {"policy": str(out), "N": circuit.N, "Q": circuit.Q, "H": draft.H.hex()},
          f"wrote {out} (N={circuit.N}, Q={circuit.Q})")
    return 0


def _load_policy(args, path: str) -> tuple[PolicyDraft, dict]:
    data = _read_json(_in_path(args, path), "policy")
    return PolicyDraft.from_json(data), data


def _raster_from_bundles(bundles: list[DataSourceBundle], parts: list[str], n: int) -> RasterPair:
    flat = [v for b in bundles for v in b.values]
    if parts == ["all"] or parts == ["pre", "post"]:
        if len(flat) != 4 * n:
            raise UsageError(f"bundles carry {len(flat)} values, {4 * n} expected")
        return RasterPair(n, 1, *(tuple(flat[k * n:(k + 1) * n]) for k in range(4)))
    raise UsageError("bundles must be one 'all' bundle or a 'pre' and a 'post' bundle")


def cmd_prove(args) -> int:
    draft, pdata = _load_policy(args, args.policy)
    params = FixedPointParams.from_json(pdata["params"]) if not args.params else _params_from_args(args)
    if params.digest() != draft.params_digest:
        raise UsageError("parameters do not match the policy's parameter digest")
    variant = args.variant or draft.verifier
    if variant == "basic":
        raise UsageError("the bushfire circuit carries data sources; use variant dat or ev")
    srs = _load_srs(args, args.srs)
    raw = [_read_json(_in_path(args, p), "bundle") for p in args.bundles]
    entries = [(DataSourceBundle.from_json(r, _load_srs(args, s)), r.get("part", "all"))
               for r, s in zip(raw, _bundle_srs_paths(args, raw))]
    order = {(s.source_id, s.pk): k for k, s in enumerate(draft.sources)}
    if any((b.source_id, b.pk) not in order for b, _ in entries):
        raise UsageError("a bundle comes from a provider the policy does not list")
    entries.sort(key=lambda e: order[(e[0].source_id, e[0].pk)])
    bundles = [b for b, _ in entries]
    parts = [part for _, part in entries]
    for b in bundles:
        b.check()
        if b.H != draft.H:
            raise Rejected(f"source {b.source_id}: bundle is bound to a different location")
    n = int(pdata["n_pixels"])
    raster = _raster_from_bundles(bundles, parts, n)
    p = srs.curve.p
    cs = build_bushfire_cs(n, params, p)
    core, _ = build_bushfire_witness(raster, params, p, sources=len(bundles))
    sk = SKPolys(cs)
    circuit = commit_circuit(srs, cs, data_lengths(n, len(bundles)), sk)
    if (circuit.S_Y, circuit.K) != (draft.circuit.S_Y, draft.circuit.K):
        raise UsageError("the policy's circuit commitments were made under a different SRS or circuit")
    t0 = time.perf_counter()
    prover = prove_batched if variant == "ev" else prove_with_data
    proof = prover(srs, cs, core, bundles, circuit, sk)
    elapsed = time.perf_counter() - t0
    out = _out_path(args, args.out)
    _write_json(out, proof.to_json())
    size = len(proof.to_bytes())
    _emit(args, {"proof": str(out), "variant": variant, "bytes": size, "uint256_words": proof.uint256_count(),
                 "seconds": elapsed},
          f"wrote {out} ({variant}, {size} bytes, {proof.uint256_count()} words, {elapsed:.2f}s)")
    return 0


def _bundle_srs_paths(args, raw: list[dict]) -> list[str]:
    if args.bundle_srs:
        if len(args.bundle_srs) != len(raw):
            raise UsageError("give one --bundle-srs per bundle")
        return args.bundle_srs
    return [args.srs] * len(raw)


def _gas_model(args) -> GasCostModel:
    if getattr(args, "gas_model", None):
        data = _read_json(_in_path(args, args.gas_model), "gas model")
        return GasCostModel.from_json(data["costs"])
    return GasCostModel()


def cmd_verify(args) -> int:
    draft, _ = _load_policy(args, args.policy)
    proof = SonicProof.from_json(_read_json(_in_path(args, args.proof), "proof"))
    chain = InsuranceChain(Ledger(), _gas_model(args))
    handle = chain.deploy_global(draft.verifier, draft.srs_subset, draft.mode)
    policy = chain.deploy_individual(handle, draft)
    ok, gas = chain.verify_claim(policy, proof)
    if args.report_dir:
        base = Path(args.workspace) / args.report_dir if not Path(args.report_dir).is_absolute() else Path(args.report_dir)
        write_csv(base / "gas.csv", gas_rows({proof.variant: gas}))
        plot_gas({proof.variant: gas}, base / "gas.png")
    verdict = "accepted" if ok else "rejected"
    lines = [verdict] + [f"  {name:<34} {g:>10,}" for name, g in gas.rows] + [f"  {'Total':<34} {gas.total:>10,}"]
    _emit(args, {"accepted": ok, "gas": gas.to_json()}, "\n".join(lines))
    return 0 if ok else 2


def cmd_claim(args) -> int:
    scenario, base = load_scenario(_in_path(args, args.scenario))

    def policy_loader(path: str) -> PolicyDraft:
        return PolicyDraft.from_json(json.loads((base / path).read_text()))

    def proof_loader(path: str) -> SonicProof:
        return SonicProof.from_json(json.loads((base / path).read_text()))

    result = run_scenario(scenario, policy_loader, proof_loader, _gas_model(args))
    reports = {f"step {e['step']} ({'accepted' if e['accepted'] else 'rejected'})": _gas_from_json(e["gas"])
               for e in result["events"] if e.get("op") == "claim" and e["ok"]}
    if args.out:
        out = _out_path(args, args.out)
        _write_json(out, result)
        if reports:
            write_csv(out.with_suffix(".gas.csv"), gas_rows(reports))
            plot_gas(reports, out.with_suffix(".gas.png"))
    lines = []
    for e in result["events"]:
        status = "ok" if e["ok"] else f"failed: {e['error']}"
        extra = f" accepted={e['accepted']} gas={e['gas']['total']:,}" if e.get("op") == "claim" and e["ok"] else ""
        lines.append(f"[{e['step']}] {e['op']}: {status}{extra}")
    lines.append("balances: " + ", ".join(f"{k}={v}" for k, v in result["balances"].items()))
    _emit(args, result, "\n".join(lines))
    return 0


def _gas_from_json(data: dict) -> GasReport:
    rows = tuple((r["category"], r["gas"]) for r in data["rows"])
    return GasReport(rows, data["total"], data["pairing_equations"], data["pairings"], data.get("counts", {}))


def random_burnt_raster(n: int, rng: DeterministicRng, burnt_fraction: float = 0.5) -> RasterPair:
    """Synthetic raster where roughly ``burnt_fraction`` of pixels flip from healthy to burnt."""
    rows = []
    for _ in range(n):
        pre = (rng.randint(80, 120), rng.randint(15, 30))
        burnt = rng.randbelow(1000) < burnt_fraction * 1000
        post = (rng.randint(15, 30), rng.randint(80, 120)) if burnt else (pre[0] + rng.randint(-5, 5), pre[1])
        rows.append(pre + post)
    return RasterPair.from_rows(n, 1, rows)


def run_bench(sizes: list[int], repeats: int, seed: str, params: FixedPointParams, curve: str | None = None,
              srs: SRS | None = None) -> tuple[list[dict], dict]:
    """Prove and verify bushfire claims at each size; returns table rows and gas reports at the last size."""
    rng = DeterministicRng(f"bench:{seed}".encode())
    need = max(max(4 * mul, mul + lin) for lin, mul in (constraint_counts(n, params) for n in sizes))
    if srs is None or srs.d < need:
        srs = setup(need, rng.fork("srs"), curve)
    p = srs.curve.p
    key = keygen(rng.fork("key"))
    H = parse_location("-35.28,149.13,pre=2019-11-01,post=2020-02-01")
    vk = srs.verifier_key()
    rows, gas = [], {}
    for n in sizes:
        raster = random_burnt_raster(n, rng.fork(f"raster:{n}"))
        if not ground_truth_claim(raster, params).valid:
            raster = random_burnt_raster(n, rng.fork(f"raster:{n}:retry"), 1.0)
        cs = build_bushfire_cs(n, params, p)
        core, data = build_bushfire_witness(raster, params, p)
        bundle = make_bundle(key, srs, H, data[0])
        sk = SKPolys(cs)
        circuit = commit_circuit(srs, cs, (4 * n,), sk)
        times, peak = [], 0
        for _ in range(repeats):
            tracemalloc.start()
            t0 = time.perf_counter()
            proof = prove_batched(srs, cs, core, [bundle], circuit, sk)
            times.append(time.perf_counter() - t0)
            peak = max(peak, tracemalloc.get_traced_memory()[1])
            tracemalloc.stop()
        tr_ev = VerifyTrace()
        t0 = time.perf_counter()
        ok_ev = verify_batched(vk, circuit, [bundle.public()], H, proof, tr_ev)
        verify_s = time.perf_counter() - t0
        dat_proof = prove_with_data(srs, cs, core, [bundle], circuit, sk)
        tr_dat = VerifyTrace()
        ok_dat = verify_with_data(vk, circuit, [bundle.public()], H, dat_proof, tr_dat)
        g_ev, g_dat = estimate_gas(tr_ev), estimate_gas(tr_dat)
        lin, mul = constraint_counts(n, params)
        rows.append({
            "n_pixels": n,
            "linear_constraints": lin,
            "multiplicative_constraints": mul,
            "prove_seconds": round(statistics.mean(times), 4),
            "prove_seconds_stdev": round(statistics.stdev(times), 4) if len(times) > 1 else 0.0,
            "prover_peak_mib": round(peak / 2**20, 2),
            "proof_bytes": len(proof.to_bytes()),
            "proof_uint256_words": proof.uint256_count(),
            "verify_seconds": round(verify_s, 4),
            "gas_per_opening": g_dat.total,
            "gas_batched": g_ev.total,
            "gas_ratio": round(g_ev.total / g_dat.total, 4),
            "verified": ok_ev and ok_dat,
        })
        gas = {f"per-opening ({g_dat.pairing_equations} eq.)": g_dat, f"batched ({g_ev.pairing_equations} eq.)": g_ev}
    return rows, gas


def cmd_bench(args) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise UsageError("--sizes takes a comma-separated list of pixel counts") from None
    if not sizes or min(sizes) < 1:
        raise UsageError("--sizes needs positive pixel counts")
    if args.repeats < 1:
        raise UsageError("--repeats must be at least 1")
    params = _params_from_args(args)
    srs = _load_srs(args, args.srs) if args.srs else None
    rows, gas = run_bench(sizes, args.repeats, str(args.seed), params, args.curve, srs)
    out = Path(args.workspace) / args.out if not Path(args.out).is_absolute() else Path(args.out)
    files = [write_csv(out / "bench.csv", rows), plot_bench(rows, out / "bench.png"),
             write_csv(out / "gas.csv", gas_rows(gas)), plot_gas(gas, out / "gas.png")]
    cols = ["n_pixels", "linear_constraints", "multiplicative_constraints", "prove_seconds", "prover_peak_mib",
            "proof_bytes", "gas_per_opening", "gas_batched", "gas_ratio"]
    table = [" ".join(f"{c:>14}" for c in cols)]
    table += [" ".join(f"{str(r[c]):>14}" for c in cols) for r in rows]
    table.append("wrote " + ", ".join(str(f) for f in files))
    _emit(args, {"rows": rows, "files": [str(f) for f in files]}, "\n".join(table))
    return 0 if all(r["verified"] for r in rows) else 2


# ---------------------------------------------------------------------------
# argument parsing


def _add_params(p: argparse.ArgumentParser) -> None:
    d = FixedPointParams()
    p.add_argument("--params", help="JSON file with a 'params' object (overrides the flags below)")
    p.add_argument("--scale", type=int, default=d.scale)
    p.add_argument("--kappa", type=int, default=d.kappa_scaled, help="dNBR threshold times scale")
    p.add_argument("--epsilon", type=int, default=d.epsilon, help="burnt pixels required")
    p.add_argument("--k-bits", type=int, default=d.k_bits)
    p.add_argument("--theta-max", type=int, default=None, help="bound on summed squared residues (default 2^k)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zkparam", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--workspace", default=".", help="base directory for relative paths")
    common.add_argument("--seed", default="0", help="seed for every random choice")
    common.add_argument("--force", action="store_true", help="overwrite existing output files")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--no-check", action="store_true", help="skip the SRS self-check when loading")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("setup", parents=[common], help="generate an SRS and its verifier subset")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--curve", default="bls12_381", choices=["bls12_381", "bn254"])
    p.add_argument("--out", default="srs/main.srs")
    p.set_defaults(func=cmd_setup)

    p = sub.add_parser("keygen", parents=[common], help="generate a data-provider signing key")
    p.add_argument("--out", default="keys/provider.json")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("data-commit", parents=[common], help="commit to raster values and sign them")
    p.add_argument("--raster", nargs="+", required=True, help="one combined CSV or four band CSVs")
    p.add_argument("--location", required=True, help="lat,lon[,pre=DATE][,post=DATE]")
    p.add_argument("--key", required=True)
    p.add_argument("--srs", required=True)
    p.add_argument("--part", choices=["all", "pre", "post"], default="all", help="which epochs this provider serves")
    p.add_argument("--source-id", default="1")
    p.add_argument("--out", default="data/bundle.json")
    p.set_defaults(func=cmd_data_commit)

    p = sub.add_parser("policy", parents=[common], help="draft an individual policy for a location")
    p.add_argument("--id", required=True)
    p.add_argument("--insurer", default="insurer")
    p.add_argument("--insuree", default="insuree")
    p.add_argument("--premium", type=int, default=100)
    p.add_argument("--sum-insured", type=int, default=10000)
    p.add_argument("--expiry", type=int, default=100, help="logical tick")
    p.add_argument("--location", required=True)
    p.add_argument("--n-pixels", type=int, required=True)
    p.add_argument("--srs", required=True)
    p.add_argument("--sources", nargs="+", required=True, help="public parts written by data-commit")
    p.add_argument("--verifier", choices=["dat", "ev"], default="ev")
    p.add_argument("--mode", choices=MODES, default="standard")
    p.add_argument("--out", default="policies/policy.json")
    _add_params(p)
    p.set_defaults(func=cmd_policy)

    p = sub.add_parser("prove", parents=[common], help="prove a bushfire claim")
    p.add_argument("--policy", required=True)
    p.add_argument("--bundles", nargs="+", required=True)
    p.add_argument("--srs", required=True)
    p.add_argument("--bundle-srs", nargs="+", help="provider SRS files, one per bundle (default --srs)")
    p.add_argument("--variant", choices=["basic", "dat", "ev"])
    p.add_argument("--params", help="parameter file; defaults to the policy's parameters")
    p.add_argument("--out", default="proofs/proof.json")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("verify", parents=[common], help="verify a proof against a policy")
    p.add_argument("--proof", required=True)
    p.add_argument("--policy", required=True)
    p.add_argument("--gas-model", help="JSON file with a 'costs' object")
    p.add_argument("--report-dir", help="write gas.csv and gas.png here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("claim", parents=[common], help="replay a policy scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--gas-model")
    p.add_argument("--out", help="scenario report JSON; gas CSV and figure go alongside")
    p.set_defaults(func=cmd_claim)

    p = sub.add_parser("bench", parents=[common], help="time proving and price verification across sizes")
    p.add_argument("--sizes", default="4,8,16")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--curve", default="bls12_381", choices=["bls12_381", "bn254"])
    p.add_argument("--srs", help="reuse an SRS file instead of generating one")
    p.add_argument("--out", default="reports/bench")
    _add_params(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ClaimRejected, UnsatisfiedError) as exc:
        msg = str(exc)
        if "claim conditions not satisfied" not in msg:
            msg = f"claim conditions not satisfied: {msg}"
        print(f"error: {msg}", file=sys.stderr)
        return 2
    except (Rejected, BundleError) as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return 2
    except (UsageError, OSError, KeyError, ValueError, BushfireError, CommitmentError, SignatureError,
            InsuranceError, ProofError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
