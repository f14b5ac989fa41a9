"""Simulated policy contracts, an in-memory ledger and a verifier gas model.

One global verifier contract per (verifier kind, SRS subset, storage mode)
serves every policy; each individual policy stores only the location tag,
the circuit commitments and the data providers' public keys.  Time is a
logical tick counter.
"""

from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Mapping

from .algebra import keccak256, to_hex
from .pcs import VerifierKey
from .sigs import LocationTag
from .sonic import CircuitCommitments, SonicProof, SourcePublic, verify
from .trace import OPS, VerifyTrace

SCENARIO_VERSION = 1
POLICY_VERSION = 1
VERIFIER_KINDS = ("basic", "dat", "ev")
MODES = ("standard", "enhanced+")


class InsuranceError(RuntimeError):
    pass


class StateError(InsuranceError):
    pass


class ReplayError(StateError):
    pass


class InsufficientFunds(InsuranceError):
    pass


# ---------------------------------------------------------------------------
# ledger


@dataclass(frozen=True)
class Transfer:
    tick: int
    src: str
    dst: str
    amount: int
    memo: str


class Ledger:
    def __init__(self, balances: Mapping[str, int] | None = None) -> None:
        self.balances: dict[str, int] = {}
        self.log: list[Transfer] = []
        for account, amount in (balances or {}).items():
            self.open_account(account, amount)

    def open_account(self, account: str, amount: int = 0) -> None:
        if account in self.balances:
            raise InsuranceError(f"account {account!r} already exists")
        if amount < 0:
            raise InsuranceError("opening balance must be non-negative")
        self.balances[account] = amount

    def balance(self, account: str) -> int:
        return self.balances.get(account, 0)

    def total(self) -> int:
        return sum(self.balances.values())

    def transfer(self, src: str, dst: str, amount: int, memo: str = "", tick: int = 0) -> None:
        if amount < 0:
            raise InsuranceError("transfer amount must be non-negative")
        if src not in self.balances:
            raise InsuranceError(f"unknown account {src!r}")
        if self.balances[src] < amount:
            raise InsufficientFunds(f"{src} holds {self.balances[src]}, needs {amount}")
        self.balances[src] -= amount
        self.balances[dst] = self.balances.get(dst, 0) + amount
        self.log.append(Transfer(tick, src, dst, amount, memo))


# ---------------------------------------------------------------------------
# gas model


@dataclass(frozen=True)
class GasCostModel:
    """Per-operation prices, shaped after the EVM precompiles and opcodes."""

    pairing_base: int = 45000
    pairing_per_pair: int = 34000
    g1_add: int = 150
    g1_mul: int = 6000
    mulmod: int = 8
    addmod: int = 8
    modexp: int = 200
    keccak_base: int = 30
    keccak_per_word: int = 6
    calldata_zero_byte: int = 4
    calldata_nonzero_byte: int = 16
    sload_word: int = 2100
    ecrecover: int = 3000
    compare: int = 3
    tx_base: int = 21000

    def __post_init__(self) -> None:
        for name, value in asdict(self).items():
            if value < 0:
                raise ValueError(f"gas cost {name} must be non-negative")

    def price(self, op: str) -> int:
        return {
            "pairing_equation": self.pairing_base,
            "pairing": self.pairing_per_pair,
            "g1_add": self.g1_add,
            "g1_mul": self.g1_mul,
            "mulmod": self.mulmod,
            "addmod": self.addmod,
            "modexp": self.modexp,
            "keccak": self.keccak_base,
            "keccak_words": self.keccak_per_word,
            "calldata_zero_bytes": self.calldata_zero_byte,
            "calldata_nonzero_bytes": self.calldata_nonzero_byte,
            "sload_words": self.sload_word,
            "ecrecover": self.ecrecover,
            "compare": self.compare,
        }[op]

    @classmethod
    def from_json(cls, data: Mapping[str, int]) -> GasCostModel:
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown gas cost keys: {sorted(unknown)}")
        return cls(**{k: int(v) for k, v in data.items()})


CATEGORY_ORDER = ("Processing Input", "Computing Ψ_i", "Computing Θ", "Computing Φ", "Checking Other Equations")


def _category_rank(name: str) -> tuple[int, str]:
    if name in CATEGORY_ORDER:
        return CATEGORY_ORDER.index(name), name
    if name.startswith("Checking") and "Pairing" in name:
        return len(CATEGORY_ORDER), name
    return len(CATEGORY_ORDER) + 1, name


@dataclass(frozen=True)
class GasReport:
    rows: tuple[tuple[str, int], ...]
    total: int
    pairing_equations: int
    pairings: int
    counts: dict = field(default_factory=dict)

    def category(self, name: str) -> int:
        return dict(self.rows).get(name, 0)

    def to_json(self) -> dict:
        return {
            "rows": [{"category": name, "gas": gas} for name, gas in self.rows],
            "total": self.total,
            "pairing_equations": self.pairing_equations,
            "pairings": self.pairings,
            "counts": self.counts,
        }


def estimate_gas(trace: VerifyTrace, model: GasCostModel | None = None) -> GasReport:
    model = model or GasCostModel()
    per_cat = {}
    for cat, counter in trace.by_category.items():
        per_cat[cat] = sum(model.price(op) * n for op, n in counter.items() if op in OPS)
    per_cat["Others"] = per_cat.get("Others", 0) + model.tx_base
    rows = tuple(sorted(per_cat.items(), key=lambda kv: _category_rank(kv[0])))
    return GasReport(rows, sum(per_cat.values()), trace.pairing_equations, trace.pairings, trace.to_dict())


# ---------------------------------------------------------------------------
# contracts


class PolicyState(enum.Enum):
    CREATED = "Created"
    FUNDED = "Funded"
    ACTIVE = "Active"
    SETTLED = "Settled"
    EXPIRED = "Expired"


@dataclass(frozen=True)
class GlobalVerifier:
    kind: str
    mode: str
    vk: VerifierKey
    subset_digest: bytes
    element_count: int
    deploy_calldata_words: int

    @property
    def handle(self) -> str:
        return f"{self.kind}:{self.mode}:{to_hex(self.subset_digest)[2:18]}"


@dataclass(frozen=True)
class PolicyDraft:
    policy_id: str
    insurer: str
    insuree: str
    premium: int
    sum_insured: int
    H: LocationTag
    params_digest: bytes
    expiry: int
    circuit: CircuitCommitments
    sources: tuple[SourcePublic, ...]
    verifier: str = "ev"
    mode: str = "standard"
    srs_subset: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        return {
            "version": POLICY_VERSION,
            "policy_id": self.policy_id,
            "insurer": self.insurer,
            "insuree": self.insuree,
            "premium": self.premium,
            "sum_insured": self.sum_insured,
            "H": self.H.hex(),
            "params_digest": to_hex(self.params_digest),
            "expiry": self.expiry,
            "circuit": self.circuit.to_json(),
            "sources": [s.to_json() for s in self.sources],
            "verifier": self.verifier,
            "mode": self.mode,
            "srs_subset": self.srs_subset,
        }

    @classmethod
    def from_json(cls, data: dict) -> PolicyDraft:
        if data.get("version") != POLICY_VERSION:
            raise InsuranceError("unsupported policy version")
        return cls(
            policy_id=str(data["policy_id"]),
            insurer=data["insurer"],
            insuree=data["insuree"],
            premium=int(data["premium"]),
            sum_insured=int(data["sum_insured"]),
            H=LocationTag.from_hex(data["H"]),
            params_digest=bytes.fromhex(data["params_digest"].removeprefix("0x")),
            expiry=int(data["expiry"]),
            circuit=CircuitCommitments.from_json(data["circuit"]),
            sources=tuple(SourcePublic.from_json(s) for s in data["sources"]),
            verifier=data.get("verifier", "ev"),
            mode=data.get("mode", "standard"),
            srs_subset=data.get("srs_subset", {}),
        )


@dataclass
class Policy:
    draft: PolicyDraft
    verifier: GlobalVerifier
    state: PolicyState = PolicyState.CREATED
    claims: list[ClaimRecord] = field(default_factory=list)

    @property
    def policy_id(self) -> str:
        return self.draft.policy_id

    @property
    def escrow(self) -> str:
        return f"escrow:{self.policy_id}"


@dataclass(frozen=True)
class ClaimRecord:
    policy_id: str
    tick: int
    accepted: bool
    proof_digest: bytes
    gas: GasReport

    def to_json(self) -> dict:
        return {
            "policy_id": self.policy_id,
            "tick": self.tick,
            "accepted": self.accepted,
            "proof_digest": to_hex(self.proof_digest),
            "gas": self.gas.to_json(),
        }


def proof_digest(proof: SonicProof) -> bytes:
    return keccak256(proof.to_bytes())


class InsuranceChain:
    """A single serialized contract state: globals, policies, ledger and clock."""

    def __init__(self, ledger: Ledger | None = None, gas_model: GasCostModel | None = None) -> None:
        self.ledger = ledger or Ledger()
        self.gas_model = gas_model or GasCostModel()
        self.now = 0
        self.globals: dict[tuple[str, str, bytes], GlobalVerifier] = {}
        self.policies: dict[str, Policy] = {}

    # --- deployment -------------------------------------------------------

    def deploy_global(self, kind: str, subset: dict, mode: str = "standard") -> GlobalVerifier:
        if kind not in VERIFIER_KINDS:
            raise InsuranceError(f"unknown verifier kind {kind!r}")
        if mode not in MODES:
            raise InsuranceError(f"unknown storage mode {mode!r}")
        vk = VerifierKey.from_subset(subset)
        canonical = vk.to_subset()
        if subset.get("element_count", canonical["element_count"]) != canonical["element_count"]:
            raise InsuranceError("verifier subset element count is inconsistent")
        digest = keccak256(json.dumps(canonical, sort_keys=True).encode())
        key = (kind, mode, digest)
        if key not in self.globals:
            words = 0 if mode == "enhanced+" else canonical["element_count"]
            self.globals[key] = GlobalVerifier(kind, mode, vk, digest, canonical["element_count"], words)
        return self.globals[key]

    def deploy_individual(self, verifier: GlobalVerifier, draft: PolicyDraft) -> Policy:
        if draft.policy_id in self.policies:
            raise InsuranceError(f"duplicate policy id {draft.policy_id!r}")
        if not draft.H.H:
            raise InsuranceError("a policy needs a location tag")
        if draft.premium < 0 or draft.sum_insured < 0:
            raise InsuranceError("premium and sum insured must be non-negative")
        if draft.verifier != verifier.kind:
            raise InsuranceError(f"policy wants a {draft.verifier} verifier, handle is {verifier.kind}")
        for acct in (draft.insurer, draft.insuree):
            if acct not in self.ledger.balances:
                self.ledger.open_account(acct)
        policy = Policy(draft, verifier)
        self.policies[draft.policy_id] = policy
        return policy

    # --- lifecycle --------------------------------------------------------

    def _policy(self, policy_id: str) -> Policy:
        try:
            return self.policies[policy_id]
        except KeyError:
            raise InsuranceError(f"unknown policy {policy_id!r}") from None

    def _require(self, policy: Policy, state: PolicyState, action: str) -> None:
        if policy.state is not state:
            raise StateError(f"cannot {action}: policy {policy.policy_id} is {policy.state.value}")

    def fund(self, policy_id: str) -> Policy:
        pol = self._policy(policy_id)
        self._require(pol, PolicyState.CREATED, "fund")
        self.ledger.transfer(pol.draft.insurer, pol.escrow, pol.draft.sum_insured, "fund", self.now)
        pol.state = PolicyState.FUNDED
        return pol

    def pay_premium(self, policy_id: str) -> Policy:
        pol = self._policy(policy_id)
        self._require(pol, PolicyState.FUNDED, "pay premium")
        if self.now >= pol.draft.expiry:
            raise StateError(f"cannot pay premium: policy {policy_id} has passed expiry")
        self.ledger.transfer(pol.draft.insuree, pol.draft.insurer, pol.draft.premium, "premium", self.now)
        pol.state = PolicyState.ACTIVE
        return pol

    def advance_time(self, ticks: int) -> int:
        if ticks < 0:
            raise InsuranceError("time only moves forward")
        self.now += ticks
        return self.now

    def expire(self, policy_id: str) -> Policy:
        pol = self._policy(policy_id)
        if pol.state not in (PolicyState.FUNDED, PolicyState.ACTIVE):
            raise StateError(f"cannot expire: policy {policy_id} is {pol.state.value}")
        if self.now < pol.draft.expiry:
            raise StateError(f"cannot expire: policy {policy_id} runs until tick {pol.draft.expiry}")
        self.ledger.transfer(pol.escrow, pol.draft.insurer, self.ledger.balance(pol.escrow), "expiry", self.now)
        pol.state = PolicyState.EXPIRED
        return pol

    def verify_claim(self, policy: Policy, proof: SonicProof) -> tuple[bool, GasReport]:
        """Run the global verifier on a proof without touching contract state."""
        trace = VerifyTrace()
        d, g = policy.draft, policy.verifier
        ok = proof.variant == g.kind and verify(
            g.vk, d.circuit, proof, d.sources, d.H, trace, srs_in_calldata=g.mode == "enhanced+"
        )
        return ok, estimate_gas(trace, self.gas_model)

    def submit_claim(self, policy_id: str, proof: SonicProof) -> ClaimRecord:
        pol = self._policy(policy_id)
        if pol.state is PolicyState.SETTLED:
            raise ReplayError(f"policy {policy_id} is already settled")
        self._require(pol, PolicyState.ACTIVE, "claim")
        if self.now >= pol.draft.expiry:
            raise StateError(f"cannot claim: policy {policy_id} has passed expiry")
        ok, gas = self.verify_claim(pol, proof)
        record = ClaimRecord(policy_id, self.now, ok, proof_digest(proof), gas)
        pol.claims.append(record)
        if ok:
            self.ledger.transfer(pol.escrow, pol.draft.insuree, pol.draft.sum_insured, "payout", self.now)
            pol.state = PolicyState.SETTLED
        return record


# ---------------------------------------------------------------------------
# scenarios


def run_scenario(scenario: dict, load_policy: Callable[[str], PolicyDraft],
                 load_proof: Callable[[str], SonicProof], gas_model: GasCostModel | None = None) -> dict:
    """Replay an ordered action list; failures are logged, not raised.

    Actions: deploy {policy}, fund / premium / expire {policy_id},
    advance_time {ticks}, claim {policy_id, proof}.
    """
    if scenario.get("version") != SCENARIO_VERSION:
        raise InsuranceError("unsupported scenario version")
    chain = InsuranceChain(Ledger(scenario.get("accounts", {})), gas_model)
    start_total = chain.ledger.total()
    events = []
    for step, action in enumerate(scenario.get("actions", [])):
        op = action.get("op")
        event = {"step": step, "op": op, "ok": True}
        try:
            if op == "deploy":
                draft = load_policy(action["policy"])
                handle = chain.deploy_global(draft.verifier, draft.srs_subset, draft.mode)
                chain.deploy_individual(handle, draft)
                event.update(policy_id=draft.policy_id, verifier=handle.handle)
            elif op == "fund":
                chain.fund(action["policy_id"])
            elif op == "premium":
                chain.pay_premium(action["policy_id"])
            elif op == "advance_time":
                event["now"] = chain.advance_time(int(action["ticks"]))
            elif op == "expire":
                chain.expire(action["policy_id"])
            elif op == "claim":
                record = chain.submit_claim(action["policy_id"], load_proof(action["proof"]))
                event.update(record.to_json())
            else:
                raise InsuranceError(f"unknown scenario action {op!r}")
        except (InsuranceError, KeyError, ValueError, OSError) as exc:
            event.update(ok=False, error=f"{type(exc).__name__}: {exc}")
        if "policy_id" in action and action["policy_id"] in chain.policies:
            event["state"] = chain.policies[action["policy_id"]].state.value
        events.append(event)
    if chain.ledger.total() != start_total:
        raise InsuranceError("ledger conservation violated")
    return {
        "version": SCENARIO_VERSION,
        "events": events,
        "balances": dict(sorted(chain.ledger.balances.items())),
        "policies": {pid: pol.state.value for pid, pol in chain.policies.items()},
        "now": chain.now,
    }


def load_scenario(path: str | Path) -> tuple[dict, Path]:
    path = Path(path)
    return json.loads(path.read_text()), path.parent
