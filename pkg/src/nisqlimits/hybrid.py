"""Exact transcript laws for adaptive classical controllers that query noisy devices.

A scenario is a deterministic controller: round ``i`` maps the previous
outcomes ``(X_1, ..., X_{i-1})`` to a circuit on a fixed number of qubits,
and a final map sends the whole transcript to a decision bit. Every
transcript is enumerated, so all laws below are exact.

Classical coin flips of the controller are modelled as extra rounds whose
device is fully depolarizing (``noise=1``).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from math import comb
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .bounds import advantage_depth_threshold
from .circuits import (
    Circuit,
    Gate,
    GateLayer,
    Topology,
    gate,
    haar_unitary,
    identity_layers,
    validate_circuit,
)
from .dmsim import evolve, output_distribution
from .infotheory import kl_divergence, one_norm_distance, shannon_entropy

ENUMERATION_CAP = 20
Transcript = tuple[str, ...]


class ScenarioError(ValueError):
    pass


class BoundViolation(AssertionError):
    """An inequality that must hold for exact laws failed numerically."""


@dataclass(frozen=True)
class RoundRequest:
    circuit: Circuit
    noise: float | None = None  # None: use the run's p

    @property
    def is_coin(self) -> bool:
        return self.noise == 1.0


@dataclass
class HybridScenario:
    """Deterministic adaptive controller.

    Attributes:
        widths: qubit count ``n_i`` of each round's device.
        request: ``request(i, prefix)`` returns the round-``i`` device given
            the outcomes of rounds ``0..i-1`` as bit strings.
        decide: maps a full transcript to 0 or 1.
        min_depth: declared lower bound ``t`` on every device depth.
    """

    widths: tuple[int, ...]
    request: Callable[[int, Transcript], RoundRequest]
    decide: Callable[[Transcript], int]
    min_depth: int
    name: str = "custom"

    def __post_init__(self):
        self.widths = tuple(self.widths)
        if not self.widths:
            raise ScenarioError("need at least one round")
        if sum(self.widths) > ENUMERATION_CAP:
            raise ScenarioError(
                f"total width {sum(self.widths)} exceeds enumeration cap {ENUMERATION_CAP}"
            )

    @property
    def rounds(self) -> int:
        return len(self.widths)

    @property
    def total_bits(self) -> int:
        return sum(self.widths)

    def split(self, index: int) -> Transcript:
        bits = format(index, f"0{self.total_bits}b")
        out, pos = [], 0
        for w in self.widths:
            out.append(bits[pos : pos + w])
            pos += w
        return tuple(out)

    def decisions(self) -> np.ndarray:
        return np.array(
            [int(self.decide(self.split(i))) for i in range(2**self.total_bits)], dtype=int
        )


@dataclass
class TranscriptLaw:
    joint: np.ndarray
    output_law: np.ndarray
    widths: tuple[int, ...]
    conditional_entropies: list[float] = field(default_factory=list)
    min_depth_seen: int | None = None


def _push_forward(joint: np.ndarray, decisions: np.ndarray) -> np.ndarray:
    return np.array([joint[decisions == 0].sum(), joint[decisions == 1].sum()])


def run_exact(scenario: HybridScenario, p: float) -> TranscriptLaw:
    """Joint law of all outcomes, by depth-first enumeration of transcripts.

    Identical device requests are simulated once. Along the way the
    conditional entropies ``S(X_i | X_<i)`` are accumulated directly from the
    per-prefix outcome distributions.
    """
    widths = scenario.widths
    cache: dict[tuple, np.ndarray] = {}
    cond = [0.0] * len(widths)
    joint = np.zeros(2**scenario.total_bits)
    min_depth = [None]

    def outcome_law(i: int, prefix: Transcript) -> np.ndarray:
        req = scenario.request(i, prefix)
        c = req.circuit
        if c.n != widths[i]:
            raise ScenarioError(f"round {i} requested {c.n} qubits, declared {widths[i]}")
        report = validate_circuit(c)
        if not report.ok:
            raise ScenarioError(f"round {i}, prefix {prefix}: {report.violations[0]}")
        if not req.is_coin:
            min_depth[0] = c.depth if min_depth[0] is None else min(min_depth[0], c.depth)
        noise = p if req.noise is None else req.noise
        key = (c.key(), noise)
        if key not in cache:
            cache[key] = output_distribution(evolve(c, noise))
        return cache[key]

    def walk(i: int, prefix: Transcript, weight: float, offset: int) -> None:
        if i == len(widths):
            joint[offset] += weight
            return
        law = outcome_law(i, prefix)
        cond[i] += weight * shannon_entropy(law)
        shift = sum(widths[i + 1 :])
        for x, px in enumerate(law):
            if px == 0:
                continue
            bits = format(x, f"0{widths[i]}b")
            walk(i + 1, prefix + (bits,), weight * px, offset + (x << shift))

    walk(0, (), 1.0, 0)
    if abs(joint.sum() - 1) > 1e-9:
        raise BoundViolation(f"joint law sums to {joint.sum()}")
    return TranscriptLaw(
        joint=joint,
        output_law=_push_forward(joint, scenario.decisions()),
        widths=widths,
        conditional_entropies=cond,
        min_depth_seen=min_depth[0],
    )


@dataclass
class EntropyCheck:
    s_joint: float
    lower_bound: float
    passed: bool

    @property
    def slack(self) -> float:
        return self.s_joint - self.lower_bound


def joint_entropy_check(scenario: HybridScenario, p: float, t: int) -> EntropyCheck:
    """Compare ``S(X_1..X_q)`` with ``(1 - (1-p)^t) * sum(n_i)``.

    Raises:
        ScenarioError: if some queried device is shallower than ``t``.
    """
    law = run_exact(scenario, p)
    if law.min_depth_seen is not None and law.min_depth_seen < t:
        raise ScenarioError(f"a device of depth {law.min_depth_seen} < t = {t} was queried")
    s = shannon_entropy(law.joint)
    bound = (1 - (1 - p) ** t) * scenario.total_bits
    return EntropyCheck(s, bound, s >= bound - 1e-7)


def coin_replace(law: TranscriptLaw, scenario: HybridScenario) -> TranscriptLaw:
    """Swap the transcript law for the uniform one, keeping the decision map."""
    uniform = np.full_like(law.joint, 1 / len(law.joint))
    return TranscriptLaw(
        joint=uniform,
        output_law=_push_forward(uniform, scenario.decisions()),
        widths=law.widths,
        conditional_entropies=list(law.widths),
        min_depth_seen=law.min_depth_seen,
    )


@dataclass
class GapReport:
    kl_bits: float
    kl_nats: float
    one_norm: float
    pinsker_rhs: float
    output_kl_bits: float
    s_joint: float
    total_bits: int


def replacement_gap(scenario: HybridScenario, p: float) -> GapReport:
    """Distance between the real run and its coin-replaced counterpart.

    Raises:
        BoundViolation: if ``D(joint || uniform) != sum(n_i) - S(joint)``,
            if Pinsker fails, or if data processing fails.
    """
    law = run_exact(scenario, p)
    coins = coin_replace(law, scenario)
    kl_bits = kl_divergence(law.joint, coins.joint, "bits")
    kl_nats = kl_divergence(law.joint, coins.joint, "nats")
    s_joint = shannon_entropy(law.joint)
    one_norm = one_norm_distance(law.output_law, coins.output_law)
    rhs = math.sqrt(2 * kl_nats)
    out_kl = kl_divergence(law.output_law, coins.output_law, "bits")
    if abs(kl_bits - (scenario.total_bits - s_joint)) > 1e-9:
        raise BoundViolation(f"KL {kl_bits} != T - S = {scenario.total_bits - s_joint}")
    if one_norm > rhs + 1e-9:
        raise BoundViolation(f"one-norm gap {one_norm} exceeds sqrt(2 KL) = {rhs}")
    if out_kl > kl_bits + 1e-9:
        raise BoundViolation(f"output KL {out_kl} exceeds transcript KL {kl_bits}")
    return GapReport(kl_bits, kl_nats, one_norm, rhs, out_kl, s_joint, scenario.total_bits)


# --- amplification and search-to-decision -----------------------------------

def majority_amplify(base_correct: float, reps: int) -> float:
    """Exact probability that a majority of ``reps`` independent runs is correct."""
    if not 0.5 < base_correct <= 1:
        raise ValueError("base success probability must lie in (1/2, 1]")
    if reps < 1 or reps % 2 == 0:
        raise ValueError("reps must be a positive odd integer")
    q = 1 - base_correct
    return math.fsum(
        comb(reps, k) * base_correct**k * q ** (reps - k) for k in range(reps // 2 + 1, reps + 1)
    )


def reps_for_target(base_correct: float, target: float, limit: int = 100_001) -> int:
    """Smallest odd ``reps`` whose majority vote reaches ``target``."""
    for reps in range(1, limit + 1, 2):
        if majority_amplify(base_correct, reps) >= target:
            return reps
    raise ValueError(f"target not reached within {limit} repetitions")


class InconsistentOracleError(ValueError):
    pass


def trial_division_oracle(N: int, k: int) -> bool:
    """Whether ``N`` has a factor ``f`` with ``1 < f < min(k, N)``."""
    return any(N % f == 0 for f in range(2, min(k, N)))


@dataclass
class FactorSearch:
    factor: int | None  # None means N is prime
    calls: int  # binary-search queries
    verify_calls: int = 0


def smallest_factor_via_decision(
    N: int, oracle: Callable[[int, int], bool], verify: bool = True
) -> FactorSearch:
    """Smallest non-trivial factor of ``N`` by binary search over ``oracle(N, k)``.

    ``oracle(N, k)`` answers whether ``N`` has a non-trivial factor below
    ``k``. The search uses at most ``ceil(log2(N - 1))`` queries. With
    ``verify``, the top query ``k = N`` and both sides of the boundary are
    also asked (if not already), every answer is checked for monotonicity,
    and the result for divisibility.

    Raises:
        InconsistentOracleError: on non-monotone answers or a non-divisor.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    answers: dict[int, bool] = {}

    def ask(k: int) -> bool:
        answers[k] = bool(oracle(N, k))
        return answers[k]

    lo, hi = 3, N + 1  # smallest k with a yes lies in [lo, hi]; hi means none
    while lo < hi:
        mid = (lo + hi) // 2
        if ask(mid):
            hi = mid
        else:
            lo = mid + 1
    calls = len(answers)
    if verify:
        for k in (lo - 1, lo, N):
            if 3 <= k <= N and k not in answers:
                ask(k)
        ks = sorted(answers)
        for a, b in zip(ks, ks[1:]):
            if answers[a] and not answers[b]:
                raise InconsistentOracleError(f"oracle says yes below {a} but no below {b}")
    result = FactorSearch(None if lo == N + 1 else lo - 1, calls, len(answers) - calls)
    if result.factor is not None and N % result.factor:
        raise InconsistentOracleError(f"oracle points at {result.factor}, which does not divide {N}")
    return result


# --- built-in scenarios -------------------------------------------------------

def _pad(circuit: Circuit, depth: int) -> Circuit:
    extra = max(0, depth - circuit.depth)
    return Circuit(circuit.topology, circuit.layers + [GateLayer() for _ in range(extra)])


def _x_layer(n: int, bits: str) -> GateLayer:
    return GateLayer([gate("X", q) for q, b in enumerate(bits) if b == "1"])


def _swap_brickwork(n: int, depth: int, start: int = 0) -> list[GateLayer]:
    layers = []
    for d in range(depth):
        layers.append(GateLayer([gate("SWAP", i, i + 1) for i in range((start + d) % 2, n - 1, 2)]))
    return layers


def parity_of_first_round(transcript: Transcript) -> int:
    return transcript[0].count("1") % 2


def parity_scenario(widths: Sequence[int], t: int) -> HybridScenario:
    """Every round flips qubit 0 and then shuffles bits with SWAPs for ``t - 1`` layers.

    Noiselessly the first-round parity is always 1; noise pushes it to a fair coin.
    """
    if t < 1:
        raise ScenarioError("parity devices need depth >= 1")

    def request(i: int, prefix: Transcript) -> RoundRequest:
        n = widths[i]
        layers = [_x_layer(n, "1" + "0" * (n - 1))] + _swap_brickwork(n, t - 1)
        return RoundRequest(Circuit(Topology.chain(n), layers))

    return HybridScenario(tuple(widths), request, parity_of_first_round, t, "parity")


def adaptive_copy_scenario(widths: Sequence[int], t: int) -> HybridScenario:
    """Round 0 puts its qubits in ``|+>``; each later round re-prepares the previous
    round's outcome (truncated or zero-padded to its own width) with X gates.
    """
    if t < 1:
        raise ScenarioError("devices need depth >= 1")

    def request(i: int, prefix: Transcript) -> RoundRequest:
        n = widths[i]
        topo = Topology.chain(n)
        if i == 0:
            first = GateLayer([gate("H", q) for q in range(n)])
        else:
            prev = prefix[-1][:n].ljust(n, "0")
            first = _x_layer(n, prev)
        return RoundRequest(_pad(Circuit(topo, [first]), t))

    return HybridScenario(tuple(widths), request, parity_of_first_round, t, "adaptive-copy")


def coin_pad_scenario(widths: Sequence[int], t: int, coins: int) -> HybridScenario:
    """Parity devices followed by one round of ``coins`` fair classical coin flips."""
    base = parity_scenario(widths, t)

    def request(i: int, prefix: Transcript) -> RoundRequest:
        if i < len(widths):
            return base.request(i, prefix)
        return RoundRequest(identity_layers(coins, 1), noise=1.0)

    def decide(transcript: Transcript) -> int:
        # the coins only matter when every device bit reads 0
        if all(set(x) <= {"0"} for x in transcript[:-1]):
            return transcript[-1].count("1") % 2
        return parity_of_first_round(transcript)

    return HybridScenario(tuple(widths) + (coins,), request, decide, t, "coin-pad")


def random_adaptive_scenario(
    widths: Sequence[int], t: int, seed: int, topology: str = "chain"
) -> HybridScenario:
    """Random controller: each (round, prefix) gets its own random circuit of depth
    ``t`` or ``t + 1``; the decision is a random truth table over transcripts.
    """
    widths = tuple(widths)
    total = sum(widths)
    table = np.random.default_rng([seed, 0xDEC]).integers(0, 2, size=2**total)

    def request(i: int, prefix: Transcript) -> RoundRequest:
        entropy = [seed, i] + [int(x, 2) if x else 0 for x in prefix] + [len(prefix)]
        rng = np.random.default_rng(entropy)
        n = widths[i]
        depth = t + int(rng.integers(0, 2))
        topo = Topology.chain(n)
        layers = []
        for _ in range(depth):
            if n == 1:
                layers.append(GateLayer([Gate((0,), haar_unitary(2, rng))]))
                continue
            gates = []
            start = int(rng.integers(0, 2))
            for q in range(start, n - 1, 2):
                gates.append(Gate((q, q + 1), haar_unitary(4, rng)))
            layers.append(GateLayer(gates))
        return RoundRequest(Circuit(topo, layers))

    def decide(transcript: Transcript) -> int:
        return int(table[int("".join(transcript), 2)])

    return HybridScenario(widths, request, decide, t, "random")


BUILTIN_SCENARIOS = ("parity", "adaptive-copy", "coin-pad")


def build_scenario(name: str, widths: Sequence[int], t: int, coins: int = 1) -> HybridScenario:
    if name == "parity":
        return parity_scenario(widths, t)
    if name == "adaptive-copy":
        return adaptive_copy_scenario(widths, t)
    if name == "coin-pad":
        return coin_pad_scenario(widths, t, coins)
    raise ScenarioError(f"unknown scenario {name!r}; choose from {BUILTIN_SCENARIOS}")


def deep_parity_depth(T: int, p: float, variant: str = "thmC1") -> int:
    """Smallest integer depth at or above the coin-replacement threshold for ``T`` bits."""
    return max(1, math.ceil(advantage_depth_threshold(T, p, variant)))


@dataclass
class ScenarioSpec:
    name: str
    widths: tuple[int, ...]
    t: int
    p: float
    coins: int = 1

    def build(self) -> HybridScenario:
        return build_scenario(self.name, self.widths, self.t, self.coins)


def scenario_from_dict(data: Any) -> ScenarioSpec:
    """Parse ``{"scenario": name, "n": [n_1, ...], "t": t, "p": p}``.

    ``q`` may be given and must then equal ``len(n)``; ``coins`` applies to
    ``coin-pad`` only.
    """
    if not isinstance(data, dict):
        raise ScenarioError("scenario description must be an object")
    try:
        name = str(data["scenario"])
        widths = tuple(int(w) for w in data["n"])
        t = int(data["t"])
        p = float(data["p"])
    except KeyError as exc:
        raise ScenarioError(f"missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"bad field value: {exc}") from None
    if "q" in data and int(data["q"]) != len(widths):
        raise ScenarioError(f"q = {data['q']} but {len(widths)} widths given")
    if not widths or min(widths) < 1:
        raise ScenarioError("widths must be positive")
    if not 0 <= p <= 1:
        raise ScenarioError("p must lie in [0, 1]")
    return ScenarioSpec(name, widths, t, p, int(data.get("coins", 1)))


def load_scenario(path: str | Path) -> ScenarioSpec:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(data)
