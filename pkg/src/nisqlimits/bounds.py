"""Closed-form bounds for the noisy-device model (all logarithms base 2).

* information decay ``n (1-p)^t``
* entanglement plateaus on a chain and on a square lattice
* depth thresholds beyond which devices can be replaced by fair coins
* noise strength from coherence and gate times
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence


class PreconditionError(ValueError):
    """Raised when a bound is evaluated outside the range where it is certified."""


class UnitWarning(UserWarning):
    pass


def _check_p_open(p: float) -> None:
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")


def decay_bound(n: int, p: float, t: int) -> float:
    """Upper bound ``n (1-p)^t`` on ``D(rho(t) || I/2^n)`` in bits."""
    if n < 1 or t < 0 or not 0 <= p <= 1:
        raise ValueError("need n >= 1, t >= 0, 0 <= p <= 1")
    return n * (1 - p) ** t


def t_star_1d(n: int, p: float) -> int:
    """Greatest integer ``t >= 0`` with ``n (1-p)^t >= t`` (ascending scan)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_p_open(p)
    t = 0
    while n * (1 - p) ** (t + 1) >= t + 1:
        t += 1
    return t


def ent_bound_1d(n: int, p: float) -> float:
    """Entanglement cap between contiguous halves of a noisy chain.

    ``log n / -log(1-p)`` when ``n > 1/(1-p)``, else 1.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    _check_p_open(p)
    if n > 1 / (1 - p):
        return math.log2(n) / -math.log2(1 - p)
    return 1.0


def lattice_threshold(p: float) -> float:
    return (3 / (1 - p)) ** 2


def ent_bound_2d(n: int, p: float, strict: bool = True) -> float:
    """Square-lattice cap ``x 2 sqrt(n) + x^2`` with ``x = (log(n)/2 - 1) / -log(1-p)``.

    Certified only for ``n > (3/(1-p))^2`` with ``n`` a perfect square; with
    ``strict=False`` the formula is evaluated regardless.
    """
    _check_p_open(p)
    if strict:
        if math.isqrt(n) ** 2 != n:
            raise PreconditionError(f"n = {n} is not a perfect square")
        if not n > lattice_threshold(p):
            raise PreconditionError(
                f"n = {n} <= (3/(1-p))^2 = {lattice_threshold(p):.6g}; bound not certified"
            )
    x = (0.5 * math.log2(n) - 1) / -math.log2(1 - p)
    return x * 2 * math.sqrt(n) + x * x


def lattice_minimax_bound(n: int, p: float) -> float:
    """``max_t min(n (1-p)^t, 2 t sqrt(n) + t^2)`` over integers ``t >= 0``.

    Valid at every ``n``: the decay and light-cone caps hold simultaneously
    at the true depth, so this is a certified alternative below the closed
    form's range.
    """
    _check_p_open(p)
    best, t = 0.0, 0
    root = math.sqrt(n)
    while True:
        decay = n * (1 - p) ** t
        best = max(best, min(decay, 2 * t * root + t * t))
        if 2 * t * root + t * t >= decay:
            return best
        t += 1


@dataclass(frozen=True)
class CurvePoint:
    n: int
    p: float
    topology: str
    bound: float
    curve_value: float

    @property
    def certified(self) -> bool:
        return self.topology == "chain" or self.n > lattice_threshold(self.p)


def fig4_curve(n_list: Iterable[int], p: float, topology: str = "chain") -> list[CurvePoint]:
    """Entanglement ceiling ``min(n/2, bound)`` per qubit count.

    For ``grid`` only perfect squares ``n >= 4`` are emitted and the closed
    form is evaluated even below its certified range; check
    :attr:`CurvePoint.certified` before relying on such rows.
    """
    _check_p_open(p)
    out = []
    for n in n_list:
        if topology == "chain":
            bound = ent_bound_1d(n, p)
        elif topology == "grid":
            if n < 4 or math.isqrt(n) ** 2 != n:
                continue
            bound = ent_bound_2d(n, p, strict=False)
        else:
            raise ValueError(f"unknown topology {topology!r}")
        out.append(CurvePoint(n, p, topology, bound, max(0.0, min(n / 2, bound))))
    return out


def fmt(x: float) -> str:
    return format(x, ".12g")


CSV_HEADER = ("n", "p", "topology", "bound", "curve_value")


def curve_csv(points: Sequence[CurvePoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for pt in points:
        writer.writerow([pt.n, fmt(pt.p), pt.topology, fmt(pt.bound), fmt(pt.curve_value)])
    return buf.getvalue()


THRESHOLD_VARIANTS = ("thmC1", "thmC2")


def advantage_depth_threshold(T: float, p: float, variant: str = "thmC2") -> float:
    """Depth beyond which devices in a ``T``-time hybrid algorithm are coin-replaceable.

    ``thmC1``: ``log T / |log(1-p)| + c`` with ``c = -5 / log(1-p)``.
    ``thmC2``: ``log T / (2 |log(1-p)|) + c`` with ``c = -5 / (2 log(1-p))``.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    _check_p_open(p)
    rate = -math.log2(1 - p)
    if variant == "thmC1":
        return math.log2(T) / rate + 5 / rate
    if variant == "thmC2":
        return math.log2(T) / (2 * rate) + 5 / (2 * rate)
    raise ValueError(f"variant must be one of {THRESHOLD_VARIANTS}")


@dataclass(frozen=True)
class DeviceSpec:
    t1: float
    tg: float
    label: str = ""

    def __post_init__(self):
        if not (self.t1 > 0 and self.tg > 0):
            raise ValueError("coherence and gate times must be positive")


def estimate_p(spec: DeviceSpec) -> float:
    """Noise strength ``Tg / T1``, clamped to [0, 1].

    Emits :class:`UnitWarning` when the ratio exceeds 1, which almost always
    means the two times were given in different units.
    """
    ratio = spec.tg / spec.t1
    if ratio >= 1:
        warnings.warn(
            f"Tg/T1 = {ratio:.4g} >= 1 for {spec.label or 'device'}; check time units",
            UnitWarning,
            stacklevel=2,
        )
    return min(1.0, max(0.0, ratio))


def round_sig(x: float, digits: int = 1) -> float:
    return float(f"{x:.{digits - 1}e}")


# Tabulated (T1 in microseconds, Tg as printed, published p).
DEVICE_TABLE = (
    ("Sycamore", 15.0, 25.0, 2e-3),
    ("Zuchongzhi", 30.5, 32.0, 1e-3),
)

GATE_UNIT_NOTE = (
    "gate times in the device table are read as nanoseconds; read as "
    "microseconds they would give p > 1"
)


def device_table_estimates() -> list[tuple[str, DeviceSpec, float, float]]:
    """``(label, spec, p, published p)`` for the tabulated devices."""
    warnings.warn(GATE_UNIT_NOTE, UnitWarning, stacklevel=2)
    rows = []
    for label, t1_us, tg_ns, published in DEVICE_TABLE:
        spec = DeviceSpec(t1_us * 1e-6, tg_ns * 1e-9, label)
        rows.append((label, spec, estimate_p(spec), published))
    return rows
