"""Command-line front end: ``nisqlimits <subcommand> ...``.

Exit codes: 0 all checks passed, 1 a bound check failed, 2 bad input or
arguments, 3 circuit validation failed, 4 qubit cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path
from typing import Sequence

from . import bounds, hybrid, lightcone
from .circuits import CircuitFormatError, CircuitValidationError, load_circuit
from .dmsim import QubitCapError, evolve, zero_state
from .entanglement import (
    MAX_SEARCH_QUBITS,
    NotPureError,
    entanglement_entropy_pure,
    er_upper_via_max_mixed,
    er_upper_via_search,
)
from .infotheory import (
    Bipartition,
    distance_to_max_mixed,
    mutual_information,
    von_neumann_entropy,
)
from .shearer import randomized_shearer_audit

EXIT_OK, EXIT_BOUND, EXIT_INPUT, EXIT_INVALID, EXIT_CAP = 0, 1, 2, 3, 4
TOL = 1e-7
fmt = bounds.fmt


class _InputError(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise _InputError(f"cannot write {out}: {exc.strerror}") from None


def _csv(rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _cut(n: int, cut: int | None) -> Bipartition:
    k = n // 2 if cut is None else cut
    if not 1 <= k <= n - 1:
        raise _InputError(f"cut must lie in 1..{n - 1}")
    return Bipartition.chain(n, k)


def _verdict(ok: bool, what: str) -> None:
    print(f"{what}: {'PASS' if ok else 'FAIL'}", file=sys.stderr)


# --- subcommands --------------------------------------------------------------

def cmd_simulate(args) -> int:
    circuit = load_circuit(args.circuit)
    n = circuit.n
    part = _cut(n, args.cut) if n > 1 else None
    _, traj = evolve(circuit, args.p, record=True)
    states = [zero_state(n)] + traj
    rows = [("t", "S", "D", "decay_bound", "I", "cone_bound")]
    ok = True
    for t, rho in enumerate(states):
        s = von_neumann_entropy(rho)
        d = distance_to_max_mixed(rho)
        decay = bounds.decay_bound(n, args.p, t)
        ok &= d <= decay + TOL
        if part is None:
            info, cone = 0.0, 0
        else:
            info = mutual_information(rho, part)
            cone = lightcone.depth_entanglement_bound(circuit.truncated(t), part)
            # local post-processing of a cone state: I <= 2 * ebits across the cut
            ok &= info <= 2 * cone + TOL
        rows.append((t, fmt(s), fmt(d), fmt(decay), fmt(info), cone))
    _emit(_csv(rows), args.out)
    _verdict(ok, "decay and light-cone checks")
    return EXIT_OK if ok else EXIT_BOUND


def cmd_curve(args) -> int:
    if args.n_min < 2 or args.n_max < args.n_min:
        raise _InputError("need 2 <= n-min <= n-max")
    topologies = ("chain", "grid") if args.topology == "both" else (args.topology,)
    points = []
    for p in args.p:
        for topo in topologies:
            points += bounds.fig4_curve(range(args.n_min, args.n_max + 1), p, topo)
    _emit(bounds.curve_csv(points), args.out)
    loose = [f"{pt.n}@p={fmt(pt.p)}" for pt in points if not pt.certified]
    if loose:
        print("note: grid rows below n > (3/(1-p))^2 are formula values, not certified: "
              + " ".join(loose), file=sys.stderr)
    return EXIT_OK


def cmd_bounds(args) -> int:
    n, p = args.n, args.p
    rows = [("quantity", "value")]
    if args.t is not None:
        rows.append(("decay_bound", fmt(bounds.decay_bound(n, p, args.t))))
    rows.append(("t_star_1d", bounds.t_star_1d(n, p)))
    if n >= 2:
        rows.append(("ent_bound_1d", fmt(bounds.ent_bound_1d(n, p))))
    if math.isqrt(n) ** 2 == n:
        certified = n > bounds.lattice_threshold(p)
        rows.append(("ent_bound_2d", fmt(bounds.ent_bound_2d(n, p, strict=False))))
        rows.append(("ent_bound_2d_certified", int(certified)))
        rows.append(("lattice_minimax_bound", fmt(bounds.lattice_minimax_bound(n, p))))
    T = args.T if args.T is not None else n
    for variant in bounds.THRESHOLD_VARIANTS:
        rows.append((f"threshold_{variant}", fmt(bounds.advantage_depth_threshold(T, p, variant))))
    _emit(_csv(rows), args.out)
    return EXIT_OK


def cmd_shearer(args) -> int:
    result = randomized_shearer_audit(args.n, args.trials, args.seed)
    rows = [("n", "trials", "seed", "min_slack", "worst_t"),
            (args.n, args.trials, args.seed, fmt(result.min_slack), result.worst_t)]
    _emit(_csv(rows), args.out)
    verdict = "min slack >= 0" if result.passed else "min slack < 0"
    print(f"verdict: {verdict} (tolerance 1e-7)", file=sys.stderr)
    return EXIT_OK if result.passed else EXIT_BOUND


def cmd_hybrid(args) -> int:
    try:
        spec = hybrid.load_scenario(args.scenario)
        if args.p is not None:
            spec.p = args.p
        scenario = spec.build()
    except hybrid.ScenarioError as exc:
        raise _InputError(str(exc)) from None
    check = hybrid.joint_entropy_check(scenario, spec.p, spec.t)
    try:
        gap = hybrid.replacement_gap(scenario, spec.p)
    except hybrid.BoundViolation as exc:
        print(f"bound violation: {exc}", file=sys.stderr)
        return EXIT_BOUND
    T = scenario.total_bits
    report = {
        "scenario": spec.name,
        "widths": list(scenario.widths),
        "t": spec.t,
        "p": spec.p,
        "S_joint": float(fmt(check.s_joint)),
        "entropy_lower_bound": float(fmt(check.lower_bound)),
        "entropy_slack": float(fmt(check.slack)),
        "entropy_check": check.passed,
        "klBits": float(fmt(gap.kl_bits)),
        "klNats": float(fmt(gap.kl_nats)),
        "oneNorm": float(fmt(gap.one_norm)),
        "pinskerRHS": float(fmt(gap.pinsker_rhs)),
        "outputKlBits": float(fmt(gap.output_kl_bits)),
        "decayCap": float(fmt(T * (1 - spec.p) ** spec.t)),
        "thresholds": {
            v: float(fmt(bounds.advantage_depth_threshold(T, spec.p, v)))
            for v in bounds.THRESHOLD_VARIANTS
        } if 0 < spec.p < 1 else None,
    }
    _emit(_json(report), args.out)
    _verdict(check.passed, "entropy and replacement checks")
    return EXIT_OK if check.passed else EXIT_BOUND


def cmd_lightcone(args) -> int:
    circuit = load_circuit(args.circuit)
    part = _cut(circuit.n, args.cut)
    report = lightcone.boundary_cone(circuit, part)
    data = json.loads(report.to_json())
    data["depth_entanglement_bound"] = lightcone.depth_entanglement_bound(circuit, part)
    _emit(_json(data), args.out)
    return EXIT_OK


def cmd_entangle(args) -> int:
    circuit = load_circuit(args.circuit)
    if circuit.n > MAX_SEARCH_QUBITS:
        raise QubitCapError(f"separable search is limited to {MAX_SEARCH_QUBITS} qubits")
    part = _cut(circuit.n, args.cut)
    rho = evolve(circuit, args.p)
    cap = er_upper_via_max_mixed(rho)
    bound, witness = er_upper_via_search(rho, part, restarts=args.restarts, seed=args.seed)
    rows = [("quantity", "value"), ("er_upper_max_mixed", fmt(cap)),
            ("er_upper_search", fmt(bound)), ("witness_components", len(witness))]
    ok = bound <= cap + 1e-9
    try:
        exact = entanglement_entropy_pure(rho, part)
        rows.append(("entanglement_entropy_pure", fmt(exact)))
        ok &= bound >= exact - 1e-7
    except NotPureError:
        pass
    cone = lightcone.depth_entanglement_bound(circuit, part)
    rows.append(("depth_entanglement_bound", cone))
    _emit(_csv(rows), args.out)
    _verdict(ok, "entanglement bound consistency")
    return EXIT_OK if ok else EXIT_BOUND


def _sci(x: float, digits: int = 4) -> str:
    mant, exp = f"{x:.{digits - 1}e}".split("e")
    return f"{mant}e{int(exp)}"


def cmd_estimate_p(args) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        p = bounds.estimate_p(bounds.DeviceSpec(args.t1, args.tg))
        if args.table:
            table = bounds.device_table_estimates()
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    lines = [f"p = {_sci(p)}", f"one significant figure: {_sci(bounds.round_sig(p), 1)}"]
    for label, t1_us, tg_ns, published in bounds.DEVICE_TABLE:
        if math.isclose(args.t1, t1_us * 1e-6) and math.isclose(args.tg, tg_ns * 1e-9):
            lines.append(f"tabulated value for {label} rounds to {_sci(published, 1)}")
    if args.table:
        lines.append("device,T1_s,Tg_s,p,p_1sf,tabulated")
        for label, spec, est, published in table:
            lines.append(",".join([label, fmt(spec.t1), fmt(spec.tg), fmt(est),
                                   _sci(bounds.round_sig(est), 1), _sci(published, 1)]))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nisqlimits", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def out(sp):
        sp.add_argument("-o", "--out", help="write output here instead of stdout")

    sp = sub.add_parser("simulate", help="per-layer entropy and bound table")
    sp.add_argument("circuit")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--cut", type=int, help="size of the left block (default n//2)")
    out(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("curve", help="entanglement ceiling versus qubit count (CSV)")
    sp.add_argument("--n-min", type=int, default=2)
    sp.add_argument("--n-max", type=int, required=True)
    sp.add_argument("--p", type=float, nargs="+", required=True)
    sp.add_argument("--topology", choices=("chain", "grid", "both"), default="chain")
    out(sp)
    sp.set_defaults(func=cmd_curve)

    sp = sub.add_parser("bounds", help="closed-form bounds for given n and p")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--t", type=int)
    sp.add_argument("--T", type=int, help="total device bits for the depth thresholds (default n)")
    out(sp)
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("shearer", help="randomized subset-entropy audit")
    sp.add_argument("n", type=int)
    sp.add_argument("trials", type=int)
    sp.add_argument("seed", type=int)
    out(sp)
    sp.set_defaults(func=cmd_shearer)

    sp = sub.add_parser("hybrid", help="exact transcript analysis of a scenario file")
    sp.add_argument("scenario")
    sp.add_argument("--p", type=float, help="override the file's noise strength")
    out(sp)
    sp.set_defaults(func=cmd_hybrid)

    sp = sub.add_parser("lightcone", help="backward light cone across a cut")
    sp.add_argument("circuit")
    sp.add_argument("--cut", type=int)
    out(sp)
    sp.set_defaults(func=cmd_lightcone)

    sp = sub.add_parser("entangle", help="upper bounds on relative entropy of entanglement")
    sp.add_argument("circuit")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--cut", type=int)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--restarts", type=int, default=8)
    out(sp)
    sp.set_defaults(func=cmd_entangle)

    sp = sub.add_parser("estimate-p", help="noise strength from T1 and gate time (seconds)")
    sp.add_argument("t1", type=float)
    sp.add_argument("tg", type=float)
    sp.add_argument("--table", action="store_true", help="also print the device table")
    out(sp)
    sp.set_defaults(func=cmd_estimate_p)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CircuitFormatError, _InputError, hybrid.ScenarioError, bounds.PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"error: {exc.filename}: no such file", file=sys.stderr)
        return EXIT_INPUT
    except CircuitValidationError as exc:
        print(f"invalid circuit: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except QubitCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
