"""Batch experiment runner.

Subcommands::

    code-info       print the seven-qubit code: generators, logicals, checks
    encode          emit the encoder circuit in text form
    syndrome-demo   inject an error, extract and decode its syndrome
    recover-demo    inject an error, run one full recovery round
    mc              Monte Carlo memory experiment over an epsilon grid
    threshold       bisect for the pseudothreshold (Monte Carlo or the
                    analytic level-1 recursion surrogate)
    flow            the level recursion p -> coefficient * p^2
    tradeoff        block-error tradeoff (t^b eps)^(t+1) and its optimum
    resources       factoring machine sizing (5n qubits, 38 n^3 Toffolis)
    toffoli-verify  dense check of the measurement-based Toffoli gadget
    fluxon-demo     A5 flux-pair NOT gate and exchange calculus checks

Randomized subcommands require an explicit --seed; identical argv and
seed give byte-identical CSV output for any --workers value.  Flags
override --config file entries (flat ``key = value`` lines), which
override defaults; the effective configuration is echoed into the JSON
summary.  Exit codes: 0 success, 2 configuration error, 3 verification
failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from ftqc import analysis, builders
from ftqc.analysis import (MemoryExperiment, concatenation_flow,
                           count_fault_locations, estimate_logical_error_rate,
                           factoring_resources, flow_surrogate_evaluator,
                           mc_threshold_evaluator, min_block_error,
                           numeric_optimal_t, optimal_t, pseudothreshold,
                           block_error_tradeoff, required_block_size,
                           write_csv, write_json_summary)
from ftqc.codes import dump_code, steane_code, syndrome_of, validate_code
from ftqc.fluxon import FiniteGroup, FluxRegister, a5_not_demo, charge_zero_pair
from ftqc.noise import NoiseModel
from ftqc.pauli import PauliString
from ftqc.protocols import (DATA, RecoveryPolicy, encode_logical_zero, recover,
                            recovery_qubit_count, verify_toffoli_bare)
from ftqc.rng import stream_rng
from ftqc.runner import Executor, TableauProtocolEngine
from ftqc.statevector import StateVector


class ConfigError(ValueError):
    pass


def _parse_config_file(path: str) -> dict[str, str]:
    items: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key in items:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            items[key] = value
    return items


NOISE_KEYS = ("eps_store", "eps_prep", "eps_meas", "leak_rate", "multiqubit_mode",
              "eps_gate.h", "eps_gate.p", "eps_gate.pinv", "eps_gate.x",
              "eps_gate.z", "eps_gate.cnot", "eps_gate.toffoli")
PROTOCOL_KEYS = ("method", "repeat_policy", "verify_ancilla", "max_retries",
                 "rounds", "wait_steps", "storage_during_recovery")
RUN_KEYS = ("trials", "seed", "workers", "eps_grid", "vary")


def _apply_config_file(args: argparse.Namespace) -> None:
    """Config-file values fill in any flag the user left at its default."""
    if not getattr(args, "config", None):
        return
    items = _parse_config_file(args.config)
    known = NOISE_KEYS + PROTOCOL_KEYS + RUN_KEYS
    for key, value in items.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        attr = key.replace(".", "_").replace("-", "_")
        if not hasattr(args, attr):
            raise ConfigError(f"config key {key!r} does not apply to this subcommand")
        if attr not in args.explicit_flags:
            setattr(args, attr, _convert_like(getattr(args, attr), value))


def _convert_like(current, value: str):
    if isinstance(current, bool):
        if value.lower() in ("1", "true", "yes", "on"):
            return True
        if value.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {value!r}")
    if isinstance(current, int) and not isinstance(current, bool):
        return int(value)
    if isinstance(current, float):
        return float(value)
    return value


class _TrackingParser(argparse.ArgumentParser):
    """Remembers which destinations the user set explicitly."""

    def parse_args(self, argv=None, namespace=None):  # type: ignore[override]
        args = super().parse_args(argv, namespace)
        explicit = set()
        argv = sys.argv[1:] if argv is None else argv
        for token in argv:
            if token.startswith("--"):
                explicit.add(token[2:].split("=", 1)[0].replace("-", "_"))
        args.explicit_flags = explicit
        return args


def _noise_from_args(args: argparse.Namespace) -> NoiseModel:
    gate_map = {}
    for kind in ("h", "p", "pinv", "x", "z", "cnot", "toffoli"):
        value = getattr(args, f"eps_gate_{kind}", None)
        if value is None:
            value = args.eps_gate
        if value > 0:
            gate_map[kind] = value
    return NoiseModel(eps_store=args.eps_store, eps_gate=gate_map,
                      eps_prep=args.eps_prep, eps_meas=args.eps_meas,
                      leak_rate=args.leak_rate,
                      multiqubit_mode=args.multiqubit_mode)


def _experiment_from_args(args: argparse.Namespace) -> MemoryExperiment:
    return MemoryExperiment(method=args.method, rounds=args.rounds,
                            wait_steps=args.wait_steps,
                            repeat_rule=args.repeat_policy,
                            verify_ancilla=args.verify_ancilla,
                            storage_during_recovery=args.storage_during_recovery)


def _add_noise_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps-store", type=float, default=0.0)
    p.add_argument("--eps-gate", type=float, default=0.0,
                   help="one rate for every gate kind")
    for kind in ("h", "p", "pinv", "x", "z", "cnot", "toffoli"):
        p.add_argument(f"--eps-gate-{kind}", type=float, default=None)
    p.add_argument("--eps-prep", type=float, default=0.0)
    p.add_argument("--eps-meas", type=float, default=0.0)
    p.add_argument("--leak-rate", type=float, default=0.0)
    p.add_argument("--multiqubit-mode", default="all-operands",
                   choices=("all-operands", "uniform-nontrivial"))


def _add_protocol_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", default="steane", choices=("steane", "shor", "naive",
                                                          "unencoded"))
    p.add_argument("--repeat-policy", default="defer-on-disagree",
                   choices=("defer-on-disagree", "repeat-until-agree",
                            "accept-trivial-once"))
    p.add_argument("--verify-ancilla", action="store_true", default=True)
    p.add_argument("--no-verify-ancilla", dest="verify_ancilla", action="store_false")
    p.add_argument("--max-retries", type=int, default=16)
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--wait-steps", type=int, default=1)
    p.add_argument("--storage-during-recovery", action="store_true", default=True)
    p.add_argument("--no-storage-during-recovery", dest="storage_during_recovery",
                   action="store_false")


def build_parser() -> _TrackingParser:
    parser = _TrackingParser(prog="ftqc", description=__doc__,
                             formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("code-info", help="print the seven-qubit code definition "
                                         "and its validation report")
    p.add_argument("--json", help="write a JSON summary here")

    p = sub.add_parser("encode", help="emit the encoder circuit (text form)")
    p.add_argument("--out", help="write the circuit here instead of stdout")

    p = sub.add_parser("syndrome-demo", help="inject a Pauli error and show the "
                                             "measured syndrome and decoded correction")
    p.add_argument("--error", default="X3", help="letter+position, e.g. X3 or Z7")
    p.add_argument("--method", default="steane", choices=("steane", "shor", "naive"))
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("recover-demo", help="inject an error and run one full "
                                            "recovery round under optional noise")
    p.add_argument("--error", default="X5")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--config", help="flat key = value config file")
    _add_noise_flags(p)
    _add_protocol_flags(p)

    p = sub.add_parser("mc", help="memory-experiment Monte Carlo over an eps grid")
    p.add_argument("--eps-grid", default="",
                   help="comma list of eps values applied via --vary")
    p.add_argument("--vary", default="store", choices=("store", "gate", "all"),
                   help="which noise components the grid drives")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", help="write the sweep table here")
    p.add_argument("--json", help="write the run summary here")
    p.add_argument("--config", help="flat key = value config file")
    _add_noise_flags(p)
    _add_protocol_flags(p)

    p = sub.add_parser("threshold", help="pseudothreshold bisection: where encoded "
                                         "performance crosses the unencoded line")
    p.add_argument("--surrogate", action="store_true",
                   help="use the analytic level-1 recursion instead of Monte Carlo")
    p.add_argument("--coefficient", type=float, default=21.0)
    p.add_argument("--bracket", default="1e-4,1e-1")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--trials-schedule", default="2000,8000,32000,128000")
    p.add_argument("--target-width", type=float, default=0.4)
    p.add_argument("--vary", default="all", choices=("store", "gate", "all"))
    p.add_argument("--json", help="write the estimate here")
    p.add_argument("--csv", help="write the evaluation table here")
    p.add_argument("--config", help="flat key = value config file")
    _add_noise_flags(p)
    _add_protocol_flags(p)

    p = sub.add_parser("flow", help="level recursion p -> c * p^2 with fixed "
                                    "point 1/c")
    p.add_argument("--p0", type=float, required=True)
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--coefficient", type=float, default=21.0)
    p.add_argument("--json", help="write the trace here")

    p = sub.add_parser("tradeoff", help="block-error weight (t^b eps)^(t+1), its "
                                        "optimal t and minimum")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--b", type=float, default=4.0)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--json")

    p = sub.add_parser("resources", help="factoring machine sizing: 5n qubits, "
                                         "38 n^3 Toffoli gates")
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--json")

    p = sub.add_parser("toffoli-verify", help="dense verification of the "
                                              "measurement-based Toffoli gadget")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--random-states", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--json")

    p = sub.add_parser("fluxon-demo", help="A5 flux-pair calculus: NOT gate, "
                                           "exchange law, charge-zero invariance")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--exhaustive", action="store_true",
                   help="also run the full 3600-case exchange check")
    p.add_argument("--json")

    return parser


# -- subcommand bodies ------------------------------------------------------------


def _cmd_code_info(args) -> int:
    code = steane_code()
    report = validate_code(code)
    print("seven-qubit code [[7,1,3]]")
    print(dump_code(code), end="")
    print(f"check matrix rows (z-part | x-part):")
    for row in code.hbar:
        z, x = row[:7], row[7:]
        print("  " + "".join(map(str, z)) + " | " + "".join(map(str, x)))
    print(f"validation: {'pass' if report.ok else 'FAIL'}")
    for failure in report.failures:
        print("  -", failure)
    if args.json:
        write_json_summary({"valid": report.ok, "failures": report.failures,
                            "generators": [str(g) for g in code.generators]},
                           args.json)
    return 0 if report.ok else 3


def _cmd_encode(args) -> int:
    text = builders.build_encoder().to_text()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote encoder circuit to {args.out}")
    else:
        print(text, end="")
    return 0


def _parse_error(text: str) -> PauliString:
    text = text.strip().upper()
    err = PauliString.identity(7)
    i = 0
    while i < len(text):
        letter = text[i]
        if letter not in "XYZ":
            raise ConfigError(f"bad error spec {text!r}")
        i += 1
        j = i
        while j < len(text) and text[j].isdigit():
            j += 1
        if j == i:
            raise ConfigError(f"bad error spec {text!r}")
        err = err * PauliString.single(7, int(text[i:j]), letter)
        i = j
    return err


def _cmd_syndrome_demo(args) -> int:
    code = steane_code()
    err = _parse_error(args.error)
    syn = syndrome_of(err, code)
    from ftqc.codes import decode_syndrome
    corr = decode_syndrome(syn, code)
    rng = stream_rng(args.seed, 0)
    n = recovery_qubit_count(args.method)
    engine = TableauProtocolEngine(n, rng)
    ideal = Executor(engine, NoiseModel.ideal(), rng)
    encode_logical_zero(ideal, DATA)
    engine.tab.inject_pauli(_embed7(err, n))
    policy = RecoveryPolicy(method=args.method, demo_mode=args.method == "naive",
                            verify_ancilla=args.method != "naive")
    ex = Executor(engine, NoiseModel.ideal(), rng)
    ex.live.update(DATA)
    outcome = recover(ex, policy, code)
    print(f"injected error : {err}")
    print(f"syndrome       : {''.join(map(str, syn))}  (bit checks | phase checks)")
    print(f"decoded fix    : {corr}")
    print(f"measured fix   : {outcome.correction}  via {args.method} extraction")
    print(f"agreement      : {'yes' if outcome.correction == corr else 'NO'}")
    return 0 if outcome.correction == corr else 3


def _embed7(p: PauliString, n: int) -> PauliString:
    x = np.zeros(n, dtype=np.uint8)
    z = np.zeros(n, dtype=np.uint8)
    x[:7] = p.x_bits
    z[:7] = p.z_bits
    return PauliString(n, x, z, p.phase_exp)


def _cmd_recover_demo(args) -> int:
    code = steane_code()
    err = _parse_error(args.error)
    noise = _noise_from_args(args)
    rng = stream_rng(args.seed, 0)
    n = recovery_qubit_count(args.method)
    engine = TableauProtocolEngine(n, rng)
    ideal = Executor(engine, NoiseModel.ideal(), rng)
    encode_logical_zero(ideal, DATA)
    engine.tab.inject_pauli(_embed7(err, n))
    policy = RecoveryPolicy(method=args.method, repeat_rule=args.repeat_policy,
                            verify_ancilla=args.verify_ancilla,
                            max_ancilla_retries=args.max_retries,
                            demo_mode=args.method == "naive")
    ex = Executor(engine, noise, rng)
    ex.live.update(DATA)
    outcome = recover(ex, policy, code)
    print(f"injected error    : {err}")
    print(f"syndrome history  : {[(h, ''.join(map(str, s))) for h, s in outcome.syndrome_history]}")
    print(f"applied correction: {outcome.correction}")
    print(f"deferred          : {outcome.deferred}")
    print(f"ancillas consumed : {outcome.ancillas_consumed}")
    return 0


def _cmd_mc(args) -> int:
    config = _experiment_from_args(args)
    base_noise = _noise_from_args(args)
    if args.eps_grid:
        grid = [float(tok) for tok in args.eps_grid.split(",") if tok]
    else:
        grid = [None]  # single run with the explicit noise flags
    rows = []
    for eps in grid:
        if eps is None:
            noise = base_noise
        elif args.vary == "store":
            noise = NoiseModel.uniform(eps, gates=False, prep=False, meas=False)
        elif args.vary == "gate":
            noise = NoiseModel.uniform(eps, store=False, prep=False, meas=False)
        else:
            noise = NoiseModel.uniform(eps)
        est = estimate_logical_error_rate(config, noise, args.trials, args.seed,
                                          workers=args.workers)
        rows.append(analysis.sweep_row(noise.eps_store, noise.gate_eps("cnot"),
                                       config.method, est))
        print(f"eps_store={noise.eps_store:g} eps_gate={noise.gate_eps('cnot'):g} "
              f"p_hat={est.p_hat:.6g} ci=({est.ci_low:.3g},{est.ci_high:.3g}) "
              f"failures={est.failures}/{est.trials}")
    if args.csv:
        write_csv(rows, args.csv)
        print(f"wrote {args.csv}")
    if args.json:
        payload = {"config": config.config_items(),
                   "noise": base_noise.config_items(),
                   "vary": args.vary, "trials": args.trials, "seed": args.seed,
                   "rows": rows,
                   "census": count_fault_locations(config)}
        write_json_summary(payload, args.json)
        print(f"wrote {args.json}")
    return 0


def _cmd_threshold(args) -> int:
    lo, hi = (float(t) for t in args.bracket.split(","))
    config = _experiment_from_args(args)
    if args.surrogate:
        evaluator = flow_surrogate_evaluator(args.coefficient)
        target = 1e-9
    else:
        schedule = tuple(int(t) for t in args.trials_schedule.split(","))
        evaluator = mc_threshold_evaluator(config, args.seed, schedule,
                                           workers=args.workers, vary=args.vary)
        target = args.target_width
    est = pseudothreshold(evaluator, lambda e: e, (lo, hi),
                          target_relative_width=target)
    census = count_fault_locations(config) if not args.surrogate else None
    print(f"crossing estimate : {est.crossing:.4e}")
    print(f"bracket           : ({est.bracket_low:.4e}, {est.bracket_high:.4e})")
    print(f"relative width    : {est.relative_width:.3f}")
    if est.one_sided:
        print(f"NOTE: one-sided {est.one_sided} bound only")
    if census:
        print(f"location census   : {census}")
    if args.csv:
        rows = [analysis.sweep_row(ev["eps"], ev["eps"] if args.vary != "store" else 0.0,
                                   config.method, _est_from_eval(ev, args.seed))
                for ev in est.evaluations]
        write_csv(rows, args.csv)
    if args.json:
        write_json_summary({"crossing": est.crossing,
                            "bracket": [est.bracket_low, est.bracket_high],
                            "relative_width": est.relative_width,
                            "one_sided": est.one_sided,
                            "evaluations": est.evaluations,
                            "census": census,
                            "config": config.config_items(),
                            "seed": args.seed}, args.json)
    return 0


def _est_from_eval(ev: dict, seed: int):
    from ftqc.analysis import LogicalErrorEstimate
    return LogicalErrorEstimate(p_hat=ev["p_hat"], trials=ev["trials"],
                                failures=ev["failures"], ci_low=ev["ci_low"],
                                ci_high=ev["ci_high"], seed=seed, config_digest="")


def _cmd_flow(args) -> int:
    trace = concatenation_flow(args.p0, args.levels, args.coefficient)
    for level, p in enumerate(trace.p_per_level):
        print(f"level {level}: {p:.12g}")
    fixed = 1.0 / args.coefficient
    print(f"fixed point 1/coefficient = {fixed:.12g}")
    if args.json:
        write_json_summary({"p0": args.p0, "coefficient": args.coefficient,
                            "levels": args.levels,
                            "p_per_level": trace.p_per_level}, args.json)
    return 0


def _cmd_tradeoff(args) -> int:
    t_star = optimal_t(args.eps, args.b)
    p_min = min_block_error(args.eps, args.b)
    t_num = numeric_optimal_t(args.eps, args.b)
    print(f"eps={args.eps:g} b={args.b:g}")
    print(f"optimal t (closed form)  : {t_star:.6g}")
    print(f"optimal t (numeric)      : {t_num:.6g}")
    print(f"minimum block error      : {p_min:.6g}")
    if args.t is not None:
        print(f"block error at t={args.t:g} : {block_error_tradeoff(args.eps, args.b, args.t):.6g}")
    if args.json:
        write_json_summary({"eps": args.eps, "b": args.b, "optimal_t": t_star,
                            "numeric_t": t_num, "min_block_error": p_min}, args.json)
    return 0


def _cmd_resources(args) -> int:
    res = factoring_resources(args.bits)
    print(f"bits={args.bits}: qubits={res['qubits']} toffolis={res['toffoli_count']}")
    if args.json:
        write_json_summary({"bits": args.bits, **res}, args.json)
    return 0


def _cmd_toffoli_verify(args) -> int:
    rng = stream_rng(args.seed, 0)
    states = []
    for _ in range(args.random_states):
        amps = rng.normal(size=8) + 1j * rng.normal(size=8)
        states.append(StateVector.from_amplitudes(amps))
    report = verify_toffoli_bare(states, tol=args.tol)
    print(f"branches checked    : {report['branches']}")
    print(f"worst fidelity      : {report['worst_fidelity']:.15f}")
    print(f"probability defect  : {report['probability_defect']:.3e}")
    print("verdict             :", "pass" if report["ok"] else "FAIL")
    if args.json:
        write_json_summary(report, args.json)
    return 0 if report["ok"] else 3


def _cmd_fluxon_demo(args) -> int:
    rng = stream_rng(args.seed, 0)
    report = a5_not_demo(rng)
    print(f"group {report['group']} of order {report['order']}; "
          f"fluxes u0={report['u0']} u1={report['u1']} probe v={report['v']}")
    for line in report["trace"]:
        print("  " + line)
    for name, ok in report["checks"].items():
        print(f"  {name}: {'ok' if ok else 'FAIL'}")
    extras = {}
    if args.exhaustive:
        group = FiniteGroup.alternating(5)
        bad = 0
        for u1 in range(group.order):
            for u2 in range(group.order):
                reg = FluxRegister.basis(group, (u1, u2))
                reg.exchange(1, 2)
                want = (u2, group.conjugate(u1, u2))
                if reg.support() != {want}:
                    bad += 1
        extras["exchange_cases"] = group.order ** 2
        extras["exchange_failures"] = bad
        print(f"  exchange law over {group.order ** 2} flux pairs: "
              f"{'ok' if bad == 0 else f'{bad} FAILURES'}")
        cz = charge_zero_pair(group, group.element(report["u0"]))
        invariant = True
        base = cz.support()
        for v in range(group.order):
            trial = FluxRegister(group, 2,
                                 {(u,) + (v,): a for (u,), a in cz.amps.items()})
            trial.pull_through(1, 2)
            if {(k[0],) for k in trial.support()} != base:
                invariant = False
        extras["charge_zero_invariant"] = invariant
        print(f"  charge-zero class state invariant under all {group.order} "
              f"outer fluxes: {'ok' if invariant else 'FAIL'}")
        report["checks"].update({"exchange_law": bad == 0,
                                 "charge_zero_invariance": invariant})
    ok = all(report["checks"].values())
    if args.json:
        write_json_summary({**report, **extras}, args.json)
    return 0 if ok else 3


_COMMANDS = {
    "code-info": _cmd_code_info,
    "encode": _cmd_encode,
    "syndrome-demo": _cmd_syndrome_demo,
    "recover-demo": _cmd_recover_demo,
    "mc": _cmd_mc,
    "threshold": _cmd_threshold,
    "flow": _cmd_flow,
    "tradeoff": _cmd_tradeoff,
    "resources": _cmd_resources,
    "toffoli-verify": _cmd_toffoli_verify,
    "fluxon-demo": _cmd_fluxon_demo,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_config_file(args)
        return _COMMANDS[args.command](args)
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
