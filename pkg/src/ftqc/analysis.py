"""Monte Carlo logical-error estimation, pseudothreshold location, and the
closed-form concatenation / block-size / resource formulas.

The quantum-memory experiment encodes a known logical state, runs N
recovery rounds under the stochastic noise model (each round preceded by
a configurable number of idle storage steps), applies one final ideal
recovery, and declares failure when a nontrivial logical operator is left
on the block.  Failure is judged against the full code space (logical X,
Y, or Z all count), the convention for protecting an unknown qubit.

Trials are independent work items: trial i draws its own counter-based
stream from (seed, i), so estimates are bit-identical for any worker
count and any scheduling order.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import Callable, Optional

import numpy as np

from ftqc.codes import steane_code
from ftqc.noise import NoiseModel
from ftqc.pauli import PauliString
from ftqc.protocols import (DATA, RecoveryPolicy, recover,
                            recovery_qubit_count, residual_logical_action)
from ftqc.rng import stream_rng
from ftqc.runner import Executor, FrameProtocolEngine, TableauProtocolEngine

CSV_COLUMNS = ("eps_store", "eps_gate", "method", "trials", "failures",
               "p_hat", "ci_low", "ci_high", "seed")


@dataclass(frozen=True)
class MemoryExperiment:
    """Configuration of one quantum-memory Monte Carlo experiment.

    ``storage_during_recovery`` selects the idle census: True ages the
    data during the recovery round's coupling and readout phases (the
    honest setting for threshold studies); False confines storage exposure
    to the explicit wait window, the flawless-recovery reading used to
    demonstrate clean quadratic error suppression.
    """
    method: str = "steane"          # steane | shor | naive | unencoded
    rounds: int = 1
    wait_steps: int = 1             # idle storage steps on the data per round
    repeat_rule: str = "defer-on-disagree"
    verify_ancilla: bool = True
    engine: str = "frame"           # frame | tableau (tableau: cross-checks)
    storage_during_recovery: bool = True

    def policy(self) -> RecoveryPolicy:
        return RecoveryPolicy(method=self.method, repeat_rule=self.repeat_rule,
                              verify_ancilla=self.verify_ancilla,
                              demo_mode=self.method == "naive")

    def config_items(self) -> dict:
        return dict(sorted(asdict(self).items()))


@dataclass
class LogicalErrorEstimate:
    p_hat: float
    trials: int
    failures: int
    ci_low: float
    ci_high: float
    seed: int
    config_digest: str


def wilson_interval(failures: int, trials: int, z: float = 1.959964) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    p = failures / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def config_digest(config: MemoryExperiment, noise: NoiseModel,
                  trials: int, seed: int) -> str:
    blob = json.dumps({"config": config.config_items(),
                       "noise": noise.config_items(),
                       "trials": trials, "seed": seed}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def run_memory_trial(config: MemoryExperiment, noise: NoiseModel,
                     rng: np.random.Generator) -> bool:
    """One trial; returns True on logical failure."""
    if config.method == "unencoded":
        engine = FrameProtocolEngine(1, rng)
        ex = Executor(engine, noise, rng)
        ex.live.add(1)
        for _ in range(config.rounds):
            for _ in range(config.wait_steps):
                ex.idle((1,))
        return engine.frame.error.weight() != 0
    code = steane_code()
    policy = config.policy()
    n = recovery_qubit_count(config.method)
    if config.engine == "frame":
        engine = FrameProtocolEngine(n, rng)
        ex = Executor(engine, noise, rng)
        ex.allow_factory_skip = True
        ex.live.update(DATA)
        for _ in range(config.rounds):
            for _ in range(config.wait_steps):
                ex.idle(DATA)
            if config.storage_during_recovery:
                recover(ex, policy, code)
            else:
                with ex.idle_suspended():
                    recover(ex, policy, code)
        residual = _data_error(engine)
        return residual_logical_action(residual, code) != "I"
    if config.engine == "tableau":
        return _run_memory_trial_tableau(config, noise, rng)
    raise ValueError(f"unknown engine {config.engine!r}")


def _data_error(engine: FrameProtocolEngine) -> PauliString:
    full = engine.frame.error
    return PauliString(7, full.x_bits[:7], full.z_bits[:7])


def _run_memory_trial_tableau(config: MemoryExperiment, noise: NoiseModel,
                              rng: np.random.Generator) -> bool:
    """Exact cross-check trial on the |0> logical state.

    Detects bit-type logical damage by certifying the final state against
    the full stabilizer group plus logical Z after an ideal recovery; a
    pure logical-phase residual leaves the zero state invariant and is not
    observable in this preparation (the frame estimator covers it).
    """
    from ftqc.protocols import encode_logical_zero

    code = steane_code()
    policy = config.policy()
    n = recovery_qubit_count(config.method)
    engine = TableauProtocolEngine(n, rng)
    ideal = Executor(engine, NoiseModel.ideal(), rng)
    encode_logical_zero(ideal, DATA)
    ex = Executor(engine, noise, rng)
    ex.live.update(DATA)
    for _ in range(config.rounds):
        for _ in range(config.wait_steps):
            ex.idle(DATA)
        recover(ex, policy, code)
    # ideal recovery: project the syndrome, correct, then certify
    syndrome = []
    for g in code.generators:
        value, _ = engine.tab.measure(_embed(g, n), rng)
        syndrome.append(0 if value == 1 else 1)
    from ftqc.codes import decode_syndrome
    correction = decode_syndrome(np.array(syndrome, dtype=np.uint8), code)
    for q in correction.support():
        letter = correction.letter(q)
        for k in ("X" if letter in "XY" else "", "Z" if letter in "ZY" else ""):
            if k:
                engine.tab.apply_gate(k, (q,))
    for g in code.generators:
        value, deterministic = engine.tab.measure(_embed(g, n), rng)
        if not deterministic or value != 1:
            return True
    value, deterministic = engine.tab.measure(_embed(code.logical_z[0], n), rng)
    return not (deterministic and value == 1)


def _embed(p: PauliString, n: int) -> PauliString:
    x = np.zeros(n, dtype=np.uint8)
    z = np.zeros(n, dtype=np.uint8)
    x[:7] = p.x_bits
    z[:7] = p.z_bits
    return PauliString(n, x, z, p.phase_exp)


def _run_chunk(args: tuple) -> int:
    config, noise, seed, start, stop = args
    failures = 0
    for i in range(start, stop):
        if run_memory_trial(config, noise, stream_rng(seed, i)):
            failures += 1
    return failures


def estimate_logical_error_rate(config: MemoryExperiment, noise: NoiseModel,
                                trials: int, seed: int,
                                workers: int = 1) -> LogicalErrorEstimate:
    """Monte Carlo logical error rate with a 95% Wilson interval.

    Deterministic in (config, noise, trials, seed); independent of
    ``workers`` because per-trial streams are keyed by trial index and
    aggregation is a plain sum.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    chunk = 1024
    ranges = [(config, noise, seed, lo, min(lo + chunk, trials))
              for lo in range(0, trials, chunk)]
    if workers > 1 and len(ranges) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            failures = sum(pool.map(_run_chunk, ranges))
    else:
        failures = sum(_run_chunk(r) for r in ranges)
    lo, hi = wilson_interval(failures, trials)
    return LogicalErrorEstimate(
        p_hat=failures / trials, trials=trials, failures=failures,
        ci_low=lo, ci_high=hi, seed=seed,
        config_digest=config_digest(config, noise, trials, seed))


def count_fault_locations(config: MemoryExperiment) -> dict[str, int]:
    """Census of one noiseless round's fault locations, by kind.

    This census fixes what 'a location' means for the pseudothreshold
    numbers reported by this package; different counting conventions move
    the threshold by O(1) factors.
    """
    n = recovery_qubit_count(config.method)
    rng = np.random.default_rng(0)
    engine = FrameProtocolEngine(n, rng)
    ex = Executor(engine, NoiseModel.ideal(), rng, record_locations=True)
    ex.live.update(DATA)
    for _ in range(config.wait_steps):
        ex.idle(DATA)
    if config.storage_during_recovery:
        recover(ex, config.policy(), steane_code())
    else:
        with ex.idle_suspended():
            recover(ex, config.policy(), steane_code())
    census: dict[str, int] = {}
    for loc in ex.locations:
        key = loc.kind if loc.kind != "gate" else f"gate:{loc.gate_kind}"
        census[key] = census.get(key, 0) + 1
    census["total"] = len(ex.locations)
    return census


# -- pseudothreshold -------------------------------------------------------------


@dataclass
class ThresholdEstimate:
    crossing: float
    bracket_low: float
    bracket_high: float
    evaluations: list[dict] = field(default_factory=list)
    census: Optional[dict[str, int]] = None
    one_sided: Optional[str] = None  # set when no crossing exists in bracket

    @property
    def relative_width(self) -> float:
        return (self.bracket_high - self.bracket_low) / self.crossing


def pseudothreshold(p_of_eps: Callable[[float], tuple[float, float, float, dict]],
                    reference: Callable[[float], float],
                    bracket: tuple[float, float],
                    target_relative_width: float = 0.4,
                    max_steps: int = 40) -> ThresholdEstimate:
    """Bisect for the noise strength where encoded performance crosses the
    reference curve.

    ``p_of_eps(eps)`` returns (p_hat, ci_low, ci_high, info); the reference
    is usually the unencoded single-location error eps itself.  Bisection
    is on log(eps); an evaluation decides a side only when its interval
    clears the reference, which the Monte Carlo evaluator arranges by
    escalating trials.  If both ends of the initial bracket fall on the
    same side, a one-sided bound is reported.
    """
    lo, hi = bracket
    evals: list[dict] = []

    def side(eps: float) -> int:
        p, ci_lo, ci_hi, info = p_of_eps(eps)
        ref = reference(eps)
        record = {"eps": eps, "p_hat": p, "ci_low": ci_lo, "ci_high": ci_hi,
                  "reference": ref}
        record.update(info)
        evals.append(record)
        if ci_hi < ref:
            return -1   # encoded beats the reference: below threshold
        if ci_lo > ref:
            return +1
        return -1 if p < ref else +1  # undecided interval: use the point estimate

    side_lo = side(lo)
    side_hi = side(hi)
    if side_lo == side_hi:
        bound = "upper" if side_lo > 0 else "lower"
        return ThresholdEstimate(crossing=hi if side_lo < 0 else lo,
                                 bracket_low=lo, bracket_high=hi,
                                 evaluations=evals, one_sided=bound)
    for _ in range(max_steps):
        if (hi - lo) / math.sqrt(lo * hi) <= target_relative_width:
            break
        mid = math.sqrt(lo * hi)
        if side(mid) == side_lo:
            lo = mid
        else:
            hi = mid
    return ThresholdEstimate(crossing=math.sqrt(lo * hi), bracket_low=lo,
                             bracket_high=hi, evaluations=evals)


def mc_threshold_evaluator(config: MemoryExperiment, seed: int,
                           trials_schedule: tuple[int, ...] = (2000, 8000, 32000, 128000),
                           workers: int = 1,
                           vary: str = "all") -> Callable[[float], tuple]:
    """Monte Carlo evaluator for ``pseudothreshold`` with trial escalation.

    Per-round failure probability under the one-knob noise family; trials
    escalate until the Wilson interval clears the reference line eps.
    Each evaluation uses a seed stream derived from the eps grid index so
    reruns are reproducible.
    """
    counter = {"calls": 0}

    def evaluate(eps: float) -> tuple[float, float, float, dict]:
        noise = _family(eps, vary)
        call_index = counter["calls"]
        counter["calls"] += 1
        total_trials = 0
        failures = 0
        for level, trials in enumerate(trials_schedule):
            extra = trials - total_trials
            if extra <= 0:
                continue
            sub_seed = (seed * 1_000_003 + call_index * 1009 + level)
            est = estimate_logical_error_rate(config, noise, extra, sub_seed,
                                              workers=workers)
            failures += est.failures
            total_trials += extra
            lo, hi = wilson_interval(failures, total_trials)
            if hi < eps or lo > eps:
                break
        lo, hi = wilson_interval(failures, total_trials)
        return failures / total_trials, lo, hi, {"trials": total_trials,
                                                 "failures": failures}

    return evaluate


def _family(eps: float, vary: str) -> NoiseModel:
    if vary == "all":
        return NoiseModel.uniform(eps)
    if vary == "store":
        return NoiseModel.uniform(eps, gates=False, prep=False, meas=False)
    if vary == "gate":
        return NoiseModel.uniform(eps, store=False, prep=False, meas=False)
    raise ValueError(f"unknown vary mode {vary!r}")


def flow_surrogate_evaluator(coefficient: float = 21.0) -> Callable[[float], tuple]:
    """Analytic level-1 surrogate: encoded error = coefficient * eps^2."""

    def evaluate(eps: float) -> tuple[float, float, float, dict]:
        p = coefficient * eps * eps
        return p, p, p, {"trials": 0, "failures": 0}

    return evaluate


# -- closed forms ----------------------------------------------------------------


@dataclass
class FlowTrace:
    p0: float
    coefficient: float
    levels: int
    p_per_level: list[float]

    @property
    def monotone_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.p_per_level, self.p_per_level[1:]))


def concatenation_flow(p0: float, levels: int, coefficient: float = 21.0) -> FlowTrace:
    """Level recursion p_{L+1} = coefficient * p_L^2.

    The fixed point sits at 1/coefficient: start below it and the sequence
    collapses doubly exponentially; start above and it blows up.
    """
    if not 0.0 <= p0 <= 1.0:
        raise ValueError("p0 must lie in [0,1]")
    if levels < 0:
        raise ValueError("levels must be >= 0")
    ps = [p0]
    for _ in range(levels):
        ps.append(coefficient * ps[-1] ** 2)
    return FlowTrace(p0=p0, coefficient=coefficient, levels=levels, p_per_level=ps)


def block_error_tradeoff(eps: float, b: float, t: float) -> float:
    """Failure weight (t^b * eps)^(t+1) for a distance-(2t+1) block whose
    syndrome takes ~t^b steps to extract."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0,1)")
    if b <= 0 or t < 1:
        raise ValueError("need b > 0 and t >= 1")
    return float((t ** b * eps) ** (t + 1))


def optimal_t(eps: float, b: float) -> float:
    """Large-t minimizer t* = e^-1 * eps^(-1/b) of the block-error weight."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0,1)")
    if b <= 0:
        raise ValueError("need b > 0")
    return math.exp(-1.0) * eps ** (-1.0 / b)


def min_block_error(eps: float, b: float) -> float:
    """Block error at the optimal t: exp(-e^-1 * b * eps^(-1/b))."""
    return math.exp(-math.exp(-1.0) * b * eps ** (-1.0 / b))


def numeric_optimal_t(eps: float, b: float, tol: float = 1e-10) -> float:
    """Golden-section minimizer of the large-t objective t*ln(t^b*eps).

    The closed forms drop the +1 in the exponent (valid as t grows); this
    numeric check minimizes the same asymptotic objective and lands on the
    closed-form optimum to solver precision.
    """
    def objective(t: float) -> float:
        return t * (b * math.log(t) + math.log(eps))

    lo, hi = 1.0, max(4.0, 10.0 * optimal_t(eps, b))
    phi = (math.sqrt(5.0) - 1) / 2
    a, c = lo, hi
    x1 = c - phi * (c - a)
    x2 = a + phi * (c - a)
    f1, f2 = objective(x1), objective(x2)
    while c - a > tol * max(1.0, c):
        if f1 < f2:
            c, x2, f2 = x2, x1, f1
            x1 = c - phi * (c - a)
            f1 = objective(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + phi * (c - a)
            f2 = objective(x2)
    return (a + c) / 2


def required_block_size(eps: float, eps0: float, horizon: float,
                        n: Optional[int] = None, t: Optional[int] = None) -> float:
    """Block size needed to survive ``horizon`` operations at physical error
    eps under threshold eps0: [log(eps0*T)/log(eps0/eps)]^e, with exponent
    e = log2(7) by default or log(n)/log(t+1) for an (n, t) code family.
    A horizon at or below 1/eps0 needs no coding (size 1).
    """
    if not 0 < eps < eps0:
        raise ValueError("requires eps below the threshold eps0")
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if (n is None) != (t is None):
        raise ValueError("supply both n and t or neither")
    exponent = math.log(7, 2) if n is None else math.log(n) / math.log(t + 1)
    numerator = math.log(eps0 * horizon)
    if numerator <= 0:
        return 1.0
    bracket = numerator / math.log(eps0 / eps)
    return max(1.0, bracket ** exponent)


def factoring_resources(bits: int) -> dict[str, int]:
    """Machine sizing for factoring an n-bit number: 5n qubits and 38*n^3
    three-qubit gates."""
    if bits < 0:
        raise ValueError("bits must be >= 0")
    return {"qubits": 5 * bits, "toffoli_count": 38 * bits ** 3}


# -- output files ----------------------------------------------------------------


def sweep_row(eps_store: float, eps_gate: float, method: str,
              est: LogicalErrorEstimate) -> dict:
    return {"eps_store": eps_store, "eps_gate": eps_gate, "method": method,
            "trials": est.trials, "failures": est.failures, "p_hat": est.p_hat,
            "ci_low": est.ci_low, "ci_high": est.ci_high, "seed": est.seed}


def format_cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_csv(rows: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([format_cell(row[c]) for c in CSV_COLUMNS])


def write_json_summary(payload: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")
