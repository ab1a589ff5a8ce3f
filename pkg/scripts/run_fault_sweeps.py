#!/usr/bin/env python3
"""Exhaustive single-fault sweeps of the three recovery methods.

The verified methods must come back clean; the bare-ancilla method must
not (its failing locations are listed).
"""

import time

from ftqc.protocols import RecoveryPolicy, fault_tolerance_sweep


def main() -> None:
    for label, policy in (
        ("steane", RecoveryPolicy(method="steane")),
        ("shor", RecoveryPolicy(method="shor")),
        ("naive", RecoveryPolicy(method="naive", demo_mode=True,
                                 verify_ancilla=False)),
    ):
        start = time.time()
        report = fault_tolerance_sweep(policy)
        verdict = "fault tolerant" if report.ok else "NOT fault tolerant"
        print(f"{label:7s}: {report.locations} locations, "
              f"{report.injections} injections, "
              f"{len(report.failures)} logical failures -> {verdict} "
              f"({time.time() - start:.1f}s)")
        for index, where, species in report.failures[:8]:
            print(f"         location {index} {where} fault {species}")
        if len(report.failures) > 8:
            print(f"         ... {len(report.failures) - 8} more")


if __name__ == "__main__":
    main()
