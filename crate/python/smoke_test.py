#!/usr/bin/env python3
"""Smoke test for the qmac_py extension module.

Builds nothing itself: expects `cargo build --release -p qmac-py` to have
produced target/release/libqmac_py.so. Copies the shared object into a temp
directory under an importable name, imports it, and exercises the main
surface.
"""

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        ROOT / "target" / "release" / "libqmac_py.so",
        ROOT / "target" / "debug" / "libqmac_py.so",
    ]
    src = next((p for p in candidates if p.exists()), None)
    if src is None:
        sys.exit("build the extension first: cargo build --release -p qmac-py")
    stage = Path(tempfile.mkdtemp(prefix="qmac_py_"))
    shutil.copy2(src, stage / "qmac_py.so")
    sys.path.insert(0, str(stage))
    import qmac_py

    return qmac_py


def approx(a, b, tol):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    q = load_module()

    # states and entropies
    pi = q.DensityOperator.maximally_mixed(2)
    approx(pi.entropy(), 1.0, 1e-12)
    skew = q.DensityOperator.from_probabilities([0.75, 0.25])
    approx(skew.entropy(), 0.811278, 1e-6)
    approx(pi.trace_distance(skew), 0.5, 1e-9)

    # channels
    delta = q.QuantumChannel.dephasing(2)
    rho = q.DensityOperator([[0.5 + 0j, 0.5 + 0j], [0.5 + 0j, 0.5 + 0j]])
    out = delta.apply(rho)
    approx(out.trace_distance(pi), 0.0, 1e-9)

    # the collective phase-flip region at maximally mixed inputs matches the
    # closed form (2, 2, 3)
    mp = q.QuantumChannel.phase_flip(2, [0.5, 0.5])
    pent = q.region_for_inputs(mp, pi, pi)
    approx(pent.r1, 2.0, 1e-6)
    approx(pent.r2, 2.0, 1e-6)
    approx(pent.rsum, 3.0, 1e-6)
    closed = q.phase_flip_region_closed_form(2, [0.5, 0.5])
    approx(pent.rsum, closed.rsum, 1e-6)
    assert pent.contains(1.0, 2.0)
    assert not pent.contains(2.0, 2.0)

    # successive decoding reaches corner Q = (1, 2)
    r_alice, r_bob = q.successive_decode_rates(mp, pi, pi)
    approx(r_alice, 1.0, 1e-9)
    approx(r_bob, 2.0, 1e-9)

    # single-sender capacities
    value, converged = q.ea_capacity_single(q.QuantumChannel.identity(2), starts=3)
    approx(value, 2.0, 1e-3)
    assert converged

    # sum rate of the uniform phase flip
    value, _ = q.sum_rate_bound(mp, 2, 2, starts=3)
    approx(value, 3.0, 1e-3)

    # packing simulation report round-trips as JSON
    report = json.loads(
        q.simulate_packing(delta, pi, n=3, rate=0.66, trials=2, seed=1)
    )
    assert report["n_codewords"] == 2
    assert 0.0 <= report["avg_success"] <= 1.0

    # entropy lemma sweep
    lemmas = json.loads(q.verify_entropy_lemmas(trials=50, seed=3))
    assert lemmas["pass"]
    assert lemmas["duality_max_violation"] <= 1e-8

    # 4 - H(p) for a skewed flip
    pent = q.phase_flip_region_closed_form(2, [0.75, 0.25])
    approx(pent.rsum, 4.0 - (-0.75 * math.log2(0.75) - 0.25 * math.log2(0.25)), 1e-12)

    print("smoke test passed")


if __name__ == "__main__":
    main()
