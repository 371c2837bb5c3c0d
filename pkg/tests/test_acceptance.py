"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test records a one-line verdict; the lines are printed at the end of
the pytest run (see conftest.py) and when this file is run as a script.
Criterion 3 cannot be met by direct sampling at desk scale and is expected
to fail; see the decisions notes for the analysis.
"""

import math

import pytest

from h6magic import builders
from h6magic.builders import CircuitKind
from h6magic.codes import switch_mapping, verify_switch_mapping
from h6magic.dense import dense_verify_all
from h6magic.engines.compare import compare_engines
from h6magic.engines.faults import inject_faults
from h6magic.noise import annotate, h1_ratio
from h6magic.protocols import (
    SWITCH_INPUTS,
    ProtocolConfig,
    fit_sweep,
    mx_flip_breaks_switch,
    run_level1,
    run_level2,
    switch_preserves,
    sweep,
)
from h6magic.stats import fit_power_law, fit_ramsey, magic_bound, wilson

VERDICTS: dict[int, str] = {}


def _record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    VERDICTS[n] = line
    print(line)


def test_criterion_1_level1_scaling():
    pts = sweep("level1", ProtocolConfig(seed=0, shots=10**7), [1e-2, 3e-3, 1e-3])
    fit = fit_sweep(pts)
    ok = abs(fit.b - 2.0) <= 0.2 and 13 <= fit.A <= 52
    _record(1, ok, f"b={fit.b:.3f} (2.0+-0.2), A={fit.A:.1f} (26 within x2), 1e7 shots/point")
    assert ok


def test_criterion_2_level2_acceptance():
    got = {}
    for p in (1e-3, 1e-4):
        got[p] = run_level2(ProtocolConfig(level=2, p=p, shots=10**5, seed=0)).accept_rate
    ok = abs(got[1e-3] - 0.67) <= 0.02 and abs(got[1e-4] - 0.96) <= 0.01
    _record(2, ok, f"accept {got[1e-3]:.3f} at 1e-3 (0.67+-0.02), {got[1e-4]:.3f} at 1e-4 (0.96+-0.01)")
    assert ok


def test_criterion_3_level2_scaling():
    # 10^7 shots per point with repeat-until-success; the stated 10^8 at the
    # smallest point is out of reach on one core and would not change the verdict
    pts = sweep(
        "level2",
        ProtocolConfig(level=2, seed=0, shots=10**7, repeat_until_success=True),
        [3e-2, 1e-2, 3e-3],
    )
    usable = [(pt.p, pt.logical_error_rate) for pt in pts if pt.logical_error_rate > 0]
    detail = ", ".join(f"p={pt.p:g}: rate={pt.logical_error_rate:.2e} accept={pt.accept_rate:.2e}" for pt in pts)
    if len(usable) < 2:
        _record(3, False, f"fewer than two points with logical failures ({detail})")
        pytest.fail("level-2 sweep has too few logical failures to fit an exponent")
    fit = fit_power_law(usable)
    extrap = fit.predict(1e-3)
    ok = abs(fit.b - 4.0) <= 0.5 and abs(math.log10(extrap / 4.8e-10)) <= 1
    _record(3, ok, f"b={fit.b:.2f} (4.0+-0.5), A p^b at 1e-3 = {extrap:.2e} vs 4.8e-10")
    assert ok


def test_criterion_4_fault_distance():
    noise = h1_ratio(1e-3)
    counts = {}
    for kind in ("ft-prep-00", "level1", "y2-check", "code-switch-ft"):
        counts[kind] = inject_faults(annotate(builders.build(kind), noise)).counts["LOGICAL"]
    enc = inject_faults(annotate(builders.build("encoder"), noise)).max_observables_flipped()
    ok = all(v == 0 for v in counts.values()) and enc <= 1
    _record(4, ok, f"LOGICAL single faults {counts}; encoder max logicals flipped {enc}")
    assert ok


def test_criterion_5_code_switch_algebra():
    rows = switch_mapping().rows
    rows_ok = len(rows) == 10 and all(c.ok for c in verify_switch_mapping())
    preserved = all(switch_preserves(inp, ft) for inp in SWITCH_INPUTS for ft in (False, True))
    broken = mx_flip_breaks_switch()
    ok = rows_ok and preserved and broken
    _record(5, ok, f"10 mapping rows {rows_ok}, 4 input pairs preserved {preserved}, m_x flip detected as logical error {broken}")
    assert ok


def test_criterion_6_dense_identities():
    checks = dense_verify_all()
    ok = all(c.deviation < 1e-12 for c in checks)
    _record(6, ok, ", ".join(f"{c.identity}={c.deviation:.1e}" for c in checks))
    assert ok


def test_criterion_7_statistics():
    table = [(0, 0.99997), (2, 0.99986), (4, 0.9996), (6, 0.9993), (8, 0.9987)]
    fit = fit_ramsey([(L, s * 10_000, 10_000) for L, s in table], seed=0, steps=4000)
    fit_ok = 0.7e-4 <= fit.eps <= 1.5e-4 and 1e-5 <= fit.s <= 8e-5
    # Wilson coverage at z=1 against its nominal 68.3%
    import numpy as np

    rng = np.random.default_rng(0)
    cover = []
    for p in (0.01, 0.05, 0.2, 0.5):
        ks = rng.binomial(500, p, size=4000)
        cover.append(np.mean([(lambda ci: ci.lo <= p <= ci.hi)(wilson(k, 500)) for k in ks]))
    cov_ok = abs(float(np.mean(cover)) - math.erf(1 / math.sqrt(2))) < 0.03
    bound = magic_bound(1.3e-4, 0.075).bound
    bound_ok = abs(bound - 7.03e-5) < 0.005e-5
    ok = fit_ok and cov_ok and bound_ok
    _record(
        7, ok,
        f"eps={fit.eps:.3e} s={fit.s:.2e}, Wilson coverage {np.mean(cover):.3f}, magic_bound={bound:.3e}",
    )
    assert ok


ENGINE_CASES = [(k.value, {}) for k in CircuitKind if k is not CircuitKind.CNOT_VIA_TELEPORT] + [
    ("cnot-teleport", {"inputs": ("1", "0"), "readout_bases": ("Z", "Z")}),
    ("cnot-teleport", {"inputs": ("+", "+"), "readout_bases": ("X", "X"), "encoded": True}),
]


def test_criterion_8_engine_equivalence():
    worst = (1.0, "")
    bad = []
    for kind, opts in ENGINE_CASES:
        nc = annotate(builders.build(kind, **opts), h1_ratio(1e-2))
        cmp = compare_engines(nc, 10**5, seed=7)
        if not cmp.tests:
            bad.append(f"{kind}: no tests")
        elif not cmp.agrees(1e-3):
            bad.append(f"{kind}: p_min={cmp.p_min:.1e}")
        worst = min(worst, (cmp.p_min, kind))
    ok = not bad
    _record(8, ok, f"{len(ENGINE_CASES)} circuits, lowest Bonferroni p={worst[0]:.3g} ({worst[1]}) {'; '.join(bad)}")
    assert ok


def test_criterion_9_informational():
    r = run_level1(ProtocolConfig(p=1e-3, shots=10**7, seed=0))
    _record(
        9, True,
        f"informational: level-1 model at p=1e-3 gives logical error {r.logical_error_rate:.2e}; "
        "hardware magic-state infidelity 7e-5 and CH 2.3e-4 are not asserted",
    )


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
