import json

import pytest

from h6magic import builders
from h6magic.protocols import (
    ProtocolConfig,
    group_category,
    ramsey_counts,
    ramsey_table,
    run_code_switch,
    run_level1,
    run_level2,
    run_ramsey_proxy,
    sweep,
)


def test_noiseless_level1_is_perfect():
    for mode in ("ft", "nonft"):
        r = run_level1(ProtocolConfig(p=0.0, shots=2000, mode=mode))
        assert r.accept_rate == 1.0
        assert r.logical_error_rate == 0.0


def test_noiseless_level1_tableau_engine():
    r = run_level1(ProtocolConfig(p=0.0, shots=200, engine="tableau"))
    assert r.accept_rate == 1.0 and r.logical_error_rate == 0.0


def test_noiseless_level2_is_perfect():
    r = run_level2(ProtocolConfig(level=2, p=0.0, shots=500))
    assert r.accept_rate == 1.0
    assert r.logical_error_rate == 0.0
    assert r.extra["qubits"] == 160


def test_noiseless_ramsey_and_switch():
    for r in run_ramsey_proxy(ProtocolConfig(p=0.0, shots=500), [0, 2, 4]):
        assert r.accept_rate == 1.0 and r.extra["survival"] == 1.0
    for variant in ("ft", "nonft"):
        r = run_code_switch(ProtocolConfig(p=0.0, shots=500, variant=variant))
        assert r.accept_rate == 1.0 and r.logical_error_rate == 0.0
        assert all(row["preserved"] for row in r.extra["per_input"])


def test_policy_monotone_acceptance():
    base = dict(p=5e-3, shots=20_000, seed=4)
    full = run_level1(ProtocolConfig(**base)).accepted
    part = run_level1(ProtocolConfig(**base, postselect_policy="check,qed")).accepted
    none = run_level1(ProtocolConfig(**base, postselect_policy="none")).accepted
    assert full <= part <= none == 20_000


def test_ft_beats_nonft():
    ft = run_level1(ProtocolConfig(p=3e-3, shots=50_000, seed=1))
    nonft = run_level1(ProtocolConfig(p=3e-3, shots=50_000, seed=1, mode="nonft"))
    assert ft.logical_error_rate < nonft.logical_error_rate


def test_reproducible_and_json_round_trip():
    a = run_level1(ProtocolConfig(p=1e-2, shots=5000, seed=9))
    b = run_level1(ProtocolConfig(p=1e-2, shots=5000, seed=9))
    assert (a.accepted, a.logical_flips) == (b.accepted, b.logical_flips)
    d = json.loads(a.to_json())
    assert d["shots"] == 5000 and d["config"]["seed"] == 9


def test_error_ci_brackets_rate():
    r = run_level1(ProtocolConfig(p=1e-2, shots=20_000, seed=2))
    assert r.error_ci.lo <= r.logical_error_rate <= r.error_ci.hi


def test_ramsey_survival_decreases_and_rejects_odd():
    rs = run_ramsey_proxy(ProtocolConfig(p=3e-3, shots=20_000, seed=3), [0, 8])
    rows = ramsey_table(rs)
    assert rows[0].accept >= rows[1].accept
    assert rows[1].gate_accept >= rows[1].accept
    assert [c[0] for c in ramsey_counts(rs)] == [0, 8]
    with pytest.raises(ValueError):
        run_ramsey_proxy(ProtocolConfig(p=0.0, shots=10), [3])


def test_repeat_until_success_raises_acceptance():
    base = dict(level=2, p=1e-3, shots=3000, seed=5)
    one = run_level2(ProtocolConfig(**base))
    rus = run_level2(ProtocolConfig(**base, repeat_until_success=True))
    assert rus.accept_rate > one.accept_rate
    assert rus.extra["stage_retries"] > 0


@pytest.mark.parametrize(
    "kw",
    [
        {"level": 3},
        {"p": 1.5},
        {"shots": 0},
        {"workers": 0},
        {"mode": "fast"},
        {"postselect_policy": "flags,bogus"},
        {"engine": "gpu"},
        {"engine": "tableau", "repeat_until_success": True},
    ],
)
def test_invalid_config(kw):
    with pytest.raises(ValueError):
        ProtocolConfig(**kw)


def test_policy_naming_absent_category_raises():
    cfg = ProtocolConfig(postselect_policy="y2")
    with pytest.raises(ValueError):
        cfg.reject_groups(builders.build("ft-prep-00"))


def test_group_categories():
    assert group_category("magic_check") == "check"
    assert group_category("data_qed") == "qed"
    assert group_category("ms_y2") == "y2"
    assert group_category("ft_prep") == "flags"
    assert group_category("teleport") == "teleport"
    assert group_category("final") == "final"


def test_sweep_points_and_seeds():
    pts = sweep("level1", ProtocolConfig(seed=0, shots=2000), [1e-2, 3e-3])
    assert [pt.p for pt in pts] == [1e-2, 3e-3]
    assert all(pt.ci_lo <= pt.logical_error_rate <= pt.ci_hi for pt in pts)
