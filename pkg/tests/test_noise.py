import pytest
from hypothesis import given
from hypothesis import strategies as st

from h6magic import builders
from h6magic.circuit import parse, stats
from h6magic.engines import compile_frame, sample
from h6magic.noise import PAULIS_2Q, NoiseModel, annotate, h1_ratio


def test_h1_ratio_values():
    assert h1_ratio(1e-3).to_dict() == {"p2": 1e-3, "p_meas": 1e-3, "p_idle": 2e-4, "p1": 0.0, "p_prep": 0.0}
    assert h1_ratio(1e-4).to_dict() == {"p2": 1e-4, "p_meas": 1e-4, "p_idle": 2e-5, "p1": 0.0, "p_prep": 0.0}
    assert h1_ratio(0).is_noiseless


@pytest.mark.parametrize("p", [-0.1, 1.5])
def test_h1_ratio_rejects(p):
    with pytest.raises(ValueError):
        h1_ratio(p)
    with pytest.raises(ValueError):
        NoiseModel(p2=p)


def test_two_qubit_channel_is_uniform_over_15():
    assert len(PAULIS_2Q) == 15 and "II" not in PAULIS_2Q


def test_zero_model_places_nothing():
    assert annotate(builders.build("level1"), NoiseModel()).sites == ()


def test_counting_example():
    c = parse("QUBITS 4\nCX 0 1\nCX 2 3\nCX 1 2\nMZ 0 3")
    nc = annotate(c, h1_ratio(1e-3))
    assert [s.channel for s in nc.sites].count("DEPOL2") == 3
    assert [s.channel for s in nc.sites].count("FLIP_MEAS") == 2
    assert len(nc.sites) == 5


def test_idle_site_on_spectator():
    c = parse("QUBITS 2\nH 0\nTICK\nH 0")
    nc = annotate(c, h1_ratio(1e-3))
    assert [(s.channel, s.qubits, s.origin) for s in nc.sites] == [("DEPOL1", (1,), "idle")]
    assert nc.sites[0].prob == pytest.approx(2e-4)


@pytest.mark.parametrize("kind", ["level1", "code-switch-ft", "bench-level1"])
def test_site_count_identity(kind):
    c = builders.build(kind)
    nc = annotate(c, h1_ratio(1e-3))
    st_ = stats(c)
    idle = sum(s.origin == "idle" for s in nc.sites)
    assert len(nc.sites) == st_.count_2q + st_.count_meas + idle
    assert annotate(c, h1_ratio(1e-3)) == nc


@given(st.floats(0, 1))
def test_annotate_probabilities(p):
    nc = annotate(builders.build("ft-prep-00"), h1_ratio(p))
    for s in nc.sites:
        assert s.prob == (p / 5 if s.origin == "idle" else p)


def test_vanishing_noise():
    c = builders.build("level1")
    t = sample(compile_frame(annotate(c, h1_ratio(1e-6))), 100_000, seed=3)
    assert t.any_flip == 0
    assert t.rejected <= 5
