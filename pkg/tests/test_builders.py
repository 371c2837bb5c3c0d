import itertools

import numpy as np
import pytest

from h6magic import builders
from h6magic.builders import CircuitKind, build
from h6magic.codes import code_h6
from h6magic.engines.faults import inject_faults
from h6magic.engines.tableau import final_state, parity_matrix, run_tableau
from h6magic.noise import annotate, h1_ratio
from h6magic.pauli import PauliString, conjugate, gate_tableau
from h6magic.protocols import _EIGEN, mx_flip_breaks_switch, switch_preserves

STATES = ("0", "1", "+", "-", "Y+", "Y-")


def _embed(p: PauliString, qubits, n: int) -> PauliString:
    x = z = 0
    for j, q in enumerate(qubits):
        x |= ((p.x_mask >> j) & 1) << q
        z |= ((p.z_mask >> j) & 1) << q
    return PauliString(n, x, z, p.phase)


def _logical(code, i, basis):
    return {"X": code.logical_x[i], "Z": code.logical_z[i], "Y": code.logical_y(i)}[basis]


def _single(basis, sign, n, q):
    p = PauliString.single(n, q, basis)
    return p if sign > 0 else -p


def _role_qubits(c, role):
    return sorted(q for q, r in c.roles.items() if r == role)


@pytest.mark.parametrize("a,b", list(itertools.product(STATES, STATES)))
def test_encoder_prepares_logical_product_state(a, b):
    c = build("encoder", inputs=(a, b), readout_basis=None)
    sim, _ = final_state(c)
    code = code_h6()
    assert all(sim.expectation(s) == 1 for s in code.stabilizers)
    for i, st in enumerate((a, b)):
        basis, sign = _EIGEN[st]
        assert sim.expectation(_logical(code, i, basis)) == sign


@pytest.mark.parametrize(
    "kind",
    ["encoder", "check-two-state", "check-one-state", "y2-check", "ft-prep-00", "qed-x", "bench-level1", "level1"],
)
def test_noiseless_detectors_and_observables_are_quiet(kind):
    c = build(kind)
    D, O, _ = parity_matrix(c)
    for seed in range(5):
        rec = np.array(run_tableau(c, seed), dtype=np.int64)
        assert not (rec @ D % 2).any()
        assert not (rec @ O % 2).any()


@pytest.mark.parametrize("kind", ["y2-check", "ft-prep-00", "code-switch-ft", "level1", "qed-x"])
def test_fault_tolerant_gadgets_have_no_undetected_single_faults(kind):
    rep = inject_faults(annotate(build(kind), h1_ratio(1e-3)))
    assert rep.counts["LOGICAL"] == 0
    assert rep.counts["DETECTED"] > 0


def test_nonft_switch_has_undetected_single_faults():
    rep = inject_faults(annotate(build("code-switch-nonft"), h1_ratio(1e-3)))
    assert rep.counts["LOGICAL"] > 0


def test_encoder_spreads_single_faults_to_at_most_one_logical_per_observable_pair():
    rep = inject_faults(annotate(build("encoder"), h1_ratio(1e-3)))
    assert rep.max_observables_flipped() <= 2


@pytest.mark.parametrize("inputs", [("0", "0"), ("0", "+"), ("+", "0"), ("+", "+")])
@pytest.mark.parametrize("ft", [False, True])
def test_code_switch_preserves_logical_state(inputs, ft):
    assert switch_preserves(inputs, ft)


def test_mx_flip_breaks_nonft_switch():
    assert mx_flip_breaks_switch()


@pytest.mark.parametrize("a,b", list(itertools.product(STATES, STATES)))
def test_cnot_teleport_physical_acts_as_cnot(a, b):
    c = build("cnot-teleport", inputs=(a, b))
    n = c.num_qubits
    cx = gate_tableau("CX", [0, 1], n)
    for seed in range(3):
        sim, _ = final_state(c, seed)
        for q, st in ((0, a), (1, b)):
            basis, sign = _EIGEN[st]
            assert sim.expectation(conjugate(cx, _single(basis, sign, n, q))) == 1


@pytest.mark.parametrize("a,b", list(itertools.product(("0", "+", "1", "Y-"), repeat=2)))
def test_cnot_teleport_encoded_acts_as_transversal_cnot(a, b):
    c = build("cnot-teleport", inputs=(a, b), encoded=True)
    n = c.num_qubits
    blocks = [_role_qubits(c, f"in{k}:data") for k in range(2)]
    code = code_h6()
    # a "0"/"+" block holds that state on both logicals, others encode (s, 0)
    states = [(s, s) if s in ("0", "+") else (s, "0") for s in (a, b)]
    cx = None
    for q0, q1 in zip(*blocks):
        t = gate_tableau("CX", [q0, q1], n)
        cx = t if cx is None else cx.then(t)
    before = []
    for blk, st in zip(blocks, states):
        before += [_embed(s, blk, n) for s in code.stabilizers]
        for i, s in enumerate(st):
            basis, sign = _EIGEN[s]
            p = _embed(_logical(code, i, basis), blk, n)
            before.append(p if sign > 0 else -p)
    sim, _ = final_state(c, seed=1)
    for p in before:
        assert sim.expectation(conjugate(cx, p)) == 1


@pytest.mark.parametrize("inp", STATES)
@pytest.mark.parametrize("sign", [1, -1])
def test_teleport_ry_observable_deterministic(inp, sign):
    c = build("teleport-ry", input=inp, sign=sign)
    _, O, _ = parity_matrix(c)
    vals = {int(np.array(run_tableau(c, seed)) @ O[:, 0] % 2) for seed in range(8)}
    assert len(vals) == 1


def test_every_kind_builds_and_round_trips():
    from h6magic.circuit import parse, serialize

    for kind in CircuitKind:
        if kind is CircuitKind.LEVEL2_PROTOCOL:
            continue
        c = build(kind)
        assert serialize(parse(serialize(c))) == serialize(c)


def test_offset_and_annotate_options():
    c = build("encoder", offset=3, annotate=False)
    assert c.num_qubits == 9
    assert all(i.kind.name not in ("DETECTOR", "OBSERVABLE") for i in c.instructions)
    assert min(q for i in c.instructions for q in i.targets) == 3


def test_build_errors():
    with pytest.raises(ValueError):
        build("no-such-circuit")
    with pytest.raises(ValueError):
        build("encoder", offset=-1)
    with pytest.raises(ValueError):
        build("encoder", inputs=("Q", "0"))


def test_encoder_fixture():
    assert builders.ENCODER_INPUTS == (5, 3)
    assert builders.ENCODER_PLUS == (0, 2)
    assert builders.ENCODER_ZERO == (1, 4)
    assert len(builders.ENCODER_CNOTS) == 10
