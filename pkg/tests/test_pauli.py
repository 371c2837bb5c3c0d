import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from h6magic.circuit import CircuitBuilder
from h6magic.codes import H6_LOGICAL_X, H6_LOGICAL_Z, H6_STABILIZERS
from h6magic.pauli import (
    CliffordTableau,
    DimensionError,
    PauliString,
    UnsupportedInstructionError,
    commutes,
    conjugate,
    gate_tableau,
    mul,
    tableau_of,
)
from oracles import gate_matrix, matrix_to_pauli, pauli_matrix

P = PauliString.from_text


def paulis(n):
    return st.tuples(st.text("IXYZ", min_size=n, max_size=n), st.sampled_from(["", "-", "i", "-i"])).map(
        lambda t: P(t[1] + t[0])
    )


same_n = st.integers(1, 4).flatmap(lambda n: st.tuples(paulis(n), paulis(n), paulis(n)))


def test_text_round_trip_and_weight():
    p = P("-YIYIYI")
    assert str(p) == "-YIYIYI"
    assert p.weight == 3
    assert P("IIII").weight == 0
    assert p.support == [0, 2, 4]


def test_phase_prefixes():
    assert P("iX").phase == 1
    assert P("-iX").phase == 3
    with pytest.raises(ValueError):
        P("--X")


def test_mul_examples():
    assert mul(P("X"), P("Z")) == P("-iY")
    assert mul(P("XXXXII"), P("ZZZZII")) == P("YYYYII")
    assert mul(P("XIXIXI"), P("IXIXIX")) == P("XXXXXX")
    q = P("XYZI")
    assert mul(q, PauliString.identity(4)) == q


def test_mul_dimension_mismatch():
    with pytest.raises(DimensionError):
        mul(P("X"), P("XX"))
    with pytest.raises(DimensionError):
        commutes(P("X"), P("XX"))


def test_commutes_examples():
    assert commutes(P("XXXXII"), P("ZZZZII"))
    assert not commutes(P("XIXIXI"), P("ZIZIZI"))


@given(same_n)
def test_mul_matches_matrices(abc):
    a, b, _ = abc
    got = mul(a, b)
    assert np.allclose(pauli_matrix(str(got)), pauli_matrix(str(a)) @ pauli_matrix(str(b)))


@given(same_n)
def test_mul_associative_and_self_inverse(abc):
    a, b, c = abc
    assert mul(mul(a, b), c) == mul(a, mul(b, c))
    sq = mul(a.unsigned(), a.unsigned())
    assert sq == PauliString.identity(a.n)


@given(same_n)
def test_commutator_phase_matches_commutes(abc):
    a, b, _ = abc
    ab, ba = mul(a, b), mul(b, a)
    assert ab.x_mask == ba.x_mask and ab.z_mask == ba.z_mask
    rel = (ab.phase - ba.phase) % 4
    assert rel in (0, 2)
    assert (rel == 0) == commutes(a, b)


def test_conjugate_examples():
    h = gate_tableau("H", [0], 1)
    assert conjugate(h, P("X")) == P("Z")
    cx = gate_tableau("CX", [0, 1], 2)
    assert conjugate(cx, P("XI")) == P("XX")
    t = CliffordTableau.identity(6)
    for q in range(6):
        t = t.then(gate_tableau("H", [q], 6))
    assert conjugate(t, P("XXXXII")) == P("ZZZZII")


gate_names = st.sampled_from(["H", "S", "S_DAG", "X", "Y", "Z", "CX", "CZ"])


@given(gate_names, paulis(3), st.permutations([0, 1, 2]))
def test_gate_conjugation_matches_matrices(name, p, perm):
    targets = perm[:2] if name in ("CX", "CZ") else perm[:1]
    got = conjugate(gate_tableau(name, targets, 3), p)
    U = gate_matrix(name, targets, 3)
    want = matrix_to_pauli(U @ pauli_matrix(str(p)) @ U.conj().T, 3)
    assert got == P(want)


@st.composite
def tableaus(draw):
    t = CliffordTableau.identity(3)
    for _ in range(draw(st.integers(0, 8))):
        name = draw(gate_names)
        qs = draw(st.permutations([0, 1, 2]))
        t = t.then(gate_tableau(name, qs[:2] if name in ("CX", "CZ") else qs[:1], 3))
    return t


@given(tableaus(), paulis(3), paulis(3))
def test_conjugation_is_homomorphism(t, a, b):
    assert t.is_symplectic()
    assert conjugate(t, mul(a, b)) == mul(conjugate(t, a), conjugate(t, b))
    assert commutes(a, b) == commutes(conjugate(t, a), conjugate(t, b))


def test_tableau_of_circuit():
    assert tableau_of(CircuitBuilder(2).circuit) == CliffordTableau.identity(2)
    b = CircuitBuilder(1)
    b.gate("H", 0)
    t = tableau_of(b.circuit)
    assert t.x_images == (P("Z"),) and t.z_images == (P("X"),)
    # Ry(-pi/2) (H then Z), CZ, Ry(pi/2) (Z then H) on the target is CNOT
    b = CircuitBuilder(2)
    b.gate("H", 1)
    b.gate("Z", 1)
    b.gate("CZ", 0, 1)
    b.gate("Z", 1)
    b.gate("H", 1)
    assert tableau_of(b.circuit) == gate_tableau("CX", [0, 1], 2)


def test_tableau_of_rejects_measurement():
    b = CircuitBuilder(1)
    b.measure("MZ", 0)
    with pytest.raises(UnsupportedInstructionError):
        tableau_of(b.circuit)


def test_h6_algebra():
    stabs = [P(s) for s in H6_STABILIZERS]
    lx = [P(s) for s in H6_LOGICAL_X]
    lz = [P(s) for s in H6_LOGICAL_Z]
    for a in stabs:
        for b in stabs + lx + lz:
            assert commutes(a, b)
    for i in range(2):
        for j in range(2):
            assert commutes(lx[i], lz[j]) == (i != j)
