import itertools
import json

from h6magic.codes import code_h6, code_iceberg, switch_corrections, switch_mapping, verify_switch_mapping
from h6magic.pauli import CliffordTableau, PauliString, commutes, conjugate, gate_tableau, mul

P = PauliString.from_text


def test_h6_definition():
    c = code_h6()
    assert [str(s) for s in c.stabilizers] == ["XXXXII", "IIXXXX", "ZZZZII", "IIZZZZ"]
    assert [str(s) for s in c.logical_x] == ["XIXIXI", "IXIXIX"]
    assert [str(s) for s in c.logical_z] == ["ZIZIZI", "IZIZIZ"]
    assert (c.n, c.k, c.d) == (6, 2, 2)
    assert str(c.logical_y(0)) == "-YIYIYI"


def test_iceberg_definition():
    c = code_iceberg()
    assert [str(s) for s in c.logical_x] == ["XIIX", "XIXI"]
    assert [str(s) for s in c.logical_z] == ["ZIZI", "IZZI"]
    assert (c.n, c.k, c.d) == (4, 2, 2)


def test_codes_verify():
    for code in (code_h6(), code_iceberg()):
        failed = [r.name for r in code.verify() if not r.ok]
        assert failed == []


def _brute_distance(code):
    """Smallest weight of a Pauli commuting with every stabilizer and outside the group."""
    n = code.n
    stab_group = set()
    for bits in itertools.product([0, 1], repeat=len(code.stabilizers)):
        p = PauliString.identity(n)
        for b, s in zip(bits, code.stabilizers):
            if b:
                p = mul(p, s)
        stab_group.add((p.x_mask, p.z_mask))
    for w in range(1, n + 1):
        for support in itertools.combinations(range(n), w):
            for letters in itertools.product("XYZ", repeat=w):
                p = PauliString.from_sparse(n, dict(zip(support, letters)))
                if all(commutes(p, s) for s in code.stabilizers) and (p.x_mask, p.z_mask) not in stab_group:
                    return w


def test_brute_force_distance():
    assert _brute_distance(code_h6()) == 2
    assert _brute_distance(code_iceberg()) == 2


def test_transversal_hadamard_is_logical_hadamard():
    c = code_h6()
    t = CliffordTableau.identity(6)
    for q in range(6):
        t = t.then(gate_tableau("H", [q], 6))
    for s in c.stabilizers:
        assert c.in_stabilizer_group(conjugate(t, s))
    for i in range(2):
        image = conjugate(t, c.logical_x[i])
        assert c.in_stabilizer_group(mul(image, c.logical_z[i]))
    assert mul(c.logical_x[0], c.logical_x[1]) == P("XXXXXX")


def test_mutated_code_fails():
    c = code_h6()
    bad = type(c).from_text("bad", 2, ["XXXXII", "IIXXXX", "ZZZZII", "IIZZZY"], ["XIXIXI", "IXIXIX"], ["ZIZIZI", "IZIZIZ"])
    failed = [r.name for r in bad.verify() if not r.ok]
    assert failed == ["logical IZIZIZ commutes with IIZZZY"]
    signed = type(c).from_text("signed", 2, ["-XXXXII", "IIXXXX", "ZZZZII", "IIZZZZ"], ["XIXIXI", "IXIXIX"], ["ZIZIZI", "IZIZIZ"])
    assert not all(r.ok for r in signed.verify())


def test_code_json():
    d = json.loads(code_h6().to_json())
    assert set(d) == {"name", "n", "k", "d", "stabilizers", "logical_x", "logical_z"}
    assert d["stabilizers"][0] == "XXXXII"


def test_switch_mapping_rows():
    m = switch_mapping()
    assert len(m.rows) == 10
    by = {r.label: r for r in m.rows}
    assert str(by["X1"].after) == "XIIXIX" and str(by["X1"].iceberg) == "XIIX"
    assert str(by["Z2"].after) == "IZZIZI" and str(by["Z2"].iceberg) == "IZZI"
    assert str(by["Y1"].before) == "-YIYIYI" and str(by["Y1"].after) == "YIZXZX"
    assert all(r.ok for r in verify_switch_mapping())


def test_switch_mapping_signs():
    # a row that picks up qubit-5 X carries (-1)^{m_x}; qubit-4 Z carries (-1)^{m_z}
    by = {r.label: r for r in switch_mapping().rows}
    assert by["X1"].sign_rule == (0, 1)
    assert by["Z2"].sign_rule == (1, 0)
    assert by["Y1"].sign_rule == (1, 1)


def test_switch_corrections_restore_signs():
    corr = switch_corrections()
    assert set(corr) == {"m_z", "m_x"}
    for row in switch_mapping().rows:
        if row.iceberg is None:
            continue
        a, b = row.sign_rule
        assert (not commutes(corr["m_z"], row.iceberg)) == bool(a)
        assert (not commutes(corr["m_x"], row.iceberg)) == bool(b)
