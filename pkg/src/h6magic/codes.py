"""The [[6,2,2]] H6 code, the [[4,2,2]] iceberg code, and the 6-to-4 switch table."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

from .pauli import PauliString, commutes, mul, product

H6_STABILIZERS = ("XXXXII", "IIXXXX", "ZZZZII", "IIZZZZ")
H6_LOGICAL_X = ("XIXIXI", "IXIXIX")
H6_LOGICAL_Z = ("ZIZIZI", "IZIZIZ")
ICEBERG_STABILIZERS = ("XXXX", "ZZZZ")
ICEBERG_LOGICAL_X = ("XIIX", "XIXI")
ICEBERG_LOGICAL_Z = ("ZIZI", "IZZI")


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


@dataclass(frozen=True)
class CssCode:
    name: str
    n: int
    k: int
    d: int
    stabilizers: tuple[PauliString, ...]
    logical_x: tuple[PauliString, ...]
    logical_z: tuple[PauliString, ...]

    @classmethod
    def from_text(cls, name, d, stabilizers, logical_x, logical_z) -> "CssCode":
        stabs = tuple(PauliString.from_text(s) for s in stabilizers)
        lx = tuple(PauliString.from_text(s) for s in logical_x)
        lz = tuple(PauliString.from_text(s) for s in logical_z)
        return cls(name, stabs[0].n, len(lx), d, stabs, lx, lz)

    def logical_y(self, i: int) -> PauliString:
        """Hermitian ``Y_i = i X_i Z_i`` for logical qubit ``i``."""
        xz = mul(self.logical_x[i], self.logical_z[i])
        return PauliString(self.n, xz.x_mask, xz.z_mask, xz.phase + 1)

    def in_stabilizer_group(self, p: PauliString, signed: bool = True) -> bool:
        """Membership in the group generated by ``stabilizers`` (with sign if ``signed``)."""
        elem = _span_element(self.stabilizers, p)
        if elem is None:
            return False
        return not signed or elem.phase == p.phase

    def is_logical(self, p: PauliString) -> bool:
        """Commutes with every stabilizer but is not (up to sign) a stabilizer."""
        if not all(commutes(p, s) for s in self.stabilizers):
            return False
        return not self.in_stabilizer_group(p.unsigned(), signed=False) and (p.x_mask or p.z_mask)

    def min_logical_weight(self, limit: int | None = None) -> int | None:
        """Brute-force smallest weight of a nontrivial logical, up to ``limit``."""
        limit = self.n if limit is None else limit
        for w in range(1, limit + 1):
            for support in itertools.combinations(range(self.n), w):
                for letters in itertools.product("XYZ", repeat=w):
                    p = PauliString.from_sparse(self.n, dict(zip(support, letters)))
                    if self.is_logical(p):
                        return w
        return None

    def verify(self) -> list[CheckResult]:
        out = []
        for a, b in itertools.combinations(self.stabilizers, 2):
            out.append(CheckResult(f"commute {a} {b}", commutes(a, b)))
        for s in self.stabilizers:
            out.append(CheckResult(f"hermitian {s}", s.is_hermitian() and s.phase == 0))
        logicals = list(self.logical_x) + list(self.logical_z)
        for lg in logicals:
            for s in self.stabilizers:
                out.append(CheckResult(f"logical {lg} commutes with {s}", commutes(lg, s)))
        for i in range(self.k):
            for j in range(self.k):
                want = i != j
                got = commutes(self.logical_x[i], self.logical_z[j])
                out.append(CheckResult(f"X{i} Z{j} {'commute' if want else 'anticommute'}", got == want))
            for j in range(i + 1, self.k):
                out.append(CheckResult(f"X{i} X{j} commute", commutes(self.logical_x[i], self.logical_x[j])))
                out.append(CheckResult(f"Z{i} Z{j} commute", commutes(self.logical_z[i], self.logical_z[j])))
        rank = _rank(self.stabilizers)
        out.append(CheckResult("independent generators", rank == len(self.stabilizers)))
        out.append(CheckResult("k = n - rank", self.k == self.n - rank, f"n={self.n} rank={rank}"))
        w = self.min_logical_weight(self.d)
        out.append(CheckResult(f"distance {self.d}", w == self.d, f"min logical weight {w}"))
        return out

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "k": self.k,
            "d": self.d,
            "stabilizers": [str(s) for s in self.stabilizers],
            "logical_x": [str(s) for s in self.logical_x],
            "logical_z": [str(s) for s in self.logical_z],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def code_h6() -> CssCode:
    return CssCode.from_text("H6", 2, H6_STABILIZERS, H6_LOGICAL_X, H6_LOGICAL_Z)


def code_iceberg() -> CssCode:
    return CssCode.from_text("iceberg", 2, ICEBERG_STABILIZERS, ICEBERG_LOGICAL_X, ICEBERG_LOGICAL_Z)


# --------------------------------------------------------------- GF(2) helpers


def _vec(p: PauliString) -> int:
    return p.x_mask | (p.z_mask << p.n)


def _rank(gens) -> int:
    rows = [_vec(g) for g in gens]
    rank = 0
    while rows:
        pivot = rows.pop()
        if not pivot:
            continue
        rank += 1
        low = pivot & -pivot
        rows = [r ^ pivot if r & low else r for r in rows]
    return rank


def _span_element(gens, p: PauliString) -> PauliString | None:
    """The product of ``gens`` equal to ``p`` up to phase, or ``None``."""
    target = _vec(p)
    for bits in itertools.product((0, 1), repeat=len(gens)):
        v = 0
        for b, g in zip(bits, gens):
            if b:
                v ^= _vec(g)
        if v == target:
            return product([g for b, g in zip(bits, gens) if b], n=p.n)
    return None


# ------------------------------------------------------------------ switching


@dataclass(frozen=True)
class SwitchRow:
    label: str
    before: PauliString
    after: PauliString
    # after carries (-1)^(a*m_z + b*m_x); sign_rule = (a, b)
    sign_rule: tuple[int, int]
    iceberg: PauliString | None


@dataclass(frozen=True)
class SwitchMapping:
    rows: tuple[SwitchRow, ...]

    def verify(self) -> list[CheckResult]:
        return verify_switch_mapping(self)


_MEASURED_Z = PauliString.from_text("IIIIZI")
_MEASURED_X = PauliString.from_text("IIIIIX")

_SWITCH_TABLE = (
    ("XXXXII", "XXXXII", "XXXXII"),
    ("ZZZZII", "ZZZZII", "ZZZZII"),
    ("IIXXXX", "IIXXXX", "IIIIZI"),
    ("IIZZZZ", "IIZZZZ", "IIIIIX"),
    ("X1", "XIXIXI", "XIIXIX"),
    ("X2", "IXIXIX", "IXIXIX"),
    ("Z1", "ZIZIZI", "ZIZIZI"),
    ("Z2", "IZIZIZ", "IZZIZI"),
    ("Y1", "-YIYIYI", "YIZXZX"),
    ("Y2", "-IYIYIY", "IYZXZX"),
)


def switch_mapping() -> SwitchMapping:
    """Stabilizers and logicals before/after measuring Z on qubit 4 and X on qubit 5."""
    rows = []
    for label, pre, post in _SWITCH_TABLE:
        before = PauliString.from_text(pre)
        after = PauliString.from_text(post)
        if after == _MEASURED_Z:
            rows.append(SwitchRow(label, before, after, (1, 0), None))
            continue
        if after == _MEASURED_X:
            rows.append(SwitchRow(label, before, after, (0, 1), None))
            continue
        a = int(after.char(4) == "Z")
        b = int(after.char(5) == "X")
        reduced = after
        if a:
            reduced = mul(reduced, _MEASURED_Z)
        if b:
            reduced = mul(reduced, _MEASURED_X)
        rows.append(SwitchRow(label, before, after, (a, b), reduced.restrict(range(4))))
    return SwitchMapping(tuple(rows))


def verify_switch_mapping(m: SwitchMapping | None = None) -> list[CheckResult]:
    """Check every row of the switch table as an exact Pauli identity."""
    m = m if m is not None else switch_mapping()
    h6 = code_h6()
    ice = code_iceberg()
    ice_logicals = {
        "X1": ice.logical_x[0],
        "X2": ice.logical_x[1],
        "Z1": ice.logical_z[0],
        "Z2": ice.logical_z[1],
        "Y1": ice.logical_y(0),
        "Y2": ice.logical_y(1),
    }
    h6_logicals = {
        "X1": h6.logical_x[0],
        "X2": h6.logical_x[1],
        "Z1": h6.logical_z[0],
        "Z2": h6.logical_z[1],
        "Y1": h6.logical_y(0),
        "Y2": h6.logical_y(1),
    }
    out = []
    for row in m.rows:
        if row.iceberg is None:
            # a destroyed stabilizer is replaced by the measured operator
            measured = _MEASURED_Z if row.sign_rule == (1, 0) else _MEASURED_X
            ok = row.after == measured and not commutes(row.before, measured)
            ok &= h6.in_stabilizer_group(row.before)
            out.append(CheckResult(f"{row.label} replaced by measured {measured}", ok))
            continue
        if row.label in h6_logicals:
            ok = h6_logicals[row.label] == row.before
            out.append(CheckResult(f"{row.label} before = {row.before}", ok))
        ok = h6.in_stabilizer_group(mul(_inverse(row.before), row.after))
        out.append(CheckResult(f"{row.label}: {row.before} -> {row.after} differs by a stabilizer", ok))
        ok = commutes(row.after, _MEASURED_Z) and commutes(row.after, _MEASURED_X)
        out.append(CheckResult(f"{row.label}: {row.after} commutes with both measurements", ok))
        if row.label in ice_logicals:
            want = ice_logicals[row.label]
            ok = ice.in_stabilizer_group(mul(_inverse(want), row.iceberg))
            out.append(CheckResult(f"{row.label}: reduces to iceberg {want}", ok, str(row.iceberg)))
        else:
            ok = ice.in_stabilizer_group(row.iceberg)
            out.append(CheckResult(f"{row.label}: reduces to iceberg stabilizer", ok, str(row.iceberg)))
    return out


def _inverse(p: PauliString) -> PauliString:
    # Hermitian Paulis are their own inverse; general phase i^k inverts to i^-k
    return PauliString(p.n, p.x_mask, p.z_mask, -p.phase)


def switch_corrections() -> dict[str, PauliString]:
    """Iceberg-block corrections undoing the measurement signs.

    ``m_z`` flips every logical whose post-switch form has Z on qubit 4, so the
    correction must anticommute with exactly those; likewise ``m_x``.
    """
    return {"m_z": PauliString.from_text("IIXX"), "m_x": PauliString.from_text("ZZII")}
