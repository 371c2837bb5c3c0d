"""Phase-tracked Pauli strings and Clifford tableaus.

A :class:`PauliString` stores bit-packed X and Z masks (Python ints, bit ``j``
is qubit ``j``) and the overall phase as an exponent of ``i`` mod 4. Each site
with both bits set is the Hermitian ``Y``, so ``"-YIYIYI"`` has phase 2 and
masks ``x = z = 0b010101``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

if TYPE_CHECKING:
    from .circuit import Circuit

_PHASE_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_TEXT_PHASE = {"": 0, "+": 0, "+i": 1, "i": 1, "-": 2, "-i": 3}


class DimensionError(ValueError):
    """Operands act on different numbers of qubits."""


class UnsupportedInstructionError(ValueError):
    """An instruction has no Clifford tableau (measurement, reset, COND, ...)."""


def _popcount(v: int) -> int:
    return v.bit_count()


@dataclass(frozen=True)
class PauliString:
    n: int
    x_mask: int = 0
    z_mask: int = 0
    phase: int = 0

    def __post_init__(self):
        full = (1 << self.n) - 1
        if self.n < 0 or self.x_mask & ~full or self.z_mask & ~full:
            raise ValueError("masks exceed qubit count")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @classmethod
    def from_text(cls, text: str) -> "PauliString":
        """Parse ``[sign]`` followed by one of ``IXYZ`` per qubit."""
        text = text.strip()
        i = 0
        while i < len(text) and text[i] in "+-i":
            i += 1
        prefix, body = text[:i], text[i:]
        if prefix not in _TEXT_PHASE:
            raise ValueError(f"bad phase prefix {prefix!r}")
        x = z = 0
        for j, ch in enumerate(body):
            if ch in "XY":
                x |= 1 << j
            if ch in "ZY":
                z |= 1 << j
            if ch not in "IXYZ_":
                raise ValueError(f"bad Pauli character {ch!r} in {text!r}")
        return cls(len(body), x, z, _TEXT_PHASE[prefix])

    @classmethod
    def single(cls, n: int, qubit: int, pauli: str) -> "PauliString":
        body = ["I"] * n
        body[qubit] = pauli
        return cls.from_text("".join(body))

    @classmethod
    def from_sparse(cls, n: int, ops: dict[int, str], phase: int = 0) -> "PauliString":
        body = ["I"] * n
        for q, p in ops.items():
            body[q] = p
        p = cls.from_text("".join(body))
        return cls(n, p.x_mask, p.z_mask, phase)

    def __str__(self) -> str:
        chars = []
        for j in range(self.n):
            xb = (self.x_mask >> j) & 1
            zb = (self.z_mask >> j) & 1
            chars.append("IXZY"[xb | (zb << 1)])
        sign = _PHASE_TEXT[self.phase]
        return ("" if sign == "+" else sign) + "".join(chars)

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"

    def __mul__(self, other: "PauliString") -> "PauliString":
        return mul(self, other)

    def __neg__(self) -> "PauliString":
        return PauliString(self.n, self.x_mask, self.z_mask, self.phase + 2)

    @property
    def weight(self) -> int:
        return _popcount(self.x_mask | self.z_mask)

    @property
    def support(self) -> list[int]:
        m = self.x_mask | self.z_mask
        return [j for j in range(self.n) if (m >> j) & 1]

    def unsigned(self) -> "PauliString":
        return PauliString(self.n, self.x_mask, self.z_mask, 0)

    def char(self, qubit: int) -> str:
        xb = (self.x_mask >> qubit) & 1
        zb = (self.z_mask >> qubit) & 1
        return "IXZY"[xb | (zb << 1)]

    def restrict(self, qubits: Sequence[int]) -> "PauliString":
        """Sub-string on ``qubits`` (in the given order), phase kept."""
        return PauliString.from_sparse(
            len(qubits), {k: self.char(q) for k, q in enumerate(qubits)}, self.phase
        )

    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0


def _check_dims(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise DimensionError(f"qubit count mismatch: {a.n} vs {b.n}")


def mul(a: PauliString, b: PauliString) -> PauliString:
    """Exact product ``a @ b`` including phase."""
    _check_dims(a, b)
    x = a.x_mask ^ b.x_mask
    z = a.z_mask ^ b.z_mask
    # Y = i X Z per site; reorder Z_a X_b past each other, then re-absorb X Z into Y.
    e = (
        _popcount(a.x_mask & a.z_mask)
        + _popcount(b.x_mask & b.z_mask)
        + 2 * _popcount(a.z_mask & b.x_mask)
        - _popcount(x & z)
    )
    return PauliString(a.n, x, z, a.phase + b.phase + e)


def commutes(a: PauliString, b: PauliString) -> bool:
    _check_dims(a, b)
    return _popcount((a.x_mask & b.z_mask) ^ (a.z_mask & b.x_mask)) % 2 == 0


def product(paulis: Iterable[PauliString], n: int | None = None) -> PauliString:
    out = None
    for p in paulis:
        out = p if out is None else mul(out, p)
    if out is None:
        if n is None:
            raise ValueError("empty product needs n")
        return PauliString.identity(n)
    return out


@dataclass(frozen=True)
class CliffordTableau:
    """Images of ``X_i`` and ``Z_i`` under conjugation ``U P U^dagger``."""

    n: int
    x_images: tuple[PauliString, ...]
    z_images: tuple[PauliString, ...]

    @classmethod
    def identity(cls, n: int) -> "CliffordTableau":
        return cls(
            n,
            tuple(PauliString(n, 1 << j, 0) for j in range(n)),
            tuple(PauliString(n, 0, 1 << j) for j in range(n)),
        )

    def is_symplectic(self) -> bool:
        for i in range(self.n):
            if commutes(self.x_images[i], self.z_images[i]):
                return False
            if not (self.x_images[i].is_hermitian() and self.z_images[i].is_hermitian()):
                return False
            for j in range(self.n):
                if i == j:
                    continue
                if not commutes(self.x_images[i], self.z_images[j]):
                    return False
                if j > i and not (
                    commutes(self.x_images[i], self.x_images[j])
                    and commutes(self.z_images[i], self.z_images[j])
                ):
                    return False
        return True

    def then(self, other: "CliffordTableau") -> "CliffordTableau":
        """Tableau of applying ``self`` first, then ``other``."""
        if self.n != other.n:
            raise DimensionError("tableau size mismatch")
        return CliffordTableau(
            self.n,
            tuple(conjugate(other, p) for p in self.x_images),
            tuple(conjugate(other, p) for p in self.z_images),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, CliffordTableau):
            return NotImplemented
        return (self.n, self.x_images, self.z_images) == (
            other.n,
            other.x_images,
            other.z_images,
        )

    def __hash__(self) -> int:
        return hash((self.n, self.x_images, self.z_images))


def conjugate(t: CliffordTableau, p: PauliString) -> PauliString:
    """Return ``U p U^dagger`` for the Clifford ``U`` described by ``t``."""
    if t.n != p.n:
        raise DimensionError(f"tableau on {t.n} qubits, Pauli on {p.n}")
    # p = i^(phase + #Y) * prod_j X_j^x Z_j^z, factors ordered X before Z per site.
    out = PauliString(p.n, 0, 0, p.phase + _popcount(p.x_mask & p.z_mask))
    for j in range(p.n):
        if (p.x_mask >> j) & 1:
            out = mul(out, t.x_images[j])
        if (p.z_mask >> j) & 1:
            out = mul(out, t.z_images[j])
    return out


# Local gate tableaus, images of X then Z for each target in order.
_GATE_IMAGES: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    "H": (("Z",), ("X",)),
    "S": (("Y",), ("Z",)),
    "S_DAG": (("-Y",), ("Z",)),
    "X": (("X",), ("-Z",)),
    "Y": (("-X",), ("-Z",)),
    "Z": (("-X",), ("Z",)),
    "CX": (("XX", "IX"), ("ZI", "ZZ")),
    "CZ": (("XZ", "ZX"), ("ZI", "IZ")),
}


def gate_tableau(name: str, targets: Sequence[int], n: int) -> CliffordTableau:
    """Full ``n``-qubit tableau of one named Clifford gate."""
    if name not in _GATE_IMAGES:
        raise UnsupportedInstructionError(f"{name} is not a Clifford unitary")
    ximgs, zimgs = _GATE_IMAGES[name]
    if len(ximgs) != len(targets):
        raise ValueError(f"{name} takes {len(ximgs)} targets")
    base = CliffordTableau.identity(n)
    xs, zs = list(base.x_images), list(base.z_images)

    def embed(local: str) -> PauliString:
        loc = PauliString.from_text(local)
        ops = {targets[k]: loc.char(k) for k in range(len(targets))}
        return PauliString.from_sparse(n, ops, loc.phase)

    for k, q in enumerate(targets):
        xs[q] = embed(ximgs[k])
        zs[q] = embed(zimgs[k])
    return CliffordTableau(n, tuple(xs), tuple(zs))


def conjugate_by_gate(name: str, targets: Sequence[int], p: PauliString) -> PauliString:
    """``G p G^dagger`` for a single gate, touching only the gate's qubits."""
    ximgs, zimgs = _GATE_IMAGES[name]
    local_x = local_z = 0
    for k, q in enumerate(targets):
        local_x |= ((p.x_mask >> q) & 1) << k
        local_z |= ((p.z_mask >> q) & 1) << k
    if not (local_x or local_z):
        return p
    k_n = len(targets)
    local_t = _local_tableau(name)
    img = conjugate(local_t, PauliString(k_n, local_x, local_z, 0))
    mask = 0
    for q in targets:
        mask |= 1 << q
    x = p.x_mask & ~mask
    z = p.z_mask & ~mask
    for k, q in enumerate(targets):
        x |= ((img.x_mask >> k) & 1) << q
        z |= ((img.z_mask >> k) & 1) << q
    return PauliString(p.n, x, z, p.phase + img.phase)


_LOCAL_CACHE: dict[str, CliffordTableau] = {}


def _local_tableau(name: str) -> CliffordTableau:
    if name not in _LOCAL_CACHE:
        k = len(_GATE_IMAGES[name][0])
        _LOCAL_CACHE[name] = gate_tableau(name, list(range(k)), k)
    return _LOCAL_CACHE[name]


def is_clifford_gate(name: str) -> bool:
    return name in _GATE_IMAGES


def tableau_of(circuit: "Circuit") -> CliffordTableau:
    """Compose the tableaus of an unconditional Clifford circuit."""
    t = CliffordTableau.identity(circuit.num_qubits)
    xs, zs = list(t.x_images), list(t.z_images)
    for inst in circuit.instructions:
        kind = inst.kind.name
        if kind == "TICK":
            continue
        if kind not in _GATE_IMAGES:
            raise UnsupportedInstructionError(f"{inst.kind.mnemonic} has no tableau")
        xs = [conjugate_by_gate(kind, inst.targets, p) for p in xs]
        zs = [conjugate_by_gate(kind, inst.targets, p) for p in zs]
    return CliffordTableau(circuit.num_qubits, tuple(xs), tuple(zs))
