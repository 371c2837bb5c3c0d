"""Dense state-vector checks for small non-Clifford identities (at most 3 qubits)."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

TOL = 1e-12
MAX_QUBITS = 3

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j])
S_DAG = S.conj().T
CZ = np.diag([1, 1, 1, -1]).astype(complex)
CH = np.block([[I2, np.zeros((2, 2))], [np.zeros((2, 2)), H]])


def ry(theta: float) -> np.ndarray:
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * Y


H_PLUS = ry(np.pi / 4) @ np.array([1, 0], dtype=complex)  # +1 eigenvector of H
H_MINUS = Y @ H_PLUS


class DenseState:
    """Normalized amplitude vector on up to three qubits; qubit 0 is the most significant."""

    def __init__(self, amplitudes):
        v = np.asarray(amplitudes, dtype=complex).ravel()
        n = int(round(np.log2(v.size)))
        if 2**n != v.size or not 1 <= n <= MAX_QUBITS:
            raise ValueError(f"need 2^n amplitudes with 1 <= n <= {MAX_QUBITS}")
        if abs(np.linalg.norm(v) - 1) > TOL:
            raise ValueError("state is not normalized")
        self.n = n
        self.vec = v

    @classmethod
    def product(cls, *states) -> "DenseState":
        v = np.array([1], dtype=complex)
        for s in states:
            v = np.kron(v, s)
        return cls(v)

    def apply(self, U: np.ndarray, *qubits: int) -> "DenseState":
        k = len(qubits)
        t = self.vec.reshape([2] * self.n)
        t = np.moveaxis(t, qubits, range(k))
        t = (U @ t.reshape(2**k, -1)).reshape([2] * self.n)
        self.vec = np.moveaxis(t, range(k), qubits).ravel()
        return self

    def project(self, q: int, vec: np.ndarray) -> tuple[float, np.ndarray]:
        """Project qubit ``q`` onto ``vec``; returns (probability, remaining state)."""
        t = np.moveaxis(self.vec.reshape([2] * self.n), q, 0)
        rest = np.tensordot(vec.conj(), t, axes=(0, 0)).ravel()
        p = float(np.vdot(rest, rest).real)
        return p, rest / np.sqrt(p) if p > 0 else rest


def phase_distance(A: np.ndarray, B: np.ndarray) -> float:
    """max |A - e^{i phi} B| over entries, with phi aligning the largest entry."""
    k = np.unravel_index(np.argmax(np.abs(B)), B.shape)
    if abs(A[k]) == 0:
        return float(np.max(np.abs(A - B)))
    phase = A[k] / B[k]
    phase /= abs(phase)
    return float(np.max(np.abs(A - phase * B)))


class Identity(str, enum.Enum):
    CH_DECOMPOSITION = "CH_DECOMPOSITION"
    RY_TELEPORT_IDENTITY = "RY_TELEPORT_IDENTITY"
    TWIRL_DEPHASING = "TWIRL_DEPHASING"


@dataclass
class DenseCheck:
    identity: str
    deviation: float
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.deviation < TOL

    def to_dict(self) -> dict:
        return {"identity": self.identity, "deviation": self.deviation, "passed": self.passed, "detail": self.detail}


def _ch_decomposition() -> DenseCheck:
    pre, post = np.kron(I2, ry(-np.pi / 4)), np.kron(I2, ry(np.pi / 4))
    # circuit order: Ry(-pi/4) acts first, so it is the rightmost matrix
    time_order = post @ CZ @ pre
    matrix_order = pre @ CZ @ post
    return DenseCheck(
        Identity.CH_DECOMPOSITION.value,
        phase_distance(time_order, CH),
        {"matrix_order_deviation": phase_distance(matrix_order, CH)},
    )


def teleport_ry(psi, resource, sign: int = 1) -> list[tuple[float, np.ndarray]]:
    """Dense run of the builders' teleported Y rotation, one entry per Y outcome.

    Data is framed by S^sign then H, entangled with the resource by CZ and
    unframed; the resource is projected onto |+i> (outcome 0) and |-i>.
    """
    frame, unframe = (S_DAG, S) if sign > 0 else (S, S_DAG)
    st = DenseState.product(psi, resource)
    st.apply(frame, 0).apply(H, 0).apply(CZ, 0, 1).apply(H, 0).apply(unframe, 0)
    y_plus = np.array([1, 1j]) / np.sqrt(2)
    y_minus = np.array([1, -1j]) / np.sqrt(2)
    return [st.project(1, y_plus), st.project(1, y_minus)]


def _ry_teleport(samples: int = 8, seed: int = 0) -> DenseCheck:
    rng = np.random.default_rng(seed)
    inputs = [np.array([1, 0], dtype=complex)]
    for _ in range(samples):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        inputs.append(v / np.linalg.norm(v))
    worst = worst_proxy = 0.0
    probs = []
    for psi in inputs:
        for sign in (1, -1):
            # magic resource: outcome 0 enacts Ry(sign pi/4), outcome 1 the
            # opposite rotation, fixed by Ry(sign pi/2)
            (p0, out0), (p1, out1) = teleport_ry(psi, H_PLUS, sign)
            want = ry(sign * np.pi / 4) @ psi
            worst = max(
                worst,
                phase_distance(out0, want),
                phase_distance(ry(sign * np.pi / 2) @ out1, want),
            )
            probs.append((p0, p1))
            # stabilizer proxy: Ry(sign pi/2), fixed by Y
            plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
            (_, q0), (_, q1) = teleport_ry(psi, plus, sign)
            want = ry(sign * np.pi / 2) @ psi
            worst_proxy = max(worst_proxy, phase_distance(q0, want), phase_distance(Y @ q1, want))
    return DenseCheck(
        Identity.RY_TELEPORT_IDENTITY.value,
        max(worst, worst_proxy),
        {
            "magic_deviation": worst,
            "proxy_deviation": worst_proxy,
            "outcome_probability_spread": float(np.max(np.abs(np.array(probs) - 0.5))),
        },
    )


def twirl(rho: np.ndarray, U: np.ndarray) -> np.ndarray:
    return (rho + U @ rho @ U.conj().T) / 2


def _twirl_dephasing(b: complex = 0.1) -> DenseCheck:
    basis = np.column_stack([H_PLUS, H_MINUS])
    coeffs = np.array([[0.7, b], [np.conj(b), 0.3]])
    rho = basis @ coeffs @ basis.conj().T
    out = basis.conj().T @ twirl(rho, H) @ basis
    single = float(max(abs(out[0, 1]), abs(out[1, 0])))
    # two-qubit version: logical 1 parked in |Y->, twirled by H on 0 and X H on 1
    y_minus = np.array([1, -1j]) / np.sqrt(2)
    rho2 = np.kron(rho, np.outer(y_minus, y_minus.conj()))
    out2 = twirl(rho2, np.kron(H, X @ H))
    b2 = np.kron(basis, np.column_stack([y_minus, Y @ y_minus]))
    m = b2.conj().T @ out2 @ b2
    paired = float(max(abs(m[0, 2]), abs(m[2, 0])))
    diag_kept = float(abs(out[0, 0] - coeffs[0, 0]) + abs(out[1, 1] - coeffs[1, 1]))
    return DenseCheck(
        Identity.TWIRL_DEPHASING.value,
        max(single, paired, diag_kept),
        {"single_qubit_offdiag": single, "with_y_minus_offdiag": paired, "diagonal_change": diag_kept},
    )


_CHECKS = {
    Identity.CH_DECOMPOSITION: _ch_decomposition,
    Identity.RY_TELEPORT_IDENTITY: _ry_teleport,
    Identity.TWIRL_DEPHASING: _twirl_dephasing,
}


def dense_verify(identity: Identity | str) -> DenseCheck:
    """Check one identity; ``deviation`` is the worst entrywise error."""
    return _CHECKS[Identity(identity)]()


def dense_verify_all() -> list[DenseCheck]:
    return [dense_verify(k) for k in Identity]
