"""Aaronson-Gottesman stabilizer tableau engine, vectorized over shots.

Pauli errors and Pauli feed-forward only ever flip generator signs, so every
shot of a batch shares one X/Z tableau and differs only in its sign column.
Signs live in a ``(shots, 2n)`` boolean matrix; everything else is shared.
Non-Pauli conditional gates break that sharing and are run one shot at a time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..circuit import GATES_1Q, GATES_2Q, MEASUREMENTS, PAULI_GATES, Circuit, Op
from ..noise import NoisyCircuit
from ..pauli import PauliString


class UnsupportedInstruction(ValueError):
    pass


def _phase_const(x1, z1, x2, z2) -> np.ndarray:
    """Sign bit picked up when multiplying Hermitian Paulis row-wise.

    Works on stacked rows (last axis = qubits). For anticommuting pairs the
    result is meaningless, which is fine for destabilizer rows.
    """
    x3 = x1 ^ x2
    z3 = z1 ^ z2
    e = (
        np.count_nonzero(x1 & z1, axis=-1)
        + np.count_nonzero(x2 & z2, axis=-1)
        + 2 * np.count_nonzero(z1 & x2, axis=-1)
        - np.count_nonzero(x3 & z3, axis=-1)
    )
    return ((e % 4) // 2).astype(bool)


@dataclass
class MeasureInfo:
    random: bool
    # stabilizer anticommuting with the measured Pauli, in circuit frame
    gauge_x: np.ndarray | None = None
    gauge_z: np.ndarray | None = None


class TableauSimulator:
    def __init__(self, n: int, shots: int = 1, rng: np.random.Generator | None = None):
        self.n = n
        self.shots = shots
        self.rng = rng if rng is not None else np.random.default_rng()
        self.x = np.zeros((2 * n, n), dtype=bool)
        self.z = np.zeros((2 * n, n), dtype=bool)
        idx = np.arange(n)
        self.x[idx, idx] = True
        self.z[n + idx, idx] = True
        self.r = np.zeros((shots, 2 * n), dtype=bool)

    # ------------------------------------------------------------ unitaries
    def h(self, a: int) -> None:
        self.r ^= self.x[:, a] & self.z[:, a]
        tmp = self.x[:, a].copy()
        self.x[:, a] = self.z[:, a]
        self.z[:, a] = tmp

    def s(self, a: int) -> None:
        self.r ^= self.x[:, a] & self.z[:, a]
        self.z[:, a] ^= self.x[:, a]

    def s_dag(self, a: int) -> None:
        self.r ^= self.x[:, a] & ~self.z[:, a]
        self.z[:, a] ^= self.x[:, a]

    def cx(self, a: int, b: int) -> None:
        self.r ^= self.x[:, a] & self.z[:, b] & ~(self.x[:, b] ^ self.z[:, a])
        self.x[:, b] ^= self.x[:, a]
        self.z[:, a] ^= self.z[:, b]

    def cz(self, a: int, b: int) -> None:
        self.h(b)
        self.cx(a, b)
        self.h(b)

    def pauli(self, a: int, p: str, mask: np.ndarray | None = None) -> None:
        """Apply Pauli ``p`` to qubit ``a`` on the shots selected by ``mask``."""
        if p == "I":
            return
        if p == "X":
            col = self.z[:, a]
        elif p == "Z":
            col = self.x[:, a]
        else:
            col = self.x[:, a] ^ self.z[:, a]
        if mask is None:
            self.r ^= col
        else:
            self.r[mask] ^= col

    def gate(self, kind: Op, targets, mask: np.ndarray | None = None) -> None:
        if kind in PAULI_GATES:
            self.pauli(targets[0], kind.name, mask)
            return
        if mask is not None:
            if self.shots != 1:
                raise UnsupportedInstruction("non-Pauli conditional gate needs single-shot mode")
            if not mask[0]:
                return
        if kind is Op.H:
            self.h(*targets)
        elif kind is Op.S:
            self.s(*targets)
        elif kind is Op.S_DAG:
            self.s_dag(*targets)
        elif kind is Op.CX:
            self.cx(*targets)
        elif kind is Op.CZ:
            self.cz(*targets)
        else:
            raise UnsupportedInstruction(f"{kind.mnemonic} is not a gate")

    # ---------------------------------------------------------- measurement
    def measure_z(self, a: int) -> tuple[np.ndarray, MeasureInfo]:
        n = self.n
        stab_hits = np.flatnonzero(self.x[n:, a])
        if stab_hits.size:
            p = n + int(stab_hits[0])
            gx, gz = self.x[p].copy(), self.z[p].copy()
            rows = np.flatnonzero(self.x[:, a])
            rows = rows[rows != p]
            if rows.size:
                c = _phase_const(self.x[rows], self.z[rows], self.x[p], self.z[p])
                self.x[rows] ^= self.x[p]
                self.z[rows] ^= self.z[p]
                self.r[:, rows] ^= self.r[:, [p]] ^ c
            self.x[p - n] = self.x[p]
            self.z[p - n] = self.z[p]
            self.r[:, p - n] = self.r[:, p]
            self.x[p] = False
            self.z[p] = False
            self.z[p, a] = True
            outcome = self.rng.integers(0, 2, size=self.shots).astype(bool)
            self.r[:, p] = outcome
            return outcome, MeasureInfo(True, gx, gz)
        rows = np.flatnonzero(self.x[:n, a]) + n
        sx = np.zeros(n, dtype=bool)
        sz = np.zeros(n, dtype=bool)
        const = False
        for i in rows:
            const ^= bool(_phase_const(sx, sz, self.x[i], self.z[i]))
            sx ^= self.x[i]
            sz ^= self.z[i]
        outcome = np.full(self.shots, const)
        if rows.size:
            outcome ^= np.bitwise_xor.reduce(self.r[:, rows], axis=1)
        return outcome, MeasureInfo(False)

    def measure(self, kind: Op, a: int) -> tuple[np.ndarray, MeasureInfo]:
        if kind is Op.M_Z:
            return self.measure_z(a)
        if kind is Op.M_X:
            self.h(a)
            out, info = self.measure_z(a)
            self.h(a)
            if info.random:
                _frame_h(info, a)
            return out, info
        if kind is Op.M_Y:
            self.s_dag(a)
            self.h(a)
            out, info = self.measure_z(a)
            self.h(a)
            self.s(a)
            if info.random:
                _frame_h(info, a)
                info.gauge_z[a] ^= info.gauge_x[a]
            return out, info
        raise UnsupportedInstruction(f"{kind.mnemonic} is not a measurement")

    def reset(self, kind: Op, a: int) -> None:
        if kind is Op.RESET_X:
            self.h(a)
        out, _ = self.measure_z(a)
        self.pauli(a, "X", out)
        if kind is Op.RESET_X:
            self.h(a)

    # ------------------------------------------------------------- queries
    def stabilizers(self, shot: int = 0) -> list[PauliString]:
        out = []
        for i in range(self.n, 2 * self.n):
            xm = sum(1 << j for j in np.flatnonzero(self.x[i]))
            zm = sum(1 << j for j in np.flatnonzero(self.z[i]))
            out.append(PauliString(self.n, int(xm), int(zm), 2 * int(self.r[shot, i])))
        return out

    def expectation(self, p: PauliString, shot: int = 0) -> int:
        """+1/-1 if ``p`` (Hermitian) is in the stabilizer group up to sign, else 0."""
        n = self.n
        px = np.array([(p.x_mask >> j) & 1 for j in range(n)], dtype=bool)
        pz = np.array([(p.z_mask >> j) & 1 for j in range(n)], dtype=bool)
        # p anticommutes with stabilizer row i -> not in the group
        anti = (self.x[n:] & pz).sum(axis=1) + (self.z[n:] & px).sum(axis=1)
        if np.any(anti % 2):
            return 0
        # which stabilizers compose p: destabilizer i anticommutes with p
        anti_d = ((self.x[:n] & pz).sum(axis=1) + (self.z[:n] & px).sum(axis=1)) % 2
        sx = np.zeros(n, dtype=bool)
        sz = np.zeros(n, dtype=bool)
        sign = False
        for i in np.flatnonzero(anti_d):
            row = i + n
            sign ^= bool(_phase_const(sx, sz, self.x[row], self.z[row])) ^ bool(self.r[shot, row])
            sx ^= self.x[row]
            sz ^= self.z[row]
        if not (np.array_equal(sx, px) and np.array_equal(sz, pz)):
            return 0
        want = p.phase // 2
        return -1 if sign ^ bool(want) else 1


def _frame_h(info: MeasureInfo, a: int) -> None:
    tmp = info.gauge_x[a]
    info.gauge_x[a] = info.gauge_z[a]
    info.gauge_z[a] = tmp


Hook = Callable[[TableauSimulator, np.ndarray], None]


def execute(
    circuit: Circuit,
    sim: TableauSimulator,
    hooks: dict[int, list[Hook]] | None = None,
    on_measure: Callable[[int, MeasureInfo], None] | None = None,
) -> np.ndarray:
    """Run ``circuit`` on ``sim``; returns the ``(shots, num_measurements)`` record.

    ``hooks[i]`` run after instruction ``i`` (noise injection). Measurement
    hooks see the record already written and may flip it.
    """
    hooks = hooks or {}
    rec = np.zeros((sim.shots, circuit.num_measurements), dtype=bool)
    k = 0
    for idx, inst in enumerate(circuit.instructions):
        kind = inst.kind
        if kind in GATES_1Q or kind in GATES_2Q:
            sim.gate(kind, inst.targets)
        elif kind in MEASUREMENTS:
            out, info = sim.measure(kind, inst.targets[0])
            rec[:, k] = out
            if on_measure is not None:
                on_measure(k, info)
            k += 1
        elif kind in (Op.RESET_Z, Op.RESET_X):
            sim.reset(kind, inst.targets[0])
        elif kind is Op.COND:
            mask = rec[:, inst.records[0]]
            if sim.shots > 1 and inst.payload.kind not in PAULI_GATES:
                raise UnsupportedInstruction("non-Pauli COND in batched mode")
            sim.gate(inst.payload.kind, inst.payload.targets, mask)
        elif kind in (Op.TICK, Op.DETECTOR, Op.OBSERVABLE):
            pass
        else:
            raise UnsupportedInstruction(f"unsupported instruction {kind}")
        for hook in hooks.get(idx, ()):
            hook(sim, rec)
    return rec


def run_tableau(c: Circuit, seed: int = 0) -> list[int]:
    """Noiseless single-shot run; returns the measurement record as bits."""
    sim = TableauSimulator(c.num_qubits, 1, np.random.default_rng(seed))
    rec = execute(c, sim)
    return [int(b) for b in rec[0]]


def final_state(c: Circuit, seed: int = 0) -> tuple[TableauSimulator, list[int]]:
    sim = TableauSimulator(c.num_qubits, 1, np.random.default_rng(seed))
    rec = execute(c, sim)
    return sim, [int(b) for b in rec[0]]


def parity_matrix(c: Circuit) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Boolean (records x detectors) and (records x observables) incidence."""
    dets = c.detectors
    obs = c.observable_records()
    D = np.zeros((c.num_measurements, len(dets)), dtype=bool)
    for j, d in enumerate(dets):
        for r in d.records:
            D[r, j] ^= True
    O = np.zeros((c.num_measurements, len(obs)), dtype=bool)
    ids = list(obs)
    for j, oid in enumerate(ids):
        for r in obs[oid]:
            O[r, j] ^= True
    return D, O, ids


def _parities(rec: np.ndarray, M: np.ndarray) -> np.ndarray:
    if M.shape[1] == 0:
        return np.zeros((rec.shape[0], 0), dtype=bool)
    return (rec.astype(np.uint8) @ M.astype(np.uint8)) % 2 == 1


def _pauli_hook(qubits, paulis: str, mask=None) -> Hook:
    def hook(sim: TableauSimulator, rec: np.ndarray) -> None:
        for q, p in zip(qubits, paulis):
            sim.pauli(q, p, mask)

    return hook


def run_with_faults(
    nc: NoisyCircuit, faults: list[tuple[int, str]], seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Single shot with the given (site index, outcome) faults forced on.

    Returns detector and observable *flips* relative to the noiseless run with
    the same seed.
    """
    c = nc.base
    D, O, _ = parity_matrix(c)
    ref = execute(c, TableauSimulator(c.num_qubits, 1, np.random.default_rng(seed)))
    hooks: dict[int, list[Hook]] = {}
    for si, outcome in faults:
        site = nc.sites[si]
        if site.channel == "FLIP_MEAS":
            r = site.record

            def flip(sim, rec, r=r):
                rec[:, r] ^= True

            hooks.setdefault(site.after, []).append(flip)
        else:
            hooks.setdefault(site.after, []).append(_pauli_hook(site.qubits, outcome))
    rec = execute(c, TableauSimulator(c.num_qubits, 1, np.random.default_rng(seed)), hooks)
    return (_parities(rec, D) ^ _parities(ref, D))[0], (_parities(rec, O) ^ _parities(ref, O))[0]


def sample_tableau(
    nc: NoisyCircuit, shots: int, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Noisy Monte Carlo by direct tableau simulation.

    Returns ``(shots, detectors)`` and ``(shots, observables)`` flip arrays,
    relative to a noiseless reference run.
    """
    c = nc.base
    D, O, _ = parity_matrix(c)
    ref = execute(c, TableauSimulator(c.num_qubits, 1, np.random.default_rng(seed)))
    rng = np.random.default_rng([seed, 0x7AB1E])
    hooks: dict[int, list[Hook]] = {}
    for site in nc.sites:
        fire = rng.random(shots) < site.prob
        if not fire.any():
            continue
        if site.channel == "FLIP_MEAS":
            r = site.record

            def flip(sim, rec, r=r, fire=fire):
                rec[:, r] ^= fire

            hooks.setdefault(site.after, []).append(flip)
            continue
        choice = rng.integers(0, len(site.outcomes), size=shots)
        for oi, outcome in enumerate(site.outcomes):
            mask = fire & (choice == oi)
            if mask.any():
                hooks.setdefault(site.after, []).append(_pauli_hook(site.qubits, outcome, mask))
    sim = TableauSimulator(c.num_qubits, shots, np.random.default_rng([seed, 1]))
    rec = execute(c, sim, hooks)
    return _parities(rec, D) ^ _parities(ref, D), _parities(rec, O) ^ _parities(ref, O)
