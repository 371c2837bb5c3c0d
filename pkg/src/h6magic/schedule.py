"""Layer scheduling for generated circuits.

Builders emit operations in dependency order onto a :class:`Program`; the
program packs them into TICK-separated layers and resolves measurement
handles to record indices. The default packing is just in time: operations
sit as late as the shortest schedule allows and measurements follow their
qubit's last gate directly, so qubits idle as little as possible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .circuit import Circuit, CircuitBuilder, Op, RESETS


@dataclass
class _Pending:
    kind: Op
    targets: tuple[int, ...]
    handle: int | None = None  # measurement handle this op creates
    cond: int | None = None  # measurement handle this op is conditioned on
    layer: int = 0


@dataclass
class Program:
    num_qubits: int = 0
    roles: dict[int, str] = field(default_factory=dict)
    ops: list[_Pending] = field(default_factory=list)
    detectors: list[tuple[tuple[int, ...], str]] = field(default_factory=list)
    observables: list[tuple[int, tuple[int, ...]]] = field(default_factory=list)
    _ready: dict[int, int] = field(default_factory=dict)
    _meas_layer: dict[int, int] = field(default_factory=dict)
    _handles: int = 0

    def alloc(self, k: int, role: str = "") -> list[int]:
        qs = list(range(self.num_qubits, self.num_qubits + k))
        self.num_qubits += k
        if role:
            for q in qs:
                self.roles[q] = role
        return qs

    def _place(self, op: _Pending) -> None:
        t = max((self._ready.get(q, 0) for q in op.targets), default=0)
        if op.cond is not None:
            t = max(t, self._meas_layer[op.cond] + 1)
        op.layer = t
        for q in op.targets:
            self._ready[q] = t + 1
        self.ops.append(op)

    def gate(self, kind: Op | str, *targets: int) -> None:
        self._place(_Pending(_op(kind), tuple(targets)))

    def reset(self, kind: Op | str, *qubits: int) -> None:
        for q in qubits:
            self._place(_Pending(_op(kind), (q,)))

    def measure(self, kind: Op | str, q: int) -> int:
        h = self._handles
        self._handles += 1
        op = _Pending(_op(kind), (q,), handle=h)
        self._place(op)
        self._meas_layer[h] = op.layer
        return h

    def cond(self, handle: int, kind: Op | str, *targets: int) -> None:
        self._place(_Pending(_op(kind), tuple(targets), cond=handle))

    def detector(self, handles, group: str = "") -> None:
        self.detectors.append((tuple(handles), group))

    def observable(self, obs_id: int, handles) -> None:
        self.observables.append((obs_id, tuple(handles)))

    def sync(self, qubits) -> None:
        """Make later operations on ``qubits`` start no earlier than the latest of them."""
        qubits = list(qubits)
        t = max((self._ready.get(q, 0) for q in qubits), default=0)
        for q in qubits:
            self._ready[q] = t

    def compile(self, name: str = "", schedule: str = "jit") -> Circuit:
        """Emit the circuit; ``schedule`` is ``jit`` (default) or ``asap``."""
        ops = self.ops
        if schedule == "jit":
            _just_in_time(ops)
        elif schedule != "asap":
            raise ValueError(f"unknown schedule {schedule!r}")

        order = sorted(range(len(ops)), key=lambda i: (ops[i].layer, i))
        b = CircuitBuilder(self.num_qubits, name=name)
        record: dict[int, int] = {}
        depth = max((op.layer for op in ops), default=-1) + 1
        cursor = 0
        for layer in range(depth):
            if layer:
                b.tick()
            while cursor < len(order) and ops[order[cursor]].layer == layer:
                op = ops[order[cursor]]
                cursor += 1
                if op.handle is not None:
                    record[op.handle] = b.measure(op.kind, op.targets[0])
                elif op.cond is not None:
                    b.cond(record[op.cond], op.kind, *op.targets)
                elif op.kind in RESETS:
                    b.reset(op.kind, op.targets[0])
                else:
                    b.gate(op.kind, *op.targets)
        for handles, group in self.detectors:
            b.detector([record[h] for h in handles], group)
        for oid, handles in self.observables:
            b.observable(oid, [record[h] for h in handles])
        b.circuit.roles.update(self.roles)
        return b.circuit


def _just_in_time(ops: list[_Pending]) -> None:
    """Reschedule ASAP-placed ops so qubits are live as briefly as possible.

    Everything is pushed as late as the ASAP depth allows, then each
    measurement is pulled back to directly after its qubit's previous op.
    """
    depth = max((op.layer for op in ops), default=-1) + 1
    next_use: dict[int, int] = {}
    cond_min: dict[int, int] = {}
    for op in reversed(ops):
        t = min((next_use.get(q, depth) for q in op.targets), default=depth) - 1
        if op.handle is not None and op.handle in cond_min:
            t = min(t, cond_min[op.handle] - 1)
        op.layer = t
        for q in op.targets:
            next_use[q] = t
        if op.cond is not None:
            cond_min[op.cond] = min(cond_min.get(op.cond, depth), t)
    last: dict[int, int] = {}
    for op in ops:
        if op.handle is not None:
            op.layer = last.get(op.targets[0], -1) + 1
        for q in op.targets:
            last[q] = op.layer


def _op(kind: Op | str) -> Op:
    if isinstance(kind, Op):
        return kind
    if kind in Op.__members__:
        return Op[kind]
    return Op(kind)
