"""Instruction-level circuit IR and its line-oriented text format.

Text grammar (one instruction per line)::

    QUBITS <n>
    H 0            # single-qubit gates: H X Y Z S SDG
    CX 0 1         # two-qubit gates: CX CZ (targets taken in pairs)
    MZ 0 1         # measurements MZ MX MY, one record per target
    RZ 2           # resets RZ RX
    TICK
    COND r3 X 4    # apply X 4 iff record r3 is 1
    DETECTOR r3 r5
    OBSERVABLE 0 r1 r2

Measurement records are numbered ``r0, r1, ...`` in program order. ``#`` starts
a comment; ``#! name ...`` and ``#! role <q> <label>`` carry metadata, and a
trailing ``# group=<label>`` on a DETECTOR line tags its post-selection group.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class Op(enum.Enum):
    H = "H"
    X = "X"
    Y = "Y"
    Z = "Z"
    S = "S"
    S_DAG = "SDG"
    CX = "CX"
    CZ = "CZ"
    M_Z = "MZ"
    M_X = "MX"
    M_Y = "MY"
    RESET_Z = "RZ"
    RESET_X = "RX"
    TICK = "TICK"
    DETECTOR = "DETECTOR"
    OBSERVABLE = "OBSERVABLE"
    COND = "COND"

    @property
    def mnemonic(self) -> str:
        return self.value

    @property
    def is_gate(self) -> bool:
        return self in GATES_1Q or self in GATES_2Q

    @property
    def is_measurement(self) -> bool:
        return self in MEASUREMENTS


GATES_1Q = frozenset({Op.H, Op.X, Op.Y, Op.Z, Op.S, Op.S_DAG})
GATES_2Q = frozenset({Op.CX, Op.CZ})
PAULI_GATES = frozenset({Op.X, Op.Y, Op.Z})
MEASUREMENTS = frozenset({Op.M_Z, Op.M_X, Op.M_Y})
RESETS = frozenset({Op.RESET_Z, Op.RESET_X})
_BY_MNEMONIC = {op.value: op for op in Op}


class CircuitError(ValueError):
    """Malformed circuit text or an invalid instruction."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


@dataclass(frozen=True)
class Instruction:
    kind: Op
    targets: tuple[int, ...] = ()
    records: tuple[int, ...] = ()
    payload: "Instruction | None" = None
    obs_id: int | None = None
    tag: str = ""

    def qubits(self) -> tuple[int, ...]:
        if self.kind is Op.COND and self.payload is not None:
            return self.payload.targets
        return self.targets


@dataclass
class Circuit:
    """Ordered instructions over ``num_qubits`` qubits.

    Instances are treated as immutable once built; use :class:`CircuitBuilder`
    (or :meth:`append`, during construction only) to assemble them.
    """

    num_qubits: int
    instructions: list[Instruction] = field(default_factory=list)
    name: str = ""
    roles: dict[int, str] = field(default_factory=dict)
    num_measurements: int = 0

    def __post_init__(self):
        self.num_measurements = 0
        checked = list(self.instructions)
        self.instructions = []
        for inst in checked:
            self.append(inst)

    def append(self, inst: Instruction) -> int | None:
        """Validate and append; returns the record index for measurements."""
        _validate(inst, self.num_qubits, self.num_measurements)
        self.instructions.append(inst)
        if inst.kind in MEASUREMENTS:
            self.num_measurements += 1
            return self.num_measurements - 1
        return None

    def __eq__(self, other) -> bool:
        if not isinstance(other, Circuit):
            return NotImplemented
        return (
            self.num_qubits == other.num_qubits
            and self.instructions == other.instructions
            and self.name == other.name
            and self.roles == other.roles
        )

    @property
    def detectors(self) -> list[Instruction]:
        return [i for i in self.instructions if i.kind is Op.DETECTOR]

    @property
    def observables(self) -> dict[int, list[Instruction]]:
        out: dict[int, list[Instruction]] = {}
        for i in self.instructions:
            if i.kind is Op.OBSERVABLE:
                out.setdefault(i.obs_id, []).append(i)
        return out

    def observable_records(self) -> dict[int, tuple[int, ...]]:
        """Observable id -> records (XOR-combined if declared more than once)."""
        out: dict[int, set[int]] = {}
        for i in self.instructions:
            if i.kind is Op.OBSERVABLE:
                out.setdefault(i.obs_id, set()).symmetric_difference_update(i.records)
        return {k: tuple(sorted(v)) for k, v in sorted(out.items())}

    def detector_groups(self) -> list[str]:
        return [d.tag for d in self.detectors]

    def measurement_instructions(self) -> list[Instruction]:
        return [i for i in self.instructions if i.kind in MEASUREMENTS]


def _validate(inst: Instruction, n: int, num_meas: int) -> None:
    k = inst.kind
    if k in GATES_1Q or k in MEASUREMENTS or k in RESETS:
        if len(inst.targets) != 1:
            raise CircuitError(f"{k.mnemonic} takes exactly one target")
    elif k in GATES_2Q:
        if len(inst.targets) != 2:
            raise CircuitError(f"{k.mnemonic} takes exactly two targets")
        if inst.targets[0] == inst.targets[1]:
            raise CircuitError(f"repeated target {inst.targets[0]} in {k.mnemonic}")
    elif k is Op.TICK:
        if inst.targets or inst.records:
            raise CircuitError("TICK takes no arguments")
    elif k in (Op.DETECTOR, Op.OBSERVABLE):
        if inst.targets:
            raise CircuitError(f"{k.mnemonic} takes record references only")
        if k is Op.OBSERVABLE and (inst.obs_id is None or inst.obs_id < 0):
            raise CircuitError("OBSERVABLE needs a non-negative id")
    elif k is Op.COND:
        if len(inst.records) != 1 or inst.payload is None:
            raise CircuitError("COND needs one record and one gate")
        if not inst.payload.kind.is_gate:
            raise CircuitError("COND payload must be a unitary gate")
        _validate(inst.payload, n, num_meas)
    for q in inst.targets:
        if not 0 <= q < n:
            raise CircuitError(f"target {q} out of range for {n} qubits")
    for r in inst.records:
        if not 0 <= r < num_meas:
            raise CircuitError(f"record r{r} is not an earlier measurement")


class CircuitBuilder:
    """Convenience accumulator used by the circuit builders."""

    def __init__(self, num_qubits: int, name: str = ""):
        self.circuit = Circuit(num_qubits, name=name)

    def gate(self, kind: Op | str, *targets: int) -> None:
        kind = _as_op(kind)
        self.circuit.append(Instruction(kind, tuple(targets)))

    def measure(self, kind: Op | str, qubit: int) -> int:
        return self.circuit.append(Instruction(_as_op(kind), (qubit,)))

    def reset(self, kind: Op | str, qubit: int) -> None:
        self.circuit.append(Instruction(_as_op(kind), (qubit,)))

    def tick(self) -> None:
        self.circuit.append(Instruction(Op.TICK))

    def cond(self, record: int, kind: Op | str, *targets: int) -> None:
        payload = Instruction(_as_op(kind), tuple(targets))
        self.circuit.append(Instruction(Op.COND, records=(record,), payload=payload))

    def detector(self, records: Iterable[int], group: str = "") -> None:
        self.circuit.append(Instruction(Op.DETECTOR, records=tuple(records), tag=group))

    def observable(self, obs_id: int, records: Iterable[int]) -> None:
        self.circuit.append(Instruction(Op.OBSERVABLE, records=tuple(records), obs_id=obs_id))

    def role(self, qubit: int, label: str) -> None:
        self.circuit.roles[qubit] = label


def _as_op(kind: Op | str) -> Op:
    if isinstance(kind, Op):
        return kind
    if kind in Op.__members__:
        return Op[kind]
    return _BY_MNEMONIC[kind]


# ---------------------------------------------------------------- text format


def _parse_record(tok: str, lineno: int, col: int) -> int:
    if not tok.startswith("r") or not tok[1:].isdigit():
        raise CircuitError(f"expected record reference r<k>, got {tok!r}", lineno, col)
    return int(tok[1:])


def _parse_int(tok: str, lineno: int, col: int) -> int:
    if not tok.isdigit():
        raise CircuitError(f"expected non-negative integer, got {tok!r}", lineno, col)
    return int(tok)


def _tokens(line: str) -> list[tuple[str, int]]:
    out = []
    i = 0
    while i < len(line):
        if line[i].isspace():
            i += 1
            continue
        j = i
        while j < len(line) and not line[j].isspace():
            j += 1
        out.append((line[i:j], i + 1))
        i = j
    return out


def parse(text: str) -> Circuit:
    """Parse circuit text; raises :class:`CircuitError` with line/column."""
    circuit: Circuit | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body, _, comment = raw.partition("#")
        comment = comment.strip()
        toks = _tokens(body)
        if not toks:
            if comment.startswith("!") and circuit is not None:
                _parse_pragma(circuit, comment[1:].split(), lineno)
            continue
        head, hcol = toks[0]
        if circuit is None:
            if head != "QUBITS" or len(toks) != 2:
                raise CircuitError("first instruction must be 'QUBITS <n>'", lineno, hcol)
            circuit = Circuit(_parse_int(toks[1][0], lineno, toks[1][1]))
            continue
        if head == "QUBITS":
            raise CircuitError("duplicate QUBITS header", lineno, hcol)
        try:
            for inst in _parse_instruction(head, toks[1:], lineno, hcol, comment):
                circuit.append(inst)
        except CircuitError as exc:
            if exc.line is None:
                raise CircuitError(str(exc), lineno, hcol) from None
            raise
    if circuit is None:
        raise CircuitError("missing 'QUBITS <n>' header", 1, 1)
    return circuit


def _parse_pragma(circuit: Circuit, words: list[str], lineno: int) -> None:
    if not words:
        return
    if words[0] == "name":
        circuit.name = " ".join(words[1:])
    elif words[0] == "role" and len(words) == 3:
        circuit.roles[_parse_int(words[1], lineno, None)] = words[2]


def _parse_instruction(head, args, lineno, hcol, comment) -> list[Instruction]:
    if head not in _BY_MNEMONIC:
        raise CircuitError(f"unknown mnemonic {head!r}", lineno, hcol)
    op = _BY_MNEMONIC[head]
    if op is Op.TICK:
        if args:
            raise CircuitError("TICK takes no arguments", lineno, args[0][1])
        return [Instruction(Op.TICK)]
    if op is Op.DETECTOR:
        if not args:
            raise CircuitError("DETECTOR needs at least one record", lineno, hcol)
        recs = tuple(_parse_record(t, lineno, c) for t, c in args)
        tag = comment[len("group="):].strip() if comment.startswith("group=") else ""
        return [Instruction(Op.DETECTOR, records=recs, tag=tag)]
    if op is Op.OBSERVABLE:
        if len(args) < 2:
            raise CircuitError("OBSERVABLE needs an id and at least one record", lineno, hcol)
        oid = _parse_int(args[0][0], lineno, args[0][1])
        recs = tuple(_parse_record(t, lineno, c) for t, c in args[1:])
        return [Instruction(Op.OBSERVABLE, records=recs, obs_id=oid)]
    if op is Op.COND:
        if len(args) < 3:
            raise CircuitError("COND needs r<k>, a gate and targets", lineno, hcol)
        rec = _parse_record(args[0][0], lineno, args[0][1])
        gate_tok, gcol = args[1]
        if gate_tok not in _BY_MNEMONIC or not _BY_MNEMONIC[gate_tok].is_gate:
            raise CircuitError(f"COND payload must be a gate, got {gate_tok!r}", lineno, gcol)
        payloads = _parse_instruction(gate_tok, args[2:], lineno, gcol, "")
        return [Instruction(Op.COND, records=(rec,), payload=p) for p in payloads]
    targets = [_parse_int(t, lineno, c) for t, c in args]
    if not targets:
        raise CircuitError(f"{head} needs targets", lineno, hcol)
    arity = 2 if op in GATES_2Q else 1
    if len(targets) % arity:
        raise CircuitError(f"{head} targets must come in pairs", lineno, args[-1][1])
    if op.is_gate and len(set(targets)) != len(targets):
        dup = next(t for t in targets if targets.count(t) > 1)
        col = next(c for t, c in args if int(t) == dup)
        raise CircuitError(f"repeated target {dup} in one gate", lineno, col)
    return [Instruction(op, tuple(targets[i : i + arity])) for i in range(0, len(targets), arity)]


def _format_instruction(inst: Instruction) -> str:
    k = inst.kind
    if k is Op.TICK:
        return "TICK"
    if k is Op.DETECTOR:
        line = "DETECTOR " + " ".join(f"r{r}" for r in inst.records)
        return line + (f" # group={inst.tag}" if inst.tag else "")
    if k is Op.OBSERVABLE:
        return f"OBSERVABLE {inst.obs_id} " + " ".join(f"r{r}" for r in inst.records)
    if k is Op.COND:
        return f"COND r{inst.records[0]} " + _format_instruction(inst.payload)
    return k.mnemonic + " " + " ".join(str(t) for t in inst.targets)


def serialize(c: Circuit) -> str:
    lines = [f"QUBITS {c.num_qubits}"]
    if c.name:
        lines.append(f"#! name {c.name}")
    for q in sorted(c.roles):
        lines.append(f"#! role {q} {c.roles[q]}")
    lines.extend(_format_instruction(i) for i in c.instructions)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- statistics


@dataclass(frozen=True)
class CircuitStats:
    depth: int
    depth_with_measurements: int
    count_1q: int
    count_2q: int
    count_meas: int
    count_reset: int
    qubit_count_used: int


def layers(c: Circuit) -> list[list[Instruction]]:
    """Split instructions into TICK-delimited layers (TICK itself excluded)."""
    out: list[list[Instruction]] = [[]]
    for inst in c.instructions:
        if inst.kind is Op.TICK:
            out.append([])
        else:
            out[-1].append(inst)
    return out


def stats(c: Circuit) -> CircuitStats:
    """Gate counts and TICK-layered depth.

    ``depth`` is the largest number of layers in which any single qubit is
    acted on by a unitary gate; ``depth_with_measurements`` also counts layers
    where the qubit is only measured or reset.
    """
    gate_layers: dict[int, int] = {}
    any_layers: dict[int, int] = {}
    n1 = n2 = nm = nr = 0
    used: set[int] = set()
    for layer in layers(c):
        gate_q: set[int] = set()
        any_q: set[int] = set()
        for inst in layer:
            k = inst.kind
            qs = inst.qubits()
            if k is Op.COND:
                k = inst.payload.kind
            if k in GATES_1Q:
                n1 += 1
                gate_q.update(qs)
            elif k in GATES_2Q:
                n2 += 1
                gate_q.update(qs)
            elif k in MEASUREMENTS:
                nm += 1
            elif k in RESETS:
                nr += 1
            any_q.update(qs)
            used.update(qs)
        for q in gate_q:
            gate_layers[q] = gate_layers.get(q, 0) + 1
        for q in any_q:
            any_layers[q] = any_layers.get(q, 0) + 1
    return CircuitStats(
        depth=max(gate_layers.values(), default=0),
        depth_with_measurements=max(any_layers.values(), default=0),
        count_1q=n1,
        count_2q=n2,
        count_meas=nm,
        count_reset=nr,
        qubit_count_used=len(used),
    )


def touched_qubits(layer: Sequence[Instruction]) -> set[int]:
    out: set[int] = set()
    for inst in layer:
        out.update(inst.qubits())
    return out
