"""Circuit builders for the H6 magic-state protocols and their Clifford proxies.

Proxy substitution (stabilizer-simulable stand-ins for the non-Clifford
protocol) is owned by :data:`PROXY`: magic inputs become ``|+>``, controlled
Hadamards become CNOTs and the pi/4 Y-rotations become pi/2 Y-rotations whose
teleportation corrections are Pauli.

Block helpers take a :class:`~h6magic.schedule.Program` and qubit lists so the
same pieces build standalone circuits, the level-1 protocol and its
self-concatenation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .circuit import Circuit, Op
from .schedule import Program

# Inputs: logical 0 enters on qubit 5, logical 1 on qubit 3. Qubits 0 and 2
# start in |+>, qubits 1 and 4 in |0>. Found by search over fan-out orders:
# the ordering keeps every single fault to at most one flipped logical.
ENCODER_INPUTS = (5, 3)
ENCODER_PLUS = (0, 2)
ENCODER_ZERO = (1, 4)
ENCODER_CNOTS = (
    (0, 4), (2, 1), (3, 1), (2, 3), (0, 1),
    (5, 0), (2, 0), (5, 3), (3, 5), (0, 5),
)  # fmt: skip

FT_PREP_CONTROLS = (0, 2)
FT_PREP_TARGETS = ((1, 4, 5), (3, 4, 5))

LOGICAL_SUPPORT = ((0, 2, 4), (1, 3, 5))
STABILIZER_SUPPORT = ((0, 1, 2, 3), (2, 3, 4, 5))


@dataclass(frozen=True)
class ProxyRule:
    magic_input: str = "+"
    controlled_gate: str = "CX"
    rotation_quarter_turns: int = 1  # Ry(pi/2) stands in for Ry(pi/4)


PROXY = ProxyRule()


class CircuitKind(enum.Enum):
    ENCODER = "encoder"
    CHECK_TWO_STATE_PROXY = "check-two-state"
    CHECK_ONE_STATE_PROXY = "check-one-state"
    Y2_CHECK = "y2-check"
    FT_PREP_00 = "ft-prep-00"
    QED_X_ROUND = "qed-x"
    BENCH_LEVEL1_PROXY = "bench-level1"
    TELEPORT_RY_HALF_PI = "teleport-ry"
    CNOT_VIA_TELEPORT = "cnot-teleport"
    CODE_SWITCH_NONFT = "code-switch-nonft"
    CODE_SWITCH_FT = "code-switch-ft"
    LEVEL1_PROTOCOL = "level1"
    LEVEL2_PROTOCOL = "level2"


# ------------------------------------------------------------ physical pieces


def prep(prog: Program, q: int, state: str) -> None:
    """Prepare a Pauli eigenstate: one of 0 1 + - Y+ Y-."""
    if state in ("0", "1"):
        prog.reset(Op.RESET_Z, q)
        if state == "1":
            prog.gate(Op.X, q)
    elif state in ("+", "-", "Y+", "Y-"):
        prog.reset(Op.RESET_X, q)
        if state == "-":
            prog.gate(Op.Z, q)
        elif state == "Y+":
            prog.gate(Op.S, q)
        elif state == "Y-":
            prog.gate(Op.S_DAG, q)
    else:
        raise ValueError(f"unknown input state {state!r}")


def basis_measure(prog: Program, q: int, basis: str) -> int:
    return prog.measure({"X": Op.M_X, "Y": Op.M_Y, "Z": Op.M_Z}[basis], q)


def teleport_ry(prog: Program, d: int, r: int, sign: int = 1, prepare: bool = True) -> int:
    """Teleport Ry(sign*pi/2) onto ``d`` from a ``|+>`` resource on ``r``.

    The data qubit is rotated into the Y frame, entangled by CZ and rotated
    back; the resource is read out in Y. The wrong outcome leaves Y times the
    intended rotation, fixed by a conditional Y.
    """
    if prepare:
        prep(prog, r, "+")
    frame = Op.S_DAG if sign > 0 else Op.S
    unframe = Op.S if sign > 0 else Op.S_DAG
    prog.gate(frame, d)
    prog.gate(Op.H, d)
    prog.gate(Op.CZ, d, r)
    prog.gate(Op.H, d)
    prog.gate(unframe, d)
    m = prog.measure(Op.M_Y, r)
    prog.cond(m, Op.Y, d)
    return m


# ----------------------------------------------------------- H6 block pieces


def encoder(prog: Program, data, inputs=("+", "+")) -> None:
    """Encode two single-qubit states into the two logicals of ``data``."""
    for q, s in zip(ENCODER_INPUTS, inputs):
        prep(prog, data[q], s)
    for q in ENCODER_PLUS:
        prep(prog, data[q], "+")
    for q in ENCODER_ZERO:
        prep(prog, data[q], "0")
    for c, t in ENCODER_CNOTS:
        prog.gate(Op.CX, data[c], data[t])


def ft_prep_00(prog: Program, data, flags, group: str = "ft_prep") -> list[int]:
    """Flagged bipartite-graph preparation of ``|00>_L``; returns flag handles."""
    for c in FT_PREP_CONTROLS:
        prep(prog, data[c], "+")
    for q in (1, 3, 4, 5):
        prep(prog, data[q], "0")
    for f in flags:
        prep(prog, f, "0")
    handles = []
    for c, ts, f in zip(FT_PREP_CONTROLS, FT_PREP_TARGETS, flags):
        prog.gate(Op.CX, data[c], f)
        for t in ts:
            prog.gate(Op.CX, data[c], data[t])
        prog.gate(Op.CX, data[c], f)
    for f in flags:
        h = prog.measure(Op.M_Z, f)
        prog.detector([h], group)
        handles.append(h)
    return handles


def check_pair(prog: Program, data, anc, flag, a_targets, f_targets, group: str) -> tuple[int, int]:
    """Measure the X-parity of ``a_targets + f_targets`` with a flagged Bell-pair ancilla."""
    prep(prog, anc, "+")
    prep(prog, flag, "0")
    prog.gate(Op.CX, anc, flag)
    for i in range(max(len(a_targets), len(f_targets))):
        if i < len(a_targets):
            prog.gate(PROXY.controlled_gate, anc, data[a_targets[i]])
        if i < len(f_targets):
            prog.gate(PROXY.controlled_gate, flag, data[f_targets[i]])
    prog.gate(Op.CX, anc, flag)
    ha = prog.measure(Op.M_X, anc)
    hf = prog.measure(Op.M_Z, flag)
    prog.detector([ha], group)
    prog.detector([hf], group)
    return ha, hf


def check_two_state(prog: Program, data, anc, flag, group: str = "check") -> tuple[int, int]:
    """Proxy of the transversal controlled-H check: measures X on all six qubits."""
    return check_pair(prog, data, anc, flag, (0, 1, 2), (3, 4, 5), group)


def check_one_state(prog: Program, data, anc, flag, group: str = "check") -> tuple[int, int]:
    """Proxy of the single-magic-state check: measures logical X of qubit 0 only."""
    return check_pair(prog, data, anc, flag, (0, 2), (4,), group)


def y2_check(prog: Program, data, anc, group: str = "y2") -> int:
    """Measure IYIYIY (minus logical Y of qubit 1) with controlled-Y gates.

    No flag: an X or Y hook on the ancilla leaves a Y-type error on a subset of
    qubits 1, 3, 5, which is either detectable or a logical Y on qubit 1,
    whose sign the check itself reports.
    """
    prep(prog, anc, "+")
    for q in LOGICAL_SUPPORT[1]:
        t = data[q]
        prog.gate(Op.S_DAG, t)
        prog.gate(Op.CX, anc, t)
        prog.gate(Op.S, t)
    h = prog.measure(Op.M_X, anc)
    prog.detector([h], group)
    return h


def qed_x(prog: Program, data, a, b, group: str = "qed") -> tuple[int, int]:
    """One round of X-syndrome extraction on XXXXII and IIXXXX."""
    prep(prog, a, "+")
    prep(prog, b, "+")
    order_a = (0, 1, 2, 3)
    order_b = (4, 5, 3, 2)
    for qa, qb in zip(order_a, order_b):
        prog.gate(Op.CX, a, data[qa])
        prog.gate(Op.CX, b, data[qb])
    ha = prog.measure(Op.M_X, a)
    hb = prog.measure(Op.M_X, b)
    prog.detector([ha], group)
    prog.detector([hb], group)
    return ha, hb


def readout(
    prog: Program,
    data,
    basis: str = "X",
    observables: dict[int, int] | None = None,
    group: str = "final",
    detectors: bool = True,
) -> list[int]:
    """Destructive transversal readout; ``observables`` maps logical index -> id."""
    hs = [basis_measure(prog, q, basis) for q in data]
    if detectors:
        for sup in STABILIZER_SUPPORT:
            prog.detector([hs[i] for i in sup], group)
    for lg, oid in (observables or {}).items():
        prog.observable(oid, [hs[i] for i in LOGICAL_SUPPORT[lg]])
    return hs


def transversal(prog: Program, kind: Op, a, b=None) -> None:
    if b is None:
        for q in a:
            prog.gate(kind, q)
    else:
        for qa, qb in zip(a, b):
            prog.gate(kind, qa, qb)


def logical_s(prog: Program, block, dagger: bool = False) -> None:
    """Logical S on both qubits; S on every physical qubit acts as S-dagger."""
    transversal(prog, Op.S if dagger else Op.S_DAG, block)


def teleport_ry_block(prog: Program, target, resource, sign: int = 1, group: str = "teleport"):
    """Transversal Ry(sign*pi/2) on both logicals of ``target`` from a ``|++>_L`` block."""
    logical_s(prog, target, dagger=sign > 0)
    transversal(prog, Op.H, target)
    transversal(prog, Op.CZ, target, resource)
    transversal(prog, Op.H, target)
    logical_s(prog, target, dagger=sign < 0)
    hs = readout(prog, resource, "Y", group=group)
    # logical Y = -YIYIYI: the logical outcome is 1 XOR (record parity)
    for lg in (0, 1):
        sup = LOGICAL_SUPPORT[lg]
        for i in sup:
            prog.gate(Op.Y, target[i])
        for r in sup:
            for i in sup:
                prog.cond(hs[r], Op.Y, target[i])
    return hs


# ----------------------------------------------------------- composite blocks


@dataclass
class Block:
    data: list[int]
    ancillas: list[int]


def level1_block(prog: Program, inputs=("+", "+"), qed: bool = True, label: str = "l1") -> Block:
    """Encoder, flagged transversal check and an X-syndrome round on 8 qubits."""
    data = prog.alloc(6, f"{label}:data")
    anc, flag = prog.alloc(1, f"{label}:ancilla") + prog.alloc(1, f"{label}:flag")
    encoder(prog, data, inputs)
    check_two_state(prog, data, anc, flag, group=f"{label}_check")
    if qed:
        qed_x(prog, data, anc, flag, group=f"{label}_qed")
    return Block(data, [anc, flag])


def one_state_block(prog: Program, label: str = "ms", y2_first: bool = False) -> Block:
    """Single-magic-state variant: ``|+, Y->_L`` with its X-check, Y2 check and QED round."""
    data = prog.alloc(6, f"{label}:data")
    anc, flag = prog.alloc(1, f"{label}:ancilla") + prog.alloc(1, f"{label}:flag")
    encoder(prog, data, (PROXY.magic_input, "Y-"))
    if y2_first:
        y2_check(prog, data, anc, group=f"{label}_y2")
        check_one_state(prog, data, anc, flag, group=f"{label}_check")
    else:
        check_one_state(prog, data, anc, flag, group=f"{label}_check")
        y2_check(prog, data, anc, group=f"{label}_y2")
    qed_x(prog, data, anc, flag, group=f"{label}_qed")
    return Block(data, [anc, flag])


def ft_block(prog: Program, basis: str = "0", label: str = "ft") -> Block:
    """``|00>_L`` (or ``|++>_L`` via transversal H) from the flagged preparation."""
    data = prog.alloc(6, f"{label}:data")
    flags = prog.alloc(2, f"{label}:flag")
    ft_prep_00(prog, data, flags, group=f"{label}_flag")
    if basis == "+":
        transversal(prog, Op.H, data)
    return Block(data, flags)


def cnot_via_teleport_block(prog: Program, control, target, resources, group: str = "teleport"):
    """Logical CNOT as Ry(-pi/2), transversal CZ, Ry(pi/2) on the target block."""
    teleport_ry_block(prog, target, resources[0], sign=-1, group=group)
    transversal(prog, Op.CZ, control, target)
    teleport_ry_block(prog, target, resources[1], sign=1, group=group)


# ----------------------------------------------------------------- protocols


def level1_protocol(qed: bool = True, check: bool = True) -> Circuit:
    """Level-1 |+> proxy: encoder, check, QED_X round, X readout of both logicals.

    ``check=False, qed=False`` gives the non-fault-tolerant comparison mode
    (final syndromes still post-selected).
    """
    prog = Program()
    data = prog.alloc(6, "data")
    anc, flag = prog.alloc(1, "ancilla") + prog.alloc(1, "flag")
    encoder(prog, data, (PROXY.magic_input, PROXY.magic_input))
    if check:
        check_two_state(prog, data, anc, flag)
    if qed:
        qed_x(prog, data, anc, flag)
    readout(prog, data, "X", {0: 0, 1: 1})
    return prog.compile("level1-proxy")


def level2_program(prog: Program | None = None) -> tuple[Program, dict]:
    """Self-concatenated proxy protocol; every physical op becomes a block op.

    Returns the program and an accounting dict of qubits per role.
    """
    prog = prog or Program()
    blocks: list[Block | None] = [None] * 6
    for lg, q in enumerate(ENCODER_INPUTS):
        blocks[q] = level1_block(prog, label=f"in{lg}")
    for q in ENCODER_PLUS:
        blocks[q] = ft_block(prog, "+", label=f"enc{q}")
    for q in ENCODER_ZERO:
        blocks[q] = ft_block(prog, "0", label=f"enc{q}")
    data = [b.data for b in blocks]
    for c, t in ENCODER_CNOTS:
        transversal(prog, Op.CX, data[c], data[t])

    anc = ft_block(prog, "+", label="check_anc")
    flag = ft_block(prog, "0", label="check_flag")
    transversal(prog, Op.CX, anc.data, flag.data)
    n_res = 0
    for owner, targets in ((anc, (0, 1, 2)), (flag, (3, 4, 5))):
        for t in targets:
            r1 = level1_block(prog, label=f"res{n_res}")
            r2 = level1_block(prog, label=f"res{n_res + 1}")
            n_res += 2
            cnot_via_teleport_block(prog, owner.data, data[t], (r1.data, r2.data), group="l2_teleport")
    transversal(prog, Op.CX, anc.data, flag.data)
    ha = readout(prog, anc.data, "X", group="l2_check")
    hf = readout(prog, flag.data, "Z", group="l2_check")
    for lg in (0, 1):
        prog.detector([ha[i] for i in LOGICAL_SUPPORT[lg]], "l2_check")
        prog.detector([hf[i] for i in LOGICAL_SUPPORT[lg]], "l2_check")

    final = [readout(prog, d, "X", group="l2_final") for d in data]
    for lg in (0, 1):
        inner = [[h[i] for i in LOGICAL_SUPPORT[lg]] for h in final]
        for sup in STABILIZER_SUPPORT:
            prog.detector([r for b in sup for r in inner[b]], "l2_final")
        for outer in (0, 1):
            prog.observable(2 * lg + outer, [r for b in LOGICAL_SUPPORT[outer] for r in inner[b]])
    accounting = {
        "input_blocks": 2 * 8,
        "encoder_ancilla_blocks": 4 * 8,
        "check_blocks": 2 * 8,
        "teleport_resource_blocks": n_res * 8,
        "total": prog.num_qubits,
    }
    return prog, accounting


def level2_protocol() -> Circuit:
    prog, _ = level2_program()
    return prog.compile("level2-proxy")


def bench_level1(twirl: bool = False, qed_after: bool = True) -> Circuit:
    """Two single-magic-state blocks; one rotates the other back to ``|0>_L``.

    The proxy rotation Ry(-pi/2) takes ``|+>`` to ``|0>``; logical 0 of the
    data block is read out in Z.
    """
    prog = Program()
    a = one_state_block(prog, label="data")
    b = one_state_block(prog, label="magic")
    if twirl:
        pauli_twirl(prog, b.data)
    teleport_ry_block(prog, a.data, b.data, sign=-1, group="teleport")
    if qed_after:
        qed_x(prog, a.data, a.ancillas[0], a.ancillas[1], group="teleport_qed")
    readout(prog, a.data, "Z", {0: 0})
    return prog.compile("bench-level1-proxy")


def pauli_twirl(prog: Program, block) -> None:
    """Apply logical X on qubit 0 and Y on qubit 1 conditioned on a fresh random bit.

    Both are stabilizers of the proxy resource ``|+, Y->_L``, standing in for
    the transversal Hadamard twirl of the magic-state version.
    """
    coin = prog.alloc(1, "twirl")[0]
    prep(prog, coin, "+")
    r = prog.measure(Op.M_Z, coin)
    for i in LOGICAL_SUPPORT[0]:
        prog.cond(r, Op.X, block[i])
    for i in LOGICAL_SUPPORT[1]:
        prog.cond(r, Op.Y, block[i])


def ramsey_proxy(L: int, twirl: bool = True) -> Circuit:
    """``|00>_L`` followed by ``L`` teleported Ry(pi/2) rotations, Z readout of logical 0."""
    if L < 0 or L % 2:
        raise ValueError("L must be even and non-negative")
    prog = Program()
    data = ft_block(prog, "0", label="data")
    spare = prog.alloc(2, "data:ancilla")
    for k in range(L):
        res = one_state_block(prog, label=f"magic{k}")
        if twirl:
            pauli_twirl(prog, res.data)
        teleport_ry_block(prog, data.data, res.data, sign=1, group="teleport")
        qed_x(prog, data.data, spare[0], spare[1], group="teleport_qed")
    readout(prog, data.data, "Z", {0: 0})
    return prog.compile(f"ramsey-proxy-L{L}")


def code_switch(ft: bool = False, inputs=("0", "0"), prep_mode: str = "auto", readout_basis="auto") -> Circuit:
    """H6 -> iceberg switch: Z on qubit 4, X on qubit 5, conditional logical fixes.

    ``inputs`` are the two logical Pauli-basis states from ``0 1 + - Y+ Y-``.
    ``prep_mode`` ``ft`` uses the flagged ``|00>_L`` preparation (for
    ``00``/``++`` inputs), ``encoder`` the arbitrary-state encoder. With
    ``readout_basis`` (a pair of X/Z) the iceberg logicals are read out;
    ``auto`` reads same-basis inputs in their own basis, ``None`` skips it.
    """
    prog = Program()
    data = prog.alloc(6, "data")
    if prep_mode == "auto":
        prep_mode = "ft" if tuple(inputs) in (("0", "0"), ("+", "+")) else "encoder"
    if prep_mode == "ft":
        flags = prog.alloc(2, "prep_flag")
        ft_prep_00(prog, data, flags)
        if inputs[0] == "+":
            transversal(prog, Op.H, data)
    else:
        encoder(prog, data, inputs)
    if ft:
        za, fz, xa, fx = prog.alloc(4, "switch_check")
        prep(prog, za, "0")
        prep(prog, fz, "+")
        prep(prog, xa, "+")
        prep(prog, fx, "0")
        _parity_segment(prog, za, fz, [data[i] for i in SWITCH_PRE_Z], z_type=True, touch_after=0)
        _parity_segment(prog, xa, fx, [data[i] for i in SWITCH_PRE_X], z_type=False, touch_after=0)
    mz = prog.measure(Op.M_Z, data[4])
    mx = prog.measure(Op.M_X, data[5])
    for i in (2, 3):
        prog.cond(mz, Op.X, data[i])
    for i in (0, 1):
        prog.cond(mx, Op.Z, data[i])
    if ft:
        _parity_segment(prog, za, fz, [data[i] for i in SWITCH_POST_Z], z_type=True, touch_after=0)
        _parity_segment(prog, xa, fx, [data[i] for i in SWITCH_POST_X], z_type=False, touch_after=0)
        prog.detector([prog.measure(Op.M_X, fz)], "switch_flag")
        prog.detector([prog.measure(Op.M_Z, fx)], "switch_flag")
        prog.detector([prog.measure(Op.M_Z, za)], "switch_check")
        prog.detector([prog.measure(Op.M_X, xa)], "switch_check")
    if readout_basis == "auto":
        readout_basis = _SAME_BASIS.get(tuple(inputs))
    if readout_basis is not None:
        iceberg_readout(prog, data[:4], readout_basis)
    return prog.compile("code-switch-ft" if ft else "code-switch-nonft")


# Representatives of logical Z of qubit 0 and logical X of qubit 1 stored
# before the switch avoid qubits 4 and 5: an error there flips a measured
# outcome, and must not flip the stored value along with it.
_SAME_BASIS = {("0", "0"): ("Z", "Z"), ("+", "+"): ("X", "X")}

SWITCH_PRE_Z = (0, 3, 5)
SWITCH_PRE_X = (1, 2, 4)
SWITCH_POST_Z = (0, 2)
SWITCH_POST_X = (1, 3)


def _parity_segment(prog: Program, anc, flag, qubits, z_type: bool, touch_after: int) -> None:
    """Add a Z-parity (CX data->anc) or X-parity (CX anc->data) into ``anc``.

    The flag is touched once per segment, so across the pre/post pair it
    brackets every ancilla location whose error would spread onto data.
    """
    for k, q in enumerate(qubits):
        if z_type:
            prog.gate(Op.CX, q, anc)
        else:
            prog.gate(Op.CX, anc, q)
        if k == touch_after:
            _flag_touch(prog, anc, flag, z_type)


def _flag_touch(prog: Program, anc, flag, z_type: bool) -> None:
    if z_type:
        prog.gate(Op.CX, flag, anc)
    else:
        prog.gate(Op.CX, anc, flag)


ICEBERG_READ = {
    # (logical, basis) -> qubits of a representative disjoint from the partner's
    (0, "Z"): (0, 2),
    (0, "X"): (0, 3),
    (1, "Z"): (1, 2),
    (1, "X"): (1, 3),
}


def iceberg_readout(prog: Program, data, bases) -> None:
    b0, b1 = bases
    q0 = ICEBERG_READ[(0, b0)]
    q1 = ICEBERG_READ[(1, b1)]
    if b0 != b1 and set(q0) & set(q1):
        raise ValueError(f"bases {bases} need overlapping qubits")
    per_qubit = {}
    for q in q0:
        per_qubit[q] = b0
    for q in q1:
        per_qubit[q] = b1
    for q in range(4):
        per_qubit.setdefault(q, b0)
    hs = {q: basis_measure(prog, data[q], per_qubit[q]) for q in range(4)}
    if b0 == b1:
        prog.detector([hs[q] for q in range(4)], "final")
    prog.observable(0, [hs[q] for q in q0])
    prog.observable(1, [hs[q] for q in q1])


# ------------------------------------------------------------------ dispatch


def build(kind: CircuitKind | str, **options) -> Circuit:
    """Build one named circuit; see each helper for its options.

    Common options: ``annotate`` (default True) keeps DETECTOR/OBSERVABLE
    lines, ``offset`` shifts all qubit indices.
    """
    if isinstance(kind, str):
        kind = CircuitKind(kind)
    annotate = options.pop("annotate", True)
    offset = options.pop("offset", 0)
    if offset < 0:
        raise ValueError("offset must be non-negative")
    c = _BUILDERS[kind](**options)
    if offset or not annotate:
        c = _relabel(c, offset, annotate)
    return c


def _encoder_circuit(inputs=("+", "+"), readout_basis: str | None = "X") -> Circuit:
    prog = Program()
    data = prog.alloc(6, "data")
    encoder(prog, data, inputs)
    if readout_basis is not None:
        readout(prog, data, readout_basis, {0: 0, 1: 1})
    return prog.compile("encoder")


def _check_circuit(which: str, inputs=None) -> Circuit:
    prog = Program()
    data = prog.alloc(6, "data")
    anc, flag = prog.alloc(1, "ancilla") + prog.alloc(1, "flag")
    if which == "two":
        encoder(prog, data, inputs or ("+", "+"))
        check_two_state(prog, data, anc, flag)
        readout(prog, data, "X", {0: 0, 1: 1})
    else:
        encoder(prog, data, inputs or ("+", "Y-"))
        check_one_state(prog, data, anc, flag)
        readout(prog, data, "X", {0: 0})
    return prog.compile(f"check-{which}-state")


def _y2_circuit(y2_first: bool = False) -> Circuit:
    """Single-magic-state block with both checks; logical 0 read in X."""
    prog = Program()
    blk = one_state_block(prog, label="ms", y2_first=y2_first)
    readout(prog, blk.data, "X", {0: 0})
    return prog.compile("y2-check")


def _ft_prep_circuit(basis: str = "Z") -> Circuit:
    prog = Program()
    blk = ft_block(prog, "0", label="prep")
    readout(prog, blk.data, basis, {0: 0, 1: 1} if basis == "Z" else {})
    return prog.compile("ft-prep-00")


def _qed_circuit() -> Circuit:
    prog = Program()
    blk = ft_block(prog, "+", label="prep")
    a, b = prog.alloc(2, "ancilla")
    qed_x(prog, blk.data, a, b)
    readout(prog, blk.data, "X", {0: 0, 1: 1})
    return prog.compile("qed-x")


def _teleport_circuit(input: str = "0", sign: int = 1) -> Circuit:
    """Physical Ry(sign*pi/2) teleportation checked on a Pauli eigenstate input."""
    prog = Program()
    d, r = prog.alloc(1, "data")[0], prog.alloc(1, "resource")[0]
    prep(prog, d, input)
    teleport_ry(prog, d, r, sign)
    basis = _RY_IMAGE[(input, sign)]
    prog.observable(0, [basis_measure(prog, d, basis)])
    return prog.compile("teleport-ry")


# Ry(+-pi/2) image basis of each Pauli eigenstate (Y eigenstates are fixed)
_RY_IMAGE = {
    ("0", 1): "X", ("1", 1): "X", ("+", 1): "Z", ("-", 1): "Z",
    ("0", -1): "X", ("1", -1): "X", ("+", -1): "Z", ("-", -1): "Z",
    ("Y+", 1): "Y", ("Y-", 1): "Y", ("Y+", -1): "Y", ("Y-", -1): "Y",
}  # fmt: skip


def _cnot_teleport_circuit(inputs=None, encoded: bool = False, readout_bases=None) -> Circuit:
    """CNOT from two teleported Y-rotations around a CZ.

    Physical by default (2 data + 2 resource qubits); ``encoded`` uses H6
    blocks with flagged ``|++>_L`` resources. ``inputs`` optionally prepares
    the two data qubits (or logical-0 of each block); ``readout_bases`` adds
    observables.
    """
    prog = Program()
    if not encoded:
        c, t = prog.alloc(2, "data")
        r1, r2 = prog.alloc(2, "resource")
        if inputs:
            prep(prog, c, inputs[0])
            prep(prog, t, inputs[1])
        teleport_ry(prog, t, r1, sign=-1)
        prog.gate(Op.CZ, c, t)
        teleport_ry(prog, t, r2, sign=1)
        if readout_bases:
            for oid, (q, b) in enumerate(zip((c, t), readout_bases)):
                prog.observable(oid, [basis_measure(prog, q, b)])
        return prog.compile("cnot-teleport")
    blocks = []
    for k, s in enumerate(inputs or ("0", "0")):
        if s in ("0", "+"):
            blocks.append(ft_block(prog, s, label=f"in{k}").data)
        else:
            data = prog.alloc(6, f"in{k}:data")
            encoder(prog, data, (s, "0"))
            blocks.append(data)
    res = [ft_block(prog, "+", label=f"res{k}").data for k in range(2)]
    cnot_via_teleport_block(prog, blocks[0], blocks[1], res)
    if readout_bases:
        for k, (blk, b) in enumerate(zip(blocks, readout_bases)):
            readout(prog, blk, b, {0: 2 * k, 1: 2 * k + 1})
    return prog.compile("cnot-teleport-encoded")


_BUILDERS = {
    CircuitKind.ENCODER: _encoder_circuit,
    CircuitKind.CHECK_TWO_STATE_PROXY: lambda **kw: _check_circuit("two", **kw),
    CircuitKind.CHECK_ONE_STATE_PROXY: lambda **kw: _check_circuit("one", **kw),
    CircuitKind.Y2_CHECK: _y2_circuit,
    CircuitKind.FT_PREP_00: _ft_prep_circuit,
    CircuitKind.QED_X_ROUND: _qed_circuit,
    CircuitKind.BENCH_LEVEL1_PROXY: bench_level1,
    CircuitKind.TELEPORT_RY_HALF_PI: _teleport_circuit,
    CircuitKind.CNOT_VIA_TELEPORT: _cnot_teleport_circuit,
    CircuitKind.CODE_SWITCH_NONFT: lambda **kw: code_switch(ft=False, **kw),
    CircuitKind.CODE_SWITCH_FT: lambda **kw: code_switch(ft=True, **kw),
    CircuitKind.LEVEL1_PROTOCOL: level1_protocol,
    CircuitKind.LEVEL2_PROTOCOL: level2_protocol,
}


def _relabel(c: Circuit, offset: int, annotate: bool) -> Circuit:
    from dataclasses import replace

    out = Circuit(c.num_qubits + offset, name=c.name)
    for inst in c.instructions:
        if not annotate and inst.kind in (Op.DETECTOR, Op.OBSERVABLE):
            continue
        t = tuple(q + offset for q in inst.targets)
        payload = inst.payload
        if payload is not None:
            payload = replace(payload, targets=tuple(q + offset for q in payload.targets))
        out.append(replace(inst, targets=t, payload=payload))
    out.roles = {q + offset: r for q, r in c.roles.items()}
    return out
