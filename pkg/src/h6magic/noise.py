"""Parameterized circuit-level noise and its placement on ideal circuits."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .circuit import GATES_1Q, GATES_2Q, MEASUREMENTS, RESETS, Circuit, Op

PAULIS_1Q = ("X", "Y", "Z")
PAULIS_2Q = tuple(a + b for a in "IXYZ" for b in "IXYZ")[1:]


@dataclass(frozen=True)
class NoiseModel:
    p2: float = 0.0
    p_meas: float = 0.0
    p_idle: float = 0.0
    p1: float = 0.0
    p_prep: float = 0.0

    def __post_init__(self):
        for name, v in asdict(self).items():
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} is not a probability")

    def to_dict(self) -> dict[str, float]:
        return asdict(self)

    @property
    def is_noiseless(self) -> bool:
        return not any(asdict(self).values())


def h1_ratio(p: float) -> NoiseModel:
    """Two-qubit and measurement error ``p``, idle depolarizing ``p/5``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} is not a probability")
    return NoiseModel(p2=p, p_meas=p, p_idle=p / 5, p1=0.0, p_prep=0.0)


@dataclass(frozen=True)
class ErrorSite:
    """One stochastic error location.

    ``after`` is the instruction index the channel follows. DEPOL1/DEPOL2 draw
    uniformly from the non-identity Paulis; FLIP_MEAS flips ``record``.
    """

    channel: str
    qubits: tuple[int, ...]
    prob: float
    after: int
    record: int | None = None
    origin: str = ""

    @property
    def outcomes(self) -> tuple[str, ...]:
        if self.channel == "DEPOL1":
            return PAULIS_1Q
        if self.channel == "DEPOL2":
            return PAULIS_2Q
        return ("FLIP",)


@dataclass(frozen=True)
class NoisyCircuit:
    base: Circuit
    sites: tuple[ErrorSite, ...]
    model: NoiseModel = field(default_factory=NoiseModel)

    @property
    def num_fault_locations(self) -> int:
        return sum(len(s.outcomes) for s in self.sites)


def annotate(c: Circuit, m: NoiseModel) -> NoisyCircuit:
    """Place error sites on ``c`` deterministically.

    DEPOL2 follows every CX/CZ, FLIP_MEAS attaches to every measurement record,
    DEPOL1 at rate ``p_idle`` is charged at each TICK to every qubit untouched
    in the layer that TICK closes. Optional ``p1``/``p_prep`` add DEPOL1 after
    single-qubit gates and resets.
    """
    sites: list[ErrorSite] = []
    record = 0
    busy: set[int] = set()
    for idx, inst in enumerate(c.instructions):
        k = inst.kind
        if k is Op.TICK:
            if m.p_idle > 0:
                for q in range(c.num_qubits):
                    if q not in busy:
                        sites.append(ErrorSite("DEPOL1", (q,), m.p_idle, idx, origin="idle"))
            busy = set()
            continue
        busy.update(inst.qubits())
        if k in GATES_2Q and m.p2 > 0:
            sites.append(ErrorSite("DEPOL2", inst.targets, m.p2, idx, origin=k.mnemonic))
        elif k in GATES_1Q and m.p1 > 0:
            sites.append(ErrorSite("DEPOL1", inst.targets, m.p1, idx, origin=k.mnemonic))
        elif k in RESETS and m.p_prep > 0:
            sites.append(ErrorSite("DEPOL1", inst.targets, m.p_prep, idx, origin=k.mnemonic))
        elif k is Op.COND and inst.payload.kind in GATES_2Q and m.p2 > 0:
            sites.append(ErrorSite("DEPOL2", inst.payload.targets, m.p2, idx, origin="COND"))
        if k in MEASUREMENTS:
            if m.p_meas > 0:
                sites.append(ErrorSite("FLIP_MEAS", inst.targets, m.p_meas, idx, record, k.mnemonic))
            record += 1
    return NoisyCircuit(c, tuple(sites), m)
