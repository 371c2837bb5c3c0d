"""Experiment drivers with post-selection accounting.

Detector groups emitted by the builders fall into a few categories (flags,
checks, QED rounds, Y2 checks, teleportation syndromes, final syndromes); a
post-selection policy names the categories that reject a shot.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import builders
from .circuit import GATES_2Q, Circuit, Op, stats as circuit_stats
from .codes import code_iceberg
from .engines import compile_frame, inject_faults, sample
from .engines.frame import Stage
from .engines.tableau import final_state, run_with_faults, sample_tableau
from .noise import NoisyCircuit, annotate, h1_ratio
from .pauli import PauliString
from .stats import BinomialCI, PowerLawFit, fit_power_law, wilson


class Engine(str, enum.Enum):
    FRAME = "frame"
    TABLEAU = "tableau"


CATEGORIES = ("flags", "check", "qed", "y2", "teleport", "final")


def group_category(group: str) -> str:
    """Policy category of a detector group name."""
    tail = group.rsplit("_", 1)[-1] if "_" in group else group
    if tail in ("flag", "prep") or group.endswith("_flag"):
        return "flags"
    if tail == "check":
        return "check"
    if tail == "qed":
        return "qed"
    if tail == "y2":
        return "y2"
    if tail == "teleport":
        return "teleport"
    if tail == "final":
        return "final"
    return "final"


@dataclass
class ProtocolConfig:
    level: int = 1
    p: float = 1e-3
    shots: int = 10_000
    seed: int = 0
    postselect_policy: str = "full"
    engine: Engine = Engine.FRAME
    workers: int = 1
    repeat_until_success: bool = False
    mode: str = "ft"  # level 1: "ft" or "nonft"
    twirl: bool = True
    variant: str = "ft"  # code switch: "ft" or "nonft"

    def __post_init__(self):
        self.engine = Engine(self.engine)
        self.validate()

    def validate(self) -> None:
        if self.level not in (1, 2):
            raise ValueError(f"level must be 1 or 2, got {self.level}")
        if not 0 <= self.p <= 1:
            raise ValueError(f"p={self.p} is not a probability")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.mode not in ("ft", "nonft"):
            raise ValueError(f"mode must be ft or nonft, got {self.mode!r}")
        if self.variant not in ("ft", "nonft"):
            raise ValueError(f"variant must be ft or nonft, got {self.variant!r}")
        self.policy_categories()
        if self.repeat_until_success and self.engine is Engine.TABLEAU:
            raise ValueError("repeat-until-success needs the frame engine")

    def policy_categories(self) -> set[str]:
        pol = self.postselect_policy.strip()
        if pol == "full":
            return set(CATEGORIES)
        if pol == "none":
            return set()
        cats = {c.strip() for c in pol.split(",") if c.strip()}
        unknown = cats - set(CATEGORIES)
        if unknown:
            raise ValueError(f"unknown post-selection categories {sorted(unknown)}; known: {CATEGORIES}")
        return cats

    def reject_groups(self, c: Circuit) -> set[str]:
        present = set(c.detector_groups())
        cats = self.policy_categories()
        if self.postselect_policy not in ("full", "none"):
            have = {group_category(g) for g in present}
            missing = cats - have
            if missing:
                raise ValueError(f"policy names {sorted(missing)} but the circuit has no such detectors")
        return {g for g in present if group_category(g) in cats}

    def to_dict(self) -> dict:
        d = asdict(self)
        d["engine"] = self.engine.value
        return d


@dataclass
class ExperimentResult:
    protocol: str
    shots: int
    accepted: int
    accept_rate: float
    accept_ci: BinomialCI
    observable_ids: list[int]
    logical_flips: list[int]
    block_failures: int
    logical_error_rate: float
    error_ci: BinomialCI
    per_logical_error_rate: list[float]
    config: dict
    wall_time: float
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["accept_ci"] = self.accept_ci.to_dict()
        d["error_ci"] = self.error_ci.to_dict()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_json_default)

    def summary(self) -> str:
        return (
            f"{self.protocol}: error {self.logical_error_rate:.3e} "
            f"[{self.error_ci.lo:.3e}, {self.error_ci.hi:.3e}] "
            f"accept {self.accept_rate:.4f} ({self.accepted}/{self.shots})"
        )


@dataclass(frozen=True)
class ScalingPoint:
    p: float
    logical_error_rate: float
    ci_lo: float
    ci_hi: float
    accept_rate: float

    def to_dict(self) -> dict:
        return asdict(self)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, enum.Enum):
        return o.value
    raise TypeError(f"not serializable: {type(o)}")


# ------------------------------------------------------------------- sampling


@dataclass
class _Tally:
    shots: int
    accepted: int
    flips: list[int]
    any_flip: int
    retries: int = 0


def rus_stages(nc: NoisyCircuit) -> list[Stage]:
    """Sub-block stages for repeat-until-success.

    A sub-block is a role label ``name:...`` owning detector groups
    ``name_*``. Its stage holds every error site on its own qubits that occurs
    before that qubit first meets a qubit of another block.
    """
    c = nc.base
    label = {q: r.split(":", 1)[0] for q, r in c.roles.items() if ":" in r}
    groups = c.detector_groups()
    dets: dict[str, list[int]] = {}
    names = sorted(set(label.values()), key=len, reverse=True)
    for j, g in enumerate(groups):
        owner = next((name for name in names if g.startswith(name + "_")), None)
        if owner is not None:
            dets.setdefault(owner, []).append(j)
    first_foreign: dict[int, int] = {}
    for idx, inst in enumerate(c.instructions):
        qs = inst.qubits()
        if inst.kind in GATES_2Q or (inst.kind is Op.COND and inst.records):
            owners = {label.get(q) for q in qs}
            if inst.kind is Op.COND:
                # feed-forward from another block's measurement
                owners.add(_record_owner(c, inst.records[0], label))
            if len(owners) > 1:
                for q in qs:
                    first_foreign.setdefault(q, idx)
    sites: dict[str, list[int]] = {name: [] for name in dets}
    for i, s in enumerate(nc.sites):
        names = {label.get(q) for q in s.qubits}
        if len(names) != 1:
            continue
        name = names.pop()
        if name not in sites:
            continue
        if all(s.after < first_foreign.get(q, len(c.instructions)) for q in s.qubits):
            sites[name].append(i)
    return [Stage(name, tuple(sites[name]), tuple(dets[name])) for name in sorted(dets)]


def _record_owner(c: Circuit, record: int, label: dict[int, str]):
    return label.get(c.measurement_instructions()[record].targets[0])


def _run(c: Circuit, cfg: ProtocolConfig, reject=None) -> _Tally:
    nc = annotate(c, h1_ratio(cfg.p))
    groups = cfg.reject_groups(c) if reject is None else reject
    if cfg.engine is Engine.TABLEAU:
        det, obs = sample_tableau(nc, cfg.shots, cfg.seed)
        mask = np.array([g in groups for g in c.detector_groups()], dtype=bool)
        rej = det[:, mask].any(axis=1) if mask.any() else np.zeros(cfg.shots, dtype=bool)
        acc = obs[~rej]
        return _Tally(cfg.shots, int((~rej).sum()), [int(x) for x in acc.sum(axis=0)], int(acc.any(axis=1).sum()))
    f = compile_frame(nc)
    stages = rus_stages(nc) if cfg.repeat_until_success else ()
    t = sample(f, cfg.shots, cfg.seed, cfg.workers, reject_groups=groups, stages=stages)
    return _Tally(t.shots, t.accepted, list(t.observable_flips), t.any_flip, t.retries)


def _result(name: str, c: Circuit, cfg: ProtocolConfig, t: _Tally, t0: float, extra=None) -> ExperimentResult:
    acc = t.accepted
    denom = max(acc, 1)
    err_ci = wilson(t.any_flip, acc) if acc else BinomialCI(0.0, 0.0, 1.0)
    extra = dict(extra or {})
    if cfg.repeat_until_success:
        extra["stage_retries"] = t.retries
    return ExperimentResult(
        protocol=name,
        shots=t.shots,
        accepted=acc,
        accept_rate=acc / t.shots,
        accept_ci=wilson(acc, t.shots),
        observable_ids=sorted(c.observable_records()),
        logical_flips=list(t.flips),
        block_failures=t.any_flip,
        logical_error_rate=t.any_flip / denom if acc else 0.0,
        error_ci=err_ci,
        per_logical_error_rate=[x / denom for x in t.flips] if acc else [0.0] * len(t.flips),
        config=cfg.to_dict(),
        wall_time=time.perf_counter() - t0,
        extra=extra,
    )


# ------------------------------------------------------------------ protocols


def run_level1(cfg: ProtocolConfig) -> ExperimentResult:
    """Level-1 |+> proxy with X readout of both logicals.

    ``logical_error_rate`` is the block failure rate (either logical flipped);
    ``per_logical_error_rate`` splits it by logical.
    """
    if cfg.level != 1:
        raise ValueError("run_level1 needs level = 1")
    t0 = time.perf_counter()
    ft = cfg.mode == "ft"
    c = builders.level1_protocol(qed=ft, check=ft)
    return _result("level1", c, cfg, _run(c, cfg), t0, {"mode": cfg.mode})


def run_level2(cfg: ProtocolConfig) -> ExperimentResult:
    """Self-concatenated proxy protocol; four observables (two per code layer)."""
    if cfg.level != 2:
        raise ValueError("run_level2 needs level = 2")
    t0 = time.perf_counter()
    prog, accounting = builders.level2_program()
    c = prog.compile("level2-proxy")
    st = circuit_stats(c)
    extra = {
        "qubits": c.num_qubits,
        "qubit_accounting": accounting,
        "depth": st.depth,
        "depth_with_measurements": st.depth_with_measurements,
        "count_2q": st.count_2q,
        "count_meas": st.count_meas,
        "repeat_until_success": cfg.repeat_until_success,
    }
    return _result("level2", c, cfg, _run(c, cfg), t0, extra)


@dataclass(frozen=True)
class RamseyRow:
    L: int
    survival: float
    accept: float
    gate_accept: float
    survived: int
    accepted: int
    shots: int

    def to_dict(self) -> dict:
        return asdict(self)


GATE_GROUPS = {"teleport", "teleport_qed", "final"}


def run_ramsey_proxy(cfg: ProtocolConfig, L_list) -> list[ExperimentResult]:
    """Survival of ``|0>_L`` after L teleported rotations, one result per L.

    ``extra`` carries ``L``, ``survival`` and ``gate_accept``; the latter
    post-selects only on the teleportation syndromes (resource Y readout, QED
    round on the data, final syndrome), approximating a repeat-until-success
    supply of resource states.
    """
    L_list = [int(L) for L in L_list]
    for L in L_list:
        if L < 0 or L % 2:
            raise ValueError(f"sequence length {L} must be even and non-negative")
    out = []
    for L in L_list:
        t0 = time.perf_counter()
        c = builders.ramsey_proxy(L, twirl=cfg.twirl)
        full = _run(c, cfg)
        gate = _run(c, cfg, reject={g for g in c.detector_groups() if g in GATE_GROUPS})
        survived = full.accepted - full.flips[0]
        extra = {
            "L": L,
            "survival": survived / full.accepted if full.accepted else 1.0,
            "survived": survived,
            "gate_accept": gate.accepted / gate.shots,
        }
        out.append(_result(f"ramsey-L{L}", c, cfg, full, t0, extra))
    return out


def ramsey_table(results) -> list[RamseyRow]:
    return [
        RamseyRow(
            r.extra["L"], r.extra["survival"], r.accept_rate, r.extra["gate_accept"],
            r.extra["survived"], r.accepted, r.shots,
        )
        for r in results
    ]


def ramsey_counts(results) -> list[tuple[int, int, int]]:
    """``(L, survived, accepted)`` triples, the input of :func:`stats.fit_ramsey`."""
    return [(r.extra["L"], r.extra["survived"], r.accepted) for r in results if r.accepted]


SWITCH_INPUTS = (("0", "0"), ("0", "+"), ("+", "0"), ("+", "+"))
_EIGEN = {"0": ("Z", 1), "1": ("Z", -1), "+": ("X", 1), "-": ("X", -1), "Y+": ("Y", 1), "Y-": ("Y", -1)}


def switch_preserves(inputs, ft: bool, seed: int = 0) -> bool:
    """Noiseless switch leaves the iceberg block stabilized with the input logical state."""
    c = builders.code_switch(ft=ft, inputs=inputs, readout_basis=None)
    sim, _ = final_state(c, seed)
    n = c.num_qubits
    ice = code_iceberg()

    def emb(p: PauliString) -> PauliString:
        return PauliString(n, p.x_mask, p.z_mask, p.phase)

    ok = all(sim.expectation(emb(s)) == 1 for s in ice.stabilizers)
    for i, st in enumerate(inputs):
        basis, sign = _EIGEN[st]
        op = {"X": ice.logical_x[i], "Z": ice.logical_z[i], "Y": ice.logical_y(i)}[basis]
        ok &= sim.expectation(emb(op)) == sign
    return ok


def mx_flip_breaks_switch(inputs=("+", "+")) -> bool:
    """Flip the X-measurement outcome of the non-FT switch; True if a logical flips silently."""
    c = builders.code_switch(ft=False, inputs=inputs)
    nc = annotate(c, h1_ratio(1e-3))
    mx = next(i for i, s in enumerate(nc.sites) if s.channel == "FLIP_MEAS" and s.origin == "MX" and s.qubits == (5,))
    det, obs = run_with_faults(nc, [(mx, "FLIP")])
    return bool(obs.any() and not det.any())


_READ_BASIS = {"0": "Z", "+": "X"}


def run_code_switch(cfg: ProtocolConfig) -> ExperimentResult:
    """Noiseless preservation, fault injection and a noisy trial per input pair.

    Each logical is read in its input's basis. Only same-basis inputs admit
    an iceberg syndrome at readout, so the headline rates aggregate those;
    every pair is listed under ``extra["per_input"]``.
    """
    t0 = time.perf_counter()
    ft = cfg.variant == "ft"
    per_input = []
    total = _Tally(0, 0, [0, 0], 0)
    for inputs in SWITCH_INPUTS:
        bases = tuple(_READ_BASIS[s] for s in inputs)
        c = builders.code_switch(ft=ft, inputs=inputs, readout_basis=bases)
        t = _run(c, cfg)
        same = inputs[0] == inputs[1]
        rep = inject_faults(annotate(c, h1_ratio(cfg.p if cfg.p > 0 else 1e-3)))
        per_input.append(
            {
                "inputs": "".join(inputs),
                "preserved": switch_preserves(inputs, ft),
                "accept_rate": t.accepted / t.shots,
                "logical_error_rate": t.any_flip / t.accepted if t.accepted else 0.0,
                "single_fault_logical": rep.counts["LOGICAL"],
            }
        )
        if same:
            total = _Tally(
                total.shots + t.shots,
                total.accepted + t.accepted,
                [a + b for a, b in zip(total.flips, t.flips)],
                total.any_flip + t.any_flip,
            )
    c = builders.code_switch(ft=ft)
    return _result(f"code-switch-{cfg.variant}", c, cfg, total, t0, {"per_input": per_input})


# --------------------------------------------------------------------- sweeps


RUNNERS = {"level1": run_level1, "level2": run_level2}


def sweep(protocol: str, base: ProtocolConfig, p_grid, shots_per_point=None, progress=None) -> list[ScalingPoint]:
    """One run per grid point, seeded ``base.seed + index``; ``shots_per_point`` may be a list."""
    p_grid = [float(p) for p in p_grid]
    if len(p_grid) < 2 or any(p <= 0 for p in p_grid):
        raise ValueError("sweep needs at least two positive p values")
    if protocol not in RUNNERS:
        raise ValueError(f"sweep supports {sorted(RUNNERS)}")
    out = []
    for k, p in enumerate(p_grid):
        if progress is not None:
            progress(k, p)
        shots = base.shots if shots_per_point is None else int(_pick(shots_per_point, k))
        cfg = ProtocolConfig(**{**base.to_dict(), "p": p, "shots": shots, "seed": base.seed + k})
        r = RUNNERS[protocol](cfg)
        out.append(ScalingPoint(p, r.logical_error_rate, r.error_ci.lo, r.error_ci.hi, r.accept_rate))
    return out


def _pick(v, k):
    return v[k] if isinstance(v, (list, tuple)) else v


def fit_sweep(points) -> PowerLawFit:
    usable = [(pt.p, pt.logical_error_rate) for pt in points if pt.logical_error_rate > 0]
    return fit_power_law(usable)
