"""Compiled Pauli-frame sampler.

Compilation propagates, in one vectorized forward pass, a unit X and a unit Z
frame from every error location (and a unit flip from every noisy measurement)
to the records, detectors and observables they flip. Sampling then only XORs
precomputed symptom masks, so no quantum state is touched per shot.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..circuit import GATES_1Q, GATES_2Q, MEASUREMENTS, PAULI_GATES, RESETS, Circuit, Op
from ..noise import NoisyCircuit
from .tableau import MeasureInfo, TableauSimulator, execute, parity_matrix

BLOCK_SHOTS = 1 << 16


class FrameCompileError(ValueError):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(f"{code}: {message}")


@dataclass
class CompiledFrame:
    """Symptom tables for every error site of a noisy circuit.

    ``masks[site]`` is a ``(num_outcomes, words)`` uint64 array; bits
    ``0..num_detectors-1`` are detectors, the following ``num_observables``
    bits are observables.
    """

    reference: np.ndarray
    num_detectors: int
    num_observables: int
    observable_ids: list[int]
    detector_groups: list[str]
    site_probs: np.ndarray
    masks: list[np.ndarray]
    words: int
    random_records: list[int] = field(default_factory=list)

    @property
    def detector_mask(self) -> np.ndarray:
        return _bits_to_words(np.arange(self.num_detectors), self.words)

    def group_mask(self, groups) -> np.ndarray:
        idx = [i for i, g in enumerate(self.detector_groups) if g in groups]
        return _bits_to_words(np.array(idx, dtype=int), self.words)

    def observable_bit(self, j: int) -> int:
        return self.num_detectors + j


def _bits_to_words(bits: np.ndarray, words: int) -> np.ndarray:
    out = np.zeros(words, dtype=np.uint64)
    for b in np.asarray(bits, dtype=int):
        out[b // 64] |= np.uint64(1) << np.uint64(b % 64)
    return out


def _pack_rows(bits: np.ndarray, words: int) -> np.ndarray:
    """Pack a boolean ``(rows, nbits)`` matrix into ``(rows, words)`` uint64."""
    rows, nbits = bits.shape
    padded = np.zeros((rows, words * 64), dtype=bool)
    padded[:, :nbits] = bits
    packed = np.packbits(padded.reshape(rows, words, 64), axis=2, bitorder="little")
    return packed.view(np.uint64).reshape(rows, words)


def _reference_run(c: Circuit) -> tuple[np.ndarray, dict[int, tuple[np.ndarray, np.ndarray]]]:
    gauges: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def note(k: int, info: MeasureInfo) -> None:
        if info.random:
            gauges[k] = (info.gauge_x, info.gauge_z)

    sim = TableauSimulator(c.num_qubits, 1, np.random.default_rng(0))
    rec = execute(c, sim, on_measure=note)
    return rec[0], gauges


def propagate(
    c: Circuit,
    inject_after: dict[int, list[tuple[int, np.ndarray, np.ndarray]]],
    inject_before_meas: dict[int, list[tuple[int, np.ndarray, np.ndarray]]],
    flip_record: dict[int, list[int]],
    rows: int,
) -> np.ndarray:
    """Push many independent Pauli frames through ``c`` at once.

    Frame row ``i`` starts empty and is seeded with its Pauli at its injection
    point. Returns the ``(rows, num_measurements)`` record-flip matrix.
    """
    n = c.num_qubits
    fx = np.zeros((rows, n), dtype=bool)
    fz = np.zeros((rows, n), dtype=bool)
    R = np.zeros((rows, c.num_measurements), dtype=bool)
    k = 0

    def seed(entries):
        for row, px, pz in entries:
            fx[row] ^= px
            fz[row] ^= pz

    for idx, inst in enumerate(c.instructions):
        kind = inst.kind
        if kind is Op.COND:
            pl = inst.payload
            if pl.kind not in PAULI_GATES:
                raise FrameCompileError(
                    "NONPAULI_FEEDFORWARD", f"instruction {idx}: COND {pl.kind.mnemonic}"
                )
            hit = R[:, inst.records[0]]
            q = pl.targets[0]
            if pl.kind in (Op.X, Op.Y):
                fx[hit, q] ^= True
            if pl.kind in (Op.Z, Op.Y):
                fz[hit, q] ^= True
        elif kind in GATES_1Q:
            q = inst.targets[0]
            if kind is Op.H:
                fx[:, q], fz[:, q] = fz[:, q].copy(), fx[:, q].copy()
            elif kind in (Op.S, Op.S_DAG):
                fz[:, q] ^= fx[:, q]
        elif kind is Op.CX:
            a, b = inst.targets
            fx[:, b] ^= fx[:, a]
            fz[:, a] ^= fz[:, b]
        elif kind is Op.CZ:
            a, b = inst.targets
            fz[:, b] ^= fx[:, a]
            fz[:, a] ^= fx[:, b]
        elif kind in MEASUREMENTS:
            seed(inject_before_meas.get(k, ()))
            q = inst.targets[0]
            if kind is Op.M_Z:
                R[:, k] = fx[:, q]
                fz[:, q] = False
            elif kind is Op.M_X:
                R[:, k] = fz[:, q]
                fx[:, q] = False
            else:
                R[:, k] = fx[:, q] ^ fz[:, q]
                both = fx[:, q] & fz[:, q]
                fx[both, q] = False
                fz[both, q] = False
            for row in flip_record.get(k, ()):
                R[row, k] ^= True
            k += 1
        elif kind in RESETS:
            q = inst.targets[0]
            fx[:, q] = False
            fz[:, q] = False
        seed(inject_after.get(idx, ()))
    return R


def _unit(n: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    e = np.zeros(n, dtype=bool)
    e[q] = True
    return e, np.zeros(n, dtype=bool)


def compile_frame(nc: NoisyCircuit) -> CompiledFrame:
    """Build per-site symptom tables; raises :class:`FrameCompileError`."""
    c = nc.base
    n = c.num_qubits
    reference, gauges = _reference_run(c)
    for inst in c.instructions:
        if inst.kind is Op.COND and inst.payload.kind not in PAULI_GATES:
            raise FrameCompileError("NONPAULI_FEEDFORWARD", f"COND {inst.payload.kind.mnemonic}")

    inject_after: dict[int, list] = {}
    inject_meas: dict[int, list] = {}
    flips: dict[int, list[int]] = {}
    row = 0
    # unit rows per (site, qubit, X|Z) and per FLIP_MEAS site
    site_rows: list[list[int]] = []
    for site in nc.sites:
        if site.channel == "FLIP_MEAS":
            flips.setdefault(site.record, []).append(row)
            site_rows.append([row])
            row += 1
            continue
        rows = []
        for q in site.qubits:
            ex, zero = _unit(n, q)
            inject_after.setdefault(site.after, []).append((row, ex, zero))
            inject_after.setdefault(site.after, []).append((row + 1, zero, ex))
            rows.extend((row, row + 1))
            row += 2
        site_rows.append(rows)
    gauge_rows = {}
    for k, (gx, gz) in gauges.items():
        inject_meas.setdefault(k, []).append((row, gx, gz))
        gauge_rows[k] = row
        row += 1

    R = propagate(c, inject_after, inject_meas, flips, row)
    D, O, ids = parity_matrix(c)
    det = (R.astype(np.uint8) @ D.astype(np.uint8)) % 2 == 1 if D.shape[1] else np.zeros((row, 0), bool)
    obs = (R.astype(np.uint8) @ O.astype(np.uint8)) % 2 == 1 if O.shape[1] else np.zeros((row, 0), bool)

    for k, g in gauge_rows.items():
        if det[g].any() or obs[g].any():
            bad = [f"D{j}" for j in np.flatnonzero(det[g])] + [
                f"L{ids[j]}" for j in np.flatnonzero(obs[g])
            ]
            raise FrameCompileError(
                "NONDETERMINISTIC_REFERENCE",
                f"random outcome r{k} makes {', '.join(bad)} non-deterministic",
            )

    sym = np.concatenate([det, obs], axis=1)
    nbits = sym.shape[1]
    words = max(1, (nbits + 63) // 64)
    packed = _pack_rows(sym, words)
    masks = []
    for site, rows in zip(nc.sites, site_rows):
        if site.channel == "FLIP_MEAS":
            masks.append(packed[rows].copy())
            continue
        out = np.zeros((len(site.outcomes), words), dtype=np.uint64)
        for oi, label in enumerate(site.outcomes):
            for k, ch in enumerate(label):
                xr, zr = rows[2 * k], rows[2 * k + 1]
                if ch in "XY":
                    out[oi] ^= packed[xr]
                if ch in "ZY":
                    out[oi] ^= packed[zr]
        masks.append(out)
    return CompiledFrame(
        reference=reference,
        num_detectors=D.shape[1],
        num_observables=O.shape[1],
        observable_ids=ids,
        detector_groups=c.detector_groups(),
        site_probs=np.array([s.prob for s in nc.sites], dtype=float),
        masks=masks,
        words=words,
        random_records=sorted(gauges),
    )


# ------------------------------------------------------------------ sampling


@dataclass
class BatchTally:
    shots: int = 0
    accepted: int = 0
    rejected: int = 0
    observable_flips: list[int] = field(default_factory=list)
    any_flip: int = 0
    retries: int = 0

    def merge(self, other: "BatchTally") -> "BatchTally":
        if not self.observable_flips:
            flips = list(other.observable_flips)
        elif not other.observable_flips:
            flips = list(self.observable_flips)
        else:
            flips = [a + b for a, b in zip(self.observable_flips, other.observable_flips)]
        return BatchTally(
            self.shots + other.shots,
            self.accepted + other.accepted,
            self.rejected + other.rejected,
            flips,
            self.any_flip + other.any_flip,
            self.retries + other.retries,
        )

    def to_dict(self) -> dict:
        return {
            "shots": self.shots,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "observable_flip_counts": list(self.observable_flips),
            "any_observable_flip": self.any_flip,
            "stage_retries": self.retries,
        }


@dataclass(frozen=True)
class Stage:
    """Sites of a sub-circuit retried until its own detectors are all clean."""

    name: str
    sites: tuple[int, ...]
    detectors: tuple[int, ...]


class _SiteTable:
    """Sites grouped by probability and outcome count for fused sampling."""

    def __init__(self, f: CompiledFrame, sites=None):
        groups: dict[tuple[float, int], list[int]] = {}
        chosen = range(len(f.masks)) if sites is None else sites
        for i in chosen:
            p, m = f.site_probs[i], f.masks[i]
            if p > 0:
                groups.setdefault((float(p), m.shape[0]), []).append(i)
        self.groups = []
        for (p, k), idx in sorted(groups.items()):
            table = np.stack([f.masks[i] for i in idx])  # (sites, k, words)
            self.groups.append((p, k, table))


def _bernoulli_positions(rng: np.random.Generator, p: float, total: int) -> np.ndarray:
    """Indices in ``[0, total)`` of a Bernoulli(p) process, via geometric gaps."""
    if p >= 1.0:
        return np.arange(total)
    out = []
    pos = -1
    while True:
        expect = int((total - pos) * p * 1.1) + 32
        gaps = rng.geometric(p, size=expect)
        cs = pos + np.cumsum(gaps)
        inside = cs[cs < total]
        out.append(inside)
        if inside.size < cs.size:
            break
        pos = int(cs[-1])
    return np.concatenate(out)


def _sample_events(table: _SiteTable, block: int, rng: np.random.Generator):
    """Return (shot index, symptom words) for every fired error in a block."""
    shots_all = []
    masks_all = []
    for p, k, tab in table.groups:
        nsites = tab.shape[0]
        pos = _bernoulli_positions(rng, p, nsites * block)
        if pos.size == 0:
            continue
        site = pos // block
        shot = pos % block
        which = rng.integers(0, k, size=pos.size) if k > 1 else np.zeros(pos.size, dtype=np.int64)
        shots_all.append(shot)
        masks_all.append(tab[site, which])
    if not shots_all:
        return np.zeros(0, dtype=np.int64), None
    return np.concatenate(shots_all), np.concatenate(masks_all)


def _combine(shots: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """XOR-reduce symptom rows per shot; returns one row per distinct shot."""
    order = np.argsort(shots, kind="stable")
    s = shots[order]
    m = masks[order]
    starts = np.flatnonzero(np.r_[True, s[1:] != s[:-1]])
    return np.bitwise_xor.reduceat(m, starts, axis=0)


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, block index)."""
    key = (int(seed) & ((1 << 64) - 1)) | (int(block) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def _sample_block(
    f: CompiledFrame, tables, block: int, size: int, seed: int, reject_mask
) -> BatchTally:
    rest, stages = tables
    rng = block_rng(seed, block)
    shots, masks = _sample_events(rest, size, rng)
    parts_s = [] if masks is None else [shots]
    parts_m = [] if masks is None else [masks]
    retries = 0
    for table, mask in stages:
        pending = np.arange(size)
        while pending.size:
            s, m = _sample_events(table, pending.size, rng)
            if m is None:
                break
            uniq = np.unique(s)
            bad = np.any(_combine(s, m) & mask, axis=1)
            keep = np.isin(s, uniq[~bad])
            parts_s.append(pending[s[keep]])
            parts_m.append(m[keep])
            pending = pending[uniq[bad]]
            retries += int(pending.size)
    nobs = f.num_observables
    if not parts_s:
        return BatchTally(size, size, 0, [0] * nobs, 0, retries)
    rows = _combine(np.concatenate(parts_s), np.concatenate(parts_m))
    rejected = np.any(rows & reject_mask, axis=1)
    acc_rows = rows[~rejected]
    flips = []
    any_flip = np.zeros(acc_rows.shape[0], dtype=bool)
    for j in range(nobs):
        b = f.observable_bit(j)
        bit = (acc_rows[:, b // 64] >> np.uint64(b % 64)) & np.uint64(1)
        flips.append(int(bit.sum()))
        any_flip |= bit.astype(bool)
    nrej = int(rejected.sum())
    return BatchTally(size, size - nrej, nrej, flips, int(any_flip.sum()), retries)


def _blocks(shots: int) -> list[tuple[int, int]]:
    nb = (shots + BLOCK_SHOTS - 1) // BLOCK_SHOTS
    return [(b, min(BLOCK_SHOTS, shots - b * BLOCK_SHOTS)) for b in range(nb)]


def _tables(f: CompiledFrame, stages):
    staged = {i for st in stages for i in st.sites}
    rest = _SiteTable(f, [i for i in range(len(f.masks)) if i not in staged])
    per_stage = [
        (_SiteTable(f, st.sites), _bits_to_words(np.array(st.detectors, dtype=int), f.words)) for st in stages
    ]
    return rest, per_stage


def _worker(args):
    f, seed, blocks, groups, stages = args
    tables = _tables(f, stages)
    reject = f.group_mask(groups) if groups is not None else f.detector_mask
    tally = BatchTally(observable_flips=[0] * f.num_observables)
    for b, size in blocks:
        tally = tally.merge(_sample_block(f, tables, b, size, seed, reject))
    return tally


def sample(
    f: CompiledFrame,
    shots: int,
    seed: int = 0,
    workers: int = 1,
    reject_groups=None,
    stages=(),
) -> BatchTally:
    """Sample ``shots`` noisy shots and tally acceptance and observable flips.

    Shots are cut into fixed blocks of ``BLOCK_SHOTS`` whose random streams are
    keyed by ``(seed, block)``, so the tally does not depend on ``workers``.
    ``reject_groups`` restricts post-selection to detectors in those groups.
    Each :class:`Stage` is redrawn per shot until its detectors are clean
    (repeat-until-success); its sites must not overlap other stages.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    seen: set[int] = set()
    for st in stages:
        if seen & set(st.sites):
            raise ValueError(f"stage {st.name} overlaps an earlier stage")
        seen.update(st.sites)
    blocks = _blocks(shots)
    groups = None if reject_groups is None else set(reject_groups)
    stages = tuple(stages)
    if workers <= 1 or len(blocks) == 1:
        return _worker((f, seed, blocks, groups, stages))
    chunks = [blocks[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        parts = list(ex.map(_worker, [(f, seed, ch, groups, stages) for ch in chunks if ch]))
    total = BatchTally(observable_flips=[0] * f.num_observables)
    for t in parts:
        total = total.merge(t)
    return total


def sample_flips(f: CompiledFrame, shots: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Dense per-shot detector and observable flips (for cross-checks)."""
    table = _SiteTable(f)
    det = np.zeros((shots, f.num_detectors), dtype=bool)
    obs = np.zeros((shots, f.num_observables), dtype=bool)
    for b, size in _blocks(shots):
        rng = block_rng(seed, b)
        s, m = _sample_events(table, size, rng)
        if m is None:
            continue
        order = np.argsort(s, kind="stable")
        uniq = np.unique(s[order])
        rows = _combine(s, m)
        bits = np.unpackbits(rows.view(np.uint8), axis=1, bitorder="little")
        base = b * BLOCK_SHOTS
        det[base + uniq] = bits[:, : f.num_detectors].astype(bool)
        obs[base + uniq] = bits[:, f.num_detectors : f.num_detectors + f.num_observables].astype(bool)
    return det, obs
