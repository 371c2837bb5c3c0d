"""Exhaustive single-fault enumeration."""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..noise import NoisyCircuit
from .frame import CompiledFrame, compile_frame

DETECTED = "DETECTED"
BENIGN = "BENIGN"
LOGICAL = "LOGICAL"


@dataclass(frozen=True)
class FaultEntry:
    site: int
    pauli: str
    channel: str
    qubits: tuple[int, ...]
    origin: str
    classification: str
    detectors: tuple[int, ...]
    observables: tuple[int, ...]


@dataclass
class FaultReport:
    entries: list[FaultEntry] = field(default_factory=list)
    observable_ids: list[int] = field(default_factory=list)

    @property
    def counts(self) -> dict[str, int]:
        c = Counter(e.classification for e in self.entries)
        return {k: c.get(k, 0) for k in (DETECTED, BENIGN, LOGICAL)}

    @property
    def logical(self) -> list[FaultEntry]:
        return [e for e in self.entries if e.classification == LOGICAL]

    def max_observables_flipped(self) -> int:
        """Largest number of observables flipped together by one undetected fault."""
        return max((len(e.observables) for e in self.logical), default=0)

    def logical_weight_histogram(self) -> dict[int, int]:
        return dict(Counter(len(e.observables) for e in self.logical))

    def to_dict(self) -> dict:
        return {
            "summary": {
                **self.counts,
                "total": len(self.entries),
                "max_observables_flipped": self.max_observables_flipped(),
                "logical_by_observable_count": {
                    str(k): v for k, v in sorted(self.logical_weight_histogram().items())
                },
            },
            "observable_ids": self.observable_ids,
            "entries": [
                {
                    "site": e.site,
                    "pauli": e.pauli,
                    "channel": e.channel,
                    "qubits": list(e.qubits),
                    "origin": e.origin,
                    "classification": e.classification,
                    "detectors": list(e.detectors),
                    "observables": list(e.observables),
                }
                for e in self.entries
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["site", "pauli", "classification"])
        for e in self.entries:
            w.writerow([e.site, e.pauli, e.classification])
        return buf.getvalue()


def _bits(row: np.ndarray, lo: int, hi: int) -> list[int]:
    out = []
    for b in range(lo, hi):
        if (int(row[b // 64]) >> (b % 64)) & 1:
            out.append(b - lo)
    return out


def inject_faults(
    nc: NoisyCircuit, observables=None, frame: CompiledFrame | None = None
) -> FaultReport:
    """Classify every (site, Pauli) single fault of ``nc``.

    ``observables`` restricts which observable ids count as logical (default
    all). Each location is visited exactly once.
    """
    f = frame if frame is not None else compile_frame(nc)
    ids = f.observable_ids
    keep = set(ids) if observables is None else set(observables)
    entries = []
    nd = f.num_detectors
    for si, (site, table) in enumerate(zip(nc.sites, f.masks)):
        for oi, label in enumerate(site.outcomes):
            row = table[oi]
            dets = _bits(row, 0, nd)
            obs = [ids[j] for j in _bits(row, nd, nd + f.num_observables) if ids[j] in keep]
            if dets:
                cls = DETECTED
            elif obs:
                cls = LOGICAL
            else:
                cls = BENIGN
            entries.append(
                FaultEntry(si, label, site.channel, site.qubits, site.origin, cls, tuple(dets), tuple(obs))
            )
    return FaultReport(entries, [i for i in ids if i in keep])
