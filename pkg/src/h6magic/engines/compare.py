"""Statistical agreement between the frame sampler and tableau Monte Carlo."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2_contingency

from ..noise import NoisyCircuit
from .frame import compile_frame, sample_flips
from .tableau import sample_tableau


@dataclass
class EngineComparison:
    """Per-test chi-square p-values; ``p_min`` is Bonferroni-corrected."""

    shots: int
    tests: dict[str, float] = field(default_factory=dict)

    @property
    def p_min(self) -> float:
        if not self.tests:
            return 1.0
        return min(1.0, min(self.tests.values()) * len(self.tests))

    def agrees(self, alpha: float = 1e-3) -> bool:
        return self.p_min >= alpha

    def to_dict(self) -> dict:
        return {"shots": self.shots, "p_min": self.p_min, "tests": self.tests}


def _homogeneity(a: np.ndarray, b: np.ndarray) -> float | None:
    """p-value that two integer-coded samples share one categorical distribution."""
    cats, inv = np.unique(np.concatenate([a, b]), return_inverse=True)
    if len(cats) < 2:
        return None
    table = np.zeros((2, len(cats)), dtype=np.int64)
    np.add.at(table[0], inv[: len(a)], 1)
    np.add.at(table[1], inv[len(a) :], 1)
    # pool categories too rare for the chi-square approximation
    rare = table.sum(axis=0) < 10
    if rare.any():
        kept = table[:, ~rare]
        table = np.column_stack([kept, table[:, rare].sum(axis=1)]) if rare.sum() else kept
        table = table[:, table.sum(axis=0) > 0]
    if table.shape[1] < 2:
        return None
    return float(chi2_contingency(table, correction=False)[1])


def _code(bits: np.ndarray) -> np.ndarray:
    """Pack each row of up to 62 bits into one integer."""
    w = (1 << np.arange(bits.shape[1], dtype=np.int64)).astype(np.int64)
    return bits.astype(np.int64) @ w


def compare_engines(nc: NoisyCircuit, shots: int, seed: int = 0) -> EngineComparison:
    """Chi-square homogeneity tests between the two engines.

    Tests: every detector and observable marginal, the rejection indicator,
    and the observable pattern among accepted shots (joint, or per observable
    when there are many).
    """
    f = compile_frame(nc)
    fd, fo = sample_flips(f, shots, seed)
    td, to = sample_tableau(nc, shots, seed + 1)
    out = EngineComparison(shots)
    for j in range(fd.shape[1]):
        p = _homogeneity(fd[:, j].astype(np.int64), td[:, j].astype(np.int64))
        if p is not None:
            out.tests[f"detector{j}"] = p
    for j in range(fo.shape[1]):
        p = _homogeneity(fo[:, j].astype(np.int64), to[:, j].astype(np.int64))
        if p is not None:
            out.tests[f"observable{j}"] = p
    fr, tr = fd.any(axis=1), td.any(axis=1)
    p = _homogeneity(fr.astype(np.int64), tr.astype(np.int64))
    if p is not None:
        out.tests["rejected"] = p
    if fo.shape[1] and fo.shape[1] <= 16:
        # -1 marks a rejected shot
        fa = np.where(fr, -1, _code(fo))
        ta = np.where(tr, -1, _code(to))
        p = _homogeneity(fa, ta)
        if p is not None:
            out.tests["accepted_observable_pattern"] = p
    return out
