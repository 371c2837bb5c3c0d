"""Binomial intervals, the Ramsey decay fit, power-law regression and the magic-state bound."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, stats as sps

WILSON_Z1 = "WILSON_Z1"
NORMAL = "NORMAL"


@dataclass(frozen=True)
class BinomialCI:
    point: float
    lo: float
    hi: float
    method: str = WILSON_Z1

    def to_dict(self) -> dict:
        return asdict(self)


def _check_counts(k: float, n: float) -> None:
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k} n={n}")


def wilson(k: float, n: float, z: float = 1.0) -> BinomialCI:
    """Wilson score interval; ``point`` is the interval center."""
    _check_counts(k, n)
    z2 = z * z
    center = (k + z2 / 2) / (n + z2)
    half = z / (n + z2) * math.sqrt(k * (n - k) / n + z2 / 4)
    return BinomialCI(center, max(0.0, center - half), min(1.0, center + half), WILSON_Z1)


def normal_ci(k: float, n: float, z: float = 1.0) -> BinomialCI:
    """Textbook ``p +- z sqrt(p(1-p)/n)``, clipped to [0, 1]."""
    _check_counts(k, n)
    p = k / n
    half = z * math.sqrt(p * (1 - p) / n)
    return BinomialCI(p, max(0.0, p - half), min(1.0, p + half), NORMAL)


# --------------------------------------------------------------------- Ramsey


def ramsey_model(L, s: float, eps: float):
    """Survival after ``L`` noisy rotations: 1/2 + (1 - s)(1 - 2 eps)^L / 2."""
    return 0.5 + 0.5 * (1 - s) * (1 - 2 * eps) ** np.asarray(L, dtype=float)


@dataclass
class RamseyFit:
    s: float
    eps: float
    log_likelihood: float
    s_ci: tuple[float, float] | None = None
    eps_ci: tuple[float, float] | None = None
    mcmc: dict = field(default_factory=dict)

    @property
    def average_infidelity(self) -> float:
        """Per-rotation average infidelity, two thirds of the Y-flip probability."""
        return 2 * self.eps / 3

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "eps": self.eps,
            "average_infidelity": self.average_infidelity,
            "s_ci": self.s_ci,
            "eps_ci": self.eps_ci,
            "log_likelihood": self.log_likelihood,
            "mcmc": self.mcmc,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _ramsey_data(data) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    arr = np.asarray([(float(L), float(k), float(n)) for L, k, n in data])
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError("no data")
    L, k, n = arr.T
    if np.any(L < 0) or np.any(L % 2):
        raise ValueError("sequence lengths must be even and non-negative")
    if len(np.unique(L)) < 2:
        raise ValueError("need at least two distinct sequence lengths")
    if np.any(n < 1) or np.any(k < 0) or np.any(k > n):
        raise ValueError("need 0 <= k <= n and n >= 1")
    return L, k, n


def ramsey_loglike(data, s: float, eps: float) -> float:
    L, k, n = _ramsey_data(data)
    return _loglike(L, k, n, s, eps)


def _loglike(L, k, n, s, eps) -> float:
    if not (0 <= s <= 1 and 0 <= eps <= 1):
        return -math.inf
    P = ramsey_model(L, s, eps)
    tiny = 1e-300
    with np.errstate(divide="ignore", invalid="ignore"):
        ll = k * np.log(np.maximum(P, tiny)) + (n - k) * np.log(np.maximum(1 - P, tiny))
    # exact zeros contribute nothing when their count is zero
    ll = np.where((n - k) == 0, k * np.log(np.maximum(P, tiny)), ll)
    return float(np.sum(ll))


_GRID = np.concatenate([[0.0], np.logspace(-8, np.log10(0.5), 60)])


def fit_ramsey(
    data: Sequence[tuple[float, float, float]],
    mcmc: bool = True,
    seed: int = 0,
    prior: str = "flat",
    **mcmc_options,
) -> RamseyFit:
    """Maximum-likelihood (s, eps) over product-binomial data ``(L, k, n)``.

    A log-spaced grid (including the boundary 0) picks the start, a bounded
    quasi-Newton step polishes it. With ``mcmc`` the 16/84% posterior
    quantiles are attached as intervals; ``prior`` is ``flat`` in (s, eps)
    or ``log`` (flat in the log coordinates, improper as s -> 0).
    """
    if prior not in ("flat", "log"):
        raise ValueError(f"unknown prior {prior!r}")
    L, k, n = _ramsey_data(data)
    best = (-math.inf, 0.0, 0.0)
    for s in _GRID:
        for e in _GRID:
            ll = _loglike(L, k, n, s, e)
            if ll > best[0]:
                best = (ll, s, e)
    _, s0, e0 = best
    scale = np.array([max(s0, 1e-6), max(e0, 1e-6)])

    def neg(x):
        return -_loglike(L, k, n, x[0] * scale[0], x[1] * scale[1])

    res = optimize.minimize(
        neg, x0=np.array([s0, e0]) / scale, method="L-BFGS-B", bounds=[(0, 1 / scale[0]), (0, 0.5 / scale[1])]
    )
    s_hat, e_hat = float(res.x[0] * scale[0]), float(res.x[1] * scale[1])
    ll_hat = _loglike(L, k, n, s_hat, e_hat)
    if ll_hat < best[0]:
        ll_hat, s_hat, e_hat = best
    fit = RamseyFit(s_hat, e_hat, ll_hat)
    if mcmc:
        def logpost(theta):
            s, e = math.exp(theta[0]), math.exp(theta[1])
            ll = _loglike(L, k, n, s, e)
            # Jacobian of the log transform keeps the prior flat in (s, eps)
            return ll + theta[0] + theta[1] if prior == "flat" else ll

        init = np.log([max(s_hat, 1e-7), max(e_hat, 1e-7)])
        out = mcmc_ci(logpost, init, seed=seed, **mcmc_options)
        qs = np.exp(out["quantiles"])
        fit.s_ci = (float(qs[0, 0]), float(qs[2, 0]))
        fit.eps_ci = (float(qs[0, 1]), float(qs[2, 1]))
        fit.mcmc = {k: v for k, v in out.items() if k not in ("quantiles", "samples")}
        fit.mcmc["median"] = [float(x) for x in qs[1]]
        fit.mcmc["prior"] = prior
    return fit


def mcmc_ci(
    logpdf: Callable[[np.ndarray], float],
    init,
    chains: int = 4,
    steps: int = 10_000,
    burn_in: float = 0.2,
    quantiles=(0.16, 0.5, 0.84),
    seed: int = 0,
    step_size: float | None = None,
    target_accept: float = 0.3,
) -> dict:
    """Random-walk Metropolis; returns per-parameter quantiles of the pooled chains.

    Proposals are isotropic Gaussians whose scale adapts during burn-in toward
    ``target_accept``; post-burn-in samples of all chains are concatenated.
    """
    init = np.atleast_1d(np.asarray(init, dtype=float))
    if not np.isfinite(logpdf(init)):
        raise ValueError("log density is not finite at the initial point")
    burn = int(steps * burn_in)
    rng = np.random.default_rng(seed)
    dim = init.size
    pooled = []
    rates = []
    per_chain = []
    for c in range(chains):
        x = init + (0.1 * rng.standard_normal(dim) if c else 0.0)
        lp = logpdf(x)
        if not np.isfinite(lp):
            x, lp = init.copy(), logpdf(init)
        scale = step_size if step_size is not None else 0.5
        kept = []
        accepted = 0
        window = 0
        for t in range(steps):
            prop = x + scale * rng.standard_normal(dim)
            lq = logpdf(prop)
            if np.isfinite(lq) and math.log(rng.random()) < lq - lp:
                x, lp = prop, lq
                accepted += 1
                window += 1
            if t < burn and (t + 1) % 100 == 0 and step_size is None:
                rate = window / 100
                scale *= math.exp(rate - target_accept)
                window = 0
            if t >= burn:
                kept.append(x.copy())
        kept = np.array(kept).reshape(-1, dim)
        pooled.append(kept)
        per_chain.append(np.quantile(kept, quantiles, axis=0))
        rates.append(accepted / steps)
    samples = np.concatenate(pooled)
    return {
        "quantiles": np.quantile(samples, quantiles, axis=0),
        "chain_quantiles": [q.tolist() for q in per_chain],
        "acceptance": rates,
        "chains": chains,
        "steps": steps,
        "burn_in": burn_in,
        "samples": samples,
    }


# ------------------------------------------------------------------ power law


@dataclass(frozen=True)
class PowerLawFit:
    A: float
    b: float
    stderr_A: float
    stderr_b: float

    def predict(self, p):
        return self.A * np.asarray(p, dtype=float) ** self.b

    def to_dict(self) -> dict:
        return asdict(self)


def fit_power_law(points: Sequence[tuple[float, float]]) -> PowerLawFit:
    """Least squares of log(rate) on log(p)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValueError("need at least two (p, rate) points")
    if np.any(pts <= 0):
        raise ValueError("power-law fit needs positive p and rate")
    if len(np.unique(pts[:, 0])) < 2:
        raise ValueError("need at least two distinct p values")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    if pts.shape[0] == 2:
        b = (ly[1] - ly[0]) / (lx[1] - lx[0])
        A = math.exp(ly[0] - b * lx[0])
        return PowerLawFit(A, float(b), 0.0, 0.0)
    r = sps.linregress(lx, ly)
    A = math.exp(r.intercept)
    return PowerLawFit(A, float(r.slope), A * float(r.intercept_stderr), float(r.stderr))


# -------------------------------------------------------------- fidelity bound


@dataclass(frozen=True)
class FidelityBound:
    r: float
    s_syn: float
    bound: float

    def to_dict(self) -> dict:
        return asdict(self)


def magic_bound(r: float, s_syn: float) -> FidelityBound:
    """Infidelity bound r / (2 (1 - s_syn)) for each of the two output states."""
    if not 0 <= r <= 1:
        raise ValueError(f"r={r} is not a probability")
    if not 0 <= s_syn < 1:
        raise ValueError(f"s_syn={s_syn} must lie in [0, 1)")
    return FidelityBound(r, s_syn, r / (2 * (1 - s_syn)))


def syndrome_probability(accept_rate: float, reading: str = "rejection") -> float:
    """Estimate the non-trivial-syndrome probability from a benchmark accept rate.

    ``rejection`` (default) takes half the rejection rate; ``accept`` takes
    half the accept rate, the literal alternative.
    """
    if not 0 <= accept_rate <= 1:
        raise ValueError("accept rate must lie in [0, 1]")
    if reading == "rejection":
        return (1 - accept_rate) / 2
    if reading == "accept":
        return accept_rate / 2
    raise ValueError(f"unknown reading {reading!r}")
