"""
Success-rate and implementation-time model for the heralded protocol.

Every photon must survive two cavity reflections without the virtual
excitation decaying, be detected, and escape other losses:

    p_success(N) = [(1 - atomic_failure)^2 * eta * (1 - other_loss)]^N

``eta`` is read as the per-photon detection probability. Attempts are
independent at ``source_rate * parallel_sources`` per second, so the mean
waiting time is the geometric mean 1 / (rate * p_success).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .cavity import CavityParams
from .teleport import InputState, run_protocol

CHUNK = 1 << 16


@dataclass(frozen=True)
class LossModel:
    atomic_failure: float = 0.02
    detector_efficiency: float = 1e-4
    other_loss: float = 0.06
    source_rate: float = 1e4
    parallel_sources: int = 1

    def __post_init__(self):
        for name in ("atomic_failure", "detector_efficiency", "other_loss"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be a probability, got {v}")
        if not self.source_rate > 0:
            raise ValueError("source_rate must be positive")
        if int(self.parallel_sources) != self.parallel_sources or self.parallel_sources < 1:
            raise ValueError("parallel_sources must be a positive integer")

    def per_photon(self) -> float:
        return (1 - self.atomic_failure) ** 2 * self.detector_efficiency * (1 - self.other_loss)


def success_probability(n: int, m: LossModel = LossModel()) -> float:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return m.per_photon() ** n


def expected_time(n: int, m: LossModel = LossModel()) -> float:
    """Mean seconds until the first fully heralded run."""
    if n < 1:
        raise ValueError("n must be at least 1")
    p = success_probability(n, m)
    if p <= 0.0:
        raise ZeroDivisionError(f"success probability for n={n} is zero (or underflows)")
    t = 1.0 / (m.source_rate * m.parallel_sources * p)
    if math.isinf(t):
        raise OverflowError(f"expected time for n={n} overflows")
    return t


def figure2_table(
    n_range: Iterable[int], etas: Sequence[float], m: LossModel = LossModel()
) -> list[tuple[int, float, float]]:
    """Rows (n, eta, seconds), n outer and eta inner."""
    ns = list(n_range)
    etas = list(etas)
    if not ns or not etas:
        raise ValueError("n_range and etas must be nonempty")
    rows = []
    for n in ns:
        for eta in etas:
            mm = LossModel(m.atomic_failure, float(eta), m.other_loss, m.source_rate, m.parallel_sources)
            rows.append((int(n), float(eta), expected_time(n, mm)))
    return rows


def figure2_csv(rows: Iterable[tuple[int, float, float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "eta", "seconds"])
    for n, eta, sec in rows:
        w.writerow([n, repr(float(eta)), repr(float(sec))])
    return buf.getvalue()


@dataclass
class MCReport:
    trials: int
    successes: int
    empirical_rate: float
    conditional_fidelity: float | None
    seed: int
    fidelity_runs: int = 0

    @property
    def fidelity_defined(self) -> bool:
        return self.conditional_fidelity is not None

    def merge(self, other: "MCReport") -> "MCReport":
        trials = self.trials + other.trials
        successes = self.successes + other.successes
        runs = self.fidelity_runs + other.fidelity_runs
        if runs:
            fsum = (self.conditional_fidelity or 0.0) * self.fidelity_runs + (other.conditional_fidelity or 0.0) * other.fidelity_runs
            fid = fsum / runs
        else:
            fid = None
        return MCReport(trials, successes, successes / trials if trials else 0.0, fid, self.seed, runs)

    def as_dict(self) -> dict:
        return {
            "trials": self.trials,
            "successes": self.successes,
            "empirical_rate": self.empirical_rate,
            "conditional_fidelity": self.conditional_fidelity,
            "fidelity_defined": self.fidelity_defined,
            "fidelity_runs": self.fidelity_runs,
            "seed": self.seed,
        }


def _survival_probs(m: LossModel) -> np.ndarray:
    # two cavity passes, detection, other loss
    return np.array([1 - m.atomic_failure, 1 - m.atomic_failure, m.detector_efficiency, 1 - m.other_loss])


def monte_carlo(
    n: int,
    m: LossModel = LossModel(),
    trials: int = 10**6,
    seed: int = 0,
    p: CavityParams | None = None,
    max_fidelity_runs: int | None = None,
) -> MCReport:
    """Sample per-photon survival for each trial; heralded trials run the protocol.

    Trials are processed in chunks of 65536, chunk k drawing from
    ``SeedSequence([seed, k])``; chunk reports are merged. Each heralded trial
    teleports a fresh random input at the cavity parameters ``p`` and
    contributes its fidelity. ``max_fidelity_runs`` caps protocol runs per
    chunk (None: every success).
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if n < 1:
        raise ValueError("n must be at least 1")
    p = p or CavityParams.operating_point()
    probs = _survival_probs(m)
    total = None
    for k, start in enumerate(range(0, trials, CHUNK)):
        size = min(CHUNK, trials - start)
        rng = np.random.default_rng(np.random.SeedSequence([seed, k]))
        draws = rng.random((size, n, probs.size))
        ok = np.all(draws < probs, axis=(1, 2))
        succ = int(ok.sum())
        runs = succ if max_fidelity_runs is None else min(succ, max_fidelity_runs)
        fids = []
        for _ in range(runs):
            inp = InputState.random(n, rng)
            fids.append(run_protocol(inp, p, seed=int(rng.integers(2**32))).fidelity)
        part = MCReport(size, succ, succ / size, float(np.mean(fids)) if fids else None, seed, runs)
        total = part if total is None else total.merge(part)
    return total
