"""Fitness distributions and simulation parameters.

Every stochastic routine takes an explicit random source (any object with a
``random()`` method returning floats in [0, 1), e.g. ``numpy.random.Generator``);
there is no global randomness anywhere in the package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field


class ParameterError(ValueError):
    """Invalid distribution or model parameter."""


class FitnessDistribution:
    """Base class for fitness laws on a closed support [0, eta_max]."""

    @property
    def eta_max(self) -> float:
        raise NotImplementedError

    def sample(self, rng) -> float:
        raise NotImplementedError

    def density(self, eta: float) -> float:
        raise NotImplementedError

    def cdf(self, eta: float) -> float:
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class DeltaFitness(FitnessDistribution):
    """All nodes share the same fitness ``eta0``."""

    eta0: float = 1.0

    def __post_init__(self):
        if self.eta0 < 0:
            raise ParameterError(f"eta0 must be nonnegative, got {self.eta0}")

    @property
    def eta_max(self) -> float:
        return self.eta0

    def sample(self, rng) -> float:
        return self.eta0

    def density(self, eta: float) -> float:
        # Point mass; only meaningful under an integral sign.
        return math.inf if eta == self.eta0 else 0.0

    def cdf(self, eta: float) -> float:
        return 1.0 if eta >= self.eta0 else 0.0

    def mean(self) -> float:
        return self.eta0


@dataclass(frozen=True)
class TruncatedExponentialFitness(FitnessDistribution):
    """Exponential density restricted to [0, eta_max] and renormalized.

    density(eta) = lam * exp(-lam * eta) / (1 - exp(-lam * eta_max))
    """

    lam: float
    eta_max_: float = field(default=2.0)

    def __post_init__(self):
        if self.lam <= 0:
            raise ParameterError(f"lam must be positive, got {self.lam}")
        if self.eta_max_ <= 0:
            raise ParameterError(f"eta_max must be positive, got {self.eta_max_}")

    @property
    def eta_max(self) -> float:
        return self.eta_max_

    @property
    def _norm(self) -> float:
        return -math.expm1(-self.lam * self.eta_max_)

    def sample(self, rng) -> float:
        u = rng.random()
        # Inverse CDF of the truncated exponential.
        return -math.log1p(-u * self._norm) / self.lam

    def density(self, eta: float) -> float:
        if eta < 0 or eta > self.eta_max_:
            return 0.0
        return self.lam * math.exp(-self.lam * eta) / self._norm

    def cdf(self, eta: float) -> float:
        if eta <= 0:
            return 0.0
        if eta >= self.eta_max_:
            return 1.0
        return -math.expm1(-self.lam * eta) / self._norm

    def mean(self) -> float:
        lam, emax = self.lam, self.eta_max_
        return 1.0 / lam - emax * math.exp(-lam * emax) / self._norm


@dataclass(frozen=True)
class UniformFitness(FitnessDistribution):
    """Uniform fitness on [0, eta_max]."""

    eta_max_: float = 1.0

    def __post_init__(self):
        if self.eta_max_ <= 0:
            raise ParameterError(f"eta_max must be positive, got {self.eta_max_}")

    @property
    def eta_max(self) -> float:
        return self.eta_max_

    def sample(self, rng) -> float:
        return rng.random() * self.eta_max_

    def density(self, eta: float) -> float:
        if eta < 0 or eta > self.eta_max_:
            return 0.0
        return 1.0 / self.eta_max_

    def cdf(self, eta: float) -> float:
        return min(max(eta / self.eta_max_, 0.0), 1.0)

    def mean(self) -> float:
        return self.eta_max_ / 2.0


@dataclass(frozen=True)
class EmpiricalFitness(FitnessDistribution):
    """Resamples uniformly with replacement from a fixed list of values."""

    samples: tuple

    def __post_init__(self):
        if not self.samples:
            raise ParameterError("empirical distribution needs at least one sample")
        if any(s < 0 for s in self.samples):
            raise ParameterError("fitness samples must be nonnegative")

    @property
    def eta_max(self) -> float:
        return max(self.samples)

    def sample(self, rng) -> float:
        return self.samples[int(rng.random() * len(self.samples))]

    def density(self, eta: float) -> float:
        # Probability mass at eta (the sample set is the support).
        n = len(self.samples)
        return sum(1 for s in self.samples if s == eta) / n

    def cdf(self, eta: float) -> float:
        n = len(self.samples)
        return sum(1 for s in self.samples if s <= eta) / n

    def mean(self) -> float:
        return sum(self.samples) / len(self.samples)


def sample_fitness(dist: FitnessDistribution, rng) -> float:
    """Draw one fitness value from ``dist`` using ``rng``."""
    return dist.sample(rng)


def fitness_density(dist: FitnessDistribution, eta: float) -> float:
    """Density (or mass) of ``dist`` at ``eta``."""
    return dist.density(eta)


_FITNESS_NAMES = {"delta", "trunc-exp", "uniform", "empirical"}


@dataclass(frozen=True)
class ModelParams:
    """Parameters of one growth-with-deletion run.

    ``kernel_offset`` is the additive degree credit a node gets in the
    attachment weight eta * (k + offset); ``None`` means ``m``, which makes a
    newborn's weight match its out-link count.
    """

    m: int = 5
    c: float = 0.0
    fitness_dist: FitnessDistribution = DeltaFitness(1.0)
    total_steps: int = 10000
    snapshot_interval: int = 1000
    seed: int = 0
    kernel_offset: int | None = None

    def __post_init__(self):
        if self.m < 1:
            raise ParameterError(f"m must be a positive integer, got {self.m}")
        if not (0.0 <= self.c < 1.0):
            raise ParameterError(f"c must lie in [0, 1), got {self.c}")
        if self.total_steps < 1:
            raise ParameterError("total_steps must be positive")
        if not (1 <= self.snapshot_interval <= self.total_steps):
            raise ParameterError("snapshot_interval must be in [1, total_steps]")
        if not (0 <= self.seed < 2 ** 64):
            raise ParameterError("seed must be a 64-bit unsigned integer")
        if self.kernel_offset is not None and self.kernel_offset < 0:
            raise ParameterError("kernel_offset must be nonnegative")

    @property
    def offset(self) -> int:
        return self.m if self.kernel_offset is None else self.kernel_offset

    def to_config(self) -> str:
        """Serialize to flat ``key = value`` text."""
        lines = [f"m = {self.m}", f"c = {self.c!r}"]
        d = self.fitness_dist
        if isinstance(d, DeltaFitness):
            lines += ["fitness = delta", f"eta0 = {d.eta0!r}"]
        elif isinstance(d, TruncatedExponentialFitness):
            lines += ["fitness = trunc-exp", f"lambda = {d.lam!r}",
                      f"eta_max = {d.eta_max_!r}"]
        elif isinstance(d, UniformFitness):
            lines += ["fitness = uniform", f"eta_max = {d.eta_max_!r}"]
        elif isinstance(d, EmpiricalFitness):
            lines += ["fitness = empirical",
                      "samples = " + ",".join(repr(s) for s in d.samples)]
        else:
            raise ParameterError(f"cannot serialize fitness law {d!r}")
        lines += [f"steps = {self.total_steps}",
                  f"snapshot_interval = {self.snapshot_interval}",
                  f"seed = {self.seed}"]
        if self.kernel_offset is not None:
            lines.append(f"kernel_offset = {self.kernel_offset}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_config(cls, text: str) -> "ModelParams":
        """Parse the flat ``key = value`` format written by :meth:`to_config`."""
        kv = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParameterError(f"line {lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            kv[key.strip()] = value.strip()

        name = kv.get("fitness", "delta")
        if name not in _FITNESS_NAMES:
            raise ParameterError(f"unknown fitness law {name!r}")
        if name == "delta":
            dist = DeltaFitness(float(kv.get("eta0", kv.get("eta_max", 1.0))))
        elif name == "trunc-exp":
            dist = TruncatedExponentialFitness(
                lam=float(kv["lambda"]), eta_max_=float(kv.get("eta_max", 2.0)))
        elif name == "uniform":
            dist = UniformFitness(float(kv.get("eta_max", 1.0)))
        else:
            samples = tuple(float(s) for s in kv["samples"].split(",") if s)
            dist = EmpiricalFitness(samples)

        offset = kv.get("kernel_offset")
        return cls(
            m=int(kv.get("m", 5)),
            c=float(kv.get("c", 0.0)),
            fitness_dist=dist,
            total_steps=int(kv.get("steps", 10000)),
            snapshot_interval=int(kv.get("snapshot_interval", 1000)),
            seed=int(kv.get("seed", 0)),
            kernel_offset=None if offset is None else int(offset),
        )
