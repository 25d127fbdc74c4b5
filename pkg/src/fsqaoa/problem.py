"""QUBO instances, the feature-selection objective, and the Ising encoding.

Conventions used throughout the package:

* Q is upper triangular: entries are keyed (i, j) with i <= j; (i, i) holds
  the linear coefficient of x_i and (i, j), i < j, the coupling of x_i x_j.
* Plain QUBO value:          f(x) = sum_i Q_ii x_i + sum_{i<j} Q_ij x_i x_j.
* Feature-selection value:   f(x) = -(1 - alpha) sum_i Q_ii x_i
                                    + alpha sum_{i<j} Q_ij x_i x_j,
  alpha in [0, 1] trading importance (diagonal) against redundancy
  (off-diagonal).
* Spin encoding: x_i = (1 - z_i) / 2 with z_i = +1 for bit 0 and -1 for
  bit 1, i.e. z = (-1)^x. Substituting into f gives
  H = offset + sum_i h_i Z_i + sum_{i<j} J_ij Z_i Z_j with
      offset += -(1 - alpha) Q_ii / 2          per diagonal entry,
      h_i    += +(1 - alpha) Q_ii / 2          per diagonal entry,
      offset += alpha Q_ij / 4,
      h_i    -= alpha Q_ij / 4,
      h_j    -= alpha Q_ij / 4,
      J_ij   += alpha Q_ij / 4                 per off-diagonal entry.
* Basis states are indexed with qubit 0 as the least significant bit:
  bit i of index k is (k >> i) & 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .rng import STREAM_INSTANCE, Xoshiro256StarStar

# A decision vector is any sequence of n bits (0/1 integers), e.g. a tuple.
DecisionVector = Sequence[int]

MAX_DENSE_QUBITS = 24  # 2**24 energies ~ 128 MiB of float64; hard cap.


def _check_bits(x: DecisionVector, n: int) -> None:
    if len(x) != n:
        raise ValueError(f"decision vector has length {len(x)}, expected {n}")
    for b in x:
        if b not in (0, 1):
            raise ValueError(f"decision vector entries must be 0/1, got {b!r}")


@dataclass(frozen=True)
class QuboMatrix:
    """Upper-triangular QUBO coefficient matrix.

    `entries` maps (i, j) with 0 <= i <= j < n to a finite real value.
    Missing entries are zero.
    """

    n: int
    entries: Mapping[tuple[int, int], float]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        for (i, j), v in self.entries.items():
            if not (0 <= i <= j < self.n):
                raise ValueError(f"entry ({i}, {j}) outside upper triangle for n={self.n}")
            if not math.isfinite(v):
                raise ValueError(f"entry ({i}, {j}) is not finite: {v!r}")
        object.__setattr__(self, "entries", dict(self.entries))

    def coefficient(self, i: int, j: int) -> float:
        """Q_ij for i <= j (0 when absent)."""
        if not (0 <= i <= j < self.n):
            raise ValueError(f"({i}, {j}) is not an upper-triangle index for n={self.n}")
        return self.entries.get((i, j), 0.0)

    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.n)
        for (i, j), v in self.entries.items():
            if i == j:
                d[i] = v
        return d

    def offdiagonal(self) -> list[tuple[int, int, float]]:
        """Sorted (i, j, value) triples with i < j."""
        out = [(i, j, v) for (i, j), v in self.entries.items() if i < j]
        out.sort()
        return out


@dataclass(frozen=True)
class FeatureSelectionInstance:
    """A QUBO matrix plus the importance/redundancy trade-off alpha.

    `seed` records how the instance was generated (for filenames and run
    records); instances built by hand may use any marker value.
    """

    q: QuboMatrix
    alpha: float
    seed: int

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")

    @property
    def n(self) -> int:
        return self.q.n


@dataclass(frozen=True)
class IsingHamiltonian:
    """Diagonal cost Hamiltonian offset + sum h_i Z_i + sum_{i<j} J_ij Z_i Z_j."""

    n: int
    linear: tuple[float, ...]
    couplings: Mapping[tuple[int, int], float]
    offset: float
    # Basis-energy cache; filled lazily because spectra of large n are big.
    _energies: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if len(self.linear) != self.n:
            raise ValueError("linear term count must equal n")
        for (i, j), v in self.couplings.items():
            if not (0 <= i < j < self.n):
                raise ValueError(f"coupling ({i}, {j}) must satisfy 0 <= i < j < n")
            if not math.isfinite(v):
                raise ValueError(f"coupling ({i}, {j}) is not finite: {v!r}")
        object.__setattr__(self, "couplings", dict(self.couplings))

    def basis_energies(self) -> np.ndarray:
        """Vector of energies over all 2**n basis states (qubit 0 = LSB).

        Cached after the first call; callers must not mutate the result.
        """
        cached = self._energies.get("v")
        if cached is None:
            cached = _all_basis_energies(self)
            self._energies["v"] = cached
        return cached


def generate_instance(
    n: int,
    seed: int,
    alpha: float = 0.5,
    bounds: tuple[float, float] = (0.0, 1.0),
) -> FeatureSelectionInstance:
    """Random instance with every Q entry ~ Uniform[bounds).

    All n diagonal and n(n-1)/2 off-diagonal entries are populated, drawn in
    row-major upper-triangle order (i ascending, then j from i upward) from
    the instance stream of `seed`, so the same (n, seed) always yields the
    same matrix regardless of alpha.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lo, hi = bounds
    if not hi > lo:
        raise ValueError(f"empty coefficient range [{lo}, {hi})")
    gen = Xoshiro256StarStar(seed, stream=STREAM_INSTANCE)
    entries: dict[tuple[int, int], float] = {}
    for i in range(n):
        for j in range(i, n):
            entries[(i, j)] = gen.uniform(lo, hi)
    return FeatureSelectionInstance(q=QuboMatrix(n=n, entries=entries), alpha=alpha, seed=seed)


def evaluate_qubo(q: QuboMatrix, x: DecisionVector) -> float:
    """Plain QUBO value sum_i Q_ii x_i + sum_{i<j} Q_ij x_i x_j."""
    _check_bits(x, q.n)
    total = 0.0
    for (i, j), v in q.entries.items():
        if x[i] and x[j]:
            total += v
    return total


def evaluate_feature_selection(inst: FeatureSelectionInstance, x: DecisionVector) -> float:
    """Feature-selection value -(1-a) sum Q_ii x_i + a sum_{i<j} Q_ij x_i x_j."""
    _check_bits(x, inst.n)
    a = inst.alpha
    total = 0.0
    for (i, j), v in inst.q.entries.items():
        if x[i] and x[j]:
            total += (a * v) if i != j else (-(1.0 - a) * v)
    return total


def to_ising(inst: FeatureSelectionInstance) -> IsingHamiltonian:
    """Spin encoding of the feature-selection objective (see module docstring).

    Exactness contract: basis_energy(to_ising(inst), x) equals
    evaluate_feature_selection(inst, x) for every bitstring x.
    """
    n = inst.n
    a = inst.alpha
    h = [0.0] * n
    couplings: dict[tuple[int, int], float] = {}
    offset = 0.0
    for (i, j), v in sorted(inst.q.entries.items()):
        if i == j:
            offset += -(1.0 - a) * v / 2.0
            h[i] += (1.0 - a) * v / 2.0
        else:
            c = a * v / 4.0
            offset += c
            h[i] -= c
            h[j] -= c
            couplings[(i, j)] = couplings.get((i, j), 0.0) + c
    return IsingHamiltonian(n=n, linear=tuple(h), couplings=couplings, offset=offset)


def basis_energy(h: IsingHamiltonian, x: DecisionVector) -> float:
    """Energy of the computational basis state |x>, z_i = (-1)^{x_i}."""
    _check_bits(x, h.n)
    z = [1.0 - 2.0 * b for b in x]
    total = h.offset
    for i, hi in enumerate(h.linear):
        total += hi * z[i]
    for (i, j), v in h.couplings.items():
        total += v * z[i] * z[j]
    return total


def _all_basis_energies(h: IsingHamiltonian) -> np.ndarray:
    """Vectorized basis_energy over all 2**n states, index bit i = x_i."""
    if h.n > MAX_DENSE_QUBITS:
        raise ValueError(f"n={h.n} exceeds the dense-spectrum cap of {MAX_DENSE_QUBITS}")
    idx = np.arange(1 << h.n)
    energies = np.full(idx.shape, h.offset)
    z = np.empty((h.n, idx.size))
    for i in range(h.n):
        z[i] = 1.0 - 2.0 * ((idx >> i) & 1)
    for i, hi in enumerate(h.linear):
        if hi != 0.0:
            energies += hi * z[i]
    for (i, j), v in h.couplings.items():
        if v != 0.0:
            energies += v * z[i] * z[j]
    return energies


# -- serialization ------------------------------------------------------------

def instance_to_json_dict(inst: FeatureSelectionInstance) -> dict:
    """JSON-ready dict: {n, alpha, seed, diag, offdiag:[{i, j, value}...]}."""
    return {
        "n": inst.n,
        "alpha": inst.alpha,
        "seed": inst.seed,
        "diag": [inst.q.coefficient(i, i) for i in range(inst.n)],
        "offdiag": [
            {"i": i, "j": j, "value": v} for (i, j, v) in inst.q.offdiagonal()
        ],
    }


def instance_from_json_dict(doc: Mapping) -> FeatureSelectionInstance:
    try:
        n = int(doc["n"])
        alpha = float(doc["alpha"])
        seed = int(doc["seed"])
        diag = list(doc["diag"])
        offdiag = list(doc["offdiag"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed instance document: {exc}") from exc
    if len(diag) != n:
        raise ValueError(f"diag has {len(diag)} entries, expected n={n}")
    entries: dict[tuple[int, int], float] = {}
    for i, v in enumerate(diag):
        entries[(i, i)] = float(v)
    for item in offdiag:
        i, j, v = int(item["i"]), int(item["j"]), float(item["value"])
        if not (0 <= i < j < n):
            raise ValueError(f"offdiag entry ({i}, {j}) must satisfy 0 <= i < j < n")
        if (i, j) in entries:
            raise ValueError(f"duplicate offdiag entry ({i}, {j})")
        entries[(i, j)] = v
    return FeatureSelectionInstance(q=QuboMatrix(n=n, entries=entries), alpha=alpha, seed=seed)


def save_instance(inst: FeatureSelectionInstance, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_json_dict(inst), fh, indent=2)
        fh.write("\n")


def load_instance(path) -> FeatureSelectionInstance:
    with open(path) as fh:
        return instance_from_json_dict(json.load(fh))
