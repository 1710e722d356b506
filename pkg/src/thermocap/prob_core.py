"""Finite probability vectors, classical channels, diagonal Hamiltonians and Gibbs states."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

TAU_PROB = 1e-9
DEFAULT_TENSOR_BUDGET = 4096


def _as_readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability vector on ``dim`` outcomes.

    Entries must be non-negative and sum to one within ``TAU_PROB``; small
    normalization drift is divided out on construction.
    """

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).reshape(-1)
        if p.size == 0:
            raise ValueError("distribution must have at least one entry")
        if not np.all(np.isfinite(p)):
            raise ValueError("distribution entries must be finite")
        if np.any(p < -TAU_PROB):
            raise ValueError(f"negative probability {p.min()!r}")
        p = np.clip(p, 0.0, None)
        s = p.sum()
        if abs(s - 1.0) > TAU_PROB:
            raise ValueError(f"probabilities sum to {s!r}, not 1")
        object.__setattr__(self, "probs", _as_readonly(p / s))

    @property
    def dim(self) -> int:
        return int(self.probs.size)

    def __len__(self):
        return self.dim

    def __getitem__(self, i):
        return self.probs[i]

    def __iter__(self):
        return iter(self.probs)

    def __repr__(self):
        return f"Distribution({np.array2string(self.probs, precision=6)})"

    @classmethod
    def uniform(cls, dim: int) -> "Distribution":
        return cls(np.full(dim, 1.0 / dim))

    @classmethod
    def point(cls, dim: int, index: int = 0) -> "Distribution":
        p = np.zeros(dim)
        p[index] = 1.0
        return cls(p)


@dataclass(frozen=True, eq=False)
class ClassicalChannel:
    """Column-stochastic matrix with ``matrix[j, i] = T[j|i]``.

    Rows index outputs ``j``, columns index inputs ``i``.
    """

    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.size == 0:
            raise ValueError("channel matrix must be a non-empty 2-d array")
        if not np.all(np.isfinite(m)):
            raise ValueError("channel entries must be finite")
        if np.any(m < -TAU_PROB):
            raise ValueError("channel entries must be non-negative")
        m = np.clip(m, 0.0, None)
        cols = m.sum(axis=0)
        bad = np.abs(cols - 1.0) > TAU_PROB
        if np.any(bad):
            raise ValueError(f"input columns {np.flatnonzero(bad).tolist()} do not sum to 1")
        object.__setattr__(self, "matrix", _as_readonly(m / cols))

    @property
    def in_dim(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def out_dim(self) -> int:
        return int(self.matrix.shape[0])

    def column(self, i: int) -> Distribution:
        return Distribution(self.matrix[:, i])

    def __repr__(self):
        label = f"{self.name!r}, " if self.name else ""
        return f"ClassicalChannel({label}{self.out_dim}x{self.in_dim})"

    @classmethod
    def identity(cls, dim: int) -> "ClassicalChannel":
        return cls(np.eye(dim), name=f"identity{dim}")

    @classmethod
    def constant(cls, out: Distribution | Sequence[float], in_dim: int = 2) -> "ClassicalChannel":
        col = np.asarray(out.probs if isinstance(out, Distribution) else out, dtype=float)
        return cls(np.tile(col[:, None], (1, in_dim)), name="constant")

    @classmethod
    def bsc(cls, flip: float) -> "ClassicalChannel":
        if not 0.0 <= flip <= 1.0:
            raise ValueError("flip probability must lie in [0, 1]")
        return cls(np.array([[1 - flip, flip], [flip, 1 - flip]]), name=f"bsc({flip:g})")


@dataclass(frozen=True, eq=False)
class DiagonalHamiltonian:
    """Energy levels ``E_n`` of a Hamiltonian diagonal in the computational basis."""

    energies: np.ndarray

    def __post_init__(self):
        e = np.array(self.energies, dtype=float).reshape(-1)
        if e.size == 0:
            raise ValueError("Hamiltonian needs at least one level")
        if not np.all(np.isfinite(e)):
            raise ValueError("energies must be finite")
        object.__setattr__(self, "energies", _as_readonly(e))

    @property
    def dim(self) -> int:
        return int(self.energies.size)

    def __repr__(self):
        return f"DiagonalHamiltonian({np.array2string(self.energies, precision=6)})"

    @classmethod
    def degenerate(cls, dim: int) -> "DiagonalHamiltonian":
        return cls(np.zeros(dim))


WORK_UNITS = ("bits", "natural")


@dataclass(frozen=True)
class ThermoConfig:
    """Bath temperature and Boltzmann constant.

    Energies everywhere are absolute (same unit as ``k_B T``). ``work_unit``
    only affects :meth:`express`: ``"bits"`` divides by ``k_B T ln 2``,
    ``"natural"`` returns the energy unchanged.
    """

    temperature: float = 1.0
    boltzmann_constant: float = 1.0
    work_unit: str = "bits"

    def __post_init__(self):
        if not (np.isfinite(self.temperature) and self.temperature > 0):
            raise ValueError("temperature must be positive and finite")
        if not (np.isfinite(self.boltzmann_constant) and self.boltzmann_constant > 0):
            raise ValueError("boltzmann_constant must be positive and finite")
        if self.work_unit not in WORK_UNITS:
            raise ValueError(f"work_unit must be one of {WORK_UNITS}")

    @property
    def kT(self) -> float:
        return self.temperature * self.boltzmann_constant

    @property
    def bit_energy(self) -> float:
        """Energy of one bit of work, ``k_B T ln 2``."""
        return self.kT * np.log(2.0)

    def express(self, energy: float) -> float:
        if self.work_unit == "bits":
            return energy / self.bit_energy
        return energy

    def scaled(self, factor: float) -> "ThermoConfig":
        return ThermoConfig(self.temperature * factor, self.boltzmann_constant, self.work_unit)


@dataclass(frozen=True, eq=False)
class BipartiteClassicalState:
    """Joint distribution ``joint[m, n]`` on a product of two finite alphabets."""

    joint: np.ndarray

    def __post_init__(self):
        P = np.array(self.joint, dtype=float)
        if P.ndim != 2 or P.size == 0:
            raise ValueError("joint must be a non-empty 2-d array")
        if not np.all(np.isfinite(P)) or np.any(P < -TAU_PROB):
            raise ValueError("joint entries must be finite and non-negative")
        P = np.clip(P, 0.0, None)
        s = P.sum()
        if abs(s - 1.0) > TAU_PROB:
            raise ValueError(f"joint sums to {s!r}, not 1")
        object.__setattr__(self, "joint", _as_readonly(P / s))

    @property
    def dim_a(self) -> int:
        return int(self.joint.shape[0])

    @property
    def dim_b(self) -> int:
        return int(self.joint.shape[1])

    def flat(self) -> Distribution:
        """Joint as a distribution on ``dim_a * dim_b`` outcomes (row-major)."""
        return Distribution(self.joint.reshape(-1))

    @classmethod
    def max_correlated(cls, dim: int) -> "BipartiteClassicalState":
        """The classically maximally correlated state, mass 1/dim on each (m, m)."""
        return cls(np.eye(dim) / dim)

    @classmethod
    def product(cls, a: Distribution, b: Distribution) -> "BipartiteClassicalState":
        return cls(np.outer(a.probs, b.probs))


@dataclass(frozen=True)
class Codebook:
    """Codeword (input index) for each of the ``M`` messages; repeats allowed."""

    codewords: tuple

    def __post_init__(self):
        cw = tuple(int(c) for c in self.codewords)
        if not cw:
            raise ValueError("codebook needs at least one codeword")
        if min(cw) < 0:
            raise ValueError("codeword indices must be non-negative")
        object.__setattr__(self, "codewords", cw)

    @property
    def message_count(self) -> int:
        return len(self.codewords)

    def __len__(self):
        return len(self.codewords)

    def check(self, ch: ClassicalChannel):
        if max(self.codewords) >= ch.in_dim:
            raise ValueError(f"codeword {max(self.codewords)} out of range for in_dim {ch.in_dim}")


def _dist(p) -> Distribution:
    return p if isinstance(p, Distribution) else Distribution(p)


def _ham(h) -> DiagonalHamiltonian:
    return h if isinstance(h, DiagonalHamiltonian) else DiagonalHamiltonian(h)


def gibbs_state(h: DiagonalHamiltonian, cfg: ThermoConfig) -> Distribution:
    """Thermal distribution ``exp(-E_n / kT) / Z``.

    Energies are shifted by their minimum before exponentiation, which leaves
    the normalized result unchanged and avoids overflow.
    """
    e = _ham(h).energies
    w = np.exp(-(e - e.min()) / cfg.kT)
    return Distribution(w / w.sum())


def apply_channel(ch: ClassicalChannel, p: Distribution) -> Distribution:
    p = _dist(p)
    if p.dim != ch.in_dim:
        raise ValueError(f"input has dim {p.dim}, channel expects {ch.in_dim}")
    return Distribution(ch.matrix @ p.probs)


def trace_distance(p: Distribution, q: Distribution) -> float:
    """Un-halved 1-norm distance ``sum_j |p_j - q_j|`` (range [0, 2])."""
    p, q = _dist(p), _dist(q)
    if p.dim != q.dim:
        raise ValueError(f"dimension mismatch {p.dim} vs {q.dim}")
    return float(np.abs(p.probs - q.probs).sum())


def tensor_product_channel(a: ClassicalChannel, b: ClassicalChannel,
                           budget: int = DEFAULT_TENSOR_BUDGET) -> ClassicalChannel:
    """Parallel composition; output pair (j1, j2) has index ``j1 * b.out_dim + j2``."""
    entries = a.matrix.size * b.matrix.size
    if entries > budget:
        raise ValueError(f"tensor product has {entries} matrix entries, budget is {budget}")
    name = f"{a.name}*{b.name}" if a.name and b.name else ""
    return ClassicalChannel(np.kron(a.matrix, b.matrix), name=name)


def tensor_power(ch: ClassicalChannel, k: int, budget: int = DEFAULT_TENSOR_BUDGET) -> ClassicalChannel:
    if k < 1:
        raise ValueError("tensor power needs k >= 1")
    entries = ch.matrix.size ** k
    if entries > budget:
        raise ValueError(f"tensor power k={k} has {entries} matrix entries, budget is {budget}")
    out = ch
    for _ in range(k - 1):
        out = tensor_product_channel(out, ch, budget=budget)
    if k > 1 and ch.name:
        out = ClassicalChannel(out.matrix, name=f"{ch.name}^{k}")
    return out


def tensor_distribution(p: Distribution, k: int) -> Distribution:
    out = np.ones(1)
    for _ in range(k):
        out = np.kron(out, _dist(p).probs)
    return Distribution(out)


def marginals(s: BipartiteClassicalState) -> tuple[Distribution, Distribution]:
    return Distribution(s.joint.sum(axis=1)), Distribution(s.joint.sum(axis=0))


def product_of_marginals(s: BipartiteClassicalState) -> BipartiteClassicalState:
    a, b = marginals(s)
    return BipartiteClassicalState.product(a, b)


def apply_local(ch: ClassicalChannel, s: BipartiteClassicalState) -> BipartiteClassicalState:
    """Act with ``ch`` on the first party of ``s`` and with the identity on the second."""
    if s.dim_a != ch.in_dim:
        raise ValueError(f"state first party has dim {s.dim_a}, channel expects {ch.in_dim}")
    return BipartiteClassicalState(ch.matrix @ s.joint)
