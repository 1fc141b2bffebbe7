"""Minimal multi-qubit state engine.

Pure states and density operators over m qubits with a big-endian index
convention (qubit 0 is the most significant bit), local phase evolution
generated by single-qubit Z terms, Kraus channels with both exact density
action and trajectory sampling, projective measurement, and a two-largest-
eigenvalues solver that switches to power iteration on large operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .symcomb import WeightBasis, binom

__all__ = [
    "PureState",
    "DensityOperator",
    "KrausChannel",
    "RngStream",
    "make_ghz",
    "make_dicke",
    "make_target",
    "evolve_phases",
    "projective_measure",
    "measure_qubit",
    "standard_channel",
    "eig_top2",
]


@dataclass(frozen=True)
class PureState:
    """Normalized state vector on ``num_qubits`` qubits, big-endian indexing."""

    num_qubits: int
    amps: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amps, dtype=np.complex128)
        if amps.shape != (2 ** self.num_qubits,):
            raise ValueError(
                f"amplitude vector has shape {amps.shape}, expected ({2 ** self.num_qubits},)"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state vector not normalized: |norm - 1| = {abs(norm - 1.0):.3e}")
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    def inner(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amps, other.amps))

    def fidelity(self, other: "PureState") -> float:
        return float(abs(self.inner(other)) ** 2)

    def expectation(self, op: np.ndarray) -> float:
        return float(np.vdot(self.amps, op @ self.amps).real)

    def expectation_diag(self, diag: np.ndarray) -> float:
        return float((np.abs(self.amps) ** 2 @ diag).real)


@dataclass(frozen=True)
class DensityOperator:
    """Trace-one positive-semidefinite operator on ``num_qubits`` qubits."""

    num_qubits: int
    mat: np.ndarray

    def __post_init__(self) -> None:
        mat = np.asarray(self.mat, dtype=np.complex128)
        dim = 2 ** self.num_qubits
        if mat.shape != (dim, dim):
            raise ValueError(f"density matrix has shape {mat.shape}, expected ({dim}, {dim})")
        if np.max(np.abs(mat - mat.conj().T)) > 1e-10:
            raise ValueError("density matrix not Hermitian within 1e-10")
        if abs(np.trace(mat).real - 1.0) > 1e-10:
            raise ValueError("density matrix trace differs from 1 beyond 1e-10")
        object.__setattr__(self, "mat", mat)

    @classmethod
    def from_pure(cls, state: PureState) -> "DensityOperator":
        return cls(state.num_qubits, np.outer(state.amps, state.amps.conj()))

    def expectation(self, op: np.ndarray) -> float:
        return float(np.trace(op @ self.mat).real)


class RngStream:
    """Deterministic random stream addressed by a seed and a spawn key.

    ``substream(*ids)`` derives an independent child stream; equal
    (seed, key) pairs always reproduce the same draws.
    """

    def __init__(self, seed: int, key: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        self._gen: np.random.Generator | None = None

    @property
    def gen(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
            self._gen = np.random.default_rng(ss)
        return self._gen

    def substream(self, *ids: int) -> "RngStream":
        return RngStream(self.seed, self.key + tuple(int(i) for i in ids))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, key={self.key})"


def make_ghz(num_qubits: int) -> PureState:
    """(|0...0> + |1...1>)/sqrt(2) on ``num_qubits`` >= 2 qubits."""
    if num_qubits < 2:
        raise ValueError("GHZ state needs at least 2 qubits")
    amps = np.zeros(2 ** num_qubits, dtype=np.complex128)
    amps[0] = amps[-1] = 1 / np.sqrt(2)
    return PureState(num_qubits, amps)


def make_dicke(num_qubits: int, excitations: int) -> PureState:
    """Uniform superposition of all weight-``excitations`` basis states."""
    if not 0 <= excitations <= num_qubits:
        raise ValueError(f"excitations must lie in [0, {num_qubits}], got {excitations}")
    basis = WeightBasis(num_qubits, excitations)
    amps = np.zeros(2 ** num_qubits, dtype=np.complex128)
    amps[basis.indices] = 1 / np.sqrt(basis.size)
    return PureState(num_qubits, amps)


def make_target(n: int, q0: float) -> PureState:
    """sqrt(q0)|GHZ_2n> + sqrt(1-q0)|D_2n^n> on 2n qubits, n >= 3, 0 < q0 < 1."""
    if n < 3:
        raise ValueError(f"n must be at least 3, got {n}")
    if not 0.0 < q0 < 1.0:
        raise ValueError(f"q0 must lie strictly between 0 and 1, got {q0}")
    ghz = make_ghz(2 * n).amps
    dicke = make_dicke(2 * n, n).amps
    return PureState(2 * n, np.sqrt(q0) * ghz + np.sqrt(1.0 - q0) * dicke)


def evolve_phases(state: PureState, omegas: Sequence[float], t: float) -> PureState:
    """Apply prod_i exp(-i omega_i t Z_i / 2); qubit i picks up phase
    -omega_i t / 2 when its bit is 0 and +omega_i t / 2 when it is 1.
    """
    omegas = np.asarray(omegas, dtype=float)
    m = state.num_qubits
    if omegas.shape != (m,):
        raise ValueError(f"omegas has shape {omegas.shape}, expected ({m},)")
    idx = np.arange(2 ** m)
    phase = np.zeros(2 ** m)
    for q in range(m):
        bit = (idx >> (m - 1 - q)) & 1
        phase += np.where(bit == 1, 0.5, -0.5) * omegas[q] * t
    return PureState(m, state.amps * np.exp(-1j * phase))


def projective_measure(
    state: PureState, projectors: Sequence[np.ndarray], rng: np.random.Generator
) -> tuple[int, PureState, float]:
    """Sample an outcome from a complete projective measurement.

    Returns (outcome index, post-measurement state, outcome probability).
    The projectors must sum to the identity within 1e-10.
    """
    dim = state.dim
    total = sum(np.asarray(p, dtype=np.complex128) for p in projectors)
    if np.max(np.abs(total - np.eye(dim))) > 1e-10:
        raise ValueError("projectors do not sum to the identity within 1e-10")
    probs = np.array([state.expectation(p) for p in projectors])
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    outcome = int(rng.choice(len(projectors), p=probs))
    post = np.asarray(projectors[outcome]) @ state.amps
    prob = float(probs[outcome])
    return outcome, PureState(state.num_qubits, post / np.linalg.norm(post)), prob


def measure_qubit(
    state: PureState, qubit: int, basis_kets: np.ndarray, rng: np.random.Generator
) -> tuple[int, PureState, float]:
    """Measure one qubit in the orthonormal basis given by the rows of
    ``basis_kets`` (2x2). Returns (outcome, post-measurement state, prob).
    """
    m = state.num_qubits
    if not 0 <= qubit < m:
        raise ValueError(f"qubit index {qubit} out of range for {m} qubits")
    kets = np.asarray(basis_kets, dtype=np.complex128)
    if kets.shape != (2, 2) or np.max(np.abs(kets @ kets.conj().T - np.eye(2))) > 1e-10:
        raise ValueError("basis_kets must be a 2x2 matrix with orthonormal rows")
    psi = state.amps.reshape(2 ** qubit, 2, 2 ** (m - qubit - 1))
    # overlap[o] = <v_o | psi> on the measured axis
    overlap = np.einsum("os,asb->oab", kets.conj(), psi)
    probs = np.array([np.vdot(c, c).real for c in overlap])
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    outcome = int(rng.choice(2, p=probs))
    coeff = overlap[outcome] / np.sqrt(probs[outcome])
    post = (kets[outcome][None, :, None] * coeff[:, None, :]).reshape(-1)
    return outcome, PureState(m, post), float(probs[outcome])


@dataclass(frozen=True)
class KrausChannel:
    """CPTP map given by Kraus operators, applied per qubit or globally.

    ``per_qubit`` channels carry 2x2 operators applied independently to
    every qubit; global channels carry full 2^m x 2^m operators.
    """

    label: str
    strength: float
    num_qubits: int
    ops: tuple[np.ndarray, ...]
    per_qubit: bool

    def __post_init__(self) -> None:
        ops = tuple(np.asarray(k, dtype=np.complex128) for k in self.ops)
        dim = 2 if self.per_qubit else 2 ** self.num_qubits
        for k in ops:
            if k.shape != (dim, dim):
                raise ValueError(f"Kraus operator has shape {k.shape}, expected ({dim}, {dim})")
        object.__setattr__(self, "ops", ops)
        if self.completeness_defect() > 1e-12:
            raise ValueError("Kraus operators do not satisfy sum K^dag K = I within 1e-12")

    def completeness_defect(self) -> float:
        dim = self.ops[0].shape[0]
        total = sum(k.conj().T @ k for k in self.ops)
        return float(np.max(np.abs(total - np.eye(dim))))

    def apply_to_pure(self, state: PureState, rng: np.random.Generator) -> PureState:
        """Sample one trajectory: pick a Kraus branch per application site
        with probability ||K psi||^2 and renormalize.
        """
        m = state.num_qubits
        amps = state.amps
        if self.per_qubit:
            for q in range(m):
                psi = amps.reshape(2 ** q, 2, 2 ** (m - q - 1))
                branches = [np.einsum("st,atb->asb", k, psi).reshape(-1) for k in self.ops]
                probs = np.array([np.vdot(b, b).real for b in branches])
                probs = np.clip(probs, 0.0, None)
                probs /= probs.sum()
                j = int(rng.choice(len(branches), p=probs))
                amps = branches[j] / np.sqrt(probs[j])
        else:
            branches = [k @ amps for k in self.ops]
            probs = np.array([np.vdot(b, b).real for b in branches])
            probs = np.clip(probs, 0.0, None)
            probs /= probs.sum()
            j = int(rng.choice(len(branches), p=probs))
            amps = branches[j] / np.sqrt(probs[j])
        return PureState(m, amps)

    def apply_to_density(self, rho: DensityOperator) -> DensityOperator:
        """Exact channel action rho -> sum_j K_j rho K_j^dag."""
        m = rho.num_qubits
        mat = rho.mat
        if self.per_qubit:
            for q in range(m):
                embedded = [
                    np.kron(np.kron(np.eye(2 ** q), k), np.eye(2 ** (m - q - 1)))
                    for k in self.ops
                ]
                mat = sum(e @ mat @ e.conj().T for e in embedded)
        else:
            mat = sum(k @ mat @ k.conj().T for k in self.ops)
        return DensityOperator(m, mat)


def standard_channel(kind: str, strength: float, n: int, q0: float | None = None) -> KrausChannel:
    """Build one of the named preparation-noise channels on 2n qubits.

    kind "dephase": per-qubit {sqrt(1-g/2) I, sqrt(g/2) Z}.
    kind "depolarize": per-qubit {sqrt(1-3s/4) I, sqrt(s/4) X, Y, Z}.
    kind "coherent_mix": global unitary mixing that rotates the ideal state
    toward its in-span orthogonal complement, leaving fidelity exactly 1-s;
    requires q0.
    kind "none": identity channel.
    """
    if not 0.0 <= strength <= 1.0:
        raise ValueError(f"channel strength must lie in [0, 1], got {strength}")
    m = 2 * n
    eye2 = np.eye(2, dtype=np.complex128)
    if kind == "none":
        return KrausChannel("none", 0.0, m, (eye2,), per_qubit=True)
    if kind == "dephase":
        z = np.diag([1.0, -1.0]).astype(np.complex128)
        ops = (np.sqrt(1 - strength / 2) * eye2, np.sqrt(strength / 2) * z)
        return KrausChannel(kind, strength, m, ops, per_qubit=True)
    if kind == "depolarize":
        x = np.array([[0, 1], [1, 0]], dtype=np.complex128)
        y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
        z = np.diag([1.0, -1.0]).astype(np.complex128)
        ops = (
            np.sqrt(1 - 3 * strength / 4) * eye2,
            np.sqrt(strength / 4) * x,
            np.sqrt(strength / 4) * y,
            np.sqrt(strength / 4) * z,
        )
        return KrausChannel(kind, strength, m, ops, per_qubit=True)
    if kind == "coherent_mix":
        if q0 is None:
            raise ValueError("coherent_mix needs q0 to locate the ideal state")
        target = make_target(n, q0).amps
        perp = np.sqrt(q0) * make_dicke(m, n).amps - np.sqrt(1 - q0) * make_ghz(m).amps
        # unitary swapping |target> <-> |perp|, identity elsewhere
        u = (
            np.eye(2 ** m, dtype=np.complex128)
            - np.outer(target, target.conj())
            - np.outer(perp, perp.conj())
            + np.outer(perp, target.conj())
            + np.outer(target, perp.conj())
        )
        ops = (np.sqrt(1 - strength) * np.eye(2 ** m, dtype=np.complex128), np.sqrt(strength) * u)
        return KrausChannel(kind, strength, m, ops, per_qubit=False)
    raise ValueError(f"unknown channel kind {kind!r}")


def eig_top2(
    op: np.ndarray,
    dense_cutoff: int = 2048,
    tol: float = 1e-10,
    max_iter: int = 100_000,
) -> tuple[float, float]:
    """Two largest eigenvalues of a Hermitian operator.

    Dense diagonalization up to ``dense_cutoff``; beyond that, shifted power
    iteration with deflation, converged when the residual ||Av - lv|| drops
    below ``tol``. Raises if the input is not Hermitian within 1e-10 or the
    iteration does not converge.
    """
    a = np.asarray(op, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 2:
        raise ValueError("operator must be at least 2x2")
    if np.max(np.abs(a - a.conj().T)) > 1e-10:
        raise ValueError("operator not Hermitian within 1e-10")
    dim = a.shape[0]
    if dim <= dense_cutoff:
        w = np.linalg.eigvalsh(a)
        return float(w[-1]), float(w[-2])

    # shift so the algebraically largest eigenvalue dominates in magnitude
    shift = float(np.max(np.sum(np.abs(a), axis=1))) + 1.0
    gen = np.random.default_rng(0)

    def dominant(vecs_to_deflate: list[np.ndarray]) -> tuple[float, np.ndarray]:
        v = gen.normal(size=dim) + 1j * gen.normal(size=dim)
        for u in vecs_to_deflate:
            v -= u * np.vdot(u, v)
        v /= np.linalg.norm(v)
        for _ in range(max_iter):
            w = a @ v + shift * v
            for u in vecs_to_deflate:
                w -= u * np.vdot(u, w)
            w /= np.linalg.norm(w)
            av = a @ w
            lam = float(np.vdot(w, av).real)
            if np.linalg.norm(av - lam * w) <= tol * max(1.0, abs(lam)):
                return lam, w
            v = w
        raise RuntimeError("power iteration did not converge within max_iter")

    lam1, v1 = dominant([])
    lam2, _ = dominant([v1])
    return lam1, lam2
