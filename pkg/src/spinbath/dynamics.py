"""Propagation, steady states, and observables of the population dynamics.

Trajectories are computed with the dense matrix exponential, sampling
exp(generator * t) independently at every requested time.  The generator is
stiff when couplings span several decades (kappa = 1e-5 against 1), and the
exponential route keeps acceptance tests free of integrator tolerances.
Normalisation and positivity are asserted at every snapshot, never silently
repaired.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, null_space

from .chain import SpectralDecomposition
from .errors import NumericalIntegrityError, ValidationError
from .generator import LindbladSuperoperator, RateMatrix, structural_blocks, unvectorize, vectorize

# Construction-time tolerance for a population vector, and the looser drift
# budget allowed to the matrix exponential during propagation.
STATE_TOL = 1e-10
DRIFT_TOL = 1e-8


@dataclass(frozen=True)
class PopulationState:
    """Probability vector over energy eigenstates (nonnegative, sum 1)."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        if p.ndim != 1:
            raise ValidationError(f"population vector must be 1-D, got shape {p.shape}")
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
            raise ValidationError("population entries must lie in [0, 1]")
        if abs(p.sum() - 1.0) > STATE_TOL:
            raise ValidationError(f"population vector sums to {p.sum()!r}, expected 1")
        object.__setattr__(self, "p", p)

    @classmethod
    def basis(cls, dimension: int, index: int) -> "PopulationState":
        p = np.zeros(dimension)
        p[index] = 1.0
        return cls(p)

    @classmethod
    def uniform(cls, dimension: int) -> "PopulationState":
        return cls(np.full(dimension, 1.0 / dimension))

    @property
    def dimension(self) -> int:
        return self.p.size


def _as_population(p0) -> np.ndarray:
    if isinstance(p0, PopulationState):
        return p0.p
    return PopulationState(np.asarray(p0)).p


def _check_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=np.float64)
    if t.ndim != 1 or t.size == 0:
        raise ValidationError("time grid must be a non-empty 1-D array")
    if t[0] < 0 or np.any(np.diff(t) <= 0):
        raise ValidationError("time grid must be nonnegative and strictly increasing")
    return t


@dataclass(frozen=True)
class Trajectory:
    """Population snapshots on a strictly increasing time grid."""

    times: np.ndarray
    populations: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        t = _check_times(self.times)
        p = np.asarray(self.populations, dtype=np.float64)
        if p.shape != (t.size, p.shape[-1]):
            raise ValidationError("population snapshots do not match the time grid")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "populations", p)
        for k in range(t.size):
            _check_snapshot(p[k], float(t[k]))

    @property
    def dimension(self) -> int:
        return self.populations.shape[1]


def _check_snapshot(p: np.ndarray, t: float) -> None:
    drift = abs(float(p.sum()) - 1.0)
    if drift > DRIFT_TOL:
        raise NumericalIntegrityError(f"normalisation drift {drift:.3e} at t = {t:g}")
    low = float(p.min())
    if low < -DRIFT_TOL:
        raise NumericalIntegrityError(f"negative population {low:.3e} at t = {t:g}")


def propagate_populations(rates: RateMatrix, p0, times) -> Trajectory:
    """Evolve a population vector through exp(Lambda t) on the given grid."""
    p = _as_population(p0)
    if p.size != rates.dimension:
        raise ValidationError("initial state dimension does not match the rate matrix")
    t = _check_times(times)
    snapshots = np.empty((t.size, p.size))
    for k, tk in enumerate(t):
        snapshots[k] = expm(rates.matrix * tk) @ p
        _check_snapshot(snapshots[k], float(tk))
    return Trajectory(
        times=t,
        populations=snapshots,
        provenance={
            "engine": "pauli",
            "temperature": rates.temperature,
            "kappas": rates.kappas,
        },
    )


@dataclass(frozen=True)
class DensityTrajectory:
    """Density-matrix snapshots; populations are the real diagonal."""

    times: np.ndarray
    matrices: np.ndarray
    provenance: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.matrices.shape[-1]

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diagonal(self.matrices, axis1=1, axis2=2))


def _check_density(rho: np.ndarray, t: float, tol: float) -> None:
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise NumericalIntegrityError(f"density matrix lost Hermiticity at t = {t:g}")
    drift = abs(float(np.trace(rho).real) - 1.0)
    if drift > tol:
        raise NumericalIntegrityError(f"trace drift {drift:.3e} at t = {t:g}")
    low = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min())
    if low < -tol:
        raise NumericalIntegrityError(f"negative eigenvalue {low:.3e} at t = {t:g}")


def propagate_density(superop: LindbladSuperoperator, rho0: np.ndarray, times) -> DensityTrajectory:
    """Evolve a density matrix in the energy basis through the full generator."""
    d = superop.dimension
    rho = np.asarray(rho0, dtype=np.complex128)
    if rho.shape != (d, d):
        raise ValidationError(f"expected a {d} x {d} density matrix, got shape {rho.shape}")
    try:
        _check_density(rho, 0.0, STATE_TOL)
    except NumericalIntegrityError as exc:
        raise ValidationError(f"initial density matrix invalid: {exc}") from None
    t = _check_times(times)
    v0 = vectorize(rho)
    snapshots = np.empty((t.size, d, d), dtype=np.complex128)
    for k, tk in enumerate(t):
        snapshots[k] = unvectorize(expm(superop.matrix * tk) @ v0, d)
        _check_density(snapshots[k], float(tk), DRIFT_TOL)
    return DensityTrajectory(
        times=t,
        matrices=snapshots,
        provenance={
            "engine": "lindblad",
            "temperature": superop.temperature,
            "kappas": superop.kappas,
        },
    )


def steady_states(rates: RateMatrix, tol: float = 1e-12) -> list[PopulationState]:
    """One stationary population vector per decoupled structural block.

    Each block's restricted generator is solved for its kernel independently;
    a kernel dimension other than one per block is reported as a numerical
    integrity failure (this includes the T = 0 limit, where a block may hold
    several absorbing local minima).
    """
    blocks = structural_blocks(rates)
    d = rates.dimension
    states = []
    for block in blocks:
        full = np.zeros(d)
        if len(block) == 1:
            full[block[0]] = 1.0
        else:
            idx = np.asarray(block)
            sub = rates.matrix[np.ix_(idx, idx)]
            kernel = null_space(sub, rcond=tol)
            if kernel.shape[1] != 1:
                raise NumericalIntegrityError(
                    f"block {tuple(i + 1 for i in block)} has kernel dimension "
                    f"{kernel.shape[1]}, expected 1"
                )
            v = kernel[:, 0]
            v = v / v.sum()
            if v.min() < -1e-12:
                raise NumericalIntegrityError(
                    f"kernel vector of block {tuple(i + 1 for i in block)} has negative weight"
                )
            full[idx] = v
        states.append(PopulationState(full))
    return states


def gibbs_state(dec: SpectralDecomposition, temperature: float) -> PopulationState:
    """Thermal population vector exp(-E_i/T)/Z, evaluated overflow-safely."""
    if temperature <= 0:
        raise ValidationError(f"Gibbs state requires T > 0, got {temperature}")
    shifted = dec.energies - dec.energies.min()
    w = np.exp(-shifted / temperature)
    return PopulationState(w / w.sum())


def excitation_probability(trajectory) -> np.ndarray:
    """P_exc(t) = 1 - p_1(t), the departure from the native-like ground state."""
    return 1.0 - np.asarray(trajectory.populations)[:, 0]
