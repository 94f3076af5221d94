"""Dissipative generators for the open chain.

Two routes are built from the same spectral data:

* the Pauli rate matrix Lambda (primary engine), a d x d real generator whose
  off-diagonal entries are golden-rule damping/gain rates between energy
  eigenstates and whose columns sum to zero;
* the full Lindblad superoperator (oracle), a d^2 x d^2 complex matrix acting
  on column-stacked density matrices, assembled from the secular jump
  operators.

Both constructions assume a nondegenerate spectrum with nondegenerate gaps
and refuse degenerate input by default.  Structural zeros of Lambda (entries
that vanish for every T > 0 given the kappa and coupling-element patterns)
are tracked by an exact mask, never by thresholding floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bath import BathConfig, CouplingElements, bose_einstein, spectral_density
from .chain import DEGENERACY_TOL, ChainSpec, SpectralDecomposition, check_degeneracy
from .errors import DegenerateGapError, ValidationError

RATE_MATRIX_TOL = 1e-12


def _require_nondegenerate(dec: SpectralDecomposition, tol: float, allow: bool) -> None:
    report = check_degeneracy(dec, tol)
    if allow or report.nondegenerate:
        return
    if report.spectrum_degenerate:
        i, j, diff = report.spectrum_pairs[0]
        raise DegenerateGapError(
            f"spectrum degenerate: |E_{i + 1} - E_{j + 1}| = {diff:.3e} < {tol:.1e}"
        )
    (i, j), (k, l), diff = report.gap_pairs[0]
    raise DegenerateGapError(
        f"gaps degenerate: omega({i + 1},{j + 1}) and omega({k + 1},{l + 1}) differ by "
        f"{diff:.3e} < {tol:.1e}"
    )


def _check_bath(dec: SpectralDecomposition, elems: CouplingElements, baths: BathConfig) -> None:
    if elems.dimension != dec.dimension:
        raise ValidationError(
            f"coupling elements dimension {elems.dimension} != spectrum dimension {dec.dimension}"
        )
    if baths.n_sites != elems.n_sites:
        raise ValidationError(
            f"bath has {baths.n_sites} sites but coupling elements cover {elems.n_sites}"
        )
    if baths.axes != elems.axes:
        raise ValidationError("bath axes differ from the axes the coupling elements were built with")


@dataclass(frozen=True)
class JumpOperator:
    """Secular jump operator of one site at one positive transition frequency.

    `matrix` lives in the energy basis and lowers |j> to |i> for every stored
    (i, j) pair; with nondegenerate gaps there is exactly one pair.  `site`
    is the 1-based site label.
    """

    site: int
    omega: float
    matrix: np.ndarray
    pairs: tuple[tuple[int, int], ...]


def build_jump_operators(
    dec: SpectralDecomposition,
    elems: CouplingElements,
    *,
    tol: float = DEGENERACY_TOL,
    allow_degenerate_gaps: bool = False,
) -> list[JumpOperator]:
    """One jump operator per (site, positive gap) with a nonzero coupling element.

    Operators whose matrix would be all-zero are omitted.  With the explicit
    `allow_degenerate_gaps` override, elements whose gaps agree within `tol`
    are grouped into a single operator (the sum over equal-frequency terms);
    the override is outside the assumptions the acceptance suite covers.
    """
    _require_nondegenerate(dec, tol, allow_degenerate_gaps)
    d = dec.dimension
    ops: list[JumpOperator] = []
    for n, s in enumerate(elems.matrices, start=1):
        entries = [
            (float(dec.gap_table[i, j]), i, j)
            for i in range(d)
            for j in range(i + 1, d)
            if s[i, j] != 0
        ]
        entries.sort()
        groups: list[list[tuple[float, int, int]]] = []
        for entry in entries:
            if allow_degenerate_gaps and groups and entry[0] - groups[-1][0][0] < tol:
                groups[-1].append(entry)
            else:
                groups.append([entry])
        for group in groups:
            a = np.zeros((d, d), dtype=s.dtype)
            pairs = []
            for _, i, j in group:
                a[i, j] = s[i, j]
                pairs.append((i, j))
            ops.append(
                JumpOperator(site=n, omega=group[0][0], matrix=a, pairs=tuple(pairs))
            )
    return ops


@dataclass(frozen=True)
class RateMatrix:
    """Generator of the population dynamics in the energy-sorted basis.

    matrix[i, j] for i < j is the damping rate from |j> down into |i>;
    matrix[i, j] for i > j is the gain rate from |j> up into |i>; the
    diagonal holds the negative total outflow, so columns sum to zero.
    nonzero_mask marks the structurally nonzero entries (nonzero for every
    T > 0 given kappa and the coupling elements).
    """

    matrix: np.ndarray
    nonzero_mask: np.ndarray
    energies: np.ndarray
    temperature: float
    kappas: tuple[float, ...]
    axes: tuple[str, ...]
    chain: ChainSpec | None = None

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def validate(self, tol: float = RATE_MATRIX_TOL) -> None:
        """Check conservation, sign structure, and mask consistency."""
        m = self.matrix
        if np.max(np.abs(m.sum(axis=0))) >= tol:
            raise ValidationError("rate-matrix columns do not sum to zero within tolerance")
        off = ~np.eye(self.dimension, dtype=bool)
        if np.any(m[off] < 0):
            raise ValidationError("negative off-diagonal rate")
        if np.any(np.diagonal(m) > 0):
            raise ValidationError("positive diagonal entry")
        if np.any((m != 0) & ~self.nonzero_mask):
            raise ValidationError("nonzero rate outside the structural mask")


def build_rate_matrix(
    dec: SpectralDecomposition,
    elems: CouplingElements,
    baths: BathConfig,
    *,
    tol: float = DEGENERACY_TOL,
    allow_degenerate_gaps: bool = False,
    chain: ChainSpec | None = None,
) -> RateMatrix:
    """Assemble the golden-rule rate matrix for the configured baths.

    For every ordered level pair i < j with gap omega = E_j - E_i:

        damping  Lambda[i, j] = sum_n J^(n)(omega) (1 + nbar_omega) |S_ij^(n)|^2
        gain     Lambda[j, i] = sum_n J^(n)(omega)      nbar_omega  |S_ij^(n)|^2

    and the diagonal collects the negative outflow of each column, which for
    the ground and top states reduces to pure gain and pure damping.
    """
    _require_nondegenerate(dec, tol, allow_degenerate_gaps)
    _check_bath(dec, elems, baths)
    d = dec.dimension
    abs2 = np.stack([np.abs(s) ** 2 for s in elems.matrices])  # exact for diagonal chains
    temperature = baths.temperature

    matrix = np.zeros((d, d))
    for i in range(d):
        for j in range(i + 1, d):
            weights = abs2[:, i, j]
            if not weights.any():
                continue
            omega = float(dec.gap_table[i, j])
            nbar = bose_einstein(omega, temperature)
            j_omega = np.array(
                [spectral_density(baths, n, omega) for n in range(1, baths.n_sites + 1)]
            )
            coupled = float(j_omega @ weights)
            matrix[i, j] = coupled * (1.0 + nbar)
            matrix[j, i] = coupled * nbar
    for i in range(d):
        matrix[i, i] = -(matrix[:i, i].sum() + matrix[i + 1 :, i].sum())

    structural = (np.asarray(baths.kappas)[:, None, None] * abs2).sum(axis=0) > 0
    np.fill_diagonal(structural, False)
    mask = structural | np.diag(structural.any(axis=0))
    return RateMatrix(
        matrix=matrix,
        nonzero_mask=mask,
        energies=dec.energies.copy(),
        temperature=temperature,
        kappas=baths.kappas,
        axes=baths.axes,
        chain=chain,
    )


def connected_blocks_from_adjacency(adjacency: np.ndarray) -> tuple[tuple[int, ...], ...]:
    """Connected components of an undirected adjacency matrix, ordered by smallest member."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    off = np.asarray(adjacency, dtype=bool).copy()
    np.fill_diagonal(off, False)
    n_comp, labels = connected_components(csr_matrix(off), directed=False)
    blocks = [tuple(np.flatnonzero(labels == c).tolist()) for c in range(n_comp)]
    blocks.sort(key=lambda b: b[0])
    return tuple(blocks)


def structural_blocks(rates: RateMatrix) -> tuple[tuple[int, ...], ...]:
    """Connected components of the structural transition graph.

    Edges are undirected: (i, j) is linked iff either rate between the two
    states is structurally nonzero.  Blocks are ordered by smallest member.
    """
    return connected_blocks_from_adjacency(rates.nonzero_mask)


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Column-stack a density matrix (vec convention used by the superoperator)."""
    return np.asarray(rho).flatten(order="F")


def unvectorize(vec: np.ndarray, dimension: int) -> np.ndarray:
    """Inverse of `vectorize`."""
    return np.asarray(vec).reshape((dimension, dimension), order="F")


@dataclass(frozen=True)
class LindbladSuperoperator:
    """Full secular master-equation generator on column-stacked densities.

    Used as the oracle against the Pauli rate matrix: with a nondegenerate
    spectrum the population components evolve independently of coherences,
    and their generator block equals Lambda.
    """

    matrix: np.ndarray
    energies: np.ndarray
    temperature: float
    kappas: tuple[float, ...]
    population_indices: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        d = self.energies.size
        if self.matrix.shape != (d * d, d * d):
            raise ValidationError("superoperator shape does not match the spectrum dimension")
        object.__setattr__(self, "population_indices", np.arange(d) * (d + 1))

    @property
    def dimension(self) -> int:
        return self.energies.size

    def population_block(self) -> np.ndarray:
        """The generator restricted to population components (should equal Lambda)."""
        idx = self.population_indices
        return self.matrix[np.ix_(idx, idx)].real

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Right-hand side of the master equation for a density matrix."""
        return unvectorize(self.matrix @ vectorize(rho), self.dimension)


def build_lindblad_superoperator(
    dec: SpectralDecomposition,
    elems: CouplingElements,
    baths: BathConfig,
    *,
    tol: float = DEGENERACY_TOL,
    allow_degenerate_gaps: bool = False,
) -> LindbladSuperoperator:
    """Assemble -i[H, .] plus the dissipator from the secular jump operators.

    Every damping term carries J(omega)(1 + nbar) with the sandwich
    A rho A-dagger and its anticommutator, every gain term carries
    J(omega) nbar with the adjoint sandwich; vec convention is column
    stacking, vec(A rho B) = kron(B^T, A) vec(rho).
    """
    _check_bath(dec, elems, baths)
    ops = build_jump_operators(dec, elems, tol=tol, allow_degenerate_gaps=allow_degenerate_gaps)
    d = dec.dimension
    eye = np.eye(d)
    h = np.diag(dec.energies)
    super_matrix = -1j * (np.kron(eye, h) - np.kron(h.T, eye))

    for op in ops:
        a = op.matrix
        a_dag = a.conj().T
        j_omega = spectral_density(baths, op.site, op.omega)
        nbar = bose_einstein(op.omega, baths.temperature)

        down = a_dag @ a
        super_matrix = super_matrix + j_omega * (1.0 + nbar) * (
            np.kron(a.conj(), a) - 0.5 * (np.kron(eye, down) + np.kron(down.T, eye))
        )
        up = a @ a_dag
        super_matrix = super_matrix + j_omega * nbar * (
            np.kron(a.T, a_dag) - 0.5 * (np.kron(eye, up) + np.kron(up.T, eye))
        )

    return LindbladSuperoperator(
        matrix=super_matrix,
        energies=dec.energies.copy(),
        temperature=baths.temperature,
        kappas=baths.kappas,
    )
