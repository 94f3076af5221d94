"""Spin-chain Hamiltonians, exact diagonalization, and model sanity checks.

Conventions (fixed throughout the package):

* Units: hbar = k_B = 1, energies in units of the first field h_1, time in
  hbar/h_1, temperature in h_1/k_B.
* Computational basis: index i in [0, 2^N) is read as a bitstring with site 1
  as the most significant bit; bit 0 means spin up (sigma_z = +1), bit 1 means
  spin down (sigma_z = -1).  For N = 2 the order is uu, ud, du, dd.
* Chain Hamiltonians are all z-type,

      H = sum_n h_n sigma_z^(n)  -  sum_(a<b) Delta_ab sigma_z^(a) sigma_z^(b),

  hence diagonal in the computational basis.  The decomposition path still
  accepts a general Hermitian matrix so transverse-field extensions reuse it.
* Eigenvalues are sorted ascending; ties are broken by computational-basis
  index, so for diagonal input the eigenvector matrix is a permutation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, SpecificationError, ValidationError

# Dense-matrix scale limits.  Frustration checks only need the 2^N energy
# vector and go further than the d x d matrix builders.
MAX_DENSE_SITES = 12
MAX_ENUMERATION_SITES = 20

HERMITICITY_TOL = 1e-12
DEGENERACY_TOL = 1e-9

_PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]]),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]]),
}


def pauli_matrix(axis: str) -> np.ndarray:
    """Return the 2x2 Pauli matrix for axis 'x', 'y' or 'z' (copy)."""
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValidationError(f"unknown Pauli axis {axis!r}, expected 'x', 'y' or 'z'") from None


def local_operator(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Embed a single-spin operator at 1-based `site` into the N-spin space.

    Site 1 is the leftmost Kronecker factor (most significant bit).
    """
    if not 1 <= site <= n_sites:
        raise SpecificationError(f"site {site} out of range 1..{n_sites}")
    out = np.array([[1.0]])
    eye = np.eye(2)
    for n in range(1, n_sites + 1):
        out = np.kron(out, op if n == site else eye)
    return out


@dataclass(frozen=True)
class ChainSpec:
    """Parameters of a z-type Ising chain.

    fields[n-1] is the longitudinal field h_n on site n; couplings are
    (a, b, Delta_ab) triples with 1 <= a < b <= N, entering the Hamiltonian
    as -Delta_ab sigma_z^(a) sigma_z^(b).
    """

    n_sites: int
    fields: tuple[float, ...]
    couplings: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        if self.n_sites < 1:
            raise SpecificationError(f"n_sites must be >= 1, got {self.n_sites}")
        object.__setattr__(self, "fields", tuple(float(h) for h in self.fields))
        if len(self.fields) != self.n_sites:
            raise SpecificationError(
                f"expected {self.n_sites} fields, got {len(self.fields)}"
            )
        seen = set()
        norm = []
        for a, b, delta in self.couplings:
            a, b = int(a), int(b)
            if not (1 <= a < b <= self.n_sites):
                raise SpecificationError(
                    f"coupling sites ({a},{b}) must satisfy 1 <= a < b <= {self.n_sites}"
                )
            if (a, b) in seen:
                raise SpecificationError(f"duplicate coupling for sites ({a},{b})")
            seen.add((a, b))
            norm.append((a, b, float(delta)))
        object.__setattr__(self, "couplings", tuple(norm))

    @property
    def dimension(self) -> int:
        return 2 ** self.n_sites


def diagonal_energies(spec: ChainSpec) -> np.ndarray:
    """Classical energies of all 2^N configurations, in computational-basis order."""
    if spec.n_sites > MAX_ENUMERATION_SITES:
        raise CapacityError(
            f"exhaustive enumeration limited to N <= {MAX_ENUMERATION_SITES}, got N = {spec.n_sites}"
        )
    n = spec.n_sites
    idx = np.arange(spec.dimension, dtype=np.int64)
    # sigma_z value of site m (1-based) on every configuration: +1 for bit 0, -1 for bit 1
    s = 1 - 2 * ((idx[:, None] >> (n - np.arange(1, n + 1))[None, :]) & 1)
    energies = s @ np.asarray(spec.fields)
    for a, b, delta in spec.couplings:
        energies = energies - delta * (s[:, a - 1] * s[:, b - 1])
    return energies.astype(np.float64)


def build_hamiltonian(spec: ChainSpec) -> np.ndarray:
    """Dense Hamiltonian of `spec` in the computational basis (diagonal, real)."""
    if spec.n_sites > MAX_DENSE_SITES:
        raise CapacityError(
            f"dense Hamiltonian limited to N <= {MAX_DENSE_SITES}, got N = {spec.n_sites}"
        )
    return np.diag(diagonal_energies(spec))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Sorted eigensystem of a Hermitian matrix.

    energies are ascending; column j of `vectors` is the eigenstate |j> in
    the computational basis; gap_table[i, j] = E_j - E_i.
    """

    energies: np.ndarray
    vectors: np.ndarray
    gap_table: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=np.float64)
        v = np.asarray(self.vectors)
        if e.ndim != 1 or v.shape != (e.size, e.size):
            raise ValidationError("energies/eigenvector shapes are inconsistent")
        if np.any(np.diff(e) < 0):
            raise ValidationError("energies must be sorted ascending")
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "gap_table", e[None, :] - e[:, None])

    @property
    def dimension(self) -> int:
        return self.energies.size

    def validate(self, tol: float = 1e-10) -> None:
        """Check unitarity and reconstruction of the stored eigensystem."""
        u = self.vectors
        d = self.dimension
        if np.max(np.abs(u.conj().T @ u - np.eye(d))) >= tol:
            raise ValidationError("eigenvector matrix is not unitary within tolerance")
        h = (u * self.energies) @ u.conj().T
        if np.max(np.abs(h - h.conj().T)) >= tol:
            raise ValidationError("reconstructed matrix is not Hermitian within tolerance")


def spectral_decomposition(hamiltonian: np.ndarray) -> SpectralDecomposition:
    """Diagonalize a Hermitian matrix into a sorted SpectralDecomposition.

    Exactly diagonal input takes a permutation fast path (stable sort, ties
    broken by computational-basis index) so that eigenvectors, and therefore
    coupling matrix elements downstream, carry no roundoff.
    """
    h = np.asarray(hamiltonian)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {h.shape}")
    if np.max(np.abs(h - h.conj().T)) > HERMITICITY_TOL:
        raise ValidationError("matrix is not Hermitian within 1e-12")
    diag = np.diagonal(h)
    if np.count_nonzero(h - np.diag(diag)) == 0:
        energies = diag.real.astype(np.float64)
        order = np.argsort(energies, kind="stable")
        vectors = np.eye(h.shape[0])[:, order]
        return SpectralDecomposition(energies=energies[order], vectors=vectors)
    energies, vectors = np.linalg.eigh(h)
    return SpectralDecomposition(energies=energies, vectors=vectors)


@dataclass(frozen=True)
class DegeneracyReport:
    """Outcome of the nondegeneracy checks behind the secular rate construction.

    spectrum_pairs lists (i, j, |E_i - E_j|) for offending level pairs;
    gap_pairs lists ((i, j), (k, l), difference) for colliding transition
    frequencies.  Indices are 0-based eigenstate labels.
    """

    spectrum_degenerate: bool
    gaps_degenerate: bool
    spectrum_pairs: tuple[tuple[int, int, float], ...]
    gap_pairs: tuple[tuple[tuple[int, int], tuple[int, int], float], ...]
    tolerance: float

    @property
    def nondegenerate(self) -> bool:
        return not (self.spectrum_degenerate or self.gaps_degenerate)


def check_degeneracy(dec: SpectralDecomposition, tol: float = DEGENERACY_TOL) -> DegeneracyReport:
    """Flag near-coincident eigenvalues and near-coincident transition gaps.

    The spectrum is degenerate if any two eigenvalues lie within `tol`; the
    gap table is degenerate if any gap is below `tol` or two gaps belonging
    to distinct state pairs agree within `tol`.
    """
    if tol <= 0:
        raise ValidationError(f"tolerance must be positive, got {tol}")
    e = dec.energies
    d = dec.dimension

    spectrum_pairs = [
        (i, i + 1, float(e[i + 1] - e[i])) for i in range(d - 1) if e[i + 1] - e[i] < tol
    ]

    gaps = [(float(e[j] - e[i]), i, j) for i in range(d) for j in range(i + 1, d)]
    gaps.sort()
    gap_pairs = []
    for k in range(len(gaps) - 1):
        w0, i0, j0 = gaps[k]
        w1, i1, j1 = gaps[k + 1]
        if w1 - w0 < tol:
            gap_pairs.append(((i0, j0), (i1, j1), float(w1 - w0)))
    tiny = [((i, j), (i, j), w) for w, i, j in gaps if w < tol]

    return DegeneracyReport(
        spectrum_degenerate=bool(spectrum_pairs),
        gaps_degenerate=bool(gap_pairs or tiny),
        spectrum_pairs=tuple(spectrum_pairs),
        gap_pairs=tuple(tiny + gap_pairs),
        tolerance=float(tol),
    )


def check_frustration(spec: ChainSpec) -> bool:
    """True if the chain is unfrustrated.

    Compares the sum of the per-term minima (each field and coupling term
    minimized independently) to the true ground-state energy, by exhaustive
    enumeration over all 2^N configurations.
    """
    energies = diagonal_energies(spec)  # raises CapacityError beyond enumeration scale
    term_min = -sum(abs(h) for h in spec.fields)
    term_min -= sum(abs(delta) for _, _, delta in spec.couplings)
    return bool(abs(term_min - float(energies.min())) <= 1e-12)
