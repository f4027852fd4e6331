"""Dense multi-qubit operator utilities sized for small registers (N <= 8).

Conventions fixed here and used everywhere else:

- Computational basis index = big-endian bit string, site 0 is the most
  significant bit.
- Bit value 1 denotes the Z-eigenvalue -1 state. The charge Q = sum_i Z_i
  then has eigenvalue 2q - N on a string with q zero-bits; `network` sorts
  the basis by that q.
- Transfer matrices are real 4x4 in the Pauli basis (1, X, Y, Z) with
  entries L[i, j] = tr(sigma_i L(sigma_j)) / 2.

Everything is a pure function on immutable arrays; dimensions stay <= 256
so dense eigendecomposition is exact to roundoff and nothing needs sparsity.
"""

from __future__ import annotations

import numpy as np

SI = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

_PAULI = {"0": SI, "x": SX, "y": SY, "z": SZ}
PAULI_AXES = ("0", "x", "y", "z")

HERM_TOL = 1e-10


def pauli(axis: str) -> np.ndarray:
    """Single-qubit Pauli matrix for axis in {'0','x','y','z'}."""
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def kron_all(ops) -> np.ndarray:
    """Tensor product of a sequence of matrices, first factor most significant."""
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def embed(op: np.ndarray, site: int, n: int) -> np.ndarray:
    """Embed a single-qubit operator at `site` in an n-qubit register."""
    if not 0 <= site < n:
        raise ValueError(f"site {site} out of range for n={n}")
    return kron_all(op if k == site else SI for k in range(n))


def density_of(sites) -> np.ndarray:
    """Product density matrix from per-site Bloch vectors (x, y, z).

    Each factor is (1 + x X + y Y + z Z)/2; Bloch norms above 1 are refused
    since they do not describe states.
    """
    factors = []
    for v in sites:
        x, y, z = (float(c) for c in v)
        if x * x + y * y + z * z > 1.0 + 1e-12:
            raise ValueError(f"Bloch vector {(x, y, z)} has norm > 1")
        factors.append(0.5 * (SI + x * SX + y * SY + z * SZ))
    return kron_all(factors)


def diagonal_state(z_list) -> np.ndarray:
    """Product density matrix with Bloch vectors (0, 0, z_i)."""
    return density_of([(0.0, 0.0, z) for z in z_list])


def partial_trace_keep(rho: np.ndarray, site: int) -> np.ndarray:
    """Trace out every qubit except `site`, returning its 2x2 state."""
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    if rho.shape != (dim, dim) or 2**n != dim:
        raise ValueError("density matrix dimension is not a power of 2")
    if not 0 <= site < n:
        raise ValueError(f"site {site} out of range for n={n}")
    # Reshape to one axis per ket/bra qubit, then contract all pairs but `site`.
    t = rho.reshape((2,) * (2 * n))
    for k in range(n - 1, -1, -1):
        if k == site:
            continue
        # Current tensor has one ket axis per remaining qubit, then bra axes.
        t = np.trace(t, axis1=k, axis2=k + (t.ndim // 2))
    return t


class HermitianEvolver:
    """Unitary evolution generated by a fixed Hermitian matrix.

    Diagonalizes once, then serves e^{-iHt} for any t. This keeps a whole
    time grid at one eigendecomposition instead of one expm per point.
    """

    def __init__(self, h: np.ndarray):
        h = np.asarray(h, dtype=complex)
        if np.max(np.abs(h - h.conj().T)) > HERM_TOL:
            raise ValueError("generator is not Hermitian")
        self.energies, self.modes = np.linalg.eigh(h)

    def unitary(self, t: float) -> np.ndarray:
        phases = np.exp(-1j * self.energies * t)
        return (self.modes * phases) @ self.modes.conj().T

    def evolve(self, t: float, rho: np.ndarray) -> np.ndarray:
        u = self.unitary(t)
        return u @ rho @ u.conj().T


def evolve(h: np.ndarray, t: float, rho: np.ndarray) -> np.ndarray:
    """One-shot e^{-iHt} rho e^{+iHt}; use HermitianEvolver for time grids."""
    return HermitianEvolver(h).evolve(t, rho)


def transfer_of_map(apply_map) -> np.ndarray:
    """Pauli transfer matrix of a linear qubit map given as a callable.

    apply_map takes and returns 2x2 complex arrays. The map must be
    Hermiticity-preserving, so the transfer matrix is real; imaginary
    residue beyond 1e-10 is an error, not something to discard silently.
    """
    m = np.empty((4, 4), dtype=complex)
    for j, aj in enumerate(PAULI_AXES):
        out = apply_map(_PAULI[aj])
        for i, ai in enumerate(PAULI_AXES):
            m[i, j] = 0.5 * np.trace(_PAULI[ai] @ out)
    if np.max(np.abs(m.imag)) > HERM_TOL:
        raise ValueError("map is not Hermiticity-preserving (complex transfer entries)")
    return m.real.copy()
