"""Finite-dimensional Hodge theory for metric complexes.

Provides per-degree Laplacians, harmonic subspaces, induced metrics on
cohomology, and the eigenvalue route to the degree-zero torsion:

    (1/2) sum_q (-1)^q q log det' Delta_q

with det' the product of nonzero eigenvalues.  This is the closed-form
cross-check for the quadrature-based torsion form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import CircleBase
from .complexes import MetricComplex, RANK_THRESHOLD

__all__ = [
    "HodgeData",
    "hodge_decompose",
    "cohomology_class_basis",
    "harmonic_representatives",
    "induced_gram",
    "scalar_torsion_eigen",
    "chi_primes",
    "IllConditionedError",
]


class IllConditionedError(RuntimeError):
    """Kernel dimension of a Laplacian could not be resolved cleanly."""


def _require_point_base(E: MetricComplex):
    if isinstance(E.base, CircleBase):
        raise ValueError("Hodge decomposition is implemented for point-base complexes")


def _cholesky_frames(E: MetricComplex):
    """Cholesky factors L_q of the metrics; y = L^H x are orthonormal coords."""
    frames = []
    for hq in E.h:
        if hq.shape[0] == 0:
            frames.append(np.zeros((0, 0), dtype=complex))
            continue
        frames.append(np.linalg.cholesky(hq))
    return frames


def orthonormalized_differentials(E: MetricComplex):
    """The differential in metric-orthonormal coordinates per degree."""
    frames = _cholesky_frames(E)
    out = []
    for q, vq in enumerate(E.v):
        if min(vq.shape) == 0:
            out.append(vq.copy())
            continue
        # y_{q+1} = L_{q+1}^H v (L_q^H)^{-1} y_q
        out.append(frames[q + 1].conj().T @ vq @ np.linalg.inv(frames[q].conj().T))
    return out, frames


@dataclass
class HodgeData:
    laplacians: list
    eigenvalues: list
    betti: tuple
    harmonics: list      # h-orthonormal harmonic bases, original coordinates
    frames: list         # Cholesky factors of the metrics


def hodge_decompose(E: MetricComplex) -> HodgeData:
    """Eigendecompose the per-degree Laplacians and split off the kernels."""
    _require_point_base(E)
    betti = E.betti()
    vt, frames = orthonormalized_differentials(E)
    laplacians, eigenvalues, harmonics = [], [], []
    for q, d in enumerate(E.dims):
        lap = np.zeros((d, d), dtype=complex)
        if q < len(vt) and min(vt[q].shape) > 0:
            lap += vt[q].conj().T @ vt[q]
        if q > 0 and min(vt[q - 1].shape) > 0:
            lap += vt[q - 1] @ vt[q - 1].conj().T
        laplacians.append(lap)
        if d == 0:
            eigenvalues.append(np.zeros(0))
            harmonics.append(np.zeros((0, 0), dtype=complex))
            continue
        w, u = np.linalg.eigh(lap)
        w = np.clip(w, 0.0, None)
        eigenvalues.append(w)
        tol = RANK_THRESHOLD * max(w[-1] if len(w) else 0.0, 1.0)
        kernel_dim = int(np.sum(w < tol))
        if kernel_dim != betti[q]:
            gap = (w[kernel_dim - 1] if kernel_dim else 0.0,
                   w[kernel_dim] if kernel_dim < len(w) else np.inf)
            raise IllConditionedError(
                f"degree {q}: spectral kernel dim {kernel_dim} != rank-based "
                f"cohomology dim {betti[q]} (eigenvalue gap {gap})")
        # back to original coordinates: x = (L^H)^{-1} y
        basis = np.linalg.solve(frames[q].conj().T, u[:, :kernel_dim]) if kernel_dim else \
            np.zeros((d, 0), dtype=complex)
        harmonics.append(basis)
    return HodgeData(laplacians, eigenvalues, betti, harmonics, frames)


def _null_space(m: np.ndarray, scale: float):
    if min(m.shape) == 0:
        return np.eye(m.shape[1], dtype=complex)
    u, s, vh = np.linalg.svd(m)
    rank = int(np.sum(s > RANK_THRESHOLD * max(scale, 1.0)))
    return vh[rank:].conj().T


def _column_space(m: np.ndarray, scale: float):
    if min(m.shape) == 0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    u, s, vh = np.linalg.svd(m)
    rank = int(np.sum(s > RANK_THRESHOLD * max(scale, 1.0)))
    return u[:, :rank]


def cohomology_class_basis(E: MetricComplex):
    """Metric-independent cocycle representatives of a cohomology basis.

    Computed from the differential alone (standard inner product), so
    the same class basis can be reused under different metrics.
    """
    scale = max([np.linalg.norm(vq) for vq in E.v], default=1.0)
    out = []
    for q, d in enumerate(E.dims):
        if d == 0:
            out.append(np.zeros((0, 0), dtype=complex))
            continue
        vq = E.v[q] if q < len(E.v) else np.zeros((0, d), dtype=complex)
        kernel = _null_space(vq, scale)
        image = _column_space(E.v[q - 1], scale) if q > 0 else np.zeros((d, 0), dtype=complex)
        # part of the kernel transverse to the image
        proj = kernel - image @ (image.conj().T @ kernel)
        out.append(_column_space(proj, 1.0))
    return out


def harmonic_representatives(E: MetricComplex, class_basis=None):
    """h-harmonic representatives of the given cocycle classes, per degree."""
    _require_point_base(E)
    if class_basis is None:
        class_basis = cohomology_class_basis(E)
    frames = _cholesky_frames(E)
    scale = max([np.linalg.norm(vq) for vq in E.v], default=1.0)
    out = []
    for q, z in enumerate(class_basis):
        if z.shape[1] == 0 or q == 0 or min(E.v[q - 1].shape) == 0:
            out.append(z.copy())
            continue
        # work with the thresholded image so that a numerically negligible
        # differential cannot leak spurious directions into the projection
        lift = _column_space(E.v[q - 1], scale)
        if lift.shape[1] == 0:
            out.append(z.copy())
            continue
        a, *_ = np.linalg.lstsq(frames[q].conj().T @ lift, frames[q].conj().T @ z, rcond=None)
        out.append(z - lift @ a)
    return out


def induced_gram(E: MetricComplex, class_basis=None):
    """Gram matrices of the metric induced on cohomology by harmonic theory."""
    reps = harmonic_representatives(E, class_basis)
    return [r.conj().T @ hq @ r for r, hq in zip(reps, E.h)]


def scalar_torsion_eigen(E: MetricComplex) -> float:
    """Degree-zero torsion from Laplacian eigenvalues (closed-form route)."""
    data = hodge_decompose(E)
    total = 0.0
    for q, w in enumerate(data.eigenvalues):
        if len(w) == 0:
            continue
        tol = RANK_THRESHOLD * max(w[-1], 1.0)
        nonzero = w[w >= tol]
        g = E.grading_offset + q
        if len(nonzero):
            total += 0.5 * ((-1.0) ** g) * g * float(np.sum(np.log(nonzero)))
    return total


def chi_primes(E: MetricComplex):
    """Alternating sums over ranks: (chi, chi', d(E), d(H(E)))."""
    betti = E.betti()
    gs = [E.grading_offset + i for i in range(len(E.dims))]
    chi = sum(((-1) ** g) * b for g, b in zip(gs, betti))
    chi_prime = sum(((-1) ** g) * g * b for g, b in zip(gs, betti))
    d_E = sum(((-1) ** g) * g * d for g, d in zip(gs, E.dims))
    return chi, chi_prime, d_E, chi_prime
