"""Cyclic Jacobi eigenvalues for complex Hermitian matrices."""
from __future__ import annotations

import numpy as np

MAX_SWEEPS = 100


def jacobi_eigenvalues(A, tol: float | None = None, max_sweeps: int = MAX_SWEEPS) -> np.ndarray:
    """Eigenvalues (ascending) of the Hermitian matrix ``A``.

    Each rotation first removes the phase of the pivot ``A[p, q]`` with a
    diagonal unitary, then applies the real symmetric Jacobi rotation.
    Sweeps stop once the off-diagonal Frobenius norm drops below ``tol``
    (default ``1e-12 * dim``).
    """
    A = np.array(A, dtype=complex, copy=True)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"square matrix required, got shape {A.shape}")
    if n == 0:
        return np.zeros(0)
    if tol is None:
        tol = 1e-12 * n
    A = 0.5 * (A + A.conj().T)
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(np.abs(A) ** 2) - np.sum(np.abs(np.diag(A)) ** 2), 0.0))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                phase = apq / mag
                app, aqq = A[p, p].real, A[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # U restricted to (p, q) is diag(1, conj(phase)) @ [[c, s], [-s, c]]
                u = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                cols = A[:, [p, q]] @ u
                A[:, p], A[:, q] = cols[:, 0], cols[:, 1]
                rows = u.conj().T @ A[[p, q], :]
                A[p, :], A[q, :] = rows[0], rows[1]
                A[p, q] = A[q, p] = 0.0
    else:
        raise RuntimeError(f"Jacobi did not converge in {max_sweeps} sweeps")
    return np.sort(np.diag(A).real)
