"""Free-fermion solution of the rotated inhomogeneous chain.

The rotated spin Hamiltonian

    H = -sum_j Omega(j) s^z_j - sum_j J(j) s^y_j s^y_{j+1}

maps under a Jordan-Wigner transformation to a quadratic fermion form
with a hopping matrix ``A`` and a pairing matrix ``B``.  The string
operator turns the bond that closes the ring into a boundary term whose
sign depends on the fermion-parity sector: in the even sector the
boundary bond is sign-flipped (antiperiodic fermions), in the odd sector
it is untouched (periodic fermions).

Normalization: ``A`` and ``B`` carry half the bond strength each, with
the local fields ``Omega`` on the diagonal of ``A``.  The physical
single-quasiparticle energies are then *twice* the singular values of
``A + B``; at ``J = 0`` flipping one spin against its field costs
``2 Omega(j)``, and the chain ground energy is ``-sum_j Omega(j)``.

The spectrum is obtained from an SVD of ``A + B`` rather than from the
squared eigenproblem, which keeps small quasiparticle energies accurate
and makes the mode pairs ``(Phi_k, Psi_k)`` consistent by construction:

    Phi_k (A + B) = (Lambda_k / 2) Psi_k
    Psi_k (A - B) = (Lambda_k / 2) Phi_k

(``A - B`` is the transpose of ``A + B``, so the left-singular vectors
of ``A + B`` are the ``Phi_k`` and the right-singular vectors the
``Psi_k``.)  The orientation of the pair is not a matter of taste: the
string-correlator determinants downstream are only valid for this one,
and it was pinned by checking them against brute-force diagonalization.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Sector",
    "SolverError",
    "QuadraticForm",
    "QuasiparticleSolution",
    "build_quadratic_form",
    "quasiparticle_energies",
    "solve_quasiparticles",
    "sector_energy",
    "ground_sector",
]

_SIGN_EPS = 1e-12


class SolverError(RuntimeError):
    """Raised when the underlying factorization fails or loses consistency."""


class Sector(enum.Enum):
    EVEN = "even"
    ODD = "odd"


@dataclass(frozen=True)
class QuadraticForm:
    """Hopping (``A``, symmetric) and pairing (``B``, antisymmetric) matrices."""

    A: np.ndarray
    B: np.ndarray
    sector: Sector

    def __post_init__(self) -> None:
        A = np.ascontiguousarray(self.A, dtype=float)
        B = np.ascontiguousarray(self.B, dtype=float)
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape != B.shape:
            raise ValueError("A and B must be square matrices of equal shape")

    @property
    def N(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class QuasiparticleSolution:
    """Diagonalized quadratic form.

    Attributes
    ----------
    energies : np.ndarray
        Physical quasiparticle energies ``Lambda_k``, ascending and >= 0.
    Phi, Psi : np.ndarray
        Mode matrices with orthonormal rows, coupled through the quadratic
        form as in the module docstring (with ``Lambda_k / 2`` because of
        the halved normalization of ``A`` and ``B``).
    sector : Sector
    ground_energy_chain : float
        Chain part of the ground energy in this sector's vacuum,
        ``-(1/2) sum_k Lambda_k``, before any parity bookkeeping.
    vacuum_parity : int
        Fermion parity of the vacuum of this quadratic form: the sign of
        ``det(A + B)`` (+1 even, -1 odd, 0 when an exact zero mode makes
        the parity indeterminate).
    """

    energies: np.ndarray
    Phi: np.ndarray
    Psi: np.ndarray
    sector: Sector
    ground_energy_chain: float
    vacuum_parity: int

    @property
    def N(self) -> int:
        return self.energies.shape[0]


def build_quadratic_form(field, bonds, sector: Sector = Sector.EVEN) -> QuadraticForm:
    """Assemble ``A`` and ``B`` for the given effective field and bond pattern.

    ``bonds[j]`` couples sites ``j`` and ``(j+1) % N``.  The bond that
    wraps the ring (``j = N-1``) enters with an extra minus sign in the
    even sector.  For ``N = 2`` both bonds act on the same pair of sites
    and their contributions accumulate.
    """
    N = field.N
    bonds = np.asarray(bonds, dtype=float)
    if bonds.shape != (N,):
        raise ValueError(f"expected {N} bond strengths, got shape {bonds.shape}")
    A = np.diag(field.Omega).copy()
    B = np.zeros((N, N))
    if N >= 2:
        for j in range(N):
            k = (j + 1) % N
            half = 0.5 * bonds[j]
            if k < j:  # the wrapping bond picks up the sector sign
                half = -half if sector is Sector.EVEN else half
            A[j, k] -= half
            A[k, j] -= half
            B[j, k] += half
            B[k, j] -= half
    return QuadraticForm(A=A, B=B, sector=sector)


def quasiparticle_energies(form: QuadraticForm) -> np.ndarray:
    """Physical spectrum ``Lambda_k`` (ascending) without the mode matrices.

    This is the fast path for energy-only work: a singular-value
    computation of ``A + B``, skipping the singular vectors.
    """
    try:
        s = np.linalg.svd(form.A + form.B, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise SolverError("singular value computation failed") from exc
    return 2.0 * s[::-1]


def _fix_sign(row: np.ndarray, partner: np.ndarray | None = None) -> None:
    idx = np.flatnonzero(np.abs(row) > _SIGN_EPS)
    i = idx[0] if idx.size else int(np.argmax(np.abs(row)))
    if row[i] < 0:
        row *= -1.0
        if partner is not None:
            partner *= -1.0


def solve_quasiparticles(form: QuadraticForm) -> QuasiparticleSolution:
    """Full diagonalization: spectrum plus the ``Phi``/``Psi`` mode matrices.

    Mode signs are fixed deterministically: the first non-negligible
    entry of each ``Phi_k`` is made positive, flipping ``Psi_k`` along
    with it so the coupled relations survive.  For (numerically) zero
    modes the relations no longer tie the pair together, so ``Psi_k``
    gets the same rule applied independently.
    """
    T = form.A + form.B
    try:
        U, s, Vh = np.linalg.svd(T)
    except np.linalg.LinAlgError as exc:
        raise SolverError("singular value decomposition failed") from exc
    Phi = np.ascontiguousarray(U.T[::-1])
    Psi = np.ascontiguousarray(Vh[::-1])
    s = s[::-1].copy()

    # independent sign fixing of a Phi/Psi pair is only safe when the
    # singular value is negligible: for any larger s it would desync the
    # pairing by 2s and fail the residual check below
    scale = np.linalg.norm(form.A, 2)
    zero_tol = 1e-12 * max(scale, 1.0)
    for k in range(form.N):
        if s[k] > zero_tol:
            _fix_sign(Phi[k], Psi[k])
        else:
            _fix_sign(Phi[k])
            _fix_sign(Psi[k])

    resid = max(
        np.max(np.abs(Phi @ T - s[:, None] * Psi)),
        np.max(np.abs(Psi @ T.T - s[:, None] * Phi)),
    )
    ortho = max(
        np.max(np.abs(Phi @ Phi.T - np.eye(form.N))),
        np.max(np.abs(Psi @ Psi.T - np.eye(form.N))),
    )
    if resid > 1e-9 * max(scale, 1.0) or ortho > 1e-10:
        raise SolverError(
            f"decomposition lost consistency (residual {resid:.3e}, orthogonality {ortho:.3e})"
        )

    # an exact zero mode makes det(T) fp dust of arbitrary sign; report 0
    parity = 0
    if s[0] > zero_tol:
        sign, _ = np.linalg.slogdet(T)
        parity = int(sign)
    Phi.setflags(write=False)
    Psi.setflags(write=False)
    energies = 2.0 * s
    energies.setflags(write=False)
    return QuasiparticleSolution(
        energies=energies,
        Phi=Phi,
        Psi=Psi,
        sector=form.sector,
        ground_energy_chain=-float(np.sum(s)),
        vacuum_parity=parity,
    )


def sector_energy(sol: QuasiparticleSolution) -> float:
    """Ground energy of the chain restricted to the solution's parity sector.

    The bare vacuum of the quadratic form may carry the wrong fermion
    parity for its sector; the lowest admissible state then holds one
    quasiparticle, costing ``Lambda_min`` on top of the vacuum energy.
    A vacuum parity of 0 (exact zero mode) means both parities are
    degenerate and no correction applies.
    """
    want = +1 if sol.sector is Sector.EVEN else -1
    energy = sol.ground_energy_chain
    if sol.vacuum_parity != 0 and sol.vacuum_parity != want:
        energy += float(sol.energies[0])
    return energy


def ground_sector(field, bonds, both_sectors: bool = False) -> QuasiparticleSolution:
    """Solve the even sector, or both, and return the winning solution.

    With ``Omega > 0`` and ``J >= 0`` the global ground state is always
    found in the even sector (its vacuum parity is even for any such
    chain), so the default skips the odd solve entirely.  Pass
    ``both_sectors=True`` to compare the parity-corrected energies and
    return whichever sector wins; ties go to even.
    """
    even = solve_quasiparticles(build_quadratic_form(field, bonds, Sector.EVEN))
    if not both_sectors:
        return even
    odd = solve_quasiparticles(build_quadratic_form(field, bonds, Sector.ODD))
    return even if sector_energy(even) <= sector_energy(odd) + 1e-12 else odd
