"""Brute-force time evolution: master-equation and unitary segments.

This module is the numerical oracle against which every closed form in
the package is checked, so it stays deliberately simple: fixed-step RK4
on the vectorized generator, or the exact matrix exponential through an
eigendecomposition when the superoperator is small and well conditioned.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .liouvillian import SuperOperator
from .tensor import (
    DensityMatrix,
    Ket,
    Operator,
    SpaceSignature,
    annihilation_op,
    atom_ops,
    number_op,
)

# eigendecomposition of the full superoperator is only worth it at desk scale
_EXPM_MAX_DIM = 2048
_EXPM_COND_LIMIT = 1e8
_RK4_LOCAL_ERR_LIMIT = 1e-6


@dataclass(frozen=True)
class EvolutionSpec:
    """Duration, step size ('auto' or seconds) and integration method."""

    duration: float
    step: object = "auto"
    method: str = "expm"

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("duration must be non-negative")
        if self.step != "auto" and float(self.step) <= 0:
            raise ValueError("explicit step must be positive")
        if self.method not in ("expm", "rk4"):
            raise ValueError(f"unknown method {self.method!r}")


def _auto_step(L: SuperOperator, duration: float) -> float:
    # the diagonal of the generator bounds the fastest rate from above;
    # 5e-3/rate keeps the RK4 global error orders below the 1e-6 tolerances
    diag = np.abs(L.matrix.diagonal())
    rate = max(float(diag.max()) if diag.size else 0.0, 1.0 / max(duration, 1e-300))
    return min(5e-3 / rate, duration / 100.0)


def _rk4(Lmat, v: np.ndarray, duration: float, step: float, check_step: bool) -> np.ndarray:
    n_steps = max(1, ceil(duration / step))
    h = duration / n_steps

    def deriv(y):
        return Lmat @ y

    def rk4_step(y, hh):
        k1 = deriv(y)
        k2 = deriv(y + 0.5 * hh * k1)
        k3 = deriv(y + 0.5 * hh * k2)
        k4 = deriv(y + hh * k3)
        return y + (hh / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    if check_step:
        # compare one full step against two half steps at t = 0
        full = rk4_step(v, h)
        half = rk4_step(rk4_step(v, h / 2), h / 2)
        err = float(np.abs(full - half).max()) / max(float(np.abs(v).max()), 1e-300)
        if err > _RK4_LOCAL_ERR_LIMIT:
            suggested = h * (_RK4_LOCAL_ERR_LIMIT / err) ** 0.2
            raise ValueError(
                f"step {h:.3e} gives RK4 local error estimate {err:.3e} > "
                f"{_RK4_LOCAL_ERR_LIMIT}; retry with step <= {suggested:.3e}"
            )

    y = v
    for _ in range(n_steps):
        y = rk4_step(y, h)
    return y


def _expm_apply(L: SuperOperator, v: np.ndarray, t: float):
    """exp(L t) v via eigendecomposition; None when conditioning forbids it."""
    if L.space.dim**2 > _EXPM_MAX_DIM:
        return None
    Ld = L.todense()
    w, V = np.linalg.eig(Ld)
    if np.linalg.cond(V) > _EXPM_COND_LIMIT:
        return None
    return V @ (np.exp(w * t) * np.linalg.solve(V, v))


def evolve_master(rho0: DensityMatrix, L: SuperOperator, spec: EvolutionSpec) -> DensityMatrix:
    """Integrate d(rho)/dt = L rho for spec.duration."""
    if rho0.space != L.space:
        raise ValueError("space mismatch between state and superoperator")
    if spec.duration == 0:
        return rho0
    v0 = rho0.matrix.reshape(-1)
    v = None
    if spec.method == "expm":
        v = _expm_apply(L, v0, spec.duration)
    if v is None:  # rk4 requested, or expm fallback
        step = _auto_step(L, spec.duration) if spec.step == "auto" else float(spec.step)
        v = _rk4(L.matrix, v0, spec.duration, step, check_step=spec.step != "auto")
    D = L.space.dim
    return DensityMatrix(v.reshape(D, D), rho0.space)


def unitary_propagator(H: Operator, duration: float) -> np.ndarray:
    """exp(-i H t) through the eigendecomposition of a Hermitian H."""
    Hm = H.matrix
    herm_dev = float(np.abs(Hm - Hm.conj().T).max())
    if herm_dev > 1e-10 * max(float(np.abs(Hm).max()), 1.0):
        raise ValueError(f"Hamiltonian is not Hermitian (deviation {herm_dev:.3e})")
    w, V = np.linalg.eigh(Hm)
    return (V * np.exp(-1j * w * duration)) @ V.conj().T


def evolve_unitary(psi0: Ket, H: Operator, duration: float) -> Ket:
    """psi(t) = exp(-i H t) psi0, with hbar = 1."""
    if psi0.space != H.space:
        raise ValueError("space mismatch between state and Hamiltonian")
    if duration == 0:
        return psi0
    U = unitary_propagator(H, duration)
    return Ket(U @ psi0.amplitudes, psi0.space, normalized=psi0.normalized)


def _find_atom(space: SpaceSignature) -> int:
    idx = len(space.dims) - 1
    if space.dims[idx] != 2:
        raise ValueError("space has no trailing two-level atom subsystem")
    return idx


def jc_hamiltonian(
    space: SpaceSignature,
    which: str,
    G: float,
    Omega: float = 0.0,
    Omega_a: float = 0.0,
) -> Operator:
    """Resonant atom-field Hamiltonian in the rotating wave approximation.

    which = 'mode1' or 'mode2' couples the atom to a single mode; the
    'both_with_phase' variant couples it to both orthogonally polarized
    modes, with the mode-1 coupling carrying a relative factor i.
    Frequencies are angular; pass Omega = Omega_a = 0 for the rotating frame.
    """
    atom = _find_atom(space)
    sz, spl, smi = atom_ops(space, atom)
    n_total = number_op(space, 0)
    if len(space.dims) > 2:
        n_total = n_total + number_op(space, 1)
    H = Omega * n_total + (Omega_a / 2.0) * sz
    if which == "mode1":
        a = annihilation_op(space, 0)
        H = H + G * (a.dag() @ smi + a @ spl)
    elif which == "mode2":
        a = annihilation_op(space, 1)
        H = H + G * (a.dag() @ smi + a @ spl)
    elif which == "both_with_phase":
        a1 = annihilation_op(space, 0)
        a2 = annihilation_op(space, 1)
        H = H + G * (
            1j * (a1.dag() @ smi) - 1j * (a1 @ spl) + a2.dag() @ smi + a2 @ spl
        )
    else:
        raise ValueError(f"unknown coupling variant {which!r}")
    return H


def free_hamiltonian(space: SpaceSignature, Omega: float, Omega_a: float) -> Operator:
    """Dispersive segment: free fields plus the detuned atom splitting."""
    atom = _find_atom(space)
    sz, _, _ = atom_ops(space, atom)
    n_total = number_op(space, 0)
    if len(space.dims) > 2:
        n_total = n_total + number_op(space, 1)
    return Omega * n_total + (Omega_a / 2.0) * sz
