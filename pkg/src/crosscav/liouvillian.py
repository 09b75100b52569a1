"""Cross-decay Liouvillian for two field modes sharing a reservoir.

The generator acts on row-major vectorized density matrices: with
vec(rho) = rho.reshape(-1), a sandwich map rho -> A rho B becomes
kron(A, B.T).  Superoperator matrices are stored as scipy CSR so the
n_max = 8 coherent-state space (D = 81, D^2 = 6561) stays cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .tensor import (
    DensityMatrix,
    Operator,
    SpaceSignature,
    annihilation_op,
)

_TWO_PI = 2.0 * np.pi
_PSD_TOL = 1e-12


@dataclass(frozen=True)
class DecayParameters:
    """Full set of decay rates and frequency shifts for two modes.

    k11/k22 are the local decay rates, k12/k21 the cross decay rates,
    d11..d21 the frequency shifts, omega1/omega2 the bare mode frequencies.
    All rates in 1/s, frequencies in rad/s.
    """

    k11: float
    k22: float
    k12: float = 0.0
    k21: float = 0.0
    d11: float = 0.0
    d22: float = 0.0
    d12: float = 0.0
    d21: float = 0.0
    omega1: float = 0.0
    omega2: float = 0.0

    def __post_init__(self):
        if self.k11 < 0 or self.k22 < 0:
            raise ValueError("local decay rates must be non-negative")
        dm = self.damping_matrix()
        scale = max(abs(dm).max(), 1.0)
        min_eig = float(np.linalg.eigvalsh(dm).min())
        if min_eig < -_PSD_TOL * scale:
            raise ValueError(
                "damping matrix is not positive semidefinite "
                f"(min eigenvalue {min_eig:.3e}): {dm.tolist()}"
            )

    def damping_matrix(self) -> np.ndarray:
        """2x2 matrix whose positivity makes the generator a legal channel.

        Off-diagonal (k12 + k21)/2 + i(d12 - d21)/2; the two coincide with
        k12 + i(d12 - d21)/2 whenever k12 = k21, which is the physically
        motivated near-symmetric regime.
        """
        kappa = 0.5 * (self.k12 + self.k21) + 0.5j * (self.d12 - self.d21)
        return np.array(
            [[self.k11, kappa], [np.conj(kappa), self.k22]], dtype=complex
        )


@dataclass(frozen=True)
class SymmetricDecayParameters:
    """Symmetric-cavity form: equal local rates k, cross term r e^{i gamma}."""

    k: float
    r: float
    gamma: float
    omega: float = 0.0

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("decay rate k must be non-negative")
        r, gamma = self.r, self.gamma
        if r < 0:
            # polar form is degenerate; fold the sign into the phase
            r, gamma = -r, gamma + np.pi
        gamma = gamma % _TWO_PI
        object.__setattr__(self, "r", float(r))
        object.__setattr__(self, "gamma", float(gamma))
        if self.r > self.k * (1 + 1e-12):
            raise ValueError(
                f"cross rate r={self.r} exceeds k={self.k}; generator not positive"
            )

    def to_general(self, frame: str = "lab") -> DecayParameters:
        omega = _frame_omega(self.omega, frame)
        return DecayParameters(
            k11=self.k,
            k22=self.k,
            k12=self.r * np.cos(self.gamma),
            k21=self.r * np.cos(self.gamma),
            d12=self.r * np.sin(self.gamma),
            d21=-self.r * np.sin(self.gamma),
            omega1=omega,
            omega2=omega,
        )


def _frame_omega(omega: float, frame: str) -> float:
    if frame == "rotating":
        return 0.0
    if frame == "lab":
        return float(omega)
    raise ValueError(f"frame must be 'lab' or 'rotating', got {frame!r}")


@dataclass(frozen=True)
class SuperOperator:
    """D^2 x D^2 generator on row-major vectorized density matrices."""

    matrix: sp.csr_matrix
    space: SpaceSignature

    def __post_init__(self):
        d2 = self.space.dim**2
        if self.matrix.shape != (d2, d2):
            raise ValueError(
                f"superoperator shape {self.matrix.shape} does not match D^2={d2}"
            )
        object.__setattr__(self, "matrix", sp.csr_matrix(self.matrix))

    def todense(self) -> np.ndarray:
        return self.matrix.toarray()

    def __add__(self, other):
        if self.space != other.space:
            raise ValueError("space mismatch")
        return SuperOperator(self.matrix + other.matrix, self.space)


@dataclass(frozen=True)
class EnvironmentSpec:
    """Discrete bath: entries (alpha1, alpha2, omega_k), memory cutoff tau_c."""

    entries: tuple
    tau_c: float
    Omega1: float
    Omega2: float

    def __post_init__(self):
        if self.tau_c <= 0:
            raise ValueError("tau_c must be positive")
        entries = tuple(
            (complex(a1), complex(a2), float(w)) for a1, a2, w in self.entries
        )
        if not entries:
            raise ValueError("environment needs at least one entry")
        object.__setattr__(self, "entries", entries)


@dataclass(frozen=True)
class ModeTransform:
    """Unitary mixing (a1, a2) -> (A1, A2) set by the cross-decay phase."""

    gamma: float

    @property
    def matrix(self) -> np.ndarray:
        g = self.gamma
        return np.array(
            [[1.0, -np.exp(-1j * g)], [np.exp(1j * g), 1.0]], dtype=complex
        ) / np.sqrt(2.0)


def normal_mode_transform(gamma: float) -> ModeTransform:
    return ModeTransform(float(gamma))


def normal_mode_ops(space: SpaceSignature, gamma: float):
    """Slow/fast collective lowering operators (A1, A2) on the given space."""
    a1 = annihilation_op(space, 0)
    a2 = annihilation_op(space, 1)
    m = normal_mode_transform(gamma).matrix
    A1 = Operator(m[0, 0] * a1.matrix + m[0, 1] * a2.matrix, space)
    A2 = Operator(m[1, 0] * a1.matrix + m[1, 1] * a2.matrix, space)
    return A1, A2


def _sandwich(A: np.ndarray, B: np.ndarray) -> sp.csr_matrix:
    """Vectorized rho -> A rho B."""
    return sp.kron(sp.csr_matrix(A), sp.csr_matrix(B).T, format="csr")


def _left(A: np.ndarray, dim: int) -> sp.csr_matrix:
    return sp.kron(sp.csr_matrix(A), sp.identity(dim, format="csr"), format="csr")


def _right(B: np.ndarray, dim: int) -> sp.csr_matrix:
    return sp.kron(sp.identity(dim, format="csr"), sp.csr_matrix(B).T, format="csr")


def build_general_liouvillian(
    params: DecayParameters, space: SpaceSignature
) -> SuperOperator:
    """Assemble every term of the zero-temperature cross-decay generator.

    Any subsystems beyond the first two (e.g. an atom factor) are left
    untouched.  Mode frequencies enter through the -i*Omega commutators;
    pass omega1 = omega2 = 0 for rotating-frame dynamics.
    """
    if len(space.dims) < 2:
        raise ValueError("space must contain the two field modes")
    D = space.dim
    a1 = annihilation_op(space, 0).matrix
    a2 = annihilation_op(space, 1).matrix
    a1d, a2d = a1.conj().T, a2.conj().T
    n1, n2 = a1d @ a1, a2d @ a2
    x12 = a1d @ a2  # a1^dag a2
    x21 = a2d @ a1

    p = params
    L = p.k11 * (2 * _sandwich(a1, a1d) - _left(n1, D) - _right(n1, D))
    L = L + 1j * (p.d11 - p.omega1) * (_left(n1, D) - _right(n1, D))
    L = L + p.k22 * (2 * _sandwich(a2, a2d) - _left(n2, D) - _right(n2, D))
    L = L + 1j * (p.d22 - p.omega2) * (_left(n2, D) - _right(n2, D))
    L = L + p.k12 * (
        _sandwich(a1, a2d) + _sandwich(a2, a1d) - _right(x21, D) - _left(x12, D)
    )
    L = L + p.k21 * (
        _sandwich(a2, a1d) + _sandwich(a1, a2d) - _right(x12, D) - _left(x21, D)
    )
    L = L + 0.5j * (p.d12 - p.d21) * (
        _sandwich(a1, a2d) - _sandwich(a2, a1d) - _right(x21, D) + _left(x12, D)
    )
    L = L + 0.5j * (p.d21 - p.d12) * (
        _sandwich(a2, a1d) - _sandwich(a1, a2d) - _right(x12, D) + _left(x21, D)
    )
    L = L + 0.5j * (p.d12 + p.d21) * (
        _left(x12 + x21, D) - _right(x12 + x21, D)
    )
    return SuperOperator(sp.csr_matrix(L), space)


def build_symmetric_liouvillian(
    params: SymmetricDecayParameters,
    space: SpaceSignature,
    frame: str = "rotating",
) -> SuperOperator:
    """Symmetric-cavity generator: k11 = k22 = k, cross term r e^{i gamma}.

    In the rotating frame the -i*Omega number commutators are dropped;
    measured probabilities are frame-independent.
    """
    return build_general_liouvillian(params.to_general(frame), space)


def apply_liouvillian(L: SuperOperator, rho) -> np.ndarray:
    """Devectorized action d(rho)/dt; accepts a DensityMatrix or raw matrix."""
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if isinstance(rho, DensityMatrix) and rho.space != L.space:
        raise ValueError("space mismatch between superoperator and state")
    D = L.space.dim
    if mat.shape != (D, D):
        raise ValueError(f"state shape {mat.shape} does not match space dimension {D}")
    return (L.matrix @ mat.reshape(-1)).reshape(D, D)


def _window_integral(x: float, tau_c: float) -> complex:
    """Integral of e^{i x tau} over [0, tau_c]; the x -> 0 limit is tau_c."""
    if abs(x) * tau_c < 1e-12:
        return complex(tau_c)
    return (np.exp(1j * x * tau_c) - 1.0) / (1j * x)


def cross_rates_from_environment(env: EnvironmentSpec) -> DecayParameters:
    """Decay constants k_ij + i d_ij summed over a discrete bath spectrum."""
    c = {}
    probes = {1: env.Omega1, 2: env.Omega2}
    for i in (1, 2):
        for j in (1, 2):
            total = 0.0 + 0.0j
            for a1, a2, wk in env.entries:
                alpha = {1: a1, 2: a2}
                total += alpha[i] * np.conj(alpha[j]) * _window_integral(
                    wk - probes[j], env.tau_c
                )
            c[(i, j)] = total
    return DecayParameters(
        k11=c[(1, 1)].real,
        k22=c[(2, 2)].real,
        k12=c[(1, 2)].real,
        k21=c[(2, 1)].real,
        d11=c[(1, 1)].imag,
        d22=c[(2, 2)].imag,
        d12=c[(1, 2)].imag,
        d21=c[(2, 1)].imag,
        omega1=env.Omega1,
        omega2=env.Omega2,
    )


def _dissipator(Amat: np.ndarray, rate: float, omega: float, D: int) -> sp.csr_matrix:
    Ad = Amat.conj().T
    N = Ad @ Amat
    out = rate * (2 * _sandwich(Amat, Ad) - _left(N, D) - _right(N, D))
    if omega != 0.0:
        out = out - 1j * omega * (_left(N, D) - _right(N, D))
    return sp.csr_matrix(out)


def decompose_symmetric(
    params: SymmetricDecayParameters,
    space: SpaceSignature,
    frame: str = "rotating",
):
    """Split the symmetric generator into slow (k - r) and fast (k + r) channels.

    The number-commutator carries the same -i*Omega sign as the direct
    builder, so L1 + L2 reproduces it entry-wise in either frame.
    """
    D = space.dim
    omega = _frame_omega(params.omega, frame)
    A1, A2 = normal_mode_ops(space, params.gamma)
    L1 = SuperOperator(_dissipator(A1.matrix, params.k - params.r, omega, D), space)
    L2 = SuperOperator(_dissipator(A2.matrix, params.k + params.r, omega, D), space)
    return L1, L2
