"""Dense statevector simulation with exact measurement laws.

Qubit ``q`` is bit ``q`` of the basis index (little endian).  A register is a
contiguous run of qubits ``[offset, offset + width)``; its integer value is
read from those bits in the same order.  Gates act on index bit patterns
through reshapes, never through materialized ``2**k x 2**k`` matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .errors import ResourceCapError

DEFAULT_QUBIT_CAP = 26
NORM_TOL = 1e-10
DIST_TOL = 1e-9


class NormDriftError(AssertionError):
    """Raised when a gate moved the state off the unit sphere."""


class Register(NamedTuple):
    offset: int
    width: int

    @property
    def size(self) -> int:
        return 1 << self.width


@dataclass(frozen=True)
class RegisterLayout:
    """Index, value and phase registers stacked from the low bits upward."""

    index_width: int
    value_width: int = 1
    phase_width: int = 0
    cap: int = DEFAULT_QUBIT_CAP

    def __post_init__(self):
        if min(self.index_width, self.value_width, self.phase_width) < 0:
            raise ValueError("register widths must be nonnegative")
        if self.total > self.cap:
            raise ResourceCapError(
                f"layout needs {self.total} qubits, simulator cap is {self.cap}"
            )

    @property
    def total(self) -> int:
        return self.index_width + self.value_width + self.phase_width

    @property
    def index(self) -> Register:
        return Register(0, self.index_width)

    @property
    def value(self) -> Register:
        return Register(self.index_width, self.value_width)

    @property
    def phase(self) -> Register:
        return Register(self.index_width + self.value_width, self.phase_width)

    @property
    def everything(self) -> Register:
        return Register(0, self.total)


class StateVector:
    """A unit vector of ``2**k`` complex amplitudes.

    Mutating helpers in this module work in place and return the state so
    calls can be chained.  ``k`` never changes after construction.
    """

    def __init__(self, amplitudes: np.ndarray, cap: int = DEFAULT_QUBIT_CAP):
        amps = np.asarray(amplitudes, dtype=np.complex128)
        n = amps.size
        if n < 2 or n & (n - 1):
            raise ValueError(f"amplitude count must be a power of two >= 2, got {n}")
        k = n.bit_length() - 1
        if k > cap:
            raise ResourceCapError(f"{k} qubits exceeds simulator cap {cap}")
        self._k = k
        self.amplitudes = amps.reshape(-1).copy()
        self.check_norm()

    @property
    def num_qubits(self) -> int:
        return self._k

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def check_norm(self, tol: float = NORM_TOL) -> None:
        drift = abs(self.norm() - 1.0)
        if drift > tol:
            raise NormDriftError(f"norm drifted by {drift:.3e} (tolerance {tol:.0e})")

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes)

    def register_view(self, register: Register) -> np.ndarray:
        """View of the amplitudes as ``(high, 2**width, low)``."""
        _check_register(self, register)
        high = 1 << (self._k - register.offset - register.width)
        return self.amplitudes.reshape(high, register.size, 1 << register.offset)

    def __repr__(self) -> str:
        return f"StateVector(k={self._k})"


def _check_register(state: StateVector, register: Register) -> None:
    if register.offset < 0 or register.width < 0:
        raise IndexError(f"bad register {register}")
    if register.offset + register.width > state.num_qubits:
        raise IndexError(f"register {register} outside {state.num_qubits} qubits")


def _control_mask(k: int, control: int | Sequence[int] | None) -> np.ndarray | None:
    if control is None:
        return None
    controls = [control] if isinstance(control, (int, np.integer)) else list(control)
    idx = np.arange(1 << k)
    mask = np.ones(1 << k, dtype=bool)
    for c in controls:
        if not 0 <= c < k:
            raise IndexError(f"control qubit {c} outside {k} qubits")
        mask &= ((idx >> c) & 1).astype(bool)
    return mask


def _blend(state: StateVector, new: np.ndarray, mask: np.ndarray | None) -> None:
    if mask is None:
        state.amplitudes = new
    else:
        state.amplitudes = np.where(mask, new, state.amplitudes)


def new_basis_state(k: int, basis_index: int, cap: int = DEFAULT_QUBIT_CAP) -> StateVector:
    if k < 1:
        raise ValueError("need at least one qubit")
    if k > cap:
        raise ResourceCapError(f"{k} qubits exceeds simulator cap {cap}")
    if not 0 <= basis_index < (1 << k):
        raise IndexError(f"basis index {basis_index} out of range for {k} qubits")
    amps = np.zeros(1 << k, dtype=np.complex128)
    amps[basis_index] = 1.0
    return StateVector(amps, cap=cap)


def apply_hadamard_all(state: StateVector, register: Register, control=None) -> StateVector:
    """Walsh-Hadamard transform on every qubit of ``register``."""
    _check_register(state, register)
    mask = _control_mask(state.num_qubits, control)
    amps = state.amplitudes.copy()
    s = 1.0 / np.sqrt(2.0)
    for q in range(register.offset, register.offset + register.width):
        v = amps.reshape(-1, 2, 1 << q)
        a0 = v[:, 0, :].copy()
        a1 = v[:, 1, :]
        v[:, 0, :] = (a0 + a1) * s
        v[:, 1, :] = (a0 - a1) * s
    _blend(state, amps, mask)
    state.check_norm()
    return state


@dataclass(frozen=True)
class Gate:
    """A dense ``2**w x 2**w`` matrix acting on one register, optionally controlled."""

    matrix: np.ndarray
    register: Register
    control: int | tuple[int, ...] | None = None

    def inverse(self) -> "Gate":
        return Gate(np.conj(np.asarray(self.matrix)).T, self.register, self.control)


def phase_gate(qubit: int, phi: float) -> Gate:
    return Gate(np.diag([1.0, np.exp(1j * phi)]), Register(qubit, 1))


def _apply_gate(state: StateVector, gate: Gate) -> None:
    m = np.asarray(gate.matrix, dtype=np.complex128)
    if m.shape != (gate.register.size, gate.register.size):
        raise ValueError(
            f"gate of shape {m.shape} does not match register width {gate.register.width}"
        )
    view = state.register_view(gate.register)
    new = np.einsum("ij,hjl->hil", m, view).reshape(-1)
    _blend(state, new, _control_mask(state.num_qubits, gate.control))


def apply_unitary(
    state: StateVector, gates: Gate | Callable[[StateVector], object] | Iterable
) -> StateVector:
    """Apply a gate, a callable acting on the state, or a sequence of either.

    The norm is checked after every element, so a non-unitary gate fails at
    the point where it is applied.
    """
    if isinstance(gates, Gate) or callable(gates):
        gates = [gates]
    for g in gates:
        if isinstance(g, Gate):
            _apply_gate(state, g)
        else:
            g(state)
        state.check_norm()
    return state


def apply_qft(state: StateVector, register: Register, inverse: bool = False, control=None) -> StateVector:
    """Quantum Fourier transform ``|x> -> M**-1/2 sum_y exp(2 pi i x y / M) |y>``."""
    _check_register(state, register)
    if register.width == 0:
        raise ValueError("QFT needs a register of width >= 1")
    view = state.register_view(register)
    norm = np.sqrt(register.size)
    if inverse:
        new = np.fft.fft(view, axis=1) / norm
    else:
        new = np.fft.ifft(view, axis=1) * norm
    _blend(state, new.reshape(-1), _control_mask(state.num_qubits, control))
    state.check_norm()
    return state


def apply_inverse_qft(state: StateVector, register: Register) -> StateVector:
    return apply_qft(state, register, inverse=True)


def reflect_zero(state: StateVector, register: Register, control=None) -> StateVector:
    """Negate amplitudes whose ``register`` value is 0."""
    view = state.register_view(register)
    new = view.copy()
    new[:, 0, :] *= -1
    _blend(state, new.reshape(-1), _control_mask(state.num_qubits, control))
    return state


def global_phase(state: StateVector, phase: complex, control=None) -> StateVector:
    _blend(state, state.amplitudes * phase, _control_mask(state.num_qubits, control))
    state.check_norm()
    return state


def measurement_distribution(state: StateVector, register: Register | None = None) -> np.ndarray:
    """Exact marginal law of ``register`` (all qubits when omitted)."""
    if register is None:
        register = Register(0, state.num_qubits)
    view = state.register_view(register)
    probs = (np.abs(view) ** 2).sum(axis=(0, 2))
    total = probs.sum()
    if abs(total - 1.0) > DIST_TOL:
        raise NormDriftError(f"measurement law sums to {total}")
    return probs


def sample_measurement(state: StateVector, register: Register | None, rng: np.random.Generator) -> int:
    probs = measurement_distribution(state, register)
    probs = np.clip(probs, 0.0, None)
    return int(rng.choice(probs.size, p=probs / probs.sum()))
