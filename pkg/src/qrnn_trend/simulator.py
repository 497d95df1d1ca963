"""Exact dense simulation of the small data+hidden qubit register.

Basis-state convention: the data register occupies the most significant
index bits, so for a 2+2 layout the data qubits are index bits 3 and 2
and basis state |1000> is component 8. The measured qubit is the most
significant bit (the first data qubit).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_ATOL = 1e-10
MAX_QUBITS = 12


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class RegisterLayout:
    """Sizes of the data (D) and hidden (H) registers."""

    n_d: int
    n_h: int

    def __post_init__(self):
        if self.n_d < 1 or self.n_h < 1:
            raise SimulationError("both registers need at least one qubit")
        if self.total > MAX_QUBITS:
            raise SimulationError(
                f"{self.total} qubits exceeds the dense simulation bound of {MAX_QUBITS}"
            )

    @property
    def total(self) -> int:
        return self.n_d + self.n_h

    @property
    def dim(self) -> int:
        return 1 << self.total

    @property
    def measured_bit(self) -> int:
        # first data qubit == most significant index bit
        return self.total - 1

    def bit_of_qubit(self, qubit: int) -> int:
        """Index bit carrying qubit `qubit` (qubit 0 is the first data qubit)."""
        return self.total - 1 - qubit


class QuantumState:
    """Pure statevector or density matrix over the full register."""

    def __init__(self, layout: RegisterLayout, amplitudes=None, density=None):
        if (amplitudes is None) == (density is None):
            raise SimulationError("exactly one of amplitudes/density required")
        self.layout = layout
        self.amplitudes = None if amplitudes is None else np.asarray(amplitudes, dtype=complex)
        self.density = None if density is None else np.asarray(density, dtype=complex)
        self._validate()

    def _validate(self):
        dim = self.layout.dim
        if self.is_pure:
            if self.amplitudes.shape != (dim,):
                raise SimulationError(f"amplitude vector must have length {dim}")
            norm = float(np.sum(np.abs(self.amplitudes) ** 2))
            if abs(norm - 1.0) > NORM_ATOL:
                raise SimulationError(f"state norm {norm} deviates from 1")
        else:
            if self.density.shape != (dim, dim):
                raise SimulationError(f"density matrix must be {dim}x{dim}")
            tr = float(np.trace(self.density).real)
            if abs(tr - 1.0) > NORM_ATOL:
                raise SimulationError(f"density trace {tr} deviates from 1")
            if not np.allclose(self.density, self.density.conj().T, atol=1e-9):
                raise SimulationError("density matrix is not Hermitian")

    @property
    def is_pure(self) -> bool:
        return self.amplitudes is not None

    def probabilities(self) -> np.ndarray:
        if self.is_pure:
            return np.abs(self.amplitudes) ** 2
        return np.real(np.diag(self.density))

    def as_density(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.amplitudes, self.amplitudes.conj())
        return self.density


@dataclass(frozen=True)
class DiagonalOperator:
    """Diagonal of the ring-of-Rzz ansatz operator.

    `unitary` entries are complex phases; `phase_dropped` entries are the
    real exponentials obtained by removing the imaginary unit.
    """

    entries: np.ndarray
    mode: str  # "unitary" | "phase_dropped"


def ring_pairs(layout: RegisterLayout):
    """Qubit pairs of the circuit-block ring: (q0,q1), (q1,q2), ..., (qn-1,q0)."""
    n = layout.total
    return [(q, (q + 1) % n) for q in range(n)]


def ring_sign_pattern(layout: RegisterLayout) -> np.ndarray:
    """Sign s[j, k] = +1 if the two bits of ring pair k differ in basis state j, else -1."""
    n = layout.total
    idx = np.arange(layout.dim)
    signs = np.empty((layout.dim, n), dtype=np.int8)
    for k, (qa, qb) in enumerate(ring_pairs(layout)):
        ba = (idx >> layout.bit_of_qubit(qa)) & 1
        bb = (idx >> layout.bit_of_qubit(qb)) & 1
        signs[:, k] = np.where(ba != bb, 1, -1)
    return signs


def encode_input(x_norm: float, layout: RegisterLayout, replicate: bool = True) -> QuantumState:
    """Prepare the register for a normalized input value.

    Each data qubit gets Ry(arccos(x_norm)) applied to |0>; hidden qubits
    stay in |0>. With `replicate` off only the first data qubit is rotated.
    """
    if not (0.0 <= x_norm <= 1.0):
        raise SimulationError(f"input value {x_norm} outside [0, 1]")
    phi = np.arccos(x_norm)
    single = np.array([np.cos(phi / 2), np.sin(phi / 2)], dtype=complex)
    zero = np.array([1.0, 0.0], dtype=complex)
    amp = np.array([1.0], dtype=complex)
    for q in range(layout.n_d):
        amp = np.kron(amp, single if (replicate or q == 0) else zero)
    for _ in range(layout.n_h):
        amp = np.kron(amp, zero)
    return QuantumState(layout, amplitudes=amp)


def ansatz_diagonal(theta, layout: RegisterLayout, mode: str = "unitary") -> DiagonalOperator:
    """Diagonal operator of the Rzz ring with one angle per ring pair."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (layout.total,):
        raise SimulationError(
            f"expected {layout.total} angles for the ring, got shape {theta.shape}"
        )
    if not np.all(np.isfinite(theta)):
        raise SimulationError("angles must be finite")
    exponent = ring_sign_pattern(layout).astype(float) @ (theta / 2.0)
    if mode == "unitary":
        entries = np.exp(1j * exponent)
    elif mode == "phase_dropped":
        entries = np.exp(exponent)
    else:
        raise SimulationError(f"unknown mode {mode!r}")
    return DiagonalOperator(entries=entries, mode=mode)


def apply_diagonal(state: QuantumState, op: DiagonalOperator) -> QuantumState:
    if op.entries.shape != (state.layout.dim,):
        raise SimulationError("operator dimension does not match the state")
    if op.mode != "unitary":
        # phase-dropped diagonals are arithmetic devices for the QUBO objective,
        # not physical evolution; applying one would break normalization
        raise SimulationError("only unitary-mode operators can be applied to a state")
    if state.is_pure:
        return QuantumState(state.layout, amplitudes=op.entries * state.amplitudes)
    d = op.entries
    rho = d[:, None] * state.density * d.conj()[None, :]
    return QuantumState(state.layout, density=rho)


def apply_single_qubit(state: QuantumState, gate: np.ndarray, qubit: int) -> QuantumState:
    """Apply a 2x2 unitary to one qubit (qubit 0 = first data qubit)."""
    n = state.layout.total
    axis = n - 1 - state.layout.bit_of_qubit(qubit)  # tensor axis == qubit index
    if state.is_pure:
        psi = state.amplitudes.reshape([2] * n)
        psi = np.moveaxis(np.tensordot(gate, psi, axes=([1], [axis])), 0, axis)
        return QuantumState(state.layout, amplitudes=psi.reshape(-1))
    rho = state.density.reshape([2] * (2 * n))
    rho = np.moveaxis(np.tensordot(gate, rho, axes=([1], [axis])), 0, axis)
    rho = np.moveaxis(np.tensordot(gate.conj(), rho, axes=([1], [n + axis])), 0, n + axis)
    return QuantumState(state.layout, density=rho.reshape(state.layout.dim, state.layout.dim))


def ry(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def measure_first_data_qubit(state: QuantumState, layout: RegisterLayout) -> float:
    """Probability of the measured qubit collapsing to |1> (no state collapse)."""
    probs = state.probabilities()
    idx = np.arange(layout.dim)
    mask = ((idx >> layout.measured_bit) & 1) == 1
    return float(np.clip(np.sum(probs[mask]), 0.0, 1.0))


def partial_trace_data(state: QuantumState, layout: RegisterLayout) -> np.ndarray:
    """Reduced density matrix of the hidden register (data register traced out)."""
    dd, dh = 1 << layout.n_d, 1 << layout.n_h
    if state.is_pure:
        m = state.amplitudes.reshape(dd, dh)
        return m.T @ m.conj()
    rho = state.density.reshape(dd, dh, dd, dh)
    return np.einsum("ahak->hk", rho)


def reset_data_register(state: QuantumState, layout: RegisterLayout, next_x: float,
                        replicate: bool = True) -> QuantumState:
    """Trace out the data register and re-encode it with the next input value."""
    if not (0.0 <= next_x <= 1.0):
        raise SimulationError(f"input value {next_x} outside [0, 1]")
    rho_h = partial_trace_data(state, layout)
    phi = np.arccos(next_x)
    single = np.array([np.cos(phi / 2), np.sin(phi / 2)], dtype=complex)
    zero = np.array([1.0, 0.0], dtype=complex)
    data_amp = np.array([1.0], dtype=complex)
    for q in range(layout.n_d):
        data_amp = np.kron(data_amp, single if (replicate or q == 0) else zero)
    purity = float(np.trace(rho_h @ rho_h).real)
    if abs(purity - 1.0) <= NORM_ATOL:
        # still pure: recover the hidden statevector from the rank-one density
        w, v = np.linalg.eigh(rho_h)
        hidden = v[:, int(np.argmax(w))]
        pivot = int(np.argmax(np.abs(hidden)))
        hidden = hidden * np.exp(-1j * np.angle(hidden[pivot]))  # fix global phase
        return QuantumState(layout, amplitudes=np.kron(data_amp, hidden))
    rho_d = np.outer(data_amp, data_amp.conj())
    return QuantumState(layout, density=np.kron(rho_d, rho_h))
