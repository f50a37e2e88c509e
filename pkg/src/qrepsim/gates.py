"""Standard gate set, Bell states and Bell-basis measurement."""
from __future__ import annotations

import enum
import math

import numpy as np

from .states import DensityMatrix, GateMatrix, apply_unitary, measure_branches, pure_density

X = GateMatrix([[0, 1], [1, 0]])
Y = GateMatrix([[0, -1j], [1j, 0]])
Z = GateMatrix([[1, 0], [0, -1]])
H = GateMatrix(np.array([[1, 1], [1, -1]]) / math.sqrt(2))

# slot 0 is the control, slot 1 the target
CNOT = GateMatrix([
    [1, 0, 0, 0],
    [0, 0, 0, 1],
    [0, 0, 1, 0],
    [0, 1, 0, 0],
])

SWAP = GateMatrix([
    [1, 0, 0, 0],
    [0, 0, 1, 0],
    [0, 1, 0, 0],
    [0, 0, 0, 1],
])

IDENTITY_1Q = GateMatrix(np.eye(2))


def phase_gate(theta: float) -> GateMatrix:
    """diag(1, e^{i theta})."""
    return GateMatrix([[1, 0], [0, np.exp(1j * float(theta))]])


def rx_gate(theta: float) -> GateMatrix:
    """Rotation about the x axis by theta."""
    c = math.cos(float(theta) / 2)
    s = math.sin(float(theta) / 2)
    return GateMatrix([[c, -1j * s], [-1j * s, c]])


def standard_gate(name: str, theta: float | None = None) -> GateMatrix:
    """Look up a gate by name; `phase` and `rx` require theta."""
    fixed = {"x": X, "y": Y, "z": Z, "h": H, "cnot": CNOT, "swap": SWAP}
    key = name.strip().lower()
    if key in fixed:
        if theta is not None:
            raise ValueError(f"gate {name!r} takes no angle")
        return fixed[key]
    if key in ("phase", "rx"):
        if theta is None:
            raise ValueError(f"gate {name!r} needs an angle")
        return phase_gate(theta) if key == "phase" else rx_gate(theta)
    raise ValueError(f"unknown gate {name!r}")


class BellKind(enum.Enum):
    """The four Bell states, identified by (phase bit, parity bit)."""

    PHI_PLUS = (0, 0)
    PSI_PLUS = (0, 1)
    PHI_MINUS = (1, 0)
    PSI_MINUS = (1, 1)

    @property
    def phase_bit(self) -> int:
        return self.value[0]

    @property
    def parity_bit(self) -> int:
        return self.value[1]

    @classmethod
    def from_bits(cls, phase_bit: int, parity_bit: int) -> "BellKind":
        return cls((int(phase_bit), int(parity_bit)))


_SQRT_HALF = 1 / math.sqrt(2)

_BELL_VECTORS = {
    BellKind.PHI_PLUS: np.array([1, 0, 0, 1], dtype=np.complex128) * _SQRT_HALF,
    BellKind.PHI_MINUS: np.array([1, 0, 0, -1], dtype=np.complex128) * _SQRT_HALF,
    BellKind.PSI_PLUS: np.array([0, 1, 1, 0], dtype=np.complex128) * _SQRT_HALF,
    BellKind.PSI_MINUS: np.array([0, 1, -1, 0], dtype=np.complex128) * _SQRT_HALF,
}


def bell_vector(kind: BellKind) -> np.ndarray:
    """Amplitudes of the requested Bell state (read-only copy)."""
    return _BELL_VECTORS[kind].copy()


def bell_state(kind: BellKind = BellKind.PHI_PLUS) -> DensityMatrix:
    return pure_density(_BELL_VECTORS[kind])


class BellBranch:
    __slots__ = ("kind", "probability", "state")

    def __init__(self, kind: BellKind, probability: float, state: DensityMatrix | None):
        self.kind = kind
        self.probability = probability
        self.state = state

    def __iter__(self):
        return iter((self.kind, self.probability, self.state))

    def __repr__(self) -> str:
        return f"BellBranch({self.kind.name}, p={self.probability:.6g})"


def bell_measure(state: DensityMatrix, q1: int, q2: int) -> list[BellBranch]:
    """Measure qubits (q1, q2) in the Bell basis.

    Implemented by disentangling with CNOT(q1 -> q2) then H(q1) and reading
    both qubits out.  Bit pairs map to kinds as 00 PHI_PLUS, 01 PSI_PLUS,
    10 PHI_MINUS, 11 PSI_MINUS (first bit is q1).  Branch states are the
    post-circuit collapsed registers; probabilities sum to 1.
    """
    work = apply_unitary(state, CNOT, (q1, q2))
    work = apply_unitary(work, H, (q1,))
    out = []
    for br in measure_branches(work, (q1, q2)):
        kind = BellKind.from_bits(int(br.bits[0]), int(br.bits[1]))
        out.append(BellBranch(kind, br.probability, br.state))
    return out


def bell_projector_weights(state: DensityMatrix) -> dict[BellKind, float]:
    """Overlap of a two-qubit state with each Bell projector."""
    if state.n_qubits != 2:
        raise ValueError("expects a two-qubit state")
    return {
        kind: float(np.real(vec.conj() @ state.mat @ vec))
        for kind, vec in _BELL_VECTORS.items()
    }
