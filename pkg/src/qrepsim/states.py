"""Dense multi-qubit state representations and exact operations on them.

Everything downstream (noise channels, protocols, the repeater) is built on
the small set of primitives in this module: pure state vectors, density
matrices, unitary gates, Kraus channels, partial trace, projective
measurement and fidelity.

Qubit ordering convention: qubit k corresponds to bit k of the basis index,
with bit 0 the least significant bit.  So for a two-qubit register the basis
index 2 is the state with qubit 1 set and qubit 0 clear.  `tensor(a, b)`
places `a` on the lower-index qubits.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

TRACE_ATOL = 1e-10
HERMITIAN_ATOL = 1e-10
UNITARY_ATOL = 1e-12
CPTP_ATOL = 1e-10
EIGENVALUE_FLOOR = -1e-9
NULL_BRANCH_PROB = 1e-14


def _infer_qubits(dim: int, what: str) -> int:
    n = int(dim).bit_length() - 1
    if dim <= 0 or 2**n != dim:
        raise ValueError(f"{what} dimension {dim} is not a power of two")
    return n


class PureState:
    """Normalized state vector over n qubits. Immutable after construction."""

    __slots__ = ("n_qubits", "vec")

    def __init__(self, vec, *, check: bool = True):
        vec = np.array(vec, dtype=np.complex128).reshape(-1)
        n = _infer_qubits(vec.shape[0], "state vector")
        if check:
            if not np.all(np.isfinite(vec.view(np.float64))):
                raise ValueError("state vector has non-finite entries")
            norm = float(np.vdot(vec, vec).real)
            if abs(norm - 1.0) > 1e-12:
                raise ValueError(f"state vector norm {norm} != 1")
        vec.setflags(write=False)
        self.n_qubits = n
        self.vec = vec

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def to_density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.vec, self.vec.conj()), check=False)

    def __repr__(self) -> str:
        return f"PureState(n_qubits={self.n_qubits})"


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator over n qubits.

    Hermiticity and trace are checked at construction.  Positivity needs an
    eigendecomposition, so it is only performed by `validate()`; operations
    in this package are trace preserving and completely positive, hence
    preserve validity.
    """

    __slots__ = ("n_qubits", "mat")

    def __init__(self, mat, *, check: bool = True):
        mat = np.array(mat, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {mat.shape}")
        n = _infer_qubits(mat.shape[0], "density matrix")
        if check:
            if not np.all(np.isfinite(mat.view(np.float64))):
                raise ValueError("density matrix has non-finite entries")
            if np.max(np.abs(mat - mat.conj().T)) > HERMITIAN_ATOL:
                raise ValueError("density matrix is not Hermitian")
            tr = complex(np.trace(mat))
            if abs(tr - 1.0) > TRACE_ATOL:
                raise ValueError(f"density matrix trace {tr} != 1")
        mat.setflags(write=False)
        self.n_qubits = n
        self.mat = mat

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def validate(self) -> None:
        """Full invariant check including positive semidefiniteness."""
        if np.max(np.abs(self.mat - self.mat.conj().T)) > HERMITIAN_ATOL:
            raise ValueError("density matrix is not Hermitian")
        tr = complex(np.trace(self.mat))
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"density matrix trace {tr} != 1")
        evals = np.linalg.eigvalsh(self.mat)
        if float(evals.min()) < EIGENVALUE_FLOOR:
            raise ValueError(f"density matrix has negative eigenvalue {evals.min()}")

    def __repr__(self) -> str:
        return f"DensityMatrix(n_qubits={self.n_qubits})"


class GateMatrix:
    """Unitary acting on 1 or 2 qubits; unitarity is checked at construction."""

    __slots__ = ("arity", "mat")

    def __init__(self, mat):
        mat = np.array(mat, dtype=np.complex128)
        if mat.shape == (2, 2):
            arity = 1
        elif mat.shape == (4, 4):
            arity = 2
        else:
            raise ValueError(f"gate must be 2x2 or 4x4, got shape {mat.shape}")
        dev = np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])))
        if dev > UNITARY_ATOL:
            raise ValueError(f"gate is not unitary (deviation {dev:.3e})")
        mat.setflags(write=False)
        self.arity = arity
        self.mat = mat

    def then(self, other: "GateMatrix") -> "GateMatrix":
        """Composition: apply self first, then other."""
        if other.arity != self.arity:
            raise ValueError("cannot compose gates of different arity")
        return GateMatrix(other.mat @ self.mat)

    def __repr__(self) -> str:
        return f"GateMatrix(arity={self.arity})"


class KrausChannel:
    """Completely positive trace-preserving map given by Kraus operators."""

    __slots__ = ("arity", "ops")

    def __init__(self, ops):
        ops = tuple(np.array(k, dtype=np.complex128) for k in ops)
        if not ops:
            raise ValueError("channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        if dim == 2:
            arity = 1
        elif dim == 4:
            arity = 2
        else:
            raise ValueError(f"Kraus operators must be 2x2 or 4x4, got {ops[0].shape}")
        acc = np.zeros((dim, dim), dtype=np.complex128)
        for k in ops:
            if k.shape != (dim, dim):
                raise ValueError("Kraus operators must share one shape")
            acc += k.conj().T @ k
        dev = np.max(np.abs(acc - np.eye(dim)))
        if dev > CPTP_ATOL:
            raise ValueError(f"Kraus operators do not sum to identity (deviation {dev:.3e})")
        for k in ops:
            k.setflags(write=False)
        self.arity = arity
        self.ops = ops

    def __repr__(self) -> str:
        return f"KrausChannel(arity={self.arity}, n_ops={len(self.ops)})"


@dataclass(frozen=True)
class MeasurementRecord:
    qubit: int
    outcome: int
    probability: float


class Branch(NamedTuple):
    """One projective-measurement outcome: bit string, probability, post state."""

    bits: str
    probability: float
    state: "DensityMatrix | None"


# --- state constructors ---


def pure_density(amplitudes) -> DensityMatrix:
    """Density matrix of the pure state with the given amplitudes."""
    return PureState(amplitudes).to_density_matrix()


def ground_state(n_qubits: int) -> DensityMatrix:
    """|0...0><0...0| on n qubits."""
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    vec = np.zeros(2**n_qubits, dtype=np.complex128)
    vec[0] = 1.0
    return pure_density(vec)


def maximally_mixed(n_qubits: int) -> DensityMatrix:
    d = 2**n_qubits
    return DensityMatrix(np.eye(d) / d, check=False)


# --- gate application ---


def _check_targets(n_qubits: int, targets, arity: int) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(targets) != arity:
        raise ValueError(f"gate of arity {arity} needs {arity} target(s), got {len(targets)}")
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate targets {targets}")
    for t in targets:
        if not 0 <= t < n_qubits:
            raise ValueError(f"target {t} out of range for {n_qubits} qubits")
    return targets


def _contract(state_nd: np.ndarray, gate_mat: np.ndarray, axes: list[int]) -> np.ndarray:
    """Apply gate_mat to the given axes of a (2,)*k tensor.

    axes[j] is the tensor axis carrying gate slot j.  Axis i of a reshaped
    register holds qubit (n-1-i), so callers pass axes already translated.
    """
    m = _infer_qubits(gate_mat.shape[0], "gate")
    g = gate_mat.reshape((2,) * (2 * m))
    in_axes = [2 * m - 1 - j for j in range(m)]
    out = np.tensordot(g, state_nd, axes=(in_axes, axes))
    # tensordot leaves gate output axes first; slot of output axis k is m-1-k
    dest = [axes[m - 1 - k] for k in range(m)]
    return np.moveaxis(out, list(range(m)), dest)


def _apply_unitary_vec(vec: np.ndarray, n: int, gate: GateMatrix, targets) -> np.ndarray:
    t = vec.reshape((2,) * n)
    axes = [n - 1 - q for q in targets]
    return _contract(t, gate.mat, axes).reshape(-1)


def _apply_kraus_mat(mat: np.ndarray, n: int, op: np.ndarray, targets) -> np.ndarray:
    t = mat.reshape((2,) * (2 * n))
    row_axes = [n - 1 - q for q in targets]
    col_axes = [2 * n - 1 - q for q in targets]
    t = _contract(t, op, row_axes)
    t = _contract(t, op.conj(), col_axes)
    return t.reshape(mat.shape)


def apply_unitary(state, gate: GateMatrix, targets):
    """Conjugate the state by a gate on the listed target qubits.

    Parameters
    ----------
    state : DensityMatrix or PureState
    gate : GateMatrix
        Slot 0 of the gate acts on targets[0], slot 1 on targets[1].
    targets : sequence of int

    Returns the same kind of state that was passed in.
    """
    if isinstance(state, PureState):
        targets = _check_targets(state.n_qubits, targets, gate.arity)
        return PureState(_apply_unitary_vec(state.vec, state.n_qubits, gate, targets), check=False)
    if isinstance(state, DensityMatrix):
        targets = _check_targets(state.n_qubits, targets, gate.arity)
        out = _apply_kraus_mat(np.asarray(state.mat), state.n_qubits, np.asarray(gate.mat), targets)
        return DensityMatrix(out, check=False)
    raise TypeError(f"cannot apply a gate to {type(state).__name__}")


def apply_channel(state: DensityMatrix, channel: KrausChannel, targets) -> DensityMatrix:
    """Apply a CPTP map, summing conjugations over its Kraus operators."""
    if not isinstance(state, DensityMatrix):
        raise TypeError("channels act on density matrices")
    targets = _check_targets(state.n_qubits, targets, channel.arity)
    mat = np.asarray(state.mat)
    out = np.zeros_like(mat)
    for k in channel.ops:
        out += _apply_kraus_mat(mat, state.n_qubits, k, targets)
    return DensityMatrix(out, check=False)


# --- composition and reduction ---


def tensor(a, b):
    """Joint state with `a` on the lower-index qubits and `b` above it."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(b.vec, a.vec), check=False)
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(b.mat, a.mat), check=False)
    raise TypeError("tensor expects two states of the same kind")


def partial_trace(state: DensityMatrix, keep) -> DensityMatrix:
    """Reduced state on `keep`, whose order fixes the output qubit order."""
    keep = tuple(int(q) for q in keep)
    n = state.n_qubits
    if not keep:
        raise ValueError("must keep at least one qubit")
    if len(set(keep)) != len(keep):
        raise ValueError(f"duplicate qubits in keep {keep}")
    for q in keep:
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n} qubits")

    t = state.mat.reshape((2,) * (2 * n))
    remaining = list(range(n))
    for q in sorted(set(range(n)) - set(keep), reverse=True):
        k = len(remaining)
        pos = remaining.index(q)
        t = np.trace(t, axis1=k - 1 - pos, axis2=2 * k - 1 - pos)
        remaining.remove(q)

    k = len(keep)
    # remaining is sorted(keep); permute axes so keep[i] becomes qubit i
    perm = [0] * (2 * k)
    for i, q in enumerate(keep):
        pos = remaining.index(q)
        perm[k - 1 - i] = k - 1 - pos
        perm[2 * k - 1 - i] = 2 * k - 1 - pos
    t = np.transpose(t, perm)
    return DensityMatrix(t.reshape(2**k, 2**k), check=False)


# --- measurement ---


def _bit_mask(n: int, assignments) -> np.ndarray:
    idx = np.arange(2**n)
    mask = np.ones(2**n, dtype=bool)
    for q, b in assignments:
        mask &= ((idx >> q) & 1) == b
    return mask


def measure(state: DensityMatrix, qubit: int, rng: np.random.Generator):
    """Sample a projective measurement of one qubit in the computational basis.

    Returns (MeasurementRecord, post-measurement DensityMatrix with the qubit
    collapsed in place).  The recorded probability is the exact Born
    probability of the sampled outcome.
    """
    if not 0 <= qubit < state.n_qubits:
        raise ValueError(f"qubit {qubit} out of range")
    diag = np.real(np.diagonal(state.mat))
    m1 = _bit_mask(state.n_qubits, [(qubit, 1)])
    p1 = float(diag[m1].sum())
    p0 = float(diag[~m1].sum())
    if p0 < NULL_BRANCH_PROB and p1 < NULL_BRANCH_PROB:
        raise ValueError("state assigns no probability to either outcome")
    outcome = 0 if rng.random() < p0 else 1
    prob = p0 if outcome == 0 else p1
    mask = m1 if outcome == 1 else ~m1
    post = state.mat * mask[:, None] * mask[None, :] / prob
    return MeasurementRecord(qubit, outcome, prob), DensityMatrix(post, check=False)


def measure_branches(state: DensityMatrix, qubits) -> list[Branch]:
    """Exact branch enumeration for measuring several qubits at once.

    One Branch per bit string over the listed qubits, in binary order of the
    string read with qubits[0] first.  Probabilities sum to 1; branches below
    the null threshold carry state None.
    """
    qubits = tuple(int(q) for q in qubits)
    if not qubits:
        raise ValueError("need at least one qubit to measure")
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"duplicate qubits {qubits}")
    for q in qubits:
        if not 0 <= q < state.n_qubits:
            raise ValueError(f"qubit {q} out of range")

    branches = []
    for code in range(2 ** len(qubits)):
        bits = format(code, f"0{len(qubits)}b")
        mask = _bit_mask(state.n_qubits, [(q, int(b)) for q, b in zip(qubits, bits)])
        diag = np.real(np.diagonal(state.mat))
        prob = float(diag[mask].sum())
        if prob < NULL_BRANCH_PROB:
            branches.append(Branch(bits, prob, None))
        else:
            post = state.mat * mask[:, None] * mask[None, :] / prob
            branches.append(Branch(bits, prob, DensityMatrix(post, check=False)))
    return branches


def project_and_reduce(state: DensityMatrix, qubits, bits) -> tuple[float, "DensityMatrix | None"]:
    """Probability of one outcome plus the reduced post state on the rest.

    Cheaper than measure_branches when only a single outcome matters and the
    measured qubits can be dropped.  Remaining qubits keep ascending order.
    """
    qubits = tuple(int(q) for q in qubits)
    bits = tuple(int(b) for b in bits)
    if len(qubits) != len(bits):
        raise ValueError("qubits and bits must align")
    n = state.n_qubits
    if len(qubits) >= n:
        raise ValueError("cannot project away every qubit")
    idx: list = [slice(None)] * (2 * n)
    for q, b in zip(qubits, bits):
        idx[n - 1 - q] = b
        idx[2 * n - 1 - q] = b
    sub = state.mat.reshape((2,) * (2 * n))[tuple(idx)]
    k = n - len(qubits)
    sub = sub.reshape(2**k, 2**k)
    prob = float(np.real(np.trace(sub)))
    if prob < NULL_BRANCH_PROB:
        return prob, None
    return prob, DensityMatrix(sub / prob, check=False)


# --- fidelity ---


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    evals, evecs = np.linalg.eigh(mat)
    if float(evals.min()) < EIGENVALUE_FLOOR:
        raise ValueError(f"negative eigenvalue {evals.min()} beyond tolerance")
    evals = np.maximum(evals, 0.0)
    return (evecs * np.sqrt(evals)) @ evecs.conj().T


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Uhlmann fidelity F(rho, sigma) = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    Computed through Hermitian eigendecompositions with eigenvalues clamped
    at zero; eigenvalues below the tolerance floor raise instead.  For a pure
    sigma = |psi><psi| this reduces to <psi|rho|psi>.
    """
    if rho.n_qubits != sigma.n_qubits:
        raise ValueError("fidelity needs states of equal dimension")
    # rank-one arguments take the overlap form: exact where the general
    # route loses ~sqrt(eps) to square roots of zero eigenvalues
    for a, b in ((rho, sigma), (sigma, rho)):
        purity = float(np.real(np.trace(b.mat @ b.mat)))
        if purity > 1.0 - 1e-12:
            evals, evecs = np.linalg.eigh(b.mat)
            psi = evecs[:, -1]
            f = float(np.real(psi.conj() @ a.mat @ psi))
            return min(max(f, 0.0), 1.0)
    s = _psd_sqrt(rho.mat)
    inner = s @ sigma.mat @ s
    evals = np.linalg.eigvalsh(inner)
    if float(evals.min()) < EIGENVALUE_FLOOR:
        raise ValueError(f"negative eigenvalue {evals.min()} beyond tolerance")
    f = float(np.sqrt(np.maximum(evals, 0.0)).sum() ** 2)
    return min(max(f, 0.0), 1.0)
