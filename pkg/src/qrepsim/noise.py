"""Noise channels and the emulated fiber link.

A physical link is modeled in two independent parts:

* state quality: per hop, an ideal SWAP moves the payload one position,
  followed by two-qubit depolarizing noise on the swapped pair and dephasing
  on the moved qubit;
* losses: photon survival over length L is Bernoulli(e^(-L/L0)).  A lost
  attempt is heralded and repeated, so attenuation affects only yield
  accounting, never the quality of a delivered state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gates import CNOT, H, SWAP, X, Y, Z, bell_vector, BellKind
from .states import (
    DensityMatrix,
    GateMatrix,
    KrausChannel,
    apply_channel,
    apply_unitary,
    ground_state,
    partial_trace,
    tensor,
)


@dataclass(frozen=True)
class NoiseParams:
    """Error probabilities for gates, per-hop dephasing and readout.

    p_meas flips the recorded classical outcome of a measurement; it never
    touches the quantum state.
    """

    p_gate1: float = 0.0
    p_gate2: float = 0.0
    p_hop_dephase: float = 0.0
    p_meas: float = 0.0

    def __post_init__(self):
        for name in ("p_gate1", "p_gate2", "p_hop_dephase", "p_meas"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")


@dataclass(frozen=True)
class ChannelModel:
    """Geometry of one fiber segment: length, attenuation length, hop count."""

    length_km: float = 0.0
    attenuation_length_km: float = 20.0
    hops: int = 1

    def __post_init__(self):
        if self.length_km < 0:
            raise ValueError("length_km must be >= 0")
        if self.attenuation_length_km <= 0:
            raise ValueError("attenuation_length_km must be > 0")
        if self.hops < 0:
            raise ValueError("hops must be >= 0")

    @property
    def p_gen(self) -> float:
        """Survival probability of one generation attempt, in (0, 1]."""
        return math.exp(-self.length_km / self.attenuation_length_km)


def dephasing_channel(p: float) -> KrausChannel:
    """Phase flip with probability p: {sqrt(1-p) I, sqrt(p) Z}."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    return KrausChannel([
        math.sqrt(1.0 - p) * np.eye(2),
        math.sqrt(p) * Z.mat,
    ])


def depolarizing_channel(p: float, arity: int = 1) -> KrausChannel:
    """Uniform Pauli twirl: keep with probability 1-p, else maximally mix."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    paulis = [np.eye(2), X.mat, Y.mat, Z.mat]
    if arity == 1:
        ops = [math.sqrt(1.0 - 3.0 * p / 4.0) * np.eye(2)]
        ops += [math.sqrt(p / 4.0) * sigma for sigma in paulis[1:]]
        return KrausChannel(ops)
    if arity == 2:
        ops = [math.sqrt(1.0 - 15.0 * p / 16.0) * np.eye(4)]
        for i, a in enumerate(paulis):
            for j, b in enumerate(paulis):
                if i == 0 and j == 0:
                    continue
                # slot 0 is the low qubit, so it is the second kron factor
                ops.append(math.sqrt(p / 16.0) * np.kron(b, a))
        return KrausChannel(ops)
    raise ValueError(f"arity must be 1 or 2, got {arity}")


def identity_channel(arity: int = 1) -> KrausChannel:
    return KrausChannel([np.eye(2**arity)])


def werner(fidelity: float) -> DensityMatrix:
    """Werner-form pair: weight F on PhiPlus, (1-F)/3 on each other Bell state."""
    if not 0.0 <= fidelity <= 1.0:
        raise ValueError(f"fidelity={fidelity} outside [0, 1]")
    rest = (1.0 - fidelity) / 3.0
    mat = np.zeros((4, 4), dtype=np.complex128)
    for kind, w in (
        (BellKind.PHI_PLUS, fidelity),
        (BellKind.PHI_MINUS, rest),
        (BellKind.PSI_PLUS, rest),
        (BellKind.PSI_MINUS, rest),
    ):
        v = bell_vector(kind)
        mat += w * np.outer(v, v.conj())
    return DensityMatrix(mat, check=False)


def dephased_bell(fidelity: float) -> DensityMatrix:
    """Rank-two mixture F PhiPlus + (1-F) PhiMinus, the signature of pure dephasing."""
    if not 0.0 <= fidelity <= 1.0:
        raise ValueError(f"fidelity={fidelity} outside [0, 1]")
    vp = bell_vector(BellKind.PHI_PLUS)
    vm = bell_vector(BellKind.PHI_MINUS)
    mat = fidelity * np.outer(vp, vp.conj()) + (1.0 - fidelity) * np.outer(vm, vm.conj())
    return DensityMatrix(mat, check=False)


def apply_noisy_gate(state: DensityMatrix, gate: GateMatrix, targets, noise: NoiseParams) -> DensityMatrix:
    """Apply a gate, then the depolarizing error matching its arity."""
    out = apply_unitary(state, gate, targets)
    p = noise.p_gate1 if gate.arity == 1 else noise.p_gate2
    if p > 0.0:
        out = apply_channel(out, depolarizing_channel(p, gate.arity), targets)
    return out


def prepare_bell_pair(noise: NoiseParams = NoiseParams()) -> DensityMatrix:
    """PhiPlus prepared by the H + CNOT circuit with noisy gates."""
    state = ground_state(2)
    state = apply_noisy_gate(state, H, (0,), noise)
    state = apply_noisy_gate(state, CNOT, (0, 1), noise)
    return state


def transmit(
    state: DensityMatrix,
    moving_qubit: int,
    channel: ChannelModel,
    noise: NoiseParams,
    ancillas=None,
) -> DensityMatrix:
    """Carry one qubit across `channel.hops` noisy SWAPs.

    The payload is swapped onto ancillas[0], then ancillas[1], and so on;
    after each hop the swapped pair picks up two-qubit depolarizing noise
    with p_gate2 and the moved qubit dephases with p_hop_dephase.  The
    payload ends on the last ancilla used (or stays put for zero hops).

    `ancillas` defaults to the `hops` highest qubit indices in ascending
    order; they must be fresh |0> qubits the caller attached beforehand.
    """
    n = state.n_qubits
    if not 0 <= moving_qubit < n:
        raise ValueError(f"moving qubit {moving_qubit} out of range")
    hops = channel.hops
    if hops == 0:
        return state
    if ancillas is None:
        ancillas = tuple(range(n - hops, n))
    else:
        ancillas = tuple(int(a) for a in ancillas)
    if len(ancillas) < hops or len(set(ancillas)) != len(ancillas):
        raise ValueError("insufficient ancillas for the requested hop count")
    if moving_qubit in ancillas or any(not 0 <= a < n for a in ancillas):
        raise ValueError("insufficient ancillas for the requested hop count")

    dephase = dephasing_channel(noise.p_hop_dephase) if noise.p_hop_dephase > 0 else None
    depol2 = depolarizing_channel(noise.p_gate2, 2) if noise.p_gate2 > 0 else None

    cur = moving_qubit
    out = state
    for k in range(hops):
        nxt = ancillas[k]
        out = apply_unitary(out, SWAP, (cur, nxt))
        if depol2 is not None:
            out = apply_channel(out, depol2, (cur, nxt))
        if dephase is not None:
            out = apply_channel(out, dephase, (nxt,))
        cur = nxt
    return out


def attach_fresh_qubits(state: DensityMatrix, count: int) -> DensityMatrix:
    """Tensor `count` ground-state qubits above the existing register."""
    if count < 0:
        raise ValueError("count must be >= 0")
    if count == 0:
        return state
    return tensor(state, ground_state(count))


def distribute_pair(channel: ChannelModel, noise: NoiseParams) -> DensityMatrix:
    """Prepare a pair locally and send its second qubit down the channel.

    Returns the two-qubit link (kept qubit 0, delivered qubit 1) after the
    transit ancillas are traced out.
    """
    pair = prepare_bell_pair(noise)
    if channel.hops == 0:
        return pair
    state = attach_fresh_qubits(pair, channel.hops)
    state = transmit(state, 1, channel, noise)
    return partial_trace(state, (0, state.n_qubits - 1))


def attempt_generation(channel: ChannelModel, rng: np.random.Generator) -> bool:
    """One heralded generation attempt; True when the photon survives."""
    return bool(rng.random() < channel.p_gen)
