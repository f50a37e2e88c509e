"""Two-party entanglement protocols: consumption, swapping and purification.

Layout conventions used throughout: in any multi-pair register, even qubits
belong to Alice and odd qubits to Bob; pair k occupies qubits (2k, 2k+1).
Pauli corrections conditioned on classical outcomes are treated as frame
updates and therefore cost no gate noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gates import (
    CNOT,
    H,
    X,
    Z,
    BellKind,
    bell_measure,
    bell_projector_weights,
    bell_state,
    rx_gate,
)
from .noise import NoiseParams, apply_noisy_gate, werner
from .states import (
    DensityMatrix,
    GateMatrix,
    NULL_BRANCH_PROB,
    apply_unitary,
    fidelity,
    measure,
    partial_trace,
    project_and_reduce,
    tensor,
)

RX_FORWARD = rx_gate(math.pi / 2)
RX_BACKWARD = rx_gate(-math.pi / 2)

_ZX = GateMatrix(Z.mat @ X.mat)

# correction that returns a Bell-measured branch to PhiPlus: Z^phase X^parity
_CORRECTIONS: dict[BellKind, GateMatrix | None] = {
    BellKind.PHI_PLUS: None,
    BellKind.PSI_PLUS: X,
    BellKind.PHI_MINUS: Z,
    BellKind.PSI_MINUS: _ZX,
}


@dataclass(frozen=True)
class PurifyResult:
    """Herald probability, conditioned kept pair and its PhiPlus fidelity."""

    success_probability: float
    post_state: DensityMatrix | None
    fidelity_after: float


@dataclass(frozen=True)
class SwapResult:
    post_state: DensityMatrix
    outcome_distribution: dict[BellKind, float]


@dataclass(frozen=True)
class RecurrenceResult:
    rounds: tuple[PurifyResult, ...]
    compound_yield: float


def _apply_correction(state: DensityMatrix, kind: BellKind, qubit: int) -> DensityMatrix:
    gate = _CORRECTIONS[kind]
    if gate is None:
        return state
    return apply_unitary(state, gate, (qubit,))


def teleport(payload: DensityMatrix, resource: DensityMatrix) -> DensityMatrix:
    """Send a one-qubit state through a shared pair.

    The payload and the near half of the resource are measured in the Bell
    basis; each branch applies its Pauli correction on the far half and the
    branches are averaged with their Born weights.  A PhiPlus resource
    reproduces the payload exactly; noisy resources degrade it.
    """
    if payload.n_qubits != 1:
        raise ValueError("payload must be a single qubit")
    if resource.n_qubits != 2:
        raise ValueError("resource must be a two-qubit state")
    state = tensor(payload, resource)  # payload 0, resource (1, 2)
    acc = np.zeros((2, 2), dtype=np.complex128)
    for kind, prob, branch in bell_measure(state, 0, 1):
        if branch is None:
            continue
        corrected = _apply_correction(branch, kind, 2)
        acc += prob * partial_trace(corrected, (2,)).mat
    return DensityMatrix(acc, check=False)


def superdense_decode(bits, resource: DensityMatrix) -> dict[str, float]:
    """Encode two classical bits on one half of a pair and decode them.

    bits = (phase_bit, parity_bit).  The sender applies Z^phase X^parity to
    qubit 0, the receiver measures in the Bell basis; returns the decoded
    bit-pair distribution.  A perfect PhiPlus resource decodes exactly.
    """
    b1, b2 = (int(b) for b in bits)
    if b1 not in (0, 1) or b2 not in (0, 1):
        raise ValueError(f"bits must be 0 or 1, got {bits!r}")
    if resource.n_qubits != 2:
        raise ValueError("resource must be a two-qubit state")
    state = resource
    if b2:
        state = apply_unitary(state, X, (0,))
    if b1:
        state = apply_unitary(state, Z, (0,))
    dist = {"00": 0.0, "01": 0.0, "10": 0.0, "11": 0.0}
    for kind, prob, _branch in bell_measure(state, 0, 1):
        dist[f"{kind.phase_bit}{kind.parity_bit}"] += prob
    return dist


def extract_key_bit(resource: DensityMatrix, rng: np.random.Generator) -> tuple[int, int]:
    """Measure both halves of a pair; returns (near bit, far bit)."""
    if resource.n_qubits != 2:
        raise ValueError("resource must be a two-qubit state")
    rec_a, post = measure(resource, 0, rng)
    rec_b, _ = measure(post, 1, rng)
    return rec_a.outcome, rec_b.outcome


def _readout_flip_probs(p_meas: float) -> tuple[float, float]:
    """P(two recorded bits agree) given the true bits agree / disagree."""
    same = (1.0 - p_meas) ** 2 + p_meas**2
    diff = 2.0 * p_meas * (1.0 - p_meas)
    return same, diff


def entanglement_swap(
    left: DensityMatrix,
    right: DensityMatrix,
    apply_correction: bool = True,
    noise: NoiseParams | None = None,
) -> SwapResult:
    """Fuse two links that share a middle node into one longer link.

    The middle qubits (far half of `left`, near half of `right`) are
    measured in the Bell basis and, when `apply_correction` is set, the
    matching Pauli correction is applied to the surviving right qubit.  The
    returned post state is the branch-weighted average over outcomes; the
    distribution is over recorded outcomes, which differ from the true ones
    when noise.p_meas > 0.
    """
    if left.n_qubits != 2 or right.n_qubits != 2:
        raise ValueError("both links must be two-qubit states")
    noise = noise or NoiseParams()
    probs, reduceds = _swap_branches(left, right, noise)

    pm = noise.p_meas
    acc = np.zeros((4, 4), dtype=np.complex128)
    recorded_dist = {kind: 0.0 for kind in BellKind}
    for code in range(4):
        true_bits = (code >> 1, code & 1)
        prob, reduced = probs[code], reduceds[code]
        for r1 in (0, 1):
            for r2 in (0, 1):
                w = (pm if r1 != true_bits[0] else 1 - pm) * (pm if r2 != true_bits[1] else 1 - pm)
                if w == 0.0:
                    continue
                rec_kind = BellKind.from_bits(r1, r2)
                recorded_dist[rec_kind] += prob * w
                if reduced is None:
                    continue
                out = reduced
                if apply_correction:
                    out = _apply_correction(out, rec_kind, 1)
                acc += prob * w * out.mat
    return SwapResult(DensityMatrix(acc, check=False), recorded_dist)


def _swap_branches(left: DensityMatrix, right: DensityMatrix, noise: NoiseParams, catalog: dict | None = None):
    """True-outcome probabilities and reduced outer pairs for one swap."""
    if catalog is not None:
        key = ("swap", left.mat.tobytes(), right.mat.tobytes())
        hit = catalog.get(key)
        if hit is not None:
            return hit
    state = tensor(left, right)
    if noise.p_gate1 > 0 or noise.p_gate2 > 0:
        state = apply_noisy_gate(state, CNOT, (1, 2), noise)
        state = apply_noisy_gate(state, H, (1,), noise)
    else:
        state = apply_unitary(state, CNOT, (1, 2))
        state = apply_unitary(state, H, (1,))
    probs = []
    reduceds = []
    for code in range(4):
        prob, reduced = project_and_reduce(state, (1, 2), (code >> 1, code & 1))
        probs.append(max(prob, 0.0))
        reduceds.append(reduced)
    out = (probs, reduceds)
    if catalog is not None:
        catalog[key] = out
    return out


def entanglement_swap_sampled(
    left: DensityMatrix,
    right: DensityMatrix,
    noise: NoiseParams,
    rng: np.random.Generator,
    apply_correction: bool = True,
    catalog: dict | None = None,
) -> tuple[BellKind, DensityMatrix]:
    """One sampled swap: draws the Bell outcome and readout flips.

    Returns (recorded outcome, post state conditioned on the true outcome
    with the correction chosen by the recorded one).  `catalog` is an
    optional dict reused across calls to memoize branch decompositions.
    """
    if left.n_qubits != 2 or right.n_qubits != 2:
        raise ValueError("both links must be two-qubit states")
    probs, reduceds = _swap_branches(left, right, noise, catalog)
    total = sum(probs)
    code = int(rng.choice(4, p=[p / total for p in probs]))
    true_bits = (code >> 1, code & 1)
    pm = noise.p_meas
    r1 = true_bits[0] ^ int(rng.random() < pm)
    r2 = true_bits[1] ^ int(rng.random() < pm)
    rec_kind = BellKind.from_bits(r1, r2)
    out = reduceds[code]
    if apply_correction:
        out = _apply_correction(out, rec_kind, 1)
    return rec_kind, out


# --- purification ---


def _twirl_to_werner(state: DensityMatrix) -> DensityMatrix:
    """Symmetrize a pair to Werner form with the same PhiPlus weight."""
    return werner(bell_projector_weights(state)[BellKind.PHI_PLUS])


def _pump_step_state(kept: DensityMatrix, fresh: DensityMatrix, variant: str, noise: NoiseParams) -> DensityMatrix:
    """Rotations plus bilateral CNOTs for one purification step.

    Register: kept (0, 1), fresh (2, 3); Alice holds the even qubits.  The
    kept pair controls, the fresh pair is sacrificed.
    """
    state = tensor(kept, fresh)
    if variant == "deutsch":
        for q in (0, 2):
            state = apply_noisy_gate(state, RX_FORWARD, (q,), noise)
        for q in (1, 3):
            state = apply_noisy_gate(state, RX_BACKWARD, (q,), noise)
    state = apply_noisy_gate(state, CNOT, (0, 2), noise)
    state = apply_noisy_gate(state, CNOT, (1, 3), noise)
    return state


def _pump_step_exact(
    kept: DensityMatrix, fresh: DensityMatrix, variant: str, noise: NoiseParams
) -> tuple[float, DensityMatrix | None]:
    """Herald probability and conditioned kept pair for one step."""
    probs, reduceds = _pump_branches(kept, fresh, variant, noise)
    same, diff = _readout_flip_probs(noise.p_meas)
    step_prob = 0.0
    acc = np.zeros((4, 4), dtype=np.complex128)
    for code in range(4):
        a, b = code >> 1, code & 1
        prob, reduced = probs[code], reduceds[code]
        if reduced is None:
            continue
        w = same if a == b else diff
        if w == 0.0:
            continue
        step_prob += prob * w
        acc += prob * w * reduced.mat
    if step_prob < NULL_BRANCH_PROB:
        return step_prob, None
    return step_prob, DensityMatrix(acc / step_prob, check=False)


def _check_variant(variant: str) -> str:
    v = variant.strip().lower()
    if v not in ("bennett", "deutsch"):
        raise ValueError(f"unknown purification variant {variant!r}")
    return v


def _check_pairs(pairs) -> list[DensityMatrix]:
    pairs = list(pairs)
    if len(pairs) < 2:
        raise ValueError("purification needs at least two pairs")
    for p in pairs:
        if not isinstance(p, DensityMatrix) or p.n_qubits != 2:
            raise ValueError("every pair must be a two-qubit DensityMatrix")
    return pairs


def purify_multi(pairs, variant: str = "deutsch", noise: NoiseParams = NoiseParams()) -> PurifyResult:
    """Distill one pair out of n by sequential heralded pumping.

    Pair 0 is kept.  Each remaining pair is consumed in turn: variant
    rotations (x rotations by +/- pi/2 for `deutsch`, none for `bennett`),
    bilateral CNOTs from the kept pair onto the sacrificial one, then both
    sacrificial qubits are read out.  The protocol succeeds only when
    Alice's and Bob's recorded outcome strings agree on every position.

    The `bennett` variant symmetrizes the kept pair back to Werner form
    between steps, matching its Werner-input requirement; `deutsch` does
    not and therefore also purifies rank-two dephased inputs.

    Returns the joint herald probability, the kept pair conditioned on
    success, and its PhiPlus fidelity (0.0 when the herald never fires).
    """
    pairs = _check_pairs(pairs)
    variant = _check_variant(variant)
    kept: DensityMatrix | None = pairs[0]
    total = 1.0
    for i, fresh in enumerate(pairs[1:]):
        if kept is None:
            total = 0.0
            break
        if variant == "bennett" and i > 0:
            kept = _twirl_to_werner(kept)
        step_prob, kept = _pump_step_exact(kept, fresh, variant, noise)
        total *= step_prob
    if kept is None or total < NULL_BRANCH_PROB:
        return PurifyResult(max(total, 0.0), None, 0.0)
    return PurifyResult(total, kept, fidelity(kept, bell_state()))


def purify_bennett(pair_a: DensityMatrix, pair_b: DensityMatrix, noise: NoiseParams = NoiseParams()) -> PurifyResult:
    """Single parity-check distillation step; assumes Werner-form inputs."""
    return purify_multi([pair_a, pair_b], "bennett", noise)


def purify_deutsch(pair_a: DensityMatrix, pair_b: DensityMatrix, noise: NoiseParams = NoiseParams()) -> PurifyResult:
    """Distillation step with x rotations first; works on non-Werner inputs."""
    return purify_multi([pair_a, pair_b], "deutsch", noise)


def _pump_branches(kept: DensityMatrix, fresh: DensityMatrix, variant: str, noise: NoiseParams, catalog: dict | None = None):
    """True-outcome probabilities and conditioned kept pairs for one step."""
    if catalog is not None:
        key = ("pump", variant, kept.mat.tobytes(), fresh.mat.tobytes())
        hit = catalog.get(key)
        if hit is not None:
            return hit
    state = _pump_step_state(kept, fresh, variant, noise)
    probs = []
    reduceds = []
    for code in range(4):
        prob, reduced = project_and_reduce(state, (2, 3), (code >> 1, code & 1))
        probs.append(max(prob, 0.0))
        reduceds.append(reduced)
    out = (probs, reduceds)
    if catalog is not None:
        catalog[key] = out
    return out


def purify_multi_sampled(
    pairs,
    variant: str,
    noise: NoiseParams,
    rng: np.random.Generator,
    catalog: dict | None = None,
) -> tuple[bool, DensityMatrix | None]:
    """Sampled counterpart of purify_multi.

    Measurement outcomes are drawn from their exact branch distribution and
    readout flips with p_meas; returns (herald fired, kept state conditioned
    on the drawn true outcomes).  A recorded mismatch aborts immediately.
    `catalog` memoizes branch decompositions across repeated calls.
    """
    pairs = _check_pairs(pairs)
    variant = _check_variant(variant)
    pm = noise.p_meas
    kept: DensityMatrix | None = pairs[0]
    for i, fresh in enumerate(pairs[1:]):
        if kept is None:
            return False, None
        if variant == "bennett" and i > 0:
            kept = _twirl_to_werner(kept)
        probs, reduceds = _pump_branches(kept, fresh, variant, noise, catalog)
        total = sum(probs)
        code = int(rng.choice(4, p=[p / total for p in probs]))
        a, b = code >> 1, code & 1
        rec_a = a ^ int(rng.random() < pm)
        rec_b = b ^ int(rng.random() < pm)
        if rec_a != rec_b:
            return False, None
        kept = reduceds[code]
    return True, kept


def purify_recurrence(
    initial: DensityMatrix,
    schedule,
    variant: str = "deutsch",
    noise: NoiseParams = NoiseParams(),
) -> RecurrenceResult:
    """Iterated distillation: each round pumps copies of the previous output.

    `schedule` lists the group size per round (all >= 2).  Round r consumes
    `schedule[r]` copies of the round r-1 state, so one final pair costs
    prod(schedule) inputs; the compound yield multiplies each round's herald
    probability once per downstream copy it must supply.
    """
    schedule = [int(s) for s in schedule]
    if not schedule:
        raise ValueError("schedule must name at least one round")
    if any(s < 2 for s in schedule):
        raise ValueError("every round needs at least two pairs")
    state: DensityMatrix | None = initial
    rounds: list[PurifyResult] = []
    for n in schedule:
        if state is None:
            rounds.append(PurifyResult(0.0, None, 0.0))
            continue
        res = purify_multi([state] * n, variant, noise)
        rounds.append(res)
        state = res.post_state
    compound = 1.0
    for r, res in enumerate(rounds):
        copies_needed = 1
        for later in schedule[r + 1 :]:
            copies_needed *= later
        compound *= res.success_probability**copies_needed
    return RecurrenceResult(tuple(rounds), compound)
