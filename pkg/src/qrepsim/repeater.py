"""Nested purify-then-swap repeater and the integrated demonstration circuit.

The chain is simulated compositionally: every link is a 2-qubit density
matrix and links only ever meet pairwise inside a swap, so exact mode never
holds more than six qubits at once no matter how many segments there are.
Copies consumed by a purification group are drawn from the same link
ensemble, which is exact for expectation values because every map involved
is linear in the density matrix.

RNG stream layout: spawn_rng(seed, 0) drives generation-attempt accounting,
spawn_rng(seed, 1, t) drives sampled trial t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gates import CNOT, H, BellKind, bell_state, bell_vector
from .noise import (
    ChannelModel,
    NoiseParams,
    apply_noisy_gate,
    distribute_pair,
    prepare_bell_pair,
    werner,
)
from .protocols import (
    RX_BACKWARD,
    RX_FORWARD,
    entanglement_swap,
    entanglement_swap_sampled,
    purify_multi,
    purify_multi_sampled,
)
from .rng import spawn_rng
from .states import DensityMatrix, GateMatrix, fidelity, partial_trace, project_and_reduce, tensor

EXACT_QUBIT_BUDGET = 12
# sampled-mode guard against heralds that can never fire
_MAX_RESTARTS_PER_INSTANCE = 100_000

_PHI_VEC = bell_vector(BellKind.PHI_PLUS)


def _link_fidelity(state: DensityMatrix) -> float:
    """Overlap with PhiPlus; equals Uhlmann fidelity for a pure target."""
    return float(np.real(_PHI_VEC.conj() @ state.mat @ _PHI_VEC))


@dataclass(frozen=True)
class RepeaterConfig:
    """Knobs for one nested repeater run.

    hops_per_segment overrides channel.hops when not None.
    pairs_per_purification = 1 disables purification entirely.
    initial_link_fidelity short-circuits physical link generation with a
    Werner state of that fidelity (generation attempts are still counted).
    purify_after_swap adds a second purification stage after each swap
    round, on the freshly lengthened links.
    """

    segments: int = 2
    hops_per_segment: int | None = None
    pairs_per_purification: int = 2
    purification_variant: str = "deutsch"
    noise: NoiseParams = field(default_factory=NoiseParams)
    channel: ChannelModel = field(default_factory=ChannelModel)
    trials: int = 1000
    seed: int = 0
    mode: str = "exact"
    initial_link_fidelity: float | None = None
    purify_after_swap: bool = False

    def __post_init__(self):
        if self.segments < 1:
            raise ValueError("segments must be >= 1")
        if self.hops_per_segment is not None and self.hops_per_segment < 0:
            raise ValueError("hops_per_segment must be >= 0")
        if self.pairs_per_purification < 1:
            raise ValueError("pairs_per_purification must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"mode must be 'exact' or 'sampled', got {self.mode!r}")
        if self.initial_link_fidelity is not None and not 0.0 <= self.initial_link_fidelity <= 1.0:
            raise ValueError("initial_link_fidelity outside [0, 1]")
        if self.mode == "exact" and 2 * self.pairs_per_purification > EXACT_QUBIT_BUDGET:
            raise ValueError(
                f"exact mode qubit budget exceeded: purification group of "
                f"{self.pairs_per_purification} pairs needs "
                f"{2 * self.pairs_per_purification} qubits, budget is {EXACT_QUBIT_BUDGET}"
            )

    @property
    def effective_channel(self) -> ChannelModel:
        if self.hops_per_segment is None:
            return self.channel
        return ChannelModel(
            length_km=self.channel.length_km,
            attenuation_length_km=self.channel.attenuation_length_km,
            hops=self.hops_per_segment,
        )


@dataclass(frozen=True)
class RoundStats:
    round_index: int
    fidelity_before_purification: float
    fidelity_after_purification: float
    purification_success_probability: float
    post_swap_fidelity: float


@dataclass(frozen=True)
class RepeaterReport:
    """final_fidelity and yield_fraction are means over trials in sampled
    mode and exact expectations otherwise; yield counts a trial only when
    every herald in the copy tree fired on the first try.
    attempts_for_generation prices one generation campaign per segment
    (per trial in sampled mode); copy redraws reuse link statistics
    rather than consuming extra campaigns."""

    final_fidelity: float
    yield_fraction: float
    rounds: int
    per_round: tuple[RoundStats, ...]
    attempts_for_generation: int
    restarts: int = 0
    fidelity_stderr: float = 0.0
    yield_stderr: float = 0.0
    trials: int = 1
    mode: str = "exact"


def _round_count(segments: int) -> int:
    # ceil(log2(segments)) without float round-off
    return max(0, (segments - 1).bit_length())


def _elementary_link(config: RepeaterConfig) -> DensityMatrix:
    if config.initial_link_fidelity is not None:
        return werner(config.initial_link_fidelity)
    return distribute_pair(config.effective_channel, config.noise)


def _count_generation_attempts(config: RepeaterConfig, links_needed: int) -> int:
    """Heralded-generation cost: geometric attempts until each link arrives."""
    rng = spawn_rng(config.seed, 0)
    p = config.effective_channel.p_gen
    if links_needed == 0:
        return 0
    return int(rng.geometric(p, size=links_needed).sum())


def _swap_adjacent_exact(states: list[DensityMatrix], noise: NoiseParams) -> list[DensityMatrix]:
    merged = []
    i = 0
    while i + 1 < len(states):
        merged.append(entanglement_swap(states[i], states[i + 1], True, noise).post_state)
        i += 2
    if i < len(states):
        merged.append(states[i])  # odd link out passes through
    return merged


def _pump_instance_counts(rounds: int, n_pur: int, purify_after_swap: bool) -> tuple[list[int], list[int]]:
    """How many times each round's purifications physically run.

    One distilled output consumes n_pur independently produced copies of
    its input, so every purification upstream of round r runs once per
    downstream copy it must supply.  Returns (pre-swap, post-swap) instance
    counts per round, counted per link position.
    """
    pre = [0] * rounds
    post = [0] * rounds
    need = 1  # copies of the round's final output required downstream
    pump = n_pur >= 2
    for r in reversed(range(rounds)):
        if pump and purify_after_swap:
            post[r] = need
            merged_needed = n_pur * need
        else:
            merged_needed = need
        pre[r] = merged_needed
        need = n_pur * merged_needed if pump else merged_needed
    return pre, post


def run_repeater(config: RepeaterConfig) -> RepeaterReport:
    """Distribute segment links, then purify and swap for ceil(log2 n) rounds.

    Each round purifies every live link position (groups of
    pairs_per_purification independently produced copies) and then swaps
    adjacent links pairwise; an odd link out passes through.  Exact mode
    propagates branch-averaged representative states; its yield raises each
    herald probability to the number of times that purification must run to
    feed the downstream copy tree.  Sampled mode realizes the tree per
    trial, restarts a failed purification from freshly drawn copies, and
    reports the no-restart fraction as the yield.
    """
    if config.mode == "sampled":
        return _run_repeater_sampled(config)
    link = _elementary_link(config)
    rounds = _round_count(config.segments)
    states = [link] * config.segments
    n_pur = config.pairs_per_purification
    pre_count, post_count = _pump_instance_counts(rounds, n_pur, config.purify_after_swap)
    yield_acc = 1.0
    per_round: list[RoundStats] = []

    for r in range(rounds):
        before = sum(_link_fidelity(s) for s in states) / len(states)
        if n_pur >= 2:
            purified = []
            round_prob = 1.0
            for s in states:
                res = purify_multi([s] * n_pur, config.purification_variant, config.noise)
                if res.post_state is None:
                    return RepeaterReport(0.0, 0.0, rounds, tuple(per_round), _count_generation_attempts(config, config.segments), trials=config.trials, mode=config.mode)
                purified.append(res.post_state)
                round_prob *= res.success_probability
            states = purified
            yield_acc *= round_prob**pre_count[r]
            after = sum(_link_fidelity(s) for s in states) / len(states)
        else:
            after = before
            round_prob = 1.0
        states = _swap_adjacent_exact(states, config.noise)
        if config.purify_after_swap and n_pur >= 2:
            purified = []
            for s in states:
                res = purify_multi([s] * n_pur, config.purification_variant, config.noise)
                if res.post_state is None:
                    return RepeaterReport(0.0, 0.0, rounds, tuple(per_round), _count_generation_attempts(config, config.segments), trials=config.trials, mode=config.mode)
                purified.append(res.post_state)
                round_prob *= res.success_probability
                yield_acc *= res.success_probability ** post_count[r]
            states = purified
        post_swap = sum(_link_fidelity(s) for s in states) / len(states)
        per_round.append(RoundStats(r, before, after, round_prob, post_swap))

    final = states[0]
    return RepeaterReport(
        final_fidelity=fidelity(final, bell_state()),
        yield_fraction=yield_acc,
        rounds=rounds,
        per_round=tuple(per_round),
        attempts_for_generation=_count_generation_attempts(config, config.segments),
        trials=config.trials,
        mode=config.mode,
    )


def _run_repeater_sampled(config: RepeaterConfig) -> RepeaterReport:
    """Realize the purify-and-swap copy tree independently per trial.

    A distilled link consumes pairs_per_purification independently produced
    copies of its input, so each copy is drawn by re-running the subtree
    that produces it.  A failed herald discards its copies and redraws that
    instance from fresh ones; a trial counts toward the yield only if no
    instance anywhere in its tree restarted.
    """
    link = _elementary_link(config)
    rounds = _round_count(config.segments)
    n_pur = config.pairs_per_purification
    pump = n_pur >= 2
    post_pump = pump and config.purify_after_swap
    catalog: dict = {}

    # live[r] = link positions entering round r; adjacent pairs merge each round
    live = [config.segments]
    for _ in range(rounds):
        live.append((live[-1] + 1) // 2)

    fid_sum = 0.0
    fid_sq = 0.0
    clean_trials = 0
    restarts_total = 0
    # per-round accumulators, means taken per realized instance:
    # [before_sum, n_before, after_sum, n_after, post_sum, n_post, first-try, pumps]
    acc = [[0.0, 0, 0.0, 0, 0.0, 0, 0, 0] for _ in range(rounds)]
    attempts = _count_generation_attempts(config, config.segments * config.trials)

    for t in range(config.trials):
        rng = spawn_rng(config.seed, 1, t)
        trial_restarts = 0

        def pump_instance(produce, stage, record_pre):
            nonlocal trial_restarts
            a = acc[stage]
            local = 0
            while True:
                copies = [produce() for _ in range(n_pur)]
                if record_pre:
                    a[0] += sum(_link_fidelity(c) for c in copies) / n_pur
                    a[1] += 1
                ok, kept = purify_multi_sampled(
                    copies, config.purification_variant, config.noise, rng, catalog
                )
                if ok:
                    if record_pre:
                        a[2] += _link_fidelity(kept)
                        a[3] += 1
                    if local == 0:
                        a[6] += 1
                    a[7] += 1
                    return kept
                local += 1
                trial_restarts += 1
                if local >= _MAX_RESTARTS_PER_INSTANCE:
                    raise RuntimeError("purification herald never fires under this configuration")

        def survivor(r, pos):
            # round r's distilled link at position pos, entering the swap stage
            if not pump:
                s = incoming(r, pos)
                a = acc[r]
                f = _link_fidelity(s)
                a[0] += f
                a[1] += 1
                a[2] += f
                a[3] += 1
                return s
            return pump_instance(lambda: incoming(r, pos), r, True)

        def merged(r, pos):
            # swap-stage output of round r - 1 that feeds round r
            j = 2 * pos
            left = survivor(r - 1, j)
            if j + 1 < live[r - 1]:
                _, out = entanglement_swap_sampled(
                    left, survivor(r - 1, j + 1), config.noise, rng, catalog=catalog
                )
                return out
            return left

        def incoming(r, pos):
            if r == 0:
                return link
            if post_pump:
                out = pump_instance(lambda: merged(r, pos), r - 1, False)
            else:
                out = merged(r, pos)
            a = acc[r - 1]
            a[4] += _link_fidelity(out)
            a[5] += 1
            return out

        f = _link_fidelity(incoming(rounds, 0))
        fid_sum += f
        fid_sq += f * f
        restarts_total += trial_restarts
        if trial_restarts == 0:
            clean_trials += 1

    n = config.trials
    fid_mean = fid_sum / n
    fid_var = max(0.0, (fid_sq - n * fid_mean * fid_mean) / (n - 1)) if n > 1 else 0.0
    yield_mean = clean_trials / n
    per_round = tuple(
        RoundStats(
            r,
            acc[r][0] / acc[r][1] if acc[r][1] else 1.0,
            acc[r][2] / acc[r][3] if acc[r][3] else 1.0,
            (acc[r][6] / acc[r][7]) if acc[r][7] else 1.0,
            acc[r][4] / acc[r][5] if acc[r][5] else 1.0,
        )
        for r in range(rounds)
    )
    return RepeaterReport(
        final_fidelity=fid_mean,
        yield_fraction=yield_mean,
        rounds=rounds,
        per_round=per_round,
        attempts_for_generation=attempts,
        restarts=restarts_total,
        fidelity_stderr=math.sqrt(fid_var / n),
        yield_stderr=math.sqrt(yield_mean * (1.0 - yield_mean) / n),
        trials=n,
        mode="sampled",
    )


@dataclass(frozen=True)
class PaperCircuitResult:
    fidelity: float
    yield_fraction: float
    fidelity_stderr: float = 0.0
    yield_stderr: float = 0.0
    trials: int = 1
    mode: str = "exact"


_CZ = GateMatrix(np.diag([1.0, 1.0, 1.0, -1.0]).astype(np.complex128))


def _demo_line(noise: NoiseParams, channel: ChannelModel) -> DensityMatrix:
    """One long link: local pair, transit, swap onto the remote pair.

    The swap corrections are deferred controlled gates rather than
    classically conditioned Paulis, so readout error cannot corrupt them;
    only the final sacrificial-pair readouts carry p_meas.
    """
    near = distribute_pair(channel, noise)
    state = tensor(near, prepare_bell_pair(noise))  # kept 0, arrived 1, remote (2, 3)
    state = apply_noisy_gate(state, CNOT, (1, 2), noise)
    state = apply_noisy_gate(state, H, (1,), noise)
    state = apply_noisy_gate(state, CNOT, (2, 3), noise)
    state = apply_noisy_gate(state, _CZ, (1, 3), noise)
    return partial_trace(state, (0, 3))


def _demo_branches(lines, noise: NoiseParams):
    """Joint three-pair distillation block of the demonstration circuit.

    All six qubits are held at once: x rotations on every qubit, then the
    kept pair (qubits 0,1) controls CNOTs onto both sacrificial pairs, and
    qubits (2,3,4,5) are read out.  Returns the 16 outcome branches.
    """
    state = tensor(tensor(lines[0], lines[1]), lines[2])
    for q in (0, 2, 4):
        state = apply_noisy_gate(state, RX_FORWARD, (q,), noise)
    for q in (1, 3, 5):
        state = apply_noisy_gate(state, RX_BACKWARD, (q,), noise)
    state = apply_noisy_gate(state, CNOT, (0, 2), noise)
    state = apply_noisy_gate(state, CNOT, (0, 4), noise)
    state = apply_noisy_gate(state, CNOT, (1, 3), noise)
    state = apply_noisy_gate(state, CNOT, (1, 5), noise)
    branches = []
    for code in range(16):
        bits = tuple((code >> (3 - k)) & 1 for k in range(4))
        prob, reduced = project_and_reduce(state, (2, 3, 4, 5), bits)
        branches.append((bits, max(prob, 0.0), reduced))
    return branches


def run_paper_circuit(
    noise: NoiseParams = NoiseParams(),
    channel: ChannelModel = ChannelModel(),
    trials: int = 1000,
    seed: int = 0,
    mode: str = "exact",
) -> PaperCircuitResult:
    """Integrated demonstration: three long links distilled down to one.

    Both endpoints prepare three pairs; one qubit of each near pair rides
    the hop chain, a swap at the far node splices it onto a remote pair,
    and a joint distillation block sacrifices two of the three resulting
    links.  Yield is the herald rate (both sacrificed pairs report matching
    outcomes); fidelity is the survivor's overlap with PhiPlus, conditioned
    on the herald.  Exact mode evaluates all branches; sampled mode draws
    `trials` shots without restarts.
    """
    if mode not in ("exact", "sampled"):
        raise ValueError(f"mode must be 'exact' or 'sampled', got {mode!r}")
    line = _demo_line(noise, channel)
    branches = _demo_branches([line] * 3, noise)
    pm = noise.p_meas
    same = (1.0 - pm) ** 2 + pm**2
    diff = 2.0 * pm * (1.0 - pm)

    if mode == "exact":
        herald_prob = 0.0
        acc = np.zeros((4, 4), dtype=np.complex128)
        for bits, prob, reduced in branches:
            if reduced is None:
                continue
            w = (same if bits[0] == bits[1] else diff) * (same if bits[2] == bits[3] else diff)
            herald_prob += prob * w
            acc += prob * w * reduced.mat
        if herald_prob <= 0.0:
            return PaperCircuitResult(0.0, 0.0, trials=trials, mode=mode)
        post = DensityMatrix(acc / herald_prob, check=False)
        return PaperCircuitResult(fidelity(post, bell_state()), herald_prob, trials=trials, mode=mode)

    probs = np.array([prob for _, prob, _ in branches])
    probs = probs / probs.sum()
    fids = np.array([0.0 if red is None else _link_fidelity(red) for _, _, red in branches])
    bit_table = np.array([bits for bits, _, _ in branches])
    rng = spawn_rng(seed, 1)
    codes = rng.choice(16, size=trials, p=probs)
    flips = rng.random((trials, 4)) < pm
    rec = bit_table[codes] ^ flips
    heralded = (rec[:, 0] == rec[:, 1]) & (rec[:, 2] == rec[:, 3])
    n_ok = int(heralded.sum())
    yield_mean = n_ok / trials
    yield_stderr = math.sqrt(yield_mean * (1.0 - yield_mean) / trials)
    if n_ok == 0:
        return PaperCircuitResult(0.0, 0.0, 0.0, yield_stderr, trials, mode)
    fvals = fids[codes[heralded]]
    fid_mean = float(fvals.mean())
    fid_stderr = float(fvals.std(ddof=1) / math.sqrt(n_ok)) if n_ok > 1 else 0.0
    return PaperCircuitResult(fid_mean, yield_mean, fid_stderr, yield_stderr, trials, mode)
