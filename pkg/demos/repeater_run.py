"""One nested repeater, both evaluation modes.

Three segments, two-copy pumping before each swap round, mild gate and
readout noise. Exact mode propagates branch-averaged states; sampled mode
realizes every purification copy through its own subtree and restarts
failed heralds, so the two agree in expectation.
"""

from qrepsim import NoiseParams, RepeaterConfig, run_repeater

noise = NoiseParams(p_gate1=0.01, p_meas=0.03)
base = dict(
    segments=3,
    pairs_per_purification=2,
    purification_variant="bennett",
    noise=noise,
    initial_link_fidelity=0.85,
)

exact = run_repeater(RepeaterConfig(**base))
sampled = run_repeater(RepeaterConfig(**base, mode="sampled", trials=20_000, seed=7))

print("exact:")
print(f"  final fidelity {exact.final_fidelity:.6f}, yield {exact.yield_fraction:.6f}")
for rs in exact.per_round:
    print(
        f"  round {rs.round_index}: {rs.fidelity_before_purification:.4f} -> {rs.fidelity_after_purification:.4f}"
        f" (herald {rs.purification_success_probability:.4f}), post-swap {rs.post_swap_fidelity:.4f}"
    )

print("sampled (20000 trials):")
print(
    f"  final fidelity {sampled.final_fidelity:.6f} +/- {sampled.fidelity_stderr:.6f},"
    f" yield {sampled.yield_fraction:.6f} +/- {sampled.yield_stderr:.6f}"
)
print(f"  restarts across all trials: {sampled.restarts}")
