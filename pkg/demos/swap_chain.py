"""Chain entanglement swaps and watch fidelity collapse.

Swapping two Werner(F) links yields F' = F^2 + (1-F)^2 / 3, so a chain of
2^k segments applies the law k times. No purification here; this is the
degradation that makes nesting necessary in the first place.
"""

from qrepsim import bell_state, entanglement_swap, fidelity, werner

F0 = 0.95


def swap_law(f: float) -> float:
    return f * f + (1 - f) ** 2 / 3


state = werner(F0)
predicted = F0
print(f"segment links: Werner({F0})")
print(f"{'segments':>8}  {'measured':>10}  {'law':>10}")
print(f"{1:>8}  {fidelity(state, bell_state()):>10.6f}  {predicted:>10.6f}")
for k in (2, 4, 8):
    state = entanglement_swap(state, state).post_state
    predicted = swap_law(predicted)
    print(f"{k:>8}  {fidelity(state, bell_state()):>10.6f}  {predicted:>10.6f}")

print()
print("after three doublings the link is nearly worthless; distillation")
print("between rounds is what a repeater adds over bare swapping")
