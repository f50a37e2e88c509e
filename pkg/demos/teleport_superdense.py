"""The two textbook uses of a shared Bell pair.

Teleportation moves an unknown qubit with two classical bits; superdense
coding moves two classical bits with one qubit. Both are exact on a
perfect pair and degrade gracefully on a Werner resource.
"""

import numpy as np

from qrepsim import bell_state, fidelity, pure_density, superdense_decode, teleport, werner

rng = np.random.default_rng(5)
v = rng.normal(size=2) + 1j * rng.normal(size=2)
payload = pure_density(v / np.linalg.norm(v))

print("teleportation of one random qubit:")
for f in (1.0, 0.9, 0.75):
    out = teleport(payload, werner(f))
    print(f"  resource Werner({f:.2f}): output fidelity {fidelity(out, payload):.6f}")

print("superdense coding, all four two-bit words over a perfect pair:")
for bits in ((0, 0), (0, 1), (1, 0), (1, 1)):
    dist = superdense_decode(bits, bell_state())
    word = "".join(map(str, bits))
    print(f"  sent {word}: decoded {word} with probability {dist[word]:.6f}")

print("superdense over Werner(0.85): the wrong words soak up the rest")
dist = superdense_decode((1, 0), werner(0.85))
for word in sorted(dist):
    print(f"  decoded {word}: {dist[word]:.6f}")
