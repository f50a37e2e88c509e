"""Watch a Bell pair degrade as one half rides through a dephasing channel.

Each hop applies a phase flip with probability p, so the Phi+ weight decays
geometrically toward 1/2. The printed closed form is (1 + (1-2p)^k)/2.
"""

from qrepsim import ChannelModel, NoiseParams, bell_state, distribute_pair, fidelity

P = 0.1

print(f"per-hop dephasing p = {P}")
print(f"{'hops':>4}  {'fidelity':>10}  {'closed form':>11}")
for hops in range(9):
    chan = ChannelModel(hops=hops)
    noise = NoiseParams(p_hop_dephase=P)
    state = distribute_pair(chan, noise)
    f = fidelity(state, bell_state())
    law = (1 + (1 - 2 * P) ** hops) / 2
    print(f"{hops:>4}  {f:>10.6f}  {law:>11.6f}")
print("the pair is useless once fidelity reaches 1/2: at that point it")
print("carries no phase correlation at all")
