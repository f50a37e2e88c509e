import math

import numpy as np
import pytest

import oracles as orc
from qrepsim import (
    BellKind,
    ChannelModel,
    NoiseParams,
    apply_channel,
    apply_noisy_gate,
    apply_unitary,
    attach_fresh_qubits,
    attempt_generation,
    bell_projector_weights,
    bell_state,
    dephased_bell,
    dephasing_channel,
    depolarizing_channel,
    distribute_pair,
    fidelity,
    ground_state,
    prepare_bell_pair,
    spawn_rng,
    standard_gate,
    transmit,
    werner,
)

OSWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


class TestParams:
    def test_noise_params_defaults_are_zero(self):
        n = NoiseParams()
        assert (n.p_gate1, n.p_gate2, n.p_hop_dephase, n.p_meas) == (0, 0, 0, 0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"p_gate1": -0.1},
            {"p_gate2": 1.5},
            {"p_hop_dephase": 2.0},
            {"p_meas": -1e-9},
        ],
    )
    def test_noise_params_rejects_out_of_range(self, kwargs):
        with pytest.raises(ValueError):
            NoiseParams(**kwargs)

    def test_channel_model_validation(self):
        with pytest.raises(ValueError):
            ChannelModel(length_km=-1.0)
        with pytest.raises(ValueError):
            ChannelModel(attenuation_length_km=0.0)
        with pytest.raises(ValueError):
            ChannelModel(hops=-1)

    def test_generation_probability(self):
        assert ChannelModel(length_km=0.0).p_gen == 1.0
        c = ChannelModel(length_km=20.0, attenuation_length_km=20.0)
        assert c.p_gen == pytest.approx(math.exp(-1.0), abs=1e-15)
        far = ChannelModel(length_km=100.0, attenuation_length_km=20.0)
        assert far.p_gen == pytest.approx(math.exp(-5.0), abs=1e-15)


class TestChannels:
    @pytest.mark.parametrize("p", [0.0, 0.05, 0.1, 0.3, 1.0])
    def test_dephasing_on_half_a_pair(self, p):
        out = apply_channel(bell_state(), dephasing_channel(p), (1,))
        weights = bell_projector_weights(out)
        assert weights[BellKind.PHI_PLUS] == pytest.approx(1.0 - p, abs=1e-12)
        assert weights[BellKind.PHI_MINUS] == pytest.approx(p, abs=1e-12)

    @pytest.mark.parametrize("p", [0.0, 0.1, 0.4, 1.0])
    def test_depolarizing_1q_on_half_a_pair(self, p):
        out = apply_channel(bell_state(), depolarizing_channel(p, 1), (0,))
        f = fidelity(out, bell_state())
        assert f == pytest.approx(1.0 - 3.0 * p / 4.0, abs=1e-12)

    @pytest.mark.parametrize("p", [0.0, 0.1, 0.4, 1.0])
    def test_depolarizing_2q_mixes_toward_identity(self, p):
        out = apply_channel(bell_state(), depolarizing_channel(p, 2), (0, 1))
        expect = (1.0 - p) * bell_state().mat + p * np.eye(4) / 4.0
        assert np.allclose(out.mat, expect, atol=1e-12)

    def test_channels_match_reference_kraus(self):
        rho = werner(0.8)
        for ch, orc_ops, targets in [
            (dephasing_channel(0.17), orc.o_dephasing(0.17), (1,)),
            (depolarizing_channel(0.23, 1), orc.o_depolarizing_1q(0.23), (0,)),
            (depolarizing_channel(0.23, 2), orc.o_depolarizing_2q(0.23), (0, 1)),
        ]:
            out = apply_channel(rho, ch, targets)
            want = orc.o_kraus(rho.mat, orc_ops, targets, 2)
            assert np.allclose(out.mat, want, atol=1e-12)

    def test_channel_probability_validation(self):
        with pytest.raises(ValueError):
            dephasing_channel(1.2)
        with pytest.raises(ValueError):
            depolarizing_channel(-0.1)
        with pytest.raises(ValueError):
            depolarizing_channel(0.1, arity=3)


class TestStandardStates:
    def test_werner_weights(self):
        w = bell_projector_weights(werner(0.85))
        assert w[BellKind.PHI_PLUS] == pytest.approx(0.85, abs=1e-12)
        for kind in (BellKind.PHI_MINUS, BellKind.PSI_PLUS, BellKind.PSI_MINUS):
            assert w[kind] == pytest.approx(0.05, abs=1e-12)
        assert fidelity(werner(0.85), bell_state()) == pytest.approx(0.85, abs=1e-12)

    def test_dephased_bell_weights(self):
        w = bell_projector_weights(dephased_bell(0.85))
        assert w[BellKind.PHI_PLUS] == pytest.approx(0.85, abs=1e-12)
        assert w[BellKind.PHI_MINUS] == pytest.approx(0.15, abs=1e-12)
        assert w[BellKind.PSI_PLUS] == pytest.approx(0.0, abs=1e-12)

    def test_range_validation(self):
        with pytest.raises(ValueError):
            werner(1.01)
        with pytest.raises(ValueError):
            dephased_bell(-0.01)


class TestPreparation:
    def test_noiseless_preparation_is_exact(self):
        pair = prepare_bell_pair(NoiseParams())
        assert fidelity(pair, bell_state()) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("p1,p2", [(0.0, 0.02), (0.03, 0.0), (0.05, 0.02), (0.2, 0.1)])
    def test_noisy_preparation_fidelity(self, p1, p2):
        # depolarized H leaves |+> with weight 1 - p1/2, then the CNOT error
        # mixes toward I/4
        pair = prepare_bell_pair(NoiseParams(p_gate1=p1, p_gate2=p2))
        want = (1.0 - p2) * (1.0 - p1 / 2.0) + p2 / 4.0
        assert fidelity(pair, bell_state()) == pytest.approx(want, abs=1e-12)

    def test_noisy_preparation_is_bell_diagonal(self):
        pair = prepare_bell_pair(NoiseParams(p_gate1=0.1, p_gate2=0.05))
        total = sum(bell_projector_weights(pair).values())
        assert total == pytest.approx(1.0, abs=1e-12)
        # all coherences between Bell basis vectors vanish
        vecs = [orc.bell_vec(f, x) for f in (0, 1) for x in (0, 1)]
        for i, a in enumerate(vecs):
            for j, b in enumerate(vecs):
                if i != j:
                    assert abs(a.conj() @ pair.mat @ b) < 1e-12

    def test_apply_noisy_gate_with_zero_noise_is_unitary(self):
        rho = werner(0.8)
        g = standard_gate("cnot")
        a = apply_noisy_gate(rho, g, (0, 1), NoiseParams())
        b = apply_unitary(rho, g, (0, 1))
        assert np.allclose(a.mat, b.mat, atol=1e-14)


class TestTransit:
    @pytest.mark.parametrize("p", [0.05, 0.1, 0.2])
    @pytest.mark.parametrize("hops", [0, 1, 2, 3, 6])
    def test_pure_dephasing_closed_form(self, p, hops):
        noise = NoiseParams(p_hop_dephase=p)
        channel = ChannelModel(hops=hops)
        link = distribute_pair(channel, noise)
        want = orc.transit_fidelity(p, hops)
        assert fidelity(link, bell_state()) == pytest.approx(want, abs=1e-11)

    def test_gate_noise_geometric_decay(self):
        # each hop mixes the moving qubit toward I/2 with weight p2, so the
        # PhiPlus weight contracts by (1 - p2) per hop around 1/4
        p1, p2, pd, hops = 0.02, 0.04, 0.1, 3
        noise = NoiseParams(p_gate1=p1, p_gate2=p2, p_hop_dephase=pd)
        link = distribute_pair(ChannelModel(hops=hops), noise)
        f0 = (1.0 - p2) * (1.0 - p1 / 2.0) + p2 / 4.0
        g0 = (1.0 - p2) * (p1 / 2.0) + p2 / 4.0
        q = (1.0 - (1.0 - 2.0 * pd) ** hops) / 2.0
        dephased = f0 * (1.0 - q) + g0 * q
        want = (1.0 - p2) ** hops * dephased + (1.0 - (1.0 - p2) ** hops) / 4.0
        assert fidelity(link, bell_state()) == pytest.approx(want, abs=1e-11)

    @pytest.mark.parametrize("hops", [1, 2, 3])
    def test_full_register_against_reference(self, hops):
        # replay preparation and transit step by step with the reference
        # engine and compare the delivered two-qubit matrix elementwise
        p1, p2, pd = 0.03, 0.05, 0.08
        noise = NoiseParams(p_gate1=p1, p_gate2=p2, p_hop_dephase=pd)
        link = distribute_pair(ChannelModel(hops=hops), noise)

        n = 2 + hops
        dim = 2**n
        rho = np.zeros((dim, dim), dtype=complex)
        rho[0, 0] = 1.0
        rho = orc.o_apply(rho, orc.OH, (0,), n)
        rho = orc.o_kraus(rho, orc.o_depolarizing_1q(p1), (0,), n)
        rho = orc.o_apply(rho, orc.OCNOT, (0, 1), n)
        rho = orc.o_kraus(rho, orc.o_depolarizing_2q(p2), (0, 1), n)
        cur = 1
        for k in range(hops):
            nxt = 2 + k
            rho = orc.o_apply(rho, OSWAP, (cur, nxt), n)
            rho = orc.o_kraus(rho, orc.o_depolarizing_2q(p2), (cur, nxt), n)
            rho = orc.o_kraus(rho, orc.o_dephasing(pd), (nxt,), n)
            cur = nxt
        want = orc.o_partial_trace(rho, (0, n - 1), n)
        assert np.allclose(link.mat, want, atol=1e-12)

    def test_zero_hops_is_identity(self):
        rho = werner(0.9)
        out = transmit(rho, 1, ChannelModel(hops=0), NoiseParams(p_hop_dephase=0.5))
        assert np.allclose(out.mat, rho.mat)

    def test_transmit_ancilla_validation(self):
        noise = NoiseParams()
        chan = ChannelModel(hops=2)
        rho = attach_fresh_qubits(werner(0.9), 2)
        with pytest.raises(ValueError, match="insufficient ancillas"):
            transmit(rho, 1, chan, noise, ancillas=(3,))
        with pytest.raises(ValueError, match="insufficient ancillas"):
            transmit(rho, 1, chan, noise, ancillas=(3, 3))
        with pytest.raises(ValueError, match="insufficient ancillas"):
            transmit(rho, 1, chan, noise, ancillas=(1, 2))
        with pytest.raises(ValueError, match="insufficient ancillas"):
            transmit(rho, 1, chan, noise, ancillas=(2, 7))
        with pytest.raises(ValueError, match="out of range"):
            transmit(rho, 9, chan, noise)
        # not enough fresh qubits in the register for the default layout
        small = werner(0.9)
        with pytest.raises(ValueError, match="insufficient ancillas"):
            transmit(small, 1, chan, noise)

    def test_attach_fresh_qubits(self):
        rho = attach_fresh_qubits(werner(0.9), 2)
        assert rho.n_qubits == 4
        assert attach_fresh_qubits(werner(0.9), 0).n_qubits == 2
        with pytest.raises(ValueError):
            attach_fresh_qubits(werner(0.9), -1)
        # the attached qubits start in |0>
        diag = np.real(np.diag(rho.mat))
        assert diag[4:].sum() == pytest.approx(0.0, abs=1e-14)

    def test_distribute_pair_zero_hops(self):
        noise = NoiseParams(p_gate1=0.05)
        a = distribute_pair(ChannelModel(hops=0), noise)
        b = prepare_bell_pair(noise)
        assert np.allclose(a.mat, b.mat)


class TestGeneration:
    def test_attempt_generation_is_deterministic_per_seed(self):
        chan = ChannelModel(length_km=20.0)
        a = [attempt_generation(chan, spawn_rng(7, 0)) for _ in range(1)]
        b = [attempt_generation(chan, spawn_rng(7, 0)) for _ in range(1)]
        assert a == b
        rng1, rng2 = spawn_rng(7, 0), spawn_rng(7, 0)
        seq1 = [attempt_generation(chan, rng1) for _ in range(50)]
        seq2 = [attempt_generation(chan, rng2) for _ in range(50)]
        assert seq1 == seq2

    def test_attempt_generation_rate(self):
        chan = ChannelModel(length_km=20.0, attenuation_length_km=20.0)
        rng = spawn_rng(11, 0)
        n = 20_000
        hits = sum(attempt_generation(chan, rng) for _ in range(n))
        p = math.exp(-1.0)
        sigma = math.sqrt(p * (1.0 - p) / n)
        assert abs(hits / n - p) < 4.0 * sigma

    def test_sure_thing_channel(self):
        chan = ChannelModel(length_km=0.0)
        rng = spawn_rng(3, 0)
        assert all(attempt_generation(chan, rng) for _ in range(100))
