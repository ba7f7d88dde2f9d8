import numpy as np
import pytest

from ftnetlab.activations import HOLSIN, IDENTITY, RELU, ZRELU, apply_real, induced_imag
from ftnetlab.cli import (
    assembly_structural_gap,
    random_additive,
    random_crnet,
    random_dods_stages,
    random_relu_fnn,
    random_relu_rnn,
    relative_gap,
)
from ftnetlab.constructions import (
    EMBEDDING_CSV_HEADER,
    EmbeddingReport,
    ReadoutStage,
    StateStage,
    additive_to_rftnet,
    assemble_dods_additive,
    crnet_to_fftnet,
    crnet_to_rftnet,
    dods_stage_trajectories,
    fnn_to_fftnet,
    pad_row_independent,
    reports_to_csv,
    rnn_timepoint_to_fnn,
    rnn_to_rftnet,
)
from ftnetlab.errors import ContractViolationError, DegenerateInputError
from ftnetlab.models import (
    AdditiveFTNetParams,
    FNNParams,
    RNNParams,
    eval_additive,
    eval_additive_many,
    eval_crnet_many,
    eval_fftnet,
    eval_fftnet_many,
    eval_fnn,
    eval_fnn_many,
    eval_rftnet,
    eval_rftnet_many,
    eval_rnn,
    eval_rnn_many,
)
from ftnetlab.numerics import numerical_rank

EXACT = 1e-12


class TestFnnEmbedding:
    def test_identity_fnn_pass_region(self):
        f = FNNParams(1, 1, [[1.0]], [0.0], [1.0], RELU)
        g = fnn_to_fftnet(f, mode="zrelu")
        assert eval_fftnet(g, 0.5) == pytest.approx(0.5)
        assert eval_fnn(f, 0.5) == pytest.approx(0.5)

    def test_identity_fnn_gated_region(self):
        f = FNNParams(1, 1, [[1.0]], [0.0], [1.0], RELU)
        g = fnn_to_fftnet(f, mode="zrelu")
        assert eval_fftnet(g, -0.5) == 0.0
        assert eval_fnn(f, -0.5) == 0.0

    def test_width_formula(self, rng):
        for _ in range(20):
            f = random_relu_fnn(rng)
            g = fnn_to_fftnet(f, mode="zrelu")
            assert g.H == max(f.HF, f.I + 1)

    @pytest.mark.parametrize("mode", ["zrelu", "induced"])
    def test_randomized_exactness(self, mode, rng):
        worst = 0.0
        for _ in range(25):
            f = random_relu_fnn(rng)
            c = float(rng.uniform(0.25, 2.0))
            g = fnn_to_fftnet(f, c=c, mode=mode,
                              target_activation=ZRELU if mode == "induced" else None)
            x = rng.uniform(-2, 2, size=(100, f.I))
            worst = max(worst, relative_gap(eval_fftnet_many(g, x), eval_fnn_many(f, x)))
        assert worst <= EXACT

    def test_activation_mismatch_rejected(self):
        f = FNNParams(1, 1, [[1.0]], [0.0], [1.0], IDENTITY)
        with pytest.raises(ContractViolationError):
            fnn_to_fftnet(f, mode="zrelu")
        with pytest.raises(ContractViolationError):
            fnn_to_fftnet(f, c=1.0, mode="induced", target_activation=ZRELU)

    def test_induced_identity_target(self):
        # a linear network embeds against the complex identity at any height
        f = FNNParams(2, 3, [[1.0, 0.5], [0.0, 2.0], [1.0, 1.0]],
                      [0.1, -0.2, 0.0], [1.0, -1.0, 0.5], IDENTITY)
        g = fnn_to_fftnet(f, c=0.7, mode="induced", target_activation=IDENTITY)
        for x in ([0.3, -0.4], [1.5, 2.0]):
            assert eval_fftnet(g, x) == pytest.approx(eval_fnn(f, x), rel=1e-13)

    def test_unknown_mode(self):
        f = FNNParams(1, 1, [[1.0]], [0.0], [1.0], RELU)
        with pytest.raises(ContractViolationError):
            fnn_to_fftnet(f, mode="exotic")


class TestAdditiveEmbedding:
    def test_zero_network(self):
        h = 3
        a = AdditiveFTNetParams(2, h, np.zeros((h, 2)), np.zeros((h, h)), np.zeros(h),
                                np.zeros(h), np.zeros(h), ZRELU, 1.0)
        g = additive_to_rftnet(a)
        assert g.H == 2 + h + 1
        np.testing.assert_array_equal(eval_rftnet(g, np.ones((5, 2))), np.zeros(5))

    def test_randomized_exactness_and_receptor(self, rng):
        worst = 0.0
        for _ in range(25):
            a = random_additive(rng)
            g = additive_to_rftnet(a)
            assert g.H == a.I + a.Hplus + 1
            xs = rng.uniform(-1, 1, size=(10, 5, a.I))
            src, _, qs = eval_additive_many(a, xs, return_states=True)
            tgt, _, rec = eval_rftnet_many(g, xs, return_trajectory=True)
            worst = max(worst, relative_gap(tgt, src),
                        float(np.max(np.abs(rec[:, :, a.I:a.I + a.Hplus] - qs))),
                        float(np.max(np.abs(rec[:, :, :a.I]))),
                        float(np.max(np.abs(rec[:, :, -1]))))
        assert worst <= EXACT

    def test_memoryless_receptor_mirrors_per_step_restriction(self, rng):
        h, i = 4, 2
        a = AdditiveFTNetParams(i, h, rng.standard_normal((h, i)), np.zeros((h, h)),
                                rng.standard_normal(h), rng.standard_normal(h),
                                np.zeros(h), ZRELU, 1.0)
        g = additive_to_rftnet(a)
        xs = rng.standard_normal((3, i))
        src = eval_additive(a, xs)
        tgt, _, rec = eval_rftnet(g, xs, return_trajectory=True)
        np.testing.assert_allclose(tgt, src, rtol=1e-12)
        for t in range(3):
            u = a.A @ xs[t] - a.zeta
            expected = induced_imag(a.base_activation, a.c, u, "imag_arg_real_bias")
            np.testing.assert_allclose(rec[t, i:i + h], expected, atol=1e-13)


class TestCrnetEmbeddings:
    def test_single_unit_example(self):
        crn = random_crnet(np.random.default_rng(0), i_choices=(2,), hmax=1)
        g = crnet_to_fftnet(crn)
        x = np.array([[1.0, 1.0]])
        assert eval_fftnet_many(g, x)[0] == pytest.approx(eval_crnet_many(crn, x)[0],
                                                          rel=1e-12)

    def test_gated_imaginary_readout(self):
        from ftnetlab.models import CRNetParams
        from ftnetlab.numerics import ComplexMatrix, ComplexVector

        crn = CRNetParams(2, 1, ComplexMatrix([[1.0]], [[0.0]]),
                          ComplexVector([0.0], [0.0]), ComplexVector([0.0], [1.0]),
                          ZRELU)
        g = crnet_to_fftnet(crn)
        # tau((1, -1)) = 1 - i is gated, so both paths give 0
        x = np.array([[1.0, -1.0]])
        assert eval_crnet_many(crn, x)[0] == 0.0
        assert eval_fftnet_many(g, x)[0] == 0.0

    def test_feedforward_exactness(self, rng):
        worst = 0.0
        for _ in range(25):
            crn = random_crnet(rng)
            g = crnet_to_fftnet(crn)
            assert g.H == max(2 * crn.HC, crn.I + 1)
            x = rng.uniform(-2, 2, size=(100, crn.I))
            worst = max(worst, relative_gap(eval_fftnet_many(g, x),
                                            eval_crnet_many(crn, x)))
        assert worst <= EXACT

    def test_recurrent_single_step_matches_feedforward(self, rng):
        crn = random_crnet(rng)
        gf = crnet_to_fftnet(crn)
        gr = crnet_to_rftnet(crn)
        assert gr.H == 2 * crn.HC + crn.I + 1
        x = rng.uniform(-2, 2, size=(20, crn.I))
        np.testing.assert_allclose(eval_rftnet_many(gr, x[:, None, :])[:, 0],
                                   eval_fftnet_many(gf, x), rtol=1e-12, atol=1e-12)

    def test_recurrent_per_step_exactness(self, rng):
        worst = 0.0
        for _ in range(15):
            crn = random_crnet(rng)
            gr = crnet_to_rftnet(crn)
            xs = rng.uniform(-2, 2, size=(10, 6, crn.I))
            tgt, _, rec = eval_rftnet_many(gr, xs, return_trajectory=True)
            src = np.stack([eval_crnet_many(crn, xs[:, t, :]) for t in range(6)], axis=1)
            worst = max(worst, relative_gap(tgt, src),
                        float(np.max(np.abs(rec[:, :, :crn.I]))),
                        float(np.max(np.abs(rec[:, :, -1]))))
        assert worst <= EXACT

    def test_non_gate_activation_rejected(self, rng):
        crn = random_crnet(rng)
        bad = type(crn)(crn.I, crn.HC, crn.WC, crn.bC, crn.alphaC, HOLSIN)
        with pytest.raises(ContractViolationError):
            crnet_to_fftnet(bad)
        with pytest.raises(ContractViolationError):
            crnet_to_rftnet(bad)


class TestRnnEmbedding:
    def test_zero_network(self):
        r = RNNParams(2, 3, np.zeros((3, 2)), np.zeros((3, 3)), np.zeros(3),
                      np.zeros(3), np.zeros(3), RELU)
        g = rnn_to_rftnet(r)
        assert g.H == 2 * 3 + 2 + 1
        xs = np.ones((4, 2))
        ys, _, rec = eval_rftnet(g, xs, return_trajectory=True)
        np.testing.assert_array_equal(ys, np.zeros(4))
        b3 = slice(r.I + r.HR, r.I + 2 * r.HR)
        np.testing.assert_array_equal(rec[:, b3], np.zeros((4, 3)))

    def test_randomized_exactness_and_memory(self, rng):
        worst = 0.0
        for _ in range(25):
            r = random_relu_rnn(rng)
            g = rnn_to_rftnet(r)
            assert g.H == 2 * r.HR + r.I + 1
            xs = rng.uniform(-1, 1, size=(8, 10, r.I))
            src, ms = eval_rnn_many(r, xs, return_memory=True)
            tgt, _, rec = eval_rftnet_many(g, xs, return_trajectory=True)
            b3 = slice(r.I + r.HR, r.I + 2 * r.HR)
            worst = max(worst, relative_gap(tgt, src),
                        float(np.max(np.abs(rec[:, :, b3] - ms))),
                        float(np.max(np.abs(rec[:, :, :r.I]))),
                        float(np.max(np.abs(rec[:, :, -1]))))
        assert worst <= EXACT

    def test_memoryless_agrees_with_fnn_route(self, rng):
        # with V_R = 0 each step is the same feedforward map, so the
        # recurrent embedding and the per-step feedforward embedding agree
        r = RNNParams(2, 1, rng.standard_normal((1, 2)), np.zeros((1, 1)),
                      rng.standard_normal(1), rng.standard_normal(1),
                      np.zeros(1), RELU)
        g = rnn_to_rftnet(r)
        f = FNNParams(2, 1, r.WR, r.bR, r.alphaR, RELU)
        gf = fnn_to_fftnet(f, mode="zrelu")
        xs = rng.uniform(-1, 1, size=(5, 2))
        ys = eval_rftnet(g, xs)
        per_step = np.array([eval_fftnet(gf, x) for x in xs])
        np.testing.assert_allclose(ys, per_step, rtol=1e-12, atol=1e-12)

    def test_non_relu_rejected(self, rng):
        r = random_relu_rnn(rng)
        bad = RNNParams(r.I, r.HR, r.WR, r.VR, r.bR, r.alphaR, r.m0, IDENTITY)
        with pytest.raises(ContractViolationError):
            rnn_to_rftnet(bad)


class TestRnnTimepoint:
    def test_empty_history(self, rng):
        r = random_relu_rnn(rng)
        f = rnn_timepoint_to_fnn(r, np.zeros((0, r.I)), t0=1)
        np.testing.assert_allclose(f.bF, r.VR @ r.m0 + r.bR)

    def test_zero_initial_memory_bias(self, rng):
        r = random_relu_rnn(rng)
        r = RNNParams(r.I, r.HR, r.WR, r.VR, r.bR, r.alphaR, np.zeros(r.HR), RELU)
        f = rnn_timepoint_to_fnn(r, np.zeros((0, r.I)), t0=1)
        np.testing.assert_array_equal(f.bF, r.bR)

    def test_substitution_oracle(self, rng):
        r = random_relu_rnn(rng)
        prefix = rng.uniform(-1, 1, size=(6, r.I))
        t0 = 4
        f = rnn_timepoint_to_fnn(r, prefix, t0=t0)
        worst = 0.0
        for _ in range(100):
            probe = rng.uniform(-1, 1, size=r.I)
            seq = prefix[:t0].copy()
            seq[t0 - 1] = probe
            rerun = eval_rnn(r, seq)[t0 - 1]
            worst = max(worst, abs(eval_fnn(f, probe) - rerun) / (1.0 + abs(rerun)))
        assert worst <= EXACT

    def test_memoryless_ignores_prefix(self, rng):
        r = random_relu_rnn(rng)
        r = RNNParams(r.I, r.HR, r.WR, np.zeros((r.HR, r.HR)), r.bR, r.alphaR,
                      r.m0, RELU)
        fa = rnn_timepoint_to_fnn(r, rng.standard_normal((5, r.I)), t0=5)
        fb = rnn_timepoint_to_fnn(r, rng.standard_normal((5, r.I)), t0=3)
        np.testing.assert_array_equal(fa.bF, fb.bF)

    def test_index_bounds(self, rng):
        r = random_relu_rnn(rng)
        with pytest.raises(ContractViolationError):
            rnn_timepoint_to_fnn(r, np.zeros((2, r.I)), t0=4)
        with pytest.raises(ContractViolationError):
            rnn_timepoint_to_fnn(r, np.zeros((2, r.I)), t0=0)


class TestRowIndependentPadding:
    def test_zero_block(self):
        pad = pad_row_independent(np.zeros((2, 3)))
        assert pad.U.shape == (2, 5)
        np.testing.assert_array_equal(pad.U[:, 3:], np.eye(2))
        assert numerical_rank(pad.U) == 2

    def test_single_row(self):
        pad = pad_row_independent(np.array([[0.37]]))
        np.testing.assert_array_equal(pad.U, [[0.37, 1.0]])
        assert numerical_rank(pad.U) == 1

    def test_padded_network_outputs_unchanged(self, rng):
        u1 = rng.standard_normal((3, 5))
        w = rng.standard_normal((5, 4))
        b = rng.standard_normal(5)
        pad = pad_row_independent(u1)
        assert numerical_rank(pad.U) == 3
        w2, b2 = pad.pad_hidden(w, b)
        for activation in (RELU, HOLSIN):
            for _ in range(50):
                x = rng.standard_normal(4)
                original = u1 @ apply_real(activation, w @ x + b)
                padded = pad.U @ apply_real(activation, w2 @ x + b2)
                np.testing.assert_allclose(padded, original, rtol=1e-12, atol=1e-14)


class TestDodsAssembly:
    def test_structural_claims_random(self, rng):
        for _ in range(10):
            s1, s2, readout = random_dods_stages(rng)
            h0 = rng.standard_normal(2)
            xs = rng.uniform(-1, 1, size=(6, 3))
            gap = assembly_structural_gap(s1, s2, readout, ZRELU, 1.0, h0, xs)
            assert gap <= EXACT

    def test_zero_assembly_with_zero_height(self, rng):
        # with c = 0 both induced restrictions vanish at 0, so everything is 0
        i, hd = 2, 2
        zeros = lambda *shape: np.zeros(shape)
        s1 = StateStage(zeros(3, i), zeros(3, hd), pad_row_independent(zeros(hd, 1)).U,
                        zeros(3))
        s2 = StateStage(zeros(3, i), zeros(3, hd), pad_row_independent(zeros(hd, 1)).U,
                        zeros(3))
        readout = ReadoutStage(zeros(2, i), zeros(2, 3), zeros(2), zeros(2))
        addnet = assemble_dods_additive(s1, s2, readout, ZRELU, 0.0, np.zeros(hd))
        xs = rng.uniform(-1, 1, size=(4, i))
        ys, ps, qs = eval_additive(addnet, xs, return_states=True)
        np.testing.assert_array_equal(ys, np.zeros(4))
        np.testing.assert_array_equal(ps, np.zeros_like(ps))
        np.testing.assert_array_equal(qs, np.zeros_like(qs))

    def test_zero_assembly_outputs_and_q_side(self, rng):
        # positive gate height: the p side saturates at c on open gates, but
        # the q side and the readout stay exactly zero
        i, hd = 2, 1
        zeros = lambda *shape: np.zeros(shape)
        s1 = StateStage(zeros(2, i), zeros(2, hd), pad_row_independent(zeros(hd, 1)).U,
                        zeros(2))
        s2 = StateStage(zeros(2, i), zeros(2, hd), pad_row_independent(zeros(hd, 1)).U,
                        zeros(2))
        readout = ReadoutStage(zeros(2, i), zeros(2, 2), zeros(2), zeros(2))
        addnet = assemble_dods_additive(s1, s2, readout, ZRELU, 1.0, np.zeros(hd))
        xs = rng.uniform(-1, 1, size=(4, i))
        ys, _, qs = eval_additive(addnet, xs, return_states=True)
        np.testing.assert_array_equal(ys, np.zeros(4))
        np.testing.assert_array_equal(qs, np.zeros_like(qs))

    def test_exact_linear_state_tracking_through_q_side(self, rng):
        # a linear system folds into ReLU pairs exactly, so the q side
        # reproduces the hidden state: C2 q2_t = h_t for every step
        hd, i = 2, 3
        P = rng.standard_normal((hd, i))
        Q = 0.4 * rng.standard_normal((hd, hd))
        relu_pair = StateStage(
            A=np.vstack([P, -P]), B=np.vstack([Q, -Q]),
            C=np.hstack([np.eye(hd), -np.eye(hd)]), b=np.zeros(2 * hd))
        other = StateStage(rng.standard_normal((3, i)), 0.2 * rng.standard_normal((3, hd)),
                           pad_row_independent(rng.standard_normal((hd, 1))).U,
                           rng.standard_normal(3))
        readout = ReadoutStage(rng.standard_normal((2, i)),
                               0.2 * rng.standard_normal((2, 2 * hd)),
                               rng.standard_normal(2), rng.standard_normal(2))
        h0 = rng.standard_normal(hd)
        xs = rng.uniform(-1, 1, size=(8, i))
        traj = dods_stage_trajectories(other, relu_pair, readout, ZRELU, 1.0, h0, xs)
        h = h0.copy()
        for t in range(8):
            h = P @ xs[t] + Q @ h
            np.testing.assert_allclose(relu_pair.C @ traj["q2"][t], h,
                                       rtol=1e-12, atol=1e-12)
        # and the assembled network carries the same q2 block in its tail
        gap = assembly_structural_gap(other, relu_pair, readout, ZRELU, 1.0, h0, xs)
        assert gap <= EXACT

    def test_rank_deficient_readout_rejected(self, rng):
        s1, s2, readout = random_dods_stages(rng)
        broken1 = StateStage(s1.A, s1.B, np.zeros_like(s1.C), s1.b)
        broken2 = StateStage(s2.A, s2.B, np.zeros_like(s2.C), s2.b)
        with pytest.raises(DegenerateInputError):
            assemble_dods_additive(broken1, s2, readout, ZRELU, 1.0, np.zeros(2))
        with pytest.raises(DegenerateInputError):
            assemble_dods_additive(s1, broken2, readout, ZRELU, 1.0, np.zeros(2))


class TestEmbeddingReport:
    def test_csv_header(self):
        assert EMBEDDING_CSV_HEADER == ("source_kind,target_kind,I,T,source_hidden,"
                                        "target_hidden,source_params,target_params,"
                                        "max_abs_output_gap")

    def test_csv_rows(self):
        rep = EmbeddingReport("fnn", "fftnet", 3, 1, 4, 5, 32, 55, 1.25e-15)
        text = reports_to_csv([rep])
        lines = text.strip().splitlines()
        assert lines[0] == EMBEDDING_CSV_HEADER
        assert lines[1] == "fnn,fftnet,3,1,4,5,32,55,1.25e-15"

    def test_empty_gap_field(self):
        rep = EmbeddingReport("rnn", "rftnet", 2, 4, 3, 9, 14, 171, None)
        assert rep.csv_row().endswith(",")

    def test_negative_gap_rejected(self):
        with pytest.raises(ContractViolationError):
            EmbeddingReport("fnn", "fftnet", 1, 1, 1, 2, 4, 10, -1.0)
