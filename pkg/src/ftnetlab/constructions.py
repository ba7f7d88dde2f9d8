"""Exact weight-assembly operators embedding one model family into another.

Every operator here is a permutation / block rearrangement of its input's
weights, so source and target agree to rounding (a few ulps); the paired
tests check |gap| <= 1e-12 relative.  Hidden-size formulas are asserted on
every call.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .activations import (
    IMAG_ARG_REAL_BIAS,
    REAL_ARG_IMAG_BIAS,
    RELU,
    ZRELU,
    ActivationKind,
    apply,
    apply_real,
    induced_imag,
    induced_real,
)
from .errors import ContractViolationError, DegenerateInputError
from .models import (
    AdditiveFTNetParams,
    CRNetParams,
    FFTNetParams,
    FNNParams,
    RFTNetParams,
    RNNParams,
    eval_rnn,
)
from .numerics import numerical_rank

EMBEDDING_CSV_HEADER = ("source_kind,target_kind,I,T,source_hidden,target_hidden,"
                        "source_params,target_params,max_abs_output_gap")


@dataclass(frozen=True)
class EmbeddingReport:
    source_kind: str
    target_kind: str
    I: int
    T: int
    source_hidden: int
    target_hidden: int
    source_params: int
    target_params: int
    max_abs_output_gap: float | None = None

    def __post_init__(self):
        if self.max_abs_output_gap is not None and self.max_abs_output_gap < 0:
            raise ContractViolationError("gap must be >= 0")

    def csv_row(self) -> str:
        gap = "" if self.max_abs_output_gap is None else repr(self.max_abs_output_gap)
        return (f"{self.source_kind},{self.target_kind},{self.I},{self.T},"
                f"{self.source_hidden},{self.target_hidden},"
                f"{self.source_params},{self.target_params},{gap}")


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    buf.write(EMBEDDING_CSV_HEADER + "\n")
    for r in reports:
        buf.write(r.csv_row() + "\n")
    return buf.getvalue()


def _restriction_matches(fnn_activation: ActivationKind, target: ActivationKind,
                         c: float) -> bool:
    # functional precondition, checked on a probe grid
    xs = np.linspace(-4.0, 4.0, 81)
    lhs = apply_real(fnn_activation, xs)
    rhs = induced_real(target, c, xs, REAL_ARG_IMAG_BIAS)
    return bool(np.max(np.abs(lhs - rhs)) <= 1e-12)


def fnn_to_fftnet(f: FNNParams, c: float = 1.0, mode: str = "zrelu",
                  target_activation: ActivationKind | None = None) -> FFTNetParams:
    """Embed a one-hidden-layer FNN into a feedforward complex net.

    ``zrelu`` mode requires a ReLU source and gates with a constant +1
    imaginary bias; ``induced`` mode requires the source activation to be
    the real restriction of ``target_activation`` at height c.
    """
    if mode == "zrelu":
        if f.activation != RELU:
            raise ContractViolationError("zrelu mode needs a ReLU source network")
        target = ZRELU
        imag_bias = 1.0
    elif mode == "induced":
        if target_activation is None:
            raise ContractViolationError("induced mode needs a target activation")
        target = target_activation
        imag_bias = c
        if not _restriction_matches(f.activation, target, c):
            raise ContractViolationError(
                f"{f.activation.tag} is not the real restriction of "
                f"{target.tag} at c={c}")
    else:
        raise ContractViolationError(f"unknown mode {mode!r}")

    h = max(f.HF, f.I + 1)
    w = np.zeros((h, h))
    v = np.zeros((h, h))
    w[: f.HF, : f.I] = f.WF
    w[: f.HF, h - 1] = f.bF
    v[: f.HF, h - 1] = imag_bias
    alpha = np.zeros(h)
    alpha[: f.HF] = f.alphaF
    out = FFTNetParams(f.I, h, w, v, alpha, target)
    assert out.H == max(f.HF, f.I + 1)
    return out


def additive_to_rftnet(a: AdditiveFTNetParams) -> RFTNetParams:
    """Embed the two-recurrence additive network into a recurrent complex net.

    Block layout (rows/cols I | H+ | 1): W carries B and the +c bias column,
    V carries A and -zeta; the receptor starts at (0; q0; 0) and stays of
    that shape, mirroring q_t at every step.
    """
    if abs(complex(apply(a.base_activation, 0.0 + 0.0j))) != 0.0:
        raise ContractViolationError("base activation must map 0 to 0")
    i, hp = a.I, a.Hplus
    h = i + hp + 1
    w = np.zeros((h, h))
    v = np.zeros((h, h))
    w[i : i + hp, i : i + hp] = a.B
    w[i : i + hp, h - 1] = a.c  # proof uses +c*1 (displayed sign is a typo)
    v[i : i + hp, :i] = a.A
    v[i : i + hp, h - 1] = -a.zeta
    r0 = np.zeros(h)
    r0[i : i + hp] = a.q0
    alpha = np.zeros(h)
    alpha[i : i + hp] = a.alphaplus
    out = RFTNetParams(i, h, w, v, alpha, a.base_activation, r0)
    assert out.H == i + hp + 1
    return out


def _crnet_blocks(cr: CRNetParams):
    wr, wi = cr.WC.re, cr.WC.im
    br, bi = cr.bC.re, cr.bC.im
    half = cr.I // 2
    hc = cr.HC
    # rows 2*HC, cols I+1 (input halves plus the trailing bias column)
    w = np.zeros((2 * hc, cr.I + 1))
    v = np.zeros((2 * hc, cr.I + 1))
    w[:hc, :half], w[:hc, half : cr.I], w[:hc, cr.I] = wr, -wi, br
    w[hc:, :half], w[hc:, half : cr.I], w[hc:, cr.I] = wi, wr, bi
    v[:hc, :half], v[:hc, half : cr.I], v[:hc, cr.I] = wi, wr, bi
    v[hc:, :half], v[hc:, half : cr.I], v[hc:, cr.I] = wr, -wi, br
    alpha = np.concatenate([cr.alphaC.re, -cr.alphaC.im])
    return w, v, alpha


def _require_zrelu(cr: CRNetParams) -> None:
    # the gate identity Re[act(x+yi)] = Im[act(conj(x+yi) i)] is zrelu-specific
    if cr.activation != ZRELU:
        raise ContractViolationError("CRNet embeddings require the zrelu activation")


def crnet_to_fftnet(cr: CRNetParams) -> FFTNetParams:
    """Duplicate each complex unit into a (z, conj(z) i) pair of gate units."""
    _require_zrelu(cr)
    hc, i = cr.HC, cr.I
    h = max(2 * hc, i + 1)
    w = np.zeros((h, h))
    v = np.zeros((h, h))
    wb, vb, ab = _crnet_blocks(cr)
    w[: 2 * hc, :i] = wb[:, :i]
    w[: 2 * hc, h - 1] = wb[:, i]
    v[: 2 * hc, :i] = vb[:, :i]
    v[: 2 * hc, h - 1] = vb[:, i]
    alpha = np.zeros(h)
    alpha[: 2 * hc] = ab
    out = FFTNetParams(i, h, w, v, alpha, ZRELU)
    assert out.H == max(2 * hc, i + 1)
    return out


def crnet_to_rftnet(cr: CRNetParams) -> RFTNetParams:
    """Recurrent wrapper of crnet_to_fftnet; the receptor columns are zero,
    so the recurrence is inert and every step reproduces the CRNet."""
    _require_zrelu(cr)
    hc, i = cr.HC, cr.I
    h = 2 * hc + i + 1
    w = np.zeros((h, h))
    v = np.zeros((h, h))
    wb, vb, ab = _crnet_blocks(cr)
    w[i : i + 2 * hc, :i] = wb[:, :i]
    w[i : i + 2 * hc, h - 1] = wb[:, i]
    v[i : i + 2 * hc, :i] = vb[:, :i]
    v[i : i + 2 * hc, h - 1] = vb[:, i]
    alpha = np.zeros(h)
    alpha[i : i + 2 * hc] = ab
    out = RFTNetParams(i, h, w, v, alpha, ZRELU, np.zeros(h))
    assert out.H == 2 * hc + i + 1
    return out


def rnn_to_rftnet(r: RNNParams) -> RFTNetParams:
    """Embed a ReLU RNN; receptor block 3 carries the memory m_t exactly.

    Row/col blocks are I | HR | HR | 1.  Block 2 computes the memory update
    in its real part (imaginary bias 1 opens the gate exactly on the ReLU
    pass region); block 3 recomputes it in its imaginary part so the
    receptor feeds it back.
    """
    if r.activation != RELU:
        raise ContractViolationError("rnn_to_rftnet requires a ReLU source network")
    i, hr = r.I, r.HR
    h = 2 * hr + i + 1
    b2 = slice(i, i + hr)
    b3 = slice(i + hr, i + 2 * hr)
    w = np.zeros((h, h))
    v = np.zeros((h, h))
    w[b2, :i] = r.WR
    w[b2, h - 1] = r.bR
    w[b3, b3] = r.VR
    w[b3, h - 1] = 1.0
    v[b2, b3] = -r.VR
    v[b2, h - 1] = 1.0
    v[b3, :i] = r.WR
    v[b3, h - 1] = r.bR
    r0 = np.zeros(h)
    r0[b3] = r.m0
    alpha = np.zeros(h)
    alpha[b2] = r.alphaR
    out = RFTNetParams(i, h, w, v, alpha, ZRELU, r0)
    assert out.H == 2 * hr + i + 1
    return out


def rnn_timepoint_to_fnn(r: RNNParams, xs_prefix, t0: int) -> FNNParams:
    """Freeze an RNN's history before time t0 into a feedforward bias.

    The result maps any substituted input at time t0 to the output the RNN
    would produce there; b_F = VR m_{t0-1} + bR.
    """
    xs_prefix = np.asarray(xs_prefix, dtype=np.float64)
    if xs_prefix.ndim != 2:
        xs_prefix = xs_prefix.reshape(-1, r.I) if xs_prefix.size else np.zeros((0, r.I))
    if not 1 <= t0 <= xs_prefix.shape[0] + 1:
        raise ContractViolationError(
            f"t0={t0} out of range for a prefix of length {xs_prefix.shape[0]}")
    if t0 == 1:
        m_prev = r.m0
    else:
        _, ms = eval_rnn(r, xs_prefix[: t0 - 1], return_memory=True)
        m_prev = ms[-1]
    return FNNParams(r.I, r.HR, r.WR, r.VR @ m_prev + r.bR, r.alphaR, r.activation)


@dataclass(frozen=True)
class RowIndependentPadding:
    """U = [U1 | I_O] plus the zero-row recipe for the hidden layer."""

    U: np.ndarray
    extra_rows: int

    def pad_hidden(self, W: np.ndarray, b: np.ndarray):
        """Append zero rows so padded units see zero pre-activation."""
        o = self.extra_rows
        return (np.vstack([W, np.zeros((o, W.shape[1]))]),
                np.concatenate([b, np.zeros(o)]))


def pad_row_independent(U1) -> RowIndependentPadding:
    """Make a readout row independent by appending an identity block.

    The padded hidden units get zero weights and zero bias; for activations
    with act(0) = 0 they contribute nothing, so outputs are unchanged.
    """
    U1 = np.asarray(U1, dtype=np.float64)
    if U1.ndim != 2:
        raise ContractViolationError("U1 must be a matrix")
    o = U1.shape[0]
    u = np.hstack([U1, np.eye(o)])
    return RowIndependentPadding(U=u, extra_rows=o)


# ---------------------------------------------------------------------------
# DODS assembly (additive network built from trained sub-approximators)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StateStage:
    """One state-transition approximator: next_h ~ C sigma(A x + B h + b).

    C must be row independent (use pad_row_independent when it is not).
    Bias is stored in added form.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    b: np.ndarray

    @property
    def hidden(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class ReadoutStage:
    """Collapsed output chain: y ~ readout . sigma(A x + B q + b)."""

    A: np.ndarray
    B: np.ndarray
    readout: np.ndarray
    b: np.ndarray

    @property
    def hidden(self) -> int:
        return self.A.shape[0]


def _solve_row_independent(C: np.ndarray, target: np.ndarray, name: str) -> np.ndarray:
    if numerical_rank(C) < C.shape[0]:
        raise DegenerateInputError(f"{name} is not row independent")
    sol, residual, _, _ = np.linalg.lstsq(C, target, rcond=None)
    return sol


def assemble_dods_additive(stage1: StateStage, stage2: StateStage,
                           readout: ReadoutStage, base_activation: ActivationKind,
                           c: float, h0) -> AdditiveFTNetParams:
    """Assemble the final additive network from the three sub-approximators.

    Structurally (independent of approximation quality): the first state
    stage is mirrored by the p side, the q side's tail block reproduces the
    second stage's recurrence, and the assembled states are the
    concatenation of the stage states.
    """
    h0 = np.asarray(h0, dtype=np.float64)
    h1, h2, h5 = stage1.hidden, stage2.hidden, readout.hidden
    hd = stage1.C.shape[0]
    i = stage1.A.shape[1]
    if stage2.C.shape[0] != hd or stage2.A.shape[1] != i or readout.A.shape[1] != i:
        raise ContractViolationError("stage dimensions are inconsistent")
    if readout.B.shape[1] != h2:
        raise ContractViolationError("readout stage must consume the q-side state")
    if numerical_rank(stage1.C) < hd:
        raise DegenerateInputError("stage1 readout is not row independent")
    q0_2 = _solve_row_independent(stage2.C, h0, "stage2 readout")

    h3 = h1 + h2
    hp = h3 + h5
    a = np.vstack([stage1.A, stage2.A, readout.A])
    b = np.zeros((hp, hp))
    b[0:h1, h1:h3] = stage1.B @ stage2.C
    b[h1:h3, h1:h3] = stage2.B @ stage2.C
    b[h3:hp, h1:h3] = readout.B
    zeta = -np.concatenate([stage1.b, stage2.b, readout.b])
    alpha = np.concatenate([np.zeros(h3), readout.readout])
    q0 = np.concatenate([np.zeros(h1), q0_2, np.zeros(h5)])
    return AdditiveFTNetParams(i, hp, a, b, zeta, alpha, q0, base_activation, c)


def dods_stage_trajectories(stage1: StateStage, stage2: StateStage,
                            readout: ReadoutStage, base_activation: ActivationKind,
                            c: float, h0, xs) -> dict:
    """Simulate every intermediate recurrence of the assembly chain.

    Returns arrays keyed p1, q1, p2, q2, p3, q3, p5, q5 with time along
    axis 0 (step t at index t-1).
    """
    xs = np.asarray(xs, dtype=np.float64)
    h0 = np.asarray(h0, dtype=np.float64)

    def s1(u):
        return induced_real(base_activation, c, u, IMAG_ARG_REAL_BIAS)

    def s2(u):
        return induced_imag(base_activation, c, u, IMAG_ARG_REAL_BIAS)

    t_len = xs.shape[0]
    h1, h2, h5 = stage1.hidden, stage2.hidden, readout.hidden
    p1 = np.zeros((t_len, h0.size))
    q1 = np.zeros((t_len, h0.size))
    p2 = np.zeros((t_len, h1))
    q2 = np.zeros((t_len, h2))
    p3 = np.zeros((t_len, h1 + h2))
    q3 = np.zeros((t_len, h1 + h2))
    p5 = np.zeros((t_len, h5))
    q5 = np.zeros((t_len, h5))

    p1_prev, q1_prev = h0, h0
    p2_prev = _solve_row_independent(stage1.C, h0, "stage1 readout")
    q2_prev = _solve_row_independent(stage2.C, h0, "stage2 readout")
    q3_prev = np.concatenate([np.zeros(h1), q2_prev])
    a3 = np.vstack([stage1.A, stage2.A])
    b3 = np.zeros((h1 + h2, h1 + h2))
    b3[0:h1, h1:] = stage1.B @ stage2.C
    b3[h1:, h1:] = stage2.B @ stage2.C
    bias3 = np.concatenate([stage1.b, stage2.b])

    for t in range(t_len):
        x = xs[t]
        p1[t] = stage1.C @ s1(stage1.A @ x + stage1.B @ p1_prev + stage1.b)
        q1[t] = stage2.C @ s2(stage2.A @ x + stage2.B @ q1_prev + stage2.b)
        p2[t] = s1(stage1.A @ x + stage1.B @ (stage1.C @ p2_prev) + stage1.b)
        q2_new = s2(stage2.A @ x + stage2.B @ (stage2.C @ q2_prev) + stage2.b)
        u3 = a3 @ x + b3 @ q3_prev + bias3
        p3[t] = s1(u3)
        q3[t] = s2(u3)
        u5 = readout.A @ x + readout.B @ q2_prev + readout.b
        p5[t] = s1(u5)
        q5[t] = s2(u5)
        p1_prev, q1_prev = p1[t], q1[t]
        p2_prev, q2_prev = p2[t], q2_new
        q2[t] = q2_new
        q3_prev = q3[t]

    return {"p1": p1, "q1": q1, "p2": p2, "q2": q2, "p3": p3, "q3": q3,
            "p5": p5, "q5": q5}
