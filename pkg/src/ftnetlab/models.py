"""Forward evaluation of every model family and the padding map kappa.

Conventions used throughout:

* biases are stored in ADDED form for FNN / RNN / CRNet (``b = -theta``);
  the additive network keeps its subtracted ``zeta`` exactly as defined;
* the recurrent readout uses the stimulus (real part) only;
* outputs are scalar per time step.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .activations import (
    IMAG_ARG_REAL_BIAS,
    ActivationKind,
    activation_from_tag,
    apply,
    apply_real,
    induced_imag,
    induced_real,
)
from .errors import ContractViolationError
from .numerics import ComplexMatrix, ComplexVector


def _check_finite(name: str, *arrays) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ContractViolationError(f"{name}: non-finite entries")


def _vec(x, n: int, name: str) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.shape != (n,):
        raise ContractViolationError(f"{name}: expected shape ({n},), got {a.shape}")
    return a


def _mat(x, rows: int, cols: int, name: str) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.shape != (rows, cols):
        raise ContractViolationError(
            f"{name}: expected shape ({rows}, {cols}), got {a.shape}"
        )
    return a


# ---------------------------------------------------------------------------
# parameter containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FFTNetParams:
    """One-hidden-layer feedforward network with complex weight W + Vi."""

    I: int
    H: int
    W: np.ndarray
    V: np.ndarray
    alpha: np.ndarray
    activation: ActivationKind

    def __post_init__(self):
        if self.H < self.I + 1:
            raise ContractViolationError(f"H={self.H} must be >= I+1={self.I + 1}")
        object.__setattr__(self, "W", _mat(self.W, self.H, self.H, "W"))
        object.__setattr__(self, "V", _mat(self.V, self.H, self.H, "V"))
        object.__setattr__(self, "alpha", _vec(self.alpha, self.H, "alpha"))
        _check_finite("FFTNetParams", self.W, self.V, self.alpha)


@dataclass(frozen=True)
class RFTNetParams:
    """Recurrent variant; the receptor r0 seeds the imaginary feedback."""

    I: int
    H: int
    W: np.ndarray
    V: np.ndarray
    alpha: np.ndarray
    activation: ActivationKind
    r0: np.ndarray

    def __post_init__(self):
        if self.H < self.I + 1:
            raise ContractViolationError(f"H={self.H} must be >= I+1={self.I + 1}")
        object.__setattr__(self, "W", _mat(self.W, self.H, self.H, "W"))
        object.__setattr__(self, "V", _mat(self.V, self.H, self.H, "V"))
        object.__setattr__(self, "alpha", _vec(self.alpha, self.H, "alpha"))
        object.__setattr__(self, "r0", _vec(self.r0, self.H, "r0"))
        _check_finite("RFTNetParams", self.W, self.V, self.alpha, self.r0)

    def feedforward(self) -> FFTNetParams:
        return FFTNetParams(self.I, self.H, self.W, self.V, self.alpha, self.activation)


@dataclass(frozen=True)
class AdditiveFTNetParams:
    """Two-recurrence network with shared pre-activation.

    p_t = sigma1(A x_t + B q_{t-1} - zeta), q_t = sigma2(same), y_t = alphaplus . p_t,
    where sigma1/sigma2 are the real/imaginary restrictions of
    ``base_activation`` at the complex point (c + u i).
    """

    I: int
    Hplus: int
    A: np.ndarray
    B: np.ndarray
    zeta: np.ndarray
    alphaplus: np.ndarray
    q0: np.ndarray
    base_activation: ActivationKind
    c: float

    def __post_init__(self):
        object.__setattr__(self, "A", _mat(self.A, self.Hplus, self.I, "A"))
        object.__setattr__(self, "B", _mat(self.B, self.Hplus, self.Hplus, "B"))
        object.__setattr__(self, "zeta", _vec(self.zeta, self.Hplus, "zeta"))
        object.__setattr__(self, "alphaplus", _vec(self.alphaplus, self.Hplus, "alphaplus"))
        object.__setattr__(self, "q0", _vec(self.q0, self.Hplus, "q0"))
        _check_finite("AdditiveFTNetParams", self.A, self.B, self.zeta,
                      self.alphaplus, self.q0, np.array([self.c]))


@dataclass(frozen=True)
class FNNParams:
    """f(x) = alphaF . sigma(WF x + bF) with bias already added."""

    I: int
    HF: int
    WF: np.ndarray
    bF: np.ndarray
    alphaF: np.ndarray
    activation: ActivationKind

    def __post_init__(self):
        object.__setattr__(self, "WF", _mat(self.WF, self.HF, self.I, "WF"))
        object.__setattr__(self, "bF", _vec(self.bF, self.HF, "bF"))
        object.__setattr__(self, "alphaF", _vec(self.alphaF, self.HF, "alphaF"))
        _check_finite("FNNParams", self.WF, self.bF, self.alphaF)


@dataclass(frozen=True)
class RNNParams:
    """m_t = sigma(WR x_t + VR m_{t-1} + bR), y_t = alphaR . m_t."""

    I: int
    HR: int
    WR: np.ndarray
    VR: np.ndarray
    bR: np.ndarray
    alphaR: np.ndarray
    m0: np.ndarray
    activation: ActivationKind

    def __post_init__(self):
        object.__setattr__(self, "WR", _mat(self.WR, self.HR, self.I, "WR"))
        object.__setattr__(self, "VR", _mat(self.VR, self.HR, self.HR, "VR"))
        object.__setattr__(self, "bR", _vec(self.bR, self.HR, "bR"))
        object.__setattr__(self, "alphaR", _vec(self.alphaR, self.HR, "alphaR"))
        object.__setattr__(self, "m0", _vec(self.m0, self.HR, "m0"))
        _check_finite("RNNParams", self.WR, self.VR, self.bR, self.alphaR, self.m0)


@dataclass(frozen=True)
class CRNetParams:
    """Complex-reaction network; the input is folded into C^{I/2}."""

    I: int
    HC: int
    WC: ComplexMatrix
    bC: ComplexVector
    alphaC: ComplexVector
    activation: ActivationKind

    def __post_init__(self):
        if self.I % 2 != 0:
            raise ContractViolationError(f"CRNet input dimension must be even, got {self.I}")
        if self.WC.rows != self.HC or self.WC.cols != self.I // 2:
            raise ContractViolationError(
                f"WC: expected shape ({self.HC}, {self.I // 2}), got "
                f"({self.WC.rows}, {self.WC.cols})"
            )
        if self.bC.length != self.HC or self.alphaC.length != self.HC:
            raise ContractViolationError("bC/alphaC must have length HC")
        _check_finite("CRNetParams", self.WC.re, self.WC.im, self.bC.re, self.bC.im,
                      self.alphaC.re, self.alphaC.im)


@dataclass(frozen=True)
class DODSSpec:
    """Discrete-time open dynamical system h_t = phi(x_t, h_{t-1}), y_t = psi(h_t)."""

    I: int
    HD: int
    h0: np.ndarray
    phi: Callable[[np.ndarray, np.ndarray], np.ndarray]
    psi: Callable[[np.ndarray], float]

    def __post_init__(self):
        object.__setattr__(self, "h0", _vec(self.h0, self.HD, "h0"))


def dods_linear(P, Q, readout, h0) -> DODSSpec:
    """h_t = P x_t + Q h_{t-1}, y_t = readout . h_t."""
    P = np.asarray(P, dtype=np.float64)
    Q = np.asarray(Q, dtype=np.float64)
    readout = np.asarray(readout, dtype=np.float64)
    hd, i = P.shape
    return DODSSpec(i, hd, np.asarray(h0, dtype=np.float64),
                    phi=lambda x, h: P @ x + Q @ h,
                    psi=lambda h: float(readout @ h))


def dods_tanh_saturating(P, Q, readout, h0) -> DODSSpec:
    """h_t = tanh(P x_t + Q h_{t-1}), y_t = readout . h_t."""
    P = np.asarray(P, dtype=np.float64)
    Q = np.asarray(Q, dtype=np.float64)
    readout = np.asarray(readout, dtype=np.float64)
    hd, i = P.shape
    return DODSSpec(i, hd, np.asarray(h0, dtype=np.float64),
                    phi=lambda x, h: np.tanh(P @ x + Q @ h),
                    psi=lambda h: float(readout @ h))


def dods_input_passthrough(f: Callable[[np.ndarray], float], I: int,
                           h0=None) -> DODSSpec:
    """h_t = x_t, y_t = f(x_t); the memoryless system used in the RNN separation."""
    if h0 is None:
        h0 = np.zeros(I)
    return DODSSpec(I, I, np.asarray(h0, dtype=np.float64),
                    phi=lambda x, h: np.asarray(x, dtype=np.float64),
                    psi=lambda h: float(f(h)))


# ---------------------------------------------------------------------------
# kappa and evaluators
# ---------------------------------------------------------------------------

def kappa(x, H: int) -> np.ndarray:
    """Lift x in R^I to (x; 0; ...; 0; 1) in R^H.  Requires H >= I + 1."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    i = x.shape[-1] if x.size else 0
    if H < i + 1:
        raise ContractViolationError(f"kappa needs H >= I+1 ({H} < {i + 1})")
    out = np.zeros(H)
    out[:i] = x
    out[-1] = 1.0
    return out


def kappa_many(X: np.ndarray, H: int) -> np.ndarray:
    """Row-wise kappa for a batch of inputs, shape (N, I) -> (N, H)."""
    X = np.asarray(X, dtype=np.float64)
    n, i = X.shape
    if H < i + 1:
        raise ContractViolationError(f"kappa needs H >= I+1 ({H} < {i + 1})")
    out = np.zeros((n, H))
    out[:, :i] = X
    out[:, -1] = 1.0
    return out


def _fftnet_states(p: FFTNetParams, K: np.ndarray) -> np.ndarray:
    pre = K @ p.W.T + 1j * (K @ p.V.T)
    return np.asarray(apply(p.activation, pre))


def eval_fftnet_many(p: FFTNetParams, X: np.ndarray) -> np.ndarray:
    """Batch of inputs, shape (N, I) -> outputs (N,)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != p.I:
        raise ContractViolationError(f"expected inputs of shape (N, {p.I})")
    act = _fftnet_states(p, kappa_many(X, p.H))
    return act.real @ p.alpha


def eval_fftnet(p: FFTNetParams, x) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    return float(eval_fftnet_many(p, x[None, :])[0])


def eval_rftnet_many(p: RFTNetParams, XS: np.ndarray, return_trajectory: bool = False):
    """Batch of sequences, shape (B, T, I) -> outputs (B, T).

    With ``return_trajectory`` also returns (stimuli, receptors), each of
    shape (B, T, H).
    """
    XS = np.asarray(XS, dtype=np.float64)
    if XS.ndim != 3 or XS.shape[2] != p.I:
        raise ContractViolationError(f"expected sequences of shape (B, T, {p.I})")
    b, t_len, _ = XS.shape
    if t_len < 1:
        raise ContractViolationError("need at least one time step")
    r = np.broadcast_to(p.r0, (b, p.H)).copy()
    ys = np.zeros((b, t_len))
    stim = np.zeros((b, t_len, p.H)) if return_trajectory else None
    rec = np.zeros((b, t_len, p.H)) if return_trajectory else None
    for t in range(t_len):
        k = kappa_many(XS[:, t, :], p.H)
        pre = (k @ p.W.T - r @ p.V.T) + 1j * (k @ p.V.T + r @ p.W.T)
        act = np.asarray(apply(p.activation, pre))
        s, r = act.real, act.imag
        ys[:, t] = s @ p.alpha
        if return_trajectory:
            stim[:, t, :] = s
            rec[:, t, :] = r
    if return_trajectory:
        return ys, stim, rec
    return ys


def eval_rftnet(p: RFTNetParams, xs, return_trajectory: bool = False):
    """Single sequence of shape (T, I) -> outputs (T,)."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2:
        raise ContractViolationError("expected a sequence of shape (T, I)")
    out = eval_rftnet_many(p, xs[None], return_trajectory=return_trajectory)
    if return_trajectory:
        ys, stim, rec = out
        return ys[0], stim[0], rec[0]
    return out[0]


def additive_restrictions(p: AdditiveFTNetParams):
    """The (sigma1, sigma2) pair the additive network iterates with."""
    def sigma1(u):
        return induced_real(p.base_activation, p.c, u, IMAG_ARG_REAL_BIAS)

    def sigma2(u):
        return induced_imag(p.base_activation, p.c, u, IMAG_ARG_REAL_BIAS)

    return sigma1, sigma2


def eval_additive_many(p: AdditiveFTNetParams, XS: np.ndarray,
                       return_states: bool = False):
    """Batch of sequences (B, T, I) -> outputs (B, T); optionally (p_t, q_t) stacks."""
    XS = np.asarray(XS, dtype=np.float64)
    if XS.ndim != 3 or XS.shape[2] != p.I:
        raise ContractViolationError(f"expected sequences of shape (B, T, {p.I})")
    sigma1, sigma2 = additive_restrictions(p)
    b, t_len, _ = XS.shape
    q = np.broadcast_to(p.q0, (b, p.Hplus)).copy()
    ys = np.zeros((b, t_len))
    ps = np.zeros((b, t_len, p.Hplus)) if return_states else None
    qs = np.zeros((b, t_len, p.Hplus)) if return_states else None
    for t in range(t_len):
        u = XS[:, t, :] @ p.A.T + q @ p.B.T - p.zeta
        pt = sigma1(u)
        q = sigma2(u)
        ys[:, t] = pt @ p.alphaplus
        if return_states:
            ps[:, t, :] = pt
            qs[:, t, :] = q
    if return_states:
        return ys, ps, qs
    return ys


def eval_additive(p: AdditiveFTNetParams, xs, return_states: bool = False):
    xs = np.asarray(xs, dtype=np.float64)
    out = eval_additive_many(p, xs[None], return_states=return_states)
    if return_states:
        ys, ps, qs = out
        return ys[0], ps[0], qs[0]
    return out[0]


def eval_fnn_many(p: FNNParams, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != p.I:
        raise ContractViolationError(f"expected inputs of shape (N, {p.I})")
    return apply_real(p.activation, X @ p.WF.T + p.bF) @ p.alphaF


def eval_fnn(p: FNNParams, x) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    return float(eval_fnn_many(p, x[None, :])[0])


def eval_rnn_many(p: RNNParams, XS: np.ndarray, return_memory: bool = False):
    XS = np.asarray(XS, dtype=np.float64)
    if XS.ndim != 3 or XS.shape[2] != p.I:
        raise ContractViolationError(f"expected sequences of shape (B, T, {p.I})")
    b, t_len, _ = XS.shape
    m = np.broadcast_to(p.m0, (b, p.HR)).copy()
    ys = np.zeros((b, t_len))
    ms = np.zeros((b, t_len, p.HR)) if return_memory else None
    for t in range(t_len):
        m = apply_real(p.activation, XS[:, t, :] @ p.WR.T + m @ p.VR.T + p.bR)
        ys[:, t] = m @ p.alphaR
        if return_memory:
            ms[:, t, :] = m
    if return_memory:
        return ys, ms
    return ys


def eval_rnn(p: RNNParams, xs, return_memory: bool = False):
    xs = np.asarray(xs, dtype=np.float64)
    out = eval_rnn_many(p, xs[None], return_memory=return_memory)
    if return_memory:
        ys, ms = out
        return ys[0], ms[0]
    return out[0]


def fold_input(x: np.ndarray) -> np.ndarray:
    """tau: fold (x1; x2) in R^I into x1 + x2 i in C^{I/2} (batch-aware)."""
    x = np.asarray(x, dtype=np.float64)
    half = x.shape[-1] // 2
    if x.shape[-1] % 2 != 0:
        raise ContractViolationError("fold_input needs an even input dimension")
    return x[..., :half] + 1j * x[..., half:]


def eval_crnet_many(p: CRNetParams, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != p.I:
        raise ContractViolationError(f"expected inputs of shape (N, {p.I})")
    pre = fold_input(X) @ p.WC.to_complex().T + p.bC.to_complex()
    act = np.asarray(apply(p.activation, pre))
    return (act @ p.alphaC.to_complex()).real


def eval_crnet(p: CRNetParams, x) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    return float(eval_crnet_many(p, x[None, :])[0])


def eval_dods(spec: DODSSpec, xs, return_hidden: bool = False):
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != spec.I:
        raise ContractViolationError(f"expected a sequence of shape (T, {spec.I})")
    h = spec.h0
    ys = np.zeros(xs.shape[0])
    hs = np.zeros((xs.shape[0], spec.HD)) if return_hidden else None
    for t in range(xs.shape[0]):
        h = np.asarray(spec.phi(xs[t], h), dtype=np.float64)
        ys[t] = spec.psi(h)
        if return_hidden:
            hs[t] = h
    if return_hidden:
        return ys, hs
    return ys


# ---------------------------------------------------------------------------
# parameter bookkeeping
# ---------------------------------------------------------------------------

_PARAM_COUNTS = {
    "ftnet": lambda h, i: 2 * h * h + h,
    "fftnet": lambda h, i: 2 * h * h + h,
    "rftnet": lambda h, i: 2 * h * h + h,
    "crnet": lambda h, i: 2 * h * (i + 2),
    "fnn": lambda h, i: 2 * h * (i + 1),
    "rnn": lambda h, i: h * (i + h + 2),
    "additive": lambda h, i: h * (i + h + 3),  # A, B, zeta, alpha, q0
}


def param_count(model_kind: str, hidden: int, I: int = 0) -> int:
    """Parameter totals as reported alongside the width bounds."""
    if hidden < 1:
        raise ContractViolationError("hidden size must be >= 1")
    try:
        return int(_PARAM_COUNTS[model_kind](hidden, I))
    except KeyError:
        raise ContractViolationError(f"unknown model kind {model_kind!r}") from None


# ---------------------------------------------------------------------------
# JSON model files
# ---------------------------------------------------------------------------

def _act_to_json(d: dict, kind: ActivationKind) -> None:
    d["activation"] = kind.tag
    if kind.tag == "modrelu":
        d["activation_bias"] = kind.bias


def _act_from_json(d: dict) -> ActivationKind:
    return activation_from_tag(d["activation"], d.get("activation_bias"))


def model_to_dict(p) -> dict:
    if isinstance(p, RFTNetParams):
        d = {"kind": "rftnet", "I": p.I, "H": p.H, "W": p.W.tolist(),
             "V": p.V.tolist(), "alpha": p.alpha.tolist(), "r0": p.r0.tolist()}
    elif isinstance(p, FFTNetParams):
        d = {"kind": "fftnet", "I": p.I, "H": p.H, "W": p.W.tolist(),
             "V": p.V.tolist(), "alpha": p.alpha.tolist()}
    elif isinstance(p, AdditiveFTNetParams):
        d = {"kind": "additive", "I": p.I, "H": p.Hplus, "A": p.A.tolist(),
             "B": p.B.tolist(), "zeta": p.zeta.tolist(),
             "alpha": p.alphaplus.tolist(), "q0": p.q0.tolist(), "c": p.c}
        _act_to_json(d, p.base_activation)
        return d
    elif isinstance(p, FNNParams):
        d = {"kind": "fnn", "I": p.I, "H": p.HF, "W": p.WF.tolist(),
             "b": p.bF.tolist(), "alpha": p.alphaF.tolist()}
    elif isinstance(p, RNNParams):
        d = {"kind": "rnn", "I": p.I, "H": p.HR, "W": p.WR.tolist(),
             "V": p.VR.tolist(), "b": p.bR.tolist(), "alpha": p.alphaR.tolist(),
             "m0": p.m0.tolist()}
    elif isinstance(p, CRNetParams):
        d = {"kind": "crnet", "I": p.I, "H": p.HC,
             "W_re": p.WC.re.tolist(), "W_im": p.WC.im.tolist(),
             "b_re": p.bC.re.tolist(), "b_im": p.bC.im.tolist(),
             "alpha_re": p.alphaC.re.tolist(), "alpha_im": p.alphaC.im.tolist()}
    else:
        raise ContractViolationError(f"unsupported model object {type(p).__name__}")
    _act_to_json(d, p.activation)
    return d


def model_from_dict(d: dict):
    kind = d.get("kind")
    act = _act_from_json(d)
    if kind == "fftnet":
        return FFTNetParams(d["I"], d["H"], d["W"], d["V"], d["alpha"], act)
    if kind == "rftnet":
        return RFTNetParams(d["I"], d["H"], d["W"], d["V"], d["alpha"], act,
                            d.get("r0", np.zeros(d["H"])))
    if kind == "additive":
        return AdditiveFTNetParams(d["I"], d["H"], d["A"], d["B"], d["zeta"],
                                   d["alpha"], d.get("q0", np.zeros(d["H"])),
                                   act, float(d["c"]))
    if kind == "fnn":
        return FNNParams(d["I"], d["H"], d["W"], d["b"], d["alpha"], act)
    if kind == "rnn":
        return RNNParams(d["I"], d["H"], d["W"], d["V"], d["b"], d["alpha"],
                         d.get("m0", np.zeros(d["H"])), act)
    if kind == "crnet":
        wc = ComplexMatrix(np.asarray(d["W_re"], dtype=np.float64),
                           np.asarray(d["W_im"], dtype=np.float64))
        bc = ComplexVector(np.asarray(d["b_re"], dtype=np.float64),
                           np.asarray(d["b_im"], dtype=np.float64))
        ac = ComplexVector(np.asarray(d["alpha_re"], dtype=np.float64),
                           np.asarray(d["alpha_im"], dtype=np.float64))
        return CRNetParams(d["I"], d["H"], wc, bc, ac, act)
    raise ContractViolationError(f"unknown model kind {kind!r}")


def save_model(path, p) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(p), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


_KINDS = ((RFTNetParams, "rftnet"), (FFTNetParams, "fftnet"),
          (AdditiveFTNetParams, "additive"), (FNNParams, "fnn"),
          (RNNParams, "rnn"), (CRNetParams, "crnet"))


def model_kind(p) -> str:
    for typ, kind in _KINDS:
        if isinstance(p, typ):
            return kind
    raise ContractViolationError(f"unsupported model object {type(p).__name__}")
