"""Gradients over the real parameters (W, V, alpha), plain gradient-descent
training with backtracking, and the two-case descent probe for positive
losses on holomorphic networks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .activations import ActivationKind, apply, jacobian_parts
from .errors import ContractViolationError
from .losses import Dataset, LossSpec, check_well_posed, empirical_loss
from .models import (
    FFTNetParams,
    RFTNetParams,
    eval_fftnet_many,
    kappa_many,
)
from .numerics import ComplexMatrix, ComplexVector, null_vector_against, numerical_rank


@dataclass(frozen=True)
class GradientBundle:
    dW: np.ndarray
    dV: np.ndarray
    dAlpha: np.ndarray

    def __post_init__(self):
        for a in (self.dW, self.dV, self.dAlpha):
            if not np.all(np.isfinite(a)):
                raise ContractViolationError("gradient has non-finite entries")

    def max_abs(self) -> float:
        return max(np.max(np.abs(self.dW)), np.max(np.abs(self.dV)),
                   np.max(np.abs(self.dAlpha)))


@dataclass(frozen=True)
class TrainConfig:
    step_size: float = 0.05
    max_iters: int = 10000
    seed: int = 0
    target_loss: float = 0.0
    init_scale: float = 0.1

    def __post_init__(self):
        if self.step_size <= 0:
            raise ContractViolationError("step_size must be positive")


@dataclass(frozen=True)
class SequenceDataset:
    """Batched sequence regression targets; xs (B, T, I), ys (B, T)."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.float64)
        ys = np.asarray(self.ys, dtype=np.float64)
        if xs.ndim != 3 or ys.ndim != 2 or xs.shape[:2] != ys.shape:
            raise ContractViolationError("xs must be (B, T, I) and ys (B, T)")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)


# ---------------------------------------------------------------------------
# analytic gradients
# ---------------------------------------------------------------------------

def grad_fftnet(p: FFTNetParams, data: Dataset, spec: LossSpec) -> GradientBundle:
    """d/d(W, V, alpha) of the summed loss, real and imaginary parts as
    independent real coordinates."""
    k = kappa_many(data.xs, p.H)
    z = (k @ p.W.T) + 1j * (k @ p.V.T)
    act = np.asarray(apply(p.activation, z))
    s = act.real
    res = s @ p.alpha - data.ys
    lp = spec.deriv(res)
    j11, j12, _, _ = jacobian_parts(p.activation, z)
    gs = lp[:, None] * p.alpha[None, :]
    return GradientBundle(dW=(gs * j11).T @ k, dV=(gs * j12).T @ k,
                          dAlpha=s.T @ lp)


def grad_rftnet(p: RFTNetParams, data: SequenceDataset, spec: LossSpec) -> GradientBundle:
    """Reverse-mode gradient through the unrolled recurrence (r0 kept fixed)."""
    xs, ys = data.xs, data.ys
    if xs.shape[2] != p.I:
        raise ContractViolationError(f"expected sequences of shape (B, T, {p.I})")
    b, t_len, _ = xs.shape
    r = np.broadcast_to(p.r0, (b, p.H)).copy()
    cache = []
    outs = np.zeros((b, t_len))
    for t in range(t_len):
        kt = kappa_many(xs[:, t, :], p.H)
        z = (kt @ p.W.T - r @ p.V.T) + 1j * (kt @ p.V.T + r @ p.W.T)
        act = np.asarray(apply(p.activation, z))
        jac = jacobian_parts(p.activation, z)
        cache.append((kt, r, act.real, jac))
        r = act.imag
        outs[:, t] = act.real @ p.alpha
    lp = spec.deriv(outs - ys)

    dw = np.zeros_like(p.W)
    dv = np.zeros_like(p.V)
    da = np.zeros(p.H)
    gr = np.zeros((b, p.H))
    for t in range(t_len - 1, -1, -1):
        kt, r_prev, s, (j11, j12, j21, j22) = cache[t]
        gy = lp[:, t]
        gs = gy[:, None] * p.alpha[None, :]
        da += s.T @ gy
        ga = gs * j11 + gr * j21
        gb = gs * j12 + gr * j22
        dw += ga.T @ kt + gb.T @ r_prev
        dv += gb.T @ kt - ga.T @ r_prev
        gr = gb @ p.W - ga @ p.V
    return GradientBundle(dW=dw, dV=dv, dAlpha=da)


def _rftnet_loss(p: RFTNetParams, data: SequenceDataset, spec: LossSpec) -> float:
    from .models import eval_rftnet_many

    return float(np.sum(spec.value(eval_rftnet_many(p, data.xs) - data.ys)))


def finite_diff_grad(p: FFTNetParams, data: Dataset, spec: LossSpec,
                     step: float = 1e-5) -> GradientBundle:
    """Central differences per real coordinate; the oracle for grad_fftnet."""
    if not 1e-7 <= step <= 1e-3:
        raise ContractViolationError("step must lie in [1e-7, 1e-3]")

    def loss_of(w, v, a):
        return empirical_loss(FFTNetParams(p.I, p.H, w, v, a, p.activation),
                              data, spec)

    return _central_differences(p.W, p.V, p.alpha, loss_of, step)


def finite_diff_grad_rftnet(p: RFTNetParams, data: SequenceDataset, spec: LossSpec,
                            step: float = 1e-5) -> GradientBundle:
    if not 1e-7 <= step <= 1e-3:
        raise ContractViolationError("step must lie in [1e-7, 1e-3]")

    def loss_of(w, v, a):
        return _rftnet_loss(RFTNetParams(p.I, p.H, w, v, a, p.activation, p.r0),
                            data, spec)

    return _central_differences(p.W, p.V, p.alpha, loss_of, step)


def _central_differences(w0, v0, a0, loss_of, step):
    def diff_array(arr, rebuild):
        g = np.zeros_like(arr)
        flat = arr.ravel()
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + step
            hi = loss_of(*rebuild())
            flat[idx] = orig - step
            lo = loss_of(*rebuild())
            flat[idx] = orig
            g.ravel()[idx] = (hi - lo) / (2 * step)
        return g

    w, v, a = w0.copy(), v0.copy(), a0.copy()
    dw = diff_array(w, lambda: (w, v, a))
    dv = diff_array(v, lambda: (w, v, a))
    da = diff_array(a, lambda: (w, v, a))
    return GradientBundle(dW=dw, dV=dv, dAlpha=da)


def gradient_relative_error(g1: GradientBundle, g2: GradientBundle) -> float:
    num = max(np.max(np.abs(g1.dW - g2.dW)), np.max(np.abs(g1.dV - g2.dV)),
              np.max(np.abs(g1.dAlpha - g2.dAlpha)))
    den = max(g1.max_abs(), g2.max_abs(), 1e-12)
    return float(num / den)


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

def random_fftnet(I: int, H: int, activation: ActivationKind, scale: float,
                  rng: np.random.Generator) -> FFTNetParams:
    return FFTNetParams(I, H, scale * rng.standard_normal((H, H)),
                        scale * rng.standard_normal((H, H)),
                        scale * rng.standard_normal(H), activation)


def random_rftnet(I: int, H: int, activation: ActivationKind, scale: float,
                  rng: np.random.Generator) -> RFTNetParams:
    f = random_fftnet(I, H, activation, scale, rng)
    return RFTNetParams(I, H, f.W, f.V, f.alpha, activation, np.zeros(H))


def _descend(params, loss_of, grad_of, rebuild, cfg: TrainConfig):
    """Shared GD loop: accepted steps never increase the loss.

    Overshooting candidates may overflow to inf/nan; they are rejected by
    the finiteness check, so IEEE overflow is silenced within this loop.
    """
    w, v, a = (params.W.copy(), params.V.copy(), params.alpha.copy())
    with np.errstate(over="ignore", invalid="ignore"):
        cur = loss_of(w, v, a)
        if not math.isfinite(cur):
            raise RuntimeError(f"initial loss is not finite: {cur}")
        trace = [cur]
        step = cfg.step_size
        for _ in range(cfg.max_iters):
            if cur <= cfg.target_loss:
                break
            g = grad_of(w, v, a)
            accepted = False
            for _ in range(31):
                wn = w - step * g.dW
                vn = v - step * g.dV
                an = a - step * g.dAlpha
                cand = loss_of(wn, vn, an)
                if math.isfinite(cand) and cand < cur:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break  # no descent step at any scale; stationary for our purposes
            w, v, a, cur = wn, vn, an, cand
            trace.append(cur)
            step *= 2.0
    if not math.isfinite(cur):
        raise RuntimeError(f"loss diverged to {cur}")
    return rebuild(w, v, a), trace


def train_fftnet(p0: FFTNetParams, data: Dataset, spec: LossSpec,
                 cfg: TrainConfig):
    """Gradient descent with backtracking; returns (params, loss trace)."""
    return _descend(
        p0,
        loss_of=lambda w, v, a: empirical_loss(
            FFTNetParams(p0.I, p0.H, w, v, a, p0.activation), data, spec),
        grad_of=lambda w, v, a: grad_fftnet(
            FFTNetParams(p0.I, p0.H, w, v, a, p0.activation), data, spec),
        rebuild=lambda w, v, a: FFTNetParams(p0.I, p0.H, w, v, a, p0.activation),
        cfg=cfg,
    )


def train_rftnet(p0: RFTNetParams, data: SequenceDataset, spec: LossSpec,
                 cfg: TrainConfig):
    """Backpropagation through time on the unrolled recurrence."""
    def mk(w, v, a):
        return RFTNetParams(p0.I, p0.H, w, v, a, p0.activation, p0.r0)

    return _descend(
        p0,
        loss_of=lambda w, v, a: _rftnet_loss(mk(w, v, a), data, spec),
        grad_of=lambda w, v, a: grad_rftnet(mk(w, v, a), data, spec),
        rebuild=mk,
        cfg=cfg,
    )


# ---------------------------------------------------------------------------
# descent probe
# ---------------------------------------------------------------------------

PROBE_RADIUS_LEVELS = 40
PROBE_PHASES = 64
PROBE_C1_SAMPLES = 200
PROBE_C1_FLOOR = 1e-10
# keeps the reconstructed perturbation norm strictly inside the delta ball
# after rounding of |c| * ||v||
PROBE_RADIUS_MARGIN = 1.0 - 1e-9


@dataclass(frozen=True)
class ProbeResult:
    found: bool
    deltaZ: ComplexMatrix
    deltaAlpha: np.ndarray
    old_loss: float
    new_loss: float
    case_tag: str
    perturbation_norm: float

    def __post_init__(self):
        if self.found:
            if not self.new_loss < self.old_loss:
                raise ContractViolationError("found probe must strictly decrease loss")

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "case_tag": self.case_tag,
            "old_loss": self.old_loss,
            "new_loss": self.new_loss,
            "perturbation_norm": self.perturbation_norm,
            "deltaZ_re": self.deltaZ.re.tolist(),
            "deltaZ_im": self.deltaZ.im.tolist(),
            "deltaAlpha": self.deltaAlpha.tolist(),
        }


def _perturbation_norm(dz: ComplexMatrix, dalpha: np.ndarray) -> float:
    fro = math.sqrt(float(np.sum(dz.re**2 + dz.im**2)))
    return fro + float(np.linalg.norm(dalpha))


def _probe_preconditions(p: FFTNetParams, data: Dataset, spec: LossSpec) -> float:
    if not p.activation.is_holomorphic_nonpolynomial:
        raise ContractViolationError(
            "descent probe needs a holomorphic non-polynomial activation")
    wp = check_well_posed(spec)
    if not wp.passed:
        raise ContractViolationError(f"loss is not well posed: {wp.violations}")
    k = kappa_many(data.xs, p.H)
    if numerical_rank(k) < data.n:
        raise ContractViolationError("padded samples are not linearly independent")
    loss = empirical_loss(p, data, spec)
    if not loss > 0.0:
        raise ContractViolationError(
            "descent is only claimed for positive loss; nothing to improve")
    return loss


def _row_matrix(h: int, row: int, dz: np.ndarray) -> ComplexMatrix:
    re = np.zeros((h, h))
    im = np.zeros((h, h))
    re[row] = dz.real
    im[row] = dz.imag
    return ComplexMatrix(re, im)


def _apply_row_perturbation(p: FFTNetParams, row: int, dz: np.ndarray,
                            dalpha: np.ndarray) -> FFTNetParams:
    w = p.W.copy()
    v = p.V.copy()
    w[row] += dz.real
    v[row] += dz.imag
    return FFTNetParams(p.I, p.H, w, v, p.alpha + dalpha, p.activation)


def descent_probe(p: FFTNetParams, data: Dataset, spec: LossSpec,
                  delta: float = 0.1, seed: int = 0) -> ProbeResult:
    """Find a strict loss decrease within a delta-ball of (Z, alpha).

    Case 1 (some alpha_k nonzero): a rank-one row update c*v that moves only
    the worst sample's output, with c searched over geometric radii and 64
    phases.  Case 2 (alpha identically zero): sample a row perturbation
    until the readout's directional derivative is nonzero, then backtrack on
    the first readout weight.
    """
    if delta <= 0:
        raise ContractViolationError("delta must be positive")
    old_loss = _probe_preconditions(p, data, spec)
    k = kappa_many(data.xs, p.H)
    outs = eval_fftnet_many(p, data.xs)
    res = outs - data.ys

    if np.max(np.abs(p.alpha)) > 0.0:
        return _probe_case_alpha_nonzero(p, data, spec, delta, old_loss, k, res)
    return _probe_case_alpha_zero(p, data, spec, delta, seed, old_loss, k)


def _probe_case_alpha_nonzero(p, data, spec, delta, old_loss, k, res):
    j0 = int(np.argmax(np.abs(res)))
    k0 = int(np.argmax(np.abs(p.alpha)))
    v = null_vector_against([ComplexVector(k[j], np.zeros(p.H)) for j in range(data.n)],
                            keep=j0).to_complex()
    beta = complex(v @ k[j0])
    w0 = complex((p.W[k0] + 1j * p.V[k0]) @ k[j0])
    base = p.alpha[k0] * complex(apply(p.activation, w0)).real
    phases = np.exp(2j * np.pi * np.arange(PROBE_PHASES) / PROBE_PHASES)
    vnorm = float(np.linalg.norm(v))

    for level in range(PROBE_RADIUS_LEVELS):
        radius = PROBE_RADIUS_MARGIN * delta * 2.0**-level / vnorm
        cs = radius * phases
        terms = p.alpha[k0] * np.asarray(apply(p.activation, w0 + cs * beta)).real
        new_res_j0 = res[j0] - base + terms
        new_losses = old_loss - float(spec.value(res[j0])) + spec.value(new_res_j0)
        best = int(np.argmin(new_losses))
        if not new_losses[best] < old_loss:
            continue
        dz = cs[best] * v
        cand = _apply_row_perturbation(p, k0, dz, np.zeros(p.H))
        cand_loss = empirical_loss(cand, data, spec)
        if cand_loss < old_loss:
            dzm = _row_matrix(p.H, k0, dz)
            return ProbeResult(True, dzm, np.zeros(p.H), old_loss, cand_loss,
                               "alpha_nonzero", _perturbation_norm(dzm, np.zeros(p.H)))
    return ProbeResult(False, ComplexMatrix.zeros(p.H, p.H), np.zeros(p.H),
                       old_loss, old_loss, "alpha_nonzero", 0.0)


def _probe_case_alpha_zero(p, data, spec, delta, seed, old_loss, k):
    rng = np.random.default_rng(seed)
    lp = spec.deriv(-data.ys)
    z1 = p.W[0] + 1j * p.V[0]
    dz = None
    r_vals = None
    for _ in range(PROBE_C1_SAMPLES):
        direction = rng.standard_normal(p.H) + 1j * rng.standard_normal(p.H)
        direction /= np.linalg.norm(direction)
        cand = (delta / 2.0) * rng.uniform(0.2, 1.0) * direction
        vals = np.asarray(apply(p.activation, k @ (z1 + cand))).real
        c1 = float(lp @ vals)
        if abs(c1) > PROBE_C1_FLOOR:
            dz, r_vals, c1_sign = cand, vals, np.sign(c1)
            break
    if dz is None:
        return ProbeResult(False, ComplexMatrix.zeros(p.H, p.H), np.zeros(p.H),
                           old_loss, old_loss, "alpha_zero", 0.0)

    eta = PROBE_RADIUS_MARGIN * delta / 2.0
    for _ in range(PROBE_RADIUS_LEVELS + 1):
        da1 = -c1_sign * eta
        new_loss = float(np.sum(spec.value(da1 * r_vals - data.ys)))
        if new_loss < old_loss:
            dalpha = np.zeros(p.H)
            dalpha[0] = da1
            cand_params = _apply_row_perturbation(p, 0, dz, dalpha)
            cand_loss = empirical_loss(cand_params, data, spec)
            if cand_loss < old_loss:
                dzm = _row_matrix(p.H, 0, dz)
                return ProbeResult(True, dzm, dalpha, old_loss, cand_loss,
                                   "alpha_zero", _perturbation_norm(dzm, dalpha))
        eta /= 2.0
    return ProbeResult(False, ComplexMatrix.zeros(p.H, p.H), np.zeros(p.H),
                       old_loss, old_loss, "alpha_zero", 0.0)


def holomorphic_bidirectional_search(g, z0, delta: float, max_levels: int = 20):
    """Perturbations raising and lowering Re[g] with squared norm <= delta.

    Returns (dz_up, dz_down); either entry is None when the search budget is
    exhausted (e.g. g locally constant).
    """
    z0 = np.asarray(z0, dtype=np.complex128)
    m = z0.shape[0]
    base = complex(g(z0)).real
    directions = [np.eye(m, dtype=np.complex128)[j] for j in range(m)]
    directions.append(np.ones(m, dtype=np.complex128) / math.sqrt(m))
    phases = np.exp(2j * np.pi * np.arange(PROBE_PHASES) / PROBE_PHASES)
    up = down = None
    for level in range(max_levels):
        r = PROBE_RADIUS_MARGIN * math.sqrt(delta) * 2.0**-level
        for d in directions:
            for ph in phases:
                dz = r * ph * d
                val = complex(g(z0 + dz)).real
                if up is None and val > base:
                    up = dz
                if down is None and val < base:
                    down = dz
                if up is not None and down is not None:
                    return up, down
    return up, down
