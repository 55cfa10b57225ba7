"""ADMM solver for low-rank Tucker denoising with the LRSTV gradient prior.

The observation ``O`` is split as ``O = L + S`` with ``L`` of bounded
multilinear rank and ``S`` sparse. The gradient prior is imposed through the
auxiliaries

    Z = L,    F = D_w(Z),    E = F,

where ``D_w`` stacks the three weighted periodic differences. ``F`` carries
the l1 (sparsity) penalty and ``E`` the tensor nuclear norm (low-rank)
penalty of each gradient map.
"""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import metrics
from .prox import hooi, soft_threshold, t_svt_with_norm, tnn, tucker_reconstruct
from .regularizers import RegWeights
from .tensor import check_cube, diff, diff_adjoint, diff_kernel

__all__ = [
    "TDLRSTV",
    "SSTV_BASELINE",
    "SolverConfig",
    "SolverState",
    "IterationTrace",
    "SolveResult",
    "apply_dw",
    "apply_dw_adjoint",
    "initial_state",
    "update_L",
    "update_Z",
    "update_F",
    "update_E",
    "update_S",
    "update_multipliers",
    "objective",
    "solve",
    "with_mode",
]

logger = logging.getLogger(__name__)

TDLRSTV = "tdlrstv"
SSTV_BASELINE = "sstv_baseline"


@dataclass(frozen=True)
class SolverConfig:
    weights: RegWeights
    ranks: tuple
    mu0: float = 1e-2
    rho: float = 1.5
    mu_max: float = 1e8
    epsilon: float = 1e-6
    max_iters: int = 100
    mode: str = TDLRSTV
    hooi_sweeps: int = 3
    hooi_tol: float = 1e-6

    def __post_init__(self):
        if self.mode not in (TDLRSTV, SSTV_BASELINE):
            raise ValueError(f"mode must be {TDLRSTV!r} or {SSTV_BASELINE!r}")
        if not 0 < self.mu0 <= self.mu_max:
            raise ValueError("need 0 < mu0 <= mu_max")
        if self.rho < 1:
            raise ValueError("rho must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if len(self.ranks) != 3 or any(int(r) < 1 for r in self.ranks):
            raise ValueError(f"ranks must be three positive integers, got {self.ranks}")

    @classmethod
    def for_shape(cls, shape, rank3=3, tau=0.01, alpha=0.3, lambda_c=10.0,
                  w=(1.0, 1.0, 1.0), spatial_rank_ratio=0.8, **kwargs):
        """Config with ``lam = lambda_c / sqrt(m n)`` and spatial ranks ``ceil(0.8 m)``, ``ceil(0.8 n)``."""
        m, n, p = shape
        lam = lambda_c / math.sqrt(m * n)
        ranks = (
            min(m, math.ceil(spatial_rank_ratio * m)),
            min(n, math.ceil(spatial_rank_ratio * n)),
            min(p, int(rank3)),
        )
        weights = RegWeights(tau=tau, alpha=alpha, w=w, lam=lam)
        return cls(weights=weights, ranks=ranks, **kwargs)

    @property
    def uses_low_rank_gradient(self):
        # with alpha == 0 the E-split is vacuous and is dropped entirely
        return self.mode == TDLRSTV and self.weights.alpha > 0


@dataclass
class SolverState:
    L: np.ndarray
    Z: np.ndarray
    S: np.ndarray
    F: np.ndarray  # (3, m, n, p)
    E: np.ndarray  # (3, m, n, p)
    G1: np.ndarray
    G2: np.ndarray
    G3: np.ndarray  # (3, m, n, p)
    G4: np.ndarray  # (3, m, n, p)
    mu: float
    iter: int = 0


@dataclass
class IterationTrace:
    iter: int
    rel_change: float
    residual_fit: float
    residual_split: float
    objective: float
    mu: float
    psnr: float = None
    ssim: float = None


@dataclass
class SolveResult:
    L: np.ndarray
    S: np.ndarray
    trace: list
    converged: bool
    state: SolverState = field(repr=False)

    def __iter__(self):
        return iter((self.L, self.S, self.trace))


def apply_dw(z, w):
    """Weighted gradient stack ``[w1 D1 z; w2 D2 z; w3 D3 z]`` of shape ``(3, m, n, p)``."""
    return np.stack([wn * diff(z, n) for n, wn in zip((1, 2, 3), w)])


def apply_dw_adjoint(g, w):
    """Adjoint of :func:`apply_dw`: ``sum_n w_n D_n^T g_n``."""
    return sum(wn * diff_adjoint(g[n - 1], n) for n, wn in zip((1, 2, 3), w))


def _dw_spectrum(dims, w):
    """Eigenvalues of ``D_w^* D_w``: ``sum_n w_n^2 |fftn(d_n)|^2``."""
    return sum(
        wn**2 * np.abs(np.fft.fftn(diff_kernel(dims, n))) ** 2
        for n, wn in zip((1, 2, 3), w)
    )


def initial_state(obs, cfg):
    """``L = Z = O``, ``S = 0``, ``F = E = D_w(O)``, zero multipliers."""
    obs = np.asarray(obs, dtype=np.float64)
    f = apply_dw(obs, cfg.weights.w)
    zeros = np.zeros_like(obs)
    return SolverState(
        L=obs.copy(), Z=obs.copy(), S=zeros.copy(), F=f, E=f.copy(),
        G1=zeros.copy(), G2=zeros.copy(),
        G3=np.zeros_like(f), G4=np.zeros_like(f),
        mu=float(cfg.mu0),
    )


def update_L(state, obs, cfg):
    """Best rank-``cfg.ranks`` Tucker fit (HOOI) of ``(O - S + Z + (G1 - G2)/mu) / 2``."""
    mu = state.mu
    target = 0.5 * (obs - state.S + state.Z + (state.G1 - state.G2) / mu)
    factors = hooi(target, cfg.ranks, cfg.hooi_sweeps, cfg.hooi_tol)
    return factors, tucker_reconstruct(factors)


def update_Z(state, cfg, spectrum=None):
    """Exact solve of ``(mu I + mu D_w^* D_w) Z = mu L + mu D_w^*(F) + G2 - D_w^*(G3)`` by FFT."""
    mu = state.mu
    w = cfg.weights.w
    if spectrum is None:
        spectrum = _dw_spectrum(state.L.shape, w)
    rhs = mu * state.L + mu * apply_dw_adjoint(state.F, w) + state.G2 - apply_dw_adjoint(state.G3, w)
    z = np.fft.ifftn(np.fft.fftn(rhs) / (mu + mu * spectrum))
    return np.ascontiguousarray(z.real)


def update_F(state, cfg):
    """Soft-threshold (at ``tau/mu``) the average of the two gradient estimates.

    ``T1 = D_w(Z) + G3/mu`` and ``T2 = E + G4/mu``. Without the low-rank
    gradient branch only ``T1`` is used.
    """
    mu = state.mu
    t1 = apply_dw(state.Z, cfg.weights.w) + state.G3 / mu
    if not cfg.uses_low_rank_gradient:
        return soft_threshold(t1, cfg.weights.tau / mu)
    t2 = state.E + state.G4 / mu
    return soft_threshold(0.5 * (t1 + t2), cfg.weights.tau / mu)


def update_E(state, cfg, return_norm=False):
    """Tensor SVT of each gradient map ``F_n - G4_n/mu`` at threshold ``alpha/mu``."""
    mu = state.mu
    thr = cfg.weights.alpha / mu
    out = np.empty_like(state.F)
    total = 0.0
    for n in range(3):
        out[n], nrm = t_svt_with_norm(state.F[n] - state.G4[n] / mu, thr)
        total += nrm
    if return_norm:
        return out, total
    return out


def update_S(state, obs, cfg):
    """Soft-threshold ``O - L + G1/mu`` at ``lam/mu``."""
    mu = state.mu
    return soft_threshold(obs - state.L + state.G1 / mu, cfg.weights.lam / mu)


def update_multipliers(state, obs, cfg):
    """Dual ascent on the four constraints followed by ``mu = min(rho mu, mu_max)``."""
    mu = state.mu
    g1 = state.G1 + mu * (obs - state.L - state.S)
    g2 = state.G2 + mu * (state.L - state.Z)
    g3 = state.G3 + mu * (apply_dw(state.Z, cfg.weights.w) - state.F)
    if cfg.uses_low_rank_gradient:
        g4 = state.G4 + mu * (state.E - state.F)
    else:
        g4 = state.G4
    return g1, g2, g3, g4, min(cfg.rho * mu, cfg.mu_max)


def objective(state, cfg, e_norm=None):
    """``tau ||F||_1 + alpha sum_n tnn(E_n) + lam ||S||_1``."""
    w = cfg.weights
    val = w.tau * float(np.sum(np.abs(state.F))) + w.lam * float(np.sum(np.abs(state.S)))
    if cfg.uses_low_rank_gradient:
        if e_norm is None:
            e_norm = sum(tnn(state.E[n]) for n in range(3))
        val += w.alpha * e_norm
    return val


def _check_finite(name, arr):
    if not np.all(np.isfinite(arr)):
        raise FloatingPointError(f"non-finite values produced by the {name} update")


def solve(obs, cfg, ground_truth=None, callback=None):
    """Run the ADMM iterations.

    Parameters
    ----------
    obs : ndarray (m, n, p)
        Noisy observation.
    cfg : SolverConfig
    ground_truth : ndarray, optional
        Clean cube; when given, PSNR and SSIM are recorded every iteration.
    callback : callable, optional
        Called as ``callback(state, trace_record)`` after each iteration.

    Returns
    -------
    SolveResult
        Restored ``L``, sparse ``S``, per-iteration trace and whether the
        stopping rule ``max(||O-L-S||_inf, ||L-Z||_inf) <= epsilon`` was met.
    """
    obs = check_cube(obs, "observation")
    for k, (r, d) in enumerate(zip(cfg.ranks, obs.shape), start=1):
        if r > d:
            raise ValueError(f"rank {r} for mode {k} exceeds dimension {d}")
    if ground_truth is not None:
        ground_truth = check_cube(ground_truth, "ground truth")
        if ground_truth.shape != obs.shape:
            raise ValueError("ground truth shape differs from observation")

    state = initial_state(obs, cfg)
    spectrum = _dw_spectrum(obs.shape, cfg.weights.w)
    low_rank = cfg.uses_low_rank_gradient
    trace = []
    converged = False

    for it in range(1, cfg.max_iters + 1):
        mu = state.mu
        l_prev = state.L

        _, state.L = update_L(state, obs, cfg)
        _check_finite("L", state.L)
        state.Z = update_Z(state, cfg, spectrum)
        _check_finite("Z", state.Z)
        state.F = update_F(state, cfg)
        _check_finite("F", state.F)
        e_norm = None
        if low_rank:
            state.E, e_norm = update_E(state, cfg, return_norm=True)
            _check_finite("E", state.E)
        state.S = update_S(state, obs, cfg)
        _check_finite("S", state.S)
        state.G1, state.G2, state.G3, state.G4, state.mu = update_multipliers(state, obs, cfg)
        state.iter = it

        fit = float(np.max(np.abs(obs - state.L - state.S)))
        split = float(np.max(np.abs(state.L - state.Z)))
        denom = float(np.linalg.norm(l_prev))
        rel = float(np.linalg.norm(state.L - l_prev)) / denom if denom else float("inf")
        rec = IterationTrace(
            iter=it, rel_change=rel, residual_fit=fit, residual_split=split,
            objective=objective(state, cfg, e_norm), mu=mu,
        )
        if ground_truth is not None:
            rec.psnr = metrics.mpsnr(ground_truth, state.L)
            if min(obs.shape[:2]) >= metrics.SSIM_WIN:
                rec.ssim = metrics.mssim(ground_truth, state.L)
        trace.append(rec)
        if callback is not None:
            callback(state, rec)
        logger.debug("iter %d mu=%.3g fit=%.3e split=%.3e rel=%.3e", it, mu, fit, split, rel)

        if max(fit, split) <= cfg.epsilon:
            converged = True
            break

    return SolveResult(L=state.L, S=state.S, trace=trace, converged=converged, state=state)


def with_mode(cfg, mode):
    """Copy of ``cfg`` running in ``mode``."""
    return replace(cfg, mode=mode)
