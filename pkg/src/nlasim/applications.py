"""Applications of the amplifier: coherent-state cloning and
entanglement distillation through a lossy line, plus the quadrature
purity figure of merit used to score the distilled states."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonconvergentError, TruncationError
from .fock import (
    DensityOperator,
    MultiModeState,
    annihilation,
    coherent_state,
    density_from_state,
    epr_state,
    fidelity,
    minimal_coherent_cutoff,
    minimal_epr_cutoff,
    number_state,
    partial_trace,
    tensor,
)
from .nla import (
    HeraldRecord,
    asymptotic_operator,
    eta_from_gain,
    gain_from_eta,
    nla_apply,
    nla_operator,
)
from .optics import BeamsplitterSpec, apply_beamsplitter, loss_channel


@dataclass(frozen=True)
class EffectiveEprParams:
    """Effective two-mode squeezing and line transmission after amplifying
    the lossy arm; ``physical`` is False once chi_prime reaches 1."""

    chi_prime: float
    eps_prime: float
    physical: bool


@dataclass(frozen=True)
class PurityReport:
    """Quadrature-correlation variances of a two-mode state.

    ``v_minus`` is the squeezed combination (the smaller of the two signs),
    ``v_plus`` the conjugate anti-squeezed one, both normalized so vacuum
    gives 1. Their product is 1 exactly for pure two-mode squeezing and
    grows with mixedness.
    """

    v_minus: float
    v_plus: float
    product: float
    success_prob: float | None


def distill_params(chi: float, epsilon: float, gain: float) -> EffectiveEprParams:
    """Effective parameters after amplifying the lossy arm with ``gain``:

        chi' = chi * sqrt(1 + (g**2 - 1) * eps)
        eps' = g**2 * eps / (1 + (g**2 - 1) * eps)

    Unphysical requests (chi' >= 1) are flagged, not raised.
    """
    if not 0.0 <= chi < 1.0:
        raise ValueError("chi must lie in [0, 1)")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("transmission must lie in [0, 1]")
    if gain <= 0.0:
        raise ValueError("gain must be positive")
    boost = 1.0 + (gain**2 - 1.0) * epsilon
    chi_prime = chi * math.sqrt(boost)
    eps_prime = gain**2 * epsilon / boost
    return EffectiveEprParams(chi_prime, eps_prime, chi_prime < 1.0)


def lossy_epr(chi: float, epsilon: float, cutoff: int) -> DensityOperator:
    """Two-mode squeezed state with one arm sent through transmission
    ``epsilon``; the analytic target of the distillation pipeline."""
    return loss_channel(epr_state(chi, cutoff), epsilon, mode=0)


#: Largest cutoff the automatic sizing will pick: two-mode density
#: operators cost memory and eigensolves like cutoff**4 and cutoff**6.
AUTO_CUTOFF_CAP = 40


def _distill_cutoff(chi: float, chi_prime: float, arm_count: int | None) -> int:
    cutoff = minimal_epr_cutoff(chi)
    if chi_prime < 1.0:
        cutoff = max(cutoff, minimal_epr_cutoff(chi_prime))
    if arm_count is not None:
        cutoff = max(cutoff, arm_count + 1)
    if cutoff > AUTO_CUTOFF_CAP:
        raise TruncationError(
            f"this run needs cutoff {cutoff} (> {AUTO_CUTOFF_CAP}) to keep "
            "truncation tails below 1e-12; pass an explicit cutoff to accept "
            "the cost, or lower the source squeezing or the gain"
        )
    return cutoff


def distill_numeric(
    chi: float,
    epsilon: float,
    arm_count: int | None = None,
    eta: float | None = None,
    cutoff: int | None = None,
    *,
    gain: float | None = None,
) -> tuple[DensityOperator, HeraldRecord, float]:
    """Full numeric distillation run.

    Builds the loss purification of the two-mode squeezed state, amplifies
    the transmitted arm (mode 0), traces out the loss mode and reports the
    fidelity against the analytic target, the lossy state with the
    effective parameters. Finite runs need ``arm_count`` and ``eta`` and
    return the unnormalized state whose trace is the success probability;
    with ``arm_count=None`` the ideal map with ``gain`` is used instead
    and no probability is defined.
    """
    if arm_count is None:
        if gain is None:
            if eta is None:
                raise ValueError("ideal runs need a gain or an eta")
            gain = gain_from_eta(eta)
    else:
        if eta is None:
            if gain is None:
                raise ValueError("finite runs need an eta or a gain")
            eta = eta_from_gain(gain)
        gain = gain_from_eta(eta)

    params = distill_params(chi, epsilon, gain)
    if cutoff is None:
        cutoff = _distill_cutoff(chi, params.chi_prime, arm_count)

    source = epr_state(chi, cutoff)
    purified = loss_channel(source, epsilon, mode=0, keep_environment=True)
    if arm_count is None:
        op = asymptotic_operator(gain, cutoff)
    else:
        op = nla_operator(arm_count, eta, cutoff)
    amplified, herald = nla_apply(purified, op, mode=0)
    rho = partial_trace(amplified, [2])

    if params.physical:
        target = lossy_epr(params.chi_prime, params.eps_prime, cutoff)
        fid = fidelity(rho, target)
    else:
        fid = math.nan
    return rho, herald, fid


def clone_coherent(
    alpha: complex,
    arm_count: int | None = None,
    eta: float = 1.0 / 3.0,
    cutoff: int | None = None,
) -> tuple[MultiModeState, HeraldRecord]:
    """Duplicate a coherent state: amplify to sqrt(2) alpha, then split
    50:50 against vacuum so both outputs carry amplitude alpha.

    ``eta = 1/3`` realizes the required gain sqrt(2) exactly. With
    ``arm_count=None`` the ideal map is used and each clone is exact; at
    finite arm count the returned pair is unnormalized and its squared
    norm is the success probability.
    """
    alpha = complex(alpha)
    gain = gain_from_eta(eta)
    if cutoff is None:
        cutoff = max(
            minimal_coherent_cutoff(gain * alpha),
            minimal_coherent_cutoff(alpha),
            (arm_count or 0) + 1,
        )
    source = coherent_state(alpha, cutoff)
    if arm_count is None:
        op = asymptotic_operator(gain, cutoff)
    else:
        op = nla_operator(arm_count, eta, cutoff)
    amplified, herald = nla_apply(source, op)
    # vacuum first: this mode ordering hands +alpha to both outputs
    pair = tensor(number_state(0, cutoff), amplified)
    pair = apply_beamsplitter(pair, BeamsplitterSpec(0.5, (0, 1)))
    return pair, herald


def clone_fidelities(pair: MultiModeState, alpha: complex) -> tuple[float, float]:
    """Fidelity of each reduced clone against the ideal coherent state."""
    target = coherent_state(alpha)
    rho_a = partial_trace(pair, [1])
    rho_b = partial_trace(pair, [0])
    return fidelity(rho_a, target), fidelity(rho_b, target)


def postselected_prior_variance(prior_variance: float, gain: float) -> float:
    """Variance of the coherent-amplitude prior after postselection.

    A Gaussian ensemble p(alpha) ~ exp(-|alpha|**2 / d) reweighted by the
    state-dependent success probability ~ exp((g**2 - 1) |alpha|**2) stays
    Gaussian with d' = d / (1 - (g**2 - 1) d); once (g**2 - 1) d >= 1 the
    reweighted distribution is not normalizable.
    """
    if prior_variance < 0.0:
        raise ValueError("variance must be nonnegative")
    if gain <= 0.0:
        raise ValueError("gain must be positive")
    excess = (gain**2 - 1.0) * prior_variance
    if excess >= 1.0:
        raise NonconvergentError(
            f"postselected prior diverges: (g**2 - 1) * d = {excess:.6g} >= 1"
        )
    return prior_variance / (1.0 - excess)


def sample_postselected_variance(
    prior_variance: float,
    gain: float,
    n_samples: int = 1_000_000,
    seed: int = 0,
    radius_sq: float | None = None,
) -> dict:
    """Monte-Carlo check of the postselected-prior variance map.

    Draws complex amplitudes from the prior, accepts by rejection against
    the maximum of the success weight exp((g**2 - 1) |alpha|**2) on a disk
    and returns the empirical mean of |alpha|**2 with its standard error.
    The disk is sized so the clipped tail bias is negligible against the
    statistical error.
    """
    expected = postselected_prior_variance(prior_variance, gain)
    if radius_sq is None:
        radius_sq = 14.0 * max(expected, prior_variance)
    rng = np.random.default_rng(seed)
    scale = math.sqrt(prior_variance / 2.0)
    re = rng.normal(0.0, scale, n_samples)
    im = rng.normal(0.0, scale, n_samples)
    mag_sq = re**2 + im**2
    log_weight = (gain**2 - 1.0) * (mag_sq - radius_sq)
    accept = (mag_sq <= radius_sq) & (rng.random(n_samples) < np.exp(log_weight))
    kept = mag_sq[accept]
    if kept.size < 2:
        raise ValueError("too few accepted samples; widen the budget")
    estimate = float(kept.mean())
    stderr = float(kept.std(ddof=1) / math.sqrt(kept.size))
    return {
        "expected": expected,
        "estimate": estimate,
        "stderr": stderr,
        "n_accepted": int(kept.size),
    }


def _quadrature_ops(cutoffs) -> tuple[list, list]:
    xs, ps = [], []
    eyes = [np.eye(c) for c in cutoffs]
    for m, c in enumerate(cutoffs):
        a = annihilation(c)
        x1 = a + a.conj().T
        p1 = -1j * (a - a.conj().T)
        ops = [x1 if k == m else eyes[k] for k in range(len(cutoffs))]
        full = ops[0]
        for o in ops[1:]:
            full = np.kron(full, o)
        xs.append(full)
        ops = [p1 if k == m else eyes[k] for k in range(len(cutoffs))]
        full = ops[0]
        for o in ops[1:]:
            full = np.kron(full, o)
        ps.append(full)
    return xs, ps


def purity_product(state) -> PurityReport:
    """Squeezed and anti-squeezed quadrature-correlation variances of a
    two-mode state.

    Quadratures are X = a + a+ and P = -i(a - a+) with vacuum variance 1.
    The squeezed combination is the smaller-variance sign of
    (X_A +/- X_B)/sqrt(2); the anti-squeezed one is its noncommuting
    conjugate, the same-sign combination (P_A +/- P_B)/sqrt(2), so the
    product obeys the uncertainty bound >= 1. A pure two-mode squeezed
    state with parameter chi = tanh(r) gives exp(-2r), exp(+2r) and
    product 1.
    """
    if isinstance(state, DensityOperator):
        rho = state
    else:
        rho = density_from_state(state)
    if rho.n_modes != 2:
        raise ValueError("purity product is defined for two-mode states")
    success = rho.trace
    mat = rho.matrix / success
    (xa, xb), (pa, pb) = _quadrature_ops(rho.basis_cutoffs)

    def variance(op):
        mean = float(np.trace(mat @ op).real)
        mean_sq = float(np.trace(mat @ op @ op).real)
        return mean_sq - mean**2

    v_x = {sign: variance(xa + sign * xb) / 2.0 for sign in (-1.0, +1.0)}
    sign = min(v_x, key=v_x.get)
    v_minus = v_x[sign]
    v_plus = variance(pa + sign * pb) / 2.0
    return PurityReport(v_minus, v_plus, v_minus * v_plus, success)


def distill_purity_tradeoff(
    gains,
    epsilon: float = 0.5,
    target_r: float = 0.4,
    arm_count: int = 2,
    cutoff: int | None = None,
) -> list:
    """Purity-versus-success sweep at a fixed distilled correlation.

    The channel transmission is held at ``epsilon`` and the distilled
    two-mode squeezing at ``tanh(target_r)``; for each gain the source
    squeezing is solved from the effective-parameter map and the stage
    transmissivity from the gain. Higher gain buys a purer output at a
    lower success probability.
    """
    chi_target = math.tanh(target_r)
    rows = []
    for gain in gains:
        boost = 1.0 + (gain**2 - 1.0) * epsilon
        chi_source = chi_target / math.sqrt(boost)
        eta = eta_from_gain(gain)
        rho, herald, fid = distill_numeric(
            chi_source, epsilon, arm_count, eta, cutoff
        )
        report = purity_product(rho)
        rows.append(
            {
                "chi_source": chi_source,
                "gain": gain,
                "arms": arm_count,
                "eta": eta,
                "success_prob": herald.success_probability,
                "v_minus": report.v_minus,
                "v_plus": report.v_plus,
                "product": report.product,
                "fidelity": fid,
            }
        )
    return rows
