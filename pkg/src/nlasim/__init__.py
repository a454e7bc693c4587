"""Truncated Fock-space simulation of a heralded noiseless linear
amplifier, its brute-force circuit oracle, and its two applications:
probabilistic coherent-state cloning and entanglement distillation."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    NonconvergentError,
    TruncationError,
    TruncationWarning,
)
from .fock import (
    DensityOperator,
    FockVector,
    ModeOperator,
    MultiModeState,
    annihilation,
    coherent_state,
    density_from_state,
    epr_state,
    fidelity,
    minimal_coherent_cutoff,
    minimal_epr_cutoff,
    norm_sq,
    normalize,
    number_state,
    pad_state,
    partial_trace,
    project_number,
    purity,
    tensor,
    vacuum,
)
from .optics import (
    BeamsplitterSpec,
    NsplitterSpec,
    apply_beamsplitter,
    apply_nsplitter,
    loss_channel,
    phase_shift,
)
from .nla import (
    DiagonalAmplifierOp,
    HeraldRecord,
    ScissorOutcome,
    asymptotic_operator,
    eta_from_gain,
    gain_from_eta,
    misfire_density,
    misfire_terms,
    nla_apply,
    nla_operator,
    physical_circuit,
    scissor_outcome,
    success_probability_asymptotic,
)
from .applications import (
    EffectiveEprParams,
    PurityReport,
    clone_coherent,
    clone_fidelities,
    distill_numeric,
    distill_params,
    distill_purity_tradeoff,
    lossy_epr,
    postselected_prior_variance,
    purity_product,
    sample_postselected_variance,
)

__all__ = [
    "__version__",
    "ConfigError",
    "NonconvergentError",
    "TruncationError",
    "TruncationWarning",
    "DensityOperator",
    "FockVector",
    "ModeOperator",
    "MultiModeState",
    "annihilation",
    "coherent_state",
    "density_from_state",
    "epr_state",
    "fidelity",
    "minimal_coherent_cutoff",
    "minimal_epr_cutoff",
    "norm_sq",
    "normalize",
    "number_state",
    "pad_state",
    "partial_trace",
    "project_number",
    "purity",
    "tensor",
    "vacuum",
    "BeamsplitterSpec",
    "NsplitterSpec",
    "apply_beamsplitter",
    "apply_nsplitter",
    "loss_channel",
    "phase_shift",
    "DiagonalAmplifierOp",
    "HeraldRecord",
    "ScissorOutcome",
    "asymptotic_operator",
    "eta_from_gain",
    "gain_from_eta",
    "misfire_density",
    "misfire_terms",
    "nla_apply",
    "nla_operator",
    "physical_circuit",
    "scissor_outcome",
    "success_probability_asymptotic",
    "EffectiveEprParams",
    "PurityReport",
    "clone_coherent",
    "clone_fidelities",
    "distill_numeric",
    "distill_params",
    "distill_purity_tradeoff",
    "lossy_epr",
    "postselected_prior_variance",
    "purity_product",
    "sample_postselected_variance",
]
