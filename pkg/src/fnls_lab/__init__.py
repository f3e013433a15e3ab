"""Spectral laboratory for the fractional NLS on the d-torus.

Layout: spectral (grids, transforms, multipliers), kernel (dispersive
kernel bounds and Strichartz quotients), energetics (conserved and
modified energies, product-rule defects), evolution (split-step and
Picard solvers), growth (long-run experiments and Gronwall oracles),
data (seeded initial-data families), record/ioutil (bit-stable output),
config/experiments/cli (the experiment runner surface).
"""

__version__ = "0.1.0"

from .errors import (
    BlowUpError,
    ConfigError,
    DimensionError,
    DomainError,
    HalfWaveError,
    PicardDivergenceError,
    PreconditionError,
    RecordError,
    ResolutionError,
    SingularMultiplierError,
    SpanError,
    StiffnessError,
    ToleranceError,
)
from .spectral import (
    SpectralField,
    TorusGrid,
    analyze,
    apply_fractional_power,
    apply_multiplier,
    fractional_symbol,
    l2_norm,
    lebesgue_norm,
    sobolev_norm,
    synthesize,
)
from .kernel import (
    DecayEnvelope,
    EnvelopeReport,
    dispersion_exponents,
    envelope_certificate,
    kernel_eval,
    poisson_block_sum,
    sharpness_wavepacket,
    strichartz_quotient,
    strichartz_scaling,
    van_der_corput_check,
)
from .energetics import (
    ModifiedEnergyBreakdown,
    commutator,
    energy,
    equivalence_threshold,
    growth_constants,
    hamiltonian,
    leibniz_defect,
    mass,
    modified_energy,
    modified_energy_general,
)
from .evolution import (
    EquationParams,
    EvolveResult,
    PicardResult,
    dealias,
    evolve,
    linear_propagate,
    picard_solve,
    splitstep_step,
)
from .data import make_initial_data
from .growth import (
    AccumulationConfig,
    GronwallSpec,
    GronwallTerm,
    GrowthExperimentConfig,
    fit_growth_exponent,
    gronwall_variant2_oracle,
    gronwall_variant_oracle,
    growth_bound,
    growth_experiment,
    strichartz_accumulation,
)
from .record import RunRecord
