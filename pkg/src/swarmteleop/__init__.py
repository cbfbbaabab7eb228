"""Posterior-matching teleoperation of a coverage-controlled robot swarm.

Core pieces: ordered heterogeneous dictionaries of swarm configurations,
the bisection codec that steers a selection through noisy binary inputs,
channel models for those inputs, the swarm coverage simulation, trial
metrics, a batch experiment harness, the signal-classification pipeline,
and an interactive session service.
"""

from .channel import (
    CrossoverSamples,
    ErrorProfile,
    FixedProfile,
    PchipProfile,
    build_pchip,
    corrupt,
    default_nonstationary_profile,
    fit_cubic,
)
from .codec import (
    GuessOutcome,
    PosteriorState,
    StoppingRule,
    StopResult,
    check_stopped,
    correct_input,
    init_posterior,
    map_estimate,
    select_guess,
    stepwise_init,
    stepwise_update,
    update_posterior,
)
from .dictionary import (
    Alphabet,
    ArenaSpec,
    ConfigString,
    DictionarySpec,
    PolygonSpec,
    compare,
    decode_index,
    encode_string,
    load_dictionary,
    swarm_dictionary,
    synthetic_dictionary,
    to_polygon,
    to_unit,
)
from .harness import (
    ExperimentConfig,
    ThresholdTable,
    generate_threshold_table,
    lookup_threshold,
    run_trials,
    sweep_dictionaries,
)
from .metrics import (
    MetricSeries,
    TrialRecord,
    alphabet_metrics,
    bin_trials,
    bootstrap_ci,
    chance_pvalue,
    dictionary_distance,
    error_free_accuracy,
    itr,
    wilson_interval,
)
from .swarm import (
    DensityField,
    SwarmParams,
    SwarmState,
    centroids,
    control_step,
    polygon_to_gmm,
    random_swarm,
    settled,
    voronoi_partition,
)

__version__ = "0.1.0"
