"""Discrete object-oriented Bayesian networks: inference, composition,
sensitivity analysis and learning, with a bundled Stateless Ethereum
ecosystem-health model."""

from .dsep import d_separated, markov_blanket
from .errors import OobnLabError
from .inference import (
    Posterior,
    brute_force_marginal,
    elimination_order,
    marginal,
    posterior_all,
    probability_of_evidence,
)
from .learning import (
    Column,
    Dataset,
    chow_liu_tree,
    empirical_mutual_information,
    fit_network,
    mle_cpts,
    sample_dataset,
)
from .network import (
    Cpt,
    Network,
    Variable,
    build_network,
    joint_probability,
    network_from_dict,
    network_from_json,
    network_to_dict,
    network_to_json,
    topological_order,
)
from .oobn import (
    Binding,
    Instance,
    OobnTemplate,
    TemplateLibrary,
    check_binding,
    define_template,
    flatten,
    library_from_dict,
    library_to_dict,
    run_submodel,
)
from .sensitivity import (
    EvidenceSensitivityRange,
    ParameterRef,
    SensitivityFunction,
    covary_cpt_row,
    entropy,
    evidence_sensitivity_ranges,
    mutual_information,
    rank_parameters,
    sensitivity_function,
    sensitivity_value,
)

__version__ = "0.1.0"

__all__ = [
    "Binding",
    "Column",
    "Cpt",
    "Dataset",
    "EvidenceSensitivityRange",
    "Instance",
    "Network",
    "OobnLabError",
    "OobnTemplate",
    "ParameterRef",
    "Posterior",
    "SensitivityFunction",
    "TemplateLibrary",
    "Variable",
    "brute_force_marginal",
    "build_network",
    "check_binding",
    "chow_liu_tree",
    "covary_cpt_row",
    "d_separated",
    "define_template",
    "elimination_order",
    "empirical_mutual_information",
    "entropy",
    "evidence_sensitivity_ranges",
    "fit_network",
    "flatten",
    "joint_probability",
    "library_from_dict",
    "library_to_dict",
    "marginal",
    "markov_blanket",
    "mle_cpts",
    "mutual_information",
    "network_from_dict",
    "network_from_json",
    "network_to_dict",
    "network_to_json",
    "posterior_all",
    "probability_of_evidence",
    "rank_parameters",
    "run_submodel",
    "sample_dataset",
    "sensitivity_function",
    "sensitivity_value",
    "topological_order",
]
