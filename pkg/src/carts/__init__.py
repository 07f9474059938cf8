"""Module-title generation engine for item carousels.

Distills per-item keywords, generates candidate titles, refines them
through generator/feedback loops under a monotonic coverage guard, and
arbitrates a final title. A companion lab verifies the refinement
convergence bounds by simulation against exact oracles.
"""

from .agents import (
    FeedbackReport,
    ModeratorSummary,
    arbitrate,
    distill,
    evaluate,
    generate_initial,
    moderate,
    regenerate,
)
from .backends import HttpChatBackend, ScriptedBackend, derive_seed
from .coverage import (
    Feasibility,
    RelevanceScorer,
    brute_force_opt,
    coverage,
    derive_keywords,
    feasible,
    mock_relevance,
    relevance,
)
from .dataset import load_jobs, parse_results, scan_jobs, write_results
from .domain import (
    BoundParams,
    CandidateTitle,
    Item,
    KeywordSet,
    ModuleJob,
    PipelineConfig,
    RelevanceVector,
    validate_job,
)
from .lab import (
    SimParams,
    SimReport,
    expected_iterations_bound,
    iteration_bound,
    simulate_trial,
    verify_corollary,
    verify_theorem,
)
from .pipeline import (
    PipelineResult,
    RefinementTrace,
    TraceStep,
    iteration_budget,
    refine_chain,
    run_carts,
    run_vanilla,
)
from .templates import DEFAULT_TEMPLATES, PromptTemplate, TemplateSet, load_templates

__version__ = "0.1.0"

__all__ = [
    "BoundParams",
    "CandidateTitle",
    "DEFAULT_TEMPLATES",
    "Feasibility",
    "FeedbackReport",
    "HttpChatBackend",
    "Item",
    "KeywordSet",
    "ModeratorSummary",
    "ModuleJob",
    "PipelineConfig",
    "PipelineResult",
    "PromptTemplate",
    "RefinementTrace",
    "RelevanceScorer",
    "RelevanceVector",
    "ScriptedBackend",
    "SimParams",
    "SimReport",
    "TemplateSet",
    "TraceStep",
    "arbitrate",
    "brute_force_opt",
    "coverage",
    "derive_keywords",
    "derive_seed",
    "distill",
    "evaluate",
    "expected_iterations_bound",
    "feasible",
    "generate_initial",
    "iteration_bound",
    "iteration_budget",
    "load_jobs",
    "load_templates",
    "mock_relevance",
    "moderate",
    "parse_results",
    "refine_chain",
    "regenerate",
    "relevance",
    "run_carts",
    "run_vanilla",
    "scan_jobs",
    "simulate_trial",
    "validate_job",
    "verify_corollary",
    "verify_theorem",
    "write_results",
]
