"""tempocause: logic-based temporal causality for multivariate time series.

Define effect events over a series, test candidate causes for lagged
elevation and screened average significance under adjustable delay windows,
auto-estimate cause constraints by adaptive 1-D clustering, and accumulate
confirmed relations into a persistable causal flow graph. A CLI
(``tempocause``) and an HTTP service expose the same kernel.
"""

from .dataset import Dataset, IngestOptions, Variable, export_csv, load_csv, parse_csv, summary
from .errors import TempoCauseError
from .estimate import EstimatedCause, EstimatorConfig, estimate_all, estimate_cause
from .flowgraph import CausalFlowGraph, layout, merge_graphs, persist, restore, save_relations
from .formula import EffectSpec, EventDef, LevelSet, Range, Window, conjoin, label_track
from .inference import (
    DelayProfile,
    SignificanceReport,
    cond_expectation,
    cond_probability,
    delay_sweep,
    eps_average,
    is_potential_cause,
    significance_report,
)
from .session import AnalysisSession

__version__ = "0.1.0"

__all__ = [
    "AnalysisSession",
    "CausalFlowGraph",
    "Dataset",
    "DelayProfile",
    "EffectSpec",
    "EstimatedCause",
    "EstimatorConfig",
    "EventDef",
    "IngestOptions",
    "LevelSet",
    "Range",
    "SignificanceReport",
    "TempoCauseError",
    "Variable",
    "Window",
    "cond_expectation",
    "cond_probability",
    "conjoin",
    "delay_sweep",
    "eps_average",
    "estimate_all",
    "estimate_cause",
    "export_csv",
    "is_potential_cause",
    "label_track",
    "layout",
    "load_csv",
    "merge_graphs",
    "parse_csv",
    "persist",
    "restore",
    "save_relations",
    "significance_report",
    "summary",
    "__version__",
]
