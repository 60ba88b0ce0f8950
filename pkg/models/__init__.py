# models/__init__.py - Re-exports the physical model so callers can write `from models import ProblemSpec`.
# The ORM table (models.result) is imported lazily by db.py and the experiment runner.

from models.channel import ChannelSet, parse_channels, read_channel_file, write_channel_file
from models.precoder import PrecoderSet
from models.problem import ObjectiveKind, ProblemSpec, SchemeConfig, SchemeKind, apply_scheme, scheme_variants
from models.report import (
    FEAS_TOL,
    SolutionReport,
    Violation,
    check_feasibility,
    compute_sinrs,
    make_report,
    objective_value,
)
