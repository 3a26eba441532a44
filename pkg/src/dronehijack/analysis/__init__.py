"""Passive attacker pipeline: length filter, correlation, bit table."""

from .bitdiff import BitDiffEntry, BitDiffReport, MissingIdleBaseline, derive_bit_table
from .correlation import (
    MANEUVER_COMMAND,
    AnalysisConfig,
    Association,
    CorrelationReport,
    DegenerateVariance,
    NoConfidentAssociation,
    NoMatchingFrames,
    PayloadSeries,
    associate,
    build_series,
    pearson,
    series_csv,
)
from .lengths import EmptyHistogram, FrameLengthHistogram, dominant_length, length_histogram
