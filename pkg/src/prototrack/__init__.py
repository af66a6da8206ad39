"""Prototype-calibrated memory selection and positional prompts for
memory-based single-object tracking, in plain numpy."""
from __future__ import annotations

from .config import STRATEGIES, RunConfig
from .errors import (BadPromptError, BadShapeError, ConfigError, DomainError, EmptyMaskError,
                     LengthMismatchError, MissingEntryError, ParseError, SequenceError,
                     TrackError, ZeroVectorError)
from .memory import CalibrationResult, MemoryEntry, PrototypicalMemoryBank, encode_memory
from .metrics import MetricReport, evaluate
from .pipeline import ArrayProvider, ThresholdHead, TrackReport, init_track, run_sequence, step
from .prompt import (OpCounter, PromptDecision, cycle_consistent_gate, discriminative_prior,
                     fuse_prompt, generate_prompt, positional_field, positional_prior)
from .synth import ScenarioProvider, ScenarioSpec, get_scenario, standard_suite
from .tensor import BBox, cosine, mask_iou, mask_to_bbox, masked_gap

__version__ = "0.1.0"
