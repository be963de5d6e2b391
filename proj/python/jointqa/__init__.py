"""Joint answerability and span scoring over dual-granularity encodings."""

from ._core import (
    ModelConfig,
    Pipeline,
    avna,
    constrained_max,
    decode,
    evaluate,
    f1_em,
    loss1,
    loss2,
    lower_region_kl,
    normalize_text,
    partial_uniform,
)

__all__ = [
    "ModelConfig",
    "Pipeline",
    "avna",
    "constrained_max",
    "decode",
    "evaluate",
    "f1_em",
    "loss1",
    "loss2",
    "lower_region_kl",
    "normalize_text",
    "partial_uniform",
]
