"""
Systems layer.

Expression language, system models and the built-in example systems.
"""

from .builtins import BUILTIN_MODELS, abrc08, builtin_model, identity, sys_f
from .expressions import (
    BinaryOp,
    Call,
    Evaluation,
    Expression,
    Number,
    UnaryOp,
    Variable,
    evaluate,
    parse_expression,
    to_text,
    tokenize,
)
from .model import BatchEvaluation, Model, eval_dynamics, eval_measurement

__all__ = [
    "BUILTIN_MODELS",
    "BatchEvaluation",
    "BinaryOp",
    "Call",
    "Evaluation",
    "Expression",
    "Model",
    "Number",
    "UnaryOp",
    "Variable",
    "abrc08",
    "builtin_model",
    "eval_dynamics",
    "eval_measurement",
    "evaluate",
    "identity",
    "parse_expression",
    "sys_f",
    "to_text",
    "tokenize",
]
