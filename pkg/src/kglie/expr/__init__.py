"""Symbolic expression kernel: parse, differentiate, substitute, zero-test."""

from __future__ import annotations

from .core import (
    ELEMENTARY,
    ONE,
    ZERO,
    Expr,
    abstract_names,
    add,
    afn,
    diff,
    div,
    fn,
    free_vars,
    has_abstract,
    instantiate,
    is_rational_expr,
    mul,
    neg,
    normalize,
    num,
    power,
    sub,
    substitute,
    var,
)
from .numeric import (
    DEFAULT_DOMAIN,
    Domain,
    SamplingExhausted,
    Settings,
    SingularPoint,
    configure,
    current,
    evaluate,
    evaluate_exact,
    is_zero,
    oracle_value,
    sample_points,
)
from .parser import ParseError, Parser, parse
from .render import format_rational, render

__all__ = [
    "ELEMENTARY",
    "ONE",
    "ZERO",
    "Expr",
    "abstract_names",
    "add",
    "afn",
    "diff",
    "div",
    "fn",
    "free_vars",
    "has_abstract",
    "instantiate",
    "is_rational_expr",
    "mul",
    "neg",
    "normalize",
    "num",
    "power",
    "sub",
    "substitute",
    "var",
    "DEFAULT_DOMAIN",
    "Domain",
    "SamplingExhausted",
    "Settings",
    "SingularPoint",
    "configure",
    "current",
    "evaluate",
    "evaluate_exact",
    "is_zero",
    "oracle_value",
    "sample_points",
    "ParseError",
    "Parser",
    "parse",
    "format_rational",
    "render",
]
