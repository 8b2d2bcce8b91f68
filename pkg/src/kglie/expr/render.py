"""Text rendering in the module grammar; ``parse(render(e))`` rebuilds ``e``."""

from __future__ import annotations

from fractions import Fraction

from . import core

__all__ = ["render", "format_rational"]


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _atomic(e) -> bool:
    if e.kind == core.NUM:
        return e.data >= 0 and e.data.denominator == 1
    return e.kind in (core.VAR, core.FN, core.AFN)


def _factor(e) -> str:
    text = render(e)
    if e.kind == core.ADD:
        return f"({text})"
    return text


def render(e) -> str:
    k = e.kind
    if k == core.NUM:
        return format_rational(e.data)
    if k == core.VAR:
        return e.data
    if k == core.ADD:
        parts = [render(e.args[0])]
        for t in e.args[1:]:
            text = render(t)
            if text.startswith("-"):
                parts.append(" - " + text[1:])
            else:
                parts.append(" + " + text)
        return "".join(parts)
    if k == core.MUL:
        args = e.args
        prefix = ""
        if args[0].kind == core.NUM:
            c = args[0].data
            args = args[1:]
            if c == -1:
                prefix = "-"
            else:
                prefix = format_rational(c) + "*"
        return prefix + "*".join(_factor(a) for a in args)
    if k == core.POW:
        b, p = e.args
        base = render(b) if _atomic(b) else f"({render(b)})"
        if (p.kind == core.NUM and p.data >= 0 and p.data.denominator == 1) or p.kind == core.VAR:
            exponent = render(p)
        else:
            exponent = f"({render(p)})"
        return f"{base}^{exponent}"
    if k == core.FN:
        return f"{e.data}({render(e.args[0])})"
    if k == core.AFN:
        name, derivs = e.data
        if any(derivs):
            name = name + "".join(f"_{d}" for d in derivs)
        return f"{name}({', '.join(render(a) for a in e.args)})"
    raise AssertionError(k)
