"""Single-line term printing. parse_term(show_term(t)) is alpha-equal to t."""

from __future__ import annotations

from .axioms import show_axiom
from .formulas import show_formula
from .terms import (
    App,
    Case,
    Chan,
    Contract,
    Efq,
    Inj,
    Lam,
    Pair,
    ParBind,
    Proj,
    Term,
    Underline,
    Unit,
    Var,
    flatten_pairs,
)

# precedence: 0 lambda body / component, 1 contraction, 2 application spine,
# 3 argument position (primaries only)


def show_term(t: Term, prec: int = 0) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Chan):
        return ("not" + t.name) if t.negated else t.name
    if isinstance(t, Unit):
        return "tt"
    if isinstance(t, Lam):
        s = f"\\{t.var}:{show_formula(t.ann)}. {show_term(t.body)}"
        return "(" + s + ")" if prec > 0 else s
    if isinstance(t, Contract):
        s = f"{show_term(t.left, 2)} |+| {show_term(t.right, 1)}"
        return "(" + s + ")" if prec > 1 else s
    if isinstance(t, App):
        s = f"{show_term(t.fun, 2)} {show_term(t.arg, 3)}"
        return "(" + s + ")" if prec > 2 else s
    if isinstance(t, Proj):
        s = f"{show_term(t.arg, 2)} pi{t.index}"
        return "(" + s + ")" if prec > 2 else s
    if isinstance(t, Pair):
        parts = flatten_pairs(t)
        return "<" + ", ".join(show_term(p) for p in parts) + ">"
    if isinstance(t, Inj):
        return f"inj{t.index}[{show_formula(t.disj)}]({show_term(t.arg)})"
    if isinstance(t, Case):
        return (
            f"case {show_term(t.scrut)} of "
            f"{{{t.lvar}. {show_term(t.lbody)} | {t.rvar}. {show_term(t.rbody)}}}"
        )
    if isinstance(t, Efq):
        return f"efq[{show_formula(t.target)}]({show_term(t.arg)})"
    if isinstance(t, ParBind):
        star = "*" if t.active else ""
        comps = " || ".join(show_term(c) for c in t.comps)
        return f"nu {t.chan}{star}:{show_axiom(t.axiom)}. [{comps}]"
    if isinstance(t, Underline):
        return "@" + show_term(t.body, 3) if prec > 0 else "@" + show_term(t.body)
    raise TypeError(f"not a term: {t!r}")
