"""Independent reference implementations used to cross-check the engine.

Both oracles deliberately avoid the library's traversal helpers
(iter_subterms, chan_occurrences, decompose_stack) and re-derive every
side condition from the raw constructors, so a bug in a shared helper
cannot cancel out on both sides of a comparison.
"""

from __future__ import annotations

from lax import (
    App,
    Atom,
    Bot,
    Case,
    Chan,
    Conj,
    Contract,
    Disj,
    Efq,
    Impl,
    Inj,
    Lam,
    Pair,
    ParBind,
    Proj,
    Term,
    Top,
    Underline,
    Unit,
    Var,
    type_of,
)

Path = tuple[int, ...]


# ---------------------------------------------------------------------------
# value complexity, by outside-in recursion
#
# The engine decomposes the whole spine at once and indexes into the frame
# list; here we peel frames from the outside one at a time and stop at the
# first case node, rebuilding the suffix around each branch by hand.

def _formula_weight(f) -> int:
    if isinstance(f, (Atom, Top, Bot)):
        return 0
    return 1 + _formula_weight(f.left) + _formula_weight(f.right)


def value_complexity_oracle(t: Term) -> int:
    if isinstance(t, (ParBind, Contract, Underline)):
        raise ValueError("oracle only covers simply typed terms")
    if isinstance(t, (Lam, Inj)):
        return _formula_weight(type_of(t))
    if isinstance(t, Pair):
        return max(value_complexity_oracle(t.left), value_complexity_oracle(t.right))
    return _peel(t, [])


def _peel(t: Term, outer: list) -> int:
    """outer holds the case-free frames seen so far, outermost first."""
    if isinstance(t, Case):
        return max(
            value_complexity_oracle(_rebuild(t.lbody, outer)),
            value_complexity_oracle(_rebuild(t.rbody, outer)),
        )
    if isinstance(t, App):
        return _peel(t.fun, outer + [("app", t.arg)])
    if isinstance(t, Proj):
        return _peel(t.arg, outer + [("proj", t.index)])
    if isinstance(t, Efq):
        return _peel(t.arg, outer + [("efq", t.target)])
    return 0


def _rebuild(t: Term, outer: list) -> Term:
    for kind, payload in reversed(outer):
        if kind == "app":
            t = App(t, payload)
        elif kind == "proj":
            t = Proj(t, payload)
        else:
            t = Efq(t, payload)
    return t


# ---------------------------------------------------------------------------
# free names, with shadowing, built from scratch

def _free_names(t: Term) -> tuple[frozenset[str], frozenset[str]]:
    """(free variables, free channels) of t."""
    fv: set[str] = set()
    fc: set[str] = set()

    def go(s: Term, bound_v: frozenset[str], bound_c: frozenset[str]):
        if isinstance(s, Var):
            if s.name not in bound_v:
                fv.add(s.name)
        elif isinstance(s, Chan):
            if s.name not in bound_c:
                fc.add(s.name)
        elif isinstance(s, Lam):
            go(s.body, bound_v | {s.var}, bound_c)
        elif isinstance(s, App):
            go(s.fun, bound_v, bound_c)
            go(s.arg, bound_v, bound_c)
        elif isinstance(s, Pair):
            go(s.left, bound_v, bound_c)
            go(s.right, bound_v, bound_c)
        elif isinstance(s, (Proj, Efq, Inj)):
            go(s.arg, bound_v, bound_c)
        elif isinstance(s, Case):
            go(s.scrut, bound_v, bound_c)
            go(s.lbody, bound_v | {s.lvar}, bound_c)
            go(s.rbody, bound_v | {s.rvar}, bound_c)
        elif isinstance(s, ParBind):
            for c in s.comps:
                go(c, bound_v, bound_c | {s.chan})
        elif isinstance(s, (Contract, Underline)):
            for c in (s.left, s.right) if isinstance(s, Contract) else (s.body,):
                go(c, bound_v, bound_c)
        elif isinstance(s, Unit):
            pass
        else:
            raise TypeError(f"unknown node: {s!r}")

    go(t, frozenset(), frozenset())
    return frozenset(fv), frozenset(fc)


def _mentions_parallel(t: Term) -> bool:
    if isinstance(t, (ParBind, Contract, Underline)):
        return True
    return any(_mentions_parallel(c) for c in _kids(t))


def _mentions_active_session(t: Term) -> bool:
    if isinstance(t, ParBind) and t.active:
        return True
    return any(_mentions_active_session(c) for c in _kids(t))


def _kids(t: Term) -> tuple[Term, ...]:
    if isinstance(t, (Var, Chan, Unit)):
        return ()
    if isinstance(t, Lam):
        return (t.body,)
    if isinstance(t, App):
        return (t.fun, t.arg)
    if isinstance(t, Pair):
        return (t.left, t.right)
    if isinstance(t, (Proj, Inj, Efq)):
        return (t.arg,)
    if isinstance(t, Case):
        return (t.scrut, t.lbody, t.rbody)
    if isinstance(t, ParBind):
        return tuple(t.comps)
    if isinstance(t, Contract):
        return (t.left, t.right)
    if isinstance(t, Underline):
        return (t.body,)
    raise TypeError(f"unknown node: {t!r}")


def _is_value(t: Term) -> bool:
    parts = []
    while isinstance(t, Pair):
        parts.append(t.left)
        t = t.right
    parts.append(t)
    for p in parts:
        if isinstance(p, (Lam, Inj, Efq, Case)):
            return True
        h = p
        while isinstance(h, (App, Proj, Case, Efq)):
            h = h.fun if isinstance(h, App) else (h.scrut if isinstance(h, Case) else h.arg)
        if isinstance(h, Chan) and h.active:
            return True
    return False


# ---------------------------------------------------------------------------
# channel occurrences inside one component

def _occurrences(body: Term, name: str) -> list[dict]:
    """Preorder list of free occurrences of the session channel.

    Each entry: negated flag, the applied argument when the occurrence is
    the head of an application (else None), and the names bound between the
    component root and the occurrence.
    """
    out: list[dict] = []

    def go(s: Term, above: frozenset[str]):
        if isinstance(s, ParBind) and s.chan == name:
            return
        if isinstance(s, App) and isinstance(s.fun, Chan) and s.fun.name == name:
            out.append({"negated": s.fun.negated, "arg": s.arg, "above": above})
            go(s.arg, above)
            return
        if isinstance(s, Chan) and s.name == name:
            out.append({"negated": s.negated, "arg": None, "above": above})
            return
        extra: dict[int, frozenset[str]] = {}
        if isinstance(s, Lam):
            extra[0] = frozenset({s.var})
        elif isinstance(s, Case):
            extra[1] = frozenset({s.lvar})
            extra[2] = frozenset({s.rvar})
        elif isinstance(s, ParBind):
            for i in range(len(s.comps)):
                extra[i] = frozenset({s.chan})
        for i, c in enumerate(_kids(s)):
            go(c, above | extra.get(i, frozenset()))

    go(body, frozenset())
    return out


def _captured(occ: dict) -> tuple[frozenset[str], frozenset[str]]:
    """Names free in the message but bound above the hole: (vars, chans)."""
    fv, fc = _free_names(occ["arg"])
    return fv & occ["above"], fc & occ["above"]


# ---------------------------------------------------------------------------
# the matcher itself

_PAR = (ParBind, Contract)


def brute_force_redexes(t: Term, underline_discipline: bool = False) -> set[tuple[str, Path]]:
    """Every (rule label, position) pair, re-derived from first principles."""
    found: set[tuple[str, Path]] = set()

    def visit(s: Term, path: Path):
        for rule in _match(s, underline_discipline):
            found.add((rule, path))
        for i, c in enumerate(_kids(s)):
            visit(c, path + (i,))

    visit(t, ())
    return found


def _match(s: Term, disc: bool) -> list[str]:
    rules: list[str] = []
    if isinstance(s, App) and isinstance(s.fun, Lam):
        rules.append("Beta")
    if isinstance(s, Proj) and isinstance(s.arg, Pair):
        rules.append("ProjPair")
    if isinstance(s, Case) and isinstance(s.scrut, Inj):
        rules.append("CaseInj")

    first = {
        App: lambda n: n.fun,
        Proj: lambda n: n.arg,
        Efq: lambda n: n.arg,
        Case: lambda n: n.scrut,
    }.get(type(s))
    if first is not None and isinstance(first(s), Case):
        rules.append("CasePerm")

    rules.extend(_par_perm(s))
    if isinstance(s, ParBind):
        rules.extend(_session(s, disc))
    return rules


def _par_perm(s: Term) -> list[str]:
    if isinstance(s, App):
        if isinstance(s.fun, _PAR):
            return ["ParPerm(stack)"]
        if isinstance(s.arg, _PAR):
            return ["ParPerm(app-left)"]
    if isinstance(s, (Proj, Efq)) and isinstance(s.arg, _PAR):
        return ["ParPerm(stack)"]
    if isinstance(s, Case) and isinstance(s.scrut, _PAR):
        return ["ParPerm(stack)"]
    if isinstance(s, Lam) and isinstance(s.body, _PAR):
        return ["ParPerm(lam)"]
    if isinstance(s, Inj) and isinstance(s.arg, _PAR):
        return ["ParPerm(inj)"]
    if isinstance(s, Pair):
        if isinstance(s.left, _PAR):
            return ["ParPerm(pair-left)"]
        if isinstance(s.right, _PAR):
            return ["ParPerm(pair-right)"]
    return []


def _session(s: ParBind, disc: bool) -> list[str]:
    rules: list[str] = []
    bodies = [c.body if isinstance(c, Underline) else c for c in s.comps]
    occs = [_occurrences(b, s.chan) for b in bodies]
    simple = [not _mentions_parallel(b) for b in bodies]

    if not s.active and any(
        o["arg"] is not None and _is_value(o["arg"]) for per in occs for o in per
    ):
        rules.append("Activation")

    if s.active:
        rules.extend(_crosses(s, bodies, occs, simple, disc))

    survivors = [i for i, per in enumerate(occs) if not per]
    if survivors:
        rules.append(f"GarbageCross{survivors}")

    if s.active and not any(_mentions_active_session(b) for b in bodies):
        for k, b in enumerate(bodies):
            if isinstance(b, _PAR):
                rules.append(f"ParParPerm({k})")
    return rules


def _crosses(s: ParBind, bodies, occs, simple, disc: bool) -> list[str]:
    ax = s.axiom
    rules: list[str] = []

    if ax.mode == "em":
        if not (simple[0] and simple[1]) or not occs[0]:
            return rules
        last = occs[0][-1]
        if last["negated"] and last["arg"] is not None:
            cap_v, cap_c = _captured(last)
            if cap_c:
                return rules
            rules.append("BasicCross(0,1)" if not cap_v else "FullCross")
        return rules

    if ax.mode == "broadcast":
        if all(simple) and occs[0]:
            last = occs[0][-1]
            if last["negated"] and last["arg"] is not None:
                cap_v, cap_c = _captured(last)
                if not cap_v and not cap_c:
                    rules.append("BroadcastCross")
        return rules

    marked = [i for i, c in enumerate(s.comps) if isinstance(c, Underline)]
    senders = marked if (disc and marked) else list(range(len(bodies)))
    for i in senders:
        if not simple[i] or not occs[i]:
            continue
        last = occs[i][-1]
        if last["arg"] is None:
            continue
        cap_v, cap_c = _captured(last)
        if cap_v or cap_c:
            continue
        fi = ax.components[i][0]
        for j in range(len(bodies)):
            if j == i or not simple[j] or not occs[j]:
                continue
            if occs[j][-1]["arg"] is None:
                continue
            if fi == ax.components[j][1]:
                rules.append(f"BasicCross({i},{j})")

    full = all(simple)
    for per in occs:
        if not (per and per[-1]["arg"] is not None):
            full = False
            break
        _, cap_c = _captured(per[-1])
        if cap_c:
            full = False
            break
    if full:
        rules.append("FullCross")
    return rules
