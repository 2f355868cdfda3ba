"""Values, complexity measures, redex discovery, and single-step reduction.

Everything here works on elaborated terms (occurrences carry types). All
functions are pure; step() never mutates its input.

Conventions used throughout:

- "rightmost occurrence" of a channel in a component is the occurrence that
  comes last in depth-first left-to-right traversal, which matches reading
  the printed term right to left. A rightmost occurrence can have no
  channel occurrence inside its own argument.
- a message is "closed" when it mentions no variable and no channel that is
  bound between the component root and the occurrence; names free in the
  whole program are fine.
- communication complexity of a session is the maximum value complexity
  over the arguments of applied channel occurrences, 0 when there are none
  (arguments containing nested parallel nodes count 0; by the time
  communication fires the strategy has made the components simply typed).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional

from .axioms import em_axiom, general_axiom
from .formulas import BOT, Bot, Formula, Impl, complexity
from .terms import (
    App,
    Case,
    CaseFrame,
    Chan,
    Contract,
    Efq,
    Inj,
    Lam,
    Pair,
    ParBind,
    Path,
    Proj,
    Term,
    Underline,
    Var,
    all_names,
    apply_stack,
    binder_names,
    build_tuple,
    children,
    comp_body,
    comp_marked,
    contains_active_session,
    contract_join,
    decompose_stack,
    flatten_pairs,
    free_chans,
    free_vars,
    fresh_name,
    is_parallel_node,
    is_simply_typed,
    iter_subterms,
    rename_chan,
    replace_at,
    subst,
    subst_chan_bare,
    subterm_at,
    tuple_type,
)
from .typecheck import type_of


class NotParallelForm(Exception):
    pass


class InvalidRedex(Exception):
    pass


class NotSimplyTyped(Exception):
    pass


# ---------------------------------------------------------------------------
# values

def is_value(t: Term) -> bool:
    """Tuples (possibly of length one) with at least one witness component.

    Witnesses: a lambda, an injection, an efq application, a case term, or a
    stack applied to an active channel. Only the right-nested pair spine is
    flattened; tt alone is not a value.
    """
    for part in flatten_pairs(t):
        if isinstance(part, (Lam, Inj, Efq, Case)):
            return True
        head, _ = decompose_stack(part)
        if isinstance(head, Chan) and head.active:
            return True
    return False


def value_complexity(t: Term) -> int:
    """First clause that matches decides; see the measure's definition.

    lambda / injection: complexity of the term's type. Pair: max of the
    halves. A case term under a case-free stack: max over the branches with
    the stack pushed inside. Anything else: 0.
    """
    if isinstance(t, (ParBind, Contract, Underline)):
        raise NotSimplyTyped(f"value complexity of a parallel term: {t}")
    if isinstance(t, (Lam, Inj)):
        return complexity(type_of(t))
    if isinstance(t, Pair):
        return max(value_complexity(t.left), value_complexity(t.right))
    head, stack = decompose_stack(t)
    last_case = None
    for i, f in enumerate(stack):
        if isinstance(f, CaseFrame):
            last_case = i
    if last_case is not None:
        frame = stack[last_case]
        sigma = stack[last_case + 1:]
        return max(
            value_complexity(apply_stack(frame.lbody, sigma)),
            value_complexity(apply_stack(frame.rbody, sigma)),
        )
    return 0


def _vc_safe(t: Term) -> int:
    if not is_simply_typed(t):
        return 0
    return value_complexity(t)


# ---------------------------------------------------------------------------
# redexes

class RedexKind(str, Enum):
    BETA = "Beta"
    PROJ_PAIR = "ProjPair"
    CASE_INJ = "CaseInj"
    CASE_PERM = "CasePerm"
    DISJ_PERM = "CasePerm"  # alias: the figures' name for the same rule
    PAR_PERM = "ParPerm"
    PAR_PAR_PERM = "ParParPerm"
    ACTIVATION = "Activation"
    BASIC_CROSS = "BasicCross"
    FULL_CROSS = "FullCross"
    GARBAGE_CROSS = "GarbageCross"
    BROADCAST_CROSS = "BroadcastCross"


GROUP1 = 1
GROUP2 = 2
GROUP_OTHER = "other"

_GROUPS = {
    RedexKind.BETA: GROUP1,
    RedexKind.CASE_INJ: GROUP1,
    RedexKind.PROJ_PAIR: GROUP2,
    RedexKind.CASE_PERM: GROUP2,
    RedexKind.ACTIVATION: GROUP2,
    RedexKind.BASIC_CROSS: GROUP2,
    RedexKind.FULL_CROSS: GROUP2,
    RedexKind.GARBAGE_CROSS: GROUP2,
    RedexKind.BROADCAST_CROSS: GROUP2,
    RedexKind.PAR_PERM: GROUP_OTHER,
    RedexKind.PAR_PAR_PERM: GROUP_OTHER,
}

_COMMUNICATION = {
    RedexKind.ACTIVATION,
    RedexKind.BASIC_CROSS,
    RedexKind.FULL_CROSS,
    RedexKind.GARBAGE_CROSS,
    RedexKind.BROADCAST_CROSS,
}


@dataclass(frozen=True)
class Redex:
    kind: RedexKind
    position: Path
    complexity: int
    # which parallel permutation / which component gets hoisted
    which: Optional[str] = None
    comp: Optional[int] = None
    sender: Optional[int] = None
    receiver: Optional[int] = None
    survivors: Optional[tuple[int, ...]] = None

    @property
    def group(self):
        return _GROUPS[self.kind]

    @property
    def rule(self) -> str:
        if self.kind == RedexKind.PAR_PERM:
            return f"ParPerm({self.which})"
        if self.kind == RedexKind.PAR_PAR_PERM:
            return f"ParParPerm({self.comp})"
        if self.kind == RedexKind.BASIC_CROSS:
            return f"BasicCross({self.sender},{self.receiver})"
        if self.kind == RedexKind.GARBAGE_CROSS:
            return f"GarbageCross{list(self.survivors)}"
        return self.kind.value

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "position": list(self.position),
            "complexity": self.complexity,
            "group": self.group,
        }


def is_communication(kind: RedexKind) -> bool:
    return kind in _COMMUNICATION


# ---------------------------------------------------------------------------
# channel occurrences

@dataclass(frozen=True)
class Occurrence:
    chan_path: Path  # path of the Chan node within the component body
    app_path: Optional[Path]  # path of the App node when applied
    negated: bool
    arg: Optional[Term]
    binders_above: frozenset[str]  # variable and channel names bound above


def chan_occurrences(comp: Term, name: str) -> list[Occurrence]:
    """Free occurrences of `name` in preorder; the last one is rightmost."""
    out: list[Occurrence] = []

    def walk(t: Term, path: Path, above: frozenset[str]):
        if isinstance(t, ParBind) and t.chan == name:
            return  # shadowed
        if isinstance(t, App) and isinstance(t.fun, Chan) and t.fun.name == name:
            out.append(
                Occurrence(path + (0,), path, t.fun.negated, t.arg, above)
            )
            walk(t.arg, path + (1,), above)
            return
        if isinstance(t, Chan) and t.name == name:
            out.append(Occurrence(path, None, t.negated, None, above))
            return
        for i, c in enumerate(children(t)):
            walk(c, path + (i,), above | frozenset(binder_names(t, i)))

    walk(comp, (), frozenset())
    return out


def _closed_at(occ: Occurrence, msg: Term) -> bool:
    """No free name of msg is bound between the component root and the hole."""
    return not (
        (free_vars(msg) | free_chans(msg)) & occ.binders_above
    )


def _captured_vars(occ: Occurrence, msg: Term) -> list[tuple[str, Formula]]:
    """Free variables of msg bound above the hole, in first-use order."""
    seen: list[tuple[str, Formula]] = []
    names = set()
    for _, s in iter_subterms(msg):
        if isinstance(s, Var) and s.name in occ.binders_above and s.name not in names:
            names.add(s.name)
            seen.append((s.name, s.ty))
    return seen


def _captured_chans(occ: Occurrence, msg: Term) -> frozenset[str]:
    return free_chans(msg) & occ.binders_above


def session_comm_complexity(bind: ParBind) -> int:
    best = 0
    for k, comp in enumerate(bind.comps):
        for occ in chan_occurrences(comp_body(comp), bind.chan):
            if occ.arg is not None:
                best = max(best, _vc_safe(occ.arg))
    return best


# ---------------------------------------------------------------------------
# discovery

def find_redexes(t: Term, underline_discipline: bool = False) -> list[Redex]:
    """Every redex of every rule, leftmost-outermost (preorder) order.

    With underline_discipline=True, sessions that carry a component mark
    only offer basic crosses whose sender is the marked component.
    """
    out: list[Redex] = []
    for path, s in iter_subterms(t):
        out.extend(_redexes_at(s, path, underline_discipline))
    return out


def _redexes_at(s: Term, path: Path, discipline: bool) -> Iterator[Redex]:
    # intuitionistic redexes
    if isinstance(s, App) and isinstance(s.fun, Lam):
        lam_ty = type_of(s.fun)
        yield Redex(RedexKind.BETA, path, complexity(lam_ty))
    if isinstance(s, Proj) and isinstance(s.arg, Pair):
        yield Redex(RedexKind.PROJ_PAIR, path, _vc_safe(s.arg))
    if isinstance(s, Case) and isinstance(s.scrut, Inj):
        yield Redex(RedexKind.CASE_INJ, path, complexity(s.scrut.disj))

    # one-frame permutation over a case term
    if _is_frame_node(s) and isinstance(children(s)[0], Case):
        yield Redex(RedexKind.CASE_PERM, path, _vc_safe(children(s)[0]))

    # parallel permutations: a frame or constructor over a parallel node
    yield from _par_perms_at(s, path)

    if isinstance(s, ParBind):
        yield from _session_redexes(s, path, discipline)


def _is_frame_node(s: Term) -> bool:
    """True when s is its first child under a one-frame stack."""
    return isinstance(s, (App, Proj, Case, Efq))


_PERM_HOSTS = (ParBind, Contract)


def _par_perms_at(s: Term, path: Path) -> Iterator[Redex]:
    if isinstance(s, App):
        if isinstance(s.fun, _PERM_HOSTS):
            yield Redex(RedexKind.PAR_PERM, path, 0, which="stack")
        elif isinstance(s.arg, _PERM_HOSTS):
            yield Redex(RedexKind.PAR_PERM, path, 0, which="app-left")
    elif isinstance(s, (Proj, Efq)) and isinstance(s.arg, _PERM_HOSTS):
        yield Redex(RedexKind.PAR_PERM, path, 0, which="stack")
    elif isinstance(s, Case) and isinstance(s.scrut, _PERM_HOSTS):
        yield Redex(RedexKind.PAR_PERM, path, 0, which="stack")
    elif isinstance(s, Lam) and isinstance(s.body, _PERM_HOSTS):
        yield Redex(RedexKind.PAR_PERM, path, 0, which="lam")
    elif isinstance(s, Inj) and isinstance(s.arg, _PERM_HOSTS):
        yield Redex(RedexKind.PAR_PERM, path, 0, which="inj")
    elif isinstance(s, Pair):
        if isinstance(s.left, _PERM_HOSTS):
            yield Redex(RedexKind.PAR_PERM, path, 0, which="pair-left")
        elif isinstance(s.right, _PERM_HOSTS):
            yield Redex(RedexKind.PAR_PERM, path, 0, which="pair-right")


def _session_redexes(s: ParBind, path: Path, discipline: bool) -> Iterator[Redex]:
    a = s.chan
    bodies = [comp_body(c) for c in s.comps]
    occs = [chan_occurrences(b, a) for b in bodies]
    comm = session_comm_complexity(s)

    # activation: inactive binder, some applied occurrence of a value
    if not s.active:
        if any(
            occ.arg is not None and is_value(occ.arg)
            for comp_occs in occs
            for occ in comp_occs
        ):
            yield Redex(RedexKind.ACTIVATION, path, comm)

    if s.active:
        yield from _cross_redexes(s, path, bodies, occs, comm, discipline)

    # garbage: keep the components that do not mention a (any activity)
    survivors = tuple(i for i, o in enumerate(occs) if not o)
    if survivors:
        yield Redex(RedexKind.GARBAGE_CROSS, path, comm, survivors=survivors)

    # hoisting a nested parallel component out of an active session
    if s.active and not any(contains_active_session(b) for b in bodies):
        for k, b in enumerate(bodies):
            if is_parallel_node(b):
                yield Redex(RedexKind.PAR_PAR_PERM, path, 0, comp=k)


def _cross_redexes(
    s: ParBind,
    path: Path,
    bodies: list[Term],
    occs: list[list[Occurrence]],
    comm: int,
    discipline: bool,
) -> Iterator[Redex]:
    ax = s.axiom
    simple = [is_simply_typed(b) for b in bodies]

    if ax.mode == "em":
        if not (simple[0] and simple[1]):
            return
        if occs[0]:
            last = occs[0][-1]
            if last.negated and last.arg is not None:
                captured = _captured_vars(last, last.arg)
                if _captured_chans(last, last.arg):
                    return
                if not captured:
                    yield Redex(
                        RedexKind.BASIC_CROSS, path, comm, sender=0, receiver=1
                    )
                else:
                    yield Redex(RedexKind.FULL_CROSS, path, comm)
        return

    if ax.mode == "broadcast":
        if not all(simple):
            return
        if occs[0]:
            last = occs[0][-1]
            if (
                last.negated
                and last.arg is not None
                and _closed_at(last, last.arg)
            ):
                yield Redex(RedexKind.BROADCAST_CROSS, path, comm)
        return

    # general mode
    marked = [i for i, c in enumerate(s.comps) if comp_marked(c)]
    allowed_senders = marked if (discipline and marked) else range(len(bodies))
    for i in allowed_senders:
        if not simple[i] or not occs[i]:
            continue
        sender_occ = occs[i][-1]
        msg = sender_occ.arg
        if msg is None or not _closed_at(sender_occ, msg):
            continue
        fi, _ = ax.components[i]
        for j in range(len(bodies)):
            if j == i or not simple[j] or not occs[j]:
                continue
            recv_occ = occs[j][-1]
            if recv_occ.arg is None:
                continue
            _, gj = ax.components[j]
            if fi == gj:
                yield Redex(
                    RedexKind.BASIC_CROSS, path, comm, sender=i, receiver=j
                )

    if all(simple) and all(
        o and o[-1].arg is not None and not _captured_chans(o[-1], o[-1].arg)
        for o in occs
    ):
        yield Redex(RedexKind.FULL_CROSS, path, comm)


# ---------------------------------------------------------------------------
# multiple substitution

def multiple_subst(u: Term, ys: list[Var], v: Term) -> Term:
    """Replace each y_i by the i-th projection of v (right-nested tuples).

    A single variable takes v itself; an empty list leaves u unchanged.
    The type of v must be the right-nested conjunction of the ys' types.
    """
    n = len(ys)
    if n == 0:
        return u
    want = tuple_type(tuple(y.ty for y in ys))
    got = type_of(v)
    if got != want:
        raise ValueError(f"multiple_subst: v has type {got}, the ys want {want}")

    def sel(i: int) -> Term:
        cur = v
        for _ in range(i):
            cur = Proj(cur, 1)
        if i < n - 1:
            cur = Proj(cur, 0)
        return cur

    for i, y in enumerate(ys):
        u = subst(u, y.name, sel(i))
    return u


# ---------------------------------------------------------------------------
# stepping

def step(t: Term, r: Redex) -> Term:
    """Contract the redex r inside t; raises InvalidRedex when r does not
    match the current term."""
    s = subterm_at(t, r.position)
    new = _contract(s, r, t)
    return replace_at(t, r.position, new)


def _contract(s: Term, r: Redex, host: Term) -> Term:
    k = r.kind
    if k == RedexKind.BETA:
        if not (isinstance(s, App) and isinstance(s.fun, Lam)):
            raise InvalidRedex(r.rule)
        return subst(s.fun.body, s.fun.var, s.arg)

    if k == RedexKind.PROJ_PAIR:
        if not (isinstance(s, Proj) and isinstance(s.arg, Pair)):
            raise InvalidRedex(r.rule)
        return s.arg.left if s.index == 0 else s.arg.right

    if k == RedexKind.CASE_INJ:
        if not (isinstance(s, Case) and isinstance(s.scrut, Inj)):
            raise InvalidRedex(r.rule)
        inj = s.scrut
        if inj.index == 0:
            return subst(s.lbody, s.lvar, inj.arg)
        return subst(s.rbody, s.rvar, inj.arg)

    if k == RedexKind.CASE_PERM:
        return _case_perm(s, r)

    if k == RedexKind.PAR_PERM:
        return _par_perm(s, r, host)

    if k == RedexKind.PAR_PAR_PERM:
        return _par_par_perm(s, r)

    if k == RedexKind.ACTIVATION:
        if not (isinstance(s, ParBind) and not s.active):
            raise InvalidRedex(r.rule)
        used = all_names(host)
        b = fresh_name(s.chan, used)
        comps = tuple(
            _through_mark(c, lambda u: rename_chan(u, s.chan, b, True))
            for c in s.comps
        )
        return ParBind(b, True, s.axiom, comps)

    if k in (
        RedexKind.BASIC_CROSS,
        RedexKind.FULL_CROSS,
        RedexKind.GARBAGE_CROSS,
        RedexKind.BROADCAST_CROSS,
    ):
        if not isinstance(s, ParBind):
            raise InvalidRedex(r.rule)
        if k == RedexKind.GARBAGE_CROSS:
            return _garbage(s, r)
        if not s.active:
            raise InvalidRedex(f"{r.rule}: session inactive")
        if k == RedexKind.BROADCAST_CROSS:
            return _broadcast_cross(s, r)
        if s.axiom.mode == "em":
            if k == RedexKind.BASIC_CROSS:
                return _em_basic_cross(s, r)
            return _em_full_cross(s, r, host)
        if k == RedexKind.BASIC_CROSS:
            return _general_basic_cross(s, r)
        return _general_full_cross(s, r, host)

    raise InvalidRedex(f"unknown redex kind {k!r}")


def _through_mark(c: Term, f) -> Term:
    if isinstance(c, Underline):
        return Underline(f(c.body))
    return f(c)


def _case_perm(s: Term, r: Redex) -> Term:
    case = children(s)[0]
    if not isinstance(case, Case):
        raise InvalidRedex(r.rule)
    if isinstance(s, App):
        mk = lambda b: App(b, s.arg)
    elif isinstance(s, Proj):
        mk = lambda b: Proj(b, s.index)
    elif isinstance(s, Efq):
        mk = lambda b: Efq(b, s.target)
    elif isinstance(s, Case):
        mk = lambda b: Case(b, s.lvar, s.lbody, s.rvar, s.rbody)
    else:
        raise InvalidRedex(r.rule)
    # binder hygiene: the frame moves under the case binders; parser and
    # engine keep binders globally fresh, so no capture is possible here
    return Case(
        case.scrut,
        case.lvar,
        mk(case.lbody),
        case.rvar,
        mk(case.rbody),
    )


def _par_perm(s: Term, r: Redex, host: Term) -> Term:
    def push(par: Term, rebuild) -> Term:
        if isinstance(par, ParBind):
            return ParBind(
                par.chan,
                par.active,
                par.axiom,
                tuple(_through_mark(c, rebuild) for c in par.comps),
            )
        if isinstance(par, Contract):
            return Contract(rebuild(par.left), rebuild(par.right))
        raise InvalidRedex(r.rule)

    def freshen(par: Term, other: Term) -> Term:
        # the side condition "a not in w": rename the binder when violated
        if isinstance(par, ParBind) and par.chan in free_chans(other):
            b = fresh_name(par.chan, all_names(host))
            return ParBind(
                b,
                par.active,
                par.axiom,
                tuple(
                    _through_mark(c, lambda u: rename_chan(u, par.chan, b, par.active))
                    for c in par.comps
                ),
            )
        return par

    if r.which == "stack":
        if isinstance(s, App):
            par = freshen(s.fun, s.arg)
            return push(par, lambda b: App(b, s.arg))
        if isinstance(s, Proj):
            return push(s.arg, lambda b: Proj(b, s.index))
        if isinstance(s, Efq):
            return push(s.arg, lambda b: Efq(b, s.target))
        if isinstance(s, Case):
            par = freshen(s.scrut, Pair(s.lbody, s.rbody))
            return push(par, lambda b: Case(b, s.lvar, s.lbody, s.rvar, s.rbody))
        raise InvalidRedex(r.rule)
    if r.which == "app-left":
        if not isinstance(s, App):
            raise InvalidRedex(r.rule)
        par = freshen(s.arg, s.fun)
        return push(par, lambda b: App(s.fun, b))
    if r.which == "lam":
        if not isinstance(s, Lam):
            raise InvalidRedex(r.rule)
        return push(s.body, lambda b: Lam(s.var, s.ann, b))
    if r.which == "inj":
        if not isinstance(s, Inj):
            raise InvalidRedex(r.rule)
        return push(s.arg, lambda b: Inj(s.index, s.disj, b))
    if r.which == "pair-left":
        if not isinstance(s, Pair):
            raise InvalidRedex(r.rule)
        par = freshen(s.left, s.right)
        return push(par, lambda b: Pair(b, s.right))
    if r.which == "pair-right":
        if not isinstance(s, Pair):
            raise InvalidRedex(r.rule)
        par = freshen(s.right, s.left)
        return push(par, lambda b: Pair(s.left, b))
    raise InvalidRedex(f"unknown permutation {r.which!r}")


def _par_par_perm(s: Term, r: Redex) -> Term:
    if not (isinstance(s, ParBind) and s.active):
        raise InvalidRedex(r.rule)
    k = r.comp
    inner = comp_body(s.comps[k])
    if not is_parallel_node(inner):
        raise InvalidRedex(r.rule)
    if any(contains_active_session(comp_body(c)) for c in s.comps):
        raise InvalidRedex(f"{r.rule}: active session inside a component")

    others_marked = any(comp_marked(c) for i, c in enumerate(s.comps) if i != k)

    def embed(w: Term) -> Term:
        # w takes the hoisted component's slot; drop its mark if the host
        # already has one
        if isinstance(w, Underline) and others_marked:
            w = w.body
        comps = list(s.comps)
        comps[k] = w
        return ParBind(s.chan, s.active, s.axiom, tuple(comps))

    if isinstance(inner, ParBind):
        return ParBind(
            inner.chan,
            inner.active,
            inner.axiom,
            tuple(embed(w) for w in inner.comps),
        )
    return Contract(embed(inner.left), embed(inner.right))


def _strip_mark(c: Term) -> Term:
    return c.body if isinstance(c, Underline) else c


def _rightmost(bind: ParBind, i: int) -> Occurrence:
    occs = chan_occurrences(comp_body(bind.comps[i]), bind.chan)
    if not occs:
        raise InvalidRedex(f"component {i} has no occurrence of {bind.chan}")
    return occs[-1]


def _garbage(s: ParBind, r: Redex) -> Term:
    survivors = [
        i
        for i, c in enumerate(s.comps)
        if not chan_occurrences(comp_body(c), s.chan)
    ]
    if not survivors or tuple(survivors) != r.survivors:
        raise InvalidRedex(r.rule)
    return contract_join([_strip_mark(s.comps[i]) for i in survivors])


def _em_basic_cross(s: ParBind, r: Redex) -> Term:
    occ = _rightmost(s, 0)
    if not occ.negated or occ.arg is None or not _closed_at(occ, occ.arg):
        raise InvalidRedex(r.rule)
    receiver = _strip_mark(s.comps[1])
    return subst_chan_bare(receiver, s.chan, occ.arg)


def _broadcast_cross(s: ParBind, r: Redex) -> Term:
    occ = _rightmost(s, 0)
    if not occ.negated or occ.arg is None or not _closed_at(occ, occ.arg):
        raise InvalidRedex(r.rule)
    receivers = [
        subst_chan_bare(_strip_mark(c), s.chan, occ.arg) for c in s.comps[1:]
    ]
    return contract_join(receivers)


def _em_full_cross(s: ParBind, r: Redex, host: Term) -> Term:
    occ = _rightmost(s, 0)
    if not occ.negated or occ.arg is None:
        raise InvalidRedex(r.rule)
    msg = occ.arg
    captured = _captured_vars(occ, msg)
    if not captured or _captured_chans(occ, msg):
        raise InvalidRedex(r.rule)
    used = all_names(host)
    b = fresh_name("b", used)
    b_ty = tuple_type(tuple(ty for _, ty in captured))
    ys = [Var(n, ty) for n, ty in captured]

    # sender keeps running, now telling b what it used to tell a
    tuple_msg = build_tuple(tuple(Var(n, ty) for n, ty in captured))
    new_send = App(Chan(b, Impl(b_ty, BOT), False, True), tuple_msg)
    sender = _through_mark(
        s.comps[0], lambda u: replace_at(u, occ.app_path, new_send)
    )
    inner = ParBind(s.chan, s.active, s.axiom, (sender, s.comps[1]))

    # the receiver copy gets the message with its captured variables read
    # off the fresh channel
    recv_val = Chan(b, b_ty, False, False)
    msg2 = multiple_subst(msg, ys, recv_val)
    copy = subst_chan_bare(_strip_mark(s.comps[1]), s.chan, msg2)
    return ParBind(b, False, em_axiom(b_ty), (inner, copy))


def _general_basic_cross(s: ParBind, r: Redex) -> Term:
    i, j = r.sender, r.receiver
    ax = s.axiom
    occ_i = _rightmost(s, i)
    occ_j = _rightmost(s, j)
    if occ_i.arg is None or occ_j.arg is None:
        raise InvalidRedex(r.rule)
    if not _closed_at(occ_i, occ_i.arg):
        raise InvalidRedex(f"{r.rule}: message is not closed")
    if ax.components[i][0] != ax.components[j][1]:
        raise InvalidRedex(f"{r.rule}: types do not fit")
    comps = list(s.comps)
    comps[j] = _through_mark(
        comps[j], lambda u: replace_at(u, occ_j.app_path, occ_i.arg)
    )
    if any(comp_marked(c) for c in s.comps):
        # the mark rides along with the message to the receiver
        comps = [
            Underline(_strip_mark(c)) if idx == j else _strip_mark(c)
            for idx, c in enumerate(comps)
        ]
    return ParBind(s.chan, s.active, s.axiom, tuple(comps))


def _general_full_cross(s: ParBind, r: Redex, host: Term) -> Term:
    ax = s.axiom
    m = len(s.comps)
    occs = [_rightmost(s, z) for z in range(m)]
    if any(o.arg is None for o in occs):
        raise InvalidRedex(r.rule)
    captured = [_captured_vars(o, o.arg) for o in occs]
    if any(_captured_chans(o, o.arg) for o in occs):
        raise InvalidRedex(r.rule)
    b_tys = [tuple_type(tuple(ty for _, ty in cap)) for cap in captured]

    new_pairs = []
    for i in range(m):
        gi = ax.components[i][1]
        hi = BOT if isinstance(gi, Bot) else b_tys[ax.jmap[i]]
        new_pairs.append((b_tys[i], hi))
    derived = general_axiom(tuple(new_pairs), derived=True)

    used = all_names(host)
    b = fresh_name("b", used)

    def copy_for(i: int) -> Term:
        gi = ax.components[i][1]
        b_occ_ty = derived.occurrence_type(i)
        b_i = Chan(b, b_occ_ty, False, False)
        payload = App(b_i, build_tuple(tuple(Var(n, ty) for n, ty in captured[i])))
        if isinstance(gi, Bot):
            filling = payload
        else:
            j = ax.jmap[i]
            ys = [Var(n, ty) for n, ty in captured[j]]
            filling = multiple_subst(occs[j].arg, ys, payload)
        comps = list(s.comps)
        comps[i] = _through_mark(
            comps[i], lambda u: replace_at(u, occs[i].app_path, filling)
        )
        return ParBind(s.chan, s.active, s.axiom, tuple(comps))

    return ParBind(b, False, derived, tuple(copy_for(i) for i in range(m)))


# ---------------------------------------------------------------------------
# height

def is_parallel_form(t: Term) -> bool:
    """Parallel nodes only at the top, simply typed components at the leaves."""
    body = comp_body(t)
    if is_parallel_node(body):
        return all(is_parallel_form(c) for c in children(body))
    return is_simply_typed(body)


def height(t: Term) -> int:
    if not is_parallel_form(t):
        raise NotParallelForm(str(t))
    body = comp_body(t)
    if is_parallel_node(body):
        return 1 + max(height(c) for c in children(body))
    return 0
