"""Checkers for the engine's metatheoretic guarantees on concrete runs.

Nothing here proves anything; these functions decide, for one term or one
trace, whether the guarantees the reduction theory promises actually held,
and report witnesses when they did not. They are deliberately written
against the definitions rather than against the engine's internals, so an
engine bug shows up as a failed report instead of being replicated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .formulas import (
    BOT,
    TOP,
    Conj,
    Disj,
    Formula,
    Impl,
    prime_factors,
    proper_subformulas,
    subformulas,
)
from .rewrite import (
    Redex,
    RedexKind,
    find_redexes,
    is_communication,
    is_parallel_form,
)
from .rewrite import height  # noqa: F401  (re-export: part of this module's API)
from .strategy import (
    PHASE_ACTIVATION,
    PHASE_COMMUNICATION,
    PHASE_INTUITIONISTIC,
    PHASE_PARALLEL,
    Trace,
)
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
    Path,
    Proj,
    Term,
    Underline,
    Unit,
    Var,
    children,
    comp_body,
    contains_active_session,
    iter_subterms,
    subterm_at,
)
from .typecheck import TypingContext, check_subject_reduction, infer_type, type_of


class NotNormal(Exception):
    pass


@dataclass
class PropertyReport:
    name: str
    holds: bool
    witnesses: list[tuple[str, str]] = field(default_factory=list)
    note: str = ""

    def add(self, where: str, why: str) -> None:
        self.holds = False
        self.witnesses.append((where, why))

    def to_json(self) -> dict:
        return {
            "property": self.name,
            "holds": self.holds,
            "witnesses": [{"where": w, "why": e} for w, e in self.witnesses],
            "note": self.note,
        }


def is_normal(t: Term, underline_discipline: bool = False) -> bool:
    return not find_redexes(t, underline_discipline)


def check_parallel_nf_property(
    t: Term, underline_discipline: bool = False
) -> PropertyReport:
    rep = PropertyReport("parallel-normal-form", True)
    if not is_normal(t, underline_discipline):
        rep.note = "term is not normal; nothing to check"
        return rep
    if not is_parallel_form(t):
        rep.add("[]", "normal term is not in parallel form")
    return rep


# ---------------------------------------------------------------------------
# subformula property

def _allowed_formulas(ctx: TypingContext, conclusion: Formula) -> frozenset[Formula]:
    out: set[Formula] = {TOP, BOT}
    for ty in ctx.ivars.values():
        out |= subformulas(ty)
    out |= subformulas(conclusion)
    for kind in ctx.chans.values():
        out |= proper_subformulas(kind)
    return frozenset(out)


def _formula_traceable(f: Formula, allowed: frozenset[Formula]) -> bool:
    """f is a subformula or a conjunction of subformulas of the context."""
    return all(p in allowed for p in prime_factors(f))


def _binder_kind_formulas(s: ParBind) -> list[Formula]:
    """The formulas a session's channel occurrences transport."""
    ax = s.axiom
    if ax.mode in ("em", "broadcast"):
        return [ax.carrier, BOT]
    out: list[Formula] = []
    for f, g in ax.components:
        out.append(f)
        out.append(g)
    return out


def subterm_types(t: Term) -> dict[Path, Formula]:
    """Type of every subterm, from the elaborated occurrence annotations.

    Channel occurrence nodes are omitted: their kinds are the business of
    the binder clause, not the subterm clause.
    """
    out: dict[Path, Formula] = {}
    for path, s in iter_subterms(t):
        if isinstance(s, Chan):
            continue
        out[path] = type_of(s)
    return out


def subterm_types_by_derivation(t: Term) -> dict[Path, Formula]:
    """Independent second take on subterm_types, walking with environments
    the way the typing rules do rather than reading annotations bottom-up."""
    out: dict[Path, Formula] = {}

    def walk(s: Term, path: Path, env: dict[str, Formula], chans: dict) -> Formula:
        ty: Formula
        if isinstance(s, Var):
            ty = env[s.name]
        elif isinstance(s, Chan):
            ax, i = chans[s.name]
            if s.negated:
                return Impl(ax.carrier, BOT)
            if ax.bare_allowed(i):
                return ax.carrier
            return ax.occurrence_type(i)  # never recorded: kinds, not types
        elif isinstance(s, Lam):
            body = walk(s.body, path + (0,), {**env, s.var: s.ann}, chans)
            ty = Impl(s.ann, body)
        elif isinstance(s, App):
            fun = walk(s.fun, path + (0,), env, chans)
            walk(s.arg, path + (1,), env, chans)
            assert isinstance(fun, Impl)
            ty = fun.right
        elif isinstance(s, Pair):
            ty = Conj(
                walk(s.left, path + (0,), env, chans),
                walk(s.right, path + (1,), env, chans),
            )
        elif isinstance(s, Proj):
            arg = walk(s.arg, path + (0,), env, chans)
            assert isinstance(arg, Conj)
            ty = arg.left if s.index == 0 else arg.right
        elif isinstance(s, Inj):
            walk(s.arg, path + (0,), env, chans)
            ty = s.disj
        elif isinstance(s, Case):
            scrut = walk(s.scrut, path + (0,), env, chans)
            assert isinstance(scrut, Disj)
            lt = walk(s.lbody, path + (1,), {**env, s.lvar: scrut.left}, chans)
            walk(s.rbody, path + (2,), {**env, s.rvar: scrut.right}, chans)
            ty = lt
        elif isinstance(s, Efq):
            walk(s.arg, path + (0,), env, chans)
            ty = s.target
        elif isinstance(s, Unit):
            ty = TOP
        elif isinstance(s, ParBind):
            tys = []
            for i, c in enumerate(s.comps):
                sub = {**chans, s.chan: (s.axiom, i)}
                tys.append(walk(c, path + (i,), env, sub))
            ty = tys[0]
        elif isinstance(s, Contract):
            ty = walk(s.left, path + (0,), env, chans)
            walk(s.right, path + (1,), env, chans)
        elif isinstance(s, Underline):
            ty = walk(s.body, path + (0,), env, chans)
        else:
            raise AssertionError(f"unhandled node {s!r}")
        out[path] = ty
        return ty

    def seed_env(term: Term) -> dict[str, Formula]:
        env = {}
        for _, s in iter_subterms(term):
            if isinstance(s, Var) and s.ty is not None:
                env.setdefault(s.name, s.ty)
        return env

    walk(t, (), seed_env(t), _seed_chans(t))
    return out


def _seed_chans(t: Term) -> dict:
    """Free-channel occurrence kinds, read off the elaborated annotations."""
    out = {}
    for _, s in iter_subterms(t):
        if isinstance(s, Chan) and s.ty is not None and s.name not in out:
            # free channels in a typing context are bare carriers
            out[s.name] = (_FreeKind(s.ty), 0)
    return out


class _FreeKind:
    """Duck-typed stand-in for a scheme when a channel is context-free."""

    def __init__(self, carrier: Formula):
        self.carrier = carrier
        self.mode = "em"

    def bare_allowed(self, i: int) -> bool:
        return True


def check_subformula(ctx: TypingContext, t: Term) -> PropertyReport:
    """Both clauses of the subformula property for a normal, typed term.

    Top and Bot count as traceable everywhere: negation is implication
    into Bot and the unit type seeds fresh carriers, so both constants
    appear even when the context never mentions them.
    """
    if not is_normal(t):
        raise NotNormal("subformula property is only claimed for normal terms")
    conclusion = infer_type(t, ctx)
    allowed = _allowed_formulas(ctx, conclusion)
    rep = PropertyReport("subformula", True)

    for path, s in iter_subterms(t):
        if isinstance(s, ParBind):
            for f in _binder_kind_formulas(s):
                if not _formula_traceable(f, allowed):
                    rep.add(
                        str(list(path)),
                        f"channel {s.chan} transports {f}, whose prime "
                        "factors do not all trace back to the context",
                    )

    for path, ty in subterm_types(t).items():
        if not _formula_traceable(ty, allowed):
            rep.add(
                str(list(path)),
                f"subterm has type {ty}, which is not a conjunction of "
                "traceable subformulas",
            )
    return rep


# ---------------------------------------------------------------------------
# trace auditing

_GROUP1 = {RedexKind.BETA, RedexKind.CASE_INJ}
_GROUP2_MONITORED = {
    RedexKind.PROJ_PAIR,
    RedexKind.CASE_PERM,
    RedexKind.BASIC_CROSS,
    RedexKind.FULL_CROSS,
    RedexKind.GARBAGE_CROSS,
    RedexKind.BROADCAST_CROSS,
}
_CROSSES = {
    RedexKind.BASIC_CROSS,
    RedexKind.FULL_CROSS,
    RedexKind.BROADCAST_CROSS,
}
_CHASE = {RedexKind.PROJ_PAIR, RedexKind.CASE_PERM}


def _max_c(rs: list[Redex], pred) -> int:
    vals = [r.complexity for r in rs if pred(r)]
    return max(vals) if vals else -1


def _check_decrease(
    rep: PropertyReport, idx: int, fired: Redex, before: list[Redex], after: list[Redex]
) -> None:
    if fired.kind in _GROUP1:
        tau = fired.complexity
        cap_case = _max_c(before, lambda r: r.kind == RedexKind.CASE_PERM)
        for q in after:
            cap_group = _max_c(before, lambda r, g=q.group: r.group == g)
            if q.complexity > max(tau - 1, cap_group, cap_case):
                rep.add(
                    f"step {idx}",
                    f"after {fired.rule} (complexity {tau}), redex {q.rule} at "
                    f"{list(q.position)} has complexity {q.complexity}, above "
                    "every bound of the first decrease clause",
                )
    elif fired.kind in _GROUP2_MONITORED:
        tau = fired.complexity
        for q in after:
            cap_group = _max_c(before, lambda r, g=q.group: r.group == g)
            if q.complexity > max(tau, cap_group):
                rep.add(
                    f"step {idx}",
                    f"after {fired.rule} (complexity {tau}), redex {q.rule} at "
                    f"{list(q.position)} has complexity {q.complexity}, above "
                    "every bound of the second decrease clause",
                )


def _uppermost_active_sessions(t: Term) -> list[tuple[Path, ParBind]]:
    out = []
    for path, s in iter_subterms(t):
        if (
            isinstance(s, ParBind)
            and s.active
            and not any(contains_active_session(comp_body(c)) for c in s.comps)
        ):
            out.append((path, s))
    return out


def _parallel_inside(s: ParBind) -> int:
    """Parallel nodes properly contained in a session's components."""

    def count(t: Term) -> int:
        own = 1 if isinstance(t, (ParBind, Contract)) else 0
        return own + sum(count(c) for c in children(t))

    return sum(count(comp_body(c)) for c in s.comps)


def _chan_occurrence_count(s: ParBind) -> int:
    n = 0
    for c in s.comps:
        n += _count_chan(comp_body(c), s.chan)
    return n


def _count_chan(t: Term, a: str) -> int:
    if isinstance(t, ParBind) and t.chan == a:
        return 0
    if isinstance(t, Chan) and t.name == a:
        return 1
    return sum(_count_chan(c, a) for c in children(t))


def communication_measure(t: Term) -> tuple[int, dict[int, int], dict[int, int]]:
    """The (n, h, g) triple the communication phase drives down: active
    non-uppermost sessions, then parallel material still buried inside
    uppermost active sessions, then their channel occurrence counts.

    h counts parallel nodes inside each uppermost active session rather
    than its tree height: a hoisting step replaces one session by copies
    that each contain strictly fewer parallel nodes, which stays a strict
    multiset decrease even when two components tie for the tallest
    subtree (heights alone can tie and stall there)."""
    upper = _uppermost_active_sessions(t)
    upper_paths = {p for p, _ in upper}
    n = sum(
        1
        for path, s in iter_subterms(t)
        if isinstance(s, ParBind) and s.active and path not in upper_paths
    )
    h: dict[int, int] = {}
    g: dict[int, int] = {}
    for _, s in upper:
        buried = _parallel_inside(s)
        if buried >= 1:
            h[buried] = h.get(buried, 0) + 1
        occ = _chan_occurrence_count(s)
        g[occ] = g.get(occ, 0) + 1
    return n, h, g


def _fn_less(a: dict[int, int], b: dict[int, int]) -> bool:
    """a < b in the ordering that compares counts at the largest index first."""
    keys = sorted(set(a) | set(b), reverse=True)
    ta = tuple(a.get(k, 0) for k in keys)
    tb = tuple(b.get(k, 0) for k in keys)
    return ta < tb


def measure_decreases(before: Term, after: Term) -> bool:
    n0, h0, g0 = communication_measure(before)
    n1, h1, g1 = communication_measure(after)
    if n1 != n0:
        return n1 < n0
    if h1 != h0:
        return _fn_less(h1, h0)
    return _fn_less(g1, g0)


def audit_trace(
    ctx: TypingContext, trace: Trace, check_sr: bool = True
) -> PropertyReport:
    """Everything the run promised, checked against the recorded steps:
    replay, phase order, per-step subject reduction, the two decrease
    clauses, no activations after a chased cross, the shrinking
    communication measure, and the per-cycle complexity ceiling."""
    rep = PropertyReport("trace-audit", True)
    disc = trace.underline_discipline
    terms = [trace.initial] + [s.term_after for s in trace.steps]

    _audit_replay(rep, trace, terms)
    _audit_phase_order(rep, trace)
    if check_sr:
        _audit_subject_reduction(rep, ctx, trace, terms)
    _audit_decrease(rep, trace, terms, disc)
    _audit_activation_phases(rep, trace, terms, disc)
    _audit_freeze(rep, trace, terms, disc)
    _audit_communication_measure(rep, trace, terms)
    _audit_cycle_complexity(rep, trace, terms, disc)
    return rep


def _audit_replay(rep: PropertyReport, trace: Trace, terms: list[Term]) -> None:
    from .rewrite import InvalidRedex, step

    for i, ts in enumerate(trace.steps):
        try:
            redone = step(terms[i], ts.redex)
        except InvalidRedex as e:
            rep.add(f"step {i}", f"recorded redex no longer applies: {e}")
            continue
        if redone != ts.term_after:
            rep.add(f"step {i}", f"replaying {ts.redex.rule} gives a different term")


def _audit_phase_order(rep: PropertyReport, trace: Trace) -> None:
    order = {
        PHASE_PARALLEL: 0,
        PHASE_INTUITIONISTIC: 1,
        PHASE_ACTIVATION: 2,
        PHASE_COMMUNICATION: 3,
    }
    prev_cycle, prev_phase = 0, 0
    for i, ts in enumerate(trace.steps):
        ph = order[ts.phase]
        if ts.phase == PHASE_PARALLEL:
            ok = prev_cycle == 0 and prev_phase == 0
        elif ts.cycle == prev_cycle:
            ok = ph >= prev_phase
        else:
            ok = ts.cycle > prev_cycle and ph >= 1
        if not ok:
            rep.add(
                f"step {i}",
                f"phase {ts.phase} of cycle {ts.cycle} breaks the cyclic order",
            )
        prev_cycle, prev_phase = ts.cycle, ph


def _audit_subject_reduction(
    rep: PropertyReport, ctx: TypingContext, trace: Trace, terms: list[Term]
) -> None:
    for i, ts in enumerate(trace.steps):
        sr = check_subject_reduction(ctx, terms[i], ts.term_after)
        if not sr.ok:
            rep.add(f"step {i}", f"subject reduction failed: {sr.message}")


def _audit_decrease(
    rep: PropertyReport, trace: Trace, terms: list[Term], disc: bool
) -> None:
    for i, ts in enumerate(trace.steps):
        if ts.phase == PHASE_PARALLEL:
            continue
        k = ts.redex.kind
        if k in (RedexKind.PAR_PERM, RedexKind.PAR_PAR_PERM, RedexKind.ACTIVATION):
            continue
        before = find_redexes(terms[i], disc)
        after = find_redexes(ts.term_after, disc)
        _check_decrease(rep, i, ts.redex, before, after)


def _phase_spans(trace: Trace, phase: str) -> list[tuple[int, int]]:
    """Maximal runs [start, end) of steps with the given phase tag."""
    spans = []
    i = 0
    steps = trace.steps
    while i < len(steps):
        if steps[i].phase == phase:
            j = i
            while (
                j < len(steps)
                and steps[j].phase == phase
                and steps[j].cycle == steps[i].cycle
            ):
                j += 1
            spans.append((i, j))
            i = j
        else:
            i += 1
    return spans


def _audit_activation_phases(
    rep: PropertyReport, trace: Trace, terms: list[Term], disc: bool
) -> None:
    for start, end in _phase_spans(trace, PHASE_ACTIVATION):
        pre = find_redexes(terms[start], disc)
        tau = _max_c(pre, lambda r: is_communication(r.kind))
        post = find_redexes(terms[end], disc)
        intuitionistic = {
            RedexKind.BETA,
            RedexKind.CASE_INJ,
            RedexKind.PROJ_PAIR,
            RedexKind.CASE_PERM,
        }
        for q in post:
            if q.kind == RedexKind.ACTIVATION:
                rep.add(
                    f"step {end - 1}",
                    "activation phase ended with an activation redex left at "
                    f"{list(q.position)}",
                )
            elif q.kind in intuitionistic:
                rep.add(
                    f"step {end - 1}",
                    "activation phase ended with an intuitionistic redex at "
                    f"{list(q.position)}",
                )
            elif is_communication(q.kind) and q.complexity > tau:
                rep.add(
                    f"step {end - 1}",
                    f"activation raised the communication bound: {q.rule} has "
                    f"complexity {q.complexity} > {tau}",
                )


def _chase_end(trace: Trace, i: int) -> int:
    j = i + 1
    while (
        j < len(trace.steps)
        and trace.steps[j].phase == PHASE_COMMUNICATION
        and trace.steps[j].redex.kind in _CHASE
    ):
        j += 1
    return j


def _audit_freeze(
    rep: PropertyReport, trace: Trace, terms: list[Term], disc: bool
) -> None:
    for i, ts in enumerate(trace.steps):
        if ts.phase != PHASE_COMMUNICATION or ts.redex.kind not in _CROSSES:
            continue
        j = _chase_end(trace, i)
        for q in find_redexes(terms[j], disc):
            if q.kind == RedexKind.ACTIVATION:
                rep.add(
                    f"step {i}",
                    f"cross {ts.redex.rule} left an activation redex at "
                    f"{list(q.position)} after its chase",
                )


def _audit_communication_measure(
    rep: PropertyReport, trace: Trace, terms: list[Term]
) -> None:
    for start, end in _phase_spans(trace, PHASE_COMMUNICATION):
        i = start
        while i < end:
            ts = trace.steps[i]
            kind = ts.redex.kind
            if kind == RedexKind.GARBAGE_CROSS and not _fired_on_active(
                terms[i], ts.redex
            ):
                i += 1  # the inactive-session sweep sits outside the measure
                continue
            j = _chase_end(trace, i) if kind in _CROSSES else i + 1
            if not measure_decreases(terms[i], terms[j]):
                rep.add(
                    f"step {i}",
                    f"side-strategy move {ts.redex.rule} did not shrink the "
                    "(sessions, heights, occurrences) measure",
                )
            i = j
        # steps inside a chase were skipped over by j above


def _fired_on_active(t: Term, r: Redex) -> bool:
    s = subterm_at(t, r.position)
    return isinstance(s, ParBind) and s.active


def _cycle_entry_indices(trace: Trace) -> dict[int, int]:
    """Index into terms[] of the first state of each cycle."""
    entries: dict[int, int] = {}
    for i, ts in enumerate(trace.steps):
        if ts.phase == PHASE_PARALLEL:
            continue
        entries.setdefault(ts.cycle, i)
    return entries


def _audit_cycle_complexity(
    rep: PropertyReport, trace: Trace, terms: list[Term], disc: bool
) -> None:
    if trace.limit_hit:
        return  # a truncated run proves nothing about its cycles
    entries = _cycle_entry_indices(trace)
    if not entries:
        return
    cycles = sorted(entries)
    taus = {}
    for k in cycles:
        taus[k] = _max_c(find_redexes(terms[entries[k]], disc), lambda r: True)
    # the final, quiescent cycle leaves no steps; its entry state is the end
    last = cycles[-1] + 1
    taus[last] = _max_c(find_redexes(terms[-1], disc), lambda r: True)
    ks = cycles + [last]
    for a, b in zip(ks, ks[1:]):
        if taus[b] > taus[a]:
            rep.add(
                f"cycle {b}",
                f"max redex complexity rose from {taus[a]} to {taus[b]}",
            )
    for a, c in zip(ks, ks[2:]):
        if taus[a] > 0 and not taus[c] < taus[a]:
            rep.add(
                f"cycle {c}",
                f"max redex complexity {taus[c]} failed to drop below the "
                f"bound {taus[a]} from two cycles earlier",
            )
