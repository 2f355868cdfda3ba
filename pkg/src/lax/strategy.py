"""The master reduction strategy: drive a typed term to a normal parallel form.

The driver first permutes every parallel node onto the outer spine, then
cycles three phases until a full cycle makes no step:

1. intuitionistic: beta, case-on-injection, projection and case
   permutations, leftmost-innermost;
2. activation: activate sessions holding a transmittable value,
   outermost first;
3. communication: repeatedly pick an uppermost active session and apply
   the side strategy (hoist a nested parallel component, else cross and
   chase the projections and case permutations the message created, else
   collect garbage), then sweep garbage on inactive sessions.

Every step lands in a Trace; auditing and replay live in the analysis
module.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

from .printer import show_term
from .rewrite import (
    Redex,
    RedexKind,
    find_redexes,
    is_parallel_form,
    step,
)
from .terms import ParBind, Path, Term, comp_body, contains_active_session, iter_subterms

PHASE_PARALLEL = "ParallelForm"
PHASE_INTUITIONISTIC = "Intuitionistic"
PHASE_ACTIVATION = "Activation"
PHASE_COMMUNICATION = "Communication"

INTUITIONISTIC_KINDS = {
    RedexKind.BETA,
    RedexKind.CASE_INJ,
    RedexKind.PROJ_PAIR,
    RedexKind.CASE_PERM,
}

CHASE_KINDS = {RedexKind.PROJ_PAIR, RedexKind.CASE_PERM}

CROSS_KINDS = {
    RedexKind.BASIC_CROSS,
    RedexKind.FULL_CROSS,
    RedexKind.BROADCAST_CROSS,
}

DEFAULT_MAX_STEPS = 100_000


def default_max_steps() -> int:
    raw = os.environ.get("LAX_MAX_STEPS")
    if raw is None:
        return DEFAULT_MAX_STEPS
    n = int(raw)
    if n <= 0:
        raise ValueError("LAX_MAX_STEPS must be positive")
    return n


class StrategyError(Exception):
    pass


class ParallelFormFailure(StrategyError):
    """A parallel node is stuck under a case branch; no permutation reaches it."""


class StepLimitExceeded(StrategyError):
    def __init__(self, term: Term, trace: "Trace"):
        super().__init__(f"step limit hit after {len(trace.steps)} steps")
        self.term = term
        self.trace = trace


@dataclass(frozen=True)
class TraceStep:
    cycle: int
    phase: str
    redex: Redex
    term_after: Term

    def to_json(self) -> dict:
        return {
            "cycle": self.cycle,
            "phase": self.phase,
            "rule": self.redex.rule,
            "position": list(self.redex.position),
            "complexity": self.redex.complexity,
            "term_after": show_term(self.term_after),
        }


@dataclass
class Trace:
    initial: Term
    steps: list[TraceStep] = field(default_factory=list)
    cycles: int = 0
    limit_hit: bool = False
    underline_discipline: bool = False

    @property
    def final(self) -> Term:
        return self.steps[-1].term_after if self.steps else self.initial

    def phase_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for s in self.steps:
            out[s.phase] = out.get(s.phase, 0) + 1
        return out

    def to_json_lines(self) -> list[str]:
        import json

        return [json.dumps(s.to_json(), sort_keys=True) for s in self.steps]


class _Run:
    def __init__(self, t: Term, max_steps: int, discipline: bool):
        self.t = t
        self.max_steps = max_steps
        self.discipline = discipline
        self.trace = Trace(initial=t, underline_discipline=discipline)
        self.cycle = 0
        self.phase = PHASE_PARALLEL

    def redexes(self) -> list[Redex]:
        return find_redexes(self.t, self.discipline)

    def fire(self, r: Redex) -> None:
        if len(self.trace.steps) >= self.max_steps:
            self.trace.limit_hit = True
            raise StepLimitExceeded(self.t, self.trace)
        self.t = step(self.t, r)
        self.trace.steps.append(TraceStep(self.cycle, self.phase, r, self.t))


# ---------------------------------------------------------------------------
# phases

def _parallel_form(run: _Run) -> None:
    run.phase = PHASE_PARALLEL
    while not is_parallel_form(run.t):
        perms = [r for r in run.redexes() if r.kind == RedexKind.PAR_PERM]
        if not perms:
            raise ParallelFormFailure(
                "no permutation applies; a parallel node sits under a case "
                "branch, which no rule can permute out"
            )
        run.fire(perms[0])


def _leftmost_innermost(rs: list[Redex]) -> Redex:
    innermost = [
        r
        for r in rs
        if not any(
            q is not r and _is_proper_prefix(r.position, q.position) for q in rs
        )
    ]
    return min(innermost, key=lambda r: r.position)


def _is_proper_prefix(p: Path, q: Path) -> bool:
    return len(p) < len(q) and q[: len(p)] == p


def _intuitionistic(run: _Run) -> int:
    run.phase = PHASE_INTUITIONISTIC
    made = 0
    while True:
        rs = [r for r in run.redexes() if r.kind in INTUITIONISTIC_KINDS]
        if not rs:
            return made
        run.fire(_leftmost_innermost(rs))
        made += 1


def _activation(run: _Run) -> int:
    run.phase = PHASE_ACTIVATION
    made = 0
    while True:
        rs = [r for r in run.redexes() if r.kind == RedexKind.ACTIVATION]
        if not rs:
            return made
        run.fire(rs[0])  # preorder first = leftmost outermost
        made += 1


def _uppermost_active(t: Term) -> list[Path]:
    """Active sessions without active sessions inside, shallowest first."""
    out = []
    for path, s in iter_subterms(t):
        if (
            isinstance(s, ParBind)
            and s.active
            and not any(contains_active_session(comp_body(c)) for c in s.comps)
        ):
            out.append(path)
    out.sort(key=lambda p: (len(p), p))
    return out


def _side_step(run: _Run, path: Path) -> bool:
    """One clause of the side strategy at the session at path. True if fired."""
    here = [r for r in run.redexes() if r.position == path]

    hoists = [r for r in here if r.kind == RedexKind.PAR_PAR_PERM]
    if hoists:
        run.fire(min(hoists, key=lambda r: r.comp))
        return True

    basics = [r for r in here if r.kind == RedexKind.BASIC_CROSS]
    crosses = [r for r in here if r.kind in CROSS_KINDS]
    if basics:
        run.fire(min(basics, key=lambda r: (r.sender, r.receiver)))
        _chase(run)
        return True
    if crosses:
        run.fire(crosses[0])
        _chase(run)
        return True

    garbage = [r for r in here if r.kind == RedexKind.GARBAGE_CROSS]
    if garbage:
        run.fire(garbage[0])
        return True
    return False


def _chase(run: _Run) -> None:
    """Clear the projections and case permutations a cross just created."""
    while True:
        rs = [r for r in run.redexes() if r.kind in CHASE_KINDS]
        if not rs:
            return
        run.fire(rs[0])


def _sweep_inactive_garbage(run: _Run) -> int:
    """Collect garbage on sessions that will never activate.

    The cross rules only fire on active sessions, but a session whose
    channel is missing from some component can already be dissolved; doing
    it here is what makes the final term redex-free.
    """
    made = 0
    while True:
        rs = [
            r
            for r in run.redexes()
            if r.kind == RedexKind.GARBAGE_CROSS
            and not _session_active_at(run.t, r.position)
        ]
        if not rs:
            return made
        run.fire(rs[0])
        made += 1


def _session_active_at(t: Term, path: Path) -> bool:
    from .terms import subterm_at

    s = subterm_at(t, path)
    return isinstance(s, ParBind) and s.active


def _communication(run: _Run) -> int:
    run.phase = PHASE_COMMUNICATION
    made = 0
    while True:
        fired = False
        for path in _uppermost_active(run.t):
            if _side_step(run, path):
                fired = True
                made += 1
                break
        if not fired:
            break
    made += _sweep_inactive_garbage(run)
    return made


# ---------------------------------------------------------------------------
# public driver

def to_parallel_form(
    t: Term,
    max_steps: Optional[int] = None,
    underline_discipline: bool = False,
) -> tuple[Term, Trace]:
    run = _Run(t, max_steps or default_max_steps(), underline_discipline)
    _parallel_form(run)
    return run.t, run.trace


def run_phase_intuitionistic(
    t: Term, max_steps: Optional[int] = None
) -> tuple[Term, Trace]:
    run = _Run(t, max_steps or default_max_steps(), False)
    run.cycle = 1
    _intuitionistic(run)
    return run.t, run.trace


def run_phase_activation(
    t: Term, max_steps: Optional[int] = None
) -> tuple[Term, Trace]:
    run = _Run(t, max_steps or default_max_steps(), False)
    run.cycle = 1
    _activation(run)
    return run.t, run.trace


def run_phase_communication(
    t: Term,
    max_steps: Optional[int] = None,
    underline_discipline: bool = False,
) -> tuple[Term, Trace]:
    run = _Run(t, max_steps or default_max_steps(), underline_discipline)
    run.cycle = 1
    _communication(run)
    return run.t, run.trace


def normalize(
    t: Term,
    max_steps: Optional[int] = None,
    max_cycles: Optional[int] = None,
    underline_discipline: bool = False,
) -> tuple[Term, Trace]:
    """Run the full strategy; returns the final term and the trace.

    Raises StepLimitExceeded when the step budget runs out and
    ParallelFormFailure when a parallel node cannot be permuted onto the
    spine. Identical inputs and flags give identical traces.
    """
    run = _Run(t, max_steps or default_max_steps(), underline_discipline)
    _parallel_form(run)
    cycle = 0
    while True:
        cycle += 1
        if max_cycles is not None and cycle > max_cycles:
            run.trace.limit_hit = True
            raise StepLimitExceeded(run.t, run.trace)
        run.cycle = cycle
        made = _intuitionistic(run)
        made += _activation(run)
        made += _communication(run)
        if made == 0:
            break
    run.trace.cycles = cycle
    return run.t, run.trace
