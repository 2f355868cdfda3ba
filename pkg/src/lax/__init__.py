"""Typed concurrent lambda-calculi over disjunctive axioms.

The package splits along the pipeline: formulas and axiom schemes, term
syntax with parser and printer, the type checker, single-step reduction,
the terminating master strategy, and checkers that validate whole runs.
"""

from .analysis import (
    NotNormal,
    PropertyReport,
    audit_trace,
    check_parallel_nf_property,
    check_subformula,
    communication_measure,
    is_normal,
    subterm_types,
    subterm_types_by_derivation,
)
from .axioms import (
    AxiomScheme,
    AxiomValidationError,
    broadcast_axiom,
    cyclic_axiom,
    em_axiom,
    general_axiom,
    goedel_axiom,
    preset,
    preset_names,
    show_axiom,
)
from .formulas import (
    BOT,
    TOP,
    Atom,
    Bot,
    Conj,
    Disj,
    Formula,
    Impl,
    Top,
    complexity,
    neg,
    prime_factors,
    proper_subformulas,
    show_formula,
    subformulas,
)
from .generator import GenConfig, default_context, generate, generate_corpus
from .parser import (
    LaxSyntaxError,
    Program,
    parse_axiom,
    parse_formula,
    parse_program,
    parse_term,
)
from .printer import show_term
from .rewrite import (
    InvalidRedex,
    NotParallelForm,
    NotSimplyTyped,
    Redex,
    RedexKind,
    find_redexes,
    height,
    is_parallel_form,
    is_value,
    session_comm_complexity,
    step,
    value_complexity,
)
from .strategy import (
    ParallelFormFailure,
    StepLimitExceeded,
    StrategyError,
    Trace,
    TraceStep,
    normalize,
    run_phase_activation,
    run_phase_communication,
    run_phase_intuitionistic,
    to_parallel_form,
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
    Proj,
    Term,
    Underline,
    Unit,
    Var,
    alpha_eq,
    free_chans,
    free_vars,
    term_size,
)
from .typecheck import (
    SubjectReductionReport,
    TypeIssue,
    TypingContext,
    TypingError,
    check,
    check_report,
    check_subject_reduction,
    infer_type,
    type_of,
)

__version__ = "0.1.0"
