"""Forwarding schemes: assertions, rules, evaluation, validation and builders."""

from ttscore.scheme.assertions import (
    FALSE,
    TRUE,
    Active,
    Const,
    EdgeLess,
    Eq,
    Exists,
    In,
    MsgLess,
    Not,
    Or,
    Present,
    and_,
    forall,
    implies,
    or_,
    parse_assertion,
    to_sexpr,
)
from ttscore.scheme.builders import (
    build_from_tt_schedule,
    build_hot_potato,
    hot_potato_rules,
    prefers,
    priority,
    shortest_path_routes,
    tt_rules,
)
from ttscore.scheme.forwarding import (
    ForwardingScheme,
    LocalView,
    Rule,
    SetDef,
    eval_assertion,
    forwarding_output,
    queue_at,
)
from ttscore.scheme.validation import (
    Reachability,
    ValidationReport,
    check_scheme_structure,
    explore_reachable,
    validate_scheme,
)

__all__ = [name for name in dir() if not name.startswith("_")]
