"""Cost-aware Hoare-style verification for a small imperative language.

Modules: ``core`` (AST, cost model, substitution), ``parser``, ``costsem``
(syntactic cost of expressions), ``interp`` (cost-instrumented execution),
``vcg`` (weakest precondition with cost, three modes), ``emit`` (goal
rendering and solver calls), ``harness`` (empirical soundness checks) and
``cli``.
"""

from .core import AnnotatedProgram, CostModel, OracleInfo
from .interp import ExecOutcome, ExecutionError, ProgramState, exec_stmt, holds
from .parser import OracleMissingError, ParseError, parse_program, pretty_print
from .vcg import VerificationCondition, program_wpc, vcg

__all__ = [
    "AnnotatedProgram", "CostModel", "OracleInfo", "ExecOutcome", "ExecutionError",
    "ProgramState", "exec_stmt", "holds", "OracleMissingError", "ParseError",
    "parse_program", "pretty_print", "VerificationCondition", "program_wpc", "vcg",
]
