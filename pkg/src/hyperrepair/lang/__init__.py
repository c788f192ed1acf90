"""Concrete syntax, ASTs and printers for programs and HyperLTL formulas."""

from .expr import Call, Const, Expr, Op, Quant, Sort, SortError, Var
from .formula import HyperLTL
from .parser import ParseError, parse_expr, parse_formula, parse_program
from .printer import expr_str, formula_str, program_str
from .program import Assign, If, Observe, Program, Seq, Skip, While, seq

__all__ = [
    "Assign", "Call", "Const", "Expr", "HyperLTL", "If", "Observe", "Op", "ParseError",
    "Program", "Quant", "Seq", "Skip", "Sort", "SortError", "Var", "While", "expr_str",
    "formula_str", "parse_expr", "parse_formula", "parse_program", "program_str", "seq",
]
