"""Pretty-printers producing re-parseable concrete syntax."""

from __future__ import annotations

from . import formula as F
from .expr import Call, Const, Expr, Op, Quant, Sort, Var
from .program import Assign, If, Observe, Program, Seq, Skip, Stmt, While

_INFIX = {
    "+": "+", "-": "-", "*": "*", "++": "+", "==": "==", "!=": "!=",
    "<": "<", "<=": "<=", ">": ">", ">=": ">=", "&&": "&&", "||": "||", "=>": "->",
}


def quote(s: str) -> str:
    return '"' + s.replace('"', '""') + '"'


def expr_str(e: Expr) -> str:
    if isinstance(e, Const):
        if e.sort == Sort.BOOL:
            return "true" if e.value else "false"
        if e.sort == Sort.STRING:
            return quote(e.value)
        return str(e.value)
    if isinstance(e, Var):
        return e.name if e.trace is None else f"{e.name}[{e.trace}]"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(expr_str(a) for a in e.args)})"
    if isinstance(e, Op):
        if e.op == "ite":
            return "ite(" + ", ".join(expr_str(a) for a in e.args) + ")"
        if e.op == "!":
            return f"!({expr_str(e.args[0])})"
        if e.op == "neg":
            return f"-({expr_str(e.args[0])})"
        sym = _INFIX[e.op]
        return "(" + f" {sym} ".join(expr_str(a) for a in e.args) + ")"
    if isinstance(e, Quant):
        vs = ", ".join(f"{v.key}:{v.sort}" for v in e.vars)
        return f"({e.kind} {vs}. {expr_str(e.body)})"
    raise TypeError(e)


def stmt_lines(s: Stmt, indent: int = 0) -> list:
    pad = "  " * indent
    mark = [pad + "@repair"] if getattr(s, "loc", None) is not None else []
    if isinstance(s, Skip):
        return [pad + "skip;"]
    if isinstance(s, Observe):
        return [pad + "observe;"]
    if isinstance(s, Assign):
        return mark + [f"{pad}{s.var.name} = {expr_str(s.expr)};"]
    if isinstance(s, Seq):
        return [line for c in s.stmts for line in stmt_lines(c, indent)]
    if isinstance(s, If):
        out = mark + [f"{pad}if ({expr_str(s.cond)}) {{"]
        out += stmt_lines(s.then, indent + 1)
        out += [f"{pad}}} else {{"]
        out += stmt_lines(s.orelse, indent + 1)
        out += [pad + "}"]
        return out
    if isinstance(s, While):
        out = mark + [f"{pad}while ({expr_str(s.cond)}) {{"]
        out += stmt_lines(s.body, indent + 1)
        out += [pad + "}"]
        return out
    raise TypeError(s)


def program_str(p: Program) -> str:
    lines = []
    # one declaration line per variable keeps declaration order stable on re-parse
    for name, sort in p.decls:
        lines.append(f"{sort.keyword} {name};")
    if p.outputs:
        lines.append("output " + ", ".join(p.outputs) + ";")
    lines.append("")
    lines += stmt_lines(p.body)
    return "\n".join(lines) + "\n"


def body_str(b: F.Body) -> str:
    if isinstance(b, F.LTrue):
        return "true"
    if isinstance(b, F.LFalse):
        return "false"
    if isinstance(b, F.Lit):
        a = expr_str(b.atom)
        return a if b.positive else f"!{a if a.startswith('(') else '(' + a + ')'}"
    if isinstance(b, F.And):
        return "(" + " && ".join(body_str(a) for a in b.args) + ")"
    if isinstance(b, F.Or):
        return "(" + " || ".join(body_str(a) for a in b.args) + ")"
    if isinstance(b, F.Next):
        return f"X {body_str(b.sub)}"
    if isinstance(b, F.WUntil):
        return f"({body_str(b.left)} W {body_str(b.right)})"
    raise TypeError(b)


def formula_str(f: F.HyperLTL) -> str:
    prefix = "".join(f"{q} {t}. " for q, t in f.prefix)
    return prefix + body_str(f.body)


def render_patch(var: str, e: Expr, indent: int = 0) -> list:
    """Render ``var = e`` with top-level ites unfolded into if/else for readability."""
    pad = "  " * indent
    if isinstance(e, Op) and e.op == "ite":
        return (
            [f"{pad}if ({expr_str(e.args[0])}) {{"]
            + render_patch(var, e.args[1], indent + 1)
            + [f"{pad}}} else {{"]
            + render_patch(var, e.args[2], indent + 1)
            + [pad + "}"]
        )
    return [f"{pad}{var} = {expr_str(e)};"]
