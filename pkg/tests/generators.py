"""Hypothesis strategies generating well-typed MiniJ programs as source
text. Programs are small on purpose: the pipeline property tests reparse
every mutant candidate, so a case must stay cheap."""

from __future__ import annotations

import hypothesis.strategies as st

_INT_BIN = ("+", "-", "*", "/", "%")
_CMP = ("<", "<=", ">", ">=", "==", "!=")


@st.composite
def _int_expr(draw, int_vars: tuple[str, ...], depth: int) -> str:
    choices = ["lit"]
    if int_vars:
        choices += ["var", "var"]
    if depth > 0:
        choices += ["bin", "bin", "neg", "math"]
    kind = draw(st.sampled_from(choices))
    if kind == "lit":
        return str(draw(st.integers(min_value=0, max_value=9)))
    if kind == "var":
        return draw(st.sampled_from(int_vars))
    if kind == "neg":
        return f"-({draw(_int_expr(int_vars, depth - 1))})"
    if kind == "math":
        fn = draw(st.sampled_from(("abs", "min", "max")))
        a = draw(_int_expr(int_vars, depth - 1))
        if fn == "abs":
            return f"Math.abs({a})"
        b = draw(_int_expr(int_vars, depth - 1))
        return f"Math.{fn}({a}, {b})"
    op = draw(st.sampled_from(_INT_BIN))
    left = draw(_int_expr(int_vars, depth - 1))
    right = draw(_int_expr(int_vars, depth - 1))
    return f"({left} {op} {right})"


@st.composite
def _bool_expr(draw, int_vars: tuple[str, ...], bool_vars: tuple[str, ...], depth: int) -> str:
    choices = ["lit", "cmp"]
    if bool_vars:
        choices += ["var", "var"]
    if depth > 0:
        choices += ["and", "or", "not"]
    kind = draw(st.sampled_from(choices))
    if kind == "lit":
        return draw(st.sampled_from(("true", "false")))
    if kind == "var":
        return draw(st.sampled_from(bool_vars))
    if kind == "cmp":
        op = draw(st.sampled_from(_CMP))
        left = draw(_int_expr(int_vars, max(depth - 1, 0)))
        right = draw(_int_expr(int_vars, max(depth - 1, 0)))
        return f"({left} {op} {right})"
    if kind == "not":
        return f"!({draw(_bool_expr(int_vars, bool_vars, depth - 1))})"
    op = "&&" if kind == "and" else "||"
    left = draw(_bool_expr(int_vars, bool_vars, depth - 1))
    right = draw(_bool_expr(int_vars, bool_vars, depth - 1))
    return f"({left} {op} {right})"


@st.composite
def _stmts(draw, int_vars: list[str], bool_vars: list[str], arrays: list[str], budget: int, fresh: list[int]) -> list[str]:
    lines: list[str] = []
    count = draw(st.integers(min_value=1, max_value=budget))
    for _ in range(count):
        options = ["decl_int", "decl_bool"]
        if int_vars:
            options += ["assign_int", "compound", "incr"]
        if bool_vars:
            options.append("assign_bool")
        if arrays:
            options.append("arr_write")
        if budget > 1:
            options.append("if")
        kind = draw(st.sampled_from(options))
        if kind == "decl_int":
            name = f"v{fresh[0]}"
            fresh[0] += 1
            init = draw(_int_expr(tuple(int_vars), 2))
            lines.append(f"int {name} = {init};")
            int_vars.append(name)
        elif kind == "decl_bool":
            name = f"v{fresh[0]}"
            fresh[0] += 1
            init = draw(_bool_expr(tuple(int_vars), tuple(bool_vars), 1))
            lines.append(f"boolean {name} = {init};")
            bool_vars.append(name)
        elif kind == "assign_int":
            name = draw(st.sampled_from(int_vars))
            value = draw(_int_expr(tuple(int_vars), 2))
            lines.append(f"{name} = {value};")
        elif kind == "assign_bool":
            name = draw(st.sampled_from(bool_vars))
            value = draw(_bool_expr(tuple(int_vars), tuple(bool_vars), 1))
            lines.append(f"{name} = {value};")
        elif kind == "compound":
            name = draw(st.sampled_from(int_vars))
            op = draw(st.sampled_from(("+", "-", "*", "/")))
            value = draw(_int_expr(tuple(int_vars), 1))
            lines.append(f"{name} {op}= {value};")
        elif kind == "incr":
            name = draw(st.sampled_from(int_vars))
            form = draw(st.sampled_from(("{}++;", "{}--;", "++{};", "--{};")))
            lines.append(form.format(name))
        elif kind == "arr_write":
            name = draw(st.sampled_from(arrays))
            index = draw(st.integers(min_value=0, max_value=3))
            value = draw(_int_expr(tuple(int_vars), 1))
            lines.append(f"{name}[{index}] = {value};")
        else:  # if
            cond = draw(_bool_expr(tuple(int_vars), tuple(bool_vars), 1))
            inner = draw(_stmts(list(int_vars), list(bool_vars), list(arrays), 1, fresh))
            body = " ".join(inner)
            if draw(st.booleans()):
                other = draw(_stmts(list(int_vars), list(bool_vars), list(arrays), 1, fresh))
                lines.append(f"if ({cond}) {{ {body} }} else {{ {' '.join(other)} }}")
            else:
                lines.append(f"if ({cond}) {{ {body} }}")
    return lines


@st.composite
def minij_programs(draw) -> str:
    """A one-class program with a helper method and a driver that may call
    it; always type-checks by construction."""
    fresh = [0]
    helper_params = draw(st.integers(min_value=0, max_value=2))
    param_names = [f"p{i}" for i in range(helper_params)]
    int_vars = list(param_names)
    bool_vars: list[str] = []
    arrays: list[str] = []
    lines: list[str] = []
    if draw(st.booleans()):
        name = f"v{fresh[0]}"
        fresh[0] += 1
        size = draw(st.integers(min_value=1, max_value=4))
        lines.append(f"int[] {name} = new int[{size}];")
        arrays.append(name)
    lines += draw(_stmts(int_vars, bool_vars, arrays, 3, fresh))
    ret = draw(_int_expr(tuple(int_vars), 2))
    helper_body = "\n        ".join(lines + [f"return {ret};"])

    driver_args = ", ".join(draw(_int_expr((), 1)) for _ in range(helper_params))
    driver_lines = [f"int got = helper({driver_args});"]
    driver_int_vars = ["got", "seed"]
    driver_lines += draw(_stmts(driver_int_vars, [], [], 2, fresh))
    driver_ret = draw(_bool_expr(tuple(driver_int_vars), (), 1))
    driver_body = "\n        ".join(driver_lines + [f"return {driver_ret};"])

    params = ", ".join(f"int {p}" for p in param_names)
    return (
        "class G {\n"
        "    int seed = 3;\n"
        f"    int helper({params}) {{\n        {helper_body}\n    }}\n"
        f"    boolean driver() {{\n        {driver_body}\n    }}\n"
        "}\n"
    )
