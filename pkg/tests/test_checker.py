import pytest

from mutamask.lang import CheckFailure, check_program, parse_source, type_check
from mutamask.lang.ast import INT, StaticCall


def issues_of(source):
    return check_program(parse_source(source))


def check_ok(source):
    return type_check(parse_source(source))


def test_logical_not_on_int_rejected():
    issues = issues_of("class A { boolean f(int i){ return !i; } }")
    assert any("'!' needs a boolean operand" in i.message for i in issues)


def test_int_subtraction_checks():
    prog = check_ok("class A { int f(int year){ return year - 4; } }")
    ret = prog.classes[0].methods[0].body.statements[0]
    assert ret.value.ty == INT


def test_declared_method_checks_undeclared_rejected():
    ok = """
    class NodeList { int count; void push(Composite c) { count += 1; } }
    class Composite { NodeList children = new NodeList(); void f(Composite c){ children.push(c); } }
    """
    assert issues_of(ok) == []
    missing = """
    class NodeList { int count; }
    class Composite { NodeList children = new NodeList(); void f(Composite c){ children.push(c); } }
    """
    issues = issues_of(missing)
    assert any("unknown method 'push'" in i.message for i in issues)


def test_declaration_order_independent():
    # Composite references NodeList declared after it, and a method declared
    # later in the same class.
    prog = check_ok(
        """
        class Composite {
            NodeList children = new NodeList();
            void f(Composite c) { g(c); }
            void g(Composite c) { children.add(c); }
        }
        class NodeList { int count; void add(Composite c) { count += 1; } }
        """
    )
    assert prog.classes[0].name == "Composite"


def test_every_expression_annotated():
    from mutamask.lang.ast import Expr

    prog = check_ok(
        "class A { int x = 2; int f(int[] a, char c){ a[0] = x + (int) c; return Math.max(a[0], -x); } }"
    )
    for node in prog.walk():
        if isinstance(node, Expr):
            assert node.ty is not None, node.kind


def test_math_call_rewritten_to_static():
    prog = check_ok("class A { int f(int x){ return Math.abs(x); } }")
    calls = [n for n in prog.walk() if isinstance(n, StaticCall)]
    assert len(calls) == 1 and calls[0].class_name == "Math"


def test_unknown_static_class_rejected():
    issues = issues_of("class A { int f(){ return Random.random(); } }")
    assert any("unknown identifier 'Random'" in i.message for i in issues)


def test_local_shadows_static_class_name():
    # `Math` resolving as a variable beats the static-class reading.
    issues = issues_of("class Math { int abs(int x){ return x; } } class A { int f(Math m){ return m.abs(1); } }")
    assert any("duplicate class 'Math'" in i.message for i in issues)


@pytest.mark.parametrize(
    "source, fragment",
    [
        ("class A { int f(){ return y; } }", "unknown identifier 'y'"),
        ("class A { int f(){ return g(); } }", "unknown method 'g'"),
        ("class A { int g(int x){ return x; } int f(){ return g(); } }", "expects 1 argument(s), got 0"),
        ("class A { int f(int x){ return x + true; } }", "'+' cannot combine int and boolean"),
        ("class A { int f(boolean b){ if (b + 1) return 1; return 0; } }", "cannot combine"),
        ("class A { int f(int x){ if (x) return 1; return 0; } }", "condition must be boolean"),
        ("class A { int f(int[] a, boolean b){ return a[b]; } }", "array index must be int"),
        ("class A { void f(){ return 1; } }", "void method may not return a value"),
        ("class A { int f(boolean b){ return b; } }", "return type mismatch"),
        ("class A { int f(string s){ s += \"x\"; return 0; } }", "compound '+=' needs int operands"),
        ("class A { int f(boolean b){ b++; return 0; } }", "'++' needs an int operand"),
        ("class A { int f(int x){ return ++(x + 1); } }", "'++' needs a variable"),
        ("class A { int f(string s){ return (int) s; } }", "cannot cast string to int"),
        ("class A { B f(){ return new B(); } }", "unknown type 'B'"),
        ("class A { int f(int x, int x){ return x; } }", "duplicate parameter 'x'"),
        ("class A { int f(){ int x = 1; int x = 2; return x; } }", "duplicate variable 'x'"),
        ("class A { int x; int x(){ return 1; } int f(){ return 0; } }", ""),
        ("class A { void v; int f(){ return 0; } }", "void is not a usable type"),
        ("class A { int f(string s, string t){ return s < t; } }", "cannot compare"),
        ("class A { int f(A a, A b){ if (a == b) return 1; return 0; } }", ""),
        ("class A { boolean f(A a){ return a == null; } }", ""),
        ("class A { boolean f(int x){ return x == null; } }", "cannot compare int and null"),
    ],
)
def test_error_catalog(source, fragment):
    issues = issues_of(source)
    if fragment:
        assert any(fragment in i.message for i in issues), [str(i) for i in issues]
    else:
        assert issues == []


def test_errors_collected_not_first_only():
    issues = issues_of(
        """
        class A {
            int f(){ return y; }
            int g(){ return z; }
        }
        """
    )
    assert len(issues) == 2
    assert {i.span.line for i in issues} == {3, 4}


def test_type_check_raises_with_all_issues():
    with pytest.raises(CheckFailure) as err:
        type_check(parse_source("class A { int f(){ return y; } int g(){ return z; } }"))
    assert len(err.value.issues) == 2


def test_string_rules():
    assert issues_of("class A { string f(string s, int i){ return s + i; } }") == []
    assert issues_of("class A { string f(string s, char c){ return c + s; } }") == []
    assert issues_of("class A { boolean f(string s){ return s == \"x\" && s != null; } }") == []
    issues = issues_of("class A { string f(string s, string t){ return s - t; } }")
    assert any("'-' needs int operands" in i.message for i in issues)


def test_field_vs_local_binding():
    prog = check_ok(
        "class A { int x; int f(int x){ return x; } int g(){ return x; } }"
    )
    f_ret = prog.classes[0].methods[0].body.statements[0].value
    g_ret = prog.classes[0].methods[1].body.statements[0].value
    assert f_ret.binding == "local"
    assert g_ret.binding == "field"
