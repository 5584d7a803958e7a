#!/usr/bin/env python3
"""Regenerate the fixture prediction files under fixtures/.

Each entry records the rendered masked sequence, its hash key, and five
predictions. Rerun after any change to the fixture programs or to the
token rendering rule; tests/test_fixture_data.py fails if the shipped
files drift from what this script produces.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from mutamask.lang import parse_source, type_check  # noqa: E402
from mutamask.masking import OperatorFamily, enumerate_sites, render_masked  # noqa: E402
from mutamask.predict import sequence_key  # noqa: E402

# fixture dir -> (program file, [(family, original, method, ordinal, tokens)])
PLANS = {
    "leapyear": (
        "leapyear.minij",
        [
            # binary expression operator (the first `%` of `year % 4`)
            (OperatorFamily.BINARY_OP, "%", "isLeapYear", 0, [" %", "/", "%", "-", " /"]),
            # literal (`4` of `year % 4`)
            (OperatorFamily.LITERAL, "4", "isLeapYear", 0, ["4", "100", "400", "10", "2"]),
        ],
    ),
    "printarray": (
        "printarray.minij",
        [
            # unary prefix operator (`--i` in the for update)
            (OperatorFamily.UNARY_OP, "--", "printArray", 0, ["++", "--", " --", " ++", "!"]),
        ],
    ),
    "search": (
        "search.minij",
        [
            # whole index expression of `arr[mid - 1]`
            (OperatorFamily.ARRAY_INDEX, "mid - 1", "binarySearch", 0, ["0", "n", "mid", "1", "low"]),
        ],
    ),
    "composite": (
        "composite.minij",
        [
            # method name of `children.add(c)`
            (OperatorFamily.METHOD_NAME, "add", "addChild", 0, ["add", "addAll", "push", "remove", "added"]),
        ],
    ),
    "specfuzzer": (
        "subjects.minij",
        [
            # `res = 1` literal; identical + duplicate entries mirror the
            # whitespace-variant behavior of real predictions
            (OperatorFamily.LITERAL, "1", "getTurn", 0, [" 1", "2", "255", "360", " 2"]),
            (OperatorFamily.METHOD_NAME, "setParent", "addChild", 0, ["setParent", "update", "set", "init", "parent"]),
            (OperatorFamily.VARIABLE_NAME, "ancestors", "addAncestor", 0, ["ancestors", "children", "this", "list", "items"]),
        ],
    ),
    "faultpairs/01_operator_swap": (
        "fixed.minij",
        [
            (OperatorFamily.BINARY_OP, "%", "isLeapYear", 0, [" %", "/", "%", "-", " /"]),
            (OperatorFamily.LITERAL, "4", "isLeapYear", 0, ["4", "100", "400", "10", "2"]),
        ],
    ),
    "faultpairs/02_method_swap": (
        "fixed.minij",
        [
            (OperatorFamily.METHOD_NAME, "setParent", "addChild", 0, ["setParent", "update", "set", "init", "parent"]),
            (OperatorFamily.METHOD_NAME, "add", "addChild", 0, ["add", "addAll", "push", "remove", "added"]),
        ],
    ),
    # The documented miss: predictions cover only methods unrelated to the
    # seeded getDelimiter fault, so killing every mutant never exercises it.
    "faultpairs/03_constant_return": (
        "fixed.minij",
        [
            (OperatorFamily.VARIABLE_NAME, "width", "getWidth", 0, ["width", "delimiter", "w", "size", "height"]),
            (OperatorFamily.LITERAL, '"w"', "describe", 0, ['"w"', '"x"', "width", '" w"', '"v"']),
        ],
    ),
    "faultpairs/04_empty_string_init": (
        "fixed.minij",
        [
            (OperatorFamily.VARIABLE_NAME, "s", "wrap", 0, ["s", '""', "null", "input", " s"]),
            (OperatorFamily.LITERAL, '"!"', "wrap", 0, ['"!"', '"?"', '""', '"."', " \"!\""]),
        ],
    ),
    "faultpairs/05_recursion_intro": (
        "fixed.minij",
        [
            (OperatorFamily.VARIABLE_NAME, "lexer", "isClosed", 0, ["lexer", "this", "parser", "lex", "l"]),
            (OperatorFamily.METHOD_NAME, "isClosed", "isClosed", 0, ["isClosed", "close", "isOpen", "closed", "isclosed"]),
        ],
    ),
}

SCORES = [0.31, 0.26, 0.21, 0.16, 0.11]


def find_site(program, family, original, method, ordinal):
    matches = [
        s
        for s in enumerate_sites(program)
        if s.family is family and s.original == original and s.method_name == method
    ]
    if ordinal >= len(matches):
        raise SystemExit(f"no site #{ordinal} for {family.value} {original!r} in {method}")
    return matches[ordinal]


def main() -> None:
    for rel, (program_file, picks) in PLANS.items():
        fixture_dir = ROOT / "fixtures" / rel
        program = type_check(parse_source((fixture_dir / program_file).read_text(encoding="utf-8")))
        entries = []
        for family, original, method, ordinal, tokens in picks:
            site = find_site(program, family, original, method, ordinal)
            sequence = render_masked(program, site).text
            entries.append(
                {
                    "key": sequence_key(sequence),
                    "sequence": sequence,
                    "site": {
                        "family": family.value,
                        "original": original,
                        "method": f"{site.class_name}.{site.method_name}",
                    },
                    "predictions": [
                        {"token": tok, "score": SCORES[i]} for i, tok in enumerate(tokens)
                    ],
                }
            )
        out = fixture_dir / "predictions.json"
        out.write_text(json.dumps({"entries": entries}, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {out} ({len(entries)} entries)")


if __name__ == "__main__":
    main()
