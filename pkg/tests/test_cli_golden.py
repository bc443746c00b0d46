"""Golden-file tests: every manifest invocation reproduces its recorded output byte for byte.

Set ``DELTACORE_REGEN_GOLDEN=1`` to rewrite the golden files.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import pytest

from deltacore.cli import COMMANDS, run

ROOT = Path(__file__).resolve().parent.parent
MANIFEST = json.loads((ROOT / "corpus" / "manifest.json").read_text())
GOLDEN = ROOT / "tests" / "golden"


def _golden_path(k: int, args: list[str]) -> Path:
    return GOLDEN / f"{k:02d}-{args[0]}.txt"


def _render(code: int, out: str) -> str:
    return f"exit: {code}\n{out}"


@pytest.mark.parametrize("k", range(len(MANIFEST)), ids=[f"{k:02d}-{a[0]}" for k, a in enumerate(MANIFEST)])
def test_golden(k, monkeypatch):
    monkeypatch.chdir(ROOT)
    monkeypatch.delenv("DELTACORE_CONFIG", raising=False)
    args = MANIFEST[k]
    code, out, err = run(args)
    assert err == ""
    text = _render(code, out)
    path = _golden_path(k, args)
    if os.environ.get("DELTACORE_REGEN_GOLDEN") == "1":
        path.write_text(text)
    assert path.read_text() == text


def test_manifest_covers_every_subcommand():
    assert {a[0] for a in MANIFEST} == set(COMMANDS)


def test_corpus_has_twenty_inputs():
    from deltacore.parsing import parse_definitions

    defs = {}
    for path in (ROOT / "corpus").glob("*.dpoly"):
        defs.update(parse_definitions(path.read_text()))
    n = len(defs)
    for path in (ROOT / "corpus").glob("*.fml"):
        n += len(parse_definitions(path.read_text()))
    assert n >= 20
