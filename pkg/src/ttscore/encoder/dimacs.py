"""Weighted DIMACS with ``c p weight`` lines and the normalisation factor as comments."""

from __future__ import annotations

import io
import math
import os
from pathlib import Path
from typing import IO, Union

from ttscore.encoder.cnf import Cnf
from ttscore.encoder.weighting import WeightedFormula
from ttscore.errors import ScenarioFormatError

Target = Union[str, os.PathLike, IO[str]]


def dumps_weighted_dimacs(wf: WeightedFormula) -> str:
    out = io.StringIO()
    out.write(f"p cnf {wf.cnf.num_vars} {len(wf.cnf.clauses)}\n")
    out.write(f"c p gamma {wf.gamma!r}\n")
    out.write(f"c p loggamma {wf.log_gamma!r}\n")
    for lit in sorted(wf.weights, key=lambda x: (abs(x), x < 0)):
        out.write(f"c p weight {lit} {wf.weights[lit]!r} 0\n")
    for clause in wf.cnf.clauses:
        out.write(" ".join(map(str, clause)) + " 0\n")
    return out.getvalue()


def emit_weighted_dimacs(wf: WeightedFormula, destination: Target) -> None:
    text = dumps_weighted_dimacs(wf)
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text, encoding="ascii")


def loads_weighted_dimacs(text: str) -> WeightedFormula:
    header = None
    weights: dict[int, float] = {}
    gamma = log_gamma = None
    clauses: list[tuple[int, ...]] = []
    pending: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "c":
                if parts[1:3] == ["p", "weight"]:
                    weights[int(parts[3])] = float(parts[4])
                elif parts[1:3] == ["p", "gamma"]:
                    gamma = float(parts[3])
                elif parts[1:3] == ["p", "loggamma"]:
                    log_gamma = float(parts[3])
                continue
            if parts[0] == "p":
                if parts[1] != "cnf" or header is not None:
                    raise ValueError("bad problem line")
                header = (int(parts[2]), int(parts[3]))
                continue
            for tok in parts:
                x = int(tok)
                if x == 0:
                    clauses.append(tuple(pending))
                    pending = []
                else:
                    pending.append(x)
        except (ValueError, IndexError) as exc:
            raise ScenarioFormatError(f"line {lineno}: cannot parse {line!r} ({exc})") from None
    if header is None:
        raise ScenarioFormatError("missing 'p cnf' header")
    if pending:
        raise ScenarioFormatError("last clause is not terminated by 0")
    if len(clauses) != header[1]:
        raise ScenarioFormatError(f"header announces {header[1]} clauses, found {len(clauses)}")
    if log_gamma is None:
        log_gamma = math.log(gamma) if gamma is not None else 0.0
    return WeightedFormula(Cnf(header[0], tuple(clauses)), weights, log_gamma)


def load_weighted_dimacs(source: Target) -> WeightedFormula:
    if hasattr(source, "read"):
        return loads_weighted_dimacs(source.read())
    return loads_weighted_dimacs(Path(source).read_text(encoding="ascii"))
