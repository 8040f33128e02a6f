"""Versioned result documents for minimizations.

Layout (JSON, UTF-8)::

    {
      "schema": "entropy-lab-result/1",
      "config": {"basis_size", "symmetry", "algorithm", "seed", "tol",
                 "max_iterations", "half_width", "n_half", "spacing"},
      "coefficients": [[index, re, im], ...],     # nonzero entries only
      "report": {"S_position", "S_momentum", "total", "norm2", "tolerance"},
      "iterations": int,
      "converged": bool
    }

Floats are written with ``repr`` precision, so loading a saved document gives
back every field bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .oscillator_basis import CoefficientVector, Symmetry
from .functionals import EntropyReport, total_entropy
from .grid import QuadratureGrid
from .minimizer import MinimizeResult

SCHEMA = "entropy-lab-result/1"


class DocumentError(ValueError):
    """A result file is missing, unreadable or does not follow the schema."""


@dataclass(frozen=True)
class RunConfig:
    basis_size: int
    symmetry: str
    algorithm: str
    seed: int
    tol: float
    max_iterations: int
    half_width: float
    n_half: int

    @property
    def spacing(self) -> float:
        return self.grid().spacing

    def grid(self) -> QuadratureGrid:
        return QuadratureGrid(self.half_width, self.n_half)


@dataclass(frozen=True, eq=False)
class ResultDocument:
    config: RunConfig
    coeffs: CoefficientVector
    report: EntropyReport
    iterations: int
    converged: bool
    schema: str = SCHEMA

    def __eq__(self, other) -> bool:
        if not isinstance(other, ResultDocument):
            return NotImplemented
        return (self.schema == other.schema and self.config == other.config
                and self.coeffs.symmetry == other.coeffs.symmetry
                and np.array_equal(self.coeffs.coeffs, other.coeffs.coeffs)
                and self.report == other.report and self.iterations == other.iterations
                and self.converged == other.converged)

    @classmethod
    def from_result(cls, result: MinimizeResult) -> "ResultDocument":
        cfg = result.config
        g = result.grid
        run = RunConfig(cfg.basis_size, cfg.symmetry.value, cfg.algorithm, cfg.seed, cfg.tol,
                        cfg.max_iterations, g.half_width, g.n_half)
        return cls(run, result.coeffs, result.report, result.iterations, result.converged)

    @property
    def total(self) -> float:
        return self.report.total

    def reevaluate(self) -> EntropyReport:
        return total_entropy(self.coeffs, self.config.grid())

    def to_dict(self) -> dict:
        a = self.coeffs.coeffs
        rows = [[int(n), float(a[n].real), float(a[n].imag)] for n in np.flatnonzero(a)]
        cfg = asdict(self.config)
        cfg["spacing"] = self.config.spacing
        return {
            "schema": self.schema,
            "config": cfg,
            "coefficients": rows,
            "size": int(a.size),
            "report": asdict(self.report),
            "iterations": self.iterations,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ResultDocument":
        try:
            if d["schema"] != SCHEMA:
                raise DocumentError(f"unsupported schema {d['schema']!r}, expected {SCHEMA!r}")
            cfg = dict(d["config"])
            cfg.pop("spacing", None)
            run = RunConfig(**cfg)
            a = np.zeros(int(d["size"]), dtype=complex)
            for n, re, im in d["coefficients"]:
                a[int(n)] = complex(re, im)
            coeffs = CoefficientVector(a, Symmetry.parse(run.symmetry))
            report = EntropyReport(**d["report"])
            return cls(run, coeffs, report, int(d["iterations"]), bool(d["converged"]))
        except DocumentError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise DocumentError(f"malformed result document: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ResultDocument":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DocumentError(f"not a JSON document: {exc}") from exc
        if not isinstance(data, dict):
            raise DocumentError("result document must be a JSON object")
        return cls.from_dict(data)


def save(doc: ResultDocument, path: str | Path) -> None:
    Path(path).write_text(doc.dumps(), encoding="utf-8", newline="\n")


def load(path: str | Path) -> ResultDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return ResultDocument.loads(text)
