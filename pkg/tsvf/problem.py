# tsvf/problem.py
# Problem-file decoder/encoder
# Doel: één JSON-document per probleem, complexe getallen als [re, im]

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from tsvf.errors import NotHermitianError, ProblemFileError, TsvfError
from tsvf.qcore import (
    DEGENERACY_TOL,
    Bra,
    HamiltonianSchedule,
    Ket,
    Observable,
    Operator,
    Segment,
    spectral_decompose,
)
from tsvf.tsv import GeneralizedTwoStateVector, Term, TwoStateVector, TwoTimeKernel


@dataclass(frozen=True, eq=False)
class Problem:
    dims: Tuple[int, ...]
    observables: Dict[str, Operator] = field(default_factory=dict)
    pre: Optional[Ket] = None
    post: Optional[Bra] = None
    schedule: Optional[HamiltonianSchedule] = None
    generalized: Optional[GeneralizedTwoStateVector] = None
    kernel: Optional[TwoTimeKernel] = None

    @property
    def mode(self) -> str:
        if self.kernel is not None:
            return "kernel"
        if self.generalized is not None:
            return "generalized"
        return "pair"

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def selection(self):
        if self.mode == "kernel":
            raise ProblemFileError("a two-time kernel problem has no pre/post selection; use abl for its joint outcomes")
        if self.mode == "generalized":
            return self.generalized
        return TwoStateVector(self.post, self.pre)

    def observable(self, name: str, degeneracy_tol: float = DEGENERACY_TOL) -> Observable:
        if name not in self.observables:
            known = ", ".join(sorted(self.observables)) or "none"
            raise ProblemFileError(f"unknown observable {name!r} (known: {known})")
        try:
            return spectral_decompose(self.observables[name], degeneracy_tol, label=name)
        except NotHermitianError as exc:
            raise ProblemFileError(f"observable {name!r}: {exc}") from exc


def _complex(value, where: str) -> complex:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)
    ):
        raise ProblemFileError(f"{where}: expected [re, im], got {value!r}")
    return complex(float(value[0]), float(value[1]))


def _vector(data, dim: int, where: str) -> np.ndarray:
    if not isinstance(data, list) or len(data) != dim:
        raise ProblemFileError(f"{where}: expected {dim} amplitudes")
    return np.array([_complex(x, f"{where}[{i}]") for i, x in enumerate(data)])


def _matrix(data, rows: int, cols: int, where: str) -> np.ndarray:
    if not isinstance(data, list) or len(data) != rows:
        raise ProblemFileError(f"{where}: expected {rows} rows")
    return np.array([_vector(row, cols, f"{where}[{i}]") for i, row in enumerate(data)])


def parse_problem(doc: Dict[str, Any]) -> Problem:
    if not isinstance(doc, dict):
        raise ProblemFileError("problem file must be a JSON object")

    dims = doc.get("dims")
    if not isinstance(dims, list) or not dims or not all(isinstance(d, int) and d > 0 for d in dims):
        raise ProblemFileError(f"dims must be a non-empty list of positive integers, got {dims!r}")
    dims = tuple(dims)
    total = math.prod(dims)

    has_pair = "pre" in doc or "post" in doc
    populated = [has_pair, "generalized" in doc, "kernel" in doc]
    if sum(populated) != 1:
        raise ProblemFileError("exactly one of pre+post, generalized, kernel must be given")

    try:
        pre = post = schedule = generalized = kernel = None
        if has_pair:
            if "pre" not in doc or "post" not in doc:
                raise ProblemFileError("pre and post must be given together")
            pre = Ket(_vector(doc["pre"], total, "pre"))
            post = Bra(_vector(doc["post"], total, "post"))
        elif "generalized" in doc:
            terms = doc["generalized"]
            if not isinstance(terms, list) or not terms:
                raise ProblemFileError("generalized must be a non-empty list of terms")
            generalized = GeneralizedTwoStateVector(tuple(
                Term(
                    _complex(t.get("alpha"), f"generalized[{i}].alpha"),
                    Bra(_vector(t.get("post"), total, f"generalized[{i}].post")),
                    Ket(_vector(t.get("pre"), total, f"generalized[{i}].pre")),
                )
                for i, t in enumerate(terms)
            ))
        else:
            if len(dims) != 2:
                raise ProblemFileError("a kernel problem needs dims [dim_A, dim_B]")
            kernel = TwoTimeKernel(_matrix(doc["kernel"], dims[0], dims[1], "kernel"))

        if "hamiltonian" in doc:
            segments = []
            for i, seg in enumerate(doc["hamiltonian"]):
                segments.append(Segment(
                    float(seg["duration"]),
                    Operator(_matrix(seg["matrix"], total, total, f"hamiltonian[{i}].matrix")),
                ))
            schedule = HamiltonianSchedule(tuple(segments), start=float(doc.get("start_time", 0.0)))

        # kernel observables act on particle A (dims[0]) or particle B (dims[1])
        obs_dims = (dims[0], dims[1]) if kernel is not None else (total,)
        observables = {}
        for i, entry in enumerate(doc.get("observables", [])):
            name = entry.get("name")
            if not isinstance(name, str) or not name:
                raise ProblemFileError(f"observables[{i}] needs a name")
            if name in observables:
                raise ProblemFileError(f"duplicate observable {name!r}")
            data = entry.get("matrix")
            size = len(data) if isinstance(data, list) and len(data) in obs_dims else obs_dims[0]
            observables[name] = Operator(_matrix(data, size, size, f"observables[{i}].matrix"))
    except ProblemFileError:
        raise
    except (TsvfError, ValueError, TypeError, KeyError, AttributeError) as exc:
        raise ProblemFileError(f"invalid problem: {exc}") from exc

    return Problem(
        dims=dims,
        observables=observables,
        pre=pre,
        post=post,
        schedule=schedule,
        generalized=generalized,
        kernel=kernel,
    )


def load_problem(path: str) -> Problem:
    try:
        with open(path) as f:
            doc = json.load(f)
    except OSError as exc:
        raise ProblemFileError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{path}: {exc}") from exc
    return parse_problem(doc)


def _encode_complex(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _encode_vector(vec) -> list:
    return [_encode_complex(z) for z in vec]


def _encode_matrix(m) -> list:
    return [_encode_vector(row) for row in m]


def dump_problem(problem: Problem) -> Dict[str, Any]:
    doc: Dict[str, Any] = {"dims": list(problem.dims)}
    if problem.mode == "pair":
        doc["pre"] = _encode_vector(problem.pre.amplitudes)
        doc["post"] = _encode_vector(problem.post.amplitudes)
    elif problem.mode == "generalized":
        doc["generalized"] = [
            {
                "alpha": _encode_complex(t.alpha),
                "pre": _encode_vector(t.forward.amplitudes),
                "post": _encode_vector(t.backward.amplitudes),
            }
            for t in problem.generalized.terms
        ]
    else:
        doc["kernel"] = _encode_matrix(problem.kernel.matrix)
    if problem.schedule is not None:
        doc["start_time"] = problem.schedule.start
        doc["hamiltonian"] = [
            {"duration": s.duration, "matrix": _encode_matrix(s.hamiltonian.matrix)}
            for s in problem.schedule.segments
        ]
    doc["observables"] = [
        {"name": name, "matrix": _encode_matrix(op.matrix)} for name, op in problem.observables.items()
    ]
    return doc


def save_problem(problem: Problem, path: str):
    # json schrijft floats als kortste round-trip repr: bit-exact terug te lezen
    with open(path, "w") as f:
        json.dump(dump_problem(problem), f, indent=1)
        f.write("\n")


def problem_from_scenario(scenario, outcome: int = 0) -> Problem:
    """Problem for one selection of a scenario (mean-king has one per post-selection outcome)."""
    if not 0 <= outcome < len(scenario.selections):
        raise ProblemFileError(
            f"scenario {scenario.name} has {len(scenario.selections)} outcome(s), got outcome {outcome + 1}"
        )
    selection = scenario.selections[outcome]
    if isinstance(selection, TwoTimeKernel):
        return Problem(dims=scenario.system.dims, observables=dict(scenario.observables), kernel=selection)

    dims = scenario.system.dims
    if math.prod(dims) != selection.dim:
        dims = (selection.dim,)
    observables = {name: op for name, op in scenario.observables.items() if op.dim == selection.dim}
    if isinstance(selection, GeneralizedTwoStateVector):
        return Problem(dims=dims, observables=observables, generalized=selection)
    return Problem(dims=dims, observables=observables, pre=selection.forward, post=selection.backward)
