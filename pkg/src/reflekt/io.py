"""Reading forms and polyhedra, bundled fixtures, and safe output writing."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .exact import ExactMatrix, parse_scalar, scalar
from .qspace import Polyhedron, QuadraticSpace

FIXTURES = ("prism", "prism_packing", "omega", "no_roots", "triangle")


class InputError(ValueError):
    """Malformed or inconsistent input (exit code 1)."""


def fixture(name: str) -> dict:
    if name not in FIXTURES:
        raise InputError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}")
    text = resources.files("reflekt").joinpath("fixtures").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def read_json(source: str) -> dict:
    """JSON from a file path, or a bundled fixture written as ``@name``."""
    if source.startswith("@"):
        return fixture(source[1:])
    try:
        return json.loads(Path(source).read_text())
    except FileNotFoundError:
        raise InputError(f"no such file: {source}") from None
    except json.JSONDecodeError as err:
        raise InputError(f"{source}: invalid JSON ({err})") from None


def parse_matrix(rows) -> ExactMatrix:
    try:
        return ExactMatrix([[parse_scalar(x) if isinstance(x, str) else scalar(x) for x in r] for r in rows])
    except (TypeError, ValueError) as err:
        raise InputError(f"bad matrix: {err}") from None


def load_form(source: str) -> QuadraticSpace:
    """``diag,a,b,c`` shorthand, a JSON file with ``matrix``, or ``@fixture``."""
    try:
        if source.startswith("diag,"):
            entries = [parse_scalar(t.strip()) for t in source.split(",")[1:] if t.strip()]
            if len(entries) < 2:
                raise InputError("diag shorthand needs at least two entries")
            return QuadraticSpace.diagonal(*entries)
        data = read_json(source)
        if "matrix" not in data:
            raise InputError(f"{source}: missing 'matrix'")
        space = QuadraticSpace(parse_matrix(data["matrix"]))
        if "dim" in data and data["dim"] != space.dim:
            raise InputError(f"{source}: dim {data['dim']} does not match the matrix")
        return space
    except InputError:
        raise
    except ValueError as err:
        raise InputError(str(err)) from None


def load_polyhedron(source: str) -> Polyhedron:
    """A polyhedron file, ``@fixture``, or a ``vinberg`` report (form nested under ``form``)."""
    data = read_json(source)
    if "roots" not in data:
        raise InputError(f"{source}: missing 'roots'")
    try:
        matrix = data["matrix"] if "matrix" in data else data["form"]["matrix"]
        space = QuadraticSpace(parse_matrix(matrix))
        roots = [[parse_scalar(x) if isinstance(x, str) else scalar(x) for x in r] for r in data["roots"]]
        return Polyhedron(space, roots, data.get("labels"))
    except (KeyError, ValueError) as err:
        raise InputError(f"{source}: {err}") from None


def resolve_vertex(poly: Polyhedron, token: str) -> int:
    """A facet given by label, or by 1-based position when no label matches."""
    if token in poly.labels:
        return poly.labels.index(token)
    try:
        i = int(token) - 1
    except ValueError:
        raise InputError(f"unknown facet {token!r}") from None
    if not 0 <= i < len(poly):
        raise InputError(f"facet index {token} out of range 1..{len(poly)}")
    return i


def _encode(obj, level: int) -> str:
    pad = "  " * (level + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * level + "}"
    if isinstance(obj, (list, tuple)):
        if all(not isinstance(x, (dict, list, tuple)) for x in obj):
            return json.dumps(list(obj))        # scalar rows stay on one line
        items = [pad + _encode(x, level + 1) for x in obj]
        return "[\n" + ",\n".join(items) + "\n" + "  " * level + "]"
    return json.dumps(obj)


def dumps(obj) -> str:
    """Indented JSON with lists of scalars kept on one line; deterministic."""
    return _encode(obj, 0) + "\n"


def write_output(path: str | None, text: str, force: bool = False, stream=None) -> None:
    """Write ``text`` to ``path`` (refusing to clobber unless ``force``) or to ``stream``."""
    if path is None or path == "-":
        if stream is not None:
            stream.write(text)
        return
    p = Path(path)
    if p.exists() and not force:
        raise InputError(f"{path} exists; pass --force to overwrite")
    p.write_text(text)
