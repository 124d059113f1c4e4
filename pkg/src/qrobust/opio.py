"""JSON file formats for operators, scenarios, and CSV report export.

Complex matrices are serialized as separate real/imaginary matrices so the
files stay human-diffable.  Scenario configs bundle a state (or channel or
instrument) with a free-set declaration and the knobs every subcommand
needs; validation happens before any computation and names the offending
field.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .channels import ChoiFreeSet, ChoiFreeSetUnion, ChoiOperator, Instrument, InstrumentFreeSet
from .errors import ValidationError
from .freesets import ConvexFreeSet, FreeSetUnion
from .operators import require_density, require_hermitian

AXIS_COLUMNS = {
    "x": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "y": np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2),
    "z": np.eye(2, dtype=complex),
}


def _require(obj: dict, field: str, context: str):
    if field not in obj:
        raise ValidationError(f"{context}: missing field {field!r}")
    return obj[field]


def matrix_to_json(matrix: np.ndarray) -> dict:
    m = np.asarray(matrix, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(obj: dict, context: str = "operator") -> np.ndarray:
    re = np.asarray(_require(obj, "re", context), dtype=float)
    im = np.asarray(_require(obj, "im", context), dtype=float)
    if re.shape != im.shape or re.ndim != 2:
        raise ValidationError(f"{context}: 're' and 'im' must be equal-shape matrices")
    return re + 1j * im


def operator_to_json(matrix: np.ndarray, kind: str, d1: int | None = None, d2: int | None = None, tp: bool | None = None) -> dict:
    out = {"kind": kind}
    out.update(matrix_to_json(matrix))
    if kind == "choi":
        out["d1"], out["d2"] = d1, d2
        out["tp"] = bool(tp) if tp is not None else True
    else:
        out["dim"] = int(np.asarray(matrix).shape[0])
    return out


def operator_from_json(obj: dict, context: str = "operator"):
    kind = _require(obj, "kind", context)
    matrix = matrix_from_json(obj, context)
    if kind == "state":
        dim = int(_require(obj, "dim", context))
        if matrix.shape != (dim, dim):
            raise ValidationError(f"{context}: matrix shape {matrix.shape} != dim {dim}")
        return kind, require_density(matrix)
    if kind == "hermitian":
        dim = int(_require(obj, "dim", context))
        if matrix.shape != (dim, dim):
            raise ValidationError(f"{context}: matrix shape {matrix.shape} != dim {dim}")
        return kind, require_hermitian(matrix, tol=1e-9)
    if kind == "choi":
        d1 = int(_require(obj, "d1", context))
        d2 = int(_require(obj, "d2", context))
        return kind, ChoiOperator(d1, d2, matrix, tp=bool(obj.get("tp", True)))
    raise ValidationError(f"{context}: unknown operator kind {kind!r}")


def _resolve(obj, base: Path, context: str) -> dict:
    """Inline object or {"file": relative-path} reference."""
    if isinstance(obj, dict) and set(obj) == {"file"}:
        path = base / obj["file"]
        try:
            return json.loads(path.read_text())
        except OSError as exc:
            raise ValidationError(f"{context}: cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{context}: invalid JSON in {path} at line {exc.lineno}: {exc.msg}") from exc
    if isinstance(obj, dict):
        return obj
    raise ValidationError(f"{context}: expected an object or a file reference")


def read_operator_file(path) -> tuple[str, object]:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read operator file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return operator_from_json(obj, context=str(path))


def write_operator_file(path, matrix, kind: str, d1: int | None = None, d2: int | None = None, tp: bool | None = None) -> None:
    Path(path).write_text(json.dumps(operator_to_json(matrix, kind, d1, d2, tp), indent=2, sort_keys=True) + "\n")


def _state_from(obj, base: Path, context: str) -> np.ndarray:
    kind, value = operator_from_json(_resolve(obj, base, context), context)
    if kind != "state":
        raise ValidationError(f"{context}: expected kind 'state', got {kind!r}")
    return value


def free_union_from_json(obj: dict, base: Path) -> FreeSetUnion:
    subsets_spec = _require(obj, "subsets", "free_set")
    if not isinstance(subsets_spec, list) or not subsets_spec:
        raise ValidationError("free_set.subsets must be a nonempty list")
    subsets = []
    for idx, spec in enumerate(subsets_spec):
        context = f"free_set.subsets[{idx}]"
        variant = _require(spec, "variant", context)
        label = spec.get("label", f"subset-{idx}")
        if variant == "singleton":
            sigma = _state_from(_require(spec, "state", context), base, context)
            subsets.append(ConvexFreeSet.singleton(sigma, label=label))
        elif variant == "hull":
            gens = [_state_from(g, base, f"{context}.generators[{i}]") for i, g in enumerate(_require(spec, "generators", context))]
            subsets.append(ConvexFreeSet.hull(gens, label=label))
        elif variant == "incoherent_basis":
            if "axis" in spec:
                axis = spec["axis"]
                if axis not in AXIS_COLUMNS:
                    raise ValidationError(f"{context}: unknown axis {axis!r} (use x, y, or z)")
                subsets.append(ConvexFreeSet.incoherent_basis(AXIS_COLUMNS[axis], label=label))
            else:
                basis = matrix_from_json(_require(spec, "basis", context), context)
                subsets.append(ConvexFreeSet.incoherent_basis(basis, label=label))
        else:
            raise ValidationError(f"{context}: unknown variant {variant!r}")
    return FreeSetUnion(subsets)


def _choi_from(obj, base: Path, context: str) -> ChoiOperator:
    kind, value = operator_from_json(_resolve(obj, base, context), context)
    if kind != "choi":
        raise ValidationError(f"{context}: expected kind 'choi', got {kind!r}")
    return value


def choi_union_from_json(obj: dict, base: Path) -> ChoiFreeSetUnion:
    subsets_spec = _require(obj, "subsets", "free_set")
    subsets = []
    for idx, spec in enumerate(subsets_spec):
        context = f"free_set.subsets[{idx}]"
        variant = _require(spec, "variant", context)
        label = spec.get("label", f"subset-{idx}")
        if variant == "singleton":
            subsets.append(ChoiFreeSet.singleton(_choi_from(_require(spec, "channel", context), base, context), label=label))
        elif variant == "hull":
            gens = [_choi_from(g, base, f"{context}.generators[{i}]") for i, g in enumerate(_require(spec, "generators", context))]
            subsets.append(ChoiFreeSet.hull(gens, label=label))
        else:
            raise ValidationError(f"{context}: unknown variant {variant!r} for channels")
    return ChoiFreeSetUnion(subsets)


def instrument_from_json(obj: dict, base: Path, context: str) -> Instrument:
    spec = _resolve(obj, base, context)
    d1 = int(_require(spec, "d1", context))
    d2 = int(_require(spec, "d2", context))
    elements = [matrix_from_json(e, f"{context}.elements[{i}]") for i, e in enumerate(_require(spec, "elements", context))]
    return Instrument(d1, d2, elements)


def instrument_subsets_from_json(obj: dict, base: Path) -> list[InstrumentFreeSet]:
    subsets_spec = _require(obj, "subsets", "free_set")
    subsets = []
    for idx, spec in enumerate(subsets_spec):
        context = f"free_set.subsets[{idx}]"
        variant = _require(spec, "variant", context)
        label = spec.get("label", f"subset-{idx}")
        if variant == "singleton":
            subsets.append(InstrumentFreeSet.singleton(instrument_from_json(_require(spec, "instrument", context), base, context), label=label))
        elif variant == "hull":
            gens = [instrument_from_json(g, base, f"{context}.generators[{i}]") for i, g in enumerate(_require(spec, "generators", context))]
            subsets.append(InstrumentFreeSet.hull(gens, label=label))
        else:
            raise ValidationError(f"{context}: unknown variant {variant!r} for instruments")
    return subsets


class Scenario:
    """Parsed scenario config: inputs plus the common numeric knobs."""

    def __init__(self, raw: dict, base: Path):
        self.raw = raw
        self.base = base
        self.mode = raw.get("mode", "robustness")
        if self.mode not in ("robustness", "weight"):
            raise ValidationError(f"scenario mode must be 'robustness' or 'weight', got {self.mode!r}")
        self.s = raw.get("s")
        self.tol = float(raw.get("tol", 1e-7))
        if self.tol <= 0:
            raise ValidationError("scenario tol must be positive")
        self.seed = int(raw.get("seed", 0))
        self.sample_budget = int(raw.get("sample_budget", 64))
        self.m_values = raw.get("m_values")

    def state(self) -> np.ndarray:
        return _state_from(_require(self.raw, "state", "scenario"), self.base, "scenario.state")

    def free_union(self) -> FreeSetUnion:
        return free_union_from_json(_require(self.raw, "free_set", "scenario"), self.base)

    def channel(self) -> ChoiOperator:
        return _choi_from(_require(self.raw, "channel", "scenario"), self.base, "scenario.channel")

    def choi_union(self) -> ChoiFreeSetUnion:
        return choi_union_from_json(_require(self.raw, "free_set", "scenario"), self.base)

    def instrument(self) -> Instrument:
        return instrument_from_json(_require(self.raw, "instrument", "scenario"), self.base, "scenario.instrument")

    def instrument_subsets(self) -> list[InstrumentFreeSet]:
        return instrument_subsets_from_json(_require(self.raw, "free_set", "scenario"), self.base)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ValidationError(f"{path}: scenario must be a JSON object")
    return Scenario(raw, path.parent)


def _flatten(prefix: str, value, out: dict) -> None:
    if isinstance(value, dict):
        for key in sorted(value):
            _flatten(f"{prefix}.{key}" if prefix else str(key), value[key], out)
    elif isinstance(value, (list, tuple)):
        out[prefix] = json.dumps(value)
    else:
        out[prefix] = value


def emit_csv(report: dict, path) -> None:
    """Flat CSV export: 'rows' lists become the table, scalars a single row."""
    rows = report.get("rows")
    if isinstance(rows, list) and all(isinstance(r, dict) for r in rows):
        header = sorted({key for row in rows for key in row})
        records = [{key: row.get(key, "") for key in header} for row in rows]
    else:
        flat: dict = {}
        _flatten("", report, flat)
        header = sorted(flat)
        records = [flat] if flat else []
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=header)
        writer.writeheader()
        for record in records:
            writer.writerow(record)
