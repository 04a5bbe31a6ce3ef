"""Deterministic serialization.

Floats are rendered with 17 significant digits (an exact round trip),
keys keep a fixed order, newlines are LF, and nothing records a timestamp,
so identical inputs produce byte-identical files. Complex 4 x 4 matrices
serialize as 16 row-major [re, im] pairs.
"""
from dataclasses import dataclass
import csv
import io as _io
import json
import os

import numpy as np

from .exceptions import ParseError, ValidationError

MATRIX_CELL_COLUMNS = tuple(
    f"m{i}{j}_{part}" for i in range(4) for j in range(4) for part in ("re", "im")
)


def format_float(x) -> str:
    x = float(x)
    if not np.isfinite(x):
        raise ValidationError(f"cannot serialize non-finite value {x!r}")
    return format(x, ".17g")


def encode_matrix(M) -> list:
    M = np.asarray(M, dtype=complex)
    if M.shape != (4, 4):
        raise ValidationError(f"expected a 4x4 matrix, got shape {M.shape}")
    return [[float(z.real), float(z.imag)] for z in M.ravel()]


def decode_matrix(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.shape != (16, 2):
        raise ParseError(f"expected 16 [re, im] pairs, got shape {arr.shape}")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(4, 4)


def _is_scalar(x) -> bool:
    return x is None or isinstance(x, (bool, int, float, str, np.bool_, np.integer, np.floating))


def _dump_scalar(x) -> str:
    if x is None:
        return "null"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return repr(int(x))
    if isinstance(x, (float, np.floating)):
        return format_float(x)
    if isinstance(x, str):
        return json.dumps(x, ensure_ascii=False)
    raise ValidationError(f"cannot serialize {type(x).__name__}")


def _dump(obj, out, level):
    pad = "  " * level
    inner = "  " * (level + 1)
    if _is_scalar(obj):
        out.append(_dump_scalar(obj))
        return
    if isinstance(obj, np.ndarray):
        obj = encode_matrix(obj) if np.iscomplexobj(obj) else obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for pos, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise ValidationError(f"JSON keys must be strings, got {key!r}")
            out.append(f"{inner}{json.dumps(key, ensure_ascii=False)}: ")
            _dump(value, out, level + 1)
            out.append(",\n" if pos < len(obj) - 1 else "\n")
        out.append(pad + "}")
        return
    if isinstance(obj, (list, tuple)):
        items = list(obj)
        if not items:
            out.append("[]")
            return
        if all(_is_scalar(x) for x in items):
            out.append("[" + ", ".join(_dump_scalar(x) for x in items) + "]")
            return
        out.append("[\n")
        for pos, value in enumerate(items):
            out.append(inner)
            _dump(value, out, level + 1)
            out.append(",\n" if pos < len(items) - 1 else "\n")
        out.append(pad + "]")
        return
    raise ValidationError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj) -> str:
    out = []
    _dump(obj, out, 0)
    out.append("\n")
    return "".join(out)


def write_json(path: str, obj) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_json(obj))


def write_csv(path: str, header, rows) -> None:
    """CSV with LF line endings; floats at 17 significant digits."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [
                    x if isinstance(x, str)
                    else repr(int(x)) if isinstance(x, (int, np.integer)) and not isinstance(x, bool)
                    else format_float(x)
                    for x in row
                ]
            )


@dataclass(frozen=True)
class ExperimentEnsemble:
    """Loaded state ensemble. `states` keeps the parsed matrices untouched
    so a save reproduces the file; `physical_states` projects each onto the
    closest valid density operator (symmetrize, clamp negative eigenvalues,
    renormalize the trace) for downstream evaluation."""

    states: np.ndarray
    annotations: tuple = ()

    def __post_init__(self):
        states = np.asarray(self.states, dtype=complex)
        if states.ndim != 3 or states.shape[1:] != (4, 4) or states.shape[0] == 0:
            raise ValidationError(f"expected (n, 4, 4) states, got shape {states.shape}")
        object.__setattr__(self, "states", states)
        if self.annotations and len(self.annotations) != states.shape[0]:
            raise ValidationError(
                f"{len(self.annotations)} annotations for {states.shape[0]} states"
            )
        object.__setattr__(self, "annotations", tuple(self.annotations))
        for i, M in enumerate(states):
            herm = float(np.max(np.abs(M - M.conj().T)))
            if herm > 1e-6:
                raise ValidationError(f"state deviates from Hermitian by {herm:.3e}", index=i)
            tr = complex(np.trace(M))
            if abs(tr - 1.0) > 1e-6:
                raise ValidationError(f"state trace {tr!r} deviates from 1 beyond 1e-6", index=i)
            w = np.linalg.eigvalsh((M + M.conj().T) / 2.0)
            if w[0] < -1e-6:
                raise ValidationError(f"state eigenvalue {w[0]:.3e} below -1e-6", index=i)

    def __len__(self):
        return self.states.shape[0]

    @property
    def physical_states(self) -> np.ndarray:
        out = np.empty_like(self.states)
        for i, M in enumerate(self.states):
            w, V = np.linalg.eigh((M + M.conj().T) / 2.0)
            w = np.clip(w, 0.0, None)
            rho = (V * w) @ V.conj().T
            out[i] = rho / np.real(np.trace(rho))
        return out


def save_ensemble(path: str, ensemble: ExperimentEnsemble) -> None:
    """Write a state ensemble as .json or .csv by extension. Loading and
    saving a file produced here reproduces it byte for byte."""
    ext = os.path.splitext(path)[1].lower()
    if ext == ".json":
        doc = {"states": [encode_matrix(M) for M in ensemble.states]}
        if ensemble.annotations:
            doc["annotations"] = list(ensemble.annotations)
        write_json(path, doc)
    elif ext == ".csv":
        rows = []
        for M in ensemble.states:
            row = []
            for z in M.ravel():
                row.extend((float(z.real), float(z.imag)))
            rows.append(row)
        write_csv(path, MATRIX_CELL_COLUMNS, rows)
    else:
        raise ValidationError(f"unsupported ensemble extension {ext!r} (use .json or .csv)")


def _load_json_ensemble(text: str) -> ExperimentEnsemble:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or "states" not in doc:
        raise ParseError('expected a JSON object with a "states" array')
    raw = doc["states"]
    if not isinstance(raw, list) or not raw:
        raise ParseError('"states" must be a non-empty array')
    states = []
    for i, entry in enumerate(raw):
        try:
            states.append(decode_matrix(entry))
        except (ParseError, ValueError) as exc:
            raise ParseError(f"state {i}: {exc}", record=i) from None
    annotations = doc.get("annotations", [])
    if annotations and not isinstance(annotations, list):
        raise ParseError('"annotations" must be an array')
    return ExperimentEnsemble(states=np.array(states), annotations=tuple(annotations))


def _load_csv_ensemble(text: str) -> ExperimentEnsemble:
    reader = csv.reader(_io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty CSV file") from None
    if tuple(header) != MATRIX_CELL_COLUMNS:
        raise ParseError(f"unexpected CSV header {header!r}")
    states = []
    for i, row in enumerate(reader):
        if not row:
            continue
        if len(row) != 32:
            raise ParseError(f"row {i}: expected 32 cells, got {len(row)}", record=i)
        try:
            values = np.array([float(cell) for cell in row])
        except ValueError as exc:
            raise ParseError(f"row {i}: {exc}", record=i) from None
        states.append((values[0::2] + 1j * values[1::2]).reshape(4, 4))
    if not states:
        raise ParseError("CSV contains no state rows")
    return ExperimentEnsemble(states=np.array(states))


def load_ensemble(path: str) -> ExperimentEnsemble:
    """Read a .json or .csv state ensemble; structural problems raise
    ParseError, physical violations raise ValidationError with the index."""
    ext = os.path.splitext(path)[1].lower()
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if ext == ".json":
        return _load_json_ensemble(text)
    if ext == ".csv":
        return _load_csv_ensemble(text)
    raise ValidationError(f"unsupported ensemble extension {ext!r} (use .json or .csv)")
