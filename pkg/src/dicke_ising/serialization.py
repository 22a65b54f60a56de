"""CSV and JSON encodings of solver results.

Every file starts with a schema token.  For CSV it is a ``# schema=...``
comment line ahead of the header row; for JSON it is the first key of the
top-level object, next to ``meta`` and ``data``.  Floats are written with
17 significant digits in CSV and with Python's shortest round-trip repr in
JSON, so reading a file back reproduces the arrays bit for bit.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, is_dataclass
from pathlib import Path

import numpy as np

from .ed import EDResult, FiniteSizeScan
from .equilibrium import PhaseDiagramGrid
from .errors import IoError
from .response import BoundState, SpectralGrid, SpectralMap

SCHEMA = "dicke-ising-data/1"
_CSV_PREFIX = "# schema="


@dataclass
class Table:
    """A named block of columns; the unit both encoders work with."""

    kind: str
    columns: list
    rows: list
    suffix: str = ""


@dataclass
class CouplingProfile:
    """Real-space cavity coupling profile ``s_j`` at a given effective field."""

    j: np.ndarray
    s: np.ndarray
    omega_x_tilde: float
    extra: dict = field(default_factory=dict)


def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _jsonable(x):
    if is_dataclass(x) and not isinstance(x, type):
        return _jsonable(asdict(x))
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        # JSON has no inf/nan literals
        return x if math.isfinite(x) else None
    if isinstance(x, complex):
        return {"re": _jsonable(x.real), "im": _jsonable(x.imag)}
    return x


def _complex_block(z):
    z = np.asarray(z)
    return {"re": z.real, "im": z.imag}


# --- result -> tables -------------------------------------------------------

def _phase_tables(g: PhaseDiagramGrid):
    rows = []
    for i, wx in enumerate(g.omega_x):
        for j, lsq in enumerate(g.lambda_sq_over_omega):
            rows.append([lsq, wx, g.m_x[i, j], g.m_z[i, j], g.n_ph[i, j], g.e0[i, j]])
    main = Table("phase-diagram", ["lambda_sq_over_omega", "omega_x", "m_x", "m_z", "n_ph", "e0"], rows)
    edge = Table("phase-boundary", ["lambda_sq_over_omega", "omega_x", "order"],
                 [list(b) for b in g.boundary], ".boundary")
    return [main, edge]


def _bound_tables(states):
    rows = [[b.omega_b, b.side, b.residue_proxy, b.gap_to_edge] for b in states]
    return [Table("bound-states", ["omega_b", "side", "residue_proxy", "gap_to_edge"], rows)]


def _grid_tables(g: SpectralGrid):
    cols = ["omega", "chi0_re", "chi0_im", "chi_re", "chi_im", "D_re", "D_im", "spectral"]
    rows = [list(r) for r in zip(g.omegas, g.chi0.real, g.chi0.imag, g.chi.real, g.chi.imag,
                                 g.D.real, g.D.imag, g.spectral_function)]
    return [Table("spectral-grid", cols, rows)]


def _map_tables(m: SpectralMap):
    cols = ["omega"] + [f"lambda={_cell(lam)}" for lam in m.lambdas]
    rows = [[w, *m.intensity[i]] for i, w in enumerate(m.omegas)]
    return [Table("response-map", cols, rows)]


def _profile_tables(p: CouplingProfile):
    return [Table("impurity-profile", ["j", "s_j"], [[int(j), s] for j, s in zip(p.j, p.s)])]


def _ed_tables(r: EDResult):
    s = r.photon_spectrum
    if s is None:
        raise IoError("EDResult carries no photon spectrum to serialize")
    main = Table("ed-spectrum", ["omega", "D_re", "D_im", "spectral"],
                 [list(x) for x in zip(s.omegas, s.D.real, s.D.imag, s.spectrum)])
    poles = Table("ed-poles", ["pole", "weight"], [list(x) for x in zip(s.poles, s.weights)], ".poles")
    return [main, poles]


def _scan_tables(f: FiniteSizeScan):
    rows = []
    for n in f.sizes:
        for j, lam in enumerate(f.lambdas):
            for i, w in enumerate(f.omegas):
                rows.append([int(n), lam, w, f.maps[n][i, j]])
    main = Table("finite-size-scan", ["n_spins", "lambda", "omega", "spectral"], rows)
    wrows = [[int(n), lam, f.pole_weight[a, j]] for a, n in enumerate(f.sizes)
             for j, lam in enumerate(f.lambdas)]
    weights = Table("finite-size-weights", ["n_spins", "lambda", "window_weight"], wrows, ".weights")
    return [main, weights]


def tables(result) -> list[Table]:
    """Split a result into the CSV tables that represent it."""
    if isinstance(result, PhaseDiagramGrid):
        return _phase_tables(result)
    if isinstance(result, SpectralGrid):
        return _grid_tables(result)
    if isinstance(result, SpectralMap):
        return _map_tables(result)
    if isinstance(result, CouplingProfile):
        return _profile_tables(result)
    if isinstance(result, EDResult):
        return _ed_tables(result)
    if isinstance(result, FiniteSizeScan):
        return _scan_tables(result)
    if isinstance(result, Table):
        return [result]
    if isinstance(result, (list, tuple)) and all(isinstance(b, BoundState) for b in result):
        return _bound_tables(result)
    raise IoError(f"don't know how to serialize {type(result).__name__}")


# --- result -> JSON payload --------------------------------------------------

def _json_data(result):
    if isinstance(result, SpectralGrid):
        return {"kind": "spectral-grid", "omegas": result.omegas,
                "chi0": _complex_block(result.chi0), "chi": _complex_block(result.chi),
                "D": _complex_block(result.D), "spectral": result.spectral_function,
                "omega_x_tilde": result.field.omega_x_tilde, "m_x": result.field.m_x}
    if isinstance(result, SpectralMap):
        return {"kind": "response-map", "lambdas": result.lambdas, "omegas": result.omegas,
                "intensity": result.intensity, "band_edges": result.band_edges}
    if isinstance(result, PhaseDiagramGrid):
        return {"kind": "phase-diagram", "lambda_sq_over_omega": result.lambda_sq_over_omega,
                "omega_x": result.omega_x, "m_x": result.m_x, "m_z": result.m_z,
                "n_ph": result.n_ph, "e0": result.e0, "omega_x_tilde": result.omega_x_tilde,
                "boundary": [{"lambda_sq_over_omega": b[0], "omega_x": b[1], "order": b[2]}
                             for b in result.boundary]}
    if isinstance(result, CouplingProfile):
        return {"kind": "impurity-profile", "j": result.j, "s_j": result.s,
                "omega_x_tilde": result.omega_x_tilde, **result.extra}
    if isinstance(result, EDResult):
        s = result.photon_spectrum
        data = {"kind": "ed-spectrum", "energies": result.energies,
                "ground_energy": result.ground_energy, "ground_parity": result.ground_parity,
                "observables": result.observables, "tail_weight": result.tail_weight,
                "degenerate": result.degenerate}
        if s is not None:
            data.update(omegas=s.omegas, D=_complex_block(s.D), spectral=s.spectrum,
                        poles=s.poles, weights=s.weights, eta=s.eta)
        return data
    if isinstance(result, FiniteSizeScan):
        return {"kind": "finite-size-scan", "sizes": result.sizes, "lambdas": result.lambdas,
                "omegas": result.omegas, "window": result.window,
                "maps": {str(n): result.maps[n] for n in result.sizes},
                "window_weight": result.pole_weight}
    if isinstance(result, (list, tuple)) and all(isinstance(b, BoundState) for b in result):
        return {"kind": "bound-states", "states": [asdict(b) for b in result]}
    if isinstance(result, Table):
        return {"kind": result.kind, "columns": result.columns, "rows": result.rows}
    raise IoError(f"don't know how to serialize {type(result).__name__}")


# --- encoders ------------------------------------------------------------------

def table_to_csv(table: Table) -> bytes:
    buf = io.StringIO(newline="")
    buf.write(f"{_CSV_PREFIX}{SCHEMA} kind={table.kind}\r\n")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(x) for x in row])
    return buf.getvalue().encode("utf-8")


def to_json(result, meta: dict | None = None) -> bytes:
    doc = {"schema": SCHEMA, "meta": _jsonable(meta or {}), "data": _jsonable(_json_data(result))}
    return (json.dumps(doc, indent=1, allow_nan=False) + "\n").encode("utf-8")


def serialize(result, fmt: str = "csv", meta: dict | None = None) -> bytes:
    """Encode the primary table (CSV) or the whole result (JSON) as bytes."""
    if fmt == "csv":
        return table_to_csv(tables(result)[0])
    if fmt == "json":
        return to_json(result, meta)
    raise IoError(f"unknown format {fmt!r}; expected csv or json")


def companion_path(output: Path, suffix: str) -> Path:
    """``out.csv`` + ``.boundary`` -> ``out.boundary.csv``."""
    output = Path(output)
    return output.with_name(output.stem + suffix + output.suffix)


def write_result(result, output, fmt: str = "csv", meta: dict | None = None) -> list[Path]:
    """Write the data file(s) for ``result``; returns the paths written."""
    output = Path(output)
    written = []
    try:
        output.parent.mkdir(parents=True, exist_ok=True)
        if fmt == "json":
            output.write_bytes(to_json(result, meta))
            return [output]
        if fmt != "csv":
            raise IoError(f"unknown format {fmt!r}; expected csv or json")
        for t in tables(result):
            path = companion_path(output, t.suffix) if t.suffix else output
            path.write_bytes(table_to_csv(t))
            written.append(path)
    except OSError as exc:
        raise IoError(f"cannot write {output}: {exc}") from exc
    return written


def write_sidecar(output, meta: dict) -> Path:
    path = Path(str(output) + ".meta.json")
    doc = {"schema": SCHEMA, **_jsonable(meta)}
    try:
        path.write_text(json.dumps(doc, indent=1, allow_nan=False) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


# --- readers -------------------------------------------------------------------

def read_csv(path) -> tuple[str, list, list]:
    """Return ``(kind, header, rows)`` with rows as lists of strings."""
    try:
        # bytes, so the CRLF row terminators survive
        text = Path(path).read_bytes().decode("utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    first, _, rest = text.partition("\r\n")
    if not first.startswith(_CSV_PREFIX):
        raise IoError(f"{path}: missing schema line")
    token, _, kind = first[len(_CSV_PREFIX):].partition(" kind=")
    if token != SCHEMA:
        raise IoError(f"{path}: schema {token!r}, expected {SCHEMA!r}")
    reader = csv.reader(io.StringIO(rest, newline=""))
    header = next(reader, None)
    if header is None:
        raise IoError(f"{path}: no header row")
    return kind, header, [r for r in reader]


def read_table(path) -> dict:
    """CSV file as ``{column: ndarray}``; non-numeric columns stay strings."""
    _, header, rows = read_csv(path)
    out = {}
    for c, name in enumerate(header):
        col = [r[c] for r in rows]
        try:
            out[name] = np.array([float(x) for x in col])
        except ValueError:
            out[name] = np.array(col)
    return out


def read_json(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise IoError(f"{path}: schema {doc.get('schema') if isinstance(doc, dict) else None!r}, "
                      f"expected {SCHEMA!r}")
    return doc
