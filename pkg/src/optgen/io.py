"""File formats: basis dumps, operator files, CSV tables and schema-checked JSON."""

from __future__ import annotations

import csv
import json
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .su_basis import HermitianOperator, LieBasis, as_dense, build_lie_basis, enumerate_space

SCHEMA_VERSION = "1.0"
FLOAT_FORMAT = "%.17g"


def load_schema(name):
    text = resources.files("optgen.schemas").joinpath(f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(doc, name):
    """Raise ``jsonschema.ValidationError`` unless ``doc`` matches schema ``name``."""
    jsonschema.validate(doc, load_schema(name))


def write_json(path, doc, schema=None):
    if schema is not None:
        validate(doc, schema)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def read_json(path, schema=None):
    doc = json.loads(Path(path).read_text())
    if schema is not None:
        validate(doc, schema)
    return doc


def fmt(x):
    return FLOAT_FORMAT % x


def write_csv(path, header, rows):
    """Rows of numbers written with 17 significant digits; ints stay ints."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([str(v) if isinstance(v, (int, np.integer, str)) else fmt(v) for v in row])
    return path


def read_csv(path):
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [row for row in r]


# basis dumps: manifest.json plus one little-endian complex128 file per generator

def write_basis_dump(basis, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for k, g in enumerate(basis):
        name = f"{k + 1:02d}_{g.label}.bin"
        np.ascontiguousarray(as_dense(g.matrix), dtype="<c16").tofile(out_dir / name)
        files.append(name)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "n": basis.n,
        "N": basis.N,
        "dim": basis.space.dim,
        "ordering": "reverse-lex",
        "dtype": "complex128-le",
        "layout": "row-major",
        "norm_c": basis.norm_c,
        "labels": list(basis.labels),
        "files": files,
    }
    return write_json(out_dir / "manifest.json", manifest, "basis_manifest")


def load_basis_dump(manifest_path):
    manifest_path = Path(manifest_path)
    m = read_json(manifest_path, "basis_manifest")
    space = enumerate_space(m["n"], m["N"])
    D = m["dim"]
    if D != space.dim:
        raise ValueError(f"manifest dim {D} disagrees with C(N+n-1, n-1) = {space.dim}")
    gens = []
    for label, name in zip(m["labels"], m["files"]):
        data = np.fromfile(manifest_path.parent / name, dtype="<c16")
        if data.size != D * D:
            raise ValueError(f"{name}: expected {D * D} entries, found {data.size}")
        gens.append(HermitianOperator(data.reshape(D, D), label, space))
    return LieBasis(tuple(gens), float(m["norm_c"]), space)


# operator files

def operator_to_json(op, basis=None):
    """Coefficient form when ``basis`` is given, else the full matrix."""
    doc = {"schema_version": SCHEMA_VERSION, "n": op.space.n, "N": op.space.N, "label": op.label}
    if basis is not None:
        from .su_basis import decompose_operator

        dec = decompose_operator(basis, op)
        doc["coefficients"] = dict(zip(basis.labels, map(float, dec.coefficients)))
    else:
        m = as_dense(op.matrix)
        doc["matrix"] = {"re": m.real.tolist(), "im": m.imag.tolist()}
    return doc


def operator_from_json(doc, basis=None):
    """Build a ``HermitianOperator`` from an operator document.

    Coefficients may be a list in basis order or a mapping from labels;
    missing labels count as zero.
    """
    validate(doc, "operator")
    if basis is None or (basis.n, basis.N) != (doc["n"], doc["N"]):
        basis = build_lie_basis(enumerate_space(doc["n"], doc["N"]))
    label = doc.get("label", "G")
    if "coefficients" in doc:
        c = doc["coefficients"]
        if isinstance(c, dict):
            unknown = set(c) - set(basis.labels)
            if unknown:
                raise ValueError(f"unknown basis labels {sorted(unknown)}")
            vec = np.array([c.get(lab, 0.0) for lab in basis.labels], dtype=float)
        else:
            vec = np.asarray(c, dtype=float)
            if vec.shape != (len(basis),):
                raise ValueError(f"expected {len(basis)} coefficients, got {vec.shape}")
        return basis.combination(vec, label=label), basis
    m = np.asarray(doc["matrix"]["re"], dtype=float) + 1j * np.asarray(doc["matrix"]["im"], dtype=float)
    return HermitianOperator(m, label, basis.space), basis


def read_operator(path, basis=None):
    return operator_from_json(read_json(path), basis)


def write_operator(path, op, basis=None):
    return write_json(path, operator_to_json(op, basis), "operator")
