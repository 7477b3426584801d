"""Model JSON (schema v1) with exact float round-tripping.

Matrices are row-major with explicit shape; complex numbers are [re, im]
pairs. Floats rely on repr round-tripping, so a saved model reproduces the
in-memory one bit-for-bit. Writes go to a temp file in the target directory
followed by an atomic rename, so no partial files are ever left behind.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .errors import DataError
from .model import KoopmanModel
from .observables import ReconstructionMap, observable_from_config
from .regression import EigenSystem, RegressionResult

__all__ = ["MODEL_SCHEMA_VERSION", "model_to_dict", "model_from_dict",
           "save_model", "load_model", "atomic_write_text"]

MODEL_SCHEMA_VERSION = 1


def _matrix_to_json(M: np.ndarray) -> dict:
    M = np.asarray(M)
    if np.iscomplexobj(M):
        data = [[float(v.real), float(v.imag)] for v in M.reshape(-1)]
        return {"shape": list(M.shape), "complex": True, "data": data}
    return {"shape": list(M.shape), "data": [float(v) for v in M.reshape(-1)]}


def _matrix_from_json(obj) -> np.ndarray:
    try:
        shape = tuple(obj["shape"])
        if obj.get("complex", False):
            flat = np.array([complex(re, im) for re, im in obj["data"]])
        else:
            flat = np.array([float(v) for v in obj["data"]])
        return flat.reshape(shape)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed matrix block in model file: {exc}") from None


def _cvec_to_json(v: np.ndarray) -> list:
    v = np.asarray(v, dtype=complex)
    return [[float(x.real), float(x.imag)] for x in v]


def _cvec_from_json(lst) -> np.ndarray:
    try:
        return np.array([complex(re, im) for re, im in lst])
    except (TypeError, ValueError) as exc:
        raise DataError(f"malformed complex vector in model file: {exc}") from None


def model_to_dict(model: KoopmanModel) -> dict:
    eig = model.regression.eigensystem
    eigen = {
        "lambdas": _cvec_to_json(eig.lambdas),
        "mus": _cvec_to_json(eig.mus),
        "W_right": _matrix_to_json(eig.W_right),
        "W_left": _matrix_to_json(eig.W_left),
        "use_exact_modes": bool(model.regression.use_exact_modes),
    }
    if model.regression.modes_exact is not None:
        eigen["modes_exact"] = _matrix_to_json(model.regression.modes_exact)
    metadata = dict(model.metadata)
    metadata["z0_train"] = _cvec_to_json(model.z0_train)
    metadata["training_scores"] = [float(s) for s in model.training_scores]
    d = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "dt": model.dt,
        "n": model.n,
        "q": model.q,
        "observables": model.observables.config(),
        "A": _matrix_to_json(model.A),
        "C": _matrix_to_json(model.C.C),
        "eigen": eigen,
        "metadata": metadata,
    }
    if model.B is not None:
        d["B"] = _matrix_to_json(model.B)
    return d


def model_from_dict(d: dict) -> KoopmanModel:
    if not isinstance(d, dict):
        raise DataError("model file must contain a JSON object")
    version = d.get("schema_version")
    if version != MODEL_SCHEMA_VERSION:
        raise DataError(f"unsupported model schema version {version!r}")
    required = {"dt", "n", "q", "observables", "A", "C", "eigen", "metadata"}
    missing = required - set(d)
    if missing:
        raise DataError(f"model file is missing keys: {sorted(missing)}")
    try:
        obs = observable_from_config(d["observables"])
        A = _matrix_from_json(d["A"])
        C = _matrix_from_json(d["C"])
        B = _matrix_from_json(d["B"]) if "B" in d else None
        eigd = d["eigen"]
        eig = EigenSystem(
            lambdas=_cvec_from_json(eigd["lambdas"]),
            mus=_cvec_from_json(eigd["mus"]),
            W_right=_matrix_from_json(eigd["W_right"]),
            W_left=_matrix_from_json(eigd["W_left"]),
            dt=float(d["dt"]),
        )
        modes_exact = (
            _matrix_from_json(eigd["modes_exact"]) if "modes_exact" in eigd else None
        )
        metadata = dict(d["metadata"])
        z0 = _cvec_from_json(metadata.pop("z0_train"))
        if not np.iscomplexobj(A):
            z0 = np.ascontiguousarray(z0.real)
        scores = np.array([float(s) for s in metadata.pop("training_scores")])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed model file: {exc}") from None
    res = RegressionResult(
        kind=str(metadata.get("regressor", "edmd")),
        rank=int(metadata.get("rank", eig.rank)),
        A_reduced=A,
        projection=None,
        B_reduced=B,
        eigensystem=eig,
        modes_exact=modes_exact,
        use_exact_modes=bool(eigd.get("use_exact_modes", False)),
        residual_fro=float(metadata.get("residual_fro", 0.0)),
        residual_rel=float(metadata.get("residual", 0.0)),
        sigma_min=float(metadata.get("sigma_min", 0.0)),
        m=int(metadata.get("m", 0)),
    )
    return KoopmanModel(
        observables=obs,
        regression=res,
        C=ReconstructionMap(C=C, indices=obs.state_indices),
        dt=float(d["dt"]),
        n=int(d["n"]),
        q=int(d["q"]),
        metadata=metadata,
        z0_train=z0,
        training_scores=scores,
    )


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file and atomic rename; never leaves partial output."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_model(model: KoopmanModel, path: str) -> None:
    payload = json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":"))
    atomic_write_text(path, payload + "\n")


def load_model(path: str) -> KoopmanModel:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read model file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"model file {path} is not valid JSON: {exc}") from None
    return model_from_dict(d)
