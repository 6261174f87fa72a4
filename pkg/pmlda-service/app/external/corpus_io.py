"""CSV and key-value file adapters for corpora, layouts, memberships and sampler output.

Every table is written with pandas' default float formatting, which round-trips
float64 exactly, so identical runs produce byte-identical files.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from dotenv import dotenv_values

from app.models.domain import BLOCKS, DocLayout, DocState, Document, ModelState, TopicParams, Trace
from app.utils.errors import InputError

logger = logging.getLogger(__name__)

KEY_COLUMNS = ["doc_id", "word_index"]


def _prepare(path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _read_table(path, required: Sequence[str]) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except FileNotFoundError:
        raise InputError(f"file not found: {path}")
    except (OSError, ValueError) as e:
        raise InputError(f"cannot parse {path}: {e}")
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise InputError(f"{path} is missing columns {missing}")
    return frame.sort_values(KEY_COLUMNS, kind="mergesort").reset_index(drop=True)


def _prefixed(frame: pd.DataFrame, prefix: str) -> List[str]:
    columns = [c for c in frame.columns if c.startswith(prefix) and c[len(prefix):].isdigit()]
    return sorted(columns, key=lambda c: int(c[len(prefix):]))


def _split_docs(frame: pd.DataFrame, path) -> List[pd.DataFrame]:
    """Per-document blocks; doc ids must be 0..D-1 and word indices 0..N-1."""
    blocks = []
    for expected, (doc_id, block) in enumerate(frame.groupby("doc_id", sort=True)):
        if doc_id != expected:
            raise InputError(f"{path}: document ids must run 0..D-1, found {doc_id} at position {expected}")
        if not np.array_equal(block["word_index"].to_numpy(), np.arange(len(block))):
            raise InputError(f"{path}: document {doc_id} has non-contiguous word indices")
        blocks.append(block)
    if not blocks:
        raise InputError(f"{path} holds no rows")
    return blocks


def _key_frame(lengths: Sequence[int]) -> pd.DataFrame:
    doc_id = np.repeat(np.arange(len(lengths)), lengths)
    word_index = np.concatenate([np.arange(n) for n in lengths])
    return pd.DataFrame({"doc_id": doc_id, "word_index": word_index})


def _with_columns(keys: pd.DataFrame, prefix: str, values: np.ndarray) -> pd.DataFrame:
    columns = pd.DataFrame(values, columns=[f"{prefix}{j}" for j in range(values.shape[1])])
    return pd.concat([keys, columns], axis=1)


# ----------------------------------------------------------------------
# Corpus: one row per word, doc_id, word_index, f0 .. f{dim-1}
# ----------------------------------------------------------------------

def write_corpus(path, corpus: List[Document]) -> None:
    keys = _key_frame([doc.N for doc in corpus])
    frame = _with_columns(keys, "f", np.vstack([doc.words for doc in corpus]))
    frame.to_csv(_prepare(path), index=False)
    logger.info(f"Wrote corpus of {len(corpus)} documents to {path}")


def read_corpus(path) -> List[Document]:
    frame = _read_table(path, KEY_COLUMNS)
    features = _prefixed(frame, "f")
    if not features:
        raise InputError(f"{path} has no feature columns f0..")
    return [Document(block[features].to_numpy(dtype=np.float64)) for block in _split_docs(frame, path)]


# ----------------------------------------------------------------------
# Truth sidecar: same layout, per-word z plus the document's pi and s
# ----------------------------------------------------------------------

def write_truth(path, truth: ModelState) -> None:
    lengths = [ds.Z.shape[0] for ds in truth.docs]
    keys = _key_frame(lengths)
    frame = _with_columns(keys, "z", np.vstack([ds.Z for ds in truth.docs]))
    pis = np.vstack([np.broadcast_to(ds.pi, (n, ds.pi.size)) for ds, n in zip(truth.docs, lengths)])
    frame = _with_columns(frame, "pi", pis)
    frame["s"] = np.repeat([ds.s for ds in truth.docs], lengths)
    frame.to_csv(_prepare(path), index=False)
    logger.info(f"Wrote latent truth to {path}")


def read_truth(path) -> List[DocState]:
    frame = _read_table(path, KEY_COLUMNS + ["s"])
    z_cols, pi_cols = _prefixed(frame, "z"), _prefixed(frame, "pi")
    if not z_cols or len(z_cols) != len(pi_cols):
        raise InputError(f"{path} needs matching z* and pi* columns")
    states = []
    for block in _split_docs(frame, path):
        first = block.iloc[0]
        states.append(DocState(first[pi_cols].to_numpy(dtype=np.float64), float(first["s"]),
                               block[z_cols].to_numpy(dtype=np.float64)))
    return states


# ----------------------------------------------------------------------
# Per-word memberships (PM-LDA MAP state or FCM), doc_id, word_index, z0 ..
# ----------------------------------------------------------------------

def write_memberships(path, memberships: List[np.ndarray]) -> None:
    keys = _key_frame([Z.shape[0] for Z in memberships])
    _with_columns(keys, "z", np.vstack(memberships)).to_csv(_prepare(path), index=False)
    logger.info(f"Wrote memberships for {len(memberships)} documents to {path}")


def read_memberships(path) -> List[np.ndarray]:
    frame = _read_table(path, KEY_COLUMNS)
    z_cols = _prefixed(frame, "z")
    if len(z_cols) < 2:
        raise InputError(f"{path} needs at least two membership columns z0, z1")
    return [block[z_cols].to_numpy(dtype=np.float64) for block in _split_docs(frame, path)]


def split_rows(U: np.ndarray, lengths: Sequence[int]) -> List[np.ndarray]:
    """Cut a stacked (total words, K) matrix back into per-document blocks."""
    return np.split(U, np.cumsum(lengths)[:-1])


# ----------------------------------------------------------------------
# Layout sidecar: doc_id, word_index, row, col
# ----------------------------------------------------------------------

def write_layout(path, layout: DocLayout) -> None:
    keys = _key_frame([c.shape[0] for c in layout.coords])
    coords = np.vstack(layout.coords)
    keys["row"], keys["col"] = coords[:, 0], coords[:, 1]
    keys.to_csv(_prepare(path), index=False)
    logger.info(f"Wrote layout of {len(layout.coords)} documents to {path}")


def read_layout(path, shape: Optional[Tuple[int, int]] = None) -> DocLayout:
    """Layout from CSV; without ``shape`` the image size is the bounding box of all pixels."""
    frame = _read_table(path, KEY_COLUMNS + ["row", "col"])
    coords = [block[["row", "col"]].to_numpy(dtype=np.int64) for block in _split_docs(frame, path)]
    if shape is None:
        stacked = np.vstack(coords)
        shape = (int(stacked[:, 0].max()) + 1, int(stacked[:, 1].max()) + 1)
    return DocLayout(coords, shape[0], shape[1], {"source": str(path)})


# ----------------------------------------------------------------------
# Sampler trace and MAP state
# ----------------------------------------------------------------------

def write_trace(path, trace: Trace) -> None:
    frame = pd.DataFrame({"sweep": np.arange(1, len(trace.log_joint_series) + 1),
                          "log_joint": trace.log_joint_series})
    for block in BLOCKS:
        frame[f"acc_{block}"] = trace.acceptance_rates[block]
    frame.to_csv(_prepare(path), index=False)
    logger.info(f"Wrote {len(frame)} sweeps of trace to {path}")


def read_trace(path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, float_precision="round_trip")
    except (OSError, ValueError) as e:
        raise InputError(f"cannot read trace {path}: {e}")


def _fmt(values) -> str:
    return ",".join(repr(float(v)) for v in np.ravel(values))


def write_state(path, state: ModelState, sigma_bound: Optional[float] = None) -> None:
    """Flat key=value file: K, dim, sigma2, mu_k, pi_d, s_d and the log joint.

    ``sigma_bound`` is the upper end of the sigma2 proposal range the chain ran with.
    """
    lines = [f"K={state.topics.K}", f"dim={state.topics.dim}", f"D={len(state.docs)}",
             f"log_joint={float(state.log_joint)!r}", f"sigma2={state.topics.sigma2!r}"]
    if sigma_bound is not None:
        lines.append(f"sigma_bound={float(sigma_bound)!r}")
    lines += [f"mu_{k}={_fmt(mean)}" for k, mean in enumerate(state.topics.means)]
    for d, ds in enumerate(state.docs):
        lines += [f"pi_{d}={_fmt(ds.pi)}", f"s_{d}={float(ds.s)!r}"]
    _prepare(path).write_text("\n".join(lines) + "\n")
    logger.info(f"Wrote state file {path}")


def _floats(values: Dict[str, Optional[str]], key: str, path) -> np.ndarray:
    raw = values.get(key)
    if raw is None:
        raise InputError(f"{path} is missing key {key}")
    try:
        return np.array([float(v) for v in raw.split(",")])
    except ValueError:
        raise InputError(f"{path}: {key} is not a list of numbers")


def read_state(path, memberships: Optional[List[np.ndarray]] = None) -> ModelState:
    """State file back into a ModelState; memberships come from the per-word CSV when given."""
    if not Path(path).is_file():
        raise InputError(f"file not found: {path}")
    values = dotenv_values(path)
    K, D = int(_floats(values, "K", path)[0]), int(_floats(values, "D", path)[0])
    means = np.vstack([_floats(values, f"mu_{k}", path) for k in range(K)])
    topics = TopicParams(means, float(_floats(values, "sigma2", path)[0]))
    if memberships is not None and len(memberships) != D:
        raise InputError(f"state has {D} documents, memberships have {len(memberships)}")
    docs = []
    for d in range(D):
        Z = memberships[d] if memberships is not None else np.empty((0, K))
        docs.append(DocState(_floats(values, f"pi_{d}", path), float(_floats(values, f"s_{d}", path)[0]), Z))
    return ModelState(docs, topics, float(_floats(values, "log_joint", path)[0]))


# ----------------------------------------------------------------------
# Maps and ROC
# ----------------------------------------------------------------------

def write_matrix(path, matrix: np.ndarray) -> None:
    pd.DataFrame(np.asarray(matrix)).to_csv(_prepare(path), index=False, header=False)


def read_matrix(path) -> np.ndarray:
    try:
        return pd.read_csv(path, header=None, float_precision="round_trip").to_numpy(dtype=np.float64)
    except FileNotFoundError:
        raise InputError(f"file not found: {path}")
    except (OSError, ValueError) as e:
        raise InputError(f"cannot read matrix {path}: {e}")


def write_roc(path, fpr: np.ndarray, tpr: np.ndarray, thresholds: np.ndarray) -> None:
    pd.DataFrame({"threshold": thresholds, "fpr": fpr, "tpr": tpr}).to_csv(_prepare(path), index=False)
    logger.info(f"Wrote ROC curve with {len(fpr)} points to {path}")
