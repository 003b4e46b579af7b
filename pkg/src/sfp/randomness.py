"""Deterministic keyed randomness for weights, edge uniforms and experiments.

Every random quantity in the package is a pure function of
(seed, domain tag, object identity): vertex weights are keyed by the
vertex coordinates, edge uniforms by the canonically ordered endpoint
pair, and Monte-Carlo replicate draws by (replicate index, slot).  There
are no sequential streams, so results are independent of evaluation
order and of the number of workers, and the SFP/LRP coupling (both
models reading the same per-edge uniform) is exact by construction.

The generator is a counter-mode avalanche hash: the 64-bit key words are
absorbed one by one through the splitmix64 finalizer, and the final word
w is mapped to the open unit interval via (w + 1) / 2^64, clamped one
ulp below 1.0 so that draws are strictly inside (0, 1).  Not
cryptographic; statistically validated by the test suite (KS uniformity,
Pareto tail law).
"""

from __future__ import annotations

import numpy as np

# Domain separation tags.
TAG_WEIGHT = 0x5746_5457_4549_4748
TAG_EDGE = 0x4547_4445_4544_4745
TAG_EXPERIMENT = 0x4558_5045_5249_4D54

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31 = np.uint64(30), np.uint64(27), np.uint64(31)
_ONE_MINUS_ULP = 1.0 - 2.0 ** -53


class SelfLoop(ValueError):
    """Edge uniforms are only defined for distinct endpoints."""


def _mix64(z):
    """splitmix64 finalizer, elementwise on uint64 scalars or arrays."""
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def stream_key(seed: int, tag: int) -> np.uint64:
    """Initial hash state for a (seed, domain) stream."""
    with np.errstate(over="ignore"):
        return _mix64(np.uint64(seed & 0xFFFF_FFFF_FFFF_FFFF) ^ (np.uint64(tag) * _GOLDEN))


def keyed_words(seed: int, tag: int, *columns) -> np.ndarray:
    """Hash words for keys built from parallel integer columns.

    Each column is broadcast to a common shape and absorbed in order;
    distinct column tuples give statistically independent words.  Signed
    integers are reinterpreted as two's-complement uint64, so negative
    lattice coordinates are fine.
    """
    h = stream_key(seed, tag)
    with np.errstate(over="ignore"):
        for col in columns:
            c = np.asarray(col)
            if c.dtype != np.uint64:
                c = c.astype(np.int64).astype(np.uint64)
            h = _mix64(h ^ c)
    return h


def unit_from_word(word) -> np.ndarray:
    """Map hash words to (0, 1) via (w + 1) / 2^64.

    The addition is done in float so the top word cannot wrap to zero;
    results that would round to 1.0 are clamped one ulp below it, keeping
    the output strictly inside the open interval.
    """
    u = (np.asarray(word, dtype=np.uint64).astype(np.float64) + 1.0) * 2.0 ** -64
    return np.minimum(u, _ONE_MINUS_ULP)


def keyed_uniforms(seed: int, tag: int, *columns) -> np.ndarray:
    return unit_from_word(keyed_words(seed, tag, *columns))


def pareto_from_uniform(u, tau: float):
    """Invert the weight tail law: W = U^(-1/(tau-1)), so P(W >= w) = w^-(tau-1).

    Uses U directly (not 1 - U); fixed once and for all for
    reproducibility.
    """
    if not tau > 1:
        from .params import TauTooSmall
        raise TauTooSmall(tau)
    return np.asarray(u, dtype=np.float64) ** (-1.0 / (tau - 1.0))


# ---------------------------------------------------------------------------
# Vertex weights
# ---------------------------------------------------------------------------

def vertex_weights(seed: int, coords: np.ndarray, tau: float) -> np.ndarray:
    """Keyed Pareto weights for an (n, d) array of lattice coordinates."""
    coords = np.atleast_2d(np.asarray(coords, dtype=np.int64))
    cols = [coords[:, j] for j in range(coords.shape[1])]
    return pareto_from_uniform(keyed_uniforms(seed, TAG_WEIGHT, *cols), tau)


def weight_for_vertex(seed: int, x, tau: float) -> float:
    """Weight of a single vertex (x is a coordinate tuple or scalar for d = 1)."""
    coords = np.asarray(x, dtype=np.int64).reshape(1, -1)
    return float(vertex_weights(seed, coords, tau)[0])


# ---------------------------------------------------------------------------
# Edge uniforms
# ---------------------------------------------------------------------------

def edge_uniforms(seed: int, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Uniforms for edges given as (n, d) coordinate arrays, one per row.

    Caller must supply canonically ordered endpoints (xs < ys
    lexicographically row by row); the generation loops guarantee this by
    construction.  Use `uniform_for_edge` for the order-agnostic scalar
    form.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=np.int64))
    ys = np.atleast_2d(np.asarray(ys, dtype=np.int64))
    cols = [xs[:, j] for j in range(xs.shape[1])] + [ys[:, j] for j in range(ys.shape[1])]
    return keyed_uniforms(seed, TAG_EDGE, *cols)


def uniform_for_edge(seed: int, x, y) -> float:
    """The shared uniform of the unordered edge {x, y}, in (0, 1).

    Symmetric in x and y: endpoints are sorted lexicographically by
    coordinates before hashing, so uniform_for_edge(s, x, y) equals
    uniform_for_edge(s, y, x) bit for bit.
    """
    xa = tuple(np.asarray(x, dtype=np.int64).reshape(-1).tolist())
    ya = tuple(np.asarray(y, dtype=np.int64).reshape(-1).tolist())
    if xa == ya:
        raise SelfLoop(f"edge endpoints coincide: {xa}")
    lo, hi = (xa, ya) if xa < ya else (ya, xa)
    u = edge_uniforms(seed, np.array([lo], dtype=np.int64), np.array([hi], dtype=np.int64))
    return float(u[0])


# ---------------------------------------------------------------------------
# Experiment draws
# ---------------------------------------------------------------------------

def experiment_uniforms(seed: int, *index_columns) -> np.ndarray:
    """Keyed uniforms for Monte-Carlo work, keyed by replicate/slot indices."""
    return keyed_uniforms(seed, TAG_EXPERIMENT, *index_columns)


def derive_seed(seed: int, index: int) -> int:
    """A per-replicate sub-seed: keyed function of (master seed, index)."""
    return int(keyed_words(seed, TAG_EXPERIMENT, np.uint64(index)))
