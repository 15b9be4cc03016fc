"""Reproducible random streams and the two primitive distributions.

One logical stream per Monte Carlo sample index: stream ``i`` of a run
with seed ``s`` is addressed by key ``(s, i)``. Within a stream,
substreams keep different kinds of draws from colliding:

===========  ====================================================
tag 0        plain uniforms on [0, 1)
tag 1        the uniform pairs feeding Gaussian deviates
tag 2        retry pool for the sphere-draw underflow guard
===========  ====================================================

Gaussian scheme (fixed; frozen by known-answer tests)
-----------------------------------------------------
Deviates come from Box-Muller on counter-addressed pairs: pair ``p``
reads words ``2p`` and ``2p+1`` of substream 1 and produces

    g[2p]   = sqrt(-2 ln u1) * cos(2 pi u2)
    g[2p+1] = sqrt(-2 ln u1) * sin(2 pi u2)

with ``u1 = ((w >> 11) + 1) * 2^-53`` in (0, 1] (so the log never sees
zero) and ``u2 = (w >> 11) * 2^-53`` in [0, 1). Box-Muller is
rejection-free, so Gaussian index ``k`` is a pure function of the
counter — any slice of the deviate sequence can be generated without
buffering, which keeps batched kernels bit-identical to scalar ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import philox

TAG_UNIFORM = 0
TAG_GAUSS = 1
TAG_RETRY = 2

#: Sphere draws redraw the Gaussian vector when its norm falls below this.
NORM_FLOOR = 1e-150

_INV53 = 2.0 ** -53
_SH11 = np.uint64(11)
_TWO_PI = 2.0 * np.pi


def _u01(words: np.ndarray) -> np.ndarray:
    """Map uint64 words to [0, 1) with 53-bit resolution."""
    return (words >> _SH11).astype(np.float64) * _INV53


def _u01_positive(words: np.ndarray) -> np.ndarray:
    """Map uint64 words to (0, 1] — safe as a log argument."""
    return ((words >> _SH11) + np.uint64(1)).astype(np.float64) * _INV53


def uniform_values(seed: int, stream_ids, start: int, count: int) -> np.ndarray:
    """Uniform [0,1) values [start, start+count) for each stream."""
    return _u01(philox.raw_words(seed, stream_ids, TAG_UNIFORM, start, count))


def gaussian_values(seed: int, stream_ids, start: int, count: int,
                    substream: int = TAG_GAUSS) -> np.ndarray:
    """Standard normal deviates [start, start+count) for each stream.

    Random access: the result for any (start, count) window agrees
    bit-for-bit with the corresponding slice of a single long request.
    """
    p0 = start >> 1
    p1 = (start + count + 1) >> 1
    npairs = p1 - p0
    w = philox.raw_words(seed, stream_ids, substream, 2 * p0, 2 * npairs)
    scalar = w.ndim == 1
    w = np.atleast_2d(w)
    radius = np.sqrt(-2.0 * np.log(_u01_positive(w[:, 0::2])))
    angle = _TWO_PI * _u01(w[:, 1::2])
    g = np.empty_like(w, dtype=np.float64)
    g[:, 0::2] = radius * np.cos(angle)
    g[:, 1::2] = radius * np.sin(angle)
    off = start - 2 * p0
    g = g[:, off : off + count]
    return g[0] if scalar else g


@dataclass
class RngStream:
    """A deterministic random stream addressed by (seed, stream_id).

    Sequential draws advance private cursors; the underlying values are
    counter-addressed, so a stream's whole future is fixed by its key
    and how many values of each kind were consumed so far.
    """

    seed: int
    stream_id: int
    _ucur: int = field(default=0, repr=False)
    _gcur: int = field(default=0, repr=False)
    _rcur: int = field(default=0, repr=False)

    def uniforms(self, n: int) -> np.ndarray:
        out = uniform_values(self.seed, self.stream_id, self._ucur, n)
        self._ucur += n
        return out

    def gaussians(self, n: int) -> np.ndarray:
        out = gaussian_values(self.seed, self.stream_id, self._gcur, n)
        self._gcur += n
        return out

    def retry_gaussians(self, n: int) -> np.ndarray:
        out = gaussian_values(self.seed, self.stream_id, self._rcur, n,
                              substream=TAG_RETRY)
        self._rcur += n
        return out


def gaussian_vector(stream: RngStream, d: int) -> np.ndarray:
    """d independent standard normal deviates from the stream.

    Parameters
    ----------
    stream : RngStream
    d : int
        Dimension, at least 1.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return stream.gaussians(d)


def uniform_on_sphere(stream: RngStream, center, radius: float) -> np.ndarray:
    """A uniform point at exact distance ``radius`` from ``center``.

    Normalizes a Gaussian vector and rescales. If the Gaussian vector's
    norm is below NORM_FLOOR (probability ~0, but division must be
    safe), the vector is redrawn from the stream's retry substream. In
    one dimension this degenerates to center +/- radius with equal
    probability, which the generic normalization already delivers.
    """
    center = np.asarray(center, dtype=np.float64)
    if not np.isfinite(radius) or radius <= 0:
        raise ValueError(f"radius must be positive and finite, got {radius}")
    g = stream.gaussians(center.shape[0])
    norm = np.sqrt(g @ g)
    while norm < NORM_FLOOR:
        g = stream.retry_gaussians(center.shape[0])
        norm = np.sqrt(g @ g)
    return center + (radius / norm) * g


def unit_rows(g: np.ndarray, redraw) -> np.ndarray:
    """Normalize the rows of ``g`` to unit length, redrawing degenerate ones.

    ``redraw(rows)`` must return fresh Gaussian rows for the given row
    indices (the batch counterpart of the retry substream). In practice
    the loop body never runs; it exists so that division is provably
    safe, and tests force it with a stub.
    """
    norms = np.sqrt(np.einsum("ij,ij->i", g, g))
    while True:
        bad = np.flatnonzero(norms < NORM_FLOOR)
        if bad.size == 0:
            break
        g = g.copy() if g.base is not None else g
        g[bad] = redraw(bad)
        norms[bad] = np.sqrt(np.einsum("ij,ij->i", g[bad], g[bad]))
    return g / norms[:, None]


def sphere_rows(seed: int, stream_ids: np.ndarray, gauss_start: int, d: int,
                retry_state: dict | None = None) -> np.ndarray:
    """One unit-sphere direction per stream, lockstep across the batch.

    Each stream consumes Gaussian words [gauss_start, gauss_start + d)
    of its main Gaussian substream; underflow redraws (see NORM_FLOOR)
    come from the per-stream retry substream so the main cursor stays a
    pure function of the draw index. ``retry_state`` maps stream id ->
    retry words consumed so far; pass the same dict across rounds to
    keep per-stream retry cursors (it stays empty in practice).
    """
    g = gaussian_values(seed, stream_ids, gauss_start, d)
    state = retry_state if retry_state is not None else {}

    def redraw(rows):
        fresh = np.empty((rows.size, d))
        for k, i in enumerate(rows):
            sid = int(stream_ids[i])
            cur = state.get(sid, 0)
            fresh[k] = gaussian_values(seed, sid, cur, d, substream=TAG_RETRY)
            state[sid] = cur + d
        return fresh

    return unit_rows(g, redraw)


def unit_vectors(stream: RngStream, n: int, d: int) -> np.ndarray:
    """n unit-sphere directions drawn sequentially from one stream."""
    g = stream.gaussians(n * d).reshape(n, d)
    return unit_rows(g, lambda rows: stream.retry_gaussians(rows.size * d).reshape(-1, d))
