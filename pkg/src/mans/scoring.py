"""Translation score over structural/visual embedding pairs.

The overall plausibility of a triple is the sum of four translation
scores: both same-modality pairs (structural-structural and
visual-visual) plus both cross-modality pairs. Splitting the sum into
those two halves is what drives adaptive sampling.
"""

from dataclasses import dataclass

import numpy as np

from .model import visual_embedding

L1 = "L1"
L2 = "L2"
NORMS = (L1, L2)


@dataclass(frozen=True)
class ScoreParts:
    ss: float
    vv: float
    sv: float
    vs: float

    @property
    def unimodal(self):
        return self.ss + self.vv

    @property
    def multimodal(self):
        return self.sv + self.vs

    @property
    def total(self):
        # Fixed summation order: (ss+vv)+(sv+vs), so the unimodal/multimodal
        # decomposition is exact, not approximate.
        return (self.ss + self.vv) + (self.sv + self.vs)


def f_transe(h, r, t, norm=L1):
    """Negated translation distance ``-|h + r - t|_p``; higher is better."""
    h = np.asarray(h, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if not h.shape == r.shape == t.shape:
        raise ValueError(f"shape mismatch: {h.shape}, {r.shape}, {t.shape}")
    u = h + r - t
    if norm == L1:
        return float(-np.sum(np.abs(u)))
    if norm == L2:
        return float(-np.sqrt(np.sum(u * u)))
    raise ValueError(f"unknown norm {norm!r}, expected one of {NORMS}")


def score_triple(params, table, head_view, rel, tail_view, norm=L1):
    """Four-part score of one triple under the given entity views."""
    h_s = params.E_s[head_view.struct_id].astype(np.float64)
    t_s = params.E_s[tail_view.struct_id].astype(np.float64)
    h_v = visual_embedding(params, table, head_view.vis_id)
    t_v = visual_embedding(params, table, tail_view.vis_id)
    r = params.R[rel].astype(np.float64)
    return ScoreParts(
        ss=f_transe(h_s, r, t_s, norm),
        vv=f_transe(h_v, r, t_v, norm),
        sv=f_transe(h_s, r, t_v, norm),
        vs=f_transe(h_v, r, t_s, norm),
    )


def needs_visual_ns(parts):
    """1 when the cross-modality half lags the same-modality half, else 0.

    The boundary (equal halves) belongs to the 0 branch.
    """
    return 1 if parts.multimodal < parts.unimodal else 0
