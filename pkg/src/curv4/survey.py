"""Pointwise curvature tables over sample sets of a chart."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import duality
from .biorthogonal import minimize_over_planes
from .duality import CurvatureBlocks
from .errors import Curv4Error
from .geometry import curvature_field, div_weyl_norms, fd_margin_mask
from .metric import MetricField

OK = "ok"


def thread_count():
    """Worker cap from CURV4_THREADS (default 1, i.e. serial)."""
    try:
        return max(1, int(os.environ.get("CURV4_THREADS", "1")))
    except ValueError:
        return 1


def ordered_map(fn, items):
    """``list(map(fn, items))``, optionally threaded; result order is input order."""
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class Survey:
    """Per-point curvature data; invalid rows hold NaN and a status string."""

    X: np.ndarray
    status: tuple
    s: np.ndarray
    k1perp: np.ndarray
    ric_min: np.ndarray
    ric_max: np.ndarray
    wplus: np.ndarray
    wminus: np.ndarray
    wplus_norm: np.ndarray
    wminus_norm: np.ndarray
    det_plus: np.ndarray
    det_minus: np.ndarray
    einstein_residual: np.ndarray
    div_norm: np.ndarray
    div_error: np.ndarray
    sectional_min: Optional[np.ndarray] = None

    @property
    def valid(self):
        return np.array([st == OK for st in self.status], dtype=bool)

    def __len__(self):
        return len(self.X)


def _curvature_rows(m, X):
    """Curvature field on the rows of X that evaluate cleanly, with per-row status."""
    status = [OK] * len(X)
    spd = m.spd_mask(X) if len(X) else np.zeros(0, bool)
    for k in np.flatnonzero(~spd):
        status[k] = "non-spd"
    idx = np.flatnonzero(spd)
    try:
        return curvature_field(m, X[idx]), idx, status
    except Curv4Error:
        pass
    good = []
    for k in idx:
        try:
            curvature_field(m, X[k : k + 1])
            good.append(k)
        except Curv4Error as exc:
            status[k] = type(exc).__name__
    idx = np.array(good, dtype=int)
    return (curvature_field(m, X[idx]) if len(idx) else None), idx, status


def survey(m: MetricField, X, divergence=True, sectional=False, grid=16) -> Survey:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    N = len(X)
    cf, idx, status = _curvature_rows(m, X)

    def blank(*shape):
        return np.full((N,) + shape, np.nan)

    s, k1, rmin, rmax = blank(), blank(), blank(), blank()
    wp, wm, dp, dm, ein = blank(3), blank(3), blank(), blank(), blank()
    div, div_err = blank(), blank()
    sec = blank() if sectional else None
    if cf is not None and len(idx):
        op = duality.curvature_operator(cf.R)
        Ap, Am, Bb = duality.blocks_from_operator(op, cf.s)
        Ap = 0.5 * (Ap + np.swapaxes(Ap, -1, -2))
        Am = 0.5 * (Am + np.swapaxes(Am, -1, -2))
        shift = (cf.s / 12.0)[:, None, None] * np.eye(3)
        wp[idx] = duality.eig_sym3(Ap - shift)
        wm[idx] = duality.eig_sym3(Am - shift)
        s[idx] = cf.s
        k1[idx] = 0.5 * (wp[idx, 0] + wm[idx, 0]) + cf.s / 12.0
        ric = np.linalg.eigvalsh(cf.Ric)
        rmin[idx], rmax[idx] = ric[:, 0], ric[:, -1]
        dp[idx] = np.prod(wp[idx], axis=-1)
        dm[idx] = np.prod(wm[idx], axis=-1)
        ein[idx] = np.linalg.norm(cf.B, axis=(-1, -2))
        if divergence:
            inner = idx[fd_margin_mask(m, X[idx])]
            if len(inner):
                try:
                    div[inner], _, _, div_err[inner] = div_weyl_norms(m, X[inner])
                except Curv4Error:
                    pass
        if sectional:
            blocks = [CurvatureBlocks(Ap[k], Am[k], Bb[k], float(cf.s[k])) for k in range(len(idx))]
            sec[idx] = ordered_map(lambda cb: minimize_over_planes(cb, grid, include_b=True)[0], blocks)
    return Survey(
        X=X,
        status=tuple(status),
        s=s,
        k1perp=k1,
        ric_min=rmin,
        ric_max=rmax,
        wplus=wp,
        wminus=wm,
        wplus_norm=np.sqrt(np.sum(wp**2, axis=-1)),
        wminus_norm=np.sqrt(np.sum(wm**2, axis=-1)),
        det_plus=dp,
        det_minus=dm,
        einstein_residual=ein,
        div_norm=div,
        div_error=div_err,
        sectional_min=sec,
    )
