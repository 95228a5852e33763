"""Pure numpy implementation of the daily contact/transmission kernel.

This is both the fallback backend (used when the compiled extension is not
built) and the reference the compiled kernel is tested against.  Both
backends must produce bit-identical exposure sets; this falls out of the
content-keyed trial scheme (see ``wardsim.rng``): an infection trial for a
contact is keyed by (channel, lo, hi) regardless of which side drew the
contact, how many duplicate events exist, or the order anything runs in.

Covid states are encoded 0=S, 1=E, 2=I, 3=R (pinned by tests to the enums
in ``wardsim.epidemic``).
"""

from __future__ import annotations

import numpy as np

from .. import rng

_S = 0
_I = 2


def _expose_pairs(covid, lo, hi, p, h_trial, exposed):
    """Run infection trials for canonical pairs (lo, hi) and mark S endpoints."""
    if len(lo) == 0:
        return
    s_lo, s_hi = covid[lo], covid[hi]
    si = ((s_lo == _I) & (s_hi == _S)) | ((s_lo == _S) & (s_hi == _I))
    if not si.any():
        return
    eu, ev = lo[si], hi[si]
    hit = rng.uniforms2(h_trial, eu, ev) < p
    target = np.where(covid[eu] == _S, eu, ev)
    exposed[target[hit]] = True


def _random_partners(initiators, k, base, size, group_data, h_draw):
    """Partners for k keyed draws per initiator; returns (rep, partner)."""
    if len(initiators) == 0 or k == 0:
        e = np.empty(0, dtype=np.int64)
        return e, e
    rep = np.repeat(initiators, k)
    slot = np.tile(np.arange(k, dtype=np.int64), len(initiators))
    u = rng.uniforms2(h_draw, rep, slot)
    size_rep = np.repeat(size, k)
    idx = np.minimum((u * size_rep).astype(np.int64), size_rep - 1)
    partner = group_data[np.repeat(base, k) + idx].astype(np.int64)
    return rep.astype(np.int64), partner


def _nr_candidates(active, home, nbhd_indptr, nbhd_agents, k_nr, h_draw):
    initiators = np.nonzero(active)[0]
    base = nbhd_indptr[home[initiators]]
    size = nbhd_indptr[home[initiators] + 1] - base
    ok = size > 0
    rep, partner = _random_partners(
        initiators[ok], k_nr, base[ok], size[ok], nbhd_agents, h_draw
    )
    keep = (partner != rep) & active[partner]
    return rep[keep], partner[keep]


def _wr_candidates(active, visit_slot, slot_indptr, slot_agents, k_wr, h_draw):
    initiators = np.nonzero(active & (visit_slot >= 0))[0]
    base = slot_indptr[visit_slot[initiators]]
    size = slot_indptr[visit_slot[initiators] + 1] - base
    rep, partner = _random_partners(initiators, k_wr, base, size, slot_agents, h_draw)
    keep = (partner != rep) & active[partner]
    return rep[keep], partner[keep]


def day_new_exposures(
    covid: np.ndarray,
    active: np.ndarray,
    home: np.ndarray,
    visit_slot: np.ndarray,
    nbhd_indptr: np.ndarray,
    nbhd_agents: np.ndarray,
    slot_indptr: np.ndarray,
    slot_agents: np.ndarray,
    nf_u: np.ndarray,
    nf_v: np.ndarray,
    wf_u: np.ndarray,
    wf_v: np.ndarray,
    k_nr: int,
    k_wr: int,
    p: float,
    h_draw_nr: int,
    h_draw_wr: int,
    h_trial_nr: int,
    h_trial_nf: int,
    h_trial_wr: int,
    h_trial_wf: int,
) -> np.ndarray:
    """One day of contact generation + transmission, without materialising events.

    Returns a bool[n] mask of newly exposed agents (all COVID-S).  ``active``
    marks agents free to interact today; events touching an inactive agent
    never happen.
    """
    exposed = np.zeros(len(covid), dtype=bool)
    if not active.any() or p <= 0.0:
        return exposed

    for u, v, h_trial in ((nf_u, nf_v, h_trial_nf), (wf_u, wf_v, h_trial_wf)):
        if len(u):
            keep = active[u] & active[v]
            _expose_pairs(covid, u[keep].astype(np.int64), v[keep].astype(np.int64),
                          p, h_trial, exposed)

    a, b = _nr_candidates(active, home, nbhd_indptr, nbhd_agents, k_nr, h_draw_nr)
    _expose_pairs(covid, np.minimum(a, b), np.maximum(a, b), p, h_trial_nr, exposed)

    a, b = _wr_candidates(
        active, visit_slot, slot_indptr, slot_agents, k_wr, h_draw_wr
    )
    _expose_pairs(covid, np.minimum(a, b), np.maximum(a, b), p, h_trial_wr, exposed)
    return exposed


def contact_event_arrays(
    n: int,
    active: np.ndarray,
    home: np.ndarray,
    visit_slot: np.ndarray,
    nbhd_indptr: np.ndarray,
    nbhd_agents: np.ndarray,
    slot_indptr: np.ndarray,
    slot_agents: np.ndarray,
    nf_u: np.ndarray,
    nf_v: np.ndarray,
    wf_u: np.ndarray,
    wf_v: np.ndarray,
    k_nr: int,
    k_wr: int,
    h_draw_nr: int,
    h_draw_wr: int,
) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Materialise the day's contact events per channel.

    Pairs are unordered, deduplicated within each channel, canonicalised to
    (lo, hi) and sorted.  Same draw keys as ``day_new_exposures``, so the two
    views describe the same day.
    """

    def dedup(a: np.ndarray, b: np.ndarray):
        if len(a) == 0:
            e = np.empty(0, dtype=np.int64)
            return e, e
        lo = np.minimum(a, b).astype(np.int64)
        hi = np.maximum(a, b).astype(np.int64)
        packed = np.unique(lo * n + hi)
        return packed // n, packed % n

    out: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    keep = active[nf_u] & active[nf_v] if len(nf_u) else np.empty(0, dtype=bool)
    out["neighborhood-fixed"] = dedup(nf_u[keep], nf_v[keep]) if len(nf_u) else dedup(nf_u, nf_v)
    keep = active[wf_u] & active[wf_v] if len(wf_u) else np.empty(0, dtype=bool)
    out["workplace-fixed"] = dedup(wf_u[keep], wf_v[keep]) if len(wf_u) else dedup(wf_u, wf_v)

    a, b = _nr_candidates(active, home, nbhd_indptr, nbhd_agents, k_nr, h_draw_nr)
    out["neighborhood-random"] = dedup(a, b)
    a, b = _wr_candidates(active, visit_slot, slot_indptr, slot_agents, k_wr, h_draw_wr)
    out["workplace-random"] = dedup(a, b)
    return out


def exposures_from_events(
    covid: np.ndarray,
    events: dict[str, tuple[np.ndarray, np.ndarray]],
    p: float,
    trial_prefixes: dict[str, int],
) -> np.ndarray:
    """Infection trials over materialised events; oracle for the fused path."""
    exposed = np.zeros(len(covid), dtype=bool)
    if p <= 0.0:
        return exposed
    for channel, (lo, hi) in events.items():
        _expose_pairs(covid, np.asarray(lo, dtype=np.int64), np.asarray(hi, dtype=np.int64),
                      p, trial_prefixes[channel], exposed)
    return exposed
