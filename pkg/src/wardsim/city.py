"""Synthetic city construction: localities, mobility, and the agent roster.

A city is a set of weighted localities with a geographic adjacency relation
(every locality touches itself) and a row-stochastic origin-destination
matrix whose columns are a small set of frequently visited localities plus a
final "stays local" column.  A roster distributes agents over localities in
proportion to the weights and wires up, per agent, a daily visit place and
two fixed contact circles (neighbourhood and visit place).

Fixed contacts are sampled once per agent and then symmetrised by union: if
sampling makes j a contact of i, i is also a contact of j, so the stored
lists can exceed the nominal sizes.  The roster keeps both the own-sampled
lists (which generate contact events) and the closed symmetric lists (which
tracing and quarantine consume).

External ids from the city file are preserved for I/O; everything internal
runs on dense indexes 0..L-1.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import rng
from .rng import Key

log = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-6


class CityError(ValueError):
    """Raised for malformed city files or impossible city parameters."""


@dataclass
class CityModel:
    """Localities with weights, self-closed symmetric adjacency, and mobility.

    od has shape (L, D+1); row i is the probability vector over the D visited
    destinations plus the final stays-local column.  destinations hold
    internal locality indexes.
    """

    locality_ids: np.ndarray          # int64[L], external ids, file order
    weights: np.ndarray               # float64[L]
    adjacency: list[np.ndarray]       # per locality: sorted indexes, self included
    destinations: np.ndarray          # int32[D], unique internal indexes
    od: np.ndarray                    # float64[L, D+1]
    _digest: str | None = field(default=None, repr=False, compare=False)

    @property
    def n_localities(self) -> int:
        return len(self.locality_ids)

    @property
    def n_destinations(self) -> int:
        return len(self.destinations)

    def index_of(self, external_id: int) -> int:
        idx = np.nonzero(self.locality_ids == external_id)[0]
        if len(idx) == 0:
            raise CityError(f"unknown locality id {external_id}")
        return int(idx[0])

    def fingerprint(self) -> str:
        """Content digest used for caching derived structures."""
        if self._digest is None:
            h = hashlib.sha256()
            h.update(self.locality_ids.tobytes())
            h.update(self.weights.tobytes())
            for adj in self.adjacency:
                h.update(adj.tobytes())
            h.update(self.destinations.tobytes())
            h.update(self.od.tobytes())
            self._digest = h.hexdigest()
        return self._digest

    def validate(self) -> None:
        L = self.n_localities
        if L == 0:
            raise CityError("city has no localities")
        if len(np.unique(self.locality_ids)) != L:
            raise CityError("duplicate locality ids")
        if np.any(self.weights < 0) or self.weights.sum() <= 0:
            raise CityError("population weights must be nonnegative with positive sum")
        for i, adj in enumerate(self.adjacency):
            if i not in adj:
                raise CityError(f"locality {i} missing from its own adjacency")
            for j in adj:
                if i not in self.adjacency[j]:
                    raise CityError("adjacency is not symmetric")
        if len(np.unique(self.destinations)) != len(self.destinations):
            raise CityError("destinations must be distinct localities")
        if self.od.shape != (L, self.n_destinations + 1):
            raise CityError("od matrix shape mismatch")
        if np.any(self.od < 0) or np.any(self.od > 1):
            raise CityError("od entries must lie in [0, 1]")
        err = np.abs(self.od.sum(axis=1) - 1.0)
        if np.any(err > 1e-9):
            raise CityError("od rows must sum to 1")


def _normalise_od(od: np.ndarray) -> np.ndarray:
    """Renormalise rows within ROW_SUM_TOLERANCE of 1; reject anything worse."""
    sums = od.sum(axis=1)
    bad = np.abs(sums - 1.0) > ROW_SUM_TOLERANCE
    if np.any(bad):
        rows = np.nonzero(bad)[0][:5].tolist()
        raise CityError(f"row-sum violation in od matrix rows {rows}")
    return od / sums[:, None]


def load_city(path: str) -> CityModel:
    """Load and validate a city file (format documented in the README).

    Asymmetric adjacency is repaired by symmetric closure with a warning;
    OD rows are renormalised only when within 1e-6 of one.
    """
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise CityError(f"cannot parse city file {path}: {exc}") from exc

    try:
        localities = raw["localities"]
        destinations_ext = raw["destinations"]
        od_rows = raw["od_matrix"]
    except (KeyError, TypeError) as exc:
        raise CityError(f"city file {path} missing required key: {exc}") from exc
    if not localities:
        raise CityError("city file has no localities")

    ids = np.array([loc["id"] for loc in localities], dtype=np.int64)
    if len(np.unique(ids)) != len(ids):
        raise CityError("duplicate locality ids in city file")
    index = {int(i): k for k, i in enumerate(ids)}
    weights = np.array([float(loc["population"]) for loc in localities])

    adj_sets: list[set[int]] = [set() for _ in ids]
    for k, loc in enumerate(localities):
        adj_sets[k].add(k)
        for other in loc.get("adjacent", []):
            if other not in index:
                raise CityError(f"locality {loc['id']} adjacent to unknown id {other}")
            adj_sets[k].add(index[other])
    asymmetric = False
    for k, s in enumerate(adj_sets):
        for j in list(s):
            if k not in adj_sets[j]:
                adj_sets[j].add(k)
                asymmetric = True
    if asymmetric:
        log.warning("city file %s: adjacency was asymmetric, repaired by closure", path)
    adjacency = [np.array(sorted(s), dtype=np.int32) for s in adj_sets]

    try:
        destinations = np.array([index[int(d)] for d in destinations_ext], dtype=np.int32)
    except KeyError as exc:
        raise CityError(f"destination references unknown locality {exc}") from exc

    od = np.asarray(od_rows, dtype=np.float64)
    if od.ndim != 2 or od.shape != (len(ids), len(destinations) + 1):
        raise CityError(
            f"od matrix must be {len(ids)}x{len(destinations) + 1}, got {od.shape}"
        )
    if np.any(od < 0) or np.any(od > 1):
        raise CityError("od entries must lie in [0, 1]")
    od = _normalise_od(od)

    city = CityModel(ids, weights, adjacency, destinations, od)
    city.validate()
    return city


def save_city(city: CityModel, path: str) -> None:
    """Write a city in the canonical file format (deterministic bytes)."""
    doc = {
        "localities": [
            {
                "id": int(city.locality_ids[k]),
                "population": float(city.weights[k]),
                "adjacent": [
                    int(city.locality_ids[j]) for j in city.adjacency[k] if j != k
                ],
            }
            for k in range(city.n_localities)
        ],
        "destinations": [int(city.locality_ids[d]) for d in city.destinations],
        "od_matrix": [[float(x) for x in row] for row in city.od],
    }
    with open(path, "w", encoding="utf-8", newline="") as f:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write("\n")


def generate_grid_city(
    rows: int,
    cols: int,
    weight_fn: str = "uniform",
    seed: int = 0,
    n_destinations: int | None = None,
    no_visit_prob: float = 0.4,
    gravity_scale: float | None = None,
    id_base: int = 0,
) -> CityModel:
    """Build a rows x cols grid city (4-neighbourhood adjacency plus self).

    weight_fn "uniform" gives equal locality weights, "random" a heavy-tailed
    deterministic draw from ``seed``.  Destinations are the n_destinations
    highest-weight localities; each OD row spreads 1 - no_visit_prob over
    them proportionally to weight, optionally decayed with Manhattan distance
    (exp(-d / gravity_scale)).
    """
    if rows < 1 or cols < 1:
        raise CityError("grid dimensions must be >= 1")
    if not 0.0 <= no_visit_prob <= 1.0:
        raise CityError("no_visit_prob must lie in [0, 1]")
    L = rows * cols
    key = Key.from_seed(seed)

    if weight_fn == "uniform":
        weights = np.ones(L)
    elif weight_fn == "random":
        # lognormal via Box-Muller on two keyed uniforms
        u1 = rng.uniforms(key.child(rng.CITY_WEIGHTS, 1).state, np.arange(L))
        u2 = rng.uniforms(key.child(rng.CITY_WEIGHTS, 2).state, np.arange(L))
        z = np.sqrt(-2.0 * np.log(1.0 - u1)) * np.cos(2.0 * np.pi * u2)
        weights = np.exp(0.75 * z)
    else:
        raise CityError(f"unknown weight_fn {weight_fn!r}")

    adjacency = []
    for r in range(rows):
        for c in range(cols):
            cell = [(r, c), (r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
            adj = [
                rr * cols + cc for rr, cc in cell if 0 <= rr < rows and 0 <= cc < cols
            ]
            adjacency.append(np.array(sorted(adj), dtype=np.int32))

    if n_destinations is None:
        n_destinations = min(20, L)
    n_destinations = min(n_destinations, L)
    order = np.lexsort((np.arange(L), -weights))  # weight desc, index asc on ties
    destinations = np.sort(order[:n_destinations]).astype(np.int32)

    od = np.zeros((L, n_destinations + 1))
    dr, dc = destinations // cols, destinations % cols
    for i in range(L):
        attract = weights[destinations].astype(np.float64).copy()
        if gravity_scale is not None:
            dist = np.abs(dr - i // cols) + np.abs(dc - i % cols)
            attract *= np.exp(-dist / gravity_scale)
        total = attract.sum()
        if total > 0:
            od[i, :n_destinations] = (1.0 - no_visit_prob) * attract / total
            od[i, n_destinations] = no_visit_prob
        else:
            od[i, n_destinations] = 1.0

    ids = np.arange(id_base, id_base + L, dtype=np.int64)
    city = CityModel(ids, weights, adjacency, destinations, od)
    city.validate()
    return city


def default_ward_city(
    district_size: int = 3,
    port_weight: float = 0.25,
    weight_sigma: float = 0.4,
    no_visit_prob: float = 0.995,
    gravity_scale: float = 0.5,
    n_destinations: int = 20,
    seed: int = 11,
) -> CityModel:
    """The bundled 198-ward stand-in city (ids 1..198).

    A radial district city: wards come in districts of ``district_size``
    mutually touching wards, and districts form a binary tree (centre
    district 0, each district touching two outer ones) joined through small
    connector wards (``port_weight`` of a normal ward).  Commuting is a thin
    layer: the ``n_destinations`` highest-weight central wards are the
    destinations, each ward sends 1 - no_visit_prob there, decayed in tree
    distance so commuters stay near their own branch.  Deterministic;
    ``configs/cities/ward198.json`` is this model saved to disk.

    The structure makes a clustered outbreak a district-to-district cascade
    with a multi-week ramp rather than a city-wide flash, which is what makes
    budgeted trend detection a meaningful problem at this population scale.
    """
    n_wards = 198
    if n_wards % district_size:
        raise CityError("district_size must divide 198")
    n_districts = n_wards // district_size
    key = Key.from_seed(seed)

    u1 = rng.uniforms(key.child(rng.CITY_WEIGHTS, 1).state, np.arange(n_wards))
    u2 = rng.uniforms(key.child(rng.CITY_WEIGHTS, 2).state, np.arange(n_wards))
    z = np.sqrt(-2.0 * np.log(1.0 - u1)) * np.cos(2.0 * np.pi * u2)
    weights = np.exp(weight_sigma * z)
    ports = np.arange(0, n_wards, district_size)  # first ward of each district
    weights[ports] *= port_weight

    adj: list[set[int]] = [{i} for i in range(n_wards)]
    for d in range(n_districts):
        block = range(d * district_size, (d + 1) * district_size)
        for a in block:
            adj[a].update(block)
    for child in range(1, n_districts):  # heap-shaped tree over districts
        parent = (child - 1) // 2
        a, b = parent * district_size, child * district_size
        adj[a].add(b)
        adj[b].add(a)
    adjacency = [np.array(sorted(s), dtype=np.int32) for s in adj]

    def ancestors(d: int) -> list[int]:
        path = [d]
        while d:
            d = (d - 1) // 2
            path.append(d)
        return path

    paths = [ancestors(d) for d in range(n_districts)]

    def tree_distance(a: int, b: int) -> int:
        depth = {node: i for i, node in enumerate(paths[a])}
        for i, node in enumerate(paths[b]):
            if node in depth:
                return depth[node] + i
        raise AssertionError("tree is connected")

    # hubs sit in the city centre: highest-weight wards of the inner districts
    depth = np.array([len(paths[d]) - 1 for d in range(n_districts)])
    inner = depth[np.arange(n_wards) // district_size] <= max(1, depth.max() - 2)
    rank = np.where(inner, weights, -np.inf)
    order = np.lexsort((np.arange(n_wards), -rank))
    destinations = np.sort(order[:n_destinations]).astype(np.int32)
    dest_district = destinations // district_size

    od = np.zeros((n_wards, n_destinations + 1))
    for i in range(n_wards):
        district = i // district_size
        decay = np.array(
            [np.exp(-tree_distance(district, int(d)) / gravity_scale) for d in dest_district]
        )
        attract = weights[destinations] * decay
        od[i, :n_destinations] = (1.0 - no_visit_prob) * attract / attract.sum()
        od[i, n_destinations] = no_visit_prob

    ids = np.arange(1, n_wards + 1, dtype=np.int64)
    city = CityModel(ids, weights, adjacency, destinations, od)
    city.validate()
    return city


# ---------------------------------------------------------------------------
# Roster
# ---------------------------------------------------------------------------


@dataclass
class Roster:
    """Immutable contact structure for n agents (epidemic state lives elsewhere).

    Agents are numbered 0..n-1 and blocked by home locality, so
    ``locality_indptr`` alone indexes residents.  CSR pairs (indptr, data)
    hold, per locality, the residents of its neighbourhood; per destination
    slot, its members; and per agent, the own-sampled and the union-closed
    fixed contact lists for both channels.  Fixed edges are the deduplicated
    unordered pairs (u < v) that generate daily fixed-contact events.
    """

    n: int
    home: np.ndarray                    # int32[n]
    visit_slot: np.ndarray              # int32[n], -1 = stays local
    locality_indptr: np.ndarray         # int64[L+1]
    nbhd_indptr: np.ndarray             # int64[L+1]
    nbhd_agents: np.ndarray             # int32
    slot_indptr: np.ndarray             # int64[D+1]
    slot_agents: np.ndarray             # int32
    nf_own_indptr: np.ndarray           # int64[n+1]
    nf_own: np.ndarray                  # int32
    wf_own_indptr: np.ndarray
    wf_own: np.ndarray
    nf_edge_u: np.ndarray               # int32[E_nf]
    nf_edge_v: np.ndarray
    wf_edge_u: np.ndarray
    wf_edge_v: np.ndarray
    nf_indptr: np.ndarray               # int64[n+1], closed lists
    nf_contacts: np.ndarray             # int32
    wf_indptr: np.ndarray
    wf_contacts: np.ndarray

    def residents(self, locality: int) -> np.ndarray:
        lo, hi = self.locality_indptr[locality], self.locality_indptr[locality + 1]
        return np.arange(lo, hi, dtype=np.int32)

    def neighborhood_of(self, locality: int) -> np.ndarray:
        lo, hi = self.nbhd_indptr[locality], self.nbhd_indptr[locality + 1]
        return self.nbhd_agents[lo:hi]

    def neighborhood_contacts(self, agent: int) -> np.ndarray:
        lo, hi = self.nf_indptr[agent], self.nf_indptr[agent + 1]
        return self.nf_contacts[lo:hi]

    def workplace_contacts(self, agent: int) -> np.ndarray:
        lo, hi = self.wf_indptr[agent], self.wf_indptr[agent + 1]
        return self.wf_contacts[lo:hi]

    def fixed_contacts(self, agent: int) -> np.ndarray:
        """Neighbourhood and workplace contacts, deduplicated."""
        return np.union1d(
            self.neighborhood_contacts(agent), self.workplace_contacts(agent)
        )

    def own_neighborhood_sample(self, agent: int) -> np.ndarray:
        lo, hi = self.nf_own_indptr[agent], self.nf_own_indptr[agent + 1]
        return self.nf_own[lo:hi]

    def own_workplace_sample(self, agent: int) -> np.ndarray:
        lo, hi = self.wf_own_indptr[agent], self.wf_own_indptr[agent + 1]
        return self.wf_own[lo:hi]


def apportion(weights: np.ndarray, n: int) -> np.ndarray:
    """Largest-remainder apportionment of n agents over weighted localities."""
    w = np.asarray(weights, dtype=np.float64)
    quota = n * w / w.sum()
    counts = np.floor(quota).astype(np.int64)
    short = n - counts.sum()
    if short > 0:
        # ties broken toward the lower locality index
        order = np.lexsort((np.arange(len(w)), -(quota - counts)))
        counts[order[:short]] += 1
    return counts


def _csr_from_pairs(u: np.ndarray, v: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric CSR adjacency from unordered edges (u, v)."""
    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    counts = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, dst.astype(np.int32)


def _dedup_edges(a: np.ndarray, b: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Canonical unique unordered pairs, sorted by (min, max)."""
    u = np.minimum(a, b).astype(np.int64)
    v = np.maximum(a, b).astype(np.int64)
    packed = np.unique(u * n + v)
    return (packed // n).astype(np.int32), (packed % n).astype(np.int32)


def _sample_contacts(
    pool_indptr: np.ndarray,
    pool_data: np.ndarray,
    pool_index: np.ndarray,
    agents: np.ndarray,
    k: int,
    key: Key,
    channel_name: str,
) -> tuple[np.ndarray, np.ndarray]:
    """For each agent, k distinct contacts (not itself) from its pool.

    pool_index maps an agent to its CSR row.  Pools with at most k other
    members contribute everyone but the agent (logged once per call).  Draw
    j for slot s of agent a uses key words (a, s, attempt), so results are
    order- and batching-independent.
    """
    counts = np.zeros(len(agents), dtype=np.int64)
    rows_small: dict[int, np.ndarray] = {}

    base = pool_indptr[pool_index].astype(np.int64)
    size = (pool_indptr[pool_index + 1] - pool_indptr[pool_index]).astype(np.int64)

    small = size <= k  # pool minus self cannot fill k slots
    if np.any(small & (size > 0)):
        log.warning(
            "%s: %d agents have pools smaller than %d+1; taking all available",
            channel_name,
            int(np.count_nonzero(small & (size > 0))),
            k,
        )
    for pos in np.nonzero(small)[0]:
        members = pool_data[base[pos] : base[pos] + size[pos]]
        members = members[members != agents[pos]]
        rows_small[pos] = members.astype(np.int32)
        counts[pos] = len(members)

    big = np.nonzero(~small)[0]
    picks = np.zeros((len(big), k), dtype=np.int32) if len(big) else None
    if len(big):
        counts[big] = k
        a = agents[big].astype(np.uint64)
        h_agent = rng.mix64_array(a ^ np.uint64(key.state))
        b = base[big]
        sz = size[big]
        for s in range(k):
            h_slot = rng.mix64_array(h_agent ^ np.uint64(s))
            pending = np.arange(len(big))
            attempt = np.zeros(len(big), dtype=np.uint64)
            while len(pending):
                h = rng.mix64_array(h_slot[pending] ^ attempt[pending])
                u = (h >> np.uint64(11)).astype(np.float64) * 2.0**-53
                idx = np.minimum((u * sz[pending]).astype(np.int64), sz[pending] - 1)
                cand = pool_data[b[pending] + idx]
                bad = cand == agents[big[pending]]
                for prev in range(s):
                    bad |= cand == picks[pending, prev]
                picks[pending, s] = cand
                attempt[pending] += np.uint64(1)
                pending = pending[bad]

    indptr = np.zeros(len(agents) + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    data = np.empty(int(indptr[-1]), dtype=np.int32)
    for pos, members in rows_small.items():
        data[indptr[pos] : indptr[pos + 1]] = members
    if len(big):
        flat = (indptr[big][:, None] + np.arange(k, dtype=np.int64)).ravel()
        data[flat] = picks.ravel()
    return indptr, data


def build_roster(city: CityModel, n: int, params, seed: int) -> Roster:
    """Distribute n agents over the city and wire up contacts.

    ``params`` supplies the nominal fixed-contact counts (k_nf, k_wf).
    Deterministic in (city, n, params, seed); see the module docstring for
    the symmetrisation rule.
    """
    if n < 1:
        raise ValueError("need at least one agent")
    key = Key.from_seed(seed).child(rng.ROSTER)
    L = city.n_localities
    D = city.n_destinations

    counts = apportion(city.weights, n)
    locality_indptr = np.zeros(L + 1, dtype=np.int64)
    np.cumsum(counts, out=locality_indptr[1:])
    home = np.repeat(np.arange(L, dtype=np.int32), counts)

    # neighbourhood residents: concatenated home blocks of adjacent localities
    nbhd_counts = np.array(
        [counts[adj].sum() for adj in city.adjacency], dtype=np.int64
    )
    nbhd_indptr = np.zeros(L + 1, dtype=np.int64)
    np.cumsum(nbhd_counts, out=nbhd_indptr[1:])
    nbhd_agents = np.empty(int(nbhd_indptr[-1]), dtype=np.int32)
    for loc, adj in enumerate(city.adjacency):
        out = nbhd_indptr[loc]
        for j in adj:  # adjacency sorted, home blocks ascending -> sorted row
            lo, hi = locality_indptr[j], locality_indptr[j + 1]
            nbhd_agents[out : out + (hi - lo)] = np.arange(lo, hi, dtype=np.int32)
            out += hi - lo

    # visit place: one OD draw per agent against its home row
    visit_slot = np.full(n, -1, dtype=np.int32)
    u = rng.uniforms(key.child(rng.VISIT_PLACE).state, np.arange(n))
    for loc in range(L):
        lo, hi = locality_indptr[loc], locality_indptr[loc + 1]
        if hi == lo:
            continue
        cum = np.cumsum(city.od[loc])
        slot = np.searchsorted(cum, u[lo:hi], side="right")
        slot = np.minimum(slot, D)
        block = np.where(slot == D, -1, slot).astype(np.int32)
        visit_slot[lo:hi] = block

    order = np.argsort(visit_slot, kind="stable")
    order = order[visit_slot[order] >= 0].astype(np.int32)
    slot_counts = np.bincount(visit_slot[visit_slot >= 0], minlength=D)
    slot_indptr = np.zeros(D + 1, dtype=np.int64)
    np.cumsum(slot_counts, out=slot_indptr[1:])
    slot_agents = order

    agents = np.arange(n, dtype=np.int32)
    nf_own_indptr, nf_own = _sample_contacts(
        nbhd_indptr,
        nbhd_agents,
        home,
        agents,
        int(params.neighborhood_fixed_contacts),
        key.child(rng.NBHD_CONTACTS),
        "neighbourhood contacts",
    )

    # workplace pool only for agents with a visit place
    has_visit = visit_slot >= 0
    wf_own_indptr = np.zeros(n + 1, dtype=np.int64)
    wf_own = np.empty(0, dtype=np.int32)
    if np.any(has_visit):
        visitors = agents[has_visit]
        sub_indptr, sub_data = _sample_contacts(
            slot_indptr,
            slot_agents,
            visit_slot[has_visit],
            visitors,
            int(params.workplace_fixed_contacts),
            key.child(rng.WORK_CONTACTS),
            "workplace contacts",
        )
        per_agent = np.zeros(n, dtype=np.int64)
        per_agent[visitors] = np.diff(sub_indptr)
        np.cumsum(per_agent, out=wf_own_indptr[1:])
        # sub rows are in ascending-agent order, matching the target layout
        wf_own = sub_data

    nf_u = np.repeat(agents, np.diff(nf_own_indptr))
    nf_edge_u, nf_edge_v = _dedup_edges(nf_u, nf_own, n)
    wf_u = np.repeat(agents, np.diff(wf_own_indptr))
    wf_edge_u, wf_edge_v = _dedup_edges(wf_u, wf_own, n)

    nf_indptr, nf_contacts = _csr_from_pairs(nf_edge_u, nf_edge_v, n)
    wf_indptr, wf_contacts = _csr_from_pairs(wf_edge_u, wf_edge_v, n)

    return Roster(
        n=n,
        home=home,
        visit_slot=visit_slot,
        locality_indptr=locality_indptr,
        nbhd_indptr=nbhd_indptr,
        nbhd_agents=nbhd_agents,
        slot_indptr=slot_indptr,
        slot_agents=slot_agents,
        nf_own_indptr=nf_own_indptr,
        nf_own=nf_own,
        wf_own_indptr=wf_own_indptr,
        wf_own=wf_own,
        nf_edge_u=nf_edge_u,
        nf_edge_v=nf_edge_v,
        wf_edge_u=wf_edge_u,
        wf_edge_v=wf_edge_v,
        nf_indptr=nf_indptr,
        nf_contacts=nf_contacts,
        wf_indptr=wf_indptr,
        wf_contacts=wf_contacts,
    )


def neighborhood_residents(roster: Roster, city: CityModel, locality: int) -> np.ndarray:
    """Agents living in the neighbourhood of ``locality`` (an external id)."""
    return roster.neighborhood_of(city.index_of(locality))
