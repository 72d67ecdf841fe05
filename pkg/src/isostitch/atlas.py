"""Patch atlases: cover checking, seed selection, stitching, coverage.

A patch atlas is a finite family of balls with a map on each, standing in
for a map that is isometric near every point of a bounded region. Stitching
extends the seed patch's map globally, then grows the accepted territory
breadth-first over the overlap graph: a patch is accepted when its map
agrees with the global candidate on its sampled ball. The outcome is a
Certificate (global affine isometry plus per-patch residuals), a Refutation
(a pair of points whose distance the atlas map distorts), or Undetermined
with a reason.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._validation import check_positive, check_seed
from .errors import DomainViolation, StageFailure
from .extension import CERT_SLACK, extend_ball_isometry, interior_witness
from .maps import AffineMap, MapOracle
from .norms import Ball, NormDescriptor, sample_ball, within_radius


@dataclass
class Patch:
    """A ball with a map evaluable on it."""

    center: np.ndarray
    radius: float
    map: MapOracle

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        self.radius = check_positive(self.radius, "radius")

    @property
    def ball(self):
        return Ball(self.center, self.radius)


@dataclass
class PatchAtlas:
    patches: list[Patch]
    region: Ball

    def __post_init__(self):
        if not self.patches:
            raise ValueError("atlas needs at least one patch")

    def __len__(self):
        return len(self.patches)


@dataclass
class CoverGraph:
    """Undirected overlap graph on patch indices (no self-loops)."""

    n_nodes: int
    adjacency: dict[int, list[int]]

    def edges(self):
        return sorted((i, j) for i, nbrs in self.adjacency.items() for j in nbrs if i < j)


@dataclass
class Certificate:
    kind = "certificate"
    global_map: AffineMap
    per_patch_residuals: list[float]


@dataclass
class Refutation:
    kind = "refutation"
    witness: tuple
    defect: float


@dataclass
class Undetermined:
    kind = "undetermined"
    reason: str
    detail: str = ""


Verdict = Certificate | Refutation | Undetermined


def cover_check(atlas: PatchAtlas, N: NormDescriptor, eta, seed=0):
    """(ok, uncovered): does every sampled region point sit inside some open
    patch core with margin eta?"""
    eta = check_positive(eta, "eta")
    samples = sample_ball(N, atlas.region, eta).points
    covered = np.zeros(samples.shape[0], dtype=bool)
    for p in atlas.patches:
        covered |= N.value(samples - p.center) < p.radius - eta + 1e-12
        if covered.all():
            break
    return bool(covered.all()), samples[~covered]


def build_cover_graph(atlas: PatchAtlas, N: NormDescriptor, eta) -> CoverGraph:
    """Edge (i, j) iff the open cores overlap with interior margin >= 2*eta."""
    eta = check_positive(eta, "eta")
    n = len(atlas)
    adj = {i: [] for i in range(n)}
    for i in range(n):
        for j in range(i + 1, n):
            d = N.value(atlas.patches[i].center - atlas.patches[j].center)
            if d < atlas.patches[i].radius + atlas.patches[j].radius - 2.0 * eta:
                adj[i].append(j)
                adj[j].append(i)
    return CoverGraph(n_nodes=n, adjacency=adj)


def select_seed(atlas: PatchAtlas, N: NormDescriptor, eta) -> int:
    """Largest-radius patch (ties: lowest index) whose image verifiably has
    interior; tries the next candidate on verification failure."""
    order = sorted(range(len(atlas)), key=lambda i: (-atlas.patches[i].radius, i))
    failures = []
    for i in order:
        p = atlas.patches[i]
        try:
            interior_witness(p.map, p.ball, N, eta)
            return i
        except StageFailure as exc:
            failures.append(f"patch {i}: {exc.detail}")
    raise StageFailure("seed-selection", "no patch passed the interior check; " + "; ".join(failures))


def _owner_indices(points, patch_ids, atlas, N):
    """For each point: owning patch = containing patch with the nearest
    center among patch_ids (ties: lowest index); -1 if none contains it."""
    n = points.shape[0]
    best = np.full(n, -1, dtype=int)
    best_d = np.full(n, np.inf)
    for i in sorted(patch_ids):
        p = atlas.patches[i]
        d = N.value(points - p.center)
        inside = d <= p.radius + 1e-12
        take = inside & (d < best_d - 1e-15)
        best[take] = i
        best_d[take] = d[take]
    return best


def _search_refutation(atlas, N, patch_idx, graph, accepted, eta, tau, seed):
    """Search the offending patch's ball (widened by its already-accepted
    neighbors' balls) for a pair whose distance the atlas map distorts by
    more than 10*tau, evaluating points by the atlas's own ownership rule."""
    all_ids = list(range(len(atlas)))
    pts = [sample_ball(N, atlas.patches[patch_idx].ball, eta).points]
    for i in accepted:
        if i in graph.adjacency[patch_idx]:
            pts.append(sample_ball(N, atlas.patches[i].ball, eta).points)
    P = np.unique(np.vstack(pts), axis=0)
    owners = _owner_indices(P, all_ids, atlas, N)
    P = P[owners >= 0]
    owners = owners[owners >= 0]
    if P.shape[0] > 700:
        rng = np.random.default_rng(seed)
        keep = np.sort(rng.choice(P.shape[0], size=700, replace=False))
        P, owners = P[keep], owners[keep]
    images = np.empty_like(P)
    for i in np.unique(owners):
        m = owners == i
        images[m] = atlas.patches[i].map(P[m])
    diff = P[:, None, :] - P[None, :, :]
    dsrc = N.value(diff.reshape(-1, N.dim)).reshape(P.shape[0], P.shape[0])
    diff = images[:, None, :] - images[None, :, :]
    dimg = N.value(diff.reshape(-1, N.dim)).reshape(P.shape[0], P.shape[0])
    defects = np.abs(dimg - dsrc)
    k = int(np.argmax(defects))
    i, j = divmod(k, P.shape[0])
    worst = float(defects[i, j])
    if worst > CERT_SLACK * tau:
        return (P[i].copy(), P[j].copy()), worst
    return None, worst


def stitch(atlas: PatchAtlas, N: NormDescriptor, eta, tau, seed=0, seed_index: Optional[int] = None) -> Verdict:
    """Certify or refute the atlas as restrictions of one global isometry.

    Requires a passing cover check (else Undetermined("cover-gap")); extends
    the seed patch, then accepts patches breadth-first over the cover graph
    while their maps agree with the extension within 10*tau on their sampled
    balls. A disagreeing patch triggers a distance-defect witness search
    (Refutation); patches unreachable from the seed give
    Undetermined("disconnected").
    """
    eta = check_positive(eta, "eta")
    tau = check_positive(tau, "tau")
    seed = check_seed(seed)
    ok, uncovered = cover_check(atlas, N, eta, seed)
    if not ok:
        return Undetermined("cover-gap", f"{uncovered.shape[0]} sampled region points uncovered")
    graph = build_cover_graph(atlas, N, eta)
    try:
        root = seed_index if seed_index is not None else select_seed(atlas, N, eta)
    except StageFailure as exc:
        return Undetermined(exc.stage, exc.detail)
    try:
        report = extend_ball_isometry(atlas.patches[root].map, atlas.patches[root].ball, N, eta, tau)
    except StageFailure as exc:
        return Undetermined(f"seed-extension:{exc.stage}", exc.detail)
    g = report.g

    residuals = [None] * len(atlas)
    accepted = []
    queue = deque([root])
    enqueued = {root}
    while queue:
        i = queue.popleft()
        p = atlas.patches[i]
        cloud = sample_ball(N, p.ball, eta)
        resid = float(N.value(g(cloud.points) - p.map(cloud.points)).max())
        if resid > CERT_SLACK * tau:
            witness, defect = _search_refutation(atlas, N, i, graph, accepted, eta, tau, seed)
            if witness is None:
                return Undetermined(
                    "refutation-witness-not-found",
                    f"patch {i} disagrees with the extension by {resid:.3g} but no distance defect above "
                    f"{CERT_SLACK:g}*tau was found",
                )
            return Refutation(witness=witness, defect=defect)
        residuals[i] = resid
        accepted.append(i)
        for j in sorted(graph.adjacency[i]):
            if j not in enqueued:
                enqueued.add(j)
                queue.append(j)
    if len(accepted) < len(atlas):
        missing = sorted(set(range(len(atlas))) - set(accepted))
        return Undetermined("disconnected", f"patches {missing} are unreachable from seed {root}")
    return Certificate(global_map=g, per_patch_residuals=[float(r) for r in residuals])


def atlas_map(atlas: PatchAtlas, N: NormDescriptor):
    """The atlas as one map: each point evaluates through its owning patch
    (containing patch with the nearest center, ties to the lowest index)."""
    ids = list(range(len(atlas)))

    def fn(P):
        owners = _owner_indices(P, ids, atlas, N)
        if np.any(owners < 0):
            i = int(np.argmax(owners < 0))
            raise DomainViolation(f"point {P[i].tolist()} lies in no patch")
        out = np.empty_like(P)
        for i in np.unique(owners):
            m = owners == i
            out[m] = atlas.patches[i].map(P[m])
        return out

    oracle = MapOracle(func=fn, domain=None, name="atlas")
    oracle.domain_norm = N
    return oracle


def surjectivity_coverage(atlas: PatchAtlas, target: Ball, N: NormDescriptor, eta, seed=0) -> float:
    """Fraction of sampled target points within eta of some patch-image point."""
    eta = check_positive(eta, "eta")
    targets = sample_ball(N, target, eta).points
    images = []
    for p in atlas.patches:
        images.append(p.map(sample_ball(N, p.ball, eta).points))
    anchors = np.vstack(images)
    return float(within_radius(targets, anchors, N, eta).mean())
