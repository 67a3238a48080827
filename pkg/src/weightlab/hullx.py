"""Convex hull projection and constructive convex extraction.

hull_project is a Frank-Wolfe solver with away steps over the simplex,
certified by the Wolfe duality gap; a brute-force face-enumeration QP is
kept alongside as an oracle for small instances.  convex_extract realizes
the extraction lemma: pick a cluster point of the value sequence, then for
each n project it onto the hull of the values in the 1/n tail.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np


class HullError(ValueError):
    pass


class BoundError(HullError):
    pass


class AccuracyError(HullError):
    def __init__(self, msg, achieved):
        super().__init__(msg)
        self.achieved = achieved


def hull_project(points, target, tol: float = 1e-10, max_iter: int = 10_000):
    """Nearest point of conv{points} to target: returns (point, weights, gap).

    Frank-Wolfe with away steps and exact line search; the Wolfe gap at the
    returned iterate certifies optimality within tol (for the squared
    objective).
    """
    p = np.column_stack([np.asarray(v, dtype=complex).reshape(-1) for v in points])
    t = np.asarray(target, dtype=complex).reshape(-1)
    npts = p.shape[1]
    lam = np.zeros(npts)
    lam[0] = 1.0
    gram = np.real(p.conj().T @ p)
    lin = np.real(p.conj().T @ t)

    gap = np.inf
    for _ in range(max_iter):
        grad = 2.0 * (gram @ lam - lin)
        s = int(np.argmin(grad))
        active = np.flatnonzero(lam > 1e-15)
        a = active[int(np.argmax(grad[active]))]
        gap = float(grad @ lam - grad[s])
        if gap <= tol:
            break
        fw_dec = grad @ lam - grad[s]
        away_dec = grad[a] - grad @ lam
        if fw_dec >= away_dec:
            d = -lam.copy()
            d[s] += 1.0
            gamma_max = 1.0
        else:
            d = lam.copy()
            d[a] -= 1.0
            la = lam[a]
            if la >= 1.0 - 1e-15:
                break
            gamma_max = la / (1.0 - la)
        denom = float(d @ gram @ d)
        if denom <= 1e-300:
            gamma = gamma_max
        else:
            gamma = min(gamma_max, max(0.0, -0.5 * float(grad @ d) / denom))
        if gamma <= 0.0:
            break
        lam = lam + gamma * d
        lam = np.clip(lam, 0.0, None)
        ssum = lam.sum()
        if ssum > 0:
            lam = lam / ssum
    if gap > tol:
        raise AccuracyError(f"iteration budget exceeded, gap {gap:.3e}", gap)
    return p @ lam, lam, gap


def hull_project_bruteforce(points, target):
    """Exhaustive face enumeration; oracle for <= 12 points."""
    p = np.column_stack([np.asarray(v, dtype=complex).reshape(-1) for v in points])
    t = np.asarray(target, dtype=complex).reshape(-1)
    npts = p.shape[1]
    if npts > 12:
        raise HullError("brute-force oracle limited to 12 points")
    best, best_lam = np.inf, None
    for size in range(1, npts + 1):
        for subset in combinations(range(npts), size):
            ps = p[:, list(subset)]
            gram = np.real(ps.conj().T @ ps)
            lin = np.real(ps.conj().T @ t)
            kkt = np.zeros((size + 1, size + 1))
            kkt[:size, :size] = 2.0 * gram
            kkt[:size, size] = 1.0
            kkt[size, :size] = 1.0
            rhs = np.concatenate([2.0 * lin, [1.0]])
            sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
            lam_s = sol[:size]
            if lam_s.min() < -1e-10 or abs(lam_s.sum() - 1.0) > 1e-8:
                continue
            val = float(np.linalg.norm(ps @ lam_s - t))
            if val < best - 1e-14:
                best = val
                best_lam = np.zeros(npts)
                best_lam[list(subset)] = lam_s
    if best_lam is None:
        raise HullError("no feasible face found")
    return p @ best_lam, best_lam, best


@dataclass
class ExtractionProblem:
    points: list                # x_i, coordinate vectors (or matrices)
    values: list                # Lam(x_i), Hilbert-space vectors
    target: object              # x with x_i -> x
    bound: float = field(default=0.0)
    point_distance: object = None   # optional custom seminorm d(y, x)

    def __post_init__(self):
        if len(self.points) != len(self.values):
            raise HullError("points/values length mismatch")
        norms = [float(np.linalg.norm(np.asarray(v))) for v in self.values]
        if self.bound <= 0.0:
            self.bound = max(norms) if norms else 0.0
        elif max(norms, default=0.0) > self.bound + 1e-12:
            raise BoundError("value sequence exceeds the declared bound")

    def dist(self, y, x) -> float:
        if self.point_distance is not None:
            return float(self.point_distance(y, x))
        return float(np.linalg.norm(np.asarray(y) - np.asarray(x)))

    def tail_index(self, eps: float) -> int:
        """Smallest n0 with dist(x_i, x) <= eps for all i >= n0."""
        n0 = len(self.points)
        for i in range(len(self.points) - 1, -1, -1):
            if self.dist(self.points[i], self.target) <= eps:
                n0 = i
            else:
                break
        return n0


def cluster_point(values, eps0: float | None = None, eps_min: float = 1e-12):
    """A cluster value found by greedy epsilon-halving refinement.

    At each scale keep the largest ball (first on ties) around a member of
    the surviving set; deterministic surrogate for Banach-Alaoglu.
    """
    vals = [np.asarray(v, dtype=complex).reshape(-1) for v in values]
    if not vals:
        raise HullError("empty value sequence")
    idx = list(range(len(vals)))
    eps = eps0 if eps0 is not None else max(
        float(np.linalg.norm(v - vals[0])) for v in vals) + 1.0
    center = idx[0]
    while eps > eps_min and len(idx) > 1:
        best_count, best_center, best_members = -1, idx[0], idx
        for i in idx:
            members = [j for j in idx if np.linalg.norm(vals[j] - vals[i]) <= eps]
            if len(members) > best_count:
                best_count, best_center, best_members = len(members), i, members
        idx = best_members
        center = best_center
        eps *= 0.5
    return vals[center], center


@dataclass
class ExtractionRecord:
    n: int
    weights: np.ndarray
    y: object
    value: np.ndarray
    dev_value: float
    dev_point: float
    feasible: bool


def convex_extract(prob: ExtractionProblem, n_max: int = 50,
                   tol: float = 1e-10):
    """The constructive extraction: y_n in conv{x_i} with both 1/n bounds.

    Returns (v, records); an infeasible n is recorded, not raised, since it
    would falsify the lemma's finite shadow.
    """
    v, _ = cluster_point(prob.values)
    records = []
    for n in range(1, n_max + 1):
        i0 = prob.tail_index(1.0 / n)
        if i0 >= len(prob.points):
            i0 = len(prob.points) - 1
        tail = list(range(i0, len(prob.points)))
        _, lam, _ = hull_project([prob.values[i] for i in tail], v, tol)
        y = None
        val = np.zeros_like(np.asarray(prob.values[0], dtype=complex))
        for w, i in zip(lam, tail):
            term_p = w * np.asarray(prob.points[i], dtype=complex)
            y = term_p if y is None else y + term_p
            val = val + w * np.asarray(prob.values[i], dtype=complex).reshape(-1)
        dev_val = float(np.linalg.norm(val - np.asarray(v).reshape(-1)))
        dev_pt = prob.dist(y, prob.target)
        ok = dev_val <= 1.0 / n + 1e-9 and dev_pt <= 1.0 / n + 1e-9
        records.append(ExtractionRecord(n, lam, y, val, dev_val, dev_pt, ok))
    return v, records


def strong_star_distance(witnesses):
    """max over w in E of ||(y-x) w|| and ||(y-x)* w||."""
    ws = [np.asarray(w, dtype=complex) for w in witnesses]

    def dist(y, x):
        d = np.asarray(y, dtype=complex) - np.asarray(x, dtype=complex)
        if not ws:
            return 0.0
        return max(max(float(np.linalg.norm(d @ w)) for w in ws),
                   max(float(np.linalg.norm(d.conj().T @ w)) for w in ws))

    return dist


def strong_star_variant(points, values, target, witnesses,
                        n_max: int = 50, tol: float = 1e-10):
    """Extraction with strong* closeness measured against witness vectors."""
    prob = ExtractionProblem(points, values, target,
                             point_distance=strong_star_distance(witnesses))
    return convex_extract(prob, n_max, tol)
