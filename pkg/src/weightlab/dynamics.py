"""One-parameter groups, KMS checks, modular objects and quadrature.

Groups are inner: alpha_t(x) = e^{ith} x e^{-ith} blockwise for Hermitian
generators h.  Antilinear operators on the GNS space are stored as a matrix
K composed with entrywise conjugation; the composition rules live in
AntilinearMap so the antilinear calculus is written exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import DomainError, Element, FdAlgebra, func_calc
from .gns import GnsTriple
from .weights import Weight


class FaithfulnessError(DomainError):
    pass


class AccuracyError(DomainError):
    def __init__(self, msg, achieved):
        super().__init__(msg)
        self.achieved = achieved


# ---------------------------------------------------------------------------
# antilinear calculus

class AntilinearMap:
    """The antilinear operator v -> K conj(v) on a fixed basis."""

    def __init__(self, k: np.ndarray):
        self.k = np.asarray(k, dtype=complex)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.k @ np.conj(v)

    def compose_antilinear(self, other: "AntilinearMap") -> np.ndarray:
        """Linear matrix of self o other: K1 conj(K2)."""
        return self.k @ np.conj(other.k)

    def compose_linear_left(self, m: np.ndarray) -> "AntilinearMap":
        """M o self as an antilinear map."""
        return AntilinearMap(m @ self.k)

    def compose_linear_right(self, m: np.ndarray) -> "AntilinearMap":
        """self o M as an antilinear map: K conj(M)."""
        return AntilinearMap(self.k @ np.conj(m))

    def adjoint(self) -> "AntilinearMap":
        """<A v, w> = <A* w, v> with <u, v> = v* u; A* has matrix K^T."""
        return AntilinearMap(self.k.T)

    def conjugate_matrix(self, x: np.ndarray) -> np.ndarray:
        """A X A^{-1}-style conjugation A X A for an involution A = K conj."""
        return self.k @ np.conj(x) @ np.conj(self.k)


# ---------------------------------------------------------------------------
# one-parameter groups

@dataclass(frozen=True)
class OneParamGroup:
    algebra: FdAlgebra
    h: tuple   # per-block Hermitian generator matrices

    def __post_init__(self):
        h = tuple(np.asarray(b, dtype=complex) for b in self.h)
        for b, n in zip(h, self.algebra.block_dims):
            if b.shape != (n, n):
                raise DomainError("generator block shape mismatch")
            if np.linalg.norm(b - b.conj().T, 2) > 1e-10:
                raise DomainError("generator blocks must be Hermitian")
        object.__setattr__(self, "h", h)

    def generator_element(self) -> Element:
        return self.algebra.element(self.h)


def trivial_group(alg: FdAlgebra) -> OneParamGroup:
    return OneParamGroup(alg, tuple(np.zeros((n, n)) for n in alg.block_dims))


def act(g: OneParamGroup, t: float, x: Element) -> Element:
    return analytic_ext(g, complex(t), x)


def analytic_ext(g: OneParamGroup, z: complex, x: Element) -> Element:
    """alpha_z(x) = e^{izh} x e^{-izh}, entire in z (finite dimensions)."""
    if x.algebra != g.algebra:
        raise DomainError("element from a different algebra")
    out = []
    for hb, xb in zip(g.h, x.blocks):
        w, v = np.linalg.eigh(0.5 * (hb + hb.conj().T))
        left = v @ np.diag(np.exp(1j * z * w)) @ v.conj().T
        right = v @ np.diag(np.exp(-1j * z * w)) @ v.conj().T
        out.append(left @ xb @ right)
    return g.algebra.element(out)


def gauss_legendre_nodes(a: float, b: float, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def gaussian_smooth(g: OneParamGroup, x: Element, n: float,
                    nodes: int = 201, cutoff: float = 6.0,
                    tol: float | None = None):
    """x_n = n/sqrt(pi) * integral exp(-n^2 t^2) alpha_t(x) dt.

    Returns (quadrature value, exact value from the eigenbasis closed form
    x_n[p,q] = x[p,q] exp(-(h_p - h_q)^2 / (4 n^2)) per block).
    """
    if n <= 0:
        raise DomainError("smoothing parameter must be positive")
    ts, ws = gauss_legendre_nodes(-cutoff / n, cutoff / n, nodes)
    acc = x.algebra.zero()
    for t, w in zip(ts, ws):
        acc = acc + (w * n / np.sqrt(np.pi) * np.exp(-(n * t) ** 2)) * act(g, t, x)

    exact_blocks = []
    for hb, xb in zip(g.h, x.blocks):
        w, v = np.linalg.eigh(0.5 * (hb + hb.conj().T))
        xt = v.conj().T @ xb @ v
        damp = np.exp(-np.subtract.outer(w, w) ** 2 / (4.0 * n * n))
        exact_blocks.append(v @ (xt * damp) @ v.conj().T)
    exact = x.algebra.element(exact_blocks)

    if tol is not None:
        err = (acc - exact).norm()
        if err > tol:
            raise AccuracyError(f"quadrature budget too small: error {err:.3e}", err)
    return acc, exact


# ---------------------------------------------------------------------------
# KMS

@dataclass
class KmsReport:
    invariant: bool
    half_shift: bool
    strip: bool
    dev_invariant: float
    dev_half_shift: float
    dev_strip: float

    @property
    def passed(self) -> bool:
        return self.invariant and self.half_shift and self.strip


def kms_check(phi: Weight, g: OneParamGroup, tol: float = 1e-7,
              rng: np.random.Generator | None = None,
              num_samples: int = 5, t_grid=None) -> KmsReport:
    """Invariance, the sigma_{i/2} condition and the strip boundary condition."""
    rng = rng or np.random.default_rng(0)
    if t_grid is None:
        t_grid = np.linspace(-1.0, 1.0, 11)
    alg = phi.algebra

    dev_inv = 0.0
    probe = [alg.random_element(rng) for _ in range(num_samples)]
    for t in t_grid:
        for x in probe:
            dev_inv = max(dev_inv, abs(phi(act(g, float(t), x)) - phi(x)))

    dev_half = 0.0
    for _ in range(num_samples):
        a = alg.random_element(rng)
        sa = analytic_ext(g, 0.5j, a)
        dev_half = max(dev_half, abs(phi(a.star() @ a) - phi(sa @ sa.star())))

    dev_strip = 0.0
    for _ in range(num_samples):
        a = alg.random_element(rng)
        b = alg.random_element(rng)
        for t in t_grid:
            f_ti = phi(analytic_ext(g, float(t) + 1j, b) @ a)
            rhs = phi(a @ act(g, float(t), b))
            dev_strip = max(dev_strip, abs(f_ti - rhs))

    return KmsReport(dev_inv <= tol, dev_half <= tol, dev_strip <= tol,
                     dev_inv, dev_half, dev_strip)


def modular_group_of(phi: Weight) -> OneParamGroup:
    """The group sigma_t = Ad(D^{it}), with generator log D shifted so the
    top eigenvalue of each density block maps to 0 (the shift is in the
    center of the block, so it does not change the action)."""
    if not phi.faithful():
        raise FaithfulnessError("modular group needs a faithful weight")
    gens = []
    for d in phi.density:
        w, v = np.linalg.eigh(0.5 * (d + d.conj().T))
        gens.append(v @ np.diag(np.log(w) - np.log(w.max())) @ v.conj().T)
    return OneParamGroup(phi.algebra, tuple(gens))


def gibbs_weight(alg: FdAlgebra, h_blocks) -> Weight:
    """The Gibbs weight Tr(D .) with D = e^{-h}/Tr(e^{-h}) per block."""
    dens = []
    for hb in h_blocks:
        hb = np.asarray(hb, dtype=complex)
        w, v = np.linalg.eigh(0.5 * (hb + hb.conj().T))
        e = np.exp(-w)
        dens.append(v @ np.diag(e / e.sum()) @ v.conj().T)
    return Weight(alg, dens)


# ---------------------------------------------------------------------------
# modular objects

@dataclass
class ModularTriple:
    t_conj: AntilinearMap      # T: Lam(a) -> Lam(a*)
    nabla: np.ndarray
    j_conj: AntilinearMap      # J = T nabla^{-1/2}

    def nabla_power(self, z: complex) -> np.ndarray:
        w, v = np.linalg.eigh(self.nabla)
        return v @ np.diag(np.power(w.astype(complex), z)) @ v.conj().T


def modular_objects(phi: Weight, gns: GnsTriple) -> ModularTriple:
    if not phi.faithful():
        raise FaithfulnessError("modular objects need a faithful weight")
    alg = phi.algebra
    p_star = alg.adjoint_matrix()
    l_inv = np.linalg.inv(gns.lam_matrix)
    k_t = gns.lam_matrix @ p_star @ np.conj(l_inv)
    t_map = AntilinearMap(k_t)
    nabla = t_map.adjoint().compose_antilinear(t_map)   # T* T, linear
    nabla = 0.5 * (nabla + nabla.conj().T)
    w, v = np.linalg.eigh(nabla)
    if w.min() <= 0:
        raise FaithfulnessError("modular operator not positive definite")
    inv_sqrt = v @ np.diag(w ** -0.5) @ v.conj().T
    j_map = t_map.compose_linear_right(inv_sqrt)        # J = T o nabla^{-1/2}
    return ModularTriple(t_map, nabla, j_map)


def tomita_check(gns: GnsTriple, modular: ModularTriple, tol: float = 1e-8):
    """Span of {J pi(a) J} equals the commutant of pi(A)."""
    from .algebra import commutant, span_distance
    jmj = [modular.j_conj.conjugate_matrix(m) for m in gns.pi_basis]
    comm = commutant(gns.pi_basis, gns.dim_h)
    gap = span_distance(jmj, comm)
    return gap <= tol, gap


def uniqueness_harness(phi: Weight, eta: Weight, tol: float = 1e-8,
                       rng: np.random.Generator | None = None) -> bool:
    """If eta is sigma^phi-invariant and agrees with phi on positives, the
    densities coincide."""
    rng = rng or np.random.default_rng(1)
    g = modular_group_of(phi)
    alg = phi.algebra
    for t in np.linspace(-1.0, 1.0, 7):
        for _ in range(4):
            x = alg.random_element(rng)
            if abs(eta(act(g, float(t), x)) - eta(x)) > tol:
                return False
    for _ in range(16):
        p = alg.random_positive(rng)
        if abs(eta(p) - phi(p)) > tol * (1.0 + abs(phi(p))):
            return False
    gap = max(np.linalg.norm(de - dp, 2)
              for de, dp in zip(eta.density, phi.density))
    return gap <= 100 * tol


# ---------------------------------------------------------------------------
# integrals commuting with linear maps (quadrature)

def integrate_commute(f, g: OneParamGroup, a: Element, l_matrix: np.ndarray,
                      nodes: int = 201, interval=(-3.0, 3.0)):
    """Compare L(integral f(t) alpha_t(a) dt) with integral f(t) L(alpha_t(a)) dt.

    L is a linear map given as a matrix on algebra coordinates; both orders
    use the same quadrature rule, so the deviation is pure roundoff.
    """
    ts, ws = gauss_legendre_nodes(interval[0], interval[1], nodes)
    vec_dim = l_matrix.shape[0]
    inside = np.zeros(g.algebra.coord_dim, dtype=complex)
    outside = np.zeros(vec_dim, dtype=complex)
    for t, w in zip(ts, ws):
        v = act(g, float(t), a).to_vec()
        inside = inside + w * f(t) * v
        outside = outside + w * f(t) * (l_matrix @ v)
    first = l_matrix @ inside
    return first, outside, float(np.linalg.norm(first - outside))
