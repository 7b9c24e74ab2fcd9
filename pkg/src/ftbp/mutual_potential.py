"""Mutual gravitational potential, force, and moment between two polyhedra.

The double volume integral over both bodies reduces to a sum over all simplex
pairs (a, b).  Writing the point difference inside a pair as X + v @ sigma
with sigma the six barycentric coordinates and

    v = [R a1, R a2, R a3, -b1, -b2, -b3]        (3 x 6)
    w = v^T X                                    (6,)
    gam = v^T v                                  (6 x 6 Gram matrix)

the integrand 1/|X + v sigma| = 1/sqrt(r^2 + eps) with
eps = 2 w.sigma + sigma.gam.sigma expands as

    sum_k (-1)^k (2k-1)!! / (2^k k!) eps^k / r^(2k+1).

Expanding eps^k binomially and integrating monomials against the coefficient
tensors of :mod:`ftbp.qtensors` gives, per simplex pair, a series grouped by
total sigma-degree n = k + j (j = number of Gram factors).  Truncation keeps
n <= order.  Gradients follow by the chain rule through r, w, and gam; the
derivative of v with respect to R is sparse (columns 4-6 do not depend on R),
so the attitude gradient assembles from small outer products and no rank-4
array is ever formed.
"""

from __future__ import annotations

import io
import warnings
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from .bodies import PolyhedralBody
from .qtensors import QTensorSet, compute_q_tensors

G_SI = 6.674e-11  # m^3 kg^-1 s^-2

DEFAULT_ORDER = 4


class SingularConfigurationError(ValueError):
    """Zero separation between body centroids."""


class SeriesConvergenceWarning(UserWarning):
    """Separation below the sum of circumscribing radii; series may diverge."""


@dataclass(frozen=True, eq=False)
class PairGeometry:
    """Configuration-dependent tensors for a single simplex pair."""

    v: np.ndarray  # (3, 6)
    w: np.ndarray  # (6,)
    rmat: np.ndarray  # (6, 6) Gram matrix of v
    r: float


@dataclass(frozen=True, eq=False)
class GravityGradients:
    """Potential, its gradients, and the moment at one relative configuration."""

    U: float
    dUdX: np.ndarray  # (3,)
    dUdR: np.ndarray  # (3, 3)
    M: np.ndarray  # (3,)


def assemble_pair_geometry(
    X: np.ndarray, R: np.ndarray, a_verts: np.ndarray, b_verts: np.ndarray
) -> PairGeometry:
    """Build (v, w, gam, r) for one simplex pair; vertex matrices hold the
    three non-centroid vertices as columns."""
    r = float(np.linalg.norm(X))
    if r == 0.0:
        raise SingularConfigurationError("zero separation between centroids")
    v = np.hstack([R @ a_verts, -b_verts])
    return PairGeometry(v=v, w=v.T @ X, rmat=v.T @ v, r=r)


def moment(dUdR: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Moment in the second body frame from the attitude gradient.

    Extracted from the skew identity S(M) = dUdR R^T - R dUdR^T, which is
    exactly skew in floating point (K minus its own transpose); equivalent to
    summing cross products of matching columns of R and dUdR.
    """
    k = dUdR @ R.T
    return np.array([k[2, 1] - k[1, 2], k[0, 2] - k[2, 0], k[1, 0] - k[0, 1]])


def _series_terms(order: int):
    """(k, j, alpha, p) for every sigma-degree group n = k + j <= order.

    alpha collects the binomial coefficient, the power of two from the linear
    part, and (-1)^k (2k-1)!!/(2^k k!); p is the power of r dividing the term.
    """
    terms = []
    for k in range(order + 1):
        ck = (-1) ** k * factorial(2 * k) / (4**k * factorial(k) ** 2)
        for j in range(k + 1):
            if k + j > order:
                break
            terms.append((k, j, ck * comb(k, j) * 2 ** (k - j), 2 * k + 1))
    return terms


def _contract_w(t, w, shared):
    if shared:
        return np.einsum("qk,pk->pq", t.reshape(-1, 6), w, optimize=False)
    npairs = t.shape[0]
    return np.einsum("pqk,pk->pq", t.reshape(npairs, -1, 6), w, optimize=False)


def _contract_g(t, gflat, shared):
    if shared:
        return np.einsum("qk,pk->pq", t.reshape(-1, 36), gflat, optimize=False)
    npairs = t.shape[0]
    return np.einsum("pqk,pk->pq", t.reshape(npairs, -1, 36), gflat, optimize=False)


class MutualGravity:
    """Evaluator for one body pair at a fixed series order.

    Per-simplex data is staged once at construction; :meth:`evaluate` performs
    a single traversal of all simplex pairs.  Contributions are always
    materialized in canonical (a, b) order and reduced by a fixed-order sum,
    so results are bit-reproducible for any worker count when
    ``deterministic`` is set; ``deterministic=False`` lets worker partial sums
    combine in completion order.
    """

    def __init__(
        self,
        body1: PolyhedralBody,
        body2: PolyhedralBody,
        q: QTensorSet | None = None,
        order: int = DEFAULT_ORDER,
        g_const: float = G_SI,
        deterministic: bool = True,
        workers: int = 1,
        chunk_size: int = 64,
    ):
        if q is None:
            q = compute_q_tensors(order)
        if q.max_order < order:
            raise ValueError(f"q tensors only cover rank {q.max_order} < {order}")
        self.body1 = body1
        self.body2 = body2
        self.q = q
        self.order = order
        self.g_const = g_const
        self.deterministic = deterministic
        self.workers = max(1, workers)
        self.chunk_size = max(1, chunk_size)
        self.eval_count = 0

        self._terms = _series_terms(order)
        self._fastq = {}
        if order >= 1:
            self._fastq["q1"] = q.dense[1].copy()
        if order >= 2:
            self._fastq["q2"] = q.dense[2].copy()
            self._fastq["q2f"] = q.dense[2].reshape(36).copy()
        if order >= 3:
            self._fastq["q3_6_36"] = q.dense[3].reshape(6, 36).copy()
            self._fastq["q3_36_6"] = q.dense[3].reshape(36, 6).copy()
        if order >= 4:
            self._fastq["q4_36_36"] = q.dense[4].reshape(36, 36).copy()
            self._fastq["q4_6_216"] = q.dense[4].reshape(6, 216).copy()
        self._A = body1.simplex_vertices  # (n1, 3, 3)
        self._B = body2.simplex_vertices  # (n2, 3, 3)
        self._AtA = np.einsum("aki,akj->aij", self._A, self._A, optimize=False)
        self._BtB = np.einsum("bki,bkj->bij", self._B, self._B, optimize=False)
        self._weights = -g_const * np.outer(body1.rho_T, body2.rho_T)
        self._contact_radius = body1.max_radius + body2.max_radius

    # -- public operations -------------------------------------------------

    def evaluate(self, X: np.ndarray, R: np.ndarray) -> GravityGradients:
        """Potential, both gradients, and the moment in one pair traversal.

        Increments the evaluation counter used by run accounting.
        """
        self.eval_count += 1
        u, dx, dr = self._evaluate(X, R, need_dx=True, need_dr=True)
        return GravityGradients(U=u, dUdX=dx, dUdR=dr, M=moment(dr, R))

    def potential(self, X: np.ndarray, R: np.ndarray) -> float:
        u, _, _ = self._evaluate(X, R, need_dx=False, need_dr=False)
        return u

    def force_gradient(self, X: np.ndarray, R: np.ndarray) -> np.ndarray:
        _, dx, _ = self._evaluate(X, R, need_dx=True, need_dr=False)
        return dx

    def attitude_gradient(self, X: np.ndarray, R: np.ndarray) -> np.ndarray:
        _, _, dr = self._evaluate(X, R, need_dx=False, need_dr=True)
        return dr

    def pair_contributions_csv(self, X: np.ndarray, R: np.ndarray) -> str:
        """Per-pair potential and force contributions as CSV (debug aid)."""
        u, dx, _, _ = self._pair_arrays(X, R)
        out = io.StringIO()
        out.write("a,b,U,dUdX_x,dUdX_y,dUdX_z\n")
        n1, n2 = u.shape
        for a in range(n1):
            for b in range(n2):
                vals = ",".join(f"{val:.17g}" for val in (u[a, b], *dx[a, b]))
                out.write(f"{a},{b},{vals}\n")
        return out.getvalue()

    # -- kernel ------------------------------------------------------------

    def _check_separation(self, X):
        r = float(np.linalg.norm(X))
        if r == 0.0:
            raise SingularConfigurationError("zero separation between centroids")
        if r < self._contact_radius:
            warnings.warn(
                f"separation {r:.6g} below circumscribing-radius sum "
                f"{self._contact_radius:.6g}; series may not converge",
                SeriesConvergenceWarning,
                stacklevel=3,
            )
        return r

    def _evaluate(self, X, R, need_dx, need_dr):
        if not self.deterministic and self.workers > 1:
            return self._evaluate_unordered(X, R, need_dx, need_dr)
        u_pairs, dx_pairs, dr_pairs, _ = self._pair_arrays(
            X, R, need_dx=need_dx, need_dr=need_dr
        )
        u = float(np.sum(u_pairs))
        dx = dx_pairs.reshape(-1, 3).sum(axis=0) if need_dx else None
        dr = dr_pairs.reshape(-1, 3, 3).sum(axis=0) if need_dr else None
        return u, dx, dr

    def _evaluate_unordered(self, X, R, need_dx, need_dr):
        """Fast path: worker partial sums combined in completion order."""
        X = np.asarray(X, dtype=float)
        r = self._check_separation(X)
        n1 = len(self._A)
        if self.g_const == 0.0:
            return 0.0, np.zeros(3), np.zeros((3, 3))
        chunks = [
            (lo, min(lo + self.chunk_size, n1))
            for lo in range(0, n1, self.chunk_size)
        ]

        def work(bounds):
            lo, hi = bounds
            cu, cdx, cdr = self._chunk_terms(X, R, r, lo, hi, need_dx, need_dr)
            return (
                float(np.sum(cu)),
                cdx.reshape(-1, 3).sum(axis=0) if need_dx else None,
                cdr.reshape(-1, 3, 3).sum(axis=0) if need_dr else None,
            )

        u, dx, dr = 0.0, np.zeros(3), np.zeros((3, 3))
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            for fut in as_completed(pool.submit(work, b) for b in chunks):
                cu, cdx, cdr = fut.result()
                u += cu
                if need_dx:
                    dx += cdx
                if need_dr:
                    dr += cdr
        return u, dx if need_dx else None, dr if need_dr else None

    def _pair_arrays(self, X, R, need_dx=True, need_dr=True):
        """Weighted per-pair contributions in canonical (a, b) layout."""
        X = np.asarray(X, dtype=float)
        r = self._check_separation(X)
        if self.g_const == 0.0:
            n1, n2 = len(self._A), len(self._B)
            return (
                np.zeros((n1, n2)),
                np.zeros((n1, n2, 3)),
                np.zeros((n1, n2, 3, 3)),
                r,
            )
        n1 = len(self._A)
        chunks = [
            (lo, min(lo + self.chunk_size, n1))
            for lo in range(0, n1, self.chunk_size)
        ]
        results = [None] * len(chunks)

        def work(idx):
            lo, hi = chunks[idx]
            results[idx] = self._chunk_terms(X, R, r, lo, hi, need_dx, need_dr)

        if self.workers == 1 or len(chunks) == 1:
            for idx in range(len(chunks)):
                work(idx)
        else:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                futures = [pool.submit(work, idx) for idx in range(len(chunks))]
                for fut in as_completed(futures):
                    fut.result()

        if len(results) == 1:
            u, dx, dr = results[0]
        else:
            u = np.concatenate([res[0] for res in results], axis=0)
            dx = (
                np.concatenate([res[1] for res in results], axis=0)
                if need_dx
                else None
            )
            dr = (
                np.concatenate([res[2] for res in results], axis=0)
                if need_dr
                else None
            )
        return u, dx, dr, r

    def _chunk_terms(self, X, R, r, lo, hi, need_dx, need_dr):
        A = self._A[lo:hi]
        B = self._B
        na, nb = len(A), len(B)
        npairs = na * nb

        # Pair geometry in stacked six-index form.
        y = R.T @ X
        wa = y @ A  # (na, 3): columns of A dotted with R^T X
        wb = -(X @ B)
        w6 = np.empty((na, nb, 6))
        w6[..., :3] = wa[:, None, :]
        w6[..., 3:] = wb[None, :, :]
        rtb = R.T @ B  # (nb, 3, 3)
        gab = -np.matmul(A.transpose(0, 2, 1)[:, None], rtb[None, :])
        g6 = np.empty((na, nb, 6, 6))
        g6[..., :3, :3] = self._AtA[lo:hi, None]
        g6[..., 3:, 3:] = self._BtB[None, :]
        g6[..., :3, 3:] = gab
        g6[..., 3:, :3] = gab.transpose(0, 1, 3, 2)

        wf = w6.reshape(npairs, 6)
        gf = g6.reshape(npairs, 36)

        if self.order <= 4:
            u_acc, ur_acc, uw_acc, ug_acc = self._series_fused(wf, gf, r)
        else:
            u_acc, ur_acc, uw_acc, ug_acc = self._series_general(wf, gf, r)
        return self._assemble(
            X, R, r, lo, hi, u_acc, ur_acc, uw_acc, ug_acc, need_dx, need_dr
        )

    def _series_general(self, wf, gf, r):
        """Arbitrary-order series by chained tensor contractions."""
        npairs = len(wf)
        u_acc = np.zeros(npairs)
        ur_acc = np.zeros(npairs)
        uw_acc = np.zeros((npairs, 6))
        ug_acc = np.zeros((npairs, 6, 6))

        for k, j, alpha, p in self._terms:
            i = k - j
            qn = self.q.dense[k + j]
            rp = alpha / r**p

            # Gram-factor chain; remember the tensor one step short for the
            # Gram derivative.
            t, t_shared = qn, True
            before_last_g = None
            for _ in range(j):
                before_last_g = (t, t_shared)
                t, t_shared = _contract_g(t, gf, t_shared), False

            # Linear-factor chain on top; remember one step short for the
            # w derivative.
            before_last_w = None
            for step in range(i):
                if step == i - 1:
                    before_last_w = (t, t_shared)
                t, t_shared = _contract_w(t, wf, t_shared), False

            s = t.reshape(npairs) if not t_shared else float(t)
            u_acc += rp * s
            ur_acc += (-p * rp / r) * s

            if i > 0:
                t1, t1_shared = before_last_w
                contrib = (rp * i) * t1.reshape(-1, 6)
                uw_acc += contrib[0] if t1_shared else contrib
            if j > 0:
                t2, t2_shared = before_last_g
                t2w, t2w_shared = t2, t2_shared
                for _ in range(i):
                    t2w, t2w_shared = _contract_w(t2w, wf, t2w_shared), False
                contrib = (rp * j) * t2w.reshape(-1, 6, 6)
                ug_acc += contrib[0] if t2w_shared else contrib
        return u_acc, ur_acc, uw_acc, ug_acc

    def _series_fused(self, wf, gf, r):
        """Hand-fused schedule for the default orders 0..4.

        Same sigma-degree groups as :meth:`_series_general`, written as a
        fixed sequence of small matrix products so the per-evaluation numpy
        call count stays low (this is the hot path of every integrator step).
        """
        npairs = len(wf)
        order = self.order
        ir1 = 1.0 / r
        ir3 = ir1 / r**2
        ir5 = ir3 / r**2
        ir7 = ir5 / r**2
        ir9 = ir7 / r**2
        fq = self._fastq

        u_acc = np.full(npairs, float(self.q.dense[0]) * ir1)
        ur_acc = np.full(npairs, -float(self.q.dense[0]) * ir1 / r)
        uw_acc = np.zeros((npairs, 6))
        ug_acc = np.zeros((npairs, 6, 6))
        ugf = ug_acc.reshape(npairs, 36)

        if order >= 1:
            s1 = wf @ fq["q1"]
            u_acc += -ir3 * s1
            ur_acc += 3.0 * (ir3 / r) * s1
            uw_acc += -ir3 * fq["q1"]
        if order >= 2:
            q2w = wf @ fq["q2"]
            s_ww = np.einsum("pi,pi->p", q2w, wf, optimize=False)
            s_g = gf @ fq["q2f"]
            u_acc += 1.5 * ir5 * s_ww - 0.5 * ir3 * s_g
            ur_acc += -7.5 * (ir5 / r) * s_ww + 1.5 * (ir3 / r) * s_g
            uw_acc += (3.0 * ir5) * q2w
            ugf += (-0.5 * ir3) * fq["q2f"]
        if order >= 3:
            t3g = gf @ fq["q3_36_6"]
            s_gw = np.einsum("pi,pi->p", t3g, wf, optimize=False)
            t3w = wf @ fq["q3_6_36"]
            t3ww = np.einsum(
                "pjk,pj->pk", t3w.reshape(npairs, 6, 6), wf, optimize=False
            )
            s_www = np.einsum("pi,pi->p", t3ww, wf, optimize=False)
            u_acc += 1.5 * ir5 * s_gw - 2.5 * ir7 * s_www
            ur_acc += -7.5 * (ir5 / r) * s_gw + 17.5 * (ir7 / r) * s_www
            uw_acc += (1.5 * ir5) * t3g + (-7.5 * ir7) * t3ww
            ugf += (1.5 * ir5) * t3w
        if order >= 4:
            t4g = gf @ fq["q4_36_36"]
            s_gg = np.einsum("pi,pi->p", t4g, gf, optimize=False)
            t4gw = np.einsum(
                "pjk,pj->pk", t4g.reshape(npairs, 6, 6), wf, optimize=False
            )
            s_gww = np.einsum("pi,pi->p", t4gw, wf, optimize=False)
            t4w = wf @ fq["q4_6_216"]
            t4ww = np.einsum(
                "pjm,pj->pm", t4w.reshape(npairs, 6, 36), wf, optimize=False
            )
            t4www = np.einsum(
                "pjk,pj->pk", t4ww.reshape(npairs, 6, 6), wf, optimize=False
            )
            s_wwww = np.einsum("pi,pi->p", t4www, wf, optimize=False)
            u_acc += 0.375 * ir5 * s_gg - 3.75 * ir7 * s_gww + 4.375 * ir9 * s_wwww
            ur_acc += (
                -1.875 * (ir5 / r) * s_gg
                + 26.25 * (ir7 / r) * s_gww
                - 39.375 * (ir9 / r) * s_wwww
            )
            uw_acc += (-7.5 * ir7) * t4gw + (17.5 * ir9) * t4www
            ugf += (0.75 * ir5) * t4g + (-3.75 * ir7) * t4ww
        return u_acc, ur_acc, uw_acc, ug_acc

    def _assemble(self, X, R, r, lo, hi, u_acc, ur_acc, uw_acc, ug_acc, need_dx, need_dr):
        A = self._A[lo:hi]
        B = self._B
        na, nb = len(A), len(B)
        wgt = self._weights[lo:hi]
        u_out = wgt * u_acc.reshape(na, nb)

        dx_out = None
        dr_out = None
        if need_dx or need_dr:
            uw6 = uw_acc.reshape(na, nb, 6)
            a_body = np.matmul(A[:, None], uw6[..., :3, None])[..., 0]
        if need_dx:
            vw = a_body @ R.T - np.matmul(B[None, :], uw6[..., 3:, None])[..., 0]
            dx_out = wgt[..., None] * (
                ur_acc.reshape(na, nb)[..., None] * (X / r) + vw
            )
        if need_dr:
            ugm = ug_acc.reshape(na, nb, 6, 6)
            vg = R @ np.matmul(A[:, None], ugm[..., :3, :3]) - np.matmul(
                B[None, :], ugm[..., 3:, :3]
            )
            first = X[None, None, :, None] * a_body[:, :, None, :]
            second = 2.0 * np.matmul(vg, A.transpose(0, 2, 1)[:, None])
            dr_out = wgt[..., None, None] * (first + second)
        return u_out, dx_out, dr_out


# -- single-shot convenience wrappers (used by tests and the service) -------


def potential(X, R, body1, body2, q, order, g_const=G_SI) -> float:
    """Mutual potential truncated at the given sigma-degree order."""
    return MutualGravity(body1, body2, q, order, g_const).potential(X, R)


def force_gradient(X, R, body1, body2, q, order, g_const=G_SI) -> np.ndarray:
    """Partial derivative of the potential with respect to X."""
    return MutualGravity(body1, body2, q, order, g_const).force_gradient(X, R)


def attitude_gradient(X, R, body1, body2, q, order, g_const=G_SI) -> np.ndarray:
    """Partial derivative of the potential with respect to R."""
    return MutualGravity(body1, body2, q, order, g_const).attitude_gradient(X, R)
