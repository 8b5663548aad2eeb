"""Finite couplings with commuting bi-actions and the induction machinery.

A coupling is a finite weighted point set carrying commuting actions of two
finite groups, each with a fundamental domain (a subset whose translates
partition the points).  Functions on the second group transport to the first
through the trace pairing against the translated domain; factorization
witnesses transport alongside without norm growth, and the domain of the
first action realizes the Koopman representation as an amplified regular
representation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .groups import FiniteGroup, GroupFunction, subgroup
from .norms import FactorizationWitness
from .numerics import operator_norm


@dataclass
class TracedSpace:
    """Finite point set with strictly positive weights (the trace)."""

    n_points: int
    weight: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=np.float64)
        if w.shape != (self.n_points,):
            raise ValueError("one weight per point required")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be positive and finite")
        self.weight = w

    def trace(self, subset: np.ndarray) -> float:
        return float(self.weight[subset].sum())


@dataclass
class CouplingSpace:
    """Commuting weight-preserving actions with fundamental domains.

    ``gamma_action[g]`` and ``lambda_action[s]`` are point permutations; ``p``
    is a fundamental domain for the lambda action with total weight one after
    normalization, ``q`` one for the gamma action.
    """

    space: TracedSpace
    gamma: FiniteGroup
    gamma_action: np.ndarray
    lam: FiniteGroup
    lambda_action: np.ndarray
    p: np.ndarray
    q: np.ndarray
    point_to_lambda: np.ndarray = field(init=False)

    def __post_init__(self):
        npts = self.space.n_points
        ga = np.asarray(self.gamma_action, dtype=np.int64)
        la = np.asarray(self.lambda_action, dtype=np.int64)
        if ga.shape != (self.gamma.order, npts):
            raise ValueError("gamma action must give one permutation per element")
        if la.shape != (self.lam.order, npts):
            raise ValueError("lambda action must give one permutation per element")
        for name, group, act in (("gamma", self.gamma, ga),
                                 ("lambda", self.lam, la)):
            ident = np.arange(npts)
            if not np.array_equal(act[group.identity], ident):
                raise ValueError(f"{name} action does not fix the identity")
            for g in range(group.order):
                if not np.array_equal(np.sort(act[g]), ident):
                    raise ValueError(f"{name} action is not by permutations")
                if not np.allclose(self.space.weight[act[g]],
                                   self.space.weight, rtol=0, atol=1e-12):
                    raise ValueError(f"{name} action does not preserve weights")
            for g in range(group.order):
                for h in range(group.order):
                    if not np.array_equal(act[group.mul(g, h)], act[g][act[h]]):
                        raise ValueError(f"{name} action is not a homomorphism")
        for g in range(self.gamma.order):
            for s in range(self.lam.order):
                if not np.array_equal(ga[g][la[s]], la[s][ga[g]]):
                    raise ValueError("actions do not commute")
        self.gamma_action = ga
        self.lambda_action = la
        self.p = np.asarray(sorted(set(int(x) for x in self.p)), dtype=np.int64)
        self.q = np.asarray(sorted(set(int(x) for x in self.q)), dtype=np.int64)
        for name, group, act, dom in (("lambda", self.lam, la, self.p),
                                      ("gamma", self.gamma, ga, self.q)):
            cover = np.zeros(npts, dtype=np.int64)
            for g in range(group.order):
                cover[act[g][dom]] += 1
            if not np.all(cover == 1):
                raise ValueError(f"not a fundamental domain for the {name} action")
        # normalize Tr(p) = 1
        tp = self.space.trace(self.p)
        if abs(tp - 1.0) > 1e-12:
            self.space = TracedSpace(npts, self.space.weight / tp)
        # resolve the partition: point x sits in sigma_{s^-1}(p)
        owner = np.full(npts, -1, dtype=np.int64)
        for s in range(self.lam.order):
            sinv = self.lam.inv(s)
            owner[la[sinv][self.p]] = s
        self.point_to_lambda = owner

    def tr_p(self) -> float:
        return self.space.trace(self.p)

    def gamma_translate_p(self, g: int) -> np.ndarray:
        return self.gamma_action[g][self.p]


def subgroup_coupling(lam: FiniteGroup, gamma_elements: list[int],
                      label: str = "subgroup") -> tuple[CouplingSpace, FiniteGroup, list[int]]:
    """Coupling realizing a subgroup: points are the big group, the subgroup
    acts by inverse right translation, the big group by left translation.

    Returns the coupling, the subgroup as its own group, and the embedding of
    subgroup indices into the big group.
    """
    gam, embed = subgroup(lam, gamma_elements, label)
    npts = lam.order
    ga = np.empty((gam.order, npts), dtype=np.int64)
    for gi in range(gam.order):
        g = embed[gi]
        ginv = lam.inv(g)
        # point map x -> x g^-1
        ga[gi] = lam.table[:, ginv]
    la = np.empty((lam.order, npts), dtype=np.int64)
    for s in range(lam.order):
        la[s] = lam.table[s, :]
    space = TracedSpace(npts, np.ones(npts))
    p = np.array([lam.identity], dtype=np.int64)
    # transversal of the gamma orbits x -> x Gamma: left cosets
    seen = np.zeros(npts, dtype=bool)
    q = []
    for x in range(npts):
        if not seen[x]:
            q.append(x)
            for gi in range(gam.order):
                seen[ga[gi][x]] = True
    cs = CouplingSpace(space, gam, ga, lam, la, p, np.array(q, dtype=np.int64))
    return cs, gam, embed


def me_coupling(weights: np.ndarray, gamma: FiniteGroup, gamma_action: np.ndarray,
                lam: FiniteGroup, lambda_action: np.ndarray,
                p: list[int], q: list[int]) -> CouplingSpace:
    """Validate a measured-equivalence style coupling; weights rescale so the
    lambda domain has trace one."""
    space = TracedSpace(len(weights), np.asarray(weights, dtype=np.float64))
    return CouplingSpace(space, gamma, gamma_action, lam, lambda_action,
                         np.asarray(p), np.asarray(q))


def theta(cs: CouplingSpace, f: GroupFunction) -> np.ndarray:
    """Embed a function on the lambda group into the coupling space.

    theta(f)(x) = f(s) for the unique s whose inverse translate of the domain
    contains x; unital, multiplicative, and injective by the partition.
    """
    if f.carrier is not cs.lam:
        raise ValueError("function must live on the lambda group")
    return f.values[cs.point_to_lambda]


def induce(cs: CouplingSpace, phi: GroupFunction) -> GroupFunction:
    """Transport a function on the lambda group to the gamma group.

    The value at g is the trace of the g-translated domain against the
    embedded function.
    """
    th = theta(cs, phi)
    w = cs.space.weight
    vals = np.empty(cs.gamma.order, dtype=np.complex128)
    for g in range(cs.gamma.order):
        pts = cs.gamma_translate_p(g)
        vals[g] = np.sum(w[pts] * th[pts])
    return GroupFunction(cs.gamma, vals)


def induce_dual(cs: CouplingSpace, f: GroupFunction) -> GroupFunction:
    """Predual transport: functions on gamma pull back to lambda with equal
    l1 mass on nonnegative inputs, adjoint to the induction under the
    bilinear pairing."""
    if f.carrier is not cs.gamma:
        raise ValueError("function must live on the gamma group")
    w = cs.space.weight
    npts = cs.space.n_points
    # overlap masses Tr(sigma_g(p) sigma_{s^-1}(p))
    vals = np.zeros(cs.lam.order, dtype=np.complex128)
    for s in range(cs.lam.order):
        sinv = cs.lam.inv(s)
        in_sp = np.zeros(npts, dtype=bool)
        in_sp[cs.lambda_action[sinv][cs.p]] = True
        for g in range(cs.gamma.order):
            pts = cs.gamma_translate_p(g)
            mask = in_sp[pts]
            if mask.any():
                vals[s] += f.values[g] * float(w[pts][mask].sum())
    return GroupFunction(cs.lam, vals)


def induce_witness(cs: CouplingSpace, phi: GroupFunction,
                   w: FactorizationWitness, tol: float = 1e-10
                   ) -> FactorizationWitness:
    """Transport a d-fold witness for a lambda-group function to the gamma
    group without norm growth.

    New spaces tensor the weighted functions supported on the domain with the
    old ones; each map sums the old maps against the domain moved by the
    joint action, so factor norms do not grow and the transported witness
    certifies the induced function.
    """
    lam_grp = cs.lam
    if w.carrier is not lam_grp:
        raise ValueError("witness must certify a function on the lambda group")
    if sorted(w.acting_set) != list(range(lam_grp.order)):
        raise ValueError("witness must cover the whole lambda group")
    from .norms import verify_factorization, exhaustive_tuples
    tuples = exhaustive_tuples(w.acting_set, w.d, limit=100000)
    resid, _ = verify_factorization(phi, w, tuples)
    if resid > tol:
        raise ValueError("uncertified input witness")
    d = w.d
    pw = cs.space.weight[cs.p]
    sqw = np.sqrt(pw)
    psize = len(cs.p)
    ppos = {int(x): i for i, x in enumerate(cs.p)}
    dims = [1] + [psize * w.dims[j] for j in range(1, d)] + [1]
    # matrices are stored in orthonormal coordinates of the weighted domain
    # space; the actions preserve weights, so only the two ends see the
    # weight scalings.  move(s, i) is the domain position of the moved domain
    # point (g, s).p_i when it stays inside the domain.
    xi = [dict() for _ in range(d)]
    for g in range(cs.gamma.order):
        move = np.empty((lam_grp.order, psize), dtype=np.int64)
        hit = np.zeros((lam_grp.order, psize), dtype=bool)
        for s in range(lam_grp.order):
            pts = cs.lambda_action[s][cs.gamma_action[g][cs.p]]
            for i, x in enumerate(pts):
                j = ppos.get(int(x))
                if j is not None:
                    move[s, i] = j
                    hit[s, i] = True
        # xi_d: 1 -> l2(p, w) (x) H_{d-1}: the indicator of p meet (g,s)p
        col = np.zeros((psize, w.dims[d - 1]), dtype=np.complex128)
        for s in range(lam_grp.order):
            src = np.nonzero(hit[s])[0]
            if src.size:
                col[move[s, src], :] += w.xi[d - 1][s][:, 0][None, :]
        col *= sqw[:, None]
        xi[d - 1][g] = col.reshape(psize * w.dims[d - 1], 1)
        # middle maps: (F (x) u) -> sum_s restrict(moved F) (x) xi_i(s) u
        for i in range(1, d - 1):
            A = np.zeros((psize, psize, w.dims[i], w.dims[i + 1]),
                         dtype=np.complex128)
            for s in range(lam_grp.order):
                src = np.nonzero(hit[s])[0]
                for j in src:
                    A[move[s, j], j, :, :] += w.xi[i][s]
            xi[i][g] = A.transpose(0, 2, 1, 3).reshape(
                psize * w.dims[i], psize * w.dims[i + 1])
        # xi_1: weighted trace against the domain then the old read
        row = np.zeros((1, psize, w.dims[1]), dtype=np.complex128)
        for s in range(lam_grp.order):
            src = np.nonzero(hit[s])[0]
            if src.size:
                contrib = np.zeros(psize)
                contrib[src] = sqw[src]
                row[0, :, :] += contrib[:, None] * w.xi[0][s][None, 0, :]
        xi[0][g] = row.reshape(1, psize * w.dims[1])
    return FactorizationWitness(d, dims, xi, list(range(cs.gamma.order)),
                                cs.gamma)


@dataclass
class FixedAlgebra:
    """Gamma-orbit structure with the compressed trace."""

    orbits: list[np.ndarray]
    orbit_of: np.ndarray
    tau: np.ndarray


def fixed_algebra(cs: CouplingSpace) -> FixedAlgebra:
    npts = cs.space.n_points
    orbit_of = np.full(npts, -1, dtype=np.int64)
    orbits = []
    in_q = np.zeros(npts, dtype=bool)
    in_q[cs.q] = True
    for x in range(npts):
        if orbit_of[x] >= 0:
            continue
        orb = sorted(set(int(cs.gamma_action[g][x]) for g in range(cs.gamma.order)))
        oid = len(orbits)
        for y in orb:
            orbit_of[y] = oid
        orbits.append(np.array(orb, dtype=np.int64))
    tau = np.array([
        float(cs.space.weight[orb[in_q[orb]]].sum()) for orb in orbits])
    return FixedAlgebra(orbits, orbit_of, tau)


@dataclass
class KoopmanReport:
    unitarity_defect: float
    intertwining_defect: float
    coefficient_defect: float
    norm_certificate_gap: float
    passed: bool


def koopman_check(cs: CouplingSpace, phi: GroupFunction | None = None,
                  threshold: float = 1e-10) -> KoopmanReport:
    """Verify the domain-indexed unitary between the amplified regular
    representation and the action on the weighted point space.

    The map sends a group basis vector tensor an orbit function to the
    translated-domain cutdown of that function; it must be unitary and
    intertwine left translation with the point action.  Optionally also
    verifies the coefficient transport certificate for a supplied function.
    """
    fa = fixed_algebra(cs)
    npts = cs.space.n_points
    norb = len(fa.orbits)
    ng = cs.gamma.order
    w = cs.space.weight
    # F: l2(gamma) (x) L2(orbits, tau) -> L2(points, w)
    F = np.zeros((npts, ng * norb))
    in_q = np.zeros(npts, dtype=bool)
    in_q[cs.q] = True
    for g in range(ng):
        moved_q = cs.gamma_action[g][cs.q]
        for oi, orb in enumerate(fa.orbits):
            col = np.zeros(npts)
            for x in cs.q:
                if fa.orbit_of[x] == oi:
                    col[cs.gamma_action[g][x]] = 1.0
            F[:, g * norb + oi] = col
    # weighted inner products
    D = np.diag(w)
    tau_diag = np.repeat(fa.tau, 1)
    Dsrc = np.diag(np.concatenate([tau_diag for _ in range(ng)]))
    gram = F.T @ D @ F
    unit = float(np.abs(gram - Dsrc).max())
    inter = 0.0
    for g in range(ng):
        # sigma0(g) F = F (lambda_gamma(g) (x) id)
        P = np.zeros((npts, npts))
        P[cs.gamma_action[g], np.arange(npts)] = 1.0
        lamg = np.zeros((ng, ng))
        lamg[cs.gamma.table[g, :], np.arange(ng)] = 1.0
        right = F @ np.kron(lamg, np.eye(norb))
        inter = max(inter, float(np.abs(P @ F - right).max()))
    coeff_defect = 0.0
    norm_gap = 0.0
    if phi is not None:
        from .norms import regular_realization
        xi_vec, eta_vec = regular_realization(cs.lam, phi)
        xhat = np.zeros(npts, dtype=np.complex128)
        ehat = np.zeros(npts, dtype=np.complex128)
        for s in range(cs.lam.order):
            pts = cs.lambda_action[cs.lam.inv(s)][cs.p]
            xhat[pts] += xi_vec[s]
            ehat[pts] += eta_vec[s]
        phih = induce(cs, phi)
        for g in range(ng):
            moved = xhat[cs.gamma_action[cs.gamma.inv(g)]]
            val = np.sum(w * moved * np.conj(ehat))
            coeff_defect = max(coeff_defect, abs(val - phih.values[g]))
        n_x = float(np.sqrt(np.sum(w * np.abs(xhat) ** 2)))
        n_e = float(np.sqrt(np.sum(w * np.abs(ehat) ** 2)))
        norm_gap = abs(n_x * n_e - float(np.linalg.norm(xi_vec)
                                         * np.linalg.norm(eta_vec)))
    passed = unit <= threshold and inter <= threshold \
        and coeff_defect <= max(threshold, 1e-9) and norm_gap <= max(threshold, 1e-9)
    return KoopmanReport(unit, inter, coeff_defect, norm_gap, passed)


def lattice_induce(big: FiniteGroup, gamma_elements: list[int],
                   transversal: list[int], phi: GroupFunction
                   ) -> GroupFunction:
    """Average a subgroup function over a transversal: the value at g is the
    mean over the transversal of the function at the subgroup part of g w.

    Every element must factor uniquely as (transversal element) * (subgroup
    element); the result coincides with the coupling-based induction.
    """
    gam, embed = subgroup(big, gamma_elements)
    if phi.carrier.size != gam.order:
        raise ValueError("function must live on the subgroup")
    pos_in_gamma = {e: i for i, e in enumerate(embed)}
    omega = [int(x) for x in transversal]
    # validate unique factorization g = w * gamma
    factor_gamma = np.full(big.order, -1, dtype=np.int64)
    for wviz in omega:
        for gi, ge in enumerate(embed):
            g = big.mul(wviz, ge)
            if factor_gamma[g] >= 0:
                raise ValueError("not a transversal: duplicate factorization")
            factor_gamma[g] = gi
    if np.any(factor_gamma < 0):
        raise ValueError("not a transversal: missing elements")
    vals = np.empty(big.order, dtype=np.complex128)
    for g in range(big.order):
        acc = 0.0 + 0.0j
        for wviz in omega:
            acc += phi.values[factor_gamma[big.mul(g, wviz)]]
        vals[g] = acc / len(omega)
    return GroupFunction(big, vals)


def lattice_coupling(big: FiniteGroup, gamma_elements: list[int],
                     transversal: list[int]
                     ) -> tuple[CouplingSpace, FiniteGroup, list[int]]:
    """The coupling whose induction realizes the transversal average.

    Points are the big group with the big group acting by left translation
    (the gamma role) and the subgroup acting by inverse right translation
    (the lambda role); the transversal is the lambda domain and the identity
    the gamma domain.
    """
    gam, embed = subgroup(big, gamma_elements)
    npts = big.order
    ga = np.empty((big.order, npts), dtype=np.int64)
    for g in range(big.order):
        ga[g] = big.table[g, :]
    la = np.empty((gam.order, npts), dtype=np.int64)
    for gi in range(gam.order):
        ginv = big.inv(embed[gi])
        la[gi] = big.table[:, ginv]
    weights = np.full(npts, 1.0 / len(transversal))
    space = TracedSpace(npts, weights)
    cs = CouplingSpace(space, big, ga, gam, la,
                       np.asarray(transversal, dtype=np.int64),
                       np.array([big.identity], dtype=np.int64))
    return cs, gam, embed
