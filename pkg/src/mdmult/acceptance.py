"""The gate suite: every exit criterion as a runnable check.

Each criterion returns a result with pass/fail, measured defects, and timing;
``run_all`` executes them in order and is what both the command-line
``verify-all`` and the test suite drive.  Quick mode shrinks sample counts but
never loosens a tolerance.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .constructions import (coefficient_witness, fejer, fejer_net_report,
                            haagerup_family, haagerup_tail, tree_witness)
from .coupling import (induce, induce_dual, induce_witness, koopman_check,
                       lattice_coupling, lattice_induce, me_coupling,
                       subgroup_coupling)
from .groups import (FiniteGroup, GroupFunction, IntegerWindow, constant,
                     cyclic_group, dihedral_group, free_ball, random_function,
                     random_pd_function, subgroup_elements, symmetric_group)
from .norms import (a_norm, b_norm, coefficient_upper_bound, exhaustive_tuples,
                    is_pd_function, m2_norm, pairing, verify_factorization)
from .numerics import (SolveOptions, dft_l1_norm, schur_norm,
                       schur_norm_oracle, trace_min)


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    details: dict
    elapsed_s: float


def _result(index, name, passed, details, t0) -> CriterionResult:
    return CriterionResult(index, name, bool(passed), details,
                           round(time.time() - t0, 3))


def shipped_couplings() -> list[tuple[str, object, FiniteGroup]]:
    """The four gate couplings: (label, coupling, lambda group)."""
    z4 = cyclic_group(4)
    cs_z = subgroup_coupling(z4, [0, 2], "Z2<=Z4")[0]
    s3 = symmetric_group(3)
    order3 = [g for g in range(6)
              if g != s3.identity and s3.mul(g, s3.mul(g, g)) == s3.identity]
    a3 = subgroup_elements(s3, [order3[0]])
    cs_c3 = subgroup_coupling(s3, a3, "Z3<=S3")[0]
    cs_a3 = subgroup_coupling(s3, a3, "A3<=S3")[0]
    cs_me = me_coupling(
        np.ones(6), cyclic_group(2),
        np.array([np.arange(6), (np.arange(6) + 3) % 6]),
        cyclic_group(3),
        np.array([np.arange(6), (np.arange(6) + 2) % 6, (np.arange(6) + 4) % 6]),
        [0, 1], [0, 1, 2])
    return [("Z2<=Z4", cs_z, z4), ("Z3<=S3", cs_c3, s3),
            ("A3<=S3", cs_a3, s3), ("Z2/Z3 on 6 points", cs_me, cs_me.lam)]


def criterion_1(quick: bool, seed: int) -> CriterionResult:
    """Fejer terms exact, unit certificates exact, net evidence 1."""
    t0 = time.time()
    n_max = 160
    window = IntegerWindow(n_max)
    exact = True
    cert_exact = True
    for n in range(1, n_max + 1):
        term = fejer(n, window)
        for i in range(window.size):
            m = window.value(i)
            want = (n - abs(m)) / n if abs(m) < n else 0.0
            if term.phi(i) != want:
                exact = False
        if term.norm_sq_exact() != 1.0:
            cert_exact = False
    evidence = {}
    converged = True
    reached = 0
    for d in (2, 3, 4):
        rep = fejer_net_report(d, window_radius=8, threshold=0.05)
        evidence[d] = rep.constant_evidence
        converged = converged and rep.converged
        reached = max(reached, rep.terms[-1].parameter["n"])
    passed = exact and cert_exact and converged and reached == 160 \
        and all(v == 1.0 for v in evidence.values())
    return _result(1, "fejer net on the integers", passed, {
        "values_exact": exact, "certificates_exact": cert_exact,
        "net_converged": converged, "terms_needed": reached,
        "evidence": {str(k): v for k, v in evidence.items()},
    }, t0)


def criterion_2(quick: bool, seed: int) -> CriterionResult:
    """Tree witnesses: residuals, factor norms, bounds over the grid."""
    t0 = time.time()
    grid = [(n, d) for n in range(0, 4) for d in (2, 3, 4)]
    if quick:
        grid = [(0, 2), (1, 3), (2, 2), (1, 4)]
    rows = []
    passed = True
    for n, d in grid:
        ball = free_ball(2, n + d)
        fam = tree_witness(ball, n, d, acting_radius=1)
        nrm = fam.factor_norms
        mids_ok = all(abs(x - 1.0) <= 1e-12 for x in nrm[1:-1])
        ends_ok = nrm[0] <= math.sqrt(n + 1) + 1e-9 \
            and nrm[-1] <= math.sqrt(n + 1) + 1e-9
        chi_cap = 2 * n if n >= 1 else 1
        ok = fam.residual <= 1e-12 and mids_ok and ends_ok \
            and fam.bound <= n + 1 + 1e-9 and fam.chi_bound <= chi_cap + 1e-9
        passed = passed and ok
        rows.append({"n": n, "d": d, "residual": fam.residual,
                     "factor_norms": nrm, "bound": fam.bound,
                     "chi_bound": fam.chi_bound, "ok": ok})
    return _result(2, "tree factorization witnesses", passed,
                   {"grid": rows}, t0)


def criterion_3(quick: bool, seed: int) -> CriterionResult:
    """Heat kernels positive definite; tails decreasing and closed-form."""
    t0 = time.time()
    ts = (0.1, 0.5, 1.0, 2.0)
    pd_ok = True
    ball2 = free_ball(2, 6)
    line = free_ball(1, 12)
    for t in ts:
        fam = haagerup_family(ball2, 3, t, verify_pd=True)
        pd_ok = pd_ok and fam.pd_checked
        fam = haagerup_family(line, 6, t, verify_pd=True)
        pd_ok = pd_ok and fam.pd_checked
    tail_ok = True
    worst_gap = 0.0
    for t in ts:
        prev = np.inf
        for n in range(0, 25):
            tl = haagerup_tail(n, t)
            if tl > prev + 1e-12:
                tail_ok = False
            prev = tl
        partial = sum(2 * k * math.exp(-t * k) for k in range(11, 10001))
        worst_gap = max(worst_gap, abs(haagerup_tail(10, t) - partial))
    tail_ok = tail_ok and worst_gap <= 1e-10
    passed = pd_ok and tail_ok
    return _result(3, "positive-definite heat kernels and tails", passed, {
        "pd_ok": pd_ok, "tails_monotone_and_closed_form": tail_ok,
        "closed_form_gap": worst_gap,
    }, t0)


def criterion_4(quick: bool, seed: int) -> CriterionResult:
    """Schur engine against structured truths and the factorization oracle."""
    t0 = time.time()
    rng = np.random.default_rng(seed)
    sizes = range(1, 25) if not quick else (4, 12, 24)
    perm_err = 0.0
    for nsz in sizes:
        P = np.eye(nsz)[rng.permutation(nsz)]
        perm_err = max(perm_err, abs(schur_norm(P).value - 1.0))
    n_rank1 = 50 if not quick else 10
    rank1_err = 0.0
    for _ in range(n_rank1):
        m = int(rng.integers(2, 9))
        k = int(rng.integers(2, 9))
        u = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        v = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        M = np.outer(u, v.conj())
        want = float(np.abs(u).max() * np.abs(v).max())
        rank1_err = max(rank1_err, abs(schur_norm(M).value - want))
    n_herm = 20 if not quick else 5
    worst_rel = 0.0
    for i in range(n_herm):
        A = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        A = 0.5 * (A + A.conj().T)
        val = schur_norm(A).value
        oracle = schur_norm_oracle(A, restarts=8,
                                   opts=SolveOptions(seed=seed + i))
        worst_rel = max(worst_rel, abs(oracle - val) / max(val, 1e-30))
    passed = perm_err <= 1e-6 and rank1_err <= 1e-6 and worst_rel <= 1e-3
    return _result(4, "schur engine", passed, {
        "permutation_error": perm_err, "rank_one_error": rank1_err,
        "oracle_relative_gap": worst_rel,
    }, t0)


def criterion_5(quick: bool, seed: int) -> CriterionResult:
    """Trace-norm values against the abelian transform; realizations close."""
    t0 = time.time()
    rng = np.random.default_rng(seed)
    n_fns = 50 if not quick else 10
    worst_dft = 0.0
    worst_gap = 0.0
    for G in (cyclic_group(5), cyclic_group(6)):
        for _ in range(n_fns):
            phi = random_function(G, rng)
            b = b_norm(phi, G)
            worst_dft = max(worst_dft, abs(b - dft_l1_norm(G, phi)))
            a = a_norm(phi, G)  # raises if the cross-check gap exceeds 1e-4
            worst_gap = max(worst_gap, abs(a - b) / max(b, 1e-12))
    pd_err = 0.0
    for G in (cyclic_group(5), symmetric_group(3)):
        for _ in range(5 if quick else 20):
            phi = random_pd_function(G, rng)
            pd_err = max(pd_err, abs(b_norm(phi, G) - 1.0))
    passed = worst_dft <= 1e-6 and pd_err <= 1e-6 and worst_gap <= 1e-4
    return _result(5, "coefficient norms", passed, {
        "dft_gap": worst_dft, "pd_error": pd_err,
        "realization_gap": worst_gap,
    }, t0)


def criterion_6(quick: bool, seed: int) -> CriterionResult:
    """Norm chain: the d=2 lower end below every upper certificate."""
    t0 = time.time()
    rng = np.random.default_rng(seed)
    n_fns = 100 if not quick else 20
    worst = -np.inf
    worst_wit = -np.inf
    for G in (cyclic_group(6), dihedral_group(4), symmetric_group(3)):
        for _ in range(n_fns):
            phi = random_function(G, rng)
            rep = m2_norm(phi)
            b = b_norm(phi, G)
            worst = max(worst, rep.lower - b)
            w = coefficient_witness(G, phi, 2)
            tups = exhaustive_tuples(w.acting_set, 2)
            resid, bound = verify_factorization(phi, w, tups)
            if resid <= 1e-9 * max(1.0, phi.norm_inf()):
                worst_wit = max(worst_wit, rep.lower - bound)
    passed = worst <= 1e-6 and worst_wit <= 1e-6
    return _result(6, "norm chain sandwich", passed, {
        "max_lower_minus_b": worst, "max_lower_minus_witness": worst_wit,
    }, t0)


def criterion_7(quick: bool, seed: int) -> CriterionResult:
    """Induction decreases the d=2 norm; the constant one is fixed."""
    t0 = time.time()
    rng = np.random.default_rng(seed)
    n_fns = 50 if not quick else 10
    opts = SolveOptions(tolerance=2e-8)
    worst = -np.inf
    one_exact = True
    for label, cs, lam in shipped_couplings():
        one_hat = induce(cs, constant(lam))
        if not np.all(one_hat.values == 1.0):
            one_exact = False
        for _ in range(n_fns):
            phi = random_function(lam, rng)
            phih = induce(cs, phi)
            worst = max(worst,
                        m2_norm(phih, opts).value - m2_norm(phi, opts).value)
    passed = worst <= 1e-6 and one_exact
    return _result(7, "induction monotonicity at d=2", passed, {
        "max_norm_increase": worst, "unit_fixed_exactly": one_exact,
    }, t0)


def criterion_8(quick: bool, seed: int) -> CriterionResult:
    """Witness transport: residuals and bounds preserved for d in 2..4."""
    t0 = time.time()
    rng = np.random.default_rng(seed)
    n_fns = 10 if not quick else 3
    worst_resid = 0.0
    worst_gap = -np.inf
    for label, cs, lam in shipped_couplings():
        for d in (2, 3, 4):
            for _ in range(n_fns):
                phi = random_pd_function(lam, rng)
                w = coefficient_witness(lam, phi, d)
                what = induce_witness(cs, phi, w)
                phih = induce(cs, phi)
                tups = exhaustive_tuples(what.acting_set, d)
                resid, bound = verify_factorization(phih, what, tups)
                worst_resid = max(worst_resid, resid)
                worst_gap = max(worst_gap, bound - w.bound())
    passed = worst_resid <= 1e-9 and worst_gap <= 1e-6
    return _result(8, "witness transport", passed, {
        "max_residual": worst_resid, "max_bound_increase": worst_gap,
    }, t0)


def criterion_9(quick: bool, seed: int) -> CriterionResult:
    """Coefficient-norm transport and the domain-indexed unitary."""
    t0 = time.time()
    rng = np.random.default_rng(seed)
    n_fns = 50 if not quick else 10
    worst = -np.inf
    defects = 0.0
    for label, cs, lam in shipped_couplings():
        rep = koopman_check(cs, random_pd_function(lam, rng))
        defects = max(defects, rep.unitarity_defect, rep.intertwining_defect)
        for _ in range(n_fns):
            phi = random_function(lam, rng)
            phih = induce(cs, phi)
            worst = max(worst, a_norm(phih, cs.gamma) - a_norm(phi, lam))
    passed = worst <= 1e-6 and defects <= 1e-10
    return _result(9, "coefficient-norm transport", passed, {
        "max_norm_increase": worst, "max_koopman_defect": defects,
    }, t0)


def criterion_10(quick: bool, seed: int) -> CriterionResult:
    """Predual transport: mass preservation and adjointness."""
    t0 = time.time()
    rng = np.random.default_rng(seed)
    n_pairs = 50 if not quick else 10
    worst_mass = 0.0
    worst_adj = 0.0
    for label, cs, lam in shipped_couplings():
        for _ in range(n_pairs):
            f = random_function(cs.gamma, rng)
            fpos = GroupFunction(cs.gamma, np.abs(f.values))
            g = induce_dual(cs, fpos)
            worst_mass = max(worst_mass, abs(g.norm_l1() - fpos.norm_l1()))
            phi = random_function(lam, rng)
            lhs = pairing(induce(cs, phi), f)
            rhs = pairing(phi, induce_dual(cs, f))
            worst_adj = max(worst_adj, abs(lhs - rhs))
    passed = worst_mass <= 1e-12 and worst_adj <= 1e-12
    return _result(10, "predual transport", passed, {
        "max_mass_gap": worst_mass, "max_adjointness_gap": worst_adj,
    }, t0)


def criterion_11(quick: bool, seed: int) -> CriterionResult:
    """Transversal averaging coincides with the coupling induction."""
    t0 = time.time()
    rng = np.random.default_rng(seed)
    n_fns = 50 if not quick else 10
    worst = 0.0
    s3 = symmetric_group(3)
    order3 = [g for g in range(6)
              if g != s3.identity and s3.mul(g, s3.mul(g, g)) == s3.identity]
    a3 = subgroup_elements(s3, [order3[0]])
    odd = [g for g in range(6) if g not in a3]
    cases = [(s3, a3, [s3.identity, odd[0]]),
             (cyclic_group(4), [0, 2], [0, 1])]
    for big, sub, omega in cases:
        cs, gam, embed = lattice_coupling(big, sub, omega)
        for _ in range(n_fns):
            phi = random_function(gam, rng)
            via_avg = lattice_induce(big, sub, omega, phi)
            via_cs = induce(cs, phi)
            worst = max(worst, float(np.abs(via_avg.values
                                            - via_cs.values).max()))
    passed = worst <= 1e-12
    return _result(11, "lattice coincidence", passed,
                   {"max_gap": worst}, t0)


def criterion_12(quick: bool, seed: int) -> CriterionResult:
    """Reports are byte-deterministic; a stubbed solver fails the gate."""
    t0 = time.time()
    from .reports import RunReport

    def mini_run() -> str:
        parts = {}
        for c in (criterion_1, criterion_3):
            r = c(True, seed)
            parts[r.name] = {"passed": r.passed, "details": r.details}
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((4, 4))
        parts["probe"] = {"schur": schur_norm(A).value}
        return RunReport("verify-all --determinism-probe", {"seed": seed},
                         seed, {"tol": 1e-7}, parts).to_json()

    b1 = mini_run()
    b2 = mini_run()
    deterministic = b1 == b2
    prev = numerics.FAULT_MODE
    try:
        numerics.FAULT_MODE = "max-entry"
        faulted = criterion_4(True, seed)
    finally:
        numerics.FAULT_MODE = prev
    fault_detected = not faulted.passed
    passed = deterministic and fault_detected
    return _result(12, "determinism and fault detection", passed, {
        "byte_deterministic": deterministic,
        "fault_detected": fault_detected,
    }, t0)


ALL_CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4,
                criterion_5, criterion_6, criterion_7, criterion_8,
                criterion_9, criterion_10, criterion_11, criterion_12]


def run_all(quick: bool = False, seed: int = 0,
            skip: set[int] = frozenset()) -> list[CriterionResult]:
    results = []
    for fn in ALL_CRITERIA:
        idx = int(fn.__name__.split("_")[1])
        if idx in skip:
            continue
        results.append(fn(quick, seed))
    return results
