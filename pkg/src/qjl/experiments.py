"""One experiment per claim, each returning a JSON-ready record.

Every ``run_*`` function takes a validated params model, a master seed and a
worker count, and returns a dict with at least ``passed``, ``analytic_bounds``,
``results`` and ``csv_rows``. Worker count never changes the output.
"""
from __future__ import annotations

import math
from functools import partial

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.stats import ks_2samp, norm

from . import concentration as conc
from ._validation import is_power_of_two
from .circuits import generate_local_random_circuit
from .designs import (
    FiniteDesign,
    balanced_monomials,
    estimate_tpe_lambda,
    iterate_design,
    monomial_design_error,
    pauli_group,
    single_qubit_clifford_group,
)
from .jl import pairwise_preservation_report
from .linalg import BlockStructure, basis_state, inner_product, l1_distance, polarization_inner_product
from .parallel import map_trials
from .pir import PirParams, UnitaryDescriptor, privacy_metric, run_protocol
from .sampling import (
    HaarRestriction,
    RngStream,
    derive_seed,
    sample_chi_square_sum,
    sample_haar_unit_vector,
    sample_haar_unitaries,
)

ONE_SIDED_Z99 = float(norm.ppf(0.99))


class Params(BaseModel):
    model_config = ConfigDict(extra="forbid")


def _check_blocks(d1: int, d2: int):
    BlockStructure(d1, d2)


# ---------------------------------------------------------------- chi-tails


class ChiTailsParams(Params):
    cases: list[tuple[int, float]] = Field(default_factory=lambda: [(16, 1.0), (64, 0.5)], min_length=1)
    trials: int = Field(100_000, ge=100)

    @model_validator(mode="after")
    def _cases(self):
        for n, eps in self.cases:
            if n < 1 or not eps > 0:
                raise ValueError("each case needs n >= 1 and eps > 0")
        return self


def _chi_sample(n: int, stream: RngStream) -> float:
    return sample_chi_square_sum(n, stream)


def run_chi_tails(p: ChiTailsParams, seed: int, workers: int = 1) -> dict:
    reports, bounds, rows = [], [], []
    for k, (n, eps) in enumerate(p.cases):
        bound = conc.chi_square_tail_bound(n, eps)
        band = ((1 - eps) * n, (1 + eps) * n)
        rep = conc.empirical_tail(partial(_chi_sample, n), band, p.trials, derive_seed(seed, k),
                                  bound.sharp, workers)
        reports.append({"n": n, "eps": eps, **rep.to_dict()})
        bounds.append({"n": n, "eps": eps, "sharp": bound.sharp, "simplified": bound.simplified})
        rows.append({"n": n, "eps": eps, **rep.to_dict()})
    return {
        "passed": all(r["passed"] for r in reports),
        "analytic_bounds": {"cases": bounds},
        "results": {"tails": reports},
        "csv_rows": rows,
    }


# ---------------------------------------------------------------- haar-tails


class HaarTailsParams(Params):
    d1: int = Field(1024, ge=2)
    d2: int = Field(64, ge=1)
    eps: float = Field(1.0, gt=0)
    trials: int = Field(2000, ge=100)
    mean_trials: int = Field(10_000, ge=100)
    block: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _blocks(self):
        bs = BlockStructure(self.d1, self.d2)
        if self.block > bs.num_blocks:
            raise ValueError(f"block must lie in [1, {bs.num_blocks}]")
        return self


def _haar_block_norm(d1: int, d2: int, block: int, stream: RngStream) -> float:
    """``|Pi_block U e_1|`` for a Haar ``U`` restricted to ``span{e_1}``."""
    v = basis_state(d1, 1)
    w = HaarRestriction(v, stream)(v)
    return float(np.linalg.norm(w[(block - 1) * d2 : block * d2]))


def haar_block_norms(d1: int, d2: int, trials: int, seed: int, block: int = 1, workers: int = 1) -> np.ndarray:
    return map_trials(partial(_haar_block_norm, d1, d2, block), trials, seed, workers)


def _band(d1: int, d2: int, eps: float) -> tuple[float, float]:
    scale = math.sqrt(d2 / d1)
    return (1 - eps) * scale, (1 + eps) * scale


def run_haar_tails(p: HaarTailsParams, seed: int, workers: int = 1) -> dict:
    bound = conc.haar_projection_tail_bound(p.d2, p.eps)
    norms = haar_block_norms(p.d1, p.d2, p.trials, seed, p.block, workers)
    report = conc.tail_report(norms, _band(p.d1, p.d2, p.eps), bound)
    sq = haar_block_norms(p.d1, p.d2, p.mean_trials, derive_seed(seed, 1), p.block, workers) ** 2
    mean, se = float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(len(sq)))
    target = p.d2 / p.d1
    mean_ok = abs(mean - target) <= 3 * se
    return {
        "passed": report.passed and mean_ok,
        "analytic_bounds": {"tail": bound, "mean_square": target},
        "results": {
            "tail": report.to_dict(),
            "mean_square": {"mean": mean, "stderr": se, "target": target, "within_3se": mean_ok},
        },
        "csv_rows": [{"d1": p.d1, "d2": p.d2, "eps": p.eps, **report.to_dict(),
                      "mean_square": mean, "mean_square_stderr": se}],
    }


# -------------------------------------------------------------- design-tails


class DesignTailsParams(Params):
    q: int = Field(10, ge=2, le=20)
    d2: int = Field(64, ge=1)
    eps: float = Field(1.0, gt=0)
    sizes: list[int] = Field(default_factory=lambda: [250, 1000, 4000])
    trials: int = Field(2000, ge=100)

    @model_validator(mode="after")
    def _shape(self):
        BlockStructure(2**self.q, self.d2)
        if not is_power_of_two(self.d2):
            raise ValueError("d2 must be a power of two for circuit experiments")
        if not self.sizes or sorted(set(self.sizes)) != list(self.sizes) or self.sizes[0] < 0:
            raise ValueError("sizes must be distinct, increasing and nonnegative")
        return self


def _circuit_block_norms(q: int, d2: int, sizes: tuple, stream: RngStream) -> list[float]:
    """Block-1 norm of ``C|0...0>`` after each prefix length in ``sizes``."""
    circuit = generate_local_random_circuit(q, sizes[-1], stream)
    state = basis_state(2**q, 1)
    out, done = [], 0
    for s in sizes:
        state = circuit.segment(done, s).apply(state)
        done = s
        out.append(float(np.linalg.norm(state[:d2])))
    return out


def run_design_tails(p: DesignTailsParams, seed: int, workers: int = 1) -> dict:
    d1 = 2**p.q
    band = _band(d1, p.d2, p.eps)
    design_bound = conc.design_projection_tail_bound(p.d2, p.eps) if p.eps < 1 else None
    haar_bound = conc.haar_projection_tail_bound(p.d2, p.eps)
    haar = haar_block_norms(d1, p.d2, p.trials, seed, 1, workers)
    haar_report = conc.tail_report(haar, band, haar_bound)
    circ = map_trials(partial(_circuit_block_norms, p.q, p.d2, tuple(p.sizes)), p.trials,
                      derive_seed(seed, 2), workers).reshape(p.trials, len(p.sizes))
    per_size, rows = [], []
    for k, s in enumerate(p.sizes):
        rep = conc.tail_report(circ[:, k], band, design_bound)
        ks = float(ks_2samp(circ[:, k], haar).statistic)
        se = math.sqrt(rep.standard_error**2 + haar_report.standard_error**2)
        gap = abs(rep.empirical_rate - haar_report.empirical_rate)
        entry = {"size": s, "tail": rep.to_dict(), "ks_vs_haar": ks,
                 "rate_gap_vs_haar": gap, "gap_stderr": se, "within_2se": gap <= 2 * se}
        per_size.append(entry)
        rows.append({"size": s, "empirical_rate": rep.empirical_rate, "haar_rate": haar_report.empirical_rate,
                     "ks_vs_haar": ks, "within_2se": gap <= 2 * se})
    ks_values = [e["ks_vs_haar"] for e in per_size]
    monotone = all(b < a for a, b in zip(ks_values, ks_values[1:]))
    largest_ok = per_size[-1]["within_2se"]
    return {
        "passed": bool(monotone and largest_ok and haar_report.passed),
        "analytic_bounds": {"design_tail": design_bound, "haar_tail": haar_bound},
        "results": {"haar": haar_report.to_dict(), "circuits": per_size,
                    "ks_monotone_decreasing": monotone, "largest_size_within_2se": largest_ok},
        "csv_rows": rows,
    }


# ------------------------------------------------------------------- moments


class MomentsParams(Params):
    d1: int = Field(1024, ge=2)
    d2: int = Field(64, ge=1)
    m: int = Field(1, ge=1, le=conc.MAX_EMPIRICAL_M)
    trials: int = Field(10_000, ge=1000)

    @model_validator(mode="after")
    def _blocks(self):
        _check_blocks(self.d1, self.d2)
        return self


MARKOV_GRID = {
    "d1": [2**10, 2**20, 2**40],
    "d2": [2**6, 2**10, 2**16],
    "eps": [0.1, 0.5, 0.9],
    "m": [1, 4, 16],
    "lambda_log": [-10.0, -1000.0],
}


def markov_consistency(grid: dict = MARKOV_GRID) -> dict:
    """Largest relative gap between the two written forms of the Markov bound."""
    worst, checked = 0.0, 0
    for d1 in grid["d1"]:
        for d2 in grid["d2"]:
            if d2 >= d1:
                continue
            for eps in grid["eps"]:
                for m in grid["m"]:
                    for lam in grid["lambda_log"] + [conc.required_lambda_log(d1, d2, eps, m)]:
                        a = conc.markov_tail_bound_log(d1, d2, eps, m, lam)
                        b = conc.markov_tail_bound_expanded_log(d1, d2, eps, m, lam)
                        worst = max(worst, abs(math.expm1(a - b)))
                        checked += 1
    return {"points": checked, "max_relative_error": worst}


def run_moments(p: MomentsParams, seed: int, workers: int = 1) -> dict:
    norms = haar_block_norms(p.d1, p.d2, p.trials, seed, 1, workers)
    g = norms**2 - p.d2 / p.d1
    f = norms - math.sqrt(p.d2 / p.d1)
    est_g = conc.moment_estimate(g, 2 * p.m)
    est_f = conc.moment_estimate(f, 2 * p.m)
    bound_g = conc.moment_bound_g(p.d1, p.d2, p.m)
    bound_f = conc.moment_bound_f(p.d1, p.m)
    g_ok = est_g.mean - ONE_SIDED_Z99 * est_g.stderr <= bound_g
    f_ok = est_f.mean - ONE_SIDED_Z99 * est_f.stderr <= bound_f
    markov = markov_consistency()
    markov_ok = markov["max_relative_error"] <= 1e-12
    return {
        "passed": bool(g_ok and f_ok and markov_ok),
        "analytic_bounds": {"moment_g": bound_g, "moment_f": bound_f},
        "results": {
            "g": {**est_g._asdict(), "bound": bound_g, "passed": bool(g_ok)},
            "f": {**est_f._asdict(), "bound": bound_f, "passed": bool(f_ok)},
            "markov_consistency": {**markov, "passed": markov_ok},
        },
        "csv_rows": [
            {"quantity": "g", "mean": est_g.mean, "stderr": est_g.stderr, "bound": bound_g, "passed": bool(g_ok)},
            {"quantity": "f", "mean": est_f.mean, "stderr": est_f.stderr, "bound": bound_f, "passed": bool(f_ok)},
        ],
    }


# ------------------------------------------------------------ design-quality


class DesignQualityParams(Params):
    random_design_size: int = Field(4, ge=1, le=64)
    iterations: int = Field(2, ge=2, le=4)


def run_design_quality(p: DesignQualityParams, seed: int, workers: int = 1) -> dict:
    pauli = FiniteDesign.from_unitaries(pauli_group())
    clifford = FiniteDesign.from_unitaries(single_qubit_clifford_group())
    lam_pauli = estimate_tpe_lambda(pauli, 1)
    lam_clifford = estimate_tpe_lambda(clifford, 2)
    rand = FiniteDesign.from_unitaries(sample_haar_unitaries(p.random_design_size, 2, RngStream(seed)))
    lam_base = estimate_tpe_lambda(rand, 1)
    lam_iter = estimate_tpe_lambda(iterate_design(rand, p.iterations), 1)
    squaring_ok = lam_iter <= lam_base**p.iterations + 1e-8
    monomial_gaps = [monomial_design_error(pauli, mono, 1).gap for mono in balanced_monomials(2, 1)]
    identity_gap = monomial_design_error(FiniteDesign.from_unitaries(np.eye(2)), ([(1, 1)], [(1, 1)]), 1).gap
    exact_ok = lam_pauli <= 1e-9 and lam_clifford <= 1e-9
    monomial_ok = max(monomial_gaps) <= 1e-10 and abs(identity_gap - 0.5) <= 1e-12
    rows = [
        {"design": "pauli", "t": 1, "lambda": lam_pauli},
        {"design": "clifford", "t": 2, "lambda": lam_clifford},
        {"design": f"random{p.random_design_size}", "t": 1, "lambda": lam_base},
        {"design": f"random{p.random_design_size}^{p.iterations}", "t": 1, "lambda": lam_iter},
    ]
    return {
        "passed": bool(exact_ok and squaring_ok and monomial_ok),
        "analytic_bounds": {"iterated_lambda": lam_base**p.iterations},
        "results": {
            "lambda_pauli_t1": lam_pauli,
            "lambda_clifford_t2": lam_clifford,
            "lambda_random": lam_base,
            "lambda_random_iterated": lam_iter,
            "iteration_squares_lambda": bool(squaring_ok),
            "pauli_monomial_max_gap": max(monomial_gaps),
            "identity_monomial_gap": identity_gap,
        },
        "csv_rows": rows,
    }


# -------------------------------------------------------------------- params


class ParamsTableParams(Params):
    d1: list[int] = Field(default_factory=lambda: [2**20, 2**30, 2**40, 2**64])
    d2: list[int] = Field(default_factory=lambda: [2**12, 2**16, 2**20, 2**24])
    eps: list[float] = Field(default_factory=lambda: [0.1, 0.25, 0.5, 0.9])
    lambda0: list[float] = Field(default_factory=lambda: [0.1, 0.5, 0.9])

    @model_validator(mode="after")
    def _ranges(self):
        if any(not 0 < e < 1 for e in self.eps) or any(not 0 < lam < 1 for lam in self.lambda0):
            raise ValueError("eps and lambda0 values must lie in (0, 1)")
        return self


def run_params(p: ParamsTableParams, seed: int, workers: int = 1) -> dict:
    rows = []
    for d1 in p.d1:
        for d2 in p.d2:
            if d2 >= d1:
                continue
            for eps in p.eps:
                for lam0 in p.lambda0:
                    rows.append(conc.compute_design_params(d1, d2, eps, lam0).to_dict())
    finite = all(math.isfinite(r["lambda_target_log"]) and math.isfinite(r["k_exact"]) for r in rows)
    holds = all(r["k_bound_holds"] for r in rows)
    ref = conc.compute_design_params(2**40, 2**20, 0.5, 0.5)
    return {
        "passed": bool(finite and holds and ref.t == 512 and ref.m == 256),
        "analytic_bounds": {},
        "results": {"reference": ref.to_dict(), "all_finite": finite, "k_bound_holds_everywhere": holds},
        "csv_rows": rows,
    }


# ------------------------------------------------------------------- jl-demo


class JLDemoParams(Params):
    d1: int = Field(1024, ge=2)
    d2: int = Field(256, ge=1)
    n_states: int = Field(8, ge=1)
    eps: float = Field(0.25, gt=0)
    unitary: str = Field("haar", pattern="^(haar|circuit)$")
    circuit_size: int = Field(4000, ge=0)
    trials: int = Field(100, ge=1)
    max_violation_fraction: float = Field(0.10, ge=0, le=1)
    polarization_pairs: int = Field(10_000, ge=0)

    @model_validator(mode="after")
    def _shape(self):
        _check_blocks(self.d1, self.d2)
        if self.unitary == "circuit" and not is_power_of_two(self.d1):
            raise ValueError("circuits need d1 to be a power of two")
        return self


def polarization_check(pairs: int, seed: int, dims=(2, 4, 8, 16, 32, 64)) -> float:
    """Largest gap between the polarization identity and ``inner_product``."""
    gen = RngStream(seed).generator()
    worst = 0.0
    for k in range(pairs):
        d = dims[k % len(dims)]
        u = sample_haar_unit_vector(d, gen)
        w = sample_haar_unit_vector(d, gen)
        worst = max(worst, abs(polarization_inner_product(u, w) - inner_product(u, w)))
    return worst


def _jl_trial(p: JLDemoParams, states: np.ndarray, stream: RngStream) -> list[float]:
    bs = BlockStructure(p.d1, p.d2)
    if p.unitary == "haar":
        op = HaarRestriction(states, stream)
    else:
        op = generate_local_random_circuit(p.d1.bit_length() - 1, p.circuit_size, stream)
    rep = pairwise_preservation_report(list(states.T), op, bs, p.eps)
    return [len(rep.inner_violations), len(rep.norm_violations),
            rep.max_inner_deviation, rep.max_norm_deviation, len(rep.unreachable)]


def run_jl_demo(p: JLDemoParams, seed: int, workers: int = 1) -> dict:
    states_rng = RngStream(derive_seed(seed, 3)).generator()
    states = np.stack([sample_haar_unit_vector(p.d1, states_rng) for _ in range(p.n_states)], axis=1)
    out = map_trials(partial(_jl_trial, p, states), p.trials, seed, workers, chunk=25).reshape(p.trials, 5)
    bad = int(np.count_nonzero(out[:, 0] > 0))
    fraction = bad / p.trials
    pol = polarization_check(p.polarization_pairs, derive_seed(seed, 4)) if p.polarization_pairs else 0.0
    rows = [{"trial": i, "inner_violations": int(r[0]), "norm_violations": int(r[1]),
             "max_inner_deviation": r[2], "max_norm_deviation": r[3]} for i, r in enumerate(out)]
    return {
        "passed": bool(fraction <= p.max_violation_fraction and pol <= 1e-9),
        "analytic_bounds": {"inner_band": 8 * p.eps, "norm_band": p.eps},
        "results": {
            "unitaries_with_inner_violation": bad,
            "violation_fraction": fraction,
            "unitaries_with_norm_violation": int(np.count_nonzero(out[:, 1] > 0)),
            "max_inner_deviation": float(out[:, 2].max()),
            "max_norm_deviation": float(out[:, 3].max()),
            "polarization_max_error": pol,
        },
        "csv_rows": rows,
    }


# ---------------------------------------------------------------- block-dist


class BlockDistParams(Params):
    d1: int = Field(1024, ge=2)
    d2: int = Field(64, ge=1)
    samples: int = Field(10_000, ge=1)
    basis_index: int = Field(1, ge=1)
    floor_replicates: int = Field(200, ge=1)
    threshold: float = Field(0.15, gt=0)

    @model_validator(mode="after")
    def _shape(self):
        _check_blocks(self.d1, self.d2)
        if self.basis_index > self.d1:
            raise ValueError("basis_index outside [1, d1]")
        return self


def run_block_dist(p: BlockDistParams, seed: int, workers: int = 1) -> dict:
    bs = BlockStructure(p.d1, p.d2)
    v = basis_state(p.d1, p.basis_index)
    w = HaarRestriction(v, RngStream(seed, 0))(v)
    probs = np.sum(np.abs(bs.blocks(w)) ** 2, axis=1)
    gen = RngStream(seed, 1).generator()
    names = gen.choice(bs.num_blocks, size=p.samples, p=probs / probs.sum())
    empirical = np.bincount(names, minlength=bs.num_blocks) / p.samples
    uniform = np.full(bs.num_blocks, 1.0 / bs.num_blocks)
    dist = l1_distance(empirical, uniform)
    floor_gen = RngStream(seed, 2).generator()
    floor = floor_gen.multinomial(p.samples, uniform, size=p.floor_replicates) / p.samples
    floor_l1 = np.abs(floor - uniform).sum(axis=1)
    return {
        "passed": bool(dist <= p.threshold),
        "analytic_bounds": {"threshold": p.threshold},
        "results": {
            "l1_to_uniform": dist,
            "exact_l1_to_uniform": l1_distance(probs / probs.sum(), uniform),
            "noise_floor_mean": float(floor_l1.mean()),
            "noise_floor_p99": float(np.quantile(floor_l1, 0.99)),
            "empirical": empirical.tolist(),
        },
        "csv_rows": [{"d1": p.d1, "d2": p.d2, "samples": p.samples, "l1_to_uniform": dist,
                      "noise_floor_mean": float(floor_l1.mean())}],
    }


# ----------------------------------------------------------------------- pir


class PirExperimentParams(Params):
    m: int = Field(256, ge=2)
    n: int = Field(4, ge=1)
    d2: int = Field(64, ge=1)
    eps: float = Field(0.25, gt=0)
    c_rep: int = Field(16, ge=1)
    runs: int = Field(200, ge=1)
    S: list[int] | None = None
    x_in: int | None = None
    x_out: int | None = None
    unitary: str = Field("haar", pattern="^(haar|circuit)$")
    circuit_size: int = Field(1000, ge=0)
    privacy_coins: int = Field(20, ge=2)
    privacy_runs: int = Field(50, ge=1)
    privacy_probes: list[int] | None = None
    min_correct_rate: float = Field(0.75, ge=0, le=1)

    @model_validator(mode="after")
    def _shape(self):
        params = self.pir_params()
        S = self.default_set()
        if len(S) > self.n or any(not 1 <= y <= self.m for y in S):
            raise ValueError("S must have at most n elements inside [1, m]")
        if self.in_element() not in S or self.out_element() in S:
            raise ValueError("x_in must belong to S and x_out must not")
        for x in self.probes():
            if not 1 <= x <= params.m:
                raise ValueError("privacy probes must lie in [1, m]")
        return self

    def pir_params(self) -> PirParams:
        return PirParams(self.m, self.n, self.d2, self.eps, self.c_rep)

    def default_set(self) -> list[int]:
        if self.S is not None:
            return sorted(set(self.S))
        step = self.m // self.n
        return [step * k + step // 2 + 1 for k in range(self.n)]

    def in_element(self) -> int:
        return self.x_in if self.x_in is not None else self.default_set()[0]

    def out_element(self) -> int:
        if self.x_out is not None:
            return self.x_out
        S = set(self.default_set())
        return next(y for y in range(1, self.m + 1) if y not in S)

    def probes(self) -> list[int]:
        return self.privacy_probes or [1, self.m // 2, self.m]


def _pir_trial(p: PirExperimentParams, x: int, stream: RngStream) -> list[float]:
    params = p.pir_params()
    run_seed = derive_seed(stream.master_seed, stream.stream_id)
    if p.unitary == "haar":
        desc = UnitaryDescriptor("haar", derive_seed(run_seed, 0))
    else:
        desc = UnitaryDescriptor("circuit", derive_seed(run_seed, 0), p.circuit_size)
    tr = run_protocol(p.default_set(), x, params, run_seed, desc)
    return [float(tr.correct), tr.success_fraction, tr.bob_bits, tr.alice_qubits]


def _privacy_trial(p: PirExperimentParams, kind: str, stream: RngStream) -> float:
    coin = derive_seed(stream.master_seed, stream.stream_id)
    size = p.circuit_size if kind == "circuit" else 0
    est = privacy_metric(p.pir_params(), UnitaryDescriptor(kind, coin, size), p.probes(),
                         p.privacy_runs, derive_seed(coin, 1))
    return est.metric


def run_pir(p: PirExperimentParams, seed: int, workers: int = 1) -> dict:
    params = p.pir_params()
    arms = {}
    for arm, x, key in (("x_in_S", p.in_element(), 5), ("x_not_in_S", p.out_element(), 6)):
        out = map_trials(partial(_pir_trial, p, x), p.runs, derive_seed(seed, key), workers, chunk=50)
        out = out.reshape(p.runs, 4)
        frac = out[:, 1]
        arms[arm] = {
            "x": x,
            "correct_rate": float(out[:, 0].mean()),
            "mean_success_fraction": float(frac.mean()),
            "success_fraction_stderr": float(frac.std(ddof=1) / math.sqrt(p.runs)) if p.runs > 1 else 0.0,
            "bob_bits": int(out[0, 2]),
            "alice_qubits": int(out[0, 3]),
        }
    gap = arms["x_in_S"]["mean_success_fraction"] - arms["x_not_in_S"]["mean_success_fraction"]
    gap_se = math.hypot(arms["x_in_S"]["success_fraction_stderr"], arms["x_not_in_S"]["success_fraction_stderr"])
    privacy = {}
    for kind, key in (("haar", 7), ("circuit", 8)):
        vals = map_trials(partial(_privacy_trial, p, kind), p.privacy_coins, derive_seed(seed, key), workers, chunk=5)
        privacy[kind] = {"mean": float(vals.mean()), "stderr": float(vals.std(ddof=1) / math.sqrt(len(vals))),
                         "per_coin": vals.tolist()}
    priv_diff = abs(privacy["circuit"]["mean"] - privacy["haar"]["mean"])
    priv_se = math.hypot(privacy["circuit"]["stderr"], privacy["haar"]["stderr"])
    privacy_ok = priv_diff <= 2 * priv_se
    correct_ok = all(a["correct_rate"] >= p.min_correct_rate for a in arms.values())
    gap_ok = gap - ONE_SIDED_Z99 * gap_se >= 0.3 / p.n
    accounting = {
        "reps": params.reps,
        "threshold": params.threshold,
        "bob_bits": arms["x_in_S"]["bob_bits"],
        "alice_qubits": arms["x_in_S"]["alice_qubits"],
        "block_name_bits": params.reps * int(math.log2(params.m // params.d2)),
        "asymptotic_eps": params.asymptotic_eps(),
    }
    return {
        "passed": bool(correct_ok and privacy_ok and gap_ok),
        "analytic_bounds": {"min_correct_rate": p.min_correct_rate, "threshold": params.threshold,
                            "gap_target": 0.3 / p.n},
        "results": {
            "arms": arms,
            "success_gap": gap,
            "success_gap_stderr": gap_se,
            "gap_lower_99": gap - ONE_SIDED_Z99 * gap_se,
            "gap_meets_target": bool(gap_ok),
            "privacy": privacy,
            "privacy_difference": priv_diff,
            "privacy_difference_stderr": priv_se,
            "privacy_within_2se": bool(privacy_ok),
            "accounting": accounting,
        },
        "csv_rows": [{"arm": k, **{kk: vv for kk, vv in v.items()}} for k, v in arms.items()],
    }


EXPERIMENTS = {
    "chi-tails": (ChiTailsParams, run_chi_tails),
    "haar-tails": (HaarTailsParams, run_haar_tails),
    "design-tails": (DesignTailsParams, run_design_tails),
    "moments": (MomentsParams, run_moments),
    "design-quality": (DesignQualityParams, run_design_quality),
    "params": (ParamsTableParams, run_params),
    "jl-demo": (JLDemoParams, run_jl_demo),
    "block-dist": (BlockDistParams, run_block_dist),
    "pir": (PirExperimentParams, run_pir),
}
