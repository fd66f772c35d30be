"""Monte Carlo scenarios with per-trial seeded streams and fixed-order CSV output."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import kendalltau
from statsmodels.stats.proportion import proportion_confint

from .degseq import Cutoff, DegreeProfile, compute_cutoff, head_body_tail, scale_profile
from .graph import Graph, cut_stats

CSV_VERSION = "1"

SCENARIOS = ("balanced_hamiltonicity", "unbalanced_counterexample", "rerandomize_roundtrip")


@dataclass
class ExperimentConfig:
    scenario: str
    profile: dict[int, float] = field(default_factory=dict)
    n: list[int] = field(default_factory=list)
    k: int = 2
    eps: float = 0.5
    rho: float = 0.02
    sigma: float = 0.01
    trials: int = 100
    seed: int = 0
    out: str | None = None
    delta: int = 4
    D_values: list[int] = field(default_factory=list)
    gamma: float = 0.05
    sparsity_budget: int = 5_000
    cutoff: tuple[int, int] | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        self.profile = {int(d): float(f) for d, f in self.profile.items()}
        self.n = [int(x) for x in self.n]
        self.D_values = [int(x) for x in self.D_values]
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.n:
            raise ValueError("n list is empty")
        if self.scenario == "rerandomize_roundtrip" and not 0 < self.sigma < self.rho:
            raise ValueError("rerandomization needs 0 < sigma < rho")
        if self.scenario == "unbalanced_counterexample" and not self.D_values:
            raise ValueError("unbalanced scenario needs D_values")
        if self.scenario != "unbalanced_counterexample" and not self.profile:
            raise ValueError("scenario needs a profile")
        if self.cutoff is not None:
            self.cutoff = (int(self.cutoff[0]), int(self.cutoff[1]))

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> list[ExperimentConfig]:
        """A config file holds one scenario object or {"experiments": [...]}."""
        data = json.loads(Path(path).read_text())
        items = data["experiments"] if isinstance(data, dict) and "experiments" in data else [data]
        return [cls.from_dict(d) for d in items]


def trial_rng(seed: int, arm: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, arm, trial])))


def wilson(successes: int, n: int, level: float = 0.99) -> tuple[float, float]:
    lo, hi = proportion_confint(successes, n, alpha=1 - level, method="wilson")
    return float(lo), float(hi)


def mann_kendall(values: list[float]) -> tuple[float, float]:
    """Kendall tau of the series against its index, and the one-sided p-value for a decrease."""
    res = kendalltau(np.arange(len(values)), np.asarray(values, dtype=float), alternative="less")
    return float(res.statistic), float(res.pvalue)


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if x is None:
        return ""
    if isinstance(x, float):
        return "nan" if math.isnan(x) else f"{x:.6g}"
    return str(x)


def to_csv(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


# -- per-trial workers (top level so they pickle) ----------------------------------------


def _diagnose_large(g: Graph, k: int, gamma: float, budget: int, rng) -> dict:
    from .diagnostics import beta_k_heuristic, effective_girth, in_class_C, sparsity_check

    beta = beta_k_heuristic(g, 2, effort=2, rng=rng).value
    sp = sparsity_check(g, gamma=gamma, budget=budget)
    psi = effective_girth(g).psi
    return {
        "beta2_lb": beta,
        "sparse_gamma": sp.ok if (sp.ok is False or sp.mode == "exact") else None,
        "psi": psi,
        "in_C": in_class_C(g, psi),
    }


def _balanced_trial(args) -> dict:
    cfg, arm, n, trial = args
    from .hamilton import is_hamiltonian
    from .matching import lambda_k
    from .sampler import sample_profile_graph

    rng = trial_rng(cfg.seed, arm, trial)
    profile = scale_profile(cfg.profile, n)
    smp = sample_profile_graph(profile, rng)
    g = smp.graph
    row = {"n": n, "trial": trial, "min_degree": g.min_degree(), "hyp_delta_ge_4": g.min_degree() >= 4,
           "exact_uniform": smp.exact_uniform}
    row.update(_diagnose_large(g, cfg.k, cfg.gamma, cfg.sparsity_budget, rng))
    ham = is_hamiltonian(g)
    row["hamiltonian"] = ham.hamiltonian
    row["ham_method"] = ham.method
    kf = cfg.k if cfg.k <= g.min_degree() - 2 else None
    row["k"] = kf
    row["k_factor"] = (lambda_k(g, kf) == 0) if kf else None
    return row


BALANCED_COLUMNS = ["n", "trial", "min_degree", "hyp_delta_ge_4", "exact_uniform", "beta2_lb", "sparse_gamma",
                    "psi", "in_C", "hamiltonian", "ham_method", "k", "k_factor"]


def _unbalanced_profile(n: int, delta: int, D: int) -> tuple[DegreeProfile, bool]:
    a = round(2 * n / 3)
    b = n - a
    rounded = 3 * a != 2 * n
    counts = {delta: a}
    counts[D] = counts.get(D, 0) + b
    if (delta * a + D * b) % 2:
        # move one vertex to the low class to fix parity
        counts[delta] += 1
        counts[D] -= 1
        rounded = True
    return DegreeProfile(counts), rounded


def _unbalanced_trial(args) -> dict:
    cfg, arm, n, D, trial = args
    from .hamilton import is_hamiltonian
    from .sampler import SamplingError, sample_graph

    rng = trial_rng(cfg.seed, arm, trial)
    profile, rounded = _unbalanced_profile(n, cfg.delta, D)
    degs = list(profile.to_sequence().degrees)
    try:
        smp = sample_graph(degs, rng)
    except SamplingError:
        return {"n": n, "D": D, "trial": trial, "n_rounded": rounded, "hyp_delta_ge_4": cfg.delta >= 4,
                "sample_failed": True}
    g = smp.graph
    # the sorted sequence puts the high class first
    low = [v for v in range(n) if degs[v] == cfg.delta] if D != cfg.delta else list(range(round(2 * n / 3)))
    e_a = cut_stats(g, low)[0]
    row = {"n": n, "D": D, "trial": trial, "n_rounded": rounded, "hyp_delta_ge_4": cfg.delta >= 4,
           "sample_failed": False, "exact_uniform": smp.exact_uniform, "e_A": e_a, "e_A_over_n": e_a / n}
    from .diagnostics import beta_k_heuristic

    row["beta2_lb"] = beta_k_heuristic(g, 2, effort=2, rng=rng).value
    row["beta2_positive"] = row["beta2_lb"] > 0
    ham = is_hamiltonian(g)
    row["hamiltonian"] = ham.hamiltonian
    row["ham_method"] = ham.method
    return row


UNBALANCED_COLUMNS = ["n", "D", "trial", "n_rounded", "hyp_delta_ge_4", "sample_failed", "exact_uniform", "e_A",
                      "e_A_over_n", "beta2_lb", "beta2_positive", "hamiltonian", "ham_method"]


def _roundtrip_trial(args) -> dict:
    cfg, arm, n, trial = args
    from .diagnostics import beta_k_heuristic, effective_girth, in_class_C
    from .hamilton import is_hamiltonian
    from .sampler import backward_chain, sample_profile_graph
    from .sprinkler import r1_rule, uniform_sprinkler

    rng = trial_rng(cfg.seed, arm, trial)
    profile = scale_profile(cfg.profile, n)
    cutoff = _roundtrip_cutoff(cfg, profile)
    smp = sample_profile_graph(profile, rng)
    g0 = smp.graph
    r = int(round(cfg.rho * n))
    s = int(round(cfg.sigma * n))
    state = backward_chain(g0, profile, cutoff, r, rng)
    row = {"n": n, "trial": trial, "C": cutoff.C, "D": cutoff.D, "r": r, "s": s,
           "hyp_delta_ge_4": profile.min_degree >= 4, "exact_uniform": smp.exact_uniform,
           "failed": state.failed}
    psi0 = effective_girth(g0).psi
    row["in_C_before"] = in_class_C(g0, psi0)
    if state.failed:
        return row
    gr = state.graph
    head = [state.g.get(d, 0) for d in range(cutoff.delta + 1, cutoff.C + 1)]
    from .sampler import phi

    row["min_g_head"] = min(head) if head else 0
    row["phi_after"] = phi(gr, cutoff)
    row["in_C_after"] = in_class_C(gr)
    row["beta2_lb_after"] = beta_k_heuristic(gr, 2, effort=2, rng=rng).value
    scheme = uniform_sprinkler(r1_rule(profile, cutoff))
    h = gr
    added = 0
    for e in scheme.stream(gr, rng, s):
        h = h.add_edge(*e)
        added += 1
    row["sprinkled"] = added
    row["hamiltonian_after_sprinkle"] = is_hamiltonian(h).hamiltonian
    return row


ROUNDTRIP_COLUMNS = ["n", "trial", "C", "D", "r", "s", "hyp_delta_ge_4", "exact_uniform", "failed", "min_g_head",
                     "phi_after", "in_C_before", "in_C_after", "beta2_lb_after", "sprinkled",
                     "hamiltonian_after_sprinkle"]


def _roundtrip_cutoff(cfg: ExperimentConfig, profile: DegreeProfile) -> Cutoff:
    if cfg.cutoff is not None:
        return Cutoff(cfg.cutoff[0], cfg.cutoff[1], profile.min_degree)
    return compute_cutoff(profile, cfg.eps)


def _run(fn, jobs: list, threads: int) -> list[dict]:
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    return [fn(j) for j in jobs]


@dataclass
class ScenarioResult:
    scenario: str
    columns: list[str]
    rows: list[dict]
    summary: list[dict]
    summary_columns: list[str]
    trend: dict | None = None
    config: dict | None = None

    def csv(self) -> str:
        return to_csv(self.columns, self.rows)

    def summary_csv(self) -> str:
        return to_csv(self.summary_columns, self.summary)

    def write(self, out_dir: str | Path) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        p1 = out / f"{self.scenario}.csv"
        p2 = out / f"{self.scenario}_summary.csv"
        p1.write_text(self.csv())
        p2.write_text(self.summary_csv())
        paths = [p1, p2]
        if self.trend is not None:
            p3 = out / f"{self.scenario}_trend.json"
            p3.write_text(json.dumps(_nan_to_none(self.trend), indent=2, sort_keys=True) + "\n")
            paths.append(p3)
        meta = {"csv_version": CSV_VERSION, "columns": self.columns, "summary_columns": self.summary_columns,
                "config": self.config}
        p4 = out / f"{self.scenario}_meta.json"
        p4.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        paths.append(p4)
        return paths


def _nan_to_none(x):
    if isinstance(x, float) and math.isnan(x):
        return None
    if isinstance(x, dict):
        return {k: _nan_to_none(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_nan_to_none(v) for v in x]
    return x


def _rate_summary(rows: list[dict], key: str, group: str) -> list[dict]:
    out = []
    for val in sorted({r[group] for r in rows}):
        sub = [r for r in rows if r[group] == val]
        decided = [r for r in sub if r[key] is not None]
        hits = sum(1 for r in decided if r[key])
        lo, hi = wilson(hits, len(decided)) if decided else (math.nan, math.nan)
        out.append({group: val, "trials": len(sub), "decided": len(decided), "successes": hits,
                    "rate": hits / len(decided) if decided else math.nan, "wilson99_lo": lo, "wilson99_hi": hi})
    return out


def scenario_balanced_hamiltonicity(cfg: ExperimentConfig, threads: int = 1) -> ScenarioResult:
    jobs = [(cfg, arm, n, t) for arm, n in enumerate(cfg.n) for t in range(cfg.trials)]
    rows = _run(_balanced_trial, jobs, threads)
    summary = _rate_summary(rows, "hamiltonian", "n")
    kf = _rate_summary([r for r in rows if r["k_factor"] is not None], "k_factor", "n") if cfg.k else []
    for s in summary:
        match = [x for x in kf if x["n"] == s["n"]]
        s["k_factor_rate"] = match[0]["rate"] if match else None
        s["delta_warning"] = any(not r["hyp_delta_ge_4"] for r in rows if r["n"] == s["n"])
    cols = ["n", "trials", "decided", "successes", "rate", "wilson99_lo", "wilson99_hi", "k_factor_rate",
            "delta_warning"]
    return ScenarioResult("balanced_hamiltonicity", BALANCED_COLUMNS, rows, summary, cols)


def scenario_unbalanced_counterexample(cfg: ExperimentConfig, threads: int = 1) -> ScenarioResult:
    jobs = []
    arm = 0
    for n in cfg.n:
        for D in cfg.D_values:
            jobs.extend((cfg, arm, n, D, t) for t in range(cfg.trials))
            arm += 1
    rows = _run(_unbalanced_trial, jobs, threads)
    summary = []
    trend = {}
    for n in cfg.n:
        sub = [r for r in rows if r["n"] == n]
        for r in sub:
            r.setdefault("hamiltonian", None)
        per_d = _rate_summary(sub, "hamiltonian", "D")
        for s in per_d:
            dd = [r for r in sub if r["D"] == s["D"] and not r["sample_failed"]]
            s["n"] = n
            s["sample_failures"] = sum(1 for r in sub if r["D"] == s["D"] and r["sample_failed"])
            s["mean_e_A_over_n"] = float(np.mean([r["e_A_over_n"] for r in dd])) if dd else math.nan
            s["beta2_positive_rate"] = float(np.mean([r["beta2_positive"] for r in dd])) if dd else math.nan
            summary.append(s)
        rates = [s["rate"] for s in per_d]
        ea = [s["mean_e_A_over_n"] for s in per_d]
        tau, p = mann_kendall(rates)
        tau_e, p_e = mann_kendall(ea)
        trend[str(n)] = {"D": [s["D"] for s in per_d], "hamiltonian_rate": rates, "mk_tau": tau, "mk_p": p,
                         "e_A_over_n": ea, "e_A_mk_tau": tau_e, "e_A_mk_p": p_e}
    cols = ["n", "D", "trials", "sample_failures", "decided", "successes", "rate", "wilson99_lo", "wilson99_hi",
            "mean_e_A_over_n",
            "beta2_positive_rate"]
    return ScenarioResult("unbalanced_counterexample", UNBALANCED_COLUMNS, rows, summary, cols, trend)


def scenario_rerandomize_roundtrip(cfg: ExperimentConfig, threads: int = 1) -> ScenarioResult:
    for n in cfg.n:
        profile = scale_profile(cfg.profile, n)
        cut = _roundtrip_cutoff(cfg, profile)
        head_body_tail(profile, cut)
    jobs = [(cfg, arm, n, t) for arm, n in enumerate(cfg.n) for t in range(cfg.trials)]
    rows = _run(_roundtrip_trial, jobs, threads)
    summary = []
    for n in cfg.n:
        sub = [r for r in rows if r["n"] == n]
        ok = [r for r in sub if not r["failed"]]
        ham = [r["hamiltonian_after_sprinkle"] for r in ok if r.get("hamiltonian_after_sprinkle") is not None]
        hits = sum(1 for h in ham if h)
        lo, hi = wilson(hits, len(ham)) if ham else (math.nan, math.nan)
        summary.append({
            "n": n,
            "trials": len(sub),
            "fail_rate": sum(r["failed"] for r in sub) / len(sub),
            "mean_min_g_head": float(np.mean([r["min_g_head"] for r in ok])) if ok else math.nan,
            "mean_phi_after": float(np.mean([r["phi_after"] for r in ok])) if ok else math.nan,
            "C_retained_rate": float(np.mean([r["in_C_after"] for r in ok])) if ok else math.nan,
            "hamiltonian_rate": hits / len(ham) if ham else math.nan,
            "wilson99_lo": lo,
            "wilson99_hi": hi,
        })
    cols = ["n", "trials", "fail_rate", "mean_min_g_head", "mean_phi_after", "C_retained_rate",
            "hamiltonian_rate", "wilson99_lo", "wilson99_hi"]
    return ScenarioResult("rerandomize_roundtrip", ROUNDTRIP_COLUMNS, rows, summary, cols)


RUNNERS = {
    "balanced_hamiltonicity": scenario_balanced_hamiltonicity,
    "unbalanced_counterexample": scenario_unbalanced_counterexample,
    "rerandomize_roundtrip": scenario_rerandomize_roundtrip,
}


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> ScenarioResult:
    res = RUNNERS[cfg.scenario](cfg, threads)
    res.config = config_dict(cfg)
    return res


def config_dict(cfg: ExperimentConfig) -> dict:
    return asdict(cfg)
