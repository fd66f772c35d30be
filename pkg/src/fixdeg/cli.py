"""Command line entry point: gen | diag | sprinkle | chain | cutoff | experiment."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CHECK = 2


class CheckFailed(Exception):
    pass


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed])))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    def default(x):
        if isinstance(x, Fraction):
            return float(x)
        if isinstance(x, (set, frozenset)):
            return sorted(x)
        if isinstance(x, np.integer):
            return int(x)
        raise TypeError(type(x).__name__)

    return json.dumps(obj, indent=2, sort_keys=True, default=default) + "\n"


def _load_profile(args):
    from .degseq import read_profile, scale_profile

    prof = read_profile(args.profile)
    if getattr(args, "n", None) and args.n != prof.n:
        prof = scale_profile({d: c / prof.n for d, c in prof.counts.items()}, args.n)
    return prof


def cmd_gen(args) -> int:
    from .graph import format_edgelist
    from .sampler import sample_profile_graph

    prof = _load_profile(args)
    res = sample_profile_graph(prof, _rng(args.seed))
    _emit(format_edgelist(res.graph), args.out)
    if not res.exact_uniform:
        print("warning: heavy sequence, sampled with the approximate sequential sampler", file=sys.stderr)
    return EXIT_OK


def cmd_diag(args) -> int:
    from .diagnostics import diagnose
    from .graph import read_edgelist

    g = read_edgelist(args.graph)
    rep = diagnose(g, k=args.k, gamma=args.gamma, tau=args.tau, theta=args.theta, rng=_rng(args.seed))
    data = rep.to_json()
    if args.certificate:
        from .matching import certificate_partition, max_k_matching

        fm = max_k_matching(g, args.k)
        if args.k * g.n - 2 * fm.size > 0:
            cert = certificate_partition(g, args.k, fm)
            data["certificate"] = cert.to_json()
            if args.check and not all(cert.claims.values()):
                _emit(_json(data), args.out)
                raise CheckFailed("certificate claims failed")
    if args.check and data["beta"]["mode"] == "exact":
        from .matching import total_deficiency

        if data["beta"]["value"] > total_deficiency(g, args.k):
            _emit(_json(data), args.out)
            raise CheckFailed("balance exceeds total deficiency")
    _emit(_json(data), args.out)
    return EXIT_OK


def cmd_sprinkle(args) -> int:
    from .graph import read_edgelist
    from .sprinkler import all_non_edges, r1_rule, sprinkling_experiment, uniform_sprinkler

    g = read_edgelist(args.graph)
    if args.rule == "all":
        rule = all_non_edges
    else:
        from .degseq import Cutoff

        if not args.profile or args.C is None or args.D is None:
            raise ValueError("--rule r1 needs --profile, --C and --D")
        prof = _load_profile(args)
        rule = r1_rule(prof, Cutoff(args.C, args.D, prof.min_degree))
    stats = sprinkling_experiment(g, uniform_sprinkler(rule), args.s, args.trials, seed=args.seed, k=args.k)
    if args.out:
        stats.write_csv(args.out)
    else:
        from .experiments import to_csv

        cols = ["trial", "seed", "steps_used", "hits", "final_hamiltonian", "exited_S_gamma", "exited_C"]
        sys.stdout.write(to_csv(cols, [vars(t) for t in stats.trials]))
    print(f"hamiltonian_rate={stats.hamiltonian_rate:.4f} k_factor_rate={stats.k_factor_rate:.4f}", file=sys.stderr)
    return EXIT_OK


def cmd_chain(args) -> int:
    from .degseq import Cutoff, compute_cutoff, profile_of
    from .graph import read_edgelist
    from .sampler import backward_chain, claim_adg_stats, phi_delta_bounds_check, write_chain_trace

    g = read_edgelist(args.graph)
    prof = _load_profile(args) if args.profile else profile_of(g.degrees())
    if args.C is not None and args.D is not None:
        cut = Cutoff(args.C, args.D, prof.min_degree)
    else:
        cut = compute_cutoff(prof, args.eps)
    state = backward_chain(g, prof, cut, args.r, _rng(args.seed), checks=args.check)
    if args.trace:
        write_chain_trace(state, args.trace)
    summary = {
        "cutoff": {"C": cut.C, "D": cut.D, "delta": cut.delta},
        "steps": state.steps,
        "failed": state.failed,
        "g": {str(d): c for d, c in sorted(state.g.items())},
    }
    if not state.failed:
        st = claim_adg_stats(state, cut)
        summary.update({"U": st.U, "W": st.W, "phi": st.phi, "min_g_head": st.min_g_head})
        if args.check and not phi_delta_bounds_check(state.graph, cut):
            _emit(_json(summary), args.out)
            raise CheckFailed("phi change bound violated")
    _emit(_json(summary), args.out)
    return EXIT_OK


def cmd_cutoff(args) -> int:
    from .degseq import compute_cutoff, head_body_tail

    prof = _load_profile(args)
    cut = compute_cutoff(prof, args.eps, alpha=args.alpha, strategy=args.strategy)
    h, b, t = head_body_tail(prof, cut)
    data = {"C": cut.C, "D": cut.D, "delta": cut.delta, "head": h, "body": b, "tail": t}
    if args.check and not (h > 0 and b > 0 and t > 0):
        _emit(_json(data), args.out)
        raise CheckFailed("cutoff masses not all positive")
    _emit(_json(data), args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    from .experiments import ExperimentConfig, run_experiment

    if not args.config:
        raise ValueError("experiment needs --config")
    configs = ExperimentConfig.load(args.config)
    for cfg in configs:
        if args.seed_given:
            cfg.seed = args.seed
        res = run_experiment(cfg, threads=args.threads)
        out_dir = args.out or cfg.out or "."
        for p in res.write(out_dir):
            print(p, file=sys.stderr)
        if args.check and res.trend is not None:
            bad = [n for n, t in res.trend.items() if not t["mk_p"] < 0.05]
            if bad:
                raise CheckFailed(f"no significant decreasing trend for n={bad}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--config", default=None)
    common.add_argument("--out", default=None)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--check", action="store_true", help="exit 2 when a verified property fails")

    p = argparse.ArgumentParser(prog="fixdeg", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="sample a graph with a degree profile")
    g.add_argument("--profile", required=True)
    g.add_argument("--n", type=int)
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("diag", parents=[common], help="balance, deficiency, girth and sparsity report")
    d.add_argument("--graph", required=True)
    d.add_argument("--k", type=int, default=2)
    d.add_argument("--gamma", type=float, default=0.1)
    d.add_argument("--tau", type=float, default=0.25)
    d.add_argument("--theta", type=float, default=0.05)
    d.add_argument("--certificate", action="store_true")
    d.set_defaults(func=cmd_diag)

    s = sub.add_parser("sprinkle", parents=[common], help="add random edges and track Hamiltonicity")
    s.add_argument("--graph", required=True)
    s.add_argument("--s", type=int, required=True)
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--rule", choices=["all", "r1"], default="all")
    s.add_argument("--profile")
    s.add_argument("--n", type=int)
    s.add_argument("--C", type=int)
    s.add_argument("--D", type=int)
    s.set_defaults(func=cmd_sprinkle)

    c = sub.add_parser("chain", parents=[common], help="run the backward removal chain")
    c.add_argument("--graph", required=True)
    c.add_argument("--profile")
    c.add_argument("--n", type=int)
    c.add_argument("--r", type=int, required=True)
    c.add_argument("--C", type=int)
    c.add_argument("--D", type=int)
    c.add_argument("--eps", type=float, default=0.5)
    c.add_argument("--trace")
    c.set_defaults(func=cmd_chain)

    u = sub.add_parser("cutoff", parents=[common], help="choose degree cutoffs for a profile")
    u.add_argument("--profile", required=True)
    u.add_argument("--n", type=int)
    u.add_argument("--eps", type=float, required=True)
    u.add_argument("--alpha", type=float)
    u.add_argument("--strategy", choices=["small_tail", "heavy_first"], default="small_tail")
    u.set_defaults(func=cmd_cutoff)

    e = sub.add_parser("experiment", parents=[common], help="run scenarios from a JSON config")
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = 0
    if args.command != "experiment" and args.config:
        cfg = json.loads(Path(args.config).read_text())
        for key, val in cfg.items():
            if getattr(args, key, None) in (None, False):
                setattr(args, key, val)
    try:
        return args.func(args)
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
