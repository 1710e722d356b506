"""Command-line front end.

Channel files are JSON objects with ``name``, ``in_dim``, ``out_dim``,
``convention`` and ``matrix``; ``matrix[j][i]`` is ``T[j|i]`` (rows are
outputs). Tables are comma-separated with 12 significant digits and unit
tags in the header row.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .aberg_work import (
    DEFAULT_DELTA_KT,
    EPS_MAX,
    build_extraction_protocol,
    eps_deterministic_work,
    simulate_protocol,
    w_corr_state,
    w_ext_bounds,
)
from .capacity import (
    capacity_lower_bound_dh,
    capacity_upper_bound_d0,
    classical_version,
    constrained_holevo,
    gibbs_deviation,
    holevo_classical,
    ml_decoder,
    one_shot_capacity,
    optimal_success_probability,
)
from .channel_work import asymptotic_sweep, verify_theorem1
from .entropy import binary_entropy, d0_smoothed, dh_smoothed, hayashi_nagaoka_commuting_check, relative_entropy
from .prob_core import (
    BipartiteClassicalState,
    ClassicalChannel,
    Codebook,
    DiagonalHamiltonian,
    Distribution,
    ThermoConfig,
)
from .witness import FreeSetPolytope, compile_gap_witness, detect_resource

CONVENTION = "matrix[j][i] = T[j|i]; rows are outputs j, columns are inputs i"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


# ---------------------------------------------------------------- I/O

def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x + 0.0, ".12g")


def load_channel(path: str) -> ClassicalChannel:
    with open(path) as f:
        obj = json.load(f)
    if obj.get("convention") != CONVENTION:
        raise ValueError(f"{path}: convention field must read {CONVENTION!r}")
    missing = [k for k in ("in_dim", "out_dim", "matrix") if k not in obj]
    if missing:
        raise ValueError(f"{path}: missing field(s) {', '.join(missing)}")
    m = np.asarray(obj["matrix"], dtype=float)
    if m.ndim != 2 or m.shape != (int(obj["out_dim"]), int(obj["in_dim"])):
        raise ValueError(f"{path}: matrix shape {m.shape} does not match (out_dim, in_dim)")
    return ClassicalChannel(m, name=str(obj.get("name", "")))


def dump_channel(ch: ClassicalChannel, path: str):
    obj = {"name": ch.name, "in_dim": ch.in_dim, "out_dim": ch.out_dim,
           "convention": CONVENTION, "matrix": ch.matrix.tolist()}
    with open(path, "w") as f:
        json.dump(obj, f, indent=2)
        f.write("\n")


def _numbers(text: str) -> list:
    if os.path.exists(text):
        with open(text) as f:
            text = f.read().strip()
        if text.startswith("["):
            return json.loads(text)
    return [float(t) for t in text.replace("\n", ",").split(",") if t.strip()]


def parse_vector(text: str, dim: int | None = None) -> np.ndarray:
    """Comma-separated decimals, a file holding them, or ``uniform`` (needs ``dim``)."""
    if text.strip() == "uniform":
        if dim is None:
            raise ValueError("'uniform' needs a dimension from the other argument")
        return np.full(dim, 1.0 / dim)
    return np.asarray(_numbers(text), dtype=float)


def parse_pair(a: str, b: str) -> tuple[np.ndarray, np.ndarray]:
    if a.strip() == "uniform" and b.strip() == "uniform":
        raise ValueError("at most one side may be 'uniform'")
    if a.strip() == "uniform":
        y = parse_vector(b)
        return parse_vector(a, y.size), y
    x = parse_vector(a)
    return x, parse_vector(b, x.size)


class Units:
    """Converts absolute energies to the requested output unit."""

    def __init__(self, unit: str, cfg: ThermoConfig):
        self.unit, self.cfg = unit, cfg

    def __call__(self, energy: float) -> float:
        if self.unit == "bits":
            return energy / self.cfg.bit_energy
        if self.unit == "kT":
            return energy / self.cfg.kT
        return energy

    def tag(self, name: str) -> str:
        return f"{name}[{self.unit}]"


def write_table(out, headers, rows):
    out.write(",".join(headers) + "\n")
    for r in rows:
        out.write(",".join(fmt(v) if not isinstance(v, str) else v for v in r) + "\n")


def write_fields(out, pairs):
    for k, v in pairs:
        out.write(f"{k} = {v if isinstance(v, str) else fmt(v)}\n")


# ---------------------------------------------------------------- config

@dataclass(frozen=True)
class ExperimentConfig:
    eps: float | None = None
    omega: float | None = None
    delta: float | None = None
    m_max: int | None = None
    k_steps: int | None = None
    e_cut: float | None = None
    n_samples: int | None = None
    seed: int = 0
    temperature: float = 1.0
    boltzmann_constant: float = 1.0
    work_unit: str = "bits"

    def thermo(self) -> ThermoConfig:
        return ThermoConfig(self.temperature, self.boltzmann_constant)


def _config(args, parser) -> ExperimentConfig:
    get = lambda k: getattr(args, k, None)
    t, kb, unit = get("temperature"), get("boltzmann_constant"), get("work_unit") or "bits"
    if unit == "joules" and (t is None or kb is None):
        parser.error("--work-unit joules needs both --temperature and --boltzmann-constant")
    cfg = ExperimentConfig(
        eps=get("eps"), omega=get("omega"), delta=get("delta"), m_max=get("m_max"),
        k_steps=get("k_steps"), e_cut=get("e_cut"), n_samples=get("n_samples"),
        seed=get("seed") or 0, temperature=1.0 if t is None else t,
        boltzmann_constant=1.0 if kb is None else kb, work_unit=unit)
    if cfg.temperature <= 0 or cfg.boltzmann_constant <= 0:
        parser.error("temperature and Boltzmann constant must be positive")
    if cfg.m_max is not None and cfg.m_max < 1:
        parser.error("--m-max must be at least 1")
    return cfg


def _check_sandwich_order(parser, eps, omega, delta):
    if not 0.0 < delta <= omega < eps <= EPS_MAX + 1e-12:
        parser.error(f"need 0 < delta <= omega < eps <= 1 - 1/sqrt(2) (= {EPS_MAX:.6f})")


def _check_aberg_eps(parser, eps):
    if not 0.0 < eps <= EPS_MAX + 1e-12:
        parser.error(f"--eps must lie in (0, 1 - 1/sqrt(2)] = (0, {EPS_MAX:.6f}]")


# ---------------------------------------------------------------- commands

def cmd_entropy(args, cfg, out, parser):
    q, r = parse_pair(args.q, args.r)
    if args.kind == "d0":
        res = d0_smoothed(q, r, args.delta if args.delta is not None else 0.0, method=args.method)
        write_table(out, ["quantity", "delta", "value[bits]", "optimizer"],
                    [["d0", args.delta, res.value_bits, " ".join(map(str, res.optimizer))]])
    elif args.kind == "dh":
        if args.eps is None:
            parser.error("entropy dh needs --eps")
        res = dh_smoothed(q, r, args.eps)
        write_table(out, ["quantity", "eps", "value[bits]", "test"],
                    [["dh", args.eps, res.value_bits, " ".join(fmt(t) for t in res.optimizer)]])
    else:
        write_table(out, ["quantity", "value[bits]"], [["rel", relative_entropy(q, r)]])
    return EXIT_OK


def cmd_capacity(args, cfg, out, parser):
    if not 0.0 < args.eps < 1.0:
        parser.error("--eps must lie in (0, 1)")
    ch = load_channel(args.channel)
    res = one_shot_capacity(ch, args.eps, args.m_max)
    write_fields(out, [
        ("capacity_bits", res.capacity_bits),
        ("message_count", res.message_count),
        ("best_codebook", " ".join(map(str, res.best_codebook.codewords))),
        ("best_success_prob", res.best_success_prob),
    ] + [(f"success_prob[M={M}]", p) for M, p in sorted(res.per_M_success.items())])
    return EXIT_OK


def cmd_bounds(args, cfg, out, parser):
    _check_sandwich_order(parser, args.eps, args.omega, args.delta)
    ch = load_channel(args.channel)
    thermo = cfg.thermo()
    u = Units(cfg.work_unit, thermo)
    rep = verify_theorem1(ch, args.eps, args.omega, args.delta, args.m_max, thermo)
    write_fields(out, [
        (u.tag("lower"), u(rep.lower)),
        (u.tag("capacity"), u(rep.capacity)),
        (u.tag("upper"), u(rep.upper)),
        (u.tag("penalty"), u(rep.penalty)),
        (u.tag("w_corr"), u(rep.corr.value)),
        ("capacity_bits", rep.capacity_bits),
        ("entropic_lower[bits]", rep.entropic_lower_bits),
        ("entropic_upper[bits]", rep.entropic_upper_bits),
        ("holds", str(rep.holds).lower()),
    ])
    return EXIT_OK if rep.holds else EXIT_FAIL


def _state_and_h(args):
    state = Distribution(parse_vector(args.state))
    h = DiagonalHamiltonian(parse_vector(args.hamiltonian) if args.hamiltonian else np.zeros(state.dim))
    return state, h


def cmd_work(args, cfg, out, parser):
    thermo = cfg.thermo()
    u = Units(cfg.work_unit, thermo)
    _check_aberg_eps(parser, args.eps)
    if args.kind == "corr":
        joint = np.asarray(_numbers(args.joint) if not args.joint.strip().startswith("[")
                           else json.loads(args.joint), dtype=float)
        if joint.ndim != 2:
            parser.error("--joint must be a 2-d array (JSON) of probabilities")
        lo, hi = w_corr_state(BipartiteClassicalState(joint), args.eps, thermo)
        write_table(out, ["eps", u.tag("lower"), u.tag("upper")], [[args.eps, u(lo), u(hi)]])
        return EXIT_OK
    state, h = _state_and_h(args)
    lo, hi = w_ext_bounds(state, h, args.eps, thermo)
    if args.kind == "bounds":
        write_table(out, ["eps", u.tag("lower"), u.tag("upper")], [[args.eps, u(lo), u(hi)]])
        return EXIT_OK
    if args.k_steps < 1 or args.e_cut <= 0 or args.n_samples < 1:
        parser.error("need --k-steps >= 1, --e-cut > 0, --n-samples >= 1")
    proto = build_extraction_protocol(state, h, args.eps, args.k_steps, args.e_cut, thermo)
    samples = simulate_protocol(proto, state, thermo, args.n_samples, cfg.seed)
    delta = (args.delta_kt if args.delta_kt is not None else DEFAULT_DELTA_KT) * thermo.kT
    est = eps_deterministic_work(samples, args.eps, delta)
    w = samples.total_work
    write_table(out, ["eps", u.tag("delta"), u.tag("estimate"), "mass", u.tag("lower"),
                      u.tag("upper"), u.tag("mean"), u.tag("std"), "samples"],
                [[args.eps, u(delta), u(est.value), est.mass, u(lo), u(hi), u(w.mean()),
                  u(w.std()), len(samples)]])
    return EXIT_OK


def _free_set(args, ch, parser) -> FreeSetPolytope:
    if args.free_constant:
        return FreeSetPolytope.constant_channels(ch.in_dim, ch.out_dim)
    if not args.free:
        parser.error("witness needs --free files or --free-constant")
    return FreeSetPolytope(tuple(load_channel(p) for p in args.free))


def cmd_witness(args, cfg, out, parser):
    ch = load_channel(args.channel)
    free = _free_set(args, ch, parser)
    w = detect_resource(ch, free, tol=args.tol)
    if w is None:
        write_fields(out, [("resource", "absent")])
        return EXIT_OK
    rows = [("resource", "present"), ("payoff", w.payoff(ch)), ("free_max", w.free_max())]
    for i, (p, s, e) in enumerate(zip(w.prior.probs, w.states, w.povm)):
        rows += [(f"prior[{i}]", p), (f"state[{i}]", " ".join(fmt(x) for x in s.probs)),
                 (f"povm[{i}]", " ".join(fmt(x) for x in e))]
    if args.kind == "compile":
        thermo = cfg.thermo()
        u = Units(cfg.work_unit, thermo)
        g = compile_gap_witness(w, thermo)
        rows += [(u.tag(f"hamiltonian[{i}]"), " ".join(fmt(u(x)) for x in h.energies))
                 for i, h in enumerate(g.hamiltonians)]
        rows += [(u.tag("lhs"), u(g.lhs)), (u.tag("rhs"), u(g.rhs)), (u.tag("gap"), u(g.gap))]
    write_fields(out, rows)
    return EXIT_OK


def _capacity_row(job):
    path, eps, m_max, delta, omega = job
    ch = load_channel(path)
    c = one_shot_capacity(ch, eps, m_max).capacity_bits
    row = [eps, c]
    if delta is not None:
        row.append(capacity_upper_bound_d0(ch, eps, delta, m_max))
        row.append(capacity_lower_bound_dh(ch, eps, omega, m_max) if omega < eps <= 0.5 else float("nan"))
    return row


def cmd_sweep(args, cfg, out, parser):
    if args.kind == "capacity":
        grid = parse_vector(args.eps_grid)
        if np.any((grid <= 0) | (grid >= 1)):
            parser.error("--eps-grid values must lie in (0, 1)")
        with_bounds = args.delta is not None
        if with_bounds and (args.omega is None or not 0 < args.delta):
            parser.error("bounds in a sweep need --delta > 0 and --omega")
        jobs = [(args.channel, float(e), args.m_max, args.delta, args.omega) for e in grid]
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as ex:
                rows = list(ex.map(_capacity_row, jobs))
        else:
            rows = [_capacity_row(j) for j in jobs]
        headers = ["eps", "capacity[bits]"] + (["upper_d0[bits]", "lower_dh[bits]"] if with_bounds else [])
        write_table(out, headers, rows)
    elif args.kind == "asymptotic":
        if args.eps is None or not 0 < args.eps < 1:
            parser.error("--eps in (0, 1) is required")
        table = asymptotic_sweep(load_channel(args.channel), args.eps, args.k_max, args.m_max)
        write_table(out, ["k", "rate[bits]", "holevo[bits]", "converse[bits]"],
                    [[k, rate, chi, chi + math.log2(1 / (1 - args.eps)) / k]
                     for k, (rate, chi) in sorted(table.items())])
    else:
        thermo = cfg.thermo()
        u = Units(cfg.work_unit, thermo)
        state, h = _state_and_h(args)
        grid = parse_vector(args.eps_grid)
        for e in grid:
            _check_aberg_eps(parser, e)
        rows = [[e, *map(u, w_ext_bounds(state, h, float(e), thermo))] for e in grid]
        write_table(out, ["eps", u.tag("lower"), u.tag("upper")], rows)
    return EXIT_OK


# ---------------------------------------------------------------- verify suite

def _random_channel(rng, in_dim, out_dim):
    return ClassicalChannel(rng.dirichlet(np.ones(out_dim), size=in_dim).T)


def _dh_enumeration(q, r, eps):
    target = 1.0 - eps
    best = math.inf
    idx = range(q.size)
    for k in range(q.size + 1):
        for S in combinations(idx, k):
            qs = sum(q[list(S)])
            rs = sum(r[list(S)])
            if qs >= target - 1e-12:
                best = min(best, rs)
                continue
            for j in idx:
                if j in S or q[j] <= 0:
                    continue
                th = (target - qs) / q[j]
                if th <= 1.0:
                    best = min(best, rs + th * r[j])
    return -math.log2(best) if best > 0 else math.inf


def check_sandwich(rng, n):
    thermo = ThermoConfig()
    for _ in range(n):
        ch = _random_channel(rng, int(rng.integers(2, 5)), int(rng.integers(2, 5)))
        rep = verify_theorem1(ch, 0.25, 0.15, 0.05, 4, thermo)
        if not rep.holds:
            return False, f"violated on {ch.matrix.tolist()}"
    return True, f"{n} channels"


def check_domination(rng, n):
    for _ in range(n):
        d = int(rng.integers(2, 9))
        q, r = rng.dirichlet(np.ones(d)), rng.dirichlet(np.ones(d))
        d0 = [d0_smoothed(q, r, e).value_bits for e in (0.05, 0.2, 0.4)]
        dh = [dh_smoothed(q, r, e).value_bits for e in (0.05, 0.2, 0.4)]
        if any(a > b + 1e-9 for a, b in zip(d0, dh)):
            return False, "D0 > Dh"
        if any(x > y + 1e-12 for x, y in zip(d0, d0[1:])) or any(x > y + 1e-12 for x, y in zip(dh, dh[1:])):
            return False, "not monotone in eps"
    return True, f"{n} pairs"


def check_neyman_pearson(rng, n):
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(2, 7))
        q, r = rng.dirichlet(np.ones(d)), rng.dirichlet(np.ones(d))
        eps = float(rng.uniform(0.01, 0.9))
        worst = max(worst, abs(dh_smoothed(q, r, eps).value_bits - _dh_enumeration(q, r, eps)))
    return worst <= 1e-9, f"max abs diff {fmt(worst)}"


def check_gibbs_preservation(rng, n):
    hits = 0
    for _ in range(n):
        ch = _random_channel(rng, int(rng.integers(2, 5)), int(rng.integers(2, 5)))
        M = int(rng.integers(2, 5))
        cb = Codebook(tuple(int(c) for c in rng.integers(0, ch.in_dim, size=M)))
        eps = float(rng.uniform(0.0, 0.6))
        if optimal_success_probability(ch, cb) >= 1 - eps:
            hits += 1
            if gibbs_deviation(classical_version(ch, cb, ml_decoder(ch, cb))) > 2 * eps + 1e-9:
                return False, f"deviation above 2 eps at eps={fmt(eps)}"
    return True, f"{hits} successful codes"


def check_capacity_goldens(rng, n):
    cases = [(ClassicalChannel.identity(4), 0.01, 4, 2.0), (ClassicalChannel.identity(4), 0.1, 4, 2.0),
             (ClassicalChannel.bsc(0.1), 0.1, 2, 1.0), (ClassicalChannel.bsc(0.1), 0.05, 2, 0.0),
             (ClassicalChannel.constant([0.3, 0.7], 3), 0.1, 3, 0.0)]
    got = [one_shot_capacity(ch, e, m).capacity_bits for ch, e, m, _ in cases]
    return got == [c[3] for c in cases], " ".join(fmt(g) for g in got)


def check_holevo(rng, n):
    chi = holevo_classical(ClassicalChannel.bsc(0.1))
    ok = abs(chi - (1 - binary_entropy(0.1))) <= 1e-4
    ch = _random_channel(rng, 3, 3)
    vals = [constrained_holevo(ch, t, 3) for t in (0.0, 0.1, 0.3, 1.0)]
    ok = ok and all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
    ok = ok and vals[-1] <= holevo_classical(ch) + 1e-9
    return ok, f"chi {fmt(chi)}"


def check_witness(rng, n):
    ident = ClassicalChannel.identity(2)
    free = FreeSetPolytope.constant_channels(2, 2)
    w = detect_resource(ident, free)
    if w is None:
        return False, "no witness for identity"
    ok = abs(w.payoff(ident) - (1 - 1e-6)) <= 1e-12 and abs(w.free_max() - 0.5) <= 1e-12
    signs = []
    for t in (1.0, 2.0):
        g = compile_gap_witness(w, ThermoConfig(temperature=t))
        ok = ok and all(h.energies.min() > 0 for h in g.hamiltonians)
        signs.append(g.lhs - g.rhs > 0)
    ok = ok and all(signs)
    inside = ClassicalChannel.constant([0.4, 0.6], 2)
    ok = ok and detect_resource(inside, free) is None
    return ok, f"payoff {fmt(w.payoff(ident))} vs {fmt(w.free_max())}"


def check_hayashi_nagaoka(rng, n):
    a = rng.uniform(0, 1, n)
    b = rng.exponential(1.0, n) * rng.choice([0.0, 1e-3, 1.0], n)
    c = rng.exponential(1.0, n) + 1e-9
    bad = sum(not hayashi_nagaoka_commuting_check(float(x), float(y), float(z)) for x, y, z in zip(a, b, c))
    return bad == 0, f"{bad} failures in {n}"


def check_aberg(rng, n):
    thermo = ThermoConfig()
    cases = [(Distribution.point(2, 0), DiagonalHamiltonian.degenerate(2), 0.1)]
    for _ in range(n - 1):
        d = int(rng.integers(2, 5))
        cases.append((Distribution(rng.dirichlet(np.ones(d) * 0.5)), DiagonalHamiltonian(rng.uniform(0, 2, d)),
                      float(rng.uniform(0.05, EPS_MAX))))
    for k, (s, h, eps) in enumerate(cases):
        lo, hi = w_ext_bounds(s, h, eps, thermo)
        proto = build_extraction_protocol(s, h, eps, 200, 30.0, thermo)
        samples = simulate_protocol(proto, s, thermo, 100_000, int(rng.integers(1 << 31)))
        est = eps_deterministic_work(samples, eps, DEFAULT_DELTA_KT * thermo.kT)
        se = math.sqrt(eps * (1 - eps) / len(samples)) * float(samples.total_work.std())
        if not lo - 3 * se - 0.01 * abs(lo) <= est.value <= hi + 3 * se + 0.01 * abs(hi):
            return False, f"case {k}: estimate {fmt(est.value)} outside [{fmt(lo)}, {fmt(hi)}]"
    return True, f"{len(cases)} cases"


def check_asymptotic(rng, n):
    table = asymptotic_sweep(ClassicalChannel.bsc(0.05), 0.05, 3, 8)
    rates = [table[k][0] for k in (1, 2, 3)]
    chi = table[1][1]
    ok = all(a <= b + 1e-12 for a, b in zip(rates, rates[1:]))
    ok = ok and all(r <= chi + math.log2(1 / 0.95) / k + 1e-9 for k, r in zip((1, 2, 3), rates))
    return ok, "rates " + " ".join(fmt(r) for r in rates)


SUITES = {
    "quick": [("sandwich", check_sandwich, 4), ("entropy_domination", check_domination, 100),
              ("neyman_pearson", check_neyman_pearson, 60), ("gibbs_preservation", check_gibbs_preservation, 100),
              ("capacity_goldens", check_capacity_goldens, 1), ("holevo", check_holevo, 1),
              ("witness", check_witness, 1), ("hayashi_nagaoka", check_hayashi_nagaoka, 10_000)],
    "full": [("sandwich", check_sandwich, 50), ("entropy_domination", check_domination, 1000),
             ("neyman_pearson", check_neyman_pearson, 500), ("gibbs_preservation", check_gibbs_preservation, 500),
             ("aberg_achievability", check_aberg, 10), ("capacity_goldens", check_capacity_goldens, 1),
             ("holevo", check_holevo, 1), ("asymptotic_trend", check_asymptotic, 1),
             ("witness", check_witness, 1), ("hayashi_nagaoka", check_hayashi_nagaoka, 100_000)],
}


def cmd_verify(args, cfg, out, parser):
    rows, failed = [], False
    for k, (name, fn, n) in enumerate(SUITES[args.suite]):
        rng = np.random.default_rng([cfg.seed, k])
        try:
            ok, detail = fn(rng, n)
        except Exception as e:  # a crash is a failed check, not a CLI error
            ok, detail = False, f"{type(e).__name__}: {e}"
        failed |= not ok
        rows.append([name, "PASS" if ok else "FAIL", detail.replace(",", ";")])
    write_table(out, ["criterion", "status", "detail"], rows)
    return EXIT_FAIL if failed else EXIT_OK


# ---------------------------------------------------------------- parser

def _add_thermo(p):
    p.add_argument("--temperature", type=float)
    p.add_argument("--boltzmann-constant", type=float)
    p.add_argument("--work-unit", choices=["bits", "kT", "joules"], default="bits")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="thermocap", description=__doc__.splitlines()[0])
    ap.add_argument("--out", help="write output here instead of stdout")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    ap.add_argument("--seed", type=int, default=0)
    # the same flags are accepted after the subcommand too
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=argparse.SUPPRESS)
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", parents=[common], help="smoothed entropies of two distributions")
    p.add_argument("kind", choices=["d0", "dh", "rel"])
    p.add_argument("--q", required=True)
    p.add_argument("--r", required=True)
    p.add_argument("--delta", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--method", default="auto", choices=["auto", "pareto", "exhaustive", "quantized"])

    p = sub.add_parser("capacity", parents=[common], help="one-shot capacity by brute force")
    p.add_argument("--channel", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--m-max", type=int, required=True)

    p = sub.add_parser("bounds", parents=[common], help="work/capacity sandwich report")
    p.add_argument("--channel", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--m-max", type=int, required=True)
    _add_thermo(p)

    p = sub.add_parser("work", parents=[common], help="single-shot work extraction")
    p.add_argument("kind", choices=["simulate", "bounds", "corr"])
    p.add_argument("--state")
    p.add_argument("--hamiltonian", help="level energies; default degenerate")
    p.add_argument("--joint", help="JSON 2-d joint distribution (corr)")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--k-steps", type=int, default=200)
    p.add_argument("--e-cut", type=float, default=30.0)
    p.add_argument("--n-samples", type=int, default=100_000)
    p.add_argument("--delta-kt", type=float, help="window half-width in kT")
    _add_thermo(p)

    p = sub.add_parser("witness", parents=[common], help="detect a channel resource and compile its work witness")
    p.add_argument("kind", choices=["detect", "compile"])
    p.add_argument("--channel", required=True)
    p.add_argument("--free", nargs="*", default=[])
    p.add_argument("--free-constant", action="store_true", help="free set = all constant channels")
    p.add_argument("--tol", type=float, default=1e-9)
    _add_thermo(p)

    p = sub.add_parser("sweep", parents=[common], help="parameter grids as tables")
    p.add_argument("kind", choices=["capacity", "asymptotic", "work"])
    p.add_argument("--channel")
    p.add_argument("--eps-grid", default="0.01,0.05,0.1,0.2")
    p.add_argument("--eps", type=float)
    p.add_argument("--omega", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--m-max", type=int, default=4)
    p.add_argument("--k-max", type=int, default=3)
    p.add_argument("--state")
    p.add_argument("--hamiltonian")
    _add_thermo(p)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite; exit 1 on any failure")
    p.add_argument("--suite", choices=sorted(SUITES), default="quick")
    return ap


COMMANDS = {"entropy": cmd_entropy, "capacity": cmd_capacity, "bounds": cmd_bounds, "work": cmd_work,
            "witness": cmd_witness, "sweep": cmd_sweep, "verify": cmd_verify}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        if args.jobs < 1:
            parser.error("--jobs must be at least 1")
        if args.command in ("work", "sweep") and getattr(args, "kind", None) in ("simulate", "bounds", "work") \
                and not args.state:
            parser.error("--state is required")
        if args.command == "sweep" and args.kind != "work" and not args.channel:
            parser.error("--channel is required")
        if args.command == "work" and args.kind == "corr" and not args.joint:
            parser.error("--joint is required")
        cfg = _config(args, parser)
    except SystemExit:
        return EXIT_USAGE
    buf = io.StringIO()
    try:
        code = COMMANDS[args.command](args, cfg, buf, parser)
    except SystemExit:
        return EXIT_USAGE
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as e:
        sys.stderr.write(f"thermocap: error: {e}\n")
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w") as f:
            f.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return code


def main():
    sys.exit(run())
