"""Command-line entry point: ``lifespan <subcommand> --config FILE --out DIR``.

Every subcommand writes ``<subcommand>.csv`` into the output directory. The
first line is a comment carrying the SHA-256 of the effective config (after
``--set`` overrides), the seed and the subcommand; the second is the column
header. Floats are written as ``%.16e`` so they read back bit-exactly.

Exit status: 0 on success, 1 for config or validation errors, 2 for
numerical failures.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from dataclasses import dataclass, field

from .config import FieldError, apply_override, build_scenario, config_digest, load_config, locate_field
from .errors import ConfigError, ConvergenceError, LifespanError
from .models import FixedRangeEnergy, TimeDriven, packet_capacity
from .montecarlo import empirical_vs_analytic, simulate_multi_hop_betas, simulate_single_hop_betas
from .multihop import RingConfig, multihop_ccdf, ring_probability
from .network import (LifetimeQuery, asymptotic_error_bound, asymptotic_predict, decay_rate,
                      network_ccdf, network_pdf, survival_moments)
from .sensor import lifetime_time_driven, survival_clt, survival_exact, survival_floor

__all__ = ["main", "SUBCOMMANDS"]


@dataclass
class Table:
    name: str
    columns: tuple
    rows: list = field(default_factory=list)
    plot: dict | None = None
    # columns where +inf is a legitimate value rather than a numerical failure
    allow_inf: tuple = ()


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _format(value):
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".16e")
    return str(value)


def _moments(sc, tau):
    return survival_moments(sc.shape, sc.energy, sc.traffic, tau, capacity=sc.capacity,
                            spec=sc.quadrature)


def _ring_setups(sc):
    """(range, RingConfig, FixedRangeEnergy) for each range and node count in the sweep."""
    e = sc.energy
    for r in sc.ranges_m:
        energy = FixedRangeEnergy(r, e.k, e.c, e.alpha, e.initial_energy)
        for n in sc.nodes:
            yield r, RingConfig(sc.shape, r, n, sc.traffic.rate), energy


def _multihop_capacity(sc):
    if sc.capacity == "clt":
        raise FieldError("capacity", "multi-hop analysis supports continuous or floor capacity")
    return sc.capacity


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def run_sensor_ccdf(sc):
    cols = ("distance_m", "capacity", "rate_per_h", "tau", "exact", "floor", "clt")
    table = Table("sensor-ccdf", cols,
                  plot=dict(x="tau", y="exact", group_by=("distance_m",), ylabel="P(t_i >= tau)"))
    for d in sc.sensor_distances_m:
        p = float(packet_capacity(sc.energy, d))
        if isinstance(sc.traffic, TimeDriven):
            life = lifetime_time_driven(p, sc.traffic.period)
            for tau in sc.taus:
                alive = 1.0 if tau <= life else 0.0
                table.rows.append((d, p, 1.0 / sc.traffic.period, tau, alive, alive, alive))
            continue
        lam = float(sc.traffic.rate_at(d))
        for tau in sc.taus:
            table.rows.append((d, p, lam, tau, survival_exact(p, lam, tau),
                               survival_floor(p, lam, tau), survival_clt(p, lam, tau)))
    return [table]


def run_network_ccdf(sc):
    if sc.mode == "multi-hop":
        return run_multihop_ccdf(sc, name="network-ccdf")
    cols = ("nodes", "beta", "tau", "mu", "sigma", "ccdf")
    table = Table("network-ccdf", cols,
                  plot=dict(x="tau", y="ccdf", group_by=("nodes", "beta"), ylabel="P(L >= tau)"))
    moments = {tau: _moments(sc, tau) for tau in sc.taus}
    for n in sc.nodes:
        for beta in sc.betas:
            for tau in sc.taus:
                m = moments[tau]
                ccdf = network_ccdf(LifetimeQuery(tau, beta, n), m)
                table.rows.append((n, beta, tau, m.mu, m.sigma, ccdf))
    return [table]


def run_network_pdf(sc):
    cols = ("nodes", "beta", "tau", "mu", "pdf")
    table = Table("network-pdf", cols,
                  plot=dict(x="tau", y="pdf", group_by=("nodes", "beta"), ylabel="density (1/h)"))
    moments = {tau: _moments(sc, tau) for tau in sc.taus}
    for n in sc.nodes:
        for beta in sc.betas:
            for tau in sc.taus:
                pdf = network_pdf(tau, LifetimeQuery(tau, beta, n), sc.shape, sc.energy,
                                  sc.traffic, sc.quadrature, capacity=sc.capacity)
                table.rows.append((n, beta, tau, moments[tau].mu, pdf))
    return [table]


def run_multihop_ccdf(sc, name="multihop-ccdf"):
    if sc.mode != "multi-hop":
        raise FieldError("mode", "multihop-ccdf needs mode \"multi-hop\"")
    capacity = _multihop_capacity(sc)
    cols = ("range_m", "nodes", "beta", "tau", "q1", "ccdf")
    table = Table(name, cols,
                  plot=dict(x="tau", y="ccdf", group_by=("range_m", "nodes", "beta"),
                            ylabel="P(L >= tau)"))
    for r, cfg, energy in _ring_setups(sc):
        q1 = ring_probability(cfg, 1)
        for beta in sc.betas:
            for tau in sc.taus:
                ccdf = multihop_ccdf(cfg, energy, tau, beta, capacity=capacity)
                table.rows.append((r, cfg.nodes, beta, tau, q1, ccdf))
    return [table]


def _simulate(sc):
    """Yield (group, beta, EmpiricalCcdf, analytic callable) over the sweep.

    Every group reuses the master seed, so curves of one sweep share their
    random numbers.
    """
    if sc.mode == "multi-hop":
        capacity = _multihop_capacity(sc)
        for r, cfg, energy in _ring_setups(sc):
            curves = simulate_multi_hop_betas(cfg, energy, sc.betas, sc.trials, sc.seed,
                                              sampler=sc.sampler)
            for beta, emp in curves.items():
                def analytic(tau, cfg=cfg, energy=energy, beta=beta):
                    return multihop_ccdf(cfg, energy, tau, beta, capacity=capacity)
                yield (r, cfg.nodes), beta, emp, analytic
        return
    cache = {}

    def mu_at(tau):
        if tau not in cache:
            cache[tau] = _moments(sc, tau)
        return cache[tau]

    for n in sc.nodes:
        curves = simulate_single_hop_betas(sc.shape, sc.energy, sc.traffic, n, sc.betas,
                                           sc.trials, sc.seed, sampler=sc.sampler)
        for beta, emp in curves.items():
            def analytic(tau, n=n, beta=beta):
                return network_ccdf(LifetimeQuery(tau, beta, n), mu_at(tau))
            yield (n,), beta, emp, analytic


def _group_columns(sc):
    return ("range_m", "nodes") if sc.mode == "multi-hop" else ("nodes",)


def run_simulate(sc):
    group = _group_columns(sc)
    curve = Table("simulate", group + ("beta", "tau", "empirical", "ci_low", "ci_high", "trials"),
                  plot=dict(x="tau", y="empirical", group_by=group + ("beta",),
                            band=("ci_low", "ci_high"), ylabel="empirical P(L >= tau)"))
    samples = Table("simulate-samples", group + ("beta", "rank", "lifetime"))
    for key, beta, emp, _ in _simulate(sc):
        lo, hi = emp.ci(list(sc.taus), sc.level)
        values = emp.eval(list(sc.taus))
        for j, tau in enumerate(sc.taus):
            curve.rows.append(key + (beta, tau, float(values[j]), float(lo[j]), float(hi[j]),
                                     len(emp)))
        for rank, life in enumerate(emp.samples, start=1):
            samples.rows.append(key + (beta, rank, float(life)))
    return [curve, samples]


def run_compare(sc):
    group = _group_columns(sc)
    cols = group + ("beta", "tau", "empirical", "analytic", "deviation", "ci_low", "ci_high",
                    "covered", "within_tolerance", "max_abs_deviation")
    table = Table("compare", cols,
                  plot=dict(x="tau", y="deviation", group_by=group + ("beta",),
                            ylabel="analytic - empirical"))
    summary = Table("compare-summary", group + ("beta", "max_abs_deviation", "tolerance",
                                                "all_within", "all_covered"))
    for key, beta, emp, analytic in _simulate(sc):
        report = empirical_vs_analytic(emp, analytic, sc.taus, sc.level)
        ok = report.within(sc.tolerance)
        worst = report.max_abs_deviation
        for j, row in enumerate(report.rows()):
            table.rows.append(key + (beta,) + row[:-1] + (row[-1], bool(ok[j]), worst))
        summary.rows.append(key + (beta, worst, sc.tolerance, bool(ok.all()),
                                   bool(report.covered.all())))
    return [table, summary]


def run_predict(sc):
    cols = ("nodes", "beta", "tau", "mu", "a", "verdict", "decay_rate", "error_bound", "ccdf")
    # sigma = 0 (e.g. tau = 0) makes the decay rate infinite: the limit is exact
    table = Table("predict", cols,
                  plot=dict(x="tau", y="ccdf", group_by=("nodes", "beta"), ylabel="P(L >= tau)"),
                  allow_inf=("decay_rate",))
    for tau in sc.taus:
        m = _moments(sc, tau)
        for n in sc.nodes:
            for beta in sc.betas:
                verdict = asymptotic_predict(beta, m.mu)
                table.rows.append((n, beta, tau, m.mu, 1.0 - beta - m.mu, verdict.value,
                                   decay_rate(beta, m.mu), asymptotic_error_bound(n, beta, m.mu),
                                   network_ccdf(LifetimeQuery(tau, beta, n), m)))
    table.rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return [table]


SUBCOMMANDS = {
    "sensor-ccdf": (run_sensor_ccdf,
                    "Single-sensor survival P(t_i >= tau) at each sensor_distances_m.\n"
                    "columns: distance_m, capacity, rate_per_h, tau, exact, floor, clt"),
    "network-ccdf": (run_network_ccdf,
                     "Network lifetime ccdf over the tau x beta x nodes sweep.\n"
                     "columns: nodes, beta, tau, mu, sigma, ccdf\n"
                     "(multi-hop mode: the multihop-ccdf columns)"),
    "network-pdf": (run_network_pdf,
                    "Density of the single-hop network lifetime.\n"
                    "columns: nodes, beta, tau, mu, pdf"),
    "multihop-ccdf": (run_multihop_ccdf,
                      "First-ring lifetime ccdf of the ring model over ranges_m x beta x tau.\n"
                      "columns: range_m, nodes, beta, tau, q1, ccdf"),
    "simulate": (run_simulate,
                 "Monte Carlo lifetimes and their empirical ccdf.\n"
                 "simulate.csv columns: [range_m,] nodes, beta, tau, empirical, ci_low, ci_high, trials\n"
                 "simulate-samples.csv columns: [range_m,] nodes, beta, rank, lifetime"),
    "compare": (run_compare,
                "Analytic ccdf against the Monte Carlo one.\n"
                "compare.csv columns: [range_m,] nodes, beta, tau, empirical, analytic, deviation,\n"
                "  ci_low, ci_high, covered, within_tolerance, max_abs_deviation\n"
                "compare-summary.csv columns: [range_m,] nodes, beta, max_abs_deviation,\n"
                "  tolerance, all_within, all_covered"),
    "predict": (run_predict,
                "Large-network verdict from the sign of a = 1 - beta - mu.\n"
                "columns: nodes, beta, tau, mu, a, verdict, decay_rate, error_bound, ccdf\n"
                "(decay_rate is inf where sigma = 0)"),
}


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="lifespan",
                     description="Lifetime probability of wireless sensor networks.")
    subs = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND", required=True)
    for name, (_, doc) in SUBCOMMANDS.items():
        sub = subs.add_parser(name, help=doc.splitlines()[0], description=doc,
                              formatter_class=argparse.RawDescriptionHelpFormatter)
        sub.add_argument("--config", required=True, help="JSON scenario file")
        sub.add_argument("--set", dest="overrides", action="append", default=[],
                         metavar="KEY=VALUE",
                         help="override a config field by dotted path; VALUE is read as JSON")
        sub.add_argument("--out", required=True, help="output directory")
        sub.add_argument("--plot", action="store_true",
                         help="also write a PNG figure next to each CSV")
    return parser


def write_table(path, table, header):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(header + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_format(v) for v in row])


def _fail(code, message):
    print(f"lifespan: {message}", file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    text = ""
    try:
        data, text = load_config(args.config)
        for item in args.overrides:
            data = apply_override(data, item)
        scenario = build_scenario(data)
        digest = config_digest(data)
    except FieldError as exc:
        line = exc.line or locate_field(text, exc.path)
        where = f"{args.config}:{line}: " if line else f"{args.config}: "
        return _fail(1, f"{where}{exc}")
    except (ConfigError, ValueError) as exc:
        return _fail(1, f"{args.config}: {exc}")

    run = SUBCOMMANDS[args.subcommand][0]
    try:
        tables = run(scenario)
    except FieldError as exc:
        line = locate_field(text, exc.path)
        where = f"{args.config}:{line}: " if line else f"{args.config}: "
        return _fail(1, f"{where}{exc}")
    except (ConvergenceError, ArithmeticError) as exc:
        return _fail(2, f"numerical failure in {args.subcommand}: {exc}")
    except (LifespanError, ValueError) as exc:
        return _fail(1, f"invalid scenario for {args.subcommand}: {exc}")

    for table in tables:
        for row in table.rows:
            bad = [v for col, v in zip(table.columns, row) if isinstance(v, float)
                   and not math.isfinite(v) and not (v == math.inf and col in table.allow_inf)]
            if bad:
                return _fail(2, f"non-finite value in {table.name} output: {row}")

    os.makedirs(args.out, exist_ok=True)
    header = f"# config_sha256={digest} seed={scenario.seed} subcommand={args.subcommand}"
    for table in tables:
        path = os.path.join(args.out, f"{table.name}.csv")
        write_table(path, table, header)
        if args.plot and table.plot:
            from .plotting import plot_curves
            plot_curves(os.path.join(args.out, f"{table.name}.png"), table.columns, table.rows,
                        title=args.subcommand, **table.plot)
    return 0


if __name__ == "__main__":
    sys.exit(main())
