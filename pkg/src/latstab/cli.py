"""Command-line front end: verification suites with CSV / text reports.

Exit status: 0 when every check passes, 1 when any check fails, 2 on a usage
or configuration error.  All stochastic commands require a seed; identical
configuration, seed and worker count give byte-identical output.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from typing import List, Optional

import numpy as np

from . import bounds as bounds_mod
from . import montecarlo as mc
from . import scalar as scalar_mod
from .action import lemma1_violations
from .bounds import ModelParams
from .group import RngState, ValidationError
from .lattice import Lattice, counts, enhanced_temporal_gauge
from .reporting import CheckRow, bound_row, info_row, to_csv, to_text

_COMMANDS = ("verify-lemma1", "bounds", "partition", "genfun", "scalar", "all")


# ---------------------------------------------------------------------------
# Suites


def lemma1_suite(n: int, samples: int, seed: int) -> List[CheckRow]:
    rows = []
    for k in (1, 2, 3, 4):
        violations, worst = lemma1_violations(n, k, samples, RngState(seed, stream=k))
        rows.append(
            bound_row(
                check=f"lemma1-violations-N{n}-k{k}",
                ref="plaquette-action<=k*N*sum|lambda|^2",
                value=float(violations),
                bound=0.0,
                side="upper",
            )
        )
        rows.append(info_row(f"lemma1-worst-margin-N{n}-k{k}", "min(bound-action)", worst))
    return rows


def bounds_suite(params: ModelParams) -> List[CheckRow]:
    report = bounds_mod.theorem2_bounds(params)
    xi = bounds_mod.jensen_xi(params)
    rows = [
        bound_row(
            "zu-upper-bound",
            "zu<=beta^(-N^2/2)*exp(cu)",
            report.upper.value,
            report.upper.bound,
            "upper",
        ),
        bound_row(
            "zl-lower-bound",
            "zl>=beta^(-N^2/2)*exp(cl)",
            report.lower.value,
            report.lower.bound,
            "lower",
        ),
        bound_row("zl-below-zu", "zl<=zu", report.z_l.value, report.z_u.value, "upper"),
        bound_row("jensen-below-zu", "exp(-2N*beta)<=zu", xi, report.z_u.value, "upper"),
        info_row("quadrature-error-zu", "refinement difference", report.z_u.error),
        info_row("quadrature-error-zl", "refinement difference", report.z_l.error),
    ]
    return rows


def partition_suite(params: ModelParams, sampler: mc.Sampler, sigma: float) -> List[CheckRow]:
    lattice = Lattice(params.d, params.L, params.a, params.bc)
    cnt = counts(lattice)
    est = mc.estimate_partition(lattice, params, sampler)
    zu = bounds_mod.z_u(params).value
    zl = bounds_mod.z_l(params).value
    n_lower = cnt.retained_bonds + (cnt.extra_bonds if params.bc == "periodic" else 0)
    lower = zl**n_lower
    upper = zu**cnt.retained_bonds
    slack = sigma * est.std_error
    gauged = len(enhanced_temporal_gauge(lattice).fixed)
    return [
        info_row("partition-estimate", "Z-hat +- sigma", est.real, margin=est.std_error),
        bound_row("partition-above-lower", "Z>=zl^(retained+extra)", est.real, lower, "lower", slack),
        bound_row("partition-below-upper", "Z<=zu^retained", est.real, upper, "upper", slack),
        bound_row(
            "gauge-fixed-count",
            "fixed-bonds==sites-1",
            float(gauged),
            float(cnt.sites - 1),
            "upper",
        ),
        bound_row(
            "gauge-fixed-count-lower",
            "fixed-bonds==sites-1",
            float(gauged),
            float(cnt.sites - 1),
            "lower",
        ),
    ]


def genfun_suite(
    params: ModelParams, sampler: mc.Sampler, sigma: float, r: int, strength: float
) -> List[CheckRow]:
    lattice = Lattice(params.d, params.L, params.a, params.bc)
    cnt = counts(lattice)
    plaqs = list(lattice.plaquettes())[:r]
    if len(plaqs) < r:
        raise ValidationError(f"lattice has fewer than {r} plaquettes")

    zero = mc.estimate_genfun(
        lattice, params, mc.SourceSpec(tuple(plaqs), (0.0,) * r), sampler
    )
    rows = [
        bound_row("genfun-at-zero", "G(0)==1", abs(zero.mean - 1.0), 0.0, "upper"),
    ]

    est = mc.estimate_genfun(
        lattice, params, mc.SourceSpec(tuple(plaqs), (strength,) * r), sampler
    )
    zl = bounds_mod.z_l(params).value
    exponent_u = 2**params.d * cnt.retained_bonds / (r * cnt.sites)
    exponent_l = 2**params.d * (cnt.retained_bonds + cnt.extra_bonds) / (r * cnt.sites)
    bound = 1.0
    for _ in range(r):
        bound *= mc.z_u_j(r * strength, params).value.value ** exponent_u
    bound /= zl**exponent_l
    rows.append(
        bound_row(
            "genfun-product-bound",
            "|G|<=prod zu(rJ)^e_u / zl^e_l",
            abs(est.mean),
            bound,
            "upper",
            sigma * est.std_error,
        )
    )

    zuj = mc.z_u_j(strength, params)
    rows.append(
        bound_row(
            "sourced-zu-closed-bound",
            "zu(J)<=beta^(-N^2/2)exp(cu'+pi^2/8*N*J^2)",
            zuj.value.value,
            zuj.closed_bound,
            "upper",
        )
    )
    return rows


def scalar_suite(sp: scalar_mod.ScalarFieldParams) -> List[CheckRow]:
    rows = []
    s2 = scalar_mod.scaling_factor(sp) ** 2
    worst = 0.0
    for sep in ([0.0] * sp.d, [sp.a] + [0.0] * (sp.d - 1), [sp.a, sp.a] + [0.0] * (sp.d - 2)):
        unscaled = scalar_mod.propagator_unscaled(sp, sep)
        scaled = scalar_mod.propagator_scaled(sp, sep)
        worst = max(worst, abs(scaled - s2 * unscaled) / abs(scaled))
    rows.append(
        bound_row("scaling-identity", "scaled==s^2*unscaled (rel)", worst, 1e-10, "upper")
    )

    m = scalar_mod.particle_mass(sp)
    residual = abs(
        (sp.kappa_u**2 / sp.a**2) * (1.0 - math.cosh(m * sp.a)) + sp.m_u**2 / 2.0
    )
    rows.append(
        bound_row("mass-dispersion-residual", "D(i*m)==0", residual, 1e-10 * max(1.0, sp.m_u**2), "upper")
    )

    if sp.d in (3, 4):
        c0 = scalar_mod.coincident_bound_constant(sp.d)
        c0_fine = scalar_mod.coincident_bound_constant(sp.d, t_cut=4.0e4)
        rows.append(
            bound_row(
                "massless-coincident-stability",
                "|C0(T)-C0(4T)|/C0<=1e-6",
                abs(c0 - c0_fine) / c0,
                1e-6,
                "upper",
            )
        )
        massless = scalar_mod.ScalarFieldParams(d=sp.d, a=sp.a, m_u=0.0, kappa_u=sp.kappa_u)
        pts = [[0.0] * sp.d, [sp.a] + [0.0] * (sp.d - 1), [2 * sp.a] + [0.0] * (sp.d - 1)]
        cov = np.empty((3, 3))
        for i in range(3):
            for j in range(3):
                sep = [pi - pj for pi, pj in zip(pts[i], pts[j])]
                cov[i, j] = scalar_mod.propagator_scaled(massless, sep)
        strengths = (0.7, -0.4, 0.2)
        value = scalar_mod.gaussian_genfun(cov, strengths)
        bound = math.exp(c0 * 3 * sum(k * k for k in strengths))
        rows.append(
            bound_row("gaussian-genfun-bound", "exp(KC K/2)<=exp(C0 r sum K^2)", value, bound, "upper")
        )
    return rows


# ---------------------------------------------------------------------------
# Configuration plumbing


def _load_config(path: Optional[str]) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser()
    if path:
        read = cfg.read(path)
        if not read:
            raise ValidationError(f"cannot read config file {path!r}")
    return cfg


def _get(cfg, section, key, flag_value, default, cast):
    if flag_value is not None:
        return flag_value
    if cfg.has_option(section, key):
        return cast(cfg.get(section, key))
    return default


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latstab",
        description="Verify lattice gauge stability bounds, partition-function "
        "sandwiches, generating-functional bounds and scalar-field scaling relations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", nargs="?", default=None, help="optional key=value config file")
        p.add_argument("--d", type=int, default=None)
        p.add_argument("--L", type=int, default=None)
        p.add_argument("--N", type=int, default=None)
        p.add_argument("--a", type=float, default=None)
        p.add_argument("--g2", type=float, default=None)
        p.add_argument("--g0", type=float, default=None)
        p.add_argument("--bc", choices=("free", "periodic"), default=None)
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--sigma", type=float, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("csv", "text"), default=None)
    return parser


def _model_params(args, cfg) -> ModelParams:
    g0 = _get(cfg, "model", "g0", args.g0, None, float)
    g2 = _get(cfg, "model", "g2", args.g2, 1.0, float)
    if g0 is None:
        g0 = math.sqrt(g2)
    return ModelParams(
        d=_get(cfg, "model", "d", args.d, 2, int),
        L=_get(cfg, "model", "L", args.L, 2, int),
        n=_get(cfg, "model", "N", args.N, 1, int),
        a=_get(cfg, "model", "a", args.a, 1.0, float),
        g2=g2,
        g0=g0,
        bc=_get(cfg, "model", "bc", args.bc, "free", str),
    )


def _sampler(args, cfg) -> mc.Sampler:
    seed = _get(cfg, "sampler", "seed", args.seed, None, int)
    if seed is None:
        raise ValidationError("stochastic commands need --seed (or sampler.seed in the config)")
    return mc.Sampler(
        n_samples=_get(cfg, "sampler", "samples", args.samples, 100_000, int),
        rng=RngState(seed),
        workers=_get(cfg, "sampler", "workers", args.workers, 1, int),
    )


def run(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        sigma = _get(cfg, "sampler", "sigma", args.sigma, 3.0, float)
        rows: List[CheckRow] = []
        if args.command in ("verify-lemma1", "all"):
            sampler = _sampler(args, cfg)
            n = _get(cfg, "model", "N", args.N, 1, int)
            rows += lemma1_suite(n, sampler.n_samples, _get(cfg, "sampler", "seed", args.seed, 0, int))
        if args.command in ("bounds", "all"):
            rows += bounds_suite(_model_params(args, cfg))
        if args.command in ("partition", "all"):
            rows += partition_suite(_model_params(args, cfg), _sampler(args, cfg), sigma)
        if args.command in ("genfun", "all"):
            params = _model_params(args, cfg)
            if args.command == "all" and (params.bc != "periodic" or params.L % 2):
                pass  # generating functional needs an even periodic lattice; skip in 'all'
            else:
                rows += genfun_suite(
                    params,
                    _sampler(args, cfg),
                    sigma,
                    r=int(cfg.get("genfun", "r", fallback="1")),
                    strength=float(cfg.get("genfun", "strength", fallback="0.5")),
                )
        if args.command in ("scalar", "all"):
            sp = scalar_mod.ScalarFieldParams(
                d=_get(cfg, "scalar", "d", args.d, 3, int),
                a=_get(cfg, "scalar", "a", args.a, 1.0, float),
                m_u=float(cfg.get("scalar", "m_u", fallback="1.0")),
                kappa_u=float(cfg.get("scalar", "kappa_u", fallback="1.0")),
            )
            rows += scalar_suite(sp)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    fmt_kind = _get(cfg, "output", "format", args.format, "csv", str)
    text = to_csv(rows) if fmt_kind == "csv" else to_text(rows, title=args.command)
    out_path = _get(cfg, "output", "out", args.out, None, str)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if all(r.passed for r in rows) else 1


def main() -> None:
    sys.exit(run())
