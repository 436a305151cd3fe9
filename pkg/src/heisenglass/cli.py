"""Batch command-line front end.

Four commands: ``spectrum-report`` (per-eigenstate rows for one system),
``phase-diagram`` (eigenstate scatter data across a list of decay
exponents), ``scaling`` (mean concurrence and positive-concurrence
probability versus L, with fits), and ``verify`` (the invariant suite).
Outputs are CSV with a single ``# {json}`` config-echo header line, or
JSON for fit results.  Reruns with the same master seed are
byte-identical regardless of worker count: every disorder sample is
seeded by (master, index) alone and rows are written in sample order.

Exit codes: 0 ok, 1 invariant or runtime failure, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, basis, couplings, ensembles, entanglement, fitting, ladder, sector, spectrum, verify

WORKERS_ENV = "HEISENGLASS_WORKERS"

REPORT_HEADER = "sample," + entanglement.StateReport.CSV_HEADER
PHASE_HEADER = "sample,index,avg_concurrence,PR,promoted,degenerate"

SCALING_TARGETS = ("eigenstates", "random", "random-promoted")
_TARGET_KIND = {"random": ensembles.RANDOM_2P, "random-promoted": ensembles.RANDOM_PROMOTED_2P}


class ConfigError(ValueError):
    """Invalid command-line configuration (exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One run's full parameter set; echoed into every output header."""

    command: str
    model: str = "ir"
    sigma: float | None = None
    sites: tuple[int, ...] = (25,)
    magnons: int = 2
    samples: int = 50
    seed: int = 0
    pairs: str = "all"
    out: Path = Path("out")
    target: str | None = None
    sigmas: tuple[float, ...] | None = None
    zero_sum: bool = False
    degtol: float | None = None
    ladder_tol: float = ladder.LADDER_TOL
    workers: int = 1

    def header(self) -> dict:
        """JSON-safe config echo.

        The worker count is deliberately omitted: it must never change
        the output bytes, so it has no business in the header.
        """
        d = {
            "command": self.command,
            "model": self.model,
            "sigma": _json_float(self.sigma),
            "sites": list(self.sites),
            "magnons": self.magnons,
            "samples": self.samples,
            "seed": self.seed,
            "pairs": self.pairs,
            "target": self.target,
            "sigmas": None if self.sigmas is None else [_json_float(s) for s in self.sigmas],
            "zero_sum": self.zero_sum,
            "degtol": self.degtol,
            "ladder_tol": self.ladder_tol,
            "version": __version__,
        }
        return d


def _json_float(x: float | None):
    if x is None:
        return None
    return "inf" if math.isinf(x) else x


def format_sigma(sigma: float) -> str:
    return "inf" if math.isinf(sigma) else format(sigma, "g")


def resolve_model(name: str, sigma: float | None) -> couplings.Model:
    """Map (model flag, sigma) to a coupling model; sigma=inf means NN."""
    if name == "ir":
        return couplings.InfiniteRange()
    if name == "nn":
        return couplings.NearestNeighbour()
    if name == "pl":
        if sigma is None:
            raise ConfigError("--model pl requires --sigma")
        return sigma_model(sigma)
    raise ConfigError(f"unknown model {name!r}")


def sigma_model(sigma: float) -> couplings.Model:
    if math.isinf(sigma):
        return couplings.NearestNeighbour()
    return couplings.PowerLaw(sigma)


def scoped_seed(master_seed: int, scope: int) -> int:
    """Derive an independent master seed for one scope (e.g. one L)."""
    return int(np.random.SeedSequence(entropy=(master_seed, scope)).generate_state(1, np.uint64)[0])


def eigenstate_sample(
    model: couplings.Model,
    sites: int,
    magnons: int,
    master_seed: int,
    index: int,
    degtol: float | None = None,
    ladder_tol: float = ladder.LADDER_TOL,
) -> list[entanglement.StateReport]:
    """Full per-eigenstate report for one disorder realization."""
    cm = couplings.sample_couplings(model, sites, couplings.sample_seed(master_seed, index))
    lower = basis.build_basis(sites, magnons - 1)
    upper = basis.build_basis(sites, magnons)
    pmap = ladder.promotion_map(lower, upper)
    spec = spectrum.diagonalize(sector.assemble(cm, upper), degtol=degtol)
    cls = ladder.classify(spec, pmap, ladder_tol)
    cbar = entanglement.average_concurrence_columns(upper, cls.vectors)
    pr = 1.0 / np.sum(cls.vectors**4, axis=0)
    shift = spec.eigenvalues - cm.coupling_sum()
    deg = spec.degenerate_mask()
    return [
        entanglement.StateReport(
            index=k,
            eigenvalue=float(spec.eigenvalues[k]),
            e_minus_sj=float(shift[k]),
            avg_concurrence=float(cbar[k]),
            participation=float(pr[k]),
            promoted=int(cls.labels[k]),
            degenerate=bool(deg[k]),
        )
        for k in range(spec.dim)
    ]


def _eigen_job(args: tuple) -> list[entanglement.StateReport]:
    model_d, sites, magnons, seed, index, degtol, ladder_tol = args
    model = couplings.model_from_dict(model_d)
    return eigenstate_sample(model, sites, magnons, seed, index, degtol, ladder_tol)


def _promoted_summary_job(args: tuple) -> tuple[float, float]:
    """Per-sample (mean avg-concurrence, mean positive-pair fraction) of promoted states."""
    model_d, sites, magnons, seed, index, degtol, ladder_tol = args
    model = couplings.model_from_dict(model_d)
    cm = couplings.sample_couplings(model, sites, couplings.sample_seed(seed, index))
    lower = basis.build_basis(sites, magnons - 1)
    upper = basis.build_basis(sites, magnons)
    pmap = ladder.promotion_map(lower, upper)
    spec = spectrum.diagonalize(sector.assemble(cm, upper), degtol=degtol)
    cls = ladder.classify(spec, pmap, ladder_tol)
    mask = cls.labels == ladder.PROMOTED
    vecs = cls.vectors[:, mask]
    cbar = entanglement.average_concurrence_columns(upper, vecs)
    pos = entanglement.positive_fraction_columns(upper, vecs)
    return float(cbar.mean()), float(pos.mean())


def _map_jobs(fn, jobs: list[tuple], workers: int) -> list:
    """Run jobs, preserving submission order independent of completion order."""
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=1))


def _write_output(path: Path, header: dict, lines: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    body = "\n".join(lines)
    path.write_text(f"# {json.dumps(header, sort_keys=True)}\n{body}\n")


def cmd_spectrum_report(cfg: ExperimentConfig) -> int:
    model = resolve_model(cfg.model, cfg.sigma)
    sites = cfg.sites[0]
    jobs = [
        (couplings.model_to_dict(model), sites, cfg.magnons, cfg.seed, k, cfg.degtol, cfg.ladder_tol)
        for k in range(cfg.samples)
    ]
    rows = [REPORT_HEADER]
    for k, reports in enumerate(_map_jobs(_eigen_job, jobs, cfg.workers)):
        rows.extend(f"{k},{rep.csv_row()}" for rep in reports)
    _write_output(cfg.out / "spectrum_report.csv", cfg.header(), rows)
    return 0


def cmd_phase_diagram(cfg: ExperimentConfig) -> int:
    assert cfg.sigmas is not None
    sites = cfg.sites[0]
    for sigma in cfg.sigmas:
        model = sigma_model(sigma)
        jobs = [
            (couplings.model_to_dict(model), sites, cfg.magnons, cfg.seed, k, cfg.degtol, cfg.ladder_tol)
            for k in range(cfg.samples)
        ]
        rows = [PHASE_HEADER]
        for k, reports in enumerate(_map_jobs(_eigen_job, jobs, cfg.workers)):
            rows.extend(
                f"{k},{rep.index},{rep.avg_concurrence!r},{rep.participation!r},"
                f"{rep.promoted},{int(rep.degenerate)}"
                for rep in reports
            )
        header = dict(cfg.header(), sigma=_json_float(sigma))
        _write_output(cfg.out / f"phase_sigma_{format_sigma(sigma)}.csv", header, rows)
    return 0


def _eigenstate_estimates(cfg: ExperimentConfig, model: couplings.Model) -> list[ensembles.MCEstimate]:
    kind = f"eigenstates-{model.name}"
    out = []
    for sites in cfg.sites:
        seed = scoped_seed(cfg.seed, sites)
        jobs = [
            (couplings.model_to_dict(model), sites, cfg.magnons, seed, k, cfg.degtol, cfg.ladder_tol)
            for k in range(cfg.samples)
        ]
        values = np.array(_map_jobs(_promoted_summary_job, jobs, cfg.workers))
        for col, quantity in ((0, ensembles.MEAN_CONCURRENCE), (1, ensembles.PROB_POSITIVE)):
            v = values[:, col]
            out.append(
                ensembles.MCEstimate(
                    quantity=quantity,
                    kind=kind,
                    pair_policy="all",
                    sites=sites,
                    n_samples=cfg.samples,
                    mean=float(v.mean()),
                    stderr=float(v.std(ddof=1) / math.sqrt(cfg.samples)),
                )
            )
    return out


def _ensemble_estimates(cfg: ExperimentConfig, kind: str) -> list[ensembles.MCEstimate]:
    out = []
    for sites in cfg.sites:
        spec = ensembles.EnsembleSpec(
            kind=kind,
            sites=sites,
            n_samples=cfg.samples,
            seed=scoped_seed(cfg.seed, sites),
            pair_policy=cfg.pairs,
            zero_sum=cfg.zero_sum,
        )
        out.append(ensembles.estimate(spec, ensembles.MEAN_CONCURRENCE))
        out.append(ensembles.estimate(spec, ensembles.PROB_POSITIVE))
    return out


def _reference_rows(sites: tuple[int, ...]) -> list[ensembles.MCEstimate]:
    """Closed-form overlay curves, emitted with kind='reference'."""
    rows = []
    for L in sites:
        bound = ladder.localized_promotion_bound(L)
        forms = ensembles.closed_forms(L)
        for quantity, value in (
            ("bound-average-concurrence", bound.average_concurrence),
            ("bound-prob-positive", bound.probability),
            ("reference-promoted-concurrence", forms.mean_concurrence_promoted2p),
            ("reference-random2p-concurrence", forms.mean_concurrence_random2p),
        ):
            rows.append(
                ensembles.MCEstimate(
                    quantity=quantity,
                    kind="reference",
                    pair_policy="-",
                    sites=L,
                    n_samples=0,
                    mean=float(value),
                    stderr=0.0,
                )
            )
    return rows


def _fit_block(family: str, estimates: list[ensembles.MCEstimate]) -> dict:
    L = np.array([e.sites for e in estimates], dtype=np.float64)
    y = np.array([e.mean for e in estimates])
    err = np.array([e.stderr for e in estimates])
    if not np.all(err > 0):
        err = None  # a zero stderr would poison the weighted fit
    block: dict = {"family": family}
    try:
        results = fitting.scaling_pipeline(family, L, y, err)
    except fitting.FitError as exc:
        return {"family": family, "error": str(exc)}
    for key, res in results.items():
        block[key] = None if res is None else res.as_dict()
    return block


def cmd_scaling(cfg: ExperimentConfig) -> int:
    if cfg.target == "eigenstates":
        model = resolve_model(cfg.model, cfg.sigma)
        estimates = _eigenstate_estimates(cfg, model)
        prob_family = fitting.EXP_SATURATION
    else:
        estimates = _ensemble_estimates(cfg, _TARGET_KIND[cfg.target])
        prob_family = fitting.POWER_OFFSET

    rows = [ensembles.MCEstimate.CSV_HEADER]
    rows.extend(e.csv_row() for e in estimates)
    rows.extend(r.csv_row() for r in _reference_rows(cfg.sites))
    _write_output(cfg.out / f"scaling_{cfg.target}.csv", cfg.header(), rows)

    by_quantity: dict[str, list[ensembles.MCEstimate]] = {}
    for e in estimates:
        by_quantity.setdefault(e.quantity, []).append(e)
    fits = {
        ensembles.MEAN_CONCURRENCE: _fit_block(fitting.POWER_LAW, by_quantity[ensembles.MEAN_CONCURRENCE]),
        ensembles.PROB_POSITIVE: _fit_block(prob_family, by_quantity[ensembles.PROB_POSITIVE]),
    }
    payload = {"header": cfg.header(), "fits": fits}
    path = cfg.out / f"scaling_{cfg.target}_fits.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return 0


def cmd_verify(cfg: ExperimentConfig) -> int:
    results = verify.run_checks()
    print(verify.report(results))
    return 0 if all(ok for _, ok, _ in results) else 1


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from err


def _parse_sigma(text: str) -> float:
    if text.strip().lower() == "inf":
        return math.inf
    try:
        value = float(text)
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected a float or 'inf', got {text!r}") from err
    return value


def _parse_sigma_list(text: str) -> tuple[float, ...]:
    return tuple(_parse_sigma(part) for part in text.split(","))


def _add_common(sp: argparse.ArgumentParser, samples: int) -> None:
    sp.add_argument("--model", choices=("ir", "nn", "pl"), default="ir", help="coupling model family")
    sp.add_argument("--sigma", type=_parse_sigma, default=None, metavar="FLOAT|inf",
                    help="power-law decay exponent (inf selects nearest-neighbour)")
    sp.add_argument("-L", "--sites", type=_parse_int_list, default=(25,), metavar="INT[,INT...]",
                    help="system size(s)")
    sp.add_argument("-m", "--magnons", type=int, default=2, help="up-spin sector")
    sp.add_argument("--samples", type=int, default=samples, help="disorder or Monte Carlo samples")
    sp.add_argument("--seed", type=int, default=0, help="master seed (u64)")
    sp.add_argument("--pairs", choices=("all", "single"), default="all",
                    help="concurrence pair policy for random ensembles")
    sp.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    sp.add_argument("--workers", type=int, default=None,
                    help=f"worker processes (default ${WORKERS_ENV} or 1)")
    sp.add_argument("--degtol", type=float, default=None, help="degeneracy tolerance override")
    sp.add_argument("--ladder-tol", type=float, default=ladder.LADDER_TOL,
                    help="promoted/new classification threshold")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heisenglass", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum-report", help="per-eigenstate CSV for one system")
    _add_common(sp, samples=1)

    sp = sub.add_parser("phase-diagram", help="eigenstate scatter data per decay exponent")
    _add_common(sp, samples=50)
    sp.add_argument("--sigmas", type=_parse_sigma_list, required=True, metavar="S[,S...]",
                    help="decay exponents; 'inf' selects nearest-neighbour")

    sp = sub.add_parser("scaling", help="mean concurrence and P(C>0) versus L, with fits")
    _add_common(sp, samples=1000)
    sp.add_argument("--target", choices=SCALING_TARGETS, required=True)
    sp.add_argument("--zero-sum", action="store_true",
                    help="constrain one-magnon seed coefficients to sum to zero")

    sub.add_parser("verify", help="run the invariant and oracle checks")
    return parser


def _resolve_workers(flag_value: int | None) -> int:
    if flag_value is None:
        raw = os.environ.get(WORKERS_ENV, "1")
        try:
            flag_value = int(raw)
        except ValueError as err:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from err
    if flag_value < 1:
        raise ConfigError("worker count must be at least 1")
    return flag_value


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    if ns.command == "verify":
        return ExperimentConfig(command="verify")
    cfg = ExperimentConfig(
        command=ns.command,
        model=ns.model,
        sigma=ns.sigma,
        sites=ns.sites,
        magnons=ns.magnons,
        samples=ns.samples,
        seed=ns.seed,
        pairs=ns.pairs,
        out=ns.out,
        target=getattr(ns, "target", None),
        sigmas=getattr(ns, "sigmas", None),
        zero_sum=getattr(ns, "zero_sum", False),
        degtol=ns.degtol,
        ladder_tol=ns.ladder_tol,
        workers=_resolve_workers(ns.workers),
    )
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig) -> None:
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("--seed must fit in an unsigned 64-bit integer")
    if cfg.samples < 1:
        raise ConfigError("--samples must be positive")
    if not cfg.sites:
        raise ConfigError("-L needs at least one system size")
    if cfg.sigma is not None and cfg.sigma < 0:
        raise ConfigError("--sigma must be non-negative")
    needs_model = cfg.command == "spectrum-report" or (
        cfg.command == "scaling" and cfg.target == "eigenstates"
    )
    if needs_model and cfg.model == "pl" and cfg.sigma is None:
        raise ConfigError("--model pl requires --sigma")

    if cfg.command in ("spectrum-report", "phase-diagram"):
        if len(cfg.sites) != 1:
            raise ConfigError(f"{cfg.command} takes exactly one -L value")
        _check_sector(cfg.sites[0], cfg.magnons)
    if cfg.command == "phase-diagram":
        assert cfg.sigmas is not None  # argparse enforces --sigmas
        if any(s < 0 for s in cfg.sigmas):
            raise ConfigError("--sigmas entries must be non-negative")
        labels = [format_sigma(s) for s in cfg.sigmas]
        if len(set(labels)) != len(labels):
            raise ConfigError("--sigmas entries must be distinct")
    if cfg.command == "scaling":
        if cfg.target == "eigenstates":
            for sites in cfg.sites:
                _check_sector(sites, cfg.magnons)
        else:
            if cfg.samples < 100:
                raise ConfigError("random-ensemble scaling needs --samples >= 100")
            if cfg.zero_sum and cfg.target == "random":
                raise ConfigError("--zero-sum applies to one-magnon seeds, not the random target")
            if any(sites < 3 for sites in cfg.sites):
                raise ConfigError("random ensembles need L >= 3")
        if len(set(cfg.sites)) != len(cfg.sites):
            raise ConfigError("-L values must be distinct")
        if sum(1 for s in cfg.sites if s >= fitting.DEFAULT_MIN_SITES) < 4:
            raise ConfigError("scaling fits need at least four L values >= 8")


def _check_sector(sites: int, magnons: int) -> None:
    if not 1 <= magnons < sites:
        raise ConfigError(f"need 1 <= m < L, got m={magnons} L={sites}")
    dim = math.comb(sites, magnons)
    if dim > basis.DEFAULT_MAX_DIM:
        raise ConfigError(f"sector dimension C({sites},{magnons}) = {dim} exceeds the dense budget")


_COMMANDS = {
    "spectrum-report": cmd_spectrum_report,
    "phase-diagram": cmd_phase_diagram,
    "scaling": cmd_scaling,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[cfg.command](cfg)
    except (spectrum.SpectrumError, ladder.ZeroPromotionError, fitting.FitError) as err:
        print(f"failure: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
