"""Command-line entry point: ``secureid {capacity,fig8,simulate,quantize}``.

Exit codes: 0 success, 1 usage error, 2 domain or invariant violation,
3 resource refusal, 4 an acceptance threshold was violated.
"""
from __future__ import annotations

import argparse
import configparser
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import capacity as cap
from .capacity import GaussianChannelParams, WiretapParams
from .errors import ConfigFileError, ResourceError, SecureIdError
from .infotheory import LogBase, doubly_symmetric_binary_source

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_RESOURCE, EXIT_THRESHOLD = 0, 1, 2, 3, 4
SEED_ENV = "SECUREID_SEED"

CAPACITY_CSV_HEADER = "quantity,value,base"
FIG8_CSV_HEADER = "P,lower_bound,capacity"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


# --- experiment config -------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Flat ``key = value`` experiment description.

    Quantities with physical units carry the unit in the key name.
    """

    main_noise_watts: float = 1.0
    eve_noise_watts: float = 4.0
    power_watts: float = 1.0
    blocklength: int = 200
    rate_fraction: float = 0.5
    colors: int = 64
    bins: int = 64
    identities: int = 64
    variant: str = "pseudorandom"
    require_secrecy: bool = True
    max_codewords: int = 1 << 16
    trials: int = 1000
    seed: int | None = None
    workers: int = 1
    pairs: str = ""
    eve_pairs: str = ""
    random_pairs: int = 0
    base: str = "bits"
    csv_path: str = ""
    summary_path: str = ""
    code_path: str = ""
    max_type1: float | None = None
    max_type2: float | None = None
    max_eve_advantage: float | None = None
    min_eve_advantage: float | None = None

    @classmethod
    def from_text(cls, text: str, source: str = "<config>") -> "ExperimentConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
        parser.optionxform = str
        try:
            parser.read_string("[experiment]\n" + text, source=source)
        except configparser.Error as exc:
            raise ConfigFileError(f"{source}: {exc}") from None
        known = {f.name: f for f in fields(cls)}
        values = {}
        for key, raw in parser["experiment"].items():
            if key not in known:
                raise ConfigFileError(f"{source}: unknown key {key!r}")
            values[key] = _convert(known[key].type, raw, key, source)
        return cls(**values)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigFileError(f"cannot read {path}: {exc.strerror}") from None
        return cls.from_text(text, str(path))

    def channel(self) -> WiretapParams:
        return WiretapParams(self.main_noise_watts, self.eve_noise_watts, self.power_watts)


def _convert(type_name: str, raw: str, key: str, source: str):
    raw = raw.strip()
    try:
        if "bool" in type_name:
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError
        if "None" in type_name and raw.lower() in ("", "none"):
            return None
        if type_name.startswith("int"):
            return int(raw)
        if type_name.startswith("float"):
            return float(raw)
        return raw
    except ValueError:
        raise ConfigFileError(f"{source}: bad value {raw!r} for {key}") from None


def parse_pairs(text: str) -> list[tuple[int, int]]:
    """``"0-1, 2-5"`` -> [(0, 1), (2, 5)]."""
    out = []
    for item in text.replace(";", ",").split(","):
        item = item.strip()
        if not item:
            continue
        try:
            a, b = item.split("-")
            out.append((int(a), int(b)))
        except ValueError:
            raise ConfigFileError(f"bad identity pair {item!r}; expected 'i-j'") from None
    return out


def resolve_seed(flag: int | None, config_seed: int | None = None) -> int:
    """Seed precedence: command-line flag, then config file, then $SECUREID_SEED, then 0."""
    if flag is not None:
        return flag
    if config_seed is not None:
        return config_seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0


# --- subcommands -------------------------------------------------------------

def cmd_capacity(args, out) -> int:
    base = LogBase.BITS if args.bits else LogBase.NATS if args.nats else LogBase.parse(args.base)
    wanted = [k for k in ("awgn", "id", "secrecy", "dichotomy", "mimo", "cr") if getattr(args, k)]
    if not wanted:
        raise UsageError("capacity: choose at least one of --awgn --id --secrecy --dichotomy --mimo --cr")
    rows = []
    if "awgn" in wanted:
        rows.append(("awgn_capacity", cap.awgn_capacity(GaussianChannelParams(args.sigma2, args.power), base)))
    if "id" in wanted:
        rows.append(("id_capacity", cap.id_capacity_awgn(GaussianChannelParams(args.sigma2, args.power), base)))
    if "secrecy" in wanted or "dichotomy" in wanted:
        if args.sigma2_eve is None:
            raise UsageError("capacity: --secrecy/--dichotomy need --sigma2-eve")
        wt = WiretapParams(args.sigma2, args.sigma2_eve, args.power)
        if "secrecy" in wanted:
            rows.append(("secrecy_capacity", cap.gwc_secrecy_capacity(wt, base)))
        if "dichotomy" in wanted:
            rows.append(("secure_id_capacity", cap.secure_id_capacity(wt, base)))
    if "mimo" in wanted:
        if not args.singular:
            raise UsageError("capacity: --mimo needs --singular")
        alloc = cap.waterfill(args.singular, args.sigma2, args.power)
        rows.append(("mimo_capacity", cap.mimo_capacity(args.singular, args.sigma2, args.power, base)))
        rows.append(("water_level", alloc.water_level))
        rows.extend((f"power_{k}", float(p)) for k, p in enumerate(alloc.powers))
    if "cr" in wanted:
        src = doubly_symmetric_binary_source(args.mu)
        res = cap.cr_capacity(src, GaussianChannelParams(args.sigma2, args.power), base)
        rows.append(("cr_capacity", float("nan") if res.value is None else res.value))
        rows.append(("correlation_assisted_lower_bound", cap.correlation_assisted_id_lower_bound(
            src, GaussianChannelParams(args.sigma2, args.power), base, base)))
        if not res.in_regime:
            print(f"note: {res.note}", file=sys.stderr)
    if args.csv:
        print(CAPACITY_CSV_HEADER, file=out)
        for name, v in rows:
            unit = "" if name == "water_level" or name.startswith("power_") else base.name.lower()
            print(f"{name},{_fmt(v)},{unit}", file=out)
    else:
        for name, v in rows:
            print(f"{name} {v:.6f}", file=out)
    return EXIT_OK


def cmd_fig8(args, out) -> int:
    print(FIG8_CSV_HEADER, file=out)
    for p, lb, c in cap.fig8_rows(args.mu, args.sigma2, args.consistent_bits):
        print(f"{p:.1f},{_fmt(lb)},{_fmt(c)}", file=out)
    return EXIT_OK


def _thresholds(cfg: ExperimentConfig, report) -> list[str]:
    failures = []
    checks = (
        ("type1", cfg.max_type1, "max_type1", lambda e, t: e.ci_hi <= t),
        ("type2", cfg.max_type2, "max_type2", lambda e, t: e.ci_hi <= t),
        ("eve", cfg.max_eve_advantage, "max_eve_advantage", lambda e, t: e.ci_hi <= t),
        ("eve", cfg.min_eve_advantage, "min_eve_advantage", lambda e, t: e.ci_lo >= t),
    )
    for kind, limit, key, ok in checks:
        if limit is None:
            continue
        for e in report.select(kind):
            if not ok(e, limit):
                failures.append(f"{key}={limit} violated by {kind} ({e.i}, {e.j}): "
                                f"{e.estimate:.4f} [{e.ci_lo:.4f}, {e.ci_hi:.4f}]")
    return failures


def cmd_simulate(args, out) -> int:
    from .idcode import build_identification_code
    from .simulator import SimConfig, run_experiment

    cfg = ExperimentConfig.from_file(args.config)
    seed = resolve_seed(args.seed, cfg.seed)
    workers = args.workers if args.workers is not None else cfg.workers
    channel = cfg.channel()
    code = build_identification_code(
        cfg.blocklength, cfg.rate_fraction, cfg.colors, cfg.identities, cfg.bins, channel,
        seed=seed, variant=cfg.variant, require_secrecy=cfg.require_secrecy, max_codewords=cfg.max_codewords,
    )
    code_path = args.save_code or cfg.code_path
    if code_path:
        code.save(code_path)
    sim = SimConfig(
        code, channel, trials=cfg.trials, seed=seed, pairs=parse_pairs(cfg.pairs),
        eve_pairs=parse_pairs(cfg.eve_pairs), random_pairs=cfg.random_pairs, workers=workers,
    )
    report = run_experiment(sim)
    base = LogBase.parse(cfg.base)
    head = (
        f"code: n={code.n} q={code.q} M'={code.inner.size} M''={code.outer.n_colors} "
        f"B={code.outer.bin_size} N={code.n_identities} rate={code.rate:.4f}\n"
        f"secrecy capacity {cap.gwc_secrecy_capacity(channel, base):.6f} {base.name.lower()}/use "
        if channel.main_variance > 0 and channel.eve_variance > 0 else ""
    )
    summary = head + "\n" + report.summary()
    csv_text = report.to_csv()
    csv_path = args.csv_path or cfg.csv_path
    summary_path = args.summary or cfg.summary_path
    if csv_path:
        Path(csv_path).write_text(csv_text)
    else:
        out.write(csv_text)
    if summary_path:
        Path(summary_path).write_text(summary)
    elif csv_path:
        out.write(summary)
    else:
        sys.stderr.write(summary)
    failures = _thresholds(cfg, report)
    for f in failures:
        print(f"threshold: {f}", file=sys.stderr)
    return EXIT_THRESHOLD if failures else EXIT_OK


def cmd_quantize(args, out) -> int:
    from .quantizer import (
        InputDistribution,
        build_discrete_channel,
        compute_spans,
        lattices_csv,
        save_channels,
        tv_gap_estimate,
    )

    spec = compute_spans(args.sigma2, args.sigma2_eve, args.n, args.delta, args.a)
    print(
        f"# delta_x={_fmt(spec.delta_x)} z0={_fmt(spec.z0)} eps={_fmt(spec.eps)} "
        f"L_x={spec.input_lattice.size} (bound {_fmt(spec.input_bound)}) "
        f"L_y={spec.output_lattice.size} (bound {_fmt(spec.output_bound)})",
        file=out,
    )
    channels = [
        build_discrete_channel(spec, w, args.include_density_term, args.max_entries) for w in ("main", "eve")
    ]
    if args.out:
        save_channels(args.out, spec, channels)
    if args.lattice_csv:
        Path(args.lattice_csv).write_text(lattices_csv(channels[0]))
    if args.skip_tv:
        return EXIT_OK
    g = np.random.default_rng(resolve_seed(args.seed))
    dist = InputDistribution.uniform(g.uniform(-args.a, args.a, size=(args.input_points, args.n)))
    failed = False
    for which in ("main", "eve"):
        rep = tv_gap_estimate(dist, spec, which, args.tv_mode, args.trials, resolve_seed(args.seed),
                              include_density_term=args.include_density_term)
        print(f"# channel={which}", file=out)
        out.write(rep.to_csv())
        failed |= not all(gv.passed for _, gv in rep.rows())
    return EXIT_THRESHOLD if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="secureid", description="Secure identification over Gaussian wiretap channels.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    c = sub.add_parser(
        "capacity",
        help="closed-form capacities",
        description=f"Print capacities. With --csv the columns are: {CAPACITY_CSV_HEADER}.",
    )
    for flag, text in (
        ("--awgn", "AWGN channel capacity"),
        ("--id", "identification capacity of the AWGN channel"),
        ("--secrecy", "Gaussian wiretap secrecy capacity"),
        ("--dichotomy", "secure identification capacity"),
        ("--mimo", "waterfilled MIMO capacity from --singular"),
        ("--cr", "common-randomness capacity with a binary source of crossover --mu"),
    ):
        c.add_argument(flag, action="store_true", help=text)
    c.add_argument("--sigma2", type=float, default=1.0, help="main-channel noise variance")
    c.add_argument("--sigma2-eve", type=float, help="eavesdropper noise variance")
    c.add_argument("--power", type=float, default=1.0, help="power constraint P")
    c.add_argument("--singular", type=_float_list, help="comma-separated singular values, descending")
    c.add_argument("--mu", type=float, default=0.1, help="crossover probability of the correlated source")
    c.add_argument("--base", default="bits", help="bits or nats (default bits)")
    c.add_argument("--bits", action="store_true", help="shorthand for --base bits")
    c.add_argument("--nats", action="store_true", help="shorthand for --base nats")
    c.add_argument("--csv", action="store_true", help="machine-readable output")
    c.set_defaults(func=cmd_capacity)

    f = sub.add_parser(
        "fig8",
        help="correlation-assisted identification bound versus capacity",
        description=f"CSV over P = 0, 0.1, ..., 3 with columns {FIG8_CSV_HEADER}. By default the capacity "
        "is in nats and the source term in bits, as originally plotted.",
    )
    f.add_argument("--mu", type=float, default=0.1)
    f.add_argument("--sigma2", type=float, default=1.0)
    f.add_argument("--consistent-bits", action="store_true", help="express both terms in bits")
    f.set_defaults(func=cmd_fig8)

    s = sub.add_parser(
        "simulate",
        help="build a code and run the Monte Carlo estimators",
        description="CSV columns: kind,i,j,estimate,ci_lo,ci_hi,trials,seed. "
        f"Seed precedence: --seed, config 'seed', ${SEED_ENV}, 0.",
    )
    s.add_argument("config", help="flat key = value experiment file")
    s.add_argument("--seed", type=int)
    s.add_argument("--workers", type=int, help="worker threads (results do not depend on it)")
    s.add_argument("--csv", dest="csv_path", help="CSV output path (default: config csv_path, else stdout)")
    s.add_argument("--summary", help="summary output path")
    s.add_argument("--save-code", help="write the constructed code container here")
    s.set_defaults(func=cmd_simulate)

    q = sub.add_parser(
        "quantize",
        help="discretize the wiretap channel and check total-variation gaps",
        description="Prints the spans, then one CSV per channel with columns "
        "stage,mode,tv,bound,ci_lo,ci_hi,pass.",
    )
    q.add_argument("--sigma2", type=float, required=True)
    q.add_argument("--sigma2-eve", type=float, required=True)
    q.add_argument("--n", type=int, required=True, help="blocklength")
    q.add_argument("--delta", type=float, required=True, help="target total-variation gap per stage / 2")
    q.add_argument("-a", "--a", type=float, required=True, help="input amplitude bound")
    q.add_argument("--out", help="quantized-channel container path")
    q.add_argument("--lattice-csv", help="CSV export of the lattices")
    q.add_argument("--tv-mode", choices=("auto", "dense", "mc"), default="auto")
    q.add_argument("--trials", type=int, default=20000, help="Monte Carlo samples per law")
    q.add_argument("--input-points", type=int, default=4, help="support size of the random input law")
    q.add_argument("--seed", type=int)
    q.add_argument("--max-entries", type=int, default=1 << 24, help="transition-matrix size ceiling")
    q.add_argument("--include-density-term", action="store_true",
                   help="add the density value at z0 to the atom mass and renormalize")
    q.add_argument("--skip-tv", action="store_true", help="only build and write the channels")
    q.set_defaults(func=cmd_quantize)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("secureid: choose a subcommand (capacity, fig8, simulate, quantize)")
        return args.func(args, out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ConfigFileError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except SecureIdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
