"""Command-line front end: flat key=value configs in, CSV tables and SVG
charts out.

Subcommands: ``run`` (one policy), ``compare`` (several policies over one
shared channel trace, plus a summary table), ``figures`` (compare plus the
four charts).  All outputs are byte-deterministic for a given config.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .channel import ENV_CLASSES, PLACEMENT_MODES
from .engine import (
    ComparisonResult,
    SimConfig,
    SimResult,
    comparison_configs,
    run,
    run_comparison,
)
from .errors import ConfigError
from .sched import POLICIES, VARIANCE_MODES
from .svgplot import grouped_bar_chart, line_chart

OUT_DIR_ENV_VAR = "SCHEDSIM_OUT"
DEFAULT_OUT_DIR = "out"
DEFAULT_COMPARE_POLICIES = "pfa,dpfa,vpfa"


# ---------------------------------------------------------------------------
# Config file format
# ---------------------------------------------------------------------------

def _parse_bool(s: str) -> bool:
    if s == "true":
        return True
    if s == "false":
        return False
    raise ValueError("expected 'true' or 'false', got %r" % s)


def _parse_enum(options):
    def parse(s: str):
        if s not in options:
            raise ValueError("expected one of %s, got %r" % (", ".join(options), s))
        return s

    return parse


def _parse_optional_float(sentinel):
    def parse(s: str):
        if s == sentinel:
            return None
        return float(s)

    return parse


# key -> (section, attribute, parser)
CONFIG_KEYS = {
    "tx_power_dbm": ("channel", "tx_power_dbm", float),
    "carrier_freq_mhz": ("channel", "carrier_freq_mhz", float),
    "bandwidth_hz": ("channel", "bandwidth_hz", float),
    "cell_radius_m": ("channel", "cell_radius_m", float),
    "shadowing_sigma_db": ("channel", "shadowing_sigma_db", float),
    "bs_height_m": ("channel", "bs_height_m", float),
    "ue_height_m": ("channel", "ue_height_m", float),
    "env_class": ("channel", "env_class", _parse_enum(ENV_CLASSES)),
    "noise_figure_db": ("channel", "noise_figure_db", float),
    "slot_duration_s": ("channel", "slot_duration_s", float),
    "fast_fading": ("channel", "fast_fading_enabled", _parse_bool),
    "n_users": ("sim", "n_users", int),
    "placement": ("sim", "placement", _parse_enum(PLACEMENT_MODES)),
    "policy": ("sim", "policy", _parse_enum(POLICIES)),
    "total_slots": ("sim", "total_slots", int),
    "seed": ("sim", "seed", int),
    "tc_mode": ("sim", "tc_mode", _parse_enum(("fixed", "growing"))),
    "tc_slots": ("sim", "tc_slots", float),
    "dpfa_alpha": ("dpfa", "alpha", float),
    "dpfa_delta": ("dpfa", "delta", _parse_optional_float("auto")),
    "dpfa_theta": ("dpfa", "theta", int),
    "dpfa_b": ("dpfa", "b", float),
    "dpfa_beta_override": ("dpfa", "beta_override", _parse_optional_float("none")),
    "dpfa_literal_timers": ("dpfa", "literal_timers", _parse_bool),
    "vpfa_s_fi": ("vpfa", "s_fi", int),
    "vpfa_l_sc": ("vpfa", "l_sc", int),
    "vpfa_variance_mode": ("vpfa", "variance_mode", _parse_enum(VARIANCE_MODES)),
    "vpfa_window": ("vpfa", "window", int),
    "vpfa_signed_stability": ("vpfa", "signed_stability", _parse_bool),
}


def _parse_items(text: str, where: str):
    """Yield (key, parsed_value) from flat key = value lines; '#' comments."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("%s line %d: expected 'key = value'" % (where, lineno))
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError("%s line %d: unknown key '%s'" % (where, lineno, key))
        section, attr, parse = CONFIG_KEYS[key]
        try:
            parsed = parse(value)
        except ValueError as exc:
            raise ConfigError("%s line %d: key '%s': %s" % (where, lineno, key, exc)) from None
        yield key, (section, attr, parsed)


def parse_config(text: str, where: str = "config", overrides: list[str] | None = None) -> SimConfig:
    """Build a SimConfig from flat key = value text; unset keys keep defaults.

    ``overrides`` are extra "key=value" strings applied after the file.
    """
    config = SimConfig()
    sections = {"channel": config.channel, "sim": config, "dpfa": config.dpfa, "vpfa": config.vpfa}
    for _, (section, attr, value) in _parse_items(text, where):
        setattr(sections[section], attr, value)
    for i, item in enumerate(overrides or (), start=1):
        for _, (section, attr, value) in _parse_items(item, "--set #%d" % i):
            setattr(sections[section], attr, value)
    config.validate()
    return config


def _format_value(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_config(config: SimConfig) -> str:
    """Serialize a config so that parse_config(render_config(c)) == c."""
    sections = {"channel": config.channel, "sim": config, "dpfa": config.dpfa, "vpfa": config.vpfa}
    lines = []
    for key, (section, attr, _) in CONFIG_KEYS.items():
        value = getattr(sections[section], attr)
        if key == "dpfa_beta_override" and value is None:
            lines.append("%s = none" % key)
        else:
            lines.append("%s = %s" % (key, _format_value(value)))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# CSV and figure emission
# ---------------------------------------------------------------------------

def _num(v) -> str:
    return "%.6g" % v


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError("cannot write %s: %s" % (path, exc)) from None


def _result_csvs(result: SimResult, out_dir: Path) -> list[Path]:
    rows = ["user_id,distance_m,schedule_count,cumulative_bits"]
    for uid, dist, count, bits, _ in result.per_user_rows():
        rows.append("%d,%s,%d,%s" % (uid, _num(dist), count, _num(bits)))
    fi_rows = ["slot,fi"] + ["%d,%s" % (slot, _num(fi)) for slot, fi in result.fi_series]
    sys_rows = ["slot,cumulative_bits"] + [
        "%d,%s" % (slot, _num(bits)) for slot, bits in result.system_series
    ]
    files = {
        "per_user.csv": "\n".join(rows) + "\n",
        "fi_series.csv": "\n".join(fi_rows) + "\n",
        "system.csv": "\n".join(sys_rows) + "\n",
        "config.txt": render_config(result.config),
    }
    written = []
    for name, text in files.items():
        path = out_dir / name
        _write(path, text)
        written.append(path)
    return written


def emit_csv(result_or_comparison, out_dir) -> list[Path]:
    """Write the CSV set for a single run, or per-policy sets plus summary.csv."""
    out = Path(out_dir)
    if isinstance(result_or_comparison, SimResult):
        return _result_csvs(result_or_comparison, out)
    comp: ComparisonResult = result_or_comparison
    written = []
    for policy, result in comp.results.items():
        written += _result_csvs(result, out / policy)
    rows = ["policy,fi,system_bits,drop_pct_vs_reference"]
    for row in comp.summary:
        rows.append(
            "%s,%s,%s,%s"
            % (row.policy, _num(row.fi), _num(row.system_bits), _num(row.drop_pct_vs_reference))
        )
    path = out / "summary.csv"
    _write(path, "\n".join(rows) + "\n")
    written.append(path)
    return written


def emit_figures(comp: ComparisonResult, out_dir) -> list[Path]:
    """Four SVG charts: per-user schedule counts and throughput (grouped
    bars), system throughput and fairness index over time (lines)."""
    if len(comp.results) < 2:
        raise ConfigError("figures need a comparison over at least 2 policies")
    out = Path(out_dir)
    any_result = next(iter(comp.results.values()))
    users = [str(link.user_id) for link in any_result.links]

    counts = {p: [int(c) for c in r.metrics.schedule_counts] for p, r in comp.results.items()}
    bits = {p: [float(b) for b in r.metrics.per_user_bits] for p, r in comp.results.items()}
    system = {p: [(float(s), float(b)) for s, b in r.system_series] for p, r in comp.results.items()}
    fi = {p: [(float(s), float(v)) for s, v in r.fi_series] for p, r in comp.results.items()}

    charts = {
        "schedule_counts.svg": grouped_bar_chart(
            "Times each user was scheduled", "user", "slots scheduled", users, counts
        ),
        "per_user_throughput.svg": grouped_bar_chart(
            "Cumulative bits per user", "user", "bits", users, bits
        ),
        "system_throughput.svg": line_chart(
            "System throughput over time", "slot", "cumulative bits", system
        ),
        "fi.svg": line_chart(
            "Fairness index over time", "slot", "fairness index", fi, y_range=(0.0, 1.0)
        ),
    }
    written = []
    for name, text in charts.items():
        path = out / name
        _write(path, text)
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _load_config(args) -> SimConfig:
    text = ""
    if args.config is not None:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError("cannot read config %s: %s" % (args.config, exc)) from None
    return parse_config(text, where=str(args.config or "defaults"), overrides=args.set)


def _comparison_from_args(args) -> ComparisonResult:
    base = _load_config(args)
    policies = [p.strip() for p in args.policies.split(",") if p.strip()]
    if not policies:
        raise ConfigError("--policies must name at least one policy")
    return run_comparison(comparison_configs(base, policies), reference=args.reference)


def _cmd_run(args) -> int:
    config = _load_config(args)
    result = run(config)
    files = emit_csv(result, args.out)
    print("policy %s: fi %s, system bits %s" % (config.policy, _num(result.metrics.jain()), _num(result.metrics.system_bits)))
    print("wrote %d files to %s" % (len(files), args.out))
    return 0


def _cmd_compare(args, figures: bool = False) -> int:
    comp = _comparison_from_args(args)
    files = emit_csv(comp, args.out)
    if figures:
        files += emit_figures(comp, args.out)
    for row in comp.summary:
        print(
            "policy %s: fi %s, system bits %s, drop vs %s %s%%"
            % (row.policy, _num(row.fi), _num(row.system_bits), comp.reference, _num(row.drop_pct_vs_reference))
        )
    print("wrote %d files to %s" % (len(files), args.out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="schedsim",
        description="Deterministic single-cell downlink scheduler comparison simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    default_out = os.environ.get(OUT_DIR_ENV_VAR, DEFAULT_OUT_DIR)

    def common(p):
        p.add_argument("--config", help="flat key = value config file (defaults when omitted)")
        p.add_argument("--out", default=default_out, help="output directory (default: %(default)s)")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override one config key (repeatable)",
        )

    p_run = sub.add_parser("run", help="run a single policy and write its CSV tables")
    common(p_run)

    for name, help_text in (
        ("compare", "run several policies over one channel trace and summarize"),
        ("figures", "compare plus the four SVG charts"),
    ):
        p = sub.add_parser(name, help=help_text)
        common(p)
        p.add_argument(
            "--policies",
            default=DEFAULT_COMPARE_POLICIES,
            help="comma-separated policies (default: %(default)s)",
        )
        p.add_argument("--reference", default="pfa", help="reference policy for drop%% (default: %(default)s)")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "compare":
            return _cmd_compare(args)
        return _cmd_compare(args, figures=True)
    except (ConfigError, OSError, ValueError) as exc:
        print("schedsim: error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
