"""Command line interface: ``tadicnp <command> --config instance.json``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .catalog import catalog_configs
from .config import ConfigError, InstanceConfig, load_config
from .dwork import TruncationError, stabilize_truncation, verify_entry_bounds
from .ledger import BudgetError
from .polygons import fraction_str
from .sums import all_sums, c_function, newton_points, s_sum
from .tseries import PrecisionError
from .verify import EXIT_OK, EXIT_VIOLATION, assess, compute, exit_code, polygon_comparison_verdict

EXIT_ERROR = 1


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _series_dict(s) -> dict:
    return {"p": s.p, "M": s.M, "N": s.N, "residues": [str(c) for c in s.coeffs]}


def _spoly_list(sp) -> list[dict]:
    return [_series_dict(c) for c in sp.coeffs]


class Output:
    """Writes named artifacts to ``--out`` or, without it, prints the main one."""

    def __init__(self, out: str | None):
        self.dir = Path(out) if out else None
        if self.dir:
            self.dir.mkdir(parents=True, exist_ok=True)
        self.written: list[str] = []

    def write(self, name: str, text: str, main: bool = False) -> None:
        if self.dir is None:
            if main:
                sys.stdout.write(text)
            return
        (self.dir / name).write_text(text)
        self.written.append(name)


def _polygon_payload(data) -> dict:
    p, b = data.cfg.p, data.cfg.b
    return {
        "m_max": data.m_max,
        "hodge_slopes": [fraction_str(s) for s in data.hodge.slopes],
        "hodge_values": [fraction_str(v) for v in data.hodge.values()],
        "hodge_scaled_values": [fraction_str(b * (p - 1) * v) for v in data.hodge.values()],
        "arithmetic_slopes": [fraction_str(s) for s in data.arithmetic.slopes],
        "arithmetic_values": [fraction_str(v) for v in data.arithmetic.values()],
    }


def _write_polygons(out: Output, data, emit: str, main: bool) -> None:
    p, b = data.cfg.p, data.cfg.b
    if emit == "json":
        out.write("polygons.json", _dump(_polygon_payload(data)), main)
        return
    out.write("polygon_hodge.csv", data.hodge.to_csv(), main)
    out.write("polygon_hodge_scaled.csv", data.hodge.scaled(b * (p - 1)).to_csv())
    out.write("polygon_arithmetic.csv", data.arithmetic.to_csv())


def cmd_polygons(args, cfg: InstanceConfig) -> int:
    cfg = _polygon_only(cfg)
    data = compute(cfg)
    out = Output(args.out)
    _write_polygons(out, data, args.emit, main=True)
    if out.dir is not None:
        verdict = polygon_comparison_verdict(data)
        print(f"{cfg.name}: n!Vol = {data.cone.normalized_volume}, D = {data.cone.D}, polygon comparison {verdict['status']}")
    return EXIT_OK


def _polygon_only(cfg: InstanceConfig) -> InstanceConfig:
    return replace(cfg, flags=replace(cfg.flags, polygon_only=True))


def cmd_sum(args, cfg: InstanceConfig) -> int:
    cone = cfg.cone()
    ledger = cfg.ledger(cone.D)
    f = cfg.laurent()
    ks = [args.k] if args.k else range(1, cfg.K + 1)
    payload = {"instance": cfg.to_dict(), "ledger": ledger.as_dict(), "sums": {}}
    for k in ks:
        payload["sums"][str(k)] = _series_dict(s_sum(f, k, ledger))
    Output(args.out).write("sums.json", _dump(payload), main=True)
    return EXIT_OK


def cmd_cfunction(args, cfg: InstanceConfig) -> int:
    cone = cfg.cone()
    ledger = cfg.ledger(cone.D)
    f = cfg.laurent()
    cfa = c_function(f, ledger, all_sums(f, ledger))
    pts = newton_points(cfa.C)
    payload = {
        "instance": cfg.to_dict(),
        "parameters": {"p": cfg.p, "b": cfg.b, "q": cfg.q, "n": cfg.n},
        "ledger": ledger.as_dict(),
        "C": _spoly_list(cfa.C),
        "L": _spoly_list(cfa.L),
        "newton_points": pts.rows(),
    }
    out = Output(args.out)
    out.write("cfunction.json", _dump(payload), main=True)
    out.write("np.csv", pts.to_csv())
    return EXIT_OK


def cmd_dwork(args, cfg: InstanceConfig) -> int:
    cone = cfg.cone()
    f = cfg.laurent()
    st = stabilize_truncation(f, cone, cfg.p, cfg.b, cfg.M_target, cfg.N, cfg.K)
    payload = {
        "instance": cfg.to_dict(),
        "truncation": st.as_dict(),
        "entry_bounds": verify_entry_bounds(st.matrix, cone, f).as_dict(),
        "char_series": _spoly_list(st.series),
        "newton_points": newton_points(st.series).rows(),
    }
    if cfg.flags.direct:
        ledger = cfg.ledger(cone.D)
        direct = c_function(f, ledger, all_sums(f, ledger), with_L=False)
        payload["comparison_vs_direct"] = "agree" if direct.C == st.series else "DISAGREE"
    Output(args.out).write("dwork_report.json", _dump(payload), main=True)
    return EXIT_OK


def cmd_verify(args, cfg: InstanceConfig) -> int:
    data = compute(cfg)
    report = assess(data)
    out = Output(args.out)
    if out.dir is not None:
        _write_polygons(out, data, args.emit, main=False)
        if data.direct is not None or data.dwork is not None:
            series = data.direct.C if data.direct is not None else data.dwork.series
            out.write("np.csv", newton_points(series).to_csv())
        report["data_files"] = sorted(out.written + ["verify_report.json"])
    out.write("verify_report.json", _dump(report), main=True)
    code = exit_code(report)
    if out.dir is not None:
        print(f"{cfg.name}: {report['status']} (exit {code})")
        for name, v in report["verdicts"].items():
            print(f"  {name}: {v['status']}")
    return code


def cmd_catalog(args) -> int:
    configs = catalog_configs()
    rows = []
    worst = EXIT_OK
    for cfg in configs:
        row = {"name": cfg.name, "vertices": [list(v) for v in cfg.vertices], "p": cfg.p}
        if args.check:
            data = compute(cfg)
            verdict = polygon_comparison_verdict(data)
            row["polygon_comparison"] = verdict["status"]
            row["equality_at_volume"] = verdict["equality_at_volume"]
            if verdict["status"] == "violation":
                worst = EXIT_VIOLATION
        rows.append(row)
    out = Output(args.out)
    if out.dir is not None:
        for cfg in configs:
            out.write(f"{cfg.name}.json", _dump(cfg.to_dict()))
    out.write("catalog.json", _dump(rows), main=True)
    if out.dir is not None:
        print(f"wrote {len(configs)} instance configs to {out.dir}")
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tadicnp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="instance JSON file")
        p.add_argument("--out", help="output directory (default: print the main artifact)")
        p.add_argument("--emit", choices=["csv", "json"], default="csv", help="polygon output format")
        return p

    common(sub.add_parser("polygons", help="Hodge and arithmetic polygons"))
    s = common(sub.add_parser("sum", help="direct T-adic exponential sums S_f(k,T)"))
    s.add_argument("--k", type=int, help="a single k (default: 1..K)")
    common(sub.add_parser("cfunction", help="C- and L-function by the direct engine"))
    common(sub.add_parser("dwork", help="characteristic series of the truncated Dwork operator"))
    common(sub.add_parser("verify", help="run every check and write verify_report.json"))
    c = common(sub.add_parser("catalog", help="built-in polytopes and primes"), config=False)
    c.add_argument("--check", action="store_true", help="run the polygon checks on every entry")
    return parser


COMMANDS = {
    "polygons": cmd_polygons,
    "sum": cmd_sum,
    "cfunction": cmd_cfunction,
    "dwork": cmd_dwork,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "catalog":
            return cmd_catalog(args)
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, BudgetError, PrecisionError, TruncationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
