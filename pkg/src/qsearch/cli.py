"""Config-driven experiment runner.

Subcommands: build (emit circuit files + census), run (full experiment
report as JSON), plot (CSV + pgfplots fragment from a report), sweep
(noise grid).  Configuration comes from a JSON file via --config with
individual flag overrides; QSEARCH_OUT sets the default output directory.
Exit codes: 0 success, 1 validation error, 2 runtime error; errors print
as a single line prefixed "error:".
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, analysis, families, qasm, sim, synth
from .circuit import census, peephole_cancel
from .errors import ConfigError, QsearchError, ValidationError
from .families import FamilyRequest, Partition
from .synth import OracleSpec

SCHEMA_VERSION = 1


@dataclass
class ExperimentConfig:
    family: str = "grover"
    n: int = 3
    oracle_set: object = "all"  # "all" | "sample:k:seed" | list of masks
    oracle_style: str = "plain-mcz"
    uncompute: str = "partial"
    fused: bool = False
    iterations: int = 1
    partition: list[int] | None = None
    diffuser_size: int | None = None
    shots: int = 0  # 0 = exact-only report
    noise: dict = field(default_factory=lambda: {"p1": 0.0, "p2": 0.0, "p_meas": 0.0})
    seed: int = 0
    out: str | None = None

    def validate(self) -> None:
        if self.family not in families.FAMILIES:
            raise ConfigError(f"family: unknown family {self.family!r}")
        if not 1 <= self.n <= 16:
            raise ConfigError(f"n: width {self.n} outside 1..16")
        if self.oracle_style not in synth.ORACLE_STYLES:
            raise ConfigError(f"oracle_style: unknown style {self.oracle_style!r}")
        if self.uncompute not in families.UNCOMPUTE_MODES:
            raise ConfigError(f"uncompute: unknown mode {self.uncompute!r}")
        if self.partition is not None:
            if any(p < 1 for p in self.partition):
                raise ConfigError("partition: parts must be positive")
            if sum(self.partition) != self.n:
                raise ConfigError(
                    f"partition: parts {self.partition} do not sum to n={self.n}"
                )
        if self.shots < 0:
            raise ConfigError("shots: must be >= 0")
        if self.oracle_set == "all" and self.n > 6:
            raise ConfigError("oracle_set: 'all' only permitted for n <= 6")
        for k in self.noise:
            if k not in ("p1", "p2", "p_meas"):
                raise ConfigError(f"noise: unknown rate {k!r}")


def _derive_seed(seed: int, *key: int) -> int:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def resolve_masks(cfg: ExperimentConfig) -> list[str]:
    spec = cfg.oracle_set
    if isinstance(spec, list):
        for m in spec:
            if len(m) != cfg.n or any(ch not in "01" for ch in m):
                raise ConfigError(f"oracle_set: mask {m!r} is not an {cfg.n}-bit pattern")
        return list(spec)
    if spec == "all":
        return [format(v, f"0{cfg.n}b") for v in range(1 << cfg.n)]
    if isinstance(spec, str) and spec.startswith("sample:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError("oracle_set: sample spec must be sample:<k>:<seed>")
        k, sample_seed = int(parts[1]), int(parts[2])
        if not 1 <= k <= (1 << cfg.n):
            raise ConfigError(f"oracle_set: sample size {k} outside register")
        rng = np.random.default_rng(sample_seed)
        picks = rng.choice(1 << cfg.n, size=k, replace=False)
        return [format(int(v), f"0{cfg.n}b") for v in sorted(picks)]
    raise ConfigError(f"oracle_set: cannot interpret {spec!r}")


def build_request(cfg: ExperimentConfig, mask: str) -> FamilyRequest:
    return FamilyRequest(
        family=cfg.family,
        oracle=OracleSpec(cfg.n, mask, cfg.oracle_style),
        iterations=cfg.iterations,
        partition=Partition(tuple(cfg.partition)) if cfg.partition else None,
        diffuser_size=cfg.diffuser_size,
        uncompute=cfg.uncompute,
        fused=cfg.fused,
    )


def _lowered(circ):
    return peephole_cancel(synth.lower(circ))


def _census_dict(c) -> dict:
    return {
        "two_qubit_count": c.two_qubit_count,
        "one_qubit_count": c.one_qubit_count,
        "measure_count": c.measure_count,
        "by_kind": dict(sorted(c.by_kind.items())),
        "cx_count": c.by_kind.get("cx", 0),
        "cz_count": c.by_kind.get("cz", 0),
    }


def cmd_build(cfg: ExperimentConfig, outdir: Path) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    for mask in resolve_masks(cfg):
        circ = families.build(build_request(cfg, mask))
        path = outdir / f"circuit_{cfg.family}_{mask}.qasm"
        path.write_text(qasm.serialize(circ))
        low = _lowered(circ)
        cens = census(low)
        print(
            f"{path.name}: two_qubit_count={cens.two_qubit_count} "
            f"(cx={cens.by_kind.get('cx', 0)}, cz={cens.by_kind.get('cz', 0)}) "
            f"one_qubit={cens.one_qubit_count}"
        )
    return 0


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Build, simulate and analyze every oracle in the set."""
    cfg.validate()
    t0 = time.time()
    masks = resolve_masks(cfg)
    noise = sim.NoiseModel(**{k: float(v) for k, v in cfg.noise.items()})
    oracle_rows = []
    exact_runs: list[analysis.OracleRun] = []
    measured_runs: list[analysis.OracleRun] = []
    p_ts = []
    census_dict = None
    for mask in masks:
        try:
            circ = families.build(build_request(cfg, mask))
            data_bits = circ.metadata.get("data_clbits", list(range(cfg.n)))
            exact = sim.run_exact(circ).marginal(data_bits)
            low = _lowered(circ)
            if census_dict is None:
                census_dict = _census_dict(census(low))
            p_t = exact.probability(int(mask, 2))
            p_ts.append(p_t)
            exact_runs.append(analysis.OracleRun(mask, exact))
            if cfg.shots > 0:
                noisy = sim.run_noisy(
                    low, noise, cfg.shots, _derive_seed(cfg.seed, int(mask, 2))
                ).marginal(data_bits)
                run = analysis.OracleRun(mask, noisy, shots=cfg.shots)
            else:
                run = analysis.OracleRun(mask, exact, shots=None)
            measured_runs.append(run)
            oracle_rows.append(
                {
                    "mask": mask,
                    "p_t": p_t,
                    "p_succ": analysis.success_probability(run),
                    "shots": cfg.shots or None,
                    "counts": run.distribution.counts.tolist()
                    if not run.distribution.exact
                    else None,
                    "exact_distribution": exact.probabilities.tolist(),
                }
            )
        except QsearchError as exc:
            raise type(exc)(f"oracle {mask}: {exc}") from exc

    calls = families.build(build_request(cfg, masks[0])).metadata.get("oracle_calls", 1)
    p_t_avg = float(np.mean(p_ts))
    metrics = analysis.compile_metrics(measured_runs, p_t_avg, calls)
    relabeled_measured = analysis.relabel_average(measured_runs)
    relabeled_theory = analysis.relabel_average(exact_runs)
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "config": asdict(cfg),
        "oracles": oracle_rows,
        "p_t_average": p_t_avg,
        "relabeled_average": relabeled_measured.as_probabilities().tolist(),
        "relabeled_theoretical": relabeled_theory.as_probabilities().tolist(),
        "metrics": {
            "p_succ": metrics.p_succ,
            "p_succ_worst": metrics.p_succ_worst,
            "p_t": metrics.p_t,
            "r": metrics.r,
            "ci_low": metrics.ci[0],
            "ci_high": metrics.ci[1],
            "ci_method": "wilson-95",
            "oracle_calls_per_circuit": metrics.oracle_calls_per_circuit,
            "expected_calls_quantum": metrics.expected_calls_quantum,
            "classical_single_call": metrics.classical_single_call,
            "classical_guess_call": metrics.classical_guess_call,
            "classical_expected_calls": metrics.classical_expected_calls,
        },
        "census": census_dict,
        "timing_seconds": round(time.time() - t0, 6),
    }
    return report


def _report_path(cfg: ExperimentConfig, outdir: Path) -> Path:
    return outdir / f"report_{cfg.family}_{cfg.n}q.json"


def write_report(report: dict, path: Path) -> None:
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")


def cmd_run(cfg: ExperimentConfig, outdir: Path) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    report = run_experiment(cfg)
    path = _report_path(cfg, outdir)
    write_report(report, path)
    m = report["metrics"]
    print(
        f"{path.name}: p_succ={m['p_succ']:.6g} p_t={m['p_t']:.6g} R={m['r']:.6g} "
        f"2q={report['census']['two_qubit_count']}"
    )
    return 0


def _sig6(v: float) -> str:
    return f"{v:.6g}"


def cmd_plot(report_path: Path, outdir: Path | None = None) -> int:
    try:
        report = json.loads(report_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"report: cannot read {report_path}: {exc}") from exc
    theory = report["relabeled_theoretical"]
    measured = report["relabeled_average"]
    n = report["config"]["n"]
    stem = report_path.with_suffix("")
    if outdir is not None:
        stem = outdir / stem.name
    csv_path = Path(f"{stem}.csv")
    tex_path = Path(f"{stem}.tex")
    lines = ["pattern,theoretical,measured"]
    for v in range(1 << n):
        lines.append(
            f"{format(v, f'0{n}b')},{_sig6(theory[v])},{_sig6(measured[v])}"
        )
    csv_path.write_text("\n".join(lines) + "\n")

    def coords(series):
        return " ".join(f"({v},{_sig6(p)})" for v, p in enumerate(series))

    tex = "\n".join(
        [
            r"\begin{tikzpicture}",
            r"\begin{axis}[",
            r"  ybar, bar width=2pt, xlabel={pattern (relabeled)},",
            r"  ylabel={probability}, ymin=0,",
            f"  xmin=-1, xmax={1 << n},",
            r"  legend style={at={(0.98,0.95)},anchor=north east}]",
            r"\addplot coordinates { " + coords(theory) + " };",
            r"\addplot coordinates { " + coords(measured) + " };",
            r"\legend{theoretical, measured}",
            r"\end{axis}",
            r"\end{tikzpicture}",
        ]
    )
    tex_path.write_text(tex + "\n")
    print(f"wrote {csv_path.name} and {tex_path.name}")
    return 0


def cmd_sweep(cfg: ExperimentConfig, grid: list[float], outdir: Path) -> int:
    if not grid:
        raise ConfigError("grid: must be non-empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ConfigError("grid: must be ascending")
    outdir.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, p2 in enumerate(grid):
        point = ExperimentConfig(**{**asdict(cfg), "noise": {**cfg.noise, "p2": p2}})
        point.seed = _derive_seed(cfg.seed, i)
        report = run_experiment(point)
        m = report["metrics"]
        rows.append((p2, m["p_succ"], m["r"]))
    lines = ["p2,p_succ,r"] + [f"{_sig6(a)},{_sig6(b)},{_sig6(c)}" for a, b, c in rows]
    path = outdir / f"sweep_{cfg.family}_{cfg.n}q.csv"
    path.write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


# argument handling -----------------------------------------------------------

def _parse_noise(text: str) -> dict:
    out = {}
    alias = {"p1": "p1", "p2": "p2", "pm": "p_meas", "p_meas": "p_meas"}
    for part in text.split(","):
        if not part:
            continue
        if "=" not in part:
            raise ConfigError(f"noise: bad entry {part!r}")
        k, v = part.split("=", 1)
        if k.strip() not in alias:
            raise ConfigError(f"noise: unknown rate {k.strip()!r}")
        out[alias[k.strip()]] = float(v)
    return out


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    raw: dict = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc}") from exc
    cfg = ExperimentConfig()
    known = set(asdict(cfg))
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(f"config: unknown field {key!r}")
        setattr(cfg, key, value)
    if args.family is not None:
        cfg.family = args.family
    if args.n is not None:
        cfg.n = args.n
    if args.iterations is not None:
        cfg.iterations = args.iterations
    if args.partition is not None:
        try:
            cfg.partition = [int(p) for p in args.partition.split(",")]
        except ValueError as exc:
            raise ConfigError(f"partition: bad value {args.partition!r}") from exc
    if args.diffuser_size is not None:
        cfg.diffuser_size = args.diffuser_size
    if args.oracle is not None:
        cfg.oracle_set = [args.oracle]
    if args.oracle_set is not None:
        cfg.oracle_set = args.oracle_set
    if args.style is not None:
        cfg.oracle_style = args.style
    if args.uncompute is not None:
        cfg.uncompute = args.uncompute
    if args.fused:
        cfg.fused = True
    if args.shots is not None:
        cfg.shots = args.shots
    if args.noise is not None:
        cfg.noise = {**cfg.noise, **_parse_noise(args.noise)}
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    cfg.validate()
    return cfg


def _outdir(cfg: ExperimentConfig) -> Path:
    return Path(cfg.out or os.environ.get("QSEARCH_OUT") or ".")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsearch", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config")
    common.add_argument("--family", choices=families.FAMILIES)
    common.add_argument("--n", type=int)
    common.add_argument("--iterations", type=int)
    common.add_argument("--partition", help="comma list, e.g. 3,2")
    common.add_argument("--diffuser-size", type=int, dest="diffuser_size")
    common.add_argument("--oracle", help="single mask, e.g. 10110")
    common.add_argument("--oracle-set", dest="oracle_set", help="all | sample:k:seed")
    common.add_argument("--style", choices=synth.ORACLE_STYLES)
    common.add_argument("--uncompute", choices=families.UNCOMPUTE_MODES)
    common.add_argument("--fused", action="store_true")
    common.add_argument("--shots", type=int)
    common.add_argument("--noise", help="p1=0,p2=0.01,pm=0.005")
    common.add_argument("--seed", type=int)
    common.add_argument("--out")
    sub.add_parser("build", parents=[common])
    sub.add_parser("run", parents=[common])
    sweep = sub.add_parser("sweep", parents=[common])
    sweep.add_argument("--grid", required=True, help="comma list of p2 values")
    plot = sub.add_parser("plot")
    plot.add_argument("report")
    plot.add_argument("--out")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "plot":
            outdir = Path(args.out) if args.out else None
            return cmd_plot(Path(args.report), outdir)
        cfg = load_config(args)
        outdir = _outdir(cfg)
        if args.command == "build":
            return cmd_build(cfg, outdir)
        if args.command == "run":
            return cmd_run(cfg, outdir)
        grid = [float(v) for v in args.grid.split(",")]
        return cmd_sweep(cfg, grid, outdir)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except QsearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
