"""Batch front door: generate synthetic data, detect, evaluate, simulate.

Exit codes: 0 ok, 2 bad configuration, 3 data error, 4 internal
invariant violation.  Errors print one machine-parseable line to stderr:
``error kind=<Name> message=<text>``.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import errors as E
from . import io as mio
from .changepoint import detect, fit_segmentation
from .evaluate import changepoint_frequency, nmi, overall_nmi
from .graphs import build_sequence
from .mdl import MdlConfig
from .synth import FixedLaw, SegmentSpec, SettingSpec, UniformLaw, builtin_setting, generate

_CONFIG_ERRORS = (E.UnknownSettingError, click.UsageError, ValueError)
_DATA_ERRORS = (
    E.DataFormatError,
    E.SelfLoopError,
    E.EmptySequenceError,
    E.OutOfBoundsError,
    E.UnassignedNodeError,
    E.DomainError,
    E.InvalidSegmentationError,
    E.DegenerateSnapshotError,
    E.EmptyDomainError,
    E.SegmentMismatchError,
    FileNotFoundError,
)


def _fail(exc: BaseException, code: int) -> None:
    kind = type(exc).__name__
    message = str(exc).replace("\n", " ")
    click.echo(f"error kind={kind} message={message}", err=True)
    sys.exit(code)


def _run_guarded(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except E.InternalInvariantError as exc:
        _fail(exc, 4)
    except _CONFIG_ERRORS as exc:
        _fail(exc, 2)
    except _DATA_ERRORS as exc:
        _fail(exc, 3)


def _load_spec_file(path: Path) -> SettingSpec:
    try:
        with path.open() as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise E.DataFormatError(f"{path}: not valid JSON ({exc})") from None
    segments = []
    for seg in raw.get("segments", []):
        law_raw = seg["link_law"]
        pw, pb = law_raw["p_within"], law_raw["p_between"]
        if isinstance(pw, (list, tuple)):
            law = UniformLaw(tuple(pw), tuple(pb))
        else:
            law = FixedLaw(float(pw), float(pb))
        segments.append(
            SegmentSpec(
                int(seg["t_start"]),
                int(seg["t_end"]),
                tuple(seg["ratios"]),
                law,
                tuple(seg["node_range"]),
            )
        )
    return SettingSpec(
        tuple(segments),
        float(raw.get("rho", 0.0)),
        int(raw.get("seed", 0)),
        str(raw.get("correlation_model", "temporal")),
    )


def _resolve_spec(setting: int | None, spec_file: str | None) -> SettingSpec:
    if (setting is None) == (spec_file is None):
        raise click.UsageError("provide exactly one of --setting and --spec-file")
    if setting is not None:
        return builtin_setting(setting)
    return _load_spec_file(Path(spec_file))


def _mdl_config(pair_counting: str, cl_prime: bool) -> MdlConfig:
    return MdlConfig(
        pair_counting=pair_counting,
        changepoint_code="bound" if cl_prime else "lengths",
    )


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


@click.group()
def main():
    """Change-point and community detection in network time series."""


@main.command("generate")
@click.option("--setting", type=int, default=None, help="Builtin scenario id (1..6).")
@click.option("--spec-file", type=click.Path(exists=True), default=None, help="Custom scenario JSON.")
@click.option("--out", "out_dir", type=click.Path(), required=True, help="Output directory.")
@click.option("--seed", type=int, required=True, help="Generator seed.")
@click.option("--correlation-model", type=click.Choice(["temporal", "cross"]), default=None,
              help="Override the scenario's correlated-edge construction.")
def generate_cmd(setting, spec_file, out_dir, seed, correlation_model):
    """Write snapshot edge lists plus the planted ground truth."""

    def run():
        spec = _resolve_spec(setting, spec_file)
        if correlation_model is not None:
            from dataclasses import replace

            spec = replace(spec, correlation_model=correlation_model)
        seq, truth = generate(spec, seed=seed)
        out = Path(out_dir)
        from .graphs import export_edge_lists

        mio.write_snapshot_dir(export_edge_lists(seq), out / "snapshots")
        mio.write_ground_truth(truth, out / "ground_truth.txt")
        click.echo(f"wrote {seq.T} snapshots ({seq.N} nodes) under {out}")

    _run_guarded(run)


@main.command("detect")
@click.option("--input", "input_path", type=click.Path(exists=True), required=True,
              help="Snapshot directory or sectioned edge-list file.")
@click.option("--out", "out_path", type=click.Path(), required=True, help="Result JSON path.")
@click.option("--seed", type=int, default=0, show_default=True, help="Search seed.")
@click.option("--cl-prime", is_flag=True, help="Encode change points as M*log2(T) instead of interval lengths.")
@click.option("--init", type=click.Choice(["random", "spectral"]), default="spectral", show_default=True)
@click.option("--pair-counting", type=click.Choice(["snapshot", "segment"]), default="snapshot",
              show_default=True, help="Node set entering pair counts at each time.")
@click.option("--no-timestamp", is_flag=True, help="Omit the generated_at stamp (byte-stable output).")
def detect_cmd(input_path, out_path, seed, cl_prime, init, pair_counting, no_timestamp):
    """Detect change points and per-segment communities."""

    def run():
        seq = build_sequence(mio.read_edge_lists(input_path))
        config = _mdl_config(pair_counting, cl_prime)
        result = detect(seq, seed, config=config, init=init)
        payload = mio.result_payload(result, seq, config, timestamp=not no_timestamp)
        mio.write_result(payload, out_path)
        tau = " ".join(str(t) for t in result.change_points) or "(none)"
        click.echo(f"change points: {tau}")
        click.echo(f"mdl bits: {result.mdl_value:.6f}")

    _run_guarded(run)


@main.command("eval")
@click.option("--truth", "truth_path", type=click.Path(exists=True), required=True)
@click.option("--result", "result_path", type=click.Path(exists=True), required=True)
@click.option("--out-prefix", type=click.Path(), default=None,
              help="Write <prefix>_nmi.csv; defaults to printing only.")
def eval_cmd(truth_path, result_path, out_prefix):
    """Score a detection result against a ground-truth file."""

    def run():
        truth = mio.read_ground_truth(truth_path)
        payload = mio.read_result(result_path)
        tau, assignments = mio.result_segmentation(payload)
        if tau != tuple(truth.change_points):
            raise E.SegmentMismatchError(
                f"result change points {tau} differ from truth {tuple(truth.change_points)}"
            )
        per = [nmi(est, true) for est, true in zip(assignments, truth.segment_assignments)]
        overall = sum(per) / len(per)
        if out_prefix:
            mio.write_nmi_csv(per, overall, f"{out_prefix}_nmi.csv")
        for m, v in enumerate(per, start=1):
            click.echo(f"segment {m}: nmi={v:.6f}")
        click.echo(f"overall nmi: {overall:.6f}")

    _run_guarded(run)


def _simulate_trial(args) -> dict:
    """One generate+detect+known-tau-fit cycle (top level for process pools)."""
    (spec, trial, master_seed, pair_counting, cl_prime, init) = args
    config = _mdl_config(pair_counting, cl_prime)
    gen_seed = _derived_seed(master_seed, trial, 0)
    det_seed = _derived_seed(master_seed, trial, 1)
    fit_seed = _derived_seed(master_seed, trial, 2)
    seq, truth = generate(spec, seed=gen_seed)
    result = detect(seq, det_seed, config=config, init=init)
    known, _ = fit_segmentation(seq, truth.change_points, fit_seed, config=config, init=init)
    report = overall_nmi(seq, known, truth)
    return {
        "trial": trial,
        "change_points": list(result.change_points),
        "mdl_bits": result.mdl_value,
        "known_tau_nmi": report.overall,
        "nmi_per_segment": list(report.per_segment),
    }


@main.command("simulate")
@click.option("--setting", type=int, default=None, help="Builtin scenario id (1..6).")
@click.option("--spec-file", type=click.Path(exists=True), default=None, help="Custom scenario JSON.")
@click.option("--trials", type=int, required=True)
@click.option("--seed", type=int, required=True, help="Master seed; trials derive from it.")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--cl-prime", is_flag=True)
@click.option("--init", type=click.Choice(["random", "spectral"]), default="spectral", show_default=True)
@click.option("--pair-counting", type=click.Choice(["snapshot", "segment"]), default="snapshot",
              show_default=True)
@click.option("--correlation-model", type=click.Choice(["temporal", "cross"]), default=None,
              help="Override the scenario's correlated-edge construction.")
def simulate_cmd(setting, spec_file, trials, seed, out_dir, workers, cl_prime, init, pair_counting,
                 correlation_model):
    """Repeat generate+detect cycles; emit frequency and NMI summaries."""

    def run():
        if trials < 1:
            raise click.UsageError("--trials must be >= 1")
        spec = _resolve_spec(setting, spec_file)
        if correlation_model is not None:
            from dataclasses import replace

            spec = replace(spec, correlation_model=correlation_model)
        jobs = [(spec, i, seed, pair_counting, cl_prime, init) for i in range(trials)]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(_simulate_trial, jobs))
        else:
            rows = [_simulate_trial(j) for j in jobs]
        rows.sort(key=lambda r: r["trial"])

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        counts = changepoint_frequency([tuple(r["change_points"]) for r in rows], spec.T)
        mio.write_frequency_csv(counts, out / "frequency.csv")
        mean_nmi = sum(r["known_tau_nmi"] for r in rows) / len(rows)
        with (out / "nmi.csv").open("w") as fh:
            fh.write("trial,known_tau_nmi\n")
            for r in rows:
                fh.write(f"{r['trial']},{r['known_tau_nmi']:.6f}\n")
            fh.write(f"mean,{mean_nmi:.6f}\n")
        with (out / "trials.json").open("w") as fh:
            json.dump(
                {"setting": setting, "seed": seed, "true_change_points": list(spec.change_points),
                 "trials": rows},
                fh, indent=2, sort_keys=True,
            )
            fh.write("\n")
        click.echo(f"true change points: {' '.join(str(t) for t in spec.change_points)}")
        click.echo(f"mean known-tau nmi: {mean_nmi:.4f}")
        click.echo(f"wrote {out / 'frequency.csv'} and {out / 'nmi.csv'}")

    _run_guarded(run)


if __name__ == "__main__":
    main()
