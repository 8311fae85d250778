"""File formats.

Edge lists: one ``label_a<TAB>label_b`` line per edge.  Blank lines and
``#`` comments are ignored.  A directory holds one file per snapshot
(ordered by zero-padded filename sort); a single file either holds one
snapshot or is sectioned with ``--t <k>`` header lines.

Ground truth: line 1 is ``tau: t1 t2 ...``, then one
``segment m: label=cid label=cid ...`` line per segment.

Detection results: JSON with sorted keys; stable across reruns except for
the optional ``generated_at`` stamp.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from .changepoint import DetectionResult
from .errors import DataFormatError
from .graphs import GraphSequence
from .mdl import MdlConfig
from .sbm import LinkProbs
from .synth import GroundTruth

RESULT_FORMAT = "mdlseg-result-v1"
_SECTION = "--t"


def _parse_edge_lines(lines, where: str) -> list[tuple[str, str]]:
    pairs = []
    for ln, raw in lines:
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise DataFormatError(f"{where}:{ln}: expected 'label<TAB>label', got {line!r}")
        pairs.append((parts[0], parts[1]))
    return pairs


def read_edge_lists(path) -> list[list[tuple[str, str]]]:
    """Read per-snapshot label pairs from a directory or a (sectioned) file."""
    p = Path(path)
    if p.is_dir():
        files = sorted(f for f in p.iterdir() if f.is_file() and not f.name.startswith("."))
        if not files:
            raise DataFormatError(f"{p}: directory holds no snapshot files")
        out = []
        for f in files:
            with f.open() as fh:
                out.append(_parse_edge_lines(enumerate(fh, start=1), str(f)))
        return out
    if not p.is_file():
        raise DataFormatError(f"{p}: no such file or directory")
    sections: dict[int, list[tuple[str, str]]] = {}
    current: list[tuple[str, str]] | None = None
    plain: list[tuple[int, str]] = []
    with p.open() as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line.startswith(_SECTION):
                rest = line[len(_SECTION):].strip()
                try:
                    k = int(rest)
                except ValueError:
                    raise DataFormatError(f"{p}:{ln}: bad section header {line!r}") from None
                if k in sections:
                    raise DataFormatError(f"{p}:{ln}: duplicate section --t {k}")
                current = sections.setdefault(k, [])
                continue
            if current is not None:
                current.extend(_parse_edge_lines([(ln, raw)], str(p)))
            else:
                plain.append((ln, raw))
    if sections:
        leftovers = _parse_edge_lines(plain, str(p))
        if leftovers:
            raise DataFormatError(f"{p}: edges appear before the first --t header")
        return [sections[k] for k in sorted(sections)]
    return [_parse_edge_lines(plain, str(p))]


def write_snapshot_dir(edge_lists: Sequence[Sequence[tuple[str, str]]], dirpath) -> list[Path]:
    """One zero-padded file per snapshot; returns the written paths."""
    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(len(edge_lists))))
    paths = []
    for pos, pairs in enumerate(edge_lists, start=1):
        f = d / f"snapshot_{pos:0{width}d}.tsv"
        with f.open("w") as fh:
            for a, b in pairs:
                fh.write(f"{a}\t{b}\n")
        paths.append(f)
    return paths


def write_sectioned_file(edge_lists: Sequence[Sequence[tuple[str, str]]], path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w") as fh:
        for pos, pairs in enumerate(edge_lists, start=1):
            fh.write(f"--t {pos}\n")
            for a, b in pairs:
                fh.write(f"{a}\t{b}\n")
    return p


def write_ground_truth(truth: GroundTruth, path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w") as fh:
        fh.write("tau: " + " ".join(str(t) for t in truth.change_points) + "\n")
        for m, assign in enumerate(truth.segment_assignments, start=1):
            body = " ".join(f"{label}={cid}" for label, cid in sorted(assign.items()))
            fh.write(f"segment {m}: {body}\n")
    return p


def read_ground_truth(path) -> GroundTruth:
    p = Path(path)
    with p.open() as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].startswith("tau:"):
        raise DataFormatError(f"{p}: first line must start with 'tau:'")
    tau_body = lines[0][len("tau:"):].strip()
    tau = tuple(int(x) for x in tau_body.split()) if tau_body else ()
    segments = []
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        head, _, body = line.partition(":")
        if not head.startswith("segment"):
            raise DataFormatError(f"{p}:{ln}: expected 'segment m:' line, got {line!r}")
        assign = {}
        for tok in body.split():
            label, _, cid = tok.rpartition("=")
            if not label:
                raise DataFormatError(f"{p}:{ln}: bad token {tok!r}")
            assign[label] = int(cid)
        segments.append(assign)
    if len(segments) != len(tau) + 1:
        raise DataFormatError(
            f"{p}: {len(tau)} change points need {len(tau) + 1} segments, got {len(segments)}"
        )
    return GroundTruth(tau, tuple(segments))


def _probs_payload(probs: LinkProbs) -> dict:
    c = probs.num_communities
    return {
        f"{k}-{l}": round(float(probs.probs[k - 1, l - 1]), 12)
        for k in range(1, c + 1)
        for l in range(k, c + 1)
    }


def result_payload(
    result: DetectionResult,
    seq: GraphSequence,
    config: MdlConfig,
    *,
    timestamp: bool = True,
) -> dict:
    """JSON-ready view of a detection result (1-based times throughout)."""
    seg = result.segmentation
    bounds = [1] + list(result.change_points) + [seq.T + 1]
    segments = []
    for m, (a, b) in enumerate(zip(bounds[:-1], bounds[1:])):
        assign = seg.assignments[m]
        segments.append(
            {
                "start": a,
                "end_exclusive": b,
                "num_communities": assign.num_communities,
                "communities": {
                    seq.label_of(i): cid for i, cid in sorted(assign.assignment.items())
                },
            }
        )
    payload = {
        "format": RESULT_FORMAT,
        "T": seq.T,
        "change_points": list(result.change_points),
        "mdl_bits": result.mdl_value,
        "config": {
            "pair_counting": config.pair_counting,
            "changepoint_code": config.changepoint_code,
        },
        "segments": segments,
        "probs": [
            {"t": t, "P": _probs_payload(seg.probs[t - 1])} for t in range(1, seq.T + 1)
        ]
        if seg.probs is not None
        else None,
        "trace": [
            {"action": e.action, "t": e.t, "mdl_before": e.mdl_before, "mdl_after": e.mdl_after}
            for e in result.trace
        ],
        "warnings": list(result.warnings),
        "stats": dict(result.stats),
    }
    if timestamp:
        payload["generated_at"] = datetime.now(timezone.utc).isoformat()
    return payload


def write_result(payload: dict, path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return p


def read_result(path) -> dict:
    p = Path(path)
    try:
        with p.open() as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{p}: not valid JSON ({exc})") from None
    if payload.get("format") != RESULT_FORMAT:
        raise DataFormatError(f"{p}: unknown result format {payload.get('format')!r}")
    return payload


def result_segmentation(payload: dict) -> tuple[tuple[int, ...], list[dict[str, int]]]:
    """Change points and label-keyed per-segment assignments from a result file."""
    tau = tuple(int(t) for t in payload["change_points"])
    assignments = [
        {str(k): int(v) for k, v in seg["communities"].items()} for seg in payload["segments"]
    ]
    return tau, assignments


def write_frequency_csv(counts: dict[int, int], path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w") as fh:
        fh.write("t,count\n")
        for t in sorted(counts):
            fh.write(f"{t},{counts[t]}\n")
    return p


def write_nmi_csv(per_segment: Sequence[float], overall: float, path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w") as fh:
        fh.write("segment,nmi\n")
        for m, v in enumerate(per_segment, start=1):
            fh.write(f"{m},{v:.6f}\n")
        fh.write(f"overall,{overall:.6f}\n")
    return p
