"""JSON instance files and selection reports.

Both are plain JSON with sorted keys and a schema tag. Node ids are the dense
internal ids; an instance carries the original labels so reports stay readable.
"""

import json
import platform
import re
from pathlib import Path

import numpy as np

from centrex.coverage import ALL_PAIRS, PairUniverse, read_pair_file
from centrex.graph import Graph

INSTANCE_SCHEMA = "centrex-instance/1"
REPORT_SCHEMA = "centrex-report/1"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return None if v != v else v
    if hasattr(obj, "value") and hasattr(obj, "name"):  # enums
        return obj.value
    return obj


_FLAT_ARRAY = re.compile(r"\[\s+([^\[\]{}]*?)\s+\]")


def dumps(doc):
    """Indented JSON with sorted keys; arrays of scalars stay on one line."""
    text = json.dumps(_plain(doc), indent=2, sort_keys=True)
    text = _FLAT_ARRAY.sub(lambda m: "[" + re.sub(r",\s+", ", ", m.group(1)) + "]", text)
    return text + "\n"


def instance_to_dict(p):
    g = p.graph
    doc = {
        "schema": INSTANCE_SCHEMA,
        "directed": g.directed,
        "nodes": g.n,
        "edges": [list(e) for e in g.edges()],
        "targets": list(p.targets),
        "candidates": [list(e) for e in p.candidates],
        "k": p.k,
        "setting": p.setting.value,
        "pairs": "all" if p.pairs.mode == "all" else p.pairs.pairs.tolist(),
    }
    if g.tokens is not None and list(g.tokens) != [str(i) for i in range(g.n)]:
        doc["labels"] = list(g.tokens)
    return doc


def instance_from_dict(doc, base_dir=None):
    """Rebuild a ProblemInstance. ``candidates`` may be a list or ``"auto:S1"``-style;
    ``pairs`` may be ``"all"``, a list, or ``"file:PATH"``."""
    from centrex.problem import ProblemInstance, Setting

    if doc.get("schema") != INSTANCE_SCHEMA:
        raise ValueError(f"unsupported instance schema {doc.get('schema')!r}")
    directed = bool(doc.get("directed", False))
    g = Graph(int(doc["nodes"]), [tuple(e) for e in doc["edges"]], directed=directed,
              tokens=doc.get("labels"))
    setting = Setting.parse(doc.get("setting", "S1"), directed)
    cands = doc.get("candidates", "auto")
    candidates = None
    if isinstance(cands, str):
        if cands.lower() not in ("auto",):
            setting = Setting.parse(cands, directed)
    else:
        candidates = [tuple(e) for e in cands]
    pairs = doc.get("pairs", "all")
    if pairs == "all":
        universe = ALL_PAIRS
    elif isinstance(pairs, str) and pairs.startswith("file:"):
        path = Path(pairs[5:])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        universe = read_pair_file(path, g)
    else:
        universe = PairUniverse.explicit(pairs)
    return ProblemInstance.build(g, doc["targets"], doc["k"], setting, candidates=candidates,
                                 pairs=universe)


def read_instance(path):
    path = Path(path)
    return instance_from_dict(json.loads(path.read_text()), base_dir=path.parent)


def write_instance(p, path):
    Path(path).write_text(dumps(instance_to_dict(p)))


def environment():
    import networkx
    import numba

    from centrex import __version__

    return {"centrex": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "numba": numba.__version__,
            "networkx": networkx.__version__}


def build_report(p, report, *, command="optimize", metrics=None, timings=False, extra=None):
    """The report document for one selection run.

    Wall times are left out unless ``timings`` is set, so that identical
    flags and seed give byte-identical output.
    """
    g = p.graph
    iterations = []
    for i, edge in enumerate(report.selected):
        row = {"round": i + 1, "edge": list(edge), "edge_labels": [g.label(v) for v in edge]}
        if i < len(report.gains):
            row["gain"] = report.gains[i]
        est = report.details.get("estimated_gain")
        if est is not None and i < len(est):
            row["estimated_cumulative_gain"] = est[i]
        iterations.append(row)
    details = {k: v for k, v in report.details.items() if k != "estimated_gain"}
    doc = {
        "schema": REPORT_SCHEMA,
        "command": command,
        "algorithm": report.algorithm,
        "seed": report.seed,
        "instance": instance_to_dict(p),
        "plan": report.plan,
        "gain_kind": report.gain_kind,
        "iterations": iterations,
        "selected": [list(e) for e in report.selected],
        "coverage": {"before": report.coverage_before.as_dict(),
                     "after": report.coverage_after.as_dict(),
                     "gain": report.gain},
        "metrics": metrics,
        "notes": report.notes,
        "details": details,
        "environment": environment(),
    }
    if timings:
        doc["timings"] = report.timings
    if extra:
        doc.update(extra)
    return doc


def parse_report(text):
    doc = json.loads(text)
    if doc.get("schema") != REPORT_SCHEMA:
        raise ValueError(f"unsupported report schema {doc.get('schema')!r}")
    return doc
