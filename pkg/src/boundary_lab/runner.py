"""Execution of configured experiments and persistence of their results."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import ergodic, intertwiner, lorentz, measure, representation
from .audit import AuditReport, merge_reports
from .config import ExperimentConfig
from .representation import RepParameter
from .tree import Word, words_array


def _words(model, max_len):
    for n in range(1, max_len + 1):
        for row in words_array(model, n):
            yield Word(model, tuple(int(c) for c in row))


def sweep_stability(rep: AuditReport, label: str, values: dict, tol: float):
    """Relative change of a measured constant between the two deepest depths."""
    depths = sorted(values)
    if len(depths) < 2:
        return
    a, b = values[depths[-2]], values[depths[-1]]
    rel = abs(a - b) / max(abs(a), abs(b))
    rep.add({"item": f"{label}_relative_change", "depths": depths[-2:]}, rel, rel, 0.0, tol)


def run_ahlfors(model, p, ctx):
    return measure.ahlfors_audit(model, p["N"], p["steps"])


def run_shadow(model, p, ctx):
    reps = [measure.shadow_measure_audit(model, n, r) for r in p["r"] for n in range(1, p["n_max"] + 1)]
    out = merge_reports("shadow_measure_audit", model.name, reps)
    spread = max(out.extra["spread"])
    out.add({"item": "sphere_spread"}, spread, spread, 0.0, 1e-13)
    return out


def run_covering(model, p, ctx):
    reps = [measure.covering_audit(model, n, p["r"]) for n in range(1, p["n_max"] + 1)]
    return merge_reports("covering_audit", model.name, reps)


def run_hch(model, p, ctx):
    reps = list(ctx["map"](lambda t: representation.hch_audit(model, t, p["n_max"], p["ceiling"]), p["t"]))
    return merge_reports("hch_audit", model.name, reps)


def run_pi_bound(model, p, ctx):
    reps = [representation.pi_bound_audit(RepParameter(t), g, r)
            for t in p["t"] for r in p["r"] for g in _words(model, p["max_len"])]
    return merge_reports("pi_bound_audit", model.name, reps)


def run_intertwine(model, p, ctx):
    reps = list(ctx["map"](lambda t: intertwiner.intertwine_audit(
        model, t, p["N"], p["max_len"], p["trials"], seed=ctx["seed"], tol=p["tol"]), p["t"]))
    return merge_reports("intertwine_audit", model.name, reps)


def run_spectrum(model, p, ctx):
    reps = [intertwiner.spectrum_audit(model, t, p["depths"]) for t in p["t"]]
    return merge_reports("l2_spectrum", model.name, reps)


def run_pq_probe(model, p, ctx):
    out = AuditReport("pq_norm_probe", model.name)
    for t in p["t"]:
        vals = {}
        for N in p["depths"]:
            vals[N] = intertwiner.pq_norm_probe(model, t, N, p["trials"], seed=ctx["seed"])
            out.add({"t": t, "N": N, "trials": p["trials"]}, vals[N], vals[N], 0.0, math.inf)
        sweep_stability(out, f"t={t}:probe", vals, p["tol"])
    return out


def run_kernel_weak(model, p, ctx):
    reps = [lorentz.kernel_weak_audit(model, t, N) for t in p["t"] for N in p["depths"]]
    return merge_reports("kernel_weak_audit", model.name, reps)


def run_schur(model, p, ctx):
    out = AuditReport("schur_audit", model.name)
    for t in p["t"]:
        vals = {}
        for N in p["depths"]:
            rep = lorentz.schur_audit(model, t, N, p["trials"], p["s"], seed=ctx["seed"])
            out.rows.extend(rep.rows)
            vals[N] = rep.extra["max_ratio"]
        sweep_stability(out, f"t={t}:max_ratio", vals, p["tol"])
    return out


def run_embedding(model, p, ctx):
    return lorentz.embedding_audit(model, p["p"], p["q1"], p["q2"], p["N"], p["trials"], ctx["seed"])


def run_equid(model, p, ctx):
    pair = ergodic.TestFunctionPair(p["f"], p["g"])
    return ergodic.equid_audit(pair, p["n_max"], p["tol"], mapper=ctx["map"])


def run_bm(model, p, ctx):
    pair = ergodic.TestFunctionPair(p["f"], p["g"])
    reps = [ergodic.bm_audit(t, pair, p["v"], p["w"], p["n_max"], p["tol"], mapper=ctx["map"])
            for t in p["t"]]
    return merge_reports("bm_audit", model.name, reps)


def run_rd(model, p, ctx):
    reps = [ergodic.rd_audit(model, t, r, p["n_max"], p["ceiling"], mapper=ctx["map"])
            for t in p["t"] for r in p["r"]]
    return merge_reports("rd_audit", model.name, reps)


def run_cyclic(model, p, ctx):
    reps = [ergodic.cyclic_approx(t, p["target"], p["w_tests"], p["n_max"], p["tol"], mapper=ctx["map"])
            for t in p["t"]]
    return merge_reports("cyclic_approx", model.name, reps)


def run_dual(model, p, ctx):
    reps = [ergodic.dual_limit_audit(t, p["w"], p["v_tests"], p["n_max"], p["tol"], mapper=ctx["map"])
            for t in p["t"]]
    return merge_reports("dual_limit_audit", model.name, reps)


RUNNERS = {
    "ahlfors_audit": run_ahlfors,
    "shadow_measure_audit": run_shadow,
    "covering_audit": run_covering,
    "hch_audit": run_hch,
    "pi_bound_audit": run_pi_bound,
    "intertwine_audit": run_intertwine,
    "l2_spectrum": run_spectrum,
    "pq_norm_probe": run_pq_probe,
    "kernel_weak_audit": run_kernel_weak,
    "schur_audit": run_schur,
    "embedding_audit": run_embedding,
    "equid_audit": run_equid,
    "bm_audit": run_bm,
    "rd_audit": run_rd,
    "cyclic_approx": run_cyclic,
    "dual_limit_audit": run_dual,
}


def run_experiments(cfg: ExperimentConfig, threads: int = 1) -> list:
    """Run every configured experiment in order; returns (experiment, report) pairs."""
    results = []
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        # executor.map keeps input order, so results do not depend on the thread count
        ctx = {"seed": cfg.seed, "map": pool.map if threads > 1 else map}
        for exp in cfg.experiments:
            rep = RUNNERS[exp.audit](cfg.model, exp.params, ctx)
            rep.audit = exp.audit
            results.append((exp, rep))
    return results


def _clean(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return None if math.isnan(v) else (str(v) if math.isinf(v) else float(f"{v:.17g}"))
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_results(cfg: ExperimentConfig, results, output_dir) -> dict:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for exp, rep in results:
        (out / f"{exp.name}.csv").write_text(rep.to_csv())
        for table in sorted(rep.tables):
            (out / f"{exp.name}.{table}.csv").write_text(rep.table_csv(table))
        s = rep.summary()
        entries.append({"experiment": exp.name, "audit": exp.audit, "pass": s["pass"],
                        "rows": s["rows"], "measured_min": _clean(s["measured_min"]),
                        "measured_max": _clean(s["measured_max"])})
    summary = {"model": cfg.model.name, "seed": cfg.seed,
               "pass": all(e["pass"] for e in entries), "experiments": entries}
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
