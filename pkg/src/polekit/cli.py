"""Scene-driven command line front end.

``polekit run scene.json`` executes the scene's job list (optionally
filtered to one command) and writes ``report.txt`` and ``report.json``
(plus CSV files for potential rays) into the output directory.  Given
the same scene and seed the reports are byte-identical.  Exit codes:
0 all checks passed, 1 at least one failed, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import classify as cls
from . import transport as tp
from .errors import PolekitError, SceneError
from .fields import StaticSource, falloff_exponent, potential_magnitude
from .moments import sample_taus
from .pairing import (
    pair_dipole,
    pair_monopole,
    pair_quadrupole,
    pull_back_test_form,
)
from .scene import parse_scene
from .sampling import rng_from_seed, random_test_form_along

_UPPER_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


@dataclass
class JobResult:
    name: str
    command: str
    passed: bool
    lines: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    files: list = field(default_factory=list)


def _fmt(x):
    return f"{x:.12e}"


def _fit_line(ts, vals):
    slope, intercept = np.polyfit(ts, vals, 1)
    return float(slope), float(intercept)


def _run_transform(scene, job, out_dir):
    chart = scene.chart_forward(job["chart"])
    C = scene.worldlines[job["worldline"]]
    spec = scene.multipoles[job["multipole"]]
    n = int(job.get("samples", 20))
    tol = float(job.get("tolerance", 1e-9))
    lines = []
    data = {"chart": job["chart"], "worldline": job["worldline"],
            "multipole": job["multipole"]}
    passed = True
    if spec.get("quadrupole") is not None:
        tr = tp.transform_quadrupole(
            spec["quadrupole"], chart, C, kappa0=job["kappa0"],
            split_dipole=True,
        )
        t0, t1 = tr.interval_hat
        ts = np.linspace(t0, t1, n)
        p_fits = {}
        for d, e in _UPPER_PAIRS:
            vals = [float(tr.P.matrix_at(t)[d, e]) for t in ts]
            if max(abs(v) for v in vals) > tol:
                slope, intercept = _fit_line(ts, vals)
                p_fits[f"{d}{e}"] = {"slope": slope, "intercept": intercept}
                lines.append(
                    f"  integral term P[{d}{e}]: slope {_fmt(slope)}, "
                    f"intercept {_fmt(intercept)}"
                )
        if not p_fits:
            lines.append("  integral term P: zero at all samples")
        dip = {}
        tmid = 0.5 * (t0 + t1)
        for d, e in _UPPER_PAIRS:
            v = tr.gamma2_hat[d, e](tmid)
            if abs(v) > tol:
                dip[f"{d}{e}"] = v
                lines.append(
                    f"  emergent dipole [{d}{e}] at mid-parameter: {_fmt(v)}"
                )
        if not dip:
            lines.append("  emergent dipole: zero at mid-parameter")
        check_taus = sample_taus((t0, t1), n=50, seed=int(job.get("seed", 0)))
        pair_r, cyc_r = tr.gamma3_hat.symmetry_residuals(check_taus)
        scale = max(1.0, tr.gamma3_hat.scale(check_taus))
        sym_ok = pair_r <= 1e-10 * scale and cyc_r <= 1e-10 * scale
        passed = passed and sym_ok
        lines.append(
            f"  transported symmetry residuals: pair {_fmt(pair_r)}, "
            f"cyclic {_fmt(cyc_r)} ({'ok' if sym_ok else 'VIOLATED'})"
        )
        samples = {}
        for d, e, f in ((1, 2, 0), (1, 0, 2), (2, 1, 0), (0, 1, 2)):
            samples[f"{d}{e}{f}"] = [
                float(tr.gamma3_hat[d, e, f](t)) for t in ts
            ]
        data.update({
            "P_fits": p_fits,
            "dipole_part_mid": dip,
            "symmetry_residuals": {"pair": pair_r, "cyclic": cyc_r},
            "sample_taus": [float(t) for t in ts],
            "component_samples": samples,
        })
    if spec.get("dipole") is not None:
        dhat = tp.transform_dipole(spec["dipole"], chart, C)
        t0, t1 = C.interval
        tmid = 0.5 * (t0 + t1)
        vals = {
            f"{a}{b}": float(dhat[a, b](tmid))
            for a, b in _UPPER_PAIRS
            if abs(dhat[a, b](tmid)) > tol
        }
        data["dipole_transported_mid"] = vals
        lines.append(f"  transported dipole entries at mid-parameter: {vals}")
    return JobResult(job["name"], "transform", passed, lines, data)


def _run_verify(scene, job, out_dir):
    pair = scene.chart_pair(job["chart"])
    bundle = scene.bundle(job["multipole"], job["worldline"])
    n = int(job.get("forms", 20))
    tol = float(job.get("tolerance", 1e-6))
    seed = int(job.get("seed", 0))
    rng = rng_from_seed(seed)
    C = bundle.worldline
    hatC = C.push_through_chart(pair.forward)
    parts_hat = []
    if bundle.monopole is not None:
        parts_hat.append(("monopole", bundle.monopole, None))
    if bundle.dipole is not None:
        parts_hat.append(
            ("dipole", bundle.dipole,
             tp.transform_dipole(bundle.dipole, pair.forward, C))
        )
    if bundle.quadrupole is not None:
        parts_hat.append(
            ("quadrupole", bundle.quadrupole,
             tp.transform_quadrupole(bundle.quadrupole, pair.forward, C))
        )
    rows = []
    passed = True
    for i in range(n):
        form_hat = random_test_form_along(rng, hatC)
        form_src = pull_back_test_form(form_hat, pair)
        src_total = 0.0
        hat_total = 0.0
        for kind, src_obj, hat_obj in parts_hat:
            if kind == "monopole":
                src_total += pair_monopole(src_obj, C, form_src).value
                hat_total += pair_monopole(src_obj, hatC, form_hat).value
            elif kind == "dipole":
                src_total += pair_dipole(src_obj, C, form_src).value
                hat_total += pair_dipole(hat_obj, hatC, form_hat).value
            else:
                src_total += pair_quadrupole(src_obj, C, form_src).value
                hat_total += pair_quadrupole(
                    hat_obj.gamma3_hat, hatC, form_hat
                ).value
        resid = abs(src_total - hat_total) / max(1.0, abs(src_total))
        rows.append((src_total, hat_total, resid))
        passed = passed and resid <= tol
    lines = [f"  {n} random probes, tolerance {_fmt(tol)} (seed {seed})"]
    for i, (s, h, r) in enumerate(rows):
        lines.append(
            f"  probe {i:2d}: source {_fmt(s)}  hatted {_fmt(h)}  "
            f"residual {_fmt(r)}"
        )
    data = {
        "seed": seed,
        "tolerance": tol,
        "residuals": [r for _, _, r in rows],
        "max_residual": max((r for _, _, r in rows), default=0.0),
    }
    return JobResult(job["name"], "verify", passed, lines, data)


def _run_classify(scene, job, out_dir):
    bundle = scene.bundle(job["multipole"], job["worldline"])
    seed = int(job.get("seed", 0))
    orders = job.get("orders", [2] if bundle.quadrupole is not None else [1])
    eorders = job.get("electric_orders", [])
    lines = []
    data = {"seed": seed}
    passed = True
    closed = cls.test_closed(bundle, seed=seed)
    lines.append(f"  closed: {'pass' if closed.passed else 'FAIL'} "
                 f"(residual {_fmt(closed.max_residual)})")
    data["closed"] = closed.passed
    passed = passed and closed.passed
    probes = cls.charge_probe_variations(bundle.worldline, n=3, seed=seed)
    charges = [cls.extract_charge(bundle, p) for p in probes]
    q = bundle.monopole.q if bundle.monopole is not None else 0.0
    mono_free = max(abs(c) for c in charges) <= 1e-8 * max(
        1.0, bundle.scale()
    )
    if bundle.monopole is None:
        lines.append(
            f"  monopole-free: {'pass' if mono_free else 'FAIL'} "
            f"(largest extracted charge {_fmt(max(abs(c) for c in charges))})"
        )
        passed = passed and mono_free
        data["monopole_free"] = mono_free
    else:
        drift = max(charges) - min(charges)
        ok = abs(charges[0] - q) <= 1e-8 and drift <= 1e-8
        lines.append(
            f"  charge: {_fmt(charges[0])} (declared {_fmt(q)}, drift "
            f"{_fmt(drift)}) {'pass' if ok else 'FAIL'}"
        )
        passed = passed and ok
        data["charge"] = charges[0]
    for k in orders:
        rep = cls.test_order(bundle, int(k), seed=seed)
        lines.append("  " + rep.summary())
        data[f"order_{k}"] = rep.passed
        passed = passed and rep.passed
    for ell in eorders:
        rep = cls.test_electric_order(bundle, int(ell), seed=seed)
        lines.append("  " + rep.summary())
        data[f"electric_order_{ell}"] = rep.passed
        passed = passed and rep.passed
    return JobResult(job["name"], "classify", passed, lines, data)


def _run_charge(scene, job, out_dir):
    bundle = scene.bundle(job["multipole"], job["worldline"])
    seed = int(job.get("seed", 0))
    tol = float(job.get("tolerance", 1e-8))
    choices = int(job.get("choices", 5))
    probes = cls.charge_probe_variations(bundle.worldline, n=choices,
                                         seed=seed)
    values = [cls.extract_charge(bundle, p) for p in probes]
    drift = max(values) - min(values)
    expect = job.get("expect")
    if expect is None and bundle.monopole is not None:
        expect = bundle.monopole.q
    lines = []
    for p, v in zip(probes, values):
        lines.append(f"  {_fmt(v)}  <- {p.description}")
    lines.append(f"  drift across choices: {_fmt(drift)}")
    passed = drift <= tol
    if expect is not None:
        err = max(abs(v - float(expect)) for v in values)
        lines.append(f"  largest deviation from {expect}: {_fmt(err)}")
        passed = passed and err <= tol
    data = {"values": values, "drift": drift, "seed": seed}
    return JobResult(job["name"], "charge", passed, lines, data)


def _run_potentials(scene, job, out_dir):
    spec = job["source"]
    source = StaticSource(
        spec["kind"], spec["moments"], eps0=float(spec.get("eps0", 1.0))
    )
    directions = job.get("directions", [[0.0, 0.0, 1.0]])
    r_lo = float(job.get("r_lo", 10.0))
    r_hi = float(job.get("r_hi", 1000.0))
    n = int(job.get("samples", 50))
    lines = []
    data = {"kind": spec["kind"], "exponents": []}
    files = []
    for i, direction in enumerate(directions):
        exponent = falloff_exponent(source, direction, r_lo, r_hi, n)
        data["exponents"].append(exponent)
        lines.append(
            f"  direction {tuple(direction)}: falloff exponent "
            f"{exponent:+.4f}"
        )
        rs = np.geomspace(r_lo, r_hi, n)
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        csv_name = f"{job['name']}_ray{i}.csv"
        csv_path = Path(out_dir) / csv_name
        with open(csv_path, "w", newline="\n") as fh:
            fh.write("r,value\n")
            for r in rs:
                value = potential_magnitude(source, r * d)
                fh.write(f"{float(r)!r},{float(value)!r}\n")
        files.append(csv_name)
    return JobResult(job["name"], "potentials", True, lines, data, files)


_RUNNERS = {
    "transform": _run_transform,
    "verify": _run_verify,
    "classify": _run_classify,
    "charge": _run_charge,
    "potentials": _run_potentials,
}


def run(scene, command="all", out_dir=".", parallel=False):
    """Execute the scene's jobs (filtered by ``command`` unless "all").

    Writes report.txt / report.json into ``out_dir`` and returns
    (results, exit_code)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [
        j for j in scene.jobs
        if command == "all" or j["command"] == command
    ]

    def run_one(job):
        try:
            return _RUNNERS[job["command"]](scene, job, out)
        except PolekitError as err:
            return JobResult(
                job["name"], job["command"], False,
                [f"  error: {err}"], {"error": str(err)},
            )

    if parallel and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=min(8, len(jobs))) as pool:
            results = list(pool.map(run_one, jobs))
    else:
        results = [run_one(j) for j in jobs]

    text_lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        text_lines.append(f"[{status}] {r.command} {r.name}")
        text_lines.extend(r.lines)
    text = "\n".join(text_lines) + "\n"
    (out / "report.txt").write_text(text, newline="\n")
    payload = {
        "command": command,
        "jobs": [
            {
                "name": r.name,
                "command": r.command,
                "passed": r.passed,
                "data": r.data,
                "files": r.files,
            }
            for r in results
        ],
    }
    (out / "report.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", newline="\n"
    )
    exit_code = 0 if all(r.passed for r in results) else 1
    return results, exit_code


def _parse_kappa0_flag(text):
    out = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise SceneError(
                [f"--kappa0 entry {item!r} must look like 12=0.5"]
            )
        key, val = item.split("=", 1)
        out[key.strip()] = float(val)
    return out


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="polekit",
        description="Worldline multipole transport and verification",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    runp = sub.add_parser("run", help="run a scene's jobs")
    runp.add_argument("scene", help="scene JSON file")
    runp.add_argument("--command", default="all",
                      choices=("all", "transform", "verify", "classify",
                               "charge", "potentials"))
    runp.add_argument("--out-dir", default="polekit-out")
    runp.add_argument("--seed", type=int, default=None,
                      help="override every job seed")
    runp.add_argument("--tol", type=float, default=None,
                      help="override every job tolerance")
    runp.add_argument("--samples", type=int, default=None,
                      help="override sample counts")
    runp.add_argument("--kappa0", default=None,
                      help="antisymmetric entries, e.g. '12=1,01=-2'")
    runp.add_argument("--parallel", action="store_true")
    valp = sub.add_parser("validate", help="parse and validate a scene")
    valp.add_argument("scene")
    args = parser.parse_args(argv)

    try:
        text = Path(args.scene).read_text()
    except OSError as err:
        print(f"cannot read scene: {err}", file=sys.stderr)
        return 2
    try:
        scene = parse_scene(text)
    except SceneError as err:
        for p in err.problems:
            print(f"scene error: {p}", file=sys.stderr)
        return 2
    if args.verb == "validate":
        print(f"scene ok: {len(scene.charts)} charts, "
              f"{len(scene.worldlines)} worldlines, "
              f"{len(scene.multipoles)} multipoles, "
              f"{len(scene.jobs)} jobs")
        return 0

    if args.seed is not None:
        for job in scene.jobs:
            job["seed"] = args.seed
    if args.tol is not None:
        for job in scene.jobs:
            job["tolerance"] = args.tol
    if args.samples is not None:
        for job in scene.jobs:
            job["samples"] = args.samples
            job["forms"] = args.samples
    if args.kappa0 is not None:
        try:
            entries = _parse_kappa0_flag(args.kappa0)
        except SceneError as err:
            print(f"usage error: {err}", file=sys.stderr)
            return 2
        M = np.zeros((4, 4))
        for key, val in entries.items():
            d, e = int(key[0]), int(key[1])
            M[d, e] = val
            M[e, d] = -val
        for job in scene.jobs:
            if job["command"] == "transform":
                job["kappa0"] = M
    _, code = run(scene, command=args.command, out_dir=args.out_dir,
                  parallel=args.parallel)
    return code


if __name__ == "__main__":
    sys.exit(main())
