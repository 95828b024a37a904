"""Batch front end: simulate, actions, verify, list-scenarios.

Outputs are deterministic for a fixed config: the trajectory CSV prints
every float with 17 significant digits, and the report JSON is sorted by
key (the ``wall_time`` and ``timestamp`` fields are excluded from
determinism comparisons).

Exit codes: 0 success, 1 validation failure, 2 runtime failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import datetime
import json
import sys
from pathlib import Path

import numpy as np

from . import analytic2d
from .config import ScenarioConfig, parse_config
from .errors import (
    AffineBodyError,
    ParseError,
    RegimeError,
    StepFailure,
    UnboundMotionError,
    ValidationError,
)
from .frames import polar_orthonormal_frame
from .geometry import make_manifold
from .integrate import TrajectoryRecord, run
from .observables import build_observables
from .scenario import ScenarioBundle, build_bundle
from .verify import run_suites

__all__ = ["main", "cmd_simulate", "cmd_actions", "cmd_verify", "shipped_scenarios"]

_FMT = "{:.17g}"


def shipped_scenarios() -> dict:
    """Name -> path of the scenario corpus packaged with the library."""
    root = Path(__file__).parent / "scenarios"
    return {p.stem: p for p in sorted(root.glob("*.cfg"))}


def _load_config(path_or_name: str) -> ScenarioConfig:
    shipped = shipped_scenarios()
    path = Path(path_or_name)
    if not path.exists() and path_or_name in shipped:
        path = shipped[path_or_name]
    return parse_config(path.read_text())


def _write_csv(path: Path, record: TrajectoryRecord, bundle: ScenarioBundle):
    n = bundle.model.dim
    header = (
        ["t"]
        + [f"x{i + 1}" for i in range(n)]
        + [f"e_{i + 1}_{a + 1}" for i in range(n) for a in range(n)]
        + ["fibre"]
        + [f"f{i + 1}" for i in range(n)]
        + [f"F_{i + 1}_{a + 1}" for i in range(n) for a in range(n)]
        + ["energy", "constraint_residual"]
        + sorted(record.samples[0].observables.keys())
    )
    lines = [",".join(header)]
    for smp in record.samples:
        rec = smp.state.to_record()
        fields = [_FMT.format(smp.t)]
        fields += [_FMT.format(v) for v in rec[: n + n * n]]
        fields += [rec[n + n * n]]
        fields += [_FMT.format(v) for v in rec[n + n * n + 1 :]]
        fields += [_FMT.format(smp.energy), _FMT.format(smp.constraint_residual)]
        fields += [_FMT.format(smp.observables[k]) for k in sorted(smp.observables)]
        lines.append(",".join(fields))
    path.write_text("\n".join(lines) + "\n")


def _oracle_block(bundle: ScenarioBundle):
    """Quadrature-vs-closed-form action deviations, when constants are given."""
    const = bundle.separation_constants()
    if bundle.analytic is None or const is None:
        return None
    try:
        quad = analytic2d.action_variables_quadrature(bundle.analytic, const)
        closed = analytic2d.closed_form_actions(bundle.analytic, const)
    except (UnboundMotionError, RegimeError) as exc:
        return {"status": "unbound", "detail": str(exc)}
    devs = {}
    for name in ("J_r", "J_phi", "J_alpha", "J_beta", "J_x", "J_y", "J_eps", "J_sig"):
        qv, cv = getattr(quad, name), getattr(closed, name)
        if qv is not None:
            devs[name] = abs(qv - cv) / max(abs(qv), 1e-30)
    return {"status": "ok", "rel_deviation": devs}


def _run_report(record: TrajectoryRecord, bundle: ScenarioBundle) -> dict:
    drifts = {"energy": record.relative_drift(record.energies())}
    for name in record.samples[0].observables:
        drifts[name] = record.relative_drift(record.series(name))
    return {
        "name": bundle.name,
        "exit_status": 0,
        "step_count": record.step_count,
        "sample_count": len(record.samples),
        "drifts": drifts,
        "constraint_residual_max": float(np.max(record.constraint_residuals())),
        "oracle": _oracle_block(bundle),
        "wall_time": record.wall_time,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }


def _simulate_one(cfg_path: str, out_dir: Path, dry_run: bool) -> dict:
    cfg = _load_config(cfg_path)
    bundle = build_bundle(cfg)
    if dry_run:
        print(f"# dry run: {bundle.name}")
        from .config import render_config

        print(render_config(cfg), end="")
        return {"name": bundle.name, "exit_status": 0, "dry_run": True}

    observables = build_observables(cfg.get("observables"), bundle)
    record = run(
        bundle.initial,
        bundle.model,
        bundle.inertia,
        bundle.integrator,
        potential=bundle.potential,
        extra_forces=bundle.extra_forces,
        observables=observables,
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / f"{bundle.name}.csv", record, bundle)
    report = _run_report(record, bundle)
    (out_dir / f"{bundle.name}.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n"
    )
    return report


def cmd_simulate(args) -> int:
    out_dir = Path(args.out)
    jobs = list(args.config)
    if args.threads > 1 and len(jobs) > 1 and not args.dry_run:
        with concurrent.futures.ThreadPoolExecutor(max_workers=args.threads) as pool:
            reports = list(pool.map(lambda c: _simulate_one(c, out_dir, False), jobs))
    else:
        reports = [_simulate_one(c, out_dir, args.dry_run) for c in jobs]
    for rep in reports:
        if not rep.get("dry_run"):
            print(
                f"{rep['name']}: {rep['step_count']} steps, "
                f"energy drift {rep['drifts']['energy']:.3e}, "
                f"constraint residual max {rep['constraint_residual_max']:.3e}"
            )
    return 0


def cmd_actions(args) -> int:
    cfg = _load_config(args.config[0])
    bundle = build_bundle(cfg)
    scn = bundle.analytic
    if scn is None:
        print("actions: the config does not describe an integrable 2D scenario", file=sys.stderr)
        return 1
    const = bundle.separation_constants()
    if const is None:
        print("actions: no separation constants (E, Cx, Cy, l, Calpha, Cbeta) given", file=sys.stderr)
        return 1

    rows = []
    warnings = []
    try:
        quadrature = analytic2d.action_variables_quadrature(scn, const)
        closed = analytic2d.closed_form_actions(scn, const)
        for name in ("J_r", "J_phi", "J_alpha", "J_beta", "J_x", "J_y", "J_eps", "J_sig"):
            qv = getattr(quadrature, name)
            cv = getattr(closed, name)
            if qv is None and cv is None:
                continue
            scale = max(abs(qv), 1e-30)
            rows.append(
                {
                    "action": name,
                    "quadrature": qv,
                    "closed_form": cv,
                    "rel_deviation": abs(qv - cv) / scale,
                }
            )
    except (UnboundMotionError, RegimeError) as exc:
        warnings.append(str(exc))
        rows.append({"action": "all", "status": "unbound", "detail": str(exc)})

    table = {"name": bundle.name, "rows": rows, "warnings": warnings}
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out = out_dir / f"{bundle.name}_actions.json"
    out.write_text(json.dumps(table, indent=2, sort_keys=True) + "\n")
    for row in rows:
        if "rel_deviation" in row:
            print(
                f"{row['action']}: quadrature {row['quadrature']:.12g}  "
                f"closed {row['closed_form']:.12g}  rel {row['rel_deviation']:.2e}"
            )
        else:
            print(f"{row['action']}: {row['status']} ({row['detail']})")
    return 0


def cmd_verify(args) -> int:
    if args.config:
        cfg = _load_config(args.config[0])
        bundle = build_bundle(cfg)
        model, frame = bundle.model, bundle.frame
    else:
        model = make_manifold("sphere", radius=1.0)
        frame = polar_orthonormal_frame(model)
    rows = run_suites(
        model, frame, seed=args.seed, flip_curvature_sign=args.flip_curvature_sign
    )
    failed = 0
    for name, ok, residual, note in rows:
        status = "pass" if ok else "FAIL"
        extra = f"  ({note})" if note else ""
        print(f"[{status}] {name}: worst residual {residual:.3e}{extra}")
        failed += 0 if ok else 1
    if failed:
        print(f"{failed} invariant famil{'y' if failed == 1 else 'ies'} failed")
        return 3
    return 0


def cmd_list_scenarios(args) -> int:
    for name, path in shipped_scenarios().items():
        cfg = parse_config(path.read_text())
        print(f"{name}: manifold={cfg.get('manifold')}, potential={cfg.get('potential')}, "
              f"constraint={cfg.get('constraint')}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="affinebody",
        description="Simulate rigid and affinely-rigid micro-bodies on curved surfaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="integrate scenarios and write CSV + JSON")
    p_sim.add_argument("--config", action="append", required=True)
    p_sim.add_argument("--out", default="out")
    p_sim.add_argument("--dry-run", action="store_true")
    p_sim.add_argument("--threads", type=int, default=1)
    p_sim.set_defaults(fn=cmd_simulate)

    p_act = sub.add_parser("actions", help="action variables: quadrature vs closed forms")
    p_act.add_argument("--config", action="append", required=True)
    p_act.add_argument("--out", default="out")
    p_act.set_defaults(fn=cmd_actions)

    p_ver = sub.add_parser("verify", help="run the invariant suites")
    p_ver.add_argument("--config", action="append", default=None)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--flip-curvature-sign", action="store_true")
    p_ver.set_defaults(fn=cmd_verify)

    p_ls = sub.add_parser("list-scenarios", help="list the shipped scenario corpus")
    p_ls.set_defaults(fn=cmd_list_scenarios)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, ValidationError) as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return 1
    except StepFailure as exc:
        print(f"runtime failure at t = {exc.t}: {exc}", file=sys.stderr)
        return 2
    except AffineBodyError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
