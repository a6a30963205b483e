"""Command line front end: ``wavestab profile|stability|scan``.

Every command reads one config file (YAML, or JSON which is a YAML subset),
writes into ``--out`` and exits with 0 on success, 2 on a configuration error
and 3 on a numerical failure.  Failures also leave ``error.json`` behind.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import jsonschema
import numpy as np
import yaml

from . import asymptotics as asy
from . import modulation as mod
from .action import action_hessian
from .errors import ConfigurationError, NoDualPoint, WavestabError
from .model import ModelSpec, make_model
from .profile import WaveParams, large_period_epsilon, solve_profile, wave_averages
from .spectral import count_unstable, evans_batch

__all__ = [
    "main",
    "load_config",
    "build_model",
    "build_wave",
    "stability_report",
    "scan_rows",
    "SCAN_COLUMNS",
    "dumps",
]

DEFAULT_NUMERICS = {
    "n_points": 256,
    "hessian_method": "auto",
    "fd_step": None,
    "fd_rel_step": 1e-4,
    "noise_tol": 1e-2,
    "evans_rtol": 1e-11,
    "lambda_ceiling": 500.0,
    "directions": 720,
    "transverse_tol": 1e-7,
    "evans": None,
    "evans_scan": None,
}

DEFAULT_OUTPUTS = {
    "profile_csv": "profile.csv",
    "summary_json": "profile.json",
    "report_json": "report.json",
    "evans_csv": "evans_scan.csv",
    "scan_csv": "scan.csv",
}

SCAN_COLUMNS = [
    "index", "axis", "value",
    "mu_x", "c_x", "omega_phi", "mu_phi",
    "rho0", "k_phi", "epsilon",
    "X_x", "k_x",
    "det_sign", "negative_signature",
    "coperiodic", "sideband", "transverse_xi0", "transverse_full",
    "delta_hyp", "delta_BF", "a0", "X0", "vk_index",
    "error",
]


# ---------------------------------------------------------------------------
# Serialization


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float at 17 significant digits; non-finite floats become null."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(k)}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        if isinstance(o, bool) or o is None:
            return json.dumps(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return _fmt(o) if math.isfinite(o) else "null"
        return json.dumps(o)

    return enc(_plain(obj), 0) + "\n"


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _fmt(v) if math.isfinite(v) else "nan"
    return str(v)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_csv_cell(v) for v in r])


# ---------------------------------------------------------------------------
# Config


def _schema(name: str) -> dict:
    text = resources.files("wavestab").joinpath("schemas", name).read_text(encoding="utf-8")
    return json.loads(text)


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads exponent floats without a dot, such as ``1e-4``."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(
        r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
        |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
        |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
        |[-+]?\.(?:inf|Inf|INF)
        |\.(?:nan|NaN|NAN))$""",
        re.X,
    ),
    list("-+0123456789."),
)


def load_config(path) -> dict:
    """Read and validate a config; raise :class:`ConfigurationError` on any problem."""
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = yaml.load(fh, Loader=_Loader)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc}", path=str(path)) from exc
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"config is not valid YAML/JSON: {exc}", path=str(path)) from exc
    try:
        jsonschema.validate(cfg, _schema("config.schema.json"))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path)
        raise ConfigurationError(f"config invalid at '{where}': {exc.message}") from exc
    return cfg


def build_model(section: dict) -> ModelSpec:
    return make_model(
        section["kappa"],
        section["W"],
        section.get("kappa_transverse"),
        section.get("alpha_max", 10.0),
    )


def build_wave(model: ModelSpec, wave: dict):
    """``(params, seed, regime)``; ``regime`` is ``None`` for explicit parameters.

    On the harmonic side ``mu_x = mu_x0 + epsilon^2``; on the solitary side
    ``epsilon`` is the relative gap between the dual root and the well.
    """
    seed = tuple(wave["seed"]) if wave.get("seed") is not None else None
    if "params" in wave:
        p = wave["params"]
        params = WaveParams(p["mu_x"], p["c_x"], p["omega_phi"], p["mu_phi"])
        params.validate(model)
        return params, seed, None
    r = dict(wave["regime"])
    if r["side"] == "harmonic":
        params = asy.harmonic_wave_params(model, r["c_x"], r["rho0"], r["k_phi"], r["epsilon"] ** 2)
        if seed is None:
            seed = (r["rho0"], r["rho0"])
    else:
        params = asy.large_period_wave_params(model, r["c_x"], r["rho0"], r["k_phi"], r["epsilon"])
        if seed is None:
            sol = asy.solitary_action(model, r["c_x"], r["rho0"], r["k_phi"])
            seed = tuple(sorted((r["rho0"], sol.rho_s)))
    return params, seed, r


def _numerics(cfg: dict) -> dict:
    out = dict(DEFAULT_NUMERICS)
    out.update(cfg.get("numerics") or {})
    return out


def _outputs(cfg: dict) -> dict:
    out = dict(DEFAULT_OUTPUTS)
    out.update(cfg.get("outputs") or {})
    return out


# ---------------------------------------------------------------------------
# Reports


def _regime_section(model: ModelSpec, regime: dict) -> dict:
    c, rho0, k = regime["c_x"], regime["rho0"], regime["k_phi"]
    sec: dict[str, Any] = {"side": regime["side"], "epsilon": regime["epsilon"]}
    sec["constant_state"] = asy.constant_state_check(model, rho0, k)
    if regime["side"] == "harmonic":
        hp = asy.harmonic_point(model, c, rho0, k)
        sec.update(
            mu_x0=hp.mu_x0, omega_phi0=hp.omega_phi0, mu_phi0=hp.mu_phi0,
            X0=hp.X0, delta_hyp=hp.delta_hyp, delta_BF=hp.delta_BF, a0=hp.a0,
        )
    else:
        sol = asy.solitary_action(model, c, rho0, k)
        sec.update(
            rho_s=sol.rho_s, theta_s=sol.theta_s,
            vk_index=asy.vk_index(model, c, rho0, k),
            delta_hyp=asy.delta_hyp(model, rho0, k),
            delta_BF=asy.delta_BF(model, c, rho0, k),
            a0=asy.a0_index(model, c, rho0, k),
        )
    return sec


def _evans_section(model, profile, spec: dict, num: dict) -> dict:
    rect = spec.get("rect", [1e-4, 1.0, -1.0, 1.0])
    lo, hi = complex(rect[0], rect[2]), complex(rect[1], rect[3])
    entries = []
    verdict = mod.NO_INSTABILITY
    for xi in spec.get("xi", [0.05]):
        for eta_sq in spec.get("eta_sq", [0.0]):
            entry = {"xi": float(xi), "eta_sq": float(eta_sq)}
            try:
                n = count_unstable(
                    model, profile, xi, eta_sq, (lo, hi), n_side=spec.get("n_side", 24),
                    rtol=num["evans_rtol"], lam_ceiling=num["lambda_ceiling"],
                )
                entry["count"] = int(n)
                if n > 0:
                    verdict = mod.UNSTABLE
            except WavestabError as exc:
                entry["error"] = exc.to_dict()
                if verdict != mod.UNSTABLE:
                    verdict = mod.INCONCLUSIVE
            entries.append(entry)
    return {"rect": list(rect), "counts": entries, "verdict": verdict}


def stability_report(model: ModelSpec, params: WaveParams, numerics: Optional[dict] = None,
                     seed=None, regime: Optional[dict] = None, profile=None) -> dict:
    """Run profile, action, modulation and every criterion; return the report mapping."""
    num = dict(DEFAULT_NUMERICS)
    num.update(numerics or {})
    if profile is None:
        profile = solve_profile(model, params, n_points=num["n_points"], seed=seed)
    av = wave_averages(model, profile)
    ad = action_hessian(
        model, params, step=num["fd_step"], seed=seed, rel_step=num["fd_rel_step"],
        noise_tol=num["noise_tol"], method=num["hessian_method"],
    )
    data = mod.assemble(ad.hess, av, profile.k_x, params.c_x)
    try:
        eps = large_period_epsilon(model, params, seed)
    except NoDualPoint:
        eps = None
    report: dict[str, Any] = {
        "params": {"mu_x": params.mu_x, "c_x": params.c_x, "omega_phi": params.omega_phi, "mu_phi": params.mu_phi},
        "profile": {
            "X_x": profile.X_x, "k_x": profile.k_x, "xi_phi": profile.xi_phi, "k_phi": profile.k_phi,
            "rho_min": profile.rho_min, "rho_max": profile.rho_max, "large_period_epsilon": eps,
        },
        "action": {
            "theta": ad.theta, "grad": ad.grad, "hess": ad.hess, "method": ad.method,
            "fd_step": ad.fd_step, "max_est_error": float(np.max(ad.est_error)), "asymmetry": ad.asymmetry,
        },
        "modulation": {
            "delta": [{"m": m, "n": n, "p": p, "value": v} for (m, n, p), v in sorted(data.delta.items())],
            "low_order_residual": data.low_order_residual,
            "Sigma_t": data.Sigma_t, "Sigma_y": data.Sigma_y,
            "sigma": [av.sigma1, av.sigma2, av.sigma3],
        },
    }
    report["coperiodic"] = mod.coperiodic_criterion(ad.hess)
    speeds, hyper, lab = mod.characteristic_speeds(ad.hess, profile.k_x, params.c_x)
    report["sideband"] = {
        "char_speeds": speeds, "lab_frame_speeds": lab, "weakly_hyperbolic": hyper,
        "verdict": mod.NO_INSTABILITY if hyper else mod.UNSTABLE,
    }
    report.update(mod.transverse_criteria(data, n_directions=num["directions"], tol_rel=num["transverse_tol"]))
    report["splitting"] = mod.splitting_criteria(data)
    if num.get("evans"):
        ev = _evans_section(model, profile, num["evans"], num)
        report["evans"] = ev
        if ev["verdict"] == mod.UNSTABLE:
            report["sideband"]["verdict"] = mod.UNSTABLE
    if regime is not None:
        report["regime"] = _regime_section(model, regime)
    return report


# ---------------------------------------------------------------------------
# Scan


def _scan_values(spec: dict) -> list[float]:
    if "values" in spec:
        vals = [float(v) for v in spec["values"]]
    else:
        n = int(spec["num"])
        if spec.get("spacing", "linear") == "log":
            vals = np.geomspace(spec["start"], spec["stop"], n).tolist()
        else:
            vals = np.linspace(spec["start"], spec["stop"], n).tolist()
    if not vals:
        raise ConfigurationError("scan grid is empty")
    return vals


_REGIME_AXES = ("epsilon", "c_x", "rho0", "k_phi")
_PARAM_AXES = ("mu_x", "c_x", "omega_phi", "mu_phi")


def _scan_point(model, wave: dict, num: dict, axis: str, index: int, value: float) -> list:
    row: dict[str, Any] = {"index": index, "axis": axis, "value": value}
    try:
        w = json.loads(json.dumps(wave))
        if "params" in w:
            if axis not in _PARAM_AXES:
                raise ConfigurationError(f"axis {axis!r} needs explicit params")
            w["params"][axis] = value
        else:
            if axis not in _REGIME_AXES:
                raise ConfigurationError(f"axis {axis!r} needs a regime wave")
            w["regime"][axis] = value
        params, seed, regime = build_wave(model, w)
        row.update(mu_x=params.mu_x, c_x=params.c_x, omega_phi=params.omega_phi, mu_phi=params.mu_phi)
        if regime is not None:
            row.update(rho0=regime["rho0"], k_phi=regime["k_phi"], epsilon=regime["epsilon"])
        rep = stability_report(model, params, num, seed=seed, regime=regime)
        row.update(
            X_x=rep["profile"]["X_x"], k_x=rep["profile"]["k_x"],
            det_sign=rep["coperiodic"]["det_sign"],
            negative_signature=rep["coperiodic"]["negative_signature"],
            coperiodic=rep["coperiodic"]["verdict"], sideband=rep["sideband"]["verdict"],
            transverse_xi0=rep["transverse_xi0"]["verdict"], transverse_full=rep["transverse_full"]["verdict"],
        )
        if regime is not None:
            sec = rep["regime"]
            for key in ("delta_hyp", "delta_BF", "a0", "X0", "vk_index"):
                row[key] = sec.get(key)
    except (WavestabError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return [row.get(c) for c in SCAN_COLUMNS]


def scan_rows(cfg: dict, threads: int = 1) -> list[list]:
    """Rows of the scan CSV in grid order; per-point failures land in the ``error`` column."""
    if "scan" not in cfg:
        raise ConfigurationError("scan command needs a 'scan' section")
    model = build_model(cfg["model"])
    num = _numerics(cfg)
    num["evans"] = None
    axis = cfg["scan"]["axis"]
    values = _scan_values(cfg["scan"])
    wave = cfg["wave"]
    jobs = list(enumerate(values))
    if threads <= 1:
        return [_scan_point(model, wave, num, axis, i, v) for i, v in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda j: _scan_point(model, wave, num, axis, *j), jobs))


# ---------------------------------------------------------------------------
# Commands


def _stamp(doc: dict, no_timestamp: bool) -> dict:
    if not no_timestamp:
        doc["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return doc


def cmd_profile(cfg: dict, out: Path, no_timestamp: bool = False) -> None:
    model = build_model(cfg["model"])
    num = _numerics(cfg)
    outs = _outputs(cfg)
    params, seed, regime = build_wave(model, cfg["wave"])
    prof = solve_profile(model, params, n_points=num["n_points"], seed=seed)
    av = wave_averages(model, prof)
    rows = zip(prof.x_grid, prof.rho, prof.v, prof.theta, prof.V[:, 0], prof.V[:, 1])
    _write_csv(out / outs["profile_csv"], ["x", "rho", "v", "theta", "V1", "V2"], rows)
    summary = {
        "params": {"mu_x": params.mu_x, "c_x": params.c_x, "omega_phi": params.omega_phi, "mu_phi": params.mu_phi},
        "X_x": prof.X_x, "xi_phi": prof.xi_phi, "k_x": prof.k_x, "k_phi": prof.k_phi,
        "rho_min": prof.rho_min, "rho_max": prof.rho_max,
        "averages": {k: getattr(av, k) for k in ("m_bar", "q_bar", "sigma1", "sigma2", "sigma3", "tau0", "tau1", "tau2", "tau3")},
    }
    (out / outs["summary_json"]).write_text(dumps(_stamp(summary, no_timestamp)), encoding="utf-8")


def cmd_stability(cfg: dict, out: Path, no_timestamp: bool = False) -> None:
    model = build_model(cfg["model"])
    num = _numerics(cfg)
    outs = _outputs(cfg)
    params, seed, regime = build_wave(model, cfg["wave"])
    prof = solve_profile(model, params, n_points=num["n_points"], seed=seed)
    report = stability_report(model, params, num, seed=seed, regime=regime, profile=prof)
    (out / outs["report_json"]).write_text(dumps(_stamp(report, no_timestamp)), encoding="utf-8")
    scan = num.get("evans_scan")
    if scan:
        lams = np.array([complex(a, b) for a in scan["lambda_re"] for b in scan.get("lambda_im", [0.0])])
        D = evans_batch(
            model, prof, scan.get("xi", 0.0), lams, scan.get("eta_sq", 0.0),
            rtol=num["evans_rtol"], lam_ceiling=num["lambda_ceiling"],
        )
        xi, eta_sq = float(scan.get("xi", 0.0)), float(scan.get("eta_sq", 0.0))
        rows = ((xi, eta_sq, l.real, l.imag, d.real, d.imag) for l, d in zip(lams, D))
        _write_csv(out / outs["evans_csv"], ["xi", "eta_sq", "re_lambda", "im_lambda", "re_D", "im_D"], rows)


def cmd_scan(cfg: dict, out: Path, threads: int = 1) -> None:
    outs = _outputs(cfg)
    rows = scan_rows(cfg, threads)
    _write_csv(out / outs["scan_csv"], SCAN_COLUMNS, rows)


def _threads(arg: Optional[int]) -> int:
    if arg is not None:
        n = arg
    else:
        env = os.environ.get("WAVESTAB_THREADS", "").strip()
        try:
            n = int(env) if env else 1
        except ValueError as exc:
            raise ConfigurationError("WAVESTAB_THREADS must be an integer", value=env) from exc
    if n < 1:
        raise ConfigurationError("thread count must be at least 1", threads=n)
    return n


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wavestab", description="Stability of periodic waves of quasilinear Schrodinger equations.")
    p.add_argument("command", choices=["profile", "stability", "scan"])
    p.add_argument("--config", required=True, help="YAML or JSON config file")
    p.add_argument("--out", required=True, help="output directory (created if missing)")
    p.add_argument("--threads", type=int, default=None, help="scan workers (default: $WAVESTAB_THREADS or 1)")
    p.add_argument("--no-timestamp", action="store_true", help="omit generated_at from JSON outputs")
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = _parser().parse_args(argv)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(dumps({"error": "ConfigurationError", "message": str(exc), "details": {}}), file=sys.stderr, end="")
        return 2
    try:
        threads = _threads(args.threads)
        cfg = load_config(args.config)
        if args.command == "profile":
            cmd_profile(cfg, out, args.no_timestamp)
        elif args.command == "stability":
            cmd_stability(cfg, out, args.no_timestamp)
        else:
            cmd_scan(cfg, out, threads)
    except WavestabError as exc:
        doc = exc.to_dict()
        (out / "error.json").write_text(dumps(doc), encoding="utf-8")
        print(dumps(doc), file=sys.stderr, end="")
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
