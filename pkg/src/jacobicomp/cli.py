"""Configuration-driven experiment runner.

A config is a JSON document::

    {"experiment": "focal",
     "params": {"k": 1.0, "lambda": 0.0, "l": 2.0, "steps": 4096},
     "output": null, "format": "csv", "seed": 0}

Only ``experiment`` and ``params`` are required. The per-experiment keys are
listed in ``SCHEMAS`` and documented in ``docs/config.md``.

Exit codes: 0 every asserted inequality holds, 1 a violation was found,
2 a hypothesis is not met, 3 input or I/O error.
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from .applications import (QuadInstance, VolumeModel, corollary_c_speed,
                           corollary_e_solve_rtilde, corollary_e_verify, leg_threshold,
                           quad_compare)
from .comparison import (monotonicity_check, rauch3_verify, rigidity_diagnostics,
                         thm_d_verify)
from .curvature import (CurvatureProfile, DomainError, WarpingFunction, build_cap_extension)
from .indexform import (PiecewiseField, boundary_identity_residual, index_form,
                        jacobi_through_endpoint, minimize_index)
from .jacobi import (DivergenceError, FocalPointError, InitialOperator, first_focal_point,
                     integrate_jacobi)
from .sampling import (cor_c_data, make_rng, random_admissible_field,
                       random_diagonal_profile, random_rotating_profile)

__all__ = ["ConfigError", "ExperimentConfig", "Outcome", "parse_config", "run_experiment",
           "write_outputs", "main", "EXPERIMENTS", "HEADERS"]

EXIT_OK, EXIT_VIOLATION, EXIT_HYPOTHESIS, EXIT_INPUT = 0, 1, 2, 3

EXPERIMENTS = ("focal", "index", "lemma-a", "rauch3", "thm-d", "ratio", "quad", "cor-c", "cor-e")

HEADERS = {
    "focal": ("quantity", "value"),
    "index": ("quantity", "value"),
    "lemma-a": ("trial", "index_W", "min_value", "gap"),
    "rauch3": ("t", "norm_V", "norm_V0", "ratio", "margin"),
    "thm-d": ("t", "det_A", "det_model", "ratio"),
    "ratio": ("t", "ratio", "slope"),
    "quad": ("pr", "qs", "rs_flat", "rs_sphere", "margin"),
    "cor-c": ("index", "speed_M", "speed_M0", "margin"),
    "cor-e": ("R", "area_M", "area_model", "annulus_M", "annulus_model"),
}


class ConfigError(ValueError):
    """Schema violations; each message starts with the offending key."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class _Bad(Exception):
    pass


# -- value checkers ---------------------------------------------------------


def _number(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise _Bad(f"expected a number, got {type(v).__name__}")
    if not math.isfinite(v):
        raise _Bad("expected a finite number")
    return float(v)


def _integer(v):
    if isinstance(v, bool) or not isinstance(v, int):
        if isinstance(v, float) and v.is_integer():
            return int(v)
        raise _Bad(f"expected an integer, got {type(v).__name__}")
    return int(v)


def _positive(v):
    v = _number(v)
    if v <= 0:
        raise _Bad("must be positive")
    return v


def _steps(v):
    v = _integer(v)
    if v < 2 or v % 2:
        raise _Bad("must be an even integer >= 2")
    return v


def _boolean(v):
    if not isinstance(v, bool):
        raise _Bad(f"expected true or false, got {type(v).__name__}")
    return v


def _vector(v):
    if isinstance(v, list):
        if not v:
            raise _Bad("expected a nonempty list of numbers")
        return [_number(x) for x in v]
    return _number(v)


def _numbers(v):
    if not isinstance(v, list) or not v:
        raise _Bad("expected a nonempty list of numbers")
    return [_number(x) for x in v]


def _matrix(v):
    if isinstance(v, list) and v and all(isinstance(r, list) for r in v):
        rows = [[_number(x) for x in r] for r in v]
        if any(len(r) != len(rows) for r in rows):
            raise _Bad("expected a square matrix")
        return rows
    raise _Bad("expected a square matrix (list of rows)")


def _sinusoid(v):
    """A number, or ``{"c", "a", "w", "phi"}`` meaning ``c + a sin(w t + phi)``."""
    if isinstance(v, dict):
        unknown = set(v) - {"c", "a", "w", "phi"}
        if unknown:
            raise _Bad(f"unknown sinusoid key {sorted(unknown)[0]!r}")
        if "c" not in v:
            raise _Bad("sinusoid needs 'c'")
        return {"c": _number(v["c"]), "a": _number(v.get("a", 0.0)),
                "w": _number(v.get("w", 1.0)), "phi": _number(v.get("phi", 0.0))}
    return _number(v)


def _profile(v):
    if not isinstance(v, dict):
        raise _Bad("expected a profile object with a 'kind'")
    kind = v.get("kind")
    spec = {
        "constant": {"k": (_number, True, None), "n": (_integer, False, 2)},
        "diagonal": {"entries": (None, True, None)},
        "random": {"n": (_integer, True, None), "lo": (_number, True, None),
                   "hi": (_number, True, None), "rotating": (_boolean, False, False),
                   "stream": (_integer, False, 0)},
    }
    if kind not in spec:
        raise _Bad(f"kind must be one of {sorted(spec)}, got {kind!r}")
    out = {"kind": kind}
    for key in v:
        if key != "kind" and key not in spec[kind]:
            raise _Bad(f"unknown key {key!r} for a {kind} profile")
    for key, (check, required, default) in spec[kind].items():
        if key not in v:
            if required:
                raise _Bad(f"missing {key!r}")
            out[key] = default
            continue
        if key == "entries":
            if not isinstance(v[key], list) or not v[key]:
                raise _Bad("'entries' must be a nonempty list")
            out[key] = [_sinusoid(e) for e in v[key]]
        else:
            out[key] = check(v[key])
    if out.get("n") is not None and out["n"] < 2:
        raise _Bad("'n' must be at least 2")
    if kind == "random" and not out["lo"] < out["hi"]:
        raise _Bad("need lo < hi")
    return out


# -- schemas ----------------------------------------------------------------


@dataclass(frozen=True)
class Field:
    check: Callable
    required: bool = False
    default: Any = None


REQ = True


def _common(**extra):
    base = {"l": Field(_positive, REQ), "steps": Field(_steps, False, 4096)}
    base.update(extra)
    return base


_PROFILE_KEYS = {
    "k": Field(_number), "profile": Field(_profile), "n": Field(_integer, False, 2),
    "lambda": Field(_number), "B": Field(_matrix),
}

SCHEMAS = {
    "focal": (_common(**_PROFILE_KEYS), [("k", "profile"), ("lambda", "B")]),
    "index": (_common(**_PROFILE_KEYS, w=Field(_vector, False, 1.0), tol=Field(_positive, False, 1e-7)),
              [("k", "profile"), ("lambda", "B")]),
    "lemma-a": (_common(**_PROFILE_KEYS, w=Field(_vector, False, 1.0),
                        n_nodes=Field(_integer, False, 257), trials=Field(_integer, False, 20),
                        scale=Field(_positive, False, 1.0), tol=Field(_positive, False, 1e-9),
                        identity_tol=Field(_positive, False, 1e-7)),
                [("k", "profile"), ("lambda", "B")]),
    "rauch3": (_common(**_PROFILE_KEYS, k_model=Field(_number), profile_model=Field(_profile),
                       lambda_model=Field(_number), B_model=Field(_matrix),
                       vhat0=Field(_vector, False, 1.0), vhat0_model=Field(_vector, False, 1.0),
                       a=Field(_number, False, 0.0), b=Field(_number, False, 0.0),
                       t0=Field(_positive), tol=Field(_positive, False, 1e-7)),
               [("k", "profile"), ("k_model", "profile_model"), ("lambda", "B"),
                ("lambda_model", "B_model")]),
    "thm-d": (_common(profile=Field(_profile, REQ), k=Field(_number, REQ),
                      **{"lambda": Field(_number, False, 0.0),
                         "lambda_tilde": Field(_number, False, 0.0)},
                      init_wedge=Field(_positive, False, 1.0),
                      init_wedge_tilde=Field(_positive, False, 1.0),
                      tol=Field(_positive, False, 1e-7)), []),
    "ratio": (_common(profile=Field(_profile, REQ), k=Field(_number, REQ),
                      **{"lambda": Field(_number, False, 0.0),
                         "lambda_tilde": Field(_number, False, 0.0)},
                      tol=Field(_positive, False, 1e-6)), []),
    "quad": ({"pq": Field(_positive, REQ), "angle_rpq": Field(_positive, False, math.pi / 2),
              "angle_pqs": Field(_positive, False, math.pi / 2),
              "legs_pr": Field(_numbers, REQ), "legs_qs": Field(_numbers),
              "assert_max_leg": Field(_number, False, 0.5), "tol": Field(_positive, False, 1e-10)},
             []),
    "cor-c": ({"kM": Field(_number, REQ), "kM0": Field(_number, REQ), "f": Field(_number),
               "fprime": Field(_number, False, 0.0), "lambda": Field(_number, False, 0.0),
               "E_norm": Field(_positive, False, 1.0), "E_dot_gamma": Field(_number, False, 0.0),
               "count": Field(_integer), "tol": Field(_positive, False, 1e-9)},
              [("f", "count")]),
    "cor-e": ({"n": Field(_integer, False, 2), "k": Field(_number, REQ),
               "k_prime": Field(_number, REQ), "r": Field(_positive, REQ),
               "tail": Field(_sinusoid), "rho_max": Field(_positive, REQ),
               "R_grid": Field(_numbers, REQ), "relaxed": Field(_boolean, False, False),
               "r_tilde": Field(_positive), "steps": Field(_steps, False, 4096),
               "tol": Field(_positive, False, 1e-8)}, []),
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    params: dict = field(default_factory=dict)
    output: Optional[str] = None
    format: str = "csv"
    seed: int = 0

    def to_dict(self):
        return {"experiment": self.experiment, "params": self.params, "output": self.output,
                "format": self.format, "seed": self.seed}


def _validate_params(experiment, params):
    fields, groups = SCHEMAS[experiment]
    errors, out = [], {}
    if not isinstance(params, dict):
        return None, ["params: expected an object"]
    for key in params:
        if key not in fields:
            errors.append(f"params.{key}: unknown key for experiment {experiment!r}")
    for key, spec in fields.items():
        if key not in params or params[key] is None:
            if spec.required:
                errors.append(f"params.{key}: missing required key")
            out[key] = spec.default
            continue
        try:
            out[key] = spec.check(params[key])
        except _Bad as exc:
            errors.append(f"params.{key}: {exc}")
    for group in groups:
        given = [g for g in group if params.get(g) is not None]
        if not given:
            alt = " or ".join(f"params.{g}" for g in group[1:])
            errors.append(f"params.{group[0]}: missing required key (alternatively {alt})")
        elif len(given) > 1:
            errors.append(f"params.{given[1]}: conflicts with params.{given[0]}")
    return out, errors


def parse_config(text) -> ExperimentConfig:
    """Validate a JSON config document; raise :class:`ConfigError` listing every problem."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config: not valid JSON ({exc})"]) from None
    if not isinstance(doc, dict):
        raise ConfigError(["config: expected a JSON object"])
    errors = []
    for key in doc:
        if key not in ("experiment", "params", "output", "format", "seed"):
            errors.append(f"{key}: unknown top-level key")
    exp = doc.get("experiment")
    if exp is None:
        raise ConfigError(errors + ["experiment: missing required key"])
    if exp not in EXPERIMENTS:
        raise ConfigError(errors + [f"experiment: unknown experiment {exp!r} "
                                    f"(expected one of {', '.join(EXPERIMENTS)})"])
    params, perr = _validate_params(exp, doc.get("params", {}))
    errors += perr
    output = doc.get("output")
    if output is not None and not isinstance(output, str):
        errors.append("output: expected a path string or null")
    fmt = doc.get("format", "csv")
    if fmt not in ("csv", "json"):
        errors.append(f"format: expected 'csv' or 'json', got {fmt!r}")
    seed = doc.get("seed", 0)
    try:
        seed = _integer(seed)
        if seed < 0:
            raise _Bad("must be nonnegative")
    except _Bad as exc:
        errors.append(f"seed: {exc}")
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(exp, params, output, fmt, seed)


# -- builders ---------------------------------------------------------------


def _sinusoid_fn(spec):
    if isinstance(spec, dict):
        c, a, w, phi = spec["c"], spec["a"], spec["w"], spec["phi"]
        return lambda t: c + a * np.sin(w * np.asarray(t) + phi)
    return spec


def _build_profile(spec, l, seed):
    if spec["kind"] == "constant":
        return CurvatureProfile.constant(spec["k"], spec["n"], l)
    if spec["kind"] == "diagonal":
        return CurvatureProfile.diagonal([_sinusoid_fn(e) for e in spec["entries"]], l)
    rng = make_rng(seed, spec["stream"])
    make = random_rotating_profile if spec["rotating"] else random_diagonal_profile
    return make(rng, spec["n"], l, spec["lo"], spec["hi"])


def _side_profile(P, seed, k_key="k", profile_key="profile"):
    if P[profile_key] is not None:
        return _build_profile(P[profile_key], P["l"], seed)
    return CurvatureProfile.constant(P[k_key], P["n"], P["l"])


def _operator(P, dim, lam_key="lambda", B_key="B", name="params.B"):
    if P[B_key] is not None:
        B = InitialOperator(P[B_key])
        if B.dim != dim:
            raise ConfigError([f"{name}: dimension {B.dim} does not match the profile ({dim})"])
        return B
    return InitialOperator.from_scalar(P[lam_key], dim)


def _vec(v, dim, name):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.size == 1 and dim > 1:
        out = np.zeros(dim)
        out[0] = v[0]
        return out
    if v.shape != (dim,):
        raise ConfigError([f"{name}: expected {dim} components"])
    return v


# -- runners ----------------------------------------------------------------


@dataclass
class Outcome:
    code: int
    header: tuple
    rows: list
    summary: dict


def _hypothesis_failed(header, summary, failed):
    summary.update({"status": "hypothesis_failed", "failed_checks": list(failed)})
    return Outcome(EXIT_HYPOTHESIS, header, [], summary)


def _verdict(ok):
    return (EXIT_OK, "ok") if ok else (EXIT_VIOLATION, "violation")


def _run_focal(cfg):
    P = cfg.params
    p = _side_profile(P, cfg.seed)
    B = _operator(P, p.dim)
    res = first_focal_point(p, B, P["steps"])
    wr = integrate_jacobi(p, B, P["steps"]).wronskian_defect()
    bracket = res.bracket or (None, None)
    rows = [("t_star", res.t_star), ("bracket_lo", bracket[0]), ("bracket_hi", bracket[1])]
    code, status = _verdict(wr <= 1e-8)
    summary = {"status": status, "t_star": res.t_star, "bracket": list(bracket),
               "warning": res.warning, "wronskian_defect": wr}
    return Outcome(code, HEADERS["focal"], rows, summary)


def _run_index(cfg):
    P = cfg.params
    p = _side_profile(P, cfg.seed)
    B = _operator(P, p.dim)
    w = _vec(P["w"], p.dim, "params.w")
    header = HEADERS["index"]
    try:
        V = jacobi_through_endpoint(p, B, w, P["steps"])
    except FocalPointError as exc:
        return _hypothesis_failed(header, {"focal_point": exc.t_star}, ["no_focal_point"])
    rep = index_form(p, B, V)
    pairing = float(V.derivs[-1] @ V.values[-1])
    resid = abs(rep.total - pairing)
    rows = [("total", rep.total), ("boundary_term", rep.boundary_term),
            ("integral_term", rep.integral_term), ("endpoint_pairing", pairing),
            ("identity_residual", resid)]
    code, status = _verdict(resid <= P["tol"])
    summary = {"status": status, "index_value": rep.total, "endpoint_pairing": pairing,
               "identity_residual": resid}
    return Outcome(code, header, rows, summary)


def _run_lemma_a(cfg):
    P = cfg.params
    p = _side_profile(P, cfg.seed)
    B = _operator(P, p.dim)
    w = _vec(P["w"], p.dim, "params.w")
    header = HEADERS["lemma-a"]
    n_nodes = P["n_nodes"]
    if n_nodes < 3 or (n_nodes - 1) % 2:
        raise ConfigError(["params.n_nodes: must be odd and at least 3"])
    focal = first_focal_point(p, B, P["steps"])
    if focal.found:
        return _hypothesis_failed(header, {"focal_point": focal.t_star}, ["no_focal_point"])
    try:
        field_min, value = minimize_index(p, B, w, n_nodes)
    except FocalPointError:
        return _hypothesis_failed(header, {}, ["discrete_positive_definite"])
    N = n_nodes - 1
    steps = N * max(1, P["steps"] // N)
    steps += steps % 2
    V = jacobi_through_endpoint(p, B, w, steps, check_focal=False)
    stride = steps // N
    minimizer_error = float(np.max(np.abs(V.values[::stride] - field_min.values)))
    resid = boundary_identity_residual(p, B, w, P["steps"], check_focal=False)
    rows, gaps = [], []
    for i in range(P["trials"]):
        vals = random_admissible_field(make_rng(cfg.seed, i), field_min.t, w, P["scale"])
        iw = index_form(p, B, PiecewiseField(field_min.t, vals)).total
        gaps.append(iw - value)
        rows.append((i, iw, value, iw - value))
    worst = float(min(gaps)) if gaps else None
    ok = (worst is None or worst >= -P["tol"]) and resid <= P["identity_tol"]
    code, status = _verdict(ok)
    summary = {"status": status, "min_value": value,
               "jacobi_value": float(V.derivs[-1] @ V.values[-1]),
               "identity_residual": resid, "minimizer_error": minimizer_error,
               "worst_gap": worst, "trials": P["trials"]}
    return Outcome(code, header, rows, summary)


def _run_rauch3(cfg):
    P = cfg.params
    pM = _side_profile(P, cfg.seed)
    pM0 = _side_profile(P, cfg.seed, "k_model", "profile_model")
    B = _operator(P, pM.dim)
    B0 = _operator(P, pM0.dim, "lambda_model", "B_model", "params.B_model")
    v = _vec(P["vhat0"], pM.dim, "params.vhat0")
    v0 = _vec(P["vhat0_model"], pM0.dim, "params.vhat0_model")
    header = HEADERS["rauch3"]
    try:
        rep = rauch3_verify(pM, pM0, B, B0, v, v0, P["a"], P["b"], P["steps"], P["tol"])
    except FocalPointError as exc:
        return _hypothesis_failed(header, {"focal_point": exc.t_star}, ["model_no_focal_point"])
    summary = {"hypothesis": rep.hypothesis.to_dict(), "warnings": rep.warnings}
    if not rep.hypothesis.passed:
        return _hypothesis_failed(header, summary, rep.hypothesis.failed())
    slope = monotonicity_check(rep)
    t0 = P["t0"] if P["t0"] is not None else pM.l
    rig = rigidity_diagnostics(rep, min(t0, pM.l))
    rows = list(zip(rep.t, rep.lhs, rep.rhs, rep.ratio, rep.margin))
    code, status = _verdict(rep.min_margin >= -P["tol"] and slope >= -P["tol"])
    summary.update({"status": status, "min_margin": rep.min_margin, "worst_ratio_slope": slope,
                    "rigidity": rig.to_dict()})
    return Outcome(code, header, rows, summary)


def _thm_d_report(cfg):
    P = cfg.params
    p = _build_profile(P["profile"], P["l"], cfg.seed)
    return thm_d_verify(p, P["k"], P["lambda"], P["lambda_tilde"], P.get("init_wedge", 1.0),
                        P.get("init_wedge_tilde", 1.0), P["steps"], P["tol"])


def _run_thm_d(cfg):
    header = HEADERS["thm-d"]
    try:
        rep = _thm_d_report(cfg)
    except FocalPointError as exc:
        return _hypothesis_failed(header, {"focal_point": exc.t_star}, ["no_focal_point"])
    summary = {"hypothesis": rep.hypothesis.to_dict(), "warnings": rep.warnings}
    if not rep.hypothesis.passed:
        return _hypothesis_failed(header, summary, rep.hypothesis.failed())
    rows = list(zip(rep.t, rep.lhs, rep.rhs, rep.ratio))
    code, status = _verdict(rep.min_margin >= -cfg.params["tol"])
    summary.update({"status": status, "min_margin": rep.min_margin, "equality": rep.equality})
    return Outcome(code, header, rows, summary)


def _run_ratio(cfg):
    header = HEADERS["ratio"]
    try:
        rep = _thm_d_report(cfg)
    except FocalPointError as exc:
        return _hypothesis_failed(header, {"focal_point": exc.t_star}, ["no_focal_point"])
    summary = {"hypothesis": rep.hypothesis.to_dict(), "warnings": rep.warnings}
    if not rep.hypothesis.passed:
        return _hypothesis_failed(header, summary, rep.hypothesis.failed())
    slopes = np.append(np.diff(rep.ratio) / (rep.t[1] - rep.t[0]), np.nan)
    worst = float(np.nanmax(slopes))
    rows = list(zip(rep.t, rep.ratio, slopes))
    code, status = _verdict(worst <= cfg.params["tol"])
    summary.update({"status": status, "worst_slope": worst})
    return Outcome(code, header, rows, summary)


def _run_quad(cfg):
    P = cfg.params
    legs_pr = P["legs_pr"]
    legs_qs = P["legs_qs"] if P["legs_qs"] is not None else legs_pr
    rows, asserted = [], []
    try:
        for a in legs_pr:
            for b in legs_qs:
                res = quad_compare(QuadInstance(P["pq"], a, b, P["angle_rpq"], P["angle_pqs"]))
                rows.append((a, b, res.rs_flat, res.rs_sphere, res.margin))
                if max(a, b) <= P["assert_max_leg"]:
                    asserted.append(res.margin)
        threshold = leg_threshold(P["pq"], P["angle_rpq"], P["angle_pqs"], sorted(legs_pr))
    except ValueError as exc:
        raise ConfigError([f"params: {exc}"]) from None
    worst = float(min(asserted)) if asserted else None
    code, status = _verdict(worst is None or worst >= -P["tol"])
    summary = {"status": status, "min_margin": worst, "asserted_instances": len(asserted),
               "leg_threshold": threshold}
    return Outcome(code, HEADERS["quad"], rows, summary)


def _run_cor_c(cfg):
    P = cfg.params
    header = HEADERS["cor-c"]
    if P["kM"] > P["kM0"]:
        return _hypothesis_failed(header, {}, ["curvature_order"])
    if P["count"] is not None:
        data = [cor_c_data(make_rng(cfg.seed, i), P["kM0"]) for i in range(P["count"])]
    else:
        data = [(P["f"], P["fprime"], P["lambda"], P["E_norm"], P["E_dot_gamma"])]
    rows = []
    for i, d in enumerate(data):
        try:
            s, s0 = corollary_c_speed(P["kM"], P["kM0"], *d)
        except ValueError as exc:
            return _hypothesis_failed(header, {"message": str(exc), "index": i},
                                      ["corollary_c_preconditions"])
        rows.append((i, s, s0, s - s0))
    worst = float(min(r[3] for r in rows))
    code, status = _verdict(worst >= -P["tol"])
    return Outcome(code, header, rows, {"status": status, "min_margin": worst,
                                        "instances": len(rows)})


def _run_cor_e(cfg):
    P = cfg.params
    header = HEADERS["cor-e"]
    if P["tail"] is None:
        f = WarpingFunction.space_form(P["k_prime"], P["rho_max"], cap_radius=P["r"])
    else:
        f = build_cap_extension(P["k_prime"], P["r"], _sinusoid_fn(P["tail"]), P["rho_max"],
                                steps=P["steps"])
    try:
        model = VolumeModel.build(P["n"], f, P["k"], P["r_tilde"])
    except ValueError as exc:
        return _hypothesis_failed(header, {"message": str(exc)}, ["r_tilde_exists"])
    rep = corollary_e_verify(model, P["R_grid"], P["steps"], P["relaxed"], P["tol"])
    summary = {"hypothesis": rep.hypothesis.to_dict(), "warnings": rep.warnings,
               "r_tilde": model.r_tilde, "truncated_at": f.truncated_at}
    if P["r_tilde"] is None:
        summary["r_ge_r_tilde"] = corollary_e_solve_rtilde(P["k_prime"], P["r"], P["k"],
                                                           P["n"]).r_ge_r_tilde
    if not rep.hypothesis.passed:
        return _hypothesis_failed(header, summary, rep.hypothesis.failed())
    rows = list(zip(rep.R, rep.area_M, rep.area_model, rep.annulus_M, rep.annulus_model))
    worst = rep.min_margin if len(rep.R) else None
    code, status = _verdict(worst is None or worst >= -P["tol"])
    summary.update({"status": status, "min_margin": worst})
    return Outcome(code, header, rows, summary)


RUNNERS = {
    "focal": _run_focal, "index": _run_index, "lemma-a": _run_lemma_a, "rauch3": _run_rauch3,
    "thm-d": _run_thm_d, "ratio": _run_ratio, "quad": _run_quad, "cor-c": _run_cor_c,
    "cor-e": _run_cor_e,
}


def run_experiment(cfg: ExperimentConfig) -> Outcome:
    """Dispatch ``cfg`` and collect the table and JSON summary; nothing is written."""
    try:
        out = RUNNERS[cfg.experiment](cfg)
    except ConfigError as exc:
        out = Outcome(EXIT_INPUT, HEADERS[cfg.experiment], [],
                      {"status": "input_error", "errors": exc.errors})
    except (DomainError, DivergenceError) as exc:
        out = Outcome(EXIT_INPUT, HEADERS[cfg.experiment], [],
                      {"status": "input_error", "errors": [str(exc)]})
    out.summary = {"experiment": cfg.experiment, "exit_code": out.code, **out.summary,
                   "config": cfg.to_dict()}
    return out


# -- output -----------------------------------------------------------------


def _cell(x):
    if x is None:
        return "none"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def format_csv(outcome: Outcome) -> str:
    lines = [",".join(outcome.header)]
    lines += [",".join(_cell(x) for x in row) for row in outcome.rows]
    return "\n".join(lines) + "\n"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def format_json(outcome: Outcome) -> str:
    return json.dumps(_jsonable(outcome.summary), indent=2, sort_keys=True) + "\n"


def write_outputs(cfg: ExperimentConfig, outcome: Outcome, stdout=None):
    """Write the report for ``cfg.format`` to ``cfg.output`` or ``stdout``.

    A CSV written to a file gets its JSON summary next to it as ``<stem>.summary.json``.
    """
    stdout = sys.stdout if stdout is None else stdout
    text = format_csv(outcome) if cfg.format == "csv" else format_json(outcome)
    if cfg.output is None:
        stdout.write(text)
        return
    path = Path(cfg.output)
    path.write_text(text)
    if cfg.format == "csv":
        path.with_name(path.stem + ".summary.json").write_text(format_json(outcome))


def _apply_overrides(cfg, args):
    params = dict(cfg.params)
    schema = SCHEMAS[cfg.experiment][0]
    errors = []
    for flag, key, check in (("steps", "steps", _steps), ("tol", "tol", _positive)):
        val = getattr(args, flag)
        if val is None:
            continue
        if key not in schema:
            errors.append(f"--{flag}: experiment {cfg.experiment!r} has no {key!r} parameter")
            continue
        try:
            params[key] = check(val)
        except _Bad as exc:
            errors.append(f"--{flag}: {exc}")
    if args.seed is not None and args.seed < 0:
        errors.append("--seed: must be nonnegative")
    if errors:
        raise ConfigError(errors)
    return replace(
        cfg, params=params,
        output=args.out if args.out is not None else cfg.output,
        format=args.format if args.format is not None else cfg.format,
        seed=args.seed if args.seed is not None else cfg.seed,
    )


def build_parser():
    ap = argparse.ArgumentParser(prog="jacobicomp",
                                 description="Run a comparison-geometry experiment from a JSON config.")
    ap.add_argument("--config", required=True, help="path to the JSON experiment config")
    ap.add_argument("--out", help="output path (default: config 'output' or stdout)")
    ap.add_argument("--format", choices=("csv", "json"), help="report format")
    ap.add_argument("--steps", type=int, help="override params.steps")
    ap.add_argument("--tol", type=float, help="override params.tol")
    ap.add_argument("--seed", type=int, help="override the seed")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        cfg = _apply_overrides(parse_config(text), args)
    except ConfigError as exc:
        for msg in exc.errors:
            print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT
    outcome = run_experiment(cfg)
    try:
        write_outputs(cfg, outcome)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if outcome.code == EXIT_INPUT:
        for msg in outcome.summary.get("errors", []):
            print(f"error: {msg}", file=sys.stderr)
    return outcome.code


if __name__ == "__main__":
    sys.exit(main())
