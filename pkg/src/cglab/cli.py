"""Command-line entry point: ``cglab <command> [flags]``.

Every command writes one artifact (CSV or JSON, to ``--output`` or stdout)
and prints a one-line summary, including the seed, to stderr.  Settings can
also come from a flat ``key = value`` file given with ``--config``; flags
given on the command line win.  ``CG_LAB_SEED`` supplies the seed when
neither does.

Exit codes: 0 success, 2 invalid input, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .avgstate import avg_state_coeffs, avg_state_diagnostics, avg_state_mc, is_ppt
from .channel import apply_cg, cg_bloch_batch, check_covariance, prob_vector, probs_from_h
from .io import emit_csv, emit_json, read_radii
from .laws import (
    cdf_p2,
    cdf_p2_separable,
    cdf_pn,
    pdf_p2,
    pdf_p2_separable,
    pdf_pn,
    preimage_volume,
)
from .mc import _split, estimate_shell_volume, fit_p, fit_stderr, pushforward_radii, shell_volume, sweep_eps
from .sampling import make_rng, sample_haar_states, sample_product_states
from .states import bloch_vector, concurrence, haar_unitary, partial_trace, purity

COMMANDS = ("sample", "pdf", "volume", "avg-state", "fit", "sweep-eps", "covariance-check")
SEED_ENV = "CG_LAB_SEED"
EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3


class ValidationError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _seed(text) -> int:
    try:
        v = int(str(text), 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must lie in [0, 2**64), got {v}")
    return v


# dest -> (flag, type, help)
FLAGS = {
    "n_qubits": ("--N", int, "number of qubits N (default 2)"),
    "p": ("--p", _floats, "comma-separated CG weights p_1,...,p_N"),
    "h": ("--h", float, "two-qubit asymmetry h = p2 - p1 in (0, 1] (alternative to --p)"),
    "eps": ("--eps", float, "shell thickness epsilon in (0, 1)"),
    "n": ("--n", int, "number of Monte-Carlo samples"),
    "seed": ("--seed", _seed, f"RNG seed (fallback: ${SEED_ENV}, then 0)"),
    "streams": ("--streams", int, "number of RNG substreams (default 1)"),
    "ensemble": ("--ensemble", str, "full | separable (default full)"),
    "output": ("--output", str, "output path ('-' or omitted: stdout)"),
    "format": ("--format", str, "csv | json (default depends on the command)"),
    "grid": ("--grid", int, "number of r grid points for pdf (default 101)"),
    "p_test": ("--p-test", float, "smaller CG weight used to generate data for fit/sweep-eps"),
    "eps_grid": ("--eps-grid", _floats, "comma-separated epsilon values for sweep-eps"),
    "r_ts": ("--r-ts", float, "target Bloch radius in [0, 1]"),
    "model": ("--model", str, "fit model: P2 | PN (default P2)"),
    "input": ("--input", str, "CSV of radii to fit instead of simulated data"),
    "trials": ("--trials", int, "random (psi, U) pairs for covariance-check (default 100)"),
    "blocks": ("--blocks", int, "jackknife blocks for the avg-state Monte Carlo (default 20)"),
}

ALLOWED = {
    "sample": ["n_qubits", "p", "h", "n", "seed", "streams", "ensemble"],
    "pdf": ["n_qubits", "p", "h", "grid", "ensemble"],
    "volume": ["p", "h", "eps", "r_ts", "n", "seed", "streams", "ensemble"],
    "avg-state": ["p", "h", "r_ts", "ensemble", "n", "seed", "blocks"],
    "fit": ["p_test", "eps", "n", "seed", "streams", "model", "input"],
    "sweep-eps": ["p_test", "n", "eps_grid", "seed", "streams", "model"],
    "covariance-check": ["n_qubits", "p", "h", "trials", "seed"],
}

DEFAULTS = {
    "n_qubits": 2, "n": 10_000, "streams": 1, "ensemble": "full", "grid": 101,
    "eps": 0.04, "eps_grid": [0.001, 0.04, 0.3], "p_test": 0.26, "r_ts": 0.5,
    "model": "P2", "trials": 100, "blocks": 20,
}

DEFAULT_FORMAT = {
    "sample": "csv", "pdf": "csv", "volume": "csv", "avg-state": "json",
    "fit": "json", "sweep-eps": "csv", "covariance-check": "json",
}

HELP = {
    "sample": "coarse-grain random pure states and emit their CG Bloch vectors",
    "pdf": "tabulate the radius density and CDF of the CG state on an r grid",
    "volume": "preimage volume of a spherical shell: closed form and Monte Carlo",
    "avg-state": "average preimage state: coefficients, purity, coherences",
    "fit": "least-squares estimate of the CG weight from radii",
    "sweep-eps": "fit the CG weight for several shell thicknesses on one sample",
    "covariance-check": "residuals of C[U..U psi] = U C[psi] U^dagger on random inputs",
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cglab", description="Coarse-graining channel laboratory.")
    parser.add_argument("--version", action="version", version=f"cglab {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd, help=HELP[cmd], description=HELP[cmd])
        for dest in ALLOWED[cmd] + ["output", "format"]:
            flag, typ, text = FLAGS[dest]
            sp.add_argument(flag, dest=dest, type=typ, default=None, help=text)
        sp.add_argument("--config", default=None, help="flat 'key = value' file; flags override it")
    return parser


def load_config(path) -> dict[str, str]:
    """Parse a ``key = value`` file (``#`` comments, blank lines ignored)."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path}: {exc.strerror}")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def resolve(args: argparse.Namespace, env=None) -> dict:
    """Merge flags, config file, environment and defaults into one config dict."""
    env = os.environ if env is None else env
    cmd = args.command
    allowed = ALLOWED[cmd] + ["output", "format"]
    cfg = {k: getattr(args, k) for k in allowed}
    if args.config:
        for key, value in load_config(args.config).items():
            if key == "n_qubits" or key == "N":
                key = "n_qubits"
            if key not in allowed:
                raise ValidationError(f"config key {key!r} is not valid for '{cmd}'")
            if cfg[key] is None:
                try:
                    cfg[key] = FLAGS[key][1](value)
                except (ValueError, argparse.ArgumentTypeError) as exc:
                    raise ValidationError(f"config key {key!r}: {exc}")
    if "seed" in cfg and cfg["seed"] is None:
        raw = env.get(SEED_ENV)
        try:
            cfg["seed"] = _seed(raw) if raw not in (None, "") else 0
        except argparse.ArgumentTypeError as exc:
            raise ValidationError(f"{SEED_ENV}: {exc}")
    for key, value in DEFAULTS.items():
        if key in cfg and cfg[key] is None:
            cfg[key] = value
    if cfg["format"] is None:
        cfg["format"] = DEFAULT_FORMAT[cmd]
    validate(cmd, cfg)
    return cfg


def _need(cond: bool, message: str) -> None:
    if not cond:
        raise ValidationError(message)


def validate(cmd: str, cfg: dict) -> None:
    _need(cfg["format"] in ("csv", "json"), f"--format must be csv or json, got {cfg['format']!r}")
    if "ensemble" in cfg:
        _need(cfg["ensemble"] in ("full", "separable"),
              f"--ensemble must be full or separable, got {cfg['ensemble']!r}")
    if "n_qubits" in cfg:
        _need(2 <= cfg["n_qubits"] <= 12, f"--N must lie in [2, 12], got {cfg['n_qubits']}")
    if "p" in cfg:
        has_p, has_h = cfg.get("p") is not None, cfg.get("h") is not None
        _need(not (has_p and has_h), "give exactly one of --p and --h")
        _need(has_p or has_h, "one of --p or --h is required")
        if has_h:
            _need(cfg.get("n_qubits", 2) == 2, "--h describes two qubits; use --p for N > 2")
            _need(0 < cfg["h"] <= 1, f"--h must lie in (0, 1] (h = 0 is excluded), got {cfg['h']}")
            cfg["p"] = probs_from_h(cfg["h"]).tolist()
        try:
            p = prob_vector(cfg["p"], canonical=False)
        except ValueError as exc:
            raise ValidationError(f"--p: {exc}")
        if "n_qubits" in cfg:
            _need(p.size == cfg["n_qubits"], f"--p has {p.size} entries but --N is {cfg['n_qubits']}")
        else:
            _need(p.size == 2, f"'{cmd}' is two-qubit only; --p needs 2 entries")
        if p.size == 2 and not has_h:
            h = abs(float(p[1] - p[0]))
            _need(h > 0, "h = |p2 - p1| must be positive (h = 0 is excluded)")
            cfg["h"] = h
        cfg["p"] = p.tolist()
    for key in ("n", "streams", "grid", "trials", "blocks"):
        if key in cfg:
            _need(cfg[key] >= 1, f"--{key} must be a positive integer, got {cfg[key]}")
    if "grid" in cfg:
        _need(cfg["grid"] >= 2, f"--grid must be at least 2, got {cfg['grid']}")
    if "eps" in cfg:
        _need(0 < cfg["eps"] < 1, f"--eps must lie in (0, 1), got {cfg['eps']}")
    if "eps_grid" in cfg:
        _need(len(cfg["eps_grid"]) > 0, "--eps-grid is empty")
        for e in cfg["eps_grid"]:
            _need(0 < e < 1, f"every --eps-grid value must lie in (0, 1), got {e}")
    if "r_ts" in cfg:
        _need(0 <= cfg["r_ts"] <= 1, f"--r-ts must lie in [0, 1], got {cfg['r_ts']}")
    if "p_test" in cfg:
        _need(0 < cfg["p_test"] < 0.5, f"--p-test must lie in (0, 0.5), got {cfg['p_test']}")
    if "model" in cfg:
        _need(cfg["model"] in ("P2", "PN"), f"--model must be P2 or PN, got {cfg['model']!r}")
    if cmd == "sample" and cfg["ensemble"] == "separable":
        _need(cfg["n_qubits"] == 2, "the separable ensemble is two-qubit only")
    if cmd == "pdf":
        if cfg["ensemble"] == "separable":
            _need(len(cfg["p"]) == 2, "the separable law is two-qubit only")
            _need(cfg["h"] < 1, "the separable law needs h < 1")
    if cmd == "avg-state":
        if cfg["ensemble"] == "separable":
            _need(cfg["h"] < 1, "the separable ensemble needs h < 1")
            _need(cfg["r_ts"] >= cfg["h"],
                  f"no product state maps to r_ts = {cfg['r_ts']} < h = {cfg['h']}")
        _need(cfg["n"] >= cfg["blocks"], "--n must be at least --blocks")
    if cmd == "covariance-check":
        _need(cfg["n_qubits"] <= 8, "--N must be at most 8 for covariance-check")


# --- commands ---------------------------------------------------------------

def cmd_sample(cfg):
    p = np.asarray(cfg["p"])
    product = cfg["ensemble"] == "separable"
    vecs = []
    for s, m in enumerate(_split(cfg["n"], cfg["streams"])):
        rng = make_rng(cfg["seed"], s)
        kets = sample_product_states(m, rng) if product else sample_haar_states(cfg["n_qubits"], m, rng)
        vecs.append(cg_bloch_batch(kets, p))
    v = np.concatenate(vecs)
    r = np.linalg.norm(v, axis=1)
    records = [{"index": i, "x": float(a), "y": float(b), "z": float(c), "r": float(d)}
               for i, (a, b, c, d) in enumerate(zip(v[:, 0], v[:, 1], v[:, 2], r))]
    return records, f"{len(records)} samples, mean r = {r.mean():.6f}"


def cmd_pdf(cfg):
    p = cfg["p"]
    r = np.linspace(0.0, 1.0, cfg["grid"])
    if cfg["ensemble"] == "separable":
        dens, cum = pdf_p2_separable(cfg["h"], r), cdf_p2_separable(cfg["h"], r)
    elif len(p) == 2:
        dens, cum = pdf_p2(cfg["h"], r), cdf_p2(cfg["h"], r)
    else:
        dens, cum = pdf_pn(p, r), cdf_pn(p, r)
    records = [{"r": float(a), "pdf": float(b), "cdf": float(c)} for a, b, c in zip(r, dens, cum)]
    return records, f"{len(records)} grid points, N = {len(p)}"


def cmd_volume(cfg):
    h, r_ts, eps = cfg["h"], cfg["r_ts"], cfg["eps"]
    sep = cfg["ensemble"] == "separable"
    if sep:
        _need(h < 1, "the separable ensemble needs h < 1")
    lo, hi = max(r_ts - eps / 2, 0.0), min(r_ts + eps / 2, 1.0)
    cdf = (lambda x: cdf_p2_separable(h, x)) if sep else (lambda x: cdf_p2(h, x))
    exact = float(cdf(hi) - cdf(lo))
    v_eps = shell_volume(lo, hi)
    first_order = preimage_volume(h, r_ts, v_eps, separable=sep) * 4 * np.pi * r_ts**2 if r_ts > 0 else 0.0
    radii = pushforward_radii(2, cfg["p"], cfg["n"], seed=cfg["seed"], streams=cfg["streams"], product=sep)
    mc = estimate_shell_volume(radii, r_ts, eps)
    se = float(np.sqrt(max(mc * (1 - mc), 0.0) / radii.size))
    rec = {"h": h, "r_ts": r_ts, "eps": eps, "ensemble": cfg["ensemble"], "shell_volume": v_eps,
           "volume_exact": exact, "volume_first_order": float(first_order),
           "volume_mc": mc, "volume_mc_stderr": se, "n": int(radii.size)}
    return [rec], f"shell fraction: exact {exact:.6g}, MC {mc:.6g} +- {se:.2g}"


def cmd_avg_state(cfg):
    h, r_ts = cfg["h"], cfg["r_ts"]
    coeffs = avg_state_coeffs(h, r_ts, cfg["ensemble"])
    rho = coeffs.matrix()
    diag = avg_state_diagnostics(rho, r_ts)
    # C applied to the average state; equal to the target only empirically
    back = bloch_vector(0.5 * ((1 - h) * partial_trace(rho, [0]) + (1 + h) * partial_trace(rho, [1])))
    out = {
        "h": h, "r_ts": r_ts, "ensemble": cfg["ensemble"], "branch": coeffs.branch,
        "coefficients": {"c1": coeffs.c1, "c2": coeffs.c2, "c3": coeffs.c3, "c4": coeffs.c4},
        "pauli_components": {f"{a}{b}": v for (a, b), v in coeffs.pauli_components().items()},
        "purity": diag["purity"],
        "coherence_23": diag["coherence_23"],
        "coherence_bound": diag["coherence_bound_" + cfg["ensemble"]],
        "ppt": is_ppt(rho),
        "cg_of_average_bloch": back.tolist(),
        "matrix_real": rho.real.tolist(),
        "matrix_imag": rho.imag.tolist(),
    }
    msg = f"{coeffs.branch} branch, purity {diag['purity']:.6f}"
    if cfg["n"]:
        mc = avg_state_mc([0.0, 0.0, r_ts], h, cfg["ensemble"], n=cfg["n"], seed=cfg["seed"],
                          blocks=cfg["blocks"])
        dist = float(np.linalg.norm(mc.mean - rho))
        out["monte_carlo"] = {"n": mc.n, "frobenius_distance": dist,
                              "frobenius_stderr": mc.frobenius_stderr,
                              "mean_real": mc.mean.real.tolist(), "mean_imag": mc.mean.imag.tolist()}
        msg += f", MC distance {dist:.3g} (SE {mc.frobenius_stderr:.3g})"
    return out, msg


def cmd_fit(cfg):
    if cfg["input"]:
        radii = read_radii(cfg["input"])
        _need(radii.size > 0, f"{cfg['input']}: no radii")
        _need(bool(np.all((radii >= 0) & (radii <= 1))), "radii must lie in [0, 1]")
    else:
        p = cfg["p_test"]
        radii = pushforward_radii(2, (p, 1 - p), cfg["n"], seed=cfg["seed"], streams=cfg["streams"])
    fr = fit_p(radii, cfg["eps"], model=cfg["model"], seed=cfg["seed"])
    out = fr.to_dict()
    out["p_fit_stderr"] = fit_stderr(radii, cfg["eps"], fr.p_fit, model=cfg["model"])
    return out, f"p_fit = {fr.p_fit:.6f} at eps = {fr.eps_used} from {fr.n_used} radii"


def cmd_sweep(cfg):
    rows, best = sweep_eps(cfg["p_test"], cfg["n"], cfg["eps_grid"], seed=cfg["seed"],
                           streams=cfg["streams"], model=cfg["model"])
    return rows, f"best eps = {best} over {len(rows)} values"


def cmd_covariance(cfg):
    rng = make_rng(cfg["seed"])
    p = cfg["p"]
    res = []
    for _ in range(cfg["trials"]):
        psi = sample_haar_states(cfg["n_qubits"], 1, rng)[0]
        u = haar_unitary(2, rng)
        res.append(check_covariance(psi, p, u))
    psi = sample_haar_states(cfg["n_qubits"], 1, rng)[0]
    out = {"n_qubits": cfg["n_qubits"], "p": p, "trials": cfg["trials"],
           "max_residual": float(max(res)), "mean_residual": float(np.mean(res)),
           "example_cg_purity": purity(apply_cg(psi, p))}
    if cfg["n_qubits"] == 2:
        out["example_concurrence"] = concurrence(psi)
    return out, f"max covariance residual {max(res):.3g} over {cfg['trials']} trials"


HANDLERS = {
    "sample": cmd_sample, "pdf": cmd_pdf, "volume": cmd_volume, "avg-state": cmd_avg_state,
    "fit": cmd_fit, "sweep-eps": cmd_sweep, "covariance-check": cmd_covariance,
}


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            out[key] = repr(v)
        else:
            out[key] = v
    return out


def run(cfg: dict, command: str) -> str:
    """Execute ``command`` and emit its artifact; returns the summary line."""
    result, msg = HANDLERS[command](cfg)
    shown = {k: v for k, v in cfg.items() if k != "output"}
    meta = {"command": command, "version": __version__, "seed": cfg.get("seed"), "config": shown}
    out = cfg["output"]
    if isinstance(result, list):
        if cfg["format"] == "csv":
            emit_csv(result, out, metadata=meta)
        else:
            emit_json({"records": result}, out, metadata=meta)
    else:
        if cfg["format"] == "csv":
            emit_csv([_flatten(result)], out, metadata=meta)
        else:
            emit_json(result, out, metadata=meta)
    seed = f"seed={cfg['seed']}" if "seed" in cfg else "seed=n/a"
    dest = out if out not in (None, "-") else "stdout"
    return f"cglab {command} {seed}: {msg} -> {dest}"


def main(argv=None, env=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args, env)
        summary = run(cfg, args.command)
    except ValueError as exc:
        print(f"cglab {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"cglab {args.command}: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(summary, file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
