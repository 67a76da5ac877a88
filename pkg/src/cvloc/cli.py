"""Command-line interface: ``cvloc <subcommand> ...``.

Exit codes: 0 ok, 1 parse error, 2 unphysical input, 3 unsupported shape,
4 numeric failure.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import oracle, symmetric, threemode
from .cmfile import read_cm
from .errors import (
    CMParseError,
    DimensionError,
    NumericError,
    ShapeError,
    TruncationError,
    UnphysicalStateError,
    UnsupportedShapeError,
)
from .fock import DEFAULT_NMAX, SPDParams, average_localized, gaussian_baseline
from .gaussian import (
    log_negativity_from_mu2,
    ptranspose_symplectic_eigs,
    require_physical,
    select_modes,
    validate_cm,
)
from .measurement import condition_on_modes, homodyne_direction, pure_measurement_cm

EXIT_OK, EXIT_PARSE, EXIT_UNPHYSICAL, EXIT_SHAPE, EXIT_NUMERIC = 0, 1, 2, 3, 4
CSV_DIGITS = ".12g"


class _ArgumentError(Exception):
    pass


def _fmt(v):
    return format(float(v), CSV_DIGITS)


def _emit_csv(header, rows, path):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else _fmt(v) for v in row])
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _load(path):
    try:
        return read_cm(path).matrix
    except OSError as exc:
        raise CMParseError(f"cannot read file: {exc.strerror}", 0, 0) from None


def _check_modes(n, modes, what):
    for m in modes:
        if not 0 <= m < n:
            raise _ArgumentError(f"{what} mode {m} out of range for {n} modes")
    if len(set(modes)) != len(modes):
        raise _ArgumentError(f"{what} modes repeat: {modes}")


# ---------------------------------------------------------------------------
# negativity / validate
# ---------------------------------------------------------------------------


def cmd_negativity(args):
    g = require_physical(_load(args.file))
    n = g.shape[0] // 2
    _check_modes(n, args.modes, "target")
    gab = select_modes(g, args.modes)
    mu1, mu2 = ptranspose_symplectic_eigs(gab)
    rec = {"mu1": mu1, "mu2": mu2, "E_N": log_negativity_from_mu2(mu2)}
    if args.json:
        print(json.dumps(rec))
    else:
        print(f"mu1 = {_fmt(mu1)}\nmu2 = {_fmt(mu2)}\nE_N = {_fmt(rec['E_N'])}")
    return EXIT_OK


def cmd_validate(args):
    g = _load(args.file)
    rep = validate_cm(g)
    rec = {
        "n_modes": g.shape[0] // 2,
        "symmetric": rep.symmetric,
        "physical": rep.physical,
        "min_symplectic_eigenvalue": rep.min_symplectic_eigenvalue,
    }
    if args.json:
        print(json.dumps(rec))
    else:
        for k, v in rec.items():
            print(f"{k} = {v}")
    return EXIT_OK if rep.physical else EXIT_UNPHYSICAL


# ---------------------------------------------------------------------------
# localize
# ---------------------------------------------------------------------------


def _theta_in_original_frame(S, theta):
    """Phase of the homodyne direction ``S^T u(theta)`` measured before standardization."""
    w = S.T @ homodyne_direction(theta)
    return math.atan2(w[0], w[1]) % math.pi


def _measurement_in_original_frame(blk, r, theta):
    """``(r, theta)`` of a mode-C measurement chosen after standardizing ``blk`` to ``c * I``."""
    w, v = np.linalg.eigh(blk)
    S2 = math.sqrt(math.sqrt(np.linalg.det(blk))) * (v @ np.diag(w**-0.5) @ v.T)
    if math.isinf(r):
        return r, _theta_in_original_frame(S2, theta)
    Si = np.linalg.inv(S2)
    m = Si @ np.asarray(pure_measurement_cm(r, theta)) @ Si.T
    w, v = np.linalg.eigh(0.5 * (m + m.T))
    return max(0.0, -0.5 * math.log(w[0])), math.atan2(v[0, 0], v[1, 0]) % math.pi


def _record(solver, tag, r, theta, mu2, extra=None):
    rec = {"solver": solver, "tag": tag, "r": r, "theta": theta, "mu2": mu2, "E": log_negativity_from_mu2(mu2)}
    rec.update(extra or {})
    return rec


def _threemode_result(g, res, solver):
    r, theta = _measurement_in_original_frame(g[4:6, 4:6], res.r, res.theta)
    return _record(solver, res.strategy, r, theta, res.mu2)


def _localize_auto(g, force_numeric):
    n = g.shape[0] // 2
    reasons = []
    if not force_numeric:
        det = symmetric.detect_symmetric(g)
        if det:
            res = symmetric.symmetric_localizable(det.params)
            theta = 0.0 if res.quadrature == "p" else math.pi / 2
            theta = _theta_in_original_frame(det.transform, theta)
            return _record("symmetric", "homodyne", math.inf, theta, res.mu2, {"quadrature": res.quadrature})
        reasons.append(f"symmetric: {det.reason}")
        det = symmetric.detect_bisymmetric(g)
        if det:
            res = symmetric.bisymmetric_localizable(det.params)
            return _record("bisymmetric", "closed-form", None, None, res.mu2, {"lambda_min": res.lambda_min})
        reasons.append(f"bisymmetric: {det.reason}")
    if n == 3:
        s = threemode.ThreeModeState.from_cm(g)
        if not force_numeric:
            iso = threemode.isotropic_check(s.gamma)
            if iso.is_isotropic:
                return _threemode_result(g, threemode.isotropic_optimal(s, iso.nu), "isotropic")
        return _threemode_result(g, threemode.optimize_gaussian(s), "numeric")
    if force_numeric:
        return _localize_sweep(g)
    raise UnsupportedShapeError(
        f"no solver for a non-symmetric {n}-mode state ({'; '.join(reasons)}); use --force-numeric for a grid sweep"
    )


def _localize_homodyne(g):
    n = g.shape[0] // 2
    if n == 3:
        res = threemode.optimal_homodyne(threemode.ThreeModeState.from_cm(g))
        _, theta = _measurement_in_original_frame(g[4:6, 4:6], math.inf, res.theta)
        return _record("homodyne-quartic", "homodyne", math.inf, theta, res.mu2, {"degenerate": res.degenerate})
    det = symmetric.detect_symmetric(g)
    if det:
        res = symmetric.symmetric_localizable(det.params)
        theta = _theta_in_original_frame(det.transform, 0.0 if res.quadrature == "p" else math.pi / 2)
        return _record("symmetric", "homodyne", math.inf, theta, res.mu2, {"quadrature": res.quadrature})
    raise UnsupportedShapeError(f"homodyne optimum for N={n} needs a symmetric state ({det.reason})")


def _localize_coherent(g):
    n = g.shape[0] // 2
    cond = condition_on_modes(g, list(range(2, n)), [np.eye(2)] * (n - 2))
    mu1, mu2 = ptranspose_symplectic_eigs(cond)
    return _record("coherent", "coherent", 0.0, 0.0, mu2)


def _localize_sweep(g):
    n = g.shape[0] // 2
    res = oracle.sweep_gaussian(g, (0, 1), tuple(range(2, n)), keep_table=False)
    y, th = res.best_params[0]
    r = math.inf if y >= 1.0 else math.atanh(y)
    return _record("sweep", "grid", r, th, res.best_mu2, {"params": [list(p) for p in res.best_params]})


def cmd_localize(args):
    g = require_physical(_load(args.file))
    n = g.shape[0] // 2
    _check_modes(n, args.target, "target")
    measured = args.measured if args.measured else [m for m in range(n) if m not in args.target]
    _check_modes(n, list(args.target) + list(measured), "target/measured")
    if len(measured) < 1:
        raise _ArgumentError("need at least one measured mode")
    g = select_modes(g, list(args.target) + list(measured))
    dispatch = {
        "auto": lambda: _localize_auto(g, args.force_numeric),
        "homodyne": lambda: _localize_homodyne(g),
        "coherent": lambda: _localize_coherent(g),
        "sweep": lambda: _localize_sweep(g),
    }
    rec = dispatch[args.strategy]()
    if args.json:
        print(json.dumps({k: (None if isinstance(v, float) and math.isinf(v) else v) for k, v in rec.items()}))
    else:
        r = rec["r"]
        rs = "inf" if r is not None and math.isinf(r) else ("-" if r is None else _fmt(r))
        ts = "-" if rec["theta"] is None else _fmt(rec["theta"])
        print(f"solver = {rec['solver']}\ntag = {rec['tag']}\nr = {rs}\ntheta = {ts}")
        print(f"mu2 = {_fmt(rec['mu2'])}\nE = {_fmt(rec['E'])}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


def nu_row(s_p, nu):
    """``(E_before, E_hom, E_opt, winner)`` for ``nu * gamma_p``."""
    g = nu * s_p.original
    s = threemode.ThreeModeState.from_cm(g, validate=False)
    gab = s.reduced_ab
    mu1, mu2 = ptranspose_symplectic_eigs(gab)
    x = threemode.chi_matrix(s)
    e_hom = log_negativity_from_mu2(threemode.mu2_from_f(threemode.isotropic_homodyne_f(s, x, nu)))
    opt = threemode.isotropic_optimal(s, nu)
    return log_negativity_from_mu2(mu2), e_hom, opt.e_lg, opt.strategy


def separability_nu(s_p, hi=1e3):
    """Smallest ``nu`` at which the optimally localized entanglement vanishes."""
    from scipy.optimize import brentq

    def h(nu):
        s = threemode.ThreeModeState.from_cm(nu * s_p.original, validate=False)
        return threemode.isotropic_optimal(s, nu).mu2 - 1.0

    if h(1.0) >= 0.0:
        return 1.0
    return brentq(h, 1.0, hi, xtol=1e-12)


def cmd_sweep_nu(args):
    g = _load(args.file)
    if g.shape != (6, 6):
        raise DimensionError("sweep-nu needs a three-mode state")
    iso = threemode.isotropic_check(g)
    if not iso.is_isotropic or abs(iso.nu - 1.0) > 1e-8:
        raise _ArgumentError(f"input must be a pure state (nu = 1); found nu = {iso.nu:.6g}, isotropic={iso.is_isotropic}")
    s_p = threemode.ThreeModeState.from_cm(g)
    nu_max = args.nu_max if args.nu_max is not None else separability_nu(s_p)
    nus = np.linspace(args.nu_min, nu_max, args.steps)
    rows = [(nu,) + nu_row(s_p, nu) for nu in nus]
    _emit_csv(("nu", "E_before", "E_hom", "E_opt", "winner"), rows, args.csv)
    return EXIT_OK


def cmd_sweep_lambda(args):
    for eta in args.eta:
        if not 0.0 <= eta <= 1.0:
            raise _ArgumentError(f"eta must lie in [0, 1], got {eta}")
    if not 0.0 <= args.lambda_min <= args.lambda_max < 1.0:
        raise _ArgumentError("need 0 <= lambda-min <= lambda-max < 1")
    lams = np.linspace(args.lambda_min, args.lambda_max, args.steps)
    rows = []
    for lam in lams:
        row = [lam, gaussian_baseline(lam)]
        for eta in args.eta:
            try:
                row.append(average_localized(SPDParams(float(lam), eta, args.nmax)))
            except TruncationError as exc:
                raise TruncationError(f"lambda={lam:.6g}, eta={eta:.6g}: {exc}; rerun with a larger --nmax") from None
        rows.append(row)
    header = ["lambda", "E_L_G"] + [f"E_L_NG_eta={_fmt(e)}" for e in args.eta]
    _emit_csv(header, rows, args.csv)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="cvloc", description="Gaussian localizable entanglement of CV states.")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("negativity", help="logarithmic negativity of a mode pair")
    q.add_argument("file")
    q.add_argument("--modes", type=int, nargs=2, default=[0, 1], metavar=("I", "J"))
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_negativity)

    q = sub.add_parser("localize", help="optimal Gaussian localizable entanglement")
    q.add_argument("file")
    q.add_argument("--target", type=int, nargs=2, default=[0, 1], metavar=("I", "J"))
    q.add_argument("--measured", type=int, nargs="+", default=None, help="default: all other modes")
    q.add_argument("--strategy", choices=("auto", "homodyne", "coherent", "sweep"), default="auto")
    q.add_argument("--force-numeric", action="store_true", help="skip structural closed forms in auto mode")
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_localize)

    q = sub.add_parser("sweep-nu", help="entanglement of nu * gamma_p versus nu (CSV)")
    q.add_argument("file", help="pure three-mode state gamma_p")
    q.add_argument("--nu-min", type=float, default=1.0)
    q.add_argument("--nu-max", type=float, default=None, help="default: separability threshold")
    q.add_argument("--steps", type=int, default=101)
    q.add_argument("--csv", default=None, metavar="PATH")
    q.set_defaults(func=cmd_sweep_nu)

    q = sub.add_parser("sweep-lambda", help="Gaussian vs photon-detector localized entanglement (CSV)")
    q.add_argument("--eta", type=float, nargs="+", default=[0.6, 0.8, 1.0])
    q.add_argument("--lambda-min", type=float, default=0.0)
    q.add_argument("--lambda-max", type=float, default=0.7)
    q.add_argument("--steps", type=int, default=71)
    q.add_argument("--nmax", type=int, default=DEFAULT_NMAX)
    q.add_argument("--csv", default=None, metavar="PATH")
    q.set_defaults(func=cmd_sweep_lambda)

    q = sub.add_parser("validate", help="symmetry and physicality report")
    q.add_argument("file")
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CMParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UnphysicalStateError as exc:
        print(f"error: {exc} (witness: smallest symplectic eigenvalue {exc.witness:.12g})", file=sys.stderr)
        return EXIT_UNPHYSICAL
    except (UnsupportedShapeError, ShapeError, DimensionError, _ArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SHAPE
    except (NumericError, TruncationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
