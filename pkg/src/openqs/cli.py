"""Command-line tools for channels, entanglement tests and Lindblad dynamics.

Every artifact embeds the tool version, the parsed configuration and the seed.
Exit codes: 0 success, 1 internal error, 2 validation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import atomfield as af
from .acceptance import CRITERIA, repro_suite
from .channels import (
    channel_from_json,
    choi_of,
    diagonal_projection,
    identity_channel,
    is_completely_positive,
    is_positive_map,
    transposition,
)
from .entanglement import concurrence, ppt_verdict, werner_state
from .errors import ValidationError
from .lindblad import (
    cp_ledger,
    generator_from_json,
    positivity_witness,
    to_bloch_affine,
    trajectory,
)
from .markov import (
    convolutionless_generator,
    markov_coefficients,
    redfield_generator,
    singular_coupling_generator,
    thermal_scalar_derivative,
    weak_coupling_generator,
)
from .states import matrix_from_json

TOOL = "openqs"


# ----------------------------------------------------------------------------
# output helpers


def _clean(x):
    """JSON-safe copy: infinities become strings, numpy scalars become Python."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def _meta(args: argparse.Namespace) -> dict:
    config = {k: v for k, v in vars(args).items() if k not in ("func", "seed")}
    return {"tool": TOOL, "version": __version__, "config": _clean(config), "seed": args.seed}


def _emit_json(args, payload: dict) -> None:
    doc = {**_meta(args), "result": _clean(payload)}
    text = json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"
    _write(args.out, text)


def _emit_csv(args, header: list[str], rows: list[list], plot: tuple[str, list[str]] | None = None) -> None:
    buf = io.StringIO()
    meta = _meta(args)
    buf.write(f"# tool={meta['tool']} version={meta['version']} seed={meta['seed']}\n")
    buf.write("# config=" + json.dumps(meta["config"], sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    _write(args.out, buf.getvalue())
    if args.gnuplot and plot is not None:
        _write_gnuplot(args, header, *plot)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    Path(path).write_text(text)


def _write_gnuplot(args, header: list[str], xcol: str, ycols: list[str]) -> None:
    if args.out in (None, "-"):
        raise ValidationError("--gnuplot needs --out so the script can reference the data file")
    data = Path(args.out)
    lines = [
        f"# generated by {TOOL} {__version__}",
        "set datafile separator ','",
        f"set xlabel '{xcol}'",
    ]
    x = header.index(xcol) + 1
    parts = [f"'{data.name}' using {x}:{header.index(c) + 1} with lines title '{c}'" for c in ycols]
    lines.append("plot " + ", \\\n     ".join(parts))
    data.with_suffix(".gp").write_text("\n".join(lines) + "\n")


def _read_json(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc


def _read_state(path: str) -> np.ndarray:
    obj = _read_json(path)
    return matrix_from_json(obj.get("state", obj))


def _vector(text: str, size: int | None = None) -> np.ndarray:
    try:
        vals = np.array([complex(s.strip()) for s in text.split(",")])
    except ValueError as exc:
        raise ValidationError(f"cannot parse vector {text!r}") from exc
    if size is not None and vals.shape != (size,):
        raise ValidationError(f"expected {size} comma-separated numbers, got {text!r}")
    return vals


def _real_vector(text: str, size: int) -> np.ndarray:
    v = _vector(text, size)
    if np.any(v.imag != 0):
        raise ValidationError(f"expected real numbers, got {text!r}")
    return v.real


def _float(text: str) -> float:
    """float() that also accepts 'inf'."""
    try:
        return float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


# ----------------------------------------------------------------------------
# subcommands


def cmd_detect(args) -> int:
    rho = _read_state(args.state)
    dims = tuple(int(x) for x in args.dims.split(",")) if args.dims else None
    if dims is None:
        n = int(round(math.sqrt(rho.shape[0])))
        if n * n != rho.shape[0]:
            raise ValidationError(f"cannot split dimension {rho.shape[0]} into equal parts; pass --dims")
        dims = (n, n)
    v = ppt_verdict(rho, dims)
    out = {"min_pt_eig": v.min_pt_eigenvalue, "verdict": v.verdict, "dims": list(dims)}
    out["concurrence"] = concurrence(rho) if dims == (2, 2) else None
    _emit_json(args, out)
    return 0


BUILTIN_CHANNELS = {
    "transposition": transposition,
    "identity": identity_channel,
    "diagonal": diagonal_projection,
}


def cmd_channel(args) -> int:
    if args.channel:
        ch = channel_from_json(_read_json(args.channel))
    else:
        ch = BUILTIN_CHANNELS[args.builtin](args.dim)
    cp = is_completely_positive(ch)
    pos = is_positive_map(ch, trials=args.trials, seed=args.seed)
    out = {
        "dim": ch.dim,
        "choi_eigenvalues": np.linalg.eigvalsh(choi_of(ch)),
        "completely_positive": cp.completely_positive,
        "min_choi_eigenvalue": cp.min_choi_eigenvalue,
        "positive_witness_found": not pos.positive,
        "min_product_value": pos.worst_value,
    }
    _emit_json(args, out)
    return 0


def cmd_evolve(args) -> int:
    g = generator_from_json(_read_json(args.gen))
    rho0 = _read_state(args.state)
    if args.t < 0:
        raise ValidationError(f"final time must be >= 0, got {args.t}")
    if args.grid < 1:
        raise ValidationError("grid needs at least one interval")
    times = np.linspace(0.0, args.t, args.grid + 1)
    traj = trajectory(g, rho0, times)
    n = g.dim
    header = ["t"]
    for i in range(n):
        for j in range(n):
            header += [f"re_{i}{j}", f"im_{i}{j}"]
    header += ["min_eigenvalue", "entropy"]
    rows = []
    for t, rho in zip(times, traj):
        w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
        row = [float(t)]
        for z in rho.reshape(-1):
            row += [float(z.real), float(z.imag)]
        row += [float(w[0]), _entropy(rho)]
        rows.append(row)
    _emit_csv(args, header, rows, ("t", ["min_eigenvalue", "entropy"]))
    return 0


def _entropy(rho: np.ndarray) -> float:
    """Entropy of the clipped spectrum, so non-positive trajectories still report a value."""
    w = np.clip(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)), 0.0, None)
    w = w[w > 0]
    return float(-np.sum(w * np.log(w))) + 0.0  # no negative zero


APPROXIMATIONS = {
    "redfield": redfield_generator,
    "weak-coupling": weak_coupling_generator,
    "singular-coupling": singular_coupling_generator,
    "convolutionless": convolutionless_generator,
}


def cmd_markov_compare(args) -> int:
    if args.model != "ex34":
        raise ValidationError(f"unknown model {args.model!r}")
    bath = thermal_scalar_derivative(args.beta, coupling=args.coupling, eps=args.eps)
    k = markov_coefficients(args.omega, bath)
    rows = []
    for name, build in APPROXIMATIONS.items():
        ba = build(args.omega, bath)
        led = cp_ledger(ba)
        w = positivity_witness(ba, seed=args.seed)
        p = ba.params()
        rows.append([name, k.alpha, k.b, k.d, led.cp, led.positive_necessary and w is None,
                     w.ddet if w is not None else 0.0, p["a"], p["alpha"], p["gamma"]])
    header = ["name", "alpha", "b", "d", "cp", "positive", "witness_ddet", "D_a", "D_alpha", "D_gamma"]
    _emit_csv(args, header, rows)
    return 0


def _atom(args) -> af.AtomParams:
    n = _real_vector(args.n, 3)
    return af.AtomParams(args.omega, tuple(n / np.linalg.norm(n)) if args.normalize else tuple(n), args.beta)


def cmd_atom_single(args) -> int:
    p = _atom(args)
    k = af.single_atom_coeffs(p)
    ba = to_bloch_affine(af.single_atom_generator(p))
    out = {
        "A": k.A, "B": k.B, "C": k.C, "R": k.R,
        "kossakowski_re": af.single_atom_kossakowski(p).real,
        "kossakowski_im": af.single_atom_kossakowski(p).imag,
        "D3": ba.D3, "uvw": ba.uvw,
        "stationary_bloch": af.stationary_bloch(p),
        "excitation_rate": af.excitation_rate(p),
    }
    _emit_json(args, out)
    return 0


def _two_atom_init(args, p: af.AtomParams) -> af.TwoAtomState:
    n = p.axis
    if args.init == "antiparallel":
        return af.TwoAtomState.product(n, -n)
    if args.init == "parallel":
        return af.TwoAtomState.product(n, n)
    if args.init == "ground":
        return af.TwoAtomState.product(-n, -n)
    if args.init == "epsilon":
        return af.epsilon_family(args.eps)
    raise ValidationError(f"unknown initial state {args.init!r}")


def cmd_atom_two(args) -> int:
    p = _atom(args)
    s0 = _two_atom_init(args, p)
    if not args.tmax > 0:
        raise ValidationError(f"tmax must be positive, got {args.tmax}")
    times = np.linspace(0.0, args.tmax, args.points)
    traj = af.evolve_two_atom(p, s0, times)
    header = (["t", "tau", "concurrence", "min_eigenvalue"]
              + [f"v1_{i}" for i in range(1, 4)] + [f"v2_{i}" for i in range(1, 4)]
              + [f"M_{i}{j}" for i in range(1, 4) for j in range(1, 4)])
    rows = []
    for t, s in zip(times, traj.states):
        m = s.to_matrix()
        rows.append([float(t), s.tau, af.two_atom_concurrence(s), float(np.linalg.eigvalsh(m)[0])]
                    + list(map(float, s.to_vector())))
    _emit_csv(args, header, rows, ("t", ["concurrence", "tau"]))
    return 0


NAMED_STATES = {"+": [1.0, 0.0], "-": [0.0, 1.0]}


def _pure(text: str) -> np.ndarray:
    if text in NAMED_STATES:
        return np.array(NAMED_STATES[text], dtype=complex)
    return _vector(text, 2)


def cmd_atom_entangle(args) -> int:
    p = _atom(args)
    res = af.entanglement_generation_test(p, _pure(args.phi), _pure(args.psi))
    k = af.single_atom_coeffs(p)
    _emit_json(args, {"fires": res.fires, "lhs": res.lhs, "rhs": res.rhs, "statistic": res.statistic,
                      "B_n3_squared": (k.B * p.axis[2]) ** 2})
    return 0


def cmd_repro(args) -> int:
    if args.case == "werner-concurrence":
        rows = []
        for F in np.linspace(-1.0, 1.0, args.points):
            rho = werner_state(2, F).entries
            rows.append([float(F), concurrence(rho), ppt_verdict(rho, (2, 2)).min_pt_eigenvalue])
        _emit_csv(args, ["F", "concurrence", "min_pt_eig"], rows, ("F", ["concurrence", "min_pt_eig"]))
        return 0
    if args.case == "two-atom-asymptotic":
        p = af.AtomParams(args.omega, (0.0, 0.0, 1.0), args.beta)
        k = af.single_atom_coeffs(p)
        s0 = af.TwoAtomState.product(p.axis, -p.axis)
        traj = af.evolve_two_atom(p, s0, [0.0, 50.0 / k.A])
        _emit_json(args, {
            "init": "antiparallel", "R": k.R, "tau": s0.tau,
            "concurrence_closed_form": af.asymptotic_concurrence(s0.tau, k.R),
            "concurrence_evolved": af.two_atom_concurrence(traj.states[-1]),
            "t_final": 50.0 / k.A,
        })
        return 0
    if args.case == "suite":
        only = [int(c) for c in args.criteria.split(",")] if args.criteria else None
        if only is not None and any(c not in CRITERIA for c in only):
            raise ValidationError(f"criteria must be among {sorted(CRITERIA)}")
        rows = repro_suite(only)
        verdicts = {}
        for r in rows:
            verdicts[r.criterion] = verdicts.get(r.criterion, True) and r.passed
        if args.format == "csv":
            _emit_csv(args, ["criterion", "check", "measured", "expected", "tol", "passed"],
                      [list(r) for r in rows])
        else:
            _emit_json(args, {
                "criteria": {str(c): {"title": CRITERIA[c][0], "passed": ok} for c, ok in verdicts.items()},
                "rows": [r._asdict() for r in rows],
            })
        for c, ok in verdicts.items():
            print(f"criterion {c:2d} {'PASS' if ok else 'FAIL'}  {CRITERIA[c][0]}", file=sys.stderr)
        return 0
    raise ValidationError(f"unknown case {args.case!r}")


# ----------------------------------------------------------------------------
# parser


def _add_atom_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--omega", type=_float, default=1.0, help="level splitting")
    p.add_argument("--beta", type=_float, default=2.0, help="inverse temperature (inf allowed)")
    p.add_argument("--n", default="0,0,1", help="unit axis, comma separated")
    p.add_argument("--normalize", action="store_true", help="rescale --n to unit length")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog=TOOL, description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (LINDBLAD_SEED overrides)")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--gnuplot", action="store_true", help="also write <out>.gp for CSV outputs")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", parents=[common], help="PPT and concurrence of a bipartite state")
    p.add_argument("--state", required=True, help="state JSON {dim, re, im}")
    p.add_argument("--dims", default=None, help="subsystem dimensions, e.g. 2,3")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("channel", parents=[common], help="CP and positivity checks for a linear map")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--channel", help="channel JSON {dim, kraus} or {dim, choi}")
    g.add_argument("--builtin", choices=sorted(BUILTIN_CHANNELS))
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--trials", type=int, default=32, help="random restarts of the positivity search")
    p.set_defaults(func=cmd_channel)

    p = sub.add_parser("evolve", parents=[common], help="trajectory of a Lindblad generator")
    p.add_argument("--gen", required=True, help="generator JSON {dim, H, C, basis}")
    p.add_argument("--state", required=True, help="initial state JSON")
    p.add_argument("--t", type=_float, required=True, help="final time")
    p.add_argument("--grid", type=int, default=100, help="number of time intervals")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("markov-compare", parents=[common], help="compare Markov approximations")
    p.add_argument("--model", default="ex34", choices=["ex34"])
    p.add_argument("--beta", type=_float, default=1.0)
    p.add_argument("--omega", type=_float, default=1.0)
    p.add_argument("--coupling", type=_float, default=1.0)
    p.add_argument("--eps", type=_float, default=0.05, help="spectral cutoff")
    p.set_defaults(func=cmd_markov_compare)

    p = sub.add_parser("atomfield", help="atoms in a thermal scalar field")
    asub = p.add_subparsers(dest="atom_command", required=True)
    q = asub.add_parser("single", parents=[common], help="single-atom coefficients")
    _add_atom_args(q)
    q.set_defaults(func=cmd_atom_single)
    q = asub.add_parser("two", parents=[common], help="two-atom trajectory")
    _add_atom_args(q)
    q.add_argument("--init", default="antiparallel", choices=["antiparallel", "parallel", "ground", "epsilon"])
    q.add_argument("--eps", type=_float, default=0.1, help="noise weight for --init epsilon")
    q.add_argument("--tmax", type=_float, default=50.0)
    q.add_argument("--points", type=int, default=101)
    q.set_defaults(func=cmd_atom_two)
    q = asub.add_parser("entangle-test", parents=[common], help="initial entanglement generation test")
    _add_atom_args(q)
    q.add_argument("--phi", default="-", help="'+', '-' (sigma3 eigenstates) or two amplitudes a,b")
    q.add_argument("--psi", default="+", help="'+', '-' or two amplitudes a,b")
    q.set_defaults(func=cmd_atom_entangle)

    p = sub.add_parser("repro", parents=[common], help="reproduce reference results")
    p.add_argument("--case", required=True, choices=["werner-concurrence", "two-atom-asymptotic", "suite"])
    p.add_argument("--beta", type=_float, default=math.inf)
    p.add_argument("--omega", type=_float, default=1.0)
    p.add_argument("--points", type=int, default=41)
    p.add_argument("--criteria", default=None, help="comma-separated criterion numbers (suite only)")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_repro)
    return ap


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, None) else 2
    env = os.environ.get("LINDBLAD_SEED")
    if env is not None:
        try:
            args.seed = int(env)
        except ValueError:
            print(f"error: LINDBLAD_SEED must be an integer, got {env!r}", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except (ValidationError, FileNotFoundError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> int:
    return run(sys.argv[1:])
