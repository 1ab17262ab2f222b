"""Command-line interface.

Exit codes: 0 success, 1 unreadable or malformed input, 2 a structural
hypothesis fails, 3 the index is not reproducible (plateau or cross-check
mismatch), 4 a wave is spectrally unstable, 5 other numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .errors import (
    HypothesisViolation,
    NotEquilibrium,
    NotHyperbolic,
    PlateauFailure,
    ProblemFileError,
    SingularP,
    SLMorseError,
)
from .flows import PropagationConfig
from .oracle import DiscretizationConfig
from .waves import BVPConfig

EXIT_OK, EXIT_PARSE, EXIT_HYPOTHESIS, EXIT_MISMATCH, EXIT_UNSTABLE, EXIT_NUMERIC = range(6)

log = logging.getLogger("slmorse")


# --------------------------------------------------------------------------
# configuration and manifests


def _digest(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def load_configs(path=None):
    """``(PropagationConfig, DiscretizationConfig, BVPConfig)`` with overrides from a JSON file.

    The file may hold ``propagation``, ``discretization`` and ``bvp``
    sections; each key replaces the matching dataclass field.
    """
    prop, disc, bvp = PropagationConfig(), DiscretizationConfig(), BVPConfig()
    if path is None:
        return prop, disc, bvp
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    out = []
    for key, base in (("propagation", prop), ("discretization", disc), ("bvp", bvp)):
        section = d.get(key, {})
        names = {f.name for f in dataclasses.fields(base)}
        unknown = set(section) - names
        if unknown:
            raise ProblemFileError(f"{path}: unknown {key} field(s) {sorted(unknown)}")
        try:
            out.append(dataclasses.replace(base, **section))
        except (TypeError, ValueError) as exc:
            raise ProblemFileError(f"{path}: bad {key} section: {exc}") from exc
    return tuple(out)


class Manifest:
    """Record of one invocation, written as ``manifest.json`` next to the outputs."""

    def __init__(self, command: str, input_file, configs: dict):
        self.data = {
            "command": command,
            "input": os.path.basename(input_file),
            "input_sha256": _digest(input_file),
            "config": configs,
            "version": __version__,
            "outputs": [],
        }

    def add(self, path) -> None:
        self.data["outputs"].append(os.path.basename(path))

    def write(self, outdir) -> str:
        fname = os.path.join(outdir, "manifest.json")
        with open(fname, "w", encoding="utf-8") as fh:
            json.dump(self.data, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
        return fname


def _json_default(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def _outdir(args):
    d = args.outdir or (os.path.dirname(os.path.abspath(args.csv)) if getattr(args, "csv", None) else None)
    if d:
        os.makedirs(d, exist_ok=True)
    return d


def _emit(block: dict) -> None:
    print("--- machine-readable ---")
    print(json.dumps(block, sort_keys=True, default=_json_default))


# --------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    from .sturm import load_problem, validate

    p = load_problem(args.problem)
    rep = validate(p)
    print(f"problem: {p.name or args.problem} (n={p.n})")
    print(f"  C1 = {rep.C1:.6g}  C2 = {rep.C2:.6g}  C3 = {rep.C3:.6g}")
    print(f"  limit at -inf positive definite: {rep.L2_minus_ok}")
    print(f"  limit at +inf positive definite: {rep.L2_plus_ok}")
    print(f"  hyperbolic: {rep.hyperbolic}")
    for note in rep.notes:
        print(f"  note: {note}")
    print("status:", "ok" if rep.ok else "hypothesis violated")
    _emit(rep.as_dict())
    return EXIT_OK if rep.ok else EXIT_HYPOTHESIS


def cmd_morse(args) -> int:
    from .morse import morse_index, write_diagnostics_csv
    from .sturm import load_problem

    prop, disc, _ = load_configs(args.config)
    p = load_problem(args.problem)
    try:
        res = morse_index(p, prop, oracle=disc if args.oracle else None, plateau=args.plateau, strict_plateau=True)
        code = EXIT_OK
    except PlateauFailure as exc:
        print(f"plateau failure: {exc}", file=sys.stderr)
        res, code = exc.result, EXIT_MISMATCH
    print(f"index {res.index}")
    print(f"truncation [{res.truncation[0]:.6g}, {res.truncation[1]:.6g}]")
    if res.kernel_dim:
        print(f"kernel dimension {res.kernel_dim}")
    print(f"{'tau':>16} {'mult':>5} {'form inertia (+,0,-)':>22}")
    for c in res.crossings:
        print(f"{c.tau:16.10f} {c.multiplicity:5d} {str(tuple(c.form_inertia)):>22}")
    print(f"maslov cross-check {res.maslov_crosscheck}")
    if res.oracle_crosscheck is not None:
        print(f"oracle cross-check {res.oracle_crosscheck}")
    if res.plateau_verified is not None:
        print(f"plateau {'verified' if res.plateau_verified else 'FAILED'} (refined index {res.plateau_index})")
    if code == EXIT_OK and not res.consistent:
        print("cross-check mismatch", file=sys.stderr)
        code = EXIT_MISMATCH
    _emit(res.as_dict())
    outdir = _outdir(args)
    if outdir:
        man = Manifest("morse", args.problem, {"propagation": dataclasses.asdict(prop),
                                               "discretization": dataclasses.asdict(disc)})
        csv_path = args.csv or os.path.join(outdir, "diagnostics.csv")
        write_diagnostics_csv(csv_path, res.path, res.crossings)
        man.add(csv_path)
        fpath = os.path.join(outdir, "frames.csv")
        write_frames_csv(fpath, res.path)
        man.add(fpath)
        rpath = os.path.join(outdir, "result.json")
        with open(rpath, "w", encoding="utf-8") as fh:
            json.dump(res.as_dict(), fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
        man.add(rpath)
        man.write(outdir)
    return code


def cmd_oracle(args) -> int:
    from .oracle import level_counts, rough_spectrum
    from .sturm import load_problem

    _, disc, _ = load_configs(args.config)
    over = {k: v for k, v in (("T_o", args.T_o), ("N", args.N), ("richardson_levels", args.levels)) if v is not None}
    disc = dataclasses.replace(disc, **over)
    p = load_problem(args.problem)
    counts = level_counts(p, disc, args.threshold)
    print(f"counts below {args.threshold:g} by level: {counts}")
    block = {"counts": counts, "stable": len(set(counts)) == 1, "config": dataclasses.asdict(disc)}
    if args.eigs:
        ev = rough_spectrum(p, disc, args.eigs)
        print("smallest eigenvalues:", " ".join(f"{e:.8g}" for e in ev))
        block["eigenvalues"] = ev.tolist()
        if args.csv:
            with open(args.csv, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(["k", "eigenvalue"])
                w.writerows([k, f"{e:.12e}"] for k, e in enumerate(ev))
    _emit(block)
    return EXIT_OK if block["stable"] else EXIT_NUMERIC


def _frames(obj, key):
    try:
        return [np.asarray(F, dtype=float) for F in obj[key]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ProblemFileError(f"frames file: bad or missing {key!r}: {exc}") from exc


def cmd_indices(args) -> int:
    from .indices import (
        SampledPath,
        hormander_routes,
        maslov_index,
        random_common_transversal,
        triple_index,
        triple_index_witness,
    )
    from .symplectic import frame_from_columns

    try:
        with open(args.frames, encoding="utf-8") as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{args.frames}: line {exc.lineno}: {exc.msg}") from exc
    block = {}
    if args.which == "triple":
        a, b, k = (frame_from_columns(F, 1e-8) for F in _frames(d, "triple"))
        val = triple_index(a, b, k)
        rng = np.random.default_rng(args.seed)
        delta = random_common_transversal([a, b, k], rng)
        wit = triple_index_witness(a, b, k, delta)
        block = {"triple_index": val, "witness_route": wit, "consistent": val == wit}
        print(f"triple index {val} (witness route {wit})")
    elif args.which == "hormander":
        fr = [frame_from_columns(F, 1e-8) for F in _frames(d, "hormander")]
        first, second = hormander_routes(*fr)
        block = {"hormander_index": first, "second_route": second, "consistent": first == second}
        print(f"hormander index {first} (second route {second})")
    else:
        m = d.get("maslov", {})
        path = SampledPath(m.get("grid", []), _frames(m, "frames"))
        V = frame_from_columns(np.asarray(m.get("V"), dtype=float), 1e-8)
        res = maslov_index(path, V)
        block = {"maslov_index": res.index, "regular": res.regular,
                 "crossings": [float(c.location) for c in res.crossings]}
        print(f"maslov index {res.index}")
        block["consistent"] = res.regular
    print("consistent:", block["consistent"])
    _emit(block)
    return EXIT_OK if block["consistent"] else EXIT_MISMATCH


def write_frames_csv(fname, path) -> None:
    """One row per sample: ``tau``, frame entries row-major, ``sigma_min`` of the position block."""
    m, r, k = path.frames.shape
    smin = np.linalg.svd(path.bottom_blocks, compute_uv=False)[:, -1]
    with open(fname, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["tau"] + [f"z{i}{j}" for i in range(r) for j in range(k)] + ["sigma_min_W"])
        for t, F, s in zip(path.grid, path.frames, smin):
            w.writerow([f"{t:.10g}"] + [f"{v:.12e}" for v in F.ravel()] + [f"{s:.12e}"])


def _write_profile(fname, prof) -> None:
    n = prof.n
    with open(fname, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["xi"] + [f"w{i}" for i in range(n)] + [f"dw{i}" for i in range(n)])
        for x, u, up in zip(prof.grid, prof.w, prof.w_prime):
            w.writerow([f"{x:.10g}"] + [f"{v:.12e}" for v in u] + [f"{v:.12e}" for v in up])


def cmd_wave(args) -> int:
    from .morse import write_diagnostics_csv
    from .waves import check_H, instability_verdict, load_setup, solve_front

    prop, disc, bvp = load_configs(args.config)
    setup = load_setup(args.system)
    if not check_H(setup.system, setup.u_minus, setup.u_plus):
        raise HypothesisViolation("grad^2 F is not negative definite at both end states")
    prof = solve_front(setup.system, setup.c_guess, setup.u_minus, setup.u_plus, bvp, kind=setup.kind,
                       amplitude=setup.amplitude)
    print(f"{setup.kind}: c = {prof.c:.12g}  residual = {prof.residual:.2e}")
    outdir = _outdir(args)
    man = None
    if outdir:
        man = Manifest(f"wave {args.action}", args.system, {"propagation": dataclasses.asdict(prop),
                                                            "discretization": dataclasses.asdict(disc),
                                                            "bvp": dataclasses.asdict(bvp)})
        fname = os.path.join(outdir, "profile.csv")
        _write_profile(fname, prof)
        man.add(fname)
    code = EXIT_OK
    block = {"c": prof.c, "residual": prof.residual}
    if args.action == "analyze":
        res = instability_verdict(setup.system, prof, prop, oracle=disc if args.oracle else None,
                                  plateau=args.plateau)
        block.update(res.as_dict())
        block["critical_points"] = [round(x, 10) + 0.0 for x in res.critical_points]
        print(f"verdict: {res.verdict}")
        print(f"critical points: {block['critical_points']}")
        print(f"morse lower bound {res.morse_lower_bound}")
        if res.morse_index is not None:
            print(f"morse index {res.morse_index.index}")
            if not res.morse_index.consistent:
                print("cross-check mismatch", file=sys.stderr)
                code = EXIT_MISMATCH
            if man is not None:
                fname = os.path.join(outdir, "diagnostics.csv")
                write_diagnostics_csv(fname, res.morse_index.path, res.morse_index.crossings)
                man.add(fname)
        if code == EXIT_OK and res.verdict == "spectrally-unstable":
            code = EXIT_UNSTABLE
    _emit(block)
    if man is not None:
        man.write(outdir)
    return code


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="slmorse", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check the asymptotic hypotheses of a problem file")
    s.add_argument("problem")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("morse", help="Morse index from conjugate points")
    s.add_argument("problem")
    s.add_argument("--oracle", action="store_true", help="cross-check with the finite-element count")
    s.add_argument("--plateau", action="store_true", help="repeat with T doubled and a tighter start error")
    s.add_argument("--csv", help="diagnostics CSV path")
    s.add_argument("--outdir", help="directory for CSV, result and manifest")
    s.add_argument("--config", help="JSON file overriding config fields")
    s.set_defaults(func=cmd_morse)

    s = sub.add_parser("oracle", help="finite-element eigenvalue count")
    s.add_argument("problem")
    s.add_argument("--T-o", dest="T_o", type=float)
    s.add_argument("--N", type=int)
    s.add_argument("--levels", type=int)
    s.add_argument("--threshold", type=float, default=0.0)
    s.add_argument("--eigs", type=int, default=0, help="also print this many smallest eigenvalues")
    s.add_argument("--csv", help="write the eigenvalues to this CSV file")
    s.add_argument("--config")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("indices", help="triple, Hörmander or Maslov index from a frames file")
    s.add_argument("frames")
    s.add_argument("which", choices=["triple", "hormander", "maslov"])
    s.add_argument("--seed", type=int, default=0, help="seed for the transversal witness")
    s.set_defaults(func=cmd_indices)

    s = sub.add_parser("wave", help="traveling waves of a gradient reaction-diffusion system")
    s.add_argument("action", choices=["front", "analyze"])
    s.add_argument("system")
    s.add_argument("--oracle", action="store_true")
    s.add_argument("--plateau", action="store_true")
    s.add_argument("--outdir")
    s.add_argument("--config")
    s.set_defaults(func=cmd_wave)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (ProblemFileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (HypothesisViolation, NotHyperbolic, NotEquilibrium, SingularP) as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except PlateauFailure as exc:
        print(f"plateau failure: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except SLMorseError as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
