"""Command-line front end.

``rpm critical``, ``rpm eigen``, ``rpm resonance`` and ``rpm nonsym`` run the
corresponding workflow and print one record per ``(k, D, d)``; ``rpm verify``
cross-checks Hankel results against the finite-difference oracle.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Dict, Iterable, List, Optional, Sequence

import gmpy2
from gmpy2 import mpc

from . import oracle, solver
from .numerics import PrecisionCtx, table_decimal, to_decimal
from .riccati_series import PotentialSpec, parse_potential
from .solver import RootSequence, SolveConfig

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NOT_STARTED = 3
EXIT_UNTRUSTED = 4

FORMATS = ("paper", "csv", "json-lines")

# required leading columns, then the fields needed to rebuild a record
CSV_COLUMNS = ("mode", "k", "D", "d", "value", "precision_bits", "converged", "oscillation",
               "full_value", "value2", "full_value2")


@dataclass(frozen=True)
class OutputRecord:
    mode: str
    k: int
    D: int
    d: int
    value: str
    precision_bits: int
    converged: bool
    oscillation: bool
    full_value: str
    # second number of the row: |Im E| for resonances, f0 for the well-centred expansion
    value2: str = ""
    full_value2: str = ""

    def csv_row(self) -> List[str]:
        return [_csv_cell(getattr(self, c)) for c in CSV_COLUMNS]

    @classmethod
    def from_csv_row(cls, row: Dict[str, str]) -> "OutputRecord":
        kinds = {f.name: f.type for f in fields(cls)}
        out = {}
        for name in CSV_COLUMNS:
            raw = row[name]
            kind = kinds[name]
            if kind == "int":
                out[name] = int(raw)
            elif kind == "bool":
                out[name] = raw == "true"
            else:
                out[name] = raw
        return cls(**out)


def _csv_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


# --------------------------------------------------------------------------
# records from solver results


def _full(x) -> str:
    return to_decimal(x, PrecisionCtx(max(x.precision, 192)).decimal_digits)


def _strings(seq: RootSequence, part, digits: int, rounding: str) -> Dict[int, str]:
    return {D: table_decimal(part(e), digits, rounding) for D, e in seq.entries.items()}


def _converged(strings: Dict[int, str]) -> Dict[int, bool]:
    """Row ``D`` is converged when rows ``D-2``, ``D-1`` and ``D`` print alike."""
    return {D: all(strings.get(D - j) == s for j in (1, 2)) for D, s in strings.items()}


def _real(e):
    return e.value


def _re(e):
    return e.value.real


def _abs_im(e):
    im = e.value.imag
    # negate at the value's own precision, not the ambient 53 bits
    with gmpy2.context(precision=im.precision):
        return -im if im < 0 else +im


def _f0(e):
    return e.extra


def sequence_records(mode: str, k: int, seq: RootSequence, digits: int, rounding: str,
                     first=_real, second=None) -> List[OutputRecord]:
    """One record per entry; ``first``/``second`` pick the reported numbers."""
    s1 = _strings(seq, first, digits, rounding)
    conv = _converged(s1)
    s2 = _strings(seq, second, digits, rounding) if second is not None else {}
    if second is not None:
        conv2 = _converged(s2)
        conv = {D: conv[D] and conv2[D] for D in conv}
    out = []
    for D in seq.dims:
        e = seq.entries[D]
        out.append(OutputRecord(
            mode=mode, k=k, D=D, d=seq.d, value=s1[D], precision_bits=e.precision_used,
            converged=conv[D], oscillation=e.oscillation, full_value=_full(first(e)),
            value2=s2.get(D, ""), full_value2=_full(second(e)) if second is not None else ""))
    return out


def _interleave(records: Iterable[OutputRecord]) -> List[OutputRecord]:
    return sorted(records, key=lambda r: (r.k, r.D, r.d))


# --------------------------------------------------------------------------
# rendering


def render(records: Sequence[OutputRecord], fmt: str, captions: Dict[int, str]) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow(r.csv_row())
        return buf.getvalue()
    if fmt == "json-lines":
        return "".join(json.dumps(asdict(r), sort_keys=False) + "\n" for r in records)
    return _render_table(records, captions)


def _render_table(records: Sequence[OutputRecord], captions: Dict[int, str]) -> str:
    if not records:
        return ""
    lines: List[str] = []
    two_numbers = any(r.value2 for r in records)
    for k in sorted({r.k for r in records}):
        rows = [r for r in records if r.k == k]
        if lines:
            lines.append("")
        lines.append(captions.get(k, f"k={k}"))
        if two_numbers:
            # one block per d, columns for the two numbers
            heads = captions.get(("columns", k), ("value", "value2"))
            for d in sorted({r.d for r in rows}):
                block = [r for r in rows if r.d == d]
                width = max(len(r.value) for r in block)
                lines.append(f"d={d}")
                lines.append(f"{'D':>3}  {heads[0]:<{width}}  {heads[1]}")
                for r in block:
                    mark = "*" if r.oscillation else ""
                    lines.append(f"{r.D:>3}  {r.value:<{width}}  {r.value2}{mark}")
        else:
            ds = sorted({r.d for r in rows})
            width = max(len(r.value) for r in rows)
            lines.append(f"{'D':>3}  " + "  ".join(f"{'d=' + str(d):<{width}}" for d in ds).rstrip())
            for D in sorted({r.D for r in rows}):
                cells = {r.d: r.value for r in rows if r.D == D}
                lines.append((f"{D:>3}  " + "  ".join(f"{cells.get(d, ''):<{width}}" for d in ds)).rstrip())
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# argument parsing


def _int_list(text) -> List[int]:
    """``"0,1,2"`` or ``"0-11"`` (or a mix) as a list of ints."""
    if isinstance(text, list):
        return [int(t) for t in text]
    out: List[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            raise argparse.ArgumentTypeError(f"malformed list {text!r}")
        if "-" in part[1:]:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def _potential(text) -> PotentialSpec:
    try:
        return parse_potential(str(text))
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _parity(text) -> int:
    t = str(text).lower()
    if t in ("even", "0"):
        return 0
    if t in ("odd", "1"):
        return 1
    raise argparse.ArgumentTypeError("parity must be even or odd")


def _pair(text) -> tuple:
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return tuple(parts)


def _common(p: argparse.ArgumentParser, dmin: int, dmax: int):
    p.add_argument("--config", help="JSON file whose keys mirror the flags; flags win")
    p.add_argument("--dmin", type=int, default=dmin, help=f"smallest determinant dimension (default {dmin})")
    p.add_argument("--dmax", type=int, default=dmax, help=f"largest determinant dimension (default {dmax})")
    p.add_argument("--d", type=_int_list, default=[0, 1], help="offsets d, e.g. 0,1 (default)")
    p.add_argument("--precision-bits", type=int, default=256, dest="precision_bits",
                   help="starting precision in bits (default 256; escalated as needed)")
    p.add_argument("--digits", type=int, default=40, help="significant digits reported (default 40)")
    p.add_argument("--rounding", choices=("round", "truncate"), default="round",
                   help="how reported digits are cut (default round)")
    p.add_argument("--format", choices=FORMATS, default="paper", help="output format; paper is the fixed-width table (default)")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rpm", description="Riccati-Pade quantisation: Hankel-determinant roots at high precision.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("critical", help="critical couplings g_k of -x^2 + g x^4")
    _common(p, 2, 30)
    p.add_argument("--k", type=_int_list, default=[0], help="states, e.g. 0 or 0,1,2 or 0-11")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for several k")

    p = sub.add_parser("eigen", help="bounds on one eigenvalue of an even polynomial potential")
    _common(p, 2, 30)
    p.add_argument("--potential", type=_potential, default="-20,2",
                   help='coefficients of x^2, x^4, ... (default "-20,2")')
    p.add_argument("--k", type=int, default=None, help="state index (default: lowest of --parity)")
    p.add_argument("--parity", type=_parity, default=None, help="even or odd")

    p = sub.add_parser("resonance", help="complex resonance energies")
    _common(p, 3, 26)
    p.add_argument("--potential", type=_potential, default="1,-0.1",
                   help='coefficients of x^2, x^4, ... (default "1,-0.1")')
    p.add_argument("--parity", type=_parity, default=0, help="even (default) or odd")
    p.add_argument("--start", type=_pair, default=("0.9", "-0.007"),
                   help="Newton start as re,im (default 0.9,-0.007)")

    p = sub.add_parser("nonsym", help="energy from the expansion about a potential minimum")
    _common(p, 3, 11)
    p.add_argument("--potential", type=_potential, default="-20,2",
                   help='coefficients of x^2, x^4 (default "-20,2")')
    p.add_argument("--pairing", choices=solver.PAIRINGS, default="offset",
                   help="second condition: H_D^{d+1} (offset, default) or H_{D+1}^d (dimension)")
    p.add_argument("--xm", default=None, help="expansion point (default: the positive minimum)")
    p.add_argument("--start", type=_pair, default=None, help="Newton start as E,f0")

    p = sub.add_parser("verify", help="cross-check Hankel roots against the grid oracle")
    p.add_argument("--config", help="JSON file whose keys mirror the flags; flags win")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser._subs = sub.choices  # for config defaults
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                conf = json.load(fh)
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        if not isinstance(conf, dict):
            parser.error("config file must hold a JSON object")
        sub = parser._subs[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(k.replace("-", "_") for k in conf) - known
        if unknown:
            parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
        defaults = {}
        for key, val in conf.items():
            if isinstance(val, list):
                val = ",".join(str(v) for v in val)
            elif not isinstance(val, (bool, str)):
                val = str(val)
            defaults[key.replace("-", "_")] = val
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _config(args, **extra) -> SolveConfig:
    return SolveConfig(D_min=args.dmin, D_max=args.dmax, d_values=tuple(args.d),
                       initial_bits=args.precision_bits, target_digits=args.digits, **extra)


# --------------------------------------------------------------------------
# commands


def _untrusted(seqs: Iterable[RootSequence]) -> bool:
    # entries whose solve converged but whose digits never stabilised in precision
    return any(e.converged and not e.trusted and not e.oscillation
               for s in seqs for e in s.entries.values())


def _not_started(seqs: Iterable[RootSequence]) -> bool:
    return any(not s.entries for s in seqs)


def _status(seqs: List[RootSequence]) -> int:
    if _not_started(seqs):
        for s in seqs:
            if not s.entries:
                log.error("%s d=%d: sequence did not start by D_max", s.label, s.d)
        return EXIT_NOT_STARTED
    for s in seqs:
        for note in s.notes:
            log.warning("%s d=%d: %s", s.label, s.d, note)
    if _untrusted(seqs):
        log.error("untrusted evaluation: precision cap reached without agreement")
        return EXIT_UNTRUSTED
    return EXIT_OK


def _critical_one(payload):
    k, cfg = payload
    return solver.critical_stream(k, cfg)


def cmd_critical(args):
    cfg = _config(args, mode="critical")
    ks = args.k
    if any(k < 0 for k in ks):
        raise ValueError("k must be >= 0")
    if args.jobs > 1 and len(ks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_critical_one, [(k, cfg) for k in ks]))
    else:
        reports = [solver.critical_stream(k, cfg) for k in ks]
    records, seqs, captions = [], [], {}
    for rep in reports:
        captions[rep.k] = f"g_{rep.k}: upper (d=0) and lower (d=1) bounds"
        for seq in (rep.upper, rep.lower):
            seqs.append(seq)
            records += sequence_records("critical", rep.k, seq, args.digits, args.rounding)
        for D in rep.violations:
            log.error("g_%d: bound order violated at D=%d", rep.k, D)
    return _interleave(records), captions, _status(seqs)


def _describe(pot: PotentialSpec) -> str:
    terms = [f"{c} x^{2 * j}" for j, c in enumerate(pot.even_coeffs, start=1)]
    return " + ".join(terms).replace("+ -", "- ")


def cmd_eigen(args):
    k, parity = args.k, args.parity
    if k is None:
        k = parity if parity is not None else 0
    elif parity is not None and k % 2 != parity:
        raise ValueError(f"state k={k} does not have the requested parity")
    cfg = _config(args, mode="eigenvalue", potential=args.potential, parity=k % 2)
    rep = solver.eigenvalue_bounds(args.potential, k, cfg)
    records = []
    for seq in (rep.lower, rep.upper):
        records += sequence_records("eigenvalue", k, seq, args.digits, args.rounding)
    for D in rep.violations:
        log.error("E_%d: bound order violated at D=%d", k, D)
    captions = {k: f"E_{k} of V(x) = {_describe(args.potential)}"}
    return _interleave(records), captions, _status([rep.lower, rep.upper])


def cmd_resonance(args):
    cfg = _config(args, mode="resonance", potential=args.potential, parity=args.parity)
    ctx = PrecisionCtx(args.precision_bits)
    with ctx.active():
        start = mpc(ctx.real(args.start[0]), ctx.real(args.start[1]))
    seqs = solver.resonance(args.potential, args.parity, start, cfg)
    records = []
    for d in sorted(seqs):
        records += sequence_records("resonance", args.parity, seqs[d], args.digits, args.rounding,
                                    first=_re, second=_abs_im)
    captions = {args.parity: f"resonance of V(x) = {_describe(args.potential)}",
                ("columns", args.parity): ("Re E", "|Im E|")}
    records.sort(key=lambda r: (r.d, r.D))
    return records, captions, _status(list(seqs.values()))


def cmd_nonsym(args):
    cfg = _config(args, mode="nonsym", potential=args.potential)
    seqs = solver.nonsym_eigenvalue(args.potential, cfg, pairing=args.pairing, x_m=args.xm,
                                    start=args.start)
    records = []
    for d in sorted(seqs):
        records += sequence_records("nonsym", 0, seqs[d], args.digits, args.rounding, second=_f0)
    captions = {0: f"expansion about a minimum of V(x) = {_describe(args.potential)}",
                ("columns", 0): ("E", "f0")}
    records.sort(key=lambda r: (r.d, r.D))
    return records, captions, _status(list(seqs.values()))


def verify_checks() -> List[tuple]:
    """``(name, passed, detail)`` for each oracle cross-check."""
    checks = []
    cfg = SolveConfig(D_max=14, mode="critical")
    g0 = solver.critical_stream(0, cfg).upper.last().value
    e = oracle.critical_check(0, float(g0))
    checks.append(("E_0 at the Hankel critical coupling g_0", abs(e) < 1e-6, f"E_0 = {e:.3e}"))

    deep = PotentialSpec(("-20", "2"))
    levels = oracle.grid_eigenvalues([-20.0, 2.0], oracle.default_grid([-20.0, 2.0], 2), 2)
    for k in (0, 1):
        rep = solver.eigenvalue_bounds(deep, k, SolveConfig(D_max=20, mode="eigenvalue"))
        hank = float(rep.lower.last().value)
        diff = abs(levels[k] - hank)
        checks.append((f"deep-well E_{k}: oracle vs Hankel", diff < 1e-6,
                       f"oracle {levels[k]:.10f}, Hankel {hank:.10f}"))

    harm = oracle.grid_eigenvalues([1.0], oracle.default_grid([1.0], 2), 2)
    for k, exact in ((0, 1.0), (1, 3.0)):
        diff = abs(harm[k] - exact)
        checks.append((f"harmonic E_{k} = {exact:g}", diff < 1e-8, f"oracle error {diff:.2e}"))
    rep = solver.eigenvalue_bounds(PotentialSpec(("1",)), 0, SolveConfig(D_max=3, mode="eigenvalue"))
    ok = all(rep.lower[D] == 1 for D in rep.lower.dims) and rep.lower.dims
    checks.append(("harmonic Hankel root E = 1", bool(ok), f"D = {rep.lower.dims}"))
    return checks


def cmd_verify(args) -> int:
    checks = verify_checks()
    lines = [f"{'PASS' if ok else 'FAIL'}  {name}: {detail}" for name, ok, detail in checks]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if all(ok for _, ok, _ in checks) else 1


def _emit(text: str, path: Optional[str]):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


COMMANDS = {
    "critical": cmd_critical,
    "eigen": cmd_eigen,
    "resonance": cmd_resonance,
    "nonsym": cmd_nonsym,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "verify":
        return cmd_verify(args)
    if args.dmin < 2 or args.dmax < args.dmin:
        print(f"rpm {args.command}: need 2 <= dmin <= dmax (got {args.dmin}, {args.dmax})",
              file=sys.stderr)
        return EXIT_USAGE
    try:
        records, captions, status = COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"rpm {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(render(records, args.format, captions), args.out)
    return status


if __name__ == "__main__":
    sys.exit(main())
