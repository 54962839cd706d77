"""Command-line front end.

Every command prints one JSON document with top-level keys "command",
"tower" and "result" (plus "timing" under --timing).  List commands also
accept --format csv.  Exit codes: 0 success, 1 internal check failed,
2 usage error, 3 domain error, 4 guard refusal.
"""

from __future__ import annotations

import csv
import io
import json
import random
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import click

from .errors import DomainError, GuardError, InvariantViolation

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_DOMAIN, EXIT_GUARD = 0, 1, 2, 3, 4


@dataclass
class Report:
    command: dict
    tower: Optional[dict]
    result: Any
    timing: Optional[float] = None
    rows: Optional[list[dict]] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = {"command": self.command, "tower": self.tower, "result": self.result}
        if self.timing is not None:
            out["timing"] = self.timing
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        data = json.loads(text)
        return cls(data["command"], data["tower"], data["result"], data.get("timing"))

    def to_csv(self) -> str:
        if self.rows is None:
            raise click.UsageError("--format csv is only available for list commands")
        buf = io.StringIO()
        if self.rows:
            writer = csv.DictWriter(buf, fieldnames=list(self.rows[0]), lineterminator="\n")
            writer.writeheader()
            writer.writerows(self.rows)
        return buf.getvalue()


def _is_odd_prime(n: int) -> bool:
    return n > 2 and all(n % p for p in range(2, int(n**0.5) + 1))


def _check_prime(ctx, param, value):
    if value is not None and (not _is_odd_prime(value) or value > 13):
        raise click.BadParameter("l must be an odd prime at most 13")
    return value


def _emit(ctx: click.Context, build: Callable[[], Report]) -> None:
    opts = ctx.params
    start = time.perf_counter()
    try:
        report = build()
    except GuardError as exc:
        click.echo(f"refused: {exc}", err=True)
        ctx.exit(EXIT_GUARD)
    except DomainError as exc:
        click.echo(f"domain error: {exc}", err=True)
        ctx.exit(EXIT_DOMAIN)
    except InvariantViolation as exc:
        click.echo(f"check failed: {exc}", err=True)
        ctx.exit(EXIT_CHECK)
    report.command = {"name": ctx.info_name,
                      **{k: v for k, v in opts.items() if v is not None and k not in OUTPUT_OPTIONS}}
    if opts.get("timing"):
        report.timing = round(time.perf_counter() - start, 6)
    text = report.to_csv() if opts.get("fmt") == "csv" else report.to_json() + "\n"
    out = opts.get("out")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


OUTPUT_OPTIONS = ("fmt", "out", "seed", "timing")


def output_options(func):
    """Options shared by every command; they are not echoed in the report."""
    func = click.option("--timing", is_flag=True, help="Add wall-clock seconds (output no longer reproducible).")(func)
    func = click.option("--seed", type=int, default=0, show_default=True, help="Seed for randomized commands.")(func)
    func = click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None,
                        help="Write output to this file instead of stdout.")(func)
    func = click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
                        show_default=True)(func)
    return func


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def main() -> None:
    """Breuil modules with tame descent data: classifications and checks."""


# -- rank1 ------------------------------------------------------------------------------

@main.command()
@click.option("--l", "l", type=int, required=True, callback=_check_prime)
@click.option("--list", "list_all", is_flag=True, help="List every isomorphism class.")
@click.option("--char", "char", type=int, nargs=3, default=None, metavar="R A C", help="Character of M(r, a, c).")
@output_options
@click.pass_context
def rank1(ctx, l: int, list_all: bool, char, **_output):
    """Rank-1 modules over the eprime tower and their characters."""
    from .rank1 import Rank1Module, character, class_representatives
    from .upoly import TameTower

    if list_all == (char is not None):
        raise click.UsageError("pass exactly one of --list and --char")

    def build() -> Report:
        tw = TameTower.eprime(l)
        if char is not None:
            r, a, c = char
            if not 0 <= r <= tw.e_K or r % tw.d0 or not 1 <= a < l or not 0 <= c < tw.d0:
                raise click.BadParameter(f"need r in [0, {tw.e_K}] divisible by {tw.d0}, a in [1, {l - 1}], "
                                         f"c in [0, {tw.d0 - 1}]", param_hint="--char")
            M = Rank1Module(tw, r, a, c)
            return Report({}, tw.describe(), {"module": repr(M), "character": character(M).as_dict()})
        rows = []
        for M in class_representatives(tw):
            chi = character(M)
            rows.append({"r": M.r, "a": M.a, "c": M.c, "unit_class": chi.unit_class, "cyclo_exp": chi.cyclo_exp})
        return Report({}, tw.describe(), {"count": len(rows), "classes": rows}, rows=rows)

    _emit(ctx, build)


# -- lattice ----------------------------------------------------------------------------

def ascii_region(l: int, k: int, points: list[tuple[int, int]]) -> str:
    """Grid with r' across and s' upward; '*' marks a model."""
    marks = set(points)
    lines = []
    for sp in range(l + 1, -1, -1):
        cells = "".join(" *" if (rp, sp) in marks else " ." for rp in range(l + 2))
        lines.append(f"{sp:>3} |{cells}")
    lines.append("    +" + "--" * (l + 2))
    lines.append("      " + " ".join(str(rp % 10) for rp in range(l + 2)))
    return "\n".join(lines)


def svg_region(l: int, k: int, points: list[tuple[int, int]], maximal, minimal) -> str:
    cell, pad = 40, 40
    size = (l + 2) * cell + 2 * pad
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
             f'<text x="{pad}" y="{pad // 2}" font-size="14">l = {l}, k = {k}</text>']

    def xy(rp: int, sp: int) -> tuple[int, int]:
        return pad + rp * cell + cell // 2, size - pad - sp * cell - cell // 2

    for rp in range(l + 2):
        for sp in range(l + 2):
            x, y = xy(rp, sp)
            parts.append(f'<circle cx="{x}" cy="{y}" r="2" fill="#bbb"/>')
    for idx, (rp, sp) in enumerate(points):
        x, y = xy(rp, sp)
        colour = "#c0392b" if idx in maximal else "#2471a3" if idx in minimal else "#222"
        parts.append(f'<circle cx="{x}" cy="{y}" r="7" fill="{colour}"/>')
    parts.append(f'<text x="{size // 2}" y="{size - 8}" font-size="12">r\'</text>')
    parts.append(f'<text x="6" y="{size // 2}" font-size="12">s\'</text>')
    parts.append("</svg>")
    return "\n".join(parts)


@main.command()
@click.option("--l", "l", type=int, required=True, callback=_check_prime)
@click.option("--k", "k", type=int, required=True)
@click.option("--a", "a", type=int, default=1, show_default=True)
@click.option("--b", "b", type=int, default=None, help="Defaults to a, or a + 1 when that would be split.")
@click.option("--c", "c", type=int, default=0, show_default=True)
@click.option("--d", "d", type=int, default=None, help="Defaults to c + k mod l - 1.")
@click.option("--plot", is_flag=True, help="Add an ASCII grid and an SVG of the region.")
@click.option("--svg", "svg_path", type=click.Path(dir_okay=False, writable=True), default=None,
              help="Also write the SVG to this file (implies --plot).")
@output_options
@click.pass_context
def lattice(ctx, l: int, k: int, a: int, b: Optional[int], c: int, d: Optional[int], plot: bool,
            svg_path: Optional[str], **_output):
    """Integral models of one representation, ordered by generic-fibre isomorphisms."""
    from .rank2 import lattice as build_lattice
    from .upoly import TameTower

    if not 0 <= k <= l:
        raise click.BadParameter(f"k must lie in [0, {l}]", param_hint="--k")
    w = l - 1
    d = (c + k) % w if d is None else d
    if (d - c - k) % w:
        raise click.BadParameter(f"k = {k} does not match d - c = {(d - c) % w} mod {w}", param_hint="--k")
    if b is None:
        b = a if (a, c % w) != (a, d % w) else a % w + 1
    for name, val in (("--a", a), ("--b", b)):
        if not 1 <= val < l:
            raise click.BadParameter(f"must lie in [1, {l - 1}]", param_hint=name)

    def build() -> Report:
        tw = TameTower.eprime(l)
        rep = build_lattice(tw, k, a, b, c % w, d % w)
        result = rep.as_dict()
        rows = [{"r": N.params[0], "s": N.params[3], "n": N.n, "module": repr(N)} for N in rep.modules]
        if plot or svg_path:
            points = [(N.params[0] // w, N.params[3] // w) for N in rep.modules]
            svg = svg_region(l, k, points, rep.maximal, rep.minimal)
            result["plot"] = {"ascii": ascii_region(l, k, points), "svg": svg}
            if svg_path:
                with open(svg_path, "w", encoding="utf-8") as fh:
                    fh.write(svg + "\n")
        return Report({}, tw.describe(), result, rows=rows)

    _emit(ctx, build)


# -- admissible -------------------------------------------------------------------------

@main.command()
@click.option("--l", "l", type=int, required=True, callback=_check_prime)
@click.option("--m", "m", type=int, required=True)
@click.option("--brute", is_flag=True, help="Run the full sweep and compare with the closed form.")
@output_options
@click.pass_context
def admissible(ctx, l: int, m: int, brute: bool, **_output):
    """Rank-2 modules compatible with the type omega_2^m + omega_2^{lm}."""
    from .admissible import (TypeTau, closed_form_admissible, rho_bar_of, sweep_admissible,
                             theorem_main_forms)
    from .upoly import TameTower

    def build() -> Report:
        tau = TypeTau(l, m)
        closed = closed_form_admissible(tau)
        result: dict = {"m": tau.m, "i": tau.i, "j": tau.j}
        if brute:
            kept, dropped = sweep_admissible(tau)
            if set(kept) != set(closed):
                raise InvariantViolation("sweep and closed form disagree: "
                                         f"{sorted(map(repr, set(kept) ^ set(closed)))}")
            reasons: dict[str, int] = {}
            for item in dropped:
                reasons[item.reason] = reasons.get(item.reason, 0) + 1
            result["sweep"] = {"kept": len(kept), "dropped": dict(sorted(reasons.items()))}
        modules = []
        forms = set()
        for N in closed:
            rho = rho_bar_of(N)
            forms.add(rho.inertia_form())
            modules.append({"module": repr(N), "params": list(N.params), "rho_bar": rho.as_dict()})
        expected = theorem_main_forms(tau)
        result.update({
            "count": len(modules),
            "modules": modules,
            "inertia_forms": [list(f) for f in sorted(forms)],
            "expected_forms": [list(f) for f in sorted(expected)],
            "forms_match": forms <= expected,
        })
        rows = [{"module": x["module"], "top": x["rho_bar"]["top"]["text"],
                 "bottom": x["rho_bar"]["bottom"]["text"], "peu_ramifie": x["rho_bar"]["peu_ramifie"]}
                for x in modules]
        return Report({}, TameTower.eprime(l).describe(), result, rows=rows)

    _emit(ctx, build)


# -- ext4 -------------------------------------------------------------------------------

@main.command()
@click.option("--l", "l", type=int, required=True, callback=_check_prime)
@click.option("--i", "i", type=int, required=True)
@click.option("--j", "j", type=int, required=True)
@click.option("--a", "a", type=int, required=True)
@click.option("--b", "b", type=int, required=True)
@click.option("--oracle", is_flag=True, help="Recompute Ext^1 from scratch and require dimension 2.")
@output_options
@click.pass_context
def ext4(ctx, l: int, i: int, j: int, a: int, b: int, oracle: bool, **_output):
    """Self-extensions of an admissible rank-2 module."""
    from .ext4 import Rank4Module, admissible_bases, constrained_subspace, constrained_subspace_brute, oracle_ext_dim
    from .upoly import TameTower

    if not 1 <= i <= l:
        raise click.BadParameter(f"must lie in [1, {l}]", param_hint="--i")

    def build() -> Report:
        tw = TameTower.eprime(l)
        found = admissible_bases(l, i, j, a, b)
        if not found:
            raise DomainError(f"(i, j, a, b) = ({i}, {j}, {a}, {b}) gives no admissible nonsplit module")
        entries = []
        for M in found:
            directions = [(1, 0), (0, 1)]
            valid = [vz for vz in directions if Rank4Module(M, *vz).is_valid() and Rank4Module(M, *vz).is_exact()]
            brute = constrained_subspace_brute(M)
            dim_brute = 0
            while l**dim_brute < len(brute):
                dim_brute += 1
            dim_closed, basis = constrained_subspace(M)
            if dim_brute != dim_closed or l**dim_brute != len(brute):
                raise InvariantViolation(f"constraint count {len(brute)} does not match dimension {dim_closed}")
            entry = {
                "module": repr(M),
                "normal_form_dimension": len(valid),
                "constrained_dimension": dim_closed,
                "constrained_basis": [list(v) for v in basis],
            }
            if oracle:
                dim = oracle_ext_dim(M)
                if dim != 2:
                    raise InvariantViolation(f"oracle found dimension {dim} for {M!r}")
                entry["oracle_dimension"] = dim
            entries.append(entry)
        return Report({}, tw.describe(), {"modules": entries})

    _emit(ctx, build)


# -- cohom ------------------------------------------------------------------------------

@main.command()
@click.option("--l", "l", type=int, required=True, callback=_check_prime)
@click.option("--e", "e", type=int, required=True)
@click.option("--f", "f", type=int, default=1, show_default=True, help="Relative residue degree.")
@click.option("--n", "n", type=int, required=True, help="Truncation length of k[u]/u^n.")
@output_options
@click.pass_context
def cohom(ctx, l: int, e: int, f: int, n: int, **_output):
    """Exhaustive H^1 of k[u]/u^n and of its units."""
    from .cohom import cocycle_representatives, h1_sizes_bruteforce, mult_cocycle_class
    from .upoly import TameTower

    def build() -> Report:
        tw = TameTower(l, e, f_rel=f)
        additive, multiplicative = h1_sizes_bruteforce(tw, n)
        reps = []
        for idx, cocycle in enumerate(cocycle_representatives(tw, n)):
            cls, _ = mult_cocycle_class(cocycle)
            reps.append({"power": idx, "class": cls,
                         "values": [str(v) for v in cocycle.values]})
        return Report({}, tw.describe(), {"n": n, "h1_additive": additive, "h1_multiplicative": multiplicative,
                                          "representatives": reps})

    _emit(ctx, build)


# -- faults -----------------------------------------------------------------------------

@main.command()
@click.option("--l", "l", type=int, default=3, show_default=True, callback=_check_prime)
@click.option("--count", type=int, default=1000, show_default=True)
@output_options
@click.pass_context
def faults(ctx, l: int, count: int, **_output):
    """Seeded single-coefficient perturbations, each checked by the validator.

    A perturbation the validator accepts is re-checked by the slow flat
    validator: if that also accepts, the perturbed data is a valid structure
    (reported as benign); otherwise it is a genuine miss.
    """
    from .breuil import inject_fault, random_fault, validate, validate_flat
    from .upoly import TameTower

    seed = ctx.params["seed"]

    def build() -> Report:
        tw = TameTower.eprime(l)
        pool = fault_pool(tw)
        rng = random.Random(seed)
        missed, benign = [], []
        by_site: dict[str, int] = {}
        for _ in range(count):
            name, M, dd = rng.choice(pool)
            fault = random_fault(M, dd, rng)
            by_site[fault.site] = by_site.get(fault.site, 0) + 1
            perturbed = inject_fault(M, dd, fault)
            if not validate(*perturbed):
                (benign if validate_flat(*perturbed) else missed).append({"module": name, **fault.as_dict()})
        caught = count - len(missed) - len(benign)
        return Report({}, tw.describe(), {"injected": count, "caught": caught, "benign": benign,
                                          "by_site": dict(sorted(by_site.items())), "missed": missed})

    _emit(ctx, build)


def fault_pool(tower) -> list[tuple[str, Any, Any]]:
    """Valid modules to perturb: every rank-1 normal form and a spread of rank-2 ones."""
    from .rank1 import all_rank1
    from .rank2 import make_ext_eprime

    l = tower.l
    pool = [(repr(M), M.module, M.descent) for M in all_rank1(tower)]
    w = l - 1
    for rp in range(l + 2):
        for sp in range(l + 2):
            params = (rp * w, 1, 0, sp * w, l - 1, (rp + sp) % w)
            N = make_ext_eprime(tower, *params)
            if N is not None:
                pool.append((repr(N), N.module, N.descent))
    return pool


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
