"""Command-line entry points: ``gradal check/reduce/meta/validate-config``.

Exit codes: 0 when everything passed, 1 when a check or probe failed, and 2
for usage errors, unparseable input, or bad configs.
"""

from __future__ import annotations

import pathlib
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import click

from .configs import load_config
from .dmgl import CheckerConfig
from .errors import CheckError, Code
from .frontend import (
    Diagnostic,
    Span,
    check_module,
    parse_module,
    reduce_module,
    register_mode_tags,
    render_error,
    render_judgment,
    render_trace,
)
from .glad import GladCheckerConfig
from .modes import ModeTheory
from .reduction import default_fuel
from .semiring import SemiringSpec
from .syntax import GladTyping, GradedTyping, MixedTyping
from . import metatheory as meta


def _positive_fuel(ctx: click.Context, param: click.Parameter, value: int | None) -> int | None:
    if value is not None and value <= 0:
        raise click.UsageError("--fuel must be a positive step budget")
    return value


def _parse_failure_lines(path: str, e: CheckError) -> str:
    line = e.payload.get("line")
    col = e.payload.get("col")
    if isinstance(line, int) and isinstance(col, int):
        span = Span(str(e.payload.get("file", path)), line, col)
        message = e.message.removeprefix(f"{span}: ")
        return render_error(Diagnostic("error", e.code, span, message, e.rule, dict(e.payload)))
    return f"{path}: error: {e.code.value}: {e.message}"


@click.group()
def main() -> None:
    """Type checking and reduction for graded and many-mode calculi."""


@main.command()
@click.option("--config", "config_ref", default=None, help="Config id or file, used when a module has no config line.")
@click.option("--fuel", type=int, default=None, callback=_positive_fuel, help="Conversion/reduction step budget (default: GRADAL_FUEL or 10000).")
@click.option("--strict-glad", is_flag=True, help="Require declared type constants in many-mode judgments.")
@click.option("--dump-derivations", "dump_dir", type=click.Path(file_okay=False), default=None, help="Write one derivation file per accepted statement.")
@click.argument("files", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
def check(config_ref: str | None, fuel: int | None, strict_glad: bool, dump_dir: str | None, files: tuple[str, ...]) -> None:
    """Check every declaration and assertion in the given module files."""
    dump: Callable[[str, str], None] | None = None
    if dump_dir is not None:
        out_dir = pathlib.Path(dump_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

        def dump(name: str, text: str) -> None:
            (out_dir / name).write_text(text)

    def check_one(path: str) -> tuple[list[str], bool, bool]:
        lines: list[str] = []
        try:
            mod = parse_module(
                pathlib.Path(path).read_text(), source=path, default_config=config_ref
            )
        except CheckError as e:
            return [_parse_failure_lines(path, e)], False, True
        report = check_module(mod, fuel=fuel, strict_glad=strict_glad, dump=dump)
        unusable = False
        for diag in report.diagnostics:
            lines.append(render_error(diag))
            unusable = unusable or diag.code == Code.PARSE_ERROR
        if report.failed:
            lines.append(f"{path}: {report.failed} of {report.checked} statements failed")
        else:
            lines.append(f"{path}: ok ({report.checked} statements)")
        return lines, bool(report.failed), unusable

    # files check in parallel; output stays in argument order
    with ThreadPoolExecutor(max_workers=min(8, len(files))) as pool:
        results = list(pool.map(check_one, files))
    any_failed = any(failed for _, failed, _ in results)
    any_unusable = any(unusable for _, _, unusable in results)
    for lines, _, _ in results:
        for line in lines:
            click.echo(line)
    if any_unusable:
        sys.exit(2)
    if any_failed:
        sys.exit(1)


@main.command()
@click.option("--config", "config_ref", default=None, help="Config id or file, used when the module has no config line.")
@click.option("--fuel", type=int, default=None, callback=_positive_fuel, help="Reduction step budget (default: GRADAL_FUEL or 10000).")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
def reduce(config_ref: str | None, fuel: int | None, file: str) -> None:
    """Normalize every `reduce` statement in a module, printing full traces."""
    try:
        mod = parse_module(
            pathlib.Path(file).read_text(), source=file, default_config=config_ref
        )
    except CheckError as e:
        click.echo(_parse_failure_lines(file, e))
        sys.exit(2)
    traces = reduce_module(mod, fuel=fuel)
    if not traces:
        click.echo(f"{file}: no reduce statements")
        return
    exhausted = False
    for index, (stmt, trace) in enumerate(traces, start=1):
        if index > 1:
            click.echo("")
        click.echo(f"reduce {index} ({stmt.fragment}):")
        click.echo(render_trace(trace, stmt.fragment))
        exhausted = exhausted or trace.exhausted
    if exhausted:
        sys.exit(1)


_SUITES = ("subst", "subject-reduction", "contraction", "radj", "inversion", "ctx-vec")

# which fragments each suite covers, per config kind
_SEMIRING_FRAGMENTS = {
    "subst": ("graded", "mixed", "linear"),
    "subject-reduction": ("graded", "mixed"),
    "contraction": ("graded",),
    "radj": ("mixed",),
    "inversion": ("graded",),
    "ctx-vec": ("graded",),
}
_THEORY_FRAGMENTS = {
    "subst": ("glad",),
    "subject-reduction": ("glad",),
    "contraction": ("glad",),
}


def _meta_one(
    suite: str,
    fragment: str,
    cfg: CheckerConfig | GladCheckerConfig,
    rng: random.Random,
    max_depth: int,
) -> tuple[list, str]:
    """Run one generated case; returns (judgments involved, outcome note)."""
    if suite == "subst":
        if fragment == "graded":
            pair = meta.gen_graded_subst_pair(cfg, rng, max_depth)
            meta.substitution_check_graded(cfg, pair)
        elif fragment == "mixed":
            pair = meta.gen_mixed_subst_pair(cfg, rng, max_depth)
            meta.substitution_check_mixed(cfg, pair)
        elif fragment == "linear":
            pair = meta.gen_linear_subst_pair(cfg, rng, max_depth)
            meta.substitution_check_linear(cfg, pair)
        else:
            pair = meta.gen_glad_subst_pair(cfg, rng, max_depth)
            meta.substitution_check_glad(cfg, pair)
        return [_case_judgment(pair.outer), _case_judgment(pair.inner)], "ok"
    if suite == "subject-reduction":
        if fragment == "graded":
            case = meta.gen_graded_case(cfg, rng, max_depth)
            steps = meta.subject_reduction_probe_graded(cfg, case)
        elif fragment == "mixed":
            case = meta.gen_mixed_case(cfg, rng, max_depth)
            steps = meta.subject_reduction_probe_mixed(cfg, case)
        else:
            case = meta.gen_glad_case(cfg, rng, max_depth)
            steps = meta.subject_reduction_probe_glad(cfg, case)
        return [_case_judgment(case)], f"{steps} steps"
    if suite == "contraction":
        if fragment == "graded":
            cc = meta.gen_graded_contraction(cfg, rng, max_depth)
            meta.contraction_check_graded(cfg, cc)
        else:
            cc = meta.gen_glad_contraction(cfg, rng, max_depth)
            meta.contraction_check_glad(cfg, cc)
        return [_case_judgment(cc.case)], "ok"
    if suite == "radj":
        case = meta.gen_mixed_case(cfg, rng, max_depth, min_zone=1)
        meta.radj_left_check(cfg, case)
        return [_case_judgment(case)], "ok"
    if suite == "inversion":
        case = meta.gen_graded_case(cfg, rng, max_depth)
        shape = meta.inversion_probe_graded(cfg, case)
        return [_case_judgment(case)], shape or "skipped"
    # ctx-vec
    gen = meta.GradedGen(cfg, rng, max_depth)
    ctx = gen.gen_ctx(max_depth)
    meta.ctx_vector_independence_probe(cfg, ctx, rng, samples=5)
    return [], "ok"


def _case_judgment(case) -> object:
    if isinstance(case, meta.GradedCase):
        return GradedTyping(case.delta, case.ctx, case.term, case.type_)
    if isinstance(case, meta.MixedCase):
        return MixedTyping(case.delta, case.gctx, case.lctx, case.term, case.type_)
    return GladTyping(case.delta, case.ctx, case.mode, case.term, case.type_)


def _failure_module(config_ref: str, fragment: str, judgments: list) -> str:
    frag = "mixed" if fragment == "linear" else fragment
    lines = [f"config {config_ref};", ""]
    for j in judgments:
        if isinstance(j, (GradedTyping, MixedTyping, GladTyping)):
            lines.append(f"assert {frag} accept {render_judgment(j)};")
    return "\n".join(lines) + "\n"


@main.command(name="meta")
@click.option("--suite", type=click.Choice(_SUITES), required=True)
@click.option("--config", "config_ref", required=True, help="Config id or file.")
@click.option("--count", type=int, default=100, show_default=True, help="Generated cases per fragment.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--fragment", "only_fragment", type=click.Choice(("graded", "mixed", "linear", "glad")), default=None, help="Restrict to one fragment.")
@click.option("--max-depth", type=int, default=3, show_default=True, help="Generator term-depth budget.")
@click.option("--dump-failures", "dump_dir", type=click.Path(file_okay=False), default=None, help="Write a re-checkable module per failing case.")
def meta_cmd(suite: str, config_ref: str, count: int, seed: int, only_fragment: str | None, max_depth: int, dump_dir: str | None) -> None:
    """Probe a metatheoretic property on randomly generated derivations."""
    try:
        config = load_config(config_ref)
    except CheckError as e:
        click.echo(f"config '{config_ref}': {e.code.value}: {e.message}")
        sys.exit(2)
    if isinstance(config, SemiringSpec):
        fragments = _SEMIRING_FRAGMENTS.get(suite)
        cfg: CheckerConfig | GladCheckerConfig = CheckerConfig(config, fuel=default_fuel())
    else:
        fragments = _THEORY_FRAGMENTS.get(suite)
        cfg = GladCheckerConfig(config, fuel=default_fuel())
        register_mode_tags(config)
    if not fragments:
        raise click.UsageError(
            f"suite '{suite}' does not apply to a "
            + ("mode-theory" if isinstance(config, ModeTheory) else "semiring")
            + " config"
        )
    if only_fragment is not None:
        if only_fragment not in fragments:
            raise click.UsageError(
                f"suite '{suite}' with this config covers: {', '.join(fragments)}"
            )
        fragments = (only_fragment,)
    if count <= 0:
        raise click.UsageError("--count must be positive")

    out_dir = None
    if dump_dir is not None:
        out_dir = pathlib.Path(dump_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

    click.echo(f"suite: {suite}")
    click.echo(f"config: {config.id}")
    click.echo(f"seed: {seed}")
    click.echo(f"count: {count}")
    total_failures = 0
    for fragment in fragments:
        failed = 0
        for i in range(count):
            rng = random.Random(f"{suite}:{fragment}:{seed}:{i}")
            try:
                judgments, _ = _meta_one(suite, fragment, cfg, rng, max_depth)
            except (CheckError, AssertionError) as e:
                failed += 1
                detail = (
                    f"{e.code.value}: {e.message}" if isinstance(e, CheckError) else str(e)
                )
                click.echo(f"FAIL {fragment} {i}: {detail}")
                if out_dir is not None:
                    # regenerate to recover the judgments for the repro file
                    repro: list = []
                    try:
                        rng2 = random.Random(f"{suite}:{fragment}:{seed}:{i}")
                        repro, _ = _meta_one(suite, fragment, cfg, rng2, max_depth)
                    except (CheckError, AssertionError):
                        pass
                    name = f"{suite}-{fragment}-seed{seed}-{i:04d}.gradal"
                    (out_dir / name).write_text(
                        _failure_module(config_ref, fragment, repro)
                    )
                    click.echo(f"wrote {out_dir / name}")
        click.echo(f"fragment {fragment}: {count - failed} passed, {failed} failed")
        total_failures += failed
    if total_failures:
        click.echo(f"result: {total_failures} failures")
        sys.exit(1)
    click.echo("result: ok")


@main.command(name="validate-config")
@click.argument("ref")
def validate_config(ref: str) -> None:
    """Load a semiring or mode-theory config and run its law suite."""
    try:
        config = load_config(ref)
    except CheckError as e:
        click.echo(f"config '{ref}': {e.code.value}: {e.message}")
        sys.exit(2)
    if isinstance(config, SemiringSpec):
        if config.is_nat:
            detail = "the naturals"
        else:
            detail = f"elements {', '.join(config.carrier)}"
        click.echo(f"semiring '{config.id}': ok ({detail})")
    else:
        click.echo(f"mode theory '{config.id}': ok (modes {', '.join(config.modes)})")


if __name__ == "__main__":
    main()
