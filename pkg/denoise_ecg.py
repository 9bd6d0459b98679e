#!/usr/bin/env python3
"""
ECG Denoiser
Command-line front end: denoise a record, inject calibrated noise, generate a
synthetic ECG, run the benchmark protocol or sweep NLWT parameters.
"""

import functools
import json
import logging
import math
import os
import sys
import time
from dataclasses import replace
from typing import Dict, List, Optional, Tuple

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.panel import Panel
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn
from rich.table import Table

from ecg_nlwt import __version__
from ecg_nlwt.config import load_config, resolve_nlm, resolve_nlwt
from ecg_nlwt.errors import EcgDenoiseError
from ecg_nlwt.io_bench import METHODS, REPORT_FORMATS, BenchmarkPlan, RecordFile, read_csv, run_benchmark, write_csv, write_report
from ecg_nlwt.nlm import denoise_nlm
from ecg_nlwt.nlwt import denoise_nlwt
from ecg_nlwt.signal_model import NoiseSpec, add_awgn, estimate_sigma, synth_ecg
from ecg_nlwt.tuning import default_grid, tune

DEFAULT_CONFIG = "config.yaml"
SEED = click.IntRange(0, 2 ** 64 - 1)

# Human-facing output goes to stderr; stdout carries machine-readable lines only.
console = Console(stderr=True)
logger = logging.getLogger("denoise_ecg")


def setup_logging(verbose: bool, quiet: bool):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )


def handle_errors(fn):
    """Report library and I/O errors in red and exit 1; usage errors are left to click (exit 2)."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (EcgDenoiseError, OSError) as e:
            console.print(f"[red]Error: {escape(str(e))}[/red]")
            sys.exit(1)
        except KeyboardInterrupt:
            console.print("\n[yellow]Cancelled by user.[/yellow]")
            sys.exit(1)
    return wrapper


def nlwt_options(fn):
    """NLWT tunables; flag names follow the short notation L, M, m, tau, c, k."""
    options = [
        click.option("--L", "block_half_width", type=int, help="Block half-width (block = 2L+1 samples)"),
        click.option("--M", "search_half_width", type=int, help="Search window half-width in samples"),
        click.option("--m", "max_blocks", type=int, help="Maximum blocks per SDM [default: 2(2L+1)]"),
        click.option("--tau", "match_threshold", type=float, help="Matching threshold on projected distance"),
        click.option("--c", "shrink_coeff", type=float, help="Hard-threshold multiplier, lambda = c*sigma"),
        click.option("--k", "shift", type=int, help="Reference block shift [default: L]"),
        click.option("--wavelet", type=str, help="Orthogonal wavelet name (haar, db2, db4, sym4, ...)"),
        click.option("--projector", type=click.Choice(["pca", "dct"]), help="Block feature projection"),
        click.option("--n-components", "n_components", type=int, help="Projected feature count"),
        click.option("--levels", type=int, help="2-D DWT depth [default: min(3, log2 of the SDM's smaller side)]"),
        click.option("--refit-every", "refit_every", type=int, help="References sharing one PCA fit"),
        click.option("--threshold-policy", "threshold_policy", type=click.Choice(["fixed", "visu"])),
        click.option("--threshold-mode", "threshold_mode", type=click.Choice(["hard", "soft"])),
        click.option("--aggregation", type=click.Choice(["weighted", "uniform"])),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


NLWT_FLAGS = ("block_half_width", "search_half_width", "max_blocks", "match_threshold", "shrink_coeff", "shift",
              "wavelet", "projector", "n_components", "levels", "refit_every", "threshold_policy",
              "threshold_mode", "aggregation")


def nlm_options(fn):
    options = [
        click.option("--nlm-patch", "patch_half_width", type=int, help="NLM patch half-width"),
        click.option("--nlm-search", "nlm_search_half_width", type=int, help="NLM search window half-width"),
        click.option("--mu", type=float, help="NLM bandwidth (absolute)"),
        click.option("--mu-factor", "mu_factor", type=float, help="NLM bandwidth as a multiple of sigma"),
        click.option("--exclude-center/--include-center", "exclude_center", default=None,
                     help="Leave the sample itself out of its NLM average"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _pop_flags(kwargs: Dict) -> Tuple[Dict, Dict]:
    nlwt = {name: kwargs.pop(name) for name in NLWT_FLAGS}
    nlm = {
        "patch_half_width": kwargs.pop("patch_half_width"),
        "search_half_width": kwargs.pop("nlm_search_half_width"),
        "mu": kwargs.pop("mu"),
        "mu_factor": kwargs.pop("mu_factor"),
        "exclude_center": kwargs.pop("exclude_center"),
    }
    return nlwt, nlm


def _given(flags: Dict) -> Dict:
    return {k: v for k, v in flags.items() if v is not None}


@click.group()
@click.version_option(__version__)
@click.option("--config", "config_path", type=click.Path(dir_okay=False),
              help=f"YAML or JSON configuration file [default: {DEFAULT_CONFIG} if present]")
@click.option("-v", "--verbose", is_flag=True, help="Debug logging")
@click.option("--quiet", is_flag=True, help="Warnings only")
@click.pass_context
@handle_errors
def cli(ctx, config_path, verbose, quiet):
    """ECG Denoiser - nonlocal wavelet shrinkage with an NLM baseline and benchmarks."""
    setup_logging(verbose, quiet)
    if config_path is None and os.path.exists(DEFAULT_CONFIG):
        config_path = DEFAULT_CONFIG
    config = load_config(config_path) if config_path else {}
    if config_path:
        logger.debug("loaded config %s", config_path)
    ctx.obj = {"config": config, "config_path": config_path, "quiet": quiet}


@cli.command()
@click.option("-i", "--input", "input_path", required=True, type=click.Path(dir_okay=False), help="Noisy record CSV")
@click.option("-o", "--output", "output_path", required=True, type=click.Path(dir_okay=False), help="Denoised record CSV")
@click.option("--method", type=click.Choice(METHODS), default="nlwt", show_default=True)
@click.option("--sigma", type=float, help="Noise standard deviation")
@click.option("--estimate-sigma", "estimate", is_flag=True, help="Estimate sigma from the finest wavelet details")
@click.option("--fs", type=float, help="Sample rate override in Hz")
@click.option("--channel", "channels", multiple=True, help="Channel(s) to denoise [default: all]")
@click.option("--workers", type=int, default=1, show_default=True, help="Threads for NLWT shrinkage")
@nlwt_options
@nlm_options
@click.pass_context
@handle_errors
def denoise(ctx, input_path, output_path, method, sigma, estimate, fs, channels, workers, **flags):
    """Denoise every channel of a record and print a JSON summary."""
    config = ctx.obj["config"]
    nlwt_flags, nlm_flags = _pop_flags(flags)
    if sigma is not None and estimate:
        raise click.UsageError("give either --sigma or --estimate-sigma, not both")
    needs_sigma = method == "nlwt" or (nlm_flags["mu"] is None and (config.get("nlm") or {}).get("mu") is None)
    if sigma is None and not estimate and needs_sigma:
        raise click.UsageError("missing noise level: pass --sigma or --estimate-sigma")
    if sigma is not None and not sigma > 0:
        raise click.BadParameter("sigma must be > 0", param_hint="--sigma")

    record = read_csv(input_path, fs)
    if method == "nlwt":
        params = resolve_nlwt(config, nlwt_flags, record.sample_rate_hz)
    else:
        params = resolve_nlm(config, nlm_flags)

    start = time.perf_counter()
    sigmas = {}
    denoised = {}
    for channel in channels or record.channel_names:
        noisy = record.signal(channel)
        channel_sigma = sigma
        if estimate:
            channel_sigma = estimate_sigma(noisy)
            logger.info("estimated sigma for %s: %.6g", channel, channel_sigma)
        sigmas[channel] = channel_sigma
        if method == "nlwt":
            denoised[channel] = denoise_nlwt(noisy, channel_sigma, params, workers=workers)
        else:
            denoised[channel] = denoise_nlm(noisy, params, channel_sigma)
    elapsed = 1000.0 * (time.perf_counter() - start)

    write_csv(RecordFile.from_signals(record.name, denoised), output_path)
    logger.info("wrote %s", output_path)
    summary = {
        "method": method,
        "input": str(input_path),
        "output": str(output_path),
        "channels": list(denoised),
        "samples": len(record),
        "sample_rate_hz": record.sample_rate_hz,
        "sigma": sigmas,
        "sigma_source": "estimated" if estimate else "given" if sigma is not None else None,
        "params": params.to_dict(),
        "runtime_ms": round(elapsed, 3),
    }
    click.echo(json.dumps(summary))


@cli.command("add-noise")
@click.option("-i", "--input", "input_path", required=True, type=click.Path(dir_okay=False), help="Clean record CSV")
@click.option("-o", "--output", "output_path", required=True, type=click.Path(dir_okay=False), help="Noisy record CSV")
@click.option("--snr", "snr_db", type=float, help="Target SNR in dB [default: config noise.snr_db or 10]")
@click.option("--seed", type=SEED, help="Noise seed; channel c uses seed + c [default: config noise.seed or 0]")
@click.option("--fs", type=float, help="Sample rate override in Hz")
@click.pass_context
@handle_errors
def add_noise(ctx, input_path, output_path, snr_db, seed, fs):
    """Add white Gaussian noise at a target SNR and print the sigma of each channel."""
    noise = ctx.obj["config"].get("noise") or {}
    snr_db = snr_db if snr_db is not None else float(noise.get("snr_db", 10.0))
    seed = seed if seed is not None else int(noise.get("seed", 0))

    record = read_csv(input_path, fs)
    noisy = {}
    for index, channel in enumerate(record.channel_names):
        noisy[channel], sigma = add_awgn(record.signal(channel), NoiseSpec(snr_db, (seed + index) % 2 ** 64))
        click.echo(f"{channel} sigma={sigma:.17g}")
    write_csv(RecordFile.from_signals(record.name, noisy), output_path)
    logger.info("wrote %s at %g dB (seed %d)", output_path, snr_db, seed)


@cli.command()
@click.option("-i", "--input", "inputs", multiple=True, type=click.Path(dir_okay=False),
              help="Record CSV(s) [default: synthetic ECG]")
@click.option("-o", "--output", "output_path", default="benchmark_report.json", show_default=True,
              type=click.Path(dir_okay=False), help="Report file")
@click.option("--format", "report_format", type=click.Choice(REPORT_FORMATS), help="Report format [default: from extension]")
@click.option("--methods", help="Comma-separated methods, e.g. nlm,nlwt")
@click.option("--snr", "snr_levels", multiple=True, type=float, help="SNR level in dB (repeatable)")
@click.option("--realizations", type=int, help="Noise realizations per SNR level")
@click.option("--seed", "base_seed", type=SEED, help="Base seed of the noise realizations")
@click.option("--channel", "channels", multiple=True, help="Channel(s) to benchmark [default: all]")
@click.option("--beats", type=int, help="Beats of the synthetic record")
@click.option("--fs", type=float, help="Sample rate override in Hz")
@click.option("--estimate-sigma/--injected-sigma", "estimate", default=None,
              help="Denoise with estimated instead of injected sigma")
@click.option("--timing/--no-timing", "record_timing", default=None,
              help="Record runtime_ms (reports stop being byte-stable)")
@click.option("--workers", type=int, default=1, show_default=True, help="Parallel benchmark cells")
@nlwt_options
@nlm_options
@click.pass_context
@handle_errors
def benchmark(ctx, inputs, output_path, report_format, methods, snr_levels, realizations, base_seed, channels,
              beats, fs, estimate, record_timing, workers, **flags):
    """Run the noise-realization benchmark and write a report."""
    config = dict(ctx.obj["config"])
    nlwt_flags, nlm_flags = _pop_flags(flags)
    config["nlwt"] = {**(config.get("nlwt") or {}), **_given(nlwt_flags)}
    config["nlm"] = {**(config.get("nlm") or {}), **_given(nlm_flags)}
    section = config.get("benchmark") or {}

    if inputs:
        records = [read_csv(path, fs) for path in inputs]
    else:
        beats = beats or int(section.get("beats", 30))
        records = BenchmarkPlan.default(beats, fs or 360.0).records
    plan = BenchmarkPlan.from_config(records, config)

    overrides = {
        "methods": tuple(m.strip() for m in methods.split(",") if m.strip()) if methods else None,
        "snr_levels": tuple(snr_levels) or None,
        "realizations": realizations,
        "base_seed": base_seed,
        "channels": tuple(channels) or None,
        "estimate_sigma": estimate,
        "record_timing": record_timing,
    }
    plan = replace(plan, **_given(overrides)).validate()

    if not ctx.obj["quiet"]:
        console.print(Panel.fit(
            "[bold blue]ECG Denoiser benchmark[/bold blue]\n"
            f"{len(plan.records)} record(s), methods {', '.join(plan.methods)}, "
            f"SNR {', '.join(f'{s:g}' for s in plan.snr_levels)} dB, {plan.realizations} realization(s)",
            border_style="blue",
        ))

    with Progress(SpinnerColumn(), TextColumn("[progress.description]{task.description}"), BarColumn(),
                  TextColumn("{task.completed}/{task.total}"), console=console, disable=ctx.obj["quiet"]) as progress:
        task = progress.add_task("Running benchmark cells...", total=len(plan.cells()))
        reports = run_benchmark(plan, workers=workers, on_cell=lambda done, total: progress.update(task, completed=done))

    fmt = report_format or ("csv" if str(output_path).lower().endswith(".csv") else "json")
    provenance = {
        "version": __version__,
        "config_path": ctx.obj["config_path"],
        "synthetic_beats": None if inputs else beats,
        **plan.to_dict(),
    }
    write_report(reports, output_path, fmt, plan=provenance)
    if not ctx.obj["quiet"]:
        display_averages([r for r in reports if r.kind == "average"])
    console.print(f"[green]Report saved to {output_path}[/green]")


def display_averages(rows):
    """Table of per-(method, SNR) averages."""
    if not rows:
        console.print("[yellow]No benchmark rows.[/yellow]")
        return
    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Method", style="cyan")
    table.add_column("SNR in (dB)", justify="right")
    table.add_column("SNR_imp (dB)", style="green", justify="right")
    table.add_column("MSE", justify="right")
    table.add_column("PRD (%)", style="yellow", justify="right")
    for row in rows:
        table.add_row(
            row.method,
            f"{row.target_snr_db:g}",
            "perfect" if row.snr_imp_db is None else f"{row.snr_imp_db:.2f}",
            f"{row.mse:.3e}",
            f"{row.prd_percent:.2f}",
        )
    console.print(table)


@cli.command()
@click.option("-o", "--output", "output_path", required=True, type=click.Path(dir_okay=False), help="Record CSV")
@click.option("--beats", type=int, default=30, show_default=True)
@click.option("--fs", type=float, default=360.0, show_default=True, help="Sample rate in Hz")
@click.option("--bpm", type=float, default=60.0, show_default=True, help="Heart rate")
@click.option("--seed", type=SEED, default=0, show_default=True, help="Beat-length jitter seed")
@click.option("--jitter", type=float, default=0.02, show_default=True, help="Relative beat-length jitter")
@click.option("--channel", default="synth", show_default=True, help="Channel name")
@handle_errors
def synth(output_path, beats, fs, bpm, seed, jitter, channel):
    """Write a synthetic ECG record normalized to ±1."""
    signal = synth_ecg(beats, fs, bpm, seed, jitter, label=channel)
    write_csv(RecordFile.from_signals("synth", {channel: signal}), output_path)
    logger.info("wrote %d samples to %s", len(signal), output_path)


@cli.command("tune")
@click.option("-i", "--input", "input_path", type=click.Path(dir_okay=False), help="Clean record CSV [default: synthetic ECG]")
@click.option("--channel", help="Channel to tune on [default: first]")
@click.option("--fs", type=float, help="Sample rate override in Hz")
@click.option("--snr", "snr_db", type=float, default=10.0, show_default=True)
@click.option("--realizations", type=int, default=5, show_default=True)
@click.option("--seed", type=SEED, default=0, show_default=True, help="Base seed of the noise realizations")
@click.option("--grid-c", "grid_c", multiple=True, type=float, help="c values [default: ±25 % around 2*sqrt(ln(2L+1))]")
@click.option("--grid-tau", "grid_tau", multiple=True, type=float, help="tau values [default: 1-5 % of 2(2L+1)]")
@click.option("--top", type=int, default=10, show_default=True, help="Rows to display")
@click.option("-o", "--output", "output_path", type=click.Path(dir_okay=False), help="Write all rows as JSON")
@nlwt_options
@click.pass_context
@handle_errors
def tune_cmd(ctx, input_path, channel, fs, snr_db, realizations, seed, grid_c, grid_tau, top, output_path, **flags):
    """Sweep c and tau on one channel and rank them by mean SNR improvement."""
    if input_path:
        record = read_csv(input_path, fs)
        signal = record.signal(channel or record.channel_names[0])
    else:
        signal = synth_ecg(30, fs or 360.0)
    base = resolve_nlwt(ctx.obj["config"], flags, signal.sample_rate_hz)
    grid = default_grid(base.L)
    if grid_c:
        grid["shrink_coeff"] = list(grid_c)
    if grid_tau:
        grid["match_threshold"] = list(grid_tau)

    with Progress(SpinnerColumn(), TextColumn("[progress.description]{task.description}"), BarColumn(),
                  TextColumn("{task.completed}/{task.total}"), console=console, disable=ctx.obj["quiet"]) as progress:
        task = progress.add_task("Sweeping parameter pairs...", total=math.prod(len(v) for v in grid.values()))
        rows = tune(signal, grid, snr_db, realizations, seed, base,
                    on_combination=lambda done, total: progress.update(task, completed=done))

    if output_path:
        with open(output_path, "w") as f:
            json.dump([row.to_dict() for row in rows], f, indent=2)
        console.print(f"[green]Tuning rows saved to {output_path}[/green]")

    table = Table(show_header=True, header_style="bold magenta", title=f"NLWT tuning at {snr_db:g} dB")
    table.add_column("c", justify="right", style="cyan")
    table.add_column("tau", justify="right", style="cyan")
    table.add_column("SNR_imp (dB)", justify="right", style="green")
    table.add_column("PRD (%)", justify="right", style="yellow")
    for row in rows[:top]:
        table.add_row(f"{row.params['c']:.3f}", f"{row.params['tau']:.3f}", f"{row.snr_imp_db:.2f}", f"{row.prd_percent:.2f}")
    console.print(table)


def main(argv: Optional[List[str]] = None):
    cli.main(args=argv, prog_name="denoise_ecg")


if __name__ == "__main__":
    main()
