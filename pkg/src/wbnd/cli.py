"""Command-line interface.

Subcommands: ``detect`` (single image to mask PGM plus fit report),
``udwt`` (band dumps), ``bench`` (config file to CSV), ``metrics`` (two
maps to a key-value quality report) and ``noise`` (seeded noisy copy of an
image). Exit code 0 on success, nonzero with a one-line diagnostic on
error.
"""

import sys

import click

from . import bench as bench_mod
from .detector import DetectorConfig, PREPROCESS_MODES, wbnd_detect
from .hmm import fit_report_to_text
from .metrics import evaluate
from .raster import (
    NoiseSpec,
    add_gaussian_noise,
    load_binary_map,
    load_image,
    save_binary_map,
    save_image,
)
from .udwt import dump_bands, udwt_forward


def _fail(exc: BaseException) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


def _detector_options(fn):
    fn = click.option("--levels", default=3, show_default=True, help="Decomposition levels.")(fn)
    fn = click.option(
        "--preprocess",
        default="none",
        show_default=True,
        type=click.Choice(PREPROCESS_MODES),
        help="Pixel-domain preprocessing before decomposition.",
    )(fn)
    fn = click.option("--wiener-window", default=3, show_default=True)(fn)
    fn = click.option("--median-window", default=3, show_default=True)(fn)
    fn = click.option(
        "--combine", default="or", show_default=True, type=click.Choice(["or", "and"])
    )(fn)
    fn = click.option("--em-tol", default=1e-6, show_default=True)(fn)
    fn = click.option("--em-max-iter", default=100, show_default=True)(fn)
    fn = click.option("--workers", default=1, show_default=True, help="Worker threads.")(fn)
    return fn


@click.group()
def main():
    """Wavelet-domain Bayesian edge-strength detection toolkit."""


@main.command()
@click.argument("image", type=click.Path())
@click.option("-o", "--output", required=True, type=click.Path(), help="Mask PGM path.")
@click.option("--report", type=click.Path(), help="Write the two band fit reports here.")
@_detector_options
def detect(image, output, report, levels, preprocess, wiener_window, median_window, combine, em_tol, em_max_iter, workers):
    """Run the detector on IMAGE and write the edge-strength mask."""
    try:
        cfg = DetectorConfig(
            levels=levels,
            em_tol=em_tol,
            em_max_iter=em_max_iter,
            preprocess=preprocess,
            wiener_window=wiener_window,
            median_window=median_window,
            combine=combine,
        )
        mask, (rep_h, rep_v) = wbnd_detect(load_image(image), cfg, n_workers=workers)
        save_binary_map(mask, output)
        if report:
            with open(report, "w", encoding="utf-8") as fh:
                fh.write("[horizontal]\n" + fit_report_to_text(rep_h))
                fh.write("[vertical]\n" + fit_report_to_text(rep_v))
    except Exception as exc:  # noqa: BLE001
        _fail(exc)
    click.echo(f"wrote {output}")


@main.command()
@click.argument("image", type=click.Path())
@click.option("-o", "--outdir", required=True, type=click.Path(), help="Dump directory.")
@click.option("--levels", default=3, show_default=True)
def udwt(image, outdir, levels):
    """Decompose IMAGE and dump rescaled band PGMs plus a scales sidecar."""
    try:
        written = dump_bands(udwt_forward(load_image(image), levels), outdir)
    except Exception as exc:  # noqa: BLE001
        _fail(exc)
    click.echo(f"wrote {len(written)} bands to {outdir}")


@main.command()
@click.argument("config", type=click.Path())
@click.option("-o", "--output", required=True, type=click.Path(), help="CSV path.")
@click.option("--workers", default=1, show_default=True)
def bench(config, output, workers):
    """Run the benchmark described by the CONFIG key-value file."""
    try:
        bench_cfg, det_cfg = bench_mod.load_bench_config(config)
        report = bench_mod.run_benchmark(bench_cfg, det_cfg, n_workers=workers)
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(report.csv)
    except Exception as exc:  # noqa: BLE001
        _fail(exc)
    for err in report.errors:
        click.echo(f"warning: {err}", err=True)
    click.echo(f"wrote {output}")


@main.command()
@click.argument("candidate", type=click.Path())
@click.argument("truth", type=click.Path())
@click.option("-o", "--output", type=click.Path(), help="Optional key-value output file.")
def metrics(candidate, truth, output):
    """Score CANDIDATE against TRUTH (both rasters, thresholded at 128)."""
    try:
        rep = evaluate(load_binary_map(candidate), load_binary_map(truth))
    except Exception as exc:  # noqa: BLE001
        _fail(exc)
    tp, fp, fn, tn = rep.counts
    text = (
        f"pratt = {rep.pratt!r}\nbaddeley = {rep.baddeley!r}\nkappa = {rep.kappa!r}\n"
        f"tp = {tp}\nfp = {fp}\nfn = {fn}\ntn = {tn}\n"
    )
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    click.echo(text, nl=False)


@main.command()
@click.argument("image", type=click.Path())
@click.option("-o", "--output", required=True, type=click.Path(), help="Noisy PGM path.")
@click.option("--sigma", required=True, type=float, help="Noise standard deviation.")
@click.option("--seed", default=0, show_default=True, type=int)
def noise(image, output, sigma, seed):
    """Add seeded Gaussian noise to IMAGE (output rounded/clipped to 8-bit)."""
    try:
        noisy = add_gaussian_noise(load_image(image), NoiseSpec(sigma=sigma, seed=seed))
        save_image(noisy, output)
    except Exception as exc:  # noqa: BLE001
        _fail(exc)
    click.echo(f"wrote {output}")


if __name__ == "__main__":
    main()
