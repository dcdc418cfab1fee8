"""Command-line pipeline: generate, clean, analyze, train, evaluate, predict, serve.

The CLI is a thin client over the library; `serve` hands the loaded model
to the HTTP service. Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import json
from pathlib import Path

import click

from . import baselines, ingest, metallurgy, metrics, nn, persist, preprocess, stats
from .domain import Dataset, FEATURE_ORDER

ENV_MODEL = "PHOSFORGE_MODEL"


def _fail(message: str) -> "click.ClickException":
    return click.ClickException(message)


def _read_dataset(path: str) -> Dataset:
    try:
        dataset, errors = ingest.read_csv(path)
    except (OSError, ingest.CsvHeaderError) as exc:
        raise _fail(f"cannot read {path}: {exc}")
    for err in errors:
        click.echo(f"warning: {path}: {err}", err=True)
    if len(dataset) == 0:
        raise _fail(f"{path}: no valid records")
    return dataset


def _parse_floats(text: str, flag: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"cannot parse {text!r}", param_hint=flag)


def _parse_split(text: str, seed: int) -> preprocess.SplitSpec:
    parts = _parse_floats(text, "--split")
    if len(parts) != 3:
        raise click.BadParameter("expected three comma-separated percentages", param_hint="--split")
    total = sum(parts)
    if total <= 0:
        raise click.BadParameter("split percentages must be positive", param_hint="--split")
    try:
        return preprocess.SplitSpec(parts[0] / total, parts[1] / total, parts[2] / total, seed=seed)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--split")


@click.group()
def main() -> None:
    """End-point phosphorus prediction toolkit for scrap-based EAF heats."""


@main.command("generate-data")
@click.option("--n", "n_records", type=int, default=1700, show_default=True, help="Records to generate.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--noise-sd", type=float, default=0.0002, show_default=True, help="Endpoint noise sd (wt%).")
@click.option("--outlier-fraction", type=float, default=0.05, show_default=True)
@click.option("--nonlinear", is_flag=True, help="Add interaction/curvature terms to the latent function.")
@click.option("--output", type=click.Path(dir_okay=False), required=True)
def generate_data(n_records: int, seed: int, noise_sd: float, outlier_fraction: float,
                  nonlinear: bool, output: str) -> None:
    """Write a synthetic heat dataset calibrated to the plant statistics."""
    try:
        config = ingest.SynthConfig(
            n_records=n_records, noise_sd=noise_sd,
            outlier_fraction=outlier_fraction, seed=seed, nonlinear=nonlinear,
        )
    except ValueError as exc:
        raise _fail(str(exc))
    dataset = ingest.generate_synthetic(config)
    ingest.write_csv(dataset, output)
    click.echo(f"wrote {len(dataset)} records to {output}")


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=False), required=True)
@click.option("--output", type=click.Path(dir_okay=False), required=True)
def clean(input_path: str, output: str) -> None:
    """Remove box-plot outliers (single pass over all 13 columns)."""
    dataset = _read_dataset(input_path)
    try:
        cleaned, removed = preprocess.remove_outliers(dataset)
    except ValueError as exc:
        raise _fail(str(exc))
    if len(cleaned) == 0:
        raise _fail("cleaning removed every record")
    ingest.write_csv(cleaned, output)
    click.echo(f"removed {removed} of {len(dataset)} records; wrote {len(cleaned)} to {output}")


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=False), required=True)
@click.option("--output", type=click.Path(dir_okay=False), required=True)
def analyze(input_path: str, output: str) -> None:
    """Correlation report (r, t, two-sided p, stars) against endpoint P."""
    dataset = _read_dataset(input_path)
    try:
        report = stats.correlation_report(dataset)
    except ValueError as exc:
        raise _fail(str(exc))
    Path(output).write_text(stats.report_to_csv(report), encoding="utf-8")
    click.echo(f"analyzed {report.n} records; wrote {output}")
    for entry in report.entries:
        click.echo(
            f"  {entry.feature.value:16s} r={entry.r:+.4f} p={entry.p:.3e} {entry.significance.stars}"
        )


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=False), required=True)
@click.option("--output", "output_dir", type=click.Path(file_okay=False), required=True)
@click.option("--model", "model_kind", type=click.Choice(["ann", "rf", "svr"]), default="ann",
              show_default=True)
@click.option("--arch", default="128,128,128,64", show_default=True, help="Hidden layer widths.")
@click.option("--epochs", type=int, default=500, show_default=True)
@click.option("--batch", type=int, default=50, show_default=True)
@click.option("--lr", type=float, default=0.001, show_default=True)
@click.option("--split", "split_text", default="80,0,20", show_default=True,
              help="train,val,test percentages.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--early-stopping", is_flag=True, help="Stop on stalled validation loss (ANN).")
@click.option("--patience", type=int, default=50, show_default=True)
@click.option("--trees", type=int, default=100, show_default=True, help="Forest size (rf).")
@click.option("--svr-c", type=float, default=1.0, show_default=True)
@click.option("--svr-gamma", type=float, default=1.0 / 12.0, show_default=True)
@click.option("--svr-epsilon", type=float, default=0.01, show_default=True)
def train(input_path: str, output_dir: str, model_kind: str, arch: str, epochs: int,
          batch: int, lr: float, split_text: str, seed: int, early_stopping: bool,
          patience: int, trees: int, svr_c: float, svr_gamma: float, svr_epsilon: float) -> None:
    """Split the data, fit normalization on the train part, train a model.

    Writes model.json, test.csv (the held-out split), and for the network a
    train_report.json with the learning curves.
    """
    dataset = _read_dataset(input_path)
    spec = _parse_split(split_text, seed)
    try:
        train_set, val_set, test_set = preprocess.split(dataset, spec)
        norm = preprocess.fit_minmax(train_set)
    except ValueError as exc:
        raise _fail(str(exc))
    x_train, y_train, _ = preprocess.normalize_dataset(train_set, norm)
    if y_train is None:
        raise _fail("training data must carry endpoint_p on every record")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    model_path = out / "model.json"

    if model_kind == "ann":
        x_val = y_val = None
        if len(val_set) > 0:
            x_val, y_val, _ = preprocess.normalize_dataset(val_set, norm)
        try:
            config = nn.TrainConfig(
                epochs=epochs, batch_size=batch, learning_rate=lr, seed=seed,
                early_stopping=nn.EarlyStopping(patience=patience) if early_stopping else None,
            )
            arch_obj = nn.Architecture(hidden=tuple(int(w) for w in _parse_floats(arch, "--arch")))
            artifact, report = nn.train(x_train, y_train, arch_obj, config, norm, x_val, y_val)
        except ValueError as exc:
            raise _fail(str(exc))
        persist.save_model(artifact, model_path)
        report_doc = {
            "train_losses": report.train_losses,
            "val_losses": report.val_losses,
            "best_epoch": report.best_epoch,
            "total_iterations": report.total_iterations,
        }
        (out / "train_report.json").write_text(
            json.dumps(report_doc, sort_keys=True, indent=1) + "\n", encoding="utf-8"
        )
        click.echo(
            f"trained ann {arch_obj.widths} for {report.epochs_run} epochs"
            f" (final train mse {report.train_losses[-1]:.3e})"
        )
    elif model_kind == "rf":
        config = baselines.ForestConfig(n_trees=trees, seed=seed)
        forest = baselines.rf_train(x_train, y_train, config)
        persist.save_model(forest, model_path, norm_params=norm)
        click.echo(f"trained random forest with {trees} trees")
    else:
        config = baselines.SvrConfig(C=svr_c, gamma=svr_gamma, epsilon_tube=svr_epsilon)
        svr = baselines.svr_train(x_train, y_train, config)
        persist.save_model(svr, model_path, norm_params=norm)
        status = "converged" if svr.converged else f"stopped with KKT gap {svr.kkt_gap:.2e}"
        click.echo(f"trained svr ({len(svr.dual_coef)} support vectors, {status})")

    ingest.write_csv(test_set, out / "test.csv")
    if len(val_set) > 0:
        ingest.write_csv(val_set, out / "val.csv")
    click.echo(f"wrote {model_path} and test.csv ({len(test_set)} held-out records)")


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=False), envvar=ENV_MODEL, required=True)
@click.option("--input", "input_path", type=click.Path(exists=False), required=True)
@click.option("--thresholds", default="0.001,0.002,0.003,0.004", show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="JSON report path.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None, help="CSV report path.")
def evaluate(model_path: str, input_path: str, thresholds: str, output: str, csv_path: str) -> None:
    """Score a trained model against a measured dataset."""
    try:
        loaded = persist.load_model(model_path)
    except (OSError, persist.ModelFormatError) as exc:
        raise _fail(f"cannot load model: {exc}")
    dataset = _read_dataset(input_path)
    taus = _parse_floats(thresholds, "--thresholds")
    try:
        report = metrics.evaluate(loaded.model, dataset, loaded.norm_params, taus)
    except ValueError as exc:
        raise _fail(str(exc))
    doc = metrics.report_to_dict(report)
    if output:
        Path(output).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    if csv_path:
        Path(csv_path).write_text(metrics.report_to_csv(report), encoding="utf-8")
    click.echo(f"n={report.n} mse={report.mse:.6e} rmse={report.rmse:.6e} "
               f"r2={report.r2:.4f} r={report.r:.4f}")
    for tau, rate in sorted(report.hit_rates.items()):
        click.echo(f"  hit rate @ +/-{tau:g} wt%: {rate:.4f}")
    click.echo(f"  ({report.scale_note})")


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=False), envvar=ENV_MODEL, required=True)
@click.option("--input", "input_path", type=click.Path(exists=False), required=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
def predict(model_path: str, input_path: str, output: str) -> None:
    """Predict endpoint P for each record of a CSV (endpoint column optional)."""
    try:
        loaded = persist.load_model(model_path)
    except (OSError, persist.ModelFormatError) as exc:
        raise _fail(f"cannot load model: {exc}")
    dataset = _read_dataset(input_path)
    lines = ["heat_id,p_wtpct,p_ppm,out_of_range"]
    for rec in dataset.records:
        z, flagged = preprocess.normalize_record(
            [rec.features[f] for f in FEATURE_ORDER], loaded.norm_params
        )
        y_hat = float(metrics.predict_normalized(loaded.model, z.reshape(1, -1))[0])
        p = preprocess.denormalize(y_hat, preprocess.TARGET_KEY, loaded.norm_params)
        flags = ";".join(f.value for f in flagged)
        lines.append(f"{rec.heat_id},{p!r},{p * 1e4!r},{flags}")
    text = "\n".join(lines) + "\n"
    if output:
        Path(output).write_text(text, encoding="utf-8")
        click.echo(f"wrote predictions for {len(dataset)} records to {output}")
    else:
        click.echo(text, nl=False)


@main.group()
def metallurgy_group() -> None:
    """Dephosphorization calculators (partition coefficient, phosphate capacity)."""


# click uses the function name by default; expose the group as `metallurgy`.
main.add_command(metallurgy_group, name="metallurgy")


@metallurgy_group.command()
@click.option("--slag-p", type=float, required=True, help="%P in slag (wt%).")
@click.option("--metal-p", type=float, required=True, help="%P in metal (wt%).")
def partition(slag_p: float, metal_p: float) -> None:
    """L_p = (%P slag)/(%P metal)."""
    try:
        state = metallurgy.SlagMetalState(pct_p_slag=slag_p, pct_p_metal=metal_p)
        result = metallurgy.partition_coefficient(state)
    except ValueError as exc:
        raise _fail(str(exc))
    click.echo(repr(result.value))
    if not result.in_typical_band:
        click.echo(
            f"note: outside the typical band [{metallurgy.TYPICAL_LP_BAND[0]:g}, "
            f"{metallurgy.TYPICAL_LP_BAND[1]:g}]", err=True,
        )


@metallurgy_group.command("capacity-gas")
@click.option("--po4", type=float, required=True, help="%PO4 in slag (wt%).")
@click.option("--pp2", type=float, required=True, help="P_P2 partial pressure (atm).")
@click.option("--po2", type=float, required=True, help="P_O2 partial pressure (atm).")
def capacity_gas(po4: float, pp2: float, po2: float) -> None:
    """Phosphate capacity from the slag-gas equilibrium form."""
    try:
        state = metallurgy.SlagMetalState(pct_po4_slag=po4, p_p2=pp2, p_o2=po2)
        click.echo(repr(metallurgy.phosphate_capacity_gas(state)))
    except ValueError as exc:
        raise _fail(str(exc))


@metallurgy_group.command("capacity-from-lp")
@click.option("--lp", type=float, required=True, help="Partition coefficient L_p.")
@click.option("--kp", type=float, default=1.0, show_default=True, help="P dissolution equilibrium constant.")
@click.option("--fp", type=float, default=1.0, show_default=True, help="P activity coefficient in metal.")
@click.option("--po2", type=float, required=True, help="P_O2 partial pressure (atm).")
def capacity_from_lp(lp: float, kp: float, fp: float, po2: float) -> None:
    """Phosphate capacity from L_p via the partition relation."""
    try:
        state = metallurgy.SlagMetalState(k_p=kp, f_p=fp, p_o2=po2)
        click.echo(repr(metallurgy.phosphate_capacity_from_partition(state, lp)))
    except ValueError as exc:
        raise _fail(str(exc))


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=False), envvar=ENV_MODEL, required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(model_path: str, host: str, port: int) -> None:
    """Run the HTTP prediction service on one immutable model."""
    import uvicorn

    from .service import load_app

    try:
        app = load_app(model_path)
    except (OSError, ValueError) as exc:
        raise _fail(f"cannot load model: {exc}")
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
