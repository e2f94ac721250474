"""ablate command: the mode-seeking x augmentation grid."""

from typing import Optional

import typer
from rich.table import Table
from typing_extensions import Annotated

from eegvis.cli.options import ConfigOption, DataOption, OutOption, SeedOption, VerboseOption, prepare_run
from eegvis.cli.utils import (
    EXIT_RUNTIME,
    console,
    exit_on_error,
    print_error,
    print_header,
    print_success,
    print_warning,
)
from eegvis.core.run_dir import ABLATION_SUMMARY
from eegvis.pipeline import REGIMES, RegimeOutcome, load_run_dataset, run_ablation


def parse_regimes(value: str) -> list[str]:
    names = [name.strip() for name in value.split(",") if name.strip()]
    unknown = [name for name in names if name not in REGIMES]
    if unknown or not names:
        raise typer.BadParameter(f"Unknown regimes {unknown}; choose from {', '.join(REGIMES)}")
    return list(dict.fromkeys(names))


def _report(outcome: RegimeOutcome) -> None:
    if outcome.status == "completed":
        r = outcome.report
        print_success(f"{outcome.regime}: IS {r.is_mean:.3f}, consistency {r.class_consistency:.3f}, diversity {r.diversity:.4f}")
    else:
        print_warning(f"{outcome.regime}: failed ({outcome.error})")


def _show_summary(outcomes: list[RegimeOutcome]) -> None:
    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Regime", style="cyan", no_wrap=True)
    table.add_column("Status")
    table.add_column("IS")
    table.add_column("Consistency")
    table.add_column("Diversity")
    for outcome in outcomes:
        r = outcome.report
        if r is None:
            table.add_row(outcome.regime, f"[error]{outcome.status}[/error]", "-", "-", "-")
        else:
            table.add_row(
                outcome.regime, f"[success]{outcome.status}[/success]",
                f"{r.is_mean:.3f} ± {r.is_std:.3f}", f"{r.class_consistency:.3f}", f"{r.diversity:.4f}",
            )
    console.print(table)


def ablate_command(
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    data: DataOption = None,
    regimes: Annotated[
        str, typer.Option("--regimes", help="Comma-separated subset of none, ms_only, aug_only, both")
    ] = "none,ms_only,aug_only,both",
    steps: Annotated[Optional[int], typer.Option("--steps", help="Generator updates per regime")] = None,
    verbose: VerboseOption = False,
) -> None:
    """
    Train and evaluate one GAN per loss regime with a shared seed.

    The encoder and surrogate classifier are trained once in the output
    directory; each regime gets its own sub-run. A failed regime is recorded
    in ablation_summary.csv and the remaining regimes still run.

    Examples:
      eegvis ablate --out runs/ablation
      eegvis ablate --regimes ms_only --steps 500
      eegvis ablate --config cfg.json --seed 3
    """
    selected = parse_regimes(regimes)
    with exit_on_error("Ablation"):
        cfg = prepare_run(config, {"seed": seed, "output_dir": out, "data.path": data, "gan.steps": steps}, verbose)
        ds = load_run_dataset(cfg)
        print_header(f"Ablation: {', '.join(selected)}")
        outcomes = run_ablation(cfg, ds, cfg.output_dir, selected, on_regime=_report)

    _show_summary(outcomes)
    summary = cfg.output_dir / ABLATION_SUMMARY
    failed = [o.regime for o in outcomes if o.status != "completed"]
    if failed:
        print_error(f"Regimes failed: {', '.join(failed)} (summary: {summary})")
        raise typer.Exit(EXIT_RUNTIME)
    print_success(f"Summary written to {summary}")
