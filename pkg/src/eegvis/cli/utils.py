"""CLI utilities for pretty output, logging and error reporting."""

import logging
from collections.abc import Iterator
from contextlib import contextmanager

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.theme import Theme

from eegvis.core.errors import (
    ConfigError,
    FormatError,
    IntegrityError,
    InvalidDataError,
    MissingArtifactError,
    ShapeError,
    UnsupportedDtypeError,
)

# Custom theme for eegvis
custom_theme = Theme({
    "info": "cyan",
    "warning": "yellow",
    "error": "bold red",
    "success": "bold green",
    "highlight": "bold magenta",
})

# Global console instance
console = Console(theme=custom_theme)

EXIT_RUNTIME = 1
EXIT_USAGE = 2

# Bad flags, bad config, missing or malformed inputs
USAGE_ERRORS = (
    ConfigError,
    FormatError,
    IntegrityError,
    UnsupportedDtypeError,
    InvalidDataError,
    ShapeError,
    MissingArtifactError,
)


def print_info(message: str) -> None:
    """Print an info message."""
    console.print(f"[info]ℹ[/info] {message}")


def print_success(message: str) -> None:
    """Print a success message."""
    console.print(f"[success]✓[/success] {message}")


def print_warning(message: str) -> None:
    """Print a warning message."""
    console.print(f"[warning]⚠[/warning] {message}")


def print_error(message: str) -> None:
    """Print an error message."""
    console.print(f"[error]✗[/error] {message}")


def print_header(title: str) -> None:
    """Print a section header."""
    console.print(f"\n[bold cyan]{title}[/bold cyan]")
    console.print("─" * len(title))


def setup_logging(verbose: bool = False) -> None:
    """Route library logging through the themed console."""
    handler = RichHandler(console=console, show_path=False, rich_tracebacks=verbose)
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[handler],
        force=True,
    )
    logging.getLogger("PIL").setLevel(logging.WARNING)


@contextmanager
def exit_on_error(action: str) -> Iterator[None]:
    """Map library errors to exit codes: 2 for usage/input, 1 for runtime."""
    try:
        yield
    except typer.Exit:
        raise
    except USAGE_ERRORS as e:
        print_error(f"{action} failed: {e}")
        raise typer.Exit(EXIT_USAGE) from e
    except Exception as e:
        print_error(f"{action} failed: {e}")
        raise typer.Exit(EXIT_RUNTIME) from e


def print_progress(current: int, total: int, metrics: dict, keys: list[str]) -> None:
    """One progress line per epoch or logged step."""
    parts = []
    for key in keys:
        value = metrics.get(key)
        if isinstance(value, float):
            parts.append(f"{key} {value:.4f}")
    console.print(f"  [{current}/{total}] " + "  ".join(parts))
