import functools
import json
import sys
from contextlib import contextmanager
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

import arrow
import click
from loguru import logger
from pydantic import BaseModel, Field

from ..common.config import Settings
from ..common.exceptions import UodkitError

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
LOG_FORMAT = "{time:HH:mm:ss} | {level: <8} | {name} - {message}"


def configure_logging(level: str) -> None:
    """Route loguru to stderr at ``level``; stdout is kept for command results."""
    logger.remove()
    logger.add(sys.stderr, level=level.upper(), format=LOG_FORMAT)


def _log_level_callback(ctx, param, value):
    if value is not None:
        configure_logging(value)
    return value


def global_options(f):
    """Decorator to apply global options to a command."""
    options = [
        click.option(
            "--log-level",
            default=None,
            type=click.Choice(LOG_LEVELS, case_sensitive=False),
            callback=_log_level_callback,
            expose_value=False,
            help="Override the logging level for this command.",
        )
    ]
    return functools.reduce(lambda x, opt: opt(x), options, f)


class UodkitGroup(click.Group):
    """Click group that turns library errors into a one-line message and exit code 1."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except UodkitError as e:
            raise click.ClickException(str(e)) from e


def settings_from(ctx: click.Context) -> Settings:
    return ctx.find_root().obj["settings"]


def tool_version() -> str:
    try:
        return version("uodkit")
    except PackageNotFoundError:
        return "0+unknown"


class RunManifest(BaseModel):
    """What a mutating command did, enough to replay it."""

    command: str
    argv: List[str]
    params: Dict[str, Any]
    config: Dict[str, Any]
    seeds: Dict[str, int] = Field(default_factory=dict)
    version: str = Field(default_factory=tool_version)
    started_at: str = Field(default_factory=lambda: arrow.utcnow().isoformat())
    finished_at: Optional[str] = None
    duration_seconds: Optional[float] = None
    outputs: List[str] = Field(default_factory=list)


@contextmanager
def run_manifest(
    ctx: click.Context, path: Path, seeds: Optional[Dict[str, int]] = None
) -> Iterator[RunManifest]:
    """Yield a manifest for the running command and write it to ``path`` on success."""
    started = arrow.utcnow()
    manifest = RunManifest(
        command=ctx.command_path,
        argv=sys.argv[1:],
        params=json.loads(json.dumps(ctx.params, default=str)),
        config=settings_from(ctx).model_dump(mode="json"),
        seeds=seeds or {},
        started_at=started.isoformat(),
    )
    yield manifest
    finished = arrow.utcnow()
    manifest.finished_at = finished.isoformat()
    manifest.duration_seconds = (finished - started).total_seconds()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest.model_dump_json(indent=2))
    logger.info(f"Wrote run manifest to {path}")
