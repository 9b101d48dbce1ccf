from pathlib import Path
from typing import Optional

import click

from ..common.config import load_settings
from ..common.tracing import setup_tracing
from .ablate import ablate
from .data import synth
from .enhance import enhance
from .evaluate import evaluate
from .train import train
from .utils import LOG_LEVELS, UodkitGroup, configure_logging
from .validate import gradcheck, losscheck


@click.group(cls=UodkitGroup, context_settings=dict(allow_interspersed_args=False))
@click.option(
    "--log-level",
    default="INFO",
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    help="Set the logging level.",
)
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="JSON or YAML file overriding 'enhance' / 'train' settings.",
)
@click.pass_context
def cli(ctx, log_level: str, config_path: Optional[Path]):
    """Underwater object detection toolkit."""
    configure_logging(log_level)
    ctx.ensure_object(dict)
    try:
        ctx.obj["settings"] = load_settings(config_path)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="'--config'") from e
    setup_tracing("uodkit")


cli.add_command(enhance)
cli.add_command(gradcheck)
cli.add_command(losscheck)
cli.add_command(synth)
cli.add_command(train)
cli.add_command(evaluate)
cli.add_command(ablate)

if __name__ == "__main__":
    cli()
