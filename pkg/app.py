## app.py - Sets up the command-line application.
# It loads the environment, configures logging and registers the command groups from Resources/.

# ------------------------------
# Imports
# ------------------------------

import logging
import os

import click
from dotenv import load_dotenv

# Each group holds the commands of one surface (solving, sweeps, benchmarks, audits)
from Resources.audit import blup as AuditBlueprint
from Resources.bench import blup as BenchBlueprint
from Resources.solve import blup as SolveBlueprint
from Resources.sweep import blup as SweepBlueprint

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def register_blueprint(root: click.Group, blup: click.Group) -> None:
    """Adds every command of `blup` to the root group."""
    for command in blup.commands.values():
        root.add_command(command)


def configure_logging(level_name=None) -> None:
    """RSMA_GLOBOPT_LOG picks the level (default WARNING); DEBUG includes the search trace."""
    name = (level_name or os.getenv("RSMA_GLOBOPT_LOG", "WARNING")).upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        raise click.UsageError(f"unknown log level {name!r}")
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


# ---------------------------------------------
# Application factory
# ---------------------------------------------
def create_app(log_level=None) -> click.Group:
    """Creates the root command group."""
    load_dotenv()

    @click.group(context_settings={"help_option_names": ["-h", "--help"]})
    @click.option("--log-level", default=log_level, help="Overrides RSMA_GLOBOPT_LOG.")
    def app(log_level):
        """Globally optimal rate-splitting beamforming: solve, sweep, benchmark and audit."""
        configure_logging(log_level)

    register_blueprint(app, SolveBlueprint)
    register_blueprint(app, SweepBlueprint)
    register_blueprint(app, BenchBlueprint)
    register_blueprint(app, AuditBlueprint)
    return app


def main() -> None:
    create_app()()


if __name__ == "__main__":
    main()
