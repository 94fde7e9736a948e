"""
Main Entry Point for the Multimode Repeater Tool
Builds the command group and loads REPEATER_* settings from a local .env file
"""

import click
from dotenv import load_dotenv

from commands import register_commands
from config import TOOL_NAME, TOOL_VERSION


@click.group('repeater')
@click.version_option(TOOL_VERSION, prog_name=TOOL_NAME)
def repeater():
    """Rates, fidelities and optimal drive settings of multimode quantum repeaters"""


register_commands(repeater)


def main():
    load_dotenv()
    repeater()


if __name__ == '__main__':
    main()
