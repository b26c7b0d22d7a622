"""Minimal command router on top of argparse."""

import argparse
from dataclasses import dataclass, field
from typing import Callable

from src.errors import UsageError

Handler = Callable[[argparse.Namespace], int]


@dataclass
class Argument:
    flags: tuple[str, ...]
    options: dict = field(default_factory=dict)


def arg(*flags: str, **options) -> Argument:
    """Declare a command argument with argparse's add_argument signature."""
    return Argument(flags, options)


class ArgumentParser(argparse.ArgumentParser):
    """Raises instead of exiting with status 2, which is reserved for verdicts."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class Command:
    name: str
    help: str
    handler: Handler
    arguments: list[Argument]


class CommandRouter:
    """Collects verb handlers registered with `@router.command(...)`."""

    def __init__(self):
        self.commands: dict[str, Command] = {}
        self.common: list[Argument] = []

    def command(self, name: str, help: str, *arguments: Argument):
        def register(handler: Handler) -> Handler:
            self.commands[name] = Command(name, help, handler, list(arguments))
            return handler
        return register

    def build_parser(self, prog: str, version: str) -> ArgumentParser:
        parser = ArgumentParser(prog=prog, description="Discrete elastic-plastic decomposition toolkit")
        parser.add_argument("--version", action="version", version=f"%(prog)s {version}")
        shared = ArgumentParser(add_help=False)
        for argument in self.common:
            shared.add_argument(*argument.flags, **argument.options)

        verbs = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=ArgumentParser)
        verbs.required = True
        for command in self.commands.values():
            sub = verbs.add_parser(command.name, help=command.help, parents=[shared])
            for argument in command.arguments:
                sub.add_argument(*argument.flags, **argument.options)
            sub.set_defaults(handler=command.handler)
        return parser
